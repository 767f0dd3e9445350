use crate::error::{Error, Result};

/// Top-3 segmentation classes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelStack {
    width: usize,
    height: usize,
    top3: Vec<[u16; 3]>,
}

impl LabelStack {
    pub fn new(width: usize, height: usize, top3: Vec<[u16; 3]>) -> Result<Self> {
        if width == 0 || height == 0 || top3.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "label stack {width}x{height} needs {} pixels, got {}",
                width * height,
                top3.len()
            )));
        }
        if let Some(i) = top3
            .iter()
            .position(|t| t[0] == t[1] || t[0] == t[2] || t[1] == t[2])
        {
            return Err(Error::InvalidRaster(format!(
                "duplicate class in top-3 at pixel {i}: {:?}",
                top3[i]
            )));
        }
        Ok(Self {
            width,
            height,
            top3,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn top3(&self) -> &[[u16; 3]] {
        &self.top3
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ConsistencyMode {
    /// A pixel counts when one class appears in its top-3 for every stack.
    #[default]
    Intersection,
    /// A pixel counts when each adjacent pair of stacks shares a class.
    Adjacent,
}

fn shares(a: &[u16; 3], b: &[u16; 3]) -> bool {
    a.iter().any(|c| b.contains(c))
}

/// Percentage of pixels whose class survives across the aperture stacks.
pub fn content_consistency(stacks: &[LabelStack], mode: ConsistencyMode) -> Result<f64> {
    if stacks.len() < 2 {
        return Err(Error::TooFewImages(stacks.len()));
    }
    let dims = stacks[0].dims();
    for s in &stacks[1..] {
        if s.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: s.dims(),
            });
        }
    }
    let total = dims.0 * dims.1;
    let consistent = (0..total)
        .filter(|&p| match mode {
            ConsistencyMode::Intersection => stacks[0].top3[p]
                .iter()
                .any(|c| stacks[1..].iter().all(|s| s.top3[p].contains(c))),
            ConsistencyMode::Adjacent => stacks
                .windows(2)
                .all(|w| shares(&w[0].top3[p], &w[1].top3[p])),
        })
        .count();
    Ok(100.0 * consistent as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_and_disjoint() {
        let a = LabelStack::new(2, 1, vec![[1, 2, 3], [4, 5, 6]]).unwrap();
        let b = LabelStack::new(2, 1, vec![[7, 8, 9], [10, 11, 12]]).unwrap();
        for mode in [ConsistencyMode::Intersection, ConsistencyMode::Adjacent] {
            assert_eq!(content_consistency(&[a.clone(), a.clone()], mode).unwrap(), 100.0);
            assert_eq!(content_consistency(&[a.clone(), b.clone()], mode).unwrap(), 0.0);
        }
    }

    #[test]
    fn one_of_two_pixels() {
        let a = LabelStack::new(2, 1, vec![[1, 2, 3], [4, 5, 6]]).unwrap();
        let b = LabelStack::new(2, 1, vec![[9, 8, 3], [10, 11, 12]]).unwrap();
        assert_eq!(
            content_consistency(&[a, b], ConsistencyMode::Intersection).unwrap(),
            50.0
        );
    }

    #[test]
    fn modes_differ_on_chains() {
        // 1 -> {1,2} -> 2: every neighbour pair shares, but nothing is common to all.
        let a = LabelStack::new(1, 1, vec![[1, 20, 30]]).unwrap();
        let b = LabelStack::new(1, 1, vec![[1, 2, 40]]).unwrap();
        let c = LabelStack::new(1, 1, vec![[2, 50, 60]]).unwrap();
        let stacks = [a, b, c];
        assert_eq!(content_consistency(&stacks, ConsistencyMode::Intersection).unwrap(), 0.0);
        assert_eq!(content_consistency(&stacks, ConsistencyMode::Adjacent).unwrap(), 100.0);
    }

    #[test]
    fn validation() {
        assert!(LabelStack::new(1, 1, vec![[1, 1, 2]]).is_err());
        let a = LabelStack::new(1, 1, vec![[1, 2, 3]]).unwrap();
        let b = LabelStack::new(2, 1, vec![[1, 2, 3], [4, 5, 6]]).unwrap();
        assert_eq!(
            content_consistency(&[a.clone(), b], ConsistencyMode::Intersection)
                .unwrap_err()
                .code(),
            "dimension_mismatch"
        );
        assert!(content_consistency(&[a], ConsistencyMode::Intersection).is_err());
    }

    fn distinct3() -> impl Strategy<Value = [u16; 3]> {
        proptest::sample::subsequence((0u16..8).collect::<Vec<_>>(), 3)
            .prop_map(|v| [v[0], v[1], v[2]])
    }

    proptest! {
        #[test]
        fn permutation_invariant(
            px in proptest::collection::vec((distinct3(), distinct3(), distinct3()), 1..20),
            perm in 0usize..6,
        ) {
            let order = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]][perm];
            let shuffle = |t: [u16; 3]| [t[order[0]], t[order[1]], t[order[2]]];
            let n = px.len();
            let build = |f: &dyn Fn(&([u16; 3], [u16; 3], [u16; 3])) -> [u16; 3]| {
                LabelStack::new(n, 1, px.iter().map(f).collect()).unwrap()
            };
            let plain = [build(&|p| p.0), build(&|p| p.1), build(&|p| p.2)];
            let shuffled = [build(&|p| shuffle(p.0)), build(&|p| shuffle(p.1)), build(&|p| shuffle(p.2))];
            for mode in [ConsistencyMode::Intersection, ConsistencyMode::Adjacent] {
                prop_assert_eq!(
                    content_consistency(&plain, mode).unwrap(),
                    content_consistency(&shuffled, mode).unwrap()
                );
            }
        }
    }
}
