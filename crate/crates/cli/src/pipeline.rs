//! The render path shared by the CLI and the HTTP service. Both front ends
//! call into these functions so identical inputs give identical PNG bytes.

use defocus_core::exif::ExifRecord;
use defocus_core::focus::{
    focus_from_saliency, resolve_lens_params, stub_saliency, FocusEstimate, FocusSource,
    LensOverrides, ResolvedLens, SaliencyMap,
};
use defocus_core::io::encode_png16;
use defocus_core::lens::{compute_coc_map, LensModel, ThinLens};
use defocus_core::metrics::{monotonicity_from_energies, signal_energy, EnergyDomain};
use defocus_core::{CocMap, CocStats, DepthMap, Error, Plane, RasterImage, Result};

use crate::report::Report;

/// An all-in-focus image with its depth and optional saliency, dimensions checked.
#[derive(Debug, Clone)]
pub struct Scene {
    pub image: RasterImage,
    pub depth: DepthMap,
    pub saliency: Option<SaliencyMap>,
}

impl Scene {
    pub fn new(image: RasterImage, depth: DepthMap, saliency: Option<SaliencyMap>) -> Result<Self> {
        let dims = image.dims();
        for found in std::iter::once(depth.dims()).chain(saliency.as_ref().map(|s| s.dims())) {
            if found != dims {
                return Err(Error::DimensionMismatch { expected: dims, found });
            }
        }
        Ok(Self {
            image,
            depth,
            saliency,
        })
    }

    /// Focus distance used when the caller does not supply one.
    pub fn default_focus(&self) -> Result<FocusEstimate> {
        match &self.saliency {
            Some(s) => focus_from_saliency(&self.depth, s),
            None => {
                let stub = stub_saliency(&self.image, &self.depth)?;
                Ok(FocusEstimate {
                    source: FocusSource::Stub,
                    ..focus_from_saliency(&self.depth, &stub)?
                })
            }
        }
    }

    pub fn resolve(&self, settings: &LensSettings) -> Result<ResolvedLens> {
        let default_focus = match settings.overrides.focus_distance {
            Some(_) => None,
            None => Some(self.default_focus()?),
        };
        resolve_lens_params(
            settings.exif.as_ref(),
            &settings.overrides,
            self.image.width(),
            default_focus,
            settings.allow_defaults,
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct LensSettings {
    pub overrides: LensOverrides,
    pub exif: Option<ExifRecord>,
    pub allow_defaults: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutputKind {
    #[default]
    Image,
    /// Grey level `coc / coc_max`.
    CocHeatmap,
    /// White where the CoC is below one pixel.
    InFocusMask,
}

impl std::str::FromStr for OutputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "image" => Ok(OutputKind::Image),
            "coc_heatmap" => Ok(OutputKind::CocHeatmap),
            "in_focus_mask" => Ok(OutputKind::InFocusMask),
            other => Err(Error::InvalidParameter {
                name: "output",
                reason: format!("expected image, coc_heatmap or in_focus_mask, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub lens: ResolvedLens,
    pub image: RasterImage,
    pub coc: CocMap,
    pub energy: f64,
}

impl Frame {
    pub fn coc_stats(&self) -> CocStats {
        self.coc.stats()
    }

    pub fn in_focus_rows(&self) -> Vec<usize> {
        in_focus_rows(&self.coc)
    }

    pub fn encode(&self, kind: OutputKind) -> Result<Vec<u8>> {
        let (w, h) = self.coc.dims();
        match kind {
            OutputKind::Image => encode_png16(&self.image),
            OutputKind::CocHeatmap => {
                let max = self.lens.params.coc_max_px;
                let data = self
                    .coc
                    .data()
                    .iter()
                    .map(|&c| if max > 0.0 { c / max } else { 0.0 })
                    .collect();
                encode_png16(&RasterImage::new(w, h, 1, data)?)
            }
            OutputKind::InFocusMask => {
                let data = self.coc.data().iter().map(|&c| f64::from(u8::from(c < 1.0))).collect();
                encode_png16(&RasterImage::new(w, h, 1, data)?)
            }
        }
    }

    pub fn report(&self) -> Report {
        let p = &self.lens.params;
        let stats = self.coc_stats();
        let mut r = Report::default();
        r.push("focus_distance", p.focus_distance)
            .push("focus_source", self.lens.focus_source.as_str())
            .push("f_number", p.f_number)
            .push("focal_length_mm", p.focal_length)
            .push("focus_scale", p.focus_scale)
            .push("pixels_per_unit", p.pixels_per_unit)
            .push("coc_max_px", p.coc_max_px)
            .push("coc_min", stats.min)
            .push("coc_mean", stats.mean)
            .push("coc_max", stats.max)
            .push("signal_energy", self.energy)
            .push("in_focus_rows", format_row_ranges(&self.in_focus_rows()));
        r
    }
}

pub fn render_frame(scene: &Scene, lens: ResolvedLens) -> Result<Frame> {
    let coc = compute_coc_map(&scene.depth, &lens.params)?;
    let image = ThinLens.render(&scene.image, &scene.depth, &lens.params)?;
    let energy = signal_energy(&image, EnergyDomain::Spatial).energy;
    Ok(Frame {
        lens,
        image,
        coc,
        energy,
    })
}

pub fn render(scene: &Scene, settings: &LensSettings) -> Result<Frame> {
    render_frame(scene, scene.resolve(settings)?)
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub frames: Vec<Frame>,
    pub monotonicity: f64,
}

impl Sweep {
    pub fn report(&self) -> Report {
        let mut r = Report::default();
        let first = &self.frames[0].lens;
        r.push("focus_distance", first.params.focus_distance)
            .push("focus_source", first.focus_source.as_str())
            .push("frames", self.frames.len());
        for (i, f) in self.frames.iter().enumerate() {
            r.push(format!("f_number.{i}"), f.lens.params.f_number)
                .push(format!("signal_energy.{i}"), f.energy);
        }
        r.push("blur_monotonicity", self.monotonicity);
        r
    }
}

/// Renders one frame per f-number, everything else resolved once.
pub fn sweep(scene: &Scene, settings: &LensSettings, f_numbers: &[f64]) -> Result<Sweep> {
    if f_numbers.len() < 2 {
        return Err(Error::TooFewImages(f_numbers.len()));
    }
    if f_numbers.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::AperturesNotAscending);
    }
    let mut overrides = settings.overrides;
    overrides.f_number = Some(f_numbers[0]);
    let base = scene.resolve(&LensSettings {
        overrides,
        ..settings.clone()
    })?;
    let frames = f_numbers
        .iter()
        .map(|&n| {
            render_frame(
                scene,
                ResolvedLens {
                    params: base.params.with_f_number(n),
                    ..base
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let energies: Vec<f64> = frames.iter().map(|f| f.energy).collect();
    let monotonicity = monotonicity_from_energies(&energies)?;
    Ok(Sweep {
        frames,
        monotonicity,
    })
}

/// Rows whose median CoC is below one pixel.
pub fn in_focus_rows(coc: &CocMap) -> Vec<usize> {
    let plane: &Plane = coc.plane();
    let (w, h) = plane.dims();
    (0..h)
        .filter(|&y| {
            let mut row = plane.data()[y * w..(y + 1) * w].to_vec();
            row.sort_by(f64::total_cmp);
            let median = if w % 2 == 1 {
                row[w / 2]
            } else {
                0.5 * (row[w / 2 - 1] + row[w / 2])
            };
            median < 1.0
        })
        .collect()
}

/// `3-7,10-10` style inclusive ranges; empty string for no rows.
pub fn format_row_ranges(rows: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut iter = rows.iter().copied().peekable();
    while let Some(start) = iter.next() {
        let mut end = start;
        while iter.peek() == Some(&(end + 1)) {
            end = iter.next().unwrap();
        }
        parts.push(format!("{start}-{end}"));
    }
    parts.join(",")
}
