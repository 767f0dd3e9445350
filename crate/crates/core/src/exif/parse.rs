use super::{ExifError, ExifRecord};

pub mod tags {
    pub const MAKE: u16 = 0x010F;
    pub const MODEL: u16 = 0x0110;
    pub const EXPOSURE_TIME: u16 = 0x829A;
    pub const F_NUMBER: u16 = 0x829D;
    pub const EXIF_IFD_POINTER: u16 = 0x8769;
    pub const FOCAL_LENGTH: u16 = 0x920A;
}

const TYPE_ASCII: u16 = 2;
const TYPE_LONG: u16 = 4;
const TYPE_RATIONAL: u16 = 5;
const TYPE_SRATIONAL: u16 = 10;
const TYPE_IFD: u16 = 13;

const JPEG_SOI: [u8; 2] = [0xFF, 0xD8];
const EXIF_PREFIX: &[u8] = b"Exif\0\0";

type Result<T> = std::result::Result<T, ExifError>;

/// Reads the five filter tags from a JPEG (APP1) or bare TIFF stream.
///
/// Every read is bounds-checked against `bytes`; malformed input yields an
/// [`ExifError`], never a panic.
pub fn parse_exif(bytes: &[u8]) -> Result<ExifRecord> {
    if bytes.starts_with(&JPEG_SOI) {
        match find_exif_segment(bytes)? {
            Some(tiff) => parse_tiff(tiff),
            None => Ok(ExifRecord::default()),
        }
    } else if bytes.starts_with(b"II*\0") || bytes.starts_with(b"MM\0*") {
        parse_tiff(bytes)
    } else {
        Err(ExifError::NotAnImage)
    }
}

fn truncated(offset: usize, len: usize, available: usize) -> ExifError {
    ExifError::TruncatedExif {
        offset,
        len,
        available,
    }
}

fn slice(bytes: &[u8], offset: usize, len: usize) -> Result<&[u8]> {
    offset
        .checked_add(len)
        .and_then(|end| bytes.get(offset..end))
        .ok_or_else(|| truncated(offset, len, bytes.len()))
}

/// Walks JPEG marker segments up to the start of scan looking for `Exif\0\0` APP1.
fn find_exif_segment(bytes: &[u8]) -> Result<Option<&[u8]>> {
    let mut pos = 2;
    loop {
        // Fill bytes before a marker.
        while bytes.get(pos) == Some(&0xFF) && bytes.get(pos + 1) == Some(&0xFF) {
            pos += 1;
        }
        let Some(&[0xFF, marker]) = bytes.get(pos..pos + 2) else {
            return Ok(None);
        };
        match marker {
            0xD9 | 0xDA => return Ok(None),
            0x01 | 0xD0..=0xD8 => {
                pos += 2;
                continue;
            }
            _ => {}
        }
        let len_bytes = slice(bytes, pos + 2, 2)?;
        let len = u16::from_be_bytes([len_bytes[0], len_bytes[1]]) as usize;
        if len < 2 {
            return Err(truncated(pos + 2, len, bytes.len()));
        }
        let payload = slice(bytes, pos + 4, len - 2)?;
        if marker == 0xE1 && payload.starts_with(EXIF_PREFIX) {
            return Ok(Some(&payload[EXIF_PREFIX.len()..]));
        }
        pos += 2 + len;
    }
}

#[derive(Clone, Copy)]
enum Endian {
    Little,
    Big,
}

struct Tiff<'a> {
    bytes: &'a [u8],
    endian: Endian,
}

struct Entry {
    tag: u16,
    kind: u16,
    count: u32,
    /// Offset of the 4-byte value/offset field.
    value_pos: usize,
}

impl<'a> Tiff<'a> {
    fn u16_at(&self, offset: usize) -> Result<u16> {
        let b = slice(self.bytes, offset, 2)?;
        Ok(match self.endian {
            Endian::Little => u16::from_le_bytes([b[0], b[1]]),
            Endian::Big => u16::from_be_bytes([b[0], b[1]]),
        })
    }

    fn u32_at(&self, offset: usize) -> Result<u32> {
        let b = slice(self.bytes, offset, 4)?;
        let b = [b[0], b[1], b[2], b[3]];
        Ok(match self.endian {
            Endian::Little => u32::from_le_bytes(b),
            Endian::Big => u32::from_be_bytes(b),
        })
    }

    fn entries(&self, offset: usize) -> Result<Vec<Entry>> {
        let count = self.u16_at(offset)? as usize;
        let available = self.bytes.len().saturating_sub(offset + 2);
        if count * 12 > available {
            return Err(ExifError::MalformedIfd {
                offset,
                entries: count,
                available,
            });
        }
        (0..count)
            .map(|i| {
                let at = offset + 2 + 12 * i;
                Ok(Entry {
                    tag: self.u16_at(at)?,
                    kind: self.u16_at(at + 2)?,
                    count: self.u32_at(at + 4)?,
                    value_pos: at + 8,
                })
            })
            .collect()
    }

    /// Raw value bytes, inline when they fit in four bytes.
    fn value_bytes(&self, entry: &Entry, unit: usize) -> Result<&'a [u8]> {
        let total = (entry.count as usize)
            .checked_mul(unit)
            .ok_or_else(|| truncated(entry.value_pos, usize::MAX, self.bytes.len()))?;
        if total <= 4 {
            slice(self.bytes, entry.value_pos, total)
        } else {
            let offset = self.u32_at(entry.value_pos)? as usize;
            slice(self.bytes, offset, total)
        }
    }

    fn ascii(&self, entry: &Entry) -> Result<Option<String>> {
        if entry.kind != TYPE_ASCII {
            return Ok(None);
        }
        let raw = self.value_bytes(entry, 1)?;
        let end = raw.iter().position(|&b| b == 0).unwrap_or(raw.len());
        let text = String::from_utf8_lossy(&raw[..end]).trim().to_string();
        Ok((!text.is_empty()).then_some(text))
    }

    /// First component of a (S)RATIONAL tag; non-positive values count as absent.
    fn rational(&self, entry: &Entry) -> Result<Option<f64>> {
        let signed = match entry.kind {
            TYPE_RATIONAL => false,
            TYPE_SRATIONAL => true,
            _ => return Ok(None),
        };
        if entry.count == 0 {
            return Ok(None);
        }
        let offset = self.u32_at(entry.value_pos)? as usize;
        let num = self.u32_at(offset)?;
        let den = self.u32_at(offset + 4)?;
        if den == 0 {
            return Err(ExifError::ZeroDenominator { tag: entry.tag });
        }
        let value = if signed {
            num as i32 as f64 / den as i32 as f64
        } else {
            num as f64 / den as f64
        };
        Ok((value.is_finite() && value > 0.0).then_some(value))
    }

    fn apply(&self, entry: &Entry, rec: &mut ExifRecord) -> Result<()> {
        match entry.tag {
            tags::MAKE => rec.make = self.ascii(entry)?.or(rec.make.take()),
            tags::MODEL => rec.model = self.ascii(entry)?.or(rec.model.take()),
            tags::F_NUMBER => rec.f_number = self.rational(entry)?.or(rec.f_number),
            tags::FOCAL_LENGTH => {
                rec.focal_length_mm = self.rational(entry)?.or(rec.focal_length_mm)
            }
            tags::EXPOSURE_TIME => {
                rec.exposure_time_s = self.rational(entry)?.or(rec.exposure_time_s)
            }
            _ => {}
        }
        Ok(())
    }
}

fn parse_tiff(bytes: &[u8]) -> Result<ExifRecord> {
    let header = slice(bytes, 0, 8)?;
    let endian = match &header[..2] {
        b"II" => Endian::Little,
        b"MM" => Endian::Big,
        _ => return Err(ExifError::NotAnImage),
    };
    let tiff = Tiff { bytes, endian };
    if tiff.u16_at(2)? != 42 {
        return Err(ExifError::NotAnImage);
    }
    let ifd0 = tiff.u32_at(4)? as usize;

    let mut rec = ExifRecord::default();
    let mut exif_ifd = None;
    for entry in tiff.entries(ifd0)? {
        if entry.tag == tags::EXIF_IFD_POINTER
            && (entry.kind == TYPE_LONG || entry.kind == TYPE_IFD)
            && entry.count >= 1
        {
            exif_ifd = Some(tiff.u32_at(entry.value_pos)? as usize);
        } else {
            tiff.apply(&entry, &mut rec)?;
        }
    }
    if let Some(offset) = exif_ifd.filter(|&o| o != ifd0) {
        for entry in tiff.entries(offset)? {
            tiff.apply(&entry, &mut rec)?;
        }
    }
    Ok(rec)
}
