//! Binary PGM (P5), 8-bit and 16-bit big-endian, single channel.
//!
//! Writing always emits the canonical header `P5\n<w> <h>\n<maxval>\n`, so a
//! read/write round trip is byte-identical for files already in that form.
//! Comments and arbitrary header whitespace are accepted on input. Only the
//! first image of a multi-image file is read.

use std::fs;
use std::path::Path;

use nfr_core::Image64;
use thiserror::Error;

use crate::error::{CliError, Result};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgmError {
    #[error("not a binary PGM (expected magic P5)")]
    BadMagic,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("pixel data truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("sample {index} is {value}, above maxval {maxval}")]
    SampleOutOfRange { index: usize, value: u16, maxval: u16 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    width: usize,
    height: usize,
    maxval: u16,
    samples: Vec<u16>,
}

impl Pgm {
    pub fn new(width: usize, height: usize, maxval: u16, samples: Vec<u16>) -> std::result::Result<Self, PgmError> {
        if width == 0 || height == 0 {
            return Err(PgmError::BadHeader(format!("empty image {width}x{height}")));
        }
        if maxval == 0 {
            return Err(PgmError::BadHeader("maxval must be in 1..=65535".into()));
        }
        if samples.len() != width * height {
            return Err(PgmError::Truncated {
                expected: width * height,
                found: samples.len(),
            });
        }
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, &v)| v > maxval) {
            return Err(PgmError::SampleOutOfRange { index, value, maxval });
        }
        Ok(Self {
            width,
            height,
            maxval,
            samples,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn maxval(&self) -> u16 {
        self.maxval
    }

    pub fn samples(&self) -> &[u16] {
        &self.samples
    }

    fn bytes_per_sample(&self) -> usize {
        if self.maxval < 256 {
            1
        } else {
            2
        }
    }

    pub fn decode(bytes: &[u8]) -> std::result::Result<Self, PgmError> {
        if bytes.len() < 2 || &bytes[..2] != b"P5" {
            return Err(PgmError::BadMagic);
        }
        let mut pos = 2;
        let width = header_number(bytes, &mut pos, "width")?;
        let height = header_number(bytes, &mut pos, "height")?;
        let maxval = header_number(bytes, &mut pos, "maxval")?;
        if maxval == 0 || maxval > 65535 {
            return Err(PgmError::BadHeader(format!("maxval {maxval} outside 1..=65535")));
        }
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(pos) {
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            _ => return Err(PgmError::BadHeader("missing whitespace after maxval".into())),
        }
        let count = width
            .checked_mul(height)
            .ok_or_else(|| PgmError::BadHeader("dimensions overflow".into()))?;
        let wide = maxval >= 256;
        let expected = count * if wide { 2 } else { 1 };
        let raster = &bytes[pos..];
        if raster.len() < expected {
            return Err(PgmError::Truncated {
                expected,
                found: raster.len(),
            });
        }
        let samples = if wide {
            raster[..expected]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        } else {
            raster[..expected].iter().map(|&b| b as u16).collect()
        };
        Self::new(width, height, maxval as u16, samples)
    }

    pub fn encode(&self) -> Vec<u8> {
        let header = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval);
        let mut out = Vec::with_capacity(header.len() + self.samples.len() * self.bytes_per_sample());
        out.extend_from_slice(header.as_bytes());
        if self.bytes_per_sample() == 1 {
            out.extend(self.samples.iter().map(|&s| s as u8));
        } else {
            out.extend(self.samples.iter().flat_map(|s| s.to_be_bytes()));
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::decode(&bytes).map_err(|source| CliError::Format {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()).map_err(|e| CliError::io(path, e))
    }

    /// Samples as a `height × width` float image.
    pub fn to_image(&self) -> Image64 {
        Image64::new(
            self.samples.iter().map(|&s| s as f64).collect(),
            vec![self.height, self.width],
        )
        .expect("dimensions checked at construction")
    }

    /// Rounds to the nearest integer and saturates to `[0, maxval]`. Returns
    /// the image and the number of saturated samples.
    pub fn from_image(img: &Image64, maxval: u16) -> Result<(Self, usize)> {
        let (height, width) = img.dims2()?;
        let top = maxval as f64;
        let mut saturated = 0;
        let samples = img
            .data()
            .iter()
            .map(|&v| {
                let r = v.round();
                if r < 0.0 || r > top {
                    saturated += 1;
                }
                r.clamp(0.0, top) as u16
            })
            .collect();
        let pgm = Self::new(width, height, maxval, samples).expect("samples saturated to maxval");
        Ok((pgm, saturated))
    }
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> std::result::Result<usize, PgmError> {
    // skip whitespace and `#` comments running to end of line
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| b.is_ascii_digit()) {
        *pos += 1;
    }
    if start == *pos {
        return Err(PgmError::BadHeader(format!("expected {what}")));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .expect("ascii digits")
        .parse()
        .map_err(|_| PgmError::BadHeader(format!("{what} too large")))
}
