//! Silhouette ingestion: decode frames, crop to the lower part of the body,
//! binarize, and stack into a normalized 3D binary image.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_traits::ToPrimitive;
use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::{Exact, Scalar};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot decode {path}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("no frames to stack")]
    EmptyStack,
    #[error("frame {index} is {got_width}x{got_height}, expected {width}x{height}")]
    DimensionMismatch {
        index: usize,
        width: usize,
        height: usize,
        got_width: usize,
        got_height: usize,
    },
    #[error("crop fraction must lie in (0, 1], got {0}")]
    InvalidCropFraction(Exact),
    #[error("no decodable frames found in {0}")]
    NoFrames(PathBuf),
}

/// How files in a sequence directory are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameOrder {
    Lexicographic,
    /// Sort by the integer suffix of the file stem (`frame2` before `frame10`);
    /// files without a suffix come last, lexicographically.
    #[default]
    NumericSuffix,
}

/// Ingestion parameters.
#[derive(Debug, Clone)]
pub struct IngestConfig {
    /// Portion of the frame height kept, measured from the bottom.
    pub crop_fraction: Exact,
    /// Grayscale binarization threshold; a pixel is foreground iff value > threshold.
    pub threshold: u8,
    pub order: FrameOrder,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            crop_fraction: Exact::new(1, 4),
            threshold: 128,
            order: FrameOrder::default(),
        }
    }
}

impl IngestConfig {
    /// Config that keeps the whole silhouette.
    pub fn whole_frame() -> Self {
        IngestConfig {
            crop_fraction: Exact::new(1, 1),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), IngestError> {
        let cf = self.crop_fraction;
        if cf <= Exact::new(0, 1) || cf > Exact::new(1, 1) {
            return Err(IngestError::InvalidCropFraction(cf));
        }
        Ok(())
    }
}

/// One binarized silhouette frame.
///
/// The mask is row-major with row 0 at the *bottom* of the image, so the y
/// axis points up and "lowest fourth of the body" means small y.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SilhouetteFrame {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl SilhouetteFrame {
    pub fn from_mask(width: usize, height: usize, mask: Vec<bool>) -> Self {
        assert!(width >= 1 && height >= 1, "frame dimensions must be positive");
        assert_eq!(mask.len(), width * height, "mask must have width*height cells");
        SilhouetteFrame { width, height, mask }
    }

    /// Build a frame from a predicate over (x, y), y = 0 at the bottom.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mask = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        SilhouetteFrame::from_mask(width, height, mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn at(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn foreground_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.iter().all(|&b| !b)
    }

    /// Keep the bottom `ceil(crop * height)` rows.
    pub fn crop_bottom(&self, crop: Exact) -> SilhouetteFrame {
        let keep = crop_rows(self.height, crop);
        SilhouetteFrame::from_fn(self.width, keep, |x, y| self.at(x, y))
    }
}

/// Parse a fraction given as `p/q`, a decimal like `0.25`, or an integer.
/// Decimal strings are read exactly (base 10), not through a float.
pub fn parse_fraction(s: &str) -> Result<Exact, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
        let d: i64 = den.trim().parse().map_err(|e| format!("bad denominator: {e}"))?;
        if d == 0 {
            return Err("zero denominator".into());
        }
        return Ok(Exact::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int: i64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|e| format!("bad integer part: {e}"))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad fractional part in `{s}`"));
        }
        if frac.len() > 12 {
            return Err("more than 12 decimal places".into());
        }
        let digits: i64 = frac.parse().map_err(|e| format!("bad fractional part: {e}"))?;
        let den = 10i64.pow(frac.len() as u32);
        return Ok(Exact::new(int * den + digits, den));
    }
    let n: i64 = s.parse().map_err(|e| format!("bad fraction `{s}`: {e}"))?;
    Ok(Exact::new(n, 1))
}

/// Number of rows kept by a crop fraction, `ceil(crop * height)`, computed exactly.
pub fn crop_rows(height: usize, crop: Exact) -> usize {
    let rows = (crop * Exact::new(height as i64, 1)).ceil();
    rows.to_integer().to_usize().expect("crop row count fits usize").max(1)
}

/// Decode one frame file, binarize, and crop per the config.
pub fn load_frame(path: &Path, cfg: &IngestConfig) -> Result<SilhouetteFrame, IngestError> {
    cfg.validate()?;
    let bytes = fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let img = image::load_from_memory(&bytes)
        .map_err(|source| IngestError::Decode {
            path: path.to_path_buf(),
            source,
        })?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let keep = crop_rows(h, cfg.crop_fraction);
    // Image row 0 is the top; frame row 0 is the bottom of the kept band.
    Ok(SilhouetteFrame::from_fn(w, keep, |x, y| {
        let row = h - 1 - y;
        img.get_pixel(x as u32, row as u32).0[0] > cfg.threshold
    }))
}

/// List, order, and decode every supported frame in a directory.
///
/// Returns the frames plus warnings for frames with no foreground at all
/// (kept in the stack; they contribute no geometry).
pub fn load_sequence(
    dir: &Path,
    cfg: &IngestConfig,
) -> Result<(Vec<SilhouetteFrame>, Vec<String>), IngestError> {
    cfg.validate()?;
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|source| IngestError::Io {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("pbm") | Some("pgm") | Some("png")
            )
        })
        .collect();
    sort_frame_paths(&mut paths, cfg.order);
    if paths.is_empty() {
        return Err(IngestError::NoFrames(dir.to_path_buf()));
    }
    let frames: Vec<SilhouetteFrame> = paths
        .par_iter()
        .map(|p| load_frame(p, cfg))
        .collect::<Result<_, _>>()?;
    let warnings = frames
        .iter()
        .zip(&paths)
        .filter(|(f, _)| f.is_empty())
        .map(|(_, p)| format!("frame {} has no foreground", p.display()))
        .collect();
    Ok((frames, warnings))
}

fn sort_frame_paths(paths: &mut [PathBuf], order: FrameOrder) {
    match order {
        FrameOrder::Lexicographic => paths.sort(),
        FrameOrder::NumericSuffix => paths.sort_by_key(|p| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("");
            let digits: String = stem
                .chars()
                .rev()
                .take_while(|c| c.is_ascii_digit())
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
                .collect();
            (digits.parse::<u64>().unwrap_or(u64::MAX), p.to_path_buf())
        }),
    }
}

/// The voxel stack: a finite foreground inside Z^3 plus the factors mapping
/// voxel indices to normalized coordinates.
///
/// Index (x, y, z) maps to (x*sx, y*sy, z*sz) with sy = 1/max(H-1, 1) so the
/// frame height spans [0, 1], sx = sy to preserve aspect (x may exceed 1 for
/// wide frames), and sz = 1/max(Z-1, 1).
#[derive(Debug, Clone)]
pub struct BinaryImage3D<S> {
    dims: [usize; 3],
    bits: Vec<u64>,
    scale: [S; 3],
}

impl<S: Scalar> BinaryImage3D<S> {
    pub fn new(dims: [usize; 3]) -> Self {
        let height_den = dims[1].saturating_sub(1).max(1);
        let depth_den = dims[2].saturating_sub(1).max(1);
        let sxy = S::one() / S::from_index(height_den);
        let sz = S::one() / S::from_index(depth_den);
        let words = (dims[0] * dims[1] * dims[2]).div_ceil(64);
        BinaryImage3D {
            dims,
            bits: vec![0; words],
            scale: [sxy.clone(), sxy, sz],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn scale(&self) -> &[S; 3] {
        &self.scale
    }

    fn bit_index(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.dims[0] && y < self.dims[1] && z < self.dims[2]);
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        let i = self.bit_index(x, y, z);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.bit_index(x, y, z);
        if value {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    /// Normalized coordinate of a voxel index along an axis.
    pub fn coord(&self, axis: usize, index: usize) -> S {
        S::from_index(index) * self.scale[axis].clone()
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Foreground mask of one z-slice, row-major by y.
    pub fn slice_mask(&self, z: usize) -> Vec<bool> {
        let [xs, ys, _] = self.dims;
        (0..ys)
            .flat_map(|y| (0..xs).map(move |x| (x, y)))
            .map(|(x, y)| self.get(x, y, z))
            .collect()
    }

    /// Voxels on either side of the foreground/background interface
    /// (6-neighborhood).
    pub fn boundary_adjacent_voxels(&self) -> Vec<[usize; 3]> {
        let [xs, ys, zs] = self.dims;
        let mut out = Vec::new();
        for z in 0..zs {
            for y in 0..ys {
                for x in 0..xs {
                    let v = self.get(x, y, z);
                    let mut interface = false;
                    let mut visit = |nx: usize, ny: usize, nz: usize| {
                        if self.get(nx, ny, nz) != v {
                            interface = true;
                        }
                    };
                    if x > 0 {
                        visit(x - 1, y, z);
                    }
                    if x + 1 < xs {
                        visit(x + 1, y, z);
                    }
                    if y > 0 {
                        visit(x, y - 1, z);
                    }
                    if y + 1 < ys {
                        visit(x, y + 1, z);
                    }
                    if z > 0 {
                        visit(x, y, z - 1);
                    }
                    if z + 1 < zs {
                        visit(x, y, z + 1);
                    }
                    // A foreground voxel on the image border faces background too.
                    if v && (x == 0 || x + 1 == xs || y == 0 || y + 1 == ys || z == 0 || z + 1 == zs)
                    {
                        interface = true;
                    }
                    if interface {
                        out.push([x, y, z]);
                    }
                }
            }
        }
        out
    }

    /// Plain-text run-length dump: one line `z y x0 x1` per maximal run.
    pub fn dump_runs(&self, w: &mut impl Write) -> io::Result<()> {
        let [xs, ys, zs] = self.dims;
        for z in 0..zs {
            for y in 0..ys {
                let mut x = 0;
                while x < xs {
                    if self.get(x, y, z) {
                        let start = x;
                        while x < xs && self.get(x, y, z) {
                            x += 1;
                        }
                        writeln!(w, "{} {} {} {}", z, y, start, x - 1)?;
                    } else {
                        x += 1;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Stack frames along z. Frame 0 becomes slice z = 0.
pub fn stack_frames<S: Scalar>(
    frames: &[SilhouetteFrame],
) -> Result<BinaryImage3D<S>, IngestError> {
    let first = frames.first().ok_or(IngestError::EmptyStack)?;
    let (w, h) = (first.width(), first.height());
    for (index, f) in frames.iter().enumerate() {
        if f.width() != w || f.height() != h {
            return Err(IngestError::DimensionMismatch {
                index,
                width: w,
                height: h,
                got_width: f.width(),
                got_height: f.height(),
            });
        }
    }
    let mut img = BinaryImage3D::new([w, h, frames.len()]);
    for (z, f) in frames.iter().enumerate() {
        for y in 0..h {
            for x in 0..w {
                if f.at(x, y) {
                    img.set(x, y, z, true);
                }
            }
        }
    }
    Ok(img)
}
