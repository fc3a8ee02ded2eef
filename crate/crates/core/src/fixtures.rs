//! Synthetic silhouette sequences: a bundled three-class fixture for the
//! evaluation harness, random sequences for stability experiments, and the
//! period-doubling construction.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ingest::{BinaryImage3D, SilhouetteFrame};
use crate::scalar::Scalar;

/// Write a binary (P5) graymap.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> io::Result<()> {
    assert_eq!(pixels.len(), width * height);
    let mut f = fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", width, height)?;
    f.write_all(pixels)
}

/// Render a frame back to image pixels (row 0 at the top, 255 = foreground).
pub fn frame_to_pixels(frame: &SilhouetteFrame) -> Vec<u8> {
    let (w, h) = (frame.width(), frame.height());
    let mut px = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            if frame.at(x, y) {
                px[(h - 1 - y) * w + x] = 255;
            }
        }
    }
    px
}

/// Write one frame per file: f000.pgm, f001.pgm, ...
pub fn write_sequence_dir(dir: &Path, frames: &[SilhouetteFrame]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (i, frame) in frames.iter().enumerate() {
        let px = frame_to_pixels(frame);
        write_pgm(
            &dir.join(format!("f{:03}.pgm", i)),
            frame.width(),
            frame.height(),
            &px,
        )?;
    }
    Ok(())
}

/// Symmetric triangle wave over 0..=amplitude with the given period.
fn triangle_wave(t: usize, period: usize, amplitude: usize) -> usize {
    let p = t % period;
    let half = period / 2;
    if p <= half {
        amplitude * p / half.max(1)
    } else {
        amplitude * (period - p) / (period - half).max(1)
    }
}

const FIXTURE_W: usize = 24;
const FIXTURE_H: usize = 16;
const FIXTURE_FRAMES: usize = 8;

fn solid_rect(x0: usize, y0: usize, w: usize, h: usize) -> impl Fn(usize, usize) -> bool {
    move |x, y| x >= x0 && x < x0 + w && y >= y0 && y < y0 + h
}

/// Samples of one class share their shape and differ in sway amplitude and
/// phase, the way repeated recordings of one motion would. The period and
/// amplitudes keep the per-frame shift at one voxel, so swaying solids stay
/// connected across slabs.
fn sample_amplitude(sample: usize) -> usize {
    2 + sample % 2
}

const FIXTURE_PERIOD: usize = 6;

/// A solid block swaying horizontally. One component, no tunnels.
pub fn box_sequence(sample: usize) -> Vec<SilhouetteFrame> {
    (0..FIXTURE_FRAMES)
        .map(|z| {
            let x0 = 3 + triangle_wave(z + sample, FIXTURE_PERIOD, sample_amplitude(sample));
            SilhouetteFrame::from_fn(FIXTURE_W, FIXTURE_H, solid_rect(x0, 2, 10, 9))
        })
        .collect()
}

/// A swaying square ring: the whole ring translates rigidly so the hole
/// stays an open channel. One component, torus surface.
pub fn annulus_sequence(sample: usize) -> Vec<SilhouetteFrame> {
    (0..FIXTURE_FRAMES)
        .map(|z| {
            let x0 = 3 + triangle_wave(z + sample, FIXTURE_PERIOD, sample_amplitude(sample));
            SilhouetteFrame::from_fn(FIXTURE_W, FIXTURE_H, move |x, y| {
                let in_outer = (x0..x0 + 12).contains(&x) && (1..13).contains(&y);
                let in_hole = (x0 + 4..x0 + 8).contains(&x) && (5..9).contains(&y);
                in_outer && !in_hole
            })
        })
        .collect()
}

/// Two vertical bars opening and closing. Two components throughout.
pub fn bars_sequence(sample: usize) -> Vec<SilhouetteFrame> {
    (0..FIXTURE_FRAMES)
        .map(|z| {
            let gap = 3 + triangle_wave(z + sample, FIXTURE_PERIOD, sample_amplitude(sample));
            let left = solid_rect(2, 2, 4, 12);
            let right = solid_rect(6 + gap, 2, 4, 12);
            SilhouetteFrame::from_fn(FIXTURE_W, FIXTURE_H, move |x, y| {
                left(x, y) || right(x, y)
            })
        })
        .collect()
}

pub const FIXTURE_CLASSES: [&str; 3] = ["annulus", "bars", "box"];
pub const FIXTURE_SAMPLES_PER_CLASS: usize = 6;

/// The bundled three-class fixture: (label, sample index, frames).
pub fn three_class_fixture() -> Vec<(&'static str, usize, Vec<SilhouetteFrame>)> {
    let mut out = Vec::new();
    for label in FIXTURE_CLASSES {
        for sample in 0..FIXTURE_SAMPLES_PER_CLASS {
            let frames = match label {
                "annulus" => annulus_sequence(sample),
                "bars" => bars_sequence(sample),
                "box" => box_sequence(sample),
                _ => unreachable!(),
            };
            out.push((label, sample, frames));
        }
    }
    out
}

/// Materialize the three-class fixture on disk together with a
/// cross-validated evaluation manifest. Returns the manifest path.
pub fn write_three_class_fixture(root: &Path) -> io::Result<std::path::PathBuf> {
    let mut manifest = String::from(
        "n = 24\ncrop_fraction = \"1\"\nthreshold = 128\norder = \"numeric-suffix\"\n\n[cv]\ntrain_per_subject = 4\n\n",
    );
    for (label, sample, frames) in three_class_fixture() {
        let rel = format!("{}_s{}", label, sample);
        write_sequence_dir(&root.join(&rel), &frames)?;
        manifest.push_str(&format!(
            "[[sample]]\nlabel = \"{}\"\npath = \"{}\"\n\n",
            label, rel
        ));
    }
    let path = root.join("manifest.toml");
    fs::write(&path, manifest)?;
    Ok(path)
}

/// Size preset for [`random_sequence_sized`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceSize {
    /// Small frames, quick to sign.
    Compact,
    /// Larger, busier frames whose barcodes hold enough bars that small
    /// voxel perturbations stay small in angle.
    Dense,
}

/// A compact random synthetic sequence.
pub fn random_sequence(rng: &mut impl Rng) -> Vec<SilhouetteFrame> {
    random_sequence_sized(rng, SequenceSize::Compact)
}

/// A random synthetic sequence: drifting solid blobs (one of them a ring)
/// plus a grid of small separate blocks, roughened by per-frame contour
/// dents and interior pinholes the way real segmentation masks are.
/// Guaranteed non-empty cubical complex.
///
/// Dents only ever move the contour inward, so every extreme of the shape
/// is a flat face or a full-depth corner column of some rigid hull; the
/// greatest vertex distance to each reference plane is attained by many
/// vertices and single-voxel changes cannot move it.
pub fn random_sequence_sized(rng: &mut impl Rng, size: SequenceSize) -> Vec<SilhouetteFrame> {
    let cell_w = 8i64;
    let cell_h = 7i64;
    let (cells_x, cells_y, frames, blob_count) = match size {
        SequenceSize::Compact => (5i64, 4i64, rng.gen_range(8..=12), rng.gen_range(4..=6)),
        SequenceSize::Dense => (8, 6, rng.gen_range(10..=14), rng.gen_range(6..=8)),
    };
    let width = (cells_x * cell_w) as usize;
    let height = (cells_y * cell_h) as usize;
    struct Blob {
        x: i64,
        y: i64,
        w: i64,
        h: i64,
        ring: bool,
        // random-walk bounds for the top-left corner
        x_range: (i64, i64),
        y_range: (i64, i64),
    }
    let mut blobs: Vec<Blob> = (0..blob_count)
        .map(|i| {
            let w = rng.gen_range(7..=13);
            let h = rng.gen_range(7..=12);
            Blob {
                x: rng.gen_range(0..=(width as i64 - w)),
                y: rng.gen_range(0..=(height as i64 - h)),
                w,
                h,
                ring: i == 0,
                x_range: (0, width as i64 - w),
                y_range: (0, height as i64 - h),
            }
        })
        .collect();
    // Separate small blocks, one per grid cell and confined to it with a
    // one-voxel gap, so they never merge with each other: every survivor is
    // its own surface component.
    let mut micros: Vec<Blob> = Vec::new();
    for cell_y in 0..cells_y {
        for cell_x in 0..cells_x {
            if rng.gen_bool(0.85) {
                let w = rng.gen_range(3..=4);
                let h = 3;
                let x_range = (cell_x * cell_w, cell_x * cell_w + cell_w - w - 1);
                let y_range = (cell_y * cell_h, cell_y * cell_h + cell_h - h - 1);
                micros.push(Blob {
                    x: rng.gen_range(x_range.0..=x_range.1),
                    y: rng.gen_range(y_range.0..=y_range.1),
                    w,
                    h,
                    ring: false,
                    x_range,
                    y_range,
                });
            }
        }
    }
    (0..frames)
        .map(|_| {
            for b in blobs.iter_mut().chain(micros.iter_mut()) {
                b.x = (b.x + rng.gen_range(-1..=1)).clamp(b.x_range.0, b.x_range.1);
                b.y = (b.y + rng.gen_range(-1..=1)).clamp(b.y_range.0, b.y_range.1);
            }
            let mut mask = vec![false; width * height];
            for b in blobs.iter().chain(micros.iter()) {
                for y in b.y..b.y + b.h {
                    for x in b.x..b.x + b.w {
                        let hole = b.ring
                            && x >= b.x + 2
                            && x < b.x + b.w - 2
                            && y >= b.y + 2
                            && y < b.y + b.h - 2;
                        if !hole {
                            mask[y as usize * width + x as usize] = true;
                        }
                    }
                }
            }
            dent_contour(&mut mask, width, height, rng);
            // Pinholes deep inside the large blobs seed short-lived tunnels.
            for b in &blobs {
                for y in b.y + 2..b.y + b.h - 2 {
                    for x in b.x + 2..b.x + b.w - 2 {
                        if rng.gen_bool(0.22) {
                            mask[y as usize * width + x as usize] = false;
                        }
                    }
                }
            }
            SilhouetteFrame::from_mask(width, height, mask)
        })
        .collect()
}

/// Per-frame contour noise, inward only: foreground voxels on the
/// 4-neighborhood interface are dropped with a fixed probability.
fn dent_contour(mask: &mut [bool], width: usize, height: usize, rng: &mut impl Rng) {
    let original = mask.to_vec();
    let at = |x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height
            && original[y as usize * width + x as usize]
    };
    for y in 0..height as i64 {
        for x in 0..width as i64 {
            let idx = y as usize * width + x as usize;
            if !original[idx] {
                continue;
            }
            let exposed = [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
                .iter()
                .any(|&(nx, ny)| !at(nx, ny));
            if exposed && rng.gen_bool(0.12) {
                mask[idx] = false;
            }
        }
    }
}

/// Concatenate a sequence with itself, separated by one empty frame so the
/// two copies share no cubes.
pub fn double_with_gap(frames: &[SilhouetteFrame]) -> Vec<SilhouetteFrame> {
    let first = &frames[0];
    let gap = SilhouetteFrame::from_fn(first.width(), first.height(), |_, _| false);
    let mut out = frames.to_vec();
    out.push(gap);
    out.extend_from_slice(frames);
    out
}

/// Flip the given fraction of the voxels adjacent to the foreground /
/// background interface, chosen uniformly without replacement.
pub fn perturb_image<S: Scalar>(
    img: &BinaryImage3D<S>,
    fraction: f64,
    rng: &mut impl Rng,
) -> BinaryImage3D<S> {
    let candidates = img.boundary_adjacent_voxels();
    let count = ((candidates.len() as f64 * fraction).round() as usize)
        .max(1)
        .min(candidates.len());
    let mut out = img.clone();
    for &[x, y, z] in candidates.choose_multiple(rng, count) {
        let v = out.get(x, y, z);
        out.set(x, y, z, !v);
    }
    out
}
