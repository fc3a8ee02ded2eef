//! Topological signatures: sixteen windowed bar-count vectors per sequence.
//!
//! For each plane the barcode's value range [0, k] (k = greatest vertex
//! distance for that plane) is divided into n windows of width h = k/n.
//! Entry 2s counts the classes born before s*h that persist to or die after
//! s*h; entry 2s+1 counts the classes born inside window s. Splitting the
//! counts this way distinguishes classes that persist across a window edge
//! from classes that are reborn, which is what separates two motions whose
//! total class counts agree.
//!
//! All window comparisons are done by cross-multiplication (birth*n vs s*k),
//! so no division is involved and exact scalars stay exact.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::complex::BoundaryComplex;
use crate::filtration::{build_all_filtrations, PlaneId};
use crate::ingest::BinaryImage3D;
use crate::persistence::{reduce, PersistenceBarcode};
use crate::scalar::{cmp_scalar, Exact, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureConfig {
    /// Number of windows per barcode.
    pub n: usize,
}

impl Default for SignatureConfig {
    fn default() -> Self {
        SignatureConfig { n: 24 }
    }
}

impl SignatureConfig {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "window count must be at least 1");
        SignatureConfig { n }
    }
}

/// One 2n-entry count vector for a (plane, dimension) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureVector<E> {
    pub plane: Option<PlaneId>,
    pub dim: u8,
    pub entries: Vec<E>,
}

/// Provenance carried alongside a signature.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureMeta {
    pub source: String,
    pub frame_count: usize,
    pub crop_fraction: Exact,
}

impl Default for SignatureMeta {
    fn default() -> Self {
        SignatureMeta {
            source: String::new(),
            frame_count: 0,
            crop_fraction: Exact::new(1, 1),
        }
    }
}

/// Sixteen vectors (8 planes, dimensions 0 and 1 per plane) plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologicalSignature<E = u64> {
    pub config: SignatureConfig,
    pub vectors: Vec<SignatureVector<E>>,
    pub meta: SignatureMeta,
}

impl<E> TopologicalSignature<E> {
    pub fn vector(&self, plane: PlaneId, dim: u8) -> &SignatureVector<E> {
        self.vectors
            .iter()
            .find(|v| v.plane == Some(plane) && v.dim == dim)
            .expect("signature holds all sixteen vectors")
    }
}

impl TopologicalSignature<u64> {
    pub fn to_f64(&self) -> TopologicalSignature<f64> {
        TopologicalSignature {
            config: self.config.clone(),
            vectors: self
                .vectors
                .iter()
                .map(|v| SignatureVector {
                    plane: v.plane,
                    dim: v.dim,
                    entries: v.entries.iter().map(|&e| e as f64).collect(),
                })
                .collect(),
            meta: self.meta.clone(),
        }
    }
}

/// Apply the windowed counting procedure to one barcode dimension.
pub fn vectorize<S: Scalar>(
    barcode: &PersistenceBarcode<S>,
    dim: u8,
    cfg: &SignatureConfig,
) -> SignatureVector<u64> {
    let n = cfg.n;
    let mut entries = vec![0u64; 2 * n];
    let k = barcode.max_vertex_value();
    let bars: Vec<_> = barcode.bars_of_dim(dim).collect();
    if bars.is_empty() {
        return SignatureVector {
            plane: barcode.plane(),
            dim,
            entries,
        };
    }
    if k.is_zero() {
        // Degenerate range: everything is born (and any finite death happens)
        // at value 0, i.e. inside the first window.
        entries[1] = bars.len() as u64;
        return SignatureVector {
            plane: barcode.plane(),
            dim,
            entries,
        };
    }
    // window_edges[s] = s * k; comparing birth * n against them is the same
    // as comparing birth against s * (k/n).
    let window_edges: Vec<S> = (0..n).map(|s| S::from_index(s) * k.clone()).collect();
    let n_scalar = S::from_index(n);
    for bar in bars {
        let birth_n = bar.birth.clone() * n_scalar.clone();
        let death_n = bar.death.as_ref().map(|d| d.clone() * n_scalar.clone());
        // Birth window: largest s with s*h <= birth; a birth exactly at k
        // lands in the last window.
        let s = window_edges
            .iter()
            .rposition(|edge| cmp_scalar(edge, &birth_n).is_le())
            .expect("window 0 starts at 0 <= birth");
        entries[2 * s + 1] += 1;
        for (w, edge) in window_edges.iter().enumerate().skip(1) {
            let born_before = cmp_scalar(&birth_n, edge).is_lt();
            let alive_at = match &death_n {
                None => true,
                Some(d) => cmp_scalar(d, edge).is_ge(),
            };
            if born_before && alive_at {
                entries[2 * w] += 1;
            }
        }
    }
    SignatureVector {
        plane: barcode.plane(),
        dim,
        entries,
    }
}

/// Full signature of a boundary complex: 8 filtrations, 8 reductions,
/// 16 vectorizations. An empty complex yields 16 zero vectors.
pub fn signature<S: Scalar>(
    complex: &BoundaryComplex<S>,
    cfg: &SignatureConfig,
) -> TopologicalSignature<u64> {
    use rayon::prelude::*;
    let filtrations = build_all_filtrations(complex);
    let barcodes: Vec<PersistenceBarcode<S>> = filtrations
        .par_iter()
        .map(|f| reduce(f).expect("complex-derived filtrations are valid"))
        .collect();
    let vectors = barcodes
        .iter()
        .flat_map(|bc| [vectorize(bc, 0, cfg), vectorize(bc, 1, cfg)])
        .collect();
    TopologicalSignature {
        config: cfg.clone(),
        vectors,
        meta: SignatureMeta::default(),
    }
}

/// Signature straight from a voxel stack.
pub fn signature_of_image<S: Scalar>(
    img: &BinaryImage3D<S>,
    cfg: &SignatureConfig,
) -> TopologicalSignature<u64> {
    let q = crate::complex::build_cubical(img);
    let k = crate::complex::extract_boundary(&q, img);
    let mut sig = signature(&k, cfg);
    sig.meta.frame_count = img.dims()[2];
    sig
}

/// End-to-end: decode a sequence directory and sign it on the exact-scalar
/// pipeline. Returns the signature and any ingest warnings.
pub fn sign_directory(
    dir: &std::path::Path,
    ingest_cfg: &crate::ingest::IngestConfig,
    sig_cfg: &SignatureConfig,
) -> Result<(TopologicalSignature<u64>, Vec<String>), crate::ingest::IngestError> {
    let (frames, warnings) = crate::ingest::load_sequence(dir, ingest_cfg)?;
    let img = crate::ingest::stack_frames::<Exact>(&frames)?;
    let mut sig = signature_of_image(&img, sig_cfg);
    sig.meta.source = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    sig.meta.crop_fraction = ingest_cfg.crop_fraction;
    Ok((sig, warnings))
}

#[derive(Debug, Error)]
pub enum SignatureIoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad signature header: {0}")]
    Header(String),
    #[error("bad signature body: {0}")]
    Body(String),
}

/// Write the byte-deterministic signature file format.
pub fn write_signature(
    sig: &TopologicalSignature<u64>,
    w: &mut impl Write,
) -> io::Result<()> {
    writeln!(w, "persig v1 n={} planes=8", sig.config.n)?;
    let source = if sig.meta.source.is_empty() {
        "-".to_string()
    } else {
        sig.meta.source.replace(char::is_whitespace, "_")
    };
    writeln!(
        w,
        "# source={} frames={} crop={}",
        source, sig.meta.frame_count, sig.meta.crop_fraction
    )?;
    for v in &sig.vectors {
        let plane = v.plane.map_or("-", PlaneId::label);
        let mut line = format!("plane={} dim={} :", plane, v.dim);
        for e in &v.entries {
            write!(line, " {}", e).expect("write to string");
        }
        writeln!(w, "{}", line)?;
    }
    Ok(())
}

/// Parse the signature file format.
pub fn read_signature(r: impl BufRead) -> Result<TopologicalSignature<u64>, SignatureIoError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| SignatureIoError::Header("empty file".into()))??;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("persig") || tokens.next() != Some("v1") {
        return Err(SignatureIoError::Header(format!(
            "expected `persig v1 ...`, got `{header}`"
        )));
    }
    let mut n: Option<usize> = None;
    for tok in tokens {
        if let Some(v) = tok.strip_prefix("n=") {
            n = Some(
                v.parse()
                    .map_err(|e| SignatureIoError::Header(format!("bad n: {e}")))?,
            );
        }
    }
    let n = n.ok_or_else(|| SignatureIoError::Header("missing n=".into()))?;
    if n == 0 {
        return Err(SignatureIoError::Header("n must be positive".into()));
    }

    let mut meta = SignatureMeta::default();
    let mut vectors = Vec::with_capacity(16);
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for tok in rest.split_whitespace() {
                if let Some(v) = tok.strip_prefix("source=") {
                    if v != "-" {
                        meta.source = v.to_string();
                    }
                } else if let Some(v) = tok.strip_prefix("frames=") {
                    meta.frame_count = v.parse().unwrap_or(0);
                } else if let Some(v) = tok.strip_prefix("crop=") {
                    if let Ok(c) = crate::ingest::parse_fraction(v) {
                        meta.crop_fraction = c;
                    }
                }
            }
            continue;
        }
        let (head, body) = line
            .split_once(':')
            .ok_or_else(|| SignatureIoError::Body(format!("missing `:` in `{line}`")))?;
        let mut plane = None;
        let mut dim = None;
        for tok in head.split_whitespace() {
            if let Some(v) = tok.strip_prefix("plane=") {
                plane = PlaneId::parse(v);
                if v != "-" && plane.is_none() {
                    return Err(SignatureIoError::Body(format!("unknown plane `{v}`")));
                }
            } else if let Some(v) = tok.strip_prefix("dim=") {
                dim = Some(
                    v.parse::<u8>()
                        .map_err(|e| SignatureIoError::Body(format!("bad dim: {e}")))?,
                );
            }
        }
        let dim = dim.ok_or_else(|| SignatureIoError::Body("missing dim=".into()))?;
        let entries: Vec<u64> = body
            .split_whitespace()
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|e| SignatureIoError::Body(format!("bad entry `{t}`: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if entries.len() != 2 * n {
            return Err(SignatureIoError::Body(format!(
                "vector has {} entries, expected {}",
                entries.len(),
                2 * n
            )));
        }
        vectors.push(SignatureVector { plane, dim, entries });
    }
    if vectors.len() != 16 {
        return Err(SignatureIoError::Body(format!(
            "expected 16 vectors, found {}",
            vectors.len()
        )));
    }
    Ok(TopologicalSignature {
        config: SignatureConfig::new(n),
        vectors,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::Bar;

    fn barcode(bars: Vec<Bar<Exact>>, k: Exact) -> PersistenceBarcode<Exact> {
        PersistenceBarcode::new(Some(PlaneId::X0), bars, k, 1.0)
    }

    fn ex(n: i64, d: i64) -> Exact {
        Exact::new(n, d)
    }

    #[test]
    fn empty_barcode_gives_zero_vector() {
        let b = barcode(vec![], ex(1, 1));
        let v = vectorize(&b, 0, &SignatureConfig::new(4));
        assert_eq!(v.entries, vec![0; 8]);
    }

    #[test]
    fn bar_inside_first_window_counts_once_odd() {
        // Born and dying inside window 0 adds 1 only to entry 1.
        let b = barcode(
            vec![Bar { dim: 0, birth: ex(1, 10), death: Some(ex(2, 10)) }],
            ex(1, 1),
        );
        let v = vectorize(&b, 0, &SignatureConfig::new(4));
        assert_eq!(v.entries, vec![0, 1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn infinite_bar_from_zero_spans_every_window() {
        let b = barcode(vec![Bar { dim: 0, birth: ex(0, 1), death: None }], ex(1, 1));
        let v = vectorize(&b, 0, &SignatureConfig::new(4));
        assert_eq!(v.entries, vec![0, 1, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn finite_bar_spans_windows_strictly_after_birth() {
        // Birth in window 0, death in window 2: entries 2 and 4 pick it up.
        let b = barcode(
            vec![Bar { dim: 0, birth: ex(1, 10), death: Some(ex(6, 10)) }],
            ex(1, 1),
        );
        let v = vectorize(&b, 0, &SignatureConfig::new(4));
        assert_eq!(v.entries, vec![0, 1, 1, 0, 1, 0, 0, 0]);
    }

    #[test]
    fn death_exactly_at_window_edge_counts_as_alive() {
        // Death at 0.5 = window edge 2*h: counts in entry at that edge.
        let b = barcode(
            vec![Bar { dim: 1, birth: ex(0, 1), death: Some(ex(1, 2)) }],
            ex(1, 1),
        );
        let v = vectorize(&b, 1, &SignatureConfig::new(4));
        assert_eq!(v.entries, vec![0, 1, 1, 0, 1, 0, 0, 0]);
    }

    #[test]
    fn birth_exactly_at_range_end_lands_in_last_window() {
        let b = barcode(vec![Bar { dim: 0, birth: ex(1, 1), death: None }], ex(1, 1));
        let v = vectorize(&b, 0, &SignatureConfig::new(4));
        assert_eq!(v.entries, vec![0, 0, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn single_window_vector_is_bar_count() {
        let b = barcode(
            vec![
                Bar { dim: 0, birth: ex(0, 1), death: Some(ex(1, 2)) },
                Bar { dim: 0, birth: ex(1, 4), death: None },
                Bar { dim: 0, birth: ex(3, 4), death: Some(ex(1, 1)) },
            ],
            ex(1, 1),
        );
        let v = vectorize(&b, 0, &SignatureConfig::new(1));
        assert_eq!(v.entries, vec![0, 3]);
    }

    #[test]
    fn odd_entries_sum_to_bar_count_and_evens_step_bound() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..12usize);
            let k = ex(rng.gen_range(1..40), rng.gen_range(1..8));
            let bars: Vec<Bar<Exact>> = (0..rng.gen_range(0..25))
                .map(|_| {
                    let birth = k * ex(rng.gen_range(0..=100), 100);
                    let death = if rng.gen_bool(0.3) {
                        None
                    } else {
                        let d = birth + k * ex(rng.gen_range(1..=100), 100);
                        Some(if d > k { k } else { d })
                    };
                    match death {
                        Some(d) if d <= birth => Bar { dim: 0, birth, death: None },
                        _ => Bar { dim: 0, birth, death },
                    }
                })
                .collect();
            let total = bars.len() as u64;
            let v = vectorize(&barcode(bars, k), 0, &SignatureConfig::new(n));
            let odd_sum: u64 = v.entries.iter().skip(1).step_by(2).sum();
            assert_eq!(odd_sum, total);
            assert_eq!(v.entries[0], 0);
            for s in 1..n {
                // A class alive at s*h was alive at (s-1)*h or born in window s-1.
                assert!(v.entries[2 * s] <= v.entries[2 * (s - 1)] + v.entries[2 * s - 1]);
            }
        }
    }

    #[test]
    fn empty_complex_signature_is_all_zero() {
        let complex = crate::complex::BoundaryComplex::<Exact>::from_parts(
            vec![],
            vec![],
            vec![],
        )
        .unwrap();
        let sig = signature(&complex, &SignatureConfig::default());
        assert_eq!(sig.vectors.len(), 16);
        for v in &sig.vectors {
            assert_eq!(v.entries.len(), 48);
            assert!(v.entries.iter().all(|&e| e == 0));
        }
    }

    #[test]
    fn default_layout_is_sixteen_vectors_of_48() {
        let frame = crate::ingest::SilhouetteFrame::from_fn(3, 3, |x, y| x != 1 || y != 1);
        let img = crate::ingest::stack_frames::<Exact>(&vec![frame; 3]).unwrap();
        let sig = signature_of_image(&img, &SignatureConfig::default());
        assert_eq!(sig.vectors.len(), 16);
        assert!(sig.vectors.iter().all(|v| v.entries.len() == 48));
        // plane-major, dimension-minor layout
        let expected: Vec<(Option<PlaneId>, u8)> = PlaneId::ALL
            .iter()
            .flat_map(|&p| [(Some(p), 0u8), (Some(p), 1u8)])
            .collect();
        let got: Vec<(Option<PlaneId>, u8)> =
            sig.vectors.iter().map(|v| (v.plane, v.dim)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn signature_file_round_trip() {
        let frame = crate::ingest::SilhouetteFrame::from_fn(4, 3, |x, _| x < 3);
        let img = crate::ingest::stack_frames::<Exact>(&vec![frame; 2]).unwrap();
        let mut sig = signature_of_image(&img, &SignatureConfig::new(6));
        sig.meta.source = "unit".into();
        sig.meta.crop_fraction = ex(1, 4);
        let mut buf = Vec::new();
        write_signature(&sig, &mut buf).unwrap();
        let back = read_signature(&buf[..]).unwrap();
        assert_eq!(back, sig);
    }

    #[test]
    fn read_rejects_wrong_entry_count() {
        let text = "persig v1 n=2 planes=8\nplane=X0 dim=0 : 0 1\n";
        let err = read_signature(text.as_bytes()).unwrap_err();
        assert!(matches!(err, SignatureIoError::Body(_)));
    }
}
