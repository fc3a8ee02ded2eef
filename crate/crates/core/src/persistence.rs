//! Persistence of a filtration by boundary-matrix reduction over GF(2).
//!
//! Columns are processed in filtration order, triangles before edges so that
//! every edge paired by a triangle column can be cleared without reducing it.
//! Columns are sorted index lists merged by symmetric difference; the
//! complexes are 2-dimensional and sparse, so nothing fancier is needed.
//!
//! A simplex whose reduced column vanishes creates a class (positive); one
//! whose column survives destroys the class created at its final low entry.
//! Bars born and dying at the same filter value are discarded.

use std::collections::HashMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::complex::BoundaryComplex;
use crate::filtration::{Filtration, PlaneId, Simplex};
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("filtration is missing face {face:?} of {coface:?}")]
    MissingFace { face: Simplex, coface: Simplex },
    #[error("face {face:?} appears after its coface {coface:?}")]
    FaceAfterCoface { face: Simplex, coface: Simplex },
    #[error("simplex {0:?} appears twice")]
    DuplicateSimplex(Simplex),
}

/// One bar: a class of dimension `dim` alive on [birth, death).
/// Values are in the filtration's internal units; `None` death is infinite.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bar<S> {
    pub dim: u8,
    pub birth: S,
    pub death: Option<S>,
}

impl<S: Scalar> Bar<S> {
    pub fn is_infinite(&self) -> bool {
        self.death.is_none()
    }
}

/// Multiset of bars for one filtration, dimensions 0 and 1.
#[derive(Debug, Clone)]
pub struct PersistenceBarcode<S> {
    plane: Option<PlaneId>,
    bars: Vec<Bar<S>>,
    max_vertex_value: S,
    value_scale: f64,
}

impl<S: Scalar> PersistenceBarcode<S> {
    pub fn new(
        plane: Option<PlaneId>,
        mut bars: Vec<Bar<S>>,
        max_vertex_value: S,
        value_scale: f64,
    ) -> Self {
        bars.sort_unstable_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(cmp_scalar(&a.birth, &b.birth))
                .then_with(|| match (&a.death, &b.death) {
                    (None, None) => std::cmp::Ordering::Equal,
                    (None, Some(_)) => std::cmp::Ordering::Greater,
                    (Some(_), None) => std::cmp::Ordering::Less,
                    (Some(x), Some(y)) => cmp_scalar(x, y),
                })
        });
        PersistenceBarcode {
            plane,
            bars,
            max_vertex_value,
            value_scale,
        }
    }

    pub fn plane(&self) -> Option<PlaneId> {
        self.plane
    }

    pub fn bars(&self) -> &[Bar<S>] {
        &self.bars
    }

    pub fn bars_of_dim(&self, dim: u8) -> impl Iterator<Item = &Bar<S>> {
        self.bars.iter().filter(move |b| b.dim == dim)
    }

    pub fn bar_count(&self, dim: u8) -> usize {
        self.bars_of_dim(dim).count()
    }

    pub fn infinite_count(&self, dim: u8) -> usize {
        self.bars_of_dim(dim).filter(|b| b.is_infinite()).count()
    }

    /// Greatest vertex distance of the underlying filtration (internal units).
    pub fn max_vertex_value(&self) -> &S {
        &self.max_vertex_value
    }

    pub fn value_scale(&self) -> f64 {
        self.value_scale
    }

    /// Bars as floats in Euclidean distance units.
    pub fn bars_f64(&self, dim: u8) -> Vec<(f64, Option<f64>)> {
        self.bars_of_dim(dim)
            .map(|b| {
                (
                    b.birth.to_f64_lossy() * self.value_scale,
                    b.death.as_ref().map(|d| d.to_f64_lossy() * self.value_scale),
                )
            })
            .collect()
    }

    /// One `dim birth death` line per bar, 17 significant digits, `inf` for
    /// infinite deaths.
    pub fn write_text(&self, w: &mut impl Write) -> io::Result<()> {
        for dim in [0u8, 1] {
            for (birth, death) in self.bars_f64(dim) {
                match death {
                    Some(d) => writeln!(w, "{} {:.16e} {:.16e}", dim, birth, d)?,
                    None => writeln!(w, "{} {:.16e} inf", dim, birth)?,
                }
            }
        }
        Ok(())
    }
}

/// Parse the `write_text` format back into (dim, birth, death) triples.
pub fn parse_barcode_text(text: &str) -> Result<Vec<(u8, f64, Option<f64>)>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<String, String> {
            tok.map(str::to_string)
                .ok_or_else(|| format!("line {}: expected `dim birth death`", lineno + 1))
        };
        let dim: u8 = parse(it.next())?
            .parse()
            .map_err(|e| format!("line {}: bad dimension: {e}", lineno + 1))?;
        let birth: f64 = parse(it.next())?
            .parse()
            .map_err(|e| format!("line {}: bad birth: {e}", lineno + 1))?;
        let death_tok = parse(it.next())?;
        let death = if death_tok == "inf" {
            None
        } else {
            Some(
                death_tok
                    .parse()
                    .map_err(|e| format!("line {}: bad death: {e}", lineno + 1))?,
            )
        };
        out.push((dim, birth, death));
    }
    Ok(out)
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Reduce a filtration to its persistence barcode (dimensions 0 and 1).
///
/// Errors if the order is not a filtration: every face must appear strictly
/// before its cofaces.
pub fn reduce<S: Scalar>(
    filtration: &Filtration<S>,
) -> Result<PersistenceBarcode<S>, PersistenceError> {
    let entries = filtration.entries();
    let m = entries.len();

    let mut position: HashMap<Simplex, usize> = HashMap::with_capacity(m);
    for (i, e) in entries.iter().enumerate() {
        if position.insert(e.simplex, i).is_some() {
            return Err(PersistenceError::DuplicateSimplex(e.simplex));
        }
    }
    let mut boundaries: Vec<Vec<usize>> = Vec::with_capacity(m);
    for (i, e) in entries.iter().enumerate() {
        let mut col = Vec::with_capacity(3);
        for face in e.simplex.facets() {
            match position.get(&face) {
                Some(&p) if p < i => col.push(p),
                Some(_) => {
                    return Err(PersistenceError::FaceAfterCoface {
                        face,
                        coface: e.simplex,
                    })
                }
                None => {
                    return Err(PersistenceError::MissingFace {
                        face,
                        coface: e.simplex,
                    })
                }
            }
        }
        col.sort_unstable();
        boundaries.push(col);
    }

    const UNPAIRED: usize = usize::MAX;
    let mut owner_of_low: Vec<usize> = vec![UNPAIRED; m];
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut cleared: Vec<bool> = vec![false; m];
    let mut pairs: Vec<(usize, usize)> = Vec::new();

    // Triangles first: each pairing clears the positive edge it identifies.
    for dim in [2u8, 1] {
        for j in 0..m {
            if entries[j].simplex.dim() != dim || cleared[j] {
                continue;
            }
            let mut col = std::mem::take(&mut boundaries[j]);
            // An exhausted column means j is positive and creates a class.
            while let Some(&low) = col.last() {
                let owner = owner_of_low[low];
                if owner == UNPAIRED {
                    owner_of_low[low] = j;
                    cleared[low] = true;
                    pairs.push((low, j));
                    reduced[j] = col;
                    break;
                }
                col = symmetric_difference(&col, &reduced[owner]);
            }
        }
    }

    let mut destroyed = vec![false; m];
    let mut negative = vec![false; m];
    let mut bars = Vec::new();
    for &(creator, destroyer) in &pairs {
        destroyed[creator] = true;
        negative[destroyer] = true;
        let birth = &entries[creator].value;
        let death = &entries[destroyer].value;
        if cmp_scalar(birth, death).is_lt() {
            bars.push(Bar {
                dim: entries[creator].simplex.dim(),
                birth: birth.clone(),
                death: Some(death.clone()),
            });
        }
    }
    for i in 0..m {
        if destroyed[i] || negative[i] {
            continue;
        }
        let dim = entries[i].simplex.dim();
        if dim <= 1 {
            bars.push(Bar {
                dim,
                birth: entries[i].value.clone(),
                death: None,
            });
        }
    }

    Ok(PersistenceBarcode::new(
        filtration.plane(),
        bars,
        filtration.max_vertex_value().clone(),
        filtration.value_scale(),
    ))
}

/// Rank of a GF(2) matrix given as columns of row indices.
fn rank_gf2(rows: usize, columns: impl Iterator<Item = Vec<usize>>) -> usize {
    let words = rows.div_ceil(64);
    // pivot row -> stored reduced column
    let mut pivots: HashMap<usize, Vec<u64>> = HashMap::new();
    let mut rank = 0;
    for col in columns {
        let mut bits = vec![0u64; words];
        for r in col {
            bits[r / 64] ^= 1 << (r % 64);
        }
        while let Some(top) = highest_bit(&bits) {
            match pivots.get(&top) {
                Some(other) => {
                    for (b, o) in bits.iter_mut().zip(other) {
                        *b ^= o;
                    }
                }
                None => {
                    pivots.insert(top, bits);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn highest_bit(bits: &[u64]) -> Option<usize> {
    for (w, &word) in bits.iter().enumerate().rev() {
        if word != 0 {
            return Some(w * 64 + 63 - word.leading_zeros() as usize);
        }
    }
    None
}

/// Betti numbers (b0, b1) by rank-nullity of the GF(2) boundary matrices:
/// b_p = dim C_p - rank d_p - rank d_{p+1}.
///
/// Independent of the reduction above; used as its cross-check.
pub fn betti_oracle<S: Scalar>(complex: &BoundaryComplex<S>) -> (usize, usize) {
    let v = complex.vertices().len();
    let e = complex.edges().len();
    let rank1 = rank_gf2(
        v,
        complex
            .edges()
            .iter()
            .map(|e| vec![e[0] as usize, e[1] as usize]),
    );
    let edge_index: HashMap<[u32; 2], usize> = complex
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| (*e, i))
        .collect();
    let rank2 = rank_gf2(
        e,
        complex.triangles().iter().map(|t| {
            vec![
                edge_index[&[t[0], t[1]]],
                edge_index[&[t[0], t[2]]],
                edge_index[&[t[1], t[2]]],
            ]
        }),
    );
    (v - rank1, e - rank1 - rank2)
}
