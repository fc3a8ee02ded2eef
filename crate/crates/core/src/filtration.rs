//! Plane-distance filtrations of the boundary complex.
//!
//! Eight fixed reference planes, all perpendicular to z = 0, induce one
//! filtration each: a vertex gets its distance to the plane, any other
//! simplex the greatest distance of its vertices, and simplices are ordered
//! by (value, dimension, vertex ids).
//!
//! Distances to the oblique planes carry a 1/sqrt(2) factor that would leave
//! the rationals. Internally every filter value is the plane-equation
//! numerator |ax + by - d|, which rescales all values of a filtration
//! uniformly; the factor is applied only when values are exported as floats.

use std::io::{self, Write};

use thiserror::Error;

use crate::complex::BoundaryComplex;
use crate::scalar::{cmp_scalar, Scalar};

/// The eight reference planes, in signature layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum PlaneId {
    /// x = 0
    X0,
    /// x = 1
    X1,
    /// y = 0
    Y0,
    /// y = 1
    Y1,
    /// x - y = 1
    XmY1,
    /// y - x = 1
    YmX1,
    /// x + y = 0
    XpY0,
    /// x + y = 2
    XpY2,
}

impl PlaneId {
    pub const ALL: [PlaneId; 8] = [
        PlaneId::X0,
        PlaneId::X1,
        PlaneId::Y0,
        PlaneId::Y1,
        PlaneId::XmY1,
        PlaneId::YmX1,
        PlaneId::XpY0,
        PlaneId::XpY2,
    ];

    /// Plane equation a*x + b*y = d (c = 0 throughout: every plane is
    /// perpendicular to z = 0, which is what makes the filtrations
    /// independent of the stack length).
    pub fn equation(self) -> (i64, i64, i64) {
        match self {
            PlaneId::X0 => (1, 0, 0),
            PlaneId::X1 => (1, 0, 1),
            PlaneId::Y0 => (0, 1, 0),
            PlaneId::Y1 => (0, 1, 1),
            PlaneId::XmY1 => (1, -1, 1),
            PlaneId::YmX1 => (-1, 1, 1),
            PlaneId::XpY0 => (1, 1, 0),
            PlaneId::XpY2 => (1, 1, 2),
        }
    }

    pub fn is_oblique(self) -> bool {
        let (a, b, _) = self.equation();
        a != 0 && b != 0
    }

    /// Factor turning the |ax + by - d| numerator into Euclidean distance.
    pub fn distance_scale(self) -> f64 {
        if self.is_oblique() {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            1.0
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PlaneId::X0 => "X0",
            PlaneId::X1 => "X1",
            PlaneId::Y0 => "Y0",
            PlaneId::Y1 => "Y1",
            PlaneId::XmY1 => "XmY1",
            PlaneId::YmX1 => "YmX1",
            PlaneId::XpY0 => "XpY0",
            PlaneId::XpY2 => "XpY2",
        }
    }

    pub fn parse(s: &str) -> Option<PlaneId> {
        PlaneId::ALL.into_iter().find(|p| p.label() == s)
    }

    /// |ax + by - d| for a point, in the scalar of the coordinates.
    pub fn numerator<S: Scalar>(self, point: &[S; 3]) -> S {
        let (a, b, d) = self.equation();
        let term = |coef: i64, value: &S| -> S {
            match coef {
                0 => S::zero(),
                1 => value.clone(),
                -1 => -value.clone(),
                _ => unreachable!("plane coefficients are 0 or +-1"),
            }
        };
        let mut acc = term(a, &point[0]) + term(b, &point[1]);
        if d != 0 {
            acc = acc - S::from_index(d as usize);
        }
        acc.abs()
    }
}

/// Euclidean point-plane distance |ax + by - d| / sqrt(a^2 + b^2).
pub fn vertex_distance<S: Scalar>(point: &[S; 3], plane: PlaneId) -> f64 {
    plane.numerator(point).to_f64_lossy() * plane.distance_scale()
}

/// A simplex of the boundary complex, identified by sorted vertex ids.
/// The derived ordering (variant, then ids) is exactly the tie-break used
/// in filtrations: dimension ascending, then lexicographic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Simplex {
    Vertex(u32),
    Edge([u32; 2]),
    Triangle([u32; 3]),
}

impl Simplex {
    pub fn vertex(a: u32) -> Simplex {
        Simplex::Vertex(a)
    }

    pub fn edge(a: u32, b: u32) -> Simplex {
        assert_ne!(a, b);
        Simplex::Edge(if a < b { [a, b] } else { [b, a] })
    }

    pub fn triangle(a: u32, b: u32, c: u32) -> Simplex {
        let mut v = [a, b, c];
        v.sort_unstable();
        assert!(v[0] < v[1] && v[1] < v[2]);
        Simplex::Triangle(v)
    }

    pub fn dim(&self) -> u8 {
        match self {
            Simplex::Vertex(_) => 0,
            Simplex::Edge(_) => 1,
            Simplex::Triangle(_) => 2,
        }
    }

    /// Codimension-1 faces.
    pub fn facets(&self) -> Vec<Simplex> {
        match *self {
            Simplex::Vertex(_) => Vec::new(),
            Simplex::Edge([a, b]) => vec![Simplex::Vertex(a), Simplex::Vertex(b)],
            Simplex::Triangle([a, b, c]) => {
                vec![Simplex::edge(a, b), Simplex::edge(a, c), Simplex::edge(b, c)]
            }
        }
    }

    pub fn vertex_ids(&self) -> Vec<u32> {
        match *self {
            Simplex::Vertex(a) => vec![a],
            Simplex::Edge(e) => e.to_vec(),
            Simplex::Triangle(t) => t.to_vec(),
        }
    }
}

#[derive(Debug, Error)]
pub enum FiltrationError {
    #[error("duplicate simplex {0:?}")]
    Duplicate(Simplex),
    #[error("simplex {coface:?} appears before (or without) its face {face:?}")]
    FaceAfterCoface { face: Simplex, coface: Simplex },
    #[error("simplex {coface:?} has value below its face {face:?}")]
    NonMonotone { face: Simplex, coface: Simplex },
}

#[derive(Debug, Clone)]
pub struct FiltrationEntry<S> {
    pub simplex: Simplex,
    pub value: S,
}

/// Simplices in filtration order, plus the greatest vertex value k used as
/// the window range of the signature vectorization.
#[derive(Debug, Clone)]
pub struct Filtration<S> {
    plane: Option<PlaneId>,
    entries: Vec<FiltrationEntry<S>>,
    max_vertex_value: S,
    value_scale: f64,
}

impl<S: Scalar> Filtration<S> {
    /// Sort entries canonically (value, dimension, vertex ids) and validate.
    pub fn from_entries(
        plane: Option<PlaneId>,
        mut entries: Vec<(Simplex, S)>,
        value_scale: f64,
    ) -> Result<Self, FiltrationError> {
        entries.sort_unstable_by(|a, b| cmp_scalar(&a.1, &b.1).then(a.0.cmp(&b.0)));
        Self::from_ordered_entries(plane, entries, value_scale)
    }

    /// Accept a caller-supplied order, validating monotonicity and
    /// face-before-coface as given.
    pub fn from_ordered_entries(
        plane: Option<PlaneId>,
        entries: Vec<(Simplex, S)>,
        value_scale: f64,
    ) -> Result<Self, FiltrationError> {
        let mut seen = std::collections::HashMap::new();
        for (pos, (simplex, value)) in entries.iter().enumerate() {
            if seen.insert(*simplex, pos).is_some() {
                return Err(FiltrationError::Duplicate(*simplex));
            }
            for face in simplex.facets() {
                match seen.get(&face) {
                    Some(&face_pos) if face_pos < pos => {
                        if cmp_scalar(&entries[face_pos].1, value).is_gt() {
                            return Err(FiltrationError::NonMonotone {
                                face,
                                coface: *simplex,
                            });
                        }
                    }
                    _ => {
                        return Err(FiltrationError::FaceAfterCoface {
                            face,
                            coface: *simplex,
                        })
                    }
                }
            }
        }
        let max_vertex_value = entries
            .iter()
            .filter(|(s, _)| s.dim() == 0)
            .map(|(_, v)| v.clone())
            .max_by(cmp_scalar)
            .unwrap_or_else(S::zero);
        Ok(Filtration {
            plane,
            entries: entries
                .into_iter()
                .map(|(simplex, value)| FiltrationEntry { simplex, value })
                .collect(),
            max_vertex_value,
            value_scale,
        })
    }

    /// Skip validation entirely; only for exercising downstream error paths.
    #[cfg(test)]
    pub(crate) fn from_unchecked(plane: Option<PlaneId>, entries: Vec<(Simplex, S)>) -> Self {
        Filtration {
            plane,
            entries: entries
                .into_iter()
                .map(|(simplex, value)| FiltrationEntry { simplex, value })
                .collect(),
            max_vertex_value: S::zero(),
            value_scale: 1.0,
        }
    }

    pub fn plane(&self) -> Option<PlaneId> {
        self.plane
    }

    pub fn entries(&self) -> &[FiltrationEntry<S>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Greatest vertex value k (numerator units).
    pub fn max_vertex_value(&self) -> &S {
        &self.max_vertex_value
    }

    /// Factor mapping stored values to Euclidean distances on export.
    pub fn value_scale(&self) -> f64 {
        self.value_scale
    }

    /// Debug dump, one `value,dim,vertex-ids` line per simplex.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        for e in &self.entries {
            let ids: Vec<String> = e.simplex.vertex_ids().iter().map(u32::to_string).collect();
            writeln!(
                w,
                "{},{},{}",
                e.value.to_f64_lossy() * self.value_scale,
                e.simplex.dim(),
                ids.join(" ")
            )?;
        }
        Ok(())
    }
}

/// Build the lower-star style filtration of a boundary complex for one plane.
pub fn build_filtration<S: Scalar>(
    complex: &BoundaryComplex<S>,
    plane: PlaneId,
) -> Filtration<S> {
    let vertex_values: Vec<S> = complex
        .vertices()
        .iter()
        .map(|v| plane.numerator(v))
        .collect();
    let max_pair = |a: &S, b: &S| -> S {
        if cmp_scalar(a, b).is_ge() {
            a.clone()
        } else {
            b.clone()
        }
    };
    let mut entries: Vec<(Simplex, S)> =
        Vec::with_capacity(complex.simplex_count());
    for (i, value) in vertex_values.iter().enumerate() {
        entries.push((Simplex::Vertex(i as u32), value.clone()));
    }
    for e in complex.edges() {
        let value = max_pair(
            &vertex_values[e[0] as usize],
            &vertex_values[e[1] as usize],
        );
        entries.push((Simplex::Edge(*e), value));
    }
    for t in complex.triangles() {
        let value = max_pair(
            &max_pair(&vertex_values[t[0] as usize], &vertex_values[t[1] as usize]),
            &vertex_values[t[2] as usize],
        );
        entries.push((Simplex::Triangle(*t), value));
    }
    Filtration::from_entries(Some(plane), entries, plane.distance_scale())
        .expect("complex-derived filtrations are valid by construction")
}

/// All eight plane filtrations, in signature layout order.
pub fn build_all_filtrations<S: Scalar>(complex: &BoundaryComplex<S>) -> Vec<Filtration<S>> {
    use rayon::prelude::*;
    PlaneId::ALL
        .par_iter()
        .map(|&p| build_filtration(complex, p))
        .collect()
}
