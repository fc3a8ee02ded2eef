//! Cubical complex of a voxel stack and its triangulated boundary surface.
//!
//! A unit cube is present wherever all 8 corner voxels are foreground. Every
//! square face bounding exactly one cube is split into two triangles, and the
//! closure of those triangles (their edges and vertices) is the boundary
//! complex handed to the filtration stage.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use thiserror::Error;

use crate::ingest::BinaryImage3D;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("edge {0:?} references a missing vertex (have {1})")]
    EdgeVertexOutOfRange([u32; 2], usize),
    #[error("triangle {0:?} references a missing vertex (have {1})")]
    TriangleVertexOutOfRange([u32; 3], usize),
    #[error("simplex {0:?} has repeated or unsorted vertices")]
    MalformedSimplex(Vec<u32>),
    #[error("triangle {0:?} is missing face edge {1:?}")]
    MissingEdge([u32; 3], [u32; 2]),
}

/// Set of unit-cube anchors (i, j, k); the cube spans [i, i+1] x [j, j+1] x [k, k+1].
#[derive(Debug, Clone, Default)]
pub struct CubicalComplex {
    anchors: BTreeSet<[u32; 3]>,
}

impl CubicalComplex {
    pub fn contains(&self, anchor: [u32; 3]) -> bool {
        self.anchors.contains(&anchor)
    }

    pub fn cube_count(&self) -> usize {
        self.anchors.len()
    }

    pub fn anchors(&self) -> impl Iterator<Item = [u32; 3]> + '_ {
        self.anchors.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

/// A cube is present iff all 8 corner voxels are foreground.
pub fn build_cubical<S: Scalar>(img: &BinaryImage3D<S>) -> CubicalComplex {
    let [xs, ys, zs] = img.dims();
    let mut anchors = BTreeSet::new();
    if xs < 2 || ys < 2 || zs < 2 {
        return CubicalComplex { anchors };
    }
    for k in 0..zs - 1 {
        for j in 0..ys - 1 {
            for i in 0..xs - 1 {
                let full = (0..8).all(|c| {
                    img.get(i + (c & 1), j + (c >> 1 & 1), k + (c >> 2 & 1))
                });
                if full {
                    anchors.insert([i as u32, j as u32, k as u32]);
                }
            }
        }
    }
    CubicalComplex { anchors }
}

/// Triangulated boundary surface: vertices carry normalized coordinates,
/// edges and triangles hold sorted vertex ids.
#[derive(Debug, Clone)]
pub struct BoundaryComplex<S> {
    vertices: Vec<[S; 3]>,
    edges: Vec<[u32; 2]>,
    triangles: Vec<[u32; 3]>,
}

impl<S: Scalar> BoundaryComplex<S> {
    /// Assemble a complex from raw parts, checking the closure axiom.
    pub fn from_parts(
        vertices: Vec<[S; 3]>,
        edges: Vec<[u32; 2]>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self, ComplexError> {
        let n = vertices.len();
        let edge_set: BTreeSet<[u32; 2]> = edges.iter().copied().collect();
        for e in &edges {
            if e[0] >= e[1] {
                return Err(ComplexError::MalformedSimplex(e.to_vec()));
            }
            if e[1] as usize >= n {
                return Err(ComplexError::EdgeVertexOutOfRange(*e, n));
            }
        }
        for t in &triangles {
            if !(t[0] < t[1] && t[1] < t[2]) {
                return Err(ComplexError::MalformedSimplex(t.to_vec()));
            }
            if t[2] as usize >= n {
                return Err(ComplexError::TriangleVertexOutOfRange(*t, n));
            }
            for f in [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]] {
                if !edge_set.contains(&f) {
                    return Err(ComplexError::MissingEdge(*t, f));
                }
            }
        }
        Ok(BoundaryComplex {
            vertices,
            edges,
            triangles,
        })
    }

    pub fn vertices(&self) -> &[[S; 3]] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn simplex_count(&self) -> usize {
        self.vertices.len() + self.edges.len() + self.triangles.len()
    }

    /// V - E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// OFF-format dump for visual inspection.
    pub fn write_off(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "OFF")?;
        writeln!(
            w,
            "{} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.edges.len()
        )?;
        for v in &self.vertices {
            writeln!(
                w,
                "{} {} {}",
                v[0].to_f64_lossy(),
                v[1].to_f64_lossy(),
                v[2].to_f64_lossy()
            )?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// Square faces are keyed by normal axis and lexicographically smallest corner.
type SquareKey = (usize, [u32; 3]);

fn square_corners((axis, c): SquareKey) -> [[u32; 3]; 4] {
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut corners = [c; 4];
    corners[1][u] += 1;
    corners[2][v] += 1;
    corners[3][u] += 1;
    corners[3][v] += 1;
    corners
}

#[cfg(test)]
fn cube_faces(anchor: [u32; 3]) -> [SquareKey; 6] {
    let mut faces = [(0usize, anchor); 6];
    for axis in 0..3 {
        faces[2 * axis] = (axis, anchor);
        let mut far = anchor;
        far[axis] += 1;
        faces[2 * axis + 1] = (axis, far);
    }
    faces
}

/// Extract the closure of the triangulated boundary squares.
///
/// A square bounds exactly one cube iff the cube on the other side of it is
/// absent. Each such square is split along the diagonal from its
/// lexicographically smallest corner; vertices are voxel indices mapped
/// through the image scale. Foreground voxels not incident to any boundary
/// square contribute nothing.
pub fn extract_boundary<S: Scalar>(
    q: &CubicalComplex,
    img: &BinaryImage3D<S>,
) -> BoundaryComplex<S> {
    let mut squares: Vec<SquareKey> = Vec::new();
    for anchor in q.anchors() {
        for axis in 0..3 {
            let mut lo = anchor;
            let absent_lo = lo[axis] == 0 || {
                lo[axis] -= 1;
                !q.contains(lo)
            };
            if absent_lo {
                squares.push((axis, anchor));
            }
            let mut hi = anchor;
            hi[axis] += 1;
            if !q.contains(hi) {
                squares.push((axis, hi));
            }
        }
    }

    let mut lattice: BTreeSet<[u32; 3]> = BTreeSet::new();
    for &sq in &squares {
        lattice.extend(square_corners(sq));
    }
    let index: BTreeMap<[u32; 3], u32> = lattice
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i as u32))
        .collect();

    let mut edges: BTreeSet<[u32; 2]> = BTreeSet::new();
    let mut triangles: BTreeSet<[u32; 3]> = BTreeSet::new();
    for &sq in &squares {
        let ids = square_corners(sq).map(|p| index[&p]);
        // Corners come out in lexicographic order: ids[0] is the smallest
        // corner, ids[3] the opposite one, so ids[0]-ids[3] is the diagonal.
        for tri in [[ids[0], ids[1], ids[3]], [ids[0], ids[2], ids[3]]] {
            let mut t = tri;
            t.sort_unstable();
            triangles.insert(t);
            edges.insert([t[0], t[1]]);
            edges.insert([t[0], t[2]]);
            edges.insert([t[1], t[2]]);
        }
    }

    let vertices: Vec<[S; 3]> = lattice
        .iter()
        .map(|&[i, j, k]| {
            [
                img.coord(0, i as usize),
                img.coord(1, j as usize),
                img.coord(2, k as usize),
            ]
        })
        .collect();

    BoundaryComplex {
        vertices,
        edges: edges.into_iter().collect(),
        triangles: triangles.into_iter().collect(),
    }
}
