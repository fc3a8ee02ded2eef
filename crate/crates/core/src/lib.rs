//! Topological signatures for periodic motion sequences.
//!
//! A stack of binary silhouettes becomes a 3D binary image; unit cubes whose
//! 8 corners are foreground form a cubical complex; square faces bounding
//! exactly one cube are triangulated into a boundary surface. Eight fixed
//! planes (all perpendicular to z = 0) each induce a distance filtration of
//! that surface, whose 0- and 1-dimensional persistence barcodes are counted
//! into sixteen windowed vectors: the topological signature. Signatures are
//! compared by summing the angle between corresponding vectors, which makes
//! the comparison independent of how many motion periods a sequence holds.
//!
//! The geometric pipeline is generic over its scalar through [`scalar::Scalar`];
//! the default entry points run on exact rationals ([`scalar::Exact`]) so that
//! filtration ties, window edges, and the period-doubling identity are decided
//! without rounding. `f64` (and plain integers, for the combinatorial stages)
//! work through the same functions.

pub mod complex;
pub mod eval;
pub mod filtration;
pub mod fixtures;
pub mod ingest;
pub mod metrics;
pub mod persistence;
pub mod scalar;
pub mod signature;

pub use complex::{build_cubical, extract_boundary, BoundaryComplex, CubicalComplex};
pub use eval::{
    average_signatures, classify, eval, eval_manifest_file, load_manifest, tp_tn_sets,
    EvalReport, Gallery, Manifest,
};
pub use filtration::{build_filtration, vertex_distance, Filtration, PlaneId, Simplex};
pub use ingest::{
    load_frame, load_sequence, stack_frames, BinaryImage3D, IngestConfig, SilhouetteFrame,
};
pub use metrics::{angle, bottleneck, compare, total_angle, BottleneckResult, Diagram};
pub use persistence::{betti_oracle, reduce, Bar, PersistenceBarcode};
pub use scalar::{Exact, Scalar};
pub use signature::{
    read_signature, sign_directory, signature, signature_of_image, vectorize, write_signature,
    SignatureConfig, SignatureVector, TopologicalSignature,
};

/// The default exact-scalar pipeline types.
pub type ExactImage = ingest::BinaryImage3D<Exact>;
pub type ExactComplex = complex::BoundaryComplex<Exact>;
pub type ExactFiltration = filtration::Filtration<Exact>;
pub type ExactBarcode = persistence::PersistenceBarcode<Exact>;
