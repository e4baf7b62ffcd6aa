//! Controlled g-frames in finite dimensions.
//!
//! Families of operators `L_i: C^n -> C^{d_i}`, invertible controllers
//! `(C, C')`, the controlled frame operator `S = sum_i C* L_i* L_i C'`,
//! duals, reconstruction, partial-sum identities and a preconditioned frame
//! algorithm. All matrices are dense and complex.

pub mod controlled;
pub mod duals;
pub mod error;
pub mod generate;
pub mod gframes;
pub mod identities;
pub mod instance;
pub mod matcore;
pub mod recon;
pub mod report;
pub mod suite;
pub mod tol;

pub use controlled::{build_system, build_system_with, ControlledSystem, ControllerPair};
pub use duals::{canonical_dual, check_dual_pair, CanonicalDual, DualPair};
pub use error::{Error, Result};
pub use generate::{generate, GeneratorKind};
pub use gframes::{BlockSpace, CoefficientSequence, FrameBounds, GFrameFamily};
pub use identities::{IndexSplit, PartialSource};
pub use instance::{FrameInstanceFile, LoadedInstance, Metadata};
pub use matcore::{ComplexMatrix, HermitianEig};
pub use num_complex::Complex64;
pub use recon::{frame_algorithm, ConvergenceTrace, IterConfig};
pub use report::{CheckReport, RangeCertificate, ReportFile};
pub use suite::{verify, Suite};
pub use tol::Tolerances;
