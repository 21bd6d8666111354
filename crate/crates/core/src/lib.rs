//! Declustering schemes for multi-dimensional grid data on `M` parallel disks.
//!
//! The crate builds latin-hypercube allocations from digital (0,m,d)-nets,
//! extends them to arbitrary grids by tiling, and measures the worst-case
//! additive error of any allocation over all range queries exactly.
//!
//! * [`gf`]: arithmetic in GF(p^e).
//! * [`nets`]: generator-matrix and CRT construction of nets, plus an exact verifier.
//! * [`coloring`]: net-to-coloring transfer, tiling, baselines.
//! * [`discrepancy`]: exact disc / disc+ evaluation, geometric discrepancy,
//!   box reduction and lower-bound witnesses.
//! * [`schemegen`]: end-to-end scheme generation, file formats and sweeps.

pub mod coloring;
pub mod discrepancy;
pub mod error;
pub mod gf;
pub mod nets;
pub mod schemegen;

pub use coloring::{disk_of, verify_latin, LatinColoring, Mode, Scheme};
pub use discrepancy::{disc_report, Budget, DiscReport, GridBox, ScaledValue};
pub use error::{Error, Result};
pub use gf::{FieldElem, GaloisField, PrimePowerBase};
pub use nets::{verify_net, DigitalNet, ElementaryInterval, NetParams};
pub use schemegen::{factorize_canonical, generate_scheme, Factorization};
