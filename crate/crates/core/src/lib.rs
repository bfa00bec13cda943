//! Dilation theory on towers of finite-dimensional complex Hilbert spaces.
//!
//! The crate realizes a locally Hilbert space as a finite chain of nested
//! coordinate subspaces ([`Tower`]), operators between such chains as
//! increment-block-diagonal families ([`LocalOperator`]), and builds the
//! classical dilation constructions on top:
//!
//! - level-wise positive definiteness certificates for operator-valued
//!   kernels and semigroup functions ([`kernel`]);
//! - the reproducing kernel space of a positive kernel and the minimal
//!   dilation of a unital positive definite function on a finite abelian
//!   *-semigroup, including ρ-dilations ([`dilation`]);
//! - projection-valued dilation of discrete operator-valued measures
//!   ([`measure`]);
//! - finite-horizon unitary dilation of locally contractions and windowed
//!   ρ-contraction certification ([`contraction`]).
//!
//! All constructions re-check their own postconditions numerically and
//! return serializable certificates. Level indices are 1-based.
//!
//! ```
//! use locdil::{LocalOperator, OperatorFunction, StarSemigroup, Tolerances, Tower, C64};
//!
//! let tol = Tolerances::default();
//! let tower = Tower::new(vec![1, 2])?;
//! // A scalar measure on {empty, full} compressing to 0.5: its minimal
//! // dilation doubles the tower and represents the empty set by a
//! // projection.
//! let sg = StarSemigroup::powerset_intersection(1)?;
//! let phi = OperatorFunction::new(
//!     sg,
//!     tower.clone(),
//!     vec![
//!         LocalOperator::identity(&tower).scale(C64::new(0.5, 0.0)),
//!         LocalOperator::identity(&tower),
//!     ],
//! )?;
//! let d = locdil::dilate(&phi, &tol)?;
//! assert_eq!(d.dilation_tower().dims(), &[2, 4]);
//! assert!(d.certificate.minimal);
//! assert!(d.certificate.residuals.dilation < 1e-10);
//! assert!(d.representation(0).classify(&tol).projection);
//! # Ok::<(), locdil::Error>(())
//! ```

pub mod contraction;
pub mod dilation;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod measure;
pub mod operator;
pub mod sample;
pub mod schema;
pub mod semigroup;
pub mod tol;
pub mod tower;

pub use contraction::{
    rho_contraction_check, unitary_dilation, RhoCheckCertificate, RhoVerdict, UnitaryDilation,
};
pub use dilation::{
    build_rklhs, dilate, rho_dilate, rho_lpd_certificate, DilationCertificate, DilationResult,
    RhoDilation, Rklhs,
};
pub use error::{Error, Result};
pub use kernel::{
    is_lpdf, is_lpdk, lbc_constants, BoundednessConstants, KernelCertificate, OperatorFunction,
    OperatorKernel,
};
pub use linalg::{CMatrix, CVector, C64, EigenOrder};
pub use measure::{naimark, LocalPovm, SpectralDilation};
pub use operator::{fuglede_putnam_residual, Classification, LocalOperator, OperatorClass};
pub use semigroup::StarSemigroup;
pub use tol::Tolerances;
pub use tower::{LocalVector, Tower};
