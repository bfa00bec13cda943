use serde::{Deserialize, Serialize};

/// Numerical tolerances used by structural checks, classification and the
/// dilation constructions. All certificates record the values they were
/// produced with.
///
/// Scaling policies:
/// - structural compatibility of a level system: `struct_rel * (1 + |T|)`;
/// - operator positivity flags: min eigenvalue of the Hermitian part
///   `>= -psd_rel * (1 + |T|)`;
/// - assembled kernel matrices: min eigenvalue `>= -psd_rel * max |eig|`;
/// - equality-type flags (self-adjoint, isometry, ...): `flag_rel`, scaled
///   by the natural power of the operand norm;
/// - rank decisions: eigenvalues/singular values `> rank_rel * largest`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub struct_rel: f64,
    pub psd_rel: f64,
    pub flag_rel: f64,
    pub rank_rel: f64,
    /// Absolute bound accepted for reconstruction residuals of the factored
    /// kernel (point maps against kernel entries).
    pub recon: f64,
    /// Absolute bound accepted for representation and dilation residuals.
    pub rep: f64,
    /// Shift-consistency residuals above this (times the factor scale)
    /// abort the construction instead of being recorded.
    pub shift_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            struct_rel: 1e-12,
            psd_rel: 1e-9,
            flag_rel: 1e-10,
            rank_rel: 1e-10,
            recon: 1e-9,
            rep: 1e-8,
            shift_max: 1e-6,
        }
    }
}
