//! Reproducing kernel construction and minimal dilations of positive
//! definite functions.
//!
//! The pipeline is: factor the assembled kernel matrix of each dimension
//! increment as `M_k = V_k* V_k` by Hermitian eigendecomposition with rank
//! truncation; the factor columns of point `s` become the increment blocks
//! of the point map `Γ_s`, and the dilation tower grows by the rank `r_k`
//! at every increment. On a *-semigroup the representation `π(u)` acts on
//! the factor columns by the index shift `s ↦ us`, extended by least
//! squares (zero on the orthogonal complement of the column span, which is
//! trivial for the minimal construction). Everything the construction
//! promises (isometric embedding, representation axioms, the compression
//! identity, norm bounds, minimality) is re-checked numerically and
//! recorded in a certificate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    is_lpdk, lbc_constants, BoundednessConstants, KernelCertificate, LbcEntry,
    OperatorFunction, OperatorKernel,
};
use crate::linalg::{hermitian_eigen, opnorm, svd_rank, CMatrix, C64, EigenOrder};
use crate::operator::LocalOperator;
use crate::tol::Tolerances;
use crate::tower::{LocalVector, Tower};

/// Per-increment factor data `M_k = V_k* V_k`.
#[derive(Debug, Clone)]
struct Factor {
    /// `r_k × n·m_k`, rows scaled by the square roots of the kept eigenvalues.
    v: CMatrix,
    /// Pseudo-inverse `n·m_k × r_k` (orthonormal columns over inverse roots).
    pinv: CMatrix,
}

/// A reproducing kernel locally Hilbert space: the dilation tower, the
/// point maps `Γ_s ∈ L(H, K)`, and the kernel they reproduce through
/// `Γ_s* Γ_t = Γ(t, s)`. Functions in the space are represented by their
/// coefficient vectors in `K`; evaluation at `s` is `Γ_s*`.
#[derive(Debug, Clone)]
pub struct Rklhs {
    base: Tower,
    dilation: Tower,
    point_maps: Vec<LocalOperator>,
    kernel: OperatorKernel,
    factors: Vec<Factor>,
    reconstruction_residual: f64,
}

impl Rklhs {
    pub fn base_tower(&self) -> &Tower {
        &self.base
    }

    pub fn dilation_tower(&self) -> &Tower {
        &self.dilation
    }

    /// The point map `Γ_s`.
    pub fn point_map(&self, s: usize) -> &LocalOperator {
        &self.point_maps[s]
    }

    pub fn point_maps(&self) -> &[LocalOperator] {
        &self.point_maps
    }

    pub fn kernel(&self) -> &OperatorKernel {
        &self.kernel
    }

    /// Evaluates a function (a vector of the dilation tower) at the point
    /// `s`: the reproducing property `k(s) = Γ_s* k`.
    pub fn evaluate(&self, k: &LocalVector, s: usize) -> Result<LocalVector> {
        self.point_maps[s].adjoint().apply(k)
    }

    /// `max_{s,t} |Γ_s* Γ_t − Γ(t, s)|_L`, recorded at construction.
    pub fn reconstruction_residual(&self) -> f64 {
        self.reconstruction_residual
    }

    /// The locally unitary operator linking two factorizations of the same
    /// kernel: `W Γ_s = Γ'_s` blockwise. Both spaces must have the same
    /// increment ranks.
    pub fn intertwiner(&self, other: &Rklhs) -> Result<LocalOperator> {
        if self.base != other.base || self.dilation.dims() != other.dilation.dims() {
            return Err(Error::TowerMismatch);
        }
        let blocks = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| &b.v * &a.pinv)
            .collect();
        LocalOperator::from_blocks(self.dilation.clone(), other.dilation.clone(), blocks)
    }
}

/// Factors a positive definite kernel into a reproducing kernel locally
/// Hilbert space. Eigenvalues up to `rank_rel` times the largest are
/// truncated, so the dilation dimension at level `λ` is the numerical rank
/// of the assembled level matrix.
pub fn build_rklhs(kernel: &OperatorKernel, tol: &Tolerances) -> Result<Rklhs> {
    build_rklhs_with_order(kernel, tol, EigenOrder::Descending)
}

pub fn build_rklhs_with_order(
    kernel: &OperatorKernel,
    tol: &Tolerances,
    order: EigenOrder,
) -> Result<Rklhs> {
    let cert = is_lpdk(kernel, tol);
    if !cert.candidate {
        let (s, t) = cert.hermitian_pair.unwrap_or((0, 0));
        return Err(Error::KernelNotHermitian {
            s,
            t,
            defect: cert.hermitian_defect,
        });
    }
    if !cert.ok {
        let (level, min_eig) = cert
            .witness
            .as_ref()
            .map(|w| (w.level, w.eigenvalue))
            .unwrap_or((0, f64::NAN));
        return Err(Error::NotPositiveDefinite { level, min_eig });
    }

    let base = kernel.tower().clone();
    let n = kernel.size();
    let levels = base.levels();
    let factors: Vec<Factor> = (1..=levels)
        .into_par_iter()
        .map(|k| {
            let m = kernel.assemble_increment(k);
            if m.nrows() == 0 {
                return Factor {
                    v: CMatrix::zeros(0, 0),
                    pinv: CMatrix::zeros(0, 0),
                };
            }
            let eig = hermitian_eigen(&m, order);
            let wmax = eig.values.iter().cloned().fold(0.0, f64::max);
            let kept: Vec<usize> = (0..eig.values.len())
                .filter(|&i| eig.values[i] > tol.rank_rel * wmax && eig.values[i] > 0.0)
                .collect();
            let r = kept.len();
            let nm = m.nrows();
            let mut v = CMatrix::zeros(r, nm);
            let mut pinv = CMatrix::zeros(nm, r);
            for (row, &i) in kept.iter().enumerate() {
                let root = eig.values[i].sqrt();
                for j in 0..nm {
                    v[(row, j)] = eig.vectors[(j, i)].conj() * C64::new(root, 0.0);
                    pinv[(j, row)] = eig.vectors[(j, i)] * C64::new(1.0 / root, 0.0);
                }
            }
            Factor { v, pinv }
        })
        .collect();

    let dims: Vec<usize> = factors
        .iter()
        .scan(0usize, |acc, f| {
            *acc += f.v.nrows();
            Some(*acc)
        })
        .collect();
    let dilation = Tower::new(dims)?;

    let point_maps: Vec<LocalOperator> = (0..n)
        .map(|s| {
            let blocks = factors
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let m = base.increment(i + 1);
                    f.v.view((0, s * m), (f.v.nrows(), m)).into_owned()
                })
                .collect();
            LocalOperator::from_blocks(base.clone(), dilation.clone(), blocks)
        })
        .collect::<Result<_>>()?;

    let mut recon: f64 = 0.0;
    for s in 0..n {
        for t in 0..n {
            let prod = point_maps[s].adjoint().compose(&point_maps[t])?;
            recon = recon.max(prod.sub(kernel.value(t, s))?.max_seminorm());
        }
    }

    Ok(Rklhs {
        base,
        dilation,
        point_maps,
        kernel: kernel.clone(),
        factors,
        reconstruction_residual: recon,
    })
}

/// Residuals recorded by [`dilate`]; all are maxima of top seminorms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DilationResiduals {
    pub dilation: f64,
    pub representation: f64,
    pub isometry: f64,
    pub reconstruction: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DilationCertificate {
    #[serde(rename = "dims_K")]
    pub dims_k: Vec<usize>,
    pub residuals: DilationResiduals,
    pub lbc: Vec<LbcEntry>,
    pub minimal: bool,
    pub norm_bound_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary_representation: Option<bool>,
    pub tolerances: Tolerances,
}

/// A minimal dilation: the reproducing kernel space of `Γ_φ`, the
/// locally isometric embedding `J = Γ_e`, and the shift representation
/// `π` with `φ(s) = J* π(s) J`.
#[derive(Debug, Clone)]
pub struct DilationResult {
    pub rklhs: Rklhs,
    pub embedding: LocalOperator,
    representation: Vec<LocalOperator>,
    pub lbc: BoundednessConstants,
    pub certificate: DilationCertificate,
}

impl DilationResult {
    /// `π(s)` on the dilation tower.
    pub fn representation(&self, s: usize) -> &LocalOperator {
        &self.representation[s]
    }

    pub fn representations(&self) -> &[LocalOperator] {
        &self.representation
    }

    pub fn dilation_tower(&self) -> &Tower {
        self.rklhs.dilation_tower()
    }
}

/// Dilates a unital positive definite function satisfying the boundedness
/// condition to a representation on the reproducing kernel space.
pub fn dilate(phi: &OperatorFunction, tol: &Tolerances) -> Result<DilationResult> {
    dilate_with_order(phi, tol, EigenOrder::Descending)
}

pub fn dilate_with_order(
    phi: &OperatorFunction,
    tol: &Tolerances,
    order: EigenOrder,
) -> Result<DilationResult> {
    let sg = phi.semigroup().clone();
    let e = sg.neutral();
    let base = phi.tower().clone();

    let unital_defect = phi
        .value(e)
        .sub(&LocalOperator::identity(&base))?
        .max_seminorm();
    if unital_defect > tol.flag_rel * 2.0 {
        return Err(Error::NotUnital {
            defect: unital_defect,
        });
    }

    let lbc = lbc_constants(phi, tol)?;
    let rklhs = build_rklhs_with_order(&phi.kernel(), tol, order)?;
    let dilation_tower = rklhs.dilation_tower().clone();
    let n = sg.len();

    // π(u) on each increment: map factor column block s to block us,
    // extended by least squares over the column span.
    let mut shift_residual: f64 = 0.0;
    let mut representation = Vec::with_capacity(n);
    for u in 0..n {
        let mut blocks = Vec::with_capacity(base.levels());
        for (i, f) in rklhs.factors.iter().enumerate() {
            let m = base.increment(i + 1);
            let r = f.v.nrows();
            if r == 0 {
                blocks.push(CMatrix::zeros(0, 0));
                continue;
            }
            let mut shifted = CMatrix::zeros(r, f.v.ncols());
            for s in 0..n {
                let us = sg.mul(u, s);
                shifted
                    .view_mut((0, s * m), (r, m))
                    .copy_from(&f.v.view((0, us * m), (r, m)).into_owned());
            }
            let pi = &shifted * &f.pinv;
            let residual = opnorm(&(&pi * &f.v - &shifted));
            let scale = 1.0 + opnorm(&f.v);
            if residual > tol.shift_max * scale {
                return Err(Error::ShiftInconsistent {
                    u,
                    increment: i + 1,
                    residual,
                });
            }
            shift_residual = shift_residual.max(residual);
            blocks.push(pi);
        }
        representation.push(LocalOperator::from_blocks(
            dilation_tower.clone(),
            dilation_tower.clone(),
            blocks,
        )?);
    }

    let embedding = rklhs.point_map(e).clone();
    let identity_k = LocalOperator::identity(&dilation_tower);

    // Representation axioms.
    let mut rep_residual = representation[e].sub(&identity_k)?.max_seminorm();
    for s in 0..n {
        rep_residual = rep_residual.max(
            representation[sg.star(s)]
                .sub(&representation[s].adjoint())?
                .max_seminorm(),
        );
        for t in 0..n {
            let prod = representation[s].compose(&representation[t])?;
            rep_residual =
                rep_residual.max(representation[sg.mul(s, t)].sub(&prod)?.max_seminorm());
        }
    }

    // Compression identity and embedding isometry.
    let isometry_residual = embedding
        .adjoint()
        .compose(&embedding)?
        .sub(&LocalOperator::identity(&base))?
        .max_seminorm();
    let mut dilation_residual: f64 = 0.0;
    for s in 0..n {
        let compressed = embedding
            .adjoint()
            .compose(&representation[s])?
            .compose(&embedding)?;
        dilation_residual = dilation_residual.max(compressed.sub(phi.value(s))?.max_seminorm());
    }

    // Norm bounds |π(u)|_λ ≤ C_u^λ.
    let mut norm_bound_ok = true;
    for u in 0..n {
        let norms = representation[u].seminorms();
        for lam in 1..=dilation_tower.levels() {
            if norms[lam - 1] > lbc.at(u, lam) * (1.0 + tol.rep) {
                norm_bound_ok = false;
            }
        }
    }

    // Minimality: the columns of {π(s) J} span every increment.
    let minimal = rklhs
        .factors
        .iter()
        .enumerate()
        .all(|(i, f)| {
            let r = f.v.nrows();
            if r == 0 {
                return true;
            }
            let m = base.increment(i + 1);
            let mut stacked = CMatrix::zeros(r, n * m);
            for s in 0..n {
                let block = representation[s].block(i + 1) * embedding.block(i + 1);
                stacked.view_mut((0, s * m), (r, m)).copy_from(&block);
            }
            svd_rank(&stacked, tol.rank_rel) == r
        });

    let unitary_representation = if sg.star_is_inverse() {
        Some(
            representation
                .iter()
                .all(|p| p.classify(tol).unitary),
        )
    } else {
        None
    };

    let certificate = DilationCertificate {
        dims_k: dilation_tower.dims().to_vec(),
        residuals: DilationResiduals {
            dilation: dilation_residual,
            representation: rep_residual,
            isometry: isometry_residual,
            reconstruction: rklhs.reconstruction_residual(),
            shift: shift_residual,
        },
        lbc: lbc.entries(),
        minimal,
        norm_bound_ok,
        unitary_representation,
        tolerances: *tol,
    };

    Ok(DilationResult {
        rklhs,
        embedding,
        representation,
        lbc,
        certificate,
    })
}

/// The assembled positivity condition behind a ρ-dilation: diagonal pairs
/// (`t* s = e`) weighted by ρ, everything else by `ψ(t* s)`. This is the
/// kernel of the auxiliary unital function scaled by ρ, so its verdict is
/// scale-free.
pub fn rho_lpd_certificate(
    psi: &OperatorFunction,
    rho: f64,
    tol: &Tolerances,
) -> Result<KernelCertificate> {
    if rho <= 0.0 {
        return Err(Error::BadRho(rho));
    }
    let sg = psi.semigroup().clone();
    let tower = psi.tower().clone();
    let rho_id = LocalOperator::identity(&tower).scale(C64::new(rho, 0.0));
    let kernel = OperatorKernel::from_fn(&tower, sg.len(), |s, t| {
        let idx = sg.pairing(s, t);
        if idx == sg.neutral() {
            rho_id.clone()
        } else {
            psi.value(idx).clone()
        }
    })?;
    Ok(is_lpdk(&kernel, tol))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoDilationCertificate {
    pub rho: f64,
    /// `max_{s≠e} |ψ(s) − ρ J* π(s) J|_L`.
    pub compression: f64,
    pub lpd: KernelCertificate,
    pub dilation: DilationCertificate,
}

#[derive(Debug, Clone)]
pub struct RhoDilation {
    pub result: DilationResult,
    pub certificate: RhoDilationCertificate,
}

/// ρ-dilation: builds the auxiliary unital function (`ψ/ρ` off the
/// neutral element, identity at it) and dilates it; the resulting
/// representation compresses to `ψ(s) = ρ J* π(s) J` for `s ≠ e`.
pub fn rho_dilate(psi: &OperatorFunction, rho: f64, tol: &Tolerances) -> Result<RhoDilation> {
    let lpd = rho_lpd_certificate(psi, rho, tol)?;
    if !lpd.candidate {
        let (s, t) = lpd.hermitian_pair.unwrap_or((0, 0));
        return Err(Error::KernelNotHermitian {
            s,
            t,
            defect: lpd.hermitian_defect,
        });
    }
    if !lpd.ok {
        let (level, min_eig) = lpd
            .witness
            .as_ref()
            .map(|w| (w.level, w.eigenvalue))
            .unwrap_or((0, f64::NAN));
        return Err(Error::NotPositiveDefinite { level, min_eig });
    }

    let sg = psi.semigroup().clone();
    let tower = psi.tower().clone();
    let e = sg.neutral();
    let inv_rho = C64::new(1.0 / rho, 0.0);
    let values: Vec<LocalOperator> = (0..sg.len())
        .map(|s| {
            if s == e {
                LocalOperator::identity(&tower)
            } else {
                psi.value(s).scale(inv_rho)
            }
        })
        .collect();
    let phi = OperatorFunction::new(sg.clone(), tower.clone(), values)?;
    let result = dilate(&phi, tol)?;

    let mut compression: f64 = 0.0;
    for s in sg.elements() {
        if s == e {
            continue;
        }
        let c = result
            .embedding
            .adjoint()
            .compose(result.representation(s))?
            .compose(&result.embedding)?
            .scale(C64::new(rho, 0.0));
        compression = compression.max(c.sub(psi.value(s))?.max_seminorm());
    }

    let certificate = RhoDilationCertificate {
        rho,
        compression,
        lpd,
        dilation: result.certificate.clone(),
    };
    Ok(RhoDilation {
        result,
        certificate,
    })
}
