//! Operator-valued kernels and functions, and their level-wise positive
//! definiteness certificates.
//!
//! A kernel `Γ` on a finite point set assigns a [`LocalOperator`] on a
//! fixed tower to every ordered pair of points. Positive definiteness of
//! the quadratic form `Σ ⟨Γ(s,t) h_s, h_t⟩` is decided level by level: for
//! each `λ` the `|S|·d_λ` square matrix with block `(t, s) = Γ^λ(s, t)` is
//! assembled and its spectrum examined. The assembled matrices are
//! permutation-similar to block diagonals over the dimension increments,
//! so checking every level, checking only the top level, and checking
//! each increment separately are equivalent; the crate exposes all three
//! routes so they can be played against each other.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, opnorm, CMatrix, EigenOrder};
use crate::operator::LocalOperator;
use crate::semigroup::StarSemigroup;
use crate::tol::Tolerances;
use crate::tower::Tower;

/// A total map `S × S → L(H)` over one tower.
#[derive(Debug, Clone)]
pub struct OperatorKernel {
    tower: Tower,
    size: usize,
    values: Vec<LocalOperator>, // row-major: values[s*size + t] = Γ(s,t)
}

impl OperatorKernel {
    pub fn new(tower: Tower, size: usize, values: Vec<LocalOperator>) -> Result<Self> {
        if values.len() != size * size {
            return Err(Error::KernelIncomplete);
        }
        for v in &values {
            if v.source() != &tower || v.target() != &tower {
                return Err(Error::TowerMismatch);
            }
        }
        Ok(OperatorKernel {
            tower,
            size,
            values,
        })
    }

    pub fn from_fn(
        tower: &Tower,
        size: usize,
        mut f: impl FnMut(usize, usize) -> LocalOperator,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(size * size);
        for s in 0..size {
            for t in 0..size {
                values.push(f(s, t));
            }
        }
        OperatorKernel::new(tower.clone(), size, values)
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `Γ(s, t)`.
    pub fn value(&self, s: usize, t: usize) -> &LocalOperator {
        &self.values[s * self.size + t]
    }

    /// The assembled level-`λ` matrix: block row `t`, block column `s`
    /// holds `Γ^λ(s, t)`, so the quadratic form over stacked vectors is
    /// `h* M h`.
    pub fn assemble_level(&self, level: usize) -> CMatrix {
        let d = self.tower.dim(level);
        let n = self.size;
        let mut m = CMatrix::zeros(n * d, n * d);
        for t in 0..n {
            for s in 0..n {
                m.view_mut((t * d, s * d), (d, d))
                    .copy_from(&self.value(s, t).level_matrix(level));
            }
        }
        m
    }

    /// The assembled matrix of increment `k`: block `(t, s)` holds the
    /// `k`-th increment block of `Γ(s, t)`.
    pub fn assemble_increment(&self, k: usize) -> CMatrix {
        let d = self.tower.increment(k);
        let n = self.size;
        let mut m = CMatrix::zeros(n * d, n * d);
        for t in 0..n {
            for s in 0..n {
                m.view_mut((t * d, s * d), (d, d))
                    .copy_from(self.value(s, t).block(k));
            }
        }
        m
    }

    /// Largest `|Γ(s,t) - Γ(t,s)*|` over pairs, with the first offending
    /// pair. A genuine kernel candidate has this within tolerance.
    pub fn hermitian_defect(&self) -> (f64, Option<(usize, usize)>) {
        let mut worst = 0.0;
        let mut pair = None;
        for s in 0..self.size {
            for t in s..self.size {
                let d = self
                    .value(s, t)
                    .sub(&self.value(t, s).adjoint())
                    .expect("kernel towers agree")
                    .max_seminorm();
                if d > worst {
                    worst = d;
                    pair = Some((s, t));
                }
            }
        }
        (worst, pair)
    }

    fn entry_scale(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.max_seminorm())
            .fold(0.0, f64::max)
    }
}

/// A map `S → L(H)` on a *-semigroup; its associated kernel is
/// `Γ(s, t) = φ(t* s)`.
#[derive(Debug, Clone)]
pub struct OperatorFunction {
    semigroup: StarSemigroup,
    tower: Tower,
    values: Vec<LocalOperator>,
}

impl OperatorFunction {
    pub fn new(semigroup: StarSemigroup, tower: Tower, values: Vec<LocalOperator>) -> Result<Self> {
        if values.len() != semigroup.len() {
            return Err(Error::KernelIncomplete);
        }
        for v in &values {
            if v.source() != &tower || v.target() != &tower {
                return Err(Error::TowerMismatch);
            }
        }
        Ok(OperatorFunction {
            semigroup,
            tower,
            values,
        })
    }

    pub fn semigroup(&self) -> &StarSemigroup {
        &self.semigroup
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn value(&self, s: usize) -> &LocalOperator {
        &self.values[s]
    }

    pub fn values(&self) -> &[LocalOperator] {
        &self.values
    }

    /// The associated kernel `Γ_φ(s, t) = φ(t* s)`.
    pub fn kernel(&self) -> OperatorKernel {
        let n = self.semigroup.len();
        OperatorKernel::from_fn(&self.tower, n, |s, t| {
            self.values[self.semigroup.pairing(s, t)].clone()
        })
        .expect("function values live on one tower")
    }
}

/// Spectral summary of one assembled level matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub size: usize,
    pub min_eig: f64,
    pub max_abs_eig: f64,
    pub ok: bool,
}

/// Spectral summary of one assembled increment matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IncrementReport {
    pub increment: usize,
    pub size: usize,
    pub min_eig: f64,
    pub max_abs_eig: f64,
    pub ok: bool,
}

/// A vector witnessing indefiniteness at a level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub level: usize,
    pub eigenvalue: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Outcome of a positive definiteness check. `candidate` records the
/// Hermitian precheck `Γ(s,t) ≈ Γ(t,s)*`; when it fails the input is not
/// a kernel candidate at all (distinct from being indefinite) and no
/// spectra are reported.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelCertificate {
    pub ok: bool,
    pub candidate: bool,
    pub hermitian_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hermitian_pair: Option<(usize, usize)>,
    pub levels: Vec<LevelReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub psd_rel: f64,
}

impl KernelCertificate {
    /// First level that failed the spectral check, if any.
    pub fn level_witness(&self) -> Option<usize> {
        self.levels.iter().find(|r| !r.ok).map(|r| r.level)
    }
}

fn psd_ok(min_eig: f64, max_abs: f64, psd_rel: f64) -> bool {
    min_eig >= -psd_rel * max_abs
}

/// Level-wise positive definiteness certificate for a kernel.
pub fn is_lpdk(kernel: &OperatorKernel, tol: &Tolerances) -> KernelCertificate {
    let scale = kernel.entry_scale();
    let (defect, pair) = kernel.hermitian_defect();
    if defect > tol.flag_rel * (1.0 + scale) {
        return KernelCertificate {
            ok: false,
            candidate: false,
            hermitian_defect: defect,
            hermitian_pair: pair,
            levels: Vec::new(),
            witness: None,
            psd_rel: tol.psd_rel,
        };
    }
    let levels: Vec<(LevelReport, Option<Witness>)> = (1..=kernel.tower().levels())
        .into_par_iter()
        .map(|lam| {
            let m = kernel.assemble_level(lam);
            if m.nrows() == 0 {
                return (
                    LevelReport {
                        level: lam,
                        size: 0,
                        min_eig: 0.0,
                        max_abs_eig: 0.0,
                        ok: true,
                    },
                    None,
                );
            }
            let eig = hermitian_eigen(&m, EigenOrder::Ascending);
            let min_eig = eig.values[0];
            let max_abs = eig
                .values
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max);
            let ok = psd_ok(min_eig, max_abs, tol.psd_rel);
            let witness = if ok {
                None
            } else {
                let col = eig.vectors.column(0);
                Some(Witness {
                    level: lam,
                    eigenvalue: min_eig,
                    re: col.iter().map(|z| z.re).collect(),
                    im: col.iter().map(|z| z.im).collect(),
                })
            };
            (
                LevelReport {
                    level: lam,
                    size: m.nrows(),
                    min_eig,
                    max_abs_eig: max_abs,
                    ok,
                },
                witness,
            )
        })
        .collect();
    let witness = levels.iter().find_map(|(_, w)| w.clone());
    let levels: Vec<LevelReport> = levels.into_iter().map(|(r, _)| r).collect();
    KernelCertificate {
        ok: levels.iter().all(|r| r.ok),
        candidate: true,
        hermitian_defect: defect,
        hermitian_pair: None,
        levels,
        witness,
        psd_rel: tol.psd_rel,
    }
}

/// The single-matrix route: assemble only the top level and check it.
pub fn top_level_psd(kernel: &OperatorKernel, tol: &Tolerances) -> bool {
    let scale = kernel.entry_scale();
    let (defect, _) = kernel.hermitian_defect();
    if defect > tol.flag_rel * (1.0 + scale) {
        return false;
    }
    let m = kernel.assemble_level(kernel.tower().levels());
    if m.nrows() == 0 {
        return true;
    }
    let eig = hermitian_eigen(&m, EigenOrder::Ascending);
    let max_abs = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    psd_ok(eig.values[0], max_abs, tol.psd_rel)
}

/// The increment-block route: one assembled matrix per dimension
/// increment. The kernel is positive definite iff every report is ok.
pub fn increment_psd(kernel: &OperatorKernel, tol: &Tolerances) -> Vec<IncrementReport> {
    (1..=kernel.tower().levels())
        .into_par_iter()
        .map(|k| {
            let m = kernel.assemble_increment(k);
            if m.nrows() == 0 {
                return IncrementReport {
                    increment: k,
                    size: 0,
                    min_eig: 0.0,
                    max_abs_eig: 0.0,
                    ok: true,
                };
            }
            let eig = hermitian_eigen(&m, EigenOrder::Ascending);
            let min_eig = eig.values[0];
            let max_abs = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
            IncrementReport {
                increment: k,
                size: m.nrows(),
                min_eig,
                max_abs_eig: max_abs,
                ok: psd_ok(min_eig, max_abs, tol.psd_rel),
            }
        })
        .collect()
}

/// Positive definiteness of a semigroup function, via its kernel.
pub fn is_lpdf(phi: &OperatorFunction, tol: &Tolerances) -> KernelCertificate {
    is_lpdk(&phi.kernel(), tol)
}

/// The boundedness constants of a positive definite function: for each
/// semigroup element `u` and level `λ`, the smallest `C` with
/// `M^λ_u ⪯ C² M^λ`, where `M^λ_u` is assembled from `φ(t* u* u s)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundednessConstants {
    /// `constants[u][λ-1]` is `C_u^λ`.
    pub constants: Vec<Vec<f64>>,
}

impl BoundednessConstants {
    pub fn at(&self, u: usize, level: usize) -> f64 {
        self.constants[u][level - 1]
    }

    /// Deterministic flat listing for certificates.
    pub fn entries(&self) -> Vec<LbcEntry> {
        let mut out = Vec::new();
        for (u, row) in self.constants.iter().enumerate() {
            for (i, &c) in row.iter().enumerate() {
                out.push(LbcEntry {
                    u,
                    level: i + 1,
                    c,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LbcEntry {
    pub u: usize,
    pub level: usize,
    pub c: f64,
}

/// Assembled increment matrix of the `u`-shifted form: block `(t, s)` is
/// the `k`-th block of `φ((ut)* (us))`.
fn assemble_shifted_increment(phi: &OperatorFunction, u: usize, k: usize) -> CMatrix {
    let sg = phi.semigroup();
    let n = sg.len();
    let d = phi.tower().increment(k);
    let mut m = CMatrix::zeros(n * d, n * d);
    for t in 0..n {
        for s in 0..n {
            let idx = sg.pairing(sg.mul(u, s), sg.mul(u, t));
            m.view_mut((t * d, s * d), (d, d))
                .copy_from(phi.value(idx).block(k));
        }
    }
    m
}

/// Computes the optimal boundedness constants of a positive definite
/// function. Fails when the shifted form leaves the range of the base
/// form at some `(u, k)`; no constant exists from that level on.
pub fn lbc_constants(phi: &OperatorFunction, tol: &Tolerances) -> Result<BoundednessConstants> {
    let cert = is_lpdf(phi, tol);
    if !cert.ok {
        let (level, min_eig) = cert
            .witness
            .as_ref()
            .map(|w| (w.level, w.eigenvalue))
            .unwrap_or((0, f64::NAN));
        return Err(Error::NotPositiveDefinite { level, min_eig });
    }
    let kernel = phi.kernel();
    let sg = phi.semigroup();
    let n = sg.len();
    let levels = phi.tower().levels();

    // Per increment: eigendecompose the base form once, then bound every
    // shifted form against it on the range.
    struct IncrementData {
        sq_constants: Vec<f64>, // per u
    }
    let per_increment: Result<Vec<IncrementData>> = (1..=levels)
        .into_par_iter()
        .map(|k| {
            let m = kernel.assemble_increment(k);
            if m.nrows() == 0 {
                return Ok(IncrementData {
                    sq_constants: vec![0.0; n],
                });
            }
            let eig = hermitian_eigen(&m, EigenOrder::Descending);
            let wmax = eig.values[0].max(0.0);
            let kept: Vec<usize> = eig
                .values
                .iter()
                .enumerate()
                .filter(|&(_, &w)| w > tol.rank_rel * wmax)
                .map(|(i, _)| i)
                .collect();
            let dropped: Vec<usize> = (0..eig.values.len()).filter(|i| !kept.contains(i)).collect();
            let q_kept = select_columns(&eig.vectors, &kept);
            let q_null = select_columns(&eig.vectors, &dropped);
            let mut sq_constants = Vec::with_capacity(n);
            for u in 0..n {
                let mu = assemble_shifted_increment(phi, u, k);
                let mu_scale = opnorm(&mu);
                if q_null.ncols() > 0 {
                    let leak = opnorm(&(q_null.adjoint() * &mu * &q_null));
                    if leak > tol.psd_rel * (1.0 + mu_scale) {
                        return Err(Error::BoundednessRange {
                            u,
                            level: k,
                            defect: leak,
                        });
                    }
                }
                if kept.is_empty() {
                    sq_constants.push(0.0);
                    continue;
                }
                // Congruence by M^{-1/2} restricted to the range.
                let inv_roots = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
                    kept.iter()
                        .map(|&i| crate::linalg::C64::new(1.0 / eig.values[i].sqrt(), 0.0))
                        .collect(),
                ));
                let reduced = &inv_roots * q_kept.adjoint() * &mu * &q_kept * &inv_roots;
                let top = hermitian_eigen(&reduced, EigenOrder::Descending).values[0].max(0.0);
                sq_constants.push(top);
            }
            Ok(IncrementData { sq_constants })
        })
        .collect();
    let per_increment = per_increment?;

    let mut constants = vec![vec![0.0; levels]; n];
    for (u, row) in constants.iter_mut().enumerate() {
        let mut acc: f64 = 0.0;
        for (k, data) in per_increment.iter().enumerate() {
            acc = acc.max(data.sq_constants[u]);
            // A vacuous prefix (all-zero form so far) gets the canonical
            // constant 1.
            row[k] = if acc > 0.0 { acc.sqrt() } else { 1.0 };
        }
    }
    Ok(BoundednessConstants { constants })
}

fn select_columns(m: &CMatrix, idx: &[usize]) -> CMatrix {
    if idx.is_empty() {
        return CMatrix::zeros(m.nrows(), 0);
    }
    CMatrix::from_columns(&idx.iter().map(|&i| m.column(i).into_owned()).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::sample;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn const_kernel(tower: &Tower, n: usize, block: f64) -> OperatorKernel {
        let op = LocalOperator::identity(tower).scale(crate::linalg::C64::new(block, 0.0));
        OperatorKernel::from_fn(tower, n, |_, _| op.clone()).unwrap()
    }

    #[test]
    fn constant_identity_kernel_is_positive() {
        let t = Tower::new(vec![1, 2]).unwrap();
        let k = const_kernel(&t, 3, 1.0);
        let cert = is_lpdk(&k, &tol());
        assert!(cert.ok && cert.candidate);
        assert_eq!(cert.levels.len(), 2);
    }

    #[test]
    fn off_diagonal_two_rejected_with_witness() {
        // Γ(s,s) = I, Γ(s,t) = 2I assembles to [[1,2],[2,1]] per level.
        let t = Tower::new(vec![1]).unwrap();
        let id = LocalOperator::identity(&t);
        let two = id.scale(crate::linalg::C64::new(2.0, 0.0));
        let k = OperatorKernel::from_fn(&t, 2, |s, tt| if s == tt { id.clone() } else { two.clone() })
            .unwrap();
        let cert = is_lpdk(&k, &tol());
        assert!(!cert.ok && cert.candidate);
        let w = cert.witness.as_ref().unwrap();
        assert!((w.eigenvalue + 1.0).abs() < 1e-12);
        assert_eq!(cert.level_witness(), Some(1));
    }

    #[test]
    fn gram_kernels_are_positive() {
        let mut rng = sample::rng(11);
        for _ in 0..5 {
            let t = sample::tower(&mut rng, 3, 6);
            let k = sample::gram_kernel(&mut rng, &t, 3);
            assert!(is_lpdk(&k, &tol()).ok);
        }
    }

    #[test]
    fn non_hermitian_kernel_is_not_a_candidate() {
        let t = Tower::new(vec![2]).unwrap();
        let mut rng = sample::rng(5);
        let g = sample::gaussian_operator(&mut rng, &t, &t);
        // Γ(0,1) is not the adjoint of Γ(1,0).
        let k = OperatorKernel::from_fn(&t, 2, |s, tt| {
            if s == tt {
                LocalOperator::identity(&t)
            } else {
                g.clone()
            }
        })
        .unwrap();
        let cert = is_lpdk(&k, &tol());
        assert!(!cert.candidate && !cert.ok);
        assert!(cert.hermitian_pair.is_some());
    }

    #[test]
    fn function_kernel_follows_the_table() {
        // On Z_2 with φ(e) = I, φ(g) = 0: Γ(g,g) = φ(g·g) = φ(e) = I.
        let sg = StarSemigroup::cyclic_group(2).unwrap();
        let t = Tower::new(vec![1]).unwrap();
        let id = LocalOperator::identity(&t);
        let zero = LocalOperator::zero(&t, &t).unwrap();
        let phi = OperatorFunction::new(sg, t.clone(), vec![id.clone(), zero]).unwrap();
        let k = phi.kernel();
        assert!(k.value(1, 1).sub(&id).unwrap().max_seminorm() == 0.0);
        assert!(k.value(0, 0).sub(&id).unwrap().max_seminorm() == 0.0);
        // Diagonal of the kernel is φ(s* s).
        for s in 0..2 {
            let expect = phi.value(phi.semigroup().pairing(s, s));
            assert!(k.value(s, s).sub(expect).unwrap().max_seminorm() == 0.0);
        }
    }

    #[test]
    fn scalar_indefinite_function() {
        // φ(e) = 1, φ(g) = 2 on Z_2 assembles to [[1,2],[2,1]].
        let sg = StarSemigroup::cyclic_group(2).unwrap();
        let t = Tower::new(vec![1]).unwrap();
        let id = LocalOperator::identity(&t);
        let two = id.scale(crate::linalg::C64::new(2.0, 0.0));
        let phi = OperatorFunction::new(sg, t, vec![id, two]).unwrap();
        let cert = is_lpdf(&phi, &tol());
        assert!(!cert.ok);
        assert!((cert.levels[0].min_eig + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_identity_function_has_unit_constants() {
        let sg = StarSemigroup::powerset_intersection(2).unwrap();
        let t = Tower::new(vec![1, 3]).unwrap();
        let id = LocalOperator::identity(&t);
        let phi = OperatorFunction::new(sg.clone(), t, vec![id.clone(); sg.len()]).unwrap();
        let lbc = lbc_constants(&phi, &tol()).unwrap();
        for u in 0..sg.len() {
            for lam in 1..=2 {
                assert!((lbc.at(u, lam) - 1.0).abs() < 1e-9, "C_{u}^{lam}");
            }
        }
    }

    #[test]
    fn neutral_element_constant_is_one() {
        let mut rng = sample::rng(23);
        let t = Tower::new(vec![2, 3]).unwrap();
        let phi = sample::lpdf_on_powerset(&mut rng, 2, &t, 2);
        let lbc = lbc_constants(&phi, &tol()).unwrap();
        let e = phi.semigroup().neutral();
        for lam in 1..=2 {
            assert!((lbc.at(e, lam) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn three_routes_agree_on_random_kernels() {
        let mut rng = sample::rng(42);
        for i in 0..20 {
            let t = sample::tower(&mut rng, 3, 5);
            let k = if i % 2 == 0 {
                sample::gram_kernel(&mut rng, &t, 3)
            } else {
                sample::hermitian_kernel(&mut rng, &t, 3)
            };
            let whole = top_level_psd(&k, &tol());
            let cert = is_lpdk(&k, &tol());
            let incs = increment_psd(&k, &tol());
            assert_eq!(whole, cert.ok, "level vs top route, case {i}");
            assert_eq!(cert.ok, incs.iter().all(|r| r.ok), "increment route, case {i}");
        }
    }

    #[test]
    fn scaling_preserves_the_verdict() {
        let mut rng = sample::rng(77);
        let t = sample::tower(&mut rng, 2, 4);
        for kernel in [
            sample::gram_kernel(&mut rng, &t, 3),
            sample::hermitian_kernel(&mut rng, &t, 3),
        ] {
            let scaled = OperatorKernel::from_fn(&t, kernel.size(), |s, tt| {
                kernel.value(s, tt).scale(crate::linalg::C64::new(3.5, 0.0))
            })
            .unwrap();
            assert_eq!(is_lpdk(&kernel, &tol()).ok, is_lpdk(&scaled, &tol()).ok);
        }
    }

    #[test]
    fn identity_matrix_helper_matches() {
        assert_eq!(identity(3), CMatrix::identity(3, 3));
    }
}
