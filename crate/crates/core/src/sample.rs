//! Random instances: towers, operators of each classification class,
//! kernels, measures and positive definite functions. Used heavily by the
//! test suites; seeded generators keep every run reproducible.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::{OperatorFunction, OperatorKernel};
use crate::linalg::{CMatrix, C64};
use crate::measure::LocalPovm;
use crate::operator::{LocalOperator, OperatorClass};
use crate::semigroup::StarSemigroup;
use crate::tower::Tower;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(standard_normal(rng), standard_normal(rng))
    })
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; the tails beyond what this gives are irrelevant here.
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

/// Random tower with up to `max_levels` levels and top dimension at most
/// `max_dim`; increments may be zero.
pub fn tower(rng: &mut impl Rng, max_levels: usize, max_dim: usize) -> Tower {
    let levels = rng.gen_range(1..=max_levels);
    let mut dims = Vec::with_capacity(levels);
    let mut acc = rng.gen_range(1..=max_dim.max(1));
    for _ in 0..levels {
        dims.push(acc.min(max_dim));
        acc += rng.gen_range(0..=((max_dim.saturating_sub(acc)).min(4)));
    }
    dims.sort_unstable();
    Tower::new(dims).unwrap()
}

/// Dense Gaussian operator between two towers over the same chain.
pub fn gaussian_operator(rng: &mut impl Rng, source: &Tower, target: &Tower) -> LocalOperator {
    let blocks = (1..=source.levels())
        .map(|k| gaussian_matrix(rng, target.increment(k), source.increment(k)))
        .collect();
    LocalOperator::from_blocks(source.clone(), target.clone(), blocks).unwrap()
}

/// Haar-distributed unitary via the phase-fixed QR of a Gaussian matrix.
pub fn haar_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let qr = gaussian_matrix(rng, n, n).qr();
    let r = qr.r();
    let q = qr.q();
    let phases = DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            d / C64::new(d.norm(), 0.0)
        }
    });
    q * CMatrix::from_diagonal(&phases)
}

/// Isometric `rows × cols` block (`rows >= cols`).
fn isometry_block(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols);
    if cols == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let u = haar_unitary(rng, rows);
    u.view((0, 0), (rows, cols)).into_owned()
}

/// Random operator constructed blockwise to have the given class. The
/// towers must be compatible with the class: isometries need target
/// increments at least as large as source increments, coisometries the
/// reverse, square-only classes equal towers.
pub fn operator_with_class(
    rng: &mut impl Rng,
    class: OperatorClass,
    source: &Tower,
    target: &Tower,
) -> LocalOperator {
    let blocks = (1..=source.levels())
        .map(|k| {
            let rows = target.increment(k);
            let cols = source.increment(k);
            match class {
                OperatorClass::SelfAdjoint => {
                    let a = gaussian_matrix(rng, rows, cols);
                    (&a + a.adjoint()).scale(0.5)
                }
                OperatorClass::Positive => {
                    let a = gaussian_matrix(rng, rows, cols);
                    let scale = 1.0 / (1.0 + rows as f64);
                    (a.adjoint() * &a).scale(scale)
                }
                OperatorClass::Projection => {
                    if rows == 0 {
                        return CMatrix::zeros(0, 0);
                    }
                    let rank = rng.gen_range(0..=rows);
                    let q = isometry_block(rng, rows, rank);
                    &q * q.adjoint()
                }
                OperatorClass::Normal => {
                    let u = haar_unitary(rng, rows);
                    let d = CMatrix::from_diagonal(&DVector::from_fn(rows, |_, _| {
                        C64::new(standard_normal(rng), standard_normal(rng))
                    }));
                    &u * d * u.adjoint()
                }
                OperatorClass::Isometry => isometry_block(rng, rows, cols),
                OperatorClass::Coisometry => isometry_block(rng, cols, rows).adjoint(),
                OperatorClass::PartialIsometry => {
                    let rank = rng.gen_range(0..=rows.min(cols));
                    let u = isometry_block(rng, rows, rank);
                    let v = isometry_block(rng, cols, rank);
                    u * v.adjoint()
                }
                OperatorClass::Unitary => haar_unitary(rng, rows),
                OperatorClass::Invertible => {
                    let u = haar_unitary(rng, rows);
                    let v = haar_unitary(rng, rows);
                    let d = CMatrix::from_diagonal(&DVector::from_fn(rows, |_, _| {
                        C64::new(0.3 + rng.gen::<f64>() * 2.0, 0.0)
                    }));
                    u * d * v
                }
                OperatorClass::Contraction => {
                    if rows.min(cols) == 0 {
                        return CMatrix::zeros(rows, cols);
                    }
                    let u = haar_unitary(rng, rows);
                    let v = haar_unitary(rng, cols);
                    let mut d = CMatrix::zeros(rows, cols);
                    for i in 0..rows.min(cols) {
                        d[(i, i)] = C64::new(rng.gen::<f64>(), 0.0);
                    }
                    u * d * v
                }
            }
        })
        .collect();
    LocalOperator::from_blocks(source.clone(), target.clone(), blocks).unwrap()
}

/// Random locally contraction (every block strictly inside the unit ball).
pub fn contraction(rng: &mut impl Rng, tower: &Tower) -> LocalOperator {
    operator_with_class(rng, OperatorClass::Contraction, tower, tower)
}

/// Positive definite kernel of Gram type: `Γ(s, t) = X_t* X_s` for random
/// operators `X_s`.
pub fn gram_kernel(rng: &mut impl Rng, tower: &Tower, points: usize) -> OperatorKernel {
    let xs: Vec<LocalOperator> = (0..points)
        .map(|_| gaussian_operator(rng, tower, tower))
        .collect();
    OperatorKernel::from_fn(tower, points, |s, t| {
        xs[t].adjoint().compose(&xs[s]).unwrap()
    })
    .unwrap()
}

/// Hermitian-symmetric kernel with Gaussian entries; indefinite with
/// overwhelming probability.
pub fn hermitian_kernel(rng: &mut impl Rng, tower: &Tower, points: usize) -> OperatorKernel {
    let mut entries: Vec<Vec<Option<LocalOperator>>> = vec![vec![None; points]; points];
    for s in 0..points {
        for t in s..points {
            if s == t {
                let g = gaussian_operator(rng, tower, tower);
                let h = g.add(&g.adjoint()).unwrap().scale(C64::new(0.5, 0.0));
                entries[s][t] = Some(h);
            } else {
                let g = gaussian_operator(rng, tower, tower);
                entries[s][t] = Some(g.clone());
                entries[t][s] = Some(g.adjoint());
            }
        }
    }
    OperatorKernel::from_fn(tower, points, |s, t| entries[s][t].clone().unwrap()).unwrap()
}

/// Random measure: `m` positive effects normalized to sum to the identity.
/// With `rank_deficient` some effects drop rank, exercising the minimal
/// compression.
pub fn povm(rng: &mut impl Rng, tower: &Tower, m: usize, rank_deficient: bool) -> LocalPovm {
    loop {
        let mut block_sets: Vec<Vec<CMatrix>> = vec![Vec::new(); m];
        let mut ok = true;
        for k in 1..=tower.levels() {
            let dim = tower.increment(k);
            if dim == 0 {
                for set in block_sets.iter_mut() {
                    set.push(CMatrix::zeros(0, 0));
                }
                continue;
            }
            let raw: Vec<CMatrix> = (0..m)
                .map(|i| {
                    let rank = if rank_deficient && i > 0 {
                        rng.gen_range(1..=dim)
                    } else {
                        dim
                    };
                    let g = gaussian_matrix(rng, rank, dim);
                    g.adjoint() * g
                })
                .collect();
            let mut sum = CMatrix::zeros(dim, dim);
            for r in &raw {
                sum += r;
            }
            let eig = crate::linalg::hermitian_eigen(&sum, crate::linalg::EigenOrder::Descending);
            let wmax = eig.values[0];
            if eig.values.iter().any(|&w| w < 1e-8 * wmax) {
                ok = false;
                break;
            }
            let inv_root = {
                let d = CMatrix::from_diagonal(&DVector::from_vec(
                    eig.values
                        .iter()
                        .map(|&w| C64::new(1.0 / w.sqrt(), 0.0))
                        .collect(),
                ));
                &eig.vectors * d * eig.vectors.adjoint()
            };
            for (i, r) in raw.iter().enumerate() {
                block_sets[i].push(&inv_root * r * &inv_root);
            }
        }
        if !ok {
            continue;
        }
        let atoms = block_sets
            .into_iter()
            .map(|blocks| LocalOperator::from_blocks(tower.clone(), tower.clone(), blocks).unwrap())
            .collect();
        return LocalPovm::new(atoms).unwrap();
    }
}

/// Positive definite function on the cyclic group Z_n obtained by
/// compressing a random unitary representation on a padded tower. Such a
/// compression is automatically unital, positive definite and bounded.
pub fn lpdf_on_cyclic(
    rng: &mut impl Rng,
    n: usize,
    tower: &Tower,
    pad: usize,
) -> OperatorFunction {
    let sg = StarSemigroup::cyclic_group(n).unwrap();
    let mut blocks: Vec<Vec<CMatrix>> = vec![Vec::new(); n];
    for k in 1..=tower.levels() {
        let m0 = tower.increment(k);
        let big = m0 + pad;
        let v = haar_unitary(rng, big);
        let exps: Vec<usize> = (0..big).map(|_| rng.gen_range(0..n)).collect();
        let j = isometry_block(rng, big, m0);
        for (s, set) in blocks.iter_mut().enumerate() {
            let d = CMatrix::from_diagonal(&DVector::from_fn(big, |i, _| {
                let theta = std::f64::consts::TAU * (exps[i] * s % n) as f64 / n as f64;
                C64::new(theta.cos(), theta.sin())
            }));
            let pi = &v * d * v.adjoint();
            set.push(j.adjoint() * pi * &j);
        }
    }
    let values = blocks
        .into_iter()
        .map(|b| LocalOperator::from_blocks(tower.clone(), tower.clone(), b).unwrap())
        .collect();
    OperatorFunction::new(sg, tower.clone(), values).unwrap()
}

/// Positive definite function on the power set of `m` atoms under
/// intersection, compressed from commuting random projections.
pub fn lpdf_on_powerset(
    rng: &mut impl Rng,
    m: u32,
    tower: &Tower,
    pad: usize,
) -> OperatorFunction {
    let sg = StarSemigroup::powerset_intersection(m).unwrap();
    let n = sg.len();
    let mut blocks: Vec<Vec<CMatrix>> = vec![Vec::new(); n];
    for k in 1..=tower.levels() {
        let m0 = tower.increment(k);
        let big = m0 + pad;
        let v = haar_unitary(rng, big);
        // One 0/1 diagonal per atom; π(ω) multiplies the diagonals of the
        // atoms missing from ω.
        let bits: Vec<Vec<bool>> = (0..m)
            .map(|_| (0..big).map(|_| rng.gen::<bool>()).collect())
            .collect();
        let j = isometry_block(rng, big, m0);
        for (omega, set) in blocks.iter_mut().enumerate() {
            let d = CMatrix::from_diagonal(&DVector::from_fn(big, |i, _| {
                let mut keep = true;
                for (atom, atom_bits) in bits.iter().enumerate() {
                    if omega >> atom & 1 == 0 && !atom_bits[i] {
                        keep = false;
                    }
                }
                if keep {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
            let pi = &v * d * v.adjoint();
            set.push(j.adjoint() * pi * &j);
        }
    }
    let values = blocks
        .into_iter()
        .map(|b| LocalOperator::from_blocks(tower.clone(), tower.clone(), b).unwrap())
        .collect();
    OperatorFunction::new(sg, tower.clone(), values).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::is_lpdf;
    use crate::tol::Tolerances;

    #[test]
    fn class_instances_classify() {
        let mut r = rng(101);
        let tol = Tolerances::default();
        let t = Tower::new(vec![2, 4]).unwrap();
        for class in [
            OperatorClass::SelfAdjoint,
            OperatorClass::Positive,
            OperatorClass::Projection,
            OperatorClass::Normal,
            OperatorClass::Unitary,
            OperatorClass::Invertible,
            OperatorClass::Contraction,
            OperatorClass::PartialIsometry,
        ] {
            let op = operator_with_class(&mut r, class, &t, &t);
            assert!(
                op.classify(&tol).get(class),
                "constructed {} instance fails its own flag",
                class.name()
            );
        }
        let wide = Tower::new(vec![3, 6]).unwrap();
        let iso = operator_with_class(&mut r, OperatorClass::Isometry, &t, &wide);
        assert!(iso.classify(&tol).isometry);
        let coiso = operator_with_class(&mut r, OperatorClass::Coisometry, &wide, &t);
        assert!(coiso.classify(&tol).coisometry);
    }

    #[test]
    fn sampled_lpdfs_are_positive_and_unital() {
        let mut r = rng(55);
        let tol = Tolerances::default();
        let t = Tower::new(vec![1, 3]).unwrap();
        let phi = lpdf_on_cyclic(&mut r, 4, &t, 2);
        assert!(is_lpdf(&phi, &tol).ok);
        let e = phi.semigroup().neutral();
        assert!(
            phi.value(e)
                .sub(&LocalOperator::identity(&t))
                .unwrap()
                .max_seminorm()
                < 1e-12
        );
        let psi = lpdf_on_powerset(&mut r, 2, &t, 1);
        assert!(is_lpdf(&psi, &tol).ok);
    }
}
