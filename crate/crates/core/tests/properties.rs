//! Cross-module properties that tie the constructions together: the
//! operator-family form of positive definiteness, commutation transfer,
//! additivity of the dilated representation, the brute-force check of the
//! boundedness constants, and the agreement between the two measure
//! dilation routes.

use locdil::dilation::dilate;
use locdil::kernel::{is_lpdk, lbc_constants, OperatorKernel};
use locdil::linalg::{hermitian_eigen, opnorm, svd_rank, CMatrix, C64, EigenOrder};
use locdil::measure::naimark;
use locdil::operator::{fuglede_putnam_residual, LocalOperator, OperatorClass};
use locdil::sample;
use locdil::tower::Tower;
use locdil::Tolerances;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// The operator-family quadratic form `Σ T_t* Γ(s,t) T_s` is positive for
/// a positive definite kernel: the vector form implies the operator form
/// on random finitely supported operator families.
#[test]
fn operator_family_form_follows_from_vector_form() {
    let mut rng = sample::rng(2024);
    for case in 0..10 {
        let t = sample::tower(&mut rng, 3, 4);
        let kernel = sample::gram_kernel(&mut rng, &t, 3);
        assert!(is_lpdk(&kernel, &tol()).ok);
        let family: Vec<LocalOperator> = (0..kernel.size())
            .map(|_| sample::gaussian_operator(&mut rng, &t, &t))
            .collect();
        let mut acc = LocalOperator::zero(&t, &t).unwrap();
        for s in 0..kernel.size() {
            for u in 0..kernel.size() {
                let term = family[u]
                    .adjoint()
                    .compose(kernel.value(s, u))
                    .unwrap()
                    .compose(&family[s])
                    .unwrap();
                acc = acc.add(&term).unwrap();
            }
        }
        let scale = 1.0 + acc.max_seminorm();
        for k in 1..=t.levels() {
            let b = acc.block(k);
            if b.nrows() == 0 {
                continue;
            }
            let min = hermitian_eigen(b, EigenOrder::Ascending).values[0];
            assert!(min >= -1e-9 * scale, "case {case}: min eigenvalue {min}");
        }
    }
}

/// Commutation transfer: for a locally normal operator and any polynomial
/// of it, the adjoint is intertwined as well.
#[test]
fn commutation_transfers_to_adjoints() {
    let mut rng = sample::rng(314);
    for _ in 0..10 {
        let t = sample::tower(&mut rng, 3, 5);
        let n = sample::operator_with_class(&mut rng, OperatorClass::Normal, &t, &t);
        // S = p(N) commutes with N for a random quadratic p.
        let c0 = C64::new(0.7, -0.3);
        let c1 = C64::new(-0.2, 0.5);
        let c2 = C64::new(0.4, 0.1);
        let s = LocalOperator::identity(&t)
            .scale(c0)
            .add(&n.scale(c1))
            .unwrap()
            .add(&n.compose(&n).unwrap().scale(c2))
            .unwrap();
        let commute = s
            .compose(&n)
            .unwrap()
            .sub(&n.compose(&s).unwrap())
            .unwrap()
            .max_seminorm();
        assert!(commute < 1e-10);
        let r = fuglede_putnam_residual(&n, &n, &s, &tol()).unwrap();
        assert!(r < 1e-10, "transfer residual {r}");
    }
}

/// The kernel generated by a dilated representation is positive definite.
#[test]
fn representation_kernel_is_positive() {
    let mut rng = sample::rng(46);
    let t = Tower::new(vec![1, 2]).unwrap();
    let phi = sample::lpdf_on_cyclic(&mut rng, 4, &t, 2);
    let d = dilate(&phi, &tol()).unwrap();
    let sg = phi.semigroup().clone();
    let k_tower = d.dilation_tower().clone();
    let kernel = OperatorKernel::from_fn(&k_tower, sg.len(), |s, u| {
        d.representation(sg.pairing(s, u)).clone()
    })
    .unwrap();
    assert!(is_lpdk(&kernel, &tol()).ok);
}

/// Additivity passes to the representation: on the power set semigroup of
/// a measure, `E(ω₁) + E(ω₂) = E(ω₁ ∪ ω₂)` for disjoint atoms forces
/// `π(ω₁ ∪ ω₂) = π(ω₁) + π(ω₂)`.
#[test]
fn measure_additivity_passes_to_the_representation() {
    let mut rng = sample::rng(58);
    let t = Tower::new(vec![1, 2]).unwrap();
    let povm = sample::povm(&mut rng, &t, 2, false);
    let phi = povm.measure_function().unwrap();
    // Sanity: the additivity hypothesis holds for all s, t.
    let sg = phi.semigroup().clone();
    let (u, v, w) = (0b01usize, 0b10usize, 0b11usize);
    for s in sg.elements() {
        for tt in sg.elements() {
            let lhs = phi
                .value(sg.mul(s, sg.mul(u, tt)))
                .add(phi.value(sg.mul(s, sg.mul(v, tt))))
                .unwrap();
            let rhs = phi.value(sg.mul(s, sg.mul(w, tt)));
            assert!(lhs.sub(rhs).unwrap().max_seminorm() < 1e-12);
        }
    }
    let d = dilate(&phi, &tol()).unwrap();
    let sum = d.representation(u).add(d.representation(v)).unwrap();
    let residual = sum.sub(d.representation(w)).unwrap().max_seminorm();
    assert!(residual < 1e-9, "additivity residual {residual}");
}

/// Brute-force check of the boundedness constants: an independently
/// computed generalized Rayleigh maximum (Gram-Schmidt basis of the range,
/// Cholesky whitening, power iteration) agrees with the reported constant.
#[test]
fn boundedness_constants_match_generalized_eigenvalue_oracle() {
    let mut rng = sample::rng(1234);
    let t = Tower::new(vec![2]).unwrap();
    let phi = sample::lpdf_on_powerset(&mut rng, 2, &t, 1);
    let lbc = lbc_constants(&phi, &tol()).unwrap();
    let kernel = phi.kernel();
    let sg = phi.semigroup().clone();
    let m = kernel.assemble_increment(1);

    // Orthonormal basis of range(M) by modified Gram-Schmidt on columns.
    let mut basis: Vec<nalgebra::DVector<C64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for b in &basis {
            let coef = b.dotc(&v);
            v -= b * coef;
        }
        let norm = v.norm();
        if norm > 1e-10 * opnorm(&m).max(1.0) {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    let q = CMatrix::from_columns(&basis);

    for u in sg.elements() {
        // Assemble the shifted form directly from the definition.
        let n = sg.len();
        let d = 2;
        let mut mu = CMatrix::zeros(n * d, n * d);
        for tt in 0..n {
            for s in 0..n {
                let idx = sg.mul(
                    sg.mul(sg.star(tt), sg.star(u)),
                    sg.mul(u, s),
                );
                mu.view_mut((tt * d, s * d), (d, d))
                    .copy_from(&phi.value(idx).level_matrix(1));
            }
        }
        let a0 = q.adjoint() * &m * &q;
        let a1 = q.adjoint() * &mu * &q;
        let chol = a0.clone().cholesky().expect("base form positive on range");
        let l_inv = chol
            .l()
            .try_inverse()
            .expect("triangular factor invertible");
        let x = &l_inv * a1 * l_inv.adjoint();
        // Power iteration on the whitened form.
        let mut v = nalgebra::DVector::from_element(x.nrows(), C64::new(1.0, 0.0));
        v /= C64::new(v.norm(), 0.0);
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w = &x * &v;
            lambda = w.norm();
            if lambda == 0.0 {
                break;
            }
            v = w / C64::new(lambda, 0.0);
        }
        let reported = lbc.at(u, 1);
        assert!(
            (reported - lambda.sqrt()).abs() <= 1e-6 * (1.0 + reported),
            "u = {u}: reported {reported}, oracle {}",
            lambda.sqrt()
        );
    }
}

/// The two routes to a projection-valued dilation (direct stacking and
/// the semigroup dilation of the measure function) produce the same
/// dimensions, and the compressions match.
#[test]
fn measure_dilation_routes_agree() {
    let mut rng = sample::rng(99);
    for case in 0..5 {
        let t = Tower::new(vec![1, 2]).unwrap();
        let povm = sample::povm(&mut rng, &t, 3, case % 2 == 1);
        let direct = naimark(&povm, &tol()).unwrap();
        let phi = povm.measure_function().unwrap();
        let via_semigroup = dilate(&phi, &tol()).unwrap();
        assert_eq!(
            direct.dilation_tower.dims(),
            via_semigroup.dilation_tower().dims(),
            "case {case}"
        );
        // Both compress to the effects: atom i is the singleton subset.
        for (i, atom) in povm.atoms().iter().enumerate() {
            let omega = 1usize << i;
            let via = via_semigroup
                .embedding
                .adjoint()
                .compose(via_semigroup.representation(omega))
                .unwrap()
                .compose(&via_semigroup.embedding)
                .unwrap();
            assert!(via.sub(atom).unwrap().max_seminorm() < 1e-8);
            let dir = direct
                .embedding
                .adjoint()
                .compose(&direct.projections[i])
                .unwrap()
                .compose(&direct.embedding)
                .unwrap();
            assert!(dir.sub(atom).unwrap().max_seminorm() < 1e-10);
        }
        // The semigroup route's projections are projections too.
        for i in 0..povm.len() {
            let omega = 1usize << i;
            assert!(via_semigroup
                .representation(omega)
                .classify(&tol())
                .projection);
        }
    }
}

/// Nested minimality: the dilation dimension at each level equals the
/// numerical rank of the assembled level matrix, and is non-decreasing.
#[test]
fn dilation_dimensions_are_level_ranks() {
    let mut rng = sample::rng(808);
    for _ in 0..5 {
        let t = Tower::new(vec![1, 2, 3]).unwrap();
        let phi = sample::lpdf_on_cyclic(&mut rng, 3, &t, 1);
        let d = dilate(&phi, &tol()).unwrap();
        let kernel = phi.kernel();
        let dims = d.dilation_tower().dims();
        assert!(dims.windows(2).all(|w| w[0] <= w[1]));
        for lam in 1..=t.levels() {
            let m = kernel.assemble_level(lam);
            assert_eq!(
                dims[lam - 1],
                svd_rank(&m, tol().rank_rel),
                "level {lam}"
            );
        }
    }
}

/// The windowed ρ-check decouples blockwise: assembling the whole top
/// level directly gives the same verdict as the per-level certificate.
#[test]
fn window_check_agrees_with_direct_assembly() {
    let mut rng = sample::rng(909);
    let t = Tower::new(vec![1, 3]).unwrap();
    for case in 0..8 {
        let scale = 0.5 + 0.25 * case as f64;
        let op = sample::contraction(&mut rng, &t).scale(C64::new(scale, 0.0));
        let window = 3;
        let rho = 1.3;
        let cert = locdil::rho_contraction_check(&op, rho, window, &tol()).unwrap();

        // Direct route: the full top-level window matrix.
        let top = op.level_matrix(t.levels());
        let slots = window + 1;
        let d = top.nrows();
        let mut powers = vec![CMatrix::identity(d, d)];
        for n in 1..=window {
            let next = &powers[n - 1] * &top;
            powers.push(next);
        }
        let mut m = CMatrix::zeros(slots * d, slots * d);
        for a in 0..slots {
            for b in 0..slots {
                let block = if a == b {
                    CMatrix::identity(d, d).map(|z| z * C64::new(rho, 0.0))
                } else if b > a {
                    powers[b - a].clone()
                } else {
                    powers[a - b].adjoint()
                };
                m.view_mut((a * d, b * d), (d, d)).copy_from(&block);
            }
        }
        let eig = hermitian_eigen(&m, EigenOrder::Ascending);
        let max_abs = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let direct_ok = eig.values[0] >= -tol().psd_rel * max_abs;
        let window_ok = cert.levels.iter().all(|l| l.ok);
        assert_eq!(direct_ok, window_ok, "case {case} (scale {scale})");
    }
}

/// Inverse of an invertible local operator inverts blockwise.
#[test]
fn inverse_is_blockwise() {
    let mut rng = sample::rng(7);
    let t = sample::tower(&mut rng, 4, 6);
    let op = sample::operator_with_class(&mut rng, OperatorClass::Invertible, &t, &t);
    let inv = op.inverse(&tol()).unwrap();
    let id = LocalOperator::identity(&t);
    assert!(op.compose(&inv).unwrap().sub(&id).unwrap().max_seminorm() < 1e-10);
    assert!(inv.compose(&op).unwrap().sub(&id).unwrap().max_seminorm() < 1e-10);
    for k in 1..=t.levels() {
        if t.increment(k) == 0 {
            continue;
        }
        let direct = op.block(k).clone().try_inverse().unwrap();
        assert!(opnorm(&(direct - inv.block(k))) < 1e-10);
    }
}

/// The reproducing space satisfies the per-level inclusion and reproducing
/// properties: point maps send level vectors into the same level of the
/// dilation tower, and evaluation is their adjoint.
#[test]
fn reproducing_properties_hold_per_level() {
    let mut rng = sample::rng(333);
    let t = Tower::new(vec![1, 3]).unwrap();
    let kernel = sample::gram_kernel(&mut rng, &t, 3);
    let space = locdil::build_rklhs(&kernel, &tol()).unwrap();
    for s in 0..kernel.size() {
        let gamma = space.point_map(s);
        for lam in 1..=t.levels() {
            // (LIP): the image of a level-λ vector has no components above λ.
            for i in 0..t.dim(lam) {
                let h = locdil::LocalVector::basis(&t, lam, i).unwrap();
                let image = gamma.apply(&h).unwrap();
                assert_eq!(image.level(), lam);
            }
        }
        // (LRP): ⟨k(s), h⟩ = ⟨k, Γ_s h⟩ for random vectors.
        let k_top = space.dilation_tower().levels();
        let kv = locdil::LocalVector::new(
            space.dilation_tower(),
            k_top,
            sample::gaussian_matrix(&mut rng, space.dilation_tower().top_dim(), 1).column(0).into_owned(),
        )
        .unwrap();
        let h = locdil::LocalVector::new(
            &t,
            t.levels(),
            sample::gaussian_matrix(&mut rng, t.top_dim(), 1).column(0).into_owned(),
        )
        .unwrap();
        let lhs = space.evaluate(&kv, s).unwrap().inner(&h).unwrap();
        let rhs = kv.inner(&gamma.apply(&h).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
    }
}
