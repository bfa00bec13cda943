//! Dilation of discrete operator-valued measures to projection-valued ones.
//!
//! A [`LocalPovm`] is a finite list of locally positive effects summing to
//! the identity. Stacking the square roots of the effects gives a locally
//! isometric embedding into a direct sum; compressing each coordinate slot
//! to the range of its effect root makes the construction minimal. The
//! resulting coordinate projections are exactly orthogonal and sum to the
//! identity by construction, and compress back onto the effects.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::OperatorFunction;
use crate::linalg::{hermitian_defect, hermitian_eigen, svd_rank, CMatrix, C64, EigenOrder};
use crate::operator::LocalOperator;
use crate::semigroup::StarSemigroup;
use crate::tol::Tolerances;
use crate::tower::Tower;

/// A discrete operator-valued measure: effects `E_1, …, E_m` with
/// `0 ⪯ E_i ⪯ I` and `Σ E_i = I`.
#[derive(Debug, Clone)]
pub struct LocalPovm {
    tower: Tower,
    atoms: Vec<LocalOperator>,
}

impl LocalPovm {
    /// Structural construction; mathematical validity is checked by
    /// [`LocalPovm::validate`] (and by [`naimark`]).
    pub fn new(atoms: Vec<LocalOperator>) -> Result<Self> {
        let first = atoms.first().ok_or(Error::EmptyPovm)?;
        if !first.is_square() {
            return Err(Error::TowerMismatch);
        }
        let tower = first.source().clone();
        for a in &atoms {
            if a.source() != &tower || a.target() != &tower {
                return Err(Error::TowerMismatch);
            }
        }
        Ok(LocalPovm { tower, atoms })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn atoms(&self) -> &[LocalOperator] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Checks `0 ⪯ E_i ⪯ I` for every effect and `Σ E_i = I`, reporting
    /// the first offending atom with an eigenvalue witness.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let id = LocalOperator::identity(&self.tower);
        for (i, a) in self.atoms.iter().enumerate() {
            if let Some((level, eigenvalue)) = positivity_witness(a, tol) {
                return Err(Error::EffectNotPositive {
                    atom: i,
                    level,
                    eigenvalue,
                });
            }
            let complement = id.sub(a)?;
            if let Some((level, eigenvalue)) = positivity_witness(&complement, tol) {
                return Err(Error::EffectTooLarge {
                    atom: i,
                    level,
                    eigenvalue,
                });
            }
        }
        let mut sum = LocalOperator::zero(&self.tower, &self.tower)?;
        for a in &self.atoms {
            sum = sum.add(a)?;
        }
        let defect = sum.sub(&id)?.max_seminorm();
        if defect > tol.flag_rel * (1.0 + self.atoms.len() as f64) {
            return Err(Error::EffectSum { defect });
        }
        Ok(())
    }

    /// Appends the defect effect `I − Σ E_i` so the family sums to the
    /// identity; rejected when the defect is not positive.
    pub fn with_defect_atom(&self, tol: &Tolerances) -> Result<LocalPovm> {
        let id = LocalOperator::identity(&self.tower);
        let mut sum = LocalOperator::zero(&self.tower, &self.tower)?;
        for a in &self.atoms {
            sum = sum.add(a)?;
        }
        let defect = id.sub(&sum)?;
        if let Some((level, eigenvalue)) = positivity_witness(&defect, tol) {
            return Err(Error::EffectNotPositive {
                atom: self.atoms.len(),
                level,
                eigenvalue,
            });
        }
        let mut atoms = self.atoms.clone();
        atoms.push(defect);
        LocalPovm::new(atoms)
    }

    /// The measure as a function on the power set of the atoms under
    /// intersection: `φ(ω) = Σ_{i ∈ ω} E_i`. Dilating this function is the
    /// semigroup route to the same projection-valued measure.
    pub fn measure_function(&self) -> Result<OperatorFunction> {
        let m = self.atoms.len();
        let sg = StarSemigroup::powerset_intersection(m as u32)?;
        let values: Vec<LocalOperator> = (0..sg.len())
            .map(|omega| {
                let mut acc = LocalOperator::zero(&self.tower, &self.tower)?;
                for (i, a) in self.atoms.iter().enumerate() {
                    if omega >> i & 1 == 1 {
                        acc = acc.add(a)?;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        OperatorFunction::new(sg, self.tower.clone(), values)
    }
}

/// First (level, eigenvalue) violating positivity, or None. Non-Hermitian
/// blocks report a NaN eigenvalue.
fn positivity_witness(op: &LocalOperator, tol: &Tolerances) -> Option<(usize, f64)> {
    let scale = 1.0 + op.max_seminorm();
    for k in 1..=op.levels() {
        let b = op.block(k);
        if b.nrows() == 0 {
            continue;
        }
        if hermitian_defect(b) > tol.flag_rel * scale {
            return Some((k, f64::NAN));
        }
        let min = hermitian_eigen(b, EigenOrder::Ascending).values[0];
        if min < -tol.psd_rel * scale {
            return Some((k, min));
        }
    }
    None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaimarkResiduals {
    pub compression: f64,
    pub orthogonality: f64,
    pub sum_identity: f64,
    pub isometry: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaimarkCertificate {
    #[serde(rename = "dims_K")]
    pub dims_k: Vec<usize>,
    pub residuals: NaimarkResiduals,
    /// `ranks[atom][increment-1]`: rank of the effect at each increment;
    /// the dilation increment is the column sum.
    pub ranks: Vec<Vec<usize>>,
    pub minimal: bool,
    pub tolerances: Tolerances,
}

/// A projection-valued dilation of a measure: pairwise orthogonal
/// projections `F_i` on the dilation tower with `E_i = J* F_i J`.
#[derive(Debug, Clone)]
pub struct SpectralDilation {
    pub dilation_tower: Tower,
    pub embedding: LocalOperator,
    pub projections: Vec<LocalOperator>,
    pub certificate: NaimarkCertificate,
}

/// Dilates the measure: per increment, stack the compressed effect roots
/// into an isometry and let `F_i` be the coordinate projection of slot `i`.
pub fn naimark(povm: &LocalPovm, tol: &Tolerances) -> Result<SpectralDilation> {
    povm.validate(tol)?;
    let base = povm.tower().clone();
    let m_atoms = povm.len();
    let levels = base.levels();

    struct IncrementData {
        j_block: CMatrix,
        ranks: Vec<usize>,
    }
    let data: Result<Vec<IncrementData>> = (1..=levels)
        .into_par_iter()
        .map(|k| {
            let m = base.increment(k);
            let mut rows = Vec::with_capacity(m_atoms);
            let mut ranks = Vec::with_capacity(m_atoms);
            for atom in povm.atoms() {
                let b = atom.block(k);
                if m == 0 {
                    rows.push(CMatrix::zeros(0, 0));
                    ranks.push(0);
                    continue;
                }
                let eig = hermitian_eigen(b, EigenOrder::Descending);
                let wmax = eig.values.iter().cloned().fold(0.0, f64::max);
                let kept: Vec<usize> = (0..eig.values.len())
                    .filter(|&i| eig.values[i] > tol.rank_rel * wmax && eig.values[i] > 0.0)
                    .collect();
                // Rows are diag(sqrt w) Q*, i.e. the effect root compressed
                // onto its own range.
                let mut row = CMatrix::zeros(kept.len(), m);
                for (ri, &i) in kept.iter().enumerate() {
                    let root = eig.values[i].sqrt();
                    for j in 0..m {
                        row[(ri, j)] = eig.vectors[(j, i)].conj() * C64::new(root, 0.0);
                    }
                }
                ranks.push(kept.len());
                rows.push(row);
            }
            let total: usize = ranks.iter().sum();
            let mut j_block = CMatrix::zeros(total, m);
            let mut at = 0;
            for row in &rows {
                j_block.view_mut((at, 0), (row.nrows(), m)).copy_from(row);
                at += row.nrows();
            }
            Ok(IncrementData { j_block, ranks })
        })
        .collect();
    let data = data?;

    let dims: Vec<usize> = data
        .iter()
        .scan(0usize, |acc, d| {
            *acc += d.j_block.nrows();
            Some(*acc)
        })
        .collect();
    let dilation_tower = Tower::new(dims)?;

    let embedding = LocalOperator::from_blocks(
        base.clone(),
        dilation_tower.clone(),
        data.iter().map(|d| d.j_block.clone()).collect(),
    )?;

    let projections: Vec<LocalOperator> = (0..m_atoms)
        .map(|i| {
            let blocks = data
                .iter()
                .map(|d| {
                    let total: usize = d.ranks.iter().sum();
                    let mut p = CMatrix::zeros(total, total);
                    let offset: usize = d.ranks[..i].iter().sum();
                    for j in 0..d.ranks[i] {
                        p[(offset + j, offset + j)] = C64::new(1.0, 0.0);
                    }
                    p
                })
                .collect();
            LocalOperator::from_blocks(dilation_tower.clone(), dilation_tower.clone(), blocks)
        })
        .collect::<Result<_>>()?;

    // Residuals.
    let id_base = LocalOperator::identity(&base);
    let id_k = LocalOperator::identity(&dilation_tower);
    let isometry = embedding
        .adjoint()
        .compose(&embedding)?
        .sub(&id_base)?
        .max_seminorm();
    let mut compression: f64 = 0.0;
    for (i, atom) in povm.atoms().iter().enumerate() {
        let back = embedding
            .adjoint()
            .compose(&projections[i])?
            .compose(&embedding)?;
        compression = compression.max(back.sub(atom)?.max_seminorm());
    }
    let mut orthogonality: f64 = 0.0;
    for i in 0..m_atoms {
        for j in 0..m_atoms {
            if i != j {
                orthogonality = orthogonality
                    .max(projections[i].compose(&projections[j])?.max_seminorm());
            }
        }
    }
    let mut sum = LocalOperator::zero(&dilation_tower, &dilation_tower)?;
    for p in &projections {
        sum = sum.add(p)?;
    }
    let sum_identity = sum.sub(&id_k)?.max_seminorm();

    // Minimality: the columns of {F_i J} span each increment.
    let minimal = data.iter().enumerate().all(|(idx, d)| {
        let r = d.j_block.nrows();
        if r == 0 {
            return true;
        }
        let m = base.increment(idx + 1);
        let mut stacked = CMatrix::zeros(r, m_atoms * m);
        for i in 0..m_atoms {
            let block = projections[i].block(idx + 1) * &d.j_block;
            stacked.view_mut((0, i * m), (r, m)).copy_from(&block);
        }
        svd_rank(&stacked, tol.rank_rel) == r
    });

    let certificate = NaimarkCertificate {
        dims_k: dilation_tower.dims().to_vec(),
        residuals: NaimarkResiduals {
            compression,
            orthogonality,
            sum_identity,
            isometry,
        },
        ranks: (0..m_atoms)
            .map(|i| data.iter().map(|d| d.ranks[i]).collect())
            .collect(),
        minimal,
        tolerances: *tol,
    };

    Ok(SpectralDilation {
        dilation_tower,
        embedding,
        projections,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn half_half_scalar_measure() {
        // E_1 = E_2 = 0.5 on a 1-dimensional space: J = (1/√2, 1/√2)ᵀ and
        // the compressions recover 0.5.
        let t = Tower::new(vec![1]).unwrap();
        let half = LocalOperator::identity(&t).scale(C64::new(0.5, 0.0));
        let povm = LocalPovm::new(vec![half.clone(), half]).unwrap();
        let d = naimark(&povm, &tol()).unwrap();
        assert_eq!(d.dilation_tower.dims(), &[2]);
        let j = d.embedding.block(1);
        assert!((j[(0, 0)].norm() - (0.5f64).sqrt()).abs() < 1e-12);
        assert!((j[(1, 0)].norm() - (0.5f64).sqrt()).abs() < 1e-12);
        let back = d
            .embedding
            .adjoint()
            .compose(&d.projections[0])
            .unwrap()
            .compose(&d.embedding)
            .unwrap();
        assert!((back.block(1)[(0, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_projection_measure_is_fixed() {
        // E_1 = I is already projection valued: K = H, F_1 = I.
        let t = Tower::new(vec![2, 3]).unwrap();
        let povm = LocalPovm::new(vec![LocalOperator::identity(&t)]).unwrap();
        let d = naimark(&povm, &tol()).unwrap();
        assert_eq!(d.dilation_tower.dims(), t.dims());
        assert!(d.projections[0].classify(&tol()).projection);
        assert!(d.certificate.residuals.compression < 1e-12);
    }

    #[test]
    fn random_measures_dilate_cleanly() {
        let mut rng = sample::rng(31);
        let t = Tower::new(vec![1, 2]).unwrap();
        for _ in 0..5 {
            let povm = sample::povm(&mut rng, &t, 3, false);
            povm.validate(&tol()).unwrap();
            let d = naimark(&povm, &tol()).unwrap();
            assert!(d.certificate.residuals.compression < 1e-10);
            assert!(d.certificate.residuals.orthogonality < 1e-10);
            assert!(d.certificate.residuals.sum_identity == 0.0);
            assert!(d.certificate.minimal);
            for f in &d.projections {
                assert!(f.classify(&tol()).projection);
            }
        }
    }

    #[test]
    fn invalid_measures_are_named() {
        let t = Tower::new(vec![1]).unwrap();
        let neg = LocalOperator::identity(&t).scale(C64::new(-0.5, 0.0));
        let big = LocalOperator::identity(&t).scale(C64::new(1.5, 0.0));
        let povm = LocalPovm::new(vec![neg, big]).unwrap();
        match povm.validate(&tol()) {
            Err(Error::EffectNotPositive { atom, eigenvalue, .. }) => {
                assert_eq!(atom, 0);
                assert!((eigenvalue + 0.5).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        let half = LocalOperator::identity(&t).scale(C64::new(0.5, 0.0));
        let short = LocalPovm::new(vec![half]).unwrap();
        assert!(matches!(short.validate(&tol()), Err(Error::EffectSum { .. })));
        // The defect atom fixes the short measure.
        let fixed = short.with_defect_atom(&tol()).unwrap();
        assert_eq!(fixed.len(), 2);
        fixed.validate(&tol()).unwrap();
    }

    #[test]
    fn measure_function_is_additive_on_disjoint_atoms() {
        let mut rng = sample::rng(13);
        let t = Tower::new(vec![2]).unwrap();
        let povm = sample::povm(&mut rng, &t, 2, false);
        let phi = povm.measure_function().unwrap();
        // φ({0}) + φ({1}) = φ({0,1}).
        let sum = phi.value(0b01).add(phi.value(0b10)).unwrap();
        assert!(sum.sub(phi.value(0b11)).unwrap().max_seminorm() < 1e-12);
    }
}
