//! Operators between towers, stored as increment-diagonal blocks.
//!
//! A compatible system of level operators `{T_λ}` (one `d²_λ × d¹_λ` matrix
//! per level, each extending the previous one and leaving the coordinate
//! subspaces invariant) is exactly a block-diagonal family over the
//! dimension increments. [`LocalOperator`] stores the increment blocks
//! `B_k` and reconstitutes any level matrix as `blockdiag(B_1, …, B_λ)` on
//! demand. All algebra (adjoint, composition, seminorms, classification)
//! happens blockwise.

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eigen, identity, min_singular_value, opnorm, CMatrix, C64, EigenOrder,
};
use crate::tol::Tolerances;
use crate::tower::{LocalVector, Tower};

#[derive(Debug, Clone)]
pub struct LocalOperator {
    source: Tower,
    target: Tower,
    blocks: Vec<CMatrix>,
}

impl LocalOperator {
    /// Builds an operator directly from increment blocks. Block `k` must
    /// have shape `(d²_k - d²_{k-1}) × (d¹_k - d¹_{k-1})`.
    pub fn from_blocks(source: Tower, target: Tower, blocks: Vec<CMatrix>) -> Result<Self> {
        if source.levels() != target.levels() {
            return Err(Error::TowerMismatch);
        }
        if blocks.len() != source.levels() {
            return Err(Error::BlockCount {
                want: source.levels(),
                got: blocks.len(),
            });
        }
        for (i, b) in blocks.iter().enumerate() {
            let k = i + 1;
            let (want_rows, want_cols) = (target.increment(k), source.increment(k));
            if b.nrows() != want_rows || b.ncols() != want_cols {
                return Err(Error::BlockShape {
                    block: k,
                    rows: b.nrows(),
                    cols: b.ncols(),
                    want_rows,
                    want_cols,
                });
            }
        }
        Ok(LocalOperator {
            source,
            target,
            blocks,
        })
    }

    /// Ingests a full level system `{T_λ}` and verifies it is compatible
    /// with the tower inclusions: for every pair `λ < μ`, `T_μ` must extend
    /// `T_λ` and vanish on the off-diagonal coupling blocks. The first
    /// offending pair is reported together with the off-block norm.
    pub fn from_levels(
        source: Tower,
        target: Tower,
        levels: &[CMatrix],
        tol: &Tolerances,
    ) -> Result<Self> {
        if source.levels() != target.levels() {
            return Err(Error::TowerMismatch);
        }
        let l = source.levels();
        if levels.len() != l {
            return Err(Error::BlockCount {
                want: l,
                got: levels.len(),
            });
        }
        let mut scale: f64 = 0.0;
        for (i, m) in levels.iter().enumerate() {
            let lam = i + 1;
            let (want_rows, want_cols) = (target.dim(lam), source.dim(lam));
            if m.nrows() != want_rows || m.ncols() != want_cols {
                return Err(Error::LevelShape {
                    level: lam,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    want_rows,
                    want_cols,
                });
            }
            scale = scale.max(opnorm(m));
        }
        let eps = tol.struct_rel * (1.0 + scale);
        for lam in 1..=l {
            for mu in (lam + 1)..=l {
                let big = &levels[mu - 1];
                let (r, c) = (target.dim(lam), source.dim(lam));
                let nested = big.view((0, 0), (r, c)).into_owned() - &levels[lam - 1];
                let lower_left = big.view((r, 0), (big.nrows() - r, c)).into_owned();
                let upper_right = big.view((0, c), (r, big.ncols() - c)).into_owned();
                let defect = opnorm(&nested)
                    .max(opnorm(&lower_left))
                    .max(opnorm(&upper_right));
                if defect > eps {
                    return Err(Error::IncompatibleLevels {
                        low: lam,
                        high: mu,
                        defect,
                        tol: eps,
                    });
                }
            }
        }
        let top = &levels[l - 1];
        let mut blocks = Vec::with_capacity(l);
        let (mut r0, mut c0) = (0, 0);
        for k in 1..=l {
            let (ri, ci) = (target.increment(k), source.increment(k));
            blocks.push(top.view((r0, c0), (ri, ci)).into_owned());
            r0 += ri;
            c0 += ci;
        }
        LocalOperator::from_blocks(source, target, blocks)
    }

    pub fn identity(tower: &Tower) -> Self {
        let blocks = (1..=tower.levels())
            .map(|k| identity(tower.increment(k)))
            .collect();
        LocalOperator {
            source: tower.clone(),
            target: tower.clone(),
            blocks,
        }
    }

    pub fn zero(source: &Tower, target: &Tower) -> Result<Self> {
        if source.levels() != target.levels() {
            return Err(Error::TowerMismatch);
        }
        let blocks = (1..=source.levels())
            .map(|k| CMatrix::zeros(target.increment(k), source.increment(k)))
            .collect();
        Ok(LocalOperator {
            source: source.clone(),
            target: target.clone(),
            blocks,
        })
    }

    /// The locally isometric embedding `J_λ` of level `λ` (viewed as the
    /// tower `(d_1, …, d_λ, d_λ, …)`) into the full tower. Its range
    /// projection `J_λ J_λ*` is the level projection, and `J_λ* T J_λ`
    /// recovers the level-`λ` part of any operator `T` on the tower.
    pub fn embedding(tower: &Tower, level: usize) -> Result<Self> {
        let source = tower.truncated(level)?;
        let blocks = (1..=tower.levels())
            .map(|k| {
                if k <= level {
                    identity(tower.increment(k))
                } else {
                    CMatrix::zeros(tower.increment(k), 0)
                }
            })
            .collect();
        Ok(LocalOperator {
            source,
            target: tower.clone(),
            blocks,
        })
    }

    pub fn source(&self) -> &Tower {
        &self.source
    }

    pub fn target(&self) -> &Tower {
        &self.target
    }

    pub fn is_square(&self) -> bool {
        self.source == self.target
    }

    pub fn levels(&self) -> usize {
        self.source.levels()
    }

    /// Increment block `B_k` (1-based).
    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k - 1]
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// The level matrix `T_λ = blockdiag(B_1, …, B_λ)`.
    pub fn level_matrix(&self, level: usize) -> CMatrix {
        let mut m = CMatrix::zeros(self.target.dim(level), self.source.dim(level));
        let (mut r0, mut c0) = (0, 0);
        for k in 1..=level {
            let b = &self.blocks[k - 1];
            m.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
            r0 += b.nrows();
            c0 += b.ncols();
        }
        m
    }

    pub fn to_levels(&self) -> Vec<CMatrix> {
        (1..=self.levels()).map(|l| self.level_matrix(l)).collect()
    }

    /// Applies the operator to a vector at its own level.
    pub fn apply(&self, v: &LocalVector) -> Result<LocalVector> {
        if v.tower() != &self.source {
            return Err(Error::TowerMismatch);
        }
        let out = self.level_matrix(v.level()) * v.coords();
        LocalVector::new(&self.target, v.level(), out)
    }

    pub fn adjoint(&self) -> LocalOperator {
        LocalOperator {
            source: self.target.clone(),
            target: self.source.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// Composition `self ∘ rhs` (apply `rhs` first). The source tower of
    /// `self` must equal the target tower of `rhs`.
    pub fn compose(&self, rhs: &LocalOperator) -> Result<LocalOperator> {
        if self.source != rhs.target {
            return Err(Error::TowerMismatch);
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&rhs.blocks)
            .map(|(s, t)| s * t)
            .collect();
        Ok(LocalOperator {
            source: rhs.source.clone(),
            target: self.target.clone(),
            blocks,
        })
    }

    pub fn add(&self, rhs: &LocalOperator) -> Result<LocalOperator> {
        if self.source != rhs.source || self.target != rhs.target {
            return Err(Error::TowerMismatch);
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&rhs.blocks)
            .map(|(a, b)| a + b)
            .collect();
        Ok(LocalOperator {
            source: self.source.clone(),
            target: self.target.clone(),
            blocks,
        })
    }

    pub fn sub(&self, rhs: &LocalOperator) -> Result<LocalOperator> {
        self.add(&rhs.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> LocalOperator {
        LocalOperator {
            source: self.source.clone(),
            target: self.target.clone(),
            blocks: self.blocks.iter().map(|b| b.map(|x| x * c)).collect(),
        }
    }

    /// Seminorm `|T|_λ`, the operator norm of the level matrix; computed as
    /// the largest singular value over the blocks `B_1, …, B_λ`. Zero-sized
    /// blocks contribute nothing.
    pub fn seminorm(&self, level: usize) -> f64 {
        assert!(
            level >= 1 && level <= self.levels(),
            "level {level} out of range 1..={}",
            self.levels()
        );
        self.blocks[..level]
            .iter()
            .map(opnorm)
            .fold(0.0, f64::max)
    }

    /// All seminorms `(|T|_1, …, |T|_L)`; non-decreasing by construction.
    pub fn seminorms(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.levels());
        let mut acc: f64 = 0.0;
        for b in &self.blocks {
            acc = acc.max(opnorm(b));
            out.push(acc);
        }
        out
    }

    /// The top seminorm `|T|_L = max_λ |T|_λ`.
    pub fn max_seminorm(&self) -> f64 {
        self.seminorm(self.levels())
    }

    /// Inverse, defined exactly when every increment block is invertible;
    /// the inverse has blocks `B_k^{-1}`.
    pub fn inverse(&self, tol: &Tolerances) -> Result<LocalOperator> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (i, b) in self.blocks.iter().enumerate() {
            if b.nrows() != b.ncols() {
                return Err(Error::NotSquare { flag: "invertible" });
            }
            if b.nrows() == 0 {
                blocks.push(b.clone());
                continue;
            }
            let smin = min_singular_value(b);
            let smax = opnorm(b);
            if smax == 0.0 || smin <= tol.rank_rel * smax {
                return Err(Error::NotPositive {
                    level: i + 1,
                    eigenvalue: smin,
                });
            }
            blocks.push(b.clone().try_inverse().ok_or(Error::NotPositive {
                level: i + 1,
                eigenvalue: smin,
            })?);
        }
        Ok(LocalOperator {
            source: self.target.clone(),
            target: self.source.clone(),
            blocks,
        })
    }

    /// Hermitian square root of a locally positive operator, blockwise via
    /// eigendecomposition. Eigenvalues in `[-eps, 0)` are clamped to zero;
    /// anything below `-eps` rejects the input.
    pub fn sqrt_psd(&self, tol: &Tolerances) -> Result<LocalOperator> {
        if !self.is_square() {
            return Err(Error::NotSquare { flag: "positive" });
        }
        let scale = 1.0 + self.max_seminorm();
        let eps = tol.psd_rel * scale;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (i, b) in self.blocks.iter().enumerate() {
            if b.nrows() == 0 {
                blocks.push(b.clone());
                continue;
            }
            if linalg::hermitian_defect(b) > tol.flag_rel * scale {
                return Err(Error::NotPositive {
                    level: i + 1,
                    eigenvalue: f64::NAN,
                });
            }
            let eig = hermitian_eigen(b, EigenOrder::Descending);
            if let Some(&min) = eig
                .values
                .iter()
                .min_by(|a, b| a.partial_cmp(b).unwrap())
            {
                if min < -eps {
                    return Err(Error::NotPositive {
                        level: i + 1,
                        eigenvalue: min,
                    });
                }
            }
            let roots = CMatrix::from_diagonal(
                &nalgebra::DVector::from_vec(
                    eig.values.iter().map(|&w| C64::new(w.max(0.0).sqrt(), 0.0)).collect(),
                ),
            );
            blocks.push(&eig.vectors * roots * eig.vectors.adjoint());
        }
        Ok(LocalOperator {
            source: self.source.clone(),
            target: self.target.clone(),
            blocks,
        })
    }

    /// Classifies the operator. Each flag holds iff it holds for every
    /// level matrix, equivalently for every increment block. Flags that
    /// need equal source and target towers are reported `false` on
    /// rectangular operators; use [`LocalOperator::has_class`] to get an
    /// error instead.
    pub fn classify(&self, tol: &Tolerances) -> Classification {
        let square = self.is_square();
        let norm = self.max_seminorm();
        let lin = tol.flag_rel * (1.0 + norm);
        let quad = tol.flag_rel * (1.0 + norm * norm);
        let psd = tol.psd_rel * (1.0 + norm);

        let mut c = Classification {
            square,
            self_adjoint: square,
            positive: square,
            projection: square,
            normal: square,
            isometry: true,
            coisometry: true,
            partial_isometry: true,
            unitary: true,
            invertible: true,
            contraction: true,
        };
        for b in &self.blocks {
            let (r, n) = (b.nrows(), b.ncols());
            if r == 0 && n == 0 {
                continue;
            }
            let bstar = b.adjoint();
            if square {
                let herm = opnorm(&(b - &bstar)) <= lin;
                c.self_adjoint &= herm;
                if herm {
                    let min_eig = hermitian_eigen(b, EigenOrder::Ascending).values[0];
                    c.positive &= min_eig >= -psd;
                } else {
                    c.positive = false;
                }
                c.projection &= herm && opnorm(&(b * b - b)) <= quad;
                c.normal &= opnorm(&(b * &bstar - &bstar * b)) <= quad;
            }
            let gram = &bstar * b;
            let cogram = b * &bstar;
            c.isometry &= opnorm(&(&gram - identity(n))) <= quad;
            c.coisometry &= opnorm(&(&cogram - identity(r))) <= quad;
            c.partial_isometry &= opnorm(&(&gram * &gram - &gram)) <= tol.flag_rel * (1.0 + norm.powi(4));
            if r == n && r > 0 {
                let smax = opnorm(b);
                c.invertible &= smax > 0.0 && min_singular_value(b) > tol.rank_rel * smax;
            } else {
                c.invertible = false;
            }
            c.contraction &= opnorm(b) <= 1.0 + tol.flag_rel;
        }
        c.unitary = c.isometry && c.coisometry;
        c
    }

    /// Checks a single class; square-only classes on a rectangular
    /// operator are a structural error rather than `false`.
    pub fn has_class(&self, class: OperatorClass, tol: &Tolerances) -> Result<bool> {
        let square_only = matches!(
            class,
            OperatorClass::SelfAdjoint
                | OperatorClass::Positive
                | OperatorClass::Projection
                | OperatorClass::Normal
        );
        if square_only && !self.is_square() {
            return Err(Error::NotSquare {
                flag: class.name(),
            });
        }
        let c = self.classify(tol);
        Ok(match class {
            OperatorClass::SelfAdjoint => c.self_adjoint,
            OperatorClass::Positive => c.positive,
            OperatorClass::Projection => c.projection,
            OperatorClass::Normal => c.normal,
            OperatorClass::Isometry => c.isometry,
            OperatorClass::Coisometry => c.coisometry,
            OperatorClass::PartialIsometry => c.partial_isometry,
            OperatorClass::Unitary => c.unitary,
            OperatorClass::Invertible => c.invertible,
            OperatorClass::Contraction => c.contraction,
        })
    }
}

/// Commutation-transfer residual: given locally normal `n1`, `n2` and an
/// intertwiner candidate `s`, returns `|s n1* - n2* s|_L`. When
/// `|s n1 - n2 s|_L` vanishes the returned residual vanishes as well (up
/// to roundoff of the same order); callers use it as a property check.
pub fn fuglede_putnam_residual(
    n1: &LocalOperator,
    n2: &LocalOperator,
    s: &LocalOperator,
    tol: &Tolerances,
) -> Result<f64> {
    if !n1.classify(tol).normal || !n2.classify(tol).normal {
        return Err(Error::NotNormal);
    }
    if s.source() != n1.source() || s.target() != n2.source() {
        return Err(Error::TowerMismatch);
    }
    let lhs = s.compose(&n1.adjoint())?;
    let rhs = n2.adjoint().compose(s)?;
    Ok(lhs.sub(&rhs)?.max_seminorm())
}

/// The classification flags of Prop-style level-wise predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorClass {
    SelfAdjoint,
    Positive,
    Projection,
    Normal,
    Isometry,
    Coisometry,
    PartialIsometry,
    Unitary,
    Invertible,
    Contraction,
}

impl OperatorClass {
    pub fn name(self) -> &'static str {
        match self {
            OperatorClass::SelfAdjoint => "self_adjoint",
            OperatorClass::Positive => "positive",
            OperatorClass::Projection => "projection",
            OperatorClass::Normal => "normal",
            OperatorClass::Isometry => "isometry",
            OperatorClass::Coisometry => "coisometry",
            OperatorClass::PartialIsometry => "partial_isometry",
            OperatorClass::Unitary => "unitary",
            OperatorClass::Invertible => "invertible",
            OperatorClass::Contraction => "contraction",
        }
    }

    pub const ALL: [OperatorClass; 10] = [
        OperatorClass::SelfAdjoint,
        OperatorClass::Positive,
        OperatorClass::Projection,
        OperatorClass::Normal,
        OperatorClass::Isometry,
        OperatorClass::Coisometry,
        OperatorClass::PartialIsometry,
        OperatorClass::Unitary,
        OperatorClass::Invertible,
        OperatorClass::Contraction,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub square: bool,
    pub self_adjoint: bool,
    pub positive: bool,
    pub projection: bool,
    pub normal: bool,
    pub isometry: bool,
    pub coisometry: bool,
    pub partial_isometry: bool,
    pub unitary: bool,
    pub invertible: bool,
    pub contraction: bool,
}

impl Classification {
    pub fn get(&self, class: OperatorClass) -> bool {
        match class {
            OperatorClass::SelfAdjoint => self.self_adjoint,
            OperatorClass::Positive => self.positive,
            OperatorClass::Projection => self.projection,
            OperatorClass::Normal => self.normal,
            OperatorClass::Isometry => self.isometry,
            OperatorClass::Coisometry => self.coisometry,
            OperatorClass::PartialIsometry => self.partial_isometry,
            OperatorClass::Unitary => self.unitary,
            OperatorClass::Invertible => self.invertible,
            OperatorClass::Contraction => self.contraction,
        }
    }

    /// Names of the flags that hold, in a fixed order.
    pub fn flags(&self) -> Vec<&'static str> {
        OperatorClass::ALL
            .iter()
            .filter(|&&c| self.get(c))
            .map(|c| c.name())
            .collect()
    }
}
