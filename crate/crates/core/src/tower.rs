//! Finite towers of nested finite-dimensional complex Hilbert spaces.
//!
//! A [`Tower`] is a chain `H_1 ⊂ H_2 ⊂ … ⊂ H_L` realized as coordinate
//! subspaces of `C^{d_L}`: level `λ` is the span of the first `d_λ`
//! coordinates, so the inclusion of a level into a higher one is the
//! isometric zero-padding map and the orthogonal projection back is the
//! truncation. Everything downstream (operators, kernels, dilations) is
//! expressed level-wise over a tower.

use crate::error::{Error, Result};
use crate::linalg::{C64, CVector};

/// A finite chain of nested Hilbert space dimensions `d_1 <= … <= d_L`.
///
/// Levels are 1-based throughout. Zero dimensions are permitted (a level
/// may be the zero space); this arises naturally in minimal dilation
/// spaces of degenerate kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    dims: Vec<usize>,
}

impl Tower {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::BadTower(dims));
        }
        Ok(Tower { dims })
    }

    /// Number of levels `L`.
    pub fn levels(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimension `d_λ` of level `λ` (1-based).
    pub fn dim(&self, level: usize) -> usize {
        assert!(
            level >= 1 && level <= self.dims.len(),
            "level {level} out of range 1..={}",
            self.dims.len()
        );
        self.dims[level - 1]
    }

    pub fn top_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// Dimension increment `d_k - d_{k-1}` brought in by level `k` (with
    /// `d_0 = 0`). May be zero.
    pub fn increment(&self, k: usize) -> usize {
        let prev = if k == 1 { 0 } else { self.dim(k - 1) };
        self.dim(k) - prev
    }

    pub fn increments(&self) -> Vec<usize> {
        (1..=self.levels()).map(|k| self.increment(k)).collect()
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level < 1 || level > self.levels() {
            return Err(Error::LevelOutOfRange {
                level,
                levels: self.levels(),
            });
        }
        Ok(())
    }

    /// The tower realizing level `λ` as a locally Hilbert space over the
    /// same index chain: dims `(d_1, …, d_λ, d_λ, …, d_λ)`.
    pub fn truncated(&self, level: usize) -> Result<Tower> {
        self.check_level(level)?;
        let dims = (1..=self.levels())
            .map(|mu| self.dim(mu.min(level)))
            .collect();
        Ok(Tower { dims })
    }
}

/// An element of the tower: a vector living at a definite level.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalVector {
    tower: Tower,
    level: usize,
    coords: CVector,
}

impl LocalVector {
    pub fn new(tower: &Tower, level: usize, coords: CVector) -> Result<Self> {
        if level < 1 || level > tower.levels() {
            return Err(Error::LevelOutOfRange {
                level,
                levels: tower.levels(),
            });
        }
        if coords.len() != tower.dim(level) {
            return Err(Error::CoordLength {
                level,
                want: tower.dim(level),
                got: coords.len(),
            });
        }
        Ok(LocalVector {
            tower: tower.clone(),
            level,
            coords,
        })
    }

    pub fn zero(tower: &Tower, level: usize) -> Result<Self> {
        Self::new(tower, level, CVector::zeros(tower.dim(level)))
    }

    /// The `i`-th coordinate basis vector at the given level (0-based `i`).
    pub fn basis(tower: &Tower, level: usize, i: usize) -> Result<Self> {
        let mut v = CVector::zeros(tower.dim(level));
        if i >= v.len() {
            return Err(Error::CoordLength {
                level,
                want: tower.dim(level),
                got: i + 1,
            });
        }
        v[i] = C64::new(1.0, 0.0);
        Self::new(tower, level, v)
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coords(&self) -> &CVector {
        &self.coords
    }

    /// Isometric inclusion into level `mu >= level`: zero-padding.
    pub fn promote(&self, mu: usize) -> Result<LocalVector> {
        if mu < self.level {
            return Err(Error::InvalidPromotion {
                from: self.level,
                to: mu,
            });
        }
        self.tower.check_level(mu)?;
        let mut coords = CVector::zeros(self.tower.dim(mu));
        coords.rows_mut(0, self.coords.len()).copy_from(&self.coords);
        LocalVector::new(&self.tower, mu, coords)
    }

    /// Orthogonal projection onto level `lambda <= level`: truncation.
    pub fn project(&self, lambda: usize) -> Result<LocalVector> {
        if lambda > self.level {
            return Err(Error::InvalidProjection {
                from: self.level,
                to: lambda,
            });
        }
        self.tower.check_level(lambda)?;
        let coords = self.coords.rows(0, self.tower.dim(lambda)).into_owned();
        LocalVector::new(&self.tower, lambda, coords)
    }

    /// Scalar product, linear in the first argument and conjugate-linear in
    /// the second. Both vectors are promoted to the higher of the two
    /// levels first; the value does not depend on that choice.
    pub fn inner(&self, other: &LocalVector) -> Result<C64> {
        if self.tower != other.tower {
            return Err(Error::TowerMismatch);
        }
        let n = self.coords.len().min(other.coords.len());
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            acc += self.coords[i] * other.coords[i].conj();
        }
        Ok(acc)
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }
}
