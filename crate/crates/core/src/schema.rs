//! JSON wire formats for towers, operators, semigroups, kernels,
//! functions and measures.
//!
//! Complex data is split into `re`/`im` arrays (the `im` part may be
//! omitted on input and defaults to zero). Operators are carried either as
//! increment `blocks` or as a full level system under `levels`; the latter
//! is run through the compatibility check on ingestion. Levels are
//! 1-based, matching the library.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{OperatorFunction, OperatorKernel};
use crate::linalg::{CMatrix, C64};
use crate::measure::LocalPovm;
use crate::operator::LocalOperator;
use crate::semigroup::StarSemigroup;
use crate::tol::Tolerances;
use crate::tower::{LocalVector, Tower};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TowerRepr {
    pub dims: Vec<usize>,
}

impl TowerRepr {
    pub fn to_tower(&self) -> Result<Tower> {
        Tower::new(self.dims.clone())
    }

    pub fn of(tower: &Tower) -> Self {
        TowerRepr {
            dims: tower.dims().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorRepr {
    pub level: usize,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl VectorRepr {
    pub fn to_vector(&self, tower: &Tower) -> Result<LocalVector> {
        if !self.im.is_empty() && self.im.len() != self.re.len() {
            return Err(Error::Schema(
                "vector re/im parts have different lengths".into(),
            ));
        }
        let coords = nalgebra::DVector::from_fn(self.re.len(), |i, _| {
            C64::new(self.re[i], self.im.get(i).copied().unwrap_or(0.0))
        });
        LocalVector::new(tower, self.level, coords)
    }

    pub fn of(v: &LocalVector) -> Self {
        VectorRepr {
            level: v.level(),
            re: v.coords().iter().map(|z| z.re).collect(),
            im: v.coords().iter().map(|z| z.im).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixRepr {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixRepr {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let check = |part: &Vec<Vec<f64>>, name: &str| -> Result<()> {
            if part.len() != self.rows || part.iter().any(|r| r.len() != self.cols) {
                return Err(Error::Schema(format!(
                    "matrix `{name}` part is not {}x{}",
                    self.rows, self.cols
                )));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if !self.im.is_empty() {
            check(&self.im, "im")?;
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let im = self.im.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0);
            C64::new(self.re[i][j], im)
        }))
    }

    pub fn of(m: &CMatrix) -> Self {
        MatrixRepr {
            rows: m.nrows(),
            cols: m.ncols(),
            re: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
                .collect(),
            im: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }
}

/// An operator, in increment-block form or as a full level system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorRepr {
    pub source: TowerRepr,
    pub target: TowerRepr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<MatrixRepr>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<MatrixRepr>>,
}

impl OperatorRepr {
    pub fn to_operator(&self, tol: &Tolerances) -> Result<LocalOperator> {
        let source = self.source.to_tower()?;
        let target = self.target.to_tower()?;
        match (&self.blocks, &self.levels) {
            (Some(blocks), None) => {
                let blocks = blocks
                    .iter()
                    .map(|b| b.to_matrix())
                    .collect::<Result<Vec<_>>>()?;
                LocalOperator::from_blocks(source, target, blocks)
            }
            (None, Some(levels)) => {
                let levels = levels
                    .iter()
                    .map(|m| m.to_matrix())
                    .collect::<Result<Vec<_>>>()?;
                LocalOperator::from_levels(source, target, &levels, tol)
            }
            (Some(_), Some(_)) => Err(Error::Schema(
                "operator carries both `blocks` and `levels`".into(),
            )),
            (None, None) => Err(Error::Schema(
                "operator needs `blocks` or `levels`".into(),
            )),
        }
    }

    pub fn of(op: &LocalOperator) -> Self {
        OperatorRepr {
            source: TowerRepr::of(op.source()),
            target: TowerRepr::of(op.target()),
            blocks: Some(op.blocks().iter().map(MatrixRepr::of).collect()),
            levels: None,
        }
    }
}

/// A semigroup, as explicit tables or as a builtin reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SemigroupRepr {
    Builtin { builtin: BuiltinRepr },
    Table {
        n: usize,
        mul: Vec<Vec<usize>>,
        star: Vec<usize>,
        e: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuiltinRepr {
    pub kind: String,
    pub params: u64,
}

impl SemigroupRepr {
    pub fn to_semigroup(&self) -> Result<StarSemigroup> {
        match self {
            SemigroupRepr::Builtin { builtin } => match builtin.kind.as_str() {
                "powerset_intersection" => {
                    StarSemigroup::powerset_intersection(builtin.params as u32)
                }
                "cyclic_group" => StarSemigroup::cyclic_group(builtin.params as usize),
                "truncated_naturals" => {
                    StarSemigroup::truncated_naturals(builtin.params as usize)
                }
                other => Err(Error::UnknownBuiltin(other.to_string())),
            },
            SemigroupRepr::Table { n, mul, star, e } => {
                if mul.len() != *n {
                    return Err(Error::SemigroupShape(format!(
                        "declared n = {n} but table has {} rows",
                        mul.len()
                    )));
                }
                StarSemigroup::new(mul.clone(), star.clone(), *e)
            }
        }
    }

    pub fn of(sg: &StarSemigroup) -> Self {
        SemigroupRepr::Table {
            n: sg.len(),
            mul: sg.mul_table(),
            star: sg.star_table().to_vec(),
            e: sg.neutral(),
        }
    }
}

/// A point reference inside a kernel file: an index into `points` or a
/// label from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Index(usize),
    Label(String),
}

impl PointRef {
    fn resolve(&self, points: &[String]) -> Result<usize> {
        match self {
            PointRef::Index(i) if *i < points.len() => Ok(*i),
            PointRef::Index(i) => Err(Error::Schema(format!("point index {i} out of range"))),
            PointRef::Label(l) => points
                .iter()
                .position(|p| p == l)
                .ok_or_else(|| Error::Schema(format!("unknown point label `{l}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelEntry {
    pub s: PointRef,
    pub t: PointRef,
    pub op: OperatorRepr,
}

/// A kernel on a finite labeled point set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelFile {
    pub points: Vec<String>,
    pub tower: TowerRepr,
    pub entries: Vec<KernelEntry>,
}

impl KernelFile {
    pub fn to_kernel(&self, tol: &Tolerances) -> Result<OperatorKernel> {
        let tower = self.tower.to_tower()?;
        let n = self.points.len();
        let mut slots: Vec<Option<LocalOperator>> = vec![None; n * n];
        for entry in &self.entries {
            let s = entry.s.resolve(&self.points)?;
            let t = entry.t.resolve(&self.points)?;
            if slots[s * n + t].is_some() {
                return Err(Error::Schema(format!(
                    "duplicate kernel entry for ({s},{t})"
                )));
            }
            slots[s * n + t] = Some(entry.op.to_operator(tol)?);
        }
        let values = slots
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::KernelIncomplete)?;
        OperatorKernel::new(tower, n, values)
    }

    pub fn of(kernel: &OperatorKernel, points: Option<Vec<String>>) -> Self {
        let n = kernel.size();
        let points = points.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        let mut entries = Vec::with_capacity(n * n);
        for s in 0..n {
            for t in 0..n {
                entries.push(KernelEntry {
                    s: PointRef::Index(s),
                    t: PointRef::Index(t),
                    op: OperatorRepr::of(kernel.value(s, t)),
                });
            }
        }
        KernelFile {
            points,
            tower: TowerRepr::of(kernel.tower()),
            entries,
        }
    }
}

/// A semigroup function, values listed in carrier order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionFile {
    pub semigroup: SemigroupRepr,
    pub tower: TowerRepr,
    pub values: Vec<OperatorRepr>,
}

impl FunctionFile {
    pub fn to_function(&self, tol: &Tolerances) -> Result<OperatorFunction> {
        let sg = self.semigroup.to_semigroup()?;
        let tower = self.tower.to_tower()?;
        let values = self
            .values
            .iter()
            .map(|v| v.to_operator(tol))
            .collect::<Result<Vec<_>>>()?;
        OperatorFunction::new(sg, tower, values)
    }

    pub fn of(phi: &OperatorFunction) -> Self {
        FunctionFile {
            semigroup: SemigroupRepr::of(phi.semigroup()),
            tower: TowerRepr::of(phi.tower()),
            values: phi.values().iter().map(OperatorRepr::of).collect(),
        }
    }
}

/// A discrete operator-valued measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmFile {
    pub atoms: Vec<OperatorRepr>,
}

impl PovmFile {
    pub fn to_povm(&self, tol: &Tolerances) -> Result<LocalPovm> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| a.to_operator(tol))
            .collect::<Result<Vec<_>>>()?;
        LocalPovm::new(atoms)
    }

    pub fn of(povm: &LocalPovm) -> Self {
        PovmFile {
            atoms: povm.atoms().iter().map(OperatorRepr::of).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn operator_round_trips_through_json() {
        let mut rng = sample::rng(71);
        let t = sample::tower(&mut rng, 3, 5);
        let op = sample::gaussian_operator(&mut rng, &t, &t);
        let text = serde_json::to_string(&OperatorRepr::of(&op)).unwrap();
        let parsed: OperatorRepr = serde_json::from_str(&text).unwrap();
        let back = parsed.to_operator(&tol()).unwrap();
        assert!(op.sub(&back).unwrap().max_seminorm() < 1e-15);
    }

    #[test]
    fn levels_form_is_accepted() {
        let t = Tower::new(vec![1, 2]).unwrap();
        let text = r#"{
            "source": {"dims": [1, 2]},
            "target": {"dims": [1, 2]},
            "levels": [
                {"rows": 1, "cols": 1, "re": [[2.0]]},
                {"rows": 2, "cols": 2, "re": [[2.0, 0.0], [0.0, 3.0]]}
            ]
        }"#;
        let parsed: OperatorRepr = serde_json::from_str(text).unwrap();
        let op = parsed.to_operator(&tol()).unwrap();
        assert_eq!(op.source(), &t);
        assert_eq!(op.block(2)[(0, 0)].re, 3.0);
    }

    #[test]
    fn incompatible_levels_form_is_rejected() {
        let text = r#"{
            "source": {"dims": [1, 2]},
            "target": {"dims": [1, 2]},
            "levels": [
                {"rows": 1, "cols": 1, "re": [[2.0]]},
                {"rows": 2, "cols": 2, "re": [[2.0, 1.0], [0.0, 3.0]]}
            ]
        }"#;
        let parsed: OperatorRepr = serde_json::from_str(text).unwrap();
        assert!(matches!(
            parsed.to_operator(&tol()),
            Err(Error::IncompatibleLevels { .. })
        ));
    }

    #[test]
    fn builtin_semigroup_reference() {
        let text = r#"{"builtin": {"kind": "powerset_intersection", "params": 2}}"#;
        let parsed: SemigroupRepr = serde_json::from_str(text).unwrap();
        let sg = parsed.to_semigroup().unwrap();
        assert_eq!(sg.len(), 4);
    }

    #[test]
    fn kernel_file_requires_all_pairs() {
        let t = Tower::new(vec![1]).unwrap();
        let id = LocalOperator::identity(&t);
        let file = KernelFile {
            points: vec!["a".into(), "b".into()],
            tower: TowerRepr::of(&t),
            entries: vec![KernelEntry {
                s: PointRef::Label("a".into()),
                t: PointRef::Label("b".into()),
                op: OperatorRepr::of(&id),
            }],
        };
        assert!(matches!(
            file.to_kernel(&tol()),
            Err(Error::KernelIncomplete)
        ));
    }

    #[test]
    fn function_file_round_trip() {
        let mut rng = sample::rng(91);
        let t = Tower::new(vec![1, 2]).unwrap();
        let phi = sample::lpdf_on_cyclic(&mut rng, 3, &t, 1);
        let file = FunctionFile::of(&phi);
        let text = serde_json::to_string(&file).unwrap();
        let parsed: FunctionFile = serde_json::from_str(&text).unwrap();
        let back = parsed.to_function(&tol()).unwrap();
        assert_eq!(back.semigroup(), phi.semigroup());
        for s in 0..3 {
            assert!(back.value(s).sub(phi.value(s)).unwrap().max_seminorm() < 1e-15);
        }
    }

    #[test]
    fn vector_repr_round_trip() {
        let t = Tower::new(vec![2]).unwrap();
        let v = LocalVector::new(
            &t,
            1,
            nalgebra::DVector::from_vec(vec![C64::new(1.0, -2.0), C64::new(0.0, 3.0)]),
        )
        .unwrap();
        let repr = VectorRepr::of(&v);
        let back = repr.to_vector(&t).unwrap();
        assert_eq!(back, v);
    }
}
