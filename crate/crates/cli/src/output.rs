//! Construction files emitted by the building verbs. Each one doubles as
//! a valid input for the matching check verb: a dilation file parses as a
//! function file (the representation), a measure dilation as a measure
//! file (the projections), a unitary dilation as an operator file (the
//! unitary), with the extra fields ignored on re-parse.

use serde::Serialize;

use locdil::contraction::UnitaryDilationCertificate;
use locdil::dilation::{DilationCertificate, RhoDilationCertificate};
use locdil::kernel::KernelCertificate;
use locdil::measure::NaimarkCertificate;
use locdil::schema::{MatrixRepr, OperatorRepr, SemigroupRepr, TowerRepr};
use locdil::{DilationResult, RhoDilation, Rklhs, SpectralDilation, UnitaryDilation};

#[derive(Debug, Serialize)]
pub struct RklhsFile {
    #[serde(rename = "dims_K")]
    pub dims_k: Vec<usize>,
    pub base_tower: TowerRepr,
    pub point_maps: Vec<OperatorRepr>,
    pub reconstruction_residual: f64,
    pub certificate: KernelCertificate,
}

impl RklhsFile {
    pub fn of(space: &Rklhs, certificate: KernelCertificate) -> Self {
        RklhsFile {
            dims_k: space.dilation_tower().dims().to_vec(),
            base_tower: TowerRepr::of(space.base_tower()),
            point_maps: space.point_maps().iter().map(OperatorRepr::of).collect(),
            reconstruction_residual: space.reconstruction_residual(),
            certificate,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DilationFile {
    pub semigroup: SemigroupRepr,
    pub tower: TowerRepr,
    pub values: Vec<OperatorRepr>,
    pub base_tower: TowerRepr,
    pub embedding: OperatorRepr,
    pub certificate: DilationCertificate,
}

impl DilationFile {
    pub fn of(d: &DilationResult, semigroup: SemigroupRepr) -> Self {
        DilationFile {
            semigroup,
            tower: TowerRepr::of(d.dilation_tower()),
            values: d.representations().iter().map(OperatorRepr::of).collect(),
            base_tower: TowerRepr::of(d.rklhs.base_tower()),
            embedding: OperatorRepr::of(&d.embedding),
            certificate: d.certificate.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RhoDilationFile {
    pub rho: f64,
    pub semigroup: SemigroupRepr,
    pub tower: TowerRepr,
    pub values: Vec<OperatorRepr>,
    pub base_tower: TowerRepr,
    pub embedding: OperatorRepr,
    pub certificate: RhoDilationCertificate,
}

impl RhoDilationFile {
    pub fn of(d: &RhoDilation, semigroup: SemigroupRepr) -> Self {
        RhoDilationFile {
            rho: d.certificate.rho,
            semigroup,
            tower: TowerRepr::of(d.result.dilation_tower()),
            values: d
                .result
                .representations()
                .iter()
                .map(OperatorRepr::of)
                .collect(),
            base_tower: TowerRepr::of(d.result.rklhs.base_tower()),
            embedding: OperatorRepr::of(&d.result.embedding),
            certificate: d.certificate.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NaimarkFile {
    pub atoms: Vec<OperatorRepr>,
    pub base_tower: TowerRepr,
    pub embedding: OperatorRepr,
    pub certificate: NaimarkCertificate,
}

impl NaimarkFile {
    pub fn of(d: &SpectralDilation, base: &locdil::Tower) -> Self {
        NaimarkFile {
            atoms: d.projections.iter().map(OperatorRepr::of).collect(),
            base_tower: TowerRepr::of(base),
            embedding: OperatorRepr::of(&d.embedding),
            certificate: d.certificate.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct UnitaryDilationFile {
    pub source: TowerRepr,
    pub target: TowerRepr,
    pub blocks: Vec<MatrixRepr>,
    pub horizon: usize,
    pub base_tower: TowerRepr,
    pub embedding: OperatorRepr,
    pub certificate: UnitaryDilationCertificate,
}

impl UnitaryDilationFile {
    pub fn of(d: &UnitaryDilation, base: &locdil::Tower) -> Self {
        UnitaryDilationFile {
            source: TowerRepr::of(&d.dilation_tower),
            target: TowerRepr::of(&d.dilation_tower),
            blocks: d.unitary.blocks().iter().map(MatrixRepr::of).collect(),
            horizon: d.horizon,
            base_tower: TowerRepr::of(base),
            embedding: OperatorRepr::of(&d.embedding),
            certificate: d.certificate.clone(),
        }
    }
}

/// Report written by `check-operator`.
#[derive(Debug, Serialize)]
pub struct OperatorReport {
    pub source: TowerRepr,
    pub target: TowerRepr,
    pub square: bool,
    pub flags: Vec<&'static str>,
    pub seminorms: Vec<f64>,
    pub tolerances: locdil::Tolerances,
}
