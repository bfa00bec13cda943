//! Human-readable summaries for `--format text`.

use locdil::contraction::{RhoCheckCertificate, RhoVerdict, RhoWitness, UnitaryDilationCertificate};
use locdil::dilation::{DilationCertificate, RhoDilationCertificate};
use locdil::kernel::KernelCertificate;
use locdil::measure::NaimarkCertificate;

use crate::output::{OperatorReport, RklhsFile};

pub fn operator(report: &OperatorReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "operator {:?} -> {:?} ({})\n",
        report.source.dims,
        report.target.dims,
        if report.square { "square" } else { "rectangular" }
    ));
    out.push_str(&format!("seminorms: {:?}\n", report.seminorms));
    if report.flags.is_empty() {
        out.push_str("flags: (none)");
    } else {
        out.push_str(&format!("flags: {}", report.flags.join(", ")));
    }
    out
}

pub fn kernel(cert: &KernelCertificate) -> String {
    let mut out = String::new();
    if !cert.candidate {
        out.push_str(&format!(
            "not a kernel candidate: hermitian defect {:.3e}",
            cert.hermitian_defect
        ));
        if let Some((s, t)) = cert.hermitian_pair {
            out.push_str(&format!(" at pair ({s},{t})"));
        }
        return out;
    }
    out.push_str(if cert.ok {
        "positive definite at every level\n"
    } else {
        "NOT positive definite\n"
    });
    for l in &cert.levels {
        out.push_str(&format!(
            "  level {}: size {}, min eig {:.6e}, max |eig| {:.6e} [{}]\n",
            l.level,
            l.size,
            l.min_eig,
            l.max_abs_eig,
            if l.ok { "ok" } else { "indefinite" }
        ));
    }
    if let Some(w) = &cert.witness {
        out.push_str(&format!(
            "witness: level {}, eigenvalue {:.6e}",
            w.level, w.eigenvalue
        ));
    }
    out.trim_end().to_string()
}

pub fn rklhs(file: &RklhsFile) -> String {
    format!(
        "reproducing space dims {:?} over base {:?}\nreconstruction residual {:.3e}",
        file.dims_k, file.base_tower.dims, file.reconstruction_residual
    )
}

pub fn dilation(cert: &DilationCertificate) -> String {
    let mut out = format!(
        "dilation space dims {:?} (minimal: {})\n",
        cert.dims_k, cert.minimal
    );
    out.push_str(&format!(
        "residuals: dilation {:.3e}, representation {:.3e}, isometry {:.3e}\n",
        cert.residuals.dilation, cert.residuals.representation, cert.residuals.isometry
    ));
    out.push_str(&format!("norm bounds hold: {}", cert.norm_bound_ok));
    if let Some(u) = cert.unitary_representation {
        out.push_str(&format!("\nunitary representation: {u}"));
    }
    out
}

pub fn rho_dilation(cert: &RhoDilationCertificate) -> String {
    format!(
        "rho = {}: compression residual {:.3e}\n{}",
        cert.rho,
        cert.compression,
        dilation(&cert.dilation)
    )
}

pub fn naimark(cert: &NaimarkCertificate) -> String {
    format!(
        "projection-valued dilation dims {:?} (minimal: {})\nresiduals: compression {:.3e}, orthogonality {:.3e}, sum {:.3e}, isometry {:.3e}",
        cert.dims_k,
        cert.minimal,
        cert.residuals.compression,
        cert.residuals.orthogonality,
        cert.residuals.sum_identity,
        cert.residuals.isometry
    )
}

pub fn unitary(cert: &UnitaryDilationCertificate) -> String {
    format!(
        "unitary dilation at horizon {}: dims {:?}\nunitary residual {:.3e}, max power residual {:.3e}\nminimal ranks per level {:?}",
        cert.horizon, cert.dims_k, cert.residuals.unitary, cert.residuals.power_max, cert.minimal_rank
    )
}

pub fn rho_check(cert: &RhoCheckCertificate) -> String {
    let mut out = format!("rho = {}, window = {}: ", cert.rho, cert.window);
    match &cert.verdict {
        RhoVerdict::ConsistentAtWindow { window } => {
            out.push_str(&format!(
                "consistent with a rho-dilation at window {window} (not a proof)"
            ));
        }
        RhoVerdict::NoWithWitness { witness } => match witness {
            RhoWitness::Window {
                level, eigenvalue, ..
            } => {
                out.push_str(&format!(
                    "certified NO: windowed form indefinite at level {level} (eigenvalue {eigenvalue:.6e})"
                ));
            }
            RhoWitness::Polynomial {
                level, lhs, bound, ..
            } => {
                out.push_str(&format!(
                    "certified NO: polynomial bound violated at level {level} ({lhs:.6e} > {bound:.6e})"
                ));
            }
        },
    }
    out.push_str(&format!(
        "\npolynomial sampling: {} trials, max margin {:.3e}",
        cert.polynomial.trials, cert.polynomial.max_margin
    ));
    out
}
