//! Non-mutating configuration diagnostics.

use std::fmt;

use fama::copula::MAX_DIM;
use fama::metrics::heuristic_factor;

use crate::config::{GridCfg, Plan, PolicyCfg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Info => "info",
            Level::Warning => "warning",
            Level::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub level: Level,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.level, self.code, self.message)
    }
}

fn diag(level: Level, code: &'static str, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        level,
        code,
        message: message.into(),
    }
}

fn check_grid(out: &mut Vec<Diagnostic>, case: &str, receiver: usize, g: &GridCfg) {
    let at = format!("{case}receiver {receiver}");
    if (g.n1 == 1 && g.w1 > 0.0) || (g.n2 == 1 && g.w2 > 0.0) {
        out.push(diag(
            Level::Warning,
            "aperture_ignored",
            format!("{at}: aperture ignored for single port axis ({}x{}, W={}x{})", g.n1, g.n2, g.w1, g.w2),
        ));
    }
    let grid = match g.build() {
        Ok(grid) => grid,
        Err(e) => {
            out.push(diag(Level::Error, "invalid_grid", format!("{at}: {e}")));
            return;
        }
    };
    if grid.len() > MAX_DIM {
        out.push(diag(
            Level::Error,
            "dimension_cap",
            format!("{at}: MVN dimension {} > cap {MAX_DIM}", grid.len()),
        ));
        return;
    }
    match grid.correlation_matrix() {
        Ok(r) => {
            if r.jitter() > 0.0 {
                out.push(diag(
                    Level::Info,
                    "jitter",
                    format!("{at}: correlation matrix factored with diagonal jitter {:e}", r.jitter()),
                ));
            }
            let factor = heuristic_factor(r.dim(), r.average_dependence());
            if !(factor > 0.0) {
                out.push(diag(
                    Level::Error,
                    "heuristic_range",
                    format!("{at}: expected-maximum correction factor {factor} <= 0"),
                ));
            }
        }
        Err(e) => out.push(diag(Level::Error, "degenerate_geometry", format!("{at}: {e}"))),
    }
}

pub fn validate(plan: &Plan) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for case in &plan.cases {
        let prefix = case.label.as_ref().map(|l| format!("case {l:?}, ")).unwrap_or_default();
        for (i, g) in case.grids.iter().enumerate() {
            check_grid(&mut out, &prefix, i + 1, g);
        }
    }

    let level = match plan.policy {
        PolicyCfg::Error => Level::Error,
        PolicyCfg::Warn => Level::Warning,
    };
    for &x in &plan.sweep.values {
        let p = match plan.point(x) {
            Ok(p) => p,
            Err(e) => {
                out.push(diag(Level::Error, "invalid_point", format!("sweep value {x}: {e}")));
                continue;
            }
        };
        for (i, &(snr, inr)) in p.budgets.iter().enumerate() {
            if inr <= snr {
                out.push(diag(
                    level,
                    "strong_interference",
                    format!(
                        "strong-interference violated at receiver {} (SNR {snr} dB, INR {inr} dB) at sweep value {x}",
                        i + 1
                    ),
                ));
            }
        }
    }
    if plan.mc.trials == 0 {
        out.push(diag(Level::Info, "mc_disabled", "mc.trials = 0, simulation rows are skipped"));
    }
    if plan.dor.variant != crate::config::VariantCfg::Derived {
        out.push(diag(
            Level::Info,
            "dor_variant",
            format!("sum-rate delivery threshold uses the {:?} variant", plan.dor.variant),
        ));
    }
    out
}
