//! Evaluation of one case over its sweep points.

use rayon::prelude::*;

use fama::copula::MAX_DIM;
use fama::geometry::PortGrid;
use fama::metrics::{
    dor, dor_asymptotic, ergodic_capacity, ergodic_capacity_asymptotic, expected_max_heuristic,
    instantaneous_capacity_region, outage_probability, outage_probability_asymptotic, ErgodicCapacity, MetricEstimate,
    Scenario,
};
use fama::montecarlo::{estimate_dor, estimate_ec, estimate_op, simulate, McEstimate};

use crate::config::{Case, Plan};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Op,
    Dor,
    Ec,
    Region,
    Mc,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Op => "op",
            Command::Dor => "dor",
            Command::Ec => "ec",
            Command::Region => "region",
            Command::Mc => "mc",
            Command::Sweep => "sweep",
        }
    }

    /// Commands that evaluate closed forms and so need the MVN integrator.
    fn analytic(self) -> bool {
        !matches!(self, Command::Mc)
    }
}

/// One output line.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_value: f64,
    pub metric: &'static str,
    pub variant: &'static str,
    pub value: f64,
    pub err: f64,
    pub trials: u64,
    pub receiver: &'static str,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub rows: Vec<Row>,
    pub jitter: [f64; 2],
    pub weak_interference_trials: u64,
}

struct PointResult {
    rows: Vec<Row>,
    jitter: [f64; 2],
    weak: u64,
}

pub fn run_case(plan: &Plan, case: &Case, cmd: Command) -> Result<CaseResult, CliError> {
    let grids = [
        case.grids[0].build().map_err(CliError::scenario)?,
        case.grids[1].build().map_err(CliError::scenario)?,
    ];
    if cmd.analytic() {
        for (i, g) in grids.iter().enumerate() {
            if g.len() > MAX_DIM {
                return Err(CliError::Scenario(format!(
                    "receiver {} has {} ports, above the multivariate normal cap of {MAX_DIM}",
                    i + 1,
                    g.len()
                )));
            }
        }
    }
    let points: Vec<PointResult> = plan
        .sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &x)| eval_point(plan, &grids, cmd, i, x))
        .collect::<Result<_, _>>()?;
    let mut out = CaseResult {
        rows: Vec::new(),
        jitter: [0.0; 2],
        weak_interference_trials: 0,
    };
    for p in points {
        out.rows.extend(p.rows);
        out.jitter = [out.jitter[0].max(p.jitter[0]), out.jitter[1].max(p.jitter[1])];
        out.weak_interference_trials += p.weak;
    }
    Ok(out)
}

fn metric_row(x: f64, metric: &'static str, variant: &'static str, receiver: &'static str, m: MetricEstimate) -> Row {
    Row {
        sweep_value: x,
        metric,
        variant,
        value: m.value,
        err: m.error,
        trials: 0,
        receiver,
    }
}

fn mc_row(x: f64, metric: &'static str, receiver: &'static str, m: &McEstimate) -> Row {
    Row {
        sweep_value: x,
        metric,
        variant: "mc",
        value: m.value,
        err: m.stderr,
        trials: m.trials,
        receiver,
    }
}

fn ec_rows(x: f64, variant: &'static str, c: ErgodicCapacity) -> [Row; 3] {
    let exact = |v| MetricEstimate { value: v, error: 0.0 };
    [
        metric_row(x, "ec", variant, "1", exact(c.c1)),
        metric_row(x, "ec", variant, "2", exact(c.c2)),
        metric_row(x, "ec", variant, "sum", exact(c.csum)),
    ]
}

/// Output contract: finite values, probabilities in [0, 1], capacities >= 0.
fn check_rows(rows: &[Row]) -> Result<(), CliError> {
    for r in rows {
        let ok = match r.metric {
            _ if !(r.value.is_finite() && r.err.is_finite()) => false,
            "op" | "dor" | "weak_interference" => (0.0..=1.0).contains(&r.value),
            _ => r.value >= 0.0,
        };
        if !ok {
            return Err(CliError::Numeric(format!(
                "{} {} receiver {} = {} at sweep value {}",
                r.metric, r.variant, r.receiver, r.value, r.sweep_value
            )));
        }
    }
    Ok(())
}

fn eval_point(plan: &Plan, grids: &[PortGrid; 2], cmd: Command, index: usize, x: f64) -> Result<PointResult, CliError> {
    let p = plan.point(x).map_err(CliError::scenario)?;
    let [b1, b2] = p.link_budgets().map_err(CliError::scenario)?;
    let s = Scenario::with_policy(grids[0], grids[1], b1, b2, plan.policy())
        .map_err(CliError::scenario)?
        .with_mvn(plan.mvn(index));
    let mc = plan.mc_config(index);
    let simulate_too = plan.mc.trials > 0;
    let num = CliError::numeric;
    let mut rows = Vec::new();
    let mut weak = 0;

    if matches!(cmd, Command::Op | Command::Sweep) {
        rows.push(metric_row(x, "op", "analytic", "system", outage_probability(&s, &p.thresholds).map_err(num)?));
        rows.push(metric_row(
            x,
            "op",
            "asymptotic",
            "system",
            outage_probability_asymptotic(&s, &p.thresholds).map_err(num)?,
        ));
    }
    if matches!(cmd, Command::Dor | Command::Sweep) {
        rows.push(metric_row(x, "dor", "analytic", "system", dor(&s, &p.dor).map_err(num)?));
        rows.push(metric_row(x, "dor", "asymptotic", "system", dor_asymptotic(&s, &p.dor).map_err(num)?));
    }
    if matches!(cmd, Command::Ec | Command::Sweep) {
        rows.extend(ec_rows(x, "analytic", ergodic_capacity(&s).map_err(num)?));
        // log2(x) goes negative below x = 1, where the high-SNR form has no meaning
        let mut c = ergodic_capacity_asymptotic(&s).map_err(num)?;
        c.c1 = c.c1.max(0.0);
        c.c2 = c.c2.max(0.0);
        c.csum = c.csum.max(0.0);
        rows.extend(ec_rows(x, "asymptotic", c));
    }
    if cmd == Command::Region {
        // region spanned by the heuristic expected best-port gains
        let mut g = [0.0; 2];
        let mut k = [0.0; 2];
        for i in 0..2 {
            let b = s.budget(i + 1);
            g[i] = expected_max_heuristic(b.avg_snr(), s.corr(i + 1)).map_err(num)?;
            k[i] = expected_max_heuristic(b.avg_sum(), s.corr(i + 1)).map_err(num)?;
        }
        let r = instantaneous_capacity_region(g[0], g[1], k[0], k[1]).map_err(num)?;
        let exact = |v| MetricEstimate { value: v, error: 0.0 };
        rows.push(metric_row(x, "region_c1", "analytic", "1", exact(r.c1_max)));
        rows.push(metric_row(x, "region_c2", "analytic", "2", exact(r.c2_max)));
        rows.push(metric_row(x, "region_csum", "analytic", "sum", exact(r.csum_max)));
    }

    if simulate_too {
        match cmd {
            Command::Op => rows.push(mc_row(x, "op", "system", &estimate_op(&s, &p.thresholds, &mc).map_err(num)?)),
            Command::Dor => rows.push(mc_row(x, "dor", "system", &estimate_dor(&s, &p.dor, &mc).map_err(num)?)),
            Command::Ec => {
                let e = estimate_ec(&s, &mc).map_err(num)?;
                rows.push(mc_row(x, "ec", "1", &e[0]));
                rows.push(mc_row(x, "ec", "2", &e[1]));
                rows.push(mc_row(x, "ec", "sum", &e[2]));
            }
            Command::Mc | Command::Sweep => {
                let r = simulate(&s, &p.thresholds, &p.dor, &mc).map_err(num)?;
                rows.push(mc_row(x, "op", "system", &r.op));
                rows.push(mc_row(x, "dor", "system", &r.dor));
                rows.push(mc_row(x, "ec", "1", &r.ec[0]));
                rows.push(mc_row(x, "ec", "2", &r.ec[1]));
                rows.push(mc_row(x, "ec", "sum", &r.ec[2]));
                let frac = McEstimate::proportion(r.weak_interference_trials, mc.trials);
                rows.push(mc_row(x, "weak_interference", "system", &frac));
                weak = r.weak_interference_trials;
            }
            Command::Region => {}
        }
    }
    check_rows(&rows)?;
    Ok(PointResult {
        rows,
        jitter: [s.corr(1).jitter(), s.corr(2).jitter()],
        weak,
    })
}
