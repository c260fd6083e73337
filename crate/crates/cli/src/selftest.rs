//! Fixed-answer checks over the core library.

use fama::copula::{max_cdf_at_level, mvn_cdf, MvnSettings, Tolerance};
use fama::geometry::{CorrelationMatrix, PortGrid};
use fama::marginals::{exp_cdf, hypoexp_cdf, LinkBudget};
use fama::metrics::{expected_max_heuristic, harmonic, outage_probability, RateThresholds, Scenario};
use fama::special::{bivariate_normal_cdf, std_normal_cdf, std_normal_quantile};
use fama::Result;

pub struct Check {
    pub name: &'static str,
    pub expected: f64,
    pub got: Result<f64>,
    pub tol: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        matches!(self.got, Ok(v) if (v - self.expected).abs() <= self.tol)
    }
}

fn check(name: &'static str, expected: f64, tol: f64, got: Result<f64>) -> Check {
    Check {
        name,
        expected,
        got,
        tol,
    }
}

pub fn checks() -> Vec<Check> {
    let s = MvnSettings::new(Tolerance::absolute(1e-5), 1);
    let rho = |r: f64| CorrelationMatrix::from_entries(2, vec![1.0, r, r, 1.0]);
    vec![
        check("normal cdf at 0", 0.5, 1e-15, Ok(std_normal_cdf(0.0))),
        check("normal quantile at 0.975", 1.959963984540054, 1e-9, std_normal_quantile(0.975)),
        check("bivariate orthant, rho = 0.5", 1.0 / 3.0, 1e-12, bivariate_normal_cdf(0.0, 0.0, 0.5)),
        check(
            "mvn total mass",
            1.0,
            0.0,
            mvn_cdf(&[f64::INFINITY; 3], &CorrelationMatrix::identity(3), &s).map(|e| e.get()),
        ),
        check(
            "mvn independent orthant, n = 3",
            0.125,
            1e-5,
            mvn_cdf(&[0.0; 3], &CorrelationMatrix::identity(3), &s).map(|e| e.get()),
        ),
        check(
            "mvn orthant, rho = 0.5",
            1.0 / 3.0,
            1e-4,
            rho(0.5).and_then(|r| mvn_cdf(&[0.0, 0.0], &r, &s)).map(|e| e.get()),
        ),
        check(
            "max cdf, R = I, n = 4, u = 0.5",
            0.0625,
            1e-5,
            max_cdf_at_level(0.5, &CorrelationMatrix::identity(4), &s).map(|e| e.get()),
        ),
        check("exponential cdf at the mean", 1.0 - (-1.0f64).exp(), 1e-15, exp_cdf(2.0, 2.0)),
        check(
            "hypoexponential cdf, equal means",
            1.0 - 2.0 * (-1.0f64).exp(),
            1e-12,
            hypoexp_cdf(1.0, 1.0, 1.0),
        ),
        check(
            "port grid 1x1 is one port",
            1.0,
            0.0,
            Ok(PortGrid::fixed().len() as f64),
        ),
        check(
            "expected max, R = I, n = 9",
            harmonic(9),
            1e-12,
            expected_max_heuristic(1.0, &CorrelationMatrix::identity(9)),
        ),
        check("single-antenna outage, 10 dB / 30 dB, 0.5 + 0.5 bits", 0.0795931, 5e-7, tas_op()),
    ]
}

fn tas_op() -> Result<f64> {
    let b = LinkBudget::from_db(10.0, 30.0)?;
    let s = Scenario::symmetric(PortGrid::fixed(), b)?;
    Ok(outage_probability(&s, &RateThresholds::new(0.5, 0.5)?)?.value)
}

/// Prints the table and reports whether every check passed.
pub fn run() -> bool {
    let mut all = true;
    for c in checks() {
        let pass = c.pass();
        all &= pass;
        let got = match &c.got {
            Ok(v) => format!("{v:.10}"),
            Err(e) => format!("error: {e}"),
        };
        println!(
            "{}\t{}\texpected {:.10}\tgot {got}",
            if pass { "pass" } else { "FAIL" },
            c.name,
            c.expected
        );
    }
    all
}
