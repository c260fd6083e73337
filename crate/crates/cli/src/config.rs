//! Run configuration (TOML).
//!
//! ```toml
//! [scenario.grid1]            # grid2 defaults to grid1
//! n1 = 4
//! n2 = 4
//! w1 = 1.0                    # wavelengths
//! w2 = 1.0
//! kernel = "spherical"        # or "cylindrical"
//!
//! [scenario.budget1]          # budget2 defaults to budget1
//! snr_db = 10.0
//! inr_offset_db = 20.0        # or inr_db = 30.0
//!
//! [thresholds]                # bits/s/Hz
//! r1 = 0.5
//! r2 = 0.5
//!
//! [dor]
//! data_bits = 1000.0
//! band_hz = 1e6
//! t_ms = 1.0
//!
//! [mc]
//! trials = 100000             # 0 disables simulation
//! seed = 1
//!
//! [sweep]
//! variable = "avg_snr_db"     # or "rate_bits", "bandwidth_hz"
//! start = 0.0
//! stop = 30.0
//! points = 7
//!
//! [[case]]                    # optional, one output file each
//! label = "4x4 W=1"
//! grid = { n1 = 4, n2 = 4, w1 = 1.0, w2 = 1.0 }
//! ```

use serde::Deserialize;

use fama::copula::{MvnSettings, Tolerance};
use fama::geometry::{CorrelationKernel, PortGrid};
use fama::marginals::LinkBudget;
use fama::metrics::{DorConfig, DorVariant, InterferencePolicy, RateThresholds};
use fama::montecarlo::{McConfig, Sampler};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioCfg,
    #[serde(default)]
    pub thresholds: ThresholdsCfg,
    #[serde(default)]
    pub dor: DorCfg,
    #[serde(default)]
    pub mc: McCfg,
    #[serde(default)]
    pub copula: CopulaCfg,
    pub sweep: Option<SweepCfg>,
    #[serde(default, rename = "case")]
    pub cases: Vec<CaseCfg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioCfg {
    pub grid1: GridCfg,
    pub grid2: Option<GridCfg>,
    pub budget1: BudgetCfg,
    pub budget2: Option<BudgetCfg>,
    #[serde(default)]
    pub interference_policy: PolicyCfg,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub n1: usize,
    pub n2: usize,
    #[serde(default)]
    pub w1: f64,
    #[serde(default)]
    pub w2: f64,
    #[serde(default)]
    pub kernel: KernelCfg,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum KernelCfg {
    #[default]
    Spherical,
    Cylindrical,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PolicyCfg {
    #[default]
    Error,
    Warn,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetCfg {
    pub snr_db: f64,
    pub inr_db: Option<f64>,
    pub inr_offset_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsCfg {
    pub r1: f64,
    pub r2: f64,
}

impl Default for ThresholdsCfg {
    fn default() -> Self {
        ThresholdsCfg { r1: 0.5, r2: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DorCfg {
    pub data_bits: f64,
    pub data2_bits: Option<f64>,
    pub band_hz: f64,
    pub band2_hz: Option<f64>,
    pub band_sum_hz: Option<f64>,
    pub t_ms: f64,
    pub t2_ms: Option<f64>,
    pub t_sum_ms: Option<f64>,
    pub variant: VariantCfg,
}

impl Default for DorCfg {
    fn default() -> Self {
        DorCfg {
            data_bits: 1000.0,
            data2_bits: None,
            band_hz: 1e6,
            band2_hz: None,
            band_sum_hz: None,
            t_ms: 1.0,
            t2_ms: None,
            t_sum_ms: None,
            variant: VariantCfg::Derived,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantCfg {
    #[default]
    Derived,
    Theorem,
    Proof,
}

impl From<VariantCfg> for DorVariant {
    fn from(v: VariantCfg) -> Self {
        match v {
            VariantCfg::Derived => DorVariant::Derived,
            VariantCfg::Theorem => DorVariant::Theorem,
            VariantCfg::Proof => DorVariant::Proof,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McCfg {
    pub trials: u64,
    pub seed: u64,
    pub chunk: u64,
    pub sampler: SamplerCfg,
}

impl Default for McCfg {
    fn default() -> Self {
        McCfg {
            trials: 100_000,
            seed: 1,
            chunk: 1 << 14,
            sampler: SamplerCfg::Copula,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SamplerCfg {
    #[default]
    Copula,
    Physical,
}

impl From<SamplerCfg> for Sampler {
    fn from(s: SamplerCfg) -> Self {
        match s {
            SamplerCfg::Copula => Sampler::Copula,
            SamplerCfg::Physical => Sampler::Physical,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CopulaCfg {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub floor: f64,
    pub seed: u64,
}

impl Default for CopulaCfg {
    fn default() -> Self {
        CopulaCfg {
            abs_tol: 1e-4,
            rel_tol: 0.05,
            floor: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    AvgSnrDb,
    RateBits,
    BandwidthHz,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::AvgSnrDb => "avg_snr_db",
            SweepVariable::RateBits => "rate_bits",
            SweepVariable::BandwidthHz => "bandwidth_hz",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCfg {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub inr_rule: Option<InrRule>,
}

/// INR at each sweep point: a fixed value or an offset from the SNR, in dB.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InrRule {
    pub fixed_db: Option<f64>,
    pub offset_db: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseCfg {
    pub label: String,
    pub grid: Option<GridCfg>,
    pub grid1: Option<GridCfg>,
    pub grid2: Option<GridCfg>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub trials: Option<u64>,
    pub sampler: Option<SamplerCfg>,
    pub dor_variant: Option<VariantCfg>,
    pub policy: Option<PolicyCfg>,
}

/// How the INR of one budget is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inr {
    FixedDb(f64),
    OffsetDb(f64),
}

impl Inr {
    pub fn at(self, snr_db: f64) -> f64 {
        match self {
            Inr::FixedDb(v) => v,
            Inr::OffsetDb(o) => snr_db + o,
        }
    }
}

/// One receiver's budget in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSpec {
    pub snr_db: f64,
    pub inr: Inr,
}

/// A port-grid case with its output label.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: Option<String>,
    pub grids: [GridCfg; 2],
}

/// Sweep axis resolved to concrete points.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub inr_rule: Option<Inr>,
}

/// A config validated for shape, with overrides applied.
#[derive(Debug, Clone)]
pub struct Plan {
    pub cases: Vec<Case>,
    pub budgets: [BudgetSpec; 2],
    pub thresholds: ThresholdsCfg,
    pub dor: DorCfg,
    pub mc: McCfg,
    pub copula: CopulaCfg,
    pub policy: PolicyCfg,
    pub sweep: Sweep,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    toml::from_str(text).map_err(|e| schema(e.to_string().lines().collect::<Vec<_>>().join(" ")))
}

fn inr_of(b: &BudgetCfg, which: &str) -> Result<Inr, CliError> {
    match (b.inr_db, b.inr_offset_db) {
        (Some(v), None) => Ok(Inr::FixedDb(v)),
        (None, Some(o)) => Ok(Inr::OffsetDb(o)),
        _ => Err(schema(format!("scenario.{which}: exactly one of inr_db and inr_offset_db is required"))),
    }
}

impl Config {
    pub fn plan(&self, ov: &Overrides) -> Result<Plan, CliError> {
        let g1 = self.scenario.grid1;
        let g2 = self.scenario.grid2.unwrap_or(g1);
        let b1 = self.scenario.budget1;
        let b2 = self.scenario.budget2.unwrap_or(b1);
        let budgets = [
            BudgetSpec {
                snr_db: b1.snr_db,
                inr: inr_of(&b1, "budget1")?,
            },
            BudgetSpec {
                snr_db: b2.snr_db,
                inr: inr_of(&b2, "budget2")?,
            },
        ];

        let mut cases = Vec::new();
        let mut labels = std::collections::BTreeSet::new();
        for c in &self.cases {
            if c.label.trim().is_empty() {
                return Err(schema("case.label must not be empty"));
            }
            if !labels.insert(slug(&c.label)) {
                return Err(schema(format!("duplicate case label {:?}", c.label)));
            }
            let grids = match (c.grid, c.grid1, c.grid2) {
                (Some(g), None, None) => [g, g],
                (None, a, b) => [a.unwrap_or(g1), b.or(a).unwrap_or(g2)],
                _ => return Err(schema(format!("case {:?}: use either grid or grid1/grid2", c.label))),
            };
            cases.push(Case {
                label: Some(c.label.clone()),
                grids,
            });
        }
        if cases.is_empty() {
            cases.push(Case { label: None, grids: [g1, g2] });
        }

        let sweep = match &self.sweep {
            Some(s) => {
                if s.points < 2 {
                    return Err(schema("sweep.points must be at least 2"));
                }
                if !(s.start < s.stop) {
                    return Err(schema("sweep.start must be below sweep.stop"));
                }
                let inr_rule = match s.inr_rule {
                    None => None,
                    Some(InrRule {
                        fixed_db: Some(v),
                        offset_db: None,
                    }) => Some(Inr::FixedDb(v)),
                    Some(InrRule {
                        fixed_db: None,
                        offset_db: Some(o),
                    }) => Some(Inr::OffsetDb(o)),
                    Some(_) => return Err(schema("sweep.inr_rule: exactly one of fixed_db and offset_db is required")),
                };
                if inr_rule.is_some() && s.variable != SweepVariable::AvgSnrDb {
                    return Err(schema("sweep.inr_rule only applies to avg_snr_db sweeps"));
                }
                let step = (s.stop - s.start) / (s.points - 1) as f64;
                Sweep {
                    variable: s.variable,
                    values: (0..s.points).map(|i| s.start + i as f64 * step).collect(),
                    inr_rule,
                }
            }
            None => Sweep {
                variable: SweepVariable::AvgSnrDb,
                values: vec![budgets[0].snr_db],
                inr_rule: None,
            },
        };

        let mut mc = self.mc;
        let mut copula = self.copula;
        let mut dor = self.dor;
        if let Some(seed) = ov.seed {
            mc.seed = seed;
            copula.seed = seed;
        }
        if let Some(t) = ov.tol {
            copula.abs_tol = t;
        }
        if let Some(n) = ov.trials {
            mc.trials = n;
        }
        if let Some(s) = ov.sampler {
            mc.sampler = s;
        }
        if let Some(v) = ov.dor_variant {
            dor.variant = v;
        }
        if mc.chunk == 0 {
            return Err(schema("mc.chunk must be at least 1"));
        }
        if !(copula.abs_tol > 0.0 && copula.rel_tol >= 0.0 && copula.floor >= 0.0) {
            return Err(schema("copula tolerances must be positive (abs) and nonnegative (rel, floor)"));
        }
        Ok(Plan {
            cases,
            budgets,
            thresholds: self.thresholds,
            dor,
            mc,
            copula,
            policy: ov.policy.unwrap_or(self.scenario.interference_policy),
            sweep,
        })
    }
}

/// File-name-safe form of a case label.
pub fn slug(label: &str) -> String {
    label
        .trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

impl GridCfg {
    pub fn build(&self) -> Result<PortGrid, fama::Error> {
        let kernel = match self.kernel {
            KernelCfg::Spherical => CorrelationKernel::Spherical,
            KernelCfg::Cylindrical => CorrelationKernel::Cylindrical,
        };
        Ok(PortGrid::new(self.n1, self.n2, self.w1, self.w2)?.with_kernel(kernel))
    }
}

/// Everything needed to evaluate one sweep point.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub budgets: [(f64, f64); 2],
    pub thresholds: RateThresholds,
    pub dor: DorConfig,
}

impl Plan {
    pub fn policy(&self) -> InterferencePolicy {
        match self.policy {
            PolicyCfg::Error => InterferencePolicy::Error,
            PolicyCfg::Warn => InterferencePolicy::Warn,
        }
    }

    pub fn mvn(&self, index: usize) -> MvnSettings {
        MvnSettings::new(
            Tolerance::adaptive(self.copula.abs_tol, self.copula.rel_tol, self.copula.floor),
            self.copula.seed.wrapping_add(1000 * index as u64),
        )
    }

    pub fn mc_config(&self, index: usize) -> McConfig {
        McConfig::new(self.mc.trials, self.mc.seed.wrapping_add(index as u64))
            .with_chunk(self.mc.chunk)
            .with_sampler(self.mc.sampler.into())
    }

    /// Budgets (dB), thresholds and delivery settings at sweep value `x`.
    pub fn point(&self, x: f64) -> Result<Point, fama::Error> {
        let mut budgets = [(0.0, 0.0); 2];
        for (i, b) in self.budgets.iter().enumerate() {
            let (snr, inr) = match self.sweep.variable {
                SweepVariable::AvgSnrDb => (x, self.sweep.inr_rule.unwrap_or(b.inr).at(x)),
                _ => (b.snr_db, b.inr.at(b.snr_db)),
            };
            budgets[i] = (snr, inr);
        }
        let d = &self.dor;
        let (mut data1, mut data2) = (d.data_bits, d.data2_bits.unwrap_or(d.data_bits));
        let (mut band1, mut band2, mut band_sum) = (d.band_hz, d.band2_hz.unwrap_or(d.band_hz), d.band_sum_hz.unwrap_or(d.band_hz));
        let (t1, t2, tsum) = (
            d.t_ms * 1e-3,
            d.t2_ms.unwrap_or(d.t_ms) * 1e-3,
            d.t_sum_ms.unwrap_or(d.t_ms) * 1e-3,
        );
        let mut th = (self.thresholds.r1, self.thresholds.r2);
        match self.sweep.variable {
            SweepVariable::RateBits => {
                // one rate drives both the outage thresholds and the delivery sizes
                th = (x, x);
                data1 = x * band1 * t1;
                data2 = x * band2 * t2;
            }
            SweepVariable::BandwidthHz => {
                band1 = x;
                band2 = x;
                band_sum = x;
            }
            SweepVariable::AvgSnrDb => {}
        }
        Ok(Point {
            budgets,
            thresholds: RateThresholds::new(th.0, th.1)?,
            dor: DorConfig::new(data1, data2, band1, band2, band_sum, t1, t2, tsum)?.with_variant(d.variant.into()),
        })
    }
}

impl Point {
    pub fn link_budgets(&self) -> Result<[LinkBudget; 2], fama::Error> {
        Ok([
            LinkBudget::from_db(self.budgets[0].0, self.budgets[0].1)?,
            LinkBudget::from_db(self.budgets[1].0, self.budgets[1].1)?,
        ])
    }
}
