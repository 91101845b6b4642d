//! The JSON report every command writes.

use std::collections::BTreeMap;

use ergm_core::model::RegionReport;
use ergm_core::stats::RateFit;
use ergm_core::ErgmParams;
use serde::{Deserialize, Serialize};

/// An empirical quantity. Exact computations carry a zero standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub standard_error: f64,
}

impl Measured {
    pub fn new(value: f64, standard_error: f64) -> Self {
        Measured { value, standard_error }
    }

    pub fn exact(value: f64) -> Self {
        Measured { value, standard_error: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEcho {
    pub beta: f64,
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub terms: Vec<TermEcho>,
}

impl ParamsEcho {
    pub fn new(params: &ErgmParams) -> Self {
        ParamsEcho {
            terms: params
                .terms()
                .iter()
                .map(|t| TermEcho {
                    beta: t.beta,
                    vertices: t.graph.vertex_count(),
                    edges: t.graph.edges().iter().map(|&(a, b)| [a, b]).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionEcho {
    pub p: Option<f64>,
    pub classification: String,
    pub phi_prime_at_p: f64,
    pub big_phi_prime_at_one: f64,
    pub root_count_on_grid: usize,
    pub roots: Vec<f64>,
}

impl From<&RegionReport> for RegionEcho {
    fn from(r: &RegionReport) -> Self {
        RegionEcho {
            p: r.p,
            classification: r.classification.to_string(),
            phi_prime_at_p: r.phi_prime_at_p,
            big_phi_prime_at_one: r.big_phi_prime_at_one,
            root_count_on_grid: r.root_count_on_grid,
            roots: r.roots.clone(),
        }
    }
}

/// Values for one vertex count.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub theory: BTreeMap<String, f64>,
    pub empirical: BTreeMap<String, Measured>,
}

impl Row {
    pub fn new(n: usize) -> Self {
        Row { n, ..Default::default() }
    }

    pub fn theory(&mut self, key: &str, value: f64) -> &mut Self {
        self.theory.insert(key.to_string(), value);
        self
    }

    pub fn empirical(&mut self, key: &str, value: Measured) -> &mut Self {
        self.empirical.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEcho {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_standard_error: f64,
    /// Exponent the fit is compared with, if any.
    pub reference_slope: Option<f64>,
    pub points: Vec<[f64; 2]>,
}

impl FitEcho {
    pub fn new(name: &str, fit: &RateFit, reference_slope: Option<f64>, points: &[(f64, f64)]) -> Self {
        FitEcho {
            name: name.to_string(),
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            slope_standard_error: fit.slope_standard_error,
            reference_slope,
            points: points.iter().map(|&(x, y)| [x, y]).collect(),
        }
    }
}

/// A pass/fail flag together with the threshold it was judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// For interval checks, the lower end; otherwise absent.
    pub lower: Option<f64>,
    pub relation: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            lower: None,
            relation: "<".into(),
            passed: value < threshold,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            lower: None,
            relation: "<=".into(),
            passed: value <= threshold,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold: upper,
            lower: Some(lower),
            relation: "in".into(),
            passed: (lower..=upper).contains(&value),
        }
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        match self.lower {
            Some(lo) => format!("{verdict} {}: {} in [{lo}, {}]", self.name, self.value, self.threshold),
            None => format!("{verdict} {}: {} {} {}", self.name, self.value, self.relation, self.threshold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Set when the theoretical values come from an unproven formula.
    pub conjecture: bool,
    pub seed: u64,
    pub config_sha256: String,
    pub params: ParamsEcho,
    pub region: Option<RegionEcho>,
    pub rows: Vec<Row>,
    pub rate_fits: Vec<FitEcho>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, config_sha256: &str, params: &ErgmParams) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            conjecture: false,
            seed,
            config_sha256: config_sha256.to_string(),
            params: ParamsEcho::new(params),
            region: None,
            rows: Vec::new(),
            rate_fits: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn row(&self, n: usize) -> Option<&Row> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
