//! The serial-dependence test statistics and decision rule.
//!
//! `nlsd_statistic` is the portmanteau statistic
//! `T * sum_{h=1..H} Tr[ G(h) G(0)^{-1} G(h)' G(0)^{-1} ]`; under the null of
//! independence it is asymptotically chi-square with `p^2 H` degrees of
//! freedom, `p = N*K`. `srnlsd_statistic` replaces `G(0)` by its shrunk
//! version, which keeps the statistic computable (and the chi-square limit
//! intact as `p/T -> 0`) when `p` is large relative to `T`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SquareMatrix};
use crate::moments::{autocovariance_sequence, LagCovariance, MeanCorrection};
use crate::shrinkage::{lw_scalars, shrink_covariance, ShrunkCovariance};
use crate::transforms::{SeriesMatrix, TransformSpec};

/// Whether the lag-0 covariance is shrunk before inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shrinkage {
    #[default]
    LedoitWolf,
    None,
}

impl fmt::Display for Shrinkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shrinkage::LedoitWolf => write!(f, "lw"),
            Shrinkage::None => write!(f, "none"),
        }
    }
}

impl std::str::FromStr for Shrinkage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lw" | "ledoit-wolf" | "ledoitwolf" => Ok(Shrinkage::LedoitWolf),
            "none" => Ok(Shrinkage::None),
            other => Err(Error::InvalidConfig(format!(
                "unknown shrinkage '{other}' (expected lw or none)"
            ))),
        }
    }
}

impl fmt::Display for MeanCorrection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanCorrection::AsWritten => write!(f, "as-written"),
            MeanCorrection::GrandMean => write!(f, "grand-mean"),
        }
    }
}

impl std::str::FromStr for MeanCorrection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "as-written" | "aswritten" => Ok(MeanCorrection::AsWritten),
            "grand-mean" | "grandmean" => Ok(MeanCorrection::GrandMean),
            other => Err(Error::InvalidConfig(format!(
                "unknown mean correction '{other}' (expected as-written or grand-mean)"
            ))),
        }
    }
}

/// Full configuration of a test run.
#[derive(Debug, Clone)]
pub struct TestConfig {
    /// Maximum lag H >= 1.
    pub max_lag: usize,
    pub spec: TransformSpec,
    pub shrinkage: Shrinkage,
    /// Significance level in (0, 1).
    pub alpha: f64,
    pub mean_correction: MeanCorrection,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            max_lag: 1,
            spec: TransformSpec::powers(2).expect("static spec"),
            shrinkage: Shrinkage::LedoitWolf,
            alpha: 0.05,
            mean_correction: MeanCorrection::AsWritten,
        }
    }
}

impl TestConfig {
    fn validate(&self) -> Result<()> {
        if self.max_lag == 0 {
            return Err(Error::InvalidConfig("max lag H must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie strictly inside (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Echo of the configuration carried in every report (string-typed so the
/// JSON output is self-describing).
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConfigEcho {
    pub alpha: f64,
    pub lags: usize,
    pub mean_correction: String,
    pub shrinkage: String,
    pub transforms: String,
}

/// Outcome of a test run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub rho1: f64,
    pub rho2: f64,
    pub per_lag_traces: Vec<f64>,
    pub warnings: Vec<String>,
    pub config: ConfigEcho,
}

impl TestReport {
    /// JSON with alphabetically ordered keys (stable for diffing).
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        serde_json::to_string_pretty(&value).expect("value prints")
    }

    pub fn tsv_header() -> &'static str {
        "statistic\tdof\tp_value\tcritical_value\treject\trho1\trho2\tper_lag_traces"
    }

    /// One-line tab-separated form for batch runs; lag traces are
    /// semicolon-joined.
    pub fn to_tsv(&self) -> String {
        let traces: Vec<String> = self.per_lag_traces.iter().map(|v| v.to_string()).collect();
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.statistic,
            self.dof,
            self.p_value,
            self.critical_value,
            self.reject,
            self.rho1,
            self.rho2,
            traces.join(";")
        )
    }
}

// ---------------------------------------------------------------------------
// chi-square distribution kit
// ---------------------------------------------------------------------------

// Lanczos g = 7, n = 9 coefficients.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

fn ln_gamma(x: f64) -> f64 {
    // callers only need x >= 0.5 (x = dof/2), no reflection branch
    debug_assert!(x >= 0.5);
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

const GAMMA_TOL: f64 = 1e-14;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma P(a, x) by series expansion,
/// accurate for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    while n < GAMMA_MAX_ITER as f64 {
        term *= x / (a + n);
        sum += term;
        if term.abs() < sum.abs() * GAMMA_TOL {
            break;
        }
        n += 1.0;
    }
    sum * (a * x.ln() - x - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued
/// fraction, accurate for x >= a + 1.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut f = d;
    for i in 1..=GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        f *= delta;
        if (delta - 1.0).abs() < GAMMA_TOL {
            break;
        }
    }
    f * (a * x.ln() - x - ln_gamma(a)).exp()
}

fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// Chi-square CDF with `dof` degrees of freedom, `P(dof/2, x/2)`.
pub fn chi_square_cdf(x: f64, dof: usize) -> f64 {
    assert!(dof >= 1, "degrees of freedom must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    gamma_p(dof as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Upper tail probability `1 - CDF`, computed directly so extreme statistics
/// keep relative accuracy.
pub fn chi_square_survival(x: f64, dof: usize) -> f64 {
    assert!(dof >= 1, "degrees of freedom must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(dof as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Upper-`alpha` critical value: the x with `CDF(x) = 1 - alpha`, found by
/// bisection on the monotone CDF.
pub fn chi_square_critical(dof: usize, alpha: f64) -> f64 {
    assert!(dof >= 1, "degrees of freedom must be positive");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    let target = 1.0 - alpha;
    let mut lo = 0.0_f64;
    let mut hi = dof as f64 + 10.0 * (2.0 * dof as f64).sqrt() + 10.0;
    while chi_square_cdf(hi, dof) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_square_cdf(mid, dof) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// test statistics
// ---------------------------------------------------------------------------

/// `Tr[G W G' W]` accumulated as the squared entries of `U = L^{-1} G L^{-T}`
/// where `W = (L L')^{-1}`; exact nonnegativity falls out of the squared form.
fn whitened_trace(chol: &Cholesky, g: &SquareMatrix) -> f64 {
    let y = chol.forward_solve_matrix(g);
    let u_t = chol.forward_solve_matrix(&y.transposed());
    u_t.sum_sq()
}

fn weighted_statistic(
    lag0: &SquareMatrix,
    gammas: &[LagCovariance],
    sample_size: usize,
) -> Result<(f64, Vec<f64>)> {
    if gammas.len() < 2 {
        return Err(Error::InvalidConfig(
            "need the lag-0 matrix plus at least one positive lag".into(),
        ));
    }
    let chol = lag0.cholesky(lag0.default_pivot_tol())?;
    let traces: Vec<f64> = gammas[1..]
        .iter()
        .map(|g| whitened_trace(&chol, &g.matrix))
        .collect();
    let statistic = sample_size as f64 * traces.iter().sum::<f64>();
    Ok((statistic, traces))
}

/// Unregularized statistic from the autocovariances `gammas[0..=H]`.
pub fn nlsd_statistic(gammas: &[LagCovariance], sample_size: usize) -> Result<(f64, Vec<f64>)> {
    weighted_statistic(&gammas[0].matrix, gammas, sample_size)
}

/// Shrinkage-regularized statistic; `shrunk0` must be built from `gammas[0]`.
pub fn srnlsd_statistic(
    gammas: &[LagCovariance],
    shrunk0: &ShrunkCovariance,
    sample_size: usize,
) -> Result<(f64, Vec<f64>)> {
    if shrunk0.matrix.dim() != gammas[0].matrix.dim() {
        return Err(Error::DimensionMismatch {
            left: shrunk0.matrix.dim(),
            right: gammas[0].matrix.dim(),
        });
    }
    weighted_statistic(&shrunk0.matrix, gammas, sample_size)
}

/// Run the full pipeline on a raw `N x T` series: transform, demean,
/// autocovariances, optional shrinkage, statistic and decision.
pub fn run_test(x: &SeriesMatrix, config: &TestConfig) -> Result<TestReport> {
    config.validate()?;
    let t_len = x.cols();
    if config.max_lag >= t_len {
        return Err(Error::LagTooLarge {
            lag: config.max_lag,
            sample_size: t_len,
        });
    }

    let xa = x
        .apply_transforms(&config.spec)
        .map_err(|e| e.at_stage("transforms"))?
        .demean();
    let p = xa.rows();

    let mut warnings = Vec::new();
    if p as f64 / t_len as f64 > 0.1 {
        warnings.push(format!(
            "p/T = {}/{} exceeds 0.1; the chi-square approximation assumes p/T near 0",
            p, t_len
        ));
    }
    if t_len <= p {
        warnings.push(format!(
            "T = {} does not exceed p = {}; the unshrunk lag-0 covariance is singular",
            t_len, p
        ));
    }

    let gammas = autocovariance_sequence(&xa, config.max_lag, config.mean_correction)
        .map_err(|e| e.at_stage("moments"))?;

    let (statistic, per_lag_traces, rho1, rho2) = match config.shrinkage {
        Shrinkage::None => {
            let (s, tr) = nlsd_statistic(&gammas, t_len).map_err(|e| e.at_stage("statistic"))?;
            (s, tr, 0.0, 1.0)
        }
        Shrinkage::LedoitWolf => {
            let coeffs = lw_scalars(&xa, &gammas[0]).map_err(|e| e.at_stage("shrinkage"))?;
            let shrunk =
                shrink_covariance(&gammas[0], &coeffs).map_err(|e| e.at_stage("shrinkage"))?;
            let (s, tr) =
                srnlsd_statistic(&gammas, &shrunk, t_len).map_err(|e| e.at_stage("statistic"))?;
            (s, tr, coeffs.rho1, coeffs.rho2)
        }
    };

    let dof = p * p * config.max_lag;
    let p_value = chi_square_survival(statistic, dof);
    let critical_value = chi_square_critical(dof, config.alpha);
    Ok(TestReport {
        statistic,
        dof,
        p_value,
        critical_value,
        reject: statistic > critical_value,
        rho1,
        rho2,
        per_lag_traces,
        warnings,
        config: ConfigEcho {
            alpha: config.alpha,
            lags: config.max_lag,
            mean_correction: config.mean_correction.to_string(),
            shrinkage: config.shrinkage.to_string(),
            transforms: config.spec.to_string(),
        },
    })
}
