//! Monte Carlo harness for the empirical-size experiments: grids over
//! (T, N) or (T, K) with unit-variance Student-t innovations, reporting
//! rejection rates for both the unshrunk and the shrunk statistic.
//!
//! Reproducibility contract: every replication draws its data from a seed
//! derived with [`derive_seed`] from the master seed, the cell indices, the
//! degrees of freedom bits and the replication index. Counts are reduced by
//! integer addition, so results are identical for any worker count and
//! scheduling order.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StudentT};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{autocovariance_sequence, MeanCorrection};
use crate::shrinkage::{lw_scalars, shrink_covariance};
use crate::testkit::{chi_square_critical, nlsd_statistic, srnlsd_statistic};
use crate::transforms::{SeriesMatrix, TransformSpec};

/// Stateless 64-bit mixer (the SplitMix64 finalizer). Published so results
/// can be reproduced bit-exactly outside this crate.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold the words into the master seed: start from `splitmix64(master)` and
/// absorb each word `w` as `state = splitmix64(state ^ w)`.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(master), |state, &w| splitmix64(state ^ w))
}

/// Seed for one replication of one grid cell.
pub fn replication_seed(
    master: u64,
    t_index: usize,
    axis2_index: usize,
    df: f64,
    rep: usize,
) -> u64 {
    derive_seed(
        master,
        &[t_index as u64, axis2_index as u64, df.to_bits(), rep as u64],
    )
}

/// Which dimension the second grid axis varies, plus the held-fixed value of
/// the other one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Axis2 {
    /// Vary the number of raw series N; the number of transforms is fixed.
    VaryN { values: Vec<usize>, k_fixed: usize },
    /// Vary the number of transforms K (powers `1..=K`); N is fixed.
    VaryK { values: Vec<usize>, n_fixed: usize },
}

impl Axis2 {
    pub fn name(&self) -> &'static str {
        match self {
            Axis2::VaryN { .. } => "N",
            Axis2::VaryK { .. } => "K",
        }
    }

    pub fn values(&self) -> &[usize] {
        match self {
            Axis2::VaryN { values, .. } | Axis2::VaryK { values, .. } => values,
        }
    }

    /// (N, K) for the cell at `index`.
    pub fn cell_dims(&self, index: usize) -> (usize, usize) {
        match self {
            Axis2::VaryN { values, k_fixed } => (values[index], *k_fixed),
            Axis2::VaryK { values, n_fixed } => (*n_fixed, values[index]),
        }
    }
}

/// One empirical-size experiment: a (T, N-or-K) grid at a single Student-t
/// degrees of freedom.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentGrid {
    pub t_values: Vec<usize>,
    pub axis2: Axis2,
    /// Student-t degrees of freedom, must exceed 2.
    pub df: f64,
    pub max_lag: usize,
    pub replications: usize,
    pub alpha: f64,
    pub master_seed: u64,
}

impl ExperimentGrid {
    fn validate(&self) -> Result<()> {
        // negated form on purpose: NaN must also be rejected
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.df > 2.0) {
            return Err(Error::InvalidDf { df: self.df });
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if self.t_values.is_empty() || self.axis2.values().is_empty() {
            return Err(Error::InvalidConfig("grid axes must be non-empty".into()));
        }
        if self.max_lag == 0 {
            return Err(Error::InvalidConfig("max lag H must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig("alpha must be in (0, 1)".into()));
        }
        for (ai, _) in self.axis2.values().iter().enumerate() {
            let (n, k) = self.axis2.cell_dims(ai);
            if n == 0 || k == 0 {
                return Err(Error::InvalidConfig("N and K must be >= 1".into()));
            }
            for &t in &self.t_values {
                if t <= self.max_lag {
                    return Err(Error::LagTooLarge {
                        lag: self.max_lag,
                        sample_size: t,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Rejection counts for one cell of the grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CellCounts {
    pub nlsd_rejections: usize,
    pub nlsd_failures: usize,
    pub srnlsd_rejections: usize,
    pub srnlsd_failures: usize,
}

impl CellCounts {
    fn merge(mut self, other: CellCounts) -> CellCounts {
        self.nlsd_rejections += other.nlsd_rejections;
        self.nlsd_failures += other.nlsd_failures;
        self.srnlsd_rejections += other.srnlsd_rejections;
        self.srnlsd_failures += other.srnlsd_failures;
        self
    }
}

/// Rejection-rate matrices over the grid, indexed `[t_index][axis2_index]`.
/// A rate is `None` when any replication in the cell failed (e.g. a singular
/// covariance for the unshrunk test with p >= T).
#[derive(Debug, Clone, Serialize)]
pub struct SizeGrid {
    pub rates_nlsd: Vec<Vec<Option<f64>>>,
    pub rates_srnlsd: Vec<Vec<Option<f64>>>,
    pub counts: Vec<Vec<CellCounts>>,
    pub grid: ExperimentGrid,
    pub elapsed_seconds: f64,
}

impl SizeGrid {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("size grid serializes")
    }
}

/// Outcome of both tests on one simulated dataset; `None` marks a failed run.
type RepOutcome = (Option<bool>, Option<bool>);

/// Draw an `n_rows x n_cols` panel of i.i.d. Student-t variates rescaled by
/// sqrt((df-2)/df) so every entry has unit variance. Filled row-major from a
/// ChaCha8 stream seeded with `seed`; identical output for identical input.
pub fn sample_student_t_unit_variance(
    n_rows: usize,
    n_cols: usize,
    df: f64,
    seed: u64,
) -> Result<SeriesMatrix> {
    // negated form on purpose: NaN must also be rejected
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(df > 2.0) {
        return Err(Error::InvalidDf { df });
    }
    let scale = ((df - 2.0) / df).sqrt();
    let dist = StudentT::new(df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..n_rows * n_cols)
        .map(|_| scale * <StudentT<f64> as Distribution<f64>>::sample(&dist, &mut rng))
        .collect();
    SeriesMatrix::new(n_rows, n_cols, data)
}

fn run_replication(
    n: usize,
    k: usize,
    t_len: usize,
    df: f64,
    max_lag: usize,
    critical: f64,
    seed: u64,
) -> RepOutcome {
    let spec = match TransformSpec::powers(k) {
        Ok(s) => s,
        Err(_) => return (None, None),
    };
    let draw = match sample_student_t_unit_variance(n, t_len, df, seed) {
        Ok(x) => x,
        Err(_) => return (None, None),
    };
    let xa = match draw.apply_transforms(&spec) {
        Ok(x) => x.demean(),
        Err(_) => return (None, None),
    };
    let gammas = match autocovariance_sequence(&xa, max_lag, MeanCorrection::AsWritten) {
        Ok(g) => g,
        Err(_) => return (None, None),
    };

    let nlsd = nlsd_statistic(&gammas, t_len)
        .ok()
        .map(|(stat, _)| stat > critical);

    let srnlsd = lw_scalars(&xa, &gammas[0])
        .and_then(|coeffs| shrink_covariance(&gammas[0], &coeffs))
        .and_then(|shrunk| srnlsd_statistic(&gammas, &shrunk, t_len))
        .ok()
        .map(|(stat, _)| stat > critical);

    (nlsd, srnlsd)
}

/// Run the experiment with a custom per-replication runner (used by tests to
/// validate the counting machinery with stub outcomes).
fn run_with<F>(grid: &ExperimentGrid, runner: F) -> Result<SizeGrid>
where
    F: Fn(usize, usize, usize) -> RepOutcome + Sync,
{
    grid.validate()?;
    let started = Instant::now();
    let n_t = grid.t_values.len();
    let n_a = grid.axis2.values().len();
    let n_cells = n_t * n_a;
    let reps = grid.replications;

    let counts: Vec<CellCounts> = (0..n_cells * reps)
        .into_par_iter()
        .fold(
            || vec![CellCounts::default(); n_cells],
            |mut acc, idx| {
                let cell = idx / reps;
                let rep = idx % reps;
                let (ti, ai) = (cell / n_a, cell % n_a);
                let (nlsd, srnlsd) = runner(ti, ai, rep);
                let c = &mut acc[cell];
                match nlsd {
                    Some(true) => c.nlsd_rejections += 1,
                    Some(false) => {}
                    None => c.nlsd_failures += 1,
                }
                match srnlsd {
                    Some(true) => c.srnlsd_rejections += 1,
                    Some(false) => {}
                    None => c.srnlsd_failures += 1,
                }
                acc
            },
        )
        .reduce(
            || vec![CellCounts::default(); n_cells],
            |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
        );

    let rate = |rejections: usize, failures: usize| -> Option<f64> {
        (failures == 0).then(|| rejections as f64 / reps as f64)
    };
    let mut rates_nlsd = vec![vec![None; n_a]; n_t];
    let mut rates_srnlsd = vec![vec![None; n_a]; n_t];
    let mut cell_counts = vec![vec![CellCounts::default(); n_a]; n_t];
    for ti in 0..n_t {
        for ai in 0..n_a {
            let c = counts[ti * n_a + ai];
            rates_nlsd[ti][ai] = rate(c.nlsd_rejections, c.nlsd_failures);
            rates_srnlsd[ti][ai] = rate(c.srnlsd_rejections, c.srnlsd_failures);
            cell_counts[ti][ai] = c;
        }
    }

    Ok(SizeGrid {
        rates_nlsd,
        rates_srnlsd,
        counts: cell_counts,
        grid: grid.clone(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Run the full empirical-size experiment for one grid.
pub fn run_size_experiment(grid: &ExperimentGrid) -> Result<SizeGrid> {
    grid.validate()?;
    // critical values depend only on the cell dimension; precompute them
    let n_a = grid.axis2.values().len();
    let criticals: Vec<f64> = (0..n_a)
        .map(|ai| {
            let (n, k) = grid.axis2.cell_dims(ai);
            let p = n * k;
            chi_square_critical(p * p * grid.max_lag, grid.alpha)
        })
        .collect();
    run_with(grid, |ti, ai, rep| {
        let (n, k) = grid.axis2.cell_dims(ai);
        let seed = replication_seed(grid.master_seed, ti, ai, grid.df, rep);
        run_replication(
            n,
            k,
            grid.t_values[ti],
            grid.df,
            grid.max_lag,
            criticals[ai],
            seed,
        )
    })
}

// ---------------------------------------------------------------------------
// presets and long-format rows
// ---------------------------------------------------------------------------

/// Grid size for the two named presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// 3 x 3 grid, df in {4, 10}, 500 replications: minutes on a laptop.
    Desk,
    /// The complete 10 x 10 grid, df in {4, 7, 10}, 1000 replications.
    Full,
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            other => Err(Error::InvalidConfig(format!(
                "unknown scale '{other}' (expected desk or full)"
            ))),
        }
    }
}

fn preset_axes(scale: Scale) -> (Vec<usize>, Vec<usize>, Vec<f64>, usize) {
    match scale {
        Scale::Desk => (vec![100, 300, 1000], vec![2, 6, 10], vec![4.0, 10.0], 500),
        Scale::Full => (
            (1..=10).map(|i| i * 100).collect(),
            (1..=10).map(|i| i * 2).collect(),
            vec![4.0, 7.0, 10.0],
            1000,
        ),
    }
}

/// Experiment with growing N at K = 2 (level and square), one grid per df.
pub fn fig1_grids(scale: Scale, master_seed: u64) -> Vec<ExperimentGrid> {
    let (t_values, axis2_values, dfs, replications) = preset_axes(scale);
    dfs.into_iter()
        .map(|df| ExperimentGrid {
            t_values: t_values.clone(),
            axis2: Axis2::VaryN {
                values: axis2_values.clone(),
                k_fixed: 2,
            },
            df,
            max_lag: 1,
            replications,
            alpha: 0.05,
            master_seed,
        })
        .collect()
}

/// Experiment with growing K (powers up to K) at N = 2, one grid per df.
pub fn fig2_grids(scale: Scale, master_seed: u64) -> Vec<ExperimentGrid> {
    let (t_values, axis2_values, dfs, replications) = preset_axes(scale);
    dfs.into_iter()
        .map(|df| ExperimentGrid {
            t_values: t_values.clone(),
            axis2: Axis2::VaryK {
                values: axis2_values.clone(),
                n_fixed: 2,
            },
            df,
            max_lag: 1,
            replications,
            alpha: 0.05,
            master_seed,
        })
        .collect()
}

/// One row of the long-format results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeRow {
    pub t: usize,
    pub axis2_name: String,
    pub axis2_value: usize,
    pub df: f64,
    pub test: String,
    pub rate: Option<f64>,
    pub failures: usize,
    pub replications: usize,
}

impl SizeGrid {
    /// Flatten into long-format rows, ordered by (T index, axis2 index, test).
    pub fn to_rows(&self) -> Vec<SizeRow> {
        let mut rows = Vec::new();
        let name = self.grid.axis2.name();
        for (ti, &t) in self.grid.t_values.iter().enumerate() {
            for (ai, &a) in self.grid.axis2.values().iter().enumerate() {
                let c = self.counts[ti][ai];
                rows.push(SizeRow {
                    t,
                    axis2_name: name.to_string(),
                    axis2_value: a,
                    df: self.grid.df,
                    test: "nlsd".to_string(),
                    rate: self.rates_nlsd[ti][ai],
                    failures: c.nlsd_failures,
                    replications: self.grid.replications,
                });
                rows.push(SizeRow {
                    t,
                    axis2_name: name.to_string(),
                    axis2_value: a,
                    df: self.grid.df,
                    test: "srnlsd".to_string(),
                    rate: self.rates_srnlsd[ti][ai],
                    failures: c.srnlsd_failures,
                    replications: self.grid.replications,
                });
            }
        }
        rows
    }
}

pub const SIZE_CSV_HEADER: &str = "T,axis2_name,axis2_value,df,test,rate,failures,replications";

/// Serialize rows to the long-format CSV. An unavailable rate is an empty
/// field. Float formatting is the shortest round-trip form, so the output is
/// byte-stable and parses back losslessly.
pub fn rows_to_csv(rows: &[SizeRow]) -> String {
    let mut out = String::from(SIZE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let rate = r.rate.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.t, r.axis2_name, r.axis2_value, r.df, r.test, rate, r.failures, r.replications
        ));
    }
    out
}

/// Parse the long-format CSV produced by [`rows_to_csv`].
pub fn rows_from_csv(text: &str) -> Result<Vec<SizeRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Domain("empty size-grid CSV".into()))?;
    if header.trim() != SIZE_CSV_HEADER {
        return Err(Error::Domain(format!(
            "unexpected size-grid CSV header '{header}'"
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Domain(format!(
                "size-grid CSV row {} has {} fields, expected 8",
                i + 2,
                fields.len()
            )));
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad {what} '{s}' on row {}", i + 2)))
        };
        let rate =
            if fields[5].trim().is_empty() {
                None
            } else {
                Some(fields[5].trim().parse::<f64>().map_err(|_| {
                    Error::Domain(format!("bad rate '{}' on row {}", fields[5], i + 2))
                })?)
            };
        rows.push(SizeRow {
            t: parse_usize(fields[0], "T")?,
            axis2_name: fields[1].trim().to_string(),
            axis2_value: parse_usize(fields[2], "axis2_value")?,
            df: fields[3]
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad df '{}' on row {}", fields[3], i + 2)))?,
            test: fields[4].trim().to_string(),
            rate,
            failures: parse_usize(fields[6], "failures")?,
            replications: parse_usize(fields[7], "replications")?,
        });
    }
    Ok(rows)
}
