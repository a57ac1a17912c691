//! Sample autocovariance matrices of the transformed series.
//!
//! For lag `h` the estimator is
//!
//! ```text
//! G(h) = (1/T) sum_{t=h+1..T} x_t x_{t-h}'  -  m m'
//! ```
//!
//! where, in the `AsWritten` variant, the correction `m m'` uses the mean of
//! the first `T - h` observations, `m = (1/T) sum_{t=1..T-h} x_t` (the lead
//! and lag mean factors cover the same index set, so they coincide). The
//! `GrandMean` variant instead subtracts the full-sample mean from every
//! observation before forming the lagged products. All divisors are `1/T`;
//! there is no small-sample `1/(T-h)` correction.

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::transforms::SeriesMatrix;

/// Which mean correction the lagged-product estimator applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanCorrection {
    /// Literal form: subtract the outer product of the mean over the first
    /// `T - h` observations.
    #[default]
    AsWritten,
    /// Conventional form: center every observation at the full-sample mean
    /// before forming products.
    GrandMean,
}

/// A lag-`h` sample autocovariance matrix together with its provenance.
#[derive(Debug, Clone)]
pub struct LagCovariance {
    pub lag: usize,
    pub sample_size: usize,
    pub matrix: SquareMatrix,
}

/// Sample autocovariance at a single lag. Requires `h < T`.
pub fn autocovariance(
    xa: &SeriesMatrix,
    lag: usize,
    correction: MeanCorrection,
) -> Result<LagCovariance> {
    let seq = autocovariance_sequence_inner(xa, lag, correction, true)?;
    Ok(seq.into_iter().next_back().expect("one lag requested"))
}

/// Autocovariances for all lags `0..=max_lag` in one pass over the data.
pub fn autocovariance_sequence(
    xa: &SeriesMatrix,
    max_lag: usize,
    correction: MeanCorrection,
) -> Result<Vec<LagCovariance>> {
    autocovariance_sequence_inner(xa, max_lag, correction, false)
}

fn autocovariance_sequence_inner(
    xa: &SeriesMatrix,
    max_lag: usize,
    correction: MeanCorrection,
    only_last: bool,
) -> Result<Vec<LagCovariance>> {
    let p = xa.rows();
    let t_len = xa.cols();
    if max_lag >= t_len {
        return Err(Error::LagTooLarge {
            lag: max_lag,
            sample_size: t_len,
        });
    }

    // observation-major copy: obs t is the contiguous slice [t*p, (t+1)*p)
    let obs = xa.to_observation_major();
    let obs_at = |t: usize| &obs[t * p..(t + 1) * p];
    let inv_t = 1.0 / t_len as f64;

    let grand_mean: Vec<f64> = match correction {
        MeanCorrection::GrandMean => {
            let mut m = vec![0.0; p];
            for t in 0..t_len {
                for (mi, &v) in m.iter_mut().zip(obs_at(t)) {
                    *mi += v;
                }
            }
            m.iter_mut().for_each(|v| *v *= inv_t);
            m
        }
        MeanCorrection::AsWritten => Vec::new(),
    };

    let lags: Vec<usize> = if only_last {
        vec![max_lag]
    } else {
        (0..=max_lag).collect()
    };

    let mut out = Vec::with_capacity(lags.len());
    for h in lags {
        let mut cross = vec![0.0; p * p];
        match correction {
            MeanCorrection::AsWritten => {
                for t in h..t_len {
                    let lead = obs_at(t);
                    let lagv = obs_at(t - h);
                    for (i, &li) in lead.iter().enumerate() {
                        let row = &mut cross[i * p..(i + 1) * p];
                        for (rj, &gj) in row.iter_mut().zip(lagv) {
                            *rj += li * gj;
                        }
                    }
                }
                // mean over the first T-h observations, divisor 1/T
                let mut m = vec![0.0; p];
                for t in 0..t_len - h {
                    for (mi, &v) in m.iter_mut().zip(obs_at(t)) {
                        *mi += v;
                    }
                }
                m.iter_mut().for_each(|v| *v *= inv_t);
                for i in 0..p {
                    let row = &mut cross[i * p..(i + 1) * p];
                    for j in 0..p {
                        row[j] = row[j] * inv_t - m[i] * m[j];
                    }
                }
            }
            MeanCorrection::GrandMean => {
                let m = &grand_mean;
                for t in h..t_len {
                    let lead = obs_at(t);
                    let lagv = obs_at(t - h);
                    for i in 0..p {
                        let ci = lead[i] - m[i];
                        let row = &mut cross[i * p..(i + 1) * p];
                        for j in 0..p {
                            row[j] += ci * (lagv[j] - m[j]);
                        }
                    }
                }
                cross.iter_mut().for_each(|v| *v *= inv_t);
            }
        }
        out.push(LagCovariance {
            lag: h,
            sample_size: t_len,
            matrix: SquareMatrix::from_raw(p, cross),
        });
    }
    Ok(out)
}
