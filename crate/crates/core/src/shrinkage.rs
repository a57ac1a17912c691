//! Linear shrinkage of the lag-0 covariance toward a scaled identity.
//!
//! From the demeaned `p x T` panel and its lag-0 covariance `S` the sample
//! scalars are
//!
//! ```text
//! m    = <S, I>
//! d^2  = ||S - m I||^2
//! b2b  = (1/T^2) sum_t || x_t x_t' - S ||^2
//! b^2  = min(d^2, b2b)
//! a^2  = d^2 - b^2
//! ```
//!
//! (norms are the 1/p-normalized ones from [`crate::linalg`]) and the shrunk
//! covariance is `rho1 I + rho2 S` with `rho1 = (b^2/d^2) m` and
//! `rho2 = a^2/d^2`. As `p/T -> 0` with a non-degenerate dispersion,
//! `rho1 -> 0` and `rho2 -> 1`, recovering the unshrunk matrix.

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::moments::LagCovariance;
use crate::transforms::SeriesMatrix;

/// Sample shrinkage scalars and the derived tuning weights.
///
/// When `d^2` is numerically zero the ratios `b^2/d^2`, `a^2/d^2` are 0/0;
/// the `degenerate` flag is set and the weights are fixed at
/// `rho1 = m, rho2 = 0`, i.e. the target `m I` itself (the sample covariance
/// already is a multiple of the identity, so every combination coincides).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageCoefficients {
    pub m: f64,
    pub d2: f64,
    pub b2bar: f64,
    pub b2: f64,
    pub a2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub degenerate: bool,
}

impl ShrinkageCoefficients {
    /// Weights that leave the covariance untouched (`rho1 = 0`, `rho2 = 1`).
    /// Useful for forcing the unregularized statistic through the shrunk
    /// code path.
    pub fn no_shrinkage(m: f64) -> Self {
        ShrinkageCoefficients {
            m,
            d2: f64::NAN,
            b2bar: f64::NAN,
            b2: 0.0,
            a2: f64::NAN,
            rho1: 0.0,
            rho2: 1.0,
            degenerate: false,
        }
    }
}

/// The shrunk lag-0 covariance `rho1 I + rho2 S`.
#[derive(Debug, Clone)]
pub struct ShrunkCovariance {
    pub matrix: SquareMatrix,
    pub coefficients: ShrinkageCoefficients,
    pub source_t: usize,
}

const DEGENERATE_REL_TOL: f64 = 1e-14;

/// Compute the shrinkage scalars from the demeaned panel and its lag-0
/// covariance. `s` must be the lag-0 matrix computed from `xa`.
pub fn lw_scalars(xa: &SeriesMatrix, s: &LagCovariance) -> Result<ShrinkageCoefficients> {
    if s.lag != 0 {
        return Err(Error::InvalidConfig(format!(
            "shrinkage requires the lag-0 covariance, got lag {}",
            s.lag
        )));
    }
    let p = s.matrix.dim();
    if p != xa.rows() {
        return Err(Error::DimensionMismatch {
            left: p,
            right: xa.rows(),
        });
    }
    let t_len = xa.cols();
    let pf = p as f64;

    let m = s.matrix.trace() / pf;

    // d^2 = ||S - m I||^2
    let mut d2 = 0.0;
    for i in 0..p {
        for j in 0..p {
            let v = s.matrix.get(i, j) - if i == j { m } else { 0.0 };
            d2 += v * v;
        }
    }
    d2 /= pf;

    // b2bar = (1/T^2) sum_t ||x_t x_t' - S||^2, accumulated as a sum of
    // squares (no cancellation even when transformed entries are huge)
    let obs = xa.to_observation_major();
    let mut b2bar = 0.0;
    for t in 0..t_len {
        let x = &obs[t * p..(t + 1) * p];
        let mut term = 0.0;
        for i in 0..p {
            let xi = x[i];
            for j in 0..p {
                let v = xi * x[j] - s.matrix.get(i, j);
                term += v * v;
            }
        }
        b2bar += term / pf;
    }
    b2bar /= (t_len as f64) * (t_len as f64);

    let b2 = d2.min(b2bar);
    let a2 = d2 - b2;

    let degenerate = d2 <= DEGENERATE_REL_TOL * (m * m).max(1.0);
    let (rho1, rho2) = if degenerate {
        (m, 0.0)
    } else {
        ((b2 / d2) * m, a2 / d2)
    };

    Ok(ShrinkageCoefficients {
        m,
        d2,
        b2bar,
        b2,
        a2,
        rho1,
        rho2,
        degenerate,
    })
}

/// Form `rho1 I + rho2 S`. In the degenerate branch this is `m I` exactly.
pub fn shrink_covariance(
    s: &LagCovariance,
    coeffs: &ShrinkageCoefficients,
) -> Result<ShrunkCovariance> {
    if s.lag != 0 {
        return Err(Error::InvalidConfig(format!(
            "shrinkage requires the lag-0 covariance, got lag {}",
            s.lag
        )));
    }
    if coeffs.m <= 0.0 {
        return Err(Error::NonpositiveMean { m: coeffs.m });
    }
    let p = s.matrix.dim();
    let mut matrix = if coeffs.degenerate {
        SquareMatrix::diagonal(&vec![coeffs.m; p])
    } else {
        let mut out = s.matrix.scaled(coeffs.rho2);
        for i in 0..p {
            out.set(i, i, out.get(i, i) + coeffs.rho1);
        }
        out
    };
    // rho2 == 1 and rho1 == 0 must reproduce S bit for bit
    if coeffs.rho1 == 0.0 && coeffs.rho2 == 1.0 {
        matrix = s.matrix.clone();
    }
    Ok(ShrunkCovariance {
        matrix,
        coefficients: *coeffs,
        source_t: s.sample_size,
    })
}
