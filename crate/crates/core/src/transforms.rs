//! Componentwise transforms that stack a raw `N x T` series into the
//! augmented `NK x T` process tested for serial dependence.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A scalar transform applied entrywise to the series.
///
/// `SignedPower(e) = sign(x) * |x|^e` keeps the sign that even powers throw
/// away, a useful alternative for heavy-tailed data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Power(u32),
    Abs,
    Log,
    SignedPower(u32),
}

impl Transform {
    fn apply(&self, x: f64) -> f64 {
        match *self {
            // exact passthrough so the first block is bitwise the input
            Transform::Power(1) => x,
            Transform::Power(e) => x.powi(e as i32),
            Transform::Abs => x.abs(),
            Transform::Log => x.ln(),
            Transform::SignedPower(1) => x,
            Transform::SignedPower(e) => x.abs().powi(e as i32).copysign(x),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Transform::Power(e) => write!(f, "pow:{e}"),
            Transform::Abs => write!(f, "abs"),
            Transform::Log => write!(f, "log"),
            Transform::SignedPower(e) => write!(f, "spow:{e}"),
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let parse_exp = |v: &str, what: &str| -> Result<u32> {
            let e: u32 = v
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad {what} exponent '{v}'")))?;
            if e == 0 {
                return Err(Error::InvalidConfig(format!(
                    "{what} exponent must be a positive integer"
                )));
            }
            Ok(e)
        };
        if let Some(v) = s.strip_prefix("pow:") {
            return Ok(Transform::Power(parse_exp(v, "pow")?));
        }
        if let Some(v) = s.strip_prefix("spow:") {
            return Ok(Transform::SignedPower(parse_exp(v, "spow")?));
        }
        match s.as_str() {
            "abs" => Ok(Transform::Abs),
            "log" => Ok(Transform::Log),
            other => Err(Error::InvalidConfig(format!(
                "unknown transform '{other}' (expected pow:E, spow:E, abs or log)"
            ))),
        }
    }
}

/// Ordered list of `K >= 1` transforms; the first one must be the identity
/// `pow:1` so the stacked process always contains the series itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformSpec(Vec<Transform>);

impl TransformSpec {
    pub fn new(list: Vec<Transform>) -> Result<Self> {
        if list.is_empty() {
            return Err(Error::InvalidConfig(
                "transform list must contain at least one transform".into(),
            ));
        }
        if list[0] != Transform::Power(1) {
            return Err(Error::InvalidConfig(
                "first transform must be the identity pow:1".into(),
            ));
        }
        Ok(TransformSpec(list))
    }

    /// The canonical experiment set: powers `1..=k`.
    pub fn powers(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        Self::new((1..=k as u32).map(Transform::Power).collect())
    }

    /// Parse the compact comma-separated grammar, e.g. `pow:1,pow:2,abs,log`.
    pub fn parse(s: &str) -> Result<Self> {
        let list = s
            .split(',')
            .map(|tok| tok.parse::<Transform>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(list)
    }

    /// Number of transforms K.
    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn transforms(&self) -> &[Transform] {
        &self.0
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// A `rows x cols` panel of observations, one column per time point,
/// row-major storage. `demeaned` records whether row means have been
/// subtracted.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    demeaned: bool,
}

impl SeriesMatrix {
    /// Build from row-major data; every entry must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Domain("series must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Domain(format!(
                "expected {} entries for a {}x{} series, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        for (idx, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / cols + 1,
                    col: idx % cols + 1,
                });
            }
        }
        Ok(SeriesMatrix {
            rows,
            cols,
            data,
            demeaned: false,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let t = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != t) {
            return Err(Error::Domain("all rows must have the same length".into()));
        }
        Self::new(n, t, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Sample size T.
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn is_demeaned(&self) -> bool {
        self.demeaned
    }

    /// Stack the K transforms: output row block `k` (rows `k*N..(k+1)*N`)
    /// is transform `k` applied entrywise to the input. The output is not
    /// demeaned, whatever the input state.
    pub fn apply_transforms(&self, spec: &TransformSpec) -> Result<SeriesMatrix> {
        let n = self.rows;
        let t = self.cols;
        let k = spec.k();
        let mut data = Vec::with_capacity(n * k * t);
        for (block, tf) in spec.transforms().iter().enumerate() {
            for i in 0..n {
                let src = self.row(i);
                if *tf == Transform::Log {
                    if let Some(pos) = src.iter().position(|&x| x <= 0.0) {
                        return Err(Error::Domain(format!(
                            "log transform (block {}) requires positive entries; \
                             found {} at series row {}, column {}",
                            block + 1,
                            src[pos],
                            i + 1,
                            pos + 1
                        )));
                    }
                }
                data.extend(src.iter().map(|&x| tf.apply(x)));
            }
        }
        // finiteness can be lost by large powers of large entries
        SeriesMatrix::new(n * k, t, data)
    }

    /// Subtract each row's full-sample mean.
    pub fn demean(&self) -> SeriesMatrix {
        let mut out = self.clone();
        let t = self.cols as f64;
        for i in 0..self.rows {
            let row = &mut out.data[i * self.cols..(i + 1) * self.cols];
            let mean: f64 = row.iter().sum::<f64>() / t;
            row.iter_mut().for_each(|v| *v -= mean);
        }
        out.demeaned = true;
        out
    }

    /// Copy into column-major (time-major) order; observation `t` becomes the
    /// contiguous slice `out[t*rows..(t+1)*rows]`.
    pub(crate) fn to_observation_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            for (t, &v) in row.iter().enumerate() {
                out[t * self.rows + i] = v;
            }
        }
        out
    }
}
