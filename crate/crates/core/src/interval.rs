//! Axis-aligned interval boxes, the only set representation used for
//! initial-state and disturbance sets.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::random::RandomStream;

/// Closed hyperrectangle `[lower_0, upper_0] x ... x [lower_d, upper_d]`.
///
/// Zero-width dimensions are allowed and represent exactly known values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox", into = "RawBox")]
pub struct IntervalBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawBox> for IntervalBox {
    type Error = Error;
    fn try_from(raw: RawBox) -> Result<Self> {
        IntervalBox::new(raw.lower, raw.upper)
    }
}

impl From<IntervalBox> for RawBox {
    fn from(b: IntervalBox) -> Self {
        RawBox {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

impl IntervalBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim("interval box bounds", lower.len(), upper.len())?;
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            // also rejects NaN bounds
            if !(lo <= hi) {
                return Err(Error::InvalidInterval {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Box `[-r_i, r_i]` in every dimension.
    pub fn symmetric(radius: &[f64]) -> Result<Self> {
        Self::new(radius.iter().map(|r| -r).collect(), radius.to_vec())
    }

    /// The same interval repeated `dim` times.
    pub fn cube(lower: f64, upper: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn point(v: &[f64]) -> Self {
        Self {
            lower: v.to_vec(),
            upper: v.to_vec(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::point(&vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// True when every dimension has zero width.
    pub fn is_degenerate(&self) -> bool {
        self.lower.iter().zip(&self.upper).all(|(l, u)| l == u)
    }

    pub fn contains(&self, v: &[f64]) -> Result<bool> {
        check_dim("containment query", self.dim(), v.len())?;
        Ok(self.first_violation(v).is_none())
    }

    /// Index of the first coordinate outside the box, if any. Assumes `v`
    /// has the box dimension.
    pub(crate) fn first_violation(&self, v: &[f64]) -> Option<usize> {
        (0..self.dim()).find(|&i| !(self.lower[i] <= v[i] && v[i] <= self.upper[i]))
    }

    pub fn contains_box(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| self.lower[i] <= other.lower[i] && other.upper[i] <= self.upper[i])
    }

    /// Inflate each side by `fraction` of the dimension's width.
    pub fn inflate(&self, fraction: f64) -> Self {
        let widths = self.widths();
        Self {
            lower: self.lower.iter().zip(&widths).map(|(l, w)| l - fraction * w).collect(),
            upper: self.upper.iter().zip(&widths).map(|(u, w)| u + fraction * w).collect(),
        }
    }

    /// Scale every dimension about its center; `factor` < 1 shrinks.
    pub fn scale_about_center(&self, factor: f64) -> Self {
        let c = self.center();
        let half: Vec<f64> = self.widths().iter().map(|w| 0.5 * w * factor.abs()).collect();
        Self {
            lower: c.iter().zip(&half).map(|(c, h)| c - h).collect(),
            upper: c.iter().zip(&half).map(|(c, h)| c + h).collect(),
        }
    }

    /// Draw one point uniformly from the box using a generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| {
                if lo == hi {
                    lo
                } else {
                    let u: f64 = rng.random();
                    (lo + (hi - lo) * u).clamp(lo, hi)
                }
            })
            .collect()
    }

    /// Draw one point from a fresh generator for `stream`.
    pub fn sample_uniform(&self, stream: &RandomStream) -> Vec<f64> {
        self.sample_with(&mut stream.rng())
    }
}

/// Smallest box containing all points.
pub fn interval_hull<P: AsRef<[f64]>>(points: &[P]) -> Result<IntervalBox> {
    let first = points.first().ok_or(Error::Empty("interval hull of no points"))?.as_ref();
    let mut lower = first.to_vec();
    let mut upper = first.to_vec();
    for p in &points[1..] {
        let p = p.as_ref();
        check_dim("interval hull point", lower.len(), p.len())?;
        for i in 0..p.len() {
            lower[i] = lower[i].min(p[i]);
            upper[i] = upper[i].max(p[i]);
        }
    }
    IntervalBox::new(lower, upper)
}
