//! Compactly supported piecewise-constant functions on the line.
//!
//! This is the universal representation for initial data, evolved solutions,
//! grid projections, and cover elements. A function holds `n+1` strictly
//! ascending breakpoints and `n` cell values; it is zero outside the
//! breakpoint window, and normalization guarantees adjacent cells carry
//! distinct values with no zero-valued cells at either end.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Piecewise-constant function: value `values[i]` on `[breakpoints[i], breakpoints[i+1])`,
/// zero outside `[breakpoints[0], breakpoints[n]]`.
///
/// The identically zero function is represented with empty vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "RawPwc")]
pub struct PiecewiseConstantFn {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPwc {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl From<PiecewiseConstantFn> for RawPwc {
    fn from(p: PiecewiseConstantFn) -> Self {
        RawPwc { breakpoints: p.xs, values: p.vs }
    }
}

impl<'de> Deserialize<'de> for PiecewiseConstantFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawPwc::deserialize(d)?;
        PiecewiseConstantFn::new(raw.breakpoints, raw.values).map_err(serde::de::Error::custom)
    }
}

impl PiecewiseConstantFn {
    /// Builds and normalizes a function from breakpoints and cell values.
    ///
    /// Requires `breakpoints.len() == values.len() + 1` (or both empty),
    /// strictly ascending finite breakpoints, and finite values. Adjacent
    /// equal values are merged and zero-valued end cells trimmed.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() && values.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::Invalid(format!(
                "need n+1 breakpoints for n values, got {} and {}",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite breakpoint or value".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("breakpoints must be strictly ascending".into()));
        }
        Ok(Self::normalized(breakpoints, values))
    }

    /// Builds from possibly degenerate cells: zero-width cells are dropped and
    /// positions that regress by floating-point noise are monotonized.
    /// Intended for solver output where event times coincide.
    pub(crate) fn from_degenerate(xs: Vec<f64>, vs: Vec<f64>) -> Self {
        debug_assert_eq!(xs.len(), vs.len() + 1);
        let mut bx: Vec<f64> = Vec::with_capacity(xs.len());
        let mut bv: Vec<f64> = Vec::with_capacity(vs.len());
        let mut hi = f64::NEG_INFINITY;
        for (i, &v) in vs.iter().enumerate() {
            let lo = xs[i].max(hi);
            let up = xs[i + 1].max(lo);
            if up > lo {
                bx.push(lo);
                bv.push(v);
            }
            hi = up;
        }
        bx.push(hi);
        if bv.is_empty() {
            return Self::zero();
        }
        Self::normalized(bx, bv)
    }

    fn normalized(xs: Vec<f64>, vs: Vec<f64>) -> Self {
        let mut out_x: Vec<f64> = Vec::with_capacity(xs.len());
        let mut out_v: Vec<f64> = Vec::with_capacity(vs.len());
        for (i, &v) in vs.iter().enumerate() {
            if out_v.last() == Some(&v) {
                continue;
            }
            out_x.push(xs[i]);
            out_v.push(v);
        }
        out_x.push(*xs.last().unwrap());
        // Trim zero cells at the ends; interior zeros are genuine plateaus.
        while out_v.first() == Some(&0.0) {
            out_v.remove(0);
            out_x.remove(0);
        }
        while out_v.last() == Some(&0.0) {
            out_v.pop();
            out_x.pop();
        }
        if out_v.is_empty() {
            return Self::zero();
        }
        PiecewiseConstantFn { xs: out_x, vs: out_v }
    }

    /// The identically zero function.
    pub fn zero() -> Self {
        PiecewiseConstantFn { xs: Vec::new(), vs: Vec::new() }
    }

    /// Constant value `v` on `[a, b)`.
    pub fn step(a: f64, b: f64, v: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![v])
    }

    pub fn is_zero(&self) -> bool {
        self.vs.is_empty()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    /// Number of cells (zero for the zero function).
    pub fn len(&self) -> usize {
        self.vs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vs.is_empty()
    }

    /// Right limit `u(x+)`.
    pub fn eval_right(&self, x: f64) -> f64 {
        if self.vs.is_empty() {
            return 0.0;
        }
        // partition_point: first breakpoint > x; cell index is that minus one.
        let idx = self.xs.partition_point(|&b| b <= x);
        if idx == 0 || idx > self.vs.len() {
            0.0
        } else {
            self.vs[idx - 1]
        }
    }

    /// Left limit `u(x-)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        if self.vs.is_empty() {
            return 0.0;
        }
        let idx = self.xs.partition_point(|&b| b < x);
        if idx == 0 || idx > self.vs.len() {
            0.0
        } else {
            self.vs[idx - 1]
        }
    }

    /// Support interval `[x0, xn]`, or `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        if self.xs.is_empty() {
            None
        } else {
            Some((self.xs[0], *self.xs.last().unwrap()))
        }
    }

    /// Essential supremum of `|u|`.
    pub fn sup_norm(&self) -> f64 {
        self.vs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Total variation including the jumps from and to zero at the support edges.
    pub fn tv(&self) -> f64 {
        if self.vs.is_empty() {
            return 0.0;
        }
        let interior: f64 = self.vs.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        self.vs[0].abs() + interior + self.vs.last().unwrap().abs()
    }

    /// Integral of `u` over the line.
    pub fn mass(&self) -> f64 {
        self.cells().map(|(a, b, v)| v * (b - a)).sum()
    }

    /// Integral of `|u|` over the line.
    pub fn l1_norm(&self) -> f64 {
        self.cells().map(|(a, b, v)| v.abs() * (b - a)).sum()
    }

    /// Iterator over `(left, right, value)` cells.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.vs.len()).map(move |i| (self.xs[i], self.xs[i + 1], self.vs[i]))
    }

    /// Exact `L1` distance, computed on the merged breakpoint partition.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let mut total = 0.0;
        let mut i = 0usize;
        let mut j = 0usize;
        let mut x = match (self.xs.first(), other.xs.first()) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => return 0.0,
        };
        loop {
            // Advance cell cursors past x.
            while i < self.vs.len() && self.xs[i + 1] <= x {
                i += 1;
            }
            while j < other.vs.len() && other.xs[j + 1] <= x {
                j += 1;
            }
            let next_a = if i < self.vs.len() {
                if self.xs[i] > x { Some(self.xs[i]) } else { Some(self.xs[i + 1]) }
            } else {
                None
            };
            let next_b = if j < other.vs.len() {
                if other.xs[j] > x { Some(other.xs[j]) } else { Some(other.xs[j + 1]) }
            } else {
                None
            };
            let nx = match (next_a, next_b) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => break,
            };
            if nx > x {
                let va = if i < self.vs.len() && self.xs[i] <= x { self.vs[i] } else { 0.0 };
                let vb = if j < other.vs.len() && other.xs[j] <= x { other.vs[j] } else { 0.0 };
                total += (va - vb).abs() * (nx - x);
                x = nx;
            } else {
                x = nx;
            }
        }
        total
    }

    /// Applies `f` to every cell value. `f(0)` must be `0` so the function
    /// stays compactly supported; the result is re-normalized.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        debug_assert_eq!(f(0.0), 0.0, "map must fix zero to preserve compact support");
        if self.vs.is_empty() {
            return Self::zero();
        }
        let vs: Vec<f64> = self.vs.iter().map(|&v| f(v)).collect();
        Self::normalized(self.xs.clone(), vs)
    }

    /// The reflection `x -> u(-x)`.
    pub fn reflect(&self) -> Self {
        if self.vs.is_empty() {
            return Self::zero();
        }
        let xs: Vec<f64> = self.xs.iter().rev().map(|&x| -x).collect();
        let vs: Vec<f64> = self.vs.iter().rev().copied().collect();
        PiecewiseConstantFn { xs, vs }
    }

    /// Values of the primitive `U(x) = integral of u from -inf to x` at every
    /// breakpoint. `U` is piecewise linear with these knot values.
    pub fn primitive_at_breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.xs.len());
        out.push(0.0);
        for (a, b, v) in self.cells() {
            acc += v * (b - a);
            out.push(acc);
        }
        out
    }

    /// Evaluates the primitive `U(y)` by linear interpolation.
    pub fn primitive(&self, prefix: &[f64], y: f64) -> f64 {
        if self.xs.is_empty() {
            return 0.0;
        }
        if y <= self.xs[0] {
            return 0.0;
        }
        if y >= *self.xs.last().unwrap() {
            return *prefix.last().unwrap();
        }
        let idx = self.xs.partition_point(|&b| b <= y) - 1;
        prefix[idx] + self.vs[idx] * (y - self.xs[idx])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pwc(xs: &[f64], vs: &[f64]) -> PiecewiseConstantFn {
        PiecewiseConstantFn::new(xs.to_vec(), vs.to_vec()).unwrap()
    }

    #[test]
    fn indicator_against_zero_has_unit_distance() {
        let u = pwc(&[0.0, 1.0], &[1.0]);
        assert_eq!(u.l1_distance(&PiecewiseConstantFn::zero()), 1.0);
        assert_eq!(u.l1_distance(&u), 0.0);
    }

    #[test]
    fn shifted_indicators_measure_symmetric_difference() {
        let u = pwc(&[0.0, 1.0], &[1.0]);
        let v = pwc(&[0.5, 1.5], &[1.0]);
        assert_eq!(u.l1_distance(&v), 1.0);
        assert_eq!(v.l1_distance(&u), 1.0);
    }

    #[test]
    fn distance_on_interleaved_partitions_is_exact() {
        let u = pwc(&[0.0, 2.0], &[1.0]);
        let v = pwc(&[-1.0, 0.5, 1.0, 3.0], &[2.0, 1.0, -1.0]);
        // [-1,0): |0-2|=2*1; [0,0.5): |1-2|=0.5; [0.5,1): 0; [1,2): 2*1; [2,3): 1*1.
        assert_eq!(u.l1_distance(&v), 2.0 + 0.5 + 2.0 + 1.0);
    }

    #[test]
    fn tv_counts_edge_jumps() {
        let u = pwc(&[0.0, 1.0, 2.0], &[1.0, -1.0]);
        assert_eq!(u.tv(), 1.0 + 2.0 + 1.0);
    }

    #[test]
    fn normalization_merges_and_trims() {
        let u = pwc(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0, 2.0, 2.0, 0.0]);
        assert_eq!(u.breakpoints(), &[1.0, 3.0]);
        assert_eq!(u.values(), &[2.0]);
    }

    #[test]
    fn interior_zero_plateau_is_kept() {
        let u = pwc(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]);
        assert_eq!(u.len(), 3);
        assert_eq!(u.mass(), 2.0);
    }

    #[test]
    fn one_sided_limits() {
        let u = pwc(&[0.0, 1.0, 2.0], &[3.0, 5.0]);
        assert_eq!(u.eval_right(1.0), 5.0);
        assert_eq!(u.eval_left(1.0), 3.0);
        assert_eq!(u.eval_right(-0.5), 0.0);
        assert_eq!(u.eval_left(2.0), 5.0);
        assert_eq!(u.eval_right(2.0), 0.0);
    }

    #[test]
    fn reflection_reverses_cells() {
        let u = pwc(&[0.0, 1.0, 3.0], &[2.0, -1.0]);
        let r = u.reflect();
        assert_eq!(r.breakpoints(), &[-3.0, -1.0, 0.0]);
        assert_eq!(r.values(), &[-1.0, 2.0]);
        assert_eq!(r.eval_right(-0.5), u.eval_left(0.5));
        assert_eq!(u.mass(), r.mass());
    }

    #[test]
    fn degenerate_cells_are_dropped() {
        let u = PiecewiseConstantFn::from_degenerate(vec![0.0, 1.0, 1.0, 2.0], vec![1.0, 9.0, 1.0]);
        assert_eq!(u.breakpoints(), &[0.0, 2.0]);
        assert_eq!(u.values(), &[1.0]);
    }

    #[test]
    fn primitive_interpolates_linearly() {
        let u = pwc(&[0.0, 1.0, 2.0], &[2.0, -1.0]);
        let prefix = u.primitive_at_breakpoints();
        assert_eq!(prefix, vec![0.0, 2.0, 1.0]);
        assert_eq!(u.primitive(&prefix, 0.5), 1.0);
        assert_eq!(u.primitive(&prefix, 1.5), 1.5);
        assert_eq!(u.primitive(&prefix, -3.0), 0.0);
        assert_eq!(u.primitive(&prefix, 7.0), 1.0);
    }

    #[test]
    fn serde_round_trip_validates() {
        let u = pwc(&[0.0, 1.0, 2.0], &[1.0, -1.0]);
        let s = serde_json::to_string(&u).unwrap();
        let back: PiecewiseConstantFn = serde_json::from_str(&s).unwrap();
        assert_eq!(u, back);
        let bad = r#"{"breakpoints":[1.0,0.0],"values":[2.0]}"#;
        assert!(serde_json::from_str::<PiecewiseConstantFn>(bad).is_err());
    }
}
