//! Seeded random piecewise-constant initial data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pwc::PiecewiseConstantFn;

/// Value range of a random datum: both signs, or one of the signed classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSign {
    TwoSided,
    NonNegative,
    NonPositive,
}

/// Random datum with `pieces` uniform cells on `[-l_dom, l_dom]` and values
/// i.i.d. uniform in `[-m_bound, m_bound]`, reproducible from the seed.
pub fn sample_initial_data(
    l_dom: f64,
    m_bound: f64,
    pieces: usize,
    seed: u64,
) -> Result<PiecewiseConstantFn> {
    sample_signed(l_dom, m_bound, pieces, seed, SampleSign::TwoSided)
}

/// Signed variant of `sample_initial_data`: values drawn from `[0, m_bound]`
/// or `[-m_bound, 0]` for the one-signed classes.
pub fn sample_signed(
    l_dom: f64,
    m_bound: f64,
    pieces: usize,
    seed: u64,
    sign: SampleSign,
) -> Result<PiecewiseConstantFn> {
    if !(l_dom > 0.0 && m_bound > 0.0) || pieces < 1 {
        return Err(Error::Invalid(format!(
            "need L > 0, M > 0, pieces >= 1; got L = {l_dom}, M = {m_bound}, pieces = {pieces}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..=pieces)
        .map(|i| -l_dom + 2.0 * l_dom * i as f64 / pieces as f64)
        .collect();
    let vs: Vec<f64> = (0..pieces)
        .map(|_| {
            let u: f64 = rng.gen();
            match sign {
                SampleSign::TwoSided => (2.0 * u - 1.0) * m_bound,
                SampleSign::NonNegative => u * m_bound,
                SampleSign::NonPositive => -u * m_bound,
            }
        })
        .collect();
    PiecewiseConstantFn::new(xs, vs)
}

/// Batch of independent data; item `i` uses seed `seed + i`.
pub fn sample_batch(
    l_dom: f64,
    m_bound: f64,
    pieces: usize,
    count: usize,
    seed: u64,
    sign: SampleSign,
) -> Result<Vec<PiecewiseConstantFn>> {
    (0..count)
        .map(|i| sample_signed(l_dom, m_bound, pieces, seed.wrapping_add(i as u64), sign))
        .collect()
}
