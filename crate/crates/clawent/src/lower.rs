//! One-sided-derivative solution classes, the backward controllability
//! construction, separated sawtooth witness families, and the closed-form
//! lower entropy bounds.
//!
//! A witness family is a set of nonneg (or nonpos) sawtooth profiles indexed
//! by binary codewords, all members of a class with a one-sided derivative
//! bound; members are realizable as time-`T` values of entropy solutions, and
//! pairwise L1 separation above `2 eps` makes the family log2 size a certified
//! entropy lower bound. Ramps are realized as staircases with steps on the
//! value lattice of the solver, so the backward/forward round trip produces
//! no wave interactions and reproduces the witness almost exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{FluxConstants, FluxModel};
use crate::pwc::PiecewiseConstantFn;
use crate::tracking::{evolve, FrontState};
use crate::util::log2_hamming_ball;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Direction of the one-sided distributional derivative bound: `DvLeq` means
/// `Dv <= bound` (fast rises forbidden), `DvGeq` means `Dv >= -bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideConstraint {
    DvLeq,
    DvGeq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConstraint {
    NonNegative,
    NonPositive,
}

/// A class of functions with support in `[-l_dom/2, l_dom/2]`, amplitude at
/// most `h_amp`, a sign constraint, and a one-sided derivative bound.
///
/// On piecewise-constant functions the measure bound is checked through an
/// amortized jump rule: a jump in the constrained direction at a breakpoint
/// is admitted if it does not exceed `bound` times the width of the
/// preceding cell (for the first breakpoint, the distance to the left edge
/// of the domain), so staircases approximating ramps of slope within the
/// bound pass and genuinely fast jumps fail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OneSidedClassSpec {
    pub l_dom: f64,
    pub h_amp: f64,
    pub bound: f64,
    pub side: SideConstraint,
    pub sign: SignConstraint,
}

impl OneSidedClassSpec {
    /// Checks membership of `v`, returning a `Class` error naming the first
    /// violated condition.
    pub fn check_membership(&self, v: &PiecewiseConstantFn, tol: f64) -> Result<()> {
        if let Some((a, b)) = v.support() {
            let edge = self.l_dom / 2.0;
            let slack = tol + 1e-9 * (1.0 + edge.min(f64::MAX));
            if a < -edge - slack || b > edge + slack {
                return Err(Error::Class(format!(
                    "support [{a}, {b}] exceeds [-{edge}, {edge}]"
                )));
            }
        }
        if v.sup_norm() > self.h_amp + tol {
            return Err(Error::Class(format!(
                "amplitude {} exceeds the bound {}",
                v.sup_norm(),
                self.h_amp
            )));
        }
        let (lo, hi) = v
            .values()
            .iter()
            .fold((0.0f64, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        match self.sign {
            SignConstraint::NonNegative if lo < -tol => {
                return Err(Error::Class(format!("negative value {lo} in a nonneg class")));
            }
            SignConstraint::NonPositive if hi > tol => {
                return Err(Error::Class(format!("positive value {hi} in a nonpos class")));
            }
            _ => {}
        }
        let bx = v.breakpoints();
        let bv = v.values();
        for i in 0..bx.len() {
            let left = if i == 0 { 0.0 } else { bv[i - 1] };
            let right = if i < bv.len() { bv[i] } else { 0.0 };
            let jump = right - left;
            let credit = if i == 0 {
                (bx[0] + self.l_dom / 2.0).max(0.0)
            } else {
                bx[i] - bx[i - 1]
            };
            let excess = match self.side {
                SideConstraint::DvLeq if jump > 0.0 => jump - self.bound * credit,
                SideConstraint::DvGeq if jump < 0.0 => -jump - self.bound * credit,
                _ => continue,
            };
            if excess > tol {
                return Err(Error::Class(format!(
                    "jump {jump} at x = {} exceeds the amortized one-sided bound by {excess}",
                    bx[i]
                )));
            }
        }
        Ok(())
    }
}

/// One-sided derivative constants `b+ = 1/(2T max |f''| on [0,h])` and
/// `b- = 1/(2T max |f''| on [-h,0])`.
pub fn b_constants(flux: &FluxModel, h: f64, t_final: f64) -> Result<(f64, f64)> {
    if !(h > 0.0 && h <= flux.bound()) {
        return Err(Error::Range(format!(
            "h = {h} outside the flux working range (0, {}]",
            flux.bound()
        )));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Invalid(format!("horizon must be positive, got {t_final}")));
    }
    let plus = flux.max_abs_f2(0.0, h);
    let minus = flux.max_abs_f2(-h, 0.0);
    if plus <= 0.0 || minus <= 0.0 {
        return Err(Error::Degenerate(format!(
            "f'' vanishes identically on one side of [-{h}, {h}]"
        )));
    }
    Ok((1.0 / (2.0 * t_final * plus), 1.0 / (2.0 * t_final * minus)))
}

/// Largest `|f'|` over `[-h, h]`; for the supported kinds `|f'|` increases
/// away from the origin on each side, so the endpoints realize the max.
fn fprime_interval_max(flux: &FluxModel, h: f64) -> f64 {
    flux.f1(h).abs().max(flux.f1(-h).abs())
}

/// Initial datum whose forward evolution over `[0, T]` reproduces `v`:
/// reflect, evolve for `T`, reflect again.
///
/// `v` must belong to the class and the class height must satisfy
/// `max |f'| on [-h, h] <= L/(2T)`, which keeps both passes free of wave
/// interactions; the construction then inverts the semigroup exactly up to
/// the solver's resolution.
pub fn backward_construct(
    flux: &FluxModel,
    v: &PiecewiseConstantFn,
    class_spec: &OneSidedClassSpec,
    t_final: f64,
    delta: f64,
) -> Result<PiecewiseConstantFn> {
    class_spec.check_membership(v, 1e-9 * (1.0 + class_spec.h_amp))?;
    let h = class_spec.h_amp;
    if h > flux.bound() {
        return Err(Error::Range(format!(
            "class height {h} exceeds the flux working range {}",
            flux.bound()
        )));
    }
    let speed_cap = class_spec.l_dom / (2.0 * t_final);
    let fph = fprime_interval_max(flux, h);
    if fph > speed_cap * (1.0 + 1e-12) {
        return Err(Error::Range(format!(
            "max |f'| = {fph} on [-{h}, {h}] exceeds L/(2T) = {speed_cap}"
        )));
    }
    let w0 = v.reflect();
    let evolved = evolve(flux, &w0, t_final, delta)?;
    Ok(evolved.reflect())
}

/// Per-time outcome of a regularity check.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityCheck {
    pub t: f64,
    pub max_jump: f64,
    pub jump_limit: f64,
    /// Smallest value of the oriented difference-quotient functional over
    /// ordered cell-midpoint pairs; nonneg means the bound holds exactly.
    pub worst_margin: f64,
    pub jump_ok: bool,
    pub quotient_ok: bool,
}

/// Outcome of `verify_regularity`: class membership of the datum plus the
/// continuity and one-sided quotient checks at the sampled times.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub class_ok: bool,
    pub violation: Option<String>,
    pub nonnegative: bool,
    /// One-sided constant `b` entering the quotient bound `2b`.
    pub bound: f64,
    /// `+1` checks drops (`Du >= -2b`), `-1` checks rises (`Du <= 2b`).
    pub orientation: i8,
    pub checks: Vec<RegularityCheck>,
    pub pass: bool,
}

fn profile_check(
    prof: &PiecewiseConstantFn,
    t: f64,
    orientation: i8,
    b: f64,
    delta: f64,
    tol: f64,
) -> RegularityCheck {
    let bv = prof.values();
    let bx = prof.breakpoints();
    let mut max_jump = 0.0f64;
    for i in 0..bx.len() {
        let left = if i == 0 { 0.0 } else { bv[i - 1] };
        let right = if i < bv.len() { bv[i] } else { 0.0 };
        max_jump = max_jump.max((right - left).abs());
    }
    // Oriented pair functional: e*(v_j - v_i) + 2b*(m_j - m_i) over midpoint
    // pairs i < j, scanned with a running extremum. Two quantization jumps of
    // up to 3*delta sit between the staircase and the continuum profile, so
    // the credit is 6*delta plus the requested tolerance.
    let e = orientation as f64;
    let mut worst = f64::INFINITY;
    let mut run_max = f64::NEG_INFINITY;
    for i in 0..bv.len() {
        let m = 0.5 * (bx[i] + bx[i + 1]);
        let phi = e * bv[i] + 2.0 * b * m;
        if run_max > f64::NEG_INFINITY {
            worst = worst.min(phi - run_max);
        }
        run_max = run_max.max(phi);
    }
    if !worst.is_finite() {
        worst = 0.0;
    }
    let jump_limit = 3.0 * delta * (1.0 + 1e-9);
    RegularityCheck {
        t,
        max_jump,
        jump_limit,
        worst_margin: worst,
        jump_ok: max_jump <= jump_limit,
        quotient_ok: worst >= -(6.0 * delta + tol),
    }
}

/// Evolves a one-sided-class datum to `T/4`, `T/2`, `T` and checks that (a)
/// no front carries a jump above `3 delta` and (b) the oriented difference
/// quotient respects the doubled one-sided constant `2b` within `tol` plus a
/// `6 delta` staircase credit. Class violations are reported, not raised.
pub fn verify_regularity(
    flux: &FluxModel,
    u0: &PiecewiseConstantFn,
    h: f64,
    t_final: f64,
    delta: f64,
    tol: f64,
) -> Result<RegularityReport> {
    if !(h > 0.0 && t_final > 0.0 && delta > 0.0) {
        return Err(Error::Invalid(format!(
            "h = {h}, T = {t_final}, delta = {delta} must all be positive"
        )));
    }
    let reject = |msg: String, nonneg: bool| RegularityReport {
        class_ok: false,
        violation: Some(msg),
        nonnegative: nonneg,
        bound: 0.0,
        orientation: 0,
        checks: Vec::new(),
        pass: false,
    };
    if h > flux.bound() {
        return Ok(reject(
            format!("h = {h} exceeds the flux working range {}", flux.bound()),
            true,
        ));
    }
    let stol = 1e-9 * (1.0 + u0.sup_norm());
    let (lo, hi) = u0
        .values()
        .iter()
        .fold((0.0f64, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let nonneg = if lo >= -stol {
        true
    } else if hi <= stol {
        false
    } else {
        return Ok(reject(format!("datum changes sign (min {lo}, max {hi})"), true));
    };
    let (b_plus, b_minus) = b_constants(flux, h, t_final)?;
    let (b, orient_at) = if nonneg { (b_plus, h) } else { (b_minus, -h) };
    let orientation: i8 = if flux.f2(orient_at) >= 0.0 { 1 } else { -1 };
    let side = if orientation == 1 { SideConstraint::DvGeq } else { SideConstraint::DvLeq };
    let class = OneSidedClassSpec {
        l_dom: f64::INFINITY,
        h_amp: h,
        bound: b,
        side,
        sign: if nonneg { SignConstraint::NonNegative } else { SignConstraint::NonPositive },
    };
    if let Err(e) = class.check_membership(u0, 1e-9 * (1.0 + h)) {
        return Ok(reject(e.to_string(), nonneg));
    }
    let mut state = FrontState::new(flux, u0, delta)?;
    let mut checks = Vec::with_capacity(3);
    for frac in [0.25, 0.5, 1.0] {
        state.advance_to(frac * t_final)?;
        let prof = state.profile();
        checks.push(profile_check(&prof, frac * t_final, orientation, b, delta, tol));
    }
    let pass = checks.iter().all(|c| c.jump_ok && c.quotient_ok);
    Ok(RegularityReport {
        class_ok: true,
        violation: None,
        nonnegative: nonneg,
        bound: b,
        orientation,
        checks,
        pass,
    })
}

/// A separated sawtooth family: `n_cells` cells of width `cell_width` tile
/// `[-l_dom/2, l_dom/2]`; a codeword places one tooth per set bit. Teeth are
/// staircased ramps of slope `tooth_slope` reaching `tooth_height` (steps
/// exactly on the solver's value lattice), so every member lies in the
/// one-sided class and pairwise L1 distances equal Hamming distance times
/// `tooth_area`.
///
/// `codewords` is the realized greedy family (capped; empty above the
/// realization cell cap); `certified_log2` is the Gilbert-Varshamov floor
/// `n - log2 V(n, r)` on the family size guaranteed at Hamming separation
/// `min_hamming = r + 1`, reported as a formula-level count.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessFamily {
    pub eps: f64,
    pub l_dom: f64,
    pub h_amp: f64,
    pub n_cells: usize,
    pub cell_width: f64,
    pub tooth_slope: f64,
    pub tooth_height: f64,
    pub ramp_run: f64,
    pub micro_steps: usize,
    pub tooth_area: f64,
    pub delta: f64,
    pub side: SideConstraint,
    pub sign: SignConstraint,
    pub b_plus: f64,
    pub b_minus: f64,
    pub min_hamming: usize,
    pub certified_log2: f64,
    pub realized_log2: f64,
    pub codewords: Vec<String>,
}

const REALIZE_CELL_CAP: usize = 4096;
const CANDIDATE_COUNT: usize = 512;
const MAX_KEPT: usize = 64;

impl WitnessFamily {
    pub fn class_spec(&self) -> OneSidedClassSpec {
        OneSidedClassSpec {
            l_dom: self.l_dom,
            h_amp: self.h_amp,
            bound: self.tooth_slope,
            side: self.side,
            sign: self.sign,
        }
    }

    fn cell_start(&self, i: usize) -> f64 {
        -self.l_dom / 2.0 + i as f64 * self.cell_width
    }

    /// Builds the member selected by a codeword of '0'/'1' characters.
    pub fn materialize(&self, bits: &str) -> Result<PiecewiseConstantFn> {
        if bits.len() != self.n_cells || bits.bytes().any(|b| b != b'0' && b != b'1') {
            return Err(Error::Invalid(format!(
                "codeword must be {} binary digits, got {bits:?}",
                self.n_cells
            )));
        }
        let k = self.micro_steps;
        let micro_w = self.delta / self.tooth_slope;
        let neg = self.sign == SignConstraint::NonPositive;
        // The canonical nonneg tooth rises when the class forbids fast rises
        // (stairs amortize the slope) and falls when it forbids fast drops;
        // nonpos members are negated, which swaps the two constraints.
        let rising = match (self.side, neg) {
            (SideConstraint::DvLeq, false) | (SideConstraint::DvGeq, true) => true,
            (SideConstraint::DvGeq, false) | (SideConstraint::DvLeq, true) => false,
        };
        let orient = if neg { -1.0 } else { 1.0 };
        let mut xs: Vec<f64> = Vec::new();
        let mut vs: Vec<f64> = Vec::new();
        for (i, bit) in bits.bytes().enumerate() {
            if bit != b'1' {
                continue;
            }
            let x0 = self.cell_start(i);
            let x1 = self.cell_start(i + 1);
            if xs.is_empty() {
                xs.push(x0);
            } else if *xs.last().unwrap() < x0 {
                vs.push(0.0);
                xs.push(x0);
            }
            let plateau = x1 - (x0 + self.ramp_run);
            let merge_plateau = plateau <= micro_w * 1e-6;
            if rising {
                for j in 0..k {
                    vs.push(orient * j as f64 * self.delta);
                    let end = if j + 1 == k && merge_plateau { x1 } else { x0 + (j + 1) as f64 * micro_w };
                    xs.push(end);
                }
                if !merge_plateau {
                    vs.push(orient * self.tooth_height);
                    xs.push(x1);
                }
            } else {
                if !merge_plateau {
                    vs.push(orient * self.tooth_height);
                    xs.push(x0 + plateau);
                }
                let stair_x0 = if merge_plateau { x0 } else { x0 + plateau };
                for j in 0..k {
                    vs.push(orient * (self.tooth_height - (j + 1) as f64 * self.delta));
                    let end = if j + 1 == k { x1 } else { stair_x0 + (j + 1) as f64 * micro_w };
                    xs.push(end);
                }
            }
        }
        if xs.len() < 2 {
            return Ok(PiecewiseConstantFn::zero());
        }
        PiecewiseConstantFn::new(xs, vs)
    }

    /// Materializes every realized codeword.
    pub fn realize_all(&self) -> Result<Vec<PiecewiseConstantFn>> {
        #[cfg(feature = "parallel")]
        {
            self.codewords.par_iter().map(|c| self.materialize(c)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.codewords.iter().map(|c| self.materialize(c)).collect()
        }
    }
}

fn hamming(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as usize).sum()
}

fn greedy_codewords(n: usize, min_hamming: usize) -> Vec<String> {
    let blocks = n.div_ceil(64);
    let mut candidates: Vec<Vec<u64>> = Vec::new();
    let zeros = vec![0u64; blocks];
    let mut ones = vec![u64::MAX; blocks];
    if !n.is_multiple_of(64) {
        ones[blocks - 1] = (1u64 << (n % 64)) - 1;
    }
    candidates.push(zeros);
    candidates.push(ones);
    if n <= 16 {
        for pattern in 1..(1u64 << n) - 1 {
            candidates.push(vec![pattern]);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
        for _ in 0..CANDIDATE_COUNT {
            let mut w: Vec<u64> = (0..blocks).map(|_| rng.gen()).collect();
            if !n.is_multiple_of(64) {
                w[blocks - 1] &= (1u64 << (n % 64)) - 1;
            }
            candidates.push(w);
        }
    }
    let mut kept: Vec<Vec<u64>> = Vec::new();
    for c in candidates {
        if kept.len() >= MAX_KEPT {
            break;
        }
        if kept.iter().all(|k| hamming(k, &c) >= min_hamming) {
            kept.push(c);
        }
    }
    kept.iter()
        .map(|w| {
            (0..n)
                .map(|i| if w[i / 64] >> (i % 64) & 1 == 1 { '1' } else { '0' })
                .collect()
        })
        .collect()
}

/// Builds the sawtooth witness family at radius `eps`.
///
/// Sets `h = 6 eps / l_dom`, picks the side with the weaker curvature (larger
/// one-sided constant, ties to the nonneg side), orients teeth by the sign of
/// `f''` at `h` or `-h`, and tiles `[-l_dom/2, l_dom/2]` with
/// `floor(b l_dom / (4h))` cells unless `n_override` fixes the count. Tooth
/// height is `min(h, b w)` rounded down to the value lattice; the Hamming
/// separation needed for pairwise L1 distance `> 2 eps` follows from the
/// exact tooth area.
pub fn build_witness_family(
    flux: &FluxModel,
    l_dom: f64,
    m_bound: f64,
    t_final: f64,
    eps: f64,
    delta: f64,
    n_override: Option<usize>,
) -> Result<WitnessFamily> {
    if !(l_dom > 0.0 && t_final > 0.0 && eps > 0.0 && delta > 0.0) {
        return Err(Error::Invalid(format!(
            "L = {l_dom}, T = {t_final}, eps = {eps}, delta = {delta} must all be positive"
        )));
    }
    if (m_bound - flux.bound()).abs() > 1e-12 * flux.bound().max(1.0) {
        return Err(Error::Invalid(format!(
            "amplitude bound {m_bound} does not match the flux working range {}",
            flux.bound()
        )));
    }
    let h = 6.0 * eps / l_dom;
    if h > flux.bound() {
        return Err(Error::Param(format!(
            "eps = {eps} puts the class height {h} beyond the flux working range {}",
            flux.bound()
        )));
    }
    let speed_cap = l_dom / (2.0 * t_final);
    let fph = fprime_interval_max(flux, h);
    if fph > speed_cap * (1.0 + 1e-12) {
        return Err(Error::Param(format!(
            "eps = {eps} violates controllability: max |f'| = {fph} on [-{h}, {h}] \
             exceeds L/(2T) = {speed_cap}"
        )));
    }
    let (b_plus, b_minus) = b_constants(flux, h, t_final)?;
    let (b, sign, orient_at) = if b_minus > b_plus {
        (b_minus, SignConstraint::NonPositive, -h)
    } else {
        (b_plus, SignConstraint::NonNegative, h)
    };
    let side = if flux.f2(orient_at) >= 0.0 { SideConstraint::DvLeq } else { SideConstraint::DvGeq };
    let n_cells = match n_override {
        Some(n) if n >= 1 => n,
        Some(_) => return Err(Error::Invalid("cell count must be at least 1".into())),
        None => ((b * l_dom / (4.0 * h)).floor() as usize).max(1),
    };
    let w = l_dom / n_cells as f64;
    let mut k = ((h.min(b * w)) / delta).floor() as usize;
    let rising = matches!(
        (side, sign),
        (SideConstraint::DvLeq, SignConstraint::NonNegative)
            | (SideConstraint::DvGeq, SignConstraint::NonPositive)
    );
    if !rising && k >= 1 {
        // A falling tooth amortizes its first descent over the plateau; a
        // plateau thinner than one micro-cell cannot carry a full step, so
        // shorten the stair by one step to widen it.
        let mw = delta / b;
        let plateau = w - k as f64 * mw;
        if plateau > mw * 1e-6 && plateau < mw {
            k -= 1;
        }
    }
    if k < 1 {
        return Err(Error::Param(format!(
            "delta = {delta} too coarse for the tooth height {}",
            h.min(b * w)
        )));
    }
    let t_h = k as f64 * delta;
    let run = t_h / b;
    let area = t_h * (w - run) + delta * delta * (k * (k - 1)) as f64 / (2.0 * b);
    let r = ((2.0 * eps / area) * (1.0 + 1e-12)).floor() as usize;
    let min_hamming = r + 1;
    let certified_log2 = if r >= n_cells {
        0.0
    } else {
        (n_cells as f64 - log2_hamming_ball(n_cells as u64, r as u64)).max(0.0)
    };
    let codewords = if n_cells <= REALIZE_CELL_CAP {
        greedy_codewords(n_cells, min_hamming)
    } else {
        Vec::new()
    };
    let realized_log2 =
        if codewords.is_empty() { 0.0 } else { (codewords.len() as f64).log2() };
    Ok(WitnessFamily {
        eps,
        l_dom,
        h_amp: h,
        n_cells,
        cell_width: w,
        tooth_slope: b,
        tooth_height: t_h,
        ramp_run: run,
        micro_steps: k,
        tooth_area: area,
        delta,
        side,
        sign,
        b_plus,
        b_minus,
        min_hamming,
        certified_log2,
        realized_log2,
        codewords,
    })
}

/// Closed-form lower entropy bound at radius `eps`, with `h = 6 eps / l_dom`.
///
/// Convex kinds: `L^2 / (108 ln2 T eps min{max |f''| on [0,h], on [-h,0]})`.
/// Inflection kind: `L^(m+1) / (108 ln2 6^(m-1) alpha_bar T) * eps^-m`.
pub fn analytic_lower_bound(
    flux: &FluxModel,
    l_dom: f64,
    m_bound: f64,
    t_final: f64,
    eps: f64,
    constants: &FluxConstants,
) -> Result<f64> {
    if !(l_dom > 0.0 && t_final > 0.0 && eps > 0.0) {
        return Err(Error::Invalid(format!(
            "L = {l_dom}, T = {t_final}, eps = {eps} must all be positive"
        )));
    }
    if (m_bound - flux.bound()).abs() > 1e-12 * flux.bound().max(1.0) {
        return Err(Error::Invalid(format!(
            "amplitude bound {m_bound} does not match the flux working range {}",
            flux.bound()
        )));
    }
    let h = 6.0 * eps / l_dom;
    if h > flux.bound() {
        return Err(Error::Param(format!(
            "eps = {eps} puts h = {h} beyond the flux working range {}",
            flux.bound()
        )));
    }
    let speed_cap = l_dom / (2.0 * t_final);
    let fph = fprime_interval_max(flux, h);
    if fph > speed_cap * (1.0 + 1e-12) {
        return Err(Error::Param(format!(
            "eps = {eps} violates the height control: max |f'| = {fph} exceeds {speed_cap}"
        )));
    }
    let ln2 = std::f64::consts::LN_2;
    if flux.kind().is_convex() {
        let denom = flux.max_abs_f2(0.0, h).min(flux.max_abs_f2(-h, 0.0));
        if denom <= 0.0 {
            return Err(Error::Degenerate(format!(
                "f'' vanishes identically on one side of [-{h}, {h}]"
            )));
        }
        Ok(l_dom * l_dom / (108.0 * ln2 * t_final * eps * denom))
    } else {
        let m = flux.degeneracy() as i32;
        let scale = l_dom.powi(m + 1)
            / (108.0 * ln2 * 6f64.powi(m - 1) * constants.alpha_bar * t_final);
        Ok(scale * eps.powi(-m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::estimate_constants;

    fn lattice_stair(x0: f64, step_w: f64, heights: &[f64]) -> PiecewiseConstantFn {
        let xs: Vec<f64> = (0..=heights.len()).map(|j| x0 + j as f64 * step_w).collect();
        PiecewiseConstantFn::new(xs, heights.to_vec()).unwrap()
    }

    #[test]
    fn b_constants_match_frozen_values() {
        let cubic = FluxModel::cubic(1.0).unwrap();
        let (bp, _) = b_constants(&cubic, 0.5, 1.0).unwrap();
        assert!((bp - 0.5).abs() < 1e-12);
        let burgers = FluxModel::burgers(1.0).unwrap();
        let (bp, bm) = b_constants(&burgers, 0.3, 2.0).unwrap();
        assert!((bp - 0.25).abs() < 1e-12);
        assert!((bm - 0.25).abs() < 1e-12);
        let quartic = FluxModel::quartic(1.0).unwrap();
        let (bp, _) = b_constants(&quartic, 0.5, 1.0).unwrap();
        assert!((bp - 1.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn membership_accepts_amortized_stairs_and_rejects_fast_jumps() {
        let class = OneSidedClassSpec {
            l_dom: 2.0,
            h_amp: 0.5,
            bound: 1.0,
            side: SideConstraint::DvLeq,
            sign: SignConstraint::NonNegative,
        };
        // Stair rising at exactly the bound: steps 0.1 over cells 0.1 wide.
        let v = lattice_stair(-1.0, 0.1, &[0.0, 0.1, 0.2, 0.3, 0.4]);
        class.check_membership(&v, 1e-9).unwrap();
        // The same heights over cells half as wide break the amortized rule.
        let fast = lattice_stair(-1.0, 0.05, &[0.0, 0.1, 0.2, 0.3, 0.4]);
        assert!(matches!(class.check_membership(&fast, 1e-9), Err(Error::Class(_))));
        let negative = lattice_stair(-1.0, 0.1, &[-0.2, -0.1]);
        assert!(matches!(class.check_membership(&negative, 1e-9), Err(Error::Class(_))));
        let wide = lattice_stair(-3.0, 0.1, &[0.0, 0.05]);
        assert!(matches!(class.check_membership(&wide, 1e-9), Err(Error::Class(_))));
        class.check_membership(&PiecewiseConstantFn::zero(), 1e-9).unwrap();
    }

    #[test]
    fn membership_leading_edge_uses_distance_from_the_domain_edge() {
        let class = OneSidedClassSpec {
            l_dom: 2.0,
            h_amp: 0.5,
            bound: 1.0,
            side: SideConstraint::DvLeq,
            sign: SignConstraint::NonNegative,
        };
        // First value 0.3 at x = -0.6: amortized over the 0.4 gap from -1.
        let v = PiecewiseConstantFn::new(vec![-0.6, 0.0], vec![0.3]).unwrap();
        class.check_membership(&v, 1e-9).unwrap();
        // The same jump right at the domain edge has no width to amortize.
        let at_edge = PiecewiseConstantFn::new(vec![-1.0, -0.4], vec![0.3]).unwrap();
        assert!(matches!(class.check_membership(&at_edge, 1e-9), Err(Error::Class(_))));
    }

    #[test]
    fn backward_construct_round_trips_witnesses() {
        let delta = 1e-3;
        for flux in [
            FluxModel::burgers(1.0).unwrap(),
            FluxModel::cubic(1.0).unwrap(),
            FluxModel::mixed_quartic(1.0).unwrap(),
        ] {
            let fam = build_witness_family(&flux, 2.0, 1.0, 1.0, 0.05, delta, Some(6)).unwrap();
            let class = fam.class_spec();
            let bits: String = "101010"[..6].to_string();
            let v = fam.materialize(&bits).unwrap();
            class.check_membership(&v, 1e-9).unwrap();
            let u0 = backward_construct(&flux, &v, &class, 1.0, delta).unwrap();
            assert!((u0.mass() - v.mass()).abs() < 1e-12 * (1.0 + v.mass().abs()));
            let round = evolve(&flux, &u0, 1.0, delta).unwrap();
            let err = round.l1_distance(&v);
            let budget = 5.0 * delta * (1.0 + v.tv()) * 2.0;
            assert!(err <= budget, "{:?}: round trip error {err} over {budget}", flux.kind());
            assert!(
                err <= 0.02 * v.l1_norm() + 1e-4,
                "{:?}: round trip error {err} vs l1 {}",
                flux.kind(),
                v.l1_norm()
            );
        }
    }

    #[test]
    fn backward_construct_of_zero_is_zero() {
        let flux = FluxModel::burgers(1.0).unwrap();
        let class = OneSidedClassSpec {
            l_dom: 2.0,
            h_amp: 0.1,
            bound: 0.5,
            side: SideConstraint::DvLeq,
            sign: SignConstraint::NonNegative,
        };
        let u0 =
            backward_construct(&flux, &PiecewiseConstantFn::zero(), &class, 1.0, 1e-3).unwrap();
        assert!(u0.is_zero());
    }

    #[test]
    fn backward_construct_guards_class_and_speed() {
        let flux = FluxModel::burgers(1.0).unwrap();
        let class = OneSidedClassSpec {
            l_dom: 2.0,
            h_amp: 0.5,
            bound: 0.5,
            side: SideConstraint::DvLeq,
            sign: SignConstraint::NonNegative,
        };
        let bad = PiecewiseConstantFn::step(-0.5, 0.0, 0.4).unwrap();
        assert!(matches!(
            backward_construct(&flux, &bad, &class, 1.0, 1e-3),
            Err(Error::Class(_))
        ));
        let slow_class = OneSidedClassSpec { h_amp: 0.9, ..class };
        let v = lattice_stair(-0.5, 0.2, &[0.0, 0.1]);
        // h = 0.9 gives max |f'| = 0.9 over L/(2T) = 0.25 at T = 4.
        assert!(matches!(
            backward_construct(&flux, &v, &slow_class, 4.0, 1e-3),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn regularity_report_passes_conforming_data() {
        let flux = FluxModel::burgers(1.0).unwrap();
        let zero = verify_regularity(&flux, &PiecewiseConstantFn::zero(), 0.3, 1.0, 1e-3, 1e-6)
            .unwrap();
        assert!(zero.pass && zero.class_ok);
        // Nonneg falling stair within Du >= -b+ = -0.5 at T = 1: drops of the
        // lattice step 1e-3 over cells of width 4e-3 (slope 0.25), so fronts
        // stay single-step for the continuity check.
        let vals: Vec<f64> = (0..50).map(|j| 0.05 - j as f64 * 1e-3).collect();
        let v = lattice_stair(-0.1, 4e-3, &vals);
        let rep = verify_regularity(&flux, &v, 0.3, 1.0, 1e-3, 1e-6).unwrap();
        assert!(rep.class_ok, "{:?}", rep.violation);
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.orientation, 1);
    }

    #[test]
    fn regularity_report_rejects_class_violations() {
        let cubic = FluxModel::cubic(1.0).unwrap();
        // A 0.5-high step 0.2 wide drops far faster than b+ allows.
        let step = PiecewiseConstantFn::step(0.0, 0.2, 0.5).unwrap();
        let rep = verify_regularity(&cubic, &step, 0.5, 1.0, 1e-3, 1e-6).unwrap();
        assert!(!rep.class_ok && !rep.pass);
        assert!(rep.violation.is_some());
        let mixed = PiecewiseConstantFn::new(vec![-0.5, 0.0, 0.5], vec![0.2, -0.2]).unwrap();
        let rep = verify_regularity(&cubic, &mixed, 0.5, 1.0, 1e-3, 1e-6).unwrap();
        assert!(!rep.class_ok);
    }

    #[test]
    fn witness_family_matches_the_desk_example() {
        let flux = FluxModel::burgers(1.0).unwrap();
        let fam = build_witness_family(&flux, 2.0, 1.0, 1.0, 0.05, 1e-3, Some(8)).unwrap();
        assert_eq!(fam.sign, SignConstraint::NonNegative);
        assert_eq!(fam.side, SideConstraint::DvLeq);
        assert!(fam.codewords.len() >= 2, "family {:?}", fam.codewords);
        let members = fam.realize_all().unwrap();
        let class = fam.class_spec();
        for v in &members {
            class.check_membership(v, 1e-9).unwrap();
        }
        for i in 0..members.len() {
            for j in 0..i {
                let d = members[i].l1_distance(&members[j]);
                assert!(d > 0.1, "members {i},{j} at distance {d}");
            }
        }
    }

    #[test]
    fn single_tooth_distance_equals_the_tooth_area() {
        for flux in [
            FluxModel::burgers(1.0).unwrap(),
            FluxModel::cubic(1.0).unwrap(),
            FluxModel::quartic(1.0).unwrap(),
            FluxModel::mixed_quartic(1.0).unwrap(),
        ] {
            let fam = build_witness_family(&flux, 2.0, 1.0, 1.0, 0.04, 1e-3, Some(5)).unwrap();
            let single = fam.materialize("01000").unwrap();
            let zero = fam.materialize("00000").unwrap();
            assert!(zero.is_zero());
            let d = single.l1_distance(&zero);
            assert!(
                (d - fam.tooth_area).abs() <= 1e-12 * (1.0 + fam.tooth_area),
                "{:?}: distance {d} vs area {}",
                flux.kind(),
                fam.tooth_area
            );
            fam.class_spec().check_membership(&single, 1e-9).unwrap();
        }
    }

    #[test]
    fn mixed_quartic_family_takes_the_nonpositive_side() {
        let flux = FluxModel::mixed_quartic(1.0).unwrap();
        let fam = build_witness_family(&flux, 2.0, 1.0, 1.0, 0.05, 1e-3, Some(6)).unwrap();
        assert_eq!(fam.sign, SignConstraint::NonPositive);
        assert_eq!(fam.side, SideConstraint::DvGeq);
        let v = fam.materialize("010000").unwrap();
        assert!(v.values().iter().all(|&x| x <= 0.0));
    }

    #[test]
    fn oversized_tooth_yields_a_singleton_family() {
        let cubic = FluxModel::cubic(1.0).unwrap();
        let fam = build_witness_family(&cubic, 2.0, 1.0, 1.0, 0.3, 1e-3, Some(1)).unwrap();
        assert!(fam.tooth_area < 2.0 * fam.eps);
        assert_eq!(fam.codewords.len(), 1);
        assert_eq!(fam.realized_log2, 0.0);
    }

    #[test]
    fn witness_family_rejects_uncontrollable_eps() {
        let burgers = FluxModel::burgers(1.0).unwrap();
        // eps = 0.4 gives h = 1.2 > M = 1.
        assert!(matches!(
            build_witness_family(&burgers, 2.0, 1.0, 1.0, 0.4, 1e-3, None),
            Err(Error::Param(_))
        ));
        // T = 8 shrinks the admissible speed to L/(2T) = 0.125 < f'(h).
        assert!(matches!(
            build_witness_family(&burgers, 2.0, 1.0, 8.0, 0.1, 1e-3, None),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn analytic_lower_bound_matches_frozen_values() {
        let burgers = FluxModel::burgers(1.0).unwrap();
        let c = estimate_constants(&burgers, 1000).unwrap();
        let b = analytic_lower_bound(&burgers, 2.0, 1.0, 1.0, 0.05, &c).unwrap();
        assert!((b - 1.0687).abs() < 1e-3, "got {b}");
        let exact = 4.0 / (108.0 * std::f64::consts::LN_2 * 0.05);
        assert!((b - exact).abs() < 1e-12);

        let cubic = FluxModel::cubic(1.0).unwrap();
        let c = estimate_constants(&cubic, 1000).unwrap();
        let b1 = analytic_lower_bound(&cubic, 2.0, 1.0, 1.0, 0.1, &c).unwrap();
        let expected = 8.0 / (108.0 * std::f64::consts::LN_2 * 6.0 * c.alpha_bar) * 100.0;
        assert!((b1 - expected).abs() < 1e-9 * expected);
        let b2 = analytic_lower_bound(&cubic, 4.0, 1.0, 1.0, 0.1, &c).unwrap();
        assert!((b2 / b1 - 8.0).abs() < 1e-9);

        assert!(matches!(
            analytic_lower_bound(&burgers, 2.0, 1.0, 1.0, 0.5, &c),
            Err(Error::Param(_))
        ));
    }
}
