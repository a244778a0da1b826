//! Polynomial flux models and their derived constants.
//!
//! A [`FluxModel`] holds the flux `f`, its exact derivative polynomials, a
//! shape classification, the degeneracy order `m` at the origin, and the
//! working amplitude bound `M`. Construction validates the shape assumptions
//! on a sample grid, so downstream code can rely on the monotone-branch
//! structure of `f'` without re-checking.

use crate::error::{Error, Result};
use crate::poly::Poly;
use serde::{Deserialize, Serialize};

/// Shape classification of the flux on `[-M, M]`.
///
/// - `Convex`: `f'' > 0` everywhere (degeneracy order `m = 1`).
/// - `ConvexDegenerate`: `f'' > 0` away from the origin, with `f', ..., f^(m)`
///   vanishing at `0` for odd `m >= 3`.
/// - `NonConvexInflection`: a single inflection at the origin, with
///   `f''(u) * u * sign(f^(m+1)(0)) > 0` for `u != 0` and even `m >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxKind {
    Convex,
    ConvexDegenerate,
    NonConvexInflection,
}

impl FluxKind {
    pub fn is_convex(self) -> bool {
        matches!(self, FluxKind::Convex | FluxKind::ConvexDegenerate)
    }
}

/// Polynomial flux with exact derivatives, validated shape, and working range.
#[derive(Debug, Clone)]
pub struct FluxModel {
    kind: FluxKind,
    m: u32,
    f: Poly,
    f1: Poly,
    f2: Poly,
    m_bound: f64,
    /// Sign of `f^(m+1)(0)`: orientation of the leading behavior at the origin.
    orientation: f64,
}

const VALIDATION_GRID: usize = 2001;
const ZERO_TOL: f64 = 1e-12;

impl FluxModel {
    /// Builds a flux from polynomial coefficients `c[0] + c[1] u + ...` and
    /// validates the declared shape on a grid of `[-M, M]`.
    pub fn new(kind: FluxKind, m: u32, coeffs: Vec<f64>, m_bound: f64) -> Result<Self> {
        if !(m_bound > 0.0) || !m_bound.is_finite() {
            return Err(Error::Invalid("working bound M must be positive and finite".into()));
        }
        let f = Poly::new(coeffs);
        let f1 = f.deriv();
        let f2 = f1.deriv();
        let model = FluxModel { kind, m, f, f1, f2, m_bound, orientation: 1.0 };
        model.validated()
    }

    /// The monomial flux `u^(m+1)/(m+1)` with the kind implied by `m`:
    /// `m = 1` is uniformly convex, odd `m >= 3` degenerate convex, and even
    /// `m >= 2` has the single inflection at the origin.
    pub fn monomial(m: u32, m_bound: f64) -> Result<Self> {
        let kind = match m {
            0 => return Err(Error::Invalid("degeneracy order must be at least 1".into())),
            1 => FluxKind::Convex,
            m if m % 2 == 1 => FluxKind::ConvexDegenerate,
            _ => FluxKind::NonConvexInflection,
        };
        Self::new(kind, m, Poly::monomial_flux(m).coeffs().to_vec(), m_bound)
    }

    /// Burgers flux `u^2/2`.
    pub fn burgers(m_bound: f64) -> Result<Self> {
        Self::monomial(1, m_bound)
    }

    /// Cubic flux `u^3/3` (single inflection, `m = 2`).
    pub fn cubic(m_bound: f64) -> Result<Self> {
        Self::monomial(2, m_bound)
    }

    /// Quartic flux `u^4/4` (degenerate convex, `m = 3`).
    pub fn quartic(m_bound: f64) -> Result<Self> {
        Self::monomial(3, m_bound)
    }

    /// Mixed quartic `u^3/3 + u^4/8`: single inflection with `m = 2` and an
    /// `f'` that is not an even function, so conjugate points are nontrivial.
    pub fn mixed_quartic(m_bound: f64) -> Result<Self> {
        Self::new(
            FluxKind::NonConvexInflection,
            2,
            vec![0.0, 0.0, 0.0, 1.0 / 3.0, 0.125],
            m_bound,
        )
    }

    fn validated(mut self) -> Result<Self> {
        let scale = self.f.coeffs().iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let tol = ZERO_TOL * scale;
        if self.f1.eval(0.0).abs() > tol {
            return Err(Error::Invalid("flux must satisfy f'(0) = 0".into()));
        }
        match self.kind {
            FluxKind::Convex => {
                if self.m != 1 {
                    return Err(Error::Invalid("convex kind requires m = 1".into()));
                }
                if self.f2.eval(0.0) <= tol {
                    return Err(Error::Invalid("convex kind requires f''(0) > 0".into()));
                }
            }
            FluxKind::ConvexDegenerate => {
                if self.m < 3 || self.m.is_multiple_of(2) {
                    return Err(Error::Invalid("degenerate convex kind requires odd m >= 3".into()));
                }
            }
            FluxKind::NonConvexInflection => {
                if self.m < 2 || self.m % 2 == 1 {
                    return Err(Error::Invalid("inflection kind requires even m >= 2".into()));
                }
            }
        }
        // Derivatives f^(j)(0) vanish for j = 1..=m; f^(m+1)(0) does not.
        let mut d = self.f1.clone();
        for j in 1..=self.m {
            if d.eval(0.0).abs() > tol {
                return Err(Error::Invalid(format!(
                    "derivative of order {j} must vanish at the origin for m = {}",
                    self.m
                )));
            }
            d = d.deriv();
        }
        let lead = d.eval(0.0);
        if lead.abs() <= tol {
            return Err(Error::Invalid(format!(
                "derivative of order {} must not vanish at the origin",
                self.m + 1
            )));
        }
        self.orientation = if lead > 0.0 { 1.0 } else { -1.0 };

        // Grid shape check away from the origin.
        let n = VALIDATION_GRID;
        for i in 0..=n {
            let u = -self.m_bound + 2.0 * self.m_bound * i as f64 / n as f64;
            if u == 0.0 {
                continue;
            }
            let c = self.f2.eval(u);
            match self.kind {
                FluxKind::Convex | FluxKind::ConvexDegenerate => {
                    if c <= 0.0 {
                        return Err(Error::Invalid(format!(
                            "f'' must be positive away from the origin; f''({u}) = {c}"
                        )));
                    }
                }
                FluxKind::NonConvexInflection => {
                    if c * u * self.orientation <= 0.0 {
                        return Err(Error::Invalid(format!(
                            "single-inflection shape violated at u = {u}: f'' = {c}"
                        )));
                    }
                }
            }
        }
        Ok(self)
    }

    pub fn kind(&self) -> FluxKind {
        self.kind
    }

    /// Degeneracy order `m` of `f'` at the origin.
    pub fn degeneracy(&self) -> u32 {
        self.m
    }

    /// Working amplitude bound `M`.
    pub fn bound(&self) -> f64 {
        self.m_bound
    }

    /// Sign of `f^(m+1)(0)`; for the inflection kind this fixes which side of
    /// the origin is convex.
    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Evaluates `f`, `f'`, or `f''`. Arguments outside `[-M, M]` are
    /// permitted (polynomials evaluate everywhere); the working bound only
    /// governs where the shape assumptions were validated.
    pub fn eval(&self, order: u8, u: f64) -> f64 {
        match order {
            0 => self.f.eval(u),
            1 => self.f1.eval(u),
            2 => self.f2.eval(u),
            _ => panic!("derivative order must be 0, 1, or 2"),
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    pub fn f1(&self, u: f64) -> f64 {
        self.f1.eval(u)
    }

    pub fn f2(&self, u: f64) -> f64 {
        self.f2.eval(u)
    }

    pub fn poly(&self) -> &Poly {
        &self.f
    }

    /// `sup |f'|` over `[-M, M]`. Exact: `f'` is monotone on each side of the
    /// origin for every admitted kind, so the supremum sits at an endpoint.
    pub fn fprime_max(&self) -> f64 {
        self.f1.eval(self.m_bound).abs().max(self.f1.eval(-self.m_bound).abs())
    }

    /// If the flux is a single term `c * u^(m+1)`, returns `c`.
    pub fn single_term_coeff(&self) -> Option<f64> {
        let cs = self.f.coeffs();
        let deg = self.m as usize + 1;
        if cs.len() != deg + 1 {
            return None;
        }
        if cs[..deg].iter().any(|&c| c != 0.0) {
            return None;
        }
        Some(cs[deg])
    }

    /// The reflected flux `g(u) = f(-u)`, which swaps the convex and concave
    /// sides. Solutions transform as `v(t, x) = -u(t, -x)`.
    pub fn reflected(&self) -> Self {
        let g = self.f.reflect();
        let g1 = g.deriv();
        let g2 = g1.deriv();
        FluxModel {
            kind: self.kind,
            m: self.m,
            f: g,
            f1: g1,
            f2: g2,
            m_bound: self.m_bound,
            orientation: self.orientation * if self.m.is_multiple_of(2) { -1.0 } else { 1.0 },
        }
    }

    /// Inverse of `f'` restricted to `[0, M]` (`branch = +1`) or `[-M, 0]`
    /// (`branch = -1`). `f'` is strictly monotone on each branch, so the
    /// preimage is unique; the residual `|f'(u) - y|` is at most `1e-12`
    /// relative to the branch scale.
    ///
    /// Returns a `Range` error when `y` lies outside the branch image (beyond
    /// a `1e-9` relative slack, within which the result clamps to the branch).
    pub fn branch_inverse(&self, branch: i8, y: f64) -> Result<f64> {
        let (lo, hi) = match branch {
            1 => (0.0, self.m_bound),
            -1 => (-self.m_bound, 0.0),
            _ => return Err(Error::Invalid("branch must be -1 or +1".into())),
        };
        let (ylo, yhi) = (self.f1.eval(lo), self.f1.eval(hi));
        let (ymin, ymax) = (ylo.min(yhi), ylo.max(yhi));
        let slack = 1e-9 * (1.0 + ymax.abs().max(ymin.abs()));
        if y < ymin - slack || y > ymax + slack {
            return Err(Error::Range(format!(
                "value {y} outside branch image [{ymin}, {ymax}]"
            )));
        }
        let y = y.clamp(ymin, ymax);
        if let Some(c) = self.single_term_coeff() {
            // f' = c (m+1) u^m: invert the power directly.
            let a = c * (self.m as f64 + 1.0);
            let t = y / a;
            let mag = t.abs().powf(1.0 / self.m as f64);
            let u = if self.m % 2 == 1 {
                // odd power: sign follows t
                mag.copysign(t)
            } else {
                // even power: sign chosen by the branch
                if branch == 1 {
                    mag
                } else {
                    -mag
                }
            };
            return Ok(u.clamp(lo, hi));
        }
        let increasing = yhi >= ylo;
        let g = |u: f64| {
            let d = self.f1.eval(u) - y;
            if increasing {
                d
            } else {
                -d
            }
        };
        Ok(crate::util::bisect_increasing(g, lo, hi, 1e-15 * self.m_bound.max(1.0)))
    }

    /// Conjugate point of `u` for the inflection kind: the unique point on
    /// the opposite side of the origin where `f'` takes the same value, with
    /// the origin mapped to itself.
    pub fn conjugate_point(&self, u: f64) -> Result<f64> {
        if self.kind != FluxKind::NonConvexInflection {
            return Err(Error::Kind("conjugate points exist only for the inflection kind".into()));
        }
        if u.abs() > self.m_bound * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|u| = {} exceeds M = {}", u.abs(), self.m_bound)));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        if self.single_term_coeff().is_some() {
            // even f': mirror image.
            return Ok(-u);
        }
        let target = self.f1.eval(u);
        let branch = if u > 0.0 { -1 } else { 1 };
        match self.branch_inverse(branch, target) {
            Ok(p) => Ok(p),
            Err(Error::Range(_)) => Err(Error::Range(format!(
                "conjugate point of {u} lies outside the working range [-{M}, {M}]",
                M = self.m_bound
            ))),
            Err(e) => Err(e),
        }
    }

    /// Maximum of `|f''|` over `[a, b]`, by dense grid with local refinement;
    /// exact endpoint evaluation covers the monomial case where `|f''|` is
    /// monotone in `|u|`.
    pub fn max_abs_f2(&self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b);
        if self.single_term_coeff().is_some() {
            return self.f2.eval(a).abs().max(self.f2.eval(b).abs());
        }
        let n = 4096;
        let mut best = f64::NEG_INFINITY;
        let mut best_u = a;
        for i in 0..=n {
            let u = a + (b - a) * i as f64 / n as f64;
            let v = self.f2.eval(u).abs();
            if v > best {
                best = v;
                best_u = u;
            }
        }
        let w = (b - a) / n as f64;
        let lo = (best_u - w).max(a);
        let hi = (best_u + w).min(b);
        let refined = crate::util::golden_min(|u| -self.f2.eval(u).abs(), lo, hi, 1e-14 * (1.0 + b - a));
        best.max(self.f2.eval(refined).abs())
    }
}

/// JSON specification of a flux: either the full coefficient form
/// `{"kind": "...", "m": 2, "coeffs": [c0, ...], "M": 1.0}` or a named form
/// `{"name": "burgers" | "cubic" | "quartic" | "mixed_quartic" | "monomial",
///   "m": 3, "M": 1.0}` where `m` is consulted only by `monomial`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FluxSpec {
    Full { kind: FluxKind, m: u32, coeffs: Vec<f64>, #[serde(rename = "M")] m_bound: f64 },
    Named {
        name: String,
        #[serde(default)]
        m: Option<u32>,
        #[serde(rename = "M")]
        m_bound: f64,
    },
}

impl FluxSpec {
    pub fn build(&self) -> Result<FluxModel> {
        match self {
            FluxSpec::Full { kind, m, coeffs, m_bound } => {
                FluxModel::new(*kind, *m, coeffs.clone(), *m_bound)
            }
            FluxSpec::Named { name, m, m_bound } => match name.as_str() {
                "burgers" => FluxModel::burgers(*m_bound),
                "cubic" => FluxModel::cubic(*m_bound),
                "quartic" => FluxModel::quartic(*m_bound),
                "mixed_quartic" => FluxModel::mixed_quartic(*m_bound),
                "monomial" => {
                    let m = m.ok_or_else(|| {
                        Error::Invalid("monomial flux needs the field \"m\"".into())
                    })?;
                    FluxModel::monomial(m, *m_bound)
                }
                other => Err(Error::Invalid(format!("unknown flux name \"{other}\""))),
            },
        }
    }
}

/// Flux-derived constants: exact where the structure allows, grid-estimated
/// otherwise, plus the user-configurable multipliers entering the analytic
/// bounds (`c1_tv` scales the flux-variation bound, `c1`/`c2` the upper
/// entropy bounds).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluxConstants {
    /// `sup |f'|` over `[-M, M]`.
    pub fprime_m: f64,
    /// Inflection kind only: the grid minimum of
    /// `min{ (f'(u) - f'(u/2)) / f'(u), f'(u/2) / f'(u) }` over `[-M, M]`.
    pub kappa_m: Option<f64>,
    /// `kappa_m^2 / (kappa_m^2 + 2)`.
    pub kappa_tilde_m: Option<f64>,
    /// Inflection kind: `s^m / beta_m <= delta(s) <= beta_m s^m` on `(0, sigma_m]`.
    pub beta_m: Option<f64>,
    pub sigma_m: Option<f64>,
    /// `max(max |f''| on [0,s], max |f''| on [-s,0]) <= alpha_bar * s^(m-1)`
    /// on `(0, sigma_bar]`.
    pub alpha_bar: f64,
    pub sigma_bar: f64,
    /// Multiplier in the flux-variation bound `c1_tv * (1 + L/T)`.
    pub c1_tv: f64,
    /// Multiplier in the convex upper entropy bound.
    pub c1: f64,
    /// Multiplier in the inflection upper entropy bound.
    pub c2: f64,
}

/// Estimates the flux constants on a grid of at least 1000 points per side.
///
/// `kappa_m`, `kappa_tilde_m`, `beta_m`, and `sigma_m` are populated only for
/// the inflection kind. The multipliers `c1_tv`, `c1`, `c2` default to 1 and
/// are meant to be overwritten by calibration or configuration.
pub fn estimate_constants(flux: &FluxModel, grid_n: usize) -> Result<FluxConstants> {
    if grid_n < 1000 {
        return Err(Error::Param(format!("grid_n must be at least 1000, got {grid_n}")));
    }
    let m_bound = flux.bound();
    let m = flux.degeneracy();
    let fprime_m = flux.fprime_max();

    let (kappa_m, kappa_tilde_m, beta_m, sigma_m) = if flux.kind()
        == FluxKind::NonConvexInflection
    {
        let mut kappa = f64::INFINITY;
        for i in 1..=grid_n {
            let mag = m_bound * i as f64 / grid_n as f64;
            for u in [mag, -mag] {
                let fu = flux.f1(u).abs();
                let fh = flux.f1(0.5 * u).abs();
                if fu == 0.0 {
                    continue;
                }
                kappa = kappa.min((fu - fh) / fu).min(fh / fu);
            }
        }
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::Degenerate(format!(
                "kappa estimate {kappa} fell outside (0, 1)"
            )));
        }
        // Cross-check the normalized primitive bound |f(u)/(u f'(u))| <= 1 - kappa/2.
        for i in 1..=grid_n {
            let mag = m_bound * i as f64 / grid_n as f64;
            for u in [mag, -mag] {
                let denom = u * flux.f1(u);
                if denom == 0.0 {
                    continue;
                }
                let ratio = ((flux.f(u) - flux.f(0.0)) / denom).abs();
                if ratio > 1.0 - 0.5 * kappa + 1e-9 {
                    return Err(Error::Degenerate(format!(
                        "primitive ratio {ratio} at u = {u} exceeds 1 - kappa/2"
                    )));
                }
            }
        }
        let kt = kappa * kappa / (kappa * kappa + 2.0);
        let sigma = m_bound;
        let mut beta = 1.0f64;
        for i in 1..=200 {
            let s = sigma * i as f64 / 200.0;
            let d = crate::delta::delta(flux, s)?;
            let sm = s.powi(m as i32);
            beta = beta.max(d / sm).max(sm / d);
        }
        (Some(kappa), Some(kt), Some(beta), Some(sigma))
    } else {
        (None, None, None, None)
    };

    // alpha_bar: running max of |f''| against s^(m-1), both sides.
    let sigma_bar = m_bound;
    let mut alpha_bar = 0.0f64;
    let mut run_pos = 0.0f64;
    let mut run_neg = 0.0f64;
    for i in 1..=grid_n {
        let s = m_bound * i as f64 / grid_n as f64;
        run_pos = run_pos.max(flux.f2(s).abs());
        run_neg = run_neg.max(flux.f2(-s).abs());
        let denom = s.powi(m as i32 - 1);
        alpha_bar = alpha_bar.max(run_pos.max(run_neg) / denom);
    }

    Ok(FluxConstants {
        fprime_m,
        kappa_m,
        kappa_tilde_m,
        beta_m,
        sigma_m,
        alpha_bar,
        sigma_bar,
        c1_tv: 1.0,
        c1: 1.0,
        c2: 1.0,
    })
}
