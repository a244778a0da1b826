//! Quantized grid covers of derivative profiles and pullback covers of
//! evolved solutions, plus the closed-form upper entropy bounds.
//!
//! The cover machinery works on `f' ∘ u` rather than on `u` itself: bounded
//! variation of the composed profile makes a cell/value quantization an
//! `eps`-cover, and the profile is pulled back through the inverse of `f'`
//! (globally for convex kinds, branch by branch with a sign tuple for the
//! inflection kind). Families are never materialized; only an assignment map
//! and a log2 cardinality bound are exposed.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::delta::{delta, delta_inverse};
use crate::error::{Error, Result};
use crate::flux::{FluxConstants, FluxKind, FluxModel};
use crate::pwc::PiecewiseConstantFn;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Geometry of a quantized cover: `n_cells` uniform cells on
/// `[-l_half, l_half]`, cell values quantized at step `eps / (4 l_half)` with
/// `q_levels` levels per side, within `[-v_amp, v_amp]` (`[0, v_amp]` when
/// `nonneg`). `value_cap` optionally tightens the clamp below `v_amp` so
/// assigned values stay inside the image of `f'` when `v_amp` exceeds it.
#[derive(Debug, Clone, Serialize)]
pub struct GridCoverSpec {
    pub l_half: f64,
    pub v_amp: f64,
    pub n_cells: usize,
    pub q_levels: usize,
    pub eps: f64,
    pub nonneg: bool,
    value_cap: f64,
}

impl GridCoverSpec {
    /// Builds the spec with the smallest admissible cell count
    /// `floor(8 l_half v_amp / eps)` and the canonical quantization step.
    ///
    /// Requires `eps <= v_amp * l_half / 3`; returns a `Param` error above
    /// that threshold.
    pub fn new(l_half: f64, v_amp: f64, eps: f64, nonneg: bool) -> Result<Self> {
        if !(l_half > 0.0 && l_half.is_finite()) || !(v_amp > 0.0 && v_amp.is_finite()) {
            return Err(Error::Invalid(format!(
                "window and amplitude must be positive, got {l_half} and {v_amp}"
            )));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Invalid(format!("eps must be positive, got {eps}")));
        }
        if eps > v_amp * l_half / 3.0 {
            return Err(Error::Param(format!(
                "eps = {eps} exceeds v_amp * l_half / 3 = {}",
                v_amp * l_half / 3.0
            )));
        }
        let n_cells = ((8.0 * l_half * v_amp / eps).floor() as usize).max(1);
        let q_step = eps / (4.0 * l_half);
        let q_levels = (v_amp / q_step).ceil() as usize;
        Ok(GridCoverSpec { l_half, v_amp, n_cells, q_levels, eps, nonneg, value_cap: v_amp })
    }

    /// Raises the cell count (the quantization step is unchanged). Counts
    /// below the minimum `floor(8 l_half v_amp / eps)` are rejected.
    pub fn with_cells(mut self, n_cells: usize) -> Result<Self> {
        let floor = ((8.0 * self.l_half * self.v_amp / self.eps).floor() as usize).max(1);
        if n_cells < floor {
            return Err(Error::Param(format!(
                "n_cells = {n_cells} below the admissible minimum {floor}"
            )));
        }
        self.n_cells = n_cells;
        Ok(self)
    }

    /// Clamps assigned values to `[-cap, cap]` (or `[0, cap]` when `nonneg`)
    /// instead of the full amplitude.
    pub fn with_value_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap <= self.v_amp) {
            return Err(Error::Param(format!(
                "value cap {cap} must lie in (0, {}]",
                self.v_amp
            )));
        }
        self.value_cap = cap;
        Ok(self)
    }

    pub fn q_step(&self) -> f64 {
        self.eps / (4.0 * self.l_half)
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.l_half / self.n_cells as f64
    }

    /// Grid node `x_nu = -l_half + 2 l_half nu / n_cells`.
    pub fn grid_point(&self, nu: usize) -> f64 {
        debug_assert!(nu <= self.n_cells);
        -self.l_half + 2.0 * self.l_half * nu as f64 / self.n_cells as f64
    }

    fn window_contains(&self, u: &PiecewiseConstantFn) -> bool {
        match u.support() {
            None => true,
            Some((a, b)) => {
                let slack = 1e-9 * (1.0 + self.l_half);
                a >= -self.l_half - slack && b <= self.l_half + slack
            }
        }
    }

    /// Left-endpoint cell samples of `u` over the grid, in one merge walk.
    fn sample_cells(&self, u: &PiecewiseConstantFn) -> Vec<f64> {
        let bx = u.breakpoints();
        let bv = u.values();
        let mut out = Vec::with_capacity(self.n_cells);
        let mut j = 0usize;
        for nu in 0..self.n_cells {
            let x = self.grid_point(nu);
            while j < bv.len() && bx[j + 1] <= x {
                j += 1;
            }
            let val = if j < bv.len() && bx[j] <= x { bv[j] } else { 0.0 };
            out.push(val);
        }
        out
    }

    fn pwc_from_cell_values(&self, vals: Vec<f64>) -> PiecewiseConstantFn {
        let mut xs = Vec::with_capacity(self.n_cells + 1);
        for nu in 0..=self.n_cells {
            xs.push(self.grid_point(nu));
        }
        PiecewiseConstantFn::from_degenerate(xs, vals)
    }
}

/// Branch selector per grid cell for inverting an even derivative profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignTuple {
    iota: Vec<i8>,
}

impl SignTuple {
    pub fn new(iota: Vec<i8>, spec: &GridCoverSpec) -> Result<Self> {
        if iota.len() != spec.n_cells {
            return Err(Error::Invalid(format!(
                "sign tuple length {} does not match the {} grid cells",
                iota.len(),
                spec.n_cells
            )));
        }
        if iota.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Invalid("sign tuple entries must be -1 or +1".into()));
        }
        Ok(SignTuple { iota })
    }

    /// Signs of `u` at the left cell endpoints, with `sign(0)` fixed to `+1`
    /// (either branch inverts a zero derivative value to zero, so the choice
    /// does not affect reconstruction).
    pub fn from_sample(u: &PiecewiseConstantFn, spec: &GridCoverSpec) -> Self {
        let iota = spec
            .sample_cells(u)
            .into_iter()
            .map(|v| if v < 0.0 { -1 } else { 1 })
            .collect();
        SignTuple { iota }
    }

    pub fn iota(&self) -> &[i8] {
        &self.iota
    }
}

/// Projects `u` onto the cover grid: the value on each cell is the right
/// limit of `u` at the cell's left endpoint, zero outside the window.
pub fn project_pn(u: &PiecewiseConstantFn, spec: &GridCoverSpec) -> Result<PiecewiseConstantFn> {
    if !spec.window_contains(u) {
        let (a, b) = u.support().unwrap();
        return Err(Error::Support(format!(
            "support [{a}, {b}] exceeds the window [-{l}, {l}]",
            l = spec.l_half
        )));
    }
    Ok(spec.pwc_from_cell_values(spec.sample_cells(u)))
}

/// Inverts a nonnegative derivative profile cell by cell through the branch
/// of `f'` selected by `iota`, for the inflection kind.
///
/// Cell values outside the selected branch image produce a `Range` error.
pub fn reconstruct_t_iota(
    g: &PiecewiseConstantFn,
    iota: &SignTuple,
    flux: &FluxModel,
    spec: &GridCoverSpec,
) -> Result<PiecewiseConstantFn> {
    if flux.kind() != FluxKind::NonConvexInflection {
        return Err(Error::Kind(
            "branch reconstruction applies only to the inflection kind".into(),
        ));
    }
    if iota.iota.len() != spec.n_cells {
        return Err(Error::Invalid(format!(
            "sign tuple length {} does not match the {} grid cells",
            iota.iota.len(),
            spec.n_cells
        )));
    }
    let samples = spec.sample_cells(g);
    let mut cache: HashMap<(u64, i8), f64> = HashMap::new();
    let mut vals = Vec::with_capacity(spec.n_cells);
    for (nu, &y) in samples.iter().enumerate() {
        let branch = iota.iota[nu];
        let key = (y.to_bits(), branch);
        let v = match cache.get(&key) {
            Some(&v) => v,
            None => {
                let v = flux.branch_inverse(branch, y)?;
                cache.insert(key, v);
                v
            }
        };
        vals.push(v);
    }
    Ok(spec.pwc_from_cell_values(vals))
}

/// A lazily enumerated cover: quantized cell functions addressed by their
/// level codes, with the closed-form log2 cardinality bound.
#[derive(Debug, Clone)]
pub struct GridCover {
    pub spec: GridCoverSpec,
    pub log2_bound: f64,
}

/// Validates the spec and attaches the `48 v_amp l_half / eps` bound.
pub fn build_grid_cover(spec: GridCoverSpec) -> Result<GridCover> {
    if spec.eps > spec.v_amp * spec.l_half / 3.0 {
        return Err(Error::Param(format!(
            "eps = {} exceeds v_amp * l_half / 3 = {}",
            spec.eps,
            spec.v_amp * spec.l_half / 3.0
        )));
    }
    let log2_bound = 48.0 * spec.v_amp * spec.l_half / spec.eps;
    Ok(GridCover { spec, log2_bound })
}

impl GridCover {
    /// Nearest cover element to `g`: cell sampling followed by per-value
    /// quantization, returned with the integer level codes identifying the
    /// element. Functions reaching outside the window are rejected.
    pub fn assign(&self, g: &PiecewiseConstantFn) -> Result<(PiecewiseConstantFn, Vec<i64>)> {
        if !self.spec.window_contains(g) {
            let (a, b) = g.support().unwrap();
            return Err(Error::Support(format!(
                "support [{a}, {b}] exceeds the window [-{l}, {l}]",
                l = self.spec.l_half
            )));
        }
        let q = self.spec.q_step();
        let k_hi = (self.spec.value_cap / q + 1e-12).floor() as i64;
        let k_lo = if self.spec.nonneg { 0 } else { -k_hi };
        let mut codes = Vec::with_capacity(self.spec.n_cells);
        let mut vals = Vec::with_capacity(self.spec.n_cells);
        for v in self.spec.sample_cells(g) {
            let k = ((v / q).round() as i64).clamp(k_lo, k_hi);
            codes.push(k);
            vals.push(k as f64 * q);
        }
        Ok((self.spec.pwc_from_cell_values(vals), codes))
    }
}

/// Outcome of covering a batch of evolved profiles: the radius actually used
/// on the derivative side, the realized element count, and the analytic
/// cardinality bound at the requested radius.
#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub eps: f64,
    pub eps_prime: f64,
    pub n_cells: usize,
    pub samples: usize,
    pub distinct_elements: usize,
    pub realized_log2: f64,
    pub analytic_log2: f64,
    pub max_distance: f64,
}

fn fprime_inverse(flux: &FluxModel, y: f64) -> Result<f64> {
    flux.branch_inverse(if y >= 0.0 { 1 } else { -1 }, y)
}

fn kind_v_amp(l_over_t: f64, fprime_m: f64, constants: &FluxConstants) -> f64 {
    (constants.c1_tv * (1.0 + l_over_t) / 2.0).max(fprime_m)
}

/// Covers evolved profiles within `eps`: assigns each sample's derivative
/// profile to a grid cover element at the pullback radius and verifies the
/// reconstructed function is within `eps` of the sample in L1.
///
/// Convex kinds invert `f'` globally; the inflection kind uses the cell count
/// demanded by the projection/reconstruction error budget and a per-sample
/// sign tuple. Returns a `Coverage` error listing any sample that ends up
/// farther than `eps` from its assigned element.
pub fn cover_solution_set(
    flux: &FluxModel,
    l_dom: f64,
    m_bound: f64,
    t_final: f64,
    eps: f64,
    samples: &[PiecewiseConstantFn],
    constants: &FluxConstants,
) -> Result<CoverReport> {
    if !(l_dom > 0.0 && t_final > 0.0 && eps > 0.0) {
        return Err(Error::Invalid(format!(
            "domain half-width {l_dom}, horizon {t_final}, and eps {eps} must be positive"
        )));
    }
    if (m_bound - flux.bound()).abs() > 1e-12 * flux.bound().max(1.0) {
        return Err(Error::Invalid(format!(
            "amplitude bound {m_bound} does not match the flux working range {}",
            flux.bound()
        )));
    }
    let fpm = flux.fprime_max();
    let window = l_dom + t_final * fpm;
    let v_amp = kind_v_amp(l_dom / t_final, fpm, constants);
    let c1l = constants.c1_tv * (1.0 + l_dom / t_final);
    let analytic_log2 = analytic_upper_bound(flux, l_dom, m_bound, t_final, eps, constants)?;

    enum Route {
        Convex,
        Inflection,
    }
    let (route, eps_prime, spec) = if flux.kind().is_convex() {
        let eps_prime = crate::delta::delta_hat(flux, eps / (1.0 + 2.0 * window))?;
        let spec = GridCoverSpec::new(window, v_amp, eps_prime, false)?.with_value_cap(fpm)?;
        (Route::Convex, eps_prime, spec)
    } else {
        let kt = constants.kappa_tilde_m.ok_or_else(|| {
            Error::Param("inflection cover needs kappa_tilde_m in the constants".into())
        })?;
        let eps_prime = 0.5 * delta(flux, eps / (2.0 + 4.0 * window))?;
        let floor1 = 1.0 / delta(flux, kt * eps / (8.0 * window * (2.0 * kt + c1l)))?;
        let floor2 = 8.0 * window * v_amp / eps_prime;
        let floor3 = 4.0 * window * c1l / eps_prime;
        let n = floor1.max(floor2).max(floor3).floor() as usize;
        let spec = GridCoverSpec::new(window, v_amp, eps_prime, true)?
            .with_value_cap(fpm)?
            .with_cells(n.max(1))?;
        (Route::Inflection, eps_prime, spec)
    };
    let cover = build_grid_cover(spec)?;

    // Assigned elements are identified by digests of their code and sign
    // vectors rather than the vectors themselves; on inflection fluxes the
    // grids run to millions of cells and keeping one vector per sample would
    // dominate memory. A 64-bit collision can only undercount the realized
    // family, which the reported inequality tolerates.
    fn fnv1a(h: u64, byte: u8) -> u64 {
        (h ^ byte as u64).wrapping_mul(0x100_0000_01b3)
    }
    fn digest_codes(xs: &[i64]) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for x in xs {
            for b in x.to_le_bytes() {
                h = fnv1a(h, b);
            }
        }
        h
    }
    fn digest_signs(xs: &[i8]) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for &x in xs {
            h = fnv1a(h, x as u8);
        }
        h
    }

    let run_one = |u: &PiecewiseConstantFn| -> Result<(u64, u64, f64)> {
        let g = u.map_values(|v| flux.f1(v));
        let (g_hat, codes) = cover.assign(&g)?;
        let (pulled, iota) = match route {
            Route::Convex => {
                let mut cache: HashMap<u64, f64> = HashMap::new();
                let mut vals = Vec::with_capacity(g_hat.values().len());
                for &y in g_hat.values() {
                    let v = match cache.get(&y.to_bits()) {
                        Some(&v) => v,
                        None => {
                            let v = fprime_inverse(flux, y)?;
                            cache.insert(y.to_bits(), v);
                            v
                        }
                    };
                    vals.push(v);
                }
                let bx = g_hat.breakpoints().to_vec();
                (PiecewiseConstantFn::from_degenerate(bx, vals), Vec::new())
            }
            Route::Inflection => {
                let tuple = SignTuple::from_sample(u, &cover.spec);
                let rec = reconstruct_t_iota(&g_hat, &tuple, flux, &cover.spec)?;
                (rec, tuple.iota)
            }
        };
        Ok((digest_codes(&codes), digest_signs(&iota), u.l1_distance(&pulled)))
    };

    #[cfg(feature = "parallel")]
    let rows: Result<Vec<_>> = samples.par_iter().map(run_one).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<_>> = samples.iter().map(run_one).collect();
    let rows = rows?;

    let mut elements: HashSet<(u64, u64)> = HashSet::new();
    let mut max_distance = 0.0f64;
    let mut uncovered = Vec::new();
    for (i, (codes, iota, dist)) in rows.into_iter().enumerate() {
        elements.insert((codes, iota));
        max_distance = max_distance.max(dist);
        if dist > eps * (1.0 + 1e-12) {
            uncovered.push(i);
        }
    }
    if !uncovered.is_empty() {
        return Err(Error::Coverage { uncovered, total: samples.len() });
    }
    let distinct = elements.len().max(1);
    Ok(CoverReport {
        eps,
        eps_prime,
        n_cells: cover.spec.n_cells,
        samples: samples.len(),
        distinct_elements: if samples.is_empty() { 0 } else { distinct },
        realized_log2: if samples.is_empty() { 0.0 } else { (distinct as f64).log2() },
        analytic_log2,
        max_distance,
    })
}

/// Closed-form upper entropy bound at radius `eps`.
///
/// Convex kinds: `c1 (L + T + L^2/T) / delta(eps / (c1 (1 + L + T)))`.
/// Inflection kind: `c2 (1 + L + T + L^2/T)^(m+1) / eps^m`. The `Param`
/// error signals an `eps` too large for the formula's validity window.
pub fn analytic_upper_bound(
    flux: &FluxModel,
    l_dom: f64,
    _m_bound: f64,
    t_final: f64,
    eps: f64,
    constants: &FluxConstants,
) -> Result<f64> {
    if !(l_dom > 0.0 && t_final > 0.0 && eps > 0.0) {
        return Err(Error::Invalid(format!(
            "domain half-width {l_dom}, horizon {t_final}, and eps {eps} must be positive"
        )));
    }
    let window = l_dom + t_final * flux.fprime_max();
    let gamma_big = constants.c1 * (l_dom + t_final + l_dom * l_dom / t_final);
    if flux.kind().is_convex() {
        let cap = (1.0 + 2.0 * window) * delta_inverse(flux, gamma_big / 124.0, true)?;
        if eps >= cap {
            return Err(Error::Param(format!(
                "eps = {eps} outside the validity window (needs eps < {cap})"
            )));
        }
        let gamma_small = constants.c1 * (1.0 + l_dom + t_final);
        Ok(gamma_big / delta(flux, eps / gamma_small)?)
    } else {
        let cap = (2.0 + 4.0 * window) * delta_inverse(flux, gamma_big / 144.0, false)?;
        if eps >= cap {
            return Err(Error::Param(format!(
                "eps = {eps} outside the validity window (needs eps < {cap})"
            )));
        }
        let m = flux.degeneracy() as i32;
        let base = 1.0 + l_dom + t_final + l_dom * l_dom / t_final;
        Ok(constants.c2 * base.powi(m + 1) / eps.powi(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::estimate_constants;

    fn small_spec() -> GridCoverSpec {
        // floor(8 * 0.5 * 0.3 / 0.04) = 30 cells on [-0.5, 0.5].
        GridCoverSpec::new(0.5, 0.3, 0.04, false).unwrap()
    }

    #[test]
    fn projection_is_identity_on_cell_constant_functions() {
        let spec = small_spec();
        let w = spec.cell_width();
        let u = PiecewiseConstantFn::new(
            vec![spec.grid_point(2), spec.grid_point(2) + w, spec.grid_point(2) + 2.0 * w],
            vec![0.2, -0.1],
        )
        .unwrap();
        let p = project_pn(&u, &spec).unwrap();
        assert_eq!(p.l1_distance(&u), 0.0);
        let z = project_pn(&PiecewiseConstantFn::zero(), &spec).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn projection_takes_left_endpoint_values() {
        // Ramp-like function with 100 steps against direct evaluation on a
        // 4-cell grid.
        let n = 100;
        let xs: Vec<f64> = (0..=n).map(|i| -0.5 + i as f64 / n as f64).collect();
        let vs: Vec<f64> = (0..n).map(|i| 0.3 * (i as f64 / n as f64) - 0.1).collect();
        let u = PiecewiseConstantFn::new(xs, vs).unwrap();
        let mut spec = small_spec();
        spec.n_cells = 4;
        let p = project_pn(&u, &spec).unwrap();
        for nu in 0..4 {
            let x = spec.grid_point(nu);
            assert_eq!(p.eval_right(x), u.eval_right(x), "cell {nu}");
        }
    }

    #[test]
    fn projection_rejects_oversized_support() {
        let spec = small_spec();
        let u = PiecewiseConstantFn::step(-2.0, 2.0, 0.1).unwrap();
        assert!(matches!(project_pn(&u, &spec), Err(Error::Support(_))));
    }

    #[test]
    fn reconstruction_inverts_the_selected_branch() {
        let flux = FluxModel::cubic(1.0).unwrap();
        let spec = small_spec();
        let (a, b) = (spec.grid_point(3), spec.grid_point(4));
        let g = PiecewiseConstantFn::step(a, b, 0.25).unwrap();
        let plus = SignTuple::new(vec![1; spec.n_cells], &spec).unwrap();
        let rec = reconstruct_t_iota(&g, &plus, &flux, &spec).unwrap();
        assert!((rec.eval_right(a) - 0.5).abs() < 1e-12);
        let minus = SignTuple::new(vec![-1; spec.n_cells], &spec).unwrap();
        let rec = reconstruct_t_iota(&g, &minus, &flux, &spec).unwrap();
        assert!((rec.eval_right(a) + 0.5).abs() < 1e-12);
        let zero = reconstruct_t_iota(&PiecewiseConstantFn::zero(), &plus, &flux, &spec).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn reconstruction_guards_kind_and_range() {
        let spec = small_spec();
        let plus = SignTuple::new(vec![1; spec.n_cells], &spec).unwrap();
        let burgers = FluxModel::burgers(1.0).unwrap();
        let g = PiecewiseConstantFn::step(spec.grid_point(0), spec.grid_point(1), 0.2).unwrap();
        assert!(matches!(
            reconstruct_t_iota(&g, &plus, &burgers, &spec),
            Err(Error::Kind(_))
        ));
        let cubic = FluxModel::cubic(1.0).unwrap();
        let too_big = PiecewiseConstantFn::step(spec.grid_point(0), spec.grid_point(1), 3.0).unwrap();
        assert!(matches!(
            reconstruct_t_iota(&too_big, &plus, &cubic, &spec),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn grid_cover_matches_the_closed_form_bound() {
        let spec = GridCoverSpec::new(1.0, 1.0, 1.0 / 3.0, false).unwrap();
        let cover = build_grid_cover(spec).unwrap();
        assert_eq!(cover.log2_bound, 144.0);
        let spec = GridCoverSpec::new(1.0, 1.0, 0.1, false).unwrap();
        assert!(spec.n_cells >= 80);
        assert!(matches!(
            GridCoverSpec::new(1.0, 1.0, 0.5, false),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn assignment_lands_within_eps_of_admissible_functions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let spec = GridCoverSpec::new(1.0, 1.0, 0.2, false).unwrap();
        let cover = build_grid_cover(spec).unwrap();
        for _ in 0..20 {
            // Random staircase with TV kept under 2 v_amp by bounded steps.
            let pieces = rng.gen_range(3..30);
            let xs: Vec<f64> = {
                let mut xs: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(-1.0..1.0)).collect();
                xs.sort_by(f64::total_cmp);
                xs.dedup();
                xs
            };
            if xs.len() < 2 {
                continue;
            }
            let mut vs = vec![0.0f64; xs.len() - 1];
            let mut budget = 1.6f64;
            let mut level = 0.0f64;
            for v in vs.iter_mut() {
                let step: f64 = rng.gen_range(-0.3..0.3);
                let step = step.clamp(-budget / 2.0, budget / 2.0);
                level = (level + step).clamp(-1.0, 1.0);
                budget -= step.abs();
                *v = level;
            }
            let g = PiecewiseConstantFn::new(xs, vs).unwrap();
            let (assigned, _) = cover.assign(&g).unwrap();
            assert!(
                g.l1_distance(&assigned) <= 0.2,
                "assignment missed: {}",
                g.l1_distance(&assigned)
            );
        }
    }

    #[test]
    fn analytic_bound_matches_frozen_values() {
        let burgers = FluxModel::burgers(1.0).unwrap();
        let c = estimate_constants(&burgers, 1000).unwrap();
        let b = analytic_upper_bound(&burgers, 1.0, 1.0, 1.0, 0.01, &c).unwrap();
        assert!((b - 900.0).abs() < 1e-9, "got {b}");
        let half = analytic_upper_bound(&burgers, 1.0, 1.0, 1.0, 0.02, &c).unwrap();
        assert!((half - 450.0).abs() < 1e-9);

        let cubic = FluxModel::cubic(1.0).unwrap();
        let c = estimate_constants(&cubic, 1000).unwrap();
        let b = analytic_upper_bound(&cubic, 1.0, 1.0, 1.0, 0.1, &c).unwrap();
        assert!((b - 6400.0).abs() < 1e-9, "got {b}");

        assert!(matches!(
            analytic_upper_bound(&burgers, 1.0, 1.0, 1.0, 50.0, &c3_burgers()),
            Err(Error::Param(_)) | Err(Error::Range(_))
        ));
    }

    fn c3_burgers() -> FluxConstants {
        let burgers = FluxModel::burgers(1.0).unwrap();
        estimate_constants(&burgers, 1000).unwrap()
    }

    #[test]
    fn covers_evolved_burgers_profiles() {
        let flux = FluxModel::burgers(1.0).unwrap();
        let constants = estimate_constants(&flux, 1000).unwrap();
        let mut samples = Vec::new();
        for k in 0..6 {
            let u0 = PiecewiseConstantFn::new(
                vec![-0.8, -0.2, 0.3, 0.9],
                vec![0.2 + 0.1 * k as f64, -0.4, 0.3],
            )
            .unwrap();
            samples.push(crate::tracking::evolve(&flux, &u0, 1.0, 1e-3).unwrap());
        }
        let report = cover_solution_set(&flux, 1.0, 1.0, 1.0, 0.1, &samples, &constants).unwrap();
        assert_eq!(report.samples, 6);
        assert!(report.max_distance <= 0.1);
        assert!(report.realized_log2 <= report.analytic_log2);
        let empty =
            cover_solution_set(&flux, 1.0, 1.0, 1.0, 0.1, &[], &constants).unwrap();
        assert_eq!(empty.distinct_elements, 0);
        assert_eq!(empty.realized_log2, 0.0);
    }

    #[test]
    fn covers_evolved_inflection_profiles() {
        let flux = FluxModel::mixed_quartic(1.0).unwrap();
        let constants = estimate_constants(&flux, 1000).unwrap();
        let mut samples = Vec::new();
        for k in 0..4 {
            let u0 = PiecewiseConstantFn::new(
                vec![-0.7, -0.1, 0.4, 0.8],
                vec![-0.3, 0.5 - 0.08 * k as f64, -0.2],
            )
            .unwrap();
            samples.push(crate::tracking::evolve(&flux, &u0, 1.0, 1e-3).unwrap());
        }
        let report = cover_solution_set(&flux, 1.0, 1.0, 1.0, 0.8, &samples, &constants).unwrap();
        assert!(report.max_distance <= 0.8, "max distance {}", report.max_distance);
        assert!(report.realized_log2 <= report.analytic_log2);
    }
}
