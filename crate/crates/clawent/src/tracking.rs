//! Wavefront tracking: the entropy-solution semigroup on piecewise-constant
//! data.
//!
//! The solution is a chain of moving fronts; between fronts the state is
//! constant. Collisions are processed in time order from an event queue,
//! each one replaced by the fan of the local Riemann problem between the
//! outermost states of the colliding group. Because rarefaction chopping
//! uses a global value lattice, restarting from an emitted profile
//! reproduces the same fronts, and the piecewise-constant integral is
//! conserved exactly up to rounding.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::pwc::PiecewiseConstantFn;
use crate::riemann::{riemann, WaveKind};

/// Cap on processed collisions before evolution aborts with a stall error;
/// generous for desk-scale runs, a guard against pathologically fine lattices.
pub const DEFAULT_EVENT_BUDGET: u64 = 10_000_000;

const NIL: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Front {
    x_ref: f64,
    t_ref: f64,
    speed: f64,
    left: f64,
    right: f64,
    kind: WaveKind,
    prev: usize,
    next: usize,
    alive: bool,
}

impl Front {
    fn position(&self, t: f64) -> f64 {
        self.x_ref + self.speed * (t - self.t_ref)
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    x: f64,
    left: usize,
    right: usize,
    seq: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap pops the "largest": rank earlier times first, ties
        // resolved left to right, then by insertion order.
        other
            .time
            .total_cmp(&self.time)
            .then(other.x.total_cmp(&self.x))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Snapshot of one front for admissibility and structure checks.
#[derive(Debug, Clone, Copy)]
pub struct FrontInfo {
    pub position: f64,
    pub left: f64,
    pub right: f64,
    pub speed: f64,
    pub kind: WaveKind,
}

/// Solution state at the current time: the front chain, the pending
/// collision queue, and the lattice resolution used for all fans.
pub struct FrontState {
    flux: FluxModel,
    fronts: Vec<Front>,
    head: usize,
    queue: BinaryHeap<Event>,
    time: f64,
    delta: f64,
    seq: u64,
    budget: u64,
    events_processed: u64,
    x_tol: f64,
}

impl FrontState {
    /// Builds the initial chain at time zero by solving a Riemann problem at
    /// every jump of `u0` (including the jumps from and to zero at the
    /// support edges).
    pub fn new(flux: &FluxModel, u0: &PiecewiseConstantFn, delta: f64) -> Result<Self> {
        let m_bound = flux.bound();
        if u0.sup_norm() > m_bound * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "initial data exceeds the working bound {m_bound}"
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::Invalid(
                "lattice resolution delta must be positive".into(),
            ));
        }
        let span = u0
            .support()
            .map(|(a, b)| a.abs().max(b.abs()))
            .unwrap_or(0.0);
        let mut state = FrontState {
            flux: flux.clone(),
            fronts: Vec::new(),
            head: NIL,
            queue: BinaryHeap::new(),
            time: 0.0,
            delta,
            seq: 0,
            budget: DEFAULT_EVENT_BUDGET,
            events_processed: 0,
            x_tol: 1e-10 * span.max(1.0),
        };
        let xs = u0.breakpoints();
        let vs = u0.values();
        let mut prev = NIL;
        for (k, &x) in xs.iter().enumerate() {
            let left = if k == 0 { 0.0 } else { vs[k - 1] };
            let right = if k == xs.len() - 1 { 0.0 } else { vs[k] };
            let fan = riemann(flux, left, right, delta)?;
            for w in &fan.waves {
                let idx = state.fronts.len();
                state.fronts.push(Front {
                    x_ref: x,
                    t_ref: 0.0,
                    speed: w.speed,
                    left: w.left,
                    right: w.right,
                    kind: w.kind,
                    prev,
                    next: NIL,
                    alive: true,
                });
                if prev != NIL {
                    state.fronts[prev].next = idx;
                } else {
                    state.head = idx;
                }
                prev = idx;
            }
        }
        let mut idx = state.head;
        while idx != NIL {
            let next = state.fronts[idx].next;
            if next != NIL {
                state.schedule_pair(idx, next);
            }
            idx = next;
        }
        Ok(state)
    }

    /// Replaces the collision budget (counted in processed events).
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Alive fronts in left-to-right order at the current time.
    pub fn fronts(&self) -> Vec<FrontInfo> {
        let mut out = Vec::new();
        let mut idx = self.head;
        while idx != NIL {
            let f = &self.fronts[idx];
            out.push(FrontInfo {
                position: f.position(self.time),
                left: f.left,
                right: f.right,
                speed: f.speed,
                kind: f.kind,
            });
            idx = f.next;
        }
        out
    }

    fn schedule_pair(&mut self, i: usize, j: usize) {
        let (fi, fj) = (self.fronts[i], self.fronts[j]);
        if fi.speed <= fj.speed {
            return;
        }
        let t = (fj.x_ref - fj.speed * fj.t_ref - fi.x_ref + fi.speed * fi.t_ref)
            / (fi.speed - fj.speed);
        if !t.is_finite() {
            return;
        }
        let t = t.max(self.time);
        let x = 0.5 * (fi.position(t) + fj.position(t));
        self.seq += 1;
        self.queue.push(Event {
            time: t,
            x,
            left: i,
            right: j,
            seq: self.seq,
        });
    }

    /// Processes all collisions up to and including `t_target`, then sets the
    /// current time to it.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        if t_target < self.time {
            return Err(Error::Invalid(format!(
                "cannot advance backwards from {} to {t_target}",
                self.time
            )));
        }
        while let Some(top) = self.queue.peek() {
            if top.time > t_target {
                break;
            }
            let ev = self.queue.pop().unwrap();
            let (i, j) = (ev.left, ev.right);
            if !self.fronts[i].alive || !self.fronts[j].alive || self.fronts[i].next != j {
                continue;
            }
            self.events_processed += 1;
            if self.events_processed > self.budget {
                return Err(Error::Stall {
                    events: self.events_processed,
                });
            }
            let t = ev.time.max(self.time);
            self.time = t;
            let x = ev.x;

            // Widen to the maximal group of fronts coincident at the
            // collision point, so simultaneous arrivals merge in one step.
            let mut lo = i;
            while self.fronts[lo].prev != NIL {
                let p = self.fronts[lo].prev;
                if (self.fronts[p].position(t) - x).abs() <= self.x_tol {
                    lo = p;
                } else {
                    break;
                }
            }
            let mut hi = j;
            while self.fronts[hi].next != NIL {
                let n = self.fronts[hi].next;
                if (self.fronts[n].position(t) - x).abs() <= self.x_tol {
                    hi = n;
                } else {
                    break;
                }
            }
            let ul = self.fronts[lo].left;
            let ur = self.fronts[hi].right;
            let before = self.fronts[lo].prev;
            let after = self.fronts[hi].next;
            let mut k = lo;
            loop {
                self.fronts[k].alive = false;
                let next = self.fronts[k].next;
                if k == hi {
                    break;
                }
                k = next;
            }

            let fan = riemann(&self.flux, ul, ur, self.delta)?;
            let mut prev = before;
            let mut first_new = NIL;
            for w in &fan.waves {
                let idx = self.fronts.len();
                self.fronts.push(Front {
                    x_ref: x,
                    t_ref: t,
                    speed: w.speed,
                    left: w.left,
                    right: w.right,
                    kind: w.kind,
                    prev,
                    next: NIL,
                    alive: true,
                });
                if prev != NIL {
                    self.fronts[prev].next = idx;
                }
                if first_new == NIL {
                    first_new = idx;
                }
                prev = idx;
            }
            if prev != NIL {
                self.fronts[prev].next = after;
            }
            if after != NIL {
                self.fronts[after].prev = prev;
            }
            if before == NIL {
                self.head = if first_new != NIL { first_new } else { after };
                if self.head != NIL {
                    self.fronts[self.head].prev = NIL;
                }
            }
            if before != NIL {
                let n = self.fronts[before].next;
                if n != NIL {
                    self.schedule_pair(before, n);
                }
            }
            if prev != NIL && prev != before && after != NIL {
                self.schedule_pair(prev, after);
            }
        }
        self.time = t_target.max(self.time);
        Ok(())
    }

    /// Profile at the current time as a normalized piecewise-constant
    /// function.
    pub fn profile(&self) -> PiecewiseConstantFn {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        let mut idx = self.head;
        while idx != NIL {
            let f = &self.fronts[idx];
            if !xs.is_empty() {
                vs.push(f.left);
            }
            xs.push(f.position(self.time));
            if f.next != NIL {
                debug_assert!((f.right - self.fronts[f.next].left).abs() < 1e-12);
            }
            idx = f.next;
        }
        if xs.len() < 2 {
            return PiecewiseConstantFn::zero();
        }
        PiecewiseConstantFn::from_degenerate(xs, vs)
    }
}

/// Entropy solution at time `t` for compactly supported piecewise-constant
/// data, with rarefactions chopped at the value resolution `delta`.
pub fn evolve(
    flux: &FluxModel,
    u0: &PiecewiseConstantFn,
    t: f64,
    delta: f64,
) -> Result<PiecewiseConstantFn> {
    if !(t >= 0.0) {
        return Err(Error::Invalid("evolution time must be nonnegative".into()));
    }
    let mut state = FrontState::new(flux, u0, delta)?;
    state.advance_to(t)?;
    Ok(state.profile())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(a: f64, b: f64, v: f64) -> PiecewiseConstantFn {
        PiecewiseConstantFn::step(a, b, v).unwrap()
    }

    #[test]
    fn null_data_stays_null() {
        let b = FluxModel::burgers(1.0).unwrap();
        let u = evolve(&b, &PiecewiseConstantFn::zero(), 1.0, 1e-3).unwrap();
        assert!(u.is_zero());
    }

    #[test]
    fn burgers_block_conserves_mass_and_bounds() {
        let b = FluxModel::burgers(1.0).unwrap();
        let u0 = block(0.0, 1.0, 1.0);
        let u = evolve(&b, &u0, 2.0, 1e-3).unwrap();
        assert!((u.mass() - 1.0).abs() < 1e-12);
        assert!(u.sup_norm() <= 1.0 + 1e-12);
        let (lo, hi) = u.support().unwrap();
        assert!(lo >= 0.0 - 1e-9 && hi <= 1.0 + 2.0 * 1.0 + 1e-3);
        // Inside the rarefaction the profile tracks x/t.
        assert!((u.eval_right(1.0) - 0.5).abs() <= 5e-3);
        // Past the shock (near x = 2 at t = 2) the state is zero.
        assert_eq!(u.eval_right(2.05), 0.0);
    }

    #[test]
    fn shock_merging_conserves_mass() {
        let b = FluxModel::burgers(1.0).unwrap();
        let u0 = PiecewiseConstantFn::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.5]).unwrap();
        let mut st = FrontState::new(&b, &u0, 1e-3).unwrap();
        st.advance_to(3.0).unwrap();
        let u = st.profile();
        assert!((u.mass() - 1.5).abs() < 1e-12);
        assert!(u.sup_norm() <= 1.0 + 1e-12);
        // After the merge the fronts still satisfy the admissibility slack.
        for f in st.fronts() {
            if f.kind == WaveKind::Shock {
                for k in 1..50 {
                    let v = f.left + (f.right - f.left) * k as f64 / 50.0;
                    let sl = (b.f(f.left) - b.f(v)) / (f.left - v);
                    let sr = (b.f(f.right) - b.f(v)) / (f.right - v);
                    assert!(sl - sr >= -1e-10);
                }
            }
        }
    }

    #[test]
    fn cubic_step_matches_riemann_fan() {
        let c = FluxModel::cubic(1.0).unwrap();
        let u0 = block(0.0, 40.0, 1.0);
        // The left edge of the long block is a pure Riemann problem 0 -> 1
        // until waves from the far edge arrive; compare pointwise at t = 1.
        let u = evolve(&c, &u0, 1.0, 1e-3).unwrap();
        let fan = riemann(&c, 0.0, 1.0, 1e-3).unwrap();
        for k in 0..20 {
            let x = 0.05 + 0.9 * k as f64 / 19.0;
            let mut v = 0.0;
            for w in &fan.waves {
                if w.speed * 1.0 <= x {
                    v = w.right;
                }
            }
            assert!((u.eval_right(x) - v).abs() <= 2e-3, "x={x}");
        }
    }

    #[test]
    fn mixed_quartic_block_evolves_within_bounds() {
        let f = FluxModel::mixed_quartic(1.0).unwrap();
        let u0 = PiecewiseConstantFn::new(vec![-1.0, 0.0, 0.5, 1.0], vec![0.8, -0.9, 0.6]).unwrap();
        let u = evolve(&f, &u0, 2.0, 1e-3).unwrap();
        assert!((u.mass() - u0.mass()).abs() < 1e-9);
        assert!(u.sup_norm() <= 0.9 + 1e-12);
        let l = 1.0 + 2.0 * f.fprime_max();
        let (lo, hi) = u.support().unwrap();
        assert!(lo >= -l - 1e-3 && hi <= l + 1e-3);
    }

    #[test]
    fn restart_reproduces_single_run() {
        let b = FluxModel::burgers(1.0).unwrap();
        let u0 = PiecewiseConstantFn::new(vec![-1.0, -0.2, 0.3, 1.0], vec![0.7, -0.4, 0.9]).unwrap();
        let whole = evolve(&b, &u0, 1.0, 1e-3).unwrap();
        let half = evolve(&b, &u0, 0.5, 1e-3).unwrap();
        let rest = evolve(&b, &half, 0.5, 1e-3).unwrap();
        assert!(rest.l1_distance(&whole) <= 3.0 * 1e-3 * u0.tv() * 1.0);
    }

    #[test]
    fn tiny_budget_reports_stall() {
        let b = FluxModel::burgers(1.0).unwrap();
        let u0 = PiecewiseConstantFn::new(vec![-1.0, -0.2, 0.3, 1.0], vec![0.7, -0.4, 0.9]).unwrap();
        let mut st = FrontState::new(&b, &u0, 1e-4).unwrap().with_budget(2);
        match st.advance_to(1.0) {
            Err(Error::Stall { events }) => assert!(events > 2),
            other => panic!("expected stall, got {other:?}"),
        }
    }

    #[test]
    fn rejects_oversized_data_and_backward_time() {
        let b = FluxModel::burgers(1.0).unwrap();
        let u0 = block(0.0, 1.0, 1.5);
        assert!(matches!(
            FrontState::new(&b, &u0, 1e-3),
            Err(Error::Domain(_))
        ));
        let mut st = FrontState::new(&b, &block(0.0, 1.0, 1.0), 1e-3).unwrap();
        st.advance_to(1.0).unwrap();
        assert!(st.advance_to(0.5).is_err());
    }
}
