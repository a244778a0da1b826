//! Small numerical helpers: bracketed root finding, golden-section search,
//! least-squares line fits, and log-domain binomial sums.

/// Finds the root of a nondecreasing function on `[lo, hi]` by bisection.
///
/// Requires `f(lo) <= 0 <= f(hi)`; the bracket is halved until its width
/// drops below `tol`, so the result is within `tol` of the true root even
/// when `f` is flat near the crossing. Panics in debug builds if the bracket
/// does not straddle zero.
pub fn bisect_increasing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    let (mut lo, mut hi) = (lo, hi);
    debug_assert!(f(lo) <= 0.0 && f(hi) >= 0.0, "bracket must straddle zero");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes a unimodal function on `[a, b]` by golden-section search.
///
/// Returns the abscissa of the minimum after shrinking the bracket below
/// `tol` (or 200 iterations, whichever comes first).
pub fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Least-squares fit of `y = slope * x + intercept`; returns `(slope, intercept)`.
///
/// Returns `None` when fewer than two points are given or the abscissas are
/// all equal.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// log2 of the Hamming-ball volume `sum_{i=0..=r} C(n, i)`.
///
/// Runs in log space so it stays finite for `n` in the millions.
pub fn log2_hamming_ball(n: u64, r: u64) -> f64 {
    let r = r.min(n);
    // log2 C(n, i) built incrementally: C(n,0)=1, C(n,i+1)=C(n,i)*(n-i)/(i+1).
    let mut log2_c = 0.0f64;
    let mut max_term = 0.0f64;
    let mut terms = Vec::with_capacity(r as usize + 1);
    terms.push(0.0f64);
    for i in 0..r {
        log2_c += ((n - i) as f64).log2() - ((i + 1) as f64).log2();
        terms.push(log2_c);
        if log2_c > max_term {
            max_term = log2_c;
        }
    }
    let sum: f64 = terms.iter().map(|t| (t - max_term).exp2()).sum();
    max_term + sum.log2()
}
