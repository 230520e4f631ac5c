//! One-dimensional search used by the bound optimizers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`. Stops when the bracket is narrower than `tol`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scans `points` evenly spaced abscissae of `[a, b]` (endpoints included),
/// then refines around the best one with golden-section search. Guards
/// against flat regions that would mislead a bare golden search.
///
/// Non-finite objective values are treated as `+∞`.
pub fn grid_golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, points: usize, tol: f64) -> (f64, f64) {
    let points = points.max(3);
    let step = (b - a) / (points - 1) as f64;
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let grid: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let x = if i + 1 == points { b } else { a + step * i as f64 };
            (x, eval(x))
        })
        .collect();
    let best = grid
        .iter()
        .enumerate()
        .min_by(|l, r| l.1 .1.total_cmp(&r.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = grid[best.saturating_sub(1)].0;
    let hi = grid[(best + 1).min(points - 1)].0;
    let refined = golden_section_min(&mut eval, lo, hi, tol);
    if refined.1 <= grid[best].1 {
        refined
    } else {
        grid[best]
    }
}

/// Bisection for a sign change of `f` on `[a, b]`; `f(a)` and `f(b)` must
/// have opposite signs. Returns the left end of the final bracket, so
/// `f(x)` keeps the sign of `f(a)`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let sign_a = f(a) < 0.0;
    for _ in 0..400 {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (f(mid) < 0.0) == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_golden_handles_boundary_minimum() {
        let (x, _) = grid_golden_min(|x| x, 0.0, 1.0, 64, 1e-9);
        assert!(x < 1e-8);
        let (x, _) = grid_golden_min(|x| -x, 0.0, 1.0, 64, 1e-9);
        assert!(x > 1.0 - 1e-8);
    }

    #[test]
    fn grid_golden_skips_infinite_plateaus() {
        let (x, _) = grid_golden_min(
            |x| if x > 0.8 { f64::INFINITY } else { (x - 0.7).abs() },
            0.0,
            1.0,
            64,
            1e-9,
        );
        assert!((x - 0.7).abs() < 1e-7);
    }

    #[test]
    fn bisect_keeps_left_sign() {
        let x = bisect(|x| x - 2f64.sqrt(), 0.0, 2.0, 1e-14);
        assert!(x <= 2f64.sqrt() && 2f64.sqrt() - x < 1e-13);
    }
}
