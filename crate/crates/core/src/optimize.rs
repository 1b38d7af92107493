//! Deterministic 1-D maximization: dense grid, then golden-section refinement
//! inside the bracket around the best grid point.

/// Grid points used before refinement.
pub const GRID_POINTS: usize = 4097;
/// Refinement stops once the bracket is narrower than this fraction of the interval.
pub const REL_WIDTH: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Maximizes `f` over `[lo, hi]`. Ties go to the smaller argument.
pub fn maximize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Maximum {
    assert!(lo <= hi, "empty interval [{lo}, {hi}]");
    if lo == hi {
        return Maximum { x: lo, value: f(lo) };
    }
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let at = |k: usize| if k == GRID_POINTS - 1 { hi } else { lo + k as f64 * step };
    let mut best_k = 0;
    let mut best = f(lo);
    for k in 1..GRID_POINTS {
        let v = f(at(k));
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let mut a = at(best_k.saturating_sub(1));
    let mut b = at((best_k + 1).min(GRID_POINTS - 1));
    let tol = REL_WIDTH * (hi - lo);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
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
    let x = 0.5 * (a + b);
    let fx = f(x);
    let grid = Maximum { x: at(best_k), value: best };
    let refined = Maximum { x, value: fx };
    if refined.value > grid.value || (refined.value == grid.value && refined.x < grid.x) {
        refined
    } else {
        grid
    }
}
