//! One- and two-dimensional minimizers and a bracketing root finder.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Min1 {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// For a unimodal `f` the returned point is within `tol` of the minimizer;
/// when the minimum sits at an end the search converges to that end.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> Min1 {
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut it = 0;
    while (b - a).abs() > tol && it < max_iter {
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
        it += 1;
    }
    if fc < fd {
        Min1 { x: c, value: fc, iterations: it }
    } else {
        Min1 { x: d, value: fd, iterations: it }
    }
}

/// Bisection for a sign change of `f` on `[a, b]`.
///
/// Stops when `|f| <= ftol` or the bracket can no longer shrink. Returns
/// `None` if `f(a)` and `f(b)` have the same sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, ftol: f64, max_iter: usize) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if (flo > 0.0) == (fhi > 0.0) {
        return None;
    }
    let lo_positive = flo > 0.0;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        mid = 0.5 * (lo + hi);
        if !(mid > lo.min(hi) && mid < lo.max(hi)) {
            break;
        }
        let fm = f(mid);
        if fm.abs() <= ftol {
            return Some(mid);
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(mid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Min2 {
    pub x: [f64; 2],
    pub value: f64,
    pub iterations: usize,
}

/// Nelder–Mead simplex search in the plane.
///
/// `f` may return `+∞` to mark infeasible points; the start point must be
/// feasible. Stops when the simplex diameter falls below `xtol` and the
/// spread of values below `ftol`.
pub fn nelder_mead_2d<F: FnMut([f64; 2]) -> f64>(
    mut f: F,
    start: [f64; 2],
    step: [f64; 2],
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Min2 {
    let mut s = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut v = [f(s[0]), f(s[1]), f(s[2])];
    let mut it = 0;
    while it < max_iter {
        // order best to worst
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap_or(core::cmp::Ordering::Equal));
        s = [s[idx[0]], s[idx[1]], s[idx[2]]];
        v = [v[idx[0]], v[idx[1]], v[idx[2]]];
        let diam = dist(s[0], s[1]).max(dist(s[0], s[2]));
        if diam < xtol && (v[2] - v[0]).abs() <= ftol {
            break;
        }
        it += 1;
        let c = [(s[0][0] + s[1][0]) * 0.5, (s[0][1] + s[1][1]) * 0.5];
        let along = |t: f64| [c[0] + t * (s[2][0] - c[0]), c[1] + t * (s[2][1] - c[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < v[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                s[2] = xe;
                v[2] = fe;
            } else {
                s[2] = xr;
                v[2] = fr;
            }
            continue;
        }
        if fr < v[1] {
            s[2] = xr;
            v[2] = fr;
            continue;
        }
        let (xk, fk) = if fr < v[2] {
            let x = along(-0.5);
            (x, f(x))
        } else {
            let x = along(0.5);
            (x, f(x))
        };
        if fk < v[2].min(fr) {
            s[2] = xk;
            v[2] = fk;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..3 {
            s[i] = [s[0][0] + 0.5 * (s[i][0] - s[0][0]), s[0][1] + 0.5 * (s[i][1] - s[0][1])];
            v[i] = f(s[i]);
        }
    }
    let best = (0..3).fold(0, |b, i| if v[i] < v[b] { i } else { b });
    Min2 { x: s[best], value: v[best], iterations: it }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}
