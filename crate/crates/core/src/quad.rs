//! Adaptive Gauss–Kronrod (G7/K15) quadrature and the composite trapezoid rule.

use alloc::vec::Vec;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    /// False when the subdivision limit was hit before the tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadTol {
    fn default() -> Self {
        QuadTol { abs: 1e-13, rel: 1e-12, max_subdivisions: 2000 }
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, libm::fabs((k - g) * h))
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Integrates `f` over `[a, b]`, splitting first at the given interior points.
///
/// Endpoint singularities of logarithmic or inverse-square-root type are
/// handled by bisection; put any interior kink or singularity in `breaks`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: QuadTol) -> QuadResult {
    let mut edges: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    edges.push(a);
    for &p in breaks {
        if p > a && p < b {
            edges.push(p);
        }
    }
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut panels: Vec<Panel> = Vec::new();
    for w in edges.windows(2) {
        if w[1] > w[0] {
            let (value, error) = kronrod(&f, w[0], w[1]);
            panels.push(Panel { a: w[0], b: w[1], value, error });
        }
    }
    let mut evaluations = 15 * panels.len();
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * libm::fabs(value));
        if error <= target || panels.len() >= tol.max_subdivisions {
            return QuadResult { value, error, evaluations, converged: error <= target };
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Panel can no longer be split in floating point.
            panels.push(Panel { error: 0.0, ..p });
            continue;
        }
        let (v1, e1) = kronrod(&f, p.a, mid);
        let (v2, e2) = kronrod(&f, mid, p.b);
        evaluations += 30;
        panels.push(Panel { a: p.a, b: mid, value: v1, error: e1 });
        panels.push(Panel { a: mid, b: p.b, value: v2, error: e2 });
    }
}

/// Composite trapezoid rule with `panels` equal panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        s += f(a + h * i as f64);
    }
    s * h
}
