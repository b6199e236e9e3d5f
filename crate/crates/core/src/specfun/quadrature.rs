//! Quadrature rules.
//!
//! [`integrate_expweighted`] handles `integral_0^inf e^{-t} f(t) dt` with
//! Gauss-Laguerre rules refined by doubling the node count. Nodes and weights
//! come from the Golub-Welsch eigenproblem for the Laguerre Jacobi matrix;
//! nodes are then polished by Newton steps on `L_n`.
//!
//! [`integrate_finite`] is an adaptive Gauss-Kronrod (7/15) rule for finite
//! intervals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub node_count: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_refinements: u32,
}

impl QuadratureSpec {
    pub fn new(node_count: usize, abs_tol: f64, rel_tol: f64, max_refinements: u32) -> Result<Self> {
        let spec = QuadratureSpec {
            node_count,
            abs_tol,
            rel_tol,
            max_refinements,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 8 {
            return Err(Error::InvalidParam {
                name: "node_count",
                value: self.node_count as f64,
                reason: "at least 8 Gauss-Laguerre nodes required",
            });
        }
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || (self.abs_tol == 0.0 && self.rel_tol == 0.0) {
            return Err(Error::InvalidParam {
                name: "abs_tol/rel_tol",
                value: self.abs_tol,
                reason: "tolerances must be >= 0 and not both zero",
            });
        }
        if self.max_refinements == 0 {
            return Err(Error::InvalidParam {
                name: "max_refinements",
                value: 0.0,
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            node_count: 64,
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_refinements: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub achieved_tol: f64,
    pub node_count: usize,
}

#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Laguerre rule needs at least one node");
        let (mut nodes, weights) = golub_welsch(n);
        for x in nodes.iter_mut() {
            for _ in 0..2 {
                let (l_prev, l_n) = laguerre_pair(n, *x);
                let deriv = n as f64 * (l_n - l_prev) / *x;
                if deriv != 0.0 {
                    let step = l_n / deriv;
                    if step.abs() < 1e-8 * *x {
                        *x -= step;
                    }
                }
            }
        }
        GaussLaguerre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| if w == 0.0 { 0.0 } else { w * f(x) })
            .sum()
    }
}

/// Shared rule for `n` nodes, built once per process.
pub fn gauss_laguerre(n: usize) -> Arc<GaussLaguerre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLaguerre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(GaussLaguerre::new(n));
    cache
        .lock()
        .expect("rule cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// `integral_0^inf e^{-t} f(t) dt`, doubling the Gauss-Laguerre node count
/// until successive estimates agree within `max(abs_tol, rel_tol |I|)`.
pub fn integrate_expweighted(f: impl Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<QuadEstimate> {
    spec.validate()?;
    let mut n = spec.node_count;
    let mut previous = gauss_laguerre(n).integrate(&f);
    let mut current = previous;
    let mut before = previous;
    for _ in 0..spec.max_refinements {
        n *= 2;
        current = gauss_laguerre(n).integrate(&f);
        let diff = (current - previous).abs();
        if diff <= spec.abs_tol.max(spec.rel_tol * current.abs()) {
            return Ok(QuadEstimate {
                value: current,
                achieved_tol: diff,
                node_count: n,
            });
        }
        before = previous;
        previous = current;
    }
    Err(Error::Accuracy {
        context: "Gauss-Laguerre refinement",
        last: current,
        previous: before,
    })
}

/// Eigenvalues of the Jacobi matrix (diagonal `2i + 1`, off-diagonal `i + 1`)
/// and squared first components of its eigenvectors, by implicit QL with
/// Wilkinson shifts. Returned in increasing node order.
fn golub_welsch(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64).collect();
    let mut e: Vec<f64> = (0..n).map(|i| if i + 1 < n { (i + 1) as f64 } else { 0.0 }).collect();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 60, "QL iteration did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|v| v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `(L_{n-1}(x), L_n(x))` by the three-term recurrence, rescaled by a common
/// factor when large (only their ratio is used).
fn laguerre_pair(n: usize, x: f64) -> (f64, f64) {
    const RESCALE: f64 = 1e150;
    let mut p0 = 1.0;
    let mut p1 = 1.0 - x;
    if n == 1 {
        return (p0, p1);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 - x) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
        if p1.abs() > RESCALE {
            p0 /= RESCALE;
            p1 /= RESCALE;
        }
    }
    (p0, p1)
}

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
/// Gauss weights for the odd Kronrod abscissae `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`.
pub fn integrate_finite(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    fn recurse(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
        let (value, err) = gk15(f, a, b);
        if err <= tol || (b - a).abs() < 1e-14 * (a.abs() + b.abs()) {
            return Ok(value);
        }
        if depth == 0 {
            return Err(Error::Accuracy {
                context: "adaptive Gauss-Kronrod",
                last: value,
                previous: value - err,
            });
        }
        let m = 0.5 * (a + b);
        Ok(recurse(f, a, m, 0.5 * tol, depth - 1)? + recurse(f, m, b, 0.5 * tol, depth - 1)?)
    }
    recurse(&f, a, b, abs_tol, 40)
}
