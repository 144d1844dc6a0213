//! Adaptive Gauss–Kronrod quadrature and bracketing bisection.

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};

// 15-point Kronrod abscissae (positive half) with the embedded 7-point Gauss rule.
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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for adaptive subdivision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
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
    Panel {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// The final partition of an adaptive run: a composite 15-point rule that
/// can be reused for integrands sharing the same difficult points.
#[derive(Clone, Debug)]
pub struct AdaptedRule {
    pub value: f64,
    pub error: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl AdaptedRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        check(abs_tol > 0.0, "abs_tol", abs_tol, "must be positive")?;
        check(rel_tol > 0.0, "rel_tol", rel_tol, "must be positive")?;
        check(
            max_subdivisions > 0,
            "max_subdivisions",
            max_subdivisions as f64,
            "must be positive",
        )?;
        Ok(Quadrature {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }

    fn run<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> Result<Vec<Panel>> {
        if a == b {
            return Ok(Vec::new());
        }
        let mut panels = vec![kronrod(f, a, b)];
        loop {
            let value: f64 = panels.iter().map(|p| p.value).sum();
            let error: f64 = panels.iter().map(|p| p.error).sum();
            if !value.is_finite() {
                return Err(Error::Solver(format!("non-finite integrand on [{a}, {b}]")));
            }
            if error <= self.abs_tol.max(self.rel_tol * value.abs()) {
                return Ok(panels);
            }
            if panels.len() >= self.max_subdivisions {
                return Err(Error::Solver(format!(
                    "quadrature on [{a}, {b}] did not reach tolerance after {} panels \
                     (estimate {value}, error {error:e})",
                    panels.len()
                )));
            }
            let (worst, _) = panels
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .expect("nonempty");
            let p = panels.swap_remove(worst);
            let mid = 0.5 * (p.a + p.b);
            if mid <= p.a || mid >= p.b {
                // Panel can no longer be split in floating point; accept it.
                panels.push(Panel { error: 0.0, ..p });
                continue;
            }
            panels.push(kronrod(f, p.a, mid));
            panels.push(kronrod(f, mid, p.b));
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        Ok(self.run(&mut f, a, b)?.iter().map(|p| p.value).sum())
    }

    /// Like [`Quadrature::integrate`] but returns the adapted composite rule.
    pub fn adapt<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<AdaptedRule> {
        let mut panels = self.run(&mut f, a, b)?;
        panels.sort_by(|x, y| x.a.total_cmp(&y.a));
        let mut nodes = Vec::with_capacity(panels.len() * 15);
        let mut weights = Vec::with_capacity(panels.len() * 15);
        for p in &panels {
            let c = 0.5 * (p.a + p.b);
            let h = 0.5 * (p.b - p.a);
            for j in 0..7 {
                nodes.push(c - h * XGK[j]);
                weights.push(h * WGK[j]);
            }
            nodes.push(c);
            weights.push(h * WGK[7]);
            for j in (0..7).rev() {
                nodes.push(c + h * XGK[j]);
                weights.push(h * WGK[j]);
            }
        }
        Ok(AdaptedRule {
            value: panels.iter().map(|p| p.value).sum(),
            error: panels.iter().map(|p| p.error).sum(),
            nodes,
            weights,
        })
    }
}

/// Bisection on a bracket `[lo, hi]` whose endpoint values have opposite signs.
///
/// Stops when the bracket is narrower than `xtol` or when the function value
/// at the midpoint has magnitude at most `ftol`.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    ftol: f64,
) -> Result<(f64, usize)> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok((lo, 0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Solver(format!(
            "no sign change on [{lo}, {hi}] (values {flo:e}, {fhi:e})"
        )));
    }
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        let fm = f(mid);
        if fm.abs() <= ftol || (hi - lo) <= xtol || mid <= lo || mid >= hi || iterations > 2000 {
            return Ok((mid, iterations));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}
