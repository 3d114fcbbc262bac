//! Certified l∞ lower bounds for partial enumeration nodes.
//!
//! At a node where coordinates `x_k..` are fixed and `x_0..x_{k-1}` are
//! free, any `w` orthogonal to `b_0..b_{k-1}` gives
//! `‖c + Σ y_i b_i‖∞ >= |⟨c, w⟩| / ‖w‖₁` for every real `y`. The best such
//! `w` solves a small LP over the span of `b*_k..`; the LP runs in floats
//! and the resulting `w` is re-checked in exact arithmetic.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::rational::{to_f64, Rational};

pub(crate) struct LinfBound {
    /// Exact Gram-Schmidt vectors `b*_i`.
    star: Vec<Vec<Rational>>,
    /// `b*_i / ‖b*_i‖` in floats.
    unit: Vec<Vec<f64>>,
}

/// Fixed-point scale for the LP multipliers before the exact check.
const ALPHA_SCALE: f64 = (1u64 << 40) as f64;

impl LinfBound {
    pub(crate) fn new(cols: &[Vec<BigInt>], mu: &[Vec<Rational>]) -> Self {
        let n = cols.len();
        let mut star: Vec<Vec<Rational>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v: Vec<Rational> = cols[i].iter().map(|x| Rational::from_integer(x.clone())).collect();
            for j in 0..i {
                if !mu[i][j].is_zero() {
                    for (a, b) in v.iter_mut().zip(&star[j]) {
                        *a -= &mu[i][j] * b;
                    }
                }
            }
            star.push(v);
        }
        let unit = star
            .iter()
            .map(|v| {
                let f: Vec<f64> = v.iter().map(to_f64).collect();
                let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
                f.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        Self { star, unit }
    }

    /// Whether every completion of the node with free coordinates `< k` has
    /// integer key at least `best_key`. `c` is the fixed part of the vector.
    pub(crate) fn prunes(&mut self, k: usize, c: &[BigInt], best_key: &BigInt) -> bool {
        let n = self.star.len();
        let dim = c.len();
        if k == 0 || k >= n {
            return false;
        }
        let target: BigInt = best_key - 1;
        let target_f = to_f64(&Rational::from_integer(target.clone()));
        let cf: Vec<f64> = c.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect();
        if cf.iter().any(|x| !x.is_finite()) {
            return false;
        }
        // max Σ α_i ⟨c, u_i⟩  s.t.  ‖Σ α_i u_i‖₁ <= 1
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let alphas: Vec<_> = (k..n)
            .map(|i| {
                let obj: f64 = self.unit[i].iter().zip(&cf).map(|(u, x)| u * x).sum();
                lp.add_var(obj, (f64::NEG_INFINITY, f64::INFINITY))
            })
            .collect();
        let slacks: Vec<_> = (0..dim).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
        for r in 0..dim {
            let mut plus: Vec<_> = alphas.iter().zip(k..n).map(|(&a, i)| (a, self.unit[i][r])).collect();
            plus.push((slacks[r], -1.0));
            lp.add_constraint(plus.as_slice(), ComparisonOp::Le, 0.0);
            let mut minus: Vec<_> = alphas.iter().zip(k..n).map(|(&a, i)| (a, -self.unit[i][r])).collect();
            minus.push((slacks[r], -1.0));
            lp.add_constraint(minus.as_slice(), ComparisonOp::Le, 0.0);
        }
        let sum: Vec<_> = slacks.iter().map(|&s| (s, 1.0)).collect();
        lp.add_constraint(sum.as_slice(), ComparisonOp::Le, 1.0);
        let sol = match lp.solve() {
            Ok(s) => s,
            Err(_) => return false,
        };
        if sol.objective() <= target_f * (1.0 + 1e-12) {
            return false;
        }
        // Exact check with w = Σ a_i b*_i, multipliers rounded to fixed point.
        let raw: Vec<f64> = alphas
            .iter()
            .zip(k..n)
            .map(|(&a, i)| {
                let norm = self.unit[i]
                    .iter()
                    .zip(&self.star[i])
                    .find(|(u, _)| **u != 0.0)
                    .map(|(u, s)| to_f64(s) / u)
                    .unwrap_or(1.0);
                sol[a] / norm
            })
            .collect();
        let peak = raw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(peak.is_finite() && peak > 0.0) {
            return false;
        }
        let mut w = vec![Rational::zero(); dim];
        for (coef, i) in raw.iter().zip(k..n) {
            let coef = (coef / peak * ALPHA_SCALE).round();
            if coef == 0.0 {
                continue;
            }
            let coef = Rational::from_float(coef).unwrap_or_default();
            for (wi, si) in w.iter_mut().zip(&self.star[i]) {
                *wi += &coef * si;
            }
        }
        let l1: Rational = w.iter().map(|x| x.abs()).sum();
        if l1.is_zero() {
            return false;
        }
        let dot: Rational = w.iter().zip(c).map(|(wi, ci)| wi * Rational::from_integer(ci.clone())).sum();
        dot.abs() > Rational::from_integer(target) * l1
    }
}
