//! Floating-point successive minima for bases with irrational entries.
//!
//! Same staged search as the exact engine, on `f64`. Each value comes with
//! a forward error estimate `d · ε · κ_F(B) · λ_j`, where `κ_F` is the
//! Frobenius condition number of the basis. Nothing here is certified.

use super::enumerate::complete_primitive_i64;
use super::lll::{gso_float, lll_float};
use super::{FloatMinimaResult, LatticeError, Norm};
use crate::matrix::FloatMatrix;

fn combine(cols: &[Vec<f64>], x: &[i64]) -> Vec<f64> {
    let mut v = vec![0.0; cols[0].len()];
    for (c, &xi) in cols.iter().zip(x) {
        if xi != 0 {
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi += xi as f64 * ci;
            }
        }
    }
    v
}

fn key(v: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::L2 => v.iter().map(|x| x * x).sum(),
        Norm::LInf => v.iter().fold(0.0, |a, x| a.max(x.abs())),
    }
}

fn l2_bound(k: f64, norm: Norm, dim: usize) -> f64 {
    match norm {
        Norm::L2 => k,
        Norm::LInf => k * k * dim as f64,
    }
}

struct Search<'a> {
    cols: &'a [Vec<f64>],
    mu: Vec<Vec<f64>>,
    bstar: Vec<f64>,
    prefix: usize,
    norm: Norm,
    best_key: f64,
    best_x: Vec<i64>,
    bound: f64,
    x: Vec<i64>,
    nodes: u64,
    budget: u64,
}

const SLACK: f64 = 1e-9;

impl Search<'_> {
    fn descend(&mut self, k: usize, partial: f64) -> Result<(), LatticeError> {
        let n = self.x.len();
        let outer_zero = self.x[k + 1..].iter().all(|&v| v == 0);
        let center: f64 = -(k + 1..n).map(|i| self.mu[i][k] * self.x[i] as f64).sum::<f64>();
        let start = center.round();
        if !start.is_finite() || start.abs() > i64::MAX as f64 / 4.0 {
            return Err(self.exceeded());
        }
        let start = start as i64;
        if k == 0 && self.prefix > 0 {
            return self.bottom(partial, start);
        }
        for dir in [1i64, -1] {
            if dir == -1 && outer_zero {
                break;
            }
            let mut xk = if dir == 1 { start } else { start - 1 };
            if outer_zero && xk < 0 {
                xk = 0;
            }
            loop {
                let diff = xk as f64 - center;
                let total = partial + diff * diff * self.bstar[k];
                if total > self.bound * (1.0 + SLACK) {
                    break;
                }
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(self.exceeded());
                }
                self.x[k] = xk;
                if k == 0 {
                    self.leaf();
                } else if !(k == self.prefix && self.x[k..].iter().all(|&v| v == 0)) {
                    self.descend(k - 1, total)?;
                }
                xk += dir;
            }
            self.x[k] = 0;
        }
        Ok(())
    }

    fn exceeded(&self) -> LatticeError {
        LatticeError::EnumerationBudgetExceeded {
            budget: self.budget,
            radius_squared: self.bound,
        }
    }

    /// Level 0 inside the prefix: the key is convex in `x_0`, visit its minimiser.
    fn bottom(&mut self, partial: f64, start: i64) -> Result<(), LatticeError> {
        let rem = self.bound * (1.0 + SLACK) - partial;
        if rem < 0.0 {
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(self.exceeded());
        }
        let x0 = match self.norm {
            Norm::L2 => start,
            Norm::LInf => {
                let r = (rem / self.bstar[0]).sqrt().ceil() as i64;
                let c = combine(self.cols, &self.x);
                let b0 = &self.cols[0];
                let g = |y: i64| c.iter().zip(b0).fold(0.0f64, |a, (ci, bi)| a.max((ci + y as f64 * bi).abs()));
                let (mut lo, mut hi) = (start - r - 1, start + r + 1);
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if g(mid + 1) >= g(mid) {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                lo
            }
        };
        self.x[0] = x0;
        self.leaf();
        self.x[0] = 0;
        Ok(())
    }

    fn leaf(&mut self) {
        if self.x[self.prefix..].iter().all(|&v| v == 0) {
            return;
        }
        let k = key(&combine(self.cols, &self.x), self.norm);
        if k < self.best_key {
            self.best_key = k;
            self.bound = l2_bound(k, self.norm, self.cols[0].len());
            self.best_x = self.x.clone();
        }
    }
}

fn transform_coefficients(h: &[Vec<i64>], x: &[i64]) -> Vec<i64> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|l| h[l][i] * x[l]).sum())
        .collect()
}

pub(crate) fn float_minima(
    b: &FloatMatrix,
    norm: Norm,
    budget: u64,
) -> Result<FloatMinimaResult, LatticeError> {
    let n = b.cols();
    let original: Vec<Vec<f64>> = (0..n).map(|j| b.column(j)).collect();
    let mut cols = original.clone();
    let mut h: Vec<Vec<i64>> = (0..n)
        .map(|j| (0..n).map(|i| (i == j) as i64).collect())
        .collect();
    lll_float(&mut cols, &mut h, 0.99, None)?;
    let inv = b.inverse().ok_or(LatticeError::SingularBasis)?;
    let condition = b.frobenius() * inv.frobenius();
    let mut lambdas = Vec::with_capacity(n);
    let mut coefficients = Vec::with_capacity(n);
    let mut nodes = 0;
    for j in 0..n {
        let (mu, bstar) = gso_float(&cols);
        let (seed, seed_key) = (j..n)
            .map(|i| (i, key(&cols[i], norm)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let mut best_x = vec![0; n];
        best_x[seed] = 1;
        let mut s = Search {
            cols: &cols,
            mu,
            bstar,
            prefix: j,
            norm,
            best_key: seed_key,
            best_x,
            bound: l2_bound(seed_key, norm, n),
            x: vec![0; n],
            nodes: 0,
            budget: budget.saturating_sub(nodes),
        };
        s.descend(n - 1, 0.0)?;
        nodes += s.nodes;
        let x = s.best_x;
        let coeff = transform_coefficients(&h, &x);
        let v = combine(&original, &coeff);
        let k = key(&v, norm);
        lambdas.push(if norm == Norm::L2 { k.sqrt() } else { k });
        coefficients.push(coeff);
        if j + 1 < n {
            let g = x[j..].iter().fold(0i64, |acc, &v| num_integer::gcd(acc, v));
            let tail: Vec<i64> = x[j..].iter().map(|&v| v / g).collect();
            let u = complete_primitive_i64(&tail).ok_or(LatticeError::OracleOverflow)?;
            let old_c: Vec<Vec<f64>> = cols[j..].to_vec();
            let old_h: Vec<Vec<i64>> = h[j..].to_vec();
            for (t, ut) in u.iter().enumerate() {
                let mut c = vec![0.0; n];
                let mut hh = vec![0i64; n];
                for (s, &coef) in ut.iter().enumerate() {
                    if coef != 0 {
                        for (ci, oi) in c.iter_mut().zip(&old_c[s]) {
                            *ci += coef as f64 * oi;
                        }
                        for (hi, oi) in hh.iter_mut().zip(&old_h[s]) {
                            *hi += coef * oi;
                        }
                    }
                }
                cols[j + t] = c;
                h[j + t] = hh;
            }
            lll_float(&mut cols, &mut h, 0.99, Some(j + 1))?;
        }
    }
    // Greedy order can drift by rounding; report sorted values.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]));
    let lambdas: Vec<f64> = order.iter().map(|&i| lambdas[i]).collect();
    let coefficients = order.iter().map(|&i| coefficients[i].clone()).collect();
    let errors = lambdas
        .iter()
        .map(|l| n as f64 * f64::EPSILON * condition * l)
        .collect();
    Ok(FloatMinimaResult {
        norm,
        lambdas,
        errors,
        coefficients,
        condition,
        nodes,
    })
}
