//! Exact successive minima by staged Schnorr-Euchner enumeration, plus the
//! independent brute-force box oracle.
//!
//! Stage `j` looks for the shortest lattice vector outside the span `V` of
//! the witnesses found so far. The working basis is arranged so that its
//! first `j` columns span the primitive sublattice `V ∩ Λ`; then "outside
//! `V`" just means some coordinate at index `>= j` is nonzero, which lets
//! whole subtrees be pruned. Greedy selection of shortest independent
//! vectors yields the successive minima, so each stage is a single
//! shrinking-radius search.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linf::LinfBound;
use super::lll::lll_integral;
use super::{LatticeBasis, LatticeError, MinimaResult, Norm};
use crate::matrix::{Matrix, RankTracker};
use crate::rational::{ceil_sqrt, int, round_half_up, to_f64, Rational};

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(cols: &[Vec<BigInt>], x: &[i64]) -> Vec<BigInt> {
    let dim = cols[0].len();
    let mut v = vec![BigInt::zero(); dim];
    for (c, &xi) in cols.iter().zip(x) {
        if xi != 0 {
            let k = BigInt::from(xi);
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi += &k * ci;
            }
        }
    }
    v
}

/// Norm key of an integer vector: squared l2 length or l∞ length.
fn key(v: &[BigInt], norm: Norm) -> BigInt {
    match norm {
        Norm::L2 => dot(v, v),
        Norm::LInf => v.iter().map(|x| x.abs()).max().unwrap_or_default(),
    }
}

/// Squared l2 radius that covers every vector whose key is at most `k`.
fn l2_bound(k: &BigInt, norm: Norm, dim: usize) -> Rational {
    match norm {
        Norm::L2 => Rational::from_integer(k.clone()),
        Norm::LInf => Rational::from_integer(k * k * BigInt::from(dim)),
    }
}

struct Gso {
    mu: Vec<Vec<Rational>>,
    bstar: Vec<Rational>,
}

fn gso(cols: &[Vec<BigInt>]) -> Gso {
    let n = cols.len();
    let mut mu = vec![vec![Rational::zero(); n]; n];
    let mut r = vec![vec![Rational::zero(); n]; n];
    let mut bstar = vec![Rational::zero(); n];
    for i in 0..n {
        for j in 0..=i {
            let mut v = Rational::from_integer(dot(&cols[i], &cols[j]));
            for k in 0..j {
                v -= &mu[j][k] * &r[i][k];
            }
            r[i][j] = v;
            if j < i {
                mu[i][j] = &r[i][j] / &bstar[j];
            }
        }
        bstar[i] = r[i][i].clone();
    }
    Gso { mu, bstar }
}

struct Search<'a> {
    cols: &'a [Vec<BigInt>],
    g: Gso,
    prefix: usize,
    norm: Norm,
    dim: usize,
    best_key: BigInt,
    best_x: Vec<i64>,
    bound: Rational,
    x: Vec<i64>,
    nodes: u64,
    budget: u64,
    linf: Option<LinfBound>,
}

impl Search<'_> {
    fn descend(&mut self, k: usize, partial: &Rational) -> Result<(), LatticeError> {
        let n = self.x.len();
        let outer_zero = self.x[k + 1..].iter().all(|&v| v == 0);
        let mut center = Rational::zero();
        for i in k + 1..n {
            if self.x[i] != 0 {
                center -= &self.g.mu[i][k] * Rational::from_integer(BigInt::from(self.x[i]));
            }
        }
        let start = round_half_up(&center).to_i64().ok_or(self.exceeded())?;
        if k == 0 && self.prefix > 0 {
            return self.bottom(partial, start);
        }
        // Up sweep from the rounded centre, then down sweep. Sign symmetry:
        // with all outer coordinates zero only x_k >= 0 is visited.
        for dir in [1i64, -1] {
            if dir == -1 && outer_zero {
                break;
            }
            let mut xk = if dir == 1 { start } else { start - 1 };
            if outer_zero && xk < 0 {
                xk = 0;
            }
            loop {
                let diff = Rational::from_integer(BigInt::from(xk)) - &center;
                let total = partial + &diff * &diff * &self.g.bstar[k];
                if total > self.bound {
                    break;
                }
                self.tick()?;
                self.x[k] = xk;
                if k == 0 {
                    self.leaf();
                } else if !(k == self.prefix && self.x[k..].iter().all(|&v| v == 0)) && !self.lp_prunes(k) {
                    self.descend(k - 1, &total)?;
                }
                xk += dir;
            }
            self.x[k] = 0;
        }
        Ok(())
    }

    fn lp_prunes(&mut self, k: usize) -> bool {
        let Some(lb) = self.linf.as_mut() else {
            return false;
        };
        let c = combine(self.cols, &self.x);
        lb.prunes(k, &c, &self.best_key)
    }

    fn exceeded(&self) -> LatticeError {
        LatticeError::EnumerationBudgetExceeded {
            budget: self.budget,
            radius_squared: to_f64(&self.bound),
        }
    }

    fn tick(&mut self) -> Result<(), LatticeError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(self.exceeded());
        }
        Ok(())
    }

    /// Level 0 inside the prefix: every integer `x_0` is allowed, and the
    /// key is convex in `x_0`, so only its integer minimiser is visited.
    fn bottom(&mut self, partial: &Rational, start: i64) -> Result<(), LatticeError> {
        let rem = &self.bound - partial;
        if rem.is_negative() {
            return Ok(());
        }
        self.tick()?;
        let x0 = match self.norm {
            Norm::L2 => start,
            Norm::LInf => {
                let r = ceil_sqrt(&(rem / &self.g.bstar[0])).to_i64().ok_or(self.exceeded())?;
                let c = combine(self.cols, &self.x);
                let b0 = &self.cols[0];
                let g = |y: i64| -> BigInt {
                    let y = BigInt::from(y);
                    c.iter().zip(b0).map(|(ci, bi)| (ci + &y * bi).abs()).max().unwrap_or_default()
                };
                let (mut lo, mut hi) = (start - r - 1, start + r + 1);
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    self.tick()?;
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
        let v = combine(self.cols, &self.x);
        let k = key(&v, self.norm);
        if k < self.best_key {
            self.bound = l2_bound(&k, self.norm, self.dim);
            self.best_key = k;
            self.best_x = self.x.clone();
        }
    }
}

/// Shortest vector (by `norm`) among those with a nonzero coordinate at an
/// index `>= prefix`. Returns its coefficient vector and key.
fn shortest_outside(
    cols: &[Vec<BigInt>],
    prefix: usize,
    norm: Norm,
    budget: u64,
) -> Result<(Vec<i64>, BigInt, u64), LatticeError> {
    let n = cols.len();
    let dim = cols[0].len();
    let (seed, seed_key) = (prefix..n)
        .map(|j| (j, key(&cols[j], norm)))
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("prefix below dimension");
    let mut best_x = vec![0; n];
    best_x[seed] = 1;
    let g = gso(cols);
    let linf = (norm == Norm::LInf && n > 2).then(|| LinfBound::new(cols, &g.mu));
    let mut s = Search {
        cols,
        g,
        linf,
        prefix,
        norm,
        dim,
        bound: l2_bound(&seed_key, norm, dim),
        best_key: seed_key,
        best_x,
        x: vec![0; n],
        nodes: 0,
        budget,
    };
    s.descend(n - 1, &Rational::zero())?;
    Ok((s.best_x, s.best_key, s.nodes))
}

/// Unimodular `U` (columns) whose first column is the primitive vector `y`.
fn complete_primitive(y: &[BigInt]) -> Vec<Vec<BigInt>> {
    let s = y.len();
    let mut y = y.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..s)
        .map(|j| (0..s).map(|i| BigInt::from((i == j) as i64)).collect())
        .collect();
    // Row operations E with E*y -> e_0, applied to U = E^{-1} as the inverse
    // column operations.
    loop {
        let nonzero: Vec<usize> = (0..s).filter(|&i| !y[i].is_zero()).collect();
        if nonzero.len() <= 1 {
            break;
        }
        let p = *nonzero.iter().min_by_key(|&&i| y[i].abs()).unwrap();
        for &i in &nonzero {
            if i == p {
                continue;
            }
            let q = &y[i] / &y[p];
            if q.is_zero() {
                continue;
            }
            // row_i -= q row_p  <=>  col_p += q col_i
            y[i] = &y[i] - &q * &y[p];
            let ci = u[i].clone();
            for (a, b) in u[p].iter_mut().zip(&ci) {
                *a += &q * b;
            }
        }
    }
    let p = (0..s).find(|&i| !y[i].is_zero()).expect("nonzero vector");
    debug_assert!(y[p].abs().is_one(), "vector is primitive");
    if p != 0 {
        y.swap(0, p);
        u.swap(0, p);
    }
    if y[0].is_negative() {
        for v in u[0].iter_mut() {
            *v = -v.clone();
        }
    }
    u
}

pub(crate) fn complete_primitive_i64(y: &[i64]) -> Option<Vec<Vec<i64>>> {
    let big: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
    complete_primitive(&big)
        .iter()
        .map(|c| c.iter().map(|x| x.to_i64()).collect())
        .collect()
}

fn apply_block(cols: &mut [Vec<BigInt>], from: usize, u: &[Vec<BigInt>]) {
    let old: Vec<Vec<BigInt>> = cols[from..].to_vec();
    for (t, ut) in u.iter().enumerate() {
        let mut v = vec![BigInt::zero(); old[0].len()];
        for (s, coef) in ut.iter().enumerate() {
            if !coef.is_zero() {
                for (vi, oi) in v.iter_mut().zip(&old[s]) {
                    *vi += coef * oi;
                }
            }
        }
        cols[from + t] = v;
    }
}

pub(crate) fn identity_columns(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|j| (0..n).map(|i| BigInt::from((i == j) as i64)).collect())
        .collect()
}

fn assemble(
    basis_scale: &BigInt,
    norm: Norm,
    keys: Vec<BigInt>,
    vectors: Vec<Vec<BigInt>>,
    coefficients: Vec<Vec<BigInt>>,
    nodes: u64,
) -> MinimaResult {
    let s = Rational::from_integer(basis_scale.clone());
    let values = keys
        .into_iter()
        .map(|k| {
            let k = Rational::from_integer(k);
            match norm {
                Norm::L2 => k / (&s * &s),
                Norm::LInf => k / &s,
            }
        })
        .collect();
    let witnesses = vectors
        .into_iter()
        .map(|v| v.into_iter().map(|x| Rational::from_integer(x) / &s).collect())
        .collect();
    MinimaResult {
        norm,
        values,
        witnesses,
        coefficients,
        nodes,
    }
}

pub(crate) fn exact_minima(
    m: &Matrix,
    norm: Norm,
    delta: &Rational,
    budget: u64,
) -> Result<MinimaResult, LatticeError> {
    let n = m.cols();
    let (scale, mut cols) = m.integer_columns();
    let mut h = identity_columns(n);
    let (p, q) = (delta.numer().clone(), delta.denom().clone());
    lll_integral(&mut cols, &mut h, &p, &q, None)?;
    let mut keys = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut coefficients = Vec::with_capacity(n);
    let mut nodes = 0;
    for j in 0..n {
        let (x, k, visited) = shortest_outside(&cols, j, norm, budget.saturating_sub(nodes))?;
        nodes += visited;
        vectors.push(combine(&cols, &x));
        let coeff: Vec<BigInt> = (0..n)
            .map(|i| (0..n).map(|l| &h[l][i] * BigInt::from(x[l])).sum())
            .collect();
        coefficients.push(coeff);
        keys.push(k);
        if j + 1 < n {
            let tail: Vec<BigInt> = x[j..].iter().map(|&v| BigInt::from(v)).collect();
            let g = tail.iter().fold(BigInt::zero(), |acc, v| num_integer::gcd(acc, v.clone()));
            let prim: Vec<BigInt> = tail.iter().map(|v| v / &g).collect();
            let u = complete_primitive(&prim);
            apply_block(&mut cols, j, &u);
            apply_block(&mut h, j, &u);
            lll_integral(&mut cols, &mut h, &p, &q, Some(j + 1))?;
        }
    }
    Ok(assemble(&scale, norm, keys, vectors, coefficients, nodes))
}

/// Smallest coefficient box radius that contains every lattice vector of
/// norm at most the largest input column norm (a valid bound on `λ_d`).
pub fn required_box(basis: &LatticeBasis, norm: Norm) -> Result<BigInt, LatticeError> {
    let m = basis.exact_matrix().ok_or(LatticeError::ExactModeRequired)?;
    let n = m.cols();
    let cols = m.columns();
    let radius_sq = cols
        .iter()
        .map(|c| match norm {
            Norm::L2 => c.iter().map(|x| x * x).sum::<Rational>(),
            Norm::LInf => {
                let a = c.iter().map(|x| x.abs()).max().unwrap_or_default();
                &a * &a * int(n as i64)
            }
        })
        .max()
        .unwrap_or_default();
    let inv = m.inverse().ok_or(LatticeError::SingularBasis)?;
    let row_sq = (0..n)
        .map(|i| inv.row(i).iter().map(|x| x * x).sum::<Rational>())
        .max()
        .unwrap_or_default();
    Ok(ceil_sqrt(&(row_sq * radius_sq)))
}

/// Exhaustive oracle: every coefficient vector with `‖c‖_∞ <= radius`,
/// images sorted by norm, greedy independent selection.
pub fn brute_force_minima(
    basis: &LatticeBasis,
    radius: u64,
    norm: Norm,
) -> Result<MinimaResult, LatticeError> {
    let required = required_box(basis, norm)?;
    if BigInt::from(radius) < required {
        return Err(LatticeError::BoxTooSmall { given: radius, required });
    }
    let m = basis.exact_matrix().ok_or(LatticeError::ExactModeRequired)?;
    let n = m.cols();
    let (scale, cols) = m.integer_columns();
    let small: Option<Vec<Vec<i128>>> = cols
        .iter()
        .map(|c| c.iter().map(|x| x.to_i64().map(i128::from)).collect())
        .collect();
    let small = small.ok_or(LatticeError::OracleOverflow)?;
    // λ_d never exceeds the longest input column, so longer images are dropped.
    let cutoff = small
        .iter()
        .map(|col| match norm {
            Norm::L2 => col.iter().try_fold(0i128, |acc, x| {
                x.checked_mul(*x).and_then(|p| acc.checked_add(p))
            }),
            Norm::LInf => col.iter().map(|x| x.checked_abs()).try_fold(0i128, |acc, x| {
                x.map(|x| acc.max(x))
            }),
        })
        .try_fold(0i128, |acc, k| k.map(|k| acc.max(k)))
        .ok_or(LatticeError::OracleOverflow)?;
    let mut visited = 0u64;
    let r = radius as i64;
    let mut c = vec![-r; n];
    let mut candidates: Vec<(i128, Vec<i64>)> = Vec::new();
    loop {
        // Sign canonical: first nonzero coordinate positive.
        if let Some(first) = c.iter().position(|&v| v != 0) {
            if c[first] > 0 {
                let mut v = vec![0i128; n];
                for (col, &ci) in small.iter().zip(&c) {
                    if ci != 0 {
                        for (vi, x) in v.iter_mut().zip(col) {
                            *vi = x
                                .checked_mul(ci as i128)
                                .and_then(|p| vi.checked_add(p))
                                .ok_or(LatticeError::OracleOverflow)?;
                        }
                    }
                }
                let k = match norm {
                    Norm::L2 => v.iter().try_fold(0i128, |acc, x| {
                        x.checked_mul(*x).and_then(|p| acc.checked_add(p))
                    }),
                    Norm::LInf => v.iter().map(|x| x.checked_abs()).try_fold(0i128, |acc, x| {
                        x.map(|x| acc.max(x))
                    }),
                }
                .ok_or(LatticeError::OracleOverflow)?;
                visited += 1;
                if k <= cutoff {
                    candidates.push((k, c.clone()));
                }
            }
        }
        let mut i = 0;
        while i < n && c[i] == r {
            c[i] = -r;
            i += 1;
        }
        if i == n {
            break;
        }
        c[i] += 1;
    }
    candidates.sort();
    let mut ech = RankTracker::default();
    let mut keys = Vec::new();
    let mut vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (k, cand) in &candidates {
        if ech.insert_i64(cand) {
            keys.push(BigInt::from(*k));
            vectors.push(combine(&cols, cand));
            coefficients.push(cand.iter().map(|&x| BigInt::from(x)).collect());
            if keys.len() == n {
                break;
            }
        }
    }
    Ok(assemble(&scale, norm, keys, vectors, coefficients, visited))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_completion_is_unimodular() {
        let y: Vec<BigInt> = [6, 10, 15].iter().map(|&v| BigInt::from(v)).collect();
        let u = complete_primitive(&y);
        assert_eq!(u[0], y);
        let m = Matrix::from_integer_columns(&u).unwrap();
        assert_eq!(m.det().abs(), int(1));
    }

    #[test]
    fn shortest_outside_respects_prefix() {
        let cols: Vec<Vec<BigInt>> = vec![
            vec![BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(5)],
        ];
        let (x, k, _) = shortest_outside(&cols, 1, Norm::L2, 1000).unwrap();
        assert_eq!(k, BigInt::from(25));
        assert_ne!(x[1], 0);
    }
}
