//! LLL reduction: a fraction-free integral version for exact lattices and a
//! plain floating-point version for float bases.
//!
//! Both work on columns and record the unimodular transform `H` with
//! `reduced = input * H`. An optional `frozen` boundary `f` forbids swapping
//! positions `f - 1` and `f`, so the span of the first `f` columns is kept.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::LatticeError;

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nearest integer to `a / b` for `b > 0`, ties upwards.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let num: BigInt = a * 2 + b;
    num.div_floor(&(b * 2))
}

fn axpy(target: &mut [BigInt], q: &BigInt, source: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(source) {
        *t -= q * s;
    }
}

/// Integral LLL (Cohen, Algorithm 2.6.7) with `delta = p/q`.
///
/// `cols` are the basis vectors, `h` the transform columns (updated in
/// lockstep). Fails with `SingularBasis` on dependent input.
pub(crate) fn lll_integral(
    cols: &mut [Vec<BigInt>],
    h: &mut [Vec<BigInt>],
    p: &BigInt,
    q: &BigInt,
    frozen: Option<usize>,
) -> Result<(), LatticeError> {
    let n = cols.len();
    if n <= 1 {
        if n == 1 && cols[0].iter().all(Zero::is_zero) {
            return Err(LatticeError::SingularBasis);
        }
        return Ok(());
    }
    // 1-based bookkeeping: d[0] = 1, d[i] = Gram determinant of b_1..b_i,
    // lam[k][j] = d[j] * mu_kj.
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n + 1]; n + 1];
    d[0] = BigInt::one();
    d[1] = dot(&cols[0], &cols[0]);
    if d[1].is_zero() {
        return Err(LatticeError::SingularBasis);
    }
    let mut k = 2;
    let mut kmax = 1;

    let redi = |k: usize, l: usize,
                cols: &mut [Vec<BigInt>],
                h: &mut [Vec<BigInt>],
                lam: &mut [Vec<BigInt>],
                d: &[BigInt]| {
        let twice: BigInt = &lam[k][l] * 2;
        if twice.abs() > d[l] {
            let r = round_div(&lam[k][l], &d[l]);
            let (bl, hl) = (cols[l - 1].clone(), h[l - 1].clone());
            axpy(&mut cols[k - 1], &r, &bl);
            axpy(&mut h[k - 1], &r, &hl);
            let dl = d[l].clone();
            lam[k][l] -= &r * dl;
            for i in 1..l {
                let v = &r * &lam[l][i];
                lam[k][i] -= v;
            }
        }
    };

    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&cols[k - 1], &cols[j - 1]);
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(LatticeError::SingularBasis);
                    }
                    d[k] = u;
                }
            }
        }
        loop {
            redi(k, k - 1, cols, h, &mut lam, &d);
            let swap_allowed = frozen != Some(k - 1);
            let lhs = q * &d[k] * &d[k - 2];
            let rhs = p * &d[k - 1] * &d[k - 1] - q * &lam[k][k - 1] * &lam[k][k - 1];
            if swap_allowed && lhs < rhs {
                // SWAPI(k)
                cols.swap(k - 1, k - 2);
                h.swap(k - 1, k - 2);
                for j in 1..k - 1 {
                    let t = lam[k][j].clone();
                    lam[k][j] = lam[k - 1][j].clone();
                    lam[k - 1][j] = t;
                }
                let l = lam[k][k - 1].clone();
                let b = (&d[k - 2] * &d[k] + &l * &l) / &d[k - 1];
                for i in k + 1..=kmax {
                    let t = lam[i][k].clone();
                    lam[i][k] = (&d[k] * &lam[i][k - 1] - &l * &t) / &d[k - 1];
                    lam[i][k - 1] = (&b * &t + &l * &lam[i][k]) / &d[k];
                }
                d[k - 1] = b;
                if k > 2 {
                    k -= 1;
                }
                continue;
            }
            for l in (1..k - 1).rev() {
                redi(k, l, cols, h, &mut lam, &d);
            }
            k += 1;
            break;
        }
    }
    Ok(())
}

fn fdot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt coefficients `mu[i][j]` and squared lengths `bstar[i]`.
pub(crate) fn gso_float(cols: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = cols.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar = vec![0.0; n];
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            mu[i][j] = fdot(&cols[i], &star[j]) / bstar[j];
            for (x, s) in v.iter_mut().zip(&star[j]) {
                *x -= mu[i][j] * s;
            }
        }
        bstar[i] = fdot(&v, &v);
        star.push(v);
    }
    (mu, bstar)
}

/// Floating LLL with integer transform tracking. Stops after a generous
/// iteration cap so rounding noise cannot loop forever.
pub(crate) fn lll_float(
    cols: &mut [Vec<f64>],
    h: &mut [Vec<i64>],
    delta: f64,
    frozen: Option<usize>,
) -> Result<(), LatticeError> {
    let n = cols.len();
    let scale = cols
        .iter()
        .map(|c| fdot(c, c))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut k = 1;
    let cap = 10_000 * (n * n + 1);
    let mut iterations = 0;
    while k < n {
        iterations += 1;
        if iterations > cap {
            break;
        }
        let (mu, _) = gso_float(cols);
        let mut mu_k = mu[k].clone();
        for j in (0..k).rev() {
            let r = mu_k[j].round();
            if r != 0.0 {
                let (bj, hj) = (cols[j].clone(), h[j].clone());
                for (x, y) in cols[k].iter_mut().zip(&bj) {
                    *x -= r * y;
                }
                let ri = r as i64;
                for (x, y) in h[k].iter_mut().zip(&hj) {
                    *x -= ri * y;
                }
                for (i, m) in mu_k.iter_mut().enumerate().take(j) {
                    *m -= r * mu[j][i];
                }
                mu_k[j] -= r;
            }
        }
        let (mu, bstar) = gso_float(cols);
        if bstar.iter().any(|b| !(b.is_finite()) || *b <= scale * 1e-300) {
            return Err(LatticeError::SingularBasis);
        }
        let m = mu[k][k - 1];
        if frozen != Some(k) && bstar[k] < (delta - m * m) * bstar[k - 1] {
            cols.swap(k, k - 1);
            h.swap(k, k - 1);
            k = k.saturating_sub(1).max(1);
        } else {
            k += 1;
        }
    }
    Ok(())
}
