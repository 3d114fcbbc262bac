//! Seeded random instances for sweeps and property tests.

use num_traits::Zero;
use rand::Rng;

use crate::matrix::Matrix;
use crate::rational::{int, rat, Rational};

/// Small rational `p/q` with `|p| <= num`, `1 <= q <= den`.
pub fn small_rational<R: Rng + ?Sized>(rng: &mut R, num: i64, den: i64) -> Rational {
    rat(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

/// Random integer matrix with determinant ±1, built from `steps` elementary
/// column operations with multipliers `±1`.
pub fn unimodular_integer<R: Rng + ?Sized>(rng: &mut R, d: usize, steps: usize) -> Matrix {
    let mut m = Matrix::identity(d);
    if d < 2 {
        return m;
    }
    for _ in 0..steps {
        let a = rng.gen_range(0..d);
        let mut b = rng.gen_range(0..d - 1);
        if b >= a {
            b += 1;
        }
        let k = int(if rng.gen_bool(0.5) { 1 } else { -1 });
        // column a += k column b
        for i in 0..d {
            let v = m.get(i, a) + &k * m.get(i, b);
            m.set(i, a, v);
        }
        if rng.gen_bool(0.2) {
            for i in 0..d {
                let v = -m.get(i, a);
                m.set(i, a, v);
            }
        }
    }
    m
}

/// Random rational basis of covolume 1: `diag(a) · U · S` with `∏a = 1`,
/// `U` integer unimodular and `S` a rational unit upper-triangular shear.
pub fn rational_unimodular_basis<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    let choices = [int(1), int(2), rat(1, 2), rat(3, 2), rat(2, 3)];
    let mut diag: Vec<Rational> = (0..d)
        .map(|_| choices[rng.gen_range(0..choices.len())].clone())
        .collect();
    let prod: Rational = diag[..d - 1].iter().product();
    diag[d - 1] = prod.recip();
    let u = unimodular_integer(rng, d, d + 1);
    let mut s = Matrix::identity(d);
    for i in 0..d {
        for j in i + 1..d {
            s.set(i, j, small_rational(rng, 1, 2));
        }
    }
    Matrix::diagonal(&diag).mul(&u).mul(&s)
}

/// Random nonsingular rational matrix with small entries.
pub fn rational_basis<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    loop {
        let data = (0..d * d).map(|_| small_rational(rng, 4, 3)).collect();
        let m = Matrix::new(d, d, data);
        if !m.det().is_zero() {
            return m;
        }
    }
}

/// Random `rows × cols` rational matrix, entries `p/q` with `|p| <= num`, `q <= den`.
pub fn rational_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    num: i64,
    den: i64,
) -> Matrix {
    Matrix::new(
        rows,
        cols,
        (0..rows * cols).map(|_| small_rational(rng, num, den)).collect(),
    )
}

