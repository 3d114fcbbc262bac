//! Full-rank lattices given by column bases: LLL reduction, successive
//! minima (exact or float), duals and Minkowski-type bound checks.
//!
//! Exact values are kept as squared norms for l2 and as norms for l∞, so no
//! square root is ever taken.

mod enumerate;
mod float;
mod linf;
mod lll;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{same_lattice, FloatMatrix, Matrix};
use crate::rational::{factorial, int, pow, rat, to_f64, Rational};

pub use enumerate::{brute_force_minima, required_box};

/// Largest dimension accepted by the exact enumerator.
pub const MAX_EXACT_DIM: usize = 8;
/// Default enumeration node budget.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("basis is singular")]
    SingularBasis,
    #[error("basis must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("enumeration budget of {budget} nodes exceeded (squared radius {radius_squared})")]
    EnumerationBudgetExceeded { budget: u64, radius_squared: f64 },
    #[error("coefficient box {given} too small, need at least {required}")]
    BoxTooSmall { given: u64, required: BigInt },
    #[error("operation needs an exact basis")]
    ExactModeRequired,
    #[error("dimension {d} exceeds the exact limit {max}")]
    DimensionTooLarge { d: usize, max: usize },
    #[error("LLL parameter must lie in (1/4, 1), got {0}")]
    InvalidDelta(String),
    #[error("integer overflow in the brute-force oracle")]
    OracleOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    LInf,
}

impl Norm {
    pub fn name(self) -> &'static str {
        match self {
            Norm::L2 => "l2",
            Norm::LInf => "linf",
        }
    }
}

/// `‖x‖∞² <= ‖x‖₂² <= d·‖x‖∞²`, hence `λ_j(∞)² <= λ_j(2)² <= d·λ_j(∞)²`.
pub fn norm_equivalence_squared(d: usize) -> Rational {
    int(d as i64)
}

#[derive(Debug, Clone, PartialEq)]
enum Entries {
    Exact(Matrix),
    Float(FloatMatrix),
}

/// A square nonsingular basis; lattice vectors are integer combinations of
/// its columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    entries: Entries,
    covolume: Option<Rational>,
    covolume_f64: f64,
}

fn check_square(rows: usize, cols: usize) -> Result<(), LatticeError> {
    if rows != cols || rows == 0 {
        return Err(LatticeError::NotSquare { rows, cols });
    }
    Ok(())
}

impl LatticeBasis {
    pub fn exact(m: Matrix) -> Result<Self, LatticeError> {
        check_square(m.rows(), m.cols())?;
        let det = m.det();
        if det.is_zero() {
            return Err(LatticeError::SingularBasis);
        }
        let covolume = det.abs();
        Ok(Self {
            covolume_f64: to_f64(&covolume),
            covolume: Some(covolume),
            entries: Entries::Exact(m),
        })
    }

    pub fn float(m: FloatMatrix) -> Result<Self, LatticeError> {
        check_square(m.rows(), m.cols())?;
        if m.entries().iter().any(|x| !x.is_finite()) {
            return Err(LatticeError::SingularBasis);
        }
        let det = m.det().abs();
        if det == 0.0 || m.inverse().is_none() {
            return Err(LatticeError::SingularBasis);
        }
        Ok(Self {
            entries: Entries::Float(m),
            covolume: None,
            covolume_f64: det,
        })
    }

    pub fn from_columns(cols: &[Vec<Rational>]) -> Result<Self, LatticeError> {
        let m = Matrix::from_columns(cols).ok_or(LatticeError::NotSquare {
            rows: cols.first().map_or(0, Vec::len),
            cols: cols.len(),
        })?;
        Self::exact(m)
    }

    pub fn identity(d: usize) -> Self {
        Self::exact(Matrix::identity(d)).expect("identity is nonsingular")
    }

    pub fn d(&self) -> usize {
        match &self.entries {
            Entries::Exact(m) => m.cols(),
            Entries::Float(m) => m.cols(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, Entries::Exact(_))
    }

    pub fn exact_matrix(&self) -> Option<&Matrix> {
        match &self.entries {
            Entries::Exact(m) => Some(m),
            Entries::Float(_) => None,
        }
    }

    pub fn float_matrix(&self) -> FloatMatrix {
        match &self.entries {
            Entries::Exact(m) => m.to_float(),
            Entries::Float(m) => m.clone(),
        }
    }

    /// `|det|`, exact in exact mode.
    pub fn covolume(&self) -> Option<&Rational> {
        self.covolume.as_ref()
    }

    pub fn covolume_f64(&self) -> f64 {
        self.covolume_f64
    }

    /// Basis of `c·Λ`.
    pub fn scaled(&self, c: &Rational) -> Result<Self, LatticeError> {
        match &self.entries {
            Entries::Exact(m) => Self::exact(m.scale(c)),
            Entries::Float(m) => {
                let f = to_f64(c);
                Self::float(FloatMatrix::new(
                    m.rows(),
                    m.cols(),
                    m.entries().iter().map(|x| x * f).collect(),
                ))
            }
        }
    }

    /// Basis of `T·Λ`.
    pub fn transformed(&self, t: &Matrix) -> Result<Self, LatticeError> {
        match &self.entries {
            Entries::Exact(m) => Self::exact(t.mul(m)),
            Entries::Float(m) => Self::float(t.to_float().mul(m)),
        }
    }

    /// Whether both exact bases generate the same lattice.
    pub fn same_lattice(&self, other: &LatticeBasis) -> Result<bool, LatticeError> {
        let a = self.exact_matrix().ok_or(LatticeError::ExactModeRequired)?;
        let b = other.exact_matrix().ok_or(LatticeError::ExactModeRequired)?;
        Ok(same_lattice(a, b))
    }
}

/// Output of [`lll_reduce`]: `basis = input · transform`, transform unimodular.
#[derive(Debug, Clone)]
pub struct LllOutput {
    pub basis: LatticeBasis,
    /// Columns of the integer transform.
    pub transform: Vec<Vec<BigInt>>,
}

fn check_delta(delta: &Rational) -> Result<(), LatticeError> {
    if *delta <= rat(1, 4) || *delta >= int(1) {
        return Err(LatticeError::InvalidDelta(delta.to_string()));
    }
    Ok(())
}

pub fn lll_reduce(basis: &LatticeBasis, delta: &Rational) -> Result<LllOutput, LatticeError> {
    check_delta(delta)?;
    let d = basis.d();
    match &basis.entries {
        Entries::Exact(m) => {
            let (scale, mut cols) = m.integer_columns();
            let mut h = enumerate::identity_columns(d);
            lll::lll_integral(&mut cols, &mut h, delta.numer(), delta.denom(), None)?;
            let s = Rational::from_integer(scale);
            let reduced: Vec<Vec<Rational>> = cols
                .into_iter()
                .map(|c| c.into_iter().map(|x| Rational::from_integer(x) / &s).collect())
                .collect();
            Ok(LllOutput {
                basis: LatticeBasis::from_columns(&reduced)?,
                transform: h,
            })
        }
        Entries::Float(m) => {
            let mut cols: Vec<Vec<f64>> = (0..d).map(|j| m.column(j)).collect();
            let mut h: Vec<Vec<i64>> = (0..d)
                .map(|j| (0..d).map(|i| (i == j) as i64).collect())
                .collect();
            lll::lll_float(&mut cols, &mut h, to_f64(delta), None)?;
            let mut out = FloatMatrix::zeros(d, d);
            for (j, c) in cols.iter().enumerate() {
                for (i, v) in c.iter().enumerate() {
                    out.set(i, j, *v);
                }
            }
            Ok(LllOutput {
                basis: LatticeBasis::float(out)?,
                transform: h
                    .into_iter()
                    .map(|c| c.into_iter().map(BigInt::from).collect())
                    .collect(),
            })
        }
    }
}

/// Exact successive minima.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaResult {
    pub norm: Norm,
    /// `λ_j²` under l2, `λ_j` under l∞.
    pub values: Vec<Rational>,
    /// Lattice vectors attaining the minima.
    pub witnesses: Vec<Vec<Rational>>,
    /// Integer coordinates of the witnesses in the input basis.
    pub coefficients: Vec<Vec<BigInt>>,
    /// Enumeration nodes visited.
    pub nodes: u64,
}

impl MinimaResult {
    /// `λ_j²` for either norm.
    pub fn squared(&self) -> Vec<Rational> {
        match self.norm {
            Norm::L2 => self.values.clone(),
            Norm::LInf => self.values.iter().map(|v| v * v).collect(),
        }
    }

    pub fn lambdas_f64(&self) -> Vec<f64> {
        match self.norm {
            Norm::L2 => self.values.iter().map(|v| to_f64(v).sqrt()).collect(),
            Norm::LInf => self.values.iter().map(to_f64).collect(),
        }
    }

    pub fn witnesses_independent(&self) -> bool {
        Matrix::from_columns(&self.witnesses).is_some_and(|m| m.is_square() && !m.det().is_zero())
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Float successive minima with error estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloatMinimaResult {
    pub norm: Norm,
    /// `λ_j` (not squared).
    pub lambdas: Vec<f64>,
    pub errors: Vec<f64>,
    pub coefficients: Vec<Vec<i64>>,
    /// Frobenius condition number of the basis.
    pub condition: f64,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaOptions {
    pub norm: Norm,
    pub delta: Rational,
    pub budget: u64,
}

impl Default for MinimaOptions {
    fn default() -> Self {
        Self {
            norm: Norm::L2,
            delta: rat(99, 100),
            budget: DEFAULT_BUDGET,
        }
    }
}

impl MinimaOptions {
    pub fn with_norm(norm: Norm) -> Self {
        Self { norm, ..Self::default() }
    }
}

/// Exact l2 successive minima with default options.
pub fn successive_minima(basis: &LatticeBasis) -> Result<MinimaResult, LatticeError> {
    successive_minima_with(basis, &MinimaOptions::default())
}

pub fn successive_minima_with(
    basis: &LatticeBasis,
    opts: &MinimaOptions,
) -> Result<MinimaResult, LatticeError> {
    check_delta(&opts.delta)?;
    let m = basis.exact_matrix().ok_or(LatticeError::ExactModeRequired)?;
    if m.cols() > MAX_EXACT_DIM {
        return Err(LatticeError::DimensionTooLarge { d: m.cols(), max: MAX_EXACT_DIM });
    }
    enumerate::exact_minima(m, opts.norm, &opts.delta, opts.budget)
}

/// Float successive minima; exact bases are converted first.
pub fn successive_minima_float(
    basis: &LatticeBasis,
    norm: Norm,
    budget: u64,
) -> Result<FloatMinimaResult, LatticeError> {
    float::float_minima(&basis.float_matrix(), norm, budget)
}

/// Basis `B^{-T}` of the dual lattice.
pub fn dual_basis(basis: &LatticeBasis) -> Result<LatticeBasis, LatticeError> {
    match &basis.entries {
        Entries::Exact(m) => {
            LatticeBasis::exact(m.inverse().ok_or(LatticeError::SingularBasis)?.transpose())
        }
        Entries::Float(m) => {
            LatticeBasis::float(m.inverse().ok_or(LatticeError::SingularBasis)?.transpose())
        }
    }
}

/// Whether `⟨b_i, b*_j⟩ = δ_ij` exactly for the columns of the two bases.
pub fn is_dual_pair(basis: &LatticeBasis, dual: &LatticeBasis) -> Result<bool, LatticeError> {
    let a = basis.exact_matrix().ok_or(LatticeError::ExactModeRequired)?;
    let b = dual.exact_matrix().ok_or(LatticeError::ExactModeRequired)?;
    Ok(a.transpose().mul(b) == Matrix::identity(a.cols()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualMinimaReport {
    pub d: usize,
    /// `λ_r(Λ)² · λ_{d+1-r}(Λ*)²` for `r = 1..=d`.
    pub products_squared: Vec<Rational>,
    pub lower: Rational,
    /// `(d!)²`.
    pub upper: Rational,
    pub pass: bool,
}

/// Checks `1 <= λ_r(Λ) λ_{d+1-r}(Λ*) <= d!` exactly on squares (l2).
pub fn dual_minima_check(basis: &LatticeBasis) -> Result<DualMinimaReport, LatticeError> {
    let primal = successive_minima(basis)?;
    let dual = successive_minima(&dual_basis(basis)?)?;
    Ok(dual_minima_report(&primal, &dual))
}

pub fn dual_minima_report(primal: &MinimaResult, dual: &MinimaResult) -> DualMinimaReport {
    let d = primal.values.len();
    let (p, q) = (primal.squared(), dual.squared());
    let products_squared: Vec<Rational> = (0..d).map(|r| &p[r] * &q[d - 1 - r]).collect();
    let f = Rational::from_integer(factorial(d));
    let upper = &f * &f;
    let lower = Rational::one();
    let pass = products_squared.iter().all(|x| *x >= lower && *x <= upper);
    DualMinimaReport {
        d,
        products_squared,
        lower,
        upper,
        pass,
    }
}

/// Two-sided Minkowski bound `(2^d/d!)·covol <= V_d·∏λ_j <= 2^d·covol`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiReport {
    pub norm: Norm,
    /// `∏λ_j` (l∞) or `∏λ_j²` (l2), exact.
    pub product: Rational,
    /// `(value, lower, upper)` of the bound, exact under l∞.
    pub exact: Option<(Rational, Rational, Rational)>,
    pub value_f64: f64,
    pub lower_f64: f64,
    pub upper_f64: f64,
    pub pass: bool,
    /// `min(value - lower, upper - value)`.
    pub slack_f64: f64,
}

/// Volume of the unit l2 ball in dimension `d`.
pub fn unit_ball_volume_l2(d: usize) -> f64 {
    // V_d = π^{d/2} / Γ(d/2 + 1), by recursion V_d = 2π/d · V_{d-2}.
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

pub fn minkowski_second_check(
    basis: &LatticeBasis,
    norm: Norm,
) -> Result<MinkowskiReport, LatticeError> {
    let minima = successive_minima_with(basis, &MinimaOptions::with_norm(norm))?;
    let covol = basis.covolume().ok_or(LatticeError::ExactModeRequired)?;
    Ok(minkowski_report(&minima, covol))
}

pub fn minkowski_report(minima: &MinimaResult, covol: &Rational) -> MinkowskiReport {
    let d = minima.values.len();
    let product: Rational = minima.values.iter().product();
    let two_d = pow(&int(2), d as i32);
    let fact = Rational::from_integer(factorial(d));
    match minima.norm {
        Norm::LInf => {
            let value = &product * &two_d;
            let lower = &two_d * covol / &fact;
            let upper = &two_d * covol;
            let pass = lower <= value && value <= upper;
            let slack = (&value - &lower).min(&upper - &value);
            MinkowskiReport {
                norm: Norm::LInf,
                value_f64: to_f64(&value),
                lower_f64: to_f64(&lower),
                upper_f64: to_f64(&upper),
                slack_f64: to_f64(&slack),
                exact: Some((value, lower, upper)),
                product,
                pass,
            }
        }
        Norm::L2 => {
            let vd = unit_ball_volume_l2(d);
            let value = to_f64(&product).sqrt() * vd;
            let c = to_f64(covol);
            let lower = to_f64(&two_d) / to_f64(&fact) * c;
            let upper = to_f64(&two_d) * c;
            let tol = 1e-9 * upper;
            let pass = lower - tol <= value && value <= upper + tol;
            MinkowskiReport {
                norm: Norm::L2,
                product,
                exact: None,
                value_f64: value,
                lower_f64: lower,
                upper_f64: upper,
                pass,
                slack_f64: (value - lower).min(upper - value),
            }
        }
    }
}

/// Exact check of the l∞ floor `λ_d^d · d! >= covol`, i.e.
/// `λ_d >= (2^d/(d!·V_d))^{1/d}` for unimodular lattices.
pub fn minkowski_floor_holds(minima: &MinimaResult, covol: &Rational) -> bool {
    assert_eq!(minima.norm, Norm::LInf, "floor is stated in l∞");
    let d = minima.values.len();
    let last = &minima.values[d - 1];
    pow(last, d as i32) * Rational::from_integer(factorial(d)) >= *covol
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[Rational]) -> LatticeBasis {
        LatticeBasis::exact(Matrix::diagonal(v)).unwrap()
    }

    fn from_int_rows(rows: &[&[i64]]) -> LatticeBasis {
        LatticeBasis::exact(
            Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
                .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identity_minima() {
        for d in 1..=4 {
            let r = successive_minima(&LatticeBasis::identity(d)).unwrap();
            assert_eq!(r.values, vec![int(1); d]);
            assert!(r.witnesses_independent());
        }
    }

    #[test]
    fn diagonal_examples() {
        let r = successive_minima(&diag(&[int(2), rat(1, 2)])).unwrap();
        assert_eq!(r.values, vec![rat(1, 4), int(4)]);
        let b = diag(&[int(3), rat(1, 3)]);
        let o = brute_force_minima(&b, 9, Norm::L2).unwrap();
        assert_eq!(o.values, vec![rat(1, 9), int(9)]);
        let z = brute_force_minima(&LatticeBasis::identity(2), 1, Norm::L2).unwrap();
        assert_eq!(z.values, vec![int(1), int(1)]);
    }

    #[test]
    fn box_too_small_reports_requirement() {
        let b = diag(&[int(3), rat(1, 3)]);
        // (0, 3) = 9·(0, 1/3) has norm equal to the column bound 3.
        match brute_force_minima(&b, 3, Norm::L2) {
            Err(LatticeError::BoxTooSmall { required, .. }) => assert_eq!(required, BigInt::from(9)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn singular_basis_rejected() {
        let m = Matrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(4)]]).unwrap();
        assert_eq!(LatticeBasis::exact(m), Err(LatticeError::SingularBasis));
    }

    #[test]
    fn lll_keeps_lattice_and_covolume() {
        let b = from_int_rows(&[&[1, 4, 9], &[0, 1, 5], &[0, 0, 1]]);
        let out = lll_reduce(&b, &rat(3, 4)).unwrap();
        assert!(out.basis.same_lattice(&b).unwrap());
        assert_eq!(out.basis.covolume(), b.covolume());
        assert!(out.basis.same_lattice(&LatticeBasis::identity(3)).unwrap());
        assert!(lll_reduce(&b, &rat(1, 4)).is_err());
    }

    #[test]
    fn dual_examples() {
        let b = diag(&[int(2), rat(1, 2)]);
        let dual = dual_basis(&b).unwrap();
        assert_eq!(dual.exact_matrix().unwrap(), &Matrix::diagonal(&[rat(1, 2), int(2)]));
        assert!(is_dual_pair(&b, &dual).unwrap());
        let rep = dual_minima_check(&b).unwrap();
        assert_eq!(rep.products_squared, vec![int(1), int(1)]);
        assert!(rep.pass);
        let z = dual_minima_check(&LatticeBasis::identity(3)).unwrap();
        assert!(z.products_squared.iter().all(|p| *p == int(1)));
    }

    #[test]
    fn minkowski_examples() {
        let z = minkowski_second_check(&LatticeBasis::identity(3), Norm::LInf).unwrap();
        let (v, _, u) = z.exact.clone().unwrap();
        assert_eq!(v, u);
        assert!(z.pass);
        let b = diag(&[int(2), rat(1, 2)]);
        let r = minkowski_second_check(&b, Norm::LInf).unwrap();
        assert_eq!(r.product, int(1));
        assert!(r.pass);
        assert!(minkowski_second_check(&b, Norm::L2).unwrap().pass);
    }

    #[test]
    fn linf_minima_and_floor() {
        let b = from_int_rows(&[&[1, 1], &[-1, 1]]);
        let r = successive_minima_with(&b, &MinimaOptions::with_norm(Norm::LInf)).unwrap();
        assert_eq!(r.values, vec![int(1), int(1)]);
        assert!(minkowski_floor_holds(&r, b.covolume().unwrap()));
    }

    #[test]
    fn float_mode_matches_exact() {
        let b = from_int_rows(&[&[3, 1, 0], &[1, 4, 1], &[0, 2, 5]]);
        let e = successive_minima(&b).unwrap().lambdas_f64();
        let f = successive_minima_float(&b, Norm::L2, DEFAULT_BUDGET).unwrap();
        for (x, y) in e.iter().zip(&f.lambdas) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(f.errors.iter().all(|e| *e > 0.0 && *e < 1e-10));
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume_l2(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume_l2(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume_l2(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
