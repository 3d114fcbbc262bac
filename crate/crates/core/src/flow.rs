//! The diagonal flow `g_t u_A ℤ^d` sampled at rational scales.
//!
//! With `u = e^{t/(mn)}` the flow is `g_t = diag(u^n I_m, u^{-m} I_n)`, so
//! for rational `A` and `u` every basis entry stays rational. `t` is
//! derived from `u` and only used for reporting and trend fits.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{
    dual_basis, dual_minima_report, minkowski_floor_holds, minkowski_report,
    successive_minima_float, successive_minima_with, DualMinimaReport, LatticeBasis,
    LatticeError, MinimaOptions, MinimaResult, Norm, DEFAULT_BUDGET,
};
use crate::matrix::{same_lattice, FloatMatrix, Matrix, RankTracker};
use crate::rational::{factorial, format_rational, int, ln, pow, rat, round_half_up, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("A must be {m}x{n}, got {rows}x{cols}")]
    DimensionMismatch { m: usize, n: usize, rows: usize, cols: usize },
    #[error("scale u must be >= 1, got {0}")]
    InvalidScale(String),
    #[error("u grid must be nonempty and strictly increasing")]
    InvalidGrid,
    #[error("order r = {r} outside [1, {d}]")]
    InvalidOrder { r: usize, d: usize },
    #[error("this check needs a rational matrix A")]
    ExactRequired,
    #[error("Q_max must be at least 2, got {0}")]
    InvalidQmax(i64),
    #[error("scan needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("invalid family spec `{0}`")]
    InvalidFamily(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The matrix `A` of the flow, exact or float.
#[derive(Debug, Clone, PartialEq)]
pub enum AMatrix {
    Exact(Matrix),
    Float(FloatMatrix),
}

impl AMatrix {
    pub fn rows(&self) -> usize {
        match self {
            AMatrix::Exact(a) => a.rows(),
            AMatrix::Float(a) => a.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            AMatrix::Exact(a) => a.cols(),
            AMatrix::Float(a) => a.cols(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AMatrix::Exact(_))
    }

    pub fn exact(&self) -> Option<&Matrix> {
        match self {
            AMatrix::Exact(a) => Some(a),
            AMatrix::Float(_) => None,
        }
    }

    pub fn to_float(&self) -> FloatMatrix {
        match self {
            AMatrix::Exact(a) => a.to_float(),
            AMatrix::Float(a) => a.clone(),
        }
    }

    fn check(&self, m: usize, n: usize) -> Result<(), FlowError> {
        if self.rows() != m || self.cols() != n || m == 0 || n == 0 {
            return Err(FlowError::DimensionMismatch { m, n, rows: self.rows(), cols: self.cols() });
        }
        Ok(())
    }

    /// `A·q` as floats.
    fn apply_f64(&self, q: &[i64]) -> Vec<f64> {
        let a = self.to_float();
        (0..a.rows())
            .map(|i| (0..a.cols()).map(|j| a.get(i, j) * q[j] as f64).sum())
            .collect()
    }
}

fn check_scale(u: &Rational) -> Result<(), FlowError> {
    if *u < Rational::one() {
        return Err(FlowError::InvalidScale(format_rational(u)));
    }
    Ok(())
}

/// `t = mn·ln u`.
pub fn flow_time(m: usize, n: usize, u: &Rational) -> f64 {
    (m * n) as f64 * ln(u)
}

/// `diag(u^n I_m, u^{-m} I_n) · [[I_m, A], [0, I_n]]`.
pub fn flow_matrix(m: usize, n: usize, a: &Matrix, u: &Rational) -> Matrix {
    let d = m + n;
    let up = pow(u, n as i32);
    let down = pow(u, -(m as i32));
    let mut b = Matrix::zeros(d, d);
    for i in 0..m {
        b.set(i, i, up.clone());
        for j in 0..n {
            b.set(i, m + j, &up * a.get(i, j));
        }
    }
    for j in 0..n {
        b.set(m + j, m + j, down.clone());
    }
    b
}

/// `diag(u^{-n} I_m, u^m I_n) · [[I_m, 0], [-Aᵀ, I_n]]`.
pub fn dual_flow_matrix(m: usize, n: usize, a: &Matrix, u: &Rational) -> Matrix {
    let d = m + n;
    let down = pow(u, -(n as i32));
    let up = pow(u, m as i32);
    let mut b = Matrix::zeros(d, d);
    for i in 0..m {
        b.set(i, i, down.clone());
    }
    for j in 0..n {
        b.set(m + j, m + j, up.clone());
        for i in 0..m {
            b.set(m + j, i, -(&up * a.get(i, j)));
        }
    }
    b
}

fn flow_matrix_float(m: usize, n: usize, a: &FloatMatrix, u: &Rational) -> FloatMatrix {
    let d = m + n;
    let up = to_f64(&pow(u, n as i32));
    let down = to_f64(&pow(u, -(m as i32)));
    let mut b = FloatMatrix::zeros(d, d);
    for i in 0..m {
        b.set(i, i, up);
        for j in 0..n {
            b.set(i, m + j, up * a.get(i, j));
        }
    }
    for j in 0..n {
        b.set(m + j, m + j, down);
    }
    b
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowPoint {
    pub m: usize,
    pub n: usize,
    pub u: Rational,
    pub t: f64,
    pub basis: LatticeBasis,
}

pub fn flow_point(m: usize, n: usize, a: &AMatrix, u: &Rational) -> Result<FlowPoint, FlowError> {
    a.check(m, n)?;
    check_scale(u)?;
    let basis = match a {
        AMatrix::Exact(a) => LatticeBasis::exact(flow_matrix(m, n, a, u))?,
        AMatrix::Float(a) => LatticeBasis::float(flow_matrix_float(m, n, a, u))?,
    };
    Ok(FlowPoint { m, n, u: u.clone(), t: flow_time(m, n, u), basis })
}

/// `count` scales `u0·ratio^k`.
pub fn geometric_grid(u0: &Rational, ratio: &Rational, count: usize) -> Result<Vec<Rational>, FlowError> {
    check_scale(u0)?;
    if *ratio <= Rational::one() || count == 0 {
        return Err(FlowError::InvalidGrid);
    }
    let mut out = Vec::with_capacity(count);
    let mut u = u0.clone();
    for _ in 0..count {
        out.push(u.clone());
        u *= ratio;
    }
    Ok(out)
}

/// Geometric grid from `u0`, truncated to scales `<= u_max`.
pub fn grid_up_to(u0: &Rational, ratio: &Rational, u_max: &Rational) -> Result<Vec<Rational>, FlowError> {
    check_scale(u0)?;
    if *ratio <= Rational::one() || u0 > u_max {
        return Err(FlowError::InvalidGrid);
    }
    let mut out = Vec::new();
    let mut u = u0.clone();
    while u <= *u_max {
        out.push(u.clone());
        u *= ratio;
    }
    Ok(out)
}

fn check_grid(grid: &[Rational]) -> Result<(), FlowError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FlowError::InvalidGrid);
    }
    check_scale(&grid[0])
}

/// Largest ratio between consecutive grid scales (1 for a single sample).
pub fn grid_ratio(grid: &[Rational]) -> f64 {
    grid.windows(2)
        .map(|w| to_f64(&(&w[1] / &w[0])))
        .fold(1.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSample {
    #[serde(serialize_with = "ser_rational")]
    pub u: Rational,
    pub t: f64,
    pub lambdas: Vec<f64>,
    pub h: Vec<f64>,
    /// `λ_j²` (l2) or `λ_j` (l∞) in exact mode.
    #[serde(serialize_with = "ser_opt_rationals")]
    pub exact: Option<Vec<Rational>>,
    /// Float-mode error estimates.
    pub errors: Option<Vec<f64>>,
    pub monotone: bool,
    pub minkowski_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSummary {
    pub r: usize,
    pub min_lambda: f64,
    #[serde(serialize_with = "ser_opt_rational")]
    pub min_exact: Option<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub argmin_u: Rational,
    /// Least-squares slope of `h_r` against `t` over the last half of samples.
    pub trend: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaTrace {
    pub m: usize,
    pub n: usize,
    pub norm: Norm,
    pub exact: bool,
    pub samples: Vec<TraceSample>,
    pub summaries: Vec<OrderSummary>,
}

pub(crate) fn ser_rational<S: serde::Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

fn ser_opt_rational<S: serde::Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => s.serialize_some(&format_rational(x)),
        None => s.serialize_none(),
    }
}

fn ser_opt_rationals<S: serde::Serializer>(x: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&v.iter().map(format_rational).collect::<Vec<_>>()),
        None => s.serialize_none(),
    }
}

fn minima_opts(norm: Norm) -> MinimaOptions {
    MinimaOptions::with_norm(norm)
}

pub(crate) fn sample_at(
    m: usize,
    n: usize,
    a: &AMatrix,
    u: &Rational,
    norm: Norm,
) -> Result<(TraceSample, Option<MinimaResult>), FlowError> {
    let fp = flow_point(m, n, a, u)?;
    if fp.basis.is_exact() {
        let r = successive_minima_with(&fp.basis, &minima_opts(norm))?;
        let h = r
            .values
            .iter()
            .map(|v| match norm {
                Norm::L2 => ln(v) / 2.0,
                Norm::LInf => ln(v),
            })
            .collect();
        let mk = minkowski_report(&r, fp.basis.covolume().expect("exact covolume"));
        let sample = TraceSample {
            u: u.clone(),
            t: fp.t,
            lambdas: r.lambdas_f64(),
            h,
            exact: Some(r.values.clone()),
            errors: None,
            monotone: r.is_monotone(),
            minkowski_pass: mk.pass,
        };
        Ok((sample, Some(r)))
    } else {
        let r = successive_minima_float(&fp.basis, norm, DEFAULT_BUDGET)?;
        let d = m + n;
        let prod: f64 = r.lambdas.iter().product();
        let vd = match norm {
            Norm::L2 => crate::lattice::unit_ball_volume_l2(d),
            Norm::LInf => 2f64.powi(d as i32),
        };
        let two_d = 2f64.powi(d as i32);
        let fact = to_f64(&Rational::from_integer(factorial(d)));
        let value = prod * vd;
        let tol = 1e-6 * two_d;
        let minkowski_pass = value >= two_d / fact - tol && value <= two_d + tol;
        let sample = TraceSample {
            u: u.clone(),
            t: fp.t,
            h: r.lambdas.iter().map(|l| l.ln()).collect(),
            monotone: r.lambdas.windows(2).all(|w| w[0] <= w[1]),
            lambdas: r.lambdas,
            exact: None,
            errors: Some(r.errors),
            minkowski_pass,
        };
        Ok((sample, None))
    }
}

/// Least-squares slope of `ys` against `xs`; 0 with fewer than two points.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

fn summaries(samples: &[TraceSample], d: usize) -> Vec<OrderSummary> {
    let half = samples.len() / 2;
    (0..d)
        .map(|j| {
            let (_, s) = samples
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    match (&a.1.exact, &b.1.exact) {
                        (Some(x), Some(y)) => x[j].cmp(&y[j]),
                        _ => a.1.lambdas[j].total_cmp(&b.1.lambdas[j]),
                    }
                    .then(a.0.cmp(&b.0))
                })
                .expect("nonempty trace");
            let tail = &samples[half..];
            let xs: Vec<f64> = tail.iter().map(|s| s.t).collect();
            let ys: Vec<f64> = tail.iter().map(|s| s.h[j]).collect();
            OrderSummary {
                r: j + 1,
                min_lambda: s.lambdas[j],
                min_exact: s.exact.as_ref().map(|v| v[j].clone()),
                argmin_u: s.u.clone(),
                trend: ls_slope(&xs, &ys),
            }
        })
        .collect()
}

/// Successive minima along the grid, sampled in parallel and merged in grid order.
pub fn minima_trace(
    m: usize,
    n: usize,
    a: &AMatrix,
    grid: &[Rational],
    norm: Norm,
) -> Result<MinimaTrace, FlowError> {
    a.check(m, n)?;
    check_grid(grid)?;
    let samples: Vec<TraceSample> = grid
        .par_iter()
        .map(|u| sample_at(m, n, a, u, norm).map(|(s, _)| s))
        .collect::<Result<_, _>>()?;
    let summaries = summaries(&samples, m + n);
    Ok(MinimaTrace { m, n, norm, exact: a.is_exact(), samples, summaries })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualFlowCheck {
    pub pass: bool,
    /// Rows of the first mismatching basis pair, if any.
    pub witness: Option<String>,
}

/// Exact lattice equality between `dual_basis(g_t u_A)` and the dual flow formula.
pub fn dual_flow_identity_check(
    m: usize,
    n: usize,
    a: &AMatrix,
    u: &Rational,
) -> Result<DualFlowCheck, FlowError> {
    let ax = a.exact().ok_or(FlowError::ExactRequired)?;
    let fp = flow_point(m, n, a, u)?;
    let dual = dual_basis(&fp.basis)?;
    let formula = dual_flow_matrix(m, n, ax, u);
    let lhs = dual.exact_matrix().expect("exact dual");
    let pass = same_lattice(lhs, &formula);
    let witness = (!pass).then(|| format!("dual {lhs:?} vs formula {formula:?}"));
    Ok(DualFlowCheck { pass, witness })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualFlowRow {
    #[serde(serialize_with = "ser_rational")]
    pub u: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub lambda_r_sq: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub dual_lambda_sq: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub product_sq: Rational,
    pub product: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualFlowSeries {
    pub r: usize,
    pub rows: Vec<DualFlowRow>,
    pub pass: bool,
}

/// `λ_r(flow) · λ_{d+1-r}(dual flow) ∈ [1, d!]` at every sample (exact on squares).
pub fn dual_minima_flow_check(
    m: usize,
    n: usize,
    a: &AMatrix,
    grid: &[Rational],
    r: usize,
) -> Result<DualFlowSeries, FlowError> {
    let ax = a.exact().ok_or(FlowError::ExactRequired)?;
    check_grid(grid)?;
    let d = m + n;
    if r == 0 || r > d {
        return Err(FlowError::InvalidOrder { r, d });
    }
    let rows: Vec<DualFlowRow> = grid
        .par_iter()
        .map(|u| -> Result<DualFlowRow, FlowError> {
            let report = dual_report_at(m, n, ax, u)?;
            let lambda_r_sq = report.1[r - 1].clone();
            let dual_lambda_sq = report.2[d - r].clone();
            let product_sq = report.0.products_squared[r - 1].clone();
            let within = product_sq >= report.0.lower && product_sq <= report.0.upper;
            Ok(DualFlowRow {
                u: u.clone(),
                product: to_f64(&product_sq).sqrt(),
                lambda_r_sq,
                dual_lambda_sq,
                product_sq,
                within,
            })
        })
        .collect::<Result<_, _>>()?;
    let pass = rows.iter().all(|r| r.within);
    Ok(DualFlowSeries { r, rows, pass })
}

fn dual_report_at(
    m: usize,
    n: usize,
    a: &Matrix,
    u: &Rational,
) -> Result<(DualMinimaReport, Vec<Rational>, Vec<Rational>), FlowError> {
    let primal = LatticeBasis::exact(flow_matrix(m, n, a, u))?;
    let dual = LatticeBasis::exact(dual_flow_matrix(m, n, a, u))?;
    let opts = minima_opts(Norm::L2);
    let p = successive_minima_with(&primal, &opts)?;
    let q = successive_minima_with(&dual, &opts)?;
    Ok((dual_minima_report(&p, &q), p.values, q.values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    #[serde(rename = "BA-like")]
    BaLike,
    #[serde(rename = "Singular-like")]
    SingularLike,
    Inconclusive,
}

impl VerdictKind {
    pub fn label(self) -> &'static str {
        match self {
            VerdictKind::BaLike => "BA-like",
            VerdictKind::SingularLike => "Singular-like",
            VerdictKind::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyConfig {
    #[serde(serialize_with = "ser_rational")]
    pub threshold: Rational,
    pub norm: Norm,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { threshold: rat(1, 10), norm: Norm::L2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorReport {
    /// `(2^d/(d!·V_d))^{1/d}` for the l∞ ball, i.e. `(1/d!)^{1/d}`.
    pub floor: f64,
    pub min_lambda_d_linf: f64,
    /// Exact `λ_d^d · d! >= 1` at every sample (float comparison in float mode).
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    #[serde(serialize_with = "ser_rational")]
    pub u_min: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub u_max: Rational,
    pub t_max: f64,
    pub samples: usize,
    #[serde(serialize_with = "ser_rational")]
    pub threshold: Rational,
    pub norm: Norm,
    pub trend: f64,
    pub last_lambda_r: f64,
    pub trend_window: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub r: usize,
    pub kind: VerdictKind,
    pub inf_lambda_r: f64,
    /// `inf λ_r²` (l2) or `inf λ_r` (l∞) over the samples, exact mode only.
    #[serde(serialize_with = "ser_opt_rational")]
    pub inf_exact: Option<Rational>,
    pub evidence: Evidence,
    pub minkowski_floor: Option<FloorReport>,
    pub horizon_note: Option<String>,
}

fn below_threshold(summary: &OrderSummary, last: &TraceSample, r: usize, cfg: &ClassifyConfig) -> (bool, bool) {
    let t = &cfg.threshold;
    // Exact values are λ² under l2 and λ under l∞.
    let t_key = match cfg.norm {
        Norm::L2 => t * t,
        Norm::LInf => t.clone(),
    };
    match (&summary.min_exact, &last.exact) {
        (Some(min), Some(last)) => (*min < t_key, last[r - 1] < t_key),
        _ => {
            let tf = to_f64(t);
            (summary.min_lambda < tf, last.lambdas[r - 1] < tf)
        }
    }
}

/// Desk-scale order-`r` verdict over the sampled horizon.
pub fn classify_order(
    m: usize,
    n: usize,
    a: &AMatrix,
    r: usize,
    grid: &[Rational],
    cfg: &ClassifyConfig,
) -> Result<OrderVerdict, FlowError> {
    let d = m + n;
    if r == 0 || r > d {
        return Err(FlowError::InvalidOrder { r, d });
    }
    let trace = minima_trace(m, n, a, grid, cfg.norm)?;
    verdict_from_trace(&trace, a, r, cfg)
}

/// Verdict from an existing trace; for `r = d` an l∞ pass checks the floor.
pub fn verdict_from_trace(
    trace: &MinimaTrace,
    a: &AMatrix,
    r: usize,
    cfg: &ClassifyConfig,
) -> Result<OrderVerdict, FlowError> {
    let (m, n) = (trace.m, trace.n);
    let d = m + n;
    if r == 0 || r > d {
        return Err(FlowError::InvalidOrder { r, d });
    }
    let summary = &trace.summaries[r - 1];
    let last = trace.samples.last().expect("nonempty trace");
    let first = trace.samples.first().expect("nonempty trace");
    let evidence = Evidence {
        u_min: first.u.clone(),
        u_max: last.u.clone(),
        t_max: last.t,
        samples: trace.samples.len(),
        threshold: cfg.threshold.clone(),
        norm: cfg.norm,
        trend: summary.trend,
        last_lambda_r: last.lambdas[r - 1],
        trend_window: "last half of samples",
    };
    let (min_below, last_below) = below_threshold(summary, last, r, cfg);
    let (kind, minkowski_floor) = if r == d {
        (VerdictKind::BaLike, Some(floor_report(trace, a)?))
    } else if !min_below {
        (VerdictKind::BaLike, None)
    } else if last_below && summary.trend < 0.0 {
        (VerdictKind::SingularLike, None)
    } else {
        (VerdictKind::Inconclusive, None)
    };
    Ok(OrderVerdict {
        r,
        kind,
        inf_lambda_r: summary.min_lambda,
        inf_exact: summary.min_exact.clone(),
        evidence,
        minkowski_floor,
        horizon_note: None,
    })
}

fn floor_report(trace: &MinimaTrace, a: &AMatrix) -> Result<FloorReport, FlowError> {
    let (m, n) = (trace.m, trace.n);
    let d = m + n;
    let fact = factorial(d);
    let floor = (1.0 / to_f64(&Rational::from_integer(fact.clone()))).powf(1.0 / d as f64);
    let grid: Vec<Rational> = trace.samples.iter().map(|s| s.u.clone()).collect();
    let results: Vec<(bool, f64)> = grid
        .par_iter()
        .map(|u| -> Result<(bool, f64), FlowError> {
            let (s, exact) = sample_at(m, n, a, u, Norm::LInf)?;
            let last = s.lambdas[d - 1];
            let holds = match exact {
                Some(res) => minkowski_floor_holds(&res, &Rational::one()),
                None => last.powi(d as i32) * to_f64(&Rational::from_integer(fact.clone())) >= 1.0 - 1e-9,
            };
            Ok((holds, last))
        })
        .collect::<Result<_, _>>()?;
    Ok(FloorReport {
        floor,
        min_lambda_d_linf: results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        holds: results.iter().all(|r| r.0),
    })
}

/// One `q` of the arithmetic scan with its nearest `p = round(-Aq)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCandidate {
    pub q: Vec<i64>,
    pub p: Vec<i64>,
    pub q_norm: i64,
    /// `‖Aq + p‖∞`.
    pub residual: f64,
    #[serde(serialize_with = "ser_opt_rational")]
    pub residual_exact: Option<Rational>,
    /// `‖Aq + p‖∞ · ‖q‖∞^{n/m}`.
    pub score: f64,
    /// `score^m = ‖Aq + p‖∞^m · ‖q‖∞^n`, exact for rational `A`.
    #[serde(serialize_with = "ser_opt_rational")]
    pub score_pow_m_exact: Option<Rational>,
}

impl ScanCandidate {
    /// The lattice coordinates `(p, q)`.
    pub fn pq(&self) -> Vec<i64> {
        self.p.iter().chain(&self.q).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub r: usize,
    pub q_max: i64,
    pub examined: u64,
    /// Infimum over independent `r`-tuples of the largest score.
    pub c_hat: Option<f64>,
    #[serde(serialize_with = "ser_opt_rational")]
    pub c_hat_pow_m_exact: Option<Rational>,
    pub tuple: Vec<ScanCandidate>,
    #[serde(skip)]
    pub candidates: Vec<ScanCandidate>,
}

/// Default candidate budget of the scan.
pub const SCAN_BUDGET: u64 = 5_000_000;

fn candidate(m: usize, n: usize, a: &AMatrix, q: Vec<i64>) -> ScanCandidate {
    let q_norm = q.iter().map(|x| x.abs()).max().unwrap_or(0);
    match a {
        AMatrix::Exact(ax) => {
            let qr: Vec<Rational> = q.iter().map(|&x| int(x)).collect();
            let aq = ax.mul_vec(&qr);
            let p: Vec<BigInt> = aq.iter().map(|v| round_half_up(&(-v))).collect();
            let residual = aq
                .iter()
                .zip(&p)
                .map(|(v, p)| (v + Rational::from_integer(p.clone())).abs())
                .max()
                .unwrap_or_default();
            let pow_m = pow(&residual, m as i32) * pow(&int(q_norm), n as i32);
            let score = to_f64(&pow_m).powf(1.0 / m as f64);
            ScanCandidate {
                p: p.iter().map(|v| v.to_i64().unwrap_or(i64::MAX)).collect(),
                q,
                q_norm,
                residual: to_f64(&residual),
                residual_exact: Some(residual),
                score,
                score_pow_m_exact: Some(pow_m),
            }
        }
        AMatrix::Float(_) => {
            let aq = a.apply_f64(&q);
            let p: Vec<i64> = aq.iter().map(|v| (-v + 0.5).floor() as i64).collect();
            let residual = aq.iter().zip(&p).map(|(v, &p)| (v + p as f64).abs()).fold(0.0, f64::max);
            let score = residual * (q_norm as f64).powf(n as f64 / m as f64);
            ScanCandidate {
                q,
                p,
                q_norm,
                residual,
                residual_exact: None,
                score,
                score_pow_m_exact: None,
            }
        }
    }
}

fn cmp_candidates(x: &ScanCandidate, y: &ScanCandidate) -> std::cmp::Ordering {
    match (&x.score_pow_m_exact, &y.score_pow_m_exact) {
        (Some(a), Some(b)) => a.cmp(b),
        _ => x.score.total_cmp(&y.score),
    }
    .then_with(|| x.q_norm.cmp(&y.q_norm))
    .then_with(|| x.q.cmp(&y.q))
}

/// Scans `0 < ‖q‖∞ < Q_max` (one of `±q`) with `p` nearest to `-Aq`.
pub fn arithmetic_ba_scan(
    m: usize,
    n: usize,
    a: &AMatrix,
    r: usize,
    q_max: i64,
) -> Result<ScanResult, FlowError> {
    arithmetic_ba_scan_with_budget(m, n, a, r, q_max, SCAN_BUDGET)
}

pub fn arithmetic_ba_scan_with_budget(
    m: usize,
    n: usize,
    a: &AMatrix,
    r: usize,
    q_max: i64,
    budget: u64,
) -> Result<ScanResult, FlowError> {
    a.check(m, n)?;
    let d = m + n;
    if r == 0 || r > d {
        return Err(FlowError::InvalidOrder { r, d });
    }
    if q_max < 2 {
        return Err(FlowError::InvalidQmax(q_max));
    }
    let side = (2 * q_max - 1) as u128;
    let needed = side.checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(FlowError::BudgetExceeded { needed, budget });
    }
    let lim = q_max - 1;
    // Parallel over the leading coordinate; each shard is ordered.
    let shards: Vec<Vec<ScanCandidate>> = (0..=lim)
        .into_par_iter()
        .map(|lead| {
            let mut out = Vec::new();
            let mut rest = vec![-lim; n - 1];
            loop {
                let mut q = Vec::with_capacity(n);
                q.push(lead);
                q.extend_from_slice(&rest);
                let first = q.iter().position(|&v| v != 0);
                if let Some(f) = first {
                    if q[f] > 0 {
                        out.push(candidate(m, n, a, q));
                    }
                }
                let mut i = 0;
                while i < rest.len() && rest[i] == lim {
                    rest[i] = -lim;
                    i += 1;
                }
                if i == rest.len() {
                    break;
                }
                rest[i] += 1;
            }
            out
        })
        .collect();
    let mut candidates: Vec<ScanCandidate> = shards.into_iter().flatten().collect();
    candidates.sort_by(cmp_candidates);
    let mut tracker = RankTracker::default();
    let mut tuple = Vec::new();
    for c in &candidates {
        if tracker.insert_i64(&c.pq()) {
            tuple.push(c.clone());
            if tuple.len() == r {
                break;
            }
        }
    }
    let complete = tuple.len() == r;
    let c_hat = complete.then(|| tuple[r - 1].score);
    let c_hat_pow_m_exact = if complete { tuple[r - 1].score_pow_m_exact.clone() } else { None };
    Ok(ScanResult {
        r,
        q_max,
        examined: candidates.len() as u64,
        c_hat,
        c_hat_pow_m_exact,
        tuple,
        candidates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub r: usize,
    pub q_max: i64,
    pub samples: usize,
    /// Largest consecutive grid ratio `ρ`.
    pub rho: f64,
    /// `min λ_r` over the samples (l∞).
    pub min_lambda_r: f64,
    /// `min λ_r / ρ^{min(m,n)}`: certified lower bound for `λ_r` on the whole horizon.
    pub delta_eff: f64,
    /// Vectors whose `δ_eff`-window meets the horizon.
    pub a_short_vectors: usize,
    pub a_violations: Vec<String>,
    pub c_hat: Option<f64>,
    /// `(R_max · Q_max^{n/m})^{m/(m+n)}` for the scan's tuple.
    pub b_bound: Option<f64>,
    pub b_t_star: Option<f64>,
    pub b_applicable: bool,
    /// `λ_r` at the samples bracketing `t*`.
    pub b_lambda_near: Option<f64>,
    /// The tuple bound forces `λ_r` below the BA threshold somewhere.
    pub b_dip_confirmed: bool,
    pub b_violations: Vec<String>,
    pub pass: bool,
}

struct Window {
    lo: f64,
    hi: f64,
    pq: Vec<i64>,
}

/// Joint check of both correspondence directions in the l∞ norm.
///
/// (a) `λ_r >= δ_eff` on the horizon, so no `r` independent scan vectors may
/// be simultaneously `δ_eff`-short at a common time inside it.
/// (b) At `t* = (mn/(m+n))·ln(Q/R)` the tuple vectors all have norm at most
/// the tuple bound, so a bracketing sample must show `λ_r <= ρ^{max(m,n)}·bound`;
/// and at every sample `λ_r` is at most the tuple's largest image norm.
pub fn correspondence_cross_check(
    m: usize,
    n: usize,
    a: &AMatrix,
    r: usize,
    grid: &[Rational],
    q_max: i64,
) -> Result<CrossCheckReport, FlowError> {
    let d = m + n;
    if r == 0 || r > d {
        return Err(FlowError::InvalidOrder { r, d });
    }
    let trace = minima_trace(m, n, a, grid, Norm::LInf)?;
    let scan = arithmetic_ba_scan(m, n, a, r, q_max)?;
    let rho = grid_ratio(grid);
    let (mf, nf) = (m as f64, n as f64);
    let summary = &trace.summaries[r - 1];
    let min_lambda_r = summary.min_lambda;
    let delta_eff = min_lambda_r / rho.powi(m.min(n) as i32);
    let t_lo = trace.samples[0].t;
    let t_hi = trace.samples.last().unwrap().t;

    // (a)
    let mut windows = Vec::new();
    for c in &scan.candidates {
        let lo = nf * ((c.q_norm as f64) / delta_eff).ln();
        let hi = if c.residual == 0.0 { f64::INFINITY } else { mf * (delta_eff / c.residual).ln() };
        let (lo, hi) = (lo.max(t_lo), hi.min(t_hi));
        if lo < hi {
            windows.push(Window { lo, hi, pq: c.pq() });
        }
    }
    let mut a_violations = Vec::new();
    let mut points: Vec<f64> = windows.iter().map(|w| w.lo).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    for t in points {
        let mut tracker = RankTracker::default();
        let mut members = Vec::new();
        for w in windows.iter().filter(|w| w.lo <= t && t < w.hi) {
            if tracker.insert_i64(&w.pq) {
                members.push(w.pq.clone());
            }
            if members.len() == r {
                break;
            }
        }
        if members.len() == r {
            a_violations.push(format!(
                "{r} independent vectors {members:?} all shorter than delta_eff={delta_eff:.6e} at t={t:.6}"
            ));
            break;
        }
    }

    // (b)
    let mut b_violations = Vec::new();
    let (mut b_bound, mut b_t_star, mut b_lambda_near) = (None, None, None);
    let mut b_applicable = false;
    let mut b_dip_confirmed = false;
    if scan.tuple.len() == r {
        let r_max = scan.tuple.iter().map(|c| c.residual).fold(0.0, f64::max);
        let q_big = scan.tuple.iter().map(|c| c.q_norm).max().unwrap() as f64;
        let bound = (r_max * q_big.powf(nf / mf)).powf(mf / (mf + nf));
        b_bound = Some(bound);
        let t_star = if r_max == 0.0 {
            f64::INFINITY
        } else {
            mf * nf / (mf + nf) * (q_big / r_max).ln()
        };
        b_t_star = Some(t_star);
        // Direct exact bound at every sample.
        for s in &trace.samples {
            let images = tuple_image_norms(m, n, a, &scan.tuple, &s.u);
            let worst = images.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lam = s.lambdas[r - 1];
            let ok = match (&s.exact, a.exact()) {
                (Some(ex), Some(ax)) => ex[r - 1] <= tuple_image_max_exact(m, n, ax, &scan.tuple, &s.u),
                _ => lam <= worst * (1.0 + 1e-9),
            };
            if !ok {
                b_violations.push(format!(
                    "lambda_{r}={lam:.6e} exceeds tuple image norm {worst:.6e} at u={}",
                    format_rational(&s.u)
                ));
            }
        }
        let k = rho.powi(m.max(n) as i32);
        if t_star.is_finite() && t_star >= t_lo && t_star <= t_hi {
            b_applicable = true;
            let idx = trace.samples.partition_point(|s| s.t <= t_star);
            let near: f64 = [idx.checked_sub(1), Some(idx)]
                .into_iter()
                .flatten()
                .filter_map(|i| trace.samples.get(i))
                .map(|s| s.lambdas[r - 1])
                .fold(f64::INFINITY, f64::min);
            b_lambda_near = Some(near);
            if near > k * bound * (1.0 + 1e-9) {
                b_violations.push(format!(
                    "lambda_{r}={near:.6e} near t*={t_star:.4} exceeds K*bound={:.6e}",
                    k * bound
                ));
            }
        } else if t_star.is_infinite() {
            // Exact hits shrink like u^{-m}: the last sample carries the bound.
            b_applicable = true;
            b_lambda_near = Some(trace.samples.last().unwrap().lambdas[r - 1]);
        }
        let threshold = 0.1;
        b_dip_confirmed = b_applicable && b_lambda_near.is_some_and(|l| l < threshold);
    }

    let pass = a_violations.is_empty() && b_violations.is_empty();
    Ok(CrossCheckReport {
        r,
        q_max,
        samples: trace.samples.len(),
        rho,
        min_lambda_r,
        delta_eff,
        a_short_vectors: windows.len(),
        a_violations,
        c_hat: scan.c_hat,
        b_bound,
        b_t_star,
        b_applicable,
        b_lambda_near,
        b_dip_confirmed,
        b_violations,
        pass,
    })
}

fn tuple_image_norms(m: usize, n: usize, a: &AMatrix, tuple: &[ScanCandidate], u: &Rational) -> Vec<f64> {
    let up = to_f64(&pow(u, n as i32));
    let down = to_f64(&pow(u, -(m as i32)));
    tuple
        .iter()
        .map(|c| {
            let aq = a.apply_f64(&c.q);
            let top = aq.iter().zip(&c.p).map(|(v, &p)| (up * (v + p as f64)).abs()).fold(0.0, f64::max);
            let bottom = c.q_norm as f64 * down;
            top.max(bottom)
        })
        .collect()
}

fn tuple_image_max_exact(m: usize, n: usize, a: &Matrix, tuple: &[ScanCandidate], u: &Rational) -> Rational {
    let b = flow_matrix(m, n, a, u);
    tuple
        .iter()
        .map(|c| {
            let v: Vec<Rational> = c.pq().iter().map(|&x| int(x)).collect();
            b.mul_vec(&v).into_iter().map(|x| x.abs()).max().unwrap_or_default()
        })
        .max()
        .unwrap_or_default()
}

/// `F_{k+1}/F_k` with `F_1 = F_2 = 1`, the `k`-th convergent of the golden ratio.
pub fn fibonacci_convergent(k: usize) -> Result<Rational, FlowError> {
    if k == 0 {
        return Err(FlowError::InvalidFamily("fib:0".into()));
    }
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    for _ in 1..k {
        let c = &a + &b;
        a = b;
        b = c;
    }
    Ok(Rational::new(b, a))
}

/// Largest `u` with `u^{m+n} <= q²/4` for a convergent with denominator `q`,
/// the scale up to which the convergent still mimics its limit.
pub fn convergent_horizon(q: &BigInt, m: usize, n: usize) -> f64 {
    let q = to_f64(&Rational::from_integer(q.clone()));
    (q * q / 4.0).powf(1.0 / (m + n) as f64)
}

/// Exact horizon `q/2` for the 1×1 case.
pub fn convergent_horizon_1x1(c: &Rational) -> Rational {
    Rational::from_integer(c.denom().clone()) / int(2)
}

/// Seeded random rational `m×n` matrix with entries `p/q`, `|p| <= 9`, `1 <= q <= 7`.
pub fn random_a(seed: u64, m: usize, n: usize) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..m * n)
        .map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=7)))
        .collect();
    Matrix::new(m, n, data)
}

/// Adds an integer matrix to `A`; the lattice `u_A ℤ^d` is unchanged.
pub fn translate_by_integers(a: &Matrix, p: &[Vec<i64>]) -> Matrix {
    let mut out = a.clone();
    for (i, row) in p.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let x = out.get(i, j) + int(v);
            out.set(i, j, x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1(x: Rational) -> AMatrix {
        AMatrix::Exact(Matrix::new(1, 1, vec![x]))
    }

    #[test]
    fn flow_point_examples() {
        let fp = flow_point(1, 1, &a1(rat(1, 3)), &int(2)).unwrap();
        let b = fp.basis.exact_matrix().unwrap();
        assert_eq!(b.column(0), vec![int(2), int(0)]);
        assert_eq!(b.column(1), vec![rat(2, 3), rat(1, 2)]);
        assert_eq!(fp.basis.covolume().unwrap(), &int(1));
        let t0 = flow_point(1, 1, &a1(rat(1, 3)), &int(1)).unwrap();
        assert_eq!(t0.t, 0.0);
        assert!(flow_point(1, 1, &a1(rat(1, 3)), &rat(1, 2)).is_err());
        assert!(matches!(
            flow_point(2, 1, &a1(rat(1, 3)), &int(2)),
            Err(FlowError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dual_flow_example() {
        let a = Matrix::new(1, 1, vec![rat(1, 3)]);
        let dual = dual_flow_matrix(1, 1, &a, &int(2));
        assert_eq!(dual.row(0), &[rat(1, 2), int(0)]);
        assert_eq!(dual.row(1), &[rat(-2, 3), int(2)]);
        assert!(dual_flow_identity_check(1, 1, &a1(rat(1, 3)), &int(2)).unwrap().pass);
    }

    #[test]
    fn zero_matrix_trace() {
        let grid = geometric_grid(&int(1), &int(2), 5).unwrap();
        let tr = minima_trace(1, 1, &a1(int(0)), &grid, Norm::L2).unwrap();
        for s in &tr.samples {
            let inv = s.u.recip();
            assert_eq!(s.exact.as_ref().unwrap()[0], &inv * &inv);
        }
    }

    #[test]
    fn rational_a_singular_and_scan() {
        let grid = geometric_grid(&int(1), &int(2), 7).unwrap();
        let v = classify_order(1, 1, &a1(rat(1, 2)), 1, &grid, &ClassifyConfig::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::SingularLike);
        let s = arithmetic_ba_scan(1, 1, &a1(rat(1, 2)), 1, 10).unwrap();
        assert_eq!(s.c_hat, Some(0.0));
        assert_eq!(s.tuple[0].q, vec![2]);
    }

    #[test]
    fn top_order_is_ba_like() {
        let grid = geometric_grid(&int(1), &int(2), 6).unwrap();
        let v = classify_order(1, 1, &a1(rat(1, 2)), 2, &grid, &ClassifyConfig::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::BaLike);
        assert!(v.minkowski_floor.unwrap().holds);
    }

    #[test]
    fn fibonacci_family() {
        assert_eq!(fibonacci_convergent(12).unwrap(), rat(233, 144));
        assert_eq!(fibonacci_convergent(1).unwrap(), int(1));
        assert_eq!(convergent_horizon_1x1(&rat(233, 144)), int(72));
        assert!((convergent_horizon(&BigInt::from(144), 1, 1) - 72.0).abs() < 1e-9);
    }

    #[test]
    fn integer_translation_keeps_minima() {
        let a = random_a(3, 2, 1);
        let b = translate_by_integers(&a, &[vec![3], vec![-2]]);
        let u = rat(3, 2);
        let x = sample_at(2, 1, &AMatrix::Exact(a), &u, Norm::L2).unwrap().0;
        let y = sample_at(2, 1, &AMatrix::Exact(b), &u, Norm::L2).unwrap().0;
        assert_eq!(x.exact, y.exact);
    }

    #[test]
    fn slope_fit() {
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, -1.0, -3.0]) + 2.0).abs() < 1e-12);
        assert_eq!(ls_slope(&[1.0], &[1.0]), 0.0);
    }
}
