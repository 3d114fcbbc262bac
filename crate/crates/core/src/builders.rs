//! Explicit template families: zero, standard quadrilateral, pulse trains
//! and the duality reflection.
//!
//! Pulse trains dip on the windows `[k^k - k, k^k]` and are zero elsewhere.
//! On a window the bottom block `f_1 = ... = f_r` falls with slope `-τ₁/r`
//! down to `η_k` and climbs back with slope `+τ₂/r`; the top block moves
//! oppositely with slopes `+τ₁/(d-r)` and `-τ₂/(d-r)` so that `F_d ≡ 0`.
//! Admissible `τ` values come from the quantized tables returned by
//! [`tau_table`].

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pwl::{PathError, PiecewisePath};
use crate::rational::{format_rational, from_bigint, int, rat, Rational};
use crate::template::{ceil_i64, validate, Template, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("infeasible order: r = {r} > max(m, n) = {max}")]
    InfeasibleOrder { r: usize, max: usize },
    #[error("slope cap violated: {0}")]
    SlopeCapViolation(String),
    #[error("tau {tau} is not an entry of the {side:?} table")]
    TauNotInTable { side: TauSide, tau: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("builder produced an invalid template ({} violations)", .0.len())]
    InvalidOutput(Vec<Violation>),
    #[error(transparent)]
    Path(#[from] PathError),
}

fn checked(m: usize, n: usize, path: PiecewisePath) -> Result<Template, BuildError> {
    validate(m, n, path).map_err(BuildError::InvalidOutput)
}

fn require_dims(m: usize, n: usize) -> Result<(), BuildError> {
    if m == 0 || n == 0 {
        return Err(BuildError::InvalidParameter(format!(
            "m and n must be positive (got m = {m}, n = {n})"
        )));
    }
    Ok(())
}

pub fn zero_template(m: usize, n: usize) -> Result<Template, BuildError> {
    require_dims(m, n)?;
    checked(m, n, PiecewisePath::zero(m + n, Rational::zero(), None)?)
}

fn block_slopes(d: usize, r: usize, bottom: Rational, top: Rational) -> Vec<Rational> {
    (0..d).map(|i| if i < r { bottom.clone() } else { top.clone() }).collect()
}

/// One period of the standard quadrilateral of order `r` on `[0, scale]`.
///
/// The breakpoint sits at `scale·n/(m+n)`, the only placement for which both
/// blocks return to zero at the period end.
pub fn quadrilateral_template(m: usize, n: usize, r: usize, scale: &Rational) -> Result<Template, BuildError> {
    checked(m, n, quadrilateral_path(m, n, r, scale)?)
}

fn quadrilateral_path(m: usize, n: usize, r: usize, scale: &Rational) -> Result<PiecewisePath, BuildError> {
    require_dims(m, n)?;
    if r == 0 {
        return Err(BuildError::InvalidParameter("order r must be positive".into()));
    }
    if r > m.min(n) {
        return Err(BuildError::Infeasible(format!(
            "r > min(m,n): {} > {}",
            r,
            m.min(n)
        )));
    }
    if !scale.is_positive() {
        return Err(BuildError::InvalidParameter("period scale must be positive".into()));
    }
    let d = m + n;
    let (mi, ni, ri, top) = (m as i64, n as i64, r as i64, (d - r) as i64);
    let first = block_slopes(d, r, rat(-1, ni), rat(ri, top * ni));
    let second = block_slopes(d, r, rat(1, mi), rat(-ri, top * mi));
    let breakpoint = scale * rat(ni, (m + n) as i64);
    Ok(PiecewisePath::new(
        Rational::zero(),
        vec![breakpoint],
        Some(scale.clone()),
        vec![Rational::zero(); d],
        vec![first, second],
    )?)
}

/// `periods` consecutive quadrilateral periods on `[0, periods·scale]`.
pub fn quadrilateral_periodic(
    m: usize,
    n: usize,
    r: usize,
    scale: &Rational,
    periods: usize,
) -> Result<Template, BuildError> {
    if periods == 0 {
        return Err(BuildError::InvalidParameter("periods must be positive".into()));
    }
    let one = quadrilateral_path(m, n, r, scale)?;
    let parts: Vec<PiecewisePath> = (0..periods)
        .map(|k| one.shifted(&(scale * int(k as i64))))
        .collect();
    checked(m, n, PiecewisePath::concat_all(&parts)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauSide {
    /// Falling piece `[b_k - k, η_k]`, `F_r' = -τ₁`.
    I1,
    /// Rising piece `[η_k, b_k]`, `F_r' = +τ₂`.
    I2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauRow {
    pub l_plus: i64,
    pub l_minus: i64,
    pub tau: Rational,
    /// Whether the `τ` respects the slope caps of both blocks (equivalently
    /// the row's `L±` fit in `[0, m] × [0, n]`).
    pub within_caps: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauTable {
    pub side: TauSide,
    pub rows: Vec<TauRow>,
}

impl TauTable {
    pub fn minimal(&self) -> &TauRow {
        self.rows.last().expect("tables are never empty")
    }

    pub fn contains(&self, tau: &Rational) -> bool {
        self.rows.iter().any(|row| row.tau == *tau)
    }
}

/// Upper cap on `τ` imposed by the slope bounds of both blocks.
pub fn tau_cap(m: usize, n: usize, r: usize, side: TauSide) -> Rational {
    let d = m + n;
    let (mi, ni, ri, top) = (m as i64, n as i64, r as i64, (d - r) as i64);
    match side {
        TauSide::I1 => rat(ri, ni).min(rat(top, mi)),
        TauSide::I2 => rat(ri, mi).min(rat(top, ni)),
    }
}

pub fn tau_table(m: usize, n: usize, r: usize, side: TauSide) -> Result<TauTable, BuildError> {
    require_dims(m, n)?;
    if r == 0 || r > m.max(n) {
        return Err(BuildError::InvalidParameter(format!(
            "order r = {r} outside [1, max(m,n) = {}]",
            m.max(n)
        )));
    }
    let (mi, ni, ri) = (m as i64, n as i64, r as i64);
    let step = rat(mi + ni, mi * ni);
    let cap = tau_cap(m, n, r, side);
    // Largest count whose τ stays strictly positive.
    let (top_tau, last) = match side {
        TauSide::I1 => (rat(ri, ni), ceil_i64(&(rat(ri * mi, mi + ni) - int(1)))),
        TauSide::I2 => (rat(ri, mi), ceil_i64(&(rat(ri * ni, mi + ni) - int(1)))),
    };
    let rows = (0..=last)
        .map(|k| {
            let tau = &top_tau - &step * int(k);
            let (l_plus, l_minus) = match side {
                TauSide::I1 => (k, ri - k),
                TauSide::I2 => (ri - k, k),
            };
            let within_caps = tau <= cap;
            TauRow {
                l_plus,
                l_minus,
                tau,
                within_caps,
            }
        })
        .collect();
    Ok(TauTable { side, rows })
}

/// Both inequalities `r - n <= ⌈mr/(m+n) - 1⌉` and `r - m <= ⌈nr/(m+n) - 1⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CeilingCheck {
    pub first_lhs: i64,
    pub first_rhs: i64,
    pub second_lhs: i64,
    pub second_rhs: i64,
}

impl CeilingCheck {
    pub fn holds(&self) -> bool {
        self.first_lhs <= self.first_rhs && self.second_lhs <= self.second_rhs
    }
}

pub fn ceiling_feasible(m: usize, n: usize, r: usize) -> CeilingCheck {
    let (mi, ni, ri) = (m as i64, n as i64, r as i64);
    CeilingCheck {
        first_lhs: ri - ni,
        first_rhs: ceil_i64(&(rat(mi * ri, mi + ni) - int(1))),
        second_lhs: ri - mi,
        second_rhs: ceil_i64(&(rat(ni * ri, mi + ni) - int(1))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TauChoice {
    /// The minimal positive table entry.
    Min,
    Value(Rational),
}

impl TauChoice {
    fn resolve(&self, table: &TauTable) -> Rational {
        match self {
            TauChoice::Min => table.minimal().tau.clone(),
            TauChoice::Value(v) => v.clone(),
        }
    }
}

/// `k^k` as a rational, with the convention `b_0 = 0`.
pub fn pulse_end(k: usize) -> Rational {
    if k == 0 {
        return Rational::zero();
    }
    from_bigint(num_traits::pow(BigInt::from(k), k))
}

/// `k^k - k`.
pub fn pulse_start(k: usize) -> Rational {
    pulse_end(k) - int(k as i64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PulseParams {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub tau1: Rational,
    pub tau2: Rational,
    pub k: usize,
}

impl PulseParams {
    /// Resolves `τ` choices against the tables and checks feasibility.
    pub fn new(m: usize, n: usize, r: usize, tau1: &TauChoice, tau2: &TauChoice, k: usize) -> Result<Self, BuildError> {
        require_dims(m, n)?;
        if r == 0 {
            return Err(BuildError::InvalidParameter("order r must be positive".into()));
        }
        if r > m.max(n) {
            return Err(BuildError::InfeasibleOrder { r, max: m.max(n) });
        }
        if k == 0 {
            return Err(BuildError::InvalidParameter("pulse index k must be >= 1".into()));
        }
        let t1 = tau_table(m, n, r, TauSide::I1)?;
        let t2 = tau_table(m, n, r, TauSide::I2)?;
        let params = Self {
            m,
            n,
            r,
            tau1: tau1.resolve(&t1),
            tau2: tau2.resolve(&t2),
            k,
        };
        for (tau, table) in [(&params.tau1, &t1), (&params.tau2, &t2)] {
            if !table.contains(tau) {
                return Err(BuildError::TauNotInTable {
                    side: table.side,
                    tau: format_rational(tau),
                });
            }
            let cap = tau_cap(m, n, r, table.side);
            if *tau > cap {
                let name = match table.side {
                    TauSide::I1 => "tau1 <= min(r/n, (d-r)/m)",
                    TauSide::I2 => "tau2 <= min(r/m, (d-r)/n)",
                };
                return Err(BuildError::SlopeCapViolation(format!(
                    "{name} fails: {} > {}",
                    format_rational(tau),
                    format_rational(&cap)
                )));
            }
        }
        Ok(params)
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }

    pub fn d(&self) -> usize {
        self.m + self.n
    }

    pub fn a_k(&self) -> Rational {
        pulse_start(self.k)
    }

    pub fn b_k(&self) -> Rational {
        pulse_end(self.k)
    }

    /// Turning point: `(η - b_k + k)/(b_k - η) = τ₂/τ₁`.
    pub fn eta_k(&self) -> Rational {
        let k = int(self.k as i64);
        self.b_k() - k * &self.tau1 / (&self.tau1 + &self.tau2)
    }

    /// Value of `f_1 = ... = f_r` at `η_k`.
    pub fn depth(&self) -> Rational {
        let k = int(self.k as i64);
        -(&self.tau1 * &self.tau2 * k) / (int(self.r as i64) * (&self.tau1 + &self.tau2))
    }
}

fn pulse_path(params: &PulseParams) -> Result<PiecewisePath, BuildError> {
    let d = params.d();
    let r = params.r;
    let (ri, top) = (int(r as i64), int((d - r) as i64));
    let falling = block_slopes(d, r, -(&params.tau1 / &ri), &params.tau1 / &top);
    let rising = block_slopes(d, r, &params.tau2 / &ri, -(&params.tau2 / &top));
    Ok(PiecewisePath::new(
        params.a_k(),
        vec![params.eta_k()],
        Some(params.b_k()),
        vec![Rational::zero(); d],
        vec![falling, rising],
    )?)
}

/// The `k`-th pulse as a partial template on `[b_k - k, b_k]`.
pub fn pulse_block(params: &PulseParams) -> Result<Template, BuildError> {
    checked(params.m, params.n, pulse_path(params)?)
}

/// Zero stretches interleaved with pulses `k = 1..=k_max`, on `[0, b_{k_max}]`.
pub fn pulse_template(
    m: usize,
    n: usize,
    r: usize,
    tau1: &TauChoice,
    tau2: &TauChoice,
    k_max: usize,
) -> Result<Template, BuildError> {
    let base = PulseParams::new(m, n, r, tau1, tau2, 1)?;
    let d = m + n;
    let mut parts = Vec::with_capacity(2 * k_max);
    for k in 1..=k_max {
        let params = base.with_k(k);
        let (gap_lo, gap_hi) = (pulse_end(k - 1), params.a_k());
        if gap_lo < gap_hi {
            parts.push(PiecewisePath::zero(d, gap_lo, Some(gap_hi))?);
        }
        parts.push(pulse_path(&params)?);
    }
    checked(m, n, PiecewisePath::concat_all(&parts)?)
}

/// Pulse depths `k = 1..=k_max` for the τ choice of `params`.
pub fn pulse_depths(params: &PulseParams, k_max: usize) -> Vec<Rational> {
    (1..=k_max).map(|k| params.with_k(k).depth()).collect()
}

/// Smallest `k` whose pulse depth is strictly below `-level`.
pub fn pulses_needed_below(params: &PulseParams, level: &Rational) -> usize {
    // depth(k) = -k·c with c = τ₁τ₂/(r(τ₁+τ₂)).
    let per_k = -params.with_k(1).depth();
    let k = crate::rational::floor(&(level / per_k)) + BigInt::one();
    num_traits::ToPrimitive::to_usize(&k).expect("moderate pulse count")
}

/// The `(n, m)` template `g_i = -f_{d+1-i}`.
pub fn reflect_dual(template: &Template) -> Result<Template, BuildError> {
    checked(template.n(), template.m(), template.path().reflected())
}

/// The known asymptotic average contraction rate of each builder family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Zero,
    Quadrilateral { r: usize },
    Pulse,
}

pub fn asymptotic_rate(family: Family, m: usize, n: usize) -> Rational {
    let mn = int((m * n) as i64);
    match family {
        Family::Zero | Family::Pulse => mn,
        Family::Quadrilateral { r } => &mn - &mn * rat(r as i64, (m + n) as i64),
    }
}

/// Adds `amount` to one slope of one segment; used to corrupt builder output in tests.
pub fn perturb_slope(path: &PiecewisePath, segment: usize, component: usize, amount: &Rational) -> PiecewisePath {
    let mut slopes = path.slopes().to_vec();
    slopes[segment][component] += amount;
    PiecewisePath::new(
        path.start().clone(),
        path.breakpoints().to_vec(),
        path.end().cloned(),
        path.initial_values().to_vec(),
        slopes,
    )
    .expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{analyze_segment, average_rate, delta_profile, Axiom};

    #[test]
    fn zero_template_rates() {
        assert_eq!(average_rate(&zero_template(1, 1).unwrap(), &int(3)).unwrap(), int(1));
        assert_eq!(average_rate(&zero_template(2, 3).unwrap(), &int(9)).unwrap(), int(6));
        let a = analyze_segment(&zero_template(1, 2).unwrap(), 0).unwrap();
        assert_eq!((a.s_plus, a.s_minus), (vec![1], vec![2, 3]));
        assert!(zero_template(0, 2).is_err());
    }

    #[test]
    fn quadrilateral_shape() {
        let q = quadrilateral_template(1, 2, 1, &int(1)).unwrap();
        assert_eq!(q.path().breakpoints(), &[rat(2, 3)]);
        assert_eq!(q.path().eval(&rat(2, 3)).unwrap()[0], rat(-1, 3));
        assert_eq!(q.path().end_values().unwrap(), vec![int(0); 3]);
    }

    #[test]
    fn quadrilateral_analysis() {
        let q = quadrilateral_template(2, 3, 2, &int(1)).unwrap();
        let first = analyze_segment(&q, 0).unwrap();
        assert_eq!(first.s_plus, vec![3, 4]);
        assert_eq!(first.s_minus, vec![1, 2, 5]);
        assert_eq!(first.delta, 2);
        assert_eq!(analyze_segment(&q, 1).unwrap().delta, 6);
        let profile: Vec<usize> = delta_profile(&q).unwrap().iter().map(|s| s.delta).collect();
        assert_eq!(profile, vec![2, 6]);
    }

    #[test]
    fn quadrilateral_period_average() {
        assert_eq!(
            average_rate(&quadrilateral_template(2, 3, 2, &int(1)).unwrap(), &int(1)).unwrap(),
            rat(18, 5)
        );
        assert_eq!(
            average_rate(&quadrilateral_template(2, 3, 1, &int(5)).unwrap(), &int(5)).unwrap(),
            rat(24, 5)
        );
    }

    #[test]
    fn quadrilateral_infeasible() {
        let err = quadrilateral_template(2, 3, 3, &int(1)).unwrap_err();
        assert_eq!(err, BuildError::Infeasible("r > min(m,n): 3 > 2".into()));
    }

    #[test]
    fn periodic_quadrilateral_is_template() {
        let q = quadrilateral_periodic(2, 2, 1, &int(4), 3).unwrap();
        assert_eq!(q.path().end(), Some(&int(12)));
        assert_eq!(average_rate(&q, &int(12)).unwrap(), asymptotic_rate(Family::Quadrilateral { r: 1 }, 2, 2));
    }

    #[test]
    fn tau_table_examples() {
        let t = tau_table(2, 3, 2, TauSide::I1).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!((t.rows[0].l_plus, t.rows[0].l_minus, t.rows[0].tau.clone()), (0, 2, rat(2, 3)));
        let t = tau_table(1, 1, 1, TauSide::I1).unwrap();
        assert_eq!((t.rows[0].l_plus, t.rows[0].l_minus, t.rows[0].tau.clone()), (0, 1, int(1)));
        let t = tau_table(3, 2, 3, TauSide::I2).unwrap();
        let taus: Vec<Rational> = t.rows.iter().map(|r| r.tau.clone()).collect();
        assert_eq!(taus, vec![int(1), rat(1, 6)]);
        for w in taus.windows(2) {
            assert_eq!(&w[0] - &w[1], rat(5, 6));
        }
    }

    #[test]
    fn tau_rows_satisfy_slope_identity() {
        for m in 1..=5 {
            for n in 1..=5 {
                for r in 1..=m.max(n) {
                    let (mi, ni) = (m as i64, n as i64);
                    for side in [TauSide::I1, TauSide::I2] {
                        let table = tau_table(m, n, r, side).unwrap();
                        assert!(table.minimal().tau.is_positive());
                        assert!(table.minimal().within_caps);
                        for row in &table.rows {
                            assert_eq!(row.l_plus + row.l_minus, r as i64);
                            let slope = rat(row.l_plus, mi) - rat(row.l_minus, ni);
                            let expected = match side {
                                TauSide::I1 => -row.tau.clone(),
                                TauSide::I2 => row.tau.clone(),
                            };
                            assert_eq!(slope, expected);
                            assert_eq!(
                                row.within_caps,
                                row.l_plus <= mi && row.l_minus <= ni && row.l_plus >= 0 && row.l_minus >= 0
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ceiling_examples() {
        let c = ceiling_feasible(5, 2, 5);
        assert_eq!((c.first_lhs, c.first_rhs), (3, 3));
        assert!(c.holds());
        for m in 1..=6 {
            for n in 1..=6 {
                for r in 1..=m.min(n) {
                    assert!(ceiling_feasible(m, n, r).holds());
                }
            }
        }
    }

    #[test]
    fn pulse_eta_and_depth() {
        // τ₂ = 1/2 is not a (1, 2, 1) table entry, so only the raw shape is checked here.
        let p = PulseParams {
            m: 1,
            n: 2,
            r: 1,
            tau1: rat(1, 2),
            tau2: rat(1, 2),
            k: 2,
        };
        assert_eq!(p.eta_k(), int(3));
        assert_eq!(p.eta_k(), p.b_k() - rat(2, 2));
        let raw = pulse_path(&p).unwrap();
        assert_eq!(raw.eval(&int(3)).unwrap()[0], rat(-1, 2));
        assert_eq!(p.depth(), rat(-1, 2));
        assert!(matches!(pulse_block(&p), Err(BuildError::InvalidOutput(_))));
        let ratio = (p.eta_k() - p.b_k() + int(2)) / (p.b_k() - p.eta_k());
        assert_eq!(ratio, &p.tau2 / &p.tau1);
    }

    #[test]
    fn pulse_block_high_order() {
        let p = PulseParams::new(3, 2, 3, &TauChoice::Min, &TauChoice::Min, 2).unwrap();
        assert_eq!(p.tau1, rat(2, 3));
        let block = pulse_block(&p).unwrap();
        assert_eq!(block.path().end_values().unwrap(), vec![int(0); 5]);
        let profile = delta_profile(&block).unwrap();
        assert_eq!(profile.len(), 2);
        assert!(profile.iter().all(|s| s.delta < 6));
    }

    #[test]
    fn pulse_rejections() {
        assert_eq!(
            PulseParams::new(2, 2, 3, &TauChoice::Min, &TauChoice::Min, 1).unwrap_err(),
            BuildError::InfeasibleOrder { r: 3, max: 2 }
        );
        // r/n = 3/2 is a table entry but exceeds (d-r)/m = 2/3.
        assert!(matches!(
            PulseParams::new(3, 2, 3, &TauChoice::Value(rat(3, 2)), &TauChoice::Min, 1),
            Err(BuildError::SlopeCapViolation(_))
        ));
        assert!(matches!(
            PulseParams::new(1, 1, 1, &TauChoice::Value(rat(1, 3)), &TauChoice::Min, 1),
            Err(BuildError::TauNotInTable { side: TauSide::I1, .. })
        ));
    }

    #[test]
    fn pulse_train_rate_bounds() {
        let f = pulse_template(1, 1, 1, &TauChoice::Min, &TauChoice::Min, 4).unwrap();
        assert_eq!(f.path().end(), Some(&int(256)));
        let at_a4 = average_rate(&f, &int(252)).unwrap();
        assert!(at_a4 >= rat(246, 252));
        assert!(average_rate(&f, &int(256)).unwrap() <= int(1));
    }

    #[test]
    fn pulse_train_matches_pairwise_concat() {
        let f = pulse_template(1, 2, 1, &TauChoice::Min, &TauChoice::Min, 3).unwrap();
        let base = PulseParams::new(1, 2, 1, &TauChoice::Min, &TauChoice::Min, 1).unwrap();
        let mut acc = pulse_path(&base).unwrap();
        for k in 2..=3 {
            let gap = PiecewisePath::zero(3, pulse_end(k - 1), Some(pulse_start(k))).unwrap();
            acc = acc.concat(&gap).unwrap().concat(&pulse_path(&base.with_k(k)).unwrap()).unwrap();
        }
        assert_eq!(f.path(), &acc);
    }

    #[test]
    fn reflection() {
        assert_eq!(reflect_dual(&zero_template(2, 3).unwrap()).unwrap(), zero_template(3, 2).unwrap());
        let q = quadrilateral_template(2, 3, 2, &int(1)).unwrap();
        let g = reflect_dual(&q).unwrap();
        assert_eq!((g.m(), g.n()), (3, 2));
        assert_eq!(average_rate(&g, &int(1)).unwrap(), int(6) - rat(12, 5));
        assert_eq!(reflect_dual(&g).unwrap(), q);
    }

    #[test]
    fn perturbation_is_caught() {
        let q = quadrilateral_template(2, 3, 1, &int(1)).unwrap();
        let step = rat(5, 12);
        // Raising f_1 makes it coincide with the top block and then cross it.
        let v = validate(2, 3, perturb_slope(q.path(), 0, 0, &step)).unwrap_err();
        assert!(v.iter().any(|x| x.axiom == Axiom::Ordering));
        let v = validate(2, 3, perturb_slope(q.path(), 0, 0, &-step.clone())).unwrap_err();
        assert!(v.iter().any(|x| matches!(x.axiom, Axiom::SlopeBound | Axiom::Quantization)));
        let v = validate(2, 3, perturb_slope(q.path(), 1, 4, &step)).unwrap_err();
        assert!(v.iter().any(|x| matches!(x.axiom, Axiom::SlopeBound | Axiom::Quantization)));
    }
}
