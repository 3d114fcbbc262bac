//! Template axioms and the contraction-rate machinery.
//!
//! An `m × n` template is a `d = m + n` component piecewise-linear path
//! satisfying
//!
//! * (I) `f_1 <= ... <= f_d`,
//! * (II) every slope lies in `[-1/n, 1/m]`,
//! * (III) wherever `f_j < f_{j+1}`, the partial sum `F_j = f_1 + ... + f_j`
//!   is convex with slopes in the quantized set `Z(j)`.
//!
//! Strict inequality is read on open linearity segments. Convexity of `F_j`
//! is enforced across a breakpoint only when `f_j < f_{j+1}` also holds at the
//! breakpoint itself; an isolated tie splits the strict region.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::pwl::{PathError, PiecewisePath, Segment};
use crate::rational::{format_rational, int, rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("segment {segment}: F_{q}' = {slope} has no integer (L+, L-) solution; input bypassed validation")]
    NotATemplate {
        segment: usize,
        q: usize,
        slope: String,
    },
    #[error("segment index {index} out of range ({count} segments)")]
    SegmentOutOfRange { index: usize, count: usize },
    #[error("index j = {j} out of range [0, {d}]")]
    IndexOutOfRange { j: usize, d: usize },
    #[error("averaging time {0} must exceed the path start")]
    EmptyWindow(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    /// Shape mismatch between `(m, n)` and the path dimension.
    #[serde(rename = "shape")]
    Shape,
    #[serde(rename = "I")]
    Ordering,
    #[serde(rename = "II")]
    SlopeBound,
    /// Convexity part of (III).
    #[serde(rename = "III")]
    Convexity,
    /// Quantized-slope part of (III).
    #[serde(rename = "III")]
    Quantization,
}

impl Axiom {
    pub fn label(self) -> &'static str {
        match self {
            Axiom::Shape => "shape",
            Axiom::Ordering => "I",
            Axiom::SlopeBound => "II",
            Axiom::Convexity | Axiom::Quantization => "III",
        }
    }

    pub fn rule(self) -> &'static str {
        match self {
            Axiom::Shape => "dimension",
            Axiom::Ordering => "ordering",
            Axiom::SlopeBound => "slope-bound",
            Axiom::Convexity => "convexity",
            Axiom::Quantization => "quantized-slope",
        }
    }
}

/// A single axiom failure with its exact witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub rule: &'static str,
    /// Component index `i` for (I)/(II), partial-sum index `j` for (III); 1-based.
    pub index: usize,
    pub segment: Option<usize>,
    pub at: Option<String>,
    pub value: String,
    pub message: String,
}

impl Violation {
    fn new(axiom: Axiom, index: usize, segment: Option<usize>, at: Option<&Rational>, value: &Rational, message: String) -> Self {
        Self {
            axiom,
            rule: axiom.rule(),
            index,
            segment,
            at: at.map(format_rational),
            value: format_rational(value),
            message,
        }
    }
}

/// A path that satisfies the template axioms for `(m, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    m: usize,
    n: usize,
    path: PiecewisePath,
}

impl Template {
    /// Wraps a path without checking the axioms. Analyses on such a value may
    /// fail with [`TemplateError::NotATemplate`].
    pub fn assume_valid(m: usize, n: usize, path: PiecewisePath) -> Self {
        Self { m, n, path }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.m + self.n
    }

    pub fn path(&self) -> &PiecewisePath {
        &self.path
    }

    pub fn into_path(self) -> PiecewisePath {
        self.path
    }

    pub fn mn(&self) -> Rational {
        int((self.m * self.n) as i64)
    }
}

/// The quantized slope set `Z(j)` for `m × n` templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeSet {
    pub j: usize,
    pub members: Vec<Rational>,
}

impl SlopeSet {
    pub fn contains(&self, s: &Rational) -> bool {
        self.members.binary_search(s).is_ok()
    }
}

pub fn slope_set(m: usize, n: usize, j: usize) -> Result<SlopeSet, TemplateError> {
    let d = m + n;
    if j > d {
        return Err(TemplateError::IndexOutOfRange { j, d });
    }
    let lo = j.saturating_sub(n);
    let hi = j.min(m);
    // Members increase strictly with L+, so the list comes out sorted.
    let members = (lo..=hi)
        .map(|lp| rat(lp as i64, m as i64) - rat((j - lp) as i64, n as i64))
        .collect();
    Ok(SlopeSet { j, members })
}

/// Solves `L+ + L- = q`, `L+/m - L-/n = slope` for `L+` in the admissible range.
pub fn solve_l_plus(m: usize, n: usize, q: usize, slope: &Rational) -> Option<usize> {
    let mn = int((m * n) as i64);
    let numer = slope * mn + int((q * m) as i64);
    let value = numer / int((m + n) as i64);
    if !value.is_integer() {
        return None;
    }
    let lp = value.to_integer().to_i64()?;
    let lo = q.saturating_sub(n) as i64;
    let hi = q.min(m) as i64;
    (lo..=hi).contains(&lp).then_some(lp as usize)
}

fn partial_sum(slopes: &[Rational], j: usize) -> Rational {
    slopes[..j].iter().fold(Rational::zero(), |acc, s| acc + s)
}

/// `f_j < f_{j+1}` on the open segment (1-based `j`, `j = d` always strict).
/// Under the ordering axiom this is "not identically equal"; without it the
/// same test keeps (III) checkable on the offending segment.
fn strict_on(seg: &Segment<'_>, j: usize) -> bool {
    let d = seg.anchor.len();
    if j == 0 || j >= d {
        return true;
    }
    seg.anchor[j - 1] != seg.anchor[j] || seg.slopes[j - 1] != seg.slopes[j]
}

/// Checks axioms (I)-(III) and returns the template or every violation found.
pub fn validate(m: usize, n: usize, path: PiecewisePath) -> Result<Template, Vec<Violation>> {
    let violations = find_violations(m, n, &path);
    if violations.is_empty() {
        Ok(Template { m, n, path })
    } else {
        Err(violations)
    }
}

pub fn find_violations(m: usize, n: usize, path: &PiecewisePath) -> Vec<Violation> {
    let d = m + n;
    let mut out = Vec::new();
    if m == 0 || n == 0 || path.dim() != d {
        out.push(Violation::new(
            Axiom::Shape,
            0,
            None,
            None,
            &int(path.dim() as i64),
            format!("path has {} components, expected m + n = {}", path.dim(), d),
        ));
        return out;
    }

    // (I) at every knot, plus slope order on an unbounded tail.
    let knots = path.knots();
    for t in &knots {
        let v = path.eval(t).expect("knot in domain");
        for i in 1..d {
            if v[i - 1] > v[i] {
                out.push(Violation::new(
                    Axiom::Ordering,
                    i,
                    path.segment_index(t).ok(),
                    Some(t),
                    &(&v[i - 1] - &v[i]),
                    format!("f_{} > f_{} by the reported amount", i, i + 1),
                ));
            }
        }
    }
    if path.end().is_none() {
        let last = path.segment(path.segment_count() - 1).unwrap();
        for i in 1..d {
            if last.slopes[i - 1] > last.slopes[i] {
                out.push(Violation::new(
                    Axiom::Ordering,
                    i,
                    Some(last.index),
                    None,
                    &(&last.slopes[i - 1] - &last.slopes[i]),
                    format!("f_{} eventually overtakes f_{} on the unbounded tail", i, i + 1),
                ));
            }
        }
    }

    // (II)
    let lower = rat(-1, n as i64);
    let upper = rat(1, m as i64);
    for seg in path.segments() {
        for (i, s) in seg.slopes.iter().enumerate() {
            if *s < lower || *s > upper {
                out.push(Violation::new(
                    Axiom::SlopeBound,
                    i + 1,
                    Some(seg.index),
                    Some(seg.lo),
                    s,
                    format!("slope of f_{} outside [-1/{}, 1/{}]", i + 1, n, m),
                ));
            }
        }
    }

    // (III)
    let sets: Vec<SlopeSet> = (0..=d).map(|j| slope_set(m, n, j).unwrap()).collect();
    let segments: Vec<Segment<'_>> = path.segments().collect();
    for j in 1..=d {
        let mut previous: Option<Rational> = None;
        for seg in &segments {
            if !strict_on(seg, j) {
                previous = None;
                continue;
            }
            let slope = partial_sum(seg.slopes, j);
            if !sets[j].contains(&slope) {
                out.push(Violation::new(
                    Axiom::Quantization,
                    j,
                    Some(seg.index),
                    Some(seg.lo),
                    &slope,
                    format!("F_{}' not in Z({})", j, j),
                ));
            }
            let tied_at_lo = j < d && seg.anchor[j - 1] == seg.anchor[j];
            if let Some(prev) = previous.as_ref() {
                if !tied_at_lo && slope < *prev {
                    out.push(Violation::new(
                        Axiom::Convexity,
                        j,
                        Some(seg.index),
                        Some(seg.lo),
                        &(prev - &slope),
                        format!("F_{}' decreases across the breakpoint", j),
                    ));
                }
            }
            previous = Some(slope);
        }
    }
    out
}

/// Per-segment decomposition used by the contraction-rate computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentAnalysis {
    pub index: usize,
    pub lo: Rational,
    pub hi: Option<Rational>,
    /// Intervals of equality `(p, q]`, in order, partitioning `[1, d]`.
    pub equality_intervals: Vec<(usize, usize)>,
    pub l_plus: BTreeMap<usize, usize>,
    pub l_minus: BTreeMap<usize, usize>,
    pub m_plus: BTreeMap<(usize, usize), usize>,
    pub m_minus: BTreeMap<(usize, usize), usize>,
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    pub delta: usize,
}

/// Counts pairs `(i+, i-)` in `S+ × S-` with `i+ < i-`.
pub fn count_ordered_pairs(s_plus: &[usize], s_minus: &[usize]) -> usize {
    s_plus
        .iter()
        .map(|p| s_minus.iter().filter(|q| *p < **q).count())
        .sum()
}

pub fn analyze_segment(template: &Template, index: usize) -> Result<SegmentAnalysis, TemplateError> {
    let path = template.path();
    let seg = path.segment(index).ok_or(TemplateError::SegmentOutOfRange {
        index,
        count: path.segment_count(),
    })?;
    let (m, n, d) = (template.m(), template.n(), template.d());

    let mut boundaries = vec![0];
    boundaries.extend((1..d).filter(|&q| strict_on(&seg, q)));
    boundaries.push(d);

    let mut l_plus = BTreeMap::new();
    let mut l_minus = BTreeMap::new();
    for &q in &boundaries {
        let slope = partial_sum(seg.slopes, q);
        let lp = solve_l_plus(m, n, q, &slope).ok_or_else(|| TemplateError::NotATemplate {
            segment: index,
            q,
            slope: format_rational(&slope),
        })?;
        l_plus.insert(q, lp);
        l_minus.insert(q, q - lp);
    }

    let mut equality_intervals = Vec::new();
    let mut m_plus = BTreeMap::new();
    let mut m_minus = BTreeMap::new();
    let mut s_plus = Vec::new();
    let mut s_minus = Vec::new();
    for w in boundaries.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (mp, mm) = match (
            l_plus[&q].checked_sub(l_plus[&p]),
            l_minus[&q].checked_sub(l_minus[&p]),
        ) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(TemplateError::NotATemplate {
                    segment: index,
                    q,
                    slope: format_rational(&partial_sum(seg.slopes, q)),
                })
            }
        };
        equality_intervals.push((p, q));
        m_plus.insert((p, q), mp);
        m_minus.insert((p, q), mm);
        s_plus.extend(p + 1..=p + mp);
        s_minus.extend(p + mp + 1..=q);
    }
    let delta = count_ordered_pairs(&s_plus, &s_minus);

    Ok(SegmentAnalysis {
        index,
        lo: seg.lo.clone(),
        hi: seg.hi.cloned(),
        equality_intervals,
        l_plus,
        l_minus,
        m_plus,
        m_minus,
        s_plus,
        s_minus,
        delta,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateSegment {
    pub lo: Rational,
    pub hi: Option<Rational>,
    pub delta: usize,
}

pub fn delta_profile(template: &Template) -> Result<Vec<RateSegment>, TemplateError> {
    (0..template.path().segment_count())
        .map(|i| {
            analyze_segment(template, i).map(|a| RateSegment {
                lo: a.lo,
                hi: a.hi,
                delta: a.delta,
            })
        })
        .collect()
}

/// Cumulative integral of the contraction rate, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct RateIntegral {
    start: Rational,
    los: Vec<Rational>,
    deltas: Vec<Rational>,
    prefix: Vec<Rational>,
    end: Option<Rational>,
}

impl RateIntegral {
    pub fn new(template: &Template) -> Result<Self, TemplateError> {
        let profile = delta_profile(template)?;
        let mut los = Vec::with_capacity(profile.len());
        let mut deltas = Vec::with_capacity(profile.len());
        let mut prefix = Vec::with_capacity(profile.len());
        let mut acc = Rational::zero();
        for seg in &profile {
            prefix.push(acc.clone());
            let delta = int(seg.delta as i64);
            if let Some(hi) = &seg.hi {
                acc += &delta * (hi - &seg.lo);
            }
            los.push(seg.lo.clone());
            deltas.push(delta);
        }
        Ok(Self {
            start: template.path().start().clone(),
            los,
            deltas,
            prefix,
            end: template.path().end().cloned(),
        })
    }

    /// `∫_start^T δ(f, t) dt`.
    pub fn integral(&self, upto: &Rational) -> Result<Rational, TemplateError> {
        if *upto < self.start || self.end.as_ref().is_some_and(|e| upto > e) {
            return Err(TemplateError::Path(PathError::OutOfDomain {
                t: format_rational(upto),
                start: format_rational(&self.start),
                end: self.end.as_ref().map(format_rational).unwrap_or_else(|| "inf".into()),
            }));
        }
        let i = self.los.partition_point(|lo| lo <= upto).max(1) - 1;
        Ok(&self.prefix[i] + &self.deltas[i] * (upto - &self.los[i]))
    }

    /// `Δ(f, T)`: the mean of `δ` over `[start, T]`.
    pub fn average(&self, upto: &Rational) -> Result<Rational, TemplateError> {
        let len = upto - &self.start;
        if !len.is_positive() {
            return Err(TemplateError::EmptyWindow(format_rational(upto)));
        }
        Ok(self.integral(upto)? / len)
    }
}

/// `Δ(f, T) = (1/T) ∫_0^T δ(f, t) dt` (window `[start, T]` for partial templates).
pub fn average_rate(template: &Template, upto: &Rational) -> Result<Rational, TemplateError> {
    RateIntegral::new(template)?.average(upto)
}

/// Sampled tail extrema of `Δ(f, ·)` with a Lipschitz certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateBounds {
    pub horizon: Rational,
    /// Start of the tail window, `start + (horizon - start)/2`.
    pub tail_from: Rational,
    /// `(T, Δ(f, T))` at every knot in the tail window and at both window ends.
    pub samples: Vec<(Rational, Rational)>,
    pub lower: Rational,
    pub upper: Rational,
    /// Largest `mn·|T' - T| / T'` over consecutive samples.
    pub certificate: Rational,
}

pub fn rate_bounds(template: &Template, horizon: &Rational) -> Result<RateBounds, TemplateError> {
    let integral = RateIntegral::new(template)?;
    let start = template.path().start().clone();
    if *horizon <= start {
        return Err(TemplateError::EmptyWindow(format_rational(horizon)));
    }
    let tail_from = &start + (horizon - &start) / int(2);
    let mut times: Vec<Rational> = template
        .path()
        .knots()
        .into_iter()
        .filter(|t| *t > tail_from && t < horizon)
        .collect();
    times.insert(0, tail_from.clone());
    times.push(horizon.clone());

    let samples: Vec<(Rational, Rational)> = times
        .into_iter()
        .map(|t| integral.average(&t).map(|a| (t, a)))
        .collect::<Result<_, _>>()?;
    let lower = samples.iter().map(|(_, a)| a).min().unwrap().clone();
    let upper = samples.iter().map(|(_, a)| a).max().unwrap().clone();
    let mn = template.mn();
    let certificate = samples
        .windows(2)
        .map(|w| &mn * (&w[1].0 - &w[0].0) / (&w[1].0 - &start))
        .max()
        .unwrap_or_else(Rational::zero);
    Ok(RateBounds {
        horizon: horizon.clone(),
        tail_from,
        samples,
        lower,
        upper,
        certificate,
    })
}

/// Helper shared with builders: `⌈x⌉` for an exact rational as a machine integer.
pub(crate) fn ceil_i64(x: &Rational) -> i64 {
    let c: BigInt = -((-x.numer()).div_floor(x.denom()));
    c.to_i64().expect("small ceiling")
}
