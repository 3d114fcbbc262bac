//! Continuous piecewise-linear paths with exact rational breakpoints.
//!
//! A path is stored by its start, the interior breakpoints, an optional
//! explicit end, the value at the start and one slope vector per segment.
//! Values at later segment anchors are derived by integration, so a path is
//! continuous by construction. Segments are closed on the left: the slope
//! at a breakpoint belongs to the segment on its right.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("path dimension must be positive")]
    EmptyDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected {expected} slope vectors, found {found}")]
    SegmentCount { expected: usize, found: usize },
    #[error("breakpoints must be strictly increasing after the start (offending value {0})")]
    UnorderedBreakpoints(String),
    #[error("t = {t} is outside the domain [{start}, {end}]")]
    OutOfDomain { t: String, start: String, end: String },
    #[error("weight vector has {found} entries for {expected} segments")]
    WeightCount { expected: usize, found: usize },
    #[error("cannot extend an unbounded path")]
    Unbounded,
    #[error("junction at {at} does not match: prefix ends at {left}, suffix starts at {right}")]
    Discontinuous { at: String, left: String, right: String },
}

/// One linearity segment `[lo, hi)` of a path (`hi = None` when unbounded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment<'a> {
    pub index: usize,
    pub lo: &'a Rational,
    pub hi: Option<&'a Rational>,
    pub slopes: &'a [Rational],
    pub anchor: &'a [Rational],
}

impl Segment<'_> {
    pub fn length(&self) -> Option<Rational> {
        self.hi.map(|hi| hi - self.lo)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewisePath {
    dim: usize,
    start: Rational,
    breakpoints: Vec<Rational>,
    end: Option<Rational>,
    initial: Vec<Rational>,
    slopes: Vec<Vec<Rational>>,
    anchors: Vec<Vec<Rational>>,
}

impl PiecewisePath {
    pub fn new(
        start: Rational,
        breakpoints: Vec<Rational>,
        end: Option<Rational>,
        initial: Vec<Rational>,
        slopes: Vec<Vec<Rational>>,
    ) -> Result<Self, PathError> {
        let dim = initial.len();
        if dim == 0 {
            return Err(PathError::EmptyDimension);
        }
        if slopes.len() != breakpoints.len() + 1 {
            return Err(PathError::SegmentCount {
                expected: breakpoints.len() + 1,
                found: slopes.len(),
            });
        }
        if let Some(bad) = slopes.iter().find(|s| s.len() != dim) {
            return Err(PathError::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let mut prev = &start;
        for b in breakpoints.iter().chain(end.iter()) {
            if b <= prev {
                return Err(PathError::UnorderedBreakpoints(format_rational(b)));
            }
            prev = b;
        }

        let mut anchors = Vec::with_capacity(slopes.len());
        anchors.push(initial.clone());
        let mut lo = &start;
        for (i, b) in breakpoints.iter().enumerate() {
            let len = b - lo;
            let next: Vec<Rational> = anchors[i]
                .iter()
                .zip(&slopes[i])
                .map(|(v, s)| v + s * &len)
                .collect();
            anchors.push(next);
            lo = b;
        }

        Ok(Self {
            dim,
            start,
            breakpoints,
            end,
            initial,
            slopes,
            anchors,
        })
    }

    /// Constant path equal to `values` on `[start, end]` (or `[start, ∞)`).
    pub fn constant(values: Vec<Rational>, start: Rational, end: Option<Rational>) -> Result<Self, PathError> {
        let slopes = vec![vec![Rational::zero(); values.len()]];
        Self::new(start, Vec::new(), end, values, slopes)
    }

    pub fn zero(dim: usize, start: Rational, end: Option<Rational>) -> Result<Self, PathError> {
        Self::constant(vec![Rational::zero(); dim], start, end)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start(&self) -> &Rational {
        &self.start
    }

    pub fn end(&self) -> Option<&Rational> {
        self.end.as_ref()
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn initial_values(&self) -> &[Rational] {
        &self.initial
    }

    pub fn slopes(&self) -> &[Vec<Rational>] {
        &self.slopes
    }

    pub fn segment_count(&self) -> usize {
        self.slopes.len()
    }

    pub fn segment(&self, index: usize) -> Option<Segment<'_>> {
        if index >= self.slopes.len() {
            return None;
        }
        let lo = if index == 0 {
            &self.start
        } else {
            &self.breakpoints[index - 1]
        };
        let hi = if index < self.breakpoints.len() {
            Some(&self.breakpoints[index])
        } else {
            self.end.as_ref()
        };
        Some(Segment {
            index,
            lo,
            hi,
            slopes: &self.slopes[index],
            anchor: &self.anchors[index],
        })
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment<'_>> {
        (0..self.segment_count()).map(move |i| self.segment(i).expect("index in range"))
    }

    /// All anchor times: start, each breakpoint and the end when bounded.
    pub fn knots(&self) -> Vec<Rational> {
        std::iter::once(&self.start)
            .chain(&self.breakpoints)
            .chain(self.end.iter())
            .cloned()
            .collect()
    }

    /// Values at the explicit end, if the path is bounded.
    pub fn end_values(&self) -> Option<Vec<Rational>> {
        self.end.as_ref().map(|e| self.value_in_segment(self.segment_count() - 1, e))
    }

    fn out_of_domain(&self, t: &Rational) -> PathError {
        PathError::OutOfDomain {
            t: format_rational(t),
            start: format_rational(&self.start),
            end: self
                .end
                .as_ref()
                .map(format_rational)
                .unwrap_or_else(|| "inf".to_string()),
        }
    }

    fn check_domain(&self, t: &Rational) -> Result<(), PathError> {
        if *t < self.start || self.end.as_ref().is_some_and(|e| t > e) {
            return Err(self.out_of_domain(t));
        }
        Ok(())
    }

    /// Index of the segment containing `t` (closed on the left).
    pub fn segment_index(&self, t: &Rational) -> Result<usize, PathError> {
        self.check_domain(t)?;
        Ok(self.breakpoints.partition_point(|b| b <= t))
    }

    fn value_in_segment(&self, index: usize, t: &Rational) -> Vec<Rational> {
        let seg = self.segment(index).expect("index in range");
        let dt = t - seg.lo;
        seg.anchor
            .iter()
            .zip(seg.slopes)
            .map(|(v, s)| v + s * &dt)
            .collect()
    }

    pub fn eval(&self, t: &Rational) -> Result<Vec<Rational>, PathError> {
        let index = self.segment_index(t)?;
        Ok(self.value_in_segment(index, t))
    }

    /// Exact `∫_start^T w(t) dt` for a weight that is constant on each segment.
    pub fn integrate_step(&self, weights: &[Rational], upto: &Rational) -> Result<Rational, PathError> {
        if weights.len() != self.segment_count() {
            return Err(PathError::WeightCount {
                expected: self.segment_count(),
                found: weights.len(),
            });
        }
        self.check_domain(upto)?;
        let mut total = Rational::zero();
        for seg in self.segments() {
            if seg.lo >= upto {
                break;
            }
            let hi = match seg.hi {
                Some(hi) if hi < upto => hi,
                _ => upto,
            };
            total += &weights[seg.index] * (hi - seg.lo);
        }
        Ok(total)
    }

    /// Splices `suffix` onto the end of this bounded path.
    pub fn concat(&self, suffix: &PiecewisePath) -> Result<PiecewisePath, PathError> {
        if self.dim != suffix.dim {
            return Err(PathError::DimensionMismatch {
                expected: self.dim,
                found: suffix.dim,
            });
        }
        let end = self.end.as_ref().ok_or(PathError::Unbounded)?;
        let left = self.end_values().expect("bounded");
        if suffix.start != *end || left != suffix.initial {
            let describe = |v: &[Rational]| {
                v.iter().map(format_rational).collect::<Vec<_>>().join(",")
            };
            return Err(PathError::Discontinuous {
                at: format_rational(end),
                left: describe(&left),
                right: format!(
                    "{} at t={}",
                    describe(&suffix.initial),
                    format_rational(&suffix.start)
                ),
            });
        }
        let mut breakpoints = self.breakpoints.clone();
        breakpoints.push(end.clone());
        breakpoints.extend(suffix.breakpoints.iter().cloned());
        let mut slopes = self.slopes.clone();
        slopes.extend(suffix.slopes.iter().cloned());
        PiecewisePath::new(
            self.start.clone(),
            breakpoints,
            suffix.end.clone(),
            self.initial.clone(),
            slopes,
        )
    }

    /// Left fold of [`concat`](Self::concat) over `parts`, in one pass.
    pub fn concat_all(parts: &[PiecewisePath]) -> Result<PiecewisePath, PathError> {
        let (first, rest) = parts.split_first().ok_or(PathError::EmptyDimension)?;
        let mut breakpoints = first.breakpoints.clone();
        let mut slopes = first.slopes.clone();
        let mut tail = first;
        for next in rest {
            if next.dim != first.dim {
                return Err(PathError::DimensionMismatch {
                    expected: first.dim,
                    found: next.dim,
                });
            }
            let end = tail.end.as_ref().ok_or(PathError::Unbounded)?;
            let left = tail.end_values().expect("bounded");
            if next.start != *end || left != next.initial {
                // Reuse the detailed error from the pairwise splice.
                return Err(tail.concat(next).unwrap_err());
            }
            breakpoints.push(end.clone());
            breakpoints.extend(next.breakpoints.iter().cloned());
            slopes.extend(next.slopes.iter().cloned());
            tail = next;
        }
        PiecewisePath::new(
            first.start.clone(),
            breakpoints,
            tail.end.clone(),
            first.initial.clone(),
            slopes,
        )
    }

    /// The same function translated in time by `offset`.
    pub fn shifted(&self, offset: &Rational) -> PiecewisePath {
        PiecewisePath::new(
            &self.start + offset,
            self.breakpoints.iter().map(|b| b + offset).collect(),
            self.end.as_ref().map(|e| e + offset),
            self.initial.clone(),
            self.slopes.clone(),
        )
        .expect("translation preserves validity")
    }

    /// Canonical form: adjacent segments with identical slope vectors merged.
    pub fn normalized(&self) -> PiecewisePath {
        let mut breakpoints = Vec::new();
        let mut slopes = vec![self.slopes[0].clone()];
        for (b, s) in self.breakpoints.iter().zip(&self.slopes[1..]) {
            if slopes.last() != Some(s) {
                breakpoints.push(b.clone());
                slopes.push(s.clone());
            }
        }
        PiecewisePath::new(
            self.start.clone(),
            breakpoints,
            self.end.clone(),
            self.initial.clone(),
            slopes,
        )
        .expect("merging preserves validity")
    }

    /// Component-wise negation with the component order reversed.
    pub fn reflected(&self) -> PiecewisePath {
        let flip = |v: &[Rational]| v.iter().rev().map(|x| -x).collect::<Vec<_>>();
        PiecewisePath::new(
            self.start.clone(),
            self.breakpoints.clone(),
            self.end.clone(),
            flip(&self.initial),
            self.slopes.iter().map(|s| flip(s)).collect(),
        )
        .expect("reflection preserves validity")
    }

    /// Whether any component takes a negative value anywhere on the path.
    pub fn dips_below_zero(&self) -> bool {
        self.knots()
            .iter()
            .filter_map(|t| self.eval(t).ok())
            .any(|v| v.iter().any(|x| x.is_negative()))
    }
}
