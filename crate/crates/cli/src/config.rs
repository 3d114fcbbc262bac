//! Resolved experiment configuration and the small input languages.

use minima_forge::builders::TauChoice;
use minima_forge::flow::{fibonacci_convergent, geometric_grid, random_a, AMatrix};
use minima_forge::lattice::Norm;
use minima_forge::matrix::{FloatMatrix, Matrix};
use minima_forge::rational::{format_rational, parse_rational, Rational};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const VERSION: &str = concat!("minima-forge ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(CliError::Parse(format!("format must be json or csv, got `{s}`"))),
        }
    }

    /// Explicit choice, else the output extension, else `default`.
    pub fn resolve(explicit: Option<&str>, path: Option<&str>, default: Format) -> CliResult<Self> {
        if let Some(f) = explicit {
            return Format::parse(f);
        }
        Ok(match path {
            Some(p) if p.ends_with(".csv") => Format::Csv,
            Some(p) if p.ends_with(".json") => Format::Json,
            _ => default,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// `None` writes to stdout.
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub template: String,
    /// A rational `T` or `breakpoints`.
    pub at: String,
    pub bounds: Option<String>,
    pub raw: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    pub builder: String,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub scale: Option<String>,
    pub periods: Option<usize>,
    pub tau1: Option<String>,
    pub tau2: Option<String>,
    pub k_max: Option<usize>,
    pub input: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub m: usize,
    pub n: usize,
    /// The A-spec as given.
    pub a: String,
    /// Entries of the resolved matrix, rational strings or decimal floats.
    pub a_resolved: Vec<Vec<String>>,
    pub u_grid: String,
    pub orders: Vec<usize>,
    pub norm: Norm,
    pub threshold: String,
    pub dual: bool,
    pub cross_check: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    pub m: usize,
    pub n: usize,
    pub a: String,
    pub a_resolved: Vec<Vec<String>>,
    pub r: usize,
    pub q_max: i64,
}

/// A lattice given directly or as a flow point `g_t u_A ℤ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub basis: Option<Vec<Vec<String>>>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub a: Option<String>,
    pub a_resolved: Option<Vec<Vec<String>>>,
    pub u: Option<String>,
    pub norm: Option<Norm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Experiment {
    TemplateRate(RateParams),
    PulseBuild(BuildParams),
    FlowTrace(FlowParams),
    BaScan(ScanParams),
    DualCheck(CheckParams),
    MinkCheck(CheckParams),
}

/// Everything needed to rerun a command; embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

pub fn parse_rat(s: &str, what: &str) -> CliResult<Rational> {
    parse_rational(s).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

/// `u0:ratio:count`, a geometric grid of scales.
pub fn parse_grid(spec: &str) -> CliResult<Vec<Rational>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [u0, ratio, count] = parts.as_slice() else {
        return Err(CliError::Parse(format!("u grid must be u0:ratio:count, got `{spec}`")));
    };
    let u0 = parse_rat(u0, "u0")?;
    let ratio = parse_rat(ratio, "ratio")?;
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("grid count `{count}` is not a nonnegative integer")))?;
    geometric_grid(&u0, &ratio, count).map_err(CliError::parse)
}

/// `min` or a rational table entry.
pub fn parse_tau(s: &str) -> CliResult<TauChoice> {
    if s.trim() == "min" {
        Ok(TauChoice::Min)
    } else {
        Ok(TauChoice::Value(parse_rat(s, "tau")?))
    }
}

pub fn parse_norm(s: &str) -> CliResult<Norm> {
    match s {
        "l2" => Ok(Norm::L2),
        "linf" => Ok(Norm::LInf),
        _ => Err(CliError::Parse(format!("norm must be l2 or linf, got `{s}`"))),
    }
}

/// Comma-separated positive orders.
pub fn parse_orders(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|x| match x.trim().parse::<usize>() {
            Ok(r) if r > 0 => Ok(r),
            _ => Err(CliError::Parse(format!("order `{x}` is not a positive integer"))),
        })
        .collect()
}

/// A resolved A-spec.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedA {
    pub matrix: AMatrix,
    /// `Some(q)` for a Fibonacci convergent with denominator `q`.
    pub convergent: Option<Rational>,
}

impl ResolvedA {
    pub fn entries(&self) -> Vec<Vec<String>> {
        match &self.matrix {
            AMatrix::Exact(a) => (0..a.rows())
                .map(|i| a.row(i).iter().map(format_rational).collect())
                .collect(),
            AMatrix::Float(a) => (0..a.rows())
                .map(|i| (0..a.cols()).map(|j| format!("{:?}", a.get(i, j))).collect())
                .collect(),
        }
    }
}

/// Inline JSON rows, `@file`, `fib:k` or `rand:seed`.
pub fn parse_a_spec(spec: &str, m: usize, n: usize) -> CliResult<ResolvedA> {
    let spec = spec.trim();
    let resolved = if let Some(k) = spec.strip_prefix("fib:") {
        if (m, n) != (1, 1) {
            return Err(CliError::Parse(format!("fib:k is a 1x1 family, got m = {m}, n = {n}")));
        }
        let k: usize = k.parse().map_err(|_| CliError::Parse(format!("bad convergent index `{k}`")))?;
        let c = fibonacci_convergent(k).map_err(CliError::parse)?;
        ResolvedA {
            matrix: AMatrix::Exact(Matrix::new(1, 1, vec![c.clone()])),
            convergent: Some(c),
        }
    } else if let Some(seed) = spec.strip_prefix("rand:") {
        let seed: u64 = seed.parse().map_err(|_| CliError::Parse(format!("bad seed `{seed}`")))?;
        ResolvedA { matrix: AMatrix::Exact(random_a(seed, m, n)), convergent: None }
    } else if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        ResolvedA { matrix: parse_matrix_json(&text)?, convergent: None }
    } else {
        ResolvedA { matrix: parse_matrix_json(spec)?, convergent: None }
    };
    if resolved.matrix.rows() != m || resolved.matrix.cols() != n {
        return Err(CliError::Parse(format!(
            "A must be {m}x{n}, got {}x{}",
            resolved.matrix.rows(),
            resolved.matrix.cols()
        )));
    }
    Ok(resolved)
}

enum Entry {
    Exact(Rational),
    Float(f64),
}

/// Rows of rational strings or JSON numbers; any non-integer number makes
/// the whole matrix a float matrix.
pub fn parse_matrix_json(text: &str) -> CliResult<AMatrix> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("matrix JSON: {e}")))?;
    let rows = value
        .as_array()
        .ok_or_else(|| CliError::Parse("matrix must be a JSON array of rows".into()))?;
    let mut parsed: Vec<Vec<Entry>> = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| CliError::Parse("each matrix row must be an array".into()))?;
        let entries = row
            .iter()
            .map(|v| match v {
                Value::String(s) => parse_rat(s, "matrix entry").map(Entry::Exact),
                Value::Number(x) => Ok(match x.as_i64() {
                    Some(i) => Entry::Exact(Rational::from_integer(i.into())),
                    None => Entry::Float(x.as_f64().unwrap_or(f64::NAN)),
                }),
                other => Err(CliError::Parse(format!("matrix entry `{other}` is not a number"))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        parsed.push(entries);
    }
    let cols = parsed.first().map_or(0, Vec::len);
    if parsed.is_empty() || cols == 0 || parsed.iter().any(|r| r.len() != cols) {
        return Err(CliError::Parse("matrix must be a nonempty rectangle".into()));
    }
    let any_float = parsed.iter().flatten().any(|e| matches!(e, Entry::Float(_)));
    if any_float {
        let rows: Vec<Vec<f64>> = parsed
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| match e {
                        Entry::Float(x) => x,
                        Entry::Exact(q) => minima_forge::rational::to_f64(&q),
                    })
                    .collect()
            })
            .collect();
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(CliError::Parse("matrix entries must be finite".into()));
        }
        FloatMatrix::from_rows(rows)
            .map(AMatrix::Float)
            .ok_or_else(|| CliError::Parse("matrix must be a nonempty rectangle".into()))
    } else {
        let rows: Vec<Vec<Rational>> = parsed
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| match e {
                        Entry::Exact(q) => q,
                        Entry::Float(_) => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        Matrix::from_rows(rows)
            .map(AMatrix::Exact)
            .ok_or_else(|| CliError::Parse("matrix must be a nonempty rectangle".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use minima_forge::rational::{int, rat};

    #[test]
    fn grid_spec() {
        assert_eq!(parse_grid("1:2:4").unwrap(), vec![int(1), int(2), int(4), int(8)]);
        assert_eq!(parse_grid("3/2:4/3:2").unwrap(), vec![rat(3, 2), int(2)]);
        for bad in ["1:2", "1:1:3", "1/2:2:3", "1:2:x"] {
            assert!(matches!(parse_grid(bad), Err(CliError::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn a_specs() {
        let a = parse_a_spec(r#"[["1/2", 2]]"#, 1, 2).unwrap();
        assert_eq!(a.entries(), vec![vec!["1/2".to_string(), "2/1".to_string()]]);
        assert!(parse_a_spec("[[1.5]]", 1, 1).unwrap().matrix.exact().is_none());
        let fib = parse_a_spec("fib:12", 1, 1).unwrap();
        assert_eq!(fib.convergent, Some(rat(233, 144)));
        assert!(parse_a_spec("fib:12", 1, 2).is_err());
        assert_eq!(parse_a_spec("rand:3", 2, 1).unwrap(), parse_a_spec("rand:3", 2, 1).unwrap());
        assert!(matches!(parse_a_spec("[[1, 2]]", 2, 1), Err(CliError::Parse(_))));
        assert!(matches!(parse_a_spec("@/nonexistent/a.json", 1, 1), Err(CliError::Io(_))));
    }

    #[test]
    fn config_round_trip() {
        let cfg = ExperimentConfig {
            experiment: Experiment::FlowTrace(FlowParams {
                m: 1,
                n: 1,
                a: "fib:12".into(),
                a_resolved: vec![vec!["233/144".into()]],
                u_grid: "1:2:7".into(),
                orders: vec![1, 2],
                norm: Norm::LInf,
                threshold: "1/10".into(),
                dual: true,
                cross_check: Some(50),
            }),
            output: OutputSpec { path: None, format: Format::Csv },
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.starts_with(r#"{"kind":"flow-trace","params":"#));
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
    }
}
