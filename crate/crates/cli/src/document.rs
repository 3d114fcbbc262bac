//! On-disk template format with exact rational strings.

use minima_forge::pwl::PiecewisePath;
use minima_forge::rational::{format_rational, parse_rational, Rational};
use minima_forge::template::{validate, Template, Violation};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateDocument {
    pub m: usize,
    pub n: usize,
    pub start: String,
    /// Right end of the domain; absent for paths that continue forever.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,
    pub breakpoints: Vec<String>,
    pub initial_values: Vec<String>,
    pub slopes: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Builder kind and parameters that produced the path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
}

fn strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

fn parse_all(xs: &[String], what: &str) -> CliResult<Vec<Rational>> {
    xs.iter()
        .map(|s| parse_rational(s).map_err(|e| CliError::Parse(format!("{what}: {e}"))))
        .collect()
}

impl TemplateDocument {
    pub fn from_path(m: usize, n: usize, path: &PiecewisePath, metadata: Option<Metadata>) -> Self {
        Self {
            m,
            n,
            start: format_rational(path.start()),
            end: path.end().map(format_rational),
            breakpoints: strings(path.breakpoints()),
            initial_values: strings(path.initial_values()),
            slopes: path.slopes().iter().map(|s| strings(s)).collect(),
            metadata,
        }
    }

    pub fn from_template(t: &Template, metadata: Option<Metadata>) -> Self {
        Self::from_path(t.m(), t.n(), t.path(), metadata)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("template document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// The path without any axiom check.
    pub fn path(&self) -> CliResult<PiecewisePath> {
        let start = parse_rational(&self.start).map_err(|e| CliError::Parse(format!("start: {e}")))?;
        let end = self
            .end
            .as_deref()
            .map(|s| parse_rational(s).map_err(|e| CliError::Parse(format!("end: {e}"))))
            .transpose()?;
        let slopes = self
            .slopes
            .iter()
            .enumerate()
            .map(|(i, row)| parse_all(row, &format!("slopes[{i}]")))
            .collect::<CliResult<Vec<_>>>()?;
        PiecewisePath::new(
            start,
            parse_all(&self.breakpoints, "breakpoints")?,
            end,
            parse_all(&self.initial_values, "initial_values")?,
            slopes,
        )
        .map_err(CliError::parse)
    }

    /// Parses and validates; violations are returned, not raised.
    pub fn check(&self) -> CliResult<Result<Template, Vec<Violation>>> {
        let path = self.path()?;
        if path.dim() != self.m + self.n {
            return Err(CliError::Parse(format!(
                "path has {} components, m + n = {}",
                path.dim(),
                self.m + self.n
            )));
        }
        Ok(validate(self.m, self.n, path))
    }

    /// Loads the template, mandatory validation unless `raw`.
    pub fn template(&self, raw: bool) -> CliResult<Template> {
        if raw {
            return Ok(Template::assume_valid(self.m, self.n, self.path()?));
        }
        self.check()?.map_err(|v| {
            let first = v.first().map(|x| x.message.clone()).unwrap_or_default();
            CliError::Domain(format!("template violates {} axiom condition(s); first: {first}", v.len()))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use minima_forge::builders::{quadrilateral_template, zero_template};
    use minima_forge::rational::int;

    #[test]
    fn zero_template_round_trip() {
        let t = zero_template(2, 3).unwrap();
        let doc = TemplateDocument::from_template(&t, None);
        let back = TemplateDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.template(false).unwrap().path(), t.path());
    }

    #[test]
    fn bad_slope_is_reported() {
        let t = quadrilateral_template(2, 3, 1, &int(5)).unwrap();
        let mut doc = TemplateDocument::from_template(&t, None);
        doc.slopes[0][0] = "3/2".into();
        let violations = doc.check().unwrap().unwrap_err();
        assert!(!violations.is_empty());
        assert!(matches!(doc.template(false), Err(CliError::Domain(_))));
        assert!(doc.template(true).is_ok());
    }

    #[test]
    fn malformed_rational_is_a_parse_error() {
        let mut doc = TemplateDocument::from_template(&zero_template(1, 1).unwrap(), None);
        doc.start = "1/0".into();
        assert!(matches!(doc.path(), Err(CliError::Parse(_))));
    }
}
