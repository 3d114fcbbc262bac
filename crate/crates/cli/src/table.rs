//! CSV projection of command output.
//!
//! Layout: `# version ...` and `# config {json}` lines, the header row, data
//! rows, then `# <tag> {json}` trailer lines for non-tabular results.

use serde_json::Value;

use crate::config::{ExperimentConfig, VERSION};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub version: String,
    pub config: ExperimentConfig,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub trailers: Vec<(String, Value)>,
}

impl Table {
    pub fn new(config: ExperimentConfig, header: Vec<String>) -> Self {
        Self { version: VERSION.to_string(), config, header, rows: Vec::new(), trailers: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn trailer(&mut self, tag: &str, value: Value) {
        self.trailers.push((tag.to_string(), value));
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# version {}\n# config {}\n", self.version, self.config.to_json_value());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8 csv"));
        for (tag, value) in &self.trailers {
            out.push_str(&format!("# {tag} {value}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> CliResult<Self> {
        let mut version = None;
        let mut config = None;
        let mut trailers = Vec::new();
        for line in text.lines().filter_map(|l| l.strip_prefix("# ")) {
            let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
            match tag {
                "version" => version = Some(rest.to_string()),
                "config" => {
                    config = Some(serde_json::from_str(rest).map_err(|e| CliError::Parse(format!("config line: {e}")))?)
                }
                _ => {
                    let v = serde_json::from_str(rest).map_err(|e| CliError::Parse(format!("`{tag}` line: {e}")))?;
                    trailers.push((tag.to_string(), v));
                }
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers().map_err(CliError::parse)?.iter().map(String::from).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(String::from).collect()).map_err(CliError::parse))
            .collect::<CliResult<Vec<Vec<String>>>>()?;
        Ok(Self {
            version: version.ok_or_else(|| CliError::Parse("missing version line".into()))?,
            config: config.ok_or_else(|| CliError::Parse("missing config line".into()))?,
            header,
            rows,
            trailers,
        })
    }
}

/// JSON document wrapper carrying version and config.
pub fn json_document(config: &ExperimentConfig, body: Value) -> Value {
    let mut doc = serde_json::json!({ "version": VERSION, "config": config.to_json_value() });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, Format, OutputSpec, RateParams};

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            experiment: Experiment::TemplateRate(RateParams {
                template: "t.json".into(),
                at: "breakpoints".into(),
                bounds: None,
                raw: false,
            }),
            output: OutputSpec { path: None, format: Format::Csv },
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new(config(), vec!["T".into(), "delta".into()]);
        t.push(vec!["7/1".into(), "6/1".into()]);
        t.push(vec!["1/3".into(), "a,b".into()]);
        t.trailer("bounds", serde_json::json!({"lower": "1/2"}));
        let text = t.to_csv();
        assert!(text.starts_with("# version minima-forge "));
        assert_eq!(Table::from_csv(&text).unwrap(), t);
        assert_eq!(t.column("T").unwrap(), vec!["7/1", "1/3"]);
    }

    #[test]
    fn missing_config_is_rejected() {
        assert!(matches!(Table::from_csv("# version x\nT\n1\n"), Err(CliError::Parse(_))));
    }
}
