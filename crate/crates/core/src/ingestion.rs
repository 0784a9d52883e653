//! Schema declarations and parsing of delimiter-separated mixed-type tables.
//!
//! A [`SchemaSpec`] lists the predictive attributes in file column order,
//! followed by the target column, which is always the last field of a row.
//! Rows containing the missing-value token in any field are dropped and
//! counted in the [`ParseReport`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind of a predictive attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
    /// Unordered finite domain; tokens are matched exactly after trimming.
    Categorical {
        domain: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    #[serde(flatten)]
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, domain: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Categorical {
                domain: domain.into_iter().map(Into::into).collect(),
            },
        }
    }
}

/// Predicate deciding which raw target tokens belong to the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PositiveRule {
    /// Token parses as a number strictly greater than `threshold`.
    GreaterThan { threshold: f64 },
    /// Token is one of `tokens`; every other token is negative.
    OneOf { tokens: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub name: String,
    pub positive_rule: PositiveRule,
}

fn default_missing_token() -> String {
    "?".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaSpec {
    #[serde(default = "default_missing_token")]
    pub missing_token: String,
    pub attributes: Vec<Attribute>,
    pub target: TargetSpec,
}

impl SchemaSpec {
    pub fn new(attributes: Vec<Attribute>, target: TargetSpec) -> Result<Self> {
        let schema = Self {
            missing_token: default_missing_token(),
            attributes,
            target,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        for attr in &self.attributes {
            if !names.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute `{}`", attr.name)));
            }
            if let AttributeKind::Categorical { domain } = &attr.kind {
                if domain.is_empty() {
                    return Err(Error::Schema(format!(
                        "categorical attribute `{}` has an empty domain",
                        attr.name
                    )));
                }
                let mut seen = HashSet::new();
                for token in domain {
                    if !seen.insert(token.as_str()) {
                        return Err(Error::Schema(format!(
                            "categorical attribute `{}` repeats token `{}`",
                            attr.name, token
                        )));
                    }
                }
            }
        }
        if names.contains(self.target.name.as_str()) {
            return Err(Error::Schema(format!(
                "target `{}` is also listed as a predictive attribute",
                self.target.name
            )));
        }
        if let PositiveRule::OneOf { tokens } = &self.target.positive_rule {
            if tokens.is_empty() {
                return Err(Error::Schema("positive rule lists no tokens".into()));
            }
        }
        if self.missing_token.is_empty() {
            return Err(Error::Schema("missing token must be non-empty".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let schema: Self = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema serializes to TOML")
    }

    /// Number of fields expected on each data row (attributes plus target).
    pub fn field_count(&self) -> usize {
        self.attributes.len() + 1
    }
}

/// Binary class label: 0 is the negative class, 1 the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(u8);

impl Label {
    pub const NEGATIVE: Label = Label(0);
    pub const POSITIVE: Label = Label(1);

    pub fn new(value: u8) -> Result<Self> {
        match value {
            0 | 1 => Ok(Label(value)),
            _ => Err(Error::Contract(format!("label must be 0 or 1, got {value}"))),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 == 1
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Map a raw target token to a binary label.
pub fn binarize_target(token: &str, rule: &PositiveRule) -> Result<Label> {
    let token = token.trim();
    match rule {
        PositiveRule::GreaterThan { threshold } => {
            let value = parse_finite(token).ok_or_else(|| Error::Parse {
                line: 0,
                column: "target".into(),
                token: token.to_string(),
            })?;
            Ok(if value > *threshold {
                Label::POSITIVE
            } else {
                Label::NEGATIVE
            })
        }
        PositiveRule::OneOf { tokens } => Ok(if tokens.iter().any(|t| t == token) {
            Label::POSITIVE
        } else {
            Label::NEGATIVE
        }),
    }
}

fn parse_finite(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RawValue {
    Numeric(f64),
    /// Position of the token within the attribute's declared domain.
    Category(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub values: Vec<RawValue>,
    pub label: Label,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// Non-blank data lines seen (header excluded).
    pub total_rows: usize,
    pub retained_rows: usize,
    /// 1-based line numbers of rows dropped for containing the missing token.
    pub dropped_lines: Vec<usize>,
}

impl ParseReport {
    pub fn dropped_rows(&self) -> usize {
        self.dropped_lines.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub schema: SchemaSpec,
    pub rows: Vec<RawRecord>,
    pub report: ParseReport,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub delimiter: char,
    pub has_header: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            has_header: false,
        }
    }
}

/// Parse a delimiter-separated table against `schema`.
///
/// Blank lines are ignored. A row with the wrong number of fields is an
/// error even if it also contains the missing token.
pub fn parse_dataset(text: &str, schema: &SchemaSpec, options: ParseOptions) -> Result<RawDataset> {
    schema.validate()?;
    let expected = schema.field_count();
    let mut rows = Vec::new();
    let mut report = ParseReport::default();

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    if options.has_header {
        for (_, line) in lines.by_ref() {
            if !line.trim().is_empty() {
                break;
            }
        }
    }

    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        report.total_rows += 1;
        let fields: Vec<&str> = line.split(options.delimiter).map(str::trim).collect();
        if fields.len() != expected {
            return Err(Error::FieldCount {
                line: line_no,
                expected,
                found: fields.len(),
            });
        }
        if fields.iter().any(|f| *f == schema.missing_token) {
            report.dropped_lines.push(line_no);
            continue;
        }

        let mut values = Vec::with_capacity(schema.attributes.len());
        for (attr, token) in schema.attributes.iter().zip(&fields) {
            let value = match &attr.kind {
                AttributeKind::Numeric => RawValue::Numeric(parse_finite(token).ok_or_else(|| Error::Parse {
                    line: line_no,
                    column: attr.name.clone(),
                    token: token.to_string(),
                })?),
                AttributeKind::Categorical { domain } => {
                    RawValue::Category(domain.iter().position(|d| d == token).ok_or_else(|| {
                        Error::SchemaViolation {
                            line: line_no,
                            column: attr.name.clone(),
                            token: token.to_string(),
                        }
                    })?)
                }
            };
            values.push(value);
        }

        let label = binarize_target(fields[expected - 1], &schema.target.positive_rule).map_err(|_| Error::Parse {
            line: line_no,
            column: schema.target.name.clone(),
            token: fields[expected - 1].to_string(),
        })?;
        rows.push(RawRecord { values, label });
    }
    report.retained_rows = rows.len();

    Ok(RawDataset {
        schema: schema.clone(),
        rows,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_schema() -> SchemaSpec {
        SchemaSpec::new(
            vec![
                Attribute::numeric("x"),
                Attribute::categorical("color", ["r", "g", "b"]),
            ],
            TargetSpec {
                name: "y".into(),
                positive_rule: PositiveRule::GreaterThan { threshold: 0.0 },
            },
        )
        .unwrap()
    }

    #[test]
    fn drops_incomplete_rows_and_reports_them() {
        let text = "1.5,r,0\n2.0,?,3\n-1,b,1\n";
        let ds = parse_dataset(text, &toy_schema(), ParseOptions::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.report.total_rows, 3);
        assert_eq!(ds.report.dropped_lines, vec![2]);
        assert_eq!(ds.rows[0].values, vec![RawValue::Numeric(1.5), RawValue::Category(0)]);
        assert_eq!(ds.rows[1].values, vec![RawValue::Numeric(-1.0), RawValue::Category(2)]);
        assert_eq!(ds.rows[0].label, Label::NEGATIVE);
        assert_eq!(ds.rows[1].label, Label::POSITIVE);
    }

    #[test]
    fn empty_input_gives_empty_dataset() {
        let ds = parse_dataset("", &toy_schema(), ParseOptions::default()).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.report, ParseReport::default());
    }

    #[test]
    fn header_and_custom_delimiter() {
        let text = "x;color;y\n3;g;0\n";
        let opts = ParseOptions {
            delimiter: ';',
            has_header: true,
        };
        let ds = parse_dataset(text, &toy_schema(), opts).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.rows[0].values[1], RawValue::Category(1));
    }

    #[test]
    fn wrong_field_count_is_an_error() {
        let err = parse_dataset("1,r,0\n1,r\n", &toy_schema(), ParseOptions::default()).unwrap_err();
        assert_eq!(
            err,
            Error::FieldCount {
                line: 2,
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn unknown_category_is_a_schema_violation() {
        let err = parse_dataset("1,purple,0\n", &toy_schema(), ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SchemaViolation { line: 1, ref token, .. } if token == "purple"));
    }

    #[test]
    fn non_finite_numeric_is_a_parse_error() {
        for bad in ["inf", "NaN", "abc"] {
            let text = format!("{bad},r,0\n");
            let err = parse_dataset(&text, &toy_schema(), ParseOptions::default()).unwrap_err();
            assert!(matches!(err, Error::Parse { line: 1, .. }), "{bad}: {err:?}");
        }
    }

    #[test]
    fn cleveland_rule_binarizes_zero_to_four() {
        let rule = PositiveRule::GreaterThan { threshold: 0.0 };
        assert_eq!(binarize_target("0", &rule).unwrap(), Label::NEGATIVE);
        assert_eq!(binarize_target("1", &rule).unwrap(), Label::POSITIVE);
        assert_eq!(binarize_target("3", &rule).unwrap(), Label::POSITIVE);
        assert_eq!(binarize_target("4", &rule).unwrap(), Label::POSITIVE);
        assert!(binarize_target("sick", &rule).is_err());
    }

    #[test]
    fn one_of_rule() {
        let rule = PositiveRule::OneOf {
            tokens: vec!["yes".into()],
        };
        assert_eq!(binarize_target("yes", &rule).unwrap(), Label::POSITIVE);
        assert_eq!(binarize_target("no", &rule).unwrap(), Label::NEGATIVE);
    }

    #[test]
    fn schema_invariants_are_checked() {
        let target = TargetSpec {
            name: "y".into(),
            positive_rule: PositiveRule::GreaterThan { threshold: 0.0 },
        };
        assert!(SchemaSpec::new(vec![Attribute::numeric("a"), Attribute::numeric("a")], target.clone()).is_err());
        assert!(SchemaSpec::new(vec![Attribute::categorical("c", Vec::<String>::new())], target.clone()).is_err());
        assert!(SchemaSpec::new(vec![Attribute::categorical("c", ["u", "u"])], target.clone()).is_err());
        assert!(SchemaSpec::new(vec![Attribute::numeric("y")], target).is_err());
    }

    #[test]
    fn schema_toml_round_trips() {
        let schema = toy_schema();
        let text = schema.to_toml_string();
        assert_eq!(SchemaSpec::from_toml_str(&text).unwrap(), schema);
    }

    #[test]
    fn parsing_is_deterministic() {
        let text = "1.5,r,0\n2.0,g,3\n";
        let a = parse_dataset(text, &toy_schema(), ParseOptions::default()).unwrap();
        let b = parse_dataset(text, &toy_schema(), ParseOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
