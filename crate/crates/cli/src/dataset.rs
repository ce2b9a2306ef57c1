use std::path::Path;

use clap::ValueEnum;
use subset_evidence::{Dataset64, Datum64};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// `.json` files are JSON; anything else is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

/// A scalar as written in the file, before the dataset kind is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Flag(bool),
    Label(u32),
    Number(f64),
}

impl Token {
    fn parse(field: &str) -> Option<Token> {
        match field {
            "true" => return Some(Token::Flag(true)),
            "false" => return Some(Token::Flag(false)),
            _ => {}
        }
        if let Ok(label) = field.parse::<u32>() {
            return Some(Token::Label(label));
        }
        field.parse::<f64>().ok().map(Token::Number)
    }

    fn into_datum(self, reals: bool) -> Datum64 {
        match self {
            Token::Flag(b) => Datum64::Binary(b),
            Token::Label(l) if reals => Datum64::Real(f64::from(l)),
            Token::Label(l) => Datum64::Categorical(l),
            Token::Number(x) => Datum64::Real(x),
        }
    }
}

/// Reads a one-column dataset.
///
/// Non-negative integers become category labels unless `reals` is set or
/// some value is fractional, in which case every numeric value is real.
pub fn load(
    path: &Path,
    format: Option<DataFormat>,
    header: bool,
    reals: bool,
) -> Result<Dataset64, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let tokens = match format.unwrap_or_else(|| DataFormat::from_path(path)) {
        DataFormat::Csv => csv_tokens(path, &text, header)?,
        DataFormat::Json => json_tokens(path, &text)?,
    };
    let reals = reals || tokens.iter().any(|t| matches!(t, Token::Number(_)));
    let data = tokens.into_iter().map(|t| t.into_datum(reals)).collect();
    Dataset64::new(data).map_err(|e| CliError::Dataset {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn csv_tokens(path: &Path, text: &str, header: bool) -> Result<Vec<Token>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut tokens = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let fail = |message: String| CliError::Parse {
            path: path.to_owned(),
            line,
            message,
        };
        if record.len() != 1 {
            return Err(fail(format!("expected 1 field, found {}", record.len())));
        }
        let field = &record[0];
        let token =
            Token::parse(field).ok_or_else(|| fail(format!("`{field}` is not a number")))?;
        tokens.push(token);
    }
    Ok(tokens)
}

fn json_tokens(path: &Path, text: &str) -> Result<Vec<Token>, CliError> {
    let values: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_owned(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let token = match v {
                serde_json::Value::Bool(b) => Some(Token::Flag(*b)),
                serde_json::Value::Number(n) => match n.as_u64() {
                    Some(l) => u32::try_from(l).ok().map(Token::Label),
                    None => n.as_f64().map(Token::Number),
                },
                _ => None,
            };
            token.ok_or_else(|| CliError::Config {
                path: path.to_owned(),
                message: format!("element {i} is not a scalar datum: {v}"),
            })
        })
        .collect()
}
