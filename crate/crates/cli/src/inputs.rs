//! Parsers for the file formats and flag values the driver accepts.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigUint;
use snr_core::immunity::{Numbering, ProgramNumbering, SetPredicate, TableNumbering};
use snr_core::{encode_program, FunctionOracle, OrderFunction, Program, ProgramIndex};

use crate::CliError;

pub fn order(spec: &str) -> Result<OrderFunction, CliError> {
    OrderFunction::from_str(spec).map_err(|e| CliError::usage(format!("bad order function `{spec}`: {e}")))
}

pub fn predicate(spec: &str) -> Result<SetPredicate, CliError> {
    SetPredicate::from_str(spec).map_err(|e| CliError::usage(format!("bad set predicate `{spec}`: {e}")))
}

/// A total function given by an order-function spec, as an oracle.
pub fn function(spec: &str) -> Result<FunctionOracle, CliError> {
    let h = order(spec)?;
    h.at(0).map_err(|e| CliError::usage(format!("`{spec}` is undefined at 0: {e}")))?;
    Ok(FunctionOracle::from_fn(spec.to_string(), move |x| h.value(x).unwrap_or_default()))
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

/// A program named by a decimal index or a `.urm` file path, relative to
/// `base` when given.
pub fn program_ref(text: &str, base: Option<&Path>) -> Result<ProgramIndex, CliError> {
    if let Ok(n) = BigUint::from_str(text) {
        return Ok(ProgramIndex(n));
    }
    let path = match base {
        Some(dir) => dir.join(text),
        None => PathBuf::from(text),
    };
    let source = read(&path)?;
    let program =
        Program::parse(&source).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(encode_program(&program))
}

pub fn naturals(list: &str) -> Result<Vec<BigUint>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| BigUint::from_str(t).map_err(|_| CliError::usage(format!("`{t}` is not a natural number"))))
        .collect()
}

/// A numbering spec file:
///
/// ```text
/// kind: table
/// ---
/// 0,1,2
/// 5
///
/// ```
///
/// Table entries follow `---`, one comma-separated set per line; an empty
/// line is the empty set. The `program` kind takes `member`, `card`,
/// `budget` and `x_cap` header keys instead, programs given by index or
/// `.urm` path.
pub fn numbering(path: &Path) -> Result<Box<dyn Numbering>, CliError> {
    let text = read(path)?;
    let base = path.parent();
    let err = |line: usize, msg: String| CliError::usage(format!("{}:{line}: {msg}", path.display()));
    let mut header: Vec<(String, String, usize)> = Vec::new();
    let mut lines = text.lines().enumerate();
    let mut body_start = None;
    for (i, raw) in lines.by_ref() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line == "---" {
            body_start = Some(i + 1);
            break;
        }
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| err(i + 1, format!("expected `key: value`, found `{line}`")))?;
        header.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    let get = |key: &str| header.iter().find(|(k, _, _)| k == key);
    let (_, kind, kind_line) = get("kind").ok_or_else(|| err(1, "missing `kind` header".into()))?;
    match kind.as_str() {
        "table" => {
            let Some(start) = body_start else {
                return Err(err(*kind_line, "table numbering needs `---` before its entries".into()));
            };
            let mut entries: Vec<BTreeSet<u64>> = Vec::new();
            let body: Vec<&str> = text.lines().skip(start).collect();
            // a trailing newline does not add an empty entry
            for (j, raw) in body.iter().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                let set = line
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<u64>().map_err(|_| err(start + j + 1, format!("`{t}` is not a natural number"))))
                    .collect::<Result<_, _>>()?;
                entries.push(set);
            }
            Ok(Box::new(TableNumbering { entries }))
        }
        "program" => {
            let field = |key: &str| -> Result<&String, CliError> {
                get(key).map(|(_, v, _)| v).ok_or_else(|| err(*kind_line, format!("program numbering needs `{key}`")))
            };
            let number = |key: &str| -> Result<u64, CliError> {
                let v = field(key)?;
                v.parse().map_err(|_| err(*kind_line, format!("`{key}: {v}` is not a natural number")))
            };
            Ok(Box::new(ProgramNumbering {
                member: program_ref(field("member")?, base)?,
                card: program_ref(field("card")?, base)?,
                budget: number("budget")?,
                x_cap: number("x_cap")?,
            }))
        }
        other => Err(err(*kind_line, format!("unknown numbering kind `{other}`"))),
    }
}

/// A family file: one `<role> <path.urm>` per line, `#` comments; paths
/// are relative to the file.
pub fn family(path: &Path) -> Result<Vec<(String, ProgramIndex)>, CliError> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (role, file) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| CliError::usage(format!("{}:{}: expected `<role> <path>`", path.display(), i + 1)))?;
        out.push((role.to_string(), program_ref(file.trim(), path.parent())?));
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("{}: the family is empty", path.display())));
    }
    Ok(out)
}
