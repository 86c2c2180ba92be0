// SPDX-License-Identifier: Apache-2.0
//! File formats: CSV matrices, TOML model files, DOT graphs.
//!
//! Node labels in files are 1-based.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use maxlin::{Array2, Dag, WeightedModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub alpha: f64,
    pub d: usize,
    pub noise_scales: Vec<f64>,
    #[serde(default, rename = "edge")]
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

impl ModelFile {
    pub fn from_model(m: &WeightedModel) -> Self {
        Self {
            alpha: m.alpha(),
            d: m.node_count(),
            noise_scales: m.noise_scales(),
            edges: m
                .weighted_edges()
                .map(|(k, i, w)| EdgeEntry {
                    from: k + 1,
                    to: i + 1,
                    weight: w,
                })
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<WeightedModel, String> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            for v in [e.from, e.to] {
                if v == 0 || v > self.d {
                    return Err(format!(
                        "edge {} -> {}: node {v} is not in 1..={}",
                        e.from, e.to, self.d
                    ));
                }
            }
            edges.push((e.from - 1, e.to - 1, e.weight));
        }
        let dag =
            Dag::new(self.d, edges.iter().map(|&(k, i, _)| (k, i))).map_err(|e| e.to_string())?;
        WeightedModel::new(dag, edges, self.noise_scales.clone(), self.alpha)
            .map_err(|e| e.to_string())
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn render(&self) -> String {
        toml::to_string(self).expect("model file serializes")
    }
}

pub fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn read_model(path: &Path) -> Result<WeightedModel, String> {
    let text = read_text(path)?;
    ModelFile::parse(&text)
        .and_then(|m| m.to_model())
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_number(field: &str) -> Option<f64> {
    match field.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => field.parse().ok(),
    }
}

/// Square matrix from CSV text. Blank lines and lines starting with `#`
/// are skipped; entries may be written as fractions `a/b`.
pub fn parse_matrix(text: &str) -> Result<Array2<f64>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, f)| {
                parse_number(f)
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("row {}, column {}: cannot parse {f:?}", r + 1, c + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let d = rows.len();
    if d == 0 {
        return Err("matrix is empty".into());
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != d) {
        return Err(format!(
            "matrix must be square: {d} rows but row {} has {} entries",
            r + 1,
            row.len()
        ));
    }
    Ok(Array2::from_shape_fn((d, d), |(r, c)| rows[r][c]))
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>, String> {
    parse_matrix(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

/// One row per line, shortest representation that reads back exactly.
pub fn render_matrix(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// 1-based comma-separated node list, e.g. `1,3,2`.
pub fn parse_nodes(s: &str, d: usize) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| {
            let v: usize = t
                .trim()
                .parse()
                .map_err(|_| format!("not a node label: {t:?}"))?;
            if v == 0 || v > d {
                return Err(format!("node {v} is not in 1..={d}"));
            }
            Ok(v - 1)
        })
        .collect()
}

pub fn render_nodes<'a>(nodes: impl IntoIterator<Item = &'a usize>) -> String {
    nodes
        .into_iter()
        .map(|v| (v + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// `x` with `digits` significant digits, trailing zeros removed.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let digits = digits.max(1);
    if exp < -4 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').expect("exponent format");
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{e}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// DOT text for `dag`, edges labelled by `label` when it returns a weight.
pub fn render_dot(dag: &Dag, label: impl Fn(usize, usize) -> Option<f64>) -> String {
    let mut out = String::from("digraph maxlin {\n");
    for v in 0..dag.node_count() {
        let _ = writeln!(out, "  {};", v + 1);
    }
    for (k, i) in dag.edges() {
        match label(k, i) {
            Some(w) => {
                let _ = writeln!(
                    out,
                    "  {} -> {} [label=\"{}\"];",
                    k + 1,
                    i + 1,
                    significant(w, 6)
                );
            }
            None => {
                let _ = writeln!(out, "  {} -> {};", k + 1, i + 1);
            }
        }
    }
    out.push_str("}\n");
    out
}
