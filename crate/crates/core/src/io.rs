//! JSON readers for matrices, schedules, graphs and opinion assignments.
//!
//! Every reader checks the type invariants while parsing, so a rejected file
//! reports the line and column where the offending value ends.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::de::{self, DeserializeSeed, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};

use crate::chain::matrix::{ProbabilityVector, StochasticMatrix, PROBABILITY_TOL};
use crate::chain::schedule::ChainSchedule;
use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;

/// Label used in error messages for in-memory input.
pub const INLINE: &str = "<input>";

fn located(path: &str, e: serde_json::Error) -> Error {
    let message = e.to_string();
    // serde_json appends " at line L column C"; keep only the message
    let message = match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message,
    };
    Error::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })
}

fn parse_with<T: for<'de> Deserialize<'de>>(text: &str, path: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| located(path, e))
}

fn check_row(u: usize, row: &[f64]) -> std::result::Result<(), String> {
    let mut sum = 0.0;
    for (v, &x) in row.iter().enumerate() {
        if !x.is_finite() || x < 0.0 || x > 1.0 + PROBABILITY_TOL {
            return Err(format!("rows[{u}][{v}] = {x} is not a probability"));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > PROBABILITY_TOL {
        return Err(format!("rows[{u}] sums to {sum}, expected 1"));
    }
    Ok(())
}

/// Rows validated one at a time so errors point at the bad row.
fn stochastic_rows<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<f64>>, D::Error> {
    struct Rows;
    impl<'de> Visitor<'de> for Rows {
        type Value = Vec<Vec<f64>>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an array of stochastic rows")
        }

        fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
            let mut rows = Vec::new();
            while let Some(row) = seq.next_element::<Vec<f64>>()? {
                check_row(rows.len(), &row).map_err(de::Error::custom)?;
                rows.push(row);
            }
            Ok(rows)
        }
    }
    d.deserialize_seq(Rows)
}

/// `{"n": int, "rows": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawMatrix")]
pub struct MatrixFile {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    n: usize,
    #[serde(deserialize_with = "stochastic_rows")]
    rows: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for MatrixFile {
    type Error = String;

    fn try_from(raw: RawMatrix) -> std::result::Result<Self, String> {
        if raw.n == 0 {
            return Err("n must be positive".into());
        }
        if raw.rows.len() != raw.n {
            return Err(format!("n = {} but {} rows given", raw.n, raw.rows.len()));
        }
        if let Some((u, r)) = raw.rows.iter().enumerate().find(|(_, r)| r.len() != raw.n) {
            return Err(format!("rows[{u}] has {} entries, expected {}", r.len(), raw.n));
        }
        Ok(MatrixFile {
            n: raw.n,
            rows: raw.rows,
        })
    }
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<StochasticMatrix> {
        StochasticMatrix::from_rows(&self.rows)
    }

    pub fn from_matrix(p: &StochasticMatrix) -> Self {
        MatrixFile {
            n: p.n(),
            rows: p.rows(),
        }
    }
}

pub fn parse_matrix(text: &str, path: &str) -> Result<StochasticMatrix> {
    parse_with::<MatrixFile>(text, path)?.to_matrix()
}

pub fn read_matrix(path: &Path) -> Result<StochasticMatrix> {
    parse_matrix(&read(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleFileKind {
    Static,
    Cyclic,
    Generated,
}

/// `{"kind", "matrices", "period", "seed"}`, plus `horizon` for generated
/// schedules and an optional common `stationary` distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawSchedule")]
pub struct ScheduleFile {
    pub kind: ScheduleFileKind,
    pub matrices: Vec<MatrixFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationary: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    kind: ScheduleFileKind,
    matrices: Vec<MatrixFile>,
    period: Option<usize>,
    seed: Option<u64>,
    horizon: Option<usize>,
    stationary: Option<Vec<f64>>,
}

impl TryFrom<RawSchedule> for ScheduleFile {
    type Error = String;

    fn try_from(r: RawSchedule) -> std::result::Result<Self, String> {
        let Some(first) = r.matrices.first() else {
            return Err("matrices must not be empty".into());
        };
        let n = first.n;
        if let Some((i, m)) = r.matrices.iter().enumerate().find(|(_, m)| m.n != n) {
            return Err(format!("matrices[{i}] has n = {}, expected {n}", m.n));
        }
        let k = r.matrices.len();
        match r.kind {
            ScheduleFileKind::Static => {
                if k != 1 {
                    return Err(format!("a static schedule takes exactly one matrix, got {k}"));
                }
                if r.period.is_some_and(|p| p != 1) {
                    return Err("a static schedule has period 1".into());
                }
            }
            ScheduleFileKind::Cyclic => {
                if r.period.is_some_and(|p| p != k) {
                    return Err(format!("period {} does not match {k} matrices", r.period.unwrap_or(0)));
                }
            }
            ScheduleFileKind::Generated => {
                if r.seed.is_none() {
                    return Err("a generated schedule needs a seed".into());
                }
                if r.horizon.is_none_or(|h| h == 0) {
                    return Err("a generated schedule needs horizon >= 1".into());
                }
                if r.period.is_some() {
                    return Err("a generated schedule has no period".into());
                }
            }
        }
        if r.kind != ScheduleFileKind::Generated && r.horizon.is_some() {
            return Err("horizon applies only to generated schedules".into());
        }
        if let Some(pi) = &r.stationary {
            if pi.len() != n {
                return Err(format!("stationary has {} entries, expected {n}", pi.len()));
            }
            ProbabilityVector::positive(pi.clone()).map_err(|e| e.to_string())?;
        }
        Ok(ScheduleFile {
            kind: r.kind,
            matrices: r.matrices,
            period: r.period,
            seed: r.seed,
            horizon: r.horizon,
            stationary: r.stationary,
        })
    }
}

impl ScheduleFile {
    pub fn to_schedule(&self) -> Result<ChainSchedule> {
        let mats = self
            .matrices
            .iter()
            .map(MatrixFile::to_matrix)
            .collect::<Result<Vec<_>>>()?;
        let s = match self.kind {
            ScheduleFileKind::Static => ChainSchedule::fixed(mats.into_iter().next().expect("one matrix")),
            ScheduleFileKind::Cyclic => ChainSchedule::cyclic(mats)?,
            ScheduleFileKind::Generated => ChainSchedule::generated(
                mats,
                self.horizon.unwrap_or_default(),
                self.seed.unwrap_or_default(),
            )?,
        };
        match &self.stationary {
            Some(pi) => s.with_stationary(ProbabilityVector::positive(pi.clone())?),
            None => Ok(s),
        }
    }
}

pub fn parse_schedule(text: &str, path: &str) -> Result<ChainSchedule> {
    parse_with::<ScheduleFile>(text, path)?.to_schedule()
}

pub fn read_schedule(path: &Path) -> Result<ChainSchedule> {
    parse_schedule(&read(path)?, &path.display().to_string())
}

/// `{"n": int, "edges": [[u, v], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn from_graph(g: &GraphSnapshot) -> Self {
        GraphFile {
            n: g.n(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

/// Edges checked against `n` while they are read.
struct GraphSeed;

impl<'de> DeserializeSeed<'de> for GraphSeed {
    type Value = GraphSnapshot;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<GraphSnapshot, D::Error> {
        d.deserialize_map(GraphVisitor)
    }
}

struct GraphVisitor;

impl<'de> Visitor<'de> for GraphVisitor {
    type Value = GraphSnapshot;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a graph object {\"n\", \"edges\"}")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<GraphSnapshot, A::Error> {
        let mut n: Option<usize> = None;
        let mut edges: Option<Vec<[usize; 2]>> = None;
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "n" if n.is_none() => n = Some(map.next_value()?),
                "edges" if edges.is_none() => edges = Some(map.next_value()?),
                "n" | "edges" => return Err(de::Error::custom(format!("duplicate field `{key}`"))),
                other => return Err(de::Error::unknown_field(other, &["n", "edges"])),
            }
        }
        let n = n.ok_or_else(|| de::Error::missing_field("n"))?;
        let edges = edges.ok_or_else(|| de::Error::missing_field("edges"))?;
        let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
        GraphSnapshot::new(n, &pairs).map_err(de::Error::custom)
    }
}

pub fn parse_graph(text: &str, path: &str) -> Result<GraphSnapshot> {
    let mut de = serde_json::Deserializer::from_str(text);
    let g = GraphSeed.deserialize(&mut de).map_err(|e| located(path, e))?;
    de.end().map_err(|e| located(path, e))?;
    Ok(g)
}

pub fn read_graph(path: &Path) -> Result<GraphSnapshot> {
    parse_graph(&read(path)?, &path.display().to_string())
}

/// A JSON object mapping every vertex `"0".."n-1"` to an integer opinion.
pub fn parse_opinions(text: &str, path: &str, n: usize) -> Result<Vec<u32>> {
    let map: BTreeMap<String, u32> = parse_with(text, path)?;
    let mut out = vec![None; n];
    for (k, v) in &map {
        let u: usize = k.parse().map_err(|_| Error::Parse {
            path: path.to_string(),
            line: 1,
            column: 1,
            message: format!("opinion key `{k}` is not a vertex index"),
        })?;
        if u >= n {
            return Err(Error::VertexOutOfRange { vertex: u, n });
        }
        if k != &u.to_string() {
            return Err(Error::param(format!("opinion key `{k}` is not in canonical form")));
        }
        out[u] = Some(*v);
    }
    out.iter()
        .enumerate()
        .map(|(u, o)| o.ok_or_else(|| Error::param(format!("vertex {u} has no opinion"))))
        .collect()
}

pub fn read_opinions(path: &Path, n: usize) -> Result<Vec<u32>> {
    parse_opinions(&read(path)?, &path.display().to_string(), n)
}
