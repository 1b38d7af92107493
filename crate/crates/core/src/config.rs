//! JSON input files and fixed-format table output.
//!
//! Scenario file:
//!
//! ```json
//! {"u": 4, "users": [{"v": 1}, {"pmf": [0.5, 0.0, 0.0, 0.0, 0.5]}],
//!  "gains": [[1.0, 0.3], [0.4, 1.0]], "P": 100.0, "sigma2": 1.0}
//! ```
//!
//! `gains[k][i]` is the amplitude gain from transmitter `k` to receiver `i`;
//! `pmf[v]` is the probability of occupying `v` sub-bands.
//!
//! User-count file: `{"q": [q0, q1, ...]}` or `{"poisson": lambda}`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::UserCountPmf;
use crate::model::{HoppingProfile, NetworkScenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum UserSpec {
    Fixed { v: usize },
    Pmf { pmf: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub u: usize,
    pub users: Vec<UserSpec>,
    pub gains: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    pub p: f64,
    pub sigma2: f64,
}

impl ScenarioFile {
    pub fn from_model(scenario: &NetworkScenario, profiles: &[HoppingProfile]) -> Self {
        Self {
            u: scenario.n_subbands(),
            users: profiles
                .iter()
                .map(|p| match p {
                    HoppingProfile::Fixed(v) => UserSpec::Fixed { v: *v },
                    HoppingProfile::Pmf(mu) => UserSpec::Pmf { pmf: mu.clone() },
                })
                .collect(),
            gains: scenario.gain_rows(),
            p: scenario.total_power(),
            sigma2: scenario.noise_power(),
        }
    }

    pub fn to_model(&self) -> Result<(NetworkScenario, Vec<HoppingProfile>)> {
        let scenario = NetworkScenario::new(self.u, self.gains.clone(), self.p, self.sigma2)?;
        let profiles: Vec<HoppingProfile> = self
            .users
            .iter()
            .map(|s| match s {
                UserSpec::Fixed { v } => HoppingProfile::Fixed(*v),
                UserSpec::Pmf { pmf } => HoppingProfile::Pmf(pmf.clone()),
            })
            .collect();
        scenario.check_profiles(&profiles)?;
        Ok((scenario, profiles))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

pub fn load_scenario(path: &Path) -> Result<(NetworkScenario, Vec<HoppingProfile>)> {
    ScenarioFile::parse(&fs::read_to_string(path)?)?.to_model()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PmfFile {
    Finite { q: Vec<f64> },
    Poisson { poisson: f64 },
}

impl PmfFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_model(&self) -> Result<UserCountPmf> {
        match self {
            PmfFile::Finite { q } => UserCountPmf::finite(q.clone()),
            PmfFile::Poisson { poisson } => UserCountPmf::poisson(*poisson),
        }
    }
}

pub fn load_pmf(path: &Path) -> Result<UserCountPmf> {
    PmfFile::parse(&fs::read_to_string(path)?)?.to_model()
}

/// `printf("%.12g")`-style formatting.
pub fn fmt_num(x: f64) -> String {
    const SIG: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (SIG - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into),
            Cell::Int(n) => (*n).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Bool(b) => (*b).into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// Column-ordered table rendered as CSV or as a JSON array of objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                serde_json::Value::Object(obj)
            })
            .collect()
    }
}
