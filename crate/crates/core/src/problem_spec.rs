//! Inline problem descriptions shared by the CLI and experiment configs.
//!
//! ```text
//! diag:s=2,mu=0.25,n=1000[,margin=0.1][,p=1.6][,alt=true]
//! heat:n=64[,solution=sawtooth|blocks]
//! radon:img=8,angles=12,rays=12
//! file:path/to/problem.txt
//! ```
//!
//! For `diag`, an explicit `p` overrides the value derived from `mu`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{
    make_diagonal_problem, make_heat_problem, make_radon_problem, mu_to_p, read_problem, HeatSolution,
    SpectralProblem,
};

pub const DEFAULT_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Diagonal { n: usize, s: f64, mu: f64, p: f64, alternate: bool },
    Heat { n: usize, solution: HeatSolution },
    Radon { img_n: usize, angles: usize, rays: usize },
    File(PathBuf),
}

impl ProblemSpec {
    pub fn build(&self) -> Result<SpectralProblem> {
        match self {
            Self::Diagonal { n, s, p, alternate, .. } => make_diagonal_problem(*n, *s, *p, *alternate),
            Self::Heat { n, solution } => make_heat_problem(*n, *solution),
            Self::Radon { img_n, angles, rays } => make_radon_problem(*img_n, *angles, *rays),
            Self::File(path) => read_problem(BufReader::new(File::open(path)?)),
        }
    }

    /// Smoothness index, known only for diagonal problems.
    pub fn mu(&self) -> Option<f64> {
        match self {
            Self::Diagonal { mu, .. } => Some(*mu),
            _ => None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("bad value {v:?} for {key}")))
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("problem spec {s:?} lacks a kind prefix")))?;
        if kind == "file" {
            if rest.is_empty() {
                return Err(Error::Parse("file: needs a path".into()));
            }
            return Ok(Self::File(PathBuf::from(rest)));
        }
        let mut kv = BTreeMap::new();
        for item in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("duplicate key {k:?}")));
            }
        }
        let mut take = |key: &str| kv.remove(key);
        let need = |v: Option<String>, key: &str| v.ok_or_else(|| Error::Parse(format!("{kind}: missing {key}")));
        let spec = match kind {
            "diag" => {
                let n = parse_num("n", &need(take("n"), "n")?)?;
                let sv: f64 = parse_num("s", &need(take("s"), "s")?)?;
                let mu: f64 = parse_num("mu", &need(take("mu"), "mu")?)?;
                let margin = take("margin").map(|v| parse_num("margin", &v)).transpose()?.unwrap_or(DEFAULT_MARGIN);
                let p = match take("p") {
                    Some(v) => parse_num("p", &v)?,
                    None => mu_to_p(sv, mu, margin),
                };
                let alternate = take("alt").map(|v| parse_num("alt", &v)).transpose()?.unwrap_or(true);
                Self::Diagonal { n, s: sv, mu, p, alternate }
            }
            "heat" => {
                let n = parse_num("n", &need(take("n"), "n")?)?;
                let solution = match take("solution").as_deref() {
                    None | Some("sawtooth") => HeatSolution::Sawtooth,
                    Some("blocks") => HeatSolution::Blocks,
                    Some(other) => return Err(Error::Parse(format!("unknown heat solution {other:?}"))),
                };
                Self::Heat { n, solution }
            }
            "radon" => Self::Radon {
                img_n: parse_num("img", &need(take("img"), "img")?)?,
                angles: parse_num("angles", &need(take("angles"), "angles")?)?,
                rays: parse_num("rays", &need(take("rays"), "rays")?)?,
            },
            other => return Err(Error::Parse(format!("unknown problem kind {other:?}"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(Error::Parse(format!("{kind}: unknown key {k:?}")));
        }
        Ok(spec)
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Diagonal { n, s, mu, p, alternate } => {
                write!(f, "diag:s={s},mu={mu},n={n},p={p},alt={alternate}")
            }
            Self::Heat { n, solution } => {
                let sol = match solution {
                    HeatSolution::Sawtooth => "sawtooth",
                    HeatSolution::Blocks => "blocks",
                };
                write!(f, "heat:n={n},solution={sol}")
            }
            Self::Radon { img_n, angles, rays } => write!(f, "radon:img={img_n},angles={angles},rays={rays}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}
