//! Columnar text format for spectral problems.
//!
//! ```text
//! # spectral-problem out_of_range_norm=<f64> xdag_null_norm=<f64> label=<text>
//! <i> <sigma_i> <xdag_i> <ydata_i>
//! ```
//!
//! Values are written with 17 significant digits, so a round trip is
//! lossless. The dense basis of matrix problems is not stored; a problem read
//! back acts diagonally in its own singular coordinates.

use std::io::{BufRead, Write};

use super::SpectralProblem;
use crate::error::{Error, Result};

const MAGIC: &str = "# spectral-problem";

pub fn write_problem<W: Write>(p: &SpectralProblem, mut w: W) -> Result<()> {
    writeln!(
        w,
        "{MAGIC} out_of_range_norm={:.16e} xdag_null_norm={:.16e} label={}",
        p.out_of_range_norm(),
        p.xdag_null_norm(),
        p.label()
    )?;
    for i in 0..p.len() {
        writeln!(
            w,
            "{} {:.16e} {:.16e} {:.16e}",
            i + 1,
            p.singular_values()[i],
            p.xdag_coeffs()[i],
            p.ydata_coeffs()[i]
        )?;
    }
    Ok(())
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse().map_err(|_| Error::Parse(format!("line {line}: bad number {tok:?}")))
}

pub fn read_problem<R: BufRead>(r: R) -> Result<SpectralProblem> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty problem file".into()))?;
    let header = header?;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Parse("missing spectral-problem header".into()))?;
    let mut oor = None;
    let mut null = 0.0;
    let mut label = String::from("file");
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("out_of_range_norm", v)) => oor = Some(parse_f64(v, 1)?),
            Some(("xdag_null_norm", v)) => null = parse_f64(v, 1)?,
            Some(("label", v)) => label = v.to_string(),
            _ => return Err(Error::Parse(format!("unknown header field {field:?}"))),
        }
    }
    let oor = oor.ok_or_else(|| Error::Parse("header lacks out_of_range_norm".into()))?;

    let (mut sigma, mut xdag, mut ydata) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(Error::Parse(format!("line {}: expected 4 columns", k + 1)));
        }
        let idx: usize = toks[0].parse().map_err(|_| Error::Parse(format!("line {}: bad index", k + 1)))?;
        if idx != sigma.len() + 1 {
            return Err(Error::Parse(format!("line {}: indices must run 1, 2, ...", k + 1)));
        }
        sigma.push(parse_f64(toks[1], k + 1)?);
        xdag.push(parse_f64(toks[2], k + 1)?);
        ydata.push(parse_f64(toks[3], k + 1)?);
    }
    SpectralProblem::from_parts(label, sigma, xdag, ydata, oor, null, None)
}
