//! Machine-readable artifacts. Reals are written with 17 significant digits
//! in `.`-decimal scientific notation so every value round-trips exactly.
//! Node indices and coefficient indices are 1-based in all files.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Number, Value};

use crate::basis::LpBasis;
use crate::diagnostics::{Correlogram, TestResult};
use crate::error::{Error, Result};
use crate::field::{Grid, Selection};
use crate::graph::Graph;
use crate::graphon::GraphonEstimate;
use crate::transform::LpMatrix;

/// `{:.16e}` for finite values; `nan`, `inf`, `-inf` otherwise.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// JSON number carrying exactly the text of [`fmt_real`]; `null` when not
/// finite.
pub fn json_real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&fmt_real(x)).expect("formatted real is a JSON number"))
}

fn json_reals(xs: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(xs.into_iter().map(json_real).collect())
}

pub fn graph_json(g: &Graph) -> Value {
    let labels: Vec<String> = (0..g.n()).map(|x| g.label(x)).collect();
    json!({
        "n": g.n(),
        "directed": g.is_directed(),
        "total_weight": json_real(g.total_weight()),
        "labels": labels,
    })
}

pub fn basis_json(b: &LpBasis) -> Value {
    let support: Vec<usize> = b.marginal().support().iter().map(|x| x + 1).collect();
    json!({
        "m": b.m(),
        "support": support,
        "values": json_reals(b.values().iter().copied()),
        "breakpoints": json_reals(b.breakpoints()),
    })
}

pub fn coefficients_csv(lp: &LpMatrix) -> String {
    let mut out = String::from("j,k,lp\n");
    for (j, k, v) in lp.entries() {
        let _ = writeln!(out, "{j},{k},{}", fmt_real(v));
    }
    out
}

pub fn coefficients_json(lp: &LpMatrix) -> Value {
    json!({
        "total_weight": json_real(lp.total_weight),
        "mx": lp.mx(),
        "my": lp.my(),
        "coefficients": json_reals(lp.coeffs.iter().copied()),
        "basis_x": basis_json(&lp.basis_x),
        "basis_y": basis_json(&lp.basis_y),
    })
}

pub fn selection_json(sel: &Selection) -> Value {
    let chosen: Vec<[usize; 2]> = sel.chosen.iter().map(|&(j, k)| [j, k]).collect();
    json!({
        "k_star": sel.k_star,
        "chosen": chosen,
        "criterion_trace": json_reals(sel.criterion_trace.iter().copied()),
    })
}

pub fn grid_csv(grid: &Grid) -> String {
    let mut out = String::from("u,v,value\n");
    for ((i, j), &v) in grid.values.indexed_iter() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_real(grid.coord(i)),
            fmt_real(grid.coord(j)),
            fmt_real(v)
        );
    }
    out
}

pub fn grid_json(grid: &Grid) -> Value {
    let rows: Vec<Value> = grid
        .values
        .rows()
        .into_iter()
        .map(|r| json_reals(r.iter().copied()))
        .collect();
    json!({
        "resolution": grid.resolution,
        "clip": grid.clip,
        "values": rows,
    })
}

pub fn correlogram_csv(c: &Correlogram) -> String {
    let mut out = String::from("j,k,lp,standardized,outside_band\n");
    for e in &c.entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.j,
            e.k,
            fmt_real(e.lp),
            fmt_real(e.standardized),
            e.outside_band
        );
    }
    out
}

pub fn test_json(t: &TestResult) -> Value {
    json!({
        "statistic": json_real(t.statistic),
        "df": t.df,
        "p_value": json_real(t.p_value),
        "reject_at_5pct": t.reject_at_5pct,
        "post_selection": t.post_selection,
    })
}

pub fn graphon_json(w: &GraphonEstimate, grid: &Grid) -> Value {
    let mut v = grid_json(grid);
    let obj = v.as_object_mut().expect("grid json is an object");
    obj.insert(
        "scale_convention".into(),
        json!({ "kind": w.scale_convention.as_str(), "scale": json_real(w.scale) }),
    );
    obj.insert("marginal_mode".into(), json!(w.marginal_mode.as_str()));
    obj.insert("selection_mode".into(), json!(w.selection_mode.as_str()));
    obj.insert("k_star".into(), json!(w.selection.k_star));
    obj.insert("clipped_cells".into(), json!(w.clipped_cells));
    obj.insert("over_one_cells".into(), json!(w.over_one_cells));
    v
}

pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("bad real '{tok}'"),
    })
}

fn check_header(text: &str, header: &str) -> Result<()> {
    match text.lines().next() {
        Some(h) if h.trim() == header => Ok(()),
        other => Err(Error::Parse {
            line: 1,
            message: format!("expected header '{header}', found {other:?}"),
        }),
    }
}

/// Reads a `u,v,value` grid back as row-major triples.
pub fn read_grid_csv(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    check_header(text, "u,v,value")?;
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| {
            let t: Vec<&str> = l.split(',').collect();
            if t.len() != 3 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "expected 3 fields".into(),
                });
            }
            Ok((
                parse_real(t[0], i + 1)?,
                parse_real(t[1], i + 1)?,
                parse_real(t[2], i + 1)?,
            ))
        })
        .collect()
}

/// Reads a `j,k,lp` coefficient table.
pub fn read_coefficients_csv(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    check_header(text, "j,k,lp")?;
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| {
            let t: Vec<&str> = l.split(',').collect();
            let bad = || Error::Parse {
                line: i + 1,
                message: format!("bad row '{l}'"),
            };
            if t.len() != 3 {
                return Err(bad());
            }
            Ok((
                t[0].parse().map_err(|_| bad())?,
                t[1].parse().map_err(|_| bad())?,
                parse_real(t[2], i + 1)?,
            ))
        })
        .collect()
}
