//! Rectangular sampling grids and their CSV form.
//!
//! Values are printed as decimals with 12 significant digits; `--exact`
//! adds the `p/q` value as a last column. Non-regular grid points are
//! skipped and counted in a trailing `# skipped: N` line.

use boxcalc::exact::{fmt_rat, parse_rat, Rat, RatVec};
use num::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

/// Canonical decimal text with at most 12 significant digits.
pub fn fmt_decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i64 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1;
    let mut body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    if body.contains('.') {
        body = body.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if x < 0.0 {
        format!("-{body}")
    } else {
        body
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub point: Vec<f64>,
    pub value: f64,
    pub exact: Option<Rat>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridTable {
    pub dim: usize,
    pub exact: bool,
    pub rows: Vec<GridRow>,
    pub skipped: usize,
}

impl GridTable {
    pub fn to_csv(&self) -> String {
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("v{i}")).collect();
        header.push("value".into());
        if self.exact {
            header.push("exact".into());
        }
        let mut out = header.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut cells: Vec<String> = row.point.iter().map(|x| fmt_decimal(*x)).collect();
            cells.push(fmt_decimal(row.value));
            if self.exact {
                cells.push(row.exact.as_ref().map(fmt_rat).unwrap_or_default());
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out.push_str(&format!("# skipped: {}\n", self.skipped));
        out
    }

    pub fn parse_csv(text: &str) -> Result<GridTable, String> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or("empty CSV")?.split(',').collect();
        let exact = header.last() == Some(&"exact");
        let dim = header.len() - 1 - usize::from(exact);
        let mut rows = Vec::new();
        let mut skipped = 0;
        for (no, line) in lines.enumerate() {
            if let Some(rest) = line.strip_prefix("# skipped:") {
                skipped = rest.trim().parse().map_err(|e| format!("footer: {e}"))?;
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(format!("line {}: expected {} cells", no + 2, header.len()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", no + 2));
            let point = cells[..dim].iter().map(|s| num(s)).collect::<Result<Vec<_>, _>>()?;
            let value = num(cells[dim])?;
            let exact_value = if exact {
                Some(parse_rat(cells[dim + 1]).map_err(|e| format!("line {}: {e}", no + 2))?)
            } else {
                None
            };
            rows.push(GridRow {
                point,
                value,
                exact: exact_value,
            });
        }
        Ok(GridTable {
            dim,
            exact,
            rows,
            skipped,
        })
    }
}

/// Points lo + k·step per coordinate, not exceeding hi; the last
/// coordinate varies fastest.
pub fn grid_points(lo: &[Rat], hi: &[Rat], step: &Rat) -> Result<Vec<RatVec>, String> {
    if !step.is_positive() {
        return Err("step must be positive".into());
    }
    if lo.len() != hi.len() {
        return Err("--lo and --hi have different lengths".into());
    }
    let axes: Vec<Vec<Rat>> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| {
            let mut axis = Vec::new();
            let mut x = a.clone();
            while &x <= b {
                axis.push(x.clone());
                x += step;
            }
            axis
        })
        .collect();
    let mut points: Vec<RatVec> = vec![Vec::new()];
    for axis in &axes {
        points = points
            .iter()
            .flat_map(|p| {
                axis.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x.clone());
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Evaluates at every regular point in parallel, keeping point order.
pub fn evaluate<F, R>(points: &[RatVec], is_regular: R, f: F, exact: bool) -> Result<GridTable, String>
where
    F: Fn(&[Rat]) -> boxcalc::Result<Rat> + Sync,
    R: Fn(&[Rat]) -> bool + Sync,
{
    let dim = points.first().map_or(0, |p| p.len());
    let values: Vec<Option<Rat>> = points
        .par_iter()
        .map(|v| if is_regular(v) { f(v).map(Some) } else { Ok(None) })
        .collect::<boxcalc::Result<_>>()
        .map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (v, value) in points.iter().zip(values) {
        match value {
            None => skipped += 1,
            Some(r) => rows.push(GridRow {
                point: v.iter().map(to_f64).collect(),
                value: to_f64(&r),
                exact: Some(r),
            }),
        }
    }
    Ok(GridTable {
        dim,
        exact,
        rows,
        skipped,
    })
}

fn to_f64(r: &Rat) -> f64 {
    if r.is_zero() {
        0.0
    } else {
        r.to_f64().unwrap_or(f64::NAN)
    }
}
