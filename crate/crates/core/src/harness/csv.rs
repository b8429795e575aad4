//! Fixed-schema CSV traces with 17 significant digits per value.

use std::fmt::Write as _;
use std::io::Write;

use super::TraceRow;
use crate::error::Result;

pub fn header(n_x: usize, n_z: usize, n_y: usize) -> String {
    let mut cols = vec!["k".to_string()];
    let mut push = |prefix: &str, n: usize| cols.extend((1..=n).map(|i| format!("{prefix}{i}")));
    push("x", n_x);
    push("x_lo", n_x);
    push("x_hi", n_x);
    push("z", n_z);
    push("z_lo", n_z);
    push("z_hi", n_z);
    push("y", n_y);
    push("w", n_y);
    cols.extend(["resid_hi", "resid_lo", "width_x", "width_z"].map(String::from));
    cols.join(",")
}

fn num(out: &mut String, v: f64) {
    let _ = write!(out, ",{v:.16e}");
}

pub fn format_row(row: &TraceRow) -> String {
    let mut s = row.k.to_string();
    for v in [
        &row.x, &row.x_lo, &row.x_hi, &row.z, &row.z_lo, &row.z_hi, &row.y, &row.w,
    ] {
        v.iter().for_each(|&c| num(&mut s, c));
    }
    for v in [row.resid_hi, row.resid_lo, row.width_x, row.width_z] {
        num(&mut s, v);
    }
    s
}

pub fn write_trace<W: Write>(mut out: W, rows: &[TraceRow]) -> Result<()> {
    let Some(first) = rows.first() else {
        return Ok(());
    };
    writeln!(
        out,
        "{}",
        header(first.x.len(), first.z.len(), first.y.len())
    )?;
    for row in rows {
        writeln!(out, "{}", format_row(row))?;
    }
    out.flush()?;
    Ok(())
}
