//! File formats: CSV tables with a header row, and binary field snapshots.
//!
//! Snapshot layout: `n_interior: u32`, `count: u32`, then `count ×
//! n_interior` little-endian `f64` values, field by field.

use std::io::{BufRead, Read, Write};

use crate::analysis::ContractionReport;
use crate::control::{Control, FineTable};
use crate::grid::Field;
use crate::ldp::LdpReport;
use crate::stepper::Trajectory;
use crate::tci::{TciReport, UPPER_BOUND_CAVEAT};
use crate::{Error, Result, Scalar};

pub const LEDGER_HEADER: &str =
    "step,t,l2_before,l2_after,increment_l2,w1p_term,forcing_inner_product,newton_iters,newton_residual";

pub fn write_ledger_csv<T: Scalar, W: Write>(traj: &Trajectory<T>, mut w: W) -> Result<()> {
    writeln!(w, "{LEDGER_HEADER}")?;
    for (k, r) in traj.ledger.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            k + 1,
            traj.time(k + 1),
            r.l2_before,
            r.l2_after,
            r.increment_l2,
            r.w1p_term,
            r.forcing_inner_product,
            r.newton_iters,
            r.newton_residual
        )?;
    }
    Ok(())
}

pub fn write_control_csv<T: Scalar, W: Write>(h: &Control<T>, mut w: W) -> Result<()> {
    writeln!(w, "k,t_k,value")?;
    for (k, v) in h.values().iter().enumerate() {
        writeln!(w, "{},{},{}", k, h.tau() * T::from_usize(k).unwrap(), v)?;
    }
    Ok(())
}

/// Reads a two-column `t,value` table. A non-numeric first line is taken as a header.
pub fn read_fine_table<T: Scalar, R: BufRead>(r: R) -> Result<FineTable<T>> {
    let mut t = Vec::new();
    let mut v = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(Error::Parse(format!(
                "line {}: expected 2 columns, found {}",
                lineno + 1,
                cols.len()
            )));
        }
        match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                t.push(T::lit(a));
                v.push(T::lit(b));
            }
            _ if t.is_empty() && lineno == 0 => continue,
            _ => return Err(Error::Parse(format!("line {}: non-numeric entry `{line}`", lineno + 1))),
        }
    }
    FineTable::new(t, v)
}

pub fn write_contraction_csv<T: Scalar, W: Write>(rep: &ContractionReport<T>, mut w: W) -> Result<()> {
    writeln!(w, "k,t,l1_gap,envelope")?;
    for (k, ((t, g), e)) in rep.times.iter().zip(&rep.gap).zip(&rep.envelope).enumerate() {
        writeln!(w, "{k},{t},{g},{e}")?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Zero-hit rows leave `eps2_log_p` empty and carry the flag; `rate_bound` repeats on every row.
pub fn write_ldp_csv<T: Scalar, W: Write>(rep: &LdpReport<T>, mut w: W) -> Result<()> {
    writeln!(w, "epsilon,p_hat,wilson_low,wilson_high,eps2_log_p,rate_bound,flag")?;
    for r in &rep.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.epsilon,
            r.estimate.p_hat,
            r.estimate.wilson_low,
            r.estimate.wilson_high,
            opt(r.eps2_log_p),
            opt(rep.rate_bound),
            r.flag.unwrap_or("")
        )?;
    }
    Ok(())
}

/// Rows with zero entropy leave `ratio` empty.
pub fn write_tci_csv<W: Write>(rep: &TciReport, mut w: W) -> Result<()> {
    writeln!(
        w,
        "# n_cells={} n_steps={} M={} h_family={} C_emp={}; {}",
        rep.n_cells,
        rep.n_steps,
        rep.m,
        rep.h_family,
        opt(rep.c_emp),
        UPPER_BOUND_CAVEAT
    )?;
    writeln!(w, "g_id,scale,entropy,mean_sq_distance,ratio,stderr,n_samples")?;
    for r in &rep.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.g_id,
            r.scale,
            r.entropy,
            r.mean_sq_distance,
            opt(r.ratio),
            r.stderr,
            r.n_samples
        )?;
    }
    Ok(())
}

pub fn write_snapshots<T: Scalar, W: Write>(fields: &[Field<T>], mut w: W) -> Result<()> {
    let n = fields.first().map_or(0, Field::len);
    if let Some(bad) = fields.iter().find(|f| f.len() != n) {
        return Err(Error::SizeMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let as_u32 =
        |x: usize, what: &str| u32::try_from(x).map_err(|_| Error::Parse(format!("{what} {x} does not fit in u32")));
    w.write_all(&as_u32(n, "n_interior")?.to_le_bytes())?;
    w.write_all(&as_u32(fields.len(), "count")?.to_le_bytes())?;
    for f in fields {
        for &v in f.values() {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshots<R: Read>(mut r: R) -> Result<Vec<Field<f64>>> {
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let count = u32::from_le_bytes(word) as usize;
    let mut out = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        let mut vals = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            vals.push(f64::from_le_bytes(buf));
        }
        out.push(Field::new(vals)?);
    }
    Ok(out)
}
