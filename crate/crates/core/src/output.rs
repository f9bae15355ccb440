//! CSV and JSON emission. Floats carry 17 significant digits.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::measure::Piece;
use crate::solution::SolutionSample;
use crate::verify::CheckResult;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_samples<W: Write>(mut w: W, rows: &[SolutionSample]) -> Result<()> {
    writeln!(w, "x,t,m,q,u,u_left,u_right,regime")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt(r.x),
            fmt(r.t),
            fmt(r.m),
            fmt(r.q),
            fmt(r.u),
            fmt(r.u_left),
            fmt(r.u_right),
            r.regime.as_str()
        )?;
    }
    Ok(())
}

/// One row per piece; atoms have `lo == hi` and no density.
pub fn write_pieces<W: Write>(mut w: W, t: f64, pieces: &[Piece]) -> Result<()> {
    writeln!(w, "t,kind,lo,hi,mass,density,velocity")?;
    for p in pieces {
        let (kind, density) = match *p {
            Piece::Atom { .. } => ("atom", String::new()),
            Piece::Block { density, .. } => ("block", fmt(density)),
        };
        writeln!(
            w,
            "{},{kind},{},{},{},{density},{}",
            fmt(t),
            fmt(p.start()),
            fmt(p.end()),
            fmt(p.mass()),
            fmt(p.velocity())
        )?;
    }
    Ok(())
}

/// File-name fragment for a time value, e.g. `0.5` or `2`.
pub fn time_tag(t: f64) -> String {
    format!("{t}")
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn new(checks: Vec<CheckResult>) -> Self {
        VerifyReport {
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solution::Regime;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn sample_rows() {
        let row = SolutionSample {
            x: 0.0,
            t: 1.0,
            m: 0.5,
            q: 0.0,
            u: 0.0,
            u_left: 0.0,
            u_right: 0.0,
            regime: Regime::Cluster,
        };
        let mut buf = Vec::new();
        write_samples(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with(",cluster\n"));
    }

    #[test]
    fn piece_rows() {
        let mut buf = Vec::new();
        write_pieces(&mut buf, 1.0, &[Piece::atom(0.0, 1.0, 0.0), Piece::block(1.0, 2.0, 3.0, 0.5)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert!(lines[1].contains(",atom,") && lines[1].contains(",,"));
        assert!(lines[2].contains(",block,"));
    }

    #[test]
    fn report_pass_flag() {
        let r = VerifyReport::new(vec![CheckResult::at_most("a", 1.0, 2.0)]);
        assert!(!r.pass);
        assert!(VerifyReport::new(vec![]).pass);
    }
}
