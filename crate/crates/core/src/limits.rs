//! Convergence studies in the relaxation parameter `τ`.
//!
//! Zero relaxation: under the slow time scaling the solution freezes to the
//! initial density as `τ → 0`. Vanishing damping: the damped solution tends
//! to the undamped one as `τ → ∞`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::distance::distances;
use crate::error::{Error, Result};
use crate::measure::{InitialData, Piece};
use crate::potential::SpreadMode;
use crate::solution::{linspace, Snapshot, SolutionSample, Solver};

/// Half-width of the neighbourhood of a jump excluded from velocity gaps.
pub const EPS_SHOCK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    ZeroRelaxation,
    VanishingDamping,
}

impl Study {
    pub fn as_str(&self) -> &'static str {
        match self {
            Study::ZeroRelaxation => "zero_relaxation",
            Study::VanishingDamping => "vanishing_damping",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    /// Points of the extraction grid.
    pub grid_points: usize,
    /// Repeat on a doubled grid and warn if W1 moves by more than 1%.
    pub check_refinement: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            grid_points: 4096,
            check_refinement: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitStudyReport {
    pub study: Study,
    pub t: f64,
    pub taus: Vec<f64>,
    pub w1: Vec<f64>,
    pub sup_cdf: Vec<f64>,
    pub sup_velocity: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Least-squares slope of `log W1` against `log τ` (zero relaxation) or
    /// `log(1/τ)` (vanishing damping); `None` if fewer than two positive W1.
    pub fitted_rate: Option<f64>,
    pub warnings: Vec<String>,
}

impl LimitStudyReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau,w1,sup_cdf,sup_velocity,envelope")?;
        for i in 0..self.taus.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.taus[i], self.w1[i], self.sup_cdf[i], self.sup_velocity[i], self.envelope[i]
            )?;
        }
        match self.fitted_rate {
            Some(r) => writeln!(w, "# fitted_rate,{r:.16e}")?,
            None => writeln!(w, "# fitted_rate,nan")?,
        }
        for msg in &self.warnings {
            writeln!(w, "# warning,{msg}")?;
        }
        Ok(())
    }
}

/// `ρ^τ(x, t) = ρ(x, t/τ)`, `u^τ(x, t) = u(x, t/τ) / τ`.
pub fn scaled_solution(data: &InitialData, x: f64, t: f64, tau: f64) -> Result<SolutionSample> {
    Solver::new(data.clone(), SpreadMode::scaled(tau)?).sample(x, t)
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn fitted_rate(taus: &[f64], w1: &[f64], invert: bool) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = taus
        .iter()
        .zip(w1)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&tau, &w)| (if invert { -tau.ln() } else { tau.ln() }, w.ln()))
        .unzip();
    ols_slope(&xs, &ys)
}

fn check_taus(taus: &[f64], t: f64) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::EmptyTaus);
    }
    if let Some(&bad) = taus.iter().find(|&&tau| !(tau > 0.0) || !tau.is_finite()) {
        return Err(Error::BadTau(bad));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::BadTime {
            t,
            expected: "positive and finite",
        });
    }
    Ok(())
}

fn grid(data: &InitialData, reach: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = data.support_hull();
    let pad = data.max_speed() * reach + 1e-3 * (1.0 + hi - lo);
    linspace(lo - pad, hi + pad, n)
}

fn refinement_warning(
    label: String,
    coarse: f64,
    fine: impl FnOnce() -> Result<f64>,
    enabled: bool,
) -> Result<Option<String>> {
    if !enabled {
        return Ok(None);
    }
    let fine = fine()?;
    let change = (fine - coarse).abs();
    Ok((change > 0.01 * coarse.max(fine) && change > 1e-14).then(|| {
        format!("{label}: W1 changed from {coarse:e} to {fine:e} under grid doubling")
    }))
}

/// Largest `|u|` at the extracted atoms and at grid points inside blocks.
fn sup_velocity_on_support(snap: &Snapshot<'_>, pieces: &[Piece], xs: &[f64]) -> Result<f64> {
    let mut sup = 0.0f64;
    for p in pieces {
        match *p {
            Piece::Atom { v, .. } => sup = sup.max(v.abs()),
            Piece::Block { a, b, .. } => {
                for &x in xs.iter().filter(|&&x| a <= x && x < b) {
                    sup = sup.max(snap.sample(x)?.u.abs());
                }
            }
        }
    }
    Ok(sup)
}

pub fn zero_relaxation_study(
    data: &InitialData,
    taus: &[f64],
    t: f64,
    opts: StudyOptions,
) -> Result<LimitStudyReport> {
    check_taus(taus, t)?;
    let reach = taus.iter().copied().fold(0.0, f64::max);
    let xs = grid(data, reach, opts.grid_points);
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let solver = Solver::new(data.clone(), SpreadMode::scaled(tau)?);
            let snap = solver.at(t)?;
            let pieces = snap.extract_measure(&xs)?;
            let d = distances(&pieces, data.pieces());
            let sup_u = sup_velocity_on_support(&snap, &pieces, &xs)?;
            let warn = refinement_warning(
                format!("tau = {tau}"),
                d.w1,
                || {
                    let fine = grid(data, reach, 2 * opts.grid_points);
                    Ok(distances(&snap.extract_measure(&fine)?, data.pieces()).w1)
                },
                opts.check_refinement,
            )?;
            let envelope = data.total_mass() * data.max_speed() * tau;
            Ok((d.w1, d.sup_cdf, sup_u, envelope, warn))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(Study::ZeroRelaxation, t, taus, rows, false))
}

pub fn vanishing_damping_study(
    data: &InitialData,
    taus: &[f64],
    t: f64,
    opts: StudyOptions,
) -> Result<LimitStudyReport> {
    check_taus(taus, t)?;
    let xs = grid(data, t, opts.grid_points);
    let undamped = Solver::new(data.clone(), SpreadMode::Undamped);
    let free = undamped.at(t)?;
    let free_pieces = free.extract_measure(&xs)?;
    let free_u = xs.iter().map(|&x| Ok(free.sample(x)?.u)).collect::<Result<Vec<_>>>()?;
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let solver = Solver::new(data.clone(), SpreadMode::damped(tau)?);
            let snap = solver.at(t)?;
            let pieces = snap.extract_measure(&xs)?;
            let d = distances(&pieces, &free_pieces);
            let jumps: Vec<f64> = pieces
                .iter()
                .chain(&free_pieces)
                .filter(|p| p.is_atom())
                .map(Piece::start)
                .collect();
            let mut sup_u = 0.0f64;
            for (&x, &uf) in xs.iter().zip(&free_u) {
                if jumps.iter().any(|&j| (x - j).abs() <= EPS_SHOCK) {
                    continue;
                }
                sup_u = sup_u.max((snap.sample(x)?.u - uf).abs());
            }
            let warn = refinement_warning(
                format!("tau = {tau}"),
                d.w1,
                || {
                    let fine = grid(data, t, 2 * opts.grid_points);
                    let a = snap.extract_measure(&fine)?;
                    let b = free.extract_measure(&fine)?;
                    Ok(distances(&a, &b).w1)
                },
                opts.check_refinement,
            )?;
            let spread = SpreadMode::damped(tau)?.spread(t)?;
            let envelope = data.total_mass() * data.max_speed() * (t - spread);
            Ok((d.w1, d.sup_cdf, sup_u, envelope, warn))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(Study::VanishingDamping, t, taus, rows, true))
}

type Row = (f64, f64, f64, f64, Option<String>);

fn assemble(study: Study, t: f64, taus: &[f64], rows: Vec<Row>, invert: bool) -> LimitStudyReport {
    let mut r = LimitStudyReport {
        study,
        t,
        taus: taus.to_vec(),
        w1: vec![],
        sup_cdf: vec![],
        sup_velocity: vec![],
        envelope: vec![],
        fitted_rate: None,
        warnings: vec![],
    };
    for (w1, sup_cdf, sup_u, env, warn) in rows {
        r.w1.push(w1);
        r.sup_cdf.push(sup_cdf);
        r.sup_velocity.push(sup_u);
        r.envelope.push(env);
        r.warnings.extend(warn);
    }
    r.fitted_rate = fitted_rate(taus, &r.w1, invert);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> StudyOptions {
        StudyOptions {
            grid_points: 256,
            check_refinement: false,
        }
    }

    #[test]
    fn scaled_single_atom() {
        let d = InitialData::new(vec![Piece::atom(0.0, 1.0, 1.0)]).unwrap();
        let x = 0.5 * (1.0 - (-4.0f64).exp());
        let s = scaled_solution(&d, x + 0.01, 1.0, 0.5).unwrap();
        let e = scaled_solution(&d, x - 0.01, 1.0, 0.5).unwrap();
        assert!(e.m < 0.5 && s.m > 0.5);
        let (_, right) = Solver::new(d, SpreadMode::scaled(0.5).unwrap())
            .at(1.0)
            .unwrap()
            .mass_limits(x)
            .unwrap();
        assert_eq!(right, 1.0);
    }

    #[test]
    fn static_data_gives_zero_metrics() {
        let d = InitialData::new(vec![Piece::atom(0.0, 1.0, 0.0), Piece::block(1.0, 2.0, 1.0, 0.0)]).unwrap();
        for r in [
            zero_relaxation_study(&d, &[1.0, 0.5], 1.0, quick()).unwrap(),
            vanishing_damping_study(&d, &[10.0, 20.0], 1.0, quick()).unwrap(),
        ] {
            assert!(r.w1.iter().all(|&v| v < 1e-10), "{r:?}");
            assert!(r.sup_velocity.iter().all(|&v| v == 0.0), "{r:?}");
        }
    }

    #[test]
    fn single_atom_vanishing_damping() {
        let d = InitialData::new(vec![Piece::atom(0.0, 1.0, 1.0)]).unwrap();
        let r = vanishing_damping_study(&d, &[10.0], 1.0, quick()).unwrap();
        let exact = 1.0 - 10.0 * (1.0 - (-0.1f64).exp());
        assert!((r.w1[0] - exact).abs() < 1e-12);
        assert!((r.w1[0] - 0.05).abs() < 0.005);
    }

    #[test]
    fn rejects_bad_parameters() {
        let d = InitialData::new(vec![Piece::atom(0.0, 1.0, 1.0)]).unwrap();
        assert!(matches!(zero_relaxation_study(&d, &[], 1.0, quick()), Err(Error::EmptyTaus)));
        assert!(vanishing_damping_study(&d, &[0.0], 1.0, quick()).is_err());
        assert!(zero_relaxation_study(&d, &[1.0], 0.0, quick()).is_err());
    }

    #[test]
    fn ols_recovers_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        assert!((ols_slope(&xs, &ys).unwrap() - 2.5).abs() < 1e-14);
        assert_eq!(ols_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn csv_has_footer() {
        let d = InitialData::new(vec![Piece::atom(-1.0, 1.0, 1.0), Piece::atom(1.0, 1.0, -1.0)]).unwrap();
        let r = zero_relaxation_study(&d, &[1.0, 0.5], 1.0, quick()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("tau,w1,sup_cdf,sup_velocity,envelope\n"));
        assert!(text.lines().any(|l| l.starts_with("# fitted_rate,")));
    }
}
