//! The four command-line experiments. Each returns the files it would write
//! and whether its checks passed; the caller does the I/O.

use rayon::prelude::*;

use crate::config::{CheckName, RunConfig, VerifySection};
use crate::distance::distances;
use crate::error::{Error, Result};
use crate::golden;
use crate::limits::{vanishing_damping_study, zero_relaxation_study, StudyOptions};
use crate::measure::{InitialData, Side};
use crate::output::{fmt, time_tag, write_pieces, write_samples, VerifyReport};
use crate::potential::SpreadMode;
use crate::solution::Solver;
use crate::sticky::discretize;
use crate::verify::{
    initial_trace_check, monotonicity_check, non_increasing, oleinik_check, random_pairs, trace_bump,
    unit_on_support, weak_residual, CheckResult, TestFunction, Window,
};

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub pass: bool,
}

impl Outcome {
    fn add(&mut self, name: impl Into<String>, body: Vec<u8>) {
        self.files.push((name.into(), body));
    }
}

fn missing(section: &str) -> Error {
    Error::Config(format!("missing field `{section}`"))
}

pub fn mode_label(mode: &SpreadMode) -> String {
    match mode {
        SpreadMode::Undamped => "undamped".into(),
        SpreadMode::Damped { tau } => format!("damped(tau={tau})"),
        SpreadMode::Scaled { tau } => format!("scaled(tau={tau})"),
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let sec = cfg.solve.as_ref().ok_or_else(|| missing("solve"))?;
    let solver = Solver::new(cfg.data()?, cfg.spread_mode()?);
    let xs = sec.xs.points()?;
    let mut out = Outcome {
        pass: true,
        ..Default::default()
    };
    let mut body = Vec::new();
    write_samples(&mut body, &solver.sample_grid(&xs, &sec.ts)?)?;
    out.add("solution.csv", body);
    let measures = sec
        .ts
        .par_iter()
        .map(|&t| {
            let snap = solver.at(t)?;
            let pieces = snap.extract_measure(&snap.default_grid(sec.measure_cells.max(1)))?;
            let mut body = Vec::new();
            write_pieces(&mut body, t, &pieces)?;
            Ok((format!("measure_t{}.csv", time_tag(t)), body))
        })
        .collect::<Result<Vec<_>>>()?;
    out.files.extend(measures);
    Ok(out)
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<Outcome> {
    let sec = cfg.oracle.as_ref().ok_or_else(|| missing("oracle"))?;
    let data = cfg.data()?;
    let mode = cfg.spread_mode()?;
    let solver = Solver::new(data.clone(), mode);
    let start = discretize(&data, sec.n_per_block, mode)?;
    let mut out = Outcome {
        pass: true,
        ..Default::default()
    };
    let mut table = String::from("t,x,m_solver,m_oracle,diff\n");
    let mut summary = String::from("t,n_per_block,sup_gap,w1_gap\n");
    for &t in &sec.ts {
        let state = start.evolve(t)?;
        let snap = solver.at(t)?;
        let xs = match &sec.xs {
            Some(g) => g.points()?,
            None => snap.default_grid(511),
        };
        let positions: Vec<f64> = state.particles().iter().map(|p| p.x).collect();
        let near_jump = |x: f64| {
            let k = positions.partition_point(|&p| p < x);
            let tol = 1e-9 * (1.0 + x.abs());
            [k.wrapping_sub(1), k]
                .iter()
                .filter_map(|&i| positions.get(i))
                .any(|&p| (p - x).abs() <= tol)
        };
        let rows = xs
            .par_iter()
            .map(|&x| Ok((x, snap.sample(x)?.m, state.oracle_cdf(x, Side::Left))))
            .collect::<Result<Vec<_>>>()?;
        let mut sup = 0.0f64;
        for &(x, ms, mo) in &rows {
            table += &format!("{},{},{},{},{}\n", fmt(t), fmt(x), fmt(ms), fmt(mo), fmt(ms - mo));
            if !near_jump(x) {
                sup = sup.max((ms - mo).abs());
            }
        }
        let pieces = snap.extract_measure(&snap.default_grid(256))?;
        let w1 = distances(&pieces, &state.to_pieces()).w1;
        summary += &format!("{},{},{},{}\n", fmt(t), sec.n_per_block, fmt(sup), fmt(w1));
        if let Some(tol) = sec.sup_tolerance {
            out.pass &= sup <= tol;
        }
        let mut dump = Vec::new();
        state.write_csv(&mut dump, true)?;
        out.add(format!("particles_t{}.csv", time_tag(t)), dump);
    }
    out.add("oracle.csv", table.into_bytes());
    out.add("oracle_summary.csv", summary.into_bytes());
    Ok(out)
}

pub fn cmd_limits(cfg: &RunConfig) -> Result<Outcome> {
    let data = cfg.data()?;
    let sec = cfg.limits.clone().unwrap_or(crate::config::LimitsSection {
        zero_relaxation: Some(crate::config::StudySpec {
            taus: vec![1.0, 0.5, 0.25, 0.125],
            t: 1.0,
        }),
        vanishing_damping: Some(crate::config::StudySpec {
            taus: vec![10.0, 20.0, 40.0, 80.0],
            t: 0.5,
        }),
        grid_points: 4096,
    });
    let opts = StudyOptions {
        grid_points: sec.grid_points,
        check_refinement: true,
    };
    let mut out = Outcome {
        pass: true,
        ..Default::default()
    };
    if let Some(s) = &sec.zero_relaxation {
        let mut body = Vec::new();
        zero_relaxation_study(&data, &s.taus, s.t, opts)?.write_csv(&mut body)?;
        out.add("zero_relaxation.csv", body);
    }
    if let Some(s) = &sec.vanishing_damping {
        let mut body = Vec::new();
        vanishing_damping_study(&data, &s.taus, s.t, opts)?.write_csv(&mut body)?;
        out.add("vanishing_damping.csv", body);
    }
    Ok(out)
}

/// Test function straddling the meeting time of the reference pair.
pub fn default_test_function() -> TestFunction {
    TestFunction::new(Window::bump(-1.5, 1.0), Window::bump(0.8, 2.2)).expect("valid window")
}

/// Runs the selected checks on one configuration.
pub fn run_battery(label: &str, data: &InitialData, mode: SpreadMode, sec: &VerifySection, seed: u64) -> Result<Vec<CheckResult>> {
    let solver = Solver::new(data.clone(), mode);
    let mass = data.total_mass();
    let slack = 1e-12 * mass;
    let corrupt = sec.corrupt_velocity.map(|c| move |x: f64, u: f64| u + c * x);
    let mut checks = Vec::new();
    for check in &sec.checks {
        match check {
            CheckName::Oleinik => {
                for &t in &sec.ts {
                    let snap = solver.at(t)?;
                    let grid = snap.default_grid(sec.grid_points.max(2) - 1);
                    let hook = corrupt.as_ref().map(|c| c as &dyn Fn(f64, f64) -> f64);
                    let v = oleinik_check(&solver, t, &grid, hook)?;
                    checks.push(CheckResult::at_most(format!("oleinik/{label}/t={t}"), 1e-9, v));
                }
            }
            CheckName::WeakResidual => {
                let phi = sec.phi.unwrap_or_else(default_test_function);
                let psi = sec.psi.unwrap_or(phi);
                let (mut r1, mut r2) = (vec![], vec![]);
                for k in 0..=sec.doublings {
                    let r = weak_residual(&solver, &phi, &psi, sec.base_resolution << k)?;
                    r1.push(r.r1.abs());
                    r2.push(r.r2.abs());
                }
                let last = r1.last().unwrap().max(*r2.last().unwrap());
                let mut c = CheckResult::at_most(format!("weak_residual/{label}"), 1e-4 * mass, last);
                c.pass &= non_increasing(&r1, slack) && non_increasing(&r2, slack);
                checks.push(c.with_series(r1.into_iter().chain(r2).collect()));
            }
            CheckName::InitialTrace => {
                let gaps = initial_trace_check(&solver, &trace_bump(data), &sec.trace_ts)?;
                let cols: [Vec<f64>; 3] = [
                    gaps.iter().map(|g| g.rho).collect(),
                    gaps.iter().map(|g| g.momentum).collect(),
                    gaps.iter().map(|g| g.energy).collect(),
                ];
                let rise = cols
                    .iter()
                    .flat_map(|c| c.windows(2).map(|w| w[1] - w[0]))
                    .fold(f64::NEG_INFINITY, f64::max)
                    .max(0.0);
                let series = cols.concat();
                checks.push(
                    CheckResult::at_most(format!("initial_trace/{label}"), slack, rise).with_series(series),
                );
                let reach = sec.trace_ts.iter().copied().fold(0.0, f64::max);
                let reach = mode.spread(reach)?;
                let unit = initial_trace_check(&solver, &unit_on_support(data, reach), &sec.trace_ts)?;
                let worst = unit.iter().map(|g| g.rho).fold(0.0, f64::max);
                checks.push(CheckResult::at_most(format!("initial_trace_unit/{label}"), 1e-12, worst));
            }
            CheckName::Monotonicity => {
                for (k, &t) in sec.ts.iter().enumerate() {
                    let snap = solver.at(t)?;
                    let (lo, hi) = snap.hull();
                    let pairs = random_pairs(lo - 1.0, hi + 1.0, sec.monotonicity_pairs, seed.wrapping_add(k as u64));
                    let v = monotonicity_check(&snap, &pairs)?;
                    checks.push(CheckResult::at_most(format!("monotonicity/{label}/t={t}"), 1e-12, v));
                }
            }
        }
    }
    Ok(checks)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let sec = cfg.verify.clone().unwrap_or_default();
    let cases: Vec<(String, InitialData, SpreadMode)> = if sec.golden {
        golden::suite()
            .into_iter()
            .flat_map(|c| {
                golden::modes()
                    .into_iter()
                    .map(move |m| (format!("{}/{}", c.name, mode_label(&m)), c.data.clone(), m))
            })
            .collect()
    } else {
        vec![("config".to_string(), cfg.data()?, cfg.spread_mode()?)]
    };
    let results = cases
        .par_iter()
        .enumerate()
        .map(|(i, (label, data, mode))| run_battery(label, data, *mode, &sec, cfg.seed.wrapping_add(1000 * i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let report = VerifyReport::new(results.concat());
    Ok(Outcome {
        pass: report.pass,
        files: vec![("verify.json".into(), report.to_json().into_bytes())],
    })
}
