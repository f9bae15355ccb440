//! Mass, momentum and velocity of the entropy solution at a point.
//!
//! `m(x, t)` is the initial mass of the Lagrangian labels left of the
//! selected minimizer `y_*(x, t)`, measured from `0 - 0` so that
//! `m(·, 0+) = m0`. One-sided limits `m(x ∓ 0, t)` come from the extreme
//! minimizing states; their difference is the mass of a δ-shock sitting at
//! `x`, whose velocity is the Radon–Nikodym ratio `Δq / Δm`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{InitialData, Moments, Piece, Side};
use crate::potential::{
    minimize_profile, select_minimizers, select_pair, Interval, MinimizerSelection, PotentialField,
    SpreadMode, Tolerances,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Regular,
    Cluster,
    Vacuum,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Regular => "regular",
            Regime::Cluster => "cluster",
            Regime::Vacuum => "vacuum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionSample {
    pub x: f64,
    pub t: f64,
    pub m: f64,
    pub q: f64,
    pub u: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub regime: Regime,
}

/// Initial-data moments of the Lagrangian labels left of a one-sided limit,
/// with the range of labels realising it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Side1 {
    pub moments: Moments,
    /// Smallest and largest label position among the states of this side.
    pub y_lo: f64,
    pub y_hi: f64,
    /// `y_*(x ∓ 0, t)`.
    pub selected: f64,
}

/// Everything known about the solution at one point.
#[derive(Debug, Clone)]
pub struct PointEval {
    pub x: f64,
    pub selection: MinimizerSelection,
    pub left: Side1,
    pub right: Side1,
    pub sample: SolutionSample,
}

impl PointEval {
    /// Mass of the δ-shock at `x` (zero at regular points).
    pub fn jump(&self) -> f64 {
        self.right.moments.mass - self.left.moments.mass
    }
}

/// Solver for one initial datum and one spread mode.
#[derive(Debug, Clone)]
pub struct Solver {
    data: InitialData,
    mode: SpreadMode,
    tol: Tolerances,
}

impl Solver {
    pub fn new(data: InitialData, mode: SpreadMode) -> Self {
        Solver {
            data,
            mode,
            tol: Tolerances::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    pub fn mode(&self) -> SpreadMode {
        self.mode
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Fixes the time; evaluation at many `x` then reuses the breakpoint
    /// tables.
    pub fn at(&self, t: f64) -> Result<Snapshot<'_>> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::BadTime {
                t,
                expected: "positive and finite",
            });
        }
        Ok(Snapshot {
            field: PotentialField::new(&self.data, t, self.mode)?,
            tol: self.tol,
            factor: self.mode.velocity_factor(t),
            base: self.data.base(),
        })
    }

    pub fn mass_at(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.at(t)?.evaluate(x)?.sample.m)
    }

    pub fn momentum_at(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.at(t)?.evaluate(x)?.sample.q)
    }

    /// `(u, u(x-0), u(x+0), regime)`.
    pub fn velocity_at(&self, x: f64, t: f64) -> Result<(f64, f64, f64, Regime)> {
        let s = self.at(t)?.evaluate(x)?.sample;
        Ok((s.u, s.u_left, s.u_right, s.regime))
    }

    pub fn sample(&self, x: f64, t: f64) -> Result<SolutionSample> {
        Ok(self.at(t)?.evaluate(x)?.sample)
    }

    /// Samples every `(x, t)` pair, time-major: all `xs` for `ts[0]` first.
    pub fn sample_grid(&self, xs: &[f64], ts: &[f64]) -> Result<Vec<SolutionSample>> {
        let snaps = ts.iter().map(|&t| self.at(t)).collect::<Result<Vec<_>>>()?;
        let pairs: Vec<(usize, f64)> = (0..snaps.len())
            .flat_map(|i| xs.iter().map(move |&x| (i, x)))
            .collect();
        pairs
            .par_iter()
            .map(|&(i, x)| Ok(snaps[i].evaluate(x)?.sample))
            .collect()
    }

    /// Approximate solution measure `ρ(·, t)` recovered from `m(·, t)`.
    pub fn extract_measure(&self, t: f64, xgrid: &[f64]) -> Result<Vec<Piece>> {
        self.at(t)?.extract_measure(xgrid)
    }
}

/// The solver frozen at one time.
#[derive(Debug, Clone)]
pub struct Snapshot<'a> {
    field: PotentialField<'a>,
    tol: Tolerances,
    factor: f64,
    base: Moments,
}

impl<'a> Snapshot<'a> {
    pub fn t(&self) -> f64 {
        self.field.t()
    }

    pub fn data(&self) -> &'a InitialData {
        self.field.data()
    }

    pub fn spread(&self) -> f64 {
        self.field.spread()
    }

    pub fn velocity_factor(&self) -> f64 {
        self.factor
    }

    /// Interval guaranteed to contain the support of `ρ(·, t)`.
    pub fn hull(&self) -> (f64, f64) {
        let (lo, hi) = self.data().support_hull();
        let reach = self.data().max_speed() * self.spread();
        (lo - reach, hi + reach)
    }

    /// `n + 1` evenly spaced points over a slightly inflated [`Self::hull`].
    pub fn default_grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.hull();
        let pad = 1e-3 * (1.0 + hi - lo);
        linspace(lo - pad, hi + pad, n + 1)
    }

    fn mass_tol(&self) -> f64 {
        1e-13 * self.data().total_mass().max(1.0)
    }

    /// Velocity of a label displaced by `d = x - y`, clamped to `±U` in
    /// regions emptied by initial vacuum.
    fn characteristic_velocity(&self, d: f64) -> f64 {
        let u_max = self.data().max_speed();
        (d / self.spread()).clamp(-u_max, u_max) * self.factor
    }

    pub fn evaluate(&self, x: f64) -> Result<PointEval> {
        let data = self.data();
        let profile = self.field.profile(x);
        let set = minimize_profile(&profile, &self.tol);
        let sel = select_minimizers(data, &profile, set, &self.tol)?;

        let states: Vec<(f64, Moments)> = sel
            .set
            .states
            .iter()
            .map(|s| (s.y, data.cumulative(s.y, s.side)))
            .collect();
        let flats: Vec<(Interval, Moments)> = sel
            .set
            .flat
            .iter()
            .map(|iv| (*iv, data.cumulative(iv.lo, Side::Right)))
            .collect();
        let mtol = self.mass_tol();
        let lo_mass = states.iter().map(|s| s.1.mass).fold(f64::INFINITY, f64::min);
        let hi_mass = states.iter().map(|s| s.1.mass).fold(f64::NEG_INFINITY, f64::max);
        let left = self.one_side(&states, &flats, |m| m <= lo_mass + mtol);
        let right = self.one_side(&states, &flats, |m| m >= hi_mass - mtol);

        let at = data.cumulative(sel.lower, sel.branch).sub(&self.base);
        let m = at.mass;
        let q = self.factor * at.momentum;

        let dm = right.moments.mass - left.moments.mass;
        let u_left = self.characteristic_velocity(x - left.selected);
        let u_right = self.characteristic_velocity(x - right.selected);
        let (u, regime) = if dm > mtol {
            let dq = right.moments.momentum - left.moments.momentum;
            let regime = if sel.lower < sel.upper {
                Regime::Cluster
            } else {
                Regime::Regular
            };
            (self.factor * dq / dm, regime)
        } else {
            let d = x - sel.lower;
            let reach = data.max_speed() * self.spread() * (1.0 + 1e-12);
            let regime = if d.abs() > reach {
                Regime::Vacuum
            } else {
                Regime::Regular
            };
            (self.characteristic_velocity(d), regime)
        };
        let sample = SolutionSample {
            x,
            t: self.t(),
            m,
            q,
            u,
            u_left,
            u_right,
            regime,
        };
        Ok(PointEval {
            x,
            selection: sel,
            left,
            right,
            sample,
        })
    }

    fn one_side(
        &self,
        states: &[(f64, Moments)],
        flats: &[(Interval, Moments)],
        keep: impl Fn(f64) -> bool,
    ) -> Side1 {
        let mut comps: Vec<Interval> = states
            .iter()
            .filter(|s| keep(s.1.mass))
            .map(|s| Interval { lo: s.0, hi: s.0 })
            .chain(flats.iter().filter(|f| keep(f.1.mass)).map(|f| f.0))
            .collect();
        comps.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::new();
        for c in comps {
            match merged.last_mut() {
                Some(last) if c.lo <= last.hi => last.hi = last.hi.max(c.hi),
                _ => merged.push(c),
            }
        }
        let moments = states
            .iter()
            .find(|s| keep(s.1.mass))
            .map(|s| s.1)
            .unwrap()
            .sub(&self.base);
        let (_, _, selected, _) = select_pair(self.data(), &merged, self.tol.pos);
        Side1 {
            moments,
            y_lo: merged[0].lo,
            y_hi: merged.last().unwrap().hi,
            selected,
        }
    }

    pub fn sample(&self, x: f64) -> Result<SolutionSample> {
        Ok(self.evaluate(x)?.sample)
    }

    /// `m(x - 0, t)` and `m(x + 0, t)`.
    pub fn mass_limits(&self, x: f64) -> Result<(f64, f64)> {
        let e = self.evaluate(x)?;
        Ok((e.left.moments.mass, e.right.moments.mass))
    }

    /// Inverts `m(·, t)` into atoms (jumps) and blocks (linear stretches).
    ///
    /// Every grid cell is bisected until its Lagrangian preimage is a
    /// rigidly translated part of one initial block, carries no mass, or is
    /// narrower than the position tolerance, in which case its mass becomes
    /// an atom.
    pub fn extract_measure(&self, xgrid: &[f64]) -> Result<Vec<Piece>> {
        if xgrid.len() < 2 {
            return Err(Error::BadGrid("need at least two grid points".into()));
        }
        if xgrid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::BadGrid("grid must be strictly increasing".into()));
        }
        let (h0, h1) = self.hull();
        if xgrid[0] > h0 || *xgrid.last().unwrap() < h1 {
            return Err(Error::BadGrid(format!(
                "grid [{}, {}] does not span the support hull [{h0}, {h1}]",
                xgrid[0],
                xgrid.last().unwrap()
            )));
        }
        let evals = xgrid
            .iter()
            .map(|&x| self.evaluate(x))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::new();
        for (i, e) in evals.iter().enumerate() {
            self.push_point_atom(e, &mut out);
            if let Some(next) = evals.get(i + 1) {
                self.resolve(e.x, &e.right, next.x, &next.left, 0, &mut out)?;
            }
        }
        Ok(merge_blocks(out))
    }

    /// Position of the cluster made of the labels between two one-sided
    /// limits: the centre of mass of their free-flight positions, which
    /// sticky collisions preserve.
    fn centroid(&self, below: &Moments, above: &Moments, fallback: f64) -> f64 {
        let d = above.sub(below);
        let x = (d.first + self.spread() * d.momentum) / d.mass;
        if x.is_finite() {
            x
        } else {
            fallback
        }
    }

    fn push_point_atom(&self, e: &PointEval, out: &mut Vec<Piece>) {
        if e.jump() > self.mass_tol() {
            out.push(Piece::Atom {
                x: self.centroid(&e.left.moments, &e.right.moments, e.x),
                mass: e.jump(),
                v: e.sample.u,
            });
        }
    }

    fn resolve(
        &self,
        a: f64,
        ra: &Side1,
        b: f64,
        lb: &Side1,
        depth: usize,
        out: &mut Vec<Piece>,
    ) -> Result<()> {
        let dm = lb.moments.mass - ra.moments.mass;
        if dm <= self.mass_tol() {
            return Ok(());
        }
        let dq = lb.moments.momentum - ra.moments.momentum;
        let (ya, yb) = (ra.y_hi, lb.y_lo);
        let scale = 1.0 + a.abs() + b.abs();
        if let Some((rho, v0)) = self.translated_block(ya, yb, dm) {
            if ((yb - ya) - (b - a)).abs() <= 1e-9 * (b - a) + self.tol.pos * scale {
                out.push(Piece::Block {
                    a,
                    b,
                    density: rho,
                    v: self.factor * dq / dm,
                });
                return Ok(());
            }
            // the cell straddles vacuum: place the image of the labels
            let shift = self.spread() * v0;
            let (lo, hi) = (ya + shift, yb + shift);
            let slack = self.tol.pos * scale;
            if a - slack <= lo && hi <= b + slack && hi > lo && self.is_free(lo, hi, dm)? {
                out.push(Piece::Block {
                    a: lo.max(a),
                    b: hi.min(b),
                    density: rho,
                    v: self.factor * v0,
                });
                return Ok(());
            }
        }
        let c = 0.5 * (a + b);
        if b - a <= self.tol.pos * scale || depth > 200 || c <= a || c >= b {
            let mid = self.evaluate(c)?;
            if mid.jump() > self.tol.atom && dm - mid.jump() > self.tol.atom {
                return Err(Error::Extraction {
                    x: c,
                    reason: "several jumps closer than the position tolerance".into(),
                });
            }
            let v = self.factor * dq / dm;
            if dm > self.tol.atom {
                out.push(Piece::Atom {
                    x: self.centroid(&ra.moments, &lb.moments, c),
                    mass: dm,
                    v,
                });
            } else {
                out.push(Piece::Block {
                    a,
                    b,
                    density: dm / (b - a),
                    v,
                });
            }
            return Ok(());
        }
        let mid = self.evaluate(c)?;
        self.resolve(a, ra, c, &mid.left, depth + 1, out)?;
        self.push_point_atom(&mid, out);
        self.resolve(c, &mid.right, b, lb, depth + 1, out)
    }

    /// Density of the initial block containing labels `[ya, yb]` whose mass
    /// matches `dm`, if there is one.
    fn translated_block(&self, ya: f64, yb: f64, dm: f64) -> Option<(f64, f64)> {
        self.data().pieces().iter().find_map(|p| match *p {
            Piece::Block { a, b, density, v }
                if a <= ya && yb <= b && (density * (yb - ya) - dm).abs() <= 1e-12 * (1.0 + dm) =>
            {
                Some((density, v))
            }
            _ => None,
        })
    }

    /// Whether `m` grows by exactly `dm` across `[lo, hi]`, i.e. the labels
    /// there have not yet collided.
    fn is_free(&self, lo: f64, hi: f64, dm: f64) -> Result<bool> {
        let inner = 0.5 * (hi - lo);
        let m_lo = self.evaluate(lo + 1e-3 * inner)?.left.moments.mass;
        let m_hi = self.evaluate(hi - 1e-3 * inner)?.right.moments.mass;
        let expect = dm * (1.0 - 2e-3 * inner / (hi - lo));
        Ok(((m_hi - m_lo) - expect).abs() <= 1e-9 * (1.0 + dm))
    }
}

/// Joins abutting blocks with equal density and velocity.
fn merge_blocks(pieces: Vec<Piece>) -> Vec<Piece> {
    let close = |x: f64, y: f64, rel: f64| (x - y).abs() <= rel * (1.0 + x.abs().max(y.abs()));
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        if let (
            Some(Piece::Block {
                a: pa,
                b: pb,
                density: pd,
                v: pv,
            }),
            Piece::Block { a, b, density, v },
        ) = (out.last_mut(), p)
        {
            if close(*pb, a, 1e-12) && close(*pd, density, 1e-9) && close(*pv, v, 1e-9) {
                let (w0, w1) = (*pb - *pa, b - a);
                *pv = (*pv * w0 + v * w1) / (w0 + w1);
                *pb = b;
                continue;
            }
        }
        out.push(p);
    }
    out
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}
