//! Numerical certificates for computed solutions: the one-sided Lipschitz
//! (Oleinik) bound, the weak formulation, the initial trace and the
//! monotonicity of minimizers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{InitialData, Piece};
use crate::solution::{Snapshot, Solver};

/// Five-point Gauss–Legendre rule on `[-1, 1]`, exact for degree 9.
const GAUSS: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gauss(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    GAUSS.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// `(1 - s²)³` on the rescaled interval.
    Bump,
    /// One on the interior, with `1 - (1 - σ²)³` ramps of relative width
    /// `ramp` at both ends.
    PolyWindowed,
}

/// A `C¹` polynomial window supported in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub kind: WindowKind,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_ramp")]
    pub ramp: f64,
}

fn default_ramp() -> f64 {
    0.25
}

impl Window {
    pub fn bump(lo: f64, hi: f64) -> Self {
        Window {
            kind: WindowKind::Bump,
            lo,
            hi,
            ramp: default_ramp(),
        }
    }

    pub fn plateau(lo: f64, hi: f64, ramp: f64) -> Self {
        Window {
            kind: WindowKind::PolyWindowed,
            lo,
            hi,
            ramp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lo.is_finite()
            && self.hi.is_finite()
            && self.lo < self.hi
            && (self.kind == WindowKind::Bump || (self.ramp > 0.0 && self.ramp <= 0.5));
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid test-function window {self:?}")))
        }
    }

    fn ramp_width(&self) -> f64 {
        self.ramp * (self.hi - self.lo)
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        match self.kind {
            WindowKind::Bump => {
                let s = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
                (1.0 - s * s).powi(3)
            }
            WindowKind::PolyWindowed => {
                let r = self.ramp_width();
                let sigma = ((x - self.lo).min(self.hi - x) / r).min(1.0);
                1.0 - (1.0 - sigma * sigma).powi(3)
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        match self.kind {
            WindowKind::Bump => {
                let w = self.hi - self.lo;
                let s = (2.0 * x - self.lo - self.hi) / w;
                -6.0 * s * (1.0 - s * s).powi(2) * 2.0 / w
            }
            WindowKind::PolyWindowed => {
                let r = self.ramp_width();
                let (d, sign) = if x - self.lo <= self.hi - x {
                    (x - self.lo, 1.0)
                } else {
                    (self.hi - x, -1.0)
                };
                if d >= r {
                    return 0.0;
                }
                let sigma = d / r;
                sign * 6.0 * sigma * (1.0 - sigma * sigma).powi(2) / r
            }
        }
    }

    /// Points where the window stops being a single polynomial.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            WindowKind::Bump => vec![self.lo, self.hi],
            WindowKind::PolyWindowed => {
                let r = self.ramp_width();
                vec![self.lo, self.lo + r, self.hi - r, self.hi]
            }
        }
    }
}

/// Separable test function `φ(x, t) = X(x) T(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub x: Window,
    pub t: Window,
}

impl TestFunction {
    pub fn new(x: Window, t: Window) -> Result<Self> {
        x.validate()?;
        t.validate()?;
        if !(t.lo > 0.0) {
            return Err(Error::Config("test-function time window must start after 0".into()));
        }
        Ok(TestFunction { x, t })
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.x.value(x) * self.t.value(t)
    }

    pub fn dx(&self, x: f64, t: f64) -> f64 {
        self.x.derivative(x) * self.t.value(t)
    }

    pub fn dt(&self, x: f64, t: f64) -> f64 {
        self.x.value(x) * self.t.derivative(t)
    }
}

/// `Σ ∫ w(x) g(u) dρ` over a list of pieces, exact for polynomial `w`.
pub fn pair_pieces(pieces: &[Piece], w: impl Fn(f64) -> f64, breaks: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for p in pieces {
        match *p {
            Piece::Atom { x, mass, v } => total += w(x) * mass * g(v),
            Piece::Block { a, b, density, v } => {
                total += density * g(v) * integrate_split(a, b, breaks, &w);
            }
        }
    }
    total
}

/// Gauss quadrature on `[a, b]` split at `breaks`.
fn integrate_split(a: f64, b: f64, breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&c| a < c && c < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|c| gauss(c[0], c[1], &f)).sum()
}

/// Mass of `pieces` in `[lo, x)`.
fn mass_between(pieces: &[Piece], lo: f64, x: f64) -> f64 {
    pieces
        .iter()
        .map(|p| match *p {
            Piece::Atom { x: px, mass, .. } => {
                if lo <= px && px < x {
                    mass
                } else {
                    0.0
                }
            }
            Piece::Block { a, b, density, .. } => density * (x.min(b) - a.max(lo)).max(0.0),
        })
        .sum()
}

/// Connected runs of support, each spelled as its sequence of atoms (`a`)
/// and maximal block stretches (`b`), ignoring pieces lighter than `heavy`.
/// Changes mark collisions and the start and end of accretion.
fn shape(pieces: &[Piece], heavy: f64) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut prev_end = f64::NEG_INFINITY;
    for p in pieces {
        if out.is_empty() || p.start() - prev_end > 1e-9 * (1.0 + prev_end.abs()) {
            out.push(String::new());
        }
        prev_end = prev_end.max(p.end());
        if p.mass() <= heavy {
            continue;
        }
        let run = out.last_mut().expect("run started");
        let kind = if p.is_atom() { 'a' } else { 'b' };
        if !(kind == 'b' && run.ends_with('b')) {
            run.push(kind);
        }
    }
    out.retain(|r| !r.is_empty());
    out
}

/// Window-weighted integrals of one time slice.
#[derive(Debug, Clone, PartialEq)]
struct Slice {
    shape: Vec<String>,
    /// `∫ X_φ m dx`.
    phi_m: f64,
    /// `Σ ∫ X_φ u dm`.
    phi_u: f64,
    /// `Σ ∫ X_ψ u dm`.
    psi_u: f64,
    /// `Σ ∫ X_ψ' u² dm`.
    dpsi_uu: f64,
}

/// Residuals of the two weak equations at one resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakResidual {
    pub resolution: usize,
    pub r1: f64,
    pub r2: f64,
}

struct ResidualRun<'a> {
    solver: &'a Solver,
    phi: TestFunction,
    psi: TestFunction,
    grid_cells: usize,
}

impl ResidualRun<'_> {
    fn slice(&self, t: f64) -> Result<Slice> {
        let snap = self.solver.at(t)?;
        let pieces = snap.extract_measure(&snap.default_grid(self.grid_cells))?;
        let shape = shape(&pieces, 1e-10 * self.solver.data().total_mass());

        let wx = self.phi.x;
        let m_lo = snap.evaluate(wx.lo)?.left.moments.mass;
        let mut breaks = wx.breakpoints();
        for p in &pieces {
            breaks.push(p.start());
            breaks.push(p.end());
        }
        let m = |x: f64| m_lo + mass_between(&pieces, wx.lo, x);
        let phi_m = integrate_split(wx.lo, wx.hi, &breaks, |x| wx.value(x) * m(x));
        let phi_u = pair_pieces(&pieces, |x| wx.value(x), &wx.breakpoints(), |v| v);
        let px = self.psi.x;
        let psi_u = pair_pieces(&pieces, |x| px.value(x), &px.breakpoints(), |v| v);
        let dpsi_uu = pair_pieces(&pieces, |x| px.derivative(x), &px.breakpoints(), |v| v * v);
        Ok(Slice {
            shape,
            phi_m,
            phi_u,
            psi_u,
            dpsi_uu,
        })
    }

    fn integrand(&self, t: f64, s: &Slice) -> (f64, f64) {
        let rate = self.solver.mode().damping_rate();
        let (tp, dtp) = (self.phi.t.value(t), self.phi.t.derivative(t));
        let (ts, dts) = (self.psi.t.value(t), self.psi.t.derivative(t));
        (
            dtp * s.phi_m - tp * s.phi_u,
            dts * s.psi_u + ts * s.dpsi_uu - rate * ts * s.psi_u,
        )
    }

    /// Trapezoid on `[tl, tr]`, bisected while the shape differs at the two
    /// ends so that collisions fall on panel boundaries.
    fn panel(&self, tl: f64, sl: &Slice, tr: f64, sr: &Slice) -> Result<(f64, f64)> {
        if sl.shape == sr.shape || tr - tl <= 1e-13 * (1.0 + tr) {
            let (a1, a2) = self.integrand(tl, sl);
            let (b1, b2) = self.integrand(tr, sr);
            let h = 0.5 * (tr - tl);
            return Ok((h * (a1 + b1), h * (a2 + b2)));
        }
        let tm = 0.5 * (tl + tr);
        let sm = self.slice(tm)?;
        let (l1, l2) = self.panel(tl, sl, tm, &sm)?;
        let (r1, r2) = self.panel(tm, &sm, tr, sr)?;
        Ok((l1 + r1, l2 + r2))
    }

    fn run(&self, resolution: usize) -> Result<WeakResidual> {
        let t0 = self.phi.t.lo.min(self.psi.t.lo);
        let t1 = self.phi.t.hi.max(self.psi.t.hi);
        let ts: Vec<f64> = (0..=resolution)
            .map(|k| t0 + (t1 - t0) * k as f64 / resolution as f64)
            .collect();
        let slices = ts.iter().map(|&t| self.slice(t)).collect::<Result<Vec<_>>>()?;
        let (mut r1, mut r2) = (0.0, 0.0);
        for k in 0..resolution {
            let (a, b) = self.panel(ts[k], &slices[k], ts[k + 1], &slices[k + 1])?;
            r1 += a;
            r2 += b;
        }
        Ok(WeakResidual { resolution, r1, r2 })
    }
}

/// `r1 = ∬ φ_t m dx dt - ∬ φ u dm dt` and
/// `r2 = ∬ (ψ_t u + ψ_x u² - λ ψ u) dm dt`, with `λ` the damping rate.
///
/// Space integrals are exact on each time slice; `resolution` is the number
/// of trapezoid panels in time.
pub fn weak_residual(solver: &Solver, phi: &TestFunction, psi: &TestFunction, resolution: usize) -> Result<WeakResidual> {
    if resolution == 0 {
        return Err(Error::Config("resolution must be positive".into()));
    }
    ResidualRun {
        solver,
        phi: *phi,
        psi: *psi,
        grid_cells: 64,
    }
    .run(resolution)
}

/// Largest excess of `(u(x₂) - u(x₁)) / (x₂ - x₁)` over the Oleinik bound
/// across all grid pairs. `corrupt` perturbs the sampled velocities.
pub fn oleinik_check(
    solver: &Solver,
    t: f64,
    xgrid: &[f64],
    corrupt: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<f64> {
    if xgrid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::BadGrid("grid must be strictly increasing".into()));
    }
    let bound = solver.mode().oleinik_bound(t)?;
    let snap = solver.at(t)?;
    let us = xgrid
        .iter()
        .map(|&x| {
            let u = snap.sample(x)?.u;
            Ok(corrupt.map_or(u, |c| c(x, u)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..xgrid.len() {
        for j in i + 1..xgrid.len() {
            let q = (us[j] - us[i]) / (xgrid[j] - xgrid[i]);
            worst = worst.max(q - bound);
        }
    }
    Ok(worst)
}

/// Pairing gaps against the initial data at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceGap {
    pub t: f64,
    pub rho: f64,
    pub momentum: f64,
    pub energy: f64,
}

fn pairings(pieces: &[Piece], w: &Window) -> [f64; 3] {
    let f = |x: f64| w.value(x);
    let b = w.breakpoints();
    [
        pair_pieces(pieces, f, &b, |_| 1.0),
        pair_pieces(pieces, f, &b, |v| v),
        pair_pieces(pieces, f, &b, |v| v * v),
    ]
}

/// `|⟨ρ(t) - ρ₀, φ⟩|`, `|⟨ρu(t) - ρ₀u₀, φ⟩|` and `|⟨ρu²(t) - ρ₀u₀², φ⟩|`.
pub fn initial_trace_check(solver: &Solver, phi: &Window, t_seq: &[f64]) -> Result<Vec<TraceGap>> {
    phi.validate()?;
    let initial = pairings(solver.data().pieces(), phi);
    t_seq
        .iter()
        .map(|&t| {
            let snap = solver.at(t)?;
            let now = pairings(&snap.extract_measure(&snap.default_grid(64))?, phi);
            Ok(TraceGap {
                t,
                rho: (now[0] - initial[0]).abs(),
                momentum: (now[1] - initial[1]).abs(),
                energy: (now[2] - initial[2]).abs(),
            })
        })
        .collect()
}

/// Largest `y_*(x₁) - y^*(x₂)` over pairs with `x₁ < x₂` (either order is
/// accepted on input).
pub fn monotonicity_check(snap: &Snapshot<'_>, x_pairs: &[(f64, f64)]) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for &(a, b) in x_pairs {
        let (x1, x2) = if a <= b { (a, b) } else { (b, a) };
        if x1 == x2 {
            continue;
        }
        let lo = snap.evaluate(x1)?.selection.lower;
        let hi = snap.evaluate(x2)?.selection.upper;
        worst = worst.max(lo - hi);
    }
    Ok(worst)
}

/// `n` random pairs drawn uniformly from `[lo, hi]`.
pub fn random_pairs(lo: f64, hi: f64, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (rng.random_range(lo..=hi), rng.random_range(lo..=hi)))
        .collect()
}

/// One entry of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub measured: f64,
    pub pass: bool,
    /// Values behind `measured`, for checks that follow a sequence.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<f64>,
}

impl CheckResult {
    /// Passes iff `measured ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, tolerance: f64, measured: f64) -> Self {
        CheckResult {
            name: name.into(),
            tolerance,
            measured,
            pass: measured <= tolerance,
            series: vec![],
        }
    }

    pub fn with_series(mut self, series: Vec<f64>) -> Self {
        self.series = series;
        self
    }
}

/// `true` if every value is at most its predecessor plus `slack`.
pub fn non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Default spatial window for trace checks: a bump over the support hull,
/// shifted so that symmetric data do not give identically zero pairings.
pub fn trace_bump(data: &InitialData) -> Window {
    let (lo, hi) = data.support_hull();
    let w = hi - lo + 1.0;
    Window::bump(lo - 0.6 * w, hi + 0.4 * w)
}

/// A window identically one on the hull reachable within spread `reach`,
/// with unit-width ramps outside it.
pub fn unit_on_support(data: &InitialData, reach: f64) -> Window {
    let (lo, hi) = data.support_hull();
    let pad = data.max_speed() * reach + 0.5;
    let (a, b) = (lo - pad - 1.0, hi + pad + 1.0);
    Window::plateau(a, b, 1.0 / (b - a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::SpreadMode;
    use crate::solution::linspace;

    #[test]
    fn window_derivatives_match_finite_differences() {
        for w in [Window::bump(-1.0, 2.0), Window::plateau(-1.0, 2.0, 0.3)] {
            for x in linspace(-1.2, 2.2, 301) {
                let h = 1e-6;
                let fd = (w.value(x + h) - w.value(x - h)) / (2.0 * h);
                assert!((fd - w.derivative(x)).abs() < 1e-6, "{w:?} at {x}");
            }
            assert_eq!(w.value(-1.0), 0.0);
            assert_eq!(w.value(2.5), 0.0);
        }
        assert_eq!(Window::plateau(0.0, 4.0, 0.25).value(2.0), 1.0);
        assert!(Window::bump(1.0, 1.0).validate().is_err());
    }

    #[test]
    fn gauss_is_exact_for_degree_nine() {
        let got = gauss(-1.0, 2.0, |x| x.powi(9) - 3.0 * x.powi(4));
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn static_data_passes_everything() {
        let d = InitialData::new(vec![Piece::atom(-0.5, 1.0, 0.0), Piece::block(0.0, 1.0, 2.0, 0.0)]).unwrap();
        let s = Solver::new(d.clone(), SpreadMode::damped(2.0).unwrap());
        let grid = linspace(-2.0, 3.0, 64);
        assert!(oleinik_check(&s, 1.0, &grid, None).unwrap() <= 0.0);
        let phi = TestFunction::new(Window::bump(-1.0, 1.5), Window::bump(0.5, 2.0)).unwrap();
        let r = weak_residual(&s, &phi, &phi, 32).unwrap();
        assert!(r.r1.abs() < 1e-12 && r.r2.abs() < 1e-12, "{r:?}");
        let gaps = initial_trace_check(&s, &trace_bump(&d), &[0.1, 0.01]).unwrap();
        for g in gaps {
            assert!(g.rho < 1e-12 && g.momentum == 0.0 && g.energy == 0.0, "{g:?}");
        }
    }

    #[test]
    fn oleinik_signs() {
        let pair = InitialData::new(vec![Piece::atom(-1.0, 1.0, 1.0), Piece::atom(1.0, 1.0, -1.0)]).unwrap();
        let s = Solver::new(pair, SpreadMode::damped(2.0).unwrap());
        let grid = linspace(-3.0, 3.0, 128);
        assert!(oleinik_check(&s, 2.0, &grid, None).unwrap() <= 1e-9);

        let apart = InitialData::new(vec![Piece::atom(-1.0, 1.0, -1.0), Piece::atom(1.0, 1.0, 1.0)]).unwrap();
        let s = Solver::new(apart, SpreadMode::Undamped);
        let v = oleinik_check(&s, 1.0, &grid, None).unwrap();
        assert!(v <= 1e-9 && v > -1e-6, "{v}");
        let corrupt = |x: f64, u: f64| u + 10.0 * x;
        assert!(oleinik_check(&s, 1.0, &grid, Some(&corrupt)).unwrap() > 1.0);
    }

    #[test]
    fn single_atom_residual_shrinks() {
        let d = InitialData::new(vec![Piece::atom(0.0, 1.0, 1.0)]).unwrap();
        let s = Solver::new(d, SpreadMode::damped(1.0).unwrap());
        let phi = TestFunction::new(Window::bump(-1.0, 2.0), Window::bump(0.2, 1.8)).unwrap();
        let a = weak_residual(&s, &phi, &phi, 16).unwrap();
        let b = weak_residual(&s, &phi, &phi, 32).unwrap();
        assert!(b.r1.abs() < a.r1.abs() && b.r2.abs() < a.r2.abs(), "{a:?} {b:?}");
    }

    #[test]
    fn monotone_minimizers() {
        let pair = InitialData::new(vec![Piece::atom(-1.0, 1.0, 1.0), Piece::atom(1.0, 1.0, -1.0)]).unwrap();
        let s = Solver::new(pair, SpreadMode::damped(2.0).unwrap());
        let snap = s.at(1.0).unwrap();
        let pairs = random_pairs(-3.0, 3.0, 200, 7);
        assert!(monotonicity_check(&snap, &pairs).unwrap() <= 1e-12);
        assert_eq!(pairs, random_pairs(-3.0, 3.0, 200, 7));
    }
}
