//! The generalized potential
//!
//! ```text
//! F(y; x, t) = ∫_{0+0}^{y-0} (η + u0(η) a(t) - x) dm0(η)
//! ```
//!
//! and its minimizers. For atoms plus constant-density blocks `F` is
//! piecewise quadratic in `y` with downward or upward jumps at atoms, so the
//! global infimum and the full minimizer set are found by enumerating a
//! finite candidate list.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Endpoints, InitialData, Moments, Piece, Side, Weight};

/// How far a particle has travelled per unit initial velocity by time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SpreadMode {
    /// `a(t) = t`.
    Undamped,
    /// `a(t) = τ(1 - e^{-t/τ})`.
    Damped { tau: f64 },
    /// Slow-time-scaled damping, `a(t) = τ(1 - e^{-t/τ²})`.
    Scaled { tau: f64 },
}

impl SpreadMode {
    pub fn damped(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(SpreadMode::Damped { tau })
    }

    pub fn scaled(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(SpreadMode::Scaled { tau })
    }

    pub fn tau(&self) -> Option<f64> {
        match *self {
            SpreadMode::Undamped => None,
            SpreadMode::Damped { tau } | SpreadMode::Scaled { tau } => Some(tau),
        }
    }

    /// Time constant of the exponential velocity decay (`τ` or `τ²`).
    fn decay_time(&self) -> Option<f64> {
        match *self {
            SpreadMode::Undamped => None,
            SpreadMode::Damped { tau } => Some(tau),
            SpreadMode::Scaled { tau } => Some(tau * tau),
        }
    }

    pub fn spread(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::BadTime {
                t,
                expected: "finite and nonnegative",
            });
        }
        Ok(match (*self, self.decay_time()) {
            (SpreadMode::Undamped, _) => t,
            (_, Some(k)) => {
                // Keep the bound strict once the exact value rounds to τ.
                let tau = self.tau().unwrap();
                (-tau * (-t / k).exp_m1()).min(tau.next_down())
            }
            _ => unreachable!(),
        })
    }

    /// `e^{-t/τ}` (damped), `e^{-t/τ²}` (scaled), 1 (undamped).
    pub fn decay(&self, t: f64) -> f64 {
        match self.decay_time() {
            None => 1.0,
            Some(k) => (-t / k).exp(),
        }
    }

    /// Factor turning an initial velocity into the reported velocity at `t`.
    /// Equals `decay(t)` except in scaled mode, where the slow-time velocity
    /// carries an extra `1/τ`.
    pub fn velocity_factor(&self, t: f64) -> f64 {
        match *self {
            SpreadMode::Scaled { tau } => self.decay(t) / tau,
            _ => self.decay(t),
        }
    }

    /// Coefficient `k` of the damping term `-k ρu` in the momentum equation.
    pub fn damping_rate(&self) -> f64 {
        match self.decay_time() {
            None => 0.0,
            Some(k) => 1.0 / k,
        }
    }

    /// Right-hand side of the one-sided Lipschitz bound on `u(·, t)`:
    /// `1/t` undamped, `e^{-t/τ}/(τ(1 - e^{-t/τ}))` damped.
    pub fn oleinik_bound(&self, t: f64) -> Result<f64> {
        Ok(self.velocity_factor(t) / self.spread(t)?)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::BadTau(tau))
    }
}

/// Numerical tolerances shared by the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Position comparisons for derived intersections.
    pub pos: f64,
    /// Relative tie tolerance when collecting minimizers: two potential
    /// values within `min_rel * (1 + |ν|)` are equal.
    pub min_rel: f64,
    /// Jumps of `m` larger than this are reported as atoms.
    pub atom: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pos: 1e-12,
            min_rel: 1e-11,
            atom: 1e-9,
        }
    }
}

/// Direct evaluation of `F(y; x, t)` through Stieltjes integrals. The
/// oriented convention `∫_0^y = -∫_y^0` applies for `y <= 0`.
pub fn potential_value(data: &InitialData, x: f64, t: f64, mode: SpreadMode, y: f64) -> Result<f64> {
    let a = mode.spread(t)?;
    let integrand = |lo: f64, hi: f64, ends: Endpoints| -> Result<f64> {
        let pos = data.stieltjes(lo, hi, ends, Weight::Position)?;
        let mom = data.stieltjes(lo, hi, ends, Weight::Velocity)?;
        let mass = data.stieltjes(lo, hi, ends, Weight::One)?;
        Ok(pos + a * mom - x * mass)
    };
    if y > 0.0 {
        integrand(0.0, y, Endpoints::OPEN)
    } else {
        Ok(-integrand(y, 0.0, Endpoints::CLOSED)?)
    }
}

/// A stretch of `F` between consecutive breakpoints: on `(lo, hi]`,
/// `F(y) = value_lo + slope_lo (y - lo) + curvature (y - lo)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    /// `F(lo + 0)`.
    pub value_lo: f64,
    pub slope_lo: f64,
    pub curvature: f64,
    /// Whether a block lies under this segment (otherwise it is vacuum and
    /// `F` is constant).
    pub block: bool,
}

impl Segment {
    fn eval(&self, y: f64) -> f64 {
        let d = y - self.lo;
        self.value_lo + d * (self.slope_lo + self.curvature * d)
    }

    pub fn value_hi(&self) -> f64 {
        self.eval(self.hi)
    }

    /// Global coefficients `(c0, c1, c2)` of `c0 + c1 y + c2 y²`.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        let (l, s, c) = (self.lo, self.slope_lo, self.curvature);
        (self.value_lo - s * l + c * l * l, s - 2.0 * c * l, c)
    }
}

/// `F(y + 0) - F(y - 0)` at an atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub y: f64,
    pub size: f64,
}

/// Exact representation of `y ↦ F(y; x, t)` on a truncated domain that
/// contains every minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    pub x: f64,
    pub t: f64,
    pub mode: SpreadMode,
    pub spread: f64,
    pub segments: Vec<Segment>,
    pub jumps: Vec<Jump>,
}

impl PotentialProfile {
    pub fn domain(&self) -> (f64, f64) {
        (self.segments[0].lo, self.segments.last().unwrap().hi)
    }

    /// `F(y - 0)` for `Side::Left`, `F(y + 0)` for `Side::Right`. Outside the
    /// domain `F` is constant.
    pub fn value(&self, y: f64, side: Side) -> f64 {
        let (lo, hi) = self.domain();
        let y = y.clamp(lo, hi);
        // segment whose (lo, hi] contains y
        let k = self.segments.partition_point(|s| s.hi < y).min(self.segments.len() - 1);
        let left = self.segments[k].eval(y);
        match side {
            Side::Left => left,
            Side::Right => left + self.jump_at(y),
        }
    }

    fn jump_at(&self, y: f64) -> f64 {
        self.jumps
            .iter()
            .find(|j| j.y == y)
            .map_or(0.0, |j| j.size)
    }

    /// Samples `(y, F(y))` at `n` evenly spaced points of the domain, for
    /// debugging dumps.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.domain();
        (0..n)
            .map(|i| {
                let y = if n == 1 {
                    lo
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                };
                (y, self.value(y, Side::Left))
            })
            .collect()
    }
}

/// One way of approaching the infimum: the left limit at a breakpoint, the
/// right limit, or an interior vertex of a block segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinState {
    pub y: f64,
    pub side: Side,
    pub value: f64,
}

/// Closed interval `[lo, hi]`; `lo == hi` for isolated minimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// `ν(x, t)` together with the minimizer set `S(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerSet {
    pub nu: f64,
    /// Sorted disjoint components of `S`.
    pub components: Vec<Interval>,
    /// Every minimizing one-sided state, sorted by position then side.
    pub states: Vec<MinState>,
    /// Vacuum segments on which `F ≡ ν`.
    pub flat: Vec<Interval>,
}

impl MinimizerSet {
    pub fn contains(&self, y: f64, eps: f64) -> bool {
        self.components
            .iter()
            .any(|c| c.lo - eps <= y && y <= c.hi + eps)
    }
}

/// The pair `(y_*, y^*)` after the vacuum adjustment.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerSelection {
    pub nu: f64,
    pub set: MinimizerSet,
    /// `inf S`.
    pub y_min: f64,
    /// `sup S`.
    pub y_max: f64,
    /// `y_*`.
    pub lower: f64,
    /// `y^*`.
    pub upper: f64,
    /// `Left` when `ν = F(y_*)`, `Right` when `ν = F(y_* + 0)` only.
    pub branch: Side,
}

/// Precomputed per-time data: breakpoints of `rho0` with their cumulative
/// moments, so that profiles at many `x` share the work.
#[derive(Debug, Clone)]
pub struct PotentialField<'a> {
    data: &'a InitialData,
    t: f64,
    mode: SpreadMode,
    spread: f64,
    nodes: Vec<Node>,
    /// Moments on `(-inf, 0]`, the lower limit `0 + 0`.
    origin: Moments,
}

#[derive(Debug, Clone)]
struct Node {
    y: f64,
    left: Moments,
    right: Moments,
    /// Block occupying `(y, next node)`, as `(density, velocity)`.
    block_after: Option<(f64, f64)>,
}

impl<'a> PotentialField<'a> {
    pub fn new(data: &'a InitialData, t: f64, mode: SpreadMode) -> Result<Self> {
        let spread = mode.spread(t)?;
        let mut ys: Vec<f64> = data
            .pieces()
            .iter()
            .flat_map(|p| [p.start(), p.end()])
            .collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let nodes = ys
            .iter()
            .map(|&y| Node {
                y,
                left: data.cumulative(y, Side::Left),
                right: data.cumulative(y, Side::Right),
                block_after: data.pieces().iter().find_map(|p| match *p {
                    Piece::Block { a, b, density, v } if a <= y && y < b => Some((density, v)),
                    _ => None,
                }),
            })
            .collect();
        Ok(PotentialField {
            data,
            t,
            mode,
            spread,
            nodes,
            origin: data.cumulative(0.0, Side::Right),
        })
    }

    pub fn data(&self) -> &'a InitialData {
        self.data
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn mode(&self) -> SpreadMode {
        self.mode
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    fn reduced(&self, m: &Moments, x: f64) -> f64 {
        let d = m.sub(&self.origin);
        d.first + self.spread * d.momentum - x * d.mass
    }

    /// Domain guaranteed to contain every minimizer and the full support.
    fn domain(&self, x: f64) -> (f64, f64) {
        let reach = self.data.max_speed() * self.spread;
        let (h0, h1) = self.data.support_hull();
        let margin = 1.0 + reach;
        ((x - reach).min(h0) - margin, (x + reach).max(h1) + margin)
    }

    pub fn profile(&self, x: f64) -> PotentialProfile {
        let (lo, hi) = self.domain(x);
        let mut segments = Vec::with_capacity(self.nodes.len() + 1);
        let mut jumps = Vec::new();
        let first = &self.nodes[0];
        segments.push(Segment {
            lo,
            hi: first.y,
            value_lo: self.reduced(&first.left, x),
            slope_lo: 0.0,
            curvature: 0.0,
            block: false,
        });
        for (k, node) in self.nodes.iter().enumerate() {
            let fl = self.reduced(&node.left, x);
            let fr = self.reduced(&node.right, x);
            if node.right.mass > node.left.mass {
                jumps.push(Jump { y: node.y, size: fr - fl });
            }
            let next = self.nodes.get(k + 1).map_or(hi, |n| n.y);
            let (slope, curvature, block) = match node.block_after {
                Some((rho, v)) => (rho * (node.y + v * self.spread - x), 0.5 * rho, true),
                None => (0.0, 0.0, false),
            };
            segments.push(Segment {
                lo: node.y,
                hi: next,
                value_lo: fr,
                slope_lo: slope,
                curvature,
                block,
            });
        }
        PotentialProfile {
            x,
            t: self.t,
            mode: self.mode,
            spread: self.spread,
            segments,
            jumps,
        }
    }
}

/// Exact piecewise-quadratic profile of `F(·; x, t)`.
pub fn build_profile(data: &InitialData, x: f64, t: f64, mode: SpreadMode) -> Result<PotentialProfile> {
    Ok(PotentialField::new(data, t, mode)?.profile(x))
}

/// Global infimum of the profile and the set of points where it is attained
/// in the limit sense.
pub fn minimize_profile(p: &PotentialProfile, tol: &Tolerances) -> MinimizerSet {
    let mut candidates: Vec<MinState> = Vec::with_capacity(3 * p.segments.len());
    for seg in &p.segments {
        candidates.push(MinState {
            y: seg.lo,
            side: Side::Right,
            value: seg.value_lo,
        });
        candidates.push(MinState {
            y: seg.hi,
            side: Side::Left,
            value: seg.value_hi(),
        });
        if seg.curvature > 0.0 {
            let y0 = seg.lo - seg.slope_lo / (2.0 * seg.curvature);
            if seg.lo < y0 && y0 < seg.hi {
                candidates.push(MinState {
                    y: y0,
                    side: Side::Left,
                    value: seg.eval(y0),
                });
            }
        }
    }
    let nu = candidates
        .iter()
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);
    let cut = nu + tol.min_rel * (1.0 + nu.abs());
    let mut states: Vec<MinState> = candidates.into_iter().filter(|c| c.value <= cut).collect();
    states.sort_by(|a, b| {
        a.y.total_cmp(&b.y)
            .then_with(|| (a.side == Side::Right).cmp(&(b.side == Side::Right)))
    });
    states.dedup_by(|a, b| a.y == b.y && a.side == b.side);

    let mut flat: Vec<Interval> = p
        .segments
        .iter()
        .filter(|s| !s.block && s.value_lo <= cut)
        .map(|s| Interval { lo: s.lo, hi: s.hi })
        .collect();
    prune_near_vertices(p, nu, &mut states, &mut flat);
    let mut pieces: Vec<Interval> = states
        .iter()
        .map(|s| Interval { lo: s.y, hi: s.y })
        .chain(flat.iter().copied())
        .collect();
    MinimizerSet {
        nu,
        components: merge_intervals(&mut pieces),
        states,
        flat,
    }
}

/// The tie tolerance admits states whose excess over an interior vertex is
/// tiny but exactly known from the local quadratic. Around each admitted
/// vertex, compares the neighbouring one-sided states by their local
/// differences and drops those that are provably higher.
fn prune_near_vertices(p: &PotentialProfile, nu: f64, states: &mut Vec<MinState>, flat: &mut Vec<Interval>) {
    let n = p.segments.len();
    let scale = 1.0 + p.x.abs() + p.domain().0.abs().max(p.domain().1.abs());
    let ulp = 1e-15 * scale;
    let jump_err = |j: f64| if j == 0.0 { 0.0 } else { 1e-14 * (1.0 + nu.abs()) };
    let has = |states: &[MinState], y: f64, side: Side| states.iter().any(|s| s.y == y && s.side == side);
    for (k, seg) in p.segments.iter().enumerate() {
        if !seg.block || seg.curvature <= 0.0 {
            continue;
        }
        let c = seg.curvature;
        let y0 = seg.lo - seg.slope_lo / (2.0 * c);
        if !(seg.lo < y0 && y0 < seg.hi) || !has(states, y0, Side::Left) {
            continue;
        }
        let (dl, dh) = (y0 - seg.lo, seg.hi - y0);
        let (jl, jh) = (p.jump_at(seg.lo), p.jump_at(seg.hi));
        let el = 4.0 * c * dl * ulp;
        let eh = 4.0 * c * dh * ulp;
        // (y, side, excess over the vertex, error bound)
        let group = [
            (y0, Side::Left, 0.0, 0.0),
            (seg.lo, Side::Right, c * dl * dl, el),
            (seg.lo, Side::Left, c * dl * dl - jl, el + jump_err(jl)),
            (seg.hi, Side::Left, c * dh * dh, eh),
            (seg.hi, Side::Right, c * dh * dh + jh, eh + jump_err(jh)),
        ];
        let present: Vec<_> = group.iter().filter(|g| has(states, g.0, g.1)).collect();
        let flat_before = k > 0 && !p.segments[k - 1].block && flat.iter().any(|f| f.hi == seg.lo);
        let flat_after = k + 1 < n && !p.segments[k + 1].block && flat.iter().any(|f| f.lo == seg.hi);
        let best = present
            .iter()
            .map(|g| g.2 + g.3)
            .chain(flat_before.then_some(group[2].2 + group[2].3))
            .chain(flat_after.then_some(group[4].2 + group[4].3))
            .fold(f64::INFINITY, f64::min);
        let dropped: Vec<(f64, Side)> = group
            .iter()
            .filter(|g| g.2 - g.3 > best)
            .map(|g| (g.0, g.1))
            .collect();
        states.retain(|s| !dropped.contains(&(s.y, s.side)));
        if flat_before && dropped.contains(&(seg.lo, Side::Left)) {
            let lo = p.segments[k - 1].lo;
            flat.retain(|f| f.hi != seg.lo);
            states.retain(|s| !(s.y == lo && s.side == Side::Right));
        }
        if flat_after && dropped.contains(&(seg.hi, Side::Right)) {
            let hi = p.segments[k + 1].hi;
            flat.retain(|f| f.lo != seg.hi);
            states.retain(|s| !(s.y == hi && s.side == Side::Left));
        }
    }
}

fn merge_intervals(v: &mut [Interval]) -> Vec<Interval> {
    v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::new();
    for iv in v.iter() {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(*iv),
        }
    }
    out
}

/// Applies the vacuum substitution to a set of components and returns
/// `(inf S, sup S, y_*, y^*)`.
pub(crate) fn select_pair(data: &InitialData, components: &[Interval], eps: f64) -> (f64, f64, f64, f64) {
    let first = components[0];
    let last = *components.last().unwrap();
    let (y_min, y_max) = (first.lo, last.hi);

    // A-set: vacuum immediately right of inf S, swallowed entirely by S
    let lower_m = match data.next_support_after_gap(y_min) {
        Some(next) if first.hi >= next - eps => next,
        _ => y_min,
    };
    // B-set: the mirror image at sup S
    let upper_m = match data.prev_support_before_gap(y_max) {
        Some(prev) if last.lo <= prev + eps => prev,
        _ => y_max,
    };
    (y_min, y_max, lower_m.min(upper_m), upper_m)
}

/// Picks `y_*` and `y^*` from `S(x, t)` and decides which one-sided value of
/// `F` at `y_*` realises `ν`.
pub fn select_minimizers(
    data: &InitialData,
    profile: &PotentialProfile,
    set: MinimizerSet,
    tol: &Tolerances,
) -> Result<MinimizerSelection> {
    if set.components.is_empty() {
        return Err(Error::Internal(format!(
            "empty minimizer set at x = {}, t = {}",
            profile.x, profile.t
        )));
    }
    let (y_min, y_max, lower, upper) = select_pair(data, &set.components, tol.pos);
    let cut = set.nu + tol.min_rel * (1.0 + set.nu.abs());
    let state = |side| set.states.iter().any(|s| s.y == lower && s.side == side);
    let branch = if data.atom_at(lower).is_some()
        && !state(Side::Left)
        && (state(Side::Right) || profile.value(lower, Side::Left) > cut)
    {
        Side::Right
    } else {
        Side::Left
    };
    Ok(MinimizerSelection {
        nu: set.nu,
        set,
        y_min,
        y_max,
        lower,
        upper,
        branch,
    })
}
