//! Initial data: a finite Radon measure made of atoms and constant-density
//! blocks, each carrying a constant velocity.
//!
//! Cumulative quantities follow the half-open convention
//! `m0(x) = rho0([0, x))` for `x >= 0` and `m0(x) = -rho0([x, 0))` for
//! `x < 0`. Every integral is evaluated in closed form per piece.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One constituent of the initial measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Piece {
    /// Point mass at `x`.
    Atom { x: f64, mass: f64, v: f64 },
    /// Uniform density on the half-open interval `[a, b)`.
    Block { a: f64, b: f64, density: f64, v: f64 },
}

impl Piece {
    pub fn atom(x: f64, mass: f64, v: f64) -> Self {
        Piece::Atom { x, mass, v }
    }

    pub fn block(a: f64, b: f64, density: f64, v: f64) -> Self {
        Piece::Block { a, b, density, v }
    }

    pub fn start(&self) -> f64 {
        match *self {
            Piece::Atom { x, .. } => x,
            Piece::Block { a, .. } => a,
        }
    }

    pub fn end(&self) -> f64 {
        match *self {
            Piece::Atom { x, .. } => x,
            Piece::Block { b, .. } => b,
        }
    }

    pub fn velocity(&self) -> f64 {
        match *self {
            Piece::Atom { v, .. } | Piece::Block { v, .. } => v,
        }
    }

    pub fn mass(&self) -> f64 {
        match *self {
            Piece::Atom { mass, .. } => mass,
            Piece::Block { a, b, density, .. } => density * (b - a),
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Piece::Atom { .. })
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |reason: &str| Error::InvalidPiece {
            index,
            reason: reason.to_string(),
        };
        match *self {
            Piece::Atom { x, mass, v } => {
                if !(x.is_finite() && mass.is_finite() && v.is_finite()) {
                    return Err(bad("non-finite field"));
                }
                if mass <= 0.0 {
                    return Err(bad("atom mass must be positive"));
                }
            }
            Piece::Block { a, b, density, v } => {
                if !(a.is_finite() && b.is_finite() && density.is_finite() && v.is_finite()) {
                    return Err(bad("non-finite field"));
                }
                if a >= b {
                    return Err(bad("block requires a < b"));
                }
                if density <= 0.0 {
                    return Err(bad("block density must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Moments of the part of this piece lying in `(-inf, y)` (`Side::Left`)
    /// or `(-inf, y]` (`Side::Right`).
    fn moments_below(&self, y: f64, side: Side) -> Moments {
        match *self {
            Piece::Atom { x, mass, v } => {
                let inside = match side {
                    Side::Left => x < y,
                    Side::Right => x <= y,
                };
                if inside {
                    Moments::atom(x, mass, v)
                } else {
                    Moments::default()
                }
            }
            Piece::Block { a, b, density, v } => {
                if y <= a {
                    Moments::default()
                } else {
                    Moments::block(a, y.min(b), density, v)
                }
            }
        }
    }
}

/// Which one-sided limit of a cumulative quantity is meant: `Left` is the
/// value at `y - 0` (an atom at `y` excluded), `Right` at `y + 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Integrand for [`InitialData::stieltjes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    One,
    Velocity,
    VelocitySquared,
    Position,
    PositionVelocity,
}

/// Endpoint handling for Stieltjes integrals: whether an atom sitting exactly
/// on an endpoint is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoints {
    pub include_lo: bool,
    pub include_hi: bool,
}

impl Endpoints {
    pub const OPEN: Endpoints = Endpoints {
        include_lo: false,
        include_hi: false,
    };
    pub const CLOSED: Endpoints = Endpoints {
        include_lo: true,
        include_hi: true,
    };
}

/// The five integrals `∫ w dm0` for the weights in [`Weight`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub first: f64,
    pub first_momentum: f64,
}

impl Moments {
    fn atom(x: f64, mass: f64, v: f64) -> Self {
        Moments {
            mass,
            momentum: mass * v,
            energy: mass * v * v,
            first: mass * x,
            first_momentum: mass * x * v,
        }
    }

    fn block(a: f64, b: f64, density: f64, v: f64) -> Self {
        let mass = density * (b - a);
        let first = density * 0.5 * (b - a) * (b + a);
        Moments {
            mass,
            momentum: mass * v,
            energy: mass * v * v,
            first,
            first_momentum: first * v,
        }
    }

    pub fn get(&self, weight: Weight) -> f64 {
        match weight {
            Weight::One => self.mass,
            Weight::Velocity => self.momentum,
            Weight::VelocitySquared => self.energy,
            Weight::Position => self.first,
            Weight::PositionVelocity => self.first_momentum,
        }
    }

    fn add(&self, o: &Moments) -> Moments {
        Moments {
            mass: self.mass + o.mass,
            momentum: self.momentum + o.momentum,
            energy: self.energy + o.energy,
            first: self.first + o.first,
            first_momentum: self.first_momentum + o.first_momentum,
        }
    }

    pub fn sub(&self, o: &Moments) -> Moments {
        Moments {
            mass: self.mass - o.mass,
            momentum: self.momentum - o.momentum,
            energy: self.energy - o.energy,
            first: self.first - o.first,
            first_momentum: self.first_momentum - o.first_momentum,
        }
    }
}

/// Validated initial data `(rho0, u0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pieces: Vec<Piece>,
    /// `prefix[i]` holds the moments of `pieces[..i]`.
    prefix: Vec<Moments>,
    max_speed: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct PiecesFile {
    pieces: Vec<Piece>,
}

impl InitialData {
    /// Sorts, validates and indexes a list of pieces. Errors carry the index
    /// of the offending piece in the caller's ordering.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptyData);
        }
        for (i, p) in pieces.iter().enumerate() {
            p.validate(i)?;
        }
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        // atoms sort before a block starting at the same point
        order.sort_by(|&i, &j| {
            let (p, q) = (&pieces[i], &pieces[j]);
            p.start()
                .total_cmp(&q.start())
                .then_with(|| q.is_atom().cmp(&p.is_atom()))
        });
        for w in order.windows(2) {
            let (p, q) = (&pieces[w[0]], &pieces[w[1]]);
            let ok = if p.is_atom() && q.is_atom() {
                p.end() < q.start()
            } else {
                p.end() <= q.start()
            };
            if !ok {
                return Err(Error::Overlap {
                    index: w[1],
                    other: w[0],
                });
            }
        }
        let sorted: Vec<Piece> = order.iter().map(|&i| pieces[i]).collect();
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        let mut acc = Moments::default();
        prefix.push(acc);
        for p in &sorted {
            let m = p.moments_below(f64::INFINITY, Side::Right);
            acc = acc.add(&m);
            prefix.push(acc);
        }
        let max_speed = sorted.iter().map(|p| p.velocity().abs()).fold(0.0, f64::max);
        Ok(InitialData {
            pieces: sorted,
            prefix,
            max_speed,
        })
    }

    /// Parses `{"pieces": [...]}`; the pieces need not be sorted.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: PiecesFile = serde_json::from_str(text)?;
        Self::new(file.pieces)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PiecesFile {
            pieces: self.pieces.clone(),
        })
        .expect("pieces serialize")
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `U = ||u0||_inf` over the support.
    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    pub fn total(&self) -> Moments {
        *self.prefix.last().unwrap()
    }

    pub fn total_mass(&self) -> f64 {
        self.total().mass
    }

    pub fn total_momentum(&self) -> f64 {
        self.total().momentum
    }

    /// Closed convex hull of the support.
    pub fn support_hull(&self) -> (f64, f64) {
        let lo = self.pieces[0].start();
        let hi = self.pieces.iter().map(Piece::end).fold(f64::MIN, f64::max);
        (lo, hi)
    }

    /// Moments of `rho0` restricted to `(-inf, y)` or `(-inf, y]`.
    pub fn cumulative(&self, y: f64, side: Side) -> Moments {
        // pieces[..k] start strictly before y (or at y for atoms on the right side)
        let k = self.pieces.partition_point(|p| p.start() < y);
        let mut acc = if k == 0 {
            Moments::default()
        } else {
            // all but the last of these lie entirely below y
            self.prefix[k - 1].add(&self.pieces[k - 1].moments_below(y, side))
        };
        if side == Side::Right {
            // atoms exactly at y
            for p in &self.pieces[k..] {
                if p.start() > y {
                    break;
                }
                acc = acc.add(&p.moments_below(y, side));
            }
        }
        acc
    }

    /// `m0(y - 0)` or `m0(y + 0)`.
    pub fn cdf(&self, y: f64, side: Side) -> f64 {
        self.cumulative(y, side).mass - self.base().mass
    }

    /// Moments of `rho0` on `(-inf, 0)`; the reference for signed cumulative
    /// quantities.
    pub fn base(&self) -> Moments {
        self.cumulative(0.0, Side::Left)
    }

    /// `∫ w dm0` over the interval from `y1` to `y2`, with the atoms at the
    /// endpoints included according to `ends`.
    pub fn stieltjes(&self, y1: f64, y2: f64, ends: Endpoints, weight: Weight) -> Result<f64> {
        if !(y1 <= y2) {
            return Err(Error::ReversedInterval { lo: y1, hi: y2 });
        }
        let lo_side = if ends.include_lo { Side::Left } else { Side::Right };
        let hi_side = if ends.include_hi { Side::Right } else { Side::Left };
        if y1 == y2 && !(ends.include_lo && ends.include_hi) {
            return Ok(0.0);
        }
        let hi = self.cumulative(y2, hi_side);
        let lo = self.cumulative(y1, lo_side);
        Ok(hi.sub(&lo).get(weight))
    }

    /// Mass of the atom sitting exactly at `y`, if any.
    pub fn atom_at(&self, y: f64) -> Option<(f64, f64)> {
        let k = self.pieces.partition_point(|p| p.start() < y);
        self.pieces[k..]
            .iter()
            .take_while(|p| p.start() == y)
            .find_map(|p| match *p {
                Piece::Atom { mass, v, .. } => Some((mass, v)),
                _ => None,
            })
    }

    /// Is `y` in the closed support of `rho0`?
    pub fn in_support(&self, y: f64) -> bool {
        self.pieces.iter().any(|p| match *p {
            Piece::Atom { x, .. } => x == y,
            Piece::Block { a, b, .. } => a <= y && y <= b,
        })
    }

    /// If `rho0` vanishes on some interval `(y, y + e)`, the first support
    /// point to the right of `y`. `None` when a block covers `y` or nothing
    /// lies to the right.
    pub fn next_support_after_gap(&self, y: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for p in &self.pieces {
            match *p {
                Piece::Block { a, b, .. } if a <= y && y < b => return None,
                _ => {}
            }
            let s = p.start();
            if s > y {
                best = Some(best.map_or(s, |c: f64| c.min(s)));
            }
        }
        best
    }

    /// Mirror of [`Self::next_support_after_gap`]: the last support point to
    /// the left of `y` when `rho0` vanishes on some `(y - e, y)`.
    pub fn prev_support_before_gap(&self, y: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for p in &self.pieces {
            match *p {
                Piece::Block { a, b, .. } if a < y && y <= b => return None,
                _ => {}
            }
            let e = p.end();
            if e < y {
                best = Some(best.map_or(e, |c: f64| c.max(e)));
            }
        }
        best
    }

    /// Velocity of the piece carrying `y` (0 in vacuum). For an atom on a block
    /// boundary the atom's velocity wins.
    pub fn velocity_at(&self, y: f64) -> f64 {
        if let Some((_, v)) = self.atom_at(y) {
            return v;
        }
        self.pieces
            .iter()
            .find_map(|p| match *p {
                Piece::Block { a, b, v, .. } if a <= y && y < b => Some(v),
                _ => None,
            })
            .unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_examples() {
        let d = InitialData::new(vec![Piece::atom(0.0, 1.0, 0.0)]).unwrap();
        assert_eq!(d.max_speed(), 0.0);
        assert_eq!(d.total_mass(), 1.0);

        let d = InitialData::new(vec![Piece::atom(1.0, 1.0, -1.0), Piece::atom(-1.0, 1.0, 1.0)])
            .unwrap();
        assert_eq!(d.max_speed(), 1.0);
        assert_eq!(d.pieces()[0].start(), -1.0);

        let err = InitialData::new(vec![
            Piece::block(0.0, 2.0, 1.0, 0.0),
            Piece::atom(1.0, 1.0, 0.0),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Overlap { index: 1, .. }), "{err}");
    }

    #[test]
    fn build_rejects_bad_pieces() {
        assert!(matches!(InitialData::new(vec![]), Err(Error::EmptyData)));
        let e = InitialData::new(vec![Piece::atom(0.0, 1.0, 0.0), Piece::atom(2.0, 0.0, 0.0)]);
        assert!(matches!(e, Err(Error::InvalidPiece { index: 1, .. })));
        let e = InitialData::new(vec![Piece::block(1.0, 1.0, 1.0, 0.0)]);
        assert!(matches!(e, Err(Error::InvalidPiece { index: 0, .. })));
        let e = InitialData::new(vec![Piece::block(0.0, 1.0, -1.0, 0.0)]);
        assert!(matches!(e, Err(Error::InvalidPiece { index: 0, .. })));
        let e = InitialData::new(vec![Piece::atom(1.0, 1.0, 0.0), Piece::atom(1.0, 2.0, 0.0)]);
        assert!(matches!(e, Err(Error::Overlap { .. })));
    }

    #[test]
    fn atoms_on_block_edges_are_allowed() {
        let d = InitialData::new(vec![
            Piece::block(0.0, 1.0, 1.0, 0.0),
            Piece::atom(1.0, 2.0, 0.5),
            Piece::atom(0.0, 3.0, -0.5),
            Piece::block(1.0, 2.0, 1.0, 0.0),
        ])
        .unwrap();
        assert!(d.pieces()[0].is_atom());
        assert_eq!(d.total_mass(), 7.0);
        assert_eq!(d.cdf(0.0, Side::Left), 0.0);
        assert_eq!(d.cdf(0.0, Side::Right), 3.0);
        assert_eq!(d.cdf(1.0, Side::Left), 4.0);
        assert_eq!(d.cdf(1.0, Side::Right), 6.0);
    }

    #[test]
    fn cdf_examples() {
        let d = InitialData::new(vec![Piece::block(0.0, 2.0, 1.0, 0.0)]).unwrap();
        assert_eq!(d.cdf(1.0, Side::Left), 1.0);
        let d = InitialData::new(vec![Piece::block(-1.0, 0.0, 1.0, 0.0)]).unwrap();
        assert_eq!(d.cdf(-0.5, Side::Left), -0.5);
        let d = InitialData::new(vec![Piece::atom(1.0, 2.0, 0.0)]).unwrap();
        assert_eq!(d.cdf(1.0, Side::Left), 0.0);
        assert_eq!(d.cdf(1.0, Side::Right), 2.0);
    }

    #[test]
    fn stieltjes_examples() {
        let d = InitialData::new(vec![Piece::atom(1.0, 1.0, 2.0)]).unwrap();
        let v = d.stieltjes(0.0, 3.0, Endpoints::OPEN, Weight::Velocity).unwrap();
        assert_eq!(v, 2.0);
        let d = InitialData::new(vec![Piece::block(0.0, 2.0, 1.0, 3.0)]).unwrap();
        let v = d.stieltjes(0.0, 2.0, Endpoints::OPEN, Weight::Position).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
        assert!(matches!(
            d.stieltjes(1.0, 0.0, Endpoints::OPEN, Weight::One),
            Err(Error::ReversedInterval { .. })
        ));
    }

    #[test]
    fn endpoint_flags_control_atoms() {
        let d = InitialData::new(vec![Piece::atom(1.0, 2.0, 1.0), Piece::atom(3.0, 5.0, 1.0)])
            .unwrap();
        let f = |lo, hi| {
            d.stieltjes(1.0, 3.0, Endpoints { include_lo: lo, include_hi: hi }, Weight::One)
                .unwrap()
        };
        assert_eq!(f(false, false), 0.0);
        assert_eq!(f(true, false), 2.0);
        assert_eq!(f(false, true), 5.0);
        assert_eq!(f(true, true), 7.0);
        let p = d.stieltjes(1.0, 1.0, Endpoints::CLOSED, Weight::One).unwrap();
        assert_eq!(p, 2.0);
    }

    #[test]
    fn gap_queries() {
        let d = InitialData::new(vec![
            Piece::atom(-1.0, 1.0, 0.0),
            Piece::block(0.0, 1.0, 1.0, 0.0),
            Piece::atom(3.0, 1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(d.next_support_after_gap(-5.0), Some(-1.0));
        assert_eq!(d.next_support_after_gap(-1.0), Some(0.0));
        assert_eq!(d.next_support_after_gap(0.5), None);
        assert_eq!(d.next_support_after_gap(1.0), Some(3.0));
        assert_eq!(d.next_support_after_gap(3.0), None);
        assert_eq!(d.prev_support_before_gap(3.0), Some(1.0));
        assert_eq!(d.prev_support_before_gap(1.0), None);
        assert_eq!(d.prev_support_before_gap(0.0), Some(-1.0));
        assert_eq!(d.prev_support_before_gap(-1.0), None);
        assert!(d.in_support(1.0));
        assert!(!d.in_support(2.0));
    }

    #[test]
    fn json_schema_round_trip() {
        let text = r#"{"pieces":[{"kind":"block","a":0,"b":2,"density":1,"v":0.5},
                        {"kind":"atom","x":-1,"mass":2,"v":1}]}"#;
        let d = InitialData::from_json(text).unwrap();
        assert_eq!(d.pieces()[0], Piece::atom(-1.0, 2.0, 1.0));
        assert_eq!(InitialData::from_json(&d.to_json()).unwrap(), d);
        assert!(InitialData::from_json(r#"{"pieces":[{"kind":"atom","x":0}]}"#).is_err());
    }
}
