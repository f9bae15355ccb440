//! Event-driven sticky particles with damping.
//!
//! Trajectories are affine in `s = a(t)`, so collisions are found by solving
//! linear equations in `s` rather than by time stepping.

use std::io::Write;

use crate::error::{Error, Result};
use crate::measure::{InitialData, Piece, Side};
use crate::potential::SpreadMode;

/// Collision tolerance in `s`.
pub const EPS_EVENT: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub x: f64,
    pub mass: f64,
    /// Momentum-weighted initial velocity of the constituents.
    pub v0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    particles: Vec<Particle>,
    t: f64,
    s: f64,
    mode: SpreadMode,
    /// Initial mass strictly left of 0, the origin of the cdf.
    base_mass: f64,
}

/// Blocks become `n_per_block` equal-mass particles at their mass midpoints;
/// atoms are kept.
pub fn discretize(data: &InitialData, n_per_block: usize, mode: SpreadMode) -> Result<ParticleState> {
    if n_per_block == 0 {
        return Err(Error::Config("n_per_block must be at least 1".into()));
    }
    let mut particles = Vec::new();
    for p in data.pieces() {
        match *p {
            Piece::Atom { x, mass, v } => particles.push(Particle { x, mass, v0: v }),
            Piece::Block { a, b, density, v } => {
                let h = (b - a) / n_per_block as f64;
                let mass = density * (b - a) / n_per_block as f64;
                particles.extend((0..n_per_block).map(|k| Particle {
                    x: a + (k as f64 + 0.5) * h,
                    mass,
                    v0: v,
                }));
            }
        }
    }
    Ok(ParticleState {
        particles,
        t: 0.0,
        s: 0.0,
        mode,
        base_mass: data.base().mass,
    })
}

impl ParticleState {
    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn mode(&self) -> SpreadMode {
        self.mode
    }

    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.mass).sum()
    }

    /// `Σ m v0`, invariant under merges.
    pub fn total_v0_momentum(&self) -> f64 {
        self.particles.iter().map(|p| p.mass * p.v0).sum()
    }

    /// Current velocity of a particle.
    pub fn velocity(&self, p: &Particle) -> f64 {
        p.v0 * self.mode.velocity_factor(self.t)
    }

    /// Advances to `t_end`, merging particles as they meet.
    pub fn evolve(&self, t_end: f64) -> Result<ParticleState> {
        if !(t_end >= self.t) || !t_end.is_finite() {
            return Err(Error::BadTime {
                t: t_end,
                expected: "finite and not before the current time",
            });
        }
        let s_end = self.mode.spread(t_end)?;
        let mut ps = self.particles.clone();
        let mut s = self.s;
        loop {
            let times: Vec<f64> = ps
                .windows(2)
                .map(|w| {
                    let closing = w[0].v0 - w[1].v0;
                    if closing > 0.0 {
                        (w[1].x - w[0].x) / closing
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            let ds = times.iter().copied().fold(f64::INFINITY, f64::min);
            if !(s + ds <= s_end) {
                break;
            }
            let cut = ds + EPS_EVENT * (1.0 + s + ds);
            let mut merged: Vec<Particle> = Vec::with_capacity(ps.len());
            let mut i = 0;
            while i < ps.len() {
                let mut j = i;
                while j < times.len() && times[j] <= cut {
                    j += 1;
                }
                let group = &ps[i..=j];
                let mass: f64 = group.iter().map(|p| p.mass).sum();
                let mom: f64 = group.iter().map(|p| p.mass * p.v0).sum();
                let x: f64 = group.iter().map(|p| p.mass * (p.x + p.v0 * ds)).sum::<f64>() / mass;
                merged.push(Particle {
                    x,
                    mass,
                    v0: if j > i { mom / mass } else { group[0].v0 },
                });
                i = j + 1;
            }
            ps = merged;
            s += ds;
        }
        for p in &mut ps {
            p.x += p.v0 * (s_end - s);
        }
        Ok(ParticleState {
            particles: ps,
            t: t_end,
            s: s_end,
            mode: self.mode,
            base_mass: self.base_mass,
        })
    }

    /// Mass of particles left of `x` (`Left`) or at or left of `x`
    /// (`Right`), minus the initial mass left of 0.
    pub fn oracle_cdf(&self, x: f64, side: Side) -> f64 {
        let below: f64 = self
            .particles
            .iter()
            .filter(|p| match side {
                Side::Left => p.x < x,
                Side::Right => p.x <= x,
            })
            .map(|p| p.mass)
            .sum();
        below - self.base_mass
    }

    /// Particles as atoms carrying their current velocities.
    pub fn to_pieces(&self) -> Vec<Piece> {
        self.particles
            .iter()
            .map(|p| Piece::atom(p.x, p.mass, self.velocity(p)))
            .collect()
    }

    /// Writes `t,x,mass,velocity` rows.
    pub fn write_csv<W: Write>(&self, mut w: W, header: bool) -> Result<()> {
        if header {
            writeln!(w, "t,x,mass,velocity")?;
        }
        for p in &self.particles {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t,
                p.x,
                p.mass,
                self.velocity(p)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> InitialData {
        InitialData::new(vec![Piece::atom(-1.0, 1.0, 1.0), Piece::atom(1.0, 1.0, -1.0)]).unwrap()
    }

    #[test]
    fn discretize_examples() {
        let st = discretize(&pair(), 7, SpreadMode::Undamped).unwrap();
        assert_eq!(st.particles().len(), 2);
        assert_eq!(st.particles()[0], Particle { x: -1.0, mass: 1.0, v0: 1.0 });

        let d = InitialData::new(vec![Piece::block(0.0, 2.0, 1.0, 0.0)]).unwrap();
        let st = discretize(&d, 4, SpreadMode::Undamped).unwrap();
        let xs: Vec<f64> = st.particles().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.25, 0.75, 1.25, 1.75]);
        assert!(st.particles().iter().all(|p| p.mass == 0.5));

        let d = InitialData::new(vec![
            Piece::block(-2.0, -1.0, 1.0, 1.5),
            Piece::atom(0.0, 0.5, 0.0),
            Piece::block(1.0, 2.0, 0.5, -1.0),
        ])
        .unwrap();
        let st = discretize(&d, 9, SpreadMode::Undamped).unwrap();
        assert!((st.total_mass() - d.total_mass()).abs() < 1e-12);
        assert!((st.total_v0_momentum() - d.total_momentum()).abs() < 1e-12);
        assert!(discretize(&d, 0, SpreadMode::Undamped).is_err());
    }

    #[test]
    fn evolve_examples() {
        let st = discretize(&pair(), 1, SpreadMode::damped(2.0).unwrap()).unwrap();
        let tc = 2.0 * 2f64.ln();
        let after = st.evolve(tc + 1e-9).unwrap();
        assert_eq!(after.particles().len(), 1);
        let p = after.particles()[0];
        assert!(p.x.abs() < 1e-15 && p.mass == 2.0 && p.v0 == 0.0);
        assert_eq!(st.evolve(tc - 1e-9).unwrap().particles().len(), 2);

        let st = discretize(&pair(), 1, SpreadMode::damped(1.0).unwrap()).unwrap();
        for t in [1.0, 20.0, 100.0, 1e6] {
            assert_eq!(st.evolve(t).unwrap().particles().len(), 2, "t = {t}");
        }

        let d = InitialData::new(vec![Piece::atom(0.3, 1.0, -0.4)]).unwrap();
        let mode = SpreadMode::damped(1.5).unwrap();
        let end = discretize(&d, 1, mode).unwrap().evolve(2.0).unwrap();
        assert!((end.particles()[0].x - (0.3 - 0.4 * mode.spread(2.0).unwrap())).abs() < 1e-15);
        assert!(discretize(&d, 1, mode).unwrap().evolve(2.0).unwrap().evolve(1.0).is_err());
    }

    #[test]
    fn triple_collision_merges_once() {
        let d = InitialData::new(vec![
            Piece::atom(-1.0, 1.0, 1.0),
            Piece::atom(0.0, 2.0, 0.0),
            Piece::atom(1.0, 1.0, -1.0),
        ])
        .unwrap();
        let st = discretize(&d, 1, SpreadMode::Undamped).unwrap().evolve(1.0).unwrap();
        assert_eq!(st.particles().len(), 1);
        assert_eq!(st.particles()[0].mass, 4.0);
    }

    #[test]
    fn oracle_cdf_examples() {
        let st = discretize(&pair(), 1, SpreadMode::damped(2.0).unwrap())
            .unwrap()
            .evolve(2.0)
            .unwrap();
        assert_eq!(st.oracle_cdf(0.5, Side::Left), 1.0);
        assert_eq!(st.oracle_cdf(-0.5, Side::Left), -1.0);

        let neg = InitialData::new(vec![Piece::atom(-3.0, 1.0, 0.0), Piece::atom(-2.0, 0.5, 0.0)]).unwrap();
        let st = discretize(&neg, 1, SpreadMode::Undamped).unwrap();
        assert_eq!(st.oracle_cdf(-10.0, Side::Left), -1.5);
        let pos = InitialData::new(vec![Piece::atom(0.0, 1.0, 0.0), Piece::atom(2.0, 0.5, 0.0)]).unwrap();
        let st = discretize(&pos, 1, SpreadMode::Undamped).unwrap();
        assert_eq!(st.oracle_cdf(10.0, Side::Left), 1.5);
    }

    #[test]
    fn csv_dump() {
        let st = discretize(&pair(), 1, SpreadMode::Undamped).unwrap();
        let mut buf = Vec::new();
        st.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("t,x,mass,velocity\n"));
    }
}
