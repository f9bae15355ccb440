//! Distances between finite measures on the line, computed from their
//! cumulative mass functions.
//!
//! Both functions are piecewise linear with jumps, so the `L¹` norm of the
//! difference is integrated exactly, splitting cells where it changes sign.

use crate::measure::Piece;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    /// `∫ |F₁ - F₂| dx`, the Wasserstein-1 distance for equal total masses.
    pub w1: f64,
    /// `sup |F₁ - F₂|` over both one-sided values.
    pub sup_cdf: f64,
}

/// Breakpoints of `F₁ - F₂` with the jump there and the change of slope
/// after it.
fn events(a: &[Piece], b: &[Piece]) -> Vec<(f64, f64, f64)> {
    let mut ev = Vec::with_capacity(2 * (a.len() + b.len()));
    for (list, sign) in [(a, 1.0), (b, -1.0)] {
        for p in list {
            match *p {
                Piece::Atom { x, mass, .. } => ev.push((x, sign * mass, 0.0)),
                Piece::Block { a, b, density, .. } => {
                    ev.push((a, 0.0, sign * density));
                    ev.push((b, 0.0, -sign * density));
                }
            }
        }
    }
    ev.sort_by(|p, q| p.0.total_cmp(&q.0));
    ev
}

/// `∫₀ʰ |d0 + k s| ds`.
fn abs_linear_integral(d0: f64, k: f64, h: f64) -> f64 {
    let d1 = d0 + k * h;
    if d0 * d1 >= 0.0 {
        0.5 * (d0.abs() + d1.abs()) * h
    } else {
        let r = d0 / (d0 - d1) * h;
        0.5 * (d0.abs() * r + d1.abs() * (h - r))
    }
}

pub fn distances(a: &[Piece], b: &[Piece]) -> Distances {
    let ev = events(a, b);
    let (mut value, mut slope) = (0.0f64, 0.0f64);
    let (mut w1, mut sup) = (0.0f64, 0.0f64);
    let mut i = 0;
    while i < ev.len() {
        let x = ev[i].0;
        sup = sup.max(value.abs());
        while i < ev.len() && ev[i].0 == x {
            value += ev[i].1;
            slope += ev[i].2;
            i += 1;
        }
        sup = sup.max(value.abs());
        if let Some(&(next, _, _)) = ev.get(i) {
            let h = next - x;
            w1 += abs_linear_integral(value, slope, h);
            value += slope * h;
        }
    }
    Distances { w1, sup_cdf: sup }
}

pub fn w1(a: &[Piece], b: &[Piece]) -> f64 {
    distances(a, b).w1
}

pub fn sup_cdf(a: &[Piece], b: &[Piece]) -> f64 {
    distances(a, b).sup_cdf
}
