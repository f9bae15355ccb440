#![allow(dead_code)]

use pressureless::{InitialData, Piece};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Up to `max` atoms with distinct positions, masses in `[0.1, 2]` and
/// speeds at most `vmax`.
pub fn atoms(max: usize, vmax: f64) -> impl Strategy<Value = InitialData> {
    prop::collection::vec((0.05f64..1.5, 0.1f64..2.0, -vmax..vmax), 1..=max).prop_map(|spec| {
        let mut x = -1.0;
        let pieces = spec
            .into_iter()
            .map(|(gap, mass, v)| {
                x += gap;
                Piece::atom(x, mass, v)
            })
            .collect();
        InitialData::new(pieces).unwrap()
    })
}

/// Atoms and blocks, disjoint, possibly touching.
pub fn mixed(max: usize) -> impl Strategy<Value = InitialData> {
    prop::collection::vec((0.0f64..1.0, any::<bool>(), 0.1f64..1.0, 0.1f64..2.0, -2.0f64..2.0), 1..=max).prop_map(
        |spec| {
            let mut x = -2.0;
            let mut pieces = Vec::new();
            for (gap, atom, width, weight, v) in spec {
                // atoms never touch a neighbour exactly
                x += if atom { gap + 0.05 } else { gap };
                if atom {
                    pieces.push(Piece::atom(x, weight, v));
                    x += 0.05;
                } else {
                    pieces.push(Piece::block(x, x + width, weight, v));
                    x += width;
                }
            }
            InitialData::new(pieces).unwrap()
        },
    )
}

/// Reproducible atomic configuration from a seed.
pub fn seeded_atoms(seed: u64, max: usize, vmax: f64) -> InitialData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max);
    let mut x = -2.0;
    let pieces = (0..n)
        .map(|_| {
            x += rng.random_range(0.05..1.0);
            Piece::atom(x, rng.random_range(0.1..=2.0), rng.random_range(-vmax..=vmax))
        })
        .collect();
    InitialData::new(pieces).unwrap()
}

/// Reproducible mix of blocks and atoms from a seed.
pub fn seeded_mixed(seed: u64, max: usize) -> InitialData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max);
    let mut x = -2.0;
    let mut pieces = Vec::new();
    for k in 0..n {
        x += rng.random_range(0.1..0.8);
        let v = rng.random_range(-1.5..=1.5);
        if k % 2 == 0 {
            let w = rng.random_range(0.3..1.0);
            pieces.push(Piece::block(x, x + w, rng.random_range(0.2..=1.5), v));
            x += w;
        } else {
            pieces.push(Piece::atom(x, rng.random_range(0.1..=1.0), v));
        }
    }
    InitialData::new(pieces).unwrap()
}
