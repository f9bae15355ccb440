//! Reference configurations used by the verification battery and tests.

use crate::measure::{InitialData, Piece};
use crate::potential::SpreadMode;

#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub name: &'static str,
    pub data: InitialData,
}

fn case(name: &'static str, pieces: Vec<Piece>) -> GoldenCase {
    GoldenCase {
        name,
        data: InitialData::new(pieces).expect("golden data is valid"),
    }
}

pub fn single_atom() -> GoldenCase {
    case("single_atom", vec![Piece::atom(0.0, 1.0, 1.0)])
}

/// Two unit atoms approaching each other; they meet at `x = 0`.
pub fn symmetric_pair() -> GoldenCase {
    case(
        "symmetric_pair",
        vec![Piece::atom(-1.0, 1.0, 1.0), Piece::atom(1.0, 1.0, -1.0)],
    )
}

pub fn suite() -> Vec<GoldenCase> {
    vec![
        case("static_atom", vec![Piece::atom(0.0, 1.0, 0.0)]),
        single_atom(),
        symmetric_pair(),
        case(
            "expanding_pair",
            vec![Piece::atom(-1.0, 1.0, -1.0), Piece::atom(1.0, 1.0, 1.0)],
        ),
        case("static_block", vec![Piece::block(0.0, 1.0, 1.0, 0.0)]),
        case(
            "mixed",
            vec![
                Piece::block(-2.0, -1.0, 1.0, 1.5),
                Piece::atom(0.0, 0.5, 0.0),
                Piece::block(1.0, 2.0, 0.5, -1.0),
            ],
        ),
    ]
}

/// Modes every golden case is run in.
pub fn modes() -> Vec<SpreadMode> {
    vec![SpreadMode::damped(2.0).expect("positive tau"), SpreadMode::Undamped]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let s = suite();
        let mut names: Vec<_> = s.iter().map(|c| c.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), s.len());
    }
}
