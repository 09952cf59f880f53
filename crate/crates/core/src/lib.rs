//! Hard instances for threshold-MST in dynamic graph streams.
//!
//! The crate is organized bottom-up:
//!
//! * [`atpc`] samples, enumerates and evaluates Augmented Tree Pointer
//!   Chasing instances together with the two parties' views.
//! * [`urmin`] turns the views into the insertion/deletion element sets whose
//!   difference has minimum `2t - z`.
//! * [`stream`] compiles a hinted batch of instances into a weighted dynamic
//!   graph stream and provides the exact offline MST oracle.
//! * [`sketch`] holds the turnstile sketches, the sketch-based MST
//!   algorithms and an exact space meter.
//! * [`protocol`] simulates two-party and blackboard protocols over finite
//!   input spaces, with exact and Monte-Carlo evaluation, the protocol
//!   transformations (hint guessing, majority to XOR, round elimination,
//!   streaming compilation) and information-theory utilities.

pub mod atpc;
pub mod protocol;
pub mod seed;
pub mod sketch;
pub mod stream;
pub mod urmin;

use serde::{Deserialize, Serialize};

/// One of the two sides of a two-party (or blackboard) computation.
///
/// In the set constructions this is the party flag `p`: `Alice` is `p = 0`
/// (insertion side) and `Bob` is `p = 1` (deletion side).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }

    /// The numeric flag used by the set constructions.
    pub fn flag(self) -> u8 {
        match self {
            Party::Alice => 0,
            Party::Bob => 1,
        }
    }

    pub fn from_flag(flag: u8) -> Option<Party> {
        match flag {
            0 => Some(Party::Alice),
            1 => Some(Party::Bob),
            _ => None,
        }
    }
}
