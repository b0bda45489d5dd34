//! Verification toolkit for quantum cryptography bounds.
//!
//! Dense linear algebra and a small semidefinite solver underpin modules for
//! nonlocal XOR games, mutually unbiased bases and entropic uncertainty
//! relations, state discrimination with post-measurement information,
//! locking, and the noisy-storage oblivious transfer tradeoff.
#![forbid(unsafe_code)]

pub mod entropy;
pub mod error;
pub mod games;
pub mod locking;
pub mod matcore;
pub mod mubclifford;
pub mod noisyot;
pub mod pistar;
pub mod sdpsolve;
pub mod uncertainty;

pub use error::{Error, Result};

/// Acceptance suites in run order: (name, reproduced result, module).
pub const SUITES: &[(&str, &str, &str)] = &[
    ("tsirelson", "CHSH correlation bound 2√2 with a verified certificate", "sdpsolve"),
    ("chained-chsh", "chained Bell correlation 2n·cos(π/2n) for n = 2..8", "games"),
    ("chsh-game", "CHSH classical ¾, quantum ½ + 1/(2√2), single-prover simulation", "games"),
    ("helstrom", "hidden bit under two and three bases", "pistar"),
    ("pistar-and", "AND with post-measurement basis information", "pistar"),
    ("pistar-xor", "XOR with and without basis information, Bell strategy", "pistar"),
    ("min-storage", "minimal storage from the commutant block structure", "pistar"),
    ("uncertainty-tightness", "MUB and Clifford entropic uncertainty relations attained", "uncertainty"),
    ("meta-uncertainty", "sum-of-squares bound on anticommuting expectations", "uncertainty"),
    ("locking", "accessible information of MUB ensembles", "locking"),
    ("qbsc", "bit-string commitment impossibility and guessing lemma", "locking"),
    ("noisy-ot", "depolarizing storage tradeoff and protocol simulation", "noisyot"),
    ("privacy-amplification", "affine hashing against the BB84 bit ensemble", "noisyot"),
];
