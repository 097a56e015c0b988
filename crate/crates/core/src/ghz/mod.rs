//! The three-photon laboratory.
//!
//! The state `(|000⟩ + i|111⟩)/√2` with per-photon observable
//! `σ(φ) = cos φ·X + sin φ·Y` gives product expectation
//! `sin(φ₁ + φ₂ + φ₃)`: `+1` at `(π/2,0,0)`, `(0,π/2,0)`, `(0,0,π/2)` and
//! `−1` at `(π/2,π/2,π/2)`. No local assignment of the six values
//! `A_x..C_y` reproduces all four signs.

mod gedanken;
mod lhv;
mod state;

pub use gedanken::*;
pub use lhv::*;
pub use state::*;
