//! Shared fixtures for the criterion benches.

use legcop::reference::{from_kendall_tau, Family};
use legcop::PseudoSample;

/// Pseudo-observations of a Frank sample with Kendall's tau 0.3.
pub fn frank_pseudo(n: usize, dim: usize, seed: u64) -> PseudoSample {
    from_kendall_tau(Family::Frank, 0.3, dim)
        .and_then(|m| m.sample(n, seed))
        .and_then(|s| s.to_pseudo())
        .expect("fixture sample")
}
