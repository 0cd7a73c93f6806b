//! Enumeration capacity limits.
//!
//! Exhaustive oracles (event enumeration, trajectory trees, backward
//! induction) refuse to start when the work would exceed a cap, instead of
//! grinding forever. The environment variable `CREDAL_LLN_CAP` overrides both
//! defaults at once, which is the supported way to push a desk check a little
//! past the shipped limits.

fn env_cap() -> Option<u128> {
    std::env::var("CREDAL_LLN_CAP").ok()?.trim().parse().ok()
}

/// Cap on the number of candidate events an irrelevance check may enumerate.
pub fn default_event_cap() -> u128 {
    env_cap().unwrap_or(1 << 20)
}

/// Cap on the number of leaves an exact trajectory-tree walk may visit.
pub fn default_leaf_cap() -> u128 {
    env_cap().unwrap_or(2_000_000)
}
