//! Seed derivation. Every battery seed is one output of a SplitMix64 stream
//! whose state starts at the configured seed; the draw order is the field
//! order of [`BatterySeeds`].

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BatterySeeds {
    pub cd_defect: u64,
    pub warped_identity: u64,
    pub hessian_bound: u64,
    pub integrated_cd: u64,
    pub ibp_sphere: u64,
    pub ibp_s: u64,
    pub theta_residual: u64,
}

impl BatterySeeds {
    pub fn from_seed(seed: u64) -> Self {
        let mut s = SplitMix64::seed_from_u64(seed);
        Self {
            cd_defect: s.next_u64(),
            warped_identity: s.next_u64(),
            hessian_bound: s.next_u64(),
            integrated_cd: s.next_u64(),
            ibp_sphere: s.next_u64(),
            ibp_s: s.next_u64(),
            theta_residual: s.next_u64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference SplitMix64 step.
    fn splitmix(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    #[test]
    fn seeds_follow_the_splitmix_progression() {
        let mut state = 42u64;
        let expected: Vec<u64> = (0..7).map(|_| splitmix(&mut state)).collect();
        let s = BatterySeeds::from_seed(42);
        let got = [
            s.cd_defect,
            s.warped_identity,
            s.hessian_bound,
            s.integrated_cd,
            s.ibp_sphere,
            s.ibp_s,
            s.theta_residual,
        ];
        assert_eq!(got.to_vec(), expected);
    }

    #[test]
    fn known_first_output() {
        // First SplitMix64 output from state 0.
        let mut state = 0u64;
        assert_eq!(splitmix(&mut state), 0xe220_a839_7b1d_cdaf);
        assert_eq!(BatterySeeds::from_seed(0).cd_defect, 0xe220_a839_7b1d_cdaf);
    }
}
