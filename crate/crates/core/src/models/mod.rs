//! Concrete quantum metric models: ergodic actions of ℤ_q × ℤ_q on M_q by Weyl
//! unitaries, and rational noncommutative tori with their Dirac seminorm.

mod ergodic;
mod torus;

pub use ergodic::{clock_and_shift, is_coprime, AveragingCheck, GroupActionModel};
pub use torus::{
    check_action_vs_dirac, torus_length, torus_norm, ActionDiracReport, GridNorm, RationalTorus, TorusDiracSeminorm,
    TorusPolynomial,
};

#[cfg(test)]
mod tests;
