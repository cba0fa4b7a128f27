//! Equilibria of two-issue vote trading.
//!
//! Voters hold utilities `(x, y)` on two binary issues drawn from a joint
//! density on [-1,1]². Two voters may swap one vote on each issue; eight
//! wedge angles describe who offers which swap. This crate finds the angles
//! at which no voter wants to change their offers, measures how often such
//! trades help the committee as a whole, and checks both against simulated
//! committees.

pub mod distributions;
pub mod equilibrium;
pub mod game;
pub mod geometry;
pub mod groupwide;
pub mod io;
mod par;
pub mod simulator;
pub mod welfare;

pub use distributions::{validate, Distribution, DistributionError, ValidationReport};
pub use equilibrium::{
    find_equilibria, solve_equilibrium, EquilibriumError, EquilibriumSolution, Mode, SolverOptions,
};
pub use game::{Issue, Quadrant, Role, StrategyProfile, TradeType, UtilityPair};
pub use geometry::{mass_table, RegionMassTable};
pub use groupwide::{effective_q, EffectiveQSet};
pub use simulator::{simulate, SimMode, SimulationReport};
pub use welfare::{beneficial_trade_probability, WelfareBoundarySet, WelfareReport};
