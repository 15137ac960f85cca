//! Asynchronous cellular automata and flip automata networks.
//!
//! The crate executes arbitrary update schedules, checks the local algebra
//! (commutativity, monotonicity, adjacent activity) of rule tables, compiles
//! synchronous rules into asynchronous hosts, and ships the three-state
//! von Neumann rule X together with a dual-rail circuit compiler.

pub mod algebra;
pub mod circuits;
pub mod compilers;
pub mod engine;
mod error;
pub mod fan;
pub mod io;
pub mod oneway;

pub use engine::{
    Background, Boundary, Configuration, Coord, Lattice, RuleTable, Schedule, ScheduleSpec,
    SpaceTime, State, SweepDir, UpdateHistory, Window,
};
pub use error::{Error, Result};
