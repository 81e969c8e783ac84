//! System-level evaluation: amplifier, channels, receiver, sensing and the
//! Monte Carlo drivers.

pub mod channel;
pub mod montecarlo;
pub mod pa;
pub mod receiver;
pub mod sensing;
