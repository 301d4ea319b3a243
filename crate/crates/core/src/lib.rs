//! Simulation core for a solar-powered two-pump irrigation rig.

pub mod hydraulics;
pub mod mppt;
pub mod powertrain;
pub mod pv_model;
pub mod tracker;
pub mod sim;
