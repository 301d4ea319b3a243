use crate::hydraulics::{PumpState, SoilDynamics, TankState, ThresholdConfig};
use crate::mppt::{ConverterTopology, MpptAlgorithm, MpptConfig};
use crate::powertrain::{BatteryState, ChargeRelayConfig};
use crate::pv_model::PvArraySpec;
use crate::tracker::{ActuatorSpec, TrackerConfig, TrackerPose};

use super::env::{EnvProfile, Schedule};
use super::SimError;

/// Everything a run needs: timing, environment, plant parameters and the
/// initial conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub duration_s: f64,
    pub dt_s: f64,
    pub seed: u64,
    pub env: EnvProfile,

    pub pv: PvArraySpec,
    pub mppt: MpptConfig,
    pub algorithm: MpptAlgorithm,
    /// Physics steps per MPPT update.
    pub mppt_every: u32,
    pub topology: ConverterTopology,
    pub v_ref_init: f64,

    pub battery: BatteryState,
    pub relay: ChargeRelayConfig,

    pub tracker: TrackerConfig,
    pub actuator: ActuatorSpec,
    pub initial_pose: TrackerPose,

    pub thresholds: ThresholdConfig,
    /// Pump template (flow and speed ratings); both pumps share it.
    pub pump: PumpState,
    /// Current drawn by one pump at full duty (A).
    pub pump_rated_current: f64,
    pub soil_dynamics: SoilDynamics,
    pub tank1: TankState,
    pub tank2: TankState,
    pub soil_moisture_init: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            duration_s: 600.0,
            dt_s: 0.1,
            seed: 1,
            env: EnvProfile::default(),
            pv: PvArraySpec::default(),
            mppt: MpptConfig {
                v_min: 13.0,
                v_max: 24.0,
                ..MpptConfig::default()
            },
            algorithm: MpptAlgorithm::PerturbObserve,
            mppt_every: 10,
            topology: ConverterTopology::IdealBuck,
            v_ref_init: 17.0,
            battery: BatteryState::default(),
            relay: ChargeRelayConfig::default(),
            tracker: TrackerConfig::default(),
            actuator: ActuatorSpec::default(),
            initial_pose: TrackerPose::default(),
            thresholds: ThresholdConfig::default(),
            pump: PumpState::default(),
            pump_rated_current: 3.0,
            soil_dynamics: SoilDynamics::default(),
            tank1: TankState::new(13.8),
            tank2: TankState::new(6.9),
            soil_moisture_init: 0.4,
        }
    }
}

impl Scenario {
    /// Sunrise ramp with a misaligned tracker, a nearly empty tank 2 and dry
    /// soil: the battery charges, then pump 1 refills tank 2, the battery
    /// recovers, then pump 2 waters the soil.
    pub fn standard() -> Self {
        let d = Scenario::default();
        Scenario {
            env: EnvProfile {
                irradiance_wm2: Schedule::new(vec![(0.0, 0.0), (120.0, 1000.0)]).expect("static knots"),
                ..EnvProfile::default()
            },
            battery: BatteryState {
                soc: 49.0,
                capacity: 1.0,
                ..BatteryState::default()
            },
            relay: ChargeRelayConfig {
                soc_reconnect: 50.0,
                soc_cutoff: 20.0,
            },
            tracker: TrackerConfig {
                sensor: crate::tracker::LdrSensor {
                    noise_counts: 3.0,
                    ..Default::default()
                },
                ..TrackerConfig::default()
            },
            initial_pose: TrackerPose {
                azimuth_steps: 90,
                tilt_deg: 30.0,
                elevation_mm: 0.0,
            },
            soil_dynamics: SoilDynamics {
                k_soil: 0.1,
                ..SoilDynamics::default()
            },
            tank2: TankState::new(0.69),
            soil_moisture_init: 0.2,
            ..d
        }
    }

    /// Constant standard test conditions, tracker facing the sun, tank 2 full
    /// and wet soil, so the pumps stay off.
    pub fn steady_stc() -> Self {
        let d = Scenario::default();
        Scenario {
            duration_s: 1000.0,
            initial_pose: TrackerPose {
                azimuth_steps: 100,
                tilt_deg: 45.0,
                elevation_mm: 0.0,
            },
            battery: BatteryState {
                soc: 50.0,
                capacity: 100.0,
                ..BatteryState::default()
            },
            tank2: TankState::new(13.8),
            soil_moisture_init: 0.8,
            ..d
        }
    }

    /// Number of steps a run produces.
    pub fn step_count(&self) -> u64 {
        let n = self.duration_s / self.dt_s;
        (n - 1e-9 * n.max(1.0)).ceil().max(0.0) as u64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return bad(format!("dt_s must be > 0, got {}", self.dt_s));
        }
        if !(self.duration_s >= 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration_s must be >= 0, got {}", self.duration_s));
        }
        if self.duration_s > 0.0 && self.dt_s > self.duration_s {
            return bad(format!("dt_s ({}) must not exceed duration_s ({})", self.dt_s, self.duration_s));
        }
        if self.mppt_every == 0 {
            return bad("mppt_every must be >= 1".into());
        }
        self.pv.validate().map_err(|e| SimError::InvalidScenario(e.to_string()))?;
        self.mppt.validate().map_err(|e| SimError::InvalidScenario(e.to_string()))?;
        if !(self.mppt.v_min..=self.mppt.v_max).contains(&self.v_ref_init) {
            return bad(format!(
                "v_ref_init ({}) must lie within [v_min, v_max] = [{}, {}]",
                self.v_ref_init, self.mppt.v_min, self.mppt.v_max
            ));
        }
        self.battery.validate().map_err(SimError::InvalidScenario)?;
        self.relay.validate().map_err(SimError::InvalidScenario)?;
        self.thresholds.validate().map_err(SimError::InvalidScenario)?;
        self.tank1.validate().map_err(SimError::InvalidScenario)?;
        self.tank2.validate().map_err(SimError::InvalidScenario)?;
        if !(0.0..=1.0).contains(&self.soil_moisture_init) {
            return bad(format!("soil moisture must lie in [0, 1], got {}", self.soil_moisture_init));
        }
        if !(self.pump.max_flow > 0.0 && self.pump.max_speed > 0.0 && self.pump_rated_current >= 0.0) {
            return bad("pump flow and speed ratings must be > 0 and rated current >= 0".into());
        }
        if !(self.soil_dynamics.k_soil >= 0.0 && self.soil_dynamics.k_evap >= 0.0) {
            return bad("soil coefficients must be >= 0".into());
        }
        if !(self.tracker.tolerance >= 0.0 && self.tracker.sensor.noise_counts >= 0.0) {
            return bad("tracker tolerance and noise must be >= 0".into());
        }
        if !(self.actuator.stroke_mm > 0.0 && self.actuator.rate_mm_s >= 0.0) {
            return bad("actuator stroke must be > 0 and rate >= 0".into());
        }
        Ok(())
    }
}
