//! TOML scenario files. Every physical key carries its unit in the name;
//! missing keys take the values of [`Scenario::default`], and the fully
//! resolved file can be written back out with [`ConfigFile::resolved`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use pvpump_core::hydraulics::{PumpState, SoilDynamics, TankState, ThresholdConfig};
use pvpump_core::mppt::{Convention, ConverterTopology, MpptAlgorithm, MpptConfig};
use pvpump_core::powertrain::{BatteryState, ChargeRelayConfig};
use pvpump_core::pv_model::{PvArraySpec, PvCellParams};
use pvpump_core::sim::{EnvProfile, Scenario, Schedule};
use pvpump_core::tracker::{ActuatorSpec, AxisDrive, LdrSensor, StepperSpec, TrackerConfig, TrackerPose};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub simulation: SimulationSection,
    pub environment: EnvironmentSection,
    pub pv: PvSection,
    pub mppt: MpptSection,
    pub battery: BatterySection,
    pub tracker: TrackerSection,
    pub hydraulics: HydraulicsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub duration_s: f64,
    pub dt_s: f64,
    pub seed: u64,
}

/// Each schedule is a list of `[time_s, value]` knots, linear in between and
/// held flat past the last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSection {
    pub irradiance_wm2: Vec<[f64; 2]>,
    pub temp_c: Vec<[f64; 2]>,
    pub sun_azimuth_deg: Vec<[f64; 2]>,
    pub sun_elevation_deg: Vec<[f64; 2]>,
    pub elevation_target_mm: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvSection {
    pub iph_stc_a: f64,
    pub io1_a: f64,
    pub io2_a: f64,
    pub rs_ohm: f64,
    pub rp_ohm: f64,
    pub ideality1: f64,
    pub ideality2: f64,
    pub alpha_i_per_k: f64,
    pub bandgap_ev: f64,
    pub io_temp_exponent: f64,
    pub cells_series: u32,
    pub strings_parallel: u32,
    pub area_m2: f64,
    pub rated_power_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmName {
    PerturbObserve,
    IncrementalConductance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionName {
    Standard,
    InvertedBranches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyName {
    IdealBuck,
    Boost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpptSection {
    pub algorithm: AlgorithmName,
    pub convention: ConventionName,
    pub topology: TopologyName,
    pub step_v: f64,
    pub v_min_v: f64,
    pub v_max_v: f64,
    pub v_ref_init_v: f64,
    pub ic_epsilon_a_per_v: f64,
    pub update_every_steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatterySection {
    pub soc_init_pct: f64,
    pub capacity_ah: f64,
    pub nominal_v: f64,
    pub r_internal_ohm: f64,
    pub soc_reconnect_pct: f64,
    pub soc_cutoff_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerSection {
    pub ldr_offset_deg: f64,
    pub ldr_noise_counts: f64,
    pub tolerance_counts: f64,
    pub steps_per_rev: u32,
    pub step_deg: f64,
    pub tilt_rated_rpm: f64,
    pub tilt_duty: f64,
    pub actuator_stroke_mm: f64,
    pub actuator_rate_mm_s: f64,
    pub initial_azimuth_steps: i64,
    pub initial_tilt_deg: f64,
    pub initial_elevation_mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Tank 10 %/85 %, soil 500/750 counts.
    #[default]
    SystemModel,
    /// Tank 20 %/90 %, soil 716/102 counts (30 %/90 % moisture).
    Results,
}

impl Preset {
    pub fn thresholds(self) -> ThresholdConfig {
        match self {
            Preset::SystemModel => ThresholdConfig::system_model(),
            Preset::Results => ThresholdConfig::results(),
        }
    }
}

/// Threshold keys left out fall back to the preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HydraulicsSection {
    pub preset: Preset,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tank_on_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tank_off_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soil_wet_counts: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soil_dry_counts: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taper_start_tank_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taper_start_soil_pct: Option<f64>,
    pub tank1_capacity_l: f64,
    pub tank1_init_l: f64,
    pub tank2_capacity_l: f64,
    pub tank2_init_l: f64,
    pub tank_height_m: f64,
    pub soil_moisture_init_frac: f64,
    pub k_soil_per_l: f64,
    pub k_evap_per_s: f64,
    pub pump_max_flow_l_min: f64,
    pub pump_max_speed_rpm: f64,
    pub pump_rated_current_a: f64,
}

fn knots(s: &Schedule) -> Vec<[f64; 2]> {
    s.knots().iter().map(|&(t, v)| [t, v]).collect()
}

fn schedule(name: &str, knots: &[[f64; 2]]) -> Result<Schedule, CliError> {
    Schedule::new(knots.iter().map(|k| (k[0], k[1])).collect())
        .map_err(|e| CliError::Config(format!("environment.{name}: {e}")))
}

impl ConfigFile {
    /// Mirrors a scenario, with every threshold written out explicitly.
    pub fn from_scenario(s: &Scenario, preset: Preset) -> Self {
        let c = &s.pv.cell;
        let th = &s.thresholds;
        ConfigFile {
            simulation: SimulationSection {
                duration_s: s.duration_s,
                dt_s: s.dt_s,
                seed: s.seed,
            },
            environment: EnvironmentSection {
                irradiance_wm2: knots(&s.env.irradiance_wm2),
                temp_c: knots(&s.env.temp_c),
                sun_azimuth_deg: knots(&s.env.sun_azimuth_deg),
                sun_elevation_deg: knots(&s.env.sun_elevation_deg),
                elevation_target_mm: knots(&s.env.elevation_target_mm),
            },
            pv: PvSection {
                iph_stc_a: c.iph_stc,
                io1_a: c.io1,
                io2_a: c.io2,
                rs_ohm: c.rs,
                rp_ohm: c.rp,
                ideality1: c.a1,
                ideality2: c.a2,
                alpha_i_per_k: c.alpha_i,
                bandgap_ev: c.eg_ev,
                io_temp_exponent: c.xti,
                cells_series: s.pv.ns,
                strings_parallel: s.pv.np,
                area_m2: s.pv.area,
                rated_power_w: s.pv.rated_power,
            },
            mppt: MpptSection {
                algorithm: match s.algorithm {
                    MpptAlgorithm::PerturbObserve => AlgorithmName::PerturbObserve,
                    MpptAlgorithm::IncrementalConductance => AlgorithmName::IncrementalConductance,
                },
                convention: match s.mppt.convention {
                    Convention::Standard => ConventionName::Standard,
                    Convention::InvertedBranches => ConventionName::InvertedBranches,
                },
                topology: match s.topology {
                    ConverterTopology::IdealBuck => TopologyName::IdealBuck,
                    ConverterTopology::Boost => TopologyName::Boost,
                },
                step_v: s.mppt.step,
                v_min_v: s.mppt.v_min,
                v_max_v: s.mppt.v_max,
                v_ref_init_v: s.v_ref_init,
                ic_epsilon_a_per_v: s.mppt.ic_epsilon,
                update_every_steps: s.mppt_every,
            },
            battery: BatterySection {
                soc_init_pct: s.battery.soc,
                capacity_ah: s.battery.capacity,
                nominal_v: s.battery.v_nominal,
                r_internal_ohm: s.battery.r_internal,
                soc_reconnect_pct: s.relay.soc_reconnect,
                soc_cutoff_pct: s.relay.soc_cutoff,
            },
            tracker: TrackerSection {
                ldr_offset_deg: s.tracker.sensor.offset_deg,
                ldr_noise_counts: s.tracker.sensor.noise_counts,
                tolerance_counts: s.tracker.tolerance,
                steps_per_rev: s.tracker.drive.stepper.steps_per_rev,
                step_deg: s.tracker.drive.stepper.step_deg,
                tilt_rated_rpm: s.tracker.drive.tilt_rated_rpm,
                tilt_duty: s.tracker.drive.tilt_duty,
                actuator_stroke_mm: s.actuator.stroke_mm,
                actuator_rate_mm_s: s.actuator.rate_mm_s,
                initial_azimuth_steps: s.initial_pose.azimuth_steps,
                initial_tilt_deg: s.initial_pose.tilt_deg,
                initial_elevation_mm: s.initial_pose.elevation_mm,
            },
            hydraulics: HydraulicsSection {
                preset,
                tank_on_pct: Some(th.tank_on_pct),
                tank_off_pct: Some(th.tank_off_pct),
                soil_wet_counts: Some(th.soil_wet),
                soil_dry_counts: Some(th.soil_dry),
                taper_start_tank_pct: Some(th.taper_start_tank_pct),
                taper_start_soil_pct: Some(th.taper_start_soil_pct),
                tank1_capacity_l: s.tank1.capacity,
                tank1_init_l: s.tank1.volume,
                tank2_capacity_l: s.tank2.capacity,
                tank2_init_l: s.tank2.volume,
                tank_height_m: s.tank1.height,
                soil_moisture_init_frac: s.soil_moisture_init,
                k_soil_per_l: s.soil_dynamics.k_soil,
                k_evap_per_s: s.soil_dynamics.k_evap,
                pump_max_flow_l_min: s.pump.max_flow,
                pump_max_speed_rpm: s.pump.max_speed,
                pump_rated_current_a: s.pump_rated_current,
            },
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading {}", path.display()),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn thresholds(&self) -> ThresholdConfig {
        let h = &self.hydraulics;
        let base = h.preset.thresholds();
        ThresholdConfig {
            tank_on_pct: h.tank_on_pct.unwrap_or(base.tank_on_pct),
            tank_off_pct: h.tank_off_pct.unwrap_or(base.tank_off_pct),
            soil_wet: h.soil_wet_counts.unwrap_or(base.soil_wet),
            soil_dry: h.soil_dry_counts.unwrap_or(base.soil_dry),
            taper_start_tank_pct: h.taper_start_tank_pct.unwrap_or(base.taper_start_tank_pct),
            taper_start_soil_pct: h.taper_start_soil_pct.unwrap_or(base.taper_start_soil_pct),
        }
    }

    /// Builds and validates the scenario.
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let (sim, env, pv, m, b, t, h) = (
            &self.simulation,
            &self.environment,
            &self.pv,
            &self.mppt,
            &self.battery,
            &self.tracker,
            &self.hydraulics,
        );
        let tank = |capacity: f64, volume: f64| TankState {
            volume,
            capacity,
            height: h.tank_height_m,
        };
        let scenario = Scenario {
            duration_s: sim.duration_s,
            dt_s: sim.dt_s,
            seed: sim.seed,
            env: EnvProfile {
                irradiance_wm2: schedule("irradiance_wm2", &env.irradiance_wm2)?,
                temp_c: schedule("temp_c", &env.temp_c)?,
                sun_azimuth_deg: schedule("sun_azimuth_deg", &env.sun_azimuth_deg)?,
                sun_elevation_deg: schedule("sun_elevation_deg", &env.sun_elevation_deg)?,
                elevation_target_mm: schedule("elevation_target_mm", &env.elevation_target_mm)?,
            },
            pv: PvArraySpec {
                cell: PvCellParams {
                    iph_stc: pv.iph_stc_a,
                    io1: pv.io1_a,
                    io2: pv.io2_a,
                    rs: pv.rs_ohm,
                    rp: pv.rp_ohm,
                    a1: pv.ideality1,
                    a2: pv.ideality2,
                    alpha_i: pv.alpha_i_per_k,
                    eg_ev: pv.bandgap_ev,
                    xti: pv.io_temp_exponent,
                },
                ns: pv.cells_series,
                np: pv.strings_parallel,
                area: pv.area_m2,
                rated_power: pv.rated_power_w,
            },
            mppt: MpptConfig {
                step: m.step_v,
                v_min: m.v_min_v,
                v_max: m.v_max_v,
                ic_epsilon: m.ic_epsilon_a_per_v,
                convention: match m.convention {
                    ConventionName::Standard => Convention::Standard,
                    ConventionName::InvertedBranches => Convention::InvertedBranches,
                },
            },
            algorithm: match m.algorithm {
                AlgorithmName::PerturbObserve => MpptAlgorithm::PerturbObserve,
                AlgorithmName::IncrementalConductance => MpptAlgorithm::IncrementalConductance,
            },
            mppt_every: m.update_every_steps,
            topology: match m.topology {
                TopologyName::IdealBuck => ConverterTopology::IdealBuck,
                TopologyName::Boost => ConverterTopology::Boost,
            },
            v_ref_init: m.v_ref_init_v,
            battery: BatteryState {
                soc: b.soc_init_pct,
                capacity: b.capacity_ah,
                v_nominal: b.nominal_v,
                r_internal: b.r_internal_ohm,
            },
            relay: ChargeRelayConfig {
                soc_reconnect: b.soc_reconnect_pct,
                soc_cutoff: b.soc_cutoff_pct,
            },
            tracker: TrackerConfig {
                sensor: LdrSensor {
                    offset_deg: t.ldr_offset_deg,
                    noise_counts: t.ldr_noise_counts,
                },
                tolerance: t.tolerance_counts,
                drive: AxisDrive {
                    stepper: StepperSpec {
                        steps_per_rev: t.steps_per_rev,
                        step_deg: t.step_deg,
                    },
                    tilt_rated_rpm: t.tilt_rated_rpm,
                    tilt_duty: t.tilt_duty,
                },
            },
            actuator: ActuatorSpec {
                stroke_mm: t.actuator_stroke_mm,
                rate_mm_s: t.actuator_rate_mm_s,
            },
            initial_pose: TrackerPose {
                azimuth_steps: t.initial_azimuth_steps,
                tilt_deg: t.initial_tilt_deg,
                elevation_mm: t.initial_elevation_mm,
            },
            thresholds: self.thresholds(),
            pump: PumpState {
                max_flow: h.pump_max_flow_l_min,
                max_speed: h.pump_max_speed_rpm,
                ..PumpState::default()
            },
            pump_rated_current: h.pump_rated_current_a,
            soil_dynamics: SoilDynamics {
                k_soil: h.k_soil_per_l,
                k_evap: h.k_evap_per_s,
            },
            tank1: tank(h.tank1_capacity_l, h.tank1_init_l),
            tank2: tank(h.tank2_capacity_l, h.tank2_init_l),
            soil_moisture_init: h.soil_moisture_init_frac,
        };
        scenario.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(scenario)
    }

    /// The effective configuration with every default spelled out.
    pub fn resolved(&self) -> Result<String, CliError> {
        let scenario = self.to_scenario()?;
        toml::to_string(&ConfigFile::from_scenario(&scenario, self.hydraulics.preset))
            .map_err(|e| CliError::Config(format!("cannot write resolved config: {e}")))
    }
}

macro_rules! default_from_scenario {
    ($($section:ident => $ty:ty),* $(,)?) => {
        $(impl Default for $ty {
            fn default() -> Self {
                ConfigFile::from_scenario(&Scenario::default(), Preset::default()).$section
            }
        })*
    };
}

default_from_scenario! {
    simulation => SimulationSection,
    environment => EnvironmentSection,
    pv => PvSection,
    mppt => MpptSection,
    battery => BatterySection,
    tracker => TrackerSection,
}

impl Default for HydraulicsSection {
    fn default() -> Self {
        HydraulicsSection {
            preset: Preset::default(),
            tank_on_pct: None,
            tank_off_pct: None,
            soil_wet_counts: None,
            soil_dry_counts: None,
            taper_start_tank_pct: None,
            taper_start_soil_pct: None,
            ..ConfigFile::from_scenario(&Scenario::default(), Preset::default()).hydraulics
        }
    }
}
