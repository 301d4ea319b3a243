//! Fixed-step closed-loop engine.
//!
//! Each step samples the environment, runs the tracker, solves the panel at the
//! converter-imposed voltage, updates the MPPT, switches the pumps, moves
//! water, and charges or discharges the battery. Controllers read the state
//! left by the previous step.

mod env;
mod scenario;
mod trace;

pub use env::{env_at, EnvProfile, EnvSample, Schedule};
pub use scenario::Scenario;
pub use trace::{format_sig9, write_csv, CSV_HEADER};

use thiserror::Error;

use crate::hydraulics::{
    hydraulics_step, pump1_controller, pump2_controller, pump_duty, HydraulicsState, SoilState,
};
use crate::mppt::{converter_operating_point, MpptError, MpptState};
use crate::powertrain::{battery_step, charge_relay, terminal_voltage, BatteryState};
use crate::pv_model::{array_current, OperatingEnv, PvError};
use crate::tracker::{elevation_step, plane_of_array_irradiance, tracker_cycle, TrackerPose};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("step {step}: {source}")]
    Solver { step: u64, source: PvError },
    #[error("step {step}: {source}")]
    Mppt { step: u64, source: MpptError },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Relay and latch states carried between steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Relays {
    /// Low-voltage disconnect: loads may draw from the battery.
    pub loads_on: bool,
    /// Hysteresis latch of the tank-level rule.
    pub pump1_demand: bool,
    /// Hysteresis latch of the soil rule.
    pub pump2_demand: bool,
}

/// Running sums used for the water and energy ledgers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Totals {
    pub water_delivered_l: f64,
    /// Net charge offered to the battery (Ah), before clamping.
    pub net_ah: f64,
    pub curtailed_ah: f64,
    pub unserved_ah: f64,
    pub panel_wh: f64,
    pub load_wh: f64,
    pub stored_wh: f64,
    pub curtailed_wh: f64,
    pub pump_on_s: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldState {
    pub battery: BatteryState,
    /// Battery terminal voltage after the previous step; the converter output bus.
    pub batt_v: f64,
    pub hydraulics: HydraulicsState,
    pub pose: TrackerPose,
    pub mppt: MpptState,
    pub relays: Relays,
    pub totals: Totals,
}

impl WorldState {
    pub fn initial(scenario: &Scenario) -> Self {
        let loads_on = scenario.battery.soc >= scenario.relay.soc_reconnect;
        WorldState {
            battery: scenario.battery,
            batt_v: terminal_voltage(&scenario.battery, 0.0),
            hydraulics: HydraulicsState {
                tank1: scenario.tank1,
                tank2: scenario.tank2,
                soil: SoilState::from_moisture(scenario.soil_moisture_init),
                pumps: [scenario.pump.drive(false, 0.0); 2],
            },
            pose: scenario.initial_pose,
            mppt: MpptState::new(scenario.v_ref_init),
            relays: Relays {
                loads_on,
                ..Relays::default()
            },
            totals: Totals::default(),
        }
    }
}

/// One row of the observable trace plus the bookkeeping columns used by the
/// ledger checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time_s: f64,
    /// Irradiance on the panel plane (W/m²).
    pub g_wm2: f64,
    pub t_k: f64,
    pub panel_v: f64,
    pub panel_i: f64,
    pub panel_p: f64,
    /// Reference after this step's MPPT update.
    pub v_ref: f64,
    pub duty: f64,
    pub soc_pct: f64,
    pub batt_v: f64,
    pub tank1_pct: f64,
    pub tank2_pct: f64,
    pub soil_raw: f64,
    pub soil_pct: f64,
    pub pump1_relay: bool,
    pub pump1_duty: f64,
    pub pump1_rpm: f64,
    pub pump2_relay: bool,
    pub pump2_duty: f64,
    pub pump2_rpm: f64,
    pub azimuth_deg: f64,
    pub tilt_deg: f64,
    pub elevation_mm: f64,
    pub curtailed_wh: f64,

    pub mppt_updated: bool,
    pub relays: Relays,
    pub tank1_l: f64,
    pub tank2_l: f64,
    pub totals: Totals,
}

fn step_seed(seed: u64, step: u64) -> u64 {
    seed ^ step.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Advances the world by one step of `scenario.dt_s`.
pub fn sim_step(world: &WorldState, scenario: &Scenario, step: u64) -> Result<(WorldState, TraceRecord), SimError> {
    let dt = scenario.dt_s;
    let t = step as f64 * dt;

    let env = env_at(&scenario.env, t);

    let (_, _, pose) = tracker_cycle(&env.sun, &world.pose, &scenario.tracker, dt, step_seed(scenario.seed, step));
    let pose = elevation_step(
        &pose,
        env.elevation_target_mm,
        scenario.actuator.rate_mm_s,
        scenario.actuator.stroke_mm,
        dt,
    );

    let g_poa = plane_of_array_irradiance(&env.sun, &pose, &scenario.tracker.drive.stepper);
    let op_env = OperatingEnv::new(g_poa, env.cell_temp);
    let v_bus = world.batt_v;
    let (duty, panel_v) = converter_operating_point(world.mppt.v_ref, v_bus, scenario.topology);
    // blocking diode: no reverse current into the panel
    let panel_i = array_current(&scenario.pv, &op_env, panel_v)
        .map_err(|source| SimError::Solver { step, source })?
        .max(0.0);
    let panel_p = panel_v * panel_i;

    let mppt_updated = step % scenario.mppt_every as u64 == 0;
    let mppt = if mppt_updated {
        scenario
            .algorithm
            .step(world.mppt, panel_v, panel_i, &scenario.mppt)
            .map_err(|source| SimError::Mppt { step, source })?
    } else {
        world.mppt
    };

    let relays = next_relays(world, scenario);
    let prev = &world.hydraulics;
    let level2 = prev.tank2.level_pct();
    let th = &scenario.thresholds;
    let run1 = pump1_should_run(world, scenario, &relays);
    let run2 = pump2_should_run(world, scenario, &relays, run1);
    let duty1 = pump_duty(level2, run1, &th.tank_taper());
    let duty2 = pump_duty(prev.soil.percent(), run2, &th.soil_taper());
    let pumps = [prev.pumps[0].drive(run1, duty1), prev.pumps[1].drive(run2, duty2)];

    let (hydraulics, flows) = hydraulics_step(&HydraulicsState { pumps, ..*prev }, &scenario.soil_dynamics, dt);

    let charge_i = panel_p / v_bus;
    let load_i = (pumps[0].duty + pumps[1].duty) * scenario.pump_rated_current;
    let stepped = battery_step(world.battery, charge_i - load_i, dt);
    let battery = stepped.state;
    let batt_v = terminal_voltage(&battery, load_i - charge_i);

    let hours = dt / 3600.0;
    let mut totals = world.totals;
    totals.water_delivered_l += flows.delivered;
    totals.net_ah += (charge_i - load_i) * hours;
    totals.curtailed_ah += stepped.curtailed_ah;
    totals.unserved_ah += stepped.unserved_ah;
    totals.panel_wh += panel_p * hours;
    totals.load_wh += load_i * v_bus * hours;
    totals.stored_wh += (battery.soc - world.battery.soc) / battery.soc_per_ah() * v_bus;
    totals.curtailed_wh += stepped.curtailed_ah * v_bus;
    for (on_s, p) in totals.pump_on_s.iter_mut().zip(&pumps) {
        if p.relay_on {
            *on_s += dt;
        }
    }

    let next = WorldState {
        battery,
        batt_v,
        hydraulics,
        pose,
        mppt,
        relays,
        totals,
    };
    let h = &next.hydraulics;
    let record = TraceRecord {
        time_s: t,
        g_wm2: g_poa,
        t_k: env.cell_temp,
        panel_v,
        panel_i,
        panel_p,
        v_ref: mppt.v_ref,
        duty,
        soc_pct: battery.soc,
        batt_v,
        tank1_pct: h.tank1.level_pct(),
        tank2_pct: h.tank2.level_pct(),
        soil_raw: h.soil.raw,
        soil_pct: h.soil.percent(),
        pump1_relay: pumps[0].relay_on,
        pump1_duty: pumps[0].duty,
        pump1_rpm: pumps[0].speed,
        pump2_relay: pumps[1].relay_on,
        pump2_duty: pumps[1].duty,
        pump2_rpm: pumps[1].speed,
        azimuth_deg: pose.azimuth_deg(&scenario.tracker.drive.stepper),
        tilt_deg: pose.tilt_deg,
        elevation_mm: pose.elevation_mm,
        curtailed_wh: totals.curtailed_wh,
        mppt_updated,
        relays,
        tank1_l: h.tank1.volume,
        tank2_l: h.tank2.volume,
        totals,
    };
    Ok((next, record))
}

fn next_relays(world: &WorldState, scenario: &Scenario) -> Relays {
    let prev = &world.hydraulics;
    Relays {
        loads_on: charge_relay(&world.battery, &scenario.relay, world.relays.loads_on),
        pump1_demand: pump1_controller(prev.tank2.level_pct(), world.relays.pump1_demand, &scenario.thresholds),
        pump2_demand: pump2_controller(&prev.soil, world.relays.pump2_demand, &scenario.thresholds),
    }
}

/// Pump 1 runs while the battery feeds loads and the tank rule asks for water.
/// Starting needs the battery back at the reconnect level.
fn pump1_should_run(world: &WorldState, scenario: &Scenario, relays: &Relays) -> bool {
    let was_on = world.hydraulics.pumps[0].relay_on;
    relays.loads_on && relays.pump1_demand && (was_on || world.battery.soc >= scenario.relay.soc_reconnect)
}

/// Pump 2 additionally needs water above the low mark in tank 2, and only
/// starts while pump 1 is idle.
fn pump2_should_run(world: &WorldState, scenario: &Scenario, relays: &Relays, pump1_on: bool) -> bool {
    let was_on = world.hydraulics.pumps[1].relay_on;
    let has_water = world.hydraulics.tank2.level_pct() >= scenario.thresholds.tank_on_pct;
    let may_start = world.battery.soc >= scenario.relay.soc_reconnect && !pump1_on;
    relays.loads_on && relays.pump2_demand && has_water && (was_on || may_start)
}

/// Runs a full scenario, one record per step.
pub fn run(scenario: &Scenario) -> Result<Vec<TraceRecord>, SimError> {
    scenario.validate()?;
    let n = scenario.step_count();
    let mut world = WorldState::initial(scenario);
    let mut out = Vec::with_capacity(n as usize);
    for step in 0..n {
        let (next, record) = sim_step(&world, scenario, step)?;
        world = next;
        out.push(record);
    }
    Ok(out)
}
