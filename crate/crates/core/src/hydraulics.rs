//! Two-tank water path: ultrasonic level sensing, soil moisture
//! classification, relay hysteresis for both pumps, PWM speed control and the
//! volume bookkeeping between tank 1, tank 2 and the plant.

/// Full-scale soil sensor reading.
pub const SOIL_FULL_SCALE: f64 = 1023.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankState {
    /// Water volume (L).
    pub volume: f64,
    /// Capacity (L).
    pub capacity: f64,
    /// Internal height used for the ultrasonic geometry (m).
    pub height: f64,
}

impl TankState {
    pub fn new(volume: f64) -> Self {
        TankState {
            volume,
            capacity: 13.8,
            height: 0.3,
        }
    }

    pub fn level_pct(&self) -> f64 {
        100.0 * self.volume / self.capacity
    }

    pub fn free_space(&self) -> f64 {
        (self.capacity - self.volume).max(0.0)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.capacity > 0.0 && self.height > 0.0) {
            return Err("tank capacity and height must be > 0".into());
        }
        if !(0.0..=self.capacity).contains(&self.volume) {
            return Err(format!("tank volume {} L outside [0, {}]", self.volume, self.capacity));
        }
        Ok(())
    }
}

/// Sensor-to-surface distance (m) and fill level (%), measured from the lid.
pub fn ultrasonic_level(tank: &TankState) -> (f64, f64) {
    let fraction = tank.volume / tank.capacity;
    (tank.height * (1.0 - fraction), 100.0 * fraction)
}

/// Soil moisture as the plant model sees it and as the sensor reports it.
/// The sensor reads high when dry: `raw = 1023 * (1 - moisture_fraction)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilState {
    pub raw: f64,
    pub moisture_fraction: f64,
}

impl SoilState {
    pub fn from_moisture(moisture_fraction: f64) -> Self {
        let m = moisture_fraction.clamp(0.0, 1.0);
        SoilState {
            raw: SOIL_FULL_SCALE * (1.0 - m),
            moisture_fraction: m,
        }
    }

    pub fn from_raw(raw: f64) -> Self {
        let raw = raw.clamp(0.0, SOIL_FULL_SCALE);
        SoilState {
            raw,
            moisture_fraction: 1.0 - raw / SOIL_FULL_SCALE,
        }
    }

    /// Moisture in percent.
    pub fn percent(&self) -> f64 {
        soil_percent(self.raw)
    }
}

/// Raw sensor counts to moisture percent.
pub fn soil_percent(raw: f64) -> f64 {
    100.0 * (1.0 - raw / SOIL_FULL_SCALE)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpState {
    pub relay_on: bool,
    pub duty: f64,
    /// Shaft speed (rpm).
    pub speed: f64,
    /// Flow at full speed (L/min).
    pub max_flow: f64,
    pub max_speed: f64,
}

impl Default for PumpState {
    fn default() -> Self {
        PumpState {
            relay_on: false,
            duty: 0.0,
            speed: 0.0,
            max_flow: 4.0,
            max_speed: 3500.0,
        }
    }
}

impl PumpState {
    /// Applies a relay state and duty; an open relay forces duty and speed to 0.
    pub fn drive(&self, relay_on: bool, duty: f64) -> Self {
        let duty = if relay_on { duty.clamp(0.0, 1.0) } else { 0.0 };
        PumpState {
            relay_on,
            duty,
            speed: duty * self.max_speed,
            ..*self
        }
    }

    /// Flow (L/min).
    pub fn flow(&self) -> f64 {
        self.speed / self.max_speed * self.max_flow
    }
}

/// Relay thresholds and PWM taper points. Soil thresholds are raw counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    pub tank_on_pct: f64,
    pub tank_off_pct: f64,
    pub soil_wet: f64,
    pub soil_dry: f64,
    pub taper_start_tank_pct: f64,
    pub taper_start_soil_pct: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig::system_model()
    }
}

impl ThresholdConfig {
    /// Relay points of the control description: 10 %/85 % tank, 500/750 soil counts.
    pub fn system_model() -> Self {
        ThresholdConfig {
            tank_on_pct: 10.0,
            tank_off_pct: 85.0,
            soil_wet: 500.0,
            soil_dry: 750.0,
            taper_start_tank_pct: 60.0,
            taper_start_soil_pct: 50.0,
        }
    }

    /// Relay points of the simulated traces: 20 %/90 % tank, soil on below
    /// 30 % and off at 90 % moisture.
    pub fn results() -> Self {
        ThresholdConfig {
            tank_on_pct: 20.0,
            tank_off_pct: 90.0,
            soil_wet: 102.0,
            soil_dry: 716.0,
            taper_start_tank_pct: 60.0,
            taper_start_soil_pct: 50.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.tank_on_pct < self.taper_start_tank_pct && self.taper_start_tank_pct < self.tank_off_pct) {
            return Err(format!(
                "tank thresholds must satisfy tank_on_pct < taper_start_tank_pct < tank_off_pct (got {} / {} / {})",
                self.tank_on_pct, self.taper_start_tank_pct, self.tank_off_pct
            ));
        }
        if !(self.soil_wet < self.soil_dry) {
            return Err(format!(
                "soil thresholds must satisfy soil_wet < soil_dry (got {} / {})",
                self.soil_wet, self.soil_dry
            ));
        }
        let (dry_pct, wet_pct) = (soil_percent(self.soil_dry), soil_percent(self.soil_wet));
        if !(dry_pct < self.taper_start_soil_pct && self.taper_start_soil_pct < wet_pct) {
            return Err(format!(
                "taper_start_soil_pct must lie between the dry ({dry_pct:.2} %) and wet ({wet_pct:.2} %) points, got {}",
                self.taper_start_soil_pct
            ));
        }
        Ok(())
    }

    pub fn tank_taper(&self) -> TaperBand {
        TaperBand {
            start_pct: self.taper_start_tank_pct,
            off_pct: self.tank_off_pct,
        }
    }

    pub fn soil_taper(&self) -> TaperBand {
        TaperBand {
            start_pct: self.taper_start_soil_pct,
            off_pct: soil_percent(self.soil_wet),
        }
    }
}

/// Pump 1: on below `tank_on_pct`, off at `tank_off_pct`, hold in between.
pub fn pump1_controller(level_pct: f64, relay_on: bool, cfg: &ThresholdConfig) -> bool {
    if level_pct < cfg.tank_on_pct {
        true
    } else if level_pct >= cfg.tank_off_pct {
        false
    } else {
        relay_on
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoilClass {
    Wet,
    Humid,
    Dry,
}

pub fn soil_class(raw: f64, cfg: &ThresholdConfig) -> SoilClass {
    if raw < cfg.soil_wet {
        SoilClass::Wet
    } else if raw <= cfg.soil_dry {
        SoilClass::Humid
    } else {
        SoilClass::Dry
    }
}

/// Pump 2: on when dry, off when wet, hold while humid.
pub fn pump2_controller(soil: &SoilState, relay_on: bool, cfg: &ThresholdConfig) -> bool {
    match soil_class(soil.raw, cfg) {
        SoilClass::Dry => true,
        SoilClass::Wet => false,
        SoilClass::Humid => relay_on,
    }
}

/// Measured quantity (%) at which the duty starts tapering and at which the
/// relay opens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaperBand {
    pub start_pct: f64,
    pub off_pct: f64,
}

/// Full duty below the taper start, then a linear slope down to 0.5 at the
/// off point.
pub fn pump_duty(measure_pct: f64, relay_on: bool, band: &TaperBand) -> f64 {
    if !relay_on {
        return 0.0;
    }
    if measure_pct < band.start_pct {
        return 1.0;
    }
    let x = (measure_pct - band.start_pct) / (band.off_pct - band.start_pct);
    (1.0 - 0.5 * x).clamp(0.5, 1.0)
}

/// Rectangular PWM wave: 1 while the phase within the period is below `duty`.
pub fn pwm_wave(duty: f64, freq: f64, t: f64) -> u8 {
    let phase = (t * freq).rem_euclid(1.0);
    u8::from(phase < duty)
}

/// Soil response to watering and drying.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilDynamics {
    /// Moisture fraction gained per litre delivered (1/L).
    pub k_soil: f64,
    /// Exponential drying rate (1/s).
    pub k_evap: f64,
}

impl Default for SoilDynamics {
    fn default() -> Self {
        SoilDynamics {
            k_soil: 0.02,
            k_evap: 2e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydraulicsState {
    pub tank1: TankState,
    pub tank2: TankState,
    pub soil: SoilState,
    pub pumps: [PumpState; 2],
}

/// Volumes moved during one step (L).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepFlows {
    pub transferred: f64,
    pub delivered: f64,
}

/// Advances the water path by `dt` seconds. Pump 1 moves water tank 1 → tank 2,
/// then pump 2 moves water tank 2 → soil. Nothing is created or lost.
pub fn hydraulics_step(state: &HydraulicsState, soil_dynamics: &SoilDynamics, dt: f64) -> (HydraulicsState, StepFlows) {
    let [p1, p2] = state.pumps;
    let mut tank1 = state.tank1;
    let mut tank2 = state.tank2;

    let transferred = (p1.flow() / 60.0 * dt).min(tank1.volume).min(tank2.free_space()).max(0.0);
    tank1.volume -= transferred;
    tank2.volume += transferred;

    let delivered = (p2.flow() / 60.0 * dt).min(tank2.volume).max(0.0);
    tank2.volume -= delivered;

    let m = state.soil.moisture_fraction * (-soil_dynamics.k_evap * dt).exp() + soil_dynamics.k_soil * delivered;
    (
        HydraulicsState {
            tank1,
            tank2,
            soil: SoilState::from_moisture(m),
            pumps: state.pumps,
        },
        StepFlows {
            transferred,
            delivered,
        },
    )
}
