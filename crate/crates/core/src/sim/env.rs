use crate::tracker::SunModel;

use super::SimError;

/// Piecewise-linear schedule over time, held flat outside its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    knots: Vec<(f64, f64)>,
}

impl Schedule {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, SimError> {
        if knots.is_empty() {
            return Err(SimError::InvalidScenario("schedule needs at least one knot".into()));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(SimError::InvalidScenario("schedule knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SimError::InvalidScenario("schedule times must be strictly increasing".into()));
        }
        Ok(Schedule { knots })
    }

    pub fn constant(value: f64) -> Self {
        Schedule {
            knots: vec![(0.0, value)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn at(&self, t: f64) -> f64 {
        let k = &self.knots;
        let idx = k.partition_point(|&(tk, _)| tk <= t);
        if idx == 0 {
            return k[0].1;
        }
        if idx == k.len() {
            return k[k.len() - 1].1;
        }
        let (t0, v0) = k[idx - 1];
        if t == t0 {
            return v0;
        }
        let (t1, v1) = k[idx];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// Scripted environment. Irradiance is the clear-sky value on a sun-facing
/// plane; the panel sees it scaled by its incidence cosine.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvProfile {
    pub irradiance_wm2: Schedule,
    /// Cell temperature (°C).
    pub temp_c: Schedule,
    pub sun_azimuth_deg: Schedule,
    pub sun_elevation_deg: Schedule,
    /// Linear-actuator target (mm).
    pub elevation_target_mm: Schedule,
}

impl Default for EnvProfile {
    fn default() -> Self {
        EnvProfile {
            irradiance_wm2: Schedule::constant(1000.0),
            temp_c: Schedule::constant(25.0),
            sun_azimuth_deg: Schedule::constant(180.0),
            sun_elevation_deg: Schedule::constant(45.0),
            elevation_target_mm: Schedule::constant(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSample {
    pub sun: SunModel,
    /// Cell temperature (K).
    pub cell_temp: f64,
    pub elevation_target_mm: f64,
}

pub fn env_at(profile: &EnvProfile, t: f64) -> EnvSample {
    EnvSample {
        sun: SunModel {
            azimuth_deg: profile.sun_azimuth_deg.at(t),
            elevation_deg: profile.sun_elevation_deg.at(t),
            g: profile.irradiance_wm2.at(t).max(0.0),
        },
        cell_temp: crate::pv_model::celsius_to_kelvin(profile.temp_c.at(t)),
        elevation_target_mm: profile.elevation_target_mm.at(t),
    }
}
