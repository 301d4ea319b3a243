//! Maximum-power-point tracking: perturb & observe, incremental conductance,
//! and the DC-DC conversion ratio that turns a reference voltage into a duty.

use thiserror::Error;

use crate::pv_model::PvError;

/// Below this voltage change the incremental-conductance rule compares `dI`
/// against zero instead of dividing by `dV`.
const DV_FLOOR: f64 = 1e-12;
/// Upper duty bound applied by [`duty_for_target`].
pub const MAX_DUTY: f64 = 0.99;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpptError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{topology:?} cannot convert {v_in} V to {v_out} V")]
    Unachievable {
        topology: ConverterTopology,
        v_in: f64,
        v_out: f64,
    },
    #[error("invalid MPPT configuration: {0}")]
    InvalidConfig(String),
}

/// Which branch table the perturb & observe rule follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// dP and dV of equal sign move the reference up, otherwise down.
    #[default]
    Standard,
    /// Branch table with the directions swapped: `dP > 0`: `dV > 0` lowers the reference,
    /// otherwise raises it; `dP <= 0`: `dV < 0` raises it, otherwise lowers it.
    InvertedBranches,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpptConfig {
    /// Perturbation step (V).
    pub step: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Conductance tolerance (A/V).
    pub ic_epsilon: f64,
    pub convention: Convention,
}

impl Default for MpptConfig {
    fn default() -> Self {
        MpptConfig {
            step: 0.2,
            v_min: 0.0,
            v_max: 40.0,
            ic_epsilon: 1e-3,
            convention: Convention::Standard,
        }
    }
}

impl MpptConfig {
    pub fn validate(&self) -> Result<(), MpptError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(MpptError::InvalidConfig("step must be > 0".into()));
        }
        if !(self.v_min < self.v_max) || !self.v_min.is_finite() || !self.v_max.is_finite() {
            return Err(MpptError::InvalidConfig("v_min must be < v_max".into()));
        }
        if !(self.ic_epsilon >= 0.0) {
            return Err(MpptError::InvalidConfig("ic_epsilon must be >= 0".into()));
        }
        Ok(())
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.v_min, self.v_max)
    }

    /// Mirrors an overshoot back inside the bounds, so a reference pushed
    /// against a bound keeps perturbing instead of sitting there with `dV = 0`.
    fn reflect(&self, v: f64) -> f64 {
        let v = if v < self.v_min {
            2.0 * self.v_min - v
        } else if v > self.v_max {
            2.0 * self.v_max - v
        } else {
            v
        };
        self.clamp(v)
    }
}

/// Controller memory between perturbation cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpptState {
    pub v_ref: f64,
    pub prev_v: f64,
    pub prev_i: f64,
    pub prev_p: f64,
    pub cycle: u64,
}

impl MpptState {
    pub fn new(v_ref: f64) -> Self {
        MpptState {
            v_ref,
            prev_v: 0.0,
            prev_i: 0.0,
            prev_p: 0.0,
            cycle: 0,
        }
    }

    fn advance(self, v_ref: f64, v: f64, i: f64, cfg: &MpptConfig) -> Self {
        MpptState {
            v_ref: cfg.reflect(v_ref),
            prev_v: v,
            prev_i: i,
            prev_p: v * i,
            cycle: self.cycle + 1,
        }
    }
}

/// One perturb & observe cycle on the measurement `(v, i)`.
///
/// The first cycle only records the sample.
pub fn po_step(state: MpptState, v: f64, i: f64, cfg: &MpptConfig) -> MpptState {
    if state.cycle == 0 {
        return state.advance(state.v_ref, v, i, cfg);
    }
    let dp = v * i - state.prev_p;
    let dv = v - state.prev_v;
    let up = match cfg.convention {
        Convention::Standard => (dp > 0.0 && dv > 0.0) || (dp < 0.0 && dv < 0.0),
        Convention::InvertedBranches => {
            if dp > 0.0 {
                dv <= 0.0
            } else {
                dv < 0.0
            }
        }
    };
    let v_ref = if up { state.v_ref + cfg.step } else { state.v_ref - cfg.step };
    state.advance(v_ref, v, i, cfg)
}

/// Incremental conductance `dI/dV + I/V`, or `dI` alone when the voltage did
/// not move.
pub fn conductance_signal(state: &MpptState, v: f64, i: f64) -> f64 {
    let di = i - state.prev_i;
    let dv = v - state.prev_v;
    if dv.abs() < DV_FLOOR {
        di
    } else {
        di / dv + i / v
    }
}

/// One incremental-conductance cycle. Holds the reference while the signal is
/// within `ic_epsilon` of zero.
///
/// The first cycle records the sample and probes one step upwards; without the
/// probe the next cycle would see `dV = dI = 0` and hold forever.
pub fn ic_step(state: MpptState, v: f64, i: f64, cfg: &MpptConfig) -> Result<MpptState, MpptError> {
    if !(v > 0.0) {
        return Err(MpptError::Domain(format!("incremental conductance needs v > 0, got {v}")));
    }
    if state.cycle == 0 {
        return Ok(state.advance(state.v_ref + cfg.step, v, i, cfg));
    }
    let g = conductance_signal(&state, v, i);
    let v_ref = if g > cfg.ic_epsilon {
        state.v_ref + cfg.step
    } else if g < -cfg.ic_epsilon {
        state.v_ref - cfg.step
    } else {
        state.v_ref
    };
    Ok(state.advance(v_ref, v, i, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MpptAlgorithm {
    #[default]
    PerturbObserve,
    IncrementalConductance,
}

impl MpptAlgorithm {
    pub fn step(self, state: MpptState, v: f64, i: f64, cfg: &MpptConfig) -> Result<MpptState, MpptError> {
        match self {
            MpptAlgorithm::PerturbObserve => Ok(po_step(state, v, i, cfg)),
            MpptAlgorithm::IncrementalConductance => ic_step(state, v, i, cfg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConverterTopology {
    /// `Vout/Vin = 1/(1-D)`.
    Boost,
    /// `Vout/Vin = D`.
    #[default]
    IdealBuck,
}

/// `Vout / Vin` at duty `d`.
pub fn conversion_ratio(d: f64, topology: ConverterTopology) -> Result<f64, MpptError> {
    if !(0.0..=1.0).contains(&d) {
        return Err(MpptError::Domain(format!("duty must lie in [0, 1], got {d}")));
    }
    match topology {
        ConverterTopology::Boost if d >= 1.0 => Err(MpptError::Domain("ratio is unbounded at d = 1".into())),
        ConverterTopology::Boost => Ok(1.0 / (1.0 - d)),
        ConverterTopology::IdealBuck => Ok(d),
    }
}

/// Duty that maps `v_in` onto `v_out_target`, clamped to `[0, MAX_DUTY]`.
pub fn duty_for_target(v_in: f64, v_out_target: f64, topology: ConverterTopology) -> Result<f64, MpptError> {
    if !(v_in > 0.0 && v_out_target > 0.0) {
        return Err(MpptError::Domain("converter voltages must be > 0".into()));
    }
    let unachievable = MpptError::Unachievable {
        topology,
        v_in,
        v_out: v_out_target,
    };
    let d = match topology {
        ConverterTopology::IdealBuck if v_out_target > v_in => return Err(unachievable),
        ConverterTopology::IdealBuck => v_out_target / v_in,
        ConverterTopology::Boost if v_out_target < v_in => return Err(unachievable),
        ConverterTopology::Boost => 1.0 - v_in / v_out_target,
    };
    Ok(d.clamp(0.0, MAX_DUTY))
}

/// Duty and resulting panel voltage when the converter tries to hold the panel
/// at `v_ref` while its output sits on a bus at `v_bus`.
///
/// Out-of-reach references saturate the duty at the nearest limit.
pub fn converter_operating_point(v_ref: f64, v_bus: f64, topology: ConverterTopology) -> (f64, f64) {
    let d = match duty_for_target(v_ref.max(f64::MIN_POSITIVE), v_bus, topology) {
        Ok(d) => d,
        Err(_) => match topology {
            ConverterTopology::IdealBuck => MAX_DUTY,
            ConverterTopology::Boost => 0.0,
        },
    };
    let v_panel = match topology {
        ConverterTopology::IdealBuck => v_bus / d,
        ConverterTopology::Boost => v_bus * (1.0 - d),
    };
    (d, v_panel)
}

/// One perturbation cycle recorded by [`track_source`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSample {
    pub cycle: u64,
    pub v: f64,
    pub i: f64,
    pub p: f64,
    /// Reference after the update.
    pub v_ref: f64,
    /// Conductance signal seen by the incremental-conductance rule.
    pub g: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error(transparent)]
    Source(#[from] PvError),
    #[error(transparent)]
    Mppt(#[from] MpptError),
}

/// Drives a controller against a current source `i(v)` for `cycles` cycles,
/// holding the source exactly at the reference each cycle.
pub fn track_source<F>(
    mut source: F,
    algorithm: MpptAlgorithm,
    cfg: &MpptConfig,
    v_start: f64,
    cycles: usize,
) -> Result<Vec<CycleSample>, TrackError>
where
    F: FnMut(f64) -> Result<f64, PvError>,
{
    cfg.validate()?;
    let mut state = MpptState::new(cfg.clamp(v_start));
    let mut out = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        let v = state.v_ref;
        let i = source(v)?;
        let g = conductance_signal(&state, v, i);
        state = algorithm.step(state, v, i, cfg)?;
        out.push(CycleSample {
            cycle: state.cycle,
            v,
            i,
            p: v * i,
            v_ref: state.v_ref,
            g,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> MpptConfig {
        MpptConfig {
            step: 0.2,
            v_min: 0.0,
            v_max: 40.0,
            ic_epsilon: 1e-3,
            convention: Convention::Standard,
        }
    }

    fn primed(v_ref: f64, v: f64, i: f64) -> MpptState {
        po_step(MpptState::new(v_ref), v, i, &cfg())
    }

    #[test]
    fn first_cycle_only_records() {
        let s = po_step(MpptState::new(15.0), 15.0, 1.0, &cfg());
        assert_eq!(s.v_ref, 15.0);
        assert_eq!((s.prev_v, s.prev_i, s.prev_p, s.cycle), (15.0, 1.0, 15.0, 1));
        let s = ic_step(MpptState::new(15.0), 15.0, 1.0, &cfg()).unwrap();
        assert!((s.v_ref - 15.2).abs() < 1e-12);
        assert_eq!(s.prev_p, 15.0);
    }

    #[test]
    fn standard_rising_power_and_voltage_steps_up() {
        let s = primed(15.0, 15.0, 1.0);
        let s = po_step(s, 15.2, 1.0, &cfg());
        assert!((s.v_ref - 15.2).abs() < 1e-12);
    }

    #[test]
    fn standard_rising_power_falling_voltage_steps_down() {
        let s = primed(15.0, 15.0, 1.0);
        let s = po_step(s, 14.8, 1.1, &cfg());
        assert!((s.v_ref - 14.8).abs() < 1e-12);
    }

    #[test]
    fn steady_input_still_perturbs() {
        for convention in [Convention::Standard, Convention::InvertedBranches] {
            let c = MpptConfig { convention, ..cfg() };
            let s = po_step(MpptState::new(15.0), 15.0, 1.0, &c);
            let s = po_step(s, 15.0, 1.0, &c);
            assert!((s.v_ref - 14.8).abs() < 1e-12);
        }
    }

    #[test]
    fn inverted_branches() {
        let c = MpptConfig {
            convention: Convention::InvertedBranches,
            ..cfg()
        };
        let base = po_step(MpptState::new(15.0), 15.0, 1.0, &c);
        // (dV, dP) sign pairs and the resulting direction
        let cases = [
            (15.2, 1.0, -1.0), // dP>0, dV>0
            (14.8, 1.2, 1.0),  // dP>0, dV<0
            (14.8, 0.5, 1.0),  // dP<0, dV<0
            (15.2, 0.5, -1.0), // dP<0, dV>0
        ];
        for (v, i, dir) in cases {
            let s = po_step(base, v, i, &c);
            assert!((s.v_ref - (15.0 + dir * 0.2)).abs() < 1e-12, "v={v} i={i}");
        }
    }

    #[test]
    fn ic_holds_at_zero_conductance() {
        // (i - 1.1)/1 + i/11 = 0  =>  i = 1.1 * 11/12
        let i = 1.1 * 11.0 / 12.0;
        let s = ic_step(MpptState::new(10.0), 10.0, 1.1, &cfg()).unwrap();
        assert!(conductance_signal(&s, 11.0, i).abs() < 1e-12);
        let s2 = ic_step(s, 11.0, i, &cfg()).unwrap();
        assert_eq!(s2.v_ref, s.v_ref);
    }

    fn quad_current(v: f64) -> f64 {
        (-(v - 17.0) * (v - 17.0) + 100.0) / v
    }

    #[test]
    fn ic_left_of_peak_steps_up() {
        let s = ic_step(MpptState::new(10.0), 10.0, quad_current(10.0), &cfg()).unwrap();
        // dI/dV = (64/11 - 5.1) = 0.71818..., I/V = 64/121 = 0.52893... -> g > 0
        assert!(conductance_signal(&s, 11.0, quad_current(11.0)) > 1.2);
        let s = ic_step(s, 11.0, quad_current(11.0), &cfg()).unwrap();
        assert!((s.v_ref - 10.4).abs() < 1e-12);
    }

    #[test]
    fn ic_right_of_peak_steps_down() {
        let s = ic_step(MpptState::new(20.0), 20.0, quad_current(20.0), &cfg()).unwrap();
        // dI/dV = 4 - 4.55 = -0.55, I/V = 84/441 = 0.1905 -> g < 0
        assert!(conductance_signal(&s, 21.0, quad_current(21.0)) < -0.35);
        let s = ic_step(s, 21.0, quad_current(21.0), &cfg()).unwrap();
        assert!((s.v_ref - 20.0).abs() < 1e-12);
    }

    #[test]
    fn ic_rejects_nonpositive_voltage() {
        assert!(matches!(ic_step(MpptState::new(1.0), 0.0, 1.0, &cfg()), Err(MpptError::Domain(_))));
    }

    #[test]
    fn conversion_ratio_cases() {
        assert_eq!(conversion_ratio(0.0, ConverterTopology::Boost).unwrap(), 1.0);
        assert_eq!(conversion_ratio(0.5, ConverterTopology::Boost).unwrap(), 2.0);
        assert_eq!(conversion_ratio(0.5, ConverterTopology::IdealBuck).unwrap(), 0.5);
        assert!(conversion_ratio(1.0, ConverterTopology::Boost).is_err());
        assert!(conversion_ratio(1.2, ConverterTopology::IdealBuck).is_err());
    }

    #[test]
    fn duty_for_target_cases() {
        assert_eq!(duty_for_target(20.0, 10.0, ConverterTopology::IdealBuck).unwrap(), 0.5);
        assert_eq!(duty_for_target(10.0, 20.0, ConverterTopology::Boost).unwrap(), 0.5);
        assert!(matches!(
            duty_for_target(10.0, 5.0, ConverterTopology::Boost),
            Err(MpptError::Unachievable { .. })
        ));
        assert!(matches!(
            duty_for_target(10.0, 12.0, ConverterTopology::IdealBuck),
            Err(MpptError::Unachievable { .. })
        ));
        assert_eq!(duty_for_target(10.0, 10.0, ConverterTopology::IdealBuck).unwrap(), MAX_DUTY);
    }

    #[test]
    fn bound_reflects_the_perturbation() {
        let c = MpptConfig {
            v_min: 13.0,
            ..cfg()
        };
        // steady input at the lower bound: the else-branch step bounces back up
        let s = po_step(MpptState::new(13.0), 13.0, 1.0, &c);
        let s = po_step(s, 13.0, 1.0, &c);
        assert!((s.v_ref - 13.2).abs() < 1e-12);
    }

    #[test]
    fn operating_point_tracks_reference_when_reachable() {
        let (d, v) = converter_operating_point(17.0, 12.5, ConverterTopology::IdealBuck);
        assert!((d - 12.5 / 17.0).abs() < 1e-15);
        assert!((v - 17.0).abs() < 1e-12);
        let (d, v) = converter_operating_point(8.0, 12.5, ConverterTopology::IdealBuck);
        assert_eq!(d, MAX_DUTY);
        assert!((v - 12.5 / MAX_DUTY).abs() < 1e-12);
        let (d, v) = converter_operating_point(17.0, 12.5, ConverterTopology::Boost);
        assert_eq!((d, v), (0.0, 12.5));
        let (_, v) = converter_operating_point(10.0, 12.5, ConverterTopology::Boost);
        assert!((v - 10.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn reference_stays_clamped(
            samples in prop::collection::vec((0.01f64..60.0, -2.0f64..3.0), 1..60),
            inverted in any::<bool>(),
            ic in any::<bool>(),
        ) {
            let c = MpptConfig {
                v_min: 5.0,
                v_max: 25.0,
                convention: if inverted { Convention::InvertedBranches } else { Convention::Standard },
                ..cfg()
            };
            let alg = if ic { MpptAlgorithm::IncrementalConductance } else { MpptAlgorithm::PerturbObserve };
            let mut s = MpptState::new(12.0);
            for (v, i) in samples {
                s = alg.step(s, v, i, &c).unwrap();
                prop_assert!(s.v_ref >= c.v_min && s.v_ref <= c.v_max);
            }
        }
    }
}
