//! Lead-acid battery bookkeeping and the load-disconnect relay.

/// Battery charge state and the fixed electrical parameters needed to step it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    /// State of charge (%).
    pub soc: f64,
    /// Capacity (Ah).
    pub capacity: f64,
    pub v_nominal: f64,
    pub r_internal: f64,
}

impl Default for BatteryState {
    fn default() -> Self {
        BatteryState {
            soc: 80.0,
            capacity: 7.0,
            v_nominal: 12.0,
            r_internal: 0.05,
        }
    }
}

impl BatteryState {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=100.0).contains(&self.soc) {
            return Err(format!("battery soc must lie in [0, 100], got {}", self.soc));
        }
        if !(self.capacity > 0.0 && self.capacity.is_finite()) {
            return Err("battery capacity must be > 0".into());
        }
        if !(self.r_internal >= 0.0 && self.r_internal.is_finite()) {
            return Err("battery internal resistance must be >= 0".into());
        }
        if !(self.v_nominal > 0.0 && self.v_nominal.is_finite()) {
            return Err("battery nominal voltage must be > 0".into());
        }
        Ok(())
    }

    /// Open-circuit voltage: linear, ±5 % of nominal across the SOC range.
    pub fn ocv(&self) -> f64 {
        self.v_nominal * (0.95 + 0.1 * self.soc / 100.0)
    }

    /// SOC change (%) produced by `ah` of charge.
    pub fn soc_per_ah(&self) -> f64 {
        100.0 / self.capacity
    }
}

/// Result of one coulomb-counting step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryStep {
    pub state: BatteryState,
    /// Charge rejected because the battery was full (Ah, >= 0).
    pub curtailed_ah: f64,
    /// Discharge that could not be supplied because the battery was empty (Ah, >= 0).
    pub unserved_ah: f64,
}

/// Coulomb counting over `dt` seconds; positive `net_current` charges.
pub fn battery_step(state: BatteryState, net_current: f64, dt: f64) -> BatteryStep {
    let ah = net_current * dt / 3600.0;
    let target = state.soc + state.soc_per_ah() * ah;
    let soc = target.clamp(0.0, 100.0);
    let excess_pct = target - soc;
    let (curtailed_ah, unserved_ah) = if excess_pct > 0.0 {
        (excess_pct / state.soc_per_ah(), 0.0)
    } else {
        (0.0, -excess_pct / state.soc_per_ah())
    };
    BatteryStep {
        state: BatteryState { soc, ..state },
        curtailed_ah,
        unserved_ah,
    }
}

/// Terminal voltage while `load_current` flows out of the battery.
pub fn terminal_voltage(state: &BatteryState, load_current: f64) -> f64 {
    state.ocv() - load_current * state.r_internal
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeRelayConfig {
    pub soc_reconnect: f64,
    pub soc_cutoff: f64,
}

impl Default for ChargeRelayConfig {
    fn default() -> Self {
        ChargeRelayConfig {
            soc_reconnect: 40.0,
            soc_cutoff: 20.0,
        }
    }
}

impl ChargeRelayConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.soc_cutoff < self.soc_reconnect) {
            return Err(format!(
                "soc_cutoff ({}) must be below soc_reconnect ({})",
                self.soc_cutoff, self.soc_reconnect
            ));
        }
        Ok(())
    }
}

/// Low-voltage disconnect with hysteresis: drop loads below the cutoff, bring
/// them back only at or above the reconnect level.
pub fn charge_relay(state: &BatteryState, cfg: &ChargeRelayConfig, loads_on: bool) -> bool {
    if loads_on {
        state.soc >= cfg.soc_cutoff
    } else {
        state.soc >= cfg.soc_reconnect
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_current_leaves_soc() {
        let b = BatteryState::default();
        assert_eq!(battery_step(b, 0.0, 10.0).state, b);
    }

    #[test]
    fn one_charge_hour_fills_battery() {
        let b = BatteryState {
            soc: 0.0,
            capacity: 7.0,
            ..Default::default()
        };
        let s = battery_step(b, 7.0, 3600.0);
        assert!((s.state.soc - 100.0).abs() < 1e-12);
        assert!(s.curtailed_ah < 1e-12);
    }

    #[test]
    fn full_battery_curtails() {
        let b = BatteryState {
            soc: 100.0,
            ..Default::default()
        };
        let s = battery_step(b, 3.6, 1000.0);
        assert_eq!(s.state.soc, 100.0);
        assert!((s.curtailed_ah - 1.0).abs() < 1e-12);
        let empty = BatteryState { soc: 0.0, ..b };
        let s = battery_step(empty, -3.6, 1000.0);
        assert_eq!(s.state.soc, 0.0);
        assert!((s.unserved_ah - 1.0).abs() < 1e-12);
    }

    #[test]
    fn terminal_voltage_cases() {
        let b = BatteryState {
            soc: 50.0,
            ..Default::default()
        };
        assert_eq!(terminal_voltage(&b, 0.0), b.v_nominal);
        let drop = terminal_voltage(&b, 0.0) - terminal_voltage(&b, 2.0);
        assert!((drop - 0.1).abs() < 1e-12);
        let full = BatteryState { soc: 100.0, ..b };
        let empty = BatteryState { soc: 0.0, ..b };
        assert!((terminal_voltage(&full, 0.0) - terminal_voltage(&empty, 0.0) - 0.1 * b.v_nominal).abs() < 1e-12);
    }

    #[test]
    fn relay_hysteresis() {
        let cfg = ChargeRelayConfig {
            soc_cutoff: 10.0,
            soc_reconnect: 30.0,
        };
        let at = |soc| BatteryState {
            soc,
            ..Default::default()
        };
        assert!(!charge_relay(&at(5.0), &cfg, true));
        let mut on = false;
        for soc in 10..30 {
            on = charge_relay(&at(soc as f64), &cfg, on);
            assert!(!on, "reconnected early at {soc}");
        }
        assert!(charge_relay(&at(30.0), &cfg, on));
        assert!(charge_relay(&at(15.0), &cfg, true));
    }

    proptest! {
        #[test]
        fn charge_then_discharge_is_symmetric(soc in 5.0f64..95.0, current in 0.0f64..2.0, dt in 0.01f64..60.0) {
            let b = BatteryState { soc, ..Default::default() };
            let up = battery_step(b, current, dt).state;
            let back = battery_step(up, -current, dt).state;
            prop_assert!((back.soc - soc).abs() < 1e-9);
        }
    }
}
