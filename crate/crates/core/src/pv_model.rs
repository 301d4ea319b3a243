//! Double-diode photovoltaic cell and array model.
//!
//! The array current is implicit in itself (the series-resistance drop feeds
//! back into both diode exponentials), so every evaluation goes through a
//! safeguarded Newton iteration that keeps a sign-change bracket and drops to
//! bisection whenever a damped Newton step fails to reduce the residual.

use thiserror::Error;

/// Electron charge (C).
pub const ELECTRON_CHARGE: f64 = 1.602e-19;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.381e-23;
/// Reference cell temperature (K).
pub const T_REF: f64 = 298.15;
/// Reference irradiance (W/m²).
pub const G_REF: f64 = 1000.0;

/// Residual tolerance on the implicit current equation (A).
pub const CURRENT_TOLERANCE: f64 = 1e-9;
const NEWTON_MAX_ITER: usize = 100;
const BISECTION_MAX_ITER: usize = 400;
const DAMPING: f64 = 0.5;
const MAX_DAMPING_HALVINGS: usize = 8;

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + 273.15
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - 273.15
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PvError {
    #[error("current solver did not converge at {voltage} V (residual {residual:e} A)")]
    NoConvergence { voltage: f64, residual: f64 },
    #[error("curve has no points")]
    EmptyCurve,
    #[error("efficiency is undefined at zero irradiance")]
    DivisionDomain,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Electrical parameters of one cell of the double-diode model.
///
/// `io1` and `io2` are the saturation currents at [`T_REF`]; they scale with
/// temperature as `(T/T_REF)^xti * exp(Eg/kB * (1/T_REF - 1/T))`. Setting
/// `xti = 0` and `eg_ev = 0` freezes them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvCellParams {
    pub iph_stc: f64,
    pub io1: f64,
    pub io2: f64,
    pub rs: f64,
    pub rp: f64,
    pub a1: f64,
    pub a2: f64,
    /// Photocurrent temperature coefficient (1/K).
    pub alpha_i: f64,
    /// Band-gap energy used for saturation-current scaling (eV).
    pub eg_ev: f64,
    /// Temperature exponent of the saturation currents.
    pub xti: f64,
}

impl Default for PvCellParams {
    fn default() -> Self {
        PvCellParams {
            iph_stc: 1.25,
            io1: 1e-10,
            io2: 1e-6,
            rs: 0.1,
            rp: 500.0,
            a1: 1.0,
            a2: 2.0,
            alpha_i: 0.0006,
            eg_ev: 1.12,
            xti: 3.0,
        }
    }
}

impl PvCellParams {
    pub fn validate(&self) -> Result<(), PvError> {
        let bad = |msg: &str| Err(PvError::InvalidParameter(msg.to_string()));
        let all = [
            self.iph_stc,
            self.io1,
            self.io2,
            self.rs,
            self.rp,
            self.a1,
            self.a2,
            self.alpha_i,
            self.eg_ev,
            self.xti,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return bad("cell parameters must be finite");
        }
        if self.io1 <= 0.0 || self.io2 <= 0.0 {
            return bad("io1 and io2 must be > 0");
        }
        if self.rs < 0.0 {
            return bad("rs must be >= 0");
        }
        if self.rp <= 0.0 {
            return bad("rp must be > 0");
        }
        if self.a1 < 1.0 || self.a2 < 1.0 {
            return bad("a1 and a2 must be >= 1");
        }
        if self.iph_stc < 0.0 {
            return bad("iph_stc must be >= 0");
        }
        Ok(())
    }
}

/// A string of `ns` cells in series, `np` strings in parallel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvArraySpec {
    pub cell: PvCellParams,
    pub ns: u32,
    pub np: u32,
    /// Total array area (m²).
    pub area: f64,
    /// Nameplate power (W).
    pub rated_power: f64,
}

impl Default for PvArraySpec {
    /// A 20 W, 36-cell panel for a 12 V system.
    fn default() -> Self {
        PvArraySpec {
            cell: PvCellParams::default(),
            ns: 36,
            np: 1,
            area: 0.15,
            rated_power: 20.0,
        }
    }
}

impl PvArraySpec {
    /// A single cell viewed as a 1x1 array.
    pub fn single_cell(cell: PvCellParams) -> Self {
        PvArraySpec {
            cell,
            ns: 1,
            np: 1,
            ..PvArraySpec::default()
        }
    }

    pub fn validate(&self) -> Result<(), PvError> {
        self.cell.validate()?;
        if self.ns < 1 || self.np < 1 {
            return Err(PvError::InvalidParameter("ns and np must be >= 1".into()));
        }
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(PvError::InvalidParameter("area must be > 0".into()));
        }
        if !(self.rated_power > 0.0 && self.rated_power.is_finite()) {
            return Err(PvError::InvalidParameter("rated_power must be > 0".into()));
        }
        Ok(())
    }
}

/// Plane-of-array irradiance (W/m²) and cell temperature (K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingEnv {
    pub irradiance: f64,
    pub cell_temp: f64,
}

impl OperatingEnv {
    pub fn new(irradiance: f64, cell_temp: f64) -> Self {
        OperatingEnv {
            irradiance,
            cell_temp,
        }
    }

    pub fn stc() -> Self {
        OperatingEnv::new(G_REF, T_REF)
    }

    pub fn validate(&self) -> Result<(), PvError> {
        if !(self.irradiance >= 0.0 && self.irradiance.is_finite()) {
            return Err(PvError::InvalidParameter("irradiance must be >= 0".into()));
        }
        if !(self.cell_temp > 0.0 && self.cell_temp.is_finite()) {
            return Err(PvError::InvalidParameter("cell temperature must be > 0 K".into()));
        }
        Ok(())
    }
}

/// `(vt1, vt2)`: `a * kB * Tc / q` for each diode.
pub fn thermal_voltages(cell: &PvCellParams, env: &OperatingEnv) -> (f64, f64) {
    let kt_q = BOLTZMANN * env.cell_temp / ELECTRON_CHARGE;
    (cell.a1 * kt_q, cell.a2 * kt_q)
}

pub fn photocurrent(cell: &PvCellParams, env: &OperatingEnv) -> f64 {
    let iph = cell.iph_stc * (env.irradiance / G_REF) * (1.0 + cell.alpha_i * (env.cell_temp - T_REF));
    iph.max(0.0)
}

/// Saturation currents `(io1, io2)` at the cell temperature.
pub fn saturation_currents(cell: &PvCellParams, env: &OperatingEnv) -> (f64, f64) {
    let ratio = env.cell_temp / T_REF;
    let eg_over_k = cell.eg_ev * ELECTRON_CHARGE / BOLTZMANN;
    let scale = ratio.powf(cell.xti) * (eg_over_k * (1.0 / T_REF - 1.0 / env.cell_temp)).exp();
    (cell.io1 * scale, cell.io2 * scale)
}

/// The array equation with everything that depends only on the environment
/// evaluated once.
#[derive(Debug, Clone, Copy)]
struct ArrayEquation {
    iph: f64,
    io1: f64,
    io2: f64,
    vt1: f64,
    vt2: f64,
    rs: f64,
    rp: f64,
    ns: f64,
    np: f64,
}

impl ArrayEquation {
    fn new(spec: &PvArraySpec, env: &OperatingEnv) -> Self {
        let (vt1, vt2) = thermal_voltages(&spec.cell, env);
        let (io1, io2) = saturation_currents(&spec.cell, env);
        ArrayEquation {
            iph: photocurrent(&spec.cell, env),
            io1,
            io2,
            vt1,
            vt2,
            rs: spec.cell.rs,
            rp: spec.cell.rp,
            ns: spec.ns as f64,
            np: spec.np as f64,
        }
    }

    /// Junction voltage of one cell.
    fn junction(&self, va: f64, ia: f64) -> f64 {
        va / self.ns + ia * self.rs / self.np
    }

    /// Right-hand side minus left-hand side; strictly decreasing in `ia`.
    fn residual(&self, va: f64, ia: f64) -> f64 {
        let u = self.junction(va, ia);
        self.np * self.iph
            - self.np * self.io1 * (u / self.vt1).exp_m1()
            - self.np * self.io2 * (u / self.vt2).exp_m1()
            - self.np * u / self.rp
            - ia
    }

    fn slope(&self, va: f64, ia: f64) -> f64 {
        let u = self.junction(va, ia);
        let g = self.io1 * (u / self.vt1).exp() / self.vt1 + self.io2 * (u / self.vt2).exp() / self.vt2 + 1.0 / self.rp;
        -self.rs * g - 1.0
    }

    fn bracket(&self, va: f64) -> Option<(f64, f64)> {
        let w = (2.0 * self.np * self.iph).max(1e-3);
        let (mut lo, mut hi) = (-w, w);
        for _ in 0..200 {
            if self.residual(va, hi) <= 0.0 {
                break;
            }
            hi *= 2.0;
        }
        for _ in 0..200 {
            if self.residual(va, lo) >= 0.0 {
                break;
            }
            lo *= 2.0;
        }
        (self.residual(va, lo) >= 0.0 && self.residual(va, hi) <= 0.0).then_some((lo, hi))
    }

    fn solve(&self, va: f64) -> Result<f64, PvError> {
        let (mut lo, mut hi) = self.bracket(va).ok_or(PvError::NoConvergence {
            voltage: va,
            residual: f64::NAN,
        })?;

        let mut x = (self.np * self.iph).clamp(lo, hi);
        let mut f = self.residual(va, x);
        for _ in 0..NEWTON_MAX_ITER {
            if f.abs() <= CURRENT_TOLERANCE {
                return Ok(x);
            }
            if f > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut step = -f / self.slope(va, x);
            let mut next = None;
            for _ in 0..MAX_DAMPING_HALVINGS {
                let cand = x + step;
                if cand > lo && cand < hi {
                    let fc = self.residual(va, cand);
                    if fc.is_finite() && fc.abs() < f.abs() {
                        next = Some((cand, fc));
                        break;
                    }
                }
                step *= DAMPING;
            }
            (x, f) = match next {
                Some(p) => p,
                None => {
                    let mid = 0.5 * (lo + hi);
                    (mid, self.residual(va, mid))
                }
            };
        }

        // Newton budget spent: plain bisection on whatever bracket is left.
        for _ in 0..BISECTION_MAX_ITER {
            if f.abs() <= CURRENT_TOLERANCE {
                return Ok(x);
            }
            if f > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            x = mid;
            f = self.residual(va, x);
        }
        if f.abs() <= CURRENT_TOLERANCE {
            Ok(x)
        } else {
            Err(PvError::NoConvergence {
                voltage: va,
                residual: f,
            })
        }
    }
}

fn check_voltage(v: f64) -> Result<(), PvError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(PvError::InvalidParameter(format!("terminal voltage must be finite and >= 0, got {v}")))
    }
}

/// Output current of a single cell at terminal voltage `vc`.
pub fn cell_current(cell: &PvCellParams, env: &OperatingEnv, vc: f64) -> Result<f64, PvError> {
    array_current(&PvArraySpec::single_cell(*cell), env, vc)
}

/// Output current of the array at terminal voltage `va`.
pub fn array_current(spec: &PvArraySpec, env: &OperatingEnv, va: f64) -> Result<f64, PvError> {
    check_voltage(va)?;
    ArrayEquation::new(spec, env).solve(va)
}

/// Residual of the implicit array equation at `(va, ia)`.
pub fn array_residual(spec: &PvArraySpec, env: &OperatingEnv, va: f64, ia: f64) -> f64 {
    ArrayEquation::new(spec, env).residual(va, ia)
}

/// Open-circuit voltage, found by bisection on `Ia(v) = 0`. Zero in the dark.
pub fn open_circuit_voltage(spec: &PvArraySpec, env: &OperatingEnv) -> Result<f64, PvError> {
    let eq = ArrayEquation::new(spec, env);
    if eq.iph <= 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = eq.ns;
    let mut grow = 0;
    while eq.solve(hi)? >= 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(PvError::NoConvergence {
                voltage: hi,
                residual: f64::NAN,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eq.solve(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvPoint {
    pub v: f64,
    pub i: f64,
    pub p: f64,
}

impl IvPoint {
    pub fn new(v: f64, i: f64) -> Self {
        IvPoint { v, i, p: v * i }
    }
}

/// Points ordered by strictly increasing voltage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IvCurve {
    points: Vec<IvPoint>,
}

impl IvCurve {
    pub fn new(points: Vec<IvPoint>) -> Result<Self, PvError> {
        if points.windows(2).any(|w| !(w[1].v > w[0].v)) {
            return Err(PvError::InvalidParameter("curve voltages must be strictly increasing".into()));
        }
        Ok(IvCurve { points })
    }

    pub fn points(&self) -> &[IvPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `n_points` evenly spaced samples on `[0, Voc]`.
///
/// In the dark `Voc` is zero and the sweep collapses to the single point
/// `(0, 0)`.
pub fn iv_sweep(spec: &PvArraySpec, env: &OperatingEnv, n_points: usize) -> Result<IvCurve, PvError> {
    if n_points < 2 {
        return Err(PvError::InvalidParameter("iv sweep needs at least 2 points".into()));
    }
    let voc = open_circuit_voltage(spec, env)?;
    if voc <= 0.0 {
        return IvCurve::new(vec![IvPoint::new(0.0, 0.0)]);
    }
    let eq = ArrayEquation::new(spec, env);
    let last = (n_points - 1) as f64;
    let points = (0..n_points)
        .map(|k| {
            let v = if k + 1 == n_points { voc } else { voc * k as f64 / last };
            eq.solve(v).map(|i| IvPoint::new(v, i))
        })
        .collect::<Result<Vec<_>, _>>()?;
    IvCurve::new(points)
}

/// Maximum-power point; ties resolve to the lowest voltage.
pub fn find_mpp(curve: &IvCurve) -> Result<IvPoint, PvError> {
    let mut best: Option<IvPoint> = None;
    for pt in curve.points() {
        match best {
            Some(b) if pt.p <= b.p => {}
            _ => best = Some(*pt),
        }
    }
    best.ok_or(PvError::EmptyCurve)
}

/// MPP of an `n_points` sweep.
pub fn dense_mpp(spec: &PvArraySpec, env: &OperatingEnv, n_points: usize) -> Result<IvPoint, PvError> {
    find_mpp(&iv_sweep(spec, env, n_points)?)
}

/// Conversion efficiency `va * ia / (area * G)`.
pub fn efficiency(spec: &PvArraySpec, env: &OperatingEnv, va: f64, ia: f64) -> Result<f64, PvError> {
    if env.irradiance <= 0.0 {
        return Err(PvError::DivisionDomain);
    }
    Ok(va * ia / (spec.area * env.irradiance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stc() -> OperatingEnv {
        OperatingEnv::stc()
    }

    /// Bisection on the array equation written out independently.
    fn oracle_current(spec: &PvArraySpec, env: &OperatingEnv, va: f64) -> f64 {
        let c = &spec.cell;
        let (ns, np) = (spec.ns as f64, spec.np as f64);
        let t = env.cell_temp;
        let vt = |a: f64| a * 1.381e-23 * t / 1.602e-19;
        let scale = (t / 298.15).powf(c.xti) * (c.eg_ev * 1.602e-19 / 1.381e-23 * (1.0 / 298.15 - 1.0 / t)).exp();
        let iph = (c.iph_stc * env.irradiance / 1000.0 * (1.0 + c.alpha_i * (t - 298.15))).max(0.0);
        let f = |i: f64| {
            let u = va / ns + i * c.rs / np;
            np * iph - np * c.io1 * scale * ((u / vt(c.a1)).exp() - 1.0) - np * c.io2 * scale * ((u / vt(c.a2)).exp() - 1.0)
                - np / c.rp * u
                - i
        };
        let (mut lo, mut hi) = (-iph - 1.0, 2.0 * iph + 1.0);
        while f(lo) < 0.0 {
            lo *= 2.0;
        }
        while f(hi) > 0.0 {
            hi *= 2.0;
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn thermal_voltage_matches_hand_evaluation() {
        let cell = PvCellParams::default();
        let (vt1, vt2) = thermal_voltages(&cell, &stc());
        // 1.381e-23 * 298.15 / 1.602e-19
        assert!((vt1 - 0.025_701_94).abs() < 1e-8, "vt1 = {vt1}");
        assert_eq!(vt2, 2.0 * vt1);
        let hot = OperatingEnv::new(1000.0, 596.30);
        assert!((thermal_voltages(&cell, &hot).0 - 2.0 * vt1).abs() < 1e-15);
    }

    #[test]
    fn photocurrent_cases() {
        let cell = PvCellParams {
            iph_stc: 1.2,
            ..Default::default()
        };
        assert!((photocurrent(&cell, &stc()) - 1.2).abs() < 1e-15);
        assert_eq!(photocurrent(&cell, &OperatingEnv::new(0.0, 298.15)), 0.0);
        let flat = PvCellParams { alpha_i: 0.0, ..cell };
        assert!((photocurrent(&flat, &OperatingEnv::new(500.0, 310.0)) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn dark_short_circuit_is_zero() {
        let cell = PvCellParams::default();
        let i = cell_current(&cell, &OperatingEnv::new(0.0, 298.15), 0.0).unwrap();
        assert!(i.abs() <= 1e-12);
    }

    #[test]
    fn ideal_cell_short_circuit_gives_photocurrent() {
        let cell = PvCellParams {
            rs: 0.0,
            rp: 1e12,
            ..Default::default()
        };
        let i = cell_current(&cell, &stc(), 0.0).unwrap();
        assert!((i - photocurrent(&cell, &stc())).abs() <= 1e-9);
    }

    #[test]
    fn cell_current_matches_bisection_oracle() {
        let cell = PvCellParams::default();
        let spec = PvArraySpec::single_cell(cell);
        let i = cell_current(&cell, &stc(), 0.5).unwrap();
        let oracle = oracle_current(&spec, &stc(), 0.5);
        assert!((i - oracle).abs() < 1e-9, "{i} vs {oracle}");
    }

    #[test]
    fn unit_array_reduces_to_cell() {
        let cell = PvCellParams::default();
        let spec = PvArraySpec::single_cell(cell);
        for k in 0..30 {
            let v = 0.025 * k as f64;
            let a = array_current(&spec, &stc(), v).unwrap();
            let c = cell_current(&cell, &stc(), v).unwrap();
            assert_eq!(a, c);
        }
    }

    #[test]
    fn doubling_parallel_strings_doubles_current() {
        let one = PvArraySpec::default();
        let two = PvArraySpec { np: 2, ..one };
        for va in [0.0, 5.0, 12.0, 17.0, 20.0] {
            let i1 = array_current(&one, &stc(), va).unwrap();
            let i2 = array_current(&two, &stc(), va).unwrap();
            assert!((i2 - 2.0 * i1).abs() < 4e-9, "va={va}: {i2} vs 2*{i1}");
        }
    }

    #[test]
    fn current_is_negative_beyond_open_circuit() {
        let spec = PvArraySpec::default();
        let voc = open_circuit_voltage(&spec, &stc()).unwrap();
        let i = array_current(&spec, &stc(), voc + 1.0).unwrap();
        assert!(i < 0.0);
        assert!(oracle_current(&spec, &stc(), voc + 1.0) < 0.0);
    }

    #[test]
    fn negative_voltage_rejected() {
        let spec = PvArraySpec::default();
        assert!(matches!(array_current(&spec, &stc(), -1.0), Err(PvError::InvalidParameter(_))));
    }

    #[test]
    fn two_point_sweep_hits_endpoints() {
        let spec = PvArraySpec::default();
        let curve = iv_sweep(&spec, &stc(), 2).unwrap();
        let pts = curve.points();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].v, 0.0);
        assert!((pts[0].i - array_current(&spec, &stc(), 0.0).unwrap()).abs() < 1e-15);
        assert!(pts[1].i.abs() < 1e-8);
    }

    #[test]
    fn dark_sweep_collapses() {
        let curve = iv_sweep(&PvArraySpec::default(), &OperatingEnv::new(0.0, 298.15), 50).unwrap();
        assert_eq!(curve.points(), &[IvPoint::new(0.0, 0.0)]);
    }

    #[test]
    fn sweep_needs_two_points() {
        assert!(iv_sweep(&PvArraySpec::default(), &stc(), 1).is_err());
    }

    #[test]
    fn find_mpp_cases() {
        assert_eq!(find_mpp(&IvCurve::default()), Err(PvError::EmptyCurve));
        let single = IvCurve::new(vec![IvPoint::new(3.0, 2.0)]).unwrap();
        assert_eq!(find_mpp(&single).unwrap(), IvPoint::new(3.0, 2.0));
        let curve = IvCurve::new(
            [(1.0, 0.0), (2.0, 2.5), (3.0, 3.0), (4.0, 1.0), (5.0, 0.0)]
                .iter()
                .map(|&(v, i)| IvPoint::new(v, i))
                .collect(),
        )
        .unwrap();
        assert_eq!(find_mpp(&curve).unwrap().p, 9.0);
        let tie = IvCurve::new(vec![IvPoint::new(1.0, 2.0), IvPoint::new(2.0, 1.0)]).unwrap();
        assert_eq!(find_mpp(&tie).unwrap().v, 1.0);
    }

    #[test]
    fn mpp_agrees_with_dense_sweep_within_one_cell() {
        let spec = PvArraySpec::default();
        let coarse = dense_mpp(&spec, &stc(), 500).unwrap();
        let dense = dense_mpp(&spec, &stc(), 10_000).unwrap();
        let voc = open_circuit_voltage(&spec, &stc()).unwrap();
        assert!((coarse.v - dense.v).abs() <= voc / 499.0);
        assert!(coarse.p <= dense.p + 1e-12);
    }

    #[test]
    fn curve_rejects_unordered_voltages() {
        assert!(IvCurve::new(vec![IvPoint::new(1.0, 0.0), IvPoint::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn efficiency_cases() {
        let spec = PvArraySpec {
            area: 0.1,
            ..Default::default()
        };
        assert!((efficiency(&spec, &stc(), 10.0, 1.0).unwrap() - 0.10).abs() < 1e-15);
        assert_eq!(efficiency(&spec, &stc(), 10.0, 0.0).unwrap(), 0.0);
        let big = PvArraySpec { area: 0.2, ..spec };
        assert_eq!(
            efficiency(&spec, &stc(), 10.0, 1.0).unwrap(),
            efficiency(&big, &stc(), 10.0, 2.0).unwrap()
        );
        assert_eq!(
            efficiency(&spec, &OperatingEnv::new(0.0, 298.15), 1.0, 1.0),
            Err(PvError::DivisionDomain)
        );
    }

    #[test]
    fn parameter_validation() {
        assert!(PvArraySpec::default().validate().is_ok());
        let bad = PvCellParams { a1: 0.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PvArraySpec { ns: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(OperatingEnv::new(100.0, 0.0).validate().is_err());
    }
}
