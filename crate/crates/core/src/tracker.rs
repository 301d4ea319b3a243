//! Four-quadrant LDR sun sensing, the positioning decision, and the axis
//! kinematics of the tracker (stepper azimuth, DC-motor tilt, linear-actuator
//! elevation), plus the pulse-width/PID angle servo.
//!
//! World frame: x east, y north, z up. Azimuth is clockwise from north. The
//! panel normal at azimuth `a` and tilt `t` is
//! `(cos t sin a, cos t cos a, sin t)`, so the tilt equals the elevation of the
//! direction the panel faces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Full-scale LDR reading.
pub const LDR_FULL_SCALE: f64 = 1023.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackerError {
    #[error("{value} is outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
}

type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: Vec3) -> Vec3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn direction(azimuth_deg: f64, elevation_deg: f64) -> Vec3 {
    let (a, e) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    [e.cos() * a.sin(), e.cos() * a.cos(), e.sin()]
}

/// Light readings of the four quadrant sensors (0..=1023). North is the top
/// edge of the panel (towards higher tilt), east the right edge (towards
/// higher azimuth).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdrQuad {
    pub ne: f64,
    pub nw: f64,
    pub se: f64,
    pub sw: f64,
}

impl LdrQuad {
    pub fn uniform(v: f64) -> Self {
        LdrQuad {
            ne: v,
            nw: v,
            se: v,
            sw: v,
        }
    }

    pub fn top(&self) -> f64 {
        (self.ne + self.nw) / 2.0
    }

    pub fn bottom(&self) -> f64 {
        (self.se + self.sw) / 2.0
    }

    pub fn left(&self) -> f64 {
        (self.nw + self.sw) / 2.0
    }

    pub fn right(&self) -> f64 {
        (self.ne + self.se) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperSpec {
    pub steps_per_rev: u32,
    pub step_deg: f64,
}

impl Default for StepperSpec {
    fn default() -> Self {
        StepperSpec {
            steps_per_rev: 200,
            step_deg: 1.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerPose {
    /// Signed step count of the rotation stepper.
    pub azimuth_steps: i64,
    /// Tilt (deg, 0..=180).
    pub tilt_deg: f64,
    /// Linear-actuator extension (mm).
    pub elevation_mm: f64,
}

impl Default for TrackerPose {
    fn default() -> Self {
        TrackerPose {
            azimuth_steps: 100,
            tilt_deg: 45.0,
            elevation_mm: 0.0,
        }
    }
}

impl TrackerPose {
    /// Azimuth in `[0, 360)`.
    pub fn azimuth_deg(&self, stepper: &StepperSpec) -> f64 {
        let steps = self.azimuth_steps.rem_euclid(stepper.steps_per_rev as i64);
        steps as f64 * stepper.step_deg
    }

    pub fn normal(&self, stepper: &StepperSpec) -> Vec3 {
        direction(self.azimuth_deg(stepper), self.tilt_deg)
    }
}

/// Sun direction and clear-sky irradiance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunModel {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Irradiance on a surface facing the sun (W/m²).
    pub g: f64,
}

impl SunModel {
    pub fn direction(&self) -> Vec3 {
        direction(self.azimuth_deg, self.elevation_deg)
    }
}

/// Cosine of the incidence angle between the panel normal and the sun.
pub fn incidence_cos(sun: &SunModel, pose: &TrackerPose, stepper: &StepperSpec) -> f64 {
    dot(pose.normal(stepper), sun.direction())
}

/// Irradiance reaching the panel plane (W/m²).
pub fn plane_of_array_irradiance(sun: &SunModel, pose: &TrackerPose, stepper: &StepperSpec) -> f64 {
    sun.g * incidence_cos(sun, pose, stepper).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdrSensor {
    /// Tilt of each quadrant sensor away from the panel normal, along both
    /// panel axes (deg).
    pub offset_deg: f64,
    /// Half-width of the uniform reading noise (counts).
    pub noise_counts: f64,
}

impl Default for LdrSensor {
    fn default() -> Self {
        LdrSensor {
            offset_deg: 15.0,
            noise_counts: 0.0,
        }
    }
}

/// Cosine-response quadrant readings, `1023 * g/1000 * max(0, cos)`, with
/// optional seeded noise.
pub fn ldr_readings(
    sun: &SunModel,
    pose: &TrackerPose,
    sensor: &LdrSensor,
    stepper: &StepperSpec,
    noise_seed: u64,
) -> LdrQuad {
    let az = pose.azimuth_deg(stepper).to_radians();
    let tilt = pose.tilt_deg.to_radians();
    let n = pose.normal(stepper);
    // panel "up" (towards higher tilt) and "right" (towards higher azimuth)
    let up = [-tilt.sin() * az.sin(), -tilt.sin() * az.cos(), tilt.cos()];
    let right = [az.cos(), -az.sin(), 0.0];
    let k = sensor.offset_deg.to_radians().tan();
    let s = sun.direction();
    let scale = LDR_FULL_SCALE * sun.g / 1000.0;
    let read = |su: f64, sr: f64| {
        let q = normalize([
            n[0] + k * (su * up[0] + sr * right[0]),
            n[1] + k * (su * up[1] + sr * right[1]),
            n[2] + k * (su * up[2] + sr * right[2]),
        ]);
        scale * dot(q, s).max(0.0)
    };
    let mut quad = [read(1.0, 1.0), read(1.0, -1.0), read(-1.0, 1.0), read(-1.0, -1.0)];
    if sensor.noise_counts > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        for q in quad.iter_mut() {
            *q += rng.random_range(-sensor.noise_counts..=sensor.noise_counts);
        }
    }
    for q in quad.iter_mut() {
        *q = q.clamp(0.0, LDR_FULL_SCALE);
    }
    LdrQuad {
        ne: quad[0],
        nw: quad[1],
        se: quad[2],
        sw: quad[3],
    }
}

/// Per-axis motion request, each component in {-1, 0, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MotionCommand {
    pub azimuth: i8,
    pub tilt: i8,
}

impl MotionCommand {
    pub fn is_idle(&self) -> bool {
        self.azimuth == 0 && self.tilt == 0
    }
}

fn deadband_sign(diff: f64, tolerance: f64) -> i8 {
    if diff.abs() > tolerance {
        if diff > 0.0 {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

/// Compare opposite-edge averages; move towards the brighter edge when the
/// difference exceeds `tolerance`.
pub fn tracker_decide(quad: &LdrQuad, tolerance: f64) -> MotionCommand {
    MotionCommand {
        azimuth: deadband_sign(quad.right() - quad.left(), tolerance),
        tilt: deadband_sign(quad.top() - quad.bottom(), tolerance),
    }
}

/// Drive parameters for the two tracking axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisDrive {
    pub stepper: StepperSpec,
    /// Rated output speed of the geared tilt motor (rpm).
    pub tilt_rated_rpm: f64,
    /// PWM duty applied to the tilt motor while it moves.
    pub tilt_duty: f64,
}

impl Default for AxisDrive {
    fn default() -> Self {
        AxisDrive {
            stepper: StepperSpec::default(),
            tilt_rated_rpm: 12.0,
            tilt_duty: 0.125,
        }
    }
}

impl AxisDrive {
    /// Tilt slew rate (deg/s).
    pub fn tilt_rate(&self) -> f64 {
        self.tilt_rated_rpm * 6.0 * self.tilt_duty
    }
}

/// One control cycle: a single azimuth step and a rate-limited tilt move.
pub fn stepper_step(pose: &TrackerPose, cmd: MotionCommand, drive: &AxisDrive, dt: f64) -> TrackerPose {
    TrackerPose {
        azimuth_steps: pose.azimuth_steps + cmd.azimuth as i64,
        tilt_deg: (pose.tilt_deg + cmd.tilt as f64 * drive.tilt_rate() * dt).clamp(0.0, 180.0),
        elevation_mm: pose.elevation_mm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    pub sensor: LdrSensor,
    /// Decision dead band (counts).
    pub tolerance: f64,
    pub drive: AxisDrive,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            sensor: LdrSensor::default(),
            tolerance: 20.0,
            drive: AxisDrive::default(),
        }
    }
}

/// Sense, decide, and move once.
pub fn tracker_cycle(
    sun: &SunModel,
    pose: &TrackerPose,
    cfg: &TrackerConfig,
    dt: f64,
    noise_seed: u64,
) -> (LdrQuad, MotionCommand, TrackerPose) {
    let quad = ldr_readings(sun, pose, &cfg.sensor, &cfg.drive.stepper, noise_seed);
    let cmd = tracker_decide(&quad, cfg.tolerance);
    (quad, cmd, stepper_step(pose, cmd, &cfg.drive, dt))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorSpec {
    pub stroke_mm: f64,
    pub rate_mm_s: f64,
}

impl Default for ActuatorSpec {
    fn default() -> Self {
        ActuatorSpec {
            stroke_mm: 300.0,
            rate_mm_s: 5.0,
        }
    }
}

/// Moves the linear actuator towards `target_mm` by at most `rate_mm_s * dt`,
/// never past the target, within `[0, stroke_mm]`.
pub fn elevation_step(pose: &TrackerPose, target_mm: f64, rate_mm_s: f64, stroke_mm: f64, dt: f64) -> TrackerPose {
    let target = target_mm.clamp(0.0, stroke_mm);
    let max_move = rate_mm_s * dt;
    let delta = (target - pose.elevation_mm).clamp(-max_move, max_move);
    TrackerPose {
        elevation_mm: (pose.elevation_mm + delta).clamp(0.0, stroke_mm),
        ..*pose
    }
}

/// Linear pulse-width to angle map of the hobby-servo style DC motor drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseWidthMap {
    pub pw_min: f64,
    pub pw_max: f64,
    pub angle_min: f64,
    pub angle_max: f64,
}

impl Default for PulseWidthMap {
    fn default() -> Self {
        PulseWidthMap {
            pw_min: 1.25,
            pw_max: 1.75,
            angle_min: 0.0,
            angle_max: 180.0,
        }
    }
}

fn check_range(value: f64, min: f64, max: f64) -> Result<(), TrackerError> {
    if (min..=max).contains(&value) {
        Ok(())
    } else {
        Err(TrackerError::OutOfRange { value, min, max })
    }
}

/// Pulse width (ms) to panel angle (deg).
pub fn pulse_width_to_angle(pw: f64, map: &PulseWidthMap) -> Result<f64, TrackerError> {
    check_range(pw, map.pw_min, map.pw_max)?;
    Ok(map.angle_min + (map.angle_max - map.angle_min) * (pw - map.pw_min) / (map.pw_max - map.pw_min))
}

/// Panel angle (deg) to pulse width (ms).
pub fn angle_to_pulse_width(angle: f64, map: &PulseWidthMap) -> Result<f64, TrackerError> {
    check_range(angle, map.angle_min, map.angle_max)?;
    Ok(map.pw_min + (map.pw_max - map.pw_min) * (angle - map.angle_min) / (map.angle_max - map.angle_min))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Anti-windup bound on the integral accumulator.
    pub integral_limit: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        PidGains {
            kp: 4.0,
            ki: 0.5,
            kd: 0.05,
            integral_limit: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
}

/// `kp*e + ki*∫e + kd*de/dt` with a rectangle-rule, clamped integral.
pub fn pid_step(gains: &PidGains, state: PidState, error: f64, dt: f64) -> (f64, PidState) {
    let integral = (state.integral + error * dt).clamp(-gains.integral_limit, gains.integral_limit);
    let derivative = (error - state.prev_error) / dt;
    let control = gains.kp * error + gains.ki * integral + gains.kd * derivative;
    (
        control,
        PidState {
            integral,
            prev_error: error,
        },
    )
}

/// Closed angle loop: commanded pulse width in, motor angle out. The feedback
/// path maps the actual angle back to a pulse width and the error is taken in
/// degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleServo {
    pub map: PulseWidthMap,
    pub gains: PidGains,
    /// Motor speed limit (deg/s).
    pub max_rate: f64,
}

impl Default for AngleServo {
    fn default() -> Self {
        AngleServo {
            map: PulseWidthMap::default(),
            gains: PidGains::default(),
            max_rate: 72.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ServoState {
    pub angle: f64,
    pub pid: PidState,
}

impl AngleServo {
    pub fn step(&self, state: ServoState, desired_pw: f64, dt: f64) -> Result<ServoState, TrackerError> {
        let desired = pulse_width_to_angle(desired_pw, &self.map)?;
        let actual_pw = angle_to_pulse_width(state.angle, &self.map)?;
        let actual = pulse_width_to_angle(actual_pw, &self.map)?;
        let (u, pid) = pid_step(&self.gains, state.pid, desired - actual, dt);
        let rate = u.clamp(-self.max_rate, self.max_rate);
        Ok(ServoState {
            angle: (state.angle + rate * dt).clamp(self.map.angle_min, self.map.angle_max),
            pid,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn facing(sun_az: f64, sun_el: f64) -> (SunModel, TrackerPose) {
        let stepper = StepperSpec::default();
        let steps = (sun_az / stepper.step_deg).round() as i64;
        let sun = SunModel {
            azimuth_deg: steps as f64 * stepper.step_deg,
            elevation_deg: sun_el,
            g: 1000.0,
        };
        let pose = TrackerPose {
            azimuth_steps: steps,
            tilt_deg: sun_el,
            elevation_mm: 0.0,
        };
        (sun, pose)
    }

    #[test]
    fn aligned_sun_reads_equal() {
        let (sun, pose) = facing(180.0, 40.0);
        let q = ldr_readings(&sun, &pose, &LdrSensor::default(), &StepperSpec::default(), 0);
        for v in [q.nw, q.se, q.sw] {
            assert!((v - q.ne).abs() < 1e-9, "{q:?}");
        }
        assert!(q.ne > 0.0);
    }

    #[test]
    fn north_east_offset_favours_ne() {
        let (mut sun, pose) = facing(180.0, 40.0);
        sun.azimuth_deg += 5.0;
        sun.elevation_deg += 5.0;
        let q = ldr_readings(&sun, &pose, &LdrSensor::default(), &StepperSpec::default(), 0);
        assert!(q.ne > q.nw && q.ne > q.se && q.ne > q.sw, "{q:?}");
    }

    #[test]
    fn dark_sky_reads_zero() {
        let (mut sun, pose) = facing(180.0, 40.0);
        sun.g = 0.0;
        let q = ldr_readings(&sun, &pose, &LdrSensor::default(), &StepperSpec::default(), 0);
        assert_eq!(q, LdrQuad::uniform(0.0));
    }

    #[test]
    fn noise_is_seeded_and_bounded() {
        let (sun, pose) = facing(180.0, 40.0);
        let sensor = LdrSensor {
            noise_counts: 5.0,
            ..Default::default()
        };
        let a = ldr_readings(&sun, &pose, &sensor, &StepperSpec::default(), 9);
        let b = ldr_readings(&sun, &pose, &sensor, &StepperSpec::default(), 9);
        let c = ldr_readings(&sun, &pose, &sensor, &StepperSpec::default(), 10);
        assert_eq!(a, b);
        assert_ne!(a, c);
        let clean = ldr_readings(&sun, &pose, &LdrSensor::default(), &StepperSpec::default(), 9);
        assert!((a.ne - clean.ne).abs() <= 5.0);
    }

    #[test]
    fn decide_cases() {
        assert_eq!(tracker_decide(&LdrQuad::uniform(600.0), 20.0), MotionCommand::default());
        let q = LdrQuad {
            ne: 900.0,
            nw: 900.0,
            se: 700.0,
            sw: 700.0,
        };
        assert_eq!(tracker_decide(&q, 50.0), MotionCommand { azimuth: 0, tilt: 1 });
        let q = LdrQuad {
            ne: 800.0,
            se: 800.0,
            nw: 795.0,
            sw: 795.0,
        };
        assert_eq!(tracker_decide(&q, 50.0), MotionCommand::default());
    }

    #[test]
    fn stepper_cases() {
        let drive = AxisDrive::default();
        let pose = TrackerPose {
            azimuth_steps: 0,
            tilt_deg: 180.0,
            elevation_mm: 0.0,
        };
        let cmd = MotionCommand { azimuth: 1, tilt: 1 };
        let next = stepper_step(&pose, cmd, &drive, 0.1);
        assert!((next.azimuth_deg(&drive.stepper) - 1.8).abs() < 1e-12);
        assert_eq!(next.tilt_deg, 180.0);
        let mut p = pose;
        for _ in 0..200 {
            p = stepper_step(&p, MotionCommand { azimuth: 1, tilt: 0 }, &drive, 0.1);
        }
        assert_eq!(p.azimuth_deg(&drive.stepper), 0.0);
        let back = TrackerPose {
            azimuth_steps: -1,
            ..pose
        };
        assert!((back.azimuth_deg(&drive.stepper) - 358.2).abs() < 1e-9);
    }

    #[test]
    fn pulse_width_endpoints() {
        let m = PulseWidthMap::default();
        assert_eq!(pulse_width_to_angle(1.25, &m).unwrap(), 0.0);
        assert_eq!(pulse_width_to_angle(1.75, &m).unwrap(), 180.0);
        assert!((pulse_width_to_angle(1.5, &m).unwrap() - 90.0).abs() < 1e-12);
        assert_eq!(angle_to_pulse_width(0.0, &m).unwrap(), 1.25);
        assert_eq!(angle_to_pulse_width(180.0, &m).unwrap(), 1.75);
        assert!(pulse_width_to_angle(1.8, &m).is_err());
        assert!(angle_to_pulse_width(-1.0, &m).is_err());
    }

    #[test]
    fn pid_cases() {
        let g = PidGains {
            kp: 2.0,
            ki: 0.0,
            kd: 0.0,
            integral_limit: 100.0,
        };
        let (u, s) = pid_step(&g, PidState::default(), 0.0, 0.1);
        assert_eq!((u, s), (0.0, PidState::default()));
        assert_eq!(pid_step(&g, PidState::default(), 3.0, 0.1).0, 6.0);
        let g = PidGains { kp: 0.0, ki: 1.0, ..g };
        let (_, s) = pid_step(&g, PidState::default(), 1.0, 1.0);
        let (u, _) = pid_step(&g, s, 1.0, 1.0);
        assert_eq!(u, 2.0);
        let g = PidGains { integral_limit: 1.5, ..g };
        let (_, s) = pid_step(&g, PidState::default(), 1.0, 1.0);
        let (u, _) = pid_step(&g, s, 1.0, 1.0);
        assert_eq!(u, 1.5);
    }

    #[test]
    fn servo_reaches_commanded_angle() {
        let servo = AngleServo::default();
        let mut s = ServoState {
            angle: 20.0,
            ..Default::default()
        };
        let pw = angle_to_pulse_width(120.0, &servo.map).unwrap();
        for _ in 0..10000 {
            s = servo.step(s, pw, 0.01).unwrap();
        }
        assert!((s.angle - 120.0).abs() < 0.1, "angle {}", s.angle);
    }

    #[test]
    fn elevation_cases() {
        let p = TrackerPose {
            elevation_mm: 50.0,
            ..Default::default()
        };
        assert_eq!(elevation_step(&p, 50.0, 2.0, 300.0, 1.0), p);
        assert_eq!(elevation_step(&p, 60.0, 2.0, 300.0, 1.0).elevation_mm, 52.0);
        assert_eq!(elevation_step(&p, 51.0, 2.0, 300.0, 1.0).elevation_mm, 51.0);
        assert_eq!(elevation_step(&p, 400.0, 1000.0, 300.0, 1.0).elevation_mm, 300.0);
    }

    proptest! {
        #[test]
        fn pulse_width_round_trip(angle in 0.0f64..=180.0) {
            let m = PulseWidthMap::default();
            let pw = angle_to_pulse_width(angle, &m).unwrap();
            let back = pulse_width_to_angle(pw, &m).unwrap();
            prop_assert!((angle_to_pulse_width(back, &m).unwrap() - pw).abs() <= 1e-12);
            prop_assert!((back - angle).abs() <= 1e-9);
        }
    }
}
