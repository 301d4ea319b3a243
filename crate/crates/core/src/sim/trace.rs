use std::io::{self, Write};

use super::TraceRecord;

/// Column order of the CSV trace.
pub const CSV_HEADER: [&str; 24] = [
    "time_s",
    "g_wm2",
    "t_k",
    "panel_v",
    "panel_i",
    "panel_p",
    "v_ref",
    "duty",
    "soc_pct",
    "batt_v",
    "tank1_pct",
    "tank2_pct",
    "soil_raw",
    "soil_pct",
    "pump1_relay",
    "pump1_duty",
    "pump1_rpm",
    "pump2_relay",
    "pump2_duty",
    "pump2_rpm",
    "azimuth_deg",
    "tilt_deg",
    "elevation_mm",
    "curtailed_wh",
];

/// Shortest rendering with 9 significant digits, like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    const SIG: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG).contains(&exp) {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn row(r: &TraceRecord) -> [String; 24] {
    let b = |v: bool| if v { "1".to_string() } else { "0".to_string() };
    let f = format_sig9;
    [
        f(r.time_s),
        f(r.g_wm2),
        f(r.t_k),
        f(r.panel_v),
        f(r.panel_i),
        f(r.panel_p),
        f(r.v_ref),
        f(r.duty),
        f(r.soc_pct),
        f(r.batt_v),
        f(r.tank1_pct),
        f(r.tank2_pct),
        f(r.soil_raw),
        f(r.soil_pct),
        b(r.pump1_relay),
        f(r.pump1_duty),
        f(r.pump1_rpm),
        b(r.pump2_relay),
        f(r.pump2_duty),
        f(r.pump2_rpm),
        f(r.azimuth_deg),
        f(r.tilt_deg),
        f(r.elevation_mm),
        f(r.curtailed_wh),
    ]
}

/// Writes the header and every `decimate`-th record, starting with the first.
pub fn write_csv<W: Write>(records: &[TraceRecord], decimate: usize, mut out: W) -> io::Result<()> {
    let decimate = decimate.max(1);
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for r in records.iter().step_by(decimate) {
        writeln!(out, "{}", row(r).join(","))?;
    }
    out.flush()
}
