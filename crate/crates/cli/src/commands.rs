use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pvpump_core::mppt::{Convention, MpptAlgorithm};
use pvpump_core::pv_model::{self as pv, celsius_to_kelvin, dense_mpp, find_mpp, IvPoint, OperatingEnv, PvArraySpec};
use pvpump_core::sim::{self, format_sig9, Scenario, TraceRecord};

use crate::config::ConfigFile;
use crate::{CliError, CompareArgs, IvSweepArgs, Preset, SimulateArgs};

/// Voltage grid used for the reference MPP of each control cycle.
pub const DENSE_POINTS: usize = 500;

/// `trace.csv` -> `trace.resolved.toml`.
pub fn resolved_path(out: &Path) -> PathBuf {
    out.with_extension("resolved.toml")
}

fn load_config(path: &Path, preset: Option<Preset>) -> Result<ConfigFile, CliError> {
    let mut cfg = ConfigFile::load(path)?;
    if let Some(p) = preset {
        cfg.hydraulics.preset = p;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(CliError::io(format!("creating {}", path.display())))
}

/// Memoised dense-sweep MPP keyed on the exact operating point.
pub struct MppCache<'a> {
    spec: &'a PvArraySpec,
    points: HashMap<(u64, u64), IvPoint>,
}

impl<'a> MppCache<'a> {
    pub fn new(spec: &'a PvArraySpec) -> Self {
        MppCache {
            spec,
            points: HashMap::new(),
        }
    }

    pub fn get(&mut self, g: f64, t_k: f64) -> Result<IvPoint, CliError> {
        if let Some(p) = self.points.get(&(g.to_bits(), t_k.to_bits())) {
            return Ok(*p);
        }
        let p = dense_mpp(self.spec, &OperatingEnv::new(g, t_k), DENSE_POINTS)
            .map_err(|e| CliError::Solver(format!("reference sweep (G={g}, T={t_k} K): {e}")))?;
        self.points.insert((g.to_bits(), t_k.to_bits()), p);
        Ok(p)
    }
}

/// Delivered over available energy across the control cycles with light.
fn tracking_efficiency(records: &[TraceRecord], cache: &mut MppCache) -> Result<Option<f64>, CliError> {
    let (mut got, mut best) = (0.0, 0.0);
    for r in records.iter().filter(|r| r.mppt_updated && r.g_wm2 > 0.0) {
        got += r.panel_p;
        best += cache.get(r.g_wm2, r.t_k)?.p;
    }
    Ok((best > 0.0).then(|| got / best))
}

fn percent(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |e| format!("{:.3} %", 100.0 * e))
}

pub fn simulate(args: &SimulateArgs, out: &mut impl Write) -> Result<(), CliError> {
    let cfg = load_config(&args.config, args.preset)?;
    let scenario = cfg.to_scenario()?;
    let dump_path = resolved_path(&args.out);
    std::fs::write(&dump_path, cfg.resolved()?).map_err(CliError::io(format!("writing {}", dump_path.display())))?;

    let records = sim::run(&scenario)?;
    let mut w = create(&args.out)?;
    sim::write_csv(&records, args.decimate as usize, &mut w)
        .and_then(|_| w.flush())
        .map_err(CliError::io(format!("writing {}", args.out.display())))?;

    let mut cache = MppCache::new(&scenario.pv);
    let eff = tracking_efficiency(&records, &mut cache)?;
    let soc = records.last().map_or(scenario.battery.soc, |r| r.soc_pct);
    let totals = records.last().map(|r| r.totals).unwrap_or_default();
    let rows = records.len().div_ceil(args.decimate as usize);
    let lines = [
        format!("steps: {}", records.len()),
        format!("rows written: {rows}"),
        format!("final soc: {soc:.3} %"),
        format!("pump1 on: {:.1} s", totals.pump_on_s[0]),
        format!("pump2 on: {:.1} s", totals.pump_on_s[1]),
        format!("panel energy: {:.4} Wh", totals.panel_wh),
        format!("load energy: {:.4} Wh", totals.load_wh),
        format!("stored energy: {:.4} Wh", totals.stored_wh),
        format!("curtailed energy: {:.4} Wh", totals.curtailed_wh),
        format!("water delivered: {:.4} L", totals.water_delivered_l),
        format!("mppt efficiency: {}", percent(eff)),
        format!("resolved config: {}", dump_path.display()),
    ];
    for l in lines {
        writeln!(out, "{l}").map_err(CliError::io("writing summary"))?;
    }
    Ok(())
}

pub fn iv_sweep(args: &IvSweepArgs, out: &mut impl Write) -> Result<(), CliError> {
    if args.points < 2 {
        return Err(CliError::Config(format!("--points must be at least 2, got {}", args.points)));
    }
    let spec = match &args.config {
        Some(path) => ConfigFile::load(path)?.to_scenario()?.pv,
        None => Scenario::default().pv,
    };
    let env = OperatingEnv::new(args.irradiance, celsius_to_kelvin(args.temp_c));
    let solver = |e: pv::PvError| CliError::Solver(format!("I-V sweep: {e}"));
    let curve = pv::iv_sweep(&spec, &env, args.points).map_err(solver)?;
    let mpp = find_mpp(&curve).map_err(solver)?;

    let mut w = create(&args.out)?;
    let ctx = format!("writing {}", args.out.display());
    writeln!(w, "v,i,p").map_err(CliError::io(ctx.clone()))?;
    for p in curve.points() {
        writeln!(w, "{},{},{}", format_sig9(p.v), format_sig9(p.i), format_sig9(p.p)).map_err(CliError::io(ctx.clone()))?;
    }
    w.flush().map_err(CliError::io(ctx))?;

    writeln!(out, "vmpp: {} V", format_sig9(mpp.v))
        .and_then(|_| writeln!(out, "impp: {} A", format_sig9(mpp.i)))
        .and_then(|_| writeln!(out, "pmpp: {} W", format_sig9(mpp.p)))
        .map_err(CliError::io("writing summary"))
}

/// The controllers compared by `mppt-compare`, in column order.
pub const CONTROLLERS: [(&str, MpptAlgorithm, Convention); 3] = [
    ("po_standard", MpptAlgorithm::PerturbObserve, Convention::Standard),
    ("po_inverted", MpptAlgorithm::PerturbObserve, Convention::InvertedBranches),
    ("ic", MpptAlgorithm::IncrementalConductance, Convention::Standard),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSummary {
    pub name: &'static str,
    pub efficiency: Option<f64>,
    pub steady_variance: Option<f64>,
    /// Cycles after the last environment change until v_ref stays within two
    /// steps of the reference MPP voltage.
    pub reconverge_cycles: Option<usize>,
}

/// Per-cycle reference MPP.
struct CycleRef {
    time_s: f64,
    g: f64,
    t_k: f64,
    mpp: IvPoint,
}

fn variance(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    Some(xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

/// Index of the last cycle whose reference MPP differs from the previous one.
fn last_change(refs: &[CycleRef]) -> usize {
    refs.windows(2)
        .rposition(|w| w[0].g != w[1].g || w[0].t_k != w[1].t_k)
        .map_or(0, |k| k + 1)
}

fn summarize(name: &'static str, cycles: &[&TraceRecord], refs: &[CycleRef], step: f64) -> ControllerSummary {
    let got: f64 = cycles.iter().zip(refs).filter(|(_, r)| r.mpp.p > 0.0).map(|(c, _)| c.panel_p).sum();
    let best: f64 = refs.iter().map(|r| r.mpp.p.max(0.0)).sum();
    let k = last_change(refs);
    let tail = &cycles[k..];
    let last_miss = tail
        .iter()
        .zip(&refs[k..])
        .rposition(|(c, r)| (c.v_ref - r.mpp.v).abs() > 2.0 * step);
    let reconverge_cycles = match last_miss {
        None => Some(0),
        Some(j) if j + 1 < tail.len() => Some(j + 1),
        Some(_) => None,
    };
    let steady: Vec<f64> = tail[tail.len() / 2..].iter().map(|c| c.v_ref).collect();
    ControllerSummary {
        name,
        efficiency: (best > 0.0).then(|| got / best),
        steady_variance: variance(&steady),
        reconverge_cycles,
    }
}

pub fn mppt_compare(args: &CompareArgs, out: &mut impl Write) -> Result<(), CliError> {
    let cfg = load_config(&args.config, args.preset)?;
    let base = cfg.to_scenario()?;
    let scenarios: Vec<Scenario> = CONTROLLERS
        .iter()
        .map(|&(_, algorithm, convention)| {
            let mut s = base.clone();
            s.algorithm = algorithm;
            s.mppt.convention = convention;
            s
        })
        .collect();

    let jobs = (args.jobs as usize).min(scenarios.len());
    let per_job = scenarios.len().div_ceil(jobs);
    let traces: Vec<Result<Vec<TraceRecord>, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .chunks(per_job)
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|s| sim::run(s).map_err(CliError::from))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>, _>>()?;
    let cycles: Vec<Vec<&TraceRecord>> = traces
        .iter()
        .map(|t| t.iter().filter(|r| r.mppt_updated).collect())
        .collect();

    let mut cache = MppCache::new(&base.pv);
    let refs = cycles[0]
        .iter()
        .map(|r| {
            Ok(CycleRef {
                time_s: r.time_s,
                g: r.g_wm2,
                t_k: r.t_k,
                mpp: cache.get(r.g_wm2, r.t_k)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut w = create(&args.out)?;
    let ctx = format!("writing {}", args.out.display());
    let mut header = vec!["cycle", "time_s", "g_wm2", "t_k", "mpp_v", "mpp_p"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    for (name, ..) in CONTROLLERS {
        header.push(format!("{name}_v_ref"));
        header.push(format!("{name}_p"));
    }
    writeln!(w, "{}", header.join(",")).map_err(CliError::io(ctx.clone()))?;
    for (n, r) in refs.iter().enumerate() {
        let mut row = vec![n.to_string()];
        row.extend([r.time_s, r.g, r.t_k, r.mpp.v, r.mpp.p].map(format_sig9));
        for c in &cycles {
            row.push(format_sig9(c[n].v_ref));
            row.push(format_sig9(c[n].panel_p));
        }
        writeln!(w, "{}", row.join(",")).map_err(CliError::io(ctx.clone()))?;
    }
    w.flush().map_err(CliError::io(ctx))?;

    writeln!(out, "cycles: {}", refs.len()).map_err(CliError::io("writing summary"))?;
    for (c, &(name, ..)) in cycles.iter().zip(&CONTROLLERS) {
        let s = summarize(name, c, &refs, base.mppt.step);
        writeln!(
            out,
            "{}: efficiency {}, steady variance {}, reconverge {}",
            s.name,
            percent(s.efficiency),
            s.steady_variance.map_or_else(|| "n/a".into(), |v| format!("{v:.6e} V^2")),
            s.reconverge_cycles.map_or_else(|| "not reached".into(), |n| format!("{n} cycles")),
        )
        .map_err(CliError::io("writing summary"))?;
    }
    Ok(())
}
