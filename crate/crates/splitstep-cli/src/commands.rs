use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use splitstep::distill::{evolution_record, similarity, IntensityTable, LossModel};
use splitstep::interferometry::{
    make_plan_with, monte_carlo, run_protocol, InterferenceOutcome, McConfig, PlanOptions,
    RunConditions, DEFAULT_NOISE_FLOOR, DEFAULT_SURVIVAL,
};
use splitstep::topology::PhaseDiagramGrid;
use splitstep::{Error, Polarization, Setting};

use crate::config::Config;
use crate::{CliError, CommonArgs, DistillArgs};

/// 17 significant digits: parses back to the identical f64.
fn fmt(value: f64) -> String {
    format!("{value:.16e}")
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|source| CliError::Io { path: path.clone(), source })?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn io_err(path: &Option<PathBuf>) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.clone().unwrap_or_else(|| PathBuf::from("<stdout>")),
        source,
    }
}

fn csv_err(path: &Option<PathBuf>, error: csv::Error) -> CliError {
    match error.into_kind() {
        csv::ErrorKind::Io(source) => io_err(path)(source),
        other => CliError::Config(format!("csv: {other:?}")),
    }
}

fn parse_setting(raw: &str) -> Result<Setting, CliError> {
    Setting::parse(raw).map_err(CliError::from)
}

fn parse_polarization(raw: &str) -> Result<Polarization, CliError> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "h" => Ok(Polarization::H),
        "v" => Ok(Polarization::V),
        other => Err(CliError::Config(format!("`{other}` is not a polarization (h or v)"))),
    }
}

pub fn phase_diagram(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg = Config::load(args.config.as_deref(), &args.set)?;
    let theta1_min = cfg.get_angle_pi("theta1_min_pi", -1.0)?;
    let theta1_max = cfg.get_angle_pi("theta1_max_pi", 1.0)?;
    let theta2_min = cfg.get_angle_pi("theta2_min_pi", -1.0)?;
    let theta2_max = cfg.get_angle_pi("theta2_max_pi", 1.0)?;
    let resolution = cfg.get_usize("resolution", 64)?;
    let k_samples = cfg.get_usize("k_samples", 256)?;
    cfg.finish()?;
    if resolution < 2 {
        return Err(CliError::Config("resolution must be at least 2".into()));
    }
    if k_samples < 64 {
        return Err(CliError::Config("k_samples must be at least 64".into()));
    }

    let grid = PhaseDiagramGrid {
        theta1_range: (theta1_min, theta1_max),
        theta2_range: (theta2_min, theta2_max),
        resolution,
        k_samples,
    };
    let cells = splitstep::topology::phase_diagram(&grid);

    let mut writer = csv::Writer::from_writer(open_out(&args.out)?);
    writer
        .write_record(["theta1", "theta2", "winding_or_gap_closed", "gap_plus1", "gap_minus1"])
        .map_err(|e| csv_err(&args.out, e))?;
    for cell in &cells {
        let index = match (cell.gapped, cell.winding) {
            (true, Some(w)) => w.to_string(),
            (false, _) => "gap-closed".to_string(),
            (true, None) => "unconverged".to_string(),
        };
        writer
            .write_record([
                fmt(cell.theta1),
                fmt(cell.theta2),
                index,
                fmt(cell.gap_plus1),
                fmt(cell.gap_minus1),
            ])
            .map_err(|e| csv_err(&args.out, e))?;
    }
    writer.flush().map_err(io_err(&args.out))?;
    Ok(())
}

#[derive(Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct EdgeSiteJson {
    position: i64,
    h: ComplexJson,
    v: ComplexJson,
    intensity_h: f64,
    intensity_v: f64,
}

#[derive(Serialize)]
struct EdgeStateJson {
    setting: String,
    eigenvalue: f64,
    chirality: f64,
    decay: f64,
    boundary_amplitude: f64,
    normalization: f64,
    spinor_direction: [ComplexJson; 2],
    cutoff: usize,
    eigen_residual: f64,
    sites: Vec<EdgeSiteJson>,
}

fn write_json<T: Serialize>(args_out: &Option<PathBuf>, value: &T) -> Result<(), CliError> {
    let mut out = open_out(args_out)?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("json: {e}")))?;
    out.write_all(text.as_bytes()).map_err(io_err(args_out))?;
    out.write_all(b"\n").map_err(io_err(args_out))?;
    out.flush().map_err(io_err(args_out))?;
    Ok(())
}

pub fn edge_state(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg = Config::load(args.config.as_deref(), &args.set)?;
    let setting = parse_setting(&cfg.get_string("setting", "a"))?;
    let cutoff = cfg.get_usize("cutoff", 60)?;
    cfg.finish()?;

    let (spec, state) = splitstep::edge::edge_state(setting, cutoff)?;
    let residual = splitstep::edge::verify_eigen(setting, cutoff)?;
    let sites = state
        .iter()
        .map(|(x, sp)| EdgeSiteJson {
            position: *x,
            h: ComplexJson { re: sp.h.re, im: sp.h.im },
            v: ComplexJson { re: sp.v.re, im: sp.v.im },
            intensity_h: sp.h.norm_sqr(),
            intensity_v: sp.v.norm_sqr(),
        })
        .collect();
    let report = EdgeStateJson {
        setting: setting.to_string(),
        eigenvalue: spec.eigenvalue,
        chirality: spec.chirality,
        decay: spec.decay,
        boundary_amplitude: spec.boundary_amplitude,
        normalization: spec.normalization,
        spinor_direction: [
            ComplexJson { re: spec.spinor.h.re, im: spec.spinor.h.im },
            ComplexJson { re: spec.spinor.v.re, im: spec.spinor.v.im },
        ],
        cutoff,
        eigen_residual: residual,
        sites,
    };
    write_json(&args.out, &report)
}

#[derive(Serialize)]
struct StateSiteJson {
    position: i64,
    h: ComplexJson,
    v: ComplexJson,
}

#[derive(Serialize)]
struct DistilledStateJson {
    setting: String,
    steps: u32,
    window: Vec<i64>,
    sites: Vec<StateSiteJson>,
}

pub fn distill(args: &DistillArgs) -> Result<(), CliError> {
    let common = &args.common;
    let mut cfg = Config::load(common.config.as_deref(), &common.set)?;
    let setting = parse_setting(&cfg.get_string("setting", "a"))?;
    let steps_min = cfg.get_u32("steps_min", 1)?;
    let steps_max = cfg.get_u32("steps_max", 10)?;
    let window_list = cfg.get_list_i64("window", &[0, 2, 4])?;
    cfg.finish()?;
    if steps_min == 0 || steps_min > steps_max {
        return Err(CliError::Config(format!(
            "invalid step range {steps_min}..={steps_max}"
        )));
    }
    let window: BTreeSet<i64> = window_list.iter().copied().collect();

    let reference = |setting: Setting| -> Result<IntensityTable, Error> {
        let (_, ideal) = splitstep::edge::edge_state(setting, 60)?;
        IntensityTable::from_state(&ideal).restricted(&window).renormalized()
    };
    let theo_a = reference(Setting::A)?;
    let theo_b = reference(Setting::B)?;

    let mut writer = csv::Writer::from_writer(open_out(&common.out)?);
    writer
        .write_record(["step", "similarity_a", "similarity_b"])
        .map_err(|e| csv_err(&common.out, e))?;
    for steps in steps_min..=steps_max {
        let sim_a = similarity(
            &IntensityTable::from_state(&splitstep::distill::distill(Setting::A, steps, &window)?),
            &theo_a,
        )?;
        let sim_b = similarity(
            &IntensityTable::from_state(&splitstep::distill::distill(Setting::B, steps, &window)?),
            &theo_b,
        )?;
        writer
            .write_record([steps.to_string(), fmt(sim_a), fmt(sim_b)])
            .map_err(|e| csv_err(&common.out, e))?;
    }
    writer.flush().map_err(io_err(&common.out))?;

    if let Some(state_out) = &args.state_out {
        let state = splitstep::distill::distill(setting, steps_max, &window)?;
        let dump = DistilledStateJson {
            setting: setting.to_string(),
            steps: steps_max,
            window: window.iter().copied().collect(),
            sites: state
                .iter()
                .map(|(x, sp)| StateSiteJson {
                    position: *x,
                    h: ComplexJson { re: sp.h.re, im: sp.h.im },
                    v: ComplexJson { re: sp.v.re, im: sp.v.im },
                })
                .collect(),
        };
        write_json(&Some(state_out.clone()), &dump)?;
    }
    Ok(())
}

fn interfere_row(
    writer: &mut csv::Writer<Box<dyn Write>>,
    out: &Option<PathBuf>,
    setting: Setting,
    step: u32,
    position: u32,
    pol: Polarization,
    result: Result<InterferenceOutcome, Error>,
) -> Result<(), CliError> {
    let record = match result {
        Ok(o) => [
            setting.to_string(),
            step.to_string(),
            position.to_string(),
            pol.to_string(),
            fmt(o.i_h),
            fmt(o.i_v),
            fmt(o.i_w),
            fmt(o.i_r),
            fmt(o.m),
            fmt(o.m_error),
            "ok".to_string(),
        ],
        Err(Error::VanishingComponent { i_h, i_v, i_w, i_r, .. }) => [
            setting.to_string(),
            step.to_string(),
            position.to_string(),
            pol.to_string(),
            fmt(i_h),
            fmt(i_v),
            fmt(i_w),
            fmt(i_r),
            String::new(),
            String::new(),
            "unreadable".to_string(),
        ],
        Err(other) => return Err(other.into()),
    };
    writer.write_record(record).map_err(|e| csv_err(out, e))
}

pub fn interfere(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg = Config::load(args.config.as_deref(), &args.set)?;
    let setting_raw = cfg.get_string("setting", "both");
    let steps = cfg.get_list_u32("steps", &[6, 7, 8])?;
    let positions = cfg.get_list_u32("positions", &[0, 1, 2])?;
    let pol_raw = cfg.get_list_string("polarizations", &["h", "v"]);
    let use_monte_carlo = cfg.get_bool("monte_carlo", false)?;
    let samples = cfg.get_usize("samples", 1000)?;
    let coupling_sigma = cfg.get_f64("coupling_sigma", 0.02)?;
    let angle_sigma = cfg.get_angle_pi("angle_sigma_pi", 1.0 / 90.0)?;
    let survival = cfg.get_f64("survival", DEFAULT_SURVIVAL)?;
    let noise_floor = cfg.get_f64("noise_floor", DEFAULT_NOISE_FLOOR)?;
    let split_angle = cfg.get_angle_pi("split_angle_pi", -0.25)?;
    cfg.finish()?;

    let settings: Vec<Setting> = match setting_raw.trim().to_ascii_lowercase().as_str() {
        "both" => vec![Setting::A, Setting::B],
        other => vec![parse_setting(other)?],
    };
    let polarizations: Vec<Polarization> = pol_raw
        .iter()
        .map(|raw| parse_polarization(raw))
        .collect::<Result<_, _>>()?;

    let seed = if use_monte_carlo {
        match (args.seed, &args.out) {
            (Some(seed), Some(_)) => seed,
            (None, _) => {
                return Err(CliError::Config("--seed is required for monte_carlo runs".into()))
            }
            (_, None) => {
                return Err(CliError::Config("--out is required for monte_carlo runs".into()))
            }
        }
    } else {
        args.seed.unwrap_or(0)
    };

    let options = PlanOptions { split_angle };
    let mc_config = McConfig {
        coupling_sigma,
        angle_sigma,
        samples,
        seed,
        loss: Some(LossModel::new(survival, 1.0)?),
        noise_floor,
    };

    let mut writer = csv::Writer::from_writer(open_out(&args.out)?);
    writer
        .write_record([
            "setting",
            "step",
            "position",
            "polarization",
            "i_h",
            "i_v",
            "i_w",
            "i_r",
            "m",
            "m_error",
            "status",
        ])
        .map_err(|e| csv_err(&args.out, e))?;
    for &setting in &settings {
        for &step in &steps {
            for &position in &positions {
                for &pol in &polarizations {
                    let plan = make_plan_with(setting, step, position, pol, &options)?;
                    let result = if use_monte_carlo {
                        monte_carlo(&plan, &mc_config)
                    } else {
                        run_protocol(&plan, &RunConditions::ideal())
                    };
                    interfere_row(&mut writer, &args.out, setting, step, position, pol, result)?;
                }
            }
        }
    }
    writer.flush().map_err(io_err(&args.out))?;
    Ok(())
}

pub fn evolution(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg = Config::load(args.config.as_deref(), &args.set)?;
    let setting = parse_setting(&cfg.get_string("setting", "a"))?;
    let roundtrips = cfg.get_u32("roundtrips", 12)?;
    let survival = cfg.get_f64("survival", 1.0)?;
    let outcoupling = cfg.get_f64("outcoupling", 1.0)?;
    cfg.finish()?;

    let loss = LossModel::new(survival, outcoupling)?;
    let record = evolution_record(setting, roundtrips, &loss)?;

    let mut writer = csv::Writer::from_writer(open_out(&args.out)?);
    writer
        .write_record(["roundtrip", "position", "intensity"])
        .map_err(|e| csv_err(&args.out, e))?;
    for (roundtrip, table) in record.iter().enumerate() {
        for (position, intensity) in table.traced() {
            writer
                .write_record([roundtrip.to_string(), position.to_string(), fmt(intensity)])
                .map_err(|e| csv_err(&args.out, e))?;
        }
    }
    writer.flush().map_err(io_err(&args.out))?;
    Ok(())
}
