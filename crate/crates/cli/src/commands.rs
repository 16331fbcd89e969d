use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use toroidsim::implant::{
    overlap_figure_of_merit, slab_effective_thickness, write_profile_csv, ModeProfile,
};
use toroidsim::spectra::{
    analyze as analyze_spectrum, read_spectrum_csv, synthesize, write_spectrum_csv,
    AnalysisOptions, PolarizationLabel, SynthesisWarning,
};
use toroidsim::thermal::{
    melt_front_radius, pillar_top_bottom_delta, radial_disk_delta, reflow_endpoint,
    solve_steady_state, toroid_from_melt_front, BoundarySpec, SorSettings, TemperatureField,
    ThermalGrid, ToroidShape,
};
use toroidsim::wgm::{
    comb_spacing_index, effective_index, fsr as fsr_of, invert_comb_spacing,
    polish_angle as polish, resonance_wavelengths, size_parameter, CavityGeometry,
};
use toroidsim::RunConfig;

use crate::error::CliError;
use crate::output::{fmt, fmt_opt, sink, write_metadata};

const NM: f64 = 1e-9;
const UM: f64 = 1e-6;

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("write failed: {e}"))
    }
}

fn stdout() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

pub fn modes(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let geometry = config.optical_geometry()?;
    let constants = config.optical_constants()?;
    let n = config.radial_order()?;
    let band = config.band_nm("modes.band_nm")?;
    let modes = resonance_wavelengths(&geometry, &constants, n, band)?;

    let mut w = stdout();
    write_metadata(&mut w, "modes", config)?;
    writeln!(
        w,
        "{:>6} {:>14} {:>10} {:>11}",
        "l", "wavelength_nm", "n_eff", "spacing_nm"
    )?;
    for (k, m) in modes.iter().enumerate() {
        let spacing = k
            .checked_sub(1)
            .map(|p| (m.wavelength_m - modes[p].wavelength_m) / NM);
        writeln!(
            w,
            "{:>6} {:>14} {:>10} {:>11}",
            m.angular_number,
            fmt(m.wavelength_m / NM, 4),
            fmt(m.effective_index, 6),
            spacing.map_or_else(|| "-".to_string(), |s| fmt(s, 4))
        )?;
    }
    w.flush()?;

    if let Some(path) = out {
        let mut f = sink(Some(path))?;
        write_metadata(&mut f, "modes", config)?;
        writeln!(
            f,
            "angular_number,radial_order,wavelength_nm,size_parameter,effective_index"
        )?;
        for m in &modes {
            writeln!(
                f,
                "{},{},{},{},{}",
                m.angular_number,
                m.radial_order,
                fmt(m.wavelength_m / NM, 6),
                fmt(m.size_parameter, 6),
                fmt(m.effective_index, 8)
            )?;
        }
        f.flush()?;
    }
    Ok(())
}

fn key_values(command: &str, config: &RunConfig, rows: &[(&str, String)]) -> Result<(), CliError> {
    let mut w = stdout();
    write_metadata(&mut w, command, config)?;
    for (k, v) in rows {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn fsr(config: &RunConfig, from_fsr_nm: Option<f64>) -> Result<(), CliError> {
    let constants = config.optical_constants()?;
    let n = config.radial_order()?;
    if let Some(measured) = from_fsr_nm {
        let d = invert_comb_spacing(measured * NM, &constants, n)?;
        return key_values(
            "fsr",
            config,
            &[
                ("fsr_nm", fmt(measured, 6)),
                ("wavelength_nm", fmt(constants.vacuum_wavelength_m / NM, 3)),
                ("radial_order", n.to_string()),
                ("inferred_diameter_um", fmt(d / UM, 6)),
            ],
        );
    }
    let geometry = config.optical_geometry()?;
    let n_eff = effective_index(&geometry, &constants, n)?;
    let spacing_index = comb_spacing_index(&geometry, &constants, n)?;
    key_values(
        "fsr",
        config,
        &[
            ("diameter_um", fmt(geometry.major_diameter_m() / UM, 6)),
            ("wavelength_nm", fmt(constants.vacuum_wavelength_m / NM, 3)),
            ("radial_order", n.to_string()),
            (
                "size_parameter",
                fmt(
                    size_parameter(geometry.major_radius_m, constants.vacuum_wavelength_m),
                    6,
                ),
            ),
            ("effective_index", fmt(n_eff, 8)),
            ("fsr_nm", fmt(fsr_of(&geometry, &constants, n_eff)? / NM, 6)),
            ("comb_spacing_index", fmt(spacing_index, 8)),
            (
                "comb_spacing_nm",
                fmt(fsr_of(&geometry, &constants, spacing_index)? / NM, 6),
            ),
        ],
    )
}

pub fn polish_angle(config: &RunConfig) -> Result<(), CliError> {
    let geometry = config.optical_geometry()?;
    let constants = config.optical_constants()?;
    let n = config.radial_order()?;
    let n_eff = effective_index(&geometry, &constants, n)?;
    let angles = polish(n_eff, constants.fiber_core_index)?;
    key_values(
        "polish-angle",
        config,
        &[
            ("diameter_um", fmt(geometry.major_diameter_m() / UM, 6)),
            ("effective_index", fmt(n_eff, 8)),
            ("fiber_core_index", fmt(constants.fiber_core_index, 6)),
            ("phi_deg", fmt(angles.phi_deg(), 4)),
            ("complement_deg", fmt(angles.complement_deg(), 4)),
        ],
    )
}

struct ThermalRun {
    geometry: CavityGeometry,
    field: TemperatureField,
    absorbed_w: f64,
}

fn solve_thermal(
    config: &RunConfig,
    power_w: Option<f64>,
    log: Option<&mut dyn Write>,
) -> Result<ThermalRun, CliError> {
    let geometry = config.thermal_geometry()?;
    let materials = config.materials()?;
    let mut laser = config.laser()?;
    if let Some(p) = power_w {
        laser.power_w = p;
    }
    let ambient = config.f64("thermal.ambient_k")?;
    let nr = config.u64("thermal.nr")? as usize;
    let disk_cells = config.u64("thermal.disk_cells")? as usize;
    let mut grid = ThermalGrid::disk_on_pillar(&geometry, nr, disk_cells, ambient)?;
    let absorbed_w = laser.deposit(&mut grid)?;
    let settings = SorSettings {
        omega: config
            .optional_f64("thermal.omega")?
            .unwrap_or_else(|| SorSettings::auto_omega(grid.nr, grid.nz)),
        tol_k: config.positive("thermal.tol_k")?,
        max_iterations: config.u64("thermal.max_iterations")? as usize,
        order: config.sweep_order()?,
    };
    let boundary = BoundarySpec::disk_on_pillar(ambient, config.free_surface()?);
    let field = solve_steady_state(grid, &materials, &boundary, &settings, log)?;
    Ok(ThermalRun {
        geometry,
        field,
        absorbed_w,
    })
}

fn shape_rows(shape: Option<&ToroidShape>) -> Vec<(&'static str, String)> {
    vec![
        (
            "final_major_radius_um",
            fmt_opt(shape.map(|s| s.final_major_radius_m / UM), 4),
        ),
        (
            "minor_radius_um",
            fmt_opt(shape.map(|s| s.minor_radius_m / UM), 4),
        ),
        (
            "collides_with_pillar",
            shape.map_or_else(|| "none".into(), |s| s.collides_with_pillar.to_string()),
        ),
    ]
}

pub fn thermal(config: &RunConfig, out: Option<&Path>, log: Option<&Path>) -> Result<(), CliError> {
    let mut log_file = match log {
        Some(p) => Some(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(p, e))?,
        )),
        None => None,
    };
    let run = solve_thermal(config, None, log_file.as_mut().map(|f| f as &mut dyn Write))?;
    if let Some(f) = log_file.as_mut() {
        f.flush()?;
    }
    let field = &run.field;
    let silica = config.materials()?.silica;
    let ambient = config.f64("thermal.ambient_k")?;
    let front = melt_front_radius(field, &silica)?;
    let shape = match front {
        Some(_) => Some(reflow_endpoint(&run.geometry, field, &silica)?),
        None => None,
    };
    let outflux = field.boundary_outflux();
    let balance = if run.absorbed_w > 0.0 {
        fmt((outflux - run.absorbed_w) / run.absorbed_w, 6)
    } else {
        "none".into()
    };
    let mut rows = vec![
        ("grid", format!("{} x {}", field.grid.nr, field.grid.nz)),
        ("absorbed_power_mw", fmt(run.absorbed_w * 1e3, 4)),
        ("iterations", field.report.iterations.to_string()),
        ("residual_k", format!("{:.3e}", field.report.residual_k)),
        ("max_temperature_k", fmt(field.max_temperature(), 3)),
        ("max_rise_k", fmt(field.max_temperature() - ambient, 3)),
        ("pillar_delta_k", fmt(pillar_top_bottom_delta(field)?, 3)),
        ("disk_radial_delta_k", fmt(radial_disk_delta(field)?, 3)),
        ("energy_balance_relative", balance),
        ("melt_front_um", fmt_opt(front.map(|r| r / UM), 4)),
    ];
    rows.extend(shape_rows(shape.as_ref()));
    key_values("thermal", config, &rows)?;

    if let Some(path) = out {
        let mut f = sink(Some(path))?;
        write_metadata(&mut f, "thermal", config)?;
        field.write_csv(&mut f)?;
        f.flush()?;
    }
    Ok(())
}

fn parse_sweep(spec: &str) -> Option<(f64, f64, usize)> {
    let mut it = spec.split(':');
    let lo: f64 = it.next()?.trim().parse().ok()?;
    let hi: f64 = it.next()?.trim().parse().ok()?;
    let count: usize = it.next()?.trim().parse().ok()?;
    (it.next().is_none() && count >= 1 && lo >= 0.0 && hi >= lo).then_some((lo, hi, count))
}

pub fn thermal_sweep(config: &RunConfig, spec: &str) -> Result<(), CliError> {
    let (lo, hi, count) = parse_sweep(spec).ok_or_else(|| {
        CliError::Usage(format!(
            "--sweep-mw expects lo:hi:count with 0 ≤ lo ≤ hi, got '{spec}'"
        ))
    })?;
    let silica = config.materials()?.silica;
    let mut w = stdout();
    write_metadata(&mut w, "thermal --sweep-mw", config)?;
    writeln!(
        w,
        "power_mw,absorbed_mw,max_temperature_k,melt_front_um,final_major_radius_um,minor_radius_um"
    )?;
    let mut last_front = f64::INFINITY;
    for k in 0..count {
        let p_mw = if count == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (count - 1) as f64
        };
        let run = solve_thermal(config, Some(p_mw * 1e-3), None)?;
        let front = melt_front_radius(&run.field, &silica)?;
        let shape = match front {
            Some(r) => Some(toroid_from_melt_front(&run.geometry, r)?),
            None => None,
        };
        if let Some(r) = front {
            if r > last_front {
                eprintln!("warning: melt front moved outward at {p_mw} mW");
            }
            last_front = r;
        }
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt(p_mw, 4),
            fmt(run.absorbed_w * 1e3, 4),
            fmt(run.field.max_temperature(), 3),
            fmt_opt(front.map(|r| r / UM), 4),
            fmt_opt(shape.map(|s| s.final_major_radius_m / UM), 4),
            fmt_opt(shape.map(|s| s.minor_radius_m / UM), 4)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn reflow(config: &RunConfig, front_um: Option<f64>) -> Result<(), CliError> {
    let (geometry, shape, front) = match front_um {
        Some(f) => {
            let geometry = config.thermal_geometry()?;
            if f > geometry.major_radius_m / UM {
                return Err(CliError::Usage(format!(
                    "melt front {f} µm lies outside the {} µm disk",
                    geometry.major_radius_m / UM
                )));
            }
            (geometry, toroid_from_melt_front(&geometry, f * UM)?, f * UM)
        }
        None => {
            let run = solve_thermal(config, None, None)?;
            let silica = config.materials()?.silica;
            let front = melt_front_radius(&run.field, &silica)?.ok_or_else(|| {
                CliError::Numerical(format!(
                    "no part of the disk reaches the fusion temperature (max {:.1} K); raise laser.power_mw",
                    run.field.max_temperature()
                ))
            })?;
            let shape = reflow_endpoint(&run.geometry, &run.field, &silica)?;
            (run.geometry, shape, front)
        }
    };
    let v0 = std::f64::consts::PI * geometry.major_radius_m.powi(2) * geometry.disk_thickness_m;
    let mut rows = vec![
        ("initial_radius_um", fmt(geometry.major_radius_m / UM, 4)),
        ("melt_front_um", fmt(front / UM, 4)),
    ];
    rows.extend(shape_rows(Some(&shape)));
    rows.push((
        "final_diameter_um",
        fmt(2.0 * shape.final_major_radius_m / UM, 4),
    ));
    rows.push((
        "volume_error_relative",
        format!(
            "{:.3e}",
            (shape.total_volume(geometry.disk_thickness_m) - v0) / v0
        ),
    ));
    if shape.collides_with_pillar {
        eprintln!("warning: the toroid would overlap the pillar; stop the reflow earlier");
    }
    key_values("reflow", config, &rows)
}

pub fn implant(config: &RunConfig, out: Option<&Path>, overlap: bool) -> Result<(), CliError> {
    let profile = config.implant_profile()?;
    let dose = profile.integrated_dose();
    let mut rows = vec![
        (
            "peak_concentration_cm3",
            format!("{:.4e}", profile.peak_concentration_cm3),
        ),
        ("peak_depth_nm", fmt(profile.peak_depth_m / NM, 3)),
        ("fwhm_nm", fmt(profile.fwhm_m / NM, 3)),
        ("sigma_nm", fmt(profile.sigma_m() / NM, 4)),
        (
            "surface_concentration_cm3",
            format!("{:.4e}", profile.concentration_at(0.0)?),
        ),
        ("integrated_dose_cm2", format!("{:.6e}", dose)),
        ("stated_fluence_cm2", format!("{:.6e}", profile.fluence_cm2)),
        (
            "deviation_percent",
            fmt(profile.fluence_deviation_percent(), 3),
        ),
    ];
    if overlap {
        let constants = config.optical_constants()?;
        let t = profile.layer_thickness_m;
        let t_eff =
            slab_effective_thickness(t, constants.vacuum_wavelength_m, constants.silica_index)?;
        let mode = ModeProfile::slab_fundamental(
            t,
            constants.vacuum_wavelength_m,
            constants.silica_index,
            2001,
        )?;
        let eta = if dose > 0.0 {
            Some(overlap_figure_of_merit(&profile, &mode)?)
        } else {
            None
        };
        rows.push(("mode_effective_thickness_nm", fmt(t_eff / NM, 3)));
        rows.push(("overlap_eta", fmt_opt(eta, 6)));
    }
    key_values("implant", config, &rows)?;

    if let Some(path) = out {
        let n = config.u64("implant.samples")? as usize;
        let mut f = sink(Some(path))?;
        write_metadata(&mut f, "implant", config)?;
        write_profile_csv(&mut f, &profile.sample(n))?;
        f.flush()?;
    }
    Ok(())
}

pub fn synth(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let params = config.synthesis_params()?;
    let band = config.band_nm("synth.band_nm")?;
    let step = config.positive("synth.grid_step_nm")? * NM;
    let s = synthesize(&params, band, step)?;
    for warning in &s.warnings {
        match warning {
            SynthesisWarning::EnvelopeOutsideBand => {
                eprintln!(
                    "warning: band lies outside the emission envelope; spectrum is nearly flat"
                )
            }
        }
    }
    let mut w = sink(out)?;
    write_metadata(&mut w, "synth", config)?;
    write_spectrum_csv(&mut w, &s.spectrum)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PeakJson {
    wavelength_nm: f64,
    height: f64,
    fwhm_nm: f64,
    prominence: f64,
    polarization_label: PolarizationLabel,
    q_measured: f64,
    resolution_limited: bool,
}

#[derive(Serialize)]
struct ReportJson {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: BTreeMap<String, String>,
    input: String,
    samples: usize,
    noise_floor: f64,
    min_prominence: f64,
    peaks: Vec<PeakJson>,
    fsr_estimate_nm: Option<f64>,
    splitting_estimate_nm: Option<f64>,
    q_lower_bounds: Vec<f64>,
    inferred_diameter_um: Option<f64>,
}

pub fn analyze(config: &RunConfig, input: &Path, report: Option<&Path>) -> Result<(), CliError> {
    let resolution = config.f64("analyze.resolution_nm")? * NM;
    let reader: Box<dyn BufRead> = if input == Path::new("-") {
        Box::new(BufReader::new(io::stdin().lock()))
    } else {
        Box::new(BufReader::new(
            File::open(input).map_err(|e| CliError::io(input, e))?,
        ))
    };
    let spectrum = read_spectrum_csv(reader, resolution)
        .map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
    let options = AnalysisOptions {
        constants: config.optical_constants()?,
        radial_order: config.radial_order()?,
        min_prominence: config.optional_f64("analyze.min_prominence")?,
    };
    let r = analyze_spectrum(&spectrum, &options)?;
    let doc = ReportJson {
        tool: "toroidsim",
        version: toroidsim::VERSION,
        command: "analyze",
        config: config
            .entries()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
        input: input.display().to_string(),
        samples: spectrum.len(),
        noise_floor: r.noise_floor,
        min_prominence: r.min_prominence,
        peaks: r
            .peaks
            .peaks
            .iter()
            .zip(&r.q_bounds)
            .map(|(p, q)| PeakJson {
                wavelength_nm: p.wavelength_m / NM,
                height: p.height,
                fwhm_nm: p.fwhm_m / NM,
                prominence: p.prominence,
                polarization_label: p.polarization_label,
                q_measured: q.q_measured,
                resolution_limited: q.resolution_limited,
            })
            .collect(),
        fsr_estimate_nm: r.peaks.fsr_estimate_m.map(|v| v / NM),
        splitting_estimate_nm: r.peaks.splitting_estimate_m.map(|v| v / NM),
        q_lower_bounds: r.peaks.q_lower_bounds.clone(),
        inferred_diameter_um: r.inferred_diameter_m.map(|v| v / UM),
    };
    let mut w = sink(report)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
