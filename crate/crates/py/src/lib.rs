//! Python bindings. Lengths cross the boundary in the units a bench user
//! would type (µm, nm); everything inside stays in meters.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use toroidsim::implant::{overlap_figure_of_merit, slab_effective_thickness, ModeProfile};
use toroidsim::spectra::{self, AnalysisOptions, SpectraError};
use toroidsim::thermal::{
    diffusion_time as tau, melt_front_radius, reflow_endpoint, solve_steady_state, BoundarySpec,
    MaterialProps, SorSettings, ThermalError,
};
use toroidsim::wgm::{self, CavityGeometry, OpticalConstants, Polarization, WgmError};
use toroidsim::{ConfigError, ImplantError, RunConfig, ThermalGrid};

const NM: f64 = 1e-9;
const UM: f64 = 1e-6;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn wgm_err(e: WgmError) -> PyErr {
    value_error(e)
}

fn config_err(e: ConfigError) -> PyErr {
    value_error(e)
}

fn implant_err(e: ImplantError) -> PyErr {
    value_error(e)
}

fn spectra_err(e: SpectraError) -> PyErr {
    match e {
        SpectraError::TooFewPeaks(_) => PyRuntimeError::new_err(e.to_string()),
        _ => value_error(e),
    }
}

fn thermal_err(e: ThermalError) -> PyErr {
    match e {
        ThermalError::InvalidParameter(_) | ThermalError::OmegaOutOfRange(_) => value_error(e),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn constants(
    wavelength_nm: f64,
    silica_index: f64,
    fiber_core_index: f64,
) -> PyResult<OpticalConstants> {
    OpticalConstants::new(silica_index, fiber_core_index, wavelength_nm * NM).map_err(wgm_err)
}

/// `n`-th zero magnitude of Ai(−z), n in 1..=10.
#[pyfunction]
fn airy_zero(n: u32) -> PyResult<f64> {
    toroidsim::airy_zero(n).map_err(wgm_err)
}

/// Toroid resonator of a given major diameter.
#[pyclass(frozen, module = "toroidsim_py")]
struct Cavity {
    geometry: CavityGeometry,
    constants: OpticalConstants,
    #[pyo3(get)]
    radial_order: u32,
}

#[pymethods]
impl Cavity {
    #[new]
    #[pyo3(signature = (diameter_um, wavelength_nm=900.0, radial_order=1, silica_index=1.45, fiber_core_index=1.457))]
    fn new(
        diameter_um: f64,
        wavelength_nm: f64,
        radial_order: u32,
        silica_index: f64,
        fiber_core_index: f64,
    ) -> PyResult<Self> {
        let geometry = CavityGeometry::with_diameter(diameter_um * UM).map_err(wgm_err)?;
        let constants = constants(wavelength_nm, silica_index, fiber_core_index)?;
        toroidsim::airy_zero(radial_order).map_err(wgm_err)?;
        Ok(Self {
            geometry,
            constants,
            radial_order,
        })
    }

    #[getter]
    fn diameter_um(&self) -> f64 {
        self.geometry.major_diameter_m() / UM
    }

    #[getter]
    fn wavelength_nm(&self) -> f64 {
        self.constants.vacuum_wavelength_m / NM
    }

    #[getter]
    fn size_parameter(&self) -> f64 {
        wgm::size_parameter(
            self.geometry.major_radius_m,
            self.constants.vacuum_wavelength_m,
        )
    }

    #[getter]
    fn effective_index(&self) -> PyResult<f64> {
        wgm::effective_index(&self.geometry, &self.constants, self.radial_order).map_err(wgm_err)
    }

    /// FSR `λ² / (2π a N_eff)` in nm.
    #[getter]
    fn fsr_nm(&self) -> PyResult<f64> {
        let n_eff = self.effective_index()?;
        Ok(wgm::fsr(&self.geometry, &self.constants, n_eff).map_err(wgm_err)? / NM)
    }

    /// Spacing of neighbouring resonances near the configured wavelength, in nm.
    #[getter]
    fn comb_spacing_nm(&self) -> PyResult<f64> {
        let n = wgm::comb_spacing_index(&self.geometry, &self.constants, self.radial_order)
            .map_err(wgm_err)?;
        Ok(wgm::fsr(&self.geometry, &self.constants, n).map_err(wgm_err)? / NM)
    }

    /// `(phi_deg, complement_deg)` for phase matching to the fiber.
    fn polish_angle_deg(&self) -> PyResult<(f64, f64)> {
        let a = wgm::polish_angle(self.effective_index()?, self.constants.fiber_core_index)
            .map_err(wgm_err)?;
        Ok((a.phi_deg(), a.complement_deg()))
    }

    fn evanescent_decay_nm(&self) -> PyResult<f64> {
        let n_eff = self.effective_index()?;
        Ok(
            wgm::evanescent_decay_length(n_eff, self.constants.vacuum_wavelength_m)
                .map_err(wgm_err)?
                / NM,
        )
    }

    /// `(l, wavelength_nm, polarization)` for every resonance in `[lo_nm, hi_nm]`.
    fn modes(&self, lo_nm: f64, hi_nm: f64) -> PyResult<Vec<(u32, f64, &'static str)>> {
        let modes = wgm::resonance_wavelengths(
            &self.geometry,
            &self.constants,
            self.radial_order,
            (lo_nm * NM, hi_nm * NM),
        )
        .map_err(wgm_err)?;
        Ok(modes
            .iter()
            .map(|m| {
                let pol = match m.polarization {
                    Polarization::TE => "TE",
                    Polarization::TM => "TM",
                };
                (m.angular_number, m.wavelength_m / NM, pol)
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Cavity(diameter_um={}, wavelength_nm={}, radial_order={})",
            self.diameter_um(),
            self.wavelength_nm(),
            self.radial_order
        )
    }
}

/// Diameter (µm) whose resonance comb has spacing `spacing_nm`.
#[pyfunction]
#[pyo3(signature = (spacing_nm, wavelength_nm=900.0, radial_order=1, silica_index=1.45))]
fn diameter_from_spacing(
    spacing_nm: f64,
    wavelength_nm: f64,
    radial_order: u32,
    silica_index: f64,
) -> PyResult<f64> {
    let c = constants(wavelength_nm, silica_index, 1.457)?;
    Ok(wgm::invert_comb_spacing(spacing_nm * NM, &c, radial_order).map_err(wgm_err)? / UM)
}

/// `L² / D` in seconds for silicon or silica.
#[pyfunction]
#[pyo3(signature = (length_um, material="silicon"))]
fn diffusion_time(length_um: f64, material: &str) -> PyResult<f64> {
    let props = match material {
        "silicon" => MaterialProps::silicon(),
        "silica" => MaterialProps::silica(),
        other => return Err(value_error(format!("unknown material '{other}'"))),
    };
    tau(length_um * UM, &props).map_err(thermal_err)
}

/// Gaussian implant depth profile.
#[pyclass(frozen, module = "toroidsim_py")]
struct Implant {
    inner: toroidsim::ImplantProfile,
}

#[pymethods]
impl Implant {
    #[new]
    #[pyo3(signature = (peak_cm3=2e19, peak_depth_nm=200.0, fwhm_nm=110.0, fluence_cm2=2.5e14, layer_thickness_nm=800.0))]
    fn new(
        peak_cm3: f64,
        peak_depth_nm: f64,
        fwhm_nm: f64,
        fluence_cm2: f64,
        layer_thickness_nm: f64,
    ) -> PyResult<Self> {
        let inner = toroidsim::ImplantProfile {
            peak_concentration_cm3: peak_cm3,
            peak_depth_m: peak_depth_nm * NM,
            fwhm_m: fwhm_nm * NM,
            fluence_cm2,
            layer_thickness_m: layer_thickness_nm * NM,
        };
        inner.validate().map_err(implant_err)?;
        Ok(Self { inner })
    }

    /// Ions per cm² inside the layer.
    fn dose_cm2(&self) -> f64 {
        self.inner.integrated_dose()
    }

    fn fluence_deviation_percent(&self) -> f64 {
        self.inner.fluence_deviation_percent()
    }

    fn concentration_cm3(&self, depth_nm: f64) -> PyResult<f64> {
        self.inner
            .concentration_at(depth_nm * NM)
            .map_err(implant_err)
    }

    /// Overlap η with the fundamental slab mode of the layer.
    #[pyo3(signature = (wavelength_nm=900.0, index=1.45, samples=801))]
    fn overlap(&self, wavelength_nm: f64, index: f64, samples: usize) -> PyResult<f64> {
        let t = self.inner.layer_thickness_m;
        let mode = ModeProfile::slab_fundamental(t, wavelength_nm * NM, index, samples)
            .map_err(implant_err)?;
        overlap_figure_of_merit(&self.inner, &mode).map_err(implant_err)
    }

    #[staticmethod]
    #[pyo3(signature = (layer_thickness_nm=800.0, wavelength_nm=900.0, index=1.45))]
    fn slab_effective_thickness_nm(
        layer_thickness_nm: f64,
        wavelength_nm: f64,
        index: f64,
    ) -> PyResult<f64> {
        Ok(
            slab_effective_thickness(layer_thickness_nm * NM, wavelength_nm * NM, index)
                .map_err(implant_err)?
                / NM,
        )
    }
}

#[pyclass(frozen, module = "toroidsim_py")]
struct Spectrum {
    inner: spectra::Spectrum,
}

#[pymethods]
impl Spectrum {
    #[new]
    #[pyo3(signature = (wavelengths_nm, intensities, resolution_nm=0.1))]
    fn new(wavelengths_nm: Vec<f64>, intensities: Vec<f64>, resolution_nm: f64) -> PyResult<Self> {
        let wl = wavelengths_nm.iter().map(|w| w * NM).collect();
        let inner =
            spectra::Spectrum::new(wl, intensities, resolution_nm * NM).map_err(spectra_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn wavelengths_nm(&self) -> Vec<f64> {
        self.inner.wavelengths().iter().map(|w| w / NM).collect()
    }

    #[getter]
    fn intensities(&self) -> Vec<f64> {
        self.inner.intensities().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Seeded photoluminescence spectrum of a toroid comb.
#[pyfunction]
#[pyo3(signature = (
    diameter_um=55.0, seed=1, q=1e8, splitting_nm=1.2, gap_um=0.0, noise_rms=0.02,
    resolution_nm=0.1, band_nm=(880.0, 920.0), grid_step_nm=0.025,
))]
#[allow(clippy::too_many_arguments)]
fn synthesize(
    diameter_um: f64,
    seed: u64,
    q: f64,
    splitting_nm: f64,
    gap_um: f64,
    noise_rms: f64,
    resolution_nm: f64,
    band_nm: (f64, f64),
    grid_step_nm: f64,
) -> PyResult<Spectrum> {
    let params = spectra::SynthesisParams {
        geometry: CavityGeometry::with_diameter(diameter_um * UM).map_err(wgm_err)?,
        intrinsic_q: q,
        te_tm_splitting_m: splitting_nm * NM,
        gap_m: gap_um * UM,
        noise_rms,
        resolution_fwhm_m: resolution_nm * NM,
        seed,
        ..spectra::SynthesisParams::default()
    };
    let s = spectra::synthesize(&params, (band_nm.0 * NM, band_nm.1 * NM), grid_step_nm * NM)
        .map_err(spectra_err)?;
    Ok(Spectrum { inner: s.spectrum })
}

#[pyclass(frozen, module = "toroidsim_py")]
struct Analysis {
    #[pyo3(get)]
    peaks_nm: Vec<f64>,
    #[pyo3(get)]
    labels: Vec<&'static str>,
    #[pyo3(get)]
    q_bounds: Vec<f64>,
    #[pyo3(get)]
    resolution_limited: Vec<bool>,
    #[pyo3(get)]
    fsr_nm: Option<f64>,
    #[pyo3(get)]
    splitting_nm: Option<f64>,
    #[pyo3(get)]
    inferred_diameter_um: Option<f64>,
    #[pyo3(get)]
    noise_floor: f64,
}

/// Detects the comb and infers the cavity diameter.
#[pyfunction]
#[pyo3(signature = (spectrum, min_prominence=None, wavelength_nm=900.0, radial_order=1))]
fn analyze(
    spectrum: &Spectrum,
    min_prominence: Option<f64>,
    wavelength_nm: f64,
    radial_order: u32,
) -> PyResult<Analysis> {
    let options = AnalysisOptions {
        constants: constants(wavelength_nm, 1.45, 1.457)?,
        radial_order,
        min_prominence,
    };
    let r = spectra::analyze(&spectrum.inner, &options).map_err(spectra_err)?;
    Ok(Analysis {
        peaks_nm: r.peaks.peaks.iter().map(|p| p.wavelength_m / NM).collect(),
        labels: r
            .peaks
            .peaks
            .iter()
            .map(|p| match p.polarization_label {
                spectra::PolarizationLabel::TE => "TE",
                spectra::PolarizationLabel::TM => "TM",
                spectra::PolarizationLabel::Unknown => "unknown",
            })
            .collect(),
        q_bounds: r.q_bounds.iter().map(|q| q.q_measured).collect(),
        resolution_limited: r.q_bounds.iter().map(|q| q.resolution_limited).collect(),
        fsr_nm: r.peaks.fsr_estimate_m.map(|x| x / NM),
        splitting_nm: r.peaks.splitting_estimate_m.map(|x| x / NM),
        inferred_diameter_um: r.inferred_diameter_m.map(|x| x / UM),
        noise_floor: r.noise_floor,
    })
}

#[pyclass(frozen, module = "toroidsim_py")]
struct ThermalResult {
    #[pyo3(get)]
    nr: usize,
    #[pyo3(get)]
    nz: usize,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    absorbed_mw: f64,
    #[pyo3(get)]
    max_temperature_k: f64,
    #[pyo3(get)]
    energy_balance: Option<f64>,
    #[pyo3(get)]
    melt_front_um: Option<f64>,
    #[pyo3(get)]
    final_major_radius_um: Option<f64>,
    #[pyo3(get)]
    minor_radius_um: Option<f64>,
}

/// Steady-state laser heating of the disk on its pillar. `config` takes the
/// same `key: value` pairs as the command-line config file.
#[pyfunction]
#[pyo3(signature = (power_mw=None, nr=None, config=None))]
fn solve_thermal(
    power_mw: Option<f64>,
    nr: Option<u64>,
    config: Option<&Bound<'_, PyDict>>,
) -> PyResult<ThermalResult> {
    let mut c = RunConfig::default();
    if let Some(d) = config {
        for (k, v) in d.iter() {
            let key: String = k.extract()?;
            c.set(&key, &v.str()?.to_string()).map_err(config_err)?;
        }
    }
    if let Some(p) = power_mw {
        c.set("laser.power_mw", &p.to_string())
            .map_err(config_err)?;
    }
    if let Some(n) = nr {
        c.set("thermal.nr", &n.to_string()).map_err(config_err)?;
    }

    let geometry = c.thermal_geometry().map_err(config_err)?;
    let materials = c.materials().map_err(config_err)?;
    let laser = c.laser().map_err(config_err)?;
    let ambient = c.f64("thermal.ambient_k").map_err(config_err)?;
    let cells = c.u64("thermal.disk_cells").map_err(config_err)? as usize;
    let nr = c.u64("thermal.nr").map_err(config_err)? as usize;
    let mut grid =
        ThermalGrid::disk_on_pillar(&geometry, nr, cells, ambient).map_err(thermal_err)?;
    let absorbed = laser.deposit(&mut grid).map_err(thermal_err)?;
    let settings = SorSettings {
        omega: c
            .optional_f64("thermal.omega")
            .map_err(config_err)?
            .unwrap_or_else(|| SorSettings::auto_omega(grid.nr, grid.nz)),
        tol_k: c.positive("thermal.tol_k").map_err(config_err)?,
        max_iterations: c.u64("thermal.max_iterations").map_err(config_err)? as usize,
        order: c.sweep_order().map_err(config_err)?,
    };
    let boundary = BoundarySpec::disk_on_pillar(ambient, c.free_surface().map_err(config_err)?);
    let field =
        solve_steady_state(grid, &materials, &boundary, &settings, None).map_err(thermal_err)?;

    let front = melt_front_radius(&field, &materials.silica).map_err(thermal_err)?;
    let shape = match front {
        Some(_) => {
            Some(reflow_endpoint(&geometry, &field, &materials.silica).map_err(thermal_err)?)
        }
        None => None,
    };
    Ok(ThermalResult {
        nr: field.grid.nr,
        nz: field.grid.nz,
        iterations: field.report.iterations,
        absorbed_mw: absorbed * 1e3,
        max_temperature_k: field.max_temperature(),
        energy_balance: (absorbed > 0.0).then(|| (field.boundary_outflux() - absorbed) / absorbed),
        melt_front_um: front.map(|r| r / UM),
        final_major_radius_um: shape.map(|s| s.final_major_radius_m / UM),
        minor_radius_um: shape.map(|s| s.minor_radius_m / UM),
    })
}

#[pymodule]
fn toroidsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", toroidsim::VERSION)?;
    m.add_class::<Cavity>()?;
    m.add_class::<Implant>()?;
    m.add_class::<Spectrum>()?;
    m.add_class::<Analysis>()?;
    m.add_class::<ThermalResult>()?;
    m.add_function(wrap_pyfunction!(airy_zero, m)?)?;
    m.add_function(wrap_pyfunction!(diameter_from_spacing, m)?)?;
    m.add_function(wrap_pyfunction!(diffusion_time, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(solve_thermal, m)?)?;
    Ok(())
}
