//! Steady-state heat conduction in an axisymmetric disk-on-pillar structure.
//!
//! The laser heating is slow compared with conduction through either
//! material, so the temperature obeys the steady equation
//! `(1/r) ∂r(r k ∂r T) + ∂z(k ∂z T) = −q`, discretized with cell-centered
//! finite volumes on a uniform `(r, z)` grid and relaxed with SOR.

mod grid;
mod reflow;
mod solver;

pub use grid::{DiskLayout, LaserProfile, LaserSource, Material, ThermalGrid};
pub use reflow::{
    melt_front_radius, pillar_top_bottom_delta, radial_disk_delta, reflow_endpoint,
    toroid_from_melt_front, ToroidShape,
};
pub use solver::{
    solve_steady_state, BoundaryCondition, BoundarySpec, BoundaryValue, FreeSurface, SolveReport,
    SorSettings, SweepOrder, TemperatureField,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("relaxation factor {0} outside (0, 2)")]
    OmegaOutOfRange(f64),
    #[error("SOR did not converge in {iterations} iterations (residual {residual:.3e} K)")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("cell ({i}, {j}) has no thermal connection; the system is singular")]
    Singular { i: usize, j: usize },
    #[error("field has no disk-on-pillar layout")]
    NoLayout,
    #[error("no silica cell reaches the fusion temperature")]
    NoMeltFront,
}

/// Bulk thermal properties of one material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialProps {
    /// W/(m·K)
    pub conductivity: f64,
    /// kg/m³
    pub density: f64,
    /// J/(kg·K)
    pub heat_capacity: f64,
    /// m²/s, always `k / (ρ c)`
    pub diffusivity: f64,
    pub fusion_temperature_k: Option<f64>,
}

impl MaterialProps {
    pub fn new(
        conductivity: f64,
        density: f64,
        heat_capacity: f64,
        fusion_temperature_k: Option<f64>,
    ) -> Result<Self, ThermalError> {
        for (name, v) in [
            ("conductivity", conductivity),
            ("density", density),
            ("heat capacity", heat_capacity),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ThermalError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Some(t) = fusion_temperature_k {
            if !(t > 0.0) {
                return Err(ThermalError::InvalidParameter(
                    "fusion temperature must be positive".into(),
                ));
            }
        }
        Ok(Self {
            conductivity,
            density,
            heat_capacity,
            diffusivity: conductivity / (density * heat_capacity),
            fusion_temperature_k,
        })
    }

    /// Fused silica, softening at 1986 K.
    pub fn silica() -> Self {
        Self::new(1.4, 2200.0, 740.0, Some(1986.0)).expect("valid constants")
    }

    pub fn silicon() -> Self {
        Self::new(148.0, 2329.0, 713.0, None).expect("valid constants")
    }
}

/// Conductivities of the two solids in the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSet {
    pub silica: MaterialProps,
    pub silicon: MaterialProps,
}

impl Default for MaterialSet {
    fn default() -> Self {
        Self {
            silica: MaterialProps::silica(),
            silicon: MaterialProps::silicon(),
        }
    }
}

impl MaterialSet {
    pub fn conductivity(&self, m: Material) -> f64 {
        match m {
            Material::Silica => self.silica.conductivity,
            Material::Silicon => self.silicon.conductivity,
            Material::Vacuum => 0.0,
        }
    }
}

/// Characteristic diffusion time `L² / D`.
pub fn diffusion_time(length_scale_m: f64, material: &MaterialProps) -> Result<f64, ThermalError> {
    if !(length_scale_m >= 0.0 && length_scale_m.is_finite()) {
        return Err(ThermalError::InvalidParameter(format!(
            "length scale must be non-negative, got {length_scale_m}"
        )));
    }
    Ok(length_scale_m * length_scale_m / material.diffusivity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diffusivity_is_consistent() {
        for m in [MaterialProps::silica(), MaterialProps::silicon()] {
            let d = m.conductivity / (m.density * m.heat_capacity);
            assert!((m.diffusivity - d).abs() / d < 1e-9);
        }
        assert!((MaterialProps::silica().diffusivity - 8.6e-7).abs() < 0.05e-7);
        assert!((MaterialProps::silicon().diffusivity - 8.9e-5).abs() < 0.05e-5);
    }

    #[test]
    fn silicon_pillar_diffusion_time() {
        let si = MaterialProps::new(148.0, 2329.0, 713.0, None).unwrap();
        let tau = diffusion_time(50e-6, &si).unwrap();
        assert!((tau - 28.05e-6).abs() < 0.05e-6, "{tau}");
        let with_handbook_d = 50e-6f64.powi(2) / 8.8e-5;
        assert!((with_handbook_d - 28.4e-6).abs() < 0.05e-6);
        assert!(tau / 25e-6 < 2.0 && 25e-6 / tau < 2.0);
    }

    #[test]
    fn diffusion_time_scaling() {
        let si = MaterialProps::silicon();
        assert_eq!(diffusion_time(0.0, &si).unwrap(), 0.0);
        let t1 = diffusion_time(10e-6, &si).unwrap();
        let t2 = diffusion_time(20e-6, &si).unwrap();
        assert!((t2 / t1 - 4.0).abs() < 1e-12);
        assert!(diffusion_time(-1.0, &si).is_err());
    }

    #[test]
    fn rejects_nonpositive_properties() {
        assert!(MaterialProps::new(0.0, 1.0, 1.0, None).is_err());
        assert!(MaterialProps::new(1.0, 1.0, 1.0, Some(-3.0)).is_err());
    }
}
