use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::solver::TemperatureField;
use super::{MaterialProps, ThermalError};
use crate::wgm::CavityGeometry;

/// Steady-state toroid left behind once the rim has receded to the melt front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToroidShape {
    pub final_major_radius_m: f64,
    pub minor_radius_m: f64,
    /// The torus would reach the pillar; the reflow should be stopped earlier.
    pub collides_with_pillar: bool,
}

impl ToroidShape {
    pub fn torus_volume(&self) -> f64 {
        2.0 * PI * PI * self.final_major_radius_m * self.minor_radius_m * self.minor_radius_m
    }

    /// Torus plus the flat disk remaining inside it.
    pub fn total_volume(&self, disk_thickness_m: f64) -> f64 {
        self.torus_volume()
            + PI * self.final_major_radius_m * self.final_major_radius_m * disk_thickness_m
    }
}

/// Temperature profile along the disk mid-plane, one value per column.
fn midplane(field: &TemperatureField) -> Result<Vec<f64>, ThermalError> {
    let l = field.grid.layout.ok_or(ThermalError::NoLayout)?;
    let half = l.disk_rows / 2;
    let rows: Vec<usize> = if l.disk_rows % 2 == 1 {
        vec![l.pillar_rows + half]
    } else {
        vec![l.pillar_rows + half - 1, l.pillar_rows + half]
    };
    Ok((0..field.grid.nr)
        .map(|i| rows.iter().map(|&j| field.at(i, j)).sum::<f64>() / rows.len() as f64)
        .collect())
}

/// Largest temperature drop from the top to the base of the pillar.
pub fn pillar_top_bottom_delta(field: &TemperatureField) -> Result<f64, ThermalError> {
    let l = field.grid.layout.ok_or(ThermalError::NoLayout)?;
    Ok((0..l.pillar_cols)
        .map(|i| field.at(i, l.pillar_rows - 1) - field.at(i, 0))
        .fold(0.0, f64::max))
}

/// Rim minus axis temperature on the disk mid-plane.
pub fn radial_disk_delta(field: &TemperatureField) -> Result<f64, ThermalError> {
    let m = midplane(field)?;
    Ok(m[m.len() - 1] - m[0])
}

/// Innermost radius beyond which the whole disk mid-plane is at or above the
/// silica fusion temperature, interpolated between cell centers.
pub fn melt_front_radius(
    field: &TemperatureField,
    silica: &MaterialProps,
) -> Result<Option<f64>, ThermalError> {
    let t_fus = silica.fusion_temperature_k.ok_or_else(|| {
        ThermalError::InvalidParameter("silica fusion temperature not set".into())
    })?;
    let m = midplane(field)?;
    let g = &field.grid;
    if m[m.len() - 1] < t_fus {
        return Ok(None);
    }
    let mut i0 = m.len() - 1;
    while i0 > 0 && m[i0 - 1] >= t_fus {
        i0 -= 1;
    }
    if i0 == 0 {
        return Ok(Some(g.r_min));
    }
    let (t_lo, t_hi) = (m[i0 - 1], m[i0]);
    let frac = (t_fus - t_lo) / (t_hi - t_lo);
    Ok(Some(g.r_center(i0 - 1) + frac * g.dr))
}

/// Toroid formed when the rim recedes to `front_radius_m`, conserving volume:
/// `2π² R_f r² = π (R₀² − R_f²) t`.
pub fn toroid_from_melt_front(
    geometry: &CavityGeometry,
    front_radius_m: f64,
) -> Result<ToroidShape, ThermalError> {
    if !(front_radius_m > 0.0) {
        return Err(ThermalError::InvalidParameter(
            "melt front at the axis leaves no toroid".into(),
        ));
    }
    let r0 = geometry.major_radius_m;
    let rf = front_radius_m.min(r0);
    let t = geometry.disk_thickness_m;
    let minor = ((r0 * r0 - rf * rf) * t / (2.0 * PI * rf)).sqrt();
    Ok(ToroidShape {
        final_major_radius_m: rf,
        minor_radius_m: minor,
        collides_with_pillar: rf - minor < geometry.pillar_radius_m,
    })
}

pub fn reflow_endpoint(
    geometry: &CavityGeometry,
    field: &TemperatureField,
    silica: &MaterialProps,
) -> Result<ToroidShape, ThermalError> {
    let front = melt_front_radius(field, silica)?.ok_or(ThermalError::NoMeltFront)?;
    let shape = toroid_from_melt_front(geometry, front)?;
    if shape.collides_with_pillar {
        log::warn!(
            "toroid (R = {:.3e} m, r = {:.3e} m) overlaps the pillar of radius {:.3e} m",
            shape.final_major_radius_m,
            shape.minor_radius_m,
            geometry.pillar_radius_m
        );
    }
    Ok(shape)
}
