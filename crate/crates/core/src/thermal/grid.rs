use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ThermalError;
use crate::wgm::CavityGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Material {
    Silica,
    Silicon,
    Vacuum,
}

impl Material {
    pub fn name(self) -> &'static str {
        match self {
            Material::Silica => "silica",
            Material::Silicon => "silicon",
            Material::Vacuum => "vacuum",
        }
    }
}

/// Row/column extents of the pillar and disk in a disk-on-pillar grid.
/// Rows `0..pillar_rows` hold the pillar, the next `disk_rows` the disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiskLayout {
    pub pillar_cols: usize,
    pub pillar_rows: usize,
    pub disk_rows: usize,
}

/// Cell-centered axisymmetric grid. Cell `(i, j)` spans
/// `r ∈ [r_min + i dr, r_min + (i+1) dr]`, `z ∈ [j dz, (j+1) dz]` and is stored
/// at index `j * nr + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalGrid {
    pub nr: usize,
    pub nz: usize,
    pub dr: f64,
    pub dz: f64,
    pub r_min: f64,
    pub material: Vec<Material>,
    /// K
    pub temperature: Vec<f64>,
    /// W/m³
    pub source: Vec<f64>,
    pub layout: Option<DiskLayout>,
}

impl ThermalGrid {
    /// Grid filled with one material over `r ∈ [r_min, r_max]`, `z ∈ [0, height]`.
    pub fn uniform(
        nr: usize,
        nz: usize,
        r_min: f64,
        r_max: f64,
        height: f64,
        material: Material,
        initial_temperature: f64,
    ) -> Result<Self, ThermalError> {
        if nr == 0 || nz == 0 {
            return Err(ThermalError::InvalidParameter(
                "grid needs at least one cell per axis".into(),
            ));
        }
        if !(r_min >= 0.0 && r_max > r_min && height > 0.0) {
            return Err(ThermalError::InvalidParameter(
                "grid extents must be positive".into(),
            ));
        }
        let n = nr * nz;
        Ok(Self {
            nr,
            nz,
            dr: (r_max - r_min) / nr as f64,
            dz: height / nz as f64,
            r_min,
            material: vec![material; n],
            temperature: vec![initial_temperature; n],
            source: vec![0.0; n],
            layout: None,
        })
    }

    /// Silica disk of radius `major_radius_m` resting on a silicon pillar.
    /// `disk_cells` rows resolve the disk thickness; the pillar height is
    /// rounded to a whole number of those rows.
    pub fn disk_on_pillar(
        geometry: &CavityGeometry,
        nr: usize,
        disk_cells: usize,
        initial_temperature: f64,
    ) -> Result<Self, ThermalError> {
        geometry
            .validate()
            .map_err(|e| ThermalError::InvalidParameter(e.to_string()))?;
        if nr < 2 || disk_cells == 0 {
            return Err(ThermalError::InvalidParameter(
                "need at least 2 radial cells and 1 disk cell".into(),
            ));
        }
        let dz = geometry.disk_thickness_m / disk_cells as f64;
        let pillar_rows = ((geometry.pillar_height_m / dz).round() as usize).max(1);
        let nz = pillar_rows + disk_cells;
        let mut grid = Self::uniform(
            nr,
            nz,
            0.0,
            geometry.major_radius_m,
            nz as f64 * dz,
            Material::Vacuum,
            initial_temperature,
        )?;
        let pillar_cols = (0..nr)
            .take_while(|&i| grid.r_center(i) < geometry.pillar_radius_m)
            .count();
        if pillar_cols == 0 || pillar_cols >= nr {
            return Err(ThermalError::InvalidParameter(
                "pillar radius not resolved by the radial grid".into(),
            ));
        }
        for j in 0..nz {
            for i in 0..nr {
                let m = if j >= pillar_rows {
                    Material::Silica
                } else if i < pillar_cols {
                    Material::Silicon
                } else {
                    Material::Vacuum
                };
                let c = grid.idx(i, j);
                grid.material[c] = m;
            }
        }
        grid.layout = Some(DiskLayout {
            pillar_cols,
            pillar_rows,
            disk_rows: disk_cells,
        });
        Ok(grid)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nr + i
    }

    pub fn r_center(&self, i: usize) -> f64 {
        self.r_min + (i as f64 + 0.5) * self.dr
    }

    pub fn z_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dz
    }

    pub fn r_max(&self) -> f64 {
        self.r_min + self.nr as f64 * self.dr
    }

    pub fn height(&self) -> f64 {
        self.nz as f64 * self.dz
    }

    /// Volume of the annular cell in column `i`.
    pub fn cell_volume(&self, i: usize) -> f64 {
        2.0 * PI * self.r_center(i) * self.dr * self.dz
    }

    /// `∫ q dV` over the grid, in watts.
    pub fn deposited_power(&self) -> f64 {
        (0..self.nz)
            .flat_map(|j| (0..self.nr).map(move |i| (i, j)))
            .map(|(i, j)| self.source[self.idx(i, j)] * self.cell_volume(i))
            .sum()
    }

    pub fn scale_source(&mut self, factor: f64) {
        self.source.iter_mut().for_each(|q| *q *= factor);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LaserProfile {
    /// Gaussian beam `exp(−2 r²/w²)` centered on the axis, absorbed only
    /// outside the inner radius.
    GaussianAnnulus,
    /// Flat intensity between the inner radius and the beam radius.
    UniformDisk,
}

/// CO₂ laser heating, absorbed entirely in the silica.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserSource {
    pub power_w: f64,
    pub beam_radius_m: f64,
    pub absorbed_fraction: f64,
    pub profile: LaserProfile,
    pub inner_radius_m: f64,
}

impl LaserSource {
    pub fn validate(&self) -> Result<(), ThermalError> {
        if !(self.power_w >= 0.0 && self.power_w.is_finite()) {
            return Err(ThermalError::InvalidParameter(
                "laser power must be non-negative".into(),
            ));
        }
        if !(self.beam_radius_m > 0.0) {
            return Err(ThermalError::InvalidParameter(
                "beam radius must be positive".into(),
            ));
        }
        if !(self.absorbed_fraction > 0.0 && self.absorbed_fraction <= 1.0) {
            return Err(ThermalError::InvalidParameter(
                "absorbed fraction must lie in (0, 1]".into(),
            ));
        }
        if !(self.inner_radius_m >= 0.0) {
            return Err(ThermalError::InvalidParameter(
                "inner radius must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn absorbed_power(&self) -> f64 {
        self.power_w * self.absorbed_fraction
    }

    /// `∫ I(r) 2πr dr` of the unnormalized intensity over `[a, b]`.
    fn radial_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self.profile {
            LaserProfile::GaussianAnnulus => {
                let w2 = self.beam_radius_m * self.beam_radius_m;
                0.5 * PI * w2 * ((-2.0 * a * a / w2).exp() - (-2.0 * b * b / w2).exp())
            }
            LaserProfile::UniformDisk => PI * (b * b - a * a),
        }
    }

    fn absorbing_range(&self, r_max: f64) -> (f64, f64) {
        let outer = match self.profile {
            LaserProfile::GaussianAnnulus => r_max,
            LaserProfile::UniformDisk => self.beam_radius_m.min(r_max),
        };
        (self.inner_radius_m, outer)
    }

    /// Overwrites the grid's source term with this laser's heating, spread
    /// evenly over the silica cells of each column. Returns the absorbed power.
    pub fn deposit(&self, grid: &mut ThermalGrid) -> Result<f64, ThermalError> {
        self.validate()?;
        grid.source.iter_mut().for_each(|q| *q = 0.0);
        let (lo, hi) = self.absorbing_range(grid.r_max());
        let total = self.radial_integral(lo, hi);
        if self.power_w == 0.0 {
            return Ok(0.0);
        }
        if !(total > 0.0) {
            return Err(ThermalError::InvalidParameter(
                "laser footprint does not overlap the silica".into(),
            ));
        }
        let p_abs = self.absorbed_power();
        for i in 0..grid.nr {
            let r0 = grid.r_min + i as f64 * grid.dr;
            let share = self.radial_integral(r0.max(lo), (r0 + grid.dr).min(hi)) / total;
            if share == 0.0 {
                continue;
            }
            let silica_rows: Vec<usize> = (0..grid.nz)
                .filter(|&j| grid.material[grid.idx(i, j)] == Material::Silica)
                .collect();
            if silica_rows.is_empty() {
                continue;
            }
            let q = p_abs * share / (silica_rows.len() as f64 * grid.cell_volume(i));
            for j in silica_rows {
                let c = grid.idx(i, j);
                grid.source[c] = q;
            }
        }
        Ok(p_abs)
    }
}
