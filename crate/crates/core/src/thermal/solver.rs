use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::grid::{Material, ThermalGrid};
use super::{MaterialSet, ThermalError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundaryValue {
    Uniform(f64),
    /// One value per boundary cell: `nz` entries on radial sides, `nr` on axial ones.
    PerCell(Vec<f64>),
}

impl BoundaryValue {
    fn at(&self, k: usize) -> f64 {
        match self {
            BoundaryValue::Uniform(t) => *t,
            BoundaryValue::PerCell(v) => v[k],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// Fixed temperature on the outer face of the boundary cells.
    Dirichlet(BoundaryValue),
    /// Behaves like every other free surface (see [`FreeSurface`]).
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FreeSurface {
    Insulating,
    /// Linearized radiative loss `h (T − T_ambient)`.
    Radiative {
        h_w_m2k: f64,
    },
}

/// Conditions on the four sides of the grid plus the treatment of every
/// solid/vacuum interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub inner: BoundaryCondition,
    pub outer: BoundaryCondition,
    pub bottom: BoundaryCondition,
    pub top: BoundaryCondition,
    pub free_surface: FreeSurface,
    pub ambient_k: f64,
}

impl BoundarySpec {
    /// Pillar base held at ambient, every other surface free.
    pub fn disk_on_pillar(ambient_k: f64, free_surface: FreeSurface) -> Self {
        Self {
            inner: BoundaryCondition::Free,
            outer: BoundaryCondition::Free,
            bottom: BoundaryCondition::Dirichlet(BoundaryValue::Uniform(ambient_k)),
            top: BoundaryCondition::Free,
            free_surface,
            ambient_k,
        }
    }

    pub fn all_dirichlet(t: f64) -> Self {
        let d = || BoundaryCondition::Dirichlet(BoundaryValue::Uniform(t));
        Self {
            inner: d(),
            outer: d(),
            bottom: d(),
            top: d(),
            free_surface: FreeSurface::Insulating,
            ambient_k: t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepOrder {
    RedBlack,
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SorSettings {
    pub omega: f64,
    /// Stop when the largest Gauss–Seidel correction in a sweep falls below this (K).
    pub tol_k: f64,
    pub max_iterations: usize,
    pub order: SweepOrder,
}

impl SorSettings {
    /// Near-optimal relaxation factor for a grid whose longest path spans `n` cells.
    pub fn auto_omega(nr: usize, nz: usize) -> f64 {
        let n = nr.max(nz).max(2) as f64;
        2.0 / (1.0 + (PI / n).sin())
    }

    pub fn for_grid(grid: &ThermalGrid) -> Self {
        Self {
            omega: Self::auto_omega(grid.nr, grid.nz),
            tol_k: 1e-9,
            max_iterations: 500_000,
            order: SweepOrder::RedBlack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Largest remaining Gauss–Seidel correction after the final sweep (K).
    pub residual_k: f64,
}

/// Finite-volume coefficients on a grid padded by one ghost cell per side.
struct System {
    width: usize,
    /// Conductance between padded cell `p` and `p + 1` (W/K).
    g_east: Vec<f64>,
    /// Conductance between padded cell `p` and `p + width`.
    g_north: Vec<f64>,
    diag: Vec<f64>,
    rhs: Vec<f64>,
    /// Boundary part of `diag` and `rhs`, used for the heat outflux.
    sink_diag: Vec<f64>,
    sink_rhs: Vec<f64>,
}

impl System {
    #[inline]
    fn pad(&self, i: usize, j: usize) -> usize {
        (j + 1) * self.width + i + 1
    }

    fn assemble(
        grid: &ThermalGrid,
        materials: &MaterialSet,
        bc: &BoundarySpec,
    ) -> Result<Self, ThermalError> {
        let (nr, nz, dr, dz) = (grid.nr, grid.nz, grid.dr, grid.dz);
        check_boundary_len(&bc.inner, nz)?;
        check_boundary_len(&bc.outer, nz)?;
        check_boundary_len(&bc.bottom, nr)?;
        check_boundary_len(&bc.top, nr)?;
        let width = nr + 2;
        let size = width * (nz + 2);
        let mut sys = System {
            width,
            g_east: vec![0.0; size],
            g_north: vec![0.0; size],
            diag: vec![0.0; size],
            rhs: vec![0.0; size],
            sink_diag: vec![0.0; size],
            sink_rhs: vec![0.0; size],
        };
        let k_of = |i: usize, j: usize| materials.conductivity(grid.material[grid.idx(i, j)]);
        let h_free = match bc.free_surface {
            FreeSurface::Insulating => 0.0,
            FreeSurface::Radiative { h_w_m2k } => h_w_m2k,
        };
        let t_amb = bc.ambient_k;

        for j in 0..nz {
            for i in 0..nr {
                let k = k_of(i, j);
                if k == 0.0 {
                    continue;
                }
                let p = sys.pad(i, j);
                let r_w = grid.r_min + i as f64 * dr;
                let r_e = r_w + dr;
                let area_w = 2.0 * PI * r_w * dz;
                let area_e = 2.0 * PI * r_e * dz;
                let area_z = 2.0 * PI * grid.r_center(i) * dr;

                // (area, half-spacing, neighbor, boundary condition, boundary index)
                let faces = [
                    (
                        area_e,
                        dr / 2.0,
                        (i + 1 < nr).then(|| (i + 1, j)),
                        &bc.outer,
                        j,
                    ),
                    (
                        area_w,
                        dr / 2.0,
                        i.checked_sub(1).map(|im| (im, j)),
                        &bc.inner,
                        j,
                    ),
                    (
                        area_z,
                        dz / 2.0,
                        (j + 1 < nz).then(|| (i, j + 1)),
                        &bc.top,
                        i,
                    ),
                    (
                        area_z,
                        dz / 2.0,
                        j.checked_sub(1).map(|jm| (i, jm)),
                        &bc.bottom,
                        i,
                    ),
                ];
                let mut link = [0.0; 4];
                for (f, (area, half, nb, cond, bk)) in faces.into_iter().enumerate() {
                    match nb {
                        Some((ni, nj)) => {
                            let kn = k_of(ni, nj);
                            if kn > 0.0 {
                                link[f] = area / (half / k + half / kn);
                            } else if h_free > 0.0 {
                                sys.sink_diag[p] += h_free * area;
                                sys.sink_rhs[p] += h_free * area * t_amb;
                            }
                        }
                        None => match cond {
                            BoundaryCondition::Dirichlet(v) => {
                                let g = area / (half / k);
                                sys.sink_diag[p] += g;
                                sys.sink_rhs[p] += g * v.at(bk);
                            }
                            BoundaryCondition::Free if h_free > 0.0 => {
                                sys.sink_diag[p] += h_free * area;
                                sys.sink_rhs[p] += h_free * area * t_amb;
                            }
                            BoundaryCondition::Free => {}
                        },
                    }
                }
                sys.g_east[p] = link[0];
                sys.g_north[p] = link[2];
                let q_v = grid.source[grid.idx(i, j)] * grid.cell_volume(i);
                sys.diag[p] = link.iter().sum::<f64>() + sys.sink_diag[p];
                sys.rhs[p] = sys.sink_rhs[p] + q_v;
                if !(sys.diag[p] > 0.0) {
                    return Err(ThermalError::Singular { i, j });
                }
            }
        }
        Ok(sys)
    }

    /// Gauss–Seidel target value of padded cell `p`.
    #[inline]
    fn target(&self, t: &[f64], p: usize) -> f64 {
        let w = self.width;
        (self.rhs[p]
            + self.g_east[p] * t[p + 1]
            + self.g_east[p - 1] * t[p - 1]
            + self.g_north[p] * t[p + w]
            + self.g_north[p - w] * t[p - w])
            / self.diag[p]
    }

    fn max_correction(&self, t: &[f64], nr: usize, nz: usize) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..nz {
            for i in 0..nr {
                let p = self.pad(i, j);
                if self.diag[p] > 0.0 {
                    worst = worst.max((self.target(t, p) - t[p]).abs());
                }
            }
        }
        worst
    }
}

fn check_boundary_len(cond: &BoundaryCondition, n: usize) -> Result<(), ThermalError> {
    if let BoundaryCondition::Dirichlet(BoundaryValue::PerCell(v)) = cond {
        if v.len() != n {
            return Err(ThermalError::InvalidParameter(format!(
                "boundary profile has {} values, expected {n}",
                v.len()
            )));
        }
    }
    Ok(())
}

/// A converged temperature field with the data needed to post-process it.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureField {
    pub grid: ThermalGrid,
    pub materials: MaterialSet,
    pub boundary: BoundarySpec,
    pub report: SolveReport,
}

/// Relaxes the grid's temperature to the steady state with SOR.
///
/// The grid's current temperatures are the initial guess and its `source`
/// array the volumetric heating. Each iteration's largest correction is
/// written to `log` as `iteration residual_K` when a log is supplied.
pub fn solve_steady_state(
    mut grid: ThermalGrid,
    materials: &MaterialSet,
    boundary: &BoundarySpec,
    settings: &SorSettings,
    mut log: Option<&mut dyn Write>,
) -> Result<TemperatureField, ThermalError> {
    if !(settings.omega > 0.0 && settings.omega < 2.0) {
        return Err(ThermalError::OmegaOutOfRange(settings.omega));
    }
    if !(settings.tol_k > 0.0) {
        return Err(ThermalError::InvalidParameter(
            "tolerance must be positive".into(),
        ));
    }
    let sys = System::assemble(&grid, materials, boundary)?;
    let (nr, nz) = (grid.nr, grid.nz);
    let mut t = vec![0.0; sys.diag.len()];
    for j in 0..nz {
        for i in 0..nr {
            let p = sys.pad(i, j);
            t[p] = if sys.diag[p] > 0.0 {
                grid.temperature[grid.idx(i, j)]
            } else {
                boundary.ambient_k
            };
        }
    }

    let omega = settings.omega;
    let relax = |t: &mut [f64], p: usize, worst: &mut f64| {
        if sys.diag[p] > 0.0 {
            let delta = sys.target(t, p) - t[p];
            *worst = worst.max(delta.abs());
            t[p] += omega * delta;
        }
    };

    let mut iterations = 0;
    let mut last = f64::INFINITY;
    while iterations < settings.max_iterations {
        let mut worst = 0.0f64;
        match settings.order {
            SweepOrder::RedBlack => {
                for color in 0..2 {
                    for j in 0..nz {
                        let mut i = (color + j) % 2;
                        while i < nr {
                            relax(&mut t, sys.pad(i, j), &mut worst);
                            i += 2;
                        }
                    }
                }
            }
            SweepOrder::Lexicographic => {
                for j in 0..nz {
                    for i in 0..nr {
                        relax(&mut t, sys.pad(i, j), &mut worst);
                    }
                }
            }
        }
        iterations += 1;
        last = worst;
        if let Some(w) = log.as_mut() {
            let _ = writeln!(w, "{iterations} {worst:.6e}");
        }
        if !worst.is_finite() {
            break;
        }
        if worst < settings.tol_k {
            break;
        }
    }
    if !(last < settings.tol_k) {
        return Err(ThermalError::NotConverged {
            iterations,
            residual: last,
        });
    }
    let residual = sys.max_correction(&t, nr, nz);
    for j in 0..nz {
        for i in 0..nr {
            let c = grid.idx(i, j);
            grid.temperature[c] = t[sys.pad(i, j)];
        }
    }
    Ok(TemperatureField {
        grid,
        materials: *materials,
        boundary: boundary.clone(),
        report: SolveReport {
            iterations,
            residual_k: residual,
        },
    })
}

impl TemperatureField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.grid.temperature[self.grid.idx(i, j)]
    }

    fn solid_temperatures(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid
            .temperature
            .iter()
            .zip(&self.grid.material)
            .filter(|(_, m)| **m != Material::Vacuum)
            .map(|(t, _)| *t)
    }

    pub fn max_temperature(&self) -> f64 {
        self.solid_temperatures().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_temperature(&self) -> f64 {
        self.solid_temperatures().fold(f64::INFINITY, f64::min)
    }

    /// Heat leaving through Dirichlet faces and radiative surfaces (W).
    pub fn boundary_outflux(&self) -> f64 {
        let sys = System::assemble(&self.grid, &self.materials, &self.boundary)
            .expect("assembled once already");
        let mut total = 0.0;
        for j in 0..self.grid.nz {
            for i in 0..self.grid.nr {
                let p = sys.pad(i, j);
                total += sys.sink_diag[p] * self.at(i, j) - sys.sink_rhs[p];
            }
        }
        total
    }

    pub fn deposited_power(&self) -> f64 {
        self.grid.deposited_power()
    }

    /// `r_m,z_m,material,T_K`, one row per cell, `z` outer and `r` inner.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r_m,z_m,material,T_K")?;
        for j in 0..self.grid.nz {
            for i in 0..self.grid.nr {
                let c = self.grid.idx(i, j);
                writeln!(
                    w,
                    "{:.6e},{:.6e},{},{:.6}",
                    self.grid.r_center(i),
                    self.grid.z_center(j),
                    self.grid.material[c].name(),
                    self.grid.temperature[c]
                )?;
            }
        }
        Ok(())
    }
}
