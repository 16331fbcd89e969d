//! Thermal verification cases with analytic or structural references.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toroidsim::thermal::{
    solve_steady_state, BoundaryCondition, BoundarySpec, BoundaryValue, FreeSurface, Material,
    MaterialSet, SorSettings, SweepOrder, TemperatureField, ThermalGrid,
};
use toroidsim::wgm::CavityGeometry;

pub const R_INNER: f64 = 10e-6;
pub const R_OUTER: f64 = 50e-6;
pub const T_INNER: f64 = 1000.0;
pub const T_OUTER: f64 = 300.0;

/// `T(r)` between two isothermal cylinders.
pub fn log_profile(r: f64) -> f64 {
    T_INNER + (T_OUTER - T_INNER) * (r / R_INNER).ln() / (R_OUTER / R_INNER).ln()
}

pub fn annulus_boundary() -> BoundarySpec {
    BoundarySpec {
        inner: BoundaryCondition::Dirichlet(BoundaryValue::Uniform(T_INNER)),
        outer: BoundaryCondition::Dirichlet(BoundaryValue::Uniform(T_OUTER)),
        bottom: BoundaryCondition::Free,
        top: BoundaryCondition::Free,
        free_surface: FreeSurface::Insulating,
        ambient_k: T_OUTER,
    }
}

pub fn annulus_grid(nr: usize, nz: usize) -> ThermalGrid {
    ThermalGrid::uniform(nr, nz, R_INNER, R_OUTER, 10e-6, Material::Silica, T_OUTER).unwrap()
}

pub fn solve_annulus(
    nr: usize,
    nz: usize,
    omega: f64,
    tol_k: f64,
    order: SweepOrder,
) -> TemperatureField {
    let settings = SorSettings {
        omega,
        tol_k,
        max_iterations: 5_000_000,
        order,
    };
    solve_steady_state(
        annulus_grid(nr, nz),
        &MaterialSet::default(),
        &annulus_boundary(),
        &settings,
        None,
    )
    .unwrap()
}

/// Largest deviation from the logarithmic profile relative to the imposed
/// temperature difference.
pub fn annulus_relative_error(field: &TemperatureField) -> f64 {
    let g = &field.grid;
    let mut worst = 0.0f64;
    for j in 0..g.nz {
        for i in 0..g.nr {
            let exact = log_profile(g.r_center(i));
            worst = worst.max((field.at(i, j) - exact).abs() / (T_INNER - T_OUTER).abs());
        }
    }
    worst
}

const MMS_T0: f64 = 300.0;
const MMS_R: f64 = 50e-6;
const MMS_H: f64 = 50e-6;
const MMS_A: f64 = 500.0 / (MMS_R * MMS_R * MMS_H);

fn mms_exact(r: f64, z: f64) -> f64 {
    MMS_T0 + MMS_A * r * r * z
}

/// Max-norm error of the manufactured solution `T0 + A r² z` on an
/// `n × n` grid over the full cylinder (axis included).
pub fn manufactured_error(n: usize) -> f64 {
    let materials = MaterialSet::default();
    let k = materials.silica.conductivity;
    let mut grid = ThermalGrid::uniform(n, n, 0.0, MMS_R, MMS_H, Material::Silica, MMS_T0).unwrap();
    for j in 0..n {
        for i in 0..n {
            let c = grid.idx(i, j);
            // ∇²T* = 4 A z, and the cell average of z is its center value.
            grid.source[c] = -4.0 * k * MMS_A * grid.z_center(j);
        }
    }
    let outer: Vec<f64> = (0..n).map(|j| mms_exact(MMS_R, grid.z_center(j))).collect();
    let bottom: Vec<f64> = (0..n).map(|i| mms_exact(grid.r_center(i), 0.0)).collect();
    let top: Vec<f64> = (0..n).map(|i| mms_exact(grid.r_center(i), MMS_H)).collect();
    let bc = BoundarySpec {
        inner: BoundaryCondition::Free,
        outer: BoundaryCondition::Dirichlet(BoundaryValue::PerCell(outer)),
        bottom: BoundaryCondition::Dirichlet(BoundaryValue::PerCell(bottom)),
        top: BoundaryCondition::Dirichlet(BoundaryValue::PerCell(top)),
        free_surface: FreeSurface::Insulating,
        ambient_k: MMS_T0,
    };
    let settings = SorSettings {
        tol_k: 1e-11,
        ..SorSettings::for_grid(&grid)
    };
    let field = solve_steady_state(grid, &materials, &bc, &settings, None).unwrap();
    let g = &field.grid;
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            worst = worst.max((field.at(i, j) - mms_exact(g.r_center(i), g.z_center(j))).abs());
        }
    }
    worst
}

/// Default thermal geometry: 100 µm disk, 40 µm pillar.
pub fn reflow_geometry() -> CavityGeometry {
    CavityGeometry::new(50e-6, 800e-9, 25e-6, 20e-6).unwrap()
}

/// Disk-on-pillar grid with an arbitrary non-negative source.
pub fn random_source_field(seed: u64, nr: usize, disk_cells: usize) -> TemperatureField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = ThermalGrid::disk_on_pillar(&reflow_geometry(), nr, disk_cells, 300.0).unwrap();
    let fill = rng.random_range(0.05..0.6);
    for c in 0..grid.source.len() {
        if grid.material[c] != Material::Vacuum && rng.random_bool(fill) {
            grid.source[c] = rng.random_range(0.0..1e12);
        }
    }
    let free_surface = if seed.is_multiple_of(2) {
        FreeSurface::Insulating
    } else {
        FreeSurface::Radiative {
            h_w_m2k: rng.random_range(1.0..1e4),
        }
    };
    let bc = BoundarySpec::disk_on_pillar(300.0, free_surface);
    let settings = SorSettings {
        tol_k: 1e-8,
        ..SorSettings::for_grid(&grid)
    };
    solve_steady_state(grid, &MaterialSet::default(), &bc, &settings, None).unwrap()
}

/// With a non-negative source no cell is colder than the fixed boundary
/// temperature and the coldest cell lies on the domain boundary.
pub fn satisfies_maximum_principle(field: &TemperatureField, ambient: f64, slack: f64) -> bool {
    let g = &field.grid;
    let solid = |i: usize, j: usize| g.material[g.idx(i, j)] != Material::Vacuum;
    let on_boundary = |i: usize, j: usize| {
        i == 0
            || j == 0
            || i + 1 == g.nr
            || j + 1 == g.nz
            || !solid(i - 1, j)
            || !solid(i + 1, j)
            || !solid(i, j - 1)
            || !solid(i, j + 1)
    };
    let mut coldest = (f64::INFINITY, 0usize, 0usize);
    for j in 0..g.nz {
        for i in 0..g.nr {
            if solid(i, j) && field.at(i, j) < coldest.0 {
                coldest = (field.at(i, j), i, j);
            }
        }
    }
    coldest.0 >= ambient - slack && on_boundary(coldest.1, coldest.2)
}

/// CO2-laser heated disk with the default beam, solved to `tol_k`.
pub fn laser_field(
    power_w: f64,
    nr: usize,
    disk_cells: usize,
    free_surface: FreeSurface,
    tol_k: f64,
) -> TemperatureField {
    use toroidsim::thermal::{LaserProfile, LaserSource};
    let mut grid = ThermalGrid::disk_on_pillar(&reflow_geometry(), nr, disk_cells, 300.0).unwrap();
    let laser = LaserSource {
        power_w,
        beam_radius_m: 50e-6,
        absorbed_fraction: 0.5,
        profile: LaserProfile::GaussianAnnulus,
        inner_radius_m: 20e-6,
    };
    laser.deposit(&mut grid).unwrap();
    let settings = SorSettings {
        tol_k,
        ..SorSettings::for_grid(&grid)
    };
    let bc = BoundarySpec::disk_on_pillar(300.0, free_surface);
    solve_steady_state(grid, &MaterialSet::default(), &bc, &settings, None).unwrap()
}
