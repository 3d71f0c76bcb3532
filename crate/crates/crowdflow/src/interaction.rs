//! Nonlocal interaction velocity from the repulsion kernel.
//!
//! Each element perceives the crowding inside a frontal circular sector
//! oriented along its desired velocity and reacts with a repulsive velocity
//!
//! ```text
//!   v_i(x_k) = -c * sum_{j != k, x_j in sector} rho_j |E_j| e_r / max(r, r_min)
//! ```
//!
//! a midpoint-rule quadrature of the kernel integral: each element
//! contributes all of its mass at its centroid, with all-or-nothing sector
//! membership. The 1/r weight is clamped at `r_min` (half the smallest
//! element size by default) so the kernel singularity is never sampled
//! below the mesh resolution. The sector is oriented along the desired
//! velocity, not the total one, which avoids a fixed-point iteration in
//! the velocity update.

use rayon::prelude::*;

use crate::geometry::Vec2;
use crate::mesh::{SpatialGrid, TriMesh};
use crate::transport::DensityField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct InteractionParams {
    /// Repulsion strength (dimensionless).
    pub strength: f64,
    /// Sensory radius, scaled units.
    pub radius: f64,
    /// Sector half-angle, radians.
    pub half_angle: f64,
    /// Inter-centroid distances are clamped below this before the 1/r
    /// weight is applied.
    pub r_min: f64,
}

impl InteractionParams {
    pub fn new(strength: f64, radius: f64, half_angle: f64, r_min: f64) -> Result<Self> {
        if strength < 0.0 {
            return Err(Error::Geometry("repulsion strength must be >= 0".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::Geometry("sensory radius must be positive".into()));
        }
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Geometry(
                "sector half-angle must lie in (0, pi/2)".into(),
            ));
        }
        if !(r_min > 0.0) {
            return Err(Error::Geometry("r_min must be positive".into()));
        }
        Ok(Self {
            strength,
            radius,
            half_angle,
            r_min,
        })
    }
}

/// Interaction velocity perceived by element `k`. The sector heading is the
/// element's desired velocity; contributions are summed in element order so
/// the result does not depend on thread count.
pub fn interaction_velocity(
    k: usize,
    mesh: &TriMesh,
    grid: &SpatialGrid,
    rho: &DensityField,
    v_d: &[Vec2],
    params: &InteractionParams,
) -> Vec2 {
    let center = mesh.centroids[k];
    let heading = v_d[k];
    let cos_alpha = params.half_angle.cos();
    let mut v = Vec2::ZERO;
    for j in mesh.radius_query(grid, center, params.radius) {
        if j == k {
            continue;
        }
        let m = rho.values[j] * mesh.areas[j];
        if m <= 0.0 {
            continue;
        }
        let d = mesh.centroids[j] - center;
        let r = d.norm();
        if r <= 0.0 || r >= params.radius {
            continue;
        }
        let e_r = Vec2::new(d.x / r, d.y / r);
        if heading.dot(e_r) <= cos_alpha {
            continue;
        }
        let w = params.strength * m / r.max(params.r_min);
        v.x -= w * e_r.x;
        v.y -= w * e_r.y;
    }
    v
}

/// Total velocity field `w = v_d + v_i[rho]`, before wall correction.
pub fn total_velocity(
    mesh: &TriMesh,
    grid: &SpatialGrid,
    rho: &DensityField,
    v_d: &[Vec2],
    params: &InteractionParams,
) -> Vec<Vec2> {
    if params.strength == 0.0 {
        return v_d.to_vec();
    }
    (0..mesh.element_count())
        .into_par_iter()
        .map(|k| v_d[k] + interaction_velocity(k, mesh, grid, rho, v_d, params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, DomainSpec};

    fn wide_mesh(nx: usize, ny: usize, aspect: f64) -> (TriMesh, SpatialGrid) {
        let spec = DomainSpec::rectangle(aspect);
        let mesh = generate_structured(&spec, nx, ny, 0).unwrap();
        let grid = SpatialGrid::new(&mesh.centroids, 0.02);
        (mesh, grid)
    }

    fn params(c: f64, mesh: &TriMesh) -> InteractionParams {
        InteractionParams::new(c, 0.02, std::f64::consts::FRAC_PI_4, mesh.h_min / 2.0).unwrap()
    }

    #[test]
    fn empty_density_gives_zero() {
        let (mesh, grid) = wide_mesh(100, 8, 0.08);
        let rho = DensityField::zeros(mesh.element_count());
        let v_d = vec![Vec2::EX; mesh.element_count()];
        let p = params(1.0, &mesh);
        for k in [0, 57, mesh.element_count() - 1] {
            assert_eq!(
                interaction_velocity(k, &mesh, &grid, &rho, &v_d, &p),
                Vec2::ZERO
            );
        }
    }

    #[test]
    fn single_contributor_directly_ahead() {
        let (mesh, grid) = wide_mesh(100, 8, 0.08);
        let p = params(3e-4, &mesh);
        let v_d = vec![Vec2::EX; mesh.element_count()];
        // Evaluation element near the center.
        let k = mesh
            .centroids
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da = (a.x - 0.5).abs() + a.y.abs();
                let db = (b.x - 0.5).abs() + b.y.abs();
                da.partial_cmp(&db).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        let ck = mesh.centroids[k];
        // Single occupied element roughly R/2 ahead.
        let j = mesh
            .centroids
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da = (a.x - (ck.x + 0.01)).abs() + (a.y - ck.y).abs();
                let db = (b.x - (ck.x + 0.01)).abs() + (b.y - ck.y).abs();
                da.partial_cmp(&db).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        let mut rho = DensityField::zeros(mesh.element_count());
        rho.values[j] = 7.0;
        let got = interaction_velocity(k, &mesh, &grid, &rho, &v_d, &p);
        let d = mesh.centroids[j] - ck;
        let r = d.norm();
        let e_r = Vec2::new(d.x / r, d.y / r);
        let scale = p.strength * 7.0 * mesh.areas[j] / r.max(p.r_min);
        let want = Vec2::new(-scale * e_r.x, -scale * e_r.y);
        assert!((got - want).norm() < 1e-18, "{got:?} vs {want:?}");
        // The push opposes the heading.
        assert!(got.x < 0.0);
    }

    /// Composite Simpson quadrature of the kernel over the sector in polar
    /// coordinates; the independent oracle for the uniform-density case.
    fn polar_quadrature_oracle(c: f64, rho: f64, radius: f64, alpha: f64, r_min: f64) -> Vec2 {
        let nr = 2000;
        let np = 2000;
        let simpson_weight = |i: usize, n: usize| -> f64 {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let hr = radius / nr as f64;
        let hp = 2.0 * alpha / np as f64;
        let mut v = Vec2::ZERO;
        for i in 0..=nr {
            let r = i as f64 * hr;
            let wr = simpson_weight(i, nr);
            let radial = r / r.max(r_min); // integrand r * (1/max(r, r_min))
            for jp in 0..=np {
                let phi = -alpha + jp as f64 * hp;
                let wp = simpson_weight(jp, np);
                let w = wr * wp * radial;
                v.x -= w * phi.cos();
                v.y -= w * phi.sin();
            }
        }
        v.scale(c * rho * hr * hp / 9.0)
    }

    /// The centroid rule excludes the evaluation element itself and decides
    /// sector membership all-or-nothing, which costs a systematic couple of
    /// percent against the continuum kernel integral; the error shrinks
    /// under refinement but carries grid-alignment jitter. Measured on this
    /// configuration: 2.8% at h = R/20, 1.3% at h = R/80.
    #[test]
    fn uniform_sector_matches_polar_quadrature() {
        let radius = 0.02f64;
        let c = 5e-4;
        let rho_val = 13.0;
        for (div, tol) in [(20usize, 0.04), (80, 0.02)] {
            let h = radius / div as f64;
            let nx = (1.0 / h).round() as usize;
            let ny = (0.08 / h).round() as usize;
            let (mesh, grid) = wide_mesh(nx, ny, 0.08);
            let p = params(c, &mesh);
            let v_d = vec![Vec2::EX; mesh.element_count()];
            let rho = DensityField::from_values(vec![rho_val; mesh.element_count()]);
            let k = mesh
                .centroids
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    let da = (a.x - 0.5).abs() + a.y.abs();
                    let db = (b.x - 0.5).abs() + b.y.abs();
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            let got = interaction_velocity(k, &mesh, &grid, &rho, &v_d, &p);
            let want = polar_quadrature_oracle(c, rho_val, p.radius, p.half_angle, p.r_min);
            let rel = (got.norm() - want.norm()).abs() / want.norm();
            assert!(
                rel < tol,
                "h = R/{div}: magnitude off by {rel}: {got:?} vs {want:?}"
            );
            // Lateral component vanishes by symmetry (up to quadrature noise).
            assert!(got.y.abs() < 0.02 * got.norm(), "lateral {}", got.y);
        }
    }

    #[test]
    fn zero_strength_total_velocity_is_desired() {
        let (mesh, grid) = wide_mesh(50, 4, 0.04);
        let rho = DensityField::from_values(vec![3.0; mesh.element_count()]);
        let v_d: Vec<Vec2> = mesh
            .centroids
            .iter()
            .map(|c| Vec2::new(1.0, 0.1 * c.y).normalized())
            .collect();
        let p = params(0.0, &mesh);
        let w = total_velocity(&mesh, &grid, &rho, &v_d, &p);
        assert_eq!(w, v_d);
    }

    #[test]
    fn linear_in_density() {
        let (mesh, grid) = wide_mesh(80, 8, 0.08);
        let p = params(2e-4, &mesh);
        let v_d = vec![Vec2::EX; mesh.element_count()];
        let mut seed = 11u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let r1 = DensityField::from_values((0..mesh.element_count()).map(|_| next()).collect());
        let r2 = DensityField::from_values((0..mesh.element_count()).map(|_| next()).collect());
        let (a, b) = (2.0, 0.625); // powers of two keep the scaling exact
        let combo = DensityField::from_values(
            r1.values
                .iter()
                .zip(&r2.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        );
        for k in [100, 500, 900] {
            let v1 = interaction_velocity(k, &mesh, &grid, &r1, &v_d, &p);
            let v2 = interaction_velocity(k, &mesh, &grid, &r2, &v_d, &p);
            let vc = interaction_velocity(k, &mesh, &grid, &combo, &v_d, &p);
            let expect = Vec2::new(a * v1.x + b * v2.x, a * v1.y + b * v2.y);
            let scale = vc.norm().max(1e-30);
            assert!((vc - expect).norm() / scale < 1e-13);
        }
        // Doubling the density doubles the velocity exactly.
        let twice = r1.scaled(2.0);
        for k in [123, 456] {
            let v1 = interaction_velocity(k, &mesh, &grid, &r1, &v_d, &p);
            let v2 = interaction_velocity(k, &mesh, &grid, &twice, &v_d, &p);
            assert_eq!(Vec2::new(2.0 * v1.x, 2.0 * v1.y), v2);
        }
    }

    #[test]
    fn frontal_mass_always_brakes() {
        let (mesh, grid) = wide_mesh(80, 8, 0.08);
        let p = params(1e-3, &mesh);
        let v_d: Vec<Vec2> = mesh
            .centroids
            .iter()
            .map(|c| Vec2::new(1.0, 0.3 * (9.0 * c.x).sin()).normalized())
            .collect();
        let mut seed = 3u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let rho =
            DensityField::from_values((0..mesh.element_count()).map(|_| next() * 5.0).collect());
        for k in (0..mesh.element_count()).step_by(97) {
            let vi = interaction_velocity(k, &mesh, &grid, &rho, &v_d, &p);
            // Every contributor is frontal, so each term opposes the heading.
            assert!(vi.dot(v_d[k]) <= 0.0, "element {k}: {}", vi.dot(v_d[k]));
        }
    }

    #[test]
    fn masking_outside_sector_changes_nothing() {
        let (mesh, grid) = wide_mesh(80, 8, 0.08);
        let p = params(4e-4, &mesh);
        let v_d = vec![Vec2::EX; mesh.element_count()];
        let mut seed = 17u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let rho = DensityField::from_values((0..mesh.element_count()).map(|_| next()).collect());
        let k = 777;
        let center = mesh.centroids[k];
        let sector = crate::geometry::Sector::new(center, v_d[k], p.radius, p.half_angle).unwrap();
        let masked = DensityField::from_values(
            rho.values
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    if sector.contains(mesh.centroids[j]) {
                        v
                    } else {
                        0.0
                    }
                })
                .collect(),
        );
        let a = interaction_velocity(k, &mesh, &grid, &rho, &v_d, &p);
        let b = interaction_velocity(k, &mesh, &grid, &masked, &v_d, &p);
        assert_eq!(a, b);
    }
}
