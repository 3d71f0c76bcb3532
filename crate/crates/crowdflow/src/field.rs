//! Desired-velocity fields: normalized potential gradients on walkways.
//!
//! On a rectangle the potential has the closed form `u = -x + q y^2` with
//! `q = tan(theta) / aspect`, giving `v_d = (1, -2qy) / sqrt(1 + 4 q^2 y^2)`.
//! On general walkway shapes the same field is obtained by solving the
//! Poisson problem
//!
//! ```text
//!   lap(u) = 2q                 in the domain
//!   du/dn  = tan(theta) b(x)/B  on the lateral walls
//!   u      = -x_i + q (y-y_c)^2 on the inlet/outlet ends
//! ```
//!
//! with a continuous piecewise-linear Galerkin method. The gradient of a
//! P1 solution is constant per element, so `v_d = -grad(u)/|grad(u)|` is
//! naturally an element field, matching what the transport scheme needs.
//! The parameter `theta` is the desired walking angle at the walls; it
//! controls how strongly the field steers walkers away from the sides.

use crate::geometry::Vec2;
use crate::mesh::{BoundaryLabel, DomainSpec, TriMesh};
use crate::{Error, Result};

/// Gradient magnitudes below this are treated as stationary points; the
/// desired velocity falls back to the longitudinal direction there and the
/// element is recorded for the caller to report.
const GRAD_EPS: f64 = 1e-12;

/// Desired velocity of the closed-form rectangular potential at chord
/// coordinate `y` (|y| up to aspect/2). Unit length by construction.
pub fn rect_desired_velocity(theta: f64, aspect: f64, y: f64) -> Vec2 {
    let q = theta.tan() / aspect;
    let vy = -2.0 * q * y;
    let norm = (1.0 + vy * vy).sqrt();
    Vec2::new(1.0 / norm, vy / norm)
}

#[derive(Debug)]
pub struct PotentialField {
    pub theta: f64,
    /// `tan(theta) / aspect`.
    pub q: f64,
    /// Nodal potential values.
    pub u: Vec<f64>,
    /// Element-constant gradient of `u`.
    pub grad: Vec<Vec2>,
    /// Element-constant unit desired velocity.
    pub v_d: Vec<Vec2>,
    /// Elements where |grad u| fell below the stationary-point threshold
    /// and the longitudinal fallback was used.
    pub degenerate_elems: Vec<usize>,
}

/// Element gradients and normalized desired velocities from nodal values.
/// The normalization makes `v_d` invariant under positive rescaling of `u`.
pub fn velocities_from_potential(mesh: &TriMesh, u: &[f64]) -> (Vec<Vec2>, Vec<Vec2>, Vec<usize>) {
    let mut grad = Vec::with_capacity(mesh.element_count());
    let mut v_d = Vec::with_capacity(mesh.element_count());
    let mut degenerate = Vec::new();
    for (k, t) in mesh.tris.iter().enumerate() {
        let [p0, p1, p2] = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
        let two_a = (p1 - p0).cross(p2 - p0);
        // grad phi_i = (b_i, c_i) / (2A) with b_i = y_j - y_k, c_i = x_k - x_j.
        let b = [p1.y - p2.y, p2.y - p0.y, p0.y - p1.y];
        let c = [p2.x - p1.x, p0.x - p2.x, p1.x - p0.x];
        let mut g = Vec2::ZERO;
        for i in 0..3 {
            g.x += u[t[i]] * b[i] / two_a;
            g.y += u[t[i]] * c[i] / two_a;
        }
        grad.push(g);
        let n = g.norm();
        if n < GRAD_EPS {
            degenerate.push(k);
            v_d.push(Vec2::EX);
        } else {
            v_d.push(Vec2::new(-g.x / n, -g.y / n));
        }
    }
    (grad, v_d, degenerate)
}

fn dirichlet_value(spec: &DomainSpec, q: f64, x_i: f64, y: f64) -> f64 {
    let yc = spec.profile.centerline(x_i);
    -x_i + q * (y - yc) * (y - yc)
}

/// Evaluate the closed-form rectangular field on a mesh. Only valid for
/// rectangle profiles (the buffer extension is still a rectangle).
pub fn closed_form_field(mesh: &TriMesh, spec: &DomainSpec, theta: f64) -> Result<PotentialField> {
    if spec.profile != crate::mesh::ChordProfile::Rectangle {
        return Err(Error::Solve(
            "closed-form potential is only available on rectangular walkways".into(),
        ));
    }
    let q = theta.tan() / spec.aspect;
    let u: Vec<f64> = mesh.nodes.iter().map(|p| -p.x + q * p.y * p.y).collect();
    let mut grad = Vec::with_capacity(mesh.element_count());
    let mut v_d = Vec::with_capacity(mesh.element_count());
    for c in &mesh.centroids {
        grad.push(Vec2::new(-1.0, 2.0 * q * c.y));
        v_d.push(rect_desired_velocity(theta, spec.aspect, c.y));
    }
    Ok(PotentialField {
        theta,
        q,
        u,
        grad,
        v_d,
        degenerate_elems: Vec::new(),
    })
}

/// Solve the mixed Dirichlet-Neumann Poisson problem for the potential and
/// derive the per-element desired velocity.
pub fn solve_potential(mesh: &TriMesh, spec: &DomainSpec, theta: f64) -> Result<PotentialField> {
    let nn = mesh.nodes.len();
    let q = theta.tan() / spec.aspect;

    // Dirichlet nodes: ends of the walkway, pinned to the closed-form data.
    let mut dirichlet: Vec<Option<f64>> = vec![None; nn];
    let mut have_dirichlet = false;
    let mut have_wall = false;
    for e in &mesh.boundary {
        match e.label {
            BoundaryLabel::Inlet | BoundaryLabel::Outlet => {
                for &n in &e.nodes {
                    let p = mesh.nodes[n];
                    dirichlet[n] = Some(dirichlet_value(spec, q, p.x, p.y));
                }
                have_dirichlet = true;
            }
            BoundaryLabel::Wall => have_wall = true,
        }
    }
    if !have_dirichlet {
        return Err(Error::Solve(
            "no inlet/outlet boundary: the potential problem is singular".into(),
        ));
    }
    if !have_wall {
        return Err(Error::Solve("mesh has no wall boundary".into()));
    }

    // Assemble the P1 stiffness matrix and load vector.
    use std::collections::HashMap;
    let mut entries: HashMap<(usize, usize), f64> = HashMap::new();
    let mut rhs = vec![0.0; nn];
    for t in &mesh.tris {
        let [p0, p1, p2] = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
        let two_a = (p1 - p0).cross(p2 - p0);
        let area = 0.5 * two_a;
        let b = [p1.y - p2.y, p2.y - p0.y, p0.y - p1.y];
        let c = [p2.x - p1.x, p0.x - p2.x, p1.x - p0.x];
        for i in 0..3 {
            // Volume source: integral of 2q * phi_i.
            rhs[t[i]] -= 2.0 * q * area / 3.0;
            for j in 0..3 {
                let k = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
                *entries.entry((t[i], t[j])).or_insert(0.0) += k;
            }
        }
    }
    // Neumann data on walls, with the chord ratio at edge midpoints.
    for e in &mesh.boundary {
        if e.label == BoundaryLabel::Wall {
            let g = theta.tan() * spec.profile.chord_ratio(e.midpoint.x);
            for &n in &e.nodes {
                rhs[n] += g * e.length / 2.0;
            }
        }
    }

    // Reduce to the free nodes (strong Dirichlet elimination).
    let free_id: Vec<Option<usize>> = {
        let mut next = 0;
        dirichlet
            .iter()
            .map(|d| {
                if d.is_none() {
                    let id = next;
                    next += 1;
                    Some(id)
                } else {
                    None
                }
            })
            .collect()
    };
    let nfree = free_id.iter().filter(|f| f.is_some()).count();
    let mut reduced_rhs = vec![0.0; nfree];
    for (n, d) in dirichlet.iter().enumerate() {
        if d.is_none() {
            reduced_rhs[free_id[n].unwrap()] = rhs[n];
        }
    }
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (&(i, j), &v) in &entries {
        match (free_id[i], dirichlet[j]) {
            (Some(fi), None) => triplets.push((fi, free_id[j].unwrap(), v)),
            (Some(fi), Some(uj)) => reduced_rhs[fi] -= v * uj,
            (None, _) => {}
        }
    }
    triplets.sort_unstable_by_key(|a| (a.0, a.1));
    let csr = Csr::from_sorted_triplets(nfree, &triplets);

    let solution = conjugate_gradient(&csr, &reduced_rhs, 1e-10, 40 * nfree.max(100))?;

    let mut u = vec![0.0; nn];
    for n in 0..nn {
        u[n] = match dirichlet[n] {
            Some(v) => v,
            None => solution[free_id[n].unwrap()],
        };
    }
    let (grad, v_d, degenerate_elems) = velocities_from_potential(mesh, &u);
    Ok(PotentialField {
        theta,
        q,
        u,
        grad,
        v_d,
        degenerate_elems,
    })
}

struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl Csr {
    fn from_sorted_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        let mut diag = vec![0.0; n];
        for &(i, j, v) in triplets {
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
            if i == j {
                diag[i] += v;
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            row_ptr,
            cols,
            vals,
            diag,
        }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *o = s;
        }
    }
}

/// Jacobi-preconditioned conjugate gradients; the matrix is SPD after the
/// strong Dirichlet elimination.
fn conjugate_gradient(a: &Csr, b: &[f64], rtol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a
        .diag
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::Solve("matrix is not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= rtol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solve(format!(
        "conjugate gradients did not reach rtol {rtol} in {max_iter} iterations"
    )))
}

#[derive(Debug, Clone, Copy)]
pub struct AngleSample {
    pub y: f64,
    /// Angle between the desired velocity and the longitudinal axis.
    pub gamma: f64,
    /// Interpolated wall inclination angle at this chord position.
    pub alpha_i: f64,
    /// `gamma - alpha_i`.
    pub beta: f64,
}

#[derive(Debug)]
pub struct AngleDiagnostics {
    pub section_x: f64,
    /// Chord endpoints used by the interpolation (top wall, bottom wall).
    pub y_1: f64,
    pub y_2: f64,
    pub samples: Vec<AngleSample>,
}

/// Interpolation that extends the geometric wall angles `alpha_1` (at `y_1`)
/// and `alpha_2` (at `y_2`) across the chord.
pub fn interpolated_wall_angle(alpha_1: f64, alpha_2: f64, y: f64, y_1: f64, y_2: f64) -> f64 {
    (alpha_1 * (y - y_2) / (y_1 - y_2) - alpha_2 * (y - y_1) / (y_2 - y_1)).abs()
}

/// Sample gamma, the interpolated wall angle, and their difference along the
/// chord section nearest `section_x`.
pub fn angle_diagnostics(
    field: &PotentialField,
    mesh: &TriMesh,
    alpha_1: f64,
    alpha_2: f64,
    section_x: f64,
) -> Result<AngleDiagnostics> {
    // Pick the set of elements whose centroids share the x-offset closest to
    // the requested section (one chord-wise file of triangles).
    let mut dmin = f64::INFINITY;
    for c in &mesh.centroids {
        dmin = dmin.min((c.x - section_x).abs());
    }
    let tol = 1e-9 * mesh.h_max.max(1.0) + 1e-14;
    let mut elems: Vec<usize> = (0..mesh.element_count())
        .filter(|&k| (mesh.centroids[k].x - section_x).abs() <= dmin + tol)
        .collect();
    elems.sort_by(|&a, &b| {
        mesh.centroids[a]
            .y
            .partial_cmp(&mesh.centroids[b].y)
            .unwrap()
    });
    if elems.is_empty() {
        return Err(Error::Mesh("empty chord section".into()));
    }

    // Chord endpoints from the nodes of the selected elements.
    let mut y_top = f64::NEG_INFINITY;
    let mut y_bot = f64::INFINITY;
    for &k in &elems {
        for &n in &mesh.tris[k] {
            y_top = y_top.max(mesh.nodes[n].y);
            y_bot = y_bot.min(mesh.nodes[n].y);
        }
    }
    if !((y_top - y_bot).abs() > 1e-14) {
        return Err(Error::Mesh("degenerate chord section".into()));
    }

    let samples = elems
        .iter()
        .map(|&k| {
            let v = field.v_d[k];
            let gamma = v.x.clamp(-1.0, 1.0).acos();
            let y = mesh.centroids[k].y;
            let alpha_i = interpolated_wall_angle(alpha_1, alpha_2, y, y_top, y_bot);
            AngleSample {
                y,
                gamma,
                alpha_i,
                beta: gamma - alpha_i,
            }
        })
        .collect();

    Ok(AngleDiagnostics {
        section_x,
        y_1: y_top,
        y_2: y_bot,
        samples,
    })
}
