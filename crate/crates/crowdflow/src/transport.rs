//! Push-forward finite-volume transport of the crowd density.
//!
//! One step translates every element rigidly by its velocity times the time
//! step and redistributes its mass onto the elements its translate overlaps:
//!
//! ```text
//!   rho_q(n+1) = 1/|E_q| * sum_k rho_k(n) * |translate(E_k, w_k dt) ^ E_q|
//! ```
//!
//! The weights are nonnegative and, for translates fully covered by the
//! mesh, sum to the source area, so the scheme preserves nonnegativity and
//! conserves mass locally. Mass crossing the outlet line is accumulated as
//! egress and removed from the domain; mass that would cross a wall is
//! prevented from doing so by correcting the velocity first (scrape or stop
//! condition), and any residual exterior overlap left by corner cases is
//! returned to the source element so the budget closes exactly.

use rayon::prelude::*;

use crate::geometry::{
    area_beyond_halfplane, clip_to_halfplane, convex_intersection, translate, Point2, Polygon2,
    Vec2,
};
use crate::mesh::{BoundaryLabel, SpatialGrid, TriMesh};
use crate::{Error, Result};

/// Pairwise (tree) summation: rounding stays at the few-ulp level even for
/// long mass reductions, which the conservation checks rely on.
pub(crate) fn pairwise_sum(v: &mut Vec<f64>) -> f64 {
    while v.len() > 1 {
        let half = v.len() / 2;
        for i in 0..half {
            v[i] = v[2 * i] + v[2 * i + 1];
        }
        if v.len() % 2 == 1 {
            let last = *v.last().unwrap();
            v[half] = last;
            v.truncate(half + 1);
        } else {
            v.truncate(half);
        }
    }
    v.first().copied().unwrap_or(0.0)
}

/// Piecewise-constant nonnegative density over mesh elements, in pedestrian
/// units per scaled area.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn mass(&self, mesh: &TriMesh) -> f64 {
        let mut terms: Vec<f64> = self
            .values
            .iter()
            .zip(&mesh.areas)
            .map(|(r, a)| r * a)
            .collect();
        pairwise_sum(&mut terms)
    }

    /// Mass over the walkway proper (excludes the entering region).
    pub fn domain_mass(&self, mesh: &TriMesh) -> f64 {
        let mut terms: Vec<f64> = self
            .values
            .iter()
            .zip(&mesh.areas)
            .enumerate()
            .filter(|(k, _)| !mesh.is_buffer[*k])
            .map(|(_, (r, a))| r * a)
            .collect();
        pairwise_sum(&mut terms)
    }

    pub fn buffer_mass(&self, mesh: &TriMesh) -> f64 {
        let mut terms: Vec<f64> = mesh
            .buffer_elems
            .iter()
            .map(|&k| self.values[k] * mesh.areas[k])
            .collect();
        pairwise_sum(&mut terms)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Behavioral rule for velocities that point out of the domain at walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallMode {
    /// Remove the outward normal component (frictionless sliding).
    Scrape,
    /// Zero the velocity entirely (no-slip).
    Stop,
}

/// Apply the wall condition to a velocity against outward unit normal `n`.
/// Velocities without an outward component pass through unchanged.
pub fn wall_correct(w: Vec2, n: Vec2, mode: WallMode) -> Vec2 {
    let wn = w.dot(n);
    if wn <= 0.0 {
        return w;
    }
    match mode {
        WallMode::Scrape => w - n.scale(wn),
        WallMode::Stop => Vec2::ZERO,
    }
}

/// Largest stable time step: the fastest element must not travel further
/// than the smallest element size, shrunk by `safety`.
pub fn stable_dt(mesh: &TriMesh, w: &[Vec2], safety: f64, dt_max: f64) -> f64 {
    let wmax = w.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if wmax <= 1e-300 {
        dt_max
    } else {
        (safety * mesh.h_min / wmax).min(dt_max)
    }
}

#[derive(Debug, Clone, Copy)]
struct OutletPlane {
    origin: Point2,
    normal: Vec2,
}

/// Transport engine bound to one mesh and boundary policy.
#[derive(Debug)]
pub struct Transport {
    pub mode: WallMode,
    pub sealed_outlet: bool,
    outlet: Option<OutletPlane>,
}

struct SourceScatter {
    rho: f64,
    egress_area: f64,
    overlaps: Vec<(u32, f64)>,
    residual: f64,
    source: u32,
}

impl Transport {
    pub fn new(mesh: &TriMesh, mode: WallMode, sealed_outlet: bool) -> Result<Self> {
        let outlet = if sealed_outlet {
            None
        } else {
            let edges: Vec<_> = mesh
                .boundary
                .iter()
                .filter(|e| e.label == BoundaryLabel::Outlet)
                .collect();
            if edges.is_empty() {
                None
            } else {
                // All outlet edges must be collinear so a single half-plane
                // describes the egress region.
                let origin = edges[0].midpoint;
                let normal = edges[0].normal;
                let tol = 1e-9 * mesh.h_max.max(1e-9);
                for e in &edges {
                    for &n in &e.nodes {
                        let d = (mesh.nodes[n] - origin).dot(normal).abs();
                        if d > tol {
                            return Err(Error::Mesh(
                                "outlet edges are not collinear; cannot form the egress half-plane"
                                    .into(),
                            ));
                        }
                    }
                }
                Some(OutletPlane { origin, normal })
            }
        };
        Ok(Self {
            mode,
            sealed_outlet,
            outlet,
        })
    }

    fn edge_blocks(&self, label: BoundaryLabel) -> bool {
        match label {
            BoundaryLabel::Wall => true,
            // Nothing may leave upstream through the inlet end.
            BoundaryLabel::Inlet => true,
            BoundaryLabel::Outlet => self.sealed_outlet,
        }
    }

    /// Apply wall conditions to every element whose translated polygon
    /// would cross a blocking boundary edge. Corners may need the combined
    /// correction of two edges, hence the fixed-point passes.
    pub fn correct_velocities(&self, mesh: &TriMesh, w: &mut [Vec2], dt: f64) {
        for (k, wk) in w.iter_mut().enumerate() {
            let edges = &mesh.nearby_boundary[k];
            if edges.is_empty() {
                continue;
            }
            let t = mesh.tris[k];
            let verts = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
            for _pass in 0..3 {
                let mut changed = false;
                for &eid in edges.iter() {
                    let edge = &mesh.boundary[eid as usize];
                    if !self.edge_blocks(edge.label) {
                        continue;
                    }
                    if wk.dot(edge.normal) <= 0.0 {
                        continue;
                    }
                    let shift = wk.scale(dt);
                    let crosses = verts
                        .iter()
                        .any(|&v| (v + shift - edge.midpoint).dot(edge.normal) > 1e-15);
                    if crosses {
                        *wk = wall_correct(*wk, edge.normal, self.mode);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }

    /// Advance the density one step. Returns the new density and the mass
    /// that left through the outlet.
    ///
    /// Accuracy wants `dt <= stable_dt` (the run loop enforces that); the
    /// structural limit checked here is weaker: translates must stay within
    /// the wall-handling reach recorded on each element, which admits the
    /// exact one-cell-pitch translation on structured meshes.
    pub fn step(
        &self,
        mesh: &TriMesh,
        grid: &SpatialGrid,
        rho: &DensityField,
        w: &[Vec2],
        dt: f64,
    ) -> Result<(DensityField, f64)> {
        let wmax = w.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let shift_limit = mesh.max_circumradius + 2.0 * mesh.h_max;
        if dt * wmax > shift_limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation {
                dt,
                limit: shift_limit / wmax,
            });
        }

        let search_radius = 2.0 * mesh.max_circumradius * (1.0 + 1e-12) + 1e-300;
        let scatters: Vec<SourceScatter> = (0..mesh.element_count())
            .into_par_iter()
            .filter_map(|k| {
                let rho_k = rho.values[k];
                if rho_k <= 0.0 {
                    return None;
                }
                let shift = w[k].scale(dt);
                let tri = translate(&mesh.element_polygon(k), shift);
                let area_k = mesh.areas[k];

                let mut egress_area = 0.0;
                let mut inside: Option<Polygon2> = Some(tri);
                if let Some(outlet) = &self.outlet {
                    let t = inside.take().unwrap();
                    egress_area = area_beyond_halfplane(&t, outlet.origin, outlet.normal);
                    if egress_area > 0.0 {
                        inside = clip_to_halfplane(&t, outlet.origin, outlet.normal);
                    } else {
                        inside = Some(t);
                    }
                }

                let mut overlaps = Vec::new();
                let mut covered = egress_area;
                if let Some(t_in) = &inside {
                    let center = mesh.centroids[k] + shift;
                    for q in grid.radius_query_points(&mesh.centroids, center, search_radius) {
                        if let Some(cap) = convex_intersection(t_in, &mesh.element_polygon(q)) {
                            let a = cap.area();
                            covered += a;
                            overlaps.push((q as u32, a));
                        }
                    }
                }
                let residual = (area_k - covered).max(0.0);
                Some(SourceScatter {
                    rho: rho_k,
                    egress_area,
                    overlaps,
                    residual,
                    source: k as u32,
                })
            })
            .collect();

        // Sequential merge in source order: bitwise-deterministic for any
        // thread count. The weight a/|E_q| is exactly 1 for a full overlap,
        // so a zero-velocity step reproduces the density bit for bit.
        let mut values = vec![0.0; mesh.element_count()];
        let mut egress = 0.0;
        for s in &scatters {
            for &(q, a) in &s.overlaps {
                values[q as usize] += s.rho * (a / mesh.areas[q as usize]);
            }
            if s.residual > 0.0 {
                let k = s.source as usize;
                values[k] += s.rho * (s.residual / mesh.areas[k]);
            }
            egress += s.rho * s.egress_area;
        }
        Ok((DensityField::from_values(values), egress))
    }
}
