//! Bulk and profile observables of a crowd event, and the statistical
//! (probability) reading of the density.
//!
//! The primary calibration observables are the egress time `T_a` (first
//! instant the cumulative egress reaches the whole crowd) and the
//! chord-uniformity index `delta_rho = (rho_mid - rho_side) / rho_C`
//! sampled at mid-span during the full-walkway regime. That regime is
//! detected automatically as the longest stretch where the in-domain mass
//! `M_t` plateaus.

use crate::mesh::TriMesh;
use crate::transport::DensityField;
use crate::{Error, Result};

/// Mass-closure tolerance for the egress time: the event is over when
/// `G/N >= 1 - EGRESS_MASS_EPS` (the scheme's egress is asymptotic in the
/// leaving-regime tail).
pub const EGRESS_MASS_EPS: f64 = 1e-6;

/// One metrics sample per step.
#[derive(Debug, Clone, Copy)]
pub struct MetricsRecord {
    pub t: f64,
    /// In-domain mass `M`.
    pub domain_mass: f64,
    /// Cumulative egress `G`.
    pub egress: f64,
    /// Reservoir mass `S` (zero when the entrance is disabled).
    pub reservoir: f64,
    /// Buffer mass `I`.
    pub buffer: f64,
    /// Mid-chord density sample at mid-span.
    pub rho_mid: f64,
    /// Wall-side density sample at mid-span (average of both walls).
    pub rho_side: f64,
    /// Peak element density over the walkway.
    pub max_rho: f64,
}

/// Time series of a run plus the mass scale `N`.
#[derive(Debug, Clone, Default)]
pub struct RunMetrics {
    pub records: Vec<MetricsRecord>,
    /// Normalization mass (total pedestrians).
    pub total: f64,
}

/// First time the egress fraction reaches `1 - eps`; `None` if it never
/// does within the series.
pub fn egress_time(times: &[f64], egress: &[f64], total: f64, eps: f64) -> Option<f64> {
    if total <= 0.0 {
        return None;
    }
    times
        .iter()
        .zip(egress)
        .find(|(_, &g)| g / total >= 1.0 - eps)
        .map(|(&t, _)| t)
}

/// Chord-uniformity index.
pub fn delta_rho(rho_mid: f64, rho_side: f64, rho_capacity: f64) -> f64 {
    (rho_mid - rho_side) / rho_capacity
}

impl RunMetrics {
    pub fn new(total: f64) -> Self {
        Self {
            records: Vec::new(),
            total,
        }
    }

    /// Scaled egress time `T_a` (already in units of the crossing time).
    pub fn egress_time(&self) -> Option<f64> {
        let times: Vec<f64> = self.records.iter().map(|r| r.t).collect();
        let egress: Vec<f64> = self.records.iter().map(|r| r.egress).collect();
        egress_time(&times, &egress, self.total, EGRESS_MASS_EPS)
    }

    /// Index window of the full-walkway regime: the longest contiguous
    /// stretch where |dM/dt| stays below 2% of its peak while the walkway
    /// actually holds mass (M above half its peak, which excludes the empty
    /// head and tail of the run).
    pub fn plateau_window(&self) -> Option<(usize, usize)> {
        let n = self.records.len();
        if n < 8 {
            return None;
        }
        let m: Vec<f64> = self.records.iter().map(|r| r.domain_mass).collect();
        let t: Vec<f64> = self.records.iter().map(|r| r.t).collect();
        let m_max = m.iter().cloned().fold(0.0, f64::max);
        if m_max <= 0.0 {
            return None;
        }
        let w = (n / 100).max(2);
        let rate = |i: usize| -> f64 {
            let lo = i.saturating_sub(w);
            let hi = (i + w).min(n - 1);
            (m[hi] - m[lo]) / (t[hi] - t[lo]).max(1e-300)
        };
        let rates: Vec<f64> = (0..n).map(rate).collect();
        let rate_max = rates.iter().map(|r| r.abs()).fold(0.0, f64::max);
        if rate_max <= 0.0 {
            return None;
        }
        let ok = |i: usize| rates[i].abs() <= 0.02 * rate_max && m[i] >= 0.5 * m_max;
        let mut best: Option<(usize, usize)> = None;
        let mut start: Option<usize> = None;
        for i in 0..=n {
            let good = i < n && ok(i);
            match (good, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    let len = i - s;
                    if best.is_none_or(|(bs, be)| len > be - bs) {
                        best = Some((s, i));
                    }
                    start = None;
                }
                _ => {}
            }
        }
        best
    }

    /// Mean chord-uniformity index over the plateau window.
    pub fn delta_rho_plateau(&self, rho_capacity: f64) -> Option<f64> {
        let (lo, hi) = self.plateau_window()?;
        let n = (hi - lo) as f64;
        let sum: f64 = self.records[lo..hi]
            .iter()
            .map(|r| delta_rho(r.rho_mid, r.rho_side, rho_capacity))
            .sum();
        Some(sum / n)
    }

    /// Peak element density observed during the plateau window.
    pub fn max_rho_plateau(&self) -> Option<f64> {
        let (lo, hi) = self.plateau_window()?;
        Some(
            self.records[lo..hi]
                .iter()
                .map(|r| r.max_rho)
                .fold(0.0, f64::max),
        )
    }

    /// Worst relative deviation of `S + I + M + G` from the initial budget.
    pub fn budget_error(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let first = &self.records[0];
        let reference = first.reservoir + first.buffer + first.domain_mass + first.egress;
        if reference <= 0.0 {
            return 0.0;
        }
        self.records
            .iter()
            .map(|r| {
                ((r.reservoir + r.buffer + r.domain_mass + r.egress) - reference).abs() / reference
            })
            .fold(0.0, f64::max)
    }
}

/// Normalize to total mass 1 (probability density of pedestrian positions).
pub fn to_probability_density(rho: &DensityField, mesh: &TriMesh) -> Result<DensityField> {
    let m = rho.mass(mesh);
    if m <= 0.0 {
        return Err(Error::Geometry(
            "cannot normalize a zero-mass density".into(),
        ));
    }
    Ok(rho.scaled(1.0 / m))
}

/// Rescale so the total mass equals `n` (crowd mass density).
pub fn to_mass_density(rho: &DensityField, mesh: &TriMesh, n: f64) -> Result<DensityField> {
    let m = rho.mass(mesh);
    if m <= 0.0 {
        return Err(Error::Geometry(
            "cannot normalize a zero-mass density".into(),
        ));
    }
    Ok(rho.scaled(n / m))
}

/// Expected number of pedestrians inside a union of elements:
/// `(N / total mass) * sum of element masses`.
pub fn expected_count(rho: &DensityField, mesh: &TriMesh, elems: &[usize], n: f64) -> f64 {
    let m = rho.mass(mesh);
    if m <= 0.0 {
        return 0.0;
    }
    let in_region: f64 = elems.iter().map(|&k| rho.values[k] * mesh.areas[k]).sum();
    n / m * in_region
}

/// Sampling locations for the chord-uniformity index: the mid-span element
/// column, with the two most central elements and the two wall-adjacent
/// ones (averaging both walls suppresses mesh asymmetry noise).
#[derive(Debug, Clone)]
pub struct ChordSampler {
    pub mid_elems: Vec<usize>,
    pub side_elems: Vec<usize>,
    pub section_elems: Vec<usize>,
}

impl ChordSampler {
    pub fn at_section(mesh: &TriMesh, section_x: f64) -> Result<Self> {
        let mut dmin = f64::INFINITY;
        for (k, c) in mesh.centroids.iter().enumerate() {
            if !mesh.is_buffer[k] {
                dmin = dmin.min((c.x - section_x).abs());
            }
        }
        if !dmin.is_finite() {
            return Err(Error::Mesh("no domain elements to sample".into()));
        }
        let tol = 1e-9 * mesh.h_max.max(1.0) + 1e-14;
        let mut elems: Vec<usize> = (0..mesh.element_count())
            .filter(|&k| {
                !mesh.is_buffer[k] && (mesh.centroids[k].x - section_x).abs() <= dmin + tol
            })
            .collect();
        elems.sort_by(|&a, &b| {
            mesh.centroids[a]
                .y
                .partial_cmp(&mesh.centroids[b].y)
                .unwrap()
        });
        if elems.len() < 3 {
            return Err(Error::Mesh("chord section too coarse to sample".into()));
        }
        let ys: Vec<f64> = elems.iter().map(|&k| mesh.centroids[k].y).collect();
        let y_center = 0.5 * (ys[0] + ys[ys.len() - 1]);
        let mut by_center: Vec<usize> = elems.clone();
        by_center.sort_by(|&a, &b| {
            (mesh.centroids[a].y - y_center)
                .abs()
                .partial_cmp(&(mesh.centroids[b].y - y_center).abs())
                .unwrap()
        });
        let mid_elems = by_center[..2.min(by_center.len())].to_vec();
        let side_elems = vec![elems[0], elems[elems.len() - 1]];
        Ok(Self {
            mid_elems,
            side_elems,
            section_elems: elems,
        })
    }

    pub fn sample(&self, rho: &DensityField) -> (f64, f64) {
        let mean = |ids: &[usize]| -> f64 {
            ids.iter().map(|&k| rho.values[k]).sum::<f64>() / ids.len() as f64
        };
        (mean(&self.mid_elems), mean(&self.side_elems))
    }

    /// Chord profile `(y, rho)` across the section, bottom wall to top.
    pub fn profile(&self, mesh: &TriMesh, rho: &DensityField) -> Vec<(f64, f64)> {
        self.section_elems
            .iter()
            .map(|&k| (mesh.centroids[k].y, rho.values[k]))
            .collect()
    }
}
