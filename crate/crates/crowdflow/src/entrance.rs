//! Reservoir -> buffer -> walkway arrival process.
//!
//! Pedestrians who have not yet appeared wait in a zero-dimensional
//! reservoir holding mass `S`. They appear in the entering region (a meshed
//! buffer strip upstream of the inlet) at the rate
//!
//! ```text
//!   f = sigma(S) * (1 - I/C),    sigma(S) = F * min(S/(N p), 1)
//! ```
//!
//! so the inflow is constant while the queue lasts, fades out smoothly as
//! the reservoir empties, and throttles (or reverses) as the buffer
//! approaches its capacity `C`. After every transport step the buffer mass
//! is re-measured, topped up by `dt * f`, and redistributed uniformly over
//! the entering region, overwriting the transported buffer densities.
//!
//! `f` is the emptying rate of the reservoir: `S_{n+1} = S_n - dt * f`.
//! The buffer update is equivalent to charging the buffer for the net mass
//! the walkway gained (including what already egressed); explicit Euler can
//! overshoot either store below zero, in which case the deficit is moved
//! back conservatively so the global budget still closes.

use crate::mesh::TriMesh;
use crate::transport::DensityField;
use crate::{Error, Result};

/// Ideal reservoir outflow rate: constant `F` while `S/N >= p`, then a
/// linear fade to zero.
pub fn sigma(s: f64, inflow_rate: f64, fadeout_ratio: f64, total: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let ratio = s / total;
    if ratio < fadeout_ratio {
        inflow_rate * ratio / fadeout_ratio
    } else {
        inflow_rate
    }
}

#[derive(Debug, Clone)]
pub struct EntranceState {
    /// Mass still waiting to appear.
    pub reservoir: f64,
    /// Buffer mass as of the last overwrite.
    pub buffer_mass: f64,
    /// Buffer capacity `C = rho_C * |region|`.
    pub capacity: f64,
    /// Ideal inflow rate `F` (mass per scaled time).
    pub inflow_rate: f64,
    /// Fade-out ratio `p` in (0, 1).
    pub fadeout_ratio: f64,
    /// Total arrivals `N` (mass units).
    pub total: f64,
    /// Walkway mass (including egress) after the previous step.
    pub phi_prev: f64,
    /// Area of the entering region.
    pub region_area: f64,
    /// Times a negative overshoot had to be clamped.
    pub clamp_events: u64,
}

impl EntranceState {
    pub fn new(
        mesh: &TriMesh,
        total: f64,
        inflow_rate: f64,
        fadeout_ratio: f64,
        capacity_density: f64,
    ) -> Result<Self> {
        let region_area = mesh.buffer_area();
        if !(region_area > 0.0) {
            return Err(Error::Mesh(
                "entrance requires a buffer region with positive area".into(),
            ));
        }
        if !(fadeout_ratio > 0.0 && fadeout_ratio < 1.0) {
            return Err(Error::InvalidConfig {
                issues: vec![format!(
                    "entrance fade-out ratio must lie in (0, 1), got {fadeout_ratio}"
                )],
            });
        }
        if !(capacity_density > 0.0) {
            return Err(Error::InvalidConfig {
                issues: vec!["capacity density must be positive".into()],
            });
        }
        Ok(Self {
            reservoir: total,
            buffer_mass: 0.0,
            capacity: capacity_density * region_area,
            inflow_rate,
            fadeout_ratio,
            total,
            phi_prev: 0.0,
            region_area,
            clamp_events: 0,
        })
    }

    /// Record the walkway mass (plus egress) the balance identity starts
    /// from. Call once after the initial density is in place.
    pub fn reset_phi(&mut self, mesh: &TriMesh, rho: &DensityField, egress_total: f64) {
        self.phi_prev = rho.domain_mass(mesh) + egress_total;
        self.buffer_mass = rho.buffer_mass(mesh);
    }

    /// Arrival rate into the buffer given its measured mass; negative when
    /// the buffer is over capacity (reverse flux into the reservoir).
    pub fn arrival_rate(&self, buffer_mass: f64) -> f64 {
        sigma(
            self.reservoir,
            self.inflow_rate,
            self.fadeout_ratio,
            self.total,
        ) * (1.0 - buffer_mass / self.capacity)
    }

    /// Advance the arrival process one step. `rho` is the post-transport
    /// density on the extended domain; `egress_total` the cumulative mass
    /// that has left through the outlet. The buffer densities are
    /// overwritten with the uniform redistribution of the new buffer mass.
    pub fn step(&mut self, mesh: &TriMesh, rho: &mut DensityField, dt: f64, egress_total: f64) {
        let i_measured = rho.buffer_mass(mesh);
        let phi_now = rho.domain_mass(mesh) + egress_total;
        let f = self.arrival_rate(i_measured);

        let mut s_new = self.reservoir - dt * f;
        let mut i_new = i_measured + dt * f;
        // Same update through the walkway-mass balance; the two agree up to
        // rounding because phi_now - phi_prev is exactly the buffer's loss.
        debug_assert!(
            (self.buffer_mass + dt * f - (phi_now - self.phi_prev) - i_new).abs()
                <= 1e-9 * self.total.max(1.0)
        );

        // Conservative clamps: an overshoot below zero is paid back by the
        // other store, so S + I is untouched (S and I are both nonnegative
        // going in, hence their sum covers either deficit).
        if i_new < 0.0 {
            s_new += i_new;
            i_new = 0.0;
            self.clamp_events += 1;
        }
        if s_new < 0.0 {
            i_new = (i_new + s_new).max(0.0);
            s_new = 0.0;
            self.clamp_events += 1;
        }

        let uniform = i_new / self.region_area;
        for &k in &mesh.buffer_elems {
            rho.values[k] = uniform;
        }
        self.reservoir = s_new;
        self.buffer_mass = i_new;
        self.phi_prev = phi_now;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, DomainSpec};

    fn buffered_mesh() -> TriMesh {
        let spec = DomainSpec {
            aspect: 0.04,
            profile: crate::mesh::ChordProfile::Rectangle,
            buffer_depth: 0.04,
        };
        generate_structured(&spec, 100, 4, 4).unwrap()
    }

    #[test]
    fn sigma_ramp() {
        let (f, p, n) = (2.0, 0.2, 1500.0);
        assert_eq!(sigma(0.0, f, p, n), 0.0);
        assert_eq!(sigma(p * n, f, p, n), f);
        assert_eq!(sigma(0.5 * p * n, f, p, n), 0.5 * f);
        assert_eq!(sigma(n, f, p, n), f);
    }

    #[test]
    fn arrival_rate_logistic_factor() {
        let mesh = buffered_mesh();
        let mut st = EntranceState::new(&mesh, 1500.0, 2.0, 0.2, 13000.0).unwrap();
        st.reservoir = 1500.0; // S/N = 1 >= p
        let c = st.capacity;
        assert_eq!(st.arrival_rate(c), 0.0);
        assert_eq!(st.arrival_rate(0.0), 2.0);
        assert_eq!(st.arrival_rate(2.0 * c), -2.0);
    }

    #[test]
    fn buffer_relaxation_matches_logistic_solution() {
        let mesh = buffered_mesh();
        let mut st = EntranceState::new(&mesh, 1e12, 3.0, 0.5, 13000.0).unwrap();
        let c = st.capacity;
        let f = st.inflow_rate;
        // Frozen transport, sealed outlet: the density never moves, so the
        // buffer obeys dI/dt = F (1 - I/C) whose solution is
        // I(t) = C (1 - exp(-F t / C)).
        let dt = 1e-3 * c / f;
        let mut rho = DensityField::zeros(mesh.element_count());
        let t_end = 3.0 * c / f;
        let steps = (t_end / dt).round() as usize;
        let mut t = 0.0;
        for _ in 0..steps {
            st.step(&mesh, &mut rho, dt, 0.0);
            t += dt;
            let exact = c * (1.0 - (-f * t / c).exp());
            let rel = (st.buffer_mass - exact).abs() / exact.max(1e-300);
            assert!(rel < 1e-3, "t={t}: I={} vs {exact}", st.buffer_mass);
        }
        // Discrete iteration converges to the capacity.
        assert!((st.buffer_mass - c).abs() / c < 0.06);
        // Buffer density is uniform after the overwrite.
        let v0 = rho.values[mesh.buffer_elems[0]];
        for &k in &mesh.buffer_elems {
            assert_eq!(rho.values[k], v0);
        }
    }

    #[test]
    fn reservoir_overshoot_clamps_into_buffer() {
        let mesh = buffered_mesh();
        let mut st = EntranceState::new(&mesh, 1.0, 5.0, 0.9, 13000.0).unwrap();
        // One huge step drains more than the reservoir holds.
        let mut rho = DensityField::zeros(mesh.element_count());
        st.step(&mesh, &mut rho, 10.0, 0.0);
        assert_eq!(st.reservoir, 0.0);
        assert!(st.clamp_events > 0);
        // Everything ended up in the buffer; the budget is intact.
        let budget = st.reservoir + rho.buffer_mass(&mesh);
        assert!((budget - 1.0).abs() < 1e-12);
    }

    #[test]
    fn buffer_overshoot_returns_to_reservoir() {
        let mesh = buffered_mesh();
        let mut st = EntranceState::new(&mesh, 100.0, 4.0, 0.5, 13000.0).unwrap();
        // Buffer far over capacity: reverse flux larger than the content.
        let uniform = 5.0 * st.capacity / st.region_area;
        let mut rho = DensityField::zeros(mesh.element_count());
        for &k in &mesh.buffer_elems {
            rho.values[k] = uniform;
        }
        st.reset_phi(&mesh, &rho, 0.0);
        let before = st.reservoir + rho.buffer_mass(&mesh);
        st.step(&mesh, &mut rho, 10.0, 0.0);
        let after = st.reservoir + rho.buffer_mass(&mesh);
        assert!((before - after).abs() < 1e-9 * before);
        assert_eq!(rho.buffer_mass(&mesh), 0.0);
        assert!(st.clamp_events > 0);
    }

    #[test]
    fn inert_when_empty() {
        let mesh = buffered_mesh();
        let mut st = EntranceState::new(&mesh, 1500.0, 2.0, 0.2, 13000.0).unwrap();
        st.reservoir = 0.0;
        let mut rho = DensityField::zeros(mesh.element_count());
        for (k, c) in mesh.centroids.iter().enumerate() {
            if !mesh.is_buffer[k] && c.x > 0.2 && c.x < 0.4 {
                rho.values[k] = 3.0;
            }
        }
        st.reset_phi(&mesh, &rho, 0.0);
        let before = rho.clone();
        st.step(&mesh, &mut rho, 0.01, 0.0);
        assert_eq!(rho, before);
        assert_eq!(st.reservoir, 0.0);
        assert_eq!(st.buffer_mass, 0.0);
    }
}
