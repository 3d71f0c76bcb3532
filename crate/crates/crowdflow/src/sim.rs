//! The step loop: interaction velocity, wall correction, stability-bounded
//! time step, transport, entrance, observables.
//!
//! All state advances in scaled units. One step is:
//!
//! 1. `w = v_d + v_i[rho]` from the nonlocal interaction;
//! 2. `dt = min(safety * h_min / max |w|, dt_max)`;
//! 3. wall-correct `w` wherever a translated element would cross a
//!    blocking boundary edge;
//! 4. push-forward transport step; outlet mass accumulates into the
//!    cumulative egress;
//! 5. entrance step (reservoir/buffer bookkeeping and buffer overwrite);
//! 6. metrics row (masses, mid-span chord samples, peak density).
//!
//! Everything is deterministic: identical inputs give bitwise-identical
//! trajectories for any thread count.

use crate::entrance::EntranceState;
use crate::field::PotentialField;
use crate::geometry::Vec2;
use crate::interaction::{total_velocity, InteractionParams};
use crate::mesh::{SpatialGrid, TriMesh};
use crate::observables::{ChordSampler, MetricsRecord, RunMetrics};
use crate::transport::{stable_dt, DensityField, Transport, WallMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub interaction: InteractionParams,
    pub wall_mode: WallMode,
    pub sealed_outlet: bool,
    pub cfl_safety: f64,
    pub dt_max: f64,
    /// Total crowd mass `N` (pedestrian units); the run normalization.
    pub total_mass: f64,
    /// Capacity density in scaled units, for the chord-uniformity index.
    pub capacity_density: f64,
}

pub struct Simulation {
    pub mesh: TriMesh,
    pub grid: SpatialGrid,
    pub field: PotentialField,
    pub transport: Transport,
    pub entrance: Option<EntranceState>,
    pub rho: DensityField,
    pub t: f64,
    pub steps: u64,
    /// Cumulative mass that left through the outlet.
    pub egress: f64,
    /// Corrected total velocity of the last step (desired velocity before
    /// the first step).
    pub last_w: Vec<Vec2>,
    pub cfg: SimConfig,
    pub sampler: ChordSampler,
    pub metrics: RunMetrics,
    /// Chord profile history at the sampler section: (t, values).
    pub profile_history: Vec<(f64, Vec<f64>)>,
    initial_budget: f64,
}

impl Simulation {
    pub fn new(
        mesh: TriMesh,
        field: PotentialField,
        cfg: SimConfig,
        mut entrance: Option<EntranceState>,
        rho0: DensityField,
    ) -> Result<Self> {
        if rho0.values.len() != mesh.element_count() {
            return Err(Error::Mesh(format!(
                "density has {} values for {} elements",
                rho0.values.len(),
                mesh.element_count()
            )));
        }
        let grid = SpatialGrid::new(&mesh.centroids, cfg.interaction.radius);
        let transport = Transport::new(&mesh, cfg.wall_mode, cfg.sealed_outlet)?;
        let sampler = ChordSampler::at_section(&mesh, 0.5)?;
        if let Some(ent) = entrance.as_mut() {
            ent.reset_phi(&mesh, &rho0, 0.0);
        }
        let last_w = field.v_d.clone();
        let initial_budget = entrance.as_ref().map_or(0.0, |e| e.reservoir) + rho0.mass(&mesh);
        let mut sim = Self {
            mesh,
            grid,
            field,
            transport,
            entrance,
            rho: rho0,
            t: 0.0,
            steps: 0,
            egress: 0.0,
            last_w,
            cfg,
            sampler,
            metrics: RunMetrics::new(cfg.total_mass),
            profile_history: Vec::new(),
            initial_budget,
        };
        sim.record();
        Ok(sim)
    }

    fn record(&mut self) {
        let (rho_mid, rho_side) = self.sampler.sample(&self.rho);
        let max_rho = self
            .rho
            .values
            .iter()
            .enumerate()
            .filter(|(k, _)| !self.mesh.is_buffer[*k])
            .map(|(_, &v)| v)
            .fold(0.0, f64::max);
        self.metrics.records.push(MetricsRecord {
            t: self.t,
            domain_mass: self.rho.domain_mass(&self.mesh),
            egress: self.egress,
            reservoir: self.entrance.as_ref().map_or(0.0, |e| e.reservoir),
            buffer: self.rho.buffer_mass(&self.mesh),
            rho_mid,
            rho_side,
            max_rho,
        });
        let profile: Vec<f64> = self
            .sampler
            .section_elems
            .iter()
            .map(|&k| self.rho.values[k])
            .collect();
        self.profile_history.push((self.t, profile));
    }

    /// Advance one step; returns the step size taken.
    pub fn step(&mut self) -> Result<f64> {
        let mut w = total_velocity(
            &self.mesh,
            &self.grid,
            &self.rho,
            &self.field.v_d,
            &self.cfg.interaction,
        );
        let dt = stable_dt(&self.mesh, &w, self.cfg.cfl_safety, self.cfg.dt_max);
        self.transport.correct_velocities(&self.mesh, &mut w, dt);
        let (next, egress_step) = self
            .transport
            .step(&self.mesh, &self.grid, &self.rho, &w, dt)?;
        self.rho = next;
        self.egress += egress_step;
        if let Some(ent) = self.entrance.as_mut() {
            ent.step(&self.mesh, &mut self.rho, dt, self.egress);
        }
        if !self.rho.is_finite() {
            return Err(Error::NonFiniteDensity {
                t: self.t,
                step: self.steps,
            });
        }
        self.t += dt;
        self.steps += 1;
        self.last_w = w;
        self.record();
        Ok(dt)
    }

    /// Current mass budget `S + I + M + G`.
    pub fn budget(&self) -> f64 {
        self.entrance.as_ref().map_or(0.0, |e| e.reservoir)
            + self.rho.mass(&self.mesh)
            + self.egress
    }

    /// True once essentially everything has walked out (beyond the egress
    /// closure tolerance, so the egress-time detection has resolved).
    pub fn drained(&self) -> bool {
        self.initial_budget > 0.0 && self.egress >= self.initial_budget * (1.0 - 1e-7)
    }

    /// Run until `t_end` (scaled), stopping early once the crowd has fully
    /// drained. `on_step` fires after every step.
    pub fn run_until(
        &mut self,
        t_end: f64,
        mut on_step: impl FnMut(&Simulation, f64),
    ) -> Result<()> {
        while self.t < t_end - 1e-12 && !self.drained() {
            let dt = self.step()?;
            on_step(self, dt);
        }
        Ok(())
    }
}
