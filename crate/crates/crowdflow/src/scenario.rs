//! Scenario configuration: SI units at the boundary, scaled units inside.
//!
//! A scenario is a single TOML file with flat sections. Lengths are meters,
//! speeds m/s, rates pedestrians per second; on load everything is rescaled
//! by the span `L`, the free speed `V`, and the crossing time `T = L/V`,
//! and the simulation itself never sees an SI quantity again. Validation
//! collects every offending field instead of stopping at the first.
//!
//! The parameter sweep re-runs one scenario over a grid of repulsion
//! strengths and wall angles (cells are independent and run in a work
//! pool), producing the tuning tables that map target bulk observables
//! back to parameters: pick `c` from the egress time, then the wall angle
//! from the chord-uniformity index.

use rayon::prelude::*;
use serde::Deserialize;

use crate::entrance::EntranceState;
use crate::field::{closed_form_field, solve_potential};
use crate::interaction::InteractionParams;
use crate::mesh::{generate_mesh, ChordProfile, DomainSpec, TriMesh};
use crate::sim::{SimConfig, Simulation};
use crate::transport::{DensityField, WallMode};
use crate::{Error, Result};

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// rectangle | bottleneck | curved | shifted
    pub kind: String,
    pub length_m: f64,
    pub chord_m: f64,
    /// Bottleneck: fraction of the chord pinched away at the throat.
    #[serde(default = "default_bottleneck_depth")]
    pub depth_frac: f64,
    #[serde(default = "default_half")]
    pub center_frac: f64,
    #[serde(default = "default_bottleneck_width")]
    pub width_frac: f64,
    /// Curved/shifted: lateral centerline offset in meters.
    #[serde(default)]
    pub offset_m: f64,
    #[serde(default)]
    pub sealed_outlet: bool,
}

fn default_bottleneck_depth() -> f64 {
    0.4
}
fn default_half() -> f64 {
    0.5
}
fn default_bottleneck_width() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub target_h_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub repulsion_c: f64,
    pub theta_deg: f64,
    #[serde(default = "default_sensory_radius")]
    pub sensory_radius_m: f64,
    #[serde(default = "default_half_angle")]
    pub sensory_half_angle_deg: f64,
    pub desired_speed_mps: f64,
    #[serde(default = "default_wall_mode")]
    pub wall_mode: String,
    /// auto | closed-form | fem
    #[serde(default = "default_field_method")]
    pub field_method: String,
}

fn default_sensory_radius() -> f64 {
    2.0
}
fn default_half_angle() -> f64 {
    45.0
}
fn default_wall_mode() -> String {
    "scrape".into()
}
fn default_field_method() -> String {
    "auto".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrowdConfig {
    pub total_pedestrians: f64,
    pub capacity_density_ped_m2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntranceConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub inflow_rate_ped_s: f64,
    #[serde(default = "default_fadeout")]
    pub fadeout_ratio: f64,
    /// Defaults to twice the sensory radius so entering mass is visible to
    /// walkers just inside the domain.
    #[serde(default)]
    pub buffer_depth_m: Option<f64>,
}

fn default_fadeout() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// none | gaussian | strip
    pub kind: String,
    #[serde(default)]
    pub center_x_m: f64,
    #[serde(default)]
    pub center_y_m: f64,
    #[serde(default = "default_one")]
    pub sigma_m: f64,
    #[serde(default)]
    pub from_x_m: f64,
    #[serde(default)]
    pub to_x_m: f64,
    #[serde(default)]
    pub total_ped: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end_over_t: f64,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_dt_max")]
    pub max_dt_over_t: f64,
}

fn default_safety() -> f64 {
    0.8
}
fn default_dt_max() -> f64 {
    0.01
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Snapshot period in units of the crossing time; 0 disables snapshots.
    #[serde(default)]
    pub snapshot_every_over_t: f64,
}

/// Raw scenario file contents.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub domain: DomainConfig,
    pub mesh: MeshConfig,
    pub model: ModelConfig,
    pub crowd: CrowdConfig,
    #[serde(default)]
    pub entrance: Option<EntranceConfig>,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Reserved for test oracles; the simulator itself is deterministic.
    #[serde(default)]
    pub rng_seed: Option<u64>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig {
            issues: vec![e.to_string()],
        })
    }

    pub fn from_path<P: AsRef<std::path::Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Validate and rescale into a runnable scenario. Collects every
    /// offending field.
    pub fn resolve(&self) -> Result<Scenario> {
        self.resolve_with_warnings().map(|(sc, _)| sc)
    }

    /// Like [`ScenarioConfig::resolve`], also returning non-fatal warnings
    /// (e.g. an aspect ratio outside the elongated-domain regime).
    pub fn resolve_with_warnings(&self) -> Result<(Scenario, Vec<String>)> {
        let mut issues = Vec::new();
        let mut warnings = Vec::new();
        let d = &self.domain;
        if !(d.length_m > 0.0) {
            issues.push(format!(
                "domain.length_m must be positive, got {}",
                d.length_m
            ));
        }
        if !(d.chord_m > 0.0) {
            issues.push(format!(
                "domain.chord_m must be positive, got {}",
                d.chord_m
            ));
        }
        let profile = match d.kind.as_str() {
            "rectangle" => Some(ChordProfile::Rectangle),
            "bottleneck" => {
                if !(d.depth_frac > 0.0 && d.depth_frac < 1.0) {
                    issues.push(format!(
                        "domain.depth_frac must lie in (0, 1), got {}",
                        d.depth_frac
                    ));
                }
                if !(d.width_frac > 0.0) {
                    issues.push("domain.width_frac must be positive".into());
                }
                Some(ChordProfile::Bottleneck {
                    depth: d.depth_frac,
                    center: d.center_frac,
                    width: d.width_frac,
                })
            }
            "curved" => Some(ChordProfile::Curved {
                offset: d.offset_m / d.length_m.max(1e-300),
            }),
            "shifted" => Some(ChordProfile::Shifted {
                offset: d.offset_m / d.length_m.max(1e-300),
            }),
            other => {
                issues.push(format!(
                    "domain.kind must be rectangle|bottleneck|curved|shifted, got `{other}`"
                ));
                None
            }
        };
        let aspect = d.chord_m / d.length_m.max(1e-300);
        if aspect > 0.5 {
            warnings.push(format!(
                "domain aspect ratio {aspect:.3} > 0.5: the walkway model expects elongated domains"
            ));
        }

        if !(self.mesh.target_h_m > 0.0) {
            issues.push("mesh.target_h_m must be positive".into());
        } else if self.mesh.target_h_m >= d.chord_m {
            issues.push(format!(
                "mesh.target_h_m = {} must be below the chord {}",
                self.mesh.target_h_m, d.chord_m
            ));
        }

        let m = &self.model;
        if m.repulsion_c < 0.0 {
            issues.push(format!(
                "model.repulsion_c must be >= 0, got {}",
                m.repulsion_c
            ));
        }
        if !(0.0..90.0).contains(&m.theta_deg) {
            issues.push(format!(
                "model.theta_deg must lie in [0, 90), got {}",
                m.theta_deg
            ));
        }
        if !(m.sensory_radius_m > 0.0) {
            issues.push("model.sensory_radius_m must be positive".into());
        }
        if !(m.sensory_half_angle_deg > 0.0 && m.sensory_half_angle_deg < 90.0) {
            issues.push(format!(
                "model.sensory_half_angle_deg must lie in (0, 90), got {}",
                m.sensory_half_angle_deg
            ));
        }
        if !(m.desired_speed_mps > 0.0) {
            issues.push("model.desired_speed_mps must be positive".into());
        }
        let wall_mode = match m.wall_mode.as_str() {
            "scrape" => WallMode::Scrape,
            "stop" => WallMode::Stop,
            other => {
                issues.push(format!(
                    "model.wall_mode must be scrape|stop, got `{other}`"
                ));
                WallMode::Scrape
            }
        };
        let field_method = match m.field_method.as_str() {
            "auto" => FieldMethod::Auto,
            "closed-form" => FieldMethod::ClosedForm,
            "fem" => FieldMethod::Fem,
            other => {
                issues.push(format!(
                    "model.field_method must be auto|closed-form|fem, got `{other}`"
                ));
                FieldMethod::Auto
            }
        };
        if matches!(field_method, FieldMethod::ClosedForm)
            && !matches!(profile, Some(ChordProfile::Rectangle) | None)
        {
            issues.push("model.field_method = closed-form requires a rectangle domain".into());
        }

        if self.crowd.total_pedestrians < 0.0 {
            issues.push("crowd.total_pedestrians must be >= 0".into());
        }
        if !(self.crowd.capacity_density_ped_m2 > 0.0) {
            issues.push("crowd.capacity_density_ped_m2 must be positive".into());
        }

        let t_scale = d.length_m / m.desired_speed_mps.max(1e-300);
        let entrance = match &self.entrance {
            Some(e) if e.enabled => {
                if !(e.fadeout_ratio > 0.0 && e.fadeout_ratio < 1.0) {
                    issues.push(format!(
                        "entrance.fadeout_ratio must lie in (0, 1), got {}",
                        e.fadeout_ratio
                    ));
                }
                if e.inflow_rate_ped_s < 0.0 {
                    issues.push(format!(
                        "entrance.inflow_rate_ped_s must be >= 0, got {}",
                        e.inflow_rate_ped_s
                    ));
                }
                let depth_m = e.buffer_depth_m.unwrap_or(2.0 * m.sensory_radius_m);
                if !(depth_m > 0.0) {
                    issues.push("entrance.buffer_depth_m must be positive".into());
                }
                Some(ResolvedEntrance {
                    inflow_rate: e.inflow_rate_ped_s * t_scale,
                    fadeout_ratio: e.fadeout_ratio,
                    buffer_depth: depth_m / d.length_m.max(1e-300),
                })
            }
            _ => None,
        };

        let initial = match &self.initial {
            None => InitialDensity::None,
            Some(i) => match i.kind.as_str() {
                "none" => InitialDensity::None,
                "gaussian" => {
                    if !(i.sigma_m > 0.0) {
                        issues.push("initial.sigma_m must be positive".into());
                    }
                    if i.total_ped < 0.0 {
                        issues.push("initial.total_ped must be >= 0".into());
                    }
                    InitialDensity::Gaussian {
                        cx: i.center_x_m / d.length_m,
                        cy: i.center_y_m / d.length_m,
                        sigma: i.sigma_m / d.length_m,
                        total: i.total_ped,
                    }
                }
                "strip" => {
                    if i.to_x_m <= i.from_x_m {
                        issues.push("initial strip needs to_x_m > from_x_m".into());
                    }
                    if i.total_ped < 0.0 {
                        issues.push("initial.total_ped must be >= 0".into());
                    }
                    InitialDensity::Strip {
                        x0: i.from_x_m / d.length_m,
                        x1: i.to_x_m / d.length_m,
                        total: i.total_ped,
                    }
                }
                other => {
                    issues.push(format!(
                        "initial.kind must be none|gaussian|strip, got `{other}`"
                    ));
                    InitialDensity::None
                }
            },
        };

        if !(self.time.t_end_over_t > 0.0) {
            issues.push("time.t_end_over_t must be positive".into());
        }
        if !(self.time.cfl_safety > 0.0 && self.time.cfl_safety <= 1.0) {
            issues.push(format!(
                "time.cfl_safety must lie in (0, 1], got {}",
                self.time.cfl_safety
            ));
        }
        if !(self.time.max_dt_over_t > 0.0) {
            issues.push("time.max_dt_over_t must be positive".into());
        }
        if self.output.snapshot_every_over_t < 0.0 {
            issues.push("output.snapshot_every_over_t must be >= 0".into());
        }

        if !issues.is_empty() {
            return Err(Error::InvalidConfig { issues });
        }

        let scenario = Scenario {
            domain: DomainSpec {
                aspect,
                profile: profile.unwrap(),
                buffer_depth: entrance.as_ref().map_or(0.0, |e| e.buffer_depth),
            },
            h: self.mesh.target_h_m / d.length_m,
            repulsion_c: m.repulsion_c,
            theta: m.theta_deg.to_radians(),
            sensory_radius: m.sensory_radius_m / d.length_m,
            sensory_half_angle: m.sensory_half_angle_deg.to_radians(),
            field_method,
            wall_mode,
            sealed_outlet: d.sealed_outlet,
            total: self.crowd.total_pedestrians,
            capacity_density: self.crowd.capacity_density_ped_m2 * d.length_m * d.length_m,
            entrance,
            initial,
            t_end: self.time.t_end_over_t,
            cfl_safety: self.time.cfl_safety,
            dt_max: self.time.max_dt_over_t,
            snapshot_every: self.output.snapshot_every_over_t,
            length_m: d.length_m,
            speed_mps: m.desired_speed_mps,
        };
        Ok((scenario, warnings))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMethod {
    Auto,
    ClosedForm,
    Fem,
}

#[derive(Debug, Clone, Copy)]
pub struct ResolvedEntrance {
    /// Mass per scaled time.
    pub inflow_rate: f64,
    pub fadeout_ratio: f64,
    pub buffer_depth: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum InitialDensity {
    None,
    Gaussian {
        cx: f64,
        cy: f64,
        sigma: f64,
        total: f64,
    },
    Strip {
        x0: f64,
        x1: f64,
        total: f64,
    },
}

impl InitialDensity {
    pub fn instantiate(&self, mesh: &TriMesh) -> DensityField {
        let mut rho = DensityField::zeros(mesh.element_count());
        let total = match *self {
            InitialDensity::None => return rho,
            InitialDensity::Gaussian {
                cx,
                cy,
                sigma,
                total,
            } => {
                for (k, c) in mesh.centroids.iter().enumerate() {
                    if !mesh.is_buffer[k] {
                        let d2 = ((c.x - cx) / sigma).powi(2) + ((c.y - cy) / sigma).powi(2);
                        rho.values[k] = (-0.5 * d2).exp();
                    }
                }
                total
            }
            InitialDensity::Strip { x0, x1, total } => {
                for (k, c) in mesh.centroids.iter().enumerate() {
                    if !mesh.is_buffer[k] && c.x >= x0 && c.x < x1 {
                        rho.values[k] = 1.0;
                    }
                }
                total
            }
        };
        let m = rho.mass(mesh);
        if m > 0.0 && total > 0.0 {
            rho.scaled(total / m)
        } else {
            DensityField::zeros(mesh.element_count())
        }
    }
}

/// Fully resolved scenario in scaled units.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub domain: DomainSpec,
    pub h: f64,
    pub repulsion_c: f64,
    pub theta: f64,
    pub sensory_radius: f64,
    pub sensory_half_angle: f64,
    pub field_method: FieldMethod,
    pub wall_mode: WallMode,
    pub sealed_outlet: bool,
    /// Total crowd `N` in pedestrian units.
    pub total: f64,
    /// Capacity density in scaled units (`rho_C L^2`).
    pub capacity_density: f64,
    pub entrance: Option<ResolvedEntrance>,
    pub initial: InitialDensity,
    /// End time in crossing-time units.
    pub t_end: f64,
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub snapshot_every: f64,
    pub length_m: f64,
    pub speed_mps: f64,
}

impl Scenario {
    pub fn crossing_time_s(&self) -> f64 {
        self.length_m / self.speed_mps
    }

    pub fn build_mesh(&self) -> Result<TriMesh> {
        generate_mesh(&self.domain, self.h)
    }

    pub fn build(&self) -> Result<Simulation> {
        let mesh = self.build_mesh()?;
        self.build_on_mesh(mesh)
    }

    pub fn build_on_mesh(&self, mesh: TriMesh) -> Result<Simulation> {
        let use_closed_form = match self.field_method {
            FieldMethod::ClosedForm => true,
            FieldMethod::Fem => false,
            FieldMethod::Auto => self.domain.profile == ChordProfile::Rectangle,
        };
        let field = if use_closed_form {
            closed_form_field(&mesh, &self.domain, self.theta)?
        } else {
            solve_potential(&mesh, &self.domain, self.theta)?
        };
        let interaction = InteractionParams::new(
            self.repulsion_c,
            self.sensory_radius,
            self.sensory_half_angle,
            mesh.h_min / 2.0,
        )?;
        let cfg = SimConfig {
            interaction,
            wall_mode: self.wall_mode,
            sealed_outlet: self.sealed_outlet,
            cfl_safety: self.cfl_safety,
            dt_max: self.dt_max,
            total_mass: self.total,
            capacity_density: self.capacity_density,
        };
        let entrance = match &self.entrance {
            Some(e) => Some(EntranceState::new(
                &mesh,
                self.total,
                e.inflow_rate,
                e.fadeout_ratio,
                self.capacity_density,
            )?),
            None => None,
        };
        let rho0 = self.initial.instantiate(&mesh);
        Simulation::new(mesh, field, cfg, entrance, rho0)
    }

    /// Copy with different repulsion strength and wall angle (sweep cell).
    pub fn with_parameters(&self, repulsion_c: f64, theta: f64) -> Scenario {
        let mut s = self.clone();
        s.repulsion_c = repulsion_c;
        s.theta = theta;
        s
    }
}

/// Outcome of one sweep cell.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub repulsion_c: f64,
    pub theta: f64,
    pub ta_over_t: Option<f64>,
    pub delta_rho: Option<f64>,
    pub error: Option<String>,
}

/// Run the scenario over the full (c, theta) grid. Cells are independent
/// simulations executed in a work pool; results come back in grid order
/// (c-major) regardless of scheduling.
pub fn sweep(scenario: &Scenario, cs: &[f64], thetas: &[f64]) -> Vec<SweepCell> {
    let cells: Vec<(f64, f64)> = cs
        .iter()
        .flat_map(|&c| thetas.iter().map(move |&th| (c, th)))
        .collect();
    cells
        .par_iter()
        .map(|&(c, theta)| {
            let cell = scenario.with_parameters(c, theta);
            match cell.build().and_then(|mut sim| {
                sim.run_until(cell.t_end, |_, _| {})?;
                Ok(sim)
            }) {
                Ok(sim) => SweepCell {
                    repulsion_c: c,
                    theta,
                    ta_over_t: sim.metrics.egress_time(),
                    delta_rho: sim.metrics.delta_rho_plateau(cell.capacity_density),
                    error: None,
                },
                Err(e) => SweepCell {
                    repulsion_c: c,
                    theta,
                    ta_over_t: None,
                    delta_rho: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Tuning recipe over a sweep table: first invert the egress time for the
/// repulsion strength (its dominant driver), then invert the chord
/// uniformity at that strength for the wall angle.
pub fn tune(cells: &[SweepCell], ta_target: f64, delta_rho_target: f64) -> Option<(f64, f64)> {
    let mut cs: Vec<f64> = cells.iter().map(|c| c.repulsion_c).collect();
    cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cs.dedup();
    // Mean egress time per strength.
    let mut ta_of_c = Vec::new();
    for &c in &cs {
        let vals: Vec<f64> = cells
            .iter()
            .filter(|cell| cell.repulsion_c == c)
            .filter_map(|cell| cell.ta_over_t)
            .collect();
        if !vals.is_empty() {
            ta_of_c.push((c, vals.iter().sum::<f64>() / vals.len() as f64));
        }
    }
    if ta_of_c.is_empty() {
        return None;
    }
    let c_breve = invert_monotone(&ta_of_c, ta_target);

    // Chord uniformity against theta at the nearest grid strength.
    let c_near = cs.iter().copied().min_by(|a, b| {
        (a - c_breve)
            .abs()
            .partial_cmp(&(b - c_breve).abs())
            .unwrap()
    })?;
    let mut drho_of_theta: Vec<(f64, f64)> = cells
        .iter()
        .filter(|cell| cell.repulsion_c == c_near)
        .filter_map(|cell| cell.delta_rho.map(|d| (cell.theta, d)))
        .collect();
    drho_of_theta.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if drho_of_theta.is_empty() {
        return None;
    }
    let theta_breve = invert_monotone(&drho_of_theta, delta_rho_target);
    Some((c_breve, theta_breve))
}

/// Piecewise-linear inverse of a tabulated (x, y) relation; clamps outside
/// the covered range and picks the nearest sample when no bracket exists.
fn invert_monotone(table: &[(f64, f64)], target: f64) -> f64 {
    for w in table.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if (y0 - target) * (y1 - target) <= 0.0 && y0 != y1 {
            return x0 + (target - y0) / (y1 - y0) * (x1 - x0);
        }
    }
    table
        .iter()
        .min_by(|a, b| {
            (a.1 - target)
                .abs()
                .partial_cmp(&(b.1 - target).abs())
                .unwrap()
        })
        .map(|&(x, _)| x)
        .unwrap()
}

/// Baseline scenario with the standard crowd-event setup: 100 m x 4 m
/// rectangular walkway, 1500 pedestrians arriving through the entrance,
/// capacity density 1.3 ped/m^2, free speed 1.18 m/s.
pub fn reference_scenario_toml() -> &'static str {
    r#"
[domain]
kind = "rectangle"
length_m = 100.0
chord_m = 4.0

[mesh]
target_h_m = 0.5

[model]
repulsion_c = 5e-4
theta_deg = 2.0
sensory_radius_m = 2.0
sensory_half_angle_deg = 45.0
desired_speed_mps = 1.18

[crowd]
total_pedestrians = 1500.0
capacity_density_ped_m2 = 1.3

[entrance]
enabled = true
inflow_rate_ped_s = 70.0
fadeout_ratio = 0.05

[time]
t_end_over_t = 12.0
"#
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scenario_parses_and_resolves() {
        let cfg = ScenarioConfig::from_toml_str(reference_scenario_toml()).unwrap();
        let sc = cfg.resolve().unwrap();
        assert!((sc.domain.aspect - 0.04).abs() < 1e-15);
        assert!((sc.h - 0.005).abs() < 1e-15);
        assert!((sc.sensory_radius - 0.02).abs() < 1e-15);
        assert!((sc.capacity_density - 13000.0).abs() < 1e-9);
        // 70 ped/s * T with T = 100/1.18 s.
        let t = sc.crossing_time_s();
        assert!((sc.entrance.as_ref().unwrap().inflow_rate - 70.0 * t).abs() < 1e-9);
        // Default buffer depth is twice the sensory radius.
        assert!((sc.domain.buffer_depth - 0.04).abs() < 1e-15);
    }

    #[test]
    fn validation_lists_every_offending_field() {
        let bad = r#"
[domain]
kind = "hexagon"
length_m = 100.0
chord_m = -4.0

[mesh]
target_h_m = 0.5

[model]
repulsion_c = -1.0
theta_deg = 95.0
desired_speed_mps = 1.18

[crowd]
total_pedestrians = 1500.0
capacity_density_ped_m2 = 1.3

[time]
t_end_over_t = 10.0
"#;
        let cfg = ScenarioConfig::from_toml_str(bad).unwrap();
        let err = cfg.resolve().unwrap_err();
        let text = err.to_string();
        for needle in ["domain.kind", "chord_m", "repulsion_c", "theta_deg"] {
            assert!(text.contains(needle), "missing `{needle}` in:\n{text}");
        }
    }

    #[test]
    fn wide_aspect_warns_but_resolves() {
        let wide = reference_scenario_toml().replace("chord_m = 4.0", "chord_m = 60.0");
        let cfg = ScenarioConfig::from_toml_str(&wide).unwrap();
        let (_, warnings) = cfg.resolve_with_warnings().unwrap();
        assert!(warnings.iter().any(|w| w.contains("aspect ratio")));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = reference_scenario_toml().replace("[mesh]", "[mesh]\nbogus_knob = 3\n");
        let err = ScenarioConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.to_string().contains("bogus_knob"));
    }

    #[test]
    fn initial_density_mass_is_exact() {
        let cfg = ScenarioConfig::from_toml_str(reference_scenario_toml()).unwrap();
        let mut sc = cfg.resolve().unwrap();
        sc.entrance = None;
        sc.domain.buffer_depth = 0.0;
        sc.initial = InitialDensity::Strip {
            x0: 0.1,
            x1: 0.5,
            total: 250.0,
        };
        let mesh = sc.build_mesh().unwrap();
        let rho = sc.initial.instantiate(&mesh);
        assert!((rho.mass(&mesh) - 250.0).abs() < 1e-9);
    }

    #[test]
    fn tuning_recipe_inverts_tables() {
        // Synthetic sweep: Ta rises with c, delta_rho rises with theta.
        let mut cells = Vec::new();
        for &c in &[1e-4, 2e-4, 3e-4] {
            for &th in &[0.0f64, 0.02, 0.04] {
                cells.push(SweepCell {
                    repulsion_c: c,
                    theta: th,
                    ta_over_t: Some(3.0 + c * 1e4),
                    delta_rho: Some((th - 0.02) * 10.0 + (c - 2e-4) * 100.0),
                    error: None,
                });
            }
        }
        let (cb, tb) = tune(&cells, 5.0, 0.0).unwrap();
        assert!((cb - 2e-4).abs() < 1e-12, "c = {cb}");
        assert!((tb - 0.02).abs() < 1e-9, "theta = {tb}");
    }
}
