//! File outputs: mesh info, field export, density snapshots, metric time
//! series, chord profiles, run summary, sweep tables.
//!
//! Everything is plain CSV or `key = value` text, written in deterministic
//! order with shortest-roundtrip float formatting, so identical runs
//! produce bitwise-identical files. The density snapshot carries both the
//! probability density `rho` (total mass 1) and the dimensional pedestrian
//! density `rho_p = rho * N / L^2` in ped/m^2.

use std::io::Write;
use std::path::Path;

use crate::geometry::Vec2;
use crate::mesh::TriMesh;
use crate::observables::RunMetrics;
use crate::scenario::SweepCell;
use crate::sim::Simulation;
use crate::transport::DensityField;
use crate::Result;

pub fn mesh_info_text(mesh: &TriMesh) -> String {
    let census = mesh.label_census();
    let mut out = String::new();
    out.push_str(&format!("elements = {}\n", mesh.element_count()));
    out.push_str(&format!("nodes = {}\n", mesh.nodes.len()));
    out.push_str(&format!("h_min = {}\n", mesh.h_min));
    out.push_str(&format!("h_max = {}\n", mesh.h_max));
    out.push_str(&format!("total_area = {}\n", mesh.total_area()));
    out.push_str(&format!("domain_area = {}\n", mesh.domain_area()));
    out.push_str(&format!("buffer_area = {}\n", mesh.buffer_area()));
    out.push_str(&format!("buffer_elements = {}\n", mesh.buffer_elems.len()));
    for (label, count) in census {
        out.push_str(&format!("boundary_{label} = {count}\n"));
    }
    out
}

pub fn write_mesh_info<P: AsRef<Path>>(mesh: &TriMesh, path: P) -> Result<()> {
    std::fs::write(path, mesh_info_text(mesh))?;
    Ok(())
}

/// Per-element desired velocity and potential: `x,y,u,vdx,vdy`.
pub fn write_field_csv<P: AsRef<Path>>(sim: &Simulation, path: P) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "x,y,u,vdx,vdy")?;
    for (k, c) in sim.mesh.centroids.iter().enumerate() {
        let t = sim.mesh.tris[k];
        let u = (sim.field.u[t[0]] + sim.field.u[t[1]] + sim.field.u[t[2]]) / 3.0;
        let v = sim.field.v_d[k];
        writeln!(w, "{},{},{},{},{}", c.x, c.y, u, v.x, v.y)?;
    }
    Ok(())
}

/// Density snapshot: `elem_id,x,y,rho,rho_p,wx,wy` where `rho` is the
/// probability density and `rho_p` the dimensional pedestrian density.
pub fn write_snapshot_csv<P: AsRef<Path>>(
    mesh: &TriMesh,
    rho: &DensityField,
    w_field: &[Vec2],
    total: f64,
    length_m: f64,
    path: P,
) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "elem_id,x,y,rho,rho_p,wx,wy")?;
    let inv_total = if total > 0.0 { 1.0 / total } else { 0.0 };
    let inv_l2 = 1.0 / (length_m * length_m);
    for (k, c) in mesh.centroids.iter().enumerate() {
        let mass_density = rho.values[k];
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            k,
            c.x,
            c.y,
            mass_density * inv_total,
            mass_density * inv_l2,
            w_field[k].x,
            w_field[k].y
        )?;
    }
    Ok(())
}

/// Bulk time series `t,M,G`, both masses scaled by the crowd size.
pub fn write_metrics_csv<P: AsRef<Path>>(metrics: &RunMetrics, path: P) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "t,M,G")?;
    let inv = if metrics.total > 0.0 {
        1.0 / metrics.total
    } else {
        0.0
    };
    for r in &metrics.records {
        writeln!(w, "{},{},{}", r.t, r.domain_mass * inv, r.egress * inv)?;
    }
    Ok(())
}

/// Entrance time series `t,S,I,M,G`, scaled by the crowd size.
pub fn write_entrance_csv<P: AsRef<Path>>(metrics: &RunMetrics, path: P) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "t,S,I,M,G")?;
    let inv = if metrics.total > 0.0 {
        1.0 / metrics.total
    } else {
        0.0
    };
    for r in &metrics.records {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.t,
            r.reservoir * inv,
            r.buffer * inv,
            r.domain_mass * inv,
            r.egress * inv
        )?;
    }
    Ok(())
}

/// Chord profile `y,rho_p` at the mid-span section, averaged over the
/// full-walkway plateau (or over the whole run when no plateau exists).
pub fn write_profile_csv<P: AsRef<Path>>(sim: &Simulation, length_m: f64, path: P) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "y,rho_p")?;
    let window = sim
        .metrics
        .plateau_window()
        .unwrap_or((0, sim.profile_history.len()));
    let (lo, hi) = window;
    let count = (hi - lo).max(1) as f64;
    let ncols = sim.sampler.section_elems.len();
    let mut mean = vec![0.0; ncols];
    for (_, profile) in &sim.profile_history[lo..hi.max(lo + 1).min(sim.profile_history.len())] {
        for (m, v) in mean.iter_mut().zip(profile) {
            *m += v;
        }
    }
    let inv_l2 = 1.0 / (length_m * length_m);
    for (i, &k) in sim.sampler.section_elems.iter().enumerate() {
        let y = sim.mesh.centroids[k].y;
        writeln!(w, "{},{}", y, mean[i] / count * inv_l2)?;
    }
    Ok(())
}

/// Run summary as `key = value` lines.
pub fn write_summary<P: AsRef<Path>>(sim: &Simulation, path: P) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    match sim.metrics.egress_time() {
        Some(ta) => writeln!(w, "ta_over_t = {ta}")?,
        None => writeln!(w, "ta_over_t = inf")?,
    }
    match sim.metrics.delta_rho_plateau(sim.cfg.capacity_density) {
        Some(d) => writeln!(w, "delta_rho = {d}")?,
        None => writeln!(w, "delta_rho = nan")?,
    }
    if let Some((lo, hi)) = sim.metrics.plateau_window() {
        writeln!(
            w,
            "plateau_t = [{}, {}]",
            sim.metrics.records[lo].t,
            sim.metrics.records[hi - 1].t
        )?;
    } else {
        writeln!(w, "plateau_t = none")?;
    }
    if let Some(max_rho) = sim.metrics.max_rho_plateau() {
        writeln!(w, "max_rho_plateau = {max_rho}")?;
    }
    writeln!(w, "t_final = {}", sim.t)?;
    writeln!(w, "steps = {}", sim.steps)?;
    writeln!(w, "budget_error = {}", sim.metrics.budget_error())?;
    if let Some(ent) = &sim.entrance {
        writeln!(w, "entrance_clamp_events = {}", ent.clamp_events)?;
    }
    if !sim.field.degenerate_elems.is_empty() {
        writeln!(
            w,
            "stationary_gradient_elements = {}",
            sim.field.degenerate_elems.len()
        )?;
    }
    Ok(())
}

/// Sweep table `c,theta,Ta_over_T,delta_rho` (theta in degrees; failed
/// cells carry `nan` and are listed in the companion error column).
pub fn write_sweep_csv<P: AsRef<Path>>(cells: &[SweepCell], path: P) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "c,theta,Ta_over_T,delta_rho")?;
    for cell in cells {
        let ta = cell.ta_over_t.map_or("nan".to_string(), |v| v.to_string());
        let dr = cell.delta_rho.map_or("nan".to_string(), |v| v.to_string());
        writeln!(
            w,
            "{},{},{},{}",
            cell.repulsion_c,
            cell.theta.to_degrees(),
            ta,
            dr
        )?;
    }
    Ok(())
}
