//! The full sphere-valued flow ũ_t = ũ_rr + ũ_r/r + ũ_zz + |∇ũ|² ũ with
//! Dirichlet value e₃ on ∂𝒟 \ {r = 0} and the reflection condition on the
//! axis, advanced explicitly with pointwise projection back to S².

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::vec3;
use crate::grid::{write_map_snapshot, Grid2D, MapField};

use super::diag::{detect_scale_map, energy_map, max_grad_map, DiagRow, Region};
use super::{RunControls, StopReason, TimeScheme};

/// Spatial right-hand side of the flow at every node (zero on the Dirichlet
/// boundary). On the axis column the radial operator u_rr + u_r/r is
/// replaced by its symmetry limit 2·u_rr with the reflected ghost node.
pub fn map_rhs(field: &MapField, out: &mut Vec<[f64; 3]>) {
    let g = field.grid;
    let (nr, nz) = (g.nodes_r(), g.nodes_z());
    let dr2 = g.dr() * g.dr();
    let dz2 = g.dz() * g.dz();
    let inv_2dr = 0.5 / g.dr();
    let inv_2dz = 0.5 / g.dz();
    out.resize(g.n_nodes(), [0.0; 3]);
    let data = &field.data;

    out.par_chunks_mut(nr).enumerate().for_each(|(j, row)| {
        if j == 0 || j == nz - 1 {
            for v in row.iter_mut() {
                *v = [0.0; 3];
            }
            return;
        }
        for i in 0..nr {
            if g.is_dirichlet_boundary(i, j) {
                row[i] = [0.0; 3];
                continue;
            }
            let c = data[j * nr + i];
            let up = data[(j + 1) * nr + i];
            let dn = data[(j - 1) * nr + i];
            let mut rhs = [0.0; 3];
            if i == 0 {
                // axis: (u_rr + u_r/r) → 2 u_rr = 4 (u₁ − u₀)/dr²
                let rt = data[j * nr + 1];
                let mut u_z = [0.0; 3];
                for k in 0..3 {
                    u_z[k] = (up[k] - dn[k]) * inv_2dz;
                }
                let gsq = vec3::dot(u_z, u_z);
                for k in 0..3 {
                    rhs[k] = 4.0 * (rt[k] - c[k]) / dr2
                        + (up[k] - 2.0 * c[k] + dn[k]) / dz2
                        + gsq * c[k];
                }
            } else {
                let r = g.node_r(i);
                let rt = data[j * nr + i + 1];
                let lf = data[j * nr + i - 1];
                let mut u_r = [0.0; 3];
                let mut u_z = [0.0; 3];
                for k in 0..3 {
                    u_r[k] = (rt[k] - lf[k]) * inv_2dr;
                    u_z[k] = (up[k] - dn[k]) * inv_2dz;
                }
                let gsq = vec3::dot(u_r, u_r) + vec3::dot(u_z, u_z);
                for k in 0..3 {
                    rhs[k] = (rt[k] - 2.0 * c[k] + lf[k]) / dr2
                        + u_r[k] / r
                        + (up[k] - 2.0 * c[k] + dn[k]) / dz2
                        + gsq * c[k];
                }
            }
            row[i] = rhs;
        }
    });
}

/// One explicit step followed by projection to S²; returns the largest
/// pointwise change made by the projection.
pub fn step_map(field: &mut MapField, dt: f64, scheme: TimeScheme, scratch: &mut MapScratch) -> f64 {
    match scheme {
        TimeScheme::Euler => {
            map_rhs(field, &mut scratch.k1);
            for (v, k) in field.data.iter_mut().zip(&scratch.k1) {
                for c in 0..3 {
                    v[c] += dt * k[c];
                }
            }
        }
        TimeScheme::Rk2 => {
            map_rhs(field, &mut scratch.k1);
            let stage = scratch.stage.get_or_insert_with(|| field.clone());
            stage.grid = field.grid;
            stage.data.clone_from(&field.data);
            for (v, k) in stage.data.iter_mut().zip(&scratch.k1) {
                for c in 0..3 {
                    v[c] += dt * k[c];
                }
            }
            stage.renormalize();
            let stage = scratch.stage.as_ref().unwrap();
            map_rhs(stage, &mut scratch.k2);
            for ((v, k1), k2) in field
                .data
                .iter_mut()
                .zip(&scratch.k1)
                .zip(&scratch.k2)
            {
                for c in 0..3 {
                    v[c] += 0.5 * dt * (k1[c] + k2[c]);
                }
            }
        }
    }
    let change = field.renormalize();
    field.time += dt;
    change
}

/// Reusable buffers for the stepper.
#[derive(Debug, Default)]
pub struct MapScratch {
    k1: Vec<[f64; 3]>,
    k2: Vec<[f64; 3]>,
    stage: Option<MapField>,
}

/// Discrete residual of S(ũ) = −ũ_t + ũ_rr + ũ_r/r + ũ_zz + |∇ũ|² ũ with a
/// backward time difference; zero on the Dirichlet boundary.
pub fn residual_s(u: &MapField, u_prev: &MapField, dt: f64) -> Result<Vec<[f64; 3]>> {
    if u.grid != u_prev.grid {
        return Err(Error::geometry("residual needs matching grids"));
    }
    if dt <= 0.0 {
        return Err(Error::domain("residual needs dt > 0"));
    }
    let mut rhs = Vec::new();
    map_rhs(u, &mut rhs);
    let mut out = vec![[0.0; 3]; u.grid.n_nodes()];
    let g = u.grid;
    for j in 0..g.nodes_z() {
        for i in 0..g.nodes_r() {
            let idx = g.idx(i, j);
            if g.is_dirichlet_boundary(i, j) {
                continue;
            }
            for k in 0..3 {
                out[idx][k] = -(u.data[idx][k] - u_prev.data[idx][k]) / dt + rhs[idx][k];
            }
        }
    }
    Ok(out)
}

/// Planar harmonic-map operator u_rr + u_zz + |∇u|² u (no curvature term,
/// no time difference); measures how well a profile solves the static 2D
/// equation. Zero on the outermost ring where the stencil does not fit.
pub fn harmonic_residual(u: &MapField) -> Vec<[f64; 3]> {
    let g = u.grid;
    let (nr, _nz) = (g.nodes_r(), g.nodes_z());
    let dr2 = g.dr() * g.dr();
    let dz2 = g.dz() * g.dz();
    let inv_2dr = 0.5 / g.dr();
    let inv_2dz = 0.5 / g.dz();
    let mut out = vec![[0.0; 3]; g.n_nodes()];
    for j in 1..g.nodes_z() - 1 {
        for i in 1..nr - 1 {
            let idx = g.idx(i, j);
            let c = u.data[idx];
            let rt = u.data[idx + 1];
            let lf = u.data[idx - 1];
            let up = u.data[idx + nr];
            let dn = u.data[idx - nr];
            let mut u_r = [0.0; 3];
            let mut u_z = [0.0; 3];
            for k in 0..3 {
                u_r[k] = (rt[k] - lf[k]) * inv_2dr;
                u_z[k] = (up[k] - dn[k]) * inv_2dz;
            }
            let gsq = vec3::dot(u_r, u_r) + vec3::dot(u_z, u_z);
            for k in 0..3 {
                out[idx][k] =
                    (rt[k] - 2.0 * c[k] + lf[k]) / dr2 + (up[k] - 2.0 * c[k] + dn[k]) / dz2
                        + gsq * c[k];
            }
        }
    }
    out
}

/// Configuration of a full-map run.
#[derive(Debug, Clone, Default)]
pub struct MapRunConfig {
    pub controls: RunControls,
    /// Center used for the shrinking-ball energy diagnostic.
    pub ball_center: Option<[f64; 2]>,
}

/// Output of a run: diagnostics series, final state, stop reason.
#[derive(Debug)]
pub struct MapRunOutput {
    pub diagnostics: Vec<DiagRow>,
    pub final_field: MapField,
    pub stop: StopReason,
    pub steps: usize,
    pub dt: f64,
}

/// Drive the flow from `u0` until t_end, resolution loss, divergence, or the
/// step limit; diagnostics every `diag_every` steps. On divergence the field
/// from the last diagnostic time is returned.
pub fn run_map(u0: &MapField, cfg: &MapRunConfig) -> Result<MapRunOutput> {
    let g = u0.grid;
    let h = g.dr().min(g.dz());
    let dt = cfg.controls.dt_factor * h * h;
    let mut field = u0.clone();
    let mut scratch = MapScratch::default();
    let mut diagnostics = Vec::new();
    let mut last_valid = field.clone();
    let mut steps = 0usize;

    let mut stop = StopReason::MaxSteps;
    loop {
        if steps % cfg.controls.diag_every == 0 {
            if !field.is_finite() {
                stop = StopReason::NonFinite {
                    last_valid_t: last_valid.time,
                };
                field = last_valid.clone();
                break;
            }
            let row = map_diag_row(&field, cfg);
            emit_snapshot(&field, cfg, diagnostics.len());
            let lambda_cells = row.lambda_est / h;
            diagnostics.push(row);
            last_valid = field.clone();
            if cfg.controls.stop_cells > 0.0
                && lambda_cells.is_finite()
                && lambda_cells < cfg.controls.stop_cells
            {
                stop = StopReason::ResolutionLimit {
                    lambda_est: lambda_cells * h,
                    t: field.time,
                };
                break;
            }
        }
        if field.time >= cfg.controls.t_end {
            stop = StopReason::ReachedEndTime;
            break;
        }
        if steps >= cfg.controls.max_steps {
            stop = StopReason::MaxSteps;
            break;
        }
        step_map(&mut field, dt, cfg.controls.scheme, &mut scratch);
        steps += 1;
    }

    Ok(MapRunOutput {
        diagnostics,
        final_field: field,
        stop,
        steps,
        dt,
    })
}

fn map_diag_row(field: &MapField, cfg: &MapRunConfig) -> DiagRow {
    let est = detect_scale_map(field);
    let (lambda_est, xi) = match &est {
        Some(e) => (e.lambda, e.xi),
        None => (f64::NAN, [f64::NAN, f64::NAN]),
    };
    let center = cfg.ball_center.unwrap_or(xi);
    let e_total = energy_map(field, Region::All);
    let e_ball = if center[0].is_finite() && lambda_est.is_finite() {
        let g = field.grid;
        let margin = 0.45
            * (g.r_max - g.r_min)
                .min(g.z_max - g.z_min);
        let radius = (10.0 * lambda_est).min(margin);
        energy_map(field, Region::Ball { center, radius }).cross_section
    } else {
        f64::NAN
    };
    DiagRow {
        t: field.time,
        max_grad: max_grad_map(field),
        lambda_est,
        xi1_est: xi[0],
        xi2_est: xi[1],
        e_total: e_total.weighted,
        e_ball,
    }
}

fn emit_snapshot(field: &MapField, cfg: &MapRunConfig, row_index: usize) {
    if let (Some(every), Some(dir)) = (cfg.controls.snapshot_every, &cfg.controls.snapshot_dir)
    {
        if every > 0 && row_index % every == 0 {
            let path = dir.join(format!("map_{row_index:06}.csv"));
            let _ = write_map_snapshot(&path, field);
        }
    }
}
