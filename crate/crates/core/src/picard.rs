//! Duhamel fixed-point solver: iterate
//! u(t) = e^{nu t Laplacian} u0 + int_0^t e^{nu (t-s) Laplacian} N(u(s)) ds
//! on a uniform time grid, with the exact heat multiplier inside the
//! integrand and trapezoidal quadrature in s. Iteration distances are
//! measured in sup_t X^{-1} + nu * L^1_t X^1, the norm in which the
//! small-data condition ||u0||_{X^{-1}} < nu contracts.

use crate::dynamics::{self, SolverConfig};
use crate::error::{Error, Result};
use crate::field::SpectralVectorField;
use crate::norms::x_norm;
use serde::Serialize;

/// A velocity trajectory sampled on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralVectorField>,
}

impl Trajectory {
    /// Pure heat flow of u0 on n_time + 1 uniform samples of [0, T].
    pub fn heat_flow(u0: &SpectralVectorField, nu: f64, t_end: f64, n_time: usize) -> Self {
        let dt = t_end / n_time as f64;
        let times: Vec<f64> = (0..=n_time).map(|i| i as f64 * dt).collect();
        let fields = times
            .iter()
            .map(|&t| dynamics::heat_propagate(u0, t, nu))
            .collect();
        Trajectory { times, fields }
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if self.times.len() != other.times.len()
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(Error::TimeGridMismatch);
        }
        Ok(())
    }
}

/// sup_t ||a - b||_{X^{-1}} + nu int_0^T ||a - b||_{X^1} dt.
pub fn mixed_norm_distance(a: &Trajectory, b: &Trajectory, nu: f64) -> Result<f64> {
    a.check_compatible(b)?;
    let mut sup = 0.0_f64;
    let mut x1_values = Vec::with_capacity(a.times.len());
    for (fa, fb) in a.fields.iter().zip(&b.fields) {
        let diff = fa.sub(fb);
        sup = sup.max(x_norm(&diff, -1)?);
        x1_values.push(x_norm(&diff, 1)?);
    }
    let dt = a.dt();
    let mut integral = 0.0;
    for w in x1_values.windows(2) {
        integral += 0.5 * dt * (w[0] + w[1]);
    }
    Ok(sup + nu * integral)
}

/// One application of the mild-solution map to a trajectory.
pub fn duhamel_map(
    traj: &Trajectory,
    u0: &SpectralVectorField,
    nu: f64,
) -> Result<Trajectory> {
    let n = traj.times.len();
    let dt = traj.dt();
    let nonlinear: Vec<SpectralVectorField> = traj
        .fields
        .iter()
        .map(dynamics::nonlinear_term)
        .collect::<Result<_>>()?;

    let mut fields = Vec::with_capacity(n);
    for i in 0..n {
        let t = traj.times[i];
        let mut out = dynamics::heat_propagate(u0, t, nu);
        if i > 0 {
            let mut integral = SpectralVectorField::zero(u0.grid);
            for (j, nj) in nonlinear.iter().enumerate().take(i + 1) {
                let weight = if j == 0 || j == i { 0.5 * dt } else { dt };
                let propagated = dynamics::heat_propagate(nj, t - traj.times[j], nu);
                integral = integral.add(&propagated.scaled(weight));
            }
            out = out.add(&integral);
        }
        if !out.is_finite() {
            return Err(Error::Unresolved { t });
        }
        fields.push(out);
    }
    Ok(Trajectory {
        times: traj.times.clone(),
        fields,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardReport {
    pub iterates: usize,
    /// Mixed-norm distance between successive iterates.
    pub diffs: Vec<f64>,
    /// Successive diff quotients.
    pub ratios: Vec<f64>,
    pub converged: bool,
}

/// Iterate the Duhamel map from the heat flow until the mixed-norm
/// difference drops below tol. Non-convergence is reported, not raised.
pub fn solve_picard(
    u0: &SpectralVectorField,
    nu: f64,
    t_end: f64,
    n_time: usize,
    max_iter: usize,
    tol: f64,
) -> Result<(Trajectory, PicardReport)> {
    if !(t_end > 0.0) || n_time == 0 {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: "need t_end > 0 and n_time >= 1".into(),
        });
    }
    let u0 = u0.dealias();
    let mut current = Trajectory::heat_flow(&u0, nu, t_end, n_time);
    let mut diffs = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = duhamel_map(&current, &u0, nu)?;
        let diff = mixed_norm_distance(&next, &current, nu)?;
        diffs.push(diff);
        current = next;
        if diff < tol {
            converged = true;
            break;
        }
    }
    let ratios: Vec<f64> = diffs
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    Ok((
        current,
        PicardReport {
            iterates: diffs.len(),
            diffs,
            ratios,
            converged,
        },
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossValidationReport {
    /// max_t ||u_picard - u_stepper||_{X^{-1}} / ||u0||_{X^{-1}}.
    pub max_rel_discrepancy: f64,
    pub picard: PicardReport,
}

/// Compare the converged Picard trajectory against the time stepper at the
/// same record times; the stepper takes `substeps` RK4 steps per Duhamel
/// sample.
pub fn cross_validate(
    u0: &SpectralVectorField,
    nu: f64,
    t_end: f64,
    n_time: usize,
    substeps: usize,
    max_iter: usize,
    tol: f64,
) -> Result<CrossValidationReport> {
    let (picard_traj, report) = solve_picard(u0, nu, t_end, n_time, max_iter, tol)?;
    let cfg = SolverConfig {
        nu,
        dt: t_end / (n_time * substeps) as f64,
        t_end,
        record_every: substeps,
    };
    let (_, stepper_fields) = dynamics::evolve_recording(&u0.dealias(), &cfg, true)?;
    if stepper_fields.len() != picard_traj.fields.len() {
        return Err(Error::TimeGridMismatch);
    }
    let scale = x_norm(&u0.dealias(), -1)?;
    let mut max_rel = 0.0_f64;
    for (p, e) in picard_traj.fields.iter().zip(&stepper_fields) {
        let diff = x_norm(&p.sub(e), -1)?;
        let rel = if scale > 0.0 { diff / scale } else { diff };
        max_rel = max_rel.max(rel);
    }
    Ok(CrossValidationReport {
        max_rel_discrepancy: max_rel,
        picard: report,
    })
}
