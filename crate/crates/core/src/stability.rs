//! Stability of a resolved global solution u under a perturbation of its
//! initial datum. The admissible perturbation size is
//!     delta < (nu/8) exp(-(2/nu) int_0^inf ||u-hat(t)||_{L^1}^2 dt),
//! and the difference w then satisfies
//!     ||w(t)||_{X^{-1}} + (nu/2) int_0^t ||w||_{X^1}
//!         <= delta exp((2/nu) int_0^t ||u-hat||_{L^1}^2 ds)
//! while never leaving the ball ||w||_{X^{-1}} < nu/4.

use crate::dynamics::{self, SolverConfig, TimeSeries};
use crate::error::{Error, Result};
use crate::field::SpectralVectorField;
use crate::norms::{x_norm, NormReport};
use serde::Serialize;

/// Relative slack allowed on the monitored bound.
pub const RESIDUAL_SLACK: f64 = 1e-3;

/// Admissible perturbation size for a completed base run. The time
/// integral of ||u-hat||_{L^1}^2 is extended past t_end with an
/// exponential-tail estimate fitted to the last two records; the tail is
/// added, which only shrinks the threshold (conservative).
pub fn perturbation_threshold(base: &TimeSeries, nu: f64) -> Result<f64> {
    let last = base.last().ok_or(Error::InvalidParameter {
        name: "base",
        reason: "base run has no records".into(),
    })?;
    if base.records.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "base",
            reason: "need at least two records to estimate the tail".into(),
        });
    }
    let prev = &base.records[base.records.len() - 2];
    let (a, b) = (prev.norms.x_0, last.norms.x_0);
    let h = last.t - prev.t;
    let mut integral = last.int_l1hat_sq;
    if b > 0.0 {
        if a > b && h > 0.0 {
            // ||u-hat||_{L^1} ~ b e^{-lambda (t - t_end)} beyond the run
            let lambda = (a / b).ln() / h;
            integral += b * b / (2.0 * lambda);
        } else {
            log::warn!(
                "base run not yet decaying at t = {}; tail of the stability integral unestimated",
                last.t
            );
        }
    }
    Ok(nu / 8.0 * f64::exp(-2.0 / nu * integral))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundPoint {
    pub t: f64,
    /// ||w(t)||_{X^{-1}} + (nu/2) int_0^t ||w||_{X^1}.
    pub lhs: f64,
    /// delta exp((2/nu) int_0^t ||u-hat||_{L^1}^2).
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// ||perturbation||_{X^{-1}}.
    pub delta: f64,
    pub threshold: f64,
    /// delta < threshold held at t = 0, so the bound is guaranteed.
    pub precondition_met: bool,
    pub bound: Vec<BoundPoint>,
    pub max_residual: f64,
    /// sup over records of ||w||_{X^{-1}}.
    pub sup_w_x_m1: f64,
    /// First record time with ||w||_{X^{-1}} >= nu/4, if any.
    pub wall_t: Option<f64>,
    pub holds: bool,
}

pub struct StabilityOutcome {
    pub report: StabilityReport,
    pub base_series: TimeSeries,
    pub perturbed_series: TimeSeries,
    pub w_series: TimeSeries,
}

/// Run the base and perturbed flows side by side and monitor the
/// perturbation bound at every record.
pub fn run_stability(
    u0: &SpectralVectorField,
    perturbation: &SpectralVectorField,
    cfg: &SolverConfig,
) -> Result<StabilityOutcome> {
    let (base_series, base_fields) = dynamics::evolve_recording(u0, cfg, true)?;
    run_stability_with_base(base_series, base_fields, u0, perturbation, cfg)
}

/// Same as `run_stability`, reusing an already-computed base run.
pub fn run_stability_with_base(
    base_series: TimeSeries,
    base_fields: Vec<SpectralVectorField>,
    u0: &SpectralVectorField,
    perturbation: &SpectralVectorField,
    cfg: &SolverConfig,
) -> Result<StabilityOutcome> {
    cfg.validate()?;
    u0.grid.check_same(&perturbation.grid)?;
    let nu = cfg.nu;
    let delta = x_norm(&perturbation.dealias(), -1)?;
    let v0 = u0.add(perturbation);

    let (perturbed_series, pert_fields) = dynamics::evolve_recording(&v0, cfg, true)?;
    if base_fields.len() != pert_fields.len() {
        return Err(Error::TimeGridMismatch);
    }
    let threshold = perturbation_threshold(&base_series, nu)?;
    let precondition_met = delta < threshold;
    if !precondition_met {
        log::warn!("perturbation size {delta} is not below the threshold {threshold}");
    }

    let mut w_series = TimeSeries::new(nu, delta);
    let mut bound = Vec::with_capacity(base_fields.len());
    let mut max_residual = f64::NEG_INFINITY;
    let mut sup_w = 0.0_f64;
    let mut wall_t = None;
    for (i, rb) in base_series.records.iter().enumerate() {
        let w = pert_fields[i].sub(&base_fields[i]);
        w_series.push(rb.t, NormReport::compute(&w, 1.0)?);
        let rw = w_series.last().expect("just pushed");
        let lhs = rw.norms.x_m1 + 0.5 * nu * rw.int_x1;
        let rhs = delta * f64::exp(2.0 / nu * rb.int_l1hat_sq);
        max_residual = max_residual.max((lhs - rhs) / rhs.abs().max(1e-300));
        sup_w = sup_w.max(rw.norms.x_m1);
        if wall_t.is_none() && rw.norms.x_m1 >= nu / 4.0 {
            wall_t = Some(rb.t);
        }
        bound.push(BoundPoint { t: rb.t, lhs, rhs });
    }
    let holds = max_residual <= RESIDUAL_SLACK && wall_t.is_none();
    Ok(StabilityOutcome {
        report: StabilityReport {
            delta,
            threshold,
            precondition_met,
            bound,
            max_residual,
            sup_w_x_m1: sup_w,
            wall_t,
            holds,
        },
        base_series,
        perturbed_series,
        w_series,
    })
}
