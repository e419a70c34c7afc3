//! Cross-check of the radial-quadrature norms against plain 3-D midpoint
//! Riemann sums over a Cartesian frequency box. Slow but entirely
//! independent of the 1-D reduction and the adaptive quadrature.

use nsx_core::continuum::{radial_hs_sq, radial_x_norm, RadialProfile};

/// Midpoint sum of w(|xi|) phi(|xi|)^p over [-extent, extent]^3.
fn riemann_sum_3d(
    phi: &dyn Fn(f64) -> f64,
    weight_exponent: f64,
    phi_power: i32,
    extent: f64,
    h: f64,
) -> f64 {
    let m = (extent / h).round() as i64;
    let mut total = 0.0;
    for ix in -m..m {
        let x = (ix as f64 + 0.5) * h;
        for iy in -m..m {
            let y = (iy as f64 + 0.5) * h;
            let mut line = 0.0;
            for iz in -m..m {
                let z = (iz as f64 + 0.5) * h;
                let r = (x * x + y * y + z * z).sqrt();
                line += r.powf(weight_exponent) * phi(r).powi(phi_power);
            }
            total += line;
        }
    }
    total * h * h * h
}

#[test]
fn gaussian_x_norms_match_riemann_sums() {
    let gauss = |r: f64| (-r * r).exp();
    let profile = RadialProfile::func(gauss, 0.0, f64::INFINITY);
    for s in [0.0, 1.0, 2.0] {
        let radial = radial_x_norm(&profile, s).finite().unwrap();
        let riemann = riemann_sum_3d(&gauss, s, 1, 6.0, 0.05);
        let rel = (radial - riemann).abs() / radial;
        assert!(rel <= 1e-4, "s = {s}: radial {radial} vs riemann {riemann}");
    }
}

#[test]
fn gaussian_sobolev_energy_matches_riemann_sum() {
    let gauss = |r: f64| (-r * r).exp();
    let profile = RadialProfile::func(gauss, 0.0, f64::INFINITY);
    let radial = radial_hs_sq(&profile, 1.0).finite().unwrap();
    let riemann = riemann_sum_3d(&gauss, 2.0, 2, 6.0, 0.05);
    let rel = (radial - riemann).abs() / radial;
    assert!(rel <= 1e-4, "radial {radial} vs riemann {riemann}");
}

#[test]
fn closed_form_powers_match_quadrature_path() {
    // the same radial function fed through the piecewise-power closed form
    // and through the generic adaptive-quadrature path must agree
    let power = RadialProfile::power(0.5, 2.0, 1.0, -1.5);
    let func = RadialProfile::func(|r| r.powf(-1.5), 0.5, 2.0);
    for s in [-1.0, 0.0, 1.0, 2.0] {
        let a = radial_x_norm(&power, s).finite().unwrap();
        let b = radial_x_norm(&func, s).finite().unwrap();
        assert!((a - b).abs() <= 1e-7 * a.abs(), "s = {s}: {a} vs {b}");
    }
    let a = radial_hs_sq(&power, 0.5).finite().unwrap();
    let b = radial_hs_sq(&func, 0.5).finite().unwrap();
    assert!((a - b).abs() <= 1e-7 * a.abs());
}
