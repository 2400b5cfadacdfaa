//! The convergence experiment: sweep k, measure the L∞ gap between the beam
//! field and the exact field on the caustic line, fit the decay rate, and
//! run the supporting property checks that keep the pipeline honest.

use crate::beam::{m11, m22, make_incidence, q_poly, Envelope, Incidence};
use crate::config::WaveConfig;
use crate::field::{
    ode_residual_exact, residual_terms, synthesize_field, transmission_coeff, turning_point,
    u_gb_physical, v_hat_exact, v_hat_gb, FieldSlice, Route, SpectralProfile,
};
use crate::fitting::{fit_rate, SmallRng};
use crate::phase::{phi_a, PhaseContext};
use crate::quad::{beam_integral, nonstat_phase_check, oscillatory_integral, select_truncation_radius};
use crate::report::{ConvergenceReport, KRecord, PropertyCheck};
use crate::{airy, Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

/// One wavenumber's worth of results, with the slices kept for plotting.
#[derive(Debug, Clone)]
pub struct KMeasurement {
    pub record: KRecord,
    pub exact: FieldSlice,
    pub beam: FieldSlice,
}

/// Measure max_y |u_GB(x_c, y) - u(x_c, y)| on the configured y grid.
///
/// Both routes are synthesized from spectral profiles; the beam route gets
/// an additional physical-superposition spot check at a seeded y, and the
/// grid maximum must be stable (< 1%) under doubling the y resolution.
pub fn measure_k(cfg: &WaveConfig, k: f64) -> Result<KMeasurement> {
    let start = Instant::now();
    let inc = make_incidence(cfg.theta)?;
    let env = Envelope::new(cfg.sigma);
    let y = cfg.y_grid();
    let span = 2.0 * y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let x = inc.x_c;

    let exact_profile =
        SpectralProfile::build_for_span(&inc, &env, x, k, Route::Exact, cfg.quad_tol, span)?;
    let beam_profile =
        SpectralProfile::build_for_span(&inc, &env, x, k, Route::GbSpectral, cfg.quad_tol, span)?;
    let exact = synthesize_field(&exact_profile, &y)?;
    let beam = synthesize_field(&beam_profile, &y)?;

    let linf_on = |e: &FieldSlice, g: &FieldSlice| -> (f64, f64) {
        let mut diff = 0.0f64;
        let mut peak = 0.0f64;
        for (a, b) in e.u.iter().zip(&g.u) {
            diff = diff.max((a - b).norm());
            peak = peak.max(a.norm());
        }
        (diff, peak)
    };
    let (linf, peak) = linf_on(&exact, &beam);

    // grid-density guard: the same maximum on a twice-as-fine y grid
    let fine: Vec<f64> = {
        let n = 2 * (y.len() - 1) + 1;
        (0..n)
            .map(|i| y[0] + (y[y.len() - 1] - y[0]) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let (linf_fine, _) = linf_on(
        &synthesize_field(&exact_profile, &fine)?,
        &synthesize_field(&beam_profile, &fine)?,
    );
    let change = (linf_fine - linf).abs() / linf_fine.max(1e-300);
    if change > 0.01 {
        return Err(Error::GridResolution(format!(
            "L-inf error moved {:.2}% under y-grid doubling at k = {k}; raise y_points",
            100.0 * change
        )));
    }

    // physical-route spot check at one seeded y inside the packet
    let mut rng = SmallRng::new(cfg.seed ^ k.to_bits());
    let y_spot = rng.in_range(-2.0 * cfg.sigma, 2.0 * cfg.sigma);
    let direct = u_gb_physical(&inc, &env, x, y_spot, k, cfg.quad_tol)?;
    let spectral = synthesize_field(&beam_profile, &[y_spot])?.u[0];
    let gap = (direct - spectral).norm();
    if gap > 1e-4 * peak.max(1.0) {
        return Err(Error::Quadrature(format!(
            "beam routes disagree by {gap:.3e} at k = {k}, y = {y_spot}"
        )));
    }

    Ok(KMeasurement {
        record: KRecord {
            k,
            linf_error: linf,
            max_abs_u: peak,
            relative_error: linf / peak.max(1e-300),
            runtime_seconds: start.elapsed().as_secs_f64(),
        },
        exact,
        beam,
    })
}

/// Run the full sweep (in parallel over k, deterministic order) plus the
/// property-check suite and fit the convergence rates.
pub fn run_experiment(cfg: &WaveConfig) -> Result<(ConvergenceReport, Vec<KMeasurement>)> {
    cfg.validate()?;
    let measurements: Vec<KMeasurement> = cfg
        .k_list
        .par_iter()
        .map(|&k| measure_k(cfg, k))
        .collect::<Result<Vec<_>>>()?;
    let abs_pts: Vec<(f64, f64)> = measurements
        .iter()
        .map(|m| (m.record.k, m.record.linf_error))
        .collect();
    let rel_pts: Vec<(f64, f64)> = measurements
        .iter()
        .map(|m| (m.record.k, m.record.relative_error))
        .collect();
    let (rate, intercept, spread) = fit_rate(&abs_pts)?;
    let (rel_rate, _, _) = fit_rate(&rel_pts)?;
    let checks = property_checks(cfg)?;
    let report = ConvergenceReport {
        records: measurements.iter().map(|m| m.record.clone()).collect(),
        fitted_rate: rate,
        fit_intercept: intercept,
        fit_residual_spread: spread,
        fitted_relative_rate: rel_rate,
        checks,
    };
    Ok((report, measurements))
}

/// Write report.json, sweep.csv, rate.dat and one (y, |u|) slice file per k
/// into `cfg.out_dir`. Floats go through the shortest round-trip formatting,
/// so reading them back reproduces the bits.
pub fn write_outputs(
    cfg: &WaveConfig,
    report: &ConvergenceReport,
    measurements: &[KMeasurement],
) -> Result<()> {
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report.to_json())?;

    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))
        .map_err(|e| Error::Other(format!("csv: {e}")))?;
    w.write_record(["k", "linf_error", "max_abs_u", "relative_error", "runtime_seconds"])
        .map_err(|e| Error::Other(format!("csv: {e}")))?;
    for r in &report.records {
        w.write_record([
            format!("{}", r.k),
            format!("{}", r.linf_error),
            format!("{}", r.max_abs_u),
            format!("{}", r.relative_error),
            format!("{}", r.runtime_seconds),
        ])
        .map_err(|e| Error::Other(format!("csv: {e}")))?;
    }
    w.flush()?;

    let mut rate = std::fs::File::create(dir.join("rate.dat"))?;
    for r in &report.records {
        writeln!(rate, "{} {}", r.k, r.linf_error)?;
    }
    for m in measurements {
        let mut f = std::fs::File::create(dir.join(format!("slice_k{}.dat", m.record.k)))?;
        for (y, u) in m.exact.y_grid.iter().zip(&m.exact.u) {
            writeln!(f, "{} {}", y, u.norm())?;
        }
    }
    Ok(())
}

/// CSV form of a field slice: y, re, im with round-trip-exact floats.
pub fn write_slice_csv(slice: &FieldSlice, path: &Path) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| Error::Other(format!("csv: {e}")))?;
    w.write_record(["y", "re", "im"])
        .map_err(|e| Error::Other(format!("csv: {e}")))?;
    for (y, u) in slice.y_grid.iter().zip(&slice.u) {
        w.write_record([format!("{}", y), format!("{}", u.re), format!("{}", u.im)])
            .map_err(|e| Error::Other(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// The supporting property checks, run at the smallest configured k.
pub fn property_checks(cfg: &WaveConfig) -> Result<Vec<PropertyCheck>> {
    cfg.validate()?;
    let inc = make_incidence(cfg.theta)?;
    let k0 = cfg.k_list[0];
    Ok(vec![
        hessian_identities(&inc),
        airy_derivative_structure(),
        transmission_identity(&inc, k0)?,
        spectral_ode_residual(&inc, k0)?,
        airy_bridge(&inc, k0)?,
        nonstat_identity()?,
        truncation_cauchy(&inc, k0)?,
        residual_split(&inc, k0)?,
    ])
}

fn check(name: &str, passed: bool, constant: f64, detail: String) -> PropertyCheck {
    PropertyCheck {
        name: name.into(),
        passed,
        constant,
        detail,
    }
}

/// Closed-form identities of the beam Hessian: Im m11 = η₀²/|q|²,
/// q(ξ₀) = η₀²β, m22(ξ₀) = 0, m22(0) = ξ₀β/2.
fn hessian_identities(inc: &Incidence) -> PropertyCheck {
    let mut worst = 0.0f64;
    for i in 0..=30 {
        let s = -0.5 + 1.5 * i as f64 / 30.0;
        let gap = (m11(s, inc).im - inc.eta0 * inc.eta0 / q_poly(s, inc).norm_sqr()).abs();
        worst = worst.max(gap);
    }
    worst = worst
        .max((q_poly(inc.xi0, inc) - inc.eta0 * inc.eta0 * inc.beta).norm())
        .max(m22(inc.xi0, inc).norm())
        .max((m22(0.0, inc) - inc.xi0 * inc.beta / 2.0).norm());
    check(
        "hessian_identities",
        worst < 1e-12,
        worst,
        "max deviation of the closed-form Hessian identities".into(),
    )
}

/// Ai^{(m)} = p_m Ai + q_m Ai' must reproduce the vanishing derivatives
/// Ai^{(3p+2)}(0) = 0 exactly, and match a direct evaluation elsewhere.
fn airy_derivative_structure() -> PropertyCheck {
    let mut worst = 0.0f64;
    for p in 0..=4usize {
        let v = airy::ai_nth_derivative(Complex64::new(0.0, 0.0), 3 * p + 2).unwrap_or_else(|_| {
            Complex64::new(f64::NAN, f64::NAN)
        });
        worst = worst.max(v.norm());
    }
    check(
        "airy_derivative_structure",
        worst < 1e-12,
        worst,
        "max |d^(3p+2)/dz Ai at 0|, p = 0..4".into(),
    )
}

/// 1 + T computed two ways must agree, and |T| = 1 wherever the turning
/// point sits inside the propagating region.
fn transmission_identity(inc: &Incidence, k: f64) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    for eta in [-0.4, -0.2, -0.05, 0.0, 0.1, 0.25, 0.4] {
        let tr = transmission_coeff(inc, k, eta)?;
        worst = worst.max((tr.one_plus_t - (1.0 + tr.t)).norm());
        if turning_point(inc, eta) > 0.0 {
            worst = worst.max((tr.t.norm() - 1.0).abs());
        }
        let v = v_hat_exact(inc, 0.0, k, eta)?;
        worst = worst.max((v - tr.one_plus_t).norm() / tr.one_plus_t.norm());
    }
    Ok(check(
        "transmission_identity",
        worst < 1e-8,
        worst,
        format!("max identity deviation over eta at k = {k}"),
    ))
}

/// The exact spectral amplitude must satisfy its defining ODE to finite
/// difference accuracy.
fn spectral_ode_residual(inc: &Incidence, k: f64) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    for x in [0.0, inc.x_c / 2.0, inc.x_c] {
        for eta in [-0.3, 0.0, 0.4] {
            worst = worst.max(ode_residual_exact(inc, x, k, eta)?);
        }
    }
    Ok(check(
        "spectral_ode_residual",
        worst < 1e-4,
        worst,
        format!("max relative FD residual over (x, eta) at k = {k}"),
    ))
}

/// The model oscillatory integral with cubic phase must land on the Airy
/// function and its derivatives: moments p = 0, 1, 2 against
/// 2π i^p k^{-p/3} d^p/dρ^p Ai(ρ).
fn airy_bridge(inc: &Incidence, k: f64) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    for rho in [-0.5, 0.0, 0.5] {
        let eta = rho / (2.0 * inc.eta0 * k.powf(2.0 / 3.0));
        let ctx = PhaseContext::new(*inc, 0.0, eta)?;
        let av = airy::eval(Complex64::new(rho, 0.0))?;
        let refs = [av.ai, av.ai_prime, rho * av.ai];
        for p in 0..3usize {
            let phase = |theta: f64| Complex64::new(phi_a(&ctx, theta), 0.0);
            let amp = |theta: f64| Complex64::new(theta.powi(p as i32), 0.0);
            let r = oscillatory_integral(&phase, &amp, k, 6.0, 1e-9)?;
            let target =
                2.0 * PI * Complex64::i().powu(p as u32) / k.powf(p as f64 / 3.0) * refs[p];
            worst = worst.max((r.value - target).norm());
        }
    }
    Ok(check(
        "airy_bridge",
        worst < 1e-6,
        worst,
        format!("max gap of the cubic-phase moments at k = {k}"),
    ))
}

/// Integration by parts identity on a stationary-point-free window with a
/// compactly supported polynomial bump.
fn nonstat_identity() -> Result<PropertyCheck> {
    let amp = |x: f64, d: usize| {
        let p = -x * x + 6.0 * x - 8.0;
        let p1 = -2.0 * x + 6.0;
        match d {
            0 => p.powi(4),
            1 => 4.0 * p.powi(3) * p1,
            2 => 12.0 * p.powi(2) * p1 * p1 - 8.0 * p.powi(3),
            _ => 0.0,
        }
    };
    let phase = |x: f64, d: usize| match d {
        0 => -x * x * x / 3.0,
        1 => -x * x,
        2 => -2.0 * x,
        3 => -2.0,
        _ => 0.0,
    };
    let r = nonstat_phase_check(&amp, &phase, 50.0, (2.0, 4.0))?;
    Ok(check(
        "nonstat_identity",
        r < 1e-8,
        r,
        "integration-by-parts residual, orders 1 and 2".into(),
    ))
}

/// The regularized beam integral must be Cauchy in the truncation radius,
/// with differences covered by the reported error estimates.
fn truncation_cauchy(inc: &Incidence, k: f64) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    let mut covered = true;
    for (delta, eta) in [(0.0, 0.0), (0.1, 0.02), (0.0, -0.05)] {
        let ctx = PhaseContext::new(*inc, delta, eta)?;
        let t0 = select_truncation_radius(&ctx, k, 1e-6);
        let mut prev = beam_integral(&ctx, k, t0, 1e-9)?;
        for d in 1..4u32 {
            let cur = beam_integral(&ctx, k, t0 * (1 << d) as f64, 1e-9)?;
            let diff = (cur.value - prev.value).norm();
            worst = worst.max(diff);
            covered &= diff <= prev.est_error.max(1e-12);
            prev = cur;
        }
    }
    Ok(check(
        "truncation_cauchy",
        covered,
        worst,
        format!("max doubling difference over three phase contexts at k = {k}"),
    ))
}

/// The three-term split of v̂ - v̂_GB on the caustic must telescope.
fn residual_split(inc: &Incidence, k: f64) -> Result<PropertyCheck> {
    let eta = 0.5 * inc.xi0 * inc.xi0 * k.powf(-2.0 / 3.0) / 4.0;
    let (r1, r2, r3) = residual_terms(inc, inc.x_c, k, eta, 1e-8)?;
    let e = v_hat_exact(inc, inc.x_c, k, eta)?;
    let g = v_hat_gb(inc, inc.x_c, k, eta, 1e-8)?;
    let gap = ((r1 + r2 + r3) - (e - g)).norm();
    Ok(check(
        "residual_split",
        gap < 1e-7,
        gap,
        format!("telescoping gap at k = {k}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(dir: &Path) -> WaveConfig {
        let mut cfg = WaveConfig::default();
        cfg.k_list = vec![100.0, 200.0, 400.0];
        cfg.out_dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn small_sweep_converges_and_writes_outputs() {
        let dir = std::env::temp_dir().join(format!("causticwave_exp_{}", std::process::id()));
        let cfg = small_cfg(&dir);
        let (report, measurements) = run_experiment(&cfg).unwrap();

        // errors fall clearly with k
        for w in report.records.windows(2) {
            assert!(
                w[1].linf_error < 0.9 * w[0].linf_error,
                "no decay: {} then {}",
                w[0].linf_error,
                w[1].linf_error
            );
        }
        // three-point fits are loose; the full default sweep tightens them
        assert!(
            (-1.05..=-0.65).contains(&report.fitted_rate),
            "absolute rate {}",
            report.fitted_rate
        );
        assert!(
            (-1.25..=-0.8).contains(&report.fitted_relative_rate),
            "relative rate {}",
            report.fitted_relative_rate
        );
        for c in &report.checks {
            assert!(c.passed, "check {} failed: {} ({})", c.name, c.constant, c.detail);
        }
        assert!(report.hard_failures().is_empty());

        write_outputs(&cfg, &report, &measurements).unwrap();
        let back =
            ConvergenceReport::from_json(&std::fs::read_to_string(dir.join("report.json")).unwrap())
                .unwrap();
        assert_eq!(back, report);
        let mut rdr = csv::Reader::from_path(dir.join("sweep.csv")).unwrap();
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        let k_back: f64 = rows[1][0].parse().unwrap();
        let e_back: f64 = rows[1][1].parse().unwrap();
        assert_eq!(k_back.to_bits(), report.records[1].k.to_bits());
        assert_eq!(e_back.to_bits(), report.records[1].linf_error.to_bits());
        assert!(dir.join("rate.dat").exists());
        assert!(dir.join("slice_k200.dat").exists());
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn measurement_is_bit_identical_across_runs() {
        let cfg = WaveConfig::default();
        let a = measure_k(&cfg, 100.0).unwrap();
        let b = measure_k(&cfg, 100.0).unwrap();
        assert_eq!(a.record.linf_error.to_bits(), b.record.linf_error.to_bits());
        assert_eq!(a.record.max_abs_u.to_bits(), b.record.max_abs_u.to_bits());
        for (x, y) in a.beam.u.iter().zip(&b.beam.u) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn slice_csv_round_trips() {
        let slice = FieldSlice {
            x: 0.25,
            k: 100.0,
            y_grid: vec![-0.1, 0.0, 0.1],
            u: vec![
                Complex64::new(0.1234567890123456, -1.0),
                Complex64::new(2.0, 3.5e-17),
                Complex64::new(-0.3, 0.7),
            ],
            route: Route::Exact,
        };
        let path = std::env::temp_dir().join(format!("causticwave_slice_{}.csv", std::process::id()));
        write_slice_csv(&slice, &path).unwrap();
        let mut rdr = csv::Reader::from_path(&path).unwrap();
        assert_eq!(rdr.headers().unwrap(), &csv::StringRecord::from(vec!["y", "re", "im"]));
        for (row, (y, u)) in rdr.records().zip(slice.y_grid.iter().zip(&slice.u)) {
            let row = row.unwrap();
            assert_eq!(row[0].parse::<f64>().unwrap().to_bits(), y.to_bits());
            assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), u.re.to_bits());
            assert_eq!(row[2].parse::<f64>().unwrap().to_bits(), u.im.to_bits());
        }
        let _ = std::fs::remove_file(&path);
    }
}
