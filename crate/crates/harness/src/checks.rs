//! Invariant suite behind `wgms validate`: closed-form limits of the
//! Green's functions, the passivity balance, special-function identities,
//! Fisher information consistency, error-bound scaling and the two design
//! stages. Each check is timed against its own budget.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, Vector2};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgms_core::channel::Scenario;
use wgms_core::crb::{chain_rule_fim_oracle, fim_linear_in_m, finite_difference_fim, location_fim, peb, FimBlocks};
use wgms_core::designer::{
    build_subspace, retract_p2, solve_p1, DesignContext, P1Options, RetractionModel, RetractionOptions, RetractionProblem,
    SdpStatus,
};
use wgms_core::em::{
    contraction, green_fs, green_wg, passivity_limit, power_audit, solve_dipoles_exact, solve_dipoles_neumann,
    PolarizabilityVector, DEFAULT_CONDITION_CAP,
};
use wgms_core::linalg::{CVector, ComplexLu};
use wgms_core::specfun::cylinder;

use crate::config::{Config, PlacementKind};
use crate::placement::generate_placement;
use crate::seeds::TrialSeeds;
use crate::Result;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl Check {
    /// Runs `f`, failing on an error or when the time budget is exceeded.
    pub fn run(name: &'static str, limit: Duration, f: impl FnOnce() -> Result<(bool, String)>) -> Self {
        let start = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let detail = if in_time { detail } else { format!("{detail}; took {elapsed:.2?} > {limit:.0?}") };
        Self { name, passed: ok && in_time, detail, elapsed, limit }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} ({:.3} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

/// Scenario with a seeded random layout and an `rows x cols` receiver.
pub fn check_scenario(config: &Config, n: usize, rows: usize, cols: usize, targets: usize, seed: u64) -> Result<Scenario<f64>> {
    let mut c = config.clone();
    c.scenario.receiver.rows = rows;
    c.scenario.receiver.cols = cols;
    c.scenario.targets.truncate(targets);
    let seeds = TrialSeeds::new(seed, 0, 0);
    let panel = generate_placement(&c.placement_spec(PlacementKind::Random, n, seeds.trial))?;
    c.scenario(panel, &seeds)
}

/// Largest entry-wise deviation against `sqrt(J_ii J_jj)`.
pub fn normalized_gap(a: &FimBlocks<f64>, b: &FimBlocks<f64>) -> f64 {
    let n = a.matrix.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = (a.matrix[(i, i)] * a.matrix[(j, j)]).sqrt();
            worst = worst.max((a.matrix[(i, j)] - b.matrix[(i, j)]).abs() / s);
        }
    }
    worst
}

pub fn greens_limits(config: &Config) -> Check {
    Check::run("green's function singular limits", secs(1), || {
        let op = config.operating_point()?;
        let h = config.scenario.panel.height_wavelengths * op.wavelength;
        let k = op.wavenumber;
        let delta = Vector2::new(0.01 / k, 0.0);
        let wg = green_wg(&op, h, &delta)?.im * (-8.0 * h / (k * k));
        let fs = green_fs(&op, &delta)?.im * (-3.0 * std::f64::consts::PI / (k * k * k));
        let ok = (wg - 1.0).abs() <= 1e-3 && (fs - 1.0).abs() <= 1e-3;
        Ok((ok, format!("waveguide {wg:.9}, free space {fs:.9}")))
    })
}

pub fn passivity_balance(config: &Config) -> Check {
    Check::run("passivity power balance", secs(1), || {
        let op = config.operating_point()?;
        let h = config.scenario.panel.height_wavelengths * op.wavelength;
        let gamma = config.scenario.damping_ratio * op.omega;
        let fmax = gamma / (passivity_limit(&op, h) * op.omega);
        let field = Complex::new(0.7, -1.3);
        let ratio = |f: f64| -> Result<f64> {
            let alpha = PolarizabilityVector::resonant(&[f], op.omega, &[gamma])?.0[0];
            Ok(power_audit(&op, h, alpha, field).ratio())
        };
        let (full, half) = (ratio(fmax)?, ratio(fmax / 2.0)?);
        let ok = (full - 1.0).abs() <= 1e-9 && (half - 0.5).abs() <= 1e-9;
        Ok((ok, format!("ratio at limit {full:.12}, at half {half:.12}")))
    })
}

pub fn bessel_identities() -> Check {
    Check::run("bessel wronskian and recurrence", secs(5), || {
        let mut worst_w: f64 = 0.0;
        let mut worst_r: f64 = 0.0;
        for i in 0..200 {
            let x = 1e-3 * 1e6f64.powf(i as f64 / 199.0);
            let c = cylinder(x)?;
            let expected = 2.0 / (std::f64::consts::PI * x);
            for nu in 0..2 {
                let w = c.j[nu + 1] * c.y[nu] - c.j[nu] * c.y[nu + 1];
                worst_w = worst_w.max((w - expected).abs() / expected);
            }
            let j2 = 2.0 / x * c.j[1] - c.j[0];
            let y2 = 2.0 / x * c.y[1] - c.y[0];
            let js = c.j[2].abs().max(2.0 / x * c.j[1].abs());
            let ys = c.y[2].abs().max(2.0 / x * c.y[1].abs());
            worst_r = worst_r.max((j2 - c.j[2]).abs() / js).max((y2 - c.y[2]).abs() / ys);
        }
        Ok((worst_w <= 1e-9 && worst_r <= 1e-9, format!("wronskian {worst_w:.2e}, recurrence {worst_r:.2e}")))
    })
}

/// Moments of the panel with every element at its passivity limit.
fn limit_moments(s: &Scenario<f64>) -> Result<CVector<f64>> {
    let ctx = DesignContext::new(s)?;
    Ok(ctx.moments(s, &ctx.limits)?)
}

pub fn fim_consistency(config: &Config) -> Check {
    Check::run("fisher information consistency", secs(30), || {
        let (mut oracle, mut fd): (f64, f64) = (0.0, 0.0);
        for u in [1, 2] {
            let s = check_scenario(config, 4, 2, 2, u, 40 + u as u64)?;
            let m = limit_moments(&s)?;
            let direct = location_fim(&s, &m)?;
            oracle = oracle.max(normalized_gap(&direct, &chain_rule_fim_oracle(&s, &m)?));
            let diff = finite_difference_fim(&s, &m, 1e-4 * s.op.wavelength, 1e-4)?;
            fd = fd.max(normalized_gap(&diff, &direct)).max(normalized_gap(&diff, &chain_rule_fim_oracle(&s, &m)?));
        }
        Ok((oracle <= 1e-8 && fd <= 1e-3, format!("direct vs chain rule {oracle:.2e}, vs finite differences {fd:.2e}")))
    })
}

pub fn peb_scaling(config: &Config) -> Check {
    Check::run("error bound scaling", secs(5), || {
        let s = check_scenario(config, 16, 4, 4, 2, 50)?;
        let m = limit_moments(&s)?;
        let base = peb(&location_fim(&s, &m)?)?.peb;
        let mut s2 = s.clone();
        s2.pilots *= 2;
        let pilots = peb(&location_fim(&s2, &m)?)?.peb / base;
        let mut s4 = s.clone();
        s4.noise_variance *= 4.0;
        let noise = peb(&location_fim(&s4, &m)?)?.peb / base;
        let ok = (pilots - 0.5f64.sqrt()).abs() <= 1e-10 && (noise - 2.0).abs() <= 1e-10;
        Ok((ok, format!("2T ratio {pilots:.15}, 4 sigma^2 ratio {noise:.15}")))
    })
}

pub fn sdp_sanity(config: &Config, n: usize) -> Check {
    Check::run("relaxation sanity", secs(120), || {
        let s = check_scenario(config, n, 4, 4, 2, 60)?;
        let budget = limit_moments(&s)?.norm_squared();
        let basis = build_subspace(&s.op, &s.panel, &s.targets)?;
        let sol = solve_p1(&s, &basis, budget, &P1Options::default())?;
        let doubled = solve_p1(&s, &basis, 2.0 * budget, &P1Options::default())?;
        let residual = sol.residuals.max_violation().max(doubled.residuals.max_violation());
        let monotone = doubled.bound <= sol.bound * (1.0 + 1e-9);
        let mut worst_margin = f64::INFINITY;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cov = DMatrix::<Complex<f64>>::zeros(n, n);
            for k in 0..basis.columns() {
                let c = basis.matrix.column(k);
                cov += c * c.adjoint() * Complex::new(rng.random_range(0.0..1.0), 0.0);
            }
            cov *= Complex::new(budget / cov.trace().re, 0.0);
            let value = peb(&fim_linear_in_m(&s, &cov)?)?.peb;
            worst_margin = worst_margin.min(value / sol.bound - 1.0);
        }
        let ok = sol.status == SdpStatus::Optimal && residual <= 1e-7 && monotone && worst_margin >= -1e-9;
        Ok((
            ok,
            format!(
                "residual {residual:.2e}, bound {:.6e} -> {:.6e} at twice the budget, random covariances at least {:.3}% worse",
                sol.bound,
                doubled.bound,
                100.0 * worst_margin
            ),
        ))
    })
}

pub fn neumann_accuracy(config: &Config, n: usize) -> Check {
    Check::run("neumann approximation", secs(10), || {
        let s = check_scenario(config, n, 4, 4, 1, 70)?;
        let ctx = DesignContext::new(&s)?;
        let lu = ComplexLu::new(&ctx.coupling, "coupling matrix")?;
        let q1 = contraction(&lu, &s.polarizabilities(&ctx.limits)?.inverse());
        // strengths raised until the expansion contracts by 0.1
        let f: Vec<f64> = ctx.limits.iter().map(|l| l * q1 / 0.1).collect();
        let alpha = PolarizabilityVector::resonant(&f, s.op.omega, &s.damping)?;
        let exact = solve_dipoles_exact(&ctx.coupling, &alpha, &ctx.excitation, DEFAULT_CONDITION_CAP)?.moments;
        let approx = solve_dipoles_neumann(&ctx.coupling, &alpha, &ctx.excitation, DEFAULT_CONDITION_CAP)?;
        let q = approx.contraction.unwrap_or(f64::INFINITY);
        let err = (&approx.moments - &exact).norm() / exact.norm();
        let allowed = q * q / (1.0 - q) * 1.1;
        Ok((q <= 0.1 + 1e-9 && err <= allowed, format!("q {q:.4}, error {err:.3e}, allowed {allowed:.3e}")))
    })
}

pub fn retraction(config: &Config, n: usize) -> Check {
    Check::run("strength retraction", secs(60), || {
        let s = check_scenario(config, n, 4, 4, 2, 80)?;
        let ctx = DesignContext::new(&s)?;
        let c = ctx.passivity;
        let problem = |target| RetractionProblem {
            target,
            coupling: &ctx.coupling,
            excitation: &ctx.excitation,
            damping: &s.damping,
            omega: s.op.omega,
            passivity: c,
        };
        let neumann_target = |f: &[f64]| -> Result<CVector<f64>> {
            let alpha = PolarizabilityVector::resonant(f, s.op.omega, &s.damping)?;
            Ok(solve_dipoles_neumann(&ctx.coupling, &alpha, &ctx.excitation, DEFAULT_CONDITION_CAP)?.moments)
        };
        let neumann = RetractionOptions { model: RetractionModel::Neumann, ..Default::default() };

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let planted: Vec<f64> = ctx.limits.iter().map(|l| l * rng.random_range(0.05..1.0)).collect();
        let target = neumann_target(&planted)?;
        let r = retract_p2(&problem(&target), &neumann)?;
        let round_trip = r.strengths.iter().zip(&planted).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);

        // every third element planted past its limit
        let over: Vec<f64> = ctx.limits.iter().enumerate().map(|(i, l)| if i % 3 == 0 { 3.0 * l } else { 0.5 * l }).collect();
        let target = neumann_target(&over)?;
        let r = retract_p2(&problem(&target), &RetractionOptions { align_phase: false, ..neumann })?;
        let active = r.active.iter().filter(|a| **a).count();
        let at_bound = r
            .active
            .iter()
            .zip(&r.inverse_strengths)
            .zip(&ctx.limits)
            .all(|((a, x), l)| if *a { *x == 1.0 / l } else { *x > 1.0 / l });
        let kkt_ok = r.kkt_violation <= 1e-8 && active > 0 && at_bound;

        let mut passive = true;
        for model in [RetractionModel::Neumann, RetractionModel::LocalField] {
            let r = retract_p2(&problem(&target), &RetractionOptions { model, ..Default::default() })?;
            let m = ctx.moments(&s, &r.strengths)?;
            passive &= ctx.passive(&s, &r.strengths, &m)?;
        }
        Ok((
            round_trip <= 1e-6 && kkt_ok && passive,
            format!(
                "round trip {round_trip:.2e}, kkt {:.2e} with {active} active, passive {passive}",
                r.kkt_violation
            ),
        ))
    })
}

/// The checks run by `wgms validate`, with design checks at `n` elements.
pub fn run_all(config: &Config, n: usize) -> Vec<Check> {
    vec![
        greens_limits(config),
        passivity_balance(config),
        bessel_identities(),
        fim_consistency(config),
        peb_scaling(config),
        sdp_sanity(config, n),
        neumann_accuracy(config, n),
        retraction(config, n),
    ]
}
