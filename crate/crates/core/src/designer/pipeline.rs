use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    best_sample, build_subspace, extract_moments, retract_p2, solve_p1, ExtractionMode, P1Options, Retraction,
    RetractionModel, RetractionOptions, RetractionProblem, SdpSolution, DEFAULT_SAMPLE_DRAWS,
};
use crate::channel::Scenario;
use crate::crb::{location_fim, peb, PebValue};
use crate::em::{
    audit_array, build_coupling_matrix, contraction, excitation_vector, passivity_limit, solve_dipoles_exact, PolarizabilityVector,
    DEFAULT_CONDITION_CAP,
};
use crate::error::{Error, Result};
use crate::linalg::{vec_norm, CMatrix, ComplexLu, CVector};
use crate::scalar::{lit, Real};

/// Trace budget of the relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TraceBudget {
    /// `N C^2`.
    PassivityLimit,
    Absolute(f64),
    /// `||m(F_max)||^2`, the power of the exact moments with every element at
    /// its passivity limit.
    #[default]
    Achievable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelChoice {
    Neumann,
    LocalField,
    /// Neumann when its contraction at the passivity limit is below one,
    /// the local-field model otherwise.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub p1: P1Options,
    pub extraction: ExtractionMode,
    /// Draws ranked in sample mode.
    pub sample_draws: usize,
    pub seed: u64,
    pub budget: TraceBudget,
    pub model: ModelChoice,
    pub retraction: RetractionOptions,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            p1: P1Options::default(),
            extraction: ExtractionMode::RankOne,
            sample_draws: DEFAULT_SAMPLE_DRAWS,
            seed: 0,
            budget: TraceBudget::default(),
            model: ModelChoice::default(),
            retraction: RetractionOptions::default(),
        }
    }
}

/// Panel quantities that do not depend on the strengths.
#[derive(Debug, Clone)]
pub struct DesignContext<T: Real> {
    pub coupling: CMatrix<T>,
    pub excitation: CVector<T>,
    /// Passivity constant `C`.
    pub passivity: T,
    /// Per-element `Gamma_n / (C w)`.
    pub limits: Vec<T>,
}

impl<T: Real> DesignContext<T> {
    pub fn new(scenario: &Scenario<T>) -> Result<Self> {
        scenario.validate()?;
        Ok(Self {
            coupling: build_coupling_matrix(&scenario.op, &scenario.panel)?.g,
            excitation: excitation_vector(&scenario.op, &scenario.panel)?.hf,
            passivity: passivity_limit(&scenario.op, scenario.panel.height),
            limits: scenario.strength_limits(),
        })
    }

    /// Exact moments for the given strengths.
    pub fn moments(&self, scenario: &Scenario<T>, strengths: &[T]) -> Result<CVector<T>> {
        let alpha = scenario.polarizabilities(strengths)?;
        Ok(solve_dipoles_exact(&self.coupling, &alpha, &self.excitation, lit(DEFAULT_CONDITION_CAP))?.moments)
    }

    /// `||G^-1 diag(alpha)^-1||_2` with every element at its limit.
    pub fn contraction(&self, scenario: &Scenario<T>) -> Result<T> {
        let alpha = scenario.polarizabilities(&self.limits)?;
        Ok(contraction(&ComplexLu::new(&self.coupling, "coupling matrix")?, &alpha.inverse()))
    }

    /// Passivity audit of the exact solution; true when every element passes.
    pub fn passive(&self, scenario: &Scenario<T>, strengths: &[T], moments: &CVector<T>) -> Result<bool> {
        let alpha = scenario.polarizabilities(strengths)?;
        let audits = audit_array(&scenario.op, scenario.panel.height, &alpha.0, moments)?;
        Ok(strengths.iter().zip(&self.limits).all(|(f, l)| *f > T::zero() && f <= l) && audits.iter().all(|a| a.passes()))
    }
}

#[derive(Debug, Clone)]
pub struct DesignResult<T: Real> {
    pub strengths: Vec<T>,
    /// Exact moments under the designed polarizabilities.
    pub moments: CVector<T>,
    /// Extracted target moments.
    pub target: CVector<T>,
    pub relaxation: SdpSolution<T>,
    pub retraction: Retraction<T>,
    pub budget: T,
    pub contraction: T,
    /// Relaxation bound, m.
    pub bound: T,
    /// PEB of the exact moments, m.
    pub achieved: PebValue<T>,
    /// PEB of the extracted moments used directly, m.
    pub fully_digital: PebValue<T>,
    /// `||m - m_opt e^{j phase}|| / ||m_opt||` under the exact model.
    pub exact_residual: T,
    pub passive: bool,
}

/// Bound and achieved error bound of a design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignEvaluation<T> {
    pub bound: T,
    pub achieved: PebValue<T>,
    /// `achieved / bound - 1`.
    pub gap: T,
}

fn moment_peb<T: Real>(scenario: &Scenario<T>, m: &CVector<T>) -> Result<PebValue<T>> {
    peb(&location_fim(scenario, m)?)
}

/// Relaxation, extraction, retraction and exact evaluation.
pub fn design<T: Real>(scenario: &Scenario<T>, ctx: &DesignContext<T>, options: &DesignOptions) -> Result<DesignResult<T>> {
    let n = scenario.num_elements();
    let budget = match options.budget {
        TraceBudget::PassivityLimit => lit::<T>(n as f64) * ctx.passivity * ctx.passivity,
        TraceBudget::Absolute(v) => lit(v),
        TraceBudget::Achievable => ctx.moments(scenario, &ctx.limits)?.norm_squared(),
    };
    let basis = build_subspace(&scenario.op, &scenario.panel, &scenario.targets)?;
    let relaxation = solve_p1(scenario, &basis, budget, &options.p1)?;
    let target = match options.extraction {
        ExtractionMode::RankOne => extract_moments(&relaxation, ExtractionMode::RankOne, options.seed)?,
        ExtractionMode::Sample => best_sample(scenario, &relaxation, options.seed, options.sample_draws)?,
    };
    let contraction = ctx.contraction(scenario)?;
    let model = match options.model {
        ModelChoice::Neumann => RetractionModel::Neumann,
        ModelChoice::LocalField => RetractionModel::LocalField,
        ModelChoice::Auto if contraction < T::one() => RetractionModel::Neumann,
        ModelChoice::Auto => RetractionModel::LocalField,
    };
    let problem = RetractionProblem {
        target: &target,
        coupling: &ctx.coupling,
        excitation: &ctx.excitation,
        damping: &scenario.damping,
        omega: scenario.op.omega,
        passivity: ctx.passivity,
    };
    let retraction = retract_p2(&problem, &RetractionOptions { model, ..options.retraction })?;
    let moments = ctx.moments(scenario, &retraction.strengths)?;
    let passive = ctx.passive(scenario, &retraction.strengths, &moments)?;
    let rot = Complex::new(retraction.phase.cos(), retraction.phase.sin());
    let exact_residual = vec_norm(&(&moments - &target * rot)) / vec_norm(&target);
    Ok(DesignResult {
        strengths: retraction.strengths.clone(),
        achieved: moment_peb(scenario, &moments)?,
        fully_digital: moment_peb(scenario, &target)?,
        bound: relaxation.bound,
        moments,
        target,
        relaxation,
        retraction,
        budget,
        contraction,
        exact_residual,
        passive,
    })
}

/// Recomputes the achieved error bound from the strengths alone.
pub fn evaluate_design<T: Real>(
    scenario: &Scenario<T>,
    ctx: &DesignContext<T>,
    result: &DesignResult<T>,
) -> Result<DesignEvaluation<T>> {
    if !ctx.passive(scenario, &result.strengths, &ctx.moments(scenario, &result.strengths)?)? {
        return Err(Error::domain("design violates the passivity bound"));
    }
    let achieved = moment_peb(scenario, &ctx.moments(scenario, &result.strengths)?)?;
    Ok(DesignEvaluation { bound: result.bound, gap: achieved.peb / result.bound - T::one(), achieved })
}

/// Error bound with strengths drawn uniformly from `(0, Gamma_n / (C w)]`.
pub fn random_strength_peb<T: Real>(scenario: &Scenario<T>, ctx: &DesignContext<T>, seed: u64) -> Result<PebValue<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strengths: Vec<T> = ctx
        .limits
        .iter()
        .map(|&l| {
            // (0, 1]
            let u: f64 = 1.0 - rng.random::<f64>();
            l * lit(u)
        })
        .collect();
    moment_peb(scenario, &ctx.moments(scenario, &strengths)?)
}

/// Error bound of the given strengths under the exact model.
pub fn strength_peb<T: Real>(scenario: &Scenario<T>, ctx: &DesignContext<T>, strengths: &[T]) -> Result<PebValue<T>> {
    let _ = PolarizabilityVector::resonant(strengths, scenario.op.omega, &scenario.damping)?;
    moment_peb(scenario, &ctx.moments(scenario, strengths)?)
}
