//! Run configuration and the default tolerances.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use pepkit::fclass::ClassParams;
use pepkit::pep::{InitialCondition, PepSpec, Variant};
use pepkit::rational::{parse_decimal_exact, parse_rational, to_f64};
use pepkit::sdp::SolveOptions;

use crate::error::CliError;

/// Every tolerance used by the commands. Reports echo the values in effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative duality gap for `solve`.
    pub sdp_gap: f64,
    /// Relative primal/dual infeasibility.
    pub sdp_feas: f64,
    pub sdp_max_iter: usize,
    /// Relative duality gap for `duals`; dual values converge more slowly
    /// than the objective.
    pub duals_gap: f64,
    /// `|optimum - analytic|` accepted by `solve`.
    pub bound: f64,
    /// Numeric vs closed-form multiplier.
    pub dual_match: f64,
    /// Per-step ratio on the exact line-search example.
    pub ratio_exact: f64,
    /// Per-step ratio on the noisy example and slack for noisy random runs.
    pub ratio_noisy: f64,
    /// Slack above the rate for random exact line-search runs.
    pub guarantee: f64,
    /// Relative slack of the fixed-step function-value bound.
    pub nesterov_rel: f64,
    /// Truncated square-root path of the symmetric certificate check.
    pub symmetric: f64,
    pub symmetric_digits: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sdp_gap: 1e-9,
            sdp_feas: 1e-9,
            sdp_max_iter: 200,
            duals_gap: 1e-10,
            bound: 1e-6,
            dual_match: 1e-5,
            ratio_exact: 1e-12,
            ratio_noisy: 1e-10,
            guarantee: 1e-12,
            nesterov_rel: 1e-10,
            symmetric: 1e-30,
            symmetric_digits: pepkit::certify::SYMMETRIC_DIGITS,
        }
    }
}

impl Tolerances {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol_gap: self.sdp_gap,
            tol_feas: self.sdp_feas,
            max_iter: self.sdp_max_iter,
        }
    }

    pub fn duals_options(&self) -> SolveOptions {
        SolveOptions {
            tol_gap: self.duals_gap,
            ..self.solve_options()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    ExactLs,
    FixedStep,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitialArg {
    #[default]
    FunctionGap,
    Distance,
}

impl From<InitialArg> for InitialCondition {
    fn from(a: InitialArg) -> Self {
        match a {
            InitialArg::FunctionGap => InitialCondition::FunctionGap,
            InitialArg::Distance => InitialCondition::DistanceSq,
        }
    }
}

/// A number given on the command line, kept both exactly and as `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Number {
    pub text: String,
    pub exact: BigRational,
    pub value: f64,
}

impl Number {
    /// Accepts decimals and `p/q`.
    pub fn parse(name: &str, text: &str) -> Result<Self, CliError> {
        let exact = parse_decimal_exact(text).map_err(|e| CliError::Input(format!("--{name}: {e}")))?;
        Ok(Self::from_exact(text, exact))
    }

    /// Accepts only integers and `p/q`.
    pub fn parse_strict(name: &str, text: &str) -> Result<Self, CliError> {
        let exact = parse_rational(text).map_err(|e| {
            CliError::Input(format!("--{name}: {e}; certificate inputs must be integers or p/q"))
        })?;
        Ok(Self::from_exact(text, exact))
    }

    fn from_exact(text: &str, exact: BigRational) -> Self {
        Self {
            text: text.trim().to_string(),
            value: to_f64(&exact),
            exact,
        }
    }
}

/// Parameters of a PEP run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mu: Number,
    pub l: Number,
    pub eps: Option<Number>,
    pub n: usize,
    pub r: f64,
    pub variant: VariantArg,
    pub initial: InitialArg,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn params(&self) -> Result<ClassParams, CliError> {
        Ok(ClassParams::new(self.mu.value, self.l.value)?)
    }

    pub fn variant(&self) -> Result<Variant, CliError> {
        Ok(match self.variant {
            VariantArg::ExactLs => Variant::ExactLsRelaxed,
            VariantArg::FixedStep => Variant::FixedStep,
            VariantArg::Noisy => {
                let eps = self
                    .eps
                    .as_ref()
                    .ok_or_else(|| CliError::Input("--variant noisy needs --eps".into()))?;
                Variant::Noisy(eps.value)
            }
        })
    }

    pub fn spec(&self) -> Result<PepSpec, CliError> {
        if self.eps.is_some() && self.variant != VariantArg::Noisy {
            return Err(CliError::Input("--eps only applies to --variant noisy".into()));
        }
        Ok(PepSpec::new(
            self.params()?,
            self.n,
            self.r,
            self.variant()?,
            self.initial.into(),
        )?)
    }
}
