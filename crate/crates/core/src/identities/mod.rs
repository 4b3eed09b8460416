//! Verifiers for the integral identities and inequalities. Each verifier
//! evaluates the two sides along separate code paths and returns an
//! [`IdentityReport`].
//!
//! Radial verifiers work on a [`RadialSolution`](crate::radial::RadialSolution)
//! and have second and third derivatives available. FEM verifiers work on a
//! P1 solution and its boundary trace and are judged by refinement.

mod fem;
mod pointwise;
mod radial;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use fem::{fem_reports, verify_fem, FemContext, FemOptions};
pub use pointwise::{check_nonexistence_bound, verify_bochner, NonexistenceInput};
pub use radial::{
    radial_reports, verify_divergence, verify_flux_curvature, verify_heintze_karcher, verify_lemma22,
    verify_main_condition, verify_minkowski, verify_minkowski_proof, verify_nonexistence_radial, verify_pfunction,
    verify_pohozaev, verify_reilly_radial, verify_soap_bubble, PohozaevMode,
};

/// Every check that can be requested by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityKind {
    Reilly,
    Hessian,
    Hk,
    Soap,
    Bochner,
    Pohozaev,
    PohozaevGeneral,
    MainCondition,
    Minkowski,
    MinkowskiProof,
    Pfunction,
    Nonexistence,
    FluxCurvature,
    Divergence,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 14] = [
        IdentityKind::Reilly,
        IdentityKind::Hessian,
        IdentityKind::Hk,
        IdentityKind::Soap,
        IdentityKind::Bochner,
        IdentityKind::Pohozaev,
        IdentityKind::PohozaevGeneral,
        IdentityKind::MainCondition,
        IdentityKind::Minkowski,
        IdentityKind::MinkowskiProof,
        IdentityKind::Pfunction,
        IdentityKind::Nonexistence,
        IdentityKind::FluxCurvature,
        IdentityKind::Divergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityKind::Reilly => "reilly",
            IdentityKind::Hessian => "hessian",
            IdentityKind::Hk => "hk",
            IdentityKind::Soap => "soap",
            IdentityKind::Bochner => "bochner",
            IdentityKind::Pohozaev => "pohozaev",
            IdentityKind::PohozaevGeneral => "pohozaev-general",
            IdentityKind::MainCondition => "main-condition",
            IdentityKind::Minkowski => "minkowski",
            IdentityKind::MinkowskiProof => "minkowski-proof",
            IdentityKind::Pfunction => "pfunction",
            IdentityKind::Nonexistence => "nonexistence",
            IdentityKind::FluxCurvature => "flux-curvature",
            IdentityKind::Divergence => "divergence",
        }
    }

    /// Checks that need second derivatives of the solution, or only the
    /// model, and therefore have no FEM counterpart.
    pub fn radial_only(self) -> bool {
        matches!(
            self,
            IdentityKind::Reilly | IdentityKind::Hessian | IdentityKind::Bochner
        )
    }

    pub fn from_name(name: &str) -> Result<IdentityKind> {
        IdentityKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Usage(format!("unknown identity '{name}'")))
    }

    /// Parses a comma-separated list; `all` expands to every identity.
    /// Duplicates are dropped and the order of first appearance is kept.
    pub fn parse_list(list: &str) -> Result<Vec<IdentityKind>> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let add: Vec<IdentityKind> = if item == "all" {
                IdentityKind::ALL.to_vec()
            } else {
                vec![IdentityKind::from_name(item)?]
            };
            for k in add {
                if !out.contains(&k) {
                    out.push(k);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::Usage("empty identity list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Radial test functions for the Reilly and Bochner checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    /// `t²`
    Square,
    /// `t²/2`
    HalfSquare,
    /// `t⁴`
    Quartic,
    Cosh,
    Exp,
    /// The solution `u` itself (Reilly only).
    Solution,
}

impl TestFunction {
    pub fn from_name(name: &str) -> Result<TestFunction> {
        match name {
            "square" => Ok(TestFunction::Square),
            "half-square" => Ok(TestFunction::HalfSquare),
            "quartic" => Ok(TestFunction::Quartic),
            "cosh" => Ok(TestFunction::Cosh),
            "exp" => Ok(TestFunction::Exp),
            "solution" => Ok(TestFunction::Solution),
            other => Err(Error::Usage(format!("unknown test function '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Square => "square",
            TestFunction::HalfSquare => "half-square",
            TestFunction::Quartic => "quartic",
            TestFunction::Cosh => "cosh",
            TestFunction::Exp => "exp",
            TestFunction::Solution => "solution",
        }
    }

    /// `(g, g', g'', g''')` at `t`; `None` for [`TestFunction::Solution`].
    pub fn derivatives(self, t: f64) -> Option<[f64; 4]> {
        Some(match self {
            TestFunction::Square => [t * t, 2.0 * t, 2.0, 0.0],
            TestFunction::HalfSquare => [0.5 * t * t, t, 1.0, 0.0],
            TestFunction::Quartic => [t.powi(4), 4.0 * t.powi(3), 12.0 * t * t, 24.0 * t],
            TestFunction::Cosh => {
                let (s, c) = (t.sinh(), t.cosh());
                [c, s, c, s]
            }
            TestFunction::Exp => [t.exp(); 4],
            TestFunction::Solution => return None,
        })
    }
}

/// Tolerances shared by the radial verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative tolerance of radial identities.
    pub radial: f64,
    /// Relative spread of `|u_ν|` below which a FEM solution counts as
    /// overdetermined, as a multiple of `h`.
    pub fem_overdet_factor: f64,
    /// Minimum fitted convergence rate of FEM defects.
    pub fem_rate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            radial: 1e-8,
            fem_overdet_factor: 0.5,
            fem_rate: 1.0,
        }
    }
}

/// Least-squares slope of `log e` against `log h`. Returns `None` when
/// fewer than two positive pairs are available.
pub fn fitted_rate(hs: &[f64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(errors)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}
