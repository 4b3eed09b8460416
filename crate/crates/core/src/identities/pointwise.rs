use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::WarpModel;
use crate::identities::{IdentityKind, TestFunction};
use crate::report::{terms, IdentityReport, Relation};

/// Pointwise check of
/// `Δ<X,∇g> = (2-n)<∇φ,∇g> + 2φΔg + <∇Δg, X>` for a radial test function,
/// with `X = f ∂_t`. Samples where the warp vanishes are skipped.
pub fn verify_bochner(model: &WarpModel, testfn: TestFunction, samples: &[f64], tol: f64) -> Result<IdentityReport> {
    if testfn == TestFunction::Solution {
        return Err(Error::Usage("the Bochner check needs an explicit test function".into()));
    }
    let n = model.dim();
    let mut worst: Option<(f64, f64, f64, [f64; 3])> = None;
    let mut used = 0usize;
    for &t in samples {
        if t == model.interval.lo && model.warp.derivatives(t)[0].abs() <= 1e-12 {
            continue;
        }
        let d = model.eval_warp(t)?;
        if d.f <= 1e-12 {
            continue;
        }
        used += 1;
        let g = testfn.derivatives(t).expect("explicit test function");
        let q = d.f1 / d.f;
        // h = <X, ∇g> = f g'
        let h1 = d.f1 * g[1] + d.f * g[2];
        let h2 = d.f2 * g[1] + 2.0 * d.f1 * g[2] + d.f * g[3];
        let lhs = h2 + (n - 1.0) * q * h1;
        let lap_g = g[2] + (n - 1.0) * q * g[1];
        let lap_g1 = g[3] + (n - 1.0) * ((d.f2 / d.f - q * q) * g[1] + q * g[2]);
        let parts = [(2.0 - n) * d.f2 * g[1], 2.0 * d.f1 * lap_g, d.f * lap_g1];
        let rhs: f64 = parts.iter().sum();
        let scale = parts.iter().map(|p| p.abs()).sum::<f64>().max(lhs.abs()).max(1.0);
        let rel = (lhs - rhs).abs() / scale;
        if worst.is_none_or(|w| rel > w.0) {
            worst = Some((rel, lhs, rhs, parts));
        }
    }
    let (rel, lhs, rhs, parts) = worst.ok_or_else(|| Error::Usage("no Bochner sample away from the pole".into()))?;
    Ok(IdentityReport::new(
        IdentityKind::Bochner.name(),
        lhs,
        rhs,
        Relation::Equal,
        tol,
        true,
        terms([
            ("grad_phi_term", parts[0]),
            ("phi_laplacian_term", parts[1]),
            ("x_grad_laplacian_term", parts[2]),
            ("max_scaled_residual", rel),
        ]),
    )
    .require(rel <= tol, "pointwise residual too large")
    .with_note(format!("test function: {}, samples used: {used}", testfn.name())))
}

/// Isoperimetric data of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonexistenceInput {
    pub perimeter: f64,
    pub volume: f64,
    pub n: usize,
}

/// Threshold `T = -(|∂Ω|²/|Ω|²)((n-1)/(2(n-2)))((n+2)²/n)` below which no
/// overdetermined solution exists, and the discriminant of the quadratic
/// `((n-2)R/(2n(n-1))) y² + ((n+2)/n) y - c²` with `c = |Ω|/|∂Ω|`.
/// Passes iff `R > T`.
pub fn check_nonexistence_bound(input: &NonexistenceInput, r_scalar: f64, tol: f64) -> Result<IdentityReport> {
    let n = input.n as f64;
    if input.n < 3 {
        return Err(Error::Unsupported("the nonexistence bound needs n >= 3".into()));
    }
    if !(input.perimeter > 0.0 && input.volume > 0.0) {
        return Err(Error::Usage("perimeter and volume must be positive".into()));
    }
    let ratio = (input.perimeter / input.volume).powi(2);
    let threshold = -ratio * ((n - 1.0) / (2.0 * (n - 2.0))) * ((n + 2.0).powi(2) / n);
    let c = input.volume / input.perimeter;
    let discriminant = ((n + 2.0) / n).powi(2) + 2.0 * c * c * (n - 2.0) * r_scalar / (n * (n - 1.0));
    Ok(IdentityReport::new(
        IdentityKind::Nonexistence.name(),
        r_scalar,
        threshold,
        Relation::AtLeast,
        0.0,
        true,
        terms([
            ("threshold", threshold),
            ("margin", r_scalar - threshold),
            ("discriminant", discriminant),
            ("c", c),
            ("isoperimetric_ratio", ratio),
        ]),
    )
    .require(r_scalar > threshold, "scalar curvature does not exceed the threshold")
    .with_note(format!("tolerance {tol} not used: the bound is strict")))
}
