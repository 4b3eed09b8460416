//! Warped products `I ×_f N` with metric `dt² + f(t)² g_N`.
//!
//! The fiber `N` enters only through its dimension `n - 1`, its (constant)
//! scalar curvature and its volume; it is assumed Einstein. All curvature
//! quantities are evaluated in closed form from `f, f', f'', f'''`.
//!
//! The vector field `X = f ∂_t` is closed conformal with factor `φ = f'`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::report::{terms, IdentityReport};

/// Warp function catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum Warp {
    /// `f(t) = t`
    Euclidean,
    /// `f(t) = sin(√k t)/√k`, `k > 0`
    Sphere { k: f64 },
    /// `f(t) = sinh(√-k t)/√-k`, `k < 0`
    Hyperbolic { k: f64 },
    /// `f(t) = e^t`
    Exp,
    /// `f(t) = cosh t`
    Cosh,
    /// Any closed-form expression in `t`; derivatives by finite differences.
    Custom(Expr),
}

impl Warp {
    /// Parses a catalog name. `k` supplies the curvature for `sphere` and
    /// `hyperbolic`.
    pub fn from_name(name: &str, k: f64) -> Result<Warp> {
        let name = name.trim();
        if let Some(src) = name.strip_prefix("custom:") {
            return Ok(Warp::Custom(Expr::parse(src)?));
        }
        match name {
            "euclidean" => Ok(Warp::Euclidean),
            "sphere" => {
                if k <= 0.0 {
                    return Err(Error::Usage(format!("sphere warp needs k > 0, got {k}")));
                }
                Ok(Warp::Sphere { k })
            }
            "hyperbolic" => {
                if k >= 0.0 {
                    return Err(Error::Usage(format!("hyperbolic warp needs k < 0, got {k}")));
                }
                Ok(Warp::Hyperbolic { k })
            }
            "exp" => Ok(Warp::Exp),
            "cosh" => Ok(Warp::Cosh),
            other => Err(Error::Usage(format!("unknown warp '{other}'"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Warp::Euclidean => "euclidean".into(),
            Warp::Sphere { .. } => "sphere".into(),
            Warp::Hyperbolic { .. } => "hyperbolic".into(),
            Warp::Exp => "exp".into(),
            Warp::Cosh => "cosh".into(),
            Warp::Custom(e) => format!("custom:{}", e.source()),
        }
    }

    /// `(f, f', f'', f''')` at `t`, without any domain checks.
    pub fn derivatives(&self, t: f64) -> [f64; 4] {
        match self {
            Warp::Euclidean => [t, 1.0, 0.0, 0.0],
            Warp::Sphere { k } => {
                let s = k.sqrt();
                let (sn, cs) = (s * t).sin_cos();
                [sn / s, cs, -s * sn, -k * cs]
            }
            Warp::Hyperbolic { k } => {
                let s = (-k).sqrt();
                let (sh, ch) = ((s * t).sinh(), (s * t).cosh());
                [sh / s, ch, s * sh, s * s * ch]
            }
            Warp::Exp => {
                let e = t.exp();
                [e; 4]
            }
            Warp::Cosh => {
                let (sh, ch) = (t.sinh(), t.cosh());
                [ch, sh, ch, sh]
            }
            Warp::Custom(expr) => richardson_derivatives(|x| expr.eval(x), t),
        }
    }
}

impl fmt::Display for Warp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Warp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// Base step for the order-`k` difference quotient. The first-order step is
/// scaled by `max(1, |t|)`; higher orders need larger, fixed steps to keep
/// cancellation error below the truncation error.
const FD_STEPS: [f64; 3] = [1e-4, 1e-3, 2e-2];

/// Two-level Richardson-extrapolated central differences for `f', f'', f'''`.
pub fn richardson_derivatives<F: Fn(f64) -> f64>(f: F, t: f64) -> [f64; 4] {
    let scale = t.abs().max(1.0);
    let f0 = f(t);
    let d1 = |h: f64| (f(t + h) - f(t - h)) / (2.0 * h);
    let d2 = |h: f64| (f(t + h) - 2.0 * f0 + f(t - h)) / (h * h);
    let d3 = |h: f64| (f(t + 2.0 * h) - 2.0 * f(t + h) + 2.0 * f(t - h) - f(t - 2.0 * h)) / (2.0 * h * h * h);
    let extrapolate = |d: &dyn Fn(f64) -> f64, h: f64| (4.0 * d(0.5 * h) - d(h)) / 3.0;
    [
        f0,
        extrapolate(&d1, FD_STEPS[0] * scale),
        extrapolate(&d2, FD_STEPS[1]),
        extrapolate(&d3, FD_STEPS[2]),
    ]
}

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Usage(format!("invalid interval ({lo}, {hi})")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }
}

/// Values of the warp and its first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WarpDerivs {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl WarpDerivs {
    fn from_array(d: [f64; 4]) -> WarpDerivs {
        WarpDerivs {
            f: d[0],
            f1: d[1],
            f2: d[2],
            f3: d[3],
        }
    }
}

/// A warped-product ambient together with the model constant `k` of the
/// equation `Δu + nku = -1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarpModel {
    pub n: usize,
    pub warp: Warp,
    pub interval: Interval,
    /// Scalar curvature of the `(n-1)`-dimensional fiber.
    pub fiber_scalar: f64,
    pub k: f64,
    /// Multiplies every volume and boundary integral. Space forms use the
    /// area of the unit `(n-1)`-sphere so integrals are true Riemannian
    /// measures; other models default to a unit-volume fiber.
    pub fiber_volume: f64,
}

/// Area of the unit `m`-sphere in `R^{m+1}`.
pub fn unit_sphere_area(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * unit_sphere_area(m - 2),
    }
}

impl WarpModel {
    pub fn new(n: usize, warp: Warp, interval: Interval, fiber_scalar: f64, k: f64) -> Result<WarpModel> {
        if n < 2 {
            return Err(Error::Usage(format!("dimension n must be >= 2, got {n}")));
        }
        if n == 2 && fiber_scalar != 0.0 {
            return Err(Error::Usage("a one-dimensional fiber has zero scalar curvature".into()));
        }
        if !k.is_finite() || !fiber_scalar.is_finite() {
            return Err(Error::Usage("k and fiber scalar curvature must be finite".into()));
        }
        Ok(WarpModel {
            n,
            warp,
            interval,
            fiber_scalar,
            k,
            fiber_volume: 1.0,
        })
    }

    /// The simply connected space form of curvature `k`, written in geodesic
    /// polar coordinates about a pole.
    pub fn space_form(n: usize, k: f64) -> Result<WarpModel> {
        let (warp, hi) = if k > 0.0 {
            (Warp::Sphere { k }, PI / k.sqrt())
        } else if k < 0.0 {
            (Warp::Hyperbolic { k }, f64::INFINITY)
        } else {
            (Warp::Euclidean, f64::INFINITY)
        };
        let fiber = ((n - 1) * n.saturating_sub(2)) as f64;
        let mut model = WarpModel::new(n, warp, Interval::new(0.0, hi)?, fiber, k)?;
        model.fiber_volume = unit_sphere_area(n - 1);
        Ok(model)
    }

    /// `R ×_{e^t} N` with Ricci-flat fiber; Einstein with `k = -1`.
    pub fn exp_warp(n: usize) -> Result<WarpModel> {
        WarpModel::new(
            n,
            Warp::Exp,
            Interval::new(f64::NEG_INFINITY, f64::INFINITY)?,
            0.0,
            -1.0,
        )
    }

    /// `(ε, ∞) ×_{cosh t} N` with fiber scalar curvature `-(n-1)(n-2)`;
    /// Einstein with `k = -1`.
    pub fn cosh_warp(n: usize, eps: f64) -> Result<WarpModel> {
        if eps <= 0.0 {
            return Err(Error::Usage("cosh warp needs eps > 0".into()));
        }
        let fiber = -(((n - 1) * n.saturating_sub(2)) as f64);
        WarpModel::new(n, Warp::Cosh, Interval::new(eps, f64::INFINITY)?, fiber, -1.0)
    }

    pub fn with_fiber_volume(mut self, volume: f64) -> WarpModel {
        self.fiber_volume = volume;
        self
    }

    pub fn with_k(mut self, k: f64) -> WarpModel {
        self.k = k;
        self
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// True when the model is one of the three space-form catalog entries.
    pub fn is_space_form(&self) -> bool {
        let round = ((self.n - 1) * (self.n - 2)) as f64;
        let fiber_ok = (self.fiber_scalar - round).abs() <= 1e-12 * round.max(1.0);
        fiber_ok
            && match self.warp {
                Warp::Euclidean => self.k == 0.0,
                Warp::Sphere { k } => self.k == k,
                Warp::Hyperbolic { k } => self.k == k,
                _ => false,
            }
    }

    /// Whether `f(0) = 0`, `f'(0) = 1` and `f''(0) = 0`, so that `t = 0` is a
    /// smooth pole and geodesic balls about it make sense.
    pub fn has_pole(&self) -> bool {
        if self.interval.lo > 0.0 || self.interval.hi <= 0.0 {
            return false;
        }
        let d = self.warp.derivatives(0.0);
        d[0].abs() < 1e-10 && (d[1] - 1.0).abs() < 1e-6 && d[2].abs() < 1e-5
    }

    /// Warp derivatives without domain checks, for use inside solvers.
    pub fn derivs(&self, t: f64) -> WarpDerivs {
        WarpDerivs::from_array(self.warp.derivatives(t))
    }

    /// Evaluates `(f, f', f'', f''')` at an interior point.
    pub fn eval_warp(&self, t: f64) -> Result<WarpDerivs> {
        if !self.interval.contains(t) {
            return Err(Error::Domain(format!(
                "t = {t} outside ({}, {})",
                self.interval.lo, self.interval.hi
            )));
        }
        let d = self.derivs(t);
        if !(d.f > 0.0) {
            return Err(Error::DegenerateMetric { t, f: d.f });
        }
        if !(d.f1.is_finite() && d.f2.is_finite() && d.f3.is_finite()) {
            return Err(Error::Domain(format!("warp derivatives are not finite at t = {t}")));
        }
        Ok(d)
    }

    pub fn curvature_sample(&self, t: f64) -> Result<CurvatureSample> {
        Ok(CurvatureSample::from_derivs(self, t, self.eval_warp(t)?))
    }

    /// Mean curvature (trace convention) of the slice `{t}` with respect to
    /// `outward * ∂_t`.
    pub fn slice_mean_curvature(&self, t: f64, outward: Orientation) -> Result<f64> {
        let d = self.eval_warp(t)?;
        Ok(outward.sign() * (self.dim() - 1.0) * d.f1 / d.f)
    }

    /// Checks `Ric = (n-1) k g` at every sample.
    pub fn check_einstein(&self, t_samples: &[f64], tol: f64) -> Result<IdentityReport> {
        if t_samples.is_empty() {
            return Err(Error::Usage("check_einstein needs at least one sample".into()));
        }
        let target = (self.dim() - 1.0) * self.k;
        let mut worst = 0.0f64;
        let mut worst_radial = target;
        let mut worst_fiber = target;
        for &t in t_samples {
            let s = self.curvature_sample(t)?;
            let dev = (s.ric_radial - target).abs().max((s.ric_fiber - target).abs());
            if dev >= worst {
                worst = dev;
                worst_radial = s.ric_radial;
                worst_fiber = s.ric_fiber;
            }
        }
        let report = IdentityReport {
            name: "einstein".into(),
            lhs: if (worst_radial - target).abs() >= (worst_fiber - target).abs() {
                worst_radial
            } else {
                worst_fiber
            },
            rhs: target,
            residual_abs: worst,
            residual_rel: worst / target.abs().max(1e-300).max(worst),
            pass: worst <= tol,
            hypothesis_met: true,
            tolerance: tol,
            terms: terms([
                ("ric_radial_at_worst", worst_radial),
                ("ric_fiber_at_worst", worst_fiber),
                ("target", target),
                ("samples", t_samples.len() as f64),
            ]),
            notes: Vec::new(),
        };
        Ok(report)
    }

    /// `min` over samples of the smallest Ricci eigenvalue minus `(n-1)k`.
    /// Non-negative iff `Ric >= (n-1) k g` at the samples.
    pub fn ricci_lower_bound_margin(&self, t_samples: &[f64]) -> Result<f64> {
        let target = (self.dim() - 1.0) * self.k;
        let mut margin = f64::INFINITY;
        for &t in t_samples {
            let s = self.curvature_sample(t)?;
            margin = margin.min(s.ric_radial.min(s.ric_fiber) - target);
        }
        Ok(margin)
    }

    /// Largest deviation of the scalar curvature from `n(n-1)k` at the samples.
    pub fn scalar_curvature_deviation(&self, t_samples: &[f64]) -> Result<f64> {
        let target = self.dim() * (self.dim() - 1.0) * self.k;
        let mut dev = 0.0f64;
        for &t in t_samples {
            dev = dev.max((self.curvature_sample(t)?.scalar - target).abs());
        }
        Ok(dev)
    }

    /// Largest deviation from `∇_Y X = φ Y` for `Y = ∂_t` and `Y = ∂_θ` in the
    /// two-dimensional reduction `dt² + f² dθ²`, using
    /// `Γ^t_θθ = -f f'`, `Γ^θ_tθ = f'/f`.
    pub fn conformal_field_defect(&self, t: f64) -> Result<f64> {
        let d = self.eval_warp(t)?;
        let phi = d.f1;
        // X = (X^t, X^θ) = (f, 0)
        let (xt, xth) = (d.f, 0.0);
        let gamma_t_thth = -d.f * d.f1;
        let gamma_th_tth = d.f1 / d.f;
        // ∇_{∂t} X: ∂_t X^a + Γ^a_{t b} X^b ; Γ^t_tt = Γ^θ_tt = Γ^t_tθ = 0
        let along_t = (d.f1, gamma_th_tth * xth);
        // ∇_{∂θ} X: ∂_θ X^a + Γ^a_{θ b} X^b
        let along_theta = (gamma_t_thth * xth, gamma_th_tth * xt);
        let dev = [
            (along_t.0 - phi).abs(),
            along_t.1.abs(),
            along_theta.0.abs(),
            (along_theta.1 - phi).abs(),
        ];
        Ok(dev.into_iter().fold(0.0, f64::max))
    }
}

/// Sign of a boundary component's outward normal relative to `∂_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// `ν = +∂_t`
    Outer,
    /// `ν = -∂_t`
    Inner,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Outer => 1.0,
            Orientation::Inner => -1.0,
        }
    }
}

/// Curvature data of a warped product at one value of `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub t: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    /// Conformal factor `φ = f'`.
    pub phi: f64,
    /// Ricci eigenvalue on `∂_t`.
    pub ric_radial: f64,
    /// Ricci eigenvalue on unit fiber directions.
    pub ric_fiber: f64,
    pub scalar: f64,
    /// `X(R) = f R'(t)`.
    pub xr: f64,
    /// Mean curvature of the slice `{t}` with respect to `+∂_t`.
    pub h_slice: f64,
}

impl CurvatureSample {
    pub(crate) fn from_derivs(model: &WarpModel, t: f64, d: WarpDerivs) -> CurvatureSample {
        let n = model.dim();
        let rn = model.fiber_scalar;
        let WarpDerivs { f, f1, f2, f3 } = d;
        let q = f1 / f;
        let scalar = rn / (f * f) - 2.0 * (n - 1.0) * f2 / f - (n - 1.0) * (n - 2.0) * q * q;
        let dscalar = -2.0 * rn * f1 / (f * f * f)
            - 2.0 * (n - 1.0) * (f3 / f - f2 * f1 / (f * f))
            - 2.0 * (n - 1.0) * (n - 2.0) * q * (f2 / f - q * q);
        let ric_radial = -(n - 1.0) * f2 / f;
        let ric_fiber = (scalar - ric_radial) / (n - 1.0);
        CurvatureSample {
            t,
            f,
            f1,
            f2,
            f3,
            phi: f1,
            ric_radial,
            ric_fiber,
            scalar,
            xr: f * dscalar,
            h_slice: (n - 1.0) * q,
        }
    }

    /// `Δφ = φ'' + (n-1)(f'/f) φ'` for the radial function `φ = f'`.
    pub fn laplacian_phi(&self, n: usize) -> f64 {
        self.f3 + (n as f64 - 1.0) * self.f1 * self.f2 / self.f
    }
}

/// Radial Laplacian `g'' + (n-1)(f'/f) g'`.
pub fn radial_laplacian(n: usize, d: &WarpDerivs, g1: f64, g2: f64) -> f64 {
    g2 + (n as f64 - 1.0) * d.f1 / d.f * g1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn eval_warp_catalog_values() {
        let m = WarpModel::space_form(3, 0.0).unwrap();
        let d = m.eval_warp(2.0).unwrap();
        assert_eq!((d.f, d.f1, d.f2, d.f3), (2.0, 1.0, 0.0, 0.0));

        let m = WarpModel::space_form(3, 1.0).unwrap();
        let d = m.eval_warp(FRAC_PI_4).unwrap();
        let h = 2f64.sqrt() / 2.0;
        assert_relative_eq!(d.f, h, epsilon = 1e-15);
        assert_relative_eq!(d.f1, h, epsilon = 1e-15);
        assert_relative_eq!(d.f2, -h, epsilon = 1e-15);
        assert_relative_eq!(d.f3, -h, epsilon = 1e-15);

        let m = WarpModel::cosh_warp(4, 0.1).unwrap();
        let d = m.eval_warp(1.0).unwrap();
        assert_relative_eq!(d.f, 1.5430806348152437, epsilon = 1e-15);
        assert_relative_eq!(d.f1, 1.1752011936438014, epsilon = 1e-15);
        assert_relative_eq!(d.f2, d.f);
        assert_relative_eq!(d.f3, d.f1);
    }

    #[test]
    fn eval_warp_errors() {
        let m = WarpModel::space_form(3, 1.0).unwrap();
        assert!(matches!(m.eval_warp(-0.5), Err(Error::Domain(_))));
        assert!(matches!(m.eval_warp(4.0), Err(Error::Domain(_))));
        let expr = Expr::parse("t - 1").unwrap();
        let m = WarpModel::new(3, Warp::Custom(expr), Interval::new(0.0, 5.0).unwrap(), 0.0, 0.0).unwrap();
        assert!(matches!(m.eval_warp(0.5), Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn richardson_matches_exact_derivatives() {
        let custom = Warp::Custom(Expr::parse("sinh(t)").unwrap());
        let exact = Warp::Hyperbolic { k: -1.0 };
        for &t in &[0.3, 1.0, 2.5, 7.0] {
            let a = custom.derivatives(t);
            let b = exact.derivatives(t);
            for i in 0..4 {
                assert_relative_eq!(a[i], b[i], max_relative = 1e-8);
            }
        }
        let cubic = Warp::Custom(Expr::parse("t + 0.1*t^3").unwrap());
        let d = cubic.derivatives(0.8);
        assert_relative_eq!(d[1], 1.0 + 0.3 * 0.64, max_relative = 1e-12);
        assert_relative_eq!(d[2], 0.6 * 0.8, max_relative = 1e-8);
        assert_relative_eq!(d[3], 0.6, max_relative = 1e-8);
    }

    #[test]
    fn curvature_examples() {
        let s = WarpModel::space_form(3, 1.0).unwrap().curvature_sample(0.7).unwrap();
        assert_relative_eq!(s.scalar, 6.0, epsilon = 1e-12);
        let s = WarpModel::space_form(3, 0.0).unwrap().curvature_sample(1.0).unwrap();
        assert_eq!(s.scalar, 0.0);
        assert_eq!(s.ric_radial, 0.0);
        let s = WarpModel::exp_warp(4).unwrap().curvature_sample(0.3).unwrap();
        assert_relative_eq!(s.ric_radial, -3.0, epsilon = 1e-12);
        assert_relative_eq!(s.ric_fiber, -3.0, epsilon = 1e-12);
        assert_relative_eq!(s.scalar, -12.0, epsilon = 1e-12);
    }

    #[test]
    fn slice_mean_curvature_examples() {
        let m = WarpModel::space_form(3, 0.0).unwrap();
        assert_eq!(m.slice_mean_curvature(1.0, Orientation::Outer).unwrap(), 2.0);
        assert_eq!(m.slice_mean_curvature(1.0, Orientation::Inner).unwrap(), -2.0);
        let m = WarpModel::space_form(3, -1.0).unwrap();
        assert_relative_eq!(
            m.slice_mean_curvature(1.0, Orientation::Outer).unwrap(),
            2.0 / 1f64.tanh(),
            epsilon = 1e-14
        );
        let m = WarpModel::space_form(2, 1.0).unwrap();
        assert_relative_eq!(
            m.slice_mean_curvature(FRAC_PI_4, Orientation::Outer).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    fn linspace(a: f64, b: f64, m: usize) -> Vec<f64> {
        (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
    }

    #[test]
    fn einstein_catalog() {
        let r = WarpModel::exp_warp(3)
            .unwrap()
            .check_einstein(&linspace(-1.0, 1.0, 50), 1e-10)
            .unwrap();
        assert!(r.pass, "{r:?}");
        let r = WarpModel::cosh_warp(4, 0.1)
            .unwrap()
            .check_einstein(&linspace(0.5, 2.0, 50), 1e-10)
            .unwrap();
        assert!(r.pass, "{r:?}");
        let flat = WarpModel::space_form(3, 0.0).unwrap().with_k(1.0);
        let r = flat.check_einstein(&linspace(0.5, 2.0, 10), 1e-10).unwrap();
        assert!(!r.pass);
        assert!(WarpModel::exp_warp(3).unwrap().check_einstein(&[], 1e-10).is_err());
    }

    #[test]
    fn space_forms_are_flagged_and_einstein() {
        for n in [2usize, 3, 5] {
            for k in [-1.0, 0.0, 1.0, 0.25] {
                let m = WarpModel::space_form(n, k).unwrap();
                assert!(m.is_space_form());
                assert!(m.has_pole());
                let hi = if k > 0.0 { 3.0 / k.sqrt() } else { 3.0 };
                let r = m.check_einstein(&linspace(0.05, hi, 40), 1e-10).unwrap();
                assert!(r.pass, "n={n} k={k}: {r:?}");
            }
        }
        assert!(!WarpModel::exp_warp(3).unwrap().is_space_form());
        assert!(!WarpModel::space_form(3, 1.0).unwrap().with_k(0.5).is_space_form());
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(2), 4.0 * PI);
        assert_relative_eq!(unit_sphere_area(3), 2.0 * PI * PI);
        assert_relative_eq!(unit_sphere_area(4), 8.0 * PI * PI / 3.0);
    }

    #[test]
    fn conformal_field_is_closed_conformal() {
        for m in [
            WarpModel::space_form(2, -1.0).unwrap(),
            WarpModel::space_form(3, 1.0).unwrap(),
            WarpModel::exp_warp(4).unwrap(),
            WarpModel::cosh_warp(4, 0.2).unwrap(),
        ] {
            for t in linspace(0.3, 1.4, 12) {
                assert!(m.conformal_field_defect(t).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn warp_names_round_trip() {
        for name in ["euclidean", "sphere", "exp", "cosh", "custom:t + 0.1*t^3"] {
            assert_eq!(Warp::from_name(name, 1.0).unwrap().name(), name);
        }
        assert_eq!(Warp::from_name("hyperbolic", -1.0).unwrap().name(), "hyperbolic");
        assert!(Warp::from_name("sphere", -1.0).is_err());
        assert!(Warp::from_name("torus", 0.0).is_err());
    }
}
