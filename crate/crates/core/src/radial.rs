//! Radial solutions of `Δu + nku = -1` on geodesic balls about a pole and on
//! slabs `{a <= t <= b}` of a warped product.
//!
//! For a radial function the equation is the ODE
//! `u'' + (n-1)(f'/f) u' + nku = -1`. Balls in space forms have closed-form
//! solutions; everything else is solved by linear shooting with classical
//! RK4 and a series start at the pole. Integrals over the domain reduce to
//! weighted one-dimensional integrals with weight `f(t)^{n-1}` times the
//! fiber volume.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CurvatureSample, Orientation, WarpModel};
use crate::quadrature::{self, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialDomain {
    Ball { radius: f64 },
    Slab { a: f64, b: f64 },
}

impl RadialDomain {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            RadialDomain::Ball { radius } => (0.0, radius),
            RadialDomain::Slab { a, b } => (a, b),
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, RadialDomain::Ball { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallProblem {
    pub model: WarpModel,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlabProblem {
    pub model: WarpModel,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target accuracy of the boundary slope and of `u(R) = 0`.
    pub tol: f64,
    /// Number of Chebyshev intervals of the output grid (doubled on demand).
    pub grid_intervals: usize,
    /// Compute even when the solution cannot be positive; sets `positive = false`.
    pub allow_nonpositive: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-11,
            grid_intervals: 512,
            allow_nonpositive: false,
        }
    }
}

/// Boundary data on one slice `{t}` bounding the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRecord {
    pub t: f64,
    pub orientation: Orientation,
    /// Outward normal derivative.
    pub u_nu: f64,
    /// Mean curvature (trace) with respect to the outward normal.
    pub h: f64,
}

/// Closed-form ball solution in a space form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub n: usize,
    pub k: f64,
    pub radius: f64,
}

impl ClosedForm {
    /// `(u, u', u'')` at geodesic distance `r`.
    pub fn eval(&self, r: f64) -> [f64; 3] {
        let n = self.n as f64;
        let k = self.k;
        let rb = self.radius;
        if k == 0.0 {
            [(rb * rb - r * r) / (2.0 * n), -r / n, -1.0 / n]
        } else if k > 0.0 {
            let s = k.sqrt();
            let c = (s * rb).cos();
            let (sn, cs) = (s * r).sin_cos();
            let d = n * k * c;
            [(cs - c) / d, -s * sn / d, -cs / (n * c)]
        } else {
            let s = (-k).sqrt();
            let c = (s * rb).cosh();
            let d = n * s * s * c;
            [
                (c - (s * r).cosh()) / d,
                -s * (s * r).sinh() / d,
                -(s * r).cosh() / (n * c),
            ]
        }
    }

    /// `|u'|` at the boundary.
    pub fn slope(&self) -> f64 {
        let n = self.n as f64;
        let k = self.k;
        if k == 0.0 {
            self.radius / n
        } else if k > 0.0 {
            let s = k.sqrt();
            (s * self.radius).tan() / (n * s)
        } else {
            let s = (-k).sqrt();
            (s * self.radius).tanh() / (n * s)
        }
    }
}

/// A radial solution sampled on a grid, with an evaluator for any `t` in the
/// domain (exact for closed forms, quintic Hermite otherwise).
#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub model: WarpModel,
    pub domain: RadialDomain,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    /// `|u'|` at the outer boundary.
    pub c: f64,
    pub boundary: Vec<BoundaryRecord>,
    pub positive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedForm>,
}

/// Local values at one point of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub t: f64,
    pub u: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub curv: CurvatureSample,
}

/// Serrin boundary data of a radial solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SerrinData {
    pub c: f64,
    pub h_out: f64,
    /// `|u_ν|` is the same on every boundary component.
    pub overdet_holds: bool,
    /// `u_ν = -(n-1)/(nH)` on every component with `H > 0`.
    pub cor23_holds: bool,
    /// Some component had `H = 0`, where the relation was not checked.
    pub curvature_check_skipped: bool,
}

/// Uniform nodes. Clustered nodes make the quintic Hermite second derivative
/// lose `eps |u| / h^2` to cancellation on the shortest intervals.
fn uniform_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..=m).map(|j| a + (b - a) * j as f64 / m as f64).collect();
    g[m] = b;
    g
}

fn check_positive_radius(model: &WarpModel, radius: f64, allow_nonpositive: bool) -> Result<()> {
    if !(radius > 0.0) || radius >= model.interval.hi {
        return Err(Error::Domain(format!(
            "radius {radius} not inside ({}, {})",
            model.interval.lo, model.interval.hi
        )));
    }
    if model.is_space_form() && model.k > 0.0 {
        let limit = std::f64::consts::FRAC_PI_2 / model.k.sqrt();
        if radius >= limit && !allow_nonpositive {
            return Err(Error::Positivity(format!(
                "radius {radius} >= pi/(2 sqrt(k)) = {limit}: no positive solution"
            )));
        }
    }
    Ok(())
}

/// Closed-form solution on a geodesic ball of a space form.
pub fn solve_ball_closed_form(p: &BallProblem, opts: SolveOptions) -> Result<RadialSolution> {
    let model = &p.model;
    if !model.is_space_form() {
        return Err(Error::Unsupported(format!(
            "closed form needs a space form, got warp {}",
            model.warp
        )));
    }
    check_positive_radius(model, p.radius, opts.allow_nonpositive)?;
    let cf = ClosedForm {
        n: model.n,
        k: model.k,
        radius: p.radius,
    };
    if model.k > 0.0 && (model.k.sqrt() * p.radius).cos().abs() < 1e-12 {
        return Err(Error::Resonance("hemisphere: Δ + nk has a kernel on this ball".into()));
    }
    let grid = uniform_grid(0.0, p.radius, opts.grid_intervals);
    let mut u = Vec::with_capacity(grid.len());
    let mut u1 = Vec::with_capacity(grid.len());
    let mut u2 = Vec::with_capacity(grid.len());
    for &t in &grid {
        let [a, b, c] = cf.eval(t);
        u.push(a);
        u1.push(b);
        u2.push(c);
    }
    *u.last_mut().expect("grid") = 0.0;
    finish(
        model.clone(),
        RadialDomain::Ball { radius: p.radius },
        grid,
        u,
        u1,
        u2,
        Some(cf),
    )
}

/// Coefficients of the linear ODE `u'' = -1 - nk u - (n-1)(f'/f) u'`
/// (the source term is dropped for homogeneous solves).
#[derive(Clone, Copy)]
struct Ode<'a> {
    model: &'a WarpModel,
    source: f64,
}

impl Ode<'_> {
    fn rhs(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        let d = self.model.derivs(t);
        let n = self.model.dim();
        [
            y[1],
            -self.source - n * self.model.k * y[0] - (n - 1.0) * d.f1 / d.f * y[1],
        ]
    }

    /// Step limit: a fraction of the length scale `f/|f'|` of the first-order
    /// coefficient, capped by `hmax`.
    fn step_limit(&self, t: f64, hmax: f64) -> f64 {
        let d = self.model.derivs(t);
        let scale = if d.f1 != 0.0 { (d.f / d.f1).abs() } else { f64::INFINITY };
        hmax.min(0.05 * scale)
    }

    fn rk4(&self, t: f64, y: [f64; 2], h: f64) -> [f64; 2] {
        let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
        let k1 = self.rhs(t, y);
        let k2 = self.rhs(t + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = self.rhs(t + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = self.rhs(t + h, add(y, k3, h));
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// Integrates from `grid[start]` with state `y0`, returning the state at
    /// every grid point from `start` on.
    fn integrate(&self, grid: &[f64], start: usize, y0: [f64; 2], hmax: f64) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(grid.len() - start);
        let mut y = y0;
        out.push(y);
        for w in grid[start..].windows(2) {
            let (t0, t1) = (w[0], w[1]);
            let h_allowed = self.step_limit(t0, hmax);
            let steps = ((t1 - t0) / h_allowed).ceil().max(1.0) as usize;
            let h = (t1 - t0) / steps as f64;
            let mut t = t0;
            for _ in 0..steps {
                y = self.rk4(t, y, h);
                t += h;
            }
            out.push(y);
        }
        out
    }
}

/// Shooting solve on a ball about the pole of a general warp.
pub fn solve_ball_numeric(p: &BallProblem, opts: SolveOptions) -> Result<RadialSolution> {
    let model = &p.model;
    if !model.has_pole() {
        return Err(Error::Domain(format!(
            "warp {} has no smooth pole at t = 0 (need f(0)=0, f'(0)=1, f''(0)=0)",
            model.warp
        )));
    }
    check_positive_radius(model, p.radius, opts.allow_nonpositive)?;
    let n = model.dim();
    let k = model.k;
    let beta = model.warp.derivatives(0.0)[3] / 6.0;
    let t_series = 1e-3 * p.radius;

    let series = |alpha: f64, t: f64| -> [f64; 3] {
        let a2 = -(1.0 + n * k * alpha) / (2.0 * n);
        let a4 = -a2 * (4.0 * (n - 1.0) * beta + n * k) / (4.0 * (n + 2.0));
        let t2 = t * t;
        [
            alpha + a2 * t2 + a4 * t2 * t2,
            2.0 * a2 * t + 4.0 * a4 * t2 * t,
            2.0 * a2 + 12.0 * a4 * t2,
        ]
    };

    let mut m = opts.grid_intervals.max(16);
    let mut best: Option<(f64, RadialSolution)> = None;
    loop {
        let mut grid = uniform_grid(0.0, p.radius, m);
        // make the series/ODE switch point a grid node
        let start = grid.partition_point(|&t| t < t_series);
        grid.insert(start, t_series);
        let ode = Ode { model, source: 1.0 };

        let shoot = |alpha: f64, hmax: f64| -> Vec<[f64; 2]> {
            let s = series(alpha, t_series);
            ode.integrate(&grid, start, [s[0], s[1]], hmax)
        };

        let mut hmax = p.radius / 2000.0;
        let mut prev_c = f64::NAN;
        let mut states;
        let mut alpha;
        let mut level = 0;
        loop {
            // u(R; α) is affine in α, so the secant iteration converges in one
            // step; the loop guards against round-off
            let mut a0 = 0.0;
            let mut a1 = 1.0 / n;
            let mut e0 = shoot(a0, hmax).last().expect("grid")[0];
            let mut e1 = shoot(a1, hmax).last().expect("grid")[0];
            let mut iterations = 0;
            loop {
                let slope = (e1 - e0) / (a1 - a0);
                if !slope.is_finite() || slope.abs() < 1e-14 {
                    return Err(Error::SolverFailure(format!(
                        "no sign change of u(R) in the shooting bracket [{a0}, {a1}] (slope {slope:e})"
                    )));
                }
                let a2 = a1 - e1 / slope;
                let e2 = shoot(a2, hmax).last().expect("grid")[0];
                a0 = a1;
                e0 = e1;
                a1 = a2;
                e1 = e2;
                iterations += 1;
                if e1.abs() <= opts.tol * 1e-3 * a1.abs().max(1.0) || iterations >= 20 {
                    break;
                }
            }
            alpha = a1;
            states = shoot(alpha, hmax);
            let c = states.last().expect("grid")[1].abs();
            if (c - prev_c).abs() <= opts.tol * c.max(1.0) || level >= 6 {
                break;
            }
            prev_c = c;
            hmax *= 0.5;
            level += 1;
        }

        let mut u = Vec::with_capacity(grid.len());
        let mut u1 = Vec::with_capacity(grid.len());
        let mut u2 = Vec::with_capacity(grid.len());
        for &t in &grid[..start] {
            let s = series(alpha, t);
            u.push(s[0]);
            u1.push(s[1]);
            u2.push(s[2]);
        }
        for (i, y) in states.iter().enumerate() {
            let t = grid[start + i];
            let d = model.derivs(t);
            u.push(y[0]);
            u1.push(y[1]);
            u2.push(-1.0 - n * k * y[0] - (n - 1.0) * d.f1 / d.f * y[1]);
        }
        // the series value at t_series was replaced by the ODE state; keep the
        // node's second derivative consistent with the series start
        u2[start] = series(alpha, t_series)[2];
        *u.last_mut().expect("grid") = 0.0;

        let sol = finish(
            model.clone(),
            RadialDomain::Ball { radius: p.radius },
            grid,
            u,
            u1,
            u2,
            None,
        )?;
        let residual = sol.interpolation_residual() / sol.pde_scale();
        // past some size the node values' noise, amplified by 1/h^2 in the
        // Hermite second derivative, outweighs the truncation gain
        if let Some((prev, _)) = &best {
            if residual >= *prev {
                return Ok(best.expect("set").1);
            }
        }
        if residual <= 1e-9 || m >= 8192 {
            return Ok(sol);
        }
        best = Some((residual, sol));
        m *= 2;
    }
}

/// Two-point BVP `u(a) = u(b) = 0` on a slab.
pub fn solve_slab(p: &SlabProblem, opts: SolveOptions) -> Result<RadialSolution> {
    let model = &p.model;
    if !(p.a < p.b) {
        return Err(Error::Usage(format!("slab needs a < b, got [{}, {}]", p.a, p.b)));
    }
    if !model.interval.contains(p.a) || !model.interval.contains(p.b) {
        return Err(Error::Domain(format!(
            "slab [{}, {}] not inside ({}, {})",
            p.a, p.b, model.interval.lo, model.interval.hi
        )));
    }
    // f > 0 on [a, b]
    for i in 0..=64 {
        let t = p.a + (p.b - p.a) * i as f64 / 64.0;
        let f = model.derivs(t).f;
        if !(f > 0.0) {
            return Err(Error::DegenerateMetric { t, f });
        }
    }
    let n = model.dim();
    let k = model.k;
    let mut m = opts.grid_intervals.max(16);
    let mut best: Option<(f64, RadialSolution)> = None;
    loop {
        let grid = uniform_grid(p.a, p.b, m);
        let particular = Ode { model, source: 1.0 };
        let homogeneous = Ode { model, source: 0.0 };
        let mut hmax = (p.b - p.a) / 2000.0;
        let mut prev_c = f64::NAN;
        let mut level = 0;
        let states = loop {
            let v = particular.integrate(&grid, 0, [0.0, 0.0], hmax);
            let w = homogeneous.integrate(&grid, 0, [0.0, 1.0], hmax);
            let wb = w.last().expect("grid")[0];
            let wmax = w.iter().map(|y| y[0].abs()).fold(0.0, f64::max);
            if wb.abs() <= 1e-10 * wmax {
                return Err(Error::Resonance(format!(
                    "homogeneous solution vanishes at both ends of [{}, {}]",
                    p.a, p.b
                )));
            }
            let s = -v.last().expect("grid")[0] / wb;
            let states: Vec<[f64; 2]> = v
                .iter()
                .zip(&w)
                .map(|(a, b)| [a[0] + s * b[0], a[1] + s * b[1]])
                .collect();
            let c = states.last().expect("grid")[1].abs();
            if (c - prev_c).abs() <= opts.tol * c.max(1.0) || level >= 6 {
                break states;
            }
            prev_c = c;
            hmax *= 0.5;
            level += 1;
        };
        let mut u = Vec::with_capacity(grid.len());
        let mut u1 = Vec::with_capacity(grid.len());
        let mut u2 = Vec::with_capacity(grid.len());
        for (y, &t) in states.iter().zip(&grid) {
            let d = model.derivs(t);
            u.push(y[0]);
            u1.push(y[1]);
            u2.push(-1.0 - n * k * y[0] - (n - 1.0) * d.f1 / d.f * y[1]);
        }
        u[0] = 0.0;
        *u.last_mut().expect("grid") = 0.0;
        let sol = finish(
            model.clone(),
            RadialDomain::Slab { a: p.a, b: p.b },
            grid,
            u,
            u1,
            u2,
            None,
        )?;
        let residual = sol.interpolation_residual() / sol.pde_scale();
        // past some size the node values' noise, amplified by 1/h^2 in the
        // Hermite second derivative, outweighs the truncation gain
        if let Some((prev, _)) = &best {
            if residual >= *prev {
                return Ok(best.expect("set").1);
            }
        }
        if residual <= 1e-9 || m >= 8192 {
            return Ok(sol);
        }
        best = Some((residual, sol));
        m *= 2;
    }
}

fn finish(
    model: WarpModel,
    domain: RadialDomain,
    grid: Vec<f64>,
    u: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    closed_form: Option<ClosedForm>,
) -> Result<RadialSolution> {
    let n1 = model.dim() - 1.0;
    let last = grid.len() - 1;
    let mut boundary = Vec::new();
    if let RadialDomain::Slab { a, .. } = domain {
        let d = model.derivs(a);
        boundary.push(BoundaryRecord {
            t: a,
            orientation: Orientation::Inner,
            u_nu: -u1[0],
            h: -n1 * d.f1 / d.f,
        });
    }
    let (_, b) = domain.bounds();
    let d = model.derivs(b);
    boundary.push(BoundaryRecord {
        t: b,
        orientation: Orientation::Outer,
        u_nu: u1[last],
        h: n1 * d.f1 / d.f,
    });
    let positive = u[1..last].iter().all(|&v| v > 0.0);
    let c = u1[last].abs();
    Ok(RadialSolution {
        model,
        domain,
        grid,
        u,
        u1,
        u2,
        c,
        boundary,
        positive,
        closed_form,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeIntegrand {
    One,
    U,
    U2,
    Phi,
    PhiU,
    PhiU2,
    GradU2,
    U2LapPhi,
    /// `u² (φR + X(R)/2)`
    U2PhiRXr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryIntegrand {
    One,
    InvH,
    UNu,
    UNu2,
    /// `<X, ν>`
    XNu,
    Phi,
    HUNu2,
}

impl RadialSolution {
    pub fn n(&self) -> usize {
        self.model.n
    }

    /// `(u, u', u'')` at any `t` in the domain.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        if let Some(cf) = &self.closed_form {
            return cf.eval(t);
        }
        let g = &self.grid;
        let i = g.partition_point(|&x| x <= t).clamp(1, g.len() - 1) - 1;
        hermite5(
            g[i],
            g[i + 1],
            [self.u[i], self.u1[i], self.u2[i]],
            [self.u[i + 1], self.u1[i + 1], self.u2[i + 1]],
            t,
        )
    }

    /// Third derivative from differentiating the ODE.
    pub fn third_derivative(&self, t: f64, u: [f64; 3], c: &CurvatureSample) -> f64 {
        let _ = t;
        let n = self.model.dim();
        let q = c.f1 / c.f;
        let dq = c.f2 / c.f - q * q;
        -n * self.model.k * u[1] - (n - 1.0) * (dq * u[1] + q * u[2])
    }

    /// All local quantities at `t`.
    pub fn point(&self, t: f64) -> RadialPoint {
        let [u, u1, u2] = self.eval(t);
        let curv = CurvatureSample::from_derivs(&self.model, t, self.model.derivs(t));
        let u3 = self.third_derivative(t, [u, u1, u2], &curv);
        RadialPoint { t, u, u1, u2, u3, curv }
    }

    /// Largest `|u'' + (n-1)(f'/f)u' + nku + 1|` over interior grid nodes.
    pub fn pde_residual(&self) -> f64 {
        let n = self.model.dim();
        let mut worst = 0.0f64;
        for i in 1..self.grid.len() - 1 {
            let d = self.model.derivs(self.grid[i]);
            let r = self.u2[i] + (n - 1.0) * d.f1 / d.f * self.u1[i] + n * self.model.k * self.u[i] + 1.0;
            worst = worst.max(r.abs());
        }
        worst
    }

    /// Size of the largest PDE term over the grid, at least 1.
    fn pde_scale(&self) -> f64 {
        let nk = self.model.dim() * self.model.k;
        self.u
            .iter()
            .zip(&self.u2)
            .fold(1.0f64, |m, (u, u2)| m.max((nk * u).abs()).max(u2.abs()))
    }

    /// PDE residual of the interpolated profile at grid-interval midpoints.
    pub fn interpolation_residual(&self) -> f64 {
        let n = self.model.dim();
        let mut worst = 0.0f64;
        for w in self.grid.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            if t <= 0.0 {
                continue;
            }
            let [u, u1, u2] = self.eval(t);
            let d = self.model.derivs(t);
            let r = u2 + (n - 1.0) * d.f1 / d.f * u1 + n * self.model.k * u + 1.0;
            worst = worst.max(r.abs());
        }
        worst
    }

    pub fn serrin_boundary_data(&self) -> SerrinData {
        let n = self.model.dim();
        let rel = 1e-9;
        let mags: Vec<f64> = self.boundary.iter().map(|b| b.u_nu.abs()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        let overdet_holds = max - min <= rel * max;
        let mut cor23_holds = true;
        let mut curvature_check_skipped = false;
        for b in &self.boundary {
            if b.h == 0.0 {
                curvature_check_skipped = true;
                continue;
            }
            if b.h > 0.0 {
                let target = -(n - 1.0) / (n * b.h);
                if (b.u_nu - target).abs() > rel * target.abs().max(b.u_nu.abs()) {
                    cor23_holds = false;
                }
            } else {
                cor23_holds = false;
            }
        }
        let outer = self
            .boundary
            .iter()
            .find(|b| b.orientation == Orientation::Outer)
            .expect("outer boundary");
        SerrinData {
            c: self.c,
            h_out: outer.h,
            overdet_holds,
            cor23_holds,
            curvature_check_skipped,
        }
    }

    fn quad_points(&self) -> Vec<f64> {
        let (a, b) = self.domain.bounds();
        if self.closed_form.is_some() {
            vec![a, b]
        } else {
            self.grid.clone()
        }
    }

    /// `fiber_volume * ∫ g(point) f^{n-1} dt` over the domain.
    pub fn volume_integral<G: Fn(&RadialPoint) -> f64>(&self, g: G) -> f64 {
        let nm1 = self.model.n as i32 - 1;
        let r = quadrature::integrate_with_breakpoints(
            |t| {
                let p = self.point(t);
                g(&p) * p.curv.f.powi(nm1)
            },
            &self.quad_points(),
            QuadOptions::default(),
        );
        r.value * self.model.fiber_volume
    }

    /// `fiber_volume * Σ_b g(record, curvature) f(t_b)^{n-1}` over boundary slices.
    pub fn boundary_sum<G: Fn(&BoundaryRecord, &CurvatureSample) -> f64>(&self, g: G) -> f64 {
        let nm1 = self.model.n as i32 - 1;
        let mut total = 0.0;
        for rec in &self.boundary {
            let c = CurvatureSample::from_derivs(&self.model, rec.t, self.model.derivs(rec.t));
            total += g(rec, &c) * c.f.powi(nm1);
        }
        total * self.model.fiber_volume
    }

    pub fn integrate_volume(&self, which: VolumeIntegrand) -> f64 {
        let n = self.model.n;
        match which {
            VolumeIntegrand::One => self.volume_integral(|_| 1.0),
            VolumeIntegrand::U => self.volume_integral(|p| p.u),
            VolumeIntegrand::U2 => self.volume_integral(|p| p.u * p.u),
            VolumeIntegrand::Phi => self.volume_integral(|p| p.curv.phi),
            VolumeIntegrand::PhiU => self.volume_integral(|p| p.curv.phi * p.u),
            VolumeIntegrand::PhiU2 => self.volume_integral(|p| p.curv.phi * p.u * p.u),
            VolumeIntegrand::GradU2 => self.volume_integral(|p| p.u1 * p.u1),
            VolumeIntegrand::U2LapPhi => self.volume_integral(|p| p.u * p.u * p.curv.laplacian_phi(n)),
            VolumeIntegrand::U2PhiRXr => {
                self.volume_integral(|p| p.u * p.u * (p.curv.phi * p.curv.scalar + 0.5 * p.curv.xr))
            }
        }
    }

    pub fn integrate_boundary(&self, which: BoundaryIntegrand) -> Result<f64> {
        if which == BoundaryIntegrand::InvH {
            if let Some(b) = self.boundary.iter().find(|b| b.h == 0.0) {
                return Err(Error::Pole(format!("H = 0 on the slice t = {}", b.t)));
            }
        }
        Ok(match which {
            BoundaryIntegrand::One => self.boundary_sum(|_, _| 1.0),
            BoundaryIntegrand::InvH => self.boundary_sum(|b, _| 1.0 / b.h),
            BoundaryIntegrand::UNu => self.boundary_sum(|b, _| b.u_nu),
            BoundaryIntegrand::UNu2 => self.boundary_sum(|b, _| b.u_nu * b.u_nu),
            BoundaryIntegrand::XNu => self.boundary_sum(|b, c| b.orientation.sign() * c.f),
            BoundaryIntegrand::Phi => self.boundary_sum(|_, c| c.phi),
            BoundaryIntegrand::HUNu2 => self.boundary_sum(|b, _| b.h * b.u_nu * b.u_nu),
        })
    }

    /// Sample points strictly inside the domain, for curvature hypotheses.
    pub fn interior_samples(&self, count: usize) -> Vec<f64> {
        let (a, b) = self.domain.bounds();
        (0..count)
            .map(|i| a + (b - a) * (i as f64 + 0.5) / count as f64)
            .collect()
    }
}

/// Quintic Hermite interpolation from values and two derivatives at both ends.
fn hermite5(t0: f64, t1: f64, y0: [f64; 3], y1: [f64; 3], t: f64) -> [f64; 3] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let basis = [
        [
            1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
            -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
            -60.0 * s + 180.0 * s2 - 120.0 * s3,
        ],
        [
            s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
            1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
            -36.0 * s + 96.0 * s2 - 60.0 * s3,
        ],
        [
            0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5),
            0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4),
            0.5 * (2.0 - 18.0 * s + 36.0 * s2 - 20.0 * s3),
        ],
        [
            10.0 * s3 - 15.0 * s4 + 6.0 * s5,
            30.0 * s2 - 60.0 * s3 + 30.0 * s4,
            60.0 * s - 180.0 * s2 + 120.0 * s3,
        ],
        [
            -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
            -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
            -24.0 * s + 84.0 * s2 - 60.0 * s3,
        ],
        [
            0.5 * (s3 - 2.0 * s4 + s5),
            0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4),
            0.5 * (6.0 * s - 24.0 * s2 + 20.0 * s3),
        ],
    ];
    let coef = [y0[0], h * y0[1], h * h * y0[2], y1[0], h * y1[1], h * h * y1[2]];
    let mut out = [0.0; 3];
    let scale = [1.0, 1.0 / h, 1.0 / (h * h)];
    for (b, c) in basis.iter().zip(coef) {
        for d in 0..3 {
            out[d] += c * b[d] * scale[d];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn ball(n: usize, k: f64, r: f64) -> BallProblem {
        BallProblem {
            model: WarpModel::space_form(n, k).unwrap(),
            radius: r,
        }
    }

    #[test]
    fn hermite_reproduces_quintics() {
        let p = |t: f64| {
            [
                t.powi(5) - 2.0 * t * t + 1.0,
                5.0 * t.powi(4) - 4.0 * t,
                20.0 * t.powi(3) - 4.0,
            ]
        };
        let (a, b) = (0.3, 0.9);
        for &t in &[0.3, 0.41, 0.6, 0.88, 0.9] {
            let v = hermite5(a, b, p(a), p(b), t);
            let e = p(t);
            for d in 0..3 {
                assert_relative_eq!(v[d], e[d], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_slopes() {
        let s = solve_ball_closed_form(&ball(3, 0.0, 1.0), SolveOptions::default()).unwrap();
        assert_relative_eq!(s.u[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(s.c, 1.0 / 3.0, epsilon = 1e-15);
        let s = solve_ball_closed_form(&ball(2, 1.0, FRAC_PI_4), SolveOptions::default()).unwrap();
        assert_relative_eq!(s.c, 0.5, epsilon = 1e-14);
        let s = solve_ball_closed_form(&ball(3, -1.0, 1.0), SolveOptions::default()).unwrap();
        assert_relative_eq!(s.c, 1f64.tanh() / 3.0, epsilon = 1e-15);
        assert_relative_eq!(s.c, 0.253_864_718_651_921_6, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_pde_residual_is_tiny() {
        for n in [2, 3, 5] {
            for k in [-1.0, 0.0, 1.0] {
                let s = solve_ball_closed_form(&ball(n, k, 1.2), SolveOptions::default()).unwrap();
                assert!(s.pde_residual() < 1e-12, "n={n} k={k}: {}", s.pde_residual());
                assert!(s.positive);
            }
        }
    }

    #[test]
    fn positivity_limit_on_the_sphere() {
        let err = solve_ball_closed_form(&ball(3, 1.0, 1.6), SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Positivity(_)));
        let err = solve_ball_numeric(&ball(3, 1.0, 1.6), SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Positivity(_)));
        let opts = SolveOptions {
            allow_nonpositive: true,
            ..SolveOptions::default()
        };
        let s = solve_ball_closed_form(&ball(3, 1.0, 1.8), opts).unwrap();
        assert!(!s.positive);
        let err = solve_ball_closed_form(&ball(3, 1.0, FRAC_PI_2), opts).unwrap_err();
        assert!(matches!(err, Error::Resonance(_)));
    }

    #[test]
    fn closed_form_rejects_non_space_forms() {
        let p = BallProblem {
            model: WarpModel::space_form(3, 0.0).unwrap().with_k(1.0),
            radius: 1.0,
        };
        assert!(matches!(
            solve_ball_closed_form(&p, SolveOptions::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn numeric_matches_closed_form() {
        let opts = SolveOptions::default();
        let s = solve_ball_numeric(&ball(3, 0.0, 1.0), opts).unwrap();
        assert!((s.c - 1.0 / 3.0).abs() < 1e-10, "{}", s.c - 1.0 / 3.0);
        let s = solve_ball_numeric(&ball(3, -1.0, 2.0), opts).unwrap();
        assert!((s.c - 2f64.tanh() / 3.0).abs() < 1e-9);
        let r = FRAC_PI_2 - 0.01;
        let s = solve_ball_numeric(&ball(2, 1.0, r), opts).unwrap();
        assert!(s.positive);
        assert_relative_eq!(s.c, r.tan() / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn annulus_matches_euler_solution() {
        let model = WarpModel::space_form(2, 0.0).unwrap().with_fiber_volume(1.0);
        let s = solve_slab(&SlabProblem { model, a: 1.0, b: 2.0 }, SolveOptions::default()).unwrap();
        let big_a = 3.0 / (4.0 * 2f64.ln());
        let exact = |t: f64| -t * t / 4.0 + big_a * t.ln() + 0.25;
        let exact1 = |t: f64| -t / 2.0 + big_a / t;
        for (i, &t) in s.grid.iter().enumerate() {
            assert!((s.u[i] - exact(t)).abs() < 1e-11);
        }
        assert_relative_eq!(s.boundary[0].u_nu, -exact1(1.0), epsilon = 1e-10);
        assert_relative_eq!(s.boundary[1].u_nu, exact1(2.0), epsilon = 1e-10);
        let data = s.serrin_boundary_data();
        assert!(!data.overdet_holds);
        assert!(s.positive);
        assert_eq!(s.boundary[0].orientation, Orientation::Inner);
        assert!(s.boundary[0].h < 0.0);
    }

    #[test]
    fn thin_annulus_is_small() {
        let eps = 1e-3;
        let model = WarpModel::space_form(2, 0.0).unwrap();
        let s = solve_slab(
            &SlabProblem {
                model,
                a: 1.0,
                b: 1.0 + eps,
            },
            SolveOptions::default(),
        )
        .unwrap();
        let max = s.u.iter().cloned().fold(0.0, f64::max);
        assert!(max < eps && max > 0.0);
    }

    #[test]
    fn exp_slab_is_positive_and_not_serrin() {
        let model = WarpModel::exp_warp(3).unwrap();
        let s = solve_slab(&SlabProblem { model, a: 0.0, b: 1.0 }, SolveOptions::default()).unwrap();
        assert!(s.positive);
        assert!(s.pde_residual() < 1e-9);
        assert!(s.interpolation_residual() < 1e-9);
        let d = s.serrin_boundary_data();
        assert!(!(d.overdet_holds && d.cor23_holds));
    }

    #[test]
    fn slab_resonance_is_detected() {
        // u'' + u = -1 on a flat 1-D fiber line; kernel sin(t - a) when b - a = π
        let model = WarpModel::exp_warp(2).unwrap();
        // n = 2, e^t warp: u'' + u' + 2k u; choose k so the operator is resonant:
        // roots of r² + r + 2k with complex part π/(b-a): 2k = 1/4 + π²
        let model = model.with_k((0.25 + PI * PI) / 2.0);
        let err = solve_slab(&SlabProblem { model, a: 0.0, b: 1.0 }, SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Resonance(_)), "{err:?}");
    }

    #[test]
    fn serrin_data_examples() {
        let s = solve_ball_closed_form(&ball(3, 0.0, 1.0), SolveOptions::default()).unwrap();
        let d = s.serrin_boundary_data();
        assert!(d.overdet_holds && d.cor23_holds);
        assert_relative_eq!(s.boundary[0].u_nu, -1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(d.h_out, 2.0);
        let s = solve_ball_closed_form(&ball(3, -1.0, 1.0), SolveOptions::default()).unwrap();
        let b = s.boundary[0];
        assert_relative_eq!(b.u_nu, -1f64.tanh() / 3.0, epsilon = 1e-15);
        assert_relative_eq!(b.h, 2.0 / 1f64.tanh(), epsilon = 1e-14);
        assert!((2.0 + 3.0 * b.h * b.u_nu).abs() < 1e-14);
    }

    #[test]
    fn integral_examples() {
        let s = solve_ball_closed_form(&ball(3, 0.0, 1.0), SolveOptions::default()).unwrap();
        assert_relative_eq!(
            s.integrate_volume(VolumeIntegrand::U),
            4.0 * PI / 45.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            s.integrate_boundary(BoundaryIntegrand::One).unwrap(),
            4.0 * PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            s.integrate_boundary(BoundaryIntegrand::InvH).unwrap(),
            2.0 * PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            s.integrate_volume(VolumeIntegrand::One),
            4.0 * PI / 3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn divergence_theorem_closure() {
        for (n, k, r) in [(3, 0.0, 1.0), (2, 1.0, 1.1), (5, -1.0, 0.7)] {
            for s in [
                solve_ball_closed_form(&ball(n, k, r), SolveOptions::default()).unwrap(),
                solve_ball_numeric(&ball(n, k, r), SolveOptions::default()).unwrap(),
            ] {
                let flux = s.integrate_boundary(BoundaryIntegrand::UNu).unwrap();
                let vol = s.integrate_volume(VolumeIntegrand::One);
                let iu = s.integrate_volume(VolumeIntegrand::U);
                let rhs = -vol - n as f64 * k * iu;
                assert!((flux - rhs).abs() <= 1e-10 * rhs.abs(), "n={n} k={k}: {flux} vs {rhs}");
            }
        }
        let model = WarpModel::exp_warp(3).unwrap();
        let s = solve_slab(&SlabProblem { model, a: -0.5, b: 0.8 }, SolveOptions::default()).unwrap();
        let flux = s.integrate_boundary(BoundaryIntegrand::UNu).unwrap();
        let rhs = -s.integrate_volume(VolumeIntegrand::One) + 3.0 * s.integrate_volume(VolumeIntegrand::U);
        assert!((flux - rhs).abs() <= 1e-10 * rhs.abs());
    }

    #[test]
    fn zero_mean_curvature_is_a_pole() {
        // cosh warp: the slice t = 0 is totally geodesic; put it on a slab edge
        let model = WarpModel::new(
            2,
            crate::geometry::Warp::Cosh,
            crate::geometry::Interval::new(-5.0, 5.0).unwrap(),
            0.0,
            0.0,
        )
        .unwrap();
        let s = solve_slab(&SlabProblem { model, a: 0.0, b: 1.0 }, SolveOptions::default()).unwrap();
        assert!(matches!(
            s.integrate_boundary(BoundaryIntegrand::InvH),
            Err(Error::Pole(_))
        ));
        assert!(s.serrin_boundary_data().curvature_check_skipped);
    }

    #[test]
    fn json_has_grid_and_boundary() {
        let s = solve_ball_closed_form(
            &ball(2, 0.0, 1.0),
            SolveOptions {
                grid_intervals: 16,
                ..Default::default()
            },
        )
        .unwrap();
        let v = serde_json::to_value(&s).unwrap();
        for key in ["grid", "u", "u1", "u2", "boundary", "c"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["grid"].as_array().unwrap().len(), 17);
        assert_eq!(v["model"]["warp"], "euclidean");
    }
}
