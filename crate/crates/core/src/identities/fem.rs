use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fem2d::domain::{conformal_factor, DomainSpec, Shape};
use crate::fem2d::{boundary_trace_with, solve_poisson, BoundaryTrace, FemPoint, FemSolution, GradientRecovery, Mesh};
use crate::geometry::{CurvatureSample, WarpModel};
use crate::identities::{fitted_rate, IdentityKind, Tolerances};
use crate::radial::ClosedForm;
use crate::report::{terms, IdentityReport, Relation};

const N: f64 = 2.0;

/// Options of a FEM verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FemOptions {
    #[serde(skip)]
    pub exec: Execution,
    pub recovery: GradientRecovery,
    /// Number of meshes `h, h/2, ...` used to judge convergence.
    pub levels: usize,
    pub tol: Tolerances,
}

impl Default for FemOptions {
    fn default() -> Self {
        FemOptions {
            exec: Execution::default(),
            recovery: GradientRecovery::default(),
            levels: 3,
            tol: Tolerances::default(),
        }
    }
}

/// A solved FEM problem with its boundary trace and the 2-D space form used
/// for curvature quantities.
#[derive(Debug, Clone)]
pub struct FemContext {
    pub spec: DomainSpec,
    pub sol: FemSolution,
    pub trace: BoundaryTrace,
    pub model: WarpModel,
    pub recovery: GradientRecovery,
}

/// Geodesic distance from the origin of the chart point at radius `rho`.
fn geodesic_distance(k: f64, rho: f64) -> f64 {
    if k == 0.0 {
        rho
    } else if k > 0.0 {
        let s = k.sqrt();
        2.0 * (s * rho).atan() / s
    } else {
        let s = (-k).sqrt();
        2.0 * (s * rho).atanh() / s
    }
}

impl FemContext {
    pub fn solve(spec: DomainSpec, exec: Execution, recovery: GradientRecovery) -> Result<FemContext> {
        let mesh = Mesh::generate(&spec)?;
        FemContext::from_mesh(spec, mesh, exec, recovery)
    }

    /// Solves on a given mesh; `spec` supplies the analytic boundary.
    pub fn from_mesh(spec: DomainSpec, mesh: Mesh, exec: Execution, recovery: GradientRecovery) -> Result<FemContext> {
        let sol = solve_poisson(&mesh, exec)?;
        let trace = boundary_trace_with(&sol, &spec, recovery)?;
        let model = WarpModel::space_form(2, spec.k)?;
        Ok(FemContext {
            spec,
            sol,
            trace,
            model,
            recovery,
        })
    }

    fn curvature(&self, p: [f64; 2]) -> CurvatureSample {
        let r = geodesic_distance(self.spec.k, p[0].hypot(p[1])).max(1e-9);
        self.model
            .curvature_sample(r)
            .expect("chart points lie inside the model")
    }

    fn volume<G: Fn(&FemPoint, &CurvatureSample) -> f64>(&self, g: G) -> f64 {
        self.sol.volume_integral(|q| g(q, &self.curvature(q.p)))
    }

    /// Relative spread `(max - min)/max` of `|u_ν|` over the boundary.
    pub fn flux_spread(&self) -> f64 {
        let (min, max) = self.trace.u_nu_range();
        (max - min) / max
    }

    fn overdetermined(&self, tol: &Tolerances) -> bool {
        self.flux_spread() <= tol.fem_overdet_factor * self.spec.h
    }

    /// `|u_ν|` of the exact solution when the domain is a geodesic disk.
    pub fn reference_flux(&self) -> Option<f64> {
        match self.spec.shape {
            Shape::Disk { radius } => Some(
                ClosedForm {
                    n: 2,
                    k: self.spec.k,
                    radius,
                }
                .slope(),
            ),
            _ => None,
        }
    }

    /// `P = |∇u|² + u + ku²` at the mesh nodes, with recovered gradients.
    pub fn p_function(&self) -> Vec<f64> {
        let grads = match self.recovery {
            GradientRecovery::Average => self.sol.averaged_gradients(),
            GradientRecovery::Patch => self.sol.patch_gradients(),
            GradientRecovery::Polynomial => self.sol.polynomial_gradients(),
        };
        let k = self.spec.k;
        self.sol
            .mesh
            .nodes
            .iter()
            .zip(&grads)
            .zip(&self.sol.u.values)
            .map(|((p, g), &u)| {
                let lambda = conformal_factor(k, *p);
                (g[0] * g[0] + g[1] * g[1]) / (lambda * lambda) + 2.0 / N * u + k * u * u
            })
            .collect()
    }
}

/// Evaluates one identity on a single mesh. The tolerance is `h`, relative.
fn level_report(ctx: &FemContext, kind: IdentityKind, tol: &Tolerances) -> Result<IdentityReport> {
    let k = ctx.spec.k;
    let h = ctx.spec.h;
    let name = kind.name();
    let tr = &ctx.trace;
    let report = match kind {
        IdentityKind::Reilly | IdentityKind::Hessian | IdentityKind::Bochner => {
            return Err(Error::Usage(format!(
                "'{name}' needs second derivatives and is radial-only"
            )))
        }
        IdentityKind::Hk => {
            if tr.samples.iter().any(|s| !(s.h > 0.0)) {
                return Ok(IdentityReport::hypothesis_not_met(
                    name,
                    "mean curvature is not positive on the boundary",
                    h,
                ));
            }
            let inv_h = tr.integral(|s| 1.0 / s.h);
            let vol = ctx.sol.volume_integral(|_| 1.0);
            let int_u = ctx.sol.volume_integral(|q| q.u);
            let lhs = (N - 1.0) / N * inv_h;
            let rhs = vol + N * k * int_u;
            IdentityReport::new(
                name,
                lhs,
                rhs,
                Relation::AtLeast,
                h,
                true,
                terms([("inv_h", inv_h), ("vol", vol), ("int_u", int_u), ("gap", lhs - rhs)]),
            )
        }
        IdentityKind::Soap => {
            let perimeter = tr.perimeter();
            let flux = tr.integral(|s| s.u_nu);
            let c = -(N + 1.0) / (N * perimeter) * flux;
            if !(c > 0.0) {
                return Ok(IdentityReport::hypothesis_not_met(
                    name,
                    "soap-bubble constant c is not positive, H0 undefined",
                    h,
                ));
            }
            let h0 = 1.0 / c;
            let s = tr.integral(|b| (h0 - b.h) * b.u_nu * b.u_nu);
            let flux_defect = tr.integral(|b| (b.u_nu + c).powi(2)) / c;
            let lemma_boundary = tr.integral(|b| -(1.0 / N) * b.u_nu * ((N - 1.0) + N * b.h * b.u_nu));
            let rearranged = (N + 1.0) / N * flux + c * perimeter - flux_defect + s;
            IdentityReport::new(
                name,
                s,
                0.0,
                Relation::AtLeast,
                h,
                true,
                terms([
                    ("c", c),
                    ("h0", h0),
                    ("soap_integral", s),
                    ("flux_defect", flux_defect),
                    ("perimeter", perimeter),
                    ("rearrangement_residual", (lemma_boundary - rearranged).abs()),
                ]),
            )
        }
        IdentityKind::Pohozaev => {
            if !ctx.overdetermined(tol) {
                return Ok(IdentityReport::hypothesis_not_met(
                    name,
                    "|u_nu| is not constant on the boundary",
                    h,
                ));
            }
            let c = tr.mean_flux();
            let phi_u = ctx.volume(|q, cs| cs.phi * q.u);
            let phi = ctx.volume(|_, cs| cs.phi);
            let phi_u2 = ctx.volume(|q, cs| cs.phi * q.u * q.u);
            let curv = ctx.volume(|q, cs| q.u * q.u * (cs.phi * cs.scalar + 0.5 * cs.xr));
            let curv_term = (N - 2.0) / (2.0 * N * (N - 1.0)) * curv;
            let rhs = c * c * phi - curv_term - 2.0 * k * phi_u2;
            IdentityReport::new(
                name,
                (N + 2.0) / N * phi_u,
                rhs,
                Relation::Equal,
                h,
                true,
                terms([
                    ("phi_u", phi_u),
                    ("c", c),
                    ("c2_phi", c * c * phi),
                    ("curvature_term", curv_term),
                    ("k_phi_u2", 2.0 * k * phi_u2),
                ]),
            )
        }
        IdentityKind::PohozaevGeneral => {
            let phi_u = ctx.volume(|q, cs| cs.phi * q.u);
            let phi_u2 = ctx.volume(|q, cs| cs.phi * q.u * q.u);
            let boundary = tr.integral(|s| s.x_nu * s.u_nu * s.u_nu) / N;
            let u2_lap_phi = ctx.volume(|q, cs| q.u * q.u * cs.laplacian_phi(2));
            let lap = (N - 2.0) / (2.0 * N) * u2_lap_phi;
            IdentityReport::new(
                name,
                (N + 2.0) / N * phi_u,
                boundary + lap - 2.0 * k * phi_u2,
                Relation::Equal,
                h,
                true,
                terms([
                    ("phi_u", phi_u),
                    ("boundary_xnu_unu2", boundary),
                    ("u2_lap_phi_raw", u2_lap_phi),
                    ("u2_lap_phi", lap),
                    ("k_phi_u2", 2.0 * k * phi_u2),
                ]),
            )
        }
        IdentityKind::MainCondition => {
            let u2_phi_r = ctx.volume(|q, cs| q.u * q.u * cs.phi * cs.scalar);
            let u2_phi = ctx.volume(|q, cs| q.u * q.u * cs.phi);
            let u2_xr = ctx.volume(|q, cs| 0.5 * q.u * q.u * cs.xr);
            let scalar_form = -u2_phi_r + N * (N - 1.0) * k * u2_phi - u2_xr;
            let u2_lap_phi = ctx.volume(|q, cs| q.u * q.u * cs.laplacian_phi(2));
            let laplacian_form = u2_lap_phi + N * k * u2_phi;
            IdentityReport::new(
                name,
                scalar_form,
                (N - 1.0) * laplacian_form,
                Relation::Equal,
                h,
                true,
                terms([
                    ("scalar_form", scalar_form),
                    ("laplacian_form", laplacian_form),
                    ("u2_phi_r", u2_phi_r),
                    ("u2_phi_target", N * (N - 1.0) * k * u2_phi),
                    ("u2_half_xr", u2_xr),
                    ("u2_lap_phi", u2_lap_phi),
                ]),
            )
        }
        IdentityKind::Minkowski => {
            if !ctx.overdetermined(tol) {
                return Ok(IdentityReport::hypothesis_not_met(
                    name,
                    "|u_nu| is not constant on the boundary",
                    h,
                ));
            }
            let c = tr.mean_flux();
            let x_nu = tr.integral(|s| s.x_nu);
            let x_nu_h = tr.integral(|s| s.x_nu * s.h);
            let integrand_max = tr
                .samples
                .iter()
                .map(|s| (s.x_nu * ((N - 1.0) - c * N * s.h)).abs())
                .fold(0.0, f64::max);
            IdentityReport::new(
                name,
                (N - 1.0) * x_nu,
                c * N * x_nu_h,
                Relation::Equal,
                h,
                true,
                terms([
                    ("c", c),
                    ("x_nu", x_nu),
                    ("x_nu_h", x_nu_h),
                    ("integrand_max", integrand_max),
                ]),
            )
        }
        IdentityKind::MinkowskiProof => {
            let boundary = tr.integral(|s| s.phi * s.u_nu);
            let vol_phi = ctx.volume(|_, cs| cs.phi);
            let rhs = -ctx.volume(|q, cs| q.u * (cs.laplacian_phi(2) + N * k * cs.phi));
            IdentityReport::new(
                name,
                boundary + vol_phi,
                rhs,
                Relation::Equal,
                h,
                true,
                terms([
                    ("boundary_phi_unu", boundary),
                    ("vol_phi", vol_phi),
                    ("u_lap_phi_nk", rhs),
                ]),
            )
        }
        IdentityKind::Pfunction => {
            let p = ctx.p_function();
            let flags = ctx.sol.mesh.boundary_flags();
            let mut interior = f64::NEG_INFINITY;
            let mut boundary = f64::NEG_INFINITY;
            for (v, on_boundary) in p.iter().zip(&flags) {
                if *on_boundary {
                    boundary = boundary.max(*v);
                } else {
                    interior = interior.max(*v);
                }
            }
            let eps = h * p.iter().map(|v| v.abs()).fold(0.0, f64::max);
            IdentityReport::new(
                name,
                boundary + eps,
                interior,
                Relation::AtLeast,
                0.0,
                true,
                terms([("boundary_max", boundary), ("interior_max", interior), ("epsilon", eps)]),
            )
        }
        IdentityKind::Nonexistence => {
            return Ok(IdentityReport::hypothesis_not_met(
                name,
                "the nonexistence bound needs n >= 3",
                h,
            ));
        }
        IdentityKind::FluxCurvature => {
            if !ctx.overdetermined(tol) || tr.samples.iter().any(|s| !(s.h > 0.0)) {
                return Ok(IdentityReport::hypothesis_not_met(
                    name,
                    "needs constant |u_nu| and H > 0 on the boundary",
                    h,
                ));
            }
            let worst = tr
                .samples
                .iter()
                .map(|s| N * s.h * s.u_nu)
                .max_by(|x, y| (x + N - 1.0).abs().total_cmp(&(y + N - 1.0).abs()))
                .expect("boundary samples");
            IdentityReport::new(
                name,
                worst,
                -(N - 1.0),
                Relation::Equal,
                h,
                true,
                terms([("n_h_unu", worst), ("c", tr.mean_flux())]),
            )
        }
        IdentityKind::Divergence => {
            let flux = tr.integral(|s| s.u_nu);
            let vol = ctx.sol.volume_integral(|_| 1.0);
            let int_u = ctx.sol.volume_integral(|q| q.u);
            let mut t = terms([("flux", flux), ("vol", vol), ("nk_int_u", N * k * int_u)]);
            t.insert("mean_flux".into(), tr.mean_flux());
            if let Some(c) = ctx.reference_flux() {
                t.insert("mean_flux_error".into(), (tr.mean_flux() - c).abs());
            }
            IdentityReport::new(name, flux, -vol - N * k * int_u, Relation::Equal, h, true, t)
        }
    };
    Ok(report)
}

/// Single-mesh reports, each judged with relative tolerance `h`.
pub fn fem_reports(ctx: &FemContext, kinds: &[IdentityKind], tol: &Tolerances) -> Result<Vec<IdentityReport>> {
    kinds.iter().map(|&k| level_report(ctx, k, tol)).collect()
}

fn defect(r: &IdentityReport, relation: Relation) -> f64 {
    match relation {
        Relation::Equal => (r.lhs - r.rhs).abs(),
        Relation::AtLeast => (r.rhs - r.lhs).max(0.0),
    }
}

fn relation_of(kind: IdentityKind) -> Relation {
    match kind {
        IdentityKind::Hk | IdentityKind::Soap | IdentityKind::Pfunction | IdentityKind::Nonexistence => {
            Relation::AtLeast
        }
        _ => Relation::Equal,
    }
}

/// Below this relative size a defect is treated as rounding noise.
const ROUNDOFF: f64 = 1e-10;

/// Verifies `kinds` on `spec` by solving on `h, h/2, h/4, ...`.
///
/// The returned reports carry the values on the coarsest mesh `h`. An
/// identity passes when its defect (the violated part of the relation) is at
/// rounding level on the finest mesh, or decreases monotonically with a
/// fitted rate of at least `tol.fem_rate`. The P-function check is judged on
/// the coarsest mesh alone, with slack `h max|P|`.
pub fn verify_fem(spec: DomainSpec, kinds: &[IdentityKind], opts: &FemOptions) -> Result<Vec<IdentityReport>> {
    if let Some(k) = kinds.iter().find(|k| k.radial_only()) {
        return Err(Error::Usage(format!("'{k}' is radial-only and has no FEM check")));
    }
    let levels = opts.levels.max(1);
    let needs_refinement = kinds
        .iter()
        .any(|k| !matches!(k, IdentityKind::Pfunction | IdentityKind::Nonexistence));
    let count = if needs_refinement { levels } else { 1 };
    let specs: Vec<DomainSpec> = (0..count)
        .map(|i| DomainSpec::new(spec.shape, spec.k, spec.h / 2f64.powi(i as i32)))
        .collect::<Result<_>>()?;
    // Levels run one after another; each solve already uses `opts.exec`.
    let contexts: Vec<FemContext> = exec::map(Execution::Sequential, &specs, |s| {
        FemContext::solve(*s, opts.exec, opts.recovery)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let per_level: Vec<Vec<IdentityReport>> = contexts
        .iter()
        .map(|c| fem_reports(c, kinds, &opts.tol))
        .collect::<Result<_>>()?;
    let hs: Vec<f64> = specs.iter().map(|s| s.h).collect();
    let mut out = Vec::with_capacity(kinds.len());
    for (i, &kind) in kinds.iter().enumerate() {
        let mut base = per_level[0][i].clone();
        if !base.hypothesis_met || matches!(kind, IdentityKind::Pfunction | IdentityKind::Nonexistence) {
            out.push(base);
            continue;
        }
        let relation = relation_of(kind);
        let defects: Vec<f64> = per_level.iter().map(|r| defect(&r[i], relation)).collect();
        let scales: Vec<f64> = per_level
            .iter()
            .map(|r| {
                let t: f64 = r[i].terms.values().map(|v| v.abs()).filter(|v| v.is_finite()).sum();
                r[i].lhs.abs().max(r[i].rhs.abs()).max(t)
            })
            .collect();
        let last = defects.len() - 1;
        let at_roundoff = defects[last] <= ROUNDOFF * scales[last];
        let monotone = defects.windows(2).all(|w| w[1] < w[0]);
        let rate = fitted_rate(&hs, &defects);
        let hypotheses = per_level.iter().all(|r| r[i].hypothesis_met);
        let finite = per_level.iter().all(|r| r[i].lhs.is_finite() && r[i].rhs.is_finite());
        let converging = levels > 1 && monotone && rate.is_some_and(|q| q >= opts.tol.fem_rate);
        base.pass = hypotheses && finite && (at_roundoff || converging);
        base.tolerance = ROUNDOFF;
        for (j, d) in defects.iter().enumerate() {
            base.terms.insert(format!("defect_level{j}"), *d);
        }
        base.terms.insert("fitted_rate".into(), rate.unwrap_or(f64::NAN));
        base.terms.insert("required_rate".into(), opts.tol.fem_rate);
        if !base.pass {
            base.notes.push(format!(
                "defects {defects:?} at h = {hs:?} neither reach rounding level nor converge at rate >= {}",
                opts.tol.fem_rate
            ));
        }
        out.push(base);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(shape: Shape, k: f64, h: f64) -> FemContext {
        let spec = DomainSpec::new(shape, k, h).unwrap();
        FemContext::solve(spec, Execution::default(), GradientRecovery::default()).unwrap()
    }

    fn kinds(list: &str) -> Vec<IdentityKind> {
        IdentityKind::parse_list(list).unwrap()
    }

    #[test]
    fn disk_single_level_passes_everything() {
        let c = ctx(Shape::Disk { radius: 1.0 }, 0.0, 0.05);
        let list = "hk,soap,pohozaev,pohozaev-general,main-condition,minkowski,minkowski-proof,pfunction,flux-curvature,divergence";
        for r in fem_reports(&c, &kinds(list), &Tolerances::default()).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        assert!(c.reference_flux().unwrap() == 0.5);
    }

    #[test]
    fn hyperbolic_disk_divergence_and_pohozaev() {
        let c = ctx(Shape::Disk { radius: 0.8 }, -1.0, 0.05);
        for r in fem_reports(
            &c,
            &kinds("divergence,pohozaev-general,minkowski-proof"),
            &Tolerances::default(),
        )
        .unwrap()
        {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn ellipse_is_not_overdetermined() {
        let c = ctx(Shape::Ellipse { a: 1.5, b: 1.0 }, 0.0, 0.05);
        let rs = fem_reports(
            &c,
            &kinds("hk,pohozaev,minkowski,flux-curvature,nonexistence"),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(rs[0].pass && rs[0].term("gap") > 0.05 * rs[0].term("vol"));
        for r in &rs[1..] {
            assert!(!r.hypothesis_met && !r.pass, "{r:?}");
        }
    }

    #[test]
    fn refinement_verdicts_on_the_ellipse() {
        let spec = DomainSpec::new(Shape::Ellipse { a: 1.5, b: 1.0 }, 0.0, 0.1).unwrap();
        let opts = FemOptions::default();
        let rs = verify_fem(
            spec,
            &kinds("hk,soap,pohozaev-general,minkowski-proof,divergence"),
            &opts,
        )
        .unwrap();
        for r in &rs {
            assert!(r.pass, "{r:?}");
        }
        assert!(rs[2].term("fitted_rate") >= 1.0);
        assert!(verify_fem(spec, &kinds("reilly"), &opts).is_err());
    }

    #[test]
    fn geodesic_distance_inverts_chart_radius() {
        use crate::fem2d::domain::chart_radius;
        for k in [-1.0, 0.0, 0.7] {
            let r = 0.9;
            let rho = chart_radius(k, r)[0];
            assert!((geodesic_distance(k, rho) - r).abs() < 1e-14);
        }
    }
}
