//! Subcommand implementations. Each returns the rendered output and whether
//! it passed; errors carry their exit code.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serrin_core::exec::{self, Execution};
use serrin_core::fem2d::{DomainSpec, GradientRecovery, Mesh, Shape};
use serrin_core::geometry::unit_sphere_area;
use serrin_core::identities::{
    fem_reports, fitted_rate, radial_reports, verify_fem, FemContext, FemOptions, IdentityKind, TestFunction,
    Tolerances,
};
use serrin_core::radial::{
    solve_ball_closed_form, solve_ball_numeric, solve_slab, BallProblem, RadialSolution, SlabProblem, SolveOptions,
};
use serrin_core::{Error, IdentityReport, Interval, Warp, WarpModel};

use crate::args::*;
use crate::report::{
    overall_pass, render_bundle, render_records, render_sweep, Metadata, ReportBundle, SweepBundle, SweepRow,
};
use crate::{CliError, Outcome};

fn execution(out: &OutputArgs) -> Execution {
    if out.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn tolerances(t: &ToleranceArgs) -> Result<Tolerances, CliError> {
    if !(t.tol > 0.0) || !(t.fem_rate > 0.0) || !(t.overdet_factor > 0.0) {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    Ok(Tolerances {
        radial: t.tol,
        fem_overdet_factor: t.overdet_factor,
        fem_rate: t.fem_rate,
    })
}

fn params<T: serde::Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

/// Builds the ambient model. `ball` restricts the interval to `t > 0` so the
/// pole sits at the boundary of the coordinate range.
pub fn build_model(
    n: usize,
    k: f64,
    warp: Option<&str>,
    fiber_scalar: Option<f64>,
    fiber_volume: Option<f64>,
    ball: bool,
) -> Result<WarpModel, Error> {
    let default_name = if k > 0.0 {
        "sphere"
    } else if k < 0.0 {
        "hyperbolic"
    } else {
        "euclidean"
    };
    let warp = Warp::from_name(warp.unwrap_or(default_name), k)?;
    let round = (n.saturating_sub(1) * n.saturating_sub(2)) as f64;
    let d = warp.derivatives(0.0);
    let pole = d[0].abs() < 1e-10 && (d[1] - 1.0).abs() < 1e-6;
    let fiber = fiber_scalar.unwrap_or(match warp {
        Warp::Euclidean | Warp::Sphere { .. } | Warp::Hyperbolic { .. } => round,
        Warp::Cosh => -round,
        Warp::Exp => 0.0,
        Warp::Custom(_) => {
            if pole {
                round
            } else {
                0.0
            }
        }
    });
    let interval = match warp {
        Warp::Sphere { k } => Interval::new(0.0, PI / k.sqrt())?,
        Warp::Euclidean | Warp::Hyperbolic { .. } => Interval::new(0.0, f64::INFINITY)?,
        _ if ball => Interval::new(0.0, f64::INFINITY)?,
        _ => Interval::new(f64::NEG_INFINITY, f64::INFINITY)?,
    };
    let volume = fiber_volume.unwrap_or(if pole && fiber == round {
        unit_sphere_area(n.saturating_sub(1))
    } else {
        1.0
    });
    if !(volume > 0.0) {
        return Err(Error::Usage(format!("fiber volume must be positive, got {volume}")));
    }
    Ok(WarpModel::new(n, warp, interval, fiber, k)?.with_fiber_volume(volume))
}

fn solve_ball(
    model: WarpModel,
    radius: f64,
    solver: BallSolver,
    allow_nonpositive: bool,
) -> Result<RadialSolution, Error> {
    let p = BallProblem { model, radius };
    let opts = SolveOptions {
        allow_nonpositive,
        ..SolveOptions::default()
    };
    match solver {
        BallSolver::Closed => solve_ball_closed_form(&p, opts),
        BallSolver::Numeric => solve_ball_numeric(&p, opts),
        BallSolver::Auto if p.model.is_space_form() => solve_ball_closed_form(&p, opts),
        BallSolver::Auto => solve_ball_numeric(&p, opts),
    }
}

fn radial_diagnostics(sol: &RadialSolution) -> BTreeMap<String, f64> {
    let data = sol.serrin_boundary_data();
    let mut d = BTreeMap::new();
    d.insert("c".into(), sol.c);
    d.insert("overdet_holds".into(), if data.overdet_holds { 1.0 } else { 0.0 });
    d.insert("flux_curvature_holds".into(), if data.cor23_holds { 1.0 } else { 0.0 });
    d.insert("pde_residual".into(), sol.pde_residual());
    d.insert("positive".into(), if sol.positive { 1.0 } else { 0.0 });
    d.insert("u_max".into(), sol.u.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    d
}

fn check_radial(
    sol: &RadialSolution,
    checks: &CheckArgs,
    tol: &Tolerances,
) -> Result<(BTreeMap<String, f64>, Vec<IdentityReport>), Error> {
    let kinds = IdentityKind::parse_list(&checks.identities)?;
    let testfn = TestFunction::from_name(&checks.test_function)?;
    let reports = radial_reports(sol, &kinds, testfn, tol)?;
    Ok((radial_diagnostics(sol), reports))
}

pub fn verify_ball(args: &BallArgs) -> Result<Outcome, CliError> {
    let tol = tolerances(&args.tolerance)?;
    let m = &args.model;
    let model = build_model(m.n, m.k, m.warp.as_deref(), m.fiber_scalar, m.fiber_volume, true)?;
    // validate the identity list before solving
    IdentityKind::parse_list(&args.checks.identities)?;
    let sol = solve_ball(model, args.radius, args.solver, args.allow_nonpositive)?;
    let (diag, reports) = check_radial(&sol, &args.checks, &tol)?;
    let bundle = ReportBundle::new(Metadata::new("verify-ball", params(args)), diag, reports);
    Ok(Outcome::new(render_bundle(&bundle, args.output.format), bundle.pass))
}

pub fn verify_slab(args: &SlabArgs) -> Result<Outcome, CliError> {
    let tol = tolerances(&args.tolerance)?;
    let m = &args.model;
    if !(args.a < args.b) {
        return Err(CliError::Usage(format!(
            "slab needs a < b, got a = {}, b = {}",
            args.a, args.b
        )));
    }
    IdentityKind::parse_list(&args.checks.identities)?;
    let model = build_model(m.n, m.k, m.warp.as_deref(), m.fiber_scalar, m.fiber_volume, false)?;
    let sol = solve_slab(
        &SlabProblem {
            model,
            a: args.a,
            b: args.b,
        },
        SolveOptions::default(),
    )?;
    let (diag, reports) = check_radial(&sol, &args.checks, &tol)?;
    let bundle = ReportBundle::new(Metadata::new("verify-slab", params(args)), diag, reports);
    Ok(Outcome::new(render_bundle(&bundle, args.output.format), bundle.pass))
}

pub fn domain_spec(d: &DomainArgs) -> Result<DomainSpec, Error> {
    let shape = match d.domain {
        DomainKind::Disk => Shape::Disk { radius: d.radius },
        DomainKind::Ellipse => Shape::Ellipse { a: d.a, b: d.b },
        DomainKind::PerturbedDisk => Shape::PerturbedDisk {
            radius: d.radius,
            eps: d.eps,
            m: d.m,
        },
    };
    DomainSpec::new(shape, d.k, d.h)
}

/// Parses a FEM identity list; `all` means every identity with a FEM check.
fn fem_kinds(list: &str) -> Result<Vec<IdentityKind>, Error> {
    let kinds = IdentityKind::parse_list(list)?;
    if list.split(',').any(|s| s.trim() == "all") {
        let named: Vec<IdentityKind> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty() && *s != "all")
            .map(IdentityKind::from_name)
            .collect::<Result<_, _>>()?;
        Ok(kinds
            .into_iter()
            .filter(|k| !k.radial_only() || named.contains(k))
            .collect())
    } else {
        Ok(kinds)
    }
}

fn fem_diagnostics(ctx: &FemContext) -> BTreeMap<String, f64> {
    let (min, max) = ctx.trace.u_nu_range();
    let mut d = BTreeMap::new();
    d.insert("h".into(), ctx.spec.h);
    d.insert("nodes".into(), ctx.sol.mesh.nodes.len() as f64);
    d.insert("area".into(), ctx.sol.volume_integral(|_| 1.0));
    d.insert("perimeter".into(), ctx.trace.perimeter());
    d.insert("u_nu_min".into(), min);
    d.insert("u_nu_max".into(), max);
    d.insert("u_nu_ratio".into(), max / min);
    d.insert("mean_flux".into(), ctx.trace.mean_flux());
    d.insert("linear_residual".into(), ctx.sol.residual);
    d.insert("positive".into(), if ctx.sol.positive { 1.0 } else { 0.0 });
    d
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn verify_fem_cmd(args: &FemArgs) -> Result<Outcome, CliError> {
    let tol = tolerances(&args.tolerance)?;
    let kinds = fem_kinds(&args.identities)?;
    if let Some(k) = kinds.iter().find(|k| k.radial_only()) {
        return Err(CliError::Usage(format!("'{k}' is radial-only and has no FEM check")));
    }
    let recovery = GradientRecovery::from_name(&args.recovery)?;
    if args.levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    let spec = domain_spec(&args.domain)?;
    let exec = execution(&args.output);
    let ctx = match &args.mesh {
        Some(path) => {
            let mesh = Mesh::from_text(&read_file(path)?, spec.k)?;
            mesh.validate()?;
            FemContext::from_mesh(spec, mesh, exec, recovery)?
        }
        None => FemContext::solve(spec, exec, recovery)?,
    };
    let reports = if args.mesh.is_some() || args.levels == 1 {
        fem_reports(&ctx, &kinds, &tol)?
    } else {
        let opts = FemOptions {
            exec,
            recovery,
            levels: args.levels,
            tol,
        };
        verify_fem(spec, &kinds, &opts)?
    };
    let bundle = ReportBundle::new(
        Metadata::new("verify-fem", params(args)),
        fem_diagnostics(&ctx),
        reports,
    );
    Ok(Outcome::new(render_bundle(&bundle, args.output.format), bundle.pass))
}

fn sweep_values(args: &SweepArgs) -> Result<Vec<f64>, CliError> {
    let values = match (&args.values, args.from, args.to, args.steps) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(from), Some(to), Some(steps)) => {
            if steps == 0 {
                return Err(CliError::Usage("--steps must be at least 1".into()));
            }
            if steps == 1 {
                vec![from]
            } else {
                (0..steps)
                    .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
                    .collect()
            }
        }
        _ => {
            return Err(CliError::Usage(
                "give either --values or all of --from, --to and --steps".into(),
            ))
        }
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage("sweep values must be finite and non-empty".into()));
    }
    let up = values.windows(2).all(|w| w[1] > w[0]);
    let down = values.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(CliError::Usage(format!(
            "sweep range is not strictly monotone: {values:?}"
        )));
    }
    Ok(values)
}

fn sweep_target(args: &SweepArgs) -> Result<SweepTarget, CliError> {
    let target = args.target.unwrap_or(match args.param {
        SweepParam::Radius | SweepParam::K => SweepTarget::Ball,
        _ => SweepTarget::Fem,
    });
    let ok = match target {
        SweepTarget::Ball => matches!(args.param, SweepParam::Radius | SweepParam::K),
        SweepTarget::Fem => true,
    };
    if !ok {
        return Err(CliError::Usage(format!(
            "parameter {:?} cannot be swept on balls",
            args.param
        )));
    }
    Ok(target)
}

fn sweep_point(args: &SweepArgs, target: SweepTarget, value: f64, tol: &Tolerances) -> Result<SweepRow, Error> {
    let mut d = args.domain.clone();
    // sweeping a shape parameter selects the shape that has it
    match (args.param, d.domain) {
        (SweepParam::Eps, DomainKind::Disk | DomainKind::Ellipse) => d.domain = DomainKind::PerturbedDisk,
        (SweepParam::A | SweepParam::B, DomainKind::Disk | DomainKind::PerturbedDisk) => d.domain = DomainKind::Ellipse,
        _ => {}
    }
    match args.param {
        SweepParam::Radius => d.radius = value,
        SweepParam::K => d.k = value,
        SweepParam::A => d.a = value,
        SweepParam::B => d.b = value,
        SweepParam::Eps => d.eps = value,
        SweepParam::H => d.h = value,
    }
    let (diagnostics, reports) = match target {
        SweepTarget::Ball => {
            let model = build_model(
                args.n,
                d.k,
                args.warp.as_deref(),
                args.fiber_scalar,
                args.fiber_volume,
                true,
            )?;
            let sol = solve_ball(model, d.radius, BallSolver::Auto, args.allow_nonpositive)?;
            let checks = CheckArgs {
                identities: args.identities.clone(),
                test_function: args.test_function.clone(),
            };
            check_radial(&sol, &checks, tol)?
        }
        SweepTarget::Fem => {
            let kinds = fem_kinds(&args.identities)?;
            let recovery = GradientRecovery::from_name(&args.recovery)?;
            // points already run concurrently
            let ctx = FemContext::solve(domain_spec(&d)?, Execution::Sequential, recovery)?;
            (fem_diagnostics(&ctx), fem_reports(&ctx, &kinds, tol)?)
        }
    };
    let pass = overall_pass(&reports);
    Ok(SweepRow {
        value,
        diagnostics,
        reports,
        pass,
    })
}

/// Fitted rates of each identity's `residual_abs`, and of any flux error
/// term, against `h`.
fn h_rates(rows: &[SweepRow]) -> BTreeMap<String, f64> {
    let hs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let mut out = BTreeMap::new();
    let Some(first) = rows.first() else {
        return out;
    };
    for (i, r) in first.reports.iter().enumerate() {
        let mut series = vec![(
            format!("{}.residual_abs", r.name),
            rows.iter().map(|row| row.reports[i].residual_abs).collect::<Vec<_>>(),
        )];
        if r.terms.contains_key("mean_flux_error") {
            series.push((
                format!("{}.mean_flux_error", r.name),
                rows.iter().map(|row| row.reports[i].term("mean_flux_error")).collect(),
            ));
        }
        for (key, errors) in series {
            if let Some(rate) = fitted_rate(&hs, &errors) {
                out.insert(key, rate);
            }
        }
    }
    out
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome, CliError> {
    let tol = tolerances(&args.tolerance)?;
    let target = sweep_target(args)?;
    let values = sweep_values(args)?;
    match target {
        SweepTarget::Ball => {
            IdentityKind::parse_list(&args.identities)?;
        }
        SweepTarget::Fem => {
            let kinds = fem_kinds(&args.identities)?;
            if let Some(k) = kinds.iter().find(|k| k.radial_only()) {
                return Err(CliError::Usage(format!("'{k}' is radial-only and has no FEM check")));
            }
            GradientRecovery::from_name(&args.recovery)?;
        }
    }
    TestFunction::from_name(&args.test_function)?;
    let rows: Vec<SweepRow> = exec::map(execution(&args.output), &values, |&v| {
        sweep_point(args, target, v, &tol)
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    let rates = if args.param == SweepParam::H {
        h_rates(&rows)
    } else {
        BTreeMap::new()
    };
    let pass = rows.iter().all(|r| r.pass);
    let parameter = serde_json::to_value(args.param)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let bundle = SweepBundle {
        metadata: Metadata::new("sweep", params(args)),
        parameter,
        rows,
        rates,
        pass,
    };
    Ok(Outcome::new(render_sweep(&bundle, args.output.format), bundle.pass))
}

fn cell(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

pub fn mesh(args: &MeshArgs) -> Result<Outcome, CliError> {
    let spec = domain_spec(&args.domain)?;
    let mesh = Mesh::generate(&spec)?;
    let text = match args.format {
        MeshFormat::Text => mesh.to_text(),
        other => {
            let s = mesh.stats();
            let format = match other {
                MeshFormat::Json => Format::Json,
                MeshFormat::Csv => Format::Csv,
                _ => Format::Table,
            };
            let record = vec![
                cell("vertices", s.vertices),
                cell("edges", s.edges),
                cell("triangles", s.triangles),
                cell("boundary_edges", s.boundary_edges),
                cell("euler", s.euler),
                cell("max_edge", format!("{:.6e}", s.max_edge)),
                cell("min_area", format!("{:.6e}", s.min_area)),
                cell("euclidean_area", format!("{:.10e}", mesh.euclidean_area())),
                cell("riemannian_area", format!("{:.10e}", mesh.riemannian_area())),
            ];
            render_records("mesh", &[record], format)
        }
    };
    Ok(Outcome::new(text, true))
}

pub fn catalog(args: &CatalogArgs) -> Result<Outcome, CliError> {
    let n = args.n;
    if n < 2 {
        return Err(CliError::Usage(format!("dimension n must be >= 2, got {n}")));
    }
    let mut entries: Vec<(String, f64)> = vec![
        ("euclidean".into(), 0.0),
        ("sphere".into(), 1.0),
        ("hyperbolic".into(), -1.0),
        ("exp".into(), -1.0),
        ("cosh".into(), -1.0),
    ];
    if let Some(w) = &args.warp {
        entries.push((w.clone(), 0.0));
    }
    let mut records = Vec::new();
    for (name, k) in entries {
        let model = build_model(n, k, Some(&name), None, None, false)?;
        let (lo, hi) = match model.warp {
            Warp::Sphere { k } => (0.1, PI / k.sqrt() - 0.1),
            Warp::Euclidean | Warp::Hyperbolic { .. } => (0.1, 2.0),
            _ => (0.1, 1.5),
        };
        let samples: Vec<f64> = (0..50).map(|i| lo + (hi - lo) * i as f64 / 49.0).collect();
        let einstein = model.check_einstein(&samples, 1e-10)?;
        let mid = model.curvature_sample(0.5 * (lo + hi))?;
        records.push(vec![
            cell("warp", model.warp.name()),
            cell("n", n),
            cell("fiber_scalar", model.fiber_scalar),
            cell("k", k),
            cell("scalar_curvature_mid", format!("{:.10e}", mid.scalar)),
            cell("einstein", einstein.pass),
            cell("einstein_deviation", format!("{:.3e}", einstein.residual_abs)),
        ]);
    }
    let mut text = render_records("catalog", &records, args.format);
    if args.format == Format::Table {
        let names: Vec<&str> = IdentityKind::ALL.iter().map(|k| k.name()).collect();
        text.push_str(&format!("\nidentities: {}\n", names.join(", ")));
    }
    Ok(Outcome::new(text, true))
}
