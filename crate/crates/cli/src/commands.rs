//! The subcommands. Each writes its report to `out` and returns whether all
//! enabled checks passed.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::Context;
use num_traits::Signed;

use euler_mmot::costs::modified_cost;
use euler_mmot::euler::{
    continuous_optimal_cost, el_residual, gerosplan_plan, optimal_face_width,
    pushforward_partition, theorem1_branch_tuples, theorem1_cost_tolerance,
    theorem1_discretized_plan, upper_vacating_path, BranchMap, Component, PressureFunction,
    QSqrt3,
};
use euler_mmot::lp::{
    assemble_mmot_lp, closed_form_optimum, monge_bruteforce, optimal_face_probe, path_functional,
    solve_simplex, AssembleOptions, LinearProgram, LpForm, LpSolution, LpStatus, SolveOptions,
};
use euler_mmot::measures::has_uniform_marginals;
use euler_mmot::rational::{format_q, q, qi, to_f64};
use euler_mmot::render::{render_ascii, render_svg, RenderOptions};
use euler_mmot::{
    Arith, CostFunction, EndpointMap, Error, MassValue, SpatialGrid, TimeGrid, TransportPlan, Q,
};

use crate::config::{
    Caps, Prop1Config, RenderConfig, RenderFormat, RunConfig, SolveConfig, SweepConfig,
    Thm1Config,
};
use crate::exit;

/// Whether every enabled check held; `Fail` names the first violated claim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

/// Bad arguments or unreadable input.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// The solver stopped without an optimal solution.
#[derive(Debug)]
pub struct SolverFailure(pub String);

impl fmt::Display for SolverFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SolverFailure {}

/// Exit status for an error.
pub fn exit_code(error: &anyhow::Error) -> i32 {
    if error.downcast_ref::<SolverFailure>().is_some() {
        return exit::SOLVER;
    }
    match error.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_) | Error::EndpointMapUndefined(_) | Error::Parse(_)) => {
            exit::USAGE
        }
        Some(_) => exit::SOLVER,
        None => exit::USAGE,
    }
}

pub fn execute(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<Verdict> {
    match config {
        RunConfig::Solve(c) => cmd_solve(c, out),
        RunConfig::Prop1(c) => cmd_prop1(c, out, err),
        RunConfig::Thm1(c) => cmd_thm1(c, out),
        RunConfig::Sweep(c) => cmd_sweep(c, out),
        RunConfig::Render(c) => cmd_render(c, out),
    }
}

fn solve_options(arith: Arith, caps: &Caps) -> anyhow::Result<SolveOptions> {
    let mut options = match arith {
        Arith::Rational => SolveOptions::rational(),
        Arith::Float => SolveOptions::float(),
    };
    options.max_pivots = caps.max_pivots;
    if arith == Arith::Float {
        let limit = Duration::try_from_secs_f64(caps.time_limit)
            .map_err(|_| UsageError(format!("bad time limit {}", caps.time_limit)))?;
        options.time_limit = Some(limit);
    }
    Ok(options)
}

fn assemble_options(caps: &Caps) -> AssembleOptions {
    AssembleOptions {
        path_cap: caps.path_cap.into(),
        ..AssembleOptions::default()
    }
}

fn require_optimal(solution: &LpSolution) -> anyhow::Result<()> {
    match solution.status {
        LpStatus::Optimal => Ok(()),
        LpStatus::Infeasible => Err(SolverFailure("linear program is infeasible".into()).into()),
        LpStatus::ResourceLimit => Err(SolverFailure(format!(
            "solver stopped at a resource limit after {} pivots",
            solution.pivots
        ))
        .into()),
    }
}

fn flags(values: &[bool]) -> String {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("t{i}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

struct Instance {
    grid: SpatialGrid,
    timegrid: TimeGrid,
    endpoint: EndpointMap,
}

fn exact(value: &MassValue) -> anyhow::Result<Q> {
    value
        .exact()
        .cloned()
        .ok_or_else(|| anyhow::anyhow!(Error::Internal("expected an exact value".into())))
}

fn cmd_solve(config: &SolveConfig, out: &mut dyn Write) -> anyhow::Result<Verdict> {
    let grid = config.grid.build()?;
    let timegrid = TimeGrid::unit(config.steps)?;
    let endpoint = config.endpoint.build(&grid)?;
    let cost = config.cost.build(&timegrid);
    let arith: Arith = config.arith.into();
    let form: LpForm = config.form.into();
    let lp = assemble_mmot_lp(&grid, &timegrid, &cost, Some(&endpoint), form, &assemble_options(&config.caps))?;
    let mut options = solve_options(arith, &config.caps)?;
    options.pricing = config.pricing.map(Into::into);
    let solution = solve_simplex(&lp, &options)?;

    writeln!(out, "grid: {}", config.grid)?;
    writeln!(out, "steps: {}", config.steps)?;
    writeln!(out, "endpoint: {}", config.endpoint)?;
    writeln!(out, "cost: {}", cost.name())?;
    writeln!(out, "form: {}", serde_json::to_value(form)?.as_str().unwrap_or_default())?;
    writeln!(out, "arith: {arith}")?;
    writeln!(out, "columns: {}", lp.num_columns())?;
    writeln!(out, "rows: {}", lp.num_rows())?;
    writeln!(out, "status: {}", serde_json::to_value(solution.status)?.as_str().unwrap_or_default())?;
    require_optimal(&solution)?;
    let plan = solution.to_full_plan(&lp)?;
    let value = solution.value.as_ref().expect("optimal solutions carry a value");
    writeln!(out, "value: {value}")?;
    writeln!(out, "pivots: {}", solution.pivots)?;
    writeln!(out, "atoms: {}", plan.len())?;
    let splitting = plan.splitting_profile();
    writeln!(out, "splitting: {}", flags(&splitting))?;
    let monge: Vec<bool> = splitting.iter().map(|s| !s).collect();
    writeln!(out, "monge: {}", flags(&monge))?;
    writeln!(out, "everywhere-splitting: {}", plan.is_everywhere_mass_splitting())?;
    if let Some(path) = &config.out {
        write_file(path, &plan.to_json_string())?;
        writeln!(out, "plan: {}", path.display())?;
    }
    Ok(Verdict::Pass)
}

/// One row of the fully discrete report.
struct Prop1Row {
    steps: usize,
    lp: Q,
    closed: Q,
    gamma0: Q,
    gamma0_feasible: bool,
    monge: Option<Q>,
    split: bool,
    width: Q,
}

fn prop1_row(steps: usize, config: &Prop1Config) -> anyhow::Result<Prop1Row> {
    let grid = SpatialGrid::three_point();
    let timegrid = TimeGrid::unit(steps)?;
    let endpoint = EndpointMap::flip(&grid)?;
    let cost = CostFunction::Action {
        timegrid: timegrid.clone(),
    };
    let lp: LinearProgram = assemble_mmot_lp(
        &grid,
        &timegrid,
        &cost,
        Some(&endpoint),
        LpForm::Full,
        &assemble_options(&config.caps),
    )?;
    let options = solve_options(Arith::Rational, &config.caps)?;
    let solution = solve_simplex(&lp, &options)?;
    require_optimal(&solution)?;
    let plan = solution.to_full_plan(&lp)?;
    let functional = path_functional(&lp, &upper_vacating_path(steps))?;
    let face = optimal_face_probe(&lp, &solution, &functional, &options)?;
    let monge = match monge_bruteforce(&grid, &timegrid, &cost, &endpoint, config.monge_cap.into()) {
        Ok(m) => Some(m.value),
        Err(Error::ResourceLimit { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let gamma0 = gerosplan_plan(steps)?;
    Ok(Prop1Row {
        steps,
        lp: exact(solution.value.as_ref().expect("optimal"))?,
        closed: closed_form_optimum(steps),
        gamma0: exact(&gamma0.cost(&cost)?)?,
        gamma0_feasible: has_uniform_marginals(&gamma0),
        monge,
        split: plan.splitting_profile().iter().any(|s| *s),
        width: exact(&face.width())?,
    })
}

impl Prop1Row {
    /// The claims checked on this row, in reporting order.
    fn claims(&self) -> Vec<(String, bool)> {
        let n = self.steps;
        let mut claims = vec![
            (format!("N={n}: LP optimum equals (4 + 4/(N-1))/3"), self.lp == self.closed),
            (
                format!("N={n}: gamma0 is feasible and attains the LP optimum"),
                self.gamma0_feasible && self.gamma0 == self.lp,
            ),
        ];
        if let Some(monge) = &self.monge {
            if n >= 4 {
                claims.push((
                    format!("N={n}: Monge optimum is 2 and strictly above the LP optimum"),
                    *monge == qi(2) && *monge > self.lp,
                ));
            } else {
                claims.push((format!("N={n}: Monge optimum attains the LP optimum"), *monge == self.lp));
            }
        }
        if n >= 4 {
            claims.push((format!("N={n}: the LP optimizer splits mass"), self.split));
        }
        claims.push((
            format!("N={n}: optimal face width for (0,1,...,1,0) is {}", format_q(&optimal_face_width(n))),
            self.width == optimal_face_width(n),
        ));
        claims
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.steps.to_string(),
            format_q(&self.lp),
            format_q(&self.closed),
            format_q(&self.gamma0),
            self.monge.as_ref().map_or("skipped".into(), format_q),
            if self.steps >= 4 {
                self.split.to_string()
            } else {
                "not-asserted".into()
            },
            format_q(&self.width),
        ]
    }
}

pub const PROP1_HEADER: [&str; 7] = ["n", "lp", "closed", "gamma0", "monge", "split", "width"];

fn csv_text(header: &[&str], records: &[Vec<String>]) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for record in records {
        writer.write_record(record)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

fn cmd_prop1(config: &Prop1Config, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<Verdict> {
    if config.from < 3 || config.from > config.to {
        anyhow::bail!(UsageError(format!(
            "need 3 <= from <= to, got {}..{}",
            config.from, config.to
        )));
    }
    let mut records = Vec::new();
    let mut verdict = Verdict::Pass;
    for steps in config.from..=config.to {
        let row = prop1_row(steps, config)?;
        for (claim, holds) in row.claims() {
            if !holds && verdict == Verdict::Pass {
                verdict = Verdict::Fail(claim);
            }
        }
        if row.monge.is_none() {
            writeln!(err, "N={steps}: Monge enumeration exceeds the cap; skipped")?;
        }
        records.push(row.record());
    }
    let text = csv_text(&PROP1_HEADER, &records)?;
    out.write_all(text.as_bytes())?;
    if let Some(path) = &config.out {
        write_file(path, &text)?;
    }
    Ok(verdict)
}

fn cmd_thm1(config: &Thm1Config, out: &mut dyn Write) -> anyhow::Result<Verdict> {
    let n = config.n;
    if n < 2 || n % 2 == 1 {
        anyhow::bail!(UsageError(format!("resolution must be even and at least 2, got {n}")));
    }
    let plans: Vec<(Component, TransportPlan)> = Component::ALL
        .into_iter()
        .map(|c| theorem1_discretized_plan(n, c).map(|p| (c, p)))
        .collect::<euler_mmot::Result<_>>()?;
    let cost = CostFunction::Action {
        timegrid: TimeGrid::unit(3)?,
    };
    writeln!(out, "resolution: {n} ({} cells of width 1/{n})", 2 * n)?;
    for (component, plan) in &plans {
        let c = exact(&plan.cost(&cost)?)?;
        writeln!(
            out,
            "{component}: atoms={} cost={} ({}) splitting: {}",
            plan.len(),
            format_q(&c),
            MassValue::Approx(to_f64(&c)),
            flags(&plan.splitting_profile())
        )?;
    }
    let gamma = |c: Component| &plans.iter().find(|(k, _)| *k == c).expect("all components built").1;
    let gamma0_cost = exact(&gamma(Component::Gamma0).cost(&cost)?)?;
    let cell = q(1, 2 * n as i64);
    let tuples = theorem1_branch_tuples(n, Component::Gamma0)?;

    let mut checks: Vec<(String, bool)> = Vec::new();
    checks.push((
        "marginals of gamma0, gamma1, gamma2 are exactly uniform".into(),
        plans.iter().all(|(_, p)| {
            (0..4).all(|i| {
                p.marginal(i)
                    .ok()
                    .and_then(|m| m.exact())
                    .is_some_and(|m| m.iter().all(|v| *v == cell))
            })
        }),
    ));
    let residual_zero = tuples.iter().all(|t| {
        let path: Vec<QSqrt3> = t.iter().cloned().map(QSqrt3::rational).collect();
        el_residual(&path, &PressureFunction).is_ok_and(|r| r.is_zero())
    });
    checks.push(("Euler-Lagrange residual is 0 on every branch tuple".into(), residual_zero));
    checks.push((
        "modified cost is 0 on every branch tuple".into(),
        tuples
            .iter()
            .all(|t| modified_cost(&[t[0].clone(), t[1].clone(), t[2].clone()]) == qi(0)),
    ));
    let mut preserving = true;
    for map in BranchMap::ALL {
        preserving &= pushforward_partition(map, n)?.iter().all(|m| *m == cell);
    }
    checks.push(("T1, T2, S1, S2 push the uniform measure to itself".into(), preserving));
    let gap = (&gamma0_cost - continuous_optimal_cost()).abs();
    writeln!(
        out,
        "cost gap: |cost(gamma0) - 1| = {} <= {}",
        format_q(&gap),
        format_q(&theorem1_cost_tolerance(n))
    )?;
    checks.push((
        format!("|cost(gamma0) - 1| <= 4/{n}"),
        gap <= theorem1_cost_tolerance(n),
    ));
    checks.push((
        "gamma0 splits mass at t0, t1, t2, t3".into(),
        gamma(Component::Gamma0).is_everywhere_mass_splitting(),
    ));
    checks.push((
        "gamma1 does not split mass at t0".into(),
        !gamma(Component::Gamma1).is_mass_splitting(0)?,
    ));
    checks.push((
        "gamma2 does not split mass at t0".into(),
        !gamma(Component::Gamma2).is_mass_splitting(0)?,
    ));

    let mut verdict = Verdict::Pass;
    for (claim, holds) in checks {
        writeln!(out, "check {}: {claim}", if holds { "pass" } else { "FAIL" })?;
        if !holds && verdict == Verdict::Pass {
            verdict = Verdict::Fail(claim);
        }
    }
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (component, plan) in &plans {
            let path = dir.join(format!("{component}.json"));
            write_file(&path, &plan.to_json_string())?;
            writeln!(out, "plan: {}", path.display())?;
        }
    }
    Ok(verdict)
}

pub const SWEEP_HEADER: [&str; 9] = [
    "grid", "steps", "status", "value", "splitting", "monge", "pivots", "seconds", "error",
];

fn sweep_instance(config: &SweepConfig, grid_index: usize, steps: usize) -> anyhow::Result<(LpSolution, TransportPlan)> {
    let spec = &config.grids[grid_index];
    let grid = spec.build()?;
    let instance = Instance {
        timegrid: TimeGrid::unit(steps)?,
        endpoint: config.endpoint.build(&grid)?,
        grid,
    };
    let cost = CostFunction::Action {
        timegrid: instance.timegrid.clone(),
    };
    let lp = assemble_mmot_lp(
        &instance.grid,
        &instance.timegrid,
        &cost,
        Some(&instance.endpoint),
        LpForm::Full,
        &assemble_options(&config.caps),
    )?;
    let solution = solve_simplex(&lp, &solve_options(config.arith.into(), &config.caps)?)?;
    require_optimal(&solution)?;
    let plan = solution.to_full_plan(&lp)?;
    Ok((solution, plan))
}

fn cmd_sweep(config: &SweepConfig, out: &mut dyn Write) -> anyhow::Result<Verdict> {
    let mut records = Vec::new();
    for (g, spec) in config.grids.iter().enumerate() {
        for &steps in &config.steps {
            let start = Instant::now();
            let result = sweep_instance(config, g, steps);
            let seconds = format!("{:.3}", start.elapsed().as_secs_f64());
            let record = match result {
                Ok((solution, plan)) => {
                    let splitting = plan.splitting_profile();
                    vec![
                        spec.to_string(),
                        steps.to_string(),
                        "optimal".into(),
                        solution.value.as_ref().map(|v| v.to_string()).unwrap_or_default(),
                        splitting.iter().map(|s| if *s { '1' } else { '0' }).collect(),
                        (!splitting.iter().any(|s| *s)).to_string(),
                        solution.pivots.to_string(),
                        seconds,
                        String::new(),
                    ]
                }
                Err(e) => {
                    let status = if exit_code(&e) == exit::SOLVER { "solver-error" } else { "error" };
                    vec![
                        spec.to_string(),
                        steps.to_string(),
                        status.into(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        seconds,
                        format!("{e:#}"),
                    ]
                }
            };
            records.push(record);
        }
    }
    let text = csv_text(&SWEEP_HEADER, &records)?;
    out.write_all(text.as_bytes())?;
    if let Some(path) = &config.out {
        write_file(path, &text)?;
    }
    Ok(Verdict::Pass)
}

fn cmd_render(config: &RenderConfig, out: &mut dyn Write) -> anyhow::Result<Verdict> {
    let text = std::fs::read_to_string(&config.input)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", config.input.display())))?;
    let plan = TransportPlan::from_json_str(&text)
        .with_context(|| format!("malformed plan file {}", config.input.display()))?;
    let rendered = match config.format {
        RenderFormat::Svg => render_svg(
            &plan,
            &RenderOptions {
                stroke_scale: config.stroke_scale,
                ..RenderOptions::default()
            },
        )?,
        RenderFormat::Ascii => render_ascii(&plan, config.columns, config.rows)?,
    };
    match &config.out {
        Some(path) => write_file(path, &rendered)?,
        None => out.write_all(rendered.as_bytes())?,
    }
    Ok(Verdict::Pass)
}
