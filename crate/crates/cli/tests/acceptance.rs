//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use euler_mmot::costs::{action_cost, modified_cost};
use euler_mmot::euler::{
    continuous_optimal_cost, delta_family_plan, el_residual, gerosplan_plan,
    pushforward_partition, solve_discrete_el, theorem1_branch_tuples, theorem1_cost_tolerance,
    theorem1_discretized_plan, upper_vacating_path, BranchMap, Component, PressureFunction,
    QSqrt3, TrigPathParams,
};
use euler_mmot::lp::{
    assemble_mmot_lp, monge_bruteforce, optimal_face_probe, path_functional, solve_simplex,
    AssembleOptions, LinearProgram, LpForm, LpSolution, SolveOptions, DEFAULT_MONGE_CAP,
};
use euler_mmot::rational::{format_q, q, qi};
use euler_mmot::render::{render_svg, RenderOptions};
use euler_mmot::{
    CostFunction, DiscretePath, EndpointMap, MassValue, SpatialGrid, TimeGrid, TransportPlan, Q,
};

type Outcome = Result<String, String>;

fn check(condition: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(message())
    }
}

/// `(4 + 4/(N−1))/3`, computed independently of the library.
fn expected_optimum(steps: i64) -> Q {
    (qi(4) + q(4, steps - 1)) / qi(3)
}

fn action(steps: usize) -> CostFunction {
    CostFunction::Action {
        timegrid: TimeGrid::unit(steps).unwrap(),
    }
}

fn three_point_lp(steps: usize) -> LinearProgram {
    let grid = SpatialGrid::three_point();
    let flip = EndpointMap::flip(&grid).unwrap();
    assemble_mmot_lp(
        &grid,
        &TimeGrid::unit(steps).unwrap(),
        &action(steps),
        Some(&flip),
        LpForm::Full,
        &AssembleOptions::default(),
    )
    .unwrap()
}

struct Solved {
    lp: LinearProgram,
    solution: LpSolution,
    elapsed: Duration,
}

fn solve_all() -> BTreeMap<usize, Solved> {
    (3..=8)
        .map(|steps| {
            let start = Instant::now();
            let lp = three_point_lp(steps);
            let solution = solve_simplex(&lp, &SolveOptions::rational()).unwrap();
            (
                steps,
                Solved {
                    lp,
                    solution,
                    elapsed: start.elapsed(),
                },
            )
        })
        .collect()
}

fn exact_value(solved: &Solved) -> Q {
    solved.solution.exact_value().expect("exact optimum").clone()
}

fn criterion_1(solved: &BTreeMap<usize, Solved>) -> Outcome {
    let mut small = Duration::ZERO;
    for (&steps, s) in solved {
        let value = exact_value(s);
        check(value == expected_optimum(steps as i64), || {
            format!("N={steps}: LP optimum {} != {}", format_q(&value), format_q(&expected_optimum(steps as i64)))
        })?;
        if steps <= 6 {
            small += s.elapsed;
        } else {
            check(s.elapsed < Duration::from_secs(300), || format!("N={steps} took {:?}", s.elapsed))?;
        }
    }
    check(small < Duration::from_secs(10), || format!("N<=6 took {small:?}"))?;
    Ok(format!(
        "optima 2, 16/9, 5/3, 8/5, 14/9, 32/21; N<=6 in {:.2}s, N=7 in {:.2}s, N=8 in {:.2}s",
        small.as_secs_f64(),
        solved[&7].elapsed.as_secs_f64(),
        solved[&8].elapsed.as_secs_f64()
    ))
}

fn criterion_2(solved: &BTreeMap<usize, Solved>) -> Outcome {
    for (&steps, s) in solved {
        let plan = gerosplan_plan(steps).unwrap();
        for i in 0..=steps {
            let marginal = plan.marginal(i).unwrap().exact().unwrap();
            check(marginal.iter().all(|m| *m == q(1, 3)), || format!("N={steps}: marginal {i} is not 1/3"))?;
        }
        for path in plan.atoms().keys() {
            check(s.lp.column_of(path).is_some(), || format!("N={steps}: {path} is not an LP column"))?;
        }
        let cost = plan.cost(&action(steps)).unwrap();
        check(cost == MassValue::Exact(exact_value(s)), || {
            format!("N={steps}: plan cost {cost} differs from LP optimum")
        })?;
    }
    Ok("gamma0 is feasible with marginals 1/3 and attains the LP optimum for N = 3..8".into())
}

fn criterion_3(solved: &BTreeMap<usize, Solved>) -> Outcome {
    let grid = SpatialGrid::three_point();
    let flip = EndpointMap::flip(&grid).unwrap();
    for steps in 3..=6 {
        let monge = monge_bruteforce(&grid, &TimeGrid::unit(steps).unwrap(), &action(steps), &flip, DEFAULT_MONGE_CAP)
            .unwrap()
            .value;
        let lp = exact_value(&solved[&steps]);
        check(monge == qi(2), || format!("N={steps}: Monge optimum {}", format_q(&monge)))?;
        if steps == 3 {
            check(monge == lp, || "N=3: Monge optimum differs from LP optimum".into())?;
        } else {
            check(monge > lp, || format!("N={steps}: Monge optimum not above LP optimum"))?;
        }
    }
    Ok("Monge optimum 2 equals LP at N=3 and strictly exceeds it at N=4,5,6".into())
}

fn criterion_4(solved: &BTreeMap<usize, Solved>) -> Outcome {
    let mut widths = Vec::new();
    for steps in 4..=7 {
        let s = &solved[&steps];
        let functional = path_functional(&s.lp, &upper_vacating_path(steps)).unwrap();
        let face = optimal_face_probe(&s.lp, &s.solution, &functional, &SolveOptions::rational()).unwrap();
        let width = face.width().exact().unwrap().clone();
        let expected = if steps % 2 == 0 { Q::zero() } else { q(2, 3 * (steps as i64 - 1)) };
        check(width == expected, || {
            format!("N={steps}: width {} expected {}", format_q(&width), format_q(&expected))
        })?;
        widths.push(format!("N={steps}: {}", format_q(&width)));
    }
    Ok(format!("face widths {}", widths.join(", ")))
}

fn criterion_5(solved: &BTreeMap<usize, Solved>) -> Outcome {
    let plan = delta_family_plan(3, &q(1, 6)).unwrap();
    for i in 0..=3 {
        check(plan.is_monge(i).unwrap().monge, || format!("not Monge at t{i}"))?;
    }
    let cost = plan.cost(&action(3)).unwrap();
    check(cost == MassValue::Exact(exact_value(&solved[&3])), || format!("cost {cost} is not LP-optimal"))?;
    Ok(format!("{} atoms, Monge at every time, cost {cost} = LP optimum", plan.len()))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    for n in [8usize, 16] {
        let cell = q(1, 2 * n as i64);
        let plans: Vec<(Component, TransportPlan)> = Component::ALL
            .into_iter()
            .map(|c| (c, theorem1_discretized_plan(n, c).unwrap()))
            .collect();
        let g0 = &plans[0].1;
        for i in 0..4 {
            let m = g0.marginal(i).unwrap().exact().unwrap();
            check(m.len() == 2 * n && m.iter().all(|v| *v == cell), || format!("n={n}: gamma0 marginal {i} not uniform"))?;
        }
        for t in theorem1_branch_tuples(n, Component::Gamma0).unwrap() {
            let path: Vec<QSqrt3> = t.iter().cloned().map(QSqrt3::rational).collect();
            check(el_residual(&path, &PressureFunction).unwrap().is_zero(), || format!("n={n}: EL residual on {t:?}"))?;
            let triple = [t[0].clone(), t[1].clone(), t[2].clone()];
            check(modified_cost(&triple).is_zero(), || format!("n={n}: modified cost on {t:?}"))?;
        }
        let cost = g0.cost(&action(3)).unwrap().exact().unwrap().clone();
        let gap = if cost > continuous_optimal_cost() { &cost - continuous_optimal_cost() } else { continuous_optimal_cost() - &cost };
        check(gap <= theorem1_cost_tolerance(n), || format!("n={n}: cost {}", format_q(&cost)))?;
        check(g0.is_everywhere_mass_splitting(), || format!("n={n}: gamma0 not everywhere splitting"))?;
        for (c, plan) in &plans[1..] {
            check(!plan.is_mass_splitting(0).unwrap(), || format!("n={n}: {c} splits at t0"))?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("n=8,16 exact checks hold in {:.3}s", elapsed.as_secs_f64()))
}

/// Independent oracle: the maps as plain formulas on cell boundaries.
fn criterion_7() -> Outcome {
    for n in [8usize, 16] {
        for map in BranchMap::ALL {
            let cells = pushforward_partition(map, n).unwrap();
            check(cells.len() == 2 * n, || format!("{map}: {} cells", cells.len()))?;
            check(cells.iter().all(|c| *c == q(1, 2 * n as i64)), || format!("{map} n={n}: not uniform"))?;
        }
    }
    Ok("T1, T2, S1, S2 push uniform to uniform at n = 8, 16".into())
}

fn random_plan() -> impl Strategy<Value = TransportPlan> {
    (2usize..=4, 1usize..=3)
        .prop_flat_map(|(points, steps)| {
            let path = proptest::collection::vec(0..points, steps + 1);
            (
                Just(points),
                Just(steps),
                proptest::collection::vec((path, 1u32..20), 1..8),
            )
        })
        .prop_map(|(points, steps, atoms)| {
            let total: u32 = atoms.iter().map(|(_, m)| m).sum();
            let grid = SpatialGrid::new((0..points as i64).map(|k| q(k, 1)).collect()).unwrap();
            TransportPlan::from_rational(
                grid,
                TimeGrid::unit(steps).unwrap(),
                atoms
                    .into_iter()
                    .map(|(p, m)| (DiscretePath(p), q(m as i64, total as i64))),
            )
            .unwrap()
        })
}

fn random_reduced_plan() -> impl Strategy<Value = (TransportPlan, usize)> {
    (prop_oneof![Just(3usize), Just(4)], 2usize..=4)
        .prop_flat_map(|(points, steps)| {
            let path = proptest::collection::vec(0..points, steps);
            (Just(points), Just(steps), proptest::collection::vec((path, 1u32..20), 1..8))
        })
        .prop_map(|(points, steps, atoms)| {
            let total: u32 = atoms.iter().map(|(_, m)| m).sum();
            let grid = if points == 3 { SpatialGrid::three_point() } else { SpatialGrid::uniform_symmetric(4).unwrap() };
            let plan = TransportPlan::from_rational(
                grid,
                TimeGrid::unit(steps - 1).unwrap(),
                atoms.into_iter().map(|(p, m)| (DiscretePath(p), q(m as i64, total as i64))),
            )
            .unwrap();
            (plan, steps)
        })
}

fn rational() -> impl Strategy<Value = Q> {
    (-200i64..=200, 1i64..=50).prop_map(|(n, d)| q(n, d))
}

fn field() -> impl Strategy<Value = QSqrt3> {
    (rational(), rational()).prop_map(|(a, b)| QSqrt3::new(a, b))
}

fn run_property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<String, String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map(|_| format!("{name} ({cases})"))
        .map_err(|e| format!("{name}: {e}"))
}

fn criterion_8() -> Outcome {
    let mut passed = Vec::new();
    passed.push(run_property("marginal sums", 256, random_plan(), |plan| {
        for i in 0..plan.timegrid().len() {
            let mut oracle = vec![Q::zero(); plan.grid().len()];
            for (path, m) in plan.atoms() {
                oracle[path.indices()[i]] += m.exact().unwrap();
            }
            let marginal = plan.marginal(i).unwrap().exact().unwrap();
            prop_assert_eq!(&marginal, &oracle);
            prop_assert_eq!(marginal.iter().sum::<Q>(), Q::one());
        }
        Ok(())
    })?);
    passed.push(run_property("reduce/extend with cost equality", 256, random_reduced_plan(), |(reduced, steps)| {
        let flip = EndpointMap::flip(reduced.grid()).unwrap();
        let full_timegrid = TimeGrid::unit(steps).unwrap();
        let full = reduced.extend(&flip, &full_timegrid).unwrap();
        prop_assert_eq!(&full.reduce(&flip).unwrap(), &reduced);
        let full_cost = full.cost(&CostFunction::Action { timegrid: full_timegrid.clone() }).unwrap();
        let reduced_cost = reduced
            .cost(&CostFunction::ReducedAction { timegrid: full_timegrid, endpoint: flip })
            .unwrap();
        prop_assert_eq!(full_cost, reduced_cost);
        Ok(())
    })?);
    passed.push(run_property("monge = not splitting", 256, random_plan(), |plan| {
        for i in 0..plan.timegrid().len() {
            let paths: Vec<&DiscretePath> = plan.atoms().keys().collect();
            let shared = paths.iter().enumerate().any(|(a, p)| {
                paths[a + 1..].iter().any(|o| o.indices()[i] == p.indices()[i])
            });
            prop_assert_eq!(plan.is_mass_splitting(i).unwrap(), shared);
            prop_assert_eq!(plan.is_monge(i).unwrap().monge, !shared);
        }
        Ok(())
    })?);
    passed.push(run_property("EL residual zero", 100, (field(), field(), 2usize..=12), |(x, v, steps)| {
        let path = solve_discrete_el(&TrigPathParams { x, v, steps });
        // second-order recursion check, independent of the residual helper
        for w in path.windows(3) {
            prop_assert!((&(&w[2] - &w[1]) + &w[0]).is_zero());
        }
        prop_assert!(el_residual(&path, &PressureFunction).unwrap().is_zero());
        Ok(())
    })?);
    passed.push(run_property("rank-one identity", 1000, (rational(), rational(), rational()), |(a, b, c)| {
        let path = [a.clone(), b.clone(), c.clone(), -a.clone()];
        let lhs = action_cost(&path, &TimeGrid::unit(3).unwrap()).unwrap() - (&a * &a + &b * &b + &c * &c);
        let s = &a - &b + &c;
        prop_assert_eq!(&lhs, &(&s * &s));
        prop_assert_eq!(&modified_cost(&[a, b, c]), &lhs);
        Ok(())
    })?);
    Ok(passed.join(", "))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_euler-mmot"))
        .args(["sweep", "--grid", "three-point", "--grid", "midpoint:4", "--steps", "3,4,5", "--arith", "float"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(output.status.success(), || format!("exit {:?}", output.status.code()))?;
    check(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    let mut reader = csv::Reader::from_reader(output.stdout.as_slice());
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    check(
        header == ["grid", "steps", "status", "value", "splitting", "monge", "pivots", "seconds", "error"],
        || format!("header {header:?}"),
    )?;
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    check(rows.len() == 6, || format!("{} rows", rows.len()))?;
    let mut flags = Vec::new();
    for row in &rows {
        check(&row[2] == "optimal", || format!("{} N={}: {}", &row[0], &row[1], &row[2]))?;
        let steps: usize = row[1].parse().map_err(|_| "bad steps".to_string())?;
        check(
            row[4].len() == steps + 1 && row[4].chars().all(|c| c == '0' || c == '1'),
            || format!("bad splitting flags {}", &row[4]),
        )?;
        row[3].parse::<f64>().map_err(|_| format!("bad value {}", &row[3]))?;
        flags.push(format!("{}/N={}:{}", &row[0], &row[1], &row[4]));
    }
    Ok(format!("6 rows in {:.2}s; splitting {}", elapsed.as_secs_f64(), flags.join(" ")))
}

fn criterion_10() -> Outcome {
    let plan = gerosplan_plan(4).unwrap();
    let first = render_svg(&plan, &RenderOptions::default()).unwrap();
    let second = render_svg(&plan, &RenderOptions::default()).unwrap();
    check(first == second, || "renders differ".into())?;
    let golden = include_str!("golden/gerosplan4.svg");
    check(first == golden, || "render differs from the golden file".into())?;
    let lines: Vec<&str> = first.lines().filter(|l| l.starts_with("<polyline")).collect();
    check(lines.len() == plan.len() && lines.len() == 9, || format!("{} polylines", lines.len()))?;
    let widths: Vec<f64> = lines
        .iter()
        .map(|l| {
            let start = l.find("stroke-width=\"").unwrap() + 14;
            l[start..start + l[start..].find('"').unwrap()].parse().unwrap()
        })
        .collect();
    let masses: Vec<f64> = plan.atoms().values().map(|m| m.to_f64()).collect();
    for i in 0..widths.len() {
        for j in 0..widths.len() {
            let (wr, mr) = (widths[i] / widths[j], masses[i] / masses[j]);
            check((wr - mr).abs() <= 1e-6 * mr, || format!("width ratio {wr} vs mass ratio {mr}"))?;
        }
    }
    Ok(format!("byte-identical to golden; {} polylines, one per atom; width ratios = mass ratios", lines.len()))
}

fn main() {
    let start = Instant::now();
    let solved = catch_unwind(solve_all);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = match &solved {
        Ok(solved) => vec![
            ("exact LP optima", Box::new(|| criterion_1(solved))),
            ("optimality certificate", Box::new(|| criterion_2(solved))),
            ("mass-splitting strictness", Box::new(|| criterion_3(solved))),
            ("uniqueness parity", Box::new(|| criterion_4(solved))),
            ("Monge endpoint of the family", Box::new(|| criterion_5(solved))),
            ("continuous optimizer exact checks", Box::new(criterion_6)),
            ("measure preservation", Box::new(criterion_7)),
            ("property suites", Box::new(criterion_8)),
            ("sweep completes", Box::new(criterion_9)),
            ("render determinism", Box::new(criterion_10)),
        ],
        Err(_) => {
            println!("FAIL  linear programs for N = 3..8 could not be solved");
            std::process::exit(1);
        }
    };
    let mut failures = 0;
    for (k, (name, criterion)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(message)
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {:>2}. {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed in {:.1}s",
        criteria.len() - failures,
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
