//! Experiment runners, one per subcommand.
//!
//! Every runner validates its arguments before computing, evaluates grids on the
//! current rayon pool with order-preserving collection, and reports checks that
//! are expected to hold plus tables of raw values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use renorm::baker::{self, Potential2D, Variant};
use renorm::cf::{self, CFParams};
use renorm::fbeta;
use renorm::interval::{self, Potential1D};
use renorm::mp;
use renorm::shift::{self, BiCylinderPotential, CylinderPotential};
use renorm::uniqueness::{self, HCandidate};
use renorm::{Block, LaminarParams};

use crate::args::{
    BakerArgs, CfArgs, FbetaArgs, IntervalArgs, ShiftArgs, TwosidedArgs, UniquenessArgs,
};
use crate::manifest::{cell, Check, Table};
use crate::{CommandSpec, Context, HarnessError};

type Result<T> = std::result::Result<T, HarnessError>;

/// Checks and tables produced by a runner.
#[derive(Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Report {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check::new(name, passed, detail));
    }

    /// Appends `other` with every check and table name prefixed by `prefix`.
    fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
        for mut t in other.tables {
            t.name = format!("{prefix}.{}", t.name);
            self.tables.push(t);
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Usage(msg.into()))
}

fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> renorm::Result<R> + Sync + Send,
{
    items
        .par_iter()
        .map(f)
        .collect::<renorm::Result<Vec<R>>>()
        .map_err(HarnessError::from)
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn sorted_depths(ns: Option<Vec<u32>>, cap: u32) -> Result<Vec<u32>> {
    let mut ns = ns.unwrap_or_else(|| vec![4, 8, 12, 16]);
    if ns.is_empty() {
        return usage("at least one iteration depth is needed");
    }
    if let Some(&n) = ns.iter().find(|&&n| n > cap) {
        return usage(format!("n = {n} exceeds the cap {cap}"));
    }
    ns.sort_unstable();
    ns.dedup();
    Ok(ns)
}

fn parse_floats(s: &str, what: &str, count: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| HarnessError::Usage(format!("{what}: {e}")))?;
    if v.len() != count {
        return usage(format!("{what} takes {count} numbers, got {}", v.len()));
    }
    Ok(v)
}

pub fn dispatch(spec: &CommandSpec, ctx: &Context) -> Result<Report> {
    match spec {
        CommandSpec::Interval(a) => run_interval(a, ctx),
        CommandSpec::Shift(a) => run_shift(a, ctx),
        CommandSpec::Twosided(a) => run_twosided(a, ctx),
        CommandSpec::Baker(a) => run_baker(a, ctx),
        CommandSpec::Uniqueness(a) => run_uniqueness(a, ctx),
        CommandSpec::Cf(a) => run_cf(a, ctx),
        CommandSpec::Fbeta(a) => run_fbeta(a, ctx),
        CommandSpec::CheckAll => run_check_all(ctx),
    }
}

/// The fixed battery behind `check-all`.
pub fn check_all_battery() -> Vec<(&'static str, CommandSpec)> {
    vec![
        (
            "interval-canonical",
            CommandSpec::Interval(IntervalArgs::default()),
        ),
        (
            "interval-fixed",
            CommandSpec::Interval(IntervalArgs {
                t: Some(2.0),
                potential: Some("fixed".into()),
                n: Some(vec![1, 4, 8]),
                ..Default::default()
            }),
        ),
        ("shift-harmonic", CommandSpec::Shift(ShiftArgs::default())),
        (
            "shift-fixed",
            CommandSpec::Shift(ShiftArgs {
                gamma: Some(2.0),
                potential: Some("fixed".into()),
                ..Default::default()
            }),
        ),
        (
            "twosided-bare",
            CommandSpec::Twosided(TwosidedArgs::default()),
        ),
        (
            "twosided-fixed",
            CommandSpec::Twosided(TwosidedArgs {
                potential: Some("fixed".into()),
                ..Default::default()
            }),
        ),
        ("baker", CommandSpec::Baker(BakerArgs::default())),
        (
            "uniqueness-a1",
            CommandSpec::Uniqueness(UniquenessArgs {
                a: Some(1),
                ..Default::default()
            }),
        ),
        (
            "uniqueness-a2",
            CommandSpec::Uniqueness(UniquenessArgs {
                a: Some(2),
                ..Default::default()
            }),
        ),
        (
            "uniqueness-a3",
            CommandSpec::Uniqueness(UniquenessArgs {
                a: Some(3),
                ..Default::default()
            }),
        ),
        ("cf", CommandSpec::Cf(CfArgs::default())),
        (
            "fbeta-a0",
            CommandSpec::Fbeta(FbetaArgs {
                a: Some(0),
                ..Default::default()
            }),
        ),
        (
            "fbeta-a1",
            CommandSpec::Fbeta(FbetaArgs {
                a: Some(1),
                ..Default::default()
            }),
        ),
        (
            "fbeta-a2",
            CommandSpec::Fbeta(FbetaArgs {
                a: Some(2),
                ..Default::default()
            }),
        ),
    ]
}

fn run_check_all(ctx: &Context) -> Result<Report> {
    let mut report = Report::default();
    for (prefix, spec) in check_all_battery() {
        report.absorb(prefix, dispatch(&spec, ctx)?);
    }
    Ok(report)
}

fn parse_potential_1d(spec: &str, p: LaminarParams) -> Result<Potential1D> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let v = match kind {
        "fixed" => Potential1D::fixed_point(p),
        "canonical" => Potential1D::canonical(p),
        "zero" => Potential1D::zero(p),
        "powerlaw" => {
            let c = parse_floats(rest, "powerlaw", 2)?;
            Potential1D::power_law(p, c[0], c[1])?
        }
        "perturbed" => {
            let c = parse_floats(rest, "perturbed", 4)?;
            Potential1D::perturbed_power_law(p, c[0], c[1], c[2], c[3])?
        }
        other => return usage(format!("unknown potential {other:?}")),
    };
    Ok(v)
}

fn run_interval(args: &IntervalArgs, ctx: &Context) -> Result<Report> {
    let p = LaminarParams::new(args.t.unwrap_or(1.0))?;
    let ns = sorted_depths(args.n.clone(), interval::DEFAULT_N_MAX)?;
    let points = args.grid.unwrap_or(interval::DEFAULT_GRID_POINTS);
    if points < 2 {
        return usage("the grid needs at least two points");
    }
    let pot = args.potential.as_deref().unwrap_or("canonical");
    let v = parse_potential_1d(pot, p)?;
    let grid = interval::linspace(0.1, p.split().min(1.0 - interval::EDGE_DELTA), points);

    let mut report = Report::default();
    let mut table = Table::new("sup_error", &["n", "sup_error"]);
    let mut errors = Vec::with_capacity(ns.len());
    for &n in &ns {
        let e = par_map(&grid, |&x| {
            Ok((interval::iterate(&v, n, x)? - mp::fixed_potential(&p, x)?).abs())
        })?
        .into_iter()
        .fold(0.0, f64::max);
        table.push(vec![cell(n), cell(e)]);
        errors.push(e);
    }
    report.tables.push(table);

    let mut fit = Table::new("class_fit", &["exponent", "coefficient", "in_class"]);
    let in_class = match interval::asymptotic_class_check(&v, &p) {
        Ok(f) => {
            fit.push(vec![
                cell(f.exponent),
                cell(f.coefficient),
                cell(f.in_class),
            ]);
            f.in_class
        }
        Err(_) => {
            fit.push(vec!["nan".into(), "nan".into(), cell(false)]);
            false
        }
    };
    report.tables.push(fit);

    if pot == "fixed" {
        let worst = errors.iter().copied().fold(0.0, f64::max);
        let tol = 1e-10 * ctx.tol_scale;
        report.check(
            "fixed_point",
            worst < tol,
            format!("max |R^n V* - V*| = {worst:e}, tol {tol:e}"),
        );
    } else if in_class {
        report.check(
            "converges",
            strictly_decreasing(&errors),
            format!("sup errors {errors:?}"),
        );
    }
    Ok(report)
}

fn run_shift(args: &ShiftArgs, ctx: &Context) -> Result<Report> {
    let gamma = args.gamma.unwrap_or(1.0);
    if !(gamma > 0.0 && gamma.is_finite()) {
        return usage(format!("gamma must be positive, got {gamma}"));
    }
    let a = args.a.unwrap_or(1);
    if a == 0 {
        return usage("the offset a must be at least 1");
    }
    let ns = sorted_depths(args.n.clone(), shift::N_MAX)?;
    let c1s = args.c1.clone().unwrap_or_else(|| (1..=5).collect());
    if c1s.is_empty() || c1s.contains(&0) {
        return usage("c1 values must be at least 1");
    }
    let pot = args.potential.as_deref().unwrap_or("harmonic");
    let (kind, rest) = pot.split_once(':').unwrap_or((pot, ""));
    let v = match kind {
        "fixed" => CylinderPotential::new(gamma, 1.0, move |k| {
            shift::shift_offset_fixed_potential(gamma, a, k)
        }),
        "harmonic" => CylinderPotential::harmonic(gamma),
        "perturbed" => {
            let eps = parse_floats(rest, "perturbed", 1)?[0];
            if !(eps > 0.0) {
                return usage(format!("perturbation exponent must be positive, got {eps}"));
            }
            CylinderPotential::perturbed(gamma, eps)
        }
        other => return usage(format!("unknown potential {other:?}")),
    };

    let mut table = Table::new("iterates", &["n", "c1", "value", "target", "error"]);
    let cases: Vec<(u32, u64)> = ns
        .iter()
        .flat_map(|&n| c1s.iter().map(move |&c| (n, c)))
        .collect();
    let values = par_map(&cases, |&(n, c)| shift::shift_renorm_iterate(&v, c, n, a))?;
    let mut errors = vec![Vec::new(); c1s.len()];
    for (i, (&(n, c), &val)) in cases.iter().zip(&values).enumerate() {
        let target = shift::shift_offset_fixed_potential(gamma, a, c);
        let err = (val - target).abs();
        errors[i % c1s.len()].push(err);
        table.push(vec![cell(n), cell(c), cell(val), cell(target), cell(err)]);
    }
    let mut report = Report::default();
    report.tables.push(table);
    if kind == "fixed" {
        let worst = errors.iter().flatten().copied().fold(0.0, f64::max);
        let tol = 1e-12 * ctx.tol_scale;
        report.check(
            "fixed_point",
            worst <= tol,
            format!("max error {worst:e}, tol {tol:e}"),
        );
    } else {
        let ok = errors.iter().all(|e| strictly_decreasing(e));
        report.check("converges", ok, "error decreases in n for every c1".into());
    }
    Ok(report)
}

fn parse_pair(s: &str) -> Result<(u64, u64)> {
    let (z, c) = s
        .split_once(':')
        .ok_or_else(|| HarnessError::Usage(format!("pair {s:?} is not ZETA:C1")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|e| HarnessError::Usage(format!("pair {s:?}: {e}")))
    };
    let (z, c) = (parse(z)?, parse(c)?);
    if z < 2 || c < 1 {
        return usage(format!("pair {s:?} needs zeta >= 2 and c1 >= 1"));
    }
    Ok((z, c))
}

fn run_twosided(args: &TwosidedArgs, ctx: &Context) -> Result<Report> {
    let ns = sorted_depths(args.n.clone(), shift::N_MAX)?;
    let pairs: Vec<(u64, u64)> = match &args.pairs {
        Some(ps) if !ps.is_empty() => ps.iter().map(|s| parse_pair(s)).collect::<Result<_>>()?,
        Some(_) => return usage("at least one pair is needed"),
        None => vec![(2, 1), (3, 2), (5, 5)],
    };
    let pot = args.potential.as_deref().unwrap_or("bare");
    let v = match pot {
        "fixed" => BiCylinderPotential::fixed_point(),
        "bare" => BiCylinderPotential::bare(),
        other => return usage(format!("unknown potential {other:?}")),
    };

    let cases: Vec<(u32, u64, u64)> = ns
        .iter()
        .flat_map(|&n| pairs.iter().map(move |&(z, c)| (n, z, c)))
        .collect();
    let values = par_map(&cases, |&(n, z, c)| {
        shift::twosided_renorm_iterate(&v, z, c, n)
    })?;
    let mut table = Table::new("iterates", &["n", "zeta", "c1", "value", "target", "error"]);
    let mut errors = vec![Vec::new(); pairs.len()];
    for (i, (&(n, z, c), &val)) in cases.iter().zip(&values).enumerate() {
        let target = shift::twosided_fixed_potential(z, c)?;
        let err = (val - target).abs();
        errors[i % pairs.len()].push(err);
        table.push(vec![
            cell(n),
            cell(z),
            cell(c),
            cell(val),
            cell(target),
            cell(err),
        ]);
    }
    let mut report = Report::default();
    report.tables.push(table);
    if pot == "fixed" {
        let worst = errors.iter().flatten().copied().fold(0.0, f64::max);
        let tol = 1e-12 * ctx.tol_scale;
        report.check(
            "fixed_point",
            worst <= tol,
            format!("max error {worst:e}, tol {tol:e}"),
        );
    } else {
        let ok = errors.iter().all(|e| strictly_decreasing(e));
        report.check(
            "converges",
            ok,
            "error decreases in n for every pair".into(),
        );
    }
    Ok(report)
}

fn run_baker(args: &BakerArgs, ctx: &Context) -> Result<Report> {
    let variant = match args.variant.as_deref().unwrap_or("corrected") {
        "corrected" => Variant::Corrected,
        "literal" => Variant::PaperLiteral,
        other => return usage(format!("unknown variant {other:?}")),
    };
    let points = args.grid.unwrap_or(50);
    let max = args.max.unwrap_or(0.9);
    let n = args.n.unwrap_or(1);
    if points < 2 {
        return usage("the grid needs at least two points per axis");
    }
    if !(max > 0.0 && max < 1.0) {
        return usage(format!("grid upper end must lie in (0, 1), got {max}"));
    }
    if n > baker::N_MAX {
        return usage(format!("n = {n} exceeds the cap {}", baker::N_MAX));
    }
    let axis = interval::linspace(0.0, max, points);
    let cells: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
        .collect();
    let v = Potential2D::fixed_point();
    let values = par_map(&cells, |&(x, y)| {
        Ok((
            baker::baker_renorm_iterate(&v, n, x, y, variant)?,
            baker::baker_fixed_potential(x, y)?,
        ))
    })?;
    let mut table = Table::new("fixed_point", &["x", "y", "value", "target", "error"]);
    let mut worst = 0.0f64;
    for (&(x, y), &(val, target)) in cells.iter().zip(&values) {
        let err = (val - target).abs();
        worst = worst.max(err);
        table.push(vec![cell(x), cell(y), cell(val), cell(target), cell(err)]);
    }
    let mut report = Report::default();
    report.tables.push(table);
    let tol = 1e-12 * ctx.tol_scale * f64::from(n.max(1));
    report.check(
        "fixed_point",
        worst <= tol,
        format!("max |R^n V* - V*| = {worst:e}, tol {tol:e}"),
    );
    Ok(report)
}

fn run_uniqueness(args: &UniquenessArgs, _ctx: &Context) -> Result<Report> {
    let a = args.a.unwrap_or(1);
    let depth = args.depth.unwrap_or(10);
    if !(1..=3).contains(&a) {
        return usage(format!("a must be 1, 2 or 3, got {a}"));
    }
    if depth == 0 || depth > uniqueness::MAX_DEPTH {
        return usage(format!(
            "depth must be in 1..={}, got {depth}",
            uniqueness::MAX_DEPTH
        ));
    }
    let found = uniqueness::enumerate_h(a, depth)?;
    let mut survivors = Table::new("survivors", &["survivor", "n0", "prefix", "zero_run"]);
    let mut verdicts = Table::new("verdicts", &["survivor", "constraint", "status", "detail"]);
    let mut all_pass = true;
    for (i, s) in found.survivors.iter().enumerate() {
        let runs = s.zero_run_lengths();
        for (n0, row) in s.rows().iter().enumerate() {
            let prefix: String = row
                .iter()
                .map(|d| d.map_or('?', |b| char::from(b'0' + b)))
                .collect();
            let run = runs
                .get(n0)
                .copied()
                .flatten()
                .map_or_else(|| "?".to_string(), |r| r.to_string());
            survivors.push(vec![cell(i), cell(n0 + 1), prefix, run]);
        }
        for v in uniqueness::check_h_constraints(s) {
            all_pass &= v.passed();
            verdicts.push(vec![
                cell(i),
                format!("{:?}", v.constraint),
                format!("{:?}", v.status),
                v.detail.clone(),
            ]);
        }
    }
    let mut search = Table::new("search", &["a", "depth", "survivors", "nodes"]);
    search.push(vec![
        cell(a),
        cell(depth),
        cell(found.survivors.len()),
        cell(found.nodes),
    ]);

    let mut report = Report::default();
    let count = found.survivors.len();
    report.check("single_survivor", count == 1, format!("{count} survivors"));
    let expected = HCandidate::proposition(a, depth);
    let matches = count == 1
        && found.survivors[0].matches_proposition()
        && found.survivors[0].extends(&expected);
    report.check(
        "matches_closed_form",
        matches,
        format!("zero runs follow n0 -> 2 n0 + {a}"),
    );
    report.check(
        "constraints_hold",
        count > 0 && all_pass,
        "every verdict passes".into(),
    );
    report.tables.extend([search, survivors, verdicts]);
    Ok(report)
}

fn params_table() -> Table {
    Table::new(
        "params",
        &["alpha", "beta", "a", "c", "residual1", "residual2"],
    )
}

fn push_params(t: &mut Table, p: &CFParams) {
    t.push(vec![
        cell(p.alpha),
        cell(p.beta),
        cell(p.a),
        cell(p.c),
        cell(p.residual1),
        cell(p.residual2),
    ]);
}

/// Finite-difference slope of `a(beta)` at `beta = 1` from the left.
pub fn a_slope_at_one(h: f64) -> f64 {
    (cf::a_of_beta(1.0 - h) - cf::a_of_beta(1.0)) / (-h)
}

/// The same slope for the printed form of `a(beta)`.
pub fn a_slope_at_one_printed(h: f64) -> f64 {
    (cf::a_of_beta_printed(1.0 - h) - cf::a_of_beta_printed(1.0)) / (-h)
}

/// `-(2 ln 2 - 4 ln^2 2 - 6 ln(3/2))`, the printed asymptotic slope.
pub fn printed_slope_constant() -> f64 {
    let l2 = std::f64::consts::LN_2;
    -(2.0 * l2 - 4.0 * l2 * l2 - 6.0 * 1.5f64.ln())
}

fn round_trip_errors(
    p: &CFParams,
    samples: usize,
    depth: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..samples)
        .map(|_| rng.gen_range(0.0..=p.upper()))
        .collect();
    par_map(&xs, |&x| {
        let w = cf::digit_extract(p, x, depth)?;
        Ok((x, cf::theta(p, &w, depth).value))
    })
}

fn run_cf(args: &CfArgs, ctx: &Context) -> Result<Report> {
    let samples = args.samples.unwrap_or(500);
    let depth = args.depth.unwrap_or(cf::DEFAULT_DEPTH);
    if depth == 0 {
        return usage("depth must be at least 1");
    }
    let solved: Vec<CFParams> = match (&args.beta, &args.solve_a) {
        (Some(_), Some(_)) => return usage("--beta and --solve-a are exclusive"),
        (Some(betas), None) => {
            if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
                return usage(format!("beta must lie in (0, 1], got {b}"));
            }
            betas
                .iter()
                .map(|&b| cf::solve_params(b))
                .collect::<renorm::Result<_>>()?
        }
        (None, a) => {
            let a = a.clone().unwrap_or_else(|| vec![0, 1, 2, 3]);
            a.iter()
                .map(|&a| cf::solve_beta_for_integer_a(a))
                .collect::<renorm::Result<_>>()?
        }
    };

    let mut report = Report::default();
    let mut params = params_table();
    let mut rt = Table::new("round_trip", &["beta", "x", "theta", "error"]);
    let mut worst_res = 0.0f64;
    let mut worst_rt = 0.0f64;
    for (i, p) in solved.iter().enumerate() {
        push_params(&mut params, p);
        worst_res = worst_res.max(p.residual1.abs()).max(p.residual2.abs());
        for (x, t) in round_trip_errors(p, samples, depth, ctx.seed.wrapping_add(i as u64))? {
            let e = (x - t).abs();
            worst_rt = worst_rt.max(e);
            rt.push(vec![cell(p.beta), cell(x), cell(t), cell(e)]);
        }
    }
    let tol = cf::RESIDUAL_TOL * ctx.tol_scale;
    report.check(
        "residuals",
        worst_res < tol,
        format!("max residual {worst_res:e}, tol {tol:e}"),
    );
    let tol = 1e-9 * ctx.tol_scale;
    report.check(
        "round_trip",
        worst_rt < tol,
        format!("max |x - theta(w(x))| = {worst_rt:e}, tol {tol:e}"),
    );
    if args.beta.is_none() && solved.len() > 1 {
        let mut by_a = solved.clone();
        by_a.sort_by(|p, q| p.a.total_cmp(&q.a));
        let dec = by_a.windows(2).all(|w| w[1].beta < w[0].beta);
        report.check("beta_decreasing", dec, "beta decreases as a grows".into());
    }

    let mut slope = Table::new(
        "slope_at_one",
        &["h", "slope", "printed_form_slope", "printed_constant"],
    );
    for h in [1e-3, 1e-4, 1e-5] {
        slope.push(vec![
            cell(h),
            cell(a_slope_at_one(h)),
            cell(a_slope_at_one_printed(h)),
            cell(printed_slope_constant()),
        ]);
    }
    report.tables.extend([params, rt, slope]);
    Ok(report)
}

fn run_fbeta(args: &FbetaArgs, ctx: &Context) -> Result<Report> {
    let samples = args.samples.unwrap_or(200);
    let depth = args.depth.unwrap_or(cf::DEFAULT_DEPTH);
    if samples < 8 {
        return usage("at least 8 samples are needed");
    }
    if depth == 0 {
        return usage("depth must be at least 1");
    }
    let p = match (args.a, args.beta) {
        (Some(_), Some(_)) => return usage("--a and --beta are exclusive"),
        (None, Some(b)) => {
            if !(b > 0.0 && b <= 1.0) {
                return usage(format!("beta must lie in (0, 1], got {b}"));
            }
            cf::solve_params(b)?
        }
        (a, None) => cf::solve_beta_for_integer_a(a.unwrap_or(1))?,
    };
    let (split, upper) = (p.split(), p.upper());
    let xs: Vec<f64> = (0..samples)
        .map(|i| upper * (i as f64 + 0.5) / samples as f64)
        .collect();
    let vals = par_map(&xs, |&x| {
        let w = cf::digit_extract(&p, x, depth)?;
        let n0 = match w.block(0) {
            Some(Block::Finite(n)) => Some(n),
            _ => None,
        };
        Ok((fbeta::fbeta_eval_point(&p, x, depth)?, n0))
    })?;

    let mut report = Report::default();
    let mut map = Table::new("map", &["x", "f", "branch", "bound"]);
    for (&x, (e, _)) in xs.iter().zip(&vals) {
        let branch = if x < split {
            "left"
        } else if x > split {
            "right"
        } else {
            "split"
        };
        map.push(vec![
            cell(x),
            cell(e.value),
            branch.to_string(),
            cell(e.bound),
        ]);
    }

    let f0 = fbeta::fbeta_eval_point(&p, 0.0, depth)?.value;
    let fu = fbeta::fbeta_eval_point(&p, upper, depth)?.value;
    let tol = 1e-9 * ctx.tol_scale;
    report.check(
        "endpoints",
        f0 == 0.0 && (fu - upper).abs() <= tol,
        format!("f(0) = {f0}, f({upper}) = {fu}"),
    );

    let increasing = [true, false].iter().all(|&left| {
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&vals)
            .filter(|(&x, _)| if left { x < split } else { x > split })
            .map(|(_, (e, _))| (e.value, e.bound))
            .collect();
        pts.windows(2)
            .all(|w| w[1].0 > w[0].0 - 2.0 * (w[0].1 + w[1].1))
    });
    report.check(
        "increasing",
        increasing,
        "f increases along each branch".into(),
    );

    let h = 1e-6;
    let stencil: Vec<f64> = xs
        .iter()
        .copied()
        .filter(|&x| x - 2.0 * h > 0.0 && x + 2.0 * h < split)
        .collect();
    let derivs = par_map(&stencil, |&x| {
        let same_cylinder = |y: f64| -> renorm::Result<bool> {
            Ok(cf::digit_extract(&p, y, 1)?.block(0) == cf::digit_extract(&p, x, 1)?.block(0))
        };
        if !(same_cylinder(x - h)? && same_cylinder(x + h)?) {
            return Ok(None);
        }
        fbeta::fbeta_derivative_check(&p, x, h, depth).map(Some)
    })?;
    let mut dtable = Table::new("derivative", &["x", "relative_deviation"]);
    let mut worst_d = 0.0f64;
    for (&x, d) in stencil.iter().zip(&derivs) {
        if let Some(d) = d {
            worst_d = worst_d.max(*d);
            dtable.push(vec![cell(x), cell(*d)]);
        }
    }
    let tol = 1e-5 * ctx.tol_scale;
    report.check(
        "derivative",
        worst_d < tol,
        format!("max relative deviation {worst_d:e}, tol {tol:e}"),
    );

    let mut mobius = Table::new("mobius_left", &["x", "n0", "f", "mobius", "deviation"]);
    let mut worst_first = 0.0f64;
    let mut first_ok = true;
    let mut first_count = 0usize;
    let tol = 1e-8 * ctx.tol_scale;
    for (&x, (e, n0)) in xs.iter().zip(&vals) {
        if x >= split {
            continue;
        }
        let m = fbeta::fbeta_mobius_left(&p, x)?;
        let dev = (m - e.value).abs();
        if *n0 == Some(1) || p.a == 0.0 {
            worst_first = worst_first.max(dev);
            first_ok &= dev <= tol + 10.0 * e.bound;
            first_count += 1;
        }
        mobius.push(vec![
            cell(x),
            n0.map_or("inf".into(), cell),
            cell(e.value),
            cell(m),
            cell(dev),
        ]);
    }
    report.check(
        "mobius_first_cylinder",
        first_ok && first_count > 0,
        format!("max deviation on {first_count} points of the first left cylinder {worst_first:e}, tol {tol:e}"),
    );

    let right: Vec<f64> = xs.iter().copied().filter(|&x| x > split).collect();
    let mut fit = Table::new("mobius_right", &["d", "max_residual"]);
    if let Ok((d, res)) = fbeta::fit_mobius_right(&p, &right, depth) {
        fit.push(vec![cell(d), cell(res)]);
    }

    if p.a == 0.0 {
        let lp = LaminarParams::new(1.0)?;
        let mut worst = 0.0f64;
        for (&x, (e, _)) in xs.iter().zip(&vals) {
            worst = worst.max((mp::eval(&lp, x)? - e.value).abs());
        }
        report.check(
            "mp_map",
            worst < tol,
            format!("max |f - f_1| = {worst:e}, tol {tol:e}"),
        );
    }

    let mut params = params_table();
    push_params(&mut params, &p);
    report.tables.extend([params, map, dtable, mobius, fit]);
    Ok(report)
}
