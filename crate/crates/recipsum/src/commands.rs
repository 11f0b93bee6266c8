//! One function per subcommand. Inputs are parsed and validated before the
//! echo is written and before any computation starts.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use recipsum_core::counting::{case_label, count_on_c, count_via_lattice, CountInstance, PhiSource};
use recipsum_core::lattice::{build_unipotent_lattice, minkowski_check, successive_minima, LatticeBasis};
use recipsum_core::normal::normalize;
use recipsum_core::numerics::{format_real, parse_matrix, RealScalar};
use recipsum_core::partition::{build_partition, extend_and_compose, HyperbolicRegion};
use recipsum_core::sums::{phi_profile, SweepRow};
use recipsum_core::weights::{exhaustive_check, validity, verify_weight_lemma, WeightTable};

use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::parallel::{count_direct_par, ratio_bounds_par, sweep_point_par};
use crate::records::*;
use crate::suite::desk_suite;

/// Summary of a finished run and the files it wrote.
#[derive(Debug)]
pub struct RunOutcome {
    pub summary: serde_json::Value,
    pub files: Vec<PathBuf>,
}

pub fn run(mut cli: Cli) -> CliResult<RunOutcome> {
    if let Command::Replay(r) = &cli.command {
        let mut loaded = Cli::load_echo(&r.config)?;
        if matches!(loaded.command, Command::Replay(_)) {
            return Err(CliError::Config("a config echo cannot itself be a replay".into()));
        }
        if cli.global.out.is_some() {
            loaded.global.out = cli.global.out.clone();
        }
        if cli.global.threads.is_some() {
            loaded.global.threads = cli.global.threads;
        }
        return run(loaded);
    }
    let settings = cli.settings()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli, &settings))
}

fn dispatch(cli: &Cli, s: &Settings) -> CliResult<RunOutcome> {
    match &cli.command {
        Command::Sum(a) => cmd_sum(cli, s, a),
        Command::Sweep(a) => cmd_sweep(cli, s, a),
        Command::Count(a) => cmd_count(cli, s, a),
        Command::Minima(a) => cmd_minima(cli, s, a),
        Command::PartitionDump(a) => cmd_partition_dump(cli, s, a),
        Command::WeightsCheck(a) => cmd_weights_check(cli, s, a),
        Command::PhiProfile(a) => cmd_phi_profile(cli, s, a),
        Command::RatioBounds(a) => cmd_ratio_bounds(cli, s, a),
        Command::Verify(a) => cmd_verify(cli, s, a),
        Command::Replay(_) => unreachable!("handled in run"),
    }
}

fn start(cli: &Cli, s: &Settings) -> CliResult<Outputs> {
    let mut out = Outputs::new(&s.out, cli.command.name())?;
    out.echo(cli)?;
    Ok(out)
}

fn finish(mut out: Outputs, summary: serde_json::Value) -> CliResult<RunOutcome> {
    out.summary(&summary)?;
    Ok(RunOutcome { summary, files: out.files })
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

fn f64s(x: f64) -> String {
    format!("{x}")
}

fn int_sides(q: &recipsum_core::lattice::BoxSpec) -> CliResult<Vec<i64>> {
    let b = q.int_bounds();
    if q.sides().iter().zip(&b).any(|(x, &i)| x.cmp(&RealScalar::int(i)).is_ne()) {
        return Err(CliError::Config("box sides must be integers here".into()));
    }
    Ok(b)
}

fn sweep_header(n: usize) -> Vec<String> {
    let mut h = vec!["shape".to_string()];
    h.extend((1..=n).map(|j| format!("Q{j}")));
    for c in ["Qgeo", "S", "lower", "upper", "dyadic", "dyadic_k_max", "phi", "c_low", "c_up"] {
        h.push(c.into());
    }
    h
}

fn sweep_csv_row(r: &SweepRow) -> Vec<String> {
    let mut v = vec![r.shape.clone()];
    v.extend(r.q.iter().map(|x| x.to_string()));
    v.push(f64s(r.q_geo));
    v.push(decimal(&r.s, 17));
    v.push(decimal(&r.lower, 17));
    v.push(decimal(&r.upper, 17));
    v.push(r.dyadic.to_string());
    v.push(r.dyadic_k_max.to_string());
    v.push(decimal(&r.phi.to_bigfloat(r.s.prec()), 17));
    v.push(f64s(r.c_low));
    v.push(f64s(r.c_up));
    v
}

fn cmd_sum(cli: &Cli, s: &Settings, a: &SumArgs) -> CliResult<RunOutcome> {
    let l = parse_system(&a.matrix, s.mode)?;
    require_irrational(&l, s.assume_irrational)?;
    let q = parse_box(&a.q, l.n(), s.mode)?;
    let sides = int_sides(&q)?;
    let shape = if sides.iter().all(|&x| x == sides[0]) { "sym" } else { "box" };
    let mut out = start(cli, s)?;
    let t0 = Instant::now();
    let (row, terms, dy) = sweep_point_par(&l, &sides, shape, s.budget, s.prec)?;
    let rec = SumRecord::new(&a.matrix, &row, terms, &dy);
    out.csv(&sweep_header(l.n()), &[sweep_csv_row(&row)])?;
    out.jsonl(std::slice::from_ref(&rec))?;
    if s.emit_gnuplot {
        out.gnuplot("S_L(Q) and envelopes", "Qgeo", &["S", "lower", "upper", "dyadic"], true, true)?;
    }
    if !rec.dyadic_dominates {
        return Err(CliError::Invariant(format!("S = {} exceeds the dyadic bound {}", rec.s, rec.dyadic)));
    }
    finish(out, json!({ "command": "sum", "record": rec, "elapsed_ms": elapsed_ms(t0) }))
}

fn cmd_sweep(cli: &Cli, s: &Settings, a: &SweepArgs) -> CliResult<RunOutcome> {
    let l = parse_system(&a.matrix, s.mode)?;
    require_irrational(&l, s.assume_irrational)?;
    let grid = parse_int_grid(&a.q_geo, "Qgeo")?;
    if grid[0] < 2 {
        return Err(CliError::Config("--Qgeo values must be at least 2".into()));
    }
    let shapes = parse_shapes(&a.shapes)?;
    let points: Vec<(i64, _)> = grid.iter().flat_map(|&g| shapes.iter().map(move |&sh| (g, sh))).collect();
    let mut out = start(cli, s)?;
    let t0 = Instant::now();
    let n = l.n();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(g, sh)| sweep_point_par(&l, &sh.sides(g, n), sh.name(), s.budget, s.prec))
        .collect::<recipsum_core::Result<_>>()?;
    let rows: Vec<Vec<String>> = results.iter().map(|(r, _, _)| sweep_csv_row(r)).collect();
    let recs: Vec<SumRecord> = results.iter().map(|(r, t, d)| SumRecord::new(&a.matrix, r, *t, d)).collect();
    out.csv(&sweep_header(n), &rows)?;
    out.jsonl(&recs)?;
    if s.emit_gnuplot {
        out.gnuplot("S_L(Q) over the sweep", "Qgeo", &["S", "lower", "upper", "dyadic"], true, true)?;
    }
    let c_up_max = recs.iter().map(|r| r.c_up).fold(0.0, f64::max);
    let c_low_min = recs.iter().map(|r| r.c_low).fold(f64::INFINITY, f64::min);
    let dominated = recs.iter().all(|r| r.dyadic_dominates);
    if !dominated {
        return Err(CliError::Invariant("a sum exceeds its dyadic bound".into()));
    }
    finish(
        out,
        json!({ "command": "sweep", "points": recs.len(), "c_up_max": c_up_max, "c_low_min": c_low_min,
                "dyadic_dominates": dominated, "elapsed_ms": elapsed_ms(t0) }),
    )
}

fn cmd_count(cli: &Cli, s: &Settings, a: &CountArgs) -> CliResult<RunOutcome> {
    let l = parse_system(&a.matrix, s.mode)?;
    let eps = parse_positive(&a.eps, s.mode, "eps")?;
    let t = parse_positive(&a.t, s.mode, "T")?;
    let q = parse_box(&a.q, l.n(), s.mode)?;
    let inst = CountInstance::new(l, eps, t, q)?;
    let mut out = start(cli, s)?;
    let t0 = Instant::now();
    let direct = match a.method {
        CountMethod::Direct | CountMethod::Both => Some(count_direct_par(&inst, s.budget, s.prec)?),
        CountMethod::Lattice => None,
    };
    let lattice = match a.method {
        CountMethod::Lattice | CountMethod::Both => Some(count_via_lattice(&inst, s.budget)?),
        CountMethod::Direct => None,
    };
    let q_strings: Vec<String> = inst.q.sides().iter().map(format_real).collect();
    let mut header = vec!["method".to_string(), "eps".into(), "T".into()];
    header.extend((1..=q_strings.len()).map(|j| format!("Q{j}")));
    header.push("count".into());
    let mut rows = Vec::new();
    for (name, v) in [("direct", direct), ("lattice", lattice)] {
        if let Some(c) = v {
            let mut r = vec![name.to_string(), format_real(&inst.eps), format_real(&inst.t)];
            r.extend(q_strings.iter().cloned());
            r.push(c.to_string());
            rows.push(r);
        }
    }
    let rec = CountRecord {
        matrix: a.matrix.clone(),
        eps: format_real(&inst.eps),
        t: format_real(&inst.t),
        q: q_strings,
        method: format!("{:?}", a.method).to_lowercase(),
        count: direct.or(lattice).unwrap_or(0),
        count_direct: direct,
        count_lattice: lattice,
        count_on_c: count_on_c(&inst),
        elapsed_ms: elapsed_ms(t0),
    };
    out.csv(&header, &rows)?;
    out.jsonl(std::slice::from_ref(&rec))?;
    if let (Some(d), Some(l)) = (direct, lattice) {
        if d != l {
            return Err(CliError::Invariant(format!("direct count {d} differs from lattice count {l}")));
        }
    }
    finish(out, json!({ "command": "count", "record": rec }))
}

fn cmd_minima(cli: &Cli, s: &Settings, a: &MinimaArgs) -> CliResult<RunOutcome> {
    let (basis, m) = match (&a.basis, &a.matrix) {
        (Some(b), None) => {
            let rows = parse_matrix(b, s.mode)?;
            let dim = rows.len();
            if rows[0].len() != dim {
                return Err(CliError::Config("--basis must list as many vectors as coordinates".into()));
            }
            let m = a.m.unwrap_or(1).clamp(1, dim);
            (LatticeBasis::new(rows)?, m)
        }
        (None, Some(mat)) => {
            let l = parse_system(mat, s.mode)?;
            let m = l.m();
            match a.cell {
                None => (build_unipotent_lattice(&l), m),
                Some(idx) => {
                    let eps = parse_positive(a.eps.as_deref().unwrap_or_default(), s.mode, "eps")?;
                    let t = parse_positive(a.t.as_deref().unwrap_or_default(), s.mode, "T")?;
                    let q = parse_box(a.q.as_deref().unwrap_or_default(), l.n(), s.mode)?;
                    let partition = build_partition(&HyperbolicRegion::new(m, eps, t)?, s.prec)?;
                    let cell = partition.cells.get(idx).ok_or_else(|| {
                        CliError::Config(format!("--cell {idx}: partition has {} cells", partition.len()))
                    })?;
                    (extend_and_compose(&partition, cell, &l, &q, s.prec)?, m)
                }
            }
        }
        _ => return Err(CliError::Config("give exactly one of --basis and --matrix".into())),
    };
    let mut out = start(cli, s)?;
    let t0 = Instant::now();
    let rep = successive_minima(&basis, s.budget)?;
    let ratio = minkowski_check(&rep, basis.det(), s.prec)?.to_f64();
    let (nb, ladder) = normalize(&basis, &rep, m)?;
    let rec = MinimaRecord::new(&rep, ratio, &nb, &ladder);
    let header: Vec<String> = ["s", "lambda", "lambda_sq", "witness", "mahler_weyl", "nesting_bound", "support"]
        .iter()
        .map(|x| x.to_string())
        .collect();
    let rows: Vec<Vec<String>> = (0..rep.lambdas.len())
        .map(|i| {
            vec![
                (i + 1).to_string(),
                decimal(&rep.lambdas[i].to_bigfloat(s.prec), 17),
                scalar_string(&rep.lambda_sq[i]),
                rep.coefficients[i].iter().map(|z| z.to_string()).collect::<Vec<_>>().join(" "),
                rec.normalized.mahler_weyl[i].to_string(),
                rec.normalized.nesting_bound[i].to_string(),
                rec.normalized.supports[i].iter().map(|z| z.to_string()).collect::<Vec<_>>().join(" "),
            ]
        })
        .collect();
    out.csv(&header, &rows)?;
    out.jsonl(std::slice::from_ref(&rec))?;
    let certified = rec.normalized.nesting_bound.iter().all(|&b| b) && rec.normalized.nested;
    if !certified {
        return Err(CliError::Invariant("normalized basis misses the nesting certificate".into()));
    }
    finish(
        out,
        json!({ "command": "minima", "dim": rep.lambdas.len(), "minkowski_ratio": ratio, "case": case_label(&ladder.case),
                "nodes": rep.nodes, "elapsed_ms": elapsed_ms(t0) }),
    )
}

fn cmd_partition_dump(cli: &Cli, s: &Settings, a: &PartitionArgs) -> CliResult<RunOutcome> {
    if a.m == 0 {
        return Err(CliError::Config("--M must be positive".into()));
    }
    let eps = parse_positive(&a.eps, s.mode, "eps")?;
    let t = parse_positive(&a.t, s.mode, "T")?;
    let region = HyperbolicRegion::new(a.m, eps, t)?;
    let mut out = start(cli, s)?;
    let t0 = Instant::now();
    let partition = build_partition(&region, s.prec)?;
    if let Some(c) = partition.cells.iter().find(|c| !c.exponent_sum().is_zero()) {
        return Err(CliError::Invariant(format!("exponents of cell {:?} do not sum to zero", c.k)));
    }
    let recs: Vec<CellRecord> =
        partition.cells.iter().enumerate().map(|(i, c)| CellRecord::new(i, c, &partition, s.prec)).collect();
    let mut header = vec!["index".to_string(), "k".into(), "regime".into()];
    header.extend((1..=a.m).map(|i| format!("a{i}")));
    let rows: Vec<Vec<String>> = recs
        .iter()
        .map(|r| {
            let mut v = vec![
                r.index.to_string(),
                r.k.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "),
                r.regime.clone(),
            ];
            v.extend(r.a.iter().cloned());
            v
        })
        .collect();
    out.csv(&header, &rows)?;
    out.jsonl(&recs)?;
    let summary = PartitionSummary {
        m: a.m,
        eps: format_real(region.eps()),
        t: format_real(region.t()),
        cells: partition.len(),
        k_cap: partition.k_cap,
        kappa: partition.kappa,
        cardinality_bound: partition.cardinality_bound(s.prec),
        count_constant: partition.count_constant,
    };
    finish(out, json!({ "command": "partition-dump", "partition": summary, "elapsed_ms": elapsed_ms(t0) }))
}

fn parse_table(s: &str, m: usize, n: usize) -> CliResult<Vec<Vec<bool>>> {
    let t: Vec<Vec<bool>> = s
        .split(';')
        .map(|row| {
            row.trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(CliError::Config(format!("--table: unexpected '{c}'"))),
                })
                .collect()
        })
        .collect::<CliResult<_>>()?;
    if t.len() != m + n - 1 || t.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("--table must have {} rows of {n} bits", m + n - 1)));
    }
    Ok(t)
}

fn cmd_weights_check(cli: &Cli, s: &Settings, a: &WeightsArgs) -> CliResult<RunOutcome> {
    if a.m == 0 || a.n == 0 {
        return Err(CliError::Config("--M and --N must be positive".into()));
    }
    if (a.m + a.n - 1) * a.n > 24 {
        return Err(CliError::Config("shape too large for an exhaustive check".into()));
    }
    let table = match (&a.table, a.exhaustive) {
        (Some(t), false) => Some(parse_table(t, a.m, a.n)?),
        (None, true) => None,
        _ => return Err(CliError::Config("give --exhaustive or --table".into())),
    };
    let mut out = start(cli, s)?;
    let t0 = Instant::now();
    match table {
        None => {
            let rep = exhaustive_check(a.m, a.n);
            let rec = ExhaustiveRecord::from(&rep);
            let header: Vec<String> = ["M", "N", "examined", "valid", "passed", "outside_ladder_failures"]
                .iter()
                .map(|x| x.to_string())
                .collect();
            let row = vec![
                rec.m.to_string(),
                rec.n.to_string(),
                rec.examined.to_string(),
                rec.valid.to_string(),
                rec.passed.to_string(),
                rec.outside_ladder_failures.to_string(),
            ];
            out.csv(&header, &[row])?;
            out.jsonl(std::slice::from_ref(&rec))?;
            if rec.passed != rec.valid {
                return Err(CliError::Invariant(format!("{} valid tables fail", rec.valid - rec.passed)));
            }
            finish(out, json!({ "command": "weights-check", "report": rec, "elapsed_ms": elapsed_ms(t0) }))
        }
        Some(t) => {
            let v = validity(a.m, &t);
            let tab = WeightTable::new(a.m, a.n, t)?;
            let rep = verify_weight_lemma(&tab);
            let rec = WeightTableRecord::new(&tab, &v, &rep);
            let header: Vec<String> = ["s", "h", "k", "alpha", "alpha_sj"].iter().map(|x| x.to_string()).collect();
            let rows: Vec<Vec<String>> = (0..rec.k.len())
                .map(|i| {
                    vec![
                        (i + 1).to_string(),
                        rec.h[i].to_string(),
                        rec.k[i].clone(),
                        rec.alpha[i].clone(),
                        rec.alpha_sj[i].join(" "),
                    ]
                })
                .collect();
            out.csv(&header, &rows)?;
            out.jsonl(std::slice::from_ref(&rec))?;
            if v.all() && !rec.passed {
                return Err(CliError::Invariant("a valid table fails the weight identities".into()));
            }
            finish(
                out,
                json!({ "command": "weights-check", "valid": v.all(), "passed": rec.passed, "elapsed_ms": elapsed_ms(t0) }),
            )
        }
    }
}

fn parse_height_grid(s: &str, st: &Settings) -> CliResult<Vec<RealScalar>> {
    if s.contains("..") {
        return Ok(parse_int_grid(s, "X")?.into_iter().map(RealScalar::int).collect());
    }
    s.split(',').map(|e| parse_scalar(e, st.mode, "X")).collect()
}

fn cmd_phi_profile(cli: &Cli, s: &Settings, a: &PhiArgs) -> CliResult<RunOutcome> {
    let l = parse_system(&a.matrix, s.mode)?;
    require_irrational(&l, s.assume_irrational)?;
    let grid = parse_height_grid(&a.x, s)?;
    if grid.iter().any(|x| x.lt(&RealScalar::int(1))) || grid.windows(2).any(|w| w[1].lt(&w[0])) {
        return Err(CliError::Config("--X must be ascending and at least 1".into()));
    }
    let mut out = start(cli, s)?;
    let t0 = Instant::now();
    let prof = phi_profile(&l, &grid, s.budget, s.prec)?;
    let recs: Vec<PhiRecord> = prof
        .grid
        .iter()
        .zip(&prof.values)
        .zip(&prof.argmin)
        .map(|((x, v), q)| PhiRecord { x: scalar_string(x), phi: scalar_string(v), argmin: q.clone() })
        .collect();
    let header: Vec<String> = ["X", "phi", "phi_exact", "argmin"].iter().map(|x| x.to_string()).collect();
    let rows: Vec<Vec<String>> = prof
        .grid
        .iter()
        .zip(&recs)
        .zip(&prof.values)
        .map(|((x, r), v)| {
            vec![
                f64s(x.to_f64()),
                decimal(&v.to_bigfloat(s.prec), 17),
                r.phi.clone(),
                r.argmin.iter().map(|z| z.to_string()).collect::<Vec<_>>().join(" "),
            ]
        })
        .collect();
    out.csv(&header, &rows)?;
    out.jsonl(&recs)?;
    if s.emit_gnuplot {
        out.gnuplot("empirical profile", "X", &["phi"], true, true)?;
    }
    finish(out, json!({ "command": "phi-profile", "points": recs.len(), "elapsed_ms": elapsed_ms(t0) }))
}

fn cmd_ratio_bounds(cli: &Cli, s: &Settings, a: &RatioArgs) -> CliResult<RunOutcome> {
    let l = parse_system(&a.matrix, s.mode)?;
    let eps = parse_positive(&a.eps, s.mode, "eps")?;
    let t = parse_positive(&a.t, s.mode, "T")?;
    let q = parse_box(&a.q, l.n(), s.mode)?;
    let asserted = a.phi.as_deref().map(|p| parse_positive(p, s.mode, "phi")).transpose()?;
    if asserted.is_none() {
        require_irrational(&l, s.assume_irrational)?;
    }
    let inst = CountInstance::new(l.clone(), eps.clone(), t.clone(), q.clone())?;
    let region = HyperbolicRegion::new(l.m(), eps, t)?;
    let mut out = start(cli, s)?;
    let t0 = Instant::now();
    let phi = match asserted {
        Some(v) => PhiSource::Asserted(v),
        None => {
            let prof = phi_profile(&l, &[q.q_geo(s.prec)], s.budget, s.prec)?;
            PhiSource::Empirical(prof.values[0].clone())
        }
    };
    let partition = build_partition(&region, s.prec)?;
    let rep = ratio_bounds_par(&inst, &partition, phi, s.budget, s.prec)?;
    let header: Vec<String> =
        ["k", "s", "lhs", "rhs", "rhs_total", "case", "fitted"].iter().map(|x| x.to_string()).collect();
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.k.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "),
                r.s.to_string(),
                f64s(r.lhs),
                f64s(r.rhs),
                f64s(r.rhs_total),
                case_label(&r.case),
                f64s(r.fitted),
            ]
        })
        .collect();
    out.csv(&header, &rows)?;
    let summary = RatioSummary::new(&a.matrix, partition.len(), &rep);
    out.jsonl(std::slice::from_ref(&summary))?;
    if s.emit_gnuplot {
        out.gnuplot("fitted ratio per index", "s", &["fitted"], false, true)?;
    }
    finish(out, json!({ "command": "ratio-bounds", "summary": summary, "elapsed_ms": elapsed_ms(t0) }))
}

fn cmd_verify(cli: &Cli, s: &Settings, a: &VerifyArgs) -> CliResult<RunOutcome> {
    let Suite::Desk = a.suite;
    let mut out = start(cli, s)?;
    let t0 = Instant::now();
    let checks = desk_suite(s.seed, s.budget, s.prec)?;
    let header: Vec<String> = ["check", "instances", "failures", "status"].iter().map(|x| x.to_string()).collect();
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.check.clone(),
                c.instances.to_string(),
                c.failures.to_string(),
                if c.passed() { "pass" } else { "fail" }.to_string(),
            ]
        })
        .collect();
    out.csv(&header, &rows)?;
    out.jsonl(&checks)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.check.as_str()).collect();
    if !failed.is_empty() {
        return Err(CliError::Invariant(format!("failed checks: {}", failed.join(", "))));
    }
    finish(out, json!({ "command": "verify", "checks": checks.len(), "elapsed_ms": elapsed_ms(t0) }))
}
