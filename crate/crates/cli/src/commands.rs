use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use steerq::criteria::{CriterionKind, DbThreshold};
use steerq::measurements::{assemblage, OrthogonalTriad};
use steerq::measures::{MeasureKind, MeasureSet};
use steerq::qstate::{bloch_decompose, canonicalize, random_state, werner, CanonicalBlochForm, DensityMatrix, WernerParameter, ENSEMBLE_NAME};
use steerq::robustness::{
    canonical_alice_triad, lhs_feasibility, see_saw_from, steering_robustness, steering_robustness_with, NOISE_SET,
    ZERO_ROBUSTNESS_TOL,
};
use steerq::sdp::SolverOptions;
use steerq::volume::{estimate_volume, VolumeCriterion, SAMPLING_NAME};

use crate::args::{Command, CriterionArg, DbThresholdArg, RobustScanArgs, ScanArgs, VolumeArgs, WernerArgs};
use crate::output::{fmt_g12, write_outputs, Cell, Manifest, Table, SCHEMA_VERSION};
use crate::{CliError, CliResult};

/// Measures below this are treated as zero by the robust-scan consistency check.
pub const HIERARCHY_MIN_MEASURE: f64 = 1e-6;

pub const ALICE_FRAME: &str = "canonical-pauli";

/// Everything a command produces; written to disk by [`run`].
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub manifest: Manifest,
    pub trace: Option<(PathBuf, String)>,
}

pub fn run(command: &Command) -> CliResult<PathBuf> {
    let start = Instant::now();
    let mut report = match command {
        Command::Scan(a) => scan(a)?,
        Command::Werner(a) => werner_cmd(a)?,
        Command::RobustScan(a) => robust_scan(a)?,
        Command::Volume(a) => volume(a)?,
    };
    report.manifest.set("wall_clock_seconds", format!("{:.3}", start.elapsed().as_secs_f64()));
    let out = command.common().out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", command.name())));
    write_outputs(&out, &report.table, &report.manifest)?;
    if let Some((path, text)) = &report.trace {
        fs::write(path, text)?;
    }
    Ok(out)
}

/// Runs a command without touching the filesystem.
pub fn build(command: &Command) -> CliResult<Report> {
    match command {
        Command::Scan(a) => scan(a),
        Command::Werner(a) => werner_cmd(a),
        Command::RobustScan(a) => robust_scan(a),
        Command::Volume(a) => volume(a),
    }
}

fn manifest(command: &str, seed: u64) -> Manifest {
    let mut m = Manifest::default();
    m.set("schema_version", SCHEMA_VERSION);
    m.set("command", command);
    m.set("tool_version", env!("CARGO_PKG_VERSION"));
    m.set("seed", seed);
    m.set("ensemble", ENSEMBLE_NAME);
    m.set("measurement_sampling", SAMPLING_NAME);
    m.set("noise_set", NOISE_SET);
    m.set("alice_frame", ALICE_FRAME);
    m
}

/// Random state `id` of a run: stream `id` of the seeded ChaCha generator.
pub fn state_for(seed: u64, id: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    random_state(&mut rng)
}

pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("bad grid `{spec}`: expected start:stop:count or a comma list"));
    let grid: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match count {
            0 => return Err(bad()),
            1 => vec![start],
            _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
        }
    } else {
        spec.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect::<CliResult<_>>()?
    };
    if grid.is_empty() {
        return Err(bad());
    }
    if let Some(w) = grid.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(CliError::Usage(format!("grid value {w} outside [0, 1]")));
    }
    Ok(grid)
}

fn check_m(m: usize) -> CliResult<()> {
    if m == 2 || m == 3 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--m must be 2 or 3, got {m}")))
    }
}

fn canonical(rho: &DensityMatrix) -> CanonicalBlochForm {
    canonicalize(&bloch_decompose(rho))
}

fn werner_state(w: f64) -> CliResult<DensityMatrix> {
    Ok(werner(WernerParameter::new(w).map_err(|e| CliError::Usage(e.to_string()))?))
}

fn scan(args: &ScanArgs) -> CliResult<Report> {
    if args.n_states == 0 {
        return Err(CliError::Usage("--n-states must be at least 1".into()));
    }
    let seed = args.common.seed;
    let total = args.n_states + args.inject_werner;
    let rows: Vec<(usize, &'static str, CanonicalBlochForm, MeasureSet)> = (0..total)
        .into_par_iter()
        .map(|id| {
            let (source, rho) = if id < args.n_states {
                ("random", state_for(seed, id))
            } else {
                let k = id - args.n_states;
                let w = if args.inject_werner == 1 { 1.0 } else { k as f64 / (args.inject_werner - 1) as f64 };
                ("werner", werner_state(w)?)
            };
            let f = canonical(&rho);
            let s = MeasureSet::evaluate(&f).map_err(|e| CliError::numerical(id, e))?;
            Ok((id, source, f, s))
        })
        .collect::<Vec<CliResult<_>>>()
        .into_iter()
        .collect::<CliResult<_>>()?;

    let mut header = vec!["id", "source", "a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3"];
    header.extend(MeasureKind::ALL.map(|k| k.name()));
    let mut table = Table::new(header);
    for (id, source, f, s) in &rows {
        let mut row = vec![Cell::Int(*id as u64), Cell::Text(source.to_string())];
        row.extend(f.a.iter().chain(f.b.iter()).chain(f.c.iter()).map(|v| Cell::Real(*v)));
        row.extend(s.values().map(Cell::Real));
        table.push(row);
    }

    let mut m = manifest("scan", seed);
    m.set("n_states", args.n_states);
    m.set("inject_werner", args.inject_werner);
    let random: Vec<&MeasureSet> = rows.iter().filter(|r| r.1 == "random").map(|r| &r.3).collect();
    for p in MeasureKind::ALL {
        for z in MeasureKind::ALL {
            if p != z {
                let count = random.iter().filter(|s| s.get(p) > 0.0 && s.get(z) == 0.0).count();
                m.set(&format!("count_{}_positive_{}_zero", p.name(), z.name()), count);
            }
        }
    }
    Ok(Report { table, manifest: m, trace: None })
}

fn werner_cmd(args: &WernerArgs) -> CliResult<Report> {
    check_m(args.m)?;
    let grid = parse_grid(&args.grid)?;
    let mut header = vec!["index", "w"];
    header.extend(MeasureKind::ALL.map(|k| k.name()));
    if args.with_sdp {
        header.extend(["sr_epsilon", "primal_dual_gap", "solver_iterations", "lhs_feasible"]);
    }
    let options = SolverOptions { record_iterates: args.solver_trace.is_some(), ..Default::default() };
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &w)| {
            let rho = werner_state(w)?;
            let s = MeasureSet::evaluate(&canonical(&rho)).map_err(|e| CliError::numerical(i, e))?;
            let mut row = vec![Cell::Int(i as u64), Cell::Real(w)];
            row.extend(s.values().map(Cell::Real));
            let mut trace = String::new();
            if args.with_sdp {
                let asm = assemblage(&rho, &OrthogonalTriad::pauli(), args.m).map_err(|e| CliError::numerical(i, e))?;
                let sr = steering_robustness_with(&asm, &options).map_err(|e| CliError::numerical(i, e))?;
                let feasible = lhs_feasibility(&asm).map_err(|e| CliError::numerical(i, e))?.is_feasible();
                row.extend([
                    Cell::Real(sr.epsilon),
                    Cell::Real(sr.primal_dual_gap),
                    Cell::Int(sr.iterations as u64),
                    Cell::Bool(feasible),
                ]);
                for it in &sr.iterates {
                    trace.push_str(&format!("index={i} w={} {}\n", fmt_g12(w), it.to_line()));
                }
            }
            Ok((row, trace))
        })
        .collect::<Vec<CliResult<_>>>()
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?;

    let mut table = Table::new(header);
    let mut trace = String::new();
    for (row, t) in rows {
        table.push(row);
        trace.push_str(&t);
    }
    let mut m = manifest("werner", args.common.seed);
    m.set("grid", &args.grid);
    m.set("grid_points", grid.len());
    m.set("m", args.m);
    m.set("with_sdp", args.with_sdp);
    m.set("alice_settings", "pauli");
    let trace = args.solver_trace.clone().filter(|_| args.with_sdp).map(|p| (p, trace));
    Ok(Report { table, manifest: m, trace })
}

struct RobustRow {
    id: usize,
    e23: f64,
    sra: f64,
    see_saw: Option<(f64, usize)>,
}

fn robust_scan(args: &RobustScanArgs) -> CliResult<Report> {
    if args.n_states == 0 {
        return Err(CliError::Usage("--n-states must be at least 1".into()));
    }
    check_m(args.m)?;
    let seed = args.common.seed;
    let rows: Vec<RobustRow> = (0..args.n_states)
        .into_par_iter()
        .map(|id| {
            let num = |e| CliError::numerical(id, e);
            let rho = state_for(seed, id);
            let e23 = MeasureSet::evaluate(&canonical(&rho)).map_err(num)?.e23;
            let triad = canonical_alice_triad(&rho).map_err(num)?;
            let sra = steering_robustness(&assemblage(&rho, &triad, args.m).map_err(num)?).map_err(num)?.epsilon;
            if e23 > HIERARCHY_MIN_MEASURE && sra <= ZERO_ROBUSTNESS_TOL {
                return Err(CliError::Inconsistent {
                    id,
                    detail: format!("entropic measure {e23:e} is positive but robustness is {sra:e}"),
                });
            }
            let see_saw = if args.see_saw {
                let r = see_saw_from(&rho, &triad.axes(args.m), args.max_iters, args.see_saw_tol).map_err(num)?;
                Some((r.epsilon, r.iterations))
            } else {
                None
            };
            Ok(RobustRow { id, e23, sra, see_saw })
        })
        .collect::<Vec<CliResult<_>>>()
        .into_iter()
        .collect::<CliResult<_>>()?;

    let mut header = vec!["id", "s_e23", "sr_canonical_pauli"];
    if args.see_saw {
        header.extend(["sr_see_saw", "see_saw_iterations"]);
    }
    let mut table = Table::new(header);
    for r in &rows {
        let mut row = vec![Cell::Int(r.id as u64), Cell::Real(r.e23), Cell::Real(r.sra)];
        if let Some((eps, iters)) = r.see_saw {
            row.extend([Cell::Real(eps), Cell::Int(iters as u64)]);
        }
        table.push(row);
    }

    let n = rows.len() as f64;
    let only_sr = rows.iter().filter(|r| r.sra > ZERO_ROBUSTNESS_TOL && r.e23 == 0.0).count();
    let mut m = manifest("robust-scan", seed);
    m.set("n_states", args.n_states);
    m.set("m", args.m);
    m.set("see_saw", args.see_saw);
    m.set("count_sr_positive", rows.iter().filter(|r| r.sra > ZERO_ROBUSTNESS_TOL).count());
    m.set("count_e23_positive", rows.iter().filter(|r| r.e23 > 0.0).count());
    m.set("count_sr_positive_e23_zero", only_sr);
    m.set("fraction_sr_positive_e23_zero", fmt_g12(only_sr as f64 / n));
    if args.see_saw {
        m.set("max_iters", args.max_iters);
        m.set("see_saw_tol", fmt_g12(args.see_saw_tol));
        let mut gains: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.see_saw.map(|(eps, _)| eps - r.sra))
            .filter(|d| *d > ZERO_ROBUSTNESS_TOL)
            .collect();
        gains.sort_by(f64::total_cmp);
        m.set("count_see_saw_improved", gains.len());
        m.set("fraction_see_saw_improved", fmt_g12(gains.len() as f64 / n));
        let median = if gains.is_empty() { 0.0 } else { gains[gains.len() / 2] };
        m.set("median_see_saw_improvement", fmt_g12(median));
    }
    Ok(Report { table, manifest: m, trace: None })
}

fn criterion_kind(c: CriterionArg) -> CriterionKind {
    match c {
        CriterionArg::Linear => CriterionKind::Linear,
        CriterionArg::Entropic => CriterionKind::Entropic,
        CriterionArg::Rotinv => CriterionKind::RotInv,
        CriterionArg::Dimbound => CriterionKind::DimBound,
    }
}

/// Closed-form measure plotted against a volume curve, where one exists.
fn overlay_measure(kind: CriterionKind, m: usize, s: &MeasureSet) -> Option<f64> {
    match (kind, m) {
        (CriterionKind::Linear, 2) => Some(s.l2),
        (CriterionKind::Linear, 3) => Some(s.l3),
        (CriterionKind::Entropic, 3) => Some(s.e23),
        (CriterionKind::RotInv, 3) => Some(s.ri3),
        (CriterionKind::DimBound, 3) => Some(s.db3),
        _ => None,
    }
}

fn volume(args: &VolumeArgs) -> CliResult<Report> {
    check_m(args.m)?;
    let grid = parse_grid(&args.grid)?;
    if args.samples < steerq::volume::MIN_SAMPLES {
        return Err(CliError::Usage(format!("--samples must be at least {}", steerq::volume::MIN_SAMPLES)));
    }
    if !(args.q > 0.0 && args.q <= 2.0 && args.q != 1.0) {
        return Err(CliError::Usage(format!("--q must lie in (0, 2] and differ from 1, got {}", args.q)));
    }
    let mut kinds: Vec<CriterionKind> = if args.criteria.is_empty() {
        CriterionKind::ALL.iter().copied().filter(|k| args.m == 3 || *k != CriterionKind::DimBound).collect()
    } else {
        args.criteria.iter().map(|c| criterion_kind(*c)).collect()
    };
    kinds.sort();
    kinds.dedup();
    if args.m == 2 && kinds.contains(&CriterionKind::DimBound) {
        return Err(CliError::Usage("the dimension-bounded criterion needs --m 3".into()));
    }
    let threshold = match args.db_threshold {
        DbThresholdArg::Measure => DbThreshold::MeasureImplied,
        DbThresholdArg::Printed => DbThreshold::Printed,
    };
    let criterion = |k: CriterionKind| match k {
        CriterionKind::Entropic => VolumeCriterion::Entropic { q: args.q },
        CriterionKind::DimBound => VolumeCriterion::DimBound { threshold },
        other => VolumeCriterion::from_kind(other),
    };

    let mut header = vec!["index", "w", "criterion", "m", "samples", "violations", "fraction", "ci95_low", "ci95_high"];
    if args.overlay {
        header.push("measure");
    }
    let mut table = Table::new(header);
    for (i, &w) in grid.iter().enumerate() {
        let rho = werner_state(w)?;
        let measures = MeasureSet::evaluate(&canonical(&rho)).map_err(|e| CliError::numerical(i, e))?;
        for &k in &kinds {
            let est = estimate_volume(&rho, criterion(k), args.m, args.samples, args.common.seed)
                .map_err(|e| CliError::numerical(i, e))?;
            let mut row = vec![
                Cell::Int(i as u64),
                Cell::Real(w),
                Cell::Text(k.name().to_string()),
                Cell::Int(args.m as u64),
                Cell::Int(est.samples as u64),
                Cell::Int(est.violations as u64),
                Cell::Real(est.fraction),
                Cell::Real(est.lower()),
                Cell::Real(est.upper()),
            ];
            if args.overlay {
                row.push(overlay_measure(k, args.m, &measures).map_or(Cell::Empty, Cell::Real));
            }
            table.push(row);
        }
    }
    let mut m = manifest("volume", args.common.seed);
    m.set("grid", &args.grid);
    m.set("grid_points", grid.len());
    m.set("criteria", kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(","));
    m.set("m", args.m);
    m.set("samples", args.samples);
    m.set("q", fmt_g12(args.q));
    m.set("db_threshold", threshold.name());
    m.set("chunk_size", steerq::volume::CHUNK_SIZE);
    Ok(Report { table, manifest: m, trace: None })
}
