//! The six commands. Each loads and validates its inputs, delegates the
//! mathematics to the library, and assembles a deterministic report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use ergavg::{
    average_report, conditional_expectation, constancy_check, four_term_bound, good_pair_set,
    inner_product, integral, intersection_density_scan, iterated_limit, khintchine_bound,
    l2_distance, l2_norm, lambda_measure, multi_average, multi_limit, multi_limit_dual,
    parallelepiped_search, read_coloring, read_grid, skew_product_pair, syndeticity_estimate,
    verify_parallelepiped, wts_subspace, ConstancyReport, Error, FolnerSequence, GroupSpec,
    Observable, Permutation, Rect, Scalar,
};
use serde_json::{json, Value};

use crate::report::{input_digest, RunReport};
use crate::system_file::{
    at, load_system, parse_system_bytes, ActionSection, AxisSection, CliError, FolnerSection,
    GroupSection, LoadedSystem, ReportScalar, SpaceSection, SystemFile,
};

fn ms(from: Instant) -> f64 {
    from.elapsed().as_secs_f64() * 1e3
}

fn read_input(path: &Path) -> Result<(Vec<u8>, String), CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::validation(format!("reading {}: {e}", path.display())))?;
    let digest = input_digest(&bytes);
    Ok((bytes, digest))
}

fn load<S: ReportScalar>(path: &Path) -> Result<(LoadedSystem<S>, String), CliError> {
    let (bytes, digest) = read_input(path)?;
    let file = parse_system_bytes(&bytes)?;
    Ok((load_system::<S>(&file)?, digest))
}

fn reprs<S: Scalar>(f: &Observable<S>) -> Vec<Value> {
    f.values().iter().map(|v| Value::from(v.repr())).collect()
}

/// Finite-stage averages next to the exact limit.
pub fn cmd_average<S: ReportScalar>(
    path: &Path,
    f1: &str,
    f2: &str,
    f3: &str,
    stages: &[u64],
) -> Result<RunReport, CliError> {
    let t_load = Instant::now();
    let (system, digest) = load::<S>(path)?;
    let load_ms = ms(t_load);
    let g1 = system.observable(f1)?;
    let g2 = system.observable(f2)?;
    let g3 = system.observable(f3)?;
    let t_compute = Instant::now();
    let report = average_report(
        &system.pair,
        g1,
        g2,
        g3,
        &system.seq_t,
        &system.seq_s,
        stages,
    )?;
    let compute_ms = ms(t_compute);

    let stage_rows: Vec<Value> = report
        .stages
        .iter()
        .map(|entry| {
            json!({
                "n": entry.n,
                "average": reprs(&entry.average),
                "deviation": entry.deviation,
            })
        })
        .collect();
    let mut csv = vec![vec!["n".to_string(), "deviation".to_string()]];
    for entry in &report.stages {
        csv.push(vec![entry.n.to_string(), format!("{:?}", entry.deviation)]);
    }
    Ok(RunReport {
        body: json!({
            "command": "average",
            "inputs_digest": digest,
            "mode": S::MODE,
            "observables": {"f1": f1, "f2": f2, "f3": f3},
            "stages": stage_rows,
            "limit": reprs(&report.limit),
        }),
        csv,
        timings: vec![("load".into(), load_ms), ("compute".into(), compute_ms)],
    })
}

/// Both recurrence bounds with pass/fail flags. The boolean is true when a
/// bound was violated — a falsified theorem, reported with exit code 3.
pub fn cmd_bounds<S: ReportScalar>(path: &Path, f: &str) -> Result<(RunReport, bool), CliError> {
    let t_load = Instant::now();
    let (system, digest) = load::<S>(path)?;
    let load_ms = ms(t_load);
    let g = system.observable(f)?;
    let t_compute = Instant::now();
    let (four_left, four_right) = four_term_bound(&system.pair, g, &system.seq_t, &system.seq_s)?;
    let (single_left, single_right) = khintchine_bound(system.pair.t(), g, &system.seq_t)?;
    let compute_ms = ms(t_compute);

    let holds = |left: &S, right: &S| Scalar::to_f64(left) >= Scalar::to_f64(right) - 1e-12;
    let four_pass = holds(&four_left, &four_right);
    let single_pass = holds(&single_left, &single_right);

    let csv = vec![
        vec![
            "bound".to_string(),
            "left".to_string(),
            "right".to_string(),
            "pass".to_string(),
        ],
        vec![
            "four_term".to_string(),
            four_left.repr(),
            four_right.repr(),
            four_pass.to_string(),
        ],
        vec![
            "single".to_string(),
            single_left.repr(),
            single_right.repr(),
            single_pass.to_string(),
        ],
    ];
    let report = RunReport {
        body: json!({
            "command": "bounds",
            "inputs_digest": digest,
            "mode": S::MODE,
            "observable": f,
            "four_term": {"left": four_left.repr(), "right": four_right.repr(), "pass": four_pass},
            "single": {"left": single_left.repr(), "right": single_right.repr(), "pass": single_pass},
        }),
        csv,
        timings: vec![("load".into(), load_ms), ("compute".into(), compute_ms)],
    };
    Ok((report, !(four_pass && single_pass)))
}

/// Density scan over a shift range: per-shift four-fold intersection
/// densities, the qualifying set, and its syndeticity constant.
pub fn cmd_scan(
    path: &Path,
    epsilon: f64,
    sub: Rect,
    g_range: (i64, i64),
    h_range: (i64, i64),
) -> Result<RunReport, CliError> {
    let t_load = Instant::now();
    let (_, digest) = read_input(path)?;
    let grid = read_grid(path)?;
    let load_ms = ms(t_load);
    let t_compute = Instant::now();
    let good = good_pair_set(&grid, epsilon, &sub, g_range, h_range)?;
    let syndeticity = syndeticity_estimate(good.grid());
    let mut rows = Vec::new();
    let mut csv = vec![vec![
        "g".to_string(),
        "h".to_string(),
        "density".to_string(),
        "good".to_string(),
    ]];
    for h in h_range.0..h_range.1 {
        for g in g_range.0..g_range.1 {
            match intersection_density_scan(&grid, (g, h), &sub) {
                Ok(density) => {
                    let is_good = good.contains_shift(g, h);
                    rows.push(json!({"g": g, "h": h, "density": density, "good": is_good}));
                    csv.push(vec![
                        g.to_string(),
                        h.to_string(),
                        format!("{density:?}"),
                        is_good.to_string(),
                    ]);
                }
                Err(Error::OutsideWindow { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
    let compute_ms = ms(t_compute);
    Ok(RunReport {
        body: json!({
            "command": "scan",
            "inputs_digest": digest,
            "window": {"w1": grid.width(), "w2": grid.height()},
            "sub": {"x0": sub.x0, "y0": sub.y0, "width": sub.width, "height": sub.height},
            "epsilon": epsilon,
            "delta": good.base_density(),
            "threshold": good.threshold(),
            "good_count": good.shifts().len(),
            "syndeticity": syndeticity,
            "shifts": rows,
        }),
        csv,
        timings: vec![("load".into(), load_ms), ("compute".into(), compute_ms)],
    })
}

/// Monochromatic-parallelepiped search over a coloring window.
pub fn cmd_partition(path: &Path, max_shift: u32) -> Result<RunReport, CliError> {
    let t_load = Instant::now();
    let (_, digest) = read_input(path)?;
    let coloring = read_coloring(path)?;
    let load_ms = ms(t_load);
    let t_compute = Instant::now();
    let found = parallelepiped_search(&coloring, max_shift);
    let compute_ms = ms(t_compute);
    if let Some(p) = &found {
        if !verify_parallelepiped(&coloring, p.color, p.base, p.shifts) {
            return Err(CliError::defect(
                "scanner returned a configuration that fails independent verification",
            ));
        }
    }
    let mut csv = vec![vec![
        "found".to_string(),
        "color".to_string(),
        "a1".to_string(),
        "a2".to_string(),
        "a3".to_string(),
        "g".to_string(),
        "h".to_string(),
        "k".to_string(),
    ]];
    let body_found = match &found {
        Some(p) => {
            csv.push(vec![
                "true".to_string(),
                p.color.to_string(),
                p.base.0.to_string(),
                p.base.1.to_string(),
                p.base.2.to_string(),
                p.shifts.0.to_string(),
                p.shifts.1.to_string(),
                p.shifts.2.to_string(),
            ]);
            json!({
                "color": p.color,
                "base": [p.base.0, p.base.1, p.base.2],
                "shifts": [p.shifts.0, p.shifts.1, p.shifts.2],
            })
        }
        None => {
            csv.push(vec!["false".to_string(); 8]);
            Value::Null
        }
    };
    Ok(RunReport {
        body: json!({
            "command": "partition",
            "inputs_digest": digest,
            "window": coloring.n(),
            "colors": coloring.colors(),
            "max_shift": max_shift,
            "parallelepiped": body_found,
        }),
        csv,
        timings: vec![("load".into(), load_ms), ("compute".into(), compute_ms)],
    })
}

/// Writes a ready-to-run skew-product system file and re-validates it.
pub fn cmd_example(
    out_path: &Path,
    p: usize,
    q: usize,
    r: usize,
    tau: &[i64],
    sigma: &[i64],
) -> Result<RunReport, CliError> {
    let t_compute = Instant::now();
    let pair = skew_product_pair::<f64>(p, q, r, tau, sigma)?;
    let n = pair.space().n();
    let zero_to_n = AxisSection {
        lo_coef: 0,
        lo_off: 0,
        hi_coef: 1,
        hi_off: 0,
    };
    let mut observables = BTreeMap::new();
    // Indicator of the origin cell and the fiber height, exact in both
    // scalar modes. Points are packed as (y0·q + y1)·r + k.
    observables.insert(
        "cell0".to_string(),
        (0..n).map(|i| Value::from(i64::from(i == 0))).collect(),
    );
    observables.insert(
        "height".to_string(),
        (0..n)
            .map(|i| Value::from(format!("{}/{r}", i % r)))
            .collect(),
    );
    let file = SystemFile {
        space: SpaceSection {
            weights: (0..n).map(|_| Value::from(format!("1/{n}"))).collect(),
        },
        group: GroupSection {
            free_abelian: Some(1),
            finite_table: None,
        },
        t: ActionSection {
            generators: vec![pair.t().generators()[0].map().to_vec()],
        },
        s: ActionSection {
            generators: vec![pair.s().generators()[0].map().to_vec()],
        },
        folner_t: Some(FolnerSection {
            full_group: None,
            boxes: Some(vec![zero_to_n.clone()]),
        }),
        folner_s: Some(FolnerSection {
            full_group: None,
            boxes: Some(vec![zero_to_n]),
        }),
        observables,
    };
    let mut text =
        serde_json::to_string_pretty(&file).map_err(|e| CliError::validation(e.to_string()))?;
    text.push('\n');
    fs::write(out_path, &text)
        .map_err(|e| CliError::validation(format!("writing {}: {e}", out_path.display())))?;

    // Round trip: the written document must parse back identically and
    // survive full validation in both scalar modes.
    let (bytes, digest) = read_input(out_path)?;
    let reparsed = parse_system_bytes(&bytes)?;
    if reparsed != file {
        return Err(CliError::defect(
            "emitted system file did not round-trip field-for-field",
        ));
    }
    load_system::<f64>(&reparsed)?;
    load_system::<num::BigRational>(&reparsed)?;
    let compute_ms = ms(t_compute);

    Ok(RunReport {
        body: json!({
            "command": "example",
            "written": out_path.display().to_string(),
            "digest": digest,
            "points": n,
            "base": [p, q],
            "fiber": r,
            "validated": true,
        }),
        csv: vec![
            vec!["written".to_string(), "points".to_string()],
            vec![out_path.display().to_string(), n.to_string()],
        ],
        timings: vec![("compute".into(), compute_ms)],
    })
}

struct CheckRow {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check_error(name: &'static str, e: impl std::fmt::Display) -> CheckRow {
    CheckRow {
        name,
        pass: false,
        detail: format!("errored: {e}"),
    }
}

/// Runs the full identity suite on one system file. Any failed row means a
/// proved statement did not hold on validated input — reported as a defect
/// with exit code 3.
pub fn cmd_check<S: ReportScalar>(path: &Path, seed: u64) -> Result<(RunReport, bool), CliError> {
    let t_load = Instant::now();
    let (system, digest) = load::<S>(path)?;
    let load_ms = ms(t_load);
    let pair = &system.pair;
    let space = pair.space();
    let n = space.n();

    // Probe functions: the named observables, padded with canonical ones.
    let mut probes: Vec<Observable<S>> = system.observables.values().cloned().collect();
    probes.push(Observable::indicator(n, [0]));
    probes.push(Observable::constant(n, S::one()));
    probes.push(Observable::indicator(n, [n - 1]));
    let (f1, f2, f3) = (&probes[0], &probes[1], &probes[2]);

    let t_compute = Instant::now();
    let mut rows: Vec<CheckRow> = Vec::new();

    // Full-period exactness over canonical box windows.
    let canonical_seq = match pair.group() {
        GroupSpec::FreeAbelian { .. } => FolnerSequence::boxes_zero_to_n(pair.group())
            .map_err(|e| at("folner", e))?,
        GroupSpec::FiniteTable(_) => FolnerSequence::default_for(pair.group()),
    };
    let limit = multi_limit(pair, f1, f2, f3)?;
    rows.push(match pair.full_period() {
        Some(period) => {
            match multi_average(pair, f1, f2, f3, &canonical_seq, &canonical_seq, period) {
                Ok(avg) => {
                    let dist = l2_distance(space, &avg, &limit)?;
                    CheckRow {
                        name: "full_period_limit",
                        pass: dist <= 1e-12,
                        detail: format!("‖A − L‖₂ = {dist:.2e} at n = {period}"),
                    }
                }
                Err(Error::WindowTooLarge { .. }) => CheckRow {
                    name: "full_period_limit",
                    pass: true,
                    detail: format!("skipped: window at n = {period} exceeds the enumeration cap"),
                },
                Err(e) => check_error("full_period_limit", e),
            }
        }
        None => CheckRow {
            name: "full_period_limit",
            pass: true,
            detail: "skipped: full period exceeds the enumeration cap".into(),
        },
    });

    // The three limit formulas.
    rows.push(
        match (
            multi_limit_dual(pair, f1, f2, f3),
            iterated_limit(pair, f1, f2, f3),
        ) {
            (Ok(dual), Ok(iterated)) => {
                let d1 = l2_distance(space, &limit, &dual)?;
                let d2 = l2_distance(space, &limit, &iterated)?;
                CheckRow {
                    name: "formula_concordance",
                    pass: d1 <= 1e-9 && d2 <= 1e-9,
                    detail: format!("dual gap {d1:.2e}, iterated gap {d2:.2e}"),
                }
            }
            (Err(e), _) | (_, Err(e)) => check_error("formula_concordance", e),
        },
    );

    // Coupling invariance and the factored triple integral.
    rows.push(match lambda_measure(pair) {
        Ok(lambda) => {
            let id = Permutation::identity(n);
            let invariant = pair
                .t()
                .generators()
                .iter()
                .all(|t| lambda.pushforward(t, &id, t).map_or(false, |m| m == lambda))
                && pair
                    .s()
                    .generators()
                    .iter()
                    .all(|s| lambda.pushforward(&id, s, s).map_or(false, |m| m == lambda));
            let via_lambda = lambda.integrate_tensor(f1, f2, f3)?;
            let ef1 = conditional_expectation(space, f1, &pair.s().orbit_partition())?;
            let ef2 = conditional_expectation(space, f2, &pair.t().orbit_partition())?;
            let via_factors = integral(space, &ef1.mul(&ef2)?.mul(f3)?)?;
            let gap = (Scalar::to_f64(&via_lambda) - Scalar::to_f64(&via_factors)).abs();
            CheckRow {
                name: "coupling",
                pass: invariant && gap <= 1e-12,
                detail: format!(
                    "pushforwards {}, triple-integral gap {gap:.2e}",
                    if invariant { "exact" } else { "NOT invariant" }
                ),
            }
        }
        Err(e) => check_error("coupling", e),
    });

    // Characteristic projectors.
    rows.push(match wts_subspace(pair) {
        Ok(proj) => {
            let pf = proj.project_ts(f1)?;
            let idem = l2_distance(space, &proj.project_ts(&pf)?, &pf)?;
            let lhs = inner_product(space, &pf, f2)?;
            let rhs = inner_product(space, f1, &proj.project_ts(f2)?)?;
            let adj = (Scalar::to_f64(&lhs) - Scalar::to_f64(&rhs)).abs();
            let op_gap = proj.frobenius_distance()?;
            let residual = l2_norm(space, &proj.residual_ts(&limit)?)?;
            CheckRow {
                name: "projector",
                pass: idem <= 1e-9 && adj <= 1e-9 && op_gap <= 1e-9 && residual <= 1e-9,
                detail: format!(
                    "dim {}, idempotency {idem:.2e}, self-adjointness {adj:.2e}, ‖P − Q‖ ≤ {op_gap:.2e}, limit residual {residual:.2e}",
                    proj.dim_ts()
                ),
            }
        }
        Err(e) => check_error("projector", e),
    });

    // Constancy verdict (either outcome is valid; the run must succeed).
    rows.push(match constancy_check(pair, 16, seed) {
        Ok(ConstancyReport::Constant {
            tt_orbits,
            ss_orbits,
            trials,
            max_spread,
        }) => CheckRow {
            name: "constancy",
            pass: true,
            detail: format!(
                "constant: product orbits ({tt_orbits}, {ss_orbits}), {trials} trials, max spread {max_spread:.2e}"
            ),
        },
        Ok(ConstancyReport::NonConstant {
            tt_orbits,
            ss_orbits,
            spread,
            ..
        }) => CheckRow {
            name: "constancy",
            pass: true,
            detail: format!(
                "non-constant witness found: product orbits ({tt_orbits}, {ss_orbits}), spread {spread:.3}"
            ),
        },
        Err(e) => check_error("constancy", e),
    });

    // Recurrence bounds for every nonnegative named observable.
    for (name, f) in &system.observables {
        if !f.values().iter().all(|v| v.is_nonneg_real()) {
            continue;
        }
        let row = match (
            four_term_bound(pair, f, &system.seq_t, &system.seq_s),
            khintchine_bound(pair.t(), f, &system.seq_t),
        ) {
            (Ok((fl, fr)), Ok((kl, kr))) => {
                let four_pass = Scalar::to_f64(&fl) >= Scalar::to_f64(&fr) - 1e-12;
                let single_pass = Scalar::to_f64(&kl) >= Scalar::to_f64(&kr) - 1e-12;
                CheckRow {
                    name: "bounds",
                    pass: four_pass && single_pass,
                    detail: format!(
                        "{name}: four-term {} ≥ {}, single {} ≥ {}",
                        fl.repr(),
                        fr.repr(),
                        kl.repr(),
                        kr.repr()
                    ),
                }
            }
            (Err(e), _) | (_, Err(e)) => check_error("bounds", e),
        };
        rows.push(row);
    }
    let compute_ms = ms(t_compute);

    let all_pass = rows.iter().all(|r| r.pass);
    let mut csv = vec![vec![
        "check".to_string(),
        "pass".to_string(),
        "detail".to_string(),
    ]];
    for row in &rows {
        csv.push(vec![
            row.name.to_string(),
            row.pass.to_string(),
            row.detail.replace(',', ";"),
        ]);
    }
    let report = RunReport {
        body: json!({
            "command": "check",
            "inputs_digest": digest,
            "mode": S::MODE,
            "seed": seed,
            "all_pass": all_pass,
            "checks": rows
                .iter()
                .map(|r| json!({"name": r.name, "pass": r.pass, "detail": r.detail}))
                .collect::<Vec<_>>(),
        }),
        csv,
        timings: vec![("load".into(), load_ms), ("compute".into(), compute_ms)],
    };
    Ok((report, !all_pass))
}
