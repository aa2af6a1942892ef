//! One runner per command. Each returns a JSON report and the CSV tables to write beside it.

use std::path::Path;
use std::sync::Arc;

use eigenstaf::bundled::{self, BundledMatrix};
use eigenstaf::cocycle::{
    class_defect, equivariance_defect, semiconjugacy_residual, series_tail_bound, solve_cmap_contraction,
    solve_cmap_series, SeriesMode, TorusMapLift,
};
use eigenstaf::functional::{
    bounded_variation_verdict, eigen_distribution_check, pair_with, variation_scan, GridFunction, PairOptions, Verdict,
};
use eigenstaf::leaf::{ChartSpec, CumulativeFunction};
use eigenstaf::regularity::{
    adic_scales, holder_exponent_estimate, non_monotone_triples, steepness_scan, variation_growth, SampledFunction,
};
use eigenstaf::sft::ShiftSpace;
use eigenstaf::spectra::{classify_spectrum, compute_spectrum, MatrixSpec, SpectralData, TransitionMatrix};
use eigenstaf::staf::{Staf, StafKind, DEFAULT_MAX_DEPTH};
use eigenstaf::verify::{run_checks, SuiteOptions};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::CliError;

/// Relative decay required along greedy chains by the atom test.
const ATOM_TOL: f64 = 1e-2;

pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub report: Value,
    pub tables: Vec<Table>,
    /// Set when a verification step failed; the artifacts are still written.
    pub failed: bool,
}

fn cx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn num(x: f64) -> String {
    x.to_string()
}

pub fn run(cfg: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Spectrum => spectrum(cfg, base),
        Command::Staf => staf(cfg, base),
        Command::Variation => variation(cfg, base),
        Command::Cdf => cdf(cfg, base),
        Command::Pair => pair(cfg, base),
        Command::Cocycle => cocycle(cfg),
        Command::Regularity => regularity(cfg, base),
        Command::Verify => verify(cfg),
    }
}

fn load_matrix(cfg: &RunConfig, base: &Path) -> Result<TransitionMatrix, CliError> {
    let spec = if let Some(m) = &cfg.matrix {
        m.clone()
    } else if let Some(name) = &cfg.bundle {
        bundle(name)?.matrix().to_spec()
    } else if let Some(p) = &cfg.matrix_path {
        let path = base.join(p);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {}", path.display(), e)))?;
        serde_json::from_str::<MatrixSpec>(&text).map_err(|e| {
            CliError::Config(format!("{}: line {}, column {}: {}", path.display(), e.line(), e.column(), e))
        })?
    } else if let Some(m) = cfg.staf.as_ref().and_then(|s| s.matrix.clone()) {
        m
    } else if let Some(m) = cfg.chart.as_ref().and_then(|c| c.matrix.clone()) {
        m
    } else {
        return Err(CliError::Config("field `matrix`: no matrix given".into()));
    };
    Ok(TransitionMatrix::from_spec(&spec)?)
}

fn bundle(name: &str) -> Result<BundledMatrix, CliError> {
    bundled::by_name(name).ok_or_else(|| {
        CliError::Config(format!("field `bundle`: unknown bundle {:?} (golden, central3, split5)", name))
    })
}

fn load_spectrum(cfg: &RunConfig, base: &Path) -> Result<Arc<SpectralData>, CliError> {
    let a = load_matrix(cfg, base)?;
    Ok(Arc::new(compute_spectrum(&a, cfg.spectral_tol)?))
}

fn build_staf(cfg: &RunConfig, s: &Arc<SpectralData>, depth: usize) -> Result<(Staf, Value), CliError> {
    let spec = cfg.staf.as_ref().ok_or_else(|| CliError::Config("field `staf`: required".into()))?;
    let built = spec.build(s, depth)?;
    let kind = match built.staf.kind() {
        StafKind::Eigen { mu, chain_index } => json!({"type": "eigen", "mu": cx(mu), "chain_index": chain_index}),
        StafKind::Seed => json!({"type": "seed", "projected": built.projected, "residual": built.residual}),
        StafKind::Derived => json!({"type": "derived"}),
    };
    Ok((built.staf, kind))
}

fn eigen_mu(k: &Staf) -> Option<Complex64> {
    match k.kind() {
        StafKind::Eigen { mu, chain_index: 0 } => Some(mu),
        _ => None,
    }
}

fn spectrum(cfg: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    let s = load_spectrum(cfg, base)?;
    let split = classify_spectrum(&s, cfg.spectral_tol);
    let mut eigen = Vec::new();
    let mut rows = Vec::new();
    for e in s.eigenvalues() {
        let lengths: Vec<usize> = s.chains_for(e.value).iter().map(|c| c.vectors.len()).collect();
        eigen.push(json!({
            "value": cx(e.value),
            "modulus": e.value.norm(),
            "multiplicity": e.multiplicity,
            "stability": e.stability,
            "chain_lengths": lengths,
        }));
        rows.push(vec![
            num(e.value.re),
            num(e.value.im),
            num(e.value.norm()),
            e.multiplicity.to_string(),
            format!("{:?}", e.stability).to_lowercase(),
            lengths.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(";"),
        ]);
    }
    let pf = s.pf();
    let report = json!({
        "command": "spectrum",
        "matrix": s.matrix().rows(),
        "dim": s.dim(),
        "primitivity_exponent": s.matrix().primitivity_exponent(),
        "char_poly": s.char_poly().to_string(),
        "char_poly_coefficients": s.char_poly().descending_strings(),
        "lambda": s.lambda(),
        "eigenvalues": eigen,
        "pf": {"right": pf.right.as_slice(), "left": pf.left.as_slice(), "iterations": pf.iterations},
        "subspace_dims": {
            "unstable": split.unstable_basis.len(),
            "central": split.central_basis.len(),
            "stable": split.stable_basis.len(),
            "nilpotent": split.nilpotent_basis.len(),
        },
    });
    Ok(Outcome {
        report,
        tables: vec![Table {
            name: "spectrum.csv",
            header: vec!["re", "im", "modulus", "multiplicity", "stability", "chain_lengths"],
            rows,
        }],
        failed: false,
    })
}

fn staf(cfg: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    let s = load_spectrum(cfg, base)?;
    let depth = cfg.depth.unwrap_or(20);
    let (k, kind) = build_staf(cfg, &s, depth)?;
    let bound = k.exponential_bound();
    let mut rows = Vec::new();
    for (n, level) in k.levels().iter().enumerate() {
        for (j, z) in level.iter().enumerate() {
            rows.push(vec![(n + 1).to_string(), (j + 1).to_string(), num(z.re), num(z.im)]);
        }
    }
    let report = json!({
        "command": "staf",
        "matrix": s.matrix().rows(),
        "kind": kind,
        "levels": k.depth(),
        "requested_depth": depth,
        "seed": k.seed().iter().map(|&z| cx(z)).collect::<Vec<_>>(),
        "exponential_bound": bound,
        "atomless": k.atom_test(depth.min(k.depth() - 1), ATOM_TOL),
        "atom_tol": ATOM_TOL,
    });
    Ok(Outcome {
        report,
        tables: vec![Table {
            name: "staf_levels.csv",
            header: vec!["length", "last_symbol", "re", "im"],
            rows,
        }],
        failed: false,
    })
}

fn variation(cfg: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    let s = load_spectrum(cfg, base)?;
    let max_n = cfg.depth.unwrap_or(30);
    let (k, kind) = build_staf(cfg, &s, max_n)?;
    let scan = variation_scan(&k, max_n)?;
    let verdict = if max_n >= 10 {
        match bounded_variation_verdict(&k, max_n, 1e-6)? {
            Verdict::Bounded => json!({"bounded": true}),
            Verdict::DivergesAtRate(rate) => json!({"bounded": false, "rate": rate}),
        }
    } else {
        Value::Null
    };
    let expected = eigen_mu(&k).map(|mu| s.lambda() / mu.norm());
    let rows = scan
        .iter()
        .enumerate()
        .map(|(n, v)| vec![n.to_string(), num(*v)])
        .collect();
    let report = json!({
        "command": "variation",
        "matrix": s.matrix().rows(),
        "kind": kind,
        "max_depth": max_n,
        "verdict": verdict,
        "expected_rate": expected,
        "last": scan.last(),
    });
    Ok(Outcome {
        report,
        tables: vec![Table {
            name: "variation.csv",
            header: vec!["n", "variation"],
            rows,
        }],
        failed: false,
    })
}

fn cumulative(cfg: &RunConfig, s: &Arc<SpectralData>, depth: usize) -> Result<(CumulativeFunction, Value), CliError> {
    let chart = cfg
        .chart
        .clone()
        .unwrap_or(ChartSpec { matrix: None, base_symbol: 1, ordering: None })
        .build(s)?;
    let (k, kind) = build_staf(cfg, s, depth)?;
    Ok((CumulativeFunction::new(chart, k)?, kind))
}

fn cdf(cfg: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    let s = load_spectrum(cfg, base)?;
    let (h, kind) = cumulative(cfg, &s, cfg.depth.unwrap_or(DEFAULT_MAX_DEPTH))?;
    let points = cfg.points.unwrap_or(1001);
    let graph = h.cdf_grid(points, cfg.tol)?;
    let is_pf = eigen_mu(h.staf()).is_some_and(|mu| (mu - s.lambda()).norm() < cfg.spectral_tol);
    let identity = is_pf.then(|| graph.iter().map(|(x, y)| (y - x).norm()).fold(0.0, f64::max));
    let cert = h.holder_certificate(10.min(h.staf().depth() - 1))?;
    let rows = graph
        .iter()
        .map(|(x, y)| vec![num(*x), num(y.re), num(y.im)])
        .collect();
    let report = json!({
        "command": "cdf",
        "matrix": s.matrix().rows(),
        "kind": kind,
        "base_symbol": h.chart().base_symbol() + 1,
        "interval_length": h.chart().total_length(),
        "points": points,
        "target_error": cfg.tol,
        "holder_exponent": h.holder_exponent(),
        "holder_certificate": cert,
        "exponential_bound": h.bound(),
        "max_identity_deviation": identity,
    });
    Ok(Outcome {
        report,
        tables: vec![Table {
            name: "cdf.csv",
            header: vec!["x", "re", "im"],
            rows,
        }],
        failed: false,
    })
}

fn pair(cfg: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    let s = load_spectrum(cfg, base)?;
    let (k, kind) = build_staf(cfg, &s, DEFAULT_MAX_DEPTH)?;
    let space = ShiftSpace::new(s.matrix().clone(), 2.0)?;
    let depth = cfg.depth.unwrap_or(8).max(2);
    let r2 = k.exponential_bound().r;
    let rho = cfg.rho.unwrap_or((2.0 * s.lambda() / r2).max(2.0));
    let count = cfg.functions.unwrap_or(20);
    let mu = eigen_mu(&k);
    let opts = PairOptions { parallel: cfg.parallel };
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let mut failures = 0;
    let mut worst = 0.0f64;
    for i in 0..count {
        let f = GridFunction::random_holder(&space, depth, rho, &mut rng)?;
        let r = pair_with(&k, &f, cfg.tol, opts)?;
        let mut row = vec![
            i.to_string(),
            num(r.value.re),
            num(r.value.im),
            num(r.error_bound),
            num(r.rounding_bound),
            r.depth_used.to_string(),
        ];
        if let Some(mu) = mu {
            let check = eigen_distribution_check(&k, mu, &f, cfg.tol)?;
            if !check.passes() {
                failures += 1;
            }
            if check.combined_bound > 0.0 {
                worst = worst.max(check.residual / check.combined_bound);
            }
            row.extend([num(check.residual), num(check.combined_bound), check.passes().to_string()]);
        }
        rows.push(row);
    }
    let mut header = vec!["index", "re", "im", "error_bound", "rounding_bound", "depth_used"];
    if mu.is_some() {
        header.extend(["eigen_residual", "combined_bound", "passes"]);
    }
    let report = json!({
        "command": "pair",
        "matrix": s.matrix().rows(),
        "kind": kind,
        "functions": count,
        "function_depth": depth,
        "rho": rho,
        "target_error": cfg.tol,
        "eigen_check": mu.map(|_| json!({"failures": failures, "worst_ratio": worst})),
    });
    Ok(Outcome {
        report,
        tables: vec![Table { name: "pairing.csv", header, rows }],
        failed: failures > 0,
    })
}

fn cocycle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.map.as_ref().ok_or_else(|| CliError::Config("field `map`: required".into()))?;
    let map = TorusMapLift::from_spec(spec)?;
    let mu = map.linear_eigenvalues()[0];
    let phi = map.left_eigenvector(mu)?;
    let sol = solve_cmap_contraction(&map, mu, phi, cfg.tol)?;
    let residual = semiconjugacy_residual(&sol.cmap, &map, mu)?;
    let terms = cfg.series_terms.unwrap_or(40);
    let series = solve_cmap_series(&map, mu, phi, terms, SeriesMode::Grid)?;
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let points: Vec<[f64; 2]> = (0..200).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let shifts: Vec<[i64; 2]> = (0..20).map(|_| [rng.gen_range(-3..=3), rng.gen_range(-3..=3)]).collect();
    let rows = sol
        .steps
        .iter()
        .enumerate()
        .map(|(i, d)| vec![(i + 1).to_string(), num(*d)])
        .collect();
    let report = json!({
        "command": "cocycle",
        "map": spec,
        "mu": cx(mu),
        "phi": [cx(phi[0]), cx(phi[1])],
        "class_defect": class_defect(&map, mu, &phi, None),
        "iterations": sol.iterations,
        "residual": residual,
        "sup_norm": sol.cmap.sup_norm(),
        "series_terms": terms,
        "series_distance": series.sup_distance(&sol.cmap),
        "series_tail_bound": series_tail_bound(mu, map.defect_sup_bound(&phi), terms),
        "equivariance_defect": equivariance_defect(&sol.cmap, &points, &shifts),
        "target_error": cfg.tol,
    });
    Ok(Outcome {
        report,
        tables: vec![Table {
            name: "cocycle_trace.csv",
            header: vec!["iteration", "step"],
            rows,
        }],
        failed: false,
    })
}

fn regularity(cfg: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    let s = load_spectrum(cfg, base)?;
    let depth = cfg.depth.unwrap_or(16);
    let (h, kind) = cumulative(cfg, &s, depth)?;
    let (xs, ys) = h.boundary_samples(depth)?;
    let f = SampledFunction::new(xs, ys, "cumulative function at block endpoints")?;
    let nu = h.holder_exponent();
    let lambda = s.lambda();
    let a = *f.xs().last().expect("nonempty");
    // Keep the smallest window a few block generations above the sample spacing.
    let count = depth.saturating_sub(8).clamp(4, 8);
    let scales = adic_scales(a * lambda.powi(-2), lambda, count);
    let est = holder_exponent_estimate(&f, &scales)?;
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let n = f.len();
    let points: Vec<usize> = (0..1000).map(|_| rng.gen_range(1..n - 1)).collect();
    let windows = adic_scales(a * lambda.powi(-3), lambda, 5);
    let probe = steepness_scan(&f, &points, nu, &windows, 0.0)?;
    let steep = steepness_scan(&f, &points, nu, &windows, 0.01 * probe.median_c)?;
    let depths: Vec<usize> = (4..=12).map(|i| 1usize << i).filter(|&m| m < n).collect();
    let var = variation_growth(&f, 0.0, a, &depths)?;
    let mut tables = vec![
        Table {
            name: "regularity_scales.csv",
            header: vec!["scale", "max_oscillation"],
            rows: est
                .scales
                .iter()
                .zip(&est.oscillations)
                .map(|(w, o)| vec![num(*w), num(*o)])
                .collect(),
        },
        Table {
            name: "regularity_variation.csv",
            header: vec!["subdivisions", "variation"],
            rows: var
                .depths
                .iter()
                .zip(&var.values)
                .map(|(d, v)| vec![d.to_string(), num(*v)])
                .collect(),
        },
    ];
    tables.push(Table {
        name: "regularity_steepness.csv",
        header: vec!["x", "steepness"],
        rows: points
            .iter()
            .zip(&steep.constants)
            .map(|(&i, c)| vec![num(f.xs()[i]), num(*c)])
            .collect(),
    });
    let report = json!({
        "command": "regularity",
        "matrix": s.matrix().rows(),
        "kind": kind,
        "samples": n,
        "nu": nu,
        "holder": {"nu_hat": est.nu_hat, "band": est.band, "scales": est.scales},
        "steepness": {
            "points": steep.points,
            "windows": steep.windows,
            "median": steep.median_c,
            "floor": steep.floor,
            "fraction_positive": steep.fraction_positive,
        },
        "variation": {"fitted_rate": var.fitted_rate, "required": 0.85 * (1.0 - nu)},
        "non_monotone_triples": non_monotone_triples(&f),
    });
    Ok(Outcome { report, tables, failed: false })
}

fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let bundles = match &cfg.bundles {
        Some(names) => names.iter().map(|n| bundle(n)).collect::<Result<Vec<_>, _>>()?,
        None => bundled::all(),
    };
    let opts = SuiteOptions {
        seed: cfg.seed,
        random_functions: cfg.functions.unwrap_or(50),
        ..SuiteOptions::default()
    };
    let results = run_checks(&bundles, opts);
    for r in &results {
        eprintln!("{}", r.line());
    }
    let failed = results.iter().any(|r| !r.passed);
    let rows = results
        .iter()
        .map(|r| vec![r.id.to_string(), r.name.to_string(), r.passed.to_string()])
        .collect();
    let report = json!({
        "command": "verify",
        "bundles": bundles.iter().map(|b| b.name).collect::<Vec<_>>(),
        "seed": cfg.seed,
        "all_passed": !failed,
        "checks": results,
    });
    Ok(Outcome {
        report,
        tables: vec![Table {
            name: "verify.csv",
            header: vec!["id", "name", "passed"],
            rows,
        }],
        failed,
    })
}
