//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails. Set `ACCEPTANCE_SMALL=1` to run the
//! ensemble criteria on 44 graphs instead of 110.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use qaoa_transfer::centers::{optima_distribution, CenterCounts, CenterSet, OptimaDistribution, RatioBasis, DEFAULT_RADIUS};
use qaoa_transfer::energy::{gradient, graph_energy, Objective};
use qaoa_transfer::experiments::commands::donor_acceptor_transfer;
use qaoa_transfer::experiments::ensemble::{analyze, generate_ensemble, EnsembleAnalysis, EnsembleSpec};
use qaoa_transfer::experiments::{run, Command, ExperimentConfig};
use qaoa_transfer::generate::{generate_graph, random_regular};
use qaoa_transfer::graph::{catalog, Graph};
use qaoa_transfer::maxcut::solve_exact;
use qaoa_transfer::metrics::{metric_stats, transfer_map, SimilarityStats};
use qaoa_transfer::optimizer::{optimize, OptimizerConfig};
use qaoa_transfer::simulator::{QaoaParams, Simulator};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let t = start.elapsed();
    check(t <= limit, format!("{detail}, {:.1}s of {}s", t.as_secs_f64(), limit.as_secs()))
}

fn random_graph(rng: &mut StdRng) -> Graph {
    let n = rng.gen_range(2..=16);
    let p = rng.gen_range(0.15..0.8);
    let mut deg = vec![0; n];
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if deg[u] < 6 && deg[v] < 6 && rng.gen_bool(p) {
                deg[u] += 1;
                deg[v] += 1;
                edges.push((u, v));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1));
    }
    Graph::new(n, edges).unwrap()
}

fn random_params(rng: &mut StdRng) -> QaoaParams {
    QaoaParams::new(rng.gen_range(-6.3..6.3), rng.gen_range(-3.2..3.2))
}

fn test_graphs() -> &'static Vec<Graph> {
    static G: OnceLock<Vec<Graph>> = OnceLock::new();
    G.get_or_init(|| {
        let mut rng = StdRng::seed_from_u64(2024);
        (0..200).map(|_| random_graph(&mut rng)).collect()
    })
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let sim = Simulator::new();
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for g in test_graphs() {
        let p = random_params(&mut rng);
        worst = worst.max((graph_energy(g, p) - sim.energy(g, p).unwrap()).abs());
    }
    let outcome = check(worst <= 1e-9, format!("max |lightcone - statevector| = {worst:.2e} over 200 graphs"));
    outcome.and_then(|d| within(Duration::from_secs(60), start, d))
}

fn trivial_points() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for g in test_graphs() {
        let half = g.edge_count() as f64 / 2.0;
        let x = rng.gen_range(-6.3..6.3);
        for p in [QaoaParams::new(0.0, x), QaoaParams::new(x, 0.0), QaoaParams::new(0.0, 0.0)] {
            worst = worst.max((graph_energy(g, p) - half).abs());
        }
    }
    check(worst <= 1e-12, format!("max deviation from |E|/2 = {worst:.2e}"))
}

fn gradient_check() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for g in test_graphs().iter().take(100) {
        let p = random_params(&mut rng);
        let f = |a: f64, b: f64| graph_energy(g, QaoaParams::new(a, b));
        let fd = (
            (f(p.gamma + h, p.beta) - f(p.gamma - h, p.beta)) / (2.0 * h),
            (f(p.gamma, p.beta + h) - f(p.gamma, p.beta - h)) / (2.0 * h),
        );
        let (dg, db) = gradient(g, p);
        let rel = (dg - fd.0).hypot(db - fd.1) / fd.0.hypot(fd.1).max(1e-3);
        worst = worst.max(rel);
    }
    check(worst <= 1e-5, format!("max relative gradient error = {worst:.2e} at 100 points"))
}

fn three_regular_bound() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for k in 0..20u64 {
        let n = 8 + 2 * (k as usize % 5);
        let g = random_regular(n, 3, 300 + k).unwrap();
        let best = optimize(format!("r3-{k}"), &Objective::from_graph(&g), &OptimizerConfig::default().with_seed(k)).unwrap();
        let ratio = best.best().energy / solve_exact(&g).unwrap().value as f64;
        worst = worst.min(ratio);
    }
    let outcome = check(worst >= 0.6924, format!("min energy / MaxCut = {worst:.4} over 20 graphs"));
    outcome.and_then(|d| within(Duration::from_secs(120), start, d))
}

fn catalog_counts() -> Outcome {
    let (a, b) = (catalog(6, false).len(), catalog(8, true).len());
    check(a == 56 && b == 35, format!("catalog(6,false) = {a}, catalog(8,true) = {b}"))
}

fn transfer_map_structure() -> Outcome {
    let start = Instant::now();
    let classes = catalog(6, false);
    let (map, _) = transfer_map(&classes, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
    let odd: Vec<usize> = (0..map.len()).filter(|&k| classes[k].is_odd()).collect();
    let even: Vec<usize> = (0..map.len()).filter(|&k| classes[k].is_even()).collect();
    let m = &map.matrix;
    let (oo, ee) = (m.block_mean(&odd, &odd).unwrap(), m.block_mean(&even, &even).unwrap());
    let (oe, eo) = (m.block_mean(&odd, &even).unwrap(), m.block_mean(&even, &odd).unwrap());
    let margin = oo.min(ee) - oe.max(eo);
    let asym = m.max_asymmetry().0;
    let outcome = check(
        margin >= 0.1 && asym > 0.05,
        format!("odd {oo:.3}, even {ee:.3}, cross {oe:.3}/{eo:.3}, margin {margin:.3}, max asymmetry {asym:.3}"),
    );
    outcome.and_then(|d| within(Duration::from_secs(600), start, d))
}

fn donor_acceptor() -> Outcome {
    let start = Instant::now();
    // (donor even nodes of 6, acceptor even nodes of 64)
    let parities = [(0, 0), (6, 64), (2, 22), (4, 42)];
    let mut reductions = Vec::new();
    for k in 0..10u64 {
        let (de, ae) = parities[k as usize % parities.len()];
        let donor = generate_graph(6, de, 5, 40 + k).map_err(|e| e.to_string())?;
        let acceptor = generate_graph(64, ae, 6, 80 + k).map_err(|e| e.to_string())?;
        let cfg = OptimizerConfig::default().with_seed(k);
        reductions.push(donor_acceptor_transfer(&donor, &acceptor, &cfg).map_err(|e| e.to_string())?.relative_reduction);
    }
    reductions.sort_by(f64::total_cmp);
    let median = (reductions[4] + reductions[5]) / 2.0;
    let outcome = check(median <= 0.05, format!("median relative reduction {:.2}% over 10 pairs", 100.0 * median));
    outcome.and_then(|d| within(Duration::from_secs(300), start, d))
}

struct Ensemble {
    analysis: EnsembleAnalysis,
    stats: SimilarityStats,
    elapsed: Duration,
}

fn ensemble() -> &'static Ensemble {
    static E: OnceLock<Ensemble> = OnceLock::new();
    E.get_or_init(|| {
        let start = Instant::now();
        let mut spec = EnsembleSpec::default();
        if std::env::var_os("ACCEPTANCE_SMALL").is_some() {
            spec.graphs_per_level = 4;
        }
        let cfg = OptimizerConfig::default();
        let analysis = analyze(generate_ensemble(&spec).unwrap(), &cfg).unwrap();
        let (map, _) = transfer_map(&catalog(spec.max_degree, false), &cfg).unwrap();
        let records = analysis.similarity_records(&map, &CenterSet::bundled(), RatioBasis::QaoaOptimum).unwrap();
        let stats = metric_stats(&records).unwrap();
        Ensemble { analysis, stats, elapsed: start.elapsed() }
    })
}

fn parity_heatmap() -> Outcome {
    let e = ensemble();
    let min = e.analysis.min_coefficient();
    let blocks = e.analysis.parity_block_gap(0.2).map_err(|e| e.to_string())?;
    let (same, cross) = (blocks.same().unwrap(), blocks.cross().unwrap());
    let outcome = check(
        min >= 0.57 && same - cross >= 0.1,
        format!("{} graphs, min T {min:.4}, same-parity {same:.3}, cross-parity {cross:.3}", e.analysis.len()),
    );
    let t = e.elapsed;
    outcome.and_then(|d| check(t <= Duration::from_secs(1800), format!("{d}, {:.1}s of 1800s", t.as_secs_f64())))
}

fn universal_concentration() -> Outcome {
    let e = ensemble();
    let mut total = CenterCounts::default();
    for c in e.analysis.center_counts(&CenterSet::bundled(), DEFAULT_RADIUS) {
        total.add(&c);
    }
    let all = total.total();
    let frac = total.universal() as f64 / all as f64;
    check(frac >= 0.5, format!("{} of {all} optima at c1-c2 ({:.1}%)", total.universal(), 100.0 * frac))
}

fn metric_comparison() -> Outcome {
    let s = &ensemble().stats;
    check(
        s.ss.pearson >= 0.70 && s.ps.pearson >= 0.65 && s.sps.pearson >= 0.60 && s.ss.mean_signed_error < 0.0,
        format!(
            "Pearson SS {:.3}, PS {:.3}, SPS {:.3}; mean(SS - T) {:+.4}",
            s.ss.pearson, s.ps.pearson, s.sps.pearson, s.ss.mean_signed_error
        ),
    )
}

fn artifact_hashes(command: &Command, cfg: &ExperimentConfig) -> Result<Vec<(String, String)>, String> {
    let outcome = run(command, cfg).map_err(|e| format!("{}: {e}", command.name()))?;
    Ok(outcome.artifacts.iter().map(|a| (a.name.clone(), a.sha256())).collect())
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let inputs = tmp.path().join("inputs");
    std::fs::create_dir_all(&inputs).map_err(|e| e.to_string())?;
    let donor = generate_graph(6, 2, 5, 1).unwrap();
    let acceptor = generate_graph(18, 8, 5, 2).unwrap();
    donor.write(inputs.join("donor.txt")).unwrap();
    acceptor.write(inputs.join("acceptor.txt")).unwrap();

    let base = ExperimentConfig {
        nodes: 12,
        graphs_per_level: 2,
        restarts: 6,
        iterations: 80,
        donors: 8,
        resolution: 16,
        seed: 3,
        ..Default::default()
    };

    let per_threads = |threads: usize| -> Result<Vec<Vec<(String, String)>>, String> {
        let mut cfg = base.clone();
        cfg.threads = threads;
        cfg.out_dir = tmp.path().join(format!("t{threads}"));
        let ensemble_dir = cfg.out_dir.clone();
        let commands = [
            Command::GenGraphs,
            Command::Landscape { subject: "(3,3,0)".into() },
            Command::TransferMap,
            Command::Transfer { donor: inputs.join("donor.txt"), acceptor: inputs.join("acceptor.txt") },
            Command::EnsembleTransfer { acceptor: inputs.join("acceptor.txt") },
            Command::ParityHeatmap { ensemble: ensemble_dir.clone() },
            Command::SimilarityCompare { ensemble: ensemble_dir },
            Command::MaxCut { graph: inputs.join("acceptor.txt") },
        ];
        commands.iter().map(|c| artifact_hashes(c, &cfg)).collect()
    };
    let (one, two, again) = (per_threads(1)?, per_threads(2)?, per_threads(2)?);
    let files: usize = one.iter().map(Vec::len).sum();
    check(one == two && two == again, format!("8 subcommands, {files} artifacts, identical under --threads 1 and 2"))
}

fn algorithm_plug_ins() -> Outcome {
    let dist = |ars: [f64; 6]| optima_distribution(&ars);
    let d = |n12: f64, n34: f64, n56: f64| OptimaDistribution { n12, n34, n56 };
    let cases = [
        (dist([1.0, 1.0, 1.0, 1.0, 0.5, 0.5]), d(10.0, 10.0, 0.0)),
        (dist([1.0, 1.0, 0.875, 0.875, 0.75, 0.75]), d(15.0, 5.0, 0.0)),
        (dist([1.0, 1.0, 0.7, 0.7, 0.6, 0.6]), d(20.0, 0.0, 0.0)),
    ];
    let exact = cases.iter().all(|(got, want)| got == want);
    let mut rng = StdRng::seed_from_u64(12);
    let totals = (0..10_000).all(|_| {
        let ars: [f64; 6] = std::array::from_fn(|_| rng.gen_range(0.0..1.1));
        (optima_distribution(&ars).total() - 20.0).abs() < 1e-12
    });
    check(exact && totals, format!("plug-in cases exact: {exact}; 10000 random inputs total 20: {totals}"))
}

/// Writes past the test harness's output capture so the verdicts always show.
fn report(line: String) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("oracle equivalence", oracle_equivalence),
        ("trivial points", trivial_points),
        ("gradient check", gradient_check),
        ("3-regular bound", three_regular_bound),
        ("catalog counts", catalog_counts),
        ("transfer-map structure", transfer_map_structure),
        ("donor to acceptor transfer", donor_acceptor),
        ("parity heatmap", parity_heatmap),
        ("universal optima", universal_concentration),
        ("metric comparison", metric_comparison),
        ("determinism", determinism),
        ("optima distribution", algorithm_plug_ins),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => report(format!("PASS {:2} {name}: {detail}", k + 1)),
            Err(detail) => {
                report(format!("FAIL {:2} {name}: {detail}", k + 1));
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
