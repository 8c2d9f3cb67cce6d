//! One runner per subcommand. Runners return artifacts in memory;
//! [`run`] handles the thread pool, the cache and the manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::centers::CenterSet;
use crate::energy::{landscape, Objective, Subject};
use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::ensemble::{analyze, generate_slots, EnsembleAnalysis, EnsembleMember, EnsembleSpec};
use crate::experiments::manifest::{sha256_hex, write_run, Artifact, ResultCache};
use crate::generate::generate_graph;
use crate::graph::{catalog, parity, Graph, LightconeClass};
use crate::maxcut::{solve_exact, solve_heuristic, CutResult, BRANCH_AND_BOUND_CAP};
use crate::metrics::{metric_stats, transfer_coefficient, transfer_map, TransferRecord};
use crate::optimizer::{optimize, OptimaSet, OptimizerConfig, Optimum};
use crate::rng::derive_seed;

const DONOR_STREAM: u64 = 10;
const ACCEPTOR_STREAM: u64 = 11;
const DONOR_GRAPH_STREAM: u64 = 12;
const MAXCUT_STREAM: u64 = 13;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    GenGraphs,
    /// A class label such as `(3,3,0)` or a graph file.
    Landscape { subject: String },
    TransferMap,
    Transfer { donor: PathBuf, acceptor: PathBuf },
    EnsembleTransfer { acceptor: PathBuf },
    ParityHeatmap { ensemble: PathBuf },
    SimilarityCompare { ensemble: PathBuf },
    MaxCut { graph: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenGraphs => "gen-graphs",
            Command::Landscape { .. } => "landscape",
            Command::TransferMap => "transfer-map",
            Command::Transfer { .. } => "transfer",
            Command::EnsembleTransfer { .. } => "ensemble-transfer",
            Command::ParityHeatmap { .. } => "parity-heatmap",
            Command::SimilarityCompare { .. } => "similarity-compare",
            Command::MaxCut { .. } => "maxcut",
        }
    }

    /// Input contents that the output depends on, for the cache key.
    fn inputs(&self, cfg: &ExperimentConfig) -> Result<Vec<String>> {
        let mut inputs = match self {
            Command::GenGraphs | Command::TransferMap => vec![],
            Command::Landscape { subject } => {
                if subject.trim_start().starts_with('(') {
                    vec![subject.clone()]
                } else {
                    vec![read_text(Path::new(subject))?]
                }
            }
            Command::Transfer { donor, acceptor } => vec![read_text(donor)?, read_text(acceptor)?],
            Command::EnsembleTransfer { acceptor } => vec![read_text(acceptor)?],
            Command::MaxCut { graph } => vec![read_text(graph)?],
            Command::ParityHeatmap { ensemble } | Command::SimilarityCompare { ensemble } => {
                load_ensemble(ensemble)?.1.iter().map(|m| m.graph.to_text()).collect()
            }
        };
        if matches!(self, Command::SimilarityCompare { .. }) {
            inputs.push(load_centers(cfg)?.to_json());
        }
        Ok(inputs)
    }

    pub fn execute(&self, cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
        match self {
            Command::GenGraphs => gen_graphs(cfg),
            Command::Landscape { subject } => landscape_cmd(cfg, subject),
            Command::TransferMap => transfer_map_cmd(cfg),
            Command::Transfer { donor, acceptor } => transfer_cmd(cfg, &Graph::read(donor)?, &Graph::read(acceptor)?),
            Command::EnsembleTransfer { acceptor } => ensemble_transfer_cmd(cfg, &Graph::read(acceptor)?),
            Command::ParityHeatmap { ensemble } => parity_heatmap_cmd(cfg, ensemble),
            Command::SimilarityCompare { ensemble } => similarity_compare_cmd(cfg, ensemble),
            Command::MaxCut { graph } => maxcut_cmd(cfg, &Graph::read(graph)?),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: PathBuf,
    pub artifacts: Vec<Artifact>,
    pub cache_hit: bool,
}

/// Executes `command` on a pool of `cfg.threads` workers, consulting the
/// cache when `cfg.cache_dir` is set, and writes artifacts plus manifest
/// under `cfg.out_dir`.
pub fn run(command: &Command, cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let config_hash = cfg.result_hash();
    let (artifacts, cache_hit) = pool.install(|| -> Result<_> {
        let cache = cfg.cache_dir.as_ref().map(ResultCache::new);
        let key = match &cache {
            Some(_) => Some(ResultCache::key(command.name(), &config_hash, &command.inputs(cfg)?)),
            None => None,
        };
        if let (Some(cache), Some(key)) = (&cache, &key) {
            if let Some(hit) = cache.get(key) {
                return Ok((hit, true));
            }
        }
        let artifacts = command.execute(cfg)?;
        if let (Some(cache), Some(key)) = (&cache, &key) {
            cache.put(key, &artifacts)?;
        }
        Ok((artifacts, false))
    })?;
    let manifest = write_run(
        &cfg.out_dir,
        command.name(),
        &config_hash,
        serde_json::to_value(cfg)?,
        &artifacts,
        cache_hit,
        start.elapsed(),
    )?;
    Ok(RunOutcome {
        manifest,
        artifacts,
        cache_hit,
    })
}

fn jsonl<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(&r)?);
        out.push('\n');
    }
    Ok(out)
}

fn pretty(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub const ENSEMBLE_INDEX: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub even_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleIndex {
    pub spec: EnsembleSpec,
    pub graphs: Vec<IndexEntry>,
}

pub fn gen_graphs(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let spec = cfg.ensemble();
    let slots = generate_slots(&spec)?;
    let mut artifacts = Vec::new();
    let mut entries = Vec::new();
    for (id, outcome) in slots {
        match outcome {
            Ok(m) => {
                let file = format!("graphs/{id}.txt");
                let text = m.graph.to_text();
                entries.push(IndexEntry {
                    id,
                    status: "ok".into(),
                    file: Some(file.clone()),
                    level: Some(m.level),
                    even_nodes: Some(m.even_nodes),
                    seed: Some(m.seed),
                    edges: Some(m.graph.edge_count()),
                    parity: Some(parity(&m.graph)),
                    sha256: Some(sha256_hex(text.as_bytes())),
                    error: None,
                });
                artifacts.push(Artifact::new(file, text));
            }
            Err(e @ (Error::Infeasible(_) | Error::Config(_))) => entries.push(IndexEntry {
                id,
                status: "infeasible".into(),
                file: None,
                level: None,
                even_nodes: None,
                seed: None,
                edges: None,
                parity: None,
                sha256: None,
                error: Some(e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    if artifacts.is_empty() {
        return Err(Error::Infeasible("no ensemble slot could be generated".into()));
    }
    artifacts.push(Artifact::new(ENSEMBLE_INDEX, pretty(&EnsembleIndex { spec, graphs: entries })?));
    Ok(artifacts)
}

/// Reads an ensemble written by `gen-graphs`, skipping infeasible slots.
pub fn load_ensemble(dir: &Path) -> Result<(EnsembleSpec, Vec<EnsembleMember>)> {
    let index: EnsembleIndex = serde_json::from_str(&read_text(&dir.join(ENSEMBLE_INDEX))?)?;
    let mut members = Vec::new();
    for e in index.graphs.iter().filter(|e| e.status == "ok") {
        let missing = |what: &str| Error::Config(format!("index entry {} lacks {what}", e.id));
        let file = e.file.as_ref().ok_or_else(|| missing("file"))?;
        members.push(EnsembleMember {
            id: e.id.clone(),
            level: e.level.ok_or_else(|| missing("level"))?,
            even_nodes: e.even_nodes.ok_or_else(|| missing("even_nodes"))?,
            seed: e.seed.ok_or_else(|| missing("seed"))?,
            graph: Graph::read(dir.join(file))?,
        });
    }
    if members.is_empty() {
        return Err(Error::Config(format!("{} lists no graphs", dir.display())));
    }
    Ok((index.spec, members))
}

pub fn load_centers(cfg: &ExperimentConfig) -> Result<CenterSet> {
    match &cfg.centers {
        Some(path) => CenterSet::read(path),
        None => Ok(CenterSet::bundled()),
    }
}

fn parse_subject(subject: &str) -> Result<Subject> {
    if subject.trim_start().starts_with('(') {
        Ok(Subject::Class(subject.parse::<LightconeClass>()?))
    } else {
        Ok(Subject::Graph(Graph::read(subject)?))
    }
}

pub fn landscape_cmd(cfg: &ExperimentConfig, subject: &str) -> Result<Vec<Artifact>> {
    let subject = parse_subject(subject)?;
    let land = landscape(&subject, cfg.resolution, cfg.resolution);
    let (bi, gi) = land.argmax();
    let summary = json!({
        "subject": subject.id(),
        "resolution": cfg.resolution,
        "max": land.max(),
        "min": land.min(),
        "argmax": {"gamma": land.gamma_grid[gi], "beta": land.beta_grid[bi]},
        "upper_bound": subject.max_energy(),
        "local_maxima": land.local_maxima().iter().map(|p| json!({"gamma": p.gamma, "beta": p.beta})).collect::<Vec<_>>(),
    });
    Ok(vec![
        Artifact::new("landscape.csv", land.to_csv()),
        Artifact::new("landscape_summary.json", pretty(&summary)?),
    ])
}

#[derive(Serialize)]
struct OptimaRow<'a> {
    subject: &'a str,
    best_index: usize,
    optima: &'a [Optimum],
}

fn optima_rows(sets: &[OptimaSet]) -> Result<String> {
    jsonl(sets.iter().map(|s| OptimaRow {
        subject: &s.subject,
        best_index: s.best_index,
        optima: &s.optima,
    }))
}

pub fn transfer_map_cmd(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let classes = catalog(cfg.catalog_max_degree, cfg.regular_only);
    let (map, optima) = transfer_map(&classes, &cfg.optimizer())?;
    Ok(vec![
        Artifact::new("transfer_map.csv", map.to_csv()),
        Artifact::new("class_optima.jsonl", optima_rows(&optima)?),
    ])
}

/// Donor-to-acceptor transfer summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub record: TransferRecord,
    pub donor_best: Optimum,
    pub acceptor_best: Optimum,
    /// Acceptor energy at the donor's best parameters.
    pub transferred_energy: f64,
    /// `transferred_energy / acceptor_best.energy`.
    pub energy_ratio: f64,
    /// `1 - energy_ratio`: the relative drop in approximation ratio, which
    /// does not depend on the classical optimum.
    pub relative_reduction: f64,
    /// Exact acceptor cut, when the acceptor is small enough.
    pub denominator: Option<usize>,
    pub native_ratio: Option<f64>,
    pub transferred_ratio: Option<f64>,
}

/// Optimizes both graphs with independent seeds and evaluates the acceptor
/// at the donor's optima. Identical graphs share one optimization.
pub fn donor_acceptor_transfer(donor: &Graph, acceptor: &Graph, cfg: &OptimizerConfig) -> Result<TransferReport> {
    let (dobj, aobj) = (Objective::from_graph(donor), Objective::from_graph(acceptor));
    let dset = optimize(
        donor.content_hash(),
        &dobj,
        &cfg.clone().with_seed(derive_seed(cfg.seed, DONOR_STREAM, 0)),
    )?;
    let aset = if donor.content_hash() == acceptor.content_hash() {
        dset.clone()
    } else {
        optimize(
            acceptor.content_hash(),
            &aobj,
            &cfg.clone().with_seed(derive_seed(cfg.seed, ACCEPTOR_STREAM, 0)),
        )?
    };
    let record = transfer_coefficient(&dset, &aset, &aobj)?;
    let transferred_energy = aobj.energy(dset.best().params());
    let native = aset.best().energy;
    let denominator = if acceptor.node_count() <= BRANCH_AND_BOUND_CAP {
        Some(solve_exact(acceptor)?.value)
    } else {
        None
    };
    let ratio = |e: f64| denominator.filter(|&d| d > 0).map(|d| e / d as f64);
    Ok(TransferReport {
        record,
        donor_best: *dset.best(),
        acceptor_best: *aset.best(),
        transferred_energy,
        energy_ratio: transferred_energy / native,
        relative_reduction: 1.0 - transferred_energy / native,
        denominator,
        native_ratio: ratio(native),
        transferred_ratio: ratio(transferred_energy),
    })
}

pub fn transfer_cmd(cfg: &ExperimentConfig, donor: &Graph, acceptor: &Graph) -> Result<Vec<Artifact>> {
    let report = donor_acceptor_transfer(donor, acceptor, &cfg.optimizer())?;
    Ok(vec![Artifact::new("transfer.json", pretty(&report)?)])
}

/// The `k`-th donor of an ensemble-transfer run: sizes cycle through
/// `[min, max]`, and within each size the even-node count cycles through the
/// feasible values.
pub fn ensemble_donor(cfg: &ExperimentConfig, k: usize) -> Result<Graph> {
    let span = cfg.donor_max_nodes - cfg.donor_min_nodes + 1;
    let n = cfg.donor_min_nodes + k % span;
    let evens: Vec<usize> = (0..=n).filter(|e| (n - e).is_multiple_of(2)).collect();
    let even = evens[(k / span) % evens.len()];
    let cap = cfg.max_degree.min(n - 1);
    let mut last = None;
    for attempt in 0..8u64 {
        match generate_graph(n, even, cap, derive_seed(cfg.seed, DONOR_GRAPH_STREAM, (k as u64) << 8 | attempt)) {
            Ok(g) => return Ok(g),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTransferRow {
    pub donor: usize,
    pub donor_nodes: usize,
    pub donor_parity: f64,
    pub restart: usize,
    pub gamma: f64,
    pub beta: f64,
    pub acceptor_energy: f64,
    /// Acceptor energy over the acceptor's native best energy.
    pub energy_ratio: f64,
    /// Acceptor energy over the exact cut, when available.
    pub approximation_ratio: Option<f64>,
}

pub fn ensemble_transfer_rows(cfg: &ExperimentConfig, acceptor: &Graph) -> Result<(Vec<EnsembleTransferRow>, Optimum, Option<usize>)> {
    let opt = cfg.optimizer();
    let aobj = Objective::from_graph(acceptor);
    let aset = optimize(
        acceptor.content_hash(),
        &aobj,
        &opt.clone().with_seed(derive_seed(cfg.seed, ACCEPTOR_STREAM, 0)),
    )?;
    let native = *aset.best();
    let exact = if acceptor.node_count() <= BRANCH_AND_BOUND_CAP {
        Some(solve_exact(acceptor)?.value)
    } else {
        None
    };
    let per_donor: Vec<Vec<EnsembleTransferRow>> = (0..cfg.donors)
        .into_par_iter()
        .map(|k| {
            let donor = ensemble_donor(cfg, k)?;
            let dset = optimize(
                format!("donor-{k}"),
                &Objective::from_graph(&donor),
                &opt.clone().with_seed(derive_seed(cfg.seed, DONOR_STREAM, k as u64)),
            )?;
            Ok(dset
                .optima
                .iter()
                .enumerate()
                .map(|(r, o)| {
                    let e = aobj.energy(o.params());
                    EnsembleTransferRow {
                        donor: k,
                        donor_nodes: donor.node_count(),
                        donor_parity: parity(&donor),
                        restart: r,
                        gamma: o.gamma,
                        beta: o.beta,
                        acceptor_energy: e,
                        energy_ratio: e / native.energy,
                        approximation_ratio: exact.filter(|&c| c > 0).map(|c| e / c as f64),
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((per_donor.concat(), native, exact))
}

pub fn ensemble_transfer_cmd(cfg: &ExperimentConfig, acceptor: &Graph) -> Result<Vec<Artifact>> {
    let (rows, native, exact) = ensemble_transfer_rows(cfg, acceptor)?;
    let summary = json!({
        "acceptor": acceptor.content_hash(),
        "acceptor_nodes": acceptor.node_count(),
        "acceptor_parity": parity(acceptor),
        "native_best": native,
        "exact_cut": exact,
        "native_ratio": exact.map(|c| native.energy / c as f64),
        "donors": cfg.donors,
        "rows": rows.len(),
    });
    Ok(vec![
        Artifact::new("ensemble_transfer.jsonl", jsonl(&rows)?),
        Artifact::new("ensemble_transfer_summary.json", pretty(&summary)?),
    ])
}

fn analyze_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<(EnsembleSpec, EnsembleAnalysis)> {
    let (spec, members) = load_ensemble(dir)?;
    Ok((spec, analyze(members, &cfg.optimizer())?))
}

pub fn heatmap_csv(analysis: &EnsembleAnalysis, spec: &EnsembleSpec) -> Result<String> {
    let evens = spec.even_counts()?;
    let labels: Vec<String> = evens.iter().map(|e| format!("{:.2}", *e as f64 / spec.nodes as f64)).collect();
    let mut out = String::from("donor_parity\\acceptor_parity");
    for l in &labels {
        write!(out, ",{l}").unwrap();
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(analysis.heatmap(spec.parity_levels)) {
        out.push_str(l);
        for v in row {
            write!(out, ",{v:.10}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parity_heatmap_cmd(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Artifact>> {
    let (spec, analysis) = analyze_dir(cfg, dir)?;
    let centers = load_centers(cfg)?;
    let counts = analysis.center_counts(&centers, cfg.radius);
    let mut counts_csv = String::from("id,parity,c1,c2,c3,c4,c5,c6,unassigned\n");
    let (mut universal, mut total) = (0, 0);
    for (m, c) in analysis.members.iter().zip(&counts) {
        write!(counts_csv, "{},{:.4}", m.id, m.parity()).unwrap();
        for n in c.counts {
            write!(counts_csv, ",{n}").unwrap();
        }
        writeln!(counts_csv, ",{}", c.unassigned).unwrap();
        universal += c.universal();
        total += c.total();
    }
    let blocks = analysis.parity_block_gap(0.2)?;
    let summary = json!({
        "graphs": analysis.len(),
        "min_coefficient": analysis.min_coefficient(),
        "parity_blocks": blocks,
        "block_gap": blocks.gap(),
        "universal_fraction": universal as f64 / total as f64,
    });
    Ok(vec![
        Artifact::new("heatmap.csv", heatmap_csv(&analysis, &spec)?),
        Artifact::new("transfer_matrix.csv", analysis.transfer.to_csv()),
        Artifact::new("center_counts.csv", counts_csv),
        Artifact::new("graph_optima.jsonl", optima_rows(&analysis.optima)?),
        Artifact::new("heatmap_summary.json", pretty(&summary)?),
    ])
}

pub fn similarity_compare_cmd(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Artifact>> {
    let (_, analysis) = analyze_dir(cfg, dir)?;
    let max_degree = analysis.members.iter().map(|m| m.graph.max_degree()).max().unwrap_or(1);
    let (map, _) = transfer_map(&catalog(max_degree, false), &cfg.optimizer())?;
    let records = analysis.similarity_records(&map, &load_centers(cfg)?, cfg.ratio_basis)?;
    let stats = metric_stats(&records)?;
    Ok(vec![
        Artifact::new("similarity.jsonl", jsonl(&records)?),
        Artifact::new("metric_stats.json", pretty(&stats)?),
    ])
}

pub fn maxcut_cmd(cfg: &ExperimentConfig, g: &Graph) -> Result<Vec<Artifact>> {
    let cut: CutResult = if g.node_count() <= BRANCH_AND_BOUND_CAP {
        solve_exact(g)?
    } else {
        solve_heuristic(g, derive_seed(cfg.seed, MAXCUT_STREAM, 0), cfg.heuristic_effort)
    };
    Ok(vec![Artifact::new("maxcut.json", pretty(&cut.to_json())?)])
}
