use crate::error::{exit, CliError, CliResult};
use crate::manifest::RunManifest;
use crate::{read_text, to_json, write_json, write_text};
use crate::{AnalyzeArgs, DiscMode, DiscrepancyArgs, GenerateArgs, SweepArgs, VerifyArgs};
use quasirand::clustering::{
    adjacency_representatives_from, k_variance_of, modularity_representatives_from, KMeansParams,
};
use quasirand::discrepancy::{
    min_k_discrepancy, partition_discrepancy_exact, partition_discrepancy_heuristic, spectral_bounds_from,
    DiscrepancyResult, HeuristicParams, MinKMode, MinKResult, SpectralBounds,
};
use quasirand::generator::{sample, SampleSpec};
use quasirand::numerics::eigh;
use quasirand::spectra::{normalized_modularity_matrix, SpectralParams, SpectralSummary};
use quasirand::verify::{
    check_p0_proxy, check_pi, check_pi_plus, check_pii, check_piii, check_piv, classify_structure, rate_sweep,
    variance_bound_audit, Analysis, BoundAudit, Property, PropertyVerdict, RateMetric, RateReport, Structure,
    Thresholds,
};
use quasirand::{ModelGraph, Partition, WeightedGraph};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn read_graph(path: &Path) -> CliResult<WeightedGraph> {
    Ok(WeightedGraph::parse_edge_list(&read_text(path)?)?)
}

fn read_model(path: &Path) -> CliResult<ModelGraph> {
    Ok(ModelGraph::from_json(&read_text(path)?)?)
}

fn read_partition(path: &Path, n: usize) -> CliResult<Partition> {
    let text = read_text(path)?;
    let p: Partition =
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
    if p.n() != n {
        return Err(CliError::Usage(format!("{}: partition covers {} vertices, graph has {n}", path.display(), p.n())));
    }
    Ok(p)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes the report to `out` (plus its manifest), or prints it.
fn emit<T: Serialize>(report: &T, out: Option<&Path>, manifest: RunManifest) -> CliResult<()> {
    match out {
        Some(path) => {
            write_json(path, report)?;
            manifest.write_next_to(path)?;
        }
        None => print!("{}", to_json(report)),
    }
    Ok(())
}

pub fn generate(a: GenerateArgs, argv: Vec<String>) -> CliResult<()> {
    let model = read_model(&a.model)?;
    let spec = match (&a.fixed_sizes, a.n) {
        (Some(sizes), n) => {
            let spec = SampleSpec::fixed(model, sizes.clone(), a.seed);
            if n.is_some_and(|n| n != spec.n) {
                return Err(CliError::Usage(format!("--n {} disagrees with fixed sizes summing to {}", n.unwrap_or(0), spec.n)));
            }
            spec
        }
        (None, Some(n)) => SampleSpec::multinomial(model, n, a.seed),
        (None, None) => return Err(CliError::Usage("give --n or --fixed-sizes".into())),
    };
    eprintln!("seed: {}", a.seed);
    let s = sample(&spec)?;
    write_text(&a.out, &s.graph.to_edge_list())?;
    let sidecar = with_suffix(&a.out, ".sidecar.json");
    write_json(&sidecar, &s.sidecar())?;
    let mut m = RunManifest::new("generate", argv, a.seed).input(&a.model).param("n", spec.n);
    if let Some(sizes) = &a.fixed_sizes {
        m = m.param("fixed_sizes", sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    }
    m.write_next_to(&a.out)?;
    println!("{} vertices, {} edges -> {}", s.graph.n(), s.graph.edge_count(), a.out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct VarianceReport {
    value: f64,
    partition: Partition,
    warning: Option<String>,
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    n: usize,
    k: usize,
    seed: u64,
    delta: f64,
    c_thr: f64,
    adjacency_threshold: f64,
    adjacency_eigenvalues: Vec<f64>,
    /// Sorted by decreasing magnitude.
    modularity_eigenvalues: Vec<f64>,
    structural_count_adj: usize,
    structural_count_mod: usize,
    largest_gap_adj: Option<usize>,
    plain_kvariance: Option<VarianceReport>,
    weighted_kvariance: Option<VarianceReport>,
    classification: Option<Structure>,
    warnings: Vec<String>,
}

pub fn analyze(a: AnalyzeArgs, argv: Vec<String>) -> CliResult<()> {
    let g = read_graph(&a.graph)?;
    if a.k == 0 || a.k > g.n() {
        return Err(CliError::Usage(format!("need 1 <= k <= n = {}", g.n())));
    }
    eprintln!("seed: {}", a.seed);
    let params = SpectralParams { delta: a.delta, c_thr: a.c_thr };
    let summary = SpectralSummary::compute(&g, params)?;
    let kp = KMeansParams::default();
    let mut warnings = Vec::new();

    let plain = adjacency_representatives_from(&summary.adjacency_eigs, a.k)
        .and_then(|e| k_variance_of(&e, a.k, &kp, a.seed))
        .map(|v| VarianceReport { value: v.value, partition: v.partition, warning: v.warning });
    let weighted_embedding = if a.k >= 2 {
        Some(modularity_representatives_from(&g, &summary.modularity_eigs, a.k))
    } else {
        None
    };
    let weighted = match &weighted_embedding {
        None => Ok(VarianceReport { value: 0.0, partition: Partition::trivial(g.n()), warning: None }),
        Some(e) => e
            .clone()
            .and_then(|e| k_variance_of(&e, a.k, &kp, a.seed))
            .map(|v| VarianceReport { value: v.value, partition: v.partition, warning: v.warning }),
    };
    if let (Some(path), Some(Ok(e))) = (&a.embedding_csv, &weighted_embedding) {
        write_text(path, &e.to_csv())?;
    }
    let mut keep = |r: quasirand::Result<VarianceReport>, what: &str| match r {
        Ok(v) => Some(v),
        Err(e) => {
            warnings.push(format!("{what}: {e}"));
            None
        }
    };
    let plain_kvariance = keep(plain, "plain k-variance");
    let weighted_kvariance = keep(weighted, "weighted k-variance");
    let classification = match classify_structure(&summary.modularity_eigs.values, a.k, a.delta) {
        Ok(s) => Some(s),
        Err(e) => {
            warnings.push(e.to_string());
            None
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let report = AnalyzeReport {
        n: g.n(),
        k: a.k,
        seed: a.seed,
        delta: a.delta,
        c_thr: a.c_thr,
        adjacency_threshold: summary.adjacency_threshold,
        adjacency_eigenvalues: summary.adjacency_eigs.values.clone(),
        modularity_eigenvalues: summary.modularity_eigs.values.clone(),
        structural_count_adj: summary.structural_count_adj,
        structural_count_mod: summary.structural_count_mod,
        largest_gap_adj: summary.largest_gap_adj,
        plain_kvariance,
        weighted_kvariance,
        classification,
        warnings,
    };
    let m = RunManifest::new("analyze", argv, a.seed)
        .input(&a.graph)
        .param("k", a.k)
        .param("delta", a.delta)
        .param("c_thr", a.c_thr);
    if a.out.is_some() {
        eprintln!(
            "structural: {} adjacency, {} modularity; classification: {}",
            report.structural_count_adj,
            report.structural_count_mod,
            report.classification.map_or("none".to_string(), |s| format!("{s:?}").to_lowercase())
        );
    }
    emit(&report, a.out.as_deref(), m)
}

#[derive(Debug, Serialize)]
struct DiscrepancyReport {
    mode: &'static str,
    k: usize,
    value: Option<f64>,
    result: Option<DiscrepancyResult>,
    min_k: Option<MinKResult>,
    bounds: Option<SpectralBounds>,
}

pub fn discrepancy(a: DiscrepancyArgs, argv: Vec<String>) -> CliResult<()> {
    let g = read_graph(&a.graph)?;
    eprintln!("seed: {}", a.seed);
    let mode_name = match a.mode {
        DiscMode::Exact => "exact",
        DiscMode::Heuristic => "heuristic",
        DiscMode::Bounds => "bounds",
    };
    let bounds_for = |p: &Partition| -> CliResult<SpectralBounds> {
        let es = eigh(&normalized_modularity_matrix(&g)?)?;
        Ok(spectral_bounds_from(&g, &es, p.k(), p, a.exception_fraction)?)
    };
    let hints = |k: usize| -> CliResult<HeuristicParams> {
        let es = eigh(&normalized_modularity_matrix(&g)?)?;
        Ok(HeuristicParams { hints: (0..k.min(g.n())).map(|i| es.vector(i)).collect(), ..HeuristicParams::default() })
    };
    let report = match (&a.partition, a.min_k) {
        (Some(path), _) => {
            let p = read_partition(path, g.n())?;
            let k = p.k();
            match a.mode {
                DiscMode::Exact => {
                    let r = partition_discrepancy_exact(&g, &p, a.cap)?;
                    DiscrepancyReport { mode: mode_name, k, value: Some(r.value), result: Some(r), min_k: None, bounds: None }
                }
                DiscMode::Heuristic => {
                    let params = match hints(k) {
                        Ok(h) => h,
                        Err(CliError::Core(quasirand::Error::Disconnected | quasirand::Error::ZeroDegree(_))) => {
                            HeuristicParams::default()
                        }
                        Err(e) => return Err(e),
                    };
                    let r = partition_discrepancy_heuristic(&g, &p, a.seed, &params)?;
                    let bounds = bounds_for(&p).ok();
                    DiscrepancyReport { mode: mode_name, k, value: Some(r.value), result: Some(r), min_k: None, bounds }
                }
                DiscMode::Bounds => {
                    DiscrepancyReport { mode: mode_name, k, value: None, result: None, min_k: None, bounds: Some(bounds_for(&p)?) }
                }
            }
        }
        (None, Some(k)) => {
            let mode = match a.mode {
                DiscMode::Exact => MinKMode::Exact,
                DiscMode::Heuristic | DiscMode::Bounds => MinKMode::SpectralSeeded,
            };
            let r = min_k_discrepancy(&g, k, mode, a.budget, a.cap, a.seed)?;
            let bounds = match a.mode {
                DiscMode::Exact => None,
                _ => Some(bounds_for(&r.partition)?),
            };
            DiscrepancyReport { mode: mode_name, k, value: Some(r.value), result: None, min_k: Some(r), bounds }
        }
        (None, None) => return Err(CliError::Usage("give --partition or --min-k".into())),
    };
    let mut m = RunManifest::new("discrepancy", argv, a.seed)
        .input(&a.graph)
        .param("mode", mode_name)
        .param("cap", a.cap)
        .param("budget", a.budget);
    if let Some(p) = &a.partition {
        m = m.input(p);
    }
    if let Some(k) = a.min_k {
        m = m.param("min_k", k);
    }
    emit(&report, a.out.as_deref(), m)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Serialize)]
struct PropertyEntry {
    property: Property,
    status: Status,
    verdict: Option<PropertyVerdict>,
    reason: Option<String>,
}

#[derive(Debug, Serialize)]
struct ImplicationAudit {
    /// Whether PI_plus passed, making the downstream checks expected to pass.
    applicable: bool,
    violations: Vec<String>,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    n: usize,
    k: usize,
    seed: u64,
    thresholds: Thresholds,
    properties: Vec<PropertyEntry>,
    implication_audit: ImplicationAudit,
    bound_audit: Option<BoundAudit>,
    notes: Vec<String>,
}

fn resolve_properties(names: &[String]) -> CliResult<Vec<Property>> {
    let mut wanted = Vec::new();
    for n in names.iter().filter(|n| !n.trim().is_empty()) {
        wanted.push(Property::parse(n)?);
    }
    if wanted.is_empty() {
        return Err(CliError::Usage("no properties requested".into()));
    }
    Ok(Property::ALL.into_iter().filter(|p| wanted.contains(p)).collect())
}

pub fn verify(a: VerifyArgs, argv: Vec<String>) -> CliResult<()> {
    let props = resolve_properties(&a.properties)?;
    let g = read_graph(&a.graph)?;
    let model = a.model.as_deref().map(read_model).transpose()?;
    let partition = a.partition.as_deref().map(|p| read_partition(p, g.n())).transpose()?;
    let th: Thresholds = match &a.thresholds {
        Some(path) => serde_json::from_str(&read_text(path)?)
            .map_err(|source| CliError::Json { path: path.clone(), source })?,
        None => Thresholds::default(),
    };
    let k = a
        .k
        .or(model.as_ref().map(ModelGraph::k))
        .or(partition.as_ref().map(Partition::k))
        .ok_or_else(|| CliError::Usage("give --k, --model or --partition".into()))?;
    if let Some(m) = &model {
        if m.k() != k {
            return Err(CliError::Usage(format!("model has {} classes but k = {k}", m.k())));
        }
    }
    if let Some(p) = &partition {
        if p.k() != k {
            return Err(CliError::Usage(format!("partition has {} classes but k = {k}", p.k())));
        }
    }
    eprintln!("seed: {}", a.seed);
    let an = Analysis::new(&g, a.seed)?;
    let mut notes = vec![
        "P0_proxy is a finite proxy for graphon convergence, not a test of it".to_string(),
        "PI and PI_plus are reported separately; neither is claimed equivalent to P0".to_string(),
    ];
    let fallback = || -> quasirand::Result<Partition> { Ok(an.weighted_variance(k)?.1) };

    let mut entries = Vec::new();
    for &prop in &props {
        let outcome: quasirand::Result<Option<PropertyVerdict>> = match prop {
            Property::PI => check_pi(&an, k, &th).map(Some),
            Property::PIPlus => model.as_ref().map(|m| check_pi_plus(&an, k, m, &th)).transpose(),
            Property::PII => check_pii(&an, k, &th).map(Some),
            Property::PIII => match &partition {
                Some(p) => check_piii(&an, p, &th, a.budget).map(Some),
                None => fallback().and_then(|p| {
                    let mut v = check_piii(&an, &p, &th, a.budget)?;
                    v.notes.push("ran on the variance-minimizing partition".into());
                    Ok(Some(v))
                }),
            },
            Property::PIV => match &partition {
                Some(p) => check_piv(&an, p, model.as_ref().map(ModelGraph::p_matrix), &th).map(Some),
                None => fallback().and_then(|p| {
                    let mut v = check_piv(&an, &p, None, &th)?;
                    v.notes.push("no partition given: ran on the variance-minimizing partition".into());
                    Ok(Some(v))
                }),
            },
            Property::P0Proxy => model.as_ref().map(|m| check_p0_proxy(&an, m, &th)).transpose(),
        };
        entries.push(match outcome {
            Ok(Some(v)) => PropertyEntry {
                property: prop,
                status: if v.pass { Status::Pass } else { Status::Fail },
                verdict: Some(v),
                reason: None,
            },
            Ok(None) => PropertyEntry { property: prop, status: Status::Skipped, verdict: None, reason: Some("needs --model".into()) },
            Err(e) => PropertyEntry { property: prop, status: Status::Skipped, verdict: None, reason: Some(e.to_string()) },
        });
    }

    let passed = |p: Property| entries.iter().any(|e| e.property == p && matches!(e.status, Status::Pass));
    let failed = |p: Property| entries.iter().any(|e| e.property == p && matches!(e.status, Status::Fail));
    let applicable = passed(Property::PIPlus);
    let violations = if applicable {
        [Property::PII, Property::PIII]
            .into_iter()
            .filter(|&p| failed(p))
            .map(|p| format!("PI_plus passed but {} failed: threshold calibration failure", p.name()))
            .collect()
    } else {
        Vec::new()
    };
    let bound_audit = if a.audit {
        match variance_bound_audit(&an, k, &th) {
            Ok(b) => Some(b),
            Err(e) => {
                notes.push(format!("bound audit skipped: {e}"));
                None
            }
        }
    } else {
        None
    };

    let first_failure = entries
        .iter()
        .find(|e| matches!(e.status, Status::Fail))
        .map(|e| (e.property, Property::ALL.iter().position(|&p| p == e.property).unwrap_or(0)));
    print!("{}", summary_table(&entries));
    let report = VerifyReport {
        n: g.n(),
        k,
        seed: a.seed,
        thresholds: th,
        properties: entries,
        implication_audit: ImplicationAudit { applicable, violations },
        bound_audit,
        notes: std::mem::take(&mut notes),
    };
    let mut m = RunManifest::new("verify", argv, a.seed)
        .input(&a.graph)
        .param("k", k)
        .param("properties", props.iter().map(|p| p.name()).collect::<Vec<_>>().join(","));
    for p in [&a.model, &a.partition, &a.thresholds].into_iter().flatten() {
        m = m.input(p);
    }
    match &a.out {
        Some(path) => {
            write_json(path, &report)?;
            m.write_next_to(path)?;
        }
        None => eprint!("{}", to_json(&report)),
    }
    match first_failure {
        Some((p, idx)) => Err(CliError::VerifyFailed(p.name().to_string(), exit::VERIFY_BASE + idx as i32)),
        None => Ok(()),
    }
}

fn summary_table(entries: &[PropertyEntry]) -> String {
    let mut s = format!("{:<10} {:<8} {}\n", "property", "status", "detail");
    for e in entries {
        let status = match e.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skipped",
        };
        let detail = match (&e.verdict, &e.reason) {
            (Some(v), _) => v
                .metrics
                .iter()
                .take(4)
                .map(|(k, x)| format!("{k}={x:.4}"))
                .collect::<Vec<_>>()
                .join(" "),
            (None, Some(r)) => r.clone(),
            (None, None) => String::new(),
        };
        let _ = writeln!(s, "{:<10} {:<8} {}", e.property.name(), status, detail);
    }
    s
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Usage(format!("bad {what} `{t}`"))))
        .collect()
}

fn parse_seeds(s: &str) -> CliResult<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| CliError::Usage(format!("bad seed range `{s}`")))?;
        let b: u64 = b.trim().parse().map_err(|_| CliError::Usage(format!("bad seed range `{s}`")))?;
        return Ok((a..b).collect());
    }
    parse_list(s, "seed")
}

#[derive(Debug, Serialize)]
struct SlopeSummary {
    metric: RateMetric,
    sizes: Vec<usize>,
    means: Vec<f64>,
    slope: f64,
    target: f64,
    band: f64,
    within_band: bool,
    decreasing: bool,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    sizes: Vec<usize>,
    seeds: Vec<u64>,
    band: f64,
    metrics: Vec<SlopeSummary>,
}

pub fn sweep(a: SweepArgs, argv: Vec<String>) -> CliResult<()> {
    let model = read_model(&a.model)?;
    let sizes: Vec<usize> = parse_list(&a.sizes, "size")?;
    let seeds = parse_seeds(&a.seeds)?;
    let metrics: Vec<RateMetric> = a.metrics.split(',').filter(|t| !t.trim().is_empty()).map(RateMetric::parse).collect::<Result<_, _>>()?;
    if metrics.is_empty() {
        return Err(CliError::Usage("no metrics requested".into()));
    }
    let mut reports: Vec<RateReport> = Vec::new();
    for &metric in &metrics {
        reports.push(rate_sweep(&model, &sizes, &seeds, metric, a.band)?);
    }
    let mut csv = String::from("n,seed,metric,value\n");
    for r in &reports {
        for row in &r.rows {
            let _ = writeln!(csv, "{},{},{},{}", row.n, row.seed, r.metric.name(), row.value);
        }
    }
    write_text(&a.out_csv, &csv)?;
    let summary = SweepSummary {
        sizes: reports[0].sizes.clone(),
        seeds: seeds.clone(),
        band: a.band,
        metrics: reports
            .iter()
            .map(|r| SlopeSummary {
                metric: r.metric,
                sizes: r.sizes.clone(),
                means: r.means.clone(),
                slope: r.slope,
                target: r.target,
                band: r.band,
                within_band: r.within_band,
                decreasing: r.decreasing,
            })
            .collect(),
    };
    let summary_path = a.summary.clone().unwrap_or_else(|| with_suffix(&a.out_csv, ".summary.json"));
    write_json(&summary_path, &summary)?;
    if let Some(p) = &a.plot {
        write_text(p, &crate::plot::sweep_svg(&reports))?;
    }
    for s in &summary.metrics {
        println!(
            "{:<24} slope {:>8.4}  target {:>5}  {}",
            s.metric.name(),
            s.slope,
            s.target,
            if s.within_band { "within band" } else { "OUTSIDE band" }
        );
    }
    RunManifest::new("sweep", argv, seeds.first().copied().unwrap_or(0))
        .input(&a.model)
        .param("sizes", &a.sizes)
        .param("seeds", &a.seeds)
        .param("metrics", &a.metrics)
        .param("band", a.band)
        .write_next_to(&a.out_csv)?;
    Ok(())
}
