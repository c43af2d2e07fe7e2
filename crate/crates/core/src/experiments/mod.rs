//! Batch verbs behind the `lab` tool. A run is a pure function of its
//! [`ExperimentConfig`] and the code version; it yields named result files
//! and a list of failed row-level assertions.

mod scan;

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use scan::{run_scan, ScanConfig, ScanOutput, ScanRow, SkippedRow, SlopeFit};

use crate::arrays::{graph_depth, DescDocument, DEFAULT_SIZE_CAP};
use crate::bounds::{collapse, pullback_energy_check, witness_certificate, ENERGY_FACTOR};
use crate::bounds::{torus_report, upper_bound_generalized, TorusConstants};
use crate::error::{DescError, ExperimentError, ParseError};
use crate::graph::{degree_histogram, Graph, VertexFunction};
use crate::report::{hash_of, to_sorted_json, CODE_VERSION};
use crate::spectral::{
    lambda1_dense, lambda1_iterative_with, IterativeOptions, SpectralReport, DEFAULT_SEED,
    DEFAULT_TOL, AUTO_DENSE_MAX,
};
use crate::walks::{pattern_density, run_walks, tree_drift, TrialRow, WalkConfig, Word};

/// Slack below `lambda_1` tolerated for a certificate's achieved quotient.
pub const CERTIFICATE_SLACK: f64 = 1e-9;
/// Slack of the eigenvalue comparison after a collapse.
pub const COLLAPSE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Build,
    Spectrum,
    Certify,
    Collapse,
    Scan,
    Walk,
    TorusReport,
}

impl Verb {
    pub const ALL: [Verb; 7] = [
        Verb::Build,
        Verb::Spectrum,
        Verb::Certify,
        Verb::Collapse,
        Verb::Scan,
        Verb::Walk,
        Verb::TorusReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verb::Build => "build",
            Verb::Spectrum => "spectrum",
            Verb::Certify => "certify",
            Verb::Collapse => "collapse",
            Verb::Scan => "scan",
            Verb::Walk => "walk",
            Verb::TorusReport => "torus-report",
        }
    }

    fn needs_graph(self) -> bool {
        matches!(self, Verb::Build | Verb::Spectrum | Verb::Certify | Verb::Collapse)
    }
}

impl FromStr for Verb {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Verb::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown verb {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    /// Dense for small graphs, iterative beyond.
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub choice: SolverChoice,
    pub tol: f64,
    pub seed: u64,
    pub max_basis: usize,
    pub max_matvecs: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let it = IterativeOptions::default();
        Self {
            choice: SolverChoice::Auto,
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
            max_basis: it.max_basis,
            max_matvecs: it.max_matvecs,
        }
    }
}

impl SolverConfig {
    pub fn solve(&self, g: &Graph) -> Result<SpectralReport, ExperimentError> {
        let iterative = || {
            lambda1_iterative_with(
                g,
                IterativeOptions {
                    tol: self.tol,
                    seed: self.seed,
                    max_basis: self.max_basis,
                    max_matvecs: self.max_matvecs,
                },
            )
        };
        let r = match self.choice {
            SolverChoice::Auto if g.vertex_count() <= AUTO_DENSE_MAX => lambda1_dense(g),
            SolverChoice::Dense => lambda1_dense(g),
            _ => iterative(),
        };
        Ok(r?)
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(ExperimentError::Config(format!("solver tol must be positive, got {}", self.tol)));
        }
        if self.max_basis < 4 {
            return Err(ExperimentError::Config("solver max_basis must be at least 4".into()));
        }
        Ok(())
    }
}

/// Acceptance bands applied to a walk ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkChecks {
    pub drift_band: [f64; 2],
    /// Largest allowed `|tl_ratio_hat - drift_hat|`.
    pub tl_gap: f64,
    /// Half-width of the band around the pattern's stationary density.
    pub density_tol: f64,
    pub hit_rate_min: f64,
    /// Frozen ceiling for the 95th percentile of fellow-travel distances.
    pub fellow_travel_p95_max: f64,
}

impl Default for WalkChecks {
    fn default() -> Self {
        Self {
            drift_band: [0.48, 0.52],
            tl_gap: 0.02,
            density_tol: 0.01,
            hit_rate_min: 0.99,
            fellow_travel_p95_max: FELLOW_TRAVEL_P95_FIXTURE,
        }
    }
}

/// Frozen from the first verified runs at seed 1 and 200 trials: the 95th
/// percentile was 1 at n = 1000 and 0 at n = 2000, 5000 and 20000.
pub const FELLOW_TRAVEL_P95_FIXTURE: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollapseConfig {
    /// Random zero-mean test functions per collapse, besides the eigenvector of `H`.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        Self { samples: 100, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusConfig {
    pub genus: u32,
    pub k: usize,
    pub constants: TorusConstants,
    pub build_graph: bool,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self {
            genus: 2,
            k: 3,
            constants: TorusConstants::illustrative(),
            build_graph: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub verb: Verb,
    /// Graph or description document, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Inline description document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub desc: Option<Value>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Largest edge count any built graph may have.
    #[serde(default = "default_size_cap")]
    pub size_cap: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub walk: WalkConfig,
    #[serde(default)]
    pub walk_checks: WalkChecks,
    #[serde(default)]
    pub collapse: CollapseConfig,
    #[serde(default)]
    pub torus: TorusConfig,
    /// Adds `wall_time` fields. Set from the command line only.
    #[serde(skip)]
    pub timings: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_size_cap() -> u64 {
    DEFAULT_SIZE_CAP as u64
}

impl ExperimentConfig {
    pub fn new(verb: Verb) -> Self {
        Self {
            verb,
            input: None,
            desc: None,
            output_dir: default_output_dir(),
            size_cap: default_size_cap(),
            solver: SolverConfig::default(),
            scan: ScanConfig::default(),
            walk: WalkConfig::default(),
            walk_checks: WalkChecks::default(),
            collapse: CollapseConfig::default(),
            torus: TorusConfig::default(),
            timings: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(text).map_err(ParseError::from_json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.size_cap == 0 {
            return Err(ExperimentError::Config("size_cap must be positive".into()));
        }
        if self.verb.needs_graph() && self.input.is_some() == self.desc.is_some() {
            return Err(ExperimentError::Config(format!(
                "verb {} needs exactly one of `input` and `desc`",
                self.verb.name()
            )));
        }
        self.solver.validate()?;
        self.scan.validate()?;
        self.walk.validate()?;
        if !(self.torus.genus >= 2 && self.torus.k >= 3) {
            return Err(ExperimentError::Config("torus needs genus >= 2 and k >= 3".into()));
        }
        Ok(())
    }

    /// Hash of everything that determines the results; the output location
    /// is left out.
    pub fn hash(&self) -> String {
        let mut key = self.clone();
        key.output_dir = default_output_dir();
        hash_of(&key)
    }

    fn load_graph(&self, base: &Path) -> Result<Graph, ExperimentError> {
        let cap = self.size_cap as u128;
        let g = match (&self.input, &self.desc) {
            (None, Some(v)) => DescDocument::from_document(&v.to_string())?.build(cap)?,
            (Some(p), None) => {
                let path = base.join(p);
                let text = fs::read_to_string(&path).map_err(|source| ExperimentError::Io { path, source })?;
                let v: Value = serde_json::from_str(&text).map_err(ParseError::from_json)?;
                if v.get("desc_kind").is_some() {
                    DescDocument::from_document(&text)?.build(cap)?
                } else {
                    Graph::from_document(&text)?
                }
            }
            _ => {
                return Err(ExperimentError::Config(
                    "exactly one of `input` and `desc` is required".into(),
                ))
            }
        };
        if g.volume() as u128 > cap {
            return Err(DescError::SizeCap { volume: g.volume() as u128, cap }.into());
        }
        Ok(g)
    }
}

/// One result file.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Failed row-level assertions, one line each.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn artifact(&self, name: &str) -> Option<&str> {
        self.artifacts.iter().find(|a| a.name == name).map(|a| a.contents.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), ExperimentError> {
        let io = |path: &Path| {
            let path = path.to_owned();
            move |source| ExperimentError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        for a in &self.artifacts {
            let path = dir.join(&a.name);
            fs::write(&path, &a.contents).map_err(io(&path))?;
        }
        Ok(())
    }
}

struct Envelope<'a> {
    verb: Verb,
    config_hash: &'a str,
}

impl Envelope<'_> {
    fn document(&self, graph_hash: Option<&str>, mut body: Value, failures: &[String]) -> String {
        let obj = body.as_object_mut().expect("document body is an object");
        obj.insert("verb".into(), self.verb.name().into());
        obj.insert("config_hash".into(), self.config_hash.into());
        obj.insert("code_version".into(), CODE_VERSION.into());
        obj.insert("failures".into(), json!(failures));
        if let Some(h) = graph_hash {
            obj.insert("graph_hash".into(), h.into());
        }
        to_sorted_json(&body)
    }
}

fn artifact(name: &str, contents: String) -> Artifact {
    Artifact {
        name: name.into(),
        contents,
    }
}

/// Runs `cfg`. Relative input paths resolve against `base`.
pub fn run(cfg: &ExperimentConfig, base: &Path) -> Result<Outcome, ExperimentError> {
    cfg.validate()?;
    let hash = cfg.hash();
    let env = Envelope {
        verb: cfg.verb,
        config_hash: &hash,
    };
    match cfg.verb {
        Verb::Build => cmd_build(cfg, base, &env),
        Verb::Spectrum => cmd_spectrum(cfg, base, &env),
        Verb::Certify => cmd_certify(cfg, base, &env),
        Verb::Collapse => cmd_collapse(cfg, base, &env),
        Verb::Scan => cmd_scan(cfg, &env),
        Verb::Walk => cmd_walk(cfg, &env),
        Verb::TorusReport => cmd_torus_report(cfg, &env),
    }
}

fn cmd_build(cfg: &ExperimentConfig, base: &Path, env: &Envelope) -> Result<Outcome, ExperimentError> {
    let g = cfg.load_graph(base)?;
    let body = json!({
        "vertex_count": g.vertex_count(),
        "volume": g.volume(),
        "depth": graph_depth(&g).ok(),
        "degree_histogram": degree_histogram(&g),
        "labeled": g.labels().is_some(),
    });
    Ok(Outcome {
        artifacts: vec![
            artifact("graph.json", g.to_document()),
            artifact("build.json", env.document(Some(&g.hash()), body, &[])),
        ],
        failures: vec![],
    })
}

fn cmd_spectrum(cfg: &ExperimentConfig, base: &Path, env: &Envelope) -> Result<Outcome, ExperimentError> {
    let g = cfg.load_graph(base)?;
    let start = Instant::now();
    let r = cfg.solver.solve(&g)?;
    let mut body = json!({
        "lambda1": r.lambda1,
        "residual": r.residual,
        "solver": r.solver,
        "iterations": r.iterations,
        "vertex_count": g.vertex_count(),
        "volume": g.volume(),
    });
    if cfg.timings {
        body["wall_time"] = start.elapsed().as_secs_f64().into();
    }
    Ok(Outcome {
        artifacts: vec![artifact("spectrum.json", env.document(Some(&g.hash()), body, &[]))],
        failures: vec![],
    })
}

fn cmd_certify(cfg: &ExperimentConfig, base: &Path, env: &Envelope) -> Result<Outcome, ExperimentError> {
    let g = cfg.load_graph(base)?;
    let cert = witness_certificate(&g)?;
    let r = cfg.solver.solve(&g)?;
    let mut failures = Vec::new();
    if !cert.holds() {
        failures.push(format!(
            "certificate: achieved {} exceeds the bound {}",
            cert.achieved, cert.quoted_bound
        ));
    }
    if cert.achieved < r.lambda1 - CERTIFICATE_SLACK {
        failures.push(format!(
            "certificate: achieved {} is below lambda1 {}",
            cert.achieved, r.lambda1
        ));
    }
    let body = json!({
        "certificate": cert,
        "lambda1": r.lambda1,
        "residual": r.residual,
    });
    Ok(Outcome {
        artifacts: vec![artifact("certificate.json", env.document(Some(&g.hash()), body, &failures))],
        failures,
    })
}

fn random_zero_mean(rng: &mut ChaCha8Rng, n: usize) -> VertexFunction {
    let mut f = VertexFunction::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    f.center();
    f
}

fn cmd_collapse(cfg: &ExperimentConfig, base: &Path, env: &Envelope) -> Result<Outcome, ExperimentError> {
    let g = cfg.load_graph(base)?;
    let res = collapse(&g)?;
    let rg = cfg.solver.solve(&g)?;
    let rh = cfg.solver.solve(&res.h)?;
    let mut failures = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.collapse.seed);
    let mut tests = vec![rh.eigvec.clone()];
    tests.extend((0..cfg.collapse.samples).map(|_| random_zero_mean(&mut rng, res.h.vertex_count())));
    let mut worst_ratio = 0.0f64;
    let mut pullback_failures = 0usize;
    for (i, f) in tests.iter().enumerate() {
        let c = pullback_energy_check(&g, &res, f)?;
        if c.rhs > 0.0 {
            worst_ratio = worst_ratio.max(c.lhs / c.rhs);
        }
        if !c.ok() {
            pullback_failures += 1;
            failures.push(format!("pullback: test function {i} gives {} > {}", c.lhs, c.rhs));
        }
    }
    if !res.volume_ok() {
        failures.push(format!(
            "volume: ratio {} below the floor {}",
            res.volume_ratio,
            res.volume_floor()
        ));
    }
    let eigen_ok = rg.lambda1 <= ENERGY_FACTOR * rh.lambda1 + COLLAPSE_SLACK;
    if !eigen_ok {
        failures.push(format!("eigenvalue: {} > (4/3) {}", rg.lambda1, rh.lambda1));
    }
    let bound = upper_bound_generalized(g.volume() as u128, res.budget.max(1));
    let bound_ok = rg.lambda1 <= bound;
    if !bound_ok {
        failures.push(format!("bound: lambda1 {} exceeds {}", rg.lambda1, bound));
    }
    let body = json!({
        "psi": res.psi,
        "budget": res.budget,
        "volume_ratio": res.volume_ratio,
        "volume_floor": res.volume_floor(),
        "volume_ok": res.volume_ok(),
        "kept_arcs": res.kept_arcs,
        "erased_blowups": res.erased_blowups,
        "lambda1_g": rg.lambda1,
        "lambda1_h": rh.lambda1,
        "eigen_ok": eigen_ok,
        "generalized_bound": bound,
        "bound_ok": bound_ok,
        "pullback": {
            "tests": tests.len(),
            "failures": pullback_failures,
            "worst_ratio": worst_ratio,
        },
        "collapsed_graph_hash": res.h.hash(),
    });
    Ok(Outcome {
        artifacts: vec![
            artifact("collapse.json", env.document(Some(&g.hash()), body, &failures)),
            artifact("collapsed_graph.json", res.h.to_document()),
        ],
        failures,
    })
}

fn cmd_scan(cfg: &ExperimentConfig, env: &Envelope) -> Result<Outcome, ExperimentError> {
    let out = run_scan(&cfg.scan, &cfg.solver, cfg.size_cap as u128, cfg.timings)?;
    let body = json!({
        "rows": out.rows.len(),
        "skipped": out.skipped,
        "fits": out.fits,
        "product_ranges": out.product_ranges(),
        "bands": cfg.scan.bands,
    });
    Ok(Outcome {
        artifacts: vec![
            artifact("scan.csv", out.rows_csv(cfg.timings)),
            artifact("scan_fit.csv", out.fits_csv()),
            artifact("scan.json", env.document(None, body, &out.failures)),
        ],
        failures: out.failures,
    })
}

/// The walk rows as CSV.
pub fn walk_csv(rows: &[TrialRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

fn cmd_walk(cfg: &ExperimentConfig, env: &Envelope) -> Result<Outcome, ExperimentError> {
    let (stats, rows) = run_walks(&cfg.walk)?;
    let ch = &cfg.walk_checks;
    let density_oracle = pattern_density(&Word::parse(&cfg.walk.pattern)?);
    let mut failures = Vec::new();
    let mut check = |ok: bool, msg: String| {
        if !ok {
            failures.push(msg);
        }
    };
    check(
        ch.drift_band[0] <= stats.drift_hat && stats.drift_hat <= ch.drift_band[1],
        format!("drift_hat {} outside {:?}", stats.drift_hat, ch.drift_band),
    );
    check(
        (stats.tl_ratio_hat - stats.drift_hat).abs() <= ch.tl_gap,
        format!("tl_ratio_hat {} differs from drift_hat {} by more than {}", stats.tl_ratio_hat, stats.drift_hat, ch.tl_gap),
    );
    check(
        (stats.recurrence_density - density_oracle).abs() <= ch.density_tol,
        format!("density {} outside {} +- {}", stats.recurrence_density, density_oracle, ch.density_tol),
    );
    check(
        stats.window_hit_rate >= ch.hit_rate_min,
        format!("window hit rate {} below {}", stats.window_hit_rate, ch.hit_rate_min),
    );
    check(
        stats.fellow_travel_p95 <= ch.fellow_travel_p95_max,
        format!("fellow_travel p95 {} above {}", stats.fellow_travel_p95, ch.fellow_travel_p95_max),
    );
    let body = json!({
        "stats": stats,
        "oracle": {
            "drift": tree_drift(2),
            "pattern_density": density_oracle,
        },
        "checks": ch,
    });
    Ok(Outcome {
        artifacts: vec![
            artifact("walk.csv", walk_csv(&rows)),
            artifact("walk.json", env.document(None, body, &failures)),
        ],
        failures,
    })
}

fn cmd_torus_report(cfg: &ExperimentConfig, env: &Envelope) -> Result<Outcome, ExperimentError> {
    let t = &cfg.torus;
    let report = torus_report(t.genus, t.k, t.constants, t.build_graph, Some(cfg.size_cap as u128))?;
    let body = json!({ "report": report });
    Ok(Outcome {
        artifacts: vec![artifact("torus.json", env.document(None, body, &[]))],
        failures: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inline(desc: Value) -> ExperimentConfig {
        ExperimentConfig {
            desc: Some(desc),
            ..ExperimentConfig::new(Verb::Spectrum)
        }
    }

    fn circle_desc(k: usize) -> Value {
        json!({"version": 1, "desc_kind": "array", "desc": {"base_length": k}})
    }

    #[test]
    fn spectrum_of_a_circle() {
        let out = run(&inline(circle_desc(100)), Path::new(".")).unwrap();
        let doc: Value = serde_json::from_str(out.artifact("spectrum.json").unwrap()).unwrap();
        let lam = doc["lambda1"].as_f64().unwrap();
        let exact = 4.0 * (std::f64::consts::PI / 100.0).sin().powi(2);
        assert!((lam - exact).abs() < 1e-10);
        for key in ["config_hash", "graph_hash", "code_version"] {
            assert!(doc[key].is_string(), "{key}");
        }
    }

    #[test]
    fn certify_optimal_array() {
        let cfg = ExperimentConfig {
            verb: Verb::Certify,
            ..inline(json!({"version": 1, "desc_kind": "optimal", "desc": {"k": 3, "h": 2}}))
        };
        let out = run(&cfg, Path::new(".")).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
        let doc: Value = serde_json::from_str(out.artifact("certificate.json").unwrap()).unwrap();
        let c = &doc["certificate"];
        assert!(c["achieved"].as_f64().unwrap() <= c["quoted_bound"].as_f64().unwrap());
    }

    #[test]
    fn config_errors() {
        let bad = r#"{"verb": "spectrum"}"#;
        assert_eq!(ExperimentConfig::from_json(bad).unwrap_err().exit_code(), 2);
        let unknown = r#"{"verb": "walk", "colour": 1}"#;
        assert!(matches!(ExperimentConfig::from_json(unknown), Err(ExperimentError::Parse(_))));
        let ok = r#"{"verb": "torus-report", "torus": {"genus": 3}}"#;
        assert_eq!(ExperimentConfig::from_json(ok).unwrap().torus.genus, 3);
        assert_eq!("torus-report".parse::<Verb>().unwrap(), Verb::TorusReport);
    }

    #[test]
    fn missing_input_is_an_io_error() {
        let cfg = ExperimentConfig {
            input: Some("nope.json".into()),
            ..ExperimentConfig::new(Verb::Build)
        };
        assert_eq!(run(&cfg, Path::new("/nonexistent")).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = inline(circle_desc(5));
        let b = ExperimentConfig {
            output_dir: "elsewhere".into(),
            ..a.clone()
        };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), inline(circle_desc(6)).hash());
    }

    #[test]
    fn collapse_of_a_blowup() {
        let desc = json!({"version": 1, "desc_kind": "generalized", "desc": {
            "depth": 2, "base_length": 6,
            "actions": {"0": {"blow_up": [{"length": 4, "weight": 1}, {"length": 2, "weight": 1}]}}
        }});
        let cfg = ExperimentConfig {
            verb: Verb::Collapse,
            ..inline(desc)
        };
        let out = match run(&cfg, Path::new(".")) {
            Ok(o) => o,
            Err(e) => panic!("{e}"),
        };
        assert!(out.passed(), "{:?}", out.failures);
        assert!(out.artifact("collapsed_graph.json").is_some());
    }
}
