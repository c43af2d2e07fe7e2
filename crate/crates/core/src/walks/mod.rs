//! Random walks on the free group of rank two, acting on its Cayley tree.
//!
//! The tree is a 0-hyperbolic stand-in for spaces where drift, translation
//! length, fellow-traveling and recurrence are hard to compute; here every
//! quantity is exact. Recurrence to an invariant open set is replaced by
//! occurrences of a fixed pattern along the limit geodesic.

mod bilateral;
mod word;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bilateral::BilateralPath;
pub use word::{
    axis_distances, common_prefix, cyclic_reduce, inverse_letter, push_reduced, reduce, translation_length, Word,
    LETTERS,
};

use crate::error::WalkError;
use crate::numeric::sum;

/// Exact drift of the simple random walk on the 4-regular tree.
pub const UNIFORM_DRIFT: f64 = 0.5;
/// Name of the pseudo-random generator recorded in outputs.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), seed_from_u64(seed), stream = trial";

/// Probabilities of the steps `a, A, b, B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMeasure {
    pub weights: [f64; 4],
}

impl Default for StepMeasure {
    fn default() -> Self {
        Self { weights: [0.25; 4] }
    }
}

impl StepMeasure {
    /// Symmetric (`mu(x) = mu(x^-1)`) with both generators in the support.
    pub fn validate(&self) -> Result<(), WalkError> {
        let w = self.weights;
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(WalkError::BadConfig("step weights must be finite and nonnegative".into()));
        }
        if (w[0] - w[1]).abs() > 1e-12 || (w[2] - w[3]).abs() > 1e-12 {
            return Err(WalkError::BadConfig("step measure must be symmetric".into()));
        }
        if w[0] == 0.0 || w[2] == 0.0 {
            return Err(WalkError::BadConfig("support must generate the group".into()));
        }
        Ok(())
    }

    fn cumulative(&self) -> [f64; 4] {
        let total: f64 = self.weights.iter().sum();
        let mut acc = 0.0;
        let mut out = [0.0; 4];
        for (o, w) in out.iter_mut().zip(self.weights) {
            acc += w / total;
            *o = acc;
        }
        out[3] = 1.0;
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    pub seed: u64,
    pub steps: usize,
    pub trials: usize,
    #[serde(default)]
    pub measure: StepMeasure,
    /// Middle-window margin for fellow-traveling.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Pattern whose occurrences stand in for visits to a fixed region.
    #[serde(default = "default_pattern")]
    pub pattern: String,
    /// Window `[a n, b n]` of the limit geodesic searched for the pattern.
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    /// The limit ray is approximated by the walk at `ray_factor * steps`.
    #[serde(default = "default_ray_factor")]
    pub ray_factor: usize,
}

fn default_eps() -> f64 {
    0.1
}
fn default_pattern() -> String {
    "ab".into()
}
fn default_window() -> [f64; 2] {
    [0.3, 0.6]
}
fn default_ray_factor() -> usize {
    4
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            steps: 20_000,
            trials: 200,
            measure: StepMeasure::default(),
            eps: default_eps(),
            pattern: default_pattern(),
            window: default_window(),
            ray_factor: default_ray_factor(),
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        self.measure.validate()?;
        if self.steps == 0 || self.trials == 0 {
            return Err(WalkError::BadConfig("steps and trials must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.eps) {
            return Err(WalkError::BadConfig(format!("eps must lie in [0, 1/2), got {}", self.eps)));
        }
        if self.ray_factor < 2 {
            return Err(WalkError::BadConfig("ray_factor must be at least 2".into()));
        }
        let p = Word::parse(&self.pattern)?;
        if p.is_empty() || !p.is_reduced() {
            return Err(WalkError::BadConfig("pattern must be a nonempty reduced word".into()));
        }
        check_window(self.window[0], self.window[1])
    }
}

fn check_window(a: f64, b: f64) -> Result<(), WalkError> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(WalkError::BadWindow(format!("need 0 < a < b, got ({a}, {b})")));
    }
    Ok(())
}

/// Walk position after `steps` steps with a per-trial stream; `extra`
/// further steps give the limit-ray proxy.
pub fn sample_walk(cfg: &WalkConfig, trial: u64) -> (Word, Word) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let cum = cfg.measure.cumulative();
    let mut w = Vec::new();
    let mut at_n = Vec::new();
    let total = cfg.steps * cfg.ray_factor;
    for step in 1..=total {
        let u: f64 = rng.random();
        let x = cum.iter().position(|&c| u < c).unwrap_or(3) as u8;
        push_reduced(&mut w, x);
        if step == cfg.steps {
            at_n = w.clone();
        }
    }
    (Word::from_letters(at_n), Word::from_letters(w))
}

/// Largest distance from the geodesic toward `w` to the axis of `w` over
/// the middle window `[eps |w|, (1 - eps) |w|]`.
pub fn fellow_travel(w: &Word, eps: f64) -> Result<f64, WalkError> {
    let w = reduce(w);
    let d = axis_distances(&w, w.letters())?;
    let len = w.len() as f64;
    Ok(window_max(&d, eps * len, (1.0 - eps) * len))
}

/// Largest distance from `ray[..t]` to the axis of `w` for `t` in `[lo, hi]`.
pub fn fellow_travel_ray(w: &Word, ray: &Word, lo: f64, hi: f64) -> Result<f64, WalkError> {
    let w = reduce(w);
    let ray = reduce(ray);
    let d = axis_distances(&w, ray.letters())?;
    Ok(window_max(&d, lo, hi))
}

fn window_max(d: &[usize], lo: f64, hi: f64) -> f64 {
    let lo = lo.ceil().max(0.0) as usize;
    let hi = (hi.floor().max(0.0) as usize).min(d.len() - 1);
    if lo > hi {
        return 0.0;
    }
    d[lo..=hi].iter().copied().max().unwrap_or(0) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    pub hit: bool,
    pub density: f64,
}

/// Whether `pattern` occurs in `limit_word[floor(a n)..ceil(b n)]`, and its
/// occurrence frequency over the first `n` letters.
pub fn window_recurrence(limit_word: &Word, pattern: &Word, a: f64, b: f64, n: usize) -> Result<Recurrence, WalkError> {
    check_window(a, b)?;
    if pattern.is_empty() || !pattern.is_reduced() {
        return Err(WalkError::BadWindow("pattern must be a nonempty reduced word".into()));
    }
    let letters = limit_word.letters();
    let p = pattern.letters();
    let (lo, hi) = ((a * n as f64).floor() as usize, (b * n as f64).ceil() as usize);
    if hi > letters.len() || n > letters.len() || n < p.len() {
        return Err(WalkError::BadWindow(format!(
            "word of length {} too short for window [{lo}, {hi}] and n = {n}",
            letters.len()
        )));
    }
    let hit = letters[lo..hi].windows(p.len()).any(|s| s == p);
    let count = letters[..n].windows(p.len()).filter(|&s| s == p).count();
    Ok(Recurrence {
        hit,
        density: count as f64 / (n - p.len() + 1) as f64,
    })
}

/// Per-trial measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub seed: u64,
    pub n: usize,
    pub trial: u64,
    pub length: usize,
    pub translation_length: usize,
    pub tracking: f64,
    pub fellow_travel: f64,
    pub hit: bool,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkStats {
    pub seed: u64,
    pub steps: usize,
    pub trials: usize,
    pub rng: String,
    pub drift_hat: f64,
    pub drift_stderr: f64,
    pub tl_ratio_hat: f64,
    pub tl_ratio_stderr: f64,
    /// Mean of `d(w_n, ray point at distance drift_hat n) / n`.
    pub tracking_hat: f64,
    /// Per-trial fellow-traveling distance of the limit ray from the axis of
    /// `w_n` over `[eps L n, (1 - eps) L n]`, `L = drift_hat`.
    pub fellow_travel_p95: f64,
    pub fellow_travel_max: f64,
    pub pattern: String,
    pub window: [f64; 2],
    pub recurrence_density: f64,
    pub window_hit_rate: f64,
    pub proxy_note: String,
}

fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mean = sum(x) / m;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = x.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (sum(&dev) / (m - 1.0) / m).sqrt())
}

/// Nearest-rank percentile.
pub fn percentile(x: &[f64], p: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let rank = ((p * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[rank - 1]
}

/// Runs the ensemble. Trials run in parallel; each owns its stream and the
/// aggregation is in trial order, so results do not depend on scheduling.
pub fn run_walks(cfg: &WalkConfig) -> Result<(WalkStats, Vec<TrialRow>), WalkError> {
    cfg.validate()?;
    let pattern = Word::parse(&cfg.pattern)?;
    let n = cfg.steps;
    let samples: Vec<(Word, Word)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| sample_walk(cfg, t))
        .collect();
    let lengths: Vec<f64> = samples.iter().map(|(w, _)| w.len() as f64 / n as f64).collect();
    let (drift_hat, drift_stderr) = mean_stderr(&lengths);
    let ray_len = (drift_hat * n as f64).floor() as usize;

    let rows: Vec<TrialRow> = samples
        .par_iter()
        .enumerate()
        .map(|(t, (w, ray))| -> Result<TrialRow, WalkError> {
            let tl = translation_length(w);
            let l = ray_len.min(ray.len());
            let meet = common_prefix(w.letters(), ray.letters()).min(l);
            let tracking = (w.len() + l - 2 * meet) as f64 / n as f64;
            let lo = cfg.eps * drift_hat * n as f64;
            let hi = (1.0 - cfg.eps) * drift_hat * n as f64;
            let ft = if w.is_empty() {
                0.0
            } else {
                fellow_travel_ray(w, ray, lo, hi)?
            };
            let rec = window_recurrence(ray, &pattern, cfg.window[0], cfg.window[1], n)?;
            Ok(TrialRow {
                seed: cfg.seed,
                n,
                trial: t as u64,
                length: w.len(),
                translation_length: tl,
                tracking,
                fellow_travel: ft,
                hit: rec.hit,
                density: rec.density,
            })
        })
        .collect::<Result<_, _>>()?;

    let tl: Vec<f64> = rows.iter().map(|r| r.translation_length as f64 / n as f64).collect();
    let (tl_ratio_hat, tl_ratio_stderr) = mean_stderr(&tl);
    let tracking: Vec<f64> = rows.iter().map(|r| r.tracking).collect();
    let ft: Vec<f64> = rows.iter().map(|r| r.fellow_travel).collect();
    let dens: Vec<f64> = rows.iter().map(|r| r.density).collect();
    let m = rows.len() as f64;
    let stats = WalkStats {
        seed: cfg.seed,
        steps: n,
        trials: cfg.trials,
        rng: RNG_NAME.into(),
        drift_hat,
        drift_stderr,
        tl_ratio_hat,
        tl_ratio_stderr,
        tracking_hat: sum(&tracking) / m,
        fellow_travel_p95: percentile(&ft, 0.95),
        fellow_travel_max: ft.iter().copied().fold(0.0, f64::max),
        pattern: cfg.pattern.clone(),
        window: cfg.window,
        recurrence_density: sum(&dens) / m,
        window_hit_rate: rows.iter().filter(|r| r.hit).count() as f64 / m,
        proxy_note: "free group F2 on its Cayley tree; pattern occurrence stands in for an invariant open set".into(),
    };
    Ok((stats, rows))
}

/// Drift of the distance chain on the `2r`-regular tree: up with
/// probability `(2r - 1) / 2r`, down otherwise (away from the root).
pub fn tree_drift(rank: u32) -> f64 {
    let d = 2.0 * rank as f64;
    (d - 1.0) / d - 1.0 / d
}

/// Stationary frequency of a reduced pattern along the limit geodesic of the
/// uniform walk: first letter uniform, then each of three successors equally likely.
pub fn pattern_density(pattern: &Word) -> f64 {
    if pattern.is_empty() || !pattern.is_reduced() {
        return 0.0;
    }
    0.25 * (1.0f64 / 3.0).powi(pattern.len() as i32 - 1)
}
