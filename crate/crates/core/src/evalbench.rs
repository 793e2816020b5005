//! Metrics, loss landscapes, baselines, dataset emission and benchmark suites.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::ClassifierParams;
use crate::error::{Error, Result};
use crate::geometry::{axis_name, CameraIntrinsics, Viewpoint, ViewpointBounds, DIMS};
use crate::gmvfool::{entropy_estimate, gmvfool_attack, init_mixture, sample_viewpoint, AttackConfig, MixtureParams};
use crate::library::make_object_library;
use crate::oracle::ViewpointOracle;
use crate::renderer::RenderedImage;
use crate::viat::{
    accuracy, derive_seed, fresh_attack_accuracy, pretrain, uniform_viewpoint, viat_train, BatchSource,
    TrainConfig, Workbench,
};

/// Gaussian bump on two viewpoint axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub height: f64,
}

/// Synthetic loss `base + sum_i h_i exp(-|(v - c_i) / w|^2 / 2)` over two
/// axes, counting queries.
#[derive(Debug)]
pub struct PlantedLandscape {
    pub axes: [usize; 2],
    pub widths: [f64; 2],
    pub base: f64,
    pub bumps: Vec<Bump>,
    queries: AtomicU64,
}

impl PlantedLandscape {
    pub fn new(axes: [usize; 2], widths: [f64; 2], base: f64, bumps: Vec<Bump>) -> Self {
        PlantedLandscape {
            axes,
            widths,
            base,
            bumps,
            queries: AtomicU64::new(0),
        }
    }

    /// One bump over (psi, phi) at (60, 50).
    pub fn single_bump() -> Self {
        Self::new(
            [0, 2],
            [40.0, 20.0],
            0.0,
            vec![Bump {
                center: [60.0, 50.0],
                height: 1.0,
            }],
        )
    }

    /// Two equal bumps mirrored in psi at (+-100, 60).
    pub fn two_bump() -> Self {
        Self::new(
            [0, 2],
            [40.0, 20.0],
            0.0,
            vec![
                Bump {
                    center: [-100.0, 60.0],
                    height: 1.0,
                },
                Bump {
                    center: [100.0, 60.0],
                    height: 1.0,
                },
            ],
        )
    }

    pub fn value(&self, v: &Viewpoint) -> f64 {
        let x = v.to_array();
        let p = [x[self.axes[0]], x[self.axes[1]]];
        self.base
            + self
                .bumps
                .iter()
                .map(|b| {
                    let z0 = (p[0] - b.center[0]) / self.widths[0];
                    let z1 = (p[1] - b.center[1]) / self.widths[1];
                    b.height * (-0.5 * (z0 * z0 + z1 * z1)).exp()
                })
                .sum::<f64>()
    }
}

impl ViewpointOracle for PlantedLandscape {
    fn loss(&self, v: &Viewpoint) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.value(v)
    }

    fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// One swept axis: `resolution` evenly spaced values from `min` to `max`
/// inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub axis: usize,
    pub min: f64,
    pub max: f64,
    pub resolution: usize,
}

impl AxisSpec {
    pub fn full(axis: usize, resolution: usize, bounds: &ViewpointBounds) -> Self {
        AxisSpec {
            axis,
            min: bounds.v_min()[axis],
            max: bounds.v_max()[axis],
            resolution,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.resolution - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub rows: AxisSpec,
    pub cols: AxisSpec,
    pub fixed: Viewpoint,
    /// Row-major, `rows.resolution x cols.resolution`.
    pub values: Vec<f64>,
    /// First maximal cell in scan order.
    pub argmax: (usize, usize),
}

impl LandscapeGrid {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols.resolution + c]
    }

    pub fn viewpoint(&self, r: usize, c: usize) -> Viewpoint {
        cell_viewpoint(&self.fixed, &self.rows, &self.cols, r, c)
    }

    pub fn argmax_viewpoint(&self) -> Viewpoint {
        self.viewpoint(self.argmax.0, self.argmax.1)
    }

    pub fn max_value(&self) -> f64 {
        self.get(self.argmax.0, self.argmax.1)
    }

    /// Long-format CSV: one row per cell.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([axis_name(self.rows.axis), axis_name(self.cols.axis), "loss"])?;
        for r in 0..self.rows.resolution {
            for c in 0..self.cols.resolution {
                w.write_record([
                    self.rows.value(r).to_string(),
                    self.cols.value(c).to_string(),
                    self.get(r, c).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Local maxima (8-neighbourhood, ties allowed) at least `min_value` high.
    pub fn local_maxima(&self, min_value: f64) -> Vec<(usize, usize)> {
        let (nr, nc) = (self.rows.resolution as isize, self.cols.resolution as isize);
        let mut out = Vec::new();
        for r in 0..nr {
            for c in 0..nc {
                let v = self.get(r as usize, c as usize);
                if v < min_value {
                    continue;
                }
                let is_max = (-1..=1).all(|dr| {
                    (-1..=1).all(|dc| {
                        let (rr, cc) = (r + dr, c + dc);
                        (dr == 0 && dc == 0)
                            || rr < 0
                            || cc < 0
                            || rr >= nr
                            || cc >= nc
                            || self.get(rr as usize, cc as usize) <= v
                    })
                });
                if is_max {
                    out.push((r as usize, c as usize));
                }
            }
        }
        out
    }
}

fn cell_viewpoint(fixed: &Viewpoint, rows: &AxisSpec, cols: &AxisSpec, r: usize, c: usize) -> Viewpoint {
    let mut v = fixed.to_array();
    v[rows.axis] = rows.value(r);
    v[cols.axis] = cols.value(c);
    Viewpoint::from_array(v)
}

/// Dense evaluation of `oracle` over two swept axes with the rest held at
/// `fixed`. Issues exactly `rows * cols` queries.
pub fn loss_landscape_grid<O: ViewpointOracle + ?Sized>(
    oracle: &O,
    fixed: &Viewpoint,
    rows: AxisSpec,
    cols: AxisSpec,
    bounds: &ViewpointBounds,
) -> Result<LandscapeGrid> {
    for spec in [&rows, &cols] {
        if spec.axis >= DIMS {
            return Err(Error::InvalidConfig(format!("axis {} out of range", spec.axis)));
        }
        if spec.resolution < 2 {
            return Err(Error::InvalidConfig("grid resolution must be >= 2 per axis".into()));
        }
        let (lo, hi) = (bounds.v_min()[spec.axis], bounds.v_max()[spec.axis]);
        for x in [spec.min, spec.max] {
            if !(lo..=hi).contains(&x) {
                return Err(Error::OutOfBounds {
                    axis: spec.axis,
                    value: x,
                    min: lo,
                    max: hi,
                });
            }
        }
    }
    if rows.axis == cols.axis {
        return Err(Error::InvalidConfig("swept axes must differ".into()));
    }
    let n = rows.resolution * cols.resolution;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| oracle.loss(&cell_viewpoint(fixed, &rows, &cols, i / cols.resolution, i % cols.resolution)))
        .collect();
    let mut best = 0;
    for (i, &x) in values.iter().enumerate() {
        if x > values[best] {
            best = i;
        }
    }
    Ok(LandscapeGrid {
        rows,
        cols,
        fixed: *fixed,
        values,
        argmax: (best / cols.resolution, best % cols.resolution),
    })
}

/// Pearson correlation of two equally sized grids; 0 when either is flat.
pub fn normalized_cross_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (x, y) = (a[i] - ma, b[i] - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSearchResult {
    pub best_viewpoint: Viewpoint,
    pub best_loss: f64,
    pub queries: u64,
}

/// Uniform search over the box; the first maximal sample wins.
pub fn random_search_attack<O: ViewpointOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    budget: usize,
    bounds: &ViewpointBounds,
    rng: &mut R,
) -> Result<RandomSearchResult> {
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be >= 1".into()));
    }
    let before = oracle.queries();
    let views: Vec<Viewpoint> = (0..budget).map(|_| uniform_viewpoint(bounds, rng)).collect();
    let losses: Vec<f64> = views.par_iter().map(|v| oracle.loss(v)).collect();
    let mut best = 0;
    for (i, &l) in losses.iter().enumerate() {
        if l > losses[best] {
            best = i;
        }
    }
    Ok(RandomSearchResult {
        best_viewpoint: views[best],
        best_loss: losses[best],
        queries: oracle.queries() - before,
    })
}

/// Top-1 correctness where a tie at the maximum counts as a miss.
pub fn correct_top1(logits: &[f64], label: usize) -> bool {
    let y = logits[label];
    logits.iter().enumerate().all(|(i, &x)| i == label || x < y)
}

fn misclassified(params: &ClassifierParams, image: &RenderedImage, label: usize) -> Result<bool> {
    Ok(!correct_top1(&params.forward_image(image)?, label))
}

/// Per-object fraction of renders from each object's distribution that the
/// classifier gets wrong.
pub fn attack_success_rate<R: Rng + ?Sized>(
    params: &ClassifierParams,
    wb: &Workbench,
    distributions: &[MixtureParams],
    objects: &[usize],
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    if distributions.len() != objects.len() {
        return Err(Error::ShapeMismatch {
            expected: objects.len(),
            got: distributions.len(),
        });
    }
    let mut rates = Vec::with_capacity(objects.len());
    for (&object, dist) in objects.iter().zip(distributions) {
        let views: Vec<Viewpoint> = (0..n).map(|_| sample_viewpoint(dist, &wb.bounds, rng).1).collect();
        let label = wb.label(object);
        let wrong: Vec<bool> = views
            .par_iter()
            .map(|v| misclassified(params, &wb.render(object, v)?, label))
            .collect::<Result<_>>()?;
        rates.push(wrong.iter().filter(|&&w| w).count() as f64 / n as f64);
    }
    Ok(rates)
}

/// Fraction of viewpoint pairs that receive the same predicted label.
pub fn consistency_eval(
    params: &ClassifierParams,
    wb: &Workbench,
    object: usize,
    pairs: &[(Viewpoint, Viewpoint)],
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidConfig("need at least one viewpoint pair".into()));
    }
    let agree: Vec<bool> = pairs
        .par_iter()
        .map(|(a, b)| Ok(params.predict(&wb.render(object, a)?)? == params.predict(&wb.render(object, b)?)?))
        .collect::<Result<_>>()?;
    Ok(agree.iter().filter(|&&x| x).count() as f64 / pairs.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub object: usize,
    pub class: usize,
    pub viewpoint: [f64; DIMS],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub samples_per_object: usize,
    pub entries: Vec<ManifestEntry>,
}

/// Renders `samples_per_object` adversarial-viewpoint images per object as
/// PNGs under `out_dir` and writes `manifest.json` next to them.
pub fn emit_dataset(
    wb: &Workbench,
    distributions: &[MixtureParams],
    samples_per_object: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    if distributions.len() != wb.objects.len() {
        return Err(Error::ShapeMismatch {
            expected: wb.objects.len(),
            got: distributions.len(),
        });
    }
    fs::create_dir_all(out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(wb.objects.len() * samples_per_object);
    for (object, dist) in distributions.iter().enumerate() {
        for i in 0..samples_per_object {
            let (_, v) = sample_viewpoint(dist, &wb.bounds, &mut rng);
            entries.push(ManifestEntry {
                file: format!("obj{object:04}_{i:05}.png"),
                object,
                class: wb.label(object),
                viewpoint: v.to_array(),
            });
        }
    }
    entries.par_iter().try_for_each(|e| {
        wb.render(e.object, &Viewpoint::from_array(e.viewpoint))?
            .save_png(&out_dir.join(&e.file))
    })?;
    let manifest = DatasetManifest {
        seed,
        samples_per_object,
        entries,
    };
    fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Desk-scale experiment: a library, its workbench and a standard-trained
/// classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeskConfig {
    pub classes: usize,
    pub objects_per_class: usize,
    pub image_size: usize,
    pub clean_per_object: usize,
    pub eval_per_object: usize,
    pub pretrain_steps: usize,
    pub pretrain_batch: usize,
    pub pretrain_lr: f64,
    pub seed: u64,
}

impl Default for DeskConfig {
    fn default() -> Self {
        DeskConfig {
            classes: 3,
            objects_per_class: 4,
            image_size: 32,
            clean_per_object: 64,
            eval_per_object: 20,
            pretrain_steps: 600,
            pretrain_batch: 32,
            pretrain_lr: 1e-3,
            seed: 0,
        }
    }
}

pub struct Desk {
    pub workbench: Workbench,
    pub standard: ClassifierParams,
    /// Held-out natural-viewpoint renders.
    pub clean_eval: Vec<(RenderedImage, usize)>,
    /// Held-out uniformly random-viewpoint renders.
    pub random_eval: Vec<(RenderedImage, usize)>,
}

impl Desk {
    pub fn build(cfg: &DeskConfig) -> Result<Self> {
        let objects = make_object_library(cfg.classes, cfg.objects_per_class, cfg.seed)?;
        let intr = CameraIntrinsics {
            width: cfg.image_size,
            height: cfg.image_size,
            ..Default::default()
        };
        let workbench = Workbench::new(objects, intr, ViewpointBounds::standard(), cfg.clean_per_object, cfg.seed)?;
        let clean_eval = workbench.natural_renders(cfg.eval_per_object, derive_seed(cfg.seed, &[0xE1]))?;
        let random_eval = workbench.random_renders(cfg.eval_per_object, derive_seed(cfg.seed, &[0xE2]))?;
        let mut standard = ClassifierParams::init(workbench.architecture(), derive_seed(cfg.seed, &[0x1417]));
        pretrain(
            &workbench,
            &mut standard,
            cfg.pretrain_steps,
            cfg.pretrain_batch,
            cfg.pretrain_lr,
            derive_seed(cfg.seed, &[0x9E7]),
        )?;
        Ok(Desk {
            workbench,
            standard,
            clean_eval,
            random_eval,
        })
    }

    pub fn all_objects(&self) -> Vec<usize> {
        (0..self.workbench.objects.len()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub per_object_success_rate: Vec<f64>,
    pub mean_success_rate: Option<f64>,
    pub mean_entropy: Option<f64>,
    pub queries: u64,
    pub natural_acc: Option<f64>,
    pub random_acc: Option<f64>,
    pub adversarial_acc: Option<f64>,
}

impl BenchRow {
    fn named(method: &str) -> Self {
        BenchRow {
            method: method.to_string(),
            per_object_success_rate: Vec::new(),
            mean_success_rate: None,
            mean_entropy: None,
            queries: 0,
            natural_acc: None,
            random_acc: None,
            adversarial_acc: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub suite: String,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "method",
            "success_rate",
            "entropy",
            "queries",
            "natural_acc",
            "random_acc",
            "adversarial_acc",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.method.clone(),
                opt(r.mean_success_rate),
                opt(r.mean_entropy),
                r.queries.to_string(),
                opt(r.natural_acc),
                opt(r.random_acc),
                opt(r.adversarial_acc),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.suite));
        let csv_path = dir.join(format!("{}.csv", self.suite));
        fs::write(&json, serde_json::to_string_pretty(self)?)?;
        self.write_csv(fs::File::create(&csv_path)?)?;
        Ok((json, csv_path))
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackSuiteConfig {
    pub desk: DeskConfig,
    pub attack: AttackConfig,
    /// Mixture sizes compared; each gets one row.
    pub components: Vec<usize>,
    pub samples_per_object: usize,
    pub entropy_samples: usize,
}

impl Default for AttackSuiteConfig {
    fn default() -> Self {
        AttackSuiteConfig {
            desk: DeskConfig::default(),
            attack: AttackConfig::default(),
            components: vec![1, 5, 15],
            samples_per_object: 100,
            entropy_samples: 10_000,
        }
    }
}

/// Attack comparison on the standard-trained classifier: random search at
/// the same query budget against mixtures of each configured size.
///
/// The random-search success rate is the fraction of objects whose best
/// found viewpoint is misclassified.
pub fn bench_attacks(cfg: &AttackSuiteConfig) -> Result<BenchReport> {
    cfg.attack.validate()?;
    let desk = Desk::build(&cfg.desk)?;
    let wb = &desk.workbench;
    let objects = desk.all_objects();
    let budget = cfg.attack.iterations * cfg.attack.samples;
    let mut rows = Vec::new();

    let mut rs = BenchRow::named("random_search");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.desk.seed, &[0x125]));
    for &o in &objects {
        let oracle = wb.oracle(&desk.standard, o)?;
        let r = random_search_attack(&oracle, budget, &wb.bounds, &mut rng)?;
        let wrong = misclassified(&desk.standard, &wb.render(o, &r.best_viewpoint)?, wb.label(o))?;
        rs.per_object_success_rate.push(if wrong { 1.0 } else { 0.0 });
        rs.queries += r.queries;
    }
    rs.mean_success_rate = Some(mean(&rs.per_object_success_rate));
    rows.push(rs);

    for &k in &cfg.components {
        let mut row = BenchRow::named(&format!("mixture_k{k}"));
        let mut dists = Vec::new();
        let mut entropies = Vec::new();
        for &o in &objects {
            let oracle = wb.oracle(&desk.standard, o)?;
            let attack = AttackConfig {
                k,
                seed: derive_seed(cfg.desk.seed, &[0xA7, k as u64, o as u64]),
                entropy_samples: cfg.entropy_samples,
                ..cfg.attack.clone()
            };
            let result = gmvfool_attack(&oracle, &init_mixture(k, attack.seed)?, &wb.bounds, &attack)?;
            row.queries += result.queries;
            entropies.push(result.entropy.value);
            dists.push(result.params);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.desk.seed, &[0x5A, k as u64]));
        row.per_object_success_rate =
            attack_success_rate(&desk.standard, wb, &dists, &objects, cfg.samples_per_object, &mut rng)?;
        row.mean_success_rate = Some(mean(&row.per_object_success_rate));
        row.mean_entropy = Some(mean(&entropies));
        rows.push(row);
    }
    Ok(BenchReport {
        suite: "table4".into(),
        seed: cfg.desk.seed,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSuiteConfig {
    pub desk: DeskConfig,
    pub train: TrainConfig,
    /// Attack re-run against every trained model for robust accuracy.
    pub eval_attack: AttackConfig,
    pub eval_samples_per_object: usize,
}

impl Default for TrainingSuiteConfig {
    fn default() -> Self {
        TrainingSuiteConfig {
            desk: DeskConfig::default(),
            train: TrainConfig::default(),
            eval_attack: AttackConfig::default(),
            eval_samples_per_object: 50,
        }
    }
}

/// Robust-training comparison: standard, natural- and random-viewpoint
/// augmentation, and adversarial training, each scored on clean, random
/// and fresh-attack viewpoints.
pub fn bench_training(cfg: &TrainingSuiteConfig) -> Result<BenchReport> {
    let desk = Desk::build(&cfg.desk)?;
    let objects = desk.all_objects();
    let eval_seed = derive_seed(cfg.desk.seed, &[0xF2E5]);
    let score = |method: &str, params: &ClassifierParams| -> Result<BenchRow> {
        let mut row = BenchRow::named(method);
        row.natural_acc = Some(accuracy(params, &desk.clean_eval)?);
        row.random_acc = Some(accuracy(params, &desk.random_eval)?);
        row.adversarial_acc = Some(fresh_attack_accuracy(
            &desk.workbench,
            params,
            &cfg.eval_attack,
            &objects,
            cfg.eval_samples_per_object,
            eval_seed,
        )?);
        row.queries = (cfg.eval_attack.iterations * cfg.eval_attack.samples * objects.len()) as u64;
        Ok(row)
    };
    let mut rows = vec![score("standard", &desk.standard)?];
    for (name, source) in [
        ("natural_augmentation", BatchSource::NaturalAugmentation),
        ("random_augmentation", BatchSource::RandomAugmentation),
        ("adversarial_training", BatchSource::Adversarial),
    ] {
        let train = TrainConfig {
            batch_source: source,
            ..cfg.train.clone()
        };
        let (params, _, _) = viat_train(&desk.workbench, &desk.standard, &train, &desk.clean_eval)?;
        rows.push(score(name, &params)?);
    }
    Ok(BenchReport {
        suite: "table2".into(),
        seed: cfg.desk.seed,
        rows,
    })
}

/// Mean entropy of `distributions` under `bounds`.
pub fn mean_entropy(distributions: &[MixtureParams], bounds: &ViewpointBounds, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    mean(
        &distributions
            .iter()
            .map(|d| entropy_estimate(d, bounds, n, &mut rng).value)
            .collect::<Vec<_>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant(AtomicU64);

    impl ViewpointOracle for Constant {
        fn loss(&self, _: &Viewpoint) -> f64 {
            self.0.fetch_add(1, Ordering::Relaxed);
            1.0
        }
        fn queries(&self) -> u64 {
            self.0.load(Ordering::Relaxed)
        }
    }

    fn psi_phi(rp: usize, rf: usize) -> (AxisSpec, AxisSpec) {
        let b = ViewpointBounds::standard();
        (AxisSpec::full(0, rp, &b), AxisSpec::full(2, rf, &b))
    }

    #[test]
    fn constant_grid_argmax_is_first_cell() {
        let o = Constant(AtomicU64::new(0));
        let (p, f) = psi_phi(6, 4);
        let g = loss_landscape_grid(&o, &Viewpoint::ZERO, p, f, &ViewpointBounds::standard()).unwrap();
        assert_eq!(g.argmax, (0, 0));
        assert!(g.values.iter().all(|&v| v == 1.0));
        assert_eq!(o.queries(), 24);
    }

    #[test]
    fn grid_finds_planted_maxima() {
        let o = PlantedLandscape::two_bump();
        let (p, f) = psi_phi(73, 29);
        let g = loss_landscape_grid(&o, &Viewpoint::ZERO, p, f, &ViewpointBounds::standard()).unwrap();
        let v = g.argmax_viewpoint();
        assert!((v.psi.abs() - 100.0).abs() < 1e-9 && (v.phi - 60.0).abs() < 1e-9);
        let peaks: Vec<Viewpoint> = g.local_maxima(0.5).iter().map(|&(r, c)| g.viewpoint(r, c)).collect();
        assert_eq!(peaks.len(), 2);
        assert!(peaks.iter().any(|v| (v.psi + 100.0).abs() < 1e-9));
        assert!(peaks.iter().any(|v| (v.psi - 100.0).abs() < 1e-9));
    }

    #[test]
    fn swapping_axes_transposes() {
        let o = PlantedLandscape::single_bump();
        let b = ViewpointBounds::standard();
        let (p, f) = psi_phi(9, 5);
        let a = loss_landscape_grid(&o, &Viewpoint::ZERO, p, f, &b).unwrap();
        let t = loss_landscape_grid(&o, &Viewpoint::ZERO, f, p, &b).unwrap();
        for r in 0..9 {
            for c in 0..5 {
                assert_eq!(a.get(r, c), t.get(c, r));
            }
        }
    }

    #[test]
    fn grid_rejects_bad_specs() {
        let o = Constant(AtomicU64::new(0));
        let b = ViewpointBounds::standard();
        let (p, f) = psi_phi(1, 4);
        assert!(loss_landscape_grid(&o, &Viewpoint::ZERO, p, f, &b).is_err());
        let (p, _) = psi_phi(4, 4);
        assert!(loss_landscape_grid(&o, &Viewpoint::ZERO, p, p, &b).is_err());
        let wide = AxisSpec {
            axis: 1,
            min: -90.0,
            max: 90.0,
            resolution: 3,
        };
        assert!(loss_landscape_grid(&o, &Viewpoint::ZERO, p, wide, &b).is_err());
    }

    #[test]
    fn random_search_budget_one_and_prefix_monotone() {
        let o = PlantedLandscape::two_bump();
        let b = ViewpointBounds::standard();
        let one = random_search_attack(&o, 1, &b, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let first = uniform_viewpoint(&b, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(one.best_viewpoint, first);
        assert_eq!(one.queries, 1);
        let mut prev = f64::NEG_INFINITY;
        for budget in [1, 5, 20, 100, 400] {
            let r = random_search_attack(&o, budget, &b, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
            assert!(r.best_loss >= prev);
            assert_eq!(r.queries, budget as u64);
            prev = r.best_loss;
        }
        assert!(random_search_attack(&o, 0, &b, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
    }

    #[test]
    fn ties_count_as_misses() {
        assert!(correct_top1(&[0.0, 2.0, 1.0], 1));
        assert!(!correct_top1(&[2.0, 2.0, 1.0], 0));
        assert!(!correct_top1(&[2.0, 2.0, 1.0], 1));
        assert!(!correct_top1(&[3.0, 2.0, 1.0], 1));
    }

    #[test]
    fn ncc_extremes() {
        let a = [1.0, 2.0, 3.0];
        assert!((normalized_cross_correlation(&a, &a) - 1.0).abs() < 1e-12);
        assert!((normalized_cross_correlation(&a, &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(normalized_cross_correlation(&a, &[1.0, 1.0, 1.0]), 0.0);
    }

    #[test]
    fn grid_csv_round_trips() {
        let o = PlantedLandscape::single_bump();
        let (p, f) = psi_phi(4, 3);
        let g = loss_landscape_grid(&o, &Viewpoint::ZERO, p, f, &ViewpointBounds::standard()).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(rd.headers().unwrap(), vec!["psi", "phi", "loss"]);
        let vals: Vec<f64> = rd.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
        assert_eq!(vals, g.values);
    }
}
