//! Viewpoint-invariant adversarial training.
//!
//! Every epoch first refreshes the per-object adversarial viewpoint
//! distributions with the mixture attack (all objects in the first epoch,
//! one random object per class afterwards), then trains the classifier on
//! batches mixing renders sampled from those distributions with cached
//! clean renders. The two phases never interleave.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{
    train_step, Architecture, ClassifierOracle, ClassifierParams, SampleSource, TrainBatch,
    TrainerState,
};
use crate::error::{Error, Result};
use crate::geometry::{camera_pose, CameraIntrinsics, Vec3, Viewpoint, ViewpointBounds, BASE_POSITION};
use crate::gmvfool::{
    entropy_estimate, gmvfool_attack, init_mixture, sample_viewpoint, AttackConfig, IterationRecord,
    MixtureParams,
};
use crate::optim::OptimizerKind;
use crate::renderer::{render_image, RenderedImage, SceneField};

/// SplitMix64 finalizer, used to derive independent seeds for sub-streams.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut z = seed;
    for &t in tags {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(t.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Range of viewpoints under which a class is usually photographed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaturalRange {
    pub psi: (f64, f64),
    pub phi: (f64, f64),
    /// Symmetric jitter applied to theta and to the three offsets.
    pub theta_jitter: f64,
    pub offset_jitter: f64,
}

impl Default for NaturalRange {
    fn default() -> Self {
        NaturalRange {
            psi: (-45.0, 45.0),
            phi: (25.0, 55.0),
            theta_jitter: 5.0,
            offset_jitter: 0.1,
        }
    }
}

impl NaturalRange {
    pub fn sample<R: Rng + ?Sized>(&self, bounds: &ViewpointBounds, rng: &mut R) -> Viewpoint {
        let mut v = Viewpoint {
            psi: rng.random_range(self.psi.0..=self.psi.1),
            theta: rng.random_range(-self.theta_jitter..=self.theta_jitter),
            phi: rng.random_range(self.phi.0..=self.phi.1),
            dx: rng.random_range(-self.offset_jitter..=self.offset_jitter),
            dy: rng.random_range(-self.offset_jitter..=self.offset_jitter),
            dz: rng.random_range(-self.offset_jitter..=self.offset_jitter),
        }
        .to_array();
        for d in 0..v.len() {
            v[d] = v[d].clamp(bounds.v_min()[d], bounds.v_max()[d]);
        }
        Viewpoint::from_array(v)
    }
}

/// Uniform sample over the viewpoint box.
pub fn uniform_viewpoint<R: Rng + ?Sized>(bounds: &ViewpointBounds, rng: &mut R) -> Viewpoint {
    let mut v = [0.0; 6];
    for d in 0..6 {
        v[d] = rng.random_range(bounds.v_min()[d]..=bounds.v_max()[d]);
    }
    Viewpoint::from_array(v)
}

/// Everything fixed about the objects: scenes, camera model, viewpoint box
/// and the cached clean pool.
#[derive(Clone, Debug)]
pub struct Workbench {
    pub objects: Vec<SceneField>,
    pub classes: usize,
    pub intrinsics: CameraIntrinsics,
    pub bounds: ViewpointBounds,
    pub base_position: Vec3,
    /// Per-class natural viewpoint ranges.
    pub natural: Vec<NaturalRange>,
    pub clean_pool: Vec<(RenderedImage, usize)>,
}

impl Workbench {
    /// Builds the workbench and renders `clean_per_object` natural views of
    /// every object into the clean pool.
    pub fn new(
        objects: Vec<SceneField>,
        intrinsics: CameraIntrinsics,
        bounds: ViewpointBounds,
        clean_per_object: usize,
        seed: u64,
    ) -> Result<Self> {
        intrinsics.validate()?;
        if objects.is_empty() {
            return Err(Error::InvalidConfig("no objects".into()));
        }
        let classes = objects.iter().map(|o| o.class_label).max().unwrap_or(0) + 1;
        let mut wb = Workbench {
            objects,
            classes,
            intrinsics,
            bounds,
            base_position: BASE_POSITION,
            natural: vec![NaturalRange::default(); classes],
            clean_pool: Vec::new(),
        };
        wb.clean_pool = wb.natural_renders(clean_per_object, derive_seed(seed, &[0xC1EA]))?;
        Ok(wb)
    }

    pub fn architecture(&self) -> Architecture {
        Architecture::for_image(self.intrinsics.width, self.intrinsics.height, self.classes)
    }

    pub fn label(&self, object: usize) -> usize {
        self.objects[object].class_label
    }

    pub fn render(&self, object: usize, v: &Viewpoint) -> Result<RenderedImage> {
        let pose = camera_pose(v, &self.base_position)?;
        Ok(render_image(&self.objects[object], &pose, &self.intrinsics))
    }

    pub fn natural_viewpoint<R: Rng + ?Sized>(&self, object: usize, rng: &mut R) -> Viewpoint {
        self.natural[self.label(object)].sample(&self.bounds, rng)
    }

    /// `per_object` fresh natural-viewpoint renders of every object.
    pub fn natural_renders(&self, per_object: usize, seed: u64) -> Result<Vec<(RenderedImage, usize)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jobs: Vec<(usize, Viewpoint)> = (0..self.objects.len())
            .flat_map(|o| (0..per_object).map(move |_| o))
            .map(|o| (o, self.natural_viewpoint(o, &mut rng)))
            .collect();
        jobs.par_iter()
            .map(|(o, v)| Ok((self.render(*o, v)?, self.label(*o))))
            .collect()
    }

    /// Renders from uniformly random viewpoints of every object.
    pub fn random_renders(&self, per_object: usize, seed: u64) -> Result<Vec<(RenderedImage, usize)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jobs: Vec<(usize, Viewpoint)> = (0..self.objects.len())
            .flat_map(|o| (0..per_object).map(move |_| o))
            .map(|o| (o, uniform_viewpoint(&self.bounds, &mut rng)))
            .collect();
        jobs.par_iter()
            .map(|(o, v)| Ok((self.render(*o, v)?, self.label(*o))))
            .collect()
    }

    pub fn oracle<'a>(&'a self, params: &'a ClassifierParams, object: usize) -> Result<ClassifierOracle<'a>> {
        ClassifierOracle::new(
            params,
            &self.objects[object],
            self.label(object),
            self.intrinsics,
            self.base_position,
        )
    }

    /// Object indices grouped by class.
    pub fn class_registry(&self) -> Vec<Vec<usize>> {
        let mut reg = vec![Vec::new(); self.classes];
        for (i, o) in self.objects.iter().enumerate() {
            reg[o.class_label].push(i);
        }
        reg
    }
}

/// Fraction of `(image, label)` pairs classified correctly.
pub fn accuracy(params: &ClassifierParams, data: &[(RenderedImage, usize)]) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let correct: Vec<bool> = data
        .par_iter()
        .map(|(img, y)| Ok(params.predict(img)? == *y))
        .collect::<Result<_>>()?;
    Ok(correct.iter().filter(|&&c| c).count() as f64 / data.len() as f64)
}

/// Plain supervised training on the clean pool (the standard-trained model).
pub fn pretrain(
    wb: &Workbench,
    params: &mut ClassifierParams,
    steps: usize,
    batch_size: usize,
    lr: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = TrainerState::new(OptimizerKind::Adam, params);
    let mut losses = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut batch = TrainBatch::default();
        for _ in 0..batch_size {
            let (img, y) = &wb.clean_pool[rng.random_range(0..wb.clean_pool.len())];
            batch.push(img.clone(), *y, SampleSource::Clean);
        }
        losses.push(train_step(params, &batch, lr, &mut state)?);
    }
    Ok(losses)
}

/// Where the non-clean share of each training batch comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchSource {
    /// Viewpoints sampled from the learned adversarial distributions.
    #[default]
    Adversarial,
    /// Renders from each class's natural viewpoint range.
    NaturalAugmentation,
    /// Renders from uniformly random viewpoints.
    RandomAugmentation,
}

/// How the sharing probability is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingMode {
    /// `pi` is the probability of borrowing another object's distribution.
    #[default]
    ProbabilityOfSharing,
    /// `pi` is the probability of keeping the object's own distribution.
    ProbabilityOfKeeping,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    /// Adversarial : clean samples per batch.
    pub adv_clean_ratio: (usize, usize),
    pub batch_size: usize,
    pub steps_per_epoch: usize,
    pub sharing_probability: f64,
    #[serde(default)]
    pub sharing_mode: SharingMode,
    /// Attack iterations for every object in the first epoch.
    pub full_iterations: usize,
    /// Attack iterations for the selected objects in later epochs.
    pub incremental_iterations: usize,
    pub attack: AttackConfig,
    #[serde(default)]
    pub batch_source: BatchSource,
    /// Viewpoints drawn per object when measuring accuracy on the stored
    /// distributions after each epoch; zero skips the measurement.
    #[serde(default)]
    pub eval_samples_per_object: usize,
    /// Re-attack the current model at the end of selected epochs.
    #[serde(default)]
    pub fresh_eval: Option<FreshEval>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreshEval {
    pub attack: AttackConfig,
    pub samples_per_object: usize,
    /// Evaluate every this many epochs (and always after the last); zero
    /// means only after the last.
    #[serde(default)]
    pub every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            lr: 1e-3,
            optimizer: OptimizerKind::Adam,
            adv_clean_ratio: (1, 32),
            batch_size: 33,
            steps_per_epoch: 100,
            sharing_probability: 0.5,
            sharing_mode: SharingMode::ProbabilityOfSharing,
            full_iterations: 50,
            incremental_iterations: 10,
            attack: AttackConfig::default(),
            batch_source: BatchSource::Adversarial,
            eval_samples_per_object: 0,
            fresh_eval: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sharing_probability) {
            return Err(Error::InvalidConfig("sharing probability must be in [0, 1]".into()));
        }
        if self.adv_clean_ratio.0 == 0 || self.adv_clean_ratio.1 == 0 {
            return Err(Error::InvalidConfig("adversarial:clean ratio must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be >= 1".into()));
        }
        if self.full_iterations == 0 || self.incremental_iterations == 0 {
            return Err(Error::InvalidConfig("attack iterations must be >= 1".into()));
        }
        self.attack.validate()
    }

    /// Probability that an object borrows a peer's distribution.
    pub fn effective_sharing(&self) -> f64 {
        match self.sharing_mode {
            SharingMode::ProbabilityOfSharing => self.sharing_probability,
            SharingMode::ProbabilityOfKeeping => 1.0 - self.sharing_probability,
        }
    }

    /// `(adversarial, clean)` counts for a batch, rounding the adversarial
    /// share up.
    pub fn batch_split(&self, batch_size: usize) -> (usize, usize) {
        let (a, c) = self.adv_clean_ratio;
        let adv = (batch_size * a).div_ceil(a + c).min(batch_size);
        (adv, batch_size - adv)
    }
}

/// One inner-maximization run, kept for bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackLog {
    pub epoch: usize,
    pub object: usize,
    pub iterations: usize,
    pub queries: u64,
    pub final_objective: f64,
}

#[derive(Clone, Debug)]
pub struct TrainState {
    /// Current distribution of every object.
    pub distributions: Vec<MixtureParams>,
    /// Concatenated attack traces per object.
    pub traces: Vec<Vec<IterationRecord>>,
    pub epoch: usize,
    pub registry: Vec<Vec<usize>>,
    pub attack_log: Vec<AttackLog>,
    pub rng: ChaCha8Rng,
}

impl TrainState {
    pub fn new(wb: &Workbench, config: &TrainConfig) -> Result<Self> {
        let n = wb.objects.len();
        let distributions = (0..n)
            .map(|o| init_mixture(config.attack.k, derive_seed(config.seed, &[0x1A17, o as u64])))
            .collect::<Result<_>>()?;
        Ok(TrainState {
            distributions,
            traces: vec![Vec::new(); n],
            epoch: 0,
            registry: wb.class_registry(),
            attack_log: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[0x57A7E])),
        })
    }
}

fn attack_object(
    wb: &Workbench,
    classifier: &ClassifierParams,
    state: &mut TrainState,
    config: &TrainConfig,
    object: usize,
    epoch: usize,
    iterations: usize,
) -> Result<()> {
    let oracle = wb.oracle(classifier, object)?;
    let cfg = AttackConfig {
        iterations,
        seed: derive_seed(config.seed, &[0xA77A, epoch as u64, object as u64]),
        entropy_samples: 1,
        ..config.attack.clone()
    };
    let result = gmvfool_attack(&oracle, &state.distributions[object], &wb.bounds, &cfg)?;
    state.attack_log.push(AttackLog {
        epoch,
        object,
        iterations,
        queries: result.queries,
        final_objective: result.trace.last().map_or(f64::NAN, |r| r.objective),
    });
    state.traces[object].extend(result.trace);
    state.distributions[object] = result.params;
    Ok(())
}

/// Refreshes distributions: every object in epoch 1, afterwards one
/// uniformly chosen object per class continuing from its stored parameters.
pub fn stochastic_inner_update(
    wb: &Workbench,
    state: &mut TrainState,
    classifier: &ClassifierParams,
    config: &TrainConfig,
    epoch: usize,
) -> Result<()> {
    if epoch == 0 {
        return Err(Error::InvalidConfig("epochs are numbered from 1".into()));
    }
    if epoch == 1 {
        for object in 0..wb.objects.len() {
            attack_object(wb, classifier, state, config, object, epoch, config.full_iterations)?;
        }
    } else {
        let picks: Vec<usize> = state
            .registry
            .clone()
            .iter()
            .filter(|members| !members.is_empty())
            .map(|members| members[state.rng.random_range(0..members.len())])
            .collect();
        for object in picks {
            attack_object(wb, classifier, state, config, object, epoch, config.incremental_iterations)?;
        }
    }
    state.epoch = epoch;
    Ok(())
}

/// Object whose distribution `object` samples from this time: its own with
/// probability `1 - share`, otherwise a uniformly chosen same-class peer.
pub fn share_distribution<R: Rng + ?Sized>(
    registry: &[Vec<usize>],
    class: usize,
    object: usize,
    share: f64,
    rng: &mut R,
) -> usize {
    let peers: Vec<usize> = registry[class].iter().copied().filter(|&o| o != object).collect();
    if peers.is_empty() || rng.random::<f64>() >= share {
        return object;
    }
    peers[rng.random_range(0..peers.len())]
}

/// Provenance of one non-clean batch entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarialDraw {
    pub object: usize,
    pub distribution_of: usize,
    pub viewpoint: Viewpoint,
}

/// A mixed batch plus where each augmented sample came from.
pub fn make_training_batch(
    wb: &Workbench,
    state: &mut TrainState,
    config: &TrainConfig,
    batch_size: usize,
) -> Result<(TrainBatch, Vec<AdversarialDraw>)> {
    if wb.clean_pool.is_empty() {
        return Err(Error::InvalidConfig("clean pool is empty".into()));
    }
    let (n_adv, n_clean) = config.batch_split(batch_size);
    let share = config.effective_sharing();
    let mut draws = Vec::with_capacity(n_adv);
    for _ in 0..n_adv {
        let object = state.rng.random_range(0..wb.objects.len());
        let class = wb.label(object);
        let (distribution_of, viewpoint) = match config.batch_source {
            BatchSource::Adversarial => {
                let src = share_distribution(&state.registry, class, object, share, &mut state.rng);
                let (_, v) = sample_viewpoint(&state.distributions[src], &wb.bounds, &mut state.rng);
                (src, v)
            }
            BatchSource::NaturalAugmentation => (object, wb.natural_viewpoint(object, &mut state.rng)),
            BatchSource::RandomAugmentation => (object, uniform_viewpoint(&wb.bounds, &mut state.rng)),
        };
        draws.push(AdversarialDraw {
            object,
            distribution_of,
            viewpoint,
        });
    }
    let renders: Vec<RenderedImage> = draws
        .par_iter()
        .map(|d| wb.render(d.object, &d.viewpoint))
        .collect::<Result<_>>()?;
    let mut batch = TrainBatch::default();
    for (img, d) in renders.into_iter().zip(&draws) {
        batch.push(img, wb.label(d.object), SampleSource::Adversarial);
    }
    for _ in 0..n_clean {
        let (img, y) = &wb.clean_pool[state.rng.random_range(0..wb.clean_pool.len())];
        batch.push(img.clone(), *y, SampleSource::Clean);
    }
    Ok((batch, draws))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub mean_loss: f64,
    pub clean_acc: f64,
    /// Accuracy on viewpoints drawn from the stored distributions.
    pub adv_acc_own_attack: Option<f64>,
    /// Accuracy under attacks re-run against the current model.
    pub adv_acc_fresh_attack: Option<f64>,
    pub mean_entropy: Option<f64>,
    pub adversarial_samples: usize,
    pub attacks_run: usize,
}

/// Accuracy on renders sampled from each object's stored distribution.
pub fn own_distribution_accuracy(
    wb: &Workbench,
    classifier: &ClassifierParams,
    distributions: &[MixtureParams],
    per_object: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(usize, Viewpoint)> = (0..wb.objects.len())
        .flat_map(|o| (0..per_object).map(move |_| o))
        .map(|o| (o, sample_viewpoint(&distributions[o], &wb.bounds, &mut rng).1))
        .collect();
    let data: Vec<(RenderedImage, usize)> = jobs
        .par_iter()
        .map(|(o, v)| Ok((wb.render(*o, v)?, wb.label(*o))))
        .collect::<Result<_>>()?;
    accuracy(classifier, &data)
}

/// Runs adversarial (or augmentation) fine-tuning of `classifier`.
///
/// `clean_eval` is the held-out clean set scored after every epoch.
pub fn viat_train(
    wb: &Workbench,
    classifier: &ClassifierParams,
    config: &TrainConfig,
    clean_eval: &[(RenderedImage, usize)],
) -> Result<(ClassifierParams, TrainState, Vec<EpochMetrics>)> {
    viat_train_observed(wb, classifier, config, clean_eval, |_, _, _| Ok(()))
}

/// [`viat_train`] with a callback after every epoch, e.g. for checkpoints.
pub fn viat_train_observed<F>(
    wb: &Workbench,
    classifier: &ClassifierParams,
    config: &TrainConfig,
    clean_eval: &[(RenderedImage, usize)],
    mut observe: F,
) -> Result<(ClassifierParams, TrainState, Vec<EpochMetrics>)>
where
    F: FnMut(&EpochMetrics, &ClassifierParams, &TrainState) -> Result<()>,
{
    config.validate()?;
    let mut params = classifier.clone();
    let mut state = TrainState::new(wb, config)?;
    let mut optimizer = TrainerState::new(config.optimizer, &params);
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let attacks_before = state.attack_log.len();
        if config.batch_source == BatchSource::Adversarial {
            stochastic_inner_update(wb, &mut state, &params, config, epoch)?;
        }
        let mut loss_sum = 0.0;
        let mut adversarial_samples = 0;
        for _ in 0..config.steps_per_epoch {
            let (batch, _) = make_training_batch(wb, &mut state, config, config.batch_size)?;
            adversarial_samples += batch.count(SampleSource::Adversarial);
            let loss = train_step(&mut params, &batch, config.lr, &mut optimizer)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteInput("training loss"));
            }
            loss_sum += loss;
        }
        let adv_acc_own_attack = if config.eval_samples_per_object > 0
            && config.batch_source == BatchSource::Adversarial
        {
            Some(own_distribution_accuracy(
                wb,
                &params,
                &state.distributions,
                config.eval_samples_per_object,
                derive_seed(config.seed, &[0xE7A1, epoch as u64]),
            )?)
        } else {
            None
        };
        let mean_entropy = if config.batch_source == BatchSource::Adversarial {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[0xE472, epoch as u64]));
            let total: f64 = state
                .distributions
                .iter()
                .map(|p| entropy_estimate(p, &wb.bounds, 1000, &mut rng).value)
                .sum();
            Some(total / state.distributions.len() as f64)
        } else {
            None
        };
        let adv_acc_fresh_attack = match &config.fresh_eval {
            Some(f) if epoch == config.epochs || (f.every > 0 && epoch % f.every == 0) => {
                let objects: Vec<usize> = (0..wb.objects.len()).collect();
                Some(fresh_attack_accuracy(
                    wb,
                    &params,
                    &f.attack,
                    &objects,
                    f.samples_per_object,
                    derive_seed(config.seed, &[0xF2E5, epoch as u64]),
                )?)
            }
            _ => None,
        };
        let metrics = EpochMetrics {
            epoch,
            mean_loss: loss_sum / config.steps_per_epoch.max(1) as f64,
            clean_acc: accuracy(&params, clean_eval)?,
            adv_acc_own_attack,
            adv_acc_fresh_attack,
            mean_entropy,
            adversarial_samples,
            attacks_run: state.attack_log.len() - attacks_before,
        };
        observe(&metrics, &params, &state)?;
        history.push(metrics);
    }
    Ok((params, state, history))
}

/// Per-epoch metrics as CSV.
pub fn write_metrics_csv<W: std::io::Write>(history: &[EpochMetrics], out: W) -> Result<()> {
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "epoch",
        "clean_acc",
        "adv_acc_own_attack",
        "adv_acc_fresh_attack",
        "mean_entropy",
        "mean_loss",
    ])?;
    for m in history {
        w.write_record([
            m.epoch.to_string(),
            m.clean_acc.to_string(),
            opt(m.adv_acc_own_attack),
            opt(m.adv_acc_fresh_attack),
            opt(m.mean_entropy),
            m.mean_loss.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Accuracy under a fresh attack: for each object, run the attack against
/// `classifier` and score renders drawn from the resulting distribution.
pub fn fresh_attack_accuracy(
    wb: &Workbench,
    classifier: &ClassifierParams,
    attack: &AttackConfig,
    objects: &[usize],
    samples_per_object: usize,
    seed: u64,
) -> Result<f64> {
    let mut total = 0.0;
    for &object in objects {
        let oracle = wb.oracle(classifier, object)?;
        let cfg = AttackConfig {
            seed: derive_seed(seed, &[0xF2E5, object as u64]),
            entropy_samples: 1,
            ..attack.clone()
        };
        let init = init_mixture(cfg.k, cfg.seed)?;
        let result = gmvfool_attack(&oracle, &init, &wb.bounds, &cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x5A3F, object as u64]));
        let views: Vec<Viewpoint> = (0..samples_per_object)
            .map(|_| sample_viewpoint(&result.params, &wb.bounds, &mut rng).1)
            .collect();
        let data: Vec<(RenderedImage, usize)> = views
            .par_iter()
            .map(|v| Ok((wb.render(object, v)?, wb.label(object))))
            .collect::<Result<_>>()?;
        total += accuracy(classifier, &data)?;
    }
    Ok(total / objects.len().max(1) as f64)
}
