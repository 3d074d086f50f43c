use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use super::{CollisionModel, ModelKind};
use crate::autodiff::{bce_logit, bce_prob, sigmoid, Graph, Scalar, SgdMomentum, Var};
use crate::geometry::{PointCloud, RigidTransform};
use crate::dataset::QueryBatch;
use crate::error::{Error, Result};
use crate::rng::{substream, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub steps: u64,
    pub lr: f64,
    pub momentum: f64,
    /// Back-propagate only through the hardest and a random share of the
    /// queries of each record.
    pub mining: bool,
    pub hard_fraction: f64,
    pub random_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { steps: 2000, lr: 1e-3, momentum: 0.9, mining: true, hard_fraction: 0.1, random_fraction: 0.1 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let frac = |f: f64| (0.0..=1.0).contains(&f);
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid(alloc::format!("bad optimizer settings lr={} momentum={}", self.lr, self.momentum)));
        }
        if !frac(self.hard_fraction) || !frac(self.random_fraction) || self.hard_fraction + self.random_fraction > 1.0 {
            return Err(Error::invalid("mining fractions must lie in [0, 1] and sum to at most 1"));
        }
        Ok(())
    }

    /// `(hard, random)` counts for a record of `q` queries.
    pub fn mining_counts(&self, q: usize) -> (usize, usize) {
        ((q as f64 * self.hard_fraction).floor() as usize, (q as f64 * self.random_fraction).floor() as usize)
    }
}

impl<T: Scalar> CollisionModel<T> {
    /// Training loss over every in-grid query of `queries`, built on `vars`
    /// bound in place of the parameters (see `ParamStore::bind`).
    #[allow(clippy::too_many_arguments)]
    pub fn loss_graph_for(
        &self,
        g: &mut Graph<T>,
        vars: &[Var],
        scene: &PointCloud,
        object: &PointCloud,
        queries: &[RigidTransform],
        labels: &[T],
    ) -> Result<Var> {
        let (sv, grids, offsets) = self.scene_graph(g, vars, scene)?;
        let groups = self.group_object(object)?;
        let ov = self.object_graph(g, vars, &groups)?;
        let (rows, outside) = self.head_rows(&grids, &offsets, queries.iter().map(|q| (0, *q)));
        let targets: Vec<T> = labels.iter().zip(&outside).filter(|(_, o)| !**o).map(|(l, _)| *l).collect();
        if targets.is_empty() {
            return Err(Error::invalid("no query inside the workspace grid"));
        }
        let logits = self.head_graph(g, vars, sv, ov, &rows)?;
        self.loss_graph(g, logits, &targets)
    }
}

/// Query indices trained on in one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    /// Highest loss first; ties by lower index.
    pub hard: Vec<usize>,
    /// Uniform draw from the rest, ascending.
    pub random: Vec<usize>,
}

impl Selection {
    pub fn all(&self) -> Vec<usize> {
        let mut v = self.hard.clone();
        v.extend_from_slice(&self.random);
        v
    }
}

/// Picks the `hard` highest-loss indices and `random` uniformly chosen
/// indices among the remainder. Counts are capped by what is available.
pub fn select_queries<T: Scalar>(losses: &[T], hard: usize, random: usize, rng: &mut Rng) -> Selection {
    let mut order: Vec<usize> = (0..losses.len()).collect();
    order.sort_by(|&a, &b| losses[b].partial_cmp(&losses[a]).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b)));
    let hard_n = hard.min(order.len());
    let hard_idx = order[..hard_n].to_vec();
    let mut rest = order[hard_n..].to_vec();
    rest.sort_unstable();
    let k = random.min(rest.len());
    let mut random_idx: Vec<usize> = index::sample(rng, rest.len(), k).into_iter().map(|i| rest[i]).collect();
    random_idx.sort_unstable();
    Selection { hard: hard_idx, random: random_idx }
}

/// Record trained on at `step`: epochs visit every record once, in an
/// order shuffled per epoch.
pub fn record_for_step(seed: u64, records: usize, step: u64) -> usize {
    let epoch = step / records as u64;
    let mut order: Vec<usize> = (0..records).collect();
    order.shuffle(&mut substream(seed, "epoch", epoch));
    order[(step % records as u64) as usize]
}

/// Per-step training record. Accuracy, true-positive rate and `full_loss`
/// cover every in-grid query of the record before the update; `loss` is the
/// optimized loss over the selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub step: u64,
    pub record: usize,
    pub loss: f64,
    pub full_loss: f64,
    pub accuracy: f64,
    pub tpr: f64,
    pub selected: usize,
    /// Mined indices into the in-grid queries; `None` without mining.
    #[serde(skip)]
    pub selection: Option<Selection>,
}

pub struct Trainer<T: Scalar = f32> {
    model: CollisionModel<T>,
    opt: SgdMomentum<T>,
    config: TrainConfig,
    seed: u64,
    step: u64,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(model: CollisionModel<T>, config: TrainConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let opt = SgdMomentum::new(T::of(config.lr), T::of(config.momentum));
        Ok(Trainer { model, opt, config, seed, step: 0 })
    }

    /// Continues from saved weights, optimizer velocity and step counter.
    pub fn resume(model: CollisionModel<T>, config: TrainConfig, seed: u64, step: u64, velocity: Vec<Vec<T>>) -> Result<Self> {
        let mut t = Self::new(model, config, seed)?;
        if !velocity.is_empty() {
            let ok = velocity.len() == t.model.params().len()
                && velocity.iter().enumerate().all(|(i, v)| v.len() == t.model.params().tensor(i).len());
            if !ok {
                return Err(Error::invalid("optimizer state does not match the model parameters"));
            }
        }
        t.opt = SgdMomentum::with_velocity(T::of(t.config.lr), T::of(t.config.momentum), velocity);
        t.step = step;
        Ok(t)
    }

    pub fn model(&self) -> &CollisionModel<T> {
        &self.model
    }

    pub fn into_model(self) -> CollisionModel<T> {
        self.model
    }

    pub fn velocity(&self) -> &[Vec<T>] {
        self.opt.velocity()
    }

    pub fn steps_done(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// One optimizer step on one record.
    pub fn step_on(&mut self, batch: &QueryBatch, record: usize) -> Result<StepStats> {
        let model = &self.model;
        let mut g = Graph::new();
        let vars = model.params().bind(&mut g);
        let (scene, grids, offsets) = model.scene_graph(&mut g, &vars, &batch.scene_cloud)?;
        let groups = model.group_object(&batch.object_cloud)?;
        let object = model.object_graph(&mut g, &vars, &groups)?;
        let (rows, outside) = model.head_rows(&grids, &offsets, batch.transforms.iter().map(|t| (0, *t)));
        let inside: Vec<usize> = (0..outside.len()).filter(|&i| !outside[i]).collect();
        if inside.is_empty() {
            return Err(Error::invalid(alloc::format!("record {record} has no query inside the workspace grid")));
        }
        let per = rows.len() / inside.len();
        let logits = model.head_logits(g.value(scene), &[g.value(object).data()], &rows);

        let targets: Vec<T> = inside.iter().map(|&i| T::of(f64::from(batch.labels[i]))).collect();
        let probs: Vec<T> = logits
            .chunks_exact(per)
            .map(|z| z.iter().map(|&v| sigmoid(v)).sum::<T>() / T::of(per as f64))
            .collect();
        let losses: Vec<T> = match model.kind() {
            ModelKind::SceneCollisionNet => logits.iter().zip(&targets).map(|(&z, &y)| bce_logit(z, y)).collect(),
            ModelKind::PointnetGrid => probs.iter().zip(&targets).map(|(&p, &y)| bce_prob(p, y)).collect(),
        };
        if let Some(i) = losses.iter().position(|l| !l.is_finite()) {
            return Err(Error::Numeric(alloc::format!(
                "non-finite loss at step {} (record {record}, query {}); weights finite: {}",
                self.step,
                inside[i],
                model.params().iter().all(|(_, t)| t.is_finite())
            )));
        }
        let selection = self.config.mining.then(|| {
            let (h, r) = self.config.mining_counts(batch.len());
            select_queries(&losses, h, r, &mut substream(self.seed, "mining", self.step))
        });
        let chosen: Vec<usize> = selection.as_ref().map_or_else(|| (0..inside.len()).collect(), Selection::all);
        let sel_rows: Vec<_> = chosen.iter().flat_map(|&j| rows[j * per..(j + 1) * per].iter().copied()).collect();
        let sel_targets: Vec<T> = chosen.iter().map(|&j| targets[j]).collect();
        let head = model.head_graph(&mut g, &vars, scene, object, &sel_rows)?;
        let loss = model.loss_graph(&mut g, head, &sel_targets)?;
        let loss_value = g.value(loss).data()[0].as_f64();
        if !loss_value.is_finite() {
            return Err(Error::Numeric(alloc::format!("non-finite training loss at step {}", self.step)));
        }
        g.backward(loss)?;
        let grads = model.params().collect_grads(&g, &vars);
        drop(g);
        self.opt.step(self.model.params_mut(), &grads)?;

        let (mut correct, mut tp, mut pos) = (0usize, 0usize, 0usize);
        for (&p, &y) in probs.iter().zip(&targets) {
            let pred = p >= T::of(0.5);
            let truth = y > T::of(0.5);
            correct += usize::from(pred == truth);
            pos += usize::from(truth);
            tp += usize::from(pred && truth);
        }
        let stats = StepStats {
            step: self.step,
            record,
            loss: loss_value,
            full_loss: losses.iter().map(|l| l.as_f64()).sum::<f64>() / losses.len() as f64,
            accuracy: correct as f64 / probs.len() as f64,
            tpr: if pos == 0 { 0.0 } else { tp as f64 / pos as f64 },
            selected: chosen.len(),
            selection,
        };
        self.step += 1;
        Ok(stats)
    }

    /// Trains until `config.steps` steps are done, cycling through `data`.
    pub fn fit(&mut self, data: &[QueryBatch], mut on_step: impl FnMut(&StepStats)) -> Result<()> {
        if data.is_empty() {
            return Err(Error::invalid("no training records"));
        }
        while self.step < self.config.steps {
            let r = record_for_step(self.seed, data.len(), self.step);
            let s = self.step_on(&data[r], r)?;
            on_step(&s);
        }
        Ok(())
    }
}
