use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metrics::label_rank;
use super::{cross_entropy_loss, lr_at, sgd_nesterov_step, topk_accuracy, EpochRecord, EvalMetrics, EvalOptions};
use super::{OptimizerState, RunReport, TrainConfig};
use crate::error::{Error, Result};
use crate::model::{count_flops, count_params, fuse_scores, save_checkpoint, InputShape, TgnModel};
use crate::numerics::{softmax, Tape, Tensor};
use crate::skeleton::{Dataset, Preprocess, Split};

fn check_compatible(model: &TgnModel, dataset: &Dataset) -> Result<()> {
    if model.layout.id != dataset.layout.id {
        return Err(Error::config(format!(
            "model layout {} does not match dataset layout {}",
            model.layout.id, dataset.layout.id
        )));
    }
    if dataset.manifest.class_count > model.config.num_classes {
        return Err(Error::config(format!(
            "dataset has {} classes, model only {}",
            dataset.manifest.class_count, model.config.num_classes
        )));
    }
    Ok(())
}

fn prepare(dataset: &Dataset, indices: &[usize], prep: &Preprocess) -> Result<Vec<Tensor>> {
    indices
        .iter()
        .map(|&i| prep.apply(&dataset.sequences[i], &dataset.layout).map(|s| s.data))
        .collect()
}

fn batch_of(cache: &[Tensor], rows: &[usize]) -> Result<Tensor> {
    let items: Vec<&Tensor> = rows.iter().map(|&r| &cache[r]).collect();
    Tensor::stack(&items)
}

fn eval_scores(model: &TgnModel, cache: &[Tensor], batch_size: usize) -> Result<Tensor> {
    let k = model.config.num_classes;
    let mut data = Vec::with_capacity(cache.len() * k);
    let rows: Vec<usize> = (0..cache.len()).collect();
    for chunk in rows.chunks(batch_size) {
        let scores = model.predict(&batch_of(cache, chunk)?)?;
        data.extend_from_slice(softmax(&scores)?.data());
    }
    Tensor::new(vec![cache.len(), k], data)
}

fn metrics(scores: &Tensor, labels: &[usize], split: Split) -> Result<EvalMetrics> {
    let k5 = scores.shape()[1].min(5);
    Ok(EvalMetrics {
        split,
        samples: labels.len(),
        top1: topk_accuracy(scores, labels, 1)?,
        top5: topk_accuracy(scores, labels, k5)?,
    })
}

/// Softmax scores `[N, K]` of one model over a split, in manifest order.
pub fn split_scores(model: &TgnModel, dataset: &Dataset, split: Split, options: &EvalOptions) -> Result<Tensor> {
    check_compatible(model, dataset)?;
    let indices = dataset.manifest.indices(split);
    if indices.is_empty() {
        return Err(Error::EmptyInput(format!("dataset has no {split:?} entries")));
    }
    let prep = Preprocess {
        target_frames: options.target_frames,
        center: options.center,
        stream: model.config.stream,
    };
    let cache = prepare(dataset, &indices, &prep)?;
    eval_scores(model, &cache, options.batch_size.max(1))
}

/// Eval-mode top-1 / top-5 of one model.
pub fn evaluate(model: &TgnModel, dataset: &Dataset, split: Split, options: &EvalOptions) -> Result<EvalMetrics> {
    evaluate_fused(&[(model, 1.0)], dataset, split, options)
}

/// Eval-mode metrics of weighted softmax-score fusion. Each model reads the
/// data through its own stream.
pub fn evaluate_fused(
    members: &[(&TgnModel, f64)],
    dataset: &Dataset,
    split: Split,
    options: &EvalOptions,
) -> Result<EvalMetrics> {
    if members.is_empty() {
        return Err(Error::contract("evaluation needs at least one model"));
    }
    let mut sets = Vec::with_capacity(members.len());
    for (model, _) in members {
        sets.push(split_scores(model, dataset, split, options)?);
    }
    let weights: Vec<f64> = members.iter().map(|(_, w)| *w).collect();
    let fused = fuse_scores(&sets, &weights)?;
    let labels = dataset.labels(&dataset.manifest.indices(split));
    metrics(&fused, &labels, split)
}

fn non_finite_to_loss(err: Error, epoch: usize, batch: usize) -> Error {
    match err {
        Error::NonFinite { .. } => Error::NonFiniteLoss { epoch, batch },
        other => other,
    }
}

fn write_checkpoint(model: &TgnModel, config: &TrainConfig, epoch: usize) -> Result<()> {
    let dir = config
        .checkpoint_dir
        .as_ref()
        .ok_or_else(|| Error::config("checkpoint_every needs checkpoint_dir"))?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_checkpoint(model, &dir.join(format!("epoch_{epoch:04}.json")))
}

/// Cumulative average of the per-batch statistics over one ordered pass.
/// Parameters are not touched.
fn recalibrate_batch_norm(model: &mut TgnModel, cache: &[Tensor], batch_size: usize) -> Result<()> {
    let momentum = model.config.bn_momentum;
    let rows: Vec<usize> = (0..cache.len()).collect();
    for (b, chunk) in rows.chunks(batch_size).enumerate() {
        model.config.bn_momentum = 1.0 / (b + 1) as f64;
        let tape = Tape::new();
        let pass = model.forward_train(&tape, &batch_of(cache, chunk)?);
        if let Err(e) = pass {
            model.config.bn_momentum = momentum;
            return Err(e);
        }
    }
    model.config.bn_momentum = momentum;
    Ok(())
}

/// Minibatch SGD over the dataset's training split. The shuffle order is drawn
/// from `config.seed`, so equal inputs give equal reports.
pub fn train(model: &mut TgnModel, dataset: &Dataset, config: &TrainConfig) -> Result<RunReport> {
    config.validate()?;
    check_compatible(model, dataset)?;
    let start = Instant::now();
    let indices = dataset.manifest.indices(Split::Train);
    if indices.is_empty() {
        return Err(Error::EmptyInput("dataset has no training entries".into()));
    }
    let prep = config.preprocess(model.config.stream);
    let cache = prepare(dataset, &indices, &prep)?;
    let labels = dataset.labels(&indices);

    let mut optimizer = OptimizerState::for_config(&model.params, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..cache.len()).collect();
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let lr = lr_at(epoch, config);
        let (mut loss_sum, mut hits) = (0.0, 0usize);
        for (b, rows) in order.chunks(config.batch_size).enumerate() {
            let x = batch_of(&cache, rows)?;
            let y: Vec<usize> = rows.iter().map(|&r| labels[r]).collect();
            let tape = Tape::new();
            let out = model.forward_train(&tape, &x).map_err(|e| non_finite_to_loss(e, epoch, b))?;
            let loss = cross_entropy_loss(out.scores, &y).map_err(|e| non_finite_to_loss(e, epoch, b))?;
            let value = loss.value().item()?;
            if !value.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            let scores = out.scores.value();
            let k = scores.shape()[1];
            hits += scores
                .data()
                .chunks(k)
                .zip(&y)
                .filter(|(row, &l)| label_rank(row, l) == 0)
                .count();
            loss_sum += value * rows.len() as f64;
            model.params.zero_grad();
            tape.backward(loss, Some(&mut model.params))
                .map_err(|e| non_finite_to_loss(e, epoch, b))?;
            sgd_nesterov_step(&mut model.params, &mut optimizer, lr)?;
        }
        epochs.push(EpochRecord {
            epoch,
            lr,
            loss: loss_sum / cache.len() as f64,
            train_top1: hits as f64 / cache.len() as f64,
        });
        if (epoch + 1) % config.checkpoint_every.unwrap_or(usize::MAX) == 0 && epoch + 1 < config.epochs {
            write_checkpoint(model, config, epoch + 1)?;
        }
    }

    if config.recalibrate_bn {
        recalibrate_batch_norm(model, &cache, config.batch_size)
            .map_err(|e| non_finite_to_loss(e, config.epochs, 0))?;
    }
    if config.checkpoint_every.is_some() {
        write_checkpoint(model, config, config.epochs)?;
    }
    let final_scores = eval_scores(model, &cache, config.batch_size)?;
    let final_train = metrics(&final_scores, &labels, Split::Train)?;
    let options = EvalOptions::from(config);
    let eval = if dataset.manifest.indices(Split::Test).is_empty() {
        None
    } else {
        Some(evaluate(model, dataset, Split::Test, &options)?)
    };
    let persons = dataset.layout.max_persons;
    let macs = count_flops(
        model,
        InputShape {
            batch: 1,
            frames: config.target_frames,
            persons,
        },
    )?;
    Ok(RunReport {
        model: model.config.clone(),
        train: config.clone(),
        params: count_params(model).total,
        macs: macs.total,
        epochs,
        final_train,
        eval,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}
