//! BPR training: pairwise triple sampling, stable loss evaluation, an
//! analytic backward pass, bias-corrected Adam and early stopping on
//! recall@K.
//!
//! The backward pass never differentiates stored forward intermediates.
//! Because the propagation operator A is symmetric and the final embedding
//! is the uniform average of A^0..A^L applied to the parameters, the
//! gradient with respect to the parameters is the same averaged operator
//! polynomial applied to the output gradient. That keeps the memory cost of
//! a step at two stacked matrices regardless of depth.

use crate::dataset::InteractionDataset;
use crate::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate, MetricsReport};
use crate::graph::NormalizedGraphs;
use crate::math;
use crate::model::{apply_operator, init_embeddings, propagate, EmbeddingTable, PropagationTrace};
use crate::rng::{Rng, SplitMix64};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// One BPR comparison: the user prefers `pos_item` (observed) over
/// `neg_item` (unobserved).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainTriple {
    pub user: usize,
    pub pos_item: usize,
    pub neg_item: usize,
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub layers: usize,
    pub dim: usize,
    pub batch_size: usize,
    pub eval_k: usize,
    pub patience_epochs: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            l2_lambda: 1e-5,
            layers: 3,
            dim: 64,
            batch_size: 2048,
            eval_k: 20,
            patience_epochs: 50,
            max_epochs: 1000,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, ok: bool) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive")))
            }
        }
        positive("learning_rate", self.learning_rate > 0.0)?;
        positive("l2_lambda", self.l2_lambda >= 0.0)?;
        positive("dim", self.dim >= 1)?;
        positive("batch_size", self.batch_size >= 1)?;
        positive("eval_k", self.eval_k >= 1)?;
        positive("patience_epochs", self.patience_epochs >= 1)?;
        positive("max_epochs", self.max_epochs >= 1)?;
        if self.patience_epochs >= self.max_epochs {
            return Err(Error::InvalidConfig(String::from(
                "patience_epochs must be smaller than max_epochs",
            )));
        }
        Ok(())
    }
}

/// First/second moment estimates for both embedding blocks.
#[derive(Clone, Debug)]
pub struct AdamState {
    m_user: DenseMatrix,
    v_user: DenseMatrix,
    m_item: DenseMatrix,
    v_item: DenseMatrix,
    step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(n_users: usize, n_items: usize, dim: usize) -> Self {
        Self {
            m_user: DenseMatrix::zeros(n_users, dim),
            v_user: DenseMatrix::zeros(n_users, dim),
            m_item: DenseMatrix::zeros(n_items, dim),
            v_item: DenseMatrix::zeros(n_items, dim),
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }
}

/// Loss gradients laid out exactly like the parameter table.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub user: DenseMatrix,
    pub item: DenseMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub recall: f64,
    pub precision: f64,
    pub ndcg: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + math::exp(-x))
    } else {
        let e = math::exp(x);
        e / (1.0 + e)
    }
}

/// -ln sigmoid(x) = softplus(-x), computed without overflow for |x| in the
/// hundreds.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x <= 0.0 {
        -x + math::log1p(math::exp(x))
    } else {
        math::log1p(math::exp(-x))
    }
}

/// Draws one (user, positive, negative) triple per training interaction.
/// Negatives are uniform over the item universe, rejection-resampled until
/// they fall outside the user's observed set.
pub fn sample_epoch(train: &InteractionDataset, rng_seed: u64) -> Result<Vec<TrainTriple>> {
    let n_items = train.n_items();
    for u in 0..train.n_users() {
        if !train.items_of(u).is_empty() && train.items_of(u).len() >= n_items {
            return Err(Error::UserExhaustsItems { user: u });
        }
    }
    let mut rng = Rng::new(rng_seed);
    let mut triples = Vec::with_capacity(train.n_interactions());
    for user in 0..train.n_users() {
        for &pos_item in train.items_of(user) {
            let neg_item = loop {
                let candidate = rng.next_below(n_items);
                if !train.contains(user, candidate) {
                    break candidate;
                }
            };
            triples.push(TrainTriple {
                user,
                pos_item,
                neg_item,
            });
        }
    }
    Ok(triples)
}

/// Pairwise ranking loss over one batch: sum of -ln sigmoid(pos - neg) plus
/// the full L2 penalty on the parameter table.
pub fn bpr_loss(pos_scores: &[f64], neg_scores: &[f64], phi: &EmbeddingTable, l2: f64) -> f64 {
    assert_eq!(
        pos_scores.len(),
        neg_scores.len(),
        "bpr_loss: score arrays must pair up"
    );
    let pairwise: f64 = pos_scores
        .iter()
        .zip(neg_scores.iter())
        .map(|(&p, &n)| neg_log_sigmoid(p - n))
        .sum();
    pairwise + l2 * phi.norm_sq()
}

fn batch_scores(
    batch: &[TrainTriple],
    e_star: &DenseMatrix,
    n_users: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut pos = Vec::with_capacity(batch.len());
    let mut neg = Vec::with_capacity(batch.len());
    for t in batch {
        let user_row = e_star.row(t.user);
        pos.push(dot(user_row, e_star.row(n_users + t.pos_item)));
        neg.push(dot(user_row, e_star.row(n_users + t.neg_item)));
    }
    (pos, neg)
}

/// Analytic gradient of the batch loss with respect to the parameter table.
///
/// Per triple, with margin s = y_ui - y_uj and g = sigmoid(s) - 1:
/// the final-embedding gradient receives g*(e_i - e_j) at the user row,
/// g*e_u at the positive item row and -g*e_u at the negative item row.
/// Pulling that back through the averaged operator polynomial and adding
/// the 2*lambda*phi regularizer term yields the parameter gradient.
pub fn backward(
    batch: &[TrainTriple],
    trace: &PropagationTrace,
    g: &NormalizedGraphs,
    phi: &EmbeddingTable,
    l2: f64,
) -> Result<Gradients> {
    let n = phi.n_users();
    let m = phi.n_items();
    let d = phi.dim();
    let e_star = &trace.final_embed;
    if e_star.n_rows() != n + m || e_star.n_cols() != d {
        return Err(Error::DimensionMismatch {
            op: "backward",
            left_rows: n + m,
            left_cols: d,
            right_rows: e_star.n_rows(),
            right_cols: e_star.n_cols(),
        });
    }
    if g.n_users() != n || g.n_items() != m {
        return Err(Error::DimensionMismatch {
            op: "backward",
            left_rows: n,
            left_cols: m,
            right_rows: g.n_users(),
            right_cols: g.n_items(),
        });
    }

    let mut grad_star = DenseMatrix::zeros(n + m, d);
    for t in batch {
        let margin = dot(e_star.row(t.user), e_star.row(n + t.pos_item))
            - dot(e_star.row(t.user), e_star.row(n + t.neg_item));
        let coeff = sigmoid(margin) - 1.0;
        for col in 0..d {
            let eu = e_star.get(t.user, col);
            let ei = e_star.get(n + t.pos_item, col);
            let ej = e_star.get(n + t.neg_item, col);
            grad_star.row_mut(t.user)[col] += coeff * (ei - ej);
            grad_star.row_mut(n + t.pos_item)[col] += coeff * eu;
            grad_star.row_mut(n + t.neg_item)[col] -= coeff * eu;
        }
    }

    // d(loss)/d(phi) = (1 / (L + 1)) * sum_{l=0..L} A^l * grad_star,
    // relying on A being self-adjoint.
    let mut power = grad_star.clone();
    let mut total = grad_star;
    for _ in 1..trace.layers.len() {
        power = apply_operator(g, &power)?;
        total.add_assign(&power);
    }
    total.scale(1.0 / trace.layers.len() as f64);

    let mut user = total.rows(0, n);
    let mut item = total.rows(n, m);
    user.add_scaled(phi.user_embed(), 2.0 * l2);
    item.add_scaled(phi.item_embed(), 2.0 * l2);
    Ok(Gradients { user, item })
}

/// One bias-corrected Adam update over both embedding blocks. Rejects
/// non-finite gradients so divergence surfaces instead of propagating NaN
/// into the parameters.
pub fn adam_step(
    phi: &mut EmbeddingTable,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if !grads.user.same_shape(phi.user_embed()) || !grads.item.same_shape(phi.item_embed()) {
        return Err(Error::DimensionMismatch {
            op: "adam_step",
            left_rows: phi.user_embed().n_rows(),
            left_cols: phi.user_embed().n_cols(),
            right_rows: grads.user.n_rows(),
            right_cols: grads.user.n_cols(),
        });
    }
    for (block, grad) in [("user", &grads.user), ("item", &grads.item)] {
        for (idx, &v) in grad.data().iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteGradient {
                    block,
                    row: idx / grad.n_cols(),
                    col: idx % grad.n_cols(),
                });
            }
        }
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bias1 = 1.0 - math::pow(state.beta1, t as f64);
    let bias2 = 1.0 - math::pow(state.beta2, t as f64);
    let update_block = |param: &mut DenseMatrix,
                        grad: &DenseMatrix,
                        m: &mut DenseMatrix,
                        v: &mut DenseMatrix| {
        let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
        for i in 0..param.data().len() {
            let g = grad.data()[i];
            let m_new = b1 * m.data()[i] + (1.0 - b1) * g;
            let v_new = b2 * v.data()[i] + (1.0 - b2) * g * g;
            m.data_mut()[i] = m_new;
            v.data_mut()[i] = v_new;
            let m_hat = m_new / bias1;
            let v_hat = v_new / bias2;
            param.data_mut()[i] -= lr * m_hat / (math::sqrt(v_hat) + eps);
        }
    };
    update_block(
        phi.user_embed_mut(),
        &grads.user,
        &mut state.m_user,
        &mut state.v_user,
    );
    update_block(
        phi.item_embed_mut(),
        &grads.item,
        &mut state.m_item,
        &mut state.v_item,
    );
    Ok(())
}

fn epoch_seed(seed: u64, epoch: usize, stream: u64) -> u64 {
    let mut sm = SplitMix64::new(seed ^ stream);
    let base = sm.next_u64();
    let mut sm2 = SplitMix64::new(base.wrapping_add(epoch as u64));
    sm2.next_u64()
}

const SAMPLE_STREAM: u64 = 0x73616d70; // "samp"
const SHUFFLE_STREAM: u64 = 0x73687566; // "shuf"

/// The generic epoch loop. `eval_epoch` scores the current parameters after
/// each epoch (the standard entry points pass ranking evaluation on a test
/// set; tests may inject stubs), `on_epoch` observes each record together
/// with the best epoch so far.
///
/// Stops when recall has not strictly exceeded the running best for
/// `patience_epochs` consecutive epochs, or at `max_epochs`; returns the
/// parameter snapshot from the best epoch.
pub fn train_loop<E, P>(
    train_ds: &InteractionDataset,
    g: &NormalizedGraphs,
    cfg: &TrainConfig,
    mut eval_epoch: E,
    mut on_epoch: P,
) -> Result<(EmbeddingTable, TrainHistory)>
where
    E: FnMut(usize, &EmbeddingTable) -> Result<MetricsReport>,
    P: FnMut(&EpochRecord, usize),
{
    cfg.validate()?;
    let mut phi = init_embeddings(train_ds.n_users(), train_ds.n_items(), cfg.dim, cfg.seed);
    let mut state = AdamState::new(train_ds.n_users(), train_ds.n_items(), cfg.dim);
    let mut history = TrainHistory::default();
    let mut best_recall = f64::NEG_INFINITY;
    let mut best_phi = phi.clone();

    for epoch in 1..=cfg.max_epochs {
        let mut triples = sample_epoch(train_ds, epoch_seed(cfg.seed, epoch, SAMPLE_STREAM))?;
        let mut shuffle_rng = Rng::new(epoch_seed(cfg.seed, epoch, SHUFFLE_STREAM));
        shuffle_rng.shuffle(&mut triples);

        let mut loss_sum = 0.0;
        let mut n_batches = 0usize;
        for batch in triples.chunks(cfg.batch_size) {
            let trace = propagate(&phi, g, cfg.layers)?;
            let (pos, neg) = batch_scores(batch, &trace.final_embed, train_ds.n_users());
            loss_sum += bpr_loss(&pos, &neg, &phi, cfg.l2_lambda);
            let grads = backward(batch, &trace, g, &phi, cfg.l2_lambda)?;
            adam_step(&mut phi, &grads, &mut state, cfg.learning_rate)?;
            n_batches += 1;
        }

        let report = eval_epoch(epoch, &phi)?;
        let record = EpochRecord {
            epoch,
            loss: if n_batches > 0 {
                loss_sum / n_batches as f64
            } else {
                0.0
            },
            recall: report.recall,
            precision: report.precision,
            ndcg: report.ndcg,
        };
        if record.recall > best_recall {
            best_recall = record.recall;
            history.best_epoch = epoch;
            best_phi = phi.clone();
        }
        on_epoch(&record, history.best_epoch);
        history.epochs.push(record);
        if epoch - history.best_epoch >= cfg.patience_epochs {
            history.stopped_early = true;
            break;
        }
    }
    Ok((best_phi, history))
}

/// Trains on `train_ds` with ranking evaluation against `test_ds` after
/// every epoch. Graphs must be built from training data only.
pub fn train(
    train_ds: &InteractionDataset,
    test_ds: &InteractionDataset,
    g: &NormalizedGraphs,
    cfg: &TrainConfig,
) -> Result<(EmbeddingTable, TrainHistory)> {
    train_with_progress(train_ds, test_ds, g, cfg, |_, _| {})
}

/// Like [`train`], forwarding each epoch record (and the best epoch so far)
/// to `on_epoch` for progress reporting.
pub fn train_with_progress<P>(
    train_ds: &InteractionDataset,
    test_ds: &InteractionDataset,
    g: &NormalizedGraphs,
    cfg: &TrainConfig,
    on_epoch: P,
) -> Result<(EmbeddingTable, TrainHistory)>
where
    P: FnMut(&EpochRecord, usize),
{
    let eval = |_epoch: usize, phi: &EmbeddingTable| {
        let trace = propagate(phi, g, cfg.layers)?;
        evaluate(&trace.final_embed, train_ds, test_ds, cfg.eval_k)
    };
    train_loop(train_ds, g, cfg, eval, on_epoch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{build_variant, ModelVariant};
    use crate::dataset::{ingest, RawInteractionLog};
    use crate::graph::WeightConfig;
    use alloc::vec;

    fn dataset(pairs: &[(usize, usize)]) -> InteractionDataset {
        let records: Vec<(String, String)> = pairs
            .iter()
            .map(|&(u, i)| (format!("u{u}"), format!("i{i}")))
            .collect();
        ingest(&RawInteractionLog::new(records)).unwrap()
    }

    #[test]
    fn sample_forced_negative() {
        // Two items total, each user holding one: every negative is forced.
        let ds = dataset(&[(0, 0), (1, 1)]);
        let triples = sample_epoch(&ds, 3).unwrap();
        assert_eq!(
            triples,
            vec![
                TrainTriple {
                    user: 0,
                    pos_item: 0,
                    neg_item: 1
                },
                TrainTriple {
                    user: 1,
                    pos_item: 1,
                    neg_item: 0
                },
            ]
        );
    }

    #[test]
    fn sample_one_triple_per_interaction() {
        let mut pairs = Vec::new();
        for u in 0..10 {
            for i in 0..20 {
                if (u * 7 + i) % 2 == 0 {
                    pairs.push((u, i));
                }
            }
        }
        let ds = dataset(&pairs);
        let triples = sample_epoch(&ds, 11).unwrap();
        assert_eq!(triples.len(), ds.n_interactions());
    }

    #[test]
    fn sample_rejects_saturated_user() {
        let ds = dataset(&[(0, 0), (0, 1), (1, 0)]);
        assert_eq!(
            sample_epoch(&ds, 1).unwrap_err(),
            Error::UserExhaustsItems { user: 0 }
        );
    }

    #[test]
    fn sampled_negatives_never_observed() {
        let mut pairs = Vec::new();
        for u in 0..8 {
            for i in 0..15 {
                if (u + 2 * i) % 3 == 0 {
                    pairs.push((u, i));
                }
            }
        }
        let ds = dataset(&pairs);
        for seed in 0..10 {
            for t in sample_epoch(&ds, seed).unwrap() {
                assert!(ds.contains(t.user, t.pos_item));
                assert!(!ds.contains(t.user, t.neg_item));
            }
        }
    }

    #[test]
    fn loss_zero_margin_is_ln_two() {
        let phi = init_embeddings(1, 2, 2, 0);
        let loss = bpr_loss(&[0.3], &[0.3], &phi, 0.0);
        assert!((loss - core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn loss_saturated_is_tiny() {
        let phi = init_embeddings(1, 2, 2, 0);
        assert!(bpr_loss(&[20.0], &[0.0], &phi, 0.0) < 1e-8);
    }

    #[test]
    fn loss_hand_case_with_regularizer() {
        // phi with norm_sq = 4: four entries of 1.
        let phi = EmbeddingTable::from_parts(
            DenseMatrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap(),
            DenseMatrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let loss = bpr_loss(&[1.0], &[0.5], &phi, 0.1);
        assert!((loss - 0.874077).abs() < 1e-6);
    }

    #[test]
    fn loss_no_overflow_at_extreme_margins() {
        let phi = init_embeddings(1, 2, 2, 0);
        assert!(bpr_loss(&[-700.0], &[0.0], &phi, 0.0).is_finite());
        assert!(bpr_loss(&[700.0], &[0.0], &phi, 0.0).is_finite());
    }

    #[test]
    fn backward_zero_margin_hand_case() {
        // L = 0, lambda = 0, single triple with equal scores.
        let ds = dataset(&[(0, 0), (0, 2), (1, 1), (1, 0)]);
        let (g, _) = build_variant(
            ModelVariant::BprMf,
            &ds,
            &TrainConfig::default(),
            &WeightConfig::default(),
        )
        .unwrap();
        let phi = EmbeddingTable::from_parts(
            DenseMatrix::from_vec(2, 2, vec![0.5, -0.25, 0.0, 0.0]).unwrap(),
            DenseMatrix::from_vec(3, 2, vec![0.1, 0.2, 0.3, 0.4, 0.1, 0.2]).unwrap(),
        )
        .unwrap();
        // items 0 and 2 have identical embeddings, so the margin is zero.
        let trace = propagate(&phi, &g, 0).unwrap();
        let batch = [TrainTriple {
            user: 0,
            pos_item: 0,
            neg_item: 2,
        }];
        let grads = backward(&batch, &trace, &g, &phi, 0.0).unwrap();
        // d/d e_u = -1/2 (e_i - e_j) = 0 here; d/d e_i = -1/2 e_u; d/d e_j = +1/2 e_u.
        assert_eq!(grads.user.row(0), &[0.0, 0.0]);
        assert_eq!(grads.item.row(0), &[-0.25, 0.125]);
        assert_eq!(grads.item.row(2), &[0.25, -0.125]);
        assert_eq!(grads.item.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn backward_empty_batch_is_pure_regularizer() {
        let ds = dataset(&[(0, 0), (0, 1), (1, 1), (1, 2)]);
        let cfg = TrainConfig {
            layers: 2,
            dim: 3,
            ..TrainConfig::default()
        };
        let (g, _) = build_variant(ModelVariant::CombiGcn, &ds, &cfg, &WeightConfig::default())
            .unwrap();
        let phi = init_embeddings(2, 3, 3, 9);
        let trace = propagate(&phi, &g, 2).unwrap();
        let l2 = 0.01;
        let grads = backward(&[], &trace, &g, &phi, l2).unwrap();
        for (got, want) in grads
            .user
            .data()
            .iter()
            .zip(phi.user_embed().data().iter())
        {
            assert_eq!(*got, 2.0 * l2 * want);
        }
        for (got, want) in grads
            .item
            .data()
            .iter()
            .zip(phi.item_embed().data().iter())
        {
            assert_eq!(*got, 2.0 * l2 * want);
        }
    }

    #[test]
    fn adam_zero_gradient_is_fixed_point() {
        let mut phi = init_embeddings(2, 2, 2, 1);
        let before = phi.clone();
        let mut state = AdamState::new(2, 2, 2);
        let grads = Gradients {
            user: DenseMatrix::zeros(2, 2),
            item: DenseMatrix::zeros(2, 2),
        };
        adam_step(&mut phi, &grads, &mut state, 0.01).unwrap();
        assert_eq!(phi, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn adam_first_step_is_signed_learning_rate() {
        let mut phi = EmbeddingTable::from_parts(
            DenseMatrix::from_vec(1, 1, vec![1.0]).unwrap(),
            DenseMatrix::from_vec(1, 1, vec![1.0]).unwrap(),
        )
        .unwrap();
        let mut state = AdamState::new(1, 1, 1);
        let grads = Gradients {
            user: DenseMatrix::from_vec(1, 1, vec![5.0]).unwrap(),
            item: DenseMatrix::from_vec(1, 1, vec![-5.0]).unwrap(),
        };
        adam_step(&mut phi, &grads, &mut state, 0.01).unwrap();
        // m_hat = g, v_hat = g^2 => step = lr * g / (|g| + eps) ~ lr * sign(g)
        assert!((phi.user_embed().get(0, 0) - (1.0 - 0.01)).abs() < 1e-8);
        assert!((phi.item_embed().get(0, 0) - (1.0 + 0.01)).abs() < 1e-8);
    }

    #[test]
    fn adam_converges_on_scalar_quadratic() {
        // minimize (x - 3)^2 from x = 2.9 with the user block holding x.
        let mut phi = EmbeddingTable::from_parts(
            DenseMatrix::from_vec(1, 1, vec![2.9]).unwrap(),
            DenseMatrix::from_vec(1, 1, vec![0.0]).unwrap(),
        )
        .unwrap();
        let mut state = AdamState::new(1, 1, 1);
        for _ in 0..100 {
            let x = phi.user_embed().get(0, 0);
            let grads = Gradients {
                user: DenseMatrix::from_vec(1, 1, vec![2.0 * (x - 3.0)]).unwrap(),
                item: DenseMatrix::zeros(1, 1),
            };
            adam_step(&mut phi, &grads, &mut state, 0.1).unwrap();
        }
        assert!((phi.user_embed().get(0, 0) - 3.0).abs() < 1e-3);
    }

    #[test]
    fn adam_rejects_non_finite_gradient() {
        let mut phi = init_embeddings(1, 1, 1, 0);
        let mut state = AdamState::new(1, 1, 1);
        let grads = Gradients {
            user: DenseMatrix::from_vec(1, 1, vec![1.0]).unwrap(),
            item: DenseMatrix::from_vec(1, 1, vec![f64::NAN]).unwrap(),
        };
        assert!(matches!(
            adam_step(&mut phi, &grads, &mut state, 0.1).unwrap_err(),
            Error::NonFiniteGradient { block: "item", .. }
        ));
    }

    #[test]
    fn early_stop_arithmetic_with_stubbed_recall() {
        let ds = dataset(&[(0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2)]);
        let cfg = TrainConfig {
            dim: 2,
            layers: 1,
            patience_epochs: 50,
            max_epochs: 1000,
            ..TrainConfig::default()
        };
        let (g, cfg) = build_variant(ModelVariant::CombiGcn, &ds, &cfg, &WeightConfig::default())
            .unwrap();
        let mut snapshots: Vec<(usize, EmbeddingTable)> = Vec::new();
        let stub = |epoch: usize, phi: &EmbeddingTable| {
            snapshots.push((epoch, phi.clone()));
            let recall = if epoch <= 12 { epoch as f64 } else { 12.0 };
            Ok(MetricsReport {
                k: cfg.eval_k,
                precision: 0.0,
                recall,
                ndcg: 0.0,
                n_evaluated_users: 1,
            })
        };
        let (best_phi, history) = train_loop(&ds, &g, &cfg, stub, |_, _| {}).unwrap();
        assert_eq!(history.best_epoch, 12);
        assert_eq!(history.epochs.len(), 62);
        assert!(history.stopped_early);
        let at_best = snapshots.iter().find(|(e, _)| *e == 12).unwrap();
        assert_eq!(best_phi, at_best.1);
    }

    #[test]
    fn training_history_is_deterministic() {
        let mut pairs = Vec::new();
        for u in 0..6 {
            for i in 0..10 {
                if (u + i) % 2 == 0 {
                    pairs.push((u, i));
                }
            }
        }
        let ds = dataset(&pairs);
        let (train_ds, test_ds) = crate::preprocess::split(&ds, 0.8, 7);
        let cfg = TrainConfig {
            dim: 4,
            max_epochs: 5,
            patience_epochs: 4,
            eval_k: 3,
            ..TrainConfig::default()
        };
        let (g, cfg) = build_variant(
            ModelVariant::CombiGcn,
            &train_ds,
            &cfg,
            &WeightConfig::default(),
        )
        .unwrap();
        let (phi_a, hist_a) = train(&train_ds, &test_ds, &g, &cfg).unwrap();
        let (phi_b, hist_b) = train(&train_ds, &test_ds, &g, &cfg).unwrap();
        assert_eq!(hist_a, hist_b);
        assert_eq!(phi_a, phi_b);
    }

    #[test]
    fn loss_is_permutation_invariant_within_full_batch() {
        let mut pairs = Vec::new();
        for u in 0..5 {
            for i in 0..7 {
                if (u * 2 + i) % 3 != 0 {
                    pairs.push((u, i));
                }
            }
        }
        let ds = dataset(&pairs);
        let cfg = TrainConfig {
            dim: 3,
            layers: 2,
            ..TrainConfig::default()
        };
        let (g, cfg) = build_variant(ModelVariant::CombiGcn, &ds, &cfg, &WeightConfig::default())
            .unwrap();
        let phi = init_embeddings(ds.n_users(), ds.n_items(), cfg.dim, 5);
        let trace = propagate(&phi, &g, cfg.layers).unwrap();
        let mut triples = sample_epoch(&ds, 17).unwrap();
        let (pos, neg) = batch_scores(&triples, &trace.final_embed, ds.n_users());
        let loss_fwd = bpr_loss(&pos, &neg, &phi, 0.0);
        triples.reverse();
        let (pos_r, neg_r) = batch_scores(&triples, &trace.final_embed, ds.n_users());
        let loss_rev = bpr_loss(&pos_r, &neg_r, &phi, 0.0);
        assert!((loss_fwd - loss_rev).abs() < 1e-10);
    }
}
