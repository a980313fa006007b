//! The prediction model: embeddings, feature merging, user preference,
//! shared/expert networks with per-task gates, and the two heads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::data::{NEED_COUNT, WAY_COUNT};
use crate::error::{Error, Result};
use crate::features::{ContextFeatureVector, EncodedScene, GroupFeatureVector};
use crate::model::config::{ModelConfig, Variant};
use crate::model::scores::PredictionScores;
use crate::nn::{
    kernels, relu, relu_backward, softmax_rows, BatchNormCache, BatchNormLayer, GradientSet,
    LinearLayer, Tensor,
};

/// Linear layer followed by batch normalization and ReLU.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseBlock {
    pub linear: LinearLayer,
    pub bn: BatchNormLayer,
}

/// Per-batch cache of a dense block's intermediates.
#[derive(Debug, Clone)]
struct DenseBlockCache {
    input: Tensor,
    bn_cache: BatchNormCache,
    bn_out: Tensor,
}

impl DenseBlock {
    fn init<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        DenseBlock {
            linear: LinearLayer::init(in_dim, out_dim, rng),
            bn: BatchNormLayer::new(out_dim),
        }
    }

    fn forward_train(&mut self, x: Tensor) -> Result<(Tensor, DenseBlockCache)> {
        let pre = self.linear.forward(&x)?;
        let (bn_out, bn_cache) = self.bn.forward_train(&pre)?;
        let out = relu(&bn_out);
        Ok((out, DenseBlockCache { input: x, bn_cache, bn_out }))
    }

    fn forward_infer(&self, x: &Tensor) -> Result<Tensor> {
        let pre = self.linear.forward(x)?;
        let bn_out = self.bn.forward_infer(&pre)?;
        Ok(relu(&bn_out))
    }

    /// Returns the gradient at the block input and pushes parameter
    /// gradients into `grads` under `prefix`.
    fn backward(
        &self,
        cache: &DenseBlockCache,
        d_out: &Tensor,
        prefix: &str,
        grads: &mut GradientSet,
    ) -> Result<Tensor> {
        let d_bn_out = relu_backward(&cache.bn_out, d_out);
        let (d_pre, bn_grads) = self.bn.backward(&cache.bn_cache, &d_bn_out)?;
        let (d_in, lin_grads) = self.linear.backward(&cache.input, &d_pre)?;
        grads.insert(format!("{prefix}.weight"), lin_grads.weight);
        grads.insert(format!("{prefix}.bias"), lin_grads.bias);
        grads.insert(format!("{prefix}.bn.gamma"), bn_grads.gamma);
        grads.insert(format!("{prefix}.bn.beta"), bn_grads.beta);
        Ok(d_in)
    }
}

/// One embedding table per categorical family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Embeddings {
    pub age: Tensor,
    pub gender: Tensor,
    pub city: Tensor,
    pub poi: Tensor,
    pub aoi: Tensor,
    pub clicked: Tensor,
    pub ordered: Tensor,
}

impl Embeddings {
    fn init<R: Rng>(config: &ModelConfig, rng: &mut R) -> Self {
        let e = config.embedding_dim;
        let table = |vocab: usize, rng: &mut R| {
            let limit = (6.0 / (vocab + e) as f64).sqrt();
            let data = (0..vocab * e).map(|_| rng.gen_range(-limit..limit)).collect();
            Tensor::new(vec![vocab, e], data).expect("sized")
        };
        Embeddings {
            age: table(crate::data::AGE_BAND_COUNT, rng),
            gender: table(crate::data::GENDER_COUNT, rng),
            city: table(config.city_vocab, rng),
            poi: table(config.poi_vocab, rng),
            aoi: table(config.aoi_vocab, rng),
            clicked: table(NEED_COUNT, rng),
            ordered: table(NEED_COUNT, rng),
        }
    }
}

/// All trainable parameters of the prediction model plus its configuration.
#[derive(Debug, Clone)]
pub struct NeonModel {
    pub config: ModelConfig,
    pub embeddings: Embeddings,
    pub merge: DenseBlock,
    pub user: DenseBlock,
    pub expert_shared: DenseBlock,
    pub expert_need: DenseBlock,
    pub expert_way: DenseBlock,
    /// Gate weights for the need task, `2 × fused_dim`.
    pub gate_need: Tensor,
    /// Gate weights for the way task, `2 × fused_dim`.
    pub gate_way: Tensor,
    pub head_need: LinearLayer,
    pub head_way_hidden: LinearLayer,
    pub head_way_out: LinearLayer,
}

/// Everything a forward pass computed, cached for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardActivations {
    pub v_user: Tensor,
    pub ctx_resolved: Tensor,
    merge_cache: DenseBlockCache,
    user_cache: DenseBlockCache,
    /// Fused scene representation `[x_merge, x_user]`.
    pub x: Tensor,
    shared_cache: DenseBlockCache,
    need_cache: DenseBlockCache,
    way_cache: DenseBlockCache,
    pub e_shared: Tensor,
    pub e_need: Tensor,
    pub e_way: Tensor,
    /// Softmax gate outputs per row (each row a 2-simplex).
    pub gate_need_out: Tensor,
    pub gate_way_out: Tensor,
    pub z_need: Tensor,
    pub z_way: Tensor,
    head_need_in: Tensor,
    way_hidden_pre_relu: Tensor,
    way_hidden: Tensor,
    pub s_need: Tensor,
    pub s_way: Tensor,
}

fn gate_init<R: Rng>(d: usize, rng: &mut R) -> Tensor {
    let limit = (6.0 / (d + 2) as f64).sqrt();
    let data = (0..2 * d).map(|_| rng.gen_range(-limit..limit)).collect();
    Tensor::new(vec![2, d], data).expect("sized")
}

impl NeonModel {
    /// Builds a model with seed-deterministic initialization.
    pub fn init(config: ModelConfig, seed: u64) -> Result<NeonModel> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.fused_dim();
        Ok(NeonModel {
            embeddings: Embeddings::init(&config, &mut rng),
            merge: DenseBlock::init(config.merge_in_dim(), config.merge_dim, &mut rng),
            user: DenseBlock::init(config.user_raw_dim(), config.user_dim, &mut rng),
            expert_shared: DenseBlock::init(d, config.expert_dim, &mut rng),
            expert_need: DenseBlock::init(d, config.expert_dim, &mut rng),
            expert_way: DenseBlock::init(d, config.expert_dim, &mut rng),
            gate_need: gate_init(d, &mut rng),
            gate_way: gate_init(d, &mut rng),
            head_need: LinearLayer::init(config.expert_dim, NEED_COUNT, &mut rng),
            head_way_hidden: LinearLayer::init(config.expert_dim, config.way_hidden_dim, &mut rng),
            head_way_out: LinearLayer::init(config.way_hidden_dim, WAY_COUNT, &mut rng),
            config,
        })
    }

    /// Every trainable parameter in a fixed name order.
    pub fn named_params(&self) -> Vec<(String, &Tensor)> {
        let mut out: Vec<(String, &Tensor)> = vec![
            ("embed.age".into(), &self.embeddings.age),
            ("embed.gender".into(), &self.embeddings.gender),
            ("embed.city".into(), &self.embeddings.city),
            ("embed.poi".into(), &self.embeddings.poi),
            ("embed.aoi".into(), &self.embeddings.aoi),
            ("embed.clicked".into(), &self.embeddings.clicked),
            ("embed.ordered".into(), &self.embeddings.ordered),
        ];
        for (name, b) in [
            ("merge", &self.merge),
            ("user", &self.user),
            ("expert_shared", &self.expert_shared),
            ("expert_need", &self.expert_need),
            ("expert_way", &self.expert_way),
        ] {
            out.push((format!("{name}.weight"), &b.linear.weight));
            out.push((format!("{name}.bias"), &b.linear.bias));
            out.push((format!("{name}.bn.gamma"), &b.bn.gamma));
            out.push((format!("{name}.bn.beta"), &b.bn.beta));
        }
        out.push(("gate_need".into(), &self.gate_need));
        out.push(("gate_way".into(), &self.gate_way));
        out.push(("head_need.weight".into(), &self.head_need.weight));
        out.push(("head_need.bias".into(), &self.head_need.bias));
        out.push(("head_way.hidden.weight".into(), &self.head_way_hidden.weight));
        out.push(("head_way.hidden.bias".into(), &self.head_way_hidden.bias));
        out.push(("head_way.out.weight".into(), &self.head_way_out.weight));
        out.push(("head_way.out.bias".into(), &self.head_way_out.bias));
        out
    }

    /// Mutable references to every trainable parameter, keyed by name.
    pub fn params_mut(&mut self) -> std::collections::BTreeMap<String, &mut Tensor> {
        let mut map: std::collections::BTreeMap<String, &mut Tensor> = Default::default();
        let NeonModel {
            embeddings,
            merge,
            user,
            expert_shared,
            expert_need,
            expert_way,
            gate_need,
            gate_way,
            head_need,
            head_way_hidden,
            head_way_out,
            ..
        } = self;
        map.insert("embed.age".into(), &mut embeddings.age);
        map.insert("embed.gender".into(), &mut embeddings.gender);
        map.insert("embed.city".into(), &mut embeddings.city);
        map.insert("embed.poi".into(), &mut embeddings.poi);
        map.insert("embed.aoi".into(), &mut embeddings.aoi);
        map.insert("embed.clicked".into(), &mut embeddings.clicked);
        map.insert("embed.ordered".into(), &mut embeddings.ordered);
        for (name, b) in [
            ("merge", merge),
            ("user", user),
            ("expert_shared", expert_shared),
            ("expert_need", expert_need),
            ("expert_way", expert_way),
        ] {
            map.insert(format!("{name}.weight"), &mut b.linear.weight);
            map.insert(format!("{name}.bias"), &mut b.linear.bias);
            map.insert(format!("{name}.bn.gamma"), &mut b.bn.gamma);
            map.insert(format!("{name}.bn.beta"), &mut b.bn.beta);
        }
        map.insert("gate_need".into(), gate_need);
        map.insert("gate_way".into(), gate_way);
        map.insert("head_need.weight".into(), &mut head_need.weight);
        map.insert("head_need.bias".into(), &mut head_need.bias);
        map.insert("head_way.hidden.weight".into(), &mut head_way_hidden.weight);
        map.insert("head_way.hidden.bias".into(), &mut head_way_hidden.bias);
        map.insert("head_way.out.weight".into(), &mut head_way_out.weight);
        map.insert("head_way.out.bias".into(), &mut head_way_out.bias);
        map
    }

    /// Non-trainable state tensors (batch-norm running statistics) —
    /// persisted in checkpoints alongside the parameters.
    pub fn named_state(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (name, b) in [
            ("merge", &self.merge),
            ("user", &self.user),
            ("expert_shared", &self.expert_shared),
            ("expert_need", &self.expert_need),
            ("expert_way", &self.expert_way),
        ] {
            out.push((format!("{name}.bn.running_mean"), &b.bn.running_mean));
            out.push((format!("{name}.bn.running_var"), &b.bn.running_var));
        }
        out
    }

    fn family(&self, name: &str) -> &Tensor {
        match name {
            "age" => &self.embeddings.age,
            "gender" => &self.embeddings.gender,
            "city" => &self.embeddings.city,
            "poi" => &self.embeddings.poi,
            "aoi" => &self.embeddings.aoi,
            "clicked" => &self.embeddings.clicked,
            "ordered" => &self.embeddings.ordered,
            _ => unreachable!("unknown embedding family"),
        }
    }

    fn check_index(&self, what: &str, idx: usize, vocab: usize) -> Result<()> {
        if idx >= vocab {
            return Err(Error::Validation(format!(
                "{what} index {idx} out of range for table of {vocab} rows; \
                 the feature schema does not match the model configuration"
            )));
        }
        Ok(())
    }

    /// Embeds one scene's sparse user features into the dense user vector:
    /// per-family embeddings concatenated, multi-valued families mean-pooled,
    /// empty sets contributing zero blocks, and the historical share passed
    /// through as-is.
    pub fn embed_user(&self, user: &crate::features::SparseUserFeatures) -> Result<Vec<f64>> {
        let e = self.config.embedding_dim;
        self.check_index("age", user.age_index, crate::data::AGE_BAND_COUNT)?;
        self.check_index("gender", user.gender_index, crate::data::GENDER_COUNT)?;
        self.check_index("city", user.city_index, self.config.city_vocab)?;
        for &p in &user.top_pois {
            self.check_index("poi", p, self.config.poi_vocab)?;
        }
        for &a in &user.top_aois {
            self.check_index("aoi", a, self.config.aoi_vocab)?;
        }

        let mut out = Vec::with_capacity(self.config.user_raw_dim());
        out.extend_from_slice(self.embeddings.age.row(user.age_index));
        out.extend_from_slice(self.embeddings.gender.row(user.gender_index));
        out.extend_from_slice(self.embeddings.city.row(user.city_index));

        let pool = |table: &Tensor, indices: &mut dyn Iterator<Item = usize>, out: &mut Vec<f64>| {
            let start = out.len();
            out.resize(start + e, 0.0);
            let mut n = 0usize;
            for idx in indices {
                for (slot, &v) in out[start..start + e].iter_mut().zip(table.row(idx)) {
                    *slot += v;
                }
                n += 1;
            }
            if n > 1 {
                for slot in &mut out[start..start + e] {
                    *slot /= n as f64;
                }
            }
        };
        pool(
            &self.embeddings.clicked,
            &mut user.recent_clicked_needs.iter().map(|c| c.code()),
            &mut out,
        );
        pool(
            &self.embeddings.ordered,
            &mut user.recent_ordered_needs.iter().map(|c| c.code()),
            &mut out,
        );
        pool(&self.embeddings.poi, &mut user.top_pois.iter().copied(), &mut out);
        pool(&self.embeddings.aoi, &mut user.top_aois.iter().copied(), &mut out);
        out.extend_from_slice(&user.historical_share);
        debug_assert_eq!(out.len(), self.config.user_raw_dim());
        Ok(out)
    }

    fn embed_user_batch(&self, scenes: &[EncodedScene]) -> Result<Tensor> {
        let dim = self.config.user_raw_dim();
        let mut v = Tensor::zeros(vec![scenes.len(), dim]);
        for (b, scene) in scenes.iter().enumerate() {
            let row = self.embed_user(&scene.user)?;
            v.row_mut(b).copy_from_slice(&row);
        }
        Ok(v)
    }

    /// Resolves context features: dense block plus POI/AOI/city embeddings,
    /// or all zeros under the context ablation.
    fn resolve_context_batch(&self, scenes: &[EncodedScene]) -> Result<Tensor> {
        let e = self.config.embedding_dim;
        let dim = self.config.context_dim();
        let mut out = Tensor::zeros(vec![scenes.len(), dim]);
        if self.config.drop_st {
            return Ok(out);
        }
        for (b, scene) in scenes.iter().enumerate() {
            let ctx = &scene.context;
            if ctx.dense.len() != ContextFeatureVector::DENSE_LEN {
                return Err(Error::shape(
                    "context dense block",
                    &[ContextFeatureVector::DENSE_LEN],
                    &[ctx.dense.len()],
                ));
            }
            self.check_index("poi", ctx.poi_index, self.config.poi_vocab)?;
            self.check_index("aoi", ctx.aoi_index, self.config.aoi_vocab)?;
            self.check_index("city", ctx.city_index, self.config.city_vocab)?;
            let row = out.row_mut(b);
            row[..ContextFeatureVector::DENSE_LEN].copy_from_slice(&ctx.dense);
            let mut at = ContextFeatureVector::DENSE_LEN;
            for (family, idx) in [
                ("poi", ctx.poi_index),
                ("aoi", ctx.aoi_index),
                ("city", ctx.city_index),
            ] {
                row[at..at + e].copy_from_slice(self.family(family).row(idx));
                at += e;
            }
        }
        Ok(out)
    }

    fn group_batch(&self, scenes: &[EncodedScene]) -> Result<Tensor> {
        let mut out = Tensor::zeros(vec![scenes.len(), GroupFeatureVector::LEN]);
        if self.config.drop_group {
            return Ok(out);
        }
        for (b, scene) in scenes.iter().enumerate() {
            if scene.group.0.len() != GroupFeatureVector::LEN {
                return Err(Error::shape(
                    "group feature vector",
                    &[GroupFeatureVector::LEN],
                    &[scene.group.0.len()],
                ));
            }
            out.row_mut(b).copy_from_slice(&scene.group.0);
        }
        Ok(out)
    }

    fn concat(parts: &[&Tensor]) -> Tensor {
        let batch = parts[0].rows();
        let dim: usize = parts.iter().map(|t| t.cols()).sum();
        let mut out = Tensor::zeros(vec![batch, dim]);
        for b in 0..batch {
            let row = out.row_mut(b);
            let mut at = 0;
            for part in parts {
                row[at..at + part.cols()].copy_from_slice(part.row(b));
                at += part.cols();
            }
        }
        out
    }

    fn gate_forward(&self, x: &Tensor, gate: &Tensor) -> Result<Tensor> {
        let d = self.config.fused_dim();
        let batch = x.rows();
        let mut logits = Tensor::zeros(vec![batch, 2]);
        let mut gt = vec![0.0; gate.len()];
        kernels::transpose(gate.data(), &mut gt, 2, d);
        kernels::matmul_xt_accum(x.data(), &gt, logits.data_mut(), d, 2);
        softmax_rows(&logits)
    }

    fn mix(gate: &Tensor, expert: &Tensor, shared: &Tensor) -> Tensor {
        let mut z = Tensor::zeros(vec![expert.rows(), expert.cols()]);
        for b in 0..expert.rows() {
            let (g0, g1) = (gate.row(b)[0], gate.row(b)[1]);
            let zr = z.row_mut(b);
            for ((zv, &ev), &sv) in zr.iter_mut().zip(expert.row(b)).zip(shared.row(b)) {
                *zv = g0 * ev + g1 * sv;
            }
        }
        z
    }

    /// Training-mode forward pass over a batch of encoded scenes. Updates
    /// batch-norm running statistics and returns the activation cache.
    pub fn forward_train(&mut self, scenes: &[EncodedScene]) -> Result<ForwardActivations> {
        if scenes.is_empty() {
            return Err(Error::EmptyInput("forward over empty batch".into()));
        }
        let v_user = self.embed_user_batch(scenes)?;
        let ctx_resolved = self.resolve_context_batch(scenes)?;
        let group = self.group_batch(scenes)?;

        let merge_in = Self::concat(&[&ctx_resolved, &group, &v_user]);
        // ReLU would silently collapse NaN to zero, so inputs are checked up
        // front.
        merge_in.check_finite("model inputs")?;
        let (x_m, merge_cache) = self.merge.forward_train(merge_in)?;
        let (x_u, user_cache) = self.user.forward_train(v_user.clone())?;
        let x = Self::concat(&[&x_m, &x_u]);

        let (e_shared, shared_cache) = self.expert_shared.forward_train(x.clone())?;
        let (e_need, need_cache) = self.expert_need.forward_train(x.clone())?;
        let (e_way, way_cache) = self.expert_way.forward_train(x.clone())?;

        let gate_need_out = self.gate_forward(&x, &self.gate_need)?;
        let gate_way_out = self.gate_forward(&x, &self.gate_way)?;
        let z_need = Self::mix(&gate_need_out, &e_need, &e_shared);
        let z_way = Self::mix(&gate_way_out, &e_way, &e_shared);

        let (head_need_in, way_hidden_pre_relu, way_hidden, s_way);
        match self.config.variant {
            Variant::Multitask => {
                head_need_in = z_need.clone();
                way_hidden_pre_relu = self.head_way_hidden.forward(&z_way)?;
                way_hidden = relu(&way_hidden_pre_relu);
                s_way = self.head_way_out.forward(&way_hidden)?;
            }
            Variant::SingleTaskSum => {
                let mut sum = z_need.clone();
                sum.add_assign(&z_way)?;
                head_need_in = sum;
                way_hidden_pre_relu = Tensor::zeros(vec![scenes.len(), self.config.way_hidden_dim]);
                way_hidden = way_hidden_pre_relu.clone();
                s_way = Tensor::zeros(vec![scenes.len(), WAY_COUNT]);
            }
        }
        let s_need = self.head_need.forward(&head_need_in)?;
        s_need.check_finite("need scores")?;
        s_way.check_finite("way scores")?;

        Ok(ForwardActivations {
            v_user,
            ctx_resolved,
            merge_cache,
            user_cache,
            x,
            shared_cache,
            need_cache,
            way_cache,
            e_shared,
            e_need,
            e_way,
            gate_need_out,
            gate_way_out,
            z_need,
            z_way,
            head_need_in,
            way_hidden_pre_relu,
            way_hidden,
            s_need,
            s_way,
        })
    }

    /// Inference-mode forward pass: deterministic, batch-size independent
    /// per row (batch norm uses running statistics). Returns `(s_need, s_way)`.
    pub fn forward_infer(&self, scenes: &[EncodedScene]) -> Result<(Tensor, Tensor)> {
        if scenes.is_empty() {
            return Err(Error::EmptyInput("forward over empty batch".into()));
        }
        let v_user = self.embed_user_batch(scenes)?;
        let ctx_resolved = self.resolve_context_batch(scenes)?;
        let group = self.group_batch(scenes)?;

        let merge_in = Self::concat(&[&ctx_resolved, &group, &v_user]);
        merge_in.check_finite("model inputs")?;
        let x_m = self.merge.forward_infer(&merge_in)?;
        let x_u = self.user.forward_infer(&v_user)?;
        let x = Self::concat(&[&x_m, &x_u]);

        let e_shared = self.expert_shared.forward_infer(&x)?;
        let e_need = self.expert_need.forward_infer(&x)?;
        let e_way = self.expert_way.forward_infer(&x)?;

        let gate_need_out = self.gate_forward(&x, &self.gate_need)?;
        let gate_way_out = self.gate_forward(&x, &self.gate_way)?;
        let z_need = Self::mix(&gate_need_out, &e_need, &e_shared);
        let z_way = Self::mix(&gate_way_out, &e_way, &e_shared);

        let (s_need, s_way) = match self.config.variant {
            Variant::Multitask => {
                let hidden = relu(&self.head_way_hidden.forward(&z_way)?);
                (
                    self.head_need.forward(&z_need)?,
                    self.head_way_out.forward(&hidden)?,
                )
            }
            Variant::SingleTaskSum => {
                let mut sum = z_need;
                sum.add_assign(&z_way)?;
                (
                    self.head_need.forward(&sum)?,
                    Tensor::zeros(vec![scenes.len(), WAY_COUNT]),
                )
            }
        };
        s_need.check_finite("need scores")?;
        s_way.check_finite("way scores")?;
        Ok((s_need, s_way))
    }

    /// Scores one scene in inference mode.
    pub fn predict(&self, scene: &EncodedScene) -> Result<PredictionScores> {
        let (s_need, s_way) = self.forward_infer(std::slice::from_ref(scene))?;
        let mut sn = [0.0; NEED_COUNT];
        sn.copy_from_slice(s_need.row(0));
        let mut sw = [0.0; WAY_COUNT];
        sw.copy_from_slice(s_way.row(0));
        PredictionScores::from_raw(sn, sw)
    }

    /// Exact reverse-mode pass for the whole model. `d_s_need` / `d_s_way`
    /// are the loss gradients at the raw scores; the result holds a gradient
    /// for every trainable parameter (zero tensors where a path is ablated).
    pub fn backward(
        &self,
        scenes: &[EncodedScene],
        acts: &ForwardActivations,
        d_s_need: &Tensor,
        d_s_way: &Tensor,
    ) -> Result<GradientSet> {
        let batch = scenes.len();
        if acts.s_need.rows() != batch {
            return Err(Error::Validation(
                "activation cache does not match the scene batch".into(),
            ));
        }
        let d = self.config.fused_dim();
        let mut grads = GradientSet::new();

        // Heads.
        let (d_z_need, d_z_way);
        match self.config.variant {
            Variant::Multitask => {
                let (d_zn, head_need_grads) = self.head_need.backward(&acts.head_need_in, d_s_need)?;
                grads.insert("head_need.weight".into(), head_need_grads.weight);
                grads.insert("head_need.bias".into(), head_need_grads.bias);

                let (d_hidden_post, out_grads) = self.head_way_out.backward(&acts.way_hidden, d_s_way)?;
                grads.insert("head_way.out.weight".into(), out_grads.weight);
                grads.insert("head_way.out.bias".into(), out_grads.bias);
                let d_hidden_pre = relu_backward(&acts.way_hidden_pre_relu, &d_hidden_post);
                let (d_zw, hidden_grads) = self.head_way_hidden.backward(&acts.z_way, &d_hidden_pre)?;
                grads.insert("head_way.hidden.weight".into(), hidden_grads.weight);
                grads.insert("head_way.hidden.bias".into(), hidden_grads.bias);
                d_z_need = d_zn;
                d_z_way = d_zw;
            }
            Variant::SingleTaskSum => {
                let (d_sum, head_need_grads) = self.head_need.backward(&acts.head_need_in, d_s_need)?;
                grads.insert("head_need.weight".into(), head_need_grads.weight);
                grads.insert("head_need.bias".into(), head_need_grads.bias);
                // The way head sees no gradient in this variant.
                grads.insert("head_way.hidden.weight".into(), Tensor::zeros_like(&self.head_way_hidden.weight));
                grads.insert("head_way.hidden.bias".into(), Tensor::zeros_like(&self.head_way_hidden.bias));
                grads.insert("head_way.out.weight".into(), Tensor::zeros_like(&self.head_way_out.weight));
                grads.insert("head_way.out.bias".into(), Tensor::zeros_like(&self.head_way_out.bias));
                d_z_need = d_sum.clone();
                d_z_way = d_sum;
            }
        }

        // Mixture and gates: z_k = g0·e_k + g1·e_shared.
        let mut d_e_shared = Tensor::zeros(vec![batch, self.config.expert_dim]);
        let mut d_x = Tensor::zeros(vec![batch, d]);
        let mix_backward = |gate_out: &Tensor,
                                gate_w: &Tensor,
                                expert_out: &Tensor,
                                d_z: &Tensor,
                                d_e_shared: &mut Tensor,
                                d_x: &mut Tensor,
                                grads: &mut GradientSet,
                                gate_name: &str|
         -> Result<Tensor> {
            let mut d_expert = Tensor::zeros(vec![batch, self.config.expert_dim]);
            let mut d_logits = Tensor::zeros(vec![batch, 2]);
            for b in 0..batch {
                let (g0, g1) = (gate_out.row(b)[0], gate_out.row(b)[1]);
                let dz = d_z.row(b);
                let mut dg0 = 0.0;
                let mut dg1 = 0.0;
                {
                    let de = d_expert.row_mut(b);
                    for (i, &g) in dz.iter().enumerate() {
                        de[i] = g0 * g;
                        dg0 += g * expert_out.row(b)[i];
                        dg1 += g * acts.e_shared.row(b)[i];
                    }
                }
                {
                    let ds = d_e_shared.row_mut(b);
                    for (i, &g) in dz.iter().enumerate() {
                        ds[i] += g1 * g;
                    }
                }
                // Softmax Jacobian: dl_i = g_i (dg_i − Σ_j g_j dg_j).
                let dot = g0 * dg0 + g1 * dg1;
                let dl = d_logits.row_mut(b);
                dl[0] = g0 * (dg0 - dot);
                dl[1] = g1 * (dg1 - dot);
            }
            let mut d_gate = Tensor::zeros(vec![2, d]);
            kernels::grad_weight_accum(d_logits.data(), acts.x.data(), d_gate.data_mut(), batch, 2, d);
            grads.insert(gate_name.into(), d_gate);
            kernels::matmul_accum(d_logits.data(), gate_w.data(), d_x.data_mut(), 2, d);
            Ok(d_expert)
        };

        let d_e_need = mix_backward(
            &acts.gate_need_out,
            &self.gate_need,
            &acts.e_need,
            &d_z_need,
            &mut d_e_shared,
            &mut d_x,
            &mut grads,
            "gate_need",
        )?;
        let d_e_way = mix_backward(
            &acts.gate_way_out,
            &self.gate_way,
            &acts.e_way,
            &d_z_way,
            &mut d_e_shared,
            &mut d_x,
            &mut grads,
            "gate_way",
        )?;

        // Experts and the shared network all feed back into x.
        let dx1 = self.expert_shared.backward(&acts.shared_cache, &d_e_shared, "expert_shared", &mut grads)?;
        let dx2 = self.expert_need.backward(&acts.need_cache, &d_e_need, "expert_need", &mut grads)?;
        let dx3 = self.expert_way.backward(&acts.way_cache, &d_e_way, "expert_way", &mut grads)?;
        d_x.add_assign(&dx1)?;
        d_x.add_assign(&dx2)?;
        d_x.add_assign(&dx3)?;

        // Split the fused gradient back into the two towers.
        let mut d_x_m = Tensor::zeros(vec![batch, self.config.merge_dim]);
        let mut d_x_u = Tensor::zeros(vec![batch, self.config.user_dim]);
        for b in 0..batch {
            d_x_m.row_mut(b).copy_from_slice(&d_x.row(b)[..self.config.merge_dim]);
            d_x_u.row_mut(b).copy_from_slice(&d_x.row(b)[self.config.merge_dim..]);
        }

        let d_merge_in = self.merge.backward(&acts.merge_cache, &d_x_m, "merge", &mut grads)?;
        let d_v_user_from_user = self.user.backward(&acts.user_cache, &d_x_u, "user", &mut grads)?;

        // merge_in = [ctx_resolved, group, v_user]; the group block is table
        // data, not parameters, so its slice is dropped.
        let ctx_dim = self.config.context_dim();
        let group_dim = GroupFeatureVector::LEN;
        let user_dim = self.config.user_raw_dim();
        let mut d_ctx = Tensor::zeros(vec![batch, ctx_dim]);
        let mut d_v_user = d_v_user_from_user;
        for b in 0..batch {
            let row = d_merge_in.row(b);
            d_ctx.row_mut(b).copy_from_slice(&row[..ctx_dim]);
            let user_slice = &row[ctx_dim + group_dim..ctx_dim + group_dim + user_dim];
            for (dv, &g) in d_v_user.row_mut(b).iter_mut().zip(user_slice) {
                *dv += g;
            }
        }

        self.scatter_embedding_grads(scenes, &d_v_user, &d_ctx, &mut grads)?;
        Ok(grads)
    }

    /// Routes dense gradients back into the embedding tables.
    fn scatter_embedding_grads(
        &self,
        scenes: &[EncodedScene],
        d_v_user: &Tensor,
        d_ctx: &Tensor,
        grads: &mut GradientSet,
    ) -> Result<()> {
        let e = self.config.embedding_dim;
        let mut d_age = Tensor::zeros_like(&self.embeddings.age);
        let mut d_gender = Tensor::zeros_like(&self.embeddings.gender);
        let mut d_city = Tensor::zeros_like(&self.embeddings.city);
        let mut d_poi = Tensor::zeros_like(&self.embeddings.poi);
        let mut d_aoi = Tensor::zeros_like(&self.embeddings.aoi);
        let mut d_clicked = Tensor::zeros_like(&self.embeddings.clicked);
        let mut d_ordered = Tensor::zeros_like(&self.embeddings.ordered);

        for (b, scene) in scenes.iter().enumerate() {
            let row = d_v_user.row(b);
            let mut at = 0;
            let single = |table: &mut Tensor, idx: usize, at: &mut usize| {
                for (tv, &g) in table.row_mut(idx).iter_mut().zip(&row[*at..*at + e]) {
                    *tv += g;
                }
                *at += e;
            };
            single(&mut d_age, scene.user.age_index, &mut at);
            single(&mut d_gender, scene.user.gender_index, &mut at);
            single(&mut d_city, scene.user.city_index, &mut at);

            let pooled = |table: &mut Tensor, indices: &mut dyn Iterator<Item = usize>, at: &mut usize| {
                let idxs: Vec<usize> = indices.collect();
                if !idxs.is_empty() {
                    let scale = 1.0 / idxs.len() as f64;
                    for idx in idxs {
                        for (tv, &g) in table.row_mut(idx).iter_mut().zip(&row[*at..*at + e]) {
                            *tv += g * scale;
                        }
                    }
                }
                *at += e;
            };
            pooled(&mut d_clicked, &mut scene.user.recent_clicked_needs.iter().map(|c| c.code()), &mut at);
            pooled(&mut d_ordered, &mut scene.user.recent_ordered_needs.iter().map(|c| c.code()), &mut at);
            pooled(&mut d_poi, &mut scene.user.top_pois.iter().copied(), &mut at);
            pooled(&mut d_aoi, &mut scene.user.top_aois.iter().copied(), &mut at);
            // historical_share slots carry no parameters.

            if !self.config.drop_st {
                let ctx_row = d_ctx.row(b);
                let mut at = ContextFeatureVector::DENSE_LEN;
                for (table, idx) in [
                    (&mut d_poi, scene.context.poi_index),
                    (&mut d_aoi, scene.context.aoi_index),
                    (&mut d_city, scene.context.city_index),
                ] {
                    for (tv, &g) in table.row_mut(idx).iter_mut().zip(&ctx_row[at..at + e]) {
                        *tv += g;
                    }
                    at += e;
                }
            }
        }

        grads.insert("embed.age".into(), d_age);
        grads.insert("embed.gender".into(), d_gender);
        grads.insert("embed.city".into(), d_city);
        grads.insert("embed.poi".into(), d_poi);
        grads.insert("embed.aoi".into(), d_aoi);
        grads.insert("embed.clicked".into(), d_clicked);
        grads.insert("embed.ordered".into(), d_ordered);
        Ok(())
    }
}
