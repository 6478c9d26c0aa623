//! The framewise sequence classifier: parameters, forward pass, loss with
//! exact analytic gradients, greedy decoding and confidence scoring.
//!
//! The network is intentionally small — `logits_t = W2·tanh(W1·x_t + b1) + b2`
//! per frame — so every gradient is hand-derived and checkable against finite
//! differences. Loss is the mean over utterances of the mean per-frame
//! cross-entropy, which makes gradient accumulation over micro-batches an
//! exact reconstruction of the full-batch gradient (see [`crate::worker`]).

mod io;
mod optim;
mod schedule;

pub use io::{read_param_file, write_param_file};
pub use optim::{optimizer_step, OptimizerKind, OptimizerState};
pub use schedule::LrSchedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Token = u32;
pub type TokenSeq = Vec<Token>;

/// Segment names in serialization order.
pub const SEGMENT_NAMES: [&str; 4] = ["w1", "b1", "w2", "b2"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub featdim: usize,
    pub hidden: usize,
    pub vocab: usize,
}

impl Dims {
    pub fn new(featdim: usize, hidden: usize, vocab: usize) -> Self {
        Dims {
            featdim,
            hidden,
            vocab,
        }
    }

    /// Total parameter count across all segments.
    pub fn len(&self) -> usize {
        self.hidden * self.featdim + self.hidden + self.vocab * self.hidden + self.vocab
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Model weights as named segments; the unit the orchestrator averages,
/// versions and snapshots.
///
/// `w1` is `hidden x featdim` row-major, `w2` is `vocab x hidden` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub dims: Dims,
    pub version: u64,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Gradient (or moment) buffer, shape-identical to a [`ParamSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradSet {
    pub dims: Dims,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

macro_rules! impl_segments {
    ($ty:ident) => {
        impl $ty {
            /// Segments in serialization order.
            pub fn segments(&self) -> [(&'static str, &[f64]); 4] {
                [
                    ("w1", &self.w1),
                    ("b1", &self.b1),
                    ("w2", &self.w2),
                    ("b2", &self.b2),
                ]
            }

            /// Flat iterator over every entry, in segment order.
            pub fn values(&self) -> impl Iterator<Item = &f64> {
                self.w1
                    .iter()
                    .chain(self.b1.iter())
                    .chain(self.w2.iter())
                    .chain(self.b2.iter())
            }

            pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
                self.w1
                    .iter_mut()
                    .chain(self.b1.iter_mut())
                    .chain(self.w2.iter_mut())
                    .chain(self.b2.iter_mut())
            }

            /// Checks segment lengths against `dims` and that every entry is finite.
            pub fn validate(&self) -> Result<()> {
                let d = &self.dims;
                if self.w1.len() != d.hidden * d.featdim
                    || self.b1.len() != d.hidden
                    || self.w2.len() != d.vocab * d.hidden
                    || self.b2.len() != d.vocab
                {
                    return Err(Error::Shape(format!(
                        "segment lengths inconsistent with dims {:?}",
                        d
                    )));
                }
                if !self.values().all(|v| v.is_finite()) {
                    return Err(Error::Shape("non-finite entry in segments".into()));
                }
                Ok(())
            }
        }
    };
}

impl_segments!(ParamSet);
impl_segments!(GradSet);

impl ParamSet {
    pub fn zeros(dims: Dims) -> Self {
        ParamSet {
            dims,
            version: 0,
            w1: vec![0.0; dims.hidden * dims.featdim],
            b1: vec![0.0; dims.hidden],
            w2: vec![0.0; dims.vocab * dims.hidden],
            b2: vec![0.0; dims.vocab],
        }
    }

    /// Uniform init scaled by fan-in; biases start at zero.
    pub fn random(dims: Dims, scale: f64, rng: &mut impl rand::Rng) -> Self {
        let mut p = ParamSet::zeros(dims);
        let a1 = scale / (dims.featdim as f64).sqrt();
        for w in p.w1.iter_mut() {
            *w = rng.gen_range(-a1..a1);
        }
        let a2 = scale / (dims.hidden as f64).sqrt();
        for w in p.w2.iter_mut() {
            *w = rng.gen_range(-a2..a2);
        }
        p
    }

    pub fn same_dims(&self, other: &ParamSet) -> bool {
        self.dims == other.dims
    }
}

impl GradSet {
    pub fn zeros(dims: Dims) -> Self {
        GradSet {
            dims,
            w1: vec![0.0; dims.hidden * dims.featdim],
            b1: vec![0.0; dims.hidden],
            w2: vec![0.0; dims.vocab * dims.hidden],
            b2: vec![0.0; dims.vocab],
        }
    }

    /// `self += other * scale`, segment-wise.
    pub fn add_scaled(&mut self, other: &GradSet, scale: f64) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!(
                "gradient dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        for (a, b) in self.values_mut().zip(other.values()) {
            *a += b * scale;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.values_mut() {
            *v *= factor;
        }
    }
}

/// A `T x featdim` frame matrix, row-major, all entries finite, `T >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeq {
    data: Vec<f64>,
    t: usize,
    featdim: usize,
}

impl FeatureSeq {
    pub fn new(data: Vec<f64>, t: usize, featdim: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::Usage("feature sequence needs T >= 1".into()));
        }
        if data.len() != t * featdim {
            return Err(Error::Shape(format!(
                "feature data length {} != {}x{}",
                data.len(),
                t,
                featdim
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Shape("non-finite feature entry".into()));
        }
        Ok(FeatureSeq { data, t, featdim })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn featdim(&self) -> usize {
        self.featdim
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.data[i * self.featdim..(i + 1) * self.featdim]
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }
}

/// Per-frame unnormalized class scores, `T x vocab` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Logits {
    data: Vec<f64>,
    t: usize,
    vocab: usize,
}

impl Logits {
    pub fn new(data: Vec<f64>, t: usize, vocab: usize) -> Result<Self> {
        if data.len() != t * vocab || t == 0 || vocab == 0 {
            return Err(Error::Shape(format!(
                "logits length {} != {}x{}",
                data.len(),
                t,
                vocab
            )));
        }
        Ok(Logits { data, t, vocab })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.data[i * self.vocab..(i + 1) * self.vocab]
    }
}

/// One training example: features paired with the label sequence to fit
/// (ground truth for supervised phases, a machine transcript otherwise).
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub feats: &'a FeatureSeq,
    pub labels: &'a TokenSeq,
}

impl<'a> Sample<'a> {
    pub fn new(feats: &'a FeatureSeq, labels: &'a TokenSeq) -> Self {
        Sample { feats, labels }
    }
}

fn check_sample(dims: &Dims, s: &Sample<'_>) -> Result<()> {
    if s.feats.featdim() != dims.featdim {
        return Err(Error::Shape(format!(
            "featdim {} != model featdim {}",
            s.feats.featdim(),
            dims.featdim
        )));
    }
    if s.labels.len() != s.feats.t() {
        return Err(Error::Shape(format!(
            "label length {} != frame count {}",
            s.labels.len(),
            s.feats.t()
        )));
    }
    if let Some(bad) = s.labels.iter().find(|&&c| c as usize >= dims.vocab) {
        return Err(Error::Shape(format!(
            "token {} out of vocab {}",
            bad, dims.vocab
        )));
    }
    Ok(())
}

/// Per-frame forward pass: `logits_t = W2·tanh(W1·x_t + b1) + b2`.
pub fn forward(params: &ParamSet, feats: &FeatureSeq) -> Result<Logits> {
    let d = params.dims;
    if feats.featdim() != d.featdim {
        return Err(Error::Shape(format!(
            "featdim {} != model featdim {}",
            feats.featdim(),
            d.featdim
        )));
    }
    let t = feats.t();
    let mut out = vec![0.0; t * d.vocab];
    let mut hidden = vec![0.0; d.hidden];
    for ti in 0..t {
        let x = feats.frame(ti);
        frame_hidden(params, x, &mut hidden);
        let logits = &mut out[ti * d.vocab..(ti + 1) * d.vocab];
        frame_logits(params, &hidden, logits);
    }
    Logits::new(out, t, d.vocab)
}

fn frame_hidden(params: &ParamSet, x: &[f64], hidden: &mut [f64]) {
    let d = params.dims;
    for j in 0..d.hidden {
        let row = &params.w1[j * d.featdim..(j + 1) * d.featdim];
        let mut acc = params.b1[j];
        for (w, xi) in row.iter().zip(x) {
            acc += w * xi;
        }
        hidden[j] = acc.tanh();
    }
}

fn frame_logits(params: &ParamSet, hidden: &[f64], logits: &mut [f64]) {
    let d = params.dims;
    for c in 0..d.vocab {
        let row = &params.w2[c * d.hidden..(c + 1) * d.hidden];
        let mut acc = params.b2[c];
        for (w, h) in row.iter().zip(hidden) {
            acc += w * h;
        }
        logits[c] = acc;
    }
}

/// Numerically stable softmax of one frame into `out`.
fn softmax_into(scores: &[f64], out: &mut [f64]) {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, s) in out.iter_mut().zip(scores) {
        let e = (s - max).exp();
        *o = e;
        sum += e;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

fn frame_nll(scores: &[f64], label: usize) -> f64 {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln() + max;
    lse - scores[label]
}

/// Mean over utterances of the mean per-frame cross-entropy.
pub fn loss(params: &ParamSet, batch: &[Sample<'_>]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Usage("loss of an empty batch".into()));
    }
    let mut total = 0.0;
    for s in batch {
        check_sample(&params.dims, s)?;
        let logits = forward(params, s.feats)?;
        let mut utt = 0.0;
        for (ti, &label) in s.labels.iter().enumerate() {
            utt += frame_nll(logits.frame(ti), label as usize);
        }
        total += utt / s.feats.t() as f64;
    }
    Ok(total / batch.len() as f64)
}

/// Exact analytic gradient of [`loss`] under the same reduction.
pub fn grad(params: &ParamSet, batch: &[Sample<'_>]) -> Result<GradSet> {
    grad_with_loss(params, batch).map(|(g, _)| g)
}

/// Gradient plus the loss value from the same pass.
pub fn grad_with_loss(params: &ParamSet, batch: &[Sample<'_>]) -> Result<(GradSet, f64)> {
    if batch.is_empty() {
        return Err(Error::Usage("gradient of an empty batch".into()));
    }
    let d = params.dims;
    let mut g = GradSet::zeros(d);
    let mut loss_total = 0.0;

    let mut hidden = vec![0.0; d.hidden];
    let mut logits = vec![0.0; d.vocab];
    let mut probs = vec![0.0; d.vocab];
    let mut dhidden = vec![0.0; d.hidden];

    let inv_n = 1.0 / batch.len() as f64;
    for s in batch {
        check_sample(&d, s)?;
        let frame_w = inv_n / s.feats.t() as f64;
        for (ti, &label) in s.labels.iter().enumerate() {
            let label = label as usize;
            let x = s.feats.frame(ti);
            frame_hidden(params, x, &mut hidden);
            frame_logits(params, &hidden, &mut logits);
            softmax_into(&logits, &mut probs);
            loss_total += frame_w * frame_nll(&logits, label);

            // dL/dz = (softmax - onehot), scaled by this frame's weight
            probs[label] -= 1.0;
            for p in probs.iter_mut() {
                *p *= frame_w;
            }

            for c in 0..d.vocab {
                let dz = probs[c];
                g.b2[c] += dz;
                let wrow = &mut g.w2[c * d.hidden..(c + 1) * d.hidden];
                for (gw, h) in wrow.iter_mut().zip(hidden.iter()) {
                    *gw += dz * h;
                }
            }
            for j in 0..d.hidden {
                let mut acc = 0.0;
                for c in 0..d.vocab {
                    acc += params.w2[c * d.hidden + j] * probs[c];
                }
                dhidden[j] = acc * (1.0 - hidden[j] * hidden[j]);
            }
            for j in 0..d.hidden {
                let da = dhidden[j];
                g.b1[j] += da;
                let wrow = &mut g.w1[j * d.featdim..(j + 1) * d.featdim];
                for (gw, xi) in wrow.iter_mut().zip(x) {
                    *gw += da * xi;
                }
            }
        }
    }
    Ok((g, loss_total))
}

/// Per-frame argmax; ties break toward the lowest token index.
pub fn decode(logits: &Logits) -> TokenSeq {
    let mut out = Vec::with_capacity(logits.t());
    for ti in 0..logits.t() {
        let frame = logits.frame(ti);
        let mut best = 0usize;
        for (c, &v) in frame.iter().enumerate().skip(1) {
            if v > frame[best] {
                best = c;
            }
        }
        out.push(best as Token);
    }
    out
}

/// `floor(1000 x mean over frames of max softmax probability)`, in `[0, 1000]`.
pub fn confidence(logits: &Logits) -> u32 {
    let mut probs = vec![0.0; logits.vocab()];
    let mut acc = 0.0;
    for ti in 0..logits.t() {
        softmax_into(logits.frame(ti), &mut probs);
        acc += probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    }
    let mean = acc / logits.t() as f64;
    ((1000.0 * mean).floor() as u32).min(1000)
}
