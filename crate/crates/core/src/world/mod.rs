//! Synthetic utterance world with month-over-month concept drift.
//!
//! Month 0 is the pretrain era; months `1..=M` are the incremental period.
//! Each token type has a fixed feature mean drawn once per world; a frame is
//! its token's mean plus Gaussian noise. Drift is linear prior interpolation
//! between a start and an end distribution, with designated growing and
//! shrinking types plus brand-new types injected at configured months (zero
//! prior before injection). Everything downstream of `(config, seed)` is
//! deterministic, byte for byte through serialization.

mod eval;
mod io;

pub use eval::{build_eval_sets, EvalSizes, EvalSuite, SetName};
pub use io::{read_jsonl, utterances_to_jsonl, write_jsonl};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FeatureSeq, Token, TokenSeq};
use crate::seeding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub vocab: usize,
    pub featdim: usize,
    /// Incremental months; the world has `months + 1` eras including month 0.
    pub months: usize,
    pub feature_std: f64,
    pub utterance_len: (usize, usize),
    pub volume_per_month: usize,
    pub n_growing: usize,
    pub growing_start_mass: f64,
    pub growing_end_mass: f64,
    pub n_shrinking: usize,
    pub shrinking_start_mass: f64,
    pub shrinking_end_mass: f64,
    /// Injection month for each new token type (all within `1..=months`).
    pub new_type_months: Vec<usize>,
    pub new_type_end_mass: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            vocab: 24,
            featdim: 8,
            months: 6,
            feature_std: 0.35,
            utterance_len: (4, 12),
            volume_per_month: 2000,
            n_growing: 4,
            growing_start_mass: 0.004,
            growing_end_mass: 0.05,
            n_shrinking: 4,
            shrinking_start_mass: 0.06,
            shrinking_end_mass: 0.008,
            new_type_months: vec![1, 2, 3],
            new_type_end_mass: 0.02,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let roles = self.n_growing + self.n_shrinking + self.new_type_months.len();
        if roles >= self.vocab {
            return Err(Error::Config(format!(
                "vocab {} too small for {} drifting types",
                self.vocab, roles
            )));
        }
        if self.featdim == 0 || self.vocab < 2 {
            return Err(Error::Config("need featdim >= 1 and vocab >= 2".into()));
        }
        if self.feature_std < 0.0 || !self.feature_std.is_finite() {
            return Err(Error::Config("feature_std must be finite and >= 0".into()));
        }
        let (lo, hi) = self.utterance_len;
        if lo < 1 || hi < lo {
            return Err(Error::Config(format!(
                "utterance length range ({lo}, {hi}) invalid"
            )));
        }
        for &m in &self.new_type_months {
            if m < 1 || m > self.months {
                return Err(Error::Config(format!(
                    "new type injection month {m} outside 1..={}",
                    self.months
                )));
            }
        }
        let start = self.n_growing as f64 * self.growing_start_mass
            + self.n_shrinking as f64 * self.shrinking_start_mass;
        let end = self.n_growing as f64 * self.growing_end_mass
            + self.n_shrinking as f64 * self.shrinking_end_mass
            + self.new_type_months.len() as f64 * self.new_type_end_mass;
        if !(0.0..=0.9).contains(&start) || !(0.0..=0.9).contains(&end) {
            return Err(Error::Config(
                "drifting types would claim more than 90% of the prior mass".into(),
            ));
        }
        Ok(())
    }
}

/// One era of the world: a prior over token types plus sampling bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthSpec {
    pub index: usize,
    pub token_prior: Vec<f64>,
    pub utterance_len: (usize, usize),
    pub volume: usize,
}

/// Role assignment for token types, fixed at world build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRoles {
    pub growing: Vec<Token>,
    pub shrinking: Vec<Token>,
    /// `(token, injection month)` pairs.
    pub new_types: Vec<(Token, usize)>,
    pub stable: Vec<Token>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub config: WorldConfig,
    pub seed: u64,
    pub months: Vec<MonthSpec>,
    /// `vocab` unit-norm mean vectors of dimension `featdim`.
    pub token_means: Vec<Vec<f64>>,
    pub roles: TokenRoles,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn sample_token(prior: &[f64], rng: &mut ChaCha8Rng) -> Token {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (c, p) in prior.iter().enumerate() {
        acc += p;
        if u < acc {
            return c as Token;
        }
    }
    (prior.len() - 1) as Token
}

/// Build the immutable world description for `(config, seed)`.
pub fn build_world(config: &WorldConfig, seed: u64) -> Result<WorldSpec> {
    config.validate()?;
    let vocab = config.vocab;
    let m_count = config.months;

    let mut means_rng = seeding::rng(seed, "world-means", &[]);
    let token_means: Vec<Vec<f64>> = (0..vocab)
        .map(|_| {
            let mut v: Vec<f64> = (0..config.featdim).map(|_| normal(&mut means_rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();

    let mut role_rng = seeding::rng(seed, "world-roles", &[]);
    let mut order: Vec<usize> = (0..vocab).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut role_rng);
    let n_new = config.new_type_months.len();
    let new_types: Vec<(Token, usize)> = order[..n_new]
        .iter()
        .zip(&config.new_type_months)
        .map(|(&c, &m)| (c as Token, m))
        .collect();
    let growing: Vec<Token> = order[n_new..n_new + config.n_growing]
        .iter()
        .map(|&c| c as Token)
        .collect();
    let shrinking: Vec<Token> = order[n_new + config.n_growing..]
        .iter()
        .take(config.n_shrinking)
        .map(|&c| c as Token)
        .collect();
    let stable: Vec<Token> = order[n_new + config.n_growing + config.n_shrinking..]
        .iter()
        .map(|&c| c as Token)
        .collect();
    let roles = TokenRoles {
        growing,
        shrinking,
        new_types,
        stable,
    };

    // Start and end priors over non-new types, each summing to 1. Stable
    // types share the leftover mass with a mild long-tail shape that stays
    // fixed across the drift.
    let mut start = vec![0.0; vocab];
    let mut end = vec![0.0; vocab];
    for &c in &roles.growing {
        start[c as usize] = config.growing_start_mass;
        end[c as usize] = config.growing_end_mass;
    }
    for &c in &roles.shrinking {
        start[c as usize] = config.shrinking_start_mass;
        end[c as usize] = config.shrinking_end_mass;
    }
    let stable_shape: Vec<f64> = (0..roles.stable.len())
        .map(|i| 1.0 / ((i + 1) as f64).powf(0.7))
        .collect();
    let shape_sum: f64 = stable_shape.iter().sum();
    let start_left = 1.0 - start.iter().sum::<f64>();
    let end_left = 1.0 - end.iter().sum::<f64>();
    for (i, &c) in roles.stable.iter().enumerate() {
        start[c as usize] = start_left * stable_shape[i] / shape_sum;
        end[c as usize] = end_left * stable_shape[i] / shape_sum;
    }

    let months: Vec<MonthSpec> = (0..=m_count)
        .map(|m| {
            let t = if m_count == 0 {
                0.0
            } else {
                m as f64 / m_count as f64
            };
            // New-type ramp: zero before injection, linear up to end mass.
            let mut new_mass = vec![0.0; vocab];
            for &(c, inject) in &roles.new_types {
                if m >= inject {
                    let num = (m - inject + 1) as f64;
                    let den = (m_count - inject + 1) as f64;
                    new_mass[c as usize] = config.new_type_end_mass * num / den;
                }
            }
            let nu: f64 = new_mass.iter().sum();
            let mut prior = vec![0.0; vocab];
            for c in 0..vocab {
                prior[c] = if new_mass[c] > 0.0 {
                    new_mass[c]
                } else {
                    ((1.0 - t) * start[c] + t * end[c]) * (1.0 - nu)
                };
            }
            MonthSpec {
                index: m,
                token_prior: prior,
                utterance_len: config.utterance_len,
                volume: config.volume_per_month,
            }
        })
        .collect();

    let spec = WorldSpec {
        config: config.clone(),
        seed,
        months,
        token_means,
        roles,
    };
    spec.validate()?;
    Ok(spec)
}

impl WorldSpec {
    pub fn validate(&self) -> Result<()> {
        for m in &self.months {
            let sum: f64 = m.token_prior.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "month {} prior sums to {sum}",
                    m.index
                )));
            }
            if m.token_prior.iter().any(|&p| p < 0.0) {
                return Err(Error::Config(format!("month {} prior negative", m.index)));
            }
        }
        for &(c, inject) in &self.roles.new_types {
            for m in &self.months {
                if m.index < inject && m.token_prior[c as usize] != 0.0 {
                    return Err(Error::Config(format!(
                        "new type {c} has prior before month {inject}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn month(&self, m: usize) -> Result<&MonthSpec> {
        self.months
            .get(m)
            .ok_or_else(|| Error::Usage(format!("month {m} out of range")))
    }

    /// Incremental month count M (the world also has month 0).
    pub fn month_count(&self) -> usize {
        self.config.months
    }

    /// Sample label and feature content for one utterance of month `m`.
    pub fn sample_content(
        &self,
        month: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<(FeatureSeq, TokenSeq)> {
        let spec = self.month(month)?;
        let (lo, hi) = spec.utterance_len;
        let t = rng.gen_range(lo..=hi);
        let tokens: TokenSeq = (0..t)
            .map(|_| sample_token(&spec.token_prior, rng))
            .collect();
        let mut flat = Vec::with_capacity(t * self.config.featdim);
        for &tok in &tokens {
            let mean = &self.token_means[tok as usize];
            for &mu in mean {
                flat.push(mu + self.config.feature_std * normal(rng));
            }
        }
        Ok((FeatureSeq::new(flat, t, self.config.featdim)?, tokens))
    }

    /// Token types whose prior grew at least `factor` times from month 0
    /// (averaged over months `1..=M`), including injected new types.
    pub fn grown_types(&self, factor: f64) -> Vec<Token> {
        let m_count = self.month_count();
        if m_count == 0 {
            return Vec::new();
        }
        let base = &self.months[0].token_prior;
        (0..self.config.vocab)
            .filter(|&c| {
                let mean: f64 = (1..=m_count)
                    .map(|m| self.months[m].token_prior[c])
                    .sum::<f64>()
                    / m_count as f64;
                mean > 0.0 && mean >= factor * base[c]
            })
            .map(|c| c as Token)
            .collect()
    }

    /// Bottom quartile of the month-0 prior (ties toward the lower index).
    pub fn rare_types(&self) -> Vec<Token> {
        let base = &self.months[0].token_prior;
        let mut idx: Vec<usize> = (0..base.len()).collect();
        idx.sort_by(|&a, &b| base[a].partial_cmp(&base[b]).unwrap().then(a.cmp(&b)));
        idx.truncate(base.len() / 4);
        idx.sort_unstable();
        idx.into_iter().map(|c| c as Token).collect()
    }
}

/// One synthetic utterance. `truth` is hidden from all pseudo-labeling
/// paths; `machine_transcript` and `confidence` appear together once a
/// teacher has decoded it.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub id: String,
    pub month: usize,
    pub event_time: u64,
    pub ingest_time: u64,
    pub feats: FeatureSeq,
    pub truth: TokenSeq,
    pub machine_transcript: Option<TokenSeq>,
    pub confidence: Option<u32>,
}

impl Utterance {
    pub fn validate(&self) -> Result<()> {
        if self.truth.len() != self.feats.t() {
            return Err(Error::Shape(format!(
                "utterance {}: truth length {} != T {}",
                self.id,
                self.truth.len(),
                self.feats.t()
            )));
        }
        if let Some(mt) = &self.machine_transcript {
            if mt.len() != self.feats.t() {
                return Err(Error::Shape(format!(
                    "utterance {}: transcript length {} != T {}",
                    self.id,
                    mt.len(),
                    self.feats.t()
                )));
            }
        }
        if self.machine_transcript.is_some() != self.confidence.is_some() {
            return Err(Error::Usage(format!(
                "utterance {}: confidence must accompany the machine transcript",
                self.id
            )));
        }
        Ok(())
    }
}

/// Draw a single utterance; `draw_index` orders event time within the month.
pub fn gen_utterance(
    spec: &WorldSpec,
    month: usize,
    rng: &mut ChaCha8Rng,
    draw_index: u64,
) -> Result<Utterance> {
    let (feats, truth) = spec.sample_content(month, rng)?;
    Ok(Utterance {
        id: format!("m{month}-u{draw_index:06}"),
        month,
        event_time: draw_index,
        ingest_time: draw_index,
        feats,
        truth,
        machine_transcript: None,
        confidence: None,
    })
}

/// A world plus per-month draw cursors; the mutable handle campaigns use.
#[derive(Debug, Clone)]
pub struct WorldState {
    spec: WorldSpec,
    cursors: Vec<MonthCursor>,
}

#[derive(Debug, Clone)]
struct MonthCursor {
    drawn: usize,
    rng: ChaCha8Rng,
}

impl WorldState {
    pub fn new(spec: WorldSpec) -> Self {
        let cursors = (0..spec.months.len())
            .map(|m| MonthCursor {
                drawn: 0,
                rng: seeding::rng(spec.seed, "month-stream", &[m as u64]),
            })
            .collect();
        WorldState { spec, cursors }
    }

    pub fn spec(&self) -> &WorldSpec {
        &self.spec
    }

    pub fn remaining(&self, month: usize) -> Result<usize> {
        let volume = self.spec.month(month)?.volume;
        Ok(volume - self.cursors[month].drawn)
    }

    /// Draw the next `n` utterances of a month's stream, in event-time order.
    pub fn gen_month_pool(&mut self, month: usize, n: usize) -> Result<Vec<Utterance>> {
        let volume = self.spec.month(month)?.volume;
        let cursor = &mut self.cursors[month];
        if cursor.drawn + n > volume {
            return Err(Error::Capacity(format!(
                "month {month} stream exhausted: {} drawn of {volume}, {n} requested",
                cursor.drawn
            )));
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let u = gen_utterance(&self.spec, month, &mut cursor.rng, cursor.drawn as u64)?;
            cursor.drawn += 1;
            out.push(u);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
