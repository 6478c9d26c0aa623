//! Edit distance, corpus WER and relative WER reduction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::model::{decode, forward, ParamSet, Token};
use crate::world::Utterance;

/// Unit-cost Levenshtein distance between two token sequences.
pub fn edit_distance(hyp: &[Token], reference: &[Token]) -> usize {
    if hyp.is_empty() {
        return reference.len();
    }
    if reference.is_empty() {
        return hyp.len();
    }
    // Two-row DP over the shorter sequence.
    let (short, long) = if hyp.len() <= reference.len() {
        (hyp, reference)
    } else {
        (reference, hyp)
    };
    let m = short.len();
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut curr = vec![0usize; m + 1];
    for (i, lv) in long.iter().enumerate() {
        curr[0] = i + 1;
        for (j, sv) in short.iter().enumerate() {
            let cost = usize::from(lv != sv);
            curr[j + 1] = (prev[j + 1] + 1).min(curr[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m]
}

#[derive(Debug, Clone, Serialize)]
pub struct UtteranceScore {
    pub id: String,
    pub edits: usize,
    pub ref_len: usize,
}

/// Micro-averaged corpus score: `wer = total edits / total reference length`.
#[derive(Debug, Clone, Serialize)]
pub struct WerResult {
    pub total_edits: usize,
    pub total_ref_len: usize,
    pub wer: f64,
    pub per_utterance: Vec<UtteranceScore>,
}

/// Decode every utterance with `model` and micro-average the edit counts.
///
/// Never the mean of per-utterance WERs: short and long utterances weigh by
/// their reference length.
pub fn corpus_wer(model: &ParamSet, eval_set: &[Utterance]) -> Result<WerResult> {
    if eval_set.is_empty() {
        return Err(Error::Usage("corpus WER over an empty eval set".into()));
    }
    let scored: Vec<Result<UtteranceScore>> = exec::map(eval_set, |u| {
        let logits = forward(model, &u.feats)?;
        let hyp = decode(&logits);
        Ok(UtteranceScore {
            id: u.id.clone(),
            edits: edit_distance(&hyp, &u.truth),
            ref_len: u.truth.len(),
        })
    });
    let per_utterance = scored.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(tally(per_utterance))
}

/// Micro-average a set of per-utterance scores (ordered integer sums, so the
/// result is independent of evaluation parallelism).
pub fn tally(per_utterance: Vec<UtteranceScore>) -> WerResult {
    let total_edits: usize = per_utterance.iter().map(|s| s.edits).sum();
    let total_ref_len: usize = per_utterance.iter().map(|s| s.ref_len).sum();
    WerResult {
        total_edits,
        total_ref_len,
        wer: total_edits as f64 / total_ref_len as f64,
        per_utterance,
    }
}

/// Relative WER reduction in percent; positive means `new` improved on `base`.
pub fn werr(base_wer: f64, new_wer: f64) -> Result<f64> {
    if base_wer <= 0.0 {
        return Err(Error::Undefined(format!(
            "relative reduction against base WER {base_wer}"
        )));
    }
    Ok(100.0 * (base_wer - new_wer) / base_wer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_sequences_cost_nothing() {
        assert_eq!(edit_distance(&[1, 2, 3], &[1, 2, 3]), 0);
    }

    #[test]
    fn empty_hyp_costs_reference_length() {
        assert_eq!(edit_distance(&[], &[4, 4]), 2);
        assert_eq!(edit_distance(&[4, 4], &[]), 2);
    }

    #[test]
    fn kitten_sitting_costs_three() {
        // k i t t e n / s i t t i n g over a char->token map
        let kitten = [0u32, 1, 2, 2, 3, 4];
        let sitting = [5u32, 1, 2, 2, 1, 4, 6];
        assert_eq!(edit_distance(&kitten, &sitting), 3);
    }

    #[test]
    fn micro_average_example() {
        let result = tally(vec![
            UtteranceScore {
                id: "a".into(),
                edits: 1,
                ref_len: 4,
            },
            UtteranceScore {
                id: "b".into(),
                edits: 2,
                ref_len: 6,
            },
        ]);
        assert!((result.wer - 0.3).abs() < 1e-12);
    }

    #[test]
    fn micro_average_differs_from_macro() {
        // (1/2 + 0/8)/2 = 0.25 macro, but 1/10 = 0.1 micro.
        let result = tally(vec![
            UtteranceScore {
                id: "a".into(),
                edits: 1,
                ref_len: 2,
            },
            UtteranceScore {
                id: "b".into(),
                edits: 0,
                ref_len: 8,
            },
        ]);
        assert!((result.wer - 0.1).abs() < 1e-12);
    }

    #[test]
    fn werr_examples() {
        assert_eq!(werr(0.10, 0.10).unwrap(), 0.0);
        assert!((werr(1.000, 0.799).unwrap() - 20.1).abs() < 1e-9);
        assert!((werr(0.10, 0.11).unwrap() + 10.0).abs() < 1e-9);
        assert!(matches!(werr(0.0, 0.1), Err(Error::Undefined(_))));
    }

    fn oracle(a: &[Token], b: &[Token]) -> usize {
        // Exhaustive recursion straight from the definition.
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        let sub = oracle(&a[1..], &b[1..]) + usize::from(a[0] != b[0]);
        let del = oracle(&a[1..], b) + 1;
        let ins = oracle(a, &b[1..]) + 1;
        sub.min(del).min(ins)
    }

    #[test]
    fn dp_equals_exhaustive_recursion_up_to_len_6() {
        // Every pair of sequences of length <= 6 over a 3-token alphabet,
        // sampled exhaustively over lengths <= 3 and densely beyond.
        fn all_seqs(len: usize) -> Vec<Vec<Token>> {
            if len == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for s in all_seqs(len - 1) {
                for t in 0..3u32 {
                    let mut s2 = s.clone();
                    s2.push(t);
                    out.push(s2);
                }
            }
            out
        }
        let mut short = Vec::new();
        for len in 0..=3 {
            short.extend(all_seqs(len));
        }
        for a in &short {
            for b in &short {
                assert_eq!(edit_distance(a, b), oracle(a, b));
            }
        }
        // Dense spot checks at the full length bound.
        let six = all_seqs(6);
        for (i, a) in six.iter().enumerate().step_by(37) {
            for b in six.iter().skip(i % 11).step_by(53) {
                assert_eq!(edit_distance(a, b), oracle(a, b));
            }
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_zero_iff_equal(
            a in proptest::collection::vec(0u32..5, 0..12),
            b in proptest::collection::vec(0u32..5, 0..12),
        ) {
            let d = edit_distance(&a, &b);
            prop_assert_eq!(d, edit_distance(&b, &a));
            prop_assert_eq!(d == 0, a == b);
        }

        #[test]
        fn triangle_inequality(
            a in proptest::collection::vec(0u32..4, 0..10),
            b in proptest::collection::vec(0u32..4, 0..10),
            c in proptest::collection::vec(0u32..4, 0..10),
        ) {
            prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
        }
    }
}
