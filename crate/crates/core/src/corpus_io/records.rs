use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Generator name carried by every human-written record.
pub const HUMAN: &str = "human";
/// Allowed `|cond_mean_logp + entropy|`.
pub const COND_MEAN_TOL: f64 = 1e-4;

/// Per-position statistics of the scoring model for one realized token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenScoreRecord {
    pub token_text: String,
    /// Natural-log probability of the realized token.
    pub logp_actual: f64,
    /// 1-based rank of the realized token.
    pub rank: u64,
    /// Entropy (nats) of the predicted distribution.
    pub entropy: f64,
    /// `sum_v p_v ln p_v`, which equals `-entropy`.
    pub cond_mean_logp: f64,
    pub cond_var_logp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampled_logp: Option<Vec<f64>>,
}

impl TokenScoreRecord {
    /// Checks the per-position invariants; `k` is the declared sample count.
    pub fn check(&self, k: Option<usize>) -> Result<(), (&'static str, String)> {
        let finite = [
            ("logp_actual", self.logp_actual),
            ("entropy", self.entropy),
            ("cond_mean_logp", self.cond_mean_logp),
            ("cond_var_logp", self.cond_var_logp),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err((field, format!("non-finite value {v}")));
            }
        }
        if self.logp_actual > 0.0 {
            return Err(("logp_actual", format!("{} > 0", self.logp_actual)));
        }
        if self.rank < 1 {
            return Err(("rank", "rank must be >= 1".into()));
        }
        if self.entropy < 0.0 {
            return Err(("entropy", format!("{} < 0", self.entropy)));
        }
        if self.cond_var_logp < 0.0 {
            return Err(("cond_var_logp", format!("{} < 0", self.cond_var_logp)));
        }
        let gap = (self.cond_mean_logp + self.entropy).abs();
        if gap > COND_MEAN_TOL {
            return Err((
                "cond_mean_logp",
                format!(
                    "cond_mean_logp {} differs from -entropy {} by {gap:e}",
                    self.cond_mean_logp, -self.entropy
                ),
            ));
        }
        if self.rank == 1 && self.logp_actual < self.cond_mean_logp {
            return Err((
                "logp_actual",
                "top-ranked token has log-prob below the conditional mean".into(),
            ));
        }
        if let Some(samples) = &self.sampled_logp {
            if let Some(k) = k {
                if samples.len() != k {
                    return Err(("sampled_logp", format!("expected {k} samples, got {}", samples.len())));
                }
            }
            if let Some(v) = samples.iter().find(|v| !v.is_finite() || **v > 0.0) {
                return Err(("sampled_logp", format!("invalid sampled log-prob {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "HWT")]
    Hwt,
    #[serde(rename = "MGT")]
    Mgt,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hwt => "HWT",
            Self::Mgt => "MGT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainLabel {
    General,
    Personalized,
}

impl fmt::Display for DomainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::General => "general",
            Self::Personalized => "personalized",
        })
    }
}

/// Provenance of a shuffled variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantMeta {
    pub source_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_id: Option<String>,
    pub variant_index: usize,
    pub tau_target: f64,
    pub achieved_tau: f64,
    pub seed: u64,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub class_label: ClassLabel,
    pub domain_label: DomainLabel,
    pub subdomain: String,
    pub generator: String,
    /// Statistics for positions `1..tokens.len()`; position 0 has no
    /// conditional prediction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<TokenScoreRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation_ref: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub needs_scoring: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<VariantMeta>,
}

impl TextRecord {
    pub fn is_mgt(&self) -> bool {
        self.class_label == ClassLabel::Mgt
    }

    pub fn scored(&self) -> &[TokenScoreRecord] {
        self.scores.as_deref().unwrap_or(&[])
    }

    /// Checks all record-level and per-position invariants.
    pub fn validate(&self, k: Option<usize>) -> Result<(), CorpusError> {
        let fail = |field: &str, reason: String| Err(CorpusError::invariant(&self.id, field, reason));
        if self.id.is_empty() {
            return fail("id", "empty id".into());
        }
        let human = self.generator == HUMAN;
        match (self.class_label, human) {
            (ClassLabel::Hwt, false) => {
                return fail("generator", format!("HWT record has generator {:?}", self.generator))
            }
            (ClassLabel::Mgt, true) => return fail("generator", "MGT record has generator \"human\"".into()),
            _ => {}
        }
        if let Some(scores) = &self.scores {
            if self.tokens.len() < 2 {
                return fail("tokens", format!("scored record needs >= 2 tokens, has {}", self.tokens.len()));
            }
            if scores.len() != self.tokens.len() - 1 {
                return fail(
                    "scores",
                    format!("{} scores for {} tokens (expected tokens - 1)", scores.len(), self.tokens.len()),
                );
            }
            for (pos, (s, tok)) in scores.iter().zip(&self.tokens[1..]).enumerate() {
                if &s.token_text != tok {
                    return fail(
                        "scores.token_text",
                        format!("position {}: {:?} does not match token {:?}", pos + 1, s.token_text, tok),
                    );
                }
                if let Err((field, reason)) = s.check(k) {
                    return fail(&format!("scores[{}].{field}", pos + 1), reason);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn score(tok: &str, logp: f64, rank: u64, entropy: f64) -> TokenScoreRecord {
        TokenScoreRecord {
            token_text: tok.into(),
            logp_actual: logp,
            rank,
            entropy,
            cond_mean_logp: -entropy,
            cond_var_logp: 1.0,
            sampled_logp: None,
        }
    }

    fn record() -> TextRecord {
        TextRecord {
            id: "t0".into(),
            tokens: vec!["a".into(), "b".into(), "c".into()],
            class_label: ClassLabel::Mgt,
            domain_label: DomainLabel::General,
            subdomain: "news".into(),
            generator: "gpt".into(),
            scores: Some(vec![score("b", -1.0, 2, 1.5), score("c", -2.0, 3, 2.0)]),
            activation_ref: None,
            needs_scoring: false,
            variant: None,
        }
    }

    fn violation_field(r: &TextRecord) -> String {
        match r.validate(None) {
            Err(CorpusError::InvariantViolation { field, .. }) => field,
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn valid_record_passes() {
        record().validate(None).unwrap();
    }

    #[test]
    fn entropy_identity_is_enforced() {
        let mut r = record();
        let s = &mut r.scores.as_mut().unwrap()[0];
        s.entropy = 2.0;
        s.cond_mean_logp = -1.0;
        assert_eq!(violation_field(&r), "scores[1].cond_mean_logp");
    }

    #[test]
    fn label_generator_coupling() {
        let mut r = record();
        r.generator = HUMAN.into();
        assert_eq!(violation_field(&r), "generator");
        r.class_label = ClassLabel::Hwt;
        r.validate(None).unwrap();
        r.generator = "gpt".into();
        assert_eq!(violation_field(&r), "generator");
    }

    #[test]
    fn alignment_is_enforced() {
        let mut r = record();
        r.tokens.push("d".into());
        assert_eq!(violation_field(&r), "scores");
        let mut r = record();
        r.scores.as_mut().unwrap()[1].token_text = "x".into();
        assert_eq!(violation_field(&r), "scores.token_text");
    }

    #[test]
    fn per_position_checks() {
        let cases: Vec<(Box<dyn Fn(&mut TokenScoreRecord)>, &str)> = vec![
            (Box::new(|s| s.logp_actual = 0.5), "scores[1].logp_actual"),
            (Box::new(|s| s.rank = 0), "scores[1].rank"),
            (Box::new(|s| s.cond_var_logp = -1.0), "scores[1].cond_var_logp"),
            (Box::new(|s| s.logp_actual = f64::NAN), "scores[1].logp_actual"),
            (Box::new(|s| { s.entropy = -0.5; s.cond_mean_logp = 0.5 }), "scores[1].entropy"),
            (Box::new(|s| { s.rank = 1; s.logp_actual = -3.0 }), "scores[1].logp_actual"),
            (Box::new(|s| s.sampled_logp = Some(vec![-1.0, 0.1])), "scores[1].sampled_logp"),
        ];
        for (mutate, field) in cases {
            let mut r = record();
            mutate(&mut r.scores.as_mut().unwrap()[0]);
            assert_eq!(violation_field(&r), field);
        }
    }

    #[test]
    fn sample_count_must_match_declared_k() {
        let mut r = record();
        for s in r.scores.as_mut().unwrap() {
            s.sampled_logp = Some(vec![-1.0; 3]);
        }
        r.validate(Some(3)).unwrap();
        assert!(r.validate(Some(8)).is_err());
    }

    #[test]
    fn unscored_record_with_one_token_is_fine() {
        let mut r = record();
        r.tokens.truncate(1);
        r.scores = None;
        r.validate(None).unwrap();
    }
}
