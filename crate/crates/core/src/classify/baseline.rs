//! Multinomial bag-of-words classifier with additive smoothing.
//!
//! For class `c` with `N_c` training tokens and vocabulary `V`:
//!
//! ```text
//! prior(c)     = docs(c) / docs
//! P(t | c)     = (count(t, c) + alpha) / (N_c + alpha * |V|)
//! score(c | x) = ln prior(c) + sum over tokens t of x of ln P(t | c)
//! ```
//!
//! Tokens never seen in training use the same formula with a zero count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Classifier, ClassifyError, Prediction, PredictionSource, ScoreKind};
use crate::corpus::Fragment;
use crate::fsutil::atomic_write;
use crate::label::{PerClass, SentimentLabel};
use crate::textprep::{TokenSequence, Tokenizer};

pub const DEFAULT_ALPHA: f64 = 1.0;
const MODEL_HEADER: &str = "# mediascreen multinomial bag-of-words model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("no labeled training fragments for class `{0}`")]
    MissingClass(SentimentLabel),
    #[error("smoothing alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    /// Vocabulary with per-class occurrence counts, in token order.
    token_counts: BTreeMap<String, PerClass<u64>>,
    class_totals: PerClass<u64>,
    class_docs: PerClass<u64>,
    class_priors: PerClass<f64>,
    alpha: f64,
}

pub fn train_baseline<'a, I>(fragments: I, alpha: f64) -> Result<BaselineModel, TrainError>
where
    I: IntoIterator<Item = &'a Fragment>,
{
    BaselineModel::train(fragments, alpha, &Tokenizer::default())
}

pub fn predict_baseline(model: &BaselineModel, fragment: &Fragment) -> Prediction {
    model.predict_text(&fragment.text, fragment.lang)
}

impl BaselineModel {
    /// Trains on the labeled fragments; unlabeled ones are ignored.
    pub fn train<'a, I>(fragments: I, alpha: f64, tokenizer: &Tokenizer) -> Result<Self, TrainError>
    where
        I: IntoIterator<Item = &'a Fragment>,
    {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(TrainError::InvalidAlpha(alpha));
        }
        let mut token_counts: BTreeMap<String, PerClass<u64>> = BTreeMap::new();
        let mut class_totals = PerClass::<u64>::default();
        let mut class_docs = PerClass::<u64>::default();
        for fragment in fragments {
            let Some(label) = fragment.label else { continue };
            class_docs[label] += 1;
            for token in tokens_of(tokenizer, &fragment.text, fragment.lang).into_inner() {
                token_counts.entry(token).or_default()[label] += 1;
                class_totals[label] += 1;
            }
        }
        if let Some(missing) = SentimentLabel::ALL.into_iter().find(|&l| class_docs[l] == 0) {
            return Err(TrainError::MissingClass(missing));
        }
        let docs: u64 = class_docs.0.iter().sum();
        let class_priors = class_docs.map(|_, &n| n as f64 / docs as f64);
        Ok(BaselineModel { token_counts, class_totals, class_docs, class_priors, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocabulary_size(&self) -> usize {
        self.token_counts.len()
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.token_counts.keys().map(String::as_str)
    }

    pub fn priors(&self) -> &PerClass<f64> {
        &self.class_priors
    }

    pub fn class_totals(&self) -> &PerClass<u64> {
        &self.class_totals
    }

    pub fn token_count(&self, token: &str, class: SentimentLabel) -> u64 {
        self.token_counts.get(token).map_or(0, |c| c[class])
    }

    /// Smoothed P(token | class); unseen tokens get the zero-count value.
    pub fn token_probability(&self, token: &str, class: SentimentLabel) -> f64 {
        let denom = self.class_totals[class] as f64 + self.alpha * self.vocabulary_size() as f64;
        (self.token_count(token, class) as f64 + self.alpha) / denom
    }

    pub fn predict_tokens(&self, tokens: &TokenSequence) -> Prediction {
        let scores = PerClass::from_fn(|class| {
            let denom = (self.class_totals[class] as f64 + self.alpha * self.vocabulary_size() as f64).ln();
            let likelihood: f64 = tokens
                .iter()
                .map(|t| (self.token_count(t, class) as f64 + self.alpha).ln() - denom)
                .sum();
            self.class_priors[class].ln() + likelihood
        });
        Prediction::from_scores(scores, ScoreKind::LogJoint, PredictionSource::Baseline)
    }

    pub fn predict_text(&self, text: &str, lang: crate::textprep::LanguageTag) -> Prediction {
        self.predict_tokens(&tokens_of(&Tokenizer::default(), text, lang))
    }

    fn check_invariants(&self) -> Result<(), String> {
        let prior_sum: f64 = self.class_priors.0.iter().sum();
        if (prior_sum - 1.0).abs() > 1e-9 {
            return Err(format!("priors sum to {prior_sum}"));
        }
        for class in SentimentLabel::ALL {
            let sum: u64 = self.token_counts.values().map(|c| c[class]).sum();
            if sum != self.class_totals[class] {
                return Err(format!("{class} total {} != token count sum {sum}", self.class_totals[class]));
            }
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(format!("alpha {} is not positive", self.alpha));
        }
        Ok(())
    }
}

fn tokens_of(tokenizer: &Tokenizer, text: &str, lang: crate::textprep::LanguageTag) -> TokenSequence {
    // Blank text yields no tokens; prediction then falls back to the priors.
    tokenizer.tokenize(text, lang).unwrap_or_default()
}

impl Classifier for BaselineModel {
    fn descriptor(&self) -> String {
        format!("baseline(alpha={}, vocabulary={})", self.alpha, self.vocabulary_size())
    }

    fn classify(&self, fragment: &Fragment) -> Result<Prediction, ClassifyError> {
        Ok(predict_baseline(self, fragment))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("model file is inconsistent: {0}")]
    Inconsistent(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Writes the model as a versioned, line-oriented parameter dump:
///
/// ```text
/// # mediascreen multinomial bag-of-words model
/// version 1
/// alpha <f64>
/// classes negative neutral positive
/// documents <neg> <neu> <pos>
/// totals <neg> <neu> <pos>
/// priors <neg> <neu> <pos>
/// vocabulary <size>
/// token <token> <neg> <neu> <pos>     (one line per token, sorted)
/// ```
///
/// Floats use Rust's shortest round-trip formatting, so loading gives the
/// identical model.
pub fn save_model(model: &BaselineModel, path: &Path) -> Result<(), ModelFileError> {
    atomic_write(path, model_to_string(model).as_bytes())
        .map_err(|source| ModelFileError::Io { path: path.display().to_string(), source })
}

fn model_to_string(model: &BaselineModel) -> String {
    let three = |v: &PerClass<u64>| format!("{} {} {}", v.0[0], v.0[1], v.0[2]);
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_HEADER}");
    let _ = writeln!(out, "version {MODEL_VERSION}");
    let _ = writeln!(out, "alpha {}", model.alpha);
    let _ = writeln!(out, "classes negative neutral positive");
    let _ = writeln!(out, "documents {}", three(&model.class_docs));
    let _ = writeln!(out, "totals {}", three(&model.class_totals));
    let p = &model.class_priors.0;
    let _ = writeln!(out, "priors {} {} {}", p[0], p[1], p[2]);
    let _ = writeln!(out, "vocabulary {}", model.token_counts.len());
    for (token, counts) in &model.token_counts {
        let _ = writeln!(out, "token {token} {}", three(counts));
    }
    out
}

pub fn load_model(path: &Path) -> Result<BaselineModel, ModelFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ModelFileError::Io { path: path.display().to_string(), source })?;
    model_from_str(&text)
}

fn model_from_str(text: &str) -> Result<BaselineModel, ModelFileError> {
    let mut alpha = None;
    let mut docs = None;
    let mut totals = None;
    let mut priors = None;
    let mut vocab_size = None;
    let mut version_seen = false;
    let mut token_counts = BTreeMap::new();

    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let err = |message: String| ModelFileError::Parse { line: line_no, message };
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let key = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let ints = |vals: &[&str]| -> Result<PerClass<u64>, ModelFileError> {
            if vals.len() != 3 {
                return Err(err(format!("expected 3 values, got {}", vals.len())));
            }
            let mut out = PerClass::<u64>::default();
            for (i, v) in vals.iter().enumerate() {
                out.0[i] = v.parse().map_err(|e| err(format!("bad integer `{v}`: {e}")))?;
            }
            Ok(out)
        };
        match key {
            "version" => {
                let v: u32 = rest.first().and_then(|v| v.parse().ok()).ok_or_else(|| err("bad version".into()))?;
                if v != MODEL_VERSION {
                    return Err(err(format!("unsupported model version {v}")));
                }
                version_seen = true;
            }
            "alpha" => alpha = Some(rest.first().and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| err("bad alpha".into()))?),
            "classes" => {
                if rest != ["negative", "neutral", "positive"] {
                    return Err(err("class order must be negative neutral positive".into()));
                }
            }
            "documents" => docs = Some(ints(&rest)?),
            "totals" => totals = Some(ints(&rest)?),
            "priors" => {
                if rest.len() != 3 {
                    return Err(err("expected 3 priors".into()));
                }
                let mut p = PerClass::<f64>::default();
                for (i, v) in rest.iter().enumerate() {
                    p.0[i] = v.parse().map_err(|e| err(format!("bad prior `{v}`: {e}")))?;
                }
                priors = Some(p);
            }
            "vocabulary" => vocab_size = Some(rest.first().and_then(|v| v.parse::<usize>().ok()).ok_or_else(|| err("bad vocabulary size".into()))?),
            "token" => {
                let (token, counts) = rest.split_first().ok_or_else(|| err("token line without token".into()))?;
                if token_counts.insert(token.to_string(), ints(counts)?).is_some() {
                    return Err(err(format!("token `{token}` listed twice")));
                }
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }

    let missing = |what: &str| ModelFileError::Inconsistent(format!("missing `{what}` line"));
    if !version_seen {
        return Err(missing("version"));
    }
    let model = BaselineModel {
        token_counts,
        class_totals: totals.ok_or_else(|| missing("totals"))?,
        class_docs: docs.ok_or_else(|| missing("documents"))?,
        class_priors: priors.ok_or_else(|| missing("priors"))?,
        alpha: alpha.ok_or_else(|| missing("alpha"))?,
    };
    if vocab_size != Some(model.token_counts.len()) {
        return Err(ModelFileError::Inconsistent(format!(
            "vocabulary line says {:?} but {} tokens listed",
            vocab_size,
            model.token_counts.len()
        )));
    }
    model.check_invariants().map_err(ModelFileError::Inconsistent)?;
    Ok(model)
}
