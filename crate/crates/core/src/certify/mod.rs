//! Certificates for the weight properties, and the checks that produce them.
//!
//! Every check reports one of three verdicts. "holds" is only issued when
//! the inequality is established including all tail bounds; "fails" carries
//! an exact witness; anything in between is "inconclusive".

mod checks;
mod conv;
mod countex;
mod domar;
mod window;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use checks::{
    check_b, check_b_bound, check_parity_positivity, check_poly_decay, check_submultiplicative, ess_inf_check,
    poly_decay_constants, weight_equivalence, Equivalence, PolyDecay, SubmultMode,
};
pub use conv::{conv_at, pruefer_conv_closed};
pub use countex::{
    build_q_sequence, check_q_fractional_bound, countex_divergence_lower_bound, QSequence, QTerm,
};
pub use domar::{domar_classify, domar_partial, growth_bound, Classification, DomarVerdict, Growth};
pub use window::{TruncationSpec, Window};

pub const CERT_SCHEMA: &str = "lpw.certificate/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// positivity (a) and evenness (c)
    #[serde(rename = "a,c")]
    ParityPositivity,
    /// `u*u <= B u`
    #[serde(rename = "b")]
    Subconvolutive,
    /// `1/u(nx) <= C n^d`
    #[serde(rename = "d")]
    PolyDecay,
    Submult,
    Equiv,
    Domar,
    EssInf,
    Beurling,
    Countex,
    ConvRatio,
}

impl Property {
    pub fn tag(&self) -> &'static str {
        match self {
            Property::ParityPositivity => "a,c",
            Property::Subconvolutive => "b",
            Property::PolyDecay => "d",
            Property::Submult => "submult",
            Property::Equiv => "equiv",
            Property::Domar => "domar",
            Property::EssInf => "essinf",
            Property::Beurling => "beurling",
            Property::Countex => "countex",
            Property::ConvRatio => "conv-ratio",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails { witness: serde_json::Value },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails { .. } => "fails",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowInfo {
    pub spec: String,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub id: String,
    pub property: Property,
    /// construction tag of the weight
    pub weight: String,
    pub window: Option<WindowInfo>,
    pub truncation: Option<TruncationSpec>,
    pub verdict: Verdict,
    /// established by proof-grade arithmetic (as opposed to sampling)
    pub rigorous: bool,
    pub payload: BTreeMap<String, serde_json::Value>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub(crate) fn new(property: Property, weight: &str) -> Self {
        Certificate {
            schema: CERT_SCHEMA.into(),
            id: String::new(),
            property,
            weight: weight.into(),
            window: None,
            truncation: None,
            verdict: Verdict::Holds,
            rigorous: true,
            payload: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn with_window(mut self, w: &Window) -> Self {
        self.window = Some(WindowInfo { spec: w.spec.clone(), size: w.points.len() });
        self
    }

    pub(crate) fn put(&mut self, key: &str, v: impl Serialize) {
        self.payload.insert(key.into(), serde_json::to_value(v).expect("payload serializes"));
    }

    /// Fixes the id as a digest of everything else, so equal certificates
    /// get equal ids on every run.
    pub(crate) fn seal(mut self, salt: &str) -> Self {
        self.id.clear();
        let body = serde_json::to_string(&self).expect("certificate serializes");
        let mut h = Sha256::new();
        h.update(salt.as_bytes());
        h.update(body.as_bytes());
        let digest = h.finalize();
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        self.id = format!("{}:{}:{}", self.property.tag(), self.weight, hex);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Process exit code for a bundle: 0 all hold, 1 any fails, 3 otherwise.
pub fn exit_code(certs: &[Certificate]) -> i32 {
    if certs.iter().any(|c| c.verdict.is_fails()) {
        1
    } else if certs.iter().all(|c| c.verdict.is_holds()) {
        0
    } else {
        3
    }
}

/// Combines per-item verdicts: the first failure wins, then any
/// inconclusive item, else holds.
pub(crate) fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut inconclusive = None;
    for v in verdicts {
        match v {
            Verdict::Fails { .. } => return v,
            Verdict::Inconclusive { .. } if inconclusive.is_none() => inconclusive = Some(v),
            _ => {}
        }
    }
    inconclusive.unwrap_or(Verdict::Holds)
}
