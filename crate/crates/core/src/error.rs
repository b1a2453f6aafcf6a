use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),
    #[error("no subgroup chain is defined for {0}")]
    NoChain(String),
    #[error("point {point} is not covered by the first {terms} chain terms")]
    ChainExhausted { point: String, terms: usize },
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mass of the phi sequence is not certifiable: {0}")]
    MassNotCertifiable(String),
    #[error("summand {0} carries no (b)-certificate")]
    MissingBCertificate(usize),
    #[error("no closed-form tail available for {0}")]
    NoClosedFormTail(String),
    #[error("window is not closed under negation: {0} is present, its negative is not")]
    WindowNotSymmetric(String),
    #[error("truncation {0}")]
    Truncation(String),
    #[error("tolerance not met: {0}")]
    Tolerance(String),
    #[error("not certifiable: {0}")]
    NotCertifiable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
