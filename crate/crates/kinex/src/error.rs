//! Error type shared by every module of the crate.
//!
//! Each variant maps to a stable machine-parsable code via [`Error::code`].
//! The CLI prefixes its diagnostics with that code so scripts can branch on
//! failure class without parsing prose.

use thiserror::Error;

use crate::panel::CountryCode;

/// Everything that can go wrong in panel ingestion, co-movement analytics,
/// regression, or the exchange-model simulation.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// The first CSV line is not a valid wide-panel header.
    #[error("malformed header: {detail}")]
    MalformedHeader { detail: String },

    /// A row label in a CSV input is not a three-letter uppercase code.
    #[error("line {line}: invalid country code {code:?} (want three letters A-Z)")]
    InvalidRowCode { line: usize, code: String },

    /// A country code constructed directly (not from a CSV row) is invalid.
    #[error("invalid country code {code:?} (want three letters A-Z)")]
    InvalidCountryCode { code: String },

    /// The same country labels two different CSV rows.
    #[error("line {line}: duplicate country code {code}")]
    DuplicateCountry { line: usize, code: CountryCode },

    /// A CSV row has a different field count than the header.
    #[error("line {line} (row {code}): expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        code: String,
        expected: usize,
        found: usize,
    },

    /// A value cell is neither empty nor a finite number.
    #[error("row {code}, column {year}: unreadable value cell {cell:?}")]
    BadValueCell {
        code: String,
        year: i32,
        cell: String,
    },

    /// A requested country is absent from the panel.
    #[error("unknown country {code}")]
    UnknownCountry { code: String },

    /// Two series share fewer observed years than the cleaning policy allows.
    #[error("{a} and {b} share only {overlap} observed years (minimum {required})")]
    InsufficientOverlap {
        a: CountryCode,
        b: CountryCode,
        overlap: usize,
        required: usize,
    },

    /// Not enough usable data to produce the requested output.
    #[error("insufficient data: {detail}")]
    InsufficientData { detail: String },

    /// A statistic is undefined because a series is (numerically) constant.
    #[error("degenerate series: {detail}")]
    DegenerateSeries { detail: String },

    /// Paired series have different lengths.
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A series is shorter than the operation requires.
    #[error("series of length {len} is too short (minimum {min})")]
    SeriesTooShort { len: usize, min: usize },

    /// A cleaning policy fails validation.
    #[error("invalid cleaning policy: {detail}")]
    InvalidPolicy { detail: String },

    /// A matrix fails its structural invariants.
    #[error("invalid matrix: {detail}")]
    InvalidMatrix { detail: String },

    /// A requested embedding dimension is out of range.
    #[error("embedding dimension {dims} out of range for {n} points (want 1..={max})", max = .n.saturating_sub(1))]
    InvalidDims { dims: usize, n: usize },

    /// A scalar argument lies outside its mathematical domain.
    #[error("{what} = {value} outside {domain}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A simulation configuration fails validation.
    #[error("invalid simulation config: {detail}")]
    InvalidConfig { detail: String },

    /// An exchange step names impossible participants.
    #[error("invalid exchange: {detail}")]
    InvalidExchange { detail: String },

    /// Adaptive quadrature exhausted its bisection depth.
    #[error("quadrature did not converge: {detail}")]
    QuadratureFailed { detail: String },

    /// A requested year is not observed in both panels.
    #[error("year {year} not present in both panels (years in both: {available:?})")]
    YearUnavailable { year: i32, available: Vec<i32> },
}

impl Error {
    /// Stable machine-parsable failure class.
    ///
    /// `E-PARSE` input text is structurally broken; `E-DATA` the data cannot
    /// support the request; `E-SERIES` a series is unusable for a statistic;
    /// `E-INVALID` a caller-supplied object fails validation; `E-DOMAIN` a
    /// scalar is outside its mathematical domain; `E-NUMERIC` a numerical
    /// routine failed to converge.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            MalformedHeader { .. }
            | InvalidRowCode { .. }
            | InvalidCountryCode { .. }
            | DuplicateCountry { .. }
            | RaggedRow { .. }
            | BadValueCell { .. } => "E-PARSE",
            UnknownCountry { .. }
            | InsufficientOverlap { .. }
            | InsufficientData { .. }
            | YearUnavailable { .. } => "E-DATA",
            DegenerateSeries { .. } | LengthMismatch { .. } | SeriesTooShort { .. } => "E-SERIES",
            InvalidPolicy { .. }
            | InvalidMatrix { .. }
            | InvalidDims { .. }
            | InvalidConfig { .. }
            | InvalidExchange { .. } => "E-INVALID",
            OutOfDomain { .. } => "E-DOMAIN",
            QuadratureFailed { .. } => "E-NUMERIC",
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
