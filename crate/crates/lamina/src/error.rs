use thiserror::Error;

/// Errors surfaced by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate chord: feet coincide at angle {0}")]
    DegenerateChord(f64),

    #[error("chord foot {foot} does not lie on the boundary of fragment {label}")]
    FootNotInFragment { foot: f64, label: String },

    #[error("fragment {0} is not alive")]
    FragmentNotAlive(String),

    #[error("empty chord set")]
    EmptyChordSet,

    #[error("height query endpoint {0} collides with a chord foot")]
    QueryAtFoot(f64),

    #[error("chords cross: ({0}, {1}) and ({2}, {3})")]
    CrossingChords(f64, f64, f64, f64),

    #[error("no Malthusian exponent: kappa(0+) must be negative (got kappa({p}) = {value})")]
    NoMalthusianExponent { p: f64, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("coding function: {0}")]
    Coding(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),
}
