use thiserror::Error;

/// Errors surfaced by the numerical operators and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("derivative order {0} not supported (expected 1, 2 or 3)")]
    InvalidOrder(u32),

    #[error("Hölder exponent {0} outside (0, 1]")]
    InvalidAlpha(f64),

    #[error("{name} = {value} outside {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("curve is irregular: min |dz/ds| = {0:.3e}")]
    IrregularCurve(f64),

    #[error("curve is not chord-arc: chord ratio {0:.3e} below degeneracy floor")]
    NotChordArc(f64),

    #[error("Cauchy kernel evaluated at the singularity x = 0")]
    KernelSingularity,

    #[error("evaluation point within half a grid spacing of a sheet (distance {0:.3e})")]
    TooCloseToSheet(f64),

    #[error("sheet geometry degenerate: {0}")]
    SheetsTouch(String),

    #[error("vortex-sheet strength degenerate: ∫ϖ₀² = {0:.3e}")]
    DegenerateStrength(f64),

    #[error("sheet pair count {0} must be at least 1")]
    InvalidSheetCount(usize),

    #[error("mismatched grids: {0}")]
    GridMismatch(String),

    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("non-finite value produced: {0}")]
    NonFinite(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// numerical precondition failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 1,
            _ => 3,
        }
    }
}
