use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch in {what} at bidegree ({p},{q}): expected {expected:?}, found {found:?}")]
    Shape {
        what: &'static str,
        p: usize,
        q: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("structure equations are not integrable at {generator}: {reason} (residual {residual:.3e})")]
    NonIntegrable {
        generator: String,
        reason: String,
        residual: f64,
    },

    #[error("precondition failed: {what} (residual {residual:.3e})")]
    Precondition { what: String, residual: f64 },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("unknown catalog entry `{name}`; available: {}", available.join(", "))]
    Lookup { name: String, available: Vec<String> },

    #[error("(n-1)-st root did not converge after {iterations} Newton steps (last residual {last:.3e})")]
    NoRoot {
        iterations: usize,
        last: f64,
        trace: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
