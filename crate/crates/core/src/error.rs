use thiserror::Error;

/// Errors raised by the channel, conditioning and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid array configuration: {0}")]
    InvalidConfig(String),

    #[error("index out of range: {what} = {index}, expected 1..={max}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix dimension {0} exceeds the eigensolver limit of 64")]
    DimensionTooLarge(usize),

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("Gram matrix has a negative eigenvalue {value:e} (largest {max:e})")]
    NegativeEigenvalue { value: f64, max: f64 },

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("{0}")]
    Config(#[from] ConfigError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical kernels (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::NegativeEigenvalue { .. } | Error::NotHermitian { .. }
        )
    }

    /// True for errors caused by the user-supplied scenario.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidConfig(_)
                | Error::InvalidMedium(_)
                | Error::Infeasible(_)
                | Error::IndexOutOfRange { .. }
                | Error::DimensionMismatch(_)
                | Error::DimensionTooLarge(_)
        )
    }
}

/// Diagnostic produced while reading a scenario file.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", self.render())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub keys: Vec<String>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            keys: Vec::new(),
            message: message.into(),
        }
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }

    pub fn with_key(mut self, key: impl Into<String>) -> Self {
        self.keys.push(key.into());
        self
    }

    fn render(&self) -> String {
        let mut out = String::from("config error");
        if let Some(line) = self.line {
            out.push_str(&format!(" at line {line}"));
        }
        if !self.keys.is_empty() {
            out.push_str(&format!(" [{}]", self.keys.join(", ")));
        }
        out.push_str(": ");
        out.push_str(&self.message);
        out
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
