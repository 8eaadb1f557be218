use std::fmt;

/// Failures grouped by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input data: exit 2.
    Usage(String),
    /// The computation or an output write failed: exit 3.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<strands_core::Error> for CliError {
    fn from(e: strands_core::Error) -> Self {
        use strands_core::Error as E;
        match e {
            E::ConstantColumn(_) | E::DimensionMismatch(_) | E::InvalidArgument(_) | E::UnknownScenario(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
