use std::fmt;

/// Process exit status of a failed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Infeasible = 2,
    BoundViolation = 3,
    OutOfRegion = 4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Usage,
            message: message.into(),
        }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Infeasible,
            message: message.into(),
        }
    }

    pub fn bound_violation(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::BoundViolation,
            message: message.into(),
        }
    }

    pub fn out_of_region(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::OutOfRegion,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::usage(format!("i/o error: {err}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        Self::usage(format!("invalid JSON: {err}"))
    }
}

impl From<dynstc::CertificateError> for CliError {
    fn from(err: dynstc::CertificateError) -> Self {
        use dynstc::CertificateError as E;
        match err {
            E::NoFallback(_) | E::NotPositiveDefinite => Self::infeasible(err.to_string()),
            _ => Self::usage(err.to_string()),
        }
    }
}

impl From<dynstc::sim::SimError> for CliError {
    fn from(err: dynstc::sim::SimError) -> Self {
        use dynstc::sim::SimError;
        use dynstc::triggering::TriggerError;
        match err {
            SimError::Trigger(TriggerError::OutOfRegion { .. }) | SimError::Disturbance(_) => {
                Self::out_of_region(err.to_string())
            }
            _ => Self::usage(err.to_string()),
        }
    }
}

impl From<dynstc::triggering::TriggerError> for CliError {
    fn from(err: dynstc::triggering::TriggerError) -> Self {
        dynstc::sim::SimError::from(err).into()
    }
}
