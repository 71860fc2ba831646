use thiserror::Error;

/// Failures reading or writing the file formats. Display strings start with
/// the module that owns the format.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Core(#[from] takeover_core::Error),
    #[error("dataset: {0}")]
    Dataset(takeover_core::DatasetError),
    #[error("booster: invalid model file: {0}")]
    Model(serde_json::Error),
    #[error("output: {0}")]
    Json(serde_json::Error),
    #[error("output: {0}")]
    Csv(csv::Error),
}

// Not `#[from]`: that would also expose the wrapped error as the source and
// print its message twice in error chains.
impl From<takeover_core::DatasetError> for FormatError {
    fn from(e: takeover_core::DatasetError) -> Self {
        FormatError::Dataset(e)
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json(e)
    }
}

impl From<csv::Error> for FormatError {
    fn from(e: csv::Error) -> Self {
        FormatError::Csv(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::error::Error as _;

    #[test]
    fn wrapped_messages_print_once() {
        let e = FormatError::from(takeover_core::DatasetError::Empty);
        assert!(e.source().is_none());
        assert_eq!(format!("{:#}", anyhow::Error::new(e)), "dataset: dataset has no rows");
        let core = takeover_core::Error::from(takeover_core::DatasetError::Empty);
        assert_eq!(format!("{:#}", anyhow::Error::new(core)), "dataset: dataset has no rows");
    }
}
