use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration errors:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Core(#[from] viergo_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Validation(String),
}
