use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment '{0}' (see `symplab list`)")]
    UnknownExperiment(String),

    #[error("no experiment given")]
    MissingExperiment,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] symplab::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
