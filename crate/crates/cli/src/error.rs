use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("unknown preset `{0}` (available: fig2, fig3, fig4, fig5)")]
    UnknownPreset(String),
    #[error(transparent)]
    Model(#[from] ehd_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
