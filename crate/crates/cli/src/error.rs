use symdyn_core::Error;

/// A core error tagged with the pipeline stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub source: Error,
}

impl StageError {
    /// 2 configuration, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.source)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Numerical(_) => 4,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Data(_) | Error::ConstantColumn(_) => 3,
    }
}

pub type StageResult<T> = std::result::Result<T, StageError>;

pub trait Tag<T> {
    fn stage(self, stage: &'static str) -> StageResult<T>;
}

impl<T> Tag<T> for symdyn_core::Result<T> {
    fn stage(self, stage: &'static str) -> StageResult<T> {
        self.map_err(|source| StageError { stage, source })
    }
}
