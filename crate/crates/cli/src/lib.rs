//! Library side of the `symdyn` command-line tool: run configuration,
//! the two analysis pipelines and the synthetic detection benchmark.

pub mod bench;
pub mod config;
pub mod error;
pub mod pipeline;

pub use config::RunConfig;
pub use error::{StageError, StageResult};

/// Run `f` on a dedicated pool of `jobs` worker threads, or on the global
/// pool when `jobs` is `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
