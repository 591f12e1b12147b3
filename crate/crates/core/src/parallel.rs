//! Shared worker pool. `SANCTION_SIM_THREADS` caps its size.

use std::sync::OnceLock;

use rayon::{ThreadPool, ThreadPoolBuilder};

pub const THREADS_ENV: &str = "SANCTION_SIM_THREADS";

/// Worker count from the environment; `None` means rayon's default.
pub fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

pub fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = ThreadPoolBuilder::new().thread_name(|i| format!("sanction-worker-{i}"));
        if let Some(n) = configured_threads() {
            b = b.num_threads(n);
        }
        b.build().expect("worker pool")
    })
}
