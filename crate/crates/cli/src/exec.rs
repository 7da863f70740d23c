use std::sync::atomic::{AtomicUsize, Ordering};

use locband_core::harness::Executor;

/// Scoped worker threads pulling job indices from a shared counter.
/// Results are reassembled by index, so output never depends on scheduling.
#[derive(Debug, Clone, Copy)]
pub struct Threaded {
    pub threads: usize,
}

impl Threaded {
    pub fn new(threads: usize) -> Self {
        Self { threads: threads.max(1) }
    }
}

impl Executor for Threaded {
    fn map_indices<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let workers = self.threads.min(count);
        if workers <= 1 {
            return (0..count).map(f).collect();
        }
        let next = AtomicUsize::new(0);
        let mut parts: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut local = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= count {
                                break local;
                            }
                            local.push((i, f(i)));
                        }
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut all: Vec<(usize, T)> = parts.drain(..).flatten().collect();
        all.sort_unstable_by_key(|p| p.0);
        all.into_iter().map(|p| p.1).collect()
    }
}
