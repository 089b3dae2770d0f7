//! Deterministic per-case parallelism.
//!
//! Work items are independent and own their seeds and ledgers, so the only
//! determinism requirement is that results come back in index order, which
//! this helper guarantees regardless of the thread count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Runs `f(0..n)` on up to `threads` workers and returns results in index order.
pub fn run_indexed<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(n.max(1));
    if threads <= 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result = f(i);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_come_back_in_order_for_any_thread_count() {
        let expected: Vec<usize> = (0..50).map(|i| i * i).collect();
        for threads in [1, 2, 3, 8] {
            assert_eq!(run_indexed(50, threads, |i| i * i), expected);
        }
    }

    #[test]
    fn handles_empty_input() {
        assert_eq!(run_indexed(0, 4, |i| i), Vec::<usize>::new());
    }
}
