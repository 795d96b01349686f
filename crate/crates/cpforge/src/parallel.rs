//! Scoped-thread helpers for the embarrassingly parallel pieces: candidate
//! scoring and sign-vector enumeration. Worker count comes from
//! `CPFORGE_THREADS` (capped at the machine's parallelism), a value of 1
//! short-circuits to the caller's thread.

use std::sync::Mutex;

pub fn worker_count() -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("CPFORGE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n >= 1 => n.min(hw),
        _ => hw,
    }
}

/// Splits `0..total` into contiguous ranges, runs `f` per range, sums the
/// results.
pub fn sum_over_ranges<F>(total: u64, f: F) -> f64
where
    F: Fn(std::ops::Range<u64>) -> f64 + Sync,
{
    let workers = worker_count().min(total.max(1) as usize);
    if workers <= 1 || total < 1024 {
        return f(0..total);
    }
    let chunk = total.div_ceil(workers as u64);
    let acc = Mutex::new(0.0f64);
    std::thread::scope(|scope| {
        for w in 0..workers as u64 {
            let start = w * chunk;
            let end = ((w + 1) * chunk).min(total);
            if start >= end {
                continue;
            }
            let f = &f;
            let acc = &acc;
            scope.spawn(move || {
                let local = f(start..end);
                *acc.lock().unwrap() += local;
            });
        }
    });
    acc.into_inner().unwrap()
}

/// Evaluates `score` on every item index and returns the minimizing
/// `(index, value)`, ties to the lowest index. Returns `None` on an empty
/// range.
pub fn argmin_over<F>(n: usize, score: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync,
{
    if n == 0 {
        return None;
    }
    let workers = worker_count().min(n);
    if workers <= 1 || n < 256 {
        return argmin_serial(0..n, &score);
    }
    let chunk = n.div_ceil(workers);
    let best = Mutex::new(None::<(usize, f64)>);
    std::thread::scope(|scope| {
        for w in 0..workers {
            let start = w * chunk;
            let end = ((w + 1) * chunk).min(n);
            if start >= end {
                continue;
            }
            let score = &score;
            let best = &best;
            scope.spawn(move || {
                if let Some(local) = argmin_serial(start..end, score) {
                    let mut guard = best.lock().unwrap();
                    let replace = match *guard {
                        None => true,
                        Some((bi, bv)) => local.1 < bv || (local.1 == bv && local.0 < bi),
                    };
                    if replace {
                        *guard = Some(local);
                    }
                }
            });
        }
    });
    best.into_inner().unwrap()
}

fn argmin_serial<F>(range: std::ops::Range<usize>, score: &F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64,
{
    let mut best: Option<(usize, f64)> = None;
    for i in range {
        let v = score(i);
        match best {
            None => best = Some((i, v)),
            Some((_, bv)) if v < bv => best = Some((i, v)),
            _ => {}
        }
    }
    best
}
