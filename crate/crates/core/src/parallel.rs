//! Static range partition over scoped threads.

/// Worker count: `LIL_LAB_THREADS` when set, otherwise `requested`, otherwise
/// the available parallelism.
pub fn worker_count(requested: Option<usize>) -> usize {
  if let Some(n) = std::env::var("LIL_LAB_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0)
  {
    return n;
  }
  requested.filter(|&n| n > 0).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Evaluates `f(i)` for `i in 0..n` and returns results in index order.
///
/// Indices are split into `workers` contiguous ranges; each result depends only
/// on its index, so the output is identical for any worker count.
pub fn par_map<R, F>(n: usize, workers: usize, f: F) -> Vec<R>
where
  R: Send,
  F: Fn(usize) -> R + Sync,
{
  let workers = workers.clamp(1, n.max(1));
  if workers == 1 {
    return (0..n).map(&f).collect();
  }
  let chunk = n.div_ceil(workers);
  let f = &f;
  std::thread::scope(|s| {
    let handles: Vec<_> = (0..workers)
      .map(|w| {
        let lo = (w * chunk).min(n);
        let hi = ((w + 1) * chunk).min(n);
        s.spawn(move || (lo..hi).map(f).collect::<Vec<R>>())
      })
      .collect();
    handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
  })
}
