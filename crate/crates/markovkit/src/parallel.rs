use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// Runs `f(0), …, f(trials − 1)` on `jobs` threads and returns the results in trial
/// order. Each trial derives its own randomness, so the output does not depend on `jobs`.
pub fn map_trials<T, F>(jobs: usize, trials: usize, f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> markovkit_core::Result<T> + Sync + Send,
{
    if jobs <= 1 {
        return Ok((0..trials)
            .map(f)
            .collect::<markovkit_core::Result<Vec<T>>>()?);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(&f)
            .collect::<markovkit_core::Result<Vec<T>>>()
    })?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_jobs() {
        let f = |t: usize| Ok((t * 7919) % 101);
        let one = map_trials(1, 200, f).unwrap();
        let four = map_trials(4, 200, f).unwrap();
        assert_eq!(one, four);
    }
}
