//! Replica fan-out with a deterministic merge order.

use rayon::prelude::*;

/// Runs `f(replica)` for `replica in 0..replicas` in parallel and returns the
/// results in replica order.
pub fn fan_out<T, F>(replicas: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..replicas).into_par_iter().map(f).collect()
}

/// Like [`fan_out`] but stops at the first error (in replica order).
pub fn try_fan_out<T, E, F>(replicas: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    fan_out(replicas, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_replica_order() {
        let v = fan_out(1000, |r| r * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i as u64));
    }
}
