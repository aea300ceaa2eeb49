use crate::error::{Error, Result};

const DENSE_MAX_STATES: usize = 8;
const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITERS: usize = 1_000_000;
const RESIDUAL_TOL: f64 = 1e-12;

/// `‖πP − π‖∞`
pub(crate) fn residual(pi: &[f64], rows: &[Vec<f64>]) -> f64 {
    let next = left_multiply(pi, rows);
    next.iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn left_multiply(v: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (vi, row) in v.iter().zip(rows) {
        for (o, p) in out.iter_mut().zip(row) {
            *o += vi * p;
        }
    }
    out
}

/// Stationary distribution `π` of a row-stochastic matrix, with `πP = π`, `Σπ = 1`.
///
/// Dense Gaussian elimination for up to eight states, power iteration on the
/// lazy chain `(P + I)/2` above that. Fails with `NonConvergence` when the
/// residual stays above `1e-12`, which is what a reducible chain produces.
pub fn stationary_distribution(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = rows.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidModel(
            "transition matrix must be square and nonempty".into(),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidModel(format!("row {i} has an entry outside [0,1]")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > super::SUM_TOL {
            return Err(Error::InvalidModel(format!("row {i} sums to {s}, not 1")));
        }
    }

    let (pi, iterations) = if m <= DENSE_MAX_STATES {
        (dense_solve(rows), 0)
    } else {
        power_iteration(rows)
    };
    let pi = pi.ok_or(Error::NonConvergence {
        iterations,
        residual: f64::INFINITY,
    })?;
    let r = residual(&pi, rows);
    if r >= RESIDUAL_TOL {
        return Err(Error::NonConvergence {
            iterations,
            residual: r,
        });
    }
    Ok(pi)
}

/// Solves `(Pᵀ − I)π = 0` with the last equation replaced by `Σπ = 1`.
fn dense_solve(rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = rows.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = rows[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[m - 1] = vec![1.0; m + 1];

    for col in 0..m {
        let pivot = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col {
                let factor = row[col] / pivot_row[col];
                if factor != 0.0 {
                    for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                        *x -= factor * p;
                    }
                }
            }
        }
    }
    let mut pi: Vec<f64> = (0..m).map(|i| (a[i][m] / a[i][i]).max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    Some(pi)
}

fn power_iteration(rows: &[Vec<f64>]) -> (Option<Vec<f64>>, usize) {
    let m = rows.len();
    let mut pi = vec![1.0 / m as f64; m];
    for it in 1..=POWER_MAX_ITERS {
        let step = left_multiply(&pi, rows);
        let next: Vec<f64> = pi.iter().zip(&step).map(|(a, b)| 0.5 * (a + b)).collect();
        let delta = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if delta < POWER_TOL {
            let s: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|p| *p /= s);
            return (Some(pi), it);
        }
    }
    (None, POWER_MAX_ITERS)
}

/// Period of the chain, taken from the communicating class of state 0.
/// Returns 1 for aperiodic chains.
pub fn chain_period(rows: &[Vec<f64>]) -> usize {
    let m = rows.len();
    if m == 0 {
        return 1;
    }
    let mut level: Vec<Option<usize>> = vec![None; m];
    level[0] = Some(0);
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut g = 0usize;
    while let Some(u) = queue.pop_front() {
        let lu = level[u].unwrap();
        for (v, &p) in rows[u].iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            match level[v] {
                None => {
                    level[v] = Some(lu + 1);
                    queue.push_back(v);
                }
                Some(lv) => g = gcd(g, (lu + 1).abs_diff(lv)),
            }
        }
    }
    g.max(1)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
