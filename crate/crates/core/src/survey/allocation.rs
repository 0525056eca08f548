//! Integer allocation of a total sample size across strata.

use crate::error::{Error, Result};

/// Stratified variance of the mean for a given allocation, from stratum sizes and standard deviations.
pub fn stratified_objective(sizes: &[usize], sds: &[f64], allocation: &[usize]) -> f64 {
    let n_total: usize = sizes.iter().sum();
    sizes
        .iter()
        .zip(sds)
        .zip(allocation)
        .map(|((&size, &sd), &n_k)| term(size, sd, n_total, n_k))
        .sum()
}

fn term(size: usize, sd: f64, n_total: usize, n_k: usize) -> f64 {
    let w = size as f64 / n_total as f64;
    w * w * (1.0 - n_k as f64 / size as f64) * sd * sd / n_k as f64
}

fn validate(sizes: &[usize], n: usize) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::EmptyInput);
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidParameter("stratum sizes must be at least 1".into()));
    }
    let capacity: usize = sizes.iter().sum();
    if n < sizes.len() || n > capacity {
        return Err(Error::InfeasibleAllocation(format!(
            "n = {n} must lie in [{}, {capacity}]",
            sizes.len()
        )));
    }
    Ok(())
}

/// Continuous optimum of `sum n_k = n`, `n_k` proportional to `weights` inside `[1, N_k]`.
fn bounded_proportional(sizes: &[usize], weights: &[f64], n: usize) -> Vec<f64> {
    let k = sizes.len();
    let mut fixed: Vec<Option<f64>> = vec![None; k];
    loop {
        let remaining = n as f64 - fixed.iter().flatten().sum::<f64>();
        let free: Vec<usize> = (0..k).filter(|&i| fixed[i].is_none()).collect();
        let mut w_sum: f64 = free.iter().map(|&i| weights[i]).sum();
        // all free strata have zero weight: spread by size instead
        let use_sizes = w_sum <= 0.0;
        if use_sizes {
            w_sum = free.iter().map(|&i| sizes[i] as f64).sum();
        }
        let raw = |i: usize| {
            let w = if use_sizes { sizes[i] as f64 } else { weights[i] };
            remaining * w / w_sum
        };
        // Fix only the worst violation per pass: fixing a low and a high
        // stratum together can leave nothing free to absorb the remainder.
        let worst = free
            .iter()
            .map(|&i| {
                let r = raw(i);
                let excess = if r < 1.0 {
                    1.0 / r
                } else if r > sizes[i] as f64 {
                    r / sizes[i] as f64
                } else {
                    1.0
                };
                (excess, i, r < 1.0)
            })
            .filter(|&(excess, _, _)| excess > 1.0)
            .max_by(|a, b| a.0.total_cmp(&b.0));
        match worst {
            Some((_, i, low)) => fixed[i] = Some(if low { 1.0 } else { sizes[i] as f64 }),
            None => return (0..k).map(|i| fixed[i].unwrap_or_else(|| raw(i))).collect(),
        }
    }
}

/// Floor each share, then hand out (or take back) units by largest (smallest) fractional part.
fn largest_remainder(sizes: &[usize], shares: &[f64], n: usize) -> Vec<usize> {
    let mut alloc: Vec<usize> = shares
        .iter()
        .zip(sizes)
        .map(|(&s, &size)| (s.floor() as usize).clamp(1, size))
        .collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut assigned: usize = alloc.iter().sum();
    while assigned > n {
        let before = assigned;
        for &i in order.iter().rev() {
            if assigned > n && alloc[i] > 1 {
                alloc[i] -= 1;
                assigned -= 1;
            }
        }
        debug_assert!(assigned < before);
    }
    while assigned < n {
        let before = assigned;
        for &i in &order {
            if assigned < n && alloc[i] < sizes[i] {
                alloc[i] += 1;
                assigned += 1;
            }
        }
        debug_assert!(assigned > before);
    }
    alloc
}

/// Sample sizes proportional to stratum sizes, each in `[1, N_k]`, summing to `n`.
pub fn proportional_allocation(sizes: &[usize], n: usize) -> Result<Vec<usize>> {
    validate(sizes, n)?;
    let weights: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let shares = bounded_proportional(sizes, &weights, n);
    Ok(largest_remainder(sizes, &shares, n))
}

/// Integer allocation minimising the stratified variance subject to
/// `sum n_k = n` and `1 <= n_k <= N_k`.
///
/// Starts from the continuous optimum `n_k ~ N_k sigma_k`, rounds by largest
/// remainder, then applies single-unit transfers between strata while any
/// transfer lowers the objective. The objective is separable and convex in
/// each `n_k`, so a transfer-stable allocation is a global optimum.
pub fn neyman_allocate(sizes: &[usize], sds: &[f64], n: usize) -> Result<Vec<usize>> {
    validate(sizes, n)?;
    if sds.len() != sizes.len() {
        return Err(Error::LengthMismatch {
            left: sizes.len(),
            right: sds.len(),
        });
    }
    if let Some(&bad) = sds.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "stratum sd {bad} must be finite and >= 0"
        )));
    }
    let weights: Vec<f64> = sizes.iter().zip(sds).map(|(&s, &sd)| s as f64 * sd).collect();
    let shares = bounded_proportional(sizes, &weights, n);
    let mut alloc = largest_remainder(sizes, &shares, n);

    let n_total: usize = sizes.iter().sum();
    let f = |k: usize, n_k: usize| term(sizes[k], sds[k], n_total, n_k);
    loop {
        let objective = stratified_objective(sizes, sds, &alloc);
        let tol = 1e-13 * objective.abs().max(f64::MIN_POSITIVE);
        let mut best: Option<(f64, usize, usize)> = None;
        for from in 0..sizes.len() {
            if alloc[from] <= 1 {
                continue;
            }
            let release = f(from, alloc[from] - 1) - f(from, alloc[from]);
            for to in 0..sizes.len() {
                if to == from || alloc[to] >= sizes[to] {
                    continue;
                }
                let delta = release + f(to, alloc[to] + 1) - f(to, alloc[to]);
                if delta < -tol && best.is_none_or(|(d, _, _)| delta < d) {
                    best = Some((delta, from, to));
                }
            }
        }
        match best {
            Some((_, from, to)) => {
                alloc[from] -= 1;
                alloc[to] += 1;
            }
            None => return Ok(alloc),
        }
    }
}
