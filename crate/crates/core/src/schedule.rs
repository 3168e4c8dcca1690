//! Linear parameter schedules shared by the spectral and baseline augmenters.

/// Rounds to 15 significant decimal digits so that schedules built from
/// decimal inputs land on the decimal values (e.g. `0.3 / 3` becomes `0.1`).
fn snap(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Noise fractions for `r = 1..=R`: `rho_r = r * eta / R`.
///
/// Zero is excluded and the last entry is `eta` itself.
pub fn rho_schedule(replications: usize, eta: f64) -> Vec<f64> {
    (1..=replications)
        .map(|r| {
            if r == replications {
                eta
            } else {
                snap(r as f64 * eta / replications as f64)
            }
        })
        .collect()
}

/// `n` values from `lo` to `hi` inclusive; a single value is the midpoint.
pub fn linspace_inclusive(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![snap((lo + hi) / 2.0)],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    lo
                } else if i == n - 1 {
                    hi
                } else {
                    snap(lo + (hi - lo) * i as f64 / (n - 1) as f64)
                }
            })
            .collect(),
    }
}
