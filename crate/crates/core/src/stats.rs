//! One-sample Kolmogorov–Smirnov test against Uniform(0, 1).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Asymptotic Kolmogorov survival function `Q(x) = 2 Σ (-1)^(k-1) exp(-2k²x²)`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // the alternating series converges slowly here and Q(x) is 1 to double precision
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of `samples` against Uniform(0, 1). The p-value uses Stephens'
/// finite-sample correction `(√n + 0.12 + 0.11/√n)·D`.
pub fn ks_uniform(samples: &[f64]) -> KsResult {
    let n = samples.len();
    assert!(n > 0, "KS test needs at least one sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let x = x.clamp(0.0, 1.0);
            let above = (j + 1) as f64 / nf - x;
            let below = x - j as f64 / nf;
            above.max(below)
        })
        .fold(0.0, f64::max);
    let root = nf.sqrt();
    let p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic);
    KsResult {
        statistic,
        p_value,
        n,
    }
}
