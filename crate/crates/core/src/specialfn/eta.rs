use crate::error::{LiouvilleError, Result};

/// η(q) = q^{1/24}∏(1−qⁿ), with at least `n_terms` factors and enough
/// more that the dropped tail changes the product by less than 1e−15.
pub fn dedekind_eta(q: f64, n_terms: usize) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(LiouvilleError::domain(format!(
            "eta needs 0 < q < 1, got {q}"
        )));
    }
    let n_terms = n_terms.max(1);
    let tail_scale = 1.0 / (1.0 - q);
    let mut prod = 1.0;
    let mut qn = 1.0;
    let mut n = 0usize;
    loop {
        n += 1;
        qn *= q;
        prod *= 1.0 - qn;
        if n >= n_terms && qn * q * tail_scale < 1e-16 {
            break;
        }
    }
    Ok(q.powf(1.0 / 24.0) * prod)
}

/// Partition numbers P(0..=n) by Euler's pentagonal recurrence.
pub fn partition_counts(n: usize) -> Vec<u128> {
    let mut p: Vec<i128> = vec![0; n + 1];
    p[0] = 1;
    for m in 1..=n {
        let mut total: i128 = 0;
        let mut k: i64 = 1;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > m {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            total += sign * p[m - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= m {
                total += sign * p[m - g2];
            }
            k += 1;
        }
        p[m] = total;
    }
    p.into_iter().map(|v| v as u128).collect()
}

/// Number of integer partitions of n.
pub fn partition_count(n: usize) -> u128 {
    partition_counts(n)[n]
}

/// ln η(q) for 0 < q < 1, accurate up to q → 1 where the product form
/// underflows. Uses η(e^{−2πt}) = t^{−1/2}η(e^{−2π/t}) when t < 1.
pub fn ln_dedekind_eta(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(LiouvilleError::domain(format!(
            "eta needs 0 < q < 1, got {q}"
        )));
    }
    let t = -q.ln() / (2.0 * std::f64::consts::PI);
    if t >= 1.0 {
        Ok(ln_eta_product(q.ln()))
    } else {
        Ok(-0.5 * t.ln() + ln_eta_product(-2.0 * std::f64::consts::PI / t))
    }
}

/// ln of q^{1/24}∏(1 − qⁿ) given ln q ≤ −2π.
fn ln_eta_product(ln_q: f64) -> f64 {
    let q = ln_q.exp();
    let mut sum = ln_q / 24.0;
    let mut qn = 1.0;
    loop {
        qn *= q;
        if qn < 1e-18 {
            return sum;
        }
        sum += (-qn).ln_1p();
    }
}
