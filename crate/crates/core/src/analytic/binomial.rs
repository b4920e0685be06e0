//! Alternating binomial sums produced by order statistics of `K` i.i.d.
//! relays.

/// Largest relay count the binomial sums accept. Alternating-sign
/// cancellation grows with `K`; larger networks go through the oracles.
pub const MAX_RELAYS: usize = 64;

/// Exact `C(n, k)` for `n <= MAX_RELAYS`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    // Each partial product C(n - k + i, i) is an integer, so the division is exact.
    (1..=k as u64).fold(1u64, |acc, i| {
        let num = acc as u128 * (n as u64 - k as u64 + i) as u128;
        (num / i as u128) as u64
    })
}

/// `K Σ_{k1=0}^{K-1} Σ_{k2=0}^{K-1-k1} C(K-1,k1) C(K-1-k1,k2) a^{k1} (-1)^{k2} (1-a)^{K-1-k1-k2} β(k1,k2)`.
///
/// The multinomial weights come from assigning each of the `K - 1`
/// non-selected relays to one of three events with weights `a`, `-1` and
/// `1 - a`.
pub fn g_weighted_sum(a: f64, beta_of: impl Fn(usize, usize) -> f64, k: usize) -> f64 {
    assert!((1..=MAX_RELAYS).contains(&k), "relay count {k} outside 1..={MAX_RELAYS}");
    let m = k - 1;
    let mut total = 0.0;
    for k1 in 0..=m {
        for k2 in 0..=m - k1 {
            let rest = m - k1 - k2;
            let weight = binomial(m, k1) as f64
                * binomial(m - k1, k2) as f64
                * a.powi(k1 as i32)
                * if k2 % 2 == 0 { 1.0 } else { -1.0 }
                * (1.0 - a).powi(rest as i32);
            total += weight * beta_of(k1, k2);
        }
    }
    k as f64 * total
}

/// `K Σ_{k1=0}^{K-1} C(K-1,k1) (-ς)^{k1} β^{K-1-k1} φ(k1)`.
pub fn g_prime_sum(sigma: f64, beta: f64, phi_of: impl Fn(usize) -> f64, k: usize) -> f64 {
    assert!((1..=MAX_RELAYS).contains(&k), "relay count {k} outside 1..={MAX_RELAYS}");
    let m = k - 1;
    let total: f64 = (0..=m)
        .map(|k1| {
            binomial(m, k1) as f64
                * (-sigma).powi(k1 as i32)
                * beta.powi((m - k1) as i32)
                * phi_of(k1)
        })
        .sum();
    k as f64 * total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial(63, 31), 916_312_070_471_295_267);
    }

    #[test]
    fn single_relay_sums_collapse() {
        assert_eq!(g_weighted_sum(0.37, |_, _| 2.5, 1), 2.5);
        assert_eq!(g_prime_sum(0.2, 0.7, |_| 4.0, 1), 4.0);
    }

    #[test]
    fn constant_weights_cancel() {
        assert_eq!(g_weighted_sum(0.0, |_, _| 3.0, 2), 0.0);
        assert_eq!(g_prime_sum(1.0, 1.0, |_| 3.0, 2), 0.0);
    }
}
