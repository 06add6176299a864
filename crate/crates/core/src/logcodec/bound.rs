//! Counting the logs: how many distinct logs `M` choices can produce,
//! against how many rank sequences they must distinguish.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

/// Above this `M`, Catalan numbers come from the Stirling series instead of
/// exact integers.
pub const STIRLING_SWITCHOVER: u64 = 1000;

/// Per-choice base bounding the product of erased block lengths.
pub const BLOCK_BOUND: f64 = 1.5;

/// `max_x x^(1/x) = e^(1/e)`, the exact base that [`BLOCK_BOUND`] rounds up.
pub fn block_product_base() -> f64 {
    std::f64::consts::E.powf(1.0 / std::f64::consts::E)
}

fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits in u64") as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("top 64 bits");
    (top as f64).log2() + shift as f64
}

/// The `m`-th Catalan number, exactly.
pub fn catalan(m: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..m {
        // C_{i+1} = C_i * 2(2i + 1) / (i + 2)
        c = c * (2 * (2 * i + 1)) / (i + 2);
    }
    c
}

pub fn log2_catalan_exact(m: u64) -> f64 {
    log2_biguint(&catalan(m))
}

/// `ln(n!)` by the Stirling series, accurate to ~1e-15 relative for n >= 10.
fn ln_factorial(n: u64) -> f64 {
    if n < 10 {
        return (1..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

/// `log2 C_m` from `C_m = (2m)! / (m! (m + 1)!)` with Stirling factorials.
pub fn log2_catalan_stirling(m: u64) -> f64 {
    let ln = ln_factorial(2 * m) - ln_factorial(m) - ln_factorial(m) - ((m + 1) as f64).ln();
    ln / std::f64::consts::LN_2
}

pub fn log2_catalan(m: u64) -> f64 {
    if m <= STIRLING_SWITCHOVER {
        log2_catalan_exact(m)
    } else {
        log2_catalan_stirling(m)
    }
}

/// `log2( q^n * C_M * k^(M/2) * 2^(M/2) * 1.5^M )`, the number of logs a run
/// with `M` choices can leave.
pub fn count_logs_upper_bound(m: u64, n: u64, k: u64, q: u64) -> f64 {
    let m_f = m as f64;
    n as f64 * (q as f64).log2()
        + log2_catalan(m)
        + 0.5 * m_f * (k as f64).log2()
        + 0.5 * m_f
        + m_f * BLOCK_BOUND.log2()
}

/// `M log2(10 sqrt(k)) - count_logs_upper_bound(M, n, k, q)`: positive once
/// there are more rank sequences than logs.
pub fn compression_margin(m: u64, n: u64, k: u64, q: u64) -> f64 {
    m as f64 * (10.0 * (k as f64).sqrt()).log2() - count_logs_upper_bound(m, n, k, q)
}

/// Smallest `M` with a positive [`compression_margin`], or `None` if none
/// exists below `2^48`.
pub fn crossing_m(n: u64, k: u64, q: u64) -> Option<u64> {
    let positive = |m: u64| compression_margin(m, n, k, q) > 0.0;
    let mut hi = 1u64;
    while !positive(hi) {
        hi = hi.checked_mul(2)?;
        if hi > 1 << 48 {
            return None;
        }
    }
    let mut lo = hi / 2; // margin not positive at lo (or lo == 0)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if positive(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
