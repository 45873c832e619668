//! Numerical constants with one-sided enclosures.
//!
//! Every `*_upper` value is at least the true real number, so an inequality
//! checked against it cannot pass through rounding alone.

use std::f64::consts::PI;

/// Relative inflation applied to closed forms evaluated in floating point.
const INFLATE: f64 = 1.0 + 16.0 * f64::EPSILON;

fn up(x: f64) -> f64 {
    x.next_up() * INFLATE
}

fn down(x: f64) -> f64 {
    x.next_down() / INFLATE
}

/// Upper enclosure of `pi^2 / 6 = sum_{j >= 1} j^-2`.
pub fn basel_upper() -> f64 {
    up(PI * PI / 6.0)
}

/// Lower enclosure of `sum_{j=1}^{k} j^-2`.
pub fn partial_inverse_squares_lower(k: u64) -> f64 {
    // summing small terms first keeps the error below k ulps of the total
    let s: f64 = (1..=k).rev().map(|j| 1.0 / (j as f64 * j as f64)).sum();
    down(s * (1.0 - 2.0 * k as f64 * f64::EPSILON))
}

/// Upper enclosure of the tail `sum_{j > k} j^-2`.
///
/// The larger of the two available bounds is discarded: the closed form
/// minus a lower partial sum, and `1 / (k + 1/2)`.
pub fn inverse_square_tail_upper(k: u64) -> f64 {
    let by_difference = basel_upper() - partial_inverse_squares_lower(k);
    let by_integral = up(1.0 / (k as f64 + 0.5));
    by_difference.min(by_integral).max(0.0)
}

/// Upper enclosure of `||phi_k||_2 = (2 sum_{j > k} j^-2)^(1/2)`, the norm of
/// the multiplier `m -> 1/m` on `|m| > k`.
pub fn tail_factor_upper(k: u64) -> f64 {
    up((2.0 * inverse_square_tail_upper(k)).sqrt())
}

/// Upper enclosure of `pi / sqrt(3)`.
pub fn pi_over_sqrt3_upper() -> f64 {
    up(PI / 3f64.sqrt())
}

/// Upper enclosure of `sqrt(2 / k)`; `k` must be positive.
pub fn sqrt_two_over_k_upper(k: u64) -> f64 {
    assert!(k > 0, "sqrt(2/k) needs k > 0");
    up((2.0 / k as f64).sqrt())
}

/// Upper enclosure of `pi / (2 sqrt 6)`.
pub fn pi_over_two_sqrt6_upper() -> f64 {
    up(PI / (2.0 * 6f64.sqrt()))
}

/// Upper enclosure of `kappa^2 = sum_{n in Z} (1 + |n|)^-2 = pi^2 / 3 - 1`.
pub fn kappa_squared_upper() -> f64 {
    up(2.0 * basel_upper() - 1.0)
}

/// Upper enclosure of `kappa`.
pub fn kappa_upper() -> f64 {
    up(kappa_squared_upper().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: partial sum to N plus the integral enclosure
    // 1/(N+1) < sum_{j > N} j^-2 < 1/N.
    fn tail_bracket(k: u64, n: u64) -> (f64, f64) {
        let partial: f64 = (k + 1..=n).rev().map(|j| 1.0 / (j as f64).powi(2)).sum();
        (partial + 1.0 / (n as f64 + 1.0), partial + 1.0 / n as f64)
    }

    #[test]
    fn frozen_values() {
        assert!((pi_over_sqrt3_upper() - 1.813_799_364_234_217_8).abs() < 1e-14);
        assert!((pi_over_two_sqrt6_upper() - 0.641_274_915_080_932_4).abs() < 1e-14);
        assert!((kappa_squared_upper() - 2.289_868_133_696_453).abs() < 1e-13);
        assert!((kappa_upper() - 1.513_231_024_561_832_4).abs() < 1e-13);
    }

    #[test]
    fn enclosures_bound_the_oracle() {
        for k in [0u64, 1, 2, 3, 5, 10, 100] {
            let (lo, _) = tail_bracket(k, 2_000_000);
            let upper = inverse_square_tail_upper(k);
            assert!(upper >= lo, "k={k}: {upper} < {lo}");
            if k > 0 {
                assert!(upper < 1.0 / k as f64);
                assert!(tail_factor_upper(k) <= sqrt_two_over_k_upper(k));
            }
        }
        let (lo, _) = tail_bracket(1, 2_000_000);
        assert!(kappa_squared_upper() >= 1.0 + 2.0 * lo);
        assert!(tail_factor_upper(0) >= PI / 3f64.sqrt());
        assert!(tail_factor_upper(0) - PI / 3f64.sqrt() < 1e-14);
    }

    #[test]
    fn enclosures_are_tight() {
        for k in [0u64, 1, 4, 10] {
            let (_, hi) = tail_bracket(k, 2_000_000);
            assert!(inverse_square_tail_upper(k) - hi < 1e-12);
        }
    }
}
