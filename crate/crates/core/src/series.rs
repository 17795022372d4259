//! Closed-form and bounded sums of geometric-type series used by the tail ledgers.

/// `x^k` for integer `k` and `x >= 0`.
pub fn pow(x: f64, k: i64) -> f64 {
    if let Ok(k32) = i32::try_from(k) {
        x.powi(k32)
    } else {
        x.powf(k as f64)
    }
}

/// `sum_{k=lo}^{hi} x^k` for `x >= 0`; `None` endpoints are infinite.
/// Returns `f64::INFINITY` when the series diverges.
pub fn geo_sum(x: f64, lo: Option<i64>, hi: Option<i64>) -> f64 {
    if let (Some(a), Some(b)) = (lo, hi) {
        if a > b {
            return 0.0;
        }
    }
    if x <= 0.0 {
        if lo.is_none_or(|a| a < 0) {
            return f64::INFINITY;
        }
        return if lo == Some(0) { 1.0 } else { 0.0 };
    }
    match (lo, hi) {
        (None, None) => f64::INFINITY,
        (Some(a), None) => {
            if x < 1.0 {
                pow(x, a) / (1.0 - x)
            } else {
                f64::INFINITY
            }
        }
        (None, Some(b)) => {
            if x > 1.0 {
                pow(x, b) / (1.0 - 1.0 / x)
            } else {
                f64::INFINITY
            }
        }
        (Some(a), Some(b)) => {
            let count = b - a + 1;
            if count <= 512 {
                let mut t = pow(x, a);
                let mut s = 0.0;
                for _ in 0..count {
                    s += t;
                    t *= x;
                }
                s
            } else if (1.0 - x).abs() < 1e-9 {
                count as f64 * pow(x, a).max(pow(x, b))
            } else if x < 1.0 {
                pow(x, a) * (1.0 - pow(x, count)) / (1.0 - x)
            } else {
                pow(x, b) * (1.0 - pow(1.0 / x, count)) / (1.0 - 1.0 / x)
            }
        }
    }
}

/// `|k (k+1) ... (k+v-1)|`, the modulus of the rising factorial.
pub fn rising_abs(k: i64, v: u32) -> f64 {
    (0..v as i64).map(|t| ((k + t) as f64).abs()).product()
}

/// `sum_{k=lo}^{hi} |k (k+1) ... (k+v-1)| x^k`, with a geometric bound on the
/// part of an infinite tail that is not summed explicitly.
pub fn rising_geo_sum(x: f64, v: u32, lo: Option<i64>, hi: Option<i64>) -> f64 {
    if v == 0 {
        return geo_sum(x, lo, hi);
    }
    if let (Some(a), Some(b)) = (lo, hi) {
        if a > b {
            return 0.0;
        }
    }
    let term = |k: i64| rising_abs(k, v) * pow(x, k);
    match (lo, hi) {
        (None, None) => f64::INFINITY,
        (Some(a), Some(b)) => (a..=b).map(term).sum(),
        (Some(a), None) => {
            if x >= 1.0 {
                return f64::INFINITY;
            }
            // ratio t(k+1)/t(k) = x (k+v)/k, decreasing for k > 0
            let mut s = 0.0;
            for k in (a..).take(10_000_000) {
                let t = term(k);
                s += t;
                if k > 0 {
                    let q = x * (k + v as i64) as f64 / k as f64;
                    if q < 1.0 {
                        let rest = t * q / (1.0 - q);
                        if rest <= 1e-17 * s || t == 0.0 && s == 0.0 && k > v as i64 {
                            return s + rest;
                        }
                    }
                }
            }
            f64::INFINITY
        }
        (None, Some(b)) => {
            if x <= 1.0 {
                return f64::INFINITY;
            }
            // walking left, t(k-1)/t(k) = (|k|+1) / (|k|+1-v) / x for k <= -v
            let mut s = 0.0;
            let mut k = b;
            for _ in 0..10_000_000u64 {
                let t = term(k);
                s += t;
                let m = -k;
                if m + 1 > v as i64 {
                    let q = (m + 1) as f64 / (m + 1 - v as i64) as f64 / x;
                    if q < 1.0 {
                        let rest = t * q / (1.0 - q);
                        if rest <= 1e-17 * s || t == 0.0 && s == 0.0 {
                            return s + rest;
                        }
                    }
                }
                k -= 1;
            }
            f64::INFINITY
        }
    }
}

/// `prod_i (inner_i + extra_i) - prod_i inner_i` without cancellation, for
/// non-negative inputs.
pub fn product_excess(inner: &[f64], extra: &[f64]) -> f64 {
    let n = inner.len();
    let mut total = 0.0;
    for i in 0..n {
        if extra[i] == 0.0 {
            continue;
        }
        let mut t = extra[i];
        for j in 0..n {
            if j < i {
                t *= inner[j];
            } else if j > i {
                t *= inner[j] + extra[j];
            }
        }
        if t.is_nan() {
            return f64::INFINITY;
        }
        total += t;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_closed_forms() {
        assert!((geo_sum(0.5, Some(0), None) - 2.0).abs() < 1e-15);
        assert!((geo_sum(2.0, None, Some(-1)) - 1.0).abs() < 1e-15);
        assert!((geo_sum(0.5, Some(1), Some(3)) - 0.875).abs() < 1e-15);
        assert!(geo_sum(1.0, Some(0), None).is_infinite());
        assert_eq!(geo_sum(0.5, Some(4), Some(3)), 0.0);
    }

    #[test]
    fn product_excess_telescopes() {
        let e = product_excess(&[1.0, 2.0], &[0.5, 0.25]);
        assert!((e - (1.5 * 2.25 - 2.0)).abs() < 1e-15);
        assert_eq!(product_excess(&[1.0, 2.0], &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn rising_sum_matches_closed_form() {
        // sum_{k>=0} k x^k = x/(1-x)^2
        let x: f64 = 0.3;
        let s = rising_geo_sum(x, 1, Some(0), None);
        assert!((s - x / (1.0 - x).powi(2)).abs() < 1e-14);
        // sum_{k>=1} k(k+1) x^k = 2x/(1-x)^3
        let s2 = rising_geo_sum(x, 2, Some(1), None);
        assert!((s2 - 2.0 * x / (1.0 - x).powi(3)).abs() < 1e-13);
    }
}
