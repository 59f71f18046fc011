//! Special functions needed by the circular families.

/// `log I₀(x)` for `x ≥ 0`, modified Bessel function of the first kind.
///
/// Power series below 30, scaled asymptotic expansion above; both are accurate
/// to a few ulps of the result.
pub fn log_bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < 30.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
            k += 1.0;
        }
        sum.ln()
    } else {
        // Σ_k ((2k-1)!!)² / (k! (8x)^k), truncated at its smallest term.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0f64;
        loop {
            let ratio = (2.0 * k + 1.0).powi(2) / ((k + 1.0) * 8.0 * x);
            if ratio >= 1.0 {
                break;
            }
            term *= ratio;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
            k += 1.0;
        }
        x - 0.5 * (std::f64::consts::TAU * x).ln() + sum.ln()
    }
}

/// Inverse of the mean resultant length `A(κ) = I₁(κ)/I₀(κ)` on the circle,
/// by the Best–Fisher rational approximation.
pub fn circle_a_inverse(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0 - 1e-12);
    if r < 0.53 {
        2.0 * r + r.powi(3) + 5.0 * r.powi(5) / 6.0
    } else if r < 0.85 {
        -0.4 + 1.39 * r + 0.43 / (1.0 - r)
    } else {
        1.0 / (r.powi(3) - 4.0 * r.powi(2) + 3.0 * r)
    }
}
