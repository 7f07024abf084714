use statrs::distribution::{ContinuousCDF, Normal};

/// Multiplicative change in the odds per unit increase of a factor.
pub fn odds_ratio(beta: f64) -> f64 {
    beta.exp()
}

/// Rounds half away from zero to `decimals` places.
pub fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}

/// Two-sided standard normal tail probability of `z`.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * n.sf(z.abs())).min(1.0)
}

/// Significance marker: `***` p<0.001, `**` p<0.01, `*` p<0.05, `·` p<0.1.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else if p < 0.1 {
        "\u{b7}"
    } else {
        ""
    }
}
