//! Transverse-field schedule and the inter-replica coupling it induces.

/// Hyperbolic transverse-field schedule
/// `Gamma(t) = (1 - t/eta) * zeta / (t/eta + xi)` with `zeta = gamma0 * xi`,
/// so that `Gamma(0) = gamma0` and `Gamma(eta) = 0`.
pub fn gamma_schedule(t: f64, eta: f64, gamma0: f64, xi: f64) -> f64 {
    let s = t / eta;
    let zeta = gamma0 * xi;
    if s == 0.0 {
        return gamma0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    (1.0 - s) * zeta / (s + xi)
}

/// `-ln tanh(x)` for `x >= 0`, accurate across the whole range.
pub fn neg_ln_tanh(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    let u = (-2.0 * x).exp();
    // tanh x = (1 - u) / (1 + u)
    let ln_one_minus_u = if u <= 0.5 {
        (-u).ln_1p()
    } else {
        (-(-2.0 * x).exp_m1()).ln()
    };
    u.ln_1p() - ln_one_minus_u
}

/// Trotter coupling `-(T/2) ln tanh(gamma / (P T))` without the cap.
pub fn coupling_jt_uncapped(gamma: f64, replicas: usize, temperature: f64) -> f64 {
    0.5 * temperature * neg_ln_tanh(gamma / (replicas as f64 * temperature))
}

/// Trotter coupling clamped to `jt_cap`. Returns the cap once the argument
/// of `tanh` vanishes.
pub fn coupling_jt(gamma: f64, replicas: usize, temperature: f64, jt_cap: f64) -> f64 {
    let jt = coupling_jt_uncapped(gamma, replicas, temperature);
    if jt.is_finite() {
        jt.min(jt_cap)
    } else {
        jt_cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        assert_eq!(gamma_schedule(0.0, 500.0, 300.0, 0.1), 300.0);
        assert_eq!(gamma_schedule(500.0, 500.0, 300.0, 0.1), 0.0);
    }

    #[test]
    fn midpoint() {
        assert!((gamma_schedule(50.0, 100.0, 300.0, 0.1) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn strictly_decreasing() {
        let g: Vec<f64> = (0..=1000)
            .map(|t| gamma_schedule(t as f64, 1000.0, 300.0, 0.1))
            .collect();
        assert!(g.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn coupling_at_default_settings() {
        // -(5/3) ln tanh(3), evaluated at 50 digits.
        let expected = 0.008_262_524_177_816_628_f64;
        let jt = coupling_jt(300.0, 30, 10.0 / 3.0, 1e6);
        assert!(((jt - expected) / expected).abs() <= 1e-12, "{jt}");
    }

    #[test]
    fn coupling_limits() {
        assert_eq!(coupling_jt(0.0, 30, 10.0 / 3.0, 1e6), 1e6);
        // Argument underflows to zero.
        assert_eq!(coupling_jt(5e-324, 30, 10.0 / 3.0, 1e6), 1e6);
        assert_eq!(coupling_jt(1e-300, 30, 10.0 / 3.0, 100.0), 100.0);
        let tiny = coupling_jt(1e4, 30, 10.0 / 3.0, 1e6);
        assert!(tiny > 0.0 && tiny < 1e-40);
        let mut prev = 0.0;
        for k in (1..=100).rev() {
            let jt = coupling_jt(k as f64 * 3.0, 30, 10.0 / 3.0, 1e6);
            assert!(jt > prev);
            prev = jt;
        }
    }

    #[test]
    fn neg_ln_tanh_branches_agree() {
        for &x in &[1e-8f64, 1e-3, 0.1, 0.3465, 0.35, 1.0, 3.0] {
            let direct = -x.tanh().ln();
            let stable = neg_ln_tanh(x);
            assert!(((stable - direct) / direct).abs() < 1e-9, "{x}");
        }
        // Far tail: -ln tanh x ~ 2 e^{-2x}.
        let x = 20.0f64;
        let tail = 2.0 * (-2.0 * x).exp();
        assert!(((neg_ln_tanh(x) - tail) / tail).abs() < 1e-15);
    }
}
