/// Physicists' Hermite polynomial `H_i(u)` (weight `e^{−u²}`) by the
/// three-term recurrence.
pub fn hermite_poly(i: usize, u: f64) -> f64 {
    let mut h0 = 1.0;
    if i == 0 {
        return h0;
    }
    let mut h1 = 2.0 * u;
    for k in 1..i {
        let h2 = 2.0 * u * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::legendre_rule;

    #[test]
    fn low_orders() {
        assert_eq!(hermite_poly(0, 3.7), 1.0);
        assert_eq!(hermite_poly(1, 2.0), 4.0);
        assert_eq!(hermite_poly(2, 1.0), 2.0);
        // H_3(u) = 8u³ − 12u
        assert!((hermite_poly(3, 0.7) - (8.0 * 0.343 - 8.4)).abs() < 1e-14);
    }

    #[test]
    fn orthogonality() {
        let rule = legendre_rule(-10.0, 10.0, 120).unwrap();
        for i in 0..=6 {
            for j in 0..=6 {
                let v = rule.integrate(|u| hermite_poly(i, u) * hermite_poly(j, u) * (-u * u).exp());
                if i != j {
                    assert!(v.abs() < 1e-8, "{i} {j} {v}");
                } else {
                    // √π 2^i i!
                    let fact: f64 = (1..=i).map(|k| k as f64).product();
                    let norm = std::f64::consts::PI.sqrt() * 2f64.powi(i as i32) * fact;
                    assert!((v - norm).abs() < 1e-10 * norm);
                }
            }
        }
    }
}
