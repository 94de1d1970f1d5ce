//! Fixed quadrature rules on the reference triangle and the unit interval.

/// Degree-5 rule with 7 points: barycentric `(l1, l2)` and weight; weights sum
/// to 1 so they scale directly by the element area.
pub const TRIANGLE_7: [(f64, f64, f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_35;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506_16;
    const W2: f64 = 0.125_939_180_544_827_15;
    [
        (1.0 / 3.0, 1.0 / 3.0, W0),
        (A1, B1, W1),
        (B1, A1, W1),
        (B1, B1, W1),
        (A2, B2, W2),
        (B2, A2, W2),
        (B2, B2, W2),
    ]
};

/// Three-point Gauss rule on `[0, 1]`: abscissa and weight.
pub const GAUSS_3: [(f64, f64); 3] = {
    const S: f64 = 0.387_298_334_620_741_7; // sqrt(3/5) / 2
    [(0.5 - S, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + S, 5.0 / 18.0)]
};

#[cfg(test)]
mod tests {
    use super::*;
    

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn triangle_rule_exact_to_degree_five() {
        // int over the unit simplex of l1^a l2^b = a! b! / (a + b + 2)!; area 1/2
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = TRIANGLE_7
                    .iter()
                    .map(|&(l1, l2, w)| 0.5 * w * libm::pow(l1, a as f64) * libm::pow(l2, b as f64))
                    .sum();
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                assert!((q - exact).abs() < 1e-15, "{a} {b}");
            }
        }
    }

    #[test]
    fn gauss_exact_to_degree_five() {
        for k in 0..=5 {
            let q: f64 = GAUSS_3.iter().map(|&(s, w)| w * libm::pow(s, k as f64)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
