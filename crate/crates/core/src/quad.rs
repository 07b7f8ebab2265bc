//! Gauss–Legendre rules on arbitrary intervals.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

/// Nodes and weights on `[-1, 1]`, cached for the orders used internally.
pub fn gauss_legendre(order: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        (1..=32)
            .map(|n| {
                let rule = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
                rule.iter().map(|(x, w)| (*x, *w)).collect()
            })
            .collect()
    });
    assert!((1..=32).contains(&order), "unsupported Gauss-Legendre order {order}");
    &rules[order - 1]
}

/// Integrate `f` over `[a, b]` with the `order`-point rule.
pub fn integrate(order: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * gauss_legendre(order).iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>()
}

/// Composite rule over `panels` equal panels.
pub fn integrate_composite(order: usize, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| integrate(order, a + k as f64 * h, a + (k + 1) as f64 * h, &f))
        .sum()
}
