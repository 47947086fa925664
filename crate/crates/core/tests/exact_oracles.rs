//! Order-statistic quantities against exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use trimmed_nw::asymptotics::OrderStatContext;
use trimmed_nw::estimator::theorem1_bias;
use trimmed_nw::{trim_count, BandwidthRule, CovariateLaw, KernelSpec};

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).unwrap()
}

fn int(v: usize) -> Q {
    Q::from_integer(BigInt::from(v))
}

fn pow(b: &Q, e: usize) -> Q {
    (0..e).fold(Q::one(), |acc, _| acc * b)
}

fn choose(n: usize, k: usize) -> Q {
    (0..k).fold(Q::one(), |acc, j| acc * int(n - j) / int(j + 1))
}

/// (F, f, f') at x, exactly.
fn law_at(law: CovariateLaw, x: &Q) -> (Q, Q, Q) {
    let one = Q::one();
    match law {
        CovariateLaw::Uniform01 => (x.clone(), one, Q::zero()),
        CovariateLaw::Beta22 => (x * x * (int(3) - int(2) * x), int(6) * x * (&one - x), int(6) - int(12) * x),
    }
}

fn density(law: CovariateLaw, n: usize, i: usize, x: &Q) -> Q {
    let (cdf, f, _) = law_at(law, x);
    int(n) * choose(n - 1, i - 1) * pow(&cdf, i - 1) * pow(&(Q::one() - &cdf), n - i) * f
}

fn density_derivative(law: CovariateLaw, n: usize, i: usize, x: &Q) -> Q {
    let (cdf, f, f1) = law_at(law, x);
    let sf = Q::one() - &cdf;
    let c = int(n) * choose(n - 1, i - 1);
    let mut d = pow(&cdf, i - 1) * pow(&sf, n - i) * f1;
    if i >= 2 {
        d += int(i - 1) * pow(&cdf, i - 2) * pow(&sf, n - i) * &f * &f;
    }
    if n > i {
        d -= int(n - i) * pow(&cdf, i - 1) * pow(&sf, n - i - 1) * &f * &f;
    }
    c * d
}

fn close(a: f64, b: &Q, rel: f64) -> bool {
    let b = b.to_f64().unwrap();
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

const POINTS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[test]
fn order_stat_density_matches_rational_arithmetic() {
    for law in CovariateLaw::ALL {
        for n in [1usize, 2, 7, 20, 33, 50, 60] {
            let ctx = OrderStatContext::new(law, n).unwrap();
            for &x in &POINTS {
                let xq = q(x);
                for i in 1..=n {
                    let got = ctx.order_stat_density(i, x).unwrap();
                    let want = density(law, n, i, &xq);
                    assert!(close(got, &want, 1e-11), "{law} n={n} i={i} x={x}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn order_stat_derivative_matches_rational_arithmetic() {
    for law in CovariateLaw::ALL {
        for n in [1usize, 3, 12, 40] {
            let ctx = OrderStatContext::new(law, n).unwrap();
            for &x in &[0.2, 0.45, 0.8] {
                let xq = q(x);
                for i in 1..=n {
                    let got = ctx.order_stat_density_derivative(i, x).unwrap();
                    let want = density_derivative(law, n, i, &xq).to_f64().unwrap();
                    let scale = density(law, n, i, &xq).to_f64().unwrap() * n as f64 + 1e-300;
                    assert!((got - want).abs() <= 1e-10 * scale, "{law} n={n} i={i} x={x}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn large_sample_density_is_finite() {
    let ctx = OrderStatContext::new(CovariateLaw::Uniform01, 500).unwrap();
    let v = ctx.order_stat_density(250, 0.5).unwrap();
    assert!(v.is_finite() && v > 0.0);
    let exact = density(CovariateLaw::Uniform01, 500, 250, &q(0.5));
    assert!(close(v, &exact, 1e-10));
}

fn exact_t_alpha(law: CovariateLaw, n: usize, alpha: f64, x: f64) -> Q {
    let k = trim_count(n, alpha).unwrap();
    let (cdf, f, _) = law_at(law, &q(x));
    let sf = Q::one() - &cdf;
    let mass = (k..=n - 1 - k).fold(Q::zero(), |acc, j| acc + choose(n - 1, j) * pow(&cdf, j) * pow(&sf, n - 1 - j));
    int(n) * f * mass / int(n - 2 * k)
}

#[test]
fn t_alpha_matches_exact_binomial_window() {
    for law in CovariateLaw::ALL {
        let ctx = OrderStatContext::new(law, 50).unwrap();
        for alpha in [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.45] {
            for &x in &POINTS {
                let got = ctx.t_alpha(alpha, x).unwrap();
                let want = exact_t_alpha(law, 50, alpha, x);
                assert!(close(got, &want, 1e-12), "{law} alpha={alpha} x={x}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn efficiency_anchor_is_45_over_46() {
    // n = 50, alpha = 0.05: window mass is P(2 <= Bin(49, 1/2) <= 47).
    let ae = OrderStatContext::new(CovariateLaw::Uniform01, 50).unwrap().asymptotic_efficiency(0.05, 0.5).unwrap();
    let exact = int(9) / int(10) * exact_t_alpha(CovariateLaw::Uniform01, 50, 0.05, 0.5);
    assert!(close(ae, &exact, 1e-13));
    assert!((ae - 45.0 / 46.0).abs() < 1e-6);
}

#[test]
fn bias_term_matches_rational_sums() {
    let (n, h) = (40usize, 0.1);
    let kernel = KernelSpec::default();
    for law in CovariateLaw::ALL {
        for alpha in [0.0, 0.1, 0.3] {
            for &x in &[0.3, 0.5] {
                let k = trim_count(n, alpha).unwrap();
                let xq = q(x);
                let (mut s0, mut s1) = (Q::zero(), Q::zero());
                for i in k + 1..=n - k {
                    s0 += density(law, n, i, &xq);
                    s1 += density_derivative(law, n, i, &xq);
                }
                let (g1, g2) = (3.0, 12.0 * x);
                let m = (n - 2 * k) as f64;
                let want = h * h * 0.2 * (g2 / (2.0 * m) * s0.to_f64().unwrap() + g1 / m * s1.to_f64().unwrap());
                let got = theorem1_bias(x, n, alpha, &kernel, &BandwidthRule::Fixed(h), g1, g2, law).unwrap().value;
                assert!((got - want).abs() <= 1e-11 * (1.0 + want.abs()), "{law} alpha={alpha} x={x}: {got} vs {want}");
            }
        }
    }
}
