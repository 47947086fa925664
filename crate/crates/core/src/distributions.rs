//! Covariate laws with analytic density, CDF and density derivative, error
//! laws, and the seeded stream-splitting RNG every simulation draws from.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of the covariate `X` on the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateLaw {
    Uniform01,
    /// Beta(2, 2): density `6x(1-x)`.
    Beta22,
}

impl CovariateLaw {
    pub const ALL: [CovariateLaw; 2] = [CovariateLaw::Uniform01, CovariateLaw::Beta22];

    pub fn name(self) -> &'static str {
        match self {
            CovariateLaw::Uniform01 => "uniform",
            CovariateLaw::Beta22 => "beta22",
        }
    }

    pub fn density(self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return 0.0;
        }
        match self {
            CovariateLaw::Uniform01 => 1.0,
            CovariateLaw::Beta22 => 6.0 * x * (1.0 - x),
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let x = x.clamp(0.0, 1.0);
        match self {
            CovariateLaw::Uniform01 => x,
            CovariateLaw::Beta22 => x * x * (3.0 - 2.0 * x),
        }
    }

    /// Derivative of the density; zero outside the open unit interval.
    pub fn density_derivative(self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return 0.0;
        }
        match self {
            CovariateLaw::Uniform01 => 0.0,
            CovariateLaw::Beta22 => 6.0 - 12.0 * x,
        }
    }

    /// Inverse CDF on `[0, 1]`.
    ///
    /// For Beta(2, 2), `3x^2 - 2x^3 = p` is a cubic whose root in `[0, 1]`
    /// is `1/2 + cos((acos(1 - 2p) - 2π) / 3)`; one Newton step polishes the
    /// trigonometric evaluation.
    pub fn quantile(self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            CovariateLaw::Uniform01 => p,
            CovariateLaw::Beta22 => {
                let theta = (1.0 - 2.0 * p).acos();
                let mut x = 0.5 + ((theta - 2.0 * std::f64::consts::PI) / 3.0).cos();
                let d = self.density(x);
                if d > 0.0 {
                    x -= (self.cdf(x) - p) / d;
                }
                x.clamp(0.0, 1.0)
            }
        }
    }

    pub fn sample(self, rng: &mut SeededRng, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.quantile(rng.random::<f64>())).collect()
    }
}

impl fmt::Display for CovariateLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CovariateLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "uniform01" | "unif" => Ok(CovariateLaw::Uniform01),
            "beta22" | "beta" | "beta(2,2)" => Ok(CovariateLaw::Beta22),
            other => Err(Error::InvalidParameter(format!("unknown covariate law `{other}`"))),
        }
    }
}

/// Law of the regression error `e`; homoscedastic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorLaw {
    StdNormal,
    /// Student t with 5 degrees of freedom.
    StudentT5,
}

impl ErrorLaw {
    pub fn name(self) -> &'static str {
        match self {
            ErrorLaw::StdNormal => "normal",
            ErrorLaw::StudentT5 => "t5",
        }
    }

    /// Conditional variance `σ²(x)`, constant in `x`.
    pub fn variance(self) -> f64 {
        match self {
            ErrorLaw::StdNormal => 1.0,
            ErrorLaw::StudentT5 => 5.0 / 3.0,
        }
    }

    pub fn sample(self, rng: &mut SeededRng, count: usize) -> Vec<f64> {
        match self {
            ErrorLaw::StdNormal => (0..count).map(|_| StandardNormal.sample(rng)).collect(),
            ErrorLaw::StudentT5 => {
                // Z / sqrt(W / 5) with W ~ chi-squared(5).
                let chi = ChiSquared::new(5.0).expect("5 degrees of freedom is valid");
                (0..count)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        let w: f64 = chi.sample(rng);
                        z / (w / 5.0).sqrt()
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for ErrorLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" | "stdnormal" => Ok(ErrorLaw::StdNormal),
            "t5" | "student-t5" | "studentt5" => Ok(ErrorLaw::StudentT5),
            other => Err(Error::InvalidParameter(format!("unknown error law `{other}`"))),
        }
    }
}

pub fn sample_errors(law: ErrorLaw, rng: &mut SeededRng, count: usize) -> Vec<f64> {
    law.sample(rng, count)
}

pub fn sample_covariates(law: CovariateLaw, rng: &mut SeededRng, count: usize) -> Vec<f64> {
    law.sample(rng, count)
}

/// ChaCha8 generator keyed by `(seed, stream_id)`.
///
/// Streams sharing a seed are disjoint ChaCha streams, so replication `j` can
/// run on any thread and still see the same draws.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        SeededRng { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_simpson;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let s = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        (m, s)
    }

    #[test]
    fn density_and_cdf_values() {
        assert_eq!(CovariateLaw::Uniform01.density(0.5), 1.0);
        assert_eq!(CovariateLaw::Beta22.density(0.5), 1.5);
        assert_eq!(CovariateLaw::Beta22.density(1.2), 0.0);
        assert_eq!(CovariateLaw::Uniform01.cdf(0.25), 0.25);
        assert_eq!(CovariateLaw::Beta22.cdf(0.5), 0.5);
        assert!((CovariateLaw::Beta22.cdf(0.25) - 0.15625).abs() < 1e-15);
        for law in CovariateLaw::ALL {
            assert_eq!(law.cdf(0.0), 0.0);
            assert_eq!(law.cdf(1.0), 1.0);
            assert_eq!(law.cdf(-3.0), 0.0);
            assert_eq!(law.cdf(7.0), 1.0);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        for law in CovariateLaw::ALL {
            let v = adaptive_simpson(|x| law.density(x), 0.0, 1.0, 1e-13);
            assert!((v - 1.0).abs() < 1e-10, "{law}: {v}");
        }
    }

    #[test]
    fn cdf_is_antiderivative_and_derivative_matches() {
        let h = 1e-5;
        for law in CovariateLaw::ALL {
            let mut prev = 0.0;
            for k in 1..=100 {
                let x = k as f64 / 101.0;
                let fd = (law.cdf(x + h) - law.cdf(x - h)) / (2.0 * h);
                assert!((fd - law.density(x)).abs() < 1e-6, "{law} x={x}");
                let dd = (law.density(x + h) - law.density(x - h)) / (2.0 * h);
                assert!((dd - law.density_derivative(x)).abs() < 1e-6, "{law} x={x}");
                let c = law.cdf(x);
                assert!(c >= prev);
                prev = c;
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for law in CovariateLaw::ALL {
            for k in 0..=1000 {
                let p = k as f64 / 1000.0;
                assert!((law.cdf(law.quantile(p)) - p).abs() < 1e-13, "{law} p={p}");
            }
        }
    }

    #[test]
    fn rng_streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut r = SeededRng::new(9, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = SeededRng::new(9, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = SeededRng::new(9, 4);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn single_draw_is_deterministic() {
        for law in [ErrorLaw::StdNormal, ErrorLaw::StudentT5] {
            let a = law.sample(&mut SeededRng::new(42, 0), 1);
            let b = law.sample(&mut SeededRng::new(42, 0), 1);
            assert_eq!(a[0].to_bits(), b[0].to_bits());
        }
        let a = CovariateLaw::Beta22.sample(&mut SeededRng::new(1, 1), 3);
        let b = CovariateLaw::Beta22.sample(&mut SeededRng::new(1, 1), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn error_law_moments() {
        let z = ErrorLaw::StdNormal.sample(&mut SeededRng::new(2024, 0), 1_000_000);
        let (m, v) = mean_var(&z);
        assert!(m.abs() < 0.005, "normal mean {m}");
        assert!((v - 1.0).abs() < 0.02, "normal var {v}");

        let t = ErrorLaw::StudentT5.sample(&mut SeededRng::new(2024, 1), 1_000_000);
        let (m, v) = mean_var(&t);
        assert!(m.abs() < 5.0 * (5.0f64 / 3.0).sqrt() / 1000.0, "t5 mean {m}");
        assert!(v > 1.63 && v < 1.71, "t5 var {v}");
    }

    #[test]
    fn covariate_sampler_moments() {
        let u = CovariateLaw::Uniform01.sample(&mut SeededRng::new(5, 0), 1_000_000);
        let below = u.iter().filter(|&&x| x <= 0.5).count() as f64 / u.len() as f64;
        assert!(below > 0.4985 && below < 0.5015, "{below}");

        let b = CovariateLaw::Beta22.sample(&mut SeededRng::new(5, 1), 1_000_000);
        let (m, _) = mean_var(&b);
        assert!(m > 0.4989 && m < 0.5011, "{m}");
    }

    #[test]
    fn kolmogorov_smirnov_distance_is_small() {
        for (s, law) in CovariateLaw::ALL.into_iter().enumerate() {
            let mut x = law.sample(&mut SeededRng::new(77, s as u64), 100_000);
            x.sort_by(f64::total_cmp);
            let n = x.len() as f64;
            let d = x
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let f = law.cdf(v);
                    (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
                })
                .fold(0.0, f64::max);
            assert!(d < 0.01, "{law}: KS = {d}");
        }
    }
}
