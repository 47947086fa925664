//! Order-statistic density calculus and the asymptotic efficiency of the
//! trimmed estimator relative to Nadaraya-Watson.
//!
//! The density of the `i`-th order statistic of `n` draws is
//! `n C(n-1, i-1) F^{i-1} (1-F)^{n-i} f`. Everything is evaluated in log
//! space so `n` in the thousands neither overflows the binomial coefficient
//! nor underflows the powers.
//!
//! `t_α(x)` is the trimmed average of these densities. Its large-`n` limit is
//! degenerate at interior points, so it is always evaluated at a finite
//! approximation size carried by [`OrderStatContext`].

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::distributions::CovariateLaw;
use crate::error::{Error, Result};
use crate::estimator::trim_count;

/// Binomial coefficients up to this `n` are formed exactly in integers.
const EXACT_BINOMIAL_MAX_N: usize = 60;

pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if n <= EXACT_BINOMIAL_MAX_N {
        let mut c: u128 = 1;
        for j in 0..k {
            c = c * (n - j) as u128 / (j + 1) as u128;
        }
        return (c as f64).ln();
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `e · ln(base)` with `0 · ln 0 = 0`.
fn xlog(e: usize, base: f64) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * base.ln()
    }
}

/// `P(lo <= Bin(trials, p) <= hi)`, summed in log space.
pub fn binomial_window_mass(trials: usize, p: f64, lo: usize, hi: usize) -> f64 {
    if lo > hi || lo > trials {
        return 0.0;
    }
    let hi = hi.min(trials);
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let logs: Vec<f64> = (lo..=hi)
        .map(|j| {
            let a = if j == 0 { 0.0 } else { j as f64 * lp };
            let b = if j == trials { 0.0 } else { (trials - j) as f64 * lq };
            ln_choose(trials, j) + a + b
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    let s: f64 = logs.iter().map(|&l| (l - top).exp()).sum();
    (top.exp() * s).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderStatContext {
    pub law: CovariateLaw,
    /// Approximation sample size.
    pub n: usize,
}

impl OrderStatContext {
    pub fn new(law: CovariateLaw, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("order-statistic sample size must be at least 1".into()));
        }
        Ok(OrderStatContext { law, n })
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            Err(Error::IndexOutOfRange { i, n: self.n })
        } else {
            Ok(())
        }
    }

    /// `ln(n C(n-1, i-1))`.
    fn ln_coefficient(&self, i: usize) -> f64 {
        (self.n as f64).ln() + ln_choose(self.n - 1, i - 1)
    }

    /// Density of `X_(i)` at `x`.
    pub fn order_stat_density(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        let f = self.law.density(x);
        if f == 0.0 {
            return Ok(0.0);
        }
        let cdf = self.law.cdf(x);
        let n = self.n;
        let log = ln_choose(n - 1, i - 1) + xlog(i - 1, cdf) + xlog(n - i, 1.0 - cdf);
        Ok(n as f64 * log.exp() * f)
    }

    /// Derivative in `x` of [`Self::order_stat_density`].
    pub fn order_stat_density_derivative(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        let (f, df) = (self.law.density(x), self.law.density_derivative(x));
        if f == 0.0 && df == 0.0 {
            return Ok(0.0);
        }
        let n = self.n;
        let (cdf, sf) = (self.law.cdf(x), 1.0 - self.law.cdf(x));
        let c = self.ln_coefficient(i);
        // C [ (i-1) F^{i-2} S^{n-i} f² - (n-i) F^{i-1} S^{n-i-1} f² + F^{i-1} S^{n-i} f' ]
        // with S = 1 - F; each term is formed as sign · exp(log magnitude).
        let mut total = 0.0;
        if i > 1 && f != 0.0 {
            let l = c + ((i - 1) as f64).ln() + xlog(i - 2, cdf) + xlog(n - i, sf) + 2.0 * f.ln();
            total += l.exp();
        }
        if i < n && f != 0.0 {
            let l = c + ((n - i) as f64).ln() + xlog(i - 1, cdf) + xlog(n - i - 1, sf) + 2.0 * f.ln();
            total -= l.exp();
        }
        if df != 0.0 {
            let l = c + xlog(i - 1, cdf) + xlog(n - i, sf) + df.abs().ln();
            total += df.signum() * l.exp();
        }
        Ok(total)
    }

    /// `|(1/n) Σ_i f_{X_(i)}(x) - f_X(x)|`, zero up to rounding.
    pub fn fact_a_residual(&self, x: f64) -> f64 {
        let sum: f64 = (1..=self.n).map(|i| self.order_stat_density(i, x).expect("index in range")).sum();
        (sum / self.n as f64 - self.law.density(x)).abs()
    }

    /// Finite-`n` value of `t_α(x) = (n - 2[nα])⁻¹ Σ_{i=[nα]+1}^{n-[nα]} f_{X_(i)}(x)`.
    pub fn t_alpha(&self, alpha: f64, x: f64) -> Result<f64> {
        let n = self.n;
        let k = trim_count(n, alpha)?;
        let f = self.law.density(x);
        if f == 0.0 {
            return Ok(0.0);
        }
        // Σ_{i=k+1}^{n-k} n C(n-1,i-1) F^{i-1}(1-F)^{n-i} f = n f P(k <= Bin(n-1, F) <= n-1-k)
        let mass = binomial_window_mass(n - 1, self.law.cdf(x), k, n - 1 - k);
        Ok(n as f64 * f * mass / (n - 2 * k) as f64)
    }

    /// `(1 - 2α) t_α(x) / f_X(x)`.
    pub fn asymptotic_efficiency(&self, alpha: f64, x: f64) -> Result<f64> {
        let f = self.law.density(x);
        if f <= 0.0 {
            return Err(Error::UnsupportedPoint { x });
        }
        Ok((1.0 - 2.0 * alpha) * self.t_alpha(alpha, x)? / f)
    }

    pub fn ae_curve(&self, alphas: &[f64], x: f64) -> Result<AeCurve> {
        if alphas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("alpha grid must be sorted ascending".into()));
        }
        let values = alphas
            .iter()
            .map(|&alpha| {
                self.asymptotic_efficiency(alpha, x).map_err(|e| Error::AtAlpha { alpha, source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AeCurve { law: self.law, x0: x, approx_n: self.n, alphas: alphas.to_vec(), values })
    }
}

/// Asymptotic efficiency as a function of the trimming proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeCurve {
    pub law: CovariateLaw,
    pub x0: f64,
    pub approx_n: usize,
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
}
