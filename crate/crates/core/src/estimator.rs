//! The trimmed Nadaraya-Watson estimator.
//!
//! Observations are ordered by the covariate, the `[nα]` smallest and `[nα]`
//! largest covariate values are discarded together with their responses
//! (the concomitants), and the remaining pairs are averaged with kernel
//! weights centred at the query point. With `α = 0` nothing is trimmed and the
//! estimator is the classical Nadaraya-Watson smoother.
//!
//! `[nα]` is `floor(n·α)`. A relative slack of `1e-9` is added before
//! flooring so that decimal inputs such as `α = 0.29, n = 100` give 29 rather
//! than the 28 that binary rounding of `0.29` would produce.

use serde::{Deserialize, Serialize};

use crate::asymptotics::OrderStatContext;
use crate::distributions::CovariateLaw;
use crate::error::{Error, Result};
use crate::kernels::{BandwidthRule, KernelSpec};

/// Regression data `(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch { xs: xs.len(), ys: ys.len() });
        }
        if xs.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(index) = xs.iter().zip(&ys).position(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(PairedSample { xs, ys })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Self::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.xs, self.ys)
    }
}

/// Covariate order statistics with their concomitant responses.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSample {
    x_ord: Vec<f64>,
    y_conc: Vec<f64>,
    perm: Vec<usize>,
}

impl OrderedSample {
    /// `X_(1) <= ... <= X_(n)`.
    pub fn x_ord(&self) -> &[f64] {
        &self.x_ord
    }

    /// `Y_[i]`, the response paired with `X_(i)`.
    pub fn y_conc(&self) -> &[f64] {
        &self.y_conc
    }

    /// `perm[k]` is the original index of the pair at ordered position `k`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.x_ord.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_ord.is_empty()
    }

    /// Trimmed estimate at `x0` with an already resolved bandwidth `h`.
    pub fn trimmed_nw(&self, x0: f64, alpha: f64, kernel: &KernelSpec, h: f64) -> Result<TrimmedEstimate> {
        crate::kernels::check_bandwidth(h)?;
        let n = self.len();
        let k = trim_count(n, alpha)?;
        let (xs, ys) = (&self.x_ord[k..n - k], &self.y_conc[k..n - k]);

        let mut num = 0.0;
        let mut den = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (&x, &y) in xs.iter().zip(ys) {
            let w = kernel.scaled_unchecked(h, x - x0);
            if w > 0.0 {
                num += w * y;
                den += w;
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
        if den <= 0.0 {
            return Err(Error::EmptyKernelWindow { x0 });
        }
        // A weighted mean is a convex combination; clamping only removes
        // last-ulp rounding excursions.
        let value = (num / den).clamp(lo, hi);
        Ok(TrimmedEstimate { value, alpha, n_retained: n - 2 * k, denominator_mass: den, query_x: x0, bandwidth: h })
    }
}

/// Orders pairs by covariate. Ties keep their original relative order.
pub fn order_pairs(sample: &PairedSample) -> OrderedSample {
    let mut perm: Vec<usize> = (0..sample.len()).collect();
    perm.sort_by(|&a, &b| sample.xs[a].total_cmp(&sample.xs[b]));
    OrderedSample {
        x_ord: perm.iter().map(|&i| sample.xs[i]).collect(),
        y_conc: perm.iter().map(|&i| sample.ys[i]).collect(),
        perm,
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..0.5).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// `[nα]`, the number of observations trimmed from each end.
pub fn trim_count(n: usize, alpha: f64) -> Result<usize> {
    check_alpha(alpha)?;
    let k = (n as f64 * alpha * (1.0 + 1e-9)).floor() as usize;
    if n < 2 * k + 1 {
        return Err(Error::DegenerateTrim { n, alpha });
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrimmedEstimate {
    pub value: f64,
    pub alpha: f64,
    /// `n - 2[nα]`.
    pub n_retained: usize,
    /// Sum of the retained scaled-kernel weights.
    pub denominator_mass: f64,
    pub query_x: f64,
    pub bandwidth: f64,
}

pub fn trimmed_nw(
    sample: &PairedSample,
    x0: f64,
    alpha: f64,
    kernel: &KernelSpec,
    bw: &BandwidthRule,
) -> Result<TrimmedEstimate> {
    let h = bw.bandwidth(sample.len())?;
    order_pairs(sample).trimmed_nw(x0, alpha, kernel, h)
}

/// Classical Nadaraya-Watson estimate (no trimming).
pub fn nw(sample: &PairedSample, x0: f64, kernel: &KernelSpec, bw: &BandwidthRule) -> Result<TrimmedEstimate> {
    trimmed_nw(sample, x0, 0.0, kernel, bw)
}

/// Minimises `θ ↦ Σ_retained (Y_[i] - θ)² k_h(X_(i) - x0)` by golden-section
/// search over `[min y - 1, max y + 1]`.
///
/// The objective is accumulated in double-double arithmetic so that
/// comparisons stay meaningful down to a bracket width of `1e-12`; in plain
/// `f64` the quadratic is flat to rounding within ~`1e-8` of its minimum.
pub fn argmin_oracle(
    sample: &PairedSample,
    x0: f64,
    alpha: f64,
    kernel: &KernelSpec,
    bw: &BandwidthRule,
) -> Result<f64> {
    let h = bw.bandwidth(sample.len())?;
    let ordered = order_pairs(sample);
    let n = ordered.len();
    let k = trim_count(n, alpha)?;
    let terms: Vec<(f64, f64)> = ordered.x_ord[k..n - k]
        .iter()
        .zip(&ordered.y_conc[k..n - k])
        .map(|(&x, &y)| (kernel.scaled_unchecked(h, x - x0), y))
        .filter(|&(w, _)| w > 0.0)
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyKernelWindow { x0 });
    }
    let lo = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min) - 1.0;
    let hi = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let objective = |theta: f64| {
        terms.iter().fold(dd::Dd::ZERO, |acc, &(w, y)| {
            let d = dd::Dd::diff(y, theta);
            acc.add(d.square().scale(w))
        })
    };
    Ok(golden_section(objective, lo, hi, 1e-12))
}

fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> dd::Dd,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        if b - a <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc.less_than(&fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

mod dd {
    //! Minimal double-double arithmetic (value = hi + lo, |lo| <= ulp(hi)/2).

    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        hi: f64,
        lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    fn renorm(hi: f64, lo: f64) -> Dd {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    impl Dd {
        pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

        /// Exact `a - b`.
        pub fn diff(a: f64, b: f64) -> Dd {
            let (hi, lo) = two_sum(a, -b);
            Dd { hi, lo }
        }

        pub fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.hi, o.hi);
            renorm(s, e + self.lo + o.lo)
        }

        pub fn square(self) -> Dd {
            let (p, e) = two_prod(self.hi, self.hi);
            renorm(p, e + 2.0 * self.hi * self.lo)
        }

        pub fn scale(self, w: f64) -> Dd {
            let (p, e) = two_prod(self.hi, w);
            renorm(p, e + self.lo * w)
        }

        pub fn less_than(&self, o: &Dd) -> bool {
            self.hi < o.hi || (self.hi == o.hi && self.lo < o.lo)
        }
    }
}

/// Centering term of the limiting distribution:
/// `h² k₂ ( g''(x0)/(2m) Σ f_{X_(i)}(x0) + g'(x0)/m Σ f'_{X_(i)}(x0) )`,
/// sums over the retained indices and `m = n - 2[nα]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasTerm {
    pub value: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn theorem1_bias(
    x0: f64,
    n: usize,
    alpha: f64,
    kernel: &KernelSpec,
    bw: &BandwidthRule,
    g1: f64,
    g2: f64,
    law: CovariateLaw,
) -> Result<BiasTerm> {
    if law.density(x0) <= 0.0 {
        return Err(Error::UnsupportedPoint { x: x0 });
    }
    let h = bw.bandwidth(n)?;
    let ctx = OrderStatContext::new(law, n)?;
    let k = trim_count(n, alpha)?;
    let m = (n - 2 * k) as f64;
    let (mut dens, mut deriv) = (0.0, 0.0);
    for i in k + 1..=n - k {
        dens += ctx.order_stat_density(i, x0)?;
        deriv += ctx.order_stat_density_derivative(i, x0)?;
    }
    let value = h * h * kernel.second_moment() * (g2 / (2.0 * m) * dens + g1 / m * deriv);
    Ok(BiasTerm { value })
}

/// `V = σ² ∫K² / ((1 - 2α) t_α(x0))`, with `t_α` at finite `approx_n`.
pub fn asymptotic_variance(
    x0: f64,
    alpha: f64,
    sigma2: f64,
    kernel: &KernelSpec,
    law: CovariateLaw,
    approx_n: usize,
) -> Result<f64> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!("variance must be positive, got {sigma2}")));
    }
    let t = OrderStatContext::new(law, approx_n)?.t_alpha(alpha, x0)?;
    if t <= 0.0 {
        return Err(Error::UnsupportedPoint { x: x0 });
    }
    Ok(sigma2 * kernel.squared_l2_moment() / ((1.0 - 2.0 * alpha) * t))
}
