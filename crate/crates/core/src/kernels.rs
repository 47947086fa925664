//! Compactly supported symmetric kernels and bandwidth rules.
//!
//! Every kernel here is a probability density on `[-τ, τ]` that is symmetric
//! about zero. The scaled kernel `k_h(t) = K(t / h) / h` is what the
//! estimators actually weight observations with.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Epanechnikov,
    Uniform,
    Triangular,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Epanechnikov, KernelKind::Uniform, KernelKind::Triangular];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Uniform => "uniform",
            KernelKind::Triangular => "triangular",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "epanechnikov" | "epa" => Ok(KernelKind::Epanechnikov),
            "uniform" | "box" | "rectangular" => Ok(KernelKind::Uniform),
            "triangular" | "triangle" => Ok(KernelKind::Triangular),
            other => Err(Error::UnknownKernel(other.to_string())),
        }
    }
}

/// A kernel together with its support half-width `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    kind: KernelKind,
    support: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec { kind: KernelKind::Epanechnikov, support: 1.0 }
    }
}

impl KernelSpec {
    pub fn new(kind: KernelKind, support: f64) -> Result<Self> {
        if !(support.is_finite() && support > 0.0) {
            return Err(Error::InvalidSupport(support));
        }
        Ok(KernelSpec { kind, support })
    }

    /// Unit-support kernel of the given kind.
    pub fn unit(kind: KernelKind) -> Self {
        KernelSpec { kind, support: 1.0 }
    }

    pub fn epanechnikov() -> Self {
        Self::unit(KernelKind::Epanechnikov)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// Support half-width `τ`.
    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        let tau = self.support;
        let a = u.abs();
        if a.is_nan() || a > tau {
            return 0.0;
        }
        match self.kind {
            KernelKind::Epanechnikov => {
                let r = u / tau;
                0.75 * (1.0 - r * r) / tau
            }
            KernelKind::Uniform => 0.5 / tau,
            KernelKind::Triangular => (1.0 - a / tau) / tau,
        }
    }

    /// `K(t / h) / h`.
    pub fn scaled(&self, h: f64, t: f64) -> Result<f64> {
        check_bandwidth(h)?;
        Ok(self.scaled_unchecked(h, t))
    }

    #[inline]
    pub(crate) fn scaled_unchecked(&self, h: f64, t: f64) -> f64 {
        self.evaluate(t / h) / h
    }

    /// `∫ K(u)^2 du`.
    pub fn squared_l2_moment(&self) -> f64 {
        let tau = self.support;
        match self.kind {
            KernelKind::Epanechnikov => 3.0 / (5.0 * tau),
            KernelKind::Uniform => 1.0 / (2.0 * tau),
            KernelKind::Triangular => 2.0 / (3.0 * tau),
        }
    }

    /// `k_2 = ∫ u^2 K(u) du`.
    pub fn second_moment(&self) -> f64 {
        let tau2 = self.support * self.support;
        match self.kind {
            KernelKind::Epanechnikov => tau2 / 5.0,
            KernelKind::Uniform => tau2 / 3.0,
            KernelKind::Triangular => tau2 / 6.0,
        }
    }

    /// `∫ u^p K(u)^q du` by adaptive Simpson; the closed forms above are
    /// checked against this.
    pub fn moment_by_quadrature(&self, power: i32, kernel_power: i32) -> f64 {
        let tau = self.support;
        crate::quadrature::adaptive_simpson_pieces(
            |u| u.powi(power) * self.evaluate(u).powi(kernel_power),
            -tau,
            tau,
            &[0.0],
            1e-12,
        )
    }
}

pub fn check_bandwidth(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBandwidth(h))
    }
}

/// How the bandwidth is chosen for a sample of size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum BandwidthRule {
    /// `h_n = n^{-1/2} / 2`.
    #[default]
    PaperDefault,
    Fixed(f64),
}

impl BandwidthRule {
    pub fn fixed(h: f64) -> Result<Self> {
        check_bandwidth(h)?;
        Ok(BandwidthRule::Fixed(h))
    }

    pub fn bandwidth(&self, n: usize) -> Result<f64> {
        match *self {
            BandwidthRule::PaperDefault => {
                if n == 0 {
                    return Err(Error::EmptySample);
                }
                Ok(0.5 / (n as f64).sqrt())
            }
            BandwidthRule::Fixed(h) => {
                check_bandwidth(h)?;
                Ok(h)
            }
        }
    }
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthRule::PaperDefault => f.write_str("auto"),
            BandwidthRule::Fixed(h) => write!(f, "{h}"),
        }
    }
}

impl FromStr for BandwidthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(BandwidthRule::PaperDefault);
        }
        let h: f64 = s
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bandwidth `{s}` is neither `auto` nor a number")))?;
        BandwidthRule::fixed(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn epanechnikov_values() {
        let k = KernelSpec::epanechnikov();
        assert_eq!(k.evaluate(0.0), 0.75);
        assert_eq!(k.evaluate(1.5), 0.0);
        assert!(close(k.evaluate(0.5), 0.5625, 1e-15));
        assert_eq!(k.evaluate(f64::NAN), 0.0);
    }

    #[test]
    fn scaled_kernel_values() {
        let k = KernelSpec::epanechnikov();
        assert_eq!(k.scaled(0.5, 0.0).unwrap(), 1.5);
        assert_eq!(k.scaled(0.5, 1.0).unwrap(), 0.0);
        let u = KernelSpec::unit(KernelKind::Uniform);
        assert!(close(u.scaled(0.1, 0.05).unwrap(), 5.0, 1e-12));
    }

    #[test]
    fn scaled_kernel_rejects_bad_bandwidth() {
        let k = KernelSpec::epanechnikov();
        for h in [0.0, -0.1, f64::NAN, f64::INFINITY] {
            assert!(matches!(k.scaled(h, 0.0), Err(Error::InvalidBandwidth(_))));
        }
    }

    #[test]
    fn closed_form_moments() {
        let e = KernelSpec::epanechnikov();
        let u = KernelSpec::unit(KernelKind::Uniform);
        let t = KernelSpec::unit(KernelKind::Triangular);
        assert!(close(e.squared_l2_moment(), 0.6, 1e-15));
        assert!(close(u.squared_l2_moment(), 0.5, 1e-15));
        assert!(close(t.squared_l2_moment(), 2.0 / 3.0, 1e-15));
        assert!(close(e.second_moment(), 0.2, 1e-15));
        assert!(close(u.second_moment(), 1.0 / 3.0, 1e-15));
        assert!(close(t.second_moment(), 1.0 / 6.0, 1e-15));
    }

    #[test]
    fn unit_mass_zero_mean_and_symmetry() {
        for kind in KernelKind::ALL {
            for tau in [0.5, 1.0, 2.5] {
                let k = KernelSpec::new(kind, tau).unwrap();
                assert!(close(k.moment_by_quadrature(0, 1), 1.0, 1e-10), "{kind} τ={tau}");
                assert!(close(k.moment_by_quadrature(1, 1), 0.0, 1e-12), "{kind} τ={tau}");
                assert!(close(k.moment_by_quadrature(0, 2), k.squared_l2_moment(), 1e-10));
                assert!(close(k.moment_by_quadrature(2, 1), k.second_moment(), 1e-10));
                for i in 0..=400 {
                    let u = -3.0 + 6.0 * i as f64 / 400.0;
                    assert!((k.evaluate(u) - k.evaluate(-u)).abs() <= 1e-14);
                    assert!(k.evaluate(u) >= 0.0);
                    if u.abs() > tau {
                        assert_eq!(k.evaluate(u), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_trapezoid_moments() {
        // 10^6-point trapezoid rule, independent of the closed forms.
        const STEPS: usize = 1_000_000;
        for kind in KernelKind::ALL {
            let k = KernelSpec::unit(kind);
            let dx = 2.0 / STEPS as f64;
            let (mut l2, mut m2) = (0.0, 0.0);
            for i in 0..=STEPS {
                let u = -1.0 + i as f64 * dx;
                let w = if i == 0 || i == STEPS { 0.5 } else { 1.0 };
                let v = k.evaluate(u);
                l2 += w * v * v * dx;
                m2 += w * u * u * v * dx;
            }
            // Uniform has jumps at ±1 that the half-weighted endpoints treat exactly.
            assert!(close(l2, k.squared_l2_moment(), 1e-8), "{kind}: {l2}");
            assert!(close(m2, k.second_moment(), 1e-8), "{kind}: {m2}");
        }
    }

    #[test]
    fn scaled_kernel_integrates_to_one() {
        for kind in KernelKind::ALL {
            let k = KernelSpec::unit(kind);
            for h in [0.01, 0.1, 1.0] {
                let v = crate::quadrature::adaptive_simpson_pieces(|t| k.scaled_unchecked(h, t), -h, h, &[0.0], 1e-12);
                assert!(close(v, 1.0, 1e-9), "{kind} h={h}: {v}");
            }
        }
    }

    #[test]
    fn bandwidth_rules() {
        let h = BandwidthRule::PaperDefault.bandwidth(100).unwrap();
        assert!(close(h, 0.05, 1e-15));
        assert!(close(BandwidthRule::PaperDefault.bandwidth(50).unwrap(), 0.5 / 50f64.sqrt(), 1e-15));
        assert_eq!("auto".parse::<BandwidthRule>().unwrap(), BandwidthRule::PaperDefault);
        assert_eq!("0.2".parse::<BandwidthRule>().unwrap(), BandwidthRule::Fixed(0.2));
        assert!("-1".parse::<BandwidthRule>().is_err());
        assert!("wide".parse::<BandwidthRule>().is_err());
    }

    #[test]
    fn gaussian_is_rejected() {
        assert!(matches!("gaussian".parse::<KernelKind>(), Err(Error::UnknownKernel(_))));
        assert!(KernelSpec::new(KernelKind::Uniform, 0.0).is_err());
    }
}
