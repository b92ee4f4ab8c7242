//! Scalar q-arithmetic.
//!
//! Every power of `q` or of a spectral parameter is taken through an exponent:
//! `q^x = exp(hbar * x)` and, for a spectral point `u`, `zeta^x = exp(hbar * u * x)`.
//! Shifting `zeta` by `q^a` is `u -> u + a`, so no branch choices are ever made.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Hard cap on the number of terms summed by the series routines.
pub const SERIES_CAP: usize = 100_000;

const SINGULAR_EPS: f64 = 1e-12;

/// Global model constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub hbar: C64,
    pub s0: i32,
    pub s1: i32,
    pub phi: C64,
    pub tol_series: f64,
    pub tol_check: f64,
    pub fock_dim: usize,
    pub verma_dim: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            hbar: C64::new(0.6f64.ln(), 0.0),
            s0: -1,
            s1: -1,
            phi: C64::new(-3.0, 0.0),
            tol_series: 1e-15,
            tol_check: 1e-8,
            fock_dim: 48,
            verma_dim: 48,
        }
    }
}

impl ModelParams {
    /// Checks the invariants shared by every computation.
    pub fn validate(&self) -> Result<()> {
        let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
        if !finite(self.hbar) || !finite(self.phi) {
            return Err(Error::InvalidParams("hbar and phi must be finite".into()));
        }
        if self.hbar.sinh().norm() < SINGULAR_EPS {
            return Err(Error::InvalidParams(format!(
                "q = exp({}) is 0 or ±1",
                self.hbar
            )));
        }
        if self.s() == 0 {
            return Err(Error::InvalidParams("s0 + s1 must be nonzero".into()));
        }
        if (self.qpow(2.0 * self.phi) - 1.0).norm() < SINGULAR_EPS {
            return Err(Error::SingularTwist(format!("q^(2 phi) = 1 at phi = {}", self.phi)));
        }
        if self.fock_dim < 2 || self.verma_dim < 2 {
            return Err(Error::InvalidParams("truncation dimensions must be at least 2".into()));
        }
        if !(self.tol_series > 0.0) || !(self.tol_check > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Checks that twisted traces over Fock and Verma modules converge for an `n`-site chain.
    ///
    /// The level-to-level ratio of every traced term lies between `q^(-2 phi - n)` and
    /// `q^(-2 phi + n)`, so both must have modulus below one.
    pub fn trace_regime(&self, n: usize) -> Result<()> {
        let n = n as f64;
        let worst = self
            .qpow(-2.0 * self.phi + n)
            .norm()
            .max(self.qpow(-2.0 * self.phi - n).norm());
        if worst < 1.0 {
            Ok(())
        } else {
            Err(Error::Regime(format!(
                "twisted traces diverge for n = {n}: level ratio {worst:.3} >= 1"
            )))
        }
    }

    pub fn q(&self) -> C64 {
        self.hbar.exp()
    }

    /// `s = s0 + s1`.
    pub fn s(&self) -> i32 {
        self.s0 + self.s1
    }

    pub fn sf(&self) -> f64 {
        self.s() as f64
    }

    /// `q^x = exp(hbar x)`.
    pub fn qpow(&self, x: impl Into<C64>) -> C64 {
        (self.hbar * x.into()).exp()
    }

    /// `kappa_q = q - q^-1`.
    pub fn kappa(&self) -> C64 {
        self.qpow(1.0) - self.qpow(-1.0)
    }

    /// `[nu]_q = (q^nu - q^-nu) / (q - q^-1)`.
    pub fn qnum(&self, nu: impl Into<C64>) -> C64 {
        let nu = nu.into();
        (self.qpow(nu) - self.qpow(-nu)) / self.kappa()
    }

    /// `[a]_{q^nu}`: the q-number with base `q^nu`, continuous through `q^nu = ±1`.
    pub fn qnum_base(&self, nu: impl Into<C64>, a: impl Into<C64>) -> C64 {
        let t = self.hbar * nu.into();
        let a = a.into();
        let den = t.sinh();
        if den.norm() > 1e-9 {
            (a * t).sinh() / den
        } else {
            a * (a * t).cosh() / t.cosh()
        }
    }
}

/// A spectral parameter carried by its exponent: `zeta = q^u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    pub u: C64,
}

impl SpectralPoint {
    pub fn new(u: impl Into<C64>) -> Self {
        Self { u: u.into() }
    }

    pub fn zeta(&self, p: &ModelParams) -> C64 {
        p.qpow(self.u)
    }

    /// `zeta^x = exp(hbar u x)`.
    pub fn pow(&self, x: impl Into<C64>, p: &ModelParams) -> C64 {
        p.qpow(self.u * x.into())
    }

    /// The point `q^a zeta`.
    pub fn shifted(&self, a: impl Into<C64>) -> Self {
        Self { u: self.u + a.into() }
    }
}

/// `a(q^x) = q^(1+x) - q^(-1-x)`.
pub fn weight_a(x: C64, p: &ModelParams) -> C64 {
    p.qpow(1.0 + x) - p.qpow(-1.0 - x)
}

/// `b(q^x) = q^x - q^-x`.
pub fn weight_b(x: C64, p: &ModelParams) -> C64 {
    p.qpow(x) - p.qpow(-x)
}

/// Six-vertex weights `(a, b, c)` at `zeta = q^u`.
pub fn weights(z: SpectralPoint, p: &ModelParams) -> (C64, C64, C64) {
    (weight_a(z.u, p), weight_b(z.u, p), p.kappa())
}

/// `lambda_2(z) = sum_k z^k / (k (q^k + q^-k))` for `|z| < 1`.
///
/// Summation stops once a rigorous bound on the remaining tail is below `tol_series`.
/// For `|q| != 1` the bound uses `|q^k + q^-k| >= Q^k - Q^-k` with `Q = max(|q|, 1/|q|)`.
pub fn lambda2(z: C64, p: &ModelParams) -> Result<C64> {
    let r = z.norm();
    if !(r < 1.0) {
        return Err(Error::DivergentSeries(r));
    }
    if r == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let big_q = p.q().norm().max(1.0 / p.q().norm());
    let ln_q = big_q.ln();
    let rigorous = ln_q > 1e-9;
    let ratio = if rigorous { r / big_q } else { r };
    let mut sum = C64::new(0.0, 0.0);
    let mut zk = C64::new(1.0, 0.0);
    for k in 1..=SERIES_CAP {
        let kf = k as f64;
        zk *= z;
        let term = zk / (kf * (p.qpow(kf) + p.qpow(-kf)));
        sum += term;
        let next = kf + 1.0;
        let tail = if rigorous {
            let ln_den = next * ln_q + (-(-2.0 * next * ln_q).exp()).ln_1p();
            (next * r.ln() - next.ln() - ln_den).exp() / (1.0 - ratio)
        } else {
            term.norm() * r / (1.0 - r)
        };
        if tail < p.tol_series {
            return Ok(sum);
        }
    }
    Err(Error::DivergentSeries(r))
}

/// Image of the central element `C_k` in the Verma module of weight `mu`.
pub fn casimir_image(k: u32, mu: C64, p: &ModelParams) -> C64 {
    let e = k as f64 * (mu + 1.0);
    p.qpow(e) + p.qpow(-e)
}

/// `Lambda^mu(z) = lambda_2(q^(mu+1) z) + lambda_2(q^(-mu-1) z)`.
pub fn lambda_rep(mu: C64, z: C64, p: &ModelParams) -> Result<C64> {
    Ok(lambda2(p.qpow(mu + 1.0) * z, p)? + lambda2(p.qpow(-mu - 1.0) * z, p)?)
}

/// Trace of `E^rE F^rF C^sC q^(nu H)` over the `(m+1)`-dimensional module.
pub fn trace_finite_monomial(m: u32, r_e: u32, r_f: u32, s_c: u32, nu: C64, p: &ModelParams) -> C64 {
    if r_e > 0 || r_f > 0 {
        return C64::new(0.0, 0.0);
    }
    let c = casimir_image(1, C64::new(m as f64, 0.0), p);
    c.powu(s_c) * p.qnum_base(nu, m as f64 + 1.0)
}

/// Trace of `E^rE F^rF C^sC q^(nu H)` over the Verma module of weight `mu`, in closed form.
///
/// The geometric sum is continued analytically to every `nu` with `q^(-2 nu) != 1`.
pub fn trace_verma_monomial(
    mu: C64,
    r_e: u32,
    r_f: u32,
    s_c: u32,
    nu: C64,
    p: &ModelParams,
) -> Result<C64> {
    let den = 1.0 - p.qpow(-2.0 * nu);
    if den.norm() < SINGULAR_EPS {
        return Err(Error::SingularTwist(format!("q^(-2 nu) = 1 at nu = {nu}")));
    }
    if r_e > 0 || r_f > 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(casimir_image(1, mu, p).powu(s_c) * p.qpow(mu * nu) / den)
}
