//! Polynomial-normalized transfer matrices and Q-operators of an `n`-site chain.
//!
//! `transfer_p` returns `q^(n/2) prod_i (zeta/eta_i)^(-s/2)` times the reduced twisted trace;
//! `qop_p` returns the Q-operators with their constant, power and spin-dependent factors.
//! Truncated traces are accompanied by a check against the doubled truncation.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::{self, CMat};
use crate::operators::{chain_trace, l_cell, monodromy_cell, LWhich, OperatorCell};
use crate::qkernel::{lambda2, lambda_rep, ModelParams, SpectralPoint};
use crate::reps::{rep_finite, rep_fock, rep_verma, FockSign, RepMatrices};

/// Inhomogeneities `eta_i = q^(v_i)` of the quantum sites.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub v: Vec<C64>,
}

impl ChainSpec {
    pub fn new(v: Vec<C64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidParams("a chain needs at least one site".into()));
        }
        Ok(Self { v })
    }

    pub fn homogeneous(n: usize) -> Self {
        Self { v: vec![C64::new(0.0, 0.0); n.max(1)] }
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        Self::new(v.iter().map(|x| C64::new(*x, 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    /// The chain with every inhomogeneity shifted by `c`.
    pub fn shifted(&self, c: C64) -> Self {
        Self { v: self.v.iter().map(|x| x + c).collect() }
    }
}

/// How the auxiliary module of a transfer matrix is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aux {
    /// The `(m+1)`-dimensional module; `mu = m` must be a nonnegative integer.
    Finite,
    /// The truncated Verma module of weight `mu` alone.
    VermaTrunc,
    /// Verma of weight `mu` minus Verma of weight `-mu-2`.
    Subtracted,
    /// `Finite` at nonnegative integers, zero at `-1`, antisymmetry below, `Subtracted` otherwise.
    Auto,
}

/// Nonnegative integer value of `mu`, if it is one.
pub fn as_integer(mu: C64) -> Option<i64> {
    let r = mu.re.round();
    if mu.im.abs() < 1e-12 && (mu.re - r).abs() < 1e-12 {
        Some(r as i64)
    } else {
        None
    }
}

/// Number of down spins (second basis state) in multi-index `k`.
fn down_count(k: usize) -> u32 {
    k.count_ones()
}

/// Diagonal of the spin operator: `(n - 2w)/2` for `w` down spins.
pub fn spin_diag(n: usize) -> Vec<f64> {
    (0..1usize << n).map(|k| (n as f64 - 2.0 * down_count(k) as f64) / 2.0).collect()
}

pub fn spin_matrix(n: usize) -> CMat {
    let d: Vec<C64> = spin_diag(n).into_iter().map(|x| C64::new(x, 0.0)).collect();
    matrix::diag(&d)
}

/// Basis indices of the spin sector `S`.
pub fn sector_indices(n: usize, sector: f64) -> Vec<usize> {
    spin_diag(n)
        .iter()
        .enumerate()
        .filter(|(_, s)| (**s - sector).abs() < 1e-12)
        .map(|(k, _)| k)
        .collect()
}

/// Diagonal of `C = q^phi q^S - q^-phi q^-S`.
pub fn cmat_diag(n: usize, p: &ModelParams) -> Vec<C64> {
    spin_diag(n)
        .into_iter()
        .map(|s| p.qpow(p.phi + s) - p.qpow(-p.phi - s))
        .collect()
}

pub fn cmat(n: usize, p: &ModelParams) -> CMat {
    matrix::diag(&cmat_diag(n, p))
}

fn site_points(u: SpectralPoint, chain: &ChainSpec) -> Vec<SpectralPoint> {
    chain.v.iter().map(|v| SpectralPoint::new(u.u - v)).collect()
}

fn monodromy_trace(rep: &RepMatrices, u: SpectralPoint, chain: &ChainSpec, p: &ModelParams) -> Result<CMat> {
    let cells = site_points(u, chain)
        .into_iter()
        .map(|x| monodromy_cell(rep, x, p))
        .collect::<Result<Vec<OperatorCell>>>()?;
    chain_trace(&cells, &rep.twist(p))
}

/// `q^(n/2) prod_i (zeta/eta_i)^(-s/2)`.
pub fn transfer_prefactor(u: SpectralPoint, chain: &ChainSpec, p: &ModelParams) -> C64 {
    let n = chain.n() as f64;
    let sum: C64 = site_points(u, chain).iter().map(|x| x.u).sum();
    p.qpow(n / 2.0 - p.sf() / 2.0 * sum)
}

/// Reduced twisted trace for the chosen auxiliary module at Verma truncation `dim`.
fn reduced_transfer(mu: C64, u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, aux: Aux, dim: usize) -> Result<CMat> {
    match aux {
        Aux::Finite => {
            let m = as_integer(mu)
                .filter(|m| *m >= 0)
                .ok_or_else(|| Error::InvalidParams(format!("finite module needs integer weight, got {mu}")))?;
            monodromy_trace(&rep_finite(m as usize, p), u, chain, p)
        }
        Aux::VermaTrunc => monodromy_trace(&rep_verma(mu, dim, p), u, chain, p),
        Aux::Subtracted => {
            let a = monodromy_trace(&rep_verma(mu, dim, p), u, chain, p)?;
            let b = monodromy_trace(&rep_verma(-mu - 2.0, dim, p), u, chain, p)?;
            Ok(a - b)
        }
        Aux::Auto => match as_integer(mu) {
            Some(m) if m >= 0 => reduced_transfer(mu, u, chain, p, Aux::Finite, dim),
            Some(-1) => Ok(matrix::zeros(chain.dim())),
            Some(_) => Ok(-reduced_transfer(-mu - 2.0, u, chain, p, Aux::Finite, dim)?),
            None => reduced_transfer(mu, u, chain, p, Aux::Subtracted, dim),
        },
    }
}

fn uses_verma(mu: C64, aux: Aux) -> bool {
    match aux {
        Aux::Finite => false,
        Aux::VermaTrunc | Aux::Subtracted => true,
        Aux::Auto => as_integer(mu).is_none(),
    }
}

/// Relative change of a truncated result when the truncation is doubled.
pub fn stability(a: &CMat, b: &CMat) -> f64 {
    matrix::rel_residual(b, a)
}

fn checked(
    name: &str,
    tol: f64,
    compute: impl Fn(usize) -> Result<CMat>,
    dim: usize,
) -> Result<CMat> {
    let base = compute(dim)?;
    let doubled = compute(2 * dim)?;
    let change = stability(&base, &doubled);
    if change > tol {
        return Err(Error::Regime(format!(
            "{name}: truncation {dim} -> {} changes the result by {change:e}",
            2 * dim
        )));
    }
    Ok(base)
}

/// `T^p_mu` at an explicit Verma truncation, without the stability check.
pub fn transfer_p_dim(mu: C64, u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, aux: Aux, dim: usize) -> Result<CMat> {
    Ok(reduced_transfer(mu, u, chain, p, aux, dim)? * transfer_prefactor(u, chain, p))
}

/// Polynomial-normalized transfer matrix `T^p_mu(zeta | eta_1..eta_n)`.
pub fn transfer_p(mu: C64, u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, aux: Aux) -> Result<CMat> {
    if !uses_verma(mu, aux) {
        return transfer_p_dim(mu, u, chain, p, aux, p.verma_dim);
    }
    p.trace_regime(chain.n())?;
    checked(
        "transfer",
        p.tol_check,
        |d| transfer_p_dim(mu, u, chain, p, aux, d),
        p.verma_dim,
    )
}

/// The transfer matrix with its central prefactor `prod_i e^{Lambda^mu(q^-1 (zeta/eta_i)^s)}`
/// restored and no polynomial normalization; needs the series to converge.
pub fn transfer_unreduced(mu: C64, u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, aux: Aux) -> Result<CMat> {
    let reduced = transfer_p(mu, u, chain, p, aux)? / transfer_prefactor(u, chain, p);
    let mut scal = C64::new(0.0, 0.0);
    for x in site_points(u, chain) {
        scal += lambda_rep(mu, x.pow(p.sf(), p) / p.q(), p)?;
    }
    Ok(reduced * scal.exp())
}

/// Reduced Fock trace of the L-operator chain: the Q-operator before any normalization.
pub fn qop_reduced_dim(u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, bar: bool, dim: usize) -> Result<CMat> {
    let (rep, which) = if bar {
        (rep_fock(FockSign::Minus, dim, p), LWhich::LBar)
    } else {
        (rep_fock(FockSign::Plus, dim, p), LWhich::L)
    };
    let cells = site_points(u, chain)
        .into_iter()
        .map(|x| l_cell(&rep, x, which, p))
        .collect::<Result<Vec<OperatorCell>>>()?;
    chain_trace(&cells, &rep.twist(p))
}

/// Scalar `(1 - q^(-n ∓ 2 phi)) prod_i (zeta/eta_i)^(-s/4)` of the normalized Q-operators.
pub fn qop_prefactor(u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, bar: bool) -> C64 {
    let n = chain.n() as f64;
    let sign = if bar { 1.0 } else { -1.0 };
    let constant = 1.0 - p.qpow(-n + sign * 2.0 * p.phi);
    let sum: C64 = site_points(u, chain).iter().map(|x| x.u).sum();
    constant * p.qpow(-p.sf() / 4.0 * sum)
}

/// Diagonal of `prod_i (zeta/eta_i)^(± s S / 2n)`, the spin-dependent renormalization.
pub fn qop_spin_factor(u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, bar: bool) -> Vec<C64> {
    let n = chain.n();
    let sign = if bar { -1.0 } else { 1.0 };
    let sum: C64 = site_points(u, chain).iter().map(|x| x.u).sum();
    spin_diag(n)
        .into_iter()
        .map(|s| p.qpow(sign * p.sf() * s / (2.0 * n as f64) * sum))
        .collect()
}

/// `Q^p` (or `Q̄^p` for `bar`) at an explicit Fock truncation, without the stability check.
pub fn qop_p_dim(u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, bar: bool, dim: usize) -> Result<CMat> {
    let mut m = qop_reduced_dim(u, chain, p, bar, dim)? * qop_prefactor(u, chain, p, bar);
    for (k, f) in qop_spin_factor(u, chain, p, bar).into_iter().enumerate() {
        let mut row = m.row_mut(k);
        row *= f;
    }
    Ok(m)
}

/// Polynomial-normalized Q-operator `Q^p(zeta | eta)`, or `Q̄^p` for `bar`.
pub fn qop_p(u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, bar: bool) -> Result<CMat> {
    p.validate()?;
    p.trace_regime(chain.n())?;
    checked("Q-operator", p.tol_check, |d| qop_p_dim(u, chain, p, bar, d), p.fock_dim)
}

/// `Q'` or `Q̄'` with the scalar `prod_i e^{lambda_2(q^-1 (zeta/eta_i)^s)}` restored.
pub fn qop_prime(u: SpectralPoint, chain: &ChainSpec, p: &ModelParams, bar: bool) -> Result<CMat> {
    p.trace_regime(chain.n())?;
    let reduced = checked("Q-operator", p.tol_check, |d| qop_reduced_dim(u, chain, p, bar, d), p.fock_dim)?;
    let mut scal = C64::new(0.0, 0.0);
    for x in site_points(u, chain) {
        scal += lambda2(x.pow(p.sf(), p) / p.q(), p)?;
    }
    Ok(reduced * scal.exp())
}
