//! Bethe equations in logarithmic form, a damped Newton solver and the eigenvalue formula.
//!
//! Everything is written in six-vertex exponents: a spectral point `u` enters as
//! `y = -s u / 2`, an inhomogeneity `v_i` as `e_i = -s v_i / 2`, and a root is `w_m`
//! with `zeta_m = q^(w_m)`.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qkernel::{weight_a, weight_b, ModelParams, SpectralPoint};
use crate::transfer::ChainSpec;

const MAX_ITER: usize = 200;
const NEWTON_TOL: f64 = 1e-13;
const POLE_EPS: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheState {
    pub p: usize,
    /// Root exponents, serialized as `[re, im]` pairs.
    #[serde(with = "pairs")]
    pub roots: Vec<C64>,
    pub residual: f64,
    pub sector: f64,
    pub iterations: usize,
}

mod pairs {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl BetheState {
    pub fn empty(n: usize) -> Self {
        Self { p: 0, roots: Vec::new(), residual: 0.0, sector: n as f64 / 2.0, iterations: 0 }
    }
}

/// Six-vertex exponent of a spectral point.
pub fn six_vertex_exponent(u: C64, p: &ModelParams) -> C64 {
    -p.sf() * u / 2.0
}

fn site_exponents(chain: &ChainSpec, p: &ModelParams) -> Vec<C64> {
    chain.v.iter().map(|v| six_vertex_exponent(*v, p)).collect()
}

/// Imaginary part folded into `(-pi, pi]`.
fn reduce(z: C64) -> C64 {
    let mut im = (z.im + PI).rem_euclid(2.0 * PI) - PI;
    if im <= -PI {
        im += 2.0 * PI;
    }
    C64::new(z.re, im)
}

fn check_poles(w: &[C64], e: &[C64], p: &ModelParams) -> Result<()> {
    for (m, wm) in w.iter().enumerate() {
        for ei in e {
            if weight_b(wm - ei, p).norm() < POLE_EPS {
                return Err(Error::PoleCollision(format!("root {m} sits on an inhomogeneity")));
            }
        }
        for (l, wl) in w.iter().enumerate() {
            if l != m && weight_a(wm - wl, p).norm() < POLE_EPS {
                return Err(Error::PoleCollision(format!("roots {m} and {l} differ by q")));
            }
        }
    }
    Ok(())
}

/// Log-form defects `log LHS_m - log RHS_m`, reduced mod `2 pi i`.
pub fn bethe_equations(w: &[C64], e: &[C64], p: &ModelParams) -> Result<Vec<C64>> {
    check_poles(w, e, p)?;
    let n_roots = w.len();
    let base = 2.0 * p.phi * p.hbar - C64::new(0.0, PI * (n_roots as f64 + 1.0));
    Ok((0..n_roots)
        .map(|m| {
            let mut f = base;
            for ei in e {
                f += weight_a(w[m] - ei, p).ln() - weight_b(w[m] - ei, p).ln();
            }
            for l in (0..n_roots).filter(|l| *l != m) {
                f -= weight_a(w[m] - w[l], p).ln() - weight_a(w[l] - w[m], p).ln();
            }
            reduce(f)
        })
        .collect())
}

/// Logarithmic derivatives of `a` and `b` with respect to the exponent.
fn dlog_a(x: C64, p: &ModelParams) -> C64 {
    p.hbar * (p.qpow(1.0 + x) + p.qpow(-1.0 - x)) / weight_a(x, p)
}

fn dlog_b(x: C64, p: &ModelParams) -> C64 {
    p.hbar * (p.qpow(x) + p.qpow(-x)) / weight_b(x, p)
}

fn jacobian(w: &[C64], e: &[C64], p: &ModelParams) -> nalgebra::DMatrix<C64> {
    let k = w.len();
    let mut jac = nalgebra::DMatrix::<C64>::zeros(k, k);
    for m in 0..k {
        for ei in e {
            jac[(m, m)] += dlog_a(w[m] - ei, p) - dlog_b(w[m] - ei, p);
        }
        for l in (0..k).filter(|l| *l != m) {
            let g = dlog_a(w[m] - w[l], p) + dlog_a(w[l] - w[m], p);
            jac[(m, m)] -= g;
            jac[(m, l)] += g;
        }
    }
    jac
}

fn sup(f: &[C64]) -> f64 {
    f.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest reduced log-defect of the Bethe equations.
pub fn bethe_residual(state: &BetheState, chain: &ChainSpec, p: &ModelParams) -> Result<f64> {
    Ok(sup(&bethe_equations(&state.roots, &site_exponents(chain, p), p)?))
}

/// Damped Newton iteration from `init`; fails unless the residual drops below `tol_check`.
pub fn bethe_solve(n_roots: usize, chain: &ChainSpec, p: &ModelParams, init: &[C64]) -> Result<BetheState> {
    let n = chain.n();
    if n_roots > n {
        return Err(Error::InvalidParams(format!("{n_roots} roots on {n} sites")));
    }
    if init.len() != n_roots {
        return Err(Error::DimensionMismatch(format!("{} initial roots for p = {n_roots}", init.len())));
    }
    let sector = n as f64 / 2.0 - n_roots as f64;
    if n_roots == 0 {
        return Ok(BetheState::empty(n));
    }
    let e = site_exponents(chain, p);
    let mut w = init.to_vec();
    let mut f = bethe_equations(&w, &e, p)?;
    let mut norm = sup(&f);
    for it in 0..MAX_ITER {
        if norm < NEWTON_TOL {
            return finish(w, norm, sector, it, p);
        }
        let rhs = DVector::from_iterator(n_roots, f.iter().map(|z| -z));
        let step = jacobian(&w, &e, p).lu().solve(&rhs).ok_or(Error::NoConvergence { iters: it, residual: norm })?;
        // halve the step until the defect decreases; the last trial is taken regardless
        let mut t = 1.0;
        let (trial, ft) = loop {
            let trial: Vec<C64> = w.iter().zip(step.iter()).map(|(a, d)| a + d * t).collect();
            match bethe_equations(&trial, &e, p) {
                Ok(ft) if sup(&ft) < norm || t <= 1e-4 => break (trial, ft),
                Err(err) if t <= 1e-4 => return Err(err),
                _ => t /= 2.0,
            }
        };
        w = trial;
        norm = sup(&ft);
        f = ft;
        if !norm.is_finite() {
            return Err(Error::NoConvergence { iters: it, residual: norm });
        }
    }
    if norm <= p.tol_check {
        return finish(w, norm, sector, MAX_ITER, p);
    }
    Err(Error::NoConvergence { iters: MAX_ITER, residual: norm })
}

fn finish(w: Vec<C64>, residual: f64, sector: f64, iterations: usize, p: &ModelParams) -> Result<BetheState> {
    if residual > p.tol_check {
        return Err(Error::NoConvergence { iters: iterations, residual });
    }
    let z2: Vec<C64> = w.iter().map(|x| p.qpow(2.0 * x)).collect();
    for i in 0..z2.len() {
        for j in 0..i {
            if (z2[i] - z2[j]).norm() < 1e-6 {
                return Err(Error::PoleCollision(format!("roots {j} and {i} coincide")));
            }
        }
    }
    Ok(BetheState { p: w.len(), roots: w, residual, sector, iterations })
}

/// Eight deterministic starting configurations: `p` points on circles around `mean(e) - 1`.
pub fn default_seeds(n_roots: usize, chain: &ChainSpec, p: &ModelParams) -> Vec<Vec<C64>> {
    let e = site_exponents(chain, p);
    let centre = e.iter().sum::<C64>() / e.len() as f64 - 1.0;
    (0..8)
        .map(|k| {
            let rho = 0.25 + 0.15 * (k % 4) as f64;
            let alpha = 2.0 * PI * k as f64 / 8.0 + 0.3;
            (0..n_roots)
                .map(|m| centre + C64::from_polar(rho, 2.0 * PI * m as f64 / n_roots.max(1) as f64 + alpha))
                .collect()
        })
        .collect()
}

/// Multi-start solve; distinct states are those with distinct `lambda` at `probe`.
pub fn solve_sector(n_roots: usize, chain: &ChainSpec, p: &ModelParams, probe: SpectralPoint) -> Result<Vec<BetheState>> {
    if n_roots == 0 {
        return Ok(vec![BetheState::empty(chain.n())]);
    }
    let mut found: Vec<(C64, BetheState)> = Vec::new();
    for seed in default_seeds(n_roots, chain, p) {
        let Ok(state) = bethe_solve(n_roots, chain, p, &seed) else { continue };
        if state.roots.iter().any(|w| w.re.abs() > 20.0) {
            continue;
        }
        let Ok(lam) = eigenvalue_lambda(probe, &state, chain, p) else { continue };
        if !found.iter().any(|(l, _)| (l - lam).norm() < 1e-7 * lam.norm().max(1.0)) {
            found.push((lam, state));
        }
    }
    Ok(found.into_iter().map(|(_, s)| s).collect())
}

/// The transfer-matrix eigenvalue built from the roots.
pub fn eigenvalue_lambda(u: SpectralPoint, state: &BetheState, chain: &ChainSpec, p: &ModelParams) -> Result<C64> {
    let y = six_vertex_exponent(u.u, p);
    let e = site_exponents(chain, p);
    let (mut first, mut second) = (p.qpow(p.phi), p.qpow(-p.phi));
    for ei in &e {
        first *= weight_a(y - ei, p);
        second *= weight_b(y - ei, p);
    }
    for wl in &state.roots {
        let (d1, d2) = (weight_b(wl - y, p), weight_b(y - wl, p));
        if d1.norm() < POLE_EPS {
            return Err(Error::PoleCollision("spectral point on a Bethe root".into()));
        }
        first *= weight_a(wl - y, p) / d1;
        second *= weight_a(y - wl, p) / d2;
    }
    Ok(first + second)
}

/// `theta(y) = prod_l b(w_l - y)`.
pub fn theta(y: C64, state: &BetheState, p: &ModelParams) -> C64 {
    state.roots.iter().map(|w| weight_b(w - y, p)).product()
}

/// Relative defect of `lambda theta = q^phi prod a theta(q^-1 .) + q^-phi prod b theta(q .)`.
pub fn theta_check(u: SpectralPoint, state: &BetheState, chain: &ChainSpec, p: &ModelParams) -> Result<f64> {
    let y = six_vertex_exponent(u.u, p);
    let lam = eigenvalue_lambda(u, state, chain, p)?;
    let (mut pa, mut pb) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    for ei in site_exponents(chain, p) {
        pa *= weight_a(y - ei, p);
        pb *= weight_b(y - ei, p);
    }
    let t1 = p.qpow(p.phi) * pa * theta(y - 1.0, state, p);
    let t2 = p.qpow(-p.phi) * pb * theta(y + 1.0, state, p);
    let lhs = lam * theta(y, state, p);
    let scale = lhs.norm().max(t1.norm()).max(t2.norm()).max(1.0);
    Ok((lhs - t1 - t2).norm() / scale)
}

/// Closed-form root of the single-site equation `q^(2 phi) a(w) = b(w)`.
pub fn single_site_root(p: &ModelParams) -> C64 {
    let z2 = (p.qpow(2.0 * p.phi - 1.0) - 1.0) / (p.qpow(2.0 * p.phi + 1.0) - 1.0);
    z2.ln() / (2.0 * p.hbar)
}
