//! Matrix images of generators for the finite, truncated Verma and q-oscillator Fock modules.
//!
//! Truncated modules keep the first `D` basis vectors; raising generators annihilate the top one.

use num_complex::Complex64 as C64;

use crate::matrix::{self, CMat};
use crate::qkernel::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RepKind {
    Finite(usize),
    VermaTrunc { mu: C64, dim: usize },
    FockPlus(usize),
    FockMinus(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FockSign {
    Plus,
    Minus,
}

#[derive(Clone, Debug)]
pub enum Generators {
    /// `E` and `F` of the quantum group.
    Algebra { e: CMat, f: CMat },
    /// `b` and `b†` of the q-oscillator algebra.
    Oscillator { b: CMat, bdag: CMat },
}

#[derive(Clone, Debug)]
pub struct RepMatrices {
    pub kind: RepKind,
    pub dim: usize,
    /// Eigenvalue `w_j` of `H` (or `N`) on basis vector `j`, so `q^(nu H) = diag(q^(nu w_j))`.
    pub weights: Vec<C64>,
    pub gens: Generators,
    hbar: C64,
}

impl RepMatrices {
    /// Diagonal of `q^(nu H)` (algebra modules) or `q^(nu N)` (Fock modules).
    pub fn qdiag_vec(&self, nu: C64) -> Vec<C64> {
        self.weights.iter().map(|w| (self.hbar * nu * w).exp()).collect()
    }

    pub fn qdiag(&self, nu: impl Into<C64>) -> CMat {
        matrix::diag(&self.qdiag_vec(nu.into()))
    }

    pub fn is_algebra(&self) -> bool {
        matches!(self.gens, Generators::Algebra { .. })
    }

    /// Twist image: `q^(phi H)`, `q^(-2 phi N)` on `χ⁺`, `q^(2 phi N)` on `χ⁻`.
    pub fn twist(&self, p: &ModelParams) -> CMat {
        match self.kind {
            RepKind::Finite(_) | RepKind::VermaTrunc { .. } => self.qdiag(p.phi),
            RepKind::FockPlus(_) => self.qdiag(-2.0 * p.phi),
            RepKind::FockMinus(_) => self.qdiag(2.0 * p.phi),
        }
    }
}

fn highest_weight(kind: RepKind, mu: C64, dim: usize, p: &ModelParams) -> RepMatrices {
    let weights = (0..dim).map(|j| mu - 2.0 * j as f64).collect();
    let mut e = matrix::zeros(dim);
    let mut f = matrix::zeros(dim);
    for n in 1..dim {
        let nf = n as f64;
        e[(n - 1, n)] = p.qnum(nf) * p.qnum(mu - nf + 1.0);
        f[(n, n - 1)] = C64::new(1.0, 0.0);
    }
    RepMatrices { kind, dim, weights, gens: Generators::Algebra { e, f }, hbar: p.hbar }
}

/// The `(m+1)`-dimensional module with highest weight `m`.
pub fn rep_finite(m: usize, p: &ModelParams) -> RepMatrices {
    highest_weight(RepKind::Finite(m), C64::new(m as f64, 0.0), m + 1, p)
}

/// The Verma module of highest weight `mu`, truncated to `dim` levels.
pub fn rep_verma(mu: C64, dim: usize, p: &ModelParams) -> RepMatrices {
    highest_weight(RepKind::VermaTrunc { mu, dim }, mu, dim, p)
}

/// Truncated Fock module of the q-oscillator algebra.
pub fn rep_fock(sign: FockSign, dim: usize, p: &ModelParams) -> RepMatrices {
    let mut b = matrix::zeros(dim);
    let mut bdag = matrix::zeros(dim);
    let one = C64::new(1.0, 0.0);
    let (kind, weights) = match sign {
        FockSign::Plus => {
            for n in 1..dim {
                bdag[(n, n - 1)] = one;
                b[(n - 1, n)] = p.qnum(n as f64);
            }
            (RepKind::FockPlus(dim), (0..dim).map(|j| C64::new(j as f64, 0.0)).collect())
        }
        FockSign::Minus => {
            for n in 1..dim {
                b[(n, n - 1)] = one;
                bdag[(n - 1, n)] = -p.qnum(n as f64);
            }
            (
                RepKind::FockMinus(dim),
                (0..dim).map(|j| C64::new(-(j as f64) - 1.0, 0.0)).collect(),
            )
        }
    };
    RepMatrices { kind, dim, weights, gens: Generators::Oscillator { b, bdag }, hbar: p.hbar }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs;

    fn gens_ef(r: &RepMatrices) -> (&CMat, &CMat) {
        match &r.gens {
            Generators::Algebra { e, f } => (e, f),
            _ => unreachable!(),
        }
    }

    fn gens_b(r: &RepMatrices) -> (&CMat, &CMat) {
        match &r.gens {
            Generators::Oscillator { b, bdag } => (b, bdag),
            _ => unreachable!(),
        }
    }

    fn lead(m: &CMat, k: usize) -> CMat {
        m.view((0, 0), (k, k)).into_owned()
    }

    /// `[E, F] - (q^H - q^-H)/kappa`.
    fn ef_defect(r: &RepMatrices, p: &ModelParams) -> CMat {
        let (e, f) = gens_ef(r);
        e * f - f * e - (r.qdiag(1.0) - r.qdiag(-1.0)) / p.kappa()
    }

    fn casimir(r: &RepMatrices, p: &ModelParams) -> CMat {
        let (e, f) = gens_ef(r);
        let k = p.kappa();
        r.qdiag(1.0) / p.q() + r.qdiag(-1.0) * p.q() + e * f * (k * k)
    }

    #[test]
    fn spin_half_images() {
        let p = ModelParams::default();
        let r = rep_finite(1, &p);
        let (e, f) = gens_ef(&r);
        assert_eq!(e[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(f[(1, 0)], C64::new(1.0, 0.0));
        assert!((r.qdiag(1.0)[(0, 0)] - p.q()).norm() < 1e-15);
        assert!((r.qdiag(1.0)[(1, 1)] - 1.0 / p.q()).norm() < 1e-15);
    }

    #[test]
    fn trivial_module() {
        let p = ModelParams::default();
        let r = rep_finite(0, &p);
        let (e, f) = gens_ef(&r);
        assert_eq!(max_abs(e) + max_abs(f), 0.0);
        assert!((r.qdiag(0.7)[(0, 0)] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn finite_defining_relations() {
        let p = ModelParams::default();
        for m in 0..5 {
            let r = rep_finite(m, &p);
            assert!(max_abs(&ef_defect(&r, &p)) < 1e-12, "m = {m}");
            let c = casimir(&r, &p);
            let expected = matrix::identity(m + 1) * crate::qkernel::casimir_image(1, C64::new(m as f64, 0.0), &p);
            assert!(max_abs(&(c - expected)) < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn verma_defining_relations_on_interior() {
        let p = ModelParams::default();
        let mu = C64::new(0.8, 0.0);
        let r = rep_verma(mu, 40, &p);
        let scale = max_abs(&lead(&(gens_ef(&r).0 * gens_ef(&r).1), 39));
        let d = ef_defect(&r, &p);
        assert!(max_abs(&lead(&d, 39)) / scale < 1e-13);
        let c = casimir(&r, &p) - matrix::identity(40) * crate::qkernel::casimir_image(1, mu, &p);
        assert!(max_abs(&lead(&c, 39)) / scale < 1e-13);
    }

    #[test]
    fn verma_contains_finite_block() {
        let p = ModelParams::default();
        for m in 0..4 {
            let v = rep_verma(C64::new(m as f64, 0.0), m + 4, &p);
            let f = rep_finite(m, &p);
            let block = lead(gens_ef(&v).0, m + 1);
            assert!(max_abs(&(block - gens_ef(&f).0)) < 1e-13);
            // the submodule is invariant: E does not leave level m+1 towards level m
            assert!(gens_ef(&v).0[(m, m + 1)].norm() < 1e-13);
        }
    }

    #[test]
    fn fock_plus_relations() {
        let p = ModelParams::default();
        let d = 12;
        let r = rep_fock(FockSign::Plus, d, &p);
        let qn = r.qdiag(0.5);
        for j in 0..d {
            assert!((qn[(j, j)] - p.qpow(0.5 * j as f64)).norm() < 1e-15);
        }
        let (b, bdag) = gens_b(&r);
        let k = p.kappa();
        let lhs = bdag * b - (r.qdiag(1.0) - r.qdiag(-1.0)) / k;
        assert!(max_abs(&lead(&lhs, d - 1)) < 1e-10);
        let lhs = b * bdag - (r.qdiag(1.0) * p.q() - r.qdiag(-1.0) / p.q()) / k;
        assert!(max_abs(&lead(&lhs, d - 1)) < 1e-10);
    }

    #[test]
    fn fock_minus_relations() {
        let p = ModelParams::default();
        let d = 12;
        let r = rep_fock(FockSign::Minus, d, &p);
        let qn = r.qdiag(1.0);
        for j in 0..d {
            assert!((qn[(j, j)] - p.qpow(-(j as f64) - 1.0)).norm() < 1e-15);
        }
        let (b, bdag) = gens_b(&r);
        let k = p.kappa();
        let lhs = b * bdag - (r.qdiag(1.0) * p.q() - r.qdiag(-1.0) / p.q()) / k;
        assert!(max_abs(&lead(&lhs, d - 1)) < 1e-10);
        let lhs = bdag * b - (r.qdiag(1.0) - r.qdiag(-1.0)) / k;
        assert!(max_abs(&lead(&lhs, d - 1)) < 1e-10);
    }
}
