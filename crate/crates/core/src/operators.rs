//! R-matrices, monodromy and L-operator cells, and chain contraction.
//!
//! Cells are reduced: the central scalar prefactors `e^{Lambda(q^-1 zeta^s)}` and
//! `e^{lambda_2(q^-1 zeta^s)}` are left out. Multi-indices are big-endian, site 1 most
//! significant, matching the Kronecker order of the quantum space.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::{self, CMat};
use crate::qkernel::{lambda2, ModelParams, SpectralPoint};
use crate::reps::{Generators, RepKind, RepMatrices};

/// A 2x2 matrix in the quantum-site index whose entries act on a representation space.
#[derive(Clone, Debug)]
pub struct OperatorCell {
    pub entries: [[CMat; 2]; 2],
    pub kind: RepKind,
    pub u: SpectralPoint,
}

impl OperatorCell {
    pub fn dim(&self) -> usize {
        self.entries[0][0].nrows()
    }

    /// The cell as one operator on `V ⊗ C^2`, representation space first.
    pub fn assemble(&self) -> CMat {
        let d = self.dim();
        CMat::from_fn(2 * d, 2 * d, |r, c| {
            let (v_r, i) = (r / 2, r % 2);
            let (v_c, j) = (c / 2, c % 2);
            self.entries[i][j][(v_r, v_c)]
        })
    }

    pub fn grid(&self) -> OpGrid {
        OpGrid {
            size: 2,
            entries: self.entries.iter().flat_map(|row| row.iter().cloned()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LWhich {
    L,
    LBar,
}

/// Reduced monodromy cell over a finite or truncated Verma module.
pub fn monodromy_cell(rep: &RepMatrices, u: SpectralPoint, p: &ModelParams) -> Result<OperatorCell> {
    let (e, f) = match &rep.gens {
        Generators::Algebra { e, f } => (e, f),
        Generators::Oscillator { .. } => {
            return Err(Error::RepMismatch("monodromy cell needs a quantum-group module".into()))
        }
    };
    let s = p.sf();
    let zs = u.pow(s, p);
    let qi = 1.0 / p.q();
    let hp = rep.qdiag(0.5);
    let hm = rep.qdiag(-0.5);
    let k = p.kappa();
    let m11 = &hp - &hm * (qi * zs);
    let m12 = f * &hm * (k * u.pow(p.s0 as f64, p));
    let m21 = e * &hp * (k * u.pow(p.s1 as f64, p));
    let m22 = &hm - &hp * (qi * zs);
    Ok(OperatorCell { entries: [[m11, m12], [m21, m22]], kind: rep.kind, u })
}

/// Reduced L-operator cell: `L` over `χ⁺`, `LBar` over `χ⁻`.
pub fn l_cell(rep: &RepMatrices, u: SpectralPoint, which: LWhich, p: &ModelParams) -> Result<OperatorCell> {
    let (b, bdag) = match (&rep.gens, rep.kind, which) {
        (Generators::Oscillator { b, bdag }, RepKind::FockPlus(_), LWhich::L)
        | (Generators::Oscillator { b, bdag }, RepKind::FockMinus(_), LWhich::LBar) => (b, bdag),
        _ => {
            return Err(Error::RepMismatch(format!(
                "{which:?} cell cannot be built over {:?}",
                rep.kind
            )))
        }
    };
    let s = p.sf();
    let zs = u.pow(s, p);
    let z_s1 = u.pow(p.s1 as f64, p);
    let z_s0 = u.pow(s - p.s1 as f64, p);
    let k = p.kappa();
    let n_p = rep.qdiag(1.0);
    let n_m = rep.qdiag(-1.0);
    let n_m2 = rep.qdiag(-2.0);
    let big = &n_p - &n_m * (p.qpow(-2.0) * zs);
    let entries = match which {
        LWhich::L => [[n_m, bdag * &n_p * (k * z_s0)], [b * &n_m2 * z_s1, big]],
        LWhich::LBar => [[big, b * &n_m2 * z_s0], [bdag * &n_p * (k * z_s1), n_m]],
    };
    Ok(OperatorCell { entries, kind: rep.kind, u })
}

fn unit(i: usize, j: usize) -> CMat {
    let mut m = matrix::zeros(2);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// `lambda_2(q x) + lambda_2(q^-3 x)` with the second term continued through
/// `lambda_2(q^-3 x) = -log(1 - q^-2 x) - lambda_2(q^-1 x)` outside its disk.
fn r_prefactor_exponential(x: C64, p: &ModelParams) -> Result<C64> {
    let first = lambda2(p.q() * x, p)?;
    let inner = p.qpow(-3.0) * x;
    if inner.norm() < 1.0 {
        Ok((first + lambda2(inner, p)?).exp())
    } else {
        let den = 1.0 - p.qpow(-2.0) * x;
        if den.norm() < 1e-14 {
            return Err(Error::PoleCollision("R-matrix pole at zeta^s = q^2".into()));
        }
        Ok((first - lambda2(x / p.q(), p)?).exp() / den)
    }
}

/// The R-matrix in the closed form with the bracketed six-vertex weights.
///
/// `normalized = true` returns the bracket alone; otherwise the scalar
/// `q^(-1/2) zeta^(s/2) e^{lambda_2(q zeta^s) + lambda_2(q^-3 zeta^s)}` is included.
pub fn r_matrix(u: SpectralPoint, p: &ModelParams, normalized: bool) -> Result<CMat> {
    let s = p.sf();
    let (zm, zp) = (u.pow(-s / 2.0, p), u.pow(s / 2.0, p));
    let q = p.q();
    let k = p.kappa();
    let ds = (p.s0 - p.s1) as f64;
    let mut r = matrix::zeros(4);
    r[(0, 0)] = q * zm - zp / q;
    r[(3, 3)] = r[(0, 0)];
    r[(1, 1)] = zm - zp;
    r[(2, 2)] = r[(1, 1)];
    r[(1, 2)] = k * u.pow(-ds / 2.0, p);
    r[(2, 1)] = k * u.pow(ds / 2.0, p);
    if normalized {
        return Ok(r);
    }
    let pre = p.qpow(-0.5) * zp * r_prefactor_exponential(u.pow(s, p), p)?;
    Ok(r * pre)
}

/// Images of the four factors of the universal R-matrix, in product order.
pub fn r_factors(u: SpectralPoint, p: &ModelParams) -> Result<[CMat; 4]> {
    let s = p.sf();
    let x = u.pow(s, p);
    let k = p.kappa();
    let q2 = p.qpow(2.0);
    let one = matrix::identity(4);
    let e12_21 = matrix::kron(&unit(0, 1), &unit(1, 0));
    let e21_12 = matrix::kron(&unit(1, 0), &unit(0, 1));
    let lower = &one + e12_21 * (k * u.pow(p.s1 as f64, p) / (1.0 - x));
    let upper = &one + e21_12 * (k * u.pow(s - p.s1 as f64, p) / (1.0 - x));
    let scal = (lambda2(p.q() * x, p)? - lambda2(x / p.q(), p)?).exp();
    let cartan = matrix::diag(&[
        scal,
        scal * (1.0 - q2 * x) / (1.0 - x),
        scal * (1.0 - x) / (1.0 - x / q2),
        scal,
    ]);
    let (hp, hm) = (p.qpow(0.5), p.qpow(-0.5));
    let kfac = matrix::diag(&[hp, hm, hm, hp]);
    Ok([lower, cartan, upper, kfac])
}

/// The R-matrix as the ordered product of its factor images.
pub fn r_matrix_factored(u: SpectralPoint, p: &ModelParams) -> Result<CMat> {
    let x = u.pow(p.sf(), p).norm();
    let q = p.q().norm();
    if !(x < q.min(1.0 / q)) {
        return Err(Error::DivergentSeries(x));
    }
    let [a, b, c, d] = r_factors(u, p)?;
    Ok(a * b * c * d)
}

/// The 4x4 permutation `P`.
pub fn permutation() -> CMat {
    let mut m = matrix::zeros(4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(i, j)] = C64::new(1.0, 0.0);
    }
    m
}

/// `(P R, R P, P)`.
pub fn r_variants(r: &CMat) -> (CMat, CMat, CMat) {
    let pm = permutation();
    (&pm * r, r * &pm, pm)
}

/// Six-vertex twist `F = diag(q^phi, q^-phi)`.
pub fn twist_matrix(p: &ModelParams) -> CMat {
    matrix::diag(&[p.qpow(p.phi), p.qpow(-p.phi)])
}

/// Embeds a two-site operator acting on sites `i < j` of an `n`-site space.
pub fn embed_pair(r: &CMat, i: usize, j: usize, n: usize) -> CMat {
    let size = 1 << n;
    let bit = |x: usize, k: usize| (x >> (n - 1 - k)) & 1;
    CMat::from_fn(size, size, |row, col| {
        let others_match = (0..n).filter(|&k| k != i && k != j).all(|k| bit(row, k) == bit(col, k));
        if !others_match {
            return C64::new(0.0, 0.0);
        }
        r[(2 * bit(row, i) + bit(row, j), 2 * bit(col, i) + bit(col, j))]
    })
}

/// Yang–Baxter defect `R12 R13 R23 - R23 R13 R12` for the normalized R-matrix.
pub fn ybe_residual(u1: C64, u2: C64, u3: C64, p: &ModelParams) -> Result<f64> {
    let r = |u: C64| r_matrix(SpectralPoint::new(u), p, true);
    let r12 = embed_pair(&r(u1 - u2)?, 0, 1, 3);
    let r13 = embed_pair(&r(u1 - u3)?, 0, 2, 3);
    let r23 = embed_pair(&r(u2 - u3)?, 1, 2, 3);
    Ok(matrix::rel_residual(&(&r12 * &r13 * &r23), &(&r23 * &r13 * &r12)))
}

/// Square grid of operators: `size x size` entries, each a matrix.
#[derive(Clone, Debug)]
pub struct OpGrid {
    pub size: usize,
    pub entries: Vec<CMat>,
}

impl OpGrid {
    pub fn get(&self, i: usize, j: usize) -> &CMat {
        &self.entries[i * self.size + j]
    }

    /// Identity grid with `d x d` identity on the diagonal.
    pub fn identity(size: usize, d: usize) -> Self {
        let entries = (0..size * size)
            .map(|k| if k / size == k % size { matrix::identity(d) } else { matrix::zeros(d) })
            .collect();
        Self { size, entries }
    }

    /// Grid with 1x1 entries taken from a scalar matrix.
    pub fn from_scalars(m: &CMat) -> Self {
        let size = m.nrows();
        let entries = (0..size * size)
            .map(|k| CMat::from_element(1, 1, m[(k / size, k % size)]))
            .collect();
        Self { size, entries }
    }

    /// Block matrix with the grid index outermost.
    pub fn to_block(&self) -> CMat {
        let d = self.entries[0].nrows();
        let e = self.entries[0].ncols();
        CMat::from_fn(self.size * d, self.size * e, |r, c| self.get(r / d, c / e)[(r % d, c % e)])
    }
}

/// `(K ⊠ L)_{ir|js} = K_ij L_rs`, with the product taken on the shared operator space.
pub fn boxtimes(k: &OpGrid, l: &OpGrid) -> Result<OpGrid> {
    if k.entries[0].shape() != l.entries[0].shape() {
        return Err(Error::DimensionMismatch("boxtimes entries act on different spaces".into()));
    }
    let size = k.size * l.size;
    let mut entries = Vec::with_capacity(size * size);
    for row in 0..size {
        for col in 0..size {
            let (i, r) = (row / l.size, row % l.size);
            let (j, s) = (col / l.size, col % l.size);
            entries.push(k.get(i, j) * l.get(r, s));
        }
    }
    Ok(OpGrid { size, entries })
}

/// `(M ⊡ N)_ab = sum_c M_ac ⊗ N_cb`, entries combined by the Kronecker product.
pub fn boxdot(m: &OpGrid, n: &OpGrid) -> Result<OpGrid> {
    if m.size != n.size {
        return Err(Error::DimensionMismatch("boxdot needs grids of equal size".into()));
    }
    let size = m.size;
    let mut entries = Vec::with_capacity(size * size);
    for a in 0..size {
        for b in 0..size {
            let mut acc = matrix::kron(m.get(a, 0), n.get(0, b));
            for c in 1..size {
                acc += matrix::kron(m.get(a, c), n.get(c, b));
            }
            entries.push(acc);
        }
    }
    Ok(OpGrid { size, entries })
}

/// `tr(A B)` summed in a fixed order.
fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let d = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Twisted trace over the representation space of the chain of cells.
///
/// Entry `(i1..in | j1..jn)` is `tr(M_{i1 j1} ... M_{in jn} twist)`. Prefix products are
/// shared between multi-indices, so only `O(4^(n-1))` dense products are formed.
pub fn chain_trace(cells: &[OperatorCell], twist: &CMat) -> Result<CMat> {
    let n = cells.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty chain".into()));
    }
    let d = cells[0].dim();
    if cells.iter().any(|c| c.dim() != d) || twist.shape() != (d, d) {
        return Err(Error::DimensionMismatch("cells and twist must share one space".into()));
    }
    let zero: Vec<[[bool; 2]; 2]> = cells
        .iter()
        .map(|c| {
            let mut z = [[false; 2]; 2];
            for (i, row) in c.entries.iter().enumerate() {
                for (j, m) in row.iter().enumerate() {
                    z[i][j] = m.iter().all(|x| *x == C64::new(0.0, 0.0));
                }
            }
            z
        })
        .collect();
    let last = &cells[n - 1];
    let closing: Vec<CMat> = (0..4).map(|k| &last.entries[k / 2][k % 2] * twist).collect();
    let mut out = matrix::zeros(1 << n);

    struct Walk<'a> {
        cells: &'a [OperatorCell],
        zero: &'a [[[bool; 2]; 2]],
        closing: &'a [CMat],
        out: &'a mut CMat,
    }

    impl Walk<'_> {
        fn visit(&mut self, site: usize, prefix: Option<&CMat>, row: usize, col: usize) {
            let n = self.cells.len();
            for i in 0..2 {
                for j in 0..2 {
                    if self.zero[site][i][j] {
                        continue;
                    }
                    let (r, c) = (2 * row + i, 2 * col + j);
                    if site == n - 1 {
                        let closing = &self.closing[2 * i + j];
                        self.out[(r, c)] = match prefix {
                            Some(pre) => trace_product(pre, closing),
                            None => closing.trace(),
                        };
                    } else {
                        let entry = &self.cells[site].entries[i][j];
                        let next = match prefix {
                            Some(pre) => pre * entry,
                            None => entry.clone(),
                        };
                        self.visit(site + 1, Some(&next), r, c);
                    }
                }
            }
        }
    }

    Walk { cells, zero: &zero, closing: &closing, out: &mut out }.visit(0, None, 0, 0);
    Ok(out)
}

/// Exchange-relation defect `R̂(u1-u2)(M(u1) ⊠ M(u2)) - (M(u2) ⊠ M(u1)) R̂(u1-u2)` with
/// `R̂ = R P`, measured on the rows and columns of the first `interior` rep levels.
pub fn exchange_residual(rep: &RepMatrices, u1: C64, u2: C64, interior: usize, p: &ModelParams) -> Result<f64> {
    let cell = |u: C64| monodromy_cell(rep, SpectralPoint::new(u), p).map(|c| c.grid());
    let (m1, m2) = (cell(u1)?, cell(u2)?);
    let r = r_matrix(SpectralPoint::new(u1 - u2), p, true)?;
    let (_, r_hat, _) = r_variants(&r);
    let d = rep.dim;
    let big_r = matrix::kron(&r_hat, &matrix::identity(d));
    let lhs = &big_r * boxtimes(&m1, &m2)?.to_block();
    let rhs = boxtimes(&m2, &m1)?.to_block() * &big_r;
    let keep: Vec<usize> = (0..4 * d).filter(|k| k % d < interior).collect();
    Ok(matrix::rel_residual(&matrix::submatrix(&lhs, &keep), &matrix::submatrix(&rhs, &keep)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{max_abs, rel_residual};
    use crate::reps::{rep_finite, rep_fock, rep_verma, FockSign};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn sp(re: f64, im: f64) -> SpectralPoint {
        SpectralPoint::new(C64::new(re, im))
    }

    #[test]
    fn r_at_unit_point_is_scaled_permutation() {
        let p = ModelParams::default();
        let r = r_matrix(sp(0.0, 0.0), &p, true).unwrap();
        assert!(max_abs(&(r - permutation() * p.kappa())) < 1e-15);
    }

    #[test]
    fn r_layout_matches_six_vertex_weights() {
        let p = ModelParams::default();
        let u = sp(0.27, -0.11);
        let r = r_matrix(u, &p, true).unwrap();
        let (a, b, k) = crate::qkernel::weights(u, &p);
        let expected = [[a, c(0.0), c(0.0), c(0.0)], [c(0.0), b, k, c(0.0)], [c(0.0), k, b, c(0.0)], [c(0.0), c(0.0), c(0.0), a]];
        for i in 0..4 {
            for j in 0..4 {
                assert!((r[(i, j)] - expected[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn factored_matches_closed_form() {
        let p = ModelParams::default();
        for u in [sp(-0.8, 0.0), sp(-1.2, 0.0), sp(-0.9, 0.9), sp(-2.0, -0.3)] {
            let a = r_matrix(u, &p, false).unwrap();
            let b = r_matrix_factored(u, &p).unwrap();
            assert!(max_abs(&(a - b)) < 1e-12);
        }
    }

    #[test]
    fn factor_images() {
        let p = ModelParams::default();
        let u = sp(-0.9, 0.1);
        let [lower, _, _, kfac] = r_factors(u, &p).unwrap();
        let x = u.pow(p.sf(), &p);
        let expected = p.kappa() * u.pow(p.s1 as f64, &p) / (1.0 - x);
        assert!((lower[(1, 2)] - expected).norm() < 1e-15);
        assert_eq!(max_abs(&(lower.clone() - matrix::identity(4))), lower[(1, 2)].norm());
        assert!((kfac[(0, 0)] - p.qpow(0.5)).norm() < 1e-15);
        assert!((kfac[(1, 1)] - p.qpow(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn factored_product_equals_expanded_display() {
        let p = ModelParams::default();
        let u = sp(-0.7, 0.0);
        let x = u.pow(p.sf(), &p);
        let q = p.q();
        let scal = p.qpow(0.5)
            * (lambda2(q * x, &p).unwrap() - lambda2(x / q, &p).unwrap()).exp();
        let mut e = matrix::zeros(4);
        e[(0, 0)] = scal;
        e[(3, 3)] = scal;
        e[(1, 1)] = scal * (1.0 - x) / (q * (1.0 - x / (q * q)));
        e[(2, 2)] = e[(1, 1)];
        let off = scal * (1.0 - 1.0 / (q * q)) / (1.0 - x / (q * q));
        e[(1, 2)] = off * u.pow(p.s1 as f64, &p);
        e[(2, 1)] = off * u.pow(p.s0 as f64, &p);
        assert!(max_abs(&(r_matrix_factored(u, &p).unwrap() - e)) < 1e-12);
    }

    #[test]
    fn variant_index_identities() {
        let p = ModelParams { s0: 0, s1: -2, ..ModelParams::default() };
        let r = r_matrix(sp(0.3, 0.2), &p, true).unwrap();
        let (rc, rh, pm) = r_variants(&r);
        assert_eq!(&pm * &pm, matrix::identity(4));
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        assert_eq!(rc[(2 * a + b, 2 * cc + d)], r[(2 * b + a, 2 * cc + d)]);
                        assert_eq!(rh[(2 * a + b, 2 * cc + d)], r[(2 * a + b, 2 * d + cc)]);
                    }
                }
            }
        }
    }

    #[test]
    fn yang_baxter_and_twist() {
        for p in [ModelParams::default(), ModelParams { s0: 0, s1: -2, ..ModelParams::default() }] {
            let res = ybe_residual(C64::new(0.3, 0.1), c(-0.2), C64::new(0.0, 0.05), &p).unwrap();
            assert!(res < 1e-13);
            let r = r_matrix(sp(0.41, 0.0), &p, true).unwrap();
            let f = twist_matrix(&p);
            let ff = matrix::kron(&f, &f);
            assert!(max_abs(&(&r * &ff - &ff * &r)) == 0.0);
        }
    }

    #[test]
    fn spin_half_cell_is_r_matrix() {
        let p = ModelParams::default();
        let u = sp(0.31, 0.07);
        let cell = monodromy_cell(&rep_finite(1, &p), u, &p).unwrap();
        let r = r_matrix(u, &p, true).unwrap() * (p.qpow(-0.5) * u.pow(p.sf() / 2.0, &p));
        assert!(max_abs(&(cell.assemble() - r)) < 1e-14);
    }

    #[test]
    fn monodromy_cell_scaling_exponents() {
        let p = ModelParams::default();
        let rep = rep_finite(2, &p);
        let (u, t) = (sp(-0.7, 0.1), 0.9);
        let a = monodromy_cell(&rep, u, &p).unwrap();
        let b = monodromy_cell(&rep, u.shifted(t), &p).unwrap();
        for (i, j, expo) in [(0, 1, p.s0 as f64), (1, 0, p.s1 as f64)] {
            let ratio = b.entries[i][j][(if i == 0 { 1 } else { 0 }, if i == 0 { 0 } else { 1 })]
                / a.entries[i][j][(if i == 0 { 1 } else { 0 }, if i == 0 { 0 } else { 1 })];
            assert!((ratio - p.qpow(expo * t)).norm() < 1e-13);
        }
    }

    #[test]
    fn exchange_relation_finite() {
        for p in [ModelParams::default(), ModelParams { s0: 0, s1: -2, ..ModelParams::default() }] {
            for m in 0..4 {
                let rep = rep_finite(m, &p);
                let res = exchange_residual(&rep, c(0.1), c(0.4), rep.dim, &p).unwrap();
                assert!(res < 1e-11, "m = {m}: {res}");
            }
        }
    }

    #[test]
    fn exchange_relation_symmetric_check_form() {
        let p = ModelParams::default();
        let rep = rep_finite(2, &p);
        let g = |u: f64| monodromy_cell(&rep, SpectralPoint::new(c(u)), &p).unwrap().grid();
        let (rc, _, _) = r_variants(&r_matrix(SpectralPoint::new(c(0.1 - 0.4)), &p, true).unwrap());
        let big = matrix::kron(&rc, &matrix::identity(3));
        let lhs = &big * boxtimes(&g(0.1), &g(0.4)).unwrap().to_block();
        let rhs = boxtimes(&g(0.4), &g(0.1)).unwrap().to_block() * &big;
        assert!(rel_residual(&lhs, &rhs) < 1e-11);
    }

    #[test]
    fn exchange_relation_verma_interior() {
        let p = ModelParams::default();
        let rep = rep_verma(c(0.7), 12, &p);
        let res = exchange_residual(&rep, C64::new(0.3, 0.2), c(-0.1), 10, &p).unwrap();
        assert!(res < 1e-11, "{res}");
    }

    #[test]
    fn l_cell_entries() {
        let p = ModelParams::default();
        let u = sp(0.2, 0.0);
        let plus = rep_fock(FockSign::Plus, 6, &p);
        let minus = rep_fock(FockSign::Minus, 6, &p);
        let l = l_cell(&plus, u, LWhich::L, &p).unwrap();
        let lb = l_cell(&minus, u, LWhich::LBar, &p).unwrap();
        for j in 0..6 {
            assert!((l.entries[0][0][(j, j)] - p.qpow(-(j as f64))).norm() < 1e-14);
            assert!((lb.entries[1][1][(j, j)] - p.qpow(j as f64 + 1.0)).norm() < 1e-14);
        }
        assert!(l_cell(&minus, u, LWhich::L, &p).is_err());
        assert!(l_cell(&plus, u, LWhich::LBar, &p).is_err());
        assert!(monodromy_cell(&plus, u, &p).is_err());
    }

    #[test]
    fn l_cell_scaling_exponents() {
        let p = ModelParams::default();
        let plus = rep_fock(FockSign::Plus, 5, &p);
        let (u, t) = (sp(-0.4, 0.0), 0.6);
        let a = l_cell(&plus, u, LWhich::L, &p).unwrap();
        let b = l_cell(&plus, u.shifted(t), LWhich::L, &p).unwrap();
        let r21 = b.entries[1][0][(0, 1)] / a.entries[1][0][(0, 1)];
        let r12 = b.entries[0][1][(1, 0)] / a.entries[0][1][(1, 0)];
        assert!((r21 - p.qpow(p.s1 as f64 * t)).norm() < 1e-13);
        assert!((r12 - p.qpow((p.sf() - p.s1 as f64) * t)).norm() < 1e-13);
        assert_eq!(max_abs(&(&a.entries[0][0] - &b.entries[0][0])), 0.0);
    }

    fn random_grid(seed: u64, d: usize) -> OpGrid {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let entries = (0..4).map(|_| CMat::from_fn(d, d, |_, _| C64::new(next(), next()))).collect();
        OpGrid { size: 2, entries }
    }

    #[test]
    fn boxtimes_properties() {
        let id = OpGrid::identity(2, 3);
        let prod = boxtimes(&id, &id).unwrap();
        assert!(max_abs(&(prod.to_block() - matrix::identity(12))) == 0.0);

        let a = CMat::from_fn(2, 2, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let b = CMat::from_fn(2, 2, |i, j| C64::new(j as f64 - 2.0, i as f64 * 0.5));
        let sc = boxtimes(&OpGrid::from_scalars(&a), &OpGrid::from_scalars(&b)).unwrap();
        assert!(max_abs(&(sc.to_block() - matrix::kron(&a, &b))) < 1e-15);

        let (k, l, m) = (random_grid(1, 5), random_grid(2, 5), random_grid(3, 5));
        let left = boxtimes(&boxtimes(&k, &l).unwrap(), &m).unwrap().to_block();
        let right = boxtimes(&k, &boxtimes(&l, &m).unwrap()).unwrap().to_block();
        assert!(max_abs(&(left - right)) < 1e-13);
    }

    #[test]
    fn chain_trace_identity_cells() {
        let p = ModelParams::default();
        let d = 4;
        let id = OperatorCell {
            entries: [[matrix::identity(d), matrix::zeros(d)], [matrix::zeros(d), matrix::identity(d)]],
            kind: RepKind::FockPlus(d),
            u: sp(0.0, 0.0),
        };
        let t = chain_trace(&[id.clone(), id.clone(), id], &matrix::identity(d)).unwrap();
        assert!(max_abs(&(t - matrix::identity(8) * c(d as f64))) == 0.0);
        let _ = p;
    }

    #[test]
    fn chain_trace_matches_boxdot_construction() {
        // two-site chain built from the R-matrix by the ⊡ product and a trace with F
        let p = ModelParams::default();
        let (u, v) = (C64::new(0.21, 0.04), [c(0.0), c(0.3)]);
        let rep = rep_finite(1, &p);
        let cells: Vec<OperatorCell> = v
            .iter()
            .map(|vi| monodromy_cell(&rep, SpectralPoint::new(u - vi), &p).unwrap())
            .collect();
        let traced = chain_trace(&cells, &rep.twist(&p)).unwrap();

        let bold = |x: C64| {
            let r = r_matrix(SpectralPoint::new(x), &p, true).unwrap();
            let entries = (0..4)
                .map(|k| {
                    let (a, b) = (k / 2, k % 2);
                    CMat::from_fn(2, 2, |i, j| r[(2 * a + i, 2 * b + j)])
                })
                .collect();
            OpGrid { size: 2, entries }
        };
        let m = boxdot(&bold(u - v[0]), &bold(u - v[1])).unwrap();
        let f = twist_matrix(&p);
        let t = m.get(0, 0) * f[(0, 0)] + m.get(1, 1) * f[(1, 1)];
        let scale: C64 = v.iter().map(|vi| p.qpow(-0.5) * SpectralPoint::new(u - vi).pow(p.sf() / 2.0, &p)).product();
        assert!(max_abs(&(traced - t * scale)) < 1e-13);
    }

    #[test]
    fn chain_trace_rejects_mismatch() {
        let p = ModelParams::default();
        let a = monodromy_cell(&rep_finite(1, &p), sp(0.1, 0.0), &p).unwrap();
        let b = monodromy_cell(&rep_finite(2, &p), sp(0.1, 0.0), &p).unwrap();
        assert!(chain_trace(&[a.clone(), b], &matrix::identity(2)).is_err());
        assert!(chain_trace(&[a], &matrix::identity(3)).is_err());
    }

    #[test]
    fn cells_depend_on_differences_only() {
        let p = ModelParams::default();
        let rep = rep_finite(2, &p);
        let shift = C64::new(0.37, -0.2);
        let base: Vec<C64> = vec![c(0.0), c(0.2)];
        let u = C64::new(0.15, 0.0);
        let build = |u: C64, v: &[C64]| {
            let cells: Vec<OperatorCell> = v
                .iter()
                .map(|vi| monodromy_cell(&rep, SpectralPoint::new(u - vi), &p).unwrap())
                .collect();
            chain_trace(&cells, &rep.twist(&p)).unwrap()
        };
        let shifted: Vec<C64> = base.iter().map(|x| x + shift).collect();
        assert!(rel_residual(&build(u, &base), &build(u + shift, &shifted)) < 1e-13);
    }
}
