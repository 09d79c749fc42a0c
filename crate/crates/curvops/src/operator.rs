//! Algebraic curvature operators: Bianchi projection, Ricci contraction,
//! Hamilton's `#` product and the reaction term Q(R) = R² + R#R.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{wedge_sym, BivectorBasis, StructureConstants};
use crate::error::Error;
use crate::mat::{orthonormalize_columns, sym_eigen, Mat};
use crate::rng::Rng;
use crate::scalar;

/// A symmetric operator on Λ²ℝⁿ satisfying the first Bianchi identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureOperator {
    basis: BivectorBasis,
    mat: Mat,
}

/// Ricci contraction of a curvature operator.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciData {
    pub ric: Mat,
    pub scal: f64,
    pub ric_norm_sq: f64,
}

/// The associated 4-index tensor R_ijkl = ⟨R(e_i∧e_j), e_k∧e_l⟩.
#[derive(Debug, Clone)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.n + j) * self.n + k) * self.n + l] = v;
    }

    /// Full contraction T(u, v, w, z).
    #[allow(clippy::needless_range_loop)]
    pub fn apply(&self, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if v[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        acc += self.get(i, j, k, l) * u[i] * v[j] * w[k] * z[l];
                    }
                }
            }
        }
        acc
    }
}

impl CurvatureOperator {
    /// Wrap a symmetric N×N matrix that is already known to satisfy the
    /// Bianchi identity (checked in debug builds only).
    pub fn from_mat_unchecked(basis: BivectorBasis, mut mat: Mat) -> Self {
        assert_eq!(mat.rows(), basis.dim());
        assert_eq!(mat.cols(), basis.dim());
        mat.symmetrize();
        CurvatureOperator { basis, mat }
    }

    pub fn identity(n: usize) -> Result<Self, Error> {
        let basis = BivectorBasis::new(n)?;
        let mat = Mat::identity(basis.dim());
        Ok(CurvatureOperator { basis, mat })
    }

    pub fn zero(n: usize) -> Result<Self, Error> {
        let basis = BivectorBasis::new(n)?;
        let mat = Mat::zeros(basis.dim(), basis.dim());
        Ok(CurvatureOperator { basis, mat })
    }

    pub fn basis(&self) -> &BivectorBasis {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn into_mat(self) -> Mat {
        self.mat
    }

    pub fn norm(&self) -> f64 {
        self.mat.frob_norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        CurvatureOperator {
            basis: self.basis.clone(),
            mat: self.mat.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_same_basis(other)?;
        Ok(CurvatureOperator {
            basis: self.basis.clone(),
            mat: self.mat.add(&other.mat),
        })
    }

    /// R + s·Id.
    pub fn shifted(&self, s: f64) -> Self {
        let mut mat = self.mat.clone();
        mat.shift_diag(s);
        CurvatureOperator {
            basis: self.basis.clone(),
            mat,
        }
    }

    fn check_same_basis(&self, other: &Self) -> Result<(), Error> {
        if self.n() != other.n() {
            return Err(Error::BasisMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }

    /// Relative residual of the first Bianchi identity.
    pub fn bianchi_residual(&self) -> f64 {
        let t = to_tensor(self);
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let cyc = t.get(i, j, k, l) + t.get(i, k, l, j) + t.get(i, l, j, k);
                        worst = worst.max(scalar::abs(cyc));
                    }
                }
            }
        }
        worst / self.norm().max(f64::MIN_POSITIVE)
    }
}

/// Expand the operator matrix into the full antisymmetrized 4-tensor.
pub fn to_tensor(r: &CurvatureOperator) -> Tensor4 {
    let n = r.n();
    let basis = r.basis();
    let mut t = Tensor4::zeros(n);
    for alpha in 0..basis.dim() {
        let (i, j) = basis.pair_of(alpha);
        for beta in 0..basis.dim() {
            let (k, l) = basis.pair_of(beta);
            let v = r.mat()[(alpha, beta)];
            t.set(i, j, k, l, v);
            t.set(j, i, k, l, -v);
            t.set(i, j, l, k, -v);
            t.set(j, i, l, k, v);
        }
    }
    t
}

/// Encode a pair-symmetric, pair-antisymmetric 4-tensor back as a matrix.
fn tensor_to_mat(t: &Tensor4, basis: &BivectorBasis) -> Mat {
    let dim = basis.dim();
    let mut m = Mat::zeros(dim, dim);
    for alpha in 0..dim {
        let (i, j) = basis.pair_of(alpha);
        for beta in 0..dim {
            let (k, l) = basis.pair_of(beta);
            m[(alpha, beta)] = t.get(i, j, k, l);
        }
    }
    m.symmetrize();
    m
}

/// Orthogonal projection of a symmetric operator onto the Bianchi subspace.
///
/// Subtracts the alternating part b(T)_ijkl = (T_ijkl + T_iklj + T_iljk)/3,
/// which is the Λ⁴ component of S²Λ².
pub fn bianchi_project(s: &Mat, basis: &BivectorBasis) -> Result<CurvatureOperator, Error> {
    let dim = basis.dim();
    if s.rows() != dim || s.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    let mut sym = s.clone();
    sym.symmetrize();
    let tmp = CurvatureOperator {
        basis: basis.clone(),
        mat: sym,
    };
    let t = to_tensor(&tmp);
    let n = basis.n();
    let mut proj = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let b =
                        (t.get(i, j, k, l) + t.get(i, k, l, j) + t.get(i, l, j, k)) / 3.0;
                    proj.set(i, j, k, l, t.get(i, j, k, l) - b);
                }
            }
        }
    }
    Ok(CurvatureOperator {
        basis: basis.clone(),
        mat: tensor_to_mat(&proj, basis),
    })
}

/// Ricci contraction ric_ik = Σ_j R_ijkj, with scal = tr(ric).
///
/// Works directly on matrix entries; the tensor route serves as the test
/// oracle.
pub fn ricci(r: &CurvatureOperator) -> RicciData {
    let n = r.n();
    let basis = r.basis();
    let mut ric = Mat::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let mut acc = 0.0;
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                // sign of e_i∧e_j relative to the ordered basis pair
                let si = if i < j { 1.0 } else { -1.0 };
                let sk = if k < j { 1.0 } else { -1.0 };
                acc += si * sk * r.mat()[(basis.index_of(i, j), basis.index_of(k, j))];
            }
            if i == k {
                // R_ijij over j≠i needs no sign handling
                ric[(i, i)] = acc;
            } else {
                ric[(i, k)] = acc;
                ric[(k, i)] = acc;
            }
        }
    }
    let scal = ric.trace();
    let ric_norm_sq = ric.frob_dot(&ric);
    RicciData {
        ric,
        scal,
        ric_norm_sq,
    }
}

/// Scalar curvature alone: scal = 2 tr(R).
pub fn scalar_curvature(r: &CurvatureOperator) -> f64 {
    2.0 * r.mat().trace()
}

/// Hamilton's bilinear `#` product,
/// (R#L)_αβ = ½ Σ c_αγε c_βδζ R_γδ L_εζ.
pub fn sharp(
    r: &CurvatureOperator,
    l: &CurvatureOperator,
    sc: &StructureConstants,
) -> Result<Mat, Error> {
    r.check_same_basis(l)?;
    if sc.n() != r.n() {
        return Err(Error::BasisMismatch {
            left: sc.n(),
            right: r.n(),
        });
    }
    let dim = sc.dim();
    let mut out = Mat::zeros(dim, dim);
    for alpha in 0..dim {
        for beta in alpha..dim {
            let mut acc = 0.0;
            for &(gamma, eps, ca) in sc.brackets_of(alpha) {
                for &(delta, zeta, cb) in sc.brackets_of(beta) {
                    acc += ca * cb * r.mat()[(gamma, delta)] * l.mat()[(eps, zeta)];
                }
            }
            out[(alpha, beta)] = 0.5 * acc;
            out[(beta, alpha)] = 0.5 * acc;
        }
    }
    Ok(out)
}

/// Reaction term of the curvature ODE: Q(R) = R² + R#R.
pub fn q(r: &CurvatureOperator, sc: &StructureConstants) -> Result<CurvatureOperator, Error> {
    let mut mat = r.mat().mul(r.mat());
    mat.symmetrize();
    let sharp_part = sharp(r, r, sc)?;
    mat.axpy(1.0, &sharp_part);
    Ok(CurvatureOperator {
        basis: r.basis.clone(),
        mat,
    })
}

/// ric∧id of a curvature operator (composition of `ricci` and `wedge_sym`).
pub fn ric_wedge_id(r: &CurvatureOperator) -> CurvatureOperator {
    let data = ricci(r);
    let id = Mat::identity(r.n());
    let mat = wedge_sym(&data.ric, &id, r.basis()).expect("dimensions agree by construction");
    CurvatureOperator {
        basis: r.basis.clone(),
        mat,
    }
}

/// How `random_operator` builds its draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomMode {
    /// Bianchi projection of a symmetric Gaussian matrix.
    GaussianBianchi,
    /// Gram square AAᵀ, Bianchi-projected, then shifted back to PSD.
    Psd,
}

/// Seed-deterministic random curvature operators.
pub fn random_operator(n: usize, mode: RandomMode, rng: &mut Rng) -> Result<CurvatureOperator, Error> {
    let basis = BivectorBasis::new(n)?;
    let dim = basis.dim();
    match mode {
        RandomMode::GaussianBianchi => {
            let mut s = Mat::from_fn(dim, dim, |_, _| rng.normal());
            s.symmetrize();
            bianchi_project(&s, &basis)
        }
        RandomMode::Psd => {
            let a = Mat::from_fn(dim, dim, |_, _| rng.normal());
            let gram = a.mul(&a.transpose()).scale(1.0 / dim as f64);
            let projected = bianchi_project(&gram, &basis)?;
            // projection can push the bottom eigenvalue below zero
            let eig = sym_eigen(projected.mat());
            let lift = (-eig.values[0]).max(0.0);
            Ok(projected.shifted(lift))
        }
    }
}

/// Random rotation matrix (orthonormalized Gaussian frame).
pub fn random_rotation(n: usize, rng: &mut Rng) -> Mat {
    let mut g = Mat::from_fn(n, n, |_, _| rng.normal());
    orthonormalize_columns(&mut g, rng);
    g
}

/// Induced action of g ∈ O(n) on Λ²ℝⁿ.
pub fn lambda2_action(g: &Mat, basis: &BivectorBasis) -> Mat {
    let dim = basis.dim();
    let mut out = Mat::zeros(dim, dim);
    for alpha in 0..dim {
        let (k, l) = basis.pair_of(alpha);
        for beta in 0..dim {
            let (i, j) = basis.pair_of(beta);
            out[(alpha, beta)] = g[(k, i)] * g[(l, j)] - g[(l, i)] * g[(k, j)];
        }
    }
    out
}

/// Conjugate R by a rotation: (g·R) = G R Gᵀ with G the Λ² action of g.
pub fn conjugate_by_rotation(r: &CurvatureOperator, g: &Mat) -> CurvatureOperator {
    let action = lambda2_action(g, r.basis());
    let mut mat = action.mul(r.mat()).mul(&action.transpose());
    mat.symmetrize();
    CurvatureOperator {
        basis: r.basis.clone(),
        mat,
    }
}
