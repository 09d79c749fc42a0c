//! The bivector space Λ²ℝⁿ: basis indexing, so(n) structure constants and
//! the wedge of symmetric endomorphisms.
//!
//! Basis bivectors e_i∧e_j (i < j) are ordered lexicographically and treated
//! as orthonormal. Bivector α = (i, j) is identified with the skew matrix
//! X_α = E_ij − E_ji; with the inner product ⟨X, Y⟩ = ½ tr(XᵀY) these are
//! orthonormal in so(n) and all structure constants are 0 or ±1.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::mat::Mat;

/// Index bookkeeping for Λ²ℝⁿ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivectorBasis {
    n: usize,
    pairs: Vec<(usize, usize)>,
    index: Vec<usize>, // n*n lookup, usize::MAX on the diagonal
}

impl BivectorBasis {
    pub fn new(n: usize) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::InvalidDimension { n });
        }
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        let mut index = vec![usize::MAX; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                index[i * n + j] = pairs.len();
                index[j * n + i] = pairs.len();
                pairs.push((i, j));
            }
        }
        Ok(BivectorBasis { n, pairs, index })
    }

    /// Ambient dimension n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Bivector dimension N = n(n−1)/2.
    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    /// The ambient index pair (i, j), i < j, of basis bivector `alpha`.
    pub fn pair_of(&self, alpha: usize) -> (usize, usize) {
        self.pairs[alpha]
    }

    /// Basis index of e_i∧e_j (order of i, j does not matter).
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        debug_assert_ne!(i, j);
        self.index[i * self.n + j]
    }

    /// Coordinates of u∧v in the bivector basis.
    pub fn wedge_coords(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.n);
        debug_assert_eq!(v.len(), self.n);
        self.pairs
            .iter()
            .map(|&(i, j)| u[i] * v[j] - u[j] * v[i])
            .collect()
    }

    /// The skew matrix with entries m_ij = ω_(ij) for a bivector ω.
    pub fn skew_from_coords(&self, omega: &[f64]) -> Mat {
        debug_assert_eq!(omega.len(), self.dim());
        let mut m = Mat::zeros(self.n, self.n);
        for (alpha, &(i, j)) in self.pairs.iter().enumerate() {
            m[(i, j)] = omega[alpha];
            m[(j, i)] = -omega[alpha];
        }
        m
    }
}

/// Structure constants `c[α][β][γ]` = ⟨[X_α, X_β], X_γ⟩ of so(n).
///
/// Stored dense (N ≤ 28 for n ≤ 8). `brackets` lists, per α, the nonzero
/// brackets [X_α, X_γ] = sign·X_ε as (γ, ε, sign); the `#` product walks this
/// list instead of the cube.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    n: usize,
    dim: usize,
    c: Vec<f64>,
    brackets: Vec<Vec<(usize, usize, f64)>>,
}

/// Bracket of basis skew matrices: [X_(i,j), X_(k,l)] for i<j, k<l.
///
/// Zero unless the pairs share exactly one ambient index, in which case the
/// result is ±X_(a,b) on the symmetric difference {a, b}.
fn basis_bracket(
    (i, j): (usize, usize),
    (k, l): (usize, usize),
) -> Option<((usize, usize), f64)> {
    // [E_ab − E_ba, E_cd − E_dc] expands to four rank-one products; with a
    // single shared index exactly one survives on each side.
    let shared: Vec<usize> = [i, j]
        .iter()
        .filter(|x| [k, l].contains(x))
        .copied()
        .collect();
    if shared.len() != 1 {
        return None;
    }
    let s = shared[0];
    let a = if i == s { j } else { i }; // the non-shared index of (i, j)
    let b = if k == s { l } else { k }; // the non-shared index of (k, l)

    // Expanding [E_ij − E_ji, E_kl − E_lk] leaves a single term
    // ±(E_ab − E_ba); the sign is −coeff_p·coeff_q, where coeff is the
    // coefficient of e_a in X_ij e_s (X_ij e_j = e_i, X_ij e_i = −e_j).
    let coeff_first = if s == j { 1.0 } else { -1.0 };
    let coeff_second = if s == l { 1.0 } else { -1.0 };
    let sign = -(coeff_first * coeff_second);
    if a < b {
        Some(((a, b), sign))
    } else {
        Some(((b, a), -sign))
    }
}

impl StructureConstants {
    pub fn new(basis: &BivectorBasis) -> Self {
        let dim = basis.dim();
        let mut c = vec![0.0; dim * dim * dim];
        let mut brackets = vec![Vec::new(); dim];
        for alpha in 0..dim {
            for beta in 0..dim {
                if let Some((pair, sign)) = basis_bracket(basis.pair_of(alpha), basis.pair_of(beta))
                {
                    let gamma = basis.index_of(pair.0, pair.1);
                    c[(alpha * dim + beta) * dim + gamma] = sign;
                    brackets[alpha].push((beta, gamma, sign));
                }
            }
        }
        StructureConstants {
            n: basis.n(),
            dim,
            c,
            brackets,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, alpha: usize, beta: usize, gamma: usize) -> f64 {
        self.c[(alpha * self.dim + beta) * self.dim + gamma]
    }

    pub(crate) fn brackets_of(&self, alpha: usize) -> &[(usize, usize, f64)] {
        &self.brackets[alpha]
    }
}

/// The wedge A∧B of two symmetric endomorphisms of ℝⁿ, as a symmetric
/// operator on Λ²ℝⁿ: (A∧B)(u∧v) = ½(Au∧Bv + Bu∧Av).
///
/// For A = diag(λ) and B = id the eigenvalues are (λ_i+λ_j)/2 on e_i∧e_j.
pub fn wedge_sym(a: &Mat, b: &Mat, basis: &BivectorBasis) -> Result<Mat, Error> {
    let n = basis.n();
    for m in [a, b] {
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                rows: m.rows(),
                cols: m.cols(),
            });
        }
    }
    let dim = basis.dim();
    let mut out = Mat::zeros(dim, dim);
    for alpha in 0..dim {
        let (i, j) = basis.pair_of(alpha);
        for beta in 0..dim {
            let (k, l) = basis.pair_of(beta);
            out[(alpha, beta)] = 0.5
                * (a[(i, k)] * b[(j, l)] + b[(i, k)] * a[(j, l)]
                    - a[(j, k)] * b[(i, l)]
                    - b[(j, k)] * a[(i, l)]);
        }
    }
    out.symmetrize();
    Ok(out)
}
