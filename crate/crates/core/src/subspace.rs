//! Subspaces of F_q^n in canonical RREF form, the injection distance, and
//! Grassmannian combinatorics.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Gf;
use crate::matrix::Matrix;

/// Largest Grassmannian that [`grassmannian`] will materialize.
pub const ENUMERATION_BUDGET: u64 = 1 << 22;

/// A subspace identified with its RREF basis (zero rows dropped). Two values
/// are equal iff they describe the same subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Row space of `m`.
    pub fn from_matrix(m: &Matrix) -> Self {
        Self {
            basis: m.rref().basis,
        }
    }

    /// Wraps a matrix the caller guarantees is already in canonical RREF.
    pub(crate) fn from_rref_unchecked(basis: Matrix) -> Self {
        debug_assert_eq!(basis.rref().basis, basis);
        Self { basis }
    }

    pub fn zero(field: &Gf, n: usize) -> Self {
        Self {
            basis: Matrix::zeros(field, 0, n),
        }
    }

    pub fn full(field: &Gf, n: usize) -> Self {
        Self {
            basis: Matrix::identity(field, n),
        }
    }

    pub fn field(&self) -> &Gf {
        self.basis.field()
    }

    pub fn ambient(&self) -> usize {
        self.basis.cols()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient() != other.ambient() {
            return Err(Error::dim(format!(
                "subspaces of F^{} and F^{}",
                self.ambient(),
                other.ambient()
            )));
        }
        Ok(())
    }

    pub fn contains_vector(&self, v: &[u32]) -> bool {
        if v.len() != self.ambient() {
            return false;
        }
        // Reduce v against the RREF basis; it lies in the span iff the
        // residue vanishes.
        let f = self.field();
        let mut r = v.to_vec();
        for row in self.basis.row_iter() {
            let pivot = row
                .iter()
                .position(|&x| x != 0)
                .expect("rref rows are nonzero");
            let a = r[pivot];
            if a != 0 {
                let neg = f.neg(a);
                for (x, &b) in r.iter_mut().zip(row) {
                    *x = f.add(*x, f.mul(neg, b));
                }
            }
        }
        r.iter().all(|&x| x == 0)
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        other.ambient() == self.ambient() && other.basis.row_iter().all(|v| self.contains_vector(v))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        Ok(Subspace::from_matrix(&self.basis.stack_rows(&other.basis)?))
    }

    /// Intersection by the Zassenhaus construction: reduce `[[A, A], [B, 0]]`;
    /// rows whose left half vanishes span the intersection in their right half.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let n = self.ambient();
        let f = self.field();
        let top = self.basis.stack_cols(&self.basis)?;
        let bottom = other.basis.stack_cols(&Matrix::zeros(f, other.dim(), n))?;
        let r = top.stack_rows(&bottom)?.rref();
        let rows: Vec<usize> = r
            .pivots
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= n)
            .map(|(i, _)| i)
            .collect();
        let right: Vec<usize> = (n..2 * n).collect();
        Ok(Subspace::from_matrix(
            &r.basis.select_rows(&rows).select_cols(&right),
        ))
    }

    pub fn intersection_dim(&self, other: &Subspace) -> Result<usize> {
        self.check_ambient(other)?;
        let joint = self.basis.stack_rows(&other.basis)?.rank();
        Ok(self.dim() + other.dim() - joint)
    }
}

/// d(V, W) = max(dim V, dim W) - dim(V ∩ W).
pub fn injection_distance(v: &Subspace, w: &Subspace) -> Result<usize> {
    Ok(v.dim().max(w.dim()) - v.intersection_dim(w)?)
}

/// Number of `k`-dimensional subspaces of F_q^n, exactly.
pub fn gaussian_coeff(n: usize, k: usize, q: u64) -> Result<BigUint> {
    if k > n {
        return Err(Error::usage(format!("dimension {k} exceeds ambient {n}")));
    }
    if q < 2 {
        return Err(Error::usage("field size must be at least 2"));
    }
    let q = BigUint::from(q);
    let pow = |e: usize| q.pow(e as u32);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= pow(n) - pow(i);
        den *= pow(k) - pow(i);
    }
    debug_assert!((&num % &den).is_zero());
    Ok(num / den)
}

/// Checks q^{k(n-k)} <= [n, k]_q <= 4 q^{k(n-k)}.
pub fn gaussian_coeff_bounds_check(n: usize, k: usize, q: u64) -> bool {
    let Ok(g) = gaussian_coeff(n, k, q) else {
        return false;
    };
    let low = BigUint::from(q).pow((k * (n - k)) as u32);
    let high = &low * 4u32;
    low <= g && g <= high
}

/// `sum_{i=1}^{z_w} [C, i]_q [n, i]_q`, the decoding-region size expression.
pub fn decoding_region_bound(c: usize, n: usize, z_w: usize, q: u64) -> Result<BigUint> {
    if z_w < 1 {
        return Err(Error::usage("decoding radius must be at least 1"));
    }
    if c > n {
        return Err(Error::usage("codeword dimension exceeds ambient dimension"));
    }
    let mut total = BigUint::zero();
    for i in 1..=z_w {
        let a = if i <= c {
            gaussian_coeff(c, i, q)?
        } else {
            BigUint::zero()
        };
        let b = if i <= n {
            gaussian_coeff(n, i, q)?
        } else {
            BigUint::zero()
        };
        total += a * b;
    }
    Ok(total)
}

/// `16 z_w q^{C z_w - z_w^2} q^{n z_w - z_w^2}`, the closed-form bound on the
/// decoding region. Requires z_w <= C.
pub fn decoding_region_closed_bound(c: usize, n: usize, z_w: usize, q: u64) -> Result<BigUint> {
    if z_w > c || c > n {
        return Err(Error::usage("closed-form bound needs z_w <= C <= n"));
    }
    let exp = (c * z_w - z_w * z_w) + (n * z_w - z_w * z_w);
    Ok(BigUint::from(16 * z_w as u64) * BigUint::from(q).pow(exp as u32))
}

/// Uniform element of G_q(n, k): a uniform full-rank k x n matrix, reduced.
pub fn sample_uniform_subspace<R: Rng + ?Sized>(
    field: &Gf,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<Subspace> {
    if k > n {
        return Err(Error::usage(format!("dimension {k} exceeds ambient {n}")));
    }
    let m = Matrix::random_full_rank(field, k, n, rng)?;
    Ok(Subspace::from_matrix(&m))
}

/// Every `k`-dimensional subspace of F_q^n, ordered by pivot pattern
/// (lexicographic) and then by the free entries read as a base-q counter.
pub fn grassmannian(field: &Gf, n: usize, k: usize) -> Result<Vec<Subspace>> {
    let size = gaussian_coeff(n, k, field.q() as u64)?;
    if size > BigUint::from(ENUMERATION_BUDGET) {
        return Err(Error::budget(format!(
            "G_{}({n},{k}) has {size} elements, above the enumeration budget {ENUMERATION_BUDGET}",
            field.q()
        )));
    }
    let q = field.q() as u64;
    let mut out = Vec::new();
    for pivots in combinations(n, k) {
        let mut free = Vec::new();
        for (row, &p) in pivots.iter().enumerate() {
            for c in p + 1..n {
                if !pivots.contains(&c) {
                    free.push((row, c));
                }
            }
        }
        let count = q.pow(free.len() as u32);
        for mut idx in 0..count {
            let mut m = Matrix::zeros(field, k, n);
            for (row, &p) in pivots.iter().enumerate() {
                m.set(row, p, 1);
            }
            for &(row, c) in &free {
                m.set(row, c, (idx % q) as u32);
                idx /= q;
            }
            out.push(Subspace::from_rref_unchecked(m));
        }
    }
    Ok(out)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}
