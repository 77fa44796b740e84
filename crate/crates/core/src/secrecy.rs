//! Coset coding over GF(p^l) for secrecy against z_r eavesdropped symbols.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::Gf;
use crate::matrix::Matrix;
use crate::subspace::combinations;

/// Largest symbol space `Q^L` that [`CosetCode::leakage`] enumerates.
pub const LEAKAGE_BUDGET: u64 = 1 << 24;

/// Secret `m = H s` with `H` a Vandermonde parity check of an MDS code of
/// length `L` and dimension `z_r`.
#[derive(Debug, Clone)]
pub struct CosetCode {
    base: Gf,
    symbols: Gf,
    len: usize,
    z_r: usize,
    h: Matrix,
    // H = [A | B], A square on the first L - z_r columns
    a_inv: Matrix,
    b: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leakage {
    /// H(m) in units of log Q.
    pub h_m: f64,
    /// H(m | Z) in units of log Q.
    pub h_m_given_z: f64,
    /// m and Z are exactly independent (decided on integer counts).
    pub perfect: bool,
}

impl CosetCode {
    /// Code over GF(p^ell) with evaluation points `0, 1, .., L-1`.
    pub fn new(p: u32, ell: u32, len: usize, z_r: usize) -> Result<Self> {
        let base = Gf::prime(p)?;
        let symbols = Gf::new(p, ell)?;
        if z_r >= len {
            return Err(Error::usage(format!("z_r = {z_r} must be below L = {len}")));
        }
        if (symbols.q() as usize) < len {
            return Err(Error::budget(format!(
                "{symbols} has fewer than L = {len} evaluation points"
            )));
        }
        let k = len - z_r;
        let mut h = Matrix::zeros(&symbols, k, len);
        for j in 0..len {
            for i in 0..k {
                h.set(i, j, symbols.pow(j as u32, i as u64));
            }
        }
        let left: Vec<usize> = (0..k).collect();
        let right: Vec<usize> = (k..len).collect();
        let a_inv = h.select_cols(&left).inverse()?;
        let b = h.select_cols(&right);
        Ok(Self {
            base,
            symbols,
            len,
            z_r,
            h,
            a_inv,
            b,
        })
    }

    pub fn symbol_field(&self) -> &Gf {
        &self.symbols
    }

    pub fn base_field(&self) -> &Gf {
        &self.base
    }

    /// Code length L.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn z_r(&self) -> usize {
        self.z_r
    }

    /// Secret length L - z_r.
    pub fn secret_len(&self) -> usize {
        self.len - self.z_r
    }

    /// Extension degree l.
    pub fn ell(&self) -> usize {
        self.symbols.e() as usize
    }

    pub fn parity_check(&self) -> &Matrix {
        &self.h
    }

    fn column(&self, v: &[u32]) -> Result<Matrix> {
        let data = v.to_vec();
        Matrix::from_vec(&self.symbols, v.len(), 1, data)
    }

    fn check_symbols(&self, v: &[u32], want: usize, what: &str) -> Result<()> {
        if v.len() != want {
            return Err(Error::usage(format!(
                "{what} has {} symbols, expected {want}",
                v.len()
            )));
        }
        if v.iter().any(|&a| a >= self.symbols.q()) {
            return Err(Error::usage(format!(
                "{what} has a symbol outside {}",
                self.symbols
            )));
        }
        Ok(())
    }

    /// Uniform `s` with `H s = m`.
    pub fn secret_encode<R: Rng + ?Sized>(&self, m: &[u32], rng: &mut R) -> Result<Vec<u32>> {
        self.check_symbols(m, self.secret_len(), "secret")?;
        let f = &self.symbols;
        let tail: Vec<u32> = (0..self.z_r).map(|_| f.sample(rng)).collect();
        self.complete(m, &tail)
    }

    /// The coset element whose last z_r symbols are `tail`.
    fn complete(&self, m: &[u32], tail: &[u32]) -> Result<Vec<u32>> {
        let f = &self.symbols;
        let bt = self.b.mat_mul(&self.column(tail)?)?;
        let rhs: Vec<u32> = m
            .iter()
            .enumerate()
            .map(|(i, &a)| f.sub(a, bt.get(i, 0)))
            .collect();
        let head = self.a_inv.mat_mul(&self.column(&rhs)?)?;
        let mut s: Vec<u32> = head.data().to_vec();
        s.extend_from_slice(tail);
        Ok(s)
    }

    pub fn secret_decode(&self, s: &[u32]) -> Result<Vec<u32>> {
        self.check_symbols(s, self.len, "coset word")?;
        Ok(self.h.mat_mul(&self.column(s)?)?.data().to_vec())
    }

    /// `L x l` base-field matrix, row i holding the digits of symbol i.
    pub fn flatten(&self, s: &[u32]) -> Result<Matrix> {
        self.check_symbols(s, self.len, "coset word")?;
        let data = s.iter().flat_map(|&a| self.symbols.digits(a)).collect();
        Matrix::from_vec(&self.base, self.len, self.ell(), data)
    }

    pub fn unflatten(&self, m: &Matrix) -> Result<Vec<u32>> {
        if m.rows() != self.len || m.cols() != self.ell() || m.field() != &self.base {
            return Err(Error::usage(format!(
                "expected a {}x{} matrix over {}, got {}x{} over {}",
                self.len,
                self.ell(),
                self.base,
                m.rows(),
                m.cols(),
                m.field()
            )));
        }
        Ok(m.row_iter().map(|r| self.symbols.from_digits(r)).collect())
    }

    /// Coset word as an integer, symbol 0 least significant.
    pub fn word_index(&self, s: &[u32]) -> Result<u64> {
        self.check_symbols(s, self.len, "coset word")?;
        let q = self.symbols.q() as u64;
        Ok(s.iter().rev().fold(0, |acc, &a| acc * q + a as u64))
    }

    pub fn word_from_index(&self, mut idx: u64) -> Vec<u32> {
        let q = self.symbols.q() as u64;
        (0..self.len)
            .map(|_| {
                let a = (idx % q) as u32;
                idx /= q;
                a
            })
            .collect()
    }

    /// `Q^L` as a u64, if it fits.
    pub fn word_count(&self) -> Option<u64> {
        (self.symbols.q() as u64).checked_pow(self.len as u32)
    }

    /// Leakage when the adversary sees the coordinates in `observed`.
    pub fn leakage(&self, observed: &[usize]) -> Result<Leakage> {
        if let Some(&bad) = observed.iter().find(|&&i| i >= self.len) {
            return Err(Error::usage(format!(
                "coordinate {bad} outside L = {}",
                self.len
            )));
        }
        let mut t = Matrix::zeros(&self.symbols, observed.len(), self.len);
        for (r, &c) in observed.iter().enumerate() {
            t.set(r, c, 1);
        }
        self.leakage_linear(&t)
    }

    /// Leakage when the adversary sees `T s` for a symbol-field matrix `T`.
    pub fn leakage_linear(&self, t: &Matrix) -> Result<Leakage> {
        if t.cols() != self.len || t.field() != &self.symbols {
            return Err(Error::usage(format!(
                "observation matrix must have {} columns over {}",
                self.len, self.symbols
            )));
        }
        let total = self
            .word_count()
            .filter(|&n| n <= LEAKAGE_BUDGET)
            .ok_or_else(|| {
                Error::budget(format!(
                    "{}^{} coset words exceed the enumeration budget {LEAKAGE_BUDGET}",
                    self.symbols.q(),
                    self.len
                ))
            })?;
        let f = &self.symbols;
        let q = f.q() as u64;
        let pack = |v: &[u32]| v.iter().rev().fold(0u64, |acc, &a| acc * q + a as u64);
        // Uniform m with s uniform in its coset is s uniform over F^L.
        let mut joint: HashMap<(u64, u64), u64> = HashMap::new();
        let mut m_marg: HashMap<u64, u64> = HashMap::new();
        let mut z_marg: HashMap<u64, u64> = HashMap::new();
        let mut z = vec![0u32; t.rows()];
        for idx in 0..total {
            let s = self.word_from_index(idx);
            let m = self.h.combine_cols(&s);
            for (i, zi) in z.iter_mut().enumerate() {
                *zi = t
                    .row(i)
                    .iter()
                    .zip(&s)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
            }
            let (km, kz) = (pack(&m), pack(&z));
            *joint.entry((km, kz)).or_default() += 1;
            *m_marg.entry(km).or_default() += 1;
            *z_marg.entry(kz).or_default() += 1;
        }
        let perfect = joint.len() == m_marg.len() * z_marg.len()
            && joint.iter().all(|(&(a, b), &n)| {
                n as u128 * total as u128 == m_marg[&a] as u128 * z_marg[&b] as u128
            });
        let ln_q = (q as f64).ln();
        let entropy = |counts: &mut dyn Iterator<Item = u64>| {
            counts
                .map(|n| {
                    let p = n as f64 / total as f64;
                    -p * p.ln()
                })
                .sum::<f64>()
                / ln_q
        };
        let h_m = entropy(&mut m_marg.values().copied());
        let h_joint = entropy(&mut joint.values().copied());
        let h_z = entropy(&mut z_marg.values().copied());
        Ok(Leakage {
            h_m,
            h_m_given_z: if perfect { h_m } else { h_joint - h_z },
            perfect,
        })
    }

    /// Perfect secrecy against every `k`-subset of coordinates.
    pub fn secure_against_all(&self, k: usize) -> Result<bool> {
        for obs in combinations(self.len, k) {
            if !self.leakage(&obs)?.perfect {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// No nonzero vector of rowspace(`transfer`) lies in rowspace(`h`).
pub fn check_transfer_condition(h: &Matrix, transfer: &Matrix) -> Result<bool> {
    if transfer.rows() == 0 {
        return Ok(true);
    }
    Ok(h.intersection_dim(transfer)? == 0)
}
