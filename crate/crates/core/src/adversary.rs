//! The (z_ro, z_wo, z_rw) adversary: regimes, capacities, compatible
//! codewords and jamming strategies.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::gf::Gf;
use crate::matrix::Matrix;
use crate::network::{Topology, TransferMatrices};
use crate::subspace::{combinations, gaussian_coeff, grassmannian, injection_distance, Subspace};

/// Largest Grassmannian walked by the compatible-probability enumerators.
pub const COMPAT_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdversaryPower {
    #[serde(default)]
    pub z_ro: usize,
    #[serde(default)]
    pub z_wo: usize,
    #[serde(default)]
    pub z_rw: usize,
}

impl AdversaryPower {
    pub fn new(z_ro: usize, z_wo: usize, z_rw: usize) -> Self {
        Self { z_ro, z_wo, z_rw }
    }

    pub fn z_r(&self) -> usize {
        self.z_ro + self.z_rw
    }

    pub fn z_w(&self) -> usize {
        self.z_wo + self.z_rw
    }

    pub fn z(&self) -> usize {
        self.z_ro + self.z_wo + self.z_rw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Weak,
    Strong,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Weak => "Weak",
            Regime::Strong => "Strong",
        })
    }
}

/// Weak iff `C > z_ro + 2 z_w`.
pub fn classify_regime(c: usize, p: &AdversaryPower) -> Regime {
    if c > p.z_ro + 2 * p.z_w() {
        Regime::Weak
    } else {
        Regime::Strong
    }
}

pub fn capacity(c: usize, p: &AdversaryPower) -> usize {
    match classify_regime(c, p) {
        Regime::Weak => c - p.z_w(),
        Regime::Strong => c.saturating_sub(2 * p.z_w()),
    }
}

pub fn secrecy_capacity(c: usize, p: &AdversaryPower) -> usize {
    match classify_regime(c, p) {
        Regime::Weak => c - p.z_w() - p.z_r(),
        Regime::Strong => 0,
    }
}

/// Which edges the adversary reads, overwrites, or both.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeAssignment {
    #[serde(default)]
    pub read_only: Vec<usize>,
    #[serde(default)]
    pub write_only: Vec<usize>,
    #[serde(default)]
    pub read_write: Vec<usize>,
}

impl EdgeAssignment {
    pub fn new(read_only: Vec<usize>, write_only: Vec<usize>, read_write: Vec<usize>) -> Self {
        Self {
            read_only,
            write_only,
            read_write,
        }
    }

    /// Read-only edges, then read-write edges. Rows of Z follow this order.
    pub fn read_edges(&self) -> Vec<usize> {
        self.read_only
            .iter()
            .chain(&self.read_write)
            .copied()
            .collect()
    }

    /// Write-only edges, then read-write edges. Jam rows follow this order.
    pub fn write_edges(&self) -> Vec<usize> {
        self.write_only
            .iter()
            .chain(&self.read_write)
            .copied()
            .collect()
    }

    pub fn power(&self) -> AdversaryPower {
        AdversaryPower::new(
            self.read_only.len(),
            self.write_only.len(),
            self.read_write.len(),
        )
    }

    /// Edges exist and the three lists are pairwise disjoint.
    pub fn check_edges(&self, topology: &Topology) -> Result<()> {
        let mut seen = vec![false; topology.num_edges()];
        for &e in self
            .read_only
            .iter()
            .chain(&self.write_only)
            .chain(&self.read_write)
        {
            if e >= topology.num_edges() {
                return Err(Error::usage(format!(
                    "assignment names edge {e}, topology has {}",
                    topology.num_edges()
                )));
            }
            if std::mem::replace(&mut seen[e], true) {
                return Err(Error::usage(format!("edge {e} assigned twice")));
            }
        }
        Ok(())
    }

    pub fn validate(&self, topology: &Topology, power: &AdversaryPower) -> Result<()> {
        if self.power() != *power {
            return Err(Error::usage(format!(
                "assignment sizes {:?} do not match power {:?}",
                self.power(),
                power
            )));
        }
        self.check_edges(topology)
    }
}

/// Every assignment of the given power on the topology's min-cut edges.
pub fn sweep_assignments(
    topology: &Topology,
    power: &AdversaryPower,
) -> Result<Vec<EdgeAssignment>> {
    let pool = topology.min_cut_edges();
    if power.z() > pool.len() {
        return Err(Error::usage(format!(
            "power {power:?} needs {} edges, only {} min-cut edges",
            power.z(),
            pool.len()
        )));
    }
    let mut out = Vec::new();
    for ro in combinations(pool.len(), power.z_ro) {
        let rest: Vec<usize> = (0..pool.len()).filter(|i| !ro.contains(i)).collect();
        for wo in combinations(rest.len(), power.z_wo) {
            let rest2: Vec<usize> = (0..rest.len())
                .filter(|i| !wo.contains(i))
                .map(|i| rest[i])
                .collect();
            for rw in combinations(rest2.len(), power.z_rw) {
                out.push(EdgeAssignment::new(
                    ro.iter().map(|&i| pool[i]).collect(),
                    wo.iter().map(|&i| pool[rest[i]]).collect(),
                    rw.iter().map(|&i| pool[rest2[i]]).collect(),
                ));
            }
        }
    }
    Ok(out)
}

/// Indices `m` with `T_AJ * encode(m) == Z`.
pub fn enumerate_compatible(cb: &Codebook, t_aj: &Matrix, z: &Matrix) -> Result<Vec<usize>> {
    if t_aj.cols() != cb.dim() || z.cols() != cb.n() || t_aj.rows() != z.rows() {
        return Err(Error::usage(format!(
            "T_AJ is {}x{} and Z is {}x{}, codebook has C={} n={}",
            t_aj.rows(),
            t_aj.cols(),
            z.rows(),
            z.cols(),
            cb.dim(),
            cb.n()
        )));
    }
    let mut out = Vec::new();
    for m in 0..cb.len() {
        if t_aj.mat_mul(cb.encode(m)?)? == *z {
            out.push(m);
        }
    }
    Ok(out)
}

/// Observation statistics of a fixed transform over G_q(n, C).
#[derive(Debug, Clone)]
pub struct CompatibleStats {
    /// |G_q(n, C)|.
    pub total: BigUint,
    /// Number of distinct observations `T * rref(X)`.
    pub observations: usize,
    /// `sum_Z P(Z)^2`: chance that an independent codeword matches the observation.
    pub p: BigRational,
    /// `sum_Z P(Z)^3`.
    pub sum_p3: BigRational,
    counts: HashMap<Matrix, u64>,
}

impl CompatibleStats {
    /// `P(T * rref(X) = z)` for uniform X.
    pub fn probability_of(&self, z: &Matrix) -> BigRational {
        let k = self.counts.get(z).copied().unwrap_or(0);
        BigRational::new(BigInt::from(k), BigInt::from(self.total.clone()))
    }

    /// Exact mean and variance of `#{m : T X_m = T X_0}` for `M` i.i.d.
    /// codewords and an independent `X_0`.
    pub fn count_moments(&self, m: u64) -> (BigRational, BigRational) {
        let mm = BigRational::from_integer(BigInt::from(m));
        let mean = &mm * &self.p;
        let var = &mm * (&self.p - &self.sum_p3) + &mm * &mm * (&self.sum_p3 - &self.p * &self.p);
        (mean, var)
    }
}

pub fn compatible_stats(field: &Gf, n: usize, c: usize, t: &Matrix) -> Result<CompatibleStats> {
    if t.cols() != c || c > n {
        return Err(Error::usage(format!(
            "transform is {}x{}, expected ?x{c} with C <= n = {n}",
            t.rows(),
            t.cols()
        )));
    }
    let total = gaussian_coeff(n, c, field.q() as u64)?;
    if total > BigUint::from(COMPAT_BUDGET) {
        return Err(Error::budget(format!(
            "G_{}({n},{c}) has {total} elements, enumeration budget is {COMPAT_BUDGET}",
            field.q()
        )));
    }
    let mut counts: HashMap<Matrix, u64> = HashMap::new();
    for w in grassmannian(field, n, c)? {
        *counts.entry(t.mat_mul(w.basis())?).or_default() += 1;
    }
    let big_total = BigInt::from(total.clone());
    let mut s2 = BigInt::zero();
    let mut s3 = BigInt::zero();
    for &k in counts.values() {
        let k = BigInt::from(k);
        s2 += &k * &k;
        s3 += &k * &k * &k;
    }
    Ok(CompatibleStats {
        observations: counts.len(),
        p: BigRational::new(s2, big_total.pow(2)),
        sum_p3: BigRational::new(s3, big_total.pow(3)),
        total,
        counts,
    })
}

/// `[I_{z_r} | 0]`.
pub fn leading_rows_transform(field: &Gf, z_r: usize, c: usize) -> Result<Matrix> {
    if z_r > c {
        return Err(Error::usage(format!("z_r = {z_r} exceeds C = {c}")));
    }
    let mut t = Matrix::zeros(field, z_r, c);
    for i in 0..z_r {
        t.set(i, i, 1);
    }
    Ok(t)
}

/// Probability that an independent uniform C-dim codeword reproduces the
/// observation `[I | 0] * rref(X)` of a uniform X, by enumeration.
pub fn compatible_probability(n: usize, c: usize, z_r: usize, q: u32) -> Result<BigRational> {
    if z_r == 0 {
        return Ok(BigRational::one());
    }
    let field = Gf::of_order(q)?;
    let t = leading_rows_transform(&field, z_r, c)?;
    Ok(compatible_stats(&field, n, c, &t)?.p)
}

/// As [`compatible_probability`] for one fixed observation `z`.
pub fn compatible_probability_given(n: usize, c: usize, z: &Matrix) -> Result<BigRational> {
    let t = leading_rows_transform(z.field(), z.rows(), c)?;
    Ok(compatible_stats(z.field(), n, c, &t)?.probability_of(z))
}

/// `([n, C-z_r]_q / [n, C]_q, [n-z_r, C-z_r]_q / [n, C]_q)`.
pub fn lemma_ratios(n: usize, c: usize, z_r: usize, q: u64) -> Result<(BigRational, BigRational)> {
    if z_r > c || c > n {
        return Err(Error::usage(format!(
            "need z_r <= C <= n, got {z_r}, {c}, {n}"
        )));
    }
    let den = BigInt::from(gaussian_coeff(n, c, q)?);
    let a = BigInt::from(gaussian_coeff(n, c - z_r, q)?);
    let b = BigInt::from(gaussian_coeff(n - z_r, c - z_r, q)?);
    Ok((BigRational::new(a, den.clone()), BigRational::new(b, den)))
}

/// What the adversary knows about the network code.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knowledge {
    /// Knows every local coefficient, hence T_AJ and the write-edge transfer rows.
    #[default]
    Full,
    /// Knows the graph but not the coefficients.
    TopologyOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackStrategy {
    #[serde(alias = "none")]
    NoAttack,
    RandomNoise,
    Symmetrization,
    #[serde(alias = "push")]
    PushTowardCompatible,
}

impl AttackStrategy {
    pub const ALL: [AttackStrategy; 4] = [
        AttackStrategy::NoAttack,
        AttackStrategy::RandomNoise,
        AttackStrategy::Symmetrization,
        AttackStrategy::PushTowardCompatible,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AttackStrategy::NoAttack => "no_attack",
            AttackStrategy::RandomNoise => "random_noise",
            AttackStrategy::Symmetrization => "symmetrization",
            AttackStrategy::PushTowardCompatible => "push_toward_compatible",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::config(format!("unknown strategy {s:?}")))
    }
}

/// Everything the jammer may condition on.
#[derive(Debug, Clone, Copy)]
pub struct AdversaryView<'a> {
    pub codebook: &'a Codebook,
    pub assignment: &'a EdgeAssignment,
    pub transfer: &'a TransferMatrices,
    /// Pre-attack observation `T_AJ * X`, rows in read-edge order.
    pub z: &'a Matrix,
    pub knowledge: Knowledge,
}

impl AdversaryView<'_> {
    /// Codewords consistent with the read-only part of the observation.
    pub fn read_only_compatible(&self) -> Result<Vec<usize>> {
        let k = self.assignment.read_only.len();
        let idx: Vec<usize> = (0..k).collect();
        let z_ro = self.z.select_rows(&idx);
        match self.knowledge {
            Knowledge::Full => {
                enumerate_compatible(self.codebook, &self.transfer.t_aj.select_rows(&idx), &z_ro)
            }
            Knowledge::TopologyOnly => {
                let seen = Subspace::from_matrix(&z_ro);
                Ok((0..self.codebook.len())
                    .filter(|&m| self.codebook.codewords()[m].contains(&seen))
                    .collect())
            }
        }
    }

    /// Packets codeword `x` would put on the write edges.
    fn write_content<R: Rng + ?Sized>(&self, x: &Matrix, rng: &mut R) -> Result<Matrix> {
        match self.knowledge {
            Knowledge::Full => self.transfer.t_write.mat_mul(x),
            Knowledge::TopologyOnly => {
                let mix = Matrix::random(
                    x.field(),
                    self.assignment.write_edges().len(),
                    x.rows(),
                    rng,
                );
                mix.mat_mul(x)
            }
        }
    }
}

/// Jam rows for the write edges, or `None` when the strategy leaves them alone.
pub fn jam<R: Rng + ?Sized>(
    strategy: AttackStrategy,
    view: &AdversaryView<'_>,
    rng: &mut R,
) -> Result<Option<Matrix>> {
    let cb = view.codebook;
    let writes = view.assignment.write_edges().len();
    match strategy {
        AttackStrategy::NoAttack => Ok(None),
        AttackStrategy::RandomNoise => Ok(Some(Matrix::random(cb.field(), writes, cb.n(), rng))),
        AttackStrategy::Symmetrization => {
            let compat = view.read_only_compatible()?;
            if compat.is_empty() {
                return Err(Error::Internal("observation matches no codeword".into()));
            }
            let pick = compat[rng.gen_range(0..compat.len())];
            view.write_content(cb.encode(pick)?, rng).map(Some)
        }
        AttackStrategy::PushTowardCompatible => {
            let compat = view.read_only_compatible()?;
            if compat.is_empty() {
                return Err(Error::Internal("observation matches no codeword".into()));
            }
            let words = cb.codewords();
            let mut best = (usize::MAX, compat[0]);
            for &a in &compat {
                let mut nearest = usize::MAX;
                for &b in &compat {
                    if a != b {
                        nearest = nearest.min(injection_distance(&words[a], &words[b])?);
                    }
                }
                if nearest < best.0 {
                    best = (nearest, a);
                }
            }
            view.write_content(cb.encode(best.1)?, rng).map(Some)
        }
    }
}

/// Dimensions of V(Y) split into the part seen on read edges, the jammed
/// part and the rest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceivedDecomposition {
    pub dim_ro: usize,
    pub dim_u: usize,
    pub dim_jam: usize,
}

pub fn decompose_received(
    x: &Subspace,
    y: &Subspace,
    z_span: &Subspace,
    jam_span: &Subspace,
) -> Result<ReceivedDecomposition> {
    let jam_part = y.intersection(jam_span)?;
    let ro_part = y.intersection(z_span)?.intersection(x)?;
    let covered = jam_part.sum(&ro_part)?.dim();
    Ok(ReceivedDecomposition {
        dim_ro: ro_part.dim(),
        dim_u: y.dim() - covered,
        dim_jam: jam_part.dim(),
    })
}
