//! Brute-force oracles over prime fields that share no code with the
//! library's elimination routines.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use myopic_core::gf::Gf;
use myopic_core::matrix::Matrix;
use myopic_core::network::Topology;
use myopic_core::subspace::Subspace;

/// A vector of F_p^n packed as base-p digits, coordinate 0 lowest.
pub type Vector = u32;

/// A subspace as the sorted set of all its vectors.
pub type SpanSet = BTreeSet<Vector>;

pub struct PrimeSpace {
    pub p: u32,
    pub n: usize,
}

impl PrimeSpace {
    pub fn new(p: u32, n: usize) -> Self {
        Self { p, n }
    }

    pub fn size(&self) -> u32 {
        self.p.pow(self.n as u32)
    }

    pub fn digits(&self, v: Vector) -> Vec<u32> {
        let mut v = v;
        (0..self.n)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    pub fn pack(&self, d: &[u32]) -> Vector {
        d.iter().rev().fold(0, |acc, &x| acc * self.p + x)
    }

    pub fn add_scaled(&self, a: Vector, b: Vector, s: u32) -> Vector {
        let da = self.digits(a);
        let db = self.digits(b);
        let out: Vec<u32> = da
            .iter()
            .zip(&db)
            .map(|(&x, &y)| (x + s * y) % self.p)
            .collect();
        self.pack(&out)
    }

    /// Smallest subspace containing `s` and `v`.
    pub fn extend(&self, s: &SpanSet, v: Vector) -> SpanSet {
        let mut out = s.clone();
        for &w in s {
            for a in 1..self.p {
                out.insert(self.add_scaled(w, v, a));
            }
        }
        out
    }

    /// Every subspace of F_p^n, found by closing {0} under single-vector extensions.
    pub fn all_subspaces(&self) -> Vec<SpanSet> {
        let zero: SpanSet = [0].into_iter().collect();
        let mut seen: HashSet<SpanSet> = HashSet::from([zero.clone()]);
        let mut frontier = vec![zero];
        while let Some(s) = frontier.pop() {
            // each superspace of dimension +1 is built once
            let mut covered = s.clone();
            for v in 0..self.size() {
                if !covered.contains(&v) {
                    let t = self.extend(&s, v);
                    covered.extend(t.iter().copied());
                    if seen.insert(t.clone()) {
                        frontier.push(t);
                    }
                }
            }
        }
        let mut all: Vec<SpanSet> = seen.into_iter().collect();
        all.sort();
        all
    }

    pub fn dim(&self, s: &SpanSet) -> usize {
        let mut k = 0;
        let mut size = 1usize;
        while size < s.len() {
            size *= self.p as usize;
            k += 1;
        }
        assert_eq!(size, s.len(), "not a subspace");
        k
    }

    /// Injection distance from set sizes alone.
    pub fn distance(&self, a: &SpanSet, b: &SpanSet) -> usize {
        let meet: SpanSet = a.intersection(b).copied().collect();
        self.dim(a).max(self.dim(b)) - self.dim(&meet)
    }

    /// The library's view of the same subspace.
    pub fn to_subspace(&self, field: &Gf, s: &SpanSet) -> Subspace {
        let rows: Vec<Vec<u32>> = s.iter().map(|&v| self.digits(v)).collect();
        Subspace::from_matrix(&Matrix::from_rows(field, self.n, &rows).unwrap())
    }

    fn lead(&self, v: Vector) -> Option<usize> {
        self.digits(v).iter().position(|&d| d != 0)
    }

    /// Reduced echelon basis read off the vector set: one row per leading
    /// position, normalized to 1 there and zero at the other leading positions.
    pub fn echelon_rows(&self, s: &SpanSet) -> Vec<Vec<u32>> {
        let pivots: BTreeSet<usize> = s.iter().filter_map(|&v| self.lead(v)).collect();
        pivots
            .iter()
            .map(|&piv| {
                let v = s
                    .iter()
                    .find(|&&v| {
                        let d = self.digits(v);
                        d[piv] == 1 && pivots.iter().all(|&q| q == piv || d[q] == 0)
                    })
                    .expect("a reduced row exists for every pivot");
                self.digits(*v)
            })
            .collect()
    }
}

/// Smallest number of edges whose deletion separates source from sink.
pub fn brute_min_cut(t: &Topology) -> usize {
    let m = t.num_edges();
    (0u64..1 << m)
        .filter(|mask| {
            let mut seen = vec![false; t.nodes()];
            seen[t.source()] = true;
            let mut changed = true;
            while changed {
                changed = false;
                for (i, &(u, v)) in t.edges().iter().enumerate() {
                    if mask & (1 << i) == 0 && seen[u] && !seen[v] {
                        seen[v] = true;
                        changed = true;
                    }
                }
            }
            !seen[t.sink()]
        })
        .map(u64::count_ones)
        .min()
        .unwrap() as usize
}
