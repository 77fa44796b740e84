//! Random constant-dimension subspace codes and the brute-force
//! injection-distance decoder.

use std::collections::HashSet;
use std::path::Path;

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{FieldSpec, Gf};
use crate::matrix::Matrix;
use crate::subspace::{gaussian_coeff, injection_distance, sample_uniform_subspace, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// i.i.d. draws; repeated subspaces are kept and counted.
    #[default]
    Replacement,
    /// Redraw on collision.
    Distinct,
}

/// Outcome of unique-decoding within a radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeOutcome {
    Unique(usize),
    Ambiguous,
    NoneWithinRadius,
}

#[derive(Debug, Clone)]
pub struct Codebook {
    field: Gf,
    n: usize,
    c: usize,
    codewords: Vec<Subspace>,
    collisions: usize,
}

/// On-disk codebook: `{p, e, poly, n, C, codewords: [[row, ..], ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookFile {
    pub p: u32,
    pub e: u32,
    #[serde(default)]
    pub poly: Vec<u32>,
    pub n: usize,
    #[serde(rename = "C")]
    pub c: usize,
    pub codewords: Vec<Vec<Vec<u32>>>,
}

impl Codebook {
    pub fn from_codewords(
        field: &Gf,
        n: usize,
        c: usize,
        codewords: Vec<Subspace>,
    ) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::usage("a codebook needs at least one codeword"));
        }
        for (i, w) in codewords.iter().enumerate() {
            if w.field() != field || w.ambient() != n || w.dim() != c {
                return Err(Error::usage(format!(
                    "codeword {i} is a {}-dim subspace of F^{} over {}, expected {c}-dim in F^{n} over {field}",
                    w.dim(),
                    w.ambient(),
                    w.field()
                )));
            }
        }
        let mut seen = HashSet::new();
        let collisions = codewords.iter().filter(|w| !seen.insert(*w)).count();
        Ok(Self {
            field: field.clone(),
            n,
            c,
            codewords,
            collisions,
        })
    }

    /// Draws `m` codewords uniformly from G_q(n, c).
    pub fn build_random<R: Rng + ?Sized>(
        field: &Gf,
        n: usize,
        c: usize,
        m: usize,
        mode: SamplingMode,
        rng: &mut R,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::usage("a codebook needs at least one codeword"));
        }
        if c > n {
            return Err(Error::usage(format!(
                "codeword dimension {c} exceeds n = {n}"
            )));
        }
        let mut codewords = Vec::with_capacity(m);
        let mut seen = HashSet::with_capacity(m);
        let mut collisions = 0;
        match mode {
            SamplingMode::Replacement => {
                for _ in 0..m {
                    let w = sample_uniform_subspace(field, n, c, rng)?;
                    if !seen.insert(w.clone()) {
                        collisions += 1;
                    }
                    codewords.push(w);
                }
            }
            SamplingMode::Distinct => {
                let total = gaussian_coeff(n, c, field.q() as u64)?;
                if BigUint::from(m) > total {
                    return Err(Error::usage(format!(
                        "{m} distinct codewords requested but G_{}({n},{c}) has only {total}",
                        field.q()
                    )));
                }
                while codewords.len() < m {
                    let w = sample_uniform_subspace(field, n, c, rng)?;
                    if seen.insert(w.clone()) {
                        codewords.push(w);
                    }
                }
            }
        }
        Ok(Self {
            field: field.clone(),
            n,
            c,
            codewords,
            collisions,
        })
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.c
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn collisions(&self) -> usize {
        self.collisions
    }

    pub fn codewords(&self) -> &[Subspace] {
        &self.codewords
    }

    /// log_q(M) / n.
    pub fn rate(&self) -> f64 {
        (self.len() as f64).ln() / (self.field.q() as f64).ln() / self.n as f64
    }

    /// The RREF matrix transmitted for message `m`.
    pub fn encode(&self, m: usize) -> Result<&Matrix> {
        self.codewords
            .get(m)
            .map(Subspace::basis)
            .ok_or_else(|| Error::usage(format!("message {m} outside [0, {})", self.len())))
    }

    fn check_received(&self, y: &Subspace) -> Result<()> {
        if y.ambient() != self.n || y.field() != &self.field {
            return Err(Error::dim(format!(
                "received subspace lives in F^{} over {}, codebook in F^{} over {}",
                y.ambient(),
                y.field(),
                self.n,
                self.field
            )));
        }
        Ok(())
    }

    /// Returns the unique codeword within injection distance `radius` of `y`.
    /// Ties are never broken.
    pub fn decode(&self, y: &Subspace, radius: usize) -> Result<DecodeOutcome> {
        self.check_received(y)?;
        let mut found = None;
        for (i, w) in self.codewords.iter().enumerate() {
            if injection_distance(y, w)? <= radius {
                if found.is_some() {
                    return Ok(DecodeOutcome::Ambiguous);
                }
                found = Some(i);
            }
        }
        Ok(found.map_or(DecodeOutcome::NoneWithinRadius, DecodeOutcome::Unique))
    }

    /// All indices within `radius` of `y`, ascending.
    pub fn list_decode(&self, y: &Subspace, radius: usize) -> Result<Vec<usize>> {
        self.check_received(y)?;
        let mut out = Vec::new();
        for (i, w) in self.codewords.iter().enumerate() {
            if injection_distance(y, w)? <= radius {
                out.push(i);
            }
        }
        Ok(out)
    }

    pub fn to_file(&self) -> CodebookFile {
        let spec = self.field.spec();
        CodebookFile {
            p: spec.p,
            e: spec.e,
            poly: spec.poly,
            n: self.n,
            c: self.c,
            codewords: self.codewords.iter().map(|w| w.basis().to_rows()).collect(),
        }
    }

    pub fn from_file(file: &CodebookFile) -> Result<Self> {
        let field = FieldSpec {
            p: file.p,
            e: file.e,
            poly: file.poly.clone(),
        }
        .build()?;
        let codewords = file
            .codewords
            .iter()
            .map(|rows| {
                Ok(Subspace::from_matrix(&Matrix::from_rows(
                    &field, file.n, rows,
                )?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_codewords(&field, file.n, file.c, codewords)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("codebook serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: CodebookFile = serde_json::from_str(s).map_err(|source| Error::Json {
            context: "codebook".into(),
            source,
        })?;
        Self::from_file(&file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
