//! The genus mass of even unimodular lattices and the triangular solve
//! for the mass of each root system.

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::RepCounter;
use crate::roots::{enumerate_root_systems, Filters, RootSystem};
use crate::scalar::{bernoulli, format_rational, parse_rational};
use crate::siegel::{a_average, SiegelError};

pub const SOLVER_VERSION: &str = concat!("lattice-mass ", env!("CARGO_PKG_VERSION"));
const CHECKPOINT_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum MassError {
    #[error("dimension {0} is not a positive multiple of 8")]
    BadDimension(u32),
    #[error("max rank {max_rank} exceeds dimension {dim}")]
    BadMaxRank { max_rank: usize, dim: u32 },
    #[error("negative mass {mass} for root system {root_system}")]
    NegativeMass { root_system: String, mass: String },
    #[error(transparent)]
    Siegel(#[from] SiegelError),
    #[error("checkpoint {path}: {msg}")]
    Checkpoint { path: PathBuf, msg: String },
}

/// |B_{4k}|/(8k) · ∏_{j<4k} |B_{2j}|/(4j).
pub fn genus_mass(dim: u32) -> Result<BigRational, MassError> {
    if dim == 0 || dim % 8 != 0 {
        return Err(MassError::BadDimension(dim));
    }
    let k = (dim / 8) as usize;
    let mut m = bernoulli(4 * k).abs() / BigRational::from_integer(BigInt::from(8 * k));
    for j in 1..4 * k {
        m *= bernoulli(2 * j).abs() / BigRational::from_integer(BigInt::from(4 * j));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassEntry {
    pub root_system: RootSystem,
    /// a(R): the genus-average number of embeddings of the root lattice.
    pub coefficient: BigRational,
    /// None when the solve did not cover full rank.
    pub mass: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassTable {
    pub dim: u32,
    pub max_rank: usize,
    pub filters: Filters,
    pub total: BigRational,
    pub solver_version: String,
    pub entries: Vec<MassEntry>,
}

impl MassTable {
    pub fn is_complete(&self) -> bool {
        self.max_rank == self.dim as usize
    }

    pub fn mass_of(&self, r: &RootSystem) -> Option<&BigRational> {
        self.entries.iter().find(|e| &e.root_system == r).and_then(|e| e.mass.as_ref())
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&RootSystem, &BigRational)> {
        self.entries.iter().filter_map(|e| e.mass.as_ref().filter(|m| !m.is_zero()).map(|m| (&e.root_system, m)))
    }

    pub fn mass_sum(&self) -> BigRational {
        self.nonzero().fold(BigRational::zero(), |a, (_, m)| a + m)
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_rank: Option<usize>,
    pub filters: Filters,
    pub memo_capacity: usize,
    pub checkpoint: Option<PathBuf>,
    /// Persist after this many sweep steps (0 = only at the end).
    pub checkpoint_every: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_rank: None, filters: Filters::ALL, memo_capacity: 1 << 21, checkpoint: None, checkpoint_every: 0 }
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    schema: u32,
    solver: String,
    dim: u32,
    max_rank: usize,
    filters: Filters,
    systems: usize,
    /// Every index ≥ `done_from` has been solved.
    done_from: usize,
    masses: Vec<(String, String)>,
}

fn load_checkpoint(path: &Path, dim: u32, max_rank: usize, filters: Filters, systems: &[RootSystem]) -> Option<(usize, Vec<BigRational>)> {
    let text = fs::read_to_string(path).ok()?;
    let ck: Checkpoint = serde_json::from_str(&text).ok()?;
    if ck.schema != CHECKPOINT_SCHEMA
        || ck.dim != dim
        || ck.max_rank != max_rank
        || ck.filters != filters
        || ck.systems != systems.len()
        || ck.done_from > systems.len()
    {
        return None;
    }
    let mut masses = vec![BigRational::zero(); systems.len()];
    let index: std::collections::HashMap<&RootSystem, usize> = systems.iter().enumerate().map(|(i, r)| (r, i)).collect();
    for (r, m) in &ck.masses {
        let r: RootSystem = r.parse().ok()?;
        masses[*index.get(&r)?] = parse_rational(m)?;
    }
    Some((ck.done_from, masses))
}

fn save_checkpoint(path: &Path, table: &Checkpoint) -> Result<(), MassError> {
    let err = |e: &dyn std::fmt::Display| MassError::Checkpoint { path: path.to_owned(), msg: e.to_string() };
    let tmp = path.with_extension("tmp");
    let text = serde_json::to_string(table).map_err(|e| err(&e))?;
    fs::write(&tmp, text).map_err(|e| err(&e))?;
    fs::rename(&tmp, path).map_err(|e| err(&e))
}

/// a(R) for every system, in parallel.
pub fn coefficients(systems: &[RootSystem], dim: u32) -> Result<Vec<BigRational>, MassError> {
    systems.par_iter().map(|r| a_average(r, dim).map_err(MassError::from)).collect()
}

/// m(R_i) = (m·a(R_i) − Σ_{j>i} r(R_j, R_i) m(R_j)) / r(R_i, R_i), swept
/// from the top index down; U is never materialised and zero masses are
/// skipped before any embedding count is computed.
pub fn solve_masses(dim: u32, opts: &SolveOptions) -> Result<MassTable, MassError> {
    let total = genus_mass(dim)?;
    let max_rank = opts.max_rank.unwrap_or(dim as usize);
    if max_rank > dim as usize {
        return Err(MassError::BadMaxRank { max_rank, dim });
    }
    let systems = enumerate_root_systems(max_rank, dim, opts.filters);
    let n = systems.len();
    let coeffs = coefficients(&systems, dim)?;
    let complete = max_rank == dim as usize;
    let mut masses: Vec<BigRational> = vec![BigRational::zero(); n];
    if complete {
        let mut done_from = n;
        if let Some(path) = &opts.checkpoint {
            if let Some((d, m)) = load_checkpoint(path, dim, max_rank, opts.filters, &systems) {
                done_from = d;
                masses = m;
            }
        }
        let counter = RepCounter::with_capacity(opts.memo_capacity);
        let mut nonzero: Vec<usize> = (done_from..n).filter(|&j| !masses[j].is_zero()).collect();
        let mut since = 0;
        for i in (0..done_from).rev() {
            if !coeffs[i].is_zero() {
                let ri = &systems[i];
                let sub = nonzero
                    .par_iter()
                    .map(|&j| {
                        let r = counter.count(ri, &systems[j]);
                        if r.is_zero() {
                            BigRational::zero()
                        } else {
                            &masses[j] * BigRational::from_integer(BigInt::from(r))
                        }
                    })
                    .reduce(BigRational::zero, |a, b| a + b);
                let aut = BigRational::from_integer(BigInt::from(ri.aut_order()));
                let m = (&total * &coeffs[i] - sub) / aut;
                if m.is_negative() {
                    return Err(MassError::NegativeMass { root_system: ri.to_string(), mass: format_rational(&m) });
                }
                if !m.is_zero() {
                    masses[i] = m;
                    nonzero.insert(0, i);
                }
            }
            since += 1;
            if let Some(path) = &opts.checkpoint {
                if (opts.checkpoint_every > 0 && since >= opts.checkpoint_every) || i == 0 {
                    since = 0;
                    save_checkpoint(path, &checkpoint_of(dim, max_rank, opts.filters, &systems, &masses, i))?;
                }
            }
        }
    }
    let entries = systems
        .into_iter()
        .zip(coeffs)
        .zip(masses)
        .map(|((root_system, coefficient), m)| MassEntry { root_system, coefficient, mass: complete.then_some(m) })
        .collect();
    Ok(MassTable { dim, max_rank, filters: opts.filters, total, solver_version: SOLVER_VERSION.into(), entries })
}

fn checkpoint_of(dim: u32, max_rank: usize, filters: Filters, systems: &[RootSystem], masses: &[BigRational], done_from: usize) -> Checkpoint {
    Checkpoint {
        schema: CHECKPOINT_SCHEMA,
        solver: SOLVER_VERSION.into(),
        dim,
        max_rank,
        filters,
        systems: systems.len(),
        done_from,
        masses: systems
            .iter()
            .zip(masses)
            .skip(done_from)
            .filter(|(_, m)| !m.is_zero())
            .map(|(r, m)| (r.to_string(), format_rational(m)))
            .collect(),
    }
}

/// Checks Σ m(R) = genus mass and m(R) ≥ 0; returns one message per
/// violation.
pub fn verify_total(table: &MassTable) -> Vec<String> {
    let mut bad = Vec::new();
    if !table.is_complete() {
        bad.push(format!("table covers rank ≤ {} only, not {}", table.max_rank, table.dim));
        return bad;
    }
    for e in &table.entries {
        if let Some(m) = &e.mass {
            if m.is_negative() {
                bad.push(format!("negative mass for {}: {}", e.root_system, format_rational(m)));
            }
        }
    }
    let sum = table.mass_sum();
    if sum != table.total {
        bad.push(format!("mass sum {} differs from genus mass {}", format_rational(&sum), format_rational(&table.total)));
    }
    bad
}

/// m(R)·w(R), the column reported alongside each mass.
pub fn mass_times_weyl(r: &RootSystem, m: &BigRational) -> BigRational {
    m * BigRational::from_integer(BigInt::from(r.weyl_order()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::One;

    #[test]
    fn genus_masses() {
        assert_eq!(genus_mass(8).unwrap(), rat(1, 696729600));
        assert!(genus_mass(12).is_err());
        // E8⊕E8 and D16+: |Aut| = 2·w(E8)² and w(D16) = 2^15·16!
        let d16 = BigRational::new(BigInt::one(), BigInt::from(1u64 << 15) * BigInt::from(20922789888000u64));
        assert_eq!(genus_mass(16).unwrap(), rat(1, 696729600).pow(2) * rat(1, 2) + d16);
    }

    #[test]
    fn dim8_single_class() {
        let t = solve_masses(8, &SolveOptions::default()).unwrap();
        let nz: Vec<_> = t.nonzero().collect();
        assert_eq!(nz.len(), 1);
        assert_eq!(nz[0].0.to_string(), "E8");
        assert_eq!(nz[0].1, &rat(1, 696729600));
        assert!(verify_total(&t).is_empty());
    }

    #[test]
    fn partial_tables_carry_no_masses() {
        let t = solve_masses(32, &SolveOptions { max_rank: Some(0), ..Default::default() }).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.entries[0].coefficient, BigRational::one());
        assert!(t.entries[0].mass.is_none());
    }
}
