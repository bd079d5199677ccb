//! Sign-random-projection LSH for MIPS.
//!
//! Vectors are scaled into the unit ball by the largest norm `M` and given
//! one extra coordinate `sqrt(1 - |v|^2 / M^2)`, so every transformed vector
//! has unit norm and the angle to the normalized query `(q/|q|, 0)` orders
//! vectors by inner product. Each of the `b` tables keys a vector by the
//! signs of `a` projections (AND); a query's candidates are the union of its
//! `b` buckets (OR), reranked exactly.
//!
//! Projection `(table, bit)` depends only on the seed, so an index with
//! fewer bits or tables is a prefix of a larger one built with the same seed.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::exact::top_by_score;
use crate::error::{Error, Result};
use crate::exec::{mix_seed, Execution};
use crate::vectors::{dot, Query, VectorSet};

pub const MAX_BITS: usize = 64;

#[derive(Clone, Debug)]
pub struct LshIndex {
    bits: usize,
    tables: usize,
    /// Transformed dimension, `N + 1`.
    width: usize,
    /// `tables * bits` unit directions of length `width`, table-major.
    projections: Vec<f64>,
    /// Per vector, per table: the `bits`-bit key.
    signatures: Vec<u64>,
    buckets: Vec<HashMap<u64, Vec<usize>>>,
    transform_bound: f64,
    rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LshResult {
    pub ids: Vec<usize>,
    /// Size of the union of the query's buckets.
    pub candidates: usize,
    /// Set when fewer than K candidates were found and the result was
    /// filled with the smallest unseen ids.
    pub padded: bool,
    /// Scalar multiplications: hashing `b * a * (N + 1)` plus reranking
    /// `candidates * N`.
    pub ops: u64,
}

fn direction(seed: u64, table: usize, bit: usize, width: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(mix_seed(seed, table as u64), bit as u64));
    let mut d: Vec<f64> = (0..width)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        d.iter_mut().for_each(|x| *x /= norm);
    }
    d
}

/// `(v / M, sqrt(1 - |v|^2 / M^2))` for a vector `v` and bound `M`.
pub fn transform_vector(v: &[f32], bound: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(v.len() + 1);
    if bound > 0.0 {
        out.extend(v.iter().map(|&x| x as f64 / bound));
        let sq: f64 = out.iter().map(|x| x * x).sum();
        out.push((1.0 - sq).max(0.0).sqrt());
    } else {
        out.extend(std::iter::repeat_n(0.0, v.len()));
        out.push(1.0);
    }
    out
}

/// `(q / |q|, 0)`; a zero query stays zero.
pub fn transform_query(q: &[f32]) -> Vec<f64> {
    let norm = dot(q, q).sqrt();
    let mut out: Vec<f64> = q
        .iter()
        .map(|&x| if norm > 0.0 { x as f64 / norm } else { 0.0 })
        .collect();
    out.push(0.0);
    out
}

fn key(projections: &[f64], width: usize, x: &[f64]) -> u64 {
    projections
        .chunks_exact(width)
        .enumerate()
        .fold(0u64, |acc, (bit, p)| {
            let s: f64 = p.iter().zip(x).map(|(a, b)| a * b).sum();
            if s >= 0.0 {
                acc | (1 << bit)
            } else {
                acc
            }
        })
}

fn bucketize(signatures: &[u64], tables: usize, rows: usize) -> Vec<HashMap<u64, Vec<usize>>> {
    (0..tables)
        .map(|t| {
            let mut map: HashMap<u64, Vec<usize>> = HashMap::new();
            for i in 0..rows {
                map.entry(signatures[i * tables + t]).or_default().push(i);
            }
            map
        })
        .collect()
}

impl LshIndex {
    /// Builds `tables` hash tables of `bits` sign bits each.
    pub fn build(
        vectors: &VectorSet,
        bits: usize,
        tables: usize,
        seed: u64,
        execution: Execution,
    ) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::Config(format!(
                "bits per hash must lie in [1, {MAX_BITS}], got {bits}"
            )));
        }
        if tables == 0 {
            return Err(Error::Config("at least one table is required".into()));
        }
        let width = vectors.dim() + 1;
        let transform_bound = vectors
            .iter()
            .map(|v| dot(v, v))
            .fold(0.0f64, f64::max)
            .sqrt();
        let projections: Vec<f64> = execution
            .map_range(tables * bits, |p| {
                direction(seed, p / bits, p % bits, width)
            })
            .concat();
        let per_vector: Vec<Vec<u64>> = execution.map_range(vectors.rows(), |i| {
            let x = transform_vector(vectors.row(i), transform_bound);
            projections
                .chunks_exact(bits * width)
                .map(|table| key(table, width, &x))
                .collect()
        });
        let signatures = per_vector.concat();
        let buckets = bucketize(&signatures, tables, vectors.rows());
        Ok(LshIndex {
            bits,
            tables,
            width,
            projections,
            signatures,
            buckets,
            transform_bound,
            rows: vectors.rows(),
        })
    }

    /// The index with the first `bits` bits of the first `tables` tables;
    /// identical to building it from scratch with the same seed.
    pub fn restrict(&self, bits: usize, tables: usize) -> Result<Self> {
        if bits == 0 || bits > self.bits || tables == 0 || tables > self.tables {
            return Err(Error::Config(format!(
                "cannot restrict a {}x{} index to {bits}x{tables}",
                self.bits, self.tables
            )));
        }
        let mask = if bits == 64 {
            u64::MAX
        } else {
            (1u64 << bits) - 1
        };
        let mut projections = Vec::with_capacity(tables * bits * self.width);
        for t in 0..tables {
            let start = t * self.bits * self.width;
            projections.extend_from_slice(&self.projections[start..start + bits * self.width]);
        }
        let signatures: Vec<u64> = (0..self.rows)
            .flat_map(|i| (0..tables).map(move |t| (i, t)))
            .map(|(i, t)| self.signatures[i * self.tables + t] & mask)
            .collect();
        let buckets = bucketize(&signatures, tables, self.rows);
        Ok(LshIndex {
            bits,
            tables,
            width: self.width,
            projections,
            signatures,
            buckets,
            transform_bound: self.transform_bound,
            rows: self.rows,
        })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn tables(&self) -> usize {
        self.tables
    }

    pub fn transform_bound(&self) -> f64 {
        self.transform_bound
    }

    pub fn buckets(&self, table: usize) -> &HashMap<u64, Vec<usize>> {
        &self.buckets[table]
    }

    /// Keys of the transformed query, one per table.
    pub fn query_keys(&self, query: &Query) -> Vec<u64> {
        let x = transform_query(query.values());
        self.projections
            .chunks_exact(self.bits * self.width)
            .map(|table| key(table, self.width, &x))
            .collect()
    }

    /// Sorted ids sharing at least one bucket with the query.
    pub fn candidates(&self, query: &Query) -> Vec<usize> {
        let mut seen = vec![false; self.rows];
        for (t, k) in self.query_keys(query).into_iter().enumerate() {
            if let Some(ids) = self.buckets[t].get(&k) {
                ids.iter().for_each(|&i| seen[i] = true);
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn query(&self, vectors: &VectorSet, query: &Query, k: usize) -> Result<LshResult> {
        query.ensure_dim(vectors.dim())?;
        if vectors.rows() != self.rows || vectors.dim() + 1 != self.width {
            return Err(Error::Config(
                "index was built over a different vector set".into(),
            ));
        }
        if k > self.rows {
            return Err(Error::Precondition(format!(
                "K={k} exceeds the {} vectors",
                self.rows
            )));
        }
        let candidates = self.candidates(query);
        let scored: Vec<(f64, usize)> = candidates
            .iter()
            .map(|&i| (dot(vectors.row(i), query.values()), i))
            .collect();
        let (mut ids, _) = top_by_score(scored, k);
        let padded = ids.len() < k;
        if padded {
            let mut taken = vec![false; self.rows];
            candidates.iter().for_each(|&i| taken[i] = true);
            ids.extend((0..self.rows).filter(|&i| !taken[i]).take(k - ids.len()));
        }
        let ops = (self.tables * self.bits * self.width + candidates.len() * vectors.dim()) as u64;
        Ok(LshResult {
            ids,
            candidates: candidates.len(),
            padded,
            ops,
        })
    }
}

pub fn lsh_build(vectors: &VectorSet, bits: usize, tables: usize, seed: u64) -> Result<LshIndex> {
    LshIndex::build(vectors, bits, tables, seed, Execution::default())
}

pub fn lsh_query(
    index: &LshIndex,
    vectors: &VectorSet,
    query: &Query,
    k: usize,
) -> Result<LshResult> {
    index.query(vectors, query, k)
}
