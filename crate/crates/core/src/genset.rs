//! Sublattice closure by brute force, and random generating-set experiments.

use std::collections::HashSet;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::combinatorics::bell;
use crate::error::{Error, Result};
use crate::partition::{LatticeShape, PartitionSampler, PartitionTuple};
use crate::rng::ShiftRng;

pub const DEFAULT_LIMIT: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosureMode {
    /// Stop as soon as every atom vector is present.
    #[default]
    EarlyExit,
    /// Always run to the fixpoint.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureResult {
    /// `None` when the size limit was hit before a verdict.
    pub generating: Option<bool>,
    /// Size of the generated sublattice, if the fixpoint was reached.
    pub closure_size: Option<usize>,
    /// Distinct atom vectors (an atom on one coordinate, bottom elsewhere) seen.
    pub atoms_covered: usize,
    /// Worklist elements processed.
    pub steps: usize,
    pub limit_hit: bool,
}

/// Closes `generators` under meet and join.
///
/// In [`ClosureMode::EarlyExit`] the run stops with a positive verdict once
/// all `t·n(n-1)/2` atom vectors are present: every element of `Part(n)^t`
/// is a join of those.
pub fn closure(generators: &[PartitionTuple], limit: usize, mode: ClosureMode) -> Result<ClosureResult> {
    let shape = shared_shape(generators)?;
    let all_atoms = shape.t * shape.n * (shape.n - 1) / 2;
    let mut elems: Vec<PartitionTuple> = Vec::new();
    let mut seen: HashSet<PartitionTuple> = HashSet::new();
    let mut atoms = 0usize;
    let mut limit_hit = false;

    let mut add = |x: PartitionTuple, elems: &mut Vec<PartitionTuple>, atoms: &mut usize| {
        if seen.contains(&x) {
            return;
        }
        if x.as_unit_atom().is_some() {
            *atoms += 1;
        }
        seen.insert(x.clone());
        elems.push(x);
    };
    for g in generators {
        add(g.clone(), &mut elems, &mut atoms);
    }

    let mut i = 0;
    while i < elems.len() {
        if mode == ClosureMode::EarlyExit && atoms == all_atoms {
            return Ok(ClosureResult {
                generating: Some(true),
                closure_size: None,
                atoms_covered: atoms,
                steps: i,
                limit_hit: false,
            });
        }
        if elems.len() > limit {
            limit_hit = true;
            break;
        }
        for j in 0..i {
            let m = elems[i].meet_raw(&elems[j]);
            let jn = elems[i].join_raw(&elems[j]);
            add(m, &mut elems, &mut atoms);
            add(jn, &mut elems, &mut atoms);
        }
        i += 1;
    }

    if limit_hit {
        return Ok(ClosureResult {
            generating: None,
            closure_size: None,
            atoms_covered: atoms,
            steps: i,
            limit_hit,
        });
    }
    Ok(ClosureResult {
        generating: Some(atoms == all_atoms),
        closure_size: Some(elems.len()),
        atoms_covered: atoms,
        steps: i,
        limit_hit,
    })
}

/// The generated sublattice itself (full fixpoint), for small inputs.
pub fn closure_elements(generators: &[PartitionTuple], limit: usize) -> Result<Vec<PartitionTuple>> {
    shared_shape(generators)?;
    let mut elems: Vec<PartitionTuple> = Vec::new();
    let mut seen: HashSet<PartitionTuple> = HashSet::new();
    for g in generators {
        if seen.insert(g.clone()) {
            elems.push(g.clone());
        }
    }
    let mut i = 0;
    while i < elems.len() {
        if elems.len() > limit {
            return Err(Error::invalid(format!("closure exceeds {limit} elements")));
        }
        for j in 0..i {
            for x in [elems[i].meet_raw(&elems[j]), elems[i].join_raw(&elems[j])] {
                if seen.insert(x.clone()) {
                    elems.push(x);
                }
            }
        }
        i += 1;
    }
    Ok(elems)
}

fn shared_shape(generators: &[PartitionTuple]) -> Result<LatticeShape> {
    let first = generators.first().ok_or_else(|| Error::invalid("need at least one generator"))?;
    let shape = first.shape();
    if let Some(bad) = generators.iter().find(|g| g.shape() != shape) {
        return Err(Error::shape(shape, bad.shape()));
    }
    Ok(shape)
}

/// Whether `generators` generate all of `Part(n)^t`; errors if the default
/// size limit is reached first.
pub fn is_generating(generators: &[PartitionTuple]) -> Result<bool> {
    let r = closure(generators, DEFAULT_LIMIT, ClosureMode::EarlyExit)?;
    r.generating
        .ok_or_else(|| Error::invalid(format!("closure limit of {DEFAULT_LIMIT} elements reached")))
}

/// `Bell(n)^t`, the size of `Part(n)^t`.
pub fn power_size(shape: LatticeShape) -> BigUint {
    bell(shape.n).pow(shape.t as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub n: usize,
    pub subset_size: usize,
    pub samples: usize,
    pub found: usize,
    pub fraction: f64,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn csv_header() -> &'static str {
        "n,subset_size,samples,found,fraction,seed"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{}",
            self.n, self.subset_size, self.samples, self.found, self.fraction, self.seed
        )
    }
}

/// Draws `size` distinct uniform partitions of `Part(n)`.
pub fn random_subset(sampler: &PartitionSampler, size: usize, rng: &mut ShiftRng) -> Vec<PartitionTuple> {
    let mut seen = HashSet::with_capacity(size);
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let p = sampler.sample(rng);
        if seen.insert(p.clone()) {
            out.push(PartitionTuple::from(p));
        }
    }
    out
}

/// Fraction of uniformly drawn `size`-subsets of `Part(n)` that generate it.
/// Sample `i` draws from the substream `(seed, i)`, so the result does not
/// depend on thread scheduling.
pub fn sample_generating_fraction(n: usize, size: usize, samples: usize, seed: u64) -> Result<ExperimentReport> {
    if size == 0 || samples == 0 {
        return Err(Error::invalid("subset size and sample count must be positive"));
    }
    let sampler = PartitionSampler::new(n)?;
    if BigUint::from(size) > *sampler.total() {
        return Err(Error::invalid(format!("subset size {size} exceeds Bell({n}) = {}", sampler.total())));
    }
    let found = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let mut rng = ShiftRng::substream(seed, i as u64);
            let subset = random_subset(&sampler, size, &mut rng);
            Ok(usize::from(is_generating(&subset)?))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(ExperimentReport {
        n,
        subset_size: size,
        samples,
        found,
        fraction: found as f64 / samples as f64,
        seed,
    })
}
