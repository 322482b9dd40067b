//! Small generating sets of direct powers `Part(n)^t`.
//!
//! Every coordinate carries the same `alpha`, `beta`, `gamma` from
//! [`ZadoriConfig`]; only the fourth partition varies. Coordinate `i` gets
//! `delta ∨ kappa_i ∨ lambda_i`, where `(kappa_i, lambda_i)` runs through an
//! antichain of `Equ(U) × Equ(W)` for two disjoint vertex sets `U`, `W` lying
//! inside the rows. Distinct coordinates then differ in `alpha ∧ delta_i`,
//! which is what the separating terms detect.
//!
//! Two constructions are provided:
//!
//! * [`build_four_generators`]: `t <= m(n)` coordinates, `U = {a_1..a_{k-1}}`,
//!   `W = {b_0..b_{k-1}}`, Stirling-maximal block counts;
//! * [`build_order_type_generators`]: `mhat(n)` coordinates with the row
//!   variant of `delta`, so the fourth generator lies below the first and the
//!   quadruple has exactly one comparable pair.
//!
//! [`certify_generators`] evaluates explicit proof terms instead of computing
//! a closure: per-coordinate edge terms that vanish on every other coordinate,
//! then circle terms over those to reach each coordinate's atoms.

use rayon::prelude::*;

use crate::certificate::GeneratorCertificate;
use crate::combinatorics::{m_of_n, mhat_of_n, max_stirling};
use crate::error::{Error, Result};
use crate::partition::{enumerate_r_block_partitions, LatticeShape, Partition, PartitionTuple, Permutation};
use crate::term::{circle_term, NodeId, TermArena};
use crate::zadori::{EntryRule, FTermTable, ZadoriConfig, ALPHA, DELTA};

/// Exponent above which the default four-generator build takes a prefix.
pub const DEFAULT_PREFIX: usize = 1000;
/// Sizes from which the default build is truncated to [`DEFAULT_PREFIX`].
pub const LARGE_N: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Four pairwise incomparable generators.
    FourGenerated,
    /// Exactly one comparable pair: the fourth generator lies below the first.
    OneOneTwo,
}

/// The antichain of `Equ(U) × Equ(W)` behind the fourth generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntichainPlan {
    /// Elements of `U` in the order used to embed `kappa`.
    pub u: Vec<usize>,
    pub w: Vec<usize>,
    /// Block counts of all `kappa` and all `lambda`; `None` for the
    /// two-element antichain `{(bottom, top), (top, bottom)}`.
    pub block_counts: Option<(usize, usize)>,
    /// `(kappa_i, lambda_i)` as partitions of `1..=|U|` and `1..=|W|`.
    pub pairs: Vec<(Partition, Partition)>,
}

impl AntichainPlan {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether the listed pairs are distinct and pairwise incomparable in
    /// the product order.
    pub fn is_antichain(&self) -> bool {
        let leq = |x: &(Partition, Partition), y: &(Partition, Partition)| x.0.leq_raw(&y.0) && x.1.leq_raw(&y.1);
        self.pairs.iter().enumerate().all(|(i, x)| {
            self.pairs[i + 1..]
                .iter()
                .all(|y| x != y && !leq(x, y) && !leq(y, x))
        })
    }
}

/// Entries `indices` (ascending positions) of the product of the `r'`-block
/// partitions of `U` and the `r''`-block partitions of `W`, listed
/// lexicographically in `(kappa, lambda)`.
fn product_plan(u: Vec<usize>, w: Vec<usize>, indices: impl IntoIterator<Item = usize>) -> Result<AntichainPlan> {
    let ru = max_stirling(u.len())?.1[0];
    let rw = max_stirling(w.len())?.1[0];
    let kappas = enumerate_r_block_partitions(u.len(), ru)?;
    let lambdas = enumerate_r_block_partitions(w.len(), rw)?;
    let total = kappas.len() * lambdas.len();
    let pairs = indices
        .into_iter()
        .map(|i| {
            if i >= total {
                return Err(Error::invalid(format!("antichain index {i} not below {total}")));
            }
            Ok((kappas[i / lambdas.len()].clone(), lambdas[i % lambdas.len()].clone()))
        })
        .collect::<Result<_>>()?;
    Ok(AntichainPlan {
        u,
        w,
        block_counts: Some((ru, rw)),
        pairs,
    })
}

/// `delta ∨ kappa ∨ lambda` with `kappa`, `lambda` embedded along `u` and `w`.
pub fn build_delta_hat(delta: &Partition, u: &[usize], w: &[usize], kappa: &Partition, lambda: &Partition) -> Result<Partition> {
    if u.iter().any(|x| w.contains(x)) {
        return Err(Error::invalid("the two antichain supports must be disjoint"));
    }
    let n = delta.n();
    let k = kappa.embed(u, n)?;
    let l = lambda.embed(w, n)?;
    Ok(delta.join_raw(&k).join_raw(&l))
}

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub construction: Construction,
    pub config: ZadoriConfig,
    pub plan: AntichainPlan,
    pub delta_hats: Vec<Partition>,
}

impl GeneratorSet {
    fn from_plan(construction: Construction, config: ZadoriConfig, plan: AntichainPlan) -> Result<Self> {
        let delta_hats = plan
            .pairs
            .iter()
            .map(|(k, l)| build_delta_hat(config.delta(), &plan.u, &plan.w, k, l))
            .collect::<Result<_>>()?;
        Ok(GeneratorSet {
            construction,
            config,
            plan,
            delta_hats,
        })
    }

    pub fn n(&self) -> usize {
        self.config.n()
    }

    /// Number of coordinates.
    pub fn exponent(&self) -> usize {
        self.delta_hats.len()
    }

    pub fn shape(&self) -> LatticeShape {
        LatticeShape {
            n: self.n(),
            t: self.exponent(),
        }
    }

    fn entry_rule(&self) -> EntryRule {
        match self.construction {
            Construction::FourGenerated => EntryRule::Direct,
            Construction::OneOneTwo => EntryRule::ViaComplement,
        }
    }

    /// `(alpha, beta, gamma, delta_hat)` as tuples over all coordinates.
    pub fn quadruple(&self) -> [PartitionTuple; 4] {
        let t = self.exponent();
        let repeat = |p: &Partition| PartitionTuple::new(vec![p.clone(); t]).expect("nonempty");
        [
            repeat(self.config.alpha()),
            repeat(self.config.beta()),
            repeat(self.config.gamma()),
            PartitionTuple::new(self.delta_hats.clone()).expect("nonempty"),
        ]
    }

    /// The coordinatewise relabeled quadruple.
    pub fn permuted_quadruple(&self, perms: &[Permutation]) -> Result<[PartitionTuple; 4]> {
        if perms.len() != self.exponent() {
            return Err(Error::invalid(format!("need {} permutations, got {}", self.exponent(), perms.len())));
        }
        let quad = self.quadruple();
        let permute = |g: &PartitionTuple| -> Result<PartitionTuple> {
            PartitionTuple::new(
                g.coords()
                    .iter()
                    .zip(perms)
                    .map(|(x, tau)| x.permute(tau))
                    .collect::<Result<_>>()?,
            )
        };
        Ok([permute(&quad[0])?, permute(&quad[1])?, permute(&quad[2])?, permute(&quad[3])?])
    }
}

/// Default exponent: `m(n)`, capped at [`DEFAULT_PREFIX`] from `n = 15` on.
pub fn default_exponent(n: usize) -> Result<usize> {
    let m = m_of_n(n)?;
    let m = usize::try_from(&m).unwrap_or(usize::MAX);
    Ok(if n >= LARGE_N { m.min(DEFAULT_PREFIX) } else { m })
}

/// Four pairwise incomparable generators of `Part(n)^t`, `t <= m(n)`.
/// `None` selects [`default_exponent`].
pub fn build_four_generators(n: usize, t: Option<usize>) -> Result<GeneratorSet> {
    let t = match t {
        Some(t) => t,
        None => default_exponent(n)?,
    };
    let m = m_of_n(n)?;
    if t == 0 || m < num_bigint::BigUint::from(t) {
        return Err(Error::invalid(format!("exponent {t} not in 1..=m({n}) = {m}")));
    }
    build_four_generators_at(n, &(0..t).collect::<Vec<_>>())
}

/// Like [`build_four_generators`], with coordinates taken from the given
/// positions of the full antichain of length `m(n)`.
pub fn build_four_generators_at(n: usize, positions: &[usize]) -> Result<GeneratorSet> {
    if positions.is_empty() {
        return Err(Error::invalid("need at least one coordinate"));
    }
    let config = ZadoriConfig::new(n)?;
    let k = config.k();
    let u: Vec<usize> = (1..k).map(|i| config.a(i)).collect();
    let w: Vec<usize> = (0..k).map(|i| config.b(i)).collect();
    let plan = product_plan(u, w, positions.iter().copied())?;
    if !plan.is_antichain() {
        return Err(Error::invalid("antichain positions must be distinct"));
    }
    GeneratorSet::from_plan(Construction::FourGenerated, config, plan)
}

/// Generators of `Part(n)^mhat(n)` of order type `1+1+2`; needs `n >= 7`.
pub fn build_order_type_generators(n: usize) -> Result<GeneratorSet> {
    let config = ZadoriConfig::with_row_delta(n)?;
    let mhat = usize::try_from(&mhat_of_n(n)?).map_err(|_| Error::invalid("exponent too large"))?;
    let k = config.k();
    let odd: Vec<usize> = (1..=k - 2).filter(|i| i % 2 == 1).collect();
    let u: Vec<usize> = odd.iter().map(|&i| config.a(i)).collect();
    let w: Vec<usize> = odd.iter().map(|&i| config.b(i)).collect();
    let plan = if odd.len() == 2 {
        let (bot, top) = (Partition::bottom(2)?, Partition::top(2)?);
        AntichainPlan {
            u,
            w,
            block_counts: None,
            pairs: vec![(bot.clone(), top.clone()), (top, bot)],
        }
    } else {
        product_plan(u, w, 0..mhat)?
    };
    if plan.len() != mhat {
        return Err(Error::invalid(format!("antichain has {} entries, expected {mhat}", plan.len())));
    }
    GeneratorSet::from_plan(Construction::OneOneTwo, config, plan)
}

/// Proof terms for one generator set, sharing a single arena.
#[derive(Debug, Clone)]
pub struct CertificateTerms {
    pub arena: TermArena,
    pub table: FTermTable,
    /// Zigzag cycle `d_0..d_{n-1}`.
    pub cycle: Vec<usize>,
    /// `edge[j][p]`: equals `equ(d_p, d_{p+1})` on coordinate `j`, for the
    /// `2k` edges crossing between the rows.
    pub edge: Vec<Vec<NodeId>>,
    /// `step[j][q]`: `equ(d_q, d_{q+1})` on coordinate `j`, bottom elsewhere.
    pub step: Vec<Vec<NodeId>>,
}

impl CertificateTerms {
    pub fn build(set: &GeneratorSet) -> Self {
        let config = &set.config;
        let n = config.n();
        let straight = 2 * config.k();
        let mut arena = TermArena::new();
        let table = FTermTable::build(&mut arena, config, set.entry_rule());
        let cycle = config.zigzag();
        let d = |q: usize| cycle[q % n];
        let (va, vd) = (arena.var(ALPHA), arena.var(DELTA));
        let ad = arena.meet(va, vd);
        let f = |x: usize, y: usize| table.get(x, y);

        let mut edge = Vec::with_capacity(set.exponent());
        let mut step = Vec::with_capacity(set.exponent());
        for dh in &set.delta_hats {
            let mates = config.alpha().meet_raw(dh);
            let mut edges_j = Vec::with_capacity(straight);
            for p in 0..straight {
                let (x0, x1) = (d(p), d(p + 1));
                let mut factors = vec![f(x0, x1)];
                for x in mates.block_of(x0).into_iter().filter(|&x| x != x0) {
                    factors.push(arena.join(ad, f(x, x1)));
                }
                for y in mates.block_of(x1).into_iter().filter(|&y| y != x1) {
                    factors.push(arena.join(f(x0, y), ad));
                }
                edges_j.push(arena.meet_all(factors).expect("nonempty"));
            }
            let mut steps_j = Vec::with_capacity(n);
            for q in 0..n {
                let (y0, y1) = (d(q), d(q + 1));
                let mut factors = vec![f(y0, y1)];
                for (p, &g) in edges_j.iter().enumerate() {
                    let (x0, x1) = (d(p), d(p + 1));
                    let s = arena.join(f(y0, x0), g);
                    factors.push(arena.join(s, f(x1, y1)));
                }
                for (p, &g) in edges_j.iter().enumerate() {
                    let (x0, x1) = (d(p), d(p + 1));
                    let s = arena.join(f(y0, x1), g);
                    factors.push(arena.join(s, f(x0, y1)));
                }
                steps_j.push(arena.meet_all(factors).expect("nonempty"));
            }
            edge.push(edges_j);
            step.push(steps_j);
        }
        CertificateTerms {
            arena,
            table,
            cycle,
            edge,
            step,
        }
    }
}

struct CoordinateOutcome {
    fterm_mismatch: Option<String>,
    edge: Vec<Vec<Partition>>,
    step: Vec<Vec<Partition>>,
}

/// Certifies `set` on its own quadruple.
pub fn verify_generators(set: &GeneratorSet) -> Result<GeneratorCertificate> {
    certify_generators(set, &set.quadruple(), None)
}

/// Evaluates the proof terms of `set` on `generators`. With `relabel`, the
/// generators are expected to be `set`'s quadruple with coordinate `i`
/// relabeled by `relabel[i]`, and every expected atom is relabeled alike.
///
/// Coordinates are printed 1-based; cycle positions `p`, `q` 0-based.
pub fn certify_generators(
    set: &GeneratorSet,
    generators: &[PartitionTuple; 4],
    relabel: Option<&[Permutation]>,
) -> Result<GeneratorCertificate> {
    let shape = set.shape();
    for g in generators {
        if g.shape() != shape {
            return Err(Error::shape(shape, g.shape()));
        }
    }
    let (n, t) = (shape.n, shape.t);
    let identity: Vec<Permutation> = (0..t).map(|_| Permutation::identity(n)).collect();
    let taus: &[Permutation] = match relabel {
        Some(p) if p.len() == t && p.iter().all(|x| x.len() == n) => p,
        Some(_) => return Err(Error::invalid("one permutation of the ground set per coordinate required")),
        None => &identity,
    };
    let atom = |i: usize, u: usize, v: usize| Partition::atom(n, taus[i].apply(u), taus[i].apply(v)).expect("distinct");
    let coord = |i: usize| -> [Partition; 4] { std::array::from_fn(|g| generators[g].coords()[i].clone()) };

    let mut cert = GeneratorCertificate::new(shape, generators.to_vec());
    let config = &set.config;
    let k = config.k();
    let bottom = Partition::bottom(n)?;

    // Undo the relabeling to compare alpha ∧ delta_hat across coordinates.
    let restored: Vec<Partition> = (0..t)
        .map(|i| {
            let [a, _, _, dh] = coord(i);
            a.meet_raw(&dh).permute(&taus[i].inverse())
        })
        .collect::<Result<_>>()?;
    for i in 0..t {
        for j in i + 1..t {
            let ok = !restored[i].leq_raw(&restored[j]) && !restored[j].leq_raw(&restored[i]);
            cert.record("incomparable", format!("{},{}", i + 1, j + 1), ok, None);
        }
    }

    for i in 0..t {
        let [a, b, g, dh] = coord(i);
        let complement_entry = |b: &Partition, g: &Partition| b.meet_raw(&g.join_raw(&dh));
        // For even n the ladder runs on beta and gamma cut down to the odd part.
        let (b, g) = if config.is_even() {
            let aux = match set.construction {
                Construction::FourGenerated => a.join_raw(&dh),
                Construction::OneOneTwo => a.join_raw(&complement_entry(&b, &g)),
            };
            (b.meet_raw(&aux), g.meet_raw(&aux))
        } else {
            (b, g)
        };
        let (first, second) = match set.construction {
            Construction::FourGenerated => (b.meet_raw(&dh), g.meet_raw(&dh)),
            Construction::OneOneTwo => (complement_entry(&b, &g), complement_entry(&g, &b)),
        };
        let (w0, w1) = (atom(i, config.a(0), config.b(0)), atom(i, config.a(k), config.b(k - 1)));
        let ok = first == w0 && second == w1;
        cert.record("entry", format!("{}", i + 1), ok, (!ok).then(|| format!("got {first} and {second}")));
    }

    let terms = CertificateTerms::build(set);
    let pair_list: Vec<(usize, usize, NodeId)> = terms.table.pairs().collect();
    let mut roots: Vec<NodeId> = pair_list.iter().map(|p| p.2).collect();
    for j in 0..t {
        roots.extend(&terms.edge[j]);
        roots.extend(&terms.step[j]);
    }
    let straight = 2 * k;
    let outcomes: Vec<CoordinateOutcome> = (0..t)
        .into_par_iter()
        .map(|i| -> Result<CoordinateOutcome> {
            let args = coord(i);
            let refs: Vec<&Partition> = args.iter().collect();
            let values = terms.arena.eval_partitions(&roots, &refs)?;
            let (pair_vals, rest) = values.split_at(pair_list.len());
            let fterm_mismatch = pair_list.iter().zip(pair_vals).find_map(|(&(u, v, _), got)| {
                (*got != atom(i, u, v)).then(|| format!("pair {u},{v} got {got}"))
            });
            let mut edge = Vec::with_capacity(t);
            let mut step = Vec::with_capacity(t);
            for chunk in rest.chunks(straight + n) {
                edge.push(chunk[..straight].to_vec());
                step.push(chunk[straight..].to_vec());
            }
            Ok(CoordinateOutcome {
                fterm_mismatch,
                edge,
                step,
            })
        })
        .collect::<Result<_>>()?;

    let d = |q: usize| terms.cycle[q % n];
    for (i, out) in outcomes.iter().enumerate() {
        let ok = out.fterm_mismatch.is_none();
        cert.record("fterm", format!("{}", i + 1), ok, out.fterm_mismatch.clone());
    }
    for j in 0..t {
        let bad = (0..straight).find(|&p| outcomes[j].edge[j][p] != atom(j, d(p), d(p + 1)));
        cert.record(
            "edge-diagonal",
            format!("{}", j + 1),
            bad.is_none(),
            bad.map(|p| format!("p={p} got {}", outcomes[j].edge[j][p])),
        );
    }
    for i in 0..t {
        for j in (0..t).filter(|&j| j != i) {
            let witness = (0..straight).find(|&p| outcomes[i].edge[j][p].is_bottom());
            cert.record(
                "separation",
                format!("{},{}", i + 1, j + 1),
                witness.is_some(),
                witness.map(|p| format!("p={p}")),
            );
        }
    }
    for i in 0..t {
        for j in 0..t {
            let want = |q: usize| if i == j { atom(i, d(q), d(q + 1)) } else { bottom.clone() };
            let bad = (0..n).find(|&q| outcomes[i].step[j][q] != want(q));
            cert.record(
                "step",
                format!("{},{}", i + 1, j + 1),
                bad.is_none(),
                bad.map(|q| format!("q={q} got {}", outcomes[i].step[j][q])),
            );
        }
    }

    // Circle terms over the step vectors of coordinate j reach every atom of
    // that coordinate and nothing elsewhere.
    let mut circle = TermArena::new();
    let vars: Vec<NodeId> = (0..n).map(|q| circle.var(q)).collect();
    let mut circle_roots = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            circle_roots.push((u, v, circle_term(&mut circle, &vars, u, v)?));
        }
    }
    let roots: Vec<NodeId> = circle_roots.iter().map(|r| r.2).collect();
    for j in 0..t {
        let args: Vec<PartitionTuple> = (0..n)
            .map(|q| PartitionTuple::new((0..t).map(|i| outcomes[i].step[j][q].clone()).collect()))
            .collect::<Result<_>>()?;
        let values = circle.eval_tuples(&roots, &args)?;
        let bad = circle_roots.iter().zip(&values).find_map(|(&(u, v, _), got)| {
            let ok = got
                .coords()
                .iter()
                .enumerate()
                .all(|(i, x)| if i == j { *x == atom(j, d(u), d(v)) } else { x.is_bottom() });
            (!ok).then(|| format!("pair {},{}", d(u), d(v)))
        });
        cert.record("cover", format!("{}", j + 1), bad.is_none(), bad);
    }

    if set.construction == Construction::OneOneTwo {
        let pairs = cert.order_type.comparable_pairs();
        let ok = pairs == [(ALPHA, DELTA)] && cert.order_type.leq[DELTA][ALPHA];
        let detail = format!("comparable {pairs:?}");
        cert.record("order-type", "1+1+2", ok, Some(detail));
    }
    Ok(cert)
}

/// Builds and certifies the four-generator set of `Part(n)^t`.
pub fn verify_four_generators(n: usize, t: Option<usize>) -> Result<GeneratorCertificate> {
    verify_generators(&build_four_generators(n, t)?)
}

/// Builds and certifies the `1+1+2` generator set of `Part(n)^mhat(n)`.
pub fn verify_order_type_generators(n: usize) -> Result<GeneratorCertificate> {
    verify_generators(&build_order_type_generators(n)?)
}
