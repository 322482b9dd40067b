//! The four-partition generating configuration of `Equ(n)` and its proof terms.
//!
//! Vertices `a_0..a_k` occupy elements `1..=k+1`, `b_0..b_{k-1}` occupy
//! `k+2..=2k+1`, and for even `n` the extra vertex `c` is `n`, where
//! `k = (n-1)/2`. The four partitions are
//!
//! * `alpha`: the a-row and the b-row as two blocks,
//! * `beta`: the rungs `a_i b_i`,
//! * `gamma`: the diagonals `a_{i+1} b_i`,
//! * `delta`: `a_0 b_0` and `a_k b_{k-1}` (or, in the row variant, `a_0 a_k`
//!   and `b_0 b_{k-1}`),
//!
//! and for even `n` `beta` gains the edge `b_0 c` and `gamma` gains `a_2 c`.
//!
//! [`FTermTable`] holds, for every pair of vertices, a quaternary term over
//! `(x1, x2, x3, x4) = (alpha, beta, gamma, delta)` evaluating to the atom of
//! that pair. The fourth variable enters the edge terms only through two
//! entry subterms (plus one auxiliary join for even `n`), so any replacement
//! of `delta` that leaves those entries unchanged leaves the table valid.

use crate::certificate::GeneratorCertificate;
use crate::error::{Error, Result};
use crate::partition::{LatticeShape, Partition, PartitionTuple, Permutation};
use crate::term::{circle_term, NodeId, TermArena};

pub const ALPHA: usize = 0;
pub const BETA: usize = 1;
pub const GAMMA: usize = 2;
pub const DELTA: usize = 3;

/// Which fourth partition accompanies the three fixed ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaKind {
    /// `a_0 b_0` and `a_k b_{k-1}`: crosses between the rows.
    Cross,
    /// `a_0 a_k` and `b_0 b_{k-1}`: stays inside the rows, so `delta <= alpha`.
    Rows,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZadoriConfig {
    n: usize,
    k: usize,
    kind: DeltaKind,
    alpha: Partition,
    beta: Partition,
    gamma: Partition,
    delta: Partition,
}

/// Smallest equivalence containing the listed 1-based pairs.
pub(crate) fn generated_by_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Partition> {
    let mut acc = Partition::bottom(n)?;
    for &(u, v) in pairs {
        acc = acc.join_raw(&Partition::atom(n, u, v)?);
    }
    Ok(acc)
}

impl ZadoriConfig {
    pub fn new(n: usize) -> Result<Self> {
        Self::build(n, DeltaKind::Cross)
    }

    /// The variant whose fourth partition lies below `alpha`; needs `n >= 7`.
    pub fn with_row_delta(n: usize) -> Result<Self> {
        if n < 7 {
            return Err(Error::invalid(format!("the row variant needs n >= 7, got {n}")));
        }
        Self::build(n, DeltaKind::Rows)
    }

    fn build(n: usize, kind: DeltaKind) -> Result<Self> {
        if n < 5 {
            return Err(Error::invalid(format!("the configuration needs n >= 5, got {n}")));
        }
        let k = (n - 1) / 2;
        let a = |i: usize| i + 1;
        let b = |i: usize| k + 2 + i;
        let mut alpha = Vec::new();
        alpha.extend((0..k).map(|i| (a(i), a(i + 1))));
        alpha.extend((0..k - 1).map(|i| (b(i), b(i + 1))));
        let mut beta: Vec<(usize, usize)> = (0..k).map(|i| (a(i), b(i))).collect();
        let mut gamma: Vec<(usize, usize)> = (0..k).map(|i| (a(i + 1), b(i))).collect();
        if n % 2 == 0 {
            beta.push((b(0), n));
            gamma.push((a(2), n));
        }
        let delta = match kind {
            DeltaKind::Cross => vec![(a(0), b(0)), (a(k), b(k - 1))],
            DeltaKind::Rows => vec![(a(0), a(k)), (b(0), b(k - 1))],
        };
        Ok(ZadoriConfig {
            n,
            k,
            kind,
            alpha: generated_by_pairs(n, &alpha)?,
            beta: generated_by_pairs(n, &beta)?,
            gamma: generated_by_pairs(n, &gamma)?,
            delta: generated_by_pairs(n, &delta)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta_kind(&self) -> DeltaKind {
        self.kind
    }

    pub fn is_even(&self) -> bool {
        self.n % 2 == 0
    }

    /// Element number of `a_i`.
    pub fn a(&self, i: usize) -> usize {
        assert!(i <= self.k, "a_{i} out of range");
        i + 1
    }

    /// Element number of `b_i`.
    pub fn b(&self, i: usize) -> usize {
        assert!(i < self.k, "b_{i} out of range");
        self.k + 2 + i
    }

    pub fn c(&self) -> Option<usize> {
        self.is_even().then_some(self.n)
    }

    pub fn alpha(&self) -> &Partition {
        &self.alpha
    }

    pub fn beta(&self) -> &Partition {
        &self.beta
    }

    pub fn gamma(&self) -> &Partition {
        &self.gamma
    }

    pub fn delta(&self) -> &Partition {
        &self.delta
    }

    /// `(alpha, beta, gamma, delta)` in variable order.
    pub fn quadruple(&self) -> [Partition; 4] {
        [self.alpha.clone(), self.beta.clone(), self.gamma.clone(), self.delta.clone()]
    }

    /// Same, with `delta` replaced.
    pub fn quadruple_with(&self, delta: &Partition) -> [Partition; 4] {
        [self.alpha.clone(), self.beta.clone(), self.gamma.clone(), delta.clone()]
    }

    /// `a3`, `b0`, `c` style name of an element.
    pub fn vertex_name(&self, x: usize) -> String {
        match x {
            _ if x >= 1 && x <= self.k + 1 => format!("a{}", x - 1),
            _ if x >= self.k + 2 && x <= 2 * self.k + 1 => format!("b{}", x - self.k - 2),
            _ if self.is_even() && x == self.n => "c".to_string(),
            _ => format!("?{x}"),
        }
    }

    /// The Hamiltonian cycle `a_0..a_k, b_{k-1}..b_0` of the odd part.
    pub fn row_cycle(&self) -> Vec<usize> {
        let mut d: Vec<usize> = (0..=self.k).map(|i| self.a(i)).collect();
        d.extend((0..self.k).rev().map(|i| self.b(i)));
        d
    }

    /// The Hamiltonian cycle through `c` used for even `n`:
    /// `a_0, c, a_2..a_k, b_{k-1}..b_1, a_1, b_0`.
    pub fn detour_cycle(&self) -> Option<Vec<usize>> {
        let c = self.c()?;
        let mut d = vec![self.a(0), c];
        d.extend((2..=self.k).map(|i| self.a(i)));
        d.extend((1..self.k).rev().map(|i| self.b(i)));
        d.extend([self.a(1), self.b(0)]);
        Some(d)
    }

    /// The cycle `a_0 b_0 a_1 b_1 .. a_k` (then `c` for even `n`) whose first
    /// `2k` edges cross between the rows.
    pub fn zigzag(&self) -> Vec<usize> {
        let mut d = Vec::with_capacity(self.n);
        for i in 0..self.k {
            d.extend([self.a(i), self.b(i)]);
        }
        d.push(self.a(self.k));
        d.extend(self.c());
        d
    }
}

/// How the two `delta` entry subterms are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntryRule {
    /// `beta*delta` and `gamma*delta`; for even `n` the auxiliary join is `alpha+delta`.
    #[default]
    Direct,
    /// `beta*(gamma+delta)` and `gamma*(beta+delta)`; for even `n` the
    /// auxiliary join is `alpha + beta*(gamma+delta)`.
    ViaComplement,
}

impl EntryRule {
    fn entries(self, arena: &mut TermArena, mu: [NodeId; 4]) -> (NodeId, NodeId) {
        match self {
            EntryRule::Direct => (arena.meet(mu[BETA], mu[DELTA]), arena.meet(mu[GAMMA], mu[DELTA])),
            EntryRule::ViaComplement => {
                let gd = arena.join(mu[GAMMA], mu[DELTA]);
                let bd = arena.join(mu[BETA], mu[DELTA]);
                (arena.meet(mu[BETA], gd), arena.meet(mu[GAMMA], bd))
            }
        }
    }
}

/// The two-sided ladder recursion over the odd part and the edge terms derived
/// from it. Indices follow the vertex subscripts; all four chains are stored
/// with their natural index range.
#[derive(Debug, Clone)]
pub struct LadderTerms {
    k: usize,
    entries: (NodeId, NodeId),
    /// `i -> ` rungs `a_j b_j` for `j <= i`, `0 <= i < k`.
    rungs_up: Vec<NodeId>,
    /// `i -> ` diagonals `a_j b_{j-1}` for `1 <= j <= i`, stored at `i-1`.
    diagonals_up: Vec<NodeId>,
    /// `i -> ` rungs `a_{k-j} b_{k-j}` for `1 <= j <= i`, stored at `i-1`.
    rungs_down: Vec<NodeId>,
    /// `i -> ` diagonals `a_{k-j} b_{k-1-j}` for `0 <= j <= i`, `0 <= i < k`.
    diagonals_down: Vec<NodeId>,
    rung: Vec<NodeId>,
    diagonal: Vec<NodeId>,
    a_step: Vec<NodeId>,
    b_step: Vec<NodeId>,
}

impl LadderTerms {
    pub fn build(arena: &mut TermArena, mu: [NodeId; 4], k: usize, rule: EntryRule) -> Self {
        assert!(k >= 2, "ladder needs k >= 2");
        let [al, be, ga, _] = mu;
        let entries = rule.entries(arena, mu);
        // ((x + side) * alpha + x) * side
        let climb = |arena: &mut TermArena, x: NodeId, side: NodeId| {
            let up = arena.join(x, side);
            let across = arena.meet(up, al);
            let back = arena.join(across, x);
            arena.meet(back, side)
        };
        let mut rungs_up = vec![entries.0];
        let mut diagonals_up = Vec::with_capacity(k);
        for i in 0..k {
            let h = climb(arena, rungs_up[i], ga);
            diagonals_up.push(h);
            if i + 1 < k {
                let g = climb(arena, h, be);
                rungs_up.push(g);
            }
        }
        let mut diagonals_down = vec![entries.1];
        let mut rungs_down = Vec::with_capacity(k);
        for i in 0..k {
            let g = climb(arena, diagonals_down[i], be);
            rungs_down.push(g);
            if i + 1 < k {
                let h = climb(arena, g, ga);
                diagonals_down.push(h);
            }
        }
        let rung: Vec<NodeId> = (0..k).map(|i| arena.meet(rungs_up[i], rungs_down[k - i - 1])).collect();
        // diagonal[i-1] = a_i b_{i-1}, 1 <= i <= k
        let diagonal: Vec<NodeId> = (1..=k)
            .map(|i| arena.meet(diagonals_up[i - 1], diagonals_down[k - i]))
            .collect();
        let a_step: Vec<NodeId> = (0..k)
            .map(|i| {
                let j = arena.join(rung[i], diagonal[i]);
                arena.meet(al, j)
            })
            .collect();
        let b_step: Vec<NodeId> = (0..k - 1)
            .map(|i| {
                let j = arena.join(diagonal[i], rung[i + 1]);
                arena.meet(al, j)
            })
            .collect();
        LadderTerms {
            k,
            entries,
            rungs_up,
            diagonals_up,
            rungs_down,
            diagonals_down,
            rung,
            diagonal,
            a_step,
            b_step,
        }
    }

    pub fn entries(&self) -> (NodeId, NodeId) {
        self.entries
    }

    /// Evaluates to the rungs `a_j b_j`, `j <= i`.
    pub fn rungs_up(&self, i: usize) -> NodeId {
        self.rungs_up[i]
    }

    /// Evaluates to the diagonals `a_j b_{j-1}`, `1 <= j <= i`.
    pub fn diagonals_up(&self, i: usize) -> NodeId {
        self.diagonals_up[i - 1]
    }

    /// Evaluates to the rungs `a_{k-j} b_{k-j}`, `1 <= j <= i`.
    pub fn rungs_down(&self, i: usize) -> NodeId {
        self.rungs_down[i - 1]
    }

    /// Evaluates to the diagonals `a_{k-j} b_{k-1-j}`, `j <= i`.
    pub fn diagonals_down(&self, i: usize) -> NodeId {
        self.diagonals_down[i]
    }

    /// `a_i b_i`, `0 <= i < k`.
    pub fn rung(&self, i: usize) -> NodeId {
        self.rung[i]
    }

    /// `a_i b_{i-1}`, `1 <= i <= k`.
    pub fn diagonal(&self, i: usize) -> NodeId {
        self.diagonal[i - 1]
    }

    /// `a_i a_{i+1}`, `0 <= i < k`.
    pub fn a_step(&self, i: usize) -> NodeId {
        self.a_step[i]
    }

    /// `b_i b_{i+1}`, `0 <= i < k-1`.
    pub fn b_step(&self, i: usize) -> NodeId {
        self.b_step[i]
    }

    /// Edge terms along `a_0..a_k, b_{k-1}..b_0` and back to `a_0`.
    pub fn row_cycle_edges(&self) -> Vec<NodeId> {
        let k = self.k;
        let mut e: Vec<NodeId> = (0..k).map(|i| self.a_step(i)).collect();
        e.push(self.diagonal(k));
        e.extend((0..k - 1).rev().map(|i| self.b_step(i)));
        e.push(self.rung(0));
        e
    }
}

/// Atom terms for every pair of elements, built in a caller-supplied arena
/// whose variables 0..4 are `(alpha, beta, gamma, delta)`.
#[derive(Debug, Clone)]
pub struct FTermTable {
    n: usize,
    nodes: Vec<NodeId>,
    barriers: Vec<NodeId>,
    ladder: LadderTerms,
    cycle: Vec<usize>,
}

impl FTermTable {
    pub fn build(arena: &mut TermArena, config: &ZadoriConfig, rule: EntryRule) -> Self {
        let n = config.n();
        let k = config.k();
        let vars: [NodeId; 4] = [arena.var(ALPHA), arena.var(BETA), arena.var(GAMMA), arena.var(DELTA)];
        let bottom_term = arena.meet_all(vars).expect("four variables");

        let (ladder, cycle, edges, barriers) = if !config.is_even() {
            let ladder = LadderTerms::build(arena, vars, k, rule);
            let edges = ladder.row_cycle_edges();
            let (e0, e1) = ladder.entries();
            (ladder, config.row_cycle(), edges, vec![e0, e1])
        } else {
            let (al, be, ga, de) = (vars[ALPHA], vars[BETA], vars[GAMMA], vars[DELTA]);
            let aux = match rule {
                EntryRule::Direct => arena.join(al, de),
                EntryRule::ViaComplement => {
                    let (e0, _) = rule.entries(arena, vars);
                    arena.join(al, e0)
                }
            };
            let starred = [al, arena.meet(be, aux), arena.meet(ga, aux), de];
            let ladder = LadderTerms::build(arena, starred, k, rule);
            let row_edges = ladder.row_cycle_edges();
            // a_0 and a_2 sit at positions 0 and 2 of the row cycle.
            let a0a2 = circle_term(arena, &row_edges, 0, 2).expect("valid positions");
            let j = arena.join(ga, a0a2);
            let to_c_from_a0 = arena.meet(be, j);
            let j = arena.join(be, a0a2);
            let to_c_from_a2 = arena.meet(ga, j);
            let mut edges = vec![to_c_from_a0, to_c_from_a2];
            edges.extend((2..k).map(|i| ladder.a_step(i)));
            edges.push(ladder.diagonal(k));
            edges.extend((1..k - 1).rev().map(|i| ladder.b_step(i)));
            edges.extend([ladder.rung(1), ladder.diagonal(1), ladder.rung(0)]);
            let (e0, e1) = ladder.entries();
            let cycle = config.detour_cycle().expect("even configuration");
            (ladder, cycle, edges, vec![e0, e1, aux])
        };
        debug_assert_eq!(edges.len(), n);

        let mut position = vec![0usize; n + 1];
        for (p, &x) in cycle.iter().enumerate() {
            position[x] = p;
        }
        let mut nodes = vec![bottom_term; n * n];
        for u in 1..=n {
            for v in u + 1..=n {
                let (pu, pv) = (position[u].min(position[v]), position[u].max(position[v]));
                let t = circle_term(arena, &edges, pu, pv).expect("valid positions");
                nodes[(u - 1) * n + (v - 1)] = t;
                nodes[(v - 1) * n + (u - 1)] = t;
            }
        }
        FTermTable {
            n,
            nodes,
            barriers,
            ladder,
            cycle,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Term for the pair `(u, v)` of 1-based elements; for `u == v` the meet
    /// of all four variables.
    pub fn get(&self, u: usize, v: usize) -> NodeId {
        self.nodes[(u - 1) * self.n + (v - 1)]
    }

    /// All `(u, v, term)` with `u < v`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, NodeId)> + '_ {
        let n = self.n;
        (1..=n).flat_map(move |u| (u + 1..=n).map(move |v| (u, v, self.get(u, v))))
    }

    /// The only subterms through which the edge terms reach the fourth variable.
    pub fn delta_entries(&self) -> &[NodeId] {
        &self.barriers
    }

    pub fn ladder(&self) -> &LadderTerms {
        &self.ladder
    }

    /// The vertex cycle whose circle terms make up the table.
    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }
}

/// Whether every off-diagonal term reaches the fourth variable only through
/// [`FTermTable::delta_entries`].
pub fn delta_confined(arena: &TermArena, table: &FTermTable) -> bool {
    let roots: Vec<NodeId> = table.pairs().map(|(_, _, t)| t).collect();
    let seen = arena.reachable_avoiding(&roots, table.delta_entries());
    arena.lookup_var(DELTA).is_none_or(|d| !seen[d.index()])
}

/// Evaluates the table at `args` and certifies that each pair gets its atom.
pub fn certify_table(
    arena: &TermArena,
    table: &FTermTable,
    args: &[Partition; 4],
    relabel: Option<&Permutation>,
    cert: &mut GeneratorCertificate,
) -> Result<()> {
    let n = table.n();
    let tau = |x: usize| relabel.map_or(x, |p| p.apply(x));
    let pairs: Vec<(usize, usize, NodeId)> = table.pairs().collect();
    let roots: Vec<NodeId> = pairs.iter().map(|p| p.2).collect();
    let refs: Vec<&Partition> = args.iter().collect();
    let values = arena.eval_partitions(&roots, &refs)?;
    for (&(u, v, _), got) in pairs.iter().zip(&values) {
        let want = Partition::atom(n, tau(u), tau(v))?;
        let ok = *got == want;
        cert.record("atom", format!("{u},{v}"), ok, (!ok).then(|| format!("got {got}")));
    }
    Ok(())
}

/// Certifies that the configuration on `n` points generates `Part(n)` by
/// evaluating an atom term for every pair.
pub fn verify_lemma(n: usize) -> Result<GeneratorCertificate> {
    verify_config(&ZadoriConfig::new(n)?, EntryRule::Direct)
}

pub fn verify_config(config: &ZadoriConfig, rule: EntryRule) -> Result<GeneratorCertificate> {
    let mut arena = TermArena::new();
    let table = FTermTable::build(&mut arena, config, rule);
    let quad = config.quadruple();
    let gens: Vec<PartitionTuple> = quad.iter().cloned().map(PartitionTuple::from).collect();
    let mut cert = GeneratorCertificate::new(LatticeShape::new(config.n(), 1)?, gens);
    cert.record("delta-entries", "all", delta_confined(&arena, &table), None);
    certify_table(&arena, &table, &quad, None, &mut cert)?;
    Ok(cert)
}

/// Certifies the configuration relabeled by `perm` (an automorphism of `Part(n)`).
pub fn verify_relabeled(config: &ZadoriConfig, rule: EntryRule, perm: &Permutation) -> Result<GeneratorCertificate> {
    let mut arena = TermArena::new();
    let table = FTermTable::build(&mut arena, config, rule);
    let quad = config.quadruple().map(|x| x.permute(perm)).into_iter().collect::<Result<Vec<_>>>()?;
    let quad: [Partition; 4] = quad.try_into().expect("four entries");
    let gens: Vec<PartitionTuple> = quad.iter().cloned().map(PartitionTuple::from).collect();
    let mut cert = GeneratorCertificate::new(LatticeShape::new(config.n(), 1)?, gens);
    certify_table(&arena, &table, &quad, Some(perm), &mut cert)?;
    Ok(cert)
}
