//! Lattice terms as shared-subterm DAGs.
//!
//! Terms live in a [`TermArena`]: nodes are hash-consed and children always
//! have smaller ids than their parents, so ids are a topological order and
//! evaluation is a single forward sweep with one memo slot per node. The
//! recursive term families used by the generator certificates reuse each
//! subterm several times; their expanded trees are exponentially larger
//! than the arena.
//!
//! Text form is an S-expression over binary `+` (join) and `*` (meet) with
//! variables `x1..xp`, for instance `(* x4 (+ x5 x1))`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partition::{Partition, PartitionTuple};
use crate::rng::ShiftRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Meet,
    Join,
}

impl Op {
    pub fn dual(self) -> Op {
        match self {
            Op::Meet => Op::Join,
            Op::Join => Op::Meet,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Op::Meet => '*',
            Op::Join => '+',
        }
    }
}

/// Variables are 0-based internally and printed 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Var(u16),
    Apply(Op, NodeId, NodeId),
}

/// Variables are stored as `u16`.
pub const MAX_VARIABLES: usize = u16::MAX as usize + 1;

#[derive(Debug, Clone, Default)]
pub struct TermArena {
    nodes: Vec<Node>,
    index: HashMap<Node, NodeId>,
}

impl TermArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id.index()]
    }

    /// All ids, children before parents.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = NodeId(u32::try_from(self.nodes.len()).expect("term arena overflow"));
        self.nodes.push(node);
        self.index.insert(node, id);
        id
    }

    /// The 0-based variable `i` (printed `x{i+1}`).
    pub fn var(&mut self, i: usize) -> NodeId {
        self.intern(Node::Var(u16::try_from(i).expect("variable index fits u16")))
    }

    /// Id of the 0-based variable `i`, if it occurs in the arena.
    pub fn lookup_var(&self, i: usize) -> Option<NodeId> {
        let i = u16::try_from(i).ok()?;
        self.index.get(&Node::Var(i)).copied()
    }

    pub fn apply(&mut self, op: Op, a: NodeId, b: NodeId) -> NodeId {
        self.intern(Node::Apply(op, a, b))
    }

    pub fn meet(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(Op::Meet, a, b)
    }

    pub fn join(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(Op::Join, a, b)
    }

    /// Left-folded meet; `None` for an empty list (the empty meet is top).
    pub fn meet_all(&mut self, items: impl IntoIterator<Item = NodeId>) -> Option<NodeId> {
        items.into_iter().reduce(|acc, x| self.meet(acc, x))
    }

    /// Left-folded join; `None` for an empty list.
    pub fn join_all(&mut self, items: impl IntoIterator<Item = NodeId>) -> Option<NodeId> {
        items.into_iter().reduce(|acc, x| self.join(acc, x))
    }

    /// Marks every node reachable from `roots`.
    pub fn reachable(&self, roots: &[NodeId]) -> Vec<bool> {
        self.reachable_avoiding(roots, &[])
    }

    /// Marks nodes reachable from `roots` without descending into `barriers`
    /// (barrier nodes themselves are marked).
    pub fn reachable_avoiding(&self, roots: &[NodeId], barriers: &[NodeId]) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = roots.to_vec();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.index()], true) {
                continue;
            }
            if barriers.contains(&id) {
                continue;
            }
            if let Node::Apply(_, a, b) = self.nodes[id.index()] {
                stack.push(a);
                stack.push(b);
            }
        }
        seen
    }

    /// Largest variable index (1-based) used under `root`, 0 if none.
    pub fn max_variable(&self, root: NodeId) -> usize {
        let seen = self.reachable(&[root]);
        self.nodes
            .iter()
            .zip(&seen)
            .filter_map(|(node, &s)| match (node, s) {
                (Node::Var(i), true) => Some(*i as usize + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Evaluates every root at scalar arguments with one memo slot per node.
    pub fn eval_partitions(&self, roots: &[NodeId], args: &[&Partition]) -> Result<Vec<Partition>> {
        if let Some(first) = args.first() {
            if let Some(bad) = args.iter().find(|a| a.n() != first.n()) {
                return Err(Error::shape(format!("Part({})", first.n()), format!("Part({})", bad.n())));
            }
        }
        let seen = self.reachable(roots);
        let mut memo: Vec<Option<Partition>> = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if !seen[i] {
                continue;
            }
            let value = match *node {
                Node::Var(v) => (*args.get(v as usize).ok_or(Error::VariableOutOfRange {
                    index: v as usize + 1,
                    arity: args.len(),
                })?)
                .clone(),
                Node::Apply(op, a, b) => {
                    let (x, y) = (
                        memo[a.index()].as_ref().expect("child evaluated"),
                        memo[b.index()].as_ref().expect("child evaluated"),
                    );
                    match op {
                        Op::Meet => x.meet_raw(y),
                        Op::Join => x.join_raw(y),
                    }
                }
            };
            memo[i] = Some(value);
        }
        Ok(roots
            .iter()
            .map(|r| memo[r.index()].clone().expect("root evaluated"))
            .collect())
    }

    /// Coordinatewise evaluation over `Part(n)^t`; coordinates run in parallel.
    pub fn eval_tuples(&self, roots: &[NodeId], args: &[PartitionTuple]) -> Result<Vec<PartitionTuple>> {
        let shape = match args.first() {
            Some(a) => a.shape(),
            None => {
                return Err(Error::invalid("evaluation needs at least one argument"));
            }
        };
        if let Some(bad) = args.iter().find(|a| a.shape() != shape) {
            return Err(Error::shape(shape, bad.shape()));
        }
        let per_coord: Vec<Vec<Partition>> = (0..shape.t)
            .into_par_iter()
            .map(|c| {
                let coord_args: Vec<&Partition> = args.iter().map(|a| &a.coords()[c]).collect();
                self.eval_partitions(roots, &coord_args)
            })
            .collect::<Result<_>>()?;
        let mut columns: Vec<Vec<Partition>> = vec![Vec::with_capacity(shape.t); roots.len()];
        for coord in per_coord {
            for (col, value) in columns.iter_mut().zip(coord) {
                col.push(value);
            }
        }
        columns.into_iter().map(PartitionTuple::new).collect()
    }

    /// Number of variable occurrences in the expanded tree.
    pub fn occurrences(&self, root: NodeId) -> BigUint {
        let seen = self.reachable(&[root]);
        let mut counts: Vec<Option<BigUint>> = vec![None; root.index() + 1];
        for i in 0..=root.index() {
            if !seen[i] {
                continue;
            }
            counts[i] = Some(match self.nodes[i] {
                Node::Var(_) => BigUint::one(),
                Node::Apply(_, a, b) => {
                    counts[a.index()].as_ref().expect("child") + counts[b.index()].as_ref().expect("child")
                }
            });
        }
        counts[root.index()].take().expect("root")
    }

    /// Expanded S-expression text. Shared subterms are written out in full.
    pub fn to_sexpr(&self, root: NodeId) -> String {
        enum Step {
            Visit(NodeId),
            Close,
        }
        let mut out = String::new();
        let mut stack = vec![Step::Visit(root)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Close => out.push(')'),
                Step::Visit(id) => {
                    if out.ends_with(|c: char| c != '(') && !out.is_empty() {
                        out.push(' ');
                    }
                    match self.nodes[id.index()] {
                        Node::Var(v) => {
                            out.push('x');
                            out.push_str(&(v as usize + 1).to_string());
                        }
                        Node::Apply(op, a, b) => {
                            out.push('(');
                            out.push(op.symbol());
                            stack.push(Step::Close);
                            stack.push(Step::Visit(b));
                            stack.push(Step::Visit(a));
                        }
                    }
                }
            }
        }
        out
    }

    /// Parses an S-expression into this arena, rejecting variables above `arity`.
    pub fn parse(&mut self, text: &str, arity: usize) -> Result<NodeId> {
        let tokens = tokenize(text)?;
        let mut frames: Vec<(Op, Vec<NodeId>)> = Vec::new();
        let mut result: Option<NodeId> = None;
        let mut iter = tokens.into_iter().peekable();
        while let Some(tok) = iter.next() {
            if result.is_some() {
                return Err(Error::parse(tok.text(), "trailing input after a complete term"));
            }
            let value = match tok {
                Token::Open => {
                    let op = match iter.next() {
                        Some(Token::Plus) => Op::Join,
                        Some(Token::Star) => Op::Meet,
                        Some(other) => return Err(Error::parse(other.text(), "expected `+` or `*` after `(`")),
                        None => return Err(Error::parse("(", "unbalanced parenthesis")),
                    };
                    frames.push((op, Vec::with_capacity(2)));
                    continue;
                }
                Token::Close => {
                    let (op, args) = frames.pop().ok_or_else(|| Error::parse(")", "unbalanced parenthesis"))?;
                    if args.len() != 2 {
                        return Err(Error::parse(")", format!("`{}` takes two operands, got {}", op.symbol(), args.len())));
                    }
                    self.apply(op, args[0], args[1])
                }
                Token::Var(i) => {
                    if i == 0 || i > arity || i > MAX_VARIABLES {
                        return Err(Error::VariableOutOfRange { index: i, arity });
                    }
                    self.var(i - 1)
                }
                Token::Plus | Token::Star => {
                    return Err(Error::parse(tok.text(), "operator outside parentheses"));
                }
            };
            match frames.last_mut() {
                Some((op, args)) => {
                    if args.len() == 2 {
                        return Err(Error::parse(op.symbol().to_string(), "too many operands"));
                    }
                    args.push(value);
                }
                None => result = Some(value),
            }
        }
        if !frames.is_empty() {
            return Err(Error::parse(text.trim_end(), "unbalanced parenthesis"));
        }
        result.ok_or_else(|| Error::parse(text, "empty term"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Plus,
    Star,
    Var(usize),
}

impl Token {
    fn text(&self) -> String {
        match self {
            Token::Open => "(".into(),
            Token::Close => ")".into(),
            Token::Plus => "+".into(),
            Token::Star => "*".into(),
            Token::Var(i) => format!("x{i}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'(' => {
                tokens.push(Token::Open);
                i += 1;
            }
            b')' => {
                tokens.push(Token::Close);
                i += 1;
            }
            b'+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            b'*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            b'x' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start + 1..i];
                let index = digits
                    .parse::<usize>()
                    .map_err(|_| Error::parse(&text[start..i], "malformed variable"))?;
                tokens.push(Token::Var(index));
            }
            _ => {
                let end = text[i..]
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .map_or(text.len(), |e| i + e);
                let end = end.max(i + text[i..].chars().next().map_or(1, char::len_utf8));
                return Err(Error::parse(&text[i..end], "unknown token"));
            }
        }
    }
    Ok(tokens)
}

/// A term of fixed arity with its own (possibly shared) arena.
#[derive(Debug, Clone)]
pub struct Term {
    arena: Arc<TermArena>,
    root: NodeId,
    arity: usize,
}

impl Term {
    pub fn new(arena: Arc<TermArena>, root: NodeId, arity: usize) -> Result<Self> {
        let used = arena.max_variable(root);
        if used > arity {
            return Err(Error::VariableOutOfRange { index: used, arity });
        }
        Ok(Term { arena, root, arity })
    }

    /// The 1-based variable `x{index}` of a `p`-ary term.
    pub fn variable(index: usize, arity: usize) -> Result<Self> {
        if index == 0 || index > arity {
            return Err(Error::VariableOutOfRange { index, arity });
        }
        let mut arena = TermArena::new();
        let root = arena.var(index - 1);
        Ok(Term {
            arena: Arc::new(arena),
            root,
            arity,
        })
    }

    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        let mut arena = TermArena::new();
        let root = arena.parse(text, arity)?;
        Ok(Term {
            arena: Arc::new(arena),
            root,
            arity,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn arena(&self) -> &TermArena {
        &self.arena
    }

    pub fn eval(&self, args: &[PartitionTuple]) -> Result<PartitionTuple> {
        self.check_arity(args.len())?;
        Ok(self.arena.eval_tuples(&[self.root], args)?.remove(0))
    }

    pub fn eval_partitions(&self, args: &[Partition]) -> Result<Partition> {
        self.check_arity(args.len())?;
        let refs: Vec<&Partition> = args.iter().collect();
        Ok(self.arena.eval_partitions(&[self.root], &refs)?.remove(0))
    }

    fn check_arity(&self, got: usize) -> Result<()> {
        if got != self.arity {
            return Err(Error::invalid(format!("term of arity {} applied to {got} arguments", self.arity)));
        }
        Ok(())
    }

    pub fn occurrences(&self) -> BigUint {
        self.arena.occurrences(self.root)
    }

    /// Number of meet/join nodes in the expanded tree.
    pub fn operation_count(&self) -> BigUint {
        self.occurrences() - 1u32
    }

    pub fn to_sexpr(&self) -> String {
        self.arena.to_sexpr(self.root)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

/// Circle principle: for a cycle `d_0..d_{m-1}` whose `i`-th edge term
/// evaluates to `equ(d_i, d_{i+1 mod m})`, the meet of the two arc joins
/// between positions `u < v` evaluates to `equ(d_u, d_v)`.
pub fn circle_term(arena: &mut TermArena, edges: &[NodeId], u: usize, v: usize) -> Result<NodeId> {
    let m = edges.len();
    if m == 0 || u >= v || v >= m {
        return Err(Error::invalid(format!("circle positions need 0 <= u < v < {m}, got ({u},{v})")));
    }
    let inner = arena.join_all(edges[u..v].iter().copied()).expect("nonempty arc");
    let outer = arena
        .join_all(edges[v..].iter().chain(&edges[..u]).copied())
        .expect("nonempty arc");
    Ok(arena.meet(inner, outer))
}

/// How the next leaf occurrence is chosen while growing a random term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrowthPolicy {
    /// Every leaf equally likely.
    #[default]
    Uniform,
    /// Leaf weight proportional to `2^-depth`.
    DepthWeighted,
}

/// One accepted replacement: a leaf under `parent` (whose other child was
/// `sibling_var`, if a variable) became `(op x_left x_right)`. Variables 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthStep {
    pub parent_op: Option<Op>,
    pub sibling_var: Option<usize>,
    pub op: Op,
    pub left: usize,
    pub right: usize,
}

impl GrowthStep {
    /// Whether this replacement cancels immediately by absorption:
    /// `x P (x_a Q x_b)` with `Q` the dual of `P` and `x` among `x_a, x_b`.
    pub fn absorbs(&self) -> bool {
        match (self.parent_op, self.sibling_var) {
            (Some(p), Some(x)) => self.op == p.dual() && (x == self.left || x == self.right),
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomTerm {
    pub term: Term,
    pub steps: Vec<GrowthStep>,
    pub rejections: usize,
}

#[derive(Debug, Clone, Copy)]
enum GrowNode {
    Var(usize),
    Apply(Op, usize, usize),
}

/// Grows a random `p`-ary term: start from a random variable, then `steps`
/// times replace a leaf occurrence by the meet or join of two distinct random
/// variables. Replacements that would cancel by absorption against a variable
/// sibling are redrawn.
pub fn random_term(p: usize, steps: usize, rng: &mut ShiftRng, policy: GrowthPolicy) -> Result<RandomTerm> {
    if p < 2 {
        return Err(Error::invalid("random terms need arity p >= 2"));
    }
    let mut nodes = vec![GrowNode::Var(rng.below_usize(p))];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut depth: Vec<u32> = vec![0];
    let mut leaves: Vec<usize> = vec![0];
    let mut log = Vec::with_capacity(steps);
    let mut rejections = 0usize;

    for _ in 0..steps {
        let slot = match policy {
            GrowthPolicy::Uniform => rng.below_usize(leaves.len()),
            GrowthPolicy::DepthWeighted => {
                let shallowest = leaves.iter().map(|&l| depth[l]).min().unwrap_or(0);
                let weights: Vec<f64> = leaves
                    .iter()
                    .map(|&l| 0.5f64.powi((depth[l] - shallowest) as i32))
                    .collect();
                let mut target = rng.unit_f64() * weights.iter().sum::<f64>();
                let mut pick = leaves.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if target < *w {
                        pick = i;
                        break;
                    }
                    target -= w;
                }
                pick
            }
        };
        let leaf = leaves[slot];
        let (parent_op, sibling_var) = match parent[leaf] {
            Some(up) => match nodes[up] {
                GrowNode::Apply(op, a, b) => {
                    let sib = if a == leaf { b } else { a };
                    let sv = match nodes[sib] {
                        GrowNode::Var(x) => Some(x),
                        GrowNode::Apply(..) => None,
                    };
                    (Some(op), sv)
                }
                GrowNode::Var(_) => unreachable!("parents are operation nodes"),
            },
            None => (None, None),
        };
        let step = loop {
            let op = if rng.coin() { Op::Join } else { Op::Meet };
            let left = rng.below_usize(p);
            let mut right = rng.below_usize(p - 1);
            if right >= left {
                right += 1;
            }
            let step = GrowthStep {
                parent_op,
                sibling_var,
                op,
                left,
                right,
            };
            if !step.absorbs() {
                break step;
            }
            rejections += 1;
        };
        let (l, r) = (nodes.len(), nodes.len() + 1);
        nodes.push(GrowNode::Var(step.left));
        nodes.push(GrowNode::Var(step.right));
        parent.extend([Some(leaf), Some(leaf)]);
        let d = depth[leaf] + 1;
        depth.extend([d, d]);
        nodes[leaf] = GrowNode::Apply(step.op, l, r);
        leaves[slot] = l;
        leaves.push(r);
        log.push(step);
    }

    // Children were appended after their parent, so a reverse sweep sees them first.
    let mut arena = TermArena::new();
    let mut ids: Vec<Option<NodeId>> = vec![None; nodes.len()];
    for i in (0..nodes.len()).rev() {
        ids[i] = Some(match nodes[i] {
            GrowNode::Var(x) => arena.var(x),
            GrowNode::Apply(op, a, b) => {
                let (a, b) = (ids[a].expect("child built"), ids[b].expect("child built"));
                arena.apply(op, a, b)
            }
        });
    }
    let root = ids[0].expect("root built");
    Ok(RandomTerm {
        term: Term {
            arena: Arc::new(arena),
            root,
            arity: p,
        },
        steps: log,
        rejections,
    })
}
