//! Partitions of `{1..n}` viewed as equivalence relations, and their direct powers.
//!
//! A [`Partition`] stores one block id per element in first-occurrence
//! canonical form: element 1 is in block 0, and each new block gets the next
//! id in the order of its minimum element. Equal partitions therefore have
//! equal representations, which makes hashing and equality O(n).
//!
//! The text format lists blocks by minimum element with ascending members,
//! `,` between elements and `|` between blocks, singletons included:
//! `{{1,3},{2,4},{5}}` is `1,3|2,4|5`. Tuples join coordinates with `;`
//! and shapes are written `P<n>^<t>`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rng::ShiftRng;

const UNSET: u16 = u16::MAX;
/// Largest supported ground set.
pub const MAX_N: usize = (u16::MAX - 1) as usize;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    ids: Box<[u16]>,
    blocks: u16,
}

impl Partition {
    fn check_n(n: usize) -> Result<()> {
        if n == 0 || n > MAX_N {
            return Err(Error::invalid(format!("ground set size {n} not in 1..={MAX_N}")));
        }
        Ok(())
    }

    /// The least partition: all blocks singletons.
    pub fn bottom(n: usize) -> Result<Self> {
        Self::check_n(n)?;
        Ok(Partition {
            ids: (0..n as u16).collect(),
            blocks: n as u16,
        })
    }

    /// The greatest partition: one block.
    pub fn top(n: usize) -> Result<Self> {
        Self::check_n(n)?;
        Ok(Partition {
            ids: vec![0; n].into_boxed_slice(),
            blocks: 1,
        })
    }

    /// `equ(u, v)`: the block `{u, v}` plus singletons. Elements are 1-based.
    pub fn atom(n: usize, u: usize, v: usize) -> Result<Self> {
        Self::check_n(n)?;
        if u == v || u == 0 || v == 0 || u > n || v > n {
            return Err(Error::invalid(format!("atom ({u},{v}) needs distinct elements in 1..={n}")));
        }
        let (lo, hi) = (u.min(v) - 1, u.max(v) - 1);
        let mut labels: Vec<usize> = (0..n).collect();
        labels[hi] = lo;
        Ok(Self::from_labels(&labels))
    }

    /// Canonicalizes arbitrary per-element labels (0-based element order).
    pub fn from_labels(labels: &[usize]) -> Self {
        let n = labels.len();
        assert!(n > 0 && n <= MAX_N, "ground set size {n} out of range");
        let mut map: HashMap<usize, u16> = HashMap::with_capacity(n);
        let mut ids = Vec::with_capacity(n);
        for &l in labels {
            let next = map.len() as u16;
            ids.push(*map.entry(l).or_insert(next));
        }
        Partition {
            blocks: map.len() as u16,
            ids: ids.into_boxed_slice(),
        }
    }

    /// Builds the partition whose listed blocks are the given 1-based sets;
    /// unlisted elements become singletons. Blocks must be disjoint.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        Self::check_n(n)?;
        let mut labels: Vec<usize> = (0..n).map(|i| n + i).collect();
        let mut seen = vec![false; n];
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                if e == 0 || e > n {
                    return Err(Error::invalid(format!("element {e} outside 1..={n}")));
                }
                if std::mem::replace(&mut seen[e - 1], true) {
                    return Err(Error::invalid(format!("element {e} listed twice")));
                }
                labels[e - 1] = b;
            }
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks as usize
    }

    /// Block ids in canonical form, indexed by 0-based element.
    pub fn block_ids(&self) -> &[u16] {
        &self.ids
    }

    /// Whether 1-based elements `u` and `v` share a block.
    pub fn related(&self, u: usize, v: usize) -> bool {
        self.ids[u - 1] == self.ids[v - 1]
    }

    /// Blocks as sorted 1-based element lists, ordered by minimum element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count()];
        for (i, &b) in self.ids.iter().enumerate() {
            out[b as usize].push(i + 1);
        }
        out
    }

    /// The block containing the 1-based element `x`.
    pub fn block_of(&self, x: usize) -> Vec<usize> {
        let b = self.ids[x - 1];
        (1..=self.n()).filter(|&y| self.ids[y - 1] == b).collect()
    }

    pub fn is_bottom(&self) -> bool {
        self.block_count() == self.n()
    }

    pub fn is_top(&self) -> bool {
        self.blocks == 1
    }

    /// The pair `{u, v}` (1-based, `u < v`) if this is an atom.
    pub fn as_atom(&self) -> Option<(usize, usize)> {
        if self.block_count() + 1 != self.n() {
            return None;
        }
        let mut first_of = vec![usize::MAX; self.block_count()];
        for (i, &b) in self.ids.iter().enumerate() {
            let slot = &mut first_of[b as usize];
            if *slot == usize::MAX {
                *slot = i;
            } else {
                return Some((*slot + 1, i + 1));
            }
        }
        None
    }

    fn same_n(&self, other: &Partition) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::shape(format!("Part({})", self.n()), format!("Part({})", other.n())));
        }
        Ok(())
    }

    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.same_n(other)?;
        Ok(self.meet_raw(other))
    }

    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.same_n(other)?;
        Ok(self.join_raw(other))
    }

    pub fn leq(&self, other: &Partition) -> Result<bool> {
        self.same_n(other)?;
        Ok(self.leq_raw(other))
    }

    /// Hasse-diagram distance in the semimodular lattice `Part(n)`:
    /// the heights of `[x, x+y]` and `[y, x+y]` added together.
    pub fn distance(&self, other: &Partition) -> Result<usize> {
        let j = self.join(other)?;
        Ok(self.block_count() + other.block_count() - 2 * j.block_count())
    }

    /// Block intersections. Caller guarantees equal `n`.
    pub(crate) fn meet_raw(&self, other: &Partition) -> Partition {
        debug_assert_eq!(self.n(), other.n());
        let (bx, by) = (self.block_count(), other.block_count());
        let mut ids = Vec::with_capacity(self.n());
        let mut next = 0u16;
        if bx * by <= 4 * self.n() + 256 {
            let mut table = vec![UNSET; bx * by];
            for (&x, &y) in self.ids.iter().zip(other.ids.iter()) {
                let slot = &mut table[x as usize * by + y as usize];
                if *slot == UNSET {
                    *slot = next;
                    next += 1;
                }
                ids.push(*slot);
            }
        } else {
            let mut table: HashMap<(u16, u16), u16> = HashMap::with_capacity(self.n());
            for (&x, &y) in self.ids.iter().zip(other.ids.iter()) {
                let id = *table.entry((x, y)).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                ids.push(id);
            }
        }
        Partition {
            ids: ids.into_boxed_slice(),
            blocks: next,
        }
    }

    /// Transitive hull of the union: union-find over the blocks of `self`,
    /// linking every pair of `self`-blocks that meet a common `other`-block.
    pub(crate) fn join_raw(&self, other: &Partition) -> Partition {
        debug_assert_eq!(self.n(), other.n());
        if self.blocks == 1 || other.blocks == 1 {
            return Partition {
                ids: vec![0; self.n()].into_boxed_slice(),
                blocks: 1,
            };
        }
        let mut parent: Vec<u16> = (0..self.blocks).collect();
        fn find(parent: &mut [u16], mut x: u16) -> u16 {
            while parent[x as usize] != x {
                let up = parent[parent[x as usize] as usize];
                parent[x as usize] = up;
                x = up;
            }
            x
        }
        let mut anchor = vec![UNSET; other.block_count()];
        for (&x, &y) in self.ids.iter().zip(other.ids.iter()) {
            let a = &mut anchor[y as usize];
            if *a == UNSET {
                *a = x;
            } else {
                let (ra, rb) = (find(&mut parent, *a), find(&mut parent, x));
                if ra != rb {
                    // Keep the smaller id as root so roots follow first occurrence.
                    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                    parent[hi as usize] = lo;
                }
            }
        }
        let mut relabel = vec![UNSET; self.block_count()];
        let mut next = 0u16;
        let ids: Vec<u16> = self
            .ids
            .iter()
            .map(|&x| {
                let r = find(&mut parent, x) as usize;
                if relabel[r] == UNSET {
                    relabel[r] = next;
                    next += 1;
                }
                relabel[r]
            })
            .collect();
        Partition {
            ids: ids.into_boxed_slice(),
            blocks: next,
        }
    }

    pub(crate) fn leq_raw(&self, other: &Partition) -> bool {
        if self.blocks < other.blocks {
            return false;
        }
        let mut image = vec![UNSET; self.block_count()];
        for (&x, &y) in self.ids.iter().zip(other.ids.iter()) {
            let slot = &mut image[x as usize];
            if *slot == UNSET {
                *slot = y;
            } else if *slot != y {
                return false;
            }
        }
        true
    }

    /// Lifts a partition of an ordered subset into `Part(n)`: local element
    /// `i` (1-based) becomes `elements[i-1]`, and everything outside the
    /// subset is a singleton.
    pub fn embed(&self, elements: &[usize], n: usize) -> Result<Partition> {
        if elements.len() != self.n() {
            return Err(Error::shape(format!("{} elements", self.n()), format!("{} elements", elements.len())));
        }
        let blocks: Vec<Vec<usize>> = self
            .blocks()
            .into_iter()
            .map(|b| b.into_iter().map(|i| elements[i - 1]).collect())
            .collect();
        Partition::from_blocks(n, &blocks)
    }

    /// Restriction to an ordered subset, as a partition of `1..=elements.len()`.
    pub fn restrict(&self, elements: &[usize]) -> Result<Partition> {
        if elements.is_empty() || elements.iter().any(|&e| e == 0 || e > self.n()) {
            return Err(Error::invalid("restriction subset must be nonempty and inside the ground set"));
        }
        let labels: Vec<usize> = elements.iter().map(|&e| self.ids[e - 1] as usize).collect();
        Ok(Partition::from_labels(&labels))
    }

    /// Canonical text, e.g. `1,3|2,4|5`.
    pub fn to_canonical(&self) -> String {
        self.to_string()
    }

    /// Parses partition text over exactly the elements `1..=n`. Blocks and
    /// elements may appear in any order; the result is canonical.
    pub fn from_canonical(s: &str, n: usize) -> Result<Partition> {
        let p = Partition::parse_any(s)?;
        if p.n() != n {
            return Err(Error::parse(s, format!("lists {} elements, expected {n}", p.n())));
        }
        Ok(p)
    }

    fn parse_any(s: &str) -> Result<Partition> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::parse(s, "empty partition"));
        }
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut total = 0usize;
        for block_text in s.split('|') {
            if block_text.is_empty() {
                return Err(Error::parse(s, "empty block"));
            }
            let mut block = Vec::new();
            for tok in block_text.split(',') {
                let e: usize = tok
                    .parse()
                    .map_err(|_| Error::parse(tok, "expected a positive element number"))?;
                if e == 0 || e > MAX_N {
                    return Err(Error::parse(tok, "element out of range"));
                }
                block.push(e);
                total += 1;
            }
            blocks.push(block);
        }
        let mut seen = vec![false; total];
        for &e in blocks.iter().flatten() {
            if e > total {
                return Err(Error::parse(e.to_string(), format!("element out of range 1..={total}")));
            }
            if std::mem::replace(&mut seen[e - 1], true) {
                return Err(Error::parse(e.to_string(), "duplicate element"));
            }
        }
        Partition::from_blocks(total, &blocks)
    }

    /// Applies a relabeling of the ground set (an automorphism of `Part(n)`).
    pub fn permute(&self, perm: &Permutation) -> Result<Partition> {
        if perm.len() != self.n() {
            return Err(Error::shape(format!("permutation of {}", self.n()), format!("permutation of {}", perm.len())));
        }
        let mut labels = vec![0usize; self.n()];
        for (i, &b) in self.ids.iter().enumerate() {
            labels[perm.image0(i)] = b as usize;
        }
        Ok(Partition::from_labels(&labels))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (bi, block) in self.blocks().iter().enumerate() {
            if bi > 0 {
                f.write_str("|")?;
            }
            for (ei, e) in block.iter().enumerate() {
                if ei > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({self})")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses partition text; `n` is the number of listed elements.
    fn from_str(s: &str) -> Result<Self> {
        Partition::parse_any(s)
    }
}

/// Identifies `Part(n)^t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeShape {
    pub n: usize,
    pub t: usize,
}

impl LatticeShape {
    pub fn new(n: usize, t: usize) -> Result<Self> {
        Partition::check_n(n)?;
        if t == 0 {
            return Err(Error::invalid("exponent t must be at least 1"));
        }
        Ok(LatticeShape { n, t })
    }
}

impl fmt::Display for LatticeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}^{}", self.n, self.t)
    }
}

impl FromStr for LatticeShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('P')
            .ok_or_else(|| Error::parse(s, "shape must look like P<n>^<t>"))?;
        let (n, t) = body
            .split_once('^')
            .ok_or_else(|| Error::parse(s, "shape must look like P<n>^<t>"))?;
        let n: usize = n.parse().map_err(|_| Error::parse(n, "bad base size"))?;
        let t: usize = t.parse().map_err(|_| Error::parse(t, "bad exponent"))?;
        LatticeShape::new(n, t).map_err(|e| Error::parse(s, e.to_string()))
    }
}

/// An element of `Part(n)^t`; all lattice operations act coordinatewise.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionTuple {
    coords: Vec<Partition>,
}

impl PartitionTuple {
    pub fn new(coords: Vec<Partition>) -> Result<Self> {
        let first = coords.first().ok_or_else(|| Error::invalid("a tuple needs at least one coordinate"))?;
        if let Some(bad) = coords.iter().find(|c| c.n() != first.n()) {
            return Err(Error::shape(format!("Part({})", first.n()), format!("Part({})", bad.n())));
        }
        Ok(PartitionTuple { coords })
    }

    pub fn bottom(shape: LatticeShape) -> Self {
        PartitionTuple {
            coords: vec![Partition::bottom(shape.n).expect("valid shape"); shape.t],
        }
    }

    pub fn top(shape: LatticeShape) -> Self {
        PartitionTuple {
            coords: vec![Partition::top(shape.n).expect("valid shape"); shape.t],
        }
    }

    /// `x` at coordinate `j` (0-based), bottom elsewhere.
    pub fn unit(shape: LatticeShape, j: usize, x: Partition) -> Result<Self> {
        if j >= shape.t || x.n() != shape.n {
            return Err(Error::invalid(format!("cannot place Part({}) element at coordinate {j} of {shape}", x.n())));
        }
        let mut t = PartitionTuple::bottom(shape);
        t.coords[j] = x;
        Ok(t)
    }

    pub fn shape(&self) -> LatticeShape {
        LatticeShape {
            n: self.coords[0].n(),
            t: self.coords.len(),
        }
    }

    pub fn coords(&self) -> &[Partition] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Partition> {
        self.coords
    }

    fn same_shape(&self, other: &PartitionTuple) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(self.shape(), other.shape()));
        }
        Ok(())
    }

    pub fn meet(&self, other: &PartitionTuple) -> Result<PartitionTuple> {
        self.same_shape(other)?;
        Ok(self.meet_raw(other))
    }

    pub fn join(&self, other: &PartitionTuple) -> Result<PartitionTuple> {
        self.same_shape(other)?;
        Ok(self.join_raw(other))
    }

    pub fn leq(&self, other: &PartitionTuple) -> Result<bool> {
        self.same_shape(other)?;
        Ok(self.coords.iter().zip(&other.coords).all(|(x, y)| x.leq_raw(y)))
    }

    /// Sum of coordinate distances (the Hasse distance in the power).
    pub fn distance(&self, other: &PartitionTuple) -> Result<usize> {
        self.same_shape(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(x, y)| x.block_count() + y.block_count() - 2 * x.join_raw(y).block_count())
            .sum())
    }

    pub(crate) fn meet_raw(&self, other: &PartitionTuple) -> PartitionTuple {
        PartitionTuple {
            coords: self.coords.iter().zip(&other.coords).map(|(x, y)| x.meet_raw(y)).collect(),
        }
    }

    pub(crate) fn join_raw(&self, other: &PartitionTuple) -> PartitionTuple {
        PartitionTuple {
            coords: self.coords.iter().zip(&other.coords).map(|(x, y)| x.join_raw(y)).collect(),
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.coords.iter().all(Partition::is_bottom)
    }

    pub fn is_top(&self) -> bool {
        self.coords.iter().all(Partition::is_top)
    }

    /// `(j, u, v)` if this tuple is an atom of the power: `equ(u,v)` at
    /// coordinate `j`, bottom elsewhere.
    pub fn as_unit_atom(&self) -> Option<(usize, usize, usize)> {
        let mut found = None;
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_bottom() {
                continue;
            }
            if found.is_some() {
                return None;
            }
            let (u, v) = c.as_atom()?;
            found = Some((j, u, v));
        }
        found
    }

    /// Parses `;`-separated coordinates, checking the result against `shape`.
    pub fn parse_with_shape(s: &str, shape: LatticeShape) -> Result<Self> {
        let t: PartitionTuple = s.parse()?;
        if t.shape() != shape {
            return Err(Error::parse(s, format!("tuple has shape {}, expected {shape}", t.shape())));
        }
        Ok(t)
    }
}

impl From<Partition> for PartitionTuple {
    fn from(p: Partition) -> Self {
        PartitionTuple { coords: vec![p] }
    }
}

impl fmt::Display for PartitionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PartitionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartitionTuple({self})")
    }
}

impl FromStr for PartitionTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .trim()
            .split(';')
            .map(str::parse)
            .collect::<Result<Vec<Partition>>>()?;
        PartitionTuple::new(coords).map_err(|e| Error::parse(s, e.to_string()))
    }
}

/// A bijection of `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn random(n: usize, rng: &mut ShiftRng) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut images);
        Permutation { images }
    }

    /// From 1-based images `images[i-1] = τ(i)`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in images {
            if x == 0 || x > n || std::mem::replace(&mut seen[x - 1], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        Ok(Permutation {
            images: images.iter().map(|x| x - 1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Image of the 1-based element `x`.
    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1] + 1
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Permutation { images }
    }

    fn image0(&self, i: usize) -> usize {
        self.images[i]
    }
}

/// All partitions of `{1..size}` with exactly `r` blocks, in lexicographic
/// order of their restricted growth strings (equivalently, of canonical form).
pub fn enumerate_r_block_partitions(size: usize, r: usize) -> Result<Vec<Partition>> {
    if size == 0 || r == 0 || r > size {
        return Err(Error::invalid(format!("block count {r} not in 1..={size}")));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; size];
    // rgs[0] is fixed at 0; fill positions 1.. keeping room for the blocks still needed.
    fn fill(pos: usize, used: usize, r: usize, rgs: &mut [usize], out: &mut Vec<Partition>) {
        let size = rgs.len();
        if pos == size {
            if used == r {
                out.push(Partition::from_labels(rgs));
            }
            return;
        }
        let remaining = size - pos;
        for label in 0..=used.min(r - 1) {
            let used_after = used.max(label + 1);
            if r - used_after > remaining - 1 {
                continue;
            }
            rgs[pos] = label;
            fill(pos + 1, used_after, r, rgs, out);
        }
    }
    fill(1, 1, r, &mut rgs, &mut out);
    Ok(out)
}

/// Uniform sampler over `Part(n)` by unranking restricted growth strings.
///
/// `completions[rem][m]` counts the ways to label `rem` further elements when
/// `m` blocks are already open, so `completions[n-1][1]` is the Bell number.
#[derive(Debug, Clone)]
pub struct PartitionSampler {
    n: usize,
    completions: Vec<Vec<BigUint>>,
    /// The same table in machine words, when `Bell(n)` fits.
    small: Option<Vec<Vec<u64>>>,
}

impl PartitionSampler {
    pub fn new(n: usize) -> Result<Self> {
        Partition::check_n(n)?;
        let mut completions: Vec<Vec<BigUint>> = Vec::with_capacity(n);
        completions.push(vec![BigUint::one(); n + 1]);
        for rem in 1..n {
            let prev = &completions[rem - 1];
            let row: Vec<BigUint> = (0..=n)
                .map(|m| {
                    let stay = prev[m].clone() * m;
                    let open = if m < n { prev[m + 1].clone() } else { BigUint::zero() };
                    stay + open
                })
                .collect();
            completions.push(row);
        }
        // Cells reachable from the start never exceed Bell(n); the others saturate.
        let small = u64::try_from(&completions[n - 1][1]).is_ok().then(|| {
            completions
                .iter()
                .map(|row| row.iter().map(|x| u64::try_from(x).unwrap_or(u64::MAX)).collect())
                .collect()
        });
        Ok(PartitionSampler { n, completions, small })
    }

    /// `Bell(n)`.
    pub fn total(&self) -> &BigUint {
        &self.completions[self.n - 1][1]
    }

    /// The partition with the given rank in restricted-growth-string order.
    pub fn unrank(&self, rank: &BigUint) -> Result<Partition> {
        if rank >= self.total() {
            return Err(Error::invalid("rank beyond Bell(n)"));
        }
        let mut rank = rank.clone();
        let mut labels = vec![0usize; self.n];
        let mut open = 1usize;
        for (pos, label) in labels.iter_mut().enumerate().skip(1) {
            let rem = self.n - pos - 1;
            let each = &self.completions[rem][open];
            let existing = each * open;
            if rank < existing {
                let q = &rank / each;
                *label = usize::try_from(&q).expect("label fits");
                rank -= q * each;
            } else {
                rank -= existing;
                *label = open;
                open += 1;
            }
        }
        Ok(Partition::from_labels(&labels))
    }

    pub fn sample(&self, rng: &mut ShiftRng) -> Partition {
        if let Some(small) = &self.small {
            // Draws exactly what `below_big` would for a bound below 2^64.
            let mut rank = rng.below(small[self.n - 1][1]);
            let mut labels = vec![0usize; self.n];
            let mut open = 1usize;
            for (pos, label) in labels.iter_mut().enumerate().skip(1) {
                let each = small[self.n - pos - 1][open];
                let existing = each * open as u64;
                if rank < existing {
                    *label = (rank / each) as usize;
                    rank %= each;
                } else {
                    rank -= existing;
                    *label = open;
                    open += 1;
                }
            }
            return Partition::from_labels(&labels);
        }
        let rank = rng.below_big(self.total());
        self.unrank(&rank).expect("rank in range")
    }
}

/// One uniform draw from `Part(n)`.
pub fn random_partition(n: usize, rng: &mut ShiftRng) -> Result<Partition> {
    Ok(PartitionSampler::new(n)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn atoms() {
        assert_eq!(Partition::atom(5, 1, 3).unwrap().to_string(), "1,3|2|4|5");
        assert_eq!(Partition::atom(5, 5, 1).unwrap().to_string(), "1,5|2|3|4");
        assert!(Partition::atom(2, 1, 2).unwrap().is_top());
        assert!(Partition::atom(5, 2, 2).is_err());
        assert!(Partition::atom(5, 0, 2).is_err());
        assert!(Partition::atom(5, 1, 6).is_err());
        assert_eq!(Partition::atom(5, 4, 2).unwrap().as_atom(), Some((2, 4)));
    }

    #[test]
    fn meet_examples() {
        assert_eq!(p("1,2,3|4,5").meet(&p("1,2|3,4,5")).unwrap(), p("1,2|3|4,5"));
        assert!(p("1,2,3|4,5").meet(&p("1,4|2,5|3")).unwrap().is_bottom());
        let x = p("1,3|2,4|5");
        assert_eq!(x.meet(&x).unwrap(), x);
        assert!(x.meet(&p("1|2|3")).is_err());
    }

    #[test]
    fn join_examples() {
        let j = Partition::atom(5, 1, 2).unwrap().join(&Partition::atom(5, 2, 3).unwrap()).unwrap();
        assert_eq!(j.to_string(), "1,2,3|4|5");
        assert!(p("1,4|2,5|3").join(&p("2,4|3,5|1")).unwrap().is_top());
        let x = p("1,3|2,4|5");
        assert_eq!(x.join(&Partition::bottom(5).unwrap()).unwrap(), x);
    }

    #[test]
    fn leq_examples() {
        let b = Partition::bottom(5).unwrap();
        assert!(b.leq(&p("1,3|2,4|5")).unwrap());
        assert!(p("1,2|3|4|5").leq(&p("1,2,3|4,5")).unwrap());
        assert!(!p("1,4|2|3|5").leq(&p("1,2,3|4,5")).unwrap());
    }

    #[test]
    fn block_counts_and_distance() {
        assert_eq!(Partition::bottom(7).unwrap().block_count(), 7);
        assert_eq!(Partition::top(7).unwrap().block_count(), 1);
        assert_eq!(p("1,3|2,4|5").block_count(), 3);
        let x = p("1,2|3|4");
        assert_eq!(x.distance(&x).unwrap(), 0);
        assert_eq!(Partition::bottom(6).unwrap().distance(&Partition::top(6).unwrap()).unwrap(), 5);
        assert_eq!(x.distance(&p("3,4|1|2")).unwrap(), 2);
    }

    #[test]
    fn text_format() {
        let u = Partition::from_blocks(5, &[vec![1, 3], vec![2, 4], vec![5]]).unwrap();
        assert_eq!(u.to_canonical(), "1,3|2,4|5");
        assert_eq!(Partition::from_canonical("1|2|3", 3).unwrap(), Partition::bottom(3).unwrap());
        assert_eq!(p("2,4|3,5|1"), p("1|2,4|3,5"));
        match Partition::from_canonical("1,3|2,3", 3) {
            Err(Error::Parse { token, .. }) => assert_eq!(token, "3"),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(Partition::from_canonical("1,2|4", 3).is_err());
        assert!(Partition::from_canonical("1,2", 3).is_err());
        assert!(Partition::from_canonical("1,,2|3", 3).is_err());
        assert!(Partition::from_canonical("1|x|3", 3).is_err());
        assert!("".parse::<Partition>().is_err());
    }

    #[test]
    fn shape_and_tuple_text() {
        let s: LatticeShape = "P12^61".parse().unwrap();
        assert_eq!((s.n, s.t), (12, 61));
        assert_eq!(s.to_string(), "P12^61");
        assert!("P12".parse::<LatticeShape>().is_err());
        assert!("P0^3".parse::<LatticeShape>().is_err());
        assert!("P3^0".parse::<LatticeShape>().is_err());
        let t: PartitionTuple = "1,2|3;1|2,3".parse().unwrap();
        assert_eq!(t.shape(), LatticeShape::new(3, 2).unwrap());
        assert_eq!(t.to_string(), "1,2|3;1|2,3");
        assert!("1,2|3;1|2".parse::<PartitionTuple>().is_err());
    }

    #[test]
    fn tuple_operations() {
        let shape = LatticeShape::new(12, 61).unwrap();
        let (b, t) = (PartitionTuple::bottom(shape), PartitionTuple::top(shape));
        assert_eq!(b.distance(&t).unwrap(), 671);
        let x: PartitionTuple = "1,2|3;1|2,3".parse().unwrap();
        let bot = PartitionTuple::bottom(x.shape());
        assert_eq!(x.join(&bot).unwrap(), x);
        let y: PartitionTuple = "1,3|2;1|2,3".parse().unwrap();
        assert!(!x.leq(&y).unwrap());
        assert!(!y.leq(&x).unwrap());
        assert!(x.meet(&PartitionTuple::bottom(shape)).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let three = enumerate_r_block_partitions(3, 2).unwrap();
        let texts: Vec<String> = three.iter().map(|p| p.to_string()).collect();
        assert_eq!(texts, ["1,2|3", "1,3|2", "1|2,3"]);
        assert_eq!(enumerate_r_block_partitions(2, 1).unwrap(), vec![p("1,2")]);
        assert_eq!(enumerate_r_block_partitions(4, 2).unwrap().len(), 7);
        assert!(enumerate_r_block_partitions(3, 0).is_err());
        assert!(enumerate_r_block_partitions(3, 4).is_err());
    }

    #[test]
    fn embed_and_restrict() {
        let local = p("1,2|3");
        let lifted = local.embed(&[2, 5, 7], 8).unwrap();
        assert_eq!(lifted.to_string(), "1|2,5|3|4|6|7|8");
        assert_eq!(lifted.restrict(&[2, 5, 7]).unwrap(), local);
    }

    #[test]
    fn permutation_relabels() {
        let perm = Permutation::from_images(&[2, 3, 1]).unwrap();
        assert_eq!(p("1,2|3").permute(&perm).unwrap(), p("2,3|1"));
        assert_eq!(p("1,2|3").permute(&Permutation::identity(3)).unwrap(), p("1,2|3"));
        assert!(Permutation::from_images(&[1, 1, 2]).is_err());
    }

    #[test]
    fn sampler_counts_and_unranks_in_order() {
        let s = PartitionSampler::new(4).unwrap();
        assert_eq!(*s.total(), BigUint::from(15u32));
        let all: Vec<Partition> = (0..15u32).map(|r| s.unrank(&BigUint::from(r)).unwrap()).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(s.unrank(&BigUint::from(15u32)).is_err());
        assert_eq!(*PartitionSampler::new(1).unwrap().total(), BigUint::one());
        let mut rng = ShiftRng::new(1);
        assert_eq!(random_partition(1, &mut rng).unwrap().to_string(), "1");
    }

    #[test]
    fn word_sampler_matches_unranking() {
        for n in [2, 5, 12, 25] {
            let s = PartitionSampler::new(n).unwrap();
            assert!(s.small.is_some());
            let (mut a, mut b) = (ShiftRng::new(n as u64), ShiftRng::new(n as u64));
            for _ in 0..200 {
                assert_eq!(s.sample(&mut a), s.unrank(&b.below_big(s.total())).unwrap());
            }
        }
        assert!(PartitionSampler::new(26).unwrap().small.is_none());
    }
}
