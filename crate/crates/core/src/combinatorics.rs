//! Exact Stirling and Bell arithmetic, and the exponents derived from them.
//!
//! `m(n) = maxS(k) * maxS(k-1)` with `k = (n-1)/2` is the exponent for which
//! the four-generator construction of [`crate::power`] applies, and
//! `mhat(n) = max(r, maxS(r)^2)` with `r = (k-1)/2` is the exponent of the
//! order-type `1+1+2` construction.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Stirling numbers of the second kind, row by row: `rows[n][r] = S(n, r)`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    rows: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    /// Rows `0..=max_n` via `S(n,r) = r*S(n-1,r) + S(n-1,r-1)`.
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
        rows.push(vec![BigUint::one()]);
        for n in 1..=max_n {
            let prev = &rows[n - 1];
            let mut row = vec![BigUint::zero(); n + 1];
            for (r, slot) in row.iter_mut().enumerate().skip(1) {
                let stay = prev.get(r).map(|s| s * r).unwrap_or_default();
                *slot = stay + &prev[r - 1];
            }
            rows.push(row);
        }
        StirlingTable { rows }
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, n: usize, r: usize) -> BigUint {
        self.rows[n].get(r).cloned().unwrap_or_default()
    }

    pub fn row(&self, n: usize) -> &[BigUint] {
        &self.rows[n]
    }

    pub fn bell(&self, n: usize) -> BigUint {
        self.rows[n].iter().sum()
    }

    /// `maxS(n)` and every `r` attaining it, ascending.
    pub fn max_stirling(&self, n: usize) -> (BigUint, Vec<usize>) {
        let row = &self.rows[n];
        let best = row.iter().max().cloned().unwrap_or_default();
        let at = (0..row.len()).filter(|&r| row[r] == best).collect();
        (best, at)
    }
}

pub fn stirling2(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    StirlingTable::new(n).get(n, r)
}

pub fn bell(n: usize) -> BigUint {
    StirlingTable::new(n).bell(n)
}

/// `maxS(n)` with all maximizing block counts; ties are reported in full
/// (`n = 2` gives `(1, [1, 2])`).
pub fn max_stirling(n: usize) -> Result<(BigUint, Vec<usize>)> {
    if n == 0 {
        return Err(Error::invalid("maxS(n) needs n >= 1"));
    }
    Ok(StirlingTable::new(n).max_stirling(n))
}

/// Smallest block count attaining `maxS(n)`.
pub fn preferred_block_count(n: usize) -> Result<usize> {
    Ok(max_stirling(n)?.1[0])
}

/// `k = floor((n-1)/2)`, the half-size of the Zádori configuration on `n` points.
pub fn half_size(n: usize) -> usize {
    (n - 1) / 2
}

fn m_from(table: &StirlingTable, n: usize) -> BigUint {
    let k = half_size(n);
    table.max_stirling(k).0 * table.max_stirling(k - 1).0
}

fn mhat_from(table: &StirlingTable, n: usize) -> BigUint {
    let r = (half_size(n) - 1) / 2;
    let square = {
        let s = table.max_stirling(r).0;
        &s * &s
    };
    square.max(BigUint::from(r))
}

pub fn m_of_n(n: usize) -> Result<BigUint> {
    if n < 5 {
        return Err(Error::invalid(format!("m(n) is defined for n >= 5, got {n}")));
    }
    Ok(m_from(&StirlingTable::new(half_size(n)), n))
}

pub fn mhat_of_n(n: usize) -> Result<BigUint> {
    if n < 7 {
        return Err(Error::invalid(format!("mhat(n) is defined for n >= 7, got {n}")));
    }
    Ok(mhat_from(&StirlingTable::new(half_size(n)), n))
}

/// `Bell(n)·Bell(n-1)·Bell(n-2)·Bell(n-3)`: above this exponent `Part(n)^t`
/// is not four-generated (pigeonhole on coordinate quadruples).
pub fn bell_product_bound(n: usize) -> Result<BigUint> {
    if n < 4 {
        return Err(Error::invalid(format!("the Bell product bound needs n >= 4, got {n}")));
    }
    let table = StirlingTable::new(n);
    Ok((n - 3..=n).map(|i| table.bell(i)).product())
}

/// Rounds to three significant digits: `309…` with 90 digits gives `3.09e89`.
pub fn scientific3(x: &BigUint) -> String {
    let digits = x.to_string();
    if digits.len() <= 3 {
        return digits;
    }
    let lead: u32 = digits[..3].parse().expect("digits");
    let rest = &digits[3..];
    let round_up = rest.as_bytes()[0] >= b'5';
    let mut mantissa = lead + u32::from(round_up);
    let mut exponent = digits.len() - 1;
    if mantissa == 1000 {
        mantissa = 100;
        exponent += 1;
    }
    format!("{}.{:02}e{}", mantissa / 100, mantissa % 100, exponent)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub n: usize,
    pub max_s: BigUint,
    pub m: Option<BigUint>,
    pub mhat: Option<BigUint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
}

/// One row per requested size, all read from a single Stirling table.
pub fn table_rows(ns: &[usize]) -> Vec<TableRow> {
    let top = ns.iter().copied().max().unwrap_or(1);
    let table = StirlingTable::new(top);
    ns.iter()
        .map(|&n| TableRow {
            n,
            max_s: table.max_stirling(n).0,
            m: (n >= 5).then(|| m_from(&table, n)),
            mhat: (n >= 7).then(|| mhat_from(&table, n)),
        })
        .collect()
}

/// Renders rows `1..=max_n` followed by the reference sizes 97, 98, 99, 100
/// and 2020 when `with_reference` is set. Exact values up to 15 digits are
/// printed in full, larger ones to three significant digits.
pub fn render_tables(max_n: usize, with_reference: bool, format: TableFormat) -> Result<String> {
    if max_n < 5 {
        return Err(Error::invalid("tables need max_n >= 5"));
    }
    let mut ns: Vec<usize> = (1..=max_n).collect();
    if with_reference {
        ns.extend([97, 98, 99, 100, 2020].into_iter().filter(|&n| n > max_n));
    }
    let rows = table_rows(&ns);
    let show = |x: &BigUint| {
        let s = x.to_string();
        if s.len() <= 15 { s } else { scientific3(x) }
    };
    let opt = |x: &Option<BigUint>| x.as_ref().map(show).unwrap_or_default();
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("n,maxS,m,mhat\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{}", r.n, show(&r.max_s), opt(&r.m), opt(&r.mhat));
            }
        }
        TableFormat::Text => {
            let _ = writeln!(out, "{:>5}  {:>18}  {:>18}  {:>18}", "n", "maxS(n)", "m(n)", "mhat(n)");
            for r in &rows {
                let _ = writeln!(out, "{:>5}  {:>18}  {:>18}  {:>18}", r.n, show(&r.max_s), opt(&r.m), opt(&r.mhat));
            }
        }
    }
    Ok(out)
}
