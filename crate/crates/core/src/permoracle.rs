//! Brute-force enumeration of derangements and signed derangements.
//!
//! Every (signed) permutation is generated and filtered by `pi_i != i`; the
//! resulting histograms of `maj` / `fmaj` are the independent reference the
//! closed-form polynomials are checked against.
//!
//! Barred letters are stored as negative integers, so the order
//! `n̄ < ... < 1̄ < 1 < ... < n` is plain integer order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};

use crate::exact::Integer;
use crate::qpoly::QPoly;
use crate::{Error, Result};

/// Largest `n` accepted by [`enumerate_derangements_a`] (9! objects).
pub const MAX_N_A: usize = 9;
/// Largest `n` accepted by [`enumerate_derangements_b`] (2^7 7! objects).
pub const MAX_N_B: usize = 7;

/// Major index of a word: the sum of descent positions (1-based).
pub fn maj<T: Ord>(word: &[T]) -> u64 {
    word.windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > w[1])
        .map(|(i, _)| i as u64 + 1)
        .sum()
}

/// Major index of an unsigned permutation under the natural order.
pub fn maj_a(perm: &[u32]) -> u64 {
    maj(perm)
}

/// A signed permutation of `[n]`; `-x` stands for the barred letter `x̄`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPerm {
    entries: Vec<i32>,
}

impl SignedPerm {
    pub fn new(entries: Vec<i32>) -> Result<Self> {
        let n = entries.len();
        let mut seen = vec![false; n + 1];
        for &e in &entries {
            let a = e.unsigned_abs() as usize;
            if a == 0 || a > n || seen[a] {
                return Err(Error::domain(format!(
                    "{entries:?} is not a signed permutation of [{n}]"
                )));
            }
            seen[a] = true;
        }
        Ok(SignedPerm { entries })
    }

    pub fn identity(n: usize) -> Self {
        SignedPerm {
            entries: (1..=n as i32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[i32] {
        &self.entries
    }

    /// `pi_i != i` for every position; `pi_i = ī` is allowed.
    pub fn is_derangement(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(i, &e)| e != i as i32 + 1)
    }

    /// Major index under `n̄ < ... < 1̄ < 1 < ... < n`.
    pub fn maj(&self) -> u64 {
        maj(&self.entries)
    }

    /// Number of barred letters.
    pub fn neg(&self) -> u64 {
        self.entries.iter().filter(|&&e| e < 0).count() as u64
    }

    /// Flag major index `2 maj + neg`.
    pub fn fmaj(&self) -> u64 {
        2 * self.maj() + self.neg()
    }
}

pub fn maj_b(perm: &SignedPerm) -> u64 {
    perm.maj()
}

pub fn neg(perm: &SignedPerm) -> u64 {
    perm.neg()
}

pub fn fmaj(perm: &SignedPerm) -> u64 {
    perm.fmaj()
}

impl fmt::Display for SignedPerm {
    /// Letters are written `3 5 1̄ 2` (barred with a combining macron).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", e.unsigned_abs())?;
            if *e < 0 {
                f.write_str("\u{0304}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for SignedPerm {
    type Err = Error;

    /// Whitespace-separated letters; a barred letter is written `-3` or `3̄`.
    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split_whitespace()
            .map(|tok| {
                let (body, barred) = match tok.strip_suffix('\u{0304}') {
                    Some(b) => (b, true),
                    None => (tok, false),
                };
                let v: i32 = body.parse().map_err(|_| Error::Parse {
                    what: "signed permutation",
                    input: s.to_owned(),
                })?;
                Ok(if barred { -v } else { v })
            })
            .collect::<Result<Vec<_>>>()?;
        SignedPerm::new(entries)
    }
}

/// Map from statistic value to the number of objects attaining it. Only
/// positive counts are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoefficientHistogram {
    counts: BTreeMap<usize, Integer>,
}

impl CoefficientHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, k: usize, count: Integer) {
        if count.is_zero() {
            return;
        }
        *self.counts.entry(k).or_insert_with(Integer::zero) += count;
    }

    /// Pointwise sum; associative and commutative.
    pub fn merge(&mut self, other: &CoefficientHistogram) {
        for (k, c) in &other.counts {
            self.add(*k, c.clone());
        }
    }

    pub fn get(&self, k: usize) -> Integer {
        self.counts.get(&k).cloned().unwrap_or_else(Integer::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Integer)> {
        self.counts.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> Integer {
        self.counts.values().sum()
    }

    pub fn to_qpoly(&self) -> QPoly {
        let Some((&top, _)) = self.counts.last_key_value() else {
            return QPoly::zero();
        };
        let mut coeffs = vec![Integer::zero(); top + 1];
        for (k, c) in &self.counts {
            coeffs[*k] = c.clone();
        }
        QPoly::from_coeffs(coeffs)
    }

    fn from_dense(dense: &[u64]) -> Self {
        let mut h = CoefficientHistogram::new();
        for (k, &c) in dense.iter().enumerate() {
            h.add(k, Integer::from(c));
        }
        h
    }
}

impl From<&QPoly> for CoefficientHistogram {
    fn from(p: &QPoly) -> Self {
        let mut h = CoefficientHistogram::new();
        for (k, c) in p.terms() {
            h.add(k, c.clone());
        }
        h
    }
}

/// Rearranges `v` into the next permutation in lexicographic order; returns
/// `false` (leaving `v` sorted) after the last one.
fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        v.reverse();
        return false;
    };
    let j = (i + 1..v.len())
        .rev()
        .find(|&j| v[j] > v[i])
        .expect("a larger element exists right of the pivot");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Runs `shard` over every item on up to `workers` threads and sums the dense
/// histograms. The merge is a pointwise sum, so the result does not depend on
/// the worker count.
fn run_sharded<S, F>(shards: Vec<S>, workers: usize, len: usize, shard: F) -> Vec<u64>
where
    S: Send,
    F: Fn(S, &mut [u64]) + Sync,
{
    let workers = workers.max(1).min(shards.len().max(1));
    let mut total = vec![0u64; len];
    if workers == 1 {
        for s in shards {
            shard(s, &mut total);
        }
        return total;
    }
    let mut buckets: Vec<Vec<S>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, s) in shards.into_iter().enumerate() {
        buckets[i % workers].push(s);
    }
    let partials: Vec<Vec<u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = buckets
            .into_iter()
            .map(|bucket| {
                let shard = &shard;
                scope.spawn(move || {
                    let mut local = vec![0u64; len];
                    for s in bucket {
                        shard(s, &mut local);
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("enumeration worker panicked"))
            .collect()
    });
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Histogram of `maj` over the derangements of `[n]`, single threaded.
pub fn enumerate_derangements_a(n: usize) -> Result<CoefficientHistogram> {
    enumerate_derangements_a_with(n, 1)
}

pub fn enumerate_derangements_a_with(n: usize, workers: usize) -> Result<CoefficientHistogram> {
    if n > MAX_N_A {
        return Err(Error::ResourceLimit {
            what: "type A enumeration",
            n,
            max: MAX_N_A,
        });
    }
    if n == 0 {
        // the empty permutation is vacuously a derangement
        return Ok(CoefficientHistogram::from_dense(&[1]));
    }
    let len = n * (n - 1) / 2 + 1;
    let shards: Vec<u32> = (1..=n as u32).collect();
    let dense = run_sharded(shards, workers, len, |first, hist| {
        let mut perm: Vec<u32> = std::iter::once(first)
            .chain((1..=n as u32).filter(|&v| v != first))
            .collect();
        loop {
            if perm.iter().enumerate().all(|(i, &v)| v != i as u32 + 1) {
                hist[maj_a(&perm) as usize] += 1;
            }
            if !next_permutation(&mut perm[1..]) {
                break;
            }
        }
    });
    Ok(CoefficientHistogram::from_dense(&dense))
}

/// Calls `visit` on every signed permutation whose first letter is `first`.
fn for_each_signed_with_first(n: usize, first: i32, mut visit: impl FnMut(&[i32])) {
    let mut rest: Vec<i32> = (1..=n as i32).filter(|&v| v != first.abs()).collect();
    let mut word = vec![0i32; n];
    word[0] = first;
    let masks = 1u32 << (n - 1);
    loop {
        for mask in 0..masks {
            for (i, &v) in rest.iter().enumerate() {
                word[i + 1] = if mask >> i & 1 == 1 { -v } else { v };
            }
            visit(&word);
        }
        if !next_permutation(&mut rest) {
            break;
        }
    }
}

fn signed_shards(n: usize) -> Vec<i32> {
    (1..=n as i32).flat_map(|v| [v, -v]).collect()
}

/// Histogram of `fmaj` over the signed derangements of `[n]`, single
/// threaded.
pub fn enumerate_derangements_b(n: usize) -> Result<CoefficientHistogram> {
    enumerate_derangements_b_with(n, 1)
}

pub fn enumerate_derangements_b_with(n: usize, workers: usize) -> Result<CoefficientHistogram> {
    if n > MAX_N_B {
        return Err(Error::ResourceLimit {
            what: "type B enumeration",
            n,
            max: MAX_N_B,
        });
    }
    if n == 0 {
        return Ok(CoefficientHistogram::from_dense(&[1]));
    }
    let len = n * n + 1;
    let dense = run_sharded(signed_shards(n), workers, len, |first, hist| {
        for_each_signed_with_first(n, first, |word| {
            if word.iter().enumerate().all(|(i, &e)| e != i as i32 + 1) {
                let neg = word.iter().filter(|&&e| e < 0).count() as u64;
                hist[(2 * maj(word) + neg) as usize] += 1;
            }
        });
    });
    Ok(CoefficientHistogram::from_dense(&dense))
}

/// All signed derangements of `[n]`, sorted.
pub fn b_derangements(n: usize) -> Result<Vec<SignedPerm>> {
    if n > MAX_N_B {
        return Err(Error::ResourceLimit {
            what: "type B listing",
            n,
            max: MAX_N_B,
        });
    }
    if n == 0 {
        return Ok(vec![SignedPerm::identity(0)]);
    }
    let mut out = Vec::new();
    for first in signed_shards(n) {
        for_each_signed_with_first(n, first, |word| {
            let p = SignedPerm {
                entries: word.to_vec(),
            };
            if p.is_derangement() {
                out.push(p);
            }
        });
    }
    out.sort();
    Ok(out)
}

/// Counts of a histogram as machine integers, for display.
pub fn histogram_row(h: &CoefficientHistogram) -> Vec<(usize, u64)> {
    h.iter()
        .map(|(k, c)| (k, c.to_u64().expect("enumeration counts fit in u64")))
        .collect()
}
