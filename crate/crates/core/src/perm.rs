//! Permutations in one-line form, their canonical cycle decomposition, and the
//! per-permutation statistics built on initial increasing runs.
//!
//! All values are 1-based: a permutation of size `n` is a rearrangement of
//! `1..=n`, and cycles list the elements they visit.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{LabError, Result};

/// A permutation of `{1, …, n}` stored in one-line form, `image[i - 1] = σ(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    /// Validates that `image` is a bijection of `1..=image.len()`.
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(LabError::invalid("permutation must have size n >= 1"));
        }
        let mut seen = vec![false; n + 1];
        for (pos, &v) in image.iter().enumerate() {
            if v == 0 || v > n {
                return Err(LabError::invalid(format!(
                    "value {v} at position {} is outside 1..={n}",
                    pos + 1
                )));
            }
            if seen[v] {
                return Err(LabError::invalid(format!(
                    "duplicate value {v} at position {}",
                    pos + 1
                )));
            }
            seen[v] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((1..=n).collect())
    }

    /// The permutation `(n, n-1, …, 1)`.
    pub fn reversal(n: usize) -> Result<Self> {
        Self::new((1..=n).rev().collect())
    }

    /// Caller guarantees `image` is a bijection of `1..=n`.
    pub(crate) fn from_image_unchecked(image: Vec<usize>) -> Self {
        debug_assert!(Self::new(image.clone()).is_ok());
        Self { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    /// Always false; kept alongside `len` for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// σ(i) for `1 <= i <= n`.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1]
    }

    pub fn one_line(&self) -> &[usize] {
        &self.image
    }

    pub fn into_one_line(self) -> Vec<usize> {
        self.image
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.image.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = LabError;

    /// Parses comma-separated one-line form, e.g. `"1,3,5,4,7,6,2"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(LabError::invalid("empty permutation string"));
        }
        let image = s
            .split(',')
            .enumerate()
            .map(|(pos, tok)| {
                tok.trim().parse::<usize>().map_err(|_| {
                    LabError::invalid(format!(
                        "token {:?} at position {} is not a positive integer",
                        tok.trim(),
                        pos + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(image)
    }
}

/// One cycle of a permutation, written from its minimum element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    elements: Vec<usize>,
}

impl Cycle {
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn min(&self) -> usize {
        self.elements[0]
    }

    /// Length of the initial increasing run of the cycle in canonical order.
    pub fn ilis(&self) -> usize {
        initial_run(&self.elements)
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Cycles ordered by increasing minimum, each starting at its minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleDecomposition {
    n: usize,
    cycles: Vec<Cycle>,
}

impl CycleDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Rebuilds the one-line permutation the cycles describe.
    pub fn to_permutation(&self) -> Permutation {
        let mut image = vec![0; self.n];
        for c in &self.cycles {
            let e = c.elements();
            for (k, &from) in e.iter().enumerate() {
                image[from - 1] = e[(k + 1) % e.len()];
            }
        }
        Permutation::from_image_unchecked(image)
    }
}

impl fmt::Display for CycleDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cycles {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for CycleDecomposition {
    type Err = LabError;

    /// Parses `"(1)(2 3 5 7)(4)(6)"`. The groups may appear in any order and
    /// rotation; the result is put in canonical form.
    fn from_str(s: &str) -> Result<Self> {
        let mut rest = s.trim();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| LabError::invalid(format!("expected '(' at {rest:?}")))?;
            let close = body
                .find(')')
                .ok_or_else(|| LabError::invalid("unterminated cycle group"))?;
            let group = body[..close]
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| LabError::invalid(format!("bad cycle element {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if group.is_empty() {
                return Err(LabError::invalid("empty cycle group"));
            }
            groups.push(group);
            rest = body[close + 1..].trim_start();
        }
        let n: usize = groups.iter().map(Vec::len).sum();
        let mut image = vec![0; n];
        for g in &groups {
            for (k, &from) in g.iter().enumerate() {
                if from == 0 || from > n || image[from - 1] != 0 {
                    return Err(LabError::invalid(format!(
                        "cycles do not partition 1..={n} (element {from})"
                    )));
                }
                image[from - 1] = g[(k + 1) % g.len()];
            }
        }
        Ok(decompose(&Permutation::new(image)?))
    }
}

/// Length of the maximal strictly increasing prefix. Caller guarantees a
/// nonempty slice.
fn initial_run(seq: &[usize]) -> usize {
    seq.windows(2).take_while(|w| w[0] < w[1]).count() + 1
}

/// Length of the initial longest increasing sequence of `seq`.
///
/// `seq` must be nonempty with pairwise distinct entries.
pub fn ilis_length(seq: &[usize]) -> Result<usize> {
    if seq.is_empty() {
        return Err(LabError::invalid("ILIS of an empty sequence is undefined"));
    }
    let mut seen = HashSet::with_capacity(seq.len());
    if let Some(dup) = seq.iter().find(|v| !seen.insert(**v)) {
        return Err(LabError::invalid(format!(
            "sequence entries must be distinct, {dup} repeats"
        )));
    }
    Ok(initial_run(seq))
}

/// Canonical cycle decomposition: each cycle starts at its minimum, cycles
/// sorted by minimum.
pub fn decompose(p: &Permutation) -> CycleDecomposition {
    let n = p.len();
    let mut visited = vec![false; n + 1];
    let mut cycles = Vec::new();
    // Scanning starts in increasing order, so the first unvisited element of
    // each cycle is its minimum.
    for start in 1..=n {
        if visited[start] {
            continue;
        }
        let mut elements = vec![start];
        visited[start] = true;
        let mut cur = p.apply(start);
        while cur != start {
            visited[cur] = true;
            elements.push(cur);
            cur = p.apply(cur);
        }
        cycles.push(Cycle { elements });
    }
    CycleDecomposition { n, cycles }
}

/// Streaming `s_n` over a 1-based one-line image, reusing `visited`
/// (length `image.len() + 1`, all false on entry; left dirty on return).
pub fn s_stat_streaming(image: &[usize], visited: &mut [bool]) -> usize {
    debug_assert_eq!(visited.len(), image.len() + 1);
    let mut total = 0;
    for start in 1..=image.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut prev = start;
        let mut cur = image[start - 1];
        let mut run = 1;
        let mut rising = true;
        while cur != start {
            visited[cur] = true;
            if rising {
                if cur > prev {
                    run += 1;
                } else {
                    rising = false;
                }
            }
            prev = cur;
            cur = image[cur - 1];
        }
        total += run;
    }
    total
}

/// `s_n(σ)`: sum of the ILIS lengths of the canonical cycles.
pub fn s_stat(p: &Permutation) -> usize {
    let mut visited = vec![false; p.len() + 1];
    s_stat_streaming(p.one_line(), &mut visited)
}

/// Largest ILIS length over the canonical cycles.
pub fn max_ilis(p: &Permutation) -> usize {
    decompose(p).cycles().iter().map(Cycle::ilis).max().unwrap_or(0)
}

/// Longest strictly increasing subsequence of the one-line form, by patience
/// sorting in `O(n log n)`.
pub fn lis_length(p: &Permutation) -> usize {
    // tails[k] = smallest tail of an increasing subsequence of length k+1
    let mut tails: Vec<usize> = Vec::new();
    for &v in p.one_line() {
        let pos = tails.partition_point(|&t| t < v);
        if pos == tails.len() {
            tails.push(v);
        } else {
            tails[pos] = v;
        }
    }
    tails.len()
}

/// All four statistics of one permutation.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct PermStats {
    pub ilis: usize,
    pub s: usize,
    pub max_ilis: usize,
    pub lis: usize,
    pub cycles: String,
}

impl PermStats {
    pub fn of(p: &Permutation) -> Self {
        let dec = decompose(p);
        Self {
            ilis: initial_run(p.one_line()),
            s: dec.cycles().iter().map(Cycle::ilis).sum(),
            max_ilis: dec.cycles().iter().map(Cycle::ilis).max().unwrap_or(0),
            lis: lis_length(p),
            cycles: dec.to_string(),
        }
    }
}
