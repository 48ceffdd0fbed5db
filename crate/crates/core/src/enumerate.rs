//! Exhaustive enumeration of `S_n`, producing the exact distribution of `s_n`.

use std::fmt;
use std::thread;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::perm::s_stat_streaming;

pub const DEFAULT_CAP: usize = 10;
pub const CAP_ENV: &str = "ILIS_LAB_CAP";

/// Enumeration cap, taken from `ILIS_LAB_CAP` when set to a positive integer.
pub fn enumeration_cap() -> usize {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_CAP)
}

pub fn default_workers() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, Copy)]
pub struct EnumOptions {
    pub cap: usize,
    pub workers: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self {
            cap: enumeration_cap(),
            workers: default_workers(),
        }
    }
}

/// Exact counts of `{σ ∈ S_n : s_n(σ) = j}` for `j` in `1..=n`; the coefficients
/// of `f_n(y) = Σ_σ y^{s_n(σ)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnDistribution {
    n: usize,
    // counts[j], index 0 unused
    counts: Vec<u128>,
}

impl SnDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self, j: usize) -> u128 {
        self.counts.get(j).copied().unwrap_or(0)
    }

    /// Nonzero `(j, count)` pairs in increasing `j`.
    pub fn support(&self) -> impl Iterator<Item = (usize, u128)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| c > 0)
            .map(|(j, &c)| (j, c))
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    /// Smallest `j` with a nonzero count.
    pub fn min_s(&self) -> usize {
        self.support().next().map_or(0, |(j, _)| j)
    }

    pub fn pmf(&self) -> Vec<(usize, f64)> {
        let total = self.total() as f64;
        self.support().map(|(j, c)| (j, c as f64 / total)).collect()
    }

    /// `E(y^{s_n}) = f_n(y) / n!`.
    pub fn expected_y_power(&self, y: f64) -> f64 {
        let total = self.total() as f64;
        self.support()
            .map(|(j, c)| (c as f64 / total) * y.powi(j as i32))
            .sum()
    }

    /// Exact mean and variance of `s_n`.
    pub fn exact_moments(&self) -> (f64, f64) {
        let total = self.total();
        let (s1, s2) = self.support().fold((0u128, 0u128), |(a, b), (j, c)| {
            let j = j as u128;
            (a + j * c, b + j * j * c)
        });
        // variance = (total*s2 - s1^2) / total^2, exact in integers
        let num = total * s2 - s1 * s1;
        let mean = s1 as f64 / total as f64;
        let var = num as f64 / (total as f64 * total as f64);
        (mean, var)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Runs Heap's algorithm over `tail`, calling `visit` once per arrangement.
fn heap_permutations(tail_len: usize, buf: &mut [usize], mut visit: impl FnMut(&[usize])) {
    let offset = buf.len() - tail_len;
    visit(buf);
    let mut c = vec![0usize; tail_len];
    let mut i = 1;
    while i < tail_len {
        if c[i] < i {
            if i % 2 == 0 {
                buf.swap(offset, offset + i);
            } else {
                buf.swap(offset + c[i], offset + i);
            }
            visit(buf);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Counts for all permutations with `σ(1) = first`.
fn count_prefix(n: usize, first: usize) -> Vec<u128> {
    let mut counts = vec![0u128; n + 1];
    let mut buf: Vec<usize> = std::iter::once(first)
        .chain((1..=n).filter(|&v| v != first))
        .collect();
    let mut visited = vec![false; n + 1];
    heap_permutations(n - 1, &mut buf, |image| {
        visited.fill(false);
        counts[s_stat_streaming(image, &mut visited)] += 1;
    });
    counts
}

pub fn enumerate_distribution(n: usize) -> Result<SnDistribution> {
    enumerate_distribution_with(n, EnumOptions::default())
}

/// Visits every permutation of `S_n` once. Work is split by `σ(1)` and the
/// per-prefix counts are summed, so the result does not depend on `workers`.
pub fn enumerate_distribution_with(n: usize, opts: EnumOptions) -> Result<SnDistribution> {
    if n == 0 {
        return Err(LabError::invalid("n must be at least 1"));
    }
    if n > opts.cap {
        return Err(LabError::CapExceeded { n, cap: opts.cap });
    }
    let workers = opts.workers.clamp(1, n);
    let partials: Vec<Vec<u128>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    let mut acc = vec![0u128; n + 1];
                    for first in (1..=n).skip(w).step_by(workers) {
                        for (a, c) in acc.iter_mut().zip(count_prefix(n, first)) {
                            *a += c;
                        }
                    }
                    acc
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("enumeration worker panicked"))
            .collect()
    });
    let mut counts = vec![0u128; n + 1];
    for part in partials {
        for (a, c) in counts.iter_mut().zip(part) {
            *a += c;
        }
    }
    debug_assert_eq!(counts.iter().sum::<u128>(), factorial(n));
    Ok(SnDistribution { n, counts })
}

impl Serialize for SnDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Counts<'a>(&'a SnDistribution);
        impl Serialize for Counts<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(None)?;
                for (j, c) in self.0.support() {
                    map.serialize_entry(&j.to_string(), &c.to_string())?;
                }
                map.end()
            }
        }
        let mut st = serializer.serialize_struct("SnDistribution", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("counts", &Counts(self))?;
        st.serialize_field("total", &self.total().to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for SnDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct CountsMap(Vec<(usize, u128)>);
        impl<'de> Deserialize<'de> for CountsMap {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                struct V;
                impl<'de> Visitor<'de> for V {
                    type Value = CountsMap;
                    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                        f.write_str("a map of decimal strings")
                    }
                    fn visit_map<A: MapAccess<'de>>(
                        self,
                        mut m: A,
                    ) -> std::result::Result<CountsMap, A::Error> {
                        let mut out = Vec::new();
                        while let Some((k, v)) = m.next_entry::<String, String>()? {
                            let j = k.parse().map_err(de::Error::custom)?;
                            let c = v.parse().map_err(de::Error::custom)?;
                            out.push((j, c));
                        }
                        Ok(CountsMap(out))
                    }
                }
                d.deserialize_map(V)
            }
        }

        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            counts: CountsMap,
            total: String,
        }

        let raw = Raw::deserialize(deserializer)?;
        if raw.n == 0 {
            return Err(de::Error::custom("n must be at least 1"));
        }
        let mut counts = vec![0u128; raw.n + 1];
        for (j, c) in raw.counts.0 {
            if j == 0 || j > raw.n {
                return Err(de::Error::custom(format!("count index {j} outside 1..={}", raw.n)));
            }
            counts[j] = c;
        }
        let total: u128 = raw.total.parse().map_err(de::Error::custom)?;
        if counts.iter().sum::<u128>() != total || total != factorial(raw.n) {
            return Err(de::Error::custom("counts do not sum to n!"));
        }
        Ok(SnDistribution { n: raw.n, counts })
    }
}
