//! Brute-force reference implementations, written without the crate's
//! bushy-tree code: they enumerate every candidate tree.

#![allow(dead_code)]

use snr_core::bushy::{BoundedString, StringSet};

/// Every string of length `<= max_len` with entry `i` below `widths[i]`,
/// shortest first.
pub fn universe(widths: &[u32], max_len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for &width in widths.iter().take(max_len) {
        let mut next = Vec::new();
        for s in &level {
            for a in 0..width {
                let mut c: Vec<u32> = s.clone();
                c.push(a);
                next.push(c);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

fn extends(long: &[u32], short: &[u32]) -> bool {
    long.len() >= short.len() && &long[..short.len()] == short
}

/// For each stem and each `n` in `1..=n_max`, the minimal leaf sets (as
/// masks over the universe) of the n-bushy trees above the stem.
pub struct LeafSets {
    pub strings: Vec<Vec<u32>>,
    /// `by_stem[stem][n - 1]`
    pub by_stem: Vec<Vec<Vec<u32>>>,
}

impl LeafSets {
    pub fn build(strings: Vec<Vec<u32>>, n_max: u32) -> Self {
        assert!(strings.len() <= 20, "universe too large for brute force");
        let mut by_stem = Vec::new();
        for stem in &strings {
            let above: Vec<usize> = (0..strings.len()).filter(|&i| extends(&strings[i], stem)).collect();
            let root = above.iter().position(|&i| strings[i] == *stem).expect("stem in universe");
            let mut per_n: Vec<Vec<u32>> = vec![Vec::new(); n_max as usize];
            for sub in 0u32..(1 << above.len()) {
                if sub >> root & 1 == 0 {
                    continue;
                }
                let nodes: Vec<usize> = (0..above.len()).filter(|&j| sub >> j & 1 == 1).map(|j| above[j]).collect();
                // a tree above the stem: every non-stem node has its parent
                let closed = nodes.iter().all(|&i| {
                    let s = &strings[i];
                    s.len() == stem.len() || nodes.iter().any(|&p| strings[p] == s[..s.len() - 1])
                });
                if !closed {
                    continue;
                }
                let children = |i: usize| {
                    nodes
                        .iter()
                        .filter(|&&c| strings[c].len() == strings[i].len() + 1 && extends(&strings[c], &strings[i]))
                        .count() as u32
                };
                let leaves: u32 = nodes.iter().filter(|&&i| children(i) == 0).fold(0, |m, &i| m | 1 << i);
                let min_branch = nodes.iter().map(|&i| children(i)).filter(|&c| c > 0).min();
                for n in 1..=n_max {
                    if min_branch.is_none_or(|b| b >= n) {
                        per_n[n as usize - 1].push(leaves);
                    }
                }
            }
            for sets in &mut per_n {
                sets.sort_unstable_by_key(|m| m.count_ones());
                let mut minimal: Vec<u32> = Vec::new();
                for &m in sets.iter() {
                    if !minimal.iter().any(|&k| k & !m == 0) {
                        minimal.push(m);
                    }
                }
                *sets = minimal;
            }
            by_stem.push(per_n);
        }
        LeafSets { strings, by_stem }
    }

    /// Whether the set `b` (a mask) is n-big above the stem with index `stem`.
    pub fn big(&self, b: u32, n: u32, stem: usize) -> bool {
        self.by_stem[stem][n as usize - 1].iter().any(|&m| m & !b == 0)
    }

    pub fn to_set(&self, mask: u32) -> StringSet {
        (0..self.strings.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| BoundedString(self.strings[i].clone()))
            .collect()
    }
}

/// Whether `tree` is n-bushy above `stem`, checked from the definition.
pub fn bushy(tree: &StringSet, n: u32, stem: &BoundedString) -> bool {
    if !tree.contains(stem) {
        return false;
    }
    tree.iter().all(|t| {
        if !(extends(&t.0, &stem.0) || extends(&stem.0, &t.0)) {
            return false;
        }
        if t.0.len() > stem.0.len() && !tree.contains(&BoundedString(t.0[..t.0.len() - 1].to_vec())) {
            return false;
        }
        if !extends(&t.0, &stem.0) {
            return true;
        }
        let kids = tree
            .iter()
            .filter(|c| c.0.len() == t.0.len() + 1 && extends(&c.0, &t.0))
            .count() as u32;
        kids == 0 || kids >= n
    })
}

/// Leaves of a finite tree: members with no proper extension in it.
pub fn leaves(tree: &StringSet) -> Vec<BoundedString> {
    tree.iter()
        .filter(|t| !tree.iter().any(|c| c.0.len() > t.0.len() && extends(&c.0, &t.0)))
        .cloned()
        .collect()
}
