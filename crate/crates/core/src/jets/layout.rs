//! Dense graded-lexicographic layout of multi-indices `|α| ≤ d`.
//!
//! Layouts are interned per `(num_vars, order)`. Since the ordering is graded,
//! the layout of order `d - 1` is a prefix of the layout of order `d`, so
//! truncation is a slice and indices agree across orders.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug)]
pub struct Layout {
    num_vars: usize,
    order: usize,
    indices: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `degree_start[g]` is the position of the first index of degree `g`;
    /// has `order + 2` entries.
    degree_start: Vec<usize>,
    /// For each target position, all `(i, j)` with `α_i + α_j = α_target`.
    convolution: Vec<Vec<(u32, u32)>>,
    /// `raise[v][k]` is the position of `α_k + e_v`, for `|α_k| < order`.
    raise: Vec<Vec<u32>>,
    /// `α!` for each position.
    factorial: Vec<u64>,
}

fn graded_lex(num_vars: usize, degree: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, remaining: usize, slots: usize, out: &mut Vec<Vec<u8>>) {
        if slots == 1 {
            prefix.push(remaining as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first as u8);
            rec(prefix, remaining - first, slots - 1, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(num_vars), degree, num_vars, out);
}

impl Layout {
    fn build(num_vars: usize, order: usize) -> Self {
        let mut indices = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for g in 0..=order {
            degree_start.push(indices.len());
            graded_lex(num_vars, g, &mut indices);
        }
        degree_start.push(indices.len());

        let lookup: HashMap<Vec<u8>, usize> =
            indices.iter().enumerate().map(|(k, a)| (a.clone(), k)).collect();

        let mut convolution = vec![Vec::new(); indices.len()];
        let mut sum = vec![0u8; num_vars];
        for (i, a) in indices.iter().enumerate() {
            let deg_a: usize = a.iter().map(|&x| x as usize).sum();
            for (j, b) in indices[..degree_start[order - deg_a + 1]].iter().enumerate() {
                for v in 0..num_vars {
                    sum[v] = a[v] + b[v];
                }
                convolution[lookup[&sum]].push((i as u32, j as u32));
            }
        }

        let below_top = degree_start[order];
        let raise = (0..num_vars)
            .map(|v| {
                indices[..below_top]
                    .iter()
                    .map(|a| {
                        let mut r = a.clone();
                        r[v] += 1;
                        lookup[&r] as u32
                    })
                    .collect()
            })
            .collect();

        let factorial = indices
            .iter()
            .map(|a| a.iter().map(|&x| (1..=x as u64).product::<u64>()).product())
            .collect();

        Layout { num_vars, order, indices, lookup, degree_start, convolution, raise, factorial }
    }

    /// Interned layout for `(num_vars, order)`.
    pub fn get(num_vars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((num_vars, order))
            .or_insert_with(|| Arc::new(Layout::build(num_vars, order)))
            .clone()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_index(&self, k: usize) -> &[u8] {
        &self.indices[k]
    }

    pub fn position(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Number of coefficients with degree `≤ g`.
    pub fn len_through(&self, g: usize) -> usize {
        self.degree_start[g.min(self.order) + 1]
    }

    pub(crate) fn convolution(&self, k: usize) -> &[(u32, u32)] {
        &self.convolution[k]
    }

    pub(crate) fn raised(&self, var: usize) -> &[u32] {
        &self.raise[var]
    }

    pub fn factorial(&self, k: usize) -> u64 {
        self.factorial[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_sizes() {
        // C(n + d, d)
        assert_eq!(Layout::get(2, 2).len(), 6);
        assert_eq!(Layout::get(6, 6).len(), 924);
        assert_eq!(Layout::get(3, 0).len(), 1);
    }

    #[test]
    fn graded_lex_order() {
        let l = Layout::get(2, 2);
        let got: Vec<&[u8]> = (0..l.len()).map(|k| l.multi_index(k)).collect();
        let want: Vec<&[u8]> = vec![&[0, 0], &[1, 0], &[0, 1], &[2, 0], &[1, 1], &[0, 2]];
        assert_eq!(got, want);
    }

    #[test]
    fn lower_order_is_prefix() {
        let hi = Layout::get(3, 4);
        let lo = Layout::get(3, 2);
        for k in 0..lo.len() {
            assert_eq!(hi.multi_index(k), lo.multi_index(k));
        }
    }
}
