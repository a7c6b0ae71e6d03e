//! Dense square tensors `n × n × … × n` stored row-major.

use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<E> {
    n: usize,
    rank: usize,
    data: Vec<E>,
}

impl<E> Tensor<E> {
    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> E) -> Self {
        let len = n.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            let mut rem = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rem % n;
                rem /= n;
            }
            data.push(f(&idx));
        }
        Tensor { n, rank, data }
    }

    pub fn try_from_fn<Err>(
        n: usize,
        rank: usize,
        mut f: impl FnMut(&[usize]) -> Result<E, Err>,
    ) -> Result<Self, Err> {
        let mut err = None;
        let t = Tensor::<Option<E>>::from_fn(n, rank, |idx| match f(idx) {
            Ok(v) => Some(v),
            Err(e) => {
                err.get_or_insert(e);
                None
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(t.map(|v| v.expect("no error recorded"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn iter(&self) -> impl Iterator<Item = &E> {
        self.data.iter()
    }

    pub fn map<F>(self, f: impl FnMut(E) -> F) -> Tensor<F> {
        Tensor { n: self.n, rank: self.rank, data: self.data.into_iter().map(f).collect() }
    }

    pub fn map_ref<F>(&self, f: impl FnMut(&E) -> F) -> Tensor<F> {
        Tensor { n: self.n, rank: self.rank, data: self.data.iter().map(f).collect() }
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }
}

impl<E, const R: usize> Index<[usize; R]> for Tensor<E> {
    type Output = E;
    fn index(&self, idx: [usize; R]) -> &E {
        &self.data[self.flat(&idx)]
    }
}

impl<E, const R: usize> IndexMut<[usize; R]> for Tensor<E> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut E {
        let k = self.flat(&idx);
        &mut self.data[k]
    }
}

impl<E> Index<&[usize]> for Tensor<E> {
    type Output = E;
    fn index(&self, idx: &[usize]) -> &E {
        &self.data[self.flat(idx)]
    }
}

impl Tensor<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
