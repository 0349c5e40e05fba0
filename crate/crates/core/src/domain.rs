//! Variable domains, pair indexing, and partial assignments.

use alloc::vec::Vec;

use crate::error::MoatError;

/// Cardinalities of the `n` modeled variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDomain {
    cardinalities: Vec<usize>,
}

impl VarDomain {
    /// Requires at least two variables, each with at least two values.
    pub fn new(cardinalities: Vec<usize>) -> Result<Self, MoatError> {
        if cardinalities.len() < 2 {
            return Err(MoatError::ShapeMismatch("need at least 2 variables".into()));
        }
        if let Some(var) = cardinalities.iter().position(|&k| k < 2) {
            return Err(MoatError::ValueOutOfDomain { var, value: cardinalities[var] });
        }
        Ok(VarDomain { cardinalities })
    }

    /// All-binary domain over `n` variables.
    pub fn binary(n: usize) -> Result<Self, MoatError> {
        Self::new(alloc::vec![2; n])
    }

    pub fn n(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn cardinality(&self, v: usize) -> usize {
        self.cardinalities[v]
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    /// Number of unordered variable pairs.
    pub fn pair_count(&self) -> usize {
        let n = self.n();
        n * (n - 1) / 2
    }

    /// Index of pair `{u, v}` in row-major upper-triangular order:
    /// (0,1), (0,2), ..., (0,n-1), (1,2), ...
    pub fn pair_index(&self, u: usize, v: usize) -> usize {
        pair_index(self.n(), u, v)
    }

    /// Iterates pairs `(u, v)` with `u < v` in index order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        pairs(self.n())
    }

    /// Checks that `x` is a full assignment within this domain.
    pub fn check_assignment(&self, x: &[usize]) -> Result<(), MoatError> {
        if x.len() != self.n() {
            return Err(MoatError::ShapeMismatch("assignment length != n".into()));
        }
        for (var, (&xi, &k)) in x.iter().zip(self.cardinalities.iter()).enumerate() {
            if xi >= k {
                return Err(MoatError::ValueOutOfDomain { var, value: xi });
            }
        }
        Ok(())
    }

    /// Total number of full assignments, or `None` on overflow.
    pub fn state_count(&self) -> Option<usize> {
        self.cardinalities
            .iter()
            .try_fold(1usize, |acc, &k| acc.checked_mul(k))
    }

    /// Calls `f` on every full assignment, in lexicographic order.
    pub fn for_each_assignment(&self, mut f: impl FnMut(&[usize])) {
        let n = self.n();
        let mut x = alloc::vec![0usize; n];
        loop {
            f(&x);
            // odometer increment, last variable fastest
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                x[i] += 1;
                if x[i] < self.cardinalities[i] {
                    break;
                }
                x[i] = 0;
            }
        }
    }
}

/// Pair index without a domain handle; `u < v` required.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u < v && v < n);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Pairs `(u, v)`, `u < v`, in row-major upper-triangular order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
}

/// Borrowed view of a row-major assignment matrix (rows = samples).
#[derive(Clone, Copy, Debug)]
pub struct Assignments<'a> {
    data: &'a [usize],
    n_cols: usize,
}

impl<'a> Assignments<'a> {
    pub fn new(data: &'a [usize], n_cols: usize) -> Result<Self, MoatError> {
        if n_cols == 0 || data.len() % n_cols != 0 {
            return Err(MoatError::ShapeMismatch("ragged assignment matrix".into()));
        }
        Ok(Assignments { data, n_cols })
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.n_cols
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, r: usize) -> &'a [usize] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &'a [usize]> + '_ {
        self.data.chunks_exact(self.n_cols)
    }
}

/// A partial assignment: distinct variables with fixed in-domain values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Evidence {
    entries: Vec<(usize, usize)>,
}

impl Evidence {
    pub fn empty() -> Self {
        Evidence { entries: Vec::new() }
    }

    /// Builds evidence from `(variable, value)` pairs. Variables must be
    /// distinct and values within the domain.
    pub fn new(mut entries: Vec<(usize, usize)>, domain: &VarDomain) -> Result<Self, MoatError> {
        entries.sort_unstable();
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(MoatError::ShapeMismatch("duplicate evidence variable".into()));
            }
        }
        for &(var, value) in &entries {
            if var >= domain.n() || value >= domain.cardinality(var) {
                return Err(MoatError::ValueOutOfDomain { var, value });
            }
        }
        Ok(Evidence { entries })
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value fixed for `var`, if any.
    pub fn value_of(&self, var: usize) -> Option<usize> {
        self.entries
            .binary_search_by_key(&var, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Variables of the domain not fixed by this evidence, ascending.
    pub fn free_variables(&self, domain: &VarDomain) -> Vec<usize> {
        (0..domain.n()).filter(|&v| self.value_of(v).is_none()).collect()
    }

    /// True if `x` agrees with every evidence entry.
    pub fn agrees_with(&self, x: &[usize]) -> bool {
        self.entries.iter().all(|&(v, a)| x[v] == a)
    }

    /// Calls `f` on every completion of the evidence, in lexicographic
    /// order of the free variables.
    pub fn for_each_completion(&self, domain: &VarDomain, mut f: impl FnMut(&[usize])) {
        let free = self.free_variables(domain);
        let mut x = alloc::vec![0usize; domain.n()];
        for &(v, a) in &self.entries {
            x[v] = a;
        }
        if free.is_empty() {
            f(&x);
            return;
        }
        loop {
            f(&x);
            let mut i = free.len();
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                let v = free[i];
                x[v] += 1;
                if x[v] < domain.cardinality(v) {
                    break;
                }
                x[v] = 0;
            }
        }
    }
}
