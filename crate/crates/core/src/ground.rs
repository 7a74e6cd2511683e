//! Ground sets, index sets, modular costs and the oracle contracts every
//! maximizer is written against.
//!
//! Algorithms only ever see the utility through [`ValueOracle`] (plain set
//! queries) or [`IncrementalOracle`] (a cursor set with marginal queries and
//! commits). [`CountingOracle`] sits between the algorithm and the oracle and
//! records how much oracle work was performed.

use std::cell::Cell;
use std::fmt;

use crate::error::{Error, Result};

/// Ground set `{0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "ground set must contain at least one element"));
        }
        Ok(Self { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn empty_set(&self) -> IndexSet {
        IndexSet::empty(self.n)
    }

    pub fn full_set(&self) -> IndexSet {
        IndexSet::full(self.n)
    }
}

/// A set of element ids drawn from a ground set of fixed capacity.
///
/// Members are kept both as an ascending id list and as a membership mask, so
/// iteration is always in ascending id order and `contains` is a lookup.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    ids: Vec<usize>,
    mask: Vec<bool>,
}

impl IndexSet {
    pub fn empty(capacity: usize) -> Self {
        Self {
            ids: Vec::new(),
            mask: vec![false; capacity],
        }
    }

    pub fn full(capacity: usize) -> Self {
        Self {
            ids: (0..capacity).collect(),
            mask: vec![true; capacity],
        }
    }

    /// Builds a set from arbitrary ids; duplicates are collapsed.
    pub fn from_ids<I: IntoIterator<Item = usize>>(capacity: usize, ids: I) -> Result<Self> {
        let mut set = Self::empty(capacity);
        for id in ids {
            set.insert(id)?;
        }
        Ok(set)
    }

    /// Set whose members are the one-bits of `mask` (bit `i` is element `i`).
    pub fn from_bitmask(capacity: usize, mask: u64) -> Self {
        debug_assert!(capacity <= 64);
        let mut set = Self::empty(capacity);
        for i in 0..capacity {
            if mask >> i & 1 == 1 {
                set.ids.push(i);
                set.mask[i] = true;
            }
        }
        set
    }

    pub fn capacity(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.mask.get(id).copied().unwrap_or(false)
    }

    /// Inserts `id`, returning whether it was newly added.
    pub fn insert(&mut self, id: usize) -> Result<bool> {
        if id >= self.mask.len() {
            return Err(Error::ElementOutOfRange {
                id,
                n: self.mask.len(),
            });
        }
        if self.mask[id] {
            return Ok(false);
        }
        self.mask[id] = true;
        let pos = self.ids.partition_point(|&x| x < id);
        self.ids.insert(pos, id);
        Ok(true)
    }

    /// Removes `id`, returning whether it was present.
    pub fn remove(&mut self, id: usize) -> bool {
        if !self.contains(id) {
            return false;
        }
        self.mask[id] = false;
        let pos = self.ids.partition_point(|&x| x < id);
        self.ids.remove(pos);
        true
    }

    pub fn clear(&mut self) {
        for &id in &self.ids {
            self.mask[id] = false;
        }
        self.ids.clear();
    }

    /// Copy of `self` with `id` added.
    pub fn with(&self, id: usize) -> Result<Self> {
        let mut out = self.clone();
        out.insert(id)?;
        Ok(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids.iter().copied()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn intersection_size(&self, other: &IndexSet) -> usize {
        self.ids.iter().filter(|&&id| other.contains(id)).count()
    }

    /// `|self \ other|`.
    pub fn difference_size(&self, other: &IndexSet) -> usize {
        self.len() - self.intersection_size(other)
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.ids.iter().all(|&id| other.contains(id))
    }

    pub fn union(&self, other: &IndexSet) -> Result<Self> {
        let mut out = self.clone();
        for id in other.iter() {
            out.insert(id)?;
        }
        Ok(out)
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ids.iter()).finish()
    }
}

impl fmt::Display for IndexSet {
    /// Space separated ascending ids, e.g. `3 7 12`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for id in &self.ids {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{id}")?;
            first = false;
        }
        Ok(())
    }
}

/// Non-negative modular cost `c(S) = Σ_{e∈S} c_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularCost {
    coefficients: Vec<f64>,
}

impl ModularCost {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if let Some((e, c)) = coefficients
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_finite() || **c < 0.0)
        {
            return Err(Error::param(
                "cost",
                format!("coefficient of element {e} is {c}; costs must be finite and non-negative"),
            ));
        }
        Ok(Self { coefficients })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coefficients: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficient(&self, e: usize) -> f64 {
        self.coefficients[e]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn cost(&self, set: &IndexSet) -> f64 {
        set.iter().map(|e| self.coefficients[e]).sum()
    }
}

/// Set-value access to a utility `g`.
///
/// Implementations must be deterministic: equal sets give bit-identical
/// values. The maximizers additionally assume `g ≥ 0` and monotone; that is
/// checked by the verification module rather than enforced here.
pub trait ValueOracle {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &IndexSet) -> Result<f64>;
}

/// A value oracle with a cursor set `S`, supporting marginal queries
/// `g(e | S)` and in-place growth of `S`.
pub trait IncrementalOracle: ValueOracle {
    /// Oracle evaluations charged by [`CountingOracle`] per `marginal` call.
    const MARGINAL_EVALS: u64 = 1;

    fn cursor(&self) -> &IndexSet;

    /// `g(S ∪ {e}) − g(S)` for the cursor set `S`; zero when `e ∈ S`.
    fn marginal(&self, e: usize) -> Result<f64>;

    /// `S ← S ∪ {e}`. Fails with [`Error::DuplicateCommit`] when `e ∈ S`.
    fn commit(&mut self, e: usize) -> Result<()>;

    /// Returns the cursor to `∅`.
    fn reset(&mut self);

    /// `g(S)` for the cursor set; used for bookkeeping and never charged.
    fn cursor_value(&self) -> Result<f64>;
}

impl<T: ValueOracle + ?Sized> ValueOracle for &T {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, set: &IndexSet) -> Result<f64> {
        (**self).value(set)
    }
}

impl<T: ValueOracle + ?Sized> ValueOracle for &mut T {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, set: &IndexSet) -> Result<f64> {
        (**self).value(set)
    }
}

impl<T: IncrementalOracle> IncrementalOracle for &mut T {
    const MARGINAL_EVALS: u64 = T::MARGINAL_EVALS;

    fn cursor(&self) -> &IndexSet {
        (**self).cursor()
    }
    fn marginal(&self, e: usize) -> Result<f64> {
        (**self).marginal(e)
    }
    fn commit(&mut self, e: usize) -> Result<()> {
        (**self).commit(e)
    }
    fn reset(&mut self) {
        (**self).reset()
    }
    fn cursor_value(&self) -> Result<f64> {
        (**self).cursor_value()
    }
}

pub(crate) fn check_element(e: usize, n: usize) -> Result<()> {
    if e >= n {
        Err(Error::ElementOutOfRange { id: e, n })
    } else {
        Ok(())
    }
}

pub(crate) fn check_set(set: &IndexSet, n: usize) -> Result<()> {
    if set.capacity() > n {
        if let Some(id) = set.iter().find(|&id| id >= n) {
            return Err(Error::ElementOutOfRange { id, n });
        }
    }
    Ok(())
}

/// Cursor adapter turning any [`ValueOracle`] into an [`IncrementalOracle`].
///
/// Each marginal is computed as two value queries, and is charged as such.
#[derive(Debug, Clone)]
pub struct ValueCursor<O> {
    inner: O,
    cursor: IndexSet,
}

impl<O: ValueOracle> ValueCursor<O> {
    pub fn new(inner: O) -> Self {
        let n = inner.ground_size();
        Self {
            inner,
            cursor: IndexSet::empty(n),
        }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: ValueOracle> ValueOracle for ValueCursor<O> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn value(&self, set: &IndexSet) -> Result<f64> {
        self.inner.value(set)
    }
}

impl<O: ValueOracle> IncrementalOracle for ValueCursor<O> {
    const MARGINAL_EVALS: u64 = 2;

    fn cursor(&self) -> &IndexSet {
        &self.cursor
    }

    fn marginal(&self, e: usize) -> Result<f64> {
        check_element(e, self.ground_size())?;
        if self.cursor.contains(e) {
            return Ok(0.0);
        }
        let grown = self.cursor.with(e)?;
        Ok(self.inner.value(&grown)? - self.inner.value(&self.cursor)?)
    }

    fn commit(&mut self, e: usize) -> Result<()> {
        check_element(e, self.ground_size())?;
        if !self.cursor.insert(e)? {
            return Err(Error::DuplicateCommit(e));
        }
        Ok(())
    }

    fn reset(&mut self) {
        self.cursor.clear();
    }

    fn cursor_value(&self) -> Result<f64> {
        self.inner.value(&self.cursor)
    }
}

/// Forwarding wrapper that counts oracle work.
///
/// Every `value` call adds one; every `marginal` call adds
/// `O::MARGINAL_EVALS` (one for oracles with a native incremental path, two
/// for [`ValueCursor`]). Cursor bookkeeping (`cursor_value`, `commit`) is free.
#[derive(Debug)]
pub struct CountingOracle<O> {
    inner: O,
    evals: Cell<u64>,
}

impl<O> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            evals: Cell::new(0),
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evals.get()
    }

    pub fn reset_count(&self) {
        self.evals.set(0);
    }

    /// Uncounted access to the wrapped oracle.
    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut O {
        &mut self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }

    fn charge(&self, amount: u64) {
        self.evals.set(self.evals.get() + amount);
    }
}

impl<O: ValueOracle> ValueOracle for CountingOracle<O> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn value(&self, set: &IndexSet) -> Result<f64> {
        self.charge(1);
        self.inner.value(set)
    }
}

impl<O: IncrementalOracle> IncrementalOracle for CountingOracle<O> {
    const MARGINAL_EVALS: u64 = O::MARGINAL_EVALS;

    fn cursor(&self) -> &IndexSet {
        self.inner.cursor()
    }
    fn marginal(&self, e: usize) -> Result<f64> {
        self.charge(O::MARGINAL_EVALS);
        self.inner.marginal(e)
    }
    fn commit(&mut self, e: usize) -> Result<()> {
        self.inner.commit(e)
    }
    fn reset(&mut self) {
        self.inner.reset()
    }
    fn cursor_value(&self) -> Result<f64> {
        self.inner.cursor_value()
    }
}

/// Cumulative evaluation count of a counting wrapper.
pub fn count_evaluations<O>(oracle: &CountingOracle<O>) -> u64 {
    oracle.evaluations()
}

/// What is known about the submodularity ratio of `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaKnowledge {
    /// The ratio itself, in `(0, 1]`.
    Exact(f64),
    /// A lower bound `L ∈ [0, 1]` on the ratio.
    LowerBound(f64),
    Unknown,
}

impl GammaKnowledge {
    fn validate(self) -> Result<Self> {
        match self {
            GammaKnowledge::Exact(g) if !(g > 0.0 && g <= 1.0) => {
                Err(Error::param("gamma", format!("exact gamma must lie in (0, 1], got {g}")))
            }
            GammaKnowledge::LowerBound(l) if !(0.0..=1.0).contains(&l) => Err(Error::param(
                "gamma",
                format!("gamma lower bound must lie in [0, 1], got {l}"),
            )),
            other => Ok(other),
        }
    }
}

/// `max_{|S| ≤ k} g(S) − c(S)`, bundled.
#[derive(Debug, Clone)]
pub struct ProblemInstance<O> {
    pub oracle: O,
    pub cost: ModularCost,
    pub k: usize,
    pub gamma: GammaKnowledge,
}

impl<O: ValueOracle> ProblemInstance<O> {
    pub fn new(oracle: O, cost: ModularCost, k: usize, gamma: GammaKnowledge) -> Result<Self> {
        let n = oracle.ground_size();
        if n == 0 {
            return Err(Error::param("n", "ground set must contain at least one element"));
        }
        if cost.len() != n {
            return Err(Error::param(
                "cost",
                format!("cost has {} coefficients for a ground set of size {n}", cost.len()),
            ));
        }
        if k == 0 || k > n {
            return Err(Error::param("k", format!("cardinality must satisfy 1 <= k <= n = {n}, got {k}")));
        }
        Ok(Self {
            oracle,
            cost,
            k,
            gamma: gamma.validate()?,
        })
    }

    pub fn ground_size(&self) -> usize {
        self.oracle.ground_size()
    }
}

/// `g(S) − c(S)` with a single evaluation of `g`.
pub fn objective_value<O: ValueOracle>(inst: &ProblemInstance<O>, set: &IndexSet) -> Result<f64> {
    check_set(set, inst.ground_size())?;
    Ok(inst.oracle.value(set)? - inst.cost.cost(set))
}
