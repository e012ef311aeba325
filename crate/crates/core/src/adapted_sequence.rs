//! Periodic adapted sequences with their orientation bits `p_{i,j}`. Single
//! and double indices are identified here, and the shift tables `P^X_l(t)`
//! are built from that identification.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;

use crate::affine_data::{AffineType, CartanMatrix, Family, HalfInt};
use crate::error::{Error, Result};

/// Double index `(s, k)`: the `s`-th occurrence of color `k` in the sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DoubleIndex {
    pub s: i64,
    pub k: usize,
}

impl DoubleIndex {
    pub const fn new(s: i64, k: usize) -> Self {
        DoubleIndex { s, k }
    }
}

impl fmt::Display for DoubleIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.s, self.k)
    }
}

/// Sequence `iota = (..., i_2, i_1)` with period `(i_1, ..., i_n)`.
#[derive(Clone)]
pub struct AdaptedSequence {
    base: AffineType,
    wall: AffineType,
    order: Vec<usize>,
    pos: Vec<usize>,
    cartan: CartanMatrix,
    tables: Arc<RwLock<HashMap<HalfInt, Arc<ShiftTable>>>>,
}

impl fmt::Debug for AdaptedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdaptedSequence")
            .field("base", &self.base)
            .field("order", &self.order)
            .finish()
    }
}

impl PartialEq for AdaptedSequence {
    fn eq(&self, o: &Self) -> bool {
        self.base == o.base && self.order == o.order
    }
}

impl Eq for AdaptedSequence {}

impl AdaptedSequence {
    /// `perm[0]` is `i_1`.
    pub fn from_permutation(base: AffineType, perm: &[usize]) -> Result<Self> {
        let n = base.n();
        let mut pos = vec![usize::MAX; n + 1];
        if perm.len() != n {
            return Err(Error::NotAPermutation(perm.to_vec()));
        }
        for (idx, &k) in perm.iter().enumerate() {
            if k == 0 || k > n || pos[k] != usize::MAX {
                return Err(Error::NotAPermutation(perm.to_vec()));
            }
            pos[k] = idx;
        }
        let cartan = base.cartan_matrix();
        let seq = AdaptedSequence {
            base,
            wall: base.langlands_dual(),
            order: perm.to_vec(),
            pos,
            cartan,
            tables: Arc::default(),
        };
        seq.check_adapted()?;
        Ok(seq)
    }

    /// Alternation of every adjacent pair over three periods.
    fn check_adapted(&self) -> Result<()> {
        let n = self.n();
        for i in 1..=n {
            for j in 1..=n {
                if i == j || self.cartan.get(i, j) >= 0 {
                    continue;
                }
                let sub: Vec<usize> = (1..=3 * n as i64)
                    .map(|r| self.entry(r))
                    .filter(|&c| c == i || c == j)
                    .collect();
                if sub.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::NotAdapted(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Type of the algebra.
    pub fn base_type(&self) -> AffineType {
        self.base
    }

    /// Type of the walls indexing the inequalities.
    pub fn wall_type(&self) -> AffineType {
        self.wall
    }

    pub fn cartan(&self) -> &CartanMatrix {
        &self.cartan
    }

    pub fn a(&self, i: usize, j: usize) -> i64 {
        self.cartan.get(i, j)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `i_r` for `r >= 1`.
    pub fn entry(&self, r: i64) -> usize {
        let n = self.n() as i64;
        self.order[(r - 1).rem_euclid(n) as usize]
    }

    /// Orientation bit `p_{i,j}`.
    pub fn p(&self, i: usize, j: usize) -> Result<i64> {
        if i == j {
            return Ok(0);
        }
        if self.cartan.get(i, j) >= 0 {
            return Err(Error::UndefinedPair(i, j));
        }
        Ok((self.pos[i] < self.pos[j]) as i64)
    }

    pub fn reindex(&self, r: i64) -> DoubleIndex {
        let n = self.n() as i64;
        DoubleIndex {
            s: (r - 1).div_euclid(n) + 1,
            k: self.entry(r),
        }
    }

    pub fn single(&self, d: DoubleIndex) -> i64 {
        (d.s - 1) * self.n() as i64 + self.pos[d.k] as i64 + 1
    }

    pub fn compare(&self, a: DoubleIndex, b: DoubleIndex) -> Ordering {
        self.single(a).cmp(&self.single(b))
    }

    /// `iota^{(k)}`: single index of the first occurrence of `k`.
    pub fn first_occurrence(&self, k: usize) -> i64 {
        self.pos[k] as i64 + 1
    }

    /// Memoized table `P^X_l`.
    pub fn shift_table(&self, origin: HalfInt) -> Result<Arc<ShiftTable>> {
        if let Some(t) = self.tables.read().get(&origin) {
            return Ok(t.clone());
        }
        if self.wall.family() != Family::A1 {
            self.wall.periodic_map(origin)?;
        }
        let table = Arc::new(ShiftTable {
            seq: self.without_tables(),
            origin,
            values: RwLock::default(),
        });
        Ok(self.tables.write().entry(origin).or_insert(table).clone())
    }

    /// Convenience for `shift_table(origin)?.get(t)`.
    pub fn shift(&self, origin: HalfInt, t: HalfInt) -> Result<i64> {
        self.shift_table(origin)?.get(t)
    }

    fn without_tables(&self) -> AdaptedSequence {
        AdaptedSequence {
            tables: Arc::default(),
            ..self.clone()
        }
    }
}

/// Lazily filled `P^X_l(t)` for a fixed origin `l`.
pub struct ShiftTable {
    seq: AdaptedSequence,
    origin: HalfInt,
    values: RwLock<HashMap<HalfInt, i64>>,
}

impl fmt::Debug for ShiftTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ShiftTable(P_{})", self.origin)
    }
}

impl ShiftTable {
    pub fn origin(&self) -> HalfInt {
        self.origin
    }

    pub fn wall_type(&self) -> AffineType {
        self.seq.wall
    }

    pub fn get(&self, t: HalfInt) -> Result<i64> {
        if let Some(&v) = self.values.read().get(&t) {
            return Ok(v);
        }
        let x = self.seq.wall;
        x.periodic_map(t)?;
        let v = if x.family() == Family::A1 {
            self.fill_a1(t)?
        } else {
            self.fill(t)?
        };
        Ok(v)
    }

    fn fill_a1(&self, t: HalfInt) -> Result<i64> {
        let x = self.seq.wall;
        let l = self.origin;
        let pi = |u: HalfInt| x.periodic_map(u);
        let mut acc = 0;
        let mut u = l;
        let step = if t >= l { 1 } else { -1 };
        let mut fresh = vec![(l, 0)];
        while u != t {
            let next = u + step;
            acc += self.seq.p(pi(next)?, pi(u)?)?;
            fresh.push((next, acc));
            u = next;
        }
        self.values.write().extend(fresh);
        Ok(acc)
    }

    fn base_case(&self, t: HalfInt) -> Result<Option<i64>> {
        let x = self.seq.wall;
        let n = x.n() as i64;
        let l = self.origin;
        if t == l {
            return Ok(Some(0));
        }
        let seeds: &[(HalfInt, HalfInt, usize)] = &[
            (HalfInt::ONE, HalfInt::from_twice(3), 3),
            (
                HalfInt::from_int(n - 2),
                HalfInt::from_twice(2 * n - 3),
                (n - 2) as usize,
            ),
        ];
        let n_seeds = if x.family() == Family::D1 { 2 } else { 1 };
        let split = matches!(x.family(), Family::B1 | Family::A2odd | Family::D1);
        if split {
            for &(a, b, c) in &seeds[..n_seeds] {
                if (l, t) == (a, b) || (l, t) == (b, a) {
                    let p = &self.seq;
                    return Ok(Some(p.p(c, x.periodic_map(l)?)? - p.p(c, x.periodic_map(t)?)?));
                }
            }
            if t < l {
                return Ok(Some(0));
            }
            if t < l + HalfInt::HALF {
                return Err(Error::ShiftUndefined { origin: l, t });
            }
        } else if t < l {
            return Err(Error::ShiftUndefined { origin: l, t });
        }
        Ok(None)
    }

    fn fill(&self, t: HalfInt) -> Result<i64> {
        if let Some(v) = self.base_case(t)? {
            self.values.write().insert(t, v);
            return Ok(v);
        }
        let x = self.seq.wall;
        let n = x.n();
        let mut local: HashMap<HalfInt, i64> = HashMap::new();
        let mut u = self.origin;
        loop {
            let v = match self.lookup(u, &local)? {
                Some(v) => v,
                None => {
                    let c = x.periodic_map(u)?;
                    let (prev, bit) = if c == 2 && !u.is_integer() {
                        (u - HalfInt::from_twice(3), self.seq.p(2, 3)?)
                    } else if c == n && !u.is_integer() && x.family() == Family::D1 {
                        (u - HalfInt::from_twice(3), self.seq.p(n, n - 2)?)
                    } else {
                        let prev = u - 1;
                        (prev, self.seq.p(c, x.periodic_map(prev)?)?)
                    };
                    let base = self.lookup(prev, &local)?.ok_or(Error::ShiftUndefined {
                        origin: self.origin,
                        t: prev,
                    })?;
                    base + bit
                }
            };
            local.insert(u, v);
            if u >= t {
                break;
            }
            u = x.next_in_domain(u);
        }
        let v = local[&t];
        self.values.write().extend(local);
        Ok(v)
    }

    fn lookup(&self, u: HalfInt, local: &HashMap<HalfInt, i64>) -> Result<Option<i64>> {
        if let Some(&v) = local.get(&u) {
            return Ok(Some(v));
        }
        if let Some(&v) = self.values.read().get(&u) {
            return Ok(Some(v));
        }
        self.base_case(u)
    }
}
