//! Root data for the classical affine families. Besides Cartan matrices and
//! their Langlands duals this holds the periodic color maps on half-integer
//! levels, from which index classes and wall thresholds are read off.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One of the classical affine families. The rank parameter `n` is the size
/// of the index set `I = {1, ..., n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `A^{(1)}_{n-1}`
    A1,
    /// `B^{(1)}_{n-1}`
    B1,
    /// `C^{(1)}_{n-1}`
    C1,
    /// `D^{(1)}_{n-1}`
    D1,
    /// `A^{(2)}_{2n-2}`
    A2even,
    /// `A^{(2)dagger}_{2n-2}`, the renumbered twin of `A2even`.
    A2evenDagger,
    /// `A^{(2)}_{2n-3}`
    A2odd,
    /// `D^{(2)}_n`
    D2,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::A1,
        Family::B1,
        Family::C1,
        Family::D1,
        Family::A2even,
        Family::A2evenDagger,
        Family::A2odd,
        Family::D2,
    ];

    pub fn min_rank(self) -> usize {
        match self {
            Family::A1 => 2,
            Family::B1 | Family::A2odd => 4,
            Family::D1 => 5,
            Family::C1 | Family::D2 | Family::A2even | Family::A2evenDagger => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::A1 => "A1",
            Family::B1 => "B1",
            Family::C1 => "C1",
            Family::D1 => "D1",
            Family::A2even => "A2even",
            Family::A2evenDagger => "A2evenDagger",
            Family::A2odd => "A2odd",
            Family::D2 => "D2",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let f = match s {
            "A1" => Family::A1,
            "B1" => Family::B1,
            "C1" => Family::C1,
            "D1" => Family::D1,
            "A2even" => Family::A2even,
            "A2evenDagger" | "A2dagger" => Family::A2evenDagger,
            "A2odd" => Family::A2odd,
            "D2" => Family::D2,
            _ => return Err(Error::Parse(format!("unknown affine family `{s}`"))),
        };
        Ok(f)
    }
}

/// An affine type together with its rank parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineType {
    family: Family,
    n: usize,
}

impl AffineType {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        if n < family.min_rank() {
            return Err(Error::RankTooSmall {
                family: family.name(),
                n,
                min: family.min_rank(),
            });
        }
        Ok(AffineType { family, n })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `D^{(1)}_4` needs its own inequality tables.
    pub fn is_small_d1(&self) -> bool {
        self.family == Family::D1 && self.n == 5
    }

    /// Numbering actually used for wall combinatorics. `A2even` is handled
    /// through the dagger numbering.
    pub fn active_numbering(&self) -> Family {
        match self.family {
            Family::A2even => Family::A2evenDagger,
            f => f,
        }
    }

    pub fn langlands_dual(&self) -> AffineType {
        let family = match self.family {
            Family::A1 => Family::A1,
            Family::D1 => Family::D1,
            Family::C1 => Family::D2,
            Family::D2 => Family::C1,
            Family::B1 => Family::A2odd,
            Family::A2odd => Family::B1,
            Family::A2even => Family::A2evenDagger,
            Family::A2evenDagger => Family::A2even,
        };
        AffineType { family, n: self.n }
    }

    pub fn cartan_matrix(&self) -> CartanMatrix {
        CartanMatrix::build(self)
    }

    /// Periodic color map `pi'_X` (`pi` for `A1`).
    pub fn periodic_map(&self, t: HalfInt) -> Result<usize> {
        let n = self.n as i64;
        let dom = || Error::Domain { ty: *self, t };
        match self.active_numbering() {
            Family::A1 => {
                let t = t.as_integer().ok_or_else(dom)?;
                Ok((t - 1).rem_euclid(n) as usize + 1)
            }
            Family::C1 | Family::D2 | Family::A2evenDagger => {
                let t = t.as_integer().ok_or_else(dom)?;
                if t < 1 {
                    return Err(dom());
                }
                let p = 2 * n - 2;
                let r = (t - 1).rem_euclid(p) + 1;
                Ok(if r <= n { r } else { 2 * n - r } as usize)
            }
            Family::B1 | Family::A2odd => {
                let p = 2 * n - 4;
                if t < HalfInt::ONE {
                    return Err(dom());
                }
                match t.as_integer() {
                    Some(t) => {
                        let r = (t - 1).rem_euclid(p) + 1;
                        Ok(if r == 1 {
                            1
                        } else if r < n {
                            r + 1
                        } else {
                            2 * n - r - 1
                        } as usize)
                    }
                    None => {
                        // only 3/2 + p z
                        if (t.twice() - 3).rem_euclid(2 * p) == 0 {
                            Ok(2)
                        } else {
                            Err(dom())
                        }
                    }
                }
            }
            Family::D1 => {
                let p = 2 * n - 6;
                if t < HalfInt::ONE {
                    return Err(dom());
                }
                match t.as_integer() {
                    Some(t) => {
                        let r = (t - 1).rem_euclid(p) + 1;
                        Ok(if r == 1 {
                            1
                        } else if r <= n - 2 {
                            r + 1
                        } else {
                            2 * n - r - 3
                        } as usize)
                    }
                    None => {
                        if (t.twice() - 3).rem_euclid(2 * p) == 0 {
                            Ok(2)
                        } else if (t.twice() - (2 * n - 3)).rem_euclid(2 * p) == 0 {
                            Ok(self.n)
                        } else {
                            Err(dom())
                        }
                    }
                }
            }
            Family::A2even => unreachable!("routed through the dagger numbering"),
        }
    }

    /// Period of the color map, in levels.
    pub fn period(&self) -> i64 {
        let n = self.n as i64;
        match self.active_numbering() {
            Family::A1 => n,
            Family::C1 | Family::D2 | Family::A2evenDagger | Family::A2even => 2 * n - 2,
            Family::B1 | Family::A2odd => 2 * n - 4,
            Family::D1 => 2 * n - 6,
        }
    }

    pub fn in_domain(&self, t: HalfInt) -> bool {
        self.periodic_map(t).is_ok()
    }

    /// Next domain point strictly above `t`.
    pub fn next_in_domain(&self, t: HalfInt) -> HalfInt {
        let mut u = t.add_half();
        while !self.in_domain(u) {
            u = u.add_half();
        }
        u
    }

    /// Previous domain point strictly below `t`, if any.
    pub fn prev_in_domain(&self, t: HalfInt) -> Option<HalfInt> {
        let floor = if self.family == Family::A1 {
            None
        } else {
            Some(HalfInt::ONE)
        };
        let mut u = t.sub_half();
        loop {
            if let Some(f) = floor {
                if u < f {
                    return None;
                }
            }
            if self.in_domain(u) {
                return Some(u);
            }
            u = u.sub_half();
        }
    }

    /// Class-1 indices for walls of this type.
    pub fn class_one(&self) -> Vec<usize> {
        let n = self.n;
        match self.active_numbering() {
            Family::A1 => (1..=n).collect(),
            Family::B1 => vec![1, 2, n],
            Family::D1 => vec![1, 2, n - 1, n],
            Family::A2evenDagger | Family::A2even => vec![1],
            Family::A2odd => vec![1, 2],
            Family::D2 => vec![1, n],
            Family::C1 => vec![],
        }
    }

    pub fn index_class(&self, k: usize) -> Result<u8> {
        self.check_index(k)?;
        Ok(if self.class_one().contains(&k) { 1 } else { 2 })
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n {
            Err(Error::IndexOutOfRange { k, n: self.n })
        } else {
            Ok(())
        }
    }

    /// `(T_k, Tbar_k, Tbarbar_k)`: `T_k` is present for class-1 indices only.
    pub fn thresholds(&self, k: usize) -> Result<Thresholds> {
        self.check_index(k)?;
        if self.family == Family::A1 {
            let t = HalfInt::from_int(k as i64);
            let tt = HalfInt::from_int((k + self.n) as i64);
            return Ok(Thresholds {
                t: Some(k as i64),
                tbar: t,
                tbarbar: tt,
            });
        }
        let mut hits = Vec::with_capacity(2);
        let mut u = HalfInt::ONE;
        let limit = HalfInt::from_int(1 + 3 * self.period());
        while hits.len() < 2 && u <= limit {
            if self.periodic_map(u).ok() == Some(k) {
                hits.push(u);
            }
            u = self.next_in_domain(u);
        }
        debug_assert_eq!(hits.len(), 2);
        let class1 = self.class_one().contains(&k);
        Ok(Thresholds {
            t: class1.then(|| hits[0].floor()),
            tbar: hits[0],
            tbarbar: hits[1],
        })
    }

    /// Indices adjacent to `k` in the Dynkin diagram, ascending.
    pub fn neighbors(&self, k: usize) -> Vec<usize> {
        let a = self.cartan_matrix();
        (1..=self.n).filter(|&j| j != k && a.get(k, j) < 0).collect()
    }
}

impl fmt::Display for AffineType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.family, self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub t: Option<i64>,
    pub tbar: HalfInt,
    pub tbarbar: HalfInt,
}

/// Generalized Cartan matrix, 1-indexed through [`CartanMatrix::get`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanMatrix {
    n: usize,
    a: Vec<i64>,
}

impl CartanMatrix {
    fn build(ty: &AffineType) -> Self {
        let n = ty.n;
        let mut m = CartanMatrix { n, a: vec![0; n * n] };
        for i in 1..=n {
            m.set(i, i, 2);
        }
        let edge = |m: &mut CartanMatrix, i: usize, j: usize| {
            m.set(i, j, -1);
            m.set(j, i, -1);
        };
        match ty.family {
            Family::A1 => {
                if n == 2 {
                    m.set(1, 2, -2);
                    m.set(2, 1, -2);
                } else {
                    for i in 1..n {
                        edge(&mut m, i, i + 1);
                    }
                    edge(&mut m, 1, n);
                }
            }
            Family::B1 | Family::A2odd => {
                edge(&mut m, 1, 3);
                edge(&mut m, 2, 3);
                for i in 3..n {
                    edge(&mut m, i, i + 1);
                }
                if ty.family == Family::B1 {
                    m.set(n, n - 1, -2);
                } else {
                    m.set(n - 1, n, -2);
                }
            }
            Family::D1 => {
                edge(&mut m, 1, 3);
                edge(&mut m, 2, 3);
                for i in 3..n - 2 {
                    edge(&mut m, i, i + 1);
                }
                edge(&mut m, n - 2, n - 1);
                edge(&mut m, n - 2, n);
            }
            Family::C1 | Family::D2 | Family::A2even | Family::A2evenDagger => {
                for i in 1..n {
                    edge(&mut m, i, i + 1);
                }
                let (left, right) = match ty.family {
                    Family::C1 => ((2, 1), (n - 1, n)),
                    Family::D2 => ((1, 2), (n, n - 1)),
                    Family::A2even => ((2, 1), (n, n - 1)),
                    _ => ((1, 2), (n - 1, n)),
                };
                m.set(left.0, left.1, -2);
                m.set(right.0, right.1, -2);
            }
        }
        m
    }

    fn set(&mut self, i: usize, j: usize, v: i64) {
        self.a[(i - 1) * self.n + (j - 1)] = v;
    }

    /// `a_{i,j} = <h_i, alpha_j>`.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.a[(i - 1) * self.n + (j - 1)]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> CartanMatrix {
        let mut t = self.clone();
        for i in 1..=self.n {
            for j in 1..=self.n {
                t.set(i, j, self.get(j, i));
            }
        }
        t
    }
}

/// Exact element of `(1/2) Z`, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const ONE: HalfInt = HalfInt(2);
    pub const HALF: HalfInt = HalfInt(1);

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(v: i64) -> Self {
        HalfInt(2 * v)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn as_integer(self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn floor(self) -> i64 {
        self.0.div_euclid(2)
    }

    pub fn add_half(self) -> Self {
        HalfInt(self.0 + 1)
    }

    pub fn sub_half(self) -> Self {
        HalfInt(self.0 - 1)
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl std::ops::Add<i64> for HalfInt {
    type Output = HalfInt;
    fn add(self, o: i64) -> HalfInt {
        HalfInt(self.0 + 2 * o)
    }
}

impl std::ops::Sub<i64> for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: i64) -> HalfInt {
        HalfInt(self.0 - 2 * o)
    }
}

impl From<i64> for HalfInt {
    fn from(v: i64) -> Self {
        HalfInt::from_int(v)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad half-integer `{s}`"));
        let s = s.trim();
        if let Some(num) = s.strip_suffix("/2") {
            let v: i64 = num.trim().parse().map_err(|_| bad())?;
            if v % 2 == 0 {
                return Err(bad());
            }
            Ok(HalfInt(v))
        } else {
            let v: i64 = s.parse().map_err(|_| bad())?;
            Ok(HalfInt::from_int(v))
        }
    }
}
