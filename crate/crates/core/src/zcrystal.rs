//! The crystal `Z^infinity` attached to a sequence and its twist by a
//! dominant weight. Brute-force generation of the images of `B(infinity)`
//! and `B(lambda)` is built on top.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::adapted_sequence::{AdaptedSequence, DoubleIndex};
use crate::error::{Error, Result};
use crate::linear_forms::{closure, lambda_form, DominantWeight, LinearForm, Operator};
use crate::wall_forms::{comb_infinity_all_shifts, comb_lambda, Horizon, IneqSet};

/// Finitely supported integer vector, indexed by double indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZElement(BTreeMap<DoubleIndex, i64>);

impl ZElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (i64, usize, i64)>) -> Self {
        let mut a = Self::zero();
        for (s, k, v) in entries {
            a.add(DoubleIndex::new(s, k), v);
        }
        a
    }

    pub fn get(&self, d: DoubleIndex) -> i64 {
        self.0.get(&d).copied().unwrap_or(0)
    }

    pub fn add(&mut self, d: DoubleIndex, v: i64) {
        let e = self.0.entry(d).or_insert(0);
        *e += v;
        if *e == 0 {
            self.0.remove(&d);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (DoubleIndex, i64)> + '_ {
        self.0.iter().map(|(&d, &v)| (d, v))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_single(&self, seq: &AdaptedSequence) -> i64 {
        self.0.keys().map(|&d| seq.single(d)).max().unwrap_or(0)
    }

    pub fn coordinate_sum(&self) -> i64 {
        self.0.values().sum()
    }
}

impl fmt::Display for ZElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .entries()
            .map(|(d, v)| format!("a[{},{}]={}", d.s, d.k, v))
            .collect();
        f.write_str(&parts.join(";"))
    }
}

impl FromStr for ZElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("element `{s}`"));
        let mut a = ZElement::zero();
        let s = s.trim();
        if s.is_empty() || s == "0" {
            return Ok(a);
        }
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (lhs, rhs) = part.split_once('=').ok_or_else(bad)?;
            let inner = lhs
                .trim()
                .strip_prefix("a[")
                .and_then(|x| x.strip_suffix(']'))
                .ok_or_else(bad)?;
            let (si, ki) = inner.split_once(',').ok_or_else(bad)?;
            let si: i64 = si.trim().parse().map_err(|_| bad())?;
            let ki: usize = ki.trim().parse().map_err(|_| bad())?;
            if si < 1 || ki < 1 {
                return Err(bad());
            }
            let v: i64 = rhs.trim().parse().map_err(|_| bad())?;
            a.add(DoubleIndex::new(si, ki), v);
        }
        Ok(a)
    }
}

/// `sigma_j` for every single index `1..=limit`, where `limit` covers the
/// support plus one period.
fn sigmas(seq: &AdaptedSequence, a: &ZElement) -> Vec<i64> {
    let n = seq.n();
    let limit = (a.max_single(seq) + n as i64) as usize;
    let mut dense = vec![0i64; limit + 1];
    for (d, v) in a.entries() {
        dense[seq.single(d) as usize] = v;
    }
    let mut suffix = vec![0i64; n + 1];
    let mut out = vec![0i64; limit + 1];
    for j in (1..=limit).rev() {
        let c = seq.entry(j as i64);
        let mut s = dense[j];
        for (t, &v) in suffix.iter().enumerate().skip(1) {
            if v != 0 {
                s += seq.a(c, t) * v;
            }
        }
        out[j] = s;
        suffix[c] += dense[j];
    }
    out
}

/// The `sigma` values of an element and, per color, `epsilon` with the
/// first and last index attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaProfile {
    /// `sigma[j]` for `1 <= j`; index `0` is unused.
    pub sigma: Vec<i64>,
    /// `(epsilon_k, first argmax, last argmax)` at position `k - 1`.
    pub eps: Vec<(i64, i64, i64)>,
}

pub fn sigma_profile(seq: &AdaptedSequence, a: &ZElement) -> SigmaProfile {
    SigmaProfile {
        sigma: sigmas(seq, a),
        eps: (1..=seq.n()).map(|k| eps_profile(seq, a, k)).collect(),
    }
}

/// `sigma_j(a) = a_j + sum_{l > j} <h_{i_j}, alpha_{i_l}> a_l`.
pub fn sigma(seq: &AdaptedSequence, a: &ZElement, j: i64) -> i64 {
    let sg = sigmas(seq, a);
    sg.get(j as usize).copied().unwrap_or(0)
}

/// `(epsilon_k, first argmax, last argmax)` over single indices of color `k`.
fn eps_profile(seq: &AdaptedSequence, a: &ZElement, k: usize) -> (i64, i64, i64) {
    let sg = sigmas(seq, a);
    let mut best = i64::MIN;
    let (mut lo, mut hi) = (0, 0);
    let mut j = seq.first_occurrence(k);
    while (j as usize) < sg.len() {
        let v = sg[j as usize];
        if v > best {
            best = v;
            lo = j;
            hi = j;
        } else if v == best {
            hi = j;
        }
        j += seq.n() as i64;
    }
    (best, lo, hi)
}

pub fn epsilon(seq: &AdaptedSequence, a: &ZElement, k: usize) -> i64 {
    eps_profile(seq, a, k).0
}

/// `<h_k, wt>` of `a` in `Z^infinity [lambda]`.
pub fn wt_pairing(seq: &AdaptedSequence, a: &ZElement, k: usize, lambda: &DominantWeight) -> i64 {
    lambda.get(k) - a.entries().map(|(d, v)| v * seq.a(k, d.k)).sum::<i64>()
}

pub fn phi(seq: &AdaptedSequence, a: &ZElement, k: usize, lambda: &DominantWeight) -> i64 {
    epsilon(seq, a, k) + wt_pairing(seq, a, k, lambda)
}

pub fn f_tilde(seq: &AdaptedSequence, a: &ZElement, k: usize) -> ZElement {
    let (_, lo, _) = eps_profile(seq, a, k);
    let mut b = a.clone();
    b.add(seq.reindex(lo), 1);
    b
}

pub fn e_tilde(seq: &AdaptedSequence, a: &ZElement, k: usize) -> Option<ZElement> {
    let (eps, _, hi) = eps_profile(seq, a, k);
    if eps <= 0 {
        return None;
    }
    let mut b = a.clone();
    b.add(seq.reindex(hi), -1);
    Some(b)
}

/// `f_k` on `a (x) r_lambda`: acts on `a` when `phi_k(a) > -<h_k, lambda>`.
pub fn f_tilde_lambda(seq: &AdaptedSequence, a: &ZElement, k: usize, lambda: &DominantWeight) -> Option<ZElement> {
    let zero = DominantWeight::zero(seq.n());
    (phi(seq, a, k, &zero) > -lambda.get(k)).then(|| f_tilde(seq, a, k))
}

/// `e_k` on `a (x) r_lambda`: acts on `a` when `phi_k(a) >= -<h_k, lambda>`.
pub fn e_tilde_lambda(seq: &AdaptedSequence, a: &ZElement, k: usize, lambda: &DominantWeight) -> Option<ZElement> {
    let zero = DominantWeight::zero(seq.n());
    if phi(seq, a, k, &zero) >= -lambda.get(k) {
        e_tilde(seq, a, k)
    } else {
        None
    }
}

/// `epsilon_k` of `a (x) r_lambda`.
pub fn epsilon_lambda(seq: &AdaptedSequence, a: &ZElement, k: usize, lambda: &DominantWeight) -> i64 {
    let zero = DominantWeight::zero(seq.n());
    let e1 = epsilon(seq, a, k);
    let p1 = phi(seq, a, k, &zero);
    e1.max(-lambda.get(k) - p1 + e1)
}

/// All images of `f`-words of length at most `depth` applied to `0`.
pub fn generate(seq: &AdaptedSequence, depth: usize, lambda: Option<&DominantWeight>) -> BTreeSet<ZElement> {
    let n = seq.n();
    let mut seen: HashSet<ZElement> = HashSet::new();
    seen.insert(ZElement::zero());
    let mut layer = vec![ZElement::zero()];
    for _ in 0..depth {
        let next: Vec<ZElement> = layer
            .par_iter()
            .flat_map_iter(|a| {
                (1..=n).filter_map(move |k| match lambda {
                    None => Some(f_tilde(seq, a, k)),
                    Some(l) => f_tilde_lambda(seq, a, k, l),
                })
            })
            .collect();
        layer = next.into_iter().filter(|b| seen.insert(b.clone())).collect();
    }
    seen.into_iter().collect()
}

/// Checks the crystal axioms at `a` for every color, in `Z^infinity` or in
/// its twist by `lambda`. Returns a description of each failure.
pub fn crystal_axiom_violations(seq: &AdaptedSequence, a: &ZElement, lambda: Option<&DominantWeight>) -> Vec<String> {
    let n = seq.n();
    let zero = DominantWeight::zero(n);
    let lam = lambda.unwrap_or(&zero);
    let eps = |b: &ZElement, k| match lambda {
        None => epsilon(seq, b, k),
        Some(l) => epsilon_lambda(seq, b, k, l),
    };
    let wt = |b: &ZElement, k| wt_pairing(seq, b, k, lam);
    let f = |b: &ZElement, k| match lambda {
        None => Some(f_tilde(seq, b, k)),
        Some(l) => f_tilde_lambda(seq, b, k, l),
    };
    let e = |b: &ZElement, k| match lambda {
        None => e_tilde(seq, b, k),
        Some(l) => e_tilde_lambda(seq, b, k, l),
    };
    let mut bad = Vec::new();
    for k in 1..=n {
        let (ea, pa) = (eps(a, k), eps(a, k) + wt(a, k));
        if lambda.is_none() && phi(seq, a, k, &zero) - epsilon(seq, a, k) != wt(a, k) {
            bad.push(format!("{a}: phi_{k} - epsilon_{k} differs from <h_{k}, wt>"));
        }
        if lambda.is_some() && (ea < 0 || pa < 0) {
            bad.push(format!("{a}: negative epsilon_{k} or phi_{k} in B(lambda)"));
        }
        if let Some(b) = f(a, k) {
            if e(&b, k).as_ref() != Some(a) {
                bad.push(format!("{a}: e_{k} f_{k} is not the identity"));
            }
            if eps(&b, k) != ea + 1 || eps(&b, k) + wt(&b, k) != pa - 1 {
                bad.push(format!("{a}: f_{k} does not shift epsilon and phi by one"));
            }
            for j in 1..=n {
                if wt(&b, j) != wt(a, j) - seq.a(j, k) {
                    bad.push(format!("{a}: f_{k} does not lower wt by alpha_{k}"));
                }
            }
        } else if lambda.is_some() && pa > 0 {
            bad.push(format!("{a}: f_{k} vanishes although phi_{k} > 0"));
        }
        match e(a, k) {
            Some(b) => {
                if f(&b, k).as_ref() != Some(a) {
                    bad.push(format!("{a}: f_{k} e_{k} is not the identity"));
                }
                if eps(&b, k) != ea - 1 || eps(&b, k) + wt(&b, k) != pa + 1 {
                    bad.push(format!("{a}: e_{k} does not shift epsilon and phi by one"));
                }
            }
            None if ea > 0 => bad.push(format!("{a}: e_{k} vanishes although epsilon_{k} > 0")),
            None => {}
        }
    }
    bad
}

/// Outcome of comparing generation by Kashiwara operators with the
/// lattice points cut out by the wall inequalities.
#[derive(Clone, Debug, Default)]
pub struct EquivalenceReport {
    pub depth: usize,
    /// Largest single index of the coordinate box.
    pub box_limit: i64,
    pub generated: usize,
    pub lattice_points: usize,
    pub inequalities: usize,
    /// Colors whose `lambda` inequalities came from the closure because no
    /// closed form applies.
    pub closure_colors: Vec<usize>,
    /// Generated elements violating an inequality.
    pub violations: Vec<(ZElement, LinearForm)>,
    /// Cut lattice points that were not generated.
    pub unreached: Vec<ZElement>,
    /// Generated elements outside the box.
    pub outside_box: Vec<ZElement>,
    /// Single indices `r` in the box for which `x_r >= 0` is missing.
    pub missing_bounds: Vec<i64>,
}

impl EquivalenceReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
            && self.unreached.is_empty()
            && self.outside_box.is_empty()
            && self.missing_bounds.is_empty()
    }
}

/// Wall inequalities (and `lambda` inequalities when given) supported in
/// single indices `1..=limit`.
pub fn window_inequalities(
    seq: &AdaptedSequence,
    lambda: Option<&DominantWeight>,
    limit: i64,
) -> Result<(IneqSet, Vec<usize>)> {
    let n = seq.n() as i64;
    let mut set = IneqSet::new();
    let h = Horizon::new(seq, limit);
    for k in 1..=seq.n() {
        set.extend(comb_infinity_all_shifts(seq, k, h)?);
    }
    let mut fallback = Vec::new();
    if let Some(l) = lambda {
        for k in 1..=seq.n() {
            match comb_lambda(seq, k, l, h) {
                Ok(c) => set.extend(c),
                Err(Error::Unsupported(_)) => {
                    let seed = lambda_form(seq, k, l)?;
                    let cl = closure(seq, &[seed], &Operator::SHat(l.clone()), limit + n)?;
                    for f in cl.certified.into_iter().filter(|f| !f.is_zero()) {
                        set.insert(f, format!("closure k={k}"));
                    }
                    fallback.push(k);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok((set.within(seq, limit), fallback))
}

/// Forms with at most this many terms prune the search as soon as their
/// last coordinate is assigned; the rest are checked on complete vectors.
const PRUNE_TERMS: usize = 4;

/// Forms on single indices `1..=limit`, indexed for fast evaluation on
/// sparse nonnegative vectors.
struct CutIndex {
    m: usize,
    dense: Vec<(i64, Vec<(usize, i64)>)>,
    /// Short forms by their last single index.
    ending: Vec<Vec<usize>>,
    /// Forms by the single indices where they have a negative coefficient.
    negative_at: Vec<Vec<usize>>,
    /// Forms with a negative constant and no terms.
    constant_negative: Vec<usize>,
}

impl CutIndex {
    fn new(seq: &AdaptedSequence, forms: &[LinearForm], limit: i64) -> Self {
        let m = limit as usize;
        let dense: Vec<(i64, Vec<(usize, i64)>)> = forms
            .iter()
            .map(|f| {
                let t = f.terms().map(|(d, c)| (seq.single(d) as usize, c)).collect();
                (f.constant(), t)
            })
            .collect();
        let mut ending: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
        let mut negative_at: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
        let mut constant_negative = Vec::new();
        for (i, (c0, t)) in dense.iter().enumerate() {
            match t.iter().map(|x| x.0).max() {
                Some(top) if t.len() <= PRUNE_TERMS => ending[top].push(i),
                None if *c0 < 0 => constant_negative.push(i),
                _ => {}
            }
            for &(j, c) in t {
                if c < 0 {
                    negative_at[j].push(i);
                }
            }
        }
        CutIndex {
            m,
            dense,
            ending,
            negative_at,
            constant_negative,
        }
    }

    fn value(&self, i: usize, vec: &[i64]) -> i64 {
        let (c0, t) = &self.dense[i];
        c0 + t.iter().map(|&(j, c)| c * vec[j]).sum::<i64>()
    }

    /// Indices of violated forms at a nonnegative vector. A violated form
    /// has a negative constant or a negative coefficient on the support.
    fn violated(&self, vec: &[i64]) -> Vec<usize> {
        let mut bad: BTreeSet<usize> = self.constant_negative.iter().copied().collect();
        for j in (1..=self.m).filter(|&j| vec[j] != 0) {
            bad.extend(self.negative_at[j].iter().copied().filter(|&i| self.value(i, vec) < 0));
        }
        bad.into_iter().collect()
    }

    /// Nonnegative vectors with coordinate sum at most `depth` satisfying
    /// every form.
    fn points(&self, seq: &AdaptedSequence, depth: i64) -> Vec<ZElement> {
        if !self.constant_negative.is_empty() {
            return Vec::new();
        }
        let mut st = Search {
            seq,
            idx: self,
            vec: vec![0i64; self.m + 1],
            out: Vec::new(),
        };
        st.rec(1, depth);
        st.out
    }
}

struct Search<'a> {
    seq: &'a AdaptedSequence,
    idx: &'a CutIndex,
    vec: Vec<i64>,
    out: Vec<ZElement>,
}

impl Search<'_> {
    fn rec(&mut self, j: usize, rem: i64) {
        if j > self.idx.m {
            if self.idx.violated(&self.vec).is_empty() {
                let mut a = ZElement::zero();
                for (r, &v) in self.vec.iter().enumerate().skip(1) {
                    if v != 0 {
                        a.add(self.seq.reindex(r as i64), v);
                    }
                }
                self.out.push(a);
            }
            return;
        }
        for v in 0..=rem {
            self.vec[j] = v;
            if self.idx.ending[j].iter().all(|&i| self.idx.value(i, &self.vec) >= 0) {
                self.rec(j + 1, rem - v);
            }
        }
        self.vec[j] = 0;
    }
}

/// Compares `generate(depth)` with the lattice points of the box that
/// satisfy the window inequalities and have coordinate sum at most `depth`.
/// The box defaults to one period past the largest generated index.
pub fn verify_equivalence(
    seq: &AdaptedSequence,
    lambda: Option<&DominantWeight>,
    depth: usize,
    box_limit: Option<i64>,
) -> Result<EquivalenceReport> {
    let n = seq.n() as i64;
    let gen = generate(seq, depth, lambda);
    let top = gen.iter().map(|a| a.max_single(seq)).max().unwrap_or(0);
    let limit = box_limit.unwrap_or(top + n);
    let mut rep = EquivalenceReport {
        depth,
        box_limit: limit,
        generated: gen.len(),
        ..Default::default()
    };
    if limit < 1 {
        rep.outside_box = gen.iter().filter(|a| !a.is_zero()).cloned().collect();
        rep.lattice_points = 1;
        return Ok(rep);
    }
    let (set, fallback) = window_inequalities(seq, lambda, limit)?;
    rep.closure_colors = fallback;
    rep.inequalities = set.len();
    for r in 1..=limit {
        let d = seq.reindex(r);
        if !set.contains(&LinearForm::x(d.s, d.k)) {
            rep.missing_bounds.push(r);
        }
    }
    let forms: Vec<LinearForm> = set.forms().into_iter().collect();
    let idx = CutIndex::new(seq, &forms, limit);
    for a in &gen {
        if a.max_single(seq) > limit {
            rep.outside_box.push(a.clone());
            continue;
        }
        if a.entries().any(|(_, v)| v < 0) {
            for f in set.violations(a) {
                rep.violations.push((a.clone(), f.clone()));
            }
            continue;
        }
        let mut vec = vec![0i64; limit as usize + 1];
        for (d, v) in a.entries() {
            vec[seq.single(d) as usize] = v;
        }
        for i in idx.violated(&vec) {
            rep.violations.push((a.clone(), forms[i].clone()));
        }
    }
    let points = idx.points(seq, depth as i64);
    rep.lattice_points = points.len();
    rep.unreached = points.into_iter().filter(|p| !gen.contains(p)).collect();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_data::{AffineType, Family};

    fn d2() -> AdaptedSequence {
        AdaptedSequence::from_permutation(AffineType::new(Family::D2, 3).unwrap(), &[3, 2, 1]).unwrap()
    }

    #[test]
    fn zero_element() {
        let s = d2();
        let z = ZElement::zero();
        let l = DominantWeight::new(vec![1, 0, 2]).unwrap();
        for k in 1..=3 {
            assert_eq!(epsilon(&s, &z, k), 0);
            assert_eq!(phi(&s, &z, k, &l), l.get(k));
            assert!(e_tilde(&s, &z, k).is_none());
        }
        assert_eq!(sigma(&s, &z, 1), 0);
    }

    #[test]
    fn first_steps() {
        let s = d2();
        let a: ZElement = "a[1,3]=1".parse().unwrap();
        assert_eq!(epsilon(&s, &a, 3), 1);
        assert_eq!(f_tilde(&s, &ZElement::zero(), 3), a);
        let g = generate(&s, 1, None);
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn lambda_rule() {
        let s = d2();
        let l = DominantWeight::new(vec![0, 0, 1]).unwrap();
        let z = ZElement::zero();
        assert!(f_tilde_lambda(&s, &z, 1, &l).is_none());
        let a = f_tilde_lambda(&s, &z, 3, &l).unwrap();
        assert!(f_tilde_lambda(&s, &a, 3, &l).is_none());
    }

    #[test]
    fn literal_round_trip() {
        let a: ZElement = "a[1,3]=1;a[2,2]=4".parse().unwrap();
        assert_eq!(a.to_string(), "a[1,3]=1;a[2,2]=4");
        assert_eq!("0".parse::<ZElement>().unwrap(), ZElement::zero());
        assert!("a[0,1]=1".parse::<ZElement>().is_err());
    }

    #[test]
    fn generation_grows_with_depth() {
        let s = d2();
        assert_eq!(generate(&s, 0, None).len(), 1);
        let mut prev = generate(&s, 0, None);
        for d in 1..=5 {
            let cur = generate(&s, d, None);
            assert!(prev.is_subset(&cur));
            prev = cur;
        }
    }

    #[test]
    fn generated_sets_are_closed_under_raising() {
        let s = d2();
        let g = generate(&s, 5, None);
        for a in &g {
            for k in 1..=3 {
                if let Some(b) = e_tilde(&s, a, k) {
                    assert!(g.contains(&b), "{b}");
                    assert_eq!(&f_tilde(&s, &b, k), a);
                }
            }
            assert!(crystal_axiom_violations(&s, a, None).is_empty());
        }
    }

    #[test]
    fn small_equivalence_runs() {
        let s = d2();
        let rep = verify_equivalence(&s, None, 5, None).unwrap();
        assert!(rep.is_consistent(), "{rep:?}");
        assert_eq!(rep.generated, rep.lattice_points);
        let l = DominantWeight::new(vec![1, 0, 1]).unwrap();
        let rep = verify_equivalence(&s, Some(&l), 4, None).unwrap();
        assert!(rep.is_consistent(), "{rep:?}");
        let rep = verify_equivalence(&s, Some(&DominantWeight::zero(3)), 0, None).unwrap();
        assert!(rep.is_consistent());
        assert_eq!(rep.generated, 1);
    }

    #[test]
    fn negative_entry_is_cut_off() {
        let s = d2();
        let a = ZElement::from_entries([(1, 1, -1)]);
        let (set, _) = window_inequalities(&s, None, 9).unwrap();
        let bad = set.violations(&a);
        assert!(bad.contains(&&LinearForm::x(1, 1)));
        assert!(!generate(&s, 4, None).contains(&a));
    }

    #[test]
    fn zero_weight_crystal_is_a_point() {
        let s = d2();
        let zero = DominantWeight::zero(3);
        assert_eq!(generate(&s, 6, Some(&zero)).len(), 1);
    }
}
