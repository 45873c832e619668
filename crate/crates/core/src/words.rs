//! Group elements of free groups `F_n` and free abelian groups `Z^k`, their
//! word-length functions, and canonical enumeration of balls and spheres.
//!
//! Free-group words are stored freely reduced as signed generator indices:
//! `+i` is the `i`-th generator and `-i` its inverse (1-based). The text form
//! uses `a, b, c, ...` for generators and the uppercase letter for inverses;
//! the identity is the empty string. Free abelian elements are integer
//! vectors written `[1,-2]`, with length the l1 norm.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Mul, Range};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default cap on the number of elements of an enumerated ball.
pub const DEFAULT_BALL_CAP: usize = 200_000;

const MAX_FREE_RANK: u8 = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupSpec {
    Free(u8),
    FreeAbelian(u8),
}

impl GroupSpec {
    pub fn free(rank: u8) -> Result<Self> {
        if rank == 0 || rank > MAX_FREE_RANK {
            return Err(Error::usage(format!(
                "free group rank must be in 1..={MAX_FREE_RANK}, got {rank}"
            )));
        }
        Ok(GroupSpec::Free(rank))
    }

    pub fn free_abelian(rank: u8) -> Result<Self> {
        if rank == 0 {
            return Err(Error::usage("free abelian rank must be at least 1"));
        }
        Ok(GroupSpec::FreeAbelian(rank))
    }

    pub fn rank(&self) -> u8 {
        match *self {
            GroupSpec::Free(n) | GroupSpec::FreeAbelian(n) => n,
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, GroupSpec::Free(_))
    }

    pub fn identity(&self) -> GroupElement {
        let repr = match *self {
            GroupSpec::Free(_) => Repr::Word(Vec::new()),
            GroupSpec::FreeAbelian(k) => Repr::Vector(vec![0; k as usize]),
        };
        GroupElement { spec: *self, repr }
    }

    /// The `i`-th generator (1-based); `inverse` selects its inverse.
    pub fn generator(&self, i: u8, inverse: bool) -> Result<GroupElement> {
        if i == 0 || i > self.rank() {
            return Err(Error::usage(format!("generator {i} out of range for {self}")));
        }
        let sign = if inverse { -1 } else { 1 };
        Ok(match *self {
            GroupSpec::Free(_) => GroupElement {
                spec: *self,
                repr: Repr::Word(vec![sign * i as i8]),
            },
            GroupSpec::FreeAbelian(k) => {
                let mut v = vec![0; k as usize];
                v[i as usize - 1] = sign as i32;
                GroupElement {
                    spec: *self,
                    repr: Repr::Vector(v),
                }
            }
        })
    }

    /// All generators and their inverses in canonical letter order.
    pub fn letters(&self) -> Vec<GroupElement> {
        (1..=self.rank())
            .flat_map(|i| [false, true].map(|inv| self.generator(i, inv).expect("in range")))
            .collect()
    }

    /// Number of elements of length exactly `m`.
    pub fn sphere_size(&self, m: u32) -> u128 {
        match *self {
            GroupSpec::Free(n) => {
                if m == 0 {
                    1
                } else {
                    let n = n as u128;
                    2 * n * (2 * n - 1).saturating_pow(m - 1)
                }
            }
            GroupSpec::FreeAbelian(k) => {
                if m == 0 {
                    return 1;
                }
                // choose j nonzero coordinates, their signs, and a composition of m into j parts
                (1..=k.min(m.min(u8::MAX as u32) as u8))
                    .map(|j| {
                        (1u128 << j)
                            * binomial(k as u128, j as u128)
                            * binomial(m as u128 - 1, j as u128 - 1)
                    })
                    .sum()
            }
        }
    }

    pub fn ball_size(&self, radius: u32) -> u128 {
        (0..=radius)
            .map(|m| self.sphere_size(m))
            .fold(0u128, |a, b| a.saturating_add(b))
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Free(n) => write!(f, "f{n}"),
            GroupSpec::FreeAbelian(k) => write!(f, "z{k}"),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Accepts `f<n>` for the free group of rank n and `z<k>` for `Z^k`.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse {
            what: "group spec",
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (kind, rank) = s.trim().split_at_checked(1).ok_or_else(|| err("empty"))?;
        let rank: u8 = rank.parse().map_err(|_| err("expected f<n> or z<k>"))?;
        match kind {
            "f" | "F" => GroupSpec::free(rank),
            "z" | "Z" => GroupSpec::free_abelian(rank),
            _ => Err(err("expected f<n> or z<k>")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Word(Vec<i8>),
    Vector(Vec<i32>),
}

/// An element of a free or free abelian group. Free words are always reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    spec: GroupSpec,
    repr: Repr,
}

fn push_reduced(buf: &mut Vec<i8>, letter: i8) {
    if buf.last() == Some(&-letter) {
        buf.pop();
    } else {
        buf.push(letter);
    }
}

/// Position of a letter in the order `g1 < g1^-1 < g2 < g2^-1 < ...`.
#[inline]
fn letter_rank(l: i8) -> u8 {
    let i = l.unsigned_abs() - 1;
    2 * i + u8::from(l < 0)
}

impl GroupElement {
    /// Builds a free-group word from signed generator indices, reducing it.
    pub fn from_letters<I>(spec: GroupSpec, letters: I) -> Result<Self>
    where
        I: IntoIterator<Item = i8>,
    {
        let GroupSpec::Free(n) = spec else {
            return Err(Error::usage(format!("{spec} is not a free group")));
        };
        let mut buf = Vec::new();
        for l in letters {
            if l == 0 || l.unsigned_abs() > n {
                return Err(Error::usage(format!("letter {l} out of range for {spec}")));
            }
            push_reduced(&mut buf, l);
        }
        Ok(GroupElement {
            spec,
            repr: Repr::Word(buf),
        })
    }

    pub fn from_vector(spec: GroupSpec, v: Vec<i32>) -> Result<Self> {
        let GroupSpec::FreeAbelian(k) = spec else {
            return Err(Error::usage(format!("{spec} is not free abelian")));
        };
        if v.len() != k as usize {
            return Err(Error::usage(format!(
                "vector of length {} does not belong to {spec}",
                v.len()
            )));
        }
        Ok(GroupElement {
            spec,
            repr: Repr::Vector(v),
        })
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn letters(&self) -> Option<&[i8]> {
        match &self.repr {
            Repr::Word(w) => Some(w),
            Repr::Vector(_) => None,
        }
    }

    pub fn vector(&self) -> Option<&[i32]> {
        match &self.repr {
            Repr::Vector(v) => Some(v),
            Repr::Word(_) => None,
        }
    }

    pub fn length(&self) -> u32 {
        match &self.repr {
            Repr::Word(w) => w.len() as u32,
            Repr::Vector(v) => v.iter().map(|x| x.unsigned_abs()).sum(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.length() == 0
    }

    pub fn inverse(&self) -> Self {
        let repr = match &self.repr {
            Repr::Word(w) => Repr::Word(w.iter().rev().map(|l| -l).collect()),
            Repr::Vector(v) => Repr::Vector(v.iter().map(|x| -x).collect()),
        };
        GroupElement {
            spec: self.spec,
            repr,
        }
    }

    pub fn multiply(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.spec != other.spec {
            return Err(Error::usage(format!(
                "cannot multiply elements of {} and {}",
                self.spec, other.spec
            )));
        }
        let repr = match (&self.repr, &other.repr) {
            (Repr::Word(u), Repr::Word(v)) => {
                // cancel the overlap between the tail of u and the head of v
                let mut cut = 0;
                while cut < u.len().min(v.len()) && u[u.len() - 1 - cut] == -v[cut] {
                    cut += 1;
                }
                let mut w = Vec::with_capacity(u.len() + v.len() - 2 * cut);
                w.extend_from_slice(&u[..u.len() - cut]);
                w.extend_from_slice(&v[cut..]);
                Repr::Word(w)
            }
            (Repr::Vector(u), Repr::Vector(v)) => {
                Repr::Vector(u.iter().zip(v).map(|(a, b)| a + b).collect())
            }
            _ => unreachable!("representation follows the spec"),
        };
        Ok(GroupElement {
            spec: self.spec,
            repr,
        })
    }

    /// First `k` letters of a free word (`k` clamped to the length).
    pub fn prefix(&self, k: usize) -> Option<GroupElement> {
        let w = self.letters()?;
        Some(GroupElement {
            spec: self.spec,
            repr: Repr::Word(w[..k.min(w.len())].to_vec()),
        })
    }

    /// Last `k` letters of a free word (`k` clamped to the length).
    pub fn suffix(&self, k: usize) -> Option<GroupElement> {
        let w = self.letters()?;
        let k = k.min(w.len());
        Some(GroupElement {
            spec: self.spec,
            repr: Repr::Word(w[w.len() - k..].to_vec()),
        })
    }

    pub fn parse(spec: GroupSpec, s: &str) -> Result<Self> {
        let err = |reason: String| Error::Parse {
            what: "group element",
            input: s.to_string(),
            reason,
        };
        match spec {
            GroupSpec::Free(n) => {
                let mut letters = Vec::with_capacity(s.len());
                for c in s.chars() {
                    let l = match c {
                        'a'..='z' => (c as u8 - b'a' + 1) as i8,
                        'A'..='Z' => -((c as u8 - b'A' + 1) as i8),
                        _ => return Err(err(format!("unexpected character {c:?}"))),
                    };
                    if l.unsigned_abs() > n {
                        return Err(err(format!("letter {c:?} out of range for {spec}")));
                    }
                    letters.push(l);
                }
                GroupElement::from_letters(spec, letters)
            }
            GroupSpec::FreeAbelian(k) => {
                let inner = s
                    .trim()
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(']'))
                    .ok_or_else(|| err("expected a bracketed integer list".into()))?;
                let v = inner
                    .split(',')
                    .map(|t| t.trim().parse::<i32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| err(e.to_string()))?;
                if v.len() != k as usize {
                    return Err(err(format!("expected {k} coordinates, got {}", v.len())));
                }
                GroupElement::from_vector(spec, v)
            }
        }
    }

    /// Ordering key within a sphere; only meaningful for equal specs.
    fn cmp_same_length(&self, other: &Self) -> Ordering {
        match (&self.repr, &other.repr) {
            (Repr::Word(u), Repr::Word(v)) => u
                .iter()
                .map(|&l| letter_rank(l))
                .cmp(v.iter().map(|&l| letter_rank(l))),
            (Repr::Vector(u), Repr::Vector(v)) => u.cmp(v),
            _ => Ordering::Equal,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Word(w) => {
                for &l in w {
                    let base = if l > 0 { b'a' } else { b'A' };
                    write!(f, "{}", (base + l.unsigned_abs() - 1) as char)?;
                }
                Ok(())
            }
            Repr::Vector(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Canonical order: spec, then length, then lexicographic. Free words use
/// the letter order `a < A < b < B < ...`; vectors compare as integer tuples.
impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.spec
            .cmp(&other.spec)
            .then_with(|| self.length().cmp(&other.length()))
            .then_with(|| self.cmp_same_length(other))
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;

    /// Panics on mismatched specs; use [`GroupElement::multiply`] otherwise.
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        self.multiply(rhs).expect("group elements of the same spec")
    }
}

/// All elements of length exactly `m`, in canonical order.
pub fn sphere(spec: GroupSpec, m: u32) -> Vec<GroupElement> {
    match spec {
        GroupSpec::Free(n) => {
            let letters: Vec<i8> = (1..=n as i8).flat_map(|i| [i, -i]).collect();
            let mut words: Vec<Vec<i8>> = vec![Vec::new()];
            for _ in 0..m {
                let mut next = Vec::with_capacity(words.len() * letters.len());
                for w in &words {
                    for &l in &letters {
                        if w.last() != Some(&-l) {
                            let mut v = w.clone();
                            v.push(l);
                            next.push(v);
                        }
                    }
                }
                words = next;
            }
            words
                .into_iter()
                .map(|w| GroupElement {
                    spec,
                    repr: Repr::Word(w),
                })
                .collect()
        }
        GroupSpec::FreeAbelian(k) => {
            let mut out = Vec::new();
            let mut cur = Vec::with_capacity(k as usize);
            abelian_sphere(k as usize, m as i64, &mut cur, &mut out);
            out.into_iter()
                .map(|v| GroupElement {
                    spec,
                    repr: Repr::Vector(v),
                })
                .collect()
        }
    }
}

// Integer vectors with l1 norm exactly `remaining`, ascending lexicographically.
fn abelian_sphere(k: usize, remaining: i64, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
    if cur.len() + 1 == k {
        if remaining == 0 {
            cur.push(0);
            out.push(cur.clone());
            cur.pop();
        } else {
            for x in [-remaining, remaining] {
                cur.push(x as i32);
                out.push(cur.clone());
                cur.pop();
            }
        }
        return;
    }
    for x in -remaining..=remaining {
        cur.push(x as i32);
        abelian_sphere(k, remaining - x.abs(), cur, out);
        cur.pop();
    }
}

/// The ball `{g : l(g) <= radius}` in canonical order with a reverse lookup.
/// Sphere `m` occupies a contiguous range of positions; position 0 is `e`.
#[derive(Clone, Debug)]
pub struct BallIndex {
    spec: GroupSpec,
    radius: u32,
    elements: Vec<GroupElement>,
    lookup: HashMap<GroupElement, usize>,
    levels: Vec<u32>,
    sphere_starts: Vec<usize>,
}

impl BallIndex {
    pub fn new(spec: GroupSpec, radius: u32) -> Result<Self> {
        Self::with_cap(spec, radius, DEFAULT_BALL_CAP)
    }

    pub fn with_cap(spec: GroupSpec, radius: u32, cap: usize) -> Result<Self> {
        let size = spec.ball_size(radius);
        if size > cap as u128 {
            return Err(Error::Capacity { radius, size, cap });
        }
        let mut elements = Vec::with_capacity(size as usize);
        let mut levels = Vec::with_capacity(size as usize);
        let mut sphere_starts = Vec::with_capacity(radius as usize + 2);
        for m in 0..=radius {
            sphere_starts.push(elements.len());
            let s = sphere(spec, m);
            levels.extend(std::iter::repeat_n(m, s.len()));
            elements.extend(s);
        }
        sphere_starts.push(elements.len());
        let lookup = elements
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
        Ok(BallIndex {
            spec,
            radius,
            elements,
            lookup,
            levels,
            sphere_starts,
        })
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.lookup.get(g).copied()
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Positions of the sphere of length `m`; empty beyond the radius.
    pub fn sphere_range(&self, m: u32) -> Range<usize> {
        if m > self.radius {
            let end = self.elements.len();
            return end..end;
        }
        self.sphere_starts[m as usize]..self.sphere_starts[m as usize + 1]
    }
}

/// Enumerates the ball of radius `radius` with the default capacity cap.
pub fn enumerate_ball(spec: GroupSpec, radius: u32) -> Result<BallIndex> {
    BallIndex::new(spec, radius)
}
