//! Pole monomials, operator terms and expansions.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use super::expr::{Atom, Point, TraceChain};
use crate::coeff::{Coeff, Rational};

/// Product of `(p - base)^{-a} (p̄ - b̄ase)^{-b}` over separation labels `p`.
///
/// Entries with `a = b = 0` are never stored, so the empty monomial is the
/// finite (normal-ordered) tag.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoleMonomial {
    poles: Vec<(Point, u32, u32)>,
}

impl PoleMonomial {
    pub fn finite() -> Self {
        PoleMonomial { poles: Vec::new() }
    }

    pub fn single(p: Point, a: u32, b: u32) -> Self {
        let mut m = Self::finite();
        m.multiply(p, a, b);
        m
    }

    pub fn is_finite(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn entries(&self) -> &[(Point, u32, u32)] {
        &self.poles
    }

    /// `(a, b)` for one separation label.
    pub fn orders(&self, p: Point) -> (u32, u32) {
        self.poles
            .iter()
            .find(|(q, _, _)| *q == p)
            .map(|&(_, a, b)| (a, b))
            .unwrap_or((0, 0))
    }

    pub fn multiply(&mut self, p: Point, a: u32, b: u32) {
        if a == 0 && b == 0 {
            return;
        }
        match self.poles.binary_search_by(|(q, _, _)| q.cmp(&p)) {
            Ok(i) => {
                self.poles[i].1 += a;
                self.poles[i].2 += b;
            }
            Err(i) => self.poles.insert(i, (p, a, b)),
        }
    }

    pub fn times(&self, other: &PoleMonomial) -> PoleMonomial {
        let mut out = self.clone();
        for &(p, a, b) in &other.poles {
            out.multiply(p, a, b);
        }
        out
    }

    pub(crate) fn remove(&mut self, p: Point) -> (u32, u32) {
        match self.poles.iter().position(|(q, _, _)| *q == p) {
            Some(i) => {
                let (_, a, b) = self.poles.remove(i);
                (a, b)
            }
            None => (0, 0),
        }
    }

    /// Every separation carries a pole of the form `|p|^{-2k}`.
    pub fn is_rotation_invariant(&self) -> bool {
        self.poles.iter().all(|&(_, a, b)| a == b)
    }

    pub fn parity(&self) -> PoleMonomial {
        PoleMonomial { poles: self.poles.iter().map(|&(p, a, b)| (p, b, a)).collect() }
    }
}

impl fmt::Display for PoleMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poles.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        for &(p, a, b) in &self.poles {
            for (suffix, k) in [("", a), ("b", b)] {
                if k == 0 {
                    continue;
                }
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                write!(f, "{p}{suffix}^-{k}")?;
            }
        }
        Ok(())
    }
}

/// Coefficient × pole × normal-ordered product of trace chains.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperatorTerm {
    pub coeff: Coeff,
    pub pole: PoleMonomial,
    pub chains: Vec<TraceChain>,
    pub connected: bool,
    /// Union-find parents over factor origins; empty once stripped.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub(crate) links: Vec<u8>,
}

impl OperatorTerm {
    pub fn new(coeff: Coeff, pole: PoleMonomial, chains: Vec<TraceChain>) -> Self {
        OperatorTerm { coeff, pole, chains, connected: true, links: Vec::new() }
    }

    pub(crate) fn with_links(mut self, links: Vec<u8>) -> Self {
        self.links = links;
        self.refresh_connected();
        self
    }

    pub(crate) fn root(links: &[u8], mut x: u8) -> u8 {
        while links[x as usize] != x {
            x = links[x as usize];
        }
        x
    }

    pub(crate) fn union(links: &mut [u8], x: u8, y: u8) {
        let rx = Self::root(links, x);
        let ry = Self::root(links, y);
        if rx != ry {
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            links[hi as usize] = lo;
        }
    }

    pub(crate) fn refresh_connected(&mut self) {
        if self.links.is_empty() {
            return;
        }
        let r0 = Self::root(&self.links, 0);
        self.connected = (0..self.links.len() as u8).all(|o| Self::root(&self.links, o) == r0);
    }

    fn normalized_links(&self) -> Vec<u8> {
        (0..self.links.len() as u8).map(|o| Self::root(&self.links, o)).collect()
    }

    /// All field atoms of the product.
    pub fn fields(&self) -> impl Iterator<Item = &Atom> {
        self.chains.iter().flat_map(|c| c.fields())
    }
}

impl fmt::Display for OperatorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ; {} ; ", self.coeff, self.pole)?;
        if self.chains.is_empty() {
            f.write_str("1")?;
        }
        for (i, c) in self.chains.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " ; {}", if self.connected { "c" } else { "d" })
    }
}

/// Formal sum of operator terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Expansion {
    pub terms: Vec<OperatorTerm>,
    /// Number of factor origins tracked by the linked-cluster bookkeeping.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub(crate) origins: u8,
}

type MergeKey = (PoleMonomial, Vec<TraceChain>, bool, Vec<u8>);

impl Expansion {
    pub fn zero() -> Self {
        Expansion { terms: Vec::new(), origins: 0 }
    }

    /// Build from terms that carry no origin bookkeeping.
    pub fn from_terms(terms: Vec<OperatorTerm>) -> Self {
        Expansion { terms, origins: 0 }.normalize()
    }

    pub(crate) fn with_origins(terms: Vec<OperatorTerm>, origins: u8) -> Self {
        Expansion { terms, origins }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Canonicalize chains, drop vanishing terms and merge like terms while
    /// keeping origin labels.
    pub fn normalize(self) -> Self {
        let origins = self.origins;
        let mut merged: BTreeMap<MergeKey, Coeff> = BTreeMap::new();
        for t in self.terms {
            if t.coeff.is_zero() {
                continue;
            }
            let mut chains = Vec::with_capacity(t.chains.len());
            let mut vanishes = false;
            for c in &t.chains {
                match c.canonicalize() {
                    Some(c) => chains.push(c),
                    None => {
                        vanishes = true;
                        break;
                    }
                }
            }
            if vanishes {
                continue;
            }
            chains.sort();
            let key = (t.pole.clone(), chains, t.connected, t.normalized_links());
            *merged.entry(key).or_default() += &t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((pole, chains, connected, links), coeff)| OperatorTerm {
                coeff,
                pole,
                chains,
                connected,
                links,
            })
            .collect();
        Expansion { terms, origins }
    }

    /// Strip origin labels and merge: the form used for equality and output.
    pub fn canonical(&self) -> Expansion {
        let terms = self
            .terms
            .iter()
            .map(|t| OperatorTerm {
                coeff: t.coeff.clone(),
                pole: t.pole.clone(),
                chains: t
                    .chains
                    .iter()
                    .map(|c| TraceChain::new(c.word.iter().map(|a| a.with_origin(0)).collect()))
                    .collect(),
                connected: t.connected,
                links: Vec::new(),
            })
            .collect();
        Expansion { terms, origins: 0 }.normalize()
    }

    /// Equality after canonicalization.
    pub fn equivalent(&self, other: &Expansion) -> bool {
        self.canonical().terms == other.canonical().terms
    }

    pub fn scale(&self, c: &Coeff) -> Expansion {
        let terms = self
            .terms
            .iter()
            .map(|t| OperatorTerm { coeff: &t.coeff * c, ..t.clone() })
            .collect();
        Expansion { terms, origins: self.origins }.normalize()
    }

    pub fn scale_rational(&self, r: Rational) -> Expansion {
        self.scale(&Coeff::from_rational(r))
    }

    /// Sum of two expansions. Origin bookkeeping is only kept when both
    /// sides track the same number of factors.
    pub fn add(&self, other: &Expansion) -> Expansion {
        if self.origins == other.origins {
            let mut terms = self.terms.clone();
            terms.extend(other.terms.iter().cloned());
            Expansion { terms, origins: self.origins }.normalize()
        } else {
            let mut terms = self.canonical().terms;
            terms.extend(other.canonical().terms);
            Expansion { terms, origins: 0 }.normalize()
        }
    }

    /// Terms whose pole monomial is finite.
    pub fn finite_part(&self) -> Expansion {
        self.filter(|t| t.pole.is_finite())
    }

    /// Terms carrying at least one pole.
    pub fn singular_part(&self) -> Expansion {
        self.filter(|t| !t.pole.is_finite())
    }

    pub fn filter(&self, keep: impl Fn(&OperatorTerm) -> bool) -> Expansion {
        Expansion {
            terms: self.terms.iter().filter(|t| keep(t)).cloned().collect(),
            origins: self.origins,
        }
    }

    /// Coefficient of a given operator content (compared after stripping
    /// origins) at a given pole.
    pub fn coefficient_of(&self, pole: &PoleMonomial, operator: &Expansion) -> Coeff {
        let target = operator.canonical();
        let Some(shape) = target.terms.first() else {
            return Coeff::zero();
        };
        let mut unit = shape.coeff.as_rational().unwrap_or_else(|| Rational::from_integer(1));
        if unit == Rational::from_integer(0) {
            unit = Rational::from_integer(1);
        }
        let mut total = Coeff::zero();
        for t in &self.canonical().terms {
            if &t.pole == pole && t.chains == shape.chains {
                total += &t.coeff.scale(unit.recip());
            }
        }
        total
    }
}

impl fmt::Display for Expansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.canonical().terms {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}
