//! Atoms, parameter matrices and supertrace chains.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Symbolic insertion point of a field. `'0'` is the origin; other labels
/// (`z`, `w`, `u`, `v`) name points whose separation from the base point
/// appears in pole monomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point(pub char);

impl Point {
    pub const ORIGIN: Point = Point('0');
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Constant parameter supermatrix.
///
/// `Identity` has vanishing supertrace; `I` and `IInverse` are the reference
/// isomorphism between the chiral sectors and its inverse.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ParamMatrix {
    Identity,
    I,
    IInverse,
    Named(String),
}

impl ParamMatrix {
    pub fn named(name: &str) -> Self {
        ParamMatrix::Named(String::from(name))
    }

    fn cancels(&self, next: &ParamMatrix) -> bool {
        matches!(
            (self, next),
            (ParamMatrix::I, ParamMatrix::IInverse) | (ParamMatrix::IInverse, ParamMatrix::I)
        )
    }
}

impl fmt::Display for ParamMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamMatrix::Identity => f.write_str("1"),
            ParamMatrix::I => f.write_str("I"),
            ParamMatrix::IInverse => f.write_str("Ii"),
            ParamMatrix::Named(s) => f.write_str(s),
        }
    }
}

/// Local field species carried by a chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FieldKind {
    /// Holomorphic current `J = n ∂M M⁻¹`.
    J,
    /// Antiholomorphic current `J̄ = -n M⁻¹ ∂̄M`.
    Jb,
    /// Fundamental field.
    M,
    /// Its inverse.
    Minv,
}

impl FieldKind {
    pub fn is_current(self) -> bool {
        matches!(self, FieldKind::J | FieldKind::Jb)
    }

    /// Image under `∂ ↔ ∂̄, M ↔ M⁻¹`.
    pub fn parity(self) -> FieldKind {
        match self {
            FieldKind::J => FieldKind::Jb,
            FieldKind::Jb => FieldKind::J,
            FieldKind::M => FieldKind::Minv,
            FieldKind::Minv => FieldKind::M,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            FieldKind::J => "J",
            FieldKind::Jb => "Jb",
            FieldKind::M => "M",
            FieldKind::Minv => "Mi",
        }
    }
}

/// One letter of a trace word.
///
/// `origin` labels which factor of a product the field came from; it only
/// matters for the linked-cluster bookkeeping and is reset to zero by
/// [`Expansion::canonical`](super::Expansion::canonical).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Atom {
    Field { kind: FieldKind, point: Point, origin: u8 },
    Param(ParamMatrix),
}

impl Atom {
    pub fn field(kind: FieldKind, point: Point) -> Self {
        Atom::Field { kind, point, origin: 0 }
    }

    pub fn param(p: ParamMatrix) -> Self {
        Atom::Param(p)
    }

    pub fn kind(&self) -> Option<FieldKind> {
        match self {
            Atom::Field { kind, .. } => Some(*kind),
            Atom::Param(_) => None,
        }
    }

    pub fn point(&self) -> Option<Point> {
        match self {
            Atom::Field { point, .. } => Some(*point),
            Atom::Param(_) => None,
        }
    }

    pub(crate) fn origin(&self) -> Option<u8> {
        match self {
            Atom::Field { origin, .. } => Some(*origin),
            Atom::Param(_) => None,
        }
    }

    pub(crate) fn with_origin(&self, o: u8) -> Atom {
        match self {
            Atom::Field { kind, point, .. } => Atom::Field { kind: *kind, point: *point, origin: o },
            p => p.clone(),
        }
    }

    pub(crate) fn with_point(&self, p: Point) -> Atom {
        match self {
            Atom::Field { kind, origin, .. } => Atom::Field { kind: *kind, point: p, origin: *origin },
            a => a.clone(),
        }
    }

    pub(crate) fn parity(&self) -> Atom {
        match self {
            Atom::Field { kind, point, origin } => {
                Atom::Field { kind: kind.parity(), point: *point, origin: *origin }
            }
            p => p.clone(),
        }
    }

    fn cancels(&self, next: &Atom) -> bool {
        match (self, next) {
            (Atom::Param(a), Atom::Param(b)) => a.cancels(b),
            (
                Atom::Field { kind: k1, point: p1, .. },
                Atom::Field { kind: k2, point: p2, .. },
            ) => {
                p1 == p2
                    && matches!(
                        (k1, k2),
                        (FieldKind::M, FieldKind::Minv) | (FieldKind::Minv, FieldKind::M)
                    )
            }
            _ => false,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Field { kind, point, .. } => write!(f, "{}@{}", kind.symbol(), point),
            Atom::Param(p) => write!(f, "{p}"),
        }
    }
}

/// A single supertrace of a cyclic word of atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceChain {
    pub word: Vec<Atom>,
}

impl TraceChain {
    pub fn new(word: Vec<Atom>) -> Self {
        TraceChain { word }
    }

    /// Apply the matrix identities (`𝟙` drops out, `I I⁻¹ = 𝟙`,
    /// `M(p) M⁻¹(p) = 𝟙`) and rotate to the least cyclic representative.
    ///
    /// Returns `None` when the chain reduces to `STr 𝟙 = 0`.
    pub fn canonicalize(&self) -> Option<TraceChain> {
        let mut word: Vec<Atom> = self
            .word
            .iter()
            .filter(|a| !matches!(a, Atom::Param(ParamMatrix::Identity)))
            .cloned()
            .collect();
        loop {
            let k = word.len();
            if k < 2 {
                break;
            }
            let hit = (0..k).find(|&i| word[i].cancels(&word[(i + 1) % k]));
            match hit {
                Some(i) if i + 1 < k => {
                    word.drain(i..i + 2);
                }
                Some(_) => {
                    // the pair wraps around: last and first
                    word.pop();
                    word.remove(0);
                }
                None => break,
            }
        }
        if word.is_empty() {
            return None;
        }
        let best = (0..word.len())
            .min_by(|&a, &b| {
                let ra = word[a..].iter().chain(word[..a].iter());
                let rb = word[b..].iter().chain(word[..b].iter());
                ra.cmp(rb)
            })
            .unwrap_or(0);
        word.rotate_left(best);
        Some(TraceChain { word })
    }

    pub fn fields(&self) -> impl Iterator<Item = &Atom> {
        self.word.iter().filter(|a| matches!(a, Atom::Field { .. }))
    }
}

impl fmt::Display for TraceChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("STr(")?;
        for (i, a) in self.word.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn j(p: char) -> Atom {
        Atom::field(FieldKind::J, Point(p))
    }

    #[test]
    fn identity_chain_vanishes() {
        let c = TraceChain::new(vec![Atom::param(ParamMatrix::Identity)]);
        assert!(c.canonicalize().is_none());
        let c = TraceChain::new(vec![Atom::param(ParamMatrix::I), Atom::param(ParamMatrix::IInverse)]);
        assert!(c.canonicalize().is_none());
    }

    #[test]
    fn isomorphism_cancels_cyclically() {
        let jb = Atom::field(FieldKind::Jb, Point::ORIGIN);
        let c = TraceChain::new(vec![
            Atom::param(ParamMatrix::IInverse),
            j('0'),
            jb.clone(),
            Atom::param(ParamMatrix::I),
        ]);
        let canon = c.canonicalize().unwrap();
        assert_eq!(canon.word, vec![j('0'), jb]);
    }

    #[test]
    fn rotations_share_a_canonical_form() {
        let a = Atom::param(ParamMatrix::named("A"));
        let b = Atom::param(ParamMatrix::named("B"));
        let c1 = TraceChain::new(vec![a.clone(), j('0'), b.clone()]).canonicalize();
        let c2 = TraceChain::new(vec![j('0'), b.clone(), a.clone()]).canonicalize();
        let c3 = TraceChain::new(vec![b, a, j('0')]).canonicalize();
        assert_eq!(c1, c2);
        assert_eq!(c2, c3);
    }

    #[test]
    fn fundamental_and_inverse_cancel_only_at_same_point() {
        let m0 = Atom::field(FieldKind::M, Point::ORIGIN);
        let mi0 = Atom::field(FieldKind::Minv, Point::ORIGIN);
        let miz = Atom::field(FieldKind::Minv, Point('z'));
        let jb = Atom::field(FieldKind::Jb, Point::ORIGIN);
        let c = TraceChain::new(vec![m0.clone(), mi0, jb.clone()]).canonicalize().unwrap();
        assert_eq!(c.word, vec![jb.clone()]);
        let c = TraceChain::new(vec![m0, miz, jb]).canonicalize().unwrap();
        assert_eq!(c.word.len(), 3);
    }
}
