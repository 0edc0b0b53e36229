//! Contraction rules and the operator product itself.
//!
//! Every rule is written at the level of matrix indices and then applied to
//! trace words by rewiring: each letter `X^a_b` owns an upper and a lower
//! index, a chain `STr(X₁ X₂ … X_k)` links the lower index of `X_i` to the
//! upper index of `X_{i+1}`, and a Kronecker delta glues two index lines.
//! A closed line with no letter on it is `STr 𝟙 = 0`. Grading signs are
//! absorbed into the index-free rules and never materialized.
//!
//! With `(a, b)` the indices of the current and `(c, d)` those of the other
//! letter, the rules are
//!
//! ```text
//! J^a_b(z) M^c_d(w)    ~ -δ^c_b M^a_d    / (z-w)
//! J^a_b(z) M⁻¹^c_d(w)  ~ +δ^a_d M⁻¹^c_b  / (z-w)
//! J̄^a_b(z) M^c_d(w)    ~ +δ^a_d M^c_b    / (z̄-w̄)
//! J̄^a_b(z) M⁻¹^c_d(w)  ~ -δ^c_b M⁻¹^a_d  / (z̄-w̄)
//! J^a_b(z) J^c_d(w)    ~ -n δ^a_d δ^c_b / (z-w)² + (δ^a_d J^c_b - δ^c_b J^a_d) / (z-w)
//! ```
//!
//! and the same current-current rule with bars. Holomorphic and
//! antiholomorphic currents do not contract with each other.

use alloc::vec;
use alloc::vec::Vec;

use super::expansion::{Expansion, OperatorTerm, PoleMonomial};
use super::expr::{Atom, FieldKind, Point, TraceChain};
use super::OpeError;
use crate::coeff::{rat, Coeff};

/// Index slot names in a rule: `A, B` belong to the current, `C, D` to the
/// other letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    A,
    B,
    C,
    D,
}

struct RuleTerm {
    sign: i128,
    /// Whether the coefficient carries a factor of the level `n`.
    level: bool,
    holo: u32,
    anti: u32,
    atoms: Vec<(FieldKind, Slot, Slot)>,
    deltas: Vec<(Slot, Slot)>,
}

fn rule(current: FieldKind, other: FieldKind) -> Option<Vec<RuleTerm>> {
    use FieldKind::*;
    use Slot::*;
    let simple = |sign, holo, anti, atom: (FieldKind, Slot, Slot), delta: (Slot, Slot)| RuleTerm {
        sign,
        level: false,
        holo,
        anti,
        atoms: vec![atom],
        deltas: vec![delta],
    };
    let current_current = |kind: FieldKind, holo: u32, anti: u32| {
        vec![
            RuleTerm {
                sign: -1,
                level: true,
                holo: 2 * holo,
                anti: 2 * anti,
                atoms: vec![],
                deltas: vec![(A, D), (C, B)],
            },
            simple(1, holo, anti, (kind, C, B), (A, D)),
            simple(-1, holo, anti, (kind, A, D), (C, B)),
        ]
    };
    Some(match (current, other) {
        (J, M) => vec![simple(-1, 1, 0, (M, A, D), (C, B))],
        (J, Minv) => vec![simple(1, 1, 0, (Minv, C, B), (A, D))],
        (Jb, M) => vec![simple(1, 0, 1, (M, C, B), (A, D))],
        (Jb, Minv) => vec![simple(-1, 0, 1, (Minv, A, D), (C, B))],
        (J, J) => current_current(J, 1, 0),
        (Jb, Jb) => current_current(Jb, 0, 1),
        _ => return None,
    })
}

/// Working letter: the atom plus a stable id and the side it belongs to.
#[derive(Clone, Debug)]
struct Letter {
    atom: Atom,
    uid: u32,
    first: bool,
}

#[derive(Clone, Debug)]
struct Work {
    coeff: Coeff,
    pole: PoleMonomial,
    chains: Vec<Vec<Letter>>,
    links: Vec<u8>,
    pending: Vec<u32>,
    next_uid: u32,
}

impl Work {
    fn locate(&self, uid: u32) -> Option<(usize, usize)> {
        self.chains.iter().enumerate().find_map(|(ci, c)| {
            c.iter().position(|l| l.uid == uid).map(|i| (ci, i))
        })
    }
}

/// Rewire the chains holding letters `x` (the current) and `y` after
/// applying one rule term. Returns `None` if a closed index loop (`STr 𝟙`)
/// appears.
fn rewire(
    chains: &[Vec<Letter>],
    x: (usize, usize),
    y: (usize, usize),
    term: &RuleTerm,
    result_side: bool,
    result_point: Point,
    result_origin: u8,
    next_uid: &mut u32,
) -> Option<Vec<Vec<Letter>>> {
    let involved: Vec<usize> = if x.0 == y.0 { vec![x.0] } else { vec![x.0, y.0] };
    // (letter, upper index, lower index)
    let mut slots: Vec<(Letter, usize, usize)> = Vec::new();
    let mut n_ids = 0usize;
    let mut idx = [0usize; 4];
    for &ci in &involved {
        let c = &chains[ci];
        let k = c.len();
        for (i, l) in c.iter().enumerate() {
            let upper = n_ids + (i + k - 1) % k;
            let lower = n_ids + i;
            if (ci, i) == x {
                idx[0] = upper;
                idx[1] = lower;
            } else if (ci, i) == y {
                idx[2] = upper;
                idx[3] = lower;
            } else {
                slots.push((l.clone(), upper, lower));
            }
        }
        n_ids += k;
    }
    let id_of = |s: Slot| match s {
        Slot::A => idx[0],
        Slot::B => idx[1],
        Slot::C => idx[2],
        Slot::D => idx[3],
    };
    for &(kind, up, lo) in &term.atoms {
        let atom = Atom::Field { kind, point: result_point, origin: result_origin };
        slots.push((Letter { atom, uid: *next_uid, first: result_side }, id_of(up), id_of(lo)));
        *next_uid += 1;
    }
    let mut parent: Vec<usize> = (0..n_ids).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(s, t) in &term.deltas {
        let (rs, rt) = (find(&mut parent, id_of(s)), find(&mut parent, id_of(t)));
        if rs != rt {
            parent[rs] = rt;
        }
    }
    let mut upper_owner: Vec<Option<usize>> = vec![None; n_ids];
    let mut has_lower = vec![false; n_ids];
    for (li, (_, up, lo)) in slots.iter().enumerate() {
        let ru = find(&mut parent, *up);
        let rl = find(&mut parent, *lo);
        debug_assert!(upper_owner[ru].is_none(), "index with two upper slots");
        upper_owner[ru] = Some(li);
        has_lower[rl] = true;
    }
    for id in 0..n_ids {
        let r = find(&mut parent, id);
        if upper_owner[r].is_none() && !has_lower[r] {
            // a bare index loop: STr 𝟙
            return None;
        }
    }
    let mut out: Vec<Vec<Letter>> = chains
        .iter()
        .enumerate()
        .filter(|(ci, _)| !involved.contains(ci))
        .map(|(_, c)| c.clone())
        .collect();
    let mut visited = vec![false; slots.len()];
    for start in 0..slots.len() {
        if visited[start] {
            continue;
        }
        let mut chain = Vec::new();
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            chain.push(slots[cur].0.clone());
            let r = find(&mut parent, slots[cur].2);
            cur = upper_owner[r].expect("dangling index line");
        }
        out.push(chain);
    }
    Some(out)
}

fn local_point(t: &OperatorTerm) -> Result<Option<Point>, OpeError> {
    let mut point = None;
    for a in t.fields() {
        let p = a.point().expect("field atom");
        match point {
            None => point = Some(p),
            Some(q) if q != p => return Err(OpeError::NotLocal),
            _ => {}
        }
    }
    Ok(point)
}

/// Operator product of two single terms; `first` sits at the point whose
/// separation from the base point of `second` labels the new poles.
fn product_terms(
    first: &OperatorTerm,
    first_origins: u8,
    second: &OperatorTerm,
    second_origins: u8,
) -> Result<Vec<OperatorTerm>, OpeError> {
    let p = local_point(first)?.ok_or(OpeError::NoFields)?;
    let q = local_point(second)?.unwrap_or(Point::ORIGIN);
    if p == q {
        return Err(OpeError::CoincidentPoints);
    }
    let total = first_origins.max(1) + second_origins.max(1);
    let shift = second_origins.max(1);
    let mut links: Vec<u8> = if second.links.is_empty() {
        (0..shift).collect()
    } else {
        second.links.clone()
    };
    if first.links.is_empty() {
        links.extend((0..first_origins.max(1)).map(|o| o + shift));
    } else {
        links.extend(first.links.iter().map(|o| o + shift));
    }
    debug_assert_eq!(links.len(), total as usize);

    let mut uid = 0u32;
    let mut chains = Vec::new();
    for c in &second.chains {
        let letters = c
            .word
            .iter()
            .map(|a| {
                uid += 1;
                Letter { atom: a.clone(), uid, first: false }
            })
            .collect();
        chains.push(letters);
    }
    let mut pending = Vec::new();
    for c in &first.chains {
        let letters = c
            .word
            .iter()
            .map(|a| {
                uid += 1;
                let atom = match a.origin() {
                    Some(o) => a.with_origin(o + shift),
                    None => a.clone(),
                };
                if matches!(atom, Atom::Field { .. }) {
                    pending.push(uid);
                }
                Letter { atom, uid, first: true }
            })
            .collect();
        chains.push(letters);
    }
    // currents first: their products stay on the second side, where the
    // remaining first-side fields can still reach them
    let is_current = |uid: &u32| {
        chains.iter().flatten().any(|l: &Letter| l.uid == *uid && l.atom.kind().is_some_and(|k| k.is_current()))
    };
    let (mut currents, rest): (Vec<u32>, Vec<u32>) = pending.into_iter().partition(is_current);
    currents.extend(rest);
    let mut pending = currents;
    pending.reverse();

    let mut queue = vec![Work {
        coeff: &first.coeff * &second.coeff,
        pole: first.pole.times(&second.pole),
        chains,
        links,
        pending,
        next_uid: uid + 1,
    }];
    let mut done = Vec::new();
    while let Some(mut w) = queue.pop() {
        let Some(xuid) = w.pending.pop() else {
            done.push(w);
            continue;
        };
        let Some(xpos) = w.locate(xuid) else {
            queue.push(w);
            continue;
        };
        let x = w.chains[xpos.0][xpos.1].clone();
        let xkind = x.atom.kind().expect("pending letters are fields");
        for (ci, c) in w.chains.iter().enumerate() {
            for (i, y) in c.iter().enumerate() {
                if y.first {
                    continue;
                }
                let Some(ykind) = y.atom.kind() else { continue };
                // orientation: the current acts on the other letter
                let (cur_pos, other_pos, other, sign_flip) = if xkind.is_current() {
                    (xpos, (ci, i), y, false)
                } else if ykind.is_current() {
                    ((ci, i), xpos, &x, true)
                } else {
                    return Err(OpeError::UnknownVocabulary(xkind, ykind));
                };
                let (ck, ok) = if sign_flip { (ykind, xkind) } else { (xkind, ykind) };
                let Some(terms) = rule(ck, ok) else { continue };
                let xo = x.atom.origin().unwrap_or(0);
                let yo = y.atom.origin().unwrap_or(0);
                for rt in &terms {
                    let mut next_uid = w.next_uid;
                    let result_point = other.atom.point().unwrap_or(q);
                    let Some(new_chains) = rewire(
                        &w.chains,
                        cur_pos,
                        other_pos,
                        rt,
                        sign_flip,
                        result_point,
                        other.atom.origin().unwrap_or(0),
                        &mut next_uid,
                    ) else {
                        continue;
                    };
                    let mut sign = rt.sign;
                    if sign_flip && (rt.holo + rt.anti) % 2 == 1 {
                        sign = -sign;
                    }
                    let mut coeff = w.coeff.scale(rat(sign, 1));
                    if rt.level {
                        coeff = &coeff * &Coeff::level_pow(1);
                    }
                    let mut pole = w.pole.clone();
                    pole.multiply(p, rt.holo, rt.anti);
                    let mut links = w.links.clone();
                    OperatorTerm::union(&mut links, xo, yo);
                    let mut pending = w.pending.clone();
                    if sign_flip {
                        // the transformed letter still belongs to the first operand
                        for l in new_chains.iter().flatten() {
                            if l.uid >= w.next_uid {
                                pending.push(l.uid);
                            }
                        }
                    }
                    queue.push(Work {
                        coeff,
                        pole,
                        chains: new_chains,
                        links,
                        pending,
                        next_uid,
                    });
                }
            }
        }
        // the letter left uncontracted
        queue.push(w);
    }

    Ok(done
        .into_iter()
        .map(|w| {
            let chains = w
                .chains
                .into_iter()
                .map(|c| TraceChain::new(c.into_iter().map(|l| l.atom.with_point(q)).collect()))
                .collect();
            OperatorTerm::new(w.coeff, w.pole, chains).with_links(w.links)
        })
        .collect())
}

/// Full operator product `first(p) · second(q)` with `|p| > |q|`: every
/// contraction pattern between the two operands plus the normal-ordered
/// remainder, all placed at the base point of `second` to leading order.
pub fn ope(first: &Expansion, second: &Expansion) -> Result<Expansion, OpeError> {
    let fo = first.origins.max(1);
    let so = second.origins.max(1);
    let mut terms = Vec::new();
    for s in &first.terms {
        for t in &second.terms {
            terms.extend(product_terms(s, first.origins, t, second.origins)?);
        }
    }
    Ok(Expansion::with_origins(terms, fo + so).normalize())
}
