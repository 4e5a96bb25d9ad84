//! Printing with sugar recognition and minimal parentheses. The output of
//! `Display` parses back to the same tree.

use core::fmt::{self, Write};

use super::{Coalition, Formula, Prop};

const IFF: u8 = 1;
const IMP: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

#[derive(Clone, Copy)]
enum Quant<'a> {
    Coop(&'a Coalition),
    Dual(&'a Coalition),
    Exists,
    Forall,
}

#[derive(Clone, Copy)]
enum Op {
    X,
    F,
    G,
}

enum View<'a> {
    True,
    False,
    Atom(&'a Prop),
    Not(&'a Formula),
    And(&'a Formula, &'a Formula),
    Or(&'a Formula, &'a Formula),
    Imp(&'a Formula, &'a Formula),
    Iff(&'a Formula, &'a Formula),
    Knows(&'a Coalition, &'a Formula),
    Possible(&'a Coalition, &'a Formula),
    Unary(Quant<'a>, Op, &'a Formula),
    Binary(Quant<'a>, &'a Formula, bool, &'a Formula),
}

impl View<'_> {
    fn level(&self) -> u8 {
        match self {
            View::Iff(..) => IFF,
            View::Imp(..) => IMP,
            View::Or(..) => OR,
            View::And(..) => AND,
            _ => UNARY,
        }
    }
}

/// Matches the expansion `¬ψ U (¬ψ ∧ ¬φ)` and returns `(φ, ψ)`.
fn weak_until_args<'a>(l: &'a Formula, r: &'a Formula) -> Option<(&'a Formula, &'a Formula)> {
    let psi = l.as_not()?;
    let (l2, m) = r.as_and()?;
    if l2 != l {
        return None;
    }
    Some((m.as_not()?, psi))
}

/// Views for `¬(inner)` where `inner` is a core modality.
fn negated_modality(inner: &Formula) -> Option<View<'_>> {
    let (quant, l, r) = match inner {
        Formula::DKnows(g, x) => return x.as_not().map(|y| View::Possible(g, y)),
        Formula::CoopNext(g, x) => return x.as_not().map(|y| View::Unary(Quant::Dual(g), Op::X, y)),
        Formula::ExistsNext(x) => return x.as_not().map(|y| View::Unary(Quant::Forall, Op::X, y)),
        // ¬[[Γ]](..) is <<Γ>> G / W, and so on for the other three.
        Formula::DualCoopUntil(g, l, r) => (Quant::Coop(g), l, r),
        Formula::CoopUntil(g, l, r) => (Quant::Dual(g), l, r),
        Formula::ForallUntil(l, r) => (Quant::Exists, l, r),
        Formula::ExistsUntil(l, r) => (Quant::Forall, l, r),
        _ => return None,
    };
    if l.is_true() {
        if let Some(x) = r.as_not() {
            return Some(View::Unary(quant, Op::G, x));
        }
    }
    weak_until_args(l, r).map(|(a, b)| View::Binary(quant, a, true, b))
}

fn view(f: &Formula) -> View<'_> {
    match f {
        Formula::False => View::False,
        Formula::Atom(p) => View::Atom(p),
        Formula::Implies(a, b) => {
            if f.is_true() {
                return View::True;
            }
            if let Some((x, y)) = f.as_iff() {
                return View::Iff(x, y);
            }
            if **b == Formula::False {
                if let Some(v) = negated_modality(a) {
                    return v;
                }
                if let Some((x, y)) = f.as_and() {
                    return View::And(x, y);
                }
                return View::Not(a);
            }
            if let Some(x) = a.as_not() {
                return View::Or(x, b);
            }
            View::Imp(a, b)
        }
        Formula::DKnows(g, a) => View::Knows(g, a),
        Formula::CoopNext(g, a) => View::Unary(Quant::Coop(g), Op::X, a),
        Formula::ExistsNext(a) => View::Unary(Quant::Exists, Op::X, a),
        Formula::CoopUntil(g, l, r) => until_view(Quant::Coop(g), l, r),
        Formula::DualCoopUntil(g, l, r) => until_view(Quant::Dual(g), l, r),
        Formula::ExistsUntil(l, r) => until_view(Quant::Exists, l, r),
        Formula::ForallUntil(l, r) => until_view(Quant::Forall, l, r),
    }
}

fn until_view<'a>(q: Quant<'a>, l: &'a Formula, r: &'a Formula) -> View<'a> {
    if l.is_true() {
        View::Unary(q, Op::F, r)
    } else {
        View::Binary(q, l, false, r)
    }
}

fn write_quant(out: &mut fmt::Formatter<'_>, q: Quant<'_>) -> fmt::Result {
    match q {
        Quant::Coop(g) => write!(out, "<<{g}>>"),
        Quant::Dual(g) => write!(out, "[[{g}]]"),
        Quant::Exists => out.write_char('E'),
        Quant::Forall => out.write_char('A'),
    }
}

fn write_at(f: &Formula, out: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
    let v = view(f);
    let paren = v.level() < min;
    if paren {
        out.write_char('(')?;
    }
    match v {
        View::True => out.write_str("true")?,
        View::False => out.write_str("false")?,
        View::Atom(p) => out.write_str(p.as_str())?,
        View::Not(a) => {
            out.write_char('!')?;
            write_at(a, out, UNARY)?;
        }
        View::And(a, b) => {
            write_at(a, out, AND)?;
            out.write_str(" & ")?;
            write_at(b, out, UNARY)?;
        }
        View::Or(a, b) => {
            write_at(a, out, OR)?;
            out.write_str(" | ")?;
            write_at(b, out, AND)?;
        }
        View::Imp(a, b) => {
            write_at(a, out, OR)?;
            out.write_str(" -> ")?;
            write_at(b, out, IMP)?;
        }
        View::Iff(a, b) => {
            write_at(a, out, IFF)?;
            out.write_str(" <-> ")?;
            write_at(b, out, IMP)?;
        }
        View::Knows(g, a) => {
            write!(out, "K{{{g}}} ")?;
            write_at(a, out, UNARY)?;
        }
        View::Possible(g, a) => {
            write!(out, "P{{{g}}} ")?;
            write_at(a, out, UNARY)?;
        }
        View::Unary(q, op, a) => {
            write_quant(out, q)?;
            out.write_str(match op {
                Op::X => " X ",
                Op::F => " F ",
                Op::G => " G ",
            })?;
            write_at(a, out, UNARY)?;
        }
        View::Binary(q, a, weak, b) => {
            write_quant(out, q)?;
            out.write_str(" (")?;
            write_at(a, out, IFF)?;
            out.write_str(if weak { " W " } else { " U " })?;
            write_at(b, out, IFF)?;
            out.write_char(')')?;
        }
    }
    if paren {
        out.write_char(')')?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, f, IFF)
    }
}
