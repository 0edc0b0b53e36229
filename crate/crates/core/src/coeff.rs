//! Exact coefficients for the OPE engine.
//!
//! A [`Coeff`] is a finite sum of rational multiples of monomials
//! `n^a π^b ℓ^c γ^d δ^e λ^f`, where `n` is the WZW level, `ℓ = ln(a'/a)` is
//! the logarithm produced by an annulus integration and `γ, δ, λ` are the
//! couplings. Powers of `n` and `π` may be negative. Nothing in here touches
//! floating point except the explicit evaluation helpers.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_rational::Ratio;

/// Exact rational number used for every engine coefficient.
pub type Rational = Ratio<i128>;

/// Shorthand for an integer-valued rational.
pub fn rat(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

/// Exponents of a single coefficient monomial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Monomial {
    pub level: i32,
    pub pi: i32,
    pub log: u32,
    pub gamma: u32,
    pub delta: u32,
    pub lambda: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { level: 0, pi: 0, log: 0, gamma: 0, delta: 0, lambda: 0 };

    pub fn is_one(&self) -> bool {
        *self == Self::ONE
    }

    fn mul(self, other: Monomial) -> Monomial {
        Monomial {
            level: self.level + other.level,
            pi: self.pi + other.pi,
            log: self.log + other.log,
            gamma: self.gamma + other.gamma,
            delta: self.delta + other.delta,
            lambda: self.lambda + other.lambda,
        }
    }

    /// Exponents in display order, paired with their symbol names.
    pub fn factors(&self) -> [(&'static str, i64); 6] {
        [
            ("n", self.level as i64),
            ("pi", self.pi as i64),
            ("log", self.log as i64),
            ("gamma", self.gamma as i64),
            ("delta", self.delta as i64),
            ("lambda", self.lambda as i64),
        ]
    }

    /// Set the exponent of a named symbol. Returns `false` for an unknown
    /// name or a negative exponent on a coupling.
    pub fn set_factor(&mut self, name: &str, exp: i64) -> bool {
        let nonneg = u32::try_from(exp).ok();
        match name {
            "n" => self.level = exp as i32,
            "pi" => self.pi = exp as i32,
            "log" => match nonneg {
                Some(e) => self.log = e,
                None => return false,
            },
            "gamma" => match nonneg {
                Some(e) => self.gamma = e,
                None => return false,
            },
            "delta" => match nonneg {
                Some(e) => self.delta = e,
                None => return false,
            },
            "lambda" => match nonneg {
                Some(e) => self.lambda = e,
                None => return false,
            },
            _ => return false,
        }
        true
    }
}

/// Sum of rational multiples of [`Monomial`]s, kept free of zero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(into = "Vec<(Monomial, Rational)>", from = "Vec<(Monomial, Rational)>")
)]
pub struct Coeff {
    terms: BTreeMap<Monomial, Rational>,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::from_integer(1))
    }

    pub fn from_int(v: i128) -> Self {
        Self::from_rational(Rational::from_integer(v))
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::monomial(r, Monomial::ONE)
    }

    pub fn monomial(r: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if r != Rational::from_integer(0) {
            terms.insert(m, r);
        }
        Coeff { terms }
    }

    /// `n^k`.
    pub fn level_pow(k: i32) -> Self {
        Self::monomial(Rational::from_integer(1), Monomial { level: k, ..Monomial::ONE })
    }

    /// `π^k`.
    pub fn pi_pow(k: i32) -> Self {
        Self::monomial(Rational::from_integer(1), Monomial { pi: k, ..Monomial::ONE })
    }

    /// `ln(a'/a)`.
    pub fn log_ratio() -> Self {
        Self::monomial(Rational::from_integer(1), Monomial { log: 1, ..Monomial::ONE })
    }

    pub fn gamma() -> Self {
        Self::monomial(Rational::from_integer(1), Monomial { gamma: 1, ..Monomial::ONE })
    }

    pub fn delta() -> Self {
        Self::monomial(Rational::from_integer(1), Monomial { delta: 1, ..Monomial::ONE })
    }

    pub fn lambda() -> Self {
        Self::monomial(Rational::from_integer(1), Monomial { lambda: 1, ..Monomial::ONE })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a given monomial (zero when absent).
    pub fn get(&self, m: &Monomial) -> Rational {
        self.terms.get(m).copied().unwrap_or_else(|| Rational::from_integer(0))
    }

    /// The constant rational value, if this coefficient has no symbolic part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::from_integer(0)),
            1 => self.terms.get(&Monomial::ONE).copied(),
            _ => None,
        }
    }

    pub fn scale(&self, r: Rational) -> Self {
        let mut out = Coeff::zero();
        for (m, c) in &self.terms {
            out.add_monomial(*m, *c * r);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Coeff::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    fn add_monomial(&mut self, m: Monomial, r: Rational) {
        let zero = Rational::from_integer(0);
        if r == zero {
            return;
        }
        let entry = self.terms.entry(m).or_insert(zero);
        *entry += r;
        if *entry == zero {
            self.terms.remove(&m);
        }
    }

    /// Substitute an integer level, leaving the other symbols intact.
    pub fn at_level(&self, n: i128) -> Self {
        let mut out = Coeff::zero();
        for (m, c) in &self.terms {
            let k = m.level;
            let p = n.pow(k.unsigned_abs());
            let factor = if k >= 0 { Rational::from_integer(p) } else { Rational::new(1, p) };
            out.add_monomial(Monomial { level: 0, ..*m }, *c * factor);
        }
        out
    }

    /// Numerical value for given symbol values (`log` is `ln(a'/a)`).
    pub fn eval(&self, n: f64, log: f64, gamma: f64, delta: f64, lambda: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let r = *c.numer() as f64 / *c.denom() as f64;
                r * libm::pow(n, m.level as f64)
                    * libm::pow(core::f64::consts::PI, m.pi as f64)
                    * libm::pow(log, m.log as f64)
                    * libm::pow(gamma, m.gamma as f64)
                    * libm::pow(delta, m.delta as f64)
                    * libm::pow(lambda, m.lambda as f64)
            })
            .sum()
    }
}

impl Coeff {
    /// Exact value for an integer level and rational couplings; `None` when
    /// a factor of `π` or `ln(a'/a)` remains.
    pub fn eval_exact(&self, n: i128, gamma: Rational, delta: Rational, lambda: Rational) -> Option<Rational> {
        let mut total = Rational::from_integer(0);
        for (m, c) in &self.terms {
            if m.pi != 0 || m.log != 0 {
                return None;
            }
            let p = Rational::from_integer(n).pow(m.level);
            total += *c * p * gamma.pow(m.gamma as i32) * delta.pow(m.delta as i32) * lambda.pow(m.lambda as i32);
        }
        Some(total)
    }

    /// Keep only monomials with `ln(a'/a)` to the first power, with the log
    /// factor removed.
    pub fn log_part(&self) -> Coeff {
        let mut out = Coeff::zero();
        for (m, c) in &self.terms {
            if m.log == 1 {
                out.add_monomial(Monomial { log: 0, ..*m }, *c);
            }
        }
        out
    }
}

impl From<Coeff> for Vec<(Monomial, Rational)> {
    fn from(c: Coeff) -> Self {
        c.terms.into_iter().collect()
    }
}

impl From<Vec<(Monomial, Rational)>> for Coeff {
    fn from(terms: Vec<(Monomial, Rational)>) -> Self {
        let mut c = Coeff::zero();
        for (m, r) in terms {
            c.add_monomial(m, r);
        }
        c
    }
}

impl From<Rational> for Coeff {
    fn from(r: Rational) -> Self {
        Coeff::from_rational(r)
    }
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(mut self, rhs: Coeff) -> Coeff {
        self += &rhs;
        self
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        for (m, c) in &rhs.terms {
            self.add_monomial(*m, *c);
        }
    }
}

impl Sub for Coeff {
    type Output = Coeff;
    fn sub(self, rhs: Coeff) -> Coeff {
        self + (-rhs)
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        self.scale(Rational::from_integer(-1))
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        let mut out = Coeff::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_monomial(m1.mul(*m2), *c1 * *c2);
            }
        }
        out
    }
}

impl Mul for Coeff {
    type Output = Coeff;
    fn mul(self, rhs: Coeff) -> Coeff {
        &self * &rhs
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if *r.denom() == 1 {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Terms joined by ` + `, each `rational*sym^exp*...`; zero prints as `0`.
impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            fmt_rational(c, f)?;
            for (name, e) in m.factors() {
                match e {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

/// Render a list of coefficients for diagnostics.
pub fn render_all(cs: &[Coeff]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (i, c) in cs.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{c}");
    }
    s
}

/// Collect the monomials of a coefficient into a vector, in canonical order.
pub fn monomials(c: &Coeff) -> Vec<(Monomial, Rational)> {
    c.iter().map(|(m, r)| (*m, *r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn arithmetic_is_exact_and_drops_zeros() {
        let a = Coeff::level_pow(-2).scale(rat(1, 3));
        let b = Coeff::level_pow(-2).scale(rat(-1, 3));
        assert!((&a + &b).is_zero());
        let prod = &Coeff::level_pow(2) * &Coeff::level_pow(-2);
        assert_eq!(prod, Coeff::one());
    }

    #[test]
    fn display_is_canonical() {
        let c = (&Coeff::delta().pow(2) * &Coeff::level_pow(-2)).scale(rat(-1, 1))
            + Coeff::gamma();
        assert_eq!(c.to_string(), "-1*n^-2*delta^2 + 1*gamma");
        assert_eq!(Coeff::zero().to_string(), "0");
    }

    #[test]
    fn level_substitution() {
        let c = Coeff::level_pow(-2).scale(rat(1, 3));
        assert_eq!(c.at_level(4).as_rational(), Some(rat(1, 48)));
    }
}
