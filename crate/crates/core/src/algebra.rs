//! The graded algebra k̃(n)* ⊗ P(y): square-free monomials in even generators,
//! powers of v, and a single precision horizon per element.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::{Dyadic, Val};
use crate::Error;

/// What `y_m * y_m` rewrites to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SquareRule {
    /// `y_m^2 = y_{2m}`, stored as the index of `y_{2m}` in the table.
    Exact(usize),
    /// The square is exactly zero.
    ZeroExact,
    /// The square lies in I_∞ with unknown value; the term is discarded and
    /// the precision drops accordingly.
    ZeroWithError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorTable {
    degrees: Vec<u32>,
    rules: Vec<SquareRule>,
}

/// Outcome of multiplying two monomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonoProduct {
    Mono(Monomial),
    ZeroExact,
    ZeroWithError,
}

impl GeneratorTable {
    /// Build a table from strictly increasing even degrees; `killed` decides
    /// whether a missing `y_{2m}` is exactly zero (otherwise it is out of range).
    pub fn new(degrees: Vec<u32>, killed: impl Fn(u32) -> bool) -> Result<GeneratorTable, Error> {
        if degrees.len() > 31 {
            return Err(Error::Invalid("at most 31 generators are supported".into()));
        }
        if degrees.windows(2).any(|w| w[0] >= w[1]) || degrees.iter().any(|d| *d == 0 || d % 2 == 1) {
            return Err(Error::Invalid("generator degrees must be even and strictly increasing".into()));
        }
        let rules = degrees
            .iter()
            .map(|&m| match degrees.iter().position(|&x| x == 2 * m) {
                Some(j) => SquareRule::Exact(j),
                None if killed(2 * m) => SquareRule::ZeroExact,
                None => SquareRule::ZeroWithError,
            })
            .collect();
        Ok(GeneratorTable { degrees, rules })
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn rule(&self, i: usize) -> SquareRule {
        self.rules[i]
    }

    pub fn index_of(&self, degree: u32) -> Option<usize> {
        self.degrees.iter().position(|&d| d == degree)
    }

    pub fn generator(&self, degree: u32) -> Option<Monomial> {
        self.index_of(degree).map(|i| Monomial(1 << i))
    }

    pub fn top(&self) -> Monomial {
        Monomial((1u32 << self.len()) - 1)
    }

    pub fn degree(&self, m: Monomial) -> u32 {
        (0..self.len()).filter(|&i| m.0 >> i & 1 == 1).map(|i| self.degrees[i]).sum()
    }

    /// Multiply a monomial by the generator with index `i`, carrying squares.
    pub fn times_generator(&self, m: Monomial, i: usize) -> MonoProduct {
        if m.0 >> i & 1 == 0 {
            return MonoProduct::Mono(Monomial(m.0 | 1 << i));
        }
        let rest = Monomial(m.0 & !(1 << i));
        match self.rules[i] {
            SquareRule::Exact(j) => self.times_generator(rest, j),
            SquareRule::ZeroExact => MonoProduct::ZeroExact,
            SquareRule::ZeroWithError => MonoProduct::ZeroWithError,
        }
    }

    pub fn mul(&self, a: Monomial, b: Monomial) -> MonoProduct {
        let mut acc = a;
        for i in 0..self.len() {
            if b.0 >> i & 1 == 1 {
                match self.times_generator(acc, i) {
                    MonoProduct::Mono(m) => acc = m,
                    other => return other,
                }
            }
        }
        MonoProduct::Mono(acc)
    }

    /// `y_{m_1}^{e_1} ⋯` for an arbitrary exponent vector.
    pub fn power_product(&self, exps: &[u32]) -> MonoProduct {
        let mut acc = Monomial::ONE;
        for (i, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                match self.times_generator(acc, i) {
                    MonoProduct::Mono(m) => acc = m,
                    other => return other,
                }
            }
        }
        MonoProduct::Mono(acc)
    }

    pub fn render(&self, m: Monomial) -> String {
        if m == Monomial::ONE {
            return "1".into();
        }
        (0..self.len())
            .filter(|&i| m.0 >> i & 1 == 1)
            .map(|i| format!("y{}", self.degrees[i]))
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn parse_monomial(&self, s: &str) -> Result<Monomial, Error> {
        let s = s.trim();
        if s == "1" {
            return Ok(Monomial::ONE);
        }
        let mut mask = 0u32;
        for part in s.split('*') {
            let deg: u32 = part
                .trim()
                .trim_start_matches('y')
                .trim_start_matches('_')
                .parse()
                .map_err(|_| Error::Parse(format!("bad monomial {s:?}")))?;
            let i = self.index_of(deg).ok_or_else(|| Error::Parse(format!("no generator y{deg}")))?;
            if mask >> i & 1 == 1 {
                return Err(Error::Parse(format!("repeated generator in {s:?}")));
            }
            mask |= 1 << i;
        }
        Ok(Monomial(mask))
    }
}

/// A square-free monomial in the generators, as a bit mask over table indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(pub u32);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn factors(self) -> u32 {
        self.0.count_ones()
    }
}

/// The theory k̃(n) with coefficient ring Z_(2)[v_n].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TheorySpec {
    n: u32,
}

impl TheorySpec {
    pub fn new(n: u32) -> Result<TheorySpec, Error> {
        if n == 0 || n > 8 {
            return Err(Error::Invalid(format!("Morava level n must lie in 1..=8, got {n}")));
        }
        Ok(TheorySpec { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// |v_n| = −2(2ⁿ − 1).
    pub fn v_degree(&self) -> i64 {
        -(self.shift() as i64)
    }

    /// 2(2ⁿ − 1), the degree drop caused by one factor of v.
    pub fn shift(&self) -> u32 {
        2 * ((1 << self.n) - 1)
    }
}

pub type TermKey = (u32, Monomial);

/// A finite sum of `coeff · v^a · y_J`, known modulo I_∞^prec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbientElement {
    theory: TheorySpec,
    terms: BTreeMap<TermKey, Dyadic>,
    prec: Val,
}

impl AmbientElement {
    pub fn new(theory: TheorySpec, terms: impl IntoIterator<Item = (TermKey, Dyadic)>, prec: Val) -> AmbientElement {
        let mut map: BTreeMap<TermKey, Dyadic> = BTreeMap::new();
        for (k, c) in terms {
            let e = map.entry(k).or_insert_with(Dyadic::zero);
            *e = &*e + &c;
        }
        let mut x = AmbientElement { theory, terms: map, prec };
        x.truncate();
        x
    }

    pub fn one(theory: TheorySpec) -> AmbientElement {
        AmbientElement::new(theory, [((0, Monomial::ONE), Dyadic::one())], Val::Inf)
    }

    pub fn zero(theory: TheorySpec, prec: Val) -> AmbientElement {
        AmbientElement { theory, terms: BTreeMap::new(), prec }
    }

    pub fn theory(&self) -> TheorySpec {
        self.theory
    }

    pub fn terms(&self) -> &BTreeMap<TermKey, Dyadic> {
        &self.terms
    }

    pub fn precision(&self) -> Val {
        self.prec
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, a: u32, m: Monomial) -> Dyadic {
        self.terms.get(&(a, m)).cloned().unwrap_or_else(Dyadic::zero)
    }

    /// Lower the precision claim (never raises it).
    pub fn with_precision_cap(mut self, cap: Val) -> AmbientElement {
        self.prec = self.prec.min(cap);
        self.truncate();
        self
    }

    pub fn scale(&self, c: &Dyadic) -> AmbientElement {
        let prec = self.prec + c.val2();
        AmbientElement::new(self.theory, self.terms.iter().map(|(k, x)| (*k, x * c)), prec)
    }

    pub fn add(&self, other: &AmbientElement) -> Result<AmbientElement, Error> {
        if self.theory != other.theory {
            return Err(Error::TheoryMismatch);
        }
        let terms = self.terms.iter().chain(other.terms.iter()).map(|(k, c)| (*k, c.clone()));
        Ok(AmbientElement::new(self.theory, terms, self.prec.min(other.prec)))
    }

    fn truncate(&mut self) {
        let p = self.prec;
        self.terms.retain(|(a, _), c| !c.is_zero() && c.val2().plus(*a) < p);
    }

    pub fn inf_valuation(&self) -> Val {
        self.terms.iter().map(|((a, _), c)| c.val2().plus(*a)).min().unwrap_or(Val::Inf)
    }

    pub fn term_degree(&self, table: &GeneratorTable, key: &TermKey) -> i64 {
        table.degree(key.1) as i64 - (self.theory.shift() as i64) * key.0 as i64
    }

    /// The common degree of all terms, if the element is homogeneous and nonempty.
    pub fn degree(&self, table: &GeneratorTable) -> Option<i64> {
        let mut it = self.terms.keys().map(|k| self.term_degree(table, k));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn degree_split(&self, table: &GeneratorTable) -> Vec<(i64, AmbientElement)> {
        let mut parts: BTreeMap<i64, Vec<(TermKey, Dyadic)>> = BTreeMap::new();
        for (k, c) in &self.terms {
            parts.entry(self.term_degree(table, k)).or_default().push((*k, c.clone()));
        }
        parts
            .into_iter()
            .map(|(d, ts)| (d, AmbientElement { theory: self.theory, terms: ts.into_iter().collect(), prec: self.prec }))
            .collect()
    }

    /// Rewrite raw terms with arbitrary exponent vectors into normal form.
    pub fn normal_form(
        theory: TheorySpec,
        table: &GeneratorTable,
        raw: &[(u32, Vec<u32>, Dyadic)],
        prec: Val,
    ) -> AmbientElement {
        let mut prec = prec;
        let mut kept = Vec::new();
        for (a, exps, c) in raw {
            match table.power_product(exps) {
                MonoProduct::Mono(m) => kept.push(((*a, m), c.clone())),
                MonoProduct::ZeroExact => {}
                MonoProduct::ZeroWithError => prec = prec.min(c.val2().plus(a + 1)),
            }
        }
        AmbientElement::new(theory, kept, prec)
    }

    pub fn multiply(&self, other: &AmbientElement, table: &GeneratorTable) -> Result<AmbientElement, Error> {
        if self.theory != other.theory {
            return Err(Error::TheoryMismatch);
        }
        let mut prec = (self.prec + other.inf_valuation())
            .min(other.prec + self.inf_valuation())
            .min(self.prec + other.prec);
        let mut out: Vec<(TermKey, Dyadic)> = Vec::with_capacity(self.terms.len() * other.terms.len());
        for ((a, m), c) in &self.terms {
            for ((b, n), d) in &other.terms {
                let cd = c * d;
                match table.mul(*m, *n) {
                    MonoProduct::Mono(mn) => out.push(((a + b, mn), cd)),
                    MonoProduct::ZeroExact => {}
                    MonoProduct::ZeroWithError => prec = prec.min(cd.val2().plus(a + b + 1)),
                }
            }
        }
        Ok(AmbientElement::new(self.theory, out, prec))
    }

    pub fn render(&self, table: &GeneratorTable) -> String {
        let body = if self.terms.is_empty() {
            "0".to_string()
        } else {
            self.terms
                .iter()
                .map(|((a, m), c)| {
                    let mut parts = Vec::new();
                    if *c != Dyadic::one() {
                        parts.push(c.to_string());
                    }
                    if *a > 0 {
                        parts.push(format!("v^{a}"));
                    }
                    if *m != Monomial::ONE || parts.is_empty() {
                        parts.push(table.render(*m));
                    }
                    parts.join("*")
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        format!("{body} (prec {})", self.prec)
    }

    pub fn to_json(&self, table: &GeneratorTable) -> ElementJson {
        ElementJson {
            n: self.theory.n(),
            precision: self.prec,
            terms: self
                .terms
                .iter()
                .map(|((a, m), c)| TermJson { v: *a, monomial: table.render(*m), coeff: c.clone() })
                .collect(),
        }
    }

    pub fn from_json(json: &ElementJson, table: &GeneratorTable) -> Result<AmbientElement, Error> {
        let theory = TheorySpec::new(json.n)?;
        let mut terms = Vec::new();
        for t in &json.terms {
            terms.push(((t.v, table.parse_monomial(&t.monomial)?), t.coeff.clone()));
        }
        Ok(AmbientElement::new(theory, terms, json.precision))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub v: u32,
    pub monomial: String,
    pub coeff: Dyadic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub n: u32,
    pub precision: Val,
    pub terms: Vec<TermJson>,
}

impl fmt::Display for TheorySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k(n={})", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin13() -> GeneratorTable {
        GeneratorTable::new(vec![6, 10, 12], |m| m.is_power_of_two() && m <= 12).unwrap()
    }

    fn k1() -> TheorySpec {
        TheorySpec::new(1).unwrap()
    }

    #[test]
    fn square_rules() {
        let t = spin13();
        assert_eq!(t.rule(0), SquareRule::Exact(2));
        assert_eq!(t.rule(1), SquareRule::ZeroWithError);
        assert_eq!(t.rule(2), SquareRule::ZeroWithError);
    }

    #[test]
    fn normal_form_cases() {
        let t = spin13();
        let y6sq = AmbientElement::normal_form(k1(), &t, &[(0, vec![2, 0, 0], Dyadic::one())], Val::Inf);
        assert_eq!(y6sq.render(&t), "y12 (prec inf)");
        let spin17 = GeneratorTable::new(vec![6, 10, 12, 14], |m| m.is_power_of_two() && m <= 16).unwrap();
        let x = AmbientElement::normal_form(k1(), &spin17, &[(0, vec![0, 0, 0, 2], Dyadic::from(2))], Val::Fin(5));
        assert!(x.is_empty());
        assert_eq!(x.precision(), Val::Fin(2));
        let e = AmbientElement::normal_form(k1(), &t, &[], Val::Fin(3));
        assert!(e.is_empty() && e.precision() == Val::Fin(3));
    }

    #[test]
    fn product_of_two_v_terms() {
        let t = spin13();
        let a = AmbientElement::new(k1(), [((1, Monomial(1)), Dyadic::one())], Val::Fin(2));
        let b = AmbientElement::new(k1(), [((1, Monomial(2)), Dyadic::one())], Val::Fin(2));
        let p = a.multiply(&b, &t).unwrap();
        assert_eq!(p.render(&t), "v^2*y6*y10 (prec 3)");
        let one = AmbientElement::one(k1());
        assert_eq!(a.multiply(&one, &t).unwrap(), a);
    }

    #[test]
    fn inf_valuation_and_split() {
        let t = spin13();
        let x = AmbientElement::new(k1(), [((1, Monomial(1)), Dyadic::from(4))], Val::Inf);
        assert_eq!(x.inf_valuation(), Val::Fin(3));
        let y = AmbientElement::new(
            k1(),
            [((0, Monomial(1)), Dyadic::from(2)), ((1, Monomial(4)), Dyadic::one())],
            Val::Fin(2),
        );
        assert_eq!(y.inf_valuation(), Val::Fin(1));
        let parts = y.degree_split(&t);
        assert_eq!(parts.iter().map(|p| p.0).collect::<Vec<_>>(), vec![6, 10]);
        assert!(AmbientElement::zero(k1(), Val::Inf).degree_split(&t).is_empty());
        let k2 = TheorySpec::new(2).unwrap();
        let z = AmbientElement::new(k2, [((1, Monomial(2)), Dyadic::one())], Val::Inf);
        assert_eq!(z.degree(&t), Some(4));
    }

    #[test]
    fn theory_mismatch_rejected() {
        let t = spin13();
        let a = AmbientElement::one(k1());
        let b = AmbientElement::one(TheorySpec::new(2).unwrap());
        assert!(a.multiply(&b, &t).is_err());
    }
}
