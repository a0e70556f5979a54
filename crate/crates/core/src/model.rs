//! Combinatorial models of Spin(2ℓ+1) and SO(2ℓ+1) and the images of their
//! Chern-type classes in k̃(n)* ⊗ P(y).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{AmbientElement, GeneratorTable, Monomial, TheorySpec};
use crate::scalar::{Dyadic, Val};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Spin,
    So,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family, Error> {
        match s.to_ascii_lowercase().as_str() {
            "spin" => Ok(Family::Spin),
            "so" => Ok(Family::So),
            _ => Err(Error::Parse(format!("unknown family {s:?} (expected spin or so)"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Spin => "Spin",
            Family::So => "SO",
        })
    }
}

pub const MAX_SPIN_ELL: u32 = 12;
pub const MAX_SO_ELL: u32 = 10;

/// Torsion indices of Spin(2ℓ+1) for ℓ = 3..=9.
const SPIN_TORSION: [(u32, u32); 7] = [(3, 2), (4, 2), (5, 2), (6, 4), (7, 8), (8, 16), (9, 16)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupModel {
    family: Family,
    ell: u32,
    ell_bar: u32,
    t: u32,
    gens: GeneratorTable,
    chern_indices: Vec<u32>,
    euler_degree: Option<u32>,
    torsion_index: Option<u32>,
}

fn is_pow2(m: u32) -> bool {
    m > 0 && m & (m - 1) == 0
}

impl GroupModel {
    /// The model of `family(m)` with `m = 2ℓ + 1`.
    pub fn build(family: Family, m: u32) -> Result<GroupModel, Error> {
        if m % 2 == 0 {
            return Err(Error::Invalid(format!("m must be odd, got {m}")));
        }
        let ell = m / 2;
        match family {
            Family::Spin => {
                if !(3..=MAX_SPIN_ELL).contains(&ell) {
                    return Err(Error::Invalid(format!("Spin({m}) needs 3 ≤ ℓ ≤ {MAX_SPIN_ELL}")));
                }
                let ell_bar = if is_pow2(ell) { ell - 1 } else { ell };
                let t = 31 - ell.leading_zeros();
                let degrees: Vec<u32> = (1..=ell_bar).map(|i| 2 * i).filter(|d| !is_pow2(*d)).collect();
                let gens = GeneratorTable::new(degrees, |d| is_pow2(d) && d <= 2 * ell)?;
                Ok(GroupModel {
                    family,
                    ell,
                    ell_bar,
                    t,
                    gens,
                    chern_indices: (2..=ell).collect(),
                    euler_degree: Some(1 << (t + 2)),
                    torsion_index: SPIN_TORSION.iter().find(|(l, _)| *l == ell).map(|(_, ti)| *ti),
                })
            }
            Family::So => {
                if !(1..=MAX_SO_ELL).contains(&ell) {
                    return Err(Error::Invalid(format!("SO({m}) needs 1 ≤ ℓ ≤ {MAX_SO_ELL}")));
                }
                let gens = GeneratorTable::new((1..=ell).map(|i| 2 * i).collect(), |_| false)?;
                Ok(GroupModel {
                    family,
                    ell,
                    ell_bar: ell,
                    t: 31 - ell.leading_zeros(),
                    gens,
                    chern_indices: (1..=ell).collect(),
                    euler_degree: None,
                    torsion_index: Some(1 << ell),
                })
            }
        }
    }

    pub fn spin(m: u32) -> Result<GroupModel, Error> {
        GroupModel::build(Family::Spin, m)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn m(&self) -> u32 {
        2 * self.ell + 1
    }

    pub fn ell_bar(&self) -> u32 {
        self.ell_bar
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn gens(&self) -> &GeneratorTable {
        &self.gens
    }

    pub fn chern_indices(&self) -> &[u32] {
        &self.chern_indices
    }

    pub fn euler_degree(&self) -> Option<u32> {
        self.euler_degree
    }

    pub fn torsion_index(&self) -> Option<u32> {
        self.torsion_index
    }

    pub fn y_top(&self) -> Monomial {
        self.gens.top()
    }

    pub fn top_degree(&self) -> u32 {
        self.gens.degree(self.y_top())
    }

    pub fn name(&self) -> String {
        format!("{}({})", self.family, self.m())
    }

    /// The symbols c_i (and e for spin), in the canonical order used for
    /// enumeration and for breaking ties between representatives.
    pub fn symbols(&self) -> Vec<ChernSymbol> {
        let mut out: Vec<ChernSymbol> = self.chern_indices.iter().map(|&i| ChernSymbol::c(i)).collect();
        if self.family == Family::Spin {
            out.push(ChernSymbol::e(1 << (self.t + 1)));
        }
        out
    }

    pub fn check_symbol(&self, s: ChernSymbol) -> Result<(), Error> {
        let ok = match s.kind {
            SymbolKind::C => self.chern_indices.contains(&s.index),
            SymbolKind::E => self.family == Family::Spin && s.index == 1 << (self.t + 1),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("{s} is not a class of {}", self.name())))
        }
    }

    fn live(&self, degree: u32) -> Option<Monomial> {
        self.gens.generator(degree)
    }

    /// `c_i ↦ 2·y_{2i} + v·y_{2i+2^{n+1}−2}`, dead indices dropped, precision 2.
    pub fn chern_image(&self, i: u32, theory: TheorySpec) -> Result<AmbientElement, Error> {
        self.check_symbol(ChernSymbol::c(i))?;
        let mut terms = Vec::new();
        if let Some(y) = self.live(2 * i) {
            terms.push(((0, y), Dyadic::from(2)));
        }
        if let Some(y) = self.live(2 * i + (1 << (theory.n() + 1)) - 2) {
            terms.push(((1, y), Dyadic::one()));
        }
        Ok(AmbientElement::new(theory, terms, Val::Fin(2)))
    }

    /// `e ↦ 2·Σ y_{2i}y_{2j} + v·Σ y_{2i}y_{2j}` over distinct live pairs with
    /// `2i + 2j` equal to the Euler degree, respectively that degree plus `2^{n+1} − 2`.
    pub fn euler_image(&self, theory: TheorySpec) -> Result<AmbientElement, Error> {
        let deg = self
            .euler_degree
            .ok_or_else(|| Error::Invalid(format!("{} has no Euler-type class", self.name())))?;
        let mut terms = Vec::new();
        for (a, coeff, total) in [(0, 2, deg), (1, 1, deg + (1 << (theory.n() + 1)) - 2)] {
            for &d in self.gens.degrees() {
                if 2 * d < total {
                    if let (Some(p), Some(q)) = (self.live(d), self.live(total - d)) {
                        terms.push(((a, Monomial(p.0 | q.0)), Dyadic::from(coeff)));
                    }
                }
            }
        }
        Ok(AmbientElement::new(theory, terms, Val::Fin(2)))
    }

    pub fn symbol_image(&self, s: ChernSymbol, theory: TheorySpec) -> Result<AmbientElement, Error> {
        match s.kind {
            SymbolKind::C => self.chern_image(s.index, theory),
            SymbolKind::E => {
                self.check_symbol(s)?;
                self.euler_image(theory)
            }
        }
    }

    /// Ordered product of the factor images.
    pub fn monomial_image(&self, mono: &ChernMonomial, theory: TheorySpec) -> Result<AmbientElement, Error> {
        let mut acc = AmbientElement::one(theory);
        for s in mono.symbols() {
            acc = acc.multiply(&self.symbol_image(*s, theory)?, &self.gens)?;
        }
        Ok(acc)
    }

    pub fn info(&self) -> ModelInfo {
        ModelInfo {
            family: self.family,
            m: self.m(),
            ell: self.ell,
            ell_bar: (self.family == Family::Spin).then_some(self.ell_bar),
            t: (self.family == Family::Spin).then_some(self.t),
            generators: self.gens.degrees().iter().map(|d| format!("y{d}")).collect(),
            relations: (0..self.gens.len())
                .map(|i| {
                    let lhs = format!("y{}^2", self.gens.degrees()[i]);
                    let rhs = match self.gens.rule(i) {
                        crate::algebra::SquareRule::Exact(j) => format!("y{}", self.gens.degrees()[j]),
                        crate::algebra::SquareRule::ZeroExact => "0".into(),
                        crate::algebra::SquareRule::ZeroWithError => "0 mod I".into(),
                    };
                    format!("{lhs} = {rhs}")
                })
                .collect(),
            chern_classes: self.symbols().iter().map(|s| s.to_string()).collect(),
            euler_degree: self.euler_degree,
            torsion_index: self.torsion_index,
            y_top: self.gens.render(self.y_top()),
            top_degree: self.top_degree(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub family: Family,
    pub m: u32,
    pub ell: u32,
    pub ell_bar: Option<u32>,
    pub t: Option<u32>,
    pub generators: Vec<String>,
    pub relations: Vec<String>,
    pub chern_classes: Vec<String>,
    pub euler_degree: Option<u32>,
    pub torsion_index: Option<u32>,
    pub y_top: String,
    pub top_degree: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymbolKind {
    C,
    E,
}

/// `c_i` or the Euler-type class `e_{2^{t+1}}`; the index is the Chow codimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChernSymbol {
    pub kind: SymbolKind,
    pub index: u32,
}

impl ChernSymbol {
    pub fn c(i: u32) -> ChernSymbol {
        ChernSymbol { kind: SymbolKind::C, index: i }
    }

    pub fn e(i: u32) -> ChernSymbol {
        ChernSymbol { kind: SymbolKind::E, index: i }
    }

    /// Topological degree.
    pub fn degree(&self) -> u32 {
        2 * self.index
    }
}

impl fmt::Display for ChernSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymbolKind::C => write!(f, "c_{}", self.index),
            SymbolKind::E => write!(f, "e_{}", self.index),
        }
    }
}

/// A commutative monomial (multiset) in Chern symbols, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ChernMonomial(Vec<ChernSymbol>);

impl ChernMonomial {
    pub fn new(mut symbols: Vec<ChernSymbol>) -> ChernMonomial {
        symbols.sort();
        ChernMonomial(symbols)
    }

    pub fn one() -> ChernMonomial {
        ChernMonomial(Vec::new())
    }

    pub fn symbols(&self) -> &[ChernSymbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|s| s.degree()).sum()
    }

    pub fn times(&self, other: &ChernMonomial) -> ChernMonomial {
        ChernMonomial::new(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn is_square_free(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    /// Fewest factors first, then lexicographic in the symbol order.
    pub fn enumeration_key(&self) -> (usize, &[ChernSymbol]) {
        (self.0.len(), &self.0)
    }
}

impl fmt::Display for ChernMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for ChernMonomial {
    type Err = Error;

    /// Accepts `1`, `c_2c_4`, `c2*c4`, `c2 c3 e16`, `e_8c_6`.
    fn from_str(s: &str) -> Result<ChernMonomial, Error> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Ok(ChernMonomial::one());
        }
        let bad = || Error::Parse(format!("bad Chern monomial {s:?}"));
        let chars: Vec<char> = s.chars().filter(|c| !matches!(c, '*' | ' ' | '_' | '·')).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let kind = match chars[i] {
                'c' => SymbolKind::C,
                'e' => SymbolKind::E,
                _ => return Err(bad()),
            };
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(bad());
            }
            let index: u32 = chars[start..i].iter().collect::<String>().parse().map_err(|_| bad())?;
            out.push(ChernSymbol { kind, index });
        }
        Ok(ChernMonomial::new(out))
    }
}

impl Serialize for ChernMonomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ChernMonomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: u32) -> TheorySpec {
        TheorySpec::new(n).unwrap()
    }

    fn img(m: u32, mono: &str, n: u32) -> String {
        let g = GroupModel::spin(m).unwrap();
        let x = g.monomial_image(&mono.parse().unwrap(), k(n)).unwrap();
        x.render(g.gens())
    }

    #[test]
    fn generator_sets() {
        let g13 = GroupModel::spin(13).unwrap();
        assert_eq!(g13.gens().degrees(), &[6, 10, 12]);
        assert_eq!((g13.t(), g13.torsion_index()), (2, Some(4)));
        let g17 = GroupModel::spin(17).unwrap();
        assert_eq!(g17.gens().degrees(), &[6, 10, 12, 14]);
        assert_eq!((g17.t(), g17.ell_bar(), g17.torsion_index()), (3, 7, Some(16)));
        let so11 = GroupModel::build(Family::So, 11).unwrap();
        assert_eq!(so11.gens().degrees(), &[2, 4, 6, 8, 10]);
        assert!(GroupModel::spin(12).is_err());
        assert!(GroupModel::spin(5).is_err());
    }

    #[test]
    fn chern_and_euler_images() {
        assert_eq!(img(13, "c2", 1), "v^1*y6 (prec 2)");
        assert_eq!(img(13, "c5", 1), "2*y10 + v^1*y12 (prec 2)");
        assert_eq!(img(17, "c2", 2), "v^1*y10 (prec 2)");
        assert_eq!(img(11, "e8", 1), "2*y6*y10 (prec 2)");
        assert_eq!(img(13, "e8", 1), "2*y6*y10 + v^1*y6*y12 (prec 2)");
        assert_eq!(img(19, "e16", 1), "2*y14*y18 (prec 2)");
    }

    #[test]
    fn products() {
        assert_eq!(img(13, "e8c6", 1), "4*y6*y10*y12 (prec 3)");
        assert_eq!(img(17, "c2c3c6c7", 2), "8*v^1*y6*y10*y12*y14 (prec 5)");
        assert_eq!(img(13, "1", 1), "1 (prec inf)");
    }

    #[test]
    fn monomial_parsing() {
        let m: ChernMonomial = "c_3c_2 * e_8".parse().unwrap();
        assert_eq!(m.to_string(), "c_2c_3e_8");
        assert_eq!(m.degree(), 26);
        assert!("x3".parse::<ChernMonomial>().is_err());
    }
}
