//! Per-degree Z_(2)-lattices spanned by images of Chern monomials.
//!
//! `L_d` is the span of `v^k · image(M)` over Chern monomials `M` of degree
//! `d + k·w`, where `w = 2(2ⁿ − 1)`. The graded piece is `gr^d = L_d / v·L_{d+w}`
//! and a class vanishes in `gr^d / 2` exactly when its image lies in
//! `I·L_d = 2·L_d + v·L_{d+w}`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{AmbientElement, Monomial, TermKey, TheorySpec};
use crate::linalg::{smith, Echelon, Vector};
use crate::model::{ChernMonomial, ChernSymbol, Family, GroupModel, SymbolKind};
use crate::scalar::{Dyadic, Val};
use crate::Error;

/// Node limit for the representative search in one degree.
const SEARCH_BUDGET: usize = 200_000;

struct Target {
    free: usize,
    torsion_sum: u32,
    wanted: usize,
}

#[allow(clippy::too_many_arguments)]
fn search(
    pool: &[(usize, Vector, Order)],
    start: usize,
    kernel: &Echelon,
    chosen: &mut Vec<usize>,
    nfree: usize,
    tsum: u32,
    target: &Target,
    budget: &mut usize,
) -> bool {
    if chosen.len() == target.wanted {
        return nfree == target.free && tsum == target.torsion_sum;
    }
    let needed = target.wanted - chosen.len();
    for j in start..pool.len() {
        if pool.len() - j < needed || *budget == 0 {
            return false;
        }
        *budget -= 1;
        let (nf, ts) = match pool[j].2 {
            Order::Free => (nfree + 1, tsum),
            Order::Torsion(k) => (nfree, tsum + k),
        };
        if nf > target.free || ts > target.torsion_sum || kernel.contains(&pool[j].1) {
            continue;
        }
        let mut next = kernel.clone();
        next.insert(pool[j].1.clone());
        chosen.push(j);
        if search(pool, j + 1, &next, chosen, nf, ts, target, budget) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Largest precision tried by saturation searches.
pub const SATURATION_CAP: u32 = 8;

/// Default bound on the number of factors in enumerated Chern monomials.
pub fn default_max_factors(model: &GroupModel) -> usize {
    ((model.top_degree() / 4 + 1) as usize).min(10)
}

/// All Chern monomials of degree at most `max_degree` with at most `max_factors`
/// factors, ordered by number of factors and then lexicographically.
pub fn enumerate_monomials(symbols: &[ChernSymbol], max_degree: u32, max_factors: usize) -> Vec<ChernMonomial> {
    fn rec(
        symbols: &[ChernSymbol],
        start: usize,
        cur: &mut Vec<ChernSymbol>,
        deg: u32,
        max_degree: u32,
        max_factors: usize,
        out: &mut Vec<ChernMonomial>,
    ) {
        out.push(ChernMonomial::new(cur.clone()));
        if cur.len() >= max_factors {
            return;
        }
        for k in start..symbols.len() {
            let d = symbols[k].degree();
            if deg + d <= max_degree {
                cur.push(symbols[k]);
                rec(symbols, k, cur, deg + d, max_degree, max_factors, out);
                cur.pop();
            }
        }
    }
    let mut sorted = symbols.to_vec();
    sorted.sort();
    let mut out = Vec::new();
    rec(&sorted, 0, &mut Vec::new(), 0, max_degree, max_factors, &mut out);
    out.sort_by(|a, b| a.enumeration_key().cmp(&b.enumeration_key()));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Free,
    /// Cyclic of order 2^k.
    Torsion(u32),
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Free => f.write_str("free"),
            Order::Torsion(k) => write!(f, "Z/{}", 1u64 << k),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "free" {
            return Ok(Order::Free);
        }
        s.strip_prefix("Z/")
            .and_then(|n| n.parse::<u64>().ok())
            .filter(|n| n.is_power_of_two() && *n > 1)
            .map(|n| Order::Torsion(n.trailing_zeros()))
            .ok_or_else(|| serde::de::Error::custom(format!("bad order {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub order: Order,
    pub representative: ChernMonomial,
}

/// Invariant-factor decomposition of one graded piece.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrComponent {
    pub degree: u32,
    /// Invariant factors from the Smith form, free summands first.
    pub invariants: Vec<Order>,
    pub factors: Vec<Factor>,
    /// The representatives realize the decomposition as a direct sum.
    pub decomposition_verified: bool,
    pub certified: bool,
}

impl GrComponent {
    pub fn free_rank(&self) -> usize {
        self.invariants.iter().filter(|o| **o == Order::Free).count()
    }
}

/// Why a class verdict is robust against the unknown higher-order parts of images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Everything of I_∞-valuation ≥ precision already lies in I·L_d.
    OwnTail { precision: Val },
    /// `x·partner` is a nonzero multiple of y_top below the torsion-index bound,
    /// so `x` cannot lie in I·L_d.
    TopPairing { partner: ChernMonomial, exponent: u32, precision: Val, torsion_index: u32 },
    /// The same class is certified nonzero in a smaller group of the family.
    Restriction { m: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub class: ChernMonomial,
    pub degree: u32,
    pub image: String,
    pub precision: Val,
    pub zero: bool,
    pub certified: bool,
    pub certificate: Option<Certificate>,
    /// Every generator's unknown tail at this degree and above is absorbed, so
    /// the computed lattices are the true ones.
    pub lattice_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Saturation {
    pub threshold: Option<u32>,
    pub per_degree: BTreeMap<u32, Option<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionBound {
    pub bound: Option<u64>,
    pub exponent: Option<u32>,
    pub witnesses: Vec<ChernMonomial>,
}

/// Coefficient ideals in Z_(2)[v], one per square-free monomial, each given by
/// minimal generators `2^k v^a` stored as `(k, a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub rows: BTreeMap<Monomial, Vec<(u32, u32)>>,
}

pub fn render_ideal_generator(k: u32, a: u32) -> String {
    match (k, a) {
        (0, 0) => "1".into(),
        (k, 0) => format!("2^{k}"),
        (0, a) => format!("v^{a}"),
        (k, a) => format!("2^{k}*v^{a}"),
    }
}

impl Profile {
    /// Whether `2^k v^a` lies in the ideal of `m`.
    pub fn contains(&self, m: Monomial, k: u32, a: u32) -> bool {
        self.rows.get(&m).is_some_and(|g| g.iter().any(|&(k2, a2)| k2 <= k && a2 <= a))
    }

    pub fn rendered(&self, model: &GroupModel) -> BTreeMap<String, Vec<String>> {
        self.rows
            .iter()
            .map(|(m, g)| (model.gens().render(*m), g.iter().map(|&(k, a)| render_ideal_generator(k, a)).collect()))
            .collect()
    }
}

/// Per-degree lattice data, suitable for caching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeLattice {
    pub degree: u32,
    pub ambient_basis: Vec<(u32, String)>,
    pub generator_count: usize,
    pub hnf: Vec<Vector>,
    pub certified_precision: Val,
}

/// A linear combination of Chern monomials.
pub type ChernExpr = Vec<(Dyadic, ChernMonomial)>;

pub fn parse_chern_expr(s: &str) -> Result<ChernExpr, Error> {
    let mut out = Vec::new();
    for part in s.split('+') {
        let part = part.trim();
        let split = part.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(part.len());
        let (coeff, mono) = part.split_at(split);
        let coeff = coeff.trim().trim_end_matches('*').trim();
        let c: Dyadic = if coeff.is_empty() { Dyadic::one() } else { coeff.parse()? };
        let m: ChernMonomial = if mono.trim().is_empty() { ChernMonomial::one() } else { mono.parse()? };
        out.push((c, m));
    }
    Ok(out)
}

pub fn render_chern_expr(e: &ChernExpr) -> String {
    e.iter()
        .map(|(c, m)| if *c == Dyadic::one() { m.to_string() } else if m.is_empty() { c.to_string() } else { format!("{c}{m}") })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Values of the norm map on the square-free monomials, as Chern expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormTable {
    pub entries: BTreeMap<Monomial, ChernExpr>,
}

impl NormTable {
    pub fn parse(model: &GroupModel, entries: &[(&str, &str)]) -> Result<NormTable, Error> {
        let mut map = BTreeMap::new();
        for (mono, value) in entries {
            map.insert(model.gens().parse_monomial(mono)?, parse_chern_expr(value)?);
        }
        Ok(NormTable { entries: map })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientComponent {
    pub degree: u32,
    pub invariants: Vec<Order>,
    pub factors: Vec<Factor>,
    pub decomposition_verified: bool,
}

/// Images of all Chern monomials of one model and theory, and the lattices they span.
pub struct ImageModule {
    model: GroupModel,
    theory: TheorySpec,
    max_factors: usize,
    monomials: Vec<ChernMonomial>,
    images: HashMap<ChernMonomial, AmbientElement>,
    by_degree: BTreeMap<u32, Vec<usize>>,
    bases: BTreeMap<u32, Vec<TermKey>>,
    positions: BTreeMap<u32, HashMap<TermKey, usize>>,
    lattices: BTreeMap<u32, Echelon>,
    ideal: BTreeMap<u32, Echelon>,
}

impl ImageModule {
    pub fn new(model: &GroupModel, theory: TheorySpec) -> ImageModule {
        Self::with_max_factors(model, theory, default_max_factors(model))
    }

    pub fn with_max_factors(model: &GroupModel, theory: TheorySpec, max_factors: usize) -> ImageModule {
        Self::build(model, theory, max_factors, None)
    }

    /// Rebuild from previously computed lattice rows (for example from a cache);
    /// images are recomputed, spans are taken as given.
    pub fn with_lattices(
        model: &GroupModel,
        theory: TheorySpec,
        max_factors: usize,
        lattices: BTreeMap<u32, Vec<Vector>>,
    ) -> ImageModule {
        Self::build(model, theory, max_factors, Some(lattices))
    }

    fn build(
        model: &GroupModel,
        theory: TheorySpec,
        max_factors: usize,
        seeded: Option<BTreeMap<u32, Vec<Vector>>>,
    ) -> ImageModule {
        let top = model.top_degree();
        let w = theory.shift();
        let monomials = enumerate_monomials(&model.symbols(), top, max_factors);

        let mut images: HashMap<ChernMonomial, AmbientElement> = HashMap::new();
        images.insert(ChernMonomial::one(), AmbientElement::one(theory));
        let factor_images: HashMap<ChernSymbol, AmbientElement> = model
            .symbols()
            .into_iter()
            .map(|s| (s, model.symbol_image(s, theory).expect("model symbol")))
            .collect();
        for len in 1..=max_factors {
            let layer: Vec<(ChernMonomial, AmbientElement)> = monomials
                .par_iter()
                .filter(|m| m.len() == len)
                .map(|m| {
                    let syms = m.symbols();
                    let prefix = ChernMonomial::new(syms[..len - 1].to_vec());
                    let img = images[&prefix]
                        .multiply(&factor_images[&syms[len - 1]], model.gens())
                        .expect("same theory");
                    (m.clone(), img)
                })
                .collect();
            if layer.is_empty() {
                break;
            }
            images.extend(layer);
        }

        let mut by_degree: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, m) in monomials.iter().enumerate() {
            by_degree.entry(m.degree()).or_default().push(i);
        }

        let mut bases = BTreeMap::new();
        let mut positions = BTreeMap::new();
        let table = model.gens();
        for d in (0..=top).step_by(2) {
            let mut b: Vec<TermKey> = Vec::new();
            for mask in 0..(1u32 << table.len()) {
                let deg = table.degree(Monomial(mask));
                if deg >= d && (deg - d) % w == 0 {
                    b.push(((deg - d) / w, Monomial(mask)));
                }
            }
            b.sort();
            positions.insert(d, b.iter().enumerate().map(|(i, k)| (*k, i)).collect::<HashMap<_, _>>());
            bases.insert(d, b);
        }

        let mut module = ImageModule {
            model: model.clone(),
            theory,
            max_factors,
            monomials,
            images,
            by_degree,
            bases,
            positions,
            lattices: BTreeMap::new(),
            ideal: BTreeMap::new(),
        };

        let lattices = match seeded {
            Some(rows) => rows
                .into_iter()
                .map(|(d, r)| (d, Echelon::from_rows(module.bases[&d].len(), r)))
                .collect(),
            None => module.span_lattices(),
        };
        module.lattices = lattices;
        let degrees: Vec<u32> = module.bases.keys().copied().collect();
        let ideal: BTreeMap<u32, Echelon> = degrees
            .par_iter()
            .map(|&d| {
                let mut e = Echelon::new(module.bases[&d].len());
                for (_, r) in module.lattices[&d].rows() {
                    e.insert(r.iter().map(|x| x.shl(1)).collect());
                }
                for r in module.shifted_rows(d + w, d) {
                    e.insert(r);
                }
                (d, e)
            })
            .collect();
        module.ideal = ideal;
        module
    }

    fn span_lattices(&self) -> BTreeMap<u32, Echelon> {
        let w = self.theory.shift();
        let degrees: Vec<u32> = self.bases.keys().copied().collect();
        let unshifted: BTreeMap<u32, Echelon> = degrees
            .par_iter()
            .map(|&d| {
                let mut e = Echelon::new(self.bases[&d].len());
                for &i in self.by_degree.get(&d).map(|v| v.as_slice()).unwrap_or(&[]) {
                    let img = &self.images[&self.monomials[i]];
                    if !img.is_empty() {
                        e.insert(self.vector(img, d));
                    }
                }
                (d, e)
            })
            .collect();
        let mut lattices: BTreeMap<u32, Echelon> = BTreeMap::new();
        for &d in degrees.iter().rev() {
            let mut e = unshifted[&d].clone();
            if let Some(above) = lattices.get(&(d + w)) {
                for (_, r) in above.rows() {
                    e.insert(self.shift_vector(r, d + w, d));
                }
            }
            lattices.insert(d, e.hermite());
        }
        lattices
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn theory(&self) -> TheorySpec {
        self.theory
    }

    pub fn max_factors(&self) -> usize {
        self.max_factors
    }

    pub fn top_degree(&self) -> u32 {
        self.model.top_degree()
    }

    pub fn degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.bases.keys().copied()
    }

    pub fn ambient_basis(&self, d: u32) -> &[TermKey] {
        self.bases.get(&d).map(|b| b.as_slice()).unwrap_or(&[])
    }

    pub fn lattice(&self, d: u32) -> Option<&Echelon> {
        self.lattices.get(&d)
    }

    pub fn ideal_lattice(&self, d: u32) -> Option<&Echelon> {
        self.ideal.get(&d)
    }

    pub fn monomials_of_degree(&self, d: u32) -> impl Iterator<Item = &ChernMonomial> + '_ {
        self.by_degree.get(&d).into_iter().flatten().map(move |&i| &self.monomials[i])
    }

    pub fn monomials(&self) -> &[ChernMonomial] {
        &self.monomials
    }

    /// The image of a Chern monomial (from the table when enumerated).
    pub fn image(&self, m: &ChernMonomial) -> Result<AmbientElement, Error> {
        for s in m.symbols() {
            self.model.check_symbol(*s)?;
        }
        match self.images.get(m) {
            Some(x) => Ok(x.clone()),
            None => self.model.monomial_image(m, self.theory),
        }
    }

    /// Coordinates of a homogeneous element of degree `d` in the ambient basis.
    pub fn vector(&self, x: &AmbientElement, d: u32) -> Vector {
        let pos = &self.positions[&d];
        let mut v = vec![Dyadic::zero(); pos.len()];
        for (k, c) in x.terms() {
            let i = *pos.get(k).unwrap_or_else(|| panic!("term {k:?} does not have degree {d}"));
            v[i] = &v[i] + c;
        }
        v
    }

    fn shift_vector(&self, v: &[Dyadic], from: u32, to: u32) -> Vector {
        let w = self.theory.shift();
        let k = (from - to) / w;
        let pos = &self.positions[&to];
        let mut out = vec![Dyadic::zero(); pos.len()];
        for (j, (a, m)) in self.bases[&from].iter().enumerate() {
            if !v[j].is_zero() {
                out[pos[&(a + k, *m)]] = v[j].clone();
            }
        }
        out
    }

    fn shifted_rows(&self, from: u32, to: u32) -> Vec<Vector> {
        match self.lattices.get(&from) {
            Some(l) => l.rows().map(|(_, r)| self.shift_vector(r, from, to)).collect(),
            None => Vec::new(),
        }
    }

    /// `v·L_{d+w}` inside the ambient module of degree `d`.
    pub fn relation_lattice(&self, d: u32) -> Echelon {
        Echelon::from_rows(self.ambient_basis(d).len(), self.shifted_rows(d + self.theory.shift(), d))
    }

    /// The lattice `I_∞^p · M_d`, generated by `2^{max(0,p−a)} v^a y_J`.
    fn power_generators(&self, d: u32, p: u32) -> Vec<Vector> {
        let b = self.ambient_basis(d);
        (0..b.len())
            .map(|j| {
                let mut v = vec![Dyadic::zero(); b.len()];
                v[j] = Dyadic::pow2(p.saturating_sub(b[j].0));
                v
            })
            .collect()
    }

    /// Whether every element of I_∞-valuation ≥ p in degree d lies in I·L_d.
    pub fn tail_absorbed(&self, d: u32, p: Val) -> bool {
        let Val::Fin(p) = p else { return true };
        match self.ideal.get(&d) {
            Some(il) => self.power_generators(d, p).iter().all(|v| il.contains(v)),
            None => true,
        }
    }

    fn absorbed_with(&self, d: u32, p: u32, extra: &[Vector]) -> bool {
        let Some(il) = self.ideal.get(&d) else { return true };
        let mut x = il.clone();
        for v in extra {
            x.insert(v.clone());
        }
        self.power_generators(d, p).iter().all(|v| x.contains(v))
    }

    /// (vector, precision) of every generator contributing to `L_d`: each image
    /// of degree `d + k·w`, shifted by `v^k`, with precision raised by `k`.
    fn contributors(&self, d: u32, include_shifted: bool) -> Vec<(Vector, Val)> {
        let w = self.theory.shift();
        let mut out = Vec::new();
        let mut k = 0;
        while d + k * w <= self.top_degree() {
            let deg = d + k * w;
            for m in self.monomials_of_degree(deg) {
                let img = &self.images[m];
                let p = img.precision().plus(k);
                let v = self.vector(img, deg);
                out.push((if k == 0 { v } else { self.shift_vector(&v, deg, d) }, p));
            }
            if !include_shifted {
                break;
            }
            k += 1;
        }
        out
    }

    /// Each contributor's unknown tail is absorbed by I·L_d together with the
    /// contributors of strictly higher precision.
    fn absorbs_tails(&self, d: u32, include_shifted: bool) -> bool {
        let Some(il) = self.ideal.get(&d) else { return true };
        let mut levels: BTreeMap<Val, Vec<Vector>> = BTreeMap::new();
        // A zero image still has an unknown tail at its precision.
        for (v, p) in self.contributors(d, include_shifted) {
            levels.entry(p).or_default().push(v);
        }
        let mut span = il.clone();
        for (p, vecs) in levels.into_iter().rev() {
            if let Val::Fin(p) = p {
                if !self.power_generators(d, p).iter().all(|v| span.contains(v)) {
                    return false;
                }
            }
            for v in vecs {
                span.insert(v);
            }
        }
        true
    }

    /// Per-degree perturbation test used to certify graded pieces.
    pub fn perturbation_stable(&self, d: u32) -> bool {
        let w = self.theory.shift();
        self.absorbs_tails(d, true) && (d + w > self.top_degree() || self.absorbs_tails(d + w, true))
    }

    /// The tail-absorption condition on unshifted generators at `d, d+w, d+2w, …`;
    /// by graded Nakayama it forces the computed `L_d` to equal the true one.
    pub fn lattice_exact(&self, d: u32) -> bool {
        let w = self.theory.shift();
        let mut deg = d;
        while deg <= self.top_degree() {
            if !self.absorbs_tails(deg, false) {
                return false;
            }
            deg += w;
        }
        true
    }

    pub fn certified_precision(&self, d: u32) -> Val {
        self.contributors(d, true).iter().map(|(_, p)| *p).min().unwrap_or(Val::Inf)
    }

    pub fn degree_lattice(&self, d: u32) -> Option<DegreeLattice> {
        let l = self.lattices.get(&d)?;
        let w = self.theory.shift();
        let mut count = 0;
        let mut k = 0;
        while d + k * w <= self.top_degree() {
            count += self.by_degree.get(&(d + k * w)).map_or(0, |v| v.len());
            k += 1;
        }
        Some(DegreeLattice {
            degree: d,
            ambient_basis: self.bases[&d].iter().map(|(a, m)| (*a, self.model.gens().render(*m))).collect(),
            generator_count: count,
            hnf: l.basis(),
            certified_precision: self.certified_precision(d),
        })
    }

    pub fn all_lattice_rows(&self) -> BTreeMap<u32, Vec<Vector>> {
        self.lattices.iter().map(|(d, l)| (*d, l.basis())).collect()
    }

    /// Free rank and torsion exponents of `L_d / sub` (with `sub ⊆ L_d`).
    fn invariants(&self, d: u32, sub: &Echelon) -> (usize, Vec<u32>) {
        let Some(l) = self.lattices.get(&d) else { return (0, Vec::new()) };
        if l.rank() == 0 {
            return (0, Vec::new());
        }
        let coords: Vec<Vector> =
            sub.rows().map(|(_, r)| l.coordinates(r).expect("sublattice of the image lattice")).collect();
        let snf = smith(&coords, l.rank());
        let mut torsion: Vec<u32> = snf.diagonal.iter().copied().filter(|&k| k > 0).collect();
        torsion.sort_unstable();
        (l.rank() - snf.diagonal.len(), torsion)
    }

    /// `sub + 2·L_d`: elements vanishing in `(L_d / sub) / 2`.
    fn mod2_kernel(&self, d: u32, sub: &Echelon) -> Echelon {
        let mut m = sub.clone();
        if let Some(l) = self.lattices.get(&d) {
            for (_, r) in l.rows() {
                m.insert(r.iter().map(|x| x.shl(1)).collect());
            }
        }
        m
    }

    /// Invariant factors of `L_d / sub` with Chern monomial representatives: the
    /// first candidates (in the given order) forming a basis modulo 2 whose
    /// orders match the invariant factors. Such a system is a direct-sum
    /// decomposition; the flag is false if none was found and the plain
    /// mod-2 basis is returned instead.
    fn quotient(&self, d: u32, sub: &Echelon, candidates: &[ChernMonomial]) -> (Vec<Order>, Vec<Factor>, bool) {
        let (free, torsion) = self.invariants(d, sub);
        let wanted = free + torsion.len();
        let orders: Vec<Order> =
            std::iter::repeat_n(Order::Free, free).chain(torsion.iter().map(|&k| Order::Torsion(k))).collect();
        if wanted == 0 {
            return (orders, Vec::new(), true);
        }
        let kernel = self.mod2_kernel(d, sub);
        let pool: Vec<(usize, Vector, Order)> = candidates
            .iter()
            .enumerate()
            .filter_map(|(i, m)| {
                let v = self.vector(&self.images[m], d);
                if kernel.contains(&v) {
                    return None;
                }
                let order = sub.order_exponent(&v).map_or(Order::Free, Order::Torsion);
                Some((i, v, order))
            })
            .collect();
        let target = Target { free, torsion_sum: torsion.iter().sum(), wanted };
        let mut budget = SEARCH_BUDGET;
        let mut chosen = Vec::new();
        let found = search(&pool, 0, &kernel, &mut chosen, 0, 0, &target, &mut budget);
        if !found {
            chosen.clear();
            let mut k = kernel.clone();
            for (j, (_, v, _)) in pool.iter().enumerate() {
                if chosen.len() == wanted {
                    break;
                }
                if !k.contains(v) {
                    k.insert(v.clone());
                    chosen.push(j);
                }
            }
        }
        let factors = chosen
            .iter()
            .map(|&j| Factor { order: pool[j].2, representative: candidates[pool[j].0].clone() })
            .collect();
        (orders, factors, found)
    }

    /// Whether the given factors realize `gr^d` as a direct sum: the classes
    /// generate, each has the stated order, and the orders are the invariant factors.
    pub fn realizes(&self, d: u32, factors: &[Factor]) -> Result<bool, Error> {
        self.realizes_in_quotient(d, &self.relation_lattice(d), factors)
    }

    /// As [`ImageModule::realizes`] for `L_d / sub`.
    pub fn realizes_in_quotient(&self, d: u32, sub: &Echelon, factors: &[Factor]) -> Result<bool, Error> {
        let (free, torsion) = self.invariants(d, sub);
        let mut declared: Vec<u32> = Vec::new();
        let mut declared_free = 0;
        let mut kernel = self.mod2_kernel(d, sub);
        for f in factors {
            if f.representative.degree() != d || d > self.top_degree() {
                return Ok(false);
            }
            let v = self.vector(&self.image(&f.representative)?, d);
            if kernel.contains(&v) {
                return Ok(false);
            }
            kernel.insert(v.clone());
            let actual = sub.order_exponent(&v).map_or(Order::Free, Order::Torsion);
            if actual != f.order {
                return Ok(false);
            }
            match f.order {
                Order::Free => declared_free += 1,
                Order::Torsion(k) => declared.push(k),
            }
        }
        declared.sort_unstable();
        Ok(declared_free == free && declared == torsion)
    }

    /// Whether `2^k·v^a·y_J` plus terms of I_∞-valuation above `k + a` lies in the
    /// image whatever the unknown tails, i.e. it is reached from generators
    /// known beyond valuation `k + a`.
    pub fn profile_generator_certified(&self, m: Monomial, k: u32, a: u32) -> bool {
        let w = self.theory.shift();
        let Some(d) = self.model.gens().degree(m).checked_sub(a * w) else { return false };
        let Some(&pos) = self.positions.get(&d).and_then(|p| p.get(&(a, m))) else { return false };
        // An exact lattice has exact pivots.
        if self.lattice_exact(d) {
            return true;
        }
        let q = k + a;
        let mut span = Echelon::from_rows(self.ambient_basis(d).len(), self.power_generators(d, q + 1));
        for (v, p) in self.contributors(d, true) {
            if p > Val::Fin(q) {
                span.insert(v);
            }
        }
        let mut target = vec![Dyadic::zero(); self.ambient_basis(d).len()];
        target[pos] = Dyadic::pow2(k);
        span.contains(&target)
    }

    pub fn gr_component(&self, d: u32) -> GrComponent {
        let sub = self.relation_lattice(d);
        let candidates: Vec<ChernMonomial> = self.monomials_of_degree(d).cloned().collect();
        let (invariants, factors, verified) = self.quotient(d, &sub, &candidates);
        GrComponent {
            degree: d,
            invariants,
            factors,
            decomposition_verified: verified,
            certified: self.perturbation_stable(d) || self.exact_free_part(d),
        }
    }

    /// Exact unshifted generators whose `v^0` parts stay independent span a
    /// complement of `v·L_{d+w}`, so `gr^d` is free on them whatever the tails.
    fn exact_free_part(&self, d: u32) -> bool {
        let gens = self.contributors(d, false);
        if gens.iter().any(|(_, p)| !p.is_inf()) {
            return false;
        }
        let keep: Vec<usize> = (0..self.ambient_basis(d).len()).filter(|&i| self.bases[&d][i].0 == 0).collect();
        let full = Echelon::from_rows(self.ambient_basis(d).len(), gens.iter().map(|(v, _)| v.clone()));
        let head = Echelon::from_rows(keep.len(), gens.iter().map(|(v, _)| keep.iter().map(|&i| v[i].clone()).collect()));
        full.rank() == head.rank()
    }

    pub fn gr_table(&self) -> Vec<GrComponent> {
        let degrees: Vec<u32> = self.degrees().collect();
        degrees.par_iter().map(|&d| self.gr_component(d)).collect()
    }

    /// Dimension over F_2 of `gr^d / 2 = L_d / I·L_d`.
    pub fn gr_mod2_dimension(&self, d: u32) -> usize {
        let (Some(l), Some(il)) = (self.lattices.get(&d), self.ideal.get(&d)) else { return 0 };
        let mut e = il.clone();
        let mut count = 0;
        for (_, r) in l.rows() {
            if !e.contains(r) {
                count += 1;
                e.insert(r.clone());
            }
        }
        count
    }

    /// Whether the given classes are linearly independent in `gr^d / 2`, and
    /// whether that remains true under every admissible perturbation of their
    /// images (each tail absorbed by I·L_d plus the classes of higher precision).
    pub fn independent_mod2(&self, d: u32, classes: &[ChernMonomial]) -> Result<(bool, bool), Error> {
        let Some(il) = self.ideal.get(&d) else { return Ok((classes.is_empty(), true)) };
        let mut e = il.clone();
        let mut imgs = Vec::new();
        let mut independent = true;
        for m in classes {
            let x = self.image(m)?;
            let v = self.vector(&x, d);
            if e.contains(&v) {
                independent = false;
            }
            e.insert(v.clone());
            imgs.push((v, x.precision()));
        }
        let robust = imgs.iter().all(|(_, p)| match p {
            Val::Inf => true,
            Val::Fin(p) => {
                let higher: Vec<Vector> =
                    imgs.iter().filter(|(_, q)| *q > Val::Fin(*p)).map(|(v, _)| v.clone()).collect();
                self.absorbed_with(d, *p, &higher)
            }
        });
        Ok((independent, robust))
    }

    /// Whether the class of `x` vanishes in `gr^d / 2`, with a certificate when
    /// the verdict is independent of the unknown higher-order parts.
    pub fn class_in_gr(&self, x: &ChernMonomial) -> Result<ClassVerdict, Error> {
        self.class_in_gr_capped(x, Val::Inf)
    }

    /// As [`ImageModule::class_in_gr`], treating the image as known only modulo I_∞^cap.
    pub fn class_in_gr_capped(&self, x: &ChernMonomial, cap: Val) -> Result<ClassVerdict, Error> {
        let img = self.image(x)?.with_precision_cap(cap);
        let d = x.degree();
        let p = img.precision();
        let rendered = img.render(self.model.gens());
        if d > self.top_degree() {
            return Ok(ClassVerdict {
                class: x.clone(),
                degree: d,
                image: rendered,
                precision: p,
                zero: true,
                certified: true,
                certificate: Some(Certificate::OwnTail { precision: p }),
                lattice_exact: true,
            });
        }
        let v = self.vector(&img, d);
        let zero = self.ideal[&d].contains(&v);
        let mut certificate = None;
        if self.tail_absorbed(d, p) {
            certificate = Some(Certificate::OwnTail { precision: p });
        } else if !zero {
            certificate = self.pairing_certificate(x, cap).or_else(|| self.restriction_certificate(x));
        }
        Ok(ClassVerdict {
            class: x.clone(),
            degree: d,
            image: rendered,
            precision: p,
            zero,
            certified: certificate.is_some(),
            certificate,
            lattice_exact: self.lattice_exact(d),
        })
    }

    /// If `x ∈ I·L_d` then `x·h ∈ I·L_top = 2·t(G)·Z_(2)·y_top` for every Chern
    /// monomial `h`; a product whose y_top coefficient is known to have smaller
    /// valuation therefore proves `x ∉ I·L_d`.
    fn pairing_certificate(&self, x: &ChernMonomial, cap: Val) -> Option<Certificate> {
        let ti = self.model.torsion_index()?;
        let t_exp = ti.trailing_zeros();
        let top = self.top_degree();
        let rest = top.checked_sub(x.degree())?;
        let symbols = self.model.symbols();
        let partners = enumerate_monomials(&symbols, rest, self.max_factors);
        let y_top = self.model.y_top();
        partners.into_iter().filter(|h| h.degree() == rest).find_map(|h| {
            let prod = self.image(x).ok()?.with_precision_cap(cap).multiply(&self.image(&h).ok()?, self.model.gens()).ok()?;
            let c = prod.coefficient(0, y_top);
            let Val::Fin(k) = c.val2() else { return None };
            let p = prod.precision();
            (Val::Fin(k) < p && k <= t_exp).then(|| Certificate::TopPairing {
                partner: h.clone(),
                exponent: k,
                precision: p,
                torsion_index: ti,
            })
        })
    }

    /// A class that is certified nonzero for a smaller group of the same family
    /// (with the same Euler-type class) stays nonzero, since restriction maps
    /// `c_i ↦ c_i` and `e ↦ e` and preserves the filtration.
    fn restriction_certificate(&self, x: &ChernMonomial) -> Option<Certificate> {
        let needed = x
            .symbols()
            .iter()
            .filter(|s| s.kind == SymbolKind::C)
            .map(|s| s.index)
            .max()
            .unwrap_or(1);
        let has_e = x.symbols().iter().any(|s| s.kind == SymbolKind::E);
        let min_ell = match self.model.family() {
            Family::Spin => 3,
            Family::So => 1,
        };
        (min_ell.max(needed)..self.model.ell()).rev().find_map(|ell| {
            let smaller = GroupModel::build(self.model.family(), 2 * ell + 1).ok()?;
            if has_e && smaller.t() != self.model.t() {
                return None;
            }
            let sub = ImageModule::new(&smaller, self.theory);
            let verdict = sub.class_in_gr(x).ok()?;
            (!verdict.zero && verdict.certified).then_some(Certificate::Restriction { m: smaller.m() })
        })
    }

    /// Per-degree thresholds and the overall one for degrees in `[lo, hi]`.
    pub fn saturation_threshold(&self, lo: u32, hi: u32) -> Saturation {
        let per_degree: BTreeMap<u32, Option<u32>> = self
            .degrees()
            .filter(|d| (lo..=hi).contains(d))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&d| (d, (1..=SATURATION_CAP).find(|&p| self.tail_absorbed(d, Val::Fin(p)))))
            .collect();
        let threshold = per_degree.values().try_fold(1u32, |acc, p| p.map(|p| acc.max(p)));
        Saturation { threshold, per_degree }
    }

    pub fn image_profile(&self) -> Profile {
        let mut raw: BTreeMap<Monomial, BTreeSet<(u32, u32)>> = BTreeMap::new();
        for (d, l) in &self.lattices {
            for (&i, row) in l.rows() {
                let (a, m) = self.bases[d][i];
                let k = row[i].val2().finite().expect("pivot is nonzero");
                raw.entry(m).or_default().insert((k, a));
            }
        }
        let rows = raw
            .into_iter()
            .map(|(m, gens)| {
                let minimal: Vec<(u32, u32)> = gens
                    .iter()
                    .filter(|&&(k, a)| !gens.iter().any(|&(k2, a2)| (k2, a2) != (k, a) && k2 <= k && a2 <= a))
                    .copied()
                    .collect();
                let mut minimal = minimal;
                minimal.sort_by_key(|&(k, a)| (a, k));
                (m, minimal)
            })
            .collect();
        Profile { rows }
    }

    /// `v·L_{d+w}` plus the degree-d part of the ideal generated by the given
    /// Chern expressions (products with enumerated Chern monomials).
    /// Also returns the least precision among the products used.
    pub fn ideal_sublattice(&self, d: u32, generators: &[ChernExpr]) -> Result<(Echelon, Val), Error> {
        let mut e = self.relation_lattice(d);
        let mut precision = Val::Inf;
        for g in generators {
            let deg = g.first().map(|(_, m)| m.degree()).unwrap_or(0);
            if g.iter().any(|(_, m)| m.degree() != deg) {
                return Err(Error::Invalid(format!("inhomogeneous expression {}", render_chern_expr(g))));
            }
            let Some(rest) = d.checked_sub(deg) else { continue };
            for m in self.monomials_of_degree(rest) {
                let mut acc: Option<AmbientElement> = None;
                let mut known = true;
                for (c, gm) in g {
                    let prod = m.times(gm);
                    let Some(img) = self.images.get(&prod) else {
                        known = false;
                        break;
                    };
                    let term = img.scale(c);
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.add(&term)?,
                    });
                }
                if let (true, Some(x)) = (known, acc) {
                    precision = precision.min(x.precision());
                    e.insert(self.vector(&x, d));
                }
            }
        }
        Ok((e, precision))
    }

    /// Additive structure of `gr / (ideal generated by the given expressions)`.
    pub fn ideal_quotient(&self, generators: &[ChernExpr]) -> Result<Vec<QuotientComponent>, Error> {
        let mut out = Vec::new();
        for d in self.degrees().collect::<Vec<_>>() {
            let (sub, _) = self.ideal_sublattice(d, generators)?;
            let candidates: Vec<ChernMonomial> = self.monomials_of_degree(d).cloned().collect();
            let (invariants, factors, decomposition_verified) = self.quotient(d, &sub, &candidates);
            if !invariants.is_empty() {
                out.push(QuotientComponent { degree: d, invariants, factors, decomposition_verified });
            }
        }
        Ok(out)
    }

    /// Quotient of gr by the image of the norm map. The image is an ideal
    /// (projection formula) containing `N(1) = 2`.
    pub fn norm_quotient(&self, norm: &NormTable) -> Result<Vec<QuotientComponent>, Error> {
        self.ideal_quotient(&self.norm_generators(norm)?)
    }

    pub fn norm_generators(&self, norm: &NormTable) -> Result<Vec<ChernExpr>, Error> {
        let all = 1u32 << self.model.gens().len();
        if (0..all).any(|mask| !norm.entries.contains_key(&Monomial(mask))) {
            return Err(Error::Invalid("norm table must cover every square-free monomial".into()));
        }
        Ok(norm.entries.values().cloned().collect())
    }
}

/// Least s such that some Chern monomial of top degree maps to `2^s·y_top`
/// modulo terms of higher valuation, with every monomial attaining it.
pub fn torsion_bound_search(model: &GroupModel, theory: TheorySpec, max_factors: usize) -> TorsionBound {
    let top = model.top_degree();
    let y_top = model.y_top();
    let monos: Vec<ChernMonomial> = enumerate_monomials(&model.symbols(), top, max_factors)
        .into_iter()
        .filter(|m| m.degree() == top)
        .collect();
    let found: Vec<(u32, ChernMonomial)> = monos
        .par_iter()
        .filter_map(|m| {
            let img = model.monomial_image(m, theory).ok()?;
            let Val::Fin(k) = img.coefficient(0, y_top).val2() else { return None };
            (Val::Fin(k) < img.precision()).then(|| (k, m.clone()))
        })
        .collect();
    let best = found.iter().map(|(k, _)| *k).min();
    let mut witnesses: Vec<ChernMonomial> =
        found.into_iter().filter(|(k, _)| Some(*k) == best).map(|(_, m)| m).collect();
    witnesses.sort_by(|a, b| a.enumeration_key().cmp(&b.enumeration_key()));
    TorsionBound { bound: best.map(|k| 1u64 << k), exponent: best, witnesses }
}
