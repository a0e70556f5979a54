//! Registry of checkable statements about the image lattices, each bound to
//! an exact expected payload.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::TheorySpec;
use crate::lattice::{
    enumerate_monomials, parse_chern_expr, torsion_bound_search, default_max_factors, ChernExpr, Factor,
    ImageModule, NormTable, Order,
};
use crate::model::{ChernMonomial, ChernSymbol, Family, GroupModel};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactReport {
    pub id: String,
    pub pass: bool,
    pub certified: bool,
    pub witness: Value,
    pub citation: String,
}

impl FactReport {
    /// A pass only counts when it is certified.
    pub fn ok(&self) -> bool {
        self.pass && self.certified
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub facts: Vec<FactReport>,
    pub passed: usize,
    pub failed: usize,
    pub uncertified: usize,
}

impl SuiteReport {
    pub fn success(&self) -> bool {
        self.failed == 0 && self.uncertified == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.facts {
            let verdict = match (f.pass, f.certified) {
                (true, true) => "pass",
                (true, false) => "uncertified",
                _ => "FAIL",
            };
            let _ = writeln!(out, "{:<7} {:<12} {}", f.id, verdict, f.citation);
        }
        let _ = writeln!(
            out,
            "{} facts: {} passed, {} failed, {} uncertified",
            self.facts.len(),
            self.passed,
            self.failed,
            self.uncertified
        );
        out
    }
}

#[derive(Clone)]
struct Outcome {
    pass: bool,
    certified: bool,
    witness: Value,
}

type Runner = fn(&Context) -> Result<Outcome, Error>;

pub struct Fact {
    pub id: &'static str,
    pub tags: &'static [&'static str],
    pub citation: &'static str,
    run: Runner,
}

impl Fact {
    pub fn matches(&self, filter: &str) -> bool {
        self.id.eq_ignore_ascii_case(filter) || self.tags.iter().any(|t| t.eq_ignore_ascii_case(filter))
    }
}

type ModuleKey = (Family, u32, u32);

/// Shared, lazily built image modules.
#[derive(Default)]
pub struct Context {
    modules: Mutex<HashMap<ModuleKey, Arc<OnceLock<Arc<ImageModule>>>>>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn module(&self, family: Family, m: u32, n: u32) -> Result<Arc<ImageModule>, Error> {
        let model = GroupModel::build(family, m)?;
        let theory = TheorySpec::new(n)?;
        let cell = self.modules.lock().expect("module cache").entry((family, m, n)).or_default().clone();
        Ok(cell.get_or_init(|| Arc::new(ImageModule::new(&model, theory))).clone())
    }

    fn spin(&self, m: u32, n: u32) -> Result<Arc<ImageModule>, Error> {
        self.module(Family::Spin, m, n)
    }
}

fn mono(s: &str) -> ChernMonomial {
    s.parse().expect("well-formed monomial literal")
}

fn free(s: &str) -> Factor {
    Factor { order: Order::Free, representative: mono(s) }
}

fn two(s: &str) -> Factor {
    Factor { order: Order::Torsion(1), representative: mono(s) }
}

fn render_factors(fs: &[Factor]) -> Vec<String> {
    fs.iter().map(|f| format!("{}({})", f.order, f.representative)).collect()
}

/// Additive tensor product of two lists of cyclic summands.
fn tensor(a: &[Factor], b: &[Factor]) -> Vec<Factor> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let order = match (x.order, y.order) {
                (Order::Free, Order::Free) => Order::Free,
                (Order::Free, t) | (t, Order::Free) => t,
                (Order::Torsion(i), Order::Torsion(j)) => Order::Torsion(i.min(j)),
            };
            out.push(Factor { order, representative: x.representative.times(&y.representative) });
        }
    }
    out
}

fn by_degree(fs: &[Factor]) -> BTreeMap<u32, Vec<Factor>> {
    let mut map: BTreeMap<u32, Vec<Factor>> = BTreeMap::new();
    for f in fs {
        map.entry(f.representative.degree()).or_default().push(f.clone());
    }
    map
}

/// Multiset of orders per degree.
fn composition(fs: &[Factor]) -> BTreeMap<u32, Vec<Order>> {
    by_degree(fs)
        .into_iter()
        .map(|(d, v)| {
            let mut o: Vec<Order> = v.iter().map(|f| f.order).collect();
            o.sort();
            (d, o)
        })
        .collect()
}

/// Compare the whole graded module with an expected list of summands.
fn basis_match(e: &ImageModule, expected: &[Factor], max_degree: u32) -> Result<Outcome, Error> {
    let grouped = by_degree(expected);
    let mut pass = true;
    let mut certified = true;
    let mut table = serde_json::Map::new();
    let mut mismatches = Vec::new();
    for d in e.degrees().filter(|&d| d <= max_degree) {
        let want = grouped.get(&d).cloned().unwrap_or_default();
        let c = e.gr_component(d);
        let ok = e.realizes(d, &want)?;
        certified &= c.certified;
        if !ok {
            pass = false;
            mismatches.push(json!({
                "degree": d,
                "expected": render_factors(&want),
                "computed": c.invariants.iter().map(|o| o.to_string()).collect::<Vec<_>>(),
            }));
        }
        if !c.invariants.is_empty() {
            table.insert(d.to_string(), json!(render_factors(&c.factors)));
        }
    }
    if grouped.keys().any(|&d| d > e.top_degree() && d <= max_degree) {
        pass = false;
    }
    Ok(Outcome { pass, certified, witness: json!({ "table": table, "mismatches": mismatches }) })
}

fn class_outcome(e: &ImageModule, x: &str, expect_zero: bool) -> Result<Outcome, Error> {
    let v = e.class_in_gr(&mono(x))?;
    Ok(Outcome {
        pass: v.zero == expect_zero,
        certified: v.certified,
        witness: json!({
            "group": e.model().name(),
            "n": e.theory().n(),
            "class": v.class,
            "image": v.image,
            "zero": v.zero,
            "certificate": v.certificate,
        }),
    })
}

fn conjunction(parts: Vec<(&str, Outcome)>) -> Outcome {
    let pass = parts.iter().all(|(_, o)| o.pass);
    let certified = parts.iter().all(|(_, o)| o.certified);
    let witness = Value::Object(parts.into_iter().map(|(k, o)| (k.to_string(), o.witness)).collect());
    Outcome { pass, certified, witness }
}

fn saturation_match(e: &ImageModule, hi: u32, expected: u32) -> Outcome {
    let s = e.saturation_threshold(0, hi);
    let certified = e.degrees().filter(|&d| d <= hi).all(|d| e.lattice_exact(d));
    Outcome {
        pass: s.threshold == Some(expected),
        certified,
        witness: json!({ "threshold": s.threshold, "per_degree": s.per_degree, "expected": expected }),
    }
}

/// Exact comparison of profile rows given as rendered generator lists.
fn profile_match(e: &ImageModule, expected: &[(&str, &[&str])]) -> Result<Outcome, Error> {
    let profile = e.image_profile();
    let rendered = profile.rendered(e.model());
    let mut pass = true;
    let mut certified = true;
    let mut mismatches = Vec::new();
    for (m, gens) in expected {
        let key = e.model().gens().parse_monomial(m)?;
        let got = rendered.get(&e.model().gens().render(key)).cloned().unwrap_or_default();
        let want: Vec<String> = gens.iter().map(|s| s.to_string()).collect();
        if got != want {
            pass = false;
            mismatches.push(json!({ "monomial": m, "expected": want, "computed": got }));
        }
        for &(k, a) in profile.rows.get(&key).into_iter().flatten() {
            certified &= e.profile_generator_certified(key, k, a);
        }
    }
    Ok(Outcome { pass, certified, witness: json!({ "profile": rendered, "mismatches": mismatches }) })
}

/// Whether each `(k, a)` generator lies in the y_top row, robustly.
fn top_row_contains(e: &ImageModule, gens: &[(u32, u32)]) -> Outcome {
    let top = e.model().y_top();
    let profile = e.image_profile();
    let pass = gens.iter().all(|&(k, a)| profile.contains(top, k, a));
    let certified = gens.iter().all(|&(k, a)| e.profile_generator_certified(top, k, a));
    let row = profile.rendered(e.model()).remove(&e.model().gens().render(top)).unwrap_or_default();
    Outcome { pass, certified, witness: json!({ "group": e.model().name(), "n": e.theory().n(), "y_top": row }) }
}

fn norm_table(model: &GroupModel, entries: &[(&str, &str)]) -> Result<NormTable, Error> {
    NormTable::parse(model, entries)
}

const SPIN11_NORM: [(&str, &str); 4] = [("1", "2"), ("y6", "c3"), ("y10", "c5"), ("y6*y10", "e8")];

const SPIN13_NORM: [(&str, &str); 8] = [
    ("1", "2"),
    ("y6", "2c3"),
    ("y10", "2c5"),
    ("y6*y10", "2e8"),
    ("y12", "2c6"),
    ("y6*y12", "c3c6"),
    ("y10*y12", "c5c6"),
    ("y6*y10*y12", "e8c6"),
];

/// Tails of the norm generators and of the image lattices are absorbed in every degree.
fn norm_certified(e: &ImageModule, gens: &[ChernExpr]) -> Result<bool, Error> {
    for d in e.degrees().collect::<Vec<_>>() {
        let (_, p) = e.ideal_sublattice(d, gens)?;
        if !e.perturbation_stable(d) || !e.tail_absorbed(d, p) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn norm_match(e: &ImageModule, table: &NormTable, expected: &[Factor]) -> Result<Outcome, Error> {
    let gens = e.norm_generators(table)?;
    let grouped = by_degree(expected);
    let mut pass = true;
    for d in e.degrees().collect::<Vec<_>>() {
        let (sub, _) = e.ideal_sublattice(d, &gens)?;
        let want = grouped.get(&d).cloned().unwrap_or_default();
        pass &= e.realizes_in_quotient(d, &sub, &want)?;
    }
    let quotient = e.norm_quotient(table)?;
    let witness: BTreeMap<String, Vec<String>> =
        quotient.iter().map(|q| (q.degree.to_string(), render_factors(&q.factors))).collect();
    Ok(Outcome { pass, certified: norm_certified(e, &gens)?, witness: json!({ "quotient": witness }) })
}

fn exterior(symbols: &[&str]) -> Vec<Factor> {
    let mut out = vec![ChernMonomial::one()];
    for s in symbols {
        let more: Vec<ChernMonomial> = out.iter().map(|m| m.times(&mono(s))).collect();
        out.extend(more);
    }
    out.into_iter().map(|representative| Factor { order: Order::Torsion(1), representative }).collect()
}

fn spin11_basis() -> Vec<Factor> {
    vec![free("1"), two("c2"), free("c3"), two("c4"), free("c5"), two("c2c4"), free("e8")]
}

/// The summary presentation: A ⊗ (Z{1, c6} ⊕ Z/2{c4}) ⊕ Z/2{c6c4},
/// A = Z{1, c3, c5, e8} ⊕ Z/2{c2}.
pub fn spin13_summary_presentation() -> Vec<Factor> {
    let a = [free("1"), free("c3"), free("c5"), free("e8"), two("c2")];
    let b = [free("1"), free("c6"), two("c4")];
    let mut out = tensor(&a, &b);
    out.push(two("c6c4"));
    out
}

/// P(b)/(c2c5, c2c4c5) ⊕ Z/2{c4c3, e8c4, c2c6, c4c6} ⊕ Z{1, c3, c6, e8, c3c6, c5c6, e8c6}
/// with P(b) = Λ(c2, c4, c5)/(2c2, 2c4); the unit listed twice is one class.
pub fn spin13_full_presentation() -> Vec<Factor> {
    let mut pb = Vec::new();
    for m in ["1", "c2", "c4", "c5", "c2c4", "c2c5", "c4c5", "c2c4c5"] {
        let x = mono(m);
        if m == "c2c5" || m == "c2c4c5" {
            continue;
        }
        let torsion = x.symbols().iter().any(|s| *s == ChernSymbol::c(2) || *s == ChernSymbol::c(4));
        pb.push(if torsion { two(m) } else { free(m) });
    }
    let mut out = pb;
    out.extend(["c4c3", "e8c4", "c2c6", "c4c6"].map(two));
    for m in ["1", "c3", "c6", "e8", "c3c6", "c5c6", "e8c6"] {
        if !out.iter().any(|f| f.representative == mono(m)) {
            out.push(free(m));
        }
    }
    out
}

fn t7_1(ctx: &Context) -> Result<Outcome, Error> {
    basis_match(&*ctx.spin(11, 1)?, &spin11_basis(), 32)
}

fn t1_3(ctx: &Context) -> Result<Outcome, Error> {
    basis_match(&*ctx.spin(13, 1)?, &spin13_summary_presentation(), 56)
}

fn t9_5(ctx: &Context) -> Result<Outcome, Error> {
    let full = spin13_full_presentation();
    let mut o = basis_match(&*ctx.spin(13, 1)?, &full, 56)?;
    let agree = composition(&full) == composition(&spin13_summary_presentation());
    o.pass &= agree;
    o.witness["presentations_agree"] = json!(agree);
    Ok(o)
}

fn c8_5(ctx: &Context) -> Result<Outcome, Error> {
    profile_match(
        &*ctx.spin(11, 1)?,
        &[("1", &["1"]), ("y6", &["2^1", "v^1"]), ("y10", &["2^1", "v^1"]), ("y6*y10", &["2^1", "v^2"])],
    )
}

/// The y12 row is (2) beyond the part coming from the smaller group, where
/// y12 = y6² contributes (v y6)² = v²y12.
fn l9_8(ctx: &Context) -> Result<Outcome, Error> {
    profile_match(
        &*ctx.spin(13, 1)?,
        &[
            ("1", &["1"]),
            ("y6", &["2^1", "v^1"]),
            ("y10", &["2^1", "v^1"]),
            ("y6*y10", &["2^1", "v^2"]),
            ("y12", &["2^1", "v^2"]),
            ("y6*y12", &["2^2", "2^1*v^1", "v^2"]),
            ("y10*y12", &["2^2", "2^1*v^1", "v^2"]),
            ("y6*y10*y12", &["2^2", "v^2"]),
        ],
    )
}

fn c10_6(ctx: &Context) -> Result<Outcome, Error> {
    Ok(conjunction(vec![
        ("n1", top_row_contains(&*ctx.spin(17, 1)?, &[(4, 0), (3, 1)])),
        ("n2", top_row_contains(&*ctx.spin(17, 2)?, &[(3, 1)])),
    ]))
}

fn t8_2(ctx: &Context) -> Result<Outcome, Error> {
    let e = ctx.spin(11, 1)?;
    let table = norm_table(e.model(), &SPIN11_NORM)?;
    norm_match(&e, &table, &exterior(&["c2", "c4"]))
}

fn l9_7(ctx: &Context) -> Result<Outcome, Error> {
    let e = ctx.spin(13, 1)?;
    let table = norm_table(e.model(), &SPIN13_NORM)?;
    let gens = e.norm_generators(&table)?;
    let ideal: Vec<ChernExpr> =
        ["2", "c3c6", "c5c6", "e8c6"].iter().map(|s| parse_chern_expr(s)).collect::<Result<_, _>>()?;
    let mut same = true;
    let mut differing = Vec::new();
    for d in e.degrees().collect::<Vec<_>>() {
        let (a, _) = e.ideal_sublattice(d, &gens)?;
        let (b, _) = e.ideal_sublattice(d, &ideal)?;
        if !a.same_span(&b) {
            same = false;
            differing.push(d);
        }
    }
    let quotient = e.norm_quotient(&table)?;
    let witness: BTreeMap<String, Vec<String>> =
        quotient.iter().map(|q| (q.degree.to_string(), render_factors(&q.factors))).collect();
    Ok(Outcome {
        pass: same,
        certified: norm_certified(&e, &gens)? && norm_certified(&e, &ideal)?,
        witness: json!({ "quotient": witness, "differing_degrees": differing }),
    })
}

fn l8_1(ctx: &Context) -> Result<Outcome, Error> {
    Ok(saturation_match(&*ctx.spin(11, 1)?, 32, 3))
}

fn l9_1(ctx: &Context) -> Result<Outcome, Error> {
    Ok(saturation_match(&*ctx.spin(13, 1)?, 56, 4))
}

fn l9_2(ctx: &Context) -> Result<Outcome, Error> {
    class_outcome(&*ctx.spin(13, 1)?, "c2c3", true)
}

fn l10_1(ctx: &Context) -> Result<Outcome, Error> {
    class_outcome(&*ctx.spin(15, 1)?, "c2c3", false)
}

fn l10_2(ctx: &Context) -> Result<Outcome, Error> {
    class_outcome(&*ctx.spin(17, 1)?, "c2c3c6c7", true)
}

fn l10_3(ctx: &Context) -> Result<Outcome, Error> {
    class_outcome(&*ctx.spin(17, 2)?, "c2c3c6c7", false)
}

fn t10_4(ctx: &Context) -> Result<Outcome, Error> {
    Ok(conjunction(vec![("zero_at_n1", l10_2(ctx)?), ("nonzero_at_n2", l10_3(ctx)?)]))
}

fn l10_5(ctx: &Context) -> Result<Outcome, Error> {
    Ok(conjunction(vec![
        ("zero_at_n1", class_outcome(&*ctx.spin(19, 1)?, "c2c3c6e16", true)?),
        ("nonzero_at_n2", class_outcome(&*ctx.spin(19, 2)?, "c2c3c6e16", false)?),
    ]))
}

fn torsion_fact(ell: u32, expected: u64, witness: Option<&str>) -> Result<Outcome, Error> {
    let g = GroupModel::spin(2 * ell + 1)?;
    let t = torsion_bound_search(&g, TheorySpec::new(1)?, default_max_factors(&g));
    let has_witness = witness.is_none_or(|w| t.witnesses.contains(&mono(w)));
    Ok(Outcome {
        pass: t.bound == Some(expected) && g.torsion_index() == Some(expected as u32) && has_witness,
        certified: t.bound.is_some(),
        witness: json!({ "bound": t.bound, "witnesses": t.witnesses, "expected": expected }),
    })
}

fn ti3(_: &Context) -> Result<Outcome, Error> {
    torsion_fact(3, 2, None)
}
fn ti4(_: &Context) -> Result<Outcome, Error> {
    torsion_fact(4, 2, None)
}
fn ti5(_: &Context) -> Result<Outcome, Error> {
    torsion_fact(5, 2, Some("e8"))
}
fn ti6(_: &Context) -> Result<Outcome, Error> {
    torsion_fact(6, 4, Some("e8c6"))
}
fn ti7(_: &Context) -> Result<Outcome, Error> {
    torsion_fact(7, 8, None)
}
fn ti8(_: &Context) -> Result<Outcome, Error> {
    torsion_fact(8, 16, Some("c3c5c6c7"))
}
fn ti9(_: &Context) -> Result<Outcome, Error> {
    torsion_fact(9, 16, None)
}

/// Square-free monomials in the given Chern indices, of total degree `d`.
pub fn square_free_of_degree(indices: &[u32], d: u32) -> Vec<ChernMonomial> {
    let symbols: Vec<ChernSymbol> = indices.iter().map(|&i| ChernSymbol::c(i)).collect();
    enumerate_monomials(&symbols, d, indices.len())
        .into_iter()
        .filter(|m| m.degree() == d && m.is_square_free())
        .collect()
}

/// The given classes form a basis of `gr^d / 2`, robustly.
pub fn mod2_basis(e: &ImageModule, d: u32, classes: &[ChernMonomial]) -> Result<(bool, bool), Error> {
    let (independent, robust) = e.independent_mod2(d, classes)?;
    Ok((independent && classes.len() == e.gr_mod2_dimension(d), robust))
}

/// Compare `gr^d/2` with the square-free monomials in `c_2..c_{top_index}`
/// for every even `d < below`. Returns (all match, all robust, per-degree log).
pub fn stable_range_check(e: &ImageModule, top_index: u32, below: u32) -> Result<(bool, bool, Vec<Value>), Error> {
    let indices: Vec<u32> = (2..=top_index).collect();
    let mut pass = true;
    let mut robust = true;
    let mut log = Vec::new();
    for d in (0..below).step_by(2) {
        let expected = square_free_of_degree(&indices, d);
        let (ok, r) = mod2_basis(e, d, &expected)?;
        pass &= ok;
        robust &= r;
        log.push(json!({
            "group": e.model().name(),
            "degree": d,
            "basis": expected,
            "dimension": e.gr_mod2_dimension(d),
            "ok": ok,
        }));
    }
    Ok((pass, robust, log))
}

/// For each limit index k with 2^k ≤ ℓ, degrees below 2^{k+1} carry the
/// exterior monomials on c_2..c_{2^k - 1}.
fn t11_1(ctx: &Context) -> Result<Outcome, Error> {
    let mut pass = true;
    let mut certified = true;
    let mut checked = Vec::new();
    for ell in [7u32, 8, 9] {
        let e = ctx.spin(2 * ell + 1, 1)?;
        let mut k = 1;
        while (1 << k) <= ell {
            let (ok, robust, log) = stable_range_check(&e, (1 << k) - 1, 1 << (k + 1))?;
            pass &= ok;
            certified &= robust;
            checked.push(json!({ "ell": ell, "k": k, "degrees": log }));
            k += 1;
        }
    }
    Ok(Outcome { pass, certified, witness: json!(checked) })
}

fn l11_2(ctx: &Context) -> Result<Outcome, Error> {
    let parts: Vec<(String, Outcome)> = (5u32..=9)
        .map(|ell| {
            let e = ctx.spin(2 * ell + 1, 1)?;
            let x = ChernSymbol::e(1 << (e.model().t() + 1)).to_string();
            Ok((format!("ell{ell}"), class_outcome(&e, &x, false)?))
        })
        .collect::<Result<_, Error>>()?;
    Ok(conjunction(parts.iter().map(|(k, o)| (k.as_str(), o.clone())).collect()))
}


pub fn registry() -> Vec<Fact> {
    vec![
        Fact {
            id: "T7.1",
            tags: &["spin11", "basis"],
            citation: "gr_γ(R)/2 ≅ Z/2{1, c_2, c_3, c_4, c_5, c_2c_4, e_8}; K*/2{c_2, c_4, c_2c_4} ⊕ K*{1, c_3, c_5, e_8}",
            run: t7_1,
        },
        Fact {
            id: "T1.3",
            tags: &["summary", "basis"],
            citation: "gr_γ(R) ≅ A ⊗ (Z_(2){1, c_6} ⊕ Z/2{c_4}) ⊕ Z/2{c_6c_4}, A = Z_(2){1, c_3, c_5, e_8} ⊕ Z/2{c_2}",
            run: t1_3,
        },
        Fact {
            id: "C8.5",
            tags: &["spin11", "profile"],
            citation: "BP*{1} ⊕ (2, v_1){y_6, y_10} ⊕ (2, v_1²){y_6y_10}",
            run: c8_5,
        },
        Fact {
            id: "T8.2",
            tags: &["spin11", "norm"],
            citation: "N(y_6) = c_3, N(y_10) = c_5, N(y_6y_10) = e_8; gr_geo(R)/N ≅ Λ(c_2, c_4)",
            run: t8_2,
        },
        Fact { id: "L8.1", tags: &["spin11", "saturation"], citation: "x ∈ I_∞³ implies x = 0 in gr_γ/2", run: l8_1 },
        Fact {
            id: "L9.1",
            tags: &["spin13", "saturation"],
            citation: "x ∈ I_∞⁴ k*(R) implies x ∈ I_∞·A(c)",
            run: l9_1,
        },
        Fact { id: "L9.2", tags: &["spin13", "vanishing"], citation: "c_2c_3 = 0 ∈ gr_γ(R)/2", run: l9_2 },
        Fact {
            id: "T9.5",
            tags: &["spin13", "basis"],
            citation: "gr_γ(R) ≅ P(b)/(c_2c_5, c_2c_4c_5) ⊕ Z/2{c_4c_3, e_8c_4, c_2c_6, c_4c_6} ⊕ Z_(2){1, c_3, c_6, e_8, c_3c_6, c_5c_6, e_8c_6}",
            run: t9_5,
        },
        Fact {
            id: "L9.7",
            tags: &["spin13", "norm"],
            citation: "gr_geo(R)/N ≅ gr_geo(R)/(2, c_3c_6, c_5c_6, e_8c_6)",
            run: l9_7,
        },
        Fact {
            id: "L9.8",
            tags: &["spin13", "profile"],
            citation: "res(k*(R')) ⊕ (2){y_12} ⊕ (4, 2v_1, v_1²){y_6y_12, y_10y_12} ⊕ (4, v_1²){y_top}",
            run: l9_8,
        },
        Fact { id: "L10.1", tags: &["spin15", "vanishing"], citation: "c_2c_3 ≠ 0 in gr_γ(R)/2", run: l10_1 },
        Fact {
            id: "L10.2",
            tags: &["spin17", "counterexample"],
            citation: "c_2c_3c_6c_7 = 0 in gr_γ(R)/2",
            run: l10_2,
        },
        Fact {
            id: "L10.3",
            tags: &["spin17", "counterexample"],
            citation: "c_2c_3c_6c_7 ≠ 0 in gr(2)*(R)/2",
            run: l10_3,
        },
        Fact { id: "T10.4", tags: &["spin17", "counterexample"], citation: "I(1) ≠ 0", run: t10_4 },
        Fact {
            id: "L10.5",
            tags: &["spin19", "vanishing"],
            citation: "x = c_2c_3c_6e_16: x ≠ 0 ∈ CH*(R)/2 but x = 0 ∈ gr_γ(R)/2",
            run: l10_5,
        },
        Fact {
            id: "C10.6",
            tags: &["spin17", "profile"],
            citation: "(2⁴, 2³v_1, 2³v_2){y_top} ⊂ Im(res_Ω)",
            run: c10_6,
        },
        Fact { id: "TI.3", tags: &["torsion"], citation: "t(Spin(7)) = 2", run: ti3 },
        Fact { id: "TI.4", tags: &["torsion"], citation: "t(Spin(9)) = 2", run: ti4 },
        Fact { id: "TI.5", tags: &["torsion"], citation: "y_top = y_6y_10, t(G) = 2", run: ti5 },
        Fact { id: "TI.6", tags: &["torsion"], citation: "t(G) = 2² = 4, e_8c_6 = 4y_top", run: ti6 },
        Fact { id: "TI.7", tags: &["torsion"], citation: "t(Spin(15)) = 2³", run: ti7 },
        Fact { id: "TI.8", tags: &["torsion"], citation: "c_3c_5c_6c_7 ↦ 2⁴y_top, t(G) = 2⁴", run: ti8 },
        Fact { id: "TI.9", tags: &["torsion"], citation: "t(Spin(19)) = 2⁴", run: ti9 },
        Fact {
            id: "T11.1",
            tags: &["stability"],
            citation: "lim CH*(R(G(N)))/2 ≅ Λ(c_2, c_3, ..., c_n, ...)",
            run: t11_1,
        },
        Fact { id: "L11.2", tags: &["stability"], citation: "e_{2^{t+1}} ≠ 0 in gr_γ(R)/2", run: l11_2 },
    ]
}

/// Natural ordering of ids: letters, then numeric components.
fn id_key(id: &str) -> (String, Vec<u32>) {
    let letters: String = id.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let nums = id[letters.len()..].split('.').filter_map(|p| p.parse().ok()).collect();
    (letters, nums)
}

fn run_fact(fact: &Fact, ctx: &Context) -> FactReport {
    let (pass, certified, witness) = match (fact.run)(ctx) {
        Ok(o) => (o.pass, o.certified, o.witness),
        Err(e) => (false, false, json!({ "error": e.to_string() })),
    };
    FactReport { id: fact.id.to_string(), pass, certified, witness, citation: fact.citation.to_string() }
}

pub fn verify_fact(id: &str) -> Result<FactReport, Error> {
    let facts = registry();
    let fact = facts.iter().find(|f| f.id.eq_ignore_ascii_case(id)).ok_or_else(|| Error::UnknownFact(id.into()))?;
    Ok(run_fact(fact, &Context::new()))
}

/// Run every fact whose id or tag equals `filter` (all facts when `None`).
pub fn run_suite(filter: Option<&str>) -> SuiteReport {
    run_suite_with(filter, &Context::new())
}

pub fn run_suite_with(filter: Option<&str>, ctx: &Context) -> SuiteReport {
    let mut facts: Vec<Fact> = registry().into_iter().filter(|f| filter.is_none_or(|s| f.matches(s))).collect();
    facts.sort_by_key(|f| id_key(f.id));
    let reports: Vec<FactReport> = facts.par_iter().map(|f| run_fact(f, ctx)).collect();
    let passed = reports.iter().filter(|r| r.ok()).count();
    let failed = reports.iter().filter(|r| !r.pass).count();
    let uncertified = reports.iter().filter(|r| r.pass && !r.certified).count();
    SuiteReport { facts: reports, passed, failed, uncertified }
}
