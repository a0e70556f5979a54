mod common;

use std::collections::BTreeMap;

use gammaspin::{
    AmbientElement, ChernMonomial, Dyadic, Family, GroupModel, ImageModule, Order, TheorySpec, Val,
};
use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::sample::Index;

fn dyadic() -> impl Strategy<Value = Dyadic> {
    (-10_000i64..10_000, 0i64..200).prop_map(|(n, k)| Dyadic::new(BigInt::from(n), BigInt::from(2 * k + 1)).unwrap())
}

fn nonzero_dyadic() -> impl Strategy<Value = Dyadic> {
    dyadic().prop_filter("nonzero", |x| !x.is_zero())
}

fn spin(ell: u32) -> GroupModel {
    GroupModel::spin(2 * ell + 1).unwrap()
}

/// Random scalar multiples of Chern and Euler images of one model.
fn images() -> impl Strategy<Value = (GroupModel, Vec<AmbientElement>)> {
    (3u32..=9, 1u32..=3, proptest::collection::vec((any::<Index>(), dyadic()), 3)).prop_map(|(ell, n, picks)| {
        let g = spin(ell);
        let th = TheorySpec::new(n).unwrap();
        let pool: Vec<AmbientElement> = g.symbols().into_iter().map(|s| g.symbol_image(s, th).unwrap()).collect();
        let xs = picks.iter().map(|(i, c)| i.get(&pool).scale(c)).collect();
        (g, xs)
    })
}

/// Guaranteed I-adic valuation of the true value an element stands for.
fn floor(x: &AmbientElement) -> Val {
    let v = if x.is_empty() { Val::Inf } else { x.inf_valuation() };
    v.min(x.precision())
}

proptest! {
    #[test]
    fn valuation_is_additive_on_products(x in nonzero_dyadic(), y in nonzero_dyadic()) {
        prop_assert_eq!((&x * &y).val2(), x.val2() + y.val2());
    }

    #[test]
    fn valuation_of_sums(x in nonzero_dyadic(), y in nonzero_dyadic()) {
        let s = (&x + &y).val2();
        prop_assert!(s >= x.val2().min(y.val2()));
        if x.val2() != y.val2() {
            prop_assert_eq!(s, x.val2().min(y.val2()));
        }
    }

    #[test]
    fn canonical_form_round_trips(n in -10_000i64..10_000, k in 0i64..200, g in 1i64..50) {
        let den = 2 * k + 1;
        let x = Dyadic::new(BigInt::from(n), BigInt::from(den)).unwrap();
        let y = Dyadic::new(BigInt::from(n * (2 * g + 1)), BigInt::from(den * (2 * g + 1))).unwrap();
        prop_assert_eq!(&x, &y);
        let again: Dyadic = x.to_string().parse().unwrap();
        prop_assert_eq!(&again, &x);
        let json: Dyadic = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        prop_assert_eq!(json, x);
    }

    #[test]
    fn multiplication_commutes((g, xs) in images()) {
        let ab = xs[0].multiply(&xs[1], g.gens()).unwrap();
        let ba = xs[1].multiply(&xs[0], g.gens()).unwrap();
        prop_assert_eq!(ab.terms(), ba.terms());
        prop_assert_eq!(ab.precision(), ba.precision());
    }

    #[test]
    fn multiplication_associates((g, xs) in images()) {
        let t = g.gens();
        let xy = xs[0].multiply(&xs[1], t).unwrap();
        let yz = xs[1].multiply(&xs[2], t).unwrap();
        let left = xy.multiply(&xs[2], t).unwrap();
        let right = xs[0].multiply(&yz, t).unwrap();
        let coarse = left.precision().min(right.precision());
        let (l, r) = (left.clone().with_precision_cap(coarse), right.clone().with_precision_cap(coarse));
        prop_assert_eq!(l.terms(), r.terms());
        // With additive floors the horizon rule has nothing grouping-dependent left.
        let plain = [(&xs[0], &xs[1], &xy), (&xs[1], &xs[2], &yz), (&xy, &xs[2], &left), (&xs[0], &yz, &right)]
            .iter()
            .all(|(a, b, ab)| floor(ab) == floor(a) + floor(b));
        if plain {
            prop_assert_eq!(left.precision(), right.precision());
        }
    }

    #[test]
    fn degrees_add((g, xs) in images()) {
        let p = xs[0].multiply(&xs[1], g.gens()).unwrap();
        if let (Some(a), Some(b), Some(c)) = (xs[0].degree(g.gens()), xs[1].degree(g.gens()), p.degree(g.gens())) {
            prop_assert_eq!(c, a + b);
        }
    }

    #[test]
    fn unit_is_neutral((g, xs) in images()) {
        let one = AmbientElement::one(xs[0].theory());
        let p = xs[0].multiply(&one, g.gens()).unwrap();
        prop_assert_eq!(p.terms(), xs[0].terms());
        prop_assert_eq!(p.precision(), xs[0].precision());
    }

    #[test]
    fn products_gain_precision(ell in 3u32..=9, n in 1u32..=3, picks in proptest::collection::vec(any::<Index>(), 1..=6)) {
        let g = spin(ell);
        let th = TheorySpec::new(n).unwrap();
        let symbols = g.symbols();
        let mono = ChernMonomial::new(picks.iter().map(|i| *i.get(&symbols)).collect());
        let x = g.monomial_image(&mono, th).unwrap();
        prop_assert!(x.precision() >= Val::Fin(picks.len() as u32 + 1));
    }

    #[test]
    fn normal_form_is_idempotent((g, xs) in images()) {
        let x = &xs[0];
        let raw: Vec<(u32, Vec<u32>, Dyadic)> = x
            .terms()
            .iter()
            .map(|((a, m), c)| {
                let exps = (0..g.gens().len()).map(|i| (m.0 >> i) & 1).collect();
                (*a, exps, c.clone())
            })
            .collect();
        let y = AmbientElement::normal_form(x.theory(), g.gens(), &raw, x.precision());
        prop_assert_eq!(y.terms(), x.terms());
        prop_assert_eq!(y.precision(), x.precision());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// Reordering the generators of every lattice leaves the gr table unchanged.
    #[test]
    fn gr_is_order_independent(ell in 3u32..=7, seed in any::<u64>()) {
        let g = spin(ell);
        let th = TheorySpec::new(1).unwrap();
        let base = ImageModule::new(&g, th);
        let mut state = seed | 1;
        let shuffled: BTreeMap<u32, Vec<_>> = base
            .all_lattice_rows()
            .into_iter()
            .map(|(d, mut rows)| {
                for i in (1..rows.len()).rev() {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    rows.swap(i, (state % (i as u64 + 1)) as usize);
                }
                (d, rows)
            })
            .collect();
        let other = ImageModule::with_lattices(&g, th, base.max_factors(), shuffled);
        prop_assert_eq!(base.gr_table(), other.gr_table());
    }
}

#[test]
fn images_are_divisible_and_homogeneous() {
    for ell in 3..=9 {
        let g = spin(ell);
        for n in 1..=3 {
            let th = TheorySpec::new(n).unwrap();
            for &i in g.chern_indices() {
                let x = g.chern_image(i, th).unwrap();
                assert!(x.inf_valuation() >= Val::Fin(1), "c_{i} in {}", g.name());
                assert!(x.is_empty() || x.degree(g.gens()) == Some(2 * i as i64));
            }
            let e = g.euler_image(th).unwrap();
            assert!(e.inf_valuation() >= Val::Fin(1));
            assert!(e.is_empty() || e.degree(g.gens()) == Some(g.euler_degree().unwrap() as i64));
        }
    }
}

#[test]
fn so_images_in_low_filtration() {
    for ell in 1..=6u32 {
        let g = GroupModel::build(Family::So, 2 * ell + 1).unwrap();
        let th = TheorySpec::new(1).unwrap();
        for i in 1..=ell {
            let x = g.chern_image(i, th).unwrap();
            let low: Vec<_> = x
                .terms()
                .iter()
                .filter(|((a, _), c)| c.val2().plus(*a) < Val::Fin(2))
                .map(|(k, c)| (g.gens().render(k.1), k.0, c.clone()))
                .collect();
            let mut want = vec![(format!("y{}", 2 * i), 0, common::int(2))];
            if i < ell {
                want.push((format!("y{}", 2 * i + 2), 1, common::unit()));
            }
            let mut low = low;
            low.sort();
            want.sort();
            assert_eq!(low, want, "c_{i} in SO({})", 2 * ell + 1);
        }
    }
}

#[test]
fn free_ranks_are_conserved() {
    for ell in 3..=9 {
        let g = spin(ell);
        let e = ImageModule::new(&g, TheorySpec::new(1).unwrap());
        let free: usize = e.gr_table().iter().map(|c| c.free_rank()).sum();
        assert_eq!(free, 1 << g.gens().len(), "{}", g.name());
    }
}

#[test]
fn shifted_lattice_is_contained() {
    for ell in 3..=9 {
        let g = spin(ell);
        for n in 1..=2 {
            let e = ImageModule::new(&g, TheorySpec::new(n).unwrap());
            for d in e.degrees().collect::<Vec<_>>() {
                assert!(e.lattice(d).unwrap().includes(&e.relation_lattice(d)), "{} n={n} d={d}", g.name());
            }
        }
    }
}

#[test]
fn degree_zero_is_free_on_one() {
    for ell in 3..=9 {
        let g = spin(ell);
        for n in 1..=3 {
            let c = ImageModule::new(&g, TheorySpec::new(n).unwrap()).gr_component(0);
            assert_eq!(c.invariants, vec![Order::Free]);
            assert_eq!(c.factors.len(), 1);
            assert_eq!(c.factors[0].representative, ChernMonomial::one());
            assert!(c.certified);
        }
    }
}

#[test]
fn stable_in_max_factors() {
    for ell in 3..=9 {
        let g = spin(ell);
        for n in 1..=2 {
            let th = TheorySpec::new(n).unwrap();
            let a = ImageModule::new(&g, th);
            let b = ImageModule::with_max_factors(&g, th, a.max_factors() + 1);
            let inv = |e: &ImageModule| e.gr_table().into_iter().map(|c| c.invariants).collect::<Vec<_>>();
            assert_eq!(inv(&a), inv(&b), "{} n={n}", g.name());
        }
    }
}

#[test]
fn suite_is_deterministic() {
    let a = serde_json::to_string(&gammaspin::verifier::run_suite(None)).unwrap();
    let b = serde_json::to_string(&gammaspin::verifier::run_suite(None)).unwrap();
    assert_eq!(a, b);
}
