//! Engine results against independent, deliberately naive implementations.

mod common;

use gammaspin::linalg::Echelon;
use gammaspin::{Dyadic, GroupModel, ImageModule, Monomial, Order, TheorySpec};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn module(m: u32, n: u32) -> ImageModule {
    ImageModule::new(&GroupModel::spin(m).unwrap(), TheorySpec::new(n).unwrap())
}

/// Every (a, subset) with the right degree, ordered by a then by the subset's
/// generator indices read lexicographically.
fn brute_force_basis(g: &GroupModel, w: u32, d: u32) -> Vec<(u32, Vec<u32>)> {
    let degrees = g.gens().degrees();
    let mut out = Vec::new();
    for mask in 0u32..(1 << degrees.len()) {
        let idx: Vec<u32> = (0..degrees.len() as u32).filter(|i| mask >> i & 1 == 1).collect();
        let deg: u32 = idx.iter().map(|&i| degrees[i as usize]).sum();
        if deg >= d && (deg - d) % w == 0 {
            out.push(((deg - d) / w, idx));
        }
    }
    out.sort();
    out
}

fn indices(m: Monomial) -> Vec<u32> {
    (0..32).filter(|i| m.0 >> i & 1 == 1).collect()
}

#[test]
fn ambient_bases_match_enumeration() {
    for ell in 3..=9 {
        for n in 1..=3 {
            let e = module(2 * ell + 1, n);
            let w = e.theory().shift();
            for d in (0..=e.top_degree()).step_by(2) {
                let mut got: Vec<(u32, Vec<u32>)> = e.ambient_basis(d).iter().map(|(a, m)| (*a, indices(*m))).collect();
                got.sort();
                assert_eq!(got, brute_force_basis(e.model(), w, d), "{} n={n} d={d}", e.model().name());
            }
        }
    }
    let e = module(11, 1);
    let names = |d| e.ambient_basis(d).iter().map(|(a, m)| (*a, e.model().gens().render(*m))).collect::<Vec<_>>();
    assert_eq!(names(6), [(0, "y6".into()), (2, "y10".into()), (5, "y6*y10".into())]);
    assert_eq!(names(0), [(0, "1".into()), (3, "y6".into()), (5, "y10".into()), (8, "y6*y10".into())]);
}

fn to_integers(rows: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
            r.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect()
}

/// 2-adic valuations of the nonzero invariant factors of an integer matrix,
/// by the textbook Smith algorithm with Euclidean steps.
fn integer_smith_valuations(mut a: Vec<Vec<BigInt>>) -> Vec<u32> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[i][j].is_zero())
            .min_by_key(|&(i, j)| a[i][j].abs())
        else {
            break;
        };
        a.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        let mut done = true;
        for i in t + 1..rows {
            let q = a[i][t].div_floor(&a[t][t]);
            for j in t..cols {
                let x = &q * &a[t][j];
                a[i][j] -= x;
            }
            done &= a[i][t].is_zero();
        }
        for j in t + 1..cols {
            let q = a[t][j].div_floor(&a[t][t]);
            for i in t..rows {
                let x = &q * &a[i][t];
                a[i][j] -= x;
            }
            done &= a[t][j].is_zero();
        }
        if !done {
            continue;
        }
        // Fold a row with an entry not divisible by the pivot into the pivot row.
        if let Some(i) = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero())) {
            for c in t..cols {
                let x = a[i][c].clone();
                a[t][c] += x;
            }
            continue;
        }
        out.push(a[t][t].trailing_zeros().unwrap_or(0) as u32);
        t += 1;
    }
    out.sort();
    out
}

/// Coordinates of each row of `sub` in terms of the rows of `basis`, over Q.
fn coordinates(basis: &[Vec<Dyadic>], sub: &[Vec<Dyadic>]) -> Vec<Vec<BigRational>> {
    let q = |x: &Dyadic| BigRational::new(x.numer().clone(), x.denom().clone());
    let k = basis.len();
    let dim = basis.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<BigRational>> =
        (0..dim).map(|i| basis.iter().chain(sub).map(|c| q(&c[i])).collect()).collect();
    let width = k + sub.len();
    let mut r = 0;
    let mut pivot_rows = Vec::new();
    for c in 0..k {
        let p = (r..dim).find(|&i| !m[i][c].is_zero()).expect("independent basis");
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..dim {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..width {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivot_rows.push(r);
        r += 1;
    }
    (0..sub.len()).map(|s| pivot_rows.iter().map(|&i| m[i][k + s].clone()).collect()).collect()
}

#[test]
fn gr_invariants_match_integer_smith_form() {
    for ell in 3..=6 {
        for n in 1..=2 {
            let e = module(2 * ell + 1, n);
            for d in e.degrees().collect::<Vec<_>>() {
                let basis = e.lattice(d).unwrap().basis();
                let rel = e.relation_lattice(d).basis();
                let c = e.gr_component(d);
                let vals = if rel.is_empty() { Vec::new() } else { integer_smith_valuations(to_integers(&coordinates(&basis, &rel))) };
                let mut expected: Vec<Order> = vec![Order::Free; basis.len() - vals.len()];
                expected.extend(vals.iter().filter(|&&k| k > 0).map(|&k| Order::Torsion(k)));
                let mut got = c.invariants.clone();
                got.sort();
                expected.sort();
                assert_eq!(got, expected, "{} n={n} d={d}", e.model().name());
            }
        }
    }
}

#[test]
fn small_lattices_by_hand() {
    let e = module(11, 1);
    let g = e.model();
    let th = e.theory();
    // d = 4: c_2 gives v·y6, v²·c_4 gives v³y10 and v⁴·c_2c_4 gives v⁶y6y10,
    // while 2v·y6, 2v³y10 and 2v⁶y6y10 (from c_3, c_5, e_8) add nothing.
    let gen = |a: u32, m: &str| {
        let x = gammaspin::AmbientElement::new(th, [((a, g.gens().parse_monomial(m).unwrap()), common::unit())], gammaspin::Val::Inf);
        e.vector(&x, 4)
    };
    let want = Echelon::from_rows(e.ambient_basis(4).len(), [gen(1, "y6"), gen(3, "y10"), gen(6, "y6*y10")]);
    assert!(e.lattice(4).unwrap().same_span(&want));
    assert_eq!(e.ambient_basis(4).len(), 3);
    // The saturation threshold of Spin(7) is at most 3.
    let s = module(7, 1).saturation_threshold(0, 100).threshold.unwrap();
    assert!(s <= 3);
}

fn small_matrix() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    (1usize..=5).prop_flat_map(|dim| {
        (
            proptest::collection::vec(proptest::collection::vec(-12i64..=12, dim), 1..=dim),
            proptest::collection::vec(proptest::collection::vec(-24i64..=24, dim), 1..=6),
        )
    })
}

proptest! {
    #[test]
    fn membership_agrees_with_rational_elimination((rows, queries) in small_matrix()) {
        let to = |r: &Vec<i64>| r.iter().map(|&x| common::int(x)).collect::<Vec<Dyadic>>();
        let e = Echelon::from_rows(rows[0].len(), rows.iter().map(to));
        let q: Vec<Vec<Dyadic>> = queries.iter().map(to).collect();
        // Combinations of the generators are members too.
        let mut q = q;
        q.push(e.basis().iter().fold(vec![Dyadic::zero(); rows[0].len()], |acc, r| {
            acc.iter().zip(r).map(|(a, b)| a + &(b * &common::int(3))).collect()
        }));
        let oracle = common::rational_members(&e.basis(), &q);
        for (v, want) in q.iter().zip(oracle) {
            prop_assert_eq!(e.contains(v), want);
        }
    }
}
