//! Independent checks shared by the integration tests.

#![allow(dead_code)]

use gammaspin::linalg::query_log::Recorded;
use gammaspin::Dyadic;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn rational(x: &Dyadic) -> BigRational {
    BigRational::new(x.numer().clone(), x.denom().clone())
}

/// Membership of each right-hand side in the Z_(2)-span of `rows`, decided by
/// dense Gaussian elimination over Q followed by a check that every solution
/// coordinate has odd denominator. The rows must be linearly independent.
pub fn rational_members(rows: &[Vec<Dyadic>], rhs: &[Vec<Dyadic>]) -> Vec<bool> {
    let k = rows.len();
    let dim = rows.first().map_or_else(|| rhs.first().map_or(0, |v| v.len()), |r| r.len());
    let width = k + rhs.len();
    // Columns 0..k are the generators, the rest are the queries.
    let mut m: Vec<Vec<BigRational>> = (0..dim)
        .map(|i| rows.iter().chain(rhs).map(|c| rational(&c[i])).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..dim).find(|&i| !m[i][c].is_zero()) else {
            panic!("generators are linearly dependent");
        };
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
        pivots.push(r);
        r += 1;
    }
    (0..rhs.len())
        .map(|q| {
            let col = k + q;
            let consistent = (r..dim).all(|i| m[i][col].is_zero());
            consistent && pivots.iter().all(|&i| m[i][col].denom().is_odd())
        })
        .collect()
}

/// Number of recorded queries on which the two solvers disagree.
pub fn oracle_disagreements(log: &Recorded) -> usize {
    let mut by_span: Vec<Vec<usize>> = vec![Vec::new(); log.spans.len()];
    for (i, q) in log.queries.iter().enumerate() {
        by_span[q.span].push(i);
    }
    let mut bad = 0;
    for (s, idx) in by_span.iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let rhs: Vec<Vec<Dyadic>> = idx.iter().map(|&i| log.queries[i].vector.clone()).collect();
        let answers = rational_members(&log.spans[s], &rhs);
        bad += idx.iter().zip(answers).filter(|(&i, a)| log.queries[i].member != *a).count();
    }
    bad
}

pub fn int(x: i64) -> Dyadic {
    Dyadic::from(BigInt::from(x))
}

pub fn unit() -> Dyadic {
    Dyadic::from(BigInt::one())
}
