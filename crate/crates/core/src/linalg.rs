//! Row echelon (Hermite) forms and Smith normal form over Z_(2).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scalar::{Dyadic, Val};

pub type Vector = Vec<Dyadic>;

fn leading(v: &[Dyadic]) -> Option<usize> {
    v.iter().position(|x| !x.is_zero())
}

fn axpy(v: &mut [Dyadic], f: &Dyadic, b: &[Dyadic]) {
    for (x, y) in v.iter_mut().zip(b) {
        if !y.is_zero() {
            *x = &*x - &(f * y);
        }
    }
}

/// A Z_(2)-submodule of Z_(2)^dim, kept as rows with distinct pivots; each
/// pivot entry is a power of two and the pivot is the first nonzero entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Echelon {
    dim: usize,
    rows: BTreeMap<usize, Vector>,
}

impl Echelon {
    pub fn new(dim: usize) -> Echelon {
        Echelon { dim, rows: BTreeMap::new() }
    }

    pub fn from_rows(dim: usize, rows: impl IntoIterator<Item = Vector>) -> Echelon {
        let mut e = Echelon::new(dim);
        for r in rows {
            e.insert(r);
        }
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&usize, &Vector)> {
        self.rows.iter()
    }

    pub fn basis(&self) -> Vec<Vector> {
        self.rows.values().cloned().collect()
    }

    fn normalize(v: &mut [Dyadic], i: usize) {
        let u = v[i].unit_part();
        if u != Dyadic::one() {
            for x in v.iter_mut() {
                *x = x.checked_div(&u).expect("dividing by an odd unit");
            }
        }
    }

    /// Add a vector to the span.
    pub fn insert(&mut self, v: Vector) {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        let mut v = v;
        while let Some(i) = leading(&v) {
            Self::normalize(&mut v, i);
            match self.rows.remove(&i) {
                None => {
                    self.rows.insert(i, v);
                    return;
                }
                Some(b) => {
                    let (keep, mut other) = if b[i].val2() <= v[i].val2() { (b, v) } else { (v, b) };
                    let f = other[i].checked_div(&keep[i]).expect("pivot valuation ordered");
                    axpy(&mut other, &f, &keep);
                    self.rows.insert(i, keep);
                    v = other;
                }
            }
        }
    }

    /// Reduce `v` against the rows. Returns the remainder and the coordinates
    /// used, stopping at the first coordinate that is not 2-integral.
    fn reduce(&self, v: &[Dyadic]) -> (Vector, BTreeMap<usize, Dyadic>) {
        let mut v = v.to_vec();
        let mut coords = BTreeMap::new();
        while let Some(i) = leading(&v) {
            let Some(b) = self.rows.get(&i) else { break };
            let Some(f) = v[i].checked_div(&b[i]) else { break };
            axpy(&mut v, &f, b);
            coords.insert(i, f);
        }
        (v, coords)
    }

    pub fn contains(&self, v: &[Dyadic]) -> bool {
        let member = leading(&self.reduce(v).0).is_none();
        if query_log::active() {
            query_log::record(self, v, member);
        }
        member
    }

    /// Coordinates of `v` with respect to the rows (ordered by pivot), if `v` lies in the span.
    pub fn coordinates(&self, v: &[Dyadic]) -> Option<Vec<Dyadic>> {
        let (rest, coords) = self.reduce(v);
        if leading(&rest).is_some() {
            return None;
        }
        Some(self.rows.keys().map(|k| coords.get(k).cloned().unwrap_or_else(Dyadic::zero)).collect())
    }

    /// Least k with 2^k·v in the span; `None` when no multiple of v lies in it.
    pub fn order_exponent(&self, v: &[Dyadic]) -> Option<u32> {
        let mut v = v.to_vec();
        let mut k = 0u32;
        while let Some(i) = leading(&v) {
            let b = self.rows.get(&i)?;
            let (Val::Fin(a), Val::Fin(c)) = (v[i].val2(), b[i].val2()) else { unreachable!() };
            if a < c {
                let s = c - a;
                v = v.iter().map(|x| x.shl(s)).collect();
                k += s;
            }
            let f = v[i].checked_div(&b[i]).expect("scaled to divisibility");
            axpy(&mut v, &f, b);
        }
        Some(k)
    }

    /// Canonical Hermite form: entries above each pivot 2^k reduced into [0, 2^k).
    pub fn hermite(&self) -> Echelon {
        let keys: Vec<usize> = self.rows.keys().copied().collect();
        let mut rows = self.rows.clone();
        for (a, &i) in keys.iter().enumerate() {
            for &j in &keys[a + 1..] {
                let b = rows[&j].clone();
                let Val::Fin(k) = b[j].val2() else { unreachable!() };
                let row = rows.get_mut(&i).expect("present");
                let e = row[j].clone();
                let r = Dyadic::from(e.residue(k));
                if r != e {
                    let q = (&e - &r).checked_div(&b[j]).expect("difference divisible by the pivot");
                    axpy(row, &q, &b);
                }
            }
        }
        Echelon { dim: self.dim, rows }
    }

    pub fn includes(&self, other: &Echelon) -> bool {
        other.rows.values().all(|r| self.contains(r))
    }

    pub fn same_span(&self, other: &Echelon) -> bool {
        self.dim == other.dim && self.includes(other) && other.includes(self)
    }
}

/// Opt-in record of every membership test, for cross-checking against an
/// independent solver.
pub mod query_log {
    use std::collections::{HashMap, HashSet};
    use std::sync::atomic::{AtomicBool, Ordering};
    use std::sync::Mutex;

    use super::{Echelon, Vector};
    use crate::scalar::Dyadic;

    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct Query {
        pub span: usize,
        pub vector: Vector,
        pub member: bool,
    }

    /// Distinct spanning sets and the distinct queries made against them.
    #[derive(Debug, Default)]
    pub struct Recorded {
        pub spans: Vec<Vec<Vector>>,
        pub queries: Vec<Query>,
    }

    #[derive(Default)]
    struct State {
        recorded: Recorded,
        span_ids: HashMap<Vec<Vector>, usize>,
        seen: HashSet<(usize, Vector)>,
    }

    static ACTIVE: AtomicBool = AtomicBool::new(false);
    static STATE: Mutex<Option<State>> = Mutex::new(None);

    pub fn active() -> bool {
        ACTIVE.load(Ordering::Relaxed)
    }

    pub fn start() {
        *STATE.lock().expect("query log") = Some(State::default());
        ACTIVE.store(true, Ordering::SeqCst);
    }

    pub fn stop() -> Recorded {
        ACTIVE.store(false, Ordering::SeqCst);
        STATE.lock().expect("query log").take().map(|s| s.recorded).unwrap_or_default()
    }

    pub(super) fn record(e: &Echelon, v: &[Dyadic], member: bool) {
        let rows = e.basis();
        let mut guard = STATE.lock().expect("query log");
        let Some(state) = guard.as_mut() else { return };
        let next = state.span_ids.len();
        let span = *state.span_ids.entry(rows.clone()).or_insert_with(|| {
            state.recorded.spans.push(rows);
            next
        });
        if state.seen.insert((span, v.to_vec())) {
            state.recorded.queries.push(Query { span, vector: v.to_vec(), member });
        }
    }
}

/// Invariant factors of a matrix over Z_(2), given by the 2-valuations of the
/// nonzero diagonal entries of its Smith form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub rows: usize,
    pub cols: usize,
    pub diagonal: Vec<u32>,
}

/// Smith form by full pivoting: minimal valuation, then smallest absolute numerator,
/// then first position.
pub fn smith(matrix: &[Vector], cols: usize) -> SmithForm {
    let mut a: Vec<Vector> = matrix.to_vec();
    let rows = a.len();
    let mut diagonal = Vec::new();
    let mut r0 = 0;
    while r0 < rows && r0 < cols {
        let mut best: Option<(u32, num_bigint::BigInt, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(r0) {
            for (j, x) in row.iter().enumerate().skip(r0) {
                if let Val::Fin(k) = x.val2() {
                    let key = (k, x.numer().magnitude().clone().into(), i, j);
                    if best.as_ref().is_none_or(|b| (key.0, &key.1) < (b.0, &b.1)) {
                        best = Some(key);
                    }
                }
            }
        }
        let Some((k, _, pi, pj)) = best else { break };
        a.swap(r0, pi);
        for row in a.iter_mut() {
            row.swap(r0, pj);
        }
        let p = a[r0][r0].clone();
        for i in r0 + 1..rows {
            if !a[i][r0].is_zero() {
                let f = a[i][r0].checked_div(&p).expect("minimal valuation pivot");
                let prow = a[r0].clone();
                axpy(&mut a[i], &f, &prow);
            }
        }
        for j in r0 + 1..cols {
            if !a[r0][j].is_zero() {
                let f = a[r0][j].checked_div(&p).expect("minimal valuation pivot");
                for row in a.iter_mut().skip(r0) {
                    let piv = row[r0].clone();
                    if !piv.is_zero() {
                        row[j] = &row[j] - &(&f * &piv);
                    }
                }
            }
        }
        diagonal.push(k);
        r0 += 1;
    }
    SmithForm { rows, cols, diagonal }
}
