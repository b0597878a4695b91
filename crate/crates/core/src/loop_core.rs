//! Finite loops as Cayley tables.
//!
//! Elements are the indices `0..n` and index 0 is always the identity. The
//! table is stored row-major together with the left-division table, so
//! products, inverses and associators are a handful of lookups.

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Axis, Error, Result};
use crate::structure::{self, Subloop};

#[derive(Clone)]
pub struct CayleyLoop {
    order: usize,
    table: Vec<u32>,
    // ldiv[a * n + b] = the unique z with a * z = b
    ldiv: Vec<u32>,
    inverse: Vec<u32>,
    name: Option<String>,
    diagnostics: OnceLock<LoopDiagnostics>,
}

impl fmt::Debug for CayleyLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CayleyLoop")
            .field("name", &self.name)
            .field("order", &self.order)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CayleyLoop {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.table == other.table
    }
}

impl Eq for CayleyLoop {}

/// The law a table was caught violating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Latin,
    Identity,
    Commutativity,
    MoufangCommutative,
    Associativity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub law: Law,
    pub triple: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopDiagnostics {
    pub is_latin: bool,
    pub has_identity: bool,
    pub is_commutative: bool,
    pub is_cml: bool,
    pub is_associative: bool,
    /// Least witness of the most basic law that fails, checked in the order
    /// Latin, identity, commutativity, CML identity, associativity.
    pub first_violation: Option<Violation>,
}

/// Diagnoses an arbitrary square table, which need not be a loop.
pub fn diagnose_rows(rows: &[Vec<usize>]) -> LoopDiagnostics {
    let n = rows.len();
    let mut violations: Vec<Violation> = Vec::new();
    let in_range = rows
        .iter()
        .all(|r| r.len() == n && r.iter().all(|&v| v < n));
    if !in_range {
        return LoopDiagnostics {
            is_latin: false,
            has_identity: false,
            is_commutative: false,
            is_cml: false,
            is_associative: false,
            first_violation: None,
        };
    }
    let at = |i: usize, j: usize| rows[i][j];

    let latin = latin_violation(n, &at);
    if let Some((axis, index, other, value)) = latin {
        let triple = match axis {
            Axis::Row => [index, other, value],
            Axis::Column => [other, index, value],
        };
        violations.push(Violation {
            law: Law::Latin,
            triple,
        });
    }

    let identity = (0..n).find(|&e| at(0, e) != e || at(e, 0) != e);
    if let Some(e) = identity {
        violations.push(Violation {
            law: Law::Identity,
            triple: [e, 0, 0],
        });
    }

    let commutative = first_pair(n, |x, y| at(x, y) != at(y, x));
    if let Some((x, y)) = commutative {
        violations.push(Violation {
            law: Law::Commutativity,
            triple: [x, y, 0],
        });
    }

    let cml_law = first_triple(n, |x, y, z| {
        at(at(x, x), at(y, z)) != at(at(x, y), at(x, z))
    });
    if let Some(t) = cml_law {
        violations.push(Violation {
            law: Law::MoufangCommutative,
            triple: t,
        });
    }

    let assoc = first_triple(n, |x, y, z| at(at(x, y), z) != at(x, at(y, z)));
    if let Some(t) = assoc {
        violations.push(Violation {
            law: Law::Associativity,
            triple: t,
        });
    }

    let is_latin = latin.is_none();
    let has_identity = identity.is_none();
    let is_commutative = commutative.is_none();
    LoopDiagnostics {
        is_latin,
        has_identity,
        is_commutative,
        is_cml: is_latin && has_identity && is_commutative && cml_law.is_none(),
        is_associative: assoc.is_none(),
        first_violation: violations.first().copied(),
    }
}

fn first_pair(n: usize, mut bad: impl FnMut(usize, usize) -> bool) -> Option<(usize, usize)> {
    for x in 0..n {
        for y in 0..n {
            if bad(x, y) {
                return Some((x, y));
            }
        }
    }
    None
}

fn first_triple(n: usize, mut bad: impl FnMut(usize, usize, usize) -> bool) -> Option<[usize; 3]> {
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if bad(x, y, z) {
                    return Some([x, y, z]);
                }
            }
        }
    }
    None
}

/// `(axis, line index, position of the repeat, repeated value)`.
fn latin_violation(
    n: usize,
    at: &impl Fn(usize, usize) -> usize,
) -> Option<(Axis, usize, usize, usize)> {
    let mut seen = vec![usize::MAX; n];
    for i in 0..n {
        for j in 0..n {
            let v = at(i, j);
            if seen[v] == i {
                return Some((Axis::Row, i, j, v));
            }
            seen[v] = i;
        }
    }
    seen.fill(usize::MAX);
    for j in 0..n {
        for i in 0..n {
            let v = at(i, j);
            if seen[v] == j {
                return Some((Axis::Column, j, i, v));
            }
            seen[v] = j;
        }
    }
    None
}

impl CayleyLoop {
    /// Validates a table given as rows of element indices.
    pub fn from_rows(rows: Vec<Vec<usize>>, name: Option<String>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::BadDimension {
                expected: 1,
                found: 0,
                context: "loop order".into(),
            });
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::BadDimension {
                    expected: n,
                    found: row.len(),
                    context: format!("length of row {i}"),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(Error::EntryOutOfRange {
                        row: i,
                        column: j,
                        value: v,
                        order: n,
                    });
                }
                table.push(v as u32);
            }
        }
        Self::from_flat(n, table, name)
    }

    pub(crate) fn from_flat(n: usize, table: Vec<u32>, name: Option<String>) -> Result<Self> {
        debug_assert_eq!(table.len(), n * n);
        let at = |i: usize, j: usize| table[i * n + j] as usize;
        if let Some((axis, index, _, value)) = latin_violation(n, &at) {
            return Err(Error::NotLatinSquare { axis, index, value });
        }
        if let Some(e) = (0..n).find(|&e| at(0, e) != e || at(e, 0) != e) {
            return Err(Error::NoIdentity { element: e });
        }
        let mut ldiv = vec![0u32; n * n];
        for a in 0..n {
            for z in 0..n {
                ldiv[a * n + at(a, z)] = z as u32;
            }
        }
        let inverse = (0..n).map(|a| ldiv[a * n]).collect();
        Ok(CayleyLoop {
            order: n,
            table,
            ldiv,
            inverse,
            name,
            diagnostics: OnceLock::new(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("loop{}", self.order))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table
            .chunks(self.order)
            .map(|r| r.iter().map(|&v| v as usize).collect())
            .collect()
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    /// The unique `z` with `a * z = b`.
    #[inline]
    pub fn left_div(&self, a: usize, b: usize) -> usize {
        self.ldiv[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    /// The `k` with `(a*b)*c = (a*(b*c))*k`.
    #[inline]
    pub fn associator(&self, a: usize, b: usize, c: usize) -> usize {
        let left = self.mul(self.mul(a, b), c);
        let right = self.mul(a, self.mul(b, c));
        self.left_div(right, left)
    }

    /// Powers are taken inside the cyclic subloop of `a`.
    pub fn pow(&self, a: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(a) } else { a };
        let e = k.unsigned_abs();
        let m = self.element_order(a) as u64;
        let mut acc = 0;
        for _ in 0..(e % m) {
            acc = self.mul(base, acc);
        }
        acc
    }

    /// Least `m >= 1` with `a^m = 1`.
    pub fn element_order(&self, a: usize) -> usize {
        let mut acc = a;
        let mut m = 1;
        while acc != 0 {
            acc = self.mul(a, acc);
            m += 1;
        }
        m
    }

    /// Least common multiple of all element orders.
    pub fn exponent(&self) -> u64 {
        (0..self.order).fold(1u64, |acc, a| lcm(acc, self.element_order(a) as u64))
    }

    pub fn element(&self, index: usize) -> Result<LoopElement<'_>> {
        if index >= self.order {
            return Err(Error::InvalidElement {
                index,
                order: self.order,
            });
        }
        Ok(LoopElement {
            parent: self,
            index,
        })
    }

    pub fn identity(&self) -> LoopElement<'_> {
        LoopElement {
            parent: self,
            index: 0,
        }
    }

    pub fn diagnose(&self) -> &LoopDiagnostics {
        self.diagnostics.get_or_init(|| diagnose_rows(&self.rows()))
    }

    pub fn is_cml(&self) -> bool {
        self.diagnose().is_cml
    }

    pub(crate) fn require_cml(&self) -> Result<()> {
        if self.is_cml() {
            Ok(())
        } else {
            Err(Error::NotCml)
        }
    }

    /// Serializes to the text loop-file format.
    pub fn to_loop_file(&self) -> String {
        let mut out = format!("# name: {}\n{}\n", self.label(), self.order);
        for row in self.table.chunks(self.order) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub(crate) fn prime_divisors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// An element bound to the loop it came from.
#[derive(Clone, Copy)]
pub struct LoopElement<'a> {
    parent: &'a CayleyLoop,
    index: usize,
}

impl fmt::Debug for LoopElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.index)
    }
}

impl PartialEq for LoopElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.parent, other.parent) && self.index == other.index
    }
}

impl<'a> LoopElement<'a> {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn parent(&self) -> &'a CayleyLoop {
        self.parent
    }

    fn same_loop(&self, other: &LoopElement<'_>) -> Result<()> {
        if std::ptr::eq(self.parent, other.parent) {
            Ok(())
        } else {
            Err(Error::CrossLoop)
        }
    }

    fn wrap(&self, index: usize) -> LoopElement<'a> {
        LoopElement {
            parent: self.parent,
            index,
        }
    }

    pub fn mul(&self, other: &LoopElement<'_>) -> Result<LoopElement<'a>> {
        self.same_loop(other)?;
        Ok(self.wrap(self.parent.mul(self.index, other.index)))
    }

    pub fn inv(&self) -> LoopElement<'a> {
        self.wrap(self.parent.inv(self.index))
    }

    pub fn pow(&self, k: i64) -> LoopElement<'a> {
        self.wrap(self.parent.pow(self.index, k))
    }

    pub fn associator(&self, b: &LoopElement<'_>, c: &LoopElement<'_>) -> Result<LoopElement<'a>> {
        self.same_loop(b)?;
        self.same_loop(c)?;
        Ok(self.wrap(self.parent.associator(self.index, b.index, c.index)))
    }
}

/// Parses the text loop-file format.
pub fn parse_loop(text: &str) -> Result<CayleyLoop> {
    let mut name = None;
    let mut lines = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(label) = comment.trim().strip_prefix("name:") {
                name = Some(label.trim().to_string());
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        lines.push((no + 1, line));
    }
    let Some(&(first_no, first)) = lines.first() else {
        return Err(Error::Parse {
            line: 0,
            message: "missing order line".into(),
        });
    };
    let order_tokens = parse_tokens(first_no, first)?;
    if order_tokens.len() != 1 {
        return Err(Error::Parse {
            line: first_no,
            message: "the first line must hold only the order".into(),
        });
    }
    let n = order_tokens[0];
    let rows_found = lines.len() - 1;
    if rows_found != n {
        return Err(Error::BadDimension {
            expected: n,
            found: rows_found,
            context: "row count".into(),
        });
    }
    let mut rows = Vec::with_capacity(n);
    for &(no, line) in &lines[1..] {
        rows.push(parse_tokens(no, line)?);
    }
    CayleyLoop::from_rows(rows, name)
}

fn parse_tokens(line_no: usize, line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("'{tok}' is not a non-negative integer"),
            })
        })
        .collect()
}

fn check_order(what: &str, requested: u128, max_order: usize) -> Result<()> {
    if requested > max_order as u128 {
        return Err(Error::OrderOverflow {
            guard: "max-order",
            what: what.to_string(),
            requested,
            limit: max_order as u128,
        });
    }
    Ok(())
}

/// Componentwise product; `(i, j)` is encoded as `i * |b| + j`.
pub fn direct_product(a: &CayleyLoop, b: &CayleyLoop, max_order: usize) -> Result<CayleyLoop> {
    let (n1, n2) = (a.order(), b.order());
    check_order("direct product", n1 as u128 * n2 as u128, max_order)?;
    let n = n1 * n2;
    let mut table = Vec::with_capacity(n * n);
    for x in 0..n {
        let (x1, x2) = (x / n2, x % n2);
        for y in 0..n {
            let (y1, y2) = (y / n2, y % n2);
            table.push((a.mul(x1, y1) * n2 + b.mul(x2, y2)) as u32);
        }
    }
    let name = format!("{}x{}", a.label(), b.label());
    CayleyLoop::from_flat(n, table, Some(name))
}

/// Direct sum of cyclic groups, first modulus most significant.
pub fn gen_abelian(moduli: &[usize], max_order: usize) -> Result<CayleyLoop> {
    if let Some(&m) = moduli.iter().find(|&&m| m < 2) {
        return Err(Error::InvalidSpec(format!("modulus {m} is below 2")));
    }
    let n = moduli
        .iter()
        .try_fold(1u128, |acc, &m| acc.checked_mul(m as u128))
        .unwrap_or(u128::MAX);
    check_order("abelian group", n, max_order)?;
    let n = n as usize;
    let digits = |mut x: usize| {
        let mut d = vec![0; moduli.len()];
        for (k, &m) in moduli.iter().enumerate().rev() {
            d[k] = x % m;
            x /= m;
        }
        d
    };
    let mut table = Vec::with_capacity(n * n);
    for x in 0..n {
        let dx = digits(x);
        for y in 0..n {
            let dy = digits(y);
            let z = moduli
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &m)| acc * m + (dx[k] + dy[k]) % m);
            table.push(z as u32);
        }
    }
    let label: Vec<String> = moduli.iter().map(|m| m.to_string()).collect();
    CayleyLoop::from_flat(n, table, Some(format!("abelian:{}", label.join(","))))
}

/// Index of the tuple `(t1, t2, t3, t4)` over Z/3 in the order-81 loop.
pub fn zassenhaus_index(t: [u8; 4]) -> usize {
    t.iter().fold(0, |acc, &d| acc * 3 + d as usize)
}

pub fn zassenhaus_tuple(index: usize) -> [u8; 4] {
    [
        (index / 27 % 3) as u8,
        (index / 9 % 3) as u8,
        (index / 3 % 3) as u8,
        (index % 3) as u8,
    ]
}

/// The smallest nonassociative commutative Moufang loop, of order 81 and
/// exponent 3, on 4-tuples over Z/3.
pub fn gen_zassenhaus81() -> CayleyLoop {
    let mut table = Vec::with_capacity(81 * 81);
    for x in 0..81 {
        let a = zassenhaus_tuple(x).map(i64::from);
        for y in 0..81 {
            let b = zassenhaus_tuple(y).map(i64::from);
            let twist = (a[2] - b[2]) * (a[0] * b[1] - a[1] * b[0]);
            let t = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3] + twist]
                .map(|v| v.rem_euclid(3) as u8);
            table.push(zassenhaus_index(t) as u32);
        }
    }
    CayleyLoop::from_flat(81, table, Some("zassenhaus81".into()))
        .expect("the order-81 construction is a loop")
}

pub fn trivial_loop() -> CayleyLoop {
    CayleyLoop::from_flat(1, vec![0], Some("trivial".into())).expect("singleton loop")
}

/// Builds a loop from a generator spec: `trivial`, `zassenhaus81`,
/// `abelian:a,b,...` or `product:<spec>x<spec>`.
pub fn gen_from_spec(spec: &str, max_order: usize) -> Result<CayleyLoop> {
    let spec = spec.trim();
    if spec == "zassenhaus81" {
        check_order("zassenhaus81", 81, max_order)?;
        return Ok(gen_zassenhaus81());
    }
    if spec == "trivial" {
        return Ok(trivial_loop());
    }
    if let Some(list) = spec.strip_prefix("abelian:") {
        let moduli = list
            .split(',')
            .map(|m| {
                m.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSpec(format!("bad modulus '{m}' in '{spec}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        return gen_abelian(&moduli, max_order);
    }
    if let Some(rest) = spec.strip_prefix("product:") {
        // Try every split point; the first one where both halves parse wins.
        for (pos, _) in rest.match_indices('x') {
            let (left, right) = (&rest[..pos], &rest[pos + 1..]);
            if let (Ok(a), Ok(b)) = (
                gen_from_spec(left, max_order),
                gen_from_spec(right, max_order),
            ) {
                return direct_product(&a, &b, max_order);
            }
        }
        return Err(Error::InvalidSpec(format!(
            "'{spec}' is not of the form product:<spec>x<spec>"
        )));
    }
    Err(Error::InvalidSpec(format!("unknown generator '{spec}'")))
}

/// A quotient loop together with the projection onto it.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub loop_: CayleyLoop,
    /// `projection[x]` is the index of the coset `xH`.
    pub projection: Vec<usize>,
    /// Least element of each coset, by coset index.
    pub representatives: Vec<usize>,
}

impl Quotient {
    /// All elements of the parent loop lying over a set of cosets.
    pub fn preimage(&self, cosets: &Subloop) -> Vec<usize> {
        (0..self.projection.len())
            .filter(|&x| cosets.contains(self.projection[x]))
            .collect()
    }
}

/// `L/H` for a normal subloop `H`, with least-index coset representatives.
pub fn quotient(l: &CayleyLoop, h: &Subloop) -> Result<Quotient> {
    if let Some(w) = structure::normality_witness(l, h, &Subloop::whole(l))? {
        return Err(w.into_error());
    }
    let n = l.order();
    let mut projection = vec![usize::MAX; n];
    let mut representatives = Vec::new();
    for x in 0..n {
        if projection[x] != usize::MAX {
            continue;
        }
        let id = representatives.len();
        representatives.push(x);
        for &e in h.elements() {
            projection[l.mul(x, e)] = id;
        }
    }
    let q = representatives.len();
    if q * h.len() != n {
        return Err(Error::Postcondition(format!(
            "cosets of a subloop of order {} do not partition a loop of order {n}",
            h.len()
        )));
    }
    let mut table = Vec::with_capacity(q * q);
    for &a in &representatives {
        for &b in &representatives {
            table.push(projection[l.mul(a, b)] as u32);
        }
    }
    let name = format!("{}/{}", l.label(), h.len());
    let loop_ = CayleyLoop::from_flat(q, table, Some(name))?;
    Ok(Quotient {
        loop_,
        projection,
        representatives,
    })
}
