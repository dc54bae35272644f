//! Multivariate polynomials with exact rational coefficients and the
//! operator calculus acting on them: directional derivatives, backward
//! differences, the segment-average operator and its products.

use std::collections::BTreeMap;
use std::fmt;

use num::integer::Integer;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{factorial, fmt_rat, rat_int, Int, Rat};

/// Exponent multi-index.
pub type Monomial = Vec<u32>;

/// Sparse polynomial in variables `v1..vn`; no zero coefficients stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rat) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Rat::one())
    }

    /// The coordinate function `v_{i+1}`.
    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(e, Rat::one())
    }

    pub fn monomial(exponents: Monomial, c: Rat) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> Rat {
        self.terms.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
    }

    pub fn add_term(&mut self, e: Monomial, c: Rat) {
        debug_assert_eq!(e.len(), self.dim);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }

    /// Exact value at `v`. Works over a common denominator so that only
    /// the final quotient is reduced.
    pub fn eval(&self, v: &[Rat]) -> Result<Rat> {
        self.check_dim(v.len())?;
        let Some(deg) = self.degree() else {
            return Ok(Rat::zero());
        };
        let den = v.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
        let cden = self.terms.values().fold(Int::one(), |acc, c| acc.lcm(c.denom()));
        let nums: Vec<Int> = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
        let den_pows: Vec<Int> = (0..=deg).scan(Int::one(), |p, _| {
            let cur = p.clone();
            *p *= &den;
            Some(cur)
        })
        .collect();
        let mut acc = Int::zero();
        for (e, c) in &self.terms {
            let mut t = c.numer() * (&cden / c.denom());
            let mut total = 0usize;
            for (x, &k) in nums.iter().zip(e) {
                if k > 0 {
                    t *= num::pow(x.clone(), k as usize);
                    total += k as usize;
                }
            }
            acc += t * &den_pows[deg - total];
        }
        Ok(Rat::new(acc, cden * &den_pows[deg]))
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.dim);
        }
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Monomial = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::one(self.dim), |acc, _| acc.mul(self))
    }

    fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * Rat::from_integer(Int::from(e[i])));
            }
        }
        out
    }

    /// Directional derivative along the integer vector `a`.
    pub fn dir_derivative(&self, a: &[Int]) -> Result<Poly> {
        self.check_dim(a.len())?;
        let mut out = Poly::zero(self.dim);
        for (i, ai) in a.iter().enumerate() {
            if !ai.is_zero() {
                out = out.add(&self.partial(i).scale(&rat_int(ai)));
            }
        }
        Ok(out)
    }

    /// p, ∂_a p, ∂_a² p, … up to the last nonzero one, for a rational
    /// direction.
    pub fn derivative_chain(&self, a: &[Rat]) -> Result<Vec<Poly>> {
        self.check_dim(a.len())?;
        let mut out = Vec::new();
        let mut cur = self.clone();
        while !cur.is_zero() {
            let mut next = Poly::zero(self.dim);
            for (i, ai) in a.iter().enumerate() {
                if !ai.is_zero() {
                    next = next.add(&cur.partial(i).scale(ai));
                }
            }
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }

    /// `v ↦ p(v - a)`.
    pub fn shift(&self, a: &[Rat]) -> Result<Poly> {
        self.check_dim(a.len())?;
        if a.iter().all(|x| x.is_zero()) {
            return Ok(self.clone());
        }
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            // Expand ∏ (v_i - a_i)^{e_i} one coordinate at a time.
            let mut partial: Vec<(Monomial, Rat)> = vec![(vec![0; self.dim], c.clone())];
            for i in 0..self.dim {
                let k = e[i];
                if k == 0 {
                    continue;
                }
                let mut next = Vec::new();
                for (m, coeff) in &partial {
                    for j in 0..=k {
                        let binom = binomial(k, j);
                        let pw = num::pow(-a[i].clone(), (k - j) as usize);
                        let x = coeff * pw * binom;
                        if x.is_zero() {
                            continue;
                        }
                        let mut m2 = m.clone();
                        m2[i] += j;
                        next.push((m2, x));
                    }
                }
                partial = next;
            }
            for (m, x) in partial {
                out.add_term(m, x);
            }
        }
        Ok(out)
    }

    /// Backward difference `p(v) - p(v - a)`.
    pub fn nabla(&self, a: &[Int]) -> Result<Poly> {
        let a: Vec<Rat> = a.iter().map(rat_int).collect();
        Ok(self.sub(&self.shift(&a)?))
    }

    /// Segment average `∫₀¹ p(v - t a) dt`, i.e. Σ_j (-1)^j ∂_a^j p / (j+1)!.
    pub fn segment_average(&self, a: &[Int]) -> Result<Poly> {
        self.check_dim(a.len())?;
        let mut out = self.clone();
        let mut d = self.clone();
        let mut j = 0usize;
        loop {
            d = d.dir_derivative(a)?;
            if d.is_zero() {
                break;
            }
            j += 1;
            let c = Rat::new(
                if j.is_multiple_of(2) { Int::one() } else { -Int::one() },
                factorial(j + 1),
            );
            out = out.add(&d.scale(&c));
        }
        Ok(out)
    }

    /// Restriction `t ↦ p(v - t a)` as a one-variable polynomial.
    pub fn restrict_to_line(&self, v: &[Rat], a: &[Rat]) -> Result<Poly1D> {
        self.check_dim(v.len())?;
        self.check_dim(a.len())?;
        let lines: Vec<Poly1D> = (0..self.dim)
            .map(|i| Poly1D::new(vec![v[i].clone(), -a[i].clone()]))
            .collect();
        let mut out = Poly1D::zero();
        for (e, c) in &self.terms {
            let mut t = Poly1D::constant(c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = t.mul(&lines[i]);
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// All monomials of total degree at most `deg`, graded then lex order.
    pub fn monomials_up_to(dim: usize, deg: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        for d in 0..=deg {
            let mut cur = vec![0u32; dim];
            fill_monomials(dim, d as u32, 0, &mut cur, &mut out);
        }
        out
    }

    pub fn parse(s: &str, dim: usize) -> Result<Poly> {
        Parser::new(s, dim).parse()
    }

    /// Terms in printing order: descending total degree, then descending
    /// exponents.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &Rat)> {
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        ts
    }
}

/// The unique polynomial of total degree ≤ `degree` taking `values` at
/// `points`; `None` when the samples do not determine one (too few or
/// unisolvent-deficient points) or are inconsistent with any.
pub fn fit_polynomial(dim: usize, degree: usize, points: &[Vec<Rat>], values: &[Rat]) -> Option<Poly> {
    let monos = Poly::monomials_up_to(dim, degree);
    let k = monos.len();
    let rows: Vec<Vec<Rat>> = points
        .iter()
        .zip(values)
        .map(|(pt, val)| {
            let mut row: Vec<Rat> = monos
                .iter()
                .map(|e| {
                    e.iter()
                        .zip(pt)
                        .fold(Rat::one(), |acc, (&p, x)| acc * num::pow(x.clone(), p as usize))
                })
                .collect();
            row.push(val.clone());
            row
        })
        .collect();
    let r = crate::exact::rref(&rows, k + 1);
    if r.pivots.contains(&k) || r.rank < k {
        return None;
    }
    let mut out = Poly::zero(dim);
    for (i, &p) in r.pivots.iter().enumerate() {
        out.add_term(monos[p].clone(), r.matrix[i][k].clone());
    }
    Some(out)
}

fn fill_monomials(dim: usize, left: u32, i: usize, cur: &mut Monomial, out: &mut Vec<Monomial>) {
    if i + 1 == dim {
        cur[i] = left;
        out.push(cur.clone());
        return;
    }
    if dim == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=left).rev() {
        cur[i] = k;
        fill_monomials(dim, left - k, i + 1, cur, out);
    }
}

fn binomial(n: u32, k: u32) -> Rat {
    let mut r = Int::one();
    for i in 0..k {
        r = r * Int::from(n - i) / Int::from(i + 1);
    }
    Rat::from_integer(r)
}

/// Applies ∏_{a∈X} (1 - e^{-∂_a}) / ∂_a to `p`, one factor at a time.
pub fn todd_apply(xs: &[Vec<Int>], p: &Poly) -> Result<Poly> {
    let mut out = p.clone();
    for a in xs {
        out = out.segment_average(a)?;
    }
    Ok(out)
}

fn fmt_monomial(e: &[u32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| {
            if k == 1 {
                format!("v{}", i + 1)
            } else {
                format!("v{}^{}", i + 1, k)
            }
        })
        .collect();
    parts.join("*")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            match (idx, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            let mono = fmt_monomial(e);
            if mono.is_empty() {
                write!(f, "{}", fmt_rat(&a))?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", fmt_rat(&a))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str, dim: usize) -> Self {
        Parser {
            src: s.as_bytes(),
            pos: 0,
            dim,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Poly> {
        let p = self.expr()?;
        if self.peek().is_some() {
            return Err(self.err("unexpected trailing input"));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == b'+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.scale(&-Rat::one()))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.uint()?;
            let k = u32::try_from(k).map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<Int> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        s.parse::<Int>().map_err(|_| self.err("bad number"))
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let d = self.uint()?;
                    if d.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                    return Ok(Poly::constant(self.dim, Rat::new(n, d)));
                }
                Ok(Poly::constant(self.dim, Rat::from_integer(n)))
            }
            Some(b'v') => {
                self.pos += 1;
                let i = self.uint()?;
                let i: usize = i
                    .try_into()
                    .map_err(|_| self.err("variable index too large"))?;
                if i == 0 || i > self.dim {
                    return Err(self.err(format!("variable v{i} outside v1..v{}", self.dim)));
                }
                Ok(Poly::var(self.dim, i - 1))
            }
            Some(b't') if self.dim == 1 => {
                self.pos += 1;
                Ok(Poly::var(1, 0))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Dense one-variable polynomial, coefficients from degree 0 upward.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly1D {
    coeffs: Vec<Rat>,
}

impl Poly1D {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly1D { coeffs }
    }

    pub fn zero() -> Self {
        Poly1D { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn add(&self, other: &Poly1D) -> Poly1D {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Rat], i: usize| v.get(i).cloned().unwrap_or_else(Rat::zero);
        Poly1D::new((0..n).map(|i| get(&self.coeffs, i) + get(&other.coeffs, i)).collect())
    }

    pub fn scale(&self, c: &Rat) -> Poly1D {
        Poly1D::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Poly1D) -> Poly1D {
        if self.is_zero() || other.is_zero() {
            return Poly1D::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly1D::new(out)
    }

    pub fn derivative(&self) -> Poly1D {
        Poly1D::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rat::from_integer(Int::from(i)))
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Poly1D {
        let mut out = vec![Rat::zero()];
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push(c / Rat::from_integer(Int::from(i + 1)));
        }
        Poly1D::new(out)
    }
}

impl fmt::Display for Poly1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Poly::zero(1);
        for (i, c) in self.coeffs.iter().enumerate() {
            p.add_term(vec![i as u32], c.clone());
        }
        write!(f, "{}", p.to_string().replace("v1", "t"))
    }
}

/// ∫₀^len p(w - s·a) ds from the chain p, ∂_a p, … (see
/// `Poly::derivative_chain`): Σ_k (-1)^k len^{k+1}/(k+1)! · ∂_a^k p(w).
pub fn line_integral(chain: &[Poly], w: &[Rat], len: &Rat) -> Result<Rat> {
    let values: Vec<Rat> = chain.iter().map(|d| d.eval(w)).collect::<Result<_>>()?;
    let k = values.len();
    if k == 0 {
        return Ok(Rat::zero());
    }
    // one common denominator q^K · K! · lcm(value denominators)
    let (p, q) = (len.numer(), len.denom());
    let m = values.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
    let fact = factorial(k);
    let mut total = Int::zero();
    let mut p_pow = p.clone();
    let mut k_fact = Int::one();
    for (i, x) in values.iter().enumerate() {
        k_fact *= Int::from(i as u64 + 1);
        let mut t = &p_pow * num::pow(q.clone(), k - i - 1) * (&fact / &k_fact) * x.numer() * (&m / x.denom());
        if i % 2 == 1 {
            t = -t;
        }
        total += t;
        p_pow *= p;
    }
    Ok(Rat::new(total, num::pow(q.clone(), k) * fact * m))
}

/// Unique interpolant of degree < nodes.len() through the given values.
pub fn lagrange_1d(nodes: &[Rat], values: &[Rat]) -> Result<Poly1D> {
    if nodes.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    for i in 0..nodes.len() {
        if nodes[i + 1..].contains(&nodes[i]) {
            return Err(Error::DuplicateNodes);
        }
    }
    let mut out = Poly1D::zero();
    for (i, xi) in nodes.iter().enumerate() {
        if values[i].is_zero() {
            continue;
        }
        let mut basis = Poly1D::constant(Rat::one());
        let mut denom = Rat::one();
        for (j, xj) in nodes.iter().enumerate() {
            if i != j {
                basis = basis.mul(&Poly1D::new(vec![-xj.clone(), Rat::one()]));
                denom *= xi - xj;
            }
        }
        out = out.add(&basis.scale(&(&values[i] / denom)));
    }
    Ok(out)
}

pub fn integrate_1d(p: &Poly1D, lo: &Rat, hi: &Rat) -> Rat {
    let a = p.antiderivative();
    a.eval(hi) - a.eval(lo)
}
