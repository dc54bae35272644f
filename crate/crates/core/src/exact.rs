//! Exact scalars and integer-lattice linear algebra.
//!
//! Everything here works on arbitrary-precision integers and reduced
//! rationals; nothing is ever rounded.

use std::fmt;
use std::str::FromStr;

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;
pub type IntVec = Vec<Int>;
pub type RatVec = Vec<Rat>;

pub fn int(n: i64) -> Int {
    Int::from(n)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: &Int) -> Rat {
    Rat::from_integer(n.clone())
}

pub fn int_vec(xs: &[i64]) -> IntVec {
    xs.iter().map(|&x| Int::from(x)).collect()
}

pub fn rat_vec(xs: &[(i64, i64)]) -> RatVec {
    xs.iter().map(|&(n, d)| rat(n, d)).collect()
}

pub fn to_rat_vec(v: &[Int]) -> RatVec {
    v.iter().map(rat_int).collect()
}

/// Parses `"p"`, `"-p"`, `"p/q"` or a decimal such as `"-0.25"` into a
/// reduced rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = |message: &str| Error::Parse {
        position: 0,
        message: format!("{message}: {s:?}"),
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n = Int::from_str(n.trim()).map_err(|_| bad("bad numerator"))?;
            let d = Int::from_str(d.trim()).map_err(|_| bad("bad denominator"))?;
            if d.is_zero() {
                return Err(bad("zero denominator"));
            }
            Ok(Rat::new(n, d))
        }
        None => match s.split_once('.') {
            // exact decimal: "-0.25" is -25/100
            Some((int, frac)) if !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit()) => {
                let digits = format!("{int}{frac}");
                let n = Int::from_str(&digits).map_err(|_| bad("bad decimal"))?;
                Ok(Rat::new(n, num::pow(Int::from(10), frac.len())))
            }
            Some(_) => Err(bad("bad decimal")),
            None => Ok(Rat::from_integer(
                Int::from_str(s).map_err(|_| bad("bad integer"))?,
            )),
        },
    }
}

/// Canonical `p/q` (or `p` when integral) text for a rational.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn fmt_rat_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_rat).collect();
    format!("({})", parts.join(","))
}

pub fn frac(r: &Rat) -> Rat {
    r - r.floor()
}

pub fn dot_int(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_int_rat(a: &[Int], v: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(v) {
        if !x.is_zero() {
            acc += y * x;
        }
    }
    acc
}

pub fn dot_rat(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn gcd_all<'a>(xs: impl IntoIterator<Item = &'a Int>) -> Int {
    xs.into_iter().fold(Int::zero(), |g, x| g.gcd(x))
}

pub fn factorial(k: usize) -> Int {
    (1..=k).fold(Int::one(), |acc, i| acc * Int::from(i))
}

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: &[IntVec], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            for (j, x) in r.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<IntVec> = rows.iter().map(|r| int_vec(r)).collect();
        Self::from_rows(&rows, cols)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[IntVec], rows: usize) -> Self {
        Self::from_rows(cols, rows).transpose()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> IntVec {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> IntVec {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> IntVec {
        (0..self.rows)
            .map(|i| dot_int(&self.data[i * self.cols..(i + 1) * self.cols], v))
            .collect()
    }

    pub fn to_rat_rows(&self) -> Vec<RatVec> {
        (0..self.rows).map(|i| to_rat_vec(&self.row(i))).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += q * row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &Int) {
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j] * q;
            self.data[dst * self.cols + j] += s;
        }
    }

    /// col[dst] += q * col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &Int) {
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src] * q;
            self.data[i * self.cols + dst] += s;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let x = -&self.data[i * self.cols + j];
            self.data[i * self.cols + j] = x;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ",")?;
            }
            let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "[{}]", r.join(","))?;
        }
        write!(f, "]")
    }
}

/// Determinant by Bareiss fraction-free elimination.
pub fn det(m: &IntMat) -> Result<Int> {
    if m.rows != m.cols {
        return Err(Error::NonSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Int::one());
    }
    let mut a = m.clone();
    let mut sign = Int::one();
    let mut prev = Int::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                Some(i) => {
                    a.swap_rows(k, i);
                    sign = -sign;
                }
                None => return Ok(Int::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                a[(i, j)] = v;
            }
        }
        prev = a[(k, k)].clone();
    }
    Ok(sign * &a[(n - 1, n - 1)])
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rref {
    pub matrix: Vec<RatVec>,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Reduced row-echelon form over the rationals; `cols` fixes the width
/// when `rows` is empty.
pub fn rref(rows: &[RatVec], cols: usize) -> Rref {
    let mut m: Vec<RatVec> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= p * &f;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    Rref {
        matrix: m,
        rank: pivots.len(),
        pivots,
    }
}

pub fn rank(rows: &[RatVec], cols: usize) -> usize {
    rref(rows, cols).rank
}

pub fn rank_int(vectors: &[IntVec], dim: usize) -> usize {
    let rows: Vec<RatVec> = vectors.iter().map(|v| to_rat_vec(v)).collect();
    rank(&rows, dim)
}

/// Basis of the right null space `{x : m x = 0}`.
pub fn kernel_basis(rows: &[RatVec], cols: usize) -> Vec<RatVec> {
    let r = rref(rows, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !r.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rat::zero(); cols];
            x[f] = Rat::one();
            for (i, &p) in r.pivots.iter().enumerate() {
                x[p] = -r.matrix[i][f].clone();
            }
            x
        })
        .collect()
}

/// Solves `Σ coeffs[i] * basis[i] = target` for linearly independent
/// `basis`; `None` when `target` is outside their span.
pub fn solve_in_span(basis: &[RatVec], target: &[Rat]) -> Option<RatVec> {
    let dim = target.len();
    let k = basis.len();
    // Columns are the basis vectors, augmented with the target.
    let rows: Vec<RatVec> = (0..dim)
        .map(|i| {
            let mut row: RatVec = basis.iter().map(|b| b[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let r = rref(&rows, k + 1);
    if r.pivots.contains(&k) {
        return None;
    }
    let mut x = vec![Rat::zero(); k];
    for (i, &p) in r.pivots.iter().enumerate() {
        x[p] = r.matrix[i][k].clone();
    }
    Some(x)
}

/// Scales a nonzero rational vector to a primitive integer vector with
/// its first nonzero entry positive.
pub fn primitive_direction(v: &[Rat]) -> IntVec {
    let l = v.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
    let ints: IntVec = v.iter().map(|x| (x * rat_int(&l)).to_integer()).collect();
    normalize_primitive(ints)
}

pub fn normalize_primitive(mut v: IntVec) -> IntVec {
    let g = gcd_all(&v);
    if g.is_zero() {
        return v;
    }
    for x in v.iter_mut() {
        *x = &*x / &g;
    }
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in v.iter_mut() {
            *x = -&*x;
        }
    }
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnfDecomposition {
    pub left: IntMat,
    pub diag: Vec<Int>,
    pub right: IntMat,
}

impl SnfDecomposition {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|d| !d.is_zero()).count()
    }

    /// Checks `left * a * right == diag`, the divisibility chain and
    /// unimodularity of both factors.
    pub fn verify(&self, a: &IntMat) -> bool {
        let prod = self.left.mul(a).mul(&self.right);
        for i in 0..prod.rows() {
            for j in 0..prod.cols() {
                let want = if i == j { self.diag[i].clone() } else { Int::zero() };
                if prod[(i, j)] != want {
                    return false;
                }
            }
        }
        let nz: Vec<&Int> = self.diag.iter().filter(|d| !d.is_zero()).collect();
        if self.diag[..nz.len()].iter().any(|d| d.is_zero()) {
            return false;
        }
        if nz.windows(2).any(|w| !(w[1] % w[0]).is_zero()) {
            return false;
        }
        if self.diag.iter().any(|d| d.is_negative()) {
            return false;
        }
        let unimodular = |m: &IntMat| det(m).map(|d| d.abs().is_one()).unwrap_or(false);
        unimodular(&self.left) && unimodular(&self.right)
    }
}

/// Smith normal form by elementary integer row and column operations.
pub fn smith_normal_form(m: &IntMat) -> SnfDecomposition {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut left = IntMat::identity(rows);
    let mut right = IntMat::identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[(i, j)].is_zero()
                        && best.is_none_or(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            a.swap_rows(t, pi);
            left.swap_rows(t, pi);
            a.swap_cols(t, pj);
            right.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                let q = -a[(i, t)].div_floor(&a[(t, t)]);
                if !q.is_zero() {
                    a.add_row(i, t, &q);
                    left.add_row(i, t, &q);
                }
                clean &= a[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                let q = -a[(t, j)].div_floor(&a[(t, t)]);
                if !q.is_zero() {
                    a.add_col(j, t, &q);
                    right.add_col(j, t, &q);
                }
                clean &= a[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !(&a[(i, j)] % &a[(t, t)]).is_zero()));
            match offender {
                Some(i) => {
                    let one = Int::one();
                    a.add_row(t, i, &one);
                    left.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            left.negate_row(t);
        }
    }
    let diag = (0..rows.min(cols)).map(|i| a[(i, i)].clone()).collect();
    let snf = SnfDecomposition { left, diag, right };
    debug_assert!(snf.verify(m));
    snf
}

/// Basis (as columns) of the saturated lattice `{k in Z^cols : rows * k = 0}`.
pub fn integer_kernel(rows: &[IntVec], cols: usize) -> Vec<IntVec> {
    if rows.is_empty() {
        return IntMat::identity(cols).transpose().to_rows();
    }
    let m = IntMat::from_rows(rows, cols);
    let snf = smith_normal_form(&m);
    let r = snf.rank();
    (r..cols).map(|j| snf.right.col(j)).collect()
}

impl IntMat {
    pub fn to_rows(&self) -> Vec<IntVec> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }
}

/// Primitive integer covector vanishing on a hyperplane spanned by `vectors`.
pub fn primitive_normal(vectors: &[IntVec], dim: usize) -> Result<IntVec> {
    let r = rank_int(vectors, dim);
    if r + 1 != dim {
        return Err(Error::NotAHyperplane {
            span_dim: r,
            ambient: dim,
        });
    }
    let rows: Vec<RatVec> = vectors.iter().map(|v| to_rat_vec(v)).collect();
    let ker = kernel_basis(&rows, dim);
    let eta = primitive_direction(&ker[0]);
    debug_assert!(vectors.iter().all(|v| dot_int(&eta, v).is_zero()));
    debug_assert!(gcd_all(&eta).is_one());
    Ok(eta)
}

/// Integer projection `Z^n -> Z^(n-k)` whose kernel is the real span of a
/// subspace and which maps the lattice onto `Z^(n-k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeQuotient {
    pub ambient: usize,
    pub projection: IntMat,
}

impl LatticeQuotient {
    pub fn target_dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn project(&self, v: &[Int]) -> IntVec {
        self.projection.mul_vec(v)
    }

    pub fn project_rat(&self, v: &[Rat]) -> RatVec {
        (0..self.projection.rows())
            .map(|i| dot_int_rat(&self.projection.row(i), v))
            .collect()
    }

    /// Covector on the quotient, pulled back to a covector on the ambient
    /// space (constant along the subspace).
    pub fn pull_back_covector(&self, c: &[Int]) -> IntVec {
        self.projection.transpose().mul_vec(c)
    }
}

pub fn lattice_quotient(s_basis: &[IntVec], dim: usize) -> Result<LatticeQuotient> {
    let k = s_basis.len();
    if s_basis.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: s_basis.iter().map(|v| v.len()).find(|&l| l != dim).unwrap_or(dim),
        });
    }
    if rank_int(s_basis, dim) != k {
        return Err(Error::DependentBasis);
    }
    if k == 0 {
        return Ok(LatticeQuotient {
            ambient: dim,
            projection: IntMat::identity(dim),
        });
    }
    // Columns of `a` span s; rows k.. of the unimodular left factor
    // annihilate s and form a lattice basis of the dual of the quotient.
    let a = IntMat::from_cols(s_basis, dim);
    let snf = smith_normal_form(&a);
    let rows: Vec<IntVec> = (k..dim).map(|i| snf.left.row(i)).collect();
    Ok(LatticeQuotient {
        ambient: dim,
        projection: IntMat::from_rows(&rows, dim),
    })
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
