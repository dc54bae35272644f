//! Semi-discrete and continuous convolution with B(X), the two sides of
//! the difference formula, and the character-twisted variants.

use std::fmt;

use num::integer::Integer;
use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrangement::{AdmissibleSubspace, Arrangement, Configuration};
use crate::bernoulli::{w_quotient, w_twisted_1d, BernoulliExpr, PiecewiseProduct};
use crate::boxspline::{box_convolve_eval, BoxPlan, FnEval, Scalar};
use crate::cyclo::Cyclo;
use crate::dm::{dm_basis, is_in_dm};
use crate::error::{Error, Result};
use crate::exact::{
    fmt_rat, fmt_rat_vec, frac, parse_rat, rat_int, smith_normal_form, Int, IntMat, IntVec, Rat, RatVec,
};
use crate::poly::{todd_apply, Poly};

/// A rational character g of Λ: g^λ = e^{2iπ⟨G,λ⟩}, with G reduced to
/// [0,1)^n and m the order of g.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharacterG {
    order: u64,
    g: RatVec,
}

impl CharacterG {
    pub fn new(g: RatVec) -> Self {
        let g: RatVec = g.iter().map(frac).collect();
        let order = g
            .iter()
            .fold(Int::one(), |acc, x| acc.lcm(x.denom()))
            .try_into()
            .expect("character order fits in u64");
        CharacterG { order, g }
    }

    pub fn zero(dim: usize) -> Self {
        CharacterG::new(vec![Rat::zero(); dim])
    }

    /// Parses comma-separated rationals such as `1/2,1/3`.
    pub fn parse(s: &str) -> Result<Self> {
        let g = s.split(',').map(|p| parse_rat(p.trim())).collect::<Result<RatVec>>()?;
        Ok(CharacterG::new(g))
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.g
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.g.iter().all(|x| x.is_zero())
    }

    fn exponent(&self, lambda: &[Int]) -> i64 {
        let m = Int::from(self.order);
        let pair: Rat = self.g.iter().zip(lambda).map(|(x, l)| x * rat_int(l)).sum();
        let e = (pair * rat_int(&m)).to_integer().mod_floor(&m);
        e.try_into().expect("reduced below the order")
    }

    /// g^λ in Q(ζ_m).
    pub fn pow(&self, lambda: &[Int]) -> Cyclo {
        Cyclo::zeta_pow(self.order, self.exponent(lambda))
    }

    /// True iff g^a = 1.
    pub fn is_trivial_on(&self, a: &[Int]) -> bool {
        self.exponent(a) == 0
    }
}

impl fmt::Display for CharacterG {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.g.iter().map(fmt_rat).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// X(g) = {a ∈ X : g^a = 1}, as indices.
pub fn x_of_g(c: &Configuration, g: &CharacterG) -> Vec<usize> {
    (0..c.len()).filter(|&i| g.is_trivial_on(c.vector(i))).collect()
}

/// Characters g with X(g) spanning: for every basis σ, the solutions of
/// g^a = 1 (a ∈ σ), i.e. σ^{-T}Z^n / Z^n, enumerated through the Smith form.
pub fn toric_vertices(c: &Configuration) -> Vec<CharacterG> {
    let n = c.dim();
    let mut out: Vec<CharacterG> = Vec::new();
    for b in c.bases() {
        // rows a ∈ σ: ⟨G, a⟩ ∈ Z  ⇔  G ∈ M^{-1} Z^n = R D^{-1} Z^n
        let m = IntMat::from_rows(&c.select(&b), n);
        let snf = smith_normal_form(&m);
        let mut reps: Vec<RatVec> = vec![vec![Rat::zero(); n]];
        for i in 0..n {
            let d = snf.diag[i].abs();
            let mut next = Vec::new();
            for rep in &reps {
                let mut k = Int::zero();
                while k < d {
                    let step = Rat::new(k.clone(), d.clone());
                    next.push(
                        rep.iter()
                            .enumerate()
                            .map(|(row, x)| x + rat_int(&snf.right[(row, i)]) * &step)
                            .collect(),
                    );
                    k += 1;
                }
            }
            reps = next;
        }
        for r in reps {
            let g = CharacterG::new(r);
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    out.sort();
    out
}

/// Σ_λ weight(λ) · B(X)(v - λ) over the finitely many λ with v - λ in Z(X).
fn lattice_sum<T, W>(arr: &Arrangement, v: &[Rat], zero: T, weight: W) -> Result<T>
where
    T: Scalar,
    W: Fn(&IntVec) -> Result<T>,
{
    arr.require_regular(v)?;
    let all: Vec<usize> = (0..arr.config().len()).collect();
    let plan = BoxPlan::new(arr, &all)?;
    let mut total = zero;
    for lambda in arr.lattice_candidates(&all, v) {
        let u: RatVec = v.iter().zip(&lambda).map(|(x, l)| x - rat_int(l)).collect();
        if !arr.zonotope_contains(&u) {
            continue;
        }
        let b = plan.eval(&u)?;
        if b.is_zero() {
            continue;
        }
        total = total.plus(&weight(&lambda)?.scaled(&b));
    }
    Ok(total)
}

fn int_point(lambda: &[Int]) -> RatVec {
    lambda.iter().map(rat_int).collect()
}

/// (B(X) *_d f)(v) = Σ_λ f(λ) B(X)(v - λ).
pub fn semidiscrete_eval(arr: &Arrangement, f: &Poly, v: &[Rat]) -> Result<Rat> {
    lattice_sum(arr, v, Rat::zero(), |l| f.eval(&int_point(l)))
}

/// Σ_λ g^λ p(λ) B(X)(v - λ) in Q(ζ_m).
pub fn semidiscrete_twisted(arr: &Arrangement, g: &CharacterG, p: &Poly, v: &[Rat]) -> Result<Cyclo> {
    lattice_sum(arr, v, Cyclo::zero(g.order()), |l| {
        Ok(g.pow(l).scale(&p.eval(&int_point(l))?))
    })
}

/// B(X) *_c f for a polynomial f: the Todd operator of X applied to f.
pub fn continuous_conv_poly(c: &Configuration, f: &Poly) -> Result<Poly> {
    todd_apply(c.vectors(), f)
}

/// One summand (-1)^{|I|} B((X∩s) ⊔ I) *_c (W(X/s) · ∂_I ∇_J f) of the
/// right-hand side, evaluated at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremTerm {
    /// X-indices of a basis of s.
    pub s_basis: Vec<usize>,
    pub s_dim: usize,
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub sign: i32,
    /// The signed contribution.
    #[serde(serialize_with = "ser_rat")]
    pub value: Rat,
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rat(r))
}

fn subsets(items: &[usize]) -> impl Iterator<Item = (Vec<usize>, Vec<usize>)> + '_ {
    (0u32..(1 << items.len())).map(move |mask| {
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for (k, &x) in items.iter().enumerate() {
            if mask & (1 << k) != 0 {
                inside.push(x);
            } else {
                outside.push(x);
            }
        }
        (inside, outside)
    })
}

/// Right-hand side of the difference formula for a fixed polynomial, with
/// the W(X/s) closed forms built once.
pub struct Theorem1<'a> {
    arr: &'a Arrangement,
    f: Poly,
    parts: Vec<(&'a AdmissibleSubspace, BernoulliExpr)>,
}

struct PreparedTerm<'b> {
    s: &'b AdmissibleSubspace,
    w: &'b BernoulliExpr,
    i: Vec<usize>,
    j: Vec<usize>,
    /// todd_{X∩s} ∂_I ∇_J f; `None` when ∂_I ∇_J f vanishes.
    poly: Option<Poly>,
}

impl<'a> Theorem1<'a> {
    pub fn new(arr: &'a Arrangement, f: &Poly) -> Result<Self> {
        if f.dim() != arr.config().dim() {
            return Err(Error::DimensionMismatch {
                expected: arr.config().dim(),
                got: f.dim(),
            });
        }
        let parts = arr
            .proper_subspaces()
            .iter()
            .map(|s| Ok((s, w_quotient(arr, s)?)))
            .collect::<Result<_>>()?;
        Ok(Theorem1 {
            arr,
            f: f.clone(),
            parts,
        })
    }

    fn prepared(&self) -> Result<Vec<PreparedTerm<'_>>> {
        let c = self.arr.config();
        let mut out = Vec::new();
        for (s, w) in &self.parts {
            for (i, j) in subsets(&s.x_minus_s) {
                let mut p = self.f.clone();
                for &k in &i {
                    p = p.dir_derivative(c.vector(k))?;
                }
                for &k in &j {
                    p = p.nabla(c.vector(k))?;
                }
                // W(X/s) is constant along s, so the X∩s part of the box
                // spline acts on the polynomial factor alone
                let poly = if p.is_zero() {
                    None
                } else {
                    Some(todd_apply(&c.select(&s.x_in_s), &p)?)
                };
                out.push(PreparedTerm { s, w, i, j, poly });
            }
        }
        Ok(out)
    }

    pub fn rhs(&self, v: &[Rat]) -> Result<(Rat, Vec<TheoremTerm>)> {
        self.arr.require_regular(v)?;
        let mut total = Rat::zero();
        let mut terms = Vec::new();
        for t in self.prepared()? {
            let sign = if t.i.len() % 2 == 0 { 1 } else { -1 };
            let value = match &t.poly {
                None => Rat::zero(),
                Some(p) => {
                    let prod = PiecewiseProduct::new(t.w, p.clone());
                    box_convolve_eval(self.arr, &t.i, &prod, v)? * Rat::from_integer(sign.into())
                }
            };
            total += &value;
            terms.push(TheoremTerm {
                s_basis: t.s.basis.clone(),
                s_dim: t.s.dim,
                i: t.i,
                j: t.j,
                sign,
                value,
            });
        }
        Ok((total, terms))
    }
}

/// Σ_{s∈R′} Σ_{I⊆X∖s} (-1)^{|I|} B((X∩s) ⊔ I) *_c (W(X/s) · ∂_I ∇_J f) at v.
pub fn theorem1_rhs(arr: &Arrangement, f: &Poly, v: &[Rat]) -> Result<(Rat, Vec<TheoremTerm>)> {
    Theorem1::new(arr, f)?.rhs(v)
}

/// Per-point outcome; exact values are printed as `p/q` (or as elements
/// of Q(ζ_m) for twisted checks).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub point: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
    pub lhs_discrete: String,
    pub lhs_continuous: String,
    pub difference: String,
    pub rhs_total: String,
    pub terms: Vec<TheoremTerm>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PointReport {
    fn failed(point: &[Rat], polynomial: Option<String>, e: &Error) -> Self {
        PointReport {
            point: point.iter().map(fmt_rat).collect(),
            polynomial,
            lhs_discrete: String::new(),
            lhs_continuous: String::new(),
            difference: String::new(),
            rhs_total: String::new(),
            terms: Vec::new(),
            pass: false,
            error: Some(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub kind: String,
    pub dim: usize,
    #[serde(rename = "X")]
    pub x: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub character: Option<String>,
    pub points: Vec<PointReport>,
    pub pass: bool,
}

impl VerificationReport {
    fn new(
        kind: &str,
        c: &Configuration,
        polynomial: Option<String>,
        character: Option<String>,
        points: Vec<PointReport>,
    ) -> Self {
        let pass = points.iter().all(|p| p.pass);
        VerificationReport {
            kind: kind.to_string(),
            dim: c.dim(),
            x: c.vectors().iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect(),
            polynomial,
            character,
            points,
            pass,
        }
    }
}

/// Checks semidiscrete - continuous = right-hand side exactly at every point.
pub fn theorem1_check(arr: &Arrangement, f: &Poly, points: &[RatVec]) -> Result<VerificationReport> {
    let thm = Theorem1::new(arr, f)?;
    let cont = continuous_conv_poly(arr.config(), f)?;
    let reports = points
        .par_iter()
        .map(|v| {
            let run = || -> Result<PointReport> {
                let lhs = semidiscrete_eval(arr, f, v)?;
                let c = cont.eval(v)?;
                let diff = &lhs - &c;
                let (rhs, terms) = thm.rhs(v)?;
                Ok(PointReport {
                    point: v.iter().map(fmt_rat).collect(),
                    polynomial: None,
                    lhs_discrete: fmt_rat(&lhs),
                    lhs_continuous: fmt_rat(&c),
                    difference: fmt_rat(&diff),
                    rhs_total: fmt_rat(&rhs),
                    terms,
                    pass: diff == rhs,
                    error: None,
                })
            };
            run().unwrap_or_else(|e| PointReport::failed(v, None, &e))
        })
        .collect();
    Ok(VerificationReport::new(
        "theorem1",
        arr.config(),
        Some(f.to_string()),
        None,
        reports,
    ))
}

/// For every basis element p of D(X): B(X) *_d p = Todd(p) at each point.
pub fn dm_corollary_check(arr: &Arrangement, points: &[RatVec]) -> Result<VerificationReport> {
    let basis = dm_basis(arr).basis;
    let mut jobs = Vec::new();
    for p in &basis {
        let todd = continuous_conv_poly(arr.config(), p)?;
        for v in points {
            jobs.push((p, todd.clone(), v));
        }
    }
    let reports = jobs
        .par_iter()
        .map(|(p, todd, v)| {
            let run = || -> Result<PointReport> {
                let lhs = semidiscrete_eval(arr, p, v)?;
                let c = todd.eval(v)?;
                let diff = &lhs - &c;
                Ok(PointReport {
                    point: v.iter().map(fmt_rat).collect(),
                    polynomial: Some(p.to_string()),
                    lhs_discrete: fmt_rat(&lhs),
                    lhs_continuous: fmt_rat(&c),
                    difference: fmt_rat(&diff),
                    rhs_total: "0".to_string(),
                    terms: Vec::new(),
                    pass: diff.is_zero(),
                    error: None,
                })
            };
            run().unwrap_or_else(|e| PointReport::failed(v, Some(p.to_string()), &e))
        })
        .collect();
    Ok(VerificationReport::new("dm-corollary", arr.config(), None, None, reports))
}

fn require_toric(c: &Configuration, g: &CharacterG) -> Result<()> {
    if g.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            got: g.dim(),
        });
    }
    if g.is_zero() || !toric_vertices(c).contains(g) {
        return Err(Error::NotAToricVertex(g.to_string()));
    }
    Ok(())
}

/// For a nonzero toric vertex g and p ∈ D(X(g)): Σ_λ g^λ p(λ) B(X)(v - λ) = 0.
pub fn twisted_corollary_check(
    arr: &Arrangement,
    g: &CharacterG,
    p: &Poly,
    points: &[RatVec],
) -> Result<VerificationReport> {
    let c = arr.config();
    require_toric(c, g)?;
    let sub = Configuration::new(c.dim(), c.select(&x_of_g(c, g)))?;
    if !is_in_dm(&Arrangement::new(&sub), p)? {
        return Err(Error::NotInDmSpace);
    }
    let reports = points
        .par_iter()
        .map(|v| match semidiscrete_twisted(arr, g, p, v) {
            Ok(lhs) => PointReport {
                point: v.iter().map(fmt_rat).collect(),
                polynomial: Some(p.to_string()),
                lhs_discrete: lhs.to_string(),
                lhs_continuous: "0".to_string(),
                difference: lhs.to_string(),
                rhs_total: "0".to_string(),
                terms: Vec::new(),
                pass: lhs.is_zero(),
                error: None,
            },
            Err(e) => PointReport::failed(v, Some(p.to_string()), &e),
        })
        .collect();
    Ok(VerificationReport::new(
        "twisted-corollary",
        c,
        Some(p.to_string()),
        Some(g.to_string()),
        reports,
    ))
}

/// Right-hand side of the twisted formula in dimension 1:
/// Σ_{I⊆X} (-1)^{|I|} B(I) *_c (W(X,g) · ∂_I ∇^g_J h), with
/// ∇(a,g) f(v) = f(v) - g^{-a} f(v - a).
pub fn theorem2_rhs_1d(arr: &Arrangement, g: &CharacterG, h: &Poly, v: &[Rat]) -> Result<Cyclo> {
    let c = arr.config();
    if c.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            supported: 1,
            got: c.dim(),
        });
    }
    if g.is_zero() {
        return Err(Error::IntegerTwist(g.to_string()));
    }
    arr.require_regular(v)?;
    let m = g.order();
    let scalars: Vec<Int> = c.vectors().iter().map(|a| a[0].clone()).collect();
    let w = w_twisted_1d(c.len(), &g.coords()[0], &scalars)?;
    let all: Vec<usize> = (0..c.len()).collect();
    let mut total = Cyclo::zero(m);
    for (i, j) in subsets(&all) {
        let mut dh = h.clone();
        for &k in &i {
            dh = dh.dir_derivative(c.vector(k))?;
        }
        if dh.is_zero() {
            continue;
        }
        // ∏_{b∈J} (1 - g^{-b} τ_b) = Σ_{K⊆J} (-1)^{|K|} g^{-ΣK} τ_{ΣK}
        let shifts: Vec<(Cyclo, Rat)> = subsets(&j)
            .map(|(k, _)| {
                let sum: Int = k.iter().map(|&x| scalars[x].clone()).sum();
                let sign = if k.len() % 2 == 0 { Rat::one() } else { -Rat::one() };
                (g.pow(&[-sum.clone()]).scale(&sign), rat_int(&sum))
            })
            .collect();
        let degree = c.len() - 1 + dh.degree().unwrap_or(0);
        let func = FnEval::new(degree, |u: &[Rat]| {
            let mut acc = Cyclo::zero(m);
            for (coeff, shift) in &shifts {
                acc = acc.add(&coeff.scale(&dh.eval(&[&u[0] - shift])?));
            }
            Ok(w.eval(&u[0])?.mul(&acc))
        });
        let term = box_convolve_eval(arr, &i, &func, v)?;
        total = if i.len() % 2 == 0 { total.add(&term) } else { total.sub(&term) };
    }
    Ok(total)
}

/// Σ_λ g^λ h(λ) B(X)(v - λ) against the twisted right-hand side, n = 1.
pub fn theorem2_check_1d(
    arr: &Arrangement,
    g: &CharacterG,
    h: &Poly,
    points: &[RatVec],
) -> Result<VerificationReport> {
    let c = arr.config();
    if c.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            supported: 1,
            got: c.dim(),
        });
    }
    if g.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: g.dim(),
        });
    }
    if g.is_zero() {
        return Err(Error::IntegerTwist(g.to_string()));
    }
    let reports = points
        .par_iter()
        .map(|v| {
            let run = || -> Result<PointReport> {
                let lhs = semidiscrete_twisted(arr, g, h, v)?;
                let rhs = theorem2_rhs_1d(arr, g, h, v)?;
                Ok(PointReport {
                    point: v.iter().map(fmt_rat).collect(),
                    polynomial: None,
                    lhs_discrete: lhs.to_string(),
                    lhs_continuous: "0".to_string(),
                    difference: lhs.to_string(),
                    rhs_total: rhs.to_string(),
                    pass: lhs == rhs,
                    terms: Vec::new(),
                    error: None,
                })
            };
            run().unwrap_or_else(|e| PointReport::failed(v, None, &e))
        })
        .collect();
    Ok(VerificationReport::new(
        "theorem2-1d",
        c,
        Some(h.to_string()),
        Some(g.to_string()),
        reports,
    ))
}

pub const POINT_DENOMINATOR: i64 = 1009;

/// `count` affine-regular points with coordinates k/1009 in [-1, 2),
/// drawn from a seeded generator; non-regular draws are rejected.
pub fn random_regular_points(arr: &Arrangement, count: usize, seed: u64) -> Vec<RatVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = arr.config().dim();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: RatVec = (0..n)
            .map(|_| Rat::new(rng.gen_range(-POINT_DENOMINATOR..2 * POINT_DENOMINATOR).into(), POINT_DENOMINATOR.into()))
            .collect();
        if arr.is_regular(&v) {
            out.push(v);
        }
    }
    out
}

/// Human-readable point, used in diagnostics.
pub fn describe_point(v: &[Rat]) -> String {
    fmt_rat_vec(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int_vec, rat, rat_vec};
    use proptest::prelude::*;

    fn arr(dim: usize, xs: &[&[i64]]) -> Arrangement {
        Arrangement::new(&Configuration::from_i64(dim, xs).unwrap())
    }

    fn p(s: &str, dim: usize) -> Poly {
        Poly::parse(s, dim).unwrap()
    }

    #[test]
    fn semidiscrete_examples() {
        let ww = arr(1, &[&[1], &[1]]);
        let v = rat_vec(&[(1, 2)]);
        assert_eq!(semidiscrete_eval(&ww, &p("1", 1), &v).unwrap(), rat(1, 1));
        assert_eq!(semidiscrete_eval(&ww, &p("t", 1), &v).unwrap(), rat(-1, 2));
        assert_eq!(semidiscrete_eval(&ww, &p("t^2", 1), &v).unwrap(), rat(1, 2));
        let a2 = arr(2, &[&[1, 0], &[0, 1], &[1, 1]]);
        assert_eq!(
            semidiscrete_eval(&a2, &p("1", 2), &rat_vec(&[(1, 3), (1, 5)])).unwrap(),
            rat(1, 1)
        );
    }

    #[test]
    fn continuous_examples() {
        let ww = Configuration::from_i64(1, &[&[1], &[1]]).unwrap();
        assert_eq!(continuous_conv_poly(&ww, &p("1", 1)).unwrap(), p("1", 1));
        assert_eq!(continuous_conv_poly(&ww, &p("t^2", 1)).unwrap(), p("t^2 - 2*t + 7/6", 1));
        assert_eq!(continuous_conv_poly(&ww, &p("t", 1)).unwrap(), p("t - 1", 1));
    }

    #[test]
    fn worked_example() {
        let ww = arr(1, &[&[1], &[1]]);
        let v = rat_vec(&[(1, 2)]);
        let (total, terms) = theorem1_rhs(&ww, &p("t^2", 1), &v).unwrap();
        assert_eq!(total, rat(1, 12));
        assert_eq!(terms.len(), 4);
        for t in &terms {
            let expect = if t.i.is_empty() { rat(1, 12) } else { rat(0, 1) };
            assert_eq!(t.value, expect);
        }
        let report = theorem1_check(&ww, &p("t^2", 1), &[v]).unwrap();
        assert!(report.pass);
        assert_eq!(report.points[0].difference, "1/12");
    }

    #[test]
    fn constant_polynomial_has_zero_rhs() {
        let a2 = arr(2, &[&[1, 0], &[0, 1], &[1, 1]]);
        let (total, terms) = theorem1_rhs(&a2, &p("1", 2), &rat_vec(&[(1, 3), (1, 5)])).unwrap();
        assert_eq!(total, rat(0, 1));
        assert!(terms.iter().all(|t| t.value.is_zero()));
    }

    #[test]
    fn dm_polynomials_vanish_term_by_term() {
        let c = arr(2, &[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]);
        for b in dm_basis(&c).basis {
            let (_, terms) = theorem1_rhs(&c, &b, &rat_vec(&[(1, 3), (1, 7)])).unwrap();
            assert!(terms.iter().all(|t| t.value.is_zero()), "{b}");
        }
    }

    #[test]
    fn theorem1_small_matrix() {
        for a in [
            arr(1, &[&[2]]),
            arr(1, &[&[1], &[1], &[1]]),
            arr(2, &[&[1, 0], &[0, 1], &[1, 1]]),
            arr(2, &[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]),
        ] {
            let n = a.config().dim();
            let pts = random_regular_points(&a, 3, 7);
            for f in ["v1^2", "v1^3"] {
                let f = p(f, n);
                let r = theorem1_check(&a, &f, &pts).unwrap();
                assert!(r.pass, "{:?} {f}: {:?}", a.config(), r.points);
            }
        }
    }

    #[test]
    fn toric_vertex_examples() {
        let a2 = Configuration::from_i64(2, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
        assert_eq!(toric_vertices(&a2), vec![CharacterG::zero(2)]);
        let two = Configuration::from_i64(1, &[&[2]]).unwrap();
        assert_eq!(
            toric_vertices(&two),
            vec![CharacterG::zero(1), CharacterG::new(rat_vec(&[(1, 2)]))]
        );
        let c = Configuration::from_i64(2, &[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]).unwrap();
        let tv = toric_vertices(&c);
        assert!(tv.contains(&CharacterG::new(rat_vec(&[(1, 2), (1, 2)]))));
        for g in &tv {
            let sub = c.select(&x_of_g(&c, g));
            assert_eq!(crate::exact::rank_int(&sub, 2), 2);
        }
    }

    #[test]
    fn x_of_g_examples() {
        let a2 = Configuration::from_i64(2, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
        assert_eq!(x_of_g(&a2, &CharacterG::zero(2)), vec![0, 1, 2]);
        assert_eq!(x_of_g(&a2, &CharacterG::new(rat_vec(&[(1, 2), (1, 2)]))), vec![2]);
        let two = Configuration::from_i64(1, &[&[2]]).unwrap();
        assert_eq!(x_of_g(&two, &CharacterG::new(rat_vec(&[(1, 2)]))), vec![0]);
    }

    #[test]
    fn character_powers() {
        let g = CharacterG::parse("1/2, 1/3").unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.pow(&int_vec(&[1, 1])), Cyclo::zeta_pow(6, 5));
        assert_eq!(g.pow(&int_vec(&[2, 3])), Cyclo::one(6));
        assert_eq!(CharacterG::parse("3/2").unwrap(), CharacterG::parse("1/2").unwrap());
        assert!(CharacterG::parse("x").is_err());
    }

    #[test]
    fn twisted_corollary_examples() {
        let two = arr(1, &[&[2]]);
        let g = CharacterG::new(rat_vec(&[(1, 2)]));
        let one = p("1", 1);
        assert!(semidiscrete_twisted(&two, &g, &one, &rat_vec(&[(1, 2)])).unwrap().is_zero());
        assert!(semidiscrete_twisted(&two, &g, &one, &rat_vec(&[(3, 4)])).unwrap().is_zero());
        let r = twisted_corollary_check(&two, &g, &one, &random_regular_points(&two, 5, 1)).unwrap();
        assert!(r.pass);
        assert_eq!(
            twisted_corollary_check(&two, &CharacterG::zero(1), &one, &[]),
            Err(Error::NotAToricVertex("0".into()))
        );
        assert_eq!(
            twisted_corollary_check(&two, &g, &p("t", 1), &[]),
            Err(Error::NotInDmSpace)
        );
    }

    #[test]
    fn theorem2_examples() {
        let w = arr(1, &[&[1]]);
        let g = CharacterG::new(rat_vec(&[(1, 2)]));
        let v = rat_vec(&[(1, 4)]);
        assert_eq!(semidiscrete_twisted(&w, &g, &p("1", 1), &v).unwrap(), Cyclo::one(2));
        assert_eq!(theorem2_rhs_1d(&w, &g, &p("1", 1), &v).unwrap(), Cyclo::one(2));
        let two = arr(1, &[&[2]]);
        assert!(theorem2_rhs_1d(&two, &g, &p("1", 1), &rat_vec(&[(1, 2)])).unwrap().is_zero());
        let r = theorem2_check_1d(&w, &g, &p("t", 1), &[v]).unwrap();
        assert!(r.pass, "{:?}", r.points);
        let a2 = arr(2, &[&[1, 0], &[0, 1], &[1, 1]]);
        assert!(matches!(
            theorem2_check_1d(&a2, &CharacterG::new(rat_vec(&[(1, 2), (0, 1)])), &p("1", 2), &[]),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn random_points_are_reproducible() {
        let a2 = arr(2, &[&[1, 0], &[0, 1], &[1, 1]]);
        let a = random_regular_points(&a2, 20, 42);
        assert_eq!(a, random_regular_points(&a2, 20, 42));
        assert_ne!(a, random_regular_points(&a2, 20, 43));
        assert!(a.iter().all(|v| a2.is_regular(v)));
    }

    #[test]
    fn report_serializes() {
        let ww = arr(1, &[&[1], &[1]]);
        let r = theorem1_check(&ww, &p("t^2", 1), &[rat_vec(&[(1, 2)])]).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["points"][0]["rhs_total"], "1/12");
        assert_eq!(json["points"][0]["terms"][0]["value"], "1/12");
        assert_eq!(json["X"][0][0], "1");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn lattice_covariance(k in -2000i64..2000, j in -2000i64..2000, l in prop::collection::vec(-2i64..3, 2)) {
            let a = arr(2, &[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]);
            let v = vec![rat(k, 1009), rat(j, 1009)];
            prop_assume!(a.is_regular(&v));
            let f = p("v1^2*v2 - 3*v2 + 1/2", 2);
            let lam = vec![rat(l[0], 1), rat(l[1], 1)];
            let moved: RatVec = v.iter().zip(&lam).map(|(x, y)| x + y).collect();
            let neg: RatVec = lam.iter().map(|x| -x).collect();
            let shifted = f.shift(&neg).unwrap();
            prop_assert_eq!(
                semidiscrete_eval(&a, &f, &moved).unwrap(),
                semidiscrete_eval(&a, &shifted, &v).unwrap()
            );
        }

        #[test]
        fn term_bookkeeping(k in -1000i64..2000, j in -1000i64..2000) {
            let a = arr(2, &[&[1, 0], &[0, 1], &[1, 1]]);
            let v = vec![rat(k, 1009), rat(j, 1009)];
            prop_assume!(a.is_regular(&v));
            let (total, terms) = theorem1_rhs(&a, &p("v1^2*v2", 2), &v).unwrap();
            let sum: Rat = terms.iter().map(|t| t.value.clone()).sum();
            prop_assert_eq!(total, sum);
        }
    }
}
