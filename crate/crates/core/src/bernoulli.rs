//! Multiple Bernoulli periodic polynomials as closed-form expressions.
//!
//! W(X)(v) = Σ_{γ ∈ Γ, ⟨γ,a⟩ ≠ 0 ∀a∈X} e^{2iπ⟨γ,v⟩} / ∏_{a∈X} 2iπ⟨γ,a⟩
//!
//! is brought to closed form by partial fractions (until the denominator
//! forms are independent), inclusion–exclusion over the forms that must
//! not vanish, and, for independent forms, a character sum over the
//! finite group M^{-T}Z^r / Z^r that turns the sum into a product of
//! one-dimensional series Σ_{w≠0} e^{2iπwy}/(2iπw)^m = -B_m({y})/m!.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num::integer::Integer;
use num::{One, Signed, Zero};
use parking_lot::Mutex;

use crate::arrangement::{AdmissibleSubspace, Arrangement, Configuration};
use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::exact::{
    det, dot_int, dot_int_rat, factorial, fmt_rat, frac, integer_kernel, normalize_primitive, rat_int,
    smith_normal_form, solve_in_span, to_rat_vec, Int, IntMat, IntVec, LatticeQuotient, Rat, RatVec,
};
use crate::boxspline::EvaluableFn;
use crate::poly::{line_integral, Poly, Poly1D};

/// The Bernoulli polynomial B(k, t): B(0) = 1, B(k)' = k·B(k-1) and
/// ∫₀¹ B(k) = 0 for k ≥ 1.
pub fn bernoulli_poly(k: usize) -> Poly1D {
    static CACHE: OnceLock<Mutex<Vec<Poly1D>>> = OnceLock::new();
    let mut cache = CACHE
        .get_or_init(|| Mutex::new(vec![Poly1D::constant(Rat::one())]))
        .lock();
    while cache.len() <= k {
        let j = cache.len();
        let prim = cache[j - 1].antiderivative().scale(&Rat::from_integer(Int::from(j)));
        let mean = prim.antiderivative().eval(&Rat::one());
        cache.push(prim.add(&Poly1D::constant(-mean)));
    }
    cache[k].clone()
}

/// B(order, {(⟨form, v⟩ + shift) / modulus}) with the form primitive
/// together with shift and modulus, first nonzero entry of the form
/// positive and 0 ≤ shift < modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub order: u32,
    pub form: IntVec,
    pub shift: Int,
    pub modulus: Int,
}

impl Factor {
    /// Canonical factor for B(order, {⟨u,v⟩ + c}), plus the sign picked up
    /// by the reflection B(m, 1 - x) = (-1)^m B(m, x).
    fn canonical(order: u32, u: &[Rat], c: &Rat) -> (Factor, bool) {
        let d = u
            .iter()
            .chain(std::iter::once(c))
            .fold(Int::one(), |acc, x| acc.lcm(x.denom()));
        let scale = rat_int(&d);
        let mut form: IntVec = u.iter().map(|x| (x * &scale).to_integer()).collect();
        let mut shift = (c * &scale).to_integer();
        let g = form.iter().fold(shift.gcd(&d), |acc, x| acc.gcd(x));
        let modulus = &d / &g;
        form.iter_mut().for_each(|x| *x = &*x / &g);
        shift = &shift / &g;
        let negate = form
            .iter()
            .find(|x| !x.is_zero())
            .is_some_and(|x| x.is_negative());
        if negate {
            form.iter_mut().for_each(|x| *x = -&*x);
            shift = -shift;
        }
        let shift = shift.mod_floor(&modulus);
        (
            Factor {
                order,
                form,
                shift,
                modulus,
            },
            negate && order % 2 == 1,
        )
    }

    /// The argument (⟨form, v⟩ + shift) / modulus before reduction mod 1.
    pub fn argument(&self, v: &[Rat]) -> Rat {
        (dot_int_rat(&self.form, v) + rat_int(&self.shift)) / rat_int(&self.modulus)
    }

    fn fmt_argument(&self, var: &str) -> String {
        let mut s = String::new();
        for (i, c) in self.form.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if s.is_empty() {
                if c.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            let a = c.abs();
            if a.is_one() {
                s.push_str(&format!("{var}{}", i + 1));
            } else {
                s.push_str(&format!("{a}*{var}{}", i + 1));
            }
        }
        if !self.shift.is_zero() {
            s.push_str(&format!(" + {}", self.shift));
        }
        if self.modulus.is_one() {
            s
        } else {
            format!("({s})/{}", self.modulus)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BernoulliTerm {
    pub coeff: Rat,
    /// Indices into the expression's factor table; a factor may repeat.
    pub factors: Vec<usize>,
}

/// Σ_terms coeff · ∏ B(m, {ℓ(v)}): a Λ-periodic function, polynomial on
/// every tope, evaluable wherever no form is integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BernoulliExpr {
    dim: usize,
    factors: Vec<Factor>,
    terms: Vec<BernoulliTerm>,
    /// B(0), …, B(max order), so evaluation needs no shared state.
    polys: Vec<Poly1D>,
}

impl BernoulliExpr {
    pub fn constant(dim: usize, c: Rat) -> Self {
        let terms = if c.is_zero() {
            Vec::new()
        } else {
            vec![BernoulliTerm {
                coeff: c,
                factors: Vec::new(),
            }]
        };
        BernoulliExpr {
            dim,
            factors: Vec::new(),
            terms,
            polys: vec![bernoulli_poly(0)],
        }
    }

    fn from_map(dim: usize, map: BTreeMap<Vec<Factor>, Rat>) -> Self {
        let mut factors: Vec<Factor> = Vec::new();
        let mut index: HashMap<Factor, usize> = HashMap::new();
        let mut terms = Vec::new();
        for (fs, coeff) in map {
            if coeff.is_zero() {
                continue;
            }
            let idx = fs
                .into_iter()
                .map(|f| {
                    *index.entry(f.clone()).or_insert_with(|| {
                        factors.push(f);
                        factors.len() - 1
                    })
                })
                .collect();
            terms.push(BernoulliTerm { coeff, factors: idx });
        }
        let top = factors.iter().map(|f| f.order as usize).max().unwrap_or(0);
        let polys = (0..=top).map(bernoulli_poly).collect();
        BernoulliExpr {
            dim,
            factors,
            terms,
            polys,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn terms(&self) -> &[BernoulliTerm] {
        &self.terms
    }

    /// Largest total Bernoulli order of a term: a bound on the degree of
    /// the polynomial pieces.
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.factors.iter().map(|&i| self.factors[i].order as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, v: &[Rat]) -> Result<Rat> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let values: Vec<Rat> = self
            .factors
            .iter()
            .map(|f| {
                let x = f.argument(v);
                if x.is_integer() {
                    return Err(Error::FormHitsInteger);
                }
                Ok(self.polys[f.order as usize].eval(&frac(&x)))
            })
            .collect::<Result<_>>()?;
        Ok(self
            .terms
            .iter()
            .map(|t| t.factors.iter().fold(t.coeff.clone(), |acc, &i| acc * &values[i]))
            .sum())
    }

    /// Floors of the factor arguments at `v`; equal keys mean the same
    /// polynomial piece.
    pub fn tope_key(&self, v: &[Rat]) -> Result<Vec<Int>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        // integer arithmetic over a common denominator of v
        let den = v.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
        let nums: IntVec = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
        self.factors
            .iter()
            .map(|f| {
                let n = dot_int(&f.form, &nums) + &f.shift * &den;
                let (q, r) = n.div_mod_floor(&(&f.modulus * &den));
                if r.is_zero() {
                    Err(Error::FormHitsInteger)
                } else {
                    Ok(q)
                }
            })
            .collect()
    }

    /// The polynomial that agrees with the expression wherever
    /// `tope_key` returns `key`.
    pub fn tope_poly(&self, key: &[Int]) -> Poly {
        let n = self.dim;
        let pieces: Vec<Poly> = self
            .factors
            .iter()
            .zip(key)
            .map(|(f, k)| {
                let m = rat_int(&f.modulus);
                let mut arg = Poly::constant(n, (rat_int(&f.shift) - rat_int(k) * &m) / &m);
                for (i, c) in f.form.iter().enumerate() {
                    arg = arg.add(&Poly::var(n, i).scale(&(rat_int(c) / &m)));
                }
                let b = &self.polys[f.order as usize];
                let mut out = Poly::zero(n);
                let mut power = Poly::one(n);
                for c in b.coeffs() {
                    out = out.add(&power.scale(c));
                    power = power.mul(&arg);
                }
                out
            })
            .collect();
        let mut total = Poly::zero(n);
        for t in &self.terms {
            let term = t
                .factors
                .iter()
                .fold(Poly::constant(n, t.coeff.clone()), |acc, &i| acc.mul(&pieces[i]));
            total = total.add(&term);
        }
        total
    }

    /// Composes every form with the quotient projection, giving the same
    /// function on the ambient space, constant along the subspace.
    pub fn pull_back(&self, q: &LatticeQuotient) -> BernoulliExpr {
        let mut map = BTreeMap::new();
        for t in &self.terms {
            let fs: Vec<Factor> = t
                .factors
                .iter()
                .map(|&i| {
                    let f = &self.factors[i];
                    Factor {
                        form: q.pull_back_covector(&f.form),
                        ..f.clone()
                    }
                })
                .collect();
            *map.entry(sorted(fs)).or_insert_with(Rat::zero) += &t.coeff;
        }
        BernoulliExpr::from_map(q.ambient, map)
    }

    /// Text form `c · B{k}(ℓ(v)) · …` with terms joined by signs; `var`
    /// names the coordinates.
    pub fn to_text(&self, var: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (n, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_negative();
            match (n, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(&fmt_rat(&t.coeff.abs()));
            for &i in &t.factors {
                let f = &self.factors[i];
                out.push_str(&format!(" · B{{{}}}({})", f.order, f.fmt_argument(var)));
            }
        }
        out
    }
}

impl fmt::Display for BernoulliExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text("v"))
    }
}

fn sorted(mut fs: Vec<Factor>) -> Vec<Factor> {
    fs.sort();
    fs
}

/// One lattice sum Σ_{z ∈ Z^r} coeff · e^{2iπ⟨Ez, v⟩} / ∏_j (2iπ⟨p_j, z⟩)^{m_j}
/// restricted to ⟨p_j, z⟩ ≠ 0 and ⟨q, z⟩ ≠ 0 for the excluded forms q.
#[derive(Clone, Debug)]
struct Frame {
    /// Columns of E, vectors of Z^n.
    embedding: Vec<IntVec>,
    denominators: Vec<(IntVec, u32)>,
    excluded: Vec<IntVec>,
    coeff: Rat,
}

struct Expander {
    dim: usize,
    out: BTreeMap<Vec<Factor>, Rat>,
}

impl Expander {
    fn expand(&mut self, frame: Frame) {
        let is_zero = |p: &IntVec| p.iter().all(|x| x.is_zero());
        if frame.denominators.iter().any(|(p, _)| is_zero(p)) || frame.excluded.iter().any(is_zero) {
            return;
        }
        let frame = merge_parallel(frame);
        if let Some((k, alpha)) = first_dependent(&frame.denominators) {
            for (i, a) in alpha.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let mut next = frame.clone();
                next.coeff *= a;
                next.denominators[k].1 += 1;
                next.denominators[i].1 -= 1;
                if next.denominators[i].1 == 0 {
                    let (p, _) = next.denominators.remove(i);
                    next.excluded.push(p);
                }
                self.expand(next);
            }
            return;
        }
        let r = frame.embedding.len();
        debug_assert_eq!(frame.denominators.len(), r, "denominators keep spanning");
        if frame.excluded.is_empty() {
            self.base(&frame);
            return;
        }
        let m = frame.excluded.len();
        for mask in 0u32..(1 << m) {
            if mask == 0 {
                self.base(&Frame {
                    excluded: Vec::new(),
                    ..frame.clone()
                });
                continue;
            }
            let t: Vec<IntVec> = (0..m)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| frame.excluded[i].clone())
                .collect();
            let kernel = integer_kernel(&t, r);
            let embedding = kernel
                .iter()
                .map(|kc| {
                    (0..self.dim)
                        .map(|row| (0..r).map(|j| &frame.embedding[j][row] * &kc[j]).sum())
                        .collect()
                })
                .collect();
            let denominators = frame
                .denominators
                .iter()
                .map(|(p, mult)| (kernel.iter().map(|kc| dot_int(p, kc)).collect(), *mult))
                .collect();
            let sign = if t.len().is_multiple_of(2) { Rat::one() } else { -Rat::one() };
            self.expand(Frame {
                embedding,
                denominators,
                excluded: Vec::new(),
                coeff: &frame.coeff * sign,
            });
        }
    }

    /// Independent denominators forming a basis of the dual of Z^r.
    fn base(&mut self, frame: &Frame) {
        let r = frame.embedding.len();
        let rows: Vec<IntVec> = frame.denominators.iter().map(|(p, _)| p.clone()).collect();
        let m = IntMat::from_rows(&rows, r);
        let d = if r == 0 { Int::one() } else { det(&m).expect("square") };
        let cols: Vec<RatVec> = (0..r).map(|j| to_rat_vec(&m.col(j))).collect();
        // u_j = E · (column j of M^{-1})
        let us: Vec<RatVec> = (0..r)
            .map(|j| {
                let e: RatVec = (0..r).map(|i| if i == j { Rat::one() } else { Rat::zero() }).collect();
                let x = solve_in_span(&cols, &e).expect("invertible");
                (0..self.dim)
                    .map(|row| (0..r).map(|i| rat_int(&frame.embedding[i][row]) * &x[i]).sum())
                    .collect()
            })
            .collect();
        let snf = smith_normal_form(&m.transpose());
        let mut reps: Vec<RatVec> = vec![vec![Rat::zero(); r]];
        for i in 0..r {
            let di = snf.diag[i].clone();
            let mut next = Vec::new();
            for rep in &reps {
                let mut k = Int::zero();
                while k < di {
                    let step = Rat::new(k.clone(), di.clone());
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
        let base_coeff = frame.denominators.iter().fold(
            &frame.coeff / rat_int(&d.abs()),
            |acc, (_, mult)| -acc / rat_int(&factorial(*mult as usize)),
        );
        for xi in reps {
            let mut coeff = base_coeff.clone();
            let mut fs = Vec::with_capacity(r);
            for j in 0..r {
                let (f, flip) = Factor::canonical(frame.denominators[j].1, &us[j], &xi[j]);
                if flip {
                    coeff = -coeff;
                }
                fs.push(f);
            }
            *self.out.entry(sorted(fs)).or_insert_with(Rat::zero) += coeff;
        }
    }
}

/// Replaces every denominator by its primitive direction (collecting the
/// scalar into the coefficient and merging parallel ones), and drops
/// excluded forms already implied by a denominator.
fn merge_parallel(frame: Frame) -> Frame {
    let mut coeff = frame.coeff;
    let mut dens: Vec<(IntVec, u32)> = Vec::new();
    for (p, mult) in frame.denominators {
        let u = normalize_primitive(p.clone());
        let j = u.iter().position(|x| !x.is_zero()).expect("nonzero");
        let q = Rat::new(p[j].clone(), u[j].clone());
        coeff /= num::pow(q, mult as usize);
        match dens.iter_mut().find(|(w, _)| *w == u) {
            Some(entry) => entry.1 += mult,
            None => dens.push((u, mult)),
        }
    }
    let mut excluded: Vec<IntVec> = Vec::new();
    for q in frame.excluded {
        let u = normalize_primitive(q);
        if !dens.iter().any(|(w, _)| *w == u) && !excluded.contains(&u) {
            excluded.push(u);
        }
    }
    Frame {
        embedding: frame.embedding,
        denominators: dens,
        excluded,
        coeff,
    }
}

/// First k with p_k in the span of p_0..p_{k-1}, and the coefficients.
fn first_dependent(dens: &[(IntVec, u32)]) -> Option<(usize, RatVec)> {
    let ps: Vec<RatVec> = dens.iter().map(|(p, _)| to_rat_vec(p)).collect();
    (1..ps.len()).find_map(|k| solve_in_span(&ps[..k], &ps[k]).map(|alpha| (k, alpha)))
}

/// Σ over γ ∈ E·Z^r with ⟨γ,a⟩ ≠ 0 for all `forms` of e^{2iπ⟨γ,v⟩}/∏ 2iπ⟨γ,a⟩,
/// for an embedding E whose columns are lattice covectors.
pub fn lattice_series(dim: usize, embedding: &[IntVec], forms: &[IntVec]) -> BernoulliExpr {
    let denominators = forms
        .iter()
        .map(|a| (embedding.iter().map(|e| dot_int(e, a)).collect(), 1u32))
        .collect();
    let mut ex = Expander {
        dim,
        out: BTreeMap::new(),
    };
    ex.expand(Frame {
        embedding: embedding.to_vec(),
        denominators,
        excluded: Vec::new(),
        coeff: Rat::one(),
    });
    BernoulliExpr::from_map(dim, ex.out)
}

/// Closed form of W(X).
pub fn w_series(c: &Configuration) -> BernoulliExpr {
    let n = c.dim();
    let identity: Vec<IntVec> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect();
    lattice_series(n, &identity, c.vectors())
}

fn check_member(arr: &Arrangement, s: &AdmissibleSubspace) -> Result<()> {
    let found = arr.find_subspace(&arr.config().select(&s.basis))?;
    if found != s {
        return Err(Error::NonAdmissibleSubspace);
    }
    Ok(())
}

/// Closed form of W(X/s) as a function on V, through the quotient
/// lattice; the constant 1 for s = V.
pub fn w_quotient(arr: &Arrangement, s: &AdmissibleSubspace) -> Result<BernoulliExpr> {
    check_member(arr, s)?;
    let n = arr.config().dim();
    if s.dim == n {
        return Ok(BernoulliExpr::constant(n, Rat::one()));
    }
    Ok(w_quotient_local(s)?.pull_back(&s.quotient))
}

/// W(X/s) in the coordinates of the quotient lattice.
pub fn w_quotient_local(s: &AdmissibleSubspace) -> Result<BernoulliExpr> {
    let qc = Configuration::new(s.codim(), s.projected_list.clone())?;
    Ok(w_series(&qc))
}

/// W(X/s) summed directly over the sublattice Γ ∩ s^⊥ of Γ = Z^n.
pub fn w_quotient_direct(arr: &Arrangement, s: &AdmissibleSubspace) -> Result<BernoulliExpr> {
    check_member(arr, s)?;
    let c = arr.config();
    let n = c.dim();
    let embedding = integer_kernel(&c.select(&s.basis), n);
    Ok(lattice_series(n, &embedding, &c.select(&s.x_minus_s)))
}

/// Evaluates a Bernoulli expression; errors when a form is integral.
pub fn w_eval(e: &BernoulliExpr, v: &[Rat]) -> Result<Rat> {
    e.eval(v)
}

/// W([c_1ω, …, c_kω], g)(t) for the character g = z·ω*:
/// (1/∏c_i) · ζ^{[t]} · P_k({t}) with ζ = e^{2iπz}, P_1 = 1/(1 - ζ^{-1}),
/// P_k' = P_{k-1} and P_k(1) = ζ·P_k(0).
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedBernoulli1D {
    order: usize,
    twist: Rat,
    root_order: u64,
    root_power: i64,
    scale: Rat,
    /// Coefficients of P_k in the fractional part, low degree first.
    poly: Vec<Cyclo>,
}

pub fn w_twisted_1d(k: usize, z: &Rat, c_list: &[Int]) -> Result<TwistedBernoulli1D> {
    if z.is_integer() {
        return Err(Error::IntegerTwist(fmt_rat(z)));
    }
    if c_list.len() != k || k == 0 {
        return Err(Error::DimensionMismatch {
            expected: k.max(1),
            got: c_list.len(),
        });
    }
    if let Some(i) = c_list.iter().position(|c| c.is_zero()) {
        return Err(Error::ZeroVector(i));
    }
    let twist = frac(z);
    let m: u64 = twist.denom().try_into().map_err(|_| Error::IntegerTwist(fmt_rat(z)))?;
    let j: i64 = twist.numer().try_into().map_err(|_| Error::IntegerTwist(fmt_rat(z)))?;
    let zeta = Cyclo::zeta_pow(m, j);
    let one = Cyclo::one(m);
    let mut poly = vec![one.sub(&Cyclo::zeta_pow(m, -j)).inv().expect("z is not an integer")];
    let to_next = zeta.sub(&one).inv().expect("z is not an integer");
    for _ in 1..k {
        let prim: Vec<Cyclo> = std::iter::once(Cyclo::zero(m))
            .chain(
                poly.iter()
                    .enumerate()
                    .map(|(i, c)| c.scale(&Rat::new(Int::one(), Int::from(i + 1)))),
            )
            .collect();
        let total = prim.iter().fold(Cyclo::zero(m), |acc, c| acc.add(c));
        let mut next = prim;
        next[0] = total.mul(&to_next);
        poly = next;
    }
    let prod: Int = c_list.iter().product();
    Ok(TwistedBernoulli1D {
        order: k,
        twist,
        root_order: m,
        root_power: j,
        scale: Rat::new(Int::one(), prod),
        poly,
    })
}

impl TwistedBernoulli1D {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn twist(&self) -> &Rat {
        &self.twist
    }

    /// The order m of ζ = e^{2iπz} = ζ_m^j.
    pub fn root_order(&self) -> u64 {
        self.root_order
    }

    /// Coefficients of the polynomial part in {t}, low degree first.
    pub fn poly(&self) -> &[Cyclo] {
        &self.poly
    }

    pub fn eval(&self, t: &Rat) -> Result<Cyclo> {
        if t.is_integer() && self.order == 1 {
            return Err(Error::FormHitsInteger);
        }
        let whole = t.floor().to_integer();
        let f = t - Rat::from_integer(whole.clone());
        let m = Int::from(self.root_order);
        let power: i64 = (Int::from(self.root_power) * whole)
            .mod_floor(&m)
            .try_into()
            .expect("reduced below the root order");
        let mut acc = Cyclo::zero(self.root_order);
        for c in self.poly.iter().rev() {
            acc = acc.scale(&f).add(c);
        }
        Ok(acc
            .mul(&Cyclo::zeta_pow(self.root_order, power))
            .scale(&self.scale))
    }
}

impl fmt::Display for TwistedBernoulli1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} · z{}^({}·[t]) · (", fmt_rat(&self.scale), self.root_order, self.root_power)?;
        let mut first = true;
        for (i, c) in self.poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*{{t}}")?,
                _ => write!(f, "({c})*{{t}}^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

/// A Bernoulli expression times a polynomial, evaluated through its
/// polynomial pieces; each piece is expanded on first use and kept.
pub struct PiecewiseProduct<'a> {
    expr: &'a BernoulliExpr,
    factor: Poly,
    pieces: Mutex<HashMap<Vec<Int>, Arc<Poly>>>,
    chains: Mutex<HashMap<ChainKey, Arc<Vec<Poly>>>>,
}

/// Tope key and direction of a cached derivative chain.
type ChainKey = (Vec<Int>, RatVec);

impl<'a> PiecewiseProduct<'a> {
    pub fn new(expr: &'a BernoulliExpr, factor: Poly) -> Self {
        PiecewiseProduct {
            expr,
            factor,
            pieces: Mutex::new(HashMap::new()),
            chains: Mutex::new(HashMap::new()),
        }
    }

    /// Degree bound of every piece.
    pub fn degree(&self) -> usize {
        self.expr.degree() + self.factor.degree().unwrap_or(0)
    }

    fn piece(&self, key: Vec<Int>) -> Arc<Poly> {
        if let Some(p) = self.pieces.lock().get(&key) {
            return p.clone();
        }
        let p = Arc::new(self.expr.tope_poly(&key).mul(&self.factor));
        self.pieces.lock().insert(key, p.clone());
        p
    }
}

impl EvaluableFn for PiecewiseProduct<'_> {
    type Value = Rat;

    fn eval(&self, v: &[Rat]) -> Result<Rat> {
        self.piece(self.expr.tope_key(v)?).eval(v)
    }

    fn degree_bound(&self) -> usize {
        self.degree()
    }

    /// Integrates the stored piece exactly. The piece is identified at two
    /// interior points, which must agree.
    fn integrate_piece(&self, v: &[Rat], a: &[Rat], lo: &Rat, hi: &Rat) -> Option<Result<Rat>> {
        let len = hi - lo;
        let key_at = |theta: Rat| {
            let t = lo + &len * theta;
            let u: RatVec = v.iter().zip(a).map(|(x, y)| x - &t * y).collect();
            self.expr.tope_key(&u)
        };
        let (Ok(k1), Ok(k2)) = (key_at(Rat::new(1.into(), 3.into())), key_at(Rat::new(2.into(), 3.into()))) else {
            return None;
        };
        if k1 != k2 {
            return Some(Err(Error::MissedBreakpoint {
                lo: fmt_rat(lo),
                hi: fmt_rat(hi),
            }));
        }
        let chain_key = (k1, a.to_vec());
        let cached = self.chains.lock().get(&chain_key).cloned();
        let chain = match cached {
            Some(c) => c,
            None => match self.piece(chain_key.0.clone()).derivative_chain(a) {
                Ok(c) => {
                    let c = Arc::new(c);
                    self.chains.lock().insert(chain_key, c.clone());
                    c
                }
                Err(e) => return Some(Err(e)),
            },
        };
        let w: RatVec = v.iter().zip(a).map(|(x, y)| x - lo * y).collect();
        Some(line_integral(&chain, &w, &len))
    }
}
