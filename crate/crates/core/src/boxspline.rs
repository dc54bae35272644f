//! Pointwise box-spline evaluation and convolution with box splines.
//!
//! Both rest on one primitive: integrating t ↦ F(v - t·a) over [0, 1] when
//! F is piecewise polynomial relative to the affine arrangement. The
//! segment is cut at the arrangement's breakpoints and each piece is
//! integrated by an exact interpolatory rule with enough nodes for the
//! declared degree bound.

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use num::{One, Signed, ToPrimitive, Zero};
use parking_lot::Mutex;

use crate::arrangement::{basis_det, Arrangement};
use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::exact::{fmt_rat, rank_int, rat_to_f64, solve_in_span, to_rat_vec, Int, IntVec, Rat, RatVec};
use crate::poly::{integrate_1d, lagrange_1d, line_integral, Poly};

/// Values a piecewise function may take: anything closed under addition
/// and rational scaling.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn scaled(&self, c: &Rat) -> Self;
}

impl Scalar for Rat {
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn scaled(&self, c: &Rat) -> Self {
        self * c
    }
}

impl Scalar for Cyclo {
    fn zero_like(&self) -> Self {
        Cyclo::zero(self.order())
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn scaled(&self, c: &Rat) -> Self {
        self.scale(c)
    }
}

/// A function known only through its values at regular points, agreeing
/// on every tope with a polynomial of degree at most `degree_bound`.
pub trait EvaluableFn: Sync {
    type Value: Scalar;
    fn eval(&self, v: &[Rat]) -> Result<Self::Value>;
    fn degree_bound(&self) -> usize;

    /// ∫_lo^hi F(v - t·a) dt in closed form, for functions that know their
    /// polynomial piece on the open segment; `None` means interpolate.
    fn integrate_piece(&self, _v: &[Rat], _a: &[Rat], _lo: &Rat, _hi: &Rat) -> Option<Result<Self::Value>> {
        None
    }
}

impl EvaluableFn for Poly {
    type Value = Rat;
    fn eval(&self, v: &[Rat]) -> Result<Rat> {
        Poly::eval(self, v)
    }
    fn degree_bound(&self) -> usize {
        self.degree().unwrap_or(0)
    }
    fn integrate_piece(&self, v: &[Rat], a: &[Rat], lo: &Rat, hi: &Rat) -> Option<Result<Rat>> {
        let w: RatVec = v.iter().zip(a).map(|(x, y)| x - lo * y).collect();
        Some(self.derivative_chain(a).and_then(|chain| line_integral(&chain, &w, &(hi - lo))))
    }
}

/// Wraps a closure together with its degree bound.
pub struct FnEval<F> {
    f: F,
    degree: usize,
}

impl<F> FnEval<F> {
    pub fn new(degree: usize, f: F) -> Self {
        FnEval { f, degree }
    }
}

impl<F, T> EvaluableFn for FnEval<F>
where
    F: Fn(&[Rat]) -> Result<T> + Sync,
    T: Scalar,
{
    type Value = T;
    fn eval(&self, v: &[Rat]) -> Result<T> {
        (self.f)(v)
    }
    fn degree_bound(&self) -> usize {
        self.degree
    }
}

/// Interpolatory rule on [0, 1]: nodes, weights ∫₀¹ L_i, and one extra
/// guard abscissa with the Lagrange values used to confirm that a piece
/// really is polynomial.
struct Rule {
    nodes: Vec<Rat>,
    weights: Vec<Rat>,
    guard: Rat,
    guard_coeffs: Vec<Rat>,
}

impl Rule {
    fn build(nodes: Vec<Rat>, guard: Rat) -> Rule {
        let mut weights = Vec::with_capacity(nodes.len());
        let mut guard_coeffs = Vec::with_capacity(nodes.len());
        for i in 0..nodes.len() {
            let unit: Vec<Rat> = (0..nodes.len())
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect();
            let l = lagrange_1d(&nodes, &unit).expect("nodes are distinct");
            weights.push(integrate_1d(&l, &Rat::zero(), &Rat::one()));
            guard_coeffs.push(l.eval(&guard));
        }
        Rule {
            nodes,
            weights,
            guard,
            guard_coeffs,
        }
    }

    /// Nodes (i+1)/(d+2), guard 1/(2(d+2)); retry `j` shifts everything
    /// by j/(7919(d+2)).
    fn for_degree(d: usize, retry: u32) -> Rule {
        let den = Int::from(d as u64 + 2);
        let shift = Rat::new(Int::from(retry), Int::from(7919u32) * &den);
        let nodes = (0..=d)
            .map(|i| Rat::new(Int::from(i as u64 + 1), den.clone()) + &shift)
            .collect();
        let guard = Rat::new(Int::one(), Int::from(2u32) * &den) + &shift;
        Rule::build(nodes, guard)
    }

    fn cached(d: usize) -> Arc<Rule> {
        static RULES: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
        let mut rules = RULES.get_or_init(|| Mutex::new(HashMap::new())).lock();
        rules
            .entry(d)
            .or_insert_with(|| Arc::new(Rule::for_degree(d, 0)))
            .clone()
    }
}

const NODE_RETRIES: u32 = 8;

fn point_on_segment(v: &[Rat], a: &[Rat], t: &Rat) -> RatVec {
    v.iter().zip(a).map(|(x, y)| x - t * y).collect()
}

fn integrate_piece<T, G>(v: &[Rat], a: &[Rat], lo: &Rat, hi: &Rat, d: usize, g: &G) -> Result<T>
where
    T: Scalar,
    G: Fn(&[Rat]) -> Result<T> + ?Sized,
{
    let len = hi - lo;
    for retry in 0..=NODE_RETRIES {
        let owned;
        let rule: &Rule = if retry == 0 {
            owned = Rule::cached(d);
            &owned
        } else {
            owned = Arc::new(Rule::for_degree(d, retry));
            &owned
        };
        let at = |theta: &Rat| g(&point_on_segment(v, a, &(lo + &len * theta)));
        let values: Result<Vec<T>> = rule.nodes.iter().map(at).collect();
        let values = match values {
            Ok(vals) => vals,
            Err(Error::NonRegularPoint(_)) => continue,
            Err(e) => return Err(e),
        };
        let guard_value = match at(&rule.guard) {
            Ok(x) => x,
            Err(Error::NonRegularPoint(_)) => continue,
            Err(e) => return Err(e),
        };
        let zero = values[0].zero_like();
        let predicted = values
            .iter()
            .zip(&rule.guard_coeffs)
            .fold(zero.clone(), |acc, (x, c)| acc.plus(&x.scaled(c)));
        if predicted != guard_value {
            return Err(Error::MissedBreakpoint {
                lo: fmt_rat(lo),
                hi: fmt_rat(hi),
            });
        }
        let sum = values
            .iter()
            .zip(&rule.weights)
            .fold(zero, |acc, (x, w)| acc.plus(&x.scaled(w)));
        return Ok(sum.scaled(&len));
    }
    Err(Error::NodeSelection {
        lo: fmt_rat(lo),
        hi: fmt_rat(hi),
    })
}

/// ∫₀¹ g(v - t·a) dt for g piecewise polynomial of degree ≤ `d` relative
/// to the affine arrangement.
pub fn integrate_segment<T, G>(arr: &Arrangement, v: &[Rat], a: &[Int], d: usize, g: &G) -> Result<T>
where
    T: Scalar,
    G: Fn(&[Rat]) -> Result<T> + ?Sized,
{
    let a = to_rat_vec(a);
    sum_over_pieces(arr, v, &a, |lo, hi| integrate_piece(v, &a, lo, hi, d, g))
}

/// Splits [0, 1] at the arrangement breakpoints of t ↦ v - t·a and adds
/// up `piece(lo, hi)`.
fn sum_over_pieces<T, P>(arr: &Arrangement, v: &[Rat], a: &[Rat], piece: P) -> Result<T>
where
    T: Scalar,
    P: Fn(&Rat, &Rat) -> Result<T>,
{
    let (zero, one) = (Rat::zero(), Rat::one());
    let mut cuts = vec![zero.clone()];
    cuts.extend(arr.segment_breakpoints(v, a, &zero, &one)?);
    cuts.push(one);
    let mut total: Option<T> = None;
    for w in cuts.windows(2) {
        let piece = piece(&w[0], &w[1])?;
        total = Some(match total {
            None => piece,
            Some(t) => t.plus(&piece),
        });
    }
    Ok(total.expect("at least one piece"))
}

/// (B(Y) *_c F)(v) = (I_{y_1} ∘ … ∘ I_{y_k} F)(v). `y` indexes the
/// configuration and need not span; the empty list returns F(v).
pub fn box_convolve_eval<F: EvaluableFn>(
    arr: &Arrangement,
    y: &[usize],
    f: &F,
    v: &[Rat],
) -> Result<F::Value> {
    arr.require_regular(v)?;
    arr.config().check_indices(y)?;
    let ys = arr.config().select(y);
    convolve_rec(arr, &ys, f, v)
}

fn convolve_rec<F: EvaluableFn>(arr: &Arrangement, ys: &[IntVec], f: &F, v: &[Rat]) -> Result<F::Value> {
    match ys.split_first() {
        None => f.eval(v),
        Some((a, [])) => {
            let d = f.degree_bound();
            let ar = to_rat_vec(a);
            sum_over_pieces(arr, v, &ar, |lo, hi| match f.integrate_piece(v, &ar, lo, hi) {
                Some(r) => r,
                None => integrate_piece(v, &ar, lo, hi, d, &|u: &[Rat]| f.eval(u)),
            })
        }
        Some((a, rest)) => {
            let d = f.degree_bound() + rest.len();
            integrate_segment(arr, v, a, d, &|u: &[Rat]| convolve_rec(arr, rest, f, u))
        }
    }
}

/// Evaluation plan for the density of B(Y), Y spanning: a greedy basis σ
/// (first independent elements in list order) and the rest peeled off
/// left to right, each peel being one segment integral.
pub struct BoxPlan<'a> {
    arr: &'a Arrangement,
    levels: Vec<Vec<usize>>,
    peel: Vec<IntVec>,
    /// Columns of σ^{-1}: coordinates of the unit vectors in the basis σ.
    inverse: Vec<RatVec>,
    density: Rat,
    cache: Option<Mutex<HashMap<(usize, RatVec), Rat>>>,
}

impl<'a> BoxPlan<'a> {
    pub fn new(arr: &'a Arrangement, y: &[usize]) -> Result<Self> {
        let config = arr.config();
        config.check_indices(y)?;
        let n = config.dim();
        let rank = rank_int(&config.select(y), n);
        if rank < n {
            return Err(Error::NonSpanningList { rank, dim: n });
        }
        let mut basis = Vec::new();
        let mut rest = Vec::new();
        for &i in y {
            let mut trial = config.select(&basis);
            trial.push(config.vector(i).clone());
            if basis.len() < n && rank_int(&trial, n) == trial.len() {
                basis.push(i);
            } else {
                rest.push(i);
            }
        }
        let levels = (0..=rest.len())
            .map(|k| basis.iter().chain(&rest[k..]).copied().collect())
            .collect();
        let cols: Vec<RatVec> = config.select(&basis).iter().map(|b| to_rat_vec(b)).collect();
        let inverse = (0..n)
            .map(|j| {
                let e: RatVec = (0..n).map(|i| if i == j { Rat::one() } else { Rat::zero() }).collect();
                solve_in_span(&cols, &e).expect("basis spans")
            })
            .collect();
        let density = Rat::new(Int::one(), basis_det(config, &basis).abs());
        Ok(BoxPlan {
            arr,
            levels,
            peel: config.select(&rest),
            inverse,
            density,
            cache: Some(Mutex::new(HashMap::new())),
        })
    }

    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn eval(&self, v: &[Rat]) -> Result<Rat> {
        self.arr.require_regular(v)?;
        self.level(0, v)
    }

    fn level(&self, k: usize, u: &[Rat]) -> Result<Rat> {
        if k == self.peel.len() {
            return Ok(self.base(u));
        }
        if !self.arr.zonotope_contains_sub(&self.levels[k], u) {
            return Ok(Rat::zero());
        }
        let key = (k, u.to_vec());
        if let Some(cache) = &self.cache {
            if let Some(x) = cache.lock().get(&key) {
                return Ok(x.clone());
            }
        }
        let d = self.levels[k + 1].len() - self.arr.config().dim();
        let value = integrate_segment(self.arr, u, &self.peel[k], d, &|w: &[Rat]| self.level(k + 1, w))?;
        if let Some(cache) = &self.cache {
            cache.lock().insert(key, value.clone());
        }
        Ok(value)
    }

    /// 1/|det σ| on the open parallelepiped spanned by σ.
    fn base(&self, u: &[Rat]) -> Rat {
        let inside = (0..u.len()).all(|i| {
            let c: Rat = self.inverse.iter().zip(u).map(|(col, x)| &col[i] * x).sum();
            c.is_positive() && c < Rat::one()
        });
        if inside {
            self.density.clone()
        } else {
            Rat::zero()
        }
    }
}

/// The density of B(Y) at a regular point; Y must span.
pub fn box_eval(arr: &Arrangement, y: &[usize], v: &[Rat]) -> Result<Rat> {
    BoxPlan::new(arr, y)?.eval(v)
}

fn poly_eval_f64(p: &Poly, x: &[f64]) -> f64 {
    p.terms()
        .map(|(e, c)| {
            e.iter()
                .zip(x)
                .fold(rat_to_f64(c), |acc, (&k, &xi)| acc * xi.powi(k as i32))
        })
        .sum()
}

/// Midpoint-rule estimate of ∫_{[0,1]^Y} test(Σ t_i y_i) dt, the pairing
/// of B(Y) with `test`, on a tensor grid of about `samples` points.
pub fn box_quadrature_oracle(arr: &Arrangement, y: &[usize], test: &Poly, samples: usize) -> f64 {
    let config = arr.config();
    let ys: Vec<Vec<f64>> = config
        .select(y)
        .iter()
        .map(|a| a.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let n = config.dim();
    let k = ys.len();
    if k == 0 {
        return poly_eval_f64(test, &vec![0.0; n]);
    }
    let mut m = (samples as f64).powf(1.0 / k as f64).round() as usize;
    while m.pow(k as u32) > samples && m > 1 {
        m -= 1;
    }
    let m = m.max(1);
    let h = 1.0 / m as f64;
    let total = m.pow(k as u32);
    let mut sum = 0.0;
    let mut idx = vec![0usize; k];
    let mut point = vec![0.0; n];
    for _ in 0..total {
        point.iter_mut().for_each(|p| *p = 0.0);
        for (j, a) in ys.iter().enumerate() {
            let t = (idx[j] as f64 + 0.5) * h;
            for (p, ai) in point.iter_mut().zip(a) {
                *p += t * ai;
            }
        }
        sum += poly_eval_f64(test, &point);
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
    }
    sum / total as f64
}
