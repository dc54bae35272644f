//! Acceptance suite: one line per criterion, exit status 1 if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use boxcalc::arrangement::{Arrangement, Configuration};
use boxcalc::bernoulli::{w_eval, w_series};
use boxcalc::boxspline::{box_quadrature_oracle, BoxPlan};
use boxcalc::dm::dm_basis;
use boxcalc::exact::{rat, Rat, RatVec};
use boxcalc::identity::{
    random_regular_points, semidiscrete_eval, theorem1_check, theorem2_check_1d, toric_vertices,
    twisted_corollary_check, x_of_g, CharacterG,
};
use boxcalc::poly::{fit_polynomial, Poly};

const SEED: u64 = 20240611;

fn config(dim: usize, xs: &[&[i64]]) -> Configuration {
    Configuration::from_i64(dim, xs).unwrap()
}

fn matrix() -> Vec<(&'static str, Configuration)> {
    vec![
        ("[w]", config(1, &[&[1]])),
        ("[w,w]", config(1, &[&[1], &[1]])),
        ("[2w]", config(1, &[&[2]])),
        ("[w,w,w]", config(1, &[&[1], &[1], &[1]])),
        ("[e1,e2]", config(2, &[&[1, 0], &[0, 1]])),
        ("A2", config(2, &[&[1, 0], &[0, 1], &[1, 1]])),
        ("[e1,e2,e1+e2,e1-e2]", config(2, &[&[1, 0], &[0, 1], &[1, 1], &[1, -1]])),
        ("[e1,e2,e3,e1+e2+e3]", config(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]])),
    ]
}

fn p(s: &str, dim: usize) -> Poly {
    Poly::parse(s, dim).unwrap()
}

fn criterion_1() -> Result<String, String> {
    let mut checked = 0;
    for (name, c) in matrix() {
        let arr = Arrangement::new(&c);
        let points = random_regular_points(&arr, 20, SEED);
        for e in Poly::monomials_up_to(c.dim(), 3) {
            let f = Poly::monomial(e, Rat::one());
            let report = theorem1_check(&arr, &f, &points).map_err(|e| e.to_string())?;
            if let Some(bad) = report.points.iter().find(|r| !r.pass) {
                return Err(format!("{name}, f = {f}: {bad:?}"));
            }
            checked += report.points.len();
        }
    }
    Ok(format!("{checked} (configuration, monomial, point) cases exact"))
}

fn criterion_2() -> Result<String, String> {
    let a2 = config(2, &[&[1, 0], &[0, 1], &[1, 1]]);
    let w = w_series(&a2);
    let lin = |s: &str| p(s, 2);
    let sixth = rat(-1, 6);
    let upper = lin("1 + v1 - 2*v2").mul(&lin("v1 - 1 + v2")).mul(&lin("2*v1 - v2")).scale(&sixth);
    let lower = lin("v1 - 2*v2").mul(&lin("v1 - 1 + v2")).mul(&lin("2*v1 - 1 - v2")).scale(&sixth);
    for (label, expected, above) in [("v1 < v2", upper, true), ("v1 > v2", lower, false)] {
        let mut pts: Vec<RatVec> = Vec::new();
        for i in 1..40i64 {
            for j in 1..40i64 {
                let (x, y) = (rat(2 * i + 1, 83), rat(2 * j + 1, 83));
                if x != y && (x < y) == above {
                    pts.push(vec![x, y]);
                }
            }
        }
        let values: Vec<Rat> = pts.iter().map(|v| w_eval(&w, v).unwrap()).collect();
        let fit = fit_polynomial(2, 3, &pts, &values).ok_or(format!("{label}: not a cubic"))?;
        if fit != expected {
            return Err(format!("{label}: got {fit}, expected {expected}"));
        }
    }
    Ok("both tope polynomials coefficient-exact".into())
}

/// Bernoulli numbers from Σ_{j≤m} C(m+1, j) B_j = 0.
fn bernoulli_numbers(k: usize) -> Vec<Rat> {
    let binom = |n: usize, r: usize| -> Rat {
        (0..r).fold(Rat::one(), |acc, i| acc * rat((n - i) as i64, (i + 1) as i64))
    };
    let mut b = vec![Rat::one()];
    for m in 1..=k {
        let s: Rat = (0..m).map(|j| binom(m + 1, j) * &b[j]).sum();
        b.push(-s / binom(m + 1, m));
    }
    b
}

fn bernoulli_value(k: usize, x: &Rat) -> Rat {
    let b = bernoulli_numbers(k);
    let mut binom = Rat::one();
    let mut total = Rat::zero();
    for (j, bj) in b.iter().enumerate() {
        total += &binom * bj * num::pow::pow(x.clone(), k - j);
        binom *= rat((k - j) as i64, (j + 1) as i64);
    }
    total
}

fn criterion_3() -> Result<String, String> {
    for k in 1..=5usize {
        let xs: Vec<Vec<i64>> = vec![vec![1]; k];
        let refs: Vec<&[i64]> = xs.iter().map(|v| v.as_slice()).collect();
        let w = w_series(&config(1, &refs));
        let fact: i64 = (1..=k as i64).product();
        for num in (-30..60).filter(|x| x % 10 != 0) {
            let t = rat(num, 10);
            let floor = Rat::from_integer(t.floor().to_integer());
            let expected = -bernoulli_value(k, &(&t - floor)) / rat(fact, 1);
            let got = w_eval(&w, std::slice::from_ref(&t)).map_err(|e| e.to_string())?;
            if got != expected {
                return Err(format!("k = {k}, t = {t}: {got} != {expected}"));
            }
        }
    }
    let w1 = w_series(&config(1, &[&[1]]));
    let at = w_eval(&w1, &[rat(3, 10)]).map_err(|e| e.to_string())?;
    if at != rat(1, 5) {
        return Err(format!("W(X_1)(3/10) = {at}"));
    }
    Ok("k = 1..5 match, W(X_1)(3/10) = 1/5".into())
}

fn criterion_4() -> Result<String, String> {
    let one_count: usize = matrix()
        .par_iter()
        .map(|(name, c)| {
            let arr = Arrangement::new(c);
            let one = Poly::one(c.dim());
            for v in random_regular_points(&arr, 20, SEED + 1) {
                let s = semidiscrete_eval(&arr, &one, &v).map_err(|e| e.to_string())?;
                if !s.is_one() {
                    return Err(format!("{name} at {v:?}: {s}"));
                }
            }
            Ok(20)
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .sum();
    Ok(format!("{one_count} sums equal 1"))
}

fn det_i64(rows: &[Vec<i64>]) -> i64 {
    match rows.len() {
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => (0..3)
            .map(|j| {
                let minor: Vec<Vec<i64>> = rows[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| *x).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * rows[0][j] * det_i64(&minor)
            })
            .sum(),
        _ => unreachable!(),
    }
}

fn count_bases(c: &Configuration) -> usize {
    let xs: Vec<Vec<i64>> = c
        .vectors()
        .iter()
        .map(|v| v.iter().map(|x| x.to_i64().unwrap()).collect())
        .collect();
    let n = c.dim();
    (0u32..(1 << xs.len()))
        .filter(|m| m.count_ones() as usize == n)
        .filter(|m| {
            let rows: Vec<Vec<i64>> = (0..xs.len()).filter(|i| m & (1 << i) != 0).map(|i| xs[i].clone()).collect();
            det_i64(&rows) != 0
        })
        .count()
}

fn criterion_5() -> Result<String, String> {
    let mut checked = 0;
    let mut dims = Vec::new();
    for (name, c) in matrix() {
        let arr = Arrangement::new(&c);
        let basis = dm_basis(&arr).basis;
        let expected = count_bases(&c);
        if basis.len() != expected {
            return Err(format!("{name}: dim D(X) = {}, bases = {expected}", basis.len()));
        }
        dims.push(format!("{name}:{expected}"));
        let points = random_regular_points(&arr, 10, SEED + 2);
        let report = boxcalc::identity::dm_corollary_check(&arr, &points).map_err(|e| e.to_string())?;
        if let Some(bad) = report.points.iter().find(|r| !r.pass) {
            return Err(format!("{name}: {bad:?}"));
        }
        checked += report.points.len();
    }
    Ok(format!("{checked} cases exact; dim D(X) = #bases ({})", dims.join(" ")))
}

fn criterion_6() -> Result<String, String> {
    let two = config(1, &[&[2]]);
    let arr = Arrangement::new(&two);
    let g = CharacterG::parse("1/2").unwrap();
    let r = twisted_corollary_check(&arr, &g, &p("1", 1), &random_regular_points(&arr, 10, SEED + 3))
        .map_err(|e| e.to_string())?;
    if !r.pass {
        return Err(format!("[2w]: {:?}", r.points));
    }
    let mut cases = r.points.len();
    let c = config(2, &[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]);
    let arr = Arrangement::new(&c);
    let points = random_regular_points(&arr, 10, SEED + 3);
    let mut vertices = 0;
    for g in toric_vertices(&c).into_iter().filter(|g| !g.is_zero()) {
        vertices += 1;
        let sub = Configuration::new(2, c.select(&x_of_g(&c, &g))).map_err(|e| e.to_string())?;
        for q in dm_basis(&Arrangement::new(&sub)).basis {
            let r = twisted_corollary_check(&arr, &g, &q, &points).map_err(|e| e.to_string())?;
            if !r.pass {
                return Err(format!("g = {g}, p = {q}: {:?}", r.points));
            }
            cases += r.points.len();
        }
    }
    if vertices == 0 {
        return Err("no nonzero toric vertex found".into());
    }
    Ok(format!("{cases} sums vanish exactly ({vertices} nonzero toric vertices)"))
}

fn criterion_7() -> Result<String, String> {
    let mut cases = 0;
    for (name, c) in [
        ("[w]", config(1, &[&[1]])),
        ("[w,w]", config(1, &[&[1], &[1]])),
        ("[2w]", config(1, &[&[2]])),
    ] {
        let arr = Arrangement::new(&c);
        let points = random_regular_points(&arr, 10, SEED + 4);
        for g in ["1/3", "1/2"] {
            let g = CharacterG::parse(g).unwrap();
            for h in ["1", "t", "t^2"] {
                let h = p(h, 1);
                let r = theorem2_check_1d(&arr, &g, &h, &points).map_err(|e| e.to_string())?;
                if let Some(bad) = r.points.iter().find(|x| !x.pass) {
                    return Err(format!("{name}, g = {g}, h = {h}: {bad:?}"));
                }
                cases += r.points.len();
            }
        }
    }
    Ok(format!("{cases} cases exact"))
}

/// Midpoint-type sum of B(X)·test over a grid covering the zonotope.
fn pairing_sum(arr: &Arrangement, test: &Poly, k: i64, offsets: &[(i64, i64)], range: i64) -> f64 {
    let n = arr.config().dim();
    let all: Vec<usize> = (0..arr.config().len()).collect();
    let plan = BoxPlan::new(arr, &all).unwrap().without_cache();
    let cells = range * k;
    let total: Rat = (0..cells.pow(n as u32))
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let v: RatVec = (0..n)
                .map(|d| {
                    let i = rest % cells;
                    rest /= cells;
                    let (a, b) = offsets[d];
                    rat(i * b + a, k * b)
                })
                .collect();
            plan.eval(&v).unwrap() * test.eval(&v).unwrap()
        })
        .reduce(Rat::zero, |a, b| a + b);
    (total / rat(k.pow(n as u32), 1)).to_f64().unwrap()
}

fn criterion_8() -> Result<String, String> {
    let mut lines = Vec::new();
    let cases = [
        ("A2", config(2, &[&[1, 0], &[0, 1], &[1, 1]]), p("1 + v1 - 1/2*v2 + v1*v2", 2), 200, vec![(1, 2), (1, 4)], 2),
        ("[w,w,w]", config(1, &[&[1], &[1], &[1]]), p("1 + t + 1/3*t^2", 1), 1000, vec![(1, 2)], 3),
    ];
    for (name, c, test, k, offsets, range) in cases {
        let arr = Arrangement::new(&c);
        let all: Vec<usize> = (0..c.len()).collect();
        let sum = pairing_sum(&arr, &test, k, &offsets, range);
        let oracle = box_quadrature_oracle(&arr, &all, &test, 1_000_000);
        let err = (sum - oracle).abs();
        if err.is_nan() || err >= 1e-4 {
            return Err(format!("{name}: pairing {sum} vs oracle {oracle}, |diff| = {err:e}"));
        }
        lines.push(format!("{name} |diff| = {err:.1e}"));
    }
    Ok(lines.join(", "))
}

fn criterion_9() -> Result<String, String> {
    let c = config(1, &[&[1], &[1]]);
    let arr = Arrangement::new(&c);
    let report = theorem1_check(&arr, &p("t^2", 1), &[vec![rat(1, 2)]]).map_err(|e| e.to_string())?;
    let got = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    let golden: serde_json::Value =
        serde_json::from_str(include_str!("golden/worked_example.json")).map_err(|e| e.to_string())?;
    if got != golden {
        return Err(format!("report differs from golden file:\n{}", serde_json::to_string_pretty(&got).unwrap()));
    }
    Ok("difference 1/12 = RHS 1/12, term breakdown matches golden file".into())
}

fn main() {
    type Criterion = fn() -> Result<String, String>;
    let criteria: [(&str, Criterion); 9] = [
        ("difference formula, exact", criterion_1),
        ("A2 tope polynomials of W(X)", criterion_2),
        ("1-D Bernoulli closed forms", criterion_3),
        ("partition of unity", criterion_4),
        ("Dahmen-Micchelli corollary", criterion_5),
        ("twisted corollary", criterion_6),
        ("twisted difference formula in dimension 1", criterion_7),
        ("box-spline quadrature oracle", criterion_8),
        ("worked example golden file", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
