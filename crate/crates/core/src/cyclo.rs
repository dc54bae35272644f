//! Exact arithmetic in the cyclotomic field Q(ζ_m), ζ_m = e^{2iπ/m}.
//!
//! Elements are rational coefficient vectors on the power basis
//! 1, ζ, …, ζ^{φ(m)-1}, reduced modulo the m-th cyclotomic polynomial.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num::{One, Signed, Zero};
use parking_lot::Mutex;

use crate::exact::{fmt_rat, rat_to_f64, Rat};

fn trim(mut v: Vec<Rat>) -> Vec<Rat> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let get = |v: &[Rat], i: usize| v.get(i).cloned().unwrap_or_else(Rat::zero);
    trim((0..n).map(|i| get(a, i) - get(b, i)).collect())
}

fn poly_divrem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead = b.last().expect("nonempty").clone();
    let mut q = vec![Rat::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = r.last().expect("nonempty") / &lead;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] -= &c * bi;
        }
        q[shift] = c;
        r = trim(r);
        if r.is_empty() {
            break;
        }
    }
    (trim(q), r)
}

struct Field {
    m: u64,
    /// Monic cyclotomic polynomial, low degree first.
    modulus: Vec<Rat>,
}

fn cyclotomic(m: u64, cache: &mut HashMap<u64, Vec<Rat>>) -> Vec<Rat> {
    if let Some(p) = cache.get(&m) {
        return p.clone();
    }
    // x^m - 1 divided by Φ_d for every proper divisor d.
    let mut p = vec![Rat::zero(); m as usize + 1];
    p[0] = -Rat::one();
    p[m as usize] = Rat::one();
    for d in 1..m {
        if m.is_multiple_of(d) {
            let phi_d = cyclotomic(d, cache);
            let (q, r) = poly_divrem(&p, &phi_d);
            debug_assert!(r.is_empty());
            p = q;
        }
    }
    cache.insert(m, p.clone());
    p
}

fn field(m: u64) -> Arc<Field> {
    type Cache = (HashMap<u64, Arc<Field>>, HashMap<u64, Vec<Rat>>);
    static FIELDS: OnceLock<Mutex<Cache>> = OnceLock::new();
    let mut guard = FIELDS
        .get_or_init(|| Mutex::new((HashMap::new(), HashMap::new())))
        .lock();
    let (fields, polys) = &mut *guard;
    if let Some(f) = fields.get(&m) {
        return f.clone();
    }
    let modulus = cyclotomic(m, polys);
    let f = Arc::new(Field { m, modulus });
    fields.insert(m, f.clone());
    f
}

#[derive(Clone)]
pub struct Cyclo {
    field: Arc<Field>,
    coeffs: Vec<Rat>,
}

impl Cyclo {
    pub fn zero(m: u64) -> Self {
        assert!(m >= 1, "cyclotomic order must be positive");
        Cyclo {
            field: field(m),
            coeffs: Vec::new(),
        }
    }

    pub fn from_rat(m: u64, r: Rat) -> Self {
        let mut z = Self::zero(m);
        z.coeffs = trim(vec![r]);
        z
    }

    pub fn one(m: u64) -> Self {
        Self::from_rat(m, Rat::one())
    }

    /// ζ_m^j for any integer j.
    pub fn zeta_pow(m: u64, j: i64) -> Self {
        let e = j.rem_euclid(m as i64) as usize;
        let mut x = vec![Rat::zero(); e + 1];
        x[e] = Rat::one();
        Self::zero(m).reduced(x)
    }

    pub fn order(&self) -> u64 {
        self.field.m
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    fn reduced(&self, v: Vec<Rat>) -> Self {
        let (_, r) = poly_divrem(&v, &self.field.modulus);
        Cyclo {
            field: self.field.clone(),
            coeffs: r,
        }
    }

    fn same_field(&self, other: &Cyclo) {
        assert_eq!(self.field.m, other.field.m, "mixing cyclotomic fields");
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Cyclo) -> Cyclo {
        self.same_field(other);
        let neg: Vec<Rat> = other.coeffs.iter().map(|c| -c).collect();
        Cyclo {
            field: self.field.clone(),
            coeffs: poly_sub(&self.coeffs, &neg),
        }
    }

    pub fn sub(&self, other: &Cyclo) -> Cyclo {
        self.same_field(other);
        Cyclo {
            field: self.field.clone(),
            coeffs: poly_sub(&self.coeffs, &other.coeffs),
        }
    }

    pub fn neg(&self) -> Cyclo {
        self.scale(&-Rat::one())
    }

    pub fn mul(&self, other: &Cyclo) -> Cyclo {
        self.same_field(other);
        self.reduced(poly_mul(&self.coeffs, &other.coeffs))
    }

    pub fn scale(&self, c: &Rat) -> Cyclo {
        Cyclo {
            field: self.field.clone(),
            coeffs: trim(self.coeffs.iter().map(|x| x * c).collect()),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Cyclo> {
        if self.is_zero() {
            return None;
        }
        // Extended Euclid: track s with s*self ≡ r (mod Φ).
        let (mut r0, mut r1) = (self.field.modulus.clone(), self.coeffs.clone());
        let (mut s0, mut s1): (Vec<Rat>, Vec<Rat>) = (Vec::new(), vec![Rat::one()]);
        while r1.len() > 1 {
            let (q, r) = poly_divrem(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        // r1 is a nonzero constant because Φ_m is irreducible.
        let c = r1[0].recip();
        let s: Vec<Rat> = s1.iter().map(|x| x * &c).collect();
        Some(self.reduced(s))
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let m = self.field.m as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / m;
            let x = rat_to_f64(c);
            re += x * ang.cos();
            im += x * ang.sin();
        }
        (re, im)
    }

    /// The value as a rational when it lies in Q.
    pub fn as_rat(&self) -> Option<Rat> {
        match self.coeffs.len() {
            0 => Some(Rat::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        self.field.m == other.field.m && self.coeffs == other.coeffs
    }
}

impl Eq for Cyclo {}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclo<{}>({self})", self.field.m)
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let a = c.abs();
            let z = match k {
                0 => String::new(),
                1 => format!("z{}", self.field.m),
                _ => format!("z{}^{k}", self.field.m),
            };
            if z.is_empty() {
                write!(f, "{}", fmt_rat(&a))?;
            } else if a.is_one() {
                write!(f, "{z}")?;
            } else {
                write!(f, "{}*{z}", fmt_rat(&a))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn cyclotomic_polynomials() {
        let mut cache = HashMap::new();
        let phi = |m| cyclotomic(m, &mut HashMap::new());
        assert_eq!(cyclotomic(1, &mut cache), vec![rat(-1, 1), rat(1, 1)]);
        assert_eq!(phi(2), vec![rat(1, 1), rat(1, 1)]);
        assert_eq!(phi(3), vec![rat(1, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(phi(4), vec![rat(1, 1), rat(0, 1), rat(1, 1)]);
        assert_eq!(phi(6), vec![rat(1, 1), rat(-1, 1), rat(1, 1)]);
        assert_eq!(phi(12).len(), 5);
    }

    #[test]
    fn roots_of_unity() {
        for m in 1..=12u64 {
            let z = Cyclo::zeta_pow(m, 1);
            let mut p = Cyclo::one(m);
            for _ in 0..m {
                p = p.mul(&z);
            }
            assert_eq!(p, Cyclo::one(m), "ζ_{m}^{m} = 1");
            // Σ_k ζ^k = 0 for m > 1.
            let s = (0..m as i64).fold(Cyclo::zero(m), |acc, k| acc.add(&Cyclo::zeta_pow(m, k)));
            assert_eq!(s.is_zero(), m > 1);
        }
        assert_eq!(Cyclo::zeta_pow(2, 1), Cyclo::from_rat(2, rat(-1, 1)));
        assert_eq!(Cyclo::zeta_pow(6, -1), Cyclo::zeta_pow(6, 5));
    }

    #[test]
    fn inverses() {
        for m in [2u64, 3, 4, 5, 6, 8] {
            let x = Cyclo::one(m).sub(&Cyclo::zeta_pow(m, 1)).add(&Cyclo::zeta_pow(m, 2).scale(&rat(3, 7)));
            if x.is_zero() {
                continue;
            }
            let y = x.inv().unwrap();
            assert_eq!(x.mul(&y), Cyclo::one(m));
        }
        assert!(Cyclo::zero(3).inv().is_none());
    }

    #[test]
    fn complex_embedding() {
        let (re, im) = Cyclo::zeta_pow(3, 1).to_complex();
        assert!((re + 0.5).abs() < 1e-12);
        assert!((im - 3f64.sqrt() / 2.0).abs() < 1e-12);
        // 1/(1 - ζ_2^{-1}) = 1/2
        let d = Cyclo::one(2).sub(&Cyclo::zeta_pow(2, -1)).inv().unwrap();
        assert_eq!(d.as_rat(), Some(rat(1, 2)));
    }
}
