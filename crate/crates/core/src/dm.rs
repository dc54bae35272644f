//! The Dahmen–Micchelli space D(X): polynomials killed by ∂_Y for every
//! cocircuit Y.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::exact::{kernel_basis, rref, Rat, RatVec};
use crate::poly::{Monomial, Poly};

#[derive(Clone, Debug, PartialEq)]
pub struct DmBasis {
    pub degree_bound: usize,
    pub basis: Vec<Poly>,
}

impl DmBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn derivative_along(arr: &Arrangement, y: &[usize], p: &Poly) -> Result<Poly> {
    let mut out = p.clone();
    for &i in y {
        out = out.dir_derivative(arr.config().vector(i))?;
        if out.is_zero() {
            break;
        }
    }
    Ok(out)
}

/// Basis of D(X), computed inside polynomials of degree ≤ N - n.
pub fn dm_basis(arr: &Arrangement) -> DmBasis {
    let c = arr.config();
    dm_basis_up_to(arr, c.len() - c.dim())
}

/// Kernel of p ↦ (∂_Y p)_Y on polynomials of degree ≤ `bound`, echelonized
/// with respect to the highest monomial in graded-lex order. Basis
/// elements are monic in their leading monomial and listed by increasing
/// leading monomial.
pub fn dm_basis_up_to(arr: &Arrangement, bound: usize) -> DmBasis {
    let n = arr.config().dim();
    let mut monos = Poly::monomials_up_to(n, bound);
    // highest graded-lex monomial first, so pivots are leading monomials
    monos.reverse();
    let cocircuits = arr.cocircuits();
    let mut row_index: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
    let mut columns: Vec<Vec<(usize, Rat)>> = Vec::new();
    for e in &monos {
        let p = Poly::monomial(e.clone(), Rat::one());
        let mut col = Vec::new();
        for (ci, y) in cocircuits.iter().enumerate() {
            let d = derivative_along(arr, y, &p).expect("dimensions agree");
            for (m, coeff) in d.terms() {
                let next = row_index.len();
                let r = *row_index.entry((ci, m.clone())).or_insert(next);
                col.push((r, coeff.clone()));
            }
        }
        columns.push(col);
    }
    let rows: Vec<RatVec> = (0..row_index.len())
        .map(|r| {
            let mut row = vec![Rat::zero(); monos.len()];
            for (j, col) in columns.iter().enumerate() {
                for (ri, x) in col {
                    if *ri == r {
                        row[j] = x.clone();
                    }
                }
            }
            row
        })
        .collect();
    let kernel = if rows.is_empty() {
        (0..monos.len())
            .map(|j| (0..monos.len()).map(|i| if i == j { Rat::one() } else { Rat::zero() }).collect())
            .collect()
    } else {
        kernel_basis(&rows, monos.len())
    };
    let ech = rref(&kernel, monos.len());
    let mut basis: Vec<Poly> = ech.matrix[..ech.rank]
        .iter()
        .map(|row| {
            let mut p = Poly::zero(n);
            for (j, x) in row.iter().enumerate() {
                p.add_term(monos[j].clone(), x.clone());
            }
            p
        })
        .collect();
    basis.reverse();
    DmBasis {
        degree_bound: bound,
        basis,
    }
}

/// True iff ∂_Y p = 0 for every cocircuit Y.
pub fn is_in_dm(arr: &Arrangement, p: &Poly) -> Result<bool> {
    if p.dim() != arr.config().dim() {
        return Err(Error::DimensionMismatch {
            expected: arr.config().dim(),
            got: p.dim(),
        });
    }
    for y in arr.cocircuits() {
        if !derivative_along(arr, &y, p)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
