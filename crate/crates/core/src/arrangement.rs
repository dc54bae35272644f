//! Combinatorics of a configuration X ⊂ Λ = Z^n: admissible hyperplanes
//! and subspaces, cocircuits, affine regularity, tope labels and zonotope
//! queries.

use std::collections::HashMap;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{
    det, dot_int, dot_int_rat, fmt_rat_vec, lattice_quotient, primitive_normal, rank_int, rref,
    to_rat_vec, Int, IntMat, IntVec, LatticeQuotient, Rat, RatVec,
};

pub const MAX_DIM: usize = 3;
pub const MAX_LEN: usize = 8;

/// The lattice rank n and the ordered multiset X of nonzero integer
/// vectors, which must span R^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    dim: usize,
    vectors: Vec<IntVec>,
}

impl Configuration {
    pub fn new(dim: usize, vectors: Vec<IntVec>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM || vectors.len() > MAX_LEN {
            return Err(Error::UnsupportedSize {
                dim,
                len: vectors.len(),
            });
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().all(|x| x.is_zero()) {
                return Err(Error::ZeroVector(i));
            }
        }
        let rank = rank_int(&vectors, dim);
        if rank < dim {
            return Err(Error::NonSpanningList { rank, dim });
        }
        Ok(Configuration { dim, vectors })
    }

    pub fn from_i64(dim: usize, vectors: &[&[i64]]) -> Result<Self> {
        Self::new(
            dim,
            vectors.iter().map(|v| v.iter().map(|&x| Int::from(x)).collect()).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[IntVec] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &IntVec {
        &self.vectors[i]
    }

    pub fn select(&self, indices: &[usize]) -> Vec<IntVec> {
        indices.iter().map(|&i| self.vectors[i].clone()).collect()
    }

    pub fn check_point(&self, v: &[Rat]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn check_indices(&self, indices: &[usize]) -> Result<()> {
        match indices.iter().find(|&&i| i >= self.len()) {
            Some(&index) => Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            }),
            None => Ok(()),
        }
    }

    /// Index sets of all bases σ ⊆ X (n-subsets with nonzero determinant),
    /// in lexicographic order.
    pub fn bases(&self) -> Vec<Vec<usize>> {
        combinations(self.len(), self.dim)
            .into_iter()
            .filter(|idx| !basis_det(self, idx).is_zero())
            .collect()
    }

    /// Σ over bases of |det σ|, the volume of the zonotope.
    pub fn zonotope_volume(&self) -> Rat {
        let total: Int = self.bases().iter().map(|b| basis_det(self, b).abs()).sum();
        Rat::from_integer(total)
    }
}

pub fn basis_det(c: &Configuration, idx: &[usize]) -> Int {
    let m = IntMat::from_cols(&c.select(idx), c.dim());
    det(&m).expect("square by construction")
}

/// All k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperplane {
    /// Primitive integer normal, first nonzero entry positive.
    pub normal: IntVec,
    /// Indices of the X-elements lying on the hyperplane.
    pub generators: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleSubspace {
    /// X-indices of a basis of s.
    pub basis: Vec<usize>,
    pub dim: usize,
    pub x_in_s: Vec<usize>,
    pub x_minus_s: Vec<usize>,
    pub quotient: LatticeQuotient,
    /// Images of X∖s in V/s ≅ R^(n - dim s).
    pub projected_list: Vec<IntVec>,
}

impl AdmissibleSubspace {
    pub fn codim(&self) -> usize {
        self.quotient.target_dim()
    }
}

/// Canonical label of the tope containing a regular point: one floor per
/// admissible hyperplane.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopeKey(pub Vec<Int>);

/// Admissible hyperplanes, admissible subspaces and cocircuits of a
/// configuration; built once and shared read-only.
#[derive(Clone, Debug)]
pub struct Arrangement {
    config: Configuration,
    hyperplanes: Vec<Hyperplane>,
    subspaces: Vec<AdmissibleSubspace>,
    subspace_keys: HashMap<Vec<RatVec>, usize>,
}

fn span_key(vectors: &[IntVec], dim: usize) -> Vec<RatVec> {
    let rows: Vec<RatVec> = vectors.iter().map(|v| to_rat_vec(v)).collect();
    let r = rref(&rows, dim);
    r.matrix.into_iter().take(r.rank).collect()
}

impl Arrangement {
    pub fn new(config: &Configuration) -> Self {
        let n = config.dim();
        let xs = config.vectors();

        let mut hyperplanes: Vec<Hyperplane> = Vec::new();
        for idx in combinations(xs.len(), n - 1) {
            let vs = config.select(&idx);
            let Ok(normal) = primitive_normal(&vs, n) else {
                continue;
            };
            if hyperplanes.iter().any(|h| h.normal == normal) {
                continue;
            }
            let generators = (0..xs.len())
                .filter(|&i| dot_int(&normal, &xs[i]).is_zero())
                .collect();
            hyperplanes.push(Hyperplane { normal, generators });
        }

        let mut found: Vec<(Vec<RatVec>, Vec<usize>)> = Vec::new();
        let mut seen: HashMap<Vec<RatVec>, ()> = HashMap::new();
        for mask in 0u32..(1u32 << xs.len()) {
            let idx: Vec<usize> = (0..xs.len()).filter(|i| mask & (1 << i) != 0).collect();
            let key = span_key(&config.select(&idx), n);
            if seen.insert(key.clone(), ()).is_none() {
                found.push((key, idx));
            }
        }
        found.sort_by_key(|(k, _)| k.len());

        let mut subspaces = Vec::new();
        let mut subspace_keys = HashMap::new();
        for (key, idx) in found {
            let mut basis: Vec<usize> = Vec::new();
            for &i in &idx {
                let mut trial = config.select(&basis);
                trial.push(xs[i].clone());
                if rank_int(&trial, n) == trial.len() {
                    basis.push(i);
                }
            }
            let dim = basis.len();
            let basis_vecs = config.select(&basis);
            let (x_in_s, x_minus_s): (Vec<usize>, Vec<usize>) = (0..xs.len()).partition(|&i| {
                let mut trial = basis_vecs.clone();
                trial.push(xs[i].clone());
                rank_int(&trial, n) == dim
            });
            let quotient =
                lattice_quotient(&basis_vecs, n).expect("basis is independent by construction");
            let projected_list = x_minus_s.iter().map(|&i| quotient.project(&xs[i])).collect();
            subspace_keys.insert(key, subspaces.len());
            subspaces.push(AdmissibleSubspace {
                basis,
                dim,
                x_in_s,
                x_minus_s,
                quotient,
                projected_list,
            });
        }

        Arrangement {
            config: config.clone(),
            hyperplanes,
            subspaces,
            subspace_keys,
        }
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn normals(&self) -> impl Iterator<Item = &IntVec> {
        self.hyperplanes.iter().map(|h| &h.normal)
    }

    /// All admissible subspaces R, ordered by dimension; {0} first, V last.
    pub fn subspaces(&self) -> &[AdmissibleSubspace] {
        &self.subspaces
    }

    /// The proper admissible subspaces R′ = R ∖ {V}.
    pub fn proper_subspaces(&self) -> &[AdmissibleSubspace] {
        &self.subspaces[..self.subspaces.len() - 1]
    }

    /// The admissible subspace spanned by the given X-elements.
    pub fn subspace_spanned_by(&self, indices: &[usize]) -> Result<&AdmissibleSubspace> {
        self.config.check_indices(indices)?;
        self.find_subspace(&self.config.select(indices))
    }

    /// The admissible subspace equal to the span of `vectors`, if any.
    pub fn find_subspace(&self, vectors: &[IntVec]) -> Result<&AdmissibleSubspace> {
        let key = span_key(vectors, self.config.dim());
        self.subspace_keys
            .get(&key)
            .map(|&i| &self.subspaces[i])
            .ok_or(Error::NonAdmissibleSubspace)
    }

    /// One cocircuit X∖H per admissible hyperplane H, as X-indices.
    pub fn cocircuits(&self) -> Vec<Vec<usize>> {
        self.hyperplanes
            .iter()
            .map(|h| {
                (0..self.config.len())
                    .filter(|i| !h.generators.contains(i))
                    .collect()
            })
            .collect()
    }

    pub fn is_long(&self, y: &[usize]) -> bool {
        let rest: Vec<IntVec> = (0..self.config.len())
            .filter(|i| !y.contains(i))
            .map(|i| self.config.vector(i).clone())
            .collect();
        rank_int(&rest, self.config.dim()) < self.config.dim()
    }

    pub fn is_regular(&self, v: &[Rat]) -> bool {
        self.normals().all(|eta| !dot_int_rat(eta, v).is_integer())
    }

    pub fn require_regular(&self, v: &[Rat]) -> Result<()> {
        self.config.check_point(v)?;
        if self.is_regular(v) {
            Ok(())
        } else {
            Err(Error::NonRegularPoint(fmt_rat_vec(v)))
        }
    }

    pub fn tope_key(&self, v: &[Rat]) -> Result<TopeKey> {
        self.require_regular(v)?;
        Ok(TopeKey(
            self.normals().map(|eta| dot_int_rat(eta, v).floor().to_integer()).collect(),
        ))
    }

    /// Membership in the closed zonotope of the X-elements `indices`, which
    /// must span V.
    pub fn zonotope_contains_sub(&self, indices: &[usize], v: &[Rat]) -> bool {
        let xs = self.config.vectors();
        self.normals().all(|eta| {
            let mut hi = Int::zero();
            let mut lo = Int::zero();
            for &i in indices {
                let p = dot_int(eta, &xs[i]);
                if p.is_positive() {
                    hi += p;
                } else {
                    lo += p;
                }
            }
            let x = dot_int_rat(eta, v);
            x >= Rat::from_integer(lo) && x <= Rat::from_integer(hi)
        })
    }

    pub fn zonotope_contains(&self, v: &[Rat]) -> bool {
        let all: Vec<usize> = (0..self.config.len()).collect();
        self.zonotope_contains_sub(&all, v)
    }

    /// Parameters t ∈ (lo, hi) where v - t·a meets a lattice translate of
    /// an admissible hyperplane; sorted and deduplicated.
    pub fn segment_breakpoints(&self, v: &[Rat], a: &[Rat], lo: &Rat, hi: &Rat) -> Result<Vec<Rat>> {
        self.config.check_point(v)?;
        self.config.check_point(a)?;
        let mut out = Vec::new();
        for eta in self.normals() {
            let x = dot_int_rat(eta, v);
            let p = dot_int_rat(eta, a);
            if p.is_zero() {
                if x.is_integer() {
                    return Err(Error::SegmentInsideArrangement);
                }
                continue;
            }
            // x - t p = k  ⇔  t = (x - k) / p
            let (ka, kb) = (&x - lo * &p, &x - hi * &p);
            let (kmin, kmax) = if ka < kb { (ka, kb) } else { (kb, ka) };
            let mut k = kmin.floor().to_integer();
            let top = kmax.ceil().to_integer();
            while k <= top {
                let t = (&x - Rat::from_integer(k.clone())) / &p;
                if &t > lo && &t < hi {
                    out.push(t);
                }
                k += 1;
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Integer points λ with v - λ in the bounding box of Z(Y).
    pub fn lattice_candidates(&self, indices: &[usize], v: &[Rat]) -> Vec<IntVec> {
        let n = self.config.dim();
        let xs = self.config.vectors();
        let ranges: Vec<(Int, Int)> = (0..n)
            .map(|i| {
                let mut lo = Int::zero();
                let mut hi = Int::zero();
                for &j in indices {
                    let c = &xs[j][i];
                    if c.is_positive() {
                        hi += c;
                    } else {
                        lo += c;
                    }
                }
                // v_i - hi <= λ_i <= v_i - lo
                let from = (&v[i] - Rat::from_integer(hi)).ceil().to_integer();
                let to = (&v[i] - Rat::from_integer(lo)).floor().to_integer();
                (from, to)
            })
            .collect();
        let mut out: Vec<IntVec> = vec![Vec::new()];
        for (from, to) in ranges {
            let mut next = Vec::new();
            for prefix in &out {
                let mut k = from.clone();
                while k <= to {
                    let mut p = prefix.clone();
                    p.push(k.clone());
                    next.push(p);
                    k += 1;
                }
            }
            out = next;
        }
        out
    }
}
