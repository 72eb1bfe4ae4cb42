//! Sparse multivariate polynomials over a [`FieldSpec`].
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors, so iteration order
//! (and therefore evaluation, rendering and every downstream count) is
//! deterministic. Evaluation volume dwarfs polynomial size in this crate, so
//! [`PolyEvaluator`] caches variable powers per point, and quadratic forms
//! get a Gram-matrix fast path; both paths must agree exactly.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::field::{Embedding, FieldElement, FieldSpec};
use crate::linalg::{matrix_rank, LinalgError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient or coordinate from a different field (sizes {0} and {1})")]
    MixedFields(u64, u64),
    #[error("exponent vector has length {got}, expected {expected}")]
    BadExponentVector { expected: usize, got: usize },
    #[error("polynomial is not homogeneous of degree {0}")]
    NotHomogeneous(u32),
    #[error("zero polynomial not allowed here")]
    ZeroPolynomial,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A sparse polynomial: a map from exponent vectors to nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u16>, FieldElement>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial from (exponent vector, coefficient) pairs.
    /// Duplicate exponent vectors are combined; zero coefficients dropped.
    pub fn from_terms<I>(field: &FieldSpec, nvars: usize, terms: I) -> Result<Poly, PolyError>
    where
        I: IntoIterator<Item = (Vec<u16>, FieldElement)>,
    {
        let mut map: BTreeMap<Vec<u16>, FieldElement> = BTreeMap::new();
        for (exps, coeff) in terms {
            if exps.len() != nvars {
                return Err(PolyError::BadExponentVector {
                    expected: nvars,
                    got: exps.len(),
                });
            }
            if coeff.field_size() != field.size() {
                return Err(PolyError::MixedFields(coeff.field_size(), field.size()));
            }
            let entry = map.entry(exps).or_insert_with(|| field.zero());
            *entry = field.add(*entry, coeff);
        }
        map.retain(|_, c| !c.is_zero());
        Ok(Poly { nvars, terms: map })
    }

    /// Convenience constructor with integer coefficients.
    pub fn from_int_terms(
        field: &FieldSpec,
        nvars: usize,
        terms: &[(&[u16], i64)],
    ) -> Result<Poly, PolyError> {
        Poly::from_terms(
            field,
            nvars,
            terms.iter().map(|(e, c)| (e.to_vec(), field.from_int(*c))),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], FieldElement)> + '_ {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    /// Total degree; `None` encodes the degree of the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
    }

    /// True iff the polynomial is nonzero and every term has total degree `d`.
    pub fn is_homogeneous(&self, d: u32) -> bool {
        !self.terms.is_empty()
            && self
                .terms
                .keys()
                .all(|e| e.iter().map(|&x| x as u32).sum::<u32>() == d)
    }

    /// Exact evaluation by term summation. For hot loops prefer
    /// [`PolyEvaluator`], which reuses its power cache across points.
    pub fn evaluate(
        &self,
        field: &FieldSpec,
        point: &[FieldElement],
    ) -> Result<FieldElement, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        for c in point {
            if c.field_size() != field.size() {
                return Err(PolyError::MixedFields(c.field_size(), field.size()));
            }
        }
        let mut eval = PolyEvaluator::new(field, self);
        Ok(eval.eval(point))
    }

    /// The vector of formal partial derivatives.
    pub fn gradient(&self, field: &FieldSpec) -> Vec<Poly> {
        (0..self.nvars)
            .map(|v| {
                let terms = self.terms.iter().filter_map(|(exps, &coeff)| {
                    let e = exps[v];
                    if e == 0 {
                        return None;
                    }
                    let mut d = exps.clone();
                    d[v] = e - 1;
                    let scaled = field.mul(coeff, field.from_int(e as i64));
                    Some((d, scaled))
                });
                Poly::from_terms(field, self.nvars, terms).expect("derivative terms are valid")
            })
            .collect()
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, field: &FieldSpec, c: FieldElement) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|(e, &coeff)| (e.clone(), field.mul(coeff, c)));
        Poly::from_terms(field, self.nvars, terms).expect("scaled terms are valid")
    }

    /// Transports the polynomial along a field embedding.
    pub fn embed(&self, embedding: &Embedding) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|(e, &c)| (e.clone(), embedding.apply(c)));
        Poly::from_terms(embedding.target(), self.nvars, terms).expect("embedded terms are valid")
    }

    /// Renders with variable names `x0, x1, ...`; see `render_with` for
    /// custom names.
    pub fn render(&self, field: &FieldSpec) -> String {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("x{i}")).collect();
        self.render_with(field, &names)
    }

    pub fn render_with(&self, field: &FieldSpec, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (exps, &coeff) in &self.terms {
            let mut factors = Vec::new();
            let coeff_text = render_coeff(field, coeff);
            let is_constant_term = exps.iter().all(|&e| e == 0);
            if coeff_text != "1" || is_constant_term {
                factors.push(coeff_text);
            }
            for (v, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[v].clone()),
                    _ => factors.push(format!("{}^{}", names[v], e)),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join("+")
    }
}

fn render_coeff(field: &FieldSpec, c: FieldElement) -> String {
    if field.degree() == 1 {
        return c.value().to_string();
    }
    let coeffs = field.coeffs(c);
    if coeffs.iter().skip(1).all(|&x| x == 0) {
        coeffs[0].to_string()
    } else {
        format!("({})", field.render(c))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(exps, c)| {
                let vars: Vec<String> = exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(v, &e)| {
                        if e == 1 {
                            format!("x{v}")
                        } else {
                            format!("x{v}^{e}")
                        }
                    })
                    .collect();
                if vars.is_empty() {
                    format!("{}", c.value())
                } else if c.value() == 1 {
                    vars.join("*")
                } else {
                    format!("{}*{}", c.value(), vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Per-point evaluator with a reusable variable-power cache.
pub struct PolyEvaluator<'a> {
    field: &'a FieldSpec,
    nvars: usize,
    /// (coefficient, sparse exponent list) per term
    terms: Vec<(FieldElement, Vec<(usize, u16)>)>,
    /// powers[offsets[v] + e] = point[v]^e, filled per point
    offsets: Vec<usize>,
    max_exp: Vec<u16>,
    powers: Vec<FieldElement>,
}

impl<'a> PolyEvaluator<'a> {
    pub fn new(field: &'a FieldSpec, poly: &Poly) -> PolyEvaluator<'a> {
        let nvars = poly.nvars;
        let mut max_exp = vec![0u16; nvars];
        let mut terms = Vec::with_capacity(poly.terms.len());
        for (exps, &coeff) in &poly.terms {
            let sparse: Vec<(usize, u16)> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| (v, e))
                .collect();
            for &(v, e) in &sparse {
                max_exp[v] = max_exp[v].max(e);
            }
            terms.push((coeff, sparse));
        }
        let mut offsets = vec![0usize; nvars];
        let mut total = 0usize;
        for v in 0..nvars {
            offsets[v] = total;
            total += max_exp[v] as usize + 1;
        }
        PolyEvaluator {
            field,
            nvars,
            terms,
            offsets,
            max_exp,
            powers: vec![field.zero(); total],
        }
    }

    #[inline]
    pub fn eval(&mut self, point: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(point.len(), self.nvars);
        for v in 0..self.nvars {
            let off = self.offsets[v];
            self.powers[off] = self.field.one();
            for e in 1..=self.max_exp[v] as usize {
                self.powers[off + e] = self.field.mul(self.powers[off + e - 1], point[v]);
            }
        }
        let mut acc = self.field.zero();
        for (coeff, sparse) in &self.terms {
            let mut term = *coeff;
            for &(v, e) in sparse {
                term = self
                    .field
                    .mul(term, self.powers[self.offsets[v] + e as usize]);
            }
            acc = self.field.add(acc, term);
        }
        acc
    }
}

/// Symmetric Gram matrix of a homogeneous degree-2 form: `f(x) = x^T M x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramMatrix {
    size: usize,
    entries: Vec<FieldElement>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> FieldElement {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<FieldElement>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn rank(&self, field: &FieldSpec) -> usize {
        matrix_rank(field, &self.rows()).expect("Gram matrix is square")
    }

    /// `x^T M x` — the quadratic-form fast path.
    #[inline]
    pub fn evaluate(&self, field: &FieldSpec, x: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(x.len(), self.size);
        let mut acc = field.zero();
        for i in 0..self.size {
            if x[i].is_zero() {
                continue;
            }
            let mut row = field.zero();
            for j in 0..self.size {
                row = field.add(row, field.mul(self.entry(i, j), x[j]));
            }
            acc = field.add(acc, field.mul(x[i], row));
        }
        acc
    }

    /// The bilinear form `a^T M b`; `bilinear(t, p) = 0` says `p` lies on the
    /// polar line of `t`.
    #[inline]
    pub fn bilinear(
        &self,
        field: &FieldSpec,
        a: &[FieldElement],
        b: &[FieldElement],
    ) -> FieldElement {
        debug_assert!(a.len() == self.size && b.len() == self.size);
        let mut acc = field.zero();
        for i in 0..self.size {
            if a[i].is_zero() {
                continue;
            }
            let mut row = field.zero();
            for j in 0..self.size {
                row = field.add(row, field.mul(self.entry(i, j), b[j]));
            }
            acc = field.add(acc, field.mul(a[i], row));
        }
        acc
    }

    /// Reconstructs the quadratic form; used by the round-trip invariant.
    pub fn to_poly(&self, field: &FieldSpec) -> Poly {
        let n = self.size;
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                let coeff = if i == j {
                    self.entry(i, i)
                } else {
                    field.add(self.entry(i, j), self.entry(j, i))
                };
                if coeff.is_zero() {
                    continue;
                }
                let mut exps = vec![0u16; n];
                exps[i] += 1;
                exps[j] += 1;
                terms.push((exps, coeff));
            }
        }
        Poly::from_terms(field, n, terms).expect("gram terms are valid")
    }

    /// Are two Gram matrices scalar multiples of each other?
    pub fn proportional_to(&self, field: &FieldSpec, other: &GramMatrix) -> bool {
        if self.size != other.size {
            return false;
        }
        let Some(idx) = self.entries.iter().position(|e| !e.is_zero()) else {
            return other.entries.iter().all(|e| e.is_zero());
        };
        if other.entries[idx].is_zero() {
            return false;
        }
        let scale = field
            .div(other.entries[idx], self.entries[idx])
            .expect("pivot entry is nonzero");
        self.entries
            .iter()
            .zip(&other.entries)
            .all(|(&a, &b)| field.mul(a, scale) == b)
    }
}

/// Gram matrix of a homogeneous degree-2 polynomial; needs 2 invertible.
pub fn gram_matrix(field: &FieldSpec, f: &Poly) -> Result<GramMatrix, PolyError> {
    if !f.is_homogeneous(2) {
        return Err(PolyError::NotHomogeneous(2));
    }
    let n = f.nvars;
    let half = field
        .inv(field.from_int(2))
        .expect("2 is invertible in odd characteristic");
    let mut entries = vec![field.zero(); n * n];
    for (exps, coeff) in f.terms() {
        let vars: Vec<usize> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(v, _)| v)
            .collect();
        match vars.len() {
            1 => {
                let i = vars[0];
                entries[i * n + i] = coeff;
            }
            2 => {
                let (i, j) = (vars[0], vars[1]);
                let halved = field.mul(coeff, half);
                entries[i * n + j] = halved;
                entries[j * n + i] = halved;
            }
            _ => unreachable!("degree-2 terms touch at most two variables"),
        }
    }
    Ok(GramMatrix { size: n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn conic(field: &FieldSpec) -> Poly {
        // x0^2 + x1^2 - x2^2
        Poly::from_int_terms(
            field,
            3,
            &[(&[2, 0, 0], 1), (&[0, 2, 0], 1), (&[0, 0, 2], -1)],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        let f = conic(&f5);
        let at = |coords: &[i64]| {
            let pt: Vec<_> = coords.iter().map(|&c| f5.from_int(c)).collect();
            f.evaluate(&f5, &pt).unwrap()
        };
        assert_eq!(at(&[1, 0, 1]), f5.zero());
        assert_eq!(at(&[1, 1, 0]), f5.el(2));
        let xy = Poly::from_int_terms(&f5, 2, &[(&[1, 1], 1)]).unwrap();
        let pt = vec![f5.el(2), f5.el(3)];
        assert_eq!(xy.evaluate(&f5, &pt).unwrap(), f5.el(1));
    }

    #[test]
    fn evaluate_errors() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        let f7 = FieldSpec::new(7, 1).unwrap();
        let f = conic(&f5);
        assert!(matches!(
            f.evaluate(&f5, &[f5.el(1)]).unwrap_err(),
            PolyError::DimensionMismatch {
                expected: 3,
                got: 1
            }
        ));
        assert!(matches!(
            f.evaluate(&f5, &[f7.el(1), f7.el(0), f7.el(0)])
                .unwrap_err(),
            PolyError::MixedFields(7, 5)
        ));
    }

    #[test]
    fn gradient_examples() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        let sq = Poly::from_int_terms(&f5, 1, &[(&[2], 1)]).unwrap();
        let g = sq.gradient(&f5);
        assert_eq!(g[0], Poly::from_int_terms(&f5, 1, &[(&[1], 2)]).unwrap());

        // x0*x1 - x2^2 -> (x1, x0, -2 x2 = 3 x2)
        let f = Poly::from_int_terms(&f5, 3, &[(&[1, 1, 0], 1), (&[0, 0, 2], -1)]).unwrap();
        let g = f.gradient(&f5);
        assert_eq!(
            g[0],
            Poly::from_int_terms(&f5, 3, &[(&[0, 1, 0], 1)]).unwrap()
        );
        assert_eq!(
            g[1],
            Poly::from_int_terms(&f5, 3, &[(&[1, 0, 0], 1)]).unwrap()
        );
        assert_eq!(
            g[2],
            Poly::from_int_terms(&f5, 3, &[(&[0, 0, 1], 3)]).unwrap()
        );

        let c = Poly::from_int_terms(&f5, 2, &[(&[0, 0], 4)]).unwrap();
        assert!(c.gradient(&f5).iter().all(|p| p.is_zero()));
    }

    #[test]
    fn degree_and_homogeneity() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        let f = Poly::from_int_terms(&f5, 3, &[(&[2, 0, 0], 1), (&[0, 1, 1], 1)]).unwrap();
        assert_eq!(f.degree(), Some(2));
        assert!(f.is_homogeneous(2));
        let g = Poly::from_int_terms(&f5, 2, &[(&[2, 0], 1), (&[0, 1], 1)]).unwrap();
        assert!(!g.is_homogeneous(2));
        assert!(!Poly::zero(2).is_homogeneous(2));
        assert_eq!(Poly::zero(2).degree(), None);
    }

    #[test]
    fn gram_examples() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        let m = gram_matrix(&f5, &conic(&f5)).unwrap();
        assert_eq!(m.entry(0, 0), f5.el(1));
        assert_eq!(m.entry(1, 1), f5.el(1));
        assert_eq!(m.entry(2, 2), f5.el(4));
        assert_eq!(m.entry(0, 1), f5.zero());

        // (x0+x1)^2 = x0^2 + 2 x0 x1 + x1^2
        let sq = Poly::from_int_terms(&f5, 2, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]).unwrap();
        let m = gram_matrix(&f5, &sq).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m.entry(i, j), f5.one());
            }
        }
        assert_eq!(m.rank(&f5), 1);

        // x0*x1: off-diagonal 1/2 = 3 mod 5
        let xy = Poly::from_int_terms(&f5, 2, &[(&[1, 1], 1)]).unwrap();
        let m = gram_matrix(&f5, &xy).unwrap();
        assert_eq!(m.entry(0, 1), f5.el(3));
        assert_eq!(m.entry(1, 0), f5.el(3));
        assert_eq!(m.entry(0, 0), f5.zero());

        let nonhom = Poly::from_int_terms(&f5, 2, &[(&[2, 0], 1), (&[0, 1], 1)]).unwrap();
        assert!(matches!(
            gram_matrix(&f5, &nonhom).unwrap_err(),
            PolyError::NotHomogeneous(2)
        ));
    }

    #[test]
    fn gram_round_trip_random_forms() {
        use rand::prelude::*;
        for (p, k) in [(3u64, 1u32), (5, 1), (3, 2)] {
            let field = FieldSpec::new(p, k).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p * 100 + k as u64);
            for _ in 0..100 {
                let n = rng.random_range(2..4usize);
                let mut terms = Vec::new();
                for i in 0..n {
                    for j in i..n {
                        let c = rng.random_range(0..field.size());
                        let mut exps = vec![0u16; n];
                        exps[i] += 1;
                        exps[j] += 1;
                        terms.push((exps, field.el(c)));
                    }
                }
                let f = Poly::from_terms(&field, n, terms).unwrap();
                if f.is_zero() {
                    continue;
                }
                let m = gram_matrix(&field, &f).unwrap();
                assert_eq!(m.to_poly(&field), f);
            }
        }
    }

    #[test]
    fn gram_fast_path_agrees_with_sparse_eval() {
        let f9 = FieldSpec::new(3, 2).unwrap();
        let f = Poly::from_int_terms(
            &f9,
            3,
            &[(&[2, 0, 0], 1), (&[1, 1, 0], 2), (&[0, 0, 2], -1)],
        )
        .unwrap();
        let m = gram_matrix(&f9, &f).unwrap();
        let mut eval = PolyEvaluator::new(&f9, &f);
        for a in 0..9u64 {
            for b in 0..9u64 {
                for c in 0..9u64 {
                    let pt = vec![f9.el(a), f9.el(b), f9.el(c)];
                    assert_eq!(eval.eval(&pt), m.evaluate(&f9, &pt));
                }
            }
        }
    }

    #[test]
    fn euler_relation_degree_two() {
        // x . grad f (x) = 2 f(x) for homogeneous degree-2 f, all points
        use rand::prelude::*;
        for (p, k) in [(3u64, 1u32), (5, 1), (3, 2)] {
            let field = FieldSpec::new(p, k).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p + k as u64);
            for n in 2..=3usize {
                for _ in 0..5 {
                    let mut terms = Vec::new();
                    for i in 0..n {
                        for j in i..n {
                            let mut exps = vec![0u16; n];
                            exps[i] += 1;
                            exps[j] += 1;
                            terms.push((exps, field.el(rng.random_range(0..field.size()))));
                        }
                    }
                    let f = Poly::from_terms(&field, n, terms).unwrap();
                    if f.is_zero() {
                        continue;
                    }
                    let grad = f.gradient(&field);
                    let total = field.size().pow(n as u32);
                    for idx in 0..total {
                        let mut v = idx;
                        let pt: Vec<FieldElement> = (0..n)
                            .map(|_| {
                                let c = field.el(v % field.size());
                                v /= field.size();
                                c
                            })
                            .collect();
                        let mut lhs = field.zero();
                        for (xi, gi) in pt.iter().zip(&grad) {
                            lhs = field.add(lhs, field.mul(*xi, gi.evaluate(&field, &pt).unwrap()));
                        }
                        let rhs = field.mul(field.from_int(2), f.evaluate(&field, &pt).unwrap());
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn gram_rank_detects_singular_quadrics() {
        // rank(M) = nvars iff no projective point has vanishing gradient;
        // cross-checked by exhaustive search (the kernel of M is rational)
        use rand::prelude::*;
        for (p, k) in [(3u64, 1u32), (5, 1), (3, 2)] {
            let field = FieldSpec::new(p, k).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41 * p + k as u64);
            for nvars in [3usize, 4] {
                for _ in 0..20 {
                    let mut terms = Vec::new();
                    for i in 0..nvars {
                        for j in i..nvars {
                            let mut exps = vec![0u16; nvars];
                            exps[i] += 1;
                            exps[j] += 1;
                            terms.push((exps, field.el(rng.random_range(0..field.size()))));
                        }
                    }
                    let f = Poly::from_terms(&field, nvars, terms).unwrap();
                    if f.is_zero() {
                        continue;
                    }
                    let m = gram_matrix(&field, &f).unwrap();
                    let grad = f.gradient(&field);
                    let q = field.size();
                    let mut found_singular_point = false;
                    for idx in 1..q.pow(nvars as u32) {
                        let mut v = idx;
                        let pt: Vec<FieldElement> = (0..nvars)
                            .map(|_| {
                                let c = field.el(v % q);
                                v /= q;
                                c
                            })
                            .collect();
                        let grad_vanishes = grad
                            .iter()
                            .all(|g| g.evaluate(&field, &pt).unwrap().is_zero());
                        let on = f.evaluate(&field, &pt).unwrap().is_zero();
                        if grad_vanishes && on {
                            found_singular_point = true;
                            break;
                        }
                    }
                    assert_eq!(m.rank(&field) == nvars, !found_singular_point);
                }
            }
        }
    }

    #[test]
    fn proportionality() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        let c = conic(&f5);
        let m1 = gram_matrix(&f5, &c).unwrap();
        let m2 = gram_matrix(&f5, &c.scale(&f5, f5.el(2))).unwrap();
        assert!(m1.proportional_to(&f5, &m2));
        let other =
            Poly::from_int_terms(&f5, 3, &[(&[2, 0, 0], 1), (&[0, 2, 0], 4), (&[0, 0, 2], 4)])
                .unwrap();
        let m3 = gram_matrix(&f5, &other).unwrap();
        assert!(!m1.proportional_to(&f5, &m3));
    }

    #[test]
    fn render_is_deterministic() {
        let f9 = FieldSpec::new(3, 2).unwrap();
        let g = f9.from_coeffs(&[1, 2]).unwrap();
        let f = Poly::from_terms(&f9, 2, vec![(vec![2, 0], f9.one()), (vec![0, 1], g)]).unwrap();
        let text = f.render(&f9);
        assert_eq!(text, "(1+2g)*x1+x0^2");
    }
}
