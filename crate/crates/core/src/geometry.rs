//! Singular-locus probing, independence-condition checks, and the
//! external/internal point machinery for smooth conics.
//!
//! Dimensions of the degeneracy loci are estimated from exact point censuses
//! across a small field tower, never computed symbolically; every estimate
//! carries an exact/estimated confidence flag. Witness searches run in a
//! fixed deterministic order (exhaustive below a pair-count threshold, then
//! seeded sampling), so certificates are reproducible.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::count::{
    ambient_size, checked_pow, count_all_patterns, decode_projective_point, Ambient, CountConfig,
    CountError, PolySystem,
};
use crate::field::{Character, FieldElement, FieldError, FieldSpec};
use crate::linalg::matrix_rank;
use crate::parallel::partitioned_sum;
use crate::poly::{gram_matrix, GramMatrix, Poly, PolyError, PolyEvaluator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("subset of polynomial indices is empty")]
    EmptySubset,
    #[error("subset mask {mask:#b} out of range for m = {m}")]
    BadSubset { mask: u32, m: usize },
    #[error("operation needs a projective system")]
    NotProjective,
    #[error("need at least two tower levels, got {0}")]
    InsufficientLevels(usize),
    #[error("quadric is singular (Gram rank {rank} < {size})")]
    SingularQuadric { rank: usize, size: usize },
    #[error("quadrics coincide up to a scalar")]
    SameQuadric,
    #[error("point has {got} coordinates, expected {expected}")]
    MalformedPoint { expected: usize, got: usize },
    #[error("projective point must have a nonzero coordinate")]
    ZeroPoint,
    #[error("classification constant must be nonzero")]
    ZeroConstant,
    #[error("quadric classification needs even projective dimension, got n = {0}")]
    OddDimension(usize),
    #[error("no classification constant available for n = {0} > 2; supply one")]
    MissingConstant(usize),
    #[error(
        "character classifier with c = {constant} disagrees with the geometric classifier at {point}"
    )]
    CalibrationDisagreement { constant: String, point: String },
    #[error("witness pair for index {index} fails verification: {detail}")]
    InvalidWitness { index: usize, detail: String },
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

// ---- degeneracy loci ----

fn subset_indices(mask: u32, m: usize) -> Result<Vec<usize>, GeometryError> {
    if mask == 0 {
        return Err(GeometryError::EmptySubset);
    }
    if mask >= 1u32 << m {
        return Err(GeometryError::BadSubset { mask, m });
    }
    Ok((0..m).filter(|i| mask >> i & 1 == 1).collect())
}

/// Probes membership of a projective point in the degeneracy locus of the
/// selected polynomials: all of them vanish there and the Jacobian formed by
/// their gradients drops rank below the subset size.
pub fn t_membership(
    system: &PolySystem,
    subset_mask: u32,
    point: &[FieldElement],
) -> Result<bool, GeometryError> {
    if !system.ambient().is_projective() {
        return Err(GeometryError::NotProjective);
    }
    let indices = subset_indices(subset_mask, system.m())?;
    let nvars = system.ambient().nvars();
    if point.len() != nvars {
        return Err(GeometryError::MalformedPoint {
            expected: nvars,
            got: point.len(),
        });
    }
    if point.iter().all(|c| c.is_zero()) {
        return Err(GeometryError::ZeroPoint);
    }
    let field = system.field();
    for &i in &indices {
        if !system.polys()[i].evaluate(field, point)?.is_zero() {
            return Ok(false);
        }
    }
    let mut rows = Vec::with_capacity(indices.len());
    for &i in &indices {
        let grad = system.polys()[i].gradient(field);
        let row: Result<Vec<FieldElement>, PolyError> =
            grad.iter().map(|g| g.evaluate(field, point)).collect();
        rows.push(row?);
    }
    let rank = matrix_rank(field, &rows).expect("gradient rows are rectangular");
    Ok(rank < indices.len())
}

/// Exact census of the degeneracy locus over an extension field.
pub fn count_t_points(
    system: &PolySystem,
    subset_mask: u32,
    tower_field: &FieldSpec,
    cfg: &CountConfig,
) -> Result<u64, GeometryError> {
    if !system.ambient().is_projective() {
        return Err(GeometryError::NotProjective);
    }
    let indices = subset_indices(subset_mask, system.m())?;
    let big = system.embed_to(tower_field)?;
    let field = big.field();
    let nvars = big.ambient().nvars();
    let total_u128 = ambient_size(field, big.ambient());
    if total_u128 > cfg.ceiling as u128 {
        return Err(GeometryError::Count(CountError::CeilingExceeded {
            needed: total_u128,
            ceiling: cfg.ceiling,
        }));
    }
    let total = total_u128 as u64;
    let r = indices.len();
    let selected: Vec<&Poly> = indices.iter().map(|&i| &big.polys()[i]).collect();
    let gradients: Vec<Vec<Poly>> = selected.iter().map(|f| f.gradient(field)).collect();
    let sums = partitioned_sum(total, cfg.workers, 1, |lo, hi| {
        let mut acc = 0u64;
        let mut point = vec![field.zero(); nvars];
        let mut value_evals: Vec<PolyEvaluator> = selected
            .iter()
            .map(|f| PolyEvaluator::new(field, f))
            .collect();
        let mut grad_evals: Vec<Vec<PolyEvaluator>> = gradients
            .iter()
            .map(|gs| gs.iter().map(|g| PolyEvaluator::new(field, g)).collect())
            .collect();
        'points: for idx in lo..hi {
            decode_projective_point(field, idx, &mut point);
            for ev in value_evals.iter_mut() {
                if !ev.eval(&point).is_zero() {
                    continue 'points;
                }
            }
            let rows: Vec<Vec<FieldElement>> = grad_evals
                .iter_mut()
                .map(|gs| gs.iter_mut().map(|g| g.eval(&point)).collect())
                .collect();
            let rank = matrix_rank(field, &rows).expect("rectangular");
            if rank < r {
                acc += 1;
            }
        }
        vec![acc]
    });
    Ok(sums[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confidence {
    Exact,
    Estimated,
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Confidence::Exact => write!(f, "exact"),
            Confidence::Estimated => write!(f, "estimated"),
        }
    }
}

/// Dimension of a locus from its census counts `(level e, #T(F_{q^e}))`.
///
/// Empty at every level reads as dimension -1 (exact). Otherwise the
/// dimension is `round(log count / log q^e)` at the largest level, upgraded
/// from estimated to exact when two consecutive levels round to the same
/// value and the top count is within a factor 4 of `(q^e)^dim`.
pub fn estimate_dimension(
    counts: &[(u32, u64)],
    base_q: u64,
) -> Result<(i64, Confidence), GeometryError> {
    if counts.len() < 2 {
        return Err(GeometryError::InsufficientLevels(counts.len()));
    }
    if counts.iter().all(|&(_, c)| c == 0) {
        return Ok((-1, Confidence::Exact));
    }
    let round_dim = |e: u32, c: u64| -> Option<i64> {
        if c == 0 {
            return None;
        }
        let size = (base_q as f64).powi(e as i32);
        Some(((c as f64).ln() / size.ln()).round() as i64)
    };
    // the largest level with a nonzero count anchors the estimate
    let (top_e, top_c) = *counts
        .iter()
        .filter(|&&(_, c)| c > 0)
        .max_by_key(|&&(e, _)| e)
        .expect("some count is nonzero");
    let dim = round_dim(top_e, top_c).expect("top count is nonzero");
    let mut confidence = Confidence::Estimated;
    for w in counts.windows(2) {
        let (e0, c0) = w[0];
        let (e1, c1) = w[1];
        if e1 == top_e {
            if let (Some(d0), Some(d1)) = (round_dim(e0, c0), round_dim(e1, c1)) {
                if d0 == d1 {
                    let model = (base_q as f64).powi(top_e as i32).powi(dim as i32);
                    let ratio = top_c as f64 / model;
                    if (0.25..=4.0).contains(&ratio) {
                        confidence = Confidence::Exact;
                    }
                }
            }
        }
    }
    Ok((dim, confidence))
}

/// Census data and estimated dimension for one subset of indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetProfile {
    pub counts: Vec<(u32, u64)>,
    pub dim: i64,
    pub confidence: Confidence,
}

/// One containment-hypothesis probe: a point with the subset's other members
/// vanishing but the distinguished one not.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentCheck {
    pub subset_mask: u32,
    /// 1-based index of the distinguished member.
    pub distinguished: usize,
    /// Tower level where a witness point appeared, if any.
    pub witness_level: Option<u32>,
}

impl ContainmentCheck {
    pub fn verified(&self) -> bool {
        self.witness_level.is_some()
    }
}

/// Aggregate singularity data of a projective system: per-subset locus
/// dimensions, their maximum, the inclusion-exclusion depth and the error
/// exponent they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularProfile {
    pub n: u32,
    pub m: u32,
    pub base_q: u64,
    pub max_level: u32,
    pub per_subset: BTreeMap<u32, SubsetProfile>,
    /// Maximum locus dimension over all nonempty subsets (>= -1).
    pub singular_dim: i64,
    /// Inclusion-exclusion depth `max(n - m - dim - 1, 0)`.
    pub depth: u32,
    /// Error exponent `max((n + dim + 1)/2, n - depth - 1)`.
    pub error_exponent: f64,
    /// Containment-hypothesis probes for subset sizes up to `min(depth+1, m)`.
    pub hypothesis: Vec<ContainmentCheck>,
}

impl SingularProfile {
    /// Worst confidence over the probed subsets.
    pub fn confidence(&self) -> Confidence {
        if self
            .per_subset
            .values()
            .all(|s| s.confidence == Confidence::Exact)
        {
            Confidence::Exact
        } else {
            Confidence::Estimated
        }
    }

    pub fn hypothesis_verified(&self) -> bool {
        self.hypothesis.iter().all(|h| h.verified())
    }

    /// Recomputes depth and exponent from the stored dimension; used by the
    /// self-consistency invariant.
    pub fn recompute_derived(&self) -> (u32, f64) {
        derived_exponents(self.n, self.m, self.singular_dim)
    }
}

fn derived_exponents(n: u32, m: u32, dim: i64) -> (u32, f64) {
    let depth = (n as i64 - m as i64 - dim - 1).max(0) as u32;
    let exponent = ((n as i64 + dim + 1) as f64 / 2.0).max((n as i64 - depth as i64 - 1) as f64);
    (depth, exponent)
}

/// Builds the full singularity profile of a projective system by censusing
/// every nonempty subset's degeneracy locus at tower levels `1..=max_level`.
pub fn singular_profile(
    system: &PolySystem,
    max_level: u32,
    cfg: &CountConfig,
) -> Result<SingularProfile, GeometryError> {
    if !system.ambient().is_projective() {
        return Err(GeometryError::NotProjective);
    }
    if max_level < 2 {
        return Err(GeometryError::InsufficientLevels(max_level as usize));
    }
    let m = system.m();
    let n = system.n() as u32;
    let base = system.field();
    let towers: Vec<FieldSpec> = (1..=max_level)
        .map(|e| {
            FieldSpec::with_ceiling(base.characteristic(), base.degree() * e, cfg.ceiling)
                .map_err(GeometryError::Field)
        })
        .collect::<Result<_, _>>()?;
    let mut per_subset = BTreeMap::new();
    let mut singular_dim = -1i64;
    for mask in 1..(1u32 << m) {
        let counts: Vec<(u32, u64)> = towers
            .iter()
            .enumerate()
            .map(|(i, tf)| Ok((i as u32 + 1, count_t_points(system, mask, tf, cfg)?)))
            .collect::<Result<_, GeometryError>>()?;
        let (dim, confidence) = estimate_dimension(&counts, base.size())?;
        singular_dim = singular_dim.max(dim);
        per_subset.insert(
            mask,
            SubsetProfile {
                counts,
                dim,
                confidence,
            },
        );
    }
    let (depth, error_exponent) = derived_exponents(n, m as u32, singular_dim);
    // containment hypothesis: for every subset of size r <= min(depth+1, m)
    // and every distinguished member, exhibit a point where the others
    // vanish but the distinguished one does not
    let mut hypothesis = Vec::new();
    let r_max = (depth as usize + 1).min(m);
    for mask in 1..(1u32 << m) {
        let indices = subset_indices(mask, m)?;
        if indices.len() > r_max {
            continue;
        }
        for &dist in &indices {
            let witness_level = containment_witness(system, &indices, dist, &towers, cfg)?;
            hypothesis.push(ContainmentCheck {
                subset_mask: mask,
                distinguished: dist + 1,
                witness_level,
            });
        }
    }
    Ok(SingularProfile {
        n,
        m: m as u32,
        base_q: base.size(),
        max_level,
        per_subset,
        singular_dim,
        depth,
        error_exponent,
        hypothesis,
    })
}

/// Searches the tower for a projective point where every subset member but
/// the distinguished one vanishes. Returns the level of the first witness.
fn containment_witness(
    system: &PolySystem,
    indices: &[usize],
    distinguished: usize,
    towers: &[FieldSpec],
    cfg: &CountConfig,
) -> Result<Option<u32>, GeometryError> {
    for (li, tf) in towers.iter().enumerate() {
        let big = system.embed_to(tf)?;
        let field = big.field();
        let nvars = big.ambient().nvars();
        let total = ambient_size(field, big.ambient());
        if total > cfg.ceiling as u128 {
            break;
        }
        let mut point = vec![field.zero(); nvars];
        let mut evals: Vec<(usize, PolyEvaluator)> = indices
            .iter()
            .map(|&i| (i, PolyEvaluator::new(field, &big.polys()[i])))
            .collect();
        'points: for idx in 0..total as u64 {
            decode_projective_point(field, idx, &mut point);
            for (i, ev) in evals.iter_mut() {
                let v = ev.eval(&point);
                let want_zero = *i != distinguished;
                if want_zero != v.is_zero() {
                    continue 'points;
                }
            }
            return Ok(Some(li as u32 + 1));
        }
    }
    Ok(None)
}

// ---- independence-condition witnesses ----

/// A verified witness pair for one index: over the witness field, the
/// product `f_i(u) f_i(v)` is a non-square while every other index's product
/// is a nonzero square.
#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    pub index: usize,
    pub level: u32,
    pub field: FieldSpec,
    pub u: Vec<FieldElement>,
    pub v: Vec<FieldElement>,
}

impl WitnessCertificate {
    /// Re-checks the defining character conditions against the system.
    pub fn verify(&self, system: &PolySystem) -> Result<(), GeometryError> {
        let big = system.embed_to(&self.field)?;
        let field = big.field();
        for (j, f) in big.polys().iter().enumerate() {
            let prod = field.mul(f.evaluate(field, &self.u)?, f.evaluate(field, &self.v)?);
            let chi = field.quadratic_character(prod);
            let expected = if j + 1 == self.index {
                Character::NonSquare
            } else {
                Character::Square
            };
            if chi != expected {
                return Err(GeometryError::InvalidWitness {
                    index: self.index,
                    detail: format!(
                        "product for f{} has character {chi}, expected {expected}",
                        j + 1
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Result of the witness search: either a certificate per index (confirming
/// the independence condition, with the largest probed level as a unified
/// witness field) or the list of indices still lacking witnesses, which
/// proves nothing.
#[derive(Debug, Clone)]
pub enum ConditionOutcome {
    Certified {
        certificates: Vec<WitnessCertificate>,
        unified_level: u32,
    },
    Inconclusive {
        missing: Vec<usize>,
        found: Vec<WitnessCertificate>,
    },
}

impl ConditionOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, ConditionOutcome::Certified { .. })
    }
}

/// Exhaustive search is used while the pair count stays within this budget;
/// beyond it, seeded pseudorandom sampling takes over.
const EXHAUSTIVE_PAIR_LIMIT: u128 = 1_000_000;

/// Searches tower levels `1..=max_extension` for witness pairs for every
/// index. Exhaustive in odometer order (u outer, v inner, first coordinate
/// fastest) for small point sets; seeded sampling up to `budget` pairs per
/// (index, level) otherwise.
pub fn check_condition_iii(
    system: &PolySystem,
    max_extension: u32,
    budget: u64,
    seed: u64,
    cfg: &CountConfig,
) -> Result<ConditionOutcome, GeometryError> {
    if max_extension < 1 {
        return Err(GeometryError::InsufficientLevels(0));
    }
    let m = system.m();
    let base = system.field();
    let nvars = system.ambient().nvars();
    let mut found: Vec<Option<WitnessCertificate>> = vec![None; m];
    for e in 1..=max_extension {
        if found.iter().all(|c| c.is_some()) {
            break;
        }
        let tf =
            match FieldSpec::with_ceiling(base.characteristic(), base.degree() * e, cfg.ceiling) {
                Ok(f) => f,
                Err(FieldError::CeilingExceeded { .. }) => break,
                Err(err) => return Err(GeometryError::Field(err)),
            };
        let big = system.embed_to(&tf)?;
        let field = big.field();
        let points = checked_pow(field.size(), nvars as u32);
        let Some(points) = points else { break };
        let pairs = points as u128 * points as u128;
        for i in 0..m {
            if found[i].is_some() {
                continue;
            }
            let witness = if pairs <= EXHAUSTIVE_PAIR_LIMIT {
                search_pairs_exhaustive(&big, i, points)
            } else {
                search_pairs_sampled(&big, i, points, budget, mix_seed(seed, i as u64, e as u64))
            };
            if let Some((u, v)) = witness {
                let cert = WitnessCertificate {
                    index: i + 1,
                    level: e,
                    field: tf.clone(),
                    u,
                    v,
                };
                cert.verify(system)?;
                found[i] = Some(cert);
            }
        }
    }
    let missing: Vec<usize> = found
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(i, _)| i + 1)
        .collect();
    let certs: Vec<WitnessCertificate> = found.into_iter().flatten().collect();
    if missing.is_empty() {
        let unified_level = certs.iter().map(|c| c.level).max().unwrap_or(1);
        Ok(ConditionOutcome::Certified {
            certificates: certs,
            unified_level,
        })
    } else {
        Ok(ConditionOutcome::Inconclusive {
            missing,
            found: certs,
        })
    }
}

fn mix_seed(seed: u64, i: u64, e: u64) -> u64 {
    // splitmix-style spread so per-(index, level) streams are independent
    let mut z = seed
        .wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(e.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

type WitnessPair = (Vec<FieldElement>, Vec<FieldElement>);

fn witness_at(
    system: &PolySystem,
    target: usize,
    evals: &mut [PolyEvaluator],
    values_u: &[FieldElement],
    v_point: &[FieldElement],
) -> bool {
    let field = system.field();
    for (j, ev) in evals.iter_mut().enumerate() {
        let prod = field.mul(values_u[j], ev.eval(v_point));
        let chi = field.quadratic_character(prod);
        let expected = if j == target {
            Character::NonSquare
        } else {
            Character::Square
        };
        if chi != expected {
            return false;
        }
    }
    true
}

fn search_pairs_exhaustive(system: &PolySystem, target: usize, points: u64) -> Option<WitnessPair> {
    let field = system.field();
    let nvars = system.ambient().nvars();
    let mut u = vec![field.zero(); nvars];
    let mut v = vec![field.zero(); nvars];
    let mut evals: Vec<PolyEvaluator> = system
        .polys()
        .iter()
        .map(|f| PolyEvaluator::new(field, f))
        .collect();
    let mut values_u = vec![field.zero(); system.m()];
    for u_idx in 0..points {
        crate::count::decode_affine_point(field, u_idx, &mut u);
        let mut u_ok = true;
        for (j, ev) in evals.iter_mut().enumerate() {
            values_u[j] = ev.eval(&u);
            if values_u[j].is_zero() {
                u_ok = false;
                break;
            }
        }
        if !u_ok {
            continue;
        }
        for v_idx in 0..points {
            crate::count::decode_affine_point(field, v_idx, &mut v);
            if witness_at(system, target, &mut evals, &values_u, &v) {
                return Some((u, v));
            }
        }
    }
    None
}

fn search_pairs_sampled(
    system: &PolySystem,
    target: usize,
    points: u64,
    budget: u64,
    seed: u64,
) -> Option<WitnessPair> {
    let field = system.field();
    let nvars = system.ambient().nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![field.zero(); nvars];
    let mut v = vec![field.zero(); nvars];
    let mut evals: Vec<PolyEvaluator> = system
        .polys()
        .iter()
        .map(|f| PolyEvaluator::new(field, f))
        .collect();
    let mut values_u = vec![field.zero(); system.m()];
    for _ in 0..budget {
        let u_idx = rng.random_range(0..points);
        let v_idx = rng.random_range(0..points);
        crate::count::decode_affine_point(field, u_idx, &mut u);
        let mut u_ok = true;
        for (j, ev) in evals.iter_mut().enumerate() {
            values_u[j] = ev.eval(&u);
            if values_u[j].is_zero() {
                u_ok = false;
                break;
            }
        }
        if !u_ok {
            continue;
        }
        crate::count::decode_affine_point(field, v_idx, &mut v);
        if witness_at(system, target, &mut evals, &values_u, &v) {
            return Some((u, v));
        }
    }
    None
}

/// The two-polynomial independence criterion for quadratic forms: both Gram
/// ranks at least 2 (square-free part of full degree) and the Gram matrices
/// not proportional (the forms are not constant multiples of each other).
pub fn check_condition_i_quadratic_pair(
    field: &FieldSpec,
    f1: &Poly,
    f2: &Poly,
) -> Result<bool, GeometryError> {
    let m1 = gram_matrix(field, f1)?;
    let m2 = gram_matrix(field, f2)?;
    Ok(m1.rank(field) >= 2 && m2.rank(field) >= 2 && !m1.proportional_to(field, &m2))
}

// ---- conic classification ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    External,
    Internal,
    OnQuadric,
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointClass::External => write!(f, "external"),
            PointClass::Internal => write!(f, "internal"),
            PointClass::OnQuadric => write!(f, "on"),
        }
    }
}

/// Tangent-line classifier for a smooth conic in the projective plane.
///
/// The tangent to the conic at a point T is the polar line of T, so P lies
/// on it exactly when the polar form vanishes: `T^T M P = 0`. A point off
/// the conic sees either two tangents (external) or none (internal).
#[derive(Debug)]
pub struct ConicClassifier {
    field: FieldSpec,
    gram: GramMatrix,
    conic_points: Vec<Vec<FieldElement>>,
}

impl ConicClassifier {
    pub fn new(field: &FieldSpec, conic: &Poly) -> Result<ConicClassifier, GeometryError> {
        if conic.nvars() != 3 {
            return Err(GeometryError::MalformedPoint {
                expected: 3,
                got: conic.nvars(),
            });
        }
        let gram = gram_matrix(field, conic)?;
        let rank = gram.rank(field);
        if rank < 3 {
            return Err(GeometryError::SingularQuadric { rank, size: 3 });
        }
        let total = ambient_size(field, Ambient::Projective { n: 2 }) as u64;
        let mut conic_points = Vec::new();
        let mut point = vec![field.zero(); 3];
        for idx in 0..total {
            decode_projective_point(field, idx, &mut point);
            if gram.evaluate(field, &point).is_zero() {
                conic_points.push(point.clone());
            }
        }
        Ok(ConicClassifier {
            field: field.clone(),
            gram,
            conic_points,
        })
    }

    /// Number of rational points on the conic (always q + 1 when smooth).
    pub fn on_conic_count(&self) -> usize {
        self.conic_points.len()
    }

    /// Number of tangent lines to the conic through P (P off the conic).
    pub fn tangent_count(&self, point: &[FieldElement]) -> usize {
        self.conic_points
            .iter()
            .filter(|t| self.gram.bilinear(&self.field, t, point).is_zero())
            .count()
    }

    pub fn classify(&self, point: &[FieldElement]) -> Result<PointClass, GeometryError> {
        if point.len() != 3 {
            return Err(GeometryError::MalformedPoint {
                expected: 3,
                got: point.len(),
            });
        }
        if point.iter().all(|c| c.is_zero()) {
            return Err(GeometryError::ZeroPoint);
        }
        if self.gram.evaluate(&self.field, point).is_zero() {
            return Ok(PointClass::OnQuadric);
        }
        match self.tangent_count(point) {
            2 => Ok(PointClass::External),
            0 => Ok(PointClass::Internal),
            k => panic!("off-conic point sees {k} tangents; classification invariant violated"),
        }
    }
}

/// One-shot geometric classification of a point against a smooth conic.
pub fn classify_point_conic(
    field: &FieldSpec,
    conic: &Poly,
    point: &[FieldElement],
) -> Result<PointClass, GeometryError> {
    ConicClassifier::new(field, conic)?.classify(point)
}

/// Character-based classification of a point against a smooth quadric in
/// even projective dimension: external iff `chi(c * f(P)) = +1`.
pub fn classify_point_quadric_character(
    field: &FieldSpec,
    quadric: &Poly,
    c: FieldElement,
    point: &[FieldElement],
) -> Result<PointClass, GeometryError> {
    if c.is_zero() {
        return Err(GeometryError::ZeroConstant);
    }
    let n = quadric.nvars().saturating_sub(1);
    if n % 2 != 0 {
        return Err(GeometryError::OddDimension(n));
    }
    let gram = gram_matrix(field, quadric)?;
    let rank = gram.rank(field);
    if rank < quadric.nvars() {
        return Err(GeometryError::SingularQuadric {
            rank,
            size: quadric.nvars(),
        });
    }
    if point.len() != quadric.nvars() {
        return Err(GeometryError::MalformedPoint {
            expected: quadric.nvars(),
            got: point.len(),
        });
    }
    let value = gram.evaluate(field, point);
    match field.quadratic_character(field.mul(c, value)) {
        Character::Zero => Ok(PointClass::OnQuadric),
        Character::Square => Ok(PointClass::External),
        Character::NonSquare => Ok(PointClass::Internal),
    }
}

/// Pins the classification constant for a smooth conic empirically: the
/// first off-conic point is classified geometrically, `c` is chosen in
/// `{1, nu}` to make the character classifier agree there, and a full
/// agreement sweep over every off-conic point is run as a post-check.
pub fn calibrate_constant(field: &FieldSpec, conic: &Poly) -> Result<FieldElement, GeometryError> {
    let classifier = ConicClassifier::new(field, conic)?;
    let total = ambient_size(field, Ambient::Projective { n: 2 }) as u64;
    let mut point = vec![field.zero(); 3];
    let mut calibration: Option<FieldElement> = None;
    for idx in 0..total {
        decode_projective_point(field, idx, &mut point);
        let value = classifier.gram.evaluate(field, &point);
        if value.is_zero() {
            continue;
        }
        let geo = classifier.classify(&point)?;
        let c = match calibration {
            None => {
                let chi = field.quadratic_character(value);
                let agrees = (geo == PointClass::External) == (chi == Character::Square);
                let c = if agrees {
                    field.one()
                } else {
                    field.first_non_square()
                };
                calibration = Some(c);
                c
            }
            Some(c) => c,
        };
        let by_char = classify_point_quadric_character(field, conic, c, &point)?;
        if by_char != geo {
            return Err(GeometryError::CalibrationDisagreement {
                constant: field.render(c),
                point: render_point(field, &point),
            });
        }
    }
    calibration.ok_or(GeometryError::ZeroPoint)
}

pub fn render_point(field: &FieldSpec, point: &[FieldElement]) -> String {
    let coords: Vec<String> = point.iter().map(|&c| field.render(c)).collect();
    format!("[{}]", coords.join(":"))
}

/// Per-class totals of a classification sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassTotals {
    pub on: u64,
    pub external: u64,
    pub internal: u64,
}

/// Classifies every point of the projective plane against a smooth conic.
pub fn classify_all_points(
    field: &FieldSpec,
    conic: &Poly,
) -> Result<(Vec<(Vec<FieldElement>, PointClass)>, ClassTotals), GeometryError> {
    let classifier = ConicClassifier::new(field, conic)?;
    let total = ambient_size(field, Ambient::Projective { n: 2 }) as u64;
    let mut rows = Vec::with_capacity(total as usize);
    let mut totals = ClassTotals {
        on: 0,
        external: 0,
        internal: 0,
    };
    let mut point = vec![field.zero(); 3];
    for idx in 0..total {
        decode_projective_point(field, idx, &mut point);
        let class = classifier.classify(&point)?;
        match class {
            PointClass::OnQuadric => totals.on += 1,
            PointClass::External => totals.external += 1,
            PointClass::Internal => totals.internal += 1,
        }
        rows.push((point.clone(), class));
    }
    Ok((rows, totals))
}

/// Optional constants for the character classifiers in dimensions above 2.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassifyConstants {
    pub for_first: Option<FieldElement>,
    pub for_second: Option<FieldElement>,
}

/// Counts points external to the first quadric and internal to the second.
/// Dimension 2 uses the geometric tangent-line classifiers; higher even
/// dimensions require explicit constants for the character classifiers.
pub fn count_external_internal(
    field: &FieldSpec,
    first: &Poly,
    second: &Poly,
    constants: ClassifyConstants,
    cfg: &CountConfig,
) -> Result<u64, GeometryError> {
    let nvars = first.nvars();
    if second.nvars() != nvars {
        return Err(GeometryError::MalformedPoint {
            expected: nvars,
            got: second.nvars(),
        });
    }
    let n = nvars - 1;
    if n % 2 != 0 {
        return Err(GeometryError::OddDimension(n));
    }
    let g1 = gram_matrix(field, first)?;
    let g2 = gram_matrix(field, second)?;
    for (g, poly) in [(&g1, first), (&g2, second)] {
        let rank = g.rank(field);
        if rank < poly.nvars() {
            return Err(GeometryError::SingularQuadric {
                rank,
                size: poly.nvars(),
            });
        }
    }
    if g1.proportional_to(field, &g2) {
        return Err(GeometryError::SameQuadric);
    }
    let total = ambient_size(field, Ambient::Projective { n });
    if total > cfg.ceiling as u128 {
        return Err(GeometryError::Count(CountError::CeilingExceeded {
            needed: total,
            ceiling: cfg.ceiling,
        }));
    }
    let total = total as u64;
    if n == 2 {
        let c1 = ConicClassifier::new(field, first)?;
        let c2 = ConicClassifier::new(field, second)?;
        let mut acc = 0u64;
        let mut point = vec![field.zero(); 3];
        for idx in 0..total {
            decode_projective_point(field, idx, &mut point);
            if c1.gram.evaluate(field, &point).is_zero()
                || c2.gram.evaluate(field, &point).is_zero()
            {
                continue;
            }
            if c1.classify(&point)? == PointClass::External
                && c2.classify(&point)? == PointClass::Internal
            {
                acc += 1;
            }
        }
        return Ok(acc);
    }
    let (Some(k1), Some(k2)) = (constants.for_first, constants.for_second) else {
        return Err(GeometryError::MissingConstant(n));
    };
    if k1.is_zero() || k2.is_zero() {
        return Err(GeometryError::ZeroConstant);
    }
    let mut acc = 0u64;
    let mut point = vec![field.zero(); nvars];
    for idx in 0..total {
        decode_projective_point(field, idx, &mut point);
        let v1 = field.mul(k1, g1.evaluate(field, &point));
        let v2 = field.mul(k2, g2.evaluate(field, &point));
        if field.quadratic_character(v1) == Character::Square
            && field.quadratic_character(v2) == Character::NonSquare
        {
            acc += 1;
        }
    }
    Ok(acc)
}

/// Cross-check helper: the external/internal count equals the `+-` pattern
/// count of the system scaled by the calibration constants.
pub fn external_internal_as_pattern(
    field: &FieldSpec,
    first: &Poly,
    second: &Poly,
    c1: FieldElement,
    c2: FieldElement,
    cfg: &CountConfig,
) -> Result<u64, GeometryError> {
    let n = first.nvars() - 1;
    let system = PolySystem::new(
        field.clone(),
        Ambient::Projective { n },
        vec![first.scale(field, c1), second.scale(field, c2)],
    )?;
    let counts = count_all_patterns(&system, cfg)?;
    Ok(counts.get(crate::count::PatternSpec::parse("+-").expect("valid pattern")))
}
