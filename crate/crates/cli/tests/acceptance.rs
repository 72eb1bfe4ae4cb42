//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//!
//! Criterion 3's slope clause is asserted at its stated threshold and is
//! expected to fail: the pinned instance's true errors sit far below the
//! q^(3/2) envelope and oscillate, so the two-point slope proxy exceeds the
//! threshold even though the underlying bound holds with minimal constant 0.
//! The counts behind it were cross-checked against an independent
//! implementation; see the failure message for the numbers.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use sqval::drivers::{verify, RunContext, TheoremId, VerifyParams};
use sqval::sysfile::SystemFile;
use sqval_core::count::{
    count_all_patterns, count_pattern, count_variety_direct, count_variety_fiber,
    main_term_projective, pattern_from_variety, Ambient, CountConfig, PatternSpec, PolySystem,
    VarietyModel,
};
use sqval_core::field::{FieldElement, FieldSpec};
use sqval_core::geometry::{
    calibrate_constant, check_condition_i_quadratic_pair, check_condition_iii, classify_all_points,
    count_external_internal, singular_profile, ClassifyConstants, Confidence, ConicClassifier,
};
use sqval_core::poly::Poly;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn ctx() -> RunContext {
    RunContext {
        workers: 1,
        ceiling: 1 << 21,
        seed: 0,
        c_user: 8.0,
        csv: None,
    }
}

fn cfg() -> CountConfig {
    CountConfig::default()
}

fn diag_conic(field: &FieldSpec, a: i64, b: i64, c: i64) -> Poly {
    Poly::from_int_terms(
        field,
        3,
        &[(&[2, 0, 0], a), (&[0, 2, 0], b), (&[0, 0, 2], c)],
    )
    .unwrap()
}

// ---- criterion 1 ----

fn random_affine_poly(field: &FieldSpec, n: usize, rng: &mut ChaCha8Rng) -> Poly {
    loop {
        let nterms = rng.random_range(1..=4usize);
        let terms: Vec<(Vec<u16>, FieldElement)> = (0..nterms)
            .map(|_| {
                let mut exps = vec![0u16; n];
                let degree = rng.random_range(0..=3u16);
                for _ in 0..degree {
                    let v = rng.random_range(0..n);
                    exps[v] += 1;
                }
                (exps, field.el(rng.random_range(0..field.size())))
            })
            .collect();
        let poly = Poly::from_terms(field, n, terms).unwrap();
        if !poly.is_zero() && poly.degree().unwrap_or(0) >= 1 {
            return poly;
        }
    }
}

fn random_quadratic_form(field: &FieldSpec, nvars: usize, rng: &mut ChaCha8Rng) -> Poly {
    loop {
        let mut terms = Vec::new();
        for i in 0..nvars {
            for j in i..nvars {
                let mut exps = vec![0u16; nvars];
                exps[i] += 1;
                exps[j] += 1;
                terms.push((exps, field.el(rng.random_range(0..field.size()))));
            }
        }
        let poly = Poly::from_terms(field, nvars, terms).unwrap();
        if !poly.is_zero() {
            return poly;
        }
    }
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let cfg = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fields: Vec<FieldSpec> = [(3u64, 1u32), (5, 1), (7, 1), (3, 2)]
        .iter()
        .map(|&(p, k)| FieldSpec::new(p, k).unwrap())
        .collect();
    let total_systems = 100;
    let mut checked_patterns = 0u64;
    for sys_idx in 0..total_systems {
        let field = fields[rng.random_range(0..fields.len())].clone();
        let m = rng.random_range(1..=3usize);
        let n = rng.random_range(1..=(4 - m).max(1));
        let projective = sys_idx % 4 == 0;
        let system = if projective {
            let polys = (0..m)
                .map(|_| random_quadratic_form(&field, n + 1, &mut rng))
                .collect();
            PolySystem::new(field.clone(), Ambient::Projective { n }, polys).unwrap()
        } else {
            let polys = (0..m)
                .map(|_| random_affine_poly(&field, n, &mut rng))
                .collect();
            PolySystem::new(field.clone(), Ambient::Affine { n }, polys).unwrap()
        };
        for pattern in PatternSpec::all(m) {
            let model = VarietyModel::new(system.clone(), pattern).unwrap();
            let direct = count_variety_direct(&model, &cfg).unwrap();
            let fiber = count_variety_fiber(&model, &cfg).unwrap();
            assert_eq!(
                direct, fiber,
                "direct/fiber mismatch: system {sys_idx}, pattern {pattern}"
            );
            let recovered = pattern_from_variety(&model, &cfg).unwrap();
            let counted = count_pattern(&system, pattern, &cfg).unwrap();
            assert_eq!(
                recovered, counted,
                "variety/pattern mismatch: system {sys_idx}, pattern {pattern}"
            );
            checked_patterns += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 300,
        "oracle equivalence took {elapsed:?}, budget is 5 minutes"
    );
    println!(
        "criterion 1: PASS - {total_systems} random systems, {checked_patterns} pattern checks, \
         direct = fiber and variety/2^m = pattern count everywhere ({elapsed:?})"
    );
}

// ---- criterion 2 ----

#[test]
fn criterion_2_product_systems_exact() {
    let cfg = cfg();
    for q in [3u64, 5, 7, 9, 11] {
        let (p, k) = if q == 9 { (3, 2) } else { (q, 1) };
        let field = FieldSpec::new(p, k).unwrap();
        for m in 1..=3usize {
            for n in [m, m + 1] {
                let polys: Vec<Poly> = (0..m)
                    .map(|i| {
                        let mut exps = vec![0u16; n];
                        exps[i] = 1;
                        Poly::from_terms(&field, n, vec![(exps, field.one())]).unwrap()
                    })
                    .collect();
                let system = PolySystem::new(field.clone(), Ambient::Affine { n }, polys).unwrap();
                let expected = ((q - 1) / 2).pow(m as u32) * q.pow((n - m) as u32);
                let counts = count_all_patterns(&system, &cfg).unwrap();
                for pattern in PatternSpec::all(m) {
                    assert_eq!(
                        counts.get(pattern),
                        expected,
                        "q={q} m={m} n={n} pattern {pattern}"
                    );
                }
            }
        }
    }
    println!(
        "criterion 2: PASS - coordinate systems count ((q-1)/2)^m q^(n-m) exactly \
         for every pattern, q in {{3,5,7,9,11}}, m <= 3"
    );
}

// ---- criterion 3 ----

#[test]
fn criterion_3_explicit_bound_sweep() {
    let file_text = std::fs::read_to_string(data("thm1_affine.sys")).unwrap();
    let file = SystemFile::parse(&file_text).unwrap();
    let params = VerifyParams {
        tower: Some((1, 6)),
        field_sizes: None,
        patterns: None,
        max_ext: 2,
        budget: 100_000,
        sigma_level: 2,
    };
    let verdict = verify(TheoremId::Thm1, &file, &params, &ctx()).unwrap();
    assert!(
        verdict.hypothesis.is_verified(),
        "independence witnesses must exist for this pair"
    );

    // second clause: the minimal constant making
    //   |N_S - q^2/4| <= 1.5 q^(3/2) + C q
    // hold on every row and pattern must not exceed 100
    let min_c = verdict.min_c_user;
    assert!(min_c <= 100.0, "minimal passing C_user {min_c} exceeds 100");
    println!("criterion 3 (bound clause): PASS - minimal passing C_user = {min_c}");

    // first clause, asserted exactly as stated: per pattern, the slope of
    // log|N_S - q^2/4| against log q over the two largest tower levels must
    // be at most 1.6
    let mut violations = Vec::new();
    for pv in &verdict.per_pattern {
        if let Some(exp) = pv.report.fit.exponent() {
            if exp > 1.6 {
                violations.push(format!("pattern {}: fitted exponent {exp:.6}", pv.pattern));
            }
        }
    }
    if violations.is_empty() {
        println!("criterion 3: PASS - all four fitted exponents <= 1.6");
    } else {
        println!("criterion 3: FAIL - {}", violations.join("; "));
    }
    assert!(
        violations.is_empty(),
        "criterion 3 slope clause fails as stated: {}. The counts are \
         independently verified (same values from a second implementation \
         with a different field representation), and the bound itself holds \
         with minimal C_user = {min_c} and every ratio |N_S - q^2/4|/q^1.5 \
         <= 0.44; the two-point slope of the oscillating sub-envelope error \
         sequence is not a meaningful exponent for this instance.",
        violations.join("; ")
    );
}

// ---- criterion 4 ----

#[test]
fn criterion_4_thm2_exponent_transverse_pair() {
    let file_text = std::fs::read_to_string(data("conic_pair_transverse.sys")).unwrap();
    let file = SystemFile::parse(&file_text).unwrap();
    let system = file.to_system().unwrap();
    let profile = singular_profile(&system, 2, &cfg()).unwrap();
    assert_eq!(profile.singular_dim, -1, "pair must be transverse");
    assert_eq!(profile.confidence(), Confidence::Exact);

    let params = VerifyParams {
        tower: Some((1, 3)),
        field_sizes: None,
        patterns: None,
        max_ext: 2,
        budget: 100_000,
        sigma_level: 2,
    };
    let verdict = verify(TheoremId::Thm2, &file, &params, &ctx()).unwrap();
    let mut worst: f64 = 0.0;
    for pv in &verdict.per_pattern {
        if let Some(exp) = pv.report.fit.exponent() {
            worst = worst.max(exp);
            assert!(
                exp <= 1.1,
                "pattern {} fitted exponent {exp} exceeds (n+sigma+1)/2 + slack = 1.1",
                pv.pattern
            );
        }
    }
    assert!(verdict.pass());
    println!(
        "criterion 4: PASS - sigma = -1 (exact), fitted exponents over F_5, F_25, F_125 \
         all <= 1.1 (worst {worst:.3})"
    );
}

// ---- criterion 5 ----

#[test]
fn criterion_5_thm3_main_term_ratio() {
    let file_text = std::fs::read_to_string(data("conic_pair_transverse.sys")).unwrap();
    let file = SystemFile::parse(&file_text).unwrap();
    let base = file.to_system().unwrap();
    let cfg = cfg();
    let profile = singular_profile(&base, 2, &cfg).unwrap();
    let (l, gamma) = (profile.depth, profile.error_exponent);
    let mut worst: f64 = 0.0;
    for level in 1..=3u32 {
        let field = FieldSpec::new(5, level).unwrap();
        let sys = base.embed_to(&field).unwrap();
        let counts = count_all_patterns(&sys, &cfg).unwrap();
        let q = field.size();
        let main = main_term_projective(2, 2, l, q);
        for pattern in PatternSpec::all(2) {
            let err = rational_error(counts.get(pattern), main);
            let ratio = err / (q as f64).powf(gamma);
            worst = worst.max(ratio);
            assert!(
                ratio <= 10.0,
                "q={q} pattern {pattern}: |N - main|/q^gamma = {ratio} > 10"
            );
        }
    }
    println!(
        "criterion 5: PASS - |N_S - truncated-inclusion-exclusion main term| / q^gamma \
         <= 10 across the tower (l={l}, gamma={gamma}, worst ratio {worst:.3})"
    );
}

/// `|count - main|` as a float, computed from the exact rational.
fn rational_error(count: u64, main: sqval_core::count::Rational) -> f64 {
    let diff = sqval_core::count::Rational::from_integer(count as i128) - main;
    let num = *diff.numer() as f64;
    let den = *diff.denom() as f64;
    (num / den).abs()
}

// ---- criterion 6 ----

#[test]
fn criterion_6_cor1_bound_stability() {
    let cfg = cfg();
    // coefficient triples with power-of-two determinants: smooth in every
    // odd characteristic that appears in the field list
    let pairs: [((i64, i64, i64), (i64, i64, i64)); 5] = [
        ((1, 1, -1), (1, 2, -1)),
        ((1, 1, -1), (1, -1, -1)),
        ((1, 1, -1), (2, 1, -1)),
        ((1, 2, -2), (1, 1, 1)),
        ((1, 1, -2), (2, -1, 1)),
    ];
    let field_sizes = [5u64, 9, 13, 25, 49, 81];
    for (idx, (ca, cb)) in pairs.iter().enumerate() {
        let mut per_q_c = Vec::new();
        for &q in &field_sizes {
            let (p, k) = sqval::drivers::factor_prime_power(q).unwrap();
            let field = FieldSpec::new(p, k).unwrap();
            let first = diag_conic(&field, ca.0, ca.1, ca.2);
            let second = diag_conic(&field, cb.0, cb.1, cb.2);
            let n = count_external_internal(
                &field,
                &first,
                &second,
                ClassifyConstants::default(),
                &cfg,
            )
            .unwrap();
            let err = (n as f64 - q.pow(2) as f64 / 4.0).abs();
            let c_needed = ((err - 1.5 * (q as f64).powf(1.5)) / q as f64).max(0.0);
            per_q_c.push((q, c_needed));
        }
        let overall = per_q_c.iter().map(|&(_, c)| c).fold(0.0f64, f64::max);
        assert!(
            overall <= 100.0,
            "pair {idx}: minimal C_user {overall} is not <= 100"
        );
        // stability: the largest field needs no more constant than the
        // smaller ones (up to 1.0 of slack)
        let (last_q, last_c) = *per_q_c.last().unwrap();
        let earlier_max = per_q_c[..per_q_c.len() - 1]
            .iter()
            .map(|&(_, c)| c)
            .fold(0.0f64, f64::max);
        assert!(
            last_c <= earlier_max + 1.0,
            "pair {idx}: C requirement grows with q ({last_c} at q={last_q} vs {earlier_max} before)"
        );
        println!(
            "criterion 6 (pair {}): minimal C_user = {overall:.3}, stable across q",
            idx + 1
        );
    }
    println!(
        "criterion 6: PASS - |N - q^2/4| <= 1.5 q^(3/2) + C q with finite, \
         non-growing C on all 5 pairs over q in {{5,9,13,25,49,81}}"
    );
}

// ---- criterion 7 ----

#[test]
fn criterion_7_conic_classification() {
    for q in [5u64, 7, 9, 11, 13] {
        let (p, k) = sqval::drivers::factor_prime_power(q).unwrap();
        let field = FieldSpec::new(p, k).unwrap();
        let conic = diag_conic(&field, 1, 1, -1);
        let classifier = ConicClassifier::new(&field, &conic).unwrap();
        let (points, totals) = classify_all_points(&field, &conic).unwrap();
        assert_eq!(totals.on, q + 1, "q={q}: on-conic count");
        assert_eq!(totals.external, q * (q + 1) / 2, "q={q}: external count");
        assert_eq!(totals.internal, q * (q - 1) / 2, "q={q}: internal count");
        for (point, class) in &points {
            if *class == sqval_core::geometry::PointClass::OnQuadric {
                continue;
            }
            let t = classifier.tangent_count(point);
            assert!(t == 0 || t == 2, "q={q}: off-conic point sees {t} tangents");
        }
        // calibrate_constant's post-check sweeps every off-conic point and
        // errors on any disagreement, so success is the 100% agreement claim
        calibrate_constant(&field, &conic).unwrap();
    }
    println!(
        "criterion 7: PASS - totals (q+1, q(q+1)/2, q(q-1)/2), tangent counts in {{0,2}}, \
         and full geometric/character agreement for q in {{5,7,9,11,13}}"
    );
}

// ---- criterion 8 ----

#[test]
fn criterion_8_condition_machinery_agreement() {
    let cfg = cfg();
    // (f1 terms, f2 terms, expected-criterion) over both fields; forms are
    // written with integer coefficients meaningful in characteristic 3 and 5
    type Form = Vec<(Vec<u16>, i64)>;
    let x2 = |i: usize| {
        let mut e = vec![0u16; 3];
        e[i] = 2;
        e
    };
    let xy = |i: usize, j: usize| {
        let mut e = vec![0u16; 3];
        e[i] += 1;
        e[j] += 1;
        e
    };
    let diag = |a: i64, b: i64, c: i64| -> Form { vec![(x2(0), a), (x2(1), b), (x2(2), c)] };
    let cases: Vec<(Form, Form, bool)> = vec![
        // tangent smooth pair
        (diag(1, 1, -1), diag(1, -1, -1), true),
        // transverse-style pair with a cross term
        (
            diag(1, 1, -1),
            vec![(x2(0), 1), (x2(1), 2), (xy(0, 2), 1), (x2(2), 1)],
            true,
        ),
        // rank-2 times smooth
        (vec![(xy(0, 1), 1)], diag(1, 1, -1), true),
        // two rank-2 forms sharing a factor
        (vec![(xy(0, 1), 1)], vec![(xy(0, 2), 1)], true),
        // definite-looking against indefinite
        (diag(1, 1, 1), diag(1, 1, -1), true),
        // two smooth conics with swapped cross structure
        (
            vec![(x2(0), 1), (xy(1, 2), -1)],
            vec![(x2(1), 1), (xy(0, 2), -1)],
            true,
        ),
        // rank-1 first member
        (
            vec![(x2(0), 1), (xy(0, 1), 2), (x2(1), 1)],
            diag(1, -1, -1),
            false,
        ),
        // proportional pair
        (diag(1, 1, -1), diag(2, 2, -2), false),
        // two rank-1 squares
        (vec![(x2(0), 1)], vec![(x2(1), 1)], false),
        // proportional rank-2 pair
        (vec![(xy(0, 1), 1)], vec![(xy(0, 1), 2)], false),
    ];
    let mut checked = 0;
    for (p, k) in [(5u64, 1u32), (3, 2)] {
        let field = FieldSpec::new(p, k).unwrap();
        for (i, (t1, t2, expected)) in cases.iter().enumerate() {
            let f1 = Poly::from_terms(
                &field,
                3,
                t1.iter().map(|(e, c)| (e.clone(), field.from_int(*c))),
            )
            .unwrap();
            let f2 = Poly::from_terms(
                &field,
                3,
                t2.iter().map(|(e, c)| (e.clone(), field.from_int(*c))),
            )
            .unwrap();
            let criterion = check_condition_i_quadratic_pair(&field, &f1, &f2).unwrap();
            assert_eq!(
                criterion,
                *expected,
                "case {i} over F_{}: pair criterion",
                field.size()
            );
            let system =
                PolySystem::new(field.clone(), Ambient::Affine { n: 3 }, vec![f1, f2]).unwrap();
            let outcome = check_condition_iii(&system, 2, 100_000, 0, &cfg).unwrap();
            assert_eq!(
                outcome.is_certified(),
                *expected,
                "case {i} over F_{}: witnesses found iff the pair criterion holds",
                field.size()
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 20);
    println!(
        "criterion 8: PASS - pair criterion and witness search agree on all 20 cases \
         over F_5 and F_9 (rank-1 and proportional negatives included)"
    );
}

// ---- criterion 9 ----

fn run_with_workers(args: &[&str], workers: &str, csv: &Path) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sqval"));
    cmd.args(args)
        .arg("--workers")
        .arg(workers)
        .arg("--seed")
        .arg("0")
        .arg("--csv")
        .arg(csv);
    let out = cmd.output().expect("binary runs");
    let code = out.status.code();
    assert!(
        code == Some(0) || code == Some(1),
        "unexpected exit {code:?} for {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::read(csv).unwrap()
}

#[test]
fn criterion_9_worker_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let sys = |name: &str| data(name).to_str().unwrap().to_string();
    let jobs: Vec<(String, Vec<String>)> = vec![
        (
            "thm1".into(),
            vec![
                "verify".into(),
                "thm1".into(),
                "--system".into(),
                sys("thm1_affine.sys"),
                "--tower".into(),
                "1..6".into(),
            ],
        ),
        (
            "thm2".into(),
            vec![
                "verify".into(),
                "thm2".into(),
                "--system".into(),
                sys("conic_pair_transverse.sys"),
                "--tower".into(),
                "1..3".into(),
            ],
        ),
        (
            "cor1".into(),
            vec![
                "verify".into(),
                "cor1".into(),
                "--system".into(),
                sys("cor1_pair.sys"),
                "--fields".into(),
                "5,9,13,25,49,81".into(),
            ],
        ),
        (
            "classify".into(),
            vec![
                "classify".into(),
                "--system".into(),
                sys("single_conic.sys"),
                "--ext".into(),
                "2".into(),
            ],
        ),
        (
            "witness".into(),
            vec!["witness".into(), "--system".into(), sys("witness_pair.sys")],
        ),
        (
            "sweep".into(),
            vec![
                "sweep".into(),
                "--system".into(),
                sys("product_two.sys"),
                "--tower".into(),
                "1..2".into(),
            ],
        ),
    ];
    for (name, args) in &jobs {
        let args: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let csv1 = dir.path().join(format!("{name}_w1.csv"));
        let csv8 = dir.path().join(format!("{name}_w8.csv"));
        let b1 = run_with_workers(&args, "1", &csv1);
        let b8 = run_with_workers(&args, "8", &csv8);
        assert_eq!(b1, b8, "{name}: CSV differs between 1 and 8 workers");
        assert!(!b1.is_empty(), "{name}: CSV is empty");
    }
    println!(
        "criterion 9: PASS - byte-identical CSV with --workers 1 and --workers 8 \
         across verify/classify/witness/sweep runs at seed 0"
    );
}
