//! CSV emission and number formatting.
//!
//! All values flow from integer counts, so formatting the same run twice
//! (or with different worker counts) yields byte-identical files.

use std::io::Write;

use sqval_core::count::{CountReport, ExponentFit};
use sqval_core::field::{FieldElement, FieldSpec};
use sqval_core::geometry::{PointClass, SingularProfile, WitnessCertificate};

pub const COUNT_HEADER: [&str; 12] = [
    "q",
    "n",
    "m",
    "pattern",
    "N_S",
    "main_term_num",
    "main_term_den",
    "abs_error",
    "ratio_halfpow",
    "ratio_gamma",
    "fitted_exponent",
    "bound_satisfied",
];

pub fn fmt_ratio(x: f64) -> String {
    format!("{x:.9}")
}

pub fn fmt_exponent(fit: &ExponentFit) -> String {
    match fit {
        ExponentFit::Exact => "exact".to_string(),
        ExponentFit::SingleNonzero { .. } => "single".to_string(),
        ExponentFit::Fitted { exponent, .. } => format!("{exponent:.6}"),
    }
}

pub fn count_row(report: &CountReport, fit: Option<&ExponentFit>) -> Vec<String> {
    vec![
        report.q.to_string(),
        report.n.to_string(),
        report.m.to_string(),
        report.pattern.to_string(),
        report.count.to_string(),
        report.main_term.numer().to_string(),
        report.main_term.denom().to_string(),
        report.abs_error_f64().to_string(),
        fmt_ratio(report.ratio_halfpow),
        report.ratio_gamma.map(fmt_ratio).unwrap_or_default(),
        fit.map(fmt_exponent).unwrap_or_default(),
        report.bound_satisfied.to_string(),
    ]
}

pub fn write_csv<W: Write>(sink: W, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()
}

pub const CLASSIFY_HEADER: [&str; 4] = ["point", "value", "class", "constant"];

pub fn classify_row(
    field: &FieldSpec,
    point: &[FieldElement],
    value: FieldElement,
    class: PointClass,
    constant: FieldElement,
) -> Vec<String> {
    vec![
        sqval_core::geometry::render_point(field, point),
        field.render(value),
        class.to_string(),
        field.render(constant),
    ]
}

pub const WITNESS_HEADER: [&str; 6] = ["index", "level", "q", "u", "v", "status"];

pub fn witness_row(cert: &WitnessCertificate) -> Vec<String> {
    let fmt_point = |pt: &[FieldElement]| {
        let coords: Vec<String> = pt.iter().map(|&c| cert.field.render(c)).collect();
        format!("({})", coords.join(","))
    };
    vec![
        cert.index.to_string(),
        cert.level.to_string(),
        cert.field.size().to_string(),
        fmt_point(&cert.u),
        fmt_point(&cert.v),
        "witnessed".to_string(),
    ]
}

pub fn witness_missing_row(index: usize, max_level: u32) -> Vec<String> {
    vec![
        index.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        format!("inconclusive up to level {max_level}"),
    ]
}

pub const SIGMA_HEADER: [&str; 8] = [
    "subset",
    "r",
    "dim",
    "confidence",
    "census",
    "sigma",
    "l",
    "gamma",
];

pub fn sigma_rows(profile: &SingularProfile) -> Vec<Vec<String>> {
    profile
        .per_subset
        .iter()
        .map(|(mask, sub)| {
            let members: Vec<String> = (0..profile.m)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| (i + 1).to_string())
                .collect();
            let census: Vec<String> = sub.counts.iter().map(|(e, c)| format!("{e}:{c}")).collect();
            vec![
                format!("{{{}}}", members.join(",")),
                members.len().to_string(),
                sub.dim.to_string(),
                sub.confidence.to_string(),
                census.join(";"),
                profile.singular_dim.to_string(),
                profile.depth.to_string(),
                format!("{:.1}", profile.error_exponent),
            ]
        })
        .collect()
}

/// Human-readable block for a singular profile.
pub fn sigma_block(profile: &SingularProfile) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "singularity profile over F_{} (levels 1..={})\n",
        profile.base_q, profile.max_level
    ));
    for (mask, sub) in &profile.per_subset {
        let members: Vec<String> = (0..profile.m)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (i + 1).to_string())
            .collect();
        let census: Vec<String> = sub.counts.iter().map(|(e, c)| format!("{e}:{c}")).collect();
        out.push_str(&format!(
            "  T{{{}}}: dim {} ({}), census {}\n",
            members.join(","),
            sub.dim,
            sub.confidence,
            census.join(" ")
        ));
    }
    out.push_str(&format!(
        "  sigma = {}, l = {}, gamma = {:.1} ({})\n",
        profile.singular_dim,
        profile.depth,
        profile.error_exponent,
        profile.confidence()
    ));
    for h in &profile.hypothesis {
        if !h.verified() {
            let members: Vec<String> = (0..profile.m)
                .filter(|i| h.subset_mask >> i & 1 == 1)
                .map(|i| (i + 1).to_string())
                .collect();
            out.push_str(&format!(
                "  warning: no witness that V({{{}}} minus {}) is not contained in V(f{}); containment unverified\n",
                members.join(","),
                h.distinguished,
                h.distinguished
            ));
        }
    }
    out
}
