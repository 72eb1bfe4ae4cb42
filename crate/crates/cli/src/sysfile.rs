//! Line-oriented system files.
//!
//! ```text
//! # comment
//! field p=5 k=1
//! ambient projective 2
//! vars x0 x1 x2
//! poly f1 = x0^2+x1^2-x2^2
//! poly f2 = x0^2+2*x1^2-3*x2^2
//! option c_user=8
//! ```
//!
//! Parsing builds the field up front (honoring a `ceiling` option), then the
//! polynomials against the declared variables; serialization renders a
//! canonical form that parses back to an identical in-memory system.

use std::fmt;

use sqval_core::count::{Ambient, PolySystem};
use sqval_core::field::{FieldElement, FieldSpec};
use sqval_core::parse::parse_poly;
use sqval_core::poly::Poly;

#[derive(Debug, Clone, PartialEq)]
pub struct SysFileError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for SysFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for SysFileError {}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SysOptions {
    /// Non-square override for the auxiliary variety, as element text.
    pub nu: Option<String>,
    pub c_user: Option<f64>,
    pub seed: Option<u64>,
    pub ceiling: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SystemFile {
    pub field: FieldSpec,
    pub ambient: Ambient,
    pub vars: Vec<String>,
    pub polys: Vec<NamedPoly>,
    pub options: SysOptions,
}

/// A named polynomial with the expression text it was parsed from. The raw
/// text survives so the same system can be re-read over a different field
/// (integer coefficients keep their intended signs that way).
#[derive(Debug, Clone)]
pub struct NamedPoly {
    pub name: String,
    pub poly: Poly,
    pub raw: String,
}

impl PartialEq for SystemFile {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.ambient == other.ambient
            && self.vars == other.vars
            && self.options == other.options
            && self.polys.len() == other.polys.len()
            && self
                .polys
                .iter()
                .zip(&other.polys)
                .all(|(a, b)| a.name == b.name && a.poly == b.poly)
    }
}

fn err(line: usize, msg: impl Into<String>) -> SysFileError {
    SysFileError {
        line,
        msg: msg.into(),
    }
}

fn parse_kv(line: usize, token: &str, key: &str) -> Result<u64, SysFileError> {
    let Some(rest) = token.strip_prefix(key).and_then(|r| r.strip_prefix('=')) else {
        return Err(err(line, format!("expected {key}=<int>, got {token:?}")));
    };
    rest.parse()
        .map_err(|_| err(line, format!("bad integer in {token:?}")))
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<SystemFile, SysFileError> {
        let mut field_decl: Option<(usize, u64, u32)> = None;
        let mut ambient_decl: Option<(usize, bool, usize)> = None;
        let mut vars_decl: Option<(usize, Vec<String>)> = None;
        let mut poly_lines: Vec<(usize, String, String)> = Vec::new();
        let mut options = SysOptions::default();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap();
            match keyword {
                "field" => {
                    if field_decl.is_some() {
                        return Err(err(lineno, "duplicate field declaration"));
                    }
                    let p_tok = words.next().ok_or_else(|| err(lineno, "missing p=<int>"))?;
                    let k_tok = words.next().ok_or_else(|| err(lineno, "missing k=<int>"))?;
                    let p = parse_kv(lineno, p_tok, "p")?;
                    let k = parse_kv(lineno, k_tok, "k")? as u32;
                    field_decl = Some((lineno, p, k));
                }
                "ambient" => {
                    if ambient_decl.is_some() {
                        return Err(err(lineno, "duplicate ambient declaration"));
                    }
                    let kind = words
                        .next()
                        .ok_or_else(|| err(lineno, "missing ambient kind"))?;
                    let projective = match kind {
                        "affine" => false,
                        "projective" => true,
                        other => {
                            return Err(err(
                                lineno,
                                format!("ambient must be affine or projective, got {other:?}"),
                            ))
                        }
                    };
                    let n: usize = words
                        .next()
                        .ok_or_else(|| err(lineno, "missing ambient dimension"))?
                        .parse()
                        .map_err(|_| err(lineno, "bad ambient dimension"))?;
                    ambient_decl = Some((lineno, projective, n));
                }
                "vars" => {
                    if vars_decl.is_some() {
                        return Err(err(lineno, "duplicate vars declaration"));
                    }
                    let names: Vec<String> = words.map(|w| w.to_string()).collect();
                    if names.is_empty() {
                        return Err(err(lineno, "vars line declares no variables"));
                    }
                    for name in &names {
                        let ok = name.chars().next().is_some_and(|c| c.is_ascii_lowercase())
                            && name.chars().all(|c| c.is_ascii_alphanumeric());
                        if !ok {
                            return Err(err(lineno, format!("bad variable name {name:?}")));
                        }
                    }
                    vars_decl = Some((lineno, names));
                }
                "poly" => {
                    let name = words
                        .next()
                        .ok_or_else(|| err(lineno, "missing polynomial name"))?
                        .to_string();
                    let rest = line
                        .split_once('=')
                        .map(|(_, expr)| expr.trim().to_string())
                        .ok_or_else(|| err(lineno, "poly line needs '='"))?;
                    if rest.is_empty() {
                        return Err(err(lineno, "empty polynomial expression"));
                    }
                    poly_lines.push((lineno, name, rest));
                }
                "option" => {
                    let kv = words
                        .next()
                        .ok_or_else(|| err(lineno, "missing option key=value"))?;
                    let Some((key, value)) = kv.split_once('=') else {
                        return Err(err(lineno, format!("option {kv:?} needs key=value")));
                    };
                    match key {
                        "nu" => options.nu = Some(value.to_string()),
                        "c_user" => {
                            options.c_user =
                                Some(value.parse().map_err(|_| err(lineno, "bad c_user value"))?)
                        }
                        "seed" => {
                            options.seed =
                                Some(value.parse().map_err(|_| err(lineno, "bad seed value"))?)
                        }
                        "ceiling" => {
                            options.ceiling = Some(
                                value
                                    .parse()
                                    .map_err(|_| err(lineno, "bad ceiling value"))?,
                            )
                        }
                        "workers" => {
                            options.workers = Some(
                                value
                                    .parse()
                                    .map_err(|_| err(lineno, "bad workers value"))?,
                            )
                        }
                        other => return Err(err(lineno, format!("unknown option {other:?}"))),
                    }
                }
                other => return Err(err(lineno, format!("unknown directive {other:?}"))),
            }
        }
        let (field_line, p, k) = field_decl.ok_or_else(|| err(0, "missing field declaration"))?;
        let ceiling = options
            .ceiling
            .unwrap_or(sqval_core::field::DEFAULT_CEILING);
        let field =
            FieldSpec::with_ceiling(p, k, ceiling).map_err(|e| err(field_line, e.to_string()))?;
        let (ambient_line, projective, n) =
            ambient_decl.ok_or_else(|| err(0, "missing ambient declaration"))?;
        let ambient = if projective {
            Ambient::Projective { n }
        } else {
            Ambient::Affine { n }
        };
        let (vars_line, vars) = vars_decl.ok_or_else(|| err(0, "missing vars declaration"))?;
        if vars.len() != ambient.nvars() {
            return Err(err(
                vars_line.max(ambient_line),
                format!(
                    "{} ambient needs {} variables, {} declared",
                    ambient,
                    ambient.nvars(),
                    vars.len()
                ),
            ));
        }
        if poly_lines.is_empty() {
            return Err(err(0, "no polynomials declared"));
        }
        let mut polys = Vec::with_capacity(poly_lines.len());
        for (lineno, name, expr) in poly_lines {
            let poly = parse_poly(&field, &vars, &expr)
                .map_err(|e| err(lineno, format!("column {}: {}", e.col, e.msg)))?;
            if poly.is_zero() {
                return Err(err(lineno, format!("polynomial {name} is zero")));
            }
            polys.push(NamedPoly {
                name,
                poly,
                raw: expr,
            });
        }
        Ok(SystemFile {
            field,
            ambient,
            vars,
            polys,
            options,
        })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "field p={} k={}\n",
            self.field.characteristic(),
            self.field.degree()
        ));
        let (kind, n) = match self.ambient {
            Ambient::Affine { n } => ("affine", n),
            Ambient::Projective { n } => ("projective", n),
        };
        out.push_str(&format!("ambient {kind} {n}\n"));
        out.push_str(&format!("vars {}\n", self.vars.join(" ")));
        for np in &self.polys {
            out.push_str(&format!(
                "poly {} = {}\n",
                np.name,
                np.poly.render_with(&self.field, &self.vars)
            ));
        }
        if let Some(nu) = &self.options.nu {
            out.push_str(&format!("option nu={nu}\n"));
        }
        if let Some(c) = self.options.c_user {
            out.push_str(&format!("option c_user={c}\n"));
        }
        if let Some(s) = self.options.seed {
            out.push_str(&format!("option seed={s}\n"));
        }
        if let Some(c) = self.options.ceiling {
            out.push_str(&format!("option ceiling={c}\n"));
        }
        if let Some(w) = self.options.workers {
            out.push_str(&format!("option workers={w}\n"));
        }
        out
    }

    pub fn to_system(&self) -> Result<PolySystem, SysFileError> {
        PolySystem::new(
            self.field.clone(),
            self.ambient,
            self.polys.iter().map(|np| np.poly.clone()).collect(),
        )
        .map_err(|e| err(0, e.to_string()))
    }

    /// Re-reads the file's polynomial expressions over another field; the
    /// options and ambient carry over unchanged.
    pub fn rebuild_over(&self, field: &FieldSpec) -> Result<SystemFile, SysFileError> {
        let mut polys = Vec::with_capacity(self.polys.len());
        for np in &self.polys {
            let poly = parse_poly(field, &self.vars, &np.raw)
                .map_err(|e| err(0, format!("re-parsing {}: {}", np.name, e.msg)))?;
            if poly.is_zero() {
                return Err(err(
                    0,
                    format!("polynomial {} is zero over {}", np.name, field),
                ));
            }
            polys.push(NamedPoly {
                name: np.name.clone(),
                poly,
                raw: np.raw.clone(),
            });
        }
        Ok(SystemFile {
            field: field.clone(),
            ambient: self.ambient,
            vars: self.vars.clone(),
            polys,
            options: self.options.clone(),
        })
    }

    /// The `nu` option parsed against the system's field, if present.
    pub fn nu_override(&self) -> Result<Option<FieldElement>, SysFileError> {
        match &self.options.nu {
            None => Ok(None),
            Some(text) => self
                .field
                .parse_element(text)
                .map(Some)
                .map_err(|e| err(0, format!("bad nu option: {e}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONIC_PAIR: &str = "\
# two smooth conics
field p=5 k=1
ambient projective 2
vars x0 x1 x2
poly f1 = x0^2+x1^2-x2^2
poly f2 = x0^2+2*x1^2-3*x2^2
option c_user=8
option seed=0
";

    #[test]
    fn parses_and_round_trips() {
        let file = SystemFile::parse(CONIC_PAIR).unwrap();
        assert_eq!(file.field.size(), 5);
        assert_eq!(file.ambient, Ambient::Projective { n: 2 });
        assert_eq!(file.polys.len(), 2);
        assert_eq!(file.options.c_user, Some(8.0));
        let text = file.serialize();
        let again = SystemFile::parse(&text).unwrap();
        assert_eq!(file, again);
        file.to_system().unwrap();
    }

    #[test]
    fn rejects_undeclared_variable_with_location() {
        let text = "field p=5 k=1\nambient affine 2\nvars x0 x1\npoly f1 = x0 + x9\n";
        let e = SystemFile::parse(text).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.msg.contains("undeclared variable"), "{}", e.msg);
    }

    #[test]
    fn rejects_homogeneity_violation_via_system() {
        let text = "field p=5 k=1\nambient projective 2\nvars x0 x1 x2\npoly f1 = x0^2 + x1\n";
        let file = SystemFile::parse(text).unwrap();
        let e = file.to_system().unwrap_err();
        assert!(e.msg.contains("homogeneous"), "{}", e.msg);
    }

    #[test]
    fn rejects_zero_poly_and_bad_directives() {
        let zero = "field p=5 k=1\nambient affine 1\nvars x0\npoly f1 = x0 + 4*x0\n";
        assert!(SystemFile::parse(zero).unwrap_err().msg.contains("zero"));
        let unknown = "field p=5 k=1\nwhatever\n";
        assert!(SystemFile::parse(unknown)
            .unwrap_err()
            .msg
            .contains("unknown directive"));
        let var_mismatch = "field p=5 k=1\nambient affine 2\nvars x0\npoly f1 = x0\n";
        assert!(SystemFile::parse(var_mismatch)
            .unwrap_err()
            .msg
            .contains("variables"));
    }

    #[test]
    fn extension_coefficients_round_trip() {
        let text = "field p=3 k=2\nambient affine 2\nvars x0 x1\npoly f1 = (1+2g)*x0+x1^2\n";
        let file = SystemFile::parse(text).unwrap();
        let again = SystemFile::parse(&file.serialize()).unwrap();
        assert_eq!(file, again);
    }

    #[test]
    fn nu_override_parses_against_field() {
        let text = "field p=5 k=1\nambient affine 1\nvars x0\npoly f1 = x0\noption nu=3\n";
        let file = SystemFile::parse(text).unwrap();
        let nu = file.nu_override().unwrap().unwrap();
        assert_eq!(nu.value(), 3);
    }
}
