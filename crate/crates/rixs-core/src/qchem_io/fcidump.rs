//! FCIDUMP reader and writer.
//!
//! Grammar: a Fortran-namelist header `&FCI NORB=...,NELEC=...,MS2=...`,
//! terminated by `&END` or `/`, followed by records `value p q r s`.
//! `p q 0 0` is a one-electron integral, `0 0 0 0` the scalar offset,
//! anything else a two-electron integral in chemists' notation.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{canonical_key, IntegralSet, Parsed, QchemIoError, DUPLICATE_TOL};

/// Parses FCIDUMP text into an [`IntegralSet`] (dipole absent).
///
/// Every stored value is propagated to all of its symmetry-equivalent slots.
/// Duplicate records for the same canonical slot are rejected when they
/// differ by more than [`DUPLICATE_TOL`].
pub fn parse_fcidump(text: &str) -> Result<Parsed, QchemIoError> {
    let mut lines = text.lines().enumerate();

    // Collect the namelist header, which may span several lines.
    let mut header = String::new();
    let mut header_end_line = 0;
    let mut saw_start = false;
    for (idx, line) in lines.by_ref() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !saw_start {
            if !trimmed.to_ascii_uppercase().starts_with("&FCI") {
                return Err(QchemIoError::MalformedHeader {
                    line: lineno,
                    msg: "expected header to start with &FCI".into(),
                });
            }
            saw_start = true;
            header.push_str(&trimmed[4..]);
            header.push(',');
        } else {
            header.push_str(trimmed);
            header.push(',');
        }
        if header.to_ascii_uppercase().contains("&END") || trimmed.ends_with('/') {
            header_end_line = lineno;
            break;
        }
    }
    if header_end_line == 0 {
        return Err(QchemIoError::MalformedHeader {
            line: text.lines().count(),
            msg: "header never terminated by &END or /".into(),
        });
    }

    let fields = parse_namelist(&header, header_end_line)?;
    let mut warnings = Vec::new();
    let n_orb = read_usize(&fields, "NORB", header_end_line)?;
    let n_elec = read_usize(&fields, "NELEC", header_end_line)?;
    let two_sz = match fields.get("MS2") {
        Some(raw) => raw.parse::<i32>().map_err(|_| QchemIoError::MalformedHeader {
            line: header_end_line,
            msg: format!("MS2 value {raw:?} is not an integer"),
        })?,
        None => 0,
    };
    if fields.contains_key("ORBSYM") {
        warnings.push("ORBSYM present in header; point-group labels are ignored".into());
    }
    if n_orb == 0 {
        return Err(QchemIoError::MalformedHeader {
            line: header_end_line,
            msg: "NORB must be positive".into(),
        });
    }

    let mut set = IntegralSet::zeros(n_orb, n_elec, two_sz);
    let mut seen_v: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    let mut seen_h: HashMap<(usize, usize), f64> = HashMap::new();
    let mut seen_scalar: Option<f64> = None;

    for (idx, line) in lines {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let value = parse_value(tokens.next().unwrap(), lineno)?;
        let mut idx4 = [0i64; 4];
        for slot in &mut idx4 {
            let tok = tokens.next().ok_or_else(|| QchemIoError::MalformedRecord {
                line: lineno,
                msg: "expected four orbital indices after the value".into(),
            })?;
            *slot = tok.parse::<i64>().map_err(|_| QchemIoError::MalformedRecord {
                line: lineno,
                msg: format!("index token {tok:?} is not an integer"),
            })?;
        }
        if let Some(extra) = tokens.next() {
            return Err(QchemIoError::MalformedRecord {
                line: lineno,
                msg: format!("unexpected trailing token {extra:?}"),
            });
        }
        for &i in &idx4 {
            if i < 0 || i as usize > n_orb {
                return Err(QchemIoError::IndexOutOfRange {
                    line: lineno,
                    index: i,
                    n_orb,
                });
            }
        }
        let [p, q, r, s] = idx4.map(|i| i as usize);
        match (p, q, r, s) {
            (0, 0, 0, 0) => {
                if let Some(prev) = seen_scalar {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(QchemIoError::ConflictingDuplicate {
                            line: lineno,
                            slot: "scalar (0 0 0 0)".into(),
                            first: prev,
                            second: value,
                        });
                    }
                } else {
                    seen_scalar = Some(value);
                    set.e_frozen = value;
                }
            }
            (p, q, 0, 0) if p > 0 && q > 0 => {
                let key = (p.min(q) - 1, p.max(q) - 1);
                if let Some(&prev) = seen_h.get(&key) {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(QchemIoError::ConflictingDuplicate {
                            line: lineno,
                            slot: format!("h({p},{q})"),
                            first: prev,
                            second: value,
                        });
                    }
                } else {
                    seen_h.insert(key, value);
                    set.set_h_sym(p - 1, q - 1, value);
                }
            }
            (p, q, r, s) if p > 0 && q > 0 && r > 0 && s > 0 => {
                let key = canonical_key(p - 1, q - 1, r - 1, s - 1);
                if let Some(&prev) = seen_v.get(&key) {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(QchemIoError::ConflictingDuplicate {
                            line: lineno,
                            slot: format!("V({p},{q},{r},{s})"),
                            first: prev,
                            second: value,
                        });
                    }
                } else {
                    seen_v.insert(key, value);
                    set.set_v_sym(p - 1, q - 1, r - 1, s - 1, value);
                }
            }
            _ => {
                return Err(QchemIoError::MalformedRecord {
                    line: lineno,
                    msg: format!("invalid index pattern ({p} {q} {r} {s})"),
                });
            }
        }
    }

    set.validate()?;
    Ok(Parsed {
        integrals: set,
        warnings,
    })
}

/// Writes an [`IntegralSet`] as FCIDUMP text with 15 significant digits,
/// listing only canonical slots. `parse(write(x))` reproduces `x` on all
/// tensors to better than 1e-12.
pub fn write_fcidump(set: &IntegralSet) -> String {
    let n = set.n_orb;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "&FCI NORB={},NELEC={},MS2={},",
        n, set.n_elec, set.two_sz
    );
    let _ = writeln!(out, "&END");
    // Canonical loop: p >= q, r >= s, (p,q) >= (r,s).
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let s_max = if r == p { q } else { r };
                for s in 0..=s_max {
                    let v = set.v_at(p, q, r, s);
                    if v != 0.0 {
                        let _ = writeln!(
                            out,
                            "{} {} {} {} {}",
                            fmt_value(v),
                            p + 1,
                            q + 1,
                            r + 1,
                            s + 1
                        );
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let h = set.h_at(p, q);
            if h != 0.0 {
                let _ = writeln!(out, "{} {} {} 0 0", fmt_value(h), p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{} 0 0 0 0", fmt_value(set.e_frozen));
    out
}

fn fmt_value(v: f64) -> String {
    format!("{:.14E}", v)
}

fn parse_value(token: &str, line: usize) -> Result<f64, QchemIoError> {
    // Fortran-style D exponents appear in the wild.
    let cleaned = token.replace(['D', 'd'], "E");
    cleaned.parse::<f64>().map_err(|_| QchemIoError::MalformedRecord {
        line,
        msg: format!("value token {token:?} is not a number"),
    })
}

fn parse_namelist(header: &str, line: usize) -> Result<HashMap<String, String>, QchemIoError> {
    let mut fields = HashMap::new();
    let cleaned = header.replace("&END", "").replace('/', "");
    // ORBSYM=1,1,1,1 style values contain commas; re-join bare tokens that
    // follow an assignment.
    let mut current_key: Option<String> = None;
    for piece in cleaned.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        if let Some((key, value)) = piece.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(QchemIoError::MalformedHeader {
                    line,
                    msg: format!("malformed assignment {piece:?}"),
                });
            }
            fields.insert(key.clone(), value.trim().to_string());
            current_key = Some(key);
        } else if let Some(key) = &current_key {
            // Continuation of a comma-separated list value.
            let entry = fields.get_mut(key).expect("key inserted above");
            entry.push(',');
            entry.push_str(piece);
        } else {
            return Err(QchemIoError::MalformedHeader {
                line,
                msg: format!("unexpected token {piece:?} before any assignment"),
            });
        }
    }
    Ok(fields)
}

fn read_usize(
    fields: &HashMap<String, String>,
    key: &str,
    line: usize,
) -> Result<usize, QchemIoError> {
    let raw = fields.get(key).ok_or_else(|| QchemIoError::MalformedHeader {
        line,
        msg: format!("missing {key}"),
    })?;
    raw.parse::<usize>().map_err(|_| QchemIoError::MalformedHeader {
        line,
        msg: format!("{key} value {raw:?} is not a non-negative integer"),
    })
}
