//! Dipole sidecar format. FCIDUMP has no slot for dipole integrals or core
//! tags, so they ride in a companion file:
//!
//! ```text
//! # comment
//! NORB 8
//! CORE 1
//! x 0.3 1 2
//! y -0.05 2 3
//! ```
//!
//! `NORB` must match the base integral set. `CORE` lists 1-based indices of
//! the core-tagged orbitals. Each dipole record `axis value p q` fills the
//! (p,q) and (q,p) slots of the named axis.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{IntegralSet, Parsed, QchemIoError, DUPLICATE_TOL};

/// Parses sidecar text against a previously parsed base set, returning a new
/// [`IntegralSet`] with dipole matrices and core tags filled in.
pub fn parse_dipole_sidecar(text: &str, base: &IntegralSet) -> Result<Parsed, QchemIoError> {
    let n = base.n_orb;
    let mut dipole = [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]];
    let mut core: Vec<usize> = Vec::new();
    let mut seen: HashMap<(usize, usize, usize), f64> = HashMap::new();
    let mut norb_declared = None;
    let mut warnings = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let head = tokens.next().unwrap();
        match head.to_ascii_uppercase().as_str() {
            "NORB" => {
                let tok = tokens.next().ok_or_else(|| QchemIoError::MalformedRecord {
                    line: lineno,
                    msg: "NORB requires a value".into(),
                })?;
                let declared =
                    tok.parse::<usize>()
                        .map_err(|_| QchemIoError::MalformedRecord {
                            line: lineno,
                            msg: format!("NORB value {tok:?} is not an integer"),
                        })?;
                if declared != n {
                    return Err(QchemIoError::NorbMismatch {
                        sidecar: declared,
                        base: n,
                    });
                }
                norb_declared = Some(declared);
            }
            "CORE" => {
                for tok in tokens {
                    let i = tok.parse::<i64>().map_err(|_| QchemIoError::MalformedRecord {
                        line: lineno,
                        msg: format!("core index {tok:?} is not an integer"),
                    })?;
                    if i < 1 || i as usize > n {
                        return Err(QchemIoError::IndexOutOfRange {
                            line: lineno,
                            index: i,
                            n_orb: n,
                        });
                    }
                    core.push(i as usize - 1);
                }
            }
            axis_token => {
                let axis = match axis_token {
                    "X" => 0,
                    "Y" => 1,
                    "Z" => 2,
                    _ => {
                        return Err(QchemIoError::InvalidAxis {
                            line: lineno,
                            token: head.to_string(),
                        })
                    }
                };
                let value_tok = tokens.next().ok_or_else(|| QchemIoError::MalformedRecord {
                    line: lineno,
                    msg: "expected `axis value p q`".into(),
                })?;
                let value =
                    value_tok
                        .parse::<f64>()
                        .map_err(|_| QchemIoError::MalformedRecord {
                            line: lineno,
                            msg: format!("value token {value_tok:?} is not a number"),
                        })?;
                let mut pq = [0i64; 2];
                for slot in &mut pq {
                    let tok = tokens.next().ok_or_else(|| QchemIoError::MalformedRecord {
                        line: lineno,
                        msg: "expected `axis value p q`".into(),
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
                for &i in &pq {
                    if i < 1 || i as usize > n {
                        return Err(QchemIoError::IndexOutOfRange {
                            line: lineno,
                            index: i,
                            n_orb: n,
                        });
                    }
                }
                let (p, q) = (pq[0] as usize - 1, pq[1] as usize - 1);
                let key = (axis, p.min(q), p.max(q));
                if let Some(&prev) = seen.get(&key) {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(QchemIoError::ConflictingDuplicate {
                            line: lineno,
                            slot: format!("d^{}({},{})", ["x", "y", "z"][axis], p + 1, q + 1),
                            first: prev,
                            second: value,
                        });
                    }
                } else {
                    seen.insert(key, value);
                    dipole[axis][p * n + q] = value;
                    dipole[axis][q * n + p] = value;
                }
            }
        }
    }

    if norb_declared.is_none() {
        return Err(QchemIoError::MalformedHeader {
            line: 1,
            msg: "sidecar must declare NORB".into(),
        });
    }
    if core.is_empty() {
        warnings.push("sidecar declares no CORE orbitals; CVS dipole will be unavailable".into());
    }
    core.sort_unstable();
    core.dedup();

    let mut out = base.clone();
    out.dipole = Some(dipole);
    out.core_orbitals = core;
    out.validate()?;
    Ok(Parsed {
        integrals: out,
        warnings,
    })
}

/// Writes the dipole matrices and core tags of `set` in sidecar format.
/// Returns `None` when the set carries no dipole data.
pub fn write_dipole_sidecar(set: &IntegralSet) -> Option<String> {
    let dipole = set.dipole.as_ref()?;
    let n = set.n_orb;
    let mut out = String::new();
    let _ = writeln!(out, "NORB {n}");
    if !set.core_orbitals.is_empty() {
        let tags: Vec<String> = set.core_orbitals.iter().map(|c| (c + 1).to_string()).collect();
        let _ = writeln!(out, "CORE {}", tags.join(" "));
    }
    for (axis, name) in dipole.iter().zip(["x", "y", "z"]) {
        for p in 0..n {
            for q in 0..=p {
                let v = axis[p * n + q];
                if v != 0.0 {
                    let _ = writeln!(out, "{} {:.14E} {} {}", name, v, p + 1, q + 1);
                }
            }
        }
    }
    Some(out)
}
