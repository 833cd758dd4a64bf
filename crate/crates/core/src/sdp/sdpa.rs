//! SDPA sparse format (`.dat-s`).
//!
//! SDPA states the primal as `min c^T y` over `F(y) = sum y_k F_k - F_0`
//! PSD and the dual as `max <F_0, X>` with `<F_k, X> = c_k`, `X` PSD, which
//! is exactly our standard form with `F_0 = C`, `F_k = A_k` and `c = b`.
//! Indices in the file are 1-based; negative block sizes denote diagonal
//! blocks.

use std::fmt::Write as _;

use super::{BlockKind, Constraint, Relation, SdpProblem, SparseSym};
use crate::error::{Error, Result};

/// Writes the standard form of `problem` (see
/// [`SdpProblem::to_standard_form`]) in SDPA sparse format.
pub fn write(problem: &SdpProblem) -> String {
    let p = problem.to_standard_form().canonical();
    let mut out = String::new();
    let _ = writeln!(out, "{}", p.constraints.len());
    let _ = writeln!(out, "{}", p.blocks.len());
    let sizes: Vec<String> = p
        .blocks
        .iter()
        .map(|b| match *b {
            BlockKind::Psd(n) => n.to_string(),
            BlockKind::Diag(n) => format!("-{n}"),
        })
        .collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = p.constraints.iter().map(|c| fmt_f64(c.rhs)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    let mut emit = |k: usize, m: &SparseSym| {
        for e in &m.entries {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                k,
                e.block + 1,
                e.row + 1,
                e.col + 1,
                fmt_f64(e.value)
            );
        }
    };
    emit(0, &p.objective);
    for (k, c) in p.constraints.iter().enumerate() {
        emit(k + 1, &c.coeffs);
    }
    out
}

/// Shortest representation that parses back to the same `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn is_comment(line: &str) -> bool {
    let t = line.trim_start();
    t.starts_with('"') || t.starts_with('*')
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '(' | ')'))
        .filter(|t| !t.is_empty())
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .replace(['D', 'd'], "e")
        .parse()
        .map_err(|_| Error::Parse {
            line,
            msg: format!("expected a number, found {tok:?}"),
        })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value {tok:?}"),
        });
    }
    Ok(v)
}

fn parse_index(tok: &str, line: usize) -> Result<i64> {
    tok.parse::<i64>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected an integer, found {tok:?}"),
    })
}

/// Parses SDPA sparse text into a standard-form problem (equalities only,
/// no free variables). Entries given twice are summed; entries below the
/// diagonal are mirrored to the upper triangle.
pub fn parse(text: &str) -> Result<SdpProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !is_comment(l));

    let mut header_int = |what: &str| -> Result<(usize, usize)> {
        let (ln, l) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing {what}"),
        })?;
        let tok = tokens(l).next().ok_or_else(|| Error::Parse {
            line: ln,
            msg: format!("missing {what}"),
        })?;
        let v = parse_index(tok, ln)?;
        usize::try_from(v).map(|v| (ln, v)).map_err(|_| Error::Parse {
            line: ln,
            msg: format!("{what} must be nonnegative"),
        })
    };
    let (_, m) = header_int("number of constraints")?;
    let (ln_nb, nblocks) = header_int("number of blocks")?;
    if nblocks == 0 {
        return Err(Error::Parse {
            line: ln_nb,
            msg: "at least one block is required".into(),
        });
    }

    let (ln, l) = lines.next().ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing block structure".into(),
    })?;
    let mut blocks = Vec::new();
    for tok in tokens(l) {
        if blocks.len() == nblocks {
            break;
        }
        let v = parse_index(tok, ln)?;
        let n = usize::try_from(v.unsigned_abs()).map_err(|_| Error::Parse {
            line: ln,
            msg: "block size out of range".into(),
        })?;
        if n == 0 {
            return Err(Error::Parse {
                line: ln,
                msg: "block size zero".into(),
            });
        }
        blocks.push(if v < 0 {
            BlockKind::Diag(n)
        } else {
            BlockKind::Psd(n)
        });
    }
    if blocks.len() != nblocks {
        return Err(Error::Parse {
            line: ln,
            msg: format!("expected {nblocks} block sizes, found {}", blocks.len()),
        });
    }

    let mut rhs = Vec::new();
    while rhs.len() < m {
        let (ln, l) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("expected {m} right-hand side values, found {}", rhs.len()),
        })?;
        for tok in tokens(l) {
            if rhs.len() == m {
                break;
            }
            rhs.push(parse_num(tok, ln)?);
        }
    }

    let mut objective = SparseSym::new();
    let mut mats: Vec<SparseSym> = vec![SparseSym::new(); m];
    for (ln, l) in lines {
        let t: Vec<&str> = tokens(l).take(5).collect();
        if t.len() < 5 {
            return Err(Error::Parse {
                line: ln,
                msg: "an entry needs five fields".into(),
            });
        }
        let k = parse_index(t[0], ln)?;
        let b = parse_index(t[1], ln)?;
        let i = parse_index(t[2], ln)?;
        let j = parse_index(t[3], ln)?;
        let v = parse_num(t[4], ln)?;
        let bad = |msg: String| Error::Parse { line: ln, msg };
        if k < 0 || k as u64 > m as u64 {
            return Err(bad(format!("matrix index {k} out of range 0..={m}")));
        }
        if b < 1 || b as u64 > nblocks as u64 {
            return Err(bad(format!("block index {b} out of range 1..={nblocks}")));
        }
        let kind = blocks[(b - 1) as usize];
        let n = kind.size() as u64;
        if i < 1 || j < 1 || i as u64 > n || j as u64 > n {
            return Err(bad(format!("entry ({i}, {j}) outside block {b} of size {n}")));
        }
        if matches!(kind, BlockKind::Diag(_)) && i != j {
            return Err(bad(format!("off-diagonal entry in diagonal block {b}")));
        }
        let target = if k == 0 {
            &mut objective
        } else {
            &mut mats[(k - 1) as usize]
        };
        target.push((b - 1) as usize, (i - 1) as usize, (j - 1) as usize, v);
    }

    let p = SdpProblem {
        blocks,
        objective: objective.canonical(),
        free_objective: Vec::new(),
        constraints: mats
            .into_iter()
            .zip(rhs)
            .map(|(a, r)| Constraint {
                coeffs: a.canonical(),
                free: Vec::new(),
                rhs: r,
                relation: Relation::Eq,
            })
            .collect(),
    };
    p.validate()?;
    Ok(p)
}
