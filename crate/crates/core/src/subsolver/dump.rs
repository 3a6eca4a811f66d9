//! Plain-text dump of a [`ConicProgram`] for cross-checking with other solvers.
//!
//! ```text
//! l1gn-conic 1
//! n <n> m <m> constant <c>
//! P <nnz>              upper triangle, one "row col value" per line, 0-based
//! q                    followed by one line with n values
//! A <nnz>              "row col value" lines
//! blocks <k>
//! zero <start> <len>   then a line with rhs
//! box <start> <len>    then a line with lo and a line with hi
//! soc <start> <len>    then a line with the offset (first entry is the scalar part)
//! psd <start> <len> <side>   then a line with the packed offset (off-diagonals ×√2)
//! l1 <start> <len>     then a line with weights and a line with offsets
//! ```
//!
//! The L1 rows of `A` are the linearized residual `J`, their offset is
//! `r = Ψ(x_k) − J x_k`. Values are written with `{:e}` and round-trip exactly.

use std::fmt::Write as _;

use crate::linalg::CscMatrix;
use crate::subsolver::program::{ConicProgram, RowKind};
use crate::{Error, Scalar};

fn line<T: Scalar>(out: &mut String, v: &[T]) {
    let parts: Vec<String> = v.iter().map(|x| format!("{:e}", x.f64())).collect();
    out.push_str(&parts.join(" "));
    out.push('\n');
}

fn triplets<T: Scalar>(out: &mut String, tag: &str, m: &CscMatrix<T>) {
    let _ = writeln!(out, "{tag} {}", m.nnz());
    for j in 0..m.ncols {
        for p in m.colptr[j]..m.colptr[j + 1] {
            let _ = writeln!(out, "{} {} {:e}", m.rowval[p], j, m.nzval[p].f64());
        }
    }
}

pub fn write_program<T: Scalar>(prog: &ConicProgram<T>) -> String {
    let mut out = String::new();
    out.push_str("l1gn-conic 1\n");
    let _ = writeln!(out, "n {} m {} constant {:e}", prog.n(), prog.m(), prog.constant.f64());
    triplets(&mut out, "P", &prog.p);
    out.push_str("q\n");
    line(&mut out, &prog.q);
    triplets(&mut out, "A", &prog.a);
    let _ = writeln!(out, "blocks {}", prog.blocks.len());
    for b in &prog.blocks {
        let len = b.kind.len();
        match &b.kind {
            RowKind::Zero { rhs } => {
                let _ = writeln!(out, "zero {} {len}", b.start);
                line(&mut out, rhs);
            }
            RowKind::Box { lo, hi } => {
                let _ = writeln!(out, "box {} {len}", b.start);
                line(&mut out, lo);
                line(&mut out, hi);
            }
            RowKind::SecondOrder { offset } => {
                let _ = writeln!(out, "soc {} {len}", b.start);
                line(&mut out, offset);
            }
            RowKind::Psd { side, offset } => {
                let _ = writeln!(out, "psd {} {len} {side}", b.start);
                line(&mut out, offset);
            }
            RowKind::L1 { weight, offset } => {
                let _ = writeln!(out, "l1 {} {len}", b.start);
                line(&mut out, weight);
                line(&mut out, offset);
            }
        }
    }
    out
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>), Error> {
        for (i, l) in self.lines.by_ref() {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok((i + 1, toks));
            }
        }
        Err(Error::Invalid("unexpected end of dump".into()))
    }

    fn values(&mut self, len: usize) -> Result<Vec<f64>, Error> {
        if len == 0 {
            return Ok(Vec::new());
        }
        let (ln, toks) = self.next()?;
        if toks.len() != len {
            return Err(Error::Invalid(format!("line {ln}: expected {len} values, found {}", toks.len())));
        }
        toks.iter().map(|t| num(t, ln)).collect()
    }
}

fn num<F: std::str::FromStr>(t: &str, ln: usize) -> Result<F, Error> {
    t.parse().map_err(|_| Error::Invalid(format!("line {ln}: cannot parse '{t}'")))
}

fn header<'a>(r: &mut Reader<'a>, tag: &str) -> Result<(usize, Vec<&'a str>), Error> {
    let (ln, toks) = r.next()?;
    if toks[0] != tag {
        return Err(Error::Invalid(format!("line {ln}: expected '{tag}', found '{}'", toks[0])));
    }
    Ok((ln, toks))
}

fn read_triplets(r: &mut Reader, tag: &str, nrows: usize, ncols: usize) -> Result<CscMatrix<f64>, Error> {
    let (ln, toks) = header(r, tag)?;
    let nnz: usize = num(toks.get(1).copied().unwrap_or(""), ln)?;
    let mut t = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (ln, toks) = r.next()?;
        if toks.len() != 3 {
            return Err(Error::Invalid(format!("line {ln}: expected 'row col value'")));
        }
        let (i, j): (usize, usize) = (num(toks[0], ln)?, num(toks[1], ln)?);
        if i >= nrows || j >= ncols {
            return Err(Error::Invalid(format!("line {ln}: entry ({i},{j}) out of range")));
        }
        t.push((i, j, num(toks[2], ln)?));
    }
    Ok(CscMatrix::from_triplets(nrows, ncols, &t))
}

pub fn read_program(text: &str) -> Result<ConicProgram<f64>, Error> {
    let mut r = Reader { lines: text.lines().enumerate() };
    let (ln, toks) = header(&mut r, "l1gn-conic")?;
    if toks.get(1) != Some(&"1") {
        return Err(Error::Invalid(format!("line {ln}: unsupported dump version")));
    }
    let (ln, toks) = header(&mut r, "n")?;
    if toks.len() != 6 {
        return Err(Error::Invalid(format!("line {ln}: malformed size line")));
    }
    let n: usize = num(toks[1], ln)?;
    let m: usize = num(toks[3], ln)?;
    let constant: f64 = num(toks[5], ln)?;
    let p = read_triplets(&mut r, "P", n, n)?;
    header(&mut r, "q")?;
    let q = r.values(n)?;
    let a = read_triplets(&mut r, "A", m, n)?;
    let (ln, toks) = header(&mut r, "blocks")?;
    let k: usize = num(toks.get(1).copied().unwrap_or(""), ln)?;
    let mut kinds = Vec::with_capacity(k);
    for _ in 0..k {
        let (ln, toks) = r.next()?;
        let len: usize = num(toks.get(2).copied().unwrap_or(""), ln)?;
        let kind = match toks[0] {
            "zero" => RowKind::Zero { rhs: r.values(len)? },
            "box" => RowKind::Box { lo: r.values(len)?, hi: r.values(len)? },
            "soc" => RowKind::SecondOrder { offset: r.values(len)? },
            "psd" => {
                let side: usize = num(toks.get(3).copied().unwrap_or(""), ln)?;
                RowKind::Psd { side, offset: r.values(len)? }
            }
            "l1" => RowKind::L1 { weight: r.values(len)?, offset: r.values(len)? },
            other => return Err(Error::Invalid(format!("line {ln}: unknown block '{other}'"))),
        };
        kinds.push(kind);
    }
    ConicProgram::new(p, q, constant, a, kinds)
}
