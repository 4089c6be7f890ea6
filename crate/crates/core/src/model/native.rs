//! Reader and writer for the native text format (see
//! `docs/native-format.md`).

use std::fmt::Write as _;
use std::path::Path;

use crate::linalg::DenseMatrix;

use super::{Marginal, ModelError, RandomEntry, RandomPosition, ScenarioSpec, Stochastics, TwoStageProblem};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Matrices,
    Bounds,
    Stoch,
    Done,
}

struct Lines<'a> {
    items: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let l = l.split('#').next().unwrap_or("");
                let toks: Vec<&str> = l.split_whitespace().collect();
                (!toks.is_empty()).then_some((i + 1, toks))
            })
            .collect();
        Self { items, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        let it = self.items.get(self.pos).cloned();
        self.pos += 1;
        it
    }

    fn peek(&self) -> Option<&(usize, Vec<&'a str>)> {
        self.items.get(self.pos)
    }

    /// Reads exactly `count` numbers from the following lines.
    fn numbers(&mut self, count: usize, line: usize) -> Result<Vec<f64>, ModelError> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let (ln, toks) = self.next().ok_or_else(|| perr(line, format!("expected {count} values, found {}", out.len())))?;
            for t in toks {
                out.push(number(t, ln)?);
            }
            if out.len() > count {
                return Err(perr(ln, format!("expected {count} values, found more")));
            }
        }
        Ok(out)
    }
}

fn perr(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse { line, message: message.into() }
}

fn number(tok: &str, line: usize) -> Result<f64, ModelError> {
    match tok.to_ascii_lowercase().as_str() {
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| perr(line, format!("invalid number '{tok}'"))),
    }
}

fn count(tok: &str, line: usize) -> Result<usize, ModelError> {
    tok.parse::<usize>().map_err(|_| perr(line, format!("invalid count '{tok}'")))
}

fn arg<'b>(toks: &[&'b str], i: usize, line: usize) -> Result<&'b str, ModelError> {
    toks.get(i).copied().ok_or_else(|| perr(line, "missing field"))
}

pub fn load_native(path: &Path) -> Result<TwoStageProblem, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::InvalidData(format!("cannot read {}: {e}", path.display())))?;
    parse_native(&text)
}

pub fn parse_native(text: &str) -> Result<TwoStageProblem, ModelError> {
    let mut lines = Lines::new(text);
    let mut section = Section::None;
    let mut name = String::from("unnamed");
    let mut mats: std::collections::HashMap<String, (usize, DenseMatrix)> = Default::default();
    let mut vecs: std::collections::HashMap<String, (usize, Vec<f64>)> = Default::default();
    let mut constant = 0.0;
    let mut lower: Option<Vec<f64>> = None;
    let mut recourse_bounds = None;
    let mut indep: Vec<RandomEntry> = Vec::new();
    let mut scenarios: Vec<ScenarioSpec> = Vec::new();

    while let Some((ln, toks)) = lines.next() {
        let head = toks[0].to_ascii_uppercase();
        match head.as_str() {
            "NAME" => {
                name = toks[1..].join(" ");
                continue;
            }
            "MATRICES" => {
                section = Section::Matrices;
                continue;
            }
            "BOUNDS" => {
                section = Section::Bounds;
                continue;
            }
            "STOCH" => {
                section = Section::Stoch;
                continue;
            }
            "END" => {
                section = Section::Done;
                break;
            }
            _ => {}
        }
        match section {
            Section::Matrices => match (toks[0], toks.len()) {
                ("OBJCONST", 2) => constant = number(toks[1], ln)?,
                (key @ ("Q" | "A" | "D" | "T" | "P"), 3) => {
                    let (r, c) = (count(toks[1], ln)?, count(toks[2], ln)?);
                    let data = lines.numbers(r * c, ln)?;
                    let m = DenseMatrix::new(r, c, data).map_err(|e| perr(ln, e.to_string()))?;
                    if mats.insert(key.to_string(), (ln, m)).is_some() {
                        return Err(perr(ln, format!("matrix {key} given twice")));
                    }
                }
                (key @ ("c" | "b" | "d" | "xi"), 2) => {
                    let n = count(toks[1], ln)?;
                    let v = lines.numbers(n, ln)?;
                    if vecs.insert(key.to_string(), (ln, v)).is_some() {
                        return Err(perr(ln, format!("vector {key} given twice")));
                    }
                }
                _ => return Err(perr(ln, format!("unexpected entry '{}' in MATRICES", toks.join(" ")))),
            },
            Section::Bounds => match head.as_str() {
                "LOWER" => {
                    if toks.len() == 2 && toks[1].eq_ignore_ascii_case("NONE") {
                        lower = None;
                    } else {
                        lower = Some(toks[1..].iter().map(|t| number(t, ln)).collect::<Result<_, _>>()?);
                    }
                }
                "RECOURSE" => {
                    if toks.len() != 3 {
                        return Err(perr(ln, "RECOURSE needs lo and hi"));
                    }
                    recourse_bounds = Some((number(toks[1], ln)?, number(toks[2], ln)?));
                }
                _ => return Err(perr(ln, format!("unexpected entry '{}' in BOUNDS", toks[0]))),
            },
            Section::Stoch => match head.as_str() {
                "INDEP" => {
                    if !scenarios.is_empty() {
                        return Err(perr(ln, "INDEP and SCENARIO entries cannot be mixed"));
                    }
                    let (position, rest) = position(&toks[1..], ln)?;
                    let kind = arg(rest, 0, ln)?.to_ascii_uppercase();
                    let nums: Vec<f64> = rest[1..].iter().map(|t| number(t, ln)).collect::<Result<_, _>>()?;
                    let marginal = match kind.as_str() {
                        "DISCRETE" => {
                            if nums.is_empty() || !nums.len().is_multiple_of(2) {
                                return Err(perr(ln, "DISCRETE needs value/probability pairs"));
                            }
                            Marginal::Discrete {
                                values: nums.iter().step_by(2).copied().collect(),
                                probs: nums.iter().skip(1).step_by(2).copied().collect(),
                            }
                        }
                        "UNIFORM" if nums.len() == 2 => Marginal::Uniform { lo: nums[0], hi: nums[1] },
                        "NORMAL" if nums.len() == 2 => Marginal::Normal { mean: nums[0], std: nums[1] },
                        _ => return Err(perr(ln, format!("unsupported distribution '{kind}'"))),
                    };
                    indep.push(RandomEntry { position, marginal });
                }
                "SCENARIO" => {
                    if !indep.is_empty() {
                        return Err(perr(ln, "INDEP and SCENARIO entries cannot be mixed"));
                    }
                    let prob = number(arg(&toks, 1, ln)?, ln)?;
                    let mut spec = ScenarioSpec { prob, rhs: Vec::new(), tech: Vec::new() };
                    while let Some((_, t)) = lines.peek() {
                        let h = t[0].to_ascii_uppercase();
                        if h != "RHS" && h != "TECH" {
                            break;
                        }
                        let (l2, t) = lines.next().expect("peeked");
                        let (pos, rest) = position(&t, l2)?;
                        if rest.len() != 1 {
                            return Err(perr(l2, "scenario override needs exactly one value"));
                        }
                        let v = number(rest[0], l2)?;
                        match pos {
                            RandomPosition::Rhs(i) => spec.rhs.push((i, v)),
                            RandomPosition::Tech(i, j) => spec.tech.push((i, j, v)),
                        }
                    }
                    scenarios.push(spec);
                }
                _ => return Err(perr(ln, format!("unexpected entry '{}' in STOCH", toks[0]))),
            },
            Section::None => return Err(perr(ln, format!("entry '{}' outside of a section", toks[0]))),
            Section::Done => unreachable!(),
        }
    }
    if section != Section::Done {
        return Err(perr(lines.items.last().map_or(0, |l| l.0), "missing END"));
    }

    let take_vec = |key: &str, vecs: &mut std::collections::HashMap<String, (usize, Vec<f64>)>| vecs.remove(key).map(|v| v.1);
    let c = take_vec("c", &mut vecs).ok_or_else(|| perr(0, "vector c is required"))?;
    let d = take_vec("d", &mut vecs).ok_or_else(|| perr(0, "vector d is required"))?;
    let xi = take_vec("xi", &mut vecs).ok_or_else(|| perr(0, "vector xi is required"))?;
    let b = take_vec("b", &mut vecs).unwrap_or_default();
    let (n1, m2) = (c.len(), xi.len());
    let q = mats.remove("Q").map(|m| m.1).unwrap_or_else(|| DenseMatrix::zeros(n1, n1));
    let a = mats.remove("A").map(|m| m.1).unwrap_or_else(|| DenseMatrix::zeros(0, n1));
    let d_mat = mats.remove("D").map(|m| m.1).ok_or_else(|| perr(0, "matrix D is required"))?;
    let tech = mats.remove("T").map(|m| m.1).unwrap_or_else(|| DenseMatrix::zeros(m2, n1));
    let p = mats.remove("P").map(|m| m.1);

    let stochastics = if scenarios.is_empty() { Stochastics::Independent(indep) } else { Stochastics::Scenarios(scenarios) };
    let problem = TwoStageProblem { name, q, c, a, b, lower_bounds: lower, d_mat, d, p, xi, tech, stochastics, constant, recourse_bounds };
    problem.validate()?;
    Ok(problem)
}

fn position<'b>(toks: &'b [&'b str], ln: usize) -> Result<(RandomPosition, &'b [&'b str]), ModelError> {
    match arg(toks, 0, ln)?.to_ascii_uppercase().as_str() {
        "RHS" => Ok((RandomPosition::Rhs(count(arg(toks, 1, ln)?, ln)?), &toks[2..])),
        "TECH" => Ok((RandomPosition::Tech(count(arg(toks, 1, ln)?, ln)?, count(arg(toks, 2, ln)?, ln)?), &toks[3..])),
        other => Err(perr(ln, format!("unknown position '{other}'"))),
    }
}

fn fmt_num(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:e}")
    }
}

fn write_matrix(out: &mut String, key: &str, m: &DenseMatrix) {
    let _ = writeln!(out, "{key} {} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
}

fn write_vector(out: &mut String, key: &str, v: &[f64]) {
    let _ = writeln!(out, "{key} {}", v.len());
    if !v.is_empty() {
        let row: Vec<String> = v.iter().map(|x| fmt_num(*x)).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
}

fn write_position(p: RandomPosition) -> String {
    match p {
        RandomPosition::Rhs(i) => format!("RHS {i}"),
        RandomPosition::Tech(i, j) => format!("TECH {i} {j}"),
    }
}

/// Serializes a problem; `parse_native(&to_native(p))` reproduces `p`
/// exactly (floats are written in shortest round-trip form).
pub fn to_native(p: &TwoStageProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", p.name);
    let _ = writeln!(out, "MATRICES");
    if !p.q.is_zero() {
        write_matrix(&mut out, "Q", &p.q);
    }
    write_vector(&mut out, "c", &p.c);
    if p.m1() > 0 {
        write_matrix(&mut out, "A", &p.a);
        write_vector(&mut out, "b", &p.b);
    }
    write_matrix(&mut out, "D", &p.d_mat);
    write_vector(&mut out, "d", &p.d);
    if let Some(pm) = &p.p {
        write_matrix(&mut out, "P", pm);
    }
    write_matrix(&mut out, "T", &p.tech);
    write_vector(&mut out, "xi", &p.xi);
    if p.constant != 0.0 {
        let _ = writeln!(out, "OBJCONST {}", fmt_num(p.constant));
    }
    let _ = writeln!(out, "BOUNDS");
    match &p.lower_bounds {
        Some(lb) => {
            let v: Vec<String> = lb.iter().map(|x| fmt_num(*x)).collect();
            let _ = writeln!(out, "LOWER {}", v.join(" "));
        }
        None => {
            let _ = writeln!(out, "LOWER NONE");
        }
    }
    if let Some((lo, hi)) = p.recourse_bounds {
        let _ = writeln!(out, "RECOURSE {} {}", fmt_num(lo), fmt_num(hi));
    }
    let _ = writeln!(out, "STOCH");
    match &p.stochastics {
        Stochastics::Independent(entries) => {
            for e in entries {
                let dist = match &e.marginal {
                    Marginal::Discrete { values, probs } => {
                        let pairs: Vec<String> =
                            values.iter().zip(probs).map(|(v, q)| format!("{} {}", fmt_num(*v), fmt_num(*q))).collect();
                        format!("DISCRETE {}", pairs.join(" "))
                    }
                    Marginal::Uniform { lo, hi } => format!("UNIFORM {} {}", fmt_num(*lo), fmt_num(*hi)),
                    Marginal::Normal { mean, std } => format!("NORMAL {} {}", fmt_num(*mean), fmt_num(*std)),
                };
                let _ = writeln!(out, "INDEP {} {dist}", write_position(e.position));
            }
        }
        Stochastics::Scenarios(list) => {
            for s in list {
                let _ = writeln!(out, "SCENARIO {}", fmt_num(s.prob));
                for &(i, v) in &s.rhs {
                    let _ = writeln!(out, "  RHS {i} {}", fmt_num(v));
                }
                for &(i, j, v) in &s.tech {
                    let _ = writeln!(out, "  TECH {i} {j} {}", fmt_num(v));
                }
            }
        }
    }
    let _ = writeln!(out, "END");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
NAME small
MATRICES
c 2
  1 1
A 1 2
  1 1
b 1
  1
D 1 2
  1 -1
d 2
  1 1
T 1 2
  1 0
xi 1
  0.5
BOUNDS
LOWER 0 0
RECOURSE 0 5
STOCH
INDEP RHS 0 DISCRETE 0 0.5 1 0.5   # coin
END
";

    #[test]
    fn parses_small_instance() {
        let p = parse_native(SMALL).unwrap();
        assert_eq!((p.n1(), p.n2(), p.m1(), p.m2()), (2, 2, 1, 1));
        assert_eq!(p.lower_bounds, Some(vec![0.0, 0.0]));
        assert_eq!(p.recourse_bounds, Some((0.0, 5.0)));
        assert_eq!(p.stochastics.support_size(), Some(2));
        assert!(p.q.is_zero());
    }

    #[test]
    fn round_trip() {
        let p = parse_native(SMALL).unwrap();
        let again = parse_native(&to_native(&p)).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = SMALL.replace("  1 -1", "  1 x");
        match parse_native(&bad) {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 10),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_native("MATRICES\nc 1\n 1\n"), Err(ModelError::Parse { .. })));
    }
}
