use std::collections::HashMap;

use super::{data_lines, DataLine, SmpsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
}

/// Name-indexed LP read from an MPS (CORE) file. Rows exclude the
/// objective; objective coefficients are kept per column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoreModel {
    pub name: String,
    pub objective_name: String,
    pub rows: Vec<Row>,
    pub columns: Vec<String>,
    /// `(row, column, value)` for constraint rows, in file order.
    pub coefficients: Vec<(usize, usize, f64)>,
    pub objective: Vec<f64>,
    /// MPS convention: an RHS entry on the objective row is the negated
    /// objective constant.
    pub objective_constant: f64,
    pub rhs: Vec<f64>,
    pub ranges: Vec<Option<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub warnings: Vec<String>,
    row_index: HashMap<String, usize>,
    col_index: HashMap<String, usize>,
}

/// A row reference that also admits the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowRef {
    Objective,
    Row(usize),
}

impl CoreModel {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.coefficients.len()
    }

    pub fn row(&self, name: &str) -> Option<RowRef> {
        if name == self.objective_name {
            Some(RowRef::Objective)
        } else {
            self.row_index.get(name).map(|&i| RowRef::Row(i))
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.col_index.get(name).copied()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Skip,
    End,
}

/// Fixed MPS field positions: 2–3, 5–12, 15–22, 25–36, 40–47, 50–61
/// (1-based).
fn fixed_fields(raw: &str) -> Vec<String> {
    const SPANS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];
    SPANS.iter().map(|&(a, b)| raw.get(a.min(raw.len())..b.min(raw.len())).unwrap_or("").trim().to_string()).collect()
}

fn parse_num(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// `(name, value)` pairs from tokens of the form
/// `[set] name value [name value]`.
fn pairs(tokens: &[String]) -> Option<Vec<(String, f64)>> {
    let body = if tokens.len() % 2 == 1 { &tokens[1..] } else { tokens };
    if body.is_empty() {
        return None;
    }
    body.chunks(2).map(|c| parse_num(&c[1]).map(|v| (c[0].clone(), v))).collect()
}

pub fn parse_core(text: &str) -> Result<CoreModel, SmpsError> {
    let mut m = CoreModel::default();
    let mut section = Section::Start;
    let mut saw_columns_data = false;
    let mut saw_columns = false;
    let mut columns_header_line = 0;
    let mut rhs_set: Option<String> = None;
    let mut bound_set: Option<String> = None;

    for DataLine { line, header, tokens, raw } in data_lines(text) {
        if header {
            let key = tokens[0].to_ascii_uppercase();
            section = match key.as_str() {
                "NAME" => {
                    m.name = tokens.get(1).cloned().unwrap_or_default();
                    Section::Start
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => {
                    saw_columns = true;
                    columns_header_line = line;
                    Section::Columns
                }
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "OBJSENSE" | "OBJSENS" => return Err(SmpsError::MalformedSection { line, message: "OBJSENSE is not supported".into() }),
                other => {
                    m.warnings.push(format!("line {line}: unknown section {other} ignored"));
                    Section::Skip
                }
            };
            if section == Section::End {
                break;
            }
            continue;
        }
        let malformed = |msg: &str| SmpsError::MalformedSection { line, message: msg.to_string() };
        match section {
            Section::Start => return Err(malformed("data before the first section")),
            Section::Skip => {}
            Section::End => unreachable!(),
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(malformed("ROWS entries have the form 'type name'"));
                }
                let name = tokens[1].clone();
                if name == m.objective_name || m.row_index.contains_key(&name) {
                    return Err(SmpsError::DuplicateName(name));
                }
                let kind = match tokens[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if m.objective_name.is_empty() {
                            m.objective_name = name;
                        } else {
                            m.warnings.push(format!("line {line}: extra objective row {name} ignored"));
                            m.row_index.insert(name, usize::MAX);
                        }
                        continue;
                    }
                    "E" => RowKind::Eq,
                    "L" => RowKind::Le,
                    "G" => RowKind::Ge,
                    _ => return Err(malformed("row type must be N, E, L or G")),
                };
                m.row_index.insert(name.clone(), m.rows.len());
                m.rows.push(Row { name, kind });
            }
            Section::Columns => {
                if tokens.iter().any(|t| t.contains("MARKER")) {
                    m.warnings.push(format!("line {line}: MARKER ignored"));
                    continue;
                }
                let (col, entries) = match column_entries(&tokens).or_else(|| column_entries(&fixed_tokens(&raw))) {
                    Some(v) => v,
                    None => return Err(malformed("COLUMNS entries have the form 'column row value [row value]'")),
                };
                saw_columns_data = true;
                let j = match m.col_index.get(&col) {
                    Some(&j) if j + 1 == m.columns.len() => j,
                    Some(_) => return Err(SmpsError::DuplicateName(col)),
                    None => {
                        m.col_index.insert(col.clone(), m.columns.len());
                        m.columns.push(col);
                        m.objective.push(0.0);
                        m.columns.len() - 1
                    }
                };
                for (row, v) in entries {
                    if row == m.objective_name {
                        m.objective[j] += v;
                        continue;
                    }
                    match m.row_index.get(&row) {
                        Some(&usize::MAX) => {}
                        Some(&i) => m.coefficients.push((i, j, v)),
                        None => return Err(SmpsError::UnknownRow(row)),
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let entries = match pairs(&tokens).or_else(|| pairs(&fixed_tokens(&raw))) {
                    Some(v) => v,
                    None => return Err(malformed("RHS/RANGES entries have the form '[set] row value [row value]'")),
                };
                if tokens.len() % 2 == 1 {
                    let set = tokens[0].clone();
                    match &rhs_set {
                        Some(s) if *s != set => {
                            m.warnings.push(format!("line {line}: additional RHS/RANGES set {set} ignored"));
                            continue;
                        }
                        _ => rhs_set = Some(set),
                    }
                }
                if m.rhs.len() != m.rows.len() {
                    m.rhs.resize(m.rows.len(), 0.0);
                    m.ranges.resize(m.rows.len(), None);
                }
                for (row, v) in entries {
                    if row == m.objective_name {
                        if section == Section::Rhs {
                            m.objective_constant = -v;
                        }
                        continue;
                    }
                    match m.row_index.get(&row) {
                        Some(&usize::MAX) => {}
                        Some(&i) if section == Section::Rhs => m.rhs[i] = v,
                        Some(&i) => m.ranges[i] = Some(v),
                        None => return Err(SmpsError::UnknownRow(row)),
                    }
                }
            }
            Section::Bounds => {
                if m.lower.len() != m.columns.len() {
                    m.lower.resize(m.columns.len(), 0.0);
                    m.upper.resize(m.columns.len(), f64::INFINITY);
                }
                let (kind, set, col, value) = match bound_entry(&tokens).or_else(|| bound_entry(&fixed_tokens(&raw))) {
                    Some(v) => v,
                    None => return Err(malformed("BOUNDS entries have the form 'type [set] column [value]'")),
                };
                if let Some(set) = set {
                    match &bound_set {
                        Some(s) if *s != set => {
                            m.warnings.push(format!("line {line}: additional BOUNDS set {set} ignored"));
                            continue;
                        }
                        _ => bound_set = Some(set),
                    }
                }
                let j = m.col_index.get(&col).copied().ok_or(SmpsError::UnknownName(col))?;
                match (kind.as_str(), value) {
                    ("UP", Some(v)) => m.upper[j] = v,
                    ("LO", Some(v)) => m.lower[j] = v,
                    ("FX", Some(v)) => {
                        m.lower[j] = v;
                        m.upper[j] = v;
                    }
                    ("FR", None) => {
                        m.lower[j] = f64::NEG_INFINITY;
                        m.upper[j] = f64::INFINITY;
                    }
                    ("MI", None) => m.lower[j] = f64::NEG_INFINITY,
                    ("PL", None) => m.upper[j] = f64::INFINITY,
                    _ => return Err(malformed("unsupported bound type")),
                }
            }
        }
    }
    if !saw_columns || !saw_columns_data {
        return Err(SmpsError::MalformedSection { line: columns_header_line, message: "COLUMNS section is missing or empty".into() });
    }
    if m.objective_name.is_empty() {
        return Err(SmpsError::MalformedSection { line: 0, message: "no objective (N) row".into() });
    }
    m.row_index.retain(|_, v| *v != usize::MAX);
    m.rhs.resize(m.rows.len(), 0.0);
    m.ranges.resize(m.rows.len(), None);
    m.lower.resize(m.columns.len(), 0.0);
    m.upper.resize(m.columns.len(), f64::INFINITY);
    Ok(m)
}

fn fixed_tokens(raw: &str) -> Vec<String> {
    let f = fixed_fields(raw);
    // Drop the type field for COLUMNS/RHS/RANGES lines and trailing blanks.
    let mut out: Vec<String> = f[1..].to_vec();
    while out.last().is_some_and(|s| s.is_empty()) {
        out.pop();
    }
    if !f[0].is_empty() {
        out.insert(0, f[0].clone());
    }
    out
}

fn column_entries(tokens: &[String]) -> Option<(String, Vec<(String, f64)>)> {
    if tokens.len() != 3 && tokens.len() != 5 {
        return None;
    }
    let col = tokens[0].clone();
    let entries = tokens[1..].chunks(2).map(|c| parse_num(&c[1]).map(|v| (c[0].clone(), v))).collect::<Option<Vec<_>>>()?;
    Some((col, entries))
}

type BoundEntry = (String, Option<String>, String, Option<f64>);

fn bound_entry(tokens: &[String]) -> Option<BoundEntry> {
    let kind = tokens.first()?.to_ascii_uppercase();
    let needs_value = matches!(kind.as_str(), "UP" | "LO" | "FX");
    let takes_no_value = matches!(kind.as_str(), "FR" | "MI" | "PL");
    if !needs_value && !takes_no_value {
        // Unknown type: report it as malformed later.
        return Some((kind, None, tokens.get(1)?.clone(), None));
    }
    match (needs_value, tokens.len()) {
        (true, 4) => Some((kind, Some(tokens[1].clone()), tokens[2].clone(), Some(parse_num(&tokens[3])?))),
        (true, 3) => Some((kind, None, tokens[1].clone(), Some(parse_num(&tokens[2])?))),
        (false, 3) => Some((kind, Some(tokens[1].clone()), tokens[2].clone(), None)),
        (false, 2) => Some((kind, None, tokens[1].clone(), None)),
        _ => None,
    }
}
