use super::{data_lines, CoreModel, RowRef, SmpsError};

/// Two-stage split of a core model: columns `[0, first_stage_columns)` and
/// rows `[0, first_stage_rows)` belong to the first period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSplit {
    pub first_stage_columns: usize,
    pub first_stage_rows: usize,
    pub periods: [String; 2],
}

impl PeriodSplit {
    pub fn column_stage(&self, j: usize) -> usize {
        usize::from(j >= self.first_stage_columns)
    }

    pub fn row_stage(&self, i: usize) -> usize {
        usize::from(i >= self.first_stage_rows)
    }
}

pub fn parse_time(text: &str, core: &CoreModel) -> Result<PeriodSplit, SmpsError> {
    let mut in_periods = false;
    let mut markers: Vec<(usize, usize, String)> = Vec::new();
    for l in data_lines(text) {
        if l.header {
            match l.tokens[0].to_ascii_uppercase().as_str() {
                "TIME" => {}
                "PERIODS" => {
                    if l.tokens.get(1).is_some_and(|t| !t.eq_ignore_ascii_case("IMPLICIT")) {
                        return Err(SmpsError::MalformedSection { line: l.line, message: "only IMPLICIT time files are supported".into() });
                    }
                    in_periods = true;
                }
                "ENDATA" => break,
                other => return Err(SmpsError::MalformedSection { line: l.line, message: format!("unexpected section {other}") }),
            }
            continue;
        }
        if !in_periods || l.tokens.len() != 3 {
            return Err(SmpsError::MalformedSection { line: l.line, message: "expected 'column row period'".into() });
        }
        let col = core.column(&l.tokens[0]).ok_or_else(|| SmpsError::UnknownName(l.tokens[0].clone()))?;
        let row = match core.row(&l.tokens[1]) {
            Some(RowRef::Row(i)) => i,
            Some(RowRef::Objective) => 0,
            None => return Err(SmpsError::UnknownName(l.tokens[1].clone())),
        };
        markers.push((col, row, l.tokens[2].clone()));
    }
    if markers.len() != 2 {
        return Err(SmpsError::NotTwoPeriods);
    }
    let (c2, r2) = (markers[1].0, markers[1].1);
    if c2 == 0 || c2 <= markers[0].0 || r2 < markers[0].1 {
        return Err(SmpsError::NotTwoPeriods);
    }
    Ok(PeriodSplit { first_stage_columns: c2, first_stage_rows: r2, periods: [markers[0].2.clone(), markers[1].2.clone()] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smps::parse_core;

    const CORE: &str = "\
NAME T
ROWS
 N OBJ
 E R1
 E R2
 E R3
COLUMNS
    X1 OBJ 1 R1 1
    X2 R1 1 R2 1
    Y1 OBJ 2 R2 1
    Y2 R3 1
ENDATA
";

    #[test]
    fn split_mid_model() {
        let core = parse_core(CORE).unwrap();
        let t = parse_time("TIME T\nPERIODS IMPLICIT\n    X1 R1 P1\n    Y1 R2 P2\nENDATA\n", &core).unwrap();
        assert_eq!((t.first_stage_columns, t.first_stage_rows), (2, 1));
        assert_eq!(t.periods[1], "P2");
    }

    #[test]
    fn empty_first_stage() {
        let core = parse_core(CORE).unwrap();
        let r = parse_time("TIME T\nPERIODS\n    X1 OBJ P1\n    X1 R1 P2\nENDATA\n", &core);
        assert_eq!(r.unwrap_err(), SmpsError::NotTwoPeriods);
    }

    #[test]
    fn unknown_marker() {
        let core = parse_core(CORE).unwrap();
        let r = parse_time("TIME T\nPERIODS\n    X1 R1 P1\n    Z9 R2 P2\nENDATA\n", &core);
        assert_eq!(r.unwrap_err(), SmpsError::UnknownName("Z9".into()));
    }
}
