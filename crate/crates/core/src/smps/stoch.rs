use super::{data_lines, CoreModel, PeriodSplit, RowRef, SmpsError};

/// One independent discrete marginal. `column` is `None` for right-hand
/// side entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StochEntry {
    pub column: Option<usize>,
    pub row: RowRef,
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl StochEntry {
    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StochModel {
    pub entries: Vec<StochEntry>,
    pub warnings: Vec<String>,
}

pub fn parse_stoch(text: &str, core: &CoreModel, split: &PeriodSplit) -> Result<StochModel, SmpsError> {
    let mut model = StochModel::default();
    let mut in_indep = false;
    let mut labels: Vec<String> = Vec::new();
    for l in data_lines(text) {
        if l.header {
            let key = l.tokens[0].to_ascii_uppercase();
            match key.as_str() {
                "STOCH" => {}
                "INDEP" => {
                    let dist = l.tokens.get(1).map(|t| t.to_ascii_uppercase()).unwrap_or_default();
                    if dist != "DISCRETE" {
                        return Err(SmpsError::UnsupportedStochType(format!("INDEP {dist}")));
                    }
                    if l.tokens.get(2).is_some_and(|t| !t.eq_ignore_ascii_case("REPLACE")) {
                        return Err(SmpsError::UnsupportedStochType(format!("INDEP DISCRETE {}", l.tokens[2])));
                    }
                    in_indep = true;
                }
                "ENDATA" => break,
                "BLOCKS" | "SCENARIOS" | "NODES" | "DISTRIB" => return Err(SmpsError::UnsupportedStochType(key)),
                other => {
                    model.warnings.push(format!("line {}: unknown section {other} ignored", l.line));
                    in_indep = false;
                }
            }
            continue;
        }
        if !in_indep {
            continue;
        }
        let t = &l.tokens;
        if t.len() != 4 && t.len() != 5 {
            return Err(SmpsError::MalformedSection { line: l.line, message: "expected 'column row value [period] probability'".into() });
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| SmpsError::MalformedSection { line: l.line, message: format!("invalid number '{s}'") })
        };
        let value = num(&t[2])?;
        let prob = num(t.last().expect("length checked"))?;
        if t.len() == 5 && !split.periods.iter().any(|p| p == &t[3]) {
            return Err(SmpsError::UnknownName(t[3].clone()));
        }
        let row = core.row(&t[1]).ok_or_else(|| SmpsError::UnknownName(t[1].clone()))?;
        let column = core.column(&t[0]);
        let label = format!("{} {}", t[0], t[1]);
        match labels.iter().position(|x| *x == label) {
            Some(k) => {
                let e = &mut model.entries[k];
                e.values.push(value);
                e.probs.push(prob);
            }
            None => {
                labels.push(label);
                model.entries.push(StochEntry { column, row, values: vec![value], probs: vec![prob] });
            }
        }
    }
    for (e, label) in model.entries.iter().zip(&labels) {
        let total: f64 = e.probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 || e.probs.iter().any(|p| *p < 0.0) {
            return Err(SmpsError::ProbabilityNotSummingToOne(label.clone()));
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smps::{parse_core, parse_time};

    fn setup() -> (CoreModel, PeriodSplit) {
        let core = parse_core(
            "NAME T\nROWS\n N OBJ\n E R1\n G R2\nCOLUMNS\n    X1 OBJ 1 R1 1\n    Y1 OBJ 1 R2 1\n    Y1 R1 1\nRHS\n    RHS R2 6\nENDATA\n",
        )
        .unwrap();
        let split = parse_time("TIME T\nPERIODS IMPLICIT\n    X1 R1 P1\n    Y1 R2 P2\nENDATA\n", &core).unwrap();
        (core, split)
    }

    #[test]
    fn discrete_marginal_mean() {
        let (core, split) = setup();
        let s = parse_stoch("STOCH T\nINDEP DISCRETE\n    RHS R2 5 P2 0.3\n    RHS R2 7 P2 0.7\nENDATA\n", &core, &split).unwrap();
        assert_eq!(s.entries.len(), 1);
        assert!((s.entries[0].mean() - 6.4).abs() < 1e-12);
        assert_eq!(s.entries[0].column, None);
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let (core, split) = setup();
        let r = parse_stoch("STOCH T\nINDEP DISCRETE\n    RHS R2 5 P2 0.5\n    RHS R2 7 P2 0.4\nENDATA\n", &core, &split);
        assert!(matches!(r, Err(SmpsError::ProbabilityNotSummingToOne(_))));
    }

    #[test]
    fn blocks_are_unsupported() {
        let (core, split) = setup();
        let r = parse_stoch("STOCH T\nBLOCKS DISCRETE\n BL B1 P2 0.5\n    RHS R2 5\nENDATA\n", &core, &split);
        assert_eq!(r.unwrap_err(), SmpsError::UnsupportedStochType("BLOCKS".into()));
    }
}
