//! Bisection line search for the sets
//! `L = {t : f(x+td) − f(x) ≤ −m₂ t ‖d‖²}` and
//! `R = {t : 0 > ⟨g(x+td), d⟩ ≥ −m₁ ‖d‖²}`.

use crate::linalg::{dot, norm2, norm_inf};
use crate::oracle::{Evaluation, Objective, OracleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailReason {
    /// No trial step decreased the function enough.
    NoDescent,
    /// The bisection budget ran out before the bracket reached the
    /// resolution floor.
    MaxBisections,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LineSearchOutcome {
    /// `t ∈ L ∩ R`.
    Success {
        t: f64,
        x: Vec<f64>,
        eval: Evaluation,
    },
    /// `t = t_max ∈ L` but the slope is still steeper than `−m₁‖d‖²`;
    /// the trust region cut the step short.
    Boundary {
        t: f64,
        x: Vec<f64>,
        eval: Evaluation,
    },
    /// The bracket collapsed around a kink, where `R` can be empty: `t` is
    /// the last step in `L`, and the trial just past the kink is in
    /// [`LineSearch::upper`].
    Kink {
        t: f64,
        x: Vec<f64>,
        eval: Evaluation,
    },
    Fail(FailReason),
}

impl LineSearchOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, LineSearchOutcome::Success { .. })
    }

    /// Step, point and evaluation of a usable candidate.
    pub fn candidate(&self) -> Option<(f64, &[f64], &Evaluation)> {
        match self {
            LineSearchOutcome::Success { t, x, eval }
            | LineSearchOutcome::Boundary { t, x, eval }
            | LineSearchOutcome::Kink { t, x, eval } => Some((*t, x, eval)),
            LineSearchOutcome::Fail(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearch {
    pub outcome: LineSearchOutcome,
    /// Null-step information: the shortest rejected-as-too-long trial
    /// whose slope is at least `−m₁‖d‖²`, or failing that the last trial
    /// rejected as too long.
    pub upper: Option<(Vec<f64>, Evaluation)>,
    pub trial_points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct LineSearchConfig {
    pub m1: f64,
    pub m2: f64,
    pub t_max: f64,
    pub max_bisections: usize,
    /// Smallest bracket width, as a displacement relative to `1 + ‖x‖∞`.
    /// Closer points are not reliably told apart by the recourse solver.
    pub resolution: f64,
}

/// Bisection on `[0, t_max]` starting at `t_max`. `f_x` is `f(x)`.
///
/// Too long (not in L, or slope already non-negative) halves the upper end;
/// too short (in L with slope below `−m₁‖d‖²`) raises the lower end.
/// A bracket narrower than the resolution floor with a positive lower end
/// is reported as [`LineSearchOutcome::Kink`].
/// `d` must lie in the feasible subspace, so `⟨g, d⟩` equals the projected
/// slope.
pub fn line_search<F: Objective + ?Sized>(f: &F, x: &[f64], f_x: f64, d: &[f64], cfg: LineSearchConfig) -> Result<LineSearch, OracleError> {
    let dd = dot(d, d);
    let floor = cfg.resolution * (1.0 + norm_inf(x)) / norm2(d).max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = (0.0, cfg.t_max);
    let mut t = cfg.t_max;
    let mut found_l = false;
    let mut best: Option<(f64, Vec<f64>, Evaluation)> = None;
    let mut trials = Vec::new();
    let mut upper = None;
    let mut informative = None;
    for _ in 0..=cfg.max_bisections {
        let xt: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
        let eval = f.evaluate(&xt)?;
        trials.push(xt.clone());
        let in_l = eval.value - f_x <= -cfg.m2 * t * dd;
        let slope = dot(&eval.subgradient, d);
        if !in_l || slope >= 0.0 {
            hi = t;
            if slope >= -cfg.m1 * dd {
                informative = Some((xt.clone(), eval.clone()));
            }
            upper = Some((xt, eval));
        } else if slope < -cfg.m1 * dd {
            found_l = true;
            if t >= cfg.t_max {
                let upper = informative.or(upper);
                return Ok(LineSearch { outcome: LineSearchOutcome::Boundary { t, x: xt, eval }, upper, trial_points: trials });
            }
            lo = t;
            best = Some((t, xt, eval));
        } else {
            let upper = informative.or(upper);
            return Ok(LineSearch { outcome: LineSearchOutcome::Success { t, x: xt, eval }, upper, trial_points: trials });
        }
        found_l |= in_l;
        if hi - lo <= floor {
            let upper = informative.or(upper);
            let outcome = match best {
                Some((t, x, eval)) => LineSearchOutcome::Kink { t, x, eval },
                None => LineSearchOutcome::Fail(if found_l { FailReason::MaxBisections } else { FailReason::NoDescent }),
            };
            return Ok(LineSearch { outcome, upper, trial_points: trials });
        }
        t = 0.5 * (lo + hi);
    }
    let reason = if found_l || best.is_some() { FailReason::MaxBisections } else { FailReason::NoDescent };
    Ok(LineSearch { outcome: LineSearchOutcome::Fail(reason), upper: informative.or(upper), trial_points: trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Half;
    impl Objective for Half {
        fn dim(&self) -> usize {
            1
        }
        fn evaluate(&self, x: &[f64]) -> Result<Evaluation, OracleError> {
            Ok(Evaluation { value: 0.5 * x[0] * x[0], subgradient: vec![x[0]] })
        }
    }

    fn cfg(t_max: f64) -> LineSearchConfig {
        LineSearchConfig { m1: 0.4, m2: 0.3, t_max, max_bisections: 60, resolution: 1e-10 }
    }

    #[test]
    fn quadratic_lands_in_window() {
        let r = line_search(&Half, &[1.0], 0.5, &[-1.0], cfg(2.0)).unwrap();
        let (t, _, _) = r.outcome.candidate().unwrap();
        assert!(r.outcome.is_success());
        assert!((0.6..1.0).contains(&t), "t = {t}");
    }

    #[test]
    fn short_cap_is_not_success() {
        let r = line_search(&Half, &[1.0], 0.5, &[-1.0], cfg(0.5)).unwrap();
        assert!(!r.outcome.is_success());
    }

    struct Vee;
    impl Objective for Vee {
        fn dim(&self) -> usize {
            1
        }
        fn evaluate(&self, x: &[f64]) -> Result<Evaluation, OracleError> {
            Ok(Evaluation { value: x[0].abs(), subgradient: vec![if x[0] >= 0.0 { 1.0 } else { -1.0 }] })
        }
    }

    #[test]
    fn kink_is_bracketed() {
        let r = line_search(&Vee, &[1.0], 1.0, &[-1.0], cfg(3.0)).unwrap();
        let LineSearchOutcome::Kink { t, .. } = r.outcome else { panic!("{:?}", r.outcome) };
        assert!((t - 1.0).abs() < 1e-9 && t < 1.0);
        let (xu, eu) = r.upper.unwrap();
        assert!(xu[0] <= 0.0 && eu.subgradient[0] == -1.0);
    }

    #[test]
    fn ascent_direction_fails() {
        let r = line_search(&Half, &[1.0], 0.5, &[1.0], cfg(2.0)).unwrap();
        assert_eq!(r.outcome, LineSearchOutcome::Fail(FailReason::NoDescent));
        assert!(r.upper.is_some());
    }
}
