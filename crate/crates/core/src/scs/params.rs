use serde::{Deserialize, Serialize};

use super::ScsError;

/// How the in-sample set S and the replication set T are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// S grows by i.i.d. draws as the sample-size rule demands; T is a fresh
    /// draw of the same size every iteration.
    #[default]
    Adaptive,
    /// S = T = the full finite support with exact probabilities.
    FullSupport,
}

/// Tuning parameters of the SCS loop. Every field has a default, so a TOML
/// table may set any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScsParams {
    /// Stop once the direction norm falls to this value.
    pub eps: f64,
    /// Sufficient-decrease constant of the line search.
    pub m2: f64,
    /// Curvature constant of the line search.
    pub m1: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// Trust-radius growth/shrink factor.
    pub gamma: f64,
    pub delta0: f64,
    pub delta_max: f64,
    /// Required accuracy parameter of the sample-size rule. `None` derives
    /// it from a pilot sample.
    pub kappa: Option<f64>,
    /// Failure probability in the sample-size rule.
    pub kappa_eps: f64,
    /// Recourse bounds `m`, `M`; unset values come from the problem or a
    /// pilot sample.
    pub bound_lo: Option<f64>,
    pub bound_hi: Option<f64>,
    /// Termination also requires every subgradient aggregated in the
    /// direction to come from within this distance of the incumbent;
    /// otherwise the direction memory restarts.
    pub memory_radius: f64,
    /// Subgradients from null steps at the same incumbent that join the
    /// min-norm direction; zero keeps the two-term rule throughout.
    pub null_step_bundle: usize,
    pub max_iter: usize,
    /// Upper clamp of the sample-size rule.
    pub max_sample: usize,
    pub seed: u64,
    pub sampling: SamplingMode,
    pub max_bisections: usize,
    /// Line-search resolution and floor of the trust radius, both relative
    /// to `1 + ‖x̂‖∞`.
    pub resolution: f64,
    pub pilot_size: usize,
    /// Keep every line-search trial point in the report.
    pub record_trial_points: bool,
    /// Fill `wall_ms` in the history. Off by default so that output files
    /// are reproducible byte for byte.
    pub timing: bool,
}

impl Default for ScsParams {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            m2: 0.3,
            m1: 0.4,
            eta1: 2.0,
            eta2: 0.1,
            gamma: 2.0,
            delta0: 1.0,
            delta_max: 100.0,
            kappa: None,
            kappa_eps: 0.05,
            bound_lo: None,
            bound_hi: None,
            memory_radius: 1e-2,
            null_step_bundle: 10,
            max_iter: 1000,
            max_sample: 2000,
            seed: 0,
            sampling: SamplingMode::Adaptive,
            max_bisections: 60,
            resolution: 1e-7,
            pilot_size: 32,
            record_trial_points: false,
            timing: false,
        }
    }
}

impl ScsParams {
    pub fn validate(&self) -> Result<(), ScsError> {
        let bad = |m: &str| Err(ScsError::InvalidParams(m.to_string()));
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(0.25 <= self.m2 && self.m2 < self.m1 && self.m1 < 0.5) {
            return bad("need 0.25 <= m2 < m1 < 0.5");
        }
        if !(self.eta1 > 1.0) || !(self.eta2 > 0.0) {
            return bad("need eta1 > 1 and eta2 > 0");
        }
        if !(self.gamma > 1.0) {
            return bad("gamma must exceed 1");
        }
        if !(self.delta0 > 0.0 && self.delta0 <= self.delta_max) || !self.delta_max.is_finite() {
            return bad("need 0 < delta0 <= delta_max < inf");
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0) || !k.is_finite() {
                return bad("kappa must be positive");
            }
        }
        if !(self.kappa_eps > 0.0 && self.kappa_eps < 1.0) {
            return bad("kappa_eps must lie in (0, 1)");
        }
        if let (Some(lo), Some(hi)) = (self.bound_lo, self.bound_hi) {
            if !(lo <= hi) {
                return bad("bound_lo must not exceed bound_hi");
            }
        }
        if !(self.resolution > 0.0 && self.resolution < self.delta0) {
            return bad("resolution must lie in (0, delta0)");
        }
        if !(self.memory_radius > 0.0) {
            return bad("memory_radius must be positive");
        }
        if self.max_iter == 0 || self.max_sample == 0 || self.pilot_size == 0 || self.max_bisections == 0 {
            return bad("max_iter, max_sample, pilot_size and max_bisections must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ScsParams::default().validate().unwrap();
    }

    #[test]
    fn partial_toml() {
        let p: ScsParams = toml::from_str("eps = 1e-4\nsampling = \"full_support\"\n").unwrap();
        assert_eq!(p.eps, 1e-4);
        assert_eq!(p.sampling, SamplingMode::FullSupport);
        assert_eq!(p.m1, 0.4);
    }

    #[test]
    fn line_search_constants_ordered() {
        let p = ScsParams { m2: 0.45, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ScsParams { m1: 0.5, ..Default::default() };
        assert!(p.validate().is_err());
    }
}
