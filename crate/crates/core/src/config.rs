//! Run configuration shared by the command line and JSON config files.
//!
//! Every field except `experiment` is optional; unset fields take the
//! defaults of the selected experiment. The resolved experiment config, not
//! the `RunConfig`, is what gets hashed into output file names.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Family;
use crate::experiments::{
    AnnulusConfig, EndpointConfig, FailPointConfig, FamilyConfig, NarrowCompareConfig, NarrowResolution,
    NarrowSweepConfig, SolveConfig, SuiteConfig, W2Config,
};
use crate::geometry::{DomainSpec, NarrowSpec, Point};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Series terms for the rectangle closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_angles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_fits: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<NarrowResolution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbosity: Option<u8>,
}

fn set<T>(slot: &mut T, value: &Option<T>)
where
    T: Clone,
{
    if let Some(v) = value {
        *slot = v.clone();
    }
}

impl RunConfig {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self { experiment: experiment.into(), ..Self::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fields set in `other` replace those of `self`.
    pub fn merged(mut self, other: &RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            domain, eps, eps_list, t_list, h, n_terms, seed, n, family, n_angles, rho1, rho2, offset, r_fits,
            direction, resolution, rel_tol, output_dir, verbosity
        );
        if !other.experiment.is_empty() {
            self.experiment = other.experiment.clone();
        }
        self
    }

    fn require_domain(&self) -> Result<DomainSpec> {
        let domain = self
            .domain
            .clone()
            .ok_or_else(|| Error::InvalidArgument(format!("'{}' needs a domain spec", self.experiment)))?;
        domain.validate()?;
        Ok(domain)
    }

    fn narrow_domain(&self) -> Result<Option<NarrowSpec>> {
        match &self.domain {
            None => Ok(None),
            Some(DomainSpec::Narrow(spec)) => Ok(Some(spec.clone())),
            Some(_) => Err(Error::InvalidArgument(format!("'{}' needs a narrow domain", self.experiment))),
        }
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        let mut c = SolveConfig::new(self.require_domain()?, self.h.unwrap_or(0.02));
        set(&mut c.rel_tol, &self.rel_tol);
        Ok(c)
    }

    pub fn fail_point_config(&self) -> Result<FailPointConfig> {
        let mut c = FailPointConfig::new(self.require_domain()?, self.h.unwrap_or(0.01));
        set(&mut c.direction, &self.direction);
        set(&mut c.rel_tol, &self.rel_tol);
        Ok(c)
    }

    pub fn narrow_sweep_config(&self) -> Result<NarrowSweepConfig> {
        let mut c = NarrowSweepConfig::default();
        if let Some(spec) = self.narrow_domain()? {
            c.spec = spec;
        }
        set(&mut c.eps_list, &self.eps_list);
        set(&mut c.resolution, &self.resolution);
        set(&mut c.rel_tol, &self.rel_tol);
        Ok(c)
    }

    pub fn narrow_compare_config(&self) -> Result<NarrowCompareConfig> {
        let mut c = NarrowCompareConfig::default();
        if let Some(spec) = self.narrow_domain()? {
            c.spec = spec;
        }
        if let Some(eps) = self.eps {
            c.spec = c.spec.with_eps(eps);
        }
        set(&mut c.resolution, &self.resolution);
        set(&mut c.rel_tol, &self.rel_tol);
        Ok(c)
    }

    pub fn endpoint_config(&self) -> Result<EndpointConfig> {
        let mut c = EndpointConfig::default();
        set(&mut c.eps_list, &self.eps_list);
        set(&mut c.h, &self.h);
        set(&mut c.rel_tol, &self.rel_tol);
        Ok(c)
    }

    pub fn family_config(&self) -> Result<FamilyConfig> {
        let mut c = FamilyConfig::default();
        set(&mut c.family, &self.family);
        set(&mut c.t_list, &self.t_list);
        set(&mut c.h, &self.h);
        set(&mut c.rel_tol, &self.rel_tol);
        Ok(c)
    }

    pub fn w2_config(&self) -> Result<W2Config> {
        let mut c = W2Config::default();
        set(&mut c.h, &self.h);
        set(&mut c.r_fits, &self.r_fits);
        set(&mut c.rel_tol, &self.rel_tol);
        Ok(c)
    }

    pub fn annulus_config(&self) -> Result<AnnulusConfig> {
        let mut c = AnnulusConfig::default();
        set(&mut c.rho1, &self.rho1);
        set(&mut c.rho2, &self.rho2);
        set(&mut c.offset, &self.offset);
        set(&mut c.n_angles, &self.n_angles);
        set(&mut c.h, &self.h);
        set(&mut c.rel_tol, &self.rel_tol);
        Ok(c)
    }

    pub fn suite_config(&self) -> Result<SuiteConfig> {
        let mut c = SuiteConfig::default();
        set(&mut c.n, &self.n);
        set(&mut c.seed, &self.seed);
        set(&mut c.h, &self.h);
        set(&mut c.rel_tol, &self.rel_tol);
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_lossless() {
        let mut c = RunConfig::new("narrow-sweep");
        c.domain = Some(DomainSpec::Narrow(crate::experiments::symmetric_parabolas(0.1)));
        c.eps_list = Some(vec![0.2, 0.1, 0.05]);
        c.h = Some(0.1 + 0.2);
        c.seed = Some(u64::MAX);
        c.family = Some(Family::Tilt);
        c.output_dir = Some("out/".into());
        let back = RunConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unset_fields_are_omitted() {
        let text = serde_json::to_string(&RunConfig::new("validate")).unwrap();
        assert_eq!(text, r#"{"experiment":"validate"}"#);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"experiment":"suite","bogus":1}"#).is_err());
    }

    #[test]
    fn overrides_reach_the_experiment() {
        let mut c = RunConfig::new("triangle-family");
        c.family = Some(Family::Tilt);
        c.t_list = Some(vec![0.05, 0.1]);
        let f = c.family_config().unwrap();
        assert_eq!(f.family, Family::Tilt);
        assert_eq!(f.t_list, vec![0.05, 0.1]);
        assert_eq!(f.h, 0.008);
        assert!(RunConfig::new("narrow-sweep")
            .merged(&RunConfig { domain: Some(DomainSpec::Rectangle { eps: 0.1 }), ..Default::default() })
            .narrow_sweep_config()
            .is_err());
    }
}
