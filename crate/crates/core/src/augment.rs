//! Uniform description of every augmentation method.
//!
//! An [`AugmentSpec`] fixes the method, replication count, noise ceiling and
//! seed. Producing replication `r` is split into two steps so that every
//! random choice can be logged and replayed: [`AugmentSpec::draw`] samples
//! the per-replication parameters, and [`AugmentSpec::apply`] is a pure
//! function of the input and that [`Draw`].

use serde::{Deserialize, Serialize};

use crate::baseline::{
    apply_affine, apply_affine_labels, apply_elastic, apply_elastic_labels, apply_gamma,
    AffineConfig, AffineParams, DisplacementGrid, ElasticConfig, GammaConfig,
};
use crate::corruption::{synthesize_replication, DwtScope};
use crate::dwt::WaveletKind;
use crate::error::{Error, Result};
use crate::image::{Image, LabelGrid};
use crate::rng::NoiseDraw;
use crate::schedule::rho_schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DwtParams {
    pub wavelet: WaveletKind,
    pub levels: usize,
    #[serde(default)]
    pub scope: DwtScope,
}

impl Default for DwtParams {
    fn default() -> Self {
        Self {
            wavelet: WaveletKind::Haar,
            levels: 2,
            scope: DwtScope::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Method {
    Dct,
    Dwt(DwtParams),
    Simple,
    Affine(AffineConfig),
    Intensity(GammaConfig),
    Elastic(ElasticConfig),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Dct => "dct",
            Method::Dwt(_) => "dwt",
            Method::Simple => "simple",
            Method::Affine(_) => "affine",
            Method::Intensity(_) => "intensity",
            Method::Elastic(_) => "elastic",
        }
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self, Method::Dct | Method::Dwt(_))
    }

    /// Geometric methods move pixels and therefore labels.
    pub fn is_geometric(&self) -> bool {
        matches!(self, Method::Affine(_) | Method::Elastic(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub method: Method,
    pub replications: usize,
    /// Maximum noise fraction; only read by the spectral methods.
    pub eta: f64,
    pub seed: u64,
}

/// Parameters chosen for one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Draw {
    Spectral { rho: f64 },
    Copy,
    Affine(AffineParams),
    Gamma { gamma: f64 },
    Elastic(DisplacementGrid),
}

/// An image with its optional patch labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Image,
    pub labels: Option<LabelGrid>,
}

impl Sample {
    pub fn new(image: Image, labels: Option<LabelGrid>) -> Result<Self> {
        if let Some(l) = &labels {
            crate::image::expect_shape(image.shape(), l.image_shape())?;
        }
        Ok(Self { image, labels })
    }
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replication count must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!(
                "eta {} must lie in [0, 1]",
                self.eta
            )));
        }
        match &self.method {
            Method::Dwt(p) if p.levels == 0 => Err(Error::InvalidParameter(
                "wavelet levels must be at least 1".into(),
            )),
            Method::Affine(c) => c.validate(),
            Method::Intensity(c) => c.validate(),
            Method::Elastic(c) => c.validate(),
            _ => Ok(()),
        }
    }

    /// Samples the parameters of replication `replication` (1-based).
    pub fn draw(&self, image_index: u64, replication: u64) -> Result<Draw> {
        let r = replication as usize;
        if r == 0 || r > self.replications {
            return Err(Error::InvalidParameter(format!(
                "replication {replication} outside 1..={}",
                self.replications
            )));
        }
        let noise = NoiseDraw::new(self.seed, image_index, replication);
        Ok(match &self.method {
            Method::Dct | Method::Dwt(_) => Draw::Spectral {
                rho: rho_schedule(self.replications, self.eta)[r - 1],
            },
            Method::Simple => Draw::Copy,
            Method::Affine(c) => Draw::Affine(c.sample(&noise)),
            Method::Intensity(c) => Draw::Gamma {
                gamma: c.gammas(self.replications)[r - 1],
            },
            Method::Elastic(c) => Draw::Elastic(c.sample(&noise, c.caps(self.replications)[r - 1])),
        })
    }

    /// Applies a recorded draw. Spectral noise is regenerated from
    /// `(seed, image_index, replication)`.
    pub fn apply(
        &self,
        input: &Sample,
        draw: &Draw,
        image_index: u64,
        replication: u64,
    ) -> Result<Sample> {
        let mismatch = || {
            Error::InvalidParameter(format!(
                "draw {draw:?} does not belong to method {}",
                self.method.name()
            ))
        };
        let (image, labels) = match (&self.method, draw) {
            (Method::Dct | Method::Dwt(_), Draw::Spectral { rho }) => (
                synthesize_replication(&input.image, self, image_index, replication, *rho)?,
                input.labels.clone(),
            ),
            (Method::Simple, Draw::Copy) => (input.image.clone(), input.labels.clone()),
            (Method::Intensity(c), Draw::Gamma { gamma }) => (
                apply_gamma(&input.image, *gamma, &c.window)?,
                input.labels.clone(),
            ),
            (Method::Affine(_), Draw::Affine(p)) => (
                apply_affine(&input.image, p)?,
                input.labels.as_ref().map(|l| apply_affine_labels(l, p)),
            ),
            (Method::Elastic(_), Draw::Elastic(g)) => (
                apply_elastic(&input.image, g)?,
                input
                    .labels
                    .as_ref()
                    .map(|l| apply_elastic_labels(l, g))
                    .transpose()?,
            ),
            _ => return Err(mismatch()),
        };
        Ok(Sample { image, labels })
    }

    /// All `R` replications of one input, with their draws.
    pub fn augment(&self, input: &Sample, image_index: u64) -> Result<Vec<(Draw, Sample)>> {
        self.validate()?;
        (1..=self.replications as u64)
            .map(|r| {
                let draw = self.draw(image_index, r)?;
                let out = self.apply(input, &draw, image_index, r)?;
                Ok((draw, out))
            })
            .collect()
    }
}
