//! Augmentation policies: an ordered list of stages sharing one replication
//! count, an eligibility filter and a master seed.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use specaug_core::rng::derive_seed;
use specaug_core::{
    AffineConfig, AugmentSpec, DwtParams, DwtScope, ElasticConfig, GammaConfig, Method,
    WaveletKind, Window,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicationFilter {
    #[default]
    All,
    /// Only images whose labels contain at least one diseased patch.
    DiseasedOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub stages: Vec<AugmentSpec>,
    pub replication_filter: ReplicationFilter,
    pub master_seed: u64,
}

impl PolicyConfig {
    /// Chains `methods`; stage `i` gets the seed `derive_seed(master_seed, i)`.
    pub fn new(
        methods: Vec<Method>,
        replications: usize,
        eta: f64,
        master_seed: u64,
        replication_filter: ReplicationFilter,
    ) -> Result<Self> {
        let stages = methods
            .into_iter()
            .enumerate()
            .map(|(i, method)| AugmentSpec {
                method,
                replications,
                eta,
                seed: derive_seed(master_seed, i as u64),
            })
            .collect();
        let policy = Self {
            stages,
            replication_filter,
            master_seed,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.stages.first() else {
            return Err(CliError::Invalid("policy needs at least one stage".into()));
        };
        for (i, stage) in self.stages.iter().enumerate() {
            stage.validate().map_err(|e| {
                CliError::Invalid(format!("stage {} ({}): {e}", i + 1, stage.method.name()))
            })?;
            if stage.replications != first.replications {
                return Err(CliError::Invalid(format!(
                    "stage {} has {} replications but stage 1 defines {}",
                    i + 1,
                    stage.replications,
                    first.replications
                )));
            }
        }
        Ok(())
    }

    pub fn replications(&self) -> usize {
        self.stages[0].replications
    }

    /// First 12 hex digits of the SHA-256 of the policy's JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("policy serializes");
        let digest = Sha256::digest(&json);
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

/// Knobs shared by all methods when parsing a `+`-joined method list.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOptions {
    pub wavelet: WaveletKind,
    pub levels: usize,
    pub details_only: bool,
    pub gamma_range: (f64, f64),
    pub window: Window,
    pub rotation_max_deg: f64,
    pub grid: (usize, usize),
    pub disp_range: (f64, f64),
}

impl MethodOptions {
    pub fn with_window(window: Window) -> Self {
        let elastic = ElasticConfig::default();
        Self {
            wavelet: WaveletKind::Haar,
            levels: 2,
            details_only: false,
            gamma_range: (0.8, 1.2),
            window,
            rotation_max_deg: AffineConfig::default().rotation_max_deg,
            grid: (elastic.grid_rows, elastic.grid_cols),
            disp_range: (elastic.disp_min, elastic.disp_max),
        }
    }
}

/// Parses `dwt`, `dct+affine`, `dwt+affine+elastic`, ...
pub fn parse_methods(spec: &str, opts: &MethodOptions) -> Result<Vec<Method>> {
    spec.split('+')
        .map(|name| {
            Ok(match name.trim().to_ascii_lowercase().as_str() {
                "dct" => Method::Dct,
                "dwt" => Method::Dwt(DwtParams {
                    wavelet: opts.wavelet,
                    levels: opts.levels,
                    scope: if opts.details_only {
                        DwtScope::DetailsOnly
                    } else {
                        DwtScope::All
                    },
                }),
                "simple" => Method::Simple,
                "intensity" | "gamma" => Method::Intensity(GammaConfig {
                    gamma_lo: opts.gamma_range.0,
                    gamma_hi: opts.gamma_range.1,
                    window: opts.window,
                }),
                "affine" => Method::Affine(AffineConfig {
                    rotation_max_deg: opts.rotation_max_deg,
                    ..AffineConfig::default()
                }),
                "elastic" => Method::Elastic(ElasticConfig {
                    grid_rows: opts.grid.0,
                    grid_cols: opts.grid.1,
                    disp_min: opts.disp_range.0,
                    disp_max: opts.disp_range.1,
                }),
                other => return Err(CliError::Invalid(format!("unknown method {other:?}"))),
            })
        })
        .collect()
}

/// `lo:hi` as a pair of floats.
pub fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

/// `RxC` grid size, e.g. `4x4`.
pub fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected RxC, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(r)?, parse(c)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> MethodOptions {
        MethodOptions::with_window(Window::new(0.0, 255.0).unwrap())
    }

    #[test]
    fn chained_methods_parse_in_order() {
        let m = parse_methods("dwt+affine+elastic", &opts()).unwrap();
        let names: Vec<_> = m.iter().map(Method::name).collect();
        assert_eq!(names, ["dwt", "affine", "elastic"]);
        assert!(parse_methods("dwt+warp", &opts()).is_err());
    }

    #[test]
    fn option_values_reach_the_methods() {
        let mut o = opts();
        o.wavelet = WaveletKind::Db4;
        o.levels = 3;
        o.details_only = true;
        o.grid = (5, 6);
        o.disp_range = (2.0, 8.0);
        let m = parse_methods("dwt+elastic", &o).unwrap();
        assert_eq!(
            m[0],
            Method::Dwt(DwtParams {
                wavelet: WaveletKind::Db4,
                levels: 3,
                scope: DwtScope::DetailsOnly
            })
        );
        let Method::Elastic(e) = &m[1] else { panic!() };
        assert_eq!(
            (e.grid_rows, e.grid_cols, e.disp_min, e.disp_max),
            (5, 6, 2.0, 8.0)
        );
    }

    #[test]
    fn stage_seeds_differ_and_hash_is_stable() {
        let p = PolicyConfig::new(
            parse_methods("dwt+affine", &opts()).unwrap(),
            5,
            0.005,
            7,
            ReplicationFilter::DiseasedOnly,
        )
        .unwrap();
        assert_ne!(p.stages[0].seed, p.stages[1].seed);
        assert_eq!(p.hash().len(), 12);
        assert_eq!(p.hash(), p.clone().hash());
        let mut q = p.clone();
        q.master_seed = 8;
        assert_ne!(p.hash(), q.hash());
    }

    #[test]
    fn invalid_policies() {
        assert!(PolicyConfig::new(vec![], 5, 0.1, 0, ReplicationFilter::All).is_err());
        assert!(PolicyConfig::new(vec![Method::Dct], 0, 0.1, 0, ReplicationFilter::All).is_err());
        let mut p = PolicyConfig::new(
            vec![Method::Dct, Method::Simple],
            3,
            0.1,
            0,
            ReplicationFilter::All,
        )
        .unwrap();
        p.stages[1].replications = 2;
        assert!(p.validate().is_err());
    }

    #[test]
    fn range_and_grid_syntax() {
        assert_eq!(parse_range("1:20"), Ok((1.0, 20.0)));
        assert_eq!(parse_range("-1000:400"), Ok((-1000.0, 400.0)));
        assert!(parse_range("1-20").is_err());
        assert_eq!(parse_grid("4x4"), Ok((4, 4)));
        assert_eq!(parse_grid("3X5"), Ok((3, 5)));
        assert!(parse_grid("4").is_err());
    }
}
