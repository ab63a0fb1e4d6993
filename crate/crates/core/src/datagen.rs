//! Authentic data under the sub-Gaussian design: i.i.d. entries with variance
//! `1/n`, a k-sparse signal, and Gaussian noise with standard deviation `σ_e/√n`.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CorruptionLedger, Matrix, RegressionInstance, SparseSignal, SupportSet};
use crate::rng::{stream, Purpose};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignDistribution {
    #[default]
    Gaussian,
    /// `±std` with equal probability.
    Rademacher,
}

impl DesignDistribution {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R, std: f64) -> f64 {
        match self {
            DesignDistribution::Gaussian => std * rng.sample::<f64, _>(StandardNormal),
            DesignDistribution::Rademacher => {
                if rng.random::<bool>() {
                    std
                } else {
                    -std
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalValues {
    /// Independent ±1 signs.
    PmOne,
    Ones,
    Fixed { values: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "indices", rename_all = "snake_case")]
pub enum SupportChoice {
    /// Uniform over all size-k subsets.
    #[default]
    Random,
    Prescribed(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalScheme {
    pub values: SignalValues,
    pub k: usize,
    #[serde(default)]
    pub support: SupportChoice,
}

impl SignalScheme {
    pub fn pm_one(k: usize) -> Self {
        Self {
            values: SignalValues::PmOne,
            k,
            support: SupportChoice::Random,
        }
    }

    pub fn ones(k: usize) -> Self {
        Self {
            values: SignalValues::Ones,
            k,
            support: SupportChoice::Random,
        }
    }

    pub fn with_support(mut self, indices: Vec<usize>) -> Self {
        self.support = SupportChoice::Prescribed(indices);
        self
    }
}

fn sample_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    dist: DesignDistribution,
    std: f64,
) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| dist.sample(rng, std))
}

/// `n × p` design with i.i.d. entries of variance `1/n`.
pub fn sample_design(n: usize, p: usize, dist: DesignDistribution, seed: u64) -> Matrix {
    let mut rng = stream(seed, Purpose::Design);
    sample_matrix(&mut rng, n, p, dist, 1.0 / (n as f64).sqrt())
}

pub fn sample_signal(p: usize, scheme: &SignalScheme, seed: u64) -> Result<SparseSignal> {
    let k = scheme.k;
    if k > p {
        return Err(Error::InvalidParameter(format!("sparsity {k} exceeds dimension {p}")));
    }
    let mut rng = stream(seed, Purpose::Signal);
    let support = match &scheme.support {
        SupportChoice::Random => {
            SupportSet::new(index::sample(&mut rng, p, k).into_vec(), p)?
        }
        SupportChoice::Prescribed(idx) => {
            if idx.len() != k {
                return Err(Error::InvalidParameter(format!(
                    "prescribed support has {} indices, expected {k}",
                    idx.len()
                )));
            }
            SupportSet::new(idx.clone(), p)?
        }
    };
    let values = match &scheme.values {
        SignalValues::PmOne => (0..k)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect(),
        SignalValues::Ones => vec![1.0; k],
        SignalValues::Fixed { values } => {
            if values.len() != k {
                return Err(Error::InvalidParameter(format!(
                    "{} fixed values given for sparsity {k}",
                    values.len()
                )));
            }
            values.clone()
        }
    };
    SparseSignal::new(p, support, values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    /// Authentic row count; also sets the `1/√n` scale.
    pub n: usize,
    /// Rows reserved for the adversary.
    pub n1: usize,
    pub p: usize,
    #[serde(default)]
    pub design: DesignDistribution,
    pub signal: SignalScheme,
    pub sigma_e: f64,
}

/// Generate `n + n1` authentic-model rows and pick a uniformly random size-`n`
/// authentic subset. Corruption modules overwrite the complement later.
pub fn assemble_instance(params: &InstanceParams, seed: u64) -> Result<RegressionInstance> {
    let InstanceParams {
        n, n1, p, sigma_e, ..
    } = *params;
    if n == 0 || p == 0 {
        return Err(Error::InvalidParameter("n and p must be positive".into()));
    }
    if !(sigma_e >= 0.0 && sigma_e.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level {sigma_e} must be >= 0")));
    }
    let rows = n + n1;
    let scale = 1.0 / (n as f64).sqrt();

    let x = sample_matrix(&mut stream(seed, Purpose::Design), rows, p, params.design, scale);
    let truth = sample_signal(p, &params.signal, seed)?;
    let beta = truth.dense();

    let mut noise_rng = stream(seed, Purpose::Noise);
    let noise_std = sigma_e * scale;
    let y = (0..rows)
        .map(|i| {
            let clean: f64 = truth.support().iter().map(|j| x.get(i, j) * beta[j]).sum();
            let e: f64 = noise_rng.sample(StandardNormal);
            clean + noise_std * e
        })
        .collect();

    let mut authentic_rows = index::sample(&mut stream(seed, Purpose::AuthenticRows), rows, n)
        .into_vec();
    authentic_rows.sort_unstable();

    Ok(RegressionInstance {
        x,
        y,
        truth,
        noise_sigma: sigma_e,
        authentic_rows,
        ledger: CorruptionLedger::clean(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CorruptionModel;

    fn params(n: usize, n1: usize, p: usize, k: usize, sigma_e: f64) -> InstanceParams {
        InstanceParams {
            n,
            n1,
            p,
            design: DesignDistribution::Gaussian,
            signal: SignalScheme::pm_one(k),
            sigma_e,
        }
    }

    fn variance(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    }

    #[test]
    fn gaussian_design_variance_at_full_scale() {
        let x = sample_design(1600, 4000, DesignDistribution::Gaussian, 11);
        let v = variance(x.as_slice());
        let target = 1.0 / 1600.0;
        assert!((v / target - 1.0).abs() < 0.05, "variance {v} vs {target}");
    }

    #[test]
    fn design_variance_within_three_standard_errors() {
        // 2e5 entries; var of sample variance for Gaussian ≈ 2σ⁴/(N−1).
        let n = 400;
        let x = sample_design(n, 500, DesignDistribution::Gaussian, 3);
        let s2 = 1.0 / n as f64;
        let se = s2 * (2.0 / (x.as_slice().len() - 1) as f64).sqrt();
        assert!((variance(x.as_slice()) - s2).abs() < 3.0 * se);
    }

    #[test]
    fn rademacher_entries_are_plus_minus_half() {
        let x = sample_design(4, 50, DesignDistribution::Rademacher, 5);
        assert!(x.as_slice().iter().all(|&v| v == 0.5 || v == -0.5));
        assert!(x.as_slice().iter().any(|&v| v < 0.0));
    }

    #[test]
    fn design_is_seed_deterministic() {
        let a = sample_design(30, 20, DesignDistribution::Gaussian, 99);
        let b = sample_design(30, 20, DesignDistribution::Gaussian, 99);
        let c = sample_design(30, 20, DesignDistribution::Gaussian, 100);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn signal_schemes() {
        let s = sample_signal(10, &SignalScheme::ones(3).with_support(vec![0, 1, 2]), 0).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 1.0]);
        assert_eq!(s.support().as_slice(), &[0, 1, 2]);

        let s = sample_signal(4000, &SignalScheme::pm_one(10), 1).unwrap();
        assert_eq!(s.values().iter().map(|v| v * v).sum::<f64>(), 10.0);
        assert_eq!(s.sparsity(), 10);

        let fixed = SignalScheme {
            values: SignalValues::Fixed {
                values: vec![2.0, -3.0],
            },
            k: 2,
            support: SupportChoice::Prescribed(vec![5, 1]),
        };
        let s = sample_signal(8, &fixed, 0).unwrap();
        assert_eq!(s.dense()[1], 2.0);
        assert_eq!(s.dense()[5], -3.0);

        assert!(sample_signal(3, &SignalScheme::pm_one(4), 0).is_err());
    }

    #[test]
    fn noiseless_instance_is_exactly_linear() {
        let inst = assemble_instance(&params(50, 5, 80, 4, 0.0), 7).unwrap();
        let fit = inst.x.matvec(&inst.truth.dense());
        assert_eq!(fit, inst.y);
        assert_eq!(inst.total_rows(), 55);
        assert_eq!(inst.n(), 50);
        assert_eq!(inst.outlier_rows().len(), 5);
    }

    #[test]
    fn clean_instance_without_outliers() {
        let inst = assemble_instance(&params(20, 0, 30, 2, 1.0), 1).unwrap();
        assert!(inst.outlier_rows().is_empty());
        assert_eq!(inst.ledger.model, CorruptionModel::None);
        inst.validate().unwrap();
    }

    #[test]
    fn residual_std_matches_noise_level() {
        let n = 400;
        let sigma_e = 2.0;
        let inst = assemble_instance(&params(n, 0, 300, 10, sigma_e), 21).unwrap();
        let fit = inst.x.matvec(&inst.truth.dense());
        let r: Vec<f64> = inst.y.iter().zip(&fit).map(|(a, b)| a - b).collect();
        let sd = variance(&r).sqrt();
        let target = sigma_e / (n as f64).sqrt();
        assert!((sd / target - 1.0).abs() < 0.10, "{sd} vs {target}");
    }

    #[test]
    fn full_scale_parameters_assemble() {
        let inst = assemble_instance(&params(1600, 0, 4000, 10, 2.0), 2).unwrap();
        assert_eq!((inst.x.rows(), inst.x.cols()), (1600, 4000));
        assert_eq!(inst.k(), 10);
    }

    #[test]
    fn instances_are_byte_identical_per_seed() {
        let a = assemble_instance(&params(40, 4, 60, 3, 0.5), 8).unwrap();
        let b = assemble_instance(&params(40, 4, 60, 3, 0.5), 8).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
