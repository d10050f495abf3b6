//! Grid Markov localization: kernel prediction, sequential Bayes updates and
//! the radiation sensor model.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::env::{GridMap, SignalDistanceTable, VertexId};

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BeliefError {
    #[error("field has {found} entries, map has {expected} cells")]
    SizeMismatch { expected: usize, found: usize },
    #[error("field is not a distribution: {0}")]
    NotNormalized(String),
    #[error("kernel column for {0:?} is invalid: {1}")]
    BadKernelColumn(VertexId, String),
    #[error("invalid sensor parameters: {0}")]
    BadSensor(String),
    #[error("sensor coincident with target")]
    SensorCoincident,
    #[error("degenerate posterior: every cell has zero likelihood")]
    DegeneratePosterior,
}

/// Normalized distribution over the cells of one map.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityField {
    values: Vec<f64>,
}

impl ProbabilityField {
    pub fn from_values(map: &GridMap, values: Vec<f64>) -> Result<Self, BeliefError> {
        if values.len() != map.len() {
            return Err(BeliefError::SizeMismatch {
                expected: map.len(),
                found: values.len(),
            });
        }
        let mut sum = 0.0;
        for (k, &p) in values.iter().enumerate() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(BeliefError::NotNormalized(format!("entry {k} is {p}")));
            }
            if p > 0.0 && !map.is_free(VertexId(k as u32)) {
                return Err(BeliefError::NotNormalized(format!("mass on obstacle cell {k}")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(BeliefError::NotNormalized(format!("sums to {sum}")));
        }
        Ok(ProbabilityField { values })
    }

    pub fn uniform(map: &GridMap) -> Self {
        let n = map.free_count() as f64;
        let values = (0..map.len())
            .map(|k| if map.is_free(VertexId(k as u32)) { 1.0 / n } else { 0.0 })
            .collect();
        ProbabilityField { values }
    }

    pub fn point_mass(map: &GridMap, v: VertexId) -> Self {
        assert!(map.is_free(v), "point mass on an obstacle");
        let mut values = vec![0.0; map.len()];
        values[v.index()] = 1.0;
        ProbabilityField { values }
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> f64 {
        self.values[v.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .values
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// Most probable cell (lowest index on ties).
    pub fn mode(&self) -> VertexId {
        let mut best = 0;
        for (k, &p) in self.values.iter().enumerate() {
            if p > self.values[best] {
                best = k;
            }
        }
        VertexId(best as u32)
    }

    /// Adds `floor` to every free cell and renormalizes.
    pub fn with_floor(&self, map: &GridMap, floor: f64) -> ProbabilityField {
        let mut values = self.values.clone();
        for (k, p) in values.iter_mut().enumerate() {
            if map.is_free(VertexId(k as u32)) {
                *p += floor;
            }
        }
        normalize(&mut values);
        ProbabilityField { values }
    }
}

fn normalize(values: &mut [f64]) -> f64 {
    let sum: f64 = values.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        values.iter_mut().for_each(|p| *p /= sum);
    }
    sum
}

/// Column-stochastic one-step motion model; column `v'` lists `(v, K(v, v'))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    columns: Vec<Vec<(VertexId, f64)>>,
}

impl TransitionKernel {
    pub fn identity(map: &GridMap) -> Self {
        let columns = (0..map.len())
            .map(|k| {
                let v = VertexId(k as u32);
                if map.is_free(v) {
                    vec![(v, 1.0)]
                } else {
                    Vec::new()
                }
            })
            .collect();
        TransitionKernel { columns }
    }

    /// Uniform over `{v'} ∪ neighbors8(v')`.
    pub fn lazy_walk(map: &GridMap) -> Self {
        let columns = (0..map.len())
            .map(|k| {
                let v = VertexId(k as u32);
                if !map.is_free(v) {
                    return Vec::new();
                }
                let n = map.neighbors8(v);
                let w = 1.0 / (n.len() + 1) as f64;
                std::iter::once(v).chain(n.iter().copied()).map(|u| (u, w)).collect()
            })
            .collect();
        TransitionKernel { columns }
    }

    /// Validates support and normalization of every free column.
    pub fn from_columns(map: &GridMap, columns: Vec<Vec<(VertexId, f64)>>) -> Result<Self, BeliefError> {
        if columns.len() != map.len() {
            return Err(BeliefError::SizeMismatch {
                expected: map.len(),
                found: columns.len(),
            });
        }
        for (k, col) in columns.iter().enumerate() {
            let origin = VertexId(k as u32);
            if !map.is_free(origin) {
                if !col.is_empty() {
                    return Err(BeliefError::BadKernelColumn(origin, "obstacle origin".into()));
                }
                continue;
            }
            let neighbors = map.neighbors8(origin);
            let mut sum = 0.0;
            for &(dest, w) in col {
                if dest != origin && !neighbors.contains(&dest) {
                    return Err(BeliefError::BadKernelColumn(
                        origin,
                        format!("destination {dest:?} not adjacent"),
                    ));
                }
                if !(w >= 0.0) {
                    return Err(BeliefError::BadKernelColumn(origin, format!("weight {w}")));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(BeliefError::BadKernelColumn(origin, format!("sums to {sum}")));
            }
        }
        Ok(TransitionKernel { columns })
    }

    /// Builds a column from unnormalized weights.
    pub(crate) fn normalized_column(weights: Vec<(VertexId, f64)>) -> Vec<(VertexId, f64)> {
        let sum: f64 = weights.iter().map(|(_, w)| w).sum();
        weights.into_iter().map(|(v, w)| (v, w / sum)).collect()
    }

    pub(crate) fn from_columns_unchecked(columns: Vec<Vec<(VertexId, f64)>>) -> Self {
        TransitionKernel { columns }
    }

    pub fn column(&self, origin: VertexId) -> &[(VertexId, f64)] {
        &self.columns[origin.index()]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// `out(v) = Σ_{v'} K(v, v') in(v')`, renormalized.
pub fn predict(field: &ProbabilityField, kernel: &TransitionKernel) -> ProbabilityField {
    assert_eq!(
        field.values.len(),
        kernel.columns.len(),
        "kernel and field over different maps"
    );
    let mut out = vec![0.0; field.values.len()];
    for (k, &p) in field.values.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for &(dest, w) in &kernel.columns[k] {
            out[dest.index()] += w * p;
        }
    }
    let sum = normalize(&mut out);
    if !(sum > 0.0) {
        return field.clone();
    }
    ProbabilityField { values: out }
}

/// Zero-truncated normal intensity model: mean `k1 / d`, deviation `k2 * d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub k1: f64,
    pub k2: f64,
    pub rho_obs: f64,
}

impl SensorModel {
    pub fn new(k1: f64, k2: f64, rho_obs: f64) -> Result<Self, BeliefError> {
        if !(k1 > 0.0) || !(k2 > 0.0) || !(rho_obs >= 1.0) {
            return Err(BeliefError::BadSensor(format!(
                "need k1 > 0, k2 > 0, rho_obs >= 1 (got {k1}, {k2}, {rho_obs})"
            )));
        }
        Ok(SensorModel { k1, k2, rho_obs })
    }

    pub fn mean(&self, d_eff: f64) -> f64 {
        self.k1 / d_eff
    }

    pub fn std_dev(&self, d_eff: f64) -> f64 {
        self.k2 * d_eff
    }

    /// Density of intensity `s` at effective distance `d_eff > 0`.
    pub fn density(&self, d_eff: f64, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        let mu = self.mean(d_eff);
        let sigma = self.std_dev(d_eff);
        let z = (s - mu) / sigma;
        // P(N(mu, sigma) >= 0) = Phi(mu / sigma)
        let mass = 0.5 * erfc(-mu / (sigma * std::f64::consts::SQRT_2));
        (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt() * mass)
    }

    pub fn sample<R: Rng + ?Sized>(&self, d_eff: f64, rng: &mut R) -> f64 {
        let mu = self.mean(d_eff);
        let sigma = self.std_dev(d_eff);
        loop {
            let z: f64 = StandardNormal.sample(rng);
            let s = mu + sigma * z;
            if s >= 0.0 {
                return s;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reading {
    pub sensor_at: VertexId,
    pub signal: f64,
}

pub fn likelihood(
    sm: &SensorModel,
    map: &GridMap,
    sensor_at: VertexId,
    target_at: VertexId,
    s: f64,
) -> Result<f64, BeliefError> {
    let d = map.effective_signal_distance(sensor_at, target_at, sm.rho_obs);
    if d <= 0.0 {
        return Err(BeliefError::SensorCoincident);
    }
    Ok(sm.density(d, s))
}

pub fn draw_signal<R: Rng + ?Sized>(
    sm: &SensorModel,
    map: &GridMap,
    sensor_at: VertexId,
    target_at: VertexId,
    rng: &mut R,
) -> Result<f64, BeliefError> {
    let d = map.effective_signal_distance(sensor_at, target_at, sm.rho_obs);
    if d <= 0.0 {
        return Err(BeliefError::SensorCoincident);
    }
    Ok(sm.sample(d, rng))
}

/// Folds readings in sequence, renormalizing after each one. A cell that
/// coincides with a sensor gets zero likelihood (an uncaptured target
/// cannot sit on the sensor).
fn fold_readings<'a>(
    prior: &ProbabilityField,
    sm: &SensorModel,
    readings: impl Iterator<Item = (Reading, &'a [f64])>,
) -> Result<ProbabilityField, BeliefError> {
    let mut values = prior.values.clone();
    for (reading, distances) in readings {
        for (k, p) in values.iter_mut().enumerate() {
            if *p == 0.0 {
                continue;
            }
            let d = distances[k];
            *p *= if d > 0.0 { sm.density(d, reading.signal) } else { 0.0 };
        }
        let sum = normalize(&mut values);
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(BeliefError::DegeneratePosterior);
        }
    }
    Ok(ProbabilityField { values })
}

pub fn bayes_update(
    prior: &ProbabilityField,
    sm: &SensorModel,
    map: &GridMap,
    readings: &[Reading],
) -> Result<ProbabilityField, BeliefError> {
    let rows: Vec<Vec<f64>> = readings
        .iter()
        .map(|r| {
            (0..map.len())
                .map(|k| {
                    if prior.values[k] > 0.0 {
                        map.effective_signal_distance(r.sensor_at, VertexId(k as u32), sm.rho_obs)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    fold_readings(
        prior,
        sm,
        readings.iter().copied().zip(rows.iter().map(|r| r.as_slice())),
    )
}

/// Same as [`bayes_update`] with distances served from a shared table.
pub fn bayes_update_cached(
    prior: &ProbabilityField,
    sm: &SensorModel,
    map: &GridMap,
    table: &SignalDistanceTable,
    readings: &[Reading],
) -> Result<ProbabilityField, BeliefError> {
    assert_eq!(
        table.rho_obs(),
        sm.rho_obs,
        "distance table built for another absorption factor"
    );
    fold_readings(prior, sm, readings.iter().map(|r| (*r, table.row(map, r.sensor_at))))
}

/// Inverse-CDF sampler over a field.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    cumulative: Vec<f64>,
}

impl FieldSampler {
    pub fn new(field: &ProbabilityField) -> Self {
        let mut acc = 0.0;
        let cumulative = field
            .values
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        FieldSampler { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexId {
        let total = *self.cumulative.last().expect("empty field");
        let u = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u);
        // Skip zero-width cells at the top end from rounding.
        let mut k = k.min(self.cumulative.len() - 1);
        while k > 0 && self.cumulative[k] == self.cumulative[k - 1] {
            k -= 1;
        }
        VertexId(k as u32)
    }
}

pub fn sample_vertex<R: Rng + ?Sized>(field: &ProbabilityField, rng: &mut R) -> VertexId {
    FieldSampler::new(field).sample(rng)
}
