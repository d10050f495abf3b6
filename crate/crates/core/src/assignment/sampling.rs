//! Joint samples of travel times drawn from position beliefs.

use rand::Rng;

use super::TravelTimeSamples;
use crate::belief::{FieldSampler, ProbabilityField};
use crate::evader::PursuerProfile;
use crate::geodesic::GeodesicField;

/// Pursuer side: `fields[i]` is sourced at pursuer `i`. Each sample draws one
/// position per evader and shares it across all pursuers.
pub fn sample_travel_times<R: Rng + ?Sized>(
    fields: &[&GeodesicField],
    profiles: &[PursuerProfile],
    evader_beliefs: &[&ProbabilityField],
    h: usize,
    rng: &mut R,
) -> TravelTimeSamples {
    assert_eq!(fields.len(), profiles.len());
    let h = h.max(1);
    let samplers: Vec<FieldSampler> = evader_beliefs.iter().map(|p| FieldSampler::new(p)).collect();
    let (n_p, n_e) = (fields.len(), evader_beliefs.len());
    let mut tau = vec![0.0; h * n_p * n_e];
    let mut ys = Vec::with_capacity(n_e);
    for z in 0..h {
        ys.clear();
        ys.extend(samplers.iter().map(|s| s.sample(rng)));
        for i in 0..n_p {
            for (j, &y) in ys.iter().enumerate() {
                tau[(z * n_p + i) * n_e + j] = fields[i].g(y) / profiles[i].v_max;
            }
        }
    }
    TravelTimeSamples::new(h, n_p, n_e, tau).expect("travel times are nonnegative")
}

/// Evader side: `evader_fields[j]` is sourced at evader `j`. Each sample
/// draws one position per pursuer from its belief.
pub fn sample_pursuer_travel_times<R: Rng + ?Sized>(
    evader_fields: &[&GeodesicField],
    pursuer_beliefs: &[&ProbabilityField],
    profiles: &[PursuerProfile],
    h: usize,
    rng: &mut R,
) -> TravelTimeSamples {
    assert_eq!(pursuer_beliefs.len(), profiles.len());
    let h = h.max(1);
    let samplers: Vec<FieldSampler> = pursuer_beliefs.iter().map(|q| FieldSampler::new(q)).collect();
    let (n_p, n_e) = (pursuer_beliefs.len(), evader_fields.len());
    let mut tau = vec![0.0; h * n_p * n_e];
    for z in 0..h {
        for i in 0..n_p {
            let r = samplers[i].sample(rng);
            for j in 0..n_e {
                tau[(z * n_p + i) * n_e + j] = evader_fields[j].g(r) / profiles[i].v_max;
            }
        }
    }
    TravelTimeSamples::new(h, n_p, n_e, tau).expect("travel times are nonnegative")
}
