//! Sampling from linear SEMs on mixed graphs, dedirection, and random
//! bow-free model generation.

mod dataset;
mod generate;
mod noise;
mod spec;

pub use dataset::{default_labels, standardize_rows, Dataset};
pub use generate::{
    marginalize, random_bowfree, BowRemoval, GeneratorOptions, LatentSource, Marginalized,
    RandomModel,
};
pub use noise::{NoiseLaw, NoiseSampler};
pub use spec::{EffectsMatrix, HiddenSource, LsemSpec, EFFECTS_CONVENTION};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Simulated observations together with the correlated noise that produced them.
#[derive(Clone, Debug)]
pub struct Simulation<T> {
    pub data: Dataset<T>,
    pub noise: Dataset<T>,
}

fn incoming_as<T: Scalar>(effects: &EffectsMatrix) -> Vec<Vec<(usize, T)>> {
    effects
        .incoming()
        .into_iter()
        .map(|inc| inc.into_iter().map(|(i, b)| (i, T::from_param(b))).collect())
        .collect()
}

/// `sum_i B[i][j] * column[i]` in ascending `i`; shared by simulation and
/// dedirection so both evaluate the same expression.
fn parent_sum<T: Scalar>(incoming: &[(usize, T)], value_of: impl Fn(usize) -> T) -> T {
    incoming
        .iter()
        .fold(T::zero(), |acc, (i, b)| acc + b.clone() * value_of(*i))
}

pub fn simulate<T: Scalar>(spec: &LsemSpec, n: usize, seed: u64) -> Result<Dataset<T>> {
    Ok(simulate_with_noise(spec, n, seed)?.data)
}

/// Draws `n` samples. Per sample, observed noises are drawn in vertex order,
/// then hidden sources in spec order, from a ChaCha8 stream seeded by `seed`.
/// Growing `n` with the same seed extends the previous dataset.
pub fn simulate_with_noise<T: Scalar>(spec: &LsemSpec, n: usize, seed: u64) -> Result<Simulation<T>> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let p = spec.p();
    let order = spec.graph().topological_order().ok_or(Error::Cyclic)?;
    let own: Vec<NoiseSampler> = spec.noise().iter().map(NoiseLaw::sampler).collect::<Result<_>>()?;
    let hidden: Vec<NoiseSampler> = spec
        .hidden()
        .iter()
        .map(|h| h.noise.sampler())
        .collect::<Result<_>>()?;

    let mut loads: Vec<Vec<(usize, T)>> = vec![Vec::new(); p];
    for (k, h) in spec.hidden().iter().enumerate() {
        for (&v, &l) in h.members.iter().zip(&h.loadings) {
            loads[v].push((k, T::from_param(l)));
        }
    }
    let incoming = incoming_as::<T>(spec.effects());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Dataset::<T>::zeros(p, n);
    let mut noise = Dataset::<T>::zeros(p, n);
    let mut own_draw = vec![T::zero(); p];
    let mut hidden_draw = vec![T::zero(); hidden.len()];
    for s in 0..n {
        for (slot, sampler) in own_draw.iter_mut().zip(&own) {
            *slot = T::from_param(sampler.draw(&mut rng));
        }
        for (slot, sampler) in hidden_draw.iter_mut().zip(&hidden) {
            *slot = T::from_param(sampler.draw(&mut rng));
        }
        for i in 0..p {
            let eps = loads[i].iter().fold(own_draw[i].clone(), |acc, (k, l)| {
                acc + l.clone() * hidden_draw[*k].clone()
            });
            noise.set(i, s, eps);
        }
        for &j in &order {
            let sum = parent_sum(&incoming[j], |i| data.get(i, s).clone());
            data.set(j, s, noise.get(j, s).clone() + sum);
        }
    }
    Ok(Simulation { data, noise })
}

/// `X = Y - B^T Y` column by column: removes the given direct effects.
pub fn dedirect<T: Scalar>(y: &Dataset<T>, effects: &EffectsMatrix) -> Result<Dataset<T>> {
    if effects.p() != y.p() {
        return Err(Error::DimensionMismatch {
            context: "dedirect",
            expected: y.p(),
            found: effects.p(),
        });
    }
    let incoming = incoming_as::<T>(effects);
    let mut x = y.clone();
    for (j, inc) in incoming.iter().enumerate() {
        if inc.is_empty() {
            continue;
        }
        for s in 0..y.n() {
            let sum = parent_sum(inc, |i| y.get(i, s).clone());
            x.set(j, s, y.get(j, s).clone() - sum);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulant::{CumulantSource, SampleCumulants};
    use num_rational::BigRational;

    fn chain(b: f64) -> LsemSpec {
        let mut e = EffectsMatrix::zeros(2);
        e.set(0, 1, b);
        LsemSpec::new(2, [(0, 1)], e, vec![NoiseLaw::UNIFORM_10; 2], vec![]).unwrap()
    }

    #[test]
    fn two_by_two_dedirect_by_hand() {
        let y = Dataset::from_rows(vec![vec![1.0], vec![0.8]]).unwrap();
        let x = dedirect(&y, chain(0.8).effects()).unwrap();
        assert_eq!(x.row(0), &[1.0]);
        assert_eq!(x.row(1), &[0.0]);
    }

    #[test]
    fn zero_effects_is_identity() {
        let y = simulate::<f64>(&chain(0.8), 50, 3).unwrap();
        assert_eq!(dedirect(&y, &EffectsMatrix::zeros(2)).unwrap(), y);
    }

    #[test]
    fn dedirect_dimension_mismatch() {
        let y = Dataset::from_rows(vec![vec![1.0]]).unwrap();
        assert!(matches!(
            dedirect(&y, &EffectsMatrix::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exact_arithmetic_recovers_noise_bit_for_bit() {
        let spec = crate::fixtures::triple_and_pair_spec();
        let sim = simulate_with_noise::<BigRational>(&spec, 40, 11).unwrap();
        let x = dedirect(&sim.data, spec.effects()).unwrap();
        assert_eq!(x, sim.noise);
    }

    #[test]
    fn simulation_is_reproducible_and_prefix_stable() {
        let spec = crate::fixtures::triple_and_pair_spec();
        let a = simulate::<f64>(&spec, 100, 5).unwrap();
        let b = simulate::<f64>(&spec, 100, 5).unwrap();
        assert_eq!(a, b);
        let long = simulate::<f64>(&spec, 300, 5).unwrap();
        assert_eq!(long.truncated(100).unwrap(), a);
        assert!(simulate::<f64>(&spec, 0, 5).is_err());
    }

    #[test]
    fn uniform_single_vertex_moments() {
        let spec = LsemSpec::new(1, [], EffectsMatrix::zeros(1), vec![NoiseLaw::UNIFORM_10], vec![]).unwrap();
        let d = simulate::<f64>(&spec, 200_000, 1).unwrap();
        let mean = d.row_means()[0];
        let var = d.row_std()[0].powi(2);
        assert!(mean.abs() < 0.1);
        assert!((var / (100.0 / 3.0) - 1.0).abs() < 0.02);
    }

    #[test]
    fn independent_rows_have_vanishing_cross_cumulants() {
        let spec = LsemSpec::new(
            3,
            [],
            EffectsMatrix::zeros(3),
            vec![NoiseLaw::GAMMA_2_4, NoiseLaw::UNIFORM_10, NoiseLaw::CHI_SQUARED_2],
            vec![],
        )
        .unwrap();
        let d = simulate::<f64>(&spec, 200_000, 2).unwrap();
        let std = crate::sim::standardize_rows(&d).unwrap();
        let c = SampleCumulants::new(&std);
        for idx in [vec![0, 1], vec![0, 2], vec![0, 1, 2], vec![0, 0, 1], vec![1, 1, 2, 2]] {
            assert!(c.cumulant(&idx).unwrap().abs() < 0.02, "{idx:?}");
        }
        // same-index cumulants approach the analytic values
        let raw = SampleCumulants::new(&d);
        for (i, law) in spec.noise().iter().enumerate() {
            for k in [2, 3] {
                let expected: f64 = law.cumulant(k).unwrap();
                if expected.abs() < 1e-12 {
                    continue;
                }
                let got = raw.cumulant(&vec![i; k]).unwrap();
                assert!((got / expected - 1.0).abs() < 0.1, "{law} k={k}: {got} vs {expected}");
            }
        }
    }
}
