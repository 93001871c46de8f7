//! Seeded random sampling of exact rationals, mass configurations and
//! quadratic observables for the randomized identity tests. All sampling is
//! ChaCha-based so reports are reproducible from the seed alone.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::MassConfig;
use crate::observable::QuadraticObservable;
use crate::phase_space::PhaseSpace;
use crate::scalar::Scalar;
use std::sync::Arc;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A positive rational with numerator and denominator in `[1, 10^6]`.
pub fn random_positive_rational(rng: &mut impl Rng) -> Scalar {
    let p = rng.gen_range(1..=1_000_000i64);
    let q = rng.gen_range(1..=1_000_000i64);
    Scalar::ratio(p, q)
}

/// A signed rational with small magnitude, for observable coefficients.
pub fn random_small_rational(rng: &mut impl Rng) -> Scalar {
    let p = rng.gen_range(-12..=12i64);
    let q = rng.gen_range(1..=12i64);
    Scalar::ratio(p, q)
}

pub fn random_mass_config(rng: &mut impl Rng) -> MassConfig {
    let masses = [
        random_positive_rational(rng),
        random_positive_rational(rng),
        random_positive_rational(rng),
    ];
    MassConfig::new(&masses).expect("positive masses")
}

/// A random observable of degree <= 2 with small rational coefficients.
pub fn random_quadratic(space: &Arc<PhaseSpace>, rng: &mut impl Rng) -> QuadraticObservable {
    let d = space.dim();
    let constant = random_small_rational(rng);
    let linear = (0..d).map(|_| random_small_rational(rng)).collect();
    let mut q = crate::matrix::Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let v = random_small_rational(rng);
            q[(i, j)] = v.clone();
            q[(j, i)] = v;
        }
    }
    QuadraticObservable::new(space.clone(), constant, linear, q)
}

/// A random linear observable with zero constant part.
pub fn random_linear(space: &Arc<PhaseSpace>, rng: &mut impl Rng) -> QuadraticObservable {
    let d = space.dim();
    let linear = (0..d).map(|_| random_small_rational(rng)).collect();
    QuadraticObservable::linear_form(space, linear)
}

/// A random member of the abelian-conversion family `cb - da = mu`.
pub fn random_valid_x(mu: &Scalar, rng: &mut impl Rng) -> crate::matrix::Mat {
    loop {
        let a = random_small_rational(rng);
        if a.is_zero() {
            continue;
        }
        let b = random_small_rational(rng);
        let c = random_small_rational(rng);
        let d = (&(&c * &b) - mu) * a.recip();
        return crate::matrix::Mat::from_rows(vec![vec![a, b], vec![c, d]]);
    }
}

/// A random exact rational scalar for surface sampling closures.
pub fn scalar_sampler(rng: &mut impl Rng) -> impl FnMut() -> Scalar + '_ {
    move || random_small_rational(rng)
}
