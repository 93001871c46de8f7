//! Property tests for the exact algebra layer: bracket identities, flow
//! laws, Dirac-bracket unambiguity, frame-change coherence and Gaussian
//! physicality under randomized inputs.

use proptest::prelude::*;

use framekit::constraint::dirac_bracket;
use framekit::frames::{frame_transformation, relative_momentum_frame, relative_position_frame};
use framekit::gaussian::{gaussian_condition, GaussianState};
use framekit::matrix::Mat;
use framekit::model::{build_relative_model, MassConfig};
use framekit::observable::{poisson_bracket, QuadraticObservable};
use framekit::phase_space::PhaseSpace;
use framekit::scalar::Scalar;
use framekit::symplectic::{linear_flow, substitute};

fn small_rational() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=9).prop_map(|(p, q)| Scalar::ratio(p, q))
}

fn quadratic(n_pairs: usize) -> impl Strategy<Value = QuadraticObservable> {
    let d = 2 * n_pairs;
    let entries = prop::collection::vec(small_rational(), d * (d + 1) / 2 + d + 1);
    entries.prop_map(move |mut vals| {
        let space = PhaseSpace::new(n_pairs);
        let constant = vals.pop().unwrap();
        let linear: Vec<Scalar> = vals.drain(..d).collect();
        let mut q = Mat::zeros(d, d);
        let mut it = vals.into_iter();
        for i in 0..d {
            for j in 0..=i {
                let v = it.next().unwrap();
                q[(i, j)] = v.clone();
                q[(j, i)] = v;
            }
        }
        QuadraticObservable::new(space, constant, linear, q)
    })
}

fn positive_rational() -> impl Strategy<Value = Scalar> {
    (1i64..=1_000, 1i64..=1_000).prop_map(|(p, q)| Scalar::ratio(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn poisson_antisymmetry(f in quadratic(2), g in quadratic(2)) {
        let fg = poisson_bracket(&f, &g).unwrap();
        let gf = poisson_bracket(&g, &f).unwrap();
        prop_assert!(fg.add(&gf).unwrap().is_zero());
    }

    #[test]
    fn poisson_jacobi(f in quadratic(2), g in quadratic(2), h in quadratic(2)) {
        let cyc = poisson_bracket(&f, &poisson_bracket(&g, &h).unwrap()).unwrap()
            .add(&poisson_bracket(&g, &poisson_bracket(&h, &f).unwrap()).unwrap()).unwrap()
            .add(&poisson_bracket(&h, &poisson_bracket(&f, &g).unwrap()).unwrap()).unwrap();
        prop_assert!(cyc.is_zero());
    }

    #[test]
    fn flow_is_a_one_parameter_group(s in small_rational(), t in small_rational()) {
        let space = PhaseSpace::new(3);
        let shear = QuadraticObservable::position(&space, 0)
            .mul(&QuadraticObservable::momentum(&space, 2)).unwrap();
        let a = linear_flow(&shear, &s).unwrap();
        let b = linear_flow(&shear, &t).unwrap();
        let ab = linear_flow(&shear, &(&s + &t)).unwrap();
        prop_assert_eq!(a.compose(&b).unwrap(), ab);
    }

    #[test]
    fn substitution_respects_brackets(f in quadratic(2), g in quadratic(2), t in small_rational()) {
        let space = f.space().clone();
        let shear = QuadraticObservable::position(&space, 1)
            .mul(&QuadraticObservable::momentum(&space, 0)).unwrap();
        let map = linear_flow(&shear, &t).unwrap();
        let lhs = poisson_bracket(&substitute(&f, &map).unwrap(), &substitute(&g, &map).unwrap()).unwrap();
        let rhs = substitute(&poisson_bracket(&f, &g).unwrap(), &map).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().is_zero());
    }

    #[test]
    fn dirac_bracket_is_unambiguous(
        f in quadratic(3),
        g in quadratic(3),
        c1 in small_rational(),
        c2 in small_rational(),
        masses in prop::collection::vec(positive_rational(), 3),
    ) {
        let model = build_relative_model(&MassConfig::new(&masses).unwrap());
        let cls = &model.classification;
        let shift = model.phi1().scale(&c1).add(&model.phi2().scale(&c2)).unwrap();
        let f_shifted = f.add(&shift).unwrap();
        let a = dirac_bracket(&f_shifted, &g, cls).unwrap();
        let b = dirac_bracket(&f, &g, cls).unwrap();
        prop_assert!(a.sub(&b).unwrap().is_zero());
        // The bracket annihilates the second-class constraints.
        prop_assert!(dirac_bracket(model.phi1(), &g, cls).unwrap().is_zero());
        prop_assert!(dirac_bracket(model.phi2(), &g, cls).unwrap().is_zero());
    }

    #[test]
    fn frame_round_trips_and_energy(masses in prop::collection::vec(positive_rational(), 3)) {
        let model = build_relative_model(&MassConfig::new(&masses).unwrap());
        let frames = [
            relative_position_frame(&model, 0).unwrap(),
            relative_position_frame(&model, 2).unwrap(),
            relative_momentum_frame(&model, 1).unwrap(),
        ];
        for a in &frames {
            for b in &frames {
                let t = frame_transformation(a, b).unwrap();
                let back = frame_transformation(b, a).unwrap();
                prop_assert_eq!(t.matrix() * back.matrix(), Mat::identity(4));
                // Energy invariance: H_a(T w) = H_b(w).
                let pulled = substitute(&a.reduced_hamiltonian, &t).unwrap();
                prop_assert!(pulled.same_coefficients(&b.reduced_hamiltonian));
            }
        }
    }

    #[test]
    fn conditioning_preserves_physicality(v in -3.0f64..3.0, k in 0usize..4) {
        // Squeeze the vacuum a little, condition anywhere: still physical.
        let state = GaussianState::vacuum(2);
        let mut m = framekit::floatmat::FMat::identity(4);
        m[(0, 0)] = 1.5;
        m[(2, 2)] = 1.0 / 1.5;
        let squeezed = framekit::gaussian::gaussian_apply(&state, &m, &[0.2, -0.1, 0.0, 0.3]).unwrap();
        let out = gaussian_condition(&squeezed, k, v).unwrap();
        prop_assert!(out.physicality_margin() > -1e-9);
        prop_assert_eq!(out.dim(), 2);
    }
}
