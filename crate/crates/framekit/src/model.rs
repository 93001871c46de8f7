//! The translation-invariant free-particle model in relative coordinates.
//!
//! Three particles on a line, described by the cyclic relative coordinates
//! `q1 = x2 - x3`, `q2 = x3 - x1`, `q3 = x1 - x2`. The center of mass is
//! subtracted at the Lagrangian level; it never enters a constrained system
//! here. The singular Legendre transform leaves the second-class pair
//! `Phi1 = sum q_i`, `Phi2 = sum p_i / mu_i`.

use std::sync::Arc;

use crate::constraint::{
    classify, run_consistency, Classification, ConsistencyTrace, ConstrainedSystem, Constraint,
};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::observable::QuadraticObservable;
use crate::phase_space::PhaseSpace;
use crate::scalar::Scalar;

/// Masses of the three particles with the derived quantities the
/// closed-form expressions are written in.
#[derive(Clone, Debug)]
pub struct MassConfig {
    masses: Vec<Scalar>,
    total: Scalar,
    reduced: Vec<Scalar>,
    mu: Scalar,
}

impl MassConfig {
    pub fn new(masses: &[Scalar]) -> Result<Self> {
        if masses.len() != 3 {
            return Err(Error::Domain(format!(
                "the verified model has 3 particles, got {}",
                masses.len()
            )));
        }
        if masses.iter().any(|m| !m.is_positive()) {
            return Err(Error::Domain("masses must be positive".into()));
        }
        let total: Scalar = masses.iter().cloned().sum();
        // mu_i = m_j m_k / M for {i, j, k} = {1, 2, 3}.
        let reduced: Vec<Scalar> = (0..3)
            .map(|i| {
                let j = (i + 1) % 3;
                let k = (i + 2) % 3;
                &masses[j] * &masses[k] * total.recip()
            })
            .collect();
        let mu: Scalar = reduced.iter().map(Scalar::recip).sum();
        Ok(MassConfig { masses: masses.to_vec(), total, reduced, mu })
    }

    pub fn unit() -> Self {
        MassConfig::new(&[Scalar::one(), Scalar::one(), Scalar::one()]).unwrap()
    }

    pub fn masses(&self) -> &[Scalar] {
        &self.masses
    }

    pub fn total_mass(&self) -> &Scalar {
        &self.total
    }

    /// Reduced mass `mu_i` (0-based index).
    pub fn reduced_mass(&self, i: usize) -> &Scalar {
        &self.reduced[i]
    }

    /// `mu = sum 1/mu_i = M^2 / (m1 m2 m3)`.
    pub fn mu(&self) -> &Scalar {
        &self.mu
    }

    /// `1/(mu mu_i) = m_i / M`, the mass term in the Dirac bracket.
    pub fn mass_term(&self, i: usize) -> Scalar {
        &self.masses[i] * self.total.recip()
    }
}

/// Velocities of the relative coordinates given absolute velocities:
/// `q1_dot = x2_dot - x3_dot` (cyclic).
pub fn relative_velocities(xdot: &[Scalar]) -> Vec<Scalar> {
    assert_eq!(xdot.len(), 3);
    (0..3).map(|i| &xdot[(i + 1) % 3] - &xdot[(i + 2) % 3]).collect()
}

/// Result of checking the three equivalent forms of the relative Lagrangian.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub holds: bool,
    /// Largest absolute difference between the three forms over all samples.
    pub residual: Scalar,
    pub samples: usize,
}

/// Verifies exactly, at each sampled velocity vector, that
///
/// ```text
/// (1/2) sum m_i x_i_dot^2 - (M/2) x_cm_dot^2
///   = (1/2M) sum_{i<j} m_i m_j (x_i_dot - x_j_dot)^2
///   = (1/2) sum mu_i q_i_dot^2
/// ```
pub fn relative_lagrangian_identity(
    config: &MassConfig,
    samples: &[[Scalar; 3]],
) -> Result<IdentityCheck> {
    let m = config.masses();
    let total = config.total_mass();
    let half = Scalar::ratio(1, 2);
    let mut residual = Scalar::zero();
    for xdot in samples {
        let cm_dot = (0..3).map(|i| &m[i] * &xdot[i]).sum::<Scalar>() * total.recip();
        let absolute = (0..3).map(|i| &half * &m[i] * &xdot[i] * &xdot[i]).sum::<Scalar>()
            - &half * total * &cm_dot * &cm_dot;
        let mut pairwise = Scalar::zero();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let d = &xdot[i] - &xdot[j];
                pairwise += &(&m[i] * &m[j] * &d * &d);
            }
        }
        pairwise = pairwise * &half * total.recip();
        let qdot = relative_velocities(xdot);
        let reduced = (0..3)
            .map(|i| &half * config.reduced_mass(i) * &qdot[i] * &qdot[i])
            .sum::<Scalar>();
        for diff in [&absolute - &pairwise, &absolute - &reduced] {
            if diff.abs() > residual {
                residual = diff.abs();
            }
        }
    }
    if !residual.is_zero() {
        return Err(Error::Domain(format!(
            "Lagrangian identity violated with residual {residual}; this is an implementation bug"
        )));
    }
    Ok(IdentityCheck { holds: true, residual, samples: samples.len() })
}

/// The velocity quadratic form of a Lagrangian, `J = d^2 L / dq_dot dq_dot`.
#[derive(Clone, Debug)]
pub struct LagrangianQF {
    pub velocity_form: Mat,
}

impl LagrangianQF {
    pub fn new(velocity_form: Mat) -> Self {
        assert!(velocity_form.is_symmetric(), "velocity form must be symmetric");
        LagrangianQF { velocity_form }
    }
}

/// Exact rank of the velocity form together with a basis of its kernel:
/// the degenerate momentum directions. The number of primary constraints is
/// the dimension minus the rank.
pub fn legendre_rank(lagrangian: &LagrangianQF) -> (usize, Vec<Vec<Scalar>>) {
    let j = &lagrangian.velocity_form;
    (j.rank(), j.null_space())
}

/// The canonical three-particle model: phase space, Hamiltonian and the
/// classified second-class constraint pair.
#[derive(Clone, Debug)]
pub struct RelativeModel {
    pub config: MassConfig,
    pub system: ConstrainedSystem,
    pub classification: Classification,
}

impl RelativeModel {
    pub fn space(&self) -> &Arc<PhaseSpace> {
        &self.system.space
    }

    pub fn hamiltonian(&self) -> &QuadraticObservable {
        &self.system.hamiltonian
    }

    /// `Phi1 = sum q_i`.
    pub fn phi1(&self) -> &QuadraticObservable {
        &self.system.constraints[0].observable
    }

    /// `Phi2 = sum p_i / mu_i`.
    pub fn phi2(&self) -> &QuadraticObservable {
        &self.system.constraints[1].observable
    }
}

/// Builds `H = (1/2) sum p_i^2 / mu_i` with constraints `Phi1 = sum q_i`
/// and `Phi2 = sum p_i / mu_i` on a 6-dimensional phase space.
pub fn build_relative_model(config: &MassConfig) -> RelativeModel {
    let space = PhaseSpace::new(3);
    let d = space.dim();
    let mut qmat = Mat::zeros(d, d);
    for i in 0..3 {
        qmat[(space.p(i), space.p(i))] = config.reduced_mass(i).recip();
    }
    let hamiltonian = QuadraticObservable::quadratic_form(&space, qmat);
    let mut phi1 = vec![Scalar::zero(); d];
    let mut phi2 = vec![Scalar::zero(); d];
    for i in 0..3 {
        phi1[space.q(i)] = Scalar::one();
        phi2[space.p(i)] = config.reduced_mass(i).recip();
    }
    let system = ConstrainedSystem {
        space: space.clone(),
        hamiltonian,
        constraints: vec![
            Constraint {
                observable: QuadraticObservable::linear_form(&space, phi1),
                name: "Phi1".into(),
                primary: false,
            },
            Constraint {
                observable: QuadraticObservable::linear_form(&space, phi2),
                name: "Phi2".into(),
                primary: false,
            },
        ],
        multipliers: Vec::new(),
    };
    let classification = classify(&system).expect("second-class pair");
    RelativeModel { config: config.clone(), system, classification }
}

/// The pre-reduction total Hamiltonian of the Lagrange-multiplier
/// formulation: `H = (1/2) sum p_i^2/mu_i - q4 sum q_i` on a 4-pair space,
/// with the single primary constraint `p4`. Feeding this to
/// [`run_consistency`] replays the full constraint chain and ends, after the
/// auxiliary pair is discarded, on the relative model.
pub fn pre_reduction_input(
    config: &MassConfig,
) -> (QuadraticObservable, Vec<QuadraticObservable>, Arc<PhaseSpace>) {
    let space = PhaseSpace::with_pair_labels(&[
        ("q1", "p1"),
        ("q2", "p2"),
        ("q3", "p3"),
        ("q4", "p4"),
    ]);
    let d = space.dim();
    let mut qmat = Mat::zeros(d, d);
    for i in 0..3 {
        qmat[(space.p(i), space.p(i))] = config.reduced_mass(i).recip();
        // -q4 q_i coupling, split across the symmetric entries.
        qmat[(space.q(3), space.q(i))] = -Scalar::one();
        qmat[(space.q(i), space.q(3))] = -Scalar::one();
    }
    let hamiltonian = QuadraticObservable::quadratic_form(&space, qmat);
    let primary = QuadraticObservable::momentum(&space, 3);
    (hamiltonian, vec![primary], space)
}

/// Replays Appendix-style consistency analysis from the pre-reduction
/// Hamiltonian and returns the closed system (after pair discard) plus the
/// trace.
pub fn replay_pre_reduction(config: &MassConfig) -> Result<(ConstrainedSystem, ConsistencyTrace)> {
    let (h, primaries, _) = pre_reduction_input(config);
    run_consistency(&h, &primaries)
}

/// Structural equality of two constrained systems: same space dimension,
/// identical Hamiltonian, and identical ordered constraint list.
pub fn systems_equal(a: &ConstrainedSystem, b: &ConstrainedSystem) -> bool {
    a.space.dim() == b.space.dim()
        && a.hamiltonian.sub(&b.hamiltonian).map(|d| d.is_zero()).unwrap_or(false)
        && a.constraints.len() == b.constraints.len()
        && a.constraints.iter().zip(&b.constraints).all(|(x, y)| {
            x.observable.sub(&y.observable).map(|d| d.is_zero()).unwrap_or(false)
        })
}

/// Experimental N-particle generalization on ring coordinates
/// `q_i = x_{i+1} - x_{i+2}` (indices mod N). The cycle-space construction
/// gives one position constraint; the rest of the chain is produced by the
/// consistency algorithm. Results for N > 3 have no closed-form references
/// and are flagged as experimental by the callers.
pub fn build_ring_model(masses: &[Scalar]) -> Result<(ConstrainedSystem, ConsistencyTrace)> {
    let n = masses.len();
    if n < 3 {
        return Err(Error::Domain("ring model needs at least 3 particles".into()));
    }
    if masses.iter().any(|m| !m.is_positive()) {
        return Err(Error::Domain("masses must be positive".into()));
    }
    let total: Scalar = masses.iter().cloned().sum();
    let j = if n == 3 {
        let config = MassConfig::new(masses)?;
        Mat::from_fn(3, 3, |i, jj| {
            if i == jj { config.reduced_mass(i).clone() } else { Scalar::zero() }
        })
    } else {
        ring_velocity_form(masses, &total)
    };
    // Pairs q_1..q_N plus the Lagrange-multiplier pair.
    let mut labels: Vec<(String, String)> =
        (1..=n).map(|i| (format!("q{i}"), format!("p{i}"))).collect();
    labels.push((format!("q{}", n + 1), format!("p{}", n + 1)));
    let label_refs: Vec<(&str, &str)> =
        labels.iter().map(|(q, p)| (q.as_str(), p.as_str())).collect();
    let space = PhaseSpace::with_pair_labels(&label_refs);
    let d = space.dim();
    let j_inv = j.inverse().map_err(|_| Error::Domain("singular velocity form".into()))?;
    let mut qmat = Mat::zeros(d, d);
    for a in 0..n {
        for b in 0..n {
            qmat[(space.p(a), space.p(b))] = j_inv[(a, b)].clone();
        }
        qmat[(space.q(n), space.q(a))] = -Scalar::one();
        qmat[(space.q(a), space.q(n))] = -Scalar::one();
    }
    let hamiltonian = QuadraticObservable::quadratic_form(&space, qmat);
    let primary = QuadraticObservable::momentum(&space, n);
    run_consistency(&hamiltonian, &[primary])
}

/// A symmetric velocity form on the ring coordinates that restricts to the
/// relative kinetic energy on the physical subspace `sum q_i_dot = 0` and is
/// positive definite off it (the extension is pure gauge).
fn ring_velocity_form(masses: &[Scalar], total: &Scalar) -> Mat {
    let n = masses.len();
    // G = diag(m) - m m^T / M on absolute velocities.
    let g = Mat::from_fn(n, n, |i, j| {
        let cross = &masses[i] * &masses[j] * total.recip();
        if i == j { &masses[i] - &cross } else { -cross }
    });
    // Ring difference matrix R: q_i_dot = x_{i+1}_dot - x_{i+2}_dot.
    let r = Mat::from_fn(n, n, |i, j| {
        if j == (i + 1) % n {
            Scalar::one()
        } else if j == (i + 2) % n {
            -Scalar::one()
        } else {
            Scalar::zero()
        }
    });
    // Section B: for each ring basis direction (projected onto the cycle
    // subspace), the unique absolute velocity with zero total momentum.
    let ones = Mat::from_fn(n, n, |_, _| Scalar::one());
    let proj = &Mat::identity(n) - &ones.scale(&Scalar::ratio(1, n as i64));
    let stacked = Mat::from_fn(n + 1, n, |i, j| {
        if i < n { r[(i, j)].clone() } else { masses[j].clone() }
    });
    let mut b = Mat::zeros(n, n);
    for col in 0..n {
        let mut rhs: Vec<Scalar> = proj.col(col);
        rhs.push(Scalar::zero());
        let x = stacked.solve(&rhs).expect("ring section solvable");
        for row in 0..n {
            b[(row, col)] = x[row].clone();
        }
    }
    let core = &(&b.transpose() * &g) * &b;
    // Positive-definite gauge extension along the all-ones direction.
    &core + &ones.scale(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn reduced_masses() {
        let c = MassConfig::new(&[int(1), int(2), int(3)]).unwrap();
        assert_eq!(c.total_mass(), &int(6));
        assert_eq!(c.reduced_mass(0), &int(1)); // 2*3/6
        assert_eq!(c.reduced_mass(1), &rat(1, 2)); // 3*1/6
        assert_eq!(c.reduced_mass(2), &rat(1, 3)); // 1*2/6
        assert_eq!(c.mu(), &int(6));
        // 1/mu_i = M/(m_j m_k) identity.
        for i in 0..3 {
            let jj = (i + 1) % 3;
            let k = (i + 2) % 3;
            assert_eq!(
                c.reduced_mass(i).recip(),
                c.total_mass() * (&c.masses()[jj] * &c.masses()[k]).recip()
            );
        }
        assert!(MassConfig::new(&[int(1), int(0), int(1)]).is_err());
        assert!(MassConfig::new(&[int(1), int(-1), int(1)]).is_err());
    }

    #[test]
    fn unit_mass_mu_is_nine() {
        let c = MassConfig::unit();
        assert_eq!(c.reduced_mass(0), &rat(1, 3));
        assert_eq!(c.mu(), &int(9));
        assert_eq!(c.mass_term(0), rat(1, 3));
    }

    #[test]
    fn lagrangian_identity_frozen_values() {
        // Unit masses, x_dot = (1, 0, 0): all three forms evaluate to 1/3.
        let c = MassConfig::unit();
        let xdot = [int(1), int(0), int(0)];
        let half = rat(1, 2);
        let cm = rat(1, 3);
        let absolute = &half * int(1) - &half * int(3) * &cm * &cm;
        assert_eq!(absolute, rat(1, 3));
        relative_lagrangian_identity(&c, &[xdot]).unwrap();
        // Masses (1,2,3), x_dot = (1,-1,0): common value 17/12.
        let c2 = MassConfig::new(&[int(1), int(2), int(3)]).unwrap();
        let xdot2 = [int(1), int(-1), int(0)];
        let qdot = relative_velocities(&xdot2);
        let reduced: Scalar = (0..3)
            .map(|i| rat(1, 2) * c2.reduced_mass(i) * &qdot[i] * &qdot[i])
            .sum();
        assert_eq!(reduced, rat(17, 12));
        relative_lagrangian_identity(&c2, &[xdot2]).unwrap();
    }

    #[test]
    fn identity_vanishes_on_center_of_mass_motion() {
        let c = MassConfig::new(&[int(2), int(5), int(7)]).unwrap();
        let v = rat(13, 4);
        let xdot = [v.clone(), v.clone(), v.clone()];
        // Pure translation: the relative Lagrangian is zero.
        let qdot = relative_velocities(&xdot);
        assert!(qdot.iter().all(Scalar::is_zero));
        relative_lagrangian_identity(&c, &[xdot]).unwrap();
    }

    #[test]
    fn relative_lagrangian_is_translation_invariant() {
        // Shifting every absolute velocity by the same slope leaves the
        // relative kinetic energy unchanged.
        let c = MassConfig::new(&[int(3), int(5), int(11)]).unwrap();
        let half = rat(1, 2);
        let value = |xdot: &[Scalar; 3]| -> Scalar {
            let qdot = relative_velocities(xdot);
            (0..3)
                .map(|i| &half * c.reduced_mass(i) * &qdot[i] * &qdot[i])
                .sum()
        };
        let mut rng = crate::sampling::rng_for(17, 0);
        for _ in 0..20 {
            let base = [
                crate::sampling::random_small_rational(&mut rng),
                crate::sampling::random_small_rational(&mut rng),
                crate::sampling::random_small_rational(&mut rng),
            ];
            let slope = crate::sampling::random_small_rational(&mut rng);
            let shifted = [
                &base[0] + &slope,
                &base[1] + &slope,
                &base[2] + &slope,
            ];
            assert_eq!(value(&base), value(&shifted));
            relative_lagrangian_identity(&c, &[shifted]).unwrap();
        }
    }

    #[test]
    fn legendre_rank_of_difference_lagrangian() {
        // L = (1/2)(q1_dot - q2_dot)^2: rank 1 with kernel (1, 1).
        let j = Mat::from_int_rows(&[&[1, -1], &[-1, 1]]);
        let (rank, kernel) = legendre_rank(&LagrangianQF::new(j));
        assert_eq!(rank, 1);
        assert_eq!(kernel, vec![vec![int(1), int(1)]]);
        // L = (1/2) q_dot^2 on one coordinate: rank 1, empty kernel.
        let (rank1, kernel1) = legendre_rank(&LagrangianQF::new(Mat::identity(1)));
        assert_eq!((rank1, kernel1.len()), (1, 0));
    }

    #[test]
    fn appended_multiplier_row_gives_primary_constraint() {
        // J for (1/2) sum mu_i q_i_dot^2 with the multiplier coordinate
        // appended: its row is zero, so the kernel flags p4 ~ 0.
        let c = MassConfig::new(&[int(1), int(2), int(3)]).unwrap();
        let j = Mat::from_fn(4, 4, |i, jj| {
            if i == jj && i < 3 { c.reduced_mass(i).clone() } else { Scalar::zero() }
        });
        let (rank, kernel) = legendre_rank(&LagrangianQF::new(j));
        assert_eq!(rank, 3);
        assert_eq!(kernel, vec![vec![int(0), int(0), int(0), int(1)]]);
    }

    #[test]
    fn equations_of_motion_for_the_model() {
        use crate::constraint::equations_of_motion;
        let c = MassConfig::new(&[int(1), int(2), int(3)]).unwrap();
        let model = build_relative_model(&c);
        let field = equations_of_motion(&model.system, &[]).unwrap();
        let s = model.space();
        // q_i_dot = p_i / mu_i, p_i_dot = 0.
        for i in 0..3 {
            assert_eq!(field.matrix[(s.q(i), s.p(i))], c.reduced_mass(i).recip());
            for j in 0..6 {
                if j != s.p(i) {
                    assert_eq!(field.matrix[(s.q(i), j)], int(0));
                }
                assert_eq!(field.matrix[(s.p(i), j)], int(0));
            }
        }
        // Constraints are conserved along the field: grad(Phi) . z_dot = 0
        // identically (the field has no position dependence and the momentum
        // rows vanish).
        for phi in [model.phi1(), model.phi2()] {
            let flow_derivative = field.matrix.transpose().mul_vec(phi.linear_part());
            // d/dt Phi = grad(Phi)^T (A z): as a linear function of z it is
            // A^T grad(Phi); Phi2 gives sum p_i/mu_i^2-type rows on q only.
            let as_obs = QuadraticObservable::linear_form(s, flow_derivative);
            // It must vanish weakly: reduce against the constraint span.
            let mut rng = crate::sampling::rng_for(5, 0);
            for _ in 0..20 {
                let mut sampler = crate::sampling::scalar_sampler(&mut rng);
                let z = model.system.surface_point(&mut sampler);
                assert!(as_obs.evaluate(&z).is_zero());
            }
        }
    }

    #[test]
    fn experimental_ring_model_for_four_particles() {
        let masses = vec![int(1), int(2), int(3), int(4)];
        let (system, trace) = build_ring_model(&masses).unwrap();
        // The auxiliary pair is discarded, leaving the 4-pair space with a
        // second-class pair of constraints.
        assert_eq!(system.space.n_pairs(), 4);
        assert_eq!(system.constraints.len(), 2);
        let cls = crate::constraint::classify(&system).unwrap();
        assert_eq!(cls.second_class.len(), 2);
        assert!(cls.first_class.is_empty());
        assert!(trace.to_string().contains("discard fixed pair"));
        // The position constraint is the ring cycle sum.
        let sum_q: Scalar = (0..4)
            .map(|i| system.constraints[0].observable.linear_part()[system.space.q(i)].clone())
            .sum();
        assert_eq!(sum_q, int(4));
        // N = 3 reduces to the canonical model.
        let (sys3, _) = build_ring_model(&[int(1), int(2), int(3)]).unwrap();
        let canonical = build_relative_model(&MassConfig::new(&[int(1), int(2), int(3)]).unwrap());
        assert!(systems_equal(&sys3, &canonical.system));
    }

    #[test]
    fn model_bracket_is_mu() {
        for masses in [[int(1), int(1), int(1)], [int(2), int(3), int(5)]] {
            let c = MassConfig::new(&masses).unwrap();
            let model = build_relative_model(&c);
            let bracket =
                crate::observable::poisson_bracket(model.phi1(), model.phi2()).unwrap();
            assert_eq!(bracket.constant_part(), c.mu());
            assert_eq!(&model.classification.c_matrix[(0, 1)], c.mu());
        }
    }
}
