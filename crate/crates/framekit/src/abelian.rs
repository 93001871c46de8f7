//! Abelian conversion of the second-class pair.
//!
//! The phase space is extended by one conjugate pair `(q, p)` and the
//! constraints are deformed to `Phi~_alpha = Phi_alpha + X_{alpha a} psi^a`
//! with `X omega X^T = -C`, which makes them commute. Gauge-fixing one of
//! the added coordinates produces the two intermediate spaces, connected by
//! a dressing map that is canonical for the degenerate Dirac structure.

use std::sync::Arc;

use crate::constraint::{classify, Classification, ConstrainedSystem, Constraint};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::model::RelativeModel;
use crate::observable::QuadraticObservable;
use crate::phase_space::PhaseSpace;
use crate::scalar::Scalar;

/// The one-relation family of conversion matrices together with the
/// canonical representative.
#[derive(Clone, Debug)]
pub struct XFamily {
    /// `cb - da = mu`, the defining relation on `[[a, b], [c, d]]`.
    pub mu: Scalar,
    pub canonical: Mat,
}

/// Solves `X omega X^T = -C` for `C = [[0, mu], [-mu, 0]]`. The relation on
/// the entries is `cb - da = mu`; the canonical pick is `a = 1, d = -mu,
/// b = c = 0`.
pub fn solve_x(c_matrix: &Mat) -> Result<XFamily> {
    if c_matrix.nrows() != 2 || c_matrix.ncols() != 2 {
        return Err(Error::Dimension("C must be 2x2".into()));
    }
    let mu = c_matrix[(0, 1)].clone();
    if mu.is_zero()
        || !c_matrix[(0, 0)].is_zero()
        || !c_matrix[(1, 1)].is_zero()
        || c_matrix[(1, 0)] != -&mu
    {
        return Err(Error::Domain(
            "C is not a nondegenerate second-class pair matrix".into(),
        ));
    }
    let canonical = Mat::from_rows(vec![
        vec![Scalar::one(), Scalar::zero()],
        vec![Scalar::zero(), -&mu],
    ]);
    Ok(XFamily { mu, canonical })
}

/// Exact membership test for the family: `cb - da = mu`.
pub fn is_valid_x(x: &Mat, mu: &Scalar) -> bool {
    x.nrows() == 2
        && x.ncols() == 2
        && &(&x[(1, 0)] * &x[(0, 1)]) - &(&x[(1, 1)] * &x[(0, 0)]) == *mu
}

/// The converted first-class system on the 8-dimensional extended space.
#[derive(Clone, Debug)]
pub struct ExtendedSystem {
    pub model: RelativeModel,
    pub space: Arc<PhaseSpace>,
    pub x: Mat,
    pub b_matrix: Mat,
    /// `Phi~_1`, `Phi~_2` (both first class).
    pub constraints: [QuadraticObservable; 2],
    /// Dirac observables `q~_i` and `p~_i`.
    pub observables_q: Vec<QuadraticObservable>,
    pub observables_p: Vec<QuadraticObservable>,
    /// `H~ = H(y~)`, without the multiplier terms.
    pub hamiltonian: QuadraticObservable,
    /// `lambda_alpha Phi~_alpha` addends, carried symbolically.
    pub multiplier_terms: Vec<(String, QuadraticObservable)>,
}

impl ExtendedSystem {
    /// Index of the added position coordinate `q` in the extended space.
    pub fn aux_pair(&self) -> usize {
        3
    }

    /// Restriction to `psi = 0`: pulls an extended observable back to the
    /// original 6-dimensional space with the added pair at the origin.
    pub fn restrict(&self, f: &QuadraticObservable) -> Result<QuadraticObservable> {
        let original = self.model.space();
        let (m, offset) = pair_insertion(&self.space, self.aux_pair());
        f.substitute_affine(&m, &offset, original)
    }
}

/// The affine insertion `original -> extended` holding pair `k` of the
/// extended space at the origin: returns the matrix and offset of the map.
pub fn pair_insertion(extended: &Arc<PhaseSpace>, k: usize) -> (Mat, Vec<Scalar>) {
    let d = extended.dim();
    let keep: Vec<usize> = (0..d)
        .filter(|&a| a != extended.q(k) && a != extended.p(k))
        .collect();
    let m = Mat::from_fn(d, d - 2, |i, j| {
        if keep[j] == i {
            Scalar::one()
        } else {
            Scalar::zero()
        }
    });
    (m, vec![Scalar::zero(); d])
}

/// Converts the second-class model into an abelian first-class extended
/// system using the conversion matrix `X`.
pub fn convert(model: &RelativeModel, x: &Mat) -> Result<ExtendedSystem> {
    let mu = model.config.mu();
    if !is_valid_x(x, mu) {
        return Err(Error::InvalidX(format!(
            "cb - da must equal mu = {mu}; X = {x:?}"
        )));
    }
    let original = model.space();
    let space = original.append_pair("q", "p");
    let d6 = original.dim();

    // Lift an original-space observable to the extended space.
    let lift_matrix = {
        // extended coordinates -> original: select the first three pairs.
        let mut m = Mat::zeros(d6, space.dim());
        for i in 0..3 {
            m[(original.q(i), space.q(i))] = Scalar::one();
            m[(original.p(i), space.p(i))] = Scalar::one();
        }
        m
    };
    let lift = |f: &QuadraticObservable| -> Result<QuadraticObservable> {
        f.substitute_affine(&lift_matrix, &vec![Scalar::zero(); d6], &space)
    };

    let aux_q = QuadraticObservable::position(&space, 3);
    let aux_p = QuadraticObservable::momentum(&space, 3);
    let phi = [lift(model.phi1())?, lift(model.phi2())?];
    let mut converted = Vec::new();
    for alpha in 0..2 {
        let deform = aux_q.scale(&x[(alpha, 0)]).add(&aux_p.scale(&x[(alpha, 1)]))?;
        converted.push(phi[alpha].add(&deform)?);
    }

    // B = omega^-1 X^-1 ||[Phi_alpha, y^c]||, constant because everything is
    // linear. Columns index the six original coordinates.
    let bracket_rows = Mat::from_fn(2, d6, |alpha, c| {
        let zc = QuadraticObservable::coordinate(original, c);
        crate::observable::poisson_bracket(&model.system.constraints[alpha].observable, &zc)
            .expect("same space")
            .constant_part()
            .clone()
    });
    let omega2_inv = Mat::from_rows(vec![
        vec![Scalar::zero(), -Scalar::one()],
        vec![Scalar::one(), Scalar::zero()],
    ]);
    let x_inv = x.inverse().map_err(|_| Error::InvalidX("X is singular".into()))?;
    let b_matrix = &(&omega2_inv * &x_inv) * &bracket_rows;

    // y~^c = y^c - psi^b B^c_b with psi = (q, p).
    let mut observables = Vec::new();
    for c in 0..d6 {
        let mut obs = QuadraticObservable::coordinate(&space, extended_index(&space, original, c));
        obs = obs.sub(&aux_q.scale(&b_matrix[(0, c)]))?;
        obs = obs.sub(&aux_p.scale(&b_matrix[(1, c)]))?;
        observables.push(obs);
    }
    let observables_q = observables[..3].to_vec();
    let observables_p = observables[3..].to_vec();

    // H~ = H(y~) = (1/2) sum p~_i^2 / mu_i.
    let mut hamiltonian = QuadraticObservable::zero(&space);
    for i in 0..3 {
        let term = observables_p[i]
            .mul(&observables_p[i])?
            .scale(&(model.config.reduced_mass(i).recip() * Scalar::ratio(1, 2)));
        hamiltonian = hamiltonian.add(&term)?;
    }

    let multiplier_terms = vec![
        ("lambda1".to_string(), converted[0].clone()),
        ("lambda2".to_string(), converted[1].clone()),
    ];
    Ok(ExtendedSystem {
        model: model.clone(),
        space,
        x: x.clone(),
        b_matrix,
        constraints: [converted[0].clone(), converted[1].clone()],
        observables_q,
        observables_p,
        hamiltonian,
        multiplier_terms,
    })
}

/// Maps an original coordinate index into the extended space (the added
/// pair sits at pair index 3).
fn extended_index(extended: &Arc<PhaseSpace>, original: &Arc<PhaseSpace>, c: usize) -> usize {
    if c < original.n_pairs() {
        extended.q(c)
    } else {
        extended.p(c - original.n_pairs())
    }
}

/// Hamiltonian kept in the structured form `base + sum coeff * Phi^2 +
/// multiplier terms`, mirroring the weak-equality bookkeeping: correction
/// and multiplier addends vanish on the constraint surface and are dropped
/// when their constraints become strong identities.
#[derive(Clone, Debug)]
pub struct TaggedHamiltonian {
    pub base: QuadraticObservable,
    /// `(coefficient, Phi)` meaning `coefficient * Phi^2`.
    pub corrections: Vec<(Scalar, QuadraticObservable)>,
    pub multiplier_terms: Vec<(String, QuadraticObservable)>,
}

impl TaggedHamiltonian {
    /// Base plus expanded corrections (multiplier terms stay symbolic).
    pub fn total(&self) -> QuadraticObservable {
        let mut out = self.base.clone();
        for (c, phi) in &self.corrections {
            out = out.add(&phi.mul(phi).unwrap().scale(c)).unwrap();
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeCondition {
    /// Fix `p ~ 0`; yields the intermediate momentum space.
    MomentumZero,
    /// Fix `q ~ 0`; yields the intermediate position space.
    PositionZero,
}

/// One partially gauge-fixed system: six dimensions, one surviving
/// first-class constraint, dressed observables.
#[derive(Clone, Debug)]
pub struct IntermediateSystem {
    pub model: RelativeModel,
    pub space: Arc<PhaseSpace>,
    pub gauge: GaugeCondition,
    pub constraint: QuadraticObservable,
    pub observables_q: Vec<QuadraticObservable>,
    pub observables_p: Vec<QuadraticObservable>,
    pub hamiltonian: TaggedHamiltonian,
    /// Classification of the mixed (first + second class) extended system
    /// that produced this space.
    pub mixed_classification: Classification,
}

/// Partially gauge-fixes the extended system on one of the added
/// coordinates. The gauge condition pairs up with the non-commuting
/// converted constraint as a second-class pair (handled by the general
/// classification machinery), and the added pair is then eliminated.
pub fn gauge_fix(ext: &ExtendedSystem, condition: GaugeCondition) -> Result<IntermediateSystem> {
    let space = &ext.space;
    let original = ext.model.space().clone();
    let cond_obs = match condition {
        GaugeCondition::MomentumZero => QuadraticObservable::momentum(space, 3),
        GaugeCondition::PositionZero => QuadraticObservable::position(space, 3),
    };
    // Mixed system: the two converted constraints plus the gauge condition.
    let mixed = ConstrainedSystem {
        space: space.clone(),
        hamiltonian: ext.hamiltonian.clone(),
        constraints: vec![
            Constraint { observable: ext.constraints[0].clone(), name: "Phi~1".into(), primary: false },
            Constraint { observable: ext.constraints[1].clone(), name: "Phi~2".into(), primary: false },
            Constraint { observable: cond_obs, name: "gauge".into(), primary: false },
        ],
        multipliers: Vec::new(),
    };
    let cls = classify(&mixed)?;
    if cls.first_class.len() != 1 || cls.second_class.len() != 2 {
        return Err(Error::UnsupportedGauge(format!(
            "expected one first-class and two second-class constraints, got {} + {}",
            cls.first_class.len(),
            cls.second_class.len()
        )));
    }

    // Section of the second-class surface: express the added pair through
    // the originals and eliminate it.
    let mu = ext.model.config.mu();
    let (mut m, _) = pair_insertion(space, 3);
    // q-slot row and p-slot row of the section.
    match condition {
        GaugeCondition::MomentumZero => {
            // Phi~1 = 0 => q = -Phi1; p = 0.
            for i in 0..3 {
                m[(space.q(3), original.q(i))] = -Scalar::one();
            }
        }
        GaugeCondition::PositionZero => {
            // Phi~2 = 0 => p = Phi2 / mu; q = 0.
            for i in 0..3 {
                m[(space.p(3), original.p(i))] =
                    ext.model.config.reduced_mass(i).recip() * mu.recip();
            }
        }
    }
    let zeros = vec![Scalar::zero(); space.dim()];
    let pull = |f: &QuadraticObservable| f.substitute_affine(&m, &zeros, &original);

    let surviving = match condition {
        GaugeCondition::MomentumZero => pull(&ext.constraints[1])?,
        GaugeCondition::PositionZero => pull(&ext.constraints[0])?,
    };
    let observables_q: Vec<_> = ext.observables_q.iter().map(&pull).collect::<Result<_>>()?;
    let observables_p: Vec<_> = ext.observables_p.iter().map(&pull).collect::<Result<_>>()?;
    let substituted = pull(&ext.hamiltonian)?;

    // Extract the structured form: base H plus an exact multiple of the
    // surviving constraint squared.
    let base = ext.model.hamiltonian().clone();
    let diff = substituted.sub(&base)?;
    let corrections = if diff.is_zero() {
        Vec::new()
    } else {
        // The correction is an exact multiple of an original constraint
        // squared (for q = 0 it is -Phi2^2 / (2 mu)).
        let mut found = None;
        for phi in [ext.model.phi1(), ext.model.phi2()] {
            let phi_sq = phi.mul(phi)?;
            if let Some(coeff) = match_multiple(&diff, &phi_sq) {
                found = Some((coeff, phi.clone()));
                break;
            }
        }
        let (coeff, phi) = found.ok_or_else(|| {
            Error::UnsupportedGauge("hamiltonian correction is not a constraint square".into())
        })?;
        vec![(coeff, phi)]
    };
    let lambda = match condition {
        GaugeCondition::MomentumZero => "lambda2'".to_string(),
        GaugeCondition::PositionZero => "lambda1'".to_string(),
    };
    Ok(IntermediateSystem {
        model: ext.model.clone(),
        space: original,
        gauge: condition,
        constraint: surviving.clone(),
        observables_q,
        observables_p,
        hamiltonian: TaggedHamiltonian {
            base,
            corrections,
            multiplier_terms: vec![(lambda, surviving)],
        },
        mixed_classification: cls,
    })
}

/// If `f = c * g` exactly, returns `c`.
fn match_multiple(f: &QuadraticObservable, g: &QuadraticObservable) -> Option<Scalar> {
    let d = f.space().dim();
    let mut ratio = None;
    let pairs = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (f.quadratic_part()[(i, j)].clone(), g.quadratic_part()[(i, j)].clone()))
        .chain((0..d).map(|i| (f.linear_part()[i].clone(), g.linear_part()[i].clone())))
        .chain(std::iter::once((f.constant_part().clone(), g.constant_part().clone())));
    for (fv, gv) in pairs {
        match (fv.is_zero(), gv.is_zero()) {
            (true, true) => {}
            (false, true) | (true, false) => return None,
            (false, false) => {
                let r = &fv / &gv;
                match &ratio {
                    None => ratio = Some(r),
                    Some(prev) if *prev == r => {}
                    _ => return None,
                }
            }
        }
    }
    ratio
}

/// Imposing the complementary original constraint on an intermediate space
/// recovers the original second-class system: correction and multiplier
/// addends vanish strongly and are dropped.
pub fn reduce_to_original(intermediate: &IntermediateSystem) -> ConstrainedSystem {
    let model = &intermediate.model;
    // Drop corrections attached to constraints of the full pair.
    let constraints = vec![
        Constraint { observable: model.phi1().clone(), name: "Phi1".into(), primary: false },
        Constraint { observable: model.phi2().clone(), name: "Phi2".into(), primary: false },
    ];
    ConstrainedSystem {
        space: intermediate.space.clone(),
        hamiltonian: intermediate.hamiltonian.base.clone(),
        constraints,
        multipliers: Vec::new(),
    }
}

/// The dressing map between the two intermediate presentations:
/// `p_bar = A p` with `A_ij = delta_ij - 1/(mu mu_j)` and `q_bar = A^T q`.
/// It is not invertible (the dressed coordinates satisfy their constraint
/// identically); canonicity holds for the degenerate Dirac structure:
/// `M D M^T = D`.
#[derive(Clone, Debug)]
pub struct IntermediateMap {
    pub matrix: Mat,
}

pub fn intermediate_symplectomorphism(model: &RelativeModel) -> IntermediateMap {
    let space = model.space();
    let d = space.dim();
    let mu = model.config.mu();
    let mut m = Mat::zeros(d, d);
    for i in 0..3 {
        for j in 0..3 {
            // p block: delta_ij - 1/(mu mu_j).
            let correction = model.config.reduced_mass(j).recip() * mu.recip();
            let delta = if i == j { Scalar::one() } else { Scalar::zero() };
            m[(space.p(i), space.p(j))] = &delta - &correction;
            // q block is the transpose: delta_ij - 1/(mu mu_i).
            let correction_t = model.config.reduced_mass(i).recip() * mu.recip();
            m[(space.q(i), space.q(j))] = &delta - &correction_t;
        }
    }
    IntermediateMap { matrix: m }
}

impl IntermediateMap {
    /// `M D M^T = D` for the degenerate Dirac matrix `D`.
    pub fn preserves_dirac_structure(&self, dirac: &Mat) -> bool {
        &(&self.matrix * dirac) * &self.matrix.transpose() == *dirac
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::dirac_matrix;
    use crate::model::{build_relative_model, systems_equal, MassConfig};
    use crate::observable::poisson_bracket;
    use crate::scalar::{int, rat};

    fn model(masses: [i64; 3]) -> RelativeModel {
        build_relative_model(
            &MassConfig::new(&[int(masses[0]), int(masses[1]), int(masses[2])]).unwrap(),
        )
    }

    #[test]
    fn canonical_x_unit_masses() {
        let m = model([1, 1, 1]);
        let family = solve_x(&m.classification.c_matrix).unwrap();
        assert_eq!(family.mu, int(9));
        assert_eq!(family.canonical[(0, 0)], int(1));
        assert_eq!(family.canonical[(1, 1)], int(-9));
        assert!(is_valid_x(&family.canonical, &int(9)));
        // Alternative with c = mu, b = 1 is valid; the sign-flipped one is not.
        let alt = Mat::from_rows(vec![vec![int(0), int(1)], vec![int(9), int(0)]]);
        assert!(is_valid_x(&alt, &int(9)));
        let bad = Mat::from_rows(vec![vec![int(0), int(1)], vec![int(-9), int(0)]]);
        assert!(!is_valid_x(&bad, &int(9)));
        // All-zero X is rejected.
        assert!(!is_valid_x(&Mat::zeros(2, 2), &int(9)));
    }

    #[test]
    fn converted_constraints_commute_and_match_closed_form() {
        let m = model([1, 2, 3]);
        let x = solve_x(&m.classification.c_matrix).unwrap().canonical;
        let ext = convert(&m, &x).unwrap();
        // {Phi~1, Phi~2} = 0.
        let bracket = poisson_bracket(&ext.constraints[0], &ext.constraints[1]).unwrap();
        assert!(bracket.is_zero());
        // Phi~1 = sum q_i + q: coefficient 1 on the added position.
        assert_eq!(ext.constraints[0].linear_part()[ext.space.q(3)], int(1));
        // Phi~2 = sum p_i/mu_i - mu p.
        assert_eq!(ext.constraints[1].linear_part()[ext.space.p(3)], -m.config.mu().clone());
        // Dirac observables: q~_i = q_i + q/(mu mu_i); p~_i = p_i - p.
        for i in 0..3 {
            let expect = m.config.reduced_mass(i).recip() * m.config.mu().recip();
            assert_eq!(ext.observables_q[i].linear_part()[ext.space.q(3)], expect);
            assert_eq!(ext.observables_p[i].linear_part()[ext.space.p(3)], int(-1));
        }
    }

    #[test]
    fn observables_commute_with_constraints() {
        let m = model([2, 3, 5]);
        let x = solve_x(&m.classification.c_matrix).unwrap().canonical;
        let ext = convert(&m, &x).unwrap();
        for alpha in 0..2 {
            for obs in ext.observables_q.iter().chain(&ext.observables_p) {
                assert!(poisson_bracket(&ext.constraints[alpha], obs).unwrap().is_zero());
            }
            assert!(poisson_bracket(&ext.constraints[alpha], &ext.hamiltonian)
                .unwrap()
                .is_zero());
        }
    }

    #[test]
    fn psi_zero_restriction_recovers_originals() {
        let m = model([1, 5, 7]);
        let x = solve_x(&m.classification.c_matrix).unwrap().canonical;
        let ext = convert(&m, &x).unwrap();
        assert!(ext.restrict(&ext.constraints[0]).unwrap().sub(m.phi1()).unwrap().is_zero());
        assert!(ext.restrict(&ext.constraints[1]).unwrap().sub(m.phi2()).unwrap().is_zero());
        for i in 0..3 {
            let qi = QuadraticObservable::position(m.space(), i);
            assert!(ext.restrict(&ext.observables_q[i]).unwrap().sub(&qi).unwrap().is_zero());
        }
        assert!(ext
            .restrict(&ext.hamiltonian)
            .unwrap()
            .sub(m.hamiltonian())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn gauge_fix_momentum_zero_is_intermediate_momentum_space() {
        let m = model([1, 2, 3]);
        let x = solve_x(&m.classification.c_matrix).unwrap().canonical;
        let ext = convert(&m, &x).unwrap();
        let int_p = gauge_fix(&ext, GaugeCondition::MomentumZero).unwrap();
        // Constraint Phi2; observables q_i - Phi1/(mu mu_i) and p_i; H = H(p).
        assert!(int_p.constraint.sub(m.phi2()).unwrap().is_zero());
        assert!(int_p.hamiltonian.corrections.is_empty());
        assert!(int_p.hamiltonian.base.sub(m.hamiltonian()).unwrap().is_zero());
        let s = m.space().clone();
        for i in 0..3 {
            let expect = QuadraticObservable::position(&s, i)
                .sub(&m.phi1().scale(
                    &(m.config.reduced_mass(i).recip() * m.config.mu().recip()),
                ))
                .unwrap();
            assert!(int_p.observables_q[i].sub(&expect).unwrap().is_zero());
            let pi = QuadraticObservable::momentum(&s, i);
            assert!(int_p.observables_p[i].sub(&pi).unwrap().is_zero());
        }
        // Dressed positions satisfy sum q~ = 0 identically.
        let sum = int_p.observables_q.iter().fold(
            QuadraticObservable::zero(&s),
            |acc, o| acc.add(o).unwrap(),
        );
        assert!(sum.is_zero());
    }

    #[test]
    fn gauge_fix_position_zero_is_intermediate_position_space() {
        let m = model([1, 2, 3]);
        let x = solve_x(&m.classification.c_matrix).unwrap().canonical;
        let ext = convert(&m, &x).unwrap();
        let int_q = gauge_fix(&ext, GaugeCondition::PositionZero).unwrap();
        assert!(int_q.constraint.sub(m.phi1()).unwrap().is_zero());
        // H_q = H - Phi2^2/(2 mu).
        assert_eq!(int_q.hamiltonian.corrections.len(), 1);
        let (coeff, phi) = &int_q.hamiltonian.corrections[0];
        assert_eq!(coeff, &(-(m.config.mu().recip() * rat(1, 2))));
        assert!(phi.sub(m.phi2()).unwrap().is_zero());
        let s = m.space().clone();
        for i in 0..3 {
            let qi = QuadraticObservable::position(&s, i);
            assert!(int_q.observables_q[i].sub(&qi).unwrap().is_zero());
            let expect = QuadraticObservable::momentum(&s, i)
                .sub(&m.phi2().scale(&m.config.mu().recip()))
                .unwrap();
            assert!(int_q.observables_p[i].sub(&expect).unwrap().is_zero());
        }
    }

    #[test]
    fn second_gauge_fix_recovers_original_system() {
        let m = model([2, 7, 9]);
        let x = solve_x(&m.classification.c_matrix).unwrap().canonical;
        let ext = convert(&m, &x).unwrap();
        for cond in [GaugeCondition::MomentumZero, GaugeCondition::PositionZero] {
            let intermediate = gauge_fix(&ext, cond).unwrap();
            let recovered = reduce_to_original(&intermediate);
            assert!(systems_equal(&recovered, &m.system));
        }
    }

    #[test]
    fn dressing_map_properties() {
        let m = model([1, 2, 3]);
        let map = intermediate_symplectomorphism(&m);
        let s = m.space().clone();
        // Entry formula on the p block.
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { Scalar::one() } else { Scalar::zero() }
                    - m.config.reduced_mass(j).recip() * m.config.mu().recip();
                assert_eq!(map.matrix[(s.p(i), s.p(j))], expect);
                assert_eq!(map.matrix[(s.q(j), s.q(i))], map.matrix[(s.p(i), s.p(j))]);
            }
        }
        // Canonical for the degenerate Dirac structure.
        let d = dirac_matrix(&m).unwrap();
        assert!(map.preserves_dirac_structure(&d));
        // Conjugates the intermediate Hamiltonians: H_p(M z) = H_q(z).
        let x = solve_x(&m.classification.c_matrix).unwrap().canonical;
        let ext = convert(&m, &x).unwrap();
        let h_q = gauge_fix(&ext, GaugeCondition::PositionZero).unwrap().hamiltonian.total();
        let h_p = gauge_fix(&ext, GaugeCondition::MomentumZero).unwrap().hamiltonian.total();
        let zeros = vec![Scalar::zero(); 6];
        let pulled = h_p.substitute_affine(&map.matrix, &zeros, &s).unwrap();
        assert!(pulled.sub(&h_q).unwrap().is_zero());
        // The image of the momentum block annihilates Phi2 identically.
        let phi2_pulled = m
            .phi2()
            .substitute_affine(&map.matrix, &zeros, &s)
            .unwrap();
        assert!(phi2_pulled.is_zero());
    }

    #[test]
    fn extended_constraints_classify_first_class() {
        let m = model([1, 2, 3]);
        let x = solve_x(&m.classification.c_matrix).unwrap().canonical;
        let ext = convert(&m, &x).unwrap();
        let system = ConstrainedSystem {
            space: ext.space.clone(),
            hamiltonian: ext.hamiltonian.clone(),
            constraints: vec![
                Constraint { observable: ext.constraints[0].clone(), name: "Phi~1".into(), primary: false },
                Constraint { observable: ext.constraints[1].clone(), name: "Phi~2".into(), primary: false },
            ],
            multipliers: Vec::new(),
        };
        let cls = classify(&system).unwrap();
        assert_eq!(cls.first_class.len(), 2);
        assert!(cls.second_class.is_empty());
        assert!(cls.delta.is_zero());
    }

    #[test]
    fn gauge_transformations_by_first_class_constraints() {
        use crate::constraint::gauge_transform;
        let m = model([1, 1, 1]);
        let x = solve_x(&m.classification.c_matrix).unwrap().canonical;
        let ext = convert(&m, &x).unwrap();
        let system = ConstrainedSystem {
            space: ext.space.clone(),
            hamiltonian: ext.hamiltonian.clone(),
            constraints: vec![
                Constraint { observable: ext.constraints[0].clone(), name: "Phi~1".into(), primary: false },
                Constraint { observable: ext.constraints[1].clone(), name: "Phi~2".into(), primary: false },
            ],
            multipliers: Vec::new(),
        };
        let cls = classify(&system).unwrap();
        let gamma = &ext.constraints[0];
        // Positions commute with Phi~1: q1 is unchanged.
        let q1 = QuadraticObservable::position(&ext.space, 0);
        let out = gauge_transform(&q1, gamma, &Scalar::one(), &system, &cls).unwrap();
        assert!(out.sub(&q1).unwrap().is_zero());
        // {p1, sum q_i + q} = -1: p1 shifts by -eps.
        let p1 = QuadraticObservable::momentum(&ext.space, 0);
        let eps = rat(5, 3);
        let out = gauge_transform(&p1, gamma, &eps, &system, &cls).unwrap();
        let expect = p1
            .add(&QuadraticObservable::constant(&ext.space, -eps))
            .unwrap();
        assert!(out.sub(&expect).unwrap().is_zero());
        // First-class constraints commute: Phi~2 is unchanged.
        let out = gauge_transform(&ext.constraints[1], gamma, &Scalar::one(), &system, &cls)
            .unwrap();
        assert!(out.sub(&ext.constraints[1]).unwrap().is_zero());
        // Every constraint stays weakly zero under the transformation.
        let mut rng = crate::sampling::rng_for(3, 0);
        for c in &system.constraints {
            let moved = gauge_transform(&c.observable, gamma, &rat(7, 2), &system, &cls).unwrap();
            for _ in 0..10 {
                let mut sampler = crate::sampling::scalar_sampler(&mut rng);
                let z = system.surface_point(&mut sampler);
                assert!(moved.evaluate(&z).is_zero());
            }
        }
        // A second-class generator is rejected on the original system.
        let err = gauge_transform(
            &QuadraticObservable::position(m.space(), 0),
            m.phi1(),
            &Scalar::one(),
            &m.system,
            &m.classification,
        )
        .unwrap_err();
        assert!(matches!(err, crate::error::Error::NotFirstClass(_)));
    }

    #[test]
    fn unit_mass_p_block_is_one_third_pattern() {
        let m = model([1, 1, 1]);
        let map = intermediate_symplectomorphism(&m);
        let s = m.space().clone();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { rat(2, 3) } else { rat(-1, 3) };
                assert_eq!(map.matrix[(s.p(i), s.p(j))], expect);
            }
        }
    }
}
