//! The full verification suite behind `framekit verify`: every closed-form
//! result of the pipeline, checked exactly (or to the stated
//! float tolerance on the quantum side), with randomized mass triples drawn
//! from the seed.

use serde_json::json;

use crate::abelian::{convert, gauge_fix, intermediate_symplectomorphism, solve_x, GaugeCondition};
use crate::constraint::{
    classify, dirac_bracket, run_consistency, run_consistency_no_discard, MultiplierStatus,
};
use crate::error::Result;
use crate::frames::{
    dirac_matrix, frame_transformation, mass_limit_check,
    relative_momentum_frame, relative_position_frame, Frame, FrameKind,
};
use crate::gaussian::{gaussian_apply_exact, gaussian_evolve, random_physical, reduce_gaussian};
use crate::matrix::Mat;
use crate::model::{
    build_relative_model, pre_reduction_input, relative_lagrangian_identity, relative_velocities,
    systems_equal, MassConfig, RelativeModel,
};
use crate::observable::{poisson_bracket, QuadraticObservable};
use crate::phase_space::PhaseSpace;
use crate::quantize::{
    find_generator, frame_change_via_neutral, standard_path, symmetry_reduce, trivialization,
    ReductionRoute, TrivializationKind,
};
use crate::report::{analysis, Report, Verdict};
use crate::sampling::{
    random_linear, random_mass_config, random_quadratic, random_valid_x,
    rng_for,
};
use crate::scalar::Scalar;
use crate::scenario::{closed_form_hamiltonian, parse_config, run_scenario};
use crate::symplectic::{is_symplectic, linear_flow, substitute};

/// One acceptance criterion: a numbered, named check with a tag for
/// subset runs.
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub tag: &'static str,
    runner: fn(u64) -> Result<Vec<Verdict>>,
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "appendix-b replay", tag: "consistency", runner: c1_appendix_b },
        Criterion { id: 2, name: "dirac bracket matrix", tag: "dirac-bracket", runner: c2_dirac },
        Criterion { id: 3, name: "reduced hamiltonians", tag: "frames", runner: c3_hamiltonians },
        Criterion { id: 4, name: "frame transformations", tag: "transformations", runner: c4_transformations },
        Criterion { id: 5, name: "generator recovery", tag: "generator", runner: c5_generator },
        Criterion { id: 6, name: "abelian conversion", tag: "abelianize", runner: c6_abelian },
        Criterion { id: 7, name: "path equivalence", tag: "reduce", runner: c7_paths },
        Criterion { id: 8, name: "heavy-mass limit", tag: "mass-limit", runner: c8_mass_limit },
        Criterion { id: 9, name: "gaussian consistency", tag: "gaussian", runner: c9_gaussian },
        Criterion { id: 10, name: "lagrangian identity", tag: "lagrangian", runner: c10_lagrangian },
        Criterion { id: 11, name: "property suites", tag: "properties", runner: c11_properties },
    ]
}

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: String,
    pub tag: String,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
    pub millis: u128,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} ... {}",
            self.id,
            self.tag,
            self.name,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Runs the suite (optionally a tagged subset) and returns per-criterion
/// outcomes.
pub fn run_criteria(seed: u64, only: Option<&str>) -> Vec<CriterionOutcome> {
    let mut outcomes = Vec::new();
    for c in criteria() {
        if let Some(tag) = only {
            if c.tag != tag {
                continue;
            }
        }
        let start = std::time::Instant::now();
        let verdicts = match (c.runner)(seed) {
            Ok(v) => v,
            Err(e) => vec![Verdict::new("execution", false, e.to_string())],
        };
        let passed = verdicts.iter().all(|v| v.passed);
        outcomes.push(CriterionOutcome {
            id: c.id,
            name: c.name.to_string(),
            tag: c.tag.to_string(),
            passed,
            verdicts,
            millis: start.elapsed().as_millis(),
        });
    }
    outcomes
}

/// Assembles the outcomes into the standard report shape.
pub fn verify_report(seed: u64, only: Option<&str>) -> Report {
    let mut report = Report::new("verify", seed, None);
    for outcome in run_criteria(seed, only) {
        report.push(analysis(
            &format!("criterion-{:02} {}", outcome.id, outcome.name),
            outcome.verdicts.clone(),
            json!({ "tag": outcome.tag }),
        ));
    }
    report
}

fn unit_model() -> RelativeModel {
    build_relative_model(&MassConfig::unit())
}

fn frame_for(model: &RelativeModel, kind: FrameKind, anchor: usize) -> Result<Frame> {
    match kind {
        FrameKind::RelativePosition => relative_position_frame(model, anchor),
        FrameKind::RelativeMomentum => relative_momentum_frame(model, anchor),
        FrameKind::Custom => unreachable!(),
    }
}

// Criterion 1: the consistency chain p4, sum q_i, sum p_i/mu_i, mu q4 with
// the multiplier forced to zero, for 10 random rational mass triples.
fn c1_appendix_b(seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = rng_for(seed, 1);
    let mut chain_ok = true;
    let mut y_ok = true;
    let mut model_ok = true;
    for _ in 0..10 {
        let config = random_mass_config(&mut rng);
        let (h, primaries, space) = pre_reduction_input(&config);
        let (raw, _) = run_consistency_no_discard(&h, &primaries)?;
        let expected = {
            let d = space.dim();
            let mut p4 = vec![Scalar::zero(); d];
            p4[space.p(3)] = Scalar::one();
            let mut sq = vec![Scalar::zero(); d];
            let mut sp = vec![Scalar::zero(); d];
            for i in 0..3 {
                sq[space.q(i)] = Scalar::one();
                sp[space.p(i)] = config.reduced_mass(i).recip();
            }
            let mut q4 = vec![Scalar::zero(); d];
            q4[space.q(3)] = config.mu().clone();
            [p4, sq, sp, q4].map(|v| QuadraticObservable::linear_form(&space, v))
        };
        chain_ok &= raw.constraints.len() == 4
            && raw
                .constraints
                .iter()
                .zip(&expected)
                .all(|(c, e)| c.observable.sub(e).map(|x| x.is_zero()).unwrap_or(false));
        y_ok &= matches!(
            raw.multipliers.first().map(|m| &m.status),
            Some(MultiplierStatus::ForcedZero)
        );
        let (reduced, _) = run_consistency(&h, &primaries)?;
        model_ok &= systems_equal(&reduced, &build_relative_model(&config).system);
    }
    Ok(vec![
        Verdict::new("chain is exactly p4, sum q_i, sum p_i/mu_i, mu q4", chain_ok, "10 mass triples"),
        Verdict::new("multiplier y forced to zero", y_ok, ""),
        Verdict::new("discard reproduces the relative model", model_ok, ""),
    ])
}

// Criterion 2: Dirac bracket matrix equals delta_ij - 1/(mu mu_i) on the
// q-p block with vanishing q-q and p-p blocks, for 25 random mass triples;
// the unit-mass instantiation is 2/3 / -1/3.
fn c2_dirac(seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = rng_for(seed, 2);
    let mut formula_ok = true;
    for _ in 0..25 {
        let model = build_relative_model(&random_mass_config(&mut rng));
        let d = dirac_matrix(&model)?;
        let s = model.space();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { Scalar::one() } else { Scalar::zero() }
                    - model.config.mass_term(i);
                formula_ok &= d[(s.q(i), s.p(j))] == expect
                    && d[(s.q(i), s.q(j))].is_zero()
                    && d[(s.p(i), s.p(j))].is_zero();
            }
        }
    }
    let unit = dirac_matrix(&unit_model())?;
    let s = PhaseSpace::new(3);
    let mut unit_ok = true;
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { Scalar::ratio(2, 3) } else { Scalar::ratio(-1, 3) };
            unit_ok &= unit[(s.q(i), s.p(j))] == expect;
        }
    }
    Ok(vec![
        Verdict::new("{q_i, p_j} = delta_ij - 1/(mu mu_i) exactly", formula_ok, "25 mass triples"),
        Verdict::new("unit masses give 2/3 and -1/3", unit_ok, ""),
    ])
}

// Criterion 3: reduced Hamiltonians match the closed forms exactly at 10
// random mass triples; unit-mass values are frozen.
fn c3_hamiltonians(seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = rng_for(seed, 3);
    let mut closed_ok = true;
    for _ in 0..10 {
        let model = build_relative_model(&random_mass_config(&mut rng));
        for kind in [FrameKind::RelativePosition, FrameKind::RelativeMomentum] {
            let frame = frame_for(&model, kind, 0)?;
            closed_ok &= frame
                .reduced_hamiltonian
                .sub(&closed_form_hamiltonian(&model, kind, 0)?)?
                .is_zero();
        }
    }
    let model = unit_model();
    let hq = relative_position_frame(&model, 0)?.reduced_hamiltonian;
    let hp = relative_momentum_frame(&model, 0)?.reduced_hamiltonian;
    let r = hq.space().clone();
    let q = hq.quadratic_part();
    let unit_q = q[(r.p(0), r.p(0))] == Scalar::from_int(2)
        && q[(r.p(1), r.p(1))] == Scalar::from_int(2)
        && q[(r.p(0), r.p(1))] == Scalar::one();
    let qp = hp.quadratic_part();
    let unit_p = qp[(r.p(0), r.p(0))] == Scalar::from_int(6)
        && qp[(r.p(1), r.p(1))] == Scalar::from_int(6)
        && qp[(r.p(0), r.p(1))] == Scalar::from_int(-3);
    Ok(vec![
        Verdict::new("closed forms match at random masses", closed_ok, "10 mass triples"),
        Verdict::new("unit masses: H_q1 = pi2^2 + pi3^2 + pi2 pi3", unit_q, hq.render()),
        Verdict::new("unit masses: H_p1 = 3 rho2^2 + 3 rho3^2 - 3 rho2 rho3", unit_p, hp.render()),
    ])
}

// Criterion 4: the unit-mass transformations match their closed forms
// verbatim; round trips and compositions are exact identities.
fn c4_transformations(seed: u64) -> Result<Vec<Verdict>> {
    let model = unit_model();
    let q1 = relative_position_frame(&model, 0)?;
    let q2 = relative_position_frame(&model, 1)?;
    let p1 = relative_momentum_frame(&model, 0)?;
    let p2 = relative_momentum_frame(&model, 1)?;
    let q1q2 = frame_transformation(&q1, &q2)?;
    let expected_q = Mat::from_int_rows(&[
        &[-1, 0, 0, 0],
        &[-1, 1, 0, 0],
        &[0, 0, -1, -1],
        &[0, 0, 0, 1],
    ]);
    let p1p2 = frame_transformation(&p1, &p2)?;
    let expected_p = Mat::from_int_rows(&[
        &[-1, -1, 0, 0],
        &[0, 1, 0, 0],
        &[0, 0, -1, 0],
        &[0, 0, -1, 1],
    ]);
    let q1p1 = frame_transformation(&q1, &p1)?;
    let expected_qp = Mat::from_rows(vec![
        vec![Scalar::ratio(2, 3), Scalar::ratio(1, 3), Scalar::zero(), Scalar::zero()],
        vec![Scalar::ratio(1, 3), Scalar::ratio(2, 3), Scalar::zero(), Scalar::zero()],
        vec![Scalar::zero(), Scalar::zero(), Scalar::from_int(2), Scalar::from_int(-1)],
        vec![Scalar::zero(), Scalar::zero(), Scalar::from_int(-1), Scalar::from_int(2)],
    ]);
    // Round trips and composition coherence at random masses.
    let mut rng = rng_for(seed, 4);
    let mut round_ok = true;
    let mut compose_ok = true;
    for _ in 0..5 {
        let m = build_relative_model(&random_mass_config(&mut rng));
        let frames: Vec<Frame> = {
            let mut v = Vec::new();
            for kind in [FrameKind::RelativePosition, FrameKind::RelativeMomentum] {
                for anchor in 0..3 {
                    v.push(frame_for(&m, kind, anchor)?);
                }
            }
            v
        };
        for a in &frames {
            for b in &frames {
                let t = frame_transformation(a, b)?;
                let back = frame_transformation(b, a)?;
                round_ok &= t.matrix() * back.matrix() == Mat::identity(4);
                for c in &frames {
                    let ac = frame_transformation(a, c)?;
                    let bc = frame_transformation(b, c)?;
                    let ab = frame_transformation(a, b)?;
                    compose_ok &= ac.matrix() == &(ab.matrix() * bc.matrix());
                }
            }
        }
    }
    Ok(vec![
        Verdict::new(
            "q1 -> q2: u2 = -u1., u3 = u3. - u1., pi2 = -(pi1. + pi3.), pi3 = pi3.",
            q1q2.matrix() == &expected_q,
            "",
        ),
        Verdict::new(
            "p1 -> p2: u2 = -(u1. + u3.), u3 = u3., pi2 = -pi1., pi3 = pi3. - pi1.",
            p1p2.matrix() == &expected_p,
            "",
        ),
        Verdict::new(
            "q1 -> p1: u2 = (2 u2. + u3.)/3, pi2 = 2 pi2. - pi3., ...",
            q1p1.matrix() == &expected_qp,
            "",
        ),
        Verdict::new("round trips are exact identities", round_ok, ""),
        Verdict::new("composition coherence T(a,c) = T(a,b) T(b,c)", compose_ok, ""),
    ])
}

// Criterion 5: the generator of the unit-mass q1 -> p1 map is proportional
// to (u2 - u3)(pi2 - pi3) with |t| = log(3)/2, re-exponentiating to 1e-9.
fn c5_generator(_seed: u64) -> Result<Vec<Verdict>> {
    let model = unit_model();
    let q1 = relative_position_frame(&model, 0)?;
    let p1 = relative_momentum_frame(&model, 0)?;
    let target = frame_transformation(&q1, &p1)?.matrix().clone();
    let space = q1.embedding.reduced.clone();
    let f = find_generator(&space, &target)?;
    let t_ok = (f.t.abs() - 3f64.ln() / 2.0).abs() < 1e-9;
    let reference = QuadraticObservable::position(&space, 0)
        .sub(&QuadraticObservable::position(&space, 1))?
        .mul(
            &QuadraticObservable::momentum(&space, 0)
                .sub(&QuadraticObservable::momentum(&space, 1))?,
        )?;
    let mut proportional = true;
    let mut ratio: Option<Scalar> = None;
    for i in 0..4 {
        for j in 0..4 {
            let g = &f.generator.quadratic_part()[(i, j)];
            let r = &reference.quadratic_part()[(i, j)];
            if r.is_zero() {
                proportional &= g.is_zero();
            } else {
                let q = g / r;
                match &ratio {
                    None => ratio = Some(q),
                    Some(prev) => proportional &= prev == &q,
                }
            }
        }
    }
    proportional &= ratio.map(|r| !r.is_zero()).unwrap_or(false);
    let k = (&space.omega() * f.generator.quadratic_part()).to_f64().scale(f.t);
    let rebuilt = k.expm();
    let exp_ok = rebuilt.max_abs_diff(&target.to_f64()) < 1e-9 && f.parity.is_none();
    Ok(vec![
        Verdict::new("|t| = log(3)/2 within 1e-9", t_ok, format!("t = {}", f.t)),
        Verdict::new("generator proportional to (u2 - u3)(pi2 - pi3)", proportional, ""),
        Verdict::new("re-exponentiation reproduces the map within 1e-9", exp_ok, ""),
    ])
}

// Criterion 6: the abelian conversion, for 25 random mass triples and 10
// random valid X choices; the intermediate structures and the dressing map
// identities hold exactly.
fn c6_abelian(seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = rng_for(seed, 6);
    let mut abelian_ok = true;
    let mut observables_ok = true;
    let mut restriction_ok = true;
    for k in 0..25 {
        let model = build_relative_model(&random_mass_config(&mut rng));
        let mut xs = vec![solve_x(&model.classification.c_matrix)?.canonical];
        if k < 10 {
            xs.push(random_valid_x(model.config.mu(), &mut rng));
        }
        for x in xs {
            let ext = convert(&model, &x)?;
            abelian_ok &= poisson_bracket(&ext.constraints[0], &ext.constraints[1])?.is_zero();
            for alpha in 0..2 {
                for obs in ext.observables_q.iter().chain(&ext.observables_p) {
                    observables_ok &=
                        poisson_bracket(&ext.constraints[alpha], obs)?.is_zero();
                }
                observables_ok &=
                    poisson_bracket(&ext.constraints[alpha], &ext.hamiltonian)?.is_zero();
            }
            // Physical content is X-independent on the psi = 0 surface.
            restriction_ok &= ext
                .restrict(&ext.hamiltonian)?
                .sub(model.hamiltonian())?
                .is_zero();
            for (i, obs) in ext.observables_q.iter().enumerate() {
                let qi = QuadraticObservable::position(model.space(), i);
                restriction_ok &= ext.restrict(obs)?.sub(&qi)?.is_zero();
            }
        }
    }
    // Intermediate structures and the dressing map at random masses.
    let mut intermediate_ok = true;
    let mut dressing_ok = true;
    for _ in 0..5 {
        let model = build_relative_model(&random_mass_config(&mut rng));
        let x = solve_x(&model.classification.c_matrix)?.canonical;
        let ext = convert(&model, &x)?;
        let int_p = gauge_fix(&ext, GaugeCondition::MomentumZero)?;
        let int_q = gauge_fix(&ext, GaugeCondition::PositionZero)?;
        intermediate_ok &= int_p.constraint.sub(model.phi2())?.is_zero()
            && int_p.hamiltonian.corrections.is_empty()
            && int_p.hamiltonian.base.sub(model.hamiltonian())?.is_zero();
        let q_corr = int_q.hamiltonian.corrections.len() == 1 && {
            let (c, phi) = &int_q.hamiltonian.corrections[0];
            *c == -(model.config.mu().recip() * Scalar::ratio(1, 2))
                && phi.sub(model.phi2())?.is_zero()
        };
        intermediate_ok &= int_q.constraint.sub(model.phi1())?.is_zero() && q_corr;
        for i in 0..3 {
            let s = model.space();
            let expect_qp = QuadraticObservable::position(s, i).sub(
                &model
                    .phi1()
                    .scale(&(model.config.reduced_mass(i).recip() * model.config.mu().recip())),
            )?;
            intermediate_ok &= int_p.observables_q[i].sub(&expect_qp)?.is_zero();
            let expect_pq = QuadraticObservable::momentum(s, i)
                .sub(&model.phi2().scale(&model.config.mu().recip()))?;
            intermediate_ok &= int_q.observables_p[i].sub(&expect_pq)?.is_zero();
        }
        let map = intermediate_symplectomorphism(&model);
        let s = model.space();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { Scalar::one() } else { Scalar::zero() }
                    - model.config.reduced_mass(j).recip() * model.config.mu().recip();
                dressing_ok &= map.matrix[(s.p(i), s.p(j))] == expect;
                dressing_ok &= map.matrix[(s.q(j), s.q(i))] == expect;
            }
        }
        let d = dirac_matrix(&model)?;
        dressing_ok &= map.preserves_dirac_structure(&d);
        let zeros = vec![Scalar::zero(); 6];
        let pulled = int_p
            .hamiltonian
            .total()
            .substitute_affine(&map.matrix, &zeros, s)?;
        dressing_ok &= pulled.sub(&int_q.hamiltonian.total())?.is_zero();
    }
    Ok(vec![
        Verdict::new("{Phi~1, Phi~2} = 0 (canonical and random X)", abelian_ok, "25 + 10 samples"),
        Verdict::new("Dirac observables and H~ commute with both constraints", observables_ok, ""),
        Verdict::new("psi = 0 restriction is X-independent", restriction_ok, ""),
        Verdict::new("intermediate spaces match their closed forms", intermediate_ok, ""),
        Verdict::new("S_{q->p} canonicity identities hold exactly", dressing_ok, ""),
    ])
}

// Criterion 7: path equivalence, for all three anchors and 10 random mass
// triples; neutral-structure frame changes equal the Darboux-route maps.
fn c7_paths(seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = rng_for(seed, 7);
    let mut reduce_ok = true;
    let mut neutral_ok = true;
    for _ in 0..10 {
        let model = build_relative_model(&random_mass_config(&mut rng));
        let x = solve_x(&model.classification.c_matrix)?.canonical;
        let ext = convert(&model, &x)?;
        for anchor in 0..3 {
            for (kind, route) in [
                (FrameKind::RelativePosition, ReductionRoute::Position),
                (FrameKind::RelativeMomentum, ReductionRoute::Momentum),
            ] {
                let reduced = symmetry_reduce(&ext, &standard_path(&ext, route, anchor)?)?;
                let frame = frame_for(&model, kind, anchor)?;
                reduce_ok &= reduced
                    .hamiltonian
                    .same_coefficients(&frame.reduced_hamiltonian);
            }
        }
        let kinds = [FrameKind::RelativePosition, FrameKind::RelativeMomentum];
        for ka in kinds {
            for kb in kinds {
                for aa in 0..3 {
                    for ab in 0..3 {
                        let fa = frame_for(&model, ka, aa)?;
                        let fb = frame_for(&model, kb, ab)?;
                        let direct = frame_transformation(&fa, &fb)?;
                        let neutral = frame_change_via_neutral(&ext, (ka, aa), (kb, ab))?;
                        neutral_ok &= &neutral == direct.matrix();
                    }
                }
            }
        }
    }
    Ok(vec![
        Verdict::new(
            "two-stage reductions equal the frame Hamiltonians (all anchors)",
            reduce_ok,
            "10 mass triples",
        ),
        Verdict::new(
            "frame changes via the neutral structure equal the Darboux route",
            neutral_ok,
            "all kind/anchor pairs",
        ),
    ])
}

// Criterion 8: the heavy-mass limit tables.
fn c8_mass_limit(_seed: u64) -> Result<Vec<Verdict>> {
    let mut verdicts = Vec::new();
    for kind in [FrameKind::RelativePosition, FrameKind::RelativeMomentum] {
        let table = mass_limit_check(kind, 0, 12)?;
        let rate_ok = table.rows.iter().all(|r| {
            &r.hamiltonian_deviation * &r.heavy_mass <= Scalar::from_int(4)
        });
        verdicts.push(Verdict::new(
            format!("{kind:?}: bracket deviation <= 2/m, strictly decreasing"),
            table.within_bound && table.strictly_decreasing,
            format!(
                "k=12 deviation {}",
                crate::report::format_f64(table.rows.last().unwrap().bracket_deviation_f64)
            ),
        ));
        verdicts.push(Verdict::new(
            format!("{kind:?}: reduced H converges at O(1/m)"),
            rate_ok,
            "",
        ));
    }
    Ok(verdicts)
}

// Criterion 9: Gaussian evolution commutes with the frame change within
// 1e-9 on covariances for t in {0.1, 1, 10}.
fn c9_gaussian(seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = rng_for(seed, 9);
    let model = unit_model();
    let fa = relative_position_frame(&model, 0)?;
    let fb = relative_position_frame(&model, 1)?;
    let transport = frame_transformation(&fa, &fb)?.inverse();
    let state = random_physical(2, &mut rng);
    let mut max_dev = 0.0f64;
    for time in [0.1, 1.0, 10.0] {
        let a = gaussian_apply_exact(
            &gaussian_evolve(&state, &fa.reduced_hamiltonian, time)?,
            &transport,
        )?;
        let b = gaussian_evolve(
            &gaussian_apply_exact(&state, &transport)?,
            &fb.reduced_hamiltonian,
            time,
        )?;
        max_dev = max_dev.max(a.covariance.max_abs_diff(&b.covariance));
    }
    // The full reduction path commutes with the extended dynamics.
    let x = solve_x(&model.classification.c_matrix)?.canonical;
    let ext = convert(&model, &x)?;
    let path = standard_path(&ext, ReductionRoute::Position, 0)?;
    let ext_state = random_physical(4, &mut rng);
    let time = 0.7;
    let a = reduce_gaussian(
        &gaussian_evolve(&ext_state, &ext.hamiltonian, time)?,
        &ext.constraints,
        &path,
    )?;
    let b = gaussian_evolve(
        &reduce_gaussian(&ext_state, &ext.constraints, &path)?,
        &fa.reduced_hamiltonian,
        time,
    )?;
    let path_dev = a.covariance.max_abs_diff(&b.covariance);
    Ok(vec![
        Verdict::new(
            "frame transport commutes with evolution (t = 0.1, 1, 10)",
            max_dev < 1e-9,
            format!("max covariance deviation {}", crate::report::format_f64(max_dev)),
        ),
        Verdict::new(
            "reduction path commutes with extended dynamics",
            path_dev < 1e-9,
            format!("covariance deviation {}", crate::report::format_f64(path_dev)),
        ),
        Verdict::new(
            "physicality preserved along the way",
            a.physicality_margin() > -1e-9 && b.physicality_margin() > -1e-9,
            "",
        ),
    ])
}

// Criterion 10: the three Lagrangian forms agree exactly at 100 random
// velocity/mass samples and vanish on pure center-of-mass motion.
fn c10_lagrangian(seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = rng_for(seed, 10);
    let mut agree_ok = true;
    for _ in 0..100 {
        let config = random_mass_config(&mut rng);
        let sample = [
            crate::sampling::random_small_rational(&mut rng),
            crate::sampling::random_small_rational(&mut rng),
            crate::sampling::random_small_rational(&mut rng),
        ];
        agree_ok &= relative_lagrangian_identity(&config, &[sample]).is_ok();
    }
    let mut cm_ok = true;
    for _ in 0..10 {
        let config = random_mass_config(&mut rng);
        let v = crate::sampling::random_small_rational(&mut rng);
        let sample = [v.clone(), v.clone(), v.clone()];
        let qdot = relative_velocities(&sample);
        cm_ok &= qdot.iter().all(Scalar::is_zero);
        let half = Scalar::ratio(1, 2);
        let reduced: Scalar = (0..3)
            .map(|i| &half * config.reduced_mass(i) * &qdot[i] * &qdot[i])
            .sum();
        cm_ok &= reduced.is_zero();
        cm_ok &= relative_lagrangian_identity(&config, &[sample]).is_ok();
    }
    Ok(vec![
        Verdict::new("three Lagrangian forms agree exactly", agree_ok, "100 samples"),
        Verdict::new("pure center-of-mass motion gives zero", cm_ok, ""),
    ])
}

// Criterion 11: the algebraic property suites.
fn c11_properties(seed: u64) -> Result<Vec<Verdict>> {
    let mut rng = rng_for(seed, 11);
    let space = PhaseSpace::new(3);
    let mut verdicts = Vec::new();

    // Bracket antisymmetry and Jacobi on random quadratics, exact.
    let mut antisym = true;
    let mut jacobi = true;
    for _ in 0..12 {
        let f = random_quadratic(&space, &mut rng);
        let g = random_quadratic(&space, &mut rng);
        let h = random_quadratic(&space, &mut rng);
        antisym &= poisson_bracket(&f, &g)?
            .add(&poisson_bracket(&g, &f)?)?
            .is_zero();
        let cyc = poisson_bracket(&f, &poisson_bracket(&g, &h)?)?
            .add(&poisson_bracket(&g, &poisson_bracket(&h, &f)?)?)?
            .add(&poisson_bracket(&h, &poisson_bracket(&f, &g)?)?)?;
        jacobi &= cyc.is_zero();
    }
    verdicts.push(Verdict::new("Poisson antisymmetry", antisym, "12 random pairs"));
    verdicts.push(Verdict::new("Jacobi identity", jacobi, "12 random triples"));

    // Leibniz on products of linear observables.
    let mut leibniz = true;
    for _ in 0..12 {
        let f = random_quadratic(&space, &mut rng);
        let g = random_linear(&space, &mut rng);
        let h = random_linear(&space, &mut rng);
        let lhs = poisson_bracket(&f, &g.mul(&h)?)?;
        let rhs = poisson_bracket(&f, &g)?.mul(&h)?.add(&g.mul(&poisson_bracket(&f, &h)?)?)?;
        leibniz &= lhs.sub(&rhs)?.is_zero();
    }
    verdicts.push(Verdict::new("Leibniz rule on linear products", leibniz, ""));

    // Dirac-bracket properties on the model: antisymmetry, second-class
    // annihilation, unambiguity under f -> f + Phi, and weak agreement with
    // the Poisson bracket against the Hamiltonian.
    let model = build_relative_model(&random_mass_config(&mut rng));
    let cls = &model.classification;
    let mut dirac_ok = true;
    let mut unambiguous = true;
    for _ in 0..8 {
        let f = random_quadratic(model.space(), &mut rng);
        let g = random_quadratic(model.space(), &mut rng);
        dirac_ok &= dirac_bracket(&f, &g, cls)?
            .add(&dirac_bracket(&g, &f, cls)?)?
            .is_zero();
        dirac_ok &= dirac_bracket(model.phi1(), &f, cls)?.is_zero()
            && dirac_bracket(model.phi2(), &f, cls)?.is_zero();
        let shifted = f.add(&model.phi1().scale(&crate::sampling::random_small_rational(&mut rng)))?;
        unambiguous &= dirac_bracket(&shifted, &g, cls)?
            .sub(&dirac_bracket(&f, &g, cls)?)?
            .is_zero();
    }
    verdicts.push(Verdict::new("Dirac bracket antisymmetry + annihilation", dirac_ok, ""));
    verdicts.push(Verdict::new("Dirac bracket unambiguity under f -> f + Phi", unambiguous, ""));

    let mut weak_ok = true;
    {
        let f = random_quadratic(model.space(), &mut rng);
        let db = dirac_bracket(&f, model.hamiltonian(), cls)?;
        let pb = poisson_bracket(&f, model.hamiltonian())?;
        for _ in 0..100 {
            let mut sampler = crate::sampling::scalar_sampler(&mut rng);
            let point = model.system.surface_point(&mut sampler);
            weak_ok &= db.evaluate(&point) == pb.evaluate(&point);
        }
    }
    verdicts.push(Verdict::new(
        "Dirac and Poisson brackets agree against H on 100 surface points",
        weak_ok,
        "",
    ));

    // Jacobi for the Dirac bracket (exact, random quadratics).
    let mut dirac_jacobi = true;
    for _ in 0..5 {
        let f = random_quadratic(model.space(), &mut rng);
        let g = random_quadratic(model.space(), &mut rng);
        let h = random_quadratic(model.space(), &mut rng);
        let cyc = dirac_bracket(&f, &dirac_bracket(&g, &h, cls)?, cls)?
            .add(&dirac_bracket(&g, &dirac_bracket(&h, &f, cls)?, cls)?)?
            .add(&dirac_bracket(&h, &dirac_bracket(&f, &g, cls)?, cls)?)?;
        dirac_jacobi &= cyc.is_zero();
    }
    verdicts.push(Verdict::new("Dirac bracket Jacobi identity", dirac_jacobi, ""));

    // Flow composition and substitution homomorphism.
    let mut flow_ok = true;
    let shear = QuadraticObservable::position(&space, 1)
        .mul(&QuadraticObservable::momentum(&space, 2))?;
    let s1 = linear_flow(&shear, &Scalar::ratio(2, 7))?;
    let s2 = linear_flow(&shear, &Scalar::ratio(5, 7))?;
    flow_ok &= s1.compose(&s2)? == linear_flow(&shear, &Scalar::one())?;
    let f = random_quadratic(&space, &mut rng);
    let g = random_quadratic(&space, &mut rng);
    let map = linear_flow(&shear, &Scalar::ratio(3, 2))?;
    flow_ok &= poisson_bracket(&substitute(&f, &map)?, &substitute(&g, &map)?)?
        .sub(&substitute(&poisson_bracket(&f, &g)?, &map)?)?
        .is_zero();
    verdicts.push(Verdict::new("flow composition + bracket homomorphism", flow_ok, ""));

    // Symplecticity of every emitted map.
    let mut sympl_ok = true;
    {
        let m = build_relative_model(&random_mass_config(&mut rng));
        let frames: Vec<Frame> = {
            let mut v = Vec::new();
            for kind in [FrameKind::RelativePosition, FrameKind::RelativeMomentum] {
                for anchor in 0..3 {
                    v.push(frame_for(&m, kind, anchor)?);
                }
            }
            v
        };
        for a in &frames {
            for b in &frames {
                sympl_ok &= is_symplectic(frame_transformation(a, b)?.matrix())?.ok;
            }
        }
        let x = solve_x(&m.classification.c_matrix)?.canonical;
        let ext = convert(&m, &x)?;
        for kind in [TrivializationKind::TP, TrivializationKind::TQ] {
            sympl_ok &= is_symplectic(trivialization(&ext, kind, None)?.map.matrix())?.ok;
        }
        for kind in [TrivializationKind::TQi, TrivializationKind::TPi] {
            for anchor in 0..3 {
                sympl_ok &=
                    is_symplectic(trivialization(&ext, kind, Some(anchor))?.map.matrix())?.ok;
            }
        }
    }
    verdicts.push(Verdict::new("every emitted map is symplectic", sympl_ok, ""));

    // Classification sanity: counts add up, second-class count is even, and
    // the three-particle replay closes within the expected number of cycles.
    let mut class_ok = true;
    {
        let m = build_relative_model(&random_mass_config(&mut rng));
        let cls2 = classify(&m.system)?;
        class_ok &= cls2.first_class.len() + cls2.second_class.len() == 2;
        class_ok &= cls2.second_class.len() % 2 == 0;
        let (h, primaries, _) = pre_reduction_input(&m.config);
        let (raw, trace) = run_consistency_no_discard(&h, &primaries)?;
        let cycles = trace
            .steps
            .iter()
            .filter(|s| matches!(s.outcome, crate::constraint::TraceOutcome::Cycle { .. }))
            .count();
        class_ok &= cycles <= 4;
        // The closed pre-discard chain classifies as four second-class
        // constraints (two conjugate pairs).
        let raw_cls = classify(&raw)?;
        class_ok &= raw_cls.second_class.len() == 4 && raw_cls.first_class.is_empty();
        class_ok &=
            raw_cls.first_class.len() + raw_cls.second_class.len() == raw.constraints.len();
    }
    verdicts.push(Verdict::new("classification counts and cycle bound", class_ok, ""));

    // Report determinism: identical (config, seed) gives byte-identical
    // reports; different seeds give identical verdicts.
    let config = parse_config(
        "masses = [\"1\", \"1\", \"1\"]\nanalyses = [\"dirac-bracket\", \"frames\"]\n",
    )?;
    let r1 = run_scenario(&config, seed)?;
    let r2 = run_scenario(&config, seed)?;
    let deterministic = r1.to_json() == r2.to_json();
    let r3 = run_scenario(&config, seed.wrapping_add(1))?;
    let verdicts_match = r1
        .analyses
        .iter()
        .zip(&r3.analyses)
        .all(|(a, b)| {
            a.passed == b.passed
                && a.verdicts.iter().zip(&b.verdicts).all(|(x, y)| x.passed == y.passed)
        });
    verdicts.push(Verdict::new("reports are byte-stable under a fixed seed", deterministic, ""));
    verdicts.push(Verdict::new("verdicts are seed-independent", verdicts_match, ""));

    Ok(verdicts)
}
