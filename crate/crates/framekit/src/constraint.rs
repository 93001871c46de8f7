//! Dirac's algorithm for constrained Hamiltonian systems: consistency
//! conditions, first/second-class classification, Dirac brackets, gauge
//! transformations, and equations of motion.
//!
//! All decisions here are exact rank tests over the rationals; there are no
//! epsilon thresholds anywhere in the classical core.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::observable::{poisson_bracket, QuadraticObservable};
use crate::phase_space::PhaseSpace;
use crate::scalar::Scalar;

/// Status of a primary constraint's Lagrange multiplier after the
/// consistency analysis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MultiplierStatus {
    /// No condition arose; the multiplier is an arbitrary function of time.
    Free,
    /// Solved to a phase-space expression (rendered form).
    Fixed(String),
    /// Solved and identically zero.
    ForcedZero,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplierRecord {
    pub name: String,
    pub constraint: String,
    pub status: MultiplierStatus,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub observable: QuadraticObservable,
    pub name: String,
    pub primary: bool,
}

/// A Hamiltonian together with a closed, ordered constraint list.
#[derive(Clone, Debug)]
pub struct ConstrainedSystem {
    pub space: Arc<PhaseSpace>,
    pub hamiltonian: QuadraticObservable,
    pub constraints: Vec<Constraint>,
    pub multipliers: Vec<MultiplierRecord>,
}

impl ConstrainedSystem {
    /// A system with no constraints.
    pub fn unconstrained(hamiltonian: QuadraticObservable) -> Self {
        ConstrainedSystem {
            space: hamiltonian.space().clone(),
            hamiltonian,
            constraints: Vec::new(),
            multipliers: Vec::new(),
        }
    }

    pub fn constraint_observables(&self) -> Vec<&QuadraticObservable> {
        self.constraints.iter().map(|c| &c.observable).collect()
    }

    /// Matrix whose rows are the constraint linear parts.
    fn constraint_row_matrix(&self) -> Mat {
        constraint_rows(&self.constraints.iter().map(|c| c.observable.clone()).collect::<Vec<_>>())
    }

    /// Samples a point on the constraint surface: solves the affine
    /// constraint system and adds a random element of its null space.
    pub fn surface_point(&self, rng: &mut impl FnMut() -> Scalar) -> Vec<Scalar> {
        let d = self.space.dim();
        if self.constraints.is_empty() {
            return (0..d).map(|_| rng()).collect();
        }
        let a = self.constraint_row_matrix();
        let b: Vec<Scalar> = self
            .constraints
            .iter()
            .map(|c| -c.observable.constant_part())
            .collect();
        let particular = a.solve(&b).expect("constraint surface is nonempty");
        let mut point = particular;
        for v in a.null_space() {
            let t = rng();
            for (p, vi) in point.iter_mut().zip(&v) {
                *p += &(&t * vi);
            }
        }
        point
    }
}

fn constraint_rows(constraints: &[QuadraticObservable]) -> Mat {
    let d = constraints.first().map_or(0, |c| c.space().dim());
    Mat::from_fn(constraints.len(), d, |i, j| constraints[i].linear_part()[j].clone())
}

/// Reduces the linear part of `f` modulo the span of the constraints'
/// linear parts, using the canonical RREF of that span. The constant part
/// is only touched by the subtracted combinations' constants.
fn reduce_modulo(f: &QuadraticObservable, constraints: &[Constraint]) -> QuadraticObservable {
    if constraints.is_empty() {
        return f.clone();
    }
    let rows: Vec<QuadraticObservable> =
        constraints.iter().map(|c| c.observable.clone()).collect();
    let (rref, pivots) = constraint_rows(&rows).rref();
    // Re-express the RREF rows as observables so constants reduce coherently.
    // Each RREF row is a combination of the original constraints; solve for
    // the combination to carry the constant parts along.
    let span = constraint_rows(&rows).transpose();
    let mut result = f.clone();
    for (r, &c) in pivots.iter().enumerate() {
        let coeff = result.linear_part()[c].clone();
        if coeff.is_zero() {
            continue;
        }
        // RREF row r as an observable: solve span * x = rref_row.
        let row_vec: Vec<Scalar> = rref.row(r).to_vec();
        let combo = span.solve(&row_vec).expect("rref row lies in the span");
        let mut row_obs = QuadraticObservable::zero(f.space());
        for (k, x) in combo.iter().enumerate() {
            if !x.is_zero() {
                row_obs = row_obs.add(&rows[k].scale(x)).unwrap();
            }
        }
        result = result.sub(&row_obs.scale(&coeff)).unwrap();
    }
    result
}

/// One recorded event of the consistency analysis.
#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub examined: String,
    pub outcome: TraceOutcome,
}

#[derive(Clone, Debug, Serialize)]
pub enum TraceOutcome {
    /// Consistency produced a new, independent constraint.
    Cycle { new_constraint: String },
    /// Consistency fixed a multiplier relation.
    Stop1 { relation: String },
    /// Consistency reduced to 0 = 0 on the surface.
    Stop2Consistent,
    /// Consistency reduced to a nonzero constant: inconsistent dynamics.
    Stop2Contradiction { residual: String },
    /// A conjugate pair constrained to fixed values was removed.
    DiscardedPair { position: String, momentum: String },
    /// A dependent constraint was dropped on admission.
    DroppedDependent { constraint: String },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConsistencyTrace {
    pub steps: Vec<TraceStep>,
}

impl fmt::Display for ConsistencyTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            match &step.outcome {
                TraceOutcome::Cycle { new_constraint } => {
                    writeln!(f, "examine {}: cycle -> new constraint {}", step.examined, new_constraint)?
                }
                TraceOutcome::Stop1 { relation } => {
                    writeln!(f, "examine {}: stop 1 -> multiplier relation {}", step.examined, relation)?
                }
                TraceOutcome::Stop2Consistent => {
                    writeln!(f, "examine {}: stop 2 -> consistent (0 = 0)", step.examined)?
                }
                TraceOutcome::Stop2Contradiction { residual } => {
                    writeln!(f, "examine {}: stop 2 -> contradiction ({} = 0)", step.examined, residual)?
                }
                TraceOutcome::DiscardedPair { position, momentum } => {
                    writeln!(f, "discard fixed pair ({position}, {momentum})")?
                }
                TraceOutcome::DroppedDependent { constraint } => {
                    writeln!(f, "drop dependent constraint {constraint}")?
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq)]
struct MultiplierRelation {
    coeffs: Vec<Scalar>,
    residual: QuadraticObservable,
}

/// Runs Dirac's consistency algorithm: repeatedly demands that every
/// constraint be preserved by the total Hamiltonian `H + y_m phi_m` (sum
/// over primaries), adding new constraints and multiplier relations until
/// the set closes. Conjugate pairs pinned to fixed values by the closed set
/// are then discarded automatically.
pub fn run_consistency(
    hamiltonian: &QuadraticObservable,
    primaries: &[QuadraticObservable],
) -> Result<(ConstrainedSystem, ConsistencyTrace)> {
    let (mut system, mut trace) = run_consistency_no_discard(hamiltonian, primaries)?;
    discard_fixed_pairs(&mut system, &mut trace)?;
    Ok((system, trace))
}

/// The consistency loop alone, keeping every constraint and the full phase
/// space (no pair discarding). Useful for inspecting the raw closed chain.
pub fn run_consistency_no_discard(
    hamiltonian: &QuadraticObservable,
    primaries: &[QuadraticObservable],
) -> Result<(ConstrainedSystem, ConsistencyTrace)> {
    let space = hamiltonian.space().clone();
    let mut trace = ConsistencyTrace::default();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut primary_indices: Vec<usize> = Vec::new();

    for phi in primaries {
        if !phi.is_linear() {
            return Err(Error::UnsupportedDegree("constraints must be linear".into()));
        }
        if phi.space() != &space {
            return Err(Error::SpaceMismatch);
        }
        if is_dependent(phi, &constraints) {
            trace.steps.push(TraceStep {
                examined: phi.render(),
                outcome: TraceOutcome::DroppedDependent { constraint: phi.render() },
            });
            continue;
        }
        primary_indices.push(constraints.len());
        constraints.push(Constraint {
            observable: phi.clone(),
            name: format!("phi{}", constraints.len() + 1),
            primary: true,
        });
    }

    let mut relations: Vec<MultiplierRelation> = Vec::new();
    let mut last_outcome: Vec<Option<u8>> = vec![None; constraints.len()];

    loop {
        let mut changed = false;
        let mut j = 0;
        while j < constraints.len() {
            let phi = constraints[j].observable.clone();
            let bracket_h = poisson_bracket(&phi, hamiltonian)?;
            let coeffs: Vec<Scalar> = primary_indices
                .iter()
                .map(|&m| {
                    poisson_bracket(&phi, &constraints[m].observable)
                        .map(|b| b.constant_part().clone())
                })
                .collect::<Result<_>>()?;
            let residual = reduce_modulo(&bracket_h, &constraints);

            if coeffs.iter().all(Scalar::is_zero) {
                if residual.is_zero() {
                    if last_outcome[j] != Some(2) {
                        trace.steps.push(TraceStep {
                            examined: constraints[j].observable.render(),
                            outcome: TraceOutcome::Stop2Consistent,
                        });
                        last_outcome[j] = Some(2);
                    }
                } else if residual.is_constant() {
                    trace.steps.push(TraceStep {
                        examined: constraints[j].observable.render(),
                        outcome: TraceOutcome::Stop2Contradiction { residual: residual.render() },
                    });
                    return Err(Error::InconsistentDynamics(trace.to_string()));
                } else {
                    trace.steps.push(TraceStep {
                        examined: constraints[j].observable.render(),
                        outcome: TraceOutcome::Cycle { new_constraint: residual.render() },
                    });
                    last_outcome[j] = Some(0);
                    constraints.push(Constraint {
                        observable: residual,
                        name: format!("phi{}", constraints.len() + 1),
                        primary: false,
                    });
                    last_outcome.push(None);
                    changed = true;
                }
            } else {
                let rel = MultiplierRelation { coeffs, residual };
                if !relation_is_implied(&rel, &relations) {
                    trace.steps.push(TraceStep {
                        examined: constraints[j].observable.render(),
                        outcome: TraceOutcome::Stop1 {
                            relation: render_relation(&rel, &primary_indices, &constraints),
                        },
                    });
                    last_outcome[j] = Some(1);
                    relations.push(rel);
                    changed = true;
                }
            }
            j += 1;
        }
        if !changed {
            break;
        }
    }

    let multipliers = solve_multiplier_relations(&relations, &primary_indices, &constraints, &trace)?;

    let system = ConstrainedSystem {
        space,
        hamiltonian: hamiltonian.clone(),
        constraints,
        multipliers,
    };
    Ok((system, trace))
}

fn is_dependent(phi: &QuadraticObservable, constraints: &[Constraint]) -> bool {
    if phi.linear_part().iter().all(Scalar::is_zero) {
        return true;
    }
    if constraints.is_empty() {
        return false;
    }
    let rows: Vec<QuadraticObservable> =
        constraints.iter().map(|c| c.observable.clone()).collect();
    let a = constraint_rows(&rows);
    let mut with = a.clone();
    let extra = Mat::from_fn(1, phi.linear_part().len(), |_, j| phi.linear_part()[j].clone());
    with = Mat::from_fn(a.nrows() + 1, a.ncols(), |i, j| {
        if i < a.nrows() { with[(i, j)].clone() } else { extra[(0, j)].clone() }
    });
    with.rank() == a.rank()
}

fn relation_is_implied(rel: &MultiplierRelation, existing: &[MultiplierRelation]) -> bool {
    // Stack each relation as a row (coeffs | residual linear | residual const)
    // and compare ranks.
    if existing.is_empty() {
        return false;
    }
    let row = |r: &MultiplierRelation| -> Vec<Scalar> {
        let mut v = r.coeffs.clone();
        v.extend(r.residual.linear_part().iter().cloned());
        v.push(r.residual.constant_part().clone());
        v
    };
    let base = Mat::from_rows(existing.iter().map(row).collect());
    let all = Mat::from_rows(existing.iter().chain([rel]).map(row).collect());
    all.rank() == base.rank()
}

fn render_relation(
    rel: &MultiplierRelation,
    primary_indices: &[usize],
    constraints: &[Constraint],
) -> String {
    let mut terms = Vec::new();
    for (slot, &idx) in primary_indices.iter().enumerate() {
        if !rel.coeffs[slot].is_zero() {
            terms.push(format!("{} y[{}]", rel.coeffs[slot], constraints[idx].name));
        }
    }
    if !rel.residual.is_zero() {
        terms.push(rel.residual.render());
    }
    format!("{} ~ 0", terms.join(" + "))
}

fn solve_multiplier_relations(
    relations: &[MultiplierRelation],
    primary_indices: &[usize],
    constraints: &[Constraint],
    trace: &ConsistencyTrace,
) -> Result<Vec<MultiplierRecord>> {
    let n = primary_indices.len();
    let mut statuses = vec![MultiplierStatus::Free; n];
    if !relations.is_empty() && n > 0 {
        // Gaussian elimination on the coefficient rows, carrying the
        // observable-valued right-hand sides along.
        let mut rows: Vec<(Vec<Scalar>, QuadraticObservable)> = relations
            .iter()
            .map(|r| (r.coeffs.clone(), r.residual.scale(&-Scalar::one())))
            .collect();
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
        let mut next_row = 0;
        for col in 0..n {
            let Some(pr) = (next_row..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
                continue;
            };
            rows.swap(next_row, pr);
            let inv = rows[next_row].0[col].recip();
            for c in rows[next_row].0.iter_mut() {
                *c *= &inv;
            }
            rows[next_row].1 = rows[next_row].1.scale(&inv);
            for i in 0..rows.len() {
                if i != next_row && !rows[i].0[col].is_zero() {
                    let f = rows[i].0[col].clone();
                    for c in 0..n {
                        let sub = &f * &rows[next_row].0[c];
                        rows[i].0[c] = &rows[i].0[c] - &sub;
                    }
                    let sub = rows[next_row].1.scale(&f);
                    rows[i].1 = rows[i].1.sub(&sub).unwrap();
                }
            }
            pivot_of_col[col] = Some(next_row);
            next_row += 1;
        }
        // Rows with zero coefficients but nonzero RHS are contradictions.
        for (coeffs, rhs) in &rows {
            if coeffs.iter().all(Scalar::is_zero) && !rhs.is_zero() {
                return Err(Error::InconsistentDynamics(trace.to_string()));
            }
        }
        for col in 0..n {
            if let Some(r) = pivot_of_col[col] {
                // Only a clean solve (no other multipliers in the row) gives a
                // closed-form status; mixed rows leave the rest free.
                let clean = rows[r].0.iter().enumerate().all(|(c, v)| c == col || v.is_zero());
                if clean {
                    statuses[col] = if rows[r].1.is_zero() {
                        MultiplierStatus::ForcedZero
                    } else {
                        MultiplierStatus::Fixed(rows[r].1.render())
                    };
                }
            }
        }
    }
    Ok(primary_indices
        .iter()
        .zip(statuses)
        .enumerate()
        .map(|(k, (&idx, status))| MultiplierRecord {
            name: format!("y{}", k + 1),
            constraint: constraints[idx].observable.render(),
            status,
        })
        .collect())
}

/// Removes conjugate pairs whose two coordinates are both pinned to fixed
/// values by the constraint set; they carry no physical information.
fn discard_fixed_pairs(system: &mut ConstrainedSystem, trace: &mut ConsistencyTrace) -> Result<()> {
    'outer: loop {
        if system.constraints.is_empty() || system.space.n_pairs() == 1 {
            return Ok(());
        }
        let rows = system.constraint_row_matrix();
        let rank = rows.rank();
        let d = system.space.dim();
        for pair in 0..system.space.n_pairs() {
            let qi = system.space.q(pair);
            let pi = system.space.p(pair);
            let pinned = |idx: usize| -> Option<Scalar> {
                let mut unit = vec![Scalar::zero(); d];
                unit[idx] = Scalar::one();
                // coordinate is pinned iff e_idx lies in the constraint span
                let combo = rows.transpose().solve(&unit)?;
                // value: e_idx = sum c_j phi_j,lin; on the surface
                // z_idx = -sum c_j const_j.
                let val = system
                    .constraints
                    .iter()
                    .zip(&combo)
                    .map(|(c, x)| x * c.observable.constant_part())
                    .sum::<Scalar>();
                Some(-val)
            };
            let (Some(qv), Some(pv)) = (pinned(qi), pinned(pi)) else { continue };
            let _ = rank;
            // Build the insertion map: new coordinates -> old, with the pair
            // held at its pinned values.
            let new_space = system.space.drop_pair(pair);
            let keep: Vec<usize> =
                (0..d).filter(|&a| a != qi && a != pi).collect();
            let m = Mat::from_fn(d, new_space.dim(), |i, j| {
                if keep[j] == i { Scalar::one() } else { Scalar::zero() }
            });
            let mut offset = vec![Scalar::zero(); d];
            offset[qi] = qv;
            offset[pi] = pv;
            let substitute =
                |f: &QuadraticObservable| f.substitute_affine(&m, &offset, &new_space);

            let hamiltonian = substitute(&system.hamiltonian)?;
            let mut new_constraints: Vec<Constraint> = Vec::new();
            for c in &system.constraints {
                let obs = substitute(&c.observable)?;
                if obs.is_zero() {
                    continue;
                }
                if !is_dependent(&obs, &new_constraints) {
                    new_constraints.push(Constraint {
                        observable: obs,
                        name: format!("phi{}", new_constraints.len() + 1),
                        primary: c.primary,
                    });
                }
            }
            trace.steps.push(TraceStep {
                examined: String::new(),
                outcome: TraceOutcome::DiscardedPair {
                    position: system.space.label(qi).to_string(),
                    momentum: system.space.label(pi).to_string(),
                },
            });
            system.space = new_space;
            system.hamiltonian = hamiltonian;
            system.constraints = new_constraints;
            continue 'outer;
        }
        return Ok(());
    }
}

/// First/second-class split of a closed constraint set.
#[derive(Clone, Debug)]
pub struct Classification {
    /// Matrix of constraint brackets.
    pub delta: Mat,
    /// Coefficient vectors of first-class combinations (null space of delta).
    pub first_class: Vec<Vec<Scalar>>,
    /// Coefficient vectors of second-class representatives.
    pub second_class: Vec<Vec<Scalar>>,
    /// The invertible bracket block on the second-class representatives.
    pub c_matrix: Mat,
    pub c_inverse: Mat,
    /// Second-class representatives as observables (in order).
    pub second_class_observables: Vec<QuadraticObservable>,
    /// First-class combinations as observables.
    pub first_class_observables: Vec<QuadraticObservable>,
}

impl Classification {
    pub fn empty() -> Self {
        Classification {
            delta: Mat::zeros(0, 0),
            first_class: Vec::new(),
            second_class: Vec::new(),
            c_matrix: Mat::zeros(0, 0),
            c_inverse: Mat::zeros(0, 0),
            second_class_observables: Vec::new(),
            first_class_observables: Vec::new(),
        }
    }
}

/// Splits the constraints into first- and second-class parts via the exact
/// null space of the bracket matrix. The null-space basis is the canonical
/// RREF basis and the second-class representatives are the original
/// constraints on the pivot indices, which makes the split deterministic.
pub fn classify(system: &ConstrainedSystem) -> Result<Classification> {
    let obs = system.constraint_observables();
    let j = obs.len();
    if j == 0 {
        return Ok(Classification::empty());
    }
    let mut delta = Mat::zeros(j, j);
    for a in 0..j {
        for b in 0..j {
            delta[(a, b)] = poisson_bracket(obs[a], obs[b])?.constant_part().clone();
        }
    }
    let first_class = delta.null_space();
    let (_, pivots) = delta.rref();
    let second_class: Vec<Vec<Scalar>> = pivots
        .iter()
        .map(|&p| {
            let mut v = vec![Scalar::zero(); j];
            v[p] = Scalar::one();
            v
        })
        .collect();
    let c_matrix = delta.submatrix(&pivots, &pivots);
    let c_inverse = c_matrix.inverse().map_err(|_| Error::SingularC)?;
    let combine = |coeffs: &Vec<Scalar>| {
        let mut out = QuadraticObservable::zero(&system.space);
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&obs[k].scale(c)).unwrap();
            }
        }
        out
    };
    let second_class_observables = second_class.iter().map(combine).collect();
    let first_class_observables = first_class.iter().map(combine).collect();
    Ok(Classification {
        delta,
        first_class,
        second_class,
        c_matrix,
        c_inverse,
        second_class_observables,
        first_class_observables,
    })
}

/// The Dirac bracket `{f, g} = [f, g] - [f, Phi_a] C^{ab} [Phi_b, g]`.
pub fn dirac_bracket(
    f: &QuadraticObservable,
    g: &QuadraticObservable,
    cls: &Classification,
) -> Result<QuadraticObservable> {
    let mut result = poisson_bracket(f, g)?;
    let phis = &cls.second_class_observables;
    if phis.is_empty() {
        return Ok(result);
    }
    let f_brackets: Vec<QuadraticObservable> =
        phis.iter().map(|phi| poisson_bracket(f, phi)).collect::<Result<_>>()?;
    let g_brackets: Vec<QuadraticObservable> =
        phis.iter().map(|phi| poisson_bracket(phi, g)).collect::<Result<_>>()?;
    for a in 0..phis.len() {
        for b in 0..phis.len() {
            let c_ab = &cls.c_inverse[(a, b)];
            if c_ab.is_zero() {
                continue;
            }
            let term = f_brackets[a].mul(&g_brackets[b])?.scale(c_ab);
            result = result.sub(&term)?;
        }
    }
    Ok(result)
}

/// Gauge transformation `f -> f + eps {f, gamma}` generated by a first-class
/// combination. Second-class generators are rejected: they move states off
/// the constraint surface.
pub fn gauge_transform(
    f: &QuadraticObservable,
    gamma: &QuadraticObservable,
    eps: &Scalar,
    system: &ConstrainedSystem,
    cls: &Classification,
) -> Result<QuadraticObservable> {
    // gamma must be a combination of the constraints...
    let rows = constraint_rows(
        &system.constraints.iter().map(|c| c.observable.clone()).collect::<Vec<_>>(),
    );
    let combo = rows
        .transpose()
        .solve(gamma.linear_part())
        .ok_or_else(|| Error::NotFirstClass("not a combination of the constraints".into()))?;
    // ... lying in the null space of delta.
    let image = cls.delta.mul_vec(&combo);
    if image.iter().any(|x| !x.is_zero()) {
        return Err(Error::NotFirstClass(
            "bracket with another constraint does not vanish weakly".into(),
        ));
    }
    let shift = poisson_bracket(f, gamma)?.scale(eps);
    f.add(&shift)
}

/// A linear (affine) vector field `z_dot = A z + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearVectorField {
    pub matrix: Mat,
    pub offset: Vec<Scalar>,
}

/// Equations of motion `z_dot = Omega grad H_T` for the total Hamiltonian
/// with all multipliers resolved. Values for still-free multipliers must be
/// supplied by the caller; the standard sign `p_dot = -dH/dq` is built into
/// the coordinate ordering.
pub fn equations_of_motion(
    system: &ConstrainedSystem,
    free_values: &[(&str, Scalar)],
) -> Result<LinearVectorField> {
    let mut h_total = system.hamiltonian.clone();
    let mut missing = Vec::new();
    let primaries: Vec<&Constraint> = system.constraints.iter().filter(|c| c.primary).collect();
    for (record, constraint) in system.multipliers.iter().zip(&primaries) {
        let value = match &record.status {
            MultiplierStatus::ForcedZero => Scalar::zero(),
            MultiplierStatus::Fixed(expr) => Scalar::parse(expr)
                .map_err(|_| Error::FreeMultipliers(vec![format!("{} = {}", record.name, expr)]))?,
            MultiplierStatus::Free => {
                match free_values.iter().find(|(n, _)| *n == record.name) {
                    Some((_, v)) => v.clone(),
                    None => {
                        missing.push(record.name.clone());
                        continue;
                    }
                }
            }
        };
        h_total = h_total.add(&constraint.observable.scale(&value))?;
    }
    if !missing.is_empty() {
        return Err(Error::FreeMultipliers(missing));
    }
    let omega = system.space.omega();
    Ok(LinearVectorField {
        matrix: &omega * h_total.quadratic_part(),
        offset: omega.mul_vec(h_total.linear_part()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn free_particle_has_empty_trace() {
        let s = PhaseSpace::new(1);
        let p = QuadraticObservable::momentum(&s, 0);
        let h = p.mul(&p).unwrap().scale(&Scalar::ratio(1, 2));
        let (system, trace) = run_consistency(&h, &[]).unwrap();
        assert!(system.constraints.is_empty());
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn contradiction_is_detected() {
        // H = p with constraint q: {q, p} = 1 with no free multiplier to
        // absorb it, and [q, H] = 1 is a nonzero constant.
        let s = PhaseSpace::new(1);
        let h = QuadraticObservable::momentum(&s, 0);
        let q = QuadraticObservable::position(&s, 0);
        let err = run_consistency(&h, &[q]).unwrap_err();
        assert!(matches!(err, Error::InconsistentDynamics(_)));
    }

    #[test]
    fn single_first_class_constraint() {
        // H = p^2/2 on one pair with constraint gamma = q... that system is
        // contradictory; use a 2-pair system with gamma = q1 and H = p2^2/2,
        // which commutes with gamma.
        let s = PhaseSpace::new(2);
        let p2 = QuadraticObservable::momentum(&s, 1);
        let h = p2.mul(&p2).unwrap().scale(&Scalar::ratio(1, 2));
        let q1 = QuadraticObservable::position(&s, 0);
        let (system, _) = run_consistency(&h, &[q1]).unwrap();
        let cls = classify(&system).unwrap();
        assert_eq!(cls.first_class.len(), 1);
        assert!(cls.second_class.is_empty());
        assert_eq!(cls.delta, Mat::zeros(1, 1));
    }

    #[test]
    fn dirac_bracket_without_second_class_is_poisson() {
        let s = PhaseSpace::new(2);
        let f = QuadraticObservable::position(&s, 0)
            .mul(&QuadraticObservable::momentum(&s, 1))
            .unwrap();
        let g = QuadraticObservable::momentum(&s, 0);
        let cls = Classification::empty();
        let db = dirac_bracket(&f, &g, &cls).unwrap();
        let pb = poisson_bracket(&f, &g).unwrap();
        assert!(db.sub(&pb).unwrap().is_zero());
    }

    #[test]
    fn free_multipliers_must_be_supplied() {
        // First-class primary q1 with H = p2^2/2: its multiplier stays free.
        let s = PhaseSpace::new(2);
        let p2 = QuadraticObservable::momentum(&s, 1);
        let h = p2.mul(&p2).unwrap().scale(&Scalar::ratio(1, 2));
        let q1 = QuadraticObservable::position(&s, 0);
        let (system, _) = run_consistency(&h, &[q1]).unwrap();
        assert!(matches!(system.multipliers[0].status, MultiplierStatus::Free));
        let err = equations_of_motion(&system, &[]).unwrap_err();
        assert!(matches!(err, Error::FreeMultipliers(ref names) if names == &vec!["y1".to_string()]));
        // Supplying a value yields the gauge-shifted field: p1_dot = -y.
        let field = equations_of_motion(&system, &[("y1", Scalar::from_int(5))]).unwrap();
        assert_eq!(field.offset[s.p(0)], Scalar::from_int(-5));
    }

    #[test]
    fn eom_signs() {
        // H = p^2/(2m): q_dot = p/m, p_dot = 0.
        let s = PhaseSpace::new(1);
        let p = QuadraticObservable::momentum(&s, 0);
        let h = p.mul(&p).unwrap().scale(&Scalar::ratio(1, 4)); // m = 2
        let system = ConstrainedSystem::unconstrained(h);
        let field = equations_of_motion(&system, &[]).unwrap();
        assert_eq!(field.matrix[(0, 1)], Scalar::ratio(1, 2));
        assert_eq!(field.matrix[(1, 0)], int(0));
        assert!(field.offset.iter().all(Scalar::is_zero));
        // And with V = q^2/2 the momentum row picks up the minus sign.
        let q = QuadraticObservable::position(&s, 0);
        let h2 = q.mul(&q).unwrap().scale(&Scalar::ratio(1, 2));
        let sys2 = ConstrainedSystem::unconstrained(h2);
        let f2 = equations_of_motion(&sys2, &[]).unwrap();
        assert_eq!(f2.matrix[(1, 0)], int(-1));
    }
}
