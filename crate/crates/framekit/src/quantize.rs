//! Quantum symmetry reduction at the quadrature level.
//!
//! Unitaries are represented by their symplectic action on quadratures
//! (global phases are out of scope). A trivialization map conjugates one
//! constraint so it acts on a single coordinate; imposing it together with
//! its gauge condition then removes a conjugate pair. Two stages take the
//! extended space down to a perspective-dependent description, and frame
//! changes are compositions of an inverse reduction with a reduction.

use std::sync::Arc;

use crate::abelian::ExtendedSystem;
use crate::error::{Error, Result};
use crate::floatmat::FMat;
use crate::frames::{non_anchor, Frame, FrameKind};
use crate::matrix::Mat;
use crate::model::RelativeModel;
use crate::observable::QuadraticObservable;
use crate::phase_space::PhaseSpace;
use crate::scalar::Scalar;
use crate::symplectic::{linear_flow, substitute, SymplecticMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum TrivializationKind {
    /// `T_p`: rotates the converted momentum constraint onto the added `p`.
    TP,
    /// `T_q`: rotates the converted position constraint onto the added `q`.
    TQ,
    /// `T_qi`: rotates the remaining position constraint onto `q_i`.
    TQi,
    /// `T_pi`: rotates the remaining momentum constraint onto `p_i`.
    TPi,
}

/// A trivialization unitary, stored as its exact symplectic point map. The
/// conjugation action on observables is the pullback `A -> A ∘ map`, and
/// `map = flow ∘ parity` (the parity factor is the leftmost operator
/// factor, with slot relabeling included).
#[derive(Clone, Debug)]
pub struct TrivializationMap {
    pub kind: TrivializationKind,
    pub anchor: Option<usize>,
    pub generator: QuadraticObservable,
    pub map: SymplecticMap,
    pub parity: Option<SymplecticMap>,
}

impl TrivializationMap {
    /// Conjugation action on observables.
    pub fn conjugate(&self, f: &QuadraticObservable) -> Result<QuadraticObservable> {
        substitute(f, &self.map)
    }
}

/// The anchor-indexed 90-degree rotation aligning reduced slots with the
/// frame labels: a signed permutation of the two non-anchor pairs, acting
/// identically on positions and momenta.
fn alignment_rotation(space: &Arc<PhaseSpace>, anchor: usize) -> Result<SymplecticMap> {
    let [j1, j2] = non_anchor(anchor);
    let d = space.dim();
    let mut m = Mat::zeros(d, d);
    // Unmoved pair: the anchor.
    m[(space.q(anchor), space.q(anchor))] = Scalar::one();
    m[(space.p(anchor), space.p(anchor))] = Scalar::one();
    // (S^-1 z)_{q_j} = eps_j z_{q_l}: build S^-1 rows from the frame sign
    // pattern, then invert. eps_j = +1 iff (anchor, l, j) cyclic.
    let mut inv = Mat::zeros(d, d);
    inv[(space.q(anchor), space.q(anchor))] = Scalar::one();
    inv[(space.p(anchor), space.p(anchor))] = Scalar::one();
    for (j, l) in [(j1, j2), (j2, j1)] {
        let eps = if (anchor + 1) % 3 == l && (anchor + 2) % 3 == j {
            Scalar::one()
        } else {
            -Scalar::one()
        };
        inv[(space.q(j), space.q(l))] = eps.clone();
        inv[(space.p(j), space.p(l))] = eps.clone();
        // Inverse of a signed permutation: transpose.
        m[(space.q(l), space.q(j))] = eps.clone();
        m[(space.p(l), space.p(j))] = eps;
    }
    SymplecticMap::new(space.clone(), m, vec![Scalar::zero(); d])
}

/// Builds a trivialization map. `TP`/`TQ` live on the extended space;
/// `TQi`/`TPi` live on the 6-dimensional intermediate space and need an
/// anchor.
pub fn trivialization(
    ext: &ExtendedSystem,
    kind: TrivializationKind,
    anchor: Option<usize>,
) -> Result<TrivializationMap> {
    let model = &ext.model;
    let config = &model.config;
    match kind {
        TrivializationKind::TP => {
            // generator q Phi2 / mu, flow parameter -1.
            let space = &ext.space;
            let q = QuadraticObservable::position(space, 3);
            let phi2 = lift_constraint(ext, model.phi2())?;
            let generator = q.mul(&phi2)?.scale(&config.mu().recip());
            let map = linear_flow(&generator, &(-Scalar::one()))?;
            Ok(TrivializationMap { kind, anchor: None, generator, map, parity: None })
        }
        TrivializationKind::TQ => {
            let space = &ext.space;
            let p = QuadraticObservable::momentum(space, 3);
            let phi1 = lift_constraint(ext, model.phi1())?;
            let generator = p.mul(&phi1)?;
            let map = linear_flow(&generator, &(-Scalar::one()))?;
            Ok(TrivializationMap { kind, anchor: None, generator, map, parity: None })
        }
        TrivializationKind::TQi => {
            let a = anchor.ok_or_else(|| Error::Domain("TQi needs an anchor".into()))?;
            let space = model.space();
            let pa = QuadraticObservable::momentum(space, a);
            let mut sum = QuadraticObservable::zero(space);
            for j in 0..3 {
                if j != a {
                    sum = sum.add(&QuadraticObservable::position(space, j))?;
                }
            }
            let generator = pa.mul(&sum)?;
            let flow = linear_flow(&generator, &(-Scalar::one()))?;
            let parity = alignment_rotation(space, a)?;
            let map = flow.compose(&parity)?;
            Ok(TrivializationMap { kind, anchor: Some(a), generator, map, parity: Some(parity) })
        }
        TrivializationKind::TPi => {
            let a = anchor.ok_or_else(|| Error::Domain("TPi needs an anchor".into()))?;
            let space = model.space();
            let qa = QuadraticObservable::position(space, a);
            let mut sum = QuadraticObservable::zero(space);
            for j in 0..3 {
                if j != a {
                    let pj = QuadraticObservable::momentum(space, j)
                        .scale(&config.reduced_mass(j).recip());
                    sum = sum.add(&pj)?;
                }
            }
            // This unitary's defining exponent carries the opposite sign,
            // so its flow runs at +1.
            let generator = qa.mul(&sum)?.scale(config.reduced_mass(a));
            let flow = linear_flow(&generator, &Scalar::one())?;
            let parity = alignment_rotation(space, a)?;
            let map = flow.compose(&parity)?;
            Ok(TrivializationMap { kind, anchor: Some(a), generator, map, parity: Some(parity) })
        }
    }
}

/// Lifts an original-space constraint to the extended space.
fn lift_constraint(
    ext: &ExtendedSystem,
    phi: &QuadraticObservable,
) -> Result<QuadraticObservable> {
    let original = ext.model.space();
    let space = &ext.space;
    let mut m = Mat::zeros(original.dim(), space.dim());
    for i in 0..3 {
        m[(original.q(i), space.q(i))] = Scalar::one();
        m[(original.p(i), space.p(i))] = Scalar::one();
    }
    phi.substitute_affine(&m, &vec![Scalar::zero(); original.dim()], space)
}

/// One stage of the symmetry reduction: conjugate by the trivialization,
/// then eliminate the conjugate pair carrying the trivialized constraint
/// and its gauge condition.
#[derive(Clone, Debug)]
pub struct ReductionStage {
    pub trivialization: TrivializationMap,
    /// Pair index (in the stage's input space) to eliminate.
    pub drop_pair: usize,
}

/// The state of the system along a reduction path.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub space: Arc<PhaseSpace>,
    pub constraints: Vec<QuadraticObservable>,
    pub observables_q: Vec<QuadraticObservable>,
    pub observables_p: Vec<QuadraticObservable>,
    /// Fully expanded Hamiltonian (multiplier addends dropped on
    /// elimination of their constraints).
    pub hamiltonian: QuadraticObservable,
    pub multiplier_terms: Vec<(String, QuadraticObservable)>,
}

/// Conjugates constraints, observables and Hamiltonian by each stage's map
/// and deletes the pair where the trivialized constraint and its gauge
/// condition live. Two stages take dim 8 -> 6 -> 4.
pub fn symmetry_reduce(ext: &ExtendedSystem, path: &[ReductionStage]) -> Result<ReducedSystem> {
    let mut state = ReducedSystem {
        space: ext.space.clone(),
        constraints: ext.constraints.to_vec(),
        observables_q: ext.observables_q.clone(),
        observables_p: ext.observables_p.clone(),
        hamiltonian: ext.hamiltonian.clone(),
        multiplier_terms: ext.multiplier_terms.clone(),
    };
    for stage in path {
        state = reduce_stage(&state, stage)?;
    }
    Ok(state)
}

fn reduce_stage(state: &ReducedSystem, stage: &ReductionStage) -> Result<ReducedSystem> {
    let map = &stage.trivialization.map;
    if map.space() != &state.space {
        return Err(Error::SpaceMismatch);
    }
    let conj = |f: &QuadraticObservable| substitute(f, map);
    let constraints: Vec<_> = state.constraints.iter().map(conj).collect::<Result<_>>()?;
    let observables_q: Vec<_> = state.observables_q.iter().map(conj).collect::<Result<_>>()?;
    let observables_p: Vec<_> = state.observables_p.iter().map(conj).collect::<Result<_>>()?;
    let hamiltonian = conj(&state.hamiltonian)?;
    let multiplier_terms: Vec<_> = state
        .multiplier_terms
        .iter()
        .map(|(name, obs)| Ok((name.clone(), conj(obs)?)))
        .collect::<Result<_>>()?;

    // Locate the constraint now supported on a single coordinate of the
    // pair being dropped.
    let space = &state.space;
    let qk = space.q(stage.drop_pair);
    let pk = space.p(stage.drop_pair);
    let mut eliminated = None;
    for (idx, c) in constraints.iter().enumerate() {
        let support: Vec<usize> = c
            .linear_part()
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, _)| i)
            .collect();
        if support.len() == 1 && (support[0] == qk || support[0] == pk) {
            eliminated = Some(idx);
            break;
        }
    }
    let Some(eliminated) = eliminated else {
        return Err(Error::Reduction(format!(
            "no constraint is supported on pair {} after trivialization",
            stage.drop_pair + 1
        )));
    };

    // Insertion map holding the pair at (0, 0): constraint value and gauge
    // condition.
    let new_space = space.drop_pair(stage.drop_pair);
    let keep: Vec<usize> = (0..space.dim()).filter(|&a| a != qk && a != pk).collect();
    let ins = Mat::from_fn(space.dim(), new_space.dim(), |i, j| {
        if keep[j] == i { Scalar::one() } else { Scalar::zero() }
    });
    let zeros = vec![Scalar::zero(); space.dim()];
    let pull = |f: &QuadraticObservable| f.substitute_affine(&ins, &zeros, &new_space);

    let mut new_constraints = Vec::new();
    for (idx, c) in constraints.iter().enumerate() {
        if idx == eliminated {
            continue;
        }
        new_constraints.push(pull(c)?);
    }
    let new_multipliers: Vec<_> = multiplier_terms
        .iter()
        .filter_map(|(name, obs)| match pull(obs) {
            Ok(p) if p.is_zero() => None,
            Ok(p) => Some(Ok((name.clone(), p))),
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_>>()?;
    Ok(ReducedSystem {
        space: new_space.clone(),
        constraints: new_constraints,
        observables_q: observables_q.iter().map(&pull).collect::<Result<_>>()?,
        observables_p: observables_p.iter().map(&pull).collect::<Result<_>>()?,
        hamiltonian: pull(&hamiltonian)?,
        multiplier_terms: new_multipliers,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionRoute {
    /// `T_p` then `T_qi`: ends on the relative position frame.
    Position,
    /// `T_q` then `T_pi`: ends on the relative momentum frame.
    Momentum,
}

impl ReductionRoute {
    pub fn for_kind(kind: FrameKind) -> Result<Self> {
        match kind {
            FrameKind::RelativePosition => Ok(ReductionRoute::Position),
            FrameKind::RelativeMomentum => Ok(ReductionRoute::Momentum),
            FrameKind::Custom => Err(Error::Domain("no reduction route for custom frames".into())),
        }
    }
}

/// The standard two-stage path for a route and anchor.
pub fn standard_path(
    ext: &ExtendedSystem,
    route: ReductionRoute,
    anchor: usize,
) -> Result<Vec<ReductionStage>> {
    let (first, second) = match route {
        ReductionRoute::Position => (TrivializationKind::TP, TrivializationKind::TQi),
        ReductionRoute::Momentum => (TrivializationKind::TQ, TrivializationKind::TPi),
    };
    Ok(vec![
        ReductionStage { trivialization: trivialization(ext, first, None)?, drop_pair: 3 },
        ReductionStage {
            trivialization: trivialization(ext, second, Some(anchor))?,
            drop_pair: anchor,
        },
    ])
}

/// Matrices of the reduction (`W`, rows are the gauge-invariant reduced
/// coordinate functions) and its section (`J`, the gauge-fixed embedding)
/// for one stage.
fn stage_matrices(stage: &ReductionStage) -> (Mat, Mat) {
    let space = stage.trivialization.map.space();
    let d = space.dim();
    let qk = space.q(stage.drop_pair);
    let pk = space.p(stage.drop_pair);
    let keep: Vec<usize> = (0..d).filter(|&a| a != qk && a != pk).collect();
    let sel = Mat::from_fn(d - 2, d, |i, j| {
        if keep[i] == j { Scalar::one() } else { Scalar::zero() }
    });
    let ins = sel.transpose();
    let s = stage.trivialization.map.matrix();
    let s_inv = stage.trivialization.map.inverse();
    let w = &sel * s_inv.matrix();
    let j = s * &ins;
    (w, j)
}

/// Frame change through the perspective-neutral structure: embed the source
/// description back into the extended space along its reduction path, then
/// reduce along the target path. The result expresses frame-`a` coordinates
/// in terms of frame-`b` coordinates, exactly like
/// [`crate::frames::frame_transformation`].
pub fn frame_change_via_neutral(
    ext: &ExtendedSystem,
    a: (FrameKind, usize),
    b: (FrameKind, usize),
) -> Result<Mat> {
    let path_a = standard_path(ext, ReductionRoute::for_kind(a.0)?, a.1)?;
    let path_b = standard_path(ext, ReductionRoute::for_kind(b.0)?, b.1)?;
    // J_b: 4 -> 8 through the b-sections; W_a: 8 -> 4 through the a-route.
    let (_, j1) = stage_matrices(&path_b[0]);
    let (_, j2) = stage_matrices(&path_b[1]);
    let embed = &j1 * &j2;
    let (w1, _) = stage_matrices(&path_a[0]);
    let (w2, _) = stage_matrices(&path_a[1]);
    let reduce = &w2 * &w1;
    Ok(&reduce * &embed)
}

/// Result of factoring a symplectic matrix as `parity * exp(t * Omega Q)`.
#[derive(Clone, Debug)]
pub struct GeneratorFactorization {
    /// Normalized quadratic generator (largest Hamiltonian-matrix entry 1).
    pub generator: QuadraticObservable,
    /// Signed flow parameter; the direction convention is that the map
    /// pulls target-frame coordinates back to source-frame ones.
    pub t: f64,
    /// Signed-permutation factor (leftmost operator factor), if any.
    pub parity: Option<Mat>,
    /// Exact covectors invariant under the map (eigenvalue-1 directions of
    /// the transpose).
    pub invariants: Vec<Vec<Scalar>>,
    /// The matrix logarithm of the parity-free part.
    pub log_matrix: FMat,
}

/// Recovers a generator and flow parameter for a symplectic target map,
/// factoring out a signed-permutation parity part when the map has no real
/// logarithm. Verified by re-exponentiation to 1e-9.
pub fn find_generator(
    space: &Arc<PhaseSpace>,
    target: &Mat,
) -> Result<GeneratorFactorization> {
    let d = space.dim();
    if target.nrows() != d || target.ncols() != d {
        return Err(Error::Dimension("target does not match space".into()));
    }
    let check = crate::symplectic::is_symplectic(target)?;
    if let Some((row, col, value)) = check.witness {
        return Err(Error::NotSymplectic { row, col, value: value.to_string() });
    }
    // Invariant covectors: null space of (M^T - I).
    let invariants = (&target.transpose() - &Mat::identity(d)).null_space();

    for parity in parity_candidates(space) {
        let residual = &parity.inverse().expect("signed permutations invert") * target;
        let Some(log) = real_log(&residual) else { continue };
        // The log of a symplectic matrix must be Hamiltonian (-Omega K
        // symmetric); a failed iteration shows up here.
        let omega = FMat::omega(d / 2);
        let q_float = (&-&omega * &log).scale(1.0);
        let sym_defect = q_float.max_abs_diff(&q_float.transpose());
        if sym_defect > 1e-9 {
            continue;
        }
        let t_mag = log.max_abs();
        if t_mag < 1e-12 {
            let parity_out = if parity == Mat::identity(d) { None } else { Some(parity) };
            return Ok(GeneratorFactorization {
                generator: QuadraticObservable::zero(space),
                t: 0.0,
                parity: parity_out,
                invariants,
                log_matrix: log,
            });
        }
        // Normalize: t is the entry of largest magnitude, so K/t has a unit
        // entry and (for this pipeline's maps) rational structure.
        let mut t = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if log[(i, j)].abs() > t.abs() {
                    t = log[(i, j)];
                }
            }
        }
        let Some(k0) = rationalize(&log.scale(1.0 / t)) else { continue };
        let q_exact = &-&Mat::omega(d / 2) * &k0;
        if !q_exact.is_symmetric() {
            continue;
        }
        let generator = QuadraticObservable::quadratic_form(space, q_exact);
        // Re-exponentiation check.
        let k_float = k0.to_f64().scale(t);
        let rebuilt = &parity.to_f64() * &k_float.expm();
        if rebuilt.max_abs_diff(&target.to_f64()) > 1e-9 {
            continue;
        }
        let parity_out = if parity == Mat::identity(d) { None } else { Some(parity) };
        return Ok(GeneratorFactorization {
            generator,
            t,
            parity: parity_out,
            invariants,
            log_matrix: log,
        });
    }
    Err(Error::Representation(spectrum_info(target)))
}

/// Principal real logarithm: exact series when the matrix is unipotent,
/// inverse scaling-and-squaring otherwise.
fn real_log(m: &Mat) -> Option<FMat> {
    let d = m.nrows();
    let n = m - &Mat::identity(d);
    // Unipotent: log(I + N) = N - N^2/2 + ... terminates.
    let mut power = n.clone();
    let mut nilpotent_at = None;
    for k in 1..=d {
        if power.is_zero() {
            nilpotent_at = Some(k);
            break;
        }
        power = &power * &n;
    }
    if nilpotent_at.is_some() {
        let mut sum = Mat::zeros(d, d);
        let mut power = Mat::identity(d);
        for k in 1..=d {
            power = &power * &n;
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { Scalar::one() } else { -Scalar::one() };
            sum = &sum + &power.scale(&(sign * Scalar::ratio(1, k as i64)));
        }
        return Some(sum.to_f64());
    }
    m.to_f64().logm()
}

/// All symplectic signed pair-permutations of the space: permute conjugate
/// pairs and flip the sign of both members of a pair. Identity first, so
/// parity-free factorizations are preferred.
fn parity_candidates(space: &Arc<PhaseSpace>) -> Vec<Mat> {
    let n = space.n_pairs();
    let d = space.dim();
    let mut perms: Vec<Vec<usize>> = Vec::new();
    permutations(n, &mut (0..n).collect::<Vec<_>>(), 0, &mut perms);
    let mut out = Vec::new();
    for perm in &perms {
        for signs in 0..(1u32 << n) {
            let mut m = Mat::zeros(d, d);
            for i in 0..n {
                let s = if signs & (1 << i) != 0 { -Scalar::one() } else { Scalar::one() };
                m[(space.q(perm[i]), space.q(i))] = s.clone();
                m[(space.p(perm[i]), space.p(i))] = s;
            }
            out.push(m);
        }
    }
    // Identity first, then by number of sign flips.
    out.sort_by_key(|m| {
        let mut score = 0usize;
        for i in 0..d {
            if m[(i, i)] != Scalar::one() {
                score += 1;
            }
        }
        score
    });
    out
}

fn permutations(n: usize, current: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == n {
        out.push(current.clone());
        return;
    }
    for i in k..n {
        current.swap(k, i);
        permutations(n, current, k + 1, out);
        current.swap(k, i);
    }
}

/// Nearest small-denominator rational matrix within 1e-9, if one exists.
fn rationalize(m: &FMat) -> Option<Mat> {
    let mut out = Mat::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = rational_approx(m[(i, j)])?;
        }
    }
    Some(out)
}

fn rational_approx(x: f64) -> Option<Scalar> {
    // Continued-fraction expansion with bounded denominator.
    let mut best: Option<(i64, i64)> = None;
    let (mut h0, mut h1): (i64, i64) = (1, 0);
    let (mut k0, mut k1): (i64, i64) = (0, 1);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i64;
        let h2 = ai.checked_mul(h0)?.checked_add(h1)?;
        let k2 = ai.checked_mul(k0)?.checked_add(k1)?;
        if k2.abs() > 1 << 20 {
            break;
        }
        h1 = h0;
        h0 = h2;
        k1 = k0;
        k0 = k2;
        best = Some((h0, k0));
        let frac = v - a;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    let (p, q) = best?;
    if q == 0 {
        return None;
    }
    let r = Scalar::ratio(p, q);
    ((r.to_f64() - x).abs() < 1e-9).then_some(r)
}

/// Exact characteristic polynomial coefficients via Faddeev-LeVerrier,
/// reported when no factorization exists.
fn spectrum_info(m: &Mat) -> String {
    let d = m.nrows();
    let mut coeffs = vec![Scalar::one()];
    let mut aux = m.clone();
    for k in 1..=d {
        let trace: Scalar = (0..d).map(|i| aux[(i, i)].clone()).sum();
        let c = -trace * Scalar::ratio(1, k as i64);
        coeffs.push(c.clone());
        if k < d {
            let mut shifted = aux.clone();
            for i in 0..d {
                shifted[(i, i)] = &shifted[(i, i)] + &c;
            }
            aux = m * &shifted;
        }
    }
    let terms: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
    format!("char poly coefficients [{}]", terms.join(", "))
}

/// Builds the exact reduced-map matrix of a frame transformation from two
/// frames, for feeding [`find_generator`]. Convenience used by tests and
/// the verification harness.
pub fn frame_map_matrix(a: &Frame, b: &Frame) -> Result<Mat> {
    Ok(crate::frames::frame_transformation(a, b)?.matrix().clone())
}

/// Heavy-mass limit of the reduced Hamiltonian coefficient matrix: max
/// entrywise distance to the two-particle kinetic matrix, exact.
pub fn reduced_kinetic_deviation(model: &RelativeModel, frame: &Frame) -> Scalar {
    let reduced = &frame.embedding.reduced;
    let [j1, j2] = non_anchor(frame.anchor);
    let mut target = Mat::zeros(4, 4);
    for (slot, &particle) in [j1, j2].iter().enumerate() {
        target[(reduced.p(slot), reduced.p(slot))] =
            model.config.masses()[particle].recip();
    }
    let q = frame.reduced_hamiltonian.quadratic_part();
    let mut dev = Scalar::zero();
    for i in 0..4 {
        for j in 0..4 {
            let diff = (&q[(i, j)] - &target[(i, j)]).abs();
            if diff > dev {
                dev = diff;
            }
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{convert, gauge_fix, solve_x, GaugeCondition};
    use crate::frames::{relative_momentum_frame, relative_position_frame};
    use crate::model::{build_relative_model, MassConfig};
    use crate::scalar::{int, rat};

    fn extended(masses: [i64; 3]) -> ExtendedSystem {
        let config =
            MassConfig::new(&[int(masses[0]), int(masses[1]), int(masses[2])]).unwrap();
        let model = build_relative_model(&config);
        let x = solve_x(&model.classification.c_matrix).unwrap().canonical;
        convert(&model, &x).unwrap()
    }

    #[test]
    fn tp_trivializes_phi2() {
        let ext = extended([1, 2, 3]);
        let tp = trivialization(&ext, TrivializationKind::TP, None).unwrap();
        // Phi~2 -> -mu p, supported on the added momentum only.
        let conj = tp.conjugate(&ext.constraints[1]).unwrap();
        let expected = QuadraticObservable::momentum(&ext.space, 3)
            .scale(&-ext.model.config.mu().clone());
        assert!(conj.sub(&expected).unwrap().is_zero());
        // Phi~1 -> Phi1 (no added-pair support).
        let conj1 = tp.conjugate(&ext.constraints[0]).unwrap();
        assert!(conj1.linear_part()[ext.space.q(3)].is_zero());
        assert!(conj1.linear_part()[ext.space.p(3)].is_zero());
    }

    #[test]
    fn tq_trivializes_phi1() {
        let ext = extended([1, 2, 3]);
        let tq = trivialization(&ext, TrivializationKind::TQ, None).unwrap();
        let conj = tq.conjugate(&ext.constraints[0]).unwrap();
        let expected = QuadraticObservable::position(&ext.space, 3);
        assert!(conj.sub(&expected).unwrap().is_zero());
        let conj2 = tq.conjugate(&ext.constraints[1]).unwrap();
        assert!(conj2.linear_part()[ext.space.q(3)].is_zero());
        assert!(conj2.linear_part()[ext.space.p(3)].is_zero());
    }

    #[test]
    fn position_route_reaches_frame_hamiltonian() {
        for masses in [[1, 1, 1], [1, 2, 3], [5, 2, 7]] {
            let ext = extended(masses);
            let model = &ext.model;
            for anchor in 0..3 {
                let path = standard_path(&ext, ReductionRoute::Position, anchor).unwrap();
                let reduced = symmetry_reduce(&ext, &path).unwrap();
                assert_eq!(reduced.space.dim(), 4);
                assert!(reduced.constraints.is_empty());
                let frame = relative_position_frame(model, anchor).unwrap();
                assert!(
                    reduced.hamiltonian.same_coefficients(&frame.reduced_hamiltonian),
                    "masses {masses:?} anchor {anchor}: {:?} vs {:?}",
                    reduced.hamiltonian,
                    frame.reduced_hamiltonian
                );
            }
        }
    }

    #[test]
    fn momentum_route_reaches_frame_hamiltonian() {
        for masses in [[1, 1, 1], [1, 2, 3], [4, 9, 2]] {
            let ext = extended(masses);
            let model = &ext.model;
            for anchor in 0..3 {
                let path = standard_path(&ext, ReductionRoute::Momentum, anchor).unwrap();
                let reduced = symmetry_reduce(&ext, &path).unwrap();
                let frame = relative_momentum_frame(model, anchor).unwrap();
                assert!(
                    reduced.hamiltonian.same_coefficients(&frame.reduced_hamiltonian),
                    "masses {masses:?} anchor {anchor}"
                );
            }
        }
    }

    #[test]
    fn single_stage_matches_gauge_fix() {
        let ext = extended([1, 2, 3]);
        // T_p followed by the p = 0 / q = 0 projection yields the
        // intermediate position space (the classical q = 0 gauge fix).
        let tp = trivialization(&ext, TrivializationKind::TP, None).unwrap();
        let reduced =
            symmetry_reduce(&ext, &[ReductionStage { trivialization: tp, drop_pair: 3 }])
                .unwrap();
        let int_q = gauge_fix(&ext, GaugeCondition::PositionZero).unwrap();
        assert!(reduced.hamiltonian.same_coefficients(&int_q.hamiltonian.total()));
        assert_eq!(reduced.constraints.len(), 1);
        assert!(reduced.constraints[0].same_coefficients(&int_q.constraint));
        for i in 0..3 {
            assert!(reduced.observables_q[i].same_coefficients(&int_q.observables_q[i]));
            assert!(reduced.observables_p[i].same_coefficients(&int_q.observables_p[i]));
        }
        // And T_q reaches the intermediate momentum space.
        let tq = trivialization(&ext, TrivializationKind::TQ, None).unwrap();
        let reduced_p =
            symmetry_reduce(&ext, &[ReductionStage { trivialization: tq, drop_pair: 3 }])
                .unwrap();
        let int_p = gauge_fix(&ext, GaugeCondition::MomentumZero).unwrap();
        assert!(reduced_p.hamiltonian.same_coefficients(&int_p.hamiltonian.total()));
        assert!(reduced_p.constraints[0].same_coefficients(&int_p.constraint));
    }

    #[test]
    fn neutral_frame_change_matches_darboux_route() {
        let ext = extended([1, 2, 3]);
        let model = &ext.model;
        let cases = [
            ((FrameKind::RelativePosition, 0), (FrameKind::RelativePosition, 1)),
            ((FrameKind::RelativePosition, 1), (FrameKind::RelativePosition, 2)),
            ((FrameKind::RelativeMomentum, 0), (FrameKind::RelativeMomentum, 1)),
            ((FrameKind::RelativePosition, 0), (FrameKind::RelativeMomentum, 0)),
            ((FrameKind::RelativeMomentum, 2), (FrameKind::RelativePosition, 1)),
        ];
        for (a, b) in cases {
            let fa = frame_for(model, a);
            let fb = frame_for(model, b);
            let direct = crate::frames::frame_transformation(&fa, &fb).unwrap();
            let neutral = frame_change_via_neutral(&ext, a, b).unwrap();
            assert_eq!(&neutral, direct.matrix(), "{a:?} -> {b:?}");
        }
    }

    fn frame_for(model: &RelativeModel, spec: (FrameKind, usize)) -> Frame {
        match spec.0 {
            FrameKind::RelativePosition => relative_position_frame(model, spec.1).unwrap(),
            FrameKind::RelativeMomentum => relative_momentum_frame(model, spec.1).unwrap(),
            FrameKind::Custom => unreachable!(),
        }
    }

    #[test]
    fn custom_frames_have_no_reduction_route() {
        let ext = extended([1, 1, 1]);
        let err = frame_change_via_neutral(
            &ext,
            (FrameKind::Custom, 0),
            (FrameKind::RelativePosition, 1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn generator_of_identity_is_zero() {
        let space = PhaseSpace::new(2);
        let f = find_generator(&space, &Mat::identity(4)).unwrap();
        assert!(f.generator.is_zero());
        assert_eq!(f.t, 0.0);
        assert!(f.parity.is_none());
        assert_eq!(f.invariants.len(), 4);
    }

    #[test]
    fn generator_of_q1_to_p1_map() {
        // Unit masses: the map scales (u2 - u3) by 3 and (pi2 - pi3) by 1/3;
        // the generator is (u2 - u3)(pi2 - pi3) with |t| = log(3)/2.
        let model = build_relative_model(&MassConfig::unit());
        let fa = relative_position_frame(&model, 0).unwrap();
        let fb = relative_momentum_frame(&model, 0).unwrap();
        let m = frame_map_matrix(&fa, &fb).unwrap();
        let space = fa.embedding.reduced.clone();
        let f = find_generator(&space, &m).unwrap();
        assert!(f.parity.is_none());
        assert!((f.t.abs() - 3f64.ln() / 2.0).abs() < 1e-9, "t = {}", f.t);
        // Generator proportional to (u2 - u3)(pi2 - pi3).
        let a = QuadraticObservable::position(&space, 0)
            .sub(&QuadraticObservable::position(&space, 1))
            .unwrap();
        let bb = QuadraticObservable::momentum(&space, 0)
            .sub(&QuadraticObservable::momentum(&space, 1))
            .unwrap();
        let reference = a.mul(&bb).unwrap();
        let gq = f.generator.quadratic_part();
        let rq = reference.quadratic_part();
        // Cross-multiply: g * r_00' = r * g_00' on some nonzero entry.
        let mut ratio = None;
        for i in 0..4 {
            for j in 0..4 {
                if !rq[(i, j)].is_zero() {
                    let r = &gq[(i, j)] / &rq[(i, j)];
                    match &ratio {
                        None => ratio = Some(r),
                        Some(prev) => assert_eq!(prev, &r),
                    }
                } else {
                    assert!(gq[(i, j)].is_zero());
                }
            }
        }
        assert!(ratio.is_some());
        // Invariants span u2 + u3 and pi2 + pi3.
        assert_eq!(f.invariants.len(), 2);
        for inv in &f.invariants {
            // Invariant covectors have equal components on the pair.
            assert_eq!(inv[0], inv[1]);
            assert_eq!(inv[2], inv[3]);
        }
    }

    #[test]
    fn generator_of_q1_to_q2_map_has_parity() {
        let model = build_relative_model(&MassConfig::unit());
        let fa = relative_position_frame(&model, 0).unwrap();
        let fb = relative_position_frame(&model, 1).unwrap();
        let m = frame_map_matrix(&fa, &fb).unwrap();
        let space = fa.embedding.reduced.clone();
        let f = find_generator(&space, &m).unwrap();
        // Parity flips the first reduced pair (the relabeled swap).
        let parity = f.parity.expect("needs a parity factor");
        let mut expected = Mat::identity(4);
        expected[(0, 0)] = int(-1);
        expected[(2, 2)] = int(-1);
        assert_eq!(parity, expected);
        // Residual is a shear: unipotent generator with t = 1.
        assert!((f.t - 1.0).abs() < 1e-9 || (f.t + 1.0).abs() < 1e-9);
        let q = f.generator.quadratic_part();
        // u pi cross terms only.
        for i in 0..2 {
            for j in 0..2 {
                assert!(q[(i, j)].is_zero());
                assert!(q[(i + 2, j + 2)].is_zero());
            }
        }
        // Re-exponentiation reproduces the map.
        let k = (&space.omega() * q).to_f64().scale(f.t);
        let rebuilt = &parity.to_f64() * &k.expm();
        assert!(rebuilt.max_abs_diff(&m.to_f64()) < 1e-9);
    }

    #[test]
    fn reduction_output_converges_in_the_heavy_mass_limit() {
        // The two-stage reduction's Hamiltonian approaches the two-particle
        // kinetic matrix at rate O(1/m) as the anchor mass grows.
        let mut previous: Option<Scalar> = None;
        for k in [2u32, 4, 6, 8] {
            let heavy = Scalar::from_int(10).pow(k as i32);
            let config =
                MassConfig::new(&[heavy.clone(), int(1), int(1)]).unwrap();
            let model = build_relative_model(&config);
            let x = solve_x(&model.classification.c_matrix).unwrap().canonical;
            let ext = convert(&model, &x).unwrap();
            let path = standard_path(&ext, ReductionRoute::Position, 0).unwrap();
            let reduced = symmetry_reduce(&ext, &path).unwrap();
            let frame = relative_position_frame(&model, 0).unwrap();
            assert!(reduced.hamiltonian.same_coefficients(&frame.reduced_hamiltonian));
            let dev = reduced_kinetic_deviation(&model, &frame);
            assert!(&dev * &heavy <= Scalar::from_int(4), "rate violated at k={k}");
            if let Some(prev) = previous {
                assert!(dev < prev);
            }
            previous = Some(dev);
        }
    }

    #[test]
    fn squeeze_scaling_checks() {
        // Frozen expectation from the eigen-decomposition oracle: the
        // q1 -> p1 matrix at unit masses is
        //   u-block (1/3)[[2, 1], [1, 2]], pi-block [[2, -1], [-1, 2]].
        let model = build_relative_model(&MassConfig::unit());
        let fa = relative_position_frame(&model, 0).unwrap();
        let fb = relative_momentum_frame(&model, 0).unwrap();
        let m = frame_map_matrix(&fa, &fb).unwrap();
        assert_eq!(m[(0, 0)], rat(2, 3));
        assert_eq!(m[(0, 1)], rat(1, 3));
        assert_eq!(m[(1, 0)], rat(1, 3));
        assert_eq!(m[(1, 1)], rat(2, 3));
        assert_eq!(m[(2, 2)], int(2));
        assert_eq!(m[(2, 3)], int(-1));
        assert_eq!(m[(3, 2)], int(-1));
        assert_eq!(m[(3, 3)], int(2));
    }
}
