//! Darboux coordinatizations of the constraint surface: the
//! perspective-dependent descriptions and the transformations between them.
//!
//! An embedding maps a 4-dimensional reduced space into the 6-dimensional
//! ambient one, landing exactly on the constraint surface. It is a Darboux
//! chart when the Dirac brackets of its intrinsic coordinates are canonical.
//! The relative position frame of particle `a` matches two position
//! coordinates with the external infinite-mass description; the relative
//! momentum frame does the same for two momenta.

use std::sync::Arc;

use crate::constraint::dirac_bracket;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::model::{MassConfig, RelativeModel};
use crate::observable::QuadraticObservable;
use crate::phase_space::PhaseSpace;
use crate::scalar::Scalar;
use crate::symplectic::SymplecticMap;

/// An injective linear map from a reduced phase space into the ambient one,
/// with image inside the constraint surface.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub ambient: Arc<PhaseSpace>,
    pub reduced: Arc<PhaseSpace>,
    pub matrix: Mat,
    pub label: String,
}

impl Embedding {
    pub fn new(
        ambient: Arc<PhaseSpace>,
        reduced: Arc<PhaseSpace>,
        matrix: Mat,
        label: impl Into<String>,
    ) -> Result<Self> {
        if matrix.nrows() != ambient.dim() || matrix.ncols() != reduced.dim() {
            return Err(Error::Dimension("embedding matrix shape".into()));
        }
        if matrix.rank() != reduced.dim() {
            return Err(Error::EmbeddingRank);
        }
        Ok(Embedding { ambient, reduced, matrix, label: label.into() })
    }

    /// Pullback `f ∘ E` of an ambient observable to the reduced space.
    pub fn pull_back(&self, f: &QuadraticObservable) -> Result<QuadraticObservable> {
        let zeros = vec![Scalar::zero(); self.ambient.dim()];
        f.substitute_affine(&self.matrix, &zeros, &self.reduced)
    }

    /// Checks that every constraint of the model vanishes identically on
    /// the image.
    pub fn annihilates_constraints(&self, model: &RelativeModel) -> Result<()> {
        for c in &model.system.constraints {
            if !self.pull_back(&c.observable)?.is_zero() {
                return Err(Error::EmbeddingConstraint(c.observable.render()));
            }
        }
        Ok(())
    }

    /// Canonical left inverse `(E^T E)^{-1} E^T`, the intrinsic-coordinate
    /// functionals dual to the embedding.
    pub fn left_inverse(&self) -> Mat {
        let et = self.matrix.transpose();
        let gram = &et * &self.matrix;
        let gram_inv = gram.inverse().expect("full column rank");
        &gram_inv * &et
    }
}

/// The matrix of Dirac brackets of the ambient coordinates,
/// `D_ab = {z_a, z_b}`. Constant, antisymmetric, rank `2N - 2M`.
pub fn dirac_matrix(model: &RelativeModel) -> Result<Mat> {
    let space = model.space();
    let d = space.dim();
    let mut out = Mat::zeros(d, d);
    for a in 0..d {
        let za = QuadraticObservable::coordinate(space, a);
        for b in 0..d {
            let zb = QuadraticObservable::coordinate(space, b);
            out[(a, b)] = dirac_bracket(&za, &zb, &model.classification)?
                .constant_part()
                .clone();
        }
    }
    Ok(out)
}

/// Bracket matrix of the intrinsic coordinates of an embedding: the Dirac
/// matrix pushed through the dual functionals. The result is independent of
/// the left-inverse choice because `D` annihilates constraint gradients.
/// The embedding is Darboux exactly when this equals the reduced `Omega`.
pub fn induced_brackets(embedding: &Embedding, dirac: &Mat) -> Result<Mat> {
    let l = embedding.left_inverse();
    Ok(&(&l * dirac) * &l.transpose())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum FrameKind {
    RelativePosition,
    RelativeMomentum,
    Custom,
}

/// A Darboux chart together with the Hamiltonian it induces.
#[derive(Clone, Debug)]
pub struct Frame {
    pub embedding: Embedding,
    pub reduced_hamiltonian: QuadraticObservable,
    pub kind: FrameKind,
    pub anchor: usize,
}

/// The two non-anchor particles in increasing order.
pub fn non_anchor(anchor: usize) -> [usize; 2] {
    match anchor {
        0 => [1, 2],
        1 => [0, 2],
        2 => [0, 1],
        _ => panic!("anchor out of range"),
    }
}

/// Reduced phase space labelled by the non-anchor particles.
pub fn reduced_space(anchor: usize) -> Arc<PhaseSpace> {
    let [j1, j2] = non_anchor(anchor);
    let labels = [
        (format!("u{}", j1 + 1), format!("pi{}", j1 + 1)),
        (format!("u{}", j2 + 1), format!("pi{}", j2 + 1)),
    ];
    PhaseSpace::with_pair_labels(&[
        (labels[0].0.as_str(), labels[0].1.as_str()),
        (labels[1].0.as_str(), labels[1].1.as_str()),
    ])
}

/// Sign of the pattern `p_row = eps * pi_col` relating the cyclic relative
/// coordinates to anchored intrinsic ones: `+1` when `(anchor, row, col)`
/// is a cyclic permutation of `(0, 1, 2)`.
fn pattern_sign(anchor: usize, row: usize, col: usize) -> Scalar {
    let cyclic = (anchor + 1) % 3 == row && (anchor + 2) % 3 == col;
    if cyclic {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

/// Position rows of the anchored pattern: the 3x2 matrix `m` with
/// `q_i = sum_c m[i][c] u_{jc}`, coming from `u_j = x_j - x_anchor`.
fn position_pattern(anchor: usize) -> Mat {
    let [j1, j2] = non_anchor(anchor);
    let mut m = Mat::zeros(3, 2);
    for (c, &j) in [j1, j2].iter().enumerate() {
        // q_i = x_{i+1} - x_{i+2}: u_j appears in the two rows where x_j does.
        for i in 0..3 {
            if (i + 1) % 3 == j {
                m[(i, c)] = Scalar::one();
            } else if (i + 2) % 3 == j {
                m[(i, c)] = -Scalar::one();
            }
        }
    }
    m
}

/// Momentum rows of the naive anchored pattern: `p_j = eps * pi_l` for the
/// non-anchor particles, with the anchor row solved from the constraint
/// `sum n_i / mu_i = 0`.
fn momentum_pattern(config: &MassConfig, anchor: usize) -> Mat {
    let [j1, j2] = non_anchor(anchor);
    let mut n = Mat::zeros(3, 2);
    for (c, &l) in [j1, j2].iter().enumerate() {
        // pi_l sits in the row of the other non-anchor particle.
        let j = if l == j1 { j2 } else { j1 };
        n[(j, c)] = pattern_sign(anchor, j, l);
    }
    // Anchor row from sum_i n_{i,c}/mu_i = 0.
    for c in 0..2 {
        let mut acc = Scalar::zero();
        for i in 0..3 {
            if i != anchor {
                acc += &(&n[(i, c)] * &config.reduced_mass(i).recip());
            }
        }
        n[(anchor, c)] = -acc * config.reduced_mass(anchor);
    }
    n
}

fn assemble_embedding(
    model: &RelativeModel,
    anchor: usize,
    m: &Mat,
    n: &Mat,
    label: &str,
) -> Result<Embedding> {
    let ambient = model.space().clone();
    let reduced = reduced_space(anchor);
    let mut e = Mat::zeros(6, 4);
    for i in 0..3 {
        for c in 0..2 {
            e[(ambient.q(i), c)] = m[(i, c)].clone();
            e[(ambient.p(i), 2 + c)] = n[(i, c)].clone();
        }
    }
    let embedding = Embedding::new(ambient, reduced, e, label)?;
    embedding.annihilates_constraints(model)?;
    Ok(embedding)
}

/// The Dirac bracket targets `D_ij = {q_i, p_j} = delta_ij - 1/(mu mu_i)`.
fn bracket_targets(config: &MassConfig) -> Mat {
    Mat::from_fn(3, 3, |i, j| {
        let base = if i == j { Scalar::one() } else { Scalar::zero() };
        base - config.mass_term(i)
    })
}

/// Solves the momentum rows of a frame given fixed position rows: the
/// constraint conditions and Darboux conditions are linear in `n`.
fn solve_n_given_m(config: &MassConfig, m: &Mat) -> Result<Mat> {
    let targets = bracket_targets(config);
    // Unknowns n_{i,c} flattened as 2*i + c.
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for c in 0..2 {
        let mut row = vec![Scalar::zero(); 6];
        for i in 0..3 {
            row[2 * i + c] = config.reduced_mass(i).recip();
        }
        rows.push(row);
        rhs.push(Scalar::zero());
    }
    for i in 0..3 {
        for j in 0..3 {
            let mut row = vec![Scalar::zero(); 6];
            for c in 0..2 {
                row[2 * j + c] = m[(i, c)].clone();
            }
            rows.push(row);
            rhs.push(targets[(i, j)].clone());
        }
    }
    let a = Mat::from_rows(rows);
    let sol = a
        .solve(&rhs)
        .ok_or_else(|| Error::NoSolution("Darboux conditions for momentum rows".into()))?;
    // The canonical solve zeroes free variables; verify exactness.
    let check = a.mul_vec(&sol);
    if check != rhs {
        return Err(Error::NoSolution("Darboux conditions for momentum rows".into()));
    }
    Ok(Mat::from_fn(3, 2, |i, c| sol[2 * i + c].clone()))
}

/// Solves the position rows given fixed momentum rows.
fn solve_m_given_n(config: &MassConfig, n: &Mat) -> Result<Mat> {
    let targets = bracket_targets(config);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for c in 0..2 {
        let mut row = vec![Scalar::zero(); 6];
        for i in 0..3 {
            row[2 * i + c] = Scalar::one();
        }
        rows.push(row);
        rhs.push(Scalar::zero());
    }
    for i in 0..3 {
        for j in 0..3 {
            let mut row = vec![Scalar::zero(); 6];
            for c in 0..2 {
                row[2 * i + c] = n[(j, c)].clone();
            }
            rows.push(row);
            rhs.push(targets[(i, j)].clone());
        }
    }
    let a = Mat::from_rows(rows);
    let sol = a
        .solve(&rhs)
        .ok_or_else(|| Error::NoSolution("Darboux conditions for position rows".into()))?;
    let check = a.mul_vec(&sol);
    if check != rhs {
        return Err(Error::NoSolution("Darboux conditions for position rows".into()));
    }
    Ok(Mat::from_fn(3, 2, |i, c| sol[2 * i + c].clone()))
}

/// The relative position frame of the given particle: position rows are the
/// anchored relative distances, momentum rows solve the Darboux conditions.
pub fn relative_position_frame(model: &RelativeModel, anchor: usize) -> Result<Frame> {
    if anchor >= 3 {
        return Err(Error::Domain("anchor must be one of the three particles".into()));
    }
    let m = position_pattern(anchor);
    let n = solve_n_given_m(&model.config, &m)?;
    let embedding = assemble_embedding(
        model,
        anchor,
        &m,
        &n,
        &format!("relative-position frame of particle {}", anchor + 1),
    )?;
    let reduced_hamiltonian = embedding.pull_back(model.hamiltonian())?;
    Ok(Frame { embedding, reduced_hamiltonian, kind: FrameKind::RelativePosition, anchor })
}

/// The relative momentum frame of the given particle: momentum rows match
/// the anchored pattern, position rows solve the Darboux conditions.
pub fn relative_momentum_frame(model: &RelativeModel, anchor: usize) -> Result<Frame> {
    if anchor >= 3 {
        return Err(Error::Domain("anchor must be one of the three particles".into()));
    }
    let n = momentum_pattern(&model.config, anchor);
    let m = solve_m_given_n(&model.config, &n)?;
    let embedding = assemble_embedding(
        model,
        anchor,
        &m,
        &n,
        &format!("relative-momentum frame of particle {}", anchor + 1),
    )?;
    let reduced_hamiltonian = embedding.pull_back(model.hamiltonian())?;
    Ok(Frame { embedding, reduced_hamiltonian, kind: FrameKind::RelativeMomentum, anchor })
}

/// The naive chart: anchored position rows together with anchored momentum
/// rows. It annihilates the constraints but is not Darboux; its induced
/// brackets carry the mass terms `1/(mu mu_i)`.
pub fn naive_embedding(model: &RelativeModel, anchor: usize) -> Result<Embedding> {
    let m = position_pattern(anchor);
    let n = momentum_pattern(&model.config, anchor);
    assemble_embedding(
        model,
        anchor,
        &m,
        &n,
        &format!("naive chart of particle {}", anchor + 1),
    )
}

/// Coefficient pin for the general Darboux solver.
#[derive(Clone, Debug)]
pub struct Pin {
    /// Position-side (`m`) or momentum-side (`n`) coefficient.
    pub momentum_side: bool,
    /// Particle index, 0-based.
    pub particle: usize,
    /// Reduced slot, 0 or 1.
    pub slot: usize,
    pub value: Scalar,
}

impl Pin {
    pub fn m(particle: usize, slot: usize, value: Scalar) -> Self {
        Pin { momentum_side: false, particle, slot, value }
    }

    pub fn n(particle: usize, slot: usize, value: Scalar) -> Self {
        Pin { momentum_side: true, particle, slot, value }
    }
}

#[derive(Clone, Debug)]
pub enum DarbouxSolution {
    Unique(Embedding),
    /// Under-pinned: a representative solution plus the residual freedom.
    Family { base: Embedding, free_coefficients: usize },
}

/// Solves the combined constraint + Darboux conditions for the 12 chart
/// coefficients, with the caller pinning part of them.
///
/// The system is bilinear; once either side is fully determined the rest is
/// linear and solved exactly. Pins that only partially determine both sides
/// are completed from the canonical position/momentum patterns and reported
/// as a family with the residual freedom counted at the base solution.
pub fn solve_darboux(model: &RelativeModel, anchor: usize, pins: &[Pin]) -> Result<DarbouxSolution> {
    let config = &model.config;
    let mut m_known: [[Option<Scalar>; 2]; 3] = Default::default();
    let mut n_known: [[Option<Scalar>; 2]; 3] = Default::default();
    for pin in pins {
        if pin.particle >= 3 || pin.slot >= 2 {
            return Err(Error::Domain("pin index out of range".into()));
        }
        let cell = if pin.momentum_side {
            &mut n_known[pin.particle][pin.slot]
        } else {
            &mut m_known[pin.particle][pin.slot]
        };
        if let Some(existing) = cell {
            if *existing != pin.value {
                return Err(Error::NoSolution(format!(
                    "conflicting pins for the same coefficient ({existing} vs {})",
                    pin.value
                )));
            }
        }
        *cell = Some(pin.value.clone());
    }

    // Propagate the linear constraint conditions: each determines the last
    // unknown of its row sum.
    propagate_sum_conditions(&mut m_known, |_| Scalar::one());
    propagate_sum_conditions(&mut n_known, |i| config.reduced_mass(i).recip());

    let m_full = side_matrix(&m_known);
    let n_full = side_matrix(&n_known);

    match (m_full, n_full) {
        (Some(m), _) => {
            // Momentum side is linear given m; pinned n-values become
            // verification conditions afterwards.
            check_sum_condition(&m, |_| Scalar::one(), "sum_i m_iA = 0 / sum_i m_iB = 0")?;
            let n = solve_n_given_m(config, &m)?;
            verify_pins(&n_known, &n, "momentum")?;
            verify_all_conditions(config, &m, &n)?;
            let e = assemble_embedding(model, anchor, &m, &n, "pinned Darboux chart")?;
            Ok(DarbouxSolution::Unique(e))
        }
        (None, Some(n)) => {
            check_sum_condition_weighted(config, &n)?;
            let m = solve_m_given_n(config, &n)?;
            verify_pins(&m_known, &m, "position")?;
            verify_all_conditions(config, &m, &n)?;
            let e = assemble_embedding(model, anchor, &m, &n, "pinned Darboux chart")?;
            Ok(DarbouxSolution::Unique(e))
        }
        (None, None) => {
            // Complete the position side from the canonical pattern where
            // unpinned, then solve. The returned family counts the residual
            // freedom at the base point.
            let pattern = position_pattern(anchor);
            let mut m = Mat::zeros(3, 2);
            for i in 0..3 {
                for c in 0..2 {
                    m[(i, c)] = m_known[i][c].clone().unwrap_or_else(|| pattern[(i, c)].clone());
                }
            }
            check_sum_condition(&m, |_| Scalar::one(), "sum_i m_iA = 0 / sum_i m_iB = 0")?;
            let n = solve_n_given_m(config, &m)?;
            verify_pins(&n_known, &n, "momentum")?;
            verify_all_conditions(config, &m, &n)?;
            let base = assemble_embedding(model, anchor, &m, &n, "under-pinned Darboux chart")?;
            let pinned = pins.len();
            let free = 4usize.saturating_sub(pinned);
            Ok(DarbouxSolution::Family { base, free_coefficients: free })
        }
    }
}

fn propagate_sum_conditions(
    known: &mut [[Option<Scalar>; 2]; 3],
    weight: impl Fn(usize) -> Scalar,
) {
    for c in 0..2 {
        let unknown: Vec<usize> = (0..3).filter(|&i| known[i][c].is_none()).collect();
        if unknown.len() == 1 {
            let i = unknown[0];
            let acc: Scalar = (0..3)
                .filter(|&k| k != i)
                .map(|k| &weight(k) * known[k][c].as_ref().unwrap())
                .sum();
            known[i][c] = Some(-acc * weight(i).recip());
        }
    }
}

fn side_matrix(known: &[[Option<Scalar>; 2]; 3]) -> Option<Mat> {
    if known.iter().all(|row| row.iter().all(Option::is_some)) {
        Some(Mat::from_fn(3, 2, |i, c| known[i][c].clone().unwrap()))
    } else {
        None
    }
}

fn check_sum_condition(
    m: &Mat,
    weight: impl Fn(usize) -> Scalar,
    label: &str,
) -> Result<()> {
    for c in 0..2 {
        let sum: Scalar = (0..3).map(|i| &weight(i) * &m[(i, c)]).sum();
        if !sum.is_zero() {
            return Err(Error::NoSolution(label.into()));
        }
    }
    Ok(())
}

fn check_sum_condition_weighted(config: &MassConfig, n: &Mat) -> Result<()> {
    check_sum_condition(n, |i| config.reduced_mass(i).recip(), "sum_i n_iA/mu_i = 0 / B")
}

fn verify_pins(known: &[[Option<Scalar>; 2]; 3], solved: &Mat, side: &str) -> Result<()> {
    for i in 0..3 {
        for c in 0..2 {
            if let Some(v) = &known[i][c] {
                if v != &solved[(i, c)] {
                    return Err(Error::NoSolution(format!(
                        "{side} pin ({}, {}) = {v} conflicts with solved value {}",
                        i + 1,
                        c,
                        solved[(i, c)]
                    )));
                }
            }
        }
    }
    Ok(())
}

fn verify_all_conditions(config: &MassConfig, m: &Mat, n: &Mat) -> Result<()> {
    let targets = bracket_targets(config);
    for i in 0..3 {
        for j in 0..3 {
            let got: Scalar = (0..2).map(|c| &m[(i, c)] * &n[(j, c)]).sum();
            if got != targets[(i, j)] {
                return Err(Error::NoSolution(format!(
                    "Darboux condition ({}, {}): got {got}, need {}",
                    i + 1,
                    j + 1,
                    targets[(i, j)]
                )));
            }
        }
    }
    Ok(())
}

/// Rank of the Jacobian of the 13 chart conditions (4 linear sums plus 9
/// bilinear bracket conditions) at a solution. Generically 8, leaving the 4
/// free coefficients the construction expects.
pub fn darboux_condition_rank(config: &MassConfig, embedding: &Embedding) -> usize {
    let amb = &embedding.ambient;
    let m = Mat::from_fn(3, 2, |i, c| embedding.matrix[(amb.q(i), c)].clone());
    let n = Mat::from_fn(3, 2, |i, c| embedding.matrix[(amb.p(i), 2 + c)].clone());
    // Variables: m_{i,c} flattened (6), then n_{i,c} (6).
    let mut rows = Vec::new();
    for c in 0..2 {
        let mut row = vec![Scalar::zero(); 12];
        for i in 0..3 {
            row[2 * i + c] = Scalar::one();
        }
        rows.push(row);
    }
    for c in 0..2 {
        let mut row = vec![Scalar::zero(); 12];
        for i in 0..3 {
            row[6 + 2 * i + c] = config.reduced_mass(i).recip();
        }
        rows.push(row);
    }
    for i in 0..3 {
        for j in 0..3 {
            let mut row = vec![Scalar::zero(); 12];
            for c in 0..2 {
                row[2 * i + c] = n[(j, c)].clone();
                row[6 + 2 * j + c] = m[(i, c)].clone();
            }
            rows.push(row);
        }
    }
    Mat::from_rows(rows).rank()
}

/// The transition matrix between two Darboux charts of the same system:
/// the exact solution `T` of `E_a T = E_b`, expressing the source frame's
/// coordinates in terms of the target frame's barred ones, so the rows
/// read like `u2 = -u1_bar`.
pub fn frame_transformation(a: &Frame, b: &Frame) -> Result<SymplecticMap> {
    if a.embedding.ambient != b.embedding.ambient {
        return Err(Error::FrameMismatch);
    }
    let t = a
        .embedding
        .matrix
        .solve_matrix(&b.embedding.matrix)
        .ok_or(Error::FrameMismatch)?;
    if &a.embedding.matrix * &t != b.embedding.matrix {
        return Err(Error::FrameMismatch);
    }
    SymplecticMap::new(a.embedding.reduced.clone(), t, vec![Scalar::zero(); 4])
}

/// One row of the heavy-mass convergence study.
#[derive(Clone, Debug, serde::Serialize)]
pub struct MassLimitRow {
    pub k: u32,
    pub heavy_mass: Scalar,
    /// Max |induced bracket - canonical| for the naive chart (exact, floated).
    pub bracket_deviation: Scalar,
    pub bracket_deviation_f64: f64,
    /// Max |reduced-H coefficient - two-particle kinetic| (exact, floated).
    pub hamiltonian_deviation: Scalar,
    pub hamiltonian_deviation_f64: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct MassLimitTable {
    pub kind: FrameKind,
    pub anchor: usize,
    pub rows: Vec<MassLimitRow>,
    pub strictly_decreasing: bool,
    /// Bracket deviation <= 2 / m_heavy on every row.
    pub within_bound: bool,
}

/// Sweeps `m_anchor = 10^k` for `k = 1..=max_k` (unit spectator masses),
/// tabulating how fast the naive chart's brackets and the Darboux frame's
/// Hamiltonian approach the infinite-mass description. All deviations are
/// computed exactly and floated only for display.
pub fn mass_limit_check(kind: FrameKind, anchor: usize, max_k: u32) -> Result<MassLimitTable> {
    let mut rows = Vec::new();
    for k in 1..=max_k {
        let mut masses = vec![Scalar::one(); 3];
        masses[anchor] = Scalar::from_int(10).pow(k as i32);
        let config = MassConfig::new(&masses)?;
        let model = crate::model::build_relative_model(&config);
        let naive = naive_embedding(&model, anchor)?;
        let d = dirac_matrix(&model)?;
        let induced = induced_brackets(&naive, &d)?;
        let omega = Mat::omega(2);
        let mut bracket_dev = Scalar::zero();
        for i in 0..4 {
            for j in 0..4 {
                let diff = (&induced[(i, j)] - &omega[(i, j)]).abs();
                if diff > bracket_dev {
                    bracket_dev = diff;
                }
            }
        }
        let frame = match kind {
            FrameKind::RelativePosition => relative_position_frame(&model, anchor)?,
            FrameKind::RelativeMomentum => relative_momentum_frame(&model, anchor)?,
            FrameKind::Custom => {
                return Err(Error::Domain("mass limit study needs a canonical frame kind".into()))
            }
        };
        let q = frame.reduced_hamiltonian.quadratic_part();
        let reduced = frame.embedding.reduced.clone();
        let [j1, j2] = non_anchor(anchor);
        let mut target = Mat::zeros(4, 4);
        for (slot, &particle) in [j1, j2].iter().enumerate() {
            target[(reduced.p(slot), reduced.p(slot))] = config.masses()[particle].recip();
        }
        let mut h_dev = Scalar::zero();
        for i in 0..4 {
            for j in 0..4 {
                let diff = (&q[(i, j)] - &target[(i, j)]).abs();
                if diff > h_dev {
                    h_dev = diff;
                }
            }
        }
        rows.push(MassLimitRow {
            k,
            heavy_mass: masses[anchor].clone(),
            bracket_deviation_f64: bracket_dev.to_f64(),
            bracket_deviation: bracket_dev,
            hamiltonian_deviation_f64: h_dev.to_f64(),
            hamiltonian_deviation: h_dev,
        });
    }
    let strictly_decreasing = rows.windows(2).all(|w| {
        w[1].bracket_deviation < w[0].bracket_deviation
            && w[1].hamiltonian_deviation < w[0].hamiltonian_deviation
    });
    let within_bound = rows.iter().all(|r| {
        &r.bracket_deviation * &r.heavy_mass <= Scalar::from_int(2)
    });
    Ok(MassLimitTable { kind, anchor, rows, strictly_decreasing, within_bound })
}
