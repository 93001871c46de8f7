//! Exact symplectic maps and Hamiltonian flows of quadratic generators.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::floatmat::FMat;
use crate::matrix::Mat;
use crate::observable::QuadraticObservable;
use crate::phase_space::PhaseSpace;
use crate::scalar::Scalar;

/// Outcome of a symplecticity test. On failure `witness` holds the first
/// offending entry of `M^T Omega M` together with its value.
#[derive(Clone, Debug)]
pub struct SymplecticCheck {
    pub ok: bool,
    pub witness: Option<(usize, usize, Scalar)>,
}

/// Checks `M^T Omega M = Omega` exactly.
pub fn is_symplectic(m: &Mat) -> Result<SymplecticCheck> {
    if !m.is_square() || m.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "symplectic test needs a square even-dimensional matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let omega = Mat::omega(m.nrows() / 2);
    let prod = &(&m.transpose() * &omega) * m;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if prod[(i, j)] != omega[(i, j)] {
                return Ok(SymplecticCheck { ok: false, witness: Some((i, j, prod[(i, j)].clone())) });
            }
        }
    }
    Ok(SymplecticCheck { ok: true, witness: None })
}

/// An exact affine symplectic map `z -> M z + c`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymplecticMap {
    space: Arc<PhaseSpace>,
    matrix: Mat,
    offset: Vec<Scalar>,
}

impl SymplecticMap {
    pub fn new(space: Arc<PhaseSpace>, matrix: Mat, offset: Vec<Scalar>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::Dimension("map dimension does not match space".into()));
        }
        if offset.len() != space.dim() {
            return Err(Error::Dimension("offset dimension does not match space".into()));
        }
        let check = is_symplectic(&matrix)?;
        if let Some((row, col, value)) = check.witness {
            return Err(Error::NotSymplectic { row, col, value: value.to_string() });
        }
        Ok(SymplecticMap { space, matrix, offset })
    }

    pub fn identity(space: &Arc<PhaseSpace>) -> Self {
        SymplecticMap {
            space: space.clone(),
            matrix: Mat::identity(space.dim()),
            offset: vec![Scalar::zero(); space.dim()],
        }
    }

    pub fn space(&self) -> &Arc<PhaseSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn offset(&self) -> &[Scalar] {
        &self.offset
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == Mat::identity(self.space.dim()) && self.offset.iter().all(Scalar::is_zero)
    }

    pub fn apply(&self, z: &[Scalar]) -> Vec<Scalar> {
        self.matrix
            .mul_vec(z)
            .into_iter()
            .zip(&self.offset)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// `self` after `other`: `(self ∘ other)(z) = self(other(z))`.
    pub fn compose(&self, other: &SymplecticMap) -> Result<SymplecticMap> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let matrix = &self.matrix * &other.matrix;
        let offset = self
            .matrix
            .mul_vec(&other.offset)
            .into_iter()
            .zip(&self.offset)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SymplecticMap { space: self.space.clone(), matrix, offset })
    }

    /// Exact inverse using `M^{-1} = -Omega M^T Omega`.
    pub fn inverse(&self) -> SymplecticMap {
        let omega = self.space.omega();
        let m_inv = -&(&(&omega * &self.matrix.transpose()) * &omega);
        let offset = m_inv.mul_vec(&self.offset).into_iter().map(|x| -x).collect();
        SymplecticMap { space: self.space.clone(), matrix: m_inv, offset }
    }

    pub fn to_f64(&self) -> FMat {
        self.matrix.to_f64()
    }
}

/// Pullback of an observable along a symplectic point map: `f ∘ map`.
pub fn substitute(f: &QuadraticObservable, map: &SymplecticMap) -> Result<QuadraticObservable> {
    if f.space() != map.space() {
        return Err(Error::SpaceMismatch);
    }
    f.substitute_affine(&map.matrix, &map.offset, &map.space)
}

/// The Hamiltonian matrix `Omega Q` of a quadratic generator.
fn hamiltonian_matrix(generator: &QuadraticObservable) -> Mat {
    &generator.space().omega() * generator.quadratic_part()
}

/// Exact time-`t` flow of a quadratic generator.
///
/// Two shapes are supported, matching what the trivialization maps and
/// shears in this pipeline need:
/// - purely quadratic generator with nilpotent `Omega Q` (the exponential
///   series terminates, so the flow is exact for rational `t`);
/// - purely linear generator (an affine translation flow).
///
/// Generators whose `Omega Q` is not nilpotent have no rational matrix
/// exponential; use [`linear_flow_f64`] for those.
pub fn linear_flow(generator: &QuadraticObservable, t: &Scalar) -> Result<SymplecticMap> {
    let space = generator.space().clone();
    let d = space.dim();
    let has_quadratic = !generator.quadratic_part().is_zero();
    let has_linear = generator.linear_part().iter().any(|c| !c.is_zero());
    if has_quadratic && has_linear {
        return Err(Error::UnsupportedDegree(
            "flow of a mixed linear+quadratic generator is not supported".into(),
        ));
    }
    if !has_quadratic {
        // z(t) = z + t * Omega a.
        let offset = space
            .omega()
            .mul_vec(generator.linear_part())
            .into_iter()
            .map(|x| x * t)
            .collect();
        return Ok(SymplecticMap { space, matrix: Mat::identity(d), offset });
    }
    if !generator.constant_part().is_zero() {
        return Err(Error::UnsupportedDegree(
            "quadratic flow generator must have zero constant part".into(),
        ));
    }
    let k = hamiltonian_matrix(generator);
    // Nilpotency check: the series must terminate within dim steps.
    let mut power = Mat::identity(d);
    let mut sum = Mat::identity(d);
    let mut factorial = Scalar::one();
    let mut terminated = false;
    for step in 1..=d {
        power = &power * &k;
        if power.is_zero() {
            terminated = true;
            break;
        }
        factorial = factorial * Scalar::from_int(step as i64);
        let coeff = t.pow(step as i32) * factorial.recip();
        sum = &sum + &power.scale(&coeff);
    }
    if !terminated {
        return Err(Error::NonNilpotentFlow);
    }
    SymplecticMap::new(space, sum, vec![Scalar::zero(); d])
}

/// Floating-point flow `exp(t Omega Q)` for generators without a rational
/// exponential. Symplecticity is re-checked to 1e-12.
pub fn linear_flow_f64(generator: &QuadraticObservable, t: f64) -> Result<FMat> {
    if !generator.linear_part().iter().all(Scalar::is_zero) {
        return Err(Error::UnsupportedDegree(
            "float flow expects a purely quadratic generator".into(),
        ));
    }
    let k = hamiltonian_matrix(generator).to_f64().scale(t);
    let m = k.expm();
    let defect = m.symplectic_defect();
    if defect > 1e-12 {
        return Err(Error::FloatSymplectic(format!("defect {defect:.3e}")));
    }
    Ok(m)
}
