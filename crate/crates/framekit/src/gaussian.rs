//! Gaussian states on phase space: the desk-scale stand-in for the quantum
//! side. States are first and second quadrature moments (hbar = 1); they
//! transform by congruence under symplectic maps and by Schur complement
//! under coordinate conditioning. The improper projectors of the symmetry
//! reduction are realized as conditioning on the trivialized constraint
//! coordinate followed by removal of its gauge partner.

use rand::Rng;

use crate::error::{Error, Result};
use crate::floatmat::FMat;
use crate::observable::QuadraticObservable;
use crate::quantize::ReductionStage;
use crate::symplectic::SymplecticMap;

const PHYSICALITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct GaussianState {
    n_pairs: usize,
    pub mean: Vec<f64>,
    pub covariance: FMat,
    pub log_norm: f64,
}

impl GaussianState {
    pub fn new(mean: Vec<f64>, covariance: FMat, log_norm: f64) -> Result<Self> {
        let d = mean.len();
        if d % 2 != 0 || covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::Dimension("gaussian state shape".into()));
        }
        let state = GaussianState { n_pairs: d / 2, mean, covariance, log_norm };
        state.check_physical()?;
        Ok(state)
    }

    /// The vacuum: zero mean, covariance `I/2`.
    pub fn vacuum(n_pairs: usize) -> Self {
        let d = 2 * n_pairs;
        GaussianState {
            n_pairs,
            mean: vec![0.0; d],
            covariance: FMat::identity(d).scale(0.5),
            log_norm: 0.0,
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn dim(&self) -> usize {
        2 * self.n_pairs
    }

    /// Most negative eigenvalue of the uncertainty matrix
    /// `Sigma + (i/2) Omega`, via its real symmetric embedding. Physical
    /// states have this >= 0 (up to tolerance).
    pub fn physicality_margin(&self) -> f64 {
        let d = self.dim();
        let omega = FMat::omega(self.n_pairs);
        let mut big = FMat::zeros(2 * d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                big[(i, j)] = self.covariance[(i, j)];
                big[(d + i, d + j)] = self.covariance[(i, j)];
                big[(i, d + j)] = -0.5 * omega[(i, j)];
                big[(d + i, j)] = 0.5 * omega[(i, j)];
            }
        }
        big.sym_eigenvalues()[0]
    }

    pub fn check_physical(&self) -> Result<()> {
        let margin = self.physicality_margin();
        if margin < -PHYSICALITY_TOL {
            return Err(Error::Unphysical(margin));
        }
        Ok(())
    }
}

/// Pushes a state through an affine symplectic map: `mean -> M mean + c`,
/// `cov -> M cov M^T`. Non-symplectic maps (beyond 1e-9) are rejected.
pub fn gaussian_apply(state: &GaussianState, matrix: &FMat, offset: &[f64]) -> Result<GaussianState> {
    let d = state.dim();
    if matrix.nrows() != d || matrix.ncols() != d || offset.len() != d {
        return Err(Error::Dimension("map does not match state".into()));
    }
    let defect = matrix.symplectic_defect();
    if defect > 1e-9 {
        return Err(Error::FloatSymplectic(format!("defect {defect:.3e}")));
    }
    let mean = matrix
        .mul_vec(&state.mean)
        .into_iter()
        .zip(offset)
        .map(|(a, b)| a + b)
        .collect();
    let covariance = &(matrix * &state.covariance) * &matrix.transpose();
    GaussianState::new(mean, covariance, state.log_norm)
}

/// Pushes a state through an exact symplectic map.
pub fn gaussian_apply_exact(state: &GaussianState, map: &SymplecticMap) -> Result<GaussianState> {
    let offset: Vec<f64> = map.offset().iter().map(|s| s.to_f64()).collect();
    gaussian_apply(state, &map.to_f64(), &offset)
}

/// Time evolution under a quadratic Hamiltonian: the symplectic flow
/// `exp(t Omega Q)` applied to the moments.
pub fn gaussian_evolve(
    state: &GaussianState,
    hamiltonian: &QuadraticObservable,
    t: f64,
) -> Result<GaussianState> {
    if hamiltonian.space().dim() != state.dim() {
        return Err(Error::Dimension("hamiltonian does not match state".into()));
    }
    if hamiltonian.linear_part().iter().any(|c| !c.is_zero()) {
        return Err(Error::UnsupportedDegree(
            "gaussian evolution expects a purely quadratic Hamiltonian".into(),
        ));
    }
    let omega = FMat::omega(state.n_pairs());
    let k = (&omega * &hamiltonian.quadratic_part().to_f64()).scale(t);
    let m = k.expm();
    gaussian_apply(state, &m, &vec![0.0; state.dim()])
}

/// Conditions the state on `z_k = value` and removes the conjugate partner
/// at its gauge value: the remaining `2N - 2` coordinates keep the
/// conditional moments, and `log_norm` picks up the Gaussian density of the
/// conditioned value.
pub fn gaussian_condition(
    state: &GaussianState,
    coordinate: usize,
    value: f64,
) -> Result<GaussianState> {
    let d = state.dim();
    if coordinate >= d {
        return Err(Error::Dimension("coordinate out of range".into()));
    }
    let n = state.n_pairs;
    let partner = if coordinate < n { coordinate + n } else { coordinate - n };
    let var = state.covariance[(coordinate, coordinate)];
    if var <= 1e-300 {
        return Err(Error::AlreadySharp);
    }
    let keep: Vec<usize> = (0..d).filter(|&a| a != coordinate && a != partner).collect();
    let dev = value - state.mean[coordinate];
    let mean: Vec<f64> = keep
        .iter()
        .map(|&a| state.mean[a] + state.covariance[(a, coordinate)] * dev / var)
        .collect();
    let covariance = FMat::from_fn(keep.len(), keep.len(), |i, j| {
        state.covariance[(keep[i], keep[j])]
            - state.covariance[(keep[i], coordinate)] * state.covariance[(coordinate, keep[j])]
                / var
    });
    let log_norm = state.log_norm
        - 0.5 * (2.0 * std::f64::consts::PI * var).ln()
        - dev * dev / (2.0 * var);
    GaussianState::new(mean, covariance, log_norm)
}

/// Runs a symmetry-reduction path on a Gaussian state: push through each
/// trivialization (states transform by the inverse point map), condition
/// the trivialized constraint coordinate at zero, and drop the pair.
pub fn reduce_gaussian(
    state: &GaussianState,
    constraints: &[QuadraticObservable],
    path: &[ReductionStage],
) -> Result<GaussianState> {
    let mut state = state.clone();
    let mut constraints = constraints.to_vec();
    for stage in path {
        let map = &stage.trivialization.map;
        if map.space().dim() != state.dim() {
            return Err(Error::SpaceMismatch);
        }
        // Observables pull back along the point map; states push forward
        // along its inverse.
        state = gaussian_apply_exact(&state, &map.inverse())?;
        let conj: Vec<QuadraticObservable> = constraints
            .iter()
            .map(|c| crate::symplectic::substitute(c, map))
            .collect::<Result<_>>()?;
        let space = map.space();
        let qk = space.q(stage.drop_pair);
        let pk = space.p(stage.drop_pair);
        let mut eliminated = None;
        for (idx, c) in conj.iter().enumerate() {
            let support: Vec<usize> = c
                .linear_part()
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, _)| i)
                .collect();
            if support.len() == 1 && (support[0] == qk || support[0] == pk) {
                eliminated = Some((idx, support[0]));
                break;
            }
        }
        let Some((idx, coord)) = eliminated else {
            return Err(Error::Reduction(format!(
                "no constraint trivialized on pair {}",
                stage.drop_pair + 1
            )));
        };
        state = gaussian_condition(&state, coord, 0.0)?;
        // Re-express the surviving constraints on the smaller space.
        let new_space = space.drop_pair(stage.drop_pair);
        let keep: Vec<usize> = (0..space.dim()).filter(|&a| a != qk && a != pk).collect();
        let ins = crate::matrix::Mat::from_fn(space.dim(), new_space.dim(), |i, j| {
            if keep[j] == i { crate::scalar::Scalar::one() } else { crate::scalar::Scalar::zero() }
        });
        let zeros = vec![crate::scalar::Scalar::zero(); space.dim()];
        constraints = conj
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, c)| c.substitute_affine(&ins, &zeros, &new_space))
            .collect::<Result<_>>()?;
    }
    Ok(state)
}

/// A random physical Gaussian: a thermal diagonal with symplectic
/// eigenvalues >= 1/2, rotated by a random symplectic map and displaced.
pub fn random_physical(n_pairs: usize, rng: &mut impl Rng) -> GaussianState {
    let d = 2 * n_pairs;
    let mut diag = FMat::zeros(d, d);
    for i in 0..n_pairs {
        let nu = 0.5 + 1.5 * rng.gen::<f64>();
        diag[(i, i)] = nu;
        diag[(n_pairs + i, n_pairs + i)] = nu;
    }
    // Random Hamiltonian generator with moderate entries.
    let mut sym = FMat::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let v = 0.3 * (rng.gen::<f64>() - 0.5);
            sym[(i, j)] = v;
            sym[(j, i)] = v;
        }
    }
    let s = (&FMat::omega(n_pairs) * &sym).expm();
    let covariance = &(&s * &diag) * &s.transpose();
    let mean = (0..d).map(|_| 2.0 * (rng.gen::<f64>() - 0.5)).collect();
    GaussianState { n_pairs, mean, covariance, log_norm: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vacuum_is_physical_and_identity_preserves_it() {
        let v = GaussianState::vacuum(2);
        assert!(v.physicality_margin() > -1e-12);
        let id = FMat::identity(4);
        let out = gaussian_apply(&v, &id, &[0.0; 4]).unwrap();
        assert!(out.covariance.max_abs_diff(&v.covariance) < 1e-15);
    }

    #[test]
    fn squeeze_on_vacuum() {
        // diag(3, 1/3) on one pair: cov = diag(9/2, 1/18).
        let v = GaussianState::vacuum(1);
        let mut m = FMat::identity(2);
        m[(0, 0)] = 3.0;
        m[(1, 1)] = 1.0 / 3.0;
        let out = gaussian_apply(&v, &m, &[0.0, 0.0]).unwrap();
        assert!((out.covariance[(0, 0)] - 4.5).abs() < 1e-12);
        assert!((out.covariance[(1, 1)] - 1.0 / 18.0).abs() < 1e-12);
        // Non-symplectic scaling is rejected.
        let mut bad = FMat::identity(2);
        bad[(0, 0)] = 2.0;
        bad[(1, 1)] = 2.0;
        assert!(gaussian_apply(&v, &bad, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn conditioning_vacuum_gives_vacuum_and_density_factor() {
        let v = GaussianState::vacuum(2);
        let out = gaussian_condition(&v, 0, 0.0).unwrap();
        assert_eq!(out.dim(), 2);
        assert!(out.covariance.max_abs_diff(&FMat::identity(2).scale(0.5)) < 1e-15);
        let expect = -0.5 * (2.0 * std::f64::consts::PI * 0.5).ln();
        assert!((out.log_norm - expect).abs() < 1e-12);
        // Conditioning a sharp coordinate fails.
        let mut sharp = GaussianState::vacuum(2);
        sharp.covariance[(0, 0)] = 0.0;
        assert!(matches!(gaussian_condition(&sharp, 0, 0.0), Err(Error::AlreadySharp)));
    }

    #[test]
    fn schur_complement_matches_numeric_integration() {
        // Two pairs with correlated positions. Condition q1 = 0.3 and
        // compare the conditional mean and variance of q2 against direct
        // 2-dimensional numeric integration of the position marginal.
        let mut cov = FMat::identity(4).scale(0.75);
        cov[(0, 1)] = 0.4;
        cov[(1, 0)] = 0.4;
        let state = GaussianState::new(vec![0.1, -0.2, 0.0, 0.0], cov, 0.0).unwrap();
        let out = gaussian_condition(&state, 0, 0.3).unwrap();
        // q2 is coordinate 0 of the reduced state.
        let got_mean = out.mean[0];
        let got_var = out.covariance[(0, 0)];
        // Numeric oracle on the (q1, q2) marginal density.
        let (s11, s12, s22) = (0.75, 0.4, 0.75);
        let det = s11 * s22 - s12 * s12;
        let (m1, m2) = (0.1, -0.2);
        let q1 = 0.3;
        let density = |x2: f64| {
            let d1 = q1 - m1;
            let d2 = x2 - m2;
            let quad = (s22 * d1 * d1 - 2.0 * s12 * d1 * d2 + s11 * d2 * d2) / det;
            (-0.5 * quad).exp()
        };
        let (mut z, mut e1, mut e2) = (0.0, 0.0, 0.0);
        let n = 40_000;
        for i in 0..n {
            let x2 = -10.0 + 20.0 * (i as f64 + 0.5) / n as f64;
            let w = density(x2);
            z += w;
            e1 += w * x2;
            e2 += w * x2 * x2;
        }
        let oracle_mean = e1 / z;
        let oracle_var = e2 / z - oracle_mean * oracle_mean;
        assert!((got_mean - oracle_mean).abs() < 1e-6, "{got_mean} vs {oracle_mean}");
        assert!((got_var - oracle_var).abs() < 1e-6, "{got_var} vs {oracle_var}");
        // And the closed form sigma22 - sigma21 sigma12 / sigma11.
        assert!((got_var - (s22 - s12 * s12 / s11)).abs() < 1e-12);
    }

    #[test]
    fn frame_map_and_inverse_round_trip_a_state() {
        use crate::frames::{frame_transformation, relative_position_frame};
        use crate::model::{build_relative_model, MassConfig};
        let model = build_relative_model(&MassConfig::unit());
        let f1 = relative_position_frame(&model, 0).unwrap();
        let f2 = relative_position_frame(&model, 1).unwrap();
        let t = frame_transformation(&f1, &f2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let state = random_physical(2, &mut rng);
        let out = gaussian_apply_exact(&gaussian_apply_exact(&state, &t).unwrap(), &t.inverse())
            .unwrap();
        assert!(out.covariance.max_abs_diff(&state.covariance) < 1e-12);
        for (a, b) in out.mean.iter().zip(&state.mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_states_are_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 4] {
            for _ in 0..5 {
                let s = random_physical(n, &mut rng);
                assert!(s.physicality_margin() > -1e-9);
            }
        }
    }

    #[test]
    fn evolution_preserves_physicality() {
        use crate::model::{build_relative_model, MassConfig};
        let model = build_relative_model(&MassConfig::unit());
        let frame = crate::frames::relative_position_frame(&model, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state = random_physical(2, &mut rng);
        for t in [0.1, 1.0, 10.0] {
            let out = gaussian_evolve(&state, &frame.reduced_hamiltonian, t).unwrap();
            assert!(out.physicality_margin() > -1e-9);
        }
    }
}
