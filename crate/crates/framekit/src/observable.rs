//! Quadratic phase-space observables and the Poisson bracket.
//!
//! An observable is `f(z) = c + a^T z + (1/2) z^T Q z` with exact rational
//! coefficients and symmetric `Q`. The class is closed under the Poisson
//! bracket, which is all the constraint analysis needs: constraints are
//! linear and Hamiltonians quadratic throughout.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{dot, Mat};
use crate::phase_space::PhaseSpace;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq)]
pub struct QuadraticObservable {
    space: Arc<PhaseSpace>,
    constant: Scalar,
    linear: Vec<Scalar>,
    quadratic: Mat,
}

impl QuadraticObservable {
    pub fn new(
        space: Arc<PhaseSpace>,
        constant: Scalar,
        linear: Vec<Scalar>,
        quadratic: Mat,
    ) -> Self {
        let d = space.dim();
        assert_eq!(linear.len(), d, "linear part dimension");
        assert_eq!((quadratic.nrows(), quadratic.ncols()), (d, d), "quadratic part dimension");
        assert!(quadratic.is_symmetric(), "quadratic part must be symmetric");
        QuadraticObservable { space, constant, linear, quadratic }
    }

    pub fn zero(space: &Arc<PhaseSpace>) -> Self {
        let d = space.dim();
        QuadraticObservable {
            space: space.clone(),
            constant: Scalar::zero(),
            linear: vec![Scalar::zero(); d],
            quadratic: Mat::zeros(d, d),
        }
    }

    pub fn constant(space: &Arc<PhaseSpace>, c: Scalar) -> Self {
        let mut f = Self::zero(space);
        f.constant = c;
        f
    }

    /// The coordinate function `z_a`.
    pub fn coordinate(space: &Arc<PhaseSpace>, a: usize) -> Self {
        let mut f = Self::zero(space);
        f.linear[a] = Scalar::one();
        f
    }

    /// Position coordinate of pair `i` (0-based).
    pub fn position(space: &Arc<PhaseSpace>, i: usize) -> Self {
        Self::coordinate(space, space.q(i))
    }

    /// Momentum coordinate of pair `i` (0-based).
    pub fn momentum(space: &Arc<PhaseSpace>, i: usize) -> Self {
        Self::coordinate(space, space.p(i))
    }

    pub fn linear_form(space: &Arc<PhaseSpace>, coeffs: Vec<Scalar>) -> Self {
        assert_eq!(coeffs.len(), space.dim());
        let mut f = Self::zero(space);
        f.linear = coeffs;
        f
    }

    /// `(1/2) z^T Q z` for symmetric `Q`.
    pub fn quadratic_form(space: &Arc<PhaseSpace>, q: Mat) -> Self {
        let mut f = Self::zero(space);
        assert!(q.is_symmetric());
        assert_eq!(q.nrows(), space.dim());
        f.quadratic = q;
        f
    }

    pub fn space(&self) -> &Arc<PhaseSpace> {
        &self.space
    }

    pub fn constant_part(&self) -> &Scalar {
        &self.constant
    }

    pub fn linear_part(&self) -> &[Scalar] {
        &self.linear
    }

    pub fn quadratic_part(&self) -> &Mat {
        &self.quadratic
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.linear.iter().all(Scalar::is_zero) && self.quadratic.is_zero()
    }

    /// True when the quadratic part vanishes (degree <= 1).
    pub fn is_linear(&self) -> bool {
        self.quadratic.is_zero()
    }

    /// True for a plain constant.
    pub fn is_constant(&self) -> bool {
        self.is_linear() && self.linear.iter().all(Scalar::is_zero)
    }

    pub fn degree(&self) -> usize {
        if !self.quadratic.is_zero() {
            2
        } else if self.linear.iter().any(|c| !c.is_zero()) {
            1
        } else {
            0
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(QuadraticObservable {
            space: self.space.clone(),
            constant: &self.constant + &other.constant,
            linear: self.linear.iter().zip(&other.linear).map(|(a, b)| a + b).collect(),
            quadratic: &self.quadratic + &other.quadratic,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        QuadraticObservable {
            space: self.space.clone(),
            constant: &self.constant * s,
            linear: self.linear.iter().map(|a| a * s).collect(),
            quadratic: self.quadratic.scale(s),
        }
    }

    /// Product of observables, defined only while the result stays quadratic
    /// (so at most one factor may carry a quadratic part, and then the other
    /// must be constant).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        if self.degree() + other.degree() > 2 {
            return Err(Error::UnsupportedDegree(format!(
                "product of degree {} and degree {} exceeds 2",
                self.degree(),
                other.degree()
            )));
        }
        let d = self.space.dim();
        let constant = &self.constant * &other.constant;
        let linear: Vec<Scalar> = (0..d)
            .map(|i| &self.constant * &other.linear[i] + &other.constant * &self.linear[i])
            .collect();
        let mut quadratic = &self.quadratic.scale(&other.constant)
            + &other.quadratic.scale(&self.constant);
        for i in 0..d {
            for j in 0..d {
                let s = &self.linear[i] * &other.linear[j] + &self.linear[j] * &other.linear[i];
                quadratic[(i, j)] = &quadratic[(i, j)] + &s;
            }
        }
        Ok(QuadraticObservable { space: self.space.clone(), constant, linear, quadratic })
    }

    /// Exact evaluation at a phase-space point.
    pub fn evaluate(&self, z: &[Scalar]) -> Scalar {
        assert_eq!(z.len(), self.space.dim());
        let qz = self.quadratic.mul_vec(z);
        &self.constant + &dot(&self.linear, z) + dot(z, &qz) * Scalar::ratio(1, 2)
    }

    /// Gradient as an exact vector-valued function evaluated at `z`.
    pub fn gradient_at(&self, z: &[Scalar]) -> Vec<Scalar> {
        let qz = self.quadratic.mul_vec(z);
        self.linear.iter().zip(&qz).map(|(a, b)| a + b).collect()
    }

    /// Pullback along the affine map `z = M w + c` into `target`.
    pub fn substitute_affine(
        &self,
        m: &Mat,
        offset: &[Scalar],
        target: &Arc<PhaseSpace>,
    ) -> Result<Self> {
        let d = self.space.dim();
        if m.nrows() != d || offset.len() != d || m.ncols() != target.dim() {
            return Err(Error::Dimension(format!(
                "substitution expects a {}x{} matrix, got {}x{}",
                d,
                target.dim(),
                m.nrows(),
                m.ncols()
            )));
        }
        // f(Mw + c) = [c0 + a.c + c.Qc/2] + (a + Qc)^T M w + (1/2) w^T (M^T Q M) w
        let qc = self.quadratic.mul_vec(offset);
        let constant = &self.constant
            + &dot(&self.linear, offset)
            + dot(offset, &qc) * Scalar::ratio(1, 2);
        let a_eff: Vec<Scalar> = self.linear.iter().zip(&qc).map(|(a, b)| a + b).collect();
        let mt = m.transpose();
        let linear = mt.mul_vec(&a_eff);
        let quadratic = &(&mt * &self.quadratic) * m;
        Ok(QuadraticObservable { space: target.clone(), constant, linear, quadratic })
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// Coefficient-level equality, ignoring coordinate labels. Used to
    /// compare observables produced on differently-labelled spaces of the
    /// same shape (e.g. a reduction output against a frame Hamiltonian).
    pub fn same_coefficients(&self, other: &Self) -> bool {
        self.space.dim() == other.space.dim()
            && self.constant == other.constant
            && self.linear == other.linear
            && self.quadratic == other.quadratic
    }

    /// Renders the observable in terms of the space's coordinate labels.
    pub fn render(&self) -> String {
        let mut terms: Vec<String> = Vec::new();
        if !self.constant.is_zero() {
            terms.push(self.constant.to_string());
        }
        for (a, c) in self.linear.iter().enumerate() {
            if !c.is_zero() {
                terms.push(render_term(c, self.space.label(a)));
            }
        }
        let d = self.space.dim();
        for i in 0..d {
            for j in i..d {
                let q = &self.quadratic[(i, j)];
                if q.is_zero() {
                    continue;
                }
                // f contains (1/2) Q_ij z_i z_j + (1/2) Q_ji z_j z_i.
                let coeff = if i == j { q * Scalar::ratio(1, 2) } else { q.clone() };
                let var = if i == j {
                    format!("{}^2", self.space.label(i))
                } else {
                    format!("{} {}", self.space.label(i), self.space.label(j))
                };
                terms.push(render_term(&coeff, &var));
            }
        }
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, t) in terms.iter().enumerate() {
            if k == 0 {
                out.push_str(t);
            } else if let Some(stripped) = t.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(stripped);
            } else {
                out.push_str(" + ");
                out.push_str(t);
            }
        }
        out
    }
}

fn render_term(c: &Scalar, var: &str) -> String {
    if c.is_one() {
        var.to_string()
    } else if (-c).is_one() {
        format!("-{var}")
    } else {
        format!("{c} {var}")
    }
}

impl fmt::Debug for QuadraticObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// The Poisson bracket `{f, g} = (grad f)^T Omega (grad g)`, computed
/// symbolically. The result of bracketing two quadratics is again quadratic.
pub fn poisson_bracket(
    f: &QuadraticObservable,
    g: &QuadraticObservable,
) -> Result<QuadraticObservable> {
    if f.space != g.space {
        return Err(Error::SpaceMismatch);
    }
    let omega = f.space.omega();
    let a_f = &f.linear;
    let a_g = &g.linear;
    let qf = &f.quadratic;
    let qg = &g.quadratic;

    let omega_ag = omega.mul_vec(a_g);
    let omega_af = omega.mul_vec(a_f);
    let constant = dot(a_f, &omega_ag);
    let lin1 = qf.mul_vec(&omega_ag);
    let lin2 = qg.mul_vec(&omega_af);
    let linear: Vec<Scalar> = lin1.iter().zip(&lin2).map(|(x, y)| x - y).collect();
    let qf_w_qg = &(qf * &omega) * qg;
    let qg_w_qf = &(qg * &omega) * qf;
    let quadratic = &qf_w_qg - &qg_w_qf;
    Ok(QuadraticObservable { space: f.space.clone(), constant, linear, quadratic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn obs_eq(a: &QuadraticObservable, b: &QuadraticObservable) -> bool {
        a.sub(b).unwrap().is_zero()
    }

    #[test]
    fn canonical_pairs() {
        let s = PhaseSpace::new(2);
        let q1 = QuadraticObservable::position(&s, 0);
        let p1 = QuadraticObservable::momentum(&s, 0);
        let q2 = QuadraticObservable::position(&s, 1);
        assert_eq!(poisson_bracket(&q1, &p1).unwrap().constant_part(), &int(1));
        assert!(poisson_bracket(&q1, &q2).unwrap().is_zero());
        assert_eq!(poisson_bracket(&p1, &q1).unwrap().constant_part(), &int(-1));
    }

    #[test]
    fn constraint_bracket_at_unit_masses() {
        // [sum q_i, sum p_i / mu_i] = sum 1/mu_i = 9 at mu_i = 1/3.
        let s = PhaseSpace::new(3);
        let phi1 = QuadraticObservable::linear_form(
            &s,
            vec![int(1), int(1), int(1), int(0), int(0), int(0)],
        );
        let phi2 = QuadraticObservable::linear_form(
            &s,
            vec![int(0), int(0), int(0), int(3), int(3), int(3)],
        );
        assert_eq!(poisson_bracket(&phi1, &phi2).unwrap().constant_part(), &int(9));
    }

    #[test]
    fn bracket_with_quadratic_hamiltonian() {
        // H = p^2/2m: {q, H} = p/m, {p, H} = 0.
        let s = PhaseSpace::new(1);
        let m = int(2);
        let mut qmat = Mat::zeros(2, 2);
        qmat[(1, 1)] = m.recip();
        let h = QuadraticObservable::quadratic_form(&s, qmat);
        let q = QuadraticObservable::position(&s, 0);
        let p = QuadraticObservable::momentum(&s, 0);
        let qdot = poisson_bracket(&q, &h).unwrap();
        assert!(obs_eq(&qdot, &p.scale(&rat(1, 2))));
        assert!(poisson_bracket(&p, &h).unwrap().is_zero());
    }

    #[test]
    fn product_rule_degree_guard() {
        let s = PhaseSpace::new(1);
        let q = QuadraticObservable::position(&s, 0);
        let p = QuadraticObservable::momentum(&s, 0);
        let qp = q.mul(&p).unwrap();
        assert_eq!(qp.degree(), 2);
        assert!(qp.mul(&q).is_err());
    }

    #[test]
    fn substitute_identity_is_noop() {
        let s = PhaseSpace::new(1);
        let p = QuadraticObservable::momentum(&s, 0);
        let h = p.mul(&p).unwrap().scale(&rat(1, 2));
        let id = Mat::identity(2);
        let zero = vec![int(0), int(0)];
        let back = h.substitute_affine(&id, &zero, &s).unwrap();
        assert!(obs_eq(&back, &h));
    }

    #[test]
    fn evaluation_matches_expansion() {
        let s = PhaseSpace::new(1);
        let q = QuadraticObservable::position(&s, 0);
        let p = QuadraticObservable::momentum(&s, 0);
        // f = 3 + 2q + qp
        let f = QuadraticObservable::constant(&s, int(3))
            .add(&q.scale(&int(2)))
            .unwrap()
            .add(&q.mul(&p).unwrap())
            .unwrap();
        let val = f.evaluate(&[rat(1, 2), int(4)]);
        assert_eq!(val, int(3) + int(1) + int(2));
    }

    #[test]
    fn render_is_readable() {
        let s = PhaseSpace::new(2);
        let q1 = QuadraticObservable::position(&s, 0);
        let p2 = QuadraticObservable::momentum(&s, 1);
        let f = q1.mul(&p2).unwrap().sub(&q1.scale(&rat(1, 3))).unwrap();
        assert_eq!(f.render(), "-1/3 q1 + q1 p2");
    }
}
