//! 4x4 Dirac matrices, the chiral matrix, the quadratic Thirring matrix and
//! the spinor bilinears that appear in the short-wave conservation laws.
//!
//! The concrete representation is the standard (Dirac) one,
//! `a_i = [[0, sigma_i], [sigma_i, 0]]`. Nothing downstream depends on that
//! choice beyond the values of the example spinors: [`AlphaSet::check`]
//! verifies the defining relations for whatever matrices an `AlphaSet` holds.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Entrywise tolerance for the exact algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMatrix4(pub [[Complex64; 4]; 4]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor(pub [Complex64; 4]);

impl ComplexMatrix4 {
    pub const fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::scalar(ONE)
    }

    pub fn scalar(c: Complex64) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            m.0[i][i] = c;
        }
        m
    }

    /// `[[0, s], [s, 0]]` built from a 2x2 block.
    pub fn off_diagonal(s: [[Complex64; 2]; 2]) -> Self {
        let mut m = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                m.0[r][c + 2] = s[r][c];
                m.0[r + 2][c] = s[r][c];
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = self.0[c][r].conj();
            }
        }
        m
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= c);
        m
    }

    pub fn apply(&self, s: &Spinor) -> Spinor {
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.0[r];
            *o = row[0] * s.0[0] + row[1] * s.0[1] + row[2] * s.0[2] + row[3] * s.0[3];
        }
        Spinor(out)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl Add for ComplexMatrix4 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for r in 0..4 {
            for c in 0..4 {
                self.0[r][c] += rhs.0[r][c];
            }
        }
        self
    }
}

impl Sub for ComplexMatrix4 {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for r in 0..4 {
            for c in 0..4 {
                self.0[r][c] -= rhs.0[r][c];
            }
        }
        self
    }
}

impl Mul for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        m
    }
}

impl Spinor {
    pub const fn zero() -> Self {
        Self([ZERO; 4])
    }

    /// Basis spinor `e_{i+1}`.
    pub fn basis(i: usize) -> Self {
        let mut s = Self::zero();
        s.0[i] = ONE;
        s
    }

    /// `|u|^2`, the sum of squared real and imaginary parts.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `u^dag v`.
    pub fn dot(&self, other: &Spinor) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// The Hermitian form `u^dag M u`.
    pub fn bilinear(&self, m: &ComplexMatrix4) -> Complex64 {
        self.dot(&m.apply(self))
    }

    pub fn scale(&self, c: Complex64) -> Spinor {
        Spinor(self.0.map(|v| v * c))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl Add for Spinor {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Spinor([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
            self.0[3] + rhs.0[3],
        ])
    }
}

impl Sub for Spinor {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Spinor([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
            self.0[3] - rhs.0[3],
        ])
    }
}

impl Mul<f64> for Spinor {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        Spinor(self.0.map(|v| v * rhs))
    }
}

impl Neg for Spinor {
    type Output = Self;
    fn neg(self) -> Self {
        Spinor(self.0.map(|v| -v))
    }
}

/// The eight real bilinears entering the short-wave conservation laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurrentTuple {
    /// `|u|^2`
    pub density: f64,
    /// `u^dag a_i u`
    pub alpha: [f64; 3],
    /// `u^dag b u`
    pub chiral: f64,
    /// `u^dag b a_i u`
    pub chiral_alpha: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSet {
    pub a: [ComplexMatrix4; 3],
    /// `i a1 a2 a3`
    pub b: ComplexMatrix4,
    /// `b a_i`, cached for the chiral currents.
    pub ba: [ComplexMatrix4; 3],
}

impl Default for AlphaSet {
    fn default() -> Self {
        build_alpha_set()
    }
}

/// Standard Dirac representation.
pub fn build_alpha_set() -> AlphaSet {
    let sigma1 = [[ZERO, ONE], [ONE, ZERO]];
    let sigma2 = [[ZERO, -I], [I, ZERO]];
    let sigma3 = [[ONE, ZERO], [ZERO, -ONE]];
    AlphaSet::from_matrices([
        ComplexMatrix4::off_diagonal(sigma1),
        ComplexMatrix4::off_diagonal(sigma2),
        ComplexMatrix4::off_diagonal(sigma3),
    ])
}

/// Residuals of every defining relation of an [`AlphaSet`].
#[derive(Clone, Debug, Default)]
pub struct AlgebraReport {
    pub relations: Vec<(String, f64)>,
}

impl AlgebraReport {
    pub fn max_residual(&self) -> f64 {
        self.relations.iter().fold(0.0, |m, (_, r)| m.max(*r))
    }

    pub fn all_within(&self, tol: f64) -> bool {
        self.relations.iter().all(|(_, r)| *r <= tol)
    }
}

impl AlphaSet {
    pub fn from_matrices(a: [ComplexMatrix4; 3]) -> Self {
        let b = (a[0] * a[1] * a[2]).scale(I);
        let ba = [b * a[0], b * a[1], b * a[2]];
        Self { a, b, ba }
    }

    /// Hermiticity (x4), squares (x4), anticommutation (x3) and chiral
    /// commutation (x3), each as a max entrywise residual.
    pub fn check(&self) -> AlgebraReport {
        let id = ComplexMatrix4::identity();
        let mut rel = Vec::new();
        for i in 0..3 {
            rel.push((format!("a{} hermitian", i + 1), self.a[i].hermiticity_defect()));
        }
        rel.push(("b hermitian".into(), self.b.hermiticity_defect()));
        for i in 0..3 {
            rel.push((
                format!("a{}^2 = I", i + 1),
                (self.a[i] * self.a[i]).max_abs_diff(&id),
            ));
        }
        rel.push(("b^2 = I".into(), (self.b * self.b).max_abs_diff(&id)));
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            rel.push((
                format!("{{a{}, a{}}} = 0", i + 1, j + 1),
                self.a[i].anticommutator(&self.a[j]).max_abs(),
            ));
        }
        for i in 0..3 {
            rel.push((
                format!("[b, a{}] = 0", i + 1),
                self.b.commutator(&self.a[i]).max_abs(),
            ));
        }
        AlgebraReport { relations: rel }
    }

    /// Quadratic Thirring matrix `(u^dag u) I - (u^dag b u) b`.
    pub fn thirring_matrix(&self, s: &Spinor) -> ComplexMatrix4 {
        let chiral = s.bilinear(&self.b).re;
        self.thirring_from_observables(s.norm_sqr(), chiral)
    }

    /// The Thirring matrix assembled from given values of `|u|^2` and `u^dag b u`.
    pub fn thirring_from_observables(&self, density: f64, chiral: f64) -> ComplexMatrix4 {
        ComplexMatrix4::scalar(Complex64::new(density, 0.0))
            - self.b.scale(Complex64::new(chiral, 0.0))
    }

    /// `lambda U(s) + V I`.
    pub fn interaction_matrix(&self, s: &Spinor, lambda: f64, potential: f64) -> ComplexMatrix4 {
        self.thirring_matrix(s).scale(Complex64::new(lambda, 0.0))
            + ComplexMatrix4::scalar(Complex64::new(potential, 0.0))
    }

    pub fn currents(&self, s: &Spinor) -> CurrentTuple {
        CurrentTuple {
            density: s.norm_sqr(),
            alpha: std::array::from_fn(|i| s.bilinear(&self.a[i]).re),
            chiral: s.bilinear(&self.b).re,
            chiral_alpha: std::array::from_fn(|i| s.bilinear(&self.ba[i]).re),
        }
    }

    /// Largest imaginary part among the complex bilinears behind [`Self::currents`].
    pub fn current_imaginary_residue(&self, s: &Spinor) -> f64 {
        let mut m = s.bilinear(&self.b).im.abs();
        for i in 0..3 {
            m = m
                .max(s.bilinear(&self.a[i]).im.abs())
                .max(s.bilinear(&self.ba[i]).im.abs());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spinor(rng: &mut impl Rng) -> Spinor {
        Spinor(std::array::from_fn(|_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
    }

    #[test]
    fn dirac_representation_satisfies_algebra() {
        let a = build_alpha_set();
        let report = a.check();
        assert_eq!(report.relations.len(), 14);
        assert!(report.all_within(ALGEBRA_TOL), "{report:?}");
    }

    #[test]
    fn a1_squared_is_identity_and_pair_anticommutes() {
        let a = build_alpha_set();
        assert_eq!(a.a[0] * a.a[0], ComplexMatrix4::identity());
        assert_eq!(a.a[0].anticommutator(&a.a[1]).max_abs(), 0.0);
    }

    #[test]
    fn chiral_matrix_is_minus_identity_off_diagonal() {
        // sigma1 sigma2 sigma3 = i I2, so i a1 a2 a3 = offdiag(-I2, -I2).
        let a = build_alpha_set();
        let mut expected = ComplexMatrix4::zero();
        for r in 0..2 {
            expected.0[r][r + 2] = -ONE;
            expected.0[r + 2][r] = -ONE;
        }
        assert!(a.b.max_abs_diff(&expected) <= ALGEBRA_TOL);
    }

    #[test]
    fn thirring_of_zero_and_first_basis_spinor() {
        let a = build_alpha_set();
        assert_eq!(a.thirring_matrix(&Spinor::zero()), ComplexMatrix4::zero());
        let u = a.thirring_matrix(&Spinor::basis(0));
        assert!(u.max_abs_diff(&ComplexMatrix4::identity()) <= ALGEBRA_TOL);
    }

    #[test]
    fn interaction_matrix_examples() {
        let a = build_alpha_set();
        assert_eq!(
            a.interaction_matrix(&Spinor::zero(), 1.0, 0.0),
            ComplexMatrix4::zero()
        );
        let m = a.interaction_matrix(&Spinor::zero(), 1.0, 2.5);
        assert!(m.max_abs_diff(&ComplexMatrix4::scalar(Complex64::new(2.5, 0.0))) == 0.0);
        let m = a.interaction_matrix(&Spinor::basis(0), 1.0, 1.0);
        assert!(m.max_abs_diff(&ComplexMatrix4::scalar(Complex64::new(2.0, 0.0))) <= ALGEBRA_TOL);
    }

    #[test]
    fn thirring_hermitian_and_commutes_over_random_spinors() {
        let a = build_alpha_set();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let s = random_spinor(&mut rng);
            let u = a.thirring_matrix(&s);
            assert!(u.hermiticity_defect() <= ALGEBRA_TOL);
            // Explicit commutator, independent of the `commutator` helper.
            let mut c = ComplexMatrix4::zero();
            for r in 0..4 {
                for col in 0..4 {
                    let mut acc = ZERO;
                    for k in 0..4 {
                        acc += u.0[r][k] * a.a[1].0[k][col] - a.a[1].0[r][k] * u.0[k][col];
                    }
                    c.0[r][col] = acc;
                }
            }
            assert!(c.max_abs() <= 1e-13);
            for ai in &a.a {
                assert!(u.commutator(ai).max_abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn thirring_is_quadratically_homogeneous() {
        let a = build_alpha_set();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let s = random_spinor(&mut rng);
            let c: f64 = rng.random_range(-3.0..3.0);
            let lhs = a.thirring_matrix(&(s * c));
            let rhs = a.thirring_matrix(&s).scale(Complex64::new(c * c, 0.0));
            assert!(lhs.max_abs_diff(&rhs) <= 1e-13 * (1.0 + rhs.max_abs()));
        }
    }

    #[test]
    fn currents_examples() {
        let a = build_alpha_set();
        let z = a.currents(&Spinor::zero());
        assert_eq!(z.density, 0.0);
        assert_eq!(z.alpha, [0.0; 3]);
        assert_eq!(z.chiral, 0.0);
        assert_eq!(z.chiral_alpha, [0.0; 3]);

        let e1 = a.currents(&Spinor::basis(0));
        assert_eq!(e1.density, 1.0);
        assert_eq!(e1.alpha[2], 0.0);
        assert_eq!(e1.chiral, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let s = random_spinor(&mut rng);
            assert!(a.current_imaginary_residue(&s) <= ALGEBRA_TOL);
        }
    }
}
