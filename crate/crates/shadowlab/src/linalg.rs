//! Dense complex linear algebra, superoperators and seeded random streams.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const STRUCT_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

pub fn hadamard() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_row_slice(2, 2, &[cr(s), cr(s), cr(s), cr(-s)])
}

/// Kronecker product, `a` acting on the more significant factor.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    let mut out = identity(1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// Hilbert-Schmidt inner product Tr[a† b].
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitian_deviation(a: &ComplexMatrix) -> f64 {
    frobenius(&(a - a.adjoint()))
}

pub fn is_hermitian(a: &ComplexMatrix, tol: f64) -> bool {
    a.is_square() && hermitian_deviation(a) <= tol * frobenius(a).max(1.0)
}

pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    frobenius(&(u.adjoint() * u - identity(u.ncols())))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::Shape(format!("{:?} is not square", a.shape())));
    }
    let dev = hermitian_deviation(a);
    if dev > 1e-10 * frobenius(a).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((vec![], ComplexMatrix::zeros(0, 0)));
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = nalgebra::linalg::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

pub fn spectral_norm_hermitian(a: &ComplexMatrix) -> Result<f64> {
    let (w, _) = hermitian_eig(a)?;
    Ok(w.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let g = a.adjoint() * a;
    match hermitian_eig(&g) {
        Ok((w, _)) => w.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => nalgebra::linalg::SVD::new(a.clone(), false, false)
            .singular_values
            .iter()
            .fold(0.0, |m: f64, x| m.max(*x)),
    }
}

/// Matrix exponential. Hermitian and skew-Hermitian inputs go through the
/// eigendecomposition; everything else uses scaling and squaring.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let scale = frobenius(a).max(1.0);
    let skew = frobenius(&(a + a.adjoint()));
    if skew <= 1e-13 * scale {
        let h = a.map(|x| x * c(0.0, -1.0));
        if let Ok((w, v)) = hermitian_eig(&h) {
            let d = DVector::from_iterator(n, w.iter().map(|x| C64::from_polar(1.0, *x)));
            return &v * ComplexMatrix::from_diagonal(&d) * v.adjoint();
        }
    }
    if hermitian_deviation(a) <= 1e-13 * scale {
        if let Ok((w, v)) = hermitian_eig(a) {
            let d = DVector::from_iterator(n, w.iter().map(|x| cr(x.exp())));
            return &v * ComplexMatrix::from_diagonal(&d) * v.adjoint();
        }
    }
    a.clone().exp()
}

/// Real antisymmetric generator A with expm(A) = q, rotation angles in (−π, π].
pub fn logm_special_orthogonal(q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = q.nrows();
    if !q.is_square() {
        return Err(Error::NotSpecialOrthogonal("not square".into()));
    }
    let imag = q.iter().map(|x| x.im.abs()).fold(0.0, f64::max);
    if imag > 1e-9 {
        return Err(Error::NotSpecialOrthogonal(format!("imaginary part {imag:.3e}")));
    }
    let r: DMatrix<f64> = q.map(|x| x.re);
    let orth = (r.transpose() * &r - DMatrix::<f64>::identity(n, n)).norm();
    if orth > 1e-9 {
        return Err(Error::NotSpecialOrthogonal(format!("QᵀQ − I = {orth:.3e}")));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > 1e-9 {
        return Err(Error::NotSpecialOrthogonal(format!("det = {det:.6}")));
    }
    let (z, t) = nalgebra::linalg::Schur::new(r).unpack();
    let mut log_t = DMatrix::<f64>::zeros(n, n);
    let mut minus_ones = Vec::new();
    let mut i = 0;
    while i < n {
        let is_block = i + 1 < n && t[(i + 1, i)].abs() > 1e-12;
        if is_block {
            let cos = 0.5 * (t[(i, i)] + t[(i + 1, i + 1)]);
            let sin = 0.5 * (t[(i + 1, i)] - t[(i, i + 1)]);
            let theta = sin.atan2(cos);
            log_t[(i + 1, i)] = theta;
            log_t[(i, i + 1)] = -theta;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                minus_ones.push(i);
            }
            i += 1;
        }
    }
    if minus_ones.len() % 2 == 1 {
        return Err(Error::NotSpecialOrthogonal("odd number of −1 eigenvalues".into()));
    }
    for pair in minus_ones.chunks(2) {
        log_t[(pair[1], pair[0])] = std::f64::consts::PI;
        log_t[(pair[0], pair[1])] = -std::f64::consts::PI;
    }
    let a = &z * log_t * z.transpose();
    let a = (&a - a.transpose()) * 0.5;
    Ok(a.map(cr))
}

/// Column-stacking vectorization.
pub fn vectorize(a: &ComplexMatrix) -> ComplexVector {
    DVector::from_column_slice(a.as_slice())
}

pub fn devectorize(v: &ComplexVector) -> Result<ComplexMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::Shape(format!("length {} is not a perfect square", v.len())));
    }
    Ok(ComplexMatrix::from_column_slice(d, d, v.as_slice()))
}

pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

/// Seeded ChaCha20 stream; (seed, stream id) fixes the draw sequence.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Stream positioned at a recorded word offset.
    pub fn at(seed: u64, stream: u64, word_pos: u128) -> Self {
        let mut s = Self::new(seed, stream);
        s.rng.set_word_pos(word_pos);
        s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Independent child stream derived from this one's seed.
    pub fn split(&self, id: u64) -> Self {
        Self::new(self.seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(self.stream + 1), id)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Complex standard Gaussian with E|z|² = 1.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c(self.normal() * s, self.normal() * s)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub fn random_pure_state(d: usize, rng: &mut RandomStream) -> ComplexVector {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let v = DVector::from_iterator(d, (0..d).map(|_| rng.complex_normal()));
        let norm = v.norm();
        if norm > 1e-300 {
            return v / cr(norm);
        }
    }
}

pub fn random_hermitian(d: usize, rng: &mut RandomStream) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal());
    (&g + g.adjoint()).scale(0.5)
}

pub fn random_density_matrix(d: usize, rank: usize, rng: &mut RandomStream) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, rank.max(1), |_, _| rng.complex_normal());
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Dense superoperator on column-stacked vectorizations.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    pub dim: usize,
    pub matrix: ComplexMatrix,
}

impl SuperOperator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::Shape(format!(
                "superoperator on d={dim} needs {0}x{0}, got {1:?}",
                dim * dim,
                matrix.shape()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: identity(dim * dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::zeros(dim * dim, dim * dim) }
    }

    /// X ↦ U X U†, i.e. conj(U) ⊗ U.
    pub fn conjugation(u: &ComplexMatrix) -> Self {
        Self { dim: u.nrows(), matrix: u.map(|x| x.conj()).kronecker(u) }
    }

    pub fn apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.matrix * vectorize(a);
        ComplexMatrix::from_column_slice(self.dim, self.dim, v.as_slice())
    }

    pub fn compose(&self, inner: &SuperOperator) -> SuperOperator {
        SuperOperator { dim: self.dim, matrix: &self.matrix * &inner.matrix }
    }

    pub fn hs_adjoint(&self) -> SuperOperator {
        SuperOperator { dim: self.dim, matrix: self.matrix.adjoint() }
    }

    pub fn self_adjoint_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    pub fn add_rank_one(&mut self, v: &ComplexVector, weight: f64) {
        self.matrix.ger(cr(weight), v, &v.conjugate(), cr(1.0));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        frobenius(&(a - b)) <= tol
    }

    #[test]
    fn kron_basics() {
        let i2 = identity(2);
        assert_eq!(tensor_product(&i2, &i2), identity(4));
        let zz = tensor_product(&pauli_z(), &pauli_z());
        assert_eq!(zz[(0, 0)], cr(1.0));
        assert_eq!(zz[(3, 3)], cr(1.0));
        assert_eq!(zz[(1, 1)], cr(-1.0));
        let xi = tensor_product(&pauli_x(), &i2);
        let ket00 = DVector::from_vec(vec![cr(1.0), cr(0.0), cr(0.0), cr(0.0)]);
        let out = xi * ket00;
        assert_eq!(out[2], cr(1.0));
    }

    #[test]
    fn hs_inner_examples() {
        assert!((hs_inner(&pauli_x(), &pauli_x()).unwrap() - cr(2.0)).norm() < 1e-15);
        assert!(hs_inner(&pauli_x(), &pauli_z()).unwrap().norm() < 1e-15);
        let d = 5;
        let a = identity(d).scale(1.0 / (d as f64).sqrt());
        assert!((hs_inner(&a, &a).unwrap() - cr(1.0)).norm() < 1e-14);
        assert!(hs_inner(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn eig_examples() {
        let (w, _) = hermitian_eig(&pauli_z()).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
        let (w, _) = hermitian_eig(&hadamard()).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
        assert!(hermitian_eig(&(pauli_x() * c(0.0, 1.0) + pauli_z())).is_err());
        let mut rng = RandomStream::new(1, 0);
        let a = random_hermitian(12, &mut rng);
        let (w, v) = hermitian_eig(&a).unwrap();
        let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(12, w.iter().map(|x| cr(*x))));
        assert!(approx(&(&v * d * v.adjoint()), &a, 1e-9));
        assert!(unitarity_deviation(&v) < 1e-9);
    }

    #[test]
    fn expm_examples() {
        assert_eq!(expm(&ComplexMatrix::zeros(3, 3)), identity(3));
        let a = pauli_z() * c(0.0, -std::f64::consts::FRAC_PI_2);
        let e = expm(&a);
        let want = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, -1.0), cr(0.0), cr(0.0), c(0.0, 1.0)]);
        assert!(approx(&e, &want, 1e-12));
        let mut rng = RandomStream::new(2, 0);
        let h = random_hermitian(6, &mut rng);
        let u = expm(&(h * c(0.0, 1.0)));
        assert!(unitarity_deviation(&u) < 1e-9);
        let g = ComplexMatrix::from_fn(4, 4, |_, _| rng.complex_normal());
        let e1 = expm(&g);
        let e2 = g.clone().exp();
        assert!(frobenius(&(e1 - e2)) < 1e-10);
    }

    #[test]
    fn logm_examples() {
        let z = logm_special_orthogonal(&identity(4)).unwrap();
        assert!(frobenius(&z) < 1e-14);
        let t: f64 = 0.3;
        let q = ComplexMatrix::from_row_slice(2, 2, &[cr(t.cos()), cr(-t.sin()), cr(t.sin()), cr(t.cos())]);
        let a = logm_special_orthogonal(&q).unwrap();
        let want = ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), cr(-0.3), cr(0.3), cr(0.0)]);
        assert!(approx(&a, &want, 1e-12));
        let minus = identity(2).scale(-1.0);
        let a = logm_special_orthogonal(&minus).unwrap();
        assert!(approx(&expm(&a), &minus, 1e-12));
        assert!((a[(1, 0)].re.abs() - std::f64::consts::PI).abs() < 1e-12);
        let refl = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![cr(1.0), cr(-1.0)]));
        assert!(logm_special_orthogonal(&refl).is_err());
    }

    #[test]
    fn vectorize_examples() {
        let mut e01 = ComplexMatrix::zeros(2, 2);
        e01[(0, 1)] = cr(1.0);
        let v = vectorize(&e01);
        assert_eq!(v[2], cr(1.0));
        assert_eq!(v.iter().filter(|x| x.norm() > 0.0).count(), 1);
        assert_eq!(devectorize(&v).unwrap(), e01);
        let x = vectorize(&pauli_x());
        assert!((x.dotc(&x) - cr(2.0)).norm() < 1e-15);
        assert!(devectorize(&DVector::from_element(3, cr(0.0))).is_err());
    }

    #[test]
    fn pure_state_examples() {
        let mut rng = RandomStream::new(3, 0);
        let v = random_pure_state(7, &mut rng);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let one = random_pure_state(1, &mut rng);
        assert!((one[0].norm() - 1.0).abs() < 1e-12);
        let d = 4;
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| random_pure_state(d, &mut rng)[0].norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 1.0 / d as f64).abs() < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn stream_determinism() {
        let mut a = RandomStream::new(9, 4);
        let mut b = RandomStream::new(9, 4);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
        let mut c1 = RandomStream::new(9, 5);
        assert_ne!(xs[0], c1.next_u64());
        let mut a = RandomStream::new(11, 2);
        a.next_u64();
        let pos = a.word_pos();
        let x = a.next_u64();
        let mut r = RandomStream::at(11, 2, pos);
        assert_eq!(r.next_u64(), x);
    }

    #[test]
    fn superoperator_conjugation_matches_direct() {
        let mut rng = RandomStream::new(4, 0);
        let u = expm(&(random_hermitian(3, &mut rng) * c(0.0, 1.0)));
        let x = ComplexMatrix::from_fn(3, 3, |_, _| rng.complex_normal());
        let s = SuperOperator::conjugation(&u);
        assert!(approx(&s.apply(&x), &(&u * &x * u.adjoint()), 1e-12));
    }
}
