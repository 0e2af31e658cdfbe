//! Spin-j matrices: angular momentum, Wigner-D, Clebsch–Gordan and multipole operators T_LM.
//!
//! Basis order is m = j, j-1, ..., -j throughout.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::rotations::{Rotation, Vec3};

pub type CMat = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A half-integer spin stored as 2j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    pub two_j: u32,
}

impl Spin {
    pub fn new(j: f64) -> Result<Spin> {
        let t = 2.0 * j;
        if !(t >= 0.0) || (t - t.round()).abs() > 1e-9 || t > 1000.0 {
            return invalid(format!("j = {j} is not a nonnegative half-integer"));
        }
        Ok(Spin { two_j: t.round() as u32 })
    }

    pub fn from_two_j(two_j: u32) -> Spin {
        Spin { two_j }
    }

    pub fn half() -> Spin {
        Spin { two_j: 1 }
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Accepts "3/2", "1", "1.5".
    pub fn parse(s: &str) -> Result<Spin> {
        let s = s.trim();
        let j = if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad spin `{s}`")))?;
            let d: f64 = d.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad spin `{s}`")))?;
            n / d
        } else {
            s.parse().map_err(|_| Error::InvalidArgument(format!("bad spin `{s}`")))?
        };
        Spin::new(j)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_j.is_multiple_of(2) {
            write!(f, "{}", self.two_j / 2)
        } else {
            write!(f, "{}/2", self.two_j)
        }
    }
}

/// Dense operator on a tensor product of spins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperator {
    pub dims: Vec<usize>,
    pub matrix: CMat,
}

impl SpinOperator {
    pub fn new(dims: Vec<usize>, matrix: CMat) -> Result<SpinOperator> {
        let d: usize = dims.iter().product();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows() });
        }
        Ok(SpinOperator { dims, matrix })
    }

    pub fn single(matrix: CMat) -> SpinOperator {
        SpinOperator { dims: vec![matrix.nrows()], matrix }
    }

    pub fn identity(dims: Vec<usize>) -> SpinOperator {
        let d = dims.iter().product();
        SpinOperator { dims, matrix: CMat::identity(d, d) }
    }

    pub fn zeros(dims: Vec<usize>) -> SpinOperator {
        let d = dims.iter().product();
        SpinOperator { dims, matrix: CMat::zeros(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> SpinOperator {
        SpinOperator { dims: self.dims.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Hilbert–Schmidt inner product Tr(A† B).
    pub fn hs_inner(&self, other: &SpinOperator) -> Complex64 {
        hs_inner(&self.matrix, &other.matrix)
    }

    pub fn hs_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Supremum operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    pub fn scaled(&self, s: f64) -> SpinOperator {
        SpinOperator { dims: self.dims.clone(), matrix: &self.matrix * c(s) }
    }
}

pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn op_norm(m: &CMat) -> f64 {
    let herm = (m - m.adjoint()).norm() <= 1e-12 * m.norm().max(1.0);
    if herm {
        let h = (m + m.adjoint()) * c(0.5);
        h.symmetric_eigenvalues().iter().fold(0.0f64, |a, v| a.max(v.abs()))
    } else {
        let g = m.adjoint() * m;
        g.symmetric_eigenvalues().iter().fold(0.0f64, |a, v| a.max(*v)).max(0.0).sqrt()
    }
}

/// exp(-i H t) for Hermitian `h`, by eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let hs = (h + h.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(hs);
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|l| Complex64::from_polar(1.0, -l * t)),
    );
    let mut vd = v.clone();
    for (j, mut col) in vd.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    vd * v.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn check_spin(j: f64) -> Result<Spin> {
    Spin::new(j)
}

/// (Jx, Jy, Jz) as raw matrices for a spin given by 2j.
pub fn spin_matrices(spin: Spin) -> [CMat; 3] {
    let d = spin.dim();
    let j = spin.j();
    let mut jp = CMat::zeros(d, d);
    let mut jz = CMat::zeros(d, d);
    for i in 0..d {
        let m = j - i as f64;
        jz[(i, i)] = c(m);
        if i > 0 {
            // <m+1| J+ |m>, row i-1 holds m+1
            jp[(i - 1, i)] = c((j * (j + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * c(0.5);
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    [jx, jy, jz]
}

pub fn angular_momentum_ops(j: f64) -> Result<(SpinOperator, SpinOperator, SpinOperator)> {
    let spin = check_spin(j)?;
    let [x, y, z] = spin_matrices(spin);
    Ok((SpinOperator::single(x), SpinOperator::single(y), SpinOperator::single(z)))
}

/// J·n for a unit axis.
pub fn spin_projection(spin: Spin, n: Vec3) -> CMat {
    let [jx, jy, jz] = spin_matrices(spin);
    jx * c(n[0]) + jy * c(n[1]) + jz * c(n[2])
}

pub fn rotation_unitary(spin: Spin, r: &Rotation) -> CMat {
    let (axis, angle) = r.axis_angle();
    if angle == 0.0 {
        return CMat::identity(spin.dim(), spin.dim());
    }
    expm_hermitian(&spin_projection(spin, axis), angle)
}

/// D^(j)(r) = exp(-iθ J·n).
pub fn wigner_d(j: f64, r: &Rotation) -> Result<SpinOperator> {
    let spin = check_spin(j)?;
    Ok(SpinOperator::single(rotation_unitary(spin, r)))
}

fn factorial(n: i64) -> BigInt {
    (1..=n.max(1)).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn fact_ratio(num: &[i64], den: &[i64]) -> BigRational {
    let n = num.iter().fold(BigInt::one(), |a, &k| a * factorial(k));
    let d = den.iter().fold(BigInt::one(), |a, &k| a * factorial(k));
    BigRational::new(n, d)
}

/// Clebsch–Gordan coefficient with all arguments doubled, Condon–Shortley phase.
pub fn clebsch_gordan_doubled(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tj1 < 0 || tj2 < 0 || tj < 0 {
        return 0.0;
    }
    if tm1 + tm2 != tm || tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj + tm) % 2 != 0 {
        return 0.0;
    }
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i64| x / 2;
    let (a, b, cc) = (h(tj1 + tj2 - tj), h(tj1 - tj2 + tj), h(-tj1 + tj2 + tj));
    let tri = fact_ratio(&[a, b, cc], &[h(tj1 + tj2 + tj) + 1]);
    let pref = tri
        * BigRational::from_integer(BigInt::from(tj + 1))
        * fact_ratio(&[h(tj + tm), h(tj - tm), h(tj1 - tm1), h(tj1 + tm1), h(tj2 - tm2), h(tj2 + tm2)], &[]);
    let mut sum = BigRational::zero();
    let kmax = a.min(h(tj1 - tm1)).min(h(tj2 + tm2));
    for k in 0..=kmax {
        let d = [k, a - k, h(tj1 - tm1) - k, h(tj2 + tm2) - k, h(tj - tj2 + tm1) + k, h(tj - tj1 - tm2) + k];
        if d.iter().any(|&x| x < 0) {
            continue;
        }
        let term = fact_ratio(&[], &d);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let sign = if sum.is_negative() { -1.0 } else { 1.0 };
    let sq = pref * &sum * &sum;
    let v = sq.numer().to_f64().unwrap() / sq.denom().to_f64().unwrap();
    sign * v.sqrt()
}

fn doubled(x: f64, what: &str) -> Result<i64> {
    let t = 2.0 * x;
    if (t - t.round()).abs() > 1e-9 {
        return invalid(format!("{what} = {x} is not a half-integer"));
    }
    Ok(t.round() as i64)
}

/// ⟨j1 m1; j2 m2 | J M⟩.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<f64> {
    Ok(clebsch_gordan_doubled(
        doubled(j1, "j1")?,
        doubled(m1, "m1")?,
        doubled(j2, "j2")?,
        doubled(m2, "m2")?,
        doubled(j, "J")?,
        doubled(m, "M")?,
    ))
}

/// All T_LM for one spin, indexed `[L][L - M]`.
pub struct MultipoleBasis {
    pub spin: Spin,
    pub ops: Vec<Vec<CMat>>,
}

impl MultipoleBasis {
    pub fn get(&self, l: usize, m: i64) -> &CMat {
        &self.ops[l][(l as i64 - m) as usize]
    }
}

fn build_basis(spin: Spin) -> MultipoleBasis {
    let d = spin.dim();
    let tj = spin.two_j as i64;
    let mut ops = Vec::new();
    for l in 0..=spin.two_j as i64 {
        let norm = ((2 * l + 1) as f64 / (tj + 1) as f64).sqrt();
        let mut row = Vec::new();
        for mm in (-l..=l).rev() {
            let mut t = CMat::zeros(d, d);
            for col in 0..d {
                let tm = tj - 2 * col as i64;
                let tmp = tm + 2 * mm;
                if tmp.abs() > tj {
                    continue;
                }
                let r = ((tj - tmp) / 2) as usize;
                t[(r, col)] = c(norm * clebsch_gordan_doubled(tj, tm, 2 * l, 2 * mm, tj, tmp));
            }
            row.push(t);
        }
        ops.push(row);
    }
    MultipoleBasis { spin, ops }
}

fn basis_cache() -> &'static RwLock<HashMap<u32, Arc<MultipoleBasis>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<MultipoleBasis>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached multipole basis for `spin`.
pub fn multipole_basis(spin: Spin) -> Arc<MultipoleBasis> {
    if let Some(b) = basis_cache().read().unwrap().get(&spin.two_j) {
        return b.clone();
    }
    let built = Arc::new(build_basis(spin));
    basis_cache().write().unwrap().entry(spin.two_j).or_insert(built).clone()
}

pub fn multipole_operator(j: f64, l: i64, m: i64) -> Result<SpinOperator> {
    let spin = check_spin(j)?;
    if l < 0 || l > spin.two_j as i64 || m.abs() > l {
        return invalid(format!("T_{{{l},{m}}} out of range for j = {spin}"));
    }
    Ok(SpinOperator::single(multipole_basis(spin).get(l as usize, m).clone()))
}

/// Rank-L spinor h_LM, stored for M = L, L-1, ..., -L.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleVector {
    pub l: usize,
    pub components: Vec<Complex64>,
}

impl MultipoleVector {
    pub fn component(&self, m: i64) -> Complex64 {
        self.components[(self.l as i64 - m) as usize]
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn multipole_decompose_matrix(h: &CMat, spin: Spin) -> Result<Vec<MultipoleVector>> {
    if h.nrows() != spin.dim() || h.ncols() != spin.dim() {
        return Err(Error::DimensionMismatch { expected: spin.dim(), got: h.nrows() });
    }
    let basis = multipole_basis(spin);
    Ok(basis
        .ops
        .iter()
        .enumerate()
        .map(|(l, row)| MultipoleVector { l, components: row.iter().map(|t| hs_inner(t, h)).collect() })
        .collect())
}

/// h_LM = Tr(T†_LM H) for L = 0..2j.
pub fn multipole_decompose(h: &SpinOperator, j: f64) -> Result<Vec<MultipoleVector>> {
    multipole_decompose_matrix(&h.matrix, check_spin(j)?)
}

pub fn multipole_reconstruct(parts: &[MultipoleVector], spin: Spin) -> CMat {
    let basis = multipole_basis(spin);
    let d = spin.dim();
    let mut out = CMat::zeros(d, d);
    for v in parts {
        for (k, z) in v.components.iter().enumerate() {
            out += &basis.ops[v.l][k] * *z;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn spin_half_ops() {
        let (_, _, jz) = angular_momentum_ops(0.5).unwrap();
        assert!(close(&jz.matrix, &CMat::from_diagonal(&DVector::from_vec(vec![c(0.5), c(-0.5)])), 1e-15));
        let (_, _, jz) = angular_momentum_ops(1.0).unwrap();
        assert!(((&jz.matrix * &jz.matrix).trace().re - 2.0).abs() < 1e-14);
        assert!(angular_momentum_ops(0.3).is_err());
    }

    #[test]
    fn commutation_and_casimir() {
        for tj in 0..8 {
            let s = Spin::from_two_j(tj);
            let [x, y, z] = spin_matrices(s);
            let comm = &x * &y - &y * &x;
            assert!(close(&comm, &(&z * I), 1e-12));
            let j = s.j();
            let cas = &x * &x + &y * &y + &z * &z;
            assert!(close(&cas, &(CMat::identity(s.dim(), s.dim()) * c(j * (j + 1.0))), 1e-12));
            let ops = [&x, &y, &z];
            for a in 0..3 {
                for b in 0..3 {
                    let t = (ops[a] * ops[b]).trace().re;
                    let want = if a == b { j * (j + 1.0) * (2.0 * j + 1.0) / 3.0 } else { 0.0 };
                    assert!((t - want).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn wigner_d_examples() {
        let id = wigner_d(2.5, &Rotation::IDENTITY).unwrap();
        assert!(close(&id.matrix, &CMat::identity(6, 6), 1e-14));
        let th = 0.7;
        let r = Rotation::from_axis_angle([0.0, 0.0, 1.0], th).unwrap();
        let d = wigner_d(0.5, &r).unwrap().matrix;
        assert!((d[(0, 0)] - Complex64::from_polar(1.0, -th / 2.0)).norm() < 1e-14);
        assert!((d[(1, 1)] - Complex64::from_polar(1.0, th / 2.0)).norm() < 1e-14);
        let r = Rotation::from_axis_angle([1.0, 0.0, 0.0], PI).unwrap();
        let d = wigner_d(0.5, &r).unwrap().matrix;
        assert!((d[(0, 1)] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!(d[(0, 0)].norm() < 1e-14);
    }

    #[test]
    fn cg_examples() {
        let v = clebsch_gordan(1.0, 1.0, 1.0, -1.0, 0.0, 0.0).unwrap();
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let v = clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0.0, 0.0).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(clebsch_gordan(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(clebsch_gordan(0.3, 0.0, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn multipole_examples() {
        let t00 = multipole_operator(1.5, 0, 0).unwrap();
        assert!(close(&t00.matrix, &(CMat::identity(4, 4) * c(0.5)), 1e-14));
        let t10 = multipole_operator(1.0, 1, 0).unwrap();
        let [_, _, jz] = spin_matrices(Spin::from_two_j(2));
        let ratio = t10.matrix[(0, 0)].re / jz[(0, 0)].re;
        assert!(ratio > 0.0 && close(&t10.matrix, &(jz * c(ratio)), 1e-14));
        assert!(multipole_operator(1.0, 3, 0).is_err());
    }

    #[test]
    fn decompose_jz_half() {
        let (_, _, jz) = angular_momentum_ops(0.5).unwrap();
        let parts = multipole_decompose(&jz, 0.5).unwrap();
        assert!(parts[0].norm() < 1e-15);
        assert!((parts[1].component(0).re - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(parts[1].component(1).norm() < 1e-15);
        let id = SpinOperator::identity(vec![3]);
        let parts = multipole_decompose(&id, 1.0).unwrap();
        assert!(parts[1].norm() < 1e-15 && parts[2].norm() < 1e-15);
    }

    #[test]
    fn spin_parse_display() {
        assert_eq!(Spin::parse("3/2").unwrap().two_j, 3);
        assert_eq!(Spin::parse("1.5").unwrap().two_j, 3);
        assert_eq!(Spin::parse("2").unwrap().to_string(), "2");
        assert_eq!(Spin::parse("5/2").unwrap().to_string(), "5/2");
        assert!(Spin::parse("x").is_err());
    }
}
