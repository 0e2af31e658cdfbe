//! Group averaging Π_G, invariant subspaces and decoupling-group selection.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::multispin::{global_rotation, SpinEnsemble};
use crate::rotations::PointGroup;
use crate::spin_algebra::{c, multipole_basis, rotation_unitary, CMat, Spin, SpinOperator};

pub const DEFAULT_TOL: f64 = 1e-10;
const EIGEN_ONE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SymmetrizedResult {
    pub averaged: SpinOperator,
    pub is_identity_multiple: bool,
    /// ‖Π_G(S) − (Tr S/d)·1‖_HS relative to ‖S‖_HS.
    pub residual_norm: f64,
}

pub fn group_unitaries(group: &PointGroup, spins: &[Spin]) -> Vec<CMat> {
    let ens = SpinEnsemble { spins: spins.to_vec() };
    group.elements.iter().map(|g| global_rotation(g, &ens).matrix).collect()
}

fn tree_sum(mut terms: Vec<CMat>) -> CMat {
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().expect("nonempty")
}

/// (1/|G|) Σ U_g† S U_g with pairwise summation.
pub fn average_with(s: &CMat, unitaries: &[CMat]) -> CMat {
    let terms = unitaries.iter().map(|u| u.adjoint() * s * u).collect();
    tree_sum(terms) * c(1.0 / unitaries.len() as f64)
}

pub fn identity_residual(averaged: &CMat, original: &CMat) -> f64 {
    let d = original.nrows();
    let mut r = averaged.clone();
    let t = original.trace() / c(d as f64);
    for i in 0..d {
        r[(i, i)] -= t;
    }
    let n = original.norm();
    if n == 0.0 {
        0.0
    } else {
        r.norm() / n
    }
}

pub fn group_average(s: &SpinOperator, group: &PointGroup, spins: &[Spin]) -> Result<SymmetrizedResult> {
    let d: usize = spins.iter().map(|x| x.dim()).product();
    if s.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: s.dim() });
    }
    let us = group_unitaries(group, spins);
    let avg = average_with(&s.matrix, &us);
    let residual_norm = identity_residual(&avg, &s.matrix);
    Ok(SymmetrizedResult {
        averaged: SpinOperator { dims: s.dims.clone(), matrix: avg },
        is_identity_multiple: residual_norm < DEFAULT_TOL,
        residual_norm,
    })
}

/// (1/|G|) Σ_g D^(L)(g), the matrix of Π_G on rank-L multipole coordinates.
pub fn rank_projector(group: &PointGroup, l: usize) -> CMat {
    let spin = Spin::from_two_j(2 * l as u32);
    let terms = group.elements.iter().map(|g| rotation_unitary(spin, g)).collect();
    tree_sum(terms) * c(1.0 / group.order() as f64)
}

/// Coefficient vectors (M = L..−L) spanning the G-invariant rank-L operators.
pub fn invariant_coefficients(group: &PointGroup, l: usize) -> Vec<Vec<Complex64>> {
    let a = rank_projector(group, l);
    let h = (&a + a.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(h);
    let mut out = Vec::new();
    for (k, ev) in eig.eigenvalues.iter().enumerate() {
        if (ev - 1.0).abs() < EIGEN_ONE_TOL {
            out.push(eig.eigenvectors.column(k).iter().copied().collect());
        }
    }
    out
}

pub fn invariant_dimension(group: &PointGroup, l: usize) -> usize {
    invariant_coefficients(group, l).len()
}

pub fn invariant_subspace(group: &PointGroup, j: f64, l: usize) -> Result<Vec<SpinOperator>> {
    let spin = Spin::new(j)?;
    if l > spin.two_j as usize {
        return invalid(format!("L = {l} exceeds 2j for j = {spin}"));
    }
    let basis = multipole_basis(spin);
    let d = spin.dim();
    Ok(invariant_coefficients(group, l)
        .into_iter()
        .map(|v| {
            let mut m = CMat::zeros(d, d);
            for (k, z) in v.iter().enumerate() {
                m += &basis.ops[l][k] * *z;
            }
            SpinOperator::single(m)
        })
        .collect())
}

pub fn is_decoupling_group(group: &PointGroup, spins: &[Spin], subspace: &[SpinOperator], tol: f64) -> Result<bool> {
    let d: usize = spins.iter().map(|x| x.dim()).product();
    let us = group_unitaries(group, spins);
    for s in subspace {
        if s.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.dim() });
        }
        if identity_residual(&average_with(&s.matrix, &us), &s.matrix) >= tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All T_LM with 1 ≤ L ≤ lmax for one spin.
pub fn multipole_subspace(spin: Spin, lmax: usize) -> Vec<SpinOperator> {
    let b = multipole_basis(spin);
    (1..=lmax.min(spin.two_j as usize))
        .flat_map(|l| b.ops[l].iter().map(|m| SpinOperator::single(m.clone())).collect::<Vec<_>>())
        .collect()
}

pub fn smallest_decoupling_group(lmax: usize) -> Option<&'static str> {
    match lmax {
        0 | 1 => Some("D2"),
        2 => Some("T"),
        3 => Some("O"),
        4 | 5 => Some("I"),
        _ => None,
    }
}

pub fn multispin_decoupling_group(k: usize, lmax_per_site: &[usize]) -> Option<&'static str> {
    let mut v = lmax_per_site.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    let total: usize = v.iter().take(k).sum();
    smallest_decoupling_group(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotations::standard_group;
    use crate::spin_algebra::{angular_momentum_ops, multipole_operator};

    #[test]
    fn jz_under_d2() {
        let (_, _, jz) = angular_momentum_ops(0.5).unwrap();
        let r = group_average(&jz, &standard_group("D2").unwrap(), &[Spin::half()]).unwrap();
        assert!(r.averaged.hs_norm() < 1e-14);
        let id = SpinOperator::identity(vec![3]);
        let r = group_average(&id, &standard_group("T").unwrap(), &[Spin::from_two_j(2)]).unwrap();
        assert!(r.is_identity_multiple);
        assert!((r.averaged.matrix - CMat::identity(3, 3)).norm() < 1e-12);
        assert!(group_average(&id, &standard_group("T").unwrap(), &[Spin::half()]).is_err());
    }

    #[test]
    fn cubic_l4_is_octahedral() {
        let t = |m| multipole_operator(2.0, 4, m).unwrap().matrix;
        let x = t(4) + t(-4) + t(0) * c((14.0f64 / 5.0).sqrt());
        let s = SpinOperator::single(x);
        let r = group_average(&s, &standard_group("O").unwrap(), &[Spin::from_two_j(4)]).unwrap();
        assert!((r.averaged.matrix - s.matrix).norm() < 1e-10);
    }

    #[test]
    fn invariant_dimensions() {
        let t = standard_group("T").unwrap();
        assert_eq!(invariant_subspace(&t, 1.5, 3).unwrap().len(), 1);
        let i = standard_group("I").unwrap();
        for l in 1..=5 {
            assert_eq!(invariant_subspace(&i, 3.0, l).unwrap().len(), 0);
        }
        assert_eq!(invariant_subspace(&i, 3.0, 6).unwrap().len(), 1);
        assert_eq!(invariant_subspace(&standard_group("O").unwrap(), 2.0, 1).unwrap().len(), 0);
        assert!(invariant_subspace(&t, 1.0, 3).is_err());
    }

    #[test]
    fn decoupling_examples() {
        let t = standard_group("T").unwrap();
        let o = standard_group("O").unwrap();
        let s1 = Spin::from_two_j(2);
        let s32 = Spin::from_two_j(3);
        assert!(is_decoupling_group(&t, &[s1], &multipole_subspace(s1, 2), 1e-10).unwrap());
        let inv = invariant_subspace(&t, 1.5, 3).unwrap();
        assert!(!is_decoupling_group(&t, &[s32], &inv, 1e-10).unwrap());
        assert!(is_decoupling_group(&o, &[s32], &multipole_subspace(s32, 3), 1e-10).unwrap());
    }

    #[test]
    fn selection_tables() {
        assert_eq!(smallest_decoupling_group(2), Some("T"));
        assert_eq!(smallest_decoupling_group(5), Some("I"));
        assert_eq!(smallest_decoupling_group(6), None);
        assert_eq!(multispin_decoupling_group(2, &[1, 1, 1]), Some("T"));
        assert_eq!(multispin_decoupling_group(2, &[1, 3]), Some("I"));
        assert_eq!(multispin_decoupling_group(3, &[2, 2, 2]), None);
    }
}
