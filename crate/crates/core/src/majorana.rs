//! Majorana constellations of states and multipole spinors, and point-group detection of
//! operators by direct conjugation tests.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::multispin::{global_rotation, global_spin_projection, SpinEnsemble};
use crate::rotations::{
    cross, cyclic_group, dihedral_group, dot, norm3, normalize3, standard_group, PointGroup, Rotation, Vec3,
};
use crate::simulate::perpendicular_frame;
use crate::spin_algebra::{
    c, clebsch_gordan_doubled, multipole_basis, multipole_decompose_matrix, CMat, Spin, SpinOperator,
};

const INFINITE_ROOT: f64 = 1e8;
const DETECT_TOL: f64 = 1e-9;
const AXIS_TOL: f64 = 1e-5;
const MAX_AXIS_ORDER: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub stars: Vec<Vec3>,
}

impl Constellation {
    pub fn len(&self) -> usize {
        self.stars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stars.is_empty()
    }

    pub fn rotated(&self, r: &Rotation) -> Constellation {
        Constellation { stars: self.stars.iter().map(|s| r.apply(*s)).collect() }
    }

    /// Equal as multisets of points, each star matched within `tol` (Euclidean).
    pub fn matches(&self, other: &Constellation, tol: f64) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut used = vec![false; other.len()];
        'outer: for s in &self.stars {
            for (k, t) in other.stars.iter().enumerate() {
                if !used[k] && dist3(*s, *t) < tol {
                    used[k] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    /// Angles between all star pairs.
    pub fn pairwise_angles(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                out.push(dot(self.stars[i], self.stars[j]).clamp(-1.0, 1.0).acos());
            }
        }
        out
    }
}

fn dist3(a: Vec3, b: Vec3) -> f64 {
    norm3([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Roots of Σ a_n z^n (coefficients in ascending degree); `None` marks a root at infinity.
pub fn polynomial_roots(a: &[Complex64]) -> Result<Vec<Option<Complex64>>> {
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return invalid("zero polynomial");
    }
    let tiny = |z: &Complex64| z.norm() <= 1e-14 * scale;
    let degree = a.len() - 1;
    let lo = a.iter().take_while(|z| tiny(z)).count();
    let hi = degree - a.iter().rposition(|z| !tiny(z)).unwrap();
    let mut out: Vec<Option<Complex64>> = vec![Some(Complex64::new(0.0, 0.0)); lo];
    out.extend(std::iter::repeat_n(None, hi));
    let core: Vec<Complex64> = a[lo..=degree - hi].to_vec();
    let r = core.len() - 1;
    if r == 0 {
        return Ok(out);
    }
    // z = s·w with s the geometric mean root magnitude keeps the companion matrix balanced
    let s = (core[0].norm() / core[r].norm()).powf(1.0 / r as f64);
    let b: Vec<Complex64> = (0..=r).map(|k| core[k] * s.powi(k as i32 - r as i32) / core[r]).collect();
    let mut m = DMatrix::<Complex64>::zeros(r, r);
    for k in 0..r {
        m[(k, r - 1)] = -b[k];
        if k > 0 {
            m[(k, k - 1)] = c(1.0);
        }
    }
    let ev = companion_eigenvalues(m)?;
    let eval = |z: Complex64| {
        let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for ck in core.iter().rev() {
            dp = dp * z + p;
            p = p * z + ck;
        }
        (p, dp)
    };
    for w in ev.iter() {
        let mut z = *w * s;
        for _ in 0..8 {
            let (p, dp) = eval(z);
            if dp.norm() == 0.0 {
                break;
            }
            let next = z - p / dp;
            if eval(next).0.norm() < p.norm() {
                z = next;
            } else {
                break;
            }
        }
        out.push(if z.norm() > INFINITE_ROOT { None } else { Some(z) });
    }
    Ok(out)
}

/// Complex Schur occasionally stalls on the exact companion structure; a fixed
/// Householder similarity breaks it without moving the spectrum.
fn companion_eigenvalues(m: DMatrix<Complex64>) -> Result<DVector<Complex64>> {
    let schur = |m: DMatrix<Complex64>| Schur::try_new(m, 1e-15, 2_000).and_then(|s| s.eigenvalues());
    if let Some(ev) = schur(m.clone()) {
        return Ok(ev);
    }
    let r = m.nrows();
    let v = DVector::from_fn(r, |k, _| Complex64::new(1.0 + 0.37 * k as f64, 0.11 * (k * k) as f64 - 0.5));
    let v = &v / c(v.norm());
    let q = DMatrix::<Complex64>::identity(r, r) - &v * v.adjoint() * c(2.0);
    schur(&q * m * &q).ok_or_else(|| Error::NotFound("companion eigenvalues did not converge".into()))
}

fn star(root: Option<Complex64>) -> Vec3 {
    match root {
        None => [0.0, 0.0, -1.0],
        Some(z) => {
            let th = 2.0 * z.norm().atan();
            let ph = z.arg();
            [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
        }
    }
}

/// Constellation of a spin-j state with components ordered m = j, j−1, …, −j.
pub fn majorana_roots(state: &[Complex64]) -> Result<Constellation> {
    if state.is_empty() {
        return invalid("empty state");
    }
    if state.iter().all(|z| z.norm() == 0.0) {
        return invalid("zero state");
    }
    let n = state.len() - 1;
    // coefficient of z^(n−k) comes from component k (m = j − k)
    let mut a = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, lam) in state.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        a[n - k] = lam * (sign * binomial(n, k).sqrt());
    }
    Ok(Constellation { stars: polynomial_roots(&a)?.into_iter().map(star).collect() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleConstellation {
    pub l: usize,
    pub norm: f64,
    pub constellation: Constellation,
}

pub fn operator_multipole_constellations(h: &SpinOperator) -> Result<Vec<MultipoleConstellation>> {
    let d = h.dim();
    if d == 0 || h.dims.len() > 1 {
        return Err(Error::DimensionMismatch { expected: d, got: h.dims.len() });
    }
    let spin = Spin::from_two_j(d as u32 - 1);
    spinor_constellations(&multipole_decompose_matrix(&h.matrix, spin)?)
}

fn spinor_constellations(parts: &[crate::spin_algebra::MultipoleVector]) -> Result<Vec<MultipoleConstellation>> {
    let mut out = Vec::new();
    for p in parts.iter().skip(1) {
        let norm = p.norm();
        if norm > 1e-12 {
            out.push(MultipoleConstellation { l: p.l, norm, constellation: majorana_roots(&p.components)? });
        }
    }
    Ok(out)
}

/// Operator on the listed sites obtained by tracing out the rest.
pub fn partial_trace(op: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let n = dims.len();
    let kd: usize = keep.iter().map(|&k| dims[k]).product();
    let mut out = CMat::zeros(kd, kd);
    let d = op.nrows();
    let digits = |mut idx: usize| {
        let mut v = vec![0usize; n];
        for s in (0..n).rev() {
            v[s] = idx % dims[s];
            idx /= dims[s];
        }
        v
    };
    let sub = |v: &[usize]| keep.iter().fold(0usize, |acc, &k| acc * dims[k] + v[k]);
    let rest = |v: &[usize]| (0..n).filter(|s| !keep.contains(s)).fold(0usize, |acc, s| acc * dims[s] + v[s]);
    let all: Vec<Vec<usize>> = (0..d).map(digits).collect();
    for i in 0..d {
        for j in 0..d {
            if rest(&all[i]) == rest(&all[j]) {
                out[(sub(&all[i]), sub(&all[j]))] += op[(i, j)];
            }
        }
    }
    out
}

/// Rank-L spinors of a two-site operator coupled from its (L1, L2) components.
fn coupled_spinors(op: &CMat, s1: Spin, s2: Spin) -> Vec<crate::spin_algebra::MultipoleVector> {
    let (b1, b2) = (multipole_basis(s1), multipole_basis(s2));
    let mut out = Vec::new();
    for l1 in 1..b1.ops.len() {
        for l2 in 1..b2.ops.len() {
            let coef: Vec<Vec<Complex64>> = b1.ops[l1]
                .iter()
                .map(|t1| b2.ops[l2].iter().map(|t2| crate::spin_algebra::hs_inner(&t1.kronecker(t2), op)).collect())
                .collect();
            for l in l1.abs_diff(l2)..=l1 + l2 {
                if l == 0 {
                    continue;
                }
                let comps: Vec<Complex64> = (0..=2 * l)
                    .map(|k| {
                        let m = l as i64 - k as i64;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (k1, row) in coef.iter().enumerate() {
                            let m1 = l1 as i64 - k1 as i64;
                            let m2 = m - m1;
                            if m2.abs() > l2 as i64 {
                                continue;
                            }
                            let k2 = (l2 as i64 - m2) as usize;
                            let cg = clebsch_gordan_doubled(
                                2 * l1 as i64,
                                2 * m1,
                                2 * l2 as i64,
                                2 * m2,
                                2 * l as i64,
                                2 * m,
                            );
                            acc += row[k2] * cg;
                        }
                        acc
                    })
                    .collect();
                out.push(crate::spin_algebra::MultipoleVector { l, components: comps });
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct GroupReport {
    /// "I", "O", "T", "Dn", "Cn", "trivial", "C-inf", "D-inf", "SO(3)" or "SO(3) (identity multiple)".
    pub name: String,
    pub order: Option<usize>,
    /// Rotation axes with their orders; order 0 marks a continuous axis.
    pub axes: Vec<(usize, Vec3)>,
    pub group: Option<PointGroup>,
    pub is_axially_continuous: bool,
    /// Largest ‖U_g† H U_g − H‖ over the reported elements, with ‖H‖ = 1.
    pub residual: f64,
}

impl GroupReport {
    fn continuous(name: &str, axes: Vec<(usize, Vec3)>) -> GroupReport {
        GroupReport { name: name.into(), order: None, axes, group: None, is_axially_continuous: true, residual: 0.0 }
    }
}

fn canonical_axis(n: Vec3) -> Vec3 {
    let n = normalize3(n);
    let lead = n.iter().find(|x| x.abs() > 1e-9).copied().unwrap_or(1.0);
    if lead < 0.0 {
        n.map(|x| -x)
    } else {
        n
    }
}

struct Detector<'a> {
    h: CMat,
    ens: &'a SpinEnsemble,
}

impl Detector<'_> {
    fn residual(&self, r: &Rotation) -> f64 {
        let u = global_rotation(r, self.ens).matrix;
        (u.adjoint() * &self.h * &u - &self.h).norm()
    }

    fn residual_vec(&self, group: &PointGroup, out: &mut Vec<f64>) {
        out.clear();
        for (_, g) in &group.generators {
            let u = global_rotation(g, self.ens).matrix;
            for z in (u.adjoint() * &self.h * &u - &self.h).iter() {
                out.push(z.re);
                out.push(z.im);
            }
        }
    }

    fn axis_order(&self, n: Vec3) -> usize {
        (2..=MAX_AXIS_ORDER)
            .rev()
            .find(|&k| Rotation::from_axis_angle(n, 2.0 * PI / k as f64).is_ok_and(|r| self.residual(&r) < AXIS_TOL))
            .unwrap_or(1)
    }

    /// Gauss-Newton on the frame rotation, then an exact test of every element.
    fn refine_and_verify(&self, reference: &PointGroup, frame: Rotation) -> Option<(PointGroup, f64)> {
        let mut r = frame;
        let mut res = Vec::new();
        self.residual_vec(&reference.conjugated(&r), &mut res);
        let mut cost: f64 = res.iter().map(|x| x * x).sum();
        for _ in 0..8 {
            if cost.sqrt() < 1e-13 {
                break;
            }
            let step = 1e-7;
            let mut jac = DMatrix::<f64>::zeros(res.len(), 3);
            let mut shifted = Vec::new();
            for a in 0..3 {
                let mut v = [0.0; 3];
                v[a] = 1.0;
                let rr = Rotation::from_axis_angle(v, step).ok()?.compose(&r);
                self.residual_vec(&reference.conjugated(&rr), &mut shifted);
                for (i, (x, y)) in shifted.iter().zip(&res).enumerate() {
                    jac[(i, a)] = (x - y) / step;
                }
            }
            let rhs = DVector::from_iterator(res.len(), res.iter().map(|x| -x));
            let delta = jac.svd(true, true).solve(&rhs, 1e-10).ok()?;
            let dn = delta.norm();
            if dn < 1e-16 {
                break;
            }
            let cand = Rotation::from_axis_angle([delta[0], delta[1], delta[2]], dn).ok()?.compose(&r);
            let mut cres = Vec::new();
            self.residual_vec(&reference.conjugated(&cand), &mut cres);
            let ccost: f64 = cres.iter().map(|x| x * x).sum();
            if ccost >= cost {
                break;
            }
            r = cand;
            res = cres;
            cost = ccost;
        }
        let g = reference.conjugated(&r);
        let worst = g.elements.iter().map(|e| self.residual(e)).fold(0.0, f64::max);
        (worst < DETECT_TOL).then_some((g, worst))
    }
}

fn add_axis(list: &mut Vec<Vec3>, v: Vec3) {
    if norm3(v) < 1e-9 {
        return;
    }
    let n = normalize3(v);
    if !list.iter().any(|a| dot(*a, n).abs() > 1.0 - 5e-13) {
        list.push(n);
    }
}

fn candidate_axes(parts: &[Vec<Vec3>], extra: &[Vec3]) -> Vec<Vec3> {
    let mut out = Vec::new();
    for v in extra {
        add_axis(&mut out, *v);
    }
    for stars in parts {
        let n = stars.len();
        for i in 0..n {
            add_axis(&mut out, stars[i]);
            for j in i + 1..n {
                let (a, b) = (stars[i], stars[j]);
                add_axis(&mut out, [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
                add_axis(&mut out, [a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
                add_axis(&mut out, cross(a, b));
                if n <= 16 {
                    for c3 in &stars[j + 1..n] {
                        add_axis(&mut out, [a[0] + b[0] + c3[0], a[1] + b[1] + c3[1], a[2] + b[2] + c3[2]]);
                    }
                }
            }
        }
    }
    out
}

/// A pair of perpendicular rotation axes of the given orders inside `g`.
fn reference_pair(g: &PointGroup, k1: usize, k2: usize) -> (Vec3, Vec3) {
    let axes_of = |k: usize| -> Vec<Vec3> {
        g.elements.iter().filter(|e| (e.angle() - 2.0 * PI / k as f64).abs() < 1e-9).map(|e| e.axis_angle().0).collect()
    };
    let (a, b) = (axes_of(k1), axes_of(k2));
    for x in &a {
        for y in &b {
            if dot(*x, *y).abs() < 1e-9 {
                return (*x, *y);
            }
        }
    }
    unreachable!("reference group lacks a perpendicular axis pair")
}

fn group_axes(g: &PointGroup) -> Vec<(usize, Vec3)> {
    let mut out: Vec<(usize, Vec3)> = Vec::new();
    for e in &g.elements {
        let a = e.angle();
        if a < 1e-9 {
            continue;
        }
        let k = (2.0 * PI / a).round() as usize;
        let n = canonical_axis(e.axis_angle().0);
        match out.iter_mut().find(|(_, m)| dot(*m, n).abs() > 1.0 - 1e-9) {
            Some(slot) => slot.0 = slot.0.max(k),
            None => out.push((k, n)),
        }
    }
    out.sort_by_key(|a| std::cmp::Reverse(a.0));
    out
}

/// Largest rotation group leaving `h` invariant.
/// (group order, name, reference group, reference frame, detected axis pairs)
type Trial = (usize, String, PointGroup, Rotation, Vec<(Vec3, Vec3)>);

pub fn detect_point_group(h: &SpinOperator, spins: &[Spin]) -> Result<GroupReport> {
    let ens = SpinEnsemble::new(spins.to_vec())?;
    let d = ens.dim();
    if h.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: h.dim() });
    }
    let mut h0 = h.matrix.clone();
    let tr = h0.trace() / c(d as f64);
    for i in 0..d {
        h0[(i, i)] -= tr;
    }
    let full = h.matrix.norm();
    if full == 0.0 || h0.norm() < 1e-10 * full {
        return Ok(GroupReport::continuous("SO(3) (identity multiple)", Vec::new()));
    }
    let hn = &h.matrix * c(1.0 / full);
    let det = Detector { h: hn.clone(), ens: &ens };

    let comm: Vec<CMat> = (0..3)
        .map(|a| {
            let mut n = [0.0; 3];
            n[a] = 1.0;
            let j = global_spin_projection(n, &ens);
            &hn * &j - &j * &hn
        })
        .collect();
    let gram = Matrix3::from_fn(|a, b| crate::spin_algebra::hs_inner(&comm[a], &comm[b]).re);
    let eig = SymmetricEigen::new(gram);
    let null: Vec<Vec3> = (0..3)
        .filter(|&k| eig.eigenvalues[k] < DETECT_TOL * DETECT_TOL)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            [v[0], v[1], v[2]]
        })
        .collect();
    if null.len() >= 2 {
        return Ok(GroupReport::continuous("SO(3)", Vec::new()));
    }
    if let [n] = null[..] {
        let n = canonical_axis(n);
        let (p, _) = perpendicular_frame(n);
        let c2 = Rotation::from_axis_angle(p, PI)?;
        let name = if det.residual(&c2) < DETECT_TOL { "D-inf" } else { "C-inf" };
        return Ok(GroupReport::continuous(name, vec![(0, n)]));
    }

    // covariant directions: constellations plus eigenvectors of the commutator Gram matrix
    let mut parts: Vec<Vec<Vec3>> = Vec::new();
    let h0n = SpinOperator { dims: ens.dims(), matrix: h0 };
    if ens.len() == 1 {
        for mc in operator_multipole_constellations(&h0n)? {
            parts.push(mc.constellation.stars);
        }
    } else {
        let dims = ens.dims();
        for s in 0..ens.len() {
            let red = partial_trace(&h0n.matrix, &dims, &[s]);
            for mc in spinor_constellations(&multipole_decompose_matrix(&red, ens.spins[s])?)? {
                parts.push(mc.constellation.stars);
            }
        }
        if ens.len() <= 6 {
            for a in 0..ens.len() {
                for b in a + 1..ens.len() {
                    let red = partial_trace(&h0n.matrix, &dims, &[a, b]);
                    let sp = coupled_spinors(&red, ens.spins[a], ens.spins[b]);
                    for mc in spinor_constellations(
                        &std::iter::once(crate::spin_algebra::MultipoleVector { l: 0, components: vec![] })
                            .chain(sp)
                            .collect::<Vec<_>>(),
                    )? {
                        parts.push(mc.constellation.stars);
                    }
                }
            }
        }
    }
    let extra: Vec<Vec3> = (0..3)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            [v[0], v[1], v[2]]
        })
        .collect();
    let axes: Vec<(usize, Vec3)> =
        candidate_axes(&parts, &extra).into_iter().map(|n| (det.axis_order(n), n)).filter(|(k, _)| *k >= 2).collect();
    let with = |pred: &dyn Fn(usize) -> bool| -> Vec<Vec3> {
        axes.iter().filter(|(k, _)| pred(*k)).map(|(_, n)| *n).collect()
    };
    let perp_pairs = |a: &[Vec3], b: &[Vec3]| -> Vec<(Vec3, Vec3)> {
        let mut out = Vec::new();
        for x in a {
            for y in b {
                if dot(*x, *y).abs() < 1e-4 {
                    out.push((*x, *y));
                }
            }
        }
        out.truncate(12);
        out
    };

    let mut trials: Vec<Trial> = Vec::new();
    let platonic = [("I", 5, 2), ("O", 4, 4), ("T", 2, 2)];
    for (name, k1, k2) in platonic {
        let g = standard_group(name)?;
        let (a, b) = reference_pair(&g, k1, k2);
        let ref_frame = Rotation::frame(a, b)?;
        let pairs = perp_pairs(&with(&|k| k % k1 == 0), &with(&|k| k % k2 == 0));
        trials.push((g.order(), name.to_string(), g, ref_frame, pairs));
    }
    for k in (2..=MAX_AXIS_ORDER).rev() {
        let g = dihedral_group(k, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0])?;
        let pairs = perp_pairs(&with(&|m| m % k == 0), &with(&|m| m % 2 == 0));
        trials.push((2 * k, format!("D{k}"), g, Rotation::IDENTITY, pairs));
        let g = cyclic_group(k, [0.0, 0.0, 1.0])?;
        let pairs: Vec<(Vec3, Vec3)> =
            with(&|m| m % k == 0).into_iter().take(12).map(|n| (n, perpendicular_frame(n).0)).collect();
        trials.push((k, format!("C{k}"), g, Rotation::IDENTITY, pairs));
    }
    trials.sort_by_key(|a| std::cmp::Reverse(a.0));
    for (_, name, reference, ref_frame, pairs) in &trials {
        for (n, m) in pairs {
            let frame = Rotation::frame(*n, *m)?.compose(&ref_frame.inverse());
            if let Some((g, worst)) = det.refine_and_verify(reference, frame) {
                let mut g = g;
                g.name = name.clone();
                return Ok(GroupReport {
                    name: name.clone(),
                    order: Some(g.order()),
                    axes: group_axes(&g),
                    group: Some(g),
                    is_axially_continuous: false,
                    residual: worst,
                });
            }
        }
    }
    Ok(GroupReport {
        name: "trivial".into(),
        order: Some(1),
        axes: Vec::new(),
        group: None,
        is_axially_continuous: false,
        residual: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::{angular_momentum_ops, multipole_operator, rotation_unitary};

    fn state(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|x| c(*x)).collect()
    }

    #[test]
    fn poles() {
        let up = majorana_roots(&state(&[1.0, 0.0, 0.0])).unwrap();
        assert!(up.stars.iter().all(|s| dist3(*s, [0.0, 0.0, 1.0]) < 1e-12));
        let down = majorana_roots(&state(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(down.len(), 3);
        assert!(down.stars.iter().all(|s| dist3(*s, [0.0, 0.0, -1.0]) < 1e-12));
        assert!(majorana_roots(&state(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn tetrahedral_state() {
        let s3 = 3f64.sqrt();
        let psi = state(&[1.0 / s3, 0.0, 0.0, (2.0f64).sqrt() / s3, 0.0]);
        let con = majorana_roots(&psi).unwrap();
        assert_eq!(con.len(), 4);
        for a in con.pairwise_angles() {
            assert!((a - (-1.0f64 / 3.0).acos()).abs() < 1e-6);
        }
    }

    #[test]
    fn covariance_under_rotation() {
        let spin = Spin::from_two_j(3);
        let psi: Vec<Complex64> = vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.7, 0.0),
            Complex64::new(0.1, -0.3),
        ];
        let r = Rotation::from_axis_angle([0.3, -0.5, 0.8], 1.1).unwrap();
        let rotated: Vec<Complex64> =
            (rotation_unitary(spin, &r) * DVector::from_vec(psi.clone())).iter().copied().collect();
        let a = majorana_roots(&psi).unwrap().rotated(&r);
        let b = majorana_roots(&rotated).unwrap();
        assert!(a.matches(&b, 1e-7));
    }

    #[test]
    fn operator_constellations() {
        let (_, _, jz) = angular_momentum_ops(1.0).unwrap();
        let cs = operator_multipole_constellations(&jz).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].l, 1);
        let pair = Constellation { stars: vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] };
        assert!(cs[0].constellation.matches(&pair, 1e-8));
        assert!(operator_multipole_constellations(&SpinOperator::identity(vec![3])).unwrap().is_empty());
        let q = multipole_operator(1.0, 2, 0).unwrap();
        let cs = operator_multipole_constellations(&q).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].constellation.stars.iter().filter(|s| s[2] > 0.99).count(), 2);
    }

    #[test]
    fn detects_examples() {
        let (_, _, jz) = angular_momentum_ops(1.0).unwrap();
        let r = detect_point_group(&jz, &[Spin::from_two_j(2)]).unwrap();
        assert_eq!(r.name, "C-inf");
        assert!(dist3(r.axes[0].1, [0.0, 0.0, 1.0]) < 1e-9);
        let q = multipole_operator(1.0, 2, 0).unwrap();
        assert_eq!(detect_point_group(&q, &[Spin::from_two_j(2)]).unwrap().name, "D-inf");
        let id = SpinOperator::identity(vec![2]);
        assert_eq!(detect_point_group(&id, &[Spin::half()]).unwrap().name, "SO(3) (identity multiple)");

        let t = |j, l, m| multipole_operator(j, l, m).unwrap().matrix;
        let ht = SpinOperator::single(t(1.5, 3, 2) + t(1.5, 3, -2));
        assert_eq!(detect_point_group(&ht, &[Spin::from_two_j(3)]).unwrap().name, "T");
        let hi = SpinOperator::single(t(3.0, 6, 5) - t(3.0, 6, -5) + t(3.0, 6, 0) * c((11.0f64 / 7.0).sqrt()));
        let rep = detect_point_group(&hi, &[Spin::from_two_j(6)]).unwrap();
        assert_eq!(rep.name, "I");
        assert_eq!(rep.order, Some(60));
    }

    #[test]
    fn dihedral_and_trivial() {
        let t = |l, m| multipole_operator(2.0, l, m).unwrap().matrix;
        let h = SpinOperator::single(t(3, 3) - t(3, -3));
        let rep = detect_point_group(&h, &[Spin::from_two_j(4)]).unwrap();
        assert_eq!(rep.name, "D3");
        let h = SpinOperator::single(t(2, 2) + t(2, -2) + t(1, 0) * c(0.3) + t(3, 1) * Complex64::new(0.2, 0.7));
        let h = SpinOperator::single((&h.matrix + h.matrix.adjoint()) * c(0.5));
        assert_eq!(detect_point_group(&h, &[Spin::from_two_j(4)]).unwrap().name, "trivial");
    }

    #[test]
    fn partial_trace_of_product() {
        let a = CMat::from_fn(2, 2, |i, j| c((i + 2 * j) as f64));
        let b = CMat::from_fn(3, 3, |i, j| c(if i == j { 1.0 + i as f64 } else { 0.0 }));
        let ab = a.kronecker(&b);
        assert!((partial_trace(&ab, &[2, 3], &[0]) - &a * c(6.0)).norm() < 1e-12);
        assert!((partial_trace(&ab, &[2, 3], &[1]) - &b * c(3.0)).norm() < 1e-12);
    }
}
