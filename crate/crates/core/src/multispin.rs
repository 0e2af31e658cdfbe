//! Spin ensembles, K-body multilinear Hamiltonians, anisotropy projection and isotropic operators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::rotations::{Rotation, Vec3};
use crate::spin_algebra::{
    c, hs_inner, multipole_basis, op_norm, rotation_unitary, spin_matrices, CMat, Spin, SpinOperator,
};

pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinEnsemble {
    pub spins: Vec<Spin>,
}

impl SpinEnsemble {
    pub fn new(spins: Vec<Spin>) -> Result<SpinEnsemble> {
        SpinEnsemble::with_cap(spins, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(spins: Vec<Spin>, cap: usize) -> Result<SpinEnsemble> {
        if spins.is_empty() {
            return invalid("empty ensemble");
        }
        let d = spins.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.dim())).unwrap_or(usize::MAX);
        if d > cap {
            return Err(Error::DimensionCap(d, cap));
        }
        Ok(SpinEnsemble { spins })
    }

    pub fn single(spin: Spin) -> SpinEnsemble {
        SpinEnsemble { spins: vec![spin] }
    }

    pub fn uniform(spin: Spin, n: usize) -> Result<SpinEnsemble> {
        SpinEnsemble::new(vec![spin; n])
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spins.iter().map(|s| s.dim()).collect()
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }
}

/// Tensor product of per-site factors, identity on unlisted sites.
pub fn embed_product(factors: &[(usize, &CMat)], ens: &SpinEnsemble) -> Result<CMat> {
    let mut out = CMat::identity(1, 1);
    for (site, spin) in ens.spins.iter().enumerate() {
        let f = factors.iter().find(|(s, _)| *s == site);
        out = match f {
            Some((_, m)) => {
                if m.nrows() != spin.dim() {
                    return Err(Error::DimensionMismatch { expected: spin.dim(), got: m.nrows() });
                }
                out.kronecker(*m)
            }
            None => out.kronecker(&CMat::identity(spin.dim(), spin.dim())),
        };
    }
    for (s, _) in factors {
        if *s >= ens.len() {
            return invalid(format!("site {s} out of range"));
        }
    }
    Ok(out)
}

pub fn embed_operator(op: &SpinOperator, site: usize, ens: &SpinEnsemble) -> Result<SpinOperator> {
    if site >= ens.len() {
        return invalid(format!("site {site} out of range"));
    }
    Ok(SpinOperator { dims: ens.dims(), matrix: embed_product(&[(site, &op.matrix)], ens)? })
}

/// ⊗ₖ D^(jₖ)(r).
pub fn global_rotation(r: &Rotation, ens: &SpinEnsemble) -> SpinOperator {
    let mut out = CMat::identity(1, 1);
    for s in &ens.spins {
        out = out.kronecker(&rotation_unitary(*s, r));
    }
    SpinOperator { dims: ens.dims(), matrix: out }
}

/// Σ_sites J·n on the ensemble.
pub fn global_spin_projection(n: Vec3, ens: &SpinEnsemble) -> CMat {
    let d = ens.dim();
    let mut out = CMat::zeros(d, d);
    for (site, s) in ens.spins.iter().enumerate() {
        let [x, y, z] = spin_matrices(*s);
        let local = x * c(n[0]) + y * c(n[1]) + z * c(n[2]);
        out += embed_product(&[(site, &local)], ens).unwrap();
    }
    out
}

/// Real Cartesian tensor h_{α1..αK} (row-major, 3^K entries) acting on `sites`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTensor {
    pub sites: Vec<usize>,
    pub ranks: Vec<usize>,
    pub entries: Vec<f64>,
}

impl InteractionTensor {
    pub fn new(sites: Vec<usize>, entries: Vec<f64>) -> Result<InteractionTensor> {
        let k = sites.len();
        if entries.len() != 3usize.pow(k as u32) {
            return invalid(format!("a {k}-body tensor needs {} entries, got {}", 3usize.pow(k as u32), entries.len()));
        }
        Ok(InteractionTensor { ranks: vec![1; k], sites, entries })
    }

    pub fn order(&self) -> usize {
        self.sites.len()
    }

    pub fn zeros(sites: Vec<usize>) -> InteractionTensor {
        let n = 3usize.pow(sites.len() as u32);
        InteractionTensor { ranks: vec![1; sites.len()], sites, entries: vec![0.0; n] }
    }

    fn index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &a| acc * 3 + a)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.index(idx)]
    }
}

fn multi_indices(k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..3usize.pow(k as u32)).map(move |mut n| {
        let mut v = vec![0; k];
        for slot in v.iter_mut().rev() {
            *slot = n % 3;
            n /= 3;
        }
        v
    })
}

pub fn delta_tensor(sites: Vec<usize>) -> InteractionTensor {
    let mut t = InteractionTensor::zeros(sites);
    for a in 0..3 {
        t.entries[a * 3 + a] = 1.0;
    }
    t
}

fn levi_civita(a: usize, b: usize, g: usize) -> f64 {
    match (a, b, g) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn epsilon_tensor(sites: Vec<usize>) -> InteractionTensor {
    let mut t = InteractionTensor::zeros(sites);
    for (n, idx) in multi_indices(3).enumerate() {
        t.entries[n] = levi_civita(idx[0], idx[1], idx[2]);
    }
    t
}

/// 3 e eᵀ − 1 for a unit vector e.
pub fn dipolar_tensor(sites: Vec<usize>, e: Vec3) -> InteractionTensor {
    let mut t = InteractionTensor::zeros(sites);
    for a in 0..3 {
        for b in 0..3 {
            t.entries[a * 3 + b] = 3.0 * e[a] * e[b] - if a == b { 1.0 } else { 0.0 };
        }
    }
    t
}

pub fn multilinear_hamiltonian(tensor: &InteractionTensor, ens: &SpinEnsemble) -> Result<SpinOperator> {
    let k = tensor.order();
    for (i, s) in tensor.sites.iter().enumerate() {
        if *s >= ens.len() {
            return invalid(format!("site {s} out of range"));
        }
        if tensor.sites[..i].contains(s) {
            return invalid(format!("site {s} repeated"));
        }
    }
    let jops: Vec<[CMat; 3]> = tensor.sites.iter().map(|&s| spin_matrices(ens.spins[s])).collect();
    let d = ens.dim();
    let mut out = CMat::zeros(d, d);
    for (n, idx) in multi_indices(k).enumerate() {
        let h = tensor.entries[n];
        if h == 0.0 {
            continue;
        }
        let factors: Vec<(usize, &CMat)> = (0..k).map(|i| (tensor.sites[i], &jops[i][idx[i]])).collect();
        out += embed_product(&factors, ens)? * c(h);
    }
    Ok(SpinOperator { dims: ens.dims(), matrix: out })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropyReport {
    /// Contraction values: trace (K=2), ε contraction (K=3), three δδ contractions (K=4).
    pub contractions: Vec<f64>,
    pub anisotropic: bool,
}

fn isotropic_basis(k: usize) -> Result<Vec<Vec<f64>>> {
    let n = 3usize.pow(k as u32);
    let mut out = Vec::new();
    match k {
        2 => out.push(delta_tensor(vec![0, 1]).entries),
        3 => out.push(epsilon_tensor(vec![0, 1, 2]).entries),
        4 => {
            for pat in [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]] {
                let mut v = vec![0.0; n];
                for (m, idx) in multi_indices(4).enumerate() {
                    if idx[pat[0]] == idx[pat[1]] && idx[pat[2]] == idx[pat[3]] {
                        v[m] = 1.0;
                    }
                }
                out.push(v);
            }
        }
        _ => return invalid(format!("anisotropy conditions defined for K in 2..=4, got {k}")),
    }
    Ok(out)
}

pub fn anisotropy_check(tensor: &InteractionTensor) -> Result<AnisotropyReport> {
    let basis = isotropic_basis(tensor.order())?;
    let contractions: Vec<f64> =
        basis.iter().map(|b| b.iter().zip(&tensor.entries).map(|(x, y)| x * y).sum()).collect();
    let anisotropic = contractions.iter().all(|v| v.abs() < 1e-12);
    Ok(AnisotropyReport { contractions, anisotropic })
}

/// Removes the isotropic-tensor components (Gram–Schmidt). Rank-1 tensors are returned unchanged.
pub fn project_anisotropic(tensor: &InteractionTensor) -> Result<InteractionTensor> {
    if tensor.order() == 1 {
        return Ok(tensor.clone());
    }
    let basis = isotropic_basis(tensor.order())?;
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for b in basis {
        let mut v = b;
        for u in &ortho {
            let p: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        ortho.push(v);
    }
    let mut out = tensor.clone();
    for u in &ortho {
        let p: f64 = u.iter().zip(&out.entries).map(|(x, y)| x * y).sum();
        out.entries.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
    }
    Ok(out)
}

/// I_L = Σ_M (−1)^M / √(2L+1) · T_LM ⊗ T_L,−M on two sites.
pub fn isotropic_operator(j1: f64, j2: f64, l: usize) -> Result<SpinOperator> {
    let (s1, s2) = (Spin::new(j1)?, Spin::new(j2)?);
    Ok(SpinOperator { dims: vec![s1.dim(), s2.dim()], matrix: isotropic_matrix(s1, s2, l)? })
}

fn isotropic_matrix(s1: Spin, s2: Spin, l: usize) -> Result<CMat> {
    if l > s1.two_j.min(s2.two_j) as usize {
        return invalid(format!("L = {l} exceeds 2·min(j1, j2)"));
    }
    let (b1, b2) = (multipole_basis(s1), multipole_basis(s2));
    let d = s1.dim() * s2.dim();
    let mut out = CMat::zeros(d, d);
    let li = l as i64;
    for m in -li..=li {
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        out += b1.get(l, m).kronecker(b2.get(l, -m)) * c(sign / ((2 * l + 1) as f64).sqrt());
    }
    Ok(out)
}

/// Embeds a two-site operator given as Σ (A ⊗ B) terms over the pair (a, b).
fn embed_isotropic(a: usize, b: usize, l: usize, ens: &SpinEnsemble) -> Result<CMat> {
    let (s1, s2) = (ens.spins[a], ens.spins[b]);
    let (b1, b2) = (multipole_basis(s1), multipole_basis(s2));
    let d = ens.dim();
    let mut out = CMat::zeros(d, d);
    let li = l as i64;
    for m in -li..=li {
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        out += embed_product(&[(a, b1.get(l, m)), (b, b2.get(l, -m))], ens)? * c(sign / ((2 * l + 1) as f64).sqrt());
    }
    Ok(out)
}

/// Projects out every embedded I_L (L ≥ 1) on every site pair.
pub fn remove_isotropic(h: &SpinOperator, ens: &SpinEnsemble) -> Result<SpinOperator> {
    if h.dim() != ens.dim() {
        return Err(Error::DimensionMismatch { expected: ens.dim(), got: h.dim() });
    }
    let mut out = h.matrix.clone();
    for a in 0..ens.len() {
        for b in a + 1..ens.len() {
            let lmax = ens.spins[a].two_j.min(ens.spins[b].two_j) as usize;
            for l in 1..=lmax {
                let e = embed_isotropic(a, b, l, ens)?;
                let coef = hs_inner(&e, &out) / hs_inner(&e, &e);
                out -= e * coef;
            }
        }
    }
    Ok(SpinOperator { dims: ens.dims(), matrix: out })
}

/// Largest overlap |Tr(I_L H)| / ‖I_L‖ over pairs and L ≥ 1.
pub fn isotropic_overlap(h: &SpinOperator, ens: &SpinEnsemble) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in 0..ens.len() {
        for b in a + 1..ens.len() {
            let lmax = ens.spins[a].two_j.min(ens.spins[b].two_j) as usize;
            for l in 1..=lmax {
                let e = embed_isotropic(a, b, l, ens)?;
                worst = worst.max(hs_inner(&e, &h.matrix).norm() / e.norm());
            }
        }
    }
    Ok(worst)
}

/// One block of a random Hamiltonian; the block is rescaled as a whole to `norm`.
#[derive(Debug, Clone, PartialEq)]
pub enum BodyTerm {
    /// GUE matrix on the full Hilbert space.
    Gue { norm: f64 },
    /// Sum of independent multilinear tensors on each listed site tuple.
    Multilinear { site_sets: Vec<Vec<usize>>, norm: f64 },
}

impl BodyTerm {
    /// All K-subsets of `n` sites, in lexicographic order.
    pub fn all_k_body(n: usize, k: usize, norm: f64) -> BodyTerm {
        let mut sets = Vec::new();
        let mut cur = Vec::new();
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, sets: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                sets.push(cur.clone());
                return;
            }
            for s in start..n {
                cur.push(s);
                rec(s + 1, n, k, cur, sets);
                cur.pop();
            }
        }
        rec(0, n, k, &mut cur, &mut sets);
        BodyTerm::Multilinear { site_sets: sets, norm }
    }
}

/// Standard complex Gaussian entries, Hermitized as (A + A†)/2.
pub fn gue<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let a = CMat::from_fn(d, d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&a + a.adjoint()) * c(0.5)
}

pub fn random_tensor<R: Rng>(rng: &mut R, sites: Vec<usize>) -> InteractionTensor {
    let n = 3usize.pow(sites.len() as u32);
    let entries = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    InteractionTensor { ranks: vec![1; sites.len()], sites, entries }
}

pub fn rescale_to_norm(m: &CMat, norm: f64) -> CMat {
    let n = op_norm(m);
    if n == 0.0 {
        m.clone()
    } else {
        m * c(norm / n)
    }
}

/// Random Hamiltonian; term `k` draws from its own stream keyed by (seed, k).
pub fn random_hamiltonian(
    seed: u64,
    ens: &SpinEnsemble,
    structure: &[BodyTerm],
    anisotropic: bool,
) -> Result<SpinOperator> {
    let d = ens.dim();
    let mut out = CMat::zeros(d, d);
    for (k, term) in structure.iter().enumerate() {
        let mut r = rng::stream(seed, &[k as u64]);
        let block = match term {
            BodyTerm::Gue { norm } => rescale_to_norm(&gue(&mut r, d), *norm),
            BodyTerm::Multilinear { site_sets, norm } => {
                let mut m = CMat::zeros(d, d);
                for sites in site_sets {
                    let mut t = random_tensor(&mut r, sites.clone());
                    if anisotropic {
                        t = project_anisotropic(&t)?;
                    }
                    m += multilinear_hamiltonian(&t, ens)?.matrix;
                }
                rescale_to_norm(&m, *norm)
            }
        };
        out += block;
    }
    Ok(SpinOperator { dims: ens.dims(), matrix: out })
}

/// Σ α_ij |ij⟩⟨ij| on two d-level systems, with α indexed from level 1.
pub fn cross_kerr_hamiltonian(alphas: &DMatrix<f64>) -> Result<SpinOperator> {
    if alphas.nrows() != alphas.ncols() || alphas.nrows() == 0 {
        return invalid("alphas must be a nonempty square matrix");
    }
    let d = alphas.nrows() + 1;
    let mut m = CMat::zeros(d * d, d * d);
    for i in 1..d {
        for j in 1..d {
            let k = i * d + j;
            m[(k, k)] = c(alphas[(i - 1, j - 1)]);
        }
    }
    Ok(SpinOperator { dims: vec![d, d], matrix: m })
}

pub fn random_unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v: Vec3 = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = crate::rotations::norm3(v);
        if n > 1e-8 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Disorder Σ δ_i m_i·J^i with Gaussian δ_i and random unit m_i.
pub fn random_disorder<R: Rng>(rng: &mut R, ens: &SpinEnsemble) -> Result<CMat> {
    let d = ens.dim();
    let mut out = CMat::zeros(d, d);
    for site in 0..ens.len() {
        let delta: f64 = rng.sample(StandardNormal);
        let m = random_unit_vector(rng);
        let t = InteractionTensor::new(vec![site], m.iter().map(|x| delta * x).collect())?;
        out += multilinear_hamiltonian(&t, ens)?.matrix;
    }
    Ok(out)
}

/// Dipolar Σ Δ_ij (3(e·J^i)(e·J^j) − J^i·J^j) with Gaussian Δ_ij and random unit e_ij.
pub fn random_dipolar<R: Rng>(rng: &mut R, ens: &SpinEnsemble) -> Result<CMat> {
    let d = ens.dim();
    let mut out = CMat::zeros(d, d);
    for a in 0..ens.len() {
        for b in a + 1..ens.len() {
            let strength: f64 = rng.sample(StandardNormal);
            let e = random_unit_vector(rng);
            let mut t = dipolar_tensor(vec![a, b], e);
            t.entries.iter_mut().for_each(|x| *x *= strength);
            out += multilinear_hamiltonian(&t, ens)?.matrix;
        }
    }
    Ok(out)
}
