//! Exact propagators of pulse sequences, error models, distance and slope diagnostics.

use std::collections::HashMap;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::multispin::{embed_product, global_rotation, global_spin_projection, SpinEnsemble};
use crate::rotations::{compose, cross, norm3, normalize3, Rotation, Vec3};
use crate::spin_algebra::{c, spin_projection, CMat, SpinOperator};

pub mod scan;

pub use scan::{scan, Family, GridAxis, ScanConfig, ScanRow, SequenceSpec};

/// Lower and upper mean-distance bounds of the slope-fit window.
pub const FIT_WINDOW: (f64, f64) = (1e-11, 0.1);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pulse {
    Rotation { axis: Vec3, angle: f64 },
    Identity,
}

impl Pulse {
    pub fn rotation(&self) -> Rotation {
        match self {
            Pulse::Rotation { axis, angle } => Rotation::from_axis_angle(*axis, *angle).unwrap(),
            Pulse::Identity => Rotation::IDENTITY,
        }
    }

    pub fn inverse(&self) -> Pulse {
        match *self {
            Pulse::Rotation { axis, angle } => Pulse::Rotation { axis: axis.map(|x| -x), angle },
            Pulse::Identity => Pulse::Identity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub interval: f64,
    pub pulse: Pulse,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSequence {
    pub steps: Vec<Step>,
    pub word: Option<String>,
    pub group: Option<String>,
    /// Identity slot reserved for a gate.
    pub gate_slot: Option<usize>,
}

impl PulseSequence {
    pub fn new(steps: Vec<Step>) -> PulseSequence {
        PulseSequence { steps, ..Default::default() }
    }

    /// A single free interval of length `t`.
    pub fn free(t: f64) -> PulseSequence {
        PulseSequence::new(vec![Step { interval: t, pulse: Pulse::Identity }])
    }

    pub fn pulse_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s.pulse, Pulse::Rotation { .. })).count()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_interval(&self) -> f64 {
        self.steps.iter().map(|s| s.interval).sum()
    }

    pub fn with_interval(&self, tau0: f64) -> PulseSequence {
        let mut out = self.clone();
        out.steps.iter_mut().for_each(|s| s.interval = tau0);
        out
    }

    /// Prefix products g_k in effect during each step's free interval.
    pub fn toggling_frames(&self) -> Vec<Rotation> {
        let mut g = Rotation::IDENTITY;
        let mut out = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            out.push(g);
            g = compose(&s.pulse.rotation(), &g);
        }
        out
    }

    pub fn ideal_product(&self) -> Rotation {
        self.steps.iter().fold(Rotation::IDENTITY, |g, s| compose(&s.pulse.rotation(), &g))
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.steps {
            if !(s.interval >= 0.0) || !s.interval.is_finite() {
                return invalid("intervals must be finite and nonnegative");
            }
            if let Pulse::Rotation { axis, .. } = s.pulse {
                if (norm3(axis) - 1.0).abs() > 1e-9 {
                    return invalid("pulse axes must be unit vectors");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel {
    pub flip_angle_eps: f64,
    pub axis_misspec_eps: f64,
    /// Pulse amplitude χ; infinite means instantaneous pulses.
    pub pulse_amplitude_chi: f64,
}

impl Default for ErrorModel {
    fn default() -> Self {
        ErrorModel::ideal()
    }
}

impl ErrorModel {
    pub fn ideal() -> ErrorModel {
        ErrorModel { flip_angle_eps: 0.0, axis_misspec_eps: 0.0, pulse_amplitude_chi: f64::INFINITY }
    }

    pub fn is_instantaneous(&self) -> bool {
        self.pulse_amplitude_chi.is_infinite()
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.axis_misspec_eps;
        if !(0.0..std::f64::consts::FRAC_1_SQRT_2).contains(&e) {
            return invalid(format!("axis misspecification {e} outside [0, 1/sqrt 2)"));
        }
        if !(self.pulse_amplitude_chi > 0.0) {
            return invalid("pulse amplitude must be positive");
        }
        if !self.flip_angle_eps.is_finite() {
            return invalid("flip-angle error must be finite");
        }
        Ok(())
    }
}

/// Orthonormal pair perpendicular to `n`: n1 = normalize(z × n), or normalize(y × n) when n ∥ z;
/// n2 = n × n1.
pub fn perpendicular_frame(n: Vec3) -> (Vec3, Vec3) {
    let n = normalize3(n);
    let zc = cross([0.0, 0.0, 1.0], n);
    let n1 = if norm3(zc) > 1e-9 { normalize3(zc) } else { normalize3(cross([0.0, 1.0, 0.0], n)) };
    (n1, cross(n, n1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizedPulse {
    pub axis: Vec3,
    pub angle: f64,
}

pub fn perturbed_pulse(axis: Vec3, angle: f64, model: &ErrorModel) -> Result<RealizedPulse> {
    model.validate()?;
    let n = normalize3(axis);
    let e = model.axis_misspec_eps;
    let realized_axis = if e == 0.0 {
        n
    } else {
        let (n1, n2) = perpendicular_frame(n);
        let a = (1.0 - 2.0 * e * e).sqrt();
        normalize3([0, 1, 2].map(|i| a * n[i] + e * n1[i] + e * n2[i]))
    };
    Ok(RealizedPulse { axis: realized_axis, angle: angle * (1.0 + model.flip_angle_eps) })
}

pub fn check_hermitian(h: &CMat) -> Result<()> {
    let err = (h - h.adjoint()).norm();
    if err > 1e-10 * h.norm().max(1.0) {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian H, reused for exp(−iHt) at many t.
pub struct HermitianEvolution {
    vectors: CMat,
    values: DVector<f64>,
}

impl HermitianEvolution {
    pub fn new(h: &CMat) -> HermitianEvolution {
        let e = SymmetricEigen::new((h + h.adjoint()) * c(0.5));
        HermitianEvolution { vectors: e.eigenvectors, values: e.eigenvalues }
    }

    pub fn exp(&self, t: f64) -> CMat {
        let mut vd = self.vectors.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, -self.values[j] * t);
        }
        vd * self.vectors.adjoint()
    }
}

pub fn free_propagator(h: &SpinOperator, t: f64) -> Result<SpinOperator> {
    check_hermitian(&h.matrix)?;
    Ok(SpinOperator { dims: h.dims.clone(), matrix: HermitianEvolution::new(&h.matrix).exp(t) })
}

/// Gate exp(−iθ J_μ^a J_μ^b) on two sites, delivered during an identity slot of length
/// `duration`; every other identity slot runs the balanced identity (ramp up, ramp down) with
/// the same first-order error phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcgGate {
    pub sites: (usize, usize),
    pub axis: Vec3,
    pub angle: f64,
    pub duration: f64,
}

impl DcgGate {
    pub fn coupling(&self, ens: &SpinEnsemble) -> Result<CMat> {
        let (a, b) = self.sites;
        if a >= ens.len() || b >= ens.len() || a == b {
            return invalid("gate needs two distinct sites");
        }
        let n = normalize3(self.axis);
        let ja = spin_projection(ens.spins[a], n);
        let jb = spin_projection(ens.spins[b], n);
        embed_product(&[(a, &ja), (b, &jb)], ens)
    }

    pub fn target(&self, ens: &SpinEnsemble) -> Result<CMat> {
        Ok(HermitianEvolution::new(&self.coupling(ens)?).exp(self.angle))
    }
}

/// Full propagator of `seq` under `h` together with the ideal target operation.
pub fn sequence_propagator(
    h: &CMat,
    seq: &PulseSequence,
    model: &ErrorModel,
    ens: &SpinEnsemble,
    gate: Option<&DcgGate>,
) -> Result<(CMat, CMat)> {
    let d = ens.dim();
    if h.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, got: h.nrows() });
    }
    check_hermitian(h)?;
    model.validate()?;
    let free = HermitianEvolution::new(h);
    let mut free_cache: HashMap<u64, CMat> = HashMap::new();
    let mut pulse_cache: Vec<((Vec3, f64), CMat)> = Vec::new();
    let chi = model.pulse_amplitude_chi;

    let (gate_u, balanced_u, target) = match gate {
        Some(g) => {
            let a = g.coupling(ens)?;
            let rate = g.angle / g.duration;
            let up = HermitianEvolution::new(&(h + &a * c(2.0 * rate))).exp(g.duration / 2.0);
            let down = HermitianEvolution::new(&(h - &a * c(2.0 * rate))).exp(g.duration / 2.0);
            let slot = HermitianEvolution::new(&(h + &a * c(rate))).exp(g.duration);
            (Some(slot), Some(down * up), HermitianEvolution::new(&a).exp(g.angle))
        }
        None => (None, None, CMat::identity(d, d)),
    };

    let mut u = CMat::identity(d, d);
    for (k, step) in seq.steps.iter().enumerate() {
        if step.interval > 0.0 {
            let e = free_cache.entry(step.interval.to_bits()).or_insert_with(|| free.exp(step.interval));
            u = &*e * u;
        }
        match step.pulse {
            Pulse::Rotation { axis, angle } => {
                let key = (axis, angle);
                let p = match pulse_cache.iter().find(|(kk, _)| *kk == key) {
                    Some((_, p)) => p,
                    None => {
                        let rp = perturbed_pulse(axis, angle, model)?;
                        let p = if model.is_instantaneous() {
                            let r = Rotation::from_axis_angle(rp.axis, rp.angle)?;
                            global_rotation(&r, ens).matrix
                        } else {
                            let gen = h + global_spin_projection(rp.axis, ens) * c(chi);
                            HermitianEvolution::new(&gen).exp(rp.angle / chi)
                        };
                        pulse_cache.push((key, p));
                        &pulse_cache.last().unwrap().1
                    }
                };
                u = p * u;
            }
            Pulse::Identity => {
                if let (Some(gu), Some(bu)) = (&gate_u, &balanced_u) {
                    u = if seq.gate_slot == Some(k) { gu * u } else { bu * u };
                }
            }
        }
    }
    Ok((u, target))
}

pub fn ideal_sequence_propagator(h: &SpinOperator, seq: &PulseSequence, ens: &SpinEnsemble) -> Result<SpinOperator> {
    let (u, _) = sequence_propagator(&h.matrix, seq, &ErrorModel::ideal(), ens, None)?;
    Ok(SpinOperator { dims: ens.dims(), matrix: u })
}

pub fn finite_pulse_propagator(
    h: &SpinOperator,
    seq: &PulseSequence,
    model: &ErrorModel,
    ens: &SpinEnsemble,
) -> Result<SpinOperator> {
    if model.is_instantaneous() {
        return invalid("finite pulses need a finite amplitude");
    }
    let (u, _) = sequence_propagator(&h.matrix, seq, model, ens, None)?;
    Ok(SpinOperator { dims: ens.dims(), matrix: u })
}

/// Σ_k g_k† (H τ_k) g_k over the toggling frames.
pub fn first_order_epo(h: &SpinOperator, seq: &PulseSequence, ens: &SpinEnsemble) -> Result<SpinOperator> {
    if h.dim() != ens.dim() {
        return Err(Error::DimensionMismatch { expected: ens.dim(), got: h.dim() });
    }
    let d = ens.dim();
    let mut out = CMat::zeros(d, d);
    for (g, step) in seq.toggling_frames().iter().zip(&seq.steps) {
        let u = global_rotation(g, ens).matrix;
        out += u.adjoint() * &h.matrix * u * c(step.interval);
    }
    Ok(SpinOperator { dims: ens.dims(), matrix: out })
}

/// √(1 − |Tr U|/d), evaluated as √(‖U − z·1‖²/(d(1+|z|))) with z = Tr U/d so that
/// small distances keep full relative precision.
pub fn distance(u: &CMat, d: usize) -> Result<f64> {
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.nrows() });
    }
    let dev = (u.adjoint() * u - CMat::identity(d, d)).norm();
    if dev > 1e-4 {
        return Err(Error::NotUnitary(dev));
    }
    if dev > 1e-8 {
        log::warn!("distance: unitarity deviation {dev:.2e}");
    }
    let z = u.trace() / c(d as f64);
    let mut r = u.clone();
    for i in 0..d {
        r[(i, i)] -= z;
    }
    let one_minus = r.norm_squared() / d as f64 / (1.0 + z.norm());
    Ok(one_minus.clamp(0.0, 1.0).sqrt())
}

/// Distance of `u` from `target`.
pub fn distance_to(target: &CMat, u: &CMat) -> Result<f64> {
    distance(&(target.adjoint() * u), u.nrows())
}

/// The sequence followed by its mirror image with inverted pulses. The mirrored half's
/// trailing interval is folded into the first step (a cyclic shift, which conjugates the
/// propagator and keeps the step count at exactly twice the original).
pub fn time_antisymmetric(seq: &PulseSequence) -> PulseSequence {
    let n = seq.steps.len();
    let mut steps = Vec::with_capacity(2 * n);
    if n == 0 {
        return seq.clone();
    }
    for (k, s) in seq.steps.iter().enumerate() {
        let extra = if k == 0 { seq.steps[0].interval } else { 0.0 };
        steps.push(Step { interval: s.interval + extra, pulse: s.pulse });
    }
    for k in (0..n).rev() {
        let interval = if k == n - 1 { 0.0 } else { seq.steps[k + 1].interval };
        steps.push(Step { interval, pulse: seq.steps[k].pulse.inverse() });
    }
    PulseSequence {
        steps, word: seq.word.as_ref().map(|w| format!("{w}†")), group: seq.group.clone(), gate_slot: None
    }
}

/// Least-squares slope of log y against log x over points with y in the default window.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    loglog_slope_window(points, FIT_WINDOW.0, FIT_WINDOW.1)
}

pub fn loglog_slope_window(points: &[(f64, f64)], lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y >= lo && *y <= hi).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{reference_words, word_to_pulses, SequenceWord};
    use crate::rotations::standard_group;
    use crate::spin_algebra::{angular_momentum_ops, Spin};
    use crate::symmetrize::group_average;

    fn tedd(tau0: f64) -> PulseSequence {
        let t = standard_group("T").unwrap();
        word_to_pulses(&SequenceWord::new(reference_words::TEDD), &t, tau0).unwrap()
    }

    #[test]
    fn free_propagation() {
        let (_, _, jz) = angular_momentum_ops(0.5).unwrap();
        let u = free_propagator(&jz, 0.3).unwrap().matrix;
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -0.15)).norm() < 1e-14);
        let u0 = free_propagator(&jz, 0.0).unwrap().matrix;
        assert!((u0 - CMat::identity(2, 2)).norm() < 1e-15);
        let bad = SpinOperator::single(CMat::from_element(2, 2, Complex64::new(0.0, 1.0)));
        assert!(matches!(free_propagator(&bad, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&CMat::identity(3, 3), 3).unwrap(), 0.0);
        let m = CMat::from_diagonal(&DVector::from_vec(vec![c(1.0), c(1.0), c(-1.0)]));
        assert!((distance(&m, 3).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        let sx = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert!((distance(&sx, 2).unwrap() - 1.0).abs() < 1e-15);
        let phase = CMat::identity(2, 2) * Complex64::from_polar(1.0, 0.4);
        assert!(distance(&phase, 2).unwrap() < 1e-15);
        assert!(matches!(distance(&(CMat::identity(2, 2) * c(2.0)), 2), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn perturbed_pulse_examples() {
        let p = perturbed_pulse([0.0, 0.0, 1.0], 1.0, &ErrorModel::ideal()).unwrap();
        assert_eq!(p.axis, [0.0, 0.0, 1.0]);
        let m = ErrorModel { axis_misspec_eps: 0.1, ..ErrorModel::ideal() };
        let p = perturbed_pulse([0.0, 0.0, 1.0], 1.0, &m).unwrap();
        assert!((p.axis[0] - 0.1).abs() < 1e-15 && (p.axis[1] - 0.1).abs() < 1e-15);
        assert!((p.axis[2] - 0.98f64.sqrt()).abs() < 1e-15);
        let m = ErrorModel { flip_angle_eps: 0.05, ..ErrorModel::ideal() };
        let p = perturbed_pulse([1.0, 0.0, 0.0], std::f64::consts::PI, &m).unwrap();
        assert!((p.angle - 1.05 * std::f64::consts::PI).abs() < 1e-15);
        let m = ErrorModel { axis_misspec_eps: 0.8, ..ErrorModel::ideal() };
        assert!(perturbed_pulse([1.0, 0.0, 0.0], 1.0, &m).is_err());
    }

    #[test]
    fn ideal_sequence_basics() {
        let ens = SpinEnsemble::single(Spin::from_two_j(2));
        let zero = SpinOperator::zeros(vec![3]);
        let u = ideal_sequence_propagator(&zero, &tedd(1.0), &ens).unwrap();
        assert!(distance(&u.matrix, 3).unwrap() < 1e-12);
        let (_, _, jz) = angular_momentum_ops(1.0).unwrap();
        let u = ideal_sequence_propagator(&jz, &PulseSequence::free(0.2), &ens).unwrap();
        assert!((u.matrix - free_propagator(&jz, 0.2).unwrap().matrix).norm() < 1e-14);
    }

    #[test]
    fn epo_matches_group_average() {
        let spin = Spin::from_two_j(3);
        let ens = SpinEnsemble::single(spin);
        let mut r = crate::rng::stream(1, &[]);
        let h = SpinOperator::single(crate::multispin::gue(&mut r, 4));
        let seq = tedd(0.5);
        let epo = first_order_epo(&h, &seq, &ens).unwrap();
        let avg = group_average(&h, &standard_group("T").unwrap(), &[spin]).unwrap();
        assert!((epo.matrix - avg.averaged.matrix * c(12.0)).norm() < 1e-10);
        let single = PulseSequence::free(0.5);
        let e1 = first_order_epo(&h, &single, &ens).unwrap();
        assert!((e1.matrix - &h.matrix * c(0.5)).norm() < 1e-14);
    }

    #[test]
    fn small_tau_limit_is_symmetrized() {
        let spin = Spin::from_two_j(2);
        let ens = SpinEnsemble::single(spin);
        let mut r = crate::rng::stream(2, &[]);
        let h = crate::multispin::rescale_to_norm(&crate::multispin::gue(&mut r, 3), 1.0);
        let tau0 = 1e-5 / 24.0;
        let seq = tedd(tau0);
        let u = ideal_sequence_propagator(&SpinOperator::single(h.clone()), &seq, &ens).unwrap();
        let avg = group_average(&SpinOperator::single(h), &standard_group("T").unwrap(), &[spin]).unwrap();
        let approx = HermitianEvolution::new(&avg.averaged.matrix).exp(24.0 * tau0);
        assert!((u.matrix - approx).norm() < 1e-9);
    }

    #[test]
    fn finite_limit_matches_ideal() {
        let spin = Spin::half();
        let ens = SpinEnsemble::single(spin);
        let mut r = crate::rng::stream(4, &[]);
        let h = SpinOperator::single(crate::multispin::rescale_to_norm(&crate::multispin::gue(&mut r, 2), 1.0));
        let seq = tedd(0.01);
        let ideal = ideal_sequence_propagator(&h, &seq, &ens).unwrap();
        let m = ErrorModel { pulse_amplitude_chi: 1e9, ..ErrorModel::ideal() };
        let fin = finite_pulse_propagator(&h, &seq, &m, &ens).unwrap();
        assert!((ideal.matrix - fin.matrix).norm() < 1e-6);
        let zero = SpinOperator::zeros(vec![2]);
        let m = ErrorModel { pulse_amplitude_chi: 3.0, ..ErrorModel::ideal() };
        let u = finite_pulse_propagator(&zero, &seq.with_interval(0.0), &m, &ens).unwrap();
        assert!(distance(&u.matrix, 2).unwrap() < 1e-12);
    }

    #[test]
    fn tt_dagger() {
        let seq = tedd(1.0);
        let tt = time_antisymmetric(&seq);
        assert_eq!(tt.pulse_count(), 48);
        assert!(tt.ideal_product().is_identity(1e-10));
        let tt2 = time_antisymmetric(&tt);
        assert_eq!(tt2.steps.len(), 96);
        assert!(tt2.ideal_product().is_identity(1e-10));
        assert!((tt.total_interval() - 48.0).abs() < 1e-12);
    }

    #[test]
    fn slopes() {
        let xs: Vec<f64> = (0..8).map(|k| 1e-4 * 10f64.powf(k as f64 * 2.0 / 7.0)).collect();
        for p in [1, 2, 3] {
            let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 0.3 * x.powi(p))).collect();
            assert!((loglog_slope(&pts).unwrap() - p as f64).abs() < 1e-10);
        }
        assert!(matches!(loglog_slope(&[(1.0, 0.01), (2.0, 0.02)]), Err(Error::InsufficientPoints(2))));
    }
}
