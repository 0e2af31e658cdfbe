//! Unit-quaternion rotations and finite point groups.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Tolerance for identifying two quaternions as the same SO(3) element.
pub const SO3_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ORDER: usize = 360;

pub type Vec3 = [f64; 3];

/// A proper rotation stored as a unit quaternion `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub q: [f64; 4],
}

pub(crate) fn norm3(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn normalize3(v: Vec3) -> Vec3 {
    let n = norm3(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { q: [1.0, 0.0, 0.0, 0.0] };

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Rotation> {
        let n = norm3(axis);
        if !(n > 1e-15) || !n.is_finite() {
            return invalid("rotation axis must be nonzero and finite");
        }
        let (s, c) = (angle / 2.0).sin_cos();
        Ok(Rotation { q: [c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n] })
    }

    pub fn from_quaternion(q: [f64; 4]) -> Result<Rotation> {
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(n > 1e-15) {
            return invalid("zero quaternion");
        }
        Ok(Rotation { q: q.map(|c| c / n) })
    }

    /// Rotation with the given 3x3 matrix (rows), assumed orthogonal with det +1.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Rotation {
        let tr = m[0][0] + m[1][1] + m[2][2];
        let q = if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            [0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s]
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            [(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s]
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            [(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s]
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            [(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s]
        };
        Rotation::from_quaternion(q).expect("orthogonal matrix")
    }

    /// Rotation taking the z axis to `z` and the x axis to `x`.
    /// `x` is orthogonalized against `z` first.
    pub fn frame(z: Vec3, x: Vec3) -> Result<Rotation> {
        let z = normalize3(z);
        let xp = {
            let d = dot(x, z);
            [x[0] - d * z[0], x[1] - d * z[1], x[2] - d * z[2]]
        };
        if norm3(xp) < 1e-12 {
            return invalid("frame axes are parallel");
        }
        let x = normalize3(xp);
        let y = cross(z, x);
        let m = [[x[0], y[0], z[0]], [x[1], y[1], z[1]], [x[2], y[2], z[2]]];
        Ok(Rotation::from_matrix(m))
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        compose(self, other)
    }

    pub fn inverse(&self) -> Rotation {
        let [w, x, y, z] = self.q;
        Rotation { q: [w, -x, -y, -z] }
    }

    /// Rotation angle in [0, π].
    pub fn angle(&self) -> f64 {
        2.0 * self.q[0].abs().min(1.0).acos()
    }

    /// Axis and angle with angle in [0, 2π); axis is z for the identity.
    pub fn axis_angle(&self) -> (Vec3, f64) {
        let [w, x, y, z] = self.q;
        let s = (x * x + y * y + z * z).sqrt();
        if s < 1e-15 {
            return ([0.0, 0.0, 1.0], 0.0);
        }
        let angle = 2.0 * s.atan2(w);
        ([x / s, y / s, z / s], angle)
    }

    pub fn approx_eq(&self, other: &Rotation, tol: f64) -> bool {
        let mut dm = 0.0;
        let mut dp = 0.0;
        for i in 0..4 {
            dm += (self.q[i] - other.q[i]).powi(2);
            dp += (self.q[i] + other.q[i]).powi(2);
        }
        dm.sqrt().min(dp.sqrt()) < tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Rotation::IDENTITY, tol)
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = rotation_matrix(self);
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Sign-fixed quaternion: first component with |c| > tol made positive.
    pub fn canonical(&self) -> [f64; 4] {
        let sign = self.q.iter().find(|c| c.abs() > SO3_TOL).map(|c| c.signum()).unwrap_or(1.0);
        self.q.map(|c| c * sign)
    }

    fn key(&self) -> [i64; 4] {
        self.canonical().map(|c| (c / SO3_TOL).round() as i64)
    }
}

pub fn rotation_from_axis_angle(axis: Vec3, angle: f64) -> Result<Rotation> {
    Rotation::from_axis_angle(axis, angle)
}

/// Quaternion product `r1 r2` (apply `r2` first), renormalized.
pub fn compose(r1: &Rotation, r2: &Rotation) -> Rotation {
    let [a1, b1, c1, d1] = r1.q;
    let [a2, b2, c2, d2] = r2.q;
    let q = [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ];
    let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    Rotation { q: q.map(|c| c / n) }
}

pub fn rotation_matrix(r: &Rotation) -> [[f64; 3]; 3] {
    let [w, x, y, z] = r.q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

#[derive(Debug, Clone)]
pub struct PointGroup {
    pub name: String,
    pub elements: Vec<Rotation>,
    pub generators: Vec<(char, Rotation)>,
}

impl PointGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, r: &Rotation, tol: f64) -> bool {
        contains(self, r, tol)
    }

    pub fn index_of(&self, r: &Rotation, tol: f64) -> Option<usize> {
        self.elements.iter().position(|e| e.approx_eq(r, tol))
    }

    pub fn generator(&self, label: char) -> Option<&Rotation> {
        self.generators.iter().find(|(l, _)| *l == label).map(|(_, r)| r)
    }

    /// The conjugate group `r G r⁻¹` (same abstract group, rotated axes).
    pub fn conjugated(&self, r: &Rotation) -> PointGroup {
        let inv = r.inverse();
        let conj = |g: &Rotation| compose(&compose(r, g), &inv);
        PointGroup {
            name: self.name.clone(),
            elements: self.elements.iter().map(conj).collect(),
            generators: self.generators.iter().map(|(l, g)| (*l, conj(g))).collect(),
        }
    }

    /// Element counts grouped by rotation angle (rounded to 1e-6 rad), ascending angle.
    pub fn angle_classes(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for e in &self.elements {
            let a = e.angle();
            match out.iter_mut().find(|(b, _)| (a - *b).abs() < 1e-6) {
                Some(slot) => slot.1 += 1,
                None => out.push((a, 1)),
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    }
}

pub fn contains(group: &PointGroup, r: &Rotation, tol: f64) -> bool {
    group.elements.iter().any(|e| e.approx_eq(r, tol))
}

/// Breadth-first closure of the generators. Generators are labelled a, b, c, ...
pub fn generate_group(generators: &[Rotation], max_order: usize) -> Result<PointGroup> {
    let labelled: Vec<(char, Rotation)> =
        generators.iter().enumerate().map(|(i, g)| ((b'a' + i as u8) as char, *g)).collect();
    generate_labelled("", labelled, max_order)
}

pub fn generate_labelled(name: &str, generators: Vec<(char, Rotation)>, max_order: usize) -> Result<PointGroup> {
    let mut elements = vec![Rotation::IDENTITY];
    let mut index: HashMap<[i64; 4], usize> = HashMap::new();
    index.insert(Rotation::IDENTITY.key(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (_, g) in &generators {
            let mut next = compose(g, &elements[i]);
            next.q = next.canonical();
            let known = index.contains_key(&next.key()) || elements.iter().any(|e| e.approx_eq(&next, SO3_TOL));
            if known {
                continue;
            }
            if elements.len() >= max_order {
                return Err(Error::NonClosure(max_order));
            }
            index.insert(next.key(), elements.len());
            queue.push_back(elements.len());
            elements.push(next);
        }
    }
    Ok(PointGroup { name: name.to_string(), elements, generators })
}

pub fn golden_ratio() -> f64 {
    (5f64.sqrt() + 1.0) / 2.0
}

/// Generator pairs of the named groups.
pub fn standard_generators(name: &str) -> Result<(String, Vec<(char, Rotation)>)> {
    let r = |axis: Vec3, angle: f64| Rotation::from_axis_angle(axis, angle).unwrap();
    let (canon, gens) = match name.to_ascii_lowercase().as_str() {
        "d2" | "edd" => ("D2", vec![r([1.0, 0.0, 0.0], PI), r([0.0, 1.0, 0.0], PI)]),
        "t" | "tedd" => (
            "T",
            vec![
                r([0.0, 0.0, 1.0], 2.0 * PI / 3.0),
                r([2f64.sqrt() / 3.0, (2.0f64 / 3.0).sqrt(), 1.0 / 3.0], 2.0 * PI / 3.0),
            ],
        ),
        "o" | "oedd" => ("O", vec![r([0.0, 0.0, 1.0], PI / 2.0), r([1.0, 1.0, 1.0], 2.0 * PI / 3.0)]),
        "i" | "iedd" => {
            let phi = golden_ratio();
            ("I", vec![r([0.0, -1.0, phi], 2.0 * PI / 5.0), r([1.0 - phi, 0.0, phi], 2.0 * PI / 3.0)])
        }
        _ => return Err(Error::UnknownGroup(name.to_string())),
    };
    Ok((canon.to_string(), vec![('a', gens[0]), ('b', gens[1])]))
}

pub fn standard_group(name: &str) -> Result<PointGroup> {
    let (canon, gens) = standard_generators(name)?;
    generate_labelled(&canon, gens, DEFAULT_MAX_ORDER)
}

/// Cyclic group C_n about `axis`.
pub fn cyclic_group(n: usize, axis: Vec3) -> Result<PointGroup> {
    if n == 0 {
        return invalid("cyclic order must be positive");
    }
    let g = Rotation::from_axis_angle(axis, 2.0 * PI / n as f64)?;
    generate_labelled(&format!("C{n}"), vec![('a', g)], DEFAULT_MAX_ORDER)
}

/// Dihedral group D_n with principal axis `axis` and a C2 axis along `c2`.
pub fn dihedral_group(n: usize, axis: Vec3, c2: Vec3) -> Result<PointGroup> {
    if n == 0 {
        return invalid("dihedral order must be positive");
    }
    let a = Rotation::from_axis_angle(axis, 2.0 * PI / n as f64)?;
    let b = Rotation::from_axis_angle(c2, PI)?;
    generate_labelled(&format!("D{n}"), vec![('a', a), ('b', b)], DEFAULT_MAX_ORDER)
}
