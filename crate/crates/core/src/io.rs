//! Plain-text formats: operators, pulse sequences, Hamiltonian specs and scan configs.

use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multispin::{
    dipolar_tensor, multilinear_hamiltonian, project_anisotropic, rescale_to_norm, InteractionTensor, SpinEnsemble,
};
use crate::simulate::scan::Family;
use crate::simulate::{ErrorModel, GridAxis, Pulse, PulseSequence, ScanConfig, SequenceSpec, Step};
use crate::spin_algebra::{CMat, Spin, SpinOperator};

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn num(line: usize, s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().or_else(|_| perr(line, format!("bad number `{s}`"))),
    }
}

fn spin_list(line: usize, s: &str) -> Result<Vec<Spin>> {
    s.split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| Spin::parse(t).or_else(|e| perr(line, e.to_string())))
        .collect()
}

pub fn write_operator(m: &CMat) -> String {
    let d = m.nrows();
    let mut s = format!("dim {d}\n");
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| format!("{},{}", m[(i, j)].re, m[(i, j)].im)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// `dim d` followed by d rows of d entries `re,im`.
pub fn parse_operator(text: &str) -> Result<CMat> {
    let mut lines = content_lines(text);
    let (l0, head) = lines.next().map_or_else(|| perr(0, "empty operator file"), Ok)?;
    let d = match head.split_whitespace().collect::<Vec<_>>()[..] {
        ["dim", d] => d.parse::<usize>().or_else(|_| perr(l0, "bad dimension"))?,
        _ => return perr(l0, "expected `dim d`"),
    };
    if d == 0 {
        return perr(l0, "dimension must be positive");
    }
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        let (ln, row) = lines.next().map_or_else(|| perr(l0, format!("expected {d} rows")), Ok)?;
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != d {
            return perr(ln, format!("expected {d} entries, got {}", entries.len()));
        }
        for (j, e) in entries.iter().enumerate() {
            let (re, im) = e.split_once(',').unwrap_or((e, "0"));
            m[(i, j)] = Complex64::new(num(ln, re)?, num(ln, im)?);
        }
    }
    if let Some((ln, _)) = lines.next() {
        return perr(ln, "trailing content");
    }
    Ok(m)
}

/// One line per step: `<interval> <axis_x> <axis_y> <axis_z> <angle>`; a zero angle is an
/// identity slot.
pub fn write_sequence(seq: &PulseSequence) -> String {
    let mut s = String::new();
    if let Some(g) = &seq.group {
        s.push_str(&format!("# group {g}\n"));
    }
    if let Some(w) = &seq.word {
        s.push_str(&format!("# word {w}\n"));
    }
    for st in &seq.steps {
        let (axis, angle) = match st.pulse {
            Pulse::Rotation { axis, angle } => (axis, angle),
            Pulse::Identity => ([0.0, 0.0, 1.0], 0.0),
        };
        s.push_str(&format!("{} {} {} {} {}\n", st.interval, axis[0], axis[1], axis[2], angle));
    }
    s
}

pub fn parse_sequence(text: &str) -> Result<PulseSequence> {
    let mut steps = Vec::new();
    for (ln, l) in content_lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 5 {
            return perr(ln, "expected `<interval> <x> <y> <z> <angle>`");
        }
        let v: Vec<f64> = f.iter().map(|x| num(ln, x)).collect::<Result<_>>()?;
        if !(v[0] >= 0.0 && v[0].is_finite()) {
            return perr(ln, "interval must be finite and nonnegative");
        }
        let n = (v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
        let pulse = if v[4] == 0.0 {
            Pulse::Identity
        } else if n > 0.0 && n.is_finite() {
            Pulse::Rotation { axis: [v[1] / n, v[2] / n, v[3] / n], angle: v[4] }
        } else {
            return perr(ln, "zero axis");
        };
        steps.push(Step { interval: v[0], pulse });
    }
    Ok(PulseSequence::new(steps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerm {
    pub tensor: InteractionTensor,
    pub anisotropic: bool,
    /// Target operator norm of the term; `None` keeps the tensor's own scale.
    pub norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub spins: Vec<Spin>,
    pub terms: Vec<HamiltonianTerm>,
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<SpinOperator> {
        let ens = SpinEnsemble::new(self.spins.clone())?;
        let d = ens.dim();
        let mut out = CMat::zeros(d, d);
        for t in &self.terms {
            let tensor = if t.anisotropic { project_anisotropic(&t.tensor)? } else { t.tensor.clone() };
            let m = multilinear_hamiltonian(&tensor, &ens)?.matrix;
            out += match t.norm {
                Some(n) => rescale_to_norm(&m, n),
                None => m,
            };
        }
        Ok(SpinOperator { dims: ens.dims(), matrix: out })
    }
}

/// `spins = ...` then `[term]` blocks with `sites`, `tensor` (or `dipolar = ex ey ez` with
/// optional `strength`), `anisotropic` and `norm`.
pub fn parse_hamiltonian(text: &str) -> Result<HamiltonianSpec> {
    struct Block {
        line: usize,
        sites: Option<Vec<usize>>,
        tensor: Option<Vec<f64>>,
        dipolar: Option<[f64; 3]>,
        strength: f64,
        anisotropic: bool,
        norm: Option<f64>,
    }
    let mut spins = None;
    let mut blocks: Vec<Block> = Vec::new();
    for (ln, l) in content_lines(text) {
        if l == "[term]" {
            blocks.push(Block {
                line: ln,
                sites: None,
                tensor: None,
                dipolar: None,
                strength: 1.0,
                anisotropic: false,
                norm: None,
            });
            continue;
        }
        let Some((k, v)) = l.split_once('=') else {
            return perr(ln, "expected key = value");
        };
        let (k, v) = (k.trim(), v.trim());
        let nums = |v: &str| -> Result<Vec<f64>> {
            v.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|t| !t.is_empty()).map(|t| num(ln, t)).collect()
        };
        match (k, blocks.last_mut()) {
            ("spins", None) => spins = Some(spin_list(ln, v)?),
            ("sites", Some(b)) => {
                let s: Result<Vec<usize>> = v
                    .split(|ch: char| ch == ',' || ch.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse().or_else(|_| perr(ln, "bad site index")))
                    .collect();
                b.sites = Some(s?);
            }
            ("tensor", Some(b)) => b.tensor = Some(nums(v)?),
            ("dipolar", Some(b)) => match nums(v)?[..] {
                [x, y, z] => b.dipolar = Some([x, y, z]),
                _ => return perr(ln, "dipolar needs three components"),
            },
            ("strength", Some(b)) => b.strength = num(ln, v)?,
            ("anisotropic", Some(b)) => b.anisotropic = v.parse().or_else(|_| perr(ln, "expected true or false"))?,
            ("norm", Some(b)) => b.norm = Some(num(ln, v)?),
            _ => return perr(ln, format!("unexpected key `{k}`")),
        }
    }
    let spins = spins.map_or_else(|| perr(0, "missing `spins`"), Ok)?;
    let mut terms = Vec::new();
    for b in blocks {
        let sites = b.sites.map_or_else(|| perr(b.line, "term without sites"), Ok)?;
        let mut tensor = match (b.tensor, b.dipolar) {
            (Some(t), None) => InteractionTensor::new(sites, t).or_else(|e| perr(b.line, e.to_string()))?,
            (None, Some(e)) => {
                if sites.len() != 2 {
                    return perr(b.line, "dipolar terms need two sites");
                }
                let n = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
                if n == 0.0 {
                    return perr(b.line, "zero dipolar direction");
                }
                dipolar_tensor(sites, [e[0] / n, e[1] / n, e[2] / n])
            }
            _ => return perr(b.line, "term needs exactly one of tensor or dipolar"),
        };
        tensor.entries.iter_mut().for_each(|x| *x *= b.strength);
        terms.push(HamiltonianTerm { tensor, anisotropic: b.anisotropic, norm: b.norm });
    }
    Ok(HamiltonianSpec { spins, terms })
}

/// Scan config: `key = value` lines. Axes are `axis = <name> log|lin <min> <max> <points>`
/// or `axis = <name> list <v1> <v2> ...`; fixed parameters are `param.<name> = v`.
/// `file:<path>` sequences resolve relative to `base`.
pub fn parse_scan_config(text: &str, base: &Path) -> Result<ScanConfig> {
    let mut family = None;
    let mut anisotropic = true;
    let mut spins = Vec::new();
    let mut seqs_raw: Vec<(usize, String)> = Vec::new();
    let mut cfg = ScanConfig::new(Family::Gue, Vec::new());
    let mut errors = ErrorModel::ideal();
    for (ln, l) in content_lines(text) {
        let Some((k, v)) = l.split_once('=') else {
            return perr(ln, "expected key = value");
        };
        let (k, v) = (k.trim(), v.trim());
        let words: Vec<&str> = v.split_whitespace().collect();
        match k {
            "family" => family = Some((ln, v.to_string())),
            "anisotropic" => anisotropic = v.parse().or_else(|_| perr(ln, "expected true or false"))?,
            "spins" => spins = spin_list(ln, v)?,
            "sequences" => {
                seqs_raw.extend(v.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).map(|s| (ln, s.to_string())))
            }
            "axis" => {
                let axis = match words[..] {
                    [name, "log", a, b, n] | [name, "lin", a, b, n] => {
                        let n: usize = n.parse().or_else(|_| perr(ln, "bad point count"))?;
                        let (a, b) = (num(ln, a)?, num(ln, b)?);
                        let r = if words[1] == "log" {
                            GridAxis::log(name, a, b, n)
                        } else {
                            GridAxis::linear(name, a, b, n)
                        };
                        r.or_else(|e| perr(ln, e.to_string()))?
                    }
                    [name, "list", ref vals @ ..] if !vals.is_empty() => {
                        let vals = vals.iter().map(|x| match Spin::parse(x) {
                            Ok(s) if name == "j" => Ok(s.j()),
                            _ => num(ln, x),
                        });
                        GridAxis::list(name, vals.collect::<Result<_>>()?)
                    }
                    _ => return perr(ln, "expected `axis = <name> log|lin <min> <max> <points>` or `<name> list ...`"),
                };
                cfg.axes.push(axis);
            }
            "samples" => cfg.samples = v.parse().or_else(|_| perr(ln, "bad sample count"))?,
            "seed" => cfg.seed = v.parse().or_else(|_| perr(ln, "bad seed"))?,
            "flip_angle_eps" => errors.flip_angle_eps = num(ln, v)?,
            "axis_misspec_eps" => errors.axis_misspec_eps = num(ln, v)?,
            "chi" => errors.pulse_amplitude_chi = num(ln, v)?,
            "interval" => cfg.interval = Some(num(ln, v)?),
            "gate_angle" => cfg.gate_angle = num(ln, v)?,
            "gate_duration" => cfg.gate_duration = Some(num(ln, v)?),
            "gate_axis" => match words.iter().map(|w| num(ln, w.trim_matches(','))).collect::<Result<Vec<_>>>()?[..] {
                [x, y, z] => cfg.gate_axis = [x, y, z],
                _ => return perr(ln, "gate_axis needs three components"),
            },
            _ => match k.strip_prefix("param.") {
                Some(p) => cfg.fixed.push((p.to_string(), num(ln, v)?)),
                None => return perr(ln, format!("unknown key `{k}`")),
            },
        }
    }
    let (fl, fam) = family.map_or_else(|| perr(0, "missing `family`"), Ok)?;
    cfg.family = Family::parse(&fam, anisotropic).or_else(|e| perr(fl, e.to_string()))?;
    cfg.spins = spins;
    cfg.errors = errors;
    for (ln, s) in seqs_raw {
        let spec = match s.strip_prefix("file:") {
            Some(p) => {
                let path: PathBuf = base.join(p);
                let text = std::fs::read_to_string(&path).or_else(|e| perr(ln, format!("{}: {e}", path.display())))?;
                let seq = parse_sequence(&text)?;
                let name = path.file_stem().map_or("file".into(), |s| s.to_string_lossy().into_owned());
                SequenceSpec::Custom { name, seq }
            }
            None => SequenceSpec::parse(&s).or_else(|e| perr(ln, e.to_string()))?,
        };
        cfg.sequences.push(spec);
    }
    cfg.validate().or_else(|e| perr(0, e.to_string()))?;
    Ok(cfg)
}
