//! Scenario files: TOML with unit-suffixed string values for every physical
//! quantity.
//!
//! ```toml
//! name = "sphere sweep"
//! power = "100pW"
//!
//! [medium]
//! preset = "low"
//!
//! [radiator]
//! kind = "sphere"
//!
//! [sweep]
//! radius = ["0.5um", "5um", "50um"]
//! frequency = { from = "1MHz", to = "1GHz", points = 31 }
//!
//! [evaluation]
//! distance = "100um"
//! ```

use crate::commands::{
    beam_points, disk_points, link_row, ringset_points, sphere_points, BeamPlan, Ctx, RingsetPlan, SpherePlan,
    LINK_COLUMNS,
};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Output, Table};
use serde::{Deserialize, Serialize};
use sonolink::comms::{evaluate_link, RadiatorModel, Receiver, Transmitter};
use sonolink::directivity::{grid_xz, superpose, Coherence, Emitter, EmitterSet};
use sonolink::fem::{MeshParams, Obstacle, PhaseProfile, RingsetGeometry, SurfaceSelector};
use sonolink::medium::{AttenuationModel, PowerLawTerm, ViscositySplit};
use sonolink::safety::SafetyLimits;
use sonolink::units::{parse_quantity, Dimension, MHZ, MICRON};
use sonolink::Medium;
use num_complex::Complex64;
use std::path::Path;
use toml::{Spanned, Value};

type Q = Spanned<Value>;

/// 100 um, written so it equals the parsed `"100um"` exactly.
const DEFAULT_DISTANCE: f64 = 1e-4;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    name: Option<String>,
    power: Option<Q>,
    medium: Option<RawMedium>,
    radiator: RawRadiator,
    actuation: Option<RawActuation>,
    evaluation: Option<RawEvaluation>,
    receiver: Option<RawReceiver>,
    sweep: Option<RawSweep>,
    mesh: Option<RawMesh>,
    safety: Option<RawSafety>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMedium {
    preset: Option<String>,
    speed: Option<Q>,
    density: Option<Q>,
    temperature: Option<Q>,
    thermal_conductivity: Option<Q>,
    heat_capacity: Option<Q>,
    /// Terms `coefficient · f_MHz^exponent`.
    attenuation: Option<Vec<RawTerm>>,
    /// Fixed shear viscosity; otherwise shear and bulk are equal.
    shear_viscosity: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coefficient: Q,
    exponent: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadiator {
    kind: Spanned<String>,
    #[serde(default)]
    directed: bool,
    radius: Option<Q>,
    length: Option<Q>,
    outer_radius: Option<Q>,
    inner_radius: Option<Q>,
    taper: Option<Q>,
    diameter: Option<Q>,
    #[serde(default = "yes")]
    coherent: bool,
    emitter: Option<Vec<RawEmitter>>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmitter {
    position: Q,
    radius: Q,
    /// Surface displacement over radius (dimensionless).
    amplitude: f64,
    phase: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawActuation {
    surface: Option<Spanned<String>>,
    phase: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvaluation {
    distance: Option<Q>,
    angle: Option<Q>,
    pattern_radius: Option<Q>,
    grid: Option<RawGrid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x: Q,
    z: Q,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReceiver {
    area: Option<Q>,
    bandwidth: Option<Q>,
    temperature: Option<Q>,
    snr: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    frequency: Option<Q>,
    radius: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    scale: Option<f64>,
    domain_radius: Option<Q>,
    h_max: Option<Q>,
    h_surface: Option<Q>,
    grading: Option<f64>,
    elements_per_wavelength: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSafety {
    #[serde(default)]
    enforce: bool,
    limits: Option<RawLimits>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLimits {
    max_flux: Option<Q>,
    membranolytic: Option<Q>,
    red_cell_rupture: Option<Q>,
    repeated_overpressure: Option<Q>,
    endothelial_static: Option<Q>,
    osmotic: Option<Q>,
    provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmitterSpec {
    pub position: [f64; 3],
    pub radius: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Radiator {
    Sphere { directed: bool },
    Ringset(RingsetGeometry),
    Disk { diameter: f64 },
    Emitters { coherent: bool, emitters: Vec<EmitterSpec> },
}

/// Evaluation grid in the `y = 0` plane: `(from, to, points)` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x: (f64, f64, usize),
    pub z: (f64, f64, usize),
}

/// A validated scenario in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub medium: Medium,
    pub radiator: Radiator,
    pub power: f64,
    pub surface: SurfaceSelector,
    pub phase: PhaseProfile,
    pub frequencies: Vec<f64>,
    pub radii: Vec<f64>,
    pub distances: Vec<f64>,
    pub angles: Vec<f64>,
    pub pattern_radius: f64,
    pub grid: Option<Grid>,
    pub receiver: Option<Receiver>,
    pub mesh: MeshParams,
    pub enforce_safety: bool,
    pub limits: SafetyLimits,
}

/// Turns spans into `file:line:column` locations.
struct Source<'a> {
    name: String,
    text: &'a str,
}

impl Source<'_> {
    fn at(&self, span: std::ops::Range<usize>, field: &str, msg: impl std::fmt::Display) -> CliError {
        let before = &self.text[..span.start.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        CliError::validation(format!("{}:{line}:{col}: `{field}`: {msg}", self.name))
    }

    fn quantity(&self, q: &Q, field: &str, dim: Dimension) -> CliResult<f64> {
        match q.get_ref() {
            Value::String(s) => parse_quantity(s, dim).map_err(|e| self.at(q.span(), field, e)),
            Value::Integer(_) | Value::Float(_) => Err(self.at(
                q.span(),
                field,
                format!("unitless number for a {dim}; write it as a string with a unit, e.g. \"{}\"", example(q, dim)),
            )),
            other => Err(self.at(q.span(), field, format!("expected a quantity string, found {}", other.type_str()))),
        }
    }

    fn opt(&self, q: &Option<Q>, field: &str, dim: Dimension, default: f64) -> CliResult<f64> {
        q.as_ref().map_or(Ok(default), |q| self.quantity(q, field, dim))
    }

    /// A single value, a list, or `{ from, to, points, spacing = "log" | "linear" }`.
    fn axis(&self, q: &Q, field: &str, dim: Dimension) -> CliResult<Vec<f64>> {
        let err = |msg: String| self.at(q.span(), field, msg);
        let scalar = |v: &Value| -> CliResult<f64> {
            match v {
                Value::String(s) => parse_quantity(s, dim).map_err(|e| err(e.to_string())),
                Value::Integer(_) | Value::Float(_) => {
                    Err(err(format!("unitless number for a {dim}; write values as strings with units")))
                }
                other => Err(err(format!("expected a quantity string, found {}", other.type_str()))),
            }
        };
        let values = match q.get_ref() {
            Value::Array(items) => items.iter().map(scalar).collect::<CliResult<Vec<_>>>()?,
            Value::Table(t) => {
                for key in t.keys() {
                    if !["from", "to", "points", "spacing"].contains(&key.as_str()) {
                        return Err(err(format!("unknown range key `{key}` (expected from, to, points, spacing)")));
                    }
                }
                let get = |k: &str| t.get(k).ok_or_else(|| err(format!("range needs `{k}`")));
                let (lo, hi) = (scalar(get("from")?)?, scalar(get("to")?)?);
                let n = get("points")?
                    .as_integer()
                    .filter(|n| *n >= 0)
                    .ok_or_else(|| err("`points` must be a nonnegative integer".into()))? as usize;
                match t.get("spacing").map(|v| v.as_str()) {
                    None | Some(Some("log")) => crate::cli::log_range(lo, hi, n).map_err(err)?,
                    Some(Some("linear")) => linear_range(lo, hi, n).map_err(err)?,
                    _ => return Err(err("`spacing` must be \"log\" or \"linear\"".into())),
                }
            }
            v => vec![scalar(v)?],
        };
        if values.is_empty() {
            return Err(err("sweep is empty".into()));
        }
        Ok(values)
    }

    fn keyword<'k>(&self, s: &Spanned<String>, field: &str, allowed: &[&'k str]) -> CliResult<&'k str> {
        allowed.iter().find(|a| **a == s.get_ref()).copied().ok_or_else(|| {
            self.at(s.span(), field, format!("`{}` is not one of {}", s.get_ref(), allowed.join(", ")))
        })
    }
}

fn example(q: &Q, dim: Dimension) -> String {
    let unit = sonolink::units::example_unit(dim);
    match q.get_ref() {
        Value::Integer(i) => format!("{i}{unit}"),
        Value::Float(f) => format!("{f}{unit}"),
        _ => unit.to_string(),
    }
}

fn linear_range(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, String> {
    if n == 0 {
        return Err("sweep is empty".into());
    }
    if !(hi >= lo) {
        return Err("linear range needs from <= to".into());
    }
    Ok((0..n).map(|j| if n == 1 { lo } else { lo + (hi - lo) * j as f64 / (n - 1) as f64 }).collect())
}

pub fn load(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

pub fn parse(text: &str, name: &str) -> CliResult<Scenario> {
    let raw: Raw = toml::from_str(text).map_err(|e| {
        let loc = e.span().map(|s| {
            let before = &text[..s.start.min(text.len())];
            format!(":{}", before.matches('\n').count() + 1)
        });
        CliError::validation(format!("{name}{}: {}", loc.unwrap_or_default(), e.message()))
    })?;
    let src = Source { name: name.to_string(), text };
    resolve(raw, &src)
}

fn resolve(raw: Raw, src: &Source) -> CliResult<Scenario> {
    let medium = resolve_medium(raw.medium, src)?;
    let sweep = raw.sweep.unwrap_or(RawSweep { frequency: None, radius: None });
    let frequencies = match &sweep.frequency {
        Some(q) => src.axis(q, "sweep.frequency", Dimension::Frequency)?,
        None => return Err(CliError::validation(format!("{}: `sweep.frequency` is required", src.name))),
    };
    let r = &raw.radiator;
    let kind = src.keyword(&r.kind, "radiator.kind", &["sphere", "ringset", "disk", "emitters"])?;
    let mut radii = Vec::new();
    let radiator = match kind {
        "sphere" => {
            radii = match (&sweep.radius, &r.radius) {
                (Some(q), None) => src.axis(q, "sweep.radius", Dimension::Length)?,
                (None, Some(q)) => vec![src.quantity(q, "radiator.radius", Dimension::Length)?],
                (Some(q), Some(_)) => {
                    return Err(src.at(q.span(), "sweep.radius", "give the radius in the radiator or the sweep, not both"))
                }
                (None, None) => return Err(src.at(r.kind.span(), "radiator", "a sphere needs `radius` or `sweep.radius`")),
            };
            Radiator::Sphere { directed: r.directed }
        }
        "ringset" => {
            let d = RingsetGeometry::default();
            let g = RingsetGeometry {
                length: src.opt(&r.length, "radiator.length", Dimension::Length, d.length)?,
                outer_radius: src.opt(&r.outer_radius, "radiator.outer_radius", Dimension::Length, d.outer_radius)?,
                inner_radius: src.opt(&r.inner_radius, "radiator.inner_radius", Dimension::Length, d.inner_radius)?,
                taper: src.opt(&r.taper, "radiator.taper", Dimension::Length, d.taper)?,
            };
            g.validate().map_err(|e| src.at(r.kind.span(), "radiator", e))?;
            Radiator::Ringset(g)
        }
        "disk" => {
            let q = r.diameter.as_ref().ok_or_else(|| src.at(r.kind.span(), "radiator", "a disk radiator needs `diameter`"))?;
            Radiator::Disk { diameter: src.quantity(q, "radiator.diameter", Dimension::Length)? }
        }
        _ => {
            let list = r.emitter.as_ref().filter(|l| !l.is_empty()).ok_or_else(|| {
                src.at(r.kind.span(), "radiator", "an emitter set needs at least one [[radiator.emitter]]")
            })?;
            let emitters = list
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let field = format!("radiator.emitter[{i}]");
                    let pos = match e.position.get_ref() {
                        Value::Array(items) if items.len() == 3 => {
                            let mut p = [0.0; 3];
                            for (j, v) in items.iter().enumerate() {
                                let q = Spanned::new(e.position.span(), v.clone());
                                p[j] = src.quantity(&q, &format!("{field}.position"), Dimension::Length)?;
                            }
                            p
                        }
                        _ => return Err(src.at(e.position.span(), &format!("{field}.position"), "expected three lengths")),
                    };
                    Ok(EmitterSpec {
                        position: pos,
                        radius: src.quantity(&e.radius, &format!("{field}.radius"), Dimension::Length)?,
                        amplitude: e.amplitude,
                        phase: src.opt(&e.phase, &format!("{field}.phase"), Dimension::Angle, 0.0)?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            Radiator::Emitters { coherent: r.coherent, emitters }
        }
    };
    if kind != "sphere" {
        if let Some(q) = &sweep.radius {
            return Err(src.at(q.span(), "sweep.radius", format!("a radius sweep does not apply to a {kind} radiator")));
        }
    }

    let power = src.opt(&raw.power, "power", Dimension::Power, 100e-12)?;
    if !(power > 0.0) {
        return Err(src.at(raw.power.as_ref().unwrap().span(), "power", "power must be positive"));
    }
    let (mut surface, mut phase) = (SurfaceSelector::Outer, PhaseProfile::Uniform);
    if let Some(a) = &raw.actuation {
        if let Some(s) = &a.surface {
            surface = match src.keyword(s, "actuation.surface", &["outer", "inner", "ends"])? {
                "outer" => SurfaceSelector::Outer,
                "inner" => SurfaceSelector::Inner,
                _ => SurfaceSelector::Ends,
            };
        }
        if let Some(p) = &a.phase {
            phase = match src.keyword(p, "actuation.phase", &["uniform", "forward", "backward"])? {
                "uniform" => PhaseProfile::Uniform,
                "forward" => PhaseProfile::Traveling { sign: 1 },
                _ => PhaseProfile::Traveling { sign: -1 },
            };
        }
    }

    let eval = raw.evaluation.unwrap_or(RawEvaluation { distance: None, angle: None, pattern_radius: None, grid: None });
    let distances = match &eval.distance {
        Some(q) => src.axis(q, "evaluation.distance", Dimension::Length)?,
        None => vec![DEFAULT_DISTANCE],
    };
    let angles = match &eval.angle {
        Some(q) => src.axis(q, "evaluation.angle", Dimension::Angle)?,
        None => vec![0.0],
    };
    let pattern_radius = src.opt(&eval.pattern_radius, "evaluation.pattern_radius", Dimension::Length, DEFAULT_DISTANCE)?;
    let grid = match &eval.grid {
        Some(g) => {
            let axis = |q: &Q, f: &str| -> CliResult<(f64, f64, usize)> {
                let v = src.axis(q, f, Dimension::Length)?;
                Ok((v[0], *v.last().unwrap(), v.len()))
            };
            Some(Grid { x: axis(&g.x, "evaluation.grid.x")?, z: axis(&g.z, "evaluation.grid.z")? })
        }
        None => None,
    };
    if matches!(radiator, Radiator::Emitters { .. }) && grid.is_none() {
        return Err(CliError::validation(format!("{}: an emitter set needs `evaluation.grid`", src.name)));
    }

    let receiver = match &raw.receiver {
        Some(r) => {
            let d = Receiver::default();
            let rx = Receiver {
                area: src.opt(&r.area, "receiver.area", Dimension::Area, d.area)?,
                bandwidth: src.opt(&r.bandwidth, "receiver.bandwidth", Dimension::Frequency, d.bandwidth)?,
                temperature: src.opt(&r.temperature, "receiver.temperature", Dimension::Temperature, d.temperature)?,
                snr_threshold: r.snr.unwrap_or(d.snr_threshold),
            };
            rx.validate()?;
            Some(rx)
        }
        None => None,
    };

    let mut mesh = MeshParams::default();
    if let Some(m) = &raw.mesh {
        if let Some(s) = m.scale {
            if !(s > 0.0) {
                return Err(CliError::validation(format!("{}: `mesh.scale` must be positive", src.name)));
            }
            mesh = mesh.scaled(s);
        }
        mesh.domain_radius = src.opt(&m.domain_radius, "mesh.domain_radius", Dimension::Length, mesh.domain_radius)?;
        mesh.h_max = src.opt(&m.h_max, "mesh.h_max", Dimension::Length, mesh.h_max)?;
        mesh.h_surface = src.opt(&m.h_surface, "mesh.h_surface", Dimension::Length, mesh.h_surface)?;
        mesh.grading = m.grading.unwrap_or(mesh.grading);
        mesh.elements_per_wavelength = m.elements_per_wavelength.unwrap_or(mesh.elements_per_wavelength);
        mesh.validate()?;
    }

    let (enforce_safety, limits) = match &raw.safety {
        Some(s) => {
            let d = SafetyLimits::default();
            let limits = match &s.limits {
                Some(l) => SafetyLimits {
                    max_flux: src.opt(&l.max_flux, "safety.limits.max_flux", Dimension::Flux, d.max_flux)?,
                    membranolytic: src.opt(&l.membranolytic, "safety.limits.membranolytic", Dimension::Pressure, d.membranolytic)?,
                    red_cell_rupture: src.opt(&l.red_cell_rupture, "safety.limits.red_cell_rupture", Dimension::Pressure, d.red_cell_rupture)?,
                    repeated_overpressure: src.opt(
                        &l.repeated_overpressure,
                        "safety.limits.repeated_overpressure",
                        Dimension::Pressure,
                        d.repeated_overpressure,
                    )?,
                    endothelial_static: src.opt(&l.endothelial_static, "safety.limits.endothelial_static", Dimension::Pressure, d.endothelial_static)?,
                    osmotic: src.opt(&l.osmotic, "safety.limits.osmotic", Dimension::Pressure, d.osmotic)?,
                    provenance: l.provenance.clone(),
                },
                None => d,
            };
            limits.validate()?;
            (s.enforce, limits)
        }
        None => (false, SafetyLimits::default()),
    };

    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| "scenario".into()),
        medium,
        radiator,
        power,
        surface,
        phase,
        frequencies,
        radii,
        distances,
        angles,
        pattern_radius,
        grid,
        receiver,
        mesh,
        enforce_safety,
        limits,
    })
}

fn resolve_medium(raw: Option<RawMedium>, src: &Source) -> CliResult<Medium> {
    let Some(m) = raw else {
        return Err(CliError::validation(format!("{}: a [medium] section is required", src.name)));
    };
    let mut medium = match (&m.preset, &m.attenuation) {
        (Some(p), None) => Medium::preset(p)?,
        (None, Some(terms)) => {
            let terms = terms
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    Ok(PowerLawTerm {
                        coefficient: src.quantity(&t.coefficient, &format!("medium.attenuation[{i}].coefficient"), Dimension::Attenuation)?,
                        exponent: t.exponent,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            Medium::with_attenuation(AttenuationModel::new(terms)?)
        }
        (Some(_), Some(_)) => {
            return Err(CliError::validation(format!("{}: give `medium.preset` or `medium.attenuation`, not both", src.name)))
        }
        (None, None) => {
            return Err(CliError::validation(format!("{}: the medium needs `preset` or `attenuation`", src.name)))
        }
    };
    medium.speed = src.opt(&m.speed, "medium.speed", Dimension::Speed, medium.speed)?;
    medium.density = src.opt(&m.density, "medium.density", Dimension::Density, medium.density)?;
    medium.temperature = src.opt(&m.temperature, "medium.temperature", Dimension::Temperature, medium.temperature)?;
    medium.thermal_conductivity =
        src.opt(&m.thermal_conductivity, "medium.thermal_conductivity", Dimension::Conductivity, medium.thermal_conductivity)?;
    medium.heat_capacity = src.opt(&m.heat_capacity, "medium.heat_capacity", Dimension::SpecificHeat, medium.heat_capacity)?;
    if let Some(q) = &m.shear_viscosity {
        medium.viscosity_split =
            ViscositySplit::FixedShear { shear: src.quantity(q, "medium.shear_viscosity", Dimension::Viscosity)? };
    }
    medium.validate()?;
    Ok(medium)
}

/// Execute the pipeline the radiator calls for.
pub fn run(ctx: &Ctx, sc: &Scenario) -> CliResult<Output> {
    let mut out = Output::new(serde_json::to_value(sc).expect("scenario serializes"));
    out.enforce_safety = sc.enforce_safety;
    let mut links = Table::new("link", &[&["case"], &LINK_COLUMNS[..]].concat());
    match &sc.radiator {
        Radiator::Sphere { directed: false } => {
            let plan = SpherePlan {
                radii: &sc.radii,
                frequencies: &sc.frequencies,
                distances: &sc.distances,
                power: sc.power,
                medium: &sc.medium,
            };
            sphere_points(ctx, &plan, &mut out)?;
            if let Some(rx) = &sc.receiver {
                for &a in &sc.radii {
                    for &f in &sc.frequencies {
                        let tx = Transmitter {
                            model: RadiatorModel::SphereUniform { radius: a },
                            power: sc.power,
                            frequency: f,
                            medium: sc.medium.clone(),
                        };
                        link_rows(ctx, &mut links, &format!("a={:.3}um f={:.3}MHz", a / MICRON, f / MHZ), &tx, sc, rx)?;
                    }
                }
            }
        }
        Radiator::Sphere { directed: true } => {
            let (&[radius], &[distance]) = (sc.radii.as_slice(), sc.distances.as_slice()) else {
                return Err(CliError::validation(
                    "a directed sphere takes one radius and one evaluation distance; sweep the frequency only",
                ));
            };
            let plan = BeamPlan { radius, frequencies: &sc.frequencies, distance, power: sc.power, medium: &sc.medium };
            beam_points(ctx, &plan, &mut out)?;
            if let Some(rx) = &sc.receiver {
                for &f in &sc.frequencies {
                    let tx = Transmitter {
                        model: RadiatorModel::SphereDirected { radius },
                        power: sc.power,
                        frequency: f,
                        medium: sc.medium.clone(),
                    };
                    link_rows(ctx, &mut links, &format!("f={:.3}MHz", f / MHZ), &tx, sc, rx)?;
                }
            }
        }
        Radiator::Ringset(g) => {
            let plan = RingsetPlan {
                geometry: *g,
                frequencies: sc.frequencies.clone(),
                medium: sc.medium.clone(),
                power: sc.power,
                selector: sc.surface,
                phase: sc.phase,
                mesh: sc.mesh,
                pattern_radius: sc.pattern_radius,
                snapshot: None,
            };
            let patterns = ringset_points(ctx, &plan, &mut out)?;
            if let Some(rx) = &sc.receiver {
                for (&f, p) in sc.frequencies.iter().zip(patterns) {
                    let tx = Transmitter {
                        model: RadiatorModel::Pattern { pattern: p, reference_power: sc.power, extent: Obstacle::Ringset(*g).extent() },
                        power: sc.power,
                        frequency: f,
                        medium: sc.medium.clone(),
                    };
                    link_rows(ctx, &mut links, &format!("f={:.3}MHz", f / MHZ), &tx, sc, rx)?;
                }
            }
        }
        Radiator::Disk { diameter } => {
            let wavelengths: Vec<f64> = sc.frequencies.iter().map(|f| sc.medium.speed / f).collect();
            disk_points(*diameter, &wavelengths, 181, &mut out)?;
        }
        Radiator::Emitters { coherent, emitters } => {
            let grid = sc.grid.expect("validated");
            let points = grid_xz((grid.x.0, grid.x.1), (grid.z.0, grid.z.1), grid.x.2, grid.z.2);
            let mut t = Table::new("intensity", &["frequency_MHz", "x_um", "z_um", "intensity_pW_per_um2"]);
            for &f in &sc.frequencies {
                let list = emitters
                    .iter()
                    .map(|e| Emitter {
                        position: e.position,
                        radius: e.radius,
                        amplitude: Complex64::from_polar(e.amplitude, e.phase),
                        frequency: f,
                    })
                    .collect();
                let coherence = if *coherent { Coherence::Coherent } else { Coherence::Incoherent };
                let set = EmitterSet::new(list, coherence, sc.medium.clone())?;
                let map = superpose(&set, &points, ctx.exec)?;
                for (p, i) in map.points.iter().zip(&map.intensity) {
                    if let Some(i) = i {
                        t.push(vec![Cell::Num(f / MHZ), Cell::Num(p[0] / MICRON), Cell::Num(p[2] / MICRON), Cell::Num(*i)]);
                    }
                }
                if map.excluded() > 0 {
                    out.note(format!("{} grid points inside emitters skipped at {:.3} MHz", map.excluded(), f / MHZ));
                }
            }
            out.tables.push(t);
        }
    }
    if !links.rows.is_empty() {
        out.tables.push(links);
    }
    Ok(out)
}

fn link_rows(ctx: &Ctx, t: &mut Table, case: &str, tx: &Transmitter, sc: &Scenario, rx: &Receiver) -> CliResult<()> {
    let points: Vec<(f64, f64)> = sc.distances.iter().flat_map(|&d| sc.angles.iter().map(move |&a| (d, a))).collect();
    let budgets = ctx
        .exec
        .map(&points, |&(d, a)| evaluate_link(tx, d, a, rx))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    for (b, &(_, a)) in budgets.iter().zip(&points) {
        let mut row = vec![Cell::Text(case.to_string())];
        row.extend(link_row(b, a));
        t.push(row);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
power = "100pW"
[medium]
preset = "low"
[radiator]
kind = "sphere"
radius = "5um"
[sweep]
frequency = ["10MHz", "100MHz"]
"#;

    fn err(text: &str) -> String {
        parse(text, "s.toml").unwrap_err().to_string()
    }

    #[test]
    fn parses_minimal_sphere() {
        let s = parse(BASE, "s.toml").unwrap();
        assert_eq!(s.frequencies, vec![1e7, 1e8]);
        assert_eq!(s.radii, vec![5e-6]);
        assert_eq!(s.distances, vec![1e-4]);
        assert_eq!(s.power, 1e-10);
    }

    #[test]
    fn unitless_value_reports_line_and_field() {
        let e = err(&BASE.replace("radius = \"5um\"", "radius = 5"));
        assert!(e.contains("s.toml:7:10"), "{e}");
        assert!(e.contains("radiator.radius") && e.contains("5um"), "{e}");
    }

    #[test]
    fn empty_sweep_rejected() {
        let e = err(&BASE.replace("[\"10MHz\", \"100MHz\"]", "[]"));
        assert!(e.contains("sweep.frequency") && e.contains("empty"), "{e}");
        let e = err(&BASE.replace("[\"10MHz\", \"100MHz\"]", "{ from = \"1MHz\", to = \"10MHz\", points = 0 }"));
        assert!(e.contains("empty"), "{e}");
    }

    #[test]
    fn unknown_field_rejected_with_line() {
        let e = err(&BASE.replace("kind = \"sphere\"", "kind = \"sphere\"\ncolour = \"red\""));
        assert!(e.contains("s.toml:7") && e.contains("colour"), "{e}");
    }

    #[test]
    fn log_range_and_wrong_dimension() {
        let s = parse(&BASE.replace("[\"10MHz\", \"100MHz\"]", "{ from = \"1MHz\", to = \"100MHz\", points = 3 }"), "s").unwrap();
        assert_eq!(s.frequencies.len(), 3);
        assert!((s.frequencies[1] / 1e7 - 1.0).abs() < 1e-12);
        let e = err(&BASE.replace("\"100pW\"", "\"100um\""));
        assert!(e.contains("power") && e.contains("expected a power"), "{e}");
    }

    #[test]
    fn overridden_limits_need_provenance() {
        let with = |extra: &str| format!("{BASE}[safety]\nenforce = true\n[safety.limits]\nmax_flux = \"50 W/m2\"\n{extra}");
        assert!(err(&with("")).contains("provenance"));
        let s = parse(&with("provenance = \"site protocol\""), "s").unwrap();
        assert!(s.enforce_safety);
        assert_eq!(s.limits.max_flux, 50.0);
    }

    #[test]
    fn identical_text_gives_identical_scenario() {
        assert_eq!(parse(BASE, "a").unwrap(), parse(BASE, "b").unwrap());
    }
}
