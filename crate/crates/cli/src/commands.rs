//! Pipelines behind the subcommands and scenario runs.

use crate::cli::{self, Model, Phase, Surface};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Output, Table};
use serde_json::json;
use sonolink::comms::{
    budget_from_flux, evaluate_link, evaluate_relay, min_detectable_drift, passage_bits, Drift, LinkBudget,
    RadiatorModel, Receiver, RelayChain, Transmitter,
};
use sonolink::directivity::{
    directed_peak, disk_gain, disk_gain_asymptote, disk_null_angle, disk_pattern, optimize_directed_beam,
    BeamOptions, DirectedBeam,
};
use sonolink::fem::{
    traveling_phase_pattern, MeshParams, Obstacle, PhaseProfile, RingsetGeometry, RingsetScenario, SolutionCache,
    SurfaceSelector, PATTERN_SAMPLES,
};
use sonolink::pattern::{uniform_angles, DirectivityPattern, PatternSource};
use sonolink::safety::{
    bubble_resonance, check_scenario, heating_rate, power_density, robot_resonance, steady_heating, SafetyInputs,
    SafetyLimits, SafetyReport, MUSCLE_POWER_DENSITY, NEUTROPHIL_POWER_DENSITY,
};
use sonolink::sphere::calibrated_field;
use sonolink::units::{MHZ, MICRON, PICOWATT};
use sonolink::{Exec, Medium};
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

pub struct Ctx {
    pub exec: Exec,
    pub cache: SolutionCache,
    pub limits: SafetyLimits,
}

fn um(x: f64) -> Cell {
    Cell::Num(x / MICRON)
}

fn mhz(x: f64) -> Cell {
    Cell::Num(x / MHZ)
}

fn pw(x: f64) -> Cell {
    Cell::Num(x / PICOWATT)
}

fn medium(name: &str) -> CliResult<Medium> {
    Ok(Medium::preset(name)?)
}

/// Collects safety checks across the cases of one run.
pub struct SafetyLog {
    table: Table,
    reports: Vec<(String, SafetyReport)>,
}

impl SafetyLog {
    pub fn new() -> Self {
        Self { table: Table::new("safety", &["case", "quantity", "value", "limit", "margin", "status"]), reports: Vec::new() }
    }

    pub fn check(&mut self, ctx: &Ctx, case: String, inputs: &SafetyInputs, medium: &Medium) -> CliResult<()> {
        let report = check_scenario(inputs, &ctx.limits, medium)?;
        for c in &report.checks {
            let status = serde_json::to_value(c.status).expect("status serializes");
            self.table.push(vec![
                case.clone().into(),
                c.quantity.clone().into(),
                c.value.into(),
                c.limit.into(),
                c.margin.into(),
                status.as_str().unwrap_or_default().into(),
            ]);
        }
        self.reports.push((case, report));
        Ok(())
    }

    pub fn finish(self, out: &mut Output) {
        if self.reports.is_empty() {
            return;
        }
        let failed: Vec<String> = self
            .reports
            .iter()
            .flat_map(|(case, r)| r.failures().map(move |c| format!("{case}: {}", c.quantity)))
            .collect();
        if !failed.is_empty() {
            out.safety_failed = true;
            for f in &failed {
                log::warn!("safety check failed for {f}");
            }
        }
        let incomplete = self.reports.iter().any(|(_, r)| r.incomplete);
        out.section(
            "safety",
            json!({ "pass": failed.is_empty(), "incomplete": incomplete, "failures": failed }),
        );
        out.tables.push(self.table);
    }
}

pub struct SpherePlan<'a> {
    pub radii: &'a [f64],
    pub frequencies: &'a [f64],
    pub distances: &'a [f64],
    pub power: f64,
    pub medium: &'a Medium,
}

/// One row per (radius, frequency, distance).
pub fn sphere_points(ctx: &Ctx, plan: &SpherePlan, out: &mut Output) -> CliResult<()> {
    let mut t = Table::new(
        "sphere",
        &[
            "radius_um",
            "frequency_MHz",
            "distance_um",
            "epsilon",
            "input_power_pW",
            "radiated_power_pW",
            "flux_pW_per_um2",
            "surface_flux_pW_per_um2",
            "max_pressure_Pa",
            "efficiency_acoustic",
            "efficiency_transmission",
            "efficiency_overall",
        ],
    );
    let cases: Vec<(f64, f64)> =
        plan.radii.iter().flat_map(|&a| plan.frequencies.iter().map(move |&f| (a, f))).collect();
    let fields = ctx
        .exec
        .map(&cases, |&(a, f)| calibrated_field(a, f, plan.medium, plan.power))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut safety = SafetyLog::new();
    for (&(a, f), s) in cases.iter().zip(&fields) {
        for &d in plan.distances {
            let r = s.report(d)?;
            t.push(vec![
                um(a),
                mhz(f),
                um(d),
                s.epsilon().into(),
                pw(r.input_power),
                pw(r.radiated_power),
                r.flux.into(),
                r.surface_flux.into(),
                r.max_pressure.into(),
                r.efficiency.acoustic.into(),
                r.efficiency.transmission.into(),
                r.efficiency.overall.into(),
            ]);
        }
        let inputs = SafetyInputs {
            max_surface_flux: Some(s.flux(a)?),
            max_pressure: Some(s.max_pressure()),
            input_power: Some(s.input_power()),
            radius: Some(a),
        };
        safety.check(ctx, format!("a={:.3}um f={:.3}MHz", a / MICRON, f / MHZ), &inputs, plan.medium)?;
    }
    out.tables.push(t);
    safety.finish(out);
    Ok(())
}

pub fn sphere(ctx: &Ctx, a: &cli::SphereArgs) -> CliResult<Output> {
    let m = medium(&a.medium.medium)?;
    let mut out = Output::new(json!({
        "radius_m": a.radius.0, "frequency_Hz": a.frequency.0, "distance_m": a.distance.0,
        "power_W": a.power, "medium": m,
    }));
    let plan = SpherePlan { radii: &a.radius.0, frequencies: &a.frequency.0, distances: &a.distance.0, power: a.power, medium: &m };
    sphere_points(ctx, &plan, &mut out)?;
    Ok(out)
}

pub struct RingsetPlan {
    pub geometry: RingsetGeometry,
    pub frequencies: Vec<f64>,
    pub medium: Medium,
    pub power: f64,
    pub selector: SurfaceSelector,
    pub phase: PhaseProfile,
    pub mesh: MeshParams,
    pub pattern_radius: f64,
    pub snapshot: Option<f64>,
}

pub fn selector(s: Surface) -> SurfaceSelector {
    match s {
        Surface::Outer => SurfaceSelector::Outer,
        Surface::Inner => SurfaceSelector::Inner,
        Surface::Ends => SurfaceSelector::Ends,
    }
}

pub fn phase(p: Phase) -> PhaseProfile {
    match p {
        Phase::Uniform => PhaseProfile::Uniform,
        Phase::Forward => PhaseProfile::Traveling { sign: 1 },
        Phase::Backward => PhaseProfile::Traveling { sign: -1 },
    }
}

/// FEM solve per frequency; returns the patterns for downstream link budgets.
pub fn ringset_points(ctx: &Ctx, plan: &RingsetPlan, out: &mut Output) -> CliResult<Vec<DirectivityPattern>> {
    let mut summary = Table::new(
        "ringset",
        &[
            "frequency_MHz",
            "input_power_pW",
            "radiated_power_pW",
            "max_pressure_Pa",
            "max_surface_flux_pW_per_um2",
            "pattern_max_over_min",
            "forward_over_average",
            "nodes",
            "residual",
        ],
    );
    let mut pat_table = Table::new("pattern", &["frequency_MHz", "theta_deg", "flux_pW_per_um2"]);
    let mut safety = SafetyLog::new();
    let mut patterns = Vec::new();
    for &f in &plan.frequencies {
        let mut sc = RingsetScenario::ringset(f, plan.medium.clone()).with_phase(plan.phase);
        sc.obstacle = Obstacle::Ringset(plan.geometry);
        sc.actuation.selector = plan.selector;
        sc.target_power = Some(plan.power);
        sc.mesh = plan.mesh;
        sc.validate()?;
        let (sol, status) = ctx.cache.solve_traced(&sc, ctx.exec)?;
        log::info!("{}: cache {status:?}", sc.description());
        let pat = sol.flux_pattern(plan.pattern_radius, PATTERN_SAMPLES)?;
        let forward = match plan.phase {
            PhaseProfile::Traveling { sign } if sign < 0 => *pat.flux.last().unwrap(),
            _ => pat.flux[0],
        };
        summary.push(vec![
            mhz(f),
            pw(sol.input_power),
            pw(pat.total_power()),
            sol.max_pressure().into(),
            sol.max_surface_flux().into(),
            pat.max_over_min().into(),
            (forward / pat.directional_average()).into(),
            sol.mesh.node_count().into(),
            sol.residual.into(),
        ]);
        for (t, fl) in pat.theta.iter().zip(&pat.flux) {
            pat_table.push(vec![mhz(f), t.to_degrees().into(), (*fl).into()]);
        }
        if let Some(w) = plan.snapshot {
            let text = sol.snapshot_csv(Some(w));
            let mut snap = Table::new(format!("snapshot_{:.0}MHz", f / MHZ), &["r_um", "z_um", "re_p_Pa", "im_p_Pa"]);
            for line in text.lines().skip(1) {
                snap.push(line.split(',').map(|v| Cell::Text(v.to_string())).collect());
            }
            out.tables.push(snap);
        }
        let inputs = SafetyInputs {
            max_surface_flux: Some(sol.max_surface_flux()),
            max_pressure: Some(sol.max_pressure()),
            input_power: Some(sol.input_power),
            radius: Some(plan.geometry.outer_radius),
        };
        safety.check(ctx, format!("f={:.3}MHz", f / MHZ), &inputs, &plan.medium)?;
        patterns.push(pat);
    }
    out.tables.insert(0, pat_table);
    out.tables.insert(0, summary);
    safety.finish(out);
    Ok(patterns)
}

pub fn ringset(ctx: &Ctx, a: &cli::RingsetArgs) -> CliResult<Output> {
    if !(a.mesh_scale > 0.0) {
        return Err(CliError::validation("--mesh-scale must be positive"));
    }
    let plan = RingsetPlan {
        geometry: RingsetGeometry::default(),
        frequencies: vec![a.frequency],
        medium: medium(&a.medium.medium)?,
        power: a.power,
        selector: selector(a.surface),
        phase: phase(a.phase),
        mesh: MeshParams::default().scaled(a.mesh_scale),
        pattern_radius: a.pattern_radius,
        snapshot: a.snapshot,
    };
    let mut out = Output::new(json!({
        "geometry": plan.geometry, "frequency_Hz": plan.frequencies, "medium": plan.medium,
        "power_W": plan.power, "selector": plan.selector, "phase": plan.phase, "mesh": plan.mesh,
        "pattern_radius_m": plan.pattern_radius, "snapshot_m": plan.snapshot,
    }));
    ringset_points(ctx, &plan, &mut out)?;
    Ok(out)
}

pub struct BeamPlan<'a> {
    pub radius: f64,
    pub frequencies: &'a [f64],
    pub distance: f64,
    pub power: f64,
    pub medium: &'a Medium,
}

pub fn beam_points(ctx: &Ctx, plan: &BeamPlan, out: &mut Output) -> CliResult<Vec<DirectedBeam>> {
    let beams = ctx
        .exec
        .map(plan.frequencies, |&f| {
            optimize_directed_beam(plan.radius, f, plan.medium, plan.power, plan.distance, BeamOptions::default())
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "beam",
        &[
            "frequency_MHz",
            "l_max",
            "uniform_flux_pW_per_um2",
            "directed_flux_pW_per_um2",
            "enhancement",
            "max_surface_pressure_Pa",
        ],
    );
    let mut safety = SafetyLog::new();
    for b in &beams {
        let pmax = b.max_surface_pressure();
        t.push(vec![
            mhz(b.frequency),
            b.l_max().into(),
            b.uniform_flux.into(),
            b.directed_flux.into(),
            b.enhancement.into(),
            pmax.into(),
        ]);
        if b.extended {
            out.note(format!("mode expansion extended to l = {} at {:.3} MHz", b.l_max(), b.frequency / MHZ));
        }
        let inputs = SafetyInputs {
            max_surface_flux: None,
            max_pressure: Some(pmax),
            input_power: Some(b.input_power),
            radius: Some(b.radius),
        };
        safety.check(ctx, format!("f={:.3}MHz", b.frequency / MHZ), &inputs, plan.medium)?;
    }
    out.tables.push(t);
    if let [b] = beams.as_slice() {
        let pat = b.pattern(PATTERN_SAMPLES);
        let mut p = Table::new("pattern", &["theta_deg", "flux_pW_per_um2"]);
        for (th, fl) in pat.theta.iter().zip(&pat.flux) {
            p.push(vec![th.to_degrees().into(), (*fl).into()]);
        }
        out.tables.push(p);
    }
    out.note("beam safety checks omit the surface flux, which the mode solution does not resolve");
    safety.finish(out);
    Ok(beams)
}

pub fn beam(ctx: &Ctx, a: &cli::BeamArgs) -> CliResult<Output> {
    let m = medium(&a.medium.medium)?;
    let peak = match &a.peak {
        Some(text) => {
            let (lo, hi) = text.split_once("..").ok_or_else(|| CliError::validation("--peak is written FROM..TO"))?;
            Some((cli::frequency(lo).map_err(CliError::Validation)?, cli::frequency(hi).map_err(CliError::Validation)?))
        }
        None => None,
    };
    let mut out = Output::new(json!({
        "radius_m": a.radius, "frequency_Hz": a.frequency.0, "distance_m": a.distance,
        "power_W": a.power, "medium": m, "peak_range_Hz": peak,
    }));
    let plan = BeamPlan { radius: a.radius, frequencies: &a.frequency.0, distance: a.distance, power: a.power, medium: &m };
    beam_points(ctx, &plan, &mut out)?;
    if let Some(range) = peak {
        let best = directed_peak(a.radius, &m, a.power, a.distance, range)?;
        let b = optimize_directed_beam(a.radius, best.x, &m, a.power, a.distance, BeamOptions::default())?;
        out.section(
            "peak",
            json!({
                "frequency_MHz": best.x / MHZ, "directed_flux_pW_per_um2": best.value,
                "enhancement": b.enhancement, "at_boundary": best.at_boundary,
            }),
        );
    }
    Ok(out)
}

/// Disk summary for each wavelength plus the pattern of the first.
pub fn disk_points(d: f64, wavelengths: &[f64], samples: usize, out: &mut Output) -> CliResult<()> {
    if !(d > 0.0) || wavelengths.iter().any(|l| !(*l > 0.0)) {
        return Err(CliError::validation("disk diameter and wavelength must be positive"));
    }
    if samples < 2 {
        return Err(CliError::validation("--samples must be at least 2"));
    }
    let mut t = Table::new(
        "disk",
        &["diameter_um", "wavelength_um", "lambda_over_d", "null_angle_deg", "gain", "gain_asymptote"],
    );
    for &l in wavelengths {
        let null = match disk_null_angle(d, l) {
            Some(n) => Cell::Num(n.to_degrees()),
            None => Cell::Text("none".into()),
        };
        t.push(vec![um(d), um(l), (l / d).into(), null, disk_gain(d, l).into(), disk_gain_asymptote(d, l).into()]);
    }
    let mut p = Table::new("pattern", &["theta_deg", "relative_flux"]);
    for th in uniform_angles(samples, FRAC_PI_2) {
        p.push(vec![th.to_degrees().into(), disk_pattern(d, wavelengths[0], th)?.into()]);
    }
    out.tables.push(t);
    out.tables.push(p);
    Ok(())
}

pub fn disk(a: &cli::DiskArgs) -> CliResult<Output> {
    let lambda = match (a.lambda, a.frequency) {
        (Some(l), _) => l,
        (None, Some(f)) => medium(&a.medium.medium)?.speed / f,
        (None, None) => return Err(CliError::validation("give --lambda or --freq")),
    };
    let mut out = Output::new(json!({ "diameter_m": a.d, "wavelength_m": lambda, "samples": a.samples }));
    disk_points(a.d, &[lambda], a.samples, &mut out)?;
    Ok(out)
}

fn receiver(r: &cli::ReceiverArgs) -> Receiver {
    Receiver { area: r.area, bandwidth: r.bandwidth, temperature: r.temperature, snr_threshold: r.snr }
}

pub const LINK_COLUMNS: [&str; 14] = [
    "distance_um",
    "angle_deg",
    "flux_pW_per_um2",
    "p_signal_pW",
    "p_noise_pW",
    "snr_nats",
    "snr_dB",
    "capacity_bps",
    "wideband_limit_bps",
    "threshold_rate_bps",
    "energy_per_bit_J",
    "latency_s",
    "interpolated",
    "extrapolated",
];

pub fn link_row(b: &LinkBudget, angle: f64) -> Vec<Cell> {
    vec![
        um(b.distance),
        angle.to_degrees().into(),
        b.flux.into(),
        pw(b.p_signal),
        pw(b.p_noise),
        b.snr_nats.into(),
        b.snr_db().into(),
        b.capacity.into(),
        b.wideband_limit.into(),
        b.threshold_rate.into(),
        b.energy_per_bit.into(),
        b.latency.into(),
        b.interpolated.into(),
        b.extrapolated.into(),
    ]
}

/// Travelling-phase ringset pattern at 100 pW used as a transmitter model.
fn ringset_model(ctx: &Ctx, f: f64, m: &Medium, mesh: MeshParams) -> CliResult<RadiatorModel> {
    let geom = RingsetGeometry::default();
    let t = traveling_phase_pattern(geom, f, m.clone(), 1, mesh, 100.0 * MICRON, ctx.exec, Some(&ctx.cache))?;
    Ok(RadiatorModel::Pattern {
        pattern: t.pattern,
        reference_power: t.input_power,
        extent: Obstacle::Ringset(geom).extent(),
    })
}

fn model(ctx: &Ctx, kind: Model, radius: f64, f: f64, m: &Medium) -> CliResult<RadiatorModel> {
    Ok(match kind {
        Model::Uniform => RadiatorModel::SphereUniform { radius },
        Model::Directed => RadiatorModel::SphereDirected { radius },
        Model::Ringset => ringset_model(ctx, f, m, MeshParams::default())?,
    })
}

pub fn link(ctx: &Ctx, a: &cli::LinkArgs) -> CliResult<Output> {
    let m = medium(&a.medium.medium)?;
    let rx = receiver(&a.receiver);
    let mut out = Output::new(json!({
        "flux_W_per_m2": a.flux, "model": format!("{:?}", a.model).to_lowercase(), "radius_m": a.radius,
        "power_W": a.power, "frequency_Hz": a.frequency, "distance_m": a.distance.0, "angle_rad": a.angle,
        "receiver": rx, "medium": m, "flow_m_per_s": a.flow, "robots": a.robots,
    }));
    let budgets: Vec<LinkBudget> = match a.flux {
        Some(flux) => a
            .distance
            .0
            .iter()
            .map(|&d| budget_from_flux(flux, a.power, d, m.speed, &rx))
            .collect::<Result<_, _>>()?,
        None => {
            let tx = Transmitter { model: model(ctx, a.model, a.radius, a.frequency, &m)?, power: a.power, frequency: a.frequency, medium: m.clone() };
            ctx.exec
                .map(&a.distance.0, |&d| evaluate_link(&tx, d, a.angle, &rx))
                .into_iter()
                .collect::<Result<_, _>>()?
        }
    };
    let mut t = Table::new("link", &LINK_COLUMNS);
    for b in &budgets {
        t.push(link_row(b, a.angle));
    }
    out.tables.push(t);
    out.section("link", budgets.iter().map(LinkBudget::report).collect::<Vec<_>>());
    if let Some(speed) = a.flow {
        let mut p = Table::new("passage", &["distance_um", "dwell_s", "bits", "bits_per_robot"]);
        for b in &budgets {
            let pass = passage_bits(speed, b.distance, b.capacity, a.robots)?;
            p.push(vec![um(b.distance), pass.dwell.into(), pass.bits.into(), pass.bits_per_robot.into()]);
        }
        out.tables.push(p);
    }
    Ok(out)
}

pub fn relay(ctx: &Ctx, a: &cli::RelayArgs) -> CliResult<Output> {
    if a.hops == 0 {
        return Err(CliError::validation("--hops must be at least 1"));
    }
    let m = medium(&a.medium.medium)?;
    let rx = Receiver { area: a.area, bandwidth: a.bandwidth, temperature: a.temperature, snr_threshold: a.snr };
    let mut chain = RelayChain::uniform_line(
        a.hops,
        a.spacing,
        a.power,
        a.frequency,
        a.offset,
        model(ctx, a.model, a.radius, a.frequency, &m)?,
        m.clone(),
    );
    chain.concurrent = !a.sequential_hops;
    let mut out = Output::new(json!({
        "hops": a.hops, "spacing_m": a.spacing, "power_W": a.power, "frequency_Hz": a.frequency,
        "offset_Hz": a.offset, "model": format!("{:?}", a.model).to_lowercase(), "radius_m": a.radius,
        "concurrent": chain.concurrent, "receiver": rx, "medium": m,
    }));
    let r = evaluate_relay(&chain, &rx, ctx.exec)?;
    let mut t = Table::new(
        "relay",
        &["hop", "carrier_MHz", "distance_um", "flux_pW_per_um2", "capacity_bps", "threshold_rate_bps", "latency_s"],
    );
    for (i, h) in r.hops.iter().enumerate() {
        t.push(vec![
            i.into(),
            mhz(chain.nodes[i].frequency),
            um(h.distance),
            h.flux.into(),
            h.capacity.into(),
            h.threshold_rate.into(),
            h.latency.into(),
        ]);
    }
    out.tables.push(t);
    out.section(
        "relay",
        json!({
            "capacity_bps": r.capacity, "threshold_rate_bps": r.threshold_rate, "bottleneck_hop": r.bottleneck,
            "distance_m": r.distance, "latency_s": r.latency, "total_power_W": r.total_power,
        }),
    );
    Ok(out)
}

/// Read a `theta_deg,flux_pW_per_um2` pattern file.
pub fn read_pattern(path: &Path, radius: f64) -> CliResult<DirectivityPattern> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let (mut theta, mut flux) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let num = |j: usize| -> CliResult<f64> {
            rec.get(j).and_then(|v| v.trim().parse().ok()).ok_or_else(|| {
                CliError::validation(format!("{}: line {}: expected two numeric columns", path.display(), i + 2))
            })
        };
        theta.push(num(0)?.to_radians());
        flux.push(num(1)?);
    }
    Ok(DirectivityPattern::new(radius, theta, flux, PatternSource::Fem)?)
}

pub fn drift(ctx: &Ctx, a: &cli::DriftArgs) -> CliResult<Output> {
    let m = medium(&a.medium.medium)?;
    let pattern = match &a.pattern {
        Some(path) => read_pattern(path, a.pattern_radius)?,
        None => {
            if !(a.mesh_scale > 0.0) {
                return Err(CliError::validation("--mesh-scale must be positive"));
            }
            let mesh = MeshParams::default().scaled(a.mesh_scale);
            traveling_phase_pattern(RingsetGeometry::default(), a.frequency, m.clone(), 1, mesh, a.pattern_radius, ctx.exec, Some(&ctx.cache))?
                .pattern
        }
    };
    let mut out = Output::new(json!({
        "pattern_file": a.pattern, "pattern_radius_m": a.pattern_radius, "frequency_Hz": a.frequency,
        "area_m2": a.area, "dt_s": a.dt, "energy_J": a.energy, "medium": m, "mesh_scale": a.mesh_scale,
    }));
    let d = min_detectable_drift(&pattern, a.area, a.dt, a.energy)?;
    let mut t = Table::new("drift", &["status", "dtheta_deg", "dx_um", "required_flux_drop", "available_flux_drop"]);
    match d {
        Drift::Detectable { dtheta, dx } => {
            let required = a.energy / (a.area * a.dt);
            t.push(vec!["detectable".into(), dtheta.to_degrees().into(), um(dx), required.into(), (pattern.flux[0] - pattern.min()).into()]);
        }
        Drift::NotDetectable { required, available } => {
            t.push(vec!["not_detectable".into(), "".into(), "".into(), required.into(), available.into()]);
        }
    }
    out.tables.push(t);
    out.section("drift", d);
    Ok(out)
}

pub fn safety(ctx: &Ctx, a: &cli::SafetyArgs) -> CliResult<Output> {
    let m = medium(&a.medium.medium)?;
    let mut out = Output::new(json!({
        "radius_m": a.radius, "power_W": a.power, "frequency_Hz": a.frequency, "max_flux_W_per_m2": a.max_flux,
        "max_pressure_Pa": a.max_pressure, "intensity_W_per_m2": a.intensity, "bubble_radius_m": a.bubble_radius,
        "stiffness_N_per_m": a.stiffness, "mass_kg": a.mass, "medium": m, "limits": ctx.limits,
    }));
    let s = calibrated_field(a.radius, a.frequency, &m, a.power)?;
    let inputs = SafetyInputs {
        max_surface_flux: Some(a.max_flux.map_or_else(|| s.flux(a.radius), Ok)?),
        max_pressure: Some(a.max_pressure.unwrap_or_else(|| s.max_pressure())),
        input_power: Some(a.power),
        radius: Some(a.radius),
    };
    let mut log = SafetyLog::new();
    log.check(ctx, "scenario".into(), &inputs, &m)?;

    let mut e = Table::new("estimates", &["quantity", "value", "unit", "note"]);
    let density = power_density(a.power, a.radius)?;
    e.push(vec!["power density".into(), density.into(), "W/m3".into(), "".into()]);
    e.push(vec!["neutrophil power density".into(), NEUTROPHIL_POWER_DENSITY.into(), "W/m3".into(), "reference".into()]);
    e.push(vec!["muscle power density (low)".into(), MUSCLE_POWER_DENSITY.0.into(), "W/m3".into(), "reference".into()]);
    e.push(vec!["muscle power density (high)".into(), MUSCLE_POWER_DENSITY.1.into(), "W/m3".into(), "reference".into()]);
    e.push(vec![
        "steady surface heating".into(),
        steady_heating(a.power, a.radius, &m)?.into(),
        "K".into(),
        "".into(),
    ]);
    if let Some(i) = a.intensity {
        e.push(vec![
            "absorption heating rate".into(),
            heating_rate(i, a.frequency, &m)?.into(),
            "K/min".into(),
            "plane wave, no conduction or perfusion".into(),
        ]);
    }
    if let Some(r) = a.bubble_radius {
        let b = bubble_resonance(r)?;
        let note = if b.out_of_range { "outside the range of the 3/r estimate" } else { "" };
        e.push(vec!["bubble resonance".into(), b.frequency.into(), "Hz".into(), note.into()]);
        if b.out_of_range {
            out.note(format!("bubble resonance {:e} Hz lies above the validity of the 3/r estimate", b.frequency));
        }
    }
    if let (Some(k), Some(mass)) = (a.stiffness, a.mass) {
        let f = robot_resonance(k, mass)?;
        let note = if (f - a.frequency).abs() < 0.1 * f { "within 10% of the carrier" } else { "" };
        e.push(vec!["robot resonance".into(), f.into(), "Hz".into(), note.into()]);
    }
    out.tables.push(e);
    log.finish(&mut out);
    Ok(out)
}

