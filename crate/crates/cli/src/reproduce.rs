//! Built-in datasets for the published tables and figures.

use crate::cli::{log_range, Target};
use crate::commands::Ctx;
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Output, Table};
use serde_json::json;
use sonolink::directivity::{directed_sweep, disk_gain, disk_gain_asymptote, disk_null_angle, disk_pattern};
use sonolink::fem::{
    traveling_phase_pattern, MeshParams, RingsetGeometry, RingsetScenario, PATTERN_SAMPLES,
};
use sonolink::pattern::uniform_angles;
use sonolink::sphere::{calibrated_field, efficiency_sweep};
use sonolink::units::{MHZ, MICRON, PICOWATT};
use sonolink::Medium;
use std::f64::consts::FRAC_PI_2;

const PRESETS: [&str; 3] = ["water", "low", "high"];

fn freqs(lo_mhz: f64, hi_mhz: f64, n: usize) -> Vec<f64> {
    log_range(lo_mhz * MHZ, hi_mhz * MHZ, n).expect("fixed range")
}

pub fn reproduce(ctx: &Ctx, target: Target) -> CliResult<Output> {
    let name = format!("{target:?}");
    let mut out = Output::new(json!({ "target": name }));
    match target {
        Target::Table3 => table3(&mut out)?,
        Target::Table5 => table5(ctx, &mut out)?,
        Target::FigAttenuation => fig_attenuation(&mut out)?,
        Target::FigEfficiency => fig_efficiency(ctx, &mut out)?,
        Target::FigDisk => fig_disk(&mut out)?,
        Target::FigDirected => fig_directed(ctx, &mut out)?,
        Target::FigRingsetPattern => fig_ringset_pattern(ctx, &mut out)?,
    }
    Ok(out)
}

/// Pulsating sphere at 100 pW in the low-attenuation medium, evaluated at 100 um.
fn table3(out: &mut Output) -> CliResult<()> {
    let m = Medium::low();
    let mut t = Table::new(
        "table3",
        &["radius_um", "frequency_MHz", "radiated_power_pW", "flux_pW_per_um2", "max_pressure_Pa"],
    );
    for a in [0.5, 5.0, 50.0] {
        for f in [10.0, 100.0] {
            let s = calibrated_field(a * MICRON, f * MHZ, &m, 100.0 * PICOWATT)?;
            let (p, flux) = s.radiated_power(100.0 * MICRON)?;
            t.push(vec![a.into(), f.into(), (p / PICOWATT).into(), flux.into(), s.max_pressure().into()]);
        }
    }
    out.tables.push(t);
    Ok(())
}

/// Ringset at 100 pW for each preset at 10 and 100 MHz.
fn table5(ctx: &Ctx, out: &mut Output) -> CliResult<()> {
    let mut t = Table::new(
        "table5",
        &["medium", "frequency_MHz", "radiated_power_pW", "max_pressure_Pa", "pattern_max_over_min"],
    );
    for name in PRESETS {
        for f in [10.0, 100.0] {
            let sc = RingsetScenario::ringset(f * MHZ, Medium::preset(name)?);
            let sol = ctx.cache.solve(&sc, ctx.exec)?;
            let pat = sol.flux_pattern(100.0 * MICRON, PATTERN_SAMPLES)?;
            t.push(vec![
                name.into(),
                f.into(),
                (pat.total_power() / PICOWATT).into(),
                sol.max_pressure().into(),
                pat.max_over_min().into(),
            ]);
        }
    }
    out.tables.push(t);
    Ok(())
}

fn fig_attenuation(out: &mut Output) -> CliResult<()> {
    let mut t = Table::new("attenuation", &["medium", "frequency_MHz", "alpha_Np_per_m", "attenuation_distance_um", "wavelength_um"]);
    for name in PRESETS {
        let m = Medium::preset(name)?;
        for f in freqs(1.0, 1000.0, 61) {
            let w = m.wave_vector(f)?;
            t.push(vec![
                name.into(),
                (f / MHZ).into(),
                w.alpha().into(),
                (1.0 / w.alpha() / MICRON).into(),
                (w.wavelength / MICRON).into(),
            ]);
        }
    }
    out.tables.push(t);
    Ok(())
}

/// One table per (radius, medium) panel.
fn fig_efficiency(ctx: &Ctx, out: &mut Output) -> CliResult<()> {
    let fs = freqs(0.1, 3000.0, 121);
    for a in [0.5, 5.0, 50.0] {
        for name in PRESETS {
            let m = Medium::preset(name)?;
            let sweep = efficiency_sweep(a * MICRON, &m, 100.0 * MICRON, &fs, ctx.exec)?;
            let mut t = Table::new(
                format!("efficiency_a{a}um_{name}"),
                &["frequency_MHz", "acoustic", "transmission", "overall"],
            );
            for p in sweep {
                let e = p.efficiency;
                t.push(vec![(p.frequency / MHZ).into(), e.acoustic.into(), e.transmission.into(), e.overall.into()]);
            }
            out.tables.push(t);
        }
    }
    Ok(())
}

fn fig_disk(out: &mut Output) -> CliResult<()> {
    let mut g = Table::new("disk_gain", &["lambda_over_d", "gain", "gain_asymptote", "null_angle_deg"]);
    for r in log_range(0.01, 3.0, 91).map_err(CliError::Validation)? {
        let null = disk_null_angle(1.0, r).map_or(Cell::Text("none".into()), |n| Cell::Num(n.to_degrees()));
        g.push(vec![r.into(), disk_gain(1.0, r).into(), disk_gain_asymptote(1.0, r).into(), null]);
    }
    let mut p = Table::new("disk_pattern", &["theta_deg", "relative_flux"]);
    for th in uniform_angles(181, FRAC_PI_2) {
        p.push(vec![th.to_degrees().into(), disk_pattern(100.0 * MICRON, 15.0 * MICRON, th)?.into()]);
    }
    out.tables.push(g);
    out.tables.push(p);
    Ok(())
}

fn fig_directed(ctx: &Ctx, out: &mut Output) -> CliResult<()> {
    let fs = freqs(10.0, 1000.0, 41);
    let mut t = Table::new(
        "directed",
        &["medium", "frequency_MHz", "uniform_flux_pW_per_um2", "directed_flux_pW_per_um2", "enhancement", "l_max"],
    );
    for name in PRESETS {
        let m = Medium::preset(name)?;
        for p in directed_sweep(5.0 * MICRON, &m, 100.0 * PICOWATT, 100.0 * MICRON, &fs, ctx.exec)? {
            t.push(vec![
                name.into(),
                (p.frequency / MHZ).into(),
                p.uniform_flux.into(),
                p.directed_flux.into(),
                p.enhancement.into(),
                p.l_max.into(),
            ]);
        }
    }
    out.tables.push(t);
    Ok(())
}

/// Uniform actuation at 10 MHz and a forward travelling wave at 100 MHz.
fn fig_ringset_pattern(ctx: &Ctx, out: &mut Output) -> CliResult<()> {
    let m = Medium::low();
    let mut t = Table::new("ringset_pattern", &["case", "theta_deg", "flux_pW_per_um2"]);
    let sc = RingsetScenario::ringset(10.0 * MHZ, m.clone());
    let uniform = ctx.cache.solve(&sc, ctx.exec)?.flux_pattern(100.0 * MICRON, PATTERN_SAMPLES)?;
    let traveling = traveling_phase_pattern(
        RingsetGeometry::default(),
        100.0 * MHZ,
        m,
        1,
        MeshParams::default(),
        100.0 * MICRON,
        ctx.exec,
        Some(&ctx.cache),
    )?;
    for (case, pat) in [("uniform_10MHz", &uniform), ("traveling_100MHz", &traveling.pattern)] {
        for (th, fl) in pat.theta.iter().zip(&pat.flux) {
            t.push(vec![case.into(), th.to_degrees().into(), (*fl).into()]);
        }
    }
    out.tables.push(t);
    out.section(
        "summary",
        json!({
            "uniform_max_over_min": uniform.max_over_min(),
            "traveling_forward_over_average": traveling.forward_over_average,
            "traveling_forward_over_backward": traveling.forward_over_backward,
        }),
    );
    Ok(())
}
