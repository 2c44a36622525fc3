use anyhow::{bail, ensure, Context, Result};
use serde_json::{json, Value};
use thermal_packets::units::{si_params, Element, ANGSTROM};
use thermal_packets::validation;
use thermal_packets::{
    coord_rep_2, eigenstate_g1, mc_thermal_g1, packet_fwhm, packet_g1, partition_exact, partition_mc, sample_ensemble,
    split_width, thermal_g1_single, two_packet_g1, two_packet_g1_normalized, PacketSet, PlaneWaveBasis, RngStream,
    SpacetimePoint, Statistics, ThermalParams, Vec3, WavePacket,
};

use crate::output::{emit, Table};
use crate::{Cli, Command, Fig2Args, Fig3Args, Fig4Args, G1Args, G1Method, PartitionArgs, PartitionMode, SampleArgs, Units, UnitsArgs};

const MIN_GRID: usize = 16;

/// Runs the selected command; `Ok(false)` means a check failed.
pub fn dispatch(cli: &Cli) -> Result<bool> {
    let table = match &cli.command {
        Command::Fig2(a) => fig2(a)?,
        Command::Fig3(a) => fig3(a)?,
        Command::Fig4(a) => fig4(a)?,
        Command::Partition(a) => partition(a, cli.seed)?,
        Command::G1(a) => g1(a, cli.units, cli.seed)?,
        Command::Sample(a) => sample(a, cli.units, cli.seed)?,
        Command::Units(a) => units(a)?,
        Command::Selftest => return selftest(cli),
    };
    emit(&table.render(cli.format, &meta(cli)), cli.out.as_deref())?;
    Ok(true)
}

fn meta(cli: &Cli) -> Value {
    json!({
        "version": thermal_packets::VERSION,
        "flags": serde_json::to_value(cli).expect("flags serialise"),
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn check_grid(grid: usize) -> Result<()> {
    ensure!(grid >= MIN_GRID, "--grid must be at least {MIN_GRID}, got {grid}");
    Ok(())
}

fn unit_params() -> ThermalParams {
    ThermalParams::with_wavelength(1.0).expect("unit wavelength is valid")
}

fn fig2(a: &Fig2Args) -> Result<Table> {
    check_grid(a.grid)?;
    ensure!(a.r1.is_finite() && a.r2.is_finite(), "--r1 and --r2 must be finite");
    let centres = [Vec3::along_x(a.r1), Vec3::along_x(a.r2)];
    let fermions = PacketSet::at_rest(&centres, 1.0, Statistics::Fermion)?;
    let bosons = PacketSet::at_rest(&centres, 1.0, Statistics::Boson)?;
    let axis = linspace(a.r1.min(a.r2) - 2.0, a.r1.max(a.r2) + 2.0, a.grid);
    let mut cols: [Vec<f64>; 6] = Default::default();
    for &r in &axis {
        for &rp in &axis {
            let f = coord_rep_2(&fermions, Vec3::along_x(r), Vec3::along_x(rp))?;
            let b = coord_rep_2(&bosons, Vec3::along_x(r), Vec3::along_x(rp))?;
            for (c, v) in cols.iter_mut().zip([r, rp, f.re, f.im, b.re, b.im]) {
                c.push(v);
            }
        }
    }
    let [r, rp, fre, fim, bre, bim] = cols;
    Ok(Table::new()
        .num("R_over_ls", r)
        .num("Rp_over_ls", rp)
        .num("fermion_re", fre)
        .num("fermion_im", fim)
        .num("boson_re", bre)
        .num("boson_im", bim))
}

fn fig3(a: &Fig3Args) -> Result<Table> {
    check_grid(a.grid)?;
    ensure!(a.t_points >= 1, "--t-points must be at least 1");
    ensure!(a.b_max.is_finite() && a.b_max >= 0.0, "--b-max must be finite and non-negative");
    let params = unit_params();
    let wp = WavePacket::new(Vec3::ZERO, Vec3::along_x(a.lambda_p), 1.0)?;
    let drift = a.lambda_p.abs() * params.time_from_reduced(a.b_max);
    let axis = linspace(-2.5 - drift, 2.5 + drift, a.grid);
    let mut cols: [Vec<f64>; 5] = Default::default();
    for b in linspace(0.0, a.b_max, a.t_points) {
        let t1 = params.time_from_reduced(b);
        for &r1 in &axis {
            for &r2 in &axis {
                let x1 = SpacetimePoint::new(Vec3::along_x(r1), t1);
                let x2 = SpacetimePoint::at(Vec3::along_x(r2));
                let single = packet_g1(&wp, x1, x2, &params).norm();
                let thermal = thermal_g1_single(x1, x2, &params, 1.0)?.norm();
                for (c, v) in cols.iter_mut().zip([r1, r2, b, single, thermal]) {
                    c.push(v);
                }
            }
        }
    }
    let [r1, r2, b, single, thermal] = cols;
    Ok(Table::new()
        .num("R1_over_lambda", r1)
        .num("R2_over_lambda", r2)
        .num("b1", b)
        .num("packet_abs", single)
        .num("thermal_abs_times_volume", thermal))
}

fn fig4(a: &Fig4Args) -> Result<Table> {
    check_grid(a.grid)?;
    ensure!(!a.separations.is_empty(), "--separations must not be empty");
    ensure!(a.separations.iter().all(|s| s.is_finite() && *s >= 0.0), "separations must be finite and non-negative");
    let params = unit_params();
    let mut cols: [Vec<f64>; 7] = Default::default();
    for &s in &a.separations {
        let centres = [Vec3::along_x(-s / 2.0), Vec3::along_x(s / 2.0)];
        let fermions = PacketSet::at_rest(&centres, 1.0, Statistics::Fermion)?;
        let bosons = PacketSet::at_rest(&centres, 1.0, Statistics::Boson)?;
        let singles = centres.map(|c| WavePacket::at_rest(c, 1.0).expect("unit width is valid"));
        for r in linspace(-s / 2.0 - 2.5, s / 2.0 + 2.5, a.grid) {
            let x = SpacetimePoint::at(Vec3::along_x(r));
            let f = two_packet_g1(&fermions, x, x, &params)?.re;
            let fnorm = two_packet_g1_normalized(&fermions, x, x, &params)?.map_or(f64::NAN, |v| v.re);
            let b = two_packet_g1(&bosons, x, x, &params)?.re;
            let bnorm = two_packet_g1_normalized(&bosons, x, x, &params)?.map_or(f64::NAN, |v| v.re);
            let mb: f64 = singles.iter().map(|w| packet_g1(w, x, x, &params).re).sum();
            for (c, v) in cols.iter_mut().zip([s, r, f, fnorm, b, bnorm, mb]) {
                c.push(v);
            }
        }
    }
    let [s, r, f, fnorm, b, bnorm, mb] = cols;
    Ok(Table::new()
        .num("separation_over_lambda", s)
        .num("R_over_lambda", r)
        .num("fermion_raw", f)
        .num("fermion_normalized", fnorm)
        .num("boson_raw", b)
        .num("boson_normalized", bnorm)
        .num("distinguishable", mb))
}

fn partition(a: &PartitionArgs, seed: u64) -> Result<Table> {
    let params = unit_params();
    let stats: Statistics = a.statistics.into();
    let exact = if a.n <= 2 { partition_exact(a.n, a.v_over_lambda3, &params, stats).ok() } else { None };
    let (estimate, std_error) = match a.mode {
        PartitionMode::Exact => {
            let z = partition_exact(a.n, a.v_over_lambda3, &params, stats)?;
            (z, 0.0)
        }
        PartitionMode::Mc => {
            let split = split_width(&params, a.ts)?;
            let mc = partition_mc(a.n, a.v_over_lambda3, &split, stats, RngStream::new(seed, 0), a.samples)?;
            eprintln!(
                "Z = {:.10e} +- {:.3e}{}",
                mc.estimate,
                mc.std_error,
                exact.map_or(String::new(), |z| format!(" (exact {z:.10e})"))
            );
            (mc.estimate, mc.std_error)
        }
    };
    Ok(Table::new()
        .num("n", vec![a.n as f64])
        .num("v_over_lambda3", vec![a.v_over_lambda3])
        .text("statistics", vec![stats.to_string()])
        .num("estimate", vec![estimate])
        .num("std_error", vec![std_error])
        .num("exact", vec![exact.unwrap_or(f64::NAN)]))
}

/// Thermal parameters and the length unit used for input and output.
fn scale_for(units: Units, temperature: f64) -> Result<(ThermalParams, f64)> {
    match units {
        Units::Reduced => Ok((unit_params(), 1.0)),
        Units::Si => {
            let p = si_params(Element::Argon, temperature)?;
            Ok((p, ANGSTROM))
        }
    }
}

fn g1(a: &G1Args, units: Units, seed: u64) -> Result<Table> {
    let (params, length) = scale_for(units, a.temperature)?;
    ensure!(a.dr.is_finite() && a.b.is_finite(), "--dr and --b must be finite");
    let lambda = params.lambda();
    let volume = a.v_over_lambda3 * lambda.powi(3);
    let dr = a.dr * if units == Units::Si { length } else { lambda };
    let t = params.time_from_reduced(a.b);
    let x1 = SpacetimePoint::at(Vec3::along_x(-dr / 2.0));
    let x2 = SpacetimePoint::new(Vec3::along_x(dr / 2.0), t);
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut errors = Vec::new();
    let want = |m: G1Method| a.method == m || a.method == G1Method::All;
    if want(G1Method::Closed) {
        names.push("closed".to_string());
        values.push(thermal_g1_single(x1, x2, &params, volume)?);
        errors.push(0.0);
    }
    if want(G1Method::Mc) {
        let split = split_width(&params, a.ts)?;
        let mc = mc_thermal_g1(x1, x2, &params, volume, &split, a.samples, RngStream::new(seed, 0))?;
        names.push("mc".to_string());
        values.push(mc.estimate);
        errors.push(mc.std_error);
    }
    if want(G1Method::Eigen) {
        let basis = PlaneWaveBasis::sufficient(volume.cbrt(), &params)?;
        names.push("eigen".to_string());
        values.push(eigenstate_g1(&basis, &params, Vec3::along_x(dr), t)?);
        errors.push(0.0);
    }
    Ok(Table::new()
        .text("method", names)
        .num("re", values.iter().map(|v| v.re).collect())
        .num("im", values.iter().map(|v| v.im).collect())
        .num("abs", values.iter().map(|v| v.norm()).collect())
        .num("std_error", errors))
}

fn sample(a: &SampleArgs, units: Units, seed: u64) -> Result<Table> {
    let (params, length) = scale_for(units, a.temperature)?;
    ensure!(a.n >= 1 && a.n <= thermal_packets::manybody::DEFAULT_MAX_PACKETS, "--n must be in 1..=8");
    ensure!(a.v_over_lambda3 > 0.0 && a.v_over_lambda3.is_finite(), "--v-over-lambda3 must be positive");
    let split = split_width(&params, a.ts)?;
    let side = a.v_over_lambda3.cbrt() * params.lambda();
    let rng = RngStream::new(seed, 0);
    let mut cols: [Vec<f64>; 8] = Default::default();
    for i in 0..a.count {
        let draw = sample_ensemble(a.n, side, &split, params.hbar(), rng, i);
        for (k, d) in draw.draws.iter().enumerate() {
            let r = d.position * (1.0 / length);
            let row = [i as f64, k as f64, r.x, r.y, r.z, d.momentum.x, d.momentum.y, d.momentum.z];
            for (c, v) in cols.iter_mut().zip(row) {
                c.push(v);
            }
        }
    }
    let [i, k, x, y, z, px, py, pz] = cols;
    Ok(Table::new()
        .num("draw", i)
        .num("packet", k)
        .num("x", x)
        .num("y", y)
        .num("z", z)
        .num("px", px)
        .num("py", py)
        .num("pz", pz))
}

fn units(a: &UnitsArgs) -> Result<Table> {
    let element: Element = a.element.parse().with_context(|| "usage: --element argon")?;
    let lambda = si_params(element, a.temperature)?.lambda() / ANGSTROM;
    let ts = a.ts_temperature.unwrap_or(a.temperature);
    if ts > a.temperature {
        bail!("--ts-temperature {ts} exceeds the temperature {}", a.temperature);
    }
    let lambda_s = si_params(element, ts)?.lambda() / ANGSTROM;
    let fwhm_s = packet_fwhm(lambda_s);
    Ok(Table::new()
        .num("temperature_K", vec![a.temperature])
        .num("lambda_A", vec![lambda])
        .num("fwhm_A", vec![packet_fwhm(lambda)])
        .num("ts_K", vec![ts])
        .num("lambda_s_A", vec![lambda_s])
        .num("fwhm_s_A", vec![fwhm_s])
        .num("lambda_s_over_fwhm", vec![lambda_s / fwhm_s]))
}

fn selftest(cli: &Cli) -> Result<bool> {
    let mut text = String::new();
    let mut ok = true;
    for report in validation::run_all(cli.seed) {
        ok &= report.passed;
        text.push_str(&report.line());
        text.push('\n');
    }
    text.push_str(if ok { "all checks passed\n" } else { "some checks FAILED\n" });
    emit(&text, cli.out.as_deref())?;
    Ok(ok)
}
