//! The five subcommands.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sfwm_core::analysis::{normalized_g2, summarize};
use sfwm_core::atomic::{
    coefficient_resonances, doppler_fwhm, make_resolving_velocity_grid, make_velocity_grid, sigma_v,
};
use sfwm_core::biphoton::{
    bandwidth_from_correlation, correlation_gsi_with, correlation_time, decay_time_1e, CoefficientModel, GsiOptions,
    TimeOrdering,
};
use sfwm_core::counting::{simulate_run, EventStream, PairSourceSpec, TICK};
use sfwm_core::filter::{
    beat_frequency_estimate, conjugate_omega_grid, detector_correlation, filter_response, oscillation_frequency,
    SpectralFunction,
};
use sfwm_core::io;
use sfwm_core::scaling::{polyfit_linear_quadratic, powerlaw_fit, predict_rates, OdScanPoint};
use sfwm_core::waveform::CorrelationFunction;
use sfwm_core::Error;

use crate::config::{RunConfig, SourceWaveform};
use crate::error::CliError;
use crate::output::{sha256_hex, OutputDir};

type Pairs = Vec<(String, String)>;
type Column = (&'static str, fn(&OdScanPoint) -> f64);

fn kv(pairs: &mut Pairs, key: impl Into<String>, value: impl ToString) {
    pairs.push((key.into(), value.to_string()));
}

fn num(pairs: &mut Pairs, key: impl Into<String>, value: f64) {
    kv(pairs, key, format!("{value:e}"));
}

fn label(v: f64) -> String {
    format!("{v}")
}

fn start(cfg: &RunConfig, out: &Path) -> Result<OutputDir, CliError> {
    let mut dir = OutputDir::create(out)?;
    dir.write("config.txt", cfg.canonical().as_bytes())?;
    Ok(dir)
}

fn gsi(cfg: &RunConfig, options: GsiOptions) -> Result<CorrelationFunction, CliError> {
    let t = cfg.cell.temperature;
    let m = cfg.system.atom_mass;
    let vg = match options.coefficient {
        CoefficientModel::Perturbative => make_resolving_velocity_grid(
            t,
            m,
            cfg.velocity_nodes,
            cfg.span_sigmas,
            &coefficient_resonances(&cfg.system, &cfg.fields),
        )?,
        CoefficientModel::Flat => make_velocity_grid(t, m, cfg.velocity_nodes, cfg.span_sigmas)?,
    };
    Ok(correlation_gsi_with(&cfg.grid, &vg, &cfg.system, &cfg.fields, options)?)
}

fn spectrum(cfg: &RunConfig, g: &CorrelationFunction, alpha: f64) -> Result<SpectralFunction, CliError> {
    let (w0, dw, n) = conjugate_omega_grid(g.grid());
    Ok(filter_response(&cfg.filter.with_alpha(alpha), w0, dw, n)?)
}

pub fn correlation(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let mut dir = start(cfg, out)?;
    let model = gsi(cfg, cfg.gsi)?;
    let flat = gsi(cfg, GsiOptions { coefficient: CoefficientModel::Flat, ordering: TimeOrdering::Symmetric })?;
    dir.write_with("gsi.csv", |w| io::write_correlation_csv(w, &model))?;
    dir.write_with("gsi_flat.csv", |w| io::write_correlation_csv(w, &flat))?;

    let sigma = sigma_v(cfg.cell.temperature, cfg.system.atom_mass)?;
    let mut r = Pairs::new();
    num(&mut r, "temperature_k", cfg.cell.temperature);
    num(&mut r, "sigma_v_m_s", sigma);
    num(&mut r, "doppler_fwhm_hz", doppler_fwhm(cfg.cell.temperature, cfg.system.atom_mass, cfg.system.lambda_idler)?);
    kv(&mut r, "model.coefficient", format!("{:?}", cfg.gsi.coefficient).to_lowercase());
    kv(&mut r, "model.ordering", format!("{:?}", cfg.gsi.ordering).to_lowercase());
    num(&mut r, "model.fwhm_s", correlation_time(&model)?);
    num(&mut r, "model.decay_1e_s", decay_time_1e(&model)?);
    num(&mut r, "model.bandwidth_hz", bandwidth_from_correlation(&model)?);
    num(&mut r, "flat.fwhm_s", correlation_time(&flat)?);
    num(&mut r, "flat.closed_form_fwhm_s", 2.0 * std::f64::consts::LN_2.sqrt() / (cfg.system.k_idler() * sigma));
    num(&mut r, "flat.bandwidth_hz", bandwidth_from_correlation(&flat)?);
    dir.write_pairs("correlation_report.txt", &r)?;
    dir.finish("correlation", &cfg.canonical(), cfg.seed)
}

pub fn beats(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let mut dir = start(cfg, out)?;
    let g = gsi(cfg, cfg.gsi)?;
    dir.write_with("gsi.csv", |w| io::write_correlation_csv(w, &g))?;
    let mut r = Pairs::new();
    for &alpha in &cfg.alphas {
        let tag = format!("alpha_{}", label(alpha));
        let f = spectrum(cfg, &g, alpha)?;
        let det = detector_correlation(&g, &f)?;
        dir.write_with(&format!("filter_{tag}.csv"), |w| io::write_spectral_csv(w, &f))?;
        dir.write_with(&format!("gdet_{tag}.csv"), |w| io::write_correlation_csv(w, &det.correlation))?;
        let lobes = f.lobe_frequencies();
        kv(&mut r, format!("{tag}.lobes"), lobes.len());
        kv(
            &mut r,
            format!("{tag}.lobe_frequencies_hz"),
            lobes.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(","),
        );
        kv(&mut r, format!("{tag}.kernel_resampled"), det.resampled);
        if lobes.len() == 2 {
            let beat = beat_frequency_estimate(&f)?;
            num(&mut r, format!("{tag}.beat_frequency_hz"), beat);
            match oscillation_frequency(&det.correlation) {
                Ok(osc) => {
                    num(&mut r, format!("{tag}.oscillation_frequency_hz"), osc);
                    num(&mut r, format!("{tag}.oscillation_period_s"), 1.0 / osc);
                    num(&mut r, format!("{tag}.period_times_beat"), beat / osc);
                }
                // two lobes too shallow to modulate G_det
                Err(Error::Extraction(_)) => kv(&mut r, format!("{tag}.oscillation"), "unresolved"),
                Err(e) => return Err(e.into()),
            }
        }
    }
    dir.write_pairs("beats_report.txt", &r)?;
    dir.finish("beats", &cfg.canonical(), cfg.seed)
}

pub fn montecarlo(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    if cfg.sweep.enabled {
        return od_sweep(cfg, out);
    }
    let mut dir = start(cfg, out)?;
    let g = gsi(cfg, cfg.gsi)?;
    let waveform = match cfg.source.waveform {
        SourceWaveform::Gsi => g,
        SourceWaveform::Detector => detector_correlation(&g, &spectrum(cfg, &g, cfg.source.alpha)?)?.correlation,
    };
    dir.write_with("waveform.csv", |w| io::write_correlation_csv(w, &waveform))?;
    let src =
        PairSourceSpec { pair_rate: cfg.source.pair_rate, waveform, duration: cfg.source.duration, seed: cfg.seed };
    let streams = simulate_run(&src, &cfg.signal, &cfg.idler, cfg.splitter.then_some(&cfg.idler))?;
    dir.write_with("events.txt", |w| io::write_events(w, &streams))?;
    analyze_streams(cfg, &mut dir, &streams[0], &streams[1..])?;
    dir.finish("montecarlo", &cfg.canonical(), cfg.seed)
}

fn analyze_streams(
    cfg: &RunConfig,
    dir: &mut OutputDir,
    signal: &EventStream,
    idlers: &[EventStream],
) -> Result<(), CliError> {
    let (summary, hists) = summarize(signal, idlers, &cfg.analysis)?;
    dir.write_pairs("summary.txt", &summary.to_pairs())?;
    let t = signal.duration();
    let idler_rate: f64 = idlers.iter().map(EventStream::rate).sum();
    let g2 = normalized_g2(&hists.signal_idler, signal.rate(), idler_rate, t)?;
    dir.write_with("histogram.csv", |w| io::write_histogram_csv(w, &hists.signal_idler, g2.values()))?;
    if let (Some(h), [i1, i2]) = (&hists.idler_idler, idlers) {
        let g2 = normalized_g2(h, i1.rate(), i2.rate(), t)?;
        dir.write_with("histogram_ii.csv", |w| io::write_histogram_csv(w, h, g2.values()))?;
    }
    Ok(())
}

fn od_sweep(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let mut dir = start(cfg, out)?;
    let sw = &cfg.sweep;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, sw.noise).map_err(|e| CliError::Config(format!("sweep.noise: {e}")))?;
    let mut jitter = |v: f64| if sw.noise > 0.0 { (v * (1.0 + noise.sample(&mut rng))).max(0.0) } else { v };
    let mut points = Vec::with_capacity(sw.od_values.len());
    for &od in &sw.od_values {
        let mut p = predict_rates(od, &sw.model)?;
        if let Some((prefactor, exponent)) = sw.heralding {
            p.n_coincidence = p.n_signal * prefactor * od.powf(exponent);
        }
        points.push(OdScanPoint {
            od,
            n_signal: jitter(p.n_signal),
            n_idler: jitter(p.n_idler),
            n_coincidence: jitter(p.n_coincidence),
        });
    }
    dir.write_with("od_scan.csv", |w| io::write_od_scan_csv(w, &points))?;
    dir.write_pairs("fit_report.txt", &fit_report(&points)?)?;
    dir.finish("montecarlo", &cfg.canonical(), cfg.seed)
}

fn fit_report(points: &[OdScanPoint]) -> Result<Pairs, CliError> {
    let mut r = Pairs::new();
    kv(&mut r, "points", points.len());
    let nc: Vec<(f64, f64)> = points.iter().map(|p| (p.od, p.n_coincidence)).collect();
    let eta: Vec<(f64, f64)> = points.iter().filter_map(|p| p.heralding_idler().map(|h| (p.od, h))).collect();
    for (name, data) in [("coincidence", &nc), ("heralding", &eta)] {
        let fit = powerlaw_fit(data)?;
        num(&mut r, format!("{name}.exponent"), fit.exponent);
        num(&mut r, format!("{name}.exponent_stderr"), fit.exponent_stderr);
        num(&mut r, format!("{name}.prefactor"), fit.prefactor);
    }
    let columns: [Column; 3] =
        [("signal", |p| p.n_signal), ("idler", |p| p.n_idler), ("coincidence", |p| p.n_coincidence)];
    for (name, get) in columns {
        let data: Vec<(f64, f64)> = points.iter().map(|p| (p.od, get(p))).collect();
        let fits = polyfit_linear_quadratic(&data)?;
        num(&mut r, format!("{name}.origin_linear"), fits.linear);
        num(&mut r, format!("{name}.origin_linear_ssr"), fits.linear_ssr);
        num(&mut r, format!("{name}.origin_quadratic"), fits.quadratic);
        num(&mut r, format!("{name}.origin_quadratic_ssr"), fits.quadratic_ssr);
    }
    Ok(r)
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::Config(format!("cannot read input {}: {e}", path.display())))?;
    Ok(bytes)
}

pub fn fit(cfg: &RunConfig, out: &Path, input: &Path) -> Result<(), CliError> {
    let bytes = read_input(input)?;
    let points = io::read_od_scan_csv(&bytes[..])?;
    let mut dir = start(cfg, out)?;
    dir.note("input_sha256", sha256_hex(&bytes));
    dir.write_pairs("fit_report.txt", &fit_report(&points)?)?;
    dir.finish("fit", &cfg.canonical(), cfg.seed)
}

pub fn analyze(cfg: &RunConfig, out: &Path, events: &Path) -> Result<(), CliError> {
    let bytes = read_input(events)?;
    // streams are re-read once the duration is known
    let duration = match cfg.analysis_duration {
        Some(d) => d,
        None => {
            let probe = io::read_events(BufReader::new(&bytes[..]), f64::MAX)?;
            let last = probe.iter().filter_map(|s| s.timestamps().last()).max().copied().unwrap_or(0);
            (last + 1) as f64 * TICK
        }
    };
    let streams = io::read_events(BufReader::new(&bytes[..]), duration)?;
    let (signal, idlers) = match streams.split_first() {
        Some((s, rest)) if s.channel().0 == 0 && (1..=2).contains(&rest.len()) => (s, rest),
        _ => {
            let ids: Vec<u32> = streams.iter().map(|s| s.channel().0).collect();
            return Err(Error::Config(format!(
                "{}: need signal channel 0 and one or two idler channels, found {ids:?}",
                events.display()
            ))
            .into());
        }
    };
    let mut dir = start(cfg, out)?;
    dir.note("input_sha256", sha256_hex(&bytes));
    dir.note("duration_s", format!("{duration:e}"));
    analyze_streams(cfg, &mut dir, signal, idlers)?;
    dir.finish("analyze", &cfg.canonical(), cfg.seed)
}
