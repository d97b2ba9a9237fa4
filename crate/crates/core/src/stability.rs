//! Lattice-minimum position time series: RMS displacement, differential
//! (two-color) motion, Welch power spectra and the vector light-shift constant.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::species::{detuning, LineLabel, Species};

pub const CSV_HEADER: &str = "t_s,x1_nm,y1_nm,x2_nm,y2_nm";
pub const SPECTRUM_HEADER: &str = "f_hz,psd1,psd2,psd_diff";
/// Fewest samples accepted for a spectrum.
pub const MIN_SPECTRUM_SAMPLES: usize = 16;
/// Segments wanted for segment averaging.
pub const MIN_SEGMENTS: usize = 8;
/// Largest tolerated ratio of maximum to median sampling interval.
pub const MAX_GAP_RATIO: f64 = 2.0;

/// Position record of both lattice colors; positions in m.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSeries {
    times: Vec<f64>,
    color1: Vec<[f64; 2]>,
    color2: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Track {
    Color1,
    Color2,
    /// `color1 − color2`.
    Differential,
}

impl PositionSeries {
    /// Series with a shared time base; timestamps must increase strictly.
    pub fn new(times: Vec<f64>, color1: Vec<[f64; 2]>, color2: Vec<[f64; 2]>) -> Result<Self> {
        if color1.len() != times.len() || color2.len() != times.len() {
            return Err(Error::InvalidArgument(format!(
                "channel lengths {} and {} differ from {} timestamps",
                color1.len(),
                color2.len(),
                times.len()
            )));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!("timestamps not increasing at sample {}", i + 1)));
        }
        Ok(PositionSeries { times, color1, color2 })
    }

    /// Combines two separately recorded channels; no resampling is done.
    pub fn from_channels(t1: Vec<f64>, color1: Vec<[f64; 2]>, t2: &[f64], color2: Vec<[f64; 2]>) -> Result<Self> {
        if t1.len() != t2.len() || t1.iter().zip(t2).any(|(a, b)| a != b) {
            return Err(Error::MisalignedTimestamps);
        }
        Self::new(t1, color1, color2)
    }

    /// Parses the `t_s,x1_nm,y1_nm,x2_nm,y2_nm` schema; `#` lines and blank
    /// lines are skipped.
    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        let mut header_seen = false;
        let (mut t, mut c1, mut c2) = (Vec::new(), Vec::new(), Vec::new());
        for (n, line) in reader.lines().enumerate() {
            let line_no = n + 1;
            let line = line.map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            if !header_seen {
                if text.replace(' ', "") != CSV_HEADER {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected header `{CSV_HEADER}`, found `{text}`"),
                    });
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = text.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let mut v = [0.0; 5];
            for (slot, f) in v.iter_mut().zip(&fields) {
                *slot = f
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Parse { line: line_no, message: format!("`{f}` is not a finite number") })?;
            }
            if let Some(&prev) = t.last() {
                if !(v[0] > prev) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("timestamp {} does not increase", v[0]),
                    });
                }
            }
            t.push(v[0]);
            c1.push([v[1] * 1e-9, v[2] * 1e-9]);
            c2.push([v[3] * 1e-9, v[4] * 1e-9]);
        }
        if !header_seen {
            return Err(Error::Parse { line: 0, message: "missing header".into() });
        }
        Self::new(t, c1, c2)
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for ((t, a), b) in self.times.iter().zip(&self.color1).zip(&self.color2) {
            writeln!(out, "{t:.9},{:.6},{:.6},{:.6},{:.6}", a[0] * 1e9, a[1] * 1e9, b[0] * 1e9, b[1] * 1e9)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn track(&self, track: Track) -> Vec<[f64; 2]> {
        match track {
            Track::Color1 => self.color1.clone(),
            Track::Color2 => self.color2.clone(),
            Track::Differential => {
                self.color1.iter().zip(&self.color2).map(|(a, b)| [a[0] - b[0], a[1] - b[1]]).collect()
            }
        }
    }

    /// Same series with every position shifted by `offset`.
    pub fn shifted(&self, offset: [f64; 2]) -> Self {
        let shift = |v: &Vec<[f64; 2]>| v.iter().map(|p| [p[0] + offset[0], p[1] + offset[1]]).collect();
        PositionSeries { times: self.times.clone(), color1: shift(&self.color1), color2: shift(&self.color2) }
    }

    /// Channels exchanged.
    pub fn swapped(&self) -> Self {
        PositionSeries { times: self.times.clone(), color1: self.color2.clone(), color2: self.color1.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rms {
    /// `√⟨|r − ⟨r⟩|²⟩`, m.
    pub radial: f64,
    pub x: f64,
    pub y: f64,
}

fn axis_rms(values: &[f64]) -> f64 {
    // referenced to the first sample so constant input gives exactly zero
    let n = values.len() as f64;
    let origin = values[0];
    let mean = values.iter().map(|v| v - origin).sum::<f64>() / n;
    (values.iter().map(|v| (v - origin - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn rms_of(points: &[[f64; 2]]) -> Result<Rms> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!("RMS needs at least 2 samples, got {}", points.len())));
    }
    let x = axis_rms(&points.iter().map(|p| p[0]).collect::<Vec<_>>());
    let y = axis_rms(&points.iter().map(|p| p[1]).collect::<Vec<_>>());
    Ok(Rms { radial: (x * x + y * y).sqrt(), x, y })
}

pub fn rms_displacement(series: &PositionSeries, track: Track) -> Result<Rms> {
    rms_of(&series.track(track))
}

pub fn differential_rms(series: &PositionSeries) -> Result<Rms> {
    rms_displacement(series, Track::Differential)
}

/// Median sampling interval, after checking near-uniform sampling.
pub fn sampling_interval(series: &PositionSeries) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InsufficientData("sampling interval needs at least 2 samples".into()));
    }
    let mut gaps: Vec<f64> = series.times.windows(2).map(|w| w[1] - w[0]).collect();
    let max = gaps.iter().copied().fold(0.0, f64::max);
    gaps.sort_by(f64::total_cmp);
    let median = gaps[gaps.len() / 2];
    if max >= MAX_GAP_RATIO * median {
        return Err(Error::NonUniformSampling(format!("largest gap {max:.3e} s vs median {median:.3e} s")));
    }
    Ok(median)
}

/// One-sided power spectral density, m²/Hz, summed over both axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
    pub segment_length: usize,
    pub segments: usize,
}

impl Spectrum {
    pub fn resolution(&self) -> f64 {
        if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            0.0
        }
    }

    /// `∫S df` as a bin sum.
    pub fn integrated(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.resolution()
    }

    pub fn peak_frequency(&self) -> f64 {
        let i = self.density.iter().enumerate().skip(1).max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(i, _)| i);
        self.frequencies[i]
    }
}

/// Segment length for Welch averaging: the largest power of two giving at
/// least [`MIN_SEGMENTS`] half-overlapping segments, or `None` when only a
/// full-length periodogram is possible.
pub fn welch_segment_length(samples: usize) -> Option<usize> {
    // segments = 2n/L − 1 ≥ 8  ⇔  L ≤ 2n/9
    let limit = 2 * samples / (MIN_SEGMENTS + 1);
    if limit < MIN_SPECTRUM_SAMPLES {
        return None;
    }
    Some(1usize << limit.ilog2())
}

fn hann(len: usize) -> Vec<f64> {
    // periodic form: exact 50 %-overlap partition of unity
    (0..len).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos()).collect()
}

fn welch(values: &[f64], dt: f64, len: usize, planner: &mut FftPlanner<f64>) -> (Vec<f64>, Vec<f64>, usize, usize) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let step = if len == n { n } else { len / 2 };
    let window = hann(len);
    let norm: f64 = window.iter().map(|w| w * w).sum();
    let fft = planner.plan_fft_forward(len);
    let bins = len / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut segments = 0;
    let mut start = 0;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    while start + len <= n {
        for (k, slot) in buf.iter_mut().enumerate() {
            *slot = Complex64::new((values[start + k] - mean) * window[k], 0.0);
        }
        fft.process(&mut buf);
        for (a, z) in acc.iter_mut().zip(&buf) {
            *a += z.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let fs = 1.0 / dt;
    let density: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || (len.is_multiple_of(2) && k == len / 2) { 1.0 } else { 2.0 };
            one_sided * p / (segments as f64 * fs * norm)
        })
        .collect();
    let freqs = (0..bins).map(|k| k as f64 * fs / len as f64).collect();
    (freqs, density, len, segments)
}

/// Welch estimate with a periodic Hann window and 50 % overlap. The global
/// mean is removed; segments are not detrended individually.
pub fn power_spectrum(series: &PositionSeries, track: Track) -> Result<Spectrum> {
    let len = welch_segment_length(series.len()).unwrap_or_else(|| {
        log::warn!("only {} samples: using a single full-length periodogram", series.len());
        series.len()
    });
    power_spectrum_segmented(series, track, len)
}

/// [`power_spectrum`] with an explicit segment length (at most the series length).
pub fn power_spectrum_segmented(series: &PositionSeries, track: Track, segment_length: usize) -> Result<Spectrum> {
    if segment_length < 2 || segment_length > series.len() {
        return Err(Error::InvalidArgument(format!("segment length {segment_length} outside [2, {}]", series.len())));
    }
    if series.len() < MIN_SPECTRUM_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "spectrum needs at least {MIN_SPECTRUM_SAMPLES} samples, got {}",
            series.len()
        )));
    }
    let dt = sampling_interval(series)?;
    let points = series.track(track);
    let mut planner = FftPlanner::new();
    let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
    let (frequencies, dx, segment_length, segments) = welch(&xs, dt, segment_length, &mut planner);
    let (_, dy, _, _) = welch(&ys, dt, segment_length, &mut planner);
    let density = dx.iter().zip(&dy).map(|(a, b)| a + b).collect();
    Ok(Spectrum { frequencies, density, segment_length, segments })
}

/// `|∫S df − Var| / Var` for the radial variance of `track`.
pub fn parseval_error(series: &PositionSeries, track: Track, spectrum: &Spectrum) -> Result<f64> {
    let var = rms_displacement(series, track)?.radial.powi(2);
    if !(var > 0.0) {
        return Err(Error::Numerical("zero variance: Parseval ratio undefined".into()));
    }
    Ok((spectrum.integrated() - var).abs() / var)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilitySummary {
    pub rms1_nm: f64,
    pub rms2_nm: f64,
    pub rms_diff_nm: f64,
    pub n_samples: usize,
    pub duration_s: f64,
    pub rms1_x_nm: f64,
    pub rms1_y_nm: f64,
    pub rms2_x_nm: f64,
    pub rms2_y_nm: f64,
    pub rms_diff_x_nm: f64,
    pub rms_diff_y_nm: f64,
    pub spectrum_computed: bool,
    pub parseval_error_max: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub color1: Spectrum,
    pub color2: Spectrum,
    pub differential: Spectrum,
}

impl SpectrumTable {
    /// `f_hz,psd1,psd2,psd_diff` rows in nm²/Hz.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{SPECTRUM_HEADER}")?;
        for (i, f) in self.color1.frequencies.iter().enumerate() {
            writeln!(
                out,
                "{f},{},{},{}",
                self.color1.density[i] * 1e18,
                self.color2.density[i] * 1e18,
                self.differential.density[i] * 1e18
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityAnalysis {
    pub summary: StabilitySummary,
    pub spectra: Option<SpectrumTable>,
}

/// RMS statistics always; spectra only when the series permits, otherwise a
/// warning is recorded.
pub fn analyze(series: &PositionSeries) -> Result<StabilityAnalysis> {
    let r1 = rms_displacement(series, Track::Color1)?;
    let r2 = rms_displacement(series, Track::Color2)?;
    let rd = differential_rms(series)?;
    let mut warnings = Vec::new();
    let spectra = match (
        power_spectrum(series, Track::Color1),
        power_spectrum(series, Track::Color2),
        power_spectrum(series, Track::Differential),
    ) {
        (Ok(color1), Ok(color2), Ok(differential)) => Some(SpectrumTable { color1, color2, differential }),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
            log::warn!("spectrum not computed: {e}");
            warnings.push(format!("spectrum not computed: {e}"));
            None
        }
    };
    let parseval_error_max = match &spectra {
        Some(t) => {
            let errs = [
                parseval_error(series, Track::Color1, &t.color1),
                parseval_error(series, Track::Color2, &t.color2),
                parseval_error(series, Track::Differential, &t.differential),
            ];
            errs.into_iter().filter_map(|e| e.ok()).reduce(f64::max)
        }
        None => None,
    };
    if spectra.as_ref().is_some_and(|t| t.color1.segments < MIN_SEGMENTS) {
        warnings.push("fewer than 8 segments: single full-length periodogram".into());
    }
    Ok(StabilityAnalysis {
        summary: StabilitySummary {
            rms1_nm: r1.radial * 1e9,
            rms2_nm: r2.radial * 1e9,
            rms_diff_nm: rd.radial * 1e9,
            n_samples: series.len(),
            duration_s: series.duration(),
            rms1_x_nm: r1.x * 1e9,
            rms1_y_nm: r1.y * 1e9,
            rms2_x_nm: r2.x * 1e9,
            rms2_y_nm: r2.y * 1e9,
            rms_diff_x_nm: rd.x * 1e9,
            rms_diff_y_nm: rd.y * 1e9,
            spectrum_computed: spectra.is_some(),
            parseval_error_max,
            warnings,
        },
        spectra,
    })
}

/// Reads and analyzes several files in parallel; results keep input order.
pub fn analyze_files(paths: &[PathBuf]) -> Vec<(PathBuf, Result<StabilityAnalysis>)> {
    paths
        .par_iter()
        .map(|p| {
            let result = read_series(p).and_then(|s| analyze(&s));
            (p.clone(), result)
        })
        .collect()
}

pub fn read_series(path: &Path) -> Result<PositionSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    PositionSeries::read_csv(std::io::BufReader::new(file))
}

/// Construction parameters for a synthetic two-color record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub samples: usize,
    pub sample_rate: f64,
    /// Radial RMS of color 1, m.
    pub rms_single: f64,
    /// Radial RMS of `color1 − color2`, m.
    pub rms_differential: f64,
    /// Correlation time of the common-mode drift, s.
    pub correlation_time: f64,
    /// Share of the common-mode variance that is white.
    pub common_white_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            samples: 4096,
            sample_rate: 100.0,
            rms_single: 92e-9,
            rms_differential: 26e-9,
            correlation_time: 0.5,
            common_white_fraction: 0.5,
            seed: 6,
        }
    }
}

fn demean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_projection(v: &mut [f64], onto: &[f64]) {
    let k = dot(v, onto) / dot(onto, onto);
    v.iter_mut().zip(onto).for_each(|(x, o)| *x -= k * o);
}

/// Common-mode drift (AR(1) plus white) shared by both colors, plus
/// independent white noise per color. Exactly rescaled so that color 1 and
/// the differential track have the requested radial RMS.
pub fn synthesize(spec: &SyntheticSpec) -> Result<PositionSeries> {
    if spec.samples < 4 || !(spec.sample_rate > 0.0) || !(spec.correlation_time > 0.0) {
        return Err(Error::InvalidArgument(format!("unusable synthetic spec {spec:?}")));
    }
    if !(spec.rms_single > 0.0 && spec.rms_differential > 0.0) || spec.rms_differential >= 2.0 * spec.rms_single {
        return Err(Error::InvalidArgument("RMS targets must be positive with differential < 2× single".into()));
    }
    let n = spec.samples;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let phi = (-1.0 / (spec.sample_rate * spec.correlation_time)).exp();
    let w = spec.common_white_fraction.clamp(0.0, 1.0);
    let innovation = (1.0 - phi * phi).sqrt();

    let mut axes: Vec<[Vec<f64>; 3]> = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut drift = normal();
        let mut common = Vec::with_capacity(n);
        let mut n1 = Vec::with_capacity(n);
        let mut n2 = Vec::with_capacity(n);
        for _ in 0..n {
            drift = phi * drift + innovation * normal();
            common.push((1.0 - w).sqrt() * drift + w.sqrt() * normal());
            n1.push(normal());
            n2.push(normal());
        }
        for v in [&mut common, &mut n1, &mut n2] {
            demean(v);
        }
        remove_projection(&mut n1, &common);
        remove_projection(&mut n2, &common);
        axes.push([common, n1, n2]);
    }
    // differential track is n1 − n2; scale the independent parts to hit it
    let diff_var: f64 =
        axes.iter().map(|[_, a, b]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).sum::<f64>() / n as f64;
    let s = spec.rms_differential / diff_var.sqrt();
    let noise_var: f64 = axes.iter().map(|[_, a, _]| dot(a, a)).sum::<f64>() * s * s / n as f64;
    let common_var: f64 = axes.iter().map(|[c, _, _]| dot(c, c)).sum::<f64>() / n as f64;
    let residual = spec.rms_single.powi(2) - noise_var;
    if !(residual > 0.0) {
        return Err(Error::InvalidArgument("differential RMS too large for the requested single-color RMS".into()));
    }
    let a = (residual / common_var).sqrt();

    let times = (0..n).map(|i| i as f64 / spec.sample_rate).collect();
    let point = |axis: usize, i: usize| {
        let [c, n1, n2] = &axes[axis];
        (a * c[i] + s * n1[i], a * c[i] + s * n2[i])
    };
    let (mut c1, mut c2) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (x1, x2) = point(0, i);
        let (y1, y2) = point(1, i);
        c1.push([x1, y1]);
        c2.push([x2, y2]);
    }
    PositionSeries::new(times, c1, c2)
}

/// Vector light-shift constant `(Δ₃/₂ − Δ₁/₂)/(Δ₃/₂/2 + Δ₁/₂)`.
pub fn fine_structure_constant_dfs(detuning_d2: f64, detuning_d1: f64) -> Result<f64> {
    let denominator = 0.5 * detuning_d2 + detuning_d1;
    if denominator == 0.0 || denominator.abs() <= 1e-15 * detuning_d2.abs().max(detuning_d1.abs()) {
        return Err(Error::DegenerateDetuning);
    }
    Ok((detuning_d2 - detuning_d1) / denominator)
}

/// `D_FS` of a species in light of `wavelength`, from its D1/D2 lines.
pub fn species_dfs(species: &Species, wavelength: f64) -> Result<f64> {
    let missing = |l: LineLabel| Error::InvalidArgument(format!("{} has no {l} line", species.name));
    let d1 = species.line(LineLabel::D1).ok_or_else(|| missing(LineLabel::D1))?;
    let d2 = species.line(LineLabel::D2).ok_or_else(|| missing(LineLabel::D2))?;
    fine_structure_constant_dfs(detuning(d2, wavelength), detuning(d1, wavelength))
}
