use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::constants::TWO_PI;
use crate::error::{Error, Result};

/// Relative mismatch below which a phase triple counts as a pure translation.
pub const TRANSLATION_TOLERANCE: f64 = 1e-6;

/// In-plane geometry of one color of the three-beam triangular lattice.
///
/// Each beam makes an angle `θ = asin(2λ/3d)` with the plane normal, so
/// the in-plane wavevector is `k⊥ = 4π/(3d)` independent of wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeGeometry {
    /// Lattice constant d, m.
    pub spacing: f64,
    /// λ, m.
    pub wavelength: f64,
    /// θ, rad.
    pub angle: f64,
    /// k⊥, 1/m.
    pub k_perp: f64,
    /// Unit projection directions at 120°, 240° and 360°.
    pub directions: [[f64; 2]; 3],
}

impl LatticeGeometry {
    pub fn new(spacing: f64, wavelength: f64) -> Result<Self> {
        if !(spacing > 0.0 && wavelength > 0.0) {
            return Err(Error::InvalidArgument("spacing and wavelength must be positive".into()));
        }
        let s = 2.0 * wavelength / (3.0 * spacing);
        if s > 1.0 {
            return Err(Error::Geometry(s));
        }
        let angle = s.asin();
        let k_perp = TWO_PI / wavelength * angle.sin();
        let directions = [1, 2, 3].map(|j| {
            let a = 2.0 * PI * f64::from(j) / 3.0;
            [a.cos(), a.sin()]
        });
        Ok(LatticeGeometry { spacing, wavelength, angle, k_perp, directions })
    }

    /// Lattice constant implied by `k⊥`; equals `spacing` up to rounding.
    pub fn reconstructed_spacing(&self) -> f64 {
        4.0 * PI / (3.0 * self.k_perp)
    }

    /// Primitive vectors of the triangular lattice of minima.
    pub fn lattice_vectors(&self) -> [[f64; 2]; 2] {
        let d = self.spacing;
        [[0.0, d], [d * 3f64.sqrt() / 2.0, d / 2.0]]
    }

    /// `√3 k⊥ / 2`, the spatial frequency inside each cos² term.
    pub fn half_wavenumber(&self) -> f64 {
        3f64.sqrt() * self.k_perp / 2.0
    }

    fn projection(&self, j: usize, x: f64, y: f64) -> f64 {
        x * self.directions[j][0] + y * self.directions[j][1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeConfig {
    pub geometry: LatticeGeometry,
    /// I_m: absolute intensity is `I_m` times the relative pattern, W/m².
    pub intensity: f64,
    /// φ_j, stored in [0, 2π).
    pub phases: [f64; 3],
}

impl LatticeConfig {
    pub fn new(geometry: LatticeGeometry, intensity: f64, phases: [f64; 3]) -> Result<Self> {
        if !(intensity >= 0.0 && intensity.is_finite()) {
            return Err(Error::InvalidArgument(format!("intensity must be >= 0, got {intensity}")));
        }
        Ok(LatticeConfig { geometry, intensity, phases: phases.map(|p| p.rem_euclid(TWO_PI)) })
    }

    pub fn with_phases(&self, phases: [f64; 3]) -> Self {
        LatticeConfig { phases: phases.map(|p| p.rem_euclid(TWO_PI)), ..*self }
    }

    pub fn with_intensity(&self, intensity: f64) -> Self {
        LatticeConfig { intensity, ..*self }
    }
}

/// Relative intensity `6 − Σ_j cos²(√3 k⊥ r_j/2 + φ_j)`; lies in [3, 6].
pub fn intensity_pattern(config: &LatticeConfig, x: f64, y: f64) -> f64 {
    let g = &config.geometry;
    let q = g.half_wavenumber();
    6.0 - (0..3).map(|j| (q * g.projection(j, x, y) + config.phases[j]).cos().powi(2)).sum::<f64>()
}

/// Analytic gradient of [`intensity_pattern`], 1/m.
pub fn pattern_gradient(config: &LatticeConfig, x: f64, y: f64) -> [f64; 2] {
    let g = &config.geometry;
    let q = g.half_wavenumber();
    let mut grad = [0.0; 2];
    for j in 0..3 {
        // d/dr [−cos²(a)] = sin(2a) · q
        let s = (2.0 * (q * g.projection(j, x, y) + config.phases[j])).sin() * q;
        grad[0] += s * g.directions[j][0];
        grad[1] += s * g.directions[j][1];
    }
    grad
}

/// Extremes of the relative pattern over one unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternStats {
    pub min: f64,
    pub max: f64,
    /// Largest |∇ pattern|, 1/m.
    pub max_gradient: f64,
}

impl PatternStats {
    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    /// Samples an `n × n` grid over the unit cell and polishes each extremum
    /// with a shrinking compass search.
    pub fn sample(config: &LatticeConfig, n: usize) -> Self {
        let n = n.max(8);
        let [a1, a2] = config.geometry.lattice_vectors();
        let point = |u: f64, v: f64| [u * a1[0] + v * a2[0], u * a1[1] + v * a2[1]];
        let grad_norm = |p: [f64; 2]| {
            let g = pattern_gradient(config, p[0], p[1]);
            g[0].hypot(g[1])
        };
        let value = |p: [f64; 2]| intensity_pattern(config, p[0], p[1]);

        let mut best_min = (f64::INFINITY, [0.0; 2]);
        let mut best_max = (f64::NEG_INFINITY, [0.0; 2]);
        let mut best_grad = (f64::NEG_INFINITY, [0.0; 2]);
        for i in 0..n {
            for k in 0..n {
                let p = point(i as f64 / n as f64, k as f64 / n as f64);
                let v = value(p);
                if v < best_min.0 {
                    best_min = (v, p);
                }
                if v > best_max.0 {
                    best_max = (v, p);
                }
                let gn = grad_norm(p);
                if gn > best_grad.0 {
                    best_grad = (gn, p);
                }
            }
        }
        let h = config.geometry.spacing / n as f64;
        PatternStats {
            min: -polish(|p| -value(p), best_min.1, h),
            max: polish(value, best_max.1, h),
            max_gradient: polish(grad_norm, best_grad.1, h),
        }
    }
}

/// Local maximisation by compass search starting at `start` with step `h`.
fn polish(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], mut h: f64) -> f64 {
    let mut p = start;
    let mut best = f(p);
    let floor = h * 1e-9;
    while h > floor {
        let mut moved = false;
        for d in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            let q = [p[0] + h * d[0], p[1] + h * d[1]];
            let v = f(q);
            if v > best {
                best = v;
                p = q;
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    best
}

/// In-plane displacement `t` with `I(x − t; φ) = I(x; φ + δφ)` for all `x`.
///
/// Each cos² term only sees its phase modulo π, so a triple is translational
/// when `Σ δφ_j ≡ 0 (mod π)`. Phases are taken as continuous modulator
/// settings: `(−π, π, 0)` is a shift by one lattice constant, not zero.
pub fn translation_for_phases(config: &LatticeConfig, shifts: [f64; 3]) -> Result<[f64; 2]> {
    let g = &config.geometry;
    let q = g.half_wavenumber();
    let total: f64 = shifts.iter().sum();
    let k = (total / PI).round();
    if (total - k * PI).abs() > 1e-5 {
        return Err(Error::NonTranslational(shifts));
    }

    // r_j(t) = −(δφ_j − m_j π)/q with Σ m_j = k; pick the m closest to the
    // continuous solution.
    let k = k as i64;
    let base = k.div_euclid(3);
    let mut best: Option<(f64, [i64; 3])> = None;
    for m0 in base - 2..=base + 2 {
        for m1 in base - 2..=base + 2 {
            let m = [m0, m1, k - m0 - m1];
            let v = (0..3).fold([0.0; 2], |acc, j| {
                [acc[0] + m[j] as f64 * g.directions[j][0], acc[1] + m[j] as f64 * g.directions[j][1]]
            });
            let norm = v[0].hypot(v[1]);
            if best.is_none_or(|(b, _)| norm < b - 1e-12) {
                best = Some((norm, m));
            }
        }
    }
    let m = best.map(|(_, m)| m).unwrap_or([0, 0, 0]);

    let mut t = [0.0; 2];
    for j in 0..3 {
        let rho = -(shifts[j] - m[j] as f64 * PI) / q;
        t[0] += 2.0 / 3.0 * rho * g.directions[j][0];
        t[1] += 2.0 / 3.0 * rho * g.directions[j][1];
    }

    let mismatch = translation_mismatch(config, shifts, t, 64);
    let range = PatternStats::sample(config, 64).range();
    if mismatch > TRANSLATION_TOLERANCE * range {
        return Err(Error::NonTranslational(shifts));
    }
    Ok(t)
}

/// max |I(x − t; φ) − I(x; φ + δφ)| over an `n × n` grid on one unit cell.
pub(crate) fn translation_mismatch(config: &LatticeConfig, shifts: [f64; 3], t: [f64; 2], n: usize) -> f64 {
    let shifted =
        config.with_phases([config.phases[0] + shifts[0], config.phases[1] + shifts[1], config.phases[2] + shifts[2]]);
    let [a1, a2] = config.geometry.lattice_vectors();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            let (u, v) = (i as f64 / n as f64, k as f64 / n as f64);
            let x = u * a1[0] + v * a2[0];
            let y = u * a1[1] + v * a2[1];
            let lhs = intensity_pattern(config, x - t[0], y - t[1]);
            let rhs = intensity_pattern(&shifted, x, y);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// Writes `x_um,y_um,intensity_rel` rows (row-major in y then x) over a
/// square window of half-width `extent` centred on the origin.
pub fn write_pattern_csv<W: Write>(config: &LatticeConfig, n: usize, extent: f64, mut out: W) -> std::io::Result<()> {
    writeln!(out, "x_um,y_um,intensity_rel")?;
    let n = n.max(2);
    for iy in 0..n {
        let y = -extent + 2.0 * extent * iy as f64 / (n - 1) as f64;
        for ix in 0..n {
            let x = -extent + 2.0 * extent * ix as f64 / (n - 1) as f64;
            writeln!(out, "{:.6},{:.6},{:.12}", x * 1e6, y * 1e6, intensity_pattern(config, x, y))?;
        }
    }
    Ok(())
}
