//! Physical constants (SI) and unit conversions used at I/O boundaries.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Gauss per tesla.
pub const GAUSS_PER_TESLA: f64 = 1.0e4;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub amu: f64,
    pub bohr_radius: f64,
    pub gauss_per_tesla: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants =
        PhysicalConstants { hbar: HBAR, amu: AMU, bohr_radius: BOHR_RADIUS, gauss_per_tesla: GAUSS_PER_TESLA };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

pub fn nm(value: f64) -> f64 {
    value * 1e-9
}

pub fn um(value: f64) -> f64 {
    value * 1e-6
}

/// Cyclic frequency in Hz to angular frequency in rad/s.
pub fn hz_to_rad(f: f64) -> f64 {
    TWO_PI * f
}

pub fn khz_to_rad(f: f64) -> f64 {
    TWO_PI * f * 1e3
}

pub fn rad_to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}

pub fn bohr(a: f64) -> f64 {
    a * BOHR_RADIUS
}

/// Velocity in m/s to µm/ms (numerically identical to mm/s).
pub fn m_per_s_to_um_per_ms(v: f64) -> f64 {
    v * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_figs_equal(a: f64, b: f64, figs: i32) -> bool {
        let scale = 10f64.powi(figs - 1 - b.abs().log10().floor() as i32);
        (a * scale).round() == (b * scale).round()
    }

    #[test]
    fn six_significant_figures() {
        assert!(sig_figs_equal(BOHR_RADIUS, 5.29177e-11, 6));
        assert!(sig_figs_equal(HBAR, 1.05457e-34, 6));
        assert_eq!(PhysicalConstants::default(), PhysicalConstants::CODATA);
    }

    #[test]
    fn conversions() {
        assert_eq!(nm(681.0), 681e-9);
        assert!((rad_to_hz(khz_to_rad(160.0)) - 160e3).abs() < 1e-9);
        assert_eq!(m_per_s_to_um_per_ms(4e-3), 4.0);
    }
}
