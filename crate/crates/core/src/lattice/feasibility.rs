use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::geometry::{LatticeConfig, LatticeGeometry, PatternStats};
use super::{tunneling_rate, LightShift, LineModel};
use crate::error::{Error, Result};
use crate::species::{lookup_species, Species, CS133, LI6};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Color {
    /// Short-wavelength lattice that holds the qubit atoms.
    L1,
    /// Long-wavelength lattice that holds the messenger atoms.
    L2,
}

/// Ceilings applied at every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Requirements {
    /// Upper bound on each of the tunneling and scattering rates, 1/s.
    pub decoherence_ceiling: f64,
    /// Upper bound on the cross-talk force ratio α for both species.
    pub alpha_max: f64,
}

impl Default for Requirements {
    fn default() -> Self {
        // α < 1: each lattice exerts the larger force on its own species
        Requirements { decoherence_ceiling: 2.0, alpha_max: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityPoint {
    pub i1: f64,
    pub i2: f64,
    pub alpha: f64,
    pub independent_control_ok: bool,
    pub li_tunneling_ok: bool,
    pub cs_tunneling_ok: bool,
    pub li_scattering_ok: bool,
    pub cs_scattering_ok: bool,
}

impl FeasibilityPoint {
    pub fn feasible(&self) -> bool {
        self.independent_control_ok
            && self.li_tunneling_ok
            && self.cs_tunneling_ok
            && self.li_scattering_ok
            && self.cs_scattering_ok
    }

    pub fn ratio(&self) -> f64 {
        self.i1 / self.i2
    }
}

/// Decoherence rates at one operating point, 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceRates {
    pub li_tunneling: f64,
    pub cs_tunneling: f64,
    pub li_scattering: f64,
    pub cs_scattering: f64,
}

/// Two overlaid triangular lattices with matched lattice constants, one per
/// species.
#[derive(Debug, Clone)]
pub struct BichromaticLattice {
    pub l1: LatticeConfig,
    pub l2: LatticeConfig,
    pub qubit: Species,
    pub messenger: Species,
    pub model: LineModel,
    // [species][color], species 0 = qubit
    shifts: [[LightShift; 2]; 2],
    stats: [PatternStats; 2],
}

impl BichromaticLattice {
    pub fn new(
        l1: LatticeConfig,
        l2: LatticeConfig,
        qubit: Species,
        messenger: Species,
        model: LineModel,
    ) -> Result<Self> {
        if (l1.geometry.spacing - l2.geometry.spacing).abs() > 1e-12 * l1.geometry.spacing {
            return Err(Error::InvalidArgument("both colors must share one lattice constant".into()));
        }
        let shift = |s: &Species, c: &LatticeConfig| LightShift::new(s, c.geometry.wavelength, model);
        let shifts = [[shift(&qubit, &l1)?, shift(&qubit, &l2)?], [shift(&messenger, &l1)?, shift(&messenger, &l2)?]];
        let stats = [PatternStats::sample(&l1, 128), PatternStats::sample(&l2, 128)];
        Ok(BichromaticLattice { l1, l2, qubit, messenger, model, shifts, stats })
    }

    /// d = 1.5 µm, λ₁ = 681 nm for ⁶Li, λ₂ = 1064 nm for ¹³³Cs, zero phases.
    pub fn standard(model: LineModel) -> Result<Self> {
        Self::with_geometry(1.5e-6, 681e-9, 1064e-9, model)
    }

    pub fn with_geometry(spacing: f64, lambda1: f64, lambda2: f64, model: LineModel) -> Result<Self> {
        let l1 = LatticeConfig::new(LatticeGeometry::new(spacing, lambda1)?, 0.0, [0.0; 3])?;
        let l2 = LatticeConfig::new(LatticeGeometry::new(spacing, lambda2)?, 0.0, [0.0; 3])?;
        Self::new(l1, l2, lookup_species(LI6)?, lookup_species(CS133)?, model)
    }

    pub fn spacing(&self) -> f64 {
        self.l1.geometry.spacing
    }

    fn species_index(&self, species: &Species) -> Result<usize> {
        if species.name == self.qubit.name {
            Ok(0)
        } else if species.name == self.messenger.name {
            Ok(1)
        } else {
            Err(Error::UnknownSpecies(species.name.clone()))
        }
    }

    /// Maximum force `max|∇V|` the given color exerts per unit `I_m`.
    fn force_per_intensity(&self, species: usize, color: usize) -> f64 {
        self.shifts[species][color].potential(1.0).abs() * self.stats[color].max_gradient
    }

    /// Lattice depth (J) seen by `species` from `color` at scale `intensity`.
    fn depth(&self, species: usize, color: usize, intensity: f64) -> f64 {
        self.shifts[species][color].potential(intensity).abs() * self.stats[color].range()
    }

    /// Cross-talk α: peak force of the other lattice over peak force of the
    /// species' own lattice (L1 for the qubit, L2 for the messenger).
    pub fn max_force_ratio(&self, i1: f64, i2: f64, species: &Species) -> Result<f64> {
        if !(i1 > 0.0 && i2 > 0.0) {
            return Err(Error::InvalidArgument("intensities must be positive".into()));
        }
        let s = self.species_index(species)?;
        let f1 = self.force_per_intensity(s, 0) * i1;
        let f2 = self.force_per_intensity(s, 1) * i2;
        Ok(if s == 0 { f2 / f1 } else { f1 / f2 })
    }

    /// I₁/I₂ window inside which both cross-talk ratios stay below `alpha_max`.
    pub fn independent_control_bounds(&self, alpha_max: f64) -> (f64, f64) {
        let kappa_qubit = self.force_per_intensity(0, 1) / self.force_per_intensity(0, 0);
        let kappa_messenger = self.force_per_intensity(1, 0) / self.force_per_intensity(1, 1);
        (kappa_qubit / alpha_max, alpha_max / kappa_messenger)
    }

    /// Ratio I₁/I₂ at which both species see the same cross-talk, and that α.
    pub fn balanced_ratio(&self) -> (f64, f64) {
        let kappa_qubit = self.force_per_intensity(0, 1) / self.force_per_intensity(0, 0);
        let kappa_messenger = self.force_per_intensity(1, 0) / self.force_per_intensity(1, 1);
        let r = (kappa_qubit / kappa_messenger).sqrt();
        (r, kappa_messenger * r)
    }

    pub fn rates(&self, i1: f64, i2: f64) -> Result<DecoherenceRates> {
        let d = self.spacing();
        let tunneling = |s: usize, color: usize, mass: f64, i: f64| -> Result<f64> {
            let depth = self.depth(s, color, i);
            if depth <= 0.0 {
                return Ok(f64::INFINITY);
            }
            Ok(tunneling_rate(depth, mass, d)?.rate)
        };
        let scattering = |s: usize| {
            self.shifts[s][0].scattering(i1 * self.stats[0].range())
                + self.shifts[s][1].scattering(i2 * self.stats[1].range())
        };
        Ok(DecoherenceRates {
            li_tunneling: tunneling(0, 0, self.qubit.mass, i1)?,
            cs_tunneling: tunneling(1, 1, self.messenger.mass, i2)?,
            li_scattering: scattering(0),
            cs_scattering: scattering(1),
        })
    }

    pub fn evaluate(&self, i1: f64, i2: f64, req: &Requirements) -> Result<FeasibilityPoint> {
        let alpha_q = self.max_force_ratio(i1, i2, &self.qubit)?;
        let alpha_m = self.max_force_ratio(i1, i2, &self.messenger)?;
        let r = self.rates(i1, i2)?;
        let ceiling = req.decoherence_ceiling;
        Ok(FeasibilityPoint {
            i1,
            i2,
            alpha: alpha_q.max(alpha_m),
            independent_control_ok: alpha_q < req.alpha_max && alpha_m < req.alpha_max,
            li_tunneling_ok: r.li_tunneling < ceiling,
            cs_tunneling_ok: r.cs_tunneling < ceiling,
            li_scattering_ok: r.li_scattering < ceiling,
            cs_scattering_ok: r.cs_scattering < ceiling,
        })
    }
}

/// Rectangular grid of (I₁, I₂) values, W/m².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensityGrid {
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
}

impl IntensityGrid {
    pub fn log_spaced(i1: (f64, f64), i2: (f64, f64), n1: usize, n2: usize) -> Result<Self> {
        fn axis((lo, hi): (f64, f64), n: usize) -> Result<Vec<f64>> {
            if !(lo > 0.0 && hi >= lo && n >= 1) {
                return Err(Error::InvalidArgument(format!("bad grid axis [{lo}, {hi}] x {n}")));
            }
            if n == 1 {
                return Ok(vec![lo]);
            }
            let (a, b) = (lo.ln(), hi.ln());
            Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
        }
        Ok(IntensityGrid { i1: axis(i1, n1)?, i2: axis(i2, n2)? })
    }

    pub fn len(&self) -> usize {
        self.i1.len() * self.i2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityRegion {
    /// Row-major: I₁ outer, I₂ inner.
    pub points: Vec<FeasibilityPoint>,
    pub feasible_count: usize,
    /// Smallest and largest I₁/I₂ among feasible points.
    pub ratio_bounds: Option<(f64, f64)>,
}

impl FeasibilityRegion {
    pub fn feasible_fraction(&self) -> f64 {
        if self.points.is_empty() {
            0.0
        } else {
            self.feasible_count as f64 / self.points.len() as f64
        }
    }
}

/// Evaluates every grid point; work is split across the current rayon pool
/// and results are kept in grid order.
pub fn feasibility_region(
    lattice: &BichromaticLattice,
    grid: &IntensityGrid,
    req: &Requirements,
) -> Result<FeasibilityRegion> {
    let n2 = grid.i2.len();
    let points = (0..grid.len())
        .into_par_iter()
        .map(|idx| lattice.evaluate(grid.i1[idx / n2], grid.i2[idx % n2], req))
        .collect::<Result<Vec<_>>>()?;
    let mut feasible_count = 0;
    let mut bounds: Option<(f64, f64)> = None;
    for p in points.iter().filter(|p| p.feasible()) {
        feasible_count += 1;
        let r = p.ratio();
        bounds = Some(match bounds {
            None => (r, r),
            Some((lo, hi)) => (lo.min(r), hi.max(r)),
        });
    }
    Ok(FeasibilityRegion { points, feasible_count, ratio_bounds: bounds })
}

pub fn write_feasibility_csv<W: Write>(region: &FeasibilityRegion, mut out: W) -> std::io::Result<()> {
    writeln!(out, "I1_W_m2,I2_W_m2,alpha,indep_ok,li_tun_ok,cs_tun_ok,li_sc_ok,cs_sc_ok,feasible")?;
    let b = |x: bool| u8::from(x);
    for p in &region.points {
        writeln!(
            out,
            "{:.6e},{:.6e},{:.6e},{},{},{},{},{},{}",
            p.i1,
            p.i2,
            p.alpha,
            b(p.independent_control_ok),
            b(p.li_tunneling_ok),
            b(p.cs_tunneling_ok),
            b(p.li_scattering_ok),
            b(p.cs_scattering_ok),
            b(p.feasible())
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice() -> BichromaticLattice {
        BichromaticLattice::standard(LineModel::FineStructure).unwrap()
    }

    #[test]
    fn alpha_vanishes_without_other_light() {
        let l = lattice();
        let li = l.qubit.clone();
        // the other lattice off: limit of a tiny I₂
        assert!(l.max_force_ratio(1e6, 1e-300, &li).unwrap() < 1e-300);
        assert!(l.max_force_ratio(0.0, 1.0, &li).is_err());
    }

    #[test]
    fn alpha_linear_in_other_intensity() {
        let l = lattice();
        let (li, cs) = (l.qubit.clone(), l.messenger.clone());
        let a = l.max_force_ratio(1e6, 3e6, &li).unwrap();
        let b = l.max_force_ratio(1e6, 6e6, &li).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        let c = l.max_force_ratio(2e6, 3e6, &cs).unwrap();
        let d = l.max_force_ratio(4e6, 3e6, &cs).unwrap();
        assert!((d / c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cross_talk_near_sixteen_percent_at_quarter_ratio() {
        let l = lattice();
        let (li, cs) = (l.qubit.clone(), l.messenger.clone());
        let a = l.max_force_ratio(0.24, 1.0, &li).unwrap().max(l.max_force_ratio(0.24, 1.0, &cs).unwrap());
        assert!((a - 0.16).abs() <= 0.5 * 0.16, "alpha = {a}");
        let dominant = BichromaticLattice::standard(LineModel::DominantLine).unwrap();
        let a2 =
            dominant.max_force_ratio(0.24, 1.0, &li).unwrap().max(dominant.max_force_ratio(0.24, 1.0, &cs).unwrap());
        assert!((a2 - 0.16).abs() <= 0.5 * 0.16, "alpha = {a2}");
    }

    #[test]
    fn unknown_species_rejected() {
        let l = lattice();
        let mut other = l.qubit.clone();
        other.name = "K40".into();
        assert!(l.max_force_ratio(1.0, 1.0, &other).is_err());
    }

    #[test]
    fn impossible_ceiling_gives_empty_region() {
        let l = lattice();
        let grid = IntensityGrid::log_spaced((1e5, 1e8), (1e5, 1e9), 20, 20).unwrap();
        let req = Requirements { decoherence_ceiling: 0.0, ..Requirements::default() };
        let region = feasibility_region(&l, &grid, &req).unwrap();
        assert_eq!(region.feasible_count, 0);
        assert_eq!(region.ratio_bounds, None);
        assert_eq!(region.feasible_fraction(), 0.0);
    }

    #[test]
    fn csv_layout() {
        let l = lattice();
        let grid = IntensityGrid::log_spaced((1e6, 2e6), (1e7, 2e7), 2, 3).unwrap();
        let region = feasibility_region(&l, &grid, &Requirements::default()).unwrap();
        let mut buf = Vec::new();
        write_feasibility_csv(&region, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "I1_W_m2,I2_W_m2,alpha,indep_ok,li_tun_ok,cs_tun_ok,li_sc_ok,cs_sc_ok,feasible");
        assert_eq!(lines[1].split(',').count(), 9);
        assert!(lines[1].starts_with("1.000000e6,1.000000e7"));
    }
}
