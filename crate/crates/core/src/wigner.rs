//! Phase-space histograms of TWA samples and their overlap with the
//! classical attractor.
//!
//! The density built here is the sampled Wigner quasiprobability as the
//! ensemble sees it: a normalised histogram of trajectory fields. It is not
//! a tomographic reconstruction and cannot show negativity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::Trajectory;
use crate::twa::Ensemble;

/// Rectangular grid over `(Re alpha, Im alpha)` of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl PhaseSpaceGrid {
    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || !(x.1 > x.0) || !(y.1 > y.0) {
            return Err(Error::Domain("grid needs positive bin counts and increasing extents".into()));
        }
        Ok(Self { x_min: x.0, x_max: x.1, y_min: y.0, y_max: y.1, nx, ny })
    }

    /// Square grid over `+-factor * max|alpha_mode|` of a trajectory.
    pub fn around(traj: &Trajectory, mode: usize, factor: f64, bins: usize) -> Result<Self> {
        check_mode(mode)?;
        let r = traj.states.iter().map(|s| s.alpha[mode - 1].norm()).fold(0.0, f64::max) * factor;
        let r = if r > 0.0 { r } else { 1.0 };
        Self::new((-r, r), (-r, r), bins, bins)
    }

    pub fn cell(&self, re: f64, im: f64) -> Option<(usize, usize)> {
        if !(re >= self.x_min && re <= self.x_max && im >= self.y_min && im <= self.y_max) {
            return None;
        }
        let fx = (re - self.x_min) / (self.x_max - self.x_min) * self.nx as f64;
        let fy = (im - self.y_min) / (self.y_max - self.y_min) * self.ny as f64;
        Some(((fx as usize).min(self.nx - 1), (fy as usize).min(self.ny - 1)))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Centre of cell `(ix, iy)`.
    pub fn center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.x_min + (ix as f64 + 0.5) * (self.x_max - self.x_min) / self.nx as f64,
            self.y_min + (iy as f64 + 0.5) * (self.y_max - self.y_min) / self.ny as f64,
        )
    }
}

fn check_mode(mode: usize) -> Result<()> {
    if mode == 1 || mode == 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("mode must be 1 or 2, got {mode}")))
    }
}

/// Normalised histogram, row-major `weights[iy * nx + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Density {
    pub grid: PhaseSpaceGrid,
    pub weights: Vec<f64>,
    pub clipped: usize,
    pub samples: usize,
    pub time: f64,
    pub aleph: f64,
    pub mode: usize,
}

/// Metadata written ahead of binary grid dumps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridHeader {
    pub grid: PhaseSpaceGrid,
    pub time: f64,
    pub aleph: f64,
    pub mode: usize,
    pub samples: usize,
    pub clipped: usize,
    /// Layout of the payload that follows the header line.
    pub layout: &'static str,
}

impl Density {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            grid: self.grid,
            time: self.time,
            aleph: self.aleph,
            mode: self.mode,
            samples: self.samples,
            clipped: self.clipped,
            layout: "f64-le row-major [iy][ix]",
        }
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.weights.iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    /// Separable Gaussian blur with standard deviation `sigma` in cells,
    /// truncated at four sigma; total weight is preserved.
    pub fn smoothed(&self, sigma: f64) -> Density {
        if !(sigma > 0.0) {
            return self.clone();
        }
        let r = (4.0 * sigma).ceil() as isize;
        let k: Vec<f64> = (-r..=r).map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp()).collect();
        let (nx, ny) = (self.grid.nx as isize, self.grid.ny as isize);
        let pass = |src: &[f64], along_x: bool| {
            let mut out = vec![0.0; src.len()];
            for iy in 0..ny {
                for ix in 0..nx {
                    let v = src[(iy * nx + ix) as usize];
                    if v == 0.0 {
                        continue;
                    }
                    let mut norm = 0.0;
                    for (o, w) in (-r..=r).zip(&k) {
                        let (jx, jy) = if along_x { (ix + o, iy) } else { (ix, iy + o) };
                        if (0..nx).contains(&jx) && (0..ny).contains(&jy) {
                            norm += w;
                        }
                    }
                    for (o, w) in (-r..=r).zip(&k) {
                        let (jx, jy) = if along_x { (ix + o, iy) } else { (ix, iy + o) };
                        if (0..nx).contains(&jx) && (0..ny).contains(&jy) {
                            out[(jy * nx + jx) as usize] += v * w / norm;
                        }
                    }
                }
            }
            out
        };
        let w = pass(&pass(&self.weights, true), false);
        Density { weights: w, ..self.clone() }
    }
}

/// Histogram of mode `mode` over all surviving trajectories at sample `index`.
pub fn histogram2d(ensemble: &Ensemble, mode: usize, index: usize, grid: &PhaseSpaceGrid) -> Result<Density> {
    check_mode(mode)?;
    let states = ensemble.states_at(index).ok_or_else(|| {
        Error::Unavailable(format!("no stored states at sample {index}; add a snapshot or store trajectories"))
    })?;
    let mut counts = vec![0usize; grid.len()];
    let mut clipped = 0;
    for s in &states {
        let z = s.alpha[mode - 1];
        match grid.cell(z.re, z.im) {
            Some((ix, iy)) => counts[iy * grid.nx + ix] += 1,
            None => clipped += 1,
        }
    }
    let inside = states.len() - clipped;
    if inside == 0 {
        return Err(Error::Empty("every sample fell outside the grid".into()));
    }
    let n = states.len() as f64;
    Ok(Density {
        grid: *grid,
        weights: counts.iter().map(|c| *c as f64 / n).collect(),
        clipped,
        samples: states.len(),
        time: ensemble.times[index],
        aleph: ensemble.config.aleph.get(),
        mode,
    })
}

/// Cells visited by a trajectory, dilated by `margin` cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorMask {
    pub grid: PhaseSpaceGrid,
    pub cells: Vec<bool>,
    pub margin: usize,
}

impl AttractorMask {
    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }
}

/// Rasterises the polyline through the trajectory samples (sub-stepped at
/// half a cell) and dilates the result with a square structuring element.
pub fn attractor_mask(traj: &Trajectory, mode: usize, grid: &PhaseSpaceGrid, margin: usize) -> Result<AttractorMask> {
    check_mode(mode)?;
    let mut cells = vec![false; grid.len()];
    let cw = ((grid.x_max - grid.x_min) / grid.nx as f64).min((grid.y_max - grid.y_min) / grid.ny as f64);
    let mut mark = |re: f64, im: f64| {
        if let Some((ix, iy)) = grid.cell(re, im) {
            cells[iy * grid.nx + ix] = true;
        }
    };
    let pts: Vec<_> = traj.states.iter().map(|s| s.alpha[mode - 1]).collect();
    if let Some(p) = pts.first() {
        mark(p.re, p.im);
    }
    for w in pts.windows(2) {
        let d = w[1] - w[0];
        let steps = ((d.norm() / (0.5 * cw)).ceil() as usize).max(1);
        for k in 1..=steps {
            let p = w[0] + d * (k as f64 / steps as f64);
            mark(p.re, p.im);
        }
    }
    let m = margin as isize;
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let mut dilated = cells.clone();
    if m > 0 {
        for iy in 0..ny {
            for ix in 0..nx {
                if !cells[(iy * nx + ix) as usize] {
                    continue;
                }
                for jy in (iy - m).max(0)..=(iy + m).min(ny - 1) {
                    for jx in (ix - m).max(0)..=(ix + m).min(nx - 1) {
                        dilated[(jy * nx + jx) as usize] = true;
                    }
                }
            }
        }
    }
    Ok(AttractorMask { grid: *grid, cells: dilated, margin })
}

/// Weight of `density` inside the mask, relative to the total weight on
/// the grid.
pub fn confinement_fraction(density: &Density, mask: &AttractorMask) -> Result<f64> {
    if density.grid != mask.grid {
        return Err(Error::GridMismatch("density and mask use different grids".into()));
    }
    let total = density.total();
    if !(total > 0.0) {
        return Err(Error::Empty("density has no weight on the grid".into()));
    }
    let inside: f64 = density.weights.iter().zip(&mask.cells).filter(|(_, m)| **m).map(|(w, _)| w).sum();
    Ok((inside / total).clamp(0.0, 1.0))
}
