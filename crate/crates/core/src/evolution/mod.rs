//! Time evolution: exact spectral free propagation, and Crank–Nicolson
//! propagation through a localized vector-potential pulse.

mod crank_nicolson;
mod pulse;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;
use crate::wave::{PlaneWave, WaveFunction};

pub use crank_nicolson::{lattice_energy, propagate, step_phase, Stepper};
pub use pulse::{ConstantPotential, PulseParams, Superposed, VectorPotential};

/// Free evolution by `exp(-i omega(p) t)` in momentum space. Exactly unitary
/// on the lattice; `t` may be negative.
pub fn free_propagate<T: Real>(psi: &WaveFunction<T>, t: T) -> WaveFunction<T> {
    if t == T::zero() {
        return psi.clone();
    }
    let mut spec = psi.to_momentum();
    let g = *psi.grid();
    let u = *g.units();
    for (j, c) in spec.samples_mut().iter_mut().enumerate() {
        *c = *c * Complex::from_polar(T::one(), -u.dispersion(g.momentum(j)) * t);
    }
    spec.to_position()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub grid: Grid<T>,
    pub dt: T,
    pub scheme: Scheme,
    /// Largest sup-norm change tolerated when the step is halved.
    pub convergence: T,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(grid: Grid<T>, dt: T) -> Result<Self> {
        let cfg = Self { grid, dt, scheme: Scheme::CrankNicolson, convergence: T::lit(1e-8) };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_convergence(self, tol: T) -> Result<Self> {
        let cfg = Self { convergence: tol, ..self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return Err(Error::InvalidParameter("time step must be positive".into()));
        }
        if !(self.convergence.is_finite() && self.convergence > T::zero()) {
            return Err(Error::InvalidParameter("convergence tolerance must be positive".into()));
        }
        Ok(())
    }

    /// `dt E_max / hbar` for the largest lattice energy. Crank–Nicolson is
    /// stable regardless, but phases are only accurate while this is small
    /// for the energies that matter; values above 0.5 for the occupied band
    /// mean the step is too coarse.
    pub fn stiffness(&self) -> T {
        let u = self.grid.units();
        let e_max = T::lit(2.0) * u.hbar * u.hbar / (u.mass * self.grid.dx() * self.grid.dx());
        self.dt * e_max / u.hbar
    }
}

/// Outcome of a pulse run.
#[derive(Debug, Clone)]
pub struct PulseRun<T> {
    /// State at `t = 0`.
    pub psi: WaveFunction<T>,
    /// `|norm(0) / norm(-tau) - 1|` of the returned (finer) run.
    pub norm_drift: T,
    /// Sup-norm difference between the `dt` and `dt/2` runs.
    pub halving_change: T,
    /// Step actually used by the finer run.
    pub dt: T,
    pub steps: usize,
}

/// Crank–Nicolson solution from `t = -tau` to `0`, starting from the
/// plane wave phased so that, without a pulse, the state at `t = 0` is
/// exactly `exp(i p0 x / hbar)` on the lattice.
pub fn evolve_with<T: Real>(
    pw: &PlaneWave<T>,
    potential: &dyn VectorPotential<T>,
    tau: T,
    grid: &Grid<T>,
    dt: T,
) -> Result<(WaveFunction<T>, T, usize)> {
    if !(tau.is_finite() && tau > T::zero()) {
        return Err(Error::InvalidParameter("pulse duration must be positive".into()));
    }
    grid.momentum_bin(pw.p0())?;
    let steps = (tau / dt).ceil().to_usize().unwrap().max(1);
    let h = tau / T::from_usize_lossy(steps);
    let hbar = grid.units().hbar;
    let phase = step_phase(lattice_energy(grid, pw.p0()), h, hbar) * T::from_usize_lossy(steps);
    let start = pw.sample(grid, T::zero()).scale(Complex::from_polar(T::one(), phase));
    let n0 = start.norm_sqr();
    let end = propagate(&start, potential, -tau, h, steps);
    let drift = (end.norm_sqr() / n0 - T::one()).abs();
    Ok((end, drift, steps))
}

/// Runs the pulse at `cfg.dt` and `cfg.dt / 2` and returns the finer
/// result if the two agree to `cfg.convergence`.
pub fn evolve_pulse<T: Real>(pw: &PlaneWave<T>, pp: &PulseParams<T>, cfg: &SolverConfig<T>) -> Result<PulseRun<T>> {
    cfg.validate()?;
    let g = &cfg.grid;
    let (l, r) = pp.region();
    let margin = pp.width();
    if l - margin < g.x_min() || r + margin > g.x_max() {
        return Err(Error::OutOfDomain {
            x: if l - margin < g.x_min() { (l - margin).to_f64().unwrap() } else { (r + margin).to_f64().unwrap() },
            min: g.x_min().to_f64().unwrap(),
            max: g.x_max().to_f64().unwrap(),
        });
    }
    let (coarse, _, _) = evolve_with(pw, pp, pp.tau(), g, cfg.dt)?;
    let (fine, drift, steps) = evolve_with(pw, pp, pp.tau(), g, cfg.dt * T::lit(0.5))?;
    let change = coarse.max_diff(&fine);
    if !(change <= cfg.convergence) {
        return Err(Error::Convergence(format!(
            "halving dt changed the state by {change:e} (tolerance {:e})",
            cfg.convergence
        )));
    }
    Ok(PulseRun {
        psi: fine,
        norm_drift: drift,
        halving_change: change,
        dt: pp.tau() / T::from_usize_lossy(steps),
        steps,
    })
}

/// Largest `|psi1|` allowed near the box edges by [`extract_excitation`].
pub const EXCITATION_EDGE_THRESHOLD: f64 = 1e-6;

/// `psi1 = psi - exp(i p0 x / hbar)`, checked to be localized away from the
/// box edges.
pub fn extract_excitation<T: Real>(psi: &WaveFunction<T>, pw: &PlaneWave<T>) -> Result<WaveFunction<T>> {
    extract_excitation_from(psi, &pw.sample(psi.grid(), T::zero()))
}

/// `psi - reference`, checked to be localized away from the box edges.
pub fn extract_excitation_from<T: Real>(psi: &WaveFunction<T>, reference: &WaveFunction<T>) -> Result<WaveFunction<T>> {
    let psi1 = psi.sub(reference)?;
    let edge = (psi.grid().len() / 32).max(2);
    let amp = psi1.edge_amplitude(edge);
    if amp > T::lit(EXCITATION_EDGE_THRESHOLD) {
        return Err(Error::Accuracy(format!("excitation reaches {amp:e} near the box edges; it is not localized")));
    }
    Ok(psi1)
}

/// The plane wave carried through the same steps as the finer run of
/// [`evolve_pulse`] with the field switched off. Its roundoff (about
/// `1e-12` per sample) is coherent over the pulse region; subtracting this
/// instead of the exact plane wave keeps it out of integrals over that
/// region.
pub fn field_free_reference<T: Real>(
    pw: &PlaneWave<T>,
    pp: &PulseParams<T>,
    cfg: &SolverConfig<T>,
) -> Result<WaveFunction<T>> {
    cfg.validate()?;
    let silent = PulseParams::new(T::zero(), pp.omega0(), pp.tau(), pp.x_center(), pp.width())?;
    evolve_with(pw, &silent, pp.tau(), &cfg.grid, cfg.dt * T::lit(0.5)).map(|(psi, _, _)| psi)
}
