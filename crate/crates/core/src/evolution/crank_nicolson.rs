//! Crank–Nicolson stepping of `(p - A)^2 / 2m` on a periodic three-point
//! stencil.
//!
//! The coupling enters through link phases (Peierls substitution): the hop
//! from node `k + 1` to node `k` picks up `exp(-i A(x_{k+1/2}) dx / hbar)`.
//! The discrete Hamiltonian is then Hermitian for any `A`, reduces to the
//! standard second difference for `A = 0`, and is exactly gauge covariant.

use num_complex::Complex;

use crate::grid::Grid;
use crate::scalar::Real;
use crate::wave::WaveFunction;

use super::pulse::VectorPotential;

/// Energy of the lattice plane wave `exp(i p x / hbar)` for `A = 0`.
pub fn lattice_energy<T: Real>(grid: &Grid<T>, p: T) -> T {
    let u = grid.units();
    let kappa = u.hbar * u.hbar / (u.mass * grid.dx() * grid.dx());
    kappa * (T::one() - (p * grid.dx() / u.hbar).cos())
}

/// Phase advanced per step, `arg` of the Cayley factor, for energy `e`:
/// one step multiplies the eigenstate by `exp(-i phase)`.
pub fn step_phase<T: Real>(e: T, dt: T, hbar: T) -> T {
    T::lit(2.0) * (e * dt / (T::lit(2.0) * hbar)).atan()
}

/// Reusable work buffers for a given grid.
pub struct Stepper<T> {
    grid: Grid<T>,
    /// `hbar^2 / (2 m dx^2)`
    kappa: T,
    /// Link phases, `links[k]` between nodes `k` and `k + 1 (mod n)`.
    links: Vec<Complex<T>>,
    rhs: Vec<Complex<T>>,
    sub: Vec<Complex<T>>,
    sup: Vec<Complex<T>>,
    diag: Vec<Complex<T>>,
    z: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
    /// Link range carrying a nonzero potential, or everything.
    active: (usize, usize),
}

impl<T: Real> Stepper<T> {
    pub fn new(grid: Grid<T>, potential: &dyn VectorPotential<T>) -> Self {
        let n = grid.len();
        let u = grid.units();
        let kappa = u.hbar * u.hbar / (T::lit(2.0) * u.mass * grid.dx() * grid.dx());
        let active = match potential.support() {
            Some((a, b)) => {
                let lo = ((a - grid.x_min()) / grid.dx()).floor() - T::one();
                let hi = ((b - grid.x_min()) / grid.dx()).ceil() + T::one();
                let lo = lo.max(T::zero()).to_usize().unwrap().min(n);
                let hi = hi.max(T::zero()).to_usize().unwrap().min(n);
                (lo, hi)
            }
            None => (0, n),
        };
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        Self {
            grid,
            kappa,
            links: vec![one; n],
            rhs: vec![zero; n],
            sub: vec![zero; n],
            sup: vec![zero; n],
            diag: vec![zero; n],
            z: vec![zero; n],
            scratch: vec![zero; n],
            active,
        }
    }

    fn update_links(&mut self, potential: &dyn VectorPotential<T>, t: T) {
        let g = &self.grid;
        let hbar = g.units().hbar;
        let half = T::lit(0.5) * g.dx();
        for k in self.active.0..self.active.1 {
            let a = potential.value(g.x(k) + half, t);
            self.links[k] = Complex::from_polar(T::one(), -a * g.dx() / hbar);
        }
    }

    /// One step `psi <- (1 + i dt H / 2 hbar)^-1 (1 - i dt H / 2 hbar) psi`
    /// with `H` evaluated at `t_mid`.
    pub fn step(&mut self, psi: &mut [Complex<T>], potential: &dyn VectorPotential<T>, t_mid: T, dt: T) {
        self.update_links(potential, t_mid);
        let n = psi.len();
        let hbar = self.grid.units().hbar;
        // H psi_k = 2 kappa psi_k - kappa (L_k psi_{k+1} + conj(L_{k-1}) psi_{k-1})
        let s = Complex::new(T::zero(), dt * self.kappa / (T::lit(2.0) * hbar));
        let two = T::lit(2.0);
        for k in 0..n {
            let kp = if k + 1 == n { 0 } else { k + 1 };
            let km = if k == 0 { n - 1 } else { k - 1 };
            let hop = self.links[k] * psi[kp] + self.links[km].conj() * psi[km];
            self.rhs[k] = psi[k] - s * (psi[k] * two - hop);
        }
        // Left-hand matrix: diag 1 + 2s, upper -s L_k, lower -s conj(L_{k-1}).
        let d = Complex::new(T::one(), T::zero()) + s * two;
        for k in 0..n {
            let km = if k == 0 { n - 1 } else { k - 1 };
            self.diag[k] = d;
            self.sup[k] = -s * self.links[k];
            self.sub[k] = -s * self.links[km].conj();
        }
        // Corners: M[0][n-1] = sub[0], M[n-1][0] = sup[n-1].
        let beta = self.sub[0];
        let alpha = self.sup[n - 1];
        solve_cyclic(&self.sub, &mut self.diag, &self.sup, alpha, beta, &self.rhs, psi, &mut self.z, &mut self.scratch);
    }
}

/// Cyclic tridiagonal solve by Sherman–Morrison, `alpha = M[n-1][0]`,
/// `beta = M[0][n-1]`. The system and its rank-one correction share one
/// Thomas sweep. `diag` is overwritten; `sub[0]` and `sup[n-1]` are ignored.
#[allow(clippy::too_many_arguments)]
fn solve_cyclic<T: Real>(
    sub: &[Complex<T>],
    diag: &mut [Complex<T>],
    sup: &[Complex<T>],
    alpha: Complex<T>,
    beta: Complex<T>,
    rhs: &[Complex<T>],
    out: &mut [Complex<T>],
    z: &mut [Complex<T>],
    scratch: &mut [Complex<T>],
) {
    let n = rhs.len();
    let zero = Complex::new(T::zero(), T::zero());
    let gamma = -diag[0];
    diag[0] = diag[0] - gamma;
    diag[n - 1] = diag[n - 1] - alpha * beta / gamma;
    // Forward sweep for rhs and for u = (gamma, 0, ..., 0, alpha).
    let mut inv = diag[0].inv();
    out[0] = rhs[0] * inv;
    z[0] = gamma * inv;
    for k in 1..n {
        let w = sup[k - 1] * inv;
        scratch[k] = w;
        inv = (diag[k] - sub[k] * w).inv();
        let u_k = if k == n - 1 { alpha } else { zero };
        out[k] = (rhs[k] - sub[k] * out[k - 1]) * inv;
        z[k] = (u_k - sub[k] * z[k - 1]) * inv;
    }
    for k in (0..n - 1).rev() {
        let w = scratch[k + 1];
        out[k] = out[k] - w * out[k + 1];
        z[k] = z[k] - w * z[k + 1];
    }
    let fact =
        (out[0] + beta * out[n - 1] / gamma) / (Complex::new(T::one(), T::zero()) + z[0] + beta * z[n - 1] / gamma);
    for k in 0..n {
        out[k] = out[k] - fact * z[k];
    }
}

/// Propagates `psi` from `t0` over `steps` steps of size `dt`.
pub fn propagate<T: Real>(
    psi: &WaveFunction<T>,
    potential: &dyn VectorPotential<T>,
    t0: T,
    dt: T,
    steps: usize,
) -> WaveFunction<T> {
    let mut stepper = Stepper::new(*psi.grid(), potential);
    let mut buf = psi.samples().to_vec();
    for s in 0..steps {
        let t_mid = t0 + dt * (T::from_usize_lossy(s) + T::lit(0.5));
        stepper.step(&mut buf, potential, t_mid, dt);
    }
    WaveFunction::new(*psi.grid(), buf).expect("Crank-Nicolson keeps samples finite")
}
