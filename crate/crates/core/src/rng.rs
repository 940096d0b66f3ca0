//! Deterministic sampling for property checks.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter
//! advanced by `0x9E3779B97F4A7C15` and passed through a fixed finalizer.
//! Doubles are drawn as `(next_u64 >> 11) · 2⁻⁵³`, normals by the basic
//! (cosine branch) Box–Muller transform. Any language with 64-bit wrapping
//! integers reproduces the same sample stream from the same seed.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::linalg::{c64, pauli_x, pauli_y, pauli_z, ComplexMatrix};

pub struct Sampler {
    rng: SplitMix64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        // 1 - u keeps the log argument in (0, 1].
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform point in the ball of the given radius, by rejection from the cube.
    pub fn point_in_ball(&mut self, radius: f64) -> [f64; 3] {
        loop {
            let p = [self.symmetric(), self.symmetric(), self.symmetric()];
            if p.iter().map(|x| x * x).sum::<f64>() < 1.0 {
                return p.map(|x| x * radius);
            }
        }
    }

    /// Haar-random unit vector in `C^n`.
    pub fn pure_state(&mut self, n: usize) -> Vec<nalgebra::Complex<f64>> {
        let mut v: Vec<_> = (0..n).map(|_| c64(self.normal(), self.normal())).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= norm;
        }
        v
    }

    /// Qubit density matrix `(I + r·σ)/2` with `r` uniform in the ball of the given radius.
    pub fn qubit_state(&mut self, radius: f64) -> ComplexMatrix {
        let [x, y, z] = self.point_in_ball(radius);
        let m = ComplexMatrix::identity(2);
        let m = &m + &pauli_x().scale(x);
        let m = &m + &pauli_y().scale(y);
        let m = &m + &pauli_z().scale(z);
        m.scale(0.5)
    }

    /// `(1 − w)|ψ⟩⟨ψ| + w I/n` for a Haar-random `|ψ⟩`.
    pub fn mixed_pure_state(&mut self, n: usize, weight: f64) -> ComplexMatrix {
        let psi = self.pure_state(n);
        let proj = ComplexMatrix::from_fn(n, |i, j| psi[i] * psi[j].conj());
        &proj.scale(1.0 - weight) + &ComplexMatrix::identity(n).scale(weight / n as f64)
    }

    /// Traceless Hermitian matrix with entries drawn uniformly from `[-1, 1)`.
    pub fn traceless_hermitian(&mut self, n: usize) -> ComplexMatrix {
        let raw = ComplexMatrix::from_fn(n, |_, _| c64(self.symmetric(), self.symmetric()));
        let h = raw.hermitian_part();
        let shift = h.trace().re / n as f64;
        &h - &ComplexMatrix::identity(n).scale(shift)
    }
}
