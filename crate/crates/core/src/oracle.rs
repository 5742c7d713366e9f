//! Exact amplitude-level predictions for the optics devices.
//!
//! Complex numbers are handled by a small local type; the oracle has no
//! dependencies so it can be ported verbatim.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
    pub const ONE: Complex = Complex { re: 1.0, im: 0.0 };
    pub const I: Complex = Complex { re: 0.0, im: 1.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    /// `r·e^{iθ}`
    pub fn from_polar(r: f64, theta: f64) -> Self {
        Complex::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(self, k: f64) -> Self {
        Complex::new(self.re * k, self.im * k)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// Two-mode amplitudes `(a₀, a₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub a0: Complex,
    pub a1: Complex,
}

impl Amplitudes {
    pub fn new(a0: Complex, a1: Complex) -> Self {
        Amplitudes { a0, a1 }
    }

    /// Real polarization amplitudes `(cos ψ, sin ψ)`.
    pub fn polarization(psi: f64) -> Self {
        Amplitudes::new(Complex::new(psi.cos(), 0.0), Complex::new(psi.sin(), 0.0))
    }

    /// Photon entering port 0 with probability `p0` and phase `ψ₀`, port 1
    /// otherwise with phase `ψ₁`: `(√p₀ e^{iψ₀}, √(1−p₀) e^{iψ₁})`.
    pub fn two_port(p0: f64, psi0: f64, psi1: f64) -> Self {
        Amplitudes::new(
            Complex::from_polar(p0.max(0.0).sqrt(), psi0),
            Complex::from_polar((1.0 - p0).max(0.0).sqrt(), psi1),
        )
    }

    /// `(|a₀|², |a₁|²)`
    pub fn probabilities(&self) -> [f64; 2] {
        [self.a0.norm_sqr(), self.a1.norm_sqr()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    fn apply(self, m: [[Complex; 2]; 2]) -> Self {
        Amplitudes::new(
            m[0][0] * self.a0 + m[0][1] * self.a1,
            m[1][0] * self.a0 + m[1][1] * self.a1,
        )
    }
}

/// Intensities `(cos²(ψ−φ), sin²(ψ−φ))` behind a polarizer at angle `φ`.
pub fn malus_intensity(psi: f64, phi: f64) -> (f64, f64) {
    let d = psi - phi;
    (d.cos().powi(2), d.sin().powi(2))
}

/// Polarizer action `[[cos φ, sin φ], [−sin φ, cos φ]]`.
pub fn polarizer_rotation(a: Amplitudes, phi: f64) -> Amplitudes {
    let (c, s) = (Complex::new(phi.cos(), 0.0), Complex::new(phi.sin(), 0.0));
    a.apply([[c, s], [Complex::ZERO - s, c]])
}

/// The unnormalized beam-splitter matrix `[[1, i], [i, 1]]`.
const H: [[Complex; 2]; 2] = [[Complex::ONE, Complex::I], [Complex::I, Complex::ONE]];

fn phase_shift(a: Amplitudes, phi0: f64, phi1: f64) -> Amplitudes {
    Amplitudes::new(
        Complex::from_polar(1.0, phi0) * a.a0,
        Complex::from_polar(1.0, phi1) * a.a1,
    )
}

fn scale(a: Amplitudes, k: f64) -> Amplitudes {
    Amplitudes::new(a.a0.scale(k), a.a1.scale(k))
}

/// Beam splitter: `b = (1/√2)[[1, i], [i, 1]]·a`.
pub fn bs_amplitudes(a: Amplitudes) -> Amplitudes {
    scale(a.apply(H), FRAC_1_SQRT_2)
}

/// Mach-Zehnder interferometer: `b = ½ H D(φ₀, φ₁) H a`. Output mode 0 is the
/// port tallied as `N₂` by the simulated network, mode 1 as `N₃`.
pub fn mz_amplitudes(a: Amplitudes, phi0: f64, phi1: f64) -> Amplitudes {
    scale(phase_shift(a.apply(H), phi0, phi1).apply(H), 0.5)
}

/// Two chained interferometers: `b = (1/2√2) H D(φ₂, φ₃) H D(φ₀, φ₁) H a`.
/// Output mode 0 is the port tallied as `N₄`.
pub fn chained_mz_amplitudes(a: Amplitudes, phi: [f64; 4]) -> Amplitudes {
    let stage1 = phase_shift(a.apply(H), phi[0], phi[1]);
    let stage2 = phase_shift(stage1.apply(H), phi[2], phi[3]);
    scale(stage2.apply(H), 0.5 * FRAC_1_SQRT_2)
}
