//! The normalized DFT `[F_N f]_τ = N^{-1/2} Σ_t f_t e^{2πiτt/N}` and its norms.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// Bins `τ = 0, …, N−1` of `F_N v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn inf_norm(&self) -> f64 {
        self.bins.iter().fold(0.0, |m, b| m.max(b.norm()))
    }

    pub fn l1_norm(&self) -> f64 {
        self.bins.iter().map(|b| b.norm()).sum()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.norm()).collect()
    }
}

/// In-place `F_N` (positive exponent, unitary scaling).
pub fn forward_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    if n == 0 {
        return;
    }
    plan(n, FftDirection::Inverse).process(buf);
    let s = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|b| *b *= s);
}

/// In-place `F_N^H = F_N^{-1}`.
pub fn adjoint_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    if n == 0 {
        return;
    }
    plan(n, FftDirection::Forward).process(buf);
    let s = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|b| *b *= s);
}

pub fn dft(v: &[f64]) -> Spectrum {
    let mut bins: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward_in_place(&mut bins);
    Spectrum { bins }
}

pub fn dft_complex(v: &[Complex64]) -> Spectrum {
    let mut bins = v.to_vec();
    forward_in_place(&mut bins);
    Spectrum { bins }
}

pub fn spectral_inf_norm(v: &[f64]) -> f64 {
    dft(v).inf_norm()
}

pub fn spectral_l1_norm(v: &[f64]) -> f64 {
    dft(v).l1_norm()
}

/// Discrete autoconvolution `h_t = Σ_s g_s g_{t−s}` of a real sequence.
pub fn autoconvolution(g: &[f64]) -> Vec<f64> {
    if g.is_empty() {
        return Vec::new();
    }
    let mut h = vec![0.0; 2 * g.len() - 1];
    for (i, a) in g.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            h[i + j] += a * b;
        }
    }
    h
}
