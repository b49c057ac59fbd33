#![allow(dead_code)]

use std::f64::consts::PI;

use wavewell::dynamics::{initial_state, InitialShape};
use wavewell::field::{CoefficientField, Diffusivity, DomainGrid, TimeCoefficient};
use wavewell::model::Exponents;
use wavewell::{Model, State};

pub fn unit_mu() -> TimeCoefficient<f64> {
    TimeCoefficient::Constant { value: 1.0 }
}

/// `μ(t) = 1 + e^{-t}`.
pub fn decaying_mu() -> TimeCoefficient<f64> {
    TimeCoefficient::ExpDecay {
        mu_inf: 1.0,
        mu_init: 2.0,
        kappa: 1.0,
    }
}

pub fn unit_a() -> Diffusivity<f64> {
    Diffusivity::Constant { value: 1.0 }
}

pub fn model_with(modes: usize, q: f64, p: f64, a: Diffusivity<f64>, mu: TimeCoefficient<f64>) -> Model {
    let grid = DomainGrid::new(PI, modes).unwrap();
    let coeff = CoefficientField::new(a, mu, &grid, 100.0).unwrap();
    Model::new(grid, coeff, Exponents::new(q, p).unwrap()).unwrap()
}

pub fn model(modes: usize, q: f64, p: f64) -> Model {
    model_with(modes, q, p, unit_a(), unit_mu())
}

pub fn mode_state(m: &Model, index: usize, amplitude: f64, velocity: InitialShape<f64>) -> State {
    initial_state(m.grid(), &InitialShape::Mode { index, amplitude }, &velocity).unwrap()
}

pub fn unit(k: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; k];
    e[j] = 1.0;
    e
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
