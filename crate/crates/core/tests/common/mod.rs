#![allow(dead_code)]

use std::sync::Arc;

use zflab::fock::{FockSpace, FockState, RapidityGrid};
use zflab::kinematics::{ModelParams, ScatteringFunction};
use zflab::C64;

/// Every shipped model, with the sinh-Gordon couplings used throughout.
pub fn all_models() -> Vec<ModelParams> {
    vec![
        ModelParams::free(1.0),
        ModelParams::ising(1.0),
        ModelParams::sinh_gordon(1.0, 0.5).unwrap(),
        ModelParams::sinh_gordon(1.0, 1.0).unwrap(),
        ModelParams::sinh_gordon(1.0, 2.0).unwrap(),
    ]
}

pub fn space(params: ModelParams, half_range: f64, points: usize, n_max: usize) -> Arc<FockSpace> {
    let grid = RapidityGrid::symmetric(half_range, points).unwrap();
    FockSpace::new(grid, n_max, ScatteringFunction::new(params)).unwrap()
}

pub fn rel_diff(a: &FockState, b: &FockState) -> f64 {
    let d = a.sub(b).norm();
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
