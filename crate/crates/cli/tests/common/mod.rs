#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use stitchkit_core::{save_image, GrayImage};

/// Concentric ridge pattern resembling a fingerprint core.
pub fn ridge_image(w: u32, h: u32, phase: f64) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| {
        let dx = x as f64 - w as f64 * 0.5;
        let dy = y as f64 - h as f64 * 0.4;
        let r = (dx * dx + 0.6 * dy * dy).sqrt();
        (128.0 + 110.0 * (r * 0.35 + phase).sin()) as u8
    })
    .unwrap()
}

pub fn write_inputs(dir: &Path, specs: &[(&str, u32, u32)]) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, &(name, w, h)) in specs.iter().enumerate() {
        save_image(&ridge_image(w, h, i as f64), dir.join(name)).unwrap();
    }
}

/// Every file under `dir` keyed by relative path.
pub fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap());
        }
    }
    out
}

pub fn stitchkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stitchkit")).args(args).output().expect("binary runs")
}

/// Exhaustive sweep over all midpoint thresholds of the pooled scores.
pub fn sweep_eer(genuine: &[f64], impostor: &[f64]) -> f64 {
    let mut pooled: Vec<f64> = genuine.iter().chain(impostor).copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pooled.dedup();
    let mut thresholds = vec![pooled[0] - 1.0];
    thresholds.extend(pooled.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    thresholds.push(pooled[pooled.len() - 1] + 1.0);
    let points: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            let fnmr = genuine.iter().filter(|&&g| g < t).count() as f64 / genuine.len() as f64;
            let fmr = impostor.iter().filter(|&&i| i >= t).count() as f64 / impostor.len() as f64;
            (fnmr, fmr)
        })
        .collect();
    let k = points.iter().position(|&(a, b)| a >= b).unwrap();
    let (a, b) = (points[k - 1], points[k]);
    if b.0 == b.1 {
        return b.0;
    }
    let t = (a.1 - a.0) / ((b.0 - a.0) - (b.1 - a.1));
    a.0 + t * (b.0 - a.0)
}
