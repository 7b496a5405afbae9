#![cfg(feature = "gfunction")]

use rabi_core::gfunction::{g_pm, g_spectrum, Parity};
use rabi_core::{find_spectrum, RabiModel, RabiParams, ScanConfig};

const REFERENCE_ZEROS: [f64; 5] = [-0.217805, 6.29563e-2, 0.86095, 1.1636, 1.85076];

fn model() -> RabiModel {
    RabiModel::new(RabiParams::new(0.7, 0.4, 1.0).unwrap()).unwrap()
}

#[test]
fn every_reference_zero_belongs_to_one_parity() {
    let m = model();
    let cfg = ScanConfig::new(&m.params, -0.5, 2.0);
    let plus = g_spectrum(&m, &cfg, Parity::Plus).unwrap().xs();
    let minus = g_spectrum(&m, &cfg, Parity::Minus).unwrap().xs();
    for z in REFERENCE_ZEROS {
        let near = |xs: &[f64]| xs.iter().any(|x| (x - z).abs() < 1e-4);
        assert!(near(&plus) ^ near(&minus), "{z}");
    }
}

#[test]
fn parity_sectors_are_disjoint() {
    let m = model();
    let cfg = ScanConfig::new(&m.params, -0.5, 4.0);
    let plus = g_spectrum(&m, &cfg, Parity::Plus).unwrap().xs();
    let minus = g_spectrum(&m, &cfg, Parity::Minus).unwrap().xs();
    for p in &plus {
        for q in &minus {
            assert!((p - q).abs() > 1e-4, "{p} and {q}");
        }
    }
}

#[test]
fn union_matches_f0_on_a_wider_window() {
    let m = model();
    let cfg = ScanConfig::new(&m.params, -0.5, 4.0);
    let mut union = g_spectrum(&m, &cfg, Parity::Plus).unwrap().xs();
    union.extend(g_spectrum(&m, &cfg, Parity::Minus).unwrap().xs());
    union.sort_by(f64::total_cmp);
    let f0 = find_spectrum(&m.params, &cfg).unwrap();
    assert_eq!(f0.method, "F0");
    let f0 = f0.xs();
    assert_eq!(union.len(), f0.len());
    for (a, b) in union.iter().zip(&f0) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn plus_only_window() {
    // 0.0629563 and 1.1636 are G+ zeros; the window around the first holds no G- zero
    let m = model();
    let cfg = ScanConfig::new(&m.params, 0.02, 0.1);
    let plus = g_spectrum(&m, &cfg, Parity::Plus).unwrap();
    let minus = g_spectrum(&m, &cfg, Parity::Minus).unwrap();
    assert_eq!(plus.xs().len(), 1);
    assert_eq!(plus.method, "Gpm");
    assert!(minus.zeros.is_empty());
}

#[test]
fn g_vanishes_at_f0_zeros() {
    let m = model();
    let cfg = ScanConfig::new(&m.params, -0.5, 2.0);
    for z in find_spectrum(&m.params, &cfg).unwrap().zeros {
        let p = g_pm(&m, Parity::Plus, z.x, 64).unwrap().value;
        let q = g_pm(&m, Parity::Minus, z.x, 64).unwrap().value;
        assert!(
            p.abs().min(q.abs()) < 1e-8,
            "x = {}: G+ = {p}, G- = {q}",
            z.x
        );
    }
}
