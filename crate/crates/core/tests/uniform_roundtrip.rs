mod common;

use common::*;
use trisheet::{build_curve, build_hyper, Complex64, HyperCurve};

/// Samples keep this distance (relative to scale) from every point where
/// the maps or their inverses have a vanishing denominator.
const KEEP_OUT: f64 = 1e-2;

fn denominators(hc: &HyperCurve) -> Vec<Complex64> {
    let mut pts = hc.k2.raw_roots().unwrap();
    pts.extend(hc.curve.config.points());
    pts
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-10 * (1.0 + a.norm().max(b.norm()))
}

#[test]
fn forward_then_inverse_is_identity() {
    let mut g = rng(11);
    let mut checked = 0;
    while checked < 1200 {
        let cfg = config(&mut g);
        let Ok(cur) = build_curve(cfg, params(&mut g)) else { continue };
        let hc = build_hyper(&cur).unwrap();
        let scale = cur.config.scale();
        let z = point(&mut g, 3.0);
        if distance(&cur.singular_points(), z) < KEEP_OUT * scale {
            continue;
        }
        let dens = denominators(&hc);
        for h in cur.raw_branches(z, None).unwrap() {
            let sp = hc.forward(z, h).unwrap();
            if distance(&dens, sp.r) < KEEP_OUT * scale {
                continue;
            }
            let back = hc.inverse(sp.r, sp.delta).unwrap();
            assert!(close(back.z, z) && close(back.h, h), "{z} {h} -> {back:?}");
            let bound = 1e-9 * (1.0 + sp.r.norm().powi(6));
            assert!(hc.ultraelliptic_residual(sp.r, sp.delta) < bound);
            checked += 1;
        }
    }
}

#[test]
fn inverse_then_forward_is_identity() {
    let mut g = rng(12);
    let mut checked = 0;
    while checked < 1200 {
        let cfg = config(&mut g);
        let Ok(cur) = build_curve(cfg, params(&mut g)) else { continue };
        let hc = build_hyper(&cur).unwrap();
        let scale = cur.config.scale();
        let r = point(&mut g, 3.0);
        if distance(&denominators(&hc), r) < KEEP_OUT * scale {
            continue;
        }
        let delta0 = hc.delta2.eval(r).sqrt();
        for delta in [delta0, -delta0] {
            let p = hc.inverse(r, delta).unwrap();
            if p.h.norm() < 1e-8 || distance(&cur.singular_points(), p.z) < KEEP_OUT * scale {
                continue;
            }
            let fwd = hc.forward(p.z, p.h).unwrap();
            assert!(close(fwd.r, r) && close(fwd.delta, delta), "{r} {delta} -> {fwd:?}");
            checked += 1;
        }
    }
}

#[test]
fn forward_rejects_points_off_the_curve() {
    let mut g = rng(13);
    let cur = build_curve(config(&mut g), params(&mut g)).unwrap();
    let hc = build_hyper(&cur).unwrap();
    let z = r(2.7);
    let h = cur.raw_branches(z, None).unwrap()[0];
    assert!(hc.forward(z, h * 1.01).is_err());
    assert!(hc.forward(z, r(0.0)).is_err());
}
