mod common;

use common::*;
use rand::RngExt;
use trisheet::hppade::{defect, solve_hp};

#[test]
fn defect_vanishes_for_small_indices() {
    let mut g = rng(71);
    for _ in 0..50 {
        let cfg = config(&mut g);
        let n = (g.random_range(0..4usize), g.random_range(0..4usize));
        let s = solve_hp(cfg.a1 * 0.5, cfg.b1 * 0.5, cfg.a2 * 0.5, cfg.b2 * 0.5, n).unwrap();
        assert!(defect(&s) < 1e-8, "{n:?}: {}", defect(&s));
        assert!(s.denominator.degree().unwrap_or(0) <= n.0 + n.1);
    }
}

#[test]
fn zeros_stay_in_a_disk_of_twice_the_scale() {
    let configs = [
        [r(-2.0), r(1.0), r(-1.0), r(4.0)],
        [r(-1.0), r(1.0), r(-0.375), r(0.5)],
        [r(1.0), r(-1.0), r(0.1), r(-0.1)],
        [c(1.0, 0.25), c(-1.0, 0.25), c(-1.0, -0.25), c(1.0, -0.25)],
    ];
    for p in configs {
        let center = (p[0] + p[1] + p[2] + p[3]) / 4.0;
        let cfg = trisheet::build_config(p[0], p[1], p[2], p[3]).unwrap();
        for n in [(2, 2), (5, 3), (10, 10), (20, 20)] {
            let s = solve_hp(p[0], p[1], p[2], p[3], n).unwrap();
            for z in s.zeros.values() {
                assert!((z - center).norm() <= 2.0 * cfg.scale(), "{p:?} {n:?}: {z}");
            }
        }
    }
}

#[test]
fn overlapping_case_is_normal_with_full_degree() {
    let s = solve_hp(r(-2.0), r(1.0), r(-1.0), r(4.0), (20, 20)).unwrap();
    assert!(s.is_normal());
    assert_eq!(s.denominator.degree(), Some(40));
    assert_eq!(s.zeros.total_multiplicity(), 40);
    assert!((s.denominator.leading() - r(1.0)).norm() < 1e-12);
    for z in s.zeros.values() {
        assert!(z.re > -2.0 - 1e-9 && z.re < 4.0 + 1e-9, "{z}");
    }
}

#[test]
fn index_limit_enforced() {
    assert!(solve_hp(r(-2.0), r(1.0), r(-1.0), r(4.0), (21, 20)).is_err());
}
