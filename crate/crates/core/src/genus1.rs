//! Genus-one curves: the one-parameter family with a double zero of
//! `Delta^2` at a chosen `R0`, and the closed forms for symmetric input.

use num_complex::Complex64;

use crate::curve::{build_config, build_curve, BranchConfig, CurveParams};
use crate::error::{Error, Result};
use crate::poly::CPoly;

/// Values of `Pi4` below this (relative to `1 + |R0|^4`) are treated as a
/// zero of `Pi4`.
const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Genus1Params {
    pub r0: Complex64,
    /// `2 (c - s1)`.
    pub c1: Complex64,
    /// `s2 - 3 d`.
    pub c2: Complex64,
    pub params: CurveParams,
    /// Genus of the resulting curve; 1 generically, 0 for special `R0`.
    pub genus: u8,
}

struct Pi4At {
    p: Complex64,
    dp: Complex64,
    ddp: Complex64,
}

fn pi4_at(config: &BranchConfig, r0: Complex64) -> Result<Pi4At> {
    let p = config.pi4.eval(r0);
    if p.norm() <= POLE_TOL * (1.0 + r0.norm().powi(4)) {
        return Err(Error::PoleAtR0 { r0 });
    }
    let dpi = config.pi4.derivative();
    Ok(Pi4At {
        p,
        dp: dpi.eval(r0),
        ddp: dpi.derivative().eval(r0),
    })
}

/// `(c, d)` for which `Delta^2` has a double zero at `R0`.
pub fn params_from_r0(config: &BranchConfig, r0: Complex64) -> Result<Genus1Params> {
    let Pi4At { p, dp, ddp } = pi4_at(config, r0)?;
    let p2 = p * p;
    let dp3 = dp * dp * dp;
    let denom = p2 * 16.0;
    let c1 = (p * dp * ddp * 8.0 - r0 * p2 * 96.0 - dp3 * 4.0) / denom;
    let c2 = (-r0 * p * dp * ddp * 8.0 + r0 * r0 * p2 * 48.0 + dp3 * r0 * 4.0 + dp * dp * p * 4.0)
        / denom;
    let params = CurveParams::new(config.s1 + c1 / 2.0, (config.s2 - c2) / 3.0);
    let genus = build_curve(config.clone(), params)?.genus;
    Ok(Genus1Params {
        r0,
        c1,
        c2,
        params,
        genus,
    })
}

/// `K2` in the form centred at `R0`:
/// `3 (R-R0)^2 + (R-R0) (2 p p' p'' - p'^3) / (4 p^2) + p'^2 / (4 p)`
/// with `p = Pi4(R0)`.
pub fn k2_centered(config: &BranchConfig, r0: Complex64) -> Result<CPoly> {
    let Pi4At { p, dp, ddp } = pi4_at(config, r0)?;
    let lin = (p * dp * ddp * 2.0 - dp * dp * dp) / (p * p * 4.0);
    let cst = dp * dp / (p * 4.0);
    let shift = CPoly::new(vec![-r0, Complex64::new(1.0, 0.0)]);
    let quad = (&shift * &shift).scale(Complex64::new(3.0, 0.0));
    Ok(&(&quad + &shift.scale(lin)) + &CPoly::constant(cst))
}

/// `P1 = Pi4'''/6 - K2'/2` and `P2 = Pi4''/6 - K2/3`.
pub fn p1_p2_from_k2(config: &BranchConfig, k2: &CPoly) -> (CPoly, CPoly) {
    let d2 = config.pi4.nth_derivative(2);
    let d3 = d2.derivative();
    let sixth = Complex64::new(1.0 / 6.0, 0.0);
    let p1 = &d3.scale(sixth) - &k2.derivative().scale(Complex64::new(0.5, 0.0));
    let p2 = &d2.scale(sixth) - &k2.scale(Complex64::new(1.0 / 3.0, 0.0));
    (p1, p2)
}

/// The configuration `{a, -a, b, -b}` with `a1 = a, b1 = -a, a2 = b, b2 = -b`.
pub fn symmetric_config(a: Complex64, b: Complex64) -> Result<BranchConfig> {
    build_config(a, -a, b, -b)
}

/// `c = 0`, `d = -(a^2 + b^2)/3`: the choice that pushes the double zero of
/// the reduced discriminant to infinity.
pub fn symmetric_params(a: Complex64, b: Complex64) -> Result<CurveParams> {
    symmetric_config(a, b)?;
    Ok(CurveParams::new(
        Complex64::new(0.0, 0.0),
        -(a * a + b * b) / 3.0,
    ))
}

/// `±(a^2 + b^2)^2 / (3 sqrt(a^6 + b^6))`, principal square root.
pub fn soft_edges_symmetric(a: Complex64, b: Complex64) -> Result<(Complex64, Complex64)> {
    let a6 = a.powu(6);
    let b6 = b.powu(6);
    let s = a6 + b6;
    if s.norm() <= 1e-14 * (a6.norm() + b6.norm()) {
        return Err(Error::DegenerateInput("a^6 + b^6 vanishes".into()));
    }
    let sum = a * a + b * b;
    let e = sum * sum / (s.sqrt() * 3.0);
    Ok((e, -e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uniform::{build_hyper, k2_of};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(x: f64) -> Complex64 {
        c(x, 0.0)
    }

    #[test]
    fn symmetric_d_values() {
        let cases = [
            (r(1.0), r(0.1), r(-101.0 / 300.0)),
            (r(1.0), r(0.45), r(-0.400833)),
            (c(1.0, 0.25), c(-1.0, 0.25), r(-0.625)),
            (c(1.0, 0.25), c(-0.9, 0.15), c(-0.575, -0.076666)),
        ];
        for (a, b, d) in cases {
            let p = symmetric_params(a, b).unwrap();
            assert_eq!(p.c, r(0.0));
            assert!((p.d - d).norm() < 1e-5, "{a} {b}: {}", p.d);
        }
    }

    #[test]
    fn symmetric_params_reject_coincidence() {
        assert!(symmetric_params(r(1.0), r(-1.0)).is_err());
        assert!(symmetric_params(r(0.0), r(1.0)).is_err());
    }

    #[test]
    fn soft_edges_match_discriminant_roots() {
        let (a, b) = (r(1.0), r(0.375));
        let (e, f) = soft_edges_symmetric(a, b).unwrap();
        let cur = build_curve(symmetric_config(a, b).unwrap(), symmetric_params(a, b).unwrap()).unwrap();
        let soft = cur.soft_points.values();
        assert_eq!(soft.len(), 2);
        for x in [e, f] {
            assert!(soft.iter().any(|s| (s - x).norm() < 1e-12), "{x} not in {soft:?}");
        }
    }

    #[test]
    fn soft_edges_degenerate_and_limit() {
        assert!(soft_edges_symmetric(r(1.0), c(0.0, 1.0)).is_err());
        let (e, f) = soft_edges_symmetric(r(1.0), r(1e-6)).unwrap();
        assert!((e - r(1.0 / 3.0)).norm() < 1e-11 && (f + r(1.0 / 3.0)).norm() < 1e-11);
    }

    #[test]
    fn symmetric_curve_sits_at_r0_zero() {
        // For even Pi4 the double zero of Delta^2 is at R = 0; large R0
        // sends c and d to infinity instead.
        let (a, b) = (r(1.0), r(0.375));
        let cfg = symmetric_config(a, b).unwrap();
        let sym = symmetric_params(a, b).unwrap();
        let g = params_from_r0(&cfg, r(0.0)).unwrap();
        assert!((g.params.c - sym.c).norm() < 1e-15);
        assert!((g.params.d - sym.d).norm() < 1e-15);
        let near = params_from_r0(&cfg, r(1e-6)).unwrap();
        assert!((near.params.d - sym.d).norm() < 1e-4);
        let far = params_from_r0(&cfg, r(1e6)).unwrap();
        assert!((far.params.c - r(1e6)).norm() < 1.0);
    }

    #[test]
    fn double_zero_at_r0() {
        let cfg = build_config(r(-1.0), r(1.0), r(-0.375), r(0.5)).unwrap();
        let g = params_from_r0(&cfg, r(0.0775)).unwrap();
        let hc = build_hyper(&build_curve(cfg, g.params).unwrap()).unwrap();
        let bound = 1e-9 * (1.0 + 0.0775f64.powi(6));
        assert!(hc.delta2.eval(g.r0).norm() < bound);
        assert!(hc.delta2.derivative().eval(g.r0).norm() < bound);
        assert_eq!(g.genus, 1);
    }

    #[test]
    fn linear_system_agrees_with_closed_form() {
        let cfg = build_config(c(-1.3, 0.2), r(0.8), c(-0.2, -0.6), c(1.7, 0.4)).unwrap();
        let r0 = c(0.31, -0.27);
        let g = params_from_r0(&cfg, r0).unwrap();
        let dpi = cfg.pi4.derivative();
        let (p, dp, ddp) = (cfg.pi4.eval(r0), dpi.eval(r0), dpi.derivative().eval(r0));
        // delta2(R0) = 0 and delta2'(R0) = 0 are linear in (c1, c2).
        let (m11, m12, v1) = (p * r0 * 4.0, p * 4.0, dp * dp - p * r0 * r0 * 12.0);
        let (m21, m22) = (dp * r0 * 4.0 + p * 4.0, dp * 4.0);
        let v2 = dp * ddp * 2.0 - dp * r0 * r0 * 12.0 - p * r0 * 24.0;
        let det = m11 * m22 - m12 * m21;
        let c1 = (v1 * m22 - m12 * v2) / det;
        let c2 = (m11 * v2 - v1 * m21) / det;
        assert!((c1 - g.c1).norm() < 1e-10 * (1.0 + c1.norm()));
        assert!((c2 - g.c2).norm() < 1e-10 * (1.0 + c2.norm()));
    }

    #[test]
    fn centered_k2_and_p_formulas_agree() {
        let cfg = build_config(c(-1.3, 0.2), r(0.8), c(-0.2, -0.6), c(1.7, 0.4)).unwrap();
        let r0 = c(0.31, -0.27);
        let g = params_from_r0(&cfg, r0).unwrap();
        let cur = build_curve(cfg.clone(), g.params).unwrap();
        let k2 = k2_of(&cur);
        let centered = k2_centered(&cfg, r0).unwrap();
        for i in 0..3 {
            assert!((k2.coeff(i) - centered.coeff(i)).norm() < 1e-10 * (1.0 + k2.coeff(i).norm()));
        }
        let (p1, p2) = p1_p2_from_k2(&cfg, &k2);
        for i in 0..3 {
            assert!((p1.coeff(i) - cur.p1.coeff(i)).norm() < 1e-10);
            assert!((p2.coeff(i) - cur.p2.coeff(i)).norm() < 1e-10);
        }
    }

    #[test]
    fn r0_on_branch_point_is_a_pole() {
        let cfg = build_config(r(-1.0), r(1.0), r(-0.375), r(0.5)).unwrap();
        assert!(matches!(params_from_r0(&cfg, r(0.5)), Err(Error::PoleAtR0 { .. })));
    }
}
