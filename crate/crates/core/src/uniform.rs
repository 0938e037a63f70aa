//! The two-sheeted model of the cubic curve.
//!
//! A point `(z, h)` of the three-sheeted surface maps to `(R, Delta)` with
//! `R = z - 1/h` and `Delta^2 = Pi4'(R)^2 - 4 Pi4(R) K2(R)`.

use num_complex::Complex64;

use crate::curve::{merge_split_doubles, CubicCurve};
use crate::error::{Error, Result};
use crate::poly::{CPoly, RootSet, DEFAULT_CLUSTER_TOL};

/// Tolerance for `(z, h)` lying on the cubic.
pub const CURVE_RESIDUAL_TOL: f64 = 1e-9;
/// Branch values below this modulus cannot be inverted.
pub const ZERO_BRANCH_TOL: f64 = 1e-14;
/// Guard radius around zeros of `K2` and `Pi4`, relative to scale.
pub const DENOMINATOR_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct HyperCurve {
    pub curve: CubicCurve,
    /// `3R^2 + 2(c - s1)R - 3d + s2`.
    pub k2: CPoly,
    /// `Pi4'^2 - 4 Pi4 K2`.
    pub delta2: CPoly,
    /// Roots of `delta2` with multiplicity.
    pub eps: RootSet,
    k2_roots: Vec<Complex64>,
    dpi4: CPoly,
    ddpi4: CPoly,
    dk2: CPoly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub z: Complex64,
    pub h: Complex64,
    pub r: Complex64,
    pub delta: Complex64,
}

/// `K2` from the curve parameters.
pub fn k2_of(curve: &CubicCurve) -> CPoly {
    let cfg = &curve.config;
    let (c, d) = (curve.params.c, curve.params.d);
    CPoly::new(vec![
        cfg.s2 - d * 3.0,
        (c - cfg.s1) * 2.0,
        Complex64::new(3.0, 0.0),
    ])
}

/// `Pi4'^2 - 4 Pi4 K2`.
pub fn delta2_of(pi4: &CPoly, k2: &CPoly) -> CPoly {
    let dpi = pi4.derivative();
    &(&dpi * &dpi) - &(pi4 * k2).scale(Complex64::new(4.0, 0.0))
}

pub fn build_hyper(curve: &CubicCurve) -> Result<HyperCurve> {
    HyperCurve::new(curve.clone())
}

impl HyperCurve {
    pub fn new(curve: CubicCurve) -> Result<Self> {
        let k2 = k2_of(&curve);
        let delta2 = delta2_of(&curve.config.pi4, &k2);
        let mut eps = delta2.roots(DEFAULT_CLUSTER_TOL)?;
        merge_split_doubles(&mut eps, &delta2);
        let k2_roots = k2.raw_roots()?;
        let dpi4 = curve.config.pi4.derivative();
        let ddpi4 = dpi4.derivative();
        let dk2 = k2.derivative();
        Ok(HyperCurve {
            curve,
            k2,
            delta2,
            eps,
            k2_roots,
            dpi4,
            ddpi4,
            dk2,
        })
    }

    /// Genus of `Delta^2 = delta2(R)`: half the count of odd-multiplicity
    /// zeros, minus one.
    pub fn genus(&self) -> u8 {
        let odd = self
            .eps
            .roots
            .iter()
            .filter(|r| r.multiplicity % 2 == 1)
            .count();
        (odd / 2).saturating_sub(1) as u8
    }

    /// Double zeros of `delta2`.
    pub fn double_roots(&self) -> Vec<Complex64> {
        self.eps
            .roots
            .iter()
            .filter(|r| r.multiplicity == 2)
            .map(|r| r.value)
            .collect()
    }

    /// `|Delta^2 - delta2(R)|`.
    pub fn ultraelliptic_residual(&self, r: Complex64, delta: Complex64) -> f64 {
        (delta * delta - self.delta2.eval(r)).norm()
    }

    pub fn forward(&self, z: Complex64, h: Complex64) -> Result<SurfacePoint> {
        if h.norm() < ZERO_BRANCH_TOL {
            return Err(Error::ZeroBranch { h });
        }
        let residual = self.curve.residual(z, h);
        if !(residual <= CURVE_RESIDUAL_TOL) {
            return Err(Error::OffCurve { z, h, residual });
        }
        let r = z - h.inv();
        let delta = self.k2.eval(r) * 2.0 / h + self.dpi4.eval(r);
        Ok(SurfacePoint { z, h, r, delta })
    }

    fn check_denominators(&self, r: Complex64) -> Result<()> {
        let guard = DENOMINATOR_GUARD * self.curve.config.scale();
        let near = self
            .k2_roots
            .iter()
            .chain(self.curve.config.points().iter())
            .any(|p| (r - p).norm() <= guard);
        if near {
            return Err(Error::SingularDenominator { r });
        }
        Ok(())
    }

    fn check_on_surface(&self, r: Complex64, delta: Complex64) -> Result<()> {
        let scale = self.delta2.abs_eval(r.norm()) + delta.norm_sqr();
        let residual = self.ultraelliptic_residual(r, delta) / scale.max(f64::MIN_POSITIVE);
        if !(residual <= CURVE_RESIDUAL_TOL) {
            return Err(Error::OffCurve {
                z: r,
                h: delta,
                residual,
            });
        }
        Ok(())
    }

    pub fn inverse(&self, r: Complex64, delta: Complex64) -> Result<SurfacePoint> {
        self.check_on_surface(r, delta)?;
        self.check_denominators(r)?;
        let dpi = self.dpi4.eval(r);
        let z = r + (delta - dpi) / (self.k2.eval(r) * 2.0);
        let h = -(dpi + delta) / (self.curve.config.pi4.eval(r) * 2.0);
        Ok(SurfacePoint { z, h, r, delta })
    }

    /// `h dz / dR` expressed through `(R, Delta)`.
    pub fn hdz_integrand(&self, r: Complex64, delta: Complex64) -> Result<Complex64> {
        self.check_on_surface(r, delta)?;
        self.check_denominators(r)?;
        let k = self.k2.eval(r);
        let dk = self.dk2.eval(r);
        let num = self.dpi4.eval(r) * dk + k * k * 4.0 - k * self.ddpi4.eval(r) * 2.0;
        Ok(num / (k * delta * 2.0) - dk / (k * 2.0))
    }
}

/// A square root of `delta2` continued by proximity along a path: each
/// new value takes the sign nearest the previous one.
#[derive(Debug, Clone)]
pub struct ContinuousSqrt<'a> {
    poly: &'a CPoly,
    last: Complex64,
}

impl<'a> ContinuousSqrt<'a> {
    pub fn new(poly: &'a CPoly, start: Complex64, value: Complex64) -> Self {
        let root = poly.eval(start).sqrt();
        let last = if (root - value).norm() <= (root + value).norm() {
            root
        } else {
            -root
        };
        ContinuousSqrt { poly, last }
    }

    pub fn value(&self) -> Complex64 {
        self.last
    }

    pub fn advance(&mut self, r: Complex64) -> Complex64 {
        let root = self.poly.eval(r).sqrt();
        self.last = if (root - self.last).norm() <= (root + self.last).norm() {
            root
        } else {
            -root
        };
        self.last
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_config, build_curve, CurveParams};

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn worked_hyper() -> HyperCurve {
        let cfg = build_config(r(-1.0), r(-0.375), r(0.375), r(1.0)).unwrap();
        let cur = build_curve(cfg, CurveParams::new(r(0.0), r(-73.0 / 192.0))).unwrap();
        build_hyper(&cur).unwrap()
    }

    #[test]
    fn worked_example_k2_and_delta2() {
        let hc = worked_hyper();
        let k2 = [0.0, 0.0, 3.0];
        for (i, v) in k2.iter().enumerate() {
            assert!((hc.k2.coeff(i) - r(*v)).norm() < 1e-14);
        }
        let expected = [0.0, 0.0, 3601.0 / 1024.0, 0.0, -73.0 / 16.0, 0.0, 4.0];
        for (i, v) in expected.iter().enumerate() {
            assert!((hc.delta2.coeff(i) - r(*v)).norm() < 1e-12, "R^{i}");
        }
        assert_eq!(hc.genus(), 1);
        assert_eq!(hc.double_roots().len(), 1);
        assert!(hc.double_roots()[0].norm() < 1e-12);
    }

    #[test]
    fn forward_on_interval_satisfies_both_residuals() {
        let hc = worked_hyper();
        for x in [0.4, 0.6, 0.9] {
            let z = r(x) + Complex64::new(0.0, 1e-3);
            for h in hc.curve.raw_branches(z, None).unwrap() {
                let p = hc.forward(z, h).unwrap();
                assert!(hc.ultraelliptic_residual(p.r, p.delta) < 1e-9 * (1.0 + p.r.norm().powi(6)));
                let back = hc.inverse(p.r, p.delta).unwrap();
                assert!((back.z - z).norm() < 1e-10 * (1.0 + z.norm()));
                assert!((back.h - h).norm() < 1e-10 * (1.0 + h.norm()));
            }
        }
    }

    #[test]
    fn both_signs_give_cubic_roots() {
        let hc = worked_hyper();
        let rr = Complex64::new(0.3, 0.45);
        let root = hc.delta2.eval(rr).sqrt();
        let p = hc.inverse(rr, root).unwrap();
        let m = hc.inverse(rr, -root).unwrap();
        assert!((p.z - m.z).norm() > 1e-3);
        for q in [p, m] {
            let hs = hc.curve.raw_branches(q.z, None).unwrap();
            assert!(hs.iter().any(|h| (h - q.h).norm() < 1e-10 * (1.0 + q.h.norm())));
            let f = hc.forward(q.z, q.h).unwrap();
            assert!((f.r - rr).norm() < 1e-10 && (f.delta - q.delta).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_branch_and_off_curve_rejected() {
        let hc = worked_hyper();
        assert!(matches!(hc.forward(r(2.0), r(0.0)), Err(Error::ZeroBranch { .. })));
        assert!(matches!(hc.forward(r(2.0), r(5.0)), Err(Error::OffCurve { .. })));
        let d = hc.delta2.eval(r(1.0)).sqrt();
        assert!(matches!(hc.inverse(r(1.0), d), Err(Error::SingularDenominator { .. })));
    }

    #[test]
    fn hdz_matches_finite_difference() {
        let hc = worked_hyper();
        let r0 = Complex64::new(0.7, 0.4);
        let d0 = hc.delta2.eval(r0).sqrt();
        let step = 1e-6;
        let at = |x: Complex64| {
            let s = ContinuousSqrt::new(&hc.delta2, x, d0).value();
            hc.inverse(x, s).unwrap()
        };
        let dz = (at(r0 + step).z - at(r0 - step).z) / (2.0 * step);
        let h = hc.inverse(r0, d0).unwrap().h;
        let hdz = hc.hdz_integrand(r0, d0).unwrap();
        assert!((h * dz - hdz).norm() < 1e-6 * (1.0 + hdz.norm()));
    }

    #[test]
    fn hdz_symmetric_under_reflection() {
        let hc = worked_hyper();
        let y = Complex64::new(0.0, 0.8);
        let d = hc.delta2.eval(y).sqrt();
        // delta2 is even, so (R, Delta) -> (-R, -Delta) preserves the surface
        // and the integrand changes sign like dR.
        let a = hc.hdz_integrand(y, d).unwrap();
        let b = hc.hdz_integrand(-y, -d).unwrap();
        assert!((a + b).norm() < 1e-12 * (1.0 + a.norm()));
    }
}
