//! The period condition for genus-one curves with real branch points.
//!
//! On the real `R` line the Abelian integral reduces to
//! `J(R) = -Delta(R) / (2 Pi4(R))` with
//! `Delta(R) = (R - R0) sqrt(Delta^2(R) / (R - R0)^2)`, the square root
//! continued along `R + i0` and positive at `+inf`. Subtracting the
//! rational function `Reg` removes the poles at the edges and the `1/R`
//! tail, leaving an absolutely integrable function.

use num_complex::Complex64;

use crate::curve::{build_curve, BranchConfig};
use crate::error::{Error, Result};
use crate::genus1::{params_from_r0, Genus1Params};
use crate::poly::{CPoly, DEFAULT_CLUSTER_TOL};
use crate::quad::{gk15, integrate};
use crate::uniform::{delta2_of, k2_of, ContinuousSqrt};

/// Default absolute error target for `Re I`.
pub const DEFAULT_QUAD_TOL: f64 = 1e-6;
/// Pole guard around real branch points.
pub const POLE_GUARD: f64 = 1e-9;
const MAX_PIECES: usize = 20_000;
const RESIDUE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodResult {
    pub re_i: f64,
    pub quadrature_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodOptions {
    /// Absolute error target.
    pub tol: f64,
    pub max_pieces: usize,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            tol: DEFAULT_QUAD_TOL,
            max_pieces: MAX_PIECES,
        }
    }
}

fn real_edges(config: &BranchConfig) -> Result<[f64; 4]> {
    let pts = config.points();
    let tol = 1e-14 * (1.0 + config.max_modulus());
    if pts.iter().any(|p| p.im.abs() > tol) {
        return Err(Error::DegenerateInput(
            "the real-line period needs real branch points".into(),
        ));
    }
    Ok([pts[0].re, pts[1].re, pts[2].re, pts[3].re])
}

fn real_r0(g: &Genus1Params) -> Result<f64> {
    if g.r0.im.abs() > 1e-14 * (1.0 + g.r0.re.abs()) {
        return Err(Error::DegenerateInput(
            "the real-line period needs a real R0".into(),
        ));
    }
    Ok(g.r0.re)
}

fn check_pole(r: f64, edges: &[f64]) -> Result<()> {
    for &e in edges {
        let distance = (r - e).abs();
        if distance <= POLE_GUARD {
            return Err(Error::NearPole {
                r,
                pole: e,
                distance,
            });
        }
    }
    Ok(())
}

/// `J` on the real line with the branch of `Delta` fixed once.
#[derive(Debug, Clone)]
struct RealLineJ {
    pi4: CPoly,
    r0: f64,
    /// Roots of `Delta^2 / (R - R0)^2`.
    q_roots: Vec<Complex64>,
    edges: [f64; 4],
}

impl RealLineJ {
    fn new(config: &BranchConfig, g: &Genus1Params) -> Result<Self> {
        let edges = real_edges(config)?;
        let r0 = real_r0(g)?;
        let curve = build_curve(config.clone(), g.params)?;
        let delta2 = delta2_of(&config.pi4, &k2_of(&curve));
        let square = CPoly::from_real(&[r0 * r0, -2.0 * r0, 1.0]);
        let (q, _) = delta2.div_rem(&square)?;
        let q_roots = q.roots(DEFAULT_CLUSTER_TOL)?.roots.iter().flat_map(|r| {
            std::iter::repeat_n(r.value, r.multiplicity)
        }).collect();
        Ok(RealLineJ {
            pi4: config.pi4.clone(),
            r0,
            q_roots,
            edges,
        })
    }

    /// `Delta(R)`; each factor `sqrt(R - q_k)` is principal, which is the
    /// boundary value from the upper half plane and positive at `+inf`.
    fn delta(&self, r: f64) -> Complex64 {
        let x = Complex64::new(r, 0.0);
        let prod = self
            .q_roots
            .iter()
            .fold(Complex64::new(2.0, 0.0), |acc, q| acc * (x - q).sqrt());
        prod * (r - self.r0)
    }

    fn j(&self, r: f64) -> Complex64 {
        -self.delta(r) / (self.pi4.eval(Complex64::new(r, 0.0)) * 2.0)
    }

    /// Real roots of `q`, where `Delta` has square-root branching.
    fn real_q_roots(&self) -> Vec<f64> {
        self.q_roots
            .iter()
            .filter(|q| q.im.abs() <= 1e-9 * (1.0 + q.re.abs()))
            .map(|q| q.re)
            .collect()
    }

    /// The residue of `J` at each edge must be `-1/2` on the first interval
    /// and `+1/2` on the second.
    fn check_residues(&self) -> Result<()> {
        let dpi = self.pi4.derivative();
        for (i, &e) in self.edges.iter().enumerate() {
            let expected = if i < 2 { -0.5 } else { 0.5 };
            let found = -self.delta(e) / (dpi.eval(Complex64::new(e, 0.0)) * 2.0);
            if (found - expected).norm() > RESIDUE_TOL {
                return Err(Error::ContourMismatch {
                    edge: e,
                    found: found.re,
                    expected,
                });
            }
        }
        Ok(())
    }
}

fn reg_unchecked(edges: &[f64; 4], r: f64) -> f64 {
    let [a1, b1, a2, b2] = *edges;
    0.5 / (r - a2) + 0.5 / (r - b2) - 0.5 / (r - a1) - 0.5 / (r - b1) - r / (r * r + 1.0)
}

/// `J(R)` at a real `R`.
pub fn integrand_j(config: &BranchConfig, g: &Genus1Params, r: f64) -> Result<Complex64> {
    let edges = real_edges(config)?;
    check_pole(r, &edges)?;
    Ok(RealLineJ::new(config, g)?.j(r))
}

/// The regularizer: simple poles of residue `∓1/2` at the edges and a
/// `-1/R` tail, odd part `-R/(R^2+1)` integrating to zero.
pub fn regularizer(config: &BranchConfig, r: f64) -> Result<f64> {
    let edges = real_edges(config)?;
    check_pole(r, &edges)?;
    Ok(reg_unchecked(&edges, r))
}

pub fn re_i(config: &BranchConfig, g: &Genus1Params) -> Result<PeriodResult> {
    re_i_with(config, g, PeriodOptions::default())
}

/// `Re ∫ (J - Reg) dR` over the real line, folded onto `[0, inf)` and with
/// the tail `[M, inf)` mapped to `t = M/R` in `(0, 1]`.
pub fn re_i_with(config: &BranchConfig, g: &Genus1Params, opts: PeriodOptions) -> Result<PeriodResult> {
    let line = RealLineJ::new(config, g)?;
    line.check_residues()?;
    let edges = line.edges;
    let f = |r: f64| line.j(r).re - reg_unchecked(&edges, r);
    let folded = |r: f64| f(r) + f(-r);

    let mut marks: Vec<f64> = edges.iter().map(|e| e.abs()).collect();
    marks.push(line.r0.abs());
    marks.extend(line.real_q_roots().iter().map(|q| q.abs()));
    let m = 10.0 * (1.0 + marks.iter().fold(0.0f64, |a, &b| a.max(b)));
    let mut breaks = vec![0.0];
    breaks.extend(marks.iter().copied().filter(|&x| x > 0.0 && x < m));
    breaks.push(m);
    breaks.push(m + 1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));

    let integrand = |x: f64| {
        let v = if x <= m {
            folded(x)
        } else {
            let t = m + 1.0 - x;
            let r = m / t;
            folded(r) * m / (t * t)
        };
        Complex64::new(v, 0.0)
    };
    let res = integrate(integrand, &breaks, opts.tol, opts.max_pieces)?;
    Ok(PeriodResult {
        re_i: res.value.re,
        quadrature_error: res.error,
        evaluations: res.evaluations,
    })
}

fn re_i_at(config: &BranchConfig, r0: f64, opts: PeriodOptions) -> Result<(Genus1Params, f64)> {
    let g = params_from_r0(config, Complex64::new(r0, 0.0))?;
    let v = re_i_with(config, &g, opts)?.re_i;
    Ok((g, v))
}

/// Real `R0` in `bracket` with `|Re I| < tol`, by Illinois-modified regula
/// falsi with a bisection fallback.
pub fn solve_r0(config: &BranchConfig, bracket: (f64, f64), tol: f64) -> Result<Genus1Params> {
    if !(tol > 0.0) || !(bracket.0 < bracket.1) {
        return Err(Error::DegenerateInput("need tol > 0 and lo < hi".into()));
    }
    let opts = PeriodOptions {
        tol: (tol * 0.25).min(DEFAULT_QUAD_TOL),
        ..PeriodOptions::default()
    };
    let (mut lo, mut hi) = bracket;
    let (g_lo, mut f_lo) = re_i_at(config, lo, opts)?;
    let (g_hi, mut f_hi) = re_i_at(config, hi, opts)?;
    if f_lo.abs() < tol {
        return Ok(g_lo);
    }
    if f_hi.abs() < tol {
        return Ok(g_hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    let mut side = 0i8;
    let mut best = (f64::INFINITY, g_lo);
    for iter in 0..200 {
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let x = if iter % 4 == 3 || !(secant > lo && secant < hi) {
            0.5 * (lo + hi)
        } else {
            secant
        };
        let (g, fx) = re_i_at(config, x, opts)?;
        if fx.abs() < best.0 {
            best = (fx.abs(), g.clone());
        }
        if fx.abs() < tol {
            return Ok(g);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + hi.abs()) {
            break;
        }
    }
    Err(Error::QuadratureFailure {
        estimate: best.0,
        target: tol,
    })
}

/// Sub-brackets of `[lo, hi]` on which `Re I` changes sign, from a uniform
/// sweep of `samples + 1` points. Points where the period cannot be
/// evaluated are skipped.
pub fn sign_change_brackets(config: &BranchConfig, lo: f64, hi: f64, samples: usize) -> Vec<(f64, f64)> {
    let n = samples.max(1);
    let vals: Vec<(f64, Option<f64>)> = (0..=n)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / n as f64;
            (x, re_i_at(config, x, PeriodOptions::default()).ok().map(|v| v.1))
        })
        .collect();
    vals.windows(2)
        .filter_map(|w| match (w[0].1, w[1].1) {
            (Some(a), Some(b)) if a.signum() != b.signum() => Some((w[0].0, w[1].0)),
            _ => None,
        })
        .collect()
}

/// `∮ J dR` along a closed polyline in the `R` plane, with `Delta` continued
/// along the path from the principal root at its first vertex.
///
/// Experimental: used only by [`solve_r0_complex`].
pub fn cycle_period_r(config: &BranchConfig, g: &Genus1Params, path: &[Complex64]) -> Result<Complex64> {
    const PIECES_PER_SEGMENT: usize = 256;
    let curve = build_curve(config.clone(), g.params)?;
    let delta2 = delta2_of(&config.pi4, &k2_of(&curve));
    let pi4 = &config.pi4;
    if path.len() < 2 {
        return Err(Error::DegenerateInput("cycle needs at least two vertices".into()));
    }
    let start = path[0];
    let mut sqrt = ContinuousSqrt::new(&delta2, start, delta2.eval(start).sqrt());
    let mut total = Complex64::new(0.0, 0.0);
    for seg in path.windows(2) {
        let (za, zb) = (seg[0], seg[1]);
        let dz = zb - za;
        for k in 0..PIECES_PER_SEGMENT {
            let t0 = k as f64 / PIECES_PER_SEGMENT as f64;
            let t1 = (k + 1) as f64 / PIECES_PER_SEGMENT as f64;
            let anchor = sqrt.value();
            let f = |t: f64| {
                let r = za + dz * t;
                let mut d = delta2.eval(r).sqrt();
                if (d + anchor).norm() < (d - anchor).norm() {
                    d = -d;
                }
                -d / (pi4.eval(r) * 2.0) * dz
            };
            total += gk15(&f, t0, t1).0;
            sqrt.advance(za + dz * t1);
        }
    }
    Ok(total)
}

/// Complex `R0` making the real parts of the periods over two `R`-plane
/// cycles vanish, by Newton's method in `(Re R0, Im R0)` with a
/// finite-difference Jacobian.
///
/// Experimental: the cycles are fixed polylines, so they must keep
/// enclosing the same branch points while `R0` moves.
pub fn solve_r0_complex(
    config: &BranchConfig,
    guess: Complex64,
    cycles: &[Vec<Complex64>; 2],
    tol: f64,
) -> Result<Genus1Params> {
    let eval = |r0: Complex64| -> Result<(Genus1Params, [f64; 2])> {
        let g = params_from_r0(config, r0)?;
        let a = cycle_period_r(config, &g, &cycles[0])?.re;
        let b = cycle_period_r(config, &g, &cycles[1])?.re;
        Ok((g, [a, b]))
    };
    let mut r0 = guess;
    for _ in 0..40 {
        let (g, f) = eval(r0)?;
        if f[0].abs() < tol && f[1].abs() < tol {
            return Ok(g);
        }
        let h = 1e-6 * (1.0 + r0.norm());
        let (_, fx) = eval(r0 + h)?;
        let (_, fy) = eval(r0 + Complex64::new(0.0, h))?;
        let j = [
            [(fx[0] - f[0]) / h, (fy[0] - f[0]) / h],
            [(fx[1] - f[1]) / h, (fy[1] - f[1]) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::NonConvergence {
                backward_error: f[0].abs().max(f[1].abs()),
            });
        }
        let dx = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dy = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        r0 -= Complex64::new(dx, dy);
    }
    let (_, f) = eval(r0)?;
    Err(Error::NonConvergence {
        backward_error: f[0].abs().max(f[1].abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::build_config;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn section5() -> BranchConfig {
        build_config(r(-1.0), r(1.0), r(-0.375), r(0.5)).unwrap()
    }

    #[test]
    fn j_tail_is_minus_one_over_r() {
        let cfg = section5();
        let g = params_from_r0(&cfg, r(0.0775)).unwrap();
        for x in [1e4, 1e6] {
            let j = integrand_j(&cfg, &g, x).unwrap();
            assert!((j * x + 1.0).norm() < 10.0 / x);
        }
    }

    #[test]
    fn j_poles_have_half_residues() {
        let cfg = section5();
        let g = params_from_r0(&cfg, r(0.0775)).unwrap();
        let off = 1e-7;
        for (e, s) in [(-1.0, -0.5), (1.0, -0.5), (-0.375, 0.5), (0.5, 0.5)] {
            let j = integrand_j(&cfg, &g, e + off).unwrap();
            assert!((j * off - s).norm() < 1e-5, "edge {e}: {}", j * off);
        }
    }

    #[test]
    fn j_minus_reg_bounded_near_edge() {
        let cfg = section5();
        let g = params_from_r0(&cfg, r(0.0775)).unwrap();
        for e in [-1.0, 1.0, -0.375, 0.5] {
            for off in [1e-4, -1e-4] {
                let v = integrand_j(&cfg, &g, e + off).unwrap().re - regularizer(&cfg, e + off).unwrap();
                assert!(v.abs() < 50.0, "edge {e}: {v}");
            }
        }
    }

    #[test]
    fn pole_guard() {
        let cfg = section5();
        let g = params_from_r0(&cfg, r(0.0775)).unwrap();
        assert!(matches!(integrand_j(&cfg, &g, 1.0), Err(Error::NearPole { .. })));
        assert!(matches!(regularizer(&cfg, -0.375), Err(Error::NearPole { .. })));
    }

    #[test]
    fn regularizer_principal_value_vanishes() {
        let cfg = section5();
        // Symmetric truncation [-L, L] with symmetric excisions around poles.
        let (l, rho) = (1e6, 1e-7);
        let mut breaks = vec![-l, l];
        for e in [-1.0, 1.0, -0.375, 0.5] {
            breaks.push(e - rho);
            breaks.push(e + rho);
        }
        breaks.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for w in breaks.chunks(2) {
            let v = integrate(|x| r(regularizer(&cfg, x).unwrap()), w, 1e-9, 20_000).unwrap();
            total += v.value.re;
        }
        assert!(total.abs() < 1e-5, "{total}");
        let v = regularizer(&cfg, 1e5).unwrap();
        assert!((v * 1e5 + 1.0).abs() < 1e-4);
    }

    #[test]
    fn cycle_around_edge_is_imaginary() {
        let cfg = section5();
        let g = params_from_r0(&cfg, r(0.0775)).unwrap();
        let circle: Vec<Complex64> = (0..=64)
            .map(|k| r(1.0) + Complex64::from_polar(0.01, std::f64::consts::TAU * k as f64 / 64.0))
            .collect();
        let p = cycle_period_r(&cfg, &g, &circle).unwrap();
        assert!(p.re.abs() < 1e-8);
        assert!((p.im.abs() - std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn complex_solve_accepts_trivial_cycles() {
        let cfg = section5();
        let circle = |c: f64| -> Vec<Complex64> {
            (0..=32)
                .map(|k| r(c) + Complex64::from_polar(0.01, std::f64::consts::TAU * k as f64 / 32.0))
                .collect()
        };
        let g = solve_r0_complex(&cfg, Complex64::new(0.08, 0.01), &[circle(1.0), circle(-1.0)], 1e-6).unwrap();
        assert!((g.r0 - Complex64::new(0.08, 0.01)).norm() < 1e-12);
    }

    #[test]
    fn section5_signs_and_root() {
        let cfg = section5();
        let hi = re_i(&cfg, &params_from_r0(&cfg, r(0.0775)).unwrap()).unwrap();
        let lo = re_i(&cfg, &params_from_r0(&cfg, r(0.0774)).unwrap()).unwrap();
        assert!(hi.re_i > 0.0 && (hi.re_i - 0.001).abs() < 5e-4);
        assert!(lo.re_i < 0.0 && (lo.re_i + 0.0006).abs() < 5e-4);
        let g = solve_r0(&cfg, (0.05, 0.10), 1e-8).unwrap();
        assert!(g.r0.re > 0.0774 && g.r0.re < 0.0775, "{}", g.r0);
        assert_eq!(g.genus, 1);
    }

    fn symmetric() -> BranchConfig {
        build_config(r(-1.0), r(1.0), r(-0.375), r(0.375)).unwrap()
    }

    #[test]
    fn symmetric_period_vanishes() {
        let cfg = symmetric();
        let g = params_from_r0(&cfg, r(0.0)).unwrap();
        let p = re_i(&cfg, &g).unwrap();
        assert!(p.re_i.abs() < 10.0 * p.quadrature_error.max(1e-12), "{p:?}");
    }

    #[test]
    fn symmetric_solve_stays_on_symmetry_locus() {
        let cfg = symmetric();
        let g = solve_r0(&cfg, (-0.05, 0.07), 1e-9).unwrap();
        assert!(g.r0.re.abs() < 1e-6, "{}", g.r0);
    }

    #[test]
    fn near_symmetric_root_is_close() {
        let cfg = build_config(r(-1.0 + 1e-3), r(1.0), r(-0.375), r(0.375 + 1e-3)).unwrap();
        let g = solve_r0(&cfg, (-0.05, 0.07), 1e-8).unwrap();
        assert!(g.r0.re.abs() < 1e-2, "{}", g.r0);
    }

    #[test]
    fn same_sign_bracket_rejected() {
        let cfg = section5();
        assert!(matches!(solve_r0(&cfg, (0.08, 0.1), 1e-8), Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn sweep_finds_the_root() {
        let cfg = section5();
        let b = sign_change_brackets(&cfg, 0.05, 0.10, 10);
        assert_eq!(b.len(), 1);
        assert!(b[0].0 < 0.0775 && b[0].1 > 0.0774);
    }

    #[test]
    fn non_real_input_rejected() {
        let cfg = build_config(r(-1.0), r(1.0), Complex64::new(0.0, 0.5), Complex64::new(0.0, -0.5)).unwrap();
        let g = params_from_r0(&cfg, r(0.1)).unwrap();
        assert!(matches!(re_i(&cfg, &g), Err(Error::DegenerateInput(_))));
    }
}

