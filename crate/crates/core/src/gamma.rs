//! Potentials of branch pairs and the set where two of them coincide.
//!
//! For a pair of branches `(l, k)` the set `Re ∫ (h_l - h_k) dz = const`
//! is a trajectory of the quadratic differential `-(h_l - h_k)^2 dz^2`.
//! Arcs are launched from every hard and soft edge in the directions where
//! the pair potential, measured from the edge, vanishes, and are followed
//! by a predictor–corrector that re-projects onto the level set after
//! every step.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::{continue_branches, BranchConfig, CubicCurve};
use crate::error::{Error, Result};

const GL3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
    (0.0, 0.888_888_888_888_888_9),
    (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
];

const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// Closest approach to a branch point allowed for potential paths,
/// relative to the configuration scale.
pub const PATH_GUARD: f64 = 1e-6;
/// Tracked branches closer than this (relative) count as a collision.
pub const COLLISION_TOL: f64 = 1e-9;

fn nearest(points: &[Complex64], z: Complex64) -> f64 {
    points
        .iter()
        .map(|p| (z - p).norm())
        .fold(f64::INFINITY, f64::min)
}

fn check_separated(z: Complex64, h: &[Complex64; 3]) -> Result<()> {
    for i in 0..3 {
        for j in i + 1..3 {
            let scale = h[i].norm() + h[j].norm();
            if (h[i] - h[j]).norm() < COLLISION_TOL * scale {
                return Err(Error::BranchCollision { z });
            }
        }
    }
    Ok(())
}

/// `∫ (h_l - h_k) dz` over the chord `[za, zb]` by Gauss–Legendre on
/// `nodes`, with branches continued from `(za, ha)`.
fn chord_integral(
    curve: &CubicCurve,
    za: Complex64,
    ha: &[Complex64; 3],
    zb: Complex64,
    pair: (usize, usize),
    nodes: &[(f64, f64)],
) -> Result<Complex64> {
    let dz = zb - za;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut z_prev = za;
    let mut h_prev = *ha;
    for &(x, w) in nodes {
        let z = za + dz * (0.5 * (x + 1.0));
        h_prev = continue_branches(curve, &[z_prev, z], h_prev)?;
        z_prev = z;
        sum += (h_prev[pair.0] - h_prev[pair.1]) * w;
    }
    Ok(sum * dz * 0.5)
}

/// `Re ∫_path (h_l - h_k) dt` with branches labelled at `path[0]` by
/// [`CubicCurve::branches_at`] and continued along the polyline.
///
/// When branch 0 is involved the integrand decays like `∓3/t`; the
/// counterterm `±3 (ln|t_end| - ln|t_start|)` keeps the value bounded and
/// vanishes on closed paths.
pub fn pair_potential(curve: &CubicCurve, l: usize, k: usize, path: &[Complex64]) -> Result<f64> {
    if l > 2 || k > 2 {
        return Err(Error::DegenerateInput("branch labels are 0, 1, 2".into()));
    }
    if path.len() < 2 {
        return Err(Error::DegenerateInput("path needs at least two points".into()));
    }
    let start = curve.branches_at(path[0])?;
    let (value, _) = pair_potential_from(curve, (l, k), path, start)?;
    let counter = if l == 0 && k != 0 {
        3.0
    } else if k == 0 && l != 0 {
        -3.0
    } else {
        0.0
    };
    let end = path[path.len() - 1];
    Ok(value + counter * (end.norm().ln() - path[0].norm().ln()))
}

/// Like [`pair_potential`] without the counterterm, from explicit starting
/// values; also returns the branch triple at the end of the path.
pub fn pair_potential_from(
    curve: &CubicCurve,
    pair: (usize, usize),
    path: &[Complex64],
    start: [Complex64; 3],
) -> Result<(f64, [Complex64; 3])> {
    let scale = curve.config.scale();
    let singular = curve.singular_points();
    let guard = PATH_GUARD * scale;
    let mut h = start;
    let mut total = 0.0;
    for seg in path.windows(2) {
        let (za, zb) = (seg[0], seg[1]);
        let length = (zb - za).norm();
        let mut t = 0.0;
        while t < 1.0 {
            let z = za + (zb - za) * t;
            let dist = nearest(&singular, z);
            if dist <= guard {
                return Err(Error::NearSingular {
                    z,
                    singular: z,
                    distance: dist,
                });
            }
            let step = 0.1 * dist;
            let t_next = if length > 0.0 { (t + step / length).min(1.0) } else { 1.0 };
            let z_next = za + (zb - za) * t_next;
            total += chord_integral(curve, z, &h, z_next, pair, &GL5)?.re;
            h = continue_branches(curve, &[z, z_next], h)?;
            check_separated(z_next, &h)?;
            t = t_next;
        }
    }
    Ok((total, h))
}

/// Pieces of the cycle along which the real part of the Abelian integral
/// is tested: it runs around `b1` and `a1` of a nested real configuration
/// (`a1 < a2 < b2 < b1`) and closes through two large half-circles.
#[derive(Debug, Clone)]
pub struct ValidatingCycle {
    pub path: Vec<Complex64>,
    /// Branch pair whose potential difference is integrated.
    pub pair: (usize, usize),
}

fn arc_points(center: Complex64, radius: f64, from: f64, to: f64, n: usize) -> Vec<Complex64> {
    (0..=n)
        .map(|j| center + Complex64::from_polar(radius, from + (to - from) * j as f64 / n as f64))
        .collect()
}

/// Builds the validating cycle for a real nested configuration and picks
/// the pair `(0, A)` where `A` is the branch meeting `h0` at `b1`.
pub fn validating_cycle(curve: &CubicCurve) -> Result<ValidatingCycle> {
    let cfg: &BranchConfig = &curve.config;
    let pts = cfg.points();
    if pts.iter().any(|p| p.im.abs() > 1e-14 * (1.0 + p.norm())) {
        return Err(Error::DegenerateInput("validating cycle needs real branch points".into()));
    }
    let (a1, b1, a2, b2) = (pts[0].re, pts[1].re, pts[2].re, pts[3].re);
    if !(a1 < a2.min(b2) && a2.max(b2) < b1) {
        return Err(Error::DegenerateInput(
            "validating cycle needs the second interval inside the first".into(),
        ));
    }
    let inner = a2.max(b2);
    let inner_lo = a2.min(b2);
    let soft: Vec<Complex64> = curve.dtilde_roots.values();
    // Radii keep each small arc clear of every other singular point.
    let clearance = |e: f64| {
        let others = pts
            .iter()
            .copied()
            .chain(soft.iter().copied())
            .filter(|p| (p - Complex64::new(e, 0.0)).norm() > 1e-12)
            .map(|p| (p - Complex64::new(e, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        0.4 * others
    };
    let rho_b = clearance(b1).min(0.5 * (b1 - inner));
    let rho_a = clearance(a1).min(0.5 * (inner_lo - a1));
    let reach = a1.abs().max(b1.abs());
    let mut big = 3.0 * reach;
    for n in curve.nodes.iter().chain(soft.iter()) {
        if (n.norm() - big).abs() < 0.25 * reach {
            big = n.norm() + 0.5 * reach;
        }
    }
    let delta = 0.25 * rho_a.min(rho_b);
    let phi_b = (delta / rho_b).asin();
    let phi_a = (delta / rho_a).asin();
    let pi = std::f64::consts::PI;
    let bb = Complex64::new(b1, 0.0);
    let aa = Complex64::new(a1, 0.0);
    let start = Complex64::new(big, delta);
    let mut path = vec![start];
    path.extend(arc_points(bb, rho_b, phi_b, 2.0 * pi - phi_b, 64));
    path.push(Complex64::new(big, -delta));
    let theta_lo = (-delta / big).asin();
    path.extend(arc_points(Complex64::new(0.0, 0.0), big, theta_lo, -pi - theta_lo, 128).into_iter().skip(1));
    path.extend(arc_points(aa, rho_a, pi + phi_a, 3.0 * pi - phi_a, 64));
    path.push(Complex64::new(-big, delta));
    path.extend(arc_points(Complex64::new(0.0, 0.0), big, pi - theta_lo.abs(), theta_lo.abs(), 128).into_iter().skip(1));
    *path.last_mut().unwrap() = start;

    // The pair that swaps on a full turn around b1 collides there.
    let approach = path[1];
    let h_start = curve.branches_at(start)?;
    let h_app = continue_branches(curve, &[start, approach], h_start)?;
    let circle = arc_points(bb, rho_b, phi_b, phi_b + 2.0 * pi, 128);
    let h_back = continue_branches(curve, &circle, h_app)?;
    let perm: Vec<usize> = (0..3)
        .map(|i| {
            (0..3)
                .min_by(|&a, &b| (h_back[i] - h_app[a]).norm().total_cmp(&(h_back[i] - h_app[b]).norm()))
                .unwrap_or(i)
        })
        .collect();
    if perm[0] == 0 {
        return Err(Error::DegenerateInput(
            "branch 0 does not branch at b1 for this curve".into(),
        ));
    }
    Ok(ValidatingCycle {
        path,
        pair: (0, perm[0]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Reached a hard or soft edge.
    Edge(Complex64),
    /// Reached a double point of the reduced discriminant.
    Node(Complex64),
    Closed,
    LeftBox,
    StepCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaArc {
    pub points: Vec<Complex64>,
    /// Branch labels of the pair at the first point, from
    /// [`CubicCurve::branches_at`] where continuation reaches it.
    pub pair: (usize, usize),
    pub seed: Complex64,
    pub seed_kind: EdgeKind,
    pub direction_index: usize,
    pub end: Termination,
    /// Values `(h_l, h_k)` at the first point of the arc.
    pub start_values: [Complex64; 2],
    /// Index range of the vertices produced by the tracer; the rest are
    /// straight joins to the end edges.
    pub traced: std::ops::Range<usize>,
    /// Largest `|Re ∫ (h_l - h_k) dz|` from the seed edge seen by the
    /// tracer.
    pub max_drift: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub arcs: Vec<GammaArc>,
    pub hard_edges: Vec<Complex64>,
    pub soft_edges: Vec<Complex64>,
    /// Step used for tracing.
    pub step: f64,
}

impl GammaSet {
    pub fn all_points(&self) -> Vec<Complex64> {
        self.arcs.iter().flat_map(|a| a.points.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaOptions {
    /// Step length; defaults to `1e-3 * scale`.
    pub step: Option<f64>,
    /// Lower-left and upper-right corners; defaults to a box around the
    /// edges.
    pub bbox: Option<(Complex64, Complex64)>,
    /// Allowed `|Re ∫ (h_l - h_k) dz|` per unit arclength.
    pub drift_tol: f64,
    pub max_steps: usize,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            step: None,
            bbox: None,
            drift_tol: 1e-6,
            max_steps: 20_000,
        }
    }
}

/// A point on a trajectory with its tracked branches.
#[derive(Debug, Clone, Copy)]
struct TraceState {
    z: Complex64,
    h: [Complex64; 3],
    pair: (usize, usize),
    dir: Complex64,
    /// `Re ∫ (h_l - h_k) dz` from the seed edge.
    v: f64,
}

impl TraceState {
    fn diff(&self) -> Complex64 {
        self.h[self.pair.0] - self.h[self.pair.1]
    }
}

fn unit(z: Complex64) -> Complex64 {
    z / z.norm()
}

/// Tangent of the level curve with the orientation closest to `prev`.
fn tangent(d: Complex64, prev: Complex64) -> Complex64 {
    let t = unit(Complex64::new(0.0, 1.0) * d.conj());
    if (t * prev.conj()).re >= 0.0 {
        t
    } else {
        -t
    }
}

struct Tracer<'a> {
    curve: &'a CubicCurve,
    singular: Vec<Complex64>,
    /// `(point, termination radius, is node)`.
    targets: Vec<(Complex64, f64, bool)>,
    step: f64,
    bbox: (Complex64, Complex64),
    max_steps: usize,
}

impl<'a> Tracer<'a> {
    fn new(curve: &'a CubicCurve, opts: &GammaOptions) -> Self {
        let scale = curve.config.scale();
        let step = opts.step.unwrap_or(1e-3 * scale);
        let singular = curve.singular_points();
        let hard: Vec<Complex64> = curve.config.points().to_vec();
        let soft = curve.soft_points.values();
        let mut targets = Vec::new();
        for (p, node) in hard
            .iter()
            .map(|p| (*p, false))
            .chain(soft.iter().map(|p| (*p, false)))
            .chain(curve.nodes.iter().map(|p| (*p, true)))
        {
            let others = singular
                .iter()
                .filter(|q| (*q - p).norm() > 1e-12 * scale)
                .map(|q| (q - p).norm())
                .fold(f64::INFINITY, f64::min);
            targets.push((p, (5.0 * step).min(0.4 * others), node));
        }
        let bbox = opts.bbox.unwrap_or_else(|| {
            let edges: Vec<Complex64> = hard.iter().chain(soft.iter()).copied().collect();
            let lo_re = edges.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
            let hi_re = edges.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
            let lo_im = edges.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
            let hi_im = edges.iter().map(|p| p.im).fold(f64::NEG_INFINITY, f64::max);
            let center = Complex64::new(0.5 * (lo_re + hi_re), 0.5 * (lo_im + hi_im));
            let half = 0.75 * (hi_re - lo_re).max(hi_im - lo_im) + 0.5 * scale;
            (center - Complex64::new(half, half), center + Complex64::new(half, half))
        });
        Tracer {
            curve,
            singular,
            targets,
            step,
            bbox,
            max_steps: opts.max_steps,
        }
    }

    fn in_box(&self, z: Complex64) -> bool {
        z.re >= self.bbox.0.re && z.re <= self.bbox.1.re && z.im >= self.bbox.0.im && z.im <= self.bbox.1.im
    }

    fn local_step(&self, z: Complex64) -> f64 {
        self.step.min(0.2 * nearest(&self.singular, z))
    }

    fn termination_radius(&self, e: Complex64) -> f64 {
        self.targets
            .iter()
            .find(|t| (t.0 - e).norm() < 1e-12 * (1.0 + e.norm()))
            .map(|t| t.1)
            .unwrap_or(5.0 * self.step)
    }

    /// Pair potential on the ray `e + w s^2`, `s` in `[0, 1]`, with the
    /// triple `h_outer` valid at `e + w`.
    fn ray_potential(&self, e: Complex64, w: Complex64, h_outer: &[Complex64; 3], pair: (usize, usize)) -> Result<f64> {
        let mut h = *h_outer;
        let mut z_prev = e + w;
        let mut sum = Complex64::new(0.0, 0.0);
        for &(x, wt) in GL8.iter().rev() {
            let s = 0.5 * (x + 1.0);
            let z = e + w * (s * s);
            h = continue_branches(self.curve, &[z_prev, z], h)?;
            z_prev = z;
            sum += (h[pair.0] - h[pair.1]) * (w * 2.0 * s) * wt;
        }
        Ok((sum * 0.5).re)
    }

    /// Departure directions from edge `e`: zeros of the pair potential on a
    /// small circle, with the pair followed continuously around it.
    fn probe(&self, e: Complex64, kind: EdgeKind) -> Result<Vec<TraceState>> {
        const SAMPLES: usize = 96;
        let r = self.termination_radius(e) * 0.5;
        let tau = std::f64::consts::TAU;
        let at = |theta: f64| e + Complex64::from_polar(r, theta);
        let h0 = self.curve.raw_branches(at(0.0), None)?;
        let pair = match kind {
            EdgeKind::Hard => {
                let mut idx = [0usize, 1, 2];
                idx.sort_by(|&a, &b| h0[b].norm().total_cmp(&h0[a].norm()));
                (idx[0].min(idx[1]), idx[0].max(idx[1]))
            }
            EdgeKind::Soft => {
                let pairs = [(0, 1), (0, 2), (1, 2)];
                *pairs
                    .iter()
                    .min_by(|p, q| {
                        (h0[p.0] - h0[p.1]).norm().total_cmp(&(h0[q.0] - h0[q.1]).norm())
                    })
                    .unwrap_or(&(0, 1))
            }
        };
        let mut thetas = Vec::with_capacity(SAMPLES + 1);
        let mut triples = Vec::with_capacity(SAMPLES + 1);
        let mut values = Vec::with_capacity(SAMPLES + 1);
        let mut h = h0;
        for j in 0..=SAMPLES {
            let theta = tau * j as f64 / SAMPLES as f64;
            if j > 0 {
                let prev = tau * (j - 1) as f64 / SAMPLES as f64;
                let arc: Vec<Complex64> = (0..=4).map(|m| at(prev + (theta - prev) * m as f64 / 4.0)).collect();
                h = continue_branches(self.curve, &arc, h)?;
            }
            thetas.push(theta);
            triples.push(h);
            values.push(self.ray_potential(e, Complex64::from_polar(r, theta), &h, pair)?);
        }
        let zero = 1e-10 * values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut seeds = Vec::new();
        for j in 0..SAMPLES {
            let (va, vb) = (values[j], values[j + 1]);
            if va.abs() <= zero {
                seeds.push(TraceState {
                    z: at(thetas[j]),
                    h: triples[j],
                    pair,
                    dir: Complex64::from_polar(1.0, thetas[j]),
                    v: va,
                });
                continue;
            }
            if vb.abs() <= zero || va.signum() == vb.signum() {
                continue;
            }
            let (mut lo, mut hi) = (thetas[j], thetas[j + 1]);
            let (mut h_lo, mut v_lo) = (triples[j], va);
            for _ in 0..48 {
                let mid = 0.5 * (lo + hi);
                let h_mid = continue_branches(self.curve, &[at(lo), at(mid)], h_lo)?;
                let v_mid = self.ray_potential(e, Complex64::from_polar(r, mid), &h_mid, pair)?;
                if v_mid.signum() == v_lo.signum() {
                    lo = mid;
                    h_lo = h_mid;
                    v_lo = v_mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            seeds.push(TraceState {
                z: at(lo),
                h: h_lo,
                pair,
                dir: Complex64::from_polar(1.0, lo),
                v: v_lo,
            });
        }
        Ok(seeds)
    }

    /// One predictor–corrector step of length about `hs`; `None` asks for a
    /// shorter step.
    fn advance(&self, st: &TraceState, hs: f64) -> Result<Option<TraceState>> {
        let attempt = || -> Result<TraceState> {
            let dir0 = tangent(st.diff(), st.dir);
            let zp = st.z + dir0 * hs;
            let hp = continue_branches(self.curve, &[st.z, zp], st.h)?;
            let dir1 = tangent(hp[st.pair.0] - hp[st.pair.1], dir0);
            let dir = unit(dir0 + dir1);
            let z1 = st.z + dir * hs;
            let h1 = continue_branches(self.curve, &[st.z, z1], st.h)?;
            let v1 = st.v + chord_integral(self.curve, st.z, &st.h, z1, st.pair, &GL3)?.re;
            let d1 = h1[st.pair.0] - h1[st.pair.1];
            let corr = -d1.conj() * (v1 / d1.norm_sqr());
            if corr.norm() > 0.1 * hs || !corr.re.is_finite() {
                return Err(Error::StepCollapse { z: z1 });
            }
            let z2 = z1 + corr;
            let h2 = continue_branches(self.curve, &[z1, z2], h1)?;
            let v2 = v1 + chord_integral(self.curve, z1, &h1, z2, st.pair, &GL3)?.re;
            check_separated(z2, &h2)?;
            Ok(TraceState {
                z: z2,
                h: h2,
                pair: st.pair,
                dir: unit(z2 - st.z),
                v: v2,
            })
        };
        match attempt() {
            Ok(s) => Ok(Some(s)),
            Err(Error::StepCollapse { .. }) | Err(Error::BranchCollision { .. }) | Err(Error::NonConvergence { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Follows the trajectory from `seed` until a stopping condition. The
    /// edge `origin` is ignored until the arc has moved away from it.
    /// Also returns the number of traced vertices at the front of the list.
    fn march(&self, seed: TraceState, origin: Complex64) -> Result<(Vec<Complex64>, Termination, f64, f64, usize)> {
        let mut st = seed;
        let mut points = vec![seed.z];
        let mut length = 0.0;
        let mut max_drift = seed.v.abs();
        let origin_radius = self.termination_radius(origin);
        let mut armed = false;
        let min_step = 1e-6 * self.step;
        for _ in 0..self.max_steps {
            let mut hs = self.local_step(st.z);
            let next = loop {
                if hs < min_step {
                    return Err(Error::StepCollapse { z: st.z });
                }
                match self.advance(&st, hs)? {
                    Some(n) => break n,
                    None => hs *= 0.5,
                }
            };
            length += (next.z - st.z).norm();
            st = next;
            points.push(st.z);
            max_drift = max_drift.max(st.v.abs());
            if !armed && (st.z - origin).norm() > 1.2 * origin_radius {
                armed = true;
            }
            if !self.in_box(st.z) {
                let n = points.len();
                return Ok((points, Termination::LeftBox, length, max_drift, n));
            }
            for &(p, radius, node) in &self.targets {
                let is_origin = (p - origin).norm() < 1e-12 * (1.0 + origin.norm());
                if (is_origin && !armed) || (st.z - p).norm() > radius {
                    continue;
                }
                if !armed {
                    continue;
                }
                let n = points.len();
                points.extend(chord(st.z, p, self.step).into_iter().skip(1));
                length += (st.z - p).norm();
                let end = if node { Termination::Node(p) } else { Termination::Edge(p) };
                return Ok((points, end, length, max_drift, n));
            }
            if length > 20.0 * self.step && (st.z - points[0]).norm() < 2.0 * self.step {
                let n = points.len();
                points.push(points[0]);
                return Ok((points, Termination::Closed, length, max_drift, n));
            }
        }
        let n = points.len();
        Ok((points, Termination::StepCap, length, max_drift, n))
    }
}

/// Points from `a` to `b` inclusive, spaced at most `spacing` apart.
fn chord(a: Complex64, b: Complex64, spacing: f64) -> Vec<Complex64> {
    let n = ((b - a).norm() / spacing).ceil().max(1.0) as usize;
    (0..=n).map(|j| a + (b - a) * (j as f64 / n as f64)).collect()
}

/// Traces the set of equal pair potentials from every hard and soft edge.
pub fn trace_gamma(curve: &CubicCurve, opts: &GammaOptions) -> Result<GammaSet> {
    let tracer = Tracer::new(curve, opts);
    let hard: Vec<Complex64> = curve.config.points().to_vec();
    let soft = curve.soft_points.values();
    let edges: Vec<(Complex64, EdgeKind)> = hard
        .iter()
        .map(|p| (*p, EdgeKind::Hard))
        .chain(soft.iter().map(|p| (*p, EdgeKind::Soft)))
        .collect();
    let seeds: Vec<Vec<TraceState>> = edges
        .par_iter()
        .map(|&(e, kind)| tracer.probe(e, kind))
        .collect::<Result<_>>()?;
    let jobs: Vec<(Complex64, EdgeKind, usize, TraceState)> = edges
        .iter()
        .zip(seeds)
        .flat_map(|(&(e, kind), list)| list.into_iter().enumerate().map(move |(i, s)| (e, kind, i, s)))
        .collect();
    let arcs: Vec<GammaArc> = jobs
        .par_iter()
        .map(|&(e, kind, index, seed)| {
            let (mut points, end, length, max_drift, steps) = tracer.march(seed, e)?;
            let mut lead = chord(e, seed.z, tracer.step);
            lead.pop();
            let offset = lead.len();
            points.splice(0..0, lead);
            let pair = global_labels(curve, &seed).unwrap_or(seed.pair);
            Ok(GammaArc {
                points,
                pair,
                seed: e,
                seed_kind: kind,
                direction_index: index,
                end,
                start_values: [seed.h[seed.pair.0], seed.h[seed.pair.1]],
                traced: offset..offset + steps,
                max_drift,
                length,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GammaSet {
        arcs,
        hard_edges: hard,
        soft_edges: soft,
        step: tracer.step,
    })
}

/// Labels of the seed pair under the global convention.
fn global_labels(curve: &CubicCurve, seed: &TraceState) -> Option<(usize, usize)> {
    let global = curve.branches_at(seed.z).ok()?;
    let find = |v: Complex64| {
        (0..3).min_by(|&a, &b| (global[a] - v).norm().total_cmp(&(global[b] - v).norm()))
    };
    let l = find(seed.h[seed.pair.0])?;
    let k = find(seed.h[seed.pair.1])?;
    (l != k).then_some((l.min(k), l.max(k)))
}

/// Recomputes `max |Re ∫ (h_l - h_k) dz| / arclength` along the emitted
/// polyline of `arc`, skipping the edge vertices at its ends.
pub fn arc_drift(curve: &CubicCurve, arc: &GammaArc) -> Result<f64> {
    let inner = &arc.points[arc.traced.clone()];
    if inner.len() < 2 {
        return Ok(0.0);
    }
    let raw = curve.raw_branches(inner[0], None)?;
    let pick = |v: Complex64| {
        (0..3)
            .min_by(|&a, &b| (raw[a] - v).norm().total_cmp(&(raw[b] - v).norm()))
            .unwrap_or(0)
    };
    let pair = (pick(arc.start_values[0]), pick(arc.start_values[1]));
    let mut h = raw;
    let mut v = 0.0f64;
    let mut length = 0.0;
    let mut worst = 0.0f64;
    for seg in inner.windows(2) {
        v += chord_integral(curve, seg[0], &h, seg[1], pair, &GL3)?.re;
        h = continue_branches(curve, &[seg[0], seg[1]], h)?;
        length += (seg[1] - seg[0]).norm();
        if length > 0.0 {
            worst = worst.max(v.abs() / length);
        }
    }
    Ok(worst)
}

/// Traces `arc` backwards from its last traced point and returns the new
/// polyline (ending at the seed edge when reached).
pub fn retrace(curve: &CubicCurve, arc: &GammaArc, opts: &GammaOptions) -> Result<Vec<Complex64>> {
    let tracer = Tracer::new(curve, opts);
    let traced = &arc.points[arc.traced.clone()];
    if traced.len() < 2 {
        return Ok(traced.to_vec());
    }
    let raw = curve.raw_branches(traced[0], None)?;
    let pick = |v: Complex64| {
        (0..3)
            .min_by(|&a, &b| (raw[a] - v).norm().total_cmp(&(raw[b] - v).norm()))
            .unwrap_or(0)
    };
    let pair = (pick(arc.start_values[0]), pick(arc.start_values[1]));
    let mut h = raw;
    for seg in traced.windows(2) {
        h = continue_branches(curve, &[seg[0], seg[1]], h)?;
    }
    let n = traced.len();
    let seed = TraceState {
        z: traced[n - 1],
        h,
        pair,
        dir: unit(traced[n - 2] - traced[n - 1]),
        v: 0.0,
    };
    // The far end may sit on another edge; treat that edge as the origin.
    let origin = match arc.end {
        Termination::Edge(p) | Termination::Node(p) => p,
        _ => traced[n - 1],
    };
    let (points, _, _, _, _) = tracer.march(seed, origin)?;
    let mut lead = match arc.end {
        Termination::Edge(p) | Termination::Node(p) => chord(p, seed.z, tracer.step),
        _ => vec![seed.z],
    };
    lead.pop();
    lead.extend(points);
    Ok(lead)
}

/// Largest distance from a point of `a` to the set `b`.
pub fn directed_hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(|p, q| p.re.total_cmp(&q.re));
    a.iter()
        .map(|p| nearest_sorted(&sorted, *p))
        .fold(0.0, f64::max)
}

/// Distance from `p` to the nearest point of `sorted` (ordered by real part).
pub fn nearest_sorted(sorted: &[Complex64], p: Complex64) -> f64 {
    let start = sorted.partition_point(|q| q.re < p.re);
    let mut best = f64::INFINITY;
    for q in sorted[start..].iter() {
        if q.re - p.re > best {
            break;
        }
        best = best.min((q - p).norm());
    }
    for q in sorted[..start].iter().rev() {
        if p.re - q.re > best {
            break;
        }
        best = best.min((q - p).norm());
    }
    best
}

pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}
