//! Correlation kernels: the finite-`N` double contour integral, the
//! translation-invariant Gibbs kernels `K^{z₀}` and the spectral curve
//! `P(z,w) = 0` of the fundamental domain.

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{lattice_edge, EdgeKey, EdgeKind, LatticeCoord};
use crate::numeric::{c_to_f64, cis, cexp, cln, Real, Xf};

pub type C64 = Complex<f64>;

const POLE_EPS: f64 = 1e-12;

fn check_weights(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("weights must be positive, got alpha={alpha}, beta={beta}")));
    }
    Ok(())
}

/// `P(z,w) = det K₁(z,w)` for the magnetically altered fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    pub alpha: f64,
    pub beta: f64,
}

impl CharPoly {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_weights(alpha, beta)?;
        Ok(CharPoly { alpha, beta })
    }

    /// Rows `b₁, b₂`, columns `w₁, w₂`.
    pub fn k1(&self, z: C64, w: C64) -> [[C64; 2]; 2] {
        let zi = z.inv();
        [[zi - 1.0, zi + self.beta], [w, zi * self.alpha - 1.0]]
    }

    pub fn p(&self, z: C64, w: C64) -> C64 {
        let zi = z.inv();
        (1.0 - zi) * (1.0 - zi * self.alpha) - w * (zi + self.beta)
    }

    /// Adjugate of `K₁`, so that `K₁ Q = P · I`.
    pub fn q(&self, z: C64, w: C64) -> [[C64; 2]; 2] {
        let k = self.k1(z, w);
        [[k[1][1], -k[0][1]], [-k[1][0], k[0][0]]]
    }

    pub fn p_z(&self, z: C64, w: C64) -> C64 {
        let zi = z.inv();
        let zi2 = zi * zi;
        zi2 * (1.0 - zi * self.alpha) + zi2 * self.alpha * (1.0 - zi) + w * zi2
    }

    pub fn p_w(&self, z: C64) -> C64 {
        -(z.inv() + self.beta)
    }
}

/// The branch `w(z) = (1−z⁻¹)(1−αz⁻¹)/(z⁻¹+β)` of `P(z,w) = 0`.
pub fn w_of_z(z: C64, alpha: f64, beta: f64) -> Result<C64> {
    check_weights(alpha, beta)?;
    if z.norm() < POLE_EPS || (z + 1.0 / beta).norm() < POLE_EPS {
        return Err(Error::Pole(format!("w(z) is singular at z = {z}")));
    }
    let zi = z.inv();
    Ok((1.0 - zi) * (1.0 - zi * alpha) / (zi + beta))
}

/// A translation-invariant Gibbs measure, parametrised by `z₀` in the closed
/// upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsPoint {
    pub z0: C64,
    pub alpha: f64,
    pub beta: f64,
}

impl GibbsPoint {
    pub fn new(z0: C64, alpha: f64, beta: f64) -> Result<Self> {
        check_weights(alpha, beta)?;
        if !(z0.re.is_finite() && z0.im.is_finite()) || z0.im < 0.0 {
            return Err(Error::InvalidParameter(format!("z0 = {z0} is not in the closed upper half plane")));
        }
        if z0.im == 0.0 {
            for p in [0.0, 1.0, alpha, -1.0 / beta] {
                if (z0.re - p).abs() < POLE_EPS {
                    return Err(Error::Pole(format!("real z0 = {} sits on a pole", z0.re)));
                }
            }
        }
        Ok(GibbsPoint { z0, alpha, beta })
    }

    pub fn is_liquid(&self) -> bool {
        self.z0.im > 0.0
    }

    pub fn w0(&self) -> C64 {
        w_of_z(self.z0, self.alpha, self.beta).expect("z0 avoids the poles of w")
    }

    /// `(B_x, B_y) = (log|z₀|, log|w₀|)`.
    pub fn magnetic_fields(&self) -> (f64, f64) {
        (self.z0.norm().ln(), self.w0().norm().ln())
    }

    pub fn curve_residual(&self) -> f64 {
        CharPoly { alpha: self.alpha, beta: self.beta }.p(self.z0, self.w0()).norm()
    }
}

/// Exponents `(A, B, C)` of `Φ(X, T; z) = (1+βz)^A (1−z⁻¹)^B (1−αz⁻¹)^C`.
pub fn phi_exponents(x: i64, time: i64) -> (i64, i64, i64) {
    let (t, m) = LatticeCoord::new(x, 0).k_m();
    (time - t + 1, t - 1 + (m == 1) as i64, t - 1 + (m <= 2) as i64)
}

pub fn phi(x: i64, time: i64, z: C64, alpha: f64, beta: f64) -> Result<C64> {
    check_weights(alpha, beta)?;
    let (a, b, c) = phi_exponents(x, time);
    let singular = |p: f64, e: i64| e != 0 && (z - p).norm() < POLE_EPS;
    if z.norm() < POLE_EPS || singular(1.0, -b) || singular(alpha, -c) || singular(-1.0 / beta, a) {
        return Err(Error::Pole(format!("Φ({x}, {time}; z) is singular at z = {z}")));
    }
    let zi = z.inv();
    Ok((1.0 + z * beta).powi(a as i32) * (1.0 - zi).powi(b as i32) * (1.0 - zi * alpha).powi(c as i32))
}

/// `log Φ(X, T; z)` up to a multiple of `2πi`.
pub fn log_phi<T: Real>(x: i64, time: i64, z: &Complex<T>, alpha: &T, beta: &T) -> Complex<T> {
    let (a, b, c) = phi_exponents(x, time);
    let one = Complex::<T>::one();
    let zi = one.clone() / z.clone();
    let la = cln(&(one.clone() + z.clone() * beta.clone()));
    let lb = cln(&(one.clone() - zi.clone()));
    let lc = cln(&(one - zi * alpha.clone()));
    la * T::from_i64(a) + lb * T::from_i64(b) + lc * T::from_i64(c)
}

/// Two concentric circles around `center`. The `z` contour is the outer one
/// when `X₁ ≥ X₂` and the inner one otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: f64,
    pub r_outer: f64,
    pub r_inner: f64,
    /// Initial number of trapezoid nodes per circle.
    pub m: usize,
}

pub const DEFAULT_NODES: usize = 512;

/// Radii admissible around `c`: `(max(c, |c−1|, |c−α|), c + 1/β)`.
pub fn radius_window(c: f64, alpha: f64, beta: f64) -> (f64, f64) {
    (c.max((c - 1.0).abs()).max((c - alpha).abs()), c + 1.0 / beta)
}

impl ContourSpec {
    pub fn default_for(alpha: f64, beta: f64) -> Result<Self> {
        check_weights(alpha, beta)?;
        let c = (1.0 + alpha) / 2.0;
        let (lo, _) = radius_window(c, alpha, beta);
        let r_outer = c + 1.0 / (2.0 * beta);
        let spec = ContourSpec { center: c, r_outer, r_inner: (r_outer * lo).sqrt(), m: DEFAULT_NODES };
        spec.validate(alpha, beta)?;
        Ok(spec)
    }

    pub fn validate(&self, alpha: f64, beta: f64) -> Result<()> {
        check_weights(alpha, beta)?;
        let (lo, hi) = radius_window(self.center, alpha, beta);
        if !(self.center > 0.0) {
            return Err(Error::Contour(format!("center {} must be positive", self.center)));
        }
        for r in [self.r_inner, self.r_outer] {
            if !(r > lo && r < hi) {
                return Err(Error::Contour(format!(
                    "radius {r} around {} must lie in ({lo}, {hi}) to enclose 0, 1, α and exclude -1/β",
                    self.center
                )));
            }
        }
        if !(self.r_inner < self.r_outer) {
            return Err(Error::Contour("inner radius must be smaller than outer radius".into()));
        }
        if self.m < 8 {
            return Err(Error::Contour(format!("{} nodes are too few", self.m)));
        }
        Ok(())
    }

    fn radii(&self, x1: i64, x2: i64) -> (f64, f64) {
        if x1 >= x2 {
            (self.r_outer, self.r_inner)
        } else {
            (self.r_inner, self.r_outer)
        }
    }

    /// Contour minimising the size of the largest quadrature term for one
    /// kernel entry, searched over a grid of centers and radii.
    pub fn optimized(p1: LatticeCoord, p2: LatticeCoord, n: u32, alpha: f64, beta: f64) -> Result<Self> {
        check_weights(alpha, beta)?;
        const CENTERS: usize = 24;
        const RADII: usize = 40;
        const MAX_NODES: f64 = 4096.0;
        let top = alpha.max(1.0);
        let mut best: Option<(f64, ContourSpec)> = None;
        for ci in 0..CENTERS {
            let c = top * (ci as f64 + 0.5) / CENTERS as f64;
            let (lo, hi) = radius_window(c, alpha, beta);
            if hi <= lo * (1.0 + 1e-6) {
                continue;
            }
            let rs: Vec<f64> = (0..RADII).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / RADII as f64).collect();
            let lf: Vec<f64> = rs.iter().map(|&r| log_max_f(p1, n, c, r, alpha, beta)).collect();
            let lg: Vec<f64> = rs.iter().map(|&r| log_max_g(p2, n, c, r, alpha, beta)).collect();
            for a in 0..RADII {
                for b in 0..RADII {
                    if a == b || (p1.x >= p2.x) != (a > b) {
                        continue;
                    }
                    let (rz, rw) = (rs[a], rs[b]);
                    let (r_in, r_out) = (rz.min(rw), rz.max(rw));
                    let cost = lf[a] + lg[b] + (rz / (rz - rw).abs()).ln();
                    let rho = (r_in / r_out).max(lo / r_in).max(r_out / hi);
                    let digits = cost / std::f64::consts::LN_10 + 20.0;
                    if digits * std::f64::consts::LN_10 / -rho.ln() > MAX_NODES {
                        continue;
                    }
                    if best.as_ref().map_or(true, |(bc, _)| cost < *bc) {
                        best = Some((cost, ContourSpec { center: c, r_outer: r_out, r_inner: r_in, m: DEFAULT_NODES }));
                    }
                }
            }
        }
        best.map(|(_, s)| s).ok_or_else(|| Error::Contour("no admissible contour pair found".into()))
    }

    /// `log₁₀` of the bound on the largest term of the discretised double
    /// integral for the entry `(p1, p2)`.
    pub fn term_bound_log10(&self, p1: LatticeCoord, p2: LatticeCoord, n: u32, alpha: f64, beta: f64) -> f64 {
        let (rz, rw) = self.radii(p1.x, p2.x);
        let c = self.center;
        (log_max_f(p1, n, c, rz, alpha, beta) + log_max_g(p2, n, c, rw, alpha, beta) + (rz / (rz - rw).abs()).ln())
            / std::f64::consts::LN_10
    }
}

const PROBE: usize = 128;

fn probe_points(c: f64, r: f64) -> impl Iterator<Item = C64> {
    (0..PROBE).map(move |k| c + C64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / PROBE as f64))
}

fn log_max_f(p1: LatticeCoord, n: u32, c: f64, r: f64, alpha: f64, beta: f64) -> f64 {
    probe_points(c, r)
        .map(|z| (log_phi(p1.x, n as i64, &z, &alpha, &beta) - z.ln() * (p1.u + 1) as f64).re)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn log_max_g(p2: LatticeCoord, n: u32, c: f64, r: f64, alpha: f64, beta: f64) -> f64 {
    probe_points(c, r)
        .map(|w| (w.ln() * p2.u as f64 - log_phi(p2.x, n as i64, &w, &alpha, &beta)).re + r.ln())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContourChoice {
    Default,
    Optimized,
    Fixed(ContourSpec),
}

/// A converged kernel value with the node count and the last change under
/// `M → 2M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: C64,
    pub m: usize,
    pub change: f64,
}

/// Evaluator of the finite-`N` kernel
/// `K((X₁,U),(X₂,V)) = (2πi)⁻² ∮∮ Φ(X₁;z)/Φ(X₂;w) · w/(z−w) · dw dz / (z^{U+1} w^{1−V})`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel {
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub contour: ContourChoice,
    pub precision: Precision,
    /// Convergence threshold relative to `max(1, |K|)`.
    pub tol: f64,
    pub max_nodes: usize,
}

impl FiniteKernel {
    pub fn new(n: u32, alpha: f64, beta: f64) -> Result<Self> {
        check_weights(alpha, beta)?;
        if n == 0 {
            return Err(Error::InvalidParameter("tower size must be at least 1".into()));
        }
        Ok(FiniteKernel {
            n,
            alpha,
            beta,
            contour: ContourChoice::Default,
            precision: Precision::Double,
            tol: 1e-10,
            max_nodes: 1 << 15,
        })
    }

    /// Settings for large towers: per-entry contour search and 128-bit
    /// arithmetic.
    pub fn large(n: u32, alpha: f64, beta: f64) -> Result<Self> {
        Ok(FiniteKernel { contour: ContourChoice::Optimized, precision: Precision::Extended, max_nodes: 1 << 13, ..Self::new(n, alpha, beta)? })
    }

    pub fn spec_for(&self, p1: LatticeCoord, p2: LatticeCoord) -> Result<ContourSpec> {
        let s = match self.contour {
            ContourChoice::Default => ContourSpec::default_for(self.alpha, self.beta)?,
            ContourChoice::Optimized => ContourSpec::optimized(p1, p2, self.n, self.alpha, self.beta)?,
            ContourChoice::Fixed(s) => s,
        };
        s.validate(self.alpha, self.beta)?;
        Ok(s)
    }

    pub fn eval(&self, p1: LatticeCoord, p2: LatticeCoord) -> Result<KernelValue> {
        let spec = self.spec_for(p1, p2)?;
        Ok(self.converge(&spec, p2, &[p1])?[0])
    }

    /// `K(p, black)` for every `p` in `firsts`, sharing the work done for the
    /// second argument.
    pub fn column(&self, black: LatticeCoord, firsts: &[LatticeCoord]) -> Result<Vec<KernelValue>> {
        match self.contour {
            ContourChoice::Optimized => firsts.iter().map(|&p| self.eval(p, black)).collect(),
            _ => {
                let spec = self.spec_for(black, black)?;
                self.converge(&spec, black, firsts)
            }
        }
    }

    fn converge(&self, spec: &ContourSpec, p2: LatticeCoord, firsts: &[LatticeCoord]) -> Result<Vec<KernelValue>> {
        let mut m = spec.m;
        let mut prev = self.sum(spec, m, p2, firsts);
        let mut last = f64::INFINITY;
        loop {
            let m2 = 2 * m;
            if m2 > self.max_nodes {
                return Err(Error::Convergence { change: last, m });
            }
            let next = self.sum(spec, m2, p2, firsts);
            let mut worst: f64 = 0.0;
            let mut ok = true;
            for (a, b) in prev.iter().zip(&next) {
                let d = (a - b).norm();
                worst = worst.max(d);
                if !(d < self.tol * b.norm().max(1.0)) {
                    ok = false;
                }
            }
            if ok {
                return Ok(next.into_iter().map(|value| KernelValue { value, m: m2, change: worst }).collect());
            }
            prev = next;
            m = m2;
            last = worst;
        }
    }

    fn sum(&self, spec: &ContourSpec, m: usize, p2: LatticeCoord, firsts: &[LatticeCoord]) -> Vec<C64> {
        match self.precision {
            Precision::Double => trapezoid::<f64>(self.n, self.alpha, self.beta, spec, m, p2, firsts),
            Precision::Extended => trapezoid::<Xf>(self.n, self.alpha, self.beta, spec, m, p2, firsts),
        }
    }
}

/// The kernel with an explicit contour, in double precision, doubling the
/// node count from `spec.m` until two successive values agree to `10⁻¹⁰`.
pub fn finite_kernel(
    p1: LatticeCoord,
    p2: LatticeCoord,
    n: u32,
    alpha: f64,
    beta: f64,
    spec: &ContourSpec,
) -> Result<KernelValue> {
    let fk = FiniteKernel { contour: ContourChoice::Fixed(*spec), ..FiniteKernel::new(n, alpha, beta)? };
    fk.eval(p1, p2)
}

/// Log-scaled samples `v_i = exp(l_i − max Re l)` with the scale returned.
fn normalise<T: Real>(logs: Vec<Complex<T>>) -> (Vec<Complex<T>>, T) {
    let mut top = logs[0].re.clone();
    for l in &logs {
        if l.re > top {
            top = l.re.clone();
        }
    }
    let vals = logs.into_iter().map(|l| cexp(&Complex::new(l.re - top.clone(), l.im))).collect();
    (vals, top)
}

/// Trapezoid rule on both circles with `m` equispaced nodes at equal angles,
/// so that `z_i R e^{iθ_i}/(z_i − w_j)` only depends on `j − i`.
fn trapezoid<T: Real>(
    n: u32,
    alpha: f64,
    beta: f64,
    spec: &ContourSpec,
    m: usize,
    p2: LatticeCoord,
    firsts: &[LatticeCoord],
) -> Vec<C64> {
    let (al, be) = (T::from_f64(alpha), T::from_f64(beta));
    let c = Complex::new(T::from_f64(spec.center), T::zero());
    let step = T::pi() * T::from_f64(2.0) / T::from_i64(m as i64);
    let nodes: Vec<Complex<T>> = (0..m).map(|k| cis(&(step.clone() * T::from_i64(k as i64)))).collect();
    let time = n as i64;
    let mut out = vec![C64::zero(); firsts.len()];
    for z_outer in [true, false] {
        let idx: Vec<usize> = (0..firsts.len()).filter(|&i| (firsts[i].x >= p2.x) == z_outer).collect();
        if idx.is_empty() {
            continue;
        }
        let (rz, rw) = if z_outer { (spec.r_outer, spec.r_inner) } else { (spec.r_inner, spec.r_outer) };
        let (rz_t, rw_t) = (T::from_f64(rz), T::from_f64(rw));
        let lg: Vec<Complex<T>> = nodes
            .iter()
            .map(|e| {
                let w = c.clone() + e.clone() * rw_t.clone();
                cln(&w) * T::from_i64(p2.u) - log_phi(p2.x, time, &w, &al, &be)
            })
            .collect();
        let (g, g_scale) = normalise(lg);
        let g: Vec<Complex<T>> = g.into_iter().zip(&nodes).map(|(g, e)| g * e.clone() * rw_t.clone()).collect();
        let h: Vec<Complex<T>> = nodes
            .iter()
            .map(|e| Complex::new(rz_t.clone(), T::zero()) / (Complex::new(rz_t.clone(), T::zero()) - e.clone() * rw_t.clone()))
            .collect();
        let hh: Vec<Complex<T>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut acc = Complex::<T>::zero();
                for (j, gj) in g.iter().enumerate() {
                    let d = if j >= i { j - i } else { j + m - i };
                    acc = acc + gj.clone() * h[d].clone();
                }
                acc
            })
            .collect();
        let zs: Vec<Complex<T>> = nodes.iter().map(|e| c.clone() + e.clone() * rz_t.clone()).collect();
        let lnz: Vec<Complex<T>> = zs.iter().map(cln).collect();
        for &i in &idx {
            let p1 = firsts[i];
            let lf: Vec<Complex<T>> = zs
                .iter()
                .zip(&lnz)
                .map(|(z, lz)| log_phi(p1.x, time, z, &al, &be) - lz.clone() * T::from_i64(p1.u + 1))
                .collect();
            let (f, f_scale) = normalise(lf);
            let mut s = Complex::<T>::zero();
            for (fi, hi) in f.iter().zip(&hh) {
                s = s + fi.clone() * hi.clone();
            }
            let scale = (f_scale.clone() + g_scale.clone()).to_f64() - 2.0 * (m as f64).ln();
            out[i] = c_to_f64(&s) * scale.exp();
        }
    }
    out
}

/// Exponents `(a, b, c, d)` of the Gibbs integrand
/// `(1+βz)^a (1−1/z)^b (1−α/z)^c z^d` for the entry `(w(X',U'), b(X,U))`.
pub fn gibbs_exponents(white: LatticeCoord, black: LatticeCoord) -> (i64, i64, i64, i64) {
    let (tp, mp) = white.k_m();
    let (t, m) = black.k_m();
    let ind = |b: bool| b as i64;
    (
        t - tp,
        tp - t + ind(mp == 1) - ind(m == 1),
        tp - t - ind(mp == 3) + ind(m == 3),
        black.u - white.u - 1,
    )
}

pub fn gibbs_integrand(gp: &GibbsPoint, white: LatticeCoord, black: LatticeCoord, z: C64) -> C64 {
    let (a, b, c, d) = gibbs_exponents(white, black);
    let zi = z.inv();
    (1.0 + z * gp.beta).powi(a as i32) * (1.0 - zi).powi(b as i32) * (1.0 - zi * gp.alpha).powi(c as i32) * z.powi(d as i32)
}

const ARC_TOL: f64 = 1e-15;

/// `K^{z₀}(w(X',U'), b(X,U)) = (2πi)⁻¹ ∫_{z̄₀}^{z₀} …dz`, the path crossing
/// `(0,∞)` when `X' ≥ X` and `(−∞,0)` otherwise.
pub fn gibbs_kernel(gp: &GibbsPoint, white: LatticeCoord, black: LatticeCoord) -> Result<C64> {
    if lattice_coord_colors(white, black).is_err() {
        return Err(Error::InvalidParameter(format!("w{white} / b{black} are not a white and a black vertex")));
    }
    let positive = white.x >= black.x;
    if gp.is_liquid() {
        let r = gp.z0.norm();
        let phi0 = gp.z0.arg();
        let (a, b) = if positive { (-phi0, phi0) } else { (phi0 - 2.0 * std::f64::consts::PI, -phi0) };
        // the integrand in θ is f(z) i z; integrate over [a, b] and orient
        let f = |th: f64| {
            let z = C64::from_polar(r, th);
            gibbs_integrand(gp, white, black, z) * C64::i() * z
        };
        let re = quadrature::clenshaw_curtis::integrate(|t| f(t).re, a, b, ARC_TOL);
        let im = quadrature::clenshaw_curtis::integrate(|t| f(t).im, a, b, ARC_TOL);
        let v = C64::new(re.integral, im.integral) / (2.0 * std::f64::consts::PI * C64::i());
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Pole(format!("integrand blew up on the arc |z| = {r}")));
        }
        Ok(if positive { v } else { -v })
    } else {
        frozen_kernel(gp, white, black, positive)
    }
}

fn lattice_coord_colors(white: LatticeCoord, black: LatticeCoord) -> Result<()> {
    use crate::lattice::{has_color, Color};
    if has_color(white, Color::White) && has_color(black, Color::Black) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("bad colors".into()))
    }
}

/// The `Im z₀ → 0⁺` limit: a closed circle with diameter `[x₀, p]` for a
/// crossing point `p` on the prescribed half axis.
fn frozen_kernel(gp: &GibbsPoint, white: LatticeCoord, black: LatticeCoord, positive: bool) -> Result<C64> {
    let x0 = gp.z0.re;
    if (x0 > 0.0) == positive {
        return Ok(C64::zero());
    }
    let poles = [0.0, 1.0, gp.alpha, -1.0 / gp.beta];
    let mut marks: Vec<f64> = if positive {
        let top = gp.alpha.max(1.0);
        vec![0.0, 1.0, gp.alpha, 2.0 * top + 1.0]
    } else {
        let nb = -1.0 / gp.beta;
        vec![2.0 * nb - 1.0, nb, 0.0]
    };
    marks.sort_by(f64::total_cmp);
    let mut best: Option<(f64, f64)> = None;
    for pair in marks.windows(2) {
        if pair[1] - pair[0] < POLE_EPS {
            continue;
        }
        let p = 0.5 * (pair[0] + pair[1]);
        let (cen, rad) = (0.5 * (x0 + p), 0.5 * (p - x0).abs());
        let clear = poles.iter().map(|q| (rad - (q - cen).abs()).abs() / rad).fold(f64::INFINITY, f64::min);
        if best.map_or(true, |(c, _)| clear > c) {
            best = Some((clear, p));
        }
    }
    let (clear, p) = best.ok_or_else(|| Error::Contour("no crossing point available".into()))?;
    if clear < 1e-6 {
        return Err(Error::Pole(format!("frozen contour through {x0} passes a pole")));
    }
    let (cen, rad) = (0.5 * (x0 + p), 0.5 * (p - x0).abs());
    let loop_sum = |m: usize| {
        let mut s = C64::zero();
        for k in 0..m {
            let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m as f64);
            let z = cen + e * rad;
            s += gibbs_integrand(gp, white, black, z) * e * rad;
        }
        s / m as f64
    };
    let mut m = 256;
    let mut prev = loop_sum(m);
    loop {
        m *= 2;
        let next = loop_sum(m);
        let change = (next - prev).norm();
        if change < 1e-14 * next.norm().max(1.0) {
            return Ok(if p > x0 { next } else { -next });
        }
        if m >= 1 << 18 {
            return Err(Error::Convergence { change, m });
        }
        prev = next;
    }
}

/// Signed Kasteleyn entry `K(b, w)` in floating point.
pub fn kasteleyn_entry(key: EdgeKey, alpha: f64, beta: f64) -> Option<f64> {
    let (kind, sign) = lattice_edge(key.white, key.black)?;
    let w = match kind {
        EdgeKind::Unit => 1.0,
        EdgeKind::Alpha => alpha,
        EdgeKind::Beta => beta,
    };
    Some(sign as f64 * w)
}

/// `P(e ∈ M) = K(b,w) · K^{z₀}(w,b)` under the Gibbs measure.
pub fn gibbs_edge_probability(gp: &GibbsPoint, key: EdgeKey) -> Result<C64> {
    let k = kasteleyn_entry(key, gp.alpha, gp.beta).ok_or_else(|| Error::EdgeNotInGraph(key.to_string()))?;
    Ok(gibbs_kernel(gp, key.white, key.black)? * k)
}

fn edge(wx: i64, wu: i64, bx: i64, bu: i64) -> EdgeKey {
    EdgeKey { white: LatticeCoord::new(wx, wu), black: LatticeCoord::new(bx, bu) }
}

/// The edges with probabilities `p₁ … p₄` near `(X₀, U₀)`, `X₀ ≡ 0 (mod 3)`:
/// `w(0,0)−b(−1,1)`, `w(−2,1)−b(−1,0)`, `w(0,0)−b(1,0)`, `w(1,0)−b(1,0)`.
pub fn probe_edges(x0: i64, u0: i64) -> [EdgeKey; 4] {
    [
        edge(x0, u0, x0 - 1, u0 + 1),
        edge(x0 - 2, u0 + 1, x0 - 1, u0),
        edge(x0, u0, x0 + 1, u0),
        edge(x0 + 1, u0, x0 + 1, u0),
    ]
}

/// All seven edges at the whites `w(0,0)` and `w(1,0)` of a fundamental domain.
pub fn fundamental_edges() -> Vec<EdgeKey> {
    use crate::lattice::{incident_edges, Color};
    let one = num_rational::BigRational::one();
    let mut out = Vec::new();
    for w in [LatticeCoord::new(0, 0), LatticeCoord::new(1, 0)] {
        for e in incident_edges(w, Color::White, &one, &one).expect("white vertex") {
            out.push(e.key());
        }
    }
    out
}

/// Closed forms of `p₁ … p₄` at a liquid `z₀`, in terms of
/// `θ_β = arg(1+βz₀)`, `θ_z = arg z₀`, `θ₁ = arg(z₀−1)`, `θ_α = arg(z₀−α)`.
pub fn probe_probabilities_closed_form(gp: &GibbsPoint) -> [f64; 4] {
    let z = gp.z0;
    let pi = std::f64::consts::PI;
    let tb = (1.0 + z * gp.beta).arg().abs();
    let tz = z.arg().abs();
    let t1 = (z - 1.0).arg().abs();
    let ta = (z - gp.alpha).arg().abs();
    [tb / pi, (t1 - tz) / pi, 1.0 - ta / pi, tz / pi]
}

/// The generic path is exposed for callers that want extended precision with
/// their own contour.
pub fn finite_kernel_with<T: Real>(
    p1: LatticeCoord,
    p2: LatticeCoord,
    n: u32,
    alpha: f64,
    beta: f64,
    spec: &ContourSpec,
    m: usize,
) -> C64 {
    trapezoid::<T>(n, alpha, beta, spec, m, p2, &[p1])[0]
}
