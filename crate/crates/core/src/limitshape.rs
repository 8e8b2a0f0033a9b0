//! Limit shapes: the action `S(z; x, u)`, its critical points, the
//! liquid/frozen classification of the rescaled tower
//! `𝔗 = {0 ≤ x ≤ 1, −2x ≤ u ≤ 1−x}`, slopes, the current and the uniform
//! closed forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{w_of_z, CharPoly, GibbsPoint, C64};

/// Roots with `|Im|` below this are treated as real.
pub const PAIR_THRESHOLD: f64 = 1e-9;

/// Minimum `−disc` accepted by [`hydro_residual`].
pub const HYDRO_GUARD: f64 = 0.2;

pub fn in_domain(x: f64, u: f64) -> bool {
    (0.0..=1.0).contains(&x) && u >= -2.0 * x && u <= 1.0 - x
}

fn check_domain(x: f64, u: f64) -> Result<()> {
    if in_domain(x, u) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("({x}, {u}) is outside the rescaled tower")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub x: f64,
    pub u: f64,
}

impl Action {
    pub fn new(alpha: f64, beta: f64, x: f64, u: f64) -> Self {
        Action { alpha1: 1.0, alpha2: alpha, beta, x, u }
    }

    /// `x(log(1−α₁/z) + log(1−α₂/z)) − u log z + (1−x) log(1+βz)`, principal logs.
    pub fn s(&self, z: C64) -> C64 {
        self.x * ((1.0 - self.alpha1 / z).ln() + (1.0 - self.alpha2 / z).ln()) - self.u * z.ln()
            + (1.0 - self.x) * (1.0 + self.beta * z).ln()
    }

    pub fn ds(&self, z: C64) -> C64 {
        self.x * (self.alpha1 / (z * (z - self.alpha1)) + self.alpha2 / (z * (z - self.alpha2))) - self.u / z
            + (1.0 - self.x) * self.beta / (1.0 + self.beta * z)
    }

    pub fn d2s(&self, z: C64) -> C64 {
        let part = |a: f64| -a * (2.0 * z - a) / (z * (z - a)).powi(2);
        self.x * (part(self.alpha1) + part(self.alpha2)) + self.u / (z * z)
            - (1.0 - self.x) * self.beta * self.beta / (1.0 + self.beta * z).powi(2)
    }
}

/// Coefficients `[c₀, c₁, c₂, c₃]` of `z(z−1)(z−α)(1+βz) ∂_z S`.
pub fn critical_cubic_coeffs(x: f64, u: f64, alpha: f64, beta: f64) -> [f64; 4] {
    let (a, b) = (alpha, beta);
    [
        -a * u - 2.0 * a * x,
        a * b + u + a * u - a * b * u + x + a * x - 3.0 * a * b * x,
        -b - a * b - u + b * u + a * b * u + 2.0 * b * x + 2.0 * a * b * x,
        b - b * u - b * x,
    ]
}

/// `18abcd − 4b³d + b²c² − 4ac³ − 27a²d²` for `az³ + bz² + cz + d`; negative
/// exactly when there is a conjugate pair of non-real roots.
pub fn cubic_discriminant(c: &[f64; 4]) -> f64 {
    let (d, cc, b, a) = (c[0], c[1], c[2], c[3]);
    18.0 * a * b * cc * d - 4.0 * b.powi(3) * d + b * b * cc * cc - 4.0 * a * cc.powi(3) - 27.0 * a * a * d * d
}

fn eval_poly(c: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &k in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + k;
    }
    (p, dp)
}

fn polish(c: &[f64], mut z: C64) -> C64 {
    let (mut p, _) = eval_poly(c, z);
    for _ in 0..8 {
        let (_, dp) = eval_poly(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, _) = eval_poly(c, cand);
        if pc.norm() < p.norm() {
            z = cand;
            p = pc;
        } else {
            break;
        }
    }
    z
}

/// Roots of `c₃z³ + c₂z² + c₁z + c₀` by the trigonometric/Cardano formulas,
/// each refined by Newton steps. Drops to the quadratic when `c₃` vanishes.
pub fn cubic_roots(c: &[f64; 4]) -> Vec<C64> {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    if c[3].abs() <= 1e-14 * scale {
        return quadratic_roots(c[2], c[1], c[0]);
    }
    let (a, b, cc) = (c[2] / c[3], c[1] / c[3], c[0] / c[3]);
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + cc;
    let shift = -a / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let raw: Vec<C64> = if disc > 0.0 {
        let sd = disc.sqrt();
        let u = (-q / 2.0 + sd).cbrt();
        let v = (-q / 2.0 - sd).cbrt();
        let re = -(u + v) / 2.0 + shift;
        let im = 3f64.sqrt() / 2.0 * (u - v);
        vec![C64::new(u + v + shift, 0.0), C64::new(re, im.abs()), C64::new(re, -im.abs())]
    } else if p == 0.0 {
        vec![C64::new(shift, 0.0); 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let th = arg.acos() / 3.0;
        (0..3).map(|k| C64::new(m * (th - 2.0 * PI * k as f64 / 3.0).cos() + shift, 0.0)).collect()
    };
    raw.into_iter()
        .map(|z| {
            let r = polish(c, z);
            if z.im == 0.0 {
                C64::new(r.re, 0.0)
            } else {
                r
            }
        })
        .collect()
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<C64> {
    if a == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![C64::new(-c / b, 0.0)] };
    }
    let d = b * b - 4.0 * a * c;
    if d >= 0.0 {
        let s = d.sqrt();
        let q = -0.5 * (b + b.signum() * s);
        let r1 = q / a;
        let r2 = if q != 0.0 { c / q } else { r1 };
        vec![C64::new(r1, 0.0), C64::new(r2, 0.0)]
    } else {
        let s = (-d).sqrt() / (2.0 * a.abs());
        let re = -b / (2.0 * a);
        vec![C64::new(re, s), C64::new(re, -s)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionLabel {
    Liquid,
    /// Index `1..=5` of the real interval `(−∞,−1/β), (−1/β,0), (0,α∧1), (α∧1,α∨1), (α∨1,∞)`.
    Frozen(u8),
    Boundary,
}

/// Index `1..=5` of the frozen interval containing the real point `r`, or
/// `None` within `PAIR_THRESHOLD` of an endpoint.
pub fn frozen_interval(r: f64, alpha: f64, beta: f64) -> Option<u8> {
    let cuts = [-1.0 / beta, 0.0, alpha.min(1.0), alpha.max(1.0)];
    if cuts.iter().any(|c| (r - c).abs() < PAIR_THRESHOLD) {
        return None;
    }
    Some(1 + cuts.iter().filter(|&&c| c < r).count() as u8)
}

#[derive(Debug, Clone, PartialEq)]
struct Analysis {
    label: RegionLabel,
    point: C64,
}

fn analyse(x: f64, u: f64, alpha: f64, beta: f64) -> Analysis {
    let coeffs = critical_cubic_coeffs(x, u, alpha, beta);
    let roots = cubic_roots(&coeffs);
    let top = roots.iter().copied().max_by(|a, b| a.im.total_cmp(&b.im));
    if let Some(z) = top {
        if z.im > PAIR_THRESHOLD {
            return Analysis { label: RegionLabel::Liquid, point: z };
        }
        if z.im > 0.0 {
            return Analysis { label: RegionLabel::Boundary, point: C64::new(z.re, 0.0) };
        }
    }
    let act = Action::new(alpha, beta, x, u);
    for k in 1..=5u8 {
        let inside: Vec<f64> =
            roots.iter().map(|z| z.re).filter(|&r| frozen_interval(r, alpha, beta) == Some(k)).collect();
        if inside.len() >= 2 {
            let pick = inside
                .iter()
                .copied()
                .find(|&r| act.d2s(C64::new(r, 0.0)).re < 0.0)
                .unwrap_or(inside[0]);
            return Analysis { label: RegionLabel::Frozen(k), point: C64::new(pick, 0.0) };
        }
    }
    let re = roots.first().map_or(0.0, |z| z.re);
    Analysis { label: RegionLabel::Boundary, point: C64::new(re, 0.0) }
}

pub fn classify(x: f64, u: f64, alpha: f64, beta: f64) -> Result<RegionLabel> {
    check_domain(x, u)?;
    Ok(analyse(x, u, alpha, beta).label)
}

/// The critical point of `S` in the closed upper half plane: the non-real
/// root when there is a conjugate pair, otherwise the local maximum of `S`
/// among the two real roots sharing a frozen interval.
pub fn critical_point(x: f64, u: f64, alpha: f64, beta: f64) -> Result<C64> {
    check_domain(x, u)?;
    Ok(analyse(x, u, alpha, beta).point)
}

/// `(1 − 3x)² − 4(−u − 2x)(−1 + u + x)`, negative in the liquid region of
/// the uniform model.
pub fn uniform_discriminant(x: f64, u: f64) -> f64 {
    (1.0 - 3.0 * x).powi(2) - 4.0 * (-u - 2.0 * x) * (-1.0 + u + x)
}

/// Closed form of the critical point for `α = β = 1`, branch in `Im ≥ 0`.
pub fn z_uniform(x: f64, u: f64) -> Result<C64> {
    check_domain(x, u)?;
    let den = 2.0 * (-1.0 + u + x);
    if den == 0.0 {
        return Err(Error::Degenerate(format!("({x}, {u}) lies on the top edge u = 1 − x")));
    }
    let s = C64::new(uniform_discriminant(x, u), 0.0).sqrt();
    let plus = (-1.0 + 3.0 * x + s) / den;
    Ok(if plus.im >= 0.0 { plus } else { (-1.0 + 3.0 * x - s) / den })
}

fn angles(gp: &GibbsPoint) -> (f64, f64, f64, f64) {
    let z = gp.z0;
    ((1.0 + gp.beta * z).arg().abs(), z.arg().abs(), (z - 1.0).arg().abs(), (z - gp.alpha).arg().abs())
}

/// `s = (θ_β + θ_z − θ₁ − θ_α)/π`, `t = θ_z/π`.
pub fn slopes_of(gp: &GibbsPoint) -> (f64, f64) {
    let (tb, tz, t1, ta) = angles(gp);
    ((tb + tz - t1 - ta) / PI, tz / PI)
}

/// Whether `(s, t)` lies in the Newton polygon `{0 ≤ t ≤ 1, t − 2 ≤ s ≤ 0}`.
pub fn in_newton_polygon(s: f64, t: f64, tol: f64) -> bool {
    t >= -tol && t <= 1.0 + tol && s <= tol && s >= t - 2.0 - tol
}

/// Distance in `ℝ²/ℤ²` between `(s, t)` and `±(−arg w₀, arg z₀)/π`, the
/// better of the two signs.
pub fn slope_reconciliation(gp: &GibbsPoint) -> f64 {
    let (s, t) = slopes_of(gp);
    let w0 = gp.w0();
    let (a, b) = (-w0.arg() / PI, gp.z0.arg() / PI);
    let frac = |v: f64| (v - v.round()).abs();
    [1.0, -1.0].iter().map(|sg| frac(s - sg * a).max(frac(t - sg * b))).fold(f64::INFINITY, f64::min)
}

/// Residuals of `sin θ_β / sin(θ_z − θ_β) = β|z₀|`, `sin θ_α / sin(θ_α − θ_z) = |z₀|/α`
/// and `sin θ₁ / sin(θ₁ − θ_z) = |z₀|`, each relative to `1 + |rhs|`.
pub fn law_of_sines_residuals(gp: &GibbsPoint) -> [f64; 3] {
    let (tb, tz, t1, ta) = angles(gp);
    let r = gp.z0.norm();
    let rel = |l: f64, rhs: f64| (l - rhs).abs() / (1.0 + rhs.abs());
    [
        rel(tb.sin() / (tz - tb).sin(), gp.beta * r),
        rel(ta.sin() / (ta - tz).sin(), r / gp.alpha),
        rel(t1.sin() / (t1 - tz).sin(), r),
    ]
}

/// `J = −arg(1 + βz₀)/π`.
pub fn current(gp: &GibbsPoint) -> f64 {
    -(1.0 + gp.beta * gp.z0).arg() / PI
}

/// Mean of `J` over the circle of radius `r` around `z₀` with `nodes`
/// equispaced samples.
pub fn current_circle_mean(gp: &GibbsPoint, r: f64, nodes: usize) -> f64 {
    let sum: f64 = (0..nodes)
        .map(|k| {
            let z = gp.z0 + C64::from_polar(r, 2.0 * PI * k as f64 / nodes as f64);
            -(1.0 + gp.beta * z).arg() / PI
        })
        .sum();
    sum / nodes as f64
}

/// `|−βw − (x z P_z + y w P_w)|` at `(z, w(z))` with `y = x + u`.
pub fn characteristics_residual(z: C64, x: f64, u: f64, alpha: f64, beta: f64) -> Result<f64> {
    let w = w_of_z(z, alpha, beta)?;
    let cp = CharPoly::new(alpha, beta)?;
    let y = x + u;
    Ok((-beta * w - (x * z * cp.p_z(z, w) + y * w * cp.p_w(z))).norm())
}

/// `arg z` at `(x, u)` of the uniform model, `0` or `π` in frozen parts.
fn uniform_arg(x: f64, u: f64) -> f64 {
    match z_uniform(x, u) {
        Ok(z) if uniform_discriminant(x, u) < 0.0 => z.arg().abs(),
        _ => {
            let z = analyse(x, u, 1.0, 1.0).point;
            if z.re < 0.0 {
                PI
            } else {
                0.0
            }
        }
    }
}

/// `h_τ(x,u) = −(1/π) ∫_u^{τ−x} arg z(x/τ, u'/τ) du'` for `α = β = 1`; the
/// integrand vanishes identically above the domain.
pub fn limit_height(x: f64, u: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let (xi, eta) = (x / tau, u / tau);
    check_domain(xi, eta)?;
    let top = 1.0 - xi;
    // zeros of the uniform discriminant in η split the liquid part off
    let half = (8.0 * xi * (1.0 - xi)).max(0.0).sqrt() / 2.0;
    let mid = (1.0 - 3.0 * xi) / 2.0;
    let mut cuts = vec![eta];
    for c in [mid - half, mid + half] {
        if c > eta && c < top {
            cuts.push(c);
        }
    }
    cuts.push(top);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let m = 0.5 * (a + b);
        if uniform_discriminant(xi, m) < 0.0 {
            let out = quadrature::double_exponential::integrate(|e| uniform_arg(xi, e), a, b, 1e-13);
            if !out.integral.is_finite() {
                return Err(Error::Convergence { change: out.error_estimate, m: out.num_function_evaluations as usize });
            }
            total += out.integral;
        } else {
            total += uniform_arg(xi, m) * (b - a);
        }
    }
    Ok(-tau * total / PI)
}

/// `|(z_ξ ξ + z_η η)/z − z_η/(1+z)|` at `(ξ, η) = (x/τ, u/τ)` with central
/// differences of step `step`.
pub fn hydro_residual(x: f64, u: f64, tau: f64, step: f64) -> Result<f64> {
    if !(tau > 0.0 && step > 0.0) {
        return Err(Error::InvalidParameter("tau and step must be positive".into()));
    }
    let (xi, eta) = (x / tau, u / tau);
    check_domain(xi, eta)?;
    let d = uniform_discriminant(xi, eta);
    if -d < HYDRO_GUARD {
        return Err(Error::TooCloseToArctic(d));
    }
    let z = z_uniform(xi, eta)?;
    let zx = (z_uniform(xi + step, eta)? - z_uniform(xi - step, eta)?) / (2.0 * step);
    let zu = (z_uniform(xi, eta + step)? - z_uniform(xi, eta - step)?) / (2.0 * step);
    Ok(((zx * xi + zu * eta) / z - zu / (1.0 + z)).norm())
}

/// The arctic curve as points of the discriminant-zero locus, ordered by angle
/// around their centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcticCurve {
    pub alpha: f64,
    pub beta: f64,
    pub points: Vec<(f64, f64)>,
}

fn liquid_sign(x: f64, u: f64, alpha: f64, beta: f64) -> bool {
    cubic_discriminant(&critical_cubic_coeffs(x, u, alpha, beta)) < 0.0
}

fn bisect(mut lo: (f64, f64), mut hi: (f64, f64), alpha: f64, beta: f64) -> (f64, f64) {
    let s_lo = liquid_sign(lo.0, lo.1, alpha, beta);
    for _ in 0..60 {
        let m = (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
        if liquid_sign(m.0, m.1, alpha, beta) == s_lo {
            lo = m;
        } else {
            hi = m;
        }
    }
    (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1))
}

pub fn arctic_curve(alpha: f64, beta: f64, resolution: usize) -> Result<ArcticCurve> {
    if resolution < 16 {
        return Err(Error::InvalidParameter(format!("resolution {resolution} is below 16")));
    }
    CharPoly::new(alpha, beta)?;
    let r = resolution;
    let mut pts = Vec::new();
    let mut scan = |line: &dyn Fn(f64) -> (f64, f64)| {
        let mut prev = line(0.0);
        let mut s_prev = liquid_sign(prev.0, prev.1, alpha, beta);
        for j in 1..=r {
            let cur = line(j as f64 / r as f64);
            let s = liquid_sign(cur.0, cur.1, alpha, beta);
            if s != s_prev {
                pts.push(bisect(prev, cur, alpha, beta));
            }
            prev = cur;
            s_prev = s;
        }
    };
    for i in 1..r {
        let x = i as f64 / r as f64;
        scan(&|t| (x, -2.0 * x + t * (1.0 + x)));
    }
    for i in 1..r {
        let u = -2.0 + 3.0 * i as f64 / r as f64;
        let (a, b) = ((-u / 2.0).max(0.0), (1.0 - u).min(1.0));
        if b > a {
            scan(&|t| (a + t * (b - a), u));
        }
    }
    if !pts.is_empty() {
        let n = pts.len() as f64;
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let cu = pts.iter().map(|p| p.1).sum::<f64>() / n;
        pts.sort_by(|p, q| (p.1 - cu).atan2(p.0 - cx).total_cmp(&(q.1 - cu).atan2(q.0 - cx)));
    }
    Ok(ArcticCurve { alpha, beta, points: pts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_center() {
        let z = z_uniform(0.5, 0.0).unwrap();
        assert!((z - C64::new(-0.5, 1.3228756555322954)).norm() < 1e-12);
        let c = critical_point(0.5, 0.0, 1.0, 1.0).unwrap();
        assert!((c - z).norm() < 1e-10);
        assert_eq!(classify(0.5, 0.0, 1.0, 1.0).unwrap(), RegionLabel::Liquid);
    }

    #[test]
    fn top_coefficient() {
        let c = critical_cubic_coeffs(0.3, 0.1, 2.0, 3.0);
        assert!((c[3] - 3.0 * (1.0 - 0.1 - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn cubic_vs_action() {
        let a = Action::new(2.0, 0.5, 0.4, -0.1);
        for z in cubic_roots(&critical_cubic_coeffs(0.4, -0.1, 2.0, 0.5)) {
            assert!(a.ds(z).norm() < 1e-12, "{z}");
        }
    }

    #[test]
    fn slopes_at_i() {
        let gp = GibbsPoint::new(C64::i(), 1.0, 1.0).unwrap();
        let (s, t) = slopes_of(&gp);
        assert!((t - 0.5).abs() < 1e-15 && (s + 0.75).abs() < 1e-15);
        assert!((current(&gp) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn frozen_corner() {
        assert!(matches!(classify(1e-4, 1.0 - 2e-4, 1.0, 1.0).unwrap(), RegionLabel::Frozen(_)));
    }
}
