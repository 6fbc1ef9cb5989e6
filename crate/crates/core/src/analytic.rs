//! Closed-form STFT coefficient of a windowed tone `cos(ω_t i + θ)`.
//!
//! Everything here is expressed through the geometric trigonometric sums
//! `f(γ, θ, N) = Σ sin(γi + θ)` and `g(γ, θ, N) = Σ cos(γi + θ)` over
//! `i = 0..N`, whose closed forms share the kernel `s(γ, N)`.
//!
//! Angles written `arctan(x, y)` in the derivation take the abscissa first;
//! in code they are always `y.atan2(x)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::angle::{principal_angle_2pi, principal_angle_pi};
use crate::error::{Error, Result};
use crate::stft::coefficient_phase;
use crate::window::{WindowMode, WindowSpec};

const SINGULAR_GUARD: f64 = 1e-12;

/// `s(γ, N) = sin(Nγ/2) / sin(γ/2)`, continuous through `γ = 2πm`.
pub fn dirichlet_s(gamma: f64, n: usize) -> f64 {
    let nf = n as f64;
    let half = 0.5 * gamma;
    let den = half.sin();
    if den.abs() < SINGULAR_GUARD {
        nf * (nf * half).cos() / half.cos()
    } else {
        (nf * half).sin() / den
    }
}

/// Closed forms of `(Σ sin(γi + θ), Σ cos(γi + θ))` for `i = 0..N`.
pub fn trig_sums_fg(gamma: f64, theta: f64, n: usize) -> (f64, f64) {
    let s = dirichlet_s(gamma, n);
    let arg = 0.5 * (n as f64 - 1.0) * gamma + theta;
    (s * arg.sin(), s * arg.cos())
}

/// Which side of the analysis frequency a tone lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToneSide {
    /// `ω_t < ω_k`
    Below,
    /// `ω_t > ω_k`
    Above,
}

/// A tone frequency, an analysis bin and a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticContext {
    omega_t: f64,
    bin: usize,
    n: usize,
    alpha: f64,
    mode: WindowMode,
}

impl AnalyticContext {
    pub fn new(omega_t: f64, bin: usize, n: usize, alpha: f64, mode: WindowMode) -> Result<Self> {
        WindowSpec::new(alpha, mode, n)?;
        if !(0.0..=PI).contains(&omega_t) {
            return Err(Error::Config(format!(
                "tone frequency {omega_t} outside [0, π]"
            )));
        }
        if bin == 0 || bin >= n / 2 {
            return Err(Error::BinOutOfRange {
                bin,
                max: n / 2 - 1,
            });
        }
        Ok(AnalyticContext {
            omega_t,
            bin,
            n,
            alpha,
            mode,
        })
    }

    /// Rectangular-window context.
    pub fn rectangular(omega_t: f64, bin: usize, n: usize) -> Result<Self> {
        Self::new(omega_t, bin, n, 0.0, WindowMode::Periodic)
    }

    /// Context whose analysis frequency is given in radians; it must be a bin.
    pub fn with_omega_k(
        omega_t: f64,
        omega_k: f64,
        n: usize,
        alpha: f64,
        mode: WindowMode,
    ) -> Result<Self> {
        Self::new(omega_t, bin_of(omega_k, n)?, n, alpha, mode)
    }

    pub fn omega_t(&self) -> f64 {
        self.omega_t
    }

    pub fn omega_k(&self) -> f64 {
        TAU * self.bin as f64 / self.n as f64
    }

    pub fn bin(&self) -> usize {
        self.bin
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self) -> WindowMode {
        self.mode
    }

    pub fn window(&self) -> WindowSpec {
        WindowSpec {
            alpha: self.alpha,
            mode: self.mode,
            length: self.n,
        }
    }

    /// `Δ⁺ = ω_t + ω_k`
    pub fn delta_plus(&self) -> f64 {
        self.omega_t + self.omega_k()
    }

    /// `Δ⁻ = ω_t - ω_k`
    pub fn delta_minus(&self) -> f64 {
        self.omega_t - self.omega_k()
    }

    /// `β = 2π / N_w`
    pub fn beta(&self) -> f64 {
        self.window().beta()
    }

    pub fn side(&self) -> Option<ToneSide> {
        let d = self.delta_minus();
        if d < 0.0 {
            Some(ToneSide::Below)
        } else if d > 0.0 {
            Some(ToneSide::Above)
        } else {
            None
        }
    }
}

/// Bin index of `omega_k`, which must sit on the `2π/N` grid inside the
/// unique-phase range.
pub fn bin_of(omega_k: f64, n: usize) -> Result<usize> {
    let k = omega_k * n as f64 / TAU;
    let rounded = k.round();
    if (k - rounded).abs() > 1e-9 * k.abs().max(1.0) || rounded < 1.0 || rounded >= (n / 2) as f64 {
        return Err(Error::NotBinFrequency { omega: omega_k, n });
    }
    Ok(rounded as usize)
}

/// Real and imaginary parts of the windowed-tone coefficient.
pub fn coefficient_re_im(ctx: &AnalyticContext, theta: f64) -> (f64, f64) {
    let n = ctx.n;
    let (dp, dm, beta) = (ctx.delta_plus(), ctx.delta_minus(), ctx.beta());
    let (fp, gp) = trig_sums_fg(dp, theta, n);
    let (fm, gm) = trig_sums_fg(dm, theta, n);
    let mut re = 0.5 * (1.0 - ctx.alpha) * (gp + gm);
    let mut im = 0.5 * (1.0 - ctx.alpha) * (fm - fp);
    if ctx.alpha != 0.0 {
        let (fp1, gp1) = trig_sums_fg(dp - beta, theta, n);
        let (fp2, gp2) = trig_sums_fg(dp + beta, theta, n);
        let (fm1, gm1) = trig_sums_fg(dm - beta, theta, n);
        let (fm2, gm2) = trig_sums_fg(dm + beta, theta, n);
        re -= 0.25 * ctx.alpha * (gp1 + gp2 + gm1 + gm2);
        im -= 0.25 * ctx.alpha * (-fp1 - fp2 + fm1 + fm2);
    }
    (re, im)
}

pub fn coefficient(ctx: &AnalyticContext, theta: f64) -> Complex64 {
    let (re, im) = coefficient_re_im(ctx, theta);
    Complex64::new(re, im)
}

/// `φ_k = F(θ)`. A coefficient too close to zero to have a phase reports 0.
pub fn tone_to_stft_phase(ctx: &AnalyticContext, theta: f64) -> f64 {
    coefficient_phase(coefficient(ctx, theta), ctx.n).unwrap_or(0.0)
}

/// `F` for a fixed context.
#[derive(Debug, Clone, Copy)]
pub struct TonePhaseMap {
    pub context: AnalyticContext,
}

impl TonePhaseMap {
    pub fn new(context: AnalyticContext) -> Self {
        TonePhaseMap { context }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        tone_to_stft_phase(&self.context, theta)
    }

    /// Samples `F` at `points` equally spaced tone phases starting at `-π`.
    pub fn sample(&self, points: usize) -> Vec<(f64, f64)> {
        theta_grid(points).map(|t| (t, self.eval(t))).collect()
    }
}

fn theta_grid(points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |j| -PI + TAU * j as f64 / points as f64)
}

/// Rectangular-window coefficient as `Re = c_re cos(θ + ζ_re)`,
/// `Im = c_im cos(θ + ζ_im)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectDecomposition {
    pub a_re: f64,
    pub b_re: f64,
    pub a_im: f64,
    pub b_im: f64,
    pub c_re: f64,
    pub c_im: f64,
    pub zeta_re: f64,
    pub zeta_im: f64,
}

impl RectDecomposition {
    /// `c_re / c_im`
    pub fn ratio(&self) -> f64 {
        self.c_re / self.c_im
    }

    /// `P_2π(ζ_re - ζ_im)`
    pub fn zeta_difference(&self) -> f64 {
        principal_angle_2pi(self.zeta_re - self.zeta_im)
    }
}

pub fn rect_decompose(omega_t: f64, omega_k: f64, n: usize) -> RectDecomposition {
    let (dp, dm) = (omega_t + omega_k, omega_t - omega_k);
    let (fp, gp) = trig_sums_fg(dp, 0.0, n);
    let (fm, gm) = trig_sums_fg(dm, 0.0, n);
    let a_re = 0.5 * (gp + gm);
    let b_re = -0.5 * (fp + fm);
    let a_im = 0.5 * (fm - fp);
    let b_im = 0.5 * (gm - gp);
    // a cos θ + b sin θ = c cos(θ + ζ) with c cos ζ = a, c sin ζ = -b
    RectDecomposition {
        a_re,
        b_re,
        a_im,
        b_im,
        c_re: a_re.hypot(b_re),
        c_im: a_im.hypot(b_im),
        zeta_re: (-b_re).atan2(a_re),
        zeta_im: (-b_im).atan2(a_im),
    }
}

pub fn rect_decompose_context(ctx: &AnalyticContext) -> RectDecomposition {
    rect_decompose(ctx.omega_t, ctx.omega_k(), ctx.n)
}

/// `φ_k` from the rectangular decomposition.
pub fn phase_via_decomposition(dec: &RectDecomposition, theta: f64) -> Result<f64> {
    if dec.c_im == 0.0 {
        return Err(Error::DegenerateDecomposition);
    }
    let x = dec.ratio() * (theta + dec.zeta_re).cos();
    let y = (theta + dec.zeta_im).cos();
    Ok(crate::angle::phase(x, y))
}

/// Density of `φ_k` at the phase reached from tone phase `θ`, for a
/// uniformly distributed `θ` and a rectangular window.
pub fn pdf_density_at_theta(ctx: &AnalyticContext, theta: f64) -> f64 {
    let n = ctx.n;
    let sp = dirichlet_s(ctx.delta_plus(), n);
    let sm = dirichlet_s(ctx.delta_minus(), n);
    let c = ((n as f64 - 1.0) * ctx.omega_t + 2.0 * theta).cos();
    ((sp * sp + 2.0 * sp * sm * c + sm * sm) / (TAU * (sm * sm - sp * sp))).abs()
}

fn check_pdf_context(ctx: &AnalyticContext) -> Result<()> {
    if ctx.alpha != 0.0 {
        return Err(Error::Unsupported(
            "the closed-form phase density exists only for the rectangular window".into(),
        ));
    }
    if ctx.delta_minus() == 0.0 {
        return Err(Error::Unsupported(
            "tone frequency equals the bin frequency".into(),
        ));
    }
    let sp = dirichlet_s(ctx.delta_plus(), ctx.n);
    let sm = dirichlet_s(ctx.delta_minus(), ctx.n);
    let (p2, m2) = (sp * sp, sm * sm);
    if (m2 - p2).abs() <= 1e-12 * (m2 + p2).max(f64::MIN_POSITIVE) {
        return Err(Error::Unsupported(
            "phase density undefined where s²(Δ⁺) = s²(Δ⁻)".into(),
        ));
    }
    Ok(())
}

/// Parametric phase density: `(F(θ), f_φ)` on `resolution` equally spaced
/// tone phases.
pub fn phase_pdf_curve(ctx: &AnalyticContext, resolution: usize) -> Result<Vec<(f64, f64)>> {
    check_pdf_context(ctx)?;
    Ok(theta_grid(resolution)
        .map(|t| (tone_to_stft_phase(ctx, t), pdf_density_at_theta(ctx, t)))
        .collect())
}

/// Integrates the parametric density over `cells` equal phase cells of
/// `[-π, π)`, using the trapezoid rule along the curve.
pub fn pdf_cell_masses(ctx: &AnalyticContext, resolution: usize, cells: usize) -> Result<Vec<f64>> {
    let curve = phase_pdf_curve(ctx, resolution)?;
    let mut masses = vec![0.0; cells];
    let width = TAU / cells as f64;
    for j in 0..curve.len() {
        let (p0, d0) = curve[j];
        let (p1, d1) = curve[(j + 1) % curve.len()];
        let step = principal_angle_pi(p1 - p0);
        let mid = principal_angle_pi(p0 + 0.5 * step);
        let cell = (((mid + PI) / width) as usize).min(cells - 1);
        masses[cell] += 0.5 * (d0 + d1) * step.abs();
    }
    Ok(masses)
}

/// Phases at which the rectangular-window density peaks, sorted ascending.
/// They depend on the bin and on which side the tone lies, not on `ω_t`.
pub fn pdf_peak_locations(omega_k: f64, n: usize, side: ToneSide) -> Result<[f64; 2]> {
    bin_of(omega_k, n)?;
    let centre = match side {
        ToneSide::Below => 0.5 * omega_k,
        ToneSide::Above => 0.5 * (omega_k + PI),
    };
    let mut peaks = [
        principal_angle_pi(centre + 0.5 * PI),
        principal_angle_pi(centre - 0.5 * PI),
    ];
    peaks.sort_by(f64::total_cmp);
    Ok(peaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn direct_fg(gamma: f64, theta: f64, n: usize) -> (f64, f64) {
        (0..n).fold((0.0, 0.0), |(f, g), i| {
            let a = gamma * i as f64 + theta;
            (f + a.sin(), g + a.cos())
        })
    }

    #[test]
    fn kernel_anchors() {
        assert_eq!(dirichlet_s(0.0, 16), 16.0);
        assert!(dirichlet_s(2.0 * TAU * 3.0 / 16.0, 16).abs() < 1e-12);
        // limit through 2π for even N
        assert!((dirichlet_s(TAU, 16) + 16.0).abs() < 1e-12);
        assert!((dirichlet_s(1e-14, 16) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn trig_sums_trivial_cases() {
        let (f, g) = trig_sums_fg(0.0, 0.0, 8);
        assert!(f.abs() < 1e-15 && (g - 8.0).abs() < 1e-15);
        let (f, g) = trig_sums_fg(0.0, PI / 2.0, 8);
        assert!((f - 8.0).abs() < 1e-12 && g.abs() < 1e-12);
    }

    #[test]
    fn trig_sums_match_direct_summation() {
        let mut rng = Stream::new(1, 0);
        for _ in 0..100 {
            let gamma = rng.uniform(-PI, TAU);
            let theta = rng.uniform(-PI, PI);
            let n = 2 * (2 + (rng.unit() * 200.0) as usize);
            let (f, g) = trig_sums_fg(gamma, theta, n);
            let (fd, gd) = direct_fg(gamma, theta, n);
            assert!(
                (f - fd).abs() <= 1e-9 && (g - gd).abs() <= 1e-9,
                "γ={gamma} N={n}"
            );
            let sd = direct_fg(gamma, 0.0, n);
            // s recovered from the two sums
            let s = sd.0.hypot(sd.1);
            assert!((dirichlet_s(gamma, n).abs() - s).abs() <= 1e-9);
        }
    }

    #[test]
    fn on_bin_rectangular() {
        let ctx = AnalyticContext::rectangular(TAU * 5.0 / 64.0, 5, 64).unwrap();
        let (re, im) = coefficient_re_im(&ctx, 0.0);
        assert!((re - 32.0).abs() < 1e-12 && im.abs() < 1e-12);
    }

    #[test]
    fn rectangular_parts_are_sinusoidal_in_theta() {
        let ctx = AnalyticContext::rectangular(1.234, 9, 64).unwrap();
        let dec = rect_decompose_context(&ctx);
        for j in 0..64 {
            let t = -PI + TAU * j as f64 / 64.0;
            let (re, im) = coefficient_re_im(&ctx, t);
            assert!((re - (dec.a_re * t.cos() + dec.b_re * t.sin())).abs() < 1e-9);
            assert!((im - (dec.a_im * t.cos() + dec.b_im * t.sin())).abs() < 1e-9);
            assert!((re - dec.c_re * (t + dec.zeta_re).cos()).abs() < 1e-9);
            assert!((im - dec.c_im * (t + dec.zeta_im).cos()).abs() < 1e-9);
        }
        assert_eq!(dec.c_re, dec.a_re.hypot(dec.b_re));
        assert_eq!(dec.c_im, dec.a_im.hypot(dec.b_im));
    }

    #[test]
    fn decomposition_phase_matches_direct_phase() {
        let mut rng = Stream::new(2, 0);
        for _ in 0..200 {
            let k = 1 + (rng.unit() * 254.0) as usize;
            let ctx = AnalyticContext::rectangular(rng.uniform(0.0, PI), k, 512).unwrap();
            let dec = rect_decompose_context(&ctx);
            let theta = rng.uniform(-PI, PI);
            let (re, im) = coefficient_re_im(&ctx, theta);
            if re.abs() < 1e-12 && im.abs() < 1e-12 {
                continue;
            }
            let a = phase_via_decomposition(&dec, theta).unwrap();
            let b = tone_to_stft_phase(&ctx, theta);
            assert!(principal_angle_pi(a - b).abs() <= 1e-9);
            let c = phase_via_decomposition(&dec, theta + TAU).unwrap();
            assert!(principal_angle_pi(a - c).abs() <= 1e-12);
        }
    }

    #[test]
    fn degenerate_decomposition_is_an_error() {
        let dec = RectDecomposition {
            a_re: 1.0,
            b_re: 0.0,
            a_im: 0.0,
            b_im: 0.0,
            c_re: 1.0,
            c_im: 0.0,
            zeta_re: 0.0,
            zeta_im: 0.0,
        };
        assert!(matches!(
            phase_via_decomposition(&dec, 0.3),
            Err(Error::DegenerateDecomposition)
        ));
    }

    #[test]
    fn peak_locations_by_substitution() {
        let p = pdf_peak_locations(0.5 * PI, 16, ToneSide::Below).unwrap();
        assert!((p[0] + 0.25 * PI).abs() < 1e-12 && (p[1] - 0.75 * PI).abs() < 1e-12);
        let p = pdf_peak_locations(0.5 * PI, 16, ToneSide::Above).unwrap();
        assert!((p[0] + 0.75 * PI).abs() < 1e-12 && (p[1] - 0.25 * PI).abs() < 1e-12);
        assert!(matches!(
            pdf_peak_locations(0.51 * PI, 16, ToneSide::Below),
            Err(Error::NotBinFrequency { .. })
        ));
        assert!(pdf_peak_locations(PI, 16, ToneSide::Below).is_err());
    }

    #[test]
    fn pdf_rejects_unsupported_contexts() {
        let ctx = AnalyticContext::new(1.0, 10, 64, 0.46, WindowMode::Periodic).unwrap();
        assert!(matches!(
            phase_pdf_curve(&ctx, 100),
            Err(Error::Unsupported(_))
        ));
        let on_bin = AnalyticContext::rectangular(TAU * 10.0 / 64.0, 10, 64).unwrap();
        assert!(matches!(
            phase_pdf_curve(&on_bin, 100),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn context_validation() {
        assert!(AnalyticContext::rectangular(1.0, 0, 64).is_err());
        assert!(AnalyticContext::rectangular(1.0, 32, 64).is_err());
        assert!(AnalyticContext::rectangular(-0.1, 3, 64).is_err());
        assert!(AnalyticContext::rectangular(3.2, 3, 64).is_err());
        let ctx = AnalyticContext::rectangular(PI, 31, 64).unwrap();
        assert!(ctx.delta_minus() > -PI && ctx.delta_minus() < PI);
        assert!(ctx.delta_plus() > 0.0 && ctx.delta_plus() < TAU);
        assert_eq!(ctx.side(), Some(ToneSide::Above));
    }
}
