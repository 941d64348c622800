//! Analytic two-photon interference model for exponentially decaying, dephased emitters.
//!
//! A photon from an emitter with radiative rate Γ is a one-sided exponential wavepacket.
//! Pure dephasing and spectral diffusion are both carried as Lorentzian (Cauchy) random
//! offsets of the photon's center frequency, so every shot is a pure state and the ensemble
//! reproduces exponential first-order coherence decay with total rate 1/T2.

use std::f64::consts::PI;

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::units;

/// Physical description of one quantum-dot single-photon source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterParams {
    pub label: String,
    /// Radiative lifetime T1 (ps).
    pub t1_ps: f64,
    /// First-order coherence time T2 (ps).
    pub t2_ps: f64,
    /// Indistinguishability of two photons emitted one pulse apart.
    pub m_consecutive: f64,
    pub g2_zero: f64,
    pub wavelength_nm: f64,
    /// Probability per pulse that a photon reaches the collection fiber.
    pub eta_sys: f64,
    pub rep_rate_hz: f64,
}

impl EmitterParams {
    /// Micropillar source.
    pub fn qd1() -> Self {
        Self {
            label: "QD1".into(),
            t1_ps: 78.0,
            t2_ps: 126.0,
            m_consecutive: 0.919,
            g2_zero: 0.072,
            wavelength_nm: 893.16,
            eta_sys: 0.25,
            rep_rate_hz: 80.3e6,
        }
    }

    /// Bullseye-cavity source.
    pub fn qd2() -> Self {
        Self {
            label: "QD2".into(),
            t1_ps: 69.9,
            t2_ps: 105.0,
            m_consecutive: 0.839,
            g2_zero: 0.051,
            wavelength_nm: 891.92,
            eta_sys: 0.20,
            rep_rate_hz: 80.3e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t1 = self.t1_ps;
        let t2 = self.t2_ps;
        ensure(t1 > 0.0 && t1.is_finite(), "t1_ps", t1, "t1_ps > 0")?;
        ensure(
            t2 > 0.0 && t2 <= 2.0 * t1,
            "t2_ps",
            t2,
            &format!("0 < t2_ps <= 2*t1_ps = {}", 2.0 * t1),
        )?;
        ensure(
            (0.0..=1.0).contains(&self.m_consecutive),
            "m_consecutive",
            self.m_consecutive,
            "0 <= m_consecutive <= 1",
        )?;
        let ratio = t2 / (2.0 * t1);
        if self.m_consecutive < ratio {
            return Err(Error::Inconsistent(format!(
                "m_consecutive = {} is below the transform-limit ratio t2/(2*t1) = {ratio:.4}; \
                 slow spectral diffusion cannot be negative",
                self.m_consecutive
            )));
        }
        ensure(
            (0.0..1.0).contains(&self.g2_zero),
            "g2_zero",
            self.g2_zero,
            "0 <= g2_zero < 1",
        )?;
        ensure(
            self.wavelength_nm > 0.0 && self.wavelength_nm.is_finite(),
            "wavelength_nm",
            self.wavelength_nm,
            "wavelength_nm > 0",
        )?;
        ensure(
            self.eta_sys > 0.0 && self.eta_sys <= 1.0,
            "eta_sys",
            self.eta_sys,
            "0 < eta_sys <= 1",
        )?;
        ensure(
            self.rep_rate_hz > 0.0 && self.rep_rate_hz.is_finite(),
            "rep_rate_hz",
            self.rep_rate_hz,
            "rep_rate_hz > 0",
        )
    }

    /// Radiative rate Γ = 1/T1 (1/ps).
    pub fn gamma_rad(&self) -> f64 {
        1.0 / self.t1_ps
    }

    /// Total coherence-decay rate 1/T2 (1/ps).
    pub fn gamma_coherence(&self) -> f64 {
        1.0 / self.t2_ps
    }

    pub fn pulse_period_ps(&self) -> f64 {
        units::period_ps(self.rep_rate_hz)
    }
}

/// Split of the total coherence-decay rate into radiative, fast and slow parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingDecomposition {
    pub gamma_rad: f64,
    /// Pure dephasing uncorrelated between successive photons.
    pub gamma_fast_star: f64,
    /// Spectral diffusion that is frozen over one pulse period but uncorrelated between
    /// sources and between trials.
    pub gamma_slow: f64,
}

impl DephasingDecomposition {
    /// Ideal transform-limited emitter.
    pub fn transform_limited(gamma_rad: f64) -> Self {
        Self {
            gamma_rad,
            gamma_fast_star: 0.0,
            gamma_slow: 0.0,
        }
    }

    /// Cauchy half-width of the per-photon frequency offset.
    pub fn offset_width(&self) -> f64 {
        self.gamma_fast_star + self.gamma_slow
    }

    /// Reconstructed 1/T2.
    pub fn linewidth(&self) -> f64 {
        self.gamma_rad / 2.0 + self.gamma_fast_star + self.gamma_slow
    }

    /// Fast coherence rate γ_f = Γ/2 + γ*_f seen by photons one period apart.
    pub fn fast_coherence_rate(&self) -> f64 {
        self.gamma_rad / 2.0 + self.gamma_fast_star
    }
}

pub fn transform_limit_ratio(t1_ps: f64, t2_ps: f64) -> Result<f64> {
    ensure(
        t1_ps > 0.0 && t1_ps.is_finite(),
        "t1_ps",
        t1_ps,
        "t1_ps > 0",
    )?;
    ensure(
        t2_ps > 0.0 && t2_ps <= 2.0 * t1_ps,
        "t2_ps",
        t2_ps,
        &format!("0 < t2_ps <= 2*t1_ps = {}", 2.0 * t1_ps),
    )?;
    Ok(t2_ps / (2.0 * t1_ps))
}

/// Splits the emitter's dephasing using the consecutive-photon indistinguishability,
/// which only sees dephasing faster than one pulse period.
pub fn decompose_dephasing(emitter: &EmitterParams) -> Result<DephasingDecomposition> {
    emitter.validate()?;
    let gamma = emitter.gamma_rad();
    let gamma_fast = gamma / (2.0 * emitter.m_consecutive);
    let gamma_slow = emitter.gamma_coherence() - gamma_fast;
    if gamma_slow < 0.0 {
        return Err(Error::Inconsistent(format!(
            "m_consecutive = {} implies negative spectral diffusion ({gamma_slow:.3e} 1/ps)",
            emitter.m_consecutive
        )));
    }
    Ok(DephasingDecomposition {
        gamma_rad: gamma,
        gamma_fast_star: gamma_fast - gamma / 2.0,
        gamma_slow,
    })
}

/// |⟨ψ1|ψ2⟩|² for two one-sided exponential wavepackets with rates `gamma1`, `gamma2`
/// whose carriers differ by `delta` rad/ps.
pub fn overlap_closed_form(gamma1: f64, gamma2: f64, delta: f64) -> Result<f64> {
    ensure(
        gamma1 > 0.0 && gamma1.is_finite(),
        "gamma1",
        gamma1,
        "gamma1 > 0",
    )?;
    ensure(
        gamma2 > 0.0 && gamma2.is_finite(),
        "gamma2",
        gamma2,
        "gamma2 > 0",
    )?;
    let a = 0.5 * (gamma1 + gamma2);
    Ok(gamma1 * gamma2 / (a * a + delta * delta))
}

/// Same overlap when photon 2 starts `delay_ps` after photon 1; the earlier photon's
/// unmatched leading edge costs exp(-Γ_early·|delay|).
pub fn overlap_with_delay(gamma1: f64, gamma2: f64, delta: f64, delay_ps: f64) -> Result<f64> {
    let base = overlap_closed_form(gamma1, gamma2, delta)?;
    let early = if delay_ps >= 0.0 { gamma1 } else { gamma2 };
    Ok(base * (-early * delay_ps.abs()).exp())
}

/// |⟨ψ1|ψ2⟩|² when photon 1 carries the quadratic spectral phase `quad_phase1`·ω²/2 and
/// photon 2 `quad_phase2`·ω²/2, centers `center1`, `center2` (rad/ps).
///
/// With z₁ = c₁ + iΓ₁/2 and z₂ = c₂ − iΓ₂/2 the overlap amplitude is
/// √(Γ₁Γ₂)/(2π(z₁−z₂))·[J(z₁) − J(z₂)], where J(z) = ∫ e^{irω²/2}/(ω−z) dω for the
/// relative phase r is iπ·erfcx(−iz·e^{−iπ/4}·√(r/2)) above the real axis and
/// −iπ·erfcx(iz·e^{−iπ/4}·√(r/2)) below it (r > 0; r < 0 follows by conjugation).
pub fn overlap_chirped(
    gamma1: f64,
    center1: f64,
    quad_phase1: f64,
    gamma2: f64,
    center2: f64,
    quad_phase2: f64,
) -> Result<f64> {
    ensure(
        gamma1 > 0.0 && gamma1.is_finite(),
        "gamma1",
        gamma1,
        "gamma1 > 0",
    )?;
    ensure(
        gamma2 > 0.0 && gamma2.is_finite(),
        "gamma2",
        gamma2,
        "gamma2 > 0",
    )?;
    let rel = quad_phase2 - quad_phase1;
    ensure(rel.is_finite(), "quad_phase", rel, "finite")?;
    let z1 = Complex64::new(center1, 0.5 * gamma1);
    let z2 = Complex64::new(center2, -0.5 * gamma2);
    let j = |z: Complex64| -> Complex64 {
        let i = Complex64::i();
        if rel == 0.0 {
            return if z.im > 0.0 { i * PI } else { -i * PI };
        }
        // For r < 0, J_r(z) = conj(J_|r|(z̄)).
        let (zz, flip) = if rel > 0.0 {
            (z, false)
        } else {
            (z.conj(), true)
        };
        let k = Complex64::from_polar((0.5 * rel.abs()).sqrt(), -0.25 * PI);
        let v = if zz.im > 0.0 {
            i * PI * (-i * zz * k).erfcx()
        } else {
            -i * PI * (i * zz * k).erfcx()
        };
        if flip {
            v.conj()
        } else {
            v
        }
    };
    let amp = (gamma1 * gamma2).sqrt() / (2.0 * PI) / (z1 - z2) * (j(z1) - j(z2));
    Ok(amp.norm_sqr())
}

/// Ensemble HOM visibility of two exponential wavepackets whose carrier offsets are
/// Cauchy-distributed with summed half-width `offset_width` around `detuning`.
pub fn hom_visibility(gamma1: f64, gamma2: f64, offset_width: f64, detuning: f64) -> f64 {
    let a = 0.5 * (gamma1 + gamma2);
    let s = a + offset_width;
    gamma1 * gamma2 / a * s / (s * s + detuning * detuning)
}

/// Visibility between photons from two independent emitters, detuned by
/// `detuning_rad_per_ps`.
pub fn remote_visibility(
    e1: &EmitterParams,
    e2: &EmitterParams,
    detuning_rad_per_ps: f64,
) -> Result<f64> {
    let d1 = decompose_dephasing(e1)?;
    let d2 = decompose_dephasing(e2)?;
    Ok(hom_visibility(
        d1.gamma_rad,
        d2.gamma_rad,
        d1.offset_width() + d2.offset_width(),
        detuning_rad_per_ps,
    ))
}

/// Visibility of two consecutive photons of one emitter: the slow offset is shared and
/// cancels, leaving twice the fast pure-dephasing width.
pub fn consecutive_visibility(emitter: &EmitterParams) -> Result<f64> {
    let d = decompose_dephasing(emitter)?;
    Ok(hom_visibility(
        d.gamma_rad,
        d.gamma_rad,
        2.0 * d.gamma_fast_star,
        0.0,
    ))
}

fn check_visibility_inputs(v: f64, g2_a: f64, g2_b: f64) -> Result<()> {
    ensure(
        (0.0..=1.0).contains(&v),
        "visibility",
        v,
        "0 <= visibility <= 1",
    )?;
    ensure((0.0..1.0).contains(&g2_a), "g2_a", g2_a, "0 <= g2 < 1")?;
    ensure((0.0..1.0).contains(&g2_b), "g2_b", g2_b, "0 <= g2 < 1")
}

/// Removes the multiphoton penalty (g2_a + g2_b)/2 from a raw visibility.
pub fn corrected_visibility(v_raw: f64, g2_a: f64, g2_b: f64) -> Result<f64> {
    check_visibility_inputs(v_raw, g2_a, g2_b)?;
    Ok((v_raw + 0.5 * (g2_a + g2_b)).clamp(0.0, 1.0))
}

/// Inverse of [`corrected_visibility`]: the raw visibility expected from an intrinsic one.
pub fn predicted_raw_visibility(v_intrinsic: f64, g2_a: f64, g2_b: f64) -> Result<f64> {
    check_visibility_inputs(v_intrinsic, g2_a, g2_b)?;
    Ok((v_intrinsic - 0.5 * (g2_a + g2_b)).clamp(0.0, 1.0))
}

/// Frequency-domain quadrature settings.
///
/// The real line is covered by tangent-mapped segments anchored on each spectral peak, so
/// Lorentzian tails are integrated to infinity instead of being truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Gauss–Kronrod panels per segment before adaptive refinement (15 nodes each).
    pub initial_panels: usize,
    pub tolerance: f64,
    pub max_intervals: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        // 4 segments x 64 panels x 15 nodes ~ 4k points before refinement.
        Self {
            initial_panels: 64,
            tolerance: 1e-12,
            max_intervals: 400_000,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.initial_panels == 0 {
            return Err(Error::Resolution("grid needs at least one panel".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-4) {
            return Err(Error::Resolution(format!(
                "tolerance {} outside (0, 1e-4]",
                self.tolerance
            )));
        }
        Ok(())
    }

    fn options(&self) -> QuadOptions {
        QuadOptions {
            initial_panels: self.initial_panels,
            abs_tol: self.tolerance,
            max_intervals: self.max_intervals,
        }
    }
}

/// Lorentzian spectral amplitude of an exponential wavepacket carrying an accumulated
/// quadratic spectral phase `quad_phase·ω²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralAmplitude {
    pub gamma_rad: f64,
    pub center_offset: f64,
    /// β₂·L in ps².
    pub quad_phase: f64,
    pub grid: GridSpec,
}

impl SpectralAmplitude {
    pub fn new(gamma_rad: f64, center_offset: f64, quad_phase: f64) -> Self {
        Self {
            gamma_rad,
            center_offset,
            quad_phase,
            grid: GridSpec::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        ensure(
            self.gamma_rad > 0.0 && self.gamma_rad.is_finite(),
            "gamma_rad",
            self.gamma_rad,
            "gamma_rad > 0",
        )?;
        ensure(
            self.center_offset.is_finite(),
            "center_offset",
            self.center_offset,
            "finite",
        )?;
        ensure(
            self.quad_phase.is_finite(),
            "quad_phase",
            self.quad_phase,
            "finite",
        )?;
        self.grid.validate()
    }

    /// Amplitude without the spectral phase.
    fn envelope(&self, omega: f64) -> Complex64 {
        let k = (self.gamma_rad / (2.0 * PI)).sqrt();
        k / Complex64::new(0.5 * self.gamma_rad, -(omega - self.center_offset))
    }

    /// ψ̃(ω) including the spectral phase.
    pub fn amplitude(&self, omega: f64) -> Complex64 {
        self.envelope(omega) * Complex64::from_polar(1.0, 0.5 * self.quad_phase * omega * omega)
    }

    /// ∫|ψ̃|² dω evaluated on the quadrature grid.
    pub fn norm(&self) -> Result<f64> {
        self.validate()?;
        let mut same = *self;
        same.quad_phase = 0.0;
        Ok(overlap_amplitude(&same, &same)?.re)
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    anchor: f64,
    scale: f64,
    /// +1 integrates from the anchor upwards, -1 downwards.
    direction: f64,
    /// Distance covered from the anchor; `None` runs to infinity.
    length: Option<f64>,
}

/// Covers the real line with tangent-mapped segments around two peaks given as
/// (position, half-width).
fn segments(p: (f64, f64), q: (f64, f64)) -> Vec<Segment> {
    let ((ca, ha), (cb, hb)) = (p, q);
    if (ca - cb).abs() <= 1e-9 * ha.min(hb) {
        let scale = ha.min(hb);
        return vec![
            Segment {
                anchor: ca,
                scale,
                direction: -1.0,
                length: None,
            },
            Segment {
                anchor: ca,
                scale,
                direction: 1.0,
                length: None,
            },
        ];
    }
    let ((lo, hlo), (hi, hhi)) = if ca < cb {
        ((ca, ha), (cb, hb))
    } else {
        ((cb, hb), (ca, ha))
    };
    let mid = 0.5 * (lo + hi);
    vec![
        Segment {
            anchor: lo,
            scale: hlo,
            direction: -1.0,
            length: None,
        },
        Segment {
            anchor: lo,
            scale: hlo,
            direction: 1.0,
            length: Some(mid - lo),
        },
        Segment {
            anchor: hi,
            scale: hhi,
            direction: -1.0,
            length: Some(hi - mid),
        },
        Segment {
            anchor: hi,
            scale: hhi,
            direction: 1.0,
            length: None,
        },
    ]
}

fn integrate_line<F>(f: F, p: (f64, f64), q: (f64, f64), opts: &QuadOptions) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let mut total = Complex64::new(0.0, 0.0);
    for seg in segments(p, q) {
        let theta_max = match seg.length {
            Some(len) => (len / seg.scale).atan(),
            None => 0.5 * PI,
        };
        let res = integrate(
            |theta: f64| {
                let sec = 1.0 / theta.cos();
                f(seg.anchor + seg.direction * seg.scale * theta.tan()) * (seg.scale * sec * sec)
            },
            0.0,
            theta_max,
            opts,
        )?;
        total += res.value;
    }
    Ok(total)
}

/// ∫ ψ̃_a*(ω) ψ̃_b(ω) exp(i[φ_b(ω) − φ_a(ω)]) dω.
///
/// The product of envelopes is k_a·k_b / ((ω − z_a)(ω − z_b)) with z_a = c_a + i·h_a and
/// z_b = c_b − i·h_b. A relative quadratic phase r is handled by rotating the contour to
/// ω = e^{iθ}x (θ of the sign of r), where the chirp becomes a Gaussian decay; poles
/// swept over contribute their residues. The rotated integrand does not oscillate.
fn overlap_amplitude(a: &SpectralAmplitude, b: &SpectralAmplitude) -> Result<Complex64> {
    let opts = a.grid.options();
    let (ha, hb) = (0.5 * a.gamma_rad, 0.5 * b.gamma_rad);
    let (ca, cb) = (a.center_offset, b.center_offset);
    let rel = b.quad_phase - a.quad_phase;
    if rel == 0.0 {
        let f = |omega: f64| a.envelope(omega).conj() * b.envelope(omega);
        return integrate_line(f, (ca, ha), (cb, hb), &opts);
    }

    let k = (a.gamma_rad * b.gamma_rad).sqrt() / (2.0 * PI);
    let za = Complex64::new(ca, ha);
    let zb = Complex64::new(cb, -hb);
    let chirp = |z: Complex64| (Complex64::i() * 0.5 * rel * z * z).exp();
    let g = |z: Complex64| k / ((z - za) * (z - zb));

    // Rotation angle keeping both poles well away from the rotated line.
    let sign = rel.signum();
    let theta = [PI / 4.0, PI / 6.0, PI / 3.0]
        .into_iter()
        .map(|t| sign * t)
        .max_by(|&s, &t| {
            let clearance = |t: f64| {
                let rot = Complex64::from_polar(1.0, -t);
                ((za * rot).im.abs() / ha).min((zb * rot).im.abs() / hb)
            };
            clearance(s).total_cmp(&clearance(t))
        })
        .expect("candidate angles");
    let dir = Complex64::from_polar(1.0, theta);
    let proj = |z: Complex64, h: f64| {
        let w = z / dir;
        (w.re, w.im.abs().max(1e-3 * h))
    };
    let f = |x: f64| {
        let z = dir * x;
        g(z) * chirp(z) * dir
    };
    let mut total = integrate_line(f, proj(za, ha), proj(zb, hb), &opts)?;

    // Poles between the real axis and the rotated line.
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let res_a = k / (za - zb) * chirp(za);
    let res_b = k / (zb - za) * chirp(zb);
    let swept = |z: Complex64| {
        let w = z / dir;
        // Sign of Im(z) and of Im(z·e^{-iθ}) differ exactly when the line passed over z.
        (z.im > 0.0) != (w.im > 0.0)
    };
    // The upper pole is enclosed counter-clockwise, the lower one clockwise, for either
    // rotation direction.
    if swept(za) {
        total += two_pi_i * res_a;
    }
    if swept(zb) {
        total -= two_pi_i * res_b;
    }
    Ok(total)
}

/// Squared overlap of two spectral amplitudes, allowing unequal quadratic phases.
pub fn overlap_numeric(a: &SpectralAmplitude, b: &SpectralAmplitude) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    Ok(overlap_amplitude(a, b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn transform_limit_ratios() {
        assert!((transform_limit_ratio(78.0, 126.0).unwrap() - 0.808).abs() < 1e-3);
        assert!((transform_limit_ratio(69.9, 105.0).unwrap() - 0.751).abs() < 1e-3);
        assert_eq!(transform_limit_ratio(50.0, 100.0).unwrap(), 1.0);
    }

    #[test]
    fn transform_limit_rejects_bounds() {
        let err = transform_limit_ratio(100.0, 300.0).unwrap_err();
        assert!(err.to_string().contains("t2_ps"), "{err}");
        assert!(transform_limit_ratio(0.0, 1.0).is_err());
        assert!(transform_limit_ratio(10.0, 0.0).is_err());
    }

    #[test]
    fn decomposition_of_qd1() {
        let d = decompose_dephasing(&EmitterParams::qd1()).unwrap();
        // Γ/(2M) − Γ/2 and 1/T2 − Γ/(2M) evaluated by hand.
        assert_relative_eq!(d.gamma_fast_star, 5.649_954e-4, max_relative = 1e-5);
        assert_relative_eq!(d.gamma_slow, 9.612_561e-4, max_relative = 1e-5);
        assert_relative_eq!(d.linewidth(), 1.0 / 126.0, max_relative = 1e-14);
    }

    #[test]
    fn decomposition_limits() {
        let mut e = EmitterParams::qd1();
        e.m_consecutive = e.t2_ps / (2.0 * e.t1_ps);
        let d = decompose_dephasing(&e).unwrap();
        assert!(d.gamma_slow.abs() < 1e-18);

        e.t2_ps = 2.0 * e.t1_ps;
        e.m_consecutive = 1.0;
        let d = decompose_dephasing(&e).unwrap();
        assert_eq!(d.gamma_fast_star, 0.0);
        assert!(d.gamma_slow.abs() < 1e-18);
    }

    #[test]
    fn decomposition_rejects_low_consecutive_indistinguishability() {
        let mut e = EmitterParams::qd1();
        e.m_consecutive = 0.7;
        assert!(matches!(
            decompose_dephasing(&e),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn closed_form_overlap_examples() {
        let g = 1.0 / 78.0;
        assert_eq!(overlap_closed_form(g, g, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            overlap_closed_form(g, g, g).unwrap(),
            0.5,
            max_relative = 1e-15
        );
        // 4·T1a·T1b/(T1a+T1b)² for the two sources.
        assert_relative_eq!(
            overlap_closed_form(1.0 / 78.0, 1.0 / 69.9, 0.0).unwrap(),
            0.997_000_604_816,
            max_relative = 1e-10
        );
        assert!(overlap_closed_form(0.0, g, 0.0).is_err());
        assert!(overlap_closed_form(g, -1.0, 0.0).is_err());
    }

    #[test]
    fn delayed_overlap_decays_with_leading_edge() {
        let (g1, g2) = (1.0 / 78.0, 1.0 / 69.9);
        let base = overlap_closed_form(g1, g2, 0.0).unwrap();
        assert_relative_eq!(
            overlap_with_delay(g1, g2, 0.0, 10.0).unwrap(),
            base * (-10.0 * g1).exp()
        );
        assert_relative_eq!(
            overlap_with_delay(g1, g2, 0.0, -10.0).unwrap(),
            base * (-10.0 * g2).exp()
        );
    }

    #[test]
    fn remote_visibility_examples() {
        let (e1, e2) = (EmitterParams::qd1(), EmitterParams::qd2());
        assert!((remote_visibility(&e1, &e2, 0.0).unwrap() - 0.7745).abs() < 5e-5);
        let far = remote_visibility(&e1, &e2, units::ghz_to_rad_per_ps(38.0)).unwrap();
        assert!((far - 0.0041).abs() < 5e-5, "{far}");

        let mut ideal = EmitterParams::qd1();
        ideal.t2_ps = 2.0 * ideal.t1_ps;
        ideal.m_consecutive = 1.0;
        assert_relative_eq!(remote_visibility(&ideal, &ideal, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn consecutive_visibility_recovers_input() {
        for e in [EmitterParams::qd1(), EmitterParams::qd2()] {
            assert_relative_eq!(
                consecutive_visibility(&e).unwrap(),
                e.m_consecutive,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn multiphoton_correction() {
        let v = corrected_visibility(0.67, 0.072, 0.051).unwrap();
        assert!((v - 0.7315).abs() < 1e-12);
        assert_eq!(corrected_visibility(0.5, 0.0, 0.0).unwrap(), 0.5);
        let raw = predicted_raw_visibility(0.7745, 0.072, 0.051).unwrap();
        assert!((raw - 0.713).abs() < 1e-12);
        assert_eq!(corrected_visibility(0.99, 0.05, 0.05).unwrap(), 1.0);
        assert!(corrected_visibility(1.2, 0.0, 0.0).is_err());
        assert!(corrected_visibility(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn spectral_amplitudes_are_normalized() {
        for gamma in [1e-3, 1.0 / 78.0, 0.1] {
            let s = SpectralAmplitude::new(gamma, 0.3, 1234.0);
            assert!((s.norm().unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn numeric_overlap_without_phase_matches_closed_form() {
        let a = SpectralAmplitude::new(1.0 / 78.0, 0.0, 0.0);
        let b = SpectralAmplitude::new(1.0 / 69.9, 0.0, 0.0);
        let num = overlap_numeric(&a, &b).unwrap();
        assert!((num - 0.997_000_604_816).abs() < 1e-9);
    }

    #[test]
    fn common_phase_cancels() {
        let closed = overlap_closed_form(1.0 / 78.0, 1.0 / 69.9, 0.004).unwrap();
        let a = SpectralAmplitude::new(1.0 / 78.0, 0.0, -3614.7);
        let b = SpectralAmplitude::new(1.0 / 69.9, 0.004, -3614.7);
        assert!((overlap_numeric(&a, &b).unwrap() - closed).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_grid() {
        let mut a = SpectralAmplitude::new(0.01, 0.0, 0.0);
        a.grid.initial_panels = 0;
        assert!(matches!(overlap_numeric(&a, &a), Err(Error::Resolution(_))));
        let mut b = SpectralAmplitude::new(0.01, 0.0, 0.0);
        b.grid.max_intervals = 2;
        b.grid.initial_panels = 1;
        b.grid.tolerance = 1e-15;
        let far = SpectralAmplitude {
            center_offset: 0.4,
            ..b
        };
        assert!(matches!(
            overlap_numeric(&b, &far),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn chirped_overlap_reference_value() {
        // mpmath quad of the same integral at 50 digits.
        let (g1, g2) = (1.0 / 78.0, 1.0 / 69.9);
        let o = overlap_chirped(g1, 0.0, -3614.71054, g2, 0.0, 0.0).unwrap();
        assert_relative_eq!(o, 0.631_426_986_041, max_relative = 1e-10);
    }

    #[test]
    fn chirped_overlap_matches_quadrature() {
        let (g1, g2) = (1.0 / 78.0, 1.0 / 69.9);
        for (c1, q1, q2) in [
            (0.0, 1e-3, 0.0),
            (0.003, -100.0, 0.0),
            (-0.003, 1000.0, 0.0),
            (0.2387, -3614.7, 0.0),
            (0.01, 2100.0, -3500.0),
            (0.0, 3614.7, 3614.7 * 1.000_000_4),
        ] {
            let n = overlap_numeric(
                &SpectralAmplitude::new(g1, c1, q1),
                &SpectralAmplitude::new(g2, 0.0, q2),
            )
            .unwrap();
            let c = overlap_chirped(g1, c1, q1, g2, 0.0, q2).unwrap();
            assert!((n - c).abs() < 1e-12, "{c1} {q1} {q2}: {n} vs {c}");
        }
    }

    #[test]
    fn chirped_overlap_without_phase_is_closed_form() {
        let (g1, g2) = (1.0 / 78.0, 1.0 / 69.9);
        let a = overlap_chirped(g1, 0.004, 250.0, g2, 0.0, 250.0).unwrap();
        assert_relative_eq!(
            a,
            overlap_closed_form(g1, g2, 0.004).unwrap(),
            max_relative = 1e-13
        );
    }
}
