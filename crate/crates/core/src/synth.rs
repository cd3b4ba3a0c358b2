//! Synthetic interferograms: Perlin ground truth, wrapping, and complex
//! circular noise at a target SNR.

use crate::error::{Error, Result};
use crate::grid::{GridKind, LabelGrid, PhaseGrid};
use crate::phase::wrap_raw;
use crate::rng::{derive_seed, domain, stream};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// Recipe for one synthetic instance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    /// Octave count; each octave doubles frequency and halves amplitude.
    /// Zero selects a plane-ramp surface (test hook).
    pub perlin_octaves: usize,
    /// Base frequency in cycles per image side.
    pub perlin_base_frequency: f64,
    /// Peak ambiguity `M`: the surface spans `[0, 2*pi*M]` and ground-truth
    /// labels lie in `[0, M]`.
    pub max_ambiguity: i32,
    pub snr_db: Option<f64>,
}

impl SynthSpec {
    pub fn new(width: usize, height: usize, seed: u64) -> Self {
        Self {
            width,
            height,
            seed,
            perlin_octaves: 4,
            perlin_base_frequency: 2.0,
            max_ambiguity: 4,
            snr_db: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::invalid("synthetic grids must be at least 2x2"));
        }
        if self.max_ambiguity < 1 {
            return Err(Error::invalid("max ambiguity must be at least 1"));
        }
        if !(self.perlin_base_frequency.is_finite() && self.perlin_base_frequency > 0.0) {
            return Err(Error::invalid("base frequency must be positive"));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::invalid("SNR must be finite"));
            }
        }
        Ok(())
    }
}

/// Classic 2-D gradient noise with a seeded 256-entry permutation table,
/// quintic fade and eight gradient directions.
struct Perlin {
    perm: [u8; 256],
}

const GRAD_DIRS: [(f64, f64); 8] = {
    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;
    [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (S, S), (-S, S), (S, -S), (-S, -S)]
};

impl Perlin {
    fn new(seed: u64) -> Self {
        let mut perm: [u8; 256] = std::array::from_fn(|i| i as u8);
        let mut rng = stream(seed, domain::SYNTH, 0);
        for i in (1..256usize).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        Self { perm }
    }

    fn grad(&self, ix: i64, iy: i64) -> (f64, f64) {
        let a = self.perm[(ix & 255) as usize] as usize;
        let h = self.perm[(a + (iy & 255) as usize) & 255];
        GRAD_DIRS[(h & 7) as usize]
    }

    fn noise(&self, x: f64, y: f64) -> f64 {
        fn fade(t: f64) -> f64 {
            t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
        }
        fn dot(g: (f64, f64), dx: f64, dy: f64) -> f64 {
            g.0 * dx + g.1 * dy
        }
        let x0 = x.floor();
        let y0 = y.floor();
        let (ix, iy) = (x0 as i64, y0 as i64);
        let (fx, fy) = (x - x0, y - y0);
        let n00 = dot(self.grad(ix, iy), fx, fy);
        let n10 = dot(self.grad(ix + 1, iy), fx - 1.0, fy);
        let n01 = dot(self.grad(ix, iy + 1), fx, fy - 1.0);
        let n11 = dot(self.grad(ix + 1, iy + 1), fx - 1.0, fy - 1.0);
        let (u, v) = (fade(fx), fade(fy));
        let nx0 = n00 + u * (n10 - n00);
        let nx1 = n01 + u * (n11 - n01);
        nx0 + v * (nx1 - nx0)
    }
}

fn render_surface(spec: &SynthSpec, base_freq: f64) -> Vec<f64> {
    let (w, h) = (spec.width, spec.height);
    if spec.perlin_octaves == 0 {
        return (0..h).flat_map(|r| (0..w).map(move |c| (r + c) as f64)).collect();
    }
    let perlin = Perlin::new(spec.seed);
    let mut values = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let mut v = 0.0;
            let mut freq = base_freq;
            let mut amp = 1.0;
            for _ in 0..spec.perlin_octaves {
                v += amp * perlin.noise(col as f64 / w as f64 * freq, row as f64 / h as f64 * freq);
                freq *= 2.0;
                amp *= 0.5;
            }
            values.push(v);
        }
    }
    values
}

fn rescale_to_span(values: &mut [f64], target: f64) -> bool {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-9 {
        return false;
    }
    for v in values.iter_mut() {
        *v = (*v - lo) / (hi - lo) * target;
    }
    true
}

fn is_smooth(values: &[f64], w: usize, h: usize) -> bool {
    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            if col + 1 < w && (values[i + 1] - values[i]).abs() >= PI {
                return false;
            }
            if row + 1 < h && (values[i + w] - values[i]).abs() >= PI {
                return false;
            }
        }
    }
    true
}

/// Generates a ground-truth unwrapped surface spanning exactly
/// `[0, 2*pi*M]` whose adjacent differences all stay below pi; the base
/// frequency is halved and the surface regenerated (up to 10 reductions)
/// until the smoothness bound holds.
pub fn generate_truth(spec: &SynthSpec) -> Result<PhaseGrid> {
    spec.validate()?;
    let target = TAU * f64::from(spec.max_ambiguity);
    let mut freq = spec.perlin_base_frequency;
    for _ in 0..=10 {
        let mut values = render_surface(spec, freq);
        if rescale_to_span(&mut values, target) && is_smooth(&values, spec.width, spec.height) {
            return PhaseGrid::new(spec.width, spec.height, values, GridKind::Unwrapped);
        }
        freq /= 2.0;
    }
    Err(Error::GenerationFailed(format!(
        "no smooth {}x{} surface with span 2*pi*{} after 10 frequency reductions",
        spec.width, spec.height, spec.max_ambiguity
    )))
}

/// Wraps a truth surface and returns the wrapped grid with its ground-truth
/// labels (`truth = wrapped + 2*pi*k`).
pub fn wrap_grid(truth: &PhaseGrid) -> Result<(PhaseGrid, LabelGrid)> {
    if truth.kind() != GridKind::Unwrapped {
        return Err(Error::invalid("wrap_grid expects an unwrapped grid"));
    }
    let mut wrapped = Vec::with_capacity(truth.len());
    let mut labels = Vec::with_capacity(truth.len());
    let mut max_k = 0;
    for &v in truth.values() {
        let w = wrap_raw(v);
        let k = ((v - w) / TAU).round();
        if k < 0.0 {
            return Err(Error::invalid(
                "truth contains negative ambiguities; offset the surface to start at 0",
            ));
        }
        max_k = max_k.max(k as i32);
        wrapped.push(w);
        labels.push(k as i32);
    }
    let wrapped = PhaseGrid::new(truth.width(), truth.height(), wrapped, GridKind::Wrapped)?;
    let labels =
        LabelGrid::new(truth.width(), truth.height(), labels, max_k as usize + 1)?;
    Ok((wrapped, labels))
}

pub(crate) fn noise_sigma(snr_db: f64) -> f64 {
    (10f64.powf(-snr_db / 10.0) / 2.0).sqrt()
}

/// Adds complex circular Gaussian noise to the unit phasor of each pixel and
/// re-extracts the phase. Per-component variance is `10^(-snr/10) / 2`, so
/// total noise power relative to the unit signal matches the SNR.
pub fn add_noise(wrapped: &PhaseGrid, snr_db: f64, seed: u64) -> Result<PhaseGrid> {
    if wrapped.kind() != GridKind::Wrapped {
        return Err(Error::invalid("add_noise expects a wrapped grid"));
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid("SNR must be finite"));
    }
    let sigma = noise_sigma(snr_db);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = stream(seed, domain::NOISE, 0);
    let values = wrapped
        .values()
        .iter()
        .map(|&v| {
            let re = v.cos() + normal.sample(&mut rng);
            let im = v.sin() + normal.sample(&mut rng);
            wrap_raw(im.atan2(re))
        })
        .collect();
    PhaseGrid::new(wrapped.width(), wrapped.height(), values, GridKind::Wrapped)
}

/// A complete synthetic instance: truth surface, measured (possibly noisy)
/// wrapped grid, and ground-truth labels.
#[derive(Debug, Clone)]
pub struct SynthInstance {
    pub truth: PhaseGrid,
    pub wrapped: PhaseGrid,
    pub labels: LabelGrid,
}

/// Runs the full recipe: generate truth, wrap, check that the label
/// histogram covers `{0, .., M-1}` (trivial instances are regenerated with a
/// derived seed), then add noise when requested.
pub fn synthesize(spec: &SynthSpec) -> Result<SynthInstance> {
    spec.validate()?;
    for attempt in 0..10u64 {
        let attempt_spec = if attempt == 0 {
            spec.clone()
        } else {
            SynthSpec { seed: derive_seed(spec.seed, domain::IMAGE, attempt), ..spec.clone() }
        };
        let truth = generate_truth(&attempt_spec)?;
        let (clean, labels) = wrap_grid(&truth)?;
        let mut seen = vec![false; spec.max_ambiguity as usize + 1];
        for &k in labels.labels() {
            seen[k as usize] = true;
        }
        if !seen[..spec.max_ambiguity as usize].iter().all(|&s| s) {
            continue;
        }
        let wrapped = match spec.snr_db {
            Some(snr) => add_noise(&clean, snr, attempt_spec.seed)?,
            None => clean,
        };
        return Ok(SynthInstance { truth, wrapped, labels });
    }
    Err(Error::GenerationFailed(
        "could not produce a non-trivial label histogram in 10 attempts".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::apply_labels;

    fn spec_100(seed: u64) -> SynthSpec {
        SynthSpec::new(100, 100, seed)
    }

    #[test]
    fn plane_ramp_test_hook() {
        let mut spec = SynthSpec::new(50, 40, 1);
        spec.perlin_octaves = 0;
        spec.max_ambiguity = 2;
        let g = generate_truth(&spec).unwrap();
        let lo = g.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = g.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(lo, 0.0);
        assert_eq!(hi, TAU * 2.0);
        // Constant slope along rows and columns.
        let step = g.get(0, 1) - g.get(0, 0);
        assert!((g.get(1, 0) - g.get(0, 0) - step).abs() < 1e-12);
        assert!((g.get(5, 7) - (5.0 + 7.0) * step).abs() < 1e-9);
    }

    #[test]
    fn truth_spans_target_and_is_smooth() {
        for seed in 0..3 {
            let spec = spec_100(seed);
            let g = generate_truth(&spec).unwrap();
            let lo = g.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = g.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(lo, 0.0);
            assert_eq!(hi, TAU * 4.0);
            assert!(is_smooth(g.values(), g.width(), g.height()));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_truth(&spec_100(7)).unwrap();
        let b = generate_truth(&spec_100(7)).unwrap();
        assert_eq!(a, b);
        let c = generate_truth(&spec_100(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn impossible_smoothness_fails_cleanly() {
        // A 2x2 ramp spanning 8*pi must step by 4*pi per pixel; halving the
        // frequency cannot fix a ramp.
        let mut spec = SynthSpec::new(2, 2, 1);
        spec.perlin_octaves = 0;
        assert!(matches!(generate_truth(&spec), Err(Error::GenerationFailed(_))));
    }

    #[test]
    fn wrap_grid_known_values() {
        let truth =
            PhaseGrid::new(2, 1, vec![0.5, 0.5 + 2.0 * TAU], GridKind::Unwrapped).unwrap();
        let (wrapped, labels) = wrap_grid(&truth).unwrap();
        assert!((wrapped.values()[0] - 0.5).abs() < 1e-12);
        assert!((wrapped.values()[1] - 0.5).abs() < 1e-9);
        assert_eq!(labels.labels(), &[0, 2]);
    }

    #[test]
    fn wrap_grid_round_trips_through_apply_labels() {
        let spec = spec_100(3);
        let truth = generate_truth(&spec).unwrap();
        let (wrapped, labels) = wrap_grid(&truth).unwrap();
        assert!(labels.labels().iter().all(|&k| k >= 0 && k <= 4));
        let rebuilt = apply_labels(&wrapped, &labels).unwrap();
        for (a, b) in rebuilt.values().iter().zip(truth.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn wrap_grid_rejects_negative_ambiguities() {
        let truth = PhaseGrid::new(2, 1, vec![-7.0, 0.0], GridKind::Unwrapped).unwrap();
        assert!(wrap_grid(&truth).is_err());
    }

    #[test]
    fn synthesized_labels_cover_the_domain() {
        let inst = synthesize(&spec_100(11)).unwrap();
        let mut seen = [false; 5];
        for &k in inst.labels.labels() {
            seen[k as usize] = true;
        }
        assert!(seen[..4].iter().all(|&s| s));
        assert_eq!(inst.labels.domain_size(), 5);
    }

    #[test]
    fn vanishing_noise_is_identity() {
        let inst = synthesize(&spec_100(5)).unwrap();
        let noisy = add_noise(&inst.wrapped, 200.0, 9).unwrap();
        for (a, b) in noisy.values().iter().zip(inst.wrapped.values()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn noise_preserves_wrapped_range_and_determinism() {
        let inst = synthesize(&spec_100(6)).unwrap();
        let a = add_noise(&inst.wrapped, 8.0, 3).unwrap();
        let b = add_noise(&inst.wrapped, 8.0, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.values().iter().all(|&v| v > -PI && v <= PI));
        let c = add_noise(&inst.wrapped, 8.0, 4).unwrap();
        assert_ne!(a, c);
    }

    /// Monte Carlo check of the SNR calibration: the sample noise power of
    /// the complex field the generator draws must sit within 0.5 dB of the
    /// target for a 400x400 grid.
    #[test]
    fn sample_snr_matches_target() {
        for &target_db in &[15.0, 13.0, 8.1] {
            let sigma = noise_sigma(target_db);
            let normal = Normal::new(0.0, sigma).unwrap();
            let mut rng = stream(42, domain::NOISE, 0);
            let n = 400 * 400;
            let mut noise_power = 0.0;
            for _ in 0..n {
                let re: f64 = normal.sample(&mut rng);
                let im: f64 = normal.sample(&mut rng);
                noise_power += re * re + im * im;
            }
            // Unit signal power over n samples.
            let snr_est = 10.0 * (n as f64 / noise_power).log10();
            assert!(
                (snr_est - target_db).abs() < 0.5,
                "target {target_db} dB, measured {snr_est} dB"
            );
        }
    }

    #[test]
    fn synthesize_is_deterministic() {
        let mut spec = spec_100(9);
        spec.snr_db = Some(13.0);
        let a = synthesize(&spec).unwrap();
        let b = synthesize(&spec).unwrap();
        assert_eq!(a.wrapped, b.wrapped);
        assert_eq!(a.labels, b.labels);
    }
}
