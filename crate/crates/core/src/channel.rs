//! Satellite downlink channel: shadowed-Rician fading, free-space pathloss,
//! Rayleigh terrestrial interferers placed in an annulus, and the SINR they
//! combine into.
//!
//! All powers are carried noise-normalized (divided by σ²), so the SINR
//! denominator is `I_a + 1`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{QosError, Result};
use crate::rng;
use crate::special::ln_hyp1f1_b1;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Shadowed-Rician fading parameters for the power gain `|h|²`.
///
/// `b` is half the average multipath power, `m` the Nakagami shadowing
/// parameter and `omega` the average line-of-sight power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowedRicianParams {
    pub b: f64,
    pub m: f64,
    pub omega: f64,
}

impl ShadowedRicianParams {
    pub fn new(b: f64, m: f64, omega: f64) -> Result<Self> {
        let p = ShadowedRicianParams { b, m, omega };
        p.validate()?;
        Ok(p)
    }

    /// Unit-mean Rayleigh fading (exponential power gain).
    pub fn rayleigh() -> Self {
        ShadowedRicianParams {
            b: 0.5,
            m: 1.0,
            omega: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(QosError::domain(format!(
                "shadowed-Rician b must be > 0, got {}",
                self.b
            )));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(QosError::domain(format!(
                "shadowed-Rician omega must be >= 0, got {}",
                self.omega
            )));
        }
        if !(self.m >= 0.5 && self.m.is_finite()) {
            return Err(QosError::domain(format!(
                "shadowed-Rician m must be >= 0.5, got {}",
                self.m
            )));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.ln_alpha().exp()
    }

    fn ln_alpha(&self) -> f64 {
        let two_bm = 2.0 * self.b * self.m;
        -(2.0 * self.b).ln() + self.m * (two_bm / (two_bm + self.omega)).ln()
    }

    pub fn beta(&self) -> f64 {
        1.0 / (2.0 * self.b)
    }

    pub fn delta(&self) -> f64 {
        self.omega / (2.0 * self.b * (2.0 * self.b * self.m + self.omega))
    }

    /// `E|h|² = Ω + 2b`.
    pub fn mean_power(&self) -> f64 {
        self.omega + 2.0 * self.b
    }

    /// Log of the density `α e^{−βx} ₁F₁(m, 1, δx)`.
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(QosError::domain(format!("power gain must be >= 0, got {x}")));
        }
        if x.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.ln_alpha() - self.beta() * x + ln_hyp1f1_b1(self.m, self.delta() * x)?)
    }

    pub fn sampler(&self) -> Result<ShadowedRicianSampler> {
        self.validate()?;
        let los = if self.omega > 0.0 {
            Some(Gamma::new(self.m, self.omega / self.m).map_err(|e| QosError::domain(e.to_string()))?)
        } else {
            None
        };
        Ok(ShadowedRicianSampler {
            los,
            sigma: self.b.sqrt(),
        })
    }
}

/// Density of the shadowed-Rician power gain at `x`.
pub fn shadowed_rician_pdf(x: f64, p: &ShadowedRicianParams) -> Result<f64> {
    p.validate()?;
    Ok(p.ln_pdf(x)?.exp())
}

/// Draws `|h|²` with `h = A e^{jφ} + Z`: Nakagami-m amplitude `A` of spread
/// Ω, uniform phase, and circular Gaussian scatter with per-dimension
/// variance `b`.
#[derive(Debug, Clone)]
pub struct ShadowedRicianSampler {
    los: Option<Gamma<f64>>,
    sigma: f64,
}

impl Distribution<f64> for ShadowedRicianSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (re, im) = match &self.los {
            Some(power) => {
                let amp = power.sample(rng).sqrt();
                let phase = rng.random::<f64>() * 2.0 * PI;
                (amp * phase.cos(), amp * phase.sin())
            }
            None => (0.0, 0.0),
        };
        let zr: f64 = rng.sample(StandardNormal);
        let zi: f64 = rng.sample(StandardNormal);
        let re = re + self.sigma * zr;
        let im = im + self.sigma * zi;
        re * re + im * im
    }
}

pub fn sample_channel_gain<R: Rng + ?Sized>(p: &ShadowedRicianParams, rng: &mut R) -> Result<f64> {
    Ok(p.sampler()?.sample(rng))
}

/// Free-space link budget for one transmitter–receiver pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub carrier_hz: f64,
    pub distance_m: f64,
    pub gain_tx_dbi: f64,
    pub gain_rx_dbi: f64,
    /// Transmit power over receiver noise power, `P/σ²`.
    pub tx_snr_db: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(QosError::domain(format!(
                "carrier_hz must be > 0, got {}",
                self.carrier_hz
            )));
        }
        if !(self.distance_m > 0.0 && self.distance_m.is_finite()) {
            return Err(QosError::domain(format!(
                "distance_m must be > 0, got {}",
                self.distance_m
            )));
        }
        if !(self.gain_tx_dbi.is_finite() && self.gain_rx_dbi.is_finite() && self.tx_snr_db.is_finite()) {
            return Err(QosError::domain("antenna gains and tx_snr_db must be finite"));
        }
        Ok(())
    }

    pub fn tx_snr(&self) -> f64 {
        db_to_linear(self.tx_snr_db)
    }

    pub fn at_distance(&self, distance_m: f64) -> LinkBudget {
        LinkBudget { distance_m, ..*self }
    }
}

/// `(c / (4π f_c d))² · G_tx · G_rx`.
pub fn pathloss_factor(l: &LinkBudget) -> Result<f64> {
    l.validate()?;
    let free_space = SPEED_OF_LIGHT / (4.0 * PI * l.carrier_hz * l.distance_m);
    Ok(free_space * free_space * db_to_linear(l.gain_tx_dbi) * db_to_linear(l.gain_rx_dbi))
}

/// Terrestrial interferers spread over the annulus `[r_inner_m, r_outer_m]`
/// around the receiver. `link.distance_m` is ignored; placement fills it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfererField {
    pub count: usize,
    pub r_inner_m: f64,
    pub r_outer_m: f64,
    pub link: LinkBudget,
}

impl InterfererField {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_inner_m > 0.0 && self.r_inner_m < self.r_outer_m && self.r_outer_m.is_finite()) {
            return Err(QosError::domain(format!(
                "annulus needs 0 < r_inner_m < r_outer_m, got {} and {}",
                self.r_inner_m, self.r_outer_m
            )));
        }
        self.link.at_distance(self.r_inner_m).validate()
    }

    /// Pathloss factors `φ_j` for interferers at `distances`.
    pub fn pathloss_factors(&self, distances: &[f64]) -> Result<Vec<f64>> {
        distances
            .iter()
            .map(|&d| pathloss_factor(&self.link.at_distance(d)))
            .collect()
    }

    /// Mean interference contributions `φ_j P_t` (noise-normalized).
    pub fn weights(&self, distances: &[f64]) -> Result<Vec<f64>> {
        let pt = self.link.tx_snr();
        Ok(self
            .pathloss_factors(distances)?
            .into_iter()
            .map(|phi| phi * pt)
            .collect())
    }
}

/// Draws `count` distances uniformly by area over the annulus.
pub fn place_interferers<R: Rng + ?Sized>(f: &InterfererField, rng: &mut R) -> Vec<f64> {
    annulus_distances(f.r_inner_m, f.r_outer_m, f.count, rng)
}

pub(crate) fn annulus_distances<R: Rng + ?Sized>(r_in: f64, r_out: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let (a2, b2) = (r_in * r_in, r_out * r_out);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            (a2 + u * (b2 - a2)).sqrt().clamp(r_in, r_out)
        })
        .collect()
}

/// `I_a = Σ_j φ_j P_t |h_j|²` for the given pathloss factors and Rayleigh
/// power gains.
pub fn aggregate_interference(field: &InterfererField, phis: &[f64], gains: &[f64]) -> Result<f64> {
    if phis.len() != field.count || gains.len() != field.count {
        return Err(QosError::contract(format!(
            "expected {} pathloss factors and gains, got {} and {}",
            field.count,
            phis.len(),
            gains.len()
        )));
    }
    let pt = field.link.tx_snr();
    Ok(phis.iter().zip(gains).map(|(phi, g)| phi * pt * g).sum())
}

/// `φ · P/σ² · h / (I_a + 1)`.
pub fn sinr_normalized(phi: f64, tx_snr: f64, h_gain: f64, i_a: f64) -> f64 {
    phi * tx_snr * h_gain / (i_a + 1.0)
}

/// Full satellite-to-ground scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub satellite: LinkBudget,
    pub fading: ShadowedRicianParams,
    pub interferers: InterfererField,
    pub rx_antennas: u32,
    pub seed: u64,
    /// Explicit interferer distances; drawn from `seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interferer_distances: Option<Vec<f64>>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.satellite.validate()?;
        self.fading.validate()?;
        self.interferers.validate()?;
        if self.rx_antennas < 1 {
            return Err(QosError::domain("rx_antennas must be >= 1"));
        }
        if let Some(d) = &self.interferer_distances {
            if d.len() != self.interferers.count {
                return Err(QosError::contract(format!(
                    "{} interferer distances given for count {}",
                    d.len(),
                    self.interferers.count
                )));
            }
            if d.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(QosError::domain("interferer distances must be > 0"));
            }
        }
        Ok(())
    }

    /// Interferer distances, frozen for the scenario. Drawn placements are
    /// nested: the first `K` distances do not depend on `count`.
    pub fn interferer_distances(&self) -> Vec<f64> {
        match &self.interferer_distances {
            Some(d) => d.clone(),
            None => place_interferers(&self.interferers, &mut rng::stream(self.seed, &[rng::tag::PLACEMENT])),
        }
    }

    pub fn satellite_pathloss(&self) -> Result<f64> {
        pathloss_factor(&self.satellite)
    }

    /// Mean received satellite SNR `φ_s P_s E|h|²`, interference ignored.
    pub fn mean_received_snr(&self) -> Result<f64> {
        Ok(self.satellite_pathloss()? * self.satellite.tx_snr() * self.fading.mean_power())
    }

    /// Returns a copy whose satellite transmit SNR yields the requested mean
    /// received SNR.
    pub fn with_mean_received_snr_db(&self, snr_db: f64) -> Result<Scenario> {
        let phi = self.satellite_pathloss()?;
        let tx = snr_db - linear_to_db(phi * self.fading.mean_power());
        let mut s = self.clone();
        s.satellite.tx_snr_db = tx;
        Ok(s)
    }

    /// Scenario restricted to the first `count` interferers of its frozen
    /// placement.
    pub fn with_interferer_count(&self, count: usize) -> Scenario {
        let mut d = self.interferer_distances.clone().unwrap_or_default();
        if d.len() < count {
            let drawn = annulus_distances(
                self.interferers.r_inner_m,
                self.interferers.r_outer_m,
                count,
                &mut rng::stream(self.seed, &[rng::tag::PLACEMENT]),
            );
            d.extend_from_slice(&drawn[d.len()..]);
        }
        d.truncate(count);
        let mut s = self.clone();
        s.interferers.count = count;
        s.interferer_distances = Some(d);
        s
    }

    /// Per-draw SINR `φ_s P_s h / (I_a + 1)`.
    pub fn sinr(&self, h_gain: f64, i_a: f64) -> Result<f64> {
        Ok(sinr_normalized(
            self.satellite_pathloss()?,
            self.satellite.tx_snr(),
            h_gain,
            i_a,
        ))
    }

    /// The SINR distribution with interferer positions frozen.
    pub fn sinr_model(&self) -> Result<SinrModel> {
        self.validate()?;
        let distances = self.interferer_distances();
        Ok(SinrModel::Fading(FadingLink {
            fading: self.fading,
            signal_scale: self.satellite_pathloss()? * self.satellite.tx_snr(),
            interferer_weights: self.interferers.weights(&distances)?,
            seed: self.seed,
        }))
    }
}

/// `γ = signal_scale · |h|² / (1 + Σ_j w_j E_j)` with `|h|²` shadowed-Rician
/// and `E_j` i.i.d. unit exponentials.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingLink {
    pub fading: ShadowedRicianParams,
    pub signal_scale: f64,
    pub interferer_weights: Vec<f64>,
    /// Seed for Monte Carlo expectations.
    pub seed: u64,
}

/// Distribution of the per-update SINR.
#[derive(Debug, Clone, PartialEq)]
pub enum SinrModel {
    /// Point mass (non-fading channel).
    Constant(f64),
    Fading(FadingLink),
}

impl SinrModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SinrModel::Constant(g) if !(*g >= 0.0 && g.is_finite()) => Err(QosError::domain(format!(
                "constant SINR must be finite and >= 0, got {g}"
            ))),
            SinrModel::Constant(_) => Ok(()),
            SinrModel::Fading(link) => {
                link.fading.validate()?;
                if !(link.signal_scale >= 0.0 && link.signal_scale.is_finite()) {
                    return Err(QosError::domain("signal scale must be finite and >= 0"));
                }
                if link.interferer_weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                    return Err(QosError::domain("interferer weights must be finite and >= 0"));
                }
                Ok(())
            }
        }
    }
}

impl FadingLink {
    /// Draws `count` SINR samples. Sample `i` always uses the same fading and
    /// per-interferer gain draws, so links that differ only in scale or in
    /// trailing interferers are coupled sample by sample.
    pub fn draw(&self, count: usize) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        const CHUNK: usize = 4096;
        let sampler = self.fading.sampler()?;
        let chunks = count.div_ceil(CHUNK);
        let parts: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let len = CHUNK.min(count - c * CHUNK);
                let mut fading_rng = rng::stream(self.seed, &[rng::tag::FADING, c as u64]);
                let mut out: Vec<f64> = (0..len)
                    .map(|_| self.signal_scale * sampler.sample(&mut fading_rng))
                    .collect();
                let mut interference = vec![0.0; len];
                for (j, w) in self.interferer_weights.iter().enumerate() {
                    let mut gain_rng = rng::stream(self.seed, &[rng::tag::INTERFERER_GAIN, c as u64, j as u64]);
                    for slot in interference.iter_mut() {
                        let g: f64 = Exp1.sample(&mut gain_rng);
                        *slot += w * g;
                    }
                }
                for (g, i) in out.iter_mut().zip(&interference) {
                    *g /= 1.0 + i;
                }
                out
            })
            .collect();
        Ok(parts.concat())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_to_infinity, QuadOptions};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_budget() -> LinkBudget {
        // c / (4π f d) = 1
        let carrier_hz = 1e9;
        LinkBudget {
            carrier_hz,
            distance_m: SPEED_OF_LIGHT / (4.0 * PI * carrier_hz),
            gain_tx_dbi: 0.0,
            gain_rx_dbi: 0.0,
            tx_snr_db: 0.0,
        }
    }

    #[test]
    fn pdf_at_zero_is_alpha() {
        for p in [
            ShadowedRicianParams::new(0.126, 10.0, 0.835).unwrap(),
            ShadowedRicianParams::new(0.063, 0.739, 8.97e-4).unwrap(),
            ShadowedRicianParams::rayleigh(),
        ] {
            assert_relative_eq!(shadowed_rician_pdf(0.0, &p).unwrap(), p.alpha(), max_relative = 1e-14);
        }
    }

    #[test]
    fn derived_parameters_are_ordered() {
        let p = ShadowedRicianParams::new(0.126, 10.0, 0.835).unwrap();
        assert!(p.alpha() > 0.0 && p.beta() > 0.0 && p.delta() >= 0.0 && p.delta() < p.beta());
    }

    #[test]
    fn pdf_matches_power_series_evaluation() {
        let p = ShadowedRicianParams::new(0.126, 10.0, 0.835).unwrap();
        let z = p.delta();
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..200 {
            let kf = k as f64;
            term *= (p.m + kf) * z / ((kf + 1.0) * (kf + 1.0));
            sum += term;
        }
        let oracle = p.alpha() * (-p.beta()).exp() * sum;
        assert_relative_eq!(shadowed_rician_pdf(1.0, &p).unwrap(), oracle, max_relative = 1e-12);
    }

    #[test]
    fn pdf_normalizes() {
        for p in [
            ShadowedRicianParams::new(0.5, 1.0, 1.0).unwrap(),
            ShadowedRicianParams::new(0.126, 10.0, 0.835).unwrap(),
            ShadowedRicianParams::new(0.158, 19.4, 1.29).unwrap(),
        ] {
            let r = integrate_to_infinity(
                |x| p.ln_pdf(x).unwrap().exp(),
                0.0,
                p.mean_power(),
                QuadOptions::default(),
            )
            .unwrap();
            assert!((r.value - 1.0).abs() < 1e-6, "{p:?}: {}", r.value);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ShadowedRicianParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ShadowedRicianParams::new(0.1, 0.4, 1.0).is_err());
        assert!(ShadowedRicianParams::new(0.1, 1.0, -1.0).is_err());
        let bad = ShadowedRicianParams {
            b: -1.0,
            m: 1.0,
            omega: 0.0,
        };
        assert!(shadowed_rician_pdf(1.0, &bad).is_err());
        assert!(shadowed_rician_pdf(-1.0, &ShadowedRicianParams::rayleigh()).is_err());
    }

    #[test]
    fn no_los_samples_are_exponential() {
        let p = ShadowedRicianParams::new(0.25, 3.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = p.sampler().unwrap();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01 * 0.5);
        // P(X > mean) = e^{-1} for an exponential
        let tail = xs.iter().filter(|&&x| x > 0.5).count() as f64 / n as f64;
        assert!((tail - (-1f64).exp()).abs() < 0.005);
    }

    #[test]
    fn pathloss_examples() {
        assert_relative_eq!(pathloss_factor(&unit_budget()).unwrap(), 1.0, max_relative = 1e-14);
        let l = LinkBudget {
            carrier_hz: 2e9,
            distance_m: 1e6,
            gain_tx_dbi: 0.0,
            gain_rx_dbi: 0.0,
            tx_snr_db: 0.0,
        };
        let phi = pathloss_factor(&l).unwrap();
        let direct = (SPEED_OF_LIGHT / (4.0 * PI * 2e9 * 1e6)).powi(2);
        assert_relative_eq!(phi, direct, max_relative = 1e-14);
        // With c rounded to 3e8 this is 1.425e-16; the exact constant sits 0.14% lower.
        assert!((phi - 1.425e-16).abs() / 1.425e-16 < 2e-3);
        let far = pathloss_factor(&l.at_distance(2e6)).unwrap();
        assert_relative_eq!(phi / far, 4.0, max_relative = 1e-14);
        assert!(pathloss_factor(&l.at_distance(0.0)).is_err());
        assert!(pathloss_factor(&LinkBudget { carrier_hz: 0.0, ..l }).is_err());
    }

    #[test]
    fn placement_examples() {
        let mut field = InterfererField {
            count: 0,
            r_inner_m: 2000.0,
            r_outer_m: 10_000.0,
            link: unit_budget(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(place_interferers(&field, &mut rng).is_empty());
        field.count = 1000;
        let d = place_interferers(&field, &mut rng);
        assert!(d.iter().all(|&x| (2000.0..=10_000.0).contains(&x)));
    }

    #[test]
    fn aggregate_interference_examples() {
        let mut field = InterfererField {
            count: 0,
            r_inner_m: 1.0,
            r_outer_m: 2.0,
            link: unit_budget(),
        };
        assert_eq!(aggregate_interference(&field, &[], &[]).unwrap(), 0.0);
        field.count = 1;
        field.link.tx_snr_db = linear_to_db(2.0);
        assert_relative_eq!(
            aggregate_interference(&field, &[1.0], &[0.5]).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert!(matches!(
            aggregate_interference(&field, &[1.0, 1.0], &[0.5]),
            Err(QosError::Contract(_))
        ));
    }

    #[test]
    fn sinr_examples() {
        let mut s = Scenario {
            satellite: unit_budget(),
            fading: ShadowedRicianParams::rayleigh(),
            interferers: InterfererField {
                count: 0,
                r_inner_m: 1.0,
                r_outer_m: 2.0,
                link: unit_budget(),
            },
            rx_antennas: 1,
            seed: 0,
            interferer_distances: None,
        };
        s.satellite.tx_snr_db = linear_to_db(5.0);
        assert_relative_eq!(s.sinr(2.0, 0.0).unwrap(), 10.0, max_relative = 1e-12);
        assert_eq!(s.sinr(0.0, 0.0).unwrap(), 0.0);
        s.satellite.tx_snr_db = 10.0;
        assert_relative_eq!(s.sinr(1.0, 4.0).unwrap(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn nested_placement() {
        let s = Scenario {
            satellite: unit_budget(),
            fading: ShadowedRicianParams::rayleigh(),
            interferers: InterfererField {
                count: 6,
                r_inner_m: 2000.0,
                r_outer_m: 10_000.0,
                link: unit_budget(),
            },
            rx_antennas: 1,
            seed: 11,
            interferer_distances: None,
        };
        let all = s.interferer_distances();
        let three = s.with_interferer_count(3);
        assert_eq!(three.interferer_distances(), all[..3].to_vec());
        let nine = s.with_interferer_count(9).interferer_distances();
        assert_eq!(&nine[..6], &all[..]);
    }

    #[test]
    fn draws_are_coupled_across_interferer_count() {
        let link = FadingLink {
            fading: ShadowedRicianParams::new(0.126, 10.0, 0.835).unwrap(),
            signal_scale: 10.0,
            interferer_weights: vec![0.3, 0.2],
            seed: 5,
        };
        let fewer = FadingLink {
            interferer_weights: vec![0.3],
            ..link.clone()
        };
        let a = link.draw(10_000).unwrap();
        let b = fewer.draw(10_000).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
        assert_eq!(a, link.draw(10_000).unwrap());
    }
}
