use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::DecoyParams;
use crate::error::{Error, Result};

/// Sifted detection and error counts for one acquisition block.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionTally {
    pub n_z_mu: u64,
    pub n_z_nu: u64,
    pub m_z_mu: u64,
    pub m_z_nu: u64,
    pub n_x_mu: u64,
    pub n_x_nu: u64,
    pub m_x_mu: u64,
    pub m_x_nu: u64,
    pub pulses_sent: u64,
    /// Acquisition time t, s.
    pub duration_s: f64,
}

impl SessionTally {
    pub fn n_z(&self) -> u64 {
        self.n_z_mu + self.n_z_nu
    }

    pub fn m_z(&self) -> u64 {
        self.m_z_mu + self.m_z_nu
    }

    pub fn n_x(&self) -> u64 {
        self.n_x_mu + self.n_x_nu
    }

    pub fn m_x(&self) -> u64 {
        self.m_x_mu + self.m_x_nu
    }

    /// Z-basis error rate, 0 when nothing was detected.
    pub fn qber_z(&self) -> f64 {
        if self.n_z() == 0 {
            0.0
        } else {
            self.m_z() as f64 / self.n_z() as f64
        }
    }

    pub fn qber_x(&self) -> f64 {
        if self.n_x() == 0 {
            0.0
        } else {
            self.m_x() as f64 / self.n_x() as f64
        }
    }

    /// Field values in declaration order, excluding the duration.
    pub fn counts(&self) -> [u64; 9] {
        [
            self.n_z_mu,
            self.n_z_nu,
            self.m_z_mu,
            self.m_z_nu,
            self.n_x_mu,
            self.n_x_nu,
            self.m_x_mu,
            self.m_x_nu,
            self.pulses_sent,
        ]
    }

    pub fn is_consistent(&self) -> bool {
        let le = |m: u64, n: u64| m <= n && n <= self.pulses_sent;
        le(self.m_z_mu, self.n_z_mu)
            && le(self.m_z_nu, self.n_z_nu)
            && le(self.m_x_mu, self.n_x_mu)
            && le(self.m_x_nu, self.n_x_nu)
            && self.n_z() + self.n_x() <= self.pulses_sent
    }
}

/// Monte Carlo tally with the photon-number ground truth attached.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaggedSession {
    pub tally: SessionTally,
    /// Sifted Z detections from vacuum pulses.
    pub s_z0: u64,
    /// Sifted Z detections from single-photon pulses.
    pub s_z1: u64,
    pub s_x1: u64,
    /// Bit errors among single-photon X detections.
    pub v_x1: u64,
}

fn check_channel(transmittance: f64, efficiency: f64, p_r: f64) -> Result<()> {
    for (name, v) in [
        ("channel_transmittance", transmittance),
        ("detector_efficiency", efficiency),
        ("p_r_per_gate", p_r),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    Ok(())
}

/// Gain Q_k and error gain E_k·Q_k for intensity k under the threshold-detector model.
pub fn gains(intensity: f64, eta: f64, p_r: f64, e_misalign: f64) -> (f64, f64) {
    let arrive = -(-eta * intensity).exp_m1();
    let q = 1.0 - (1.0 - 2.0 * p_r) * (-eta * intensity).exp();
    let eq = p_r + e_misalign * arrive;
    (q, eq)
}

/// Expected tally for `pulses` pulses, counts rounded half-to-even.
pub fn expected_statistics(
    params: &DecoyParams,
    channel_transmittance: f64,
    detector_efficiency: f64,
    p_r_per_gate: f64,
    pulses: u64,
) -> Result<SessionTally> {
    check_channel(channel_transmittance, detector_efficiency, p_r_per_gate)?;
    let eta = channel_transmittance * detector_efficiency;
    let n = pulses as f64;
    let zz = params.p_z_alice * params.p_z_bob;
    let xx = (1.0 - params.p_z_alice) * (1.0 - params.p_z_bob);
    let count = |x: f64| x.round_ties_even() as u64;
    let (q_mu, eq_mu) = gains(params.mu, eta, p_r_per_gate, params.e_misalign);
    let (q_nu, eq_nu) = gains(params.nu, eta, p_r_per_gate, params.e_misalign);
    let s_mu = n * params.p_mu;
    let s_nu = n * params.p_nu();
    Ok(SessionTally {
        n_z_mu: count(s_mu * zz * q_mu),
        n_z_nu: count(s_nu * zz * q_nu),
        m_z_mu: count(s_mu * zz * eq_mu),
        m_z_nu: count(s_nu * zz * eq_nu),
        n_x_mu: count(s_mu * xx * q_mu),
        n_x_nu: count(s_nu * xx * q_nu),
        m_x_mu: count(s_mu * xx * eq_mu),
        m_x_nu: count(s_nu * xx * eq_nu),
        pulses_sent: pulses,
        duration_s: n / params.rep_rate_hz,
    })
}

/// Per-pulse Monte Carlo tally, reproducible for a given seed.
pub fn simulate_session(
    seed: u64,
    params: &DecoyParams,
    channel_transmittance: f64,
    detector_efficiency: f64,
    p_r_per_gate: f64,
    pulses: u64,
) -> Result<SessionTally> {
    simulate_session_tagged(
        seed,
        params,
        channel_transmittance,
        detector_efficiency,
        p_r_per_gate,
        pulses,
    )
    .map(|t| t.tally)
}

const MAX_PHOTONS: usize = 24;

struct Source {
    // Cumulative Poisson probabilities, last entry forced to 1.
    cdf: [f64; MAX_PHOTONS + 1],
}

impl Source {
    fn new(mean: f64) -> Self {
        let mut cdf = [0.0; MAX_PHOTONS + 1];
        let mut term = (-mean).exp();
        let mut acc = 0.0;
        for (n, slot) in cdf.iter_mut().enumerate() {
            acc += term;
            *slot = acc;
            term *= mean / (n + 1) as f64;
        }
        cdf[MAX_PHOTONS] = 1.0;
        Self { cdf }
    }

    #[cfg(test)]
    fn sample(&self, u: f64) -> usize {
        self.cdf.iter().position(|&c| u < c).unwrap_or(MAX_PHOTONS)
    }
}

/// One (intensity, photon number, signal click, dark click) outcome with at least one click.
#[derive(Clone, Copy)]
struct Event {
    k: usize,
    photons: usize,
    signal: bool,
    dark: bool,
}

/// Monte Carlo session that also records how many detections came from vacuum and
/// single-photon pulses. Double clicks are assigned a random bit.
///
/// Pulses are independent and most produce no click, so runs of empty pulses are drawn
/// from a geometric distribution and each clicking pulse from the per-pulse law
/// conditioned on a click. The tally has the same distribution as pulse-by-pulse sampling.
pub fn simulate_session_tagged(
    seed: u64,
    params: &DecoyParams,
    channel_transmittance: f64,
    detector_efficiency: f64,
    p_r_per_gate: f64,
    pulses: u64,
) -> Result<TaggedSession> {
    check_channel(channel_transmittance, detector_efficiency, p_r_per_gate)?;
    let eta = channel_transmittance * detector_efficiency;
    let sources = [Source::new(params.mu), Source::new(params.nu)];
    let mut arrive = [0.0; MAX_PHOTONS + 1];
    for (n, a) in arrive.iter_mut().enumerate() {
        *a = 1.0 - (1.0 - eta).powi(n as i32);
    }
    let p_dark_any = 1.0 - (1.0 - p_r_per_gate) * (1.0 - p_r_per_gate);
    // Chance that both detectors fire given that at least one dark click happened.
    let p_both_given = if p_dark_any > 0.0 {
        p_r_per_gate * p_r_per_gate / p_dark_any
    } else {
        0.0
    };

    // Joint law of the clicking outcomes, as a cumulative table.
    let mut events = Vec::new();
    let mut cdf = Vec::new();
    let mut acc = 0.0;
    for (k, src) in sources.iter().enumerate() {
        let p_k = if k == 0 { params.p_mu } else { 1.0 - params.p_mu };
        for n in 0..=MAX_PHOTONS {
            let p_n = src.cdf[n] - if n == 0 { 0.0 } else { src.cdf[n - 1] };
            let w = p_k * p_n;
            let a = if n > 0 { arrive[n] } else { 0.0 };
            for (signal, dark, p) in [
                (true, false, a * (1.0 - p_dark_any)),
                (true, true, a * p_dark_any),
                (false, true, (1.0 - a) * p_dark_any),
            ] {
                if w * p > 0.0 {
                    acc += w * p;
                    events.push(Event {
                        k,
                        photons: n,
                        signal,
                        dark,
                    });
                    cdf.push(acc);
                }
            }
        }
    }
    let p_event = acc.min(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TaggedSession::default();
    // [basis][intensity]: detections and errors.
    let mut det = [[0u64; 2]; 2];
    let mut err = [[0u64; 2]; 2];

    let gaps = (p_event > 0.0)
        .then(|| Geometric::new(p_event).map_err(|e| Error::Domain(e.to_string())))
        .transpose()?;
    let mut used = 0u64;
    while let Some(g) = &gaps {
        let skip = g.sample(&mut rng);
        if skip >= pulses - used {
            break;
        }
        used += skip + 1;

        let u = rng.random::<f64>() * acc;
        let ev = events[cdf.partition_point(|&c| c <= u).min(events.len() - 1)];
        let alice_z = rng.random::<f64>() < params.p_z_alice;
        let bob_z = rng.random::<f64>() < params.p_z_bob;
        let bit = rng.random::<bool>();

        let mut clicks = [false; 2];
        if ev.signal {
            let which = if alice_z == bob_z {
                bit ^ (rng.random::<f64>() < params.e_misalign)
            } else {
                rng.random::<bool>()
            };
            clicks[usize::from(which)] = true;
        }
        if ev.dark {
            if rng.random::<f64>() < p_both_given {
                clicks = [true, true];
            } else {
                clicks[usize::from(rng.random::<bool>())] = true;
            }
        }
        if alice_z != bob_z {
            continue;
        }
        let bob_bit = match clicks {
            [true, true] => rng.random::<bool>(),
            [false, true] => true,
            [true, false] => false,
            [false, false] => unreachable!("every tabulated event clicks"),
        };
        let basis = usize::from(!alice_z);
        let wrong = bob_bit != bit;
        det[basis][ev.k] += 1;
        err[basis][ev.k] += u64::from(wrong);
        match (ev.photons, alice_z) {
            (0, true) => out.s_z0 += 1,
            (1, true) => out.s_z1 += 1,
            (1, false) => {
                out.s_x1 += 1;
                out.v_x1 += u64::from(wrong);
            }
            _ => {}
        }
    }

    out.tally = SessionTally {
        n_z_mu: det[0][0],
        n_z_nu: det[0][1],
        m_z_mu: err[0][0],
        m_z_nu: err[0][1],
        n_x_mu: det[1][0],
        n_x_nu: det[1][1],
        m_x_mu: err[1][0],
        m_x_nu: err[1][1],
        pulses_sent: pulses,
        duration_s: pulses as f64 / params.rep_rate_hz,
    };
    Ok(out)
}
