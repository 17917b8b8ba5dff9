use serde::{Deserialize, Serialize};

use super::{DecoyParams, SessionTally};
use crate::error::{Error, Result};

/// Concentration bound used to turn observed counts into confidence intervals.
pub trait DeviationBound: Send + Sync {
    /// Half-width of the interval for a total of `n` events at failure probability `eps`.
    fn delta(&self, n: f64, eps: f64) -> f64;
}

/// Hoeffding: δ(n, ε) = √(n/2 · ln(1/ε)).
#[derive(Debug, Clone, Copy, Default)]
pub struct Hoeffding;

impl DeviationBound for Hoeffding {
    fn delta(&self, n: f64, eps: f64) -> f64 {
        (n / 2.0 * (1.0 / eps).ln()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoyBounds {
    pub s_z0_lower: f64,
    pub s_z1_lower: f64,
    pub phi_z_upper: f64,
    pub s_z0_upper: f64,
    pub s_x1_lower: f64,
    pub v_x1_upper: f64,
}

struct Intensities {
    mu: f64,
    nu: f64,
    p_mu: f64,
    p_nu: f64,
}

impl Intensities {
    /// Probability that a pulse carries exactly `n` photons, averaged over intensities.
    fn tau(&self, n: i32) -> f64 {
        let fact: f64 = (1..=n).map(f64::from).product();
        let term = |k: f64, p: f64| p * (-k).exp() * k.powi(n) / fact;
        term(self.mu, self.p_mu) + term(self.nu, self.p_nu)
    }

    /// Signal-intensity count rescaled to the photon-number picture, shifted by ±δ.
    fn at_mu(&self, count: u64, delta: f64) -> f64 {
        self.mu.exp() / self.p_mu * (count as f64 + delta)
    }

    fn at_nu(&self, count: u64, delta: f64) -> f64 {
        self.nu.exp() / self.p_nu * (count as f64 + delta)
    }
}

struct Yields {
    s0_lower: f64,
    s0_upper: f64,
    s1_lower: f64,
}

fn basis_yields(
    ints: &Intensities,
    n_mu: u64,
    n_nu: u64,
    m_nu: u64,
    m_total: u64,
    dev: &dyn DeviationBound,
    eps: f64,
) -> Yields {
    let (mu, nu) = (ints.mu, ints.nu);
    let n_total = (n_mu + n_nu) as f64;
    let d_n = dev.delta(n_total, eps);
    let d_m = dev.delta(m_total as f64, eps);
    let n_mu_hi = ints.at_mu(n_mu, d_n);
    let n_nu_lo = ints.at_nu(n_nu, -d_n);
    let m_nu_hi = ints.at_nu(m_nu, d_m);
    let tau0 = ints.tau(0);
    let tau1 = ints.tau(1);

    let s0_lower = (tau0 * (mu * n_nu_lo - nu * n_mu_hi) / (mu - nu)).clamp(0.0, n_total);
    let s0_upper = (2.0 * (tau0 * m_nu_hi + d_n)).min(n_total);
    let s1 = tau1 * mu / (nu * (mu - nu))
        * (n_nu_lo - nu * nu / (mu * mu) * n_mu_hi - (mu * mu - nu * nu) / (mu * mu) * s0_upper / tau0);
    Yields {
        s0_lower,
        s0_upper,
        s1_lower: s1.clamp(0.0, (n_total - s0_lower).max(0.0)),
    }
}

/// Random-sampling correction between the X-basis and Z-basis single-photon phase error rates.
fn gamma(a: f64, b: f64, c: f64, d: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    let ln2 = std::f64::consts::LN_2;
    let inner = (c + d) / (c * d * (1.0 - b) * b) * 21.0 * 21.0 / (a * a);
    let v = (c + d) * (1.0 - b) * b / (c * d * ln2) * inner.log2();
    v.max(0.0).sqrt()
}

/// One-decoy finite-key bounds with Hoeffding deviations.
pub fn one_decoy_bounds(tally: &SessionTally, params: &DecoyParams) -> Result<DecoyBounds> {
    one_decoy_bounds_with(tally, params, &Hoeffding)
}

/// One-decoy finite-key bounds with a caller-supplied deviation function.
///
/// Each statistical estimate fails with probability ε_sec/19.
pub fn one_decoy_bounds_with(
    tally: &SessionTally,
    params: &DecoyParams,
    dev: &dyn DeviationBound,
) -> Result<DecoyBounds> {
    if !(params.nu < params.mu) || !(params.nu > 0.0) {
        return Err(Error::Parameter(format!(
            "one-decoy bounds need 0 < nu < mu (nu = {}, mu = {})",
            params.nu, params.mu
        )));
    }
    if tally.n_z_nu == 0 || tally.n_x_nu == 0 {
        return Err(Error::DegenerateStatistics(
            "no decoy-intensity detections in one basis".into(),
        ));
    }
    if tally.n_z_mu == 0 || tally.n_x_mu == 0 {
        return Err(Error::DegenerateStatistics(
            "no signal-intensity detections in one basis".into(),
        ));
    }
    let ints = Intensities {
        mu: params.mu,
        nu: params.nu,
        p_mu: params.p_mu,
        p_nu: params.p_nu(),
    };
    let eps = params.eps_sec / 19.0;

    let z = basis_yields(&ints, tally.n_z_mu, tally.n_z_nu, tally.m_z_nu, tally.m_z(), dev, eps);
    let x = basis_yields(&ints, tally.n_x_mu, tally.n_x_nu, tally.m_x_nu, tally.m_x(), dev, eps);

    let d_mx = dev.delta(tally.m_x() as f64, eps);
    let m_mu_hi = ints.at_mu(tally.m_x_mu, d_mx);
    let m_nu_lo = ints.at_nu(tally.m_x_nu, -d_mx);
    let v_x1 = (ints.tau(1) * (m_mu_hi - m_nu_lo) / (ints.mu - ints.nu)).max(0.0);

    let phi = if z.s1_lower <= 0.0 || x.s1_lower <= 0.0 {
        0.5
    } else {
        let ratio = v_x1 / x.s1_lower;
        if ratio >= 0.5 {
            0.5
        } else {
            (ratio + gamma(params.eps_sec, ratio, z.s1_lower, x.s1_lower)).min(0.5)
        }
    };

    Ok(DecoyBounds {
        s_z0_lower: z.s0_lower,
        s_z1_lower: z.s1_lower,
        phi_z_upper: phi,
        s_z0_upper: z.s0_upper,
        s_x1_lower: x.s1_lower,
        v_x1_upper: v_x1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkd::expected_statistics;

    fn operating_tally() -> (SessionTally, DecoyParams) {
        let p = DecoyParams::default();
        let t = expected_statistics(&p, (-0.046f64 * 3.5).exp() * 0.5, 0.0525, 7e-7, 10_000_000_000).unwrap();
        (t, p)
    }

    #[test]
    fn hoeffding_width() {
        let d = Hoeffding.delta(2e6, 1e-10);
        assert!((d - (1e6f64 * 10.0 * std::f64::consts::LN_10).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn bounds_stay_inside_totals() {
        let (t, p) = operating_tally();
        let b = one_decoy_bounds(&t, &p).unwrap();
        assert!(b.s_z0_lower >= 0.0 && b.s_z1_lower > 0.0);
        assert!(b.s_z0_lower + b.s_z1_lower <= t.n_z() as f64);
        assert!(b.s_z0_lower <= b.s_z0_upper);
        assert!((0.0..=0.5).contains(&b.phi_z_upper));
        assert!(b.phi_z_upper >= t.qber_x());
    }

    #[test]
    fn scaling_the_tally_scales_the_bounds() {
        let (t, p) = operating_tally();
        let b1 = one_decoy_bounds(&t, &p).unwrap();
        let k = 16u64;
        let big = SessionTally {
            n_z_mu: t.n_z_mu * k,
            n_z_nu: t.n_z_nu * k,
            m_z_mu: t.m_z_mu * k,
            m_z_nu: t.m_z_nu * k,
            n_x_mu: t.n_x_mu * k,
            n_x_nu: t.n_x_nu * k,
            m_x_mu: t.m_x_mu * k,
            m_x_nu: t.m_x_nu * k,
            pulses_sent: t.pulses_sent * k,
            duration_s: t.duration_s * k as f64,
        };
        let bk = one_decoy_bounds(&big, &p).unwrap();
        let r = bk.s_z1_lower / (k as f64 * b1.s_z1_lower);
        // Deviation terms grow like √k, so the ratio approaches 1 from above.
        assert!((1.0..1.05).contains(&r), "{r}");
        assert!(bk.phi_z_upper <= b1.phi_z_upper);
    }

    #[test]
    fn errors() {
        let (t, p) = operating_tally();
        let bad = DecoyParams { nu: 0.6, ..p };
        assert!(matches!(one_decoy_bounds(&t, &bad), Err(Error::Parameter(_))));
        let empty = SessionTally { n_z_nu: 0, ..t };
        assert!(matches!(
            one_decoy_bounds(&empty, &p),
            Err(Error::DegenerateStatistics(_))
        ));
    }

    #[test]
    fn wider_deviation_gives_looser_bounds() {
        struct Doubled;
        impl DeviationBound for Doubled {
            fn delta(&self, n: f64, eps: f64) -> f64 {
                2.0 * Hoeffding.delta(n, eps)
            }
        }
        let (t, p) = operating_tally();
        let a = one_decoy_bounds(&t, &p).unwrap();
        let b = one_decoy_bounds_with(&t, &p, &Doubled).unwrap();
        assert!(b.s_z1_lower < a.s_z1_lower);
        assert!(b.phi_z_upper > a.phi_z_upper);
    }

    #[test]
    fn gamma_limits() {
        assert_eq!(gamma(1e-9, 0.0, 1e6, 1e5), 0.0);
        let g1 = gamma(1e-9, 0.02, 1e6, 1e5);
        let g2 = gamma(1e-9, 0.02, 1e8, 1e7);
        assert!(g1 > g2 && g2 > 0.0);
    }
}
