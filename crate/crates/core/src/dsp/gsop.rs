use super::WaveformQuad;
use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

/// Sample Gram matrix of two rails, normalized by length.
pub fn gram(i: &[f64], q: &[f64]) -> [[f64; 2]; 2] {
    let c = dot(i, q);
    [[dot(i, i), c], [c, dot(q, q)]]
}

fn orthonormalize(i: &[f64], q: &[f64], pol: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let pi = dot(i, i);
    if !(pi > 0.0) {
        return Err(Error::Domain(format!("{pol} in-phase rail has no power")));
    }
    let a = pi.sqrt();
    let i_out: Vec<f64> = i.iter().map(|v| v / a).collect();
    let rho = dot(q, &i_out);
    let q_perp: Vec<f64> = q.iter().zip(&i_out).map(|(v, u)| v - rho * u).collect();
    let pq = dot(&q_perp, &q_perp);
    // Anything below this is rounding residue from a Q rail that was a copy of I.
    if !(pq > 1e-24 * dot(q, q).max(pi)) {
        return Err(Error::Domain(format!(
            "{pol} quadrature rail is not independent of the in-phase rail"
        )));
    }
    let b = pq.sqrt();
    let mut q_out: Vec<f64> = q_perp.iter().map(|v| v / b).collect();
    // One refinement pass pulls the cross term down to rounding level.
    let r = dot(&q_out, &i_out);
    q_out.iter_mut().zip(&i_out).for_each(|(v, u)| *v -= r * u);
    let n = dot(&q_out, &q_out).sqrt();
    q_out.iter_mut().for_each(|v| *v /= n);
    Ok((i_out, q_out))
}

/// Gram-Schmidt orthogonalization of each polarization's quadrature rail against its
/// in-phase rail, with both rails scaled to unit mean power.
pub fn gsop(wave: &WaveformQuad) -> Result<WaveformQuad> {
    wave.check()?;
    if wave.is_empty() {
        return Err(Error::Length("empty waveform".into()));
    }
    let (xi, xq) = orthonormalize(&wave.xi, &wave.xq, "X")?;
    let (yi, yq) = orthonormalize(&wave.yi, &wave.yq, "Y")?;
    Ok(WaveformQuad {
        xi,
        xq,
        yi,
        yq,
        ..wave.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{generate_frame, tx_waveform};
    use proptest::prelude::*;

    fn assert_identity(g: [[f64; 2]; 2]) {
        assert!((g[0][0] - 1.0).abs() < 1e-9 && (g[1][1] - 1.0).abs() < 1e-9, "{g:?}");
        assert!(g[0][1].abs() < 1e-9, "{g:?}");
    }

    fn skewed(deg: f64, gain: f64) -> WaveformQuad {
        let f = generate_frame(16, 2048, 64, 2).unwrap();
        let mut w = tx_waveform(&f, 0.05, 2, 32, 1e9).unwrap();
        let (s, c) = deg.to_radians().sin_cos();
        for (i, q) in w.xi.iter().zip(w.xq.iter_mut()) {
            *q = gain * (c * *q + s * *i);
        }
        for (i, q) in w.yi.iter().zip(w.yq.iter_mut()) {
            *q = gain * (c * *q - s * *i);
        }
        w
    }

    #[test]
    fn ten_degree_quadrature_skew() {
        let w = skewed(10.0, 0.7);
        let g0 = gram(&w.xi, &w.xq);
        assert!(g0[0][1].abs() > 0.01);
        let out = gsop(&w).unwrap();
        assert_identity(gram(&out.xi, &out.xq));
        assert_identity(gram(&out.yi, &out.yq));
    }

    #[test]
    fn orthonormal_input_only_rescales() {
        let w = skewed(0.0, 1.0);
        let out = gsop(&w).unwrap();
        let g = gram(&w.xi, &w.xq);
        let a = g[0][0].sqrt();
        for (o, v) in out.xi.iter().zip(&w.xi) {
            assert!((o - v / a).abs() < 1e-9);
        }
        // The quadrature rail moves only by the sample cross-correlation of the input.
        let b = g[1][1].sqrt();
        let err = out.xq.iter().zip(&w.xq).map(|(o, v)| (o - v / b).powi(2)).sum::<f64>() / w.len() as f64;
        assert!(err.sqrt() < 0.05);
    }

    #[test]
    fn degenerate_rails_are_rejected() {
        let mut w = skewed(0.0, 1.0);
        w.xi.iter_mut().for_each(|v| *v = 0.0);
        assert!(gsop(&w).is_err());
        let mut w = skewed(0.0, 1.0);
        w.yq = w.yi.clone();
        assert!(gsop(&w).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn any_full_rank_input_becomes_orthonormal(
            a in prop::collection::vec(-5.0f64..5.0, 64),
            b in prop::collection::vec(-5.0f64..5.0, 64),
            mix in -0.95f64..0.95,
        ) {
            let q: Vec<f64> = a.iter().zip(&b).map(|(x, y)| mix * x + y).collect();
            let g = gram(&a, &q);
            prop_assume!(g[0][0] * g[1][1] - g[0][1] * g[0][1] > 1e-6 * g[0][0] * g[1][1]);
            let w = WaveformQuad { xi: a.clone(), xq: q.clone(), yi: q, yq: a, sample_rate_hz: 1.0,
                samples_per_symbol: 2.0, symbol_start: 0.0, rolloff: 0.05 };
            let out = gsop(&w).unwrap();
            for (i, qq) in [(&out.xi, &out.xq), (&out.yi, &out.yq)] {
                let g = gram(i, qq);
                prop_assert!((g[0][0] - 1.0).abs() < 1e-9 && (g[1][1] - 1.0).abs() < 1e-9);
                prop_assert!(g[0][1].abs() < 1e-9);
            }
        }
    }
}
