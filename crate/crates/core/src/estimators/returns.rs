//! Origin returns in dyadic windows, and the planar window-return oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{decoupled::planar_step, map_walks};
use crate::lattice::{run, WalkSpec, WindowHits};
use crate::stats::{wilson, CiEstimate, CONFIDENCE};

pub const MAX_WINDOW_EXPONENT: u32 = 24;

/// `(ln ln m / ln m)^2` at `m = 2^k`.
pub fn decay_profile(k: u32) -> f64 {
    let ln = k as f64 * std::f64::consts::LN_2;
    (ln.ln() / ln).powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowEstimate {
    pub k: u32,
    pub window_lo: u64,
    pub window_hi: u64,
    pub hits: u64,
    pub walks: u64,
    pub ci: CiEstimate,
    /// `C (ln ln 2^k / ln 2^k)^2`, with `C` matched to the first row's
    /// estimate. Plot overlay only.
    pub reference_curve: f64,
}

/// Estimates `P[0 in {S_{2^k}, ..., S_{2^(k+1)}}]` for `k_min <= k <= k_max`
/// from one ensemble of walks of length `2^(k_max+1)`.
pub fn window_return_probability(
    spec: &WalkSpec,
    k_min: u32,
    k_max: u32,
    num_walks: u64,
    seed: u64,
) -> Result<Vec<WindowEstimate>> {
    if k_min < 1 || k_min > k_max || k_max > MAX_WINDOW_EXPONENT {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k_min <= k_max <= {MAX_WINDOW_EXPONENT}, got {k_min}..{k_max}"
        )));
    }
    if num_walks == 0 {
        return Err(Error::InvalidParameter("num_walks must be at least 1".into()));
    }
    let flags: Vec<Vec<bool>> = map_walks(seed, num_walks, |_, mut rng| {
        let mut w = WindowHits::new(k_min, k_max);
        run(spec, w.steps_needed(), &mut rng, &mut [&mut w])?;
        Ok(w.hits().to_vec())
    })?;

    let mut rows: Vec<WindowEstimate> = (k_min..=k_max)
        .enumerate()
        .map(|(i, k)| {
            let hits = flags.iter().filter(|f| f[i]).count() as u64;
            WindowEstimate {
                k,
                window_lo: 1 << k,
                window_hi: 1 << (k + 1),
                hits,
                walks: num_walks,
                ci: wilson(hits, num_walks, CONFIDENCE),
                reference_curve: 0.0,
            }
        })
        .collect();
    let scale = rows[0].ci.point / decay_profile(k_min);
    for r in &mut rows {
        r.reference_curve = scale * decay_profile(r.k);
    }
    Ok(rows)
}

/// Start of the window for [`srw2d_window_return`]: `t = round(t_frac * n)`.
pub fn window_start(t_frac: f64, n: u64) -> u64 {
    ((t_frac * n as f64).round() as u64).min(2 * n)
}

/// Monte Carlo estimate of `P[0 in {U(t), ..., U(2n)}]` for the planar
/// simple random walk, `t = t_frac * n`.
pub fn srw2d_window_return(t_frac: f64, n: u64, num_walks: u64, seed: u64) -> Result<CiEstimate> {
    if !(t_frac > 0.0 && t_frac <= 2.0) {
        return Err(Error::InvalidParameter(format!("t_frac must lie in (0, 2], got {t_frac}")));
    }
    if num_walks == 0 {
        return Err(Error::InvalidParameter("num_walks must be at least 1".into()));
    }
    let t = window_start(t_frac, n);
    let hits: Vec<bool> = map_walks(seed, num_walks, |_, mut rng| {
        let mut pos = [0i64; 2];
        for time in 1..=2 * n {
            let s = planar_step(&mut rng);
            pos[0] += s[0];
            pos[1] += s[1];
            if time >= t && pos == [0, 0] {
                return Ok(true);
            }
        }
        Ok(t == 0)
    })?;
    let h = hits.iter().filter(|&&b| b).count() as u64;
    Ok(wilson(h, num_walks, CONFIDENCE))
}
