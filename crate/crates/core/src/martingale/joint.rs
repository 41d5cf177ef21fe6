//! Joint return of `M` and `U` measured in `U`-moves.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::map_walks;
use crate::martingale::m423::M423Walker;
use crate::stats::{wilson, CiEstimate, CONFIDENCE};

pub const MAX_TAU_INDEX: u64 = 1 << 16;
/// Walks that need more steps than this are abandoned and excluded.
pub const JOINT_STEP_CAP: u64 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointReturnRow {
    pub n_tau: u64,
    pub hits: u64,
    /// Walks that reached `n_tau` U-moves.
    pub walks: u64,
    pub abandoned: u64,
    /// `P(M_{n_tau} = 0, U_{n_tau} = 0)`.
    pub ci: CiEstimate,
}

/// One row per entry of `n_taus`, all from the same `num_walks` walks; walk
/// `i` runs on stream `(seed, i)` until `max(n_taus)` U-moves.
pub fn joint_return_table(
    n_taus: &[u64],
    num_walks: u64,
    seed: u64,
    step_cap: u64,
) -> Result<Vec<JointReturnRow>> {
    if n_taus.iter().any(|&t| t == 0 || t > MAX_TAU_INDEX) || n_taus.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "n_tau values must lie in 1..={MAX_TAU_INDEX}"
        )));
    }
    if num_walks == 0 {
        return Err(Error::InvalidParameter("num_walks must be at least 1".into()));
    }
    let mut targets: Vec<u64> = n_taus.to_vec();
    targets.sort_unstable();
    targets.dedup();
    let last = *targets.last().expect("non-empty");
    // Per walk: for each target, Some(hit) if reached, None if abandoned.
    let outcomes: Vec<Vec<Option<bool>>> = map_walks(seed, num_walks, |_, rng| {
        let mut w = M423Walker::new(rng.substream(0), rng.substream(1));
        let mut out = vec![None; targets.len()];
        let mut next = 0;
        while w.n < step_cap {
            if w.step()?.u_moved && w.u_moves == targets[next] {
                let p = w.pos;
                out[next] = Some(p[0] == 0 && p[2] == 0 && p[3] == 0);
                next += 1;
                if w.u_moves == last {
                    break;
                }
            }
        }
        Ok(out)
    })?;
    Ok(n_taus
        .iter()
        .map(|t| {
            let i = targets.binary_search(t).expect("target present");
            let reached = outcomes.iter().filter_map(|o| o[i]);
            let (walks, hits) = reached.fold((0, 0), |(n, h), x| (n + 1, h + u64::from(x)));
            JointReturnRow {
                n_tau: *t,
                hits,
                walks,
                abandoned: num_walks - walks,
                ci: wilson(hits, walks, CONFIDENCE),
            }
        })
        .collect())
}

pub fn joint_return_probability(n_tau: u64, num_walks: u64, seed: u64) -> Result<JointReturnRow> {
    Ok(joint_return_table(&[n_tau], num_walks, seed, JOINT_STEP_CAP)?.remove(0))
}
