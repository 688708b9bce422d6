use serde::{Deserialize, Serialize};

use super::ShapeError;

/// Module counts per segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructuralCandidate {
    pub n: Vec<usize>,
}

impl StructuralCandidate {
    pub fn new(n: Vec<usize>) -> Self {
        Self { n }
    }

    pub fn segments(&self) -> usize {
        self.n.len()
    }

    pub fn total(&self) -> usize {
        self.n.iter().sum()
    }

    pub fn label(&self) -> String {
        self.n.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructureConfig {
    /// Number of module totals sampled around the centre of the bound interval.
    pub totals: usize,
    /// Fraction of the bound interval the sampled totals span.
    pub total_spread: f64,
    /// Largest allowed `max nᵢ − min nᵢ`; `⌈total/N⌉` when absent.
    pub max_imbalance: Option<usize>,
    /// Overall candidate cap, shared evenly across totals with the
    /// remainder going to the totals nearest the centre.
    pub candidate_cap: Option<usize>,
    /// Upper limit on the smallest feasible total.
    pub max_total: usize,
}

impl Default for StructureConfig {
    fn default() -> Self {
        Self { totals: 5, total_spread: 0.5, max_imbalance: None, candidate_cap: Some(81), max_total: 200 }
    }
}

fn compositions(total: usize, parts: usize, max_imbalance: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) {
        if parts == 1 {
            cur.push(left);
            let lo = *cur.iter().min().expect("non-empty");
            let hi = *cur.iter().max().expect("non-empty");
            if hi - lo <= cap {
                out.push(cur.clone());
            }
            cur.pop();
            return;
        }
        for first in 1..=left - (parts - 1) {
            cur.push(first);
            rec(left - first, parts - 1, cur, out, cap);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if total >= parts && parts > 0 {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out, max_imbalance);
    }
    out
}

/// Candidate module distributions for a target of arc length `length`.
///
/// Totals are bounded by `[length/l_max, length/l_min]`; `cfg.totals` values
/// are spread evenly around the interval centre. Each total is split into
/// `segments` positive parts (lexicographic order) under the balance limit,
/// then thinned by even striding to its share of the cap.
pub fn enumerate_structures(
    length: f64,
    segments: usize,
    l_range: (f64, f64),
    cfg: &StructureConfig,
) -> Result<Vec<StructuralCandidate>, ShapeError> {
    let (l_min, l_max) = l_range;
    if segments == 0 || !(l_min > 0.0 && l_max >= l_min && length > 0.0) || cfg.totals == 0 {
        return Err(ShapeError::InvalidConfig(format!(
            "segments {segments}, module length range ({l_min}, {l_max}), target length {length}"
        )));
    }
    let lo = length / l_max;
    let hi = length / l_min;
    if lo.ceil() as usize > cfg.max_total {
        return Err(ShapeError::InfeasibleBounds(format!("at least {:.0} modules needed, cap is {}", lo.ceil(), cfg.max_total)));
    }
    let centre = 0.5 * (lo + hi);
    let width = (hi - lo) * cfg.total_spread;
    let mut totals: Vec<usize> = (0..cfg.totals)
        .map(|k| {
            let off = if cfg.totals == 1 { 0.0 } else { k as f64 / (cfg.totals - 1) as f64 - 0.5 };
            (centre + off * width).round().max(1.0) as usize
        })
        .filter(|t| *t >= segments)
        .collect();
    totals.dedup();
    if totals.is_empty() {
        return Err(ShapeError::InfeasibleBounds(format!("no total of at least {segments} modules near {centre:.1}")));
    }

    let shares: Vec<Option<usize>> = match cfg.candidate_cap {
        None => vec![None; totals.len()],
        Some(cap) => {
            let base = cap / totals.len();
            let mut extra = cap % totals.len();
            let mut by_centre: Vec<usize> = (0..totals.len()).collect();
            by_centre.sort_by(|&a, &b| {
                (totals[a] as f64 - centre).abs().total_cmp(&(totals[b] as f64 - centre).abs()).then(a.cmp(&b))
            });
            let mut s = vec![Some(base); totals.len()];
            for i in by_centre {
                if extra == 0 {
                    break;
                }
                s[i] = Some(base + 1);
                extra -= 1;
            }
            s
        }
    };

    let mut out = Vec::new();
    for (total, share) in totals.iter().zip(shares) {
        let limit = cfg.max_imbalance.unwrap_or_else(|| total.div_ceil(segments));
        let all = compositions(*total, segments, limit);
        let picked: Vec<Vec<usize>> = match share {
            Some(k) if k < all.len() => (0..k).map(|i| all[i * all.len() / k].clone()).collect(),
            _ => all,
        };
        out.extend(picked.into_iter().map(StructuralCandidate::new));
    }
    Ok(out)
}
