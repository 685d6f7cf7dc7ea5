//! Stopping sets: first descendants whose diameter falls below a fraction
//! of the base diameter.

use super::address::{Address, Antichain};
use super::law::{log_sum_exp, TailBound};
use super::realization::{NodeId, Realization};
use super::ConstructionError;

/// An omitted brood below the base, kept for moment bounds.
#[derive(Debug, Clone)]
pub struct OmittedBrood {
    /// Depth of the omitted children relative to the base.
    pub relative_depth: usize,
    pub ln_parent_diam: f64,
    pub bound: TailBound,
}

#[derive(Debug, Clone)]
pub struct StoppingSet {
    pub antichain: Antichain,
    pub nodes: Vec<NodeId>,
    pub ln_diams: Vec<f64>,
    /// Broods cut by truncation before the stopping rule could be applied.
    pub omitted: Vec<OmittedBrood>,
}

impl StoppingSet {
    /// `Σ_{η∈Γ} l_η^t` over the materialized members.
    pub fn power_sum(&self, t: f64) -> f64 {
        log_sum_exp(self.ln_diams.iter().map(|l| t * l)).exp()
    }

    /// Upper bound on the expected contribution of omitted subtrees, given
    /// `p = E[Σ T_i^t] < 1` and the stopping depth `q`.
    ///
    /// An omitted child at relative depth `d` with diameter `l` contributes
    /// at most `l^t p^{max(q-d, 0)} / (1-p)` in expectation.
    pub fn omitted_bound(&self, t: f64, p: f64, q: usize) -> f64 {
        self.omitted
            .iter()
            .map(|o| {
                let lead = q.saturating_sub(o.relative_depth) as i32;
                (t * o.ln_parent_diam + o.bound.ln_power_sum(t)).exp() * p.powi(lead) / (1.0 - p)
            })
            .sum()
    }
}

/// `Γ_{base,q}`: the first descendants `η` with `|η| ≥ |base| + q` and
/// `l_η < shrink · l_base`.
pub fn stopping_set(
    rz: &Realization,
    base: &Address,
    q: usize,
    shrink: f64,
) -> Result<StoppingSet, ConstructionError> {
    if q == 0 {
        return Err(ConstructionError::BadDepthOffset);
    }
    if !(shrink > 0.0 && shrink <= 1.0) {
        return Err(ConstructionError::BadShrink(shrink));
    }
    let base_id = rz
        .find(base)
        .ok_or_else(|| ConstructionError::UnknownAddress(base.clone()))?;
    if !rz.node(base_id).is_alive() {
        return Err(ConstructionError::DeadBase(base.clone()));
    }
    let threshold = rz.node(base_id).ln_diam + shrink.ln();
    let mut out = StoppingSet {
        antichain: Antichain::default(),
        nodes: Vec::new(),
        ln_diams: Vec::new(),
        omitted: Vec::new(),
    };
    let mut unresolved = Vec::new();
    let mut stack = vec![(base_id, 0_usize)];
    while let Some((id, d)) = stack.pop() {
        let node = rz.node(id);
        if d >= q && node.ln_diam < threshold {
            out.nodes.push(id);
            out.ln_diams.push(node.ln_diam);
            continue;
        }
        if id.level == rz.max_depth() {
            unresolved.push(rz.address(id));
            continue;
        }
        if let Some(tail) = rz.tail(id) {
            out.omitted.push(OmittedBrood {
                relative_depth: d + 1,
                ln_parent_diam: node.ln_diam,
                bound: tail.bound.clone(),
            });
        }
        for c in rz.children(id) {
            if rz.node(c).is_alive() {
                stack.push((c, d + 1));
            }
        }
    }
    if !unresolved.is_empty() {
        unresolved.sort();
        return Err(ConstructionError::Unresolved(unresolved));
    }
    let members: Vec<Address> = out.nodes.iter().map(|&id| rz.address(id)).collect();
    out.antichain = Antichain::new(members)
        .map_err(|a| ConstructionError::BadModel(format!("stopping set is not an antichain at {a}")))?;
    Ok(out)
}
