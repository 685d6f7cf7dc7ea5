//! Sampled, truncated construction trees.

use serde::{Deserialize, Serialize};

use super::address::Address;
use super::law::{
    log_sum_exp, ModelSpec, Omitted, Orientation, SimilarityMap, SpawnContext, Tail, Truncation,
};
use super::ConstructionError;
use crate::geometry::{CompactSet, Interval};
use crate::rng;

const NONE: u32 = u32::MAX;

/// How offspring draws are organised.
///
/// `Recursive` draws a brood only at nonempty cells. `Fractal` draws an
/// i.i.d. brood at every address up to the depth limit, including those
/// under empty cells, and discards dead subtrees afterwards. Both read the
/// same per-address streams, so they agree on every observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    #[default]
    Recursive,
    Fractal,
}

/// One cell of the tree.
#[derive(Debug, Clone)]
pub struct Node {
    parent: u32,
    digit: u32,
    /// Global interval occupied by the cell.
    pub interval: Interval,
    /// `ln l_σ`.
    pub ln_diam: f64,
    /// Map from the parent's unit cell onto this cell.
    pub local: SimilarityMap,
    orientation: Orientation,
    alive: bool,
    survives: bool,
    child_start: u32,
    child_len: u32,
    tail: u32,
}

impl Node {
    pub fn digit(&self) -> u32 {
        self.digit
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    /// Has a nonempty descendant at the depth limit.
    pub fn survives(&self) -> bool {
        self.survives
    }

    pub fn diameter(&self) -> f64 {
        self.ln_diam.exp()
    }

    pub fn children(&self) -> std::ops::Range<usize> {
        self.child_start as usize..(self.child_start + self.child_len) as usize
    }

    /// Image of a unit-cell coordinate under the cell's global similarity.
    pub fn global_point(&self, u: f64) -> f64 {
        let d = self.ln_diam.exp();
        let x = match self.orientation {
            Orientation::Preserving => self.interval.lo + d * u,
            Orientation::Reversing => self.interval.hi - d * u,
        };
        x.clamp(self.interval.lo, self.interval.hi)
    }
}

/// Location of a node: `(level, index within level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub level: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Level {
    pub(crate) nodes: Vec<Node>,
    pub(crate) tails: Vec<Tail>,
}

/// A sampled construction tree down to `max_depth`.
#[derive(Debug, Clone)]
pub struct Realization {
    model: ModelSpec,
    seed: u64,
    max_depth: usize,
    truncation: Truncation,
    semantics: Semantics,
    globals: Vec<f64>,
    pub(crate) levels: Vec<Level>,
    draws: u64,
}

/// Per-level truncation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTruncation {
    /// Level of the parents whose broods were cut.
    pub level: usize,
    pub truncated_parents: u64,
    pub omitted: Omitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationStats {
    /// `S_k`: nonempty cells per level.
    pub alive_per_level: Vec<u64>,
    pub sup_diam_per_level: Vec<f64>,
    pub log10_sup_diam_per_level: Vec<f64>,
    pub truncation: Vec<LevelTruncation>,
    pub extinct: bool,
}

fn child_node(parent: &Node, parent_index: usize, digit: u32, map: SimilarityMap, alive: bool) -> Node {
    let lo = parent.global_point(map.offset);
    let hi = parent.global_point(map.offset + map.ratio());
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    Node {
        parent: parent_index as u32,
        digit,
        interval: Interval { lo, hi },
        ln_diam: parent.ln_diam + map.ln_ratio,
        local: map,
        orientation: parent.orientation.compose(map.orientation),
        alive,
        survives: false,
        child_start: 0,
        child_len: 0,
        tail: NONE,
    }
}

impl Realization {
    /// Samples a realization. A pure function of its arguments.
    pub fn sample(
        model: &ModelSpec,
        seed: u64,
        max_depth: usize,
        truncation: Truncation,
        semantics: Semantics,
    ) -> Realization {
        let law = model.law();
        let globals = law.draw_globals(&mut rng::stream(rng::realization_key(seed)));
        let root = Node {
            parent: NONE,
            digit: 0,
            interval: Interval { lo: 0.0, hi: 1.0 },
            ln_diam: 0.0,
            local: SimilarityMap::identity(),
            orientation: Orientation::Preserving,
            alive: true,
            survives: false,
            child_start: 0,
            child_len: 0,
            tail: NONE,
        };
        let mut levels = vec![Level {
            nodes: vec![root],
            tails: Vec::new(),
        }];
        let mut keys = vec![rng::root_key(seed)];
        let mut draws = 0_u64;

        for depth in 0..max_depth {
            let mut next = Level::default();
            let mut next_keys = Vec::new();
            let current = &mut levels[depth];
            for (i, node) in current.nodes.iter_mut().enumerate() {
                if !node.alive {
                    continue;
                }
                let ctx = SpawnContext {
                    level: depth,
                    ln_parent_diam: node.ln_diam,
                    truncation,
                    globals: &globals,
                };
                let brood = law.spawn(&ctx, &mut rng::stream(keys[i]));
                draws += 1;
                node.child_start = next.nodes.len() as u32;
                node.child_len = brood.children.len() as u32;
                for child in &brood.children {
                    let key = rng::child_key(keys[i], child.digit);
                    let c = child_node(node, i, child.digit, child.map, child.present);
                    if !child.present && semantics == Semantics::Fractal {
                        draws += expand_virtual(model, &globals, truncation, &c, key, depth + 1, max_depth);
                    }
                    next.nodes.push(c);
                    next_keys.push(key);
                }
                if let Some(tail) = brood.tail {
                    node.tail = current.tails.len() as u32;
                    current.tails.push(tail);
                }
            }
            levels.push(next);
            keys = next_keys;
        }

        let mut rz = Realization {
            model: model.clone(),
            seed,
            max_depth,
            truncation,
            semantics,
            globals,
            levels,
            draws,
        };
        rz.mark_survivors();
        rz
    }

    /// Resamples with derived seeds until the realization survives to the
    /// depth limit, giving up after `max_attempts`.
    pub fn sample_surviving(
        model: &ModelSpec,
        seed: u64,
        max_depth: usize,
        truncation: Truncation,
        semantics: Semantics,
        max_attempts: u64,
    ) -> Result<Realization, ConstructionError> {
        for attempt in 0..max_attempts {
            let s = if attempt == 0 { seed } else { rng::replica_seed(seed, attempt) };
            let rz = Self::sample(model, s, max_depth, truncation, semantics);
            if !rz.is_extinct() {
                return Ok(rz);
            }
        }
        Err(ConstructionError::NoSurvivor(max_attempts))
    }

    fn mark_survivors(&mut self) {
        let depth = self.max_depth;
        for node in &mut self.levels[depth].nodes {
            node.survives = node.alive;
        }
        for k in (0..depth).rev() {
            let (upper, lower) = self.levels.split_at_mut(k + 1);
            let below = &lower[0].nodes;
            for node in &mut upper[k].nodes {
                node.survives = node.alive && node.children().any(|c| below[c].survives);
            }
        }
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    /// Parameters drawn once for this realization.
    pub fn globals(&self) -> &[f64] {
        &self.globals
    }

    /// Number of brood draws made while sampling; larger under
    /// [`Semantics::Fractal`] when cells die.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn level(&self, k: usize) -> &[Node] {
        &self.levels[k].nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.levels[id.level].nodes[id.index]
    }

    pub fn root(&self) -> NodeId {
        NodeId { level: 0, index: 0 }
    }

    /// No nonempty cell at the depth limit.
    pub fn is_extinct(&self) -> bool {
        !self.levels[0].nodes[0].survives
    }

    pub fn find(&self, address: &Address) -> Option<NodeId> {
        let mut id = self.root();
        for &digit in address.digits() {
            let node = self.node(id);
            let level = &self.levels[id.level + 1].nodes;
            let range = node.children();
            let slice = &level[range.clone()];
            let pos = slice.iter().position(|n| n.digit == digit)?;
            id = NodeId {
                level: id.level + 1,
                index: range.start + pos,
            };
        }
        Some(id)
    }

    pub fn address(&self, id: NodeId) -> Address {
        let mut digits = Vec::with_capacity(id.level);
        let mut cur = id;
        while cur.level > 0 {
            let node = self.node(cur);
            digits.push(node.digit);
            cur = NodeId {
                level: cur.level - 1,
                index: node.parent as usize,
            };
        }
        digits.reverse();
        Address::new(digits).expect("stored digits are positive")
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.node(id).children().map(move |index| NodeId {
            level: id.level + 1,
            index,
        })
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        (id.level > 0).then(|| NodeId {
            level: id.level - 1,
            index: self.node(id).parent as usize,
        })
    }

    /// Truncation record of a node's brood, if anything was omitted.
    pub fn tail(&self, id: NodeId) -> Option<&Tail> {
        let node = self.node(id);
        (node.tail != NONE).then(|| &self.levels[id.level].tails[node.tail as usize])
    }

    /// Union of the level-`k` cells; with `survivors_only`, only cells that
    /// still have a nonempty descendant at the depth limit.
    pub fn level_union(&self, k: usize, survivors_only: bool) -> Result<CompactSet, ConstructionError> {
        if k > self.max_depth {
            return Err(ConstructionError::BeyondDepth { level: k, max_depth: self.max_depth });
        }
        let items = self.levels[k]
            .nodes
            .iter()
            .filter(|n| n.alive && (!survivors_only || n.survives))
            .map(|n| n.interval)
            .collect();
        Ok(CompactSet::from_valid(items))
    }

    /// Union of the hulls of every omitted brood tail among nonempty cells
    /// at levels `< k`, mapped to global coordinates.
    pub fn tail_hulls(&self, k: usize) -> CompactSet {
        let mut items = Vec::new();
        for level in self.levels.iter().take(k.min(self.max_depth)) {
            for node in &level.nodes {
                if node.alive && node.tail != NONE {
                    let hull = level.tails[node.tail as usize].hull;
                    let a = node.global_point(hull.lo);
                    let b = node.global_point(hull.hi);
                    items.push(Interval { lo: a.min(b), hi: a.max(b) });
                }
            }
        }
        CompactSet::from_valid(items)
    }

    /// Bound on `Σ l^t` over the children omitted from level-`k` broods.
    pub fn omitted_power_sum(&self, k: usize, t: f64) -> f64 {
        let level = &self.levels[k];
        log_sum_exp(level.nodes.iter().filter(|n| n.alive && n.tail != NONE).map(|n| {
            t * n.ln_diam + level.tails[n.tail as usize].bound.ln_power_sum(t)
        }))
        .exp()
    }

    pub fn stats(&self) -> RealizationStats {
        let mut alive = Vec::with_capacity(self.max_depth + 1);
        let mut sup = Vec::new();
        let mut sup_log10 = Vec::new();
        let mut truncation = Vec::new();
        for (k, level) in self.levels.iter().enumerate() {
            let live: Vec<&Node> = level.nodes.iter().filter(|n| n.alive).collect();
            alive.push(live.len() as u64);
            let ln_sup = live.iter().map(|n| n.ln_diam).fold(f64::NEG_INFINITY, f64::max);
            sup.push(ln_sup.exp());
            sup_log10.push(ln_sup / std::f64::consts::LN_10);
            if k < self.max_depth {
                let mut omitted = Omitted::Finite(0);
                let mut parents = 0;
                for n in live.iter().filter(|n| n.tail != NONE) {
                    parents += 1;
                    omitted = omitted.add(level.tails[n.tail as usize].omitted);
                }
                truncation.push(LevelTruncation {
                    level: k,
                    truncated_parents: parents,
                    omitted,
                });
            }
        }
        RealizationStats {
            alive_per_level: alive,
            sup_diam_per_level: sup,
            log10_sup_diam_per_level: sup_log10,
            truncation,
            extinct: self.is_extinct(),
        }
    }

    pub fn export(&self) -> RealizationExport {
        let mut nodes = Vec::new();
        for (k, level) in self.levels.iter().enumerate() {
            for (index, n) in level.nodes.iter().enumerate() {
                nodes.push(NodeExport {
                    address: self.address(NodeId { level: k, index }).digits().to_vec(),
                    left: n.interval.lo,
                    right: n.interval.hi,
                    alive: n.alive,
                    log10_diam: n.ln_diam / std::f64::consts::LN_10,
                });
            }
        }
        RealizationExport {
            model: self.model.name().to_string(),
            parameters: self.model.parameters().clone(),
            globals: self.globals.clone(),
            seed: self.seed,
            depth: self.max_depth,
            eps_trunc: self.truncation.value(),
            log10_eps_trunc: self.truncation.log10(),
            stats: self.stats(),
            nodes,
        }
    }
}

/// Draws broods below an empty cell, as fractal semantics requires, and
/// returns how many were drawn. Nothing is kept.
fn expand_virtual(
    model: &ModelSpec,
    globals: &[f64],
    truncation: Truncation,
    start: &Node,
    start_key: u64,
    start_level: usize,
    max_depth: usize,
) -> u64 {
    let mut draws = 0;
    let mut stack = vec![(start.clone(), start_key, start_level)];
    while let Some((node, key, level)) = stack.pop() {
        if level >= max_depth {
            continue;
        }
        let ctx = SpawnContext {
            level,
            ln_parent_diam: node.ln_diam,
            truncation,
            globals,
        };
        let brood = model.law().spawn(&ctx, &mut rng::stream(key));
        draws += 1;
        for child in brood.children {
            let c = child_node(&node, 0, child.digit, child.map, false);
            stack.push((c, rng::child_key(key, child.digit), level + 1));
        }
    }
    draws
}

/// JSON layout of an exported realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationExport {
    pub model: String,
    pub parameters: std::collections::BTreeMap<String, f64>,
    pub globals: Vec<f64>,
    pub seed: u64,
    pub depth: usize,
    pub eps_trunc: f64,
    pub log10_eps_trunc: f64,
    pub stats: RealizationStats,
    pub nodes: Vec<NodeExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeExport {
    pub address: Vec<u32>,
    pub left: f64,
    pub right: f64,
    pub alive: bool,
    pub log10_diam: f64,
}
