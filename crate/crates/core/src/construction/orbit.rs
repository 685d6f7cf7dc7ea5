//! Orbits: images of one reference point under the maps below a cell.

use serde::{Deserialize, Serialize};

use super::address::{Address, Antichain};
use super::law::{Omitted, SimilarityMap};
use super::realization::{NodeId, Realization};
use super::ConstructionError;
use crate::geometry::{CompactSet, Interval};

/// Which descendants of the base contribute a point.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitTarget {
    /// Every nonempty descendant exactly this many levels below the base.
    LevelOffset(usize),
    /// Addresses relative to the base.
    Antichain(Antichain),
}

/// Coordinates the orbit is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Global coordinates in `[0, 1]`.
    #[default]
    Global,
    /// Unit coordinates of the base cell. Box dimension is unchanged, and
    /// deep cells keep their full floating-point resolution.
    Local,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub points: CompactSet,
    pub frame: Frame,
    /// Points that would come from offspring removed by truncation.
    pub omitted: Omitted,
    /// Region containing every omitted point, in the same frame.
    pub omitted_hull: CompactSet,
}

/// `{S^base_σ(x)}` over the target, in global coordinates.
pub fn orbit(
    rz: &Realization,
    base: &Address,
    x: f64,
    target: &OrbitTarget,
) -> Result<Orbit, ConstructionError> {
    orbit_in(rz, base, x, target, Frame::Global)
}

pub fn orbit_in(
    rz: &Realization,
    base: &Address,
    x: f64,
    target: &OrbitTarget,
    frame: Frame,
) -> Result<Orbit, ConstructionError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(ConstructionError::PointOutside(x));
    }
    let base_id = rz
        .find(base)
        .ok_or_else(|| ConstructionError::UnknownAddress(base.clone()))?;
    if !rz.node(base_id).is_alive() {
        return Err(ConstructionError::DeadBase(base.clone()));
    }
    let mut walk = Walk {
        rz,
        x,
        frame,
        points: Vec::new(),
        hulls: Vec::new(),
        omitted: Omitted::Finite(0),
    };
    match target {
        OrbitTarget::LevelOffset(n) => {
            if base_id.level + n > rz.max_depth() {
                return Err(ConstructionError::BeyondDepth {
                    level: base_id.level + n,
                    max_depth: rz.max_depth(),
                });
            }
            walk.level(base_id, SimilarityMap::identity(), *n);
        }
        OrbitTarget::Antichain(members) => {
            for rel in members.members() {
                walk.member(base_id, rel)?;
            }
        }
    }
    Ok(Orbit {
        points: CompactSet::from_valid(walk.points.iter().map(|&p| Interval::point(p)).collect()),
        frame,
        omitted: walk.omitted,
        omitted_hull: CompactSet::from_valid(walk.hulls),
    })
}

struct Walk<'a> {
    rz: &'a Realization,
    x: f64,
    frame: Frame,
    points: Vec<f64>,
    hulls: Vec<Interval>,
    omitted: Omitted,
}

impl Walk<'_> {
    fn point(&self, id: NodeId, map: &SimilarityMap, u: f64) -> f64 {
        match self.frame {
            Frame::Global => self.rz.node(id).global_point(u),
            Frame::Local => map.apply(u).clamp(0.0, 1.0),
        }
    }

    fn record_tail(&mut self, id: NodeId, map: &SimilarityMap) {
        if let Some(tail) = self.rz.tail(id) {
            let (hull, omitted) = (tail.hull, tail.omitted);
            let a = self.point(id, map, hull.lo);
            let b = self.point(id, map, hull.hi);
            self.hulls.push(Interval { lo: a.min(b), hi: a.max(b) });
            self.omitted = self.omitted.add(omitted);
        }
    }

    fn level(&mut self, id: NodeId, map: SimilarityMap, remaining: usize) {
        if remaining == 0 {
            self.points.push(self.point(id, &map, self.x));
            return;
        }
        self.record_tail(id, &map);
        let children: Vec<NodeId> = self.rz.children(id).collect();
        for c in children {
            let node = self.rz.node(c);
            if node.is_alive() {
                let m = map.compose(&node.local);
                self.level(c, m, remaining - 1);
            }
        }
    }

    fn member(&mut self, base: NodeId, rel: &Address) -> Result<(), ConstructionError> {
        let mut id = base;
        let mut map = SimilarityMap::identity();
        for &digit in rel.digits() {
            let found = self.rz.children(id).find(|&c| self.rz.node(c).digit() == digit);
            match found {
                Some(c) if self.rz.node(c).is_alive() => {
                    map = map.compose(&self.rz.node(c).local);
                    id = c;
                }
                Some(_) => return Ok(()),
                None => {
                    if let Some(tail) = self.rz.tail(id) {
                        if digit >= tail.first_omitted {
                            let hull = tail.hull;
                            let a = self.point(id, &map, hull.lo);
                            let b = self.point(id, &map, hull.hi);
                            self.hulls.push(Interval { lo: a.min(b), hi: a.max(b) });
                            self.omitted = self.omitted.add(Omitted::Finite(1));
                            return Ok(());
                        }
                    }
                    if id.level == self.rz.max_depth() {
                        return Err(ConstructionError::BeyondDepth {
                            level: id.level + 1,
                            max_depth: self.rz.max_depth(),
                        });
                    }
                    return Ok(());
                }
            }
        }
        self.points.push(self.point(id, &map, self.x));
        Ok(())
    }
}
