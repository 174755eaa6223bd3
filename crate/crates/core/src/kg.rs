//! Knowledge graph triple store with adjacency indices, hop queries and
//! positive/negative triple sampling.
//!
//! Triples are loaded from tab-separated text (head, relation, tail surface
//! forms, one triple per line). Surface forms are interned into dense ids in
//! first-appearance order. The graph is immutable once loaded; all queries
//! treat triples as undirected edges between head and tail.

use std::collections::HashMap;
use std::collections::HashSet;
use std::collections::VecDeque;
use std::fmt;
use std::io::BufRead;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense entity identifier, assigned in first-appearance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId(pub u32);

/// Dense relation identifier, assigned in first-appearance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationId(pub u32);

/// A single (head, relation, tail) edge of the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

/// Shortest undirected distance between two entities, or unreachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopResult {
    Hops(u32),
    Unreachable,
}

#[derive(Debug, Error)]
pub enum KgError {
    #[error("line {line}: expected 3 tab-separated fields, found {found}")]
    MalformedLine { line: usize, found: usize },
    #[error("line {line}: empty field")]
    EmptyField { line: usize },
    #[error("unknown entity id {0}")]
    UnknownEntity(u32),
    #[error("hop threshold must be at least 2, got {0}")]
    HopThreshold(usize),
    #[error("negative sample count must be at least 1")]
    ZeroSampleCount,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Entity/relation/triple counts, printable as `key: value` lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub entities: usize,
    pub relations: usize,
    pub triples: usize,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "entities: {}", self.entities)?;
        writeln!(f, "relations: {}", self.relations)?;
        write!(f, "triples: {}", self.triples)
    }
}

/// Immutable triple store with symbol tables and an adjacency index.
///
/// The adjacency index maps every entity to the triples incident to it
/// (as head or tail). Duplicate triples are stored once.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: Vec<String>,
    entity_ids: HashMap<String, EntityId>,
    relations: Vec<String>,
    relation_ids: HashMap<String, RelationId>,
    triples: Vec<Triple>,
    seen: HashSet<Triple>,
    /// entity index -> indices into `triples`
    adjacency: Vec<Vec<u32>>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse a tab-separated triple stream. Each non-empty line must carry
    /// exactly three non-empty fields; line numbers in errors are 1-based.
    pub fn load<R: BufRead>(reader: R) -> Result<Self, KgError> {
        let mut g = Self::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(KgError::MalformedLine {
                    line: line_no,
                    found: fields.len(),
                });
            }
            if fields.iter().any(|f| f.is_empty()) {
                return Err(KgError::EmptyField { line: line_no });
            }
            g.add_triple(fields[0], fields[1], fields[2]);
        }
        Ok(g)
    }

    /// Intern an entity surface form, returning its id.
    pub fn add_entity(&mut self, surface: &str) -> EntityId {
        if let Some(&id) = self.entity_ids.get(surface) {
            return id;
        }
        let id = EntityId(self.entities.len() as u32);
        self.entities.push(surface.to_string());
        self.entity_ids.insert(surface.to_string(), id);
        self.adjacency.push(Vec::new());
        id
    }

    /// Intern a relation surface form, returning its id.
    pub fn add_relation(&mut self, surface: &str) -> RelationId {
        if let Some(&id) = self.relation_ids.get(surface) {
            return id;
        }
        let id = RelationId(self.relations.len() as u32);
        self.relations.push(surface.to_string());
        self.relation_ids.insert(surface.to_string(), id);
        id
    }

    /// Insert a triple by surface forms. Returns false when the identical
    /// triple is already stored.
    pub fn add_triple(&mut self, head: &str, relation: &str, tail: &str) -> bool {
        let triple = Triple {
            head: self.add_entity(head),
            relation: self.add_relation(relation),
            tail: self.add_entity(tail),
        };
        if !self.seen.insert(triple) {
            return false;
        }
        let t_idx = self.triples.len() as u32;
        self.triples.push(triple);
        self.adjacency[triple.head.0 as usize].push(t_idx);
        if triple.tail != triple.head {
            self.adjacency[triple.tail.0 as usize].push(t_idx);
        }
        true
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            entities: self.entity_count(),
            relations: self.relation_count(),
            triples: self.triple_count(),
        }
    }

    pub fn entity_id(&self, surface: &str) -> Option<EntityId> {
        self.entity_ids.get(surface).copied()
    }

    pub fn entity_surface(&self, id: EntityId) -> Result<&str, KgError> {
        self.entities
            .get(id.0 as usize)
            .map(String::as_str)
            .ok_or(KgError::UnknownEntity(id.0))
    }

    pub fn relation_surface(&self, id: RelationId) -> Result<&str, KgError> {
        self.relations
            .get(id.0 as usize)
            .map(String::as_str)
            .ok_or(KgError::UnknownEntity(id.0))
    }

    /// Iterate over all interned entity surface forms with their ids.
    pub fn entity_surfaces(&self) -> impl Iterator<Item = (EntityId, &str)> {
        self.entities
            .iter()
            .enumerate()
            .map(|(i, s)| (EntityId(i as u32), s.as_str()))
    }

    fn check_entity(&self, id: EntityId) -> Result<usize, KgError> {
        let idx = id.0 as usize;
        if idx >= self.entities.len() {
            return Err(KgError::UnknownEntity(id.0));
        }
        Ok(idx)
    }

    /// Single-source BFS distances treating every triple as an undirected
    /// edge. `None` marks unreachable entities.
    pub fn distances_from(&self, source: EntityId) -> Result<Vec<Option<u32>>, KgError> {
        let start = self.check_entity(source)?;
        let mut dist: Vec<Option<u32>> = vec![None; self.entities.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(cur) = queue.pop_front() {
            let d = dist[cur].expect("queued entity has a distance");
            for &t_idx in &self.adjacency[cur] {
                let t = self.triples[t_idx as usize];
                for next in [t.head.0 as usize, t.tail.0 as usize] {
                    if dist[next].is_none() {
                        dist[next] = Some(d + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(dist)
    }

    /// Shortest undirected path length between two entities.
    pub fn hop_distance(&self, a: EntityId, b: EntityId) -> Result<HopResult, KgError> {
        let start = self.check_entity(a)?;
        let goal = self.check_entity(b)?;
        if start == goal {
            return Ok(HopResult::Hops(0));
        }
        let mut dist: Vec<Option<u32>> = vec![None; self.entities.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(cur) = queue.pop_front() {
            let d = dist[cur].expect("queued entity has a distance");
            for &t_idx in &self.adjacency[cur] {
                let t = self.triples[t_idx as usize];
                for next in [t.head.0 as usize, t.tail.0 as usize] {
                    if dist[next].is_none() {
                        if next == goal {
                            return Ok(HopResult::Hops(d + 1));
                        }
                        dist[next] = Some(d + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(HopResult::Unreachable)
    }

    /// All triples incident to `target` (one-hop candidates), in storage order.
    pub fn candidate_positives(&self, target: EntityId) -> Result<Vec<Triple>, KgError> {
        let idx = self.check_entity(target)?;
        Ok(self.adjacency[idx]
            .iter()
            .map(|&t| self.triples[t as usize])
            .collect())
    }

    /// Uniform draw from the one-hop candidates; `None` when the entity is
    /// isolated.
    pub fn sample_positive<R: Rng>(
        &self,
        target: EntityId,
        rng: &mut R,
    ) -> Result<Option<Triple>, KgError> {
        let candidates = self.candidate_positives(target)?;
        if candidates.is_empty() {
            return Ok(None);
        }
        let pick = rng.gen_range(0..candidates.len());
        Ok(Some(candidates[pick]))
    }

    /// All triples whose far endpoint lies between 2 and `hop_threshold` hops
    /// from `target`, with both endpoints reachable. A triple's distance is
    /// the larger of its two endpoint distances, which keeps the result
    /// disjoint from the one-hop candidates.
    pub fn candidate_negatives(
        &self,
        target: EntityId,
        hop_threshold: usize,
    ) -> Result<Vec<Triple>, KgError> {
        if hop_threshold < 2 {
            return Err(KgError::HopThreshold(hop_threshold));
        }
        let dist = self.distances_from(target)?;
        let max = hop_threshold as u32;
        Ok(self
            .triples
            .iter()
            .filter(|t| {
                match (dist[t.head.0 as usize], dist[t.tail.0 as usize]) {
                    (Some(dh), Some(dt)) => {
                        let far = dh.max(dt);
                        (2..=max).contains(&far)
                    }
                    _ => false,
                }
            })
            .copied()
            .collect())
    }

    /// Draw `count` negatives: without replacement when enough candidates
    /// exist, with replacement when the pool is smaller than `count`, `None`
    /// when the pool is empty.
    pub fn sample_negatives<R: Rng>(
        &self,
        target: EntityId,
        count: usize,
        hop_threshold: usize,
        rng: &mut R,
    ) -> Result<Option<Vec<Triple>>, KgError> {
        if count == 0 {
            return Err(KgError::ZeroSampleCount);
        }
        let candidates = self.candidate_negatives(target, hop_threshold)?;
        if candidates.is_empty() {
            return Ok(None);
        }
        let picked = if candidates.len() >= count {
            rand::seq::index::sample(rng, candidates.len(), count)
                .into_iter()
                .map(|i| candidates[i])
                .collect()
        } else {
            (0..count)
                .map(|_| candidates[rng.gen_range(0..candidates.len())])
                .collect()
        };
        Ok(Some(picked))
    }
}
