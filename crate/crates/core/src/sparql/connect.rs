use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::context::{PatternNode, QueryContext};
use crate::rdf::Iri;

/// Direction in which a pattern edge was traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    SubjectToObject,
    ObjectToSubject,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::SubjectToObject => "subject->object",
            Direction::ObjectToSubject => "object->subject",
        }
    }
}

pub type PathStep = (Iri, Direction);

/// IRIs reachable from `?variable` through the context's triple patterns,
/// each with one shortest path. Ordered by path length, then IRI.
///
/// Patterns with a variable predicate are not traversed since the path
/// cannot name the edge.
pub fn connected_individuals(ctx: &QueryContext, variable: &str, max_depth: usize) -> Vec<(Iri, Vec<PathStep>)> {
    let start = PatternNode::Var(variable.into());
    let mut adjacency: BTreeMap<&PatternNode, Vec<(PathStep, &PatternNode)>> = BTreeMap::new();
    for pattern in &ctx.patterns {
        let Some(p) = pattern.predicate.as_iri() else {
            continue;
        };
        adjacency
            .entry(&pattern.subject)
            .or_default()
            .push(((p.clone(), Direction::SubjectToObject), &pattern.object));
        adjacency
            .entry(&pattern.object)
            .or_default()
            .push(((p.clone(), Direction::ObjectToSubject), &pattern.subject));
    }
    if !adjacency.contains_key(&start) {
        return Vec::new();
    }

    let mut visited: BTreeSet<&PatternNode> = BTreeSet::new();
    visited.insert(&start);
    let mut frontier: BTreeMap<&PatternNode, Vec<PathStep>> = BTreeMap::new();
    frontier.insert(&start, Vec::new());
    let mut out = Vec::new();

    for _ in 0..max_depth {
        let mut next: BTreeMap<&PatternNode, Vec<PathStep>> = BTreeMap::new();
        for (node, path) in &frontier {
            for (step, target) in adjacency.get(*node).into_iter().flatten() {
                if visited.contains(*target) {
                    continue;
                }
                let mut candidate = path.clone();
                candidate.push(step.clone());
                match next.get_mut(*target) {
                    Some(best) if *best <= candidate => {}
                    Some(best) => *best = candidate,
                    None => {
                        next.insert(*target, candidate);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        let mut level: Vec<(Iri, Vec<PathStep>)> = Vec::new();
        for (node, path) in &next {
            visited.insert(*node);
            if let PatternNode::Iri(iri) = node {
                level.push((iri.clone(), path.clone()));
            }
        }
        level.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(level);
        frontier = next;
    }
    out
}
