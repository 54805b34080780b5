//! Quivers with labelled arrows, optional commutativity relations, and DOT output.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
    /// Monomial label such as `x1*x3`.
    pub label: String,
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuiverPresentation {
    /// Canonical coordinates of each vertex.
    pub vertices: Vec<Vec<i64>>,
    pub arrows: Vec<Arrow>,
    /// Pairs of parallel paths, each a list of arrow indices in composition order.
    pub relations: Vec<(Vec<usize>, Vec<usize>)>,
}

fn coords_label(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

impl QuiverPresentation {
    pub fn vertex_label(&self, i: usize) -> String {
        coords_label(&self.vertices[i])
    }

    /// Arrows as sorted `(source label, target label, arrow label)` triples.
    pub fn arrow_multiset(&self) -> Vec<(String, String, String)> {
        let mut v: Vec<_> = self
            .arrows
            .iter()
            .map(|a| {
                (
                    self.vertex_label(a.source),
                    self.vertex_label(a.target),
                    a.label.clone(),
                )
            })
            .collect();
        v.sort();
        v
    }

    /// Commutativity relations for arrows labelled by single variables: for every
    /// vertex and pair of distinct variables, both two-step paths when present.
    pub fn add_commutativity_relations(&mut self) {
        let n = self.arrows.len();
        let var = |a: &Arrow| a.exponents.iter().position(|&e| e > 0);
        let mut rels = Vec::new();
        for a1 in 0..n {
            for a2 in 0..n {
                let (p, q) = (&self.arrows[a1], &self.arrows[a2]);
                if p.target != q.source || p.exponents.iter().sum::<u32>() != 1 {
                    continue;
                }
                let (i, j) = (var(p), var(q));
                if q.exponents.iter().sum::<u32>() != 1 || i >= j {
                    continue;
                }
                // the swapped path: type j first, then type i
                for b1 in 0..n {
                    let r = &self.arrows[b1];
                    if r.source != p.source || var(r) != j || r.exponents.iter().sum::<u32>() != 1 {
                        continue;
                    }
                    for b2 in 0..n {
                        let t = &self.arrows[b2];
                        if t.source == r.target
                            && t.target == q.target
                            && var(t) == i
                            && t.exponents.iter().sum::<u32>() == 1
                        {
                            rels.push((vec![a1, a2], vec![b1, b2]));
                        }
                    }
                }
            }
        }
        self.relations = rels;
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph \"{name}\" {{\n");
        for i in 0..self.vertices.len() {
            s.push_str(&format!("  v{i} [label=\"{}\"];\n", self.vertex_label(i)));
        }
        for a in &self.arrows {
            s.push_str(&format!(
                "  v{} -> v{} [label=\"{}\"];\n",
                a.source, a.target, a.label
            ));
        }
        s.push_str("}\n");
        s
    }
}

/// Minimal reader for the DOT subset written by [`QuiverPresentation::to_dot`]:
/// returns vertex labels and `(source, target, label)` edges.
pub fn parse_dot(text: &str) -> Option<(Vec<String>, Vec<(usize, usize, String)>)> {
    let mut vertices: Vec<(usize, String)> = Vec::new();
    let mut edges = Vec::new();
    let label_of = |rest: &str| -> Option<String> {
        let start = rest.find("label=\"")? + 7;
        let end = rest[start..].find('"')? + start;
        Some(rest[start..end].to_string())
    };
    let vid = |tok: &str| tok.trim().strip_prefix('v')?.parse::<usize>().ok();
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next()?;
    if !header.starts_with("digraph") || !header.ends_with('{') {
        return None;
    }
    let mut closed = false;
    for line in lines {
        if line == "}" {
            closed = true;
            break;
        }
        let body = line.strip_suffix(';')?;
        let (head, attrs) = body.split_once('[')?;
        let label = label_of(attrs)?;
        if let Some((a, b)) = head.split_once("->") {
            edges.push((vid(a)?, vid(b)?, label));
        } else {
            vertices.push((vid(head)?, label));
        }
    }
    if !closed {
        return None;
    }
    vertices.sort();
    if vertices.iter().enumerate().any(|(i, (v, _))| *v != i) {
        return None;
    }
    if edges
        .iter()
        .any(|(a, b, _)| *a >= vertices.len() || *b >= vertices.len())
    {
        return None;
    }
    Some((vertices.into_iter().map(|(_, l)| l).collect(), edges))
}
