//! Systems of lower-bound difference constraints `S_v >= S_u + w`.
//!
//! With every binary decision fixed, the precedence, ordering, conflict and
//! makespan rows all reduce to this form. The componentwise-minimal solution
//! is the longest-path potential from a zero origin.

/// Node of a difference system. Every variable is implicitly `>= Origin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Origin,
    Var(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffArc {
    pub from: Node,
    pub to: Node,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiffConstraintSystem {
    vars: usize,
    arcs: Vec<DiffArc>,
}

/// Relaxations smaller than this are ignored, so float noise cannot spin a
/// zero-weight cycle forever.
const EPS: f64 = 1e-9;

impl DiffConstraintSystem {
    pub fn new(vars: usize) -> Self {
        Self { vars, arcs: Vec::new() }
    }

    pub fn var_count(&self) -> usize {
        self.vars
    }

    pub fn arcs(&self) -> &[DiffArc] {
        &self.arcs
    }

    /// Adds `to >= from + weight`.
    pub fn add(&mut self, from: Node, to: Node, weight: f64) {
        debug_assert!(weight.is_finite(), "arc weight must be finite");
        self.arcs.push(DiffArc { from, to, weight });
    }

    /// Componentwise-minimal non-negative solution, or `None` when the arcs
    /// contain a positive cycle (including one that would lift the origin).
    ///
    /// Bellman-Ford with longest-path relaxation, `O(V E)`.
    pub fn earliest_starts(&self) -> Option<Vec<f64>> {
        let idx = |n: Node| match n {
            Node::Origin => self.vars,
            Node::Var(i) => i,
        };
        let mut dist = vec![0.0; self.vars + 1];
        for _round in 0..=self.vars + 1 {
            let mut changed = false;
            for arc in &self.arcs {
                let (u, v) = (idx(arc.from), idx(arc.to));
                let cand = dist[u] + arc.weight;
                if cand > dist[v] + EPS {
                    if v == self.vars {
                        return None;
                    }
                    dist[v] = cand;
                    changed = true;
                }
            }
            if !changed {
                dist.truncate(self.vars);
                return Some(dist);
            }
        }
        None
    }
}
