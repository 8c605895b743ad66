use serde::Serialize;

use crate::costfn::{AffineFn, Piece, Rational};

use super::{Owner, Sptg};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Min,
    Max,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Node {
    Player { player: Player, rate: Rational, urgent: bool },
    /// Target with an affine or constant-infinite final cost.
    Target(Piece),
}

impl Node {
    pub fn player(&self) -> Option<Player> {
        match self {
            Node::Player { player, .. } => Some(*player),
            Node::Target(_) => None,
        }
    }

    pub fn rate(&self) -> Option<&Rational> {
        match self {
            Node::Player { rate, .. } => Some(rate),
            Node::Target(_) => None,
        }
    }

    pub fn is_urgent(&self) -> bool {
        matches!(self, Node::Player { urgent: true, .. })
    }

    /// A player node where time may elapse.
    pub fn is_waiting(&self) -> bool {
        matches!(self, Node::Player { urgent: false, .. })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: i64,
    /// Index of the transition of the source game this edge stands for.
    pub origin: Option<usize>,
}

/// An r-SPTG in solver form: every edge is enabled on all of `[0, r]`.
///
/// Unlike [`Sptg`], rates may be rational and final costs may be constant
/// infinities; both arise in internal constructions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Arena {
    pub names: Vec<String>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub r: Rational,
    out: Vec<Vec<usize>>,
}

impl Arena {
    pub fn new(r: Rational) -> Self {
        Arena { names: vec![], nodes: vec![], edges: vec![], r, out: vec![] }
    }

    pub fn from_sptg(g: &Sptg) -> Self {
        let mut a = Arena::new(g.r().clone());
        for l in &g.locations {
            let node = match l.owner {
                Owner::Final => Node::Target(Piece::Affine(l.final_cost.clone().unwrap_or_else(|| AffineFn::ints(0, 0)))),
                Owner::Min => Node::Player { player: Player::Min, rate: Rational::from_int(l.rate), urgent: l.urgent },
                Owner::Max => Node::Player { player: Player::Max, rate: Rational::from_int(l.rate), urgent: l.urgent },
            };
            a.add_node(&l.id, node);
        }
        for (k, t) in g.transitions.iter().enumerate() {
            a.add_edge(t.source, t.target, t.weight, Some(k));
        }
        a
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_node(&mut self, name: &str, node: Node) -> usize {
        self.names.push(name.to_string());
        self.nodes.push(node);
        self.out.push(vec![]);
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, src: usize, dst: usize, weight: i64, origin: Option<usize>) -> usize {
        assert!(matches!(self.nodes[src], Node::Player { .. }), "targets have no outgoing edges");
        self.edges.push(Edge { src, dst, weight, origin });
        self.out[src].push(self.edges.len() - 1);
        self.edges.len() - 1
    }

    /// Edge indices leaving `v`, in insertion order.
    pub fn out(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Same game with every player node urgent.
    pub fn all_urgent(&self) -> Arena {
        let mut a = self.clone();
        for n in &mut a.nodes {
            if let Node::Player { urgent, .. } = n {
                *urgent = true;
            }
        }
        a
    }

    pub fn is_all_urgent(&self) -> bool {
        self.nodes.iter().all(|n| !n.is_waiting())
    }

    pub fn w_t(&self) -> i64 {
        self.edges.iter().map(|e| e.weight.abs()).max().unwrap_or(0)
    }

    pub fn w_l(&self) -> Rational {
        self.nodes.iter().filter_map(Node::rate).map(Rational::abs).max().unwrap_or_else(Rational::zero)
    }

    /// Largest finite final cost magnitude over `[0, r]`.
    pub fn w_fin(&self) -> Rational {
        self.final_fns()
            .map(|(_, f)| f.eval(&Rational::zero()).abs().max(f.eval(&self.r).abs()))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Targets with an affine final cost.
    pub fn final_fns(&self) -> impl Iterator<Item = (usize, &AffineFn)> {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match n {
            Node::Target(Piece::Affine(f)) => Some((i, f)),
            _ => None,
        })
    }

    /// Sub-arena keeping the flagged nodes and the edges between them.
    pub fn restrict_to(&self, keep: &[bool]) -> Restriction {
        let mut arena = Arena::new(self.r.clone());
        let mut node_map = vec![None; self.len()];
        let mut edge_back = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if keep[i] {
                node_map[i] = Some(arena.add_node(&self.names[i], n.clone()));
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            if let (Some(s), Some(d)) = (node_map[e.src], node_map[e.dst]) {
                arena.add_edge(s, d, e.weight, e.origin);
                edge_back.push(k);
            }
        }
        Restriction { arena, node_map, edge_back }
    }
}

pub struct Restriction {
    pub arena: Arena,
    /// Old node index to new.
    pub node_map: Vec<Option<usize>>,
    /// New edge index to old.
    pub edge_back: Vec<usize>,
}

/// Backward attractor ranks towards targets with finite final costs.
///
/// Rank 0 for such targets; a Min node gets `1 + min` over successors, a Max
/// node `1 + max` once all its successors are ranked. `None` means Min cannot
/// force reaching a target.
pub fn attractor_ranks(a: &Arena) -> Vec<Option<usize>> {
    let mut rank: Vec<Option<usize>> =
        a.nodes.iter().map(|n| matches!(n, Node::Target(Piece::Affine(_))).then_some(0)).collect();
    let mut level = 0;
    loop {
        level += 1;
        let mut newly = vec![];
        for (v, n) in a.nodes.iter().enumerate() {
            if rank[v].is_some() {
                continue;
            }
            let succ = a.out(v).iter().map(|&e| rank[a.edges[e].dst]);
            let ok = match n.player() {
                Some(Player::Min) => succ.clone().any(|r| r.is_some()),
                Some(Player::Max) => !a.out(v).is_empty() && succ.clone().all(|r| r.is_some()),
                None => false,
            };
            if ok {
                newly.push(v);
            }
        }
        if newly.is_empty() {
            return rank;
        }
        for v in newly {
            rank[v] = Some(level);
        }
    }
}
