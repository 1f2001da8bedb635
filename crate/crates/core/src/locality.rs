//! Interaction graph at time `t`: the simulated 2D rows already produced,
//! merged with the 1D device (bath chain, sink chain, rungs, ancillas).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::circuits::surface::ancilla_neighbors;
use crate::error::{out_of_range, Error, Result};
use crate::quantum::QubitId;

/// Physical layout of the device part of the graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DeviceLayout {
    /// Bath chain with the system row attached below and the sink chain above.
    #[default]
    Ladder,
    /// Ladder plus the per-generator ancillas of the surface-code encoder,
    /// each joined to the sites it checks.
    SurfaceCode,
}

/// Shortest-path length. `Finite` sorts before `Unreachable`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }

    pub fn within(self, r: usize) -> bool {
        matches!(self, Distance::Finite(d) if d <= r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub center: QubitId,
    pub radius: usize,
    pub members: BTreeSet<QubitId>,
}

#[derive(Clone, Debug)]
pub struct InteractionGraph {
    time: usize,
    vertices: Vec<QubitId>,
    index: HashMap<QubitId, usize>,
    adjacency: Vec<Vec<usize>>,
    edges: BTreeSet<(QubitId, QubitId)>,
    sim_edges: usize,
    // row-major all-pairs table, `None` when unreachable
    dist: Vec<Option<u32>>,
}

fn ordered(a: QubitId, b: QubitId) -> (QubitId, QubitId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl InteractionGraph {
    pub fn build(t: usize, lx: usize, ly: usize, layout: DeviceLayout) -> Result<Self> {
        if lx < 2 {
            return Err(out_of_range("lx", lx as f64, 2.0, f64::INFINITY));
        }
        if t == 0 || t > ly {
            return Err(out_of_range("t", t as f64, 1.0, ly as f64));
        }
        let mut vertices = Vec::new();
        let mut sim = Vec::new();
        for r in 1..=t {
            for c in 0..lx {
                vertices.push(QubitId::system(r, c));
                if c + 1 < lx {
                    sim.push((QubitId::system(r, c), QubitId::system(r, c + 1)));
                }
                if r < t {
                    sim.push((QubitId::system(r, c), QubitId::system(r + 1, c)));
                }
            }
        }
        let mut dev = Vec::new();
        for c in 0..lx {
            let (b, s) = (QubitId::bath(c), QubitId::sink(t, c));
            vertices.extend([b, s]);
            dev.push((b, s));
            dev.push((QubitId::system(t, c), b));
            if c + 1 < lx {
                dev.push((b, QubitId::bath(c + 1)));
                dev.push((s, QubitId::sink(t, c + 1)));
            }
        }
        if layout == DeviceLayout::SurfaceCode {
            for (anc, sites) in ancilla_neighbors(lx, ly, t)? {
                vertices.push(anc);
                dev.extend(sites.into_iter().map(|s| (anc, s)));
            }
        }
        let sim_edges = sim.len();
        let mut g = Self::from_edges(t, vertices, sim.into_iter().chain(dev))?;
        g.sim_edges = sim_edges;
        Ok(g)
    }

    /// Arbitrary graph on the given vertices; self-loops are dropped.
    pub fn from_edges(
        time: usize,
        vertices: impl IntoIterator<Item = QubitId>,
        edges: impl IntoIterator<Item = (QubitId, QubitId)>,
    ) -> Result<Self> {
        let vertices: Vec<QubitId> = vertices.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index: HashMap<QubitId, usize> = vertices.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for q in [a, b] {
                if !index.contains_key(&q) {
                    return Err(Error::MissingVertex(q));
                }
            }
            if a != b {
                set.insert(ordered(a, b));
            }
        }
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in &set {
            let (i, j) = (index[a], index[b]);
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        let mut dist = vec![None; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            row[s] = Some(0);
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let du = row[u].unwrap_or(0);
                for &v in &adjacency[u] {
                    if row[v].is_none() {
                        row[v] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(Self { time, vertices, index, adjacency, sim_edges: 0, edges: set, dist })
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn vertices(&self) -> &[QubitId] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(QubitId, QubitId)> {
        &self.edges
    }

    pub fn contains(&self, q: &QubitId) -> bool {
        self.index.contains_key(q)
    }

    /// Number of edges between simulated (system) qubits.
    pub fn simulated_edge_count(&self) -> usize {
        self.sim_edges
    }

    pub fn has_edge(&self, a: QubitId, b: QubitId) -> bool {
        self.edges.contains(&ordered(a, b))
    }

    fn idx(&self, q: &QubitId) -> Result<usize> {
        self.index.get(q).copied().ok_or(Error::MissingVertex(*q))
    }

    pub fn distance(&self, u: QubitId, v: QubitId) -> Result<Distance> {
        let (i, j) = (self.idx(&u)?, self.idx(&v)?);
        Ok(match self.dist[i * self.vertices.len() + j] {
            Some(d) => Distance::Finite(d as usize),
            None => Distance::Unreachable,
        })
    }

    pub fn neighbors(&self, q: QubitId) -> Result<Vec<QubitId>> {
        Ok(self.adjacency[self.idx(&q)?].iter().map(|&j| self.vertices[j]).collect())
    }

    pub fn ball(&self, center: QubitId, radius: usize) -> Result<Ball> {
        let i = self.idx(&center)?;
        let n = self.vertices.len();
        let members = (0..n)
            .filter(|&j| self.dist[i * n + j].is_some_and(|d| d as usize <= radius))
            .map(|j| self.vertices[j])
            .collect();
        Ok(Ball { center, radius, members })
    }

    /// All vertices within distance `d` of some element of `support`.
    pub fn grow_support(&self, support: &BTreeSet<QubitId>, d: usize) -> Result<BTreeSet<QubitId>> {
        let idx: Vec<usize> = support.iter().map(|q| self.idx(q)).collect::<Result<_>>()?;
        let n = self.vertices.len();
        Ok((0..n)
            .filter(|&j| idx.iter().any(|&i| self.dist[i * n + j].is_some_and(|x| x as usize <= d)))
            .map(|j| self.vertices[j])
            .collect())
    }

    pub fn diameter(&self) -> Distance {
        self.dist
            .iter()
            .map(|d| d.map_or(Distance::Unreachable, |d| Distance::Finite(d as usize)))
            .max()
            .unwrap_or(Distance::Finite(0))
    }

    /// One `u v` pair per line. Isolated vertices are listed alone.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (a, b) in &self.edges {
            let _ = writeln!(out, "{a} {b}");
        }
        for (i, q) in self.vertices.iter().enumerate() {
            if self.adjacency[i].is_empty() {
                let _ = writeln!(out, "{q}");
            }
        }
        out
    }

    pub fn from_edge_list(time: usize, text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| s.parse::<QubitId>().map_err(|_| Error::Parse { line: n + 1, msg: format!("bad vertex `{s}`") });
            match toks.as_slice() {
                [] => {}
                [a] => vertices.push(parse(a)?),
                [a, b] => {
                    let (a, b) = (parse(a)?, parse(b)?);
                    vertices.extend([a, b]);
                    edges.push((a, b));
                }
                _ => return Err(Error::Parse { line: n + 1, msg: "expected `u v`".into() }),
            }
        }
        Self::from_edges(time, vertices, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_row_is_a_path() {
        let g = InteractionGraph::build(1, 2, 1, DeviceLayout::Ladder).unwrap();
        assert_eq!(g.simulated_edge_count(), 1);
        assert!(g.has_edge(QubitId::system(1, 0), QubitId::system(1, 1)));
    }

    #[test]
    fn five_by_five_grid() {
        let g = InteractionGraph::build(5, 5, 5, DeviceLayout::Ladder).unwrap();
        assert_eq!(g.simulated_edge_count(), 40);
        let sys = g.vertices().iter().filter(|q| q.system_row().is_some()).count();
        assert_eq!(sys, 25);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(InteractionGraph::build(0, 3, 3, DeviceLayout::Ladder).is_err());
        assert!(InteractionGraph::build(4, 3, 3, DeviceLayout::Ladder).is_err());
        assert!(InteractionGraph::build(1, 1, 3, DeviceLayout::Ladder).is_err());
        let g = InteractionGraph::build(1, 3, 3, DeviceLayout::Ladder).unwrap();
        assert!(matches!(g.distance(QubitId::system(2, 0), QubitId::bath(0)), Err(Error::MissingVertex(_))));
    }

    // literal edge predicate over all vertex pairs
    fn brute_force_edges(t: usize, lx: usize) -> BTreeSet<(QubitId, QubitId)> {
        let mut vs = Vec::new();
        for r in 1..=t {
            vs.extend((0..lx).map(|c| QubitId::system(r, c)));
        }
        vs.extend((0..lx).map(QubitId::bath));
        vs.extend((0..lx).map(|c| QubitId::sink(t, c)));
        let adjacent = |a: &QubitId, b: &QubitId| -> bool {
            let dc = a.position.abs_diff(b.position);
            match (a.system_row(), b.system_row()) {
                (Some(ra), Some(rb)) => (ra == rb && dc == 1) || (dc == 0 && ra.abs_diff(rb) == 1),
                (Some(r), None) | (None, Some(r)) => {
                    let other = if a.system_row().is_some() { b } else { a };
                    r == t && other.is_bath() && dc == 0
                }
                (None, None) => {
                    (a.register == b.register && dc == 1) || (a.register != b.register && dc == 0)
                }
            }
        };
        let mut out = BTreeSet::new();
        for a in &vs {
            for b in &vs {
                if a < b && adjacent(a, b) {
                    out.insert((*a, *b));
                }
            }
        }
        out
    }

    #[test]
    fn ladder_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let lx = rng.random_range(2..7);
            let ly = rng.random_range(1..6);
            let t = rng.random_range(1..=ly);
            let g = InteractionGraph::build(t, lx, ly, DeviceLayout::Ladder).unwrap();
            assert_eq!(g.edges(), &brute_force_edges(t, lx), "t={t} lx={lx}");
        }
    }

    #[test]
    fn surface_layout_contains_every_gate() {
        use crate::circuits::surface_code_transition;
        for t in 1..=4 {
            let g = InteractionGraph::build(t, 3, 4, DeviceLayout::SurfaceCode).unwrap();
            let tm = surface_code_transition(3, t, 4).unwrap();
            for (_, gate) in tm.circuit().gates() {
                if let [a, b] = gate.qubits[..] {
                    assert!(g.has_edge(a, b), "{a} {b} at t={t}");
                }
            }
        }
    }

    fn floyd_warshall(g: &InteractionGraph) -> Vec<Vec<Option<usize>>> {
        let n = g.vertices().len();
        let mut d = vec![vec![None; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = Some(0);
        }
        for (a, b) in g.edges() {
            let (i, j) = (g.idx(a).unwrap(), g.idx(b).unwrap());
            d[i][j] = Some(1);
            d[j][i] = Some(1);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                        if d[i][j].is_none_or(|c| x + y < c) {
                            d[i][j] = Some(x + y);
                        }
                    }
                }
            }
        }
        d
    }

    fn random_graph(seed: u64, n: usize, p: f64) -> InteractionGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vs: Vec<QubitId> = (0..n).map(QubitId::bath).collect();
        let mut es = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    es.push((vs[i], vs[j]));
                }
            }
        }
        InteractionGraph::from_edges(0, vs, es).unwrap()
    }

    #[test]
    fn all_pairs_matches_floyd_warshall() {
        for seed in 0..5 {
            let g = random_graph(seed, 20, 0.12);
            let fw = floyd_warshall(&g);
            for (i, u) in g.vertices().iter().enumerate() {
                for (j, v) in g.vertices().iter().enumerate() {
                    assert_eq!(g.distance(*u, *v).unwrap().finite(), fw[i][j]);
                }
            }
        }
    }

    #[test]
    fn ball_basics() {
        let g = InteractionGraph::build(3, 3, 3, DeviceLayout::Ladder).unwrap();
        let c = QubitId::system(2, 1);
        assert_eq!(g.ball(c, 0).unwrap().members, BTreeSet::from([c]));
        let Distance::Finite(diam) = g.diameter() else { panic!("connected") };
        assert_eq!(g.ball(c, diam).unwrap().members.len(), g.vertices().len());
        let nb: BTreeSet<_> = g.neighbors(c).unwrap().into_iter().chain([c]).collect();
        assert_eq!(g.grow_support(&BTreeSet::from([c]), 1).unwrap(), nb);
        assert_eq!(g.distance(c, c).unwrap(), Distance::Finite(0));
        assert_eq!(g.distance(c, QubitId::system(2, 2)).unwrap(), Distance::Finite(1));
    }

    #[test]
    fn unreachable_is_explicit() {
        let g = InteractionGraph::from_edges(0, [QubitId::bath(0), QubitId::bath(1)], []).unwrap();
        assert_eq!(g.distance(QubitId::bath(0), QubitId::bath(1)).unwrap(), Distance::Unreachable);
        assert_eq!(g.diameter(), Distance::Unreachable);
        assert_eq!(g.ball(QubitId::bath(0), 5).unwrap().members.len(), 1);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = InteractionGraph::build(2, 3, 3, DeviceLayout::SurfaceCode).unwrap();
        let h = InteractionGraph::from_edge_list(2, &g.to_edge_list()).unwrap();
        assert_eq!(g.edges(), h.edges());
        assert_eq!(g.vertices(), h.vertices());
        assert!(g.to_edge_list().lines().any(|l| l == "bath:_:0 bath:_:1"));
    }

    proptest! {
        #[test]
        fn metric_and_ball_properties(seed in 0u64..1000, p in 0.05f64..0.4, r in 0usize..5) {
            let g = random_graph(seed, 12, p);
            let vs = g.vertices().to_vec();
            for &u in &vs {
                let ball = g.ball(u, r).unwrap();
                let next = g.ball(u, r + 1).unwrap();
                prop_assert!(ball.members.is_subset(&next.members));
                let filtered: BTreeSet<_> = vs.iter().copied().filter(|v| g.distance(u, *v).unwrap().within(r)).collect();
                prop_assert_eq!(&ball.members, &filtered);
                for &v in &vs {
                    let duv = g.distance(u, v).unwrap();
                    prop_assert_eq!(duv, g.distance(v, u).unwrap());
                    for &w in &vs {
                        if let (Some(a), Some(b)) = (g.distance(u, w).unwrap().finite(), g.distance(w, v).unwrap().finite()) {
                            prop_assert!(duv.within(a + b));
                        }
                    }
                }
            }
        }

        #[test]
        fn grow_support_composes(seed in 0u64..1000, a in 0usize..4, b in 0usize..4, mask in 1u32..4096) {
            let g = random_graph(seed, 12, 0.15);
            let s: BTreeSet<_> = g.vertices().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, q)| *q).collect();
            prop_assert_eq!(g.grow_support(&s, 0).unwrap(), s.clone());
            let twice = g.grow_support(&g.grow_support(&s, a).unwrap(), b).unwrap();
            prop_assert_eq!(&twice, &g.grow_support(&s, a + b).unwrap());
            let union: BTreeSet<_> = s.iter().flat_map(|c| g.ball(*c, a + b).unwrap().members).collect();
            prop_assert_eq!(twice, union);
        }
    }
}
