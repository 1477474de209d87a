//! Static graph primitives: SCCs, backward reachability, random attractors,
//! condensation and the vertex-splitting reduction.

use crate::model::{Edge, MdpModel, Owner, StreettPair, StreettSpec, Vertex, VertexSet};

const UNVISITED: u32 = u32::MAX;

/// Successor access for [`TarjanScratch::run`]. `successor` may return
/// `None` for edges that leave the region being decomposed.
pub(crate) trait Successors {
    fn out_len(&self, v: Vertex) -> usize;
    fn successor(&self, v: Vertex, i: usize) -> Option<Vertex>;
}

/// Reusable iterative Tarjan. Arrays are sized for the whole vertex range
/// but only touched entries are reset, so a run costs time proportional to
/// the region it explores.
pub(crate) struct TarjanScratch {
    index: Vec<u32>,
    low: Vec<u32>,
    on_stack: Vec<bool>,
    stack: Vec<Vertex>,
    frames: Vec<(Vertex, usize)>,
    touched: Vec<Vertex>,
}

impl TarjanScratch {
    pub(crate) fn new(n: usize) -> Self {
        TarjanScratch {
            index: vec![UNVISITED; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            frames: Vec::new(),
            touched: Vec::new(),
        }
    }

    /// SCCs reachable from `roots`, in the order Tarjan completes them
    /// (reverse topological).
    pub(crate) fn run<S: Successors>(&mut self, roots: &[Vertex], graph: &S) -> Vec<Vec<Vertex>> {
        let mut components = Vec::new();
        let mut counter: u32 = 0;
        for &root in roots {
            if self.index[root] != UNVISITED {
                continue;
            }
            self.visit(root, &mut counter);
            while let Some(&mut (v, ref mut next)) = self.frames.last_mut() {
                if *next < graph.out_len(v) {
                    let i = *next;
                    *next += 1;
                    let Some(w) = graph.successor(v, i) else {
                        continue;
                    };
                    if self.index[w] == UNVISITED {
                        self.visit(w, &mut counter);
                    } else if self.on_stack[w] {
                        self.low[v] = self.low[v].min(self.index[w]);
                    }
                    continue;
                }
                self.frames.pop();
                if self.low[v] == self.index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = self.stack.pop().expect("tarjan stack underflow");
                        self.on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    components.push(comp);
                }
                if let Some(&(parent, _)) = self.frames.last() {
                    self.low[parent] = self.low[parent].min(self.low[v]);
                }
            }
        }
        for &v in &self.touched {
            self.index[v] = UNVISITED;
        }
        self.touched.clear();
        components
    }

    fn visit(&mut self, v: Vertex, counter: &mut u32) {
        self.index[v] = *counter;
        self.low[v] = *counter;
        *counter += 1;
        self.on_stack[v] = true;
        self.stack.push(v);
        self.frames.push((v, 0));
        self.touched.push(v);
    }
}

struct Restricted<'a> {
    model: &'a MdpModel,
    mask: Option<&'a [bool]>,
}

impl Successors for Restricted<'_> {
    fn out_len(&self, v: Vertex) -> usize {
        self.model.out_degree(v)
    }

    fn successor(&self, v: Vertex, i: usize) -> Option<Vertex> {
        let w = self.model.edge(self.model.out_edge_ids(v).start + i).1;
        match self.mask {
            Some(mask) if !mask[w] => None,
            _ => Some(w),
        }
    }
}

fn sorted_components(mut comps: Vec<Vec<Vertex>>) -> Vec<VertexSet> {
    for c in &mut comps {
        c.sort_unstable();
    }
    comps.sort_unstable_by_key(|c| c[0]);
    comps.into_iter().map(VertexSet::from_vec).collect()
}

/// SCC partition of the model, or of the subgraph induced by `restriction`.
/// Components are sorted by their smallest member.
pub fn tarjan_sccs(model: &MdpModel, restriction: Option<&VertexSet>) -> Vec<VertexSet> {
    let n = model.vertex_count();
    let mut scratch = TarjanScratch::new(n);
    match restriction {
        None => {
            let roots: Vec<Vertex> = (0..n).collect();
            sorted_components(scratch.run(&roots, &Restricted { model, mask: None }))
        }
        Some(set) => {
            let mask = set.mask(n);
            let graph = Restricted {
                model,
                mask: Some(&mask),
            };
            sorted_components(scratch.run(set.as_slice(), &graph))
        }
    }
}

/// SCCs of the subgraph induced by `mask`.
pub(crate) fn sccs_within(model: &MdpModel, mask: &[bool]) -> Vec<VertexSet> {
    let roots: Vec<Vertex> = (0..model.vertex_count()).filter(|&v| mask[v]).collect();
    let mut scratch = TarjanScratch::new(model.vertex_count());
    sorted_components(scratch.run(
        &roots,
        &Restricted {
            model,
            mask: Some(mask),
        },
    ))
}


/// `Reach(targets)`: every vertex with a path to some target.
pub fn graph_reach(model: &MdpModel, targets: &VertexSet) -> VertexSet {
    let n = model.vertex_count();
    VertexSet::from_mask(&reach_within(model, &vec![true; n], targets.as_slice()))
}

/// Backward search over `In(v)` inside the `working` mask. Targets outside
/// the mask are ignored.
pub(crate) fn reach_within(model: &MdpModel, working: &[bool], targets: &[Vertex]) -> Vec<bool> {
    let mut seen = vec![false; model.vertex_count()];
    let mut stack: Vec<Vertex> = Vec::new();
    for &t in targets {
        if working[t] && !seen[t] {
            seen[t] = true;
            stack.push(t);
        }
    }
    while let Some(v) = stack.pop() {
        for u in model.predecessors(v) {
            if working[u] && !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen
}

/// Stamp-based scratch space for attractor computations on a changing
/// graph. Each call costs time proportional to the attractor and the
/// in-edges of its members.
pub(crate) struct AttractorScratch {
    member: Vec<u32>,
    counted: Vec<u32>,
    remaining: Vec<usize>,
    epoch: u32,
}

impl AttractorScratch {
    pub(crate) fn new(n: usize) -> Self {
        AttractorScratch {
            member: vec![0; n],
            counted: vec![0; n],
            remaining: vec![0; n],
            epoch: 0,
        }
    }

    /// Random attractor of `targets`.
    ///
    /// `out_degree(v)` must give the number of edges of `v` inside the
    /// region and `preds(v, f)` must call `f` for every in-region
    /// predecessor of `v` (once per edge). A player vertex joins once all of
    /// its in-region edges lead into the attractor; a player vertex with no
    /// such edges only joins as a target.
    pub(crate) fn attract<D, P>(
        &mut self,
        targets: &[Vertex],
        owner: impl Fn(Vertex) -> Owner,
        out_degree: D,
        mut preds: P,
    ) -> Vec<Vertex>
    where
        D: Fn(Vertex) -> usize,
        P: FnMut(Vertex, &mut dyn FnMut(Vertex)),
    {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.member.fill(0);
            self.counted.fill(0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        let mut attr: Vec<Vertex> = Vec::new();
        for &t in targets {
            if self.member[t] != epoch {
                self.member[t] = epoch;
                attr.push(t);
            }
        }
        let mut head = 0;
        while head < attr.len() {
            let v = attr[head];
            head += 1;
            let member = &mut self.member;
            let counted = &mut self.counted;
            let remaining = &mut self.remaining;
            preds(v, &mut |u| {
                if member[u] == epoch {
                    return;
                }
                match owner(u) {
                    Owner::Random => {
                        member[u] = epoch;
                        attr.push(u);
                    }
                    Owner::Player1 => {
                        if counted[u] != epoch {
                            counted[u] = epoch;
                            remaining[u] = out_degree(u);
                        }
                        remaining[u] -= 1;
                        if remaining[u] == 0 {
                            member[u] = epoch;
                            attr.push(u);
                        }
                    }
                }
            });
        }
        attr
    }
}

/// `attr_R(targets)` computed inside `working`, using only edges with both
/// endpoints in `working`.
pub fn random_attractor(model: &MdpModel, working: &VertexSet, targets: &VertexSet) -> VertexSet {
    let mask = working.mask(model.vertex_count());
    VertexSet::from_vec(attractor_within(model, &mask, targets.as_slice()))
}

pub(crate) fn attractor_within(model: &MdpModel, working: &[bool], targets: &[Vertex]) -> Vec<Vertex> {
    let n = model.vertex_count();
    let mut scratch = AttractorScratch::new(n);
    let targets: Vec<Vertex> = targets.iter().copied().filter(|&t| working[t]).collect();
    scratch.attract(
        &targets,
        |v| model.owner(v),
        |v| model.successors(v).filter(|&w| working[w]).count(),
        |v, f| {
            for u in model.predecessors(v) {
                if working[u] {
                    f(u);
                }
            }
        },
    )
}

/// Condensation: one node per SCC, numbered by smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condensation {
    pub nodes: Vec<VertexSet>,
    pub node_of: Vec<usize>,
    /// Deduplicated edges between distinct nodes, sorted.
    pub edges: Vec<Edge>,
}

pub fn condense(model: &MdpModel) -> Condensation {
    let nodes = tarjan_sccs(model, None);
    let mut node_of = vec![0usize; model.vertex_count()];
    for (i, c) in nodes.iter().enumerate() {
        for v in c {
            node_of[v] = i;
        }
    }
    let mut edges: Vec<Edge> = model
        .edges()
        .iter()
        .map(|&(u, v)| (node_of[u], node_of[v]))
        .filter(|(a, b)| a != b)
        .collect();
    edges.sort_unstable();
    edges.dedup();
    Condensation {
        nodes,
        node_of,
        edges,
    }
}

/// Id of `v_in` in the split instance.
pub fn split_in(v: Vertex) -> Vertex {
    2 * v
}

/// Id of `v_out` in the split instance.
pub fn split_out(v: Vertex) -> Vertex {
    2 * v + 1
}

/// Original vertex of a split-instance vertex.
pub fn split_origin(x: Vertex) -> Vertex {
    x / 2
}

/// Split instance: each `v` becomes a player-1 `v_in` feeding `v_out`, which
/// keeps the owner and the out-edges of `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitInstance {
    pub model: MdpModel,
    pub spec: StreettSpec,
}

impl SplitInstance {
    /// `(v_in, v_out)` for every original vertex.
    pub fn back_map(&self) -> Vec<(Vertex, Vertex)> {
        (0..self.model.vertex_count() / 2)
            .map(|v| (split_in(v), split_out(v)))
            .collect()
    }
}

pub fn split_vertices(model: &MdpModel, spec: &StreettSpec) -> SplitInstance {
    let n = model.vertex_count();
    let mut owners = Vec::with_capacity(2 * n);
    for v in 0..n {
        owners.push(Owner::Player1);
        owners.push(model.owner(v));
    }
    let mut edges: Vec<Edge> = model
        .edges()
        .iter()
        .map(|&(u, v)| (split_out(u), split_in(v)))
        .collect();
    edges.extend((0..n).map(|v| (split_in(v), split_out(v))));
    let pairs = spec
        .pairs()
        .iter()
        .map(|p| StreettPair {
            requests: VertexSet::from_vec(p.requests.iter().map(split_in).collect()),
            grants: VertexSet::from_vec(p.grants.iter().map(split_out).collect()),
        })
        .collect();
    SplitInstance {
        model: MdpModel::derived(owners, edges).expect("split of a valid model"),
        spec: StreettSpec::new(pairs),
    }
}
