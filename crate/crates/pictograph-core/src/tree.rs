//! Polynomial trees truncated at a height cutoff.
//!
//! Vertex 0 is the top of the stored ray, the image `F(v0)`. Every vertex
//! stores the edge above it implicitly: `edge_deg` is the degree of that edge,
//! and for the root it is the degree of the ray to infinity.

use alloc::collections::{BTreeMap, BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use num_traits::{One, Zero};

use crate::lamination::Rat;

pub type VertexId = usize;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("topological degree must be at least 2, got {0}")]
    Degree(u32),
    #[error("no vertex {0}")]
    NoVertex(VertexId),
    #[error("parent and child lists disagree at vertex {0}")]
    Links(VertexId),
    #[error("vertex {0} lies above v0")]
    AboveFundamental(VertexId),
    #[error("the edge above vertex {0} is neither fundamental nor below v0")]
    NotBelow(VertexId),
    #[error("the forward orbit of vertex {0} leaves the stored tree")]
    OrbitEscapes(VertexId),
    #[error("spine data cannot be expanded below the source cutoff {0}")]
    CutoffTooLow(Rat),
    #[error("inconsistent spine data at spine vertex {0}: {1}")]
    Inconsistent(usize, &'static str),
}

/// A violated axiom, with the vertex where it fails.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TreeViolation {
    #[error("axiom (1): vertex {0} has no edge below it")]
    Endpoint(VertexId),
    #[error("heights: h(F({0})) != d*h({0})")]
    Height(VertexId),
    #[error("simplicial: F does not carry the edge above {0} to the edge above its image")]
    Simplicial(VertexId),
    #[error("axiom (5): at vertex {vertex}, degrees over image edge {image} sum to {sum}, not {deg}")]
    LocalDegree {
        vertex: VertexId,
        image: VertexId,
        sum: u32,
        deg: u32,
    },
    #[error("axiom (5): the edge above {0} has a degree different from the vertex")]
    EdgeDegree(VertexId),
    #[error("critical point bound at {vertex}: {excess} > 2*{deg} - 2")]
    CriticalPoint { vertex: VertexId, deg: u32, excess: u32 },
    #[error("deg F = {expected} but the largest local degree is {found}")]
    TopDegree { expected: u32, found: u32 },
    #[error("fundamental vertices: {0}")]
    Fundamental(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeVertex {
    pub parent: Option<VertexId>,
    pub children: Vec<VertexId>,
    pub height: Rat,
    /// `F(v)`; `None` above the stored ray.
    pub image: Option<VertexId>,
    pub deg: u32,
    /// Degree of the edge above.
    pub edge_deg: u32,
    /// Whether every child of the infinite tree is stored.
    pub complete: bool,
}

/// A finite truncation of a polynomial-type tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialTree {
    degree: u32,
    vertices: Vec<TreeVertex>,
    fundamental: Vec<VertexId>,
    cutoff: Rat,
}

impl PolynomialTree {
    /// Assembles a tree after checking that ids and parent links agree.
    /// Axioms are checked separately by [`PolynomialTree::violations`].
    pub fn from_parts(
        degree: u32,
        vertices: Vec<TreeVertex>,
        fundamental: Vec<VertexId>,
        cutoff: Rat,
    ) -> Result<Self, TreeError> {
        if degree < 2 {
            return Err(TreeError::Degree(degree));
        }
        let n = vertices.len();
        let check = |v: VertexId| if v < n { Ok(()) } else { Err(TreeError::NoVertex(v)) };
        for (i, v) in vertices.iter().enumerate() {
            if let Some(p) = v.parent {
                check(p)?;
                if !vertices[p].children.contains(&i) {
                    return Err(TreeError::Links(i));
                }
            } else if i != 0 {
                return Err(TreeError::Links(i));
            }
            for &c in &v.children {
                check(c)?;
                if vertices[c].parent != Some(i) {
                    return Err(TreeError::Links(i));
                }
            }
            if let Some(y) = v.image {
                check(y)?;
            }
        }
        for &f in &fundamental {
            check(f)?;
        }
        if n == 0 || fundamental.is_empty() {
            return Err(TreeError::NoVertex(0));
        }
        Ok(PolynomialTree {
            degree,
            vertices,
            fundamental,
            cutoff,
        })
    }

    /// The tree of every quadratic polynomial with disconnected Julia set,
    /// down to `cutoff`, with `h(v0) = 1`. Below `v0` every vertex has two
    /// children, and `F` forgets the first step of the path from `v0`.
    pub fn quadratic(cutoff: Rat) -> Self {
        let one = Rat::one();
        let mut vertices = vec![
            TreeVertex {
                parent: None,
                children: vec![1],
                height: Rat::from_integer(2),
                image: None,
                deg: 2,
                edge_deg: 2,
                complete: true,
            },
            TreeVertex {
                parent: Some(0),
                children: Vec::new(),
                height: one,
                image: Some(0),
                deg: 2,
                edge_deg: 2,
                complete: true,
            },
        ];
        // path from v0 (a bit string) -> id
        let mut ids: BTreeMap<Vec<u8>, VertexId> = BTreeMap::new();
        ids.insert(Vec::new(), 1);
        let mut queue = VecDeque::from([Vec::<u8>::new()]);
        while let Some(path) = queue.pop_front() {
            let id = ids[&path];
            let h = vertices[id].height / 2;
            if h < cutoff {
                vertices[id].complete = false;
                continue;
            }
            for b in 0..2u8 {
                let mut child = path.clone();
                child.push(b);
                let image = if child.len() == 1 { 1 } else { ids[&child[1..]] };
                let c = vertices.len();
                vertices.push(TreeVertex {
                    parent: Some(id),
                    children: Vec::new(),
                    height: h,
                    image: Some(image),
                    deg: 1,
                    edge_deg: 1,
                    complete: true,
                });
                vertices[id].children.push(c);
                ids.insert(child.clone(), c);
                queue.push_back(child);
            }
        }
        PolynomialTree {
            degree: 2,
            vertices,
            fundamental: vec![1],
            cutoff,
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[TreeVertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> &TreeVertex {
        &self.vertices[v]
    }

    pub fn root(&self) -> VertexId {
        0
    }

    /// `v0, v1, ..., v_{N-1}`.
    pub fn fundamental(&self) -> &[VertexId] {
        &self.fundamental
    }

    pub fn v0(&self) -> VertexId {
        self.fundamental[0]
    }

    pub fn cutoff(&self) -> Rat {
        self.cutoff
    }

    /// Child indices along the path from the root.
    pub fn address(&self, mut v: VertexId) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(p) = self.vertices[v].parent {
            out.push(self.vertices[p].children.iter().position(|&c| c == v).unwrap());
            v = p;
        }
        out.reverse();
        out
    }

    /// Vertices renumbered breadth-first from the root in child order, so
    /// that equal trees have equal representations.
    pub fn canonical(&self) -> Self {
        let mut order = Vec::with_capacity(self.len());
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            queue.extend(self.vertices[v].children.iter().copied());
        }
        let mut new_id = vec![usize::MAX; self.len()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let vertices = order
            .iter()
            .map(|&v| {
                let x = &self.vertices[v];
                TreeVertex {
                    parent: x.parent.map(|p| new_id[p]),
                    children: x.children.iter().map(|&c| new_id[c]).collect(),
                    image: x.image.map(|y| new_id[y]),
                    ..x.clone()
                }
            })
            .collect();
        PolynomialTree {
            degree: self.degree,
            vertices,
            fundamental: self.fundamental.iter().map(|&f| new_id[f]).collect(),
            cutoff: self.cutoff,
        }
    }

    /// Structural equality: same addresses, heights, degrees and dynamics.
    pub fn same_as(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }

    /// The subtree of vertices at height `>= cutoff`.
    pub fn truncate(&self, cutoff: Rat) -> Self {
        let cutoff = cutoff.max(self.cutoff);
        let mut new_id = vec![usize::MAX; self.len()];
        let mut kept = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.height >= cutoff {
                new_id[i] = kept.len();
                kept.push(i);
            }
        }
        let vertices = kept
            .iter()
            .map(|&i| {
                let x = &self.vertices[i];
                let children: Vec<VertexId> = x
                    .children
                    .iter()
                    .filter(|&&c| new_id[c] != usize::MAX)
                    .map(|&c| new_id[c])
                    .collect();
                TreeVertex {
                    parent: x.parent.map(|p| new_id[p]),
                    complete: x.complete && children.len() == x.children.len(),
                    children,
                    image: x.image.map(|y| new_id[y]),
                    ..x.clone()
                }
            })
            .collect();
        PolynomialTree {
            degree: self.degree,
            vertices,
            fundamental: self.fundamental.iter().map(|&f| new_id[f]).collect(),
            cutoff,
        }
    }

    fn at_or_below_v0(&self, v: VertexId) -> bool {
        self.vertices[v].height <= self.vertices[self.v0()].height
    }

    /// Least `l >= 0` with `h(F^l v) >= h(v0)`, with the vertices passed.
    fn orbit_to_level(&self, v: VertexId) -> Result<Vec<VertexId>, TreeError> {
        if v >= self.len() {
            return Err(TreeError::NoVertex(v));
        }
        let top = self.vertices[self.v0()].height;
        let mut path = Vec::new();
        let mut x = v;
        while self.vertices[x].height < top {
            path.push(x);
            x = self.vertices[x].image.ok_or(TreeError::OrbitEscapes(v))?;
        }
        Ok(path)
    }

    /// The level `l(v)`.
    pub fn level(&self, v: VertexId) -> Result<u32, TreeError> {
        if !self.at_or_below_v0(v) {
            return Err(TreeError::AboveFundamental(v));
        }
        Ok(self.orbit_to_level(v)?.len() as u32)
    }

    /// `deg(v) deg(F v) ... deg(F^{l-1} v) / d^l`: the measure of the part
    /// of the Julia set below `v`.
    pub fn weight(&self, v: VertexId) -> Result<Rat, TreeError> {
        if v >= self.len() {
            return Err(TreeError::NoVertex(v));
        }
        if !self.at_or_below_v0(v) {
            return Err(TreeError::AboveFundamental(v));
        }
        let d = self.degree as i64;
        Ok(self
            .orbit_to_level(v)?
            .iter()
            .map(|&x| Rat::new(self.vertices[x].deg as i64, d))
            .product())
    }

    /// Modulus of the annulus above `v` relative to the fundamental annulus
    /// it eventually covers: `1 / (deg(e) deg(F e) ... deg(F^{k-1} e))`.
    pub fn relative_modulus(&self, v: VertexId) -> Result<Rat, TreeError> {
        if v >= self.len() {
            return Err(TreeError::NoVertex(v));
        }
        if self.fundamental.contains(&v) {
            return Ok(Rat::one());
        }
        if !self.at_or_below_v0(v) {
            return Err(TreeError::NotBelow(v));
        }
        let prod: i64 = self
            .orbit_to_level(v)?
            .iter()
            .map(|&x| self.vertices[x].edge_deg as i64)
            .product();
        Ok(Rat::new(1, prod))
    }

    /// Every violated axiom; empty for a valid truncation. Vertices whose
    /// children are cut off are exempt from the checks that need them.
    pub fn violations(&self) -> Vec<TreeViolation> {
        let mut out = Vec::new();
        let d = self.degree;
        let vs = &self.vertices;
        let found = vs.iter().map(|v| v.deg).max().unwrap_or(0);
        if found != d {
            out.push(TreeViolation::TopDegree { expected: d, found });
        }
        let v0 = self.v0();
        if vs[v0].image != Some(0) {
            out.push(TreeViolation::Fundamental("F(v0) must be the root"));
        }
        for w in self.fundamental.windows(2) {
            if vs[w[0]].parent != Some(w[1]) {
                out.push(TreeViolation::Fundamental("v_{j+1} must be the parent of v_j"));
            }
        }
        for (i, v) in vs.iter().enumerate() {
            if v.complete && v.children.is_empty() {
                out.push(TreeViolation::Endpoint(i));
            }
            if v.edge_deg != v.deg {
                out.push(TreeViolation::EdgeDegree(i));
            }
            let excess: u32 = v.edge_deg - 1 + v.children.iter().map(|&c| vs[c].edge_deg - 1).sum::<u32>();
            if excess > 2 * v.deg - 2 {
                out.push(TreeViolation::CriticalPoint {
                    vertex: i,
                    deg: v.deg,
                    excess,
                });
            }
            let Some(y) = v.image else { continue };
            if vs[y].height != v.height * d as i64 {
                out.push(TreeViolation::Height(i));
            }
            if let Some(fp) = v.parent.and_then(|p| vs[p].image) {
                if vs[y].parent != Some(fp) {
                    out.push(TreeViolation::Simplicial(i));
                }
            }
            let mut sums: BTreeMap<VertexId, u32> = vs[y].children.iter().map(|&c| (c, 0)).collect();
            for &c in &v.children {
                match vs[c].image.and_then(|fc| sums.get_mut(&fc)) {
                    Some(s) => *s += vs[c].edge_deg,
                    None => out.push(TreeViolation::Simplicial(c)),
                }
            }
            for (image, sum) in sums {
                let short = sum < v.deg && v.complete && vs[y].complete;
                if sum > v.deg || short {
                    out.push(TreeViolation::LocalDegree {
                        vertex: i,
                        image,
                        sum,
                        deg: v.deg,
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> bool {
        self.violations().is_empty()
    }
}

/// One child of a spine vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub degree: u32,
    /// Index, among the children of the first-return vertex, of the image of
    /// this child under the return iterate.
    pub image: usize,
    /// The spine node this child is, if it is on the spine.
    pub spine: Option<usize>,
}

/// Where a spine vertex first returns to the spine, and after how many steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Return {
    pub target: usize,
    pub iterate: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpineNode {
    pub height: Rat,
    pub deg: u32,
    /// `None` on the ray above `v0`.
    pub ret: Option<Return>,
    /// Every stored child, in order.
    pub branches: Vec<Branch>,
    /// Whether `branches` is every child of the infinite tree.
    pub complete: bool,
}

/// The spine with its first-return data: node 0 is `v0`, nodes `1..=N` are
/// the ray `v1, ..., vN = F(v0)`, and the rest lie below `v0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpineReturn {
    pub degree: u32,
    pub fund_edges: usize,
    pub nodes: Vec<SpineNode>,
    /// Cutoff of the tree the data was read from.
    pub cutoff: Rat,
}

impl SpineReturn {
    /// Nodes strictly below `v0`.
    pub fn below_v0(&self) -> &[SpineNode] {
        &self.nodes[self.fund_edges + 1..]
    }
}

/// The spine (every vertex meeting an edge of degree `> 1`, the ray
/// included) and its first-return map to itself.
pub fn spine_and_return(t: &PolynomialTree) -> Result<SpineReturn, TreeError> {
    let vs = t.vertices();
    let n_fund = t.fundamental().len();
    let mut order: Vec<VertexId> = t.fundamental().to_vec();
    order.push(t.root());
    for (i, v) in vs.iter().enumerate() {
        let on = v.edge_deg > 1 || v.children.iter().any(|&c| vs[c].edge_deg > 1);
        if on && !order.contains(&i) {
            order.push(i);
        }
    }
    let mut index = vec![None; vs.len()];
    for (k, &v) in order.iter().enumerate() {
        index[v] = Some(k);
    }
    let mut nodes = Vec::with_capacity(order.len());
    for (k, &v) in order.iter().enumerate() {
        let x = &vs[v];
        if (1..=n_fund).contains(&k) {
            nodes.push(SpineNode {
                height: x.height,
                deg: x.deg,
                ret: None,
                branches: x
                    .children
                    .iter()
                    .map(|&c| Branch {
                        degree: vs[c].edge_deg,
                        image: 0,
                        spine: index[c],
                    })
                    .collect(),
                complete: x.complete,
            });
            continue;
        }
        let mut w = v;
        let mut iterate = 0;
        loop {
            w = vs[w].image.ok_or(TreeError::OrbitEscapes(v))?;
            iterate += 1;
            if index[w].is_some() {
                break;
            }
        }
        let mut branches = Vec::with_capacity(x.children.len());
        for &c in &x.children {
            let mut y = c;
            for _ in 0..iterate {
                y = vs[y].image.ok_or(TreeError::OrbitEscapes(c))?;
            }
            let image = vs[w]
                .children
                .iter()
                .position(|&z| z == y)
                .ok_or(TreeError::OrbitEscapes(c))?;
            branches.push(Branch {
                degree: vs[c].edge_deg,
                image,
                spine: index[c],
            });
        }
        nodes.push(SpineNode {
            height: x.height,
            deg: x.deg,
            ret: Some(Return {
                target: index[w].unwrap(),
                iterate,
            }),
            branches,
            complete: x.complete,
        });
    }
    Ok(SpineReturn {
        degree: t.degree(),
        fund_edges: n_fund,
        nodes,
        cutoff: t.cutoff(),
    })
}

/// Rebuilds the tree down to `cutoff` from the spine and its return map.
///
/// Vertices are filled in by decreasing height. Off the spine, the star of a
/// vertex is a degree-1 copy of the star of its image. On the spine, the star
/// maps by the return iterate onto the star of the return vertex, and the
/// iterates in between are degree 1, which fixes the action of `F` itself.
pub fn expand_from_spine(r: &SpineReturn, cutoff: Rat) -> Result<PolynomialTree, TreeError> {
    if cutoff < r.cutoff {
        return Err(TreeError::CutoffTooLow(r.cutoff));
    }
    let d = r.degree as i64;
    let n_fund = r.fund_edges;
    if r.nodes.len() <= n_fund || n_fund == 0 {
        return Err(TreeError::Inconsistent(0, "missing ray"));
    }
    let mut vs: Vec<TreeVertex> = Vec::new();
    let mut spine_id: Vec<Option<VertexId>> = vec![None; r.nodes.len()];
    // ray from vN down to v0
    for j in (0..=n_fund).rev() {
        let node = &r.nodes[j];
        let id = vs.len();
        vs.push(TreeVertex {
            parent: id.checked_sub(1),
            children: Vec::new(),
            height: node.height,
            image: None,
            deg: node.deg,
            edge_deg: node.deg,
            complete: true,
        });
        if id > 0 {
            vs[id - 1].children.push(id);
        }
        spine_id[j] = Some(id);
    }
    let v0 = n_fund;
    vs[v0].image = Some(0);
    let fundamental: Vec<VertexId> = (1..=n_fund).rev().collect();
    let mut heap = BinaryHeap::from([(vs[v0].height, Reverse(v0))]);
    let mut node_of: BTreeMap<VertexId, usize> = BTreeMap::new();
    node_of.insert(v0, 0);
    while let Some((_, Reverse(x))) = heap.pop() {
        let y = vs[x].image.expect("images are set at creation");
        // (image child, edge degree, spine node)
        let plan: Vec<(Option<VertexId>, u32, Option<usize>)> = match node_of.get(&x) {
            Some(&s) => {
                let node = &r.nodes[s];
                let ret = node.ret.ok_or(TreeError::Inconsistent(s, "no return"))?;
                let mut w = x;
                for _ in 0..ret.iterate {
                    w = vs[w].image.ok_or(TreeError::Inconsistent(s, "orbit leaves the tree"))?;
                }
                if Some(w) != spine_id[ret.target] {
                    return Err(TreeError::Inconsistent(s, "return lands elsewhere"));
                }
                let mut plan = Vec::with_capacity(node.branches.len());
                for b in &node.branches {
                    let wanted = vs[w].children.get(b.image).copied();
                    let found = vs[y].children.iter().copied().find(|&c| {
                        let mut z = c;
                        for _ in 1..ret.iterate {
                            z = vs[z].image.unwrap();
                        }
                        Some(z) == wanted
                    });
                    if found.is_none() && vs[w].complete {
                        return Err(TreeError::Inconsistent(s, "branch has no image"));
                    }
                    plan.push((found, b.degree, b.spine));
                }
                plan
            }
            None => vs[y].children.iter().map(|&c| (Some(c), 1, None)).collect(),
        };
        let mut complete = vs[y].complete && node_of.get(&x).is_none_or(|&s| r.nodes[s].complete);
        for (image, degree, spine) in plan {
            let Some(image) = image else {
                complete = false;
                continue;
            };
            let h = vs[image].height / d;
            if h < cutoff {
                complete = false;
                continue;
            }
            let c = vs.len();
            vs.push(TreeVertex {
                parent: Some(x),
                children: Vec::new(),
                height: h,
                image: Some(image),
                deg: degree,
                edge_deg: degree,
                complete: true,
            });
            vs[x].children.push(c);
            if let Some(s) = spine {
                if r.nodes[s].height != h || r.nodes[s].deg != degree {
                    return Err(TreeError::Inconsistent(s, "height or degree mismatch"));
                }
                spine_id[s] = Some(c);
                node_of.insert(c, s);
            }
            heap.push((h, Reverse(c)));
        }
        vs[x].complete = complete;
    }
    PolynomialTree::from_parts(r.degree, vs, fundamental, cutoff)
}

/// Sum of `weight` over the stored children of `v`; equals `weight(v)` when
/// `v` is complete.
pub fn child_weight_sum(t: &PolynomialTree, v: VertexId) -> Result<Rat, TreeError> {
    let mut total = Rat::zero();
    for &c in &t.vertex(v).children {
        total += t.weight(c)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_weights() {
        let t = PolynomialTree::quadratic(Rat::new(1, 8));
        assert!(t.validate(), "{:?}", t.violations());
        let v0 = t.v0();
        assert_eq!(t.weight(v0).unwrap(), Rat::one());
        for &c in &t.vertex(v0).children {
            assert_eq!(t.weight(c).unwrap(), Rat::new(1, 2));
        }
        assert_eq!(child_weight_sum(&t, v0).unwrap(), Rat::one());
    }

    #[test]
    fn quadratic_expands_from_ray() {
        let t = PolynomialTree::quadratic(Rat::new(1, 16));
        let r = spine_and_return(&t).unwrap();
        assert!(r.below_v0().is_empty());
        let u = expand_from_spine(&r, Rat::new(1, 16)).unwrap();
        assert!(u.same_as(&t));
    }
}
