//! Finite rooted trees stored as an arena, plus the recursive `T1`/`T2`
//! constructions the games are played on.
//!
//! Node ids are dense, the root is always `0`, and children are kept in
//! ascending id order. Trees are immutable once built.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TreeError;

/// Index of a vertex inside one [`Tree`].
pub type NodeId = usize;

/// Which of the two construction families a tree belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    T1,
    T2,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::T1 => write!(f, "T1"),
            Role::T2 => write!(f, "T2"),
        }
    }
}

impl std::str::FromStr for Role {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "T1" | "t1" => Ok(Role::T1),
            "T2" | "t2" => Ok(Role::T2),
            other => Err(TreeError::Parse(format!("unknown role `{other}`"))),
        }
    }
}

/// What hangs below one top-level child of a construction node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recipe {
    /// A childless vertex.
    Leaf,
    /// A vertex with the given number of childless children.
    Star(usize),
    /// A vertex that is itself the root of a smaller construction.
    Construction { role: Role, s: usize },
}

/// Construction metadata for a node that roots a copy of `T1^(s,k,m)` or
/// `T2^(s,k,m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blueprint {
    pub role: Role,
    pub s: usize,
    pub k: usize,
    pub m: usize,
    /// One entry per top-level child, in index order `u_1 .. u_{m+1}`.
    #[serde(skip)]
    pub child_roles: Vec<Recipe>,
}

impl Blueprint {
    pub fn new(role: Role, s: usize, k: usize, m: usize) -> Result<Self, TreeError> {
        check_params(s, k, m)?;
        let child_roles = (0..=m)
            .map(|t| {
                let special = role == Role::T2 && t == m;
                match (s, special) {
                    (1, false) => Recipe::Star(m),
                    (1, true) => Recipe::Leaf,
                    (_, false) => Recipe::Construction { role: Role::T2, s: s - 1 },
                    (_, true) => Recipe::Construction { role: Role::T1, s: s - 1 },
                }
            })
            .collect();
        Ok(Blueprint { role, s, k, m, child_roles })
    }
}

fn check_params(s: usize, k: usize, m: usize) -> Result<(), TreeError> {
    if s == 0 || k == 0 || m == 0 {
        return Err(TreeError::Parameter(format!("s, k and m must be positive (got s={s}, k={k}, m={m})")));
    }
    if m < s * k {
        return Err(TreeError::Parameter(format!("m must be at least s*k (got m={m}, s*k={})", s * k)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<NodeRecord>,
    depth: Vec<usize>,
    // preorder position and subtree size, for O(1) subtree membership
    pre: Vec<usize>,
    size: Vec<usize>,
    blueprints: BTreeMap<NodeId, Blueprint>,
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.blueprints == other.blueprints
    }
}

impl Eq for Tree {}

impl Tree {
    /// The one-vertex tree.
    pub fn singleton() -> Self {
        Tree::from_parents(&[None]).expect("singleton is a valid tree")
    }

    /// Builds a tree from a parent array indexed by node id.
    pub fn from_parents(parents: &[Option<NodeId>]) -> Result<Self, TreeError> {
        let n = parents.len();
        if n == 0 {
            return Err(TreeError::Structure("a tree needs at least one node".into()));
        }
        if parents[0].is_some() {
            return Err(TreeError::Structure("node 0 must be the root".into()));
        }
        let mut nodes: Vec<NodeRecord> =
            (0..n).map(|id| NodeRecord { id, parent: parents[id], children: Vec::new() }).collect();
        for (id, parent) in parents.iter().enumerate().skip(1) {
            match parent {
                None => return Err(TreeError::Structure(format!("node {id} has no parent but is not the root"))),
                Some(p) if *p >= n => {
                    return Err(TreeError::Structure(format!("node {id} names parent {p}, which does not exist")))
                }
                Some(p) if *p == id => return Err(TreeError::Structure(format!("node {id} is its own parent"))),
                Some(p) => nodes[*p].children.push(id),
            }
        }
        let mut tree =
            Tree { nodes, depth: vec![0; n], pre: vec![0; n], size: vec![1; n], blueprints: BTreeMap::new() };
        tree.index()?;
        Ok(tree)
    }

    // Fills depth / preorder / size and rejects cycles (unreachable nodes).
    fn index(&mut self) -> Result<(), TreeError> {
        let n = self.nodes.len();
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![0];
        let mut seen = vec![false; n];
        while let Some(v) = stack.pop() {
            if seen[v] {
                return Err(TreeError::Structure(format!("node {v} reached twice")));
            }
            seen[v] = true;
            self.pre[v] = order.len();
            order.push(v);
            for &c in self.nodes[v].children.iter().rev() {
                self.depth[c] = self.depth[v] + 1;
                stack.push(c);
            }
        }
        if order.len() != n {
            let missing = (0..n).find(|&v| !seen[v]).unwrap_or(0);
            return Err(TreeError::Structure(format!(
                "node {missing} is not reachable from the root (parent links form a cycle)"
            )));
        }
        for &v in order.iter().rev() {
            self.size[v] = 1 + self.nodes[v].children.iter().map(|&c| self.size[c]).sum::<usize>();
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.nodes.len()
    }

    pub fn check_node(&self, v: NodeId) -> Result<(), TreeError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(TreeError::InvalidNode(v))
        }
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v].parent
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.nodes[v].children
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    pub fn subtree_size(&self, v: NodeId) -> usize {
        self.size[v]
    }

    /// `true` when `v` lies in `T(top)`, the subtree rooted at `top`.
    pub fn in_subtree(&self, top: NodeId, v: NodeId) -> bool {
        let start = self.pre[top];
        let p = self.pre[v];
        p >= start && p < start + self.size[top]
    }

    /// The ancestor of `v` at the given depth, if `v` is at least that deep.
    pub fn ancestor_at_depth(&self, v: NodeId, depth: usize) -> Option<NodeId> {
        if self.depth[v] < depth {
            return None;
        }
        let mut cur = v;
        while self.depth[cur] > depth {
            cur = self.nodes[cur].parent?;
        }
        Some(cur)
    }

    /// The child of `top` whose subtree contains `v`, if `v` is a proper
    /// descendant of `top`.
    pub fn child_towards(&self, top: NodeId, v: NodeId) -> Option<NodeId> {
        if v == top || !self.in_subtree(top, v) {
            return None;
        }
        self.ancestor_at_depth(v, self.depth[top] + 1)
    }

    /// All vertices of `T(v)` in preorder.
    pub fn subtree(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.size[v]);
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.nodes[x].children.iter().rev());
        }
        out
    }

    pub fn parents(&self) -> Vec<Option<NodeId>> {
        self.nodes.iter().map(|n| n.parent).collect()
    }

    /// Top-level blueprint, present for trees made by [`build_construction`].
    pub fn blueprint(&self) -> Option<&Blueprint> {
        self.blueprints.get(&0)
    }

    /// Blueprint of the construction rooted at `v`, if any.
    pub fn blueprint_at(&self, v: NodeId) -> Option<&Blueprint> {
        self.blueprints.get(&v)
    }

    pub fn blueprints(&self) -> &BTreeMap<NodeId, Blueprint> {
        &self.blueprints
    }
}

struct Builder {
    parents: Vec<Option<NodeId>>,
    blueprints: BTreeMap<NodeId, Blueprint>,
}

impl Builder {
    fn push(&mut self, parent: Option<NodeId>) -> NodeId {
        self.parents.push(parent);
        self.parents.len() - 1
    }

    fn construction(&mut self, parent: Option<NodeId>, role: Role, s: usize, k: usize, m: usize) -> NodeId {
        let bp = Blueprint::new(role, s, k, m).expect("parameters checked by caller");
        let root = self.push(parent);
        for recipe in &bp.child_roles {
            match *recipe {
                Recipe::Leaf => {
                    self.push(Some(root));
                }
                Recipe::Star(leaves) => {
                    let c = self.push(Some(root));
                    for _ in 0..leaves {
                        self.push(Some(c));
                    }
                }
                Recipe::Construction { role, s } => {
                    self.construction(Some(root), role, s, k, m);
                }
            }
        }
        self.blueprints.insert(root, bp);
        root
    }
}

/// Builds `T1^(s,k,m)` or `T2^(s,k,m)`.
///
/// Ids follow construction order: the root, then `u_1`'s whole subtree, then
/// `u_2`'s, and so on. Every node that roots a sub-construction carries its
/// [`Blueprint`].
pub fn build_construction(role: Role, s: usize, k: usize, m: usize) -> Result<Tree, TreeError> {
    check_params(s, k, m)?;
    // Inner levels are built with the same k and m; m >= s*k implies the
    // side condition for every smaller level.
    let mut b = Builder { parents: Vec::new(), blueprints: BTreeMap::new() };
    b.construction(None, role, s, k, m);
    let mut tree = Tree::from_parents(&b.parents)?;
    tree.blueprints = b.blueprints;
    Ok(tree)
}

/// Closed-form node count of a construction, used as an independent check.
pub fn construction_size(role: Role, s: usize, m: usize) -> usize {
    match (role, s) {
        (Role::T1, 1) => 1 + (m + 1) * (m + 1),
        (Role::T2, 1) => 1 + (m + 1) + m * m,
        (Role::T1, _) => 1 + (m + 1) * construction_size(Role::T2, s - 1, m),
        (Role::T2, _) => 1 + m * construction_size(Role::T2, s - 1, m) + construction_size(Role::T1, s - 1, m),
    }
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: NodeId,
    parent: Option<NodeId>,
}

#[derive(Serialize, Deserialize)]
struct BlueprintJson {
    role: Role,
    s: usize,
    k: usize,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    root: NodeId,
    nodes: Vec<NodeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blueprint: Option<BlueprintJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Dot,
}

impl Tree {
    pub fn to_json(&self) -> String {
        let doc = TreeJson {
            root: 0,
            nodes: self.nodes.iter().map(|n| NodeJson { id: n.id, parent: n.parent }).collect(),
            blueprint: self.blueprint().map(|b| BlueprintJson { role: b.role, s: b.s, k: b.k, m: b.m }),
        };
        serde_json::to_string(&doc).expect("tree json serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        let v: serde_json::Value = serde_json::from_str(&self.to_json()).expect("own output parses");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    /// Parses the JSON tree format. A `blueprint` entry is checked against a
    /// fresh construction with the same parameters.
    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let doc: TreeJson = serde_json::from_str(text).map_err(|e| TreeError::Parse(e.to_string()))?;
        if doc.root != 0 {
            return Err(TreeError::Structure(format!("root must be node 0, found {}", doc.root)));
        }
        let n = doc.nodes.len();
        let mut parents: Vec<Option<Option<NodeId>>> = vec![None; n];
        for node in &doc.nodes {
            if node.id >= n {
                return Err(TreeError::Structure(format!("node id {} is not dense in 0..{n}", node.id)));
            }
            if parents[node.id].is_some() {
                return Err(TreeError::Structure(format!("node id {} appears twice", node.id)));
            }
            parents[node.id] = Some(node.parent);
        }
        let parents: Vec<Option<NodeId>> = parents.into_iter().map(|p| p.flatten()).collect();
        let tree = Tree::from_parents(&parents)?;
        match doc.blueprint {
            None => Ok(tree),
            Some(bp) => {
                let built = build_construction(bp.role, bp.s, bp.k, bp.m)?;
                if built.parents() != tree.parents() {
                    return Err(TreeError::Structure(format!(
                        "nodes do not match the {}^({},{},{}) construction named by the blueprint",
                        bp.role, bp.s, bp.k, bp.m
                    )));
                }
                Ok(built)
            }
        }
    }

    /// Graphviz export, one `a -> b` line per edge.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n");
        out.push_str("  0 [shape=doublecircle, style=filled, fillcolor=lightgrey];\n");
        for n in &self.nodes {
            for &c in &n.children {
                out.push_str(&format!("  {} -> {};\n", n.id, c));
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn serialize(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => self.to_json().into_bytes(),
            Format::Dot => self.to_dot().into_bytes(),
        }
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, TreeError> {
        let text = std::str::from_utf8(bytes).map_err(|e| TreeError::Parse(e.to_string()))?;
        Tree::from_json(text)
    }
}
