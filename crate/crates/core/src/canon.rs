//! AHU canonical forms and root-preserving isomorphisms between subtrees.

use std::collections::HashMap;

use crate::error::TreeError;
use crate::tree::{NodeId, Tree};

/// Canonical parenthesis string of `T(v)`. Two subtrees get equal codes iff
/// they are isomorphic by a map sending root to root.
pub fn canonical_code(tree: &Tree, v: NodeId) -> Result<String, TreeError> {
    tree.check_node(v)?;
    let order = tree.subtree(v);
    let mut codes: HashMap<NodeId, String> = HashMap::with_capacity(order.len());
    for &x in order.iter().rev() {
        let mut kids: Vec<String> =
            tree.children(x).iter().map(|c| codes.remove(c).expect("child coded first")).collect();
        kids.sort();
        let mut code = String::with_capacity(2 + kids.iter().map(String::len).sum::<usize>());
        code.push('(');
        for k in kids {
            code.push_str(&k);
        }
        code.push(')');
        codes.insert(x, code);
    }
    Ok(codes.remove(&v).expect("root coded"))
}

/// Integer isomorphism classes for every vertex of a family of trees, drawn
/// from one shared interner so classes compare across trees.
#[derive(Debug, Clone)]
pub struct IsoClasses {
    classes: Vec<Vec<u32>>,
}

impl IsoClasses {
    pub fn new(trees: &[&Tree]) -> Self {
        let mut interner: HashMap<Vec<u32>, u32> = HashMap::new();
        let classes = trees
            .iter()
            .map(|tree| {
                let mut class = vec![0u32; tree.len()];
                for &x in tree.subtree(tree.root()).iter().rev() {
                    let mut key: Vec<u32> = tree.children(x).iter().map(|&c| class[c]).collect();
                    key.sort_unstable();
                    let next = interner.len() as u32;
                    class[x] = *interner.entry(key).or_insert(next);
                }
                class
            })
            .collect();
        IsoClasses { classes }
    }

    /// Class of vertex `v` in the `tree`-th tree passed to [`IsoClasses::new`].
    pub fn class(&self, tree: usize, v: NodeId) -> u32 {
        self.classes[tree][v]
    }

    pub fn of_tree(&self, tree: usize) -> &[u32] {
        &self.classes[tree]
    }
}

/// A root-preserving isomorphism `T_a(source_root) -> T_b(target_root)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoMap {
    pub source_root: NodeId,
    pub target_root: NodeId,
    forward: HashMap<NodeId, NodeId>,
    backward: HashMap<NodeId, NodeId>,
}

impl IsoMap {
    pub fn apply(&self, v: NodeId) -> Option<NodeId> {
        self.forward.get(&v).copied()
    }

    pub fn apply_inverse(&self, w: NodeId) -> Option<NodeId> {
        self.backward.get(&w).copied()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.forward.iter().map(|(&a, &b)| (a, b))
    }

    pub fn inverse(&self) -> IsoMap {
        IsoMap {
            source_root: self.target_root,
            target_root: self.source_root,
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    /// Checks bijectivity, root preservation and that the parent relation is
    /// preserved in both directions over every vertex of both subtrees.
    pub fn verify(&self, source: &Tree, target: &Tree) -> bool {
        let src = source.subtree(self.source_root);
        let dst = target.subtree(self.target_root);
        if src.len() != dst.len() || self.forward.len() != src.len() || self.backward.len() != dst.len() {
            return false;
        }
        if self.apply(self.source_root) != Some(self.target_root) {
            return false;
        }
        for &v in &src {
            let Some(w) = self.apply(v) else { return false };
            if self.apply_inverse(w) != Some(v) || !target.in_subtree(self.target_root, w) {
                return false;
            }
            if v != self.source_root {
                let (Some(pv), Some(pw)) = (source.parent(v), target.parent(w)) else {
                    return false;
                };
                if self.apply(pv) != Some(pw) {
                    return false;
                }
            }
        }
        for &w in &dst {
            if w != self.target_root {
                let Some(v) = self.apply_inverse(w) else {
                    return false;
                };
                if v == self.source_root {
                    return false;
                }
            }
        }
        true
    }
}

/// Builds the deterministic isomorphism `T_a(a) -> T_b(b)`: children are
/// matched in order of (class, id), so the map from `b` to `a` is exactly the
/// inverse of the map from `a` to `b`.
pub fn construction_isomorphism(tree_a: &Tree, a: NodeId, tree_b: &Tree, b: NodeId) -> Result<IsoMap, TreeError> {
    tree_a.check_node(a)?;
    tree_b.check_node(b)?;
    let classes = IsoClasses::new(&[tree_a, tree_b]);
    isomorphism_with_classes(tree_a, a, tree_b, b, classes.of_tree(0), classes.of_tree(1))
}

/// Same as [`construction_isomorphism`] with precomputed class arrays that
/// must come from one shared [`IsoClasses`].
pub fn isomorphism_with_classes(
    tree_a: &Tree,
    a: NodeId,
    tree_b: &Tree,
    b: NodeId,
    class_a: &[u32],
    class_b: &[u32],
) -> Result<IsoMap, TreeError> {
    if class_a[a] != class_b[b] {
        return Err(TreeError::NotIsomorphic(a, b));
    }
    let mut forward = HashMap::with_capacity(tree_a.subtree_size(a));
    let mut backward = HashMap::with_capacity(tree_a.subtree_size(a));
    let mut stack = vec![(a, b)];
    while let Some((x, y)) = stack.pop() {
        forward.insert(x, y);
        backward.insert(y, x);
        let mut xs: Vec<NodeId> = tree_a.children(x).to_vec();
        let mut ys: Vec<NodeId> = tree_b.children(y).to_vec();
        xs.sort_by_key(|&c| (class_a[c], c));
        ys.sort_by_key(|&c| (class_b[c], c));
        for (cx, cy) in xs.into_iter().zip(ys) {
            debug_assert_eq!(class_a[cx], class_b[cy]);
            stack.push((cx, cy));
        }
    }
    Ok(IsoMap { source_root: a, target_root: b, forward, backward })
}
