use std::ops::RangeInclusive;

use super::{Atom, Formula, FreezeVar, Window};

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Atom(Atom),
    Not,
    And,
    Or,
    Always(Window),
    Eventually(Window),
    Until(Window),
    Freeze(FreezeVar),
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    /// Scope the node is evaluated in. A freeze node belongs to the scope
    /// enclosing it; its descendants belong to the scope it opens.
    pub scope: usize,
}

/// Nodes evaluated under one freeze variable (or, for scope 0, the nodes
/// above every freeze).
#[derive(Clone, Debug)]
pub struct Scope {
    pub var: Option<FreezeVar>,
    /// The freeze node opening this scope.
    pub parent: Option<usize>,
    /// The freeze node's child.
    pub root: usize,
    /// Member node indices, ascending.
    pub members: Vec<usize>,
    pub enclosing: Option<usize>,
    pub children: Vec<usize>,
    /// Freeze variables in force inside the scope, outermost first, each
    /// paired with the scope that binds it.
    pub bindings: Vec<(FreezeVar, usize)>,
}

impl Scope {
    pub fn depth(&self) -> usize {
        self.bindings.len()
    }

    /// Smallest and largest member index.
    pub fn span(&self) -> RangeInclusive<usize> {
        self.members[0]..=*self.members.last().unwrap()
    }

    /// Scope binding `v` as seen from inside this scope.
    pub fn binder_of(&self, v: FreezeVar) -> Option<usize> {
        self.bindings
            .iter()
            .rev()
            .find(|(w, _)| *w == v)
            .map(|&(_, s)| s)
    }
}

/// Syntax tree in pre-order (a parent precedes its children, left subtree
/// before right), partitioned into freeze scopes.
#[derive(Clone, Debug)]
pub struct SyntaxTree {
    pub nodes: Vec<TreeNode>,
    /// Scope 0 is the top scope; the others appear in pre-order of their
    /// freeze nodes, so an enclosing scope always precedes the scopes inside.
    pub scopes: Vec<Scope>,
}

impl SyntaxTree {
    pub fn build(f: &Formula) -> SyntaxTree {
        let mut t = SyntaxTree {
            nodes: Vec::with_capacity(f.size()),
            scopes: vec![Scope {
                var: None,
                parent: None,
                root: 0,
                members: Vec::new(),
                enclosing: None,
                children: Vec::new(),
                bindings: Vec::new(),
            }],
        };
        t.visit(f, None, 0);
        t
    }

    fn visit(&mut self, f: &Formula, parent: Option<usize>, scope: usize) -> usize {
        let id = self.nodes.len();
        let kind = match f {
            Formula::Atom(a) => NodeKind::Atom(a.clone()),
            Formula::Not(_) => NodeKind::Not,
            Formula::And(..) => NodeKind::And,
            Formula::Or(..) => NodeKind::Or,
            Formula::Always(w, _) => NodeKind::Always(*w),
            Formula::Eventually(w, _) => NodeKind::Eventually(*w),
            Formula::Until(w, ..) => NodeKind::Until(*w),
            Formula::Freeze(v, _) => NodeKind::Freeze(*v),
        };
        self.nodes.push(TreeNode {
            kind,
            children: Vec::new(),
            parent,
            scope,
        });
        self.scopes[scope].members.push(id);
        let child_scope = if let Formula::Freeze(v, _) = f {
            let s = self.scopes.len();
            let mut bindings = self.scopes[scope].bindings.clone();
            bindings.push((*v, s));
            self.scopes.push(Scope {
                var: Some(*v),
                parent: Some(id),
                root: id + 1,
                members: Vec::new(),
                enclosing: Some(scope),
                children: Vec::new(),
                bindings,
            });
            self.scopes[scope].children.push(s);
            s
        } else {
            scope
        };
        for c in f.children() {
            let cid = self.visit(c, Some(id), child_scope);
            self.nodes[id].children.push(cid);
        }
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn top(&self) -> &Scope {
        &self.scopes[0]
    }

    /// The first scope binding `v`.
    pub fn subtree(&self, v: FreezeVar) -> Option<&Scope> {
        self.scopes.iter().find(|s| s.var == Some(v))
    }

    /// Number of freeze variables.
    pub fn freeze_count(&self) -> usize {
        self.scopes.len() - 1
    }

    /// Greatest number of nested freeze variables on any path.
    pub fn freeze_depth(&self) -> usize {
        self.scopes.iter().map(Scope::depth).max().unwrap_or(0)
    }

    /// Nested freeze variables from outermost to innermost, when the scopes
    /// form a single chain.
    pub fn freeze_chain(&self) -> Option<Vec<FreezeVar>> {
        let mut out = Vec::new();
        let mut s = 0;
        loop {
            match self.scopes[s].children.as_slice() {
                [] => return Some(out),
                [c] => {
                    out.push(self.scopes[*c].var.unwrap());
                    s = *c;
                }
                _ => return None,
            }
        }
    }

    /// Reconstructs the subformula rooted at `id`.
    pub fn formula(&self, id: usize) -> Formula {
        let n = &self.nodes[id];
        let c = |k: usize| Box::new(self.formula(n.children[k]));
        match &n.kind {
            NodeKind::Atom(a) => Formula::Atom(a.clone()),
            NodeKind::Not => Formula::Not(c(0)),
            NodeKind::And => Formula::And(c(0), c(1)),
            NodeKind::Or => Formula::Or(c(0), c(1)),
            NodeKind::Always(w) => Formula::Always(*w, c(0)),
            NodeKind::Eventually(w) => Formula::Eventually(*w, c(0)),
            NodeKind::Until(w) => Formula::Until(*w, c(0), c(1)),
            NodeKind::Freeze(v) => Formula::Freeze(*v, c(0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    const RUNNING: &str = "let e1 = s2 >= 1; let e2 = s3 >= 1;
        F (e1 && freeze(s*1). F (e2 && freeze(s*2). G[2,inf] (s <= 0.4 * (s*1 + s*2))))";

    #[test]
    fn running_example_scopes() {
        let t = SyntaxTree::build(&parse(RUNNING).unwrap());
        assert_eq!(t.len(), 10);
        let s2 = t.subtree(FreezeVar::new(1, 2)).unwrap();
        assert_eq!(s2.members, vec![8, 9]);
        assert_eq!((s2.root, s2.parent), (8, Some(7)));
        let s1 = t.subtree(FreezeVar::new(1, 1)).unwrap();
        assert_eq!(s1.members, vec![4, 5, 6, 7]);
        assert_eq!((s1.root, s1.parent), (4, Some(3)));
        assert_eq!(t.top().members, vec![0, 1, 2, 3]);
        assert_eq!(
            t.freeze_chain().unwrap(),
            vec![FreezeVar::new(1, 1), FreezeVar::new(1, 2)]
        );
    }

    #[test]
    fn children_follow_parents() {
        let t = SyntaxTree::build(&parse(RUNNING).unwrap());
        for (i, n) in t.nodes.iter().enumerate() {
            assert!(n.children.iter().all(|&c| c > i));
        }
        let mut all: Vec<usize> = t.scopes.iter().flat_map(|s| s.members.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..t.len()).collect::<Vec<_>>());
    }

    #[test]
    fn no_freeze_single_scope() {
        let t = SyntaxTree::build(&parse("G[0,3] (s >= 0 || F s < 1)").unwrap());
        assert_eq!(t.scopes.len(), 1);
        assert_eq!(t.top().members.len(), t.len());
        assert_eq!(t.formula(0), parse("G[0,3] (s >= 0 || F s < 1)").unwrap());
    }
}
