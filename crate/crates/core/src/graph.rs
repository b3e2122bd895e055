//! Directed acyclic graphs over named discrete variables.
//!
//! A [`Dag`] carries the causal structure: vertices in declaration order, the
//! directed edges between them, and the finite outcome domain of each vertex.
//! All enumeration in this module follows declaration order so that results
//! are reproducible.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named variable with an ordered list of outcome labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<String>,
}

impl Variable {
    pub fn new<S: AsRef<str>>(name: impl Into<String>, domain: &[S]) -> Self {
        Variable {
            name: name.into(),
            domain: domain.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    /// Binary variable with outcomes `+` and `-`.
    pub fn binary(name: impl Into<String>) -> Self {
        Variable::new(name, &["+", "-"])
    }

    pub fn cardinality(&self) -> usize {
        self.domain.len()
    }

    pub fn outcome_index(&self, label: &str) -> Result<usize> {
        self.domain
            .iter()
            .position(|d| d == label)
            .ok_or_else(|| Error::UnknownOutcome {
                variable: self.name.clone(),
                outcome: label.to_string(),
            })
    }
}

/// Causal structure: vertices, directed edges and per-vertex outcome domains.
///
/// Immutable after construction; acyclicity is checked in [`Dag::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Dag {
    pub fn new<S: AsRef<str>>(variables: Vec<Variable>, edges: &[(S, S)]) -> Result<Self> {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if v.domain.is_empty() {
                return Err(Error::InvalidDomain(v.name.clone(), "empty domain".into()));
            }
            if v.domain.iter().collect::<HashSet<_>>().len() != v.domain.len() {
                return Err(Error::InvalidDomain(v.name.clone(), "repeated outcome label".into()));
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(v.name.clone()));
            }
        }

        let n = variables.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        let mut edge_list = Vec::with_capacity(edges.len());
        for (from, to) in edges {
            let (from, to) = (from.as_ref(), to.as_ref());
            let p = *index.get(from).ok_or_else(|| Error::UnknownVertex(from.to_string()))?;
            let c = *index.get(to).ok_or_else(|| Error::UnknownVertex(to.to_string()))?;
            if p == c {
                return Err(Error::SelfLoop(from.to_string()));
            }
            if !seen.insert((p, c)) {
                return Err(Error::DuplicateEdge(from.to_string(), to.to_string()));
            }
            edge_list.push((p, c));
            parents[c].push(p);
            children[p].push(c);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }

        // Kahn's algorithm; leftover vertices lie on or downstream of a cycle.
        let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            topo.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if topo.len() != n {
            let stuck = (0..n).find(|&v| indegree[v] > 0).unwrap();
            return Err(Error::Cycle(variables[stuck].name.clone()));
        }

        Ok(Dag {
            variables,
            index,
            edges: edge_list,
            parents,
            children,
            topo,
        })
    }

    /// Graph over binary `+`/`-` variables; handy for structure-only work.
    pub fn binary(names: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        Dag::new(names.iter().map(|n| Variable::binary(*n)).collect(), edges)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.variables.iter().map(|v| v.name.as_str())
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.index_of(name)?])
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.variables[idx].name
    }

    /// Edges in declaration order as (parent, child) names.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges.iter().map(|&(p, c)| (self.name(p), self.name(c)))
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&p), Some(&c)) => self.children[p].contains(&c),
            _ => false,
        }
    }

    /// Vertex indices in a topological order.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub(crate) fn parent_indices(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn parents(&self, v: &str) -> Result<Vec<&str>> {
        let i = self.index_of(v)?;
        Ok(self.parents[i].iter().map(|&p| self.name(p)).collect())
    }

    pub fn children(&self, v: &str) -> Result<Vec<&str>> {
        let i = self.index_of(v)?;
        Ok(self.children[i].iter().map(|&c| self.name(c)).collect())
    }

    pub fn is_exogenous(&self, v: &str) -> Result<bool> {
        Ok(self.parents[self.index_of(v)?].is_empty())
    }

    /// Strict descendants of `v`, in vertex order.
    pub fn descendants(&self, v: &str) -> Result<Vec<&str>> {
        let i = self.index_of(v)?;
        Ok(self.names_of(&self.reach(&[i], &self.children)))
    }

    /// Strict ancestors of `v`, in vertex order.
    pub fn ancestors(&self, v: &str) -> Result<Vec<&str>> {
        let i = self.index_of(v)?;
        Ok(self.names_of(&self.reach(&[i], &self.parents)))
    }

    fn names_of(&self, mask: &[bool]) -> Vec<&str> {
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.name(i))
            .collect()
    }

    /// Vertices reachable from `seeds` along `adj`, excluding the seeds unless
    /// they are reachable from another seed.
    fn reach(&self, seeds: &[usize], adj: &[Vec<usize>]) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        let mut stack: Vec<usize> = seeds.iter().flat_map(|&s| adj[s].iter().copied()).collect();
        while let Some(v) = stack.pop() {
            if !mask[v] {
                mask[v] = true;
                stack.extend(adj[v].iter().copied());
            }
        }
        mask
    }

    fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }

    /// True iff every path between `x` and `y` is blocked by `z`.
    ///
    /// A chain or fork is blocked when its middle vertex is in `z`; a collider
    /// is blocked when neither it nor any of its descendants is in `z`.
    pub fn d_separated<S: AsRef<str>>(&self, x: &[S], y: &[S], z: &[S]) -> Result<bool> {
        let (x, y, z) = (self.resolve(x)?, self.resolve(y)?, self.resolve(z)?);
        for (a, b) in [(&x, &y), (&x, &z), (&y, &z)] {
            if let Some(&v) = a.iter().find(|v| b.contains(v)) {
                return Err(Error::Overlap(self.name(v).to_string()));
            }
        }
        Ok(self.d_separated_idx(&x, &y, &z))
    }

    pub(crate) fn d_separated_idx(&self, x: &[usize], y: &[usize], z: &[usize]) -> bool {
        let n = self.len();
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        // Vertices that are in z or have a descendant in z.
        let mut activates = in_z.clone();
        for &v in z {
            for (a, &m) in self.reach(&[v], &self.parents).iter().enumerate() {
                activates[a] |= m;
            }
        }

        // Reachability over (vertex, arrived-from-child) states.
        let mut visited = vec![[false; 2]; n];
        let mut queue: VecDeque<(usize, bool)> = x.iter().map(|&v| (v, true)).collect();
        let mut is_target = vec![false; n];
        for &v in y {
            is_target[v] = true;
        }
        while let Some((v, from_child)) = queue.pop_front() {
            let slot = usize::from(from_child);
            if visited[v][slot] {
                continue;
            }
            visited[v][slot] = true;
            if !in_z[v] && is_target[v] {
                return false;
            }
            if from_child {
                if !in_z[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, true)));
                    queue.extend(self.children[v].iter().map(|&c| (c, false)));
                }
            } else {
                if !in_z[v] {
                    queue.extend(self.children[v].iter().map(|&c| (c, false)));
                }
                if activates[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, true)));
                }
            }
        }
        true
    }

    /// Full-closure conditioning bound used by library callers: |V| - 2.
    pub fn default_max_conditioning(&self) -> usize {
        self.len().saturating_sub(2)
    }

    /// Every singleton statement `(X ⊥ Y | Z)` with `|Z| <= max_conditioning_size`
    /// that d-separation certifies, in declaration order.
    pub fn implied_independences(&self, max_conditioning_size: usize) -> Vec<CiStatement> {
        candidate_triples(self.len(), max_conditioning_size)
            .filter(|(i, j, z)| self.d_separated_idx(&[*i], &[*j], z))
            .map(|(i, j, z)| CiStatement::from_indices(&self.variables, i, j, &z))
            .collect()
    }
}

/// Candidate singleton triples `(i, j, z)` with `i < j` and `z` drawn from the
/// remaining vertices, ordered by pair, then by `|z|`, then lexicographically.
pub(crate) fn candidate_triples(
    n: usize,
    max_conditioning_size: usize,
) -> impl Iterator<Item = (usize, usize, Vec<usize>)> {
    (0..n).tuple_combinations().flat_map(move |(i, j)| {
        let rest: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
        let top = max_conditioning_size.min(rest.len());
        (0..=top).flat_map(move |k| {
            rest.clone()
                .into_iter()
                .combinations(k)
                .map(move |z| (i, j, z))
        })
    })
}

/// Conditional independence statement `(X ⊥ Y | Z)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CiStatement {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<String>,
}

impl CiStatement {
    pub fn new<S: AsRef<str>>(x: &[S], y: &[S], z: &[S]) -> Result<Self> {
        let own = |s: &[S]| s.iter().map(|v| v.as_ref().to_string()).collect::<Vec<_>>();
        let stmt = CiStatement {
            x: own(x),
            y: own(y),
            z: own(z),
        };
        stmt.validate()?;
        Ok(stmt)
    }

    /// Shorthand for the common singleton case.
    pub fn single(x: &str, y: &str, z: &[&str]) -> Result<Self> {
        CiStatement::new(&[x], &[y], z)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.is_empty() || self.y.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut seen = HashSet::new();
        for v in self.x.iter().chain(&self.y).chain(&self.z) {
            if !seen.insert(v.as_str()) {
                return Err(Error::Overlap(v.clone()));
            }
        }
        Ok(())
    }

    pub(crate) fn from_indices(vars: &[Variable], i: usize, j: usize, z: &[usize]) -> Self {
        CiStatement {
            x: vec![vars[i].name.clone()],
            y: vec![vars[j].name.clone()],
            z: z.iter().map(|&k| vars[k].name.clone()).collect(),
        }
    }

    /// Same statement up to swapping the two sides and reordering each set.
    pub fn matches(&self, other: &CiStatement) -> bool {
        fn set(v: &[String]) -> HashSet<&str> {
            v.iter().map(String::as_str).collect()
        }
        let (x, y, z) = (set(&self.x), set(&self.y), set(&self.z));
        let (ox, oy, oz) = (set(&other.x), set(&other.y), set(&other.z));
        z == oz && ((x == ox && y == oy) || (x == oy && y == ox))
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.x.iter().chain(&self.y).chain(&self.z).any(|v| v == name)
    }
}

impl fmt::Display for CiStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} ⊥ {}", self.x.join(","), self.y.join(","))?;
        if !self.z.is_empty() {
            write!(f, " | {}", self.z.join(","))?;
        }
        write!(f, ")")
    }
}

/// True when `list` holds a statement matching `stmt` in the symmetric sense.
pub fn contains_statement(list: &[CiStatement], stmt: &CiStatement) -> bool {
    list.iter().any(|s| s.matches(stmt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Dag {
        Dag::binary(
            &["P", "α", "β", "λ", "A", "B"],
            &[("P", "λ"), ("α", "A"), ("λ", "A"), ("β", "B"), ("λ", "B")],
        )
        .unwrap()
    }

    fn fig2() -> Dag {
        Dag::binary(
            &["P", "α", "β", "λ", "A", "B"],
            &[("P", "λ"), ("α", "λ"), ("β", "λ"), ("λ", "A"), ("λ", "B")],
        )
        .unwrap()
    }

    #[test]
    fn common_cause_parents() {
        assert_eq!(fig1().parents("A").unwrap(), vec!["α", "λ"]);
    }

    #[test]
    fn edgeless_graph_is_all_exogenous() {
        let g = Dag::binary(&["α", "β"], &[]).unwrap();
        assert!(g.is_exogenous("α").unwrap());
        assert!(g.is_exogenous("β").unwrap());
    }

    #[test]
    fn two_cycle_rejected() {
        let err = Dag::binary(&["A", "B"], &[("A", "B"), ("B", "A")]).unwrap_err();
        assert!(matches!(err, Error::Cycle(_)));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Dag::binary(&["A"], &[("A", "Q")]).unwrap_err(),
            Error::UnknownVertex("Q".into())
        );
        assert_eq!(Dag::binary(&["A"], &[("A", "A")]).unwrap_err(), Error::SelfLoop("A".into()));
        assert!(matches!(
            Dag::binary(&["A", "B"], &[("A", "B"), ("A", "B")]).unwrap_err(),
            Error::DuplicateEdge(..)
        ));
        assert!(matches!(
            Dag::binary(&["A", "A"], &[]).unwrap_err(),
            Error::DuplicateVertex(_)
        ));
        let empty = Variable::new::<&str>("E", &[]);
        assert!(matches!(
            Dag::new::<&str>(vec![empty], &[]).unwrap_err(),
            Error::InvalidDomain(..)
        ));
    }

    #[test]
    fn reachability_queries() {
        let g2 = fig2();
        assert_eq!(g2.parents("λ").unwrap(), vec!["P", "α", "β"]);
        let g1 = fig1();
        assert_eq!(g1.descendants("P").unwrap(), vec!["λ", "A", "B"]);
        assert_eq!(g1.ancestors("A").unwrap(), vec!["P", "α", "λ"]);
        assert!(g1.descendants("A").unwrap().is_empty());
        assert_eq!(g1.parents("nope").unwrap_err(), Error::UnknownVertex("nope".into()));
    }

    #[test]
    fn local_causality_in_common_cause_graph() {
        let g = fig1();
        assert!(g.d_separated(&["A"], &["β", "B"], &["α", "λ"]).unwrap());
        assert!(g.d_separated(&["B"], &["α", "A"], &["β", "λ"]).unwrap());
        assert!(g.d_separated::<&str>(&["α"], &["β"], &[]).unwrap());
        assert!(!g.d_separated::<&str>(&["A"], &["B"], &[]).unwrap());
    }

    #[test]
    fn retrocausal_graph_connects_outcome_to_remote_setting() {
        let g = fig2();
        assert!(!g.d_separated(&["A"], &["β"], &["α"]).unwrap());
        assert!(g.d_separated::<&str>(&["α"], &["β"], &[]).unwrap());
        // Conditioning on a descendant of the collider λ opens α - β.
        assert!(!g.d_separated(&["α"], &["β"], &["A"]).unwrap());
    }

    #[test]
    fn overlapping_sets_rejected() {
        let g = fig1();
        assert_eq!(
            g.d_separated(&["A"], &["A"], &["λ"]).unwrap_err(),
            Error::Overlap("A".into())
        );
        assert!(matches!(
            g.d_separated(&["A"], &["B"], &["X"]).unwrap_err(),
            Error::UnknownVertex(_)
        ));
    }

    #[test]
    fn implied_independences_examples() {
        let g1 = fig1();
        let implied = g1.implied_independences(2);
        assert!(contains_statement(
            &implied,
            &CiStatement::single("A", "β", &["α", "λ"]).unwrap()
        ));

        let edgeless = Dag::binary(&["α", "β"], &[]).unwrap();
        assert_eq!(
            edgeless.implied_independences(0),
            vec![CiStatement::single("α", "β", &[]).unwrap()]
        );

        let g2 = fig2();
        assert!(!contains_statement(
            &g2.implied_independences(1),
            &CiStatement::single("A", "β", &["α"]).unwrap()
        ));
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let got: Vec<_> = candidate_triples(4, 2).collect();
        assert_eq!(got[0], (0, 1, vec![]));
        assert_eq!(got[1], (0, 1, vec![2]));
        assert_eq!(got[2], (0, 1, vec![3]));
        assert_eq!(got[3], (0, 1, vec![2, 3]));
        assert_eq!(got[4], (0, 2, vec![]));
        assert_eq!(got.len(), 6 * 4);
    }

    #[test]
    fn statement_validation_and_matching() {
        assert_eq!(CiStatement::new::<&str>(&[], &["B"], &[]).unwrap_err(), Error::EmptySet);
        assert_eq!(
            CiStatement::single("A", "B", &["A"]).unwrap_err(),
            Error::Overlap("A".into())
        );
        let s = CiStatement::single("A", "β", &["α"]).unwrap();
        let t = CiStatement::single("β", "A", &["α"]).unwrap();
        assert!(s.matches(&t));
        assert!(!s.matches(&CiStatement::single("A", "β", &[]).unwrap()));
        assert_eq!(s.to_string(), "(A ⊥ β | α)");
    }
}
