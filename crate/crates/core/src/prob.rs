//! Exact finite probability tables and causal models that factorize into them.

use std::collections::HashSet;

use rand::Rng;

use crate::eprb::EprbRoles;
use crate::error::{Error, Result};
use crate::graph::{candidate_triples, CiStatement, Dag, Variable};

/// Tolerance for normalization checks on tables and rows.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Joint probability table over an ordered list of variables.
///
/// The table is row-major in declaration order: the last variable varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    variables: Vec<Variable>,
    table: Vec<f64>,
}

fn cardinalities(vars: &[Variable]) -> Vec<usize> {
    vars.iter().map(Variable::cardinality).collect()
}

/// Row-major strides for a list of cardinalities.
fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// Advances a mixed-radix counter; returns false after the last tuple.
fn increment(digits: &mut [usize], cards: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < cards[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

impl DiscreteDistribution {
    pub fn new(variables: Vec<Variable>, table: Vec<f64>) -> Result<Self> {
        let mut names = HashSet::new();
        for v in &variables {
            if v.domain.is_empty() {
                return Err(Error::InvalidDomain(v.name.clone(), "empty domain".into()));
            }
            if !names.insert(v.name.as_str()) {
                return Err(Error::DuplicateVertex(v.name.clone()));
            }
        }
        let expected: usize = cardinalities(&variables).iter().product();
        if table.len() != expected {
            return Err(Error::LengthMismatch(table.len(), expected));
        }
        if let Some(p) = table.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(DiscreteDistribution { variables, table })
    }

    pub fn uniform(variables: Vec<Variable>) -> Result<Self> {
        let n: usize = cardinalities(&variables).iter().product();
        DiscreteDistribution::new(variables, vec![1.0 / n as f64; n])
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    fn positions<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.position(n.as_ref())).collect()
    }

    /// Probability of a full outcome tuple given by labels in variable order.
    pub fn probability<S: AsRef<str>>(&self, outcome: &[S]) -> Result<f64> {
        if outcome.len() != self.variables.len() {
            return Err(Error::LengthMismatch(outcome.len(), self.variables.len()));
        }
        let st = strides(&cardinalities(&self.variables));
        let mut k = 0;
        for ((v, label), s) in self.variables.iter().zip(outcome).zip(st) {
            k += v.outcome_index(label.as_ref())? * s;
        }
        Ok(self.table[k])
    }

    /// Marginal table over `idx` in the listed order.
    fn project(&self, idx: &[usize]) -> Vec<f64> {
        let cards = cardinalities(&self.variables);
        let out_cards: Vec<usize> = idx.iter().map(|&i| cards[i]).collect();
        let out_strides = strides(&out_cards);
        let mut out = vec![0.0; out_cards.iter().product()];
        let mut digits = vec![0; cards.len()];
        for &p in &self.table {
            let k: usize = idx.iter().zip(&out_strides).map(|(&i, s)| digits[i] * s).sum();
            out[k] += p;
            increment(&mut digits, &cards);
        }
        out
    }

    /// Sums out every variable not in `keep`; kept variables stay in their original order.
    pub fn marginalize<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let mut idx = self.positions(keep)?;
        idx.sort_unstable();
        idx.dedup();
        Ok(DiscreteDistribution {
            variables: idx.iter().map(|&i| self.variables[i].clone()).collect(),
            table: self.project(&idx),
        })
    }

    /// Renormalized slice over the variables not named in `evidence`.
    pub fn condition<S: AsRef<str>>(&self, evidence: &[(S, S)]) -> Result<Self> {
        let mut fixed: Vec<Option<usize>> = vec![None; self.variables.len()];
        for (name, label) in evidence {
            let i = self.position(name.as_ref())?;
            fixed[i] = Some(self.variables[i].outcome_index(label.as_ref())?);
        }
        let keep: Vec<usize> = (0..self.variables.len()).filter(|&i| fixed[i].is_none()).collect();
        let cards = cardinalities(&self.variables);
        let mut out = Vec::with_capacity(self.table.len());
        let mut digits = vec![0; cards.len()];
        for &p in &self.table {
            if fixed.iter().zip(&digits).all(|(f, d)| f.is_none_or(|f| f == *d)) {
                out.push(p);
            }
            increment(&mut digits, &cards);
        }
        let mass: f64 = out.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        out.iter_mut().for_each(|p| *p /= mass);
        Ok(DiscreteDistribution {
            variables: keep.iter().map(|&i| self.variables[i].clone()).collect(),
            table: out,
        })
    }

    /// Distribution of `target` given `evidence`, as a probability vector over its domain.
    pub fn conditional_vector<S: AsRef<str>>(&self, target: &str, evidence: &[(S, S)]) -> Result<Vec<f64>> {
        Ok(self.condition(evidence)?.marginalize(&[target])?.table)
    }

    /// Exact check of `P(x,y|z) = P(x|z) P(y|z)` for every `z` with `P(z) > 0`.
    pub fn holds_ci(&self, stmt: &CiStatement, tol: f64) -> Result<bool> {
        stmt.validate()?;
        let (x, y, z) = (
            self.positions(&stmt.x)?,
            self.positions(&stmt.y)?,
            self.positions(&stmt.z)?,
        );
        Ok(self.holds_ci_idx(&x, &y, &z, tol))
    }

    fn holds_ci_idx(&self, x: &[usize], y: &[usize], z: &[usize], tol: f64) -> bool {
        let size = |idx: &[usize]| -> usize {
            idx.iter().map(|&i| self.variables[i].cardinality()).product()
        };
        let (nx, ny, nz) = (size(x), size(y), size(z));
        let all: Vec<usize> = x.iter().chain(y).chain(z).copied().collect();
        let joint = self.project(&all);
        let at = |a: usize, b: usize, c: usize| joint[(a * ny + b) * nz + c];

        for c in 0..nz {
            let pz: f64 = (0..nx).flat_map(|a| (0..ny).map(move |b| (a, b))).map(|(a, b)| at(a, b, c)).sum();
            if pz <= 0.0 {
                continue;
            }
            let px: Vec<f64> = (0..nx).map(|a| (0..ny).map(|b| at(a, b, c)).sum::<f64>() / pz).collect();
            let py: Vec<f64> = (0..ny).map(|b| (0..nx).map(|a| at(a, b, c)).sum::<f64>() / pz).collect();
            for (a, pxa) in px.iter().enumerate() {
                for (b, pyb) in py.iter().enumerate() {
                    if (at(a, b, c) / pz - pxa * pyb).abs() > tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Singleton statements with `|Z| <= max_conditioning_size` that hold within `tol`.
    pub fn independences(&self, max_conditioning_size: usize, tol: f64) -> Vec<CiStatement> {
        candidate_triples(self.variables.len(), max_conditioning_size)
            .filter(|(i, j, z)| self.holds_ci_idx(&[*i], &[*j], z, tol))
            .map(|(i, j, z)| CiStatement::from_indices(&self.variables, i, j, &z))
            .collect()
    }
}

/// Half the L1 distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Conditional probability table `P(child | parents)`.
///
/// `rows` are indexed by the parent outcome tuple in mixed radix over the
/// parents' domains, in the order of `parents` (last parent fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Cpd {
    pub child: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Cpd {
    pub fn new<S: AsRef<str>>(child: impl Into<String>, parents: &[S], rows: Vec<Vec<f64>>) -> Self {
        Cpd {
            child: child.into(),
            parents: parents.iter().map(|p| p.as_ref().to_string()).collect(),
            rows,
        }
    }

    /// Root distribution with no parents.
    pub fn root(child: impl Into<String>, probs: Vec<f64>) -> Self {
        Cpd::new::<&str>(child, &[], vec![probs])
    }

    /// A row is deterministic when it puts all mass on one outcome.
    pub fn is_deterministic_row(row: &[f64]) -> bool {
        row.iter().any(|&p| (p - 1.0).abs() <= NORMALIZATION_TOL)
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidCpd {
            child: self.child.clone(),
            reason: reason.into(),
        }
    }
}

/// Causal structure plus one conditional table per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalModel {
    dag: Dag,
    /// One per vertex, in vertex order.
    cpds: Vec<Cpd>,
    /// For each vertex, its Cpd's parents as vertex indices (Cpd order).
    parent_map: Vec<Vec<usize>>,
    roles: Option<EprbRoles>,
}

impl CausalModel {
    pub fn new(dag: Dag, cpds: Vec<Cpd>) -> Result<Self> {
        let mut slots: Vec<Option<Cpd>> = vec![None; dag.len()];
        for cpd in cpds {
            let v = dag.index_of(&cpd.child)?;
            if slots[v].is_some() {
                return Err(cpd.invalid("more than one table for this vertex"));
            }
            slots[v] = Some(cpd);
        }
        let mut ordered = Vec::with_capacity(dag.len());
        let mut parent_map = Vec::with_capacity(dag.len());
        for (v, slot) in slots.into_iter().enumerate() {
            let cpd = slot.ok_or_else(|| Error::InvalidCpd {
                child: dag.name(v).to_string(),
                reason: "missing table".into(),
            })?;
            let idx = cpd
                .parents
                .iter()
                .map(|p| dag.index_of(p))
                .collect::<Result<Vec<_>>>()?;
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted != dag.parent_indices(v) || sorted.len() != idx.len() {
                return Err(cpd.invalid("parent list does not match the graph"));
            }
            let n_rows: usize = idx.iter().map(|&p| dag.variables()[p].cardinality()).product();
            if cpd.rows.len() != n_rows {
                return Err(cpd.invalid(format!("expected {n_rows} rows, found {}", cpd.rows.len())));
            }
            let card = dag.variables()[v].cardinality();
            for row in &cpd.rows {
                if row.len() != card {
                    return Err(cpd.invalid(format!("row of length {} over domain of size {card}", row.len())));
                }
                if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(cpd.invalid("negative or non-finite entry"));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(cpd.invalid(format!("row sums to {s}")));
                }
            }
            ordered.push(cpd);
            parent_map.push(idx);
        }
        Ok(CausalModel {
            dag,
            cpds: ordered,
            parent_map,
            roles: None,
        })
    }

    /// Attaches EPRB role designations after checking they name suitable vertices.
    pub fn with_roles(mut self, roles: EprbRoles) -> Result<Self> {
        roles.validate(&self.dag)?;
        self.roles = Some(roles);
        Ok(self)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpds(&self) -> &[Cpd] {
        &self.cpds
    }

    pub fn roles(&self) -> Option<&EprbRoles> {
        self.roles.as_ref()
    }

    pub fn cpd(&self, name: &str) -> Result<&Cpd> {
        Ok(&self.cpds[self.dag.index_of(name)?])
    }

    /// Copy of the model with the rows of one table replaced (re-validated).
    pub fn with_rows(&self, child: &str, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut cpds = self.cpds.clone();
        cpds[self.dag.index_of(child)?].rows = rows;
        let mut m = CausalModel::new(self.dag.clone(), cpds)?;
        m.roles = self.roles.clone();
        Ok(m)
    }

    /// Joint distribution as the product of every vertex's conditional table.
    pub fn factorize(&self) -> DiscreteDistribution {
        let vars = self.dag.variables();
        let cards = cardinalities(vars);
        let total: usize = cards.iter().product();
        let mut table = Vec::with_capacity(total);
        let mut digits = vec![0; cards.len()];
        for _ in 0..total {
            let mut p = 1.0;
            for (v, cpd) in self.cpds.iter().enumerate() {
                let row = self.parent_map[v]
                    .iter()
                    .fold(0, |acc, &q| acc * cards[q] + digits[q]);
                p *= cpd.rows[row][digits[v]];
                if p == 0.0 {
                    break;
                }
            }
            table.push(p);
            increment(&mut digits, &cards);
        }
        DiscreteDistribution {
            variables: vars.to_vec(),
            table,
        }
    }
}

/// Random probability vector, uniform on the simplex.
///
/// With `margin = Some(m)` a vector with any entry within `m` of 0 or 1 is
/// redrawn (single-outcome domains are returned as `[1.0]`).
pub fn random_row<R: Rng + ?Sized>(rng: &mut R, len: usize, margin: Option<f64>) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    loop {
        let draws: Vec<f64> = (0..len).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = draws.iter().sum();
        let row: Vec<f64> = draws.iter().map(|d| d / s).collect();
        match margin {
            Some(m) if row.iter().any(|&p| p < m || p > 1.0 - m) => continue,
            _ => return row,
        }
    }
}

/// Causal model on `dag` with every row drawn by [`random_row`].
pub fn random_model<R: Rng + ?Sized>(dag: &Dag, rng: &mut R, margin: Option<f64>) -> CausalModel {
    let vars = dag.variables();
    let cpds = (0..dag.len())
        .map(|v| {
            let parents = dag.parent_indices(v);
            let n_rows: usize = parents.iter().map(|&p| vars[p].cardinality()).product();
            let rows = (0..n_rows)
                .map(|_| random_row(rng, vars[v].cardinality(), margin))
                .collect();
            Cpd::new(
                vars[v].name.clone(),
                &parents.iter().map(|&p| dag.name(p)).collect::<Vec<_>>(),
                rows,
            )
        })
        .collect();
    CausalModel::new(dag.clone(), cpds).expect("random rows are valid by construction")
}
