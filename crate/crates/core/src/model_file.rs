//! JSON model files.
//!
//! ```json
//! {
//!   "graph": {
//!     "vertices": ["X", "Y"],
//!     "edges": [["X", "Y"]],
//!     "domains": {"X": ["+", "-"], "Y": ["+", "-"]}
//!   },
//!   "cpds": {
//!     "X": {"parents": [], "rows": [{"given": [], "probs": [0.5, 0.5]}]},
//!     "Y": {"parents": ["X"], "rows": [
//!       {"given": ["+"], "probs": [0.9, 0.1]},
//!       {"given": ["-"], "probs": [0.2, 0.8]}
//!     ]}
//!   },
//!   "eprb": {
//!     "roles": {"alpha": "α", "beta": "β", "A": "A", "B": "B", "lambda": "λ", "P": "P"},
//!     "geometry": {"alpha": [0.0, 1.5707963267948966], "beta": [0.7853981633974483, 2.356194490192345], "eta": 0.7853981633974483}
//!   }
//! }
//! ```
//!
//! `eprb` is optional; `geometry` inside it is informational and optional.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::eprb::{
    common_cause_model, fragile_signalling_model, retrocausal_model, CommonCauseParams, EprbGeometry, EprbRoles,
    SettingPriors,
};
use crate::error::{Error, Result};
use crate::graph::{Dag, Variable};
use crate::prob::{CausalModel, Cpd};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub domains: IndexMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub given: Vec<String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpdSpec {
    pub parents: Vec<String>,
    pub rows: Vec<RowSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprbSpec {
    pub roles: EprbRoles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<EprbGeometry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub graph: GraphSpec,
    pub cpds: IndexMap<String, CpdSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eprb: Option<EprbSpec>,
}

fn file_err(msg: impl Into<String>) -> Error {
    Error::ModelFile(msg.into())
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| file_err(e.to_string()))
    }

    /// Pretty JSON, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files always serialize");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| file_err(format!("{}: {e}", path.display())))?;
        ModelFile::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| file_err(format!("{}: {e}", path.display())))
    }

    pub fn to_dag(&self) -> Result<Dag> {
        if let Some(extra) = self.graph.domains.keys().find(|k| !self.graph.vertices.contains(k)) {
            return Err(Error::UnknownVertex(extra.clone()));
        }
        let variables = self
            .graph
            .vertices
            .iter()
            .map(|v| {
                let domain = self
                    .graph
                    .domains
                    .get(v)
                    .ok_or_else(|| Error::InvalidDomain(v.clone(), "no domain declared".into()))?;
                Ok(Variable::new(v.clone(), domain))
            })
            .collect::<Result<Vec<_>>>()?;
        Dag::new(variables, &self.graph.edges)
    }

    /// Validated causal model, with EPRB roles attached when present.
    pub fn to_model(&self) -> Result<CausalModel> {
        let dag = self.to_dag()?;
        if let Some(extra) = self.cpds.keys().find(|k| dag.index_of(k).is_err()) {
            return Err(Error::UnknownVertex(extra.clone()));
        }
        let mut cpds = Vec::with_capacity(dag.len());
        for var in dag.variables() {
            let spec = self.cpds.get(&var.name).ok_or_else(|| Error::InvalidCpd {
                child: var.name.clone(),
                reason: "missing table".into(),
            })?;
            cpds.push(spec.to_cpd(&var.name, &dag)?);
        }
        let model = CausalModel::new(dag, cpds)?;
        match &self.eprb {
            Some(e) => {
                if let Some(g) = &e.geometry {
                    g.validate()?;
                }
                model.with_roles(e.roles.clone())
            }
            None => Ok(model),
        }
    }

    pub fn from_model(model: &CausalModel, geometry: Option<EprbGeometry>) -> Self {
        let dag = model.dag();
        let graph = GraphSpec {
            vertices: dag.names().map(str::to_string).collect(),
            edges: dag.edges().map(|(p, c)| (p.to_string(), c.to_string())).collect(),
            domains: dag
                .variables()
                .iter()
                .map(|v| (v.name.clone(), v.domain.clone()))
                .collect(),
        };
        let cpds = model
            .cpds()
            .iter()
            .map(|cpd| {
                let domains: Vec<&Vec<String>> = cpd
                    .parents
                    .iter()
                    .map(|p| &dag.variable(p).expect("validated parent").domain)
                    .collect();
                let givens: Vec<Vec<String>> = if domains.is_empty() {
                    vec![vec![]]
                } else {
                    domains
                        .iter()
                        .map(|d| d.iter().cloned())
                        .multi_cartesian_product()
                        .collect()
                };
                let rows = givens
                    .into_iter()
                    .zip(&cpd.rows)
                    .map(|(given, probs)| RowSpec {
                        given,
                        probs: probs.clone(),
                    })
                    .collect();
                (
                    cpd.child.clone(),
                    CpdSpec {
                        parents: cpd.parents.clone(),
                        rows,
                    },
                )
            })
            .collect();
        ModelFile {
            graph,
            cpds,
            eprb: model.roles().map(|roles| EprbSpec {
                roles: roles.clone(),
                geometry,
            }),
        }
    }
}

impl CpdSpec {
    fn to_cpd(&self, child: &str, dag: &Dag) -> Result<Cpd> {
        let bad = |reason: String| Error::InvalidCpd {
            child: child.to_string(),
            reason,
        };
        let parents = self
            .parents
            .iter()
            .map(|p| dag.variable(p))
            .collect::<Result<Vec<_>>>()?;
        let n_rows: usize = parents.iter().map(|p| p.cardinality()).product();
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; n_rows];
        for row in &self.rows {
            if row.given.len() != parents.len() {
                return Err(bad(format!(
                    "row keyed by {} labels, table has {} parents",
                    row.given.len(),
                    parents.len()
                )));
            }
            let mut k = 0;
            for (p, label) in parents.iter().zip(&row.given) {
                k = k * p.cardinality() + p.outcome_index(label)?;
            }
            if rows[k].replace(row.probs.clone()).is_some() {
                return Err(bad(format!("duplicate row for [{}]", row.given.join(", "))));
            }
        }
        let rows = rows
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad("not every parent configuration has a row".into()))?;
        Ok(Cpd::new(child, &self.parents, rows))
    }
}

/// Names of the example models shipped with the crate.
pub const BUNDLED: [&str; 5] = [
    "fig1-common-cause",
    "fig2-retrocausal",
    "bertlmann-socks",
    "fragile-signalling",
    "faithful-chain",
];

/// Builds one of the [`BUNDLED`] example models.
pub fn bundled(name: &str) -> Result<ModelFile> {
    let standard = EprbGeometry::standard();
    match name {
        "fig1-common-cause" => {
            let params = CommonCauseParams {
                lambda: vec![0.5, 0.5],
                a_plus: [vec![0.9, 0.2], vec![0.3, 0.7]],
                b_plus: [vec![0.15, 0.8], vec![0.6, 0.35]],
                priors: SettingPriors::default(),
            };
            Ok(ModelFile::from_model(&common_cause_model(2, &params)?, None))
        }
        "fig2-retrocausal" => Ok(ModelFile::from_model(
            &retrocausal_model(&standard, SettingPriors::default())?,
            Some(standard),
        )),
        "bertlmann-socks" => Ok(ModelFile::from_model(
            &common_cause_model(2, &CommonCauseParams::bertlmann_socks())?,
            None,
        )),
        "fragile-signalling" => Ok(ModelFile::from_model(&fragile_signalling_model()?, Some(standard))),
        "faithful-chain" => {
            let dag = Dag::binary(&["X", "Y", "Z"], &[("X", "Y"), ("Y", "Z")])?;
            let model = CausalModel::new(
                dag,
                vec![
                    Cpd::root("X", vec![0.3, 0.7]),
                    Cpd::new("Y", &["X"], vec![vec![0.8, 0.2], vec![0.25, 0.75]]),
                    Cpd::new("Z", &["Y"], vec![vec![0.6, 0.4], vec![0.1, 0.9]]),
                ],
            )?;
            Ok(ModelFile::from_model(&model, None))
        }
        other => Err(file_err(format!(
            "no bundled model `{other}` (available: {})",
            BUNDLED.join(", ")
        ))),
    }
}
