//! JSON instance-file schema: contexts, arms, context distribution, reward
//! table, named representations, and optional construction metadata.
//!
//! Files are strict: unknown fields are rejected. Serialization uses
//! shortest-round-trip float formatting, so write -> read reproduces every
//! finite double bit-exactly and identical inputs produce identical bytes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constructions::{AnalyticClaim, ConstructedProblem};
use crate::error::{Error, Result};
use crate::model::{BanditInstance, Representation, RepresentationSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationFile {
    pub name: String,
    pub dim: usize,
    /// Indexed `[context][arm][coordinate]`.
    pub features: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analytic_claims: Vec<AnalyticClaim>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zero_feature_arms: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub contexts: usize,
    pub arms: usize,
    pub rho: Vec<f64>,
    /// Indexed `[context][arm]`.
    pub rewards: Vec<Vec<f64>>,
    pub representations: Vec<RepresentationFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl InstanceFile {
    pub fn from_parts(
        instance: &BanditInstance,
        reps: &RepresentationSet,
        metadata: Option<Metadata>,
    ) -> Self {
        let rewards = (0..instance.num_contexts)
            .map(|x| {
                (0..instance.num_arms)
                    .map(|a| instance.rewards[(x, a)])
                    .collect()
            })
            .collect();
        let representations = reps
            .reps
            .iter()
            .map(|rep| RepresentationFile {
                name: rep.name.clone(),
                dim: rep.dim,
                features: (0..instance.num_contexts)
                    .map(|x| {
                        (0..instance.num_arms)
                            .map(|a| {
                                (0..rep.dim)
                                    .map(|k| rep.features[(x * instance.num_arms + a, k)])
                                    .collect()
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            contexts: instance.num_contexts,
            arms: instance.num_arms,
            rho: instance.rho.iter().cloned().collect(),
            rewards,
            representations,
            metadata,
        }
    }

    pub fn from_problem(problem: &ConstructedProblem) -> Self {
        let metadata = Metadata {
            construction: Some(problem.provenance.clone()),
            analytic_claims: problem.analytic_claims.clone(),
            zero_feature_arms: Vec::new(),
        };
        Self::from_parts(&problem.instance, &problem.reps, Some(metadata))
    }

    /// Structural conversion into model types. Shape mismatches are schema
    /// errors; semantic validation is a separate step.
    pub fn to_model(&self) -> Result<(BanditInstance, RepresentationSet)> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.rho.len() != self.contexts {
            return Err(Error::Schema(format!(
                "rho has {} entries for {} contexts",
                self.rho.len(),
                self.contexts
            )));
        }
        if self.rewards.len() != self.contexts
            || self.rewards.iter().any(|row| row.len() != self.arms)
        {
            return Err(Error::Schema("rewards table shape mismatch".to_string()));
        }
        let rewards = DMatrix::from_fn(self.contexts, self.arms, |x, a| self.rewards[x][a]);
        let instance = BanditInstance::new(self.rho.clone(), rewards);
        let mut reps = Vec::with_capacity(self.representations.len());
        for rep in &self.representations {
            if rep.features.len() != self.contexts
                || rep
                    .features
                    .iter()
                    .any(|ctx| ctx.len() != self.arms || ctx.iter().any(|f| f.len() != rep.dim))
            {
                return Err(Error::Schema(format!(
                    "representation `{}` feature tensor shape mismatch",
                    rep.name
                )));
            }
            let features = DMatrix::from_fn(self.contexts * self.arms, rep.dim, |row, k| {
                rep.features[row / self.arms][row % self.arms][k]
            });
            reps.push(Representation::new(rep.name.clone(), features));
        }
        Ok((instance, RepresentationSet::new(reps)))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schema serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }
}
