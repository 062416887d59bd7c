use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TransformKind;
use crate::error::Result;
use crate::mdp::LiteralSpec;

/// A parameterized transform kind with optional restrictions on its bindings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSchema {
    pub kind: TransformKind,
    /// Restrict to these action schemas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<String>>,
    /// Restrict state-space reduction to these features.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<String>>,
    /// Restrict precondition transforms to these literal labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literals: Option<Vec<String>>,
    /// Literals precondition addition may introduce. Empty means every literal
    /// already used somewhere in the model.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<LiteralSpec>,
}

impl TransformSchema {
    pub fn new(kind: TransformKind) -> Self {
        TransformSchema { kind, actions: None, features: None, literals: None, candidates: Vec::new() }
    }

    pub fn for_actions<S: Into<String>>(mut self, actions: impl IntoIterator<Item = S>) -> Self {
        self.actions = Some(actions.into_iter().map(Into::into).collect());
        self
    }

    pub fn for_features<S: Into<String>>(mut self, features: impl IntoIterator<Item = S>) -> Self {
        self.features = Some(features.into_iter().map(Into::into).collect());
        self
    }

    pub fn for_literals<S: Into<String>>(mut self, literals: impl IntoIterator<Item = S>) -> Self {
        self.literals = Some(literals.into_iter().map(Into::into).collect());
        self
    }
}

/// Transform-catalog file: `{"schemas": [{"kind": "...", ...}, ...]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub schemas: Vec<TransformSchema>,
}

impl Catalog {
    pub fn new(schemas: Vec<TransformSchema>) -> Self {
        Catalog { schemas }
    }

    /// One unrestricted schema per kind.
    pub fn all_kinds() -> Self {
        Catalog::new(TransformKind::ALL.into_iter().map(TransformSchema::new).collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = Catalog::new(vec![
            TransformSchema::new(TransformKind::PreconditionRelaxation).for_actions(["move"]),
            TransformSchema::new(TransformKind::StateSpaceReduction).for_features(["fuel"]),
        ]);
        assert_eq!(Catalog::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_kind_is_rejected() {
        assert!(Catalog::from_json(r#"{"schemas":[{"kind":"teleport"}]}"#).is_err());
    }
}
