use std::collections::{BTreeMap, BTreeSet};

use crate::mdp::{FactoredMdp, State, HIDDEN};

/// State mapping φ, restricted to feature projection: the listed variables are
/// replaced by [`HIDDEN`]. The empty projection is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct StateMapping {
    hidden: BTreeSet<usize>,
}

impl StateMapping {
    pub fn identity() -> Self {
        StateMapping::default()
    }

    pub fn projection(hidden: BTreeSet<usize>) -> Self {
        StateMapping { hidden }
    }

    pub fn is_identity(&self) -> bool {
        self.hidden.is_empty()
    }

    pub fn hidden(&self) -> &BTreeSet<usize> {
        &self.hidden
    }

    pub fn map(&self, s: &State) -> State {
        let mut out = s.clone();
        for &h in &self.hidden {
            out = out.with(h, HIDDEN);
        }
        out
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &StateMapping) -> StateMapping {
        StateMapping { hidden: self.hidden.union(&next.hidden).copied().collect() }
    }

    /// φ⁻¹(target) within the full assignment space of `source`.
    pub fn preimage(&self, target: &State, source: &FactoredMdp) -> Vec<State> {
        let mut out = vec![target.clone()];
        for &h in &self.hidden {
            if source.hidden().contains(&h) {
                continue;
            }
            let size = source.variables()[h].domain.len() as u16;
            out = out.into_iter().flat_map(|s| (0..size).map(move |v| s.clone().with(h, v))).collect();
        }
        out
    }
}

/// State weighting w for a projection: uniform over each inverse image.
#[derive(Clone, Debug, PartialEq)]
pub struct StateWeighting {
    weight: f64,
}

impl StateWeighting {
    pub fn uniform(phi: &StateMapping, source: &FactoredMdp) -> Self {
        let size: f64 = phi
            .hidden()
            .iter()
            .filter(|h| !source.hidden().contains(h))
            .map(|&h| source.variables()[h].domain.len() as f64)
            .product();
        StateWeighting { weight: 1.0 / size }
    }

    pub fn weight(&self, _s: &State) -> f64 {
        self.weight
    }
}

/// Action mapping ψ. Actions not mentioned map to themselves. All-outcome
/// determinization maps an action to its first variant and records the whole
/// variant family.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ActionMapping {
    forward: BTreeMap<String, String>,
    family: BTreeMap<String, BTreeSet<String>>,
}

impl ActionMapping {
    pub fn identity() -> Self {
        ActionMapping::default()
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().all(|(a, b)| a == b) && self.family.values().all(|f| f.len() <= 1)
    }

    pub(crate) fn insert_family(&mut self, action: &str, variants: Vec<String>) {
        if let Some(first) = variants.first() {
            self.forward.insert(action.to_string(), first.clone());
        }
        self.family.insert(action.to_string(), variants.into_iter().collect());
    }

    pub fn map<'a>(&'a self, action: &'a str) -> &'a str {
        self.forward.get(action).map(String::as_str).unwrap_or(action)
    }

    /// Every target action `action` may correspond to.
    pub fn family(&self, action: &str) -> BTreeSet<String> {
        self.family.get(action).cloned().unwrap_or_else(|| BTreeSet::from([self.map(action).to_string()]))
    }

    /// ψ⁻¹(target) among `sources`, using the family relation.
    pub fn preimage<'a>(&self, target: &str, sources: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
        sources.into_iter().filter(|a| self.family(a).contains(target)).collect()
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &ActionMapping) -> ActionMapping {
        let mut out = ActionMapping::default();
        let keys: BTreeSet<&String> = self
            .forward
            .keys()
            .chain(self.family.keys())
            .chain(next.forward.keys())
            .chain(next.family.keys())
            .collect();
        for a in keys {
            let forward = next.map(self.map(a)).to_string();
            let family: BTreeSet<String> = self.family(a).iter().flat_map(|b| next.family(b)).collect();
            if forward != *a {
                out.forward.insert(a.clone(), forward);
            }
            if family.len() > 1 {
                out.family.insert(a.clone(), family);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_composes_by_union() {
        let a = StateMapping::projection([0].into());
        let b = StateMapping::projection([2].into());
        let s = State::new(vec![1, 1, 1]);
        assert_eq!(a.then(&b).map(&s), b.map(&a.map(&s)));
        assert!(StateMapping::identity().then(&StateMapping::identity()).is_identity());
    }

    #[test]
    fn family_composition() {
        let mut first = ActionMapping::identity();
        first.insert_family("go", vec!["go#1".into(), "go#2".into()]);
        let mut second = ActionMapping::identity();
        second.insert_family("go#2", vec!["go#2#1".into(), "go#2#2".into()]);
        let both = first.then(&second);
        assert_eq!(both.map("go"), "go#1");
        assert_eq!(both.family("go").len(), 3);
        assert_eq!(both.map("stay"), "stay");
        assert_eq!(both.preimage("go#2#2", ["go", "stay"]), vec!["go"]);
    }
}
