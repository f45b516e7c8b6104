//! JSON form of a model: its kind plus named natural parameters.

use std::collections::BTreeMap;

use gas_inar_core::{ModelKind, ModelSpec};
use serde::{Deserialize, Serialize};

/// ```json
/// {"model": "gas-poisson", "params": {"omega": -0.05, "beta": 0.9, "tau": 0.15, "mean": 6.0}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub model: ModelKind,
    pub params: BTreeMap<String, f64>,
}

impl From<&ModelSpec> for ModelDocument {
    fn from(spec: &ModelSpec) -> Self {
        let kind = spec.kind();
        let params = kind.param_names().into_iter().map(str::to_string).zip(spec.natural_params()).collect();
        ModelDocument { model: kind, params }
    }
}

impl ModelDocument {
    pub fn to_spec(&self) -> gas_inar_core::Result<ModelSpec> {
        let names = self.model.param_names();
        let mut values = Vec::with_capacity(names.len());
        for name in &names {
            let v = self
                .params
                .get(*name)
                .ok_or_else(|| gas_inar_core::Error::Input(format!("model {} needs parameter {name:?}", self.model)))?;
            values.push(*v);
        }
        if let Some(extra) = self.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(gas_inar_core::Error::Input(format!("model {} has no parameter {extra:?}", self.model)));
        }
        let spec = ModelSpec::from_natural(self.model, &values)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Named values in the model's parameter order.
    pub fn named(kind: ModelKind, values: &[f64]) -> BTreeMap<String, f64> {
        kind.param_names().into_iter().map(str::to_string).zip(values.iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gas_inar_core::{ErrorSpec, GasParams};

    #[test]
    fn round_trip_every_kind() {
        let specs = [
            ModelSpec::gas(GasParams::new(-0.05, 0.9, 0.15, ErrorSpec::poisson(6.0))),
            ModelSpec::gas(GasParams::new(-0.9, 0.96, 0.13, ErrorSpec::negative_binomial(6.0, 14.0))),
            ModelSpec::Static { alpha: 0.4, error: ErrorSpec::poisson(5.0) },
            ModelSpec::Static { alpha: 0.4, error: ErrorSpec::negative_binomial(5.0, 9.0) },
            ModelSpec::Rc { omega: -1.0, tau: 0.1, error: ErrorSpec::poisson(3.0) },
            ModelSpec::Rc { omega: -1.0, tau: 0.1, error: ErrorSpec::negative_binomial(3.0, 4.0) },
        ];
        for spec in specs {
            let doc = ModelDocument::from(&spec);
            let text = serde_json::to_string(&doc).unwrap();
            let back: ModelDocument = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_spec().unwrap(), spec);
        }
    }

    #[test]
    fn missing_and_unknown_parameters() {
        let doc: ModelDocument = serde_json::from_str(r#"{"model":"inar-poisson","params":{"alpha":0.3}}"#).unwrap();
        assert!(doc.to_spec().is_err());
        let doc: ModelDocument =
            serde_json::from_str(r#"{"model":"inar-poisson","params":{"alpha":0.3,"mean":2,"beta":0.1}}"#).unwrap();
        assert!(doc.to_spec().is_err());
        let doc: ModelDocument =
            serde_json::from_str(r#"{"model":"inar-poisson","params":{"alpha":1.3,"mean":2}}"#).unwrap();
        assert!(doc.to_spec().is_err());
    }
}
