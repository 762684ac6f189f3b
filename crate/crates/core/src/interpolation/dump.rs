use serde::{Deserialize, Serialize};

use super::LagrangeFunction;
use crate::kernels::KernelSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisVariant {
    Full,
    Truncated,
    Local,
}

impl BasisVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisVariant::Full => "full",
            BasisVariant::Truncated => "truncated",
            BasisVariant::Local => "local",
        }
    }
}

impl std::str::FromStr for BasisVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(BasisVariant::Full),
            "truncated" => Ok(BasisVariant::Truncated),
            "local" => Ok(BasisVariant::Local),
            other => Err(format!("unknown basis variant `{other}` (full|truncated|local)")),
        }
    }
}

/// One entry of a basis dump. For truncated and local functions the support is
/// the footprint, listed again under `footprint`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    #[serde(flatten)]
    pub function: LagrangeFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub footprint: Option<Vec<usize>>,
}

/// A serialized basis: one entry per center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisDump {
    pub kernel: KernelSpec,
    pub variant: BasisVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub functions: Vec<BasisEntry>,
}

impl BasisDump {
    pub fn new(kernel: KernelSpec, variant: BasisVariant, k: Option<f64>, functions: Vec<LagrangeFunction>) -> Self {
        let functions = functions
            .into_iter()
            .map(|function| {
                let footprint = (variant != BasisVariant::Full).then(|| function.support.clone());
                BasisEntry { function, footprint }
            })
            .collect();
        BasisDump {
            kernel,
            variant,
            k,
            functions,
        }
    }

    pub fn lagrange_functions(&self) -> impl Iterator<Item = &LagrangeFunction> {
        self.functions.iter().map(|e| &e.function)
    }
}
