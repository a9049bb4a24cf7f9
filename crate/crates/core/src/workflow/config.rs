use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{parse_rational, CostTable, DEFAULT_GAS_PRICE_WEI, DEFAULT_USD_PER_ETHER, WEI_PER_ETHER};
use crate::policy::{normalize, AccessPolicy, AttributeList, PolicyError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("policy: {0}")]
    Policy(#[from] PolicyError),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "DO")]
    DataOwner,
    #[serde(rename = "DU")]
    DataUser,
    #[serde(rename = "AA")]
    Authority,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorConfig {
    pub role: Role,
    pub id: String,
    /// Key-generation seed.
    pub seed: u64,
    /// The data user's attribute list, one value per policy position.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attributes: Vec<String>,
    /// Token supply of each attribute token an authority deploys.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_supply: Option<u64>,
}

/// An authority's ground truth: it approves `subject` for `attribute`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryEntry {
    pub subject: String,
    pub attribute: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SharedData {
    Text(String),
    Hex(String),
    /// Relative paths resolve against the config file's directory.
    Path(PathBuf),
}

fn default_gas_price() -> u128 {
    DEFAULT_GAS_PRICE_WEI
}

fn default_usd() -> String {
    DEFAULT_USD_PER_ETHER.to_string()
}

fn default_gas_limit() -> u64 {
    3_000_000
}

fn default_balance() -> u128 {
    WEI_PER_ETHER
}

fn default_block_interval() -> u64 {
    15
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasConfig {
    #[serde(default = "default_gas_price")]
    pub gas_price_wei: u128,
    /// Decimal or fraction, e.g. `"205"` or `"409/2"`.
    #[serde(default = "default_usd")]
    pub usd_per_ether: String,
    #[serde(default = "default_gas_limit")]
    pub gas_limit: u64,
    /// Entries replacing the default cost table, keyed `"Contract.function"`.
    #[serde(default = "CostTable::empty")]
    pub costs: CostTable,
    #[serde(default = "default_balance")]
    pub initial_balance_wei: u128,
}

impl Default for GasConfig {
    fn default() -> Self {
        GasConfig {
            gas_price_wei: default_gas_price(),
            usd_per_ether: default_usd(),
            gas_limit: default_gas_limit(),
            costs: CostTable::empty(),
            initial_balance_wei: default_balance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockConfig {
    #[serde(default)]
    pub genesis_time: u64,
    #[serde(default = "default_block_interval")]
    pub block_interval: u64,
}

impl Default for ClockConfig {
    fn default() -> Self {
        ClockConfig {
            genesis_time: 0,
            block_interval: default_block_interval(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub actors: Vec<ActorConfig>,
    #[serde(default)]
    pub aa_registries: BTreeMap<String, Vec<RegistryEntry>>,
    /// Policy text, one line per position.
    pub policy: String,
    pub shared_data: SharedData,
    #[serde(default)]
    pub gas: GasConfig,
    #[serde(default)]
    pub clock: ClockConfig,
    /// Seeds the data key, nonces and key-wrapping randomness.
    #[serde(default)]
    pub rng_seed: u64,
}

/// A config that passed validation, with the policy parsed and shared data
/// loaded.
#[derive(Debug, Clone)]
pub struct ValidatedScenario {
    pub config: ScenarioConfig,
    pub policy: AccessPolicy,
    pub data_owner: ActorConfig,
    pub data_user: ActorConfig,
    pub user_attributes: AttributeList,
    pub authorities: Vec<ActorConfig>,
    pub plaintext: Vec<u8>,
    pub usd_per_ether: BigRational,
    pub costs: CostTable,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config file and resolves a relative shared-data path against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_json(&text)?;
        if let SharedData::Path(p) = &mut config.shared_data {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<ValidatedScenario, ConfigError> {
        let mut ids = BTreeSet::new();
        for a in &self.actors {
            if a.id.trim().is_empty() {
                return Err(invalid("actor ids must be non-empty"));
            }
            if !ids.insert(a.id.as_str()) {
                return Err(invalid(format!("duplicate actor id {:?}", a.id)));
            }
        }
        let mut seeds = BTreeSet::new();
        if let Some(a) = self.actors.iter().find(|a| !seeds.insert(a.seed)) {
            return Err(invalid(format!("actor {:?} reuses a key seed", a.id)));
        }
        let of_role = |r: Role| self.actors.iter().filter(move |a| a.role == r);
        let (owners, users) = (of_role(Role::DataOwner).count(), of_role(Role::DataUser).count());
        if owners != 1 || users != 1 {
            return Err(invalid(format!(
                "a scenario needs exactly one DO and one DU (found {owners} and {users})"
            )));
        }
        let authorities: Vec<ActorConfig> = of_role(Role::Authority).cloned().collect();
        if authorities.is_empty() {
            return Err(invalid("a scenario needs at least one AA"));
        }
        let data_owner = of_role(Role::DataOwner).next().unwrap().clone();
        let data_user = of_role(Role::DataUser).next().unwrap().clone();

        let policy = AccessPolicy::parse(&self.policy)?;
        let required = policy.required_tokens()?;
        if let Some(t) = required
            .iter()
            .find(|t| !authorities.iter().any(|a| a.id == t.authority))
        {
            return Err(invalid(format!("policy names unknown authority {:?}", t.authority)));
        }
        let user_attributes = AttributeList::new(&data_user.attributes)?;
        if user_attributes.len() != policy.len() {
            return Err(PolicyError::LengthMismatch {
                attributes: user_attributes.len(),
                policy: policy.len(),
            }
            .into());
        }
        for (aa, entries) in &self.aa_registries {
            if !authorities.iter().any(|a| &a.id == aa) {
                return Err(invalid(format!("registry for unknown authority {aa:?}")));
            }
            for e in entries {
                if !ids.contains(e.subject.as_str()) {
                    return Err(invalid(format!(
                        "registry of {aa:?} names unknown subject {:?}",
                        e.subject
                    )));
                }
                if normalize(&e.attribute).is_empty() {
                    return Err(invalid(format!("registry of {aa:?} has an empty attribute")));
                }
            }
        }
        if let Some(a) = authorities.iter().find(|a| a.token_supply == Some(0)) {
            return Err(invalid(format!("authority {:?} has zero token supply", a.id)));
        }
        if self.gas.gas_limit == 0 {
            return Err(invalid("gas limit must be positive"));
        }
        let usd_per_ether = parse_rational(&self.gas.usd_per_ether).map_err(|e| invalid(e.to_string()))?;
        let plaintext = match &self.shared_data {
            SharedData::Text(t) => t.as_bytes().to_vec(),
            SharedData::Hex(h) => crate::encoding::from_hex(h).map_err(|e| invalid(format!("shared_data.hex: {e}")))?,
            SharedData::Path(p) => std::fs::read(p).map_err(|source| ConfigError::Io {
                path: p.clone(),
                source,
            })?,
        };
        Ok(ValidatedScenario {
            config: self.clone(),
            policy,
            data_owner,
            data_user,
            user_attributes,
            authorities,
            plaintext,
            usd_per_ether,
            costs: CostTable::default().merged(&self.gas.costs),
        })
    }
}
