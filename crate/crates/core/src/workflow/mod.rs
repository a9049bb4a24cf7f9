//! The seven-step access protocol run end to end on a private ledger.
//!
//! 1. Register and fund every actor.
//! 2. The data owner encrypts the shared data, stores the blob, deploys its
//!    `DO` contract with the policy's token requirements and attaches the
//!    key custodian.
//! 3. The data user deploys one `RequestAT` per authority and a
//!    `RequestKey` for the data owner.
//! 4. Each authority deploys one `AT` contract per attribute it certifies.
//! 5. The data user claims each policy literal through `checkA`.
//! 6. The data user calls `checkAT`; on success the wrapped key comes back.
//! 7. The data user unwraps the key, fetches and decrypts the blob.
//!
//! One block is sealed per step that submitted transactions. Any failure
//! after validation ends the run as `Denied(step, reason)`.

mod config;
mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

pub use config::{
    ActorConfig, ClockConfig, ConfigError, GasConfig, RegistryEntry, Role, ScenarioConfig, SharedData,
    ValidatedScenario,
};
pub use trace::{ActorRecord, ContractRecord, Outcome, StepRecord, TraceReport, TxRecord};

use crate::contracts::{AttributeId, Call, CallOutput, DataKeyCustodian, Deployment, Requirement};
use crate::crypto::{decrypt_data, encrypt_data, sha256, unwrap_key, DataKey, Digest, KeyPair, SealedData, Suite};
use crate::ledger::{export_jsonl, Address, CostReport, Ledger, Receipt, Transaction, UnsignedTransaction};
use crate::policy::{normalize, AccessPolicy, AttributeList, Term};

/// A key pair that signs transactions against the nonce the ledger expects.
pub struct Wallet {
    pub keys: KeyPair,
    pub address: Address,
}

impl Wallet {
    pub fn new(keys: KeyPair) -> Self {
        let address = Address::from_public_key(&keys.public_key);
        Wallet { keys, address }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(KeyPair::generate(Some(seed)))
    }

    /// Signs a transaction at the sender's current ledger nonce.
    pub fn transaction(
        &self,
        ledger: &Ledger,
        receiver: Address,
        amount_wei: u128,
        data: Option<Vec<u8>>,
        gas_price_wei: u128,
        gas_limit: u64,
    ) -> Transaction {
        UnsignedTransaction {
            nonce: ledger.account(&self.address).map_or(0, |a| a.nonce),
            receiver,
            gas_price_wei,
            gas_limit,
            amount_wei,
            data,
        }
        .sign(&self.keys)
    }

    pub fn call(
        &self,
        ledger: &Ledger,
        receiver: Address,
        call: &Call,
        gas_price_wei: u128,
        gas_limit: u64,
    ) -> Transaction {
        self.transaction(ledger, receiver, 0, Some(call.encode()), gas_price_wei, gas_limit)
    }
}

/// Content-addressed off-chain storage for encrypted blobs.
#[derive(Debug, Default, Clone)]
pub struct BlobStore(BTreeMap<Digest, Vec<u8>>);

impl BlobStore {
    pub fn put(&mut self, bytes: Vec<u8>) -> Digest {
        let digest = sha256(&bytes);
        self.0.insert(digest, bytes);
        digest
    }

    pub fn get(&self, digest: &Digest) -> Option<&[u8]> {
        self.0.get(digest).map(Vec::as_slice)
    }
}

/// A finished run: the report plus the ledger it produced.
pub struct ScenarioRun {
    pub report: TraceReport,
    pub ledger: Ledger,
}

impl ScenarioRun {
    /// Writes `trace.json`, `ledger.jsonl` and `costs.txt` into `dir`.
    pub fn export(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trace.json"), self.report.to_json() + "\n")?;
        std::fs::write(dir.join("ledger.jsonl"), export_jsonl(self.ledger.chain()))?;
        std::fs::write(dir.join("costs.txt"), self.report.costs.render())?;
        Ok(())
    }
}

struct Actor {
    config: ActorConfig,
    wallet: Wallet,
}

struct Runner<'a> {
    scenario: &'a ValidatedScenario,
    ledger: Ledger,
    clock: u64,
    steps: Vec<StepRecord>,
    contracts: Vec<ContractRecord>,
}

/// Why a step ended the run.
struct Stop(String);

impl Runner<'_> {
    fn step(&mut self, step: u8, title: &str) -> &mut StepRecord {
        self.steps.push(StepRecord {
            step,
            title: title.to_string(),
            block: None,
            transactions: Vec::new(),
            notes: Vec::new(),
        });
        self.steps.last_mut().unwrap()
    }

    fn current(&mut self) -> &mut StepRecord {
        self.steps.last_mut().expect("a step is open")
    }

    fn note(&mut self, note: String) {
        self.current().notes.push(note);
    }

    /// Submits a call and records it. Rejected transactions and failed calls
    /// come back as `Stop`; the caller decides whether that ends the run.
    fn submit(&mut self, from: &Actor, receiver: Address, call: Call, description: String) -> Result<Receipt, Stop> {
        let gas = &self.scenario.config.gas;
        let tx = from
            .wallet
            .call(&self.ledger, receiver, &call, gas.gas_price_wei, gas.gas_limit);
        let receipt = self
            .ledger
            .submit_transaction(tx)
            .map_err(|e| Stop(format!("{description}: transaction rejected: {e}")))?;
        self.current().transactions.push(TxRecord {
            description: description.clone(),
            sender: from.config.id.clone(),
            receipt: receipt.clone(),
        });
        match &receipt.status {
            crate::ledger::TxStatus::Success => Ok(receipt),
            crate::ledger::TxStatus::Failure(reason) => Err(Stop(format!("{description}: {reason}"))),
        }
    }

    fn deploy(&mut self, from: &Actor, deployment: Deployment, label: String) -> Result<Address, Stop> {
        let receipt = self.submit(from, Address::ZERO, Call::Create(deployment), format!("deploy {label}"))?;
        let address = receipt.new_contract.expect("successful creation yields an address");
        self.contracts.push(ContractRecord {
            label,
            address,
            owner: from.config.id.clone(),
        });
        Ok(address)
    }

    /// Seals pending transactions into a block, if there are any.
    fn seal(&mut self) {
        if self.ledger.pending().is_empty() {
            return;
        }
        self.clock += self.scenario.config.clock.block_interval;
        let height = self.ledger.seal_block(self.clock).height;
        self.current().block = Some(height);
    }
}

/// Validates `config` and runs the protocol. Only configuration problems
/// are errors; everything after validation ends in an [`Outcome`].
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun, ConfigError> {
    let scenario = config.validate()?;
    Ok(run_validated(&scenario))
}

pub fn run_validated(scenario: &ValidatedScenario) -> ScenarioRun {
    let config = &scenario.config;
    let mut runner = Runner {
        scenario,
        ledger: Ledger::new(scenario.costs.clone(), config.clock.genesis_time),
        clock: config.clock.genesis_time,
        steps: Vec::new(),
        contracts: Vec::new(),
    };
    let actor = |c: &ActorConfig| Actor {
        config: c.clone(),
        wallet: Wallet::from_seed(c.seed),
    };
    let owner = actor(&scenario.data_owner);
    let user = actor(&scenario.data_user);
    let authorities: Vec<Actor> = scenario.authorities.iter().map(actor).collect();
    let actors: Vec<&Actor> = config
        .actors
        .iter()
        .map(|c| match c.role {
            Role::DataOwner => &owner,
            Role::DataUser => &user,
            Role::Authority => authorities.iter().find(|a| a.config.id == c.id).unwrap(),
        })
        .collect();

    let mut blobs = BlobStore::default();
    let outcome = match protocol(&mut runner, scenario, &owner, &user, &authorities, &actors, &mut blobs) {
        Ok(outcome) => outcome,
        Err((step, Stop(reason))) => {
            runner.seal();
            Outcome::Denied { step, reason }
        }
    };

    let ledger = runner.ledger;
    let receipts = runner.steps.iter().flat_map(|s| &s.transactions).map(|t| &t.receipt);
    let costs = CostReport::build(
        receipts.map(|r| (r.charges.as_slice(), r.gas_price_wei)),
        &scenario.usd_per_ether,
    );
    let report = TraceReport {
        suite: Suite::current(),
        actors: actors
            .iter()
            .map(|a| ActorRecord {
                role: a.config.role,
                id: a.config.id.clone(),
                address: a.wallet.address,
                public_key: a.wallet.keys.public_key,
            })
            .collect(),
        policy: scenario.policy.render(),
        attributes: scenario.user_attributes.clone(),
        contracts: runner.contracts,
        steps: runner.steps,
        outcome,
        costs,
        ledger_height: ledger.chain().len() as u64 - 1,
        ledger_tip: ledger.tip_hash(),
        state_digest: ledger.state_digest(),
    };
    ScenarioRun { report, ledger }
}

fn protocol(
    r: &mut Runner<'_>,
    scenario: &ValidatedScenario,
    owner: &Actor,
    user: &Actor,
    authorities: &[Actor],
    actors: &[&Actor],
    blobs: &mut BlobStore,
) -> Result<Outcome, (u8, Stop)> {
    let config = &scenario.config;
    let at = |step: u8| move |stop: Stop| (step, stop);
    let mut rng = ChaCha20Rng::seed_from_u64(config.rng_seed);
    let authority_address = |id: &str| authorities.iter().find(|a| a.config.id == id).unwrap().wallet.address;

    // 1. Registration.
    r.step(1, "register actors");
    for a in actors {
        r.ledger
            .create_account(a.wallet.keys.public_key)
            .and_then(|addr| r.ledger.fund(&addr, config.gas.initial_balance_wei))
            .map_err(|e| (1, Stop(e.to_string())))?;
        let note = format!("{} {} at {}", role_name(a.config.role), a.config.id, a.wallet.address);
        r.note(note);
    }

    // 2. Data owner: encrypt, store, deploy DO, attach custodian.
    r.step(2, "data owner publishes");
    let data_key = DataKey::generate(&mut rng);
    let sealed = encrypt_data(&data_key, &scenario.plaintext, &mut rng);
    let blob = sealed.to_bytes();
    let blob_len = blob.len();
    let data_digest = blobs.put(blob);
    r.note(format!("stored a {blob_len}-byte encrypted blob as {data_digest}"));
    let required = scenario
        .policy
        .required_tokens()
        .expect("validated")
        .into_iter()
        .map(|t| Requirement {
            position: t.position as u32,
            authority: authority_address(&t.authority),
            attribute: t.value,
            minimum: 1,
        })
        .collect();
    let do_contract = r
        .deploy(owner, Deployment::DataOwner { data_digest, required }, "DO".into())
        .map_err(at(2))?;
    r.ledger
        .attach_custodian(
            &owner.wallet.address,
            do_contract,
            Box::new(DataKeyCustodian::new(data_key, rng.next_u64())),
        )
        .expect("owner just deployed this contract");
    r.seal();

    // 3. Data user: request contracts.
    r.step(3, "data user deploys request contracts");
    let mut request_at = BTreeMap::new();
    for aa in authorities {
        let address = r
            .deploy(
                user,
                Deployment::RequestAt {
                    authority: aa.wallet.address,
                },
                format!("RequestAT for {}", aa.config.id),
            )
            .map_err(at(3))?;
        request_at.insert(aa.config.id.clone(), address);
    }
    let request_key = r
        .deploy(
            user,
            Deployment::RequestKey {
                data_owner: owner.wallet.address,
            },
            "RequestKey".into(),
        )
        .map_err(at(3))?;
    r.seal();

    // 4. Authorities: one token contract per policy literal bound to them,
    // certifying that literal's value at its position.
    r.step(4, "authorities deploy attribute tokens");
    let subject_address = |id: &str| actors.iter().find(|a| a.config.id == id).unwrap().wallet.address;
    let mut tokens: BTreeMap<usize, Address> = BTreeMap::new();
    for aa in authorities {
        let mut approved: BTreeMap<String, BTreeSet<Address>> = BTreeMap::new();
        for entry in config.aa_registries.get(&aa.config.id).into_iter().flatten() {
            approved
                .entry(normalize(&entry.attribute))
                .or_default()
                .insert(subject_address(&entry.subject));
        }
        for (i, term) in scenario.policy.terms().iter().enumerate() {
            let Term::Literal {
                authority: Some(a),
                value,
            } = term
            else {
                continue;
            };
            if *a != aa.config.id {
                continue;
            }
            let position = i + 1;
            let deployment = Deployment::AttributeToken {
                position: position as u32,
                symbol: value.clone(),
                name: format!("{} {value} (position {position})", aa.config.id),
                supply: aa.config.token_supply.unwrap_or(100),
                approved: approved.get(value).into_iter().flatten().copied().collect(),
            };
            let label = format!("AT {}:{value}@{position}", aa.config.id);
            let address = r.deploy(aa, deployment, label).map_err(at(4))?;
            tokens.insert(position, address);
        }
    }
    r.seal();

    // 5. Data user submits its value at each literal position to the token
    // contract for that position; the authority's registry decides.
    r.step(5, "data user claims attributes");
    for (i, (term, claim)) in scenario
        .policy
        .terms()
        .iter()
        .zip(scenario.user_attributes.values())
        .enumerate()
    {
        let Term::Literal {
            authority: Some(aa), ..
        } = term
        else {
            continue;
        };
        let token_contract = tokens[&(i + 1)];
        let call = Call::CheckA {
            token_contract,
            attribute_id: AttributeId::derive(&user.wallet.address, claim),
            attribute: claim.clone(),
        };
        let description = format!("checkA {aa}:{claim}");
        match r.submit(user, request_at[aa], call, description) {
            Ok(receipt) => {
                let note = match receipt.output {
                    Some(CallOutput::TokensGranted(n)) => {
                        format!("position {}: {aa} granted {n} {claim:?} token", i + 1)
                    }
                    _ => format!("position {}: {aa} rejected the claim {claim:?}", i + 1),
                };
                r.note(note);
            }
            // A failed claim is recorded; verification decides the outcome.
            Err(Stop(reason)) => r.note(format!("position {}: {reason}", i + 1)),
        }
    }
    r.seal();

    // 6. Data user asks for the key.
    r.step(6, "data user requests the key");
    let receipt = r
        .submit(user, request_key, Call::CheckAt { do_contract }, "checkAT".into())
        .map_err(at(6))?;
    r.seal();
    let envelope = match receipt.output {
        Some(CallOutput::Envelope(env)) => env,
        _ => return Err((6, Stop("verification false".into()))),
    };

    // 7. Data user decrypts off-chain.
    r.step(7, "data user decrypts");
    let stop7 = |reason: &str| (7, Stop(reason.to_string()));
    let key = unwrap_key(&user.wallet.keys.private_key, &envelope).map_err(|_| stop7("key unwrap failed"))?;
    let digest = r
        .ledger
        .contract(&do_contract)
        .and_then(|c| c.as_data_owner())
        .expect("deployed")
        .data_digest;
    let blob = blobs.get(&digest).ok_or_else(|| stop7("blob not found"))?;
    let sealed = SealedData::from_bytes(blob).map_err(|_| stop7("blob is malformed"))?;
    let plaintext = decrypt_data(&key, &sealed).map_err(|_| stop7("decryption failed"))?;
    let plaintext_digest = sha256(&plaintext);
    if plaintext_digest != sha256(&scenario.plaintext) {
        return Err(stop7("plaintext digest mismatch"));
    }
    r.note(format!(
        "recovered {} bytes, sha-256 {plaintext_digest}",
        plaintext.len()
    ));
    Ok(Outcome::Granted { plaintext_digest })
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::DataOwner => "DO",
        Role::DataUser => "DU",
        Role::Authority => "AA",
    }
}

/// Every attribute list of length `n` over `alphabet`.
pub fn attribute_universe(alphabet: &[&str], n: usize) -> Vec<AttributeList> {
    let mut lists: Vec<Vec<&str>> = vec![Vec::new()];
    for _ in 0..n {
        lists = lists
            .into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |a| {
                    let mut l = prefix.clone();
                    l.push(a);
                    l
                })
            })
            .collect();
    }
    lists
        .into_iter()
        .map(|l| AttributeList::new(l).expect("alphabet values are non-empty"))
        .collect()
}

/// Runs the protocol once per attribute list in `universe` against a fixed
/// owner and policy. Each authority's registry approves exactly the user's
/// values at the positions it is bound to. Intended for small universes
/// (tens of lists); each entry is a full run.
pub fn enumerate_outcomes(
    policy: &AccessPolicy,
    universe: &[AttributeList],
) -> Result<Vec<(AttributeList, TraceReport)>, ConfigError> {
    let bound = policy.authorities();
    let mut names: BTreeSet<&str> = bound.iter().flatten().copied().collect();
    if names.is_empty() {
        // Every scenario needs an authority, even when no position binds one.
        names.insert("AA");
    }
    universe
        .iter()
        .map(|list| {
            let mut actors = vec![
                ActorConfig {
                    role: Role::DataOwner,
                    id: "DO".into(),
                    seed: 1,
                    attributes: Vec::new(),
                    token_supply: None,
                },
                ActorConfig {
                    role: Role::DataUser,
                    id: "DU".into(),
                    seed: 2,
                    attributes: list.values().to_vec(),
                    token_supply: None,
                },
            ];
            let mut registries: BTreeMap<String, Vec<RegistryEntry>> = BTreeMap::new();
            for (j, name) in names.iter().enumerate() {
                actors.push(ActorConfig {
                    role: Role::Authority,
                    id: name.to_string(),
                    seed: 10 + j as u64,
                    attributes: Vec::new(),
                    token_supply: None,
                });
                let entries = bound
                    .iter()
                    .zip(list.values())
                    .filter(|(a, _)| **a == Some(*name))
                    .map(|(_, v)| RegistryEntry {
                        subject: "DU".into(),
                        attribute: v.clone(),
                    })
                    .collect();
                registries.insert(name.to_string(), entries);
            }
            let config = ScenarioConfig {
                actors,
                aa_registries: registries,
                policy: policy.render(),
                shared_data: SharedData::Text("enumerated scenario payload".into()),
                gas: GasConfig::default(),
                clock: ClockConfig::default(),
                rng_seed: 7,
            };
            run_scenario(&config).map(|run| (list.clone(), run.report))
        })
        .collect()
}
