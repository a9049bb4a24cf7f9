use std::collections::BTreeMap;

use super::{
    Call, CallOutput, ContractError, ContractKind, ContractState, Deployment, DoContractState, Event, KeyCustodian,
    RequestAtState, RequestKeyState, TokenContractState, APPROVED,
};
use crate::ledger::{Account, Address, GasMeter};

pub type Custodians = BTreeMap<Address, Box<dyn KeyCustodian>>;

/// Everything a call may touch. Contract storage is mutated in place; the
/// caller snapshots it beforehand and restores it on error.
pub struct ExecEnv<'a> {
    pub contracts: &'a mut BTreeMap<Address, ContractState>,
    pub accounts: &'a BTreeMap<Address, Account>,
    pub custodians: &'a mut Custodians,
    pub meter: GasMeter<'a>,
    pub events: Vec<Event>,
}

#[derive(Debug)]
pub struct Execution {
    pub output: Option<CallOutput>,
    pub created: Option<(Address, ContractState)>,
}

impl Execution {
    fn output(output: CallOutput) -> Self {
        Execution {
            output: Some(output),
            created: None,
        }
    }
}

/// Runs `call` from `sender` against `receiver`. Nested calls share the
/// meter and event log of `env`.
pub fn execute(
    env: &mut ExecEnv<'_>,
    sender: Address,
    sender_nonce: u64,
    receiver: Address,
    call: Call,
) -> Result<Execution, ContractError> {
    if let Call::Create(deployment) = call {
        if receiver != Address::ZERO {
            return Err(ContractError::InvalidDeployment(
                "creation must be sent to the zero address".into(),
            ));
        }
        return deploy(env, sender, sender_nonce, deployment);
    }
    let kind = env
        .contracts
        .get(&receiver)
        .map(ContractState::kind)
        .ok_or(ContractError::UnknownContract(receiver))?;
    env.meter.charge(Some(kind), call.function())?;
    let output = match (kind, call) {
        (
            ContractKind::RequestAt,
            Call::CheckA {
                token_contract,
                attribute_id,
                attribute,
            },
        ) => check_a(env, sender, receiver, token_contract, attribute_id, &attribute)?,
        (ContractKind::RequestKey, Call::CheckAt { do_contract }) => check_at(env, sender, receiver, do_contract)?,
        (
            ContractKind::AttributeToken,
            Call::CheckAttribute {
                attribute_id,
                attribute,
                approve,
            },
        ) => {
            let token = token_mut(env.contracts, receiver)?;
            CallOutput::Bool(token.check_attribute(&sender, attribute_id, &attribute, &approve)?)
        }
        (ContractKind::AttributeToken, Call::SendToken { to, tokens }) => {
            token_mut(env.contracts, receiver)?.send_token(&sender, &to, tokens)?;
            env.events.push(Event::Sendtoken {
                emitter: receiver,
                from: sender,
                to,
                tokens,
            });
            CallOutput::Bool(true)
        }
        (ContractKind::AttributeToken, Call::FreezeAccount { target, frozen }) => {
            token_mut(env.contracts, receiver)?.set_frozen(&sender, target, frozen)?;
            CallOutput::Bool(true)
        }
        (ContractKind::AttributeToken, Call::SetApproval { subject, approved }) => {
            token_mut(env.contracts, receiver)?.set_approval(&sender, subject, approved)?;
            CallOutput::Bool(true)
        }
        (ContractKind::DataOwner, Call::VerifyAt { to }) => {
            let from = env.contracts[&receiver].owner();
            CallOutput::Bool(verify_at(env, receiver, from, to)?)
        }
        (ContractKind::DataOwner, Call::SendKey { to, envelope }) => {
            // A bare sendKey never follows a verification in the same chain.
            let from = env.contracts[&receiver].owner();
            do_mut(env.contracts, receiver)?.send_key(to, envelope.clone(), false)?;
            env.events.push(Event::Sendkey {
                emitter: receiver,
                from,
                to,
                encrypted_key: envelope.to_bytes(),
            });
            CallOutput::Bool(true)
        }
        (kind, call) => {
            return Err(ContractError::UnsupportedFunction {
                contract: kind.name().into(),
                function: call.function().into(),
            })
        }
    };
    Ok(Execution::output(output))
}

fn deploy(
    env: &mut ExecEnv<'_>,
    sender: Address,
    sender_nonce: u64,
    deployment: Deployment,
) -> Result<Execution, ContractError> {
    env.meter.charge(Some(deployment.kind()), crate::ledger::CREATE)?;
    let state = match deployment {
        Deployment::RequestAt { authority } => ContractState::RequestAt(RequestAtState {
            owner: sender,
            authority,
        }),
        Deployment::RequestKey { data_owner } => ContractState::RequestKey(RequestKeyState {
            owner: sender,
            data_owner,
        }),
        Deployment::AttributeToken {
            position,
            symbol,
            name,
            supply,
            approved,
        } => {
            let mut token = TokenContractState::construct(sender, position, &symbol, &name, supply)?;
            token.registry.extend(approved);
            ContractState::Token(token)
        }
        Deployment::DataOwner { data_digest, required } => {
            ContractState::DataOwner(DoContractState::new(sender, data_digest, required)?)
        }
    };
    let address = Address::for_contract(&sender, sender_nonce);
    Ok(Execution {
        output: None,
        created: Some((address, state)),
    })
}

/// `RequestAT.checkA`: validate the claim through the token contract and
/// grant one token on approval.
fn check_a(
    env: &mut ExecEnv<'_>,
    sender: Address,
    request_at: Address,
    token_contract: Address,
    attribute_id: super::AttributeId,
    attribute: &str,
) -> Result<CallOutput, ContractError> {
    let ContractState::RequestAt(req) = &env.contracts[&request_at] else {
        unreachable!("dispatch matched RequestAT")
    };
    if req.owner != sender {
        return Err(ContractError::NotOwner);
    }
    let authority = req.authority;
    let du = sender;

    env.meter.charge(Some(ContractKind::AttributeToken), "checkAttribute")?;
    let token = token_mut(env.contracts, token_contract)?;
    if token.owner != authority {
        return Err(ContractError::WrongCounterparty(token_contract));
    }
    let approve = token.registry_verdict(&du, attribute);
    let owner = token.owner;
    // Validation runs on the authority's behalf inside its own contract.
    if !token.check_attribute(&owner, attribute_id, attribute, approve)? {
        return Ok(CallOutput::Failure);
    }
    debug_assert_eq!(approve, APPROVED);

    env.meter.charge(Some(ContractKind::AttributeToken), "sendToken")?;
    token_mut(env.contracts, token_contract)?.send_token(&owner, &du, 1)?;
    env.events.push(Event::Sendtoken {
        emitter: token_contract,
        from: owner,
        to: du,
        tokens: 1,
    });
    Ok(CallOutput::TokensGranted(1))
}

/// `RequestKey.checkAT`: verify the user's tokens at the owner's contract
/// and, on success, have it send the wrapped key.
fn check_at(
    env: &mut ExecEnv<'_>,
    sender: Address,
    request_key: Address,
    do_contract: Address,
) -> Result<CallOutput, ContractError> {
    let ContractState::RequestKey(req) = &env.contracts[&request_key] else {
        unreachable!("dispatch matched RequestKey")
    };
    if req.owner != sender {
        return Err(ContractError::NotOwner);
    }
    let data_owner = req.data_owner;
    let du = sender;

    let from = match env.contracts.get(&do_contract) {
        Some(ContractState::DataOwner(d)) if d.owner == data_owner => d.owner,
        Some(ContractState::DataOwner(_)) => return Err(ContractError::WrongCounterparty(do_contract)),
        _ => return Err(ContractError::UnknownContract(do_contract)),
    };
    env.meter.charge(Some(ContractKind::DataOwner), "verifyAT")?;
    let verified = verify_at(env, do_contract, from, du)?;
    if !verified {
        return Ok(CallOutput::Failure);
    }

    let public_key = env
        .accounts
        .get(&du)
        .and_then(Account::public_key)
        .ok_or(ContractError::NoPublicKey(du))?;
    let envelope = env
        .custodians
        .get_mut(&do_contract)
        .ok_or(ContractError::NoCustodian(do_contract))?
        .wrap_for(public_key);

    env.meter.charge(Some(ContractKind::DataOwner), "sendKey")?;
    do_mut(env.contracts, do_contract)?.send_key(du, envelope.clone(), verified)?;
    env.events.push(Event::Sendkey {
        emitter: do_contract,
        from,
        to: du,
        encrypted_key: envelope.to_bytes(),
    });
    Ok(CallOutput::Envelope(envelope))
}

/// Sum of `holder`'s balances over every token `authority` issues for
/// `attribute` at `position`.
pub(crate) fn held_tokens(
    contracts: &BTreeMap<Address, ContractState>,
    authority: &Address,
    position: u32,
    attribute: &str,
    holder: &Address,
) -> u64 {
    contracts
        .values()
        .filter_map(ContractState::as_token)
        .filter(|t| t.owner == *authority && t.certifies(position, attribute))
        .map(|t| t.balance_of(holder))
        .sum()
}

fn verify_at(env: &mut ExecEnv<'_>, do_contract: Address, from: Address, to: Address) -> Result<bool, ContractError> {
    let required = env.contracts[&do_contract]
        .as_data_owner()
        .expect("caller checked kind")
        .required
        .clone();
    let balances: Vec<u64> = required
        .iter()
        .map(|r| held_tokens(env.contracts, &r.authority, r.position, &r.attribute, &to))
        .collect();
    let verdict = do_mut(env.contracts, do_contract)?.verify_at(from, to, &balances);
    env.events.push(Event::VerifyAt {
        emitter: do_contract,
        to,
        tokens: balances.iter().sum(),
        approve: if verdict {
            b"approved".to_vec()
        } else {
            b"rejected".to_vec()
        },
    });
    Ok(verdict)
}

fn token_mut(
    contracts: &mut BTreeMap<Address, ContractState>,
    at: Address,
) -> Result<&mut TokenContractState, ContractError> {
    match contracts.get_mut(&at) {
        Some(ContractState::Token(t)) => Ok(t),
        _ => Err(ContractError::UnknownContract(at)),
    }
}

fn do_mut(
    contracts: &mut BTreeMap<Address, ContractState>,
    at: Address,
) -> Result<&mut DoContractState, ContractError> {
    match contracts.get_mut(&at) {
        Some(ContractState::DataOwner(d)) => Ok(d),
        _ => Err(ContractError::UnknownContract(at)),
    }
}
