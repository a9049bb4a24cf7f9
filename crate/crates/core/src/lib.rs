//! Multi-authority attribute-based access control on a simulated
//! smart-contract ledger.
//!
//! A data owner encrypts shared data and deploys a contract holding an
//! AND-gate access policy. Attribute authorities each issue attribute tokens
//! to users whose claims they approve. A user holding every token the policy
//! requires asks the owner's contract for the data key, which is released
//! wrapped under the user's public key.
//!
//! * [`ledger`]: accounts, signed transactions, gas, hash-chained blocks
//! * [`crypto`]: signatures, data encryption, key wrapping
//! * [`policy`]: attribute lists and wildcard AND-gate policies
//! * [`contracts`]: the `RequestAT`, `RequestKey`, `AT` and `DO` contracts
//! * [`workflow`]: end-to-end scenarios and their trace reports

pub mod contracts;
pub mod crypto;
pub mod encoding;
pub mod ledger;
pub mod policy;
pub mod workflow;
