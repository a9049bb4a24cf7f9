//! Acceptance suite: one PASS/FAIL line per criterion, with detail lines
//! beneath. Exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use mabac_core::contracts::{Call, ContractState, Deployment, Event};
use mabac_core::crypto::{
    decrypt_data, encrypt_data, sha256, unwrap_key, verify, wrap_key, DataKey, KeyEnvelope, KeyPair, SealedData,
    Signature,
};
use mabac_core::ledger::{
    audit_jsonl, export_jsonl, Address, ChainVerdict, CostTable, Ledger, DEFAULT_GAS_PRICE_WEI, WEI_PER_ETHER,
};
use mabac_core::policy::{AccessPolicy, AttributeList};
use mabac_core::workflow::{attribute_universe, enumerate_outcomes, Outcome, ScenarioConfig, TraceReport, Wallet};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Verdict {
    passed: bool,
    details: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: impl Into<String>) {
        let line = line.into();
        self.passed &= ok;
        self.details.push(if ok { line } else { format!("MISMATCH {line}") });
    }

    fn note(&mut self, line: impl Into<String>) {
        self.details.push(line.into());
    }

    fn within(&mut self, elapsed: Duration, budget: Duration, what: &str) {
        self.check(
            elapsed < budget,
            format!("{what}: {:.3} s (budget {} s)", elapsed.as_secs_f64(), budget.as_secs()),
        );
    }
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn mabac(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mabac")).args(args).output().unwrap();
    (out.status.code(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn run_export(config: &str, dir: &Path) -> (Option<i32>, String) {
    mabac(&[
        "run",
        "--config",
        scenario(config).to_str().unwrap(),
        "--export",
        dir.to_str().unwrap(),
    ])
}

fn deterministic_runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

// Reference cost table: (label, gas, ether, USD).
const REFERENCE: [(&str, u64, &str, &str); 7] = [
    ("RequestAT (C)", 1_132_452, "0.001132452", "0.232"),
    ("RequestKey (C)", 1_022_644, "0.001022644", "0.208"),
    ("AT (C)", 1_752_958, "0.001752958", "0.359"),
    ("checkAttribute (F)", 394_286, "0.000394286", "0.080"),
    ("sendToken (F)", 123_680, "0.000123680", "0.025"),
    ("verifyAT (F)", 356_070, "0.000356070", "0.073"),
    ("sendKey (F)", 224_520, "0.000224520", "0.046"),
];

/// Parses a decimal string into thousandths (USD) without floats.
fn milli(s: &str) -> i64 {
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    let frac = format!("{frac:0<3}");
    whole.parse::<i64>().unwrap() * 1000 + frac[..3].parse::<i64>().unwrap()
}

fn cost_table() -> Verdict {
    let mut v = Verdict::new();
    let dir = tempfile::tempdir().unwrap();
    run_export("alice.json", dir.path());
    let trace = dir.path().join("trace.json");
    let start = Instant::now();
    let (code, table) = mabac(&["costs", "--trace", trace.to_str().unwrap(), "--usd-per-ether", "205"]);
    let elapsed = start.elapsed();
    v.check(code == Some(0), format!("mabac costs exit {code:?}"));
    for (label, gas, ether, usd) in REFERENCE {
        let row = table.lines().find(|l| {
            l.trim_start_matches('|')
                .trim()
                .strip_prefix(label)
                .is_some_and(|rest| rest.starts_with([' ', '|']))
        });
        let Some(row) = row else {
            v.check(false, format!("{label}: row missing"));
            continue;
        };
        let cells: Vec<&str> = row.split('|').map(str::trim).filter(|c| !c.is_empty()).collect();
        let (got_gas, got_ether, got_usd) = (cells[1], cells[2], cells[3]);
        v.check(
            got_gas == gas.to_string() && got_ether == ether,
            format!("{label}: gas {got_gas} ether {got_ether} (reference {ether})"),
        );
        let diff = (milli(got_usd) - milli(usd)).abs();
        v.check(
            diff <= 1,
            format!(
                "{label}: USD {got_usd} (unrounded {:.6}) vs reference {usd}",
                gas as f64 * 205.0 / 1e9
            ),
        );
    }
    v.within(elapsed, Duration::from_secs(1), "cost report");
    v
}

fn worked_example() -> Verdict {
    let mut v = Verdict::new();
    for (name, expect_granted) in [("alice.json", true), ("bob.json", false)] {
        let config = ScenarioConfig::load(&scenario(name)).unwrap();
        let plaintext = config.validate().unwrap().plaintext;
        let start = Instant::now();
        let run = mabac_core::workflow::run_scenario(&config).unwrap();
        let elapsed = start.elapsed();
        match (&run.report.outcome, expect_granted) {
            (Outcome::Granted { plaintext_digest }, true) => v.check(
                *plaintext_digest == sha256(&plaintext),
                format!("{name}: {}", run.report.outcome),
            ),
            (Outcome::Denied { step, .. }, false) => v.check(*step == 6, format!("{name}: {}", run.report.outcome)),
            (other, _) => v.check(false, format!("{name}: unexpected {other}")),
        }
        v.within(elapsed, Duration::from_secs(1), name);
    }
    v
}

/// Direct reading of the definition: every position is `*` or equals the
/// attribute at that position.
fn oracle(policy: &[&str], list: &[&str]) -> bool {
    policy.len() == list.len() && (0..policy.len()).all(|i| policy[i] == "*" || policy[i] == list[i])
}

fn product<'a>(alphabet: &[&'a str], n: usize) -> Vec<Vec<&'a str>> {
    (0..n).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|p| {
                alphabet.iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(*a);
                    q
                })
            })
            .collect()
    })
}

fn policy_oracle() -> Verdict {
    let mut v = Verdict::new();
    let alphabet = ["a", "b", "c"];
    let start = Instant::now();
    let (mut cases, mut agree) = (0u64, 0u64);
    for n in 1..=4 {
        let lists = product(&alphabet, n);
        let parsed: Vec<AttributeList> = lists.iter().map(|l| AttributeList::new(l.clone()).unwrap()).collect();
        for w in product(&["a", "b", "c", "*"], n) {
            let policy = AccessPolicy::parse(&w.join("\n")).unwrap();
            for (raw, list) in lists.iter().zip(&parsed) {
                cases += 1;
                if mabac_core::policy::satisfies(list, &policy).unwrap() == oracle(&w, raw) {
                    agree += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    v.check(
        agree == cases,
        format!("{agree}/{cases} cases agree (n = 1..4, alphabet {{a,b,c}})"),
    );
    v.within(elapsed, Duration::from_secs(10), "exhaustive sweep");
    v
}

fn end_to_end() -> Verdict {
    let mut v = Verdict::new();
    let universe = attribute_universe(&["a", "b"], 3);
    let authorities = ["AA1", "AA2", "AA1"];
    let start = Instant::now();
    let (mut runs, mut granted, mut bad) = (0, 0, Vec::new());
    for w in product(&["a", "b", "*"], 3) {
        let text: Vec<String> = w
            .iter()
            .zip(authorities)
            .map(|(t, aa)| if *t == "*" { "*".into() } else { format!("{aa}:{t}") })
            .collect();
        let policy = AccessPolicy::parse(&text.join("\n")).unwrap();
        for (list, report) in enumerate_outcomes(&policy, &universe).unwrap() {
            runs += 1;
            let expected = policy.satisfied_by(&list).unwrap();
            let keys = report.events().filter(|e| matches!(e, Event::Sendkey { .. })).count();
            let ok = report.outcome.is_granted() == expected && keys == usize::from(expected);
            granted += usize::from(report.outcome.is_granted());
            if !ok {
                bad.push(format!(
                    "[{}] vs {:?}: {} with {keys} Sendkey",
                    text.join(","),
                    list.values(),
                    report.outcome
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    v.check(
        bad.is_empty(),
        format!(
            "{runs} runs (27 policies x 8 lists, 2 authorities), {granted} granted, {} mismatches",
            bad.len()
        ),
    );
    for b in bad.iter().take(5) {
        v.note(b.clone());
    }
    v.within(elapsed, Duration::from_secs(30), "enumeration");
    v
}

#[derive(Debug, Clone)]
enum TokenOp {
    Send { from: usize, to: usize, tokens: u64 },
    Freeze { caller: usize, target: usize, frozen: bool },
}

fn token_op() -> impl Strategy<Value = TokenOp> {
    prop_oneof![
        3 => (0..4usize, 0..4usize, 0..40u64).prop_map(|(from, to, tokens)| TokenOp::Send { from, to, tokens }),
        1 => (0..4usize, 0..4usize, any::<bool>()).prop_map(|(caller, target, frozen)| TokenOp::Freeze {
            caller,
            target,
            frozen
        }),
    ]
}

fn token_conservation() -> Verdict {
    let mut v = Verdict::new();
    // Party 0 is the authority that deploys the token.
    let keys: Vec<KeyPair> = (1..=4).map(|s| KeyPair::generate(Some(s))).collect();
    let mut runner = deterministic_runner(1000);
    let ops_run = std::cell::Cell::new(0usize);
    let start = Instant::now();
    let result = runner.run(
        &(1..100u64, prop::collection::vec(token_op(), 1..8)),
        |(supply, ops)| {
            let mut ledger = Ledger::new(CostTable::default(), 0);
            let wallets: Vec<Wallet> = keys.iter().cloned().map(Wallet::new).collect();
            for w in &wallets {
                ledger.create_account(w.keys.public_key).unwrap();
                ledger.fund(&w.address, WEI_PER_ETHER).unwrap();
            }
            let submit = |ledger: &mut Ledger, from: &Wallet, to: Address, call: Call| {
                let tx = from.call(ledger, to, &call, DEFAULT_GAS_PRICE_WEI, 3_000_000);
                ledger.submit_transaction(tx).unwrap()
            };
            let deploy = Call::Create(Deployment::AttributeToken {
                position: 1,
                symbol: "UD".into(),
                name: "UD token".into(),
                supply,
                approved: Vec::new(),
            });
            let token = submit(&mut ledger, &wallets[0], Address::ZERO, deploy)
                .new_contract
                .unwrap();
            let state = |ledger: &Ledger| {
                ledger
                    .contract(&token)
                    .and_then(ContractState::as_token)
                    .unwrap()
                    .clone()
            };
            for op in ops {
                let before = state(&ledger);
                match op {
                    TokenOp::Send { from, to, tokens } => {
                        let to = wallets[to].address;
                        submit(&mut ledger, &wallets[from], token, Call::SendToken { to, tokens })
                    }
                    TokenOp::Freeze { caller, target, frozen } => {
                        let target = wallets[target].address;
                        submit(
                            &mut ledger,
                            &wallets[caller],
                            token,
                            Call::FreezeAccount { target, frozen },
                        )
                    }
                };
                let after = state(&ledger);
                ops_run.set(ops_run.get() + 1);
                prop_assert_eq!(after.balances.values().sum::<u64>(), after.total_supply);
                prop_assert_eq!(after.total_supply, supply);
                for f in &before.frozen {
                    prop_assert!(after.balance_of(f) <= before.balance_of(f), "frozen account gained");
                }
            }
            Ok(())
        },
    );
    let elapsed = start.elapsed();
    match result {
        Ok(()) => v.check(
            true,
            format!("1000 sequences, {} operations through the ledger", ops_run.get()),
        ),
        Err(e) => v.check(false, format!("{e}")),
    }
    v.within(elapsed, Duration::from_secs(10), "property run");
    v
}

fn ten_block_ledger() -> Ledger {
    let mut ledger = Ledger::new(CostTable::default(), 0);
    let a = Wallet::from_seed(1);
    let b = Wallet::from_seed(2);
    for w in [&a, &b] {
        ledger.create_account(w.keys.public_key).unwrap();
        ledger.fund(&w.address, WEI_PER_ETHER).unwrap();
    }
    for h in 1..10u64 {
        for _ in 0..2 {
            let tx = a.transaction(&ledger, b.address, h as u128, None, DEFAULT_GAS_PRICE_WEI, 21_000);
            ledger.submit_transaction(tx).unwrap();
        }
        ledger.seal_block(15 * h);
    }
    ledger
}

fn tamper_evidence() -> Verdict {
    let mut v = Verdict::new();
    let ledger = ten_block_ledger();
    let tip = ledger.tip_hash();
    let export = export_jsonl(ledger.chain());
    let start = Instant::now();
    v.check(
        ledger.chain().len() == 10,
        format!("{} blocks, {} bytes", ledger.chain().len(), export.len()),
    );
    let clean = audit_jsonl(&export, Some(tip));
    v.check(
        clean == Ok(ChainVerdict::Intact),
        format!("untampered export: {clean:?}"),
    );
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let (mut broken, mut anchor_needed) = (0, 0);
    for _ in 0..100 {
        let mut bytes = export.clone().into_bytes();
        let i = (rng.next_u64() % bytes.len() as u64) as usize;
        let old = bytes[i];
        while bytes[i] == old {
            bytes[i] = rng.next_u32() as u8;
        }
        let text = String::from_utf8_lossy(&bytes);
        let anchored = audit_jsonl(&text, Some(tip));
        if matches!(anchored, Ok(ChainVerdict::BrokenAt(_))) {
            broken += 1;
        }
        if matches!(audit_jsonl(&text, None), Ok(ChainVerdict::Intact)) {
            anchor_needed += 1;
        }
    }
    let elapsed = start.elapsed();
    v.check(broken == 100, format!("{broken}/100 mutations reported BrokenAt"));
    v.note(format!("{anchor_needed} of them were caught only by the trusted tip"));
    v.within(elapsed, Duration::from_secs(5), "audit");
    v
}

fn flip(bytes: &mut [u8], at: usize, mask: u8) {
    let i = at % bytes.len();
    bytes[i] ^= mask.max(1);
}

fn crypto_round_trips() -> Verdict {
    let mut v = Verdict::new();
    let start = Instant::now();

    let data = deterministic_runner(1000).run(
        &(
            any::<[u8; 32]>(),
            prop::collection::vec(any::<u8>(), 0..256),
            any::<u64>(),
            any::<usize>(),
            any::<u8>(),
        ),
        |(key, plaintext, seed, at, mask)| {
            let key = DataKey::from_bytes(key);
            let sealed = encrypt_data(&key, &plaintext, &mut ChaCha20Rng::seed_from_u64(seed));
            prop_assert_eq!(decrypt_data(&key, &sealed).unwrap(), plaintext);
            let mut wrong = *key.as_bytes();
            flip(&mut wrong, at, mask);
            prop_assert!(decrypt_data(&DataKey::from_bytes(wrong), &sealed).is_err());
            let mut bytes = sealed.to_bytes();
            flip(&mut bytes, at, mask);
            let rejected = SealedData::from_bytes(&bytes).map_or(true, |s| decrypt_data(&key, &s).is_err());
            prop_assert!(rejected);
            Ok(())
        },
    );
    v.check(data.is_ok(), format!("encrypt/decrypt: {data:?}"));

    let keys: Vec<KeyPair> = (0..16).map(|s| KeyPair::generate(Some(s))).collect();
    let wrap = deterministic_runner(1000).run(
        &(
            any::<[u8; 32]>(),
            0..16usize,
            1..16usize,
            any::<u64>(),
            any::<usize>(),
            any::<u8>(),
        ),
        |(key, who, other, seed, at, mask)| {
            let key = DataKey::from_bytes(key);
            let recipient = &keys[who];
            let envelope = wrap_key(&recipient.public_key, &key, &mut ChaCha20Rng::seed_from_u64(seed));
            prop_assert_eq!(unwrap_key(&recipient.private_key, &envelope).unwrap(), key);
            prop_assert!(unwrap_key(&keys[(who + other) % 16].private_key, &envelope).is_err());
            let mut bytes = envelope.to_bytes();
            flip(&mut bytes, at, mask);
            let rejected =
                KeyEnvelope::from_bytes(&bytes).map_or(true, |e| unwrap_key(&recipient.private_key, &e).is_err());
            prop_assert!(rejected);
            Ok(())
        },
    );
    v.check(wrap.is_ok(), format!("wrap/unwrap: {wrap:?}"));

    let sign = deterministic_runner(1000).run(
        &(
            prop::collection::vec(any::<u8>(), 0..128),
            0..16usize,
            1..16usize,
            any::<usize>(),
            any::<u8>(),
        ),
        |(message, who, other, at, mask)| {
            let signer = &keys[who];
            let sig = signer.sign(&message);
            prop_assert!(verify(&signer.public_key, &message, &sig));
            prop_assert!(!verify(&keys[(who + other) % 16].public_key, &message, &sig));
            let mut bad = sig.0;
            flip(&mut bad, at, mask);
            prop_assert!(!verify(&signer.public_key, &message, &Signature(bad)));
            let mut altered = message.clone();
            altered.push(mask);
            prop_assert!(!verify(&signer.public_key, &altered, &sig));
            Ok(())
        },
    );
    v.check(sign.is_ok(), format!("sign/verify: {sign:?}"));
    v.within(start.elapsed(), Duration::from_secs(30), "3 x 1000 cases");
    v
}

fn determinism() -> Verdict {
    let mut v = Verdict::new();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_export("alice.json", a.path());
    run_export("alice.json", b.path());
    for file in ["trace.json", "ledger.jsonl", "costs.txt"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        v.check(x == y, format!("{file}: {} bytes, identical = {}", x.len(), x == y));
    }
    let report = TraceReport::from_json(&std::fs::read_to_string(a.path().join("trace.json")).unwrap());
    v.check(report.is_ok(), "trace export parses back");
    v
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("cost table reproduction", cost_table),
        ("worked example (Alice granted, Bob denied)", worked_example),
        ("policy oracle equivalence", policy_oracle),
        ("end-to-end coherence", end_to_end),
        ("token conservation", token_conservation),
        ("tamper evidence", tamper_evidence),
        ("crypto round-trips", crypto_round_trips),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let status = if verdict.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {}. {name} ({:.2} s)", i + 1, start.elapsed().as_secs_f64());
        for d in &verdict.details {
            println!("       {d}");
        }
        failed += usize::from(!verdict.passed);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
