//! Gas metering, fee arithmetic and the per-function cost report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contracts::ContractKind;

pub const WEI_PER_ETHER: u128 = 1_000_000_000_000_000_000;
pub const DEFAULT_GAS_PRICE_WEI: u128 = 1_000_000_000;
pub const DEFAULT_USD_PER_ETHER: u64 = 205;
pub const TRANSFER_GAS: u64 = 21_000;

/// Function name used for contract creation charges.
pub const CREATE: &str = "create";
/// Cost-table key for plain value transfers.
pub const TRANSFER: &str = "transfer";

/// Measured gas per contract creation and per function call.
const MEASURED: [(&str, u64); 7] = [
    ("RequestAT.create", 1_132_452),
    ("RequestKey.create", 1_022_644),
    ("AT.create", 1_752_958),
    ("AT.checkAttribute", 394_286),
    ("AT.sendToken", 123_680),
    ("DO.verifyAT", 356_070),
    ("DO.sendKey", 224_520),
];

/// Configured gas per `(contract, function)`, keyed as `"Contract.function"`
/// (or `"transfer"`). Keys absent from the table cost nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostTable(BTreeMap<String, u64>);

impl Default for CostTable {
    fn default() -> Self {
        let mut table: BTreeMap<String, u64> = MEASURED.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        table.insert(TRANSFER.into(), TRANSFER_GAS);
        CostTable(table)
    }
}

impl CostTable {
    pub fn empty() -> Self {
        CostTable(BTreeMap::new())
    }

    pub fn get(&self, contract: Option<ContractKind>, function: &str) -> u64 {
        self.0.get(&table_key(contract, function)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, contract: Option<ContractKind>, function: &str, gas: u64) {
        self.0.insert(table_key(contract, function), gas);
    }

    /// Applies `overrides` on top of `self`.
    pub fn merged(mut self, overrides: &CostTable) -> Self {
        self.0.extend(overrides.0.iter().map(|(k, v)| (k.clone(), *v)));
        self
    }
}

fn table_key(contract: Option<ContractKind>, function: &str) -> String {
    match contract {
        Some(c) => format!("{}.{}", c.name(), function),
        None => function.to_string(),
    }
}

/// One metered step of a transaction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasCharge {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub contract: Option<ContractKind>,
    pub function: String,
    pub gas: u64,
}

impl GasCharge {
    /// Row label in the cost report: `AT (C)` for creations, `sendToken (F)`
    /// for function calls.
    pub fn label(&self) -> String {
        match self.contract {
            Some(c) if self.function == CREATE => format!("{} (C)", c.name()),
            Some(_) => format!("{} (F)", self.function),
            None => self.function.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("out of gas")]
pub struct OutOfGas;

/// Accumulates charges against a transaction's gas limit. The recorded
/// charges always sum to `used`.
#[derive(Debug)]
pub struct GasMeter<'t> {
    table: &'t CostTable,
    limit: u64,
    used: u64,
    charges: Vec<GasCharge>,
}

impl<'t> GasMeter<'t> {
    pub fn new(table: &'t CostTable, limit: u64) -> Self {
        GasMeter {
            table,
            limit,
            used: 0,
            charges: Vec::new(),
        }
    }

    pub fn charge(&mut self, contract: Option<ContractKind>, function: &str) -> Result<(), OutOfGas> {
        let cost = self.table.get(contract, function);
        let remaining = self.limit - self.used;
        let (gas, result) = if cost > remaining {
            (remaining, Err(OutOfGas))
        } else {
            (cost, Ok(()))
        };
        self.used += gas;
        self.charges.push(GasCharge {
            contract,
            function: function.to_string(),
            gas,
        });
        result
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn into_charges(self) -> Vec<GasCharge> {
        self.charges
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cost {
    pub ether: BigRational,
    pub usd: BigRational,
}

/// `ether = gas_used * gas_price_wei / 1e18`, `usd = ether * usd_per_ether`.
pub fn compute_cost(gas_used: u64, gas_price_wei: u128, usd_per_ether: &BigRational) -> Cost {
    let wei = BigInt::from(gas_used) * BigInt::from(gas_price_wei);
    let ether = BigRational::new(wei, BigInt::from(WEI_PER_ETHER));
    let usd = &ether * usd_per_ether;
    Cost { ether, usd }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational {0:?}: expected a non-negative decimal or fraction such as 205, 204.5 or 409/2")]
pub struct RationalParseError(pub String);

/// Parses `205`, `204.5` or `409/2`. Negative values are rejected.
pub fn parse_rational(s: &str) -> Result<BigRational, RationalParseError> {
    let err = || RationalParseError(s.to_string());
    let t = s.trim();
    let digits = |x: &str| !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit());
    if let Some((n, d)) = t.split_once('/') {
        if !digits(n.trim()) || !digits(d.trim()) {
            return Err(err());
        }
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n.trim().parse().map_err(|_| err())?, d));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if !digits(int) || !(frac.is_empty() || digits(frac)) {
        return Err(err());
    }
    let numer: BigInt = format!("{int}{frac}").parse().map_err(|_| err())?;
    let denom = BigInt::from(10u32).pow(frac.len() as u32);
    Ok(BigRational::new(numer, denom))
}

/// Renders a non-negative rational rounded half-up to `max_frac` places,
/// keeping at least `min_frac` places.
pub fn format_decimal(value: &BigRational, min_frac: usize, max_frac: usize) -> String {
    let sign = if value.is_negative() { "-" } else { "" };
    let scale = BigInt::from(10u32).pow(max_frac as u32);
    let scaled = value.abs() * BigRational::from_integer(scale.clone());
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let rounded = if r * 2 >= *scaled.denom() { q + 1 } else { q };
    let (int, frac) = rounded.div_rem(&scale);
    let mut frac = format!("{:0>width$}", frac.to_string(), width = max_frac);
    while frac.len() > min_frac && frac.ends_with('0') {
        frac.pop();
    }
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Ether with at least nine decimals, as in the reference cost table.
pub fn format_ether(value: &BigRational) -> String {
    format_decimal(value, 9, 18)
}

/// US dollars to three decimals.
pub fn format_usd(value: &BigRational) -> String {
    format_decimal(value, 3, 3)
}

/// One row of the cost report: all charges sharing a label, a per-call gas
/// figure and a gas price. Gas, ether and USD are per call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostRow {
    pub label: String,
    pub calls: u64,
    pub gas_used: u64,
    pub gas_price_wei: u128,
    pub cost_ether: String,
    pub usd: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub usd_per_ether: String,
    pub rows: Vec<CostRow>,
    pub total_gas: u64,
    pub total_fee_wei: u128,
    pub total_ether: String,
    pub total_usd: String,
}

/// Reference row order; anything else follows alphabetically.
const ROW_ORDER: [&str; 7] = [
    "RequestAT (C)",
    "RequestKey (C)",
    "AT (C)",
    "checkAttribute (F)",
    "sendToken (F)",
    "verifyAT (F)",
    "sendKey (F)",
];

impl CostReport {
    /// Aggregates charges from `(charges, gas_price_wei)` pairs, one pair per
    /// receipt. Zero-gas charges get no row.
    pub fn build<'a, I>(receipts: I, usd_per_ether: &BigRational) -> CostReport
    where
        I: IntoIterator<Item = (&'a [GasCharge], u128)>,
    {
        let mut groups: BTreeMap<(usize, String, u64, u128), u64> = BTreeMap::new();
        let mut total_gas = 0u64;
        let mut total_fee_wei = 0u128;
        for (charges, price) in receipts {
            for c in charges.iter().filter(|c| c.gas > 0) {
                let label = c.label();
                let rank = ROW_ORDER.iter().position(|l| *l == label).unwrap_or(ROW_ORDER.len());
                *groups.entry((rank, label, c.gas, price)).or_default() += 1;
                total_gas += c.gas;
                total_fee_wei += c.gas as u128 * price;
            }
        }
        let rows = groups
            .into_iter()
            .map(|((_, label, gas, price), calls)| {
                let cost = compute_cost(gas, price, usd_per_ether);
                CostRow {
                    label,
                    calls,
                    gas_used: gas,
                    gas_price_wei: price,
                    cost_ether: format_ether(&cost.ether),
                    usd: format_usd(&cost.usd),
                }
            })
            .collect();
        let total_ether = BigRational::new(BigInt::from(total_fee_wei), BigInt::from(WEI_PER_ETHER));
        let total_usd = &total_ether * usd_per_ether;
        CostReport {
            usd_per_ether: format_decimal(usd_per_ether, 0, 6),
            rows,
            total_gas,
            total_fee_wei,
            total_ether: format_ether(&total_ether),
            total_usd: format_usd(&total_usd),
        }
    }

    /// Aligned text table: Contract/Function, Gas Used, Cost(ether), USD.
    pub fn render(&self) -> String {
        let mut lines: Vec<[String; 4]> = vec![[
            "Contract/Function".into(),
            "Gas Used".into(),
            "Cost(ether)".into(),
            "USD ($)".into(),
        ]];
        for r in &self.rows {
            let label = if r.calls > 1 {
                format!("{} x{}", r.label, r.calls)
            } else {
                r.label.clone()
            };
            lines.push([label, r.gas_used.to_string(), r.cost_ether.clone(), r.usd.clone()]);
        }
        lines.push([
            "Total".into(),
            self.total_gas.to_string(),
            self.total_ether.clone(),
            self.total_usd.clone(),
        ]);
        let widths: Vec<usize> = (0..4)
            .map(|i| lines.iter().map(|l| l[i].len()).max().unwrap_or(0))
            .collect();
        let rule = widths.iter().map(|w| "-".repeat(w + 2)).collect::<Vec<_>>().join("+");
        let mut out = String::new();
        for (i, l) in lines.iter().enumerate() {
            if i == 1 || i == lines.len() - 1 {
                writeln!(out, "+{rule}+").unwrap();
            }
            writeln!(
                out,
                "| {:<w0$} | {:>w1$} | {:>w2$} | {:>w3$} |",
                l[0],
                l[1],
                l[2],
                l[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            )
            .unwrap();
        }
        writeln!(out, "(1 ether = {} USD)", self.usd_per_ether).unwrap();
        out
    }
}

/// Lossy conversion for display and comparisons in tests.
pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}
