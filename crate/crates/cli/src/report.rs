//! Parameter reports over the three schemes, written as CSV or JSON.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use mrlwe::params::{cost_model, select_parameters, Scenario as CostScenario, Variate};

use crate::config::{ExperimentConfig, Scenario};
use crate::experiment::{format_degrees, RunRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRow {
    pub scheme: String,
    pub degrees: String,
    pub n: u64,
    pub log2_bound: f64,
    pub log2_q: u32,
    pub q: u64,
    pub delta: f64,
    pub bit_security: f64,
    pub ciphertexts: u64,
    /// Total size of the encrypted inputs.
    pub encrypted_bits: u64,
}

/// Encrypted input count for `variate` under `cfg`.
fn ciphertexts(cfg: &ExperimentConfig, variate: Variate) -> Result<u64> {
    let (n, f, i) = (cfg.n as u64, cfg.f as u64, cfg.pair_count() as u64);
    if cfg.scenario == Scenario::Volume {
        return Ok(match variate {
            Variate::Uni => (cfg.ny * cfg.nz) as u64,
            Variate::Bi => cfg.nz as u64,
            Variate::Tri => 1,
        });
    }
    if cfg.public_kernel || cfg.scenario == Scenario::Sobel {
        let rows = cfg.signal_side() as u64;
        return Ok(match variate {
            Variate::Uni => rows * i,
            Variate::Bi => i,
            Variate::Tri => 1,
        });
    }
    if cfg.scenario == Scenario::Blocks {
        return Ok(match variate {
            Variate::Uni => (cfg.block as u64 + f) * i,
            Variate::Bi => 2 * i,
            Variate::Tri => 2,
        });
    }
    let model = match cfg.scenario {
        Scenario::Correlate => cost_model(CostScenario::Correlation, n, f, i, cfg.slack)?,
        _ => cost_model(CostScenario::Filtering, n, f, i, cfg.slack)?,
    };
    Ok(model.get(variate).ciphertexts)
}

pub fn params_report(cfg: &ExperimentConfig) -> Result<Vec<ParamsRow>> {
    cfg.validate_params()?;
    Variate::ALL
        .iter()
        .map(|&v| {
            let degrees = cfg.degrees(v);
            let choice = select_parameters(cfg.t, cfg.sigma, &degrees, cfg.depth, cfg.effective_adds(v), cfg.epsilon)?;
            let cts = ciphertexts(cfg, v)?;
            Ok(ParamsRow {
                scheme: v.label().into(),
                degrees: format_degrees(&degrees),
                n: choice.n,
                log2_bound: choice.bound.log2,
                log2_q: choice.log2_q,
                q: choice.q,
                delta: choice.security.delta,
                bit_security: choice.security.bit_sec,
                ciphertexts: cts,
                encrypted_bits: cts * 2 * choice.n * choice.log2_q as u64,
            })
        })
        .collect()
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

/// Writes JSON for a `.json` path and CSV otherwise.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_string_pretty(rows)?
    } else {
        to_csv(rows)?
    };
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn print_params(rows: &[ParamsRow]) {
    println!(
        "{:<7} {:>14} {:>9} {:>7} {:>20} {:>11} {:>10} {:>5} {:>14}",
        "scheme", "degrees", "n", "log2 q", "q", "delta", "bits", "cts", "encrypted MB"
    );
    for r in rows {
        println!(
            "{:<7} {:>14} {:>9} {:>7} {:>20} {:>11.7} {:>10.2} {:>5} {:>14.3}",
            r.scheme,
            r.degrees,
            r.n,
            r.log2_q,
            r.q,
            r.delta,
            r.bit_security,
            r.ciphertexts,
            r.encrypted_bits as f64 / 8e6
        );
    }
}

pub fn print_run(r: &RunRecord) {
    println!(
        "{} {} ring {} (n = {}, q = {}, {} bits): {} pairs, {} ciphertexts, {} products, {} plain products, {} additions",
        r.scenario, r.scheme, r.degrees, r.n, r.q, r.log2_q, r.pairs, r.ciphertexts, r.products, r.plain_products, r.additions
    );
    println!(
        "  security {:.1} bits (delta {:.7}); noise {:.1} of {:.1} bits; mismatches {}",
        r.bit_security, r.delta, r.max_noise_bits, r.noise_budget_bits, r.mismatches
    );
    println!(
        "  keygen {:.1} ms, encrypt {:.1} ms, evaluate {:.1} ms, decrypt {:.1} ms",
        r.keygen_ms, r.encrypt_ms, r.eval_ms, r.decrypt_ms
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_agree() {
        let cfg = ExperimentConfig::parse("scenario = correlate\nn = 8\nimages = 4\nt = 257\n").unwrap();
        let rows = params_report(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        let from_json: Vec<ParamsRow> = serde_json::from_str(&serde_json::to_string(&rows).unwrap()).unwrap();
        let from_csv: Vec<ParamsRow> = from_csv(&to_csv(&rows).unwrap()).unwrap();
        assert_eq!(from_json, from_csv);
        assert_eq!(from_json, rows);
        let cts: Vec<u64> = rows.iter().map(|r| r.ciphertexts).collect();
        assert_eq!(cts, vec![2 * 8 * 4, 2 * 4, 2]);
    }
}
