//! End-to-end timing harness.
//!
//! Every phase is timed around a whole file-level operation: parse the JSON
//! inputs, run the protocol step, render the JSON output. Phases are grouped as
//! (A) anyone, (P) participant and (I) issuer. Only (A) phases depend on the
//! number of participants.

use std::fmt;
use std::time::Instant;

use rand_core::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bls::public_key;
use crate::credential::{
    aggregate_credentials, blind_sign, credential_keygen, issuer_keygen, prepare_blind_sign,
    unblind, BlindedCredential, Credential, CredentialRequest, IssuerPublicKey,
};
use crate::document::CanonicalDocument;
use crate::error::{Error, Result};
use crate::group::{PointG2, Scalar};
use crate::seal::{add_signature, create_seal, sign_seal, verify_seal, ReflowSignature, Seal};
use crate::wire::{self, IssuerKeys, ParticipantKeys};

pub const DEFAULT_PARTICIPANTS: &[usize] = &[2, 10, 50, 100];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    SessionStart,
    CollectSign,
    VerifySign,
    PKeygen,
    PRequest,
    PPubkey,
    PAggrCred,
    PSignSession,
    IKeygen,
    IPubkey,
    ISignReq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseGroup {
    Anyone,
    Participant,
    Issuer,
}

impl Phase {
    pub const ALL: [Phase; 11] = [
        Phase::SessionStart,
        Phase::CollectSign,
        Phase::VerifySign,
        Phase::PKeygen,
        Phase::PRequest,
        Phase::PPubkey,
        Phase::PAggrCred,
        Phase::PSignSession,
        Phase::IKeygen,
        Phase::IPubkey,
        Phase::ISignReq,
    ];

    pub fn group(self) -> PhaseGroup {
        match self {
            Phase::SessionStart | Phase::CollectSign | Phase::VerifySign => PhaseGroup::Anyone,
            Phase::PKeygen
            | Phase::PRequest
            | Phase::PPubkey
            | Phase::PAggrCred
            | Phase::PSignSession => PhaseGroup::Participant,
            Phase::IKeygen | Phase::IPubkey | Phase::ISignReq => PhaseGroup::Issuer,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::SessionStart => "session_start",
            Phase::CollectSign => "collect_sign",
            Phase::VerifySign => "verify_sign",
            Phase::PKeygen => "p_keygen",
            Phase::PRequest => "p_request",
            Phase::PPubkey => "p_pubkey",
            Phase::PAggrCred => "p_aggr_cred",
            Phase::PSignSession => "p_sign_session",
            Phase::IKeygen => "i_keygen",
            Phase::IPubkey => "i_pubkey",
            Phase::ISignReq => "i_sign_req",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub label: Phase,
    pub participants: usize,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub peak_memory_bytes: u64,
    pub output_bytes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Peak resident set size of this process (VmHWM), or 0 where unavailable.
pub fn peak_memory_bytes() -> u64 {
    std::fs::read_to_string("/proc/self/status")
        .ok()
        .and_then(|status| {
            status
                .lines()
                .find(|l| l.starts_with("VmHWM:"))
                .and_then(|l| l.split_whitespace().nth(1))
                .and_then(|kb| kb.parse::<u64>().ok())
        })
        .map(|kb| kb * 1024)
        .unwrap_or(0)
}

fn render<T: Serialize>(name: &str, value: &T) -> Result<String> {
    wire::render_record(name, value, None, false)
}

fn render_secret<T: Serialize>(name: &str, value: &T) -> Result<String> {
    wire::render_record(name, value, None, true)
}

fn bench_document(participants: usize) -> Result<String> {
    let doc = CanonicalDocument::from_pairs([
        ("action", "produce".to_string()),
        ("note", format!("benchmark session with {participants} signers")),
        ("resourceQuantity", "1".to_string()),
    ])?;
    serde_json::to_string(&doc).map_err(|e| Error::decode(e.to_string()))
}

/// Input files for every phase at one participant count, prepared untimed.
struct Fixture {
    n: usize,
    issuer_keys_json: String,
    vk_json: String,
    request_json: String,
    keys_json: String,
    credentials_json: String,
    credential_signature_json: String,
    pubkeys_json: String,
    doc_json: String,
    fresh_json: String,
    partial_json: String,
    last_json: String,
    complete_json: String,
}

fn prepare<R: RngCore + CryptoRng>(n: usize, rng: &mut R) -> Result<Fixture> {
    let issuer = issuer_keygen(rng);
    let vk = issuer.public_key();

    let mut keys = Vec::with_capacity(n);
    let mut first = None;
    for _ in 0..n {
        let k = ParticipantKeys {
            reflow: Scalar::random(rng),
            credential: credential_keygen(rng),
        };
        let request = prepare_blind_sign(&k.credential, rng);
        let blinded = blind_sign(&issuer, &request)?;
        let credential = aggregate_credentials(&[unblind(&blinded, &k.credential)])?;
        if first.is_none() {
            first = Some((blinded, credential));
        }
        keys.push((k, credential));
    }
    let (first_blinded, first_credential) = first.expect("n >= 1");
    let first_keys = &keys[0].0;

    let pubkeys: Vec<PointG2> = keys.iter().map(|(k, _)| public_key(&k.reflow)).collect();
    let doc_json = bench_document(n)?;
    let doc = CanonicalDocument::from_json_str(&doc_json)?;
    let fresh = create_seal(&pubkeys, &doc.canonical_bytes(), rng)?;

    // every participant signs; all but the last are folded in
    let signatures: Vec<ReflowSignature> = keys
        .iter()
        .map(|(k, cred)| sign_seal(&k.reflow, cred, &k.credential, &vk, &fresh, rng))
        .collect::<Result<_>>()?;
    let (last, rest) = signatures.split_last().expect("n >= 1");
    let mut partial = fresh.clone();
    for sig in rest {
        partial = add_signature(&partial, &vk, sig, true)?;
    }
    let complete = add_signature(&partial, &vk, last, true)?;
    if !verify_seal(&complete) {
        return Err(Error::SealNotVerified);
    }

    Ok(Fixture {
        n,
        issuer_keys_json: render_secret(wire::KEYS, &IssuerKeys { issuer })?,
        vk_json: render(wire::ISSUER_PUBLIC_KEY, &vk)?,
        request_json: render(
            wire::CREDENTIAL_REQUEST,
            &prepare_blind_sign(&first_keys.credential, rng),
        )?,
        keys_json: render_secret(wire::KEYS, first_keys)?,
        credentials_json: render_secret(wire::CREDENTIALS, &first_credential)?,
        credential_signature_json: render(wire::CREDENTIAL_SIGNATURE, &first_blinded)?,
        pubkeys_json: render(wire::REFLOW_PUBLIC_KEY_ARRAY, &pubkeys)?,
        doc_json,
        fresh_json: render(wire::REFLOW_SEAL, &fresh)?,
        partial_json: render(wire::REFLOW_SEAL, &partial)?,
        last_json: render(wire::REFLOW_SIGNATURE, last)?,
        complete_json: render(wire::REFLOW_SEAL, &complete)?,
    })
}

/// One file-level operation: parse the inputs, run the step, render the output.
fn run_phase<R: RngCore + CryptoRng>(f: &Fixture, phase: Phase, rng: &mut R) -> Result<String> {
    match phase {
        Phase::IKeygen => render_secret(wire::KEYS, &IssuerKeys { issuer: issuer_keygen(rng) }),
        Phase::IPubkey => {
            let keys: IssuerKeys = wire::parse_record(&f.issuer_keys_json, wire::KEYS)?;
            render(wire::ISSUER_PUBLIC_KEY, &keys.issuer.public_key())
        }
        Phase::ISignReq => {
            let keys: IssuerKeys = wire::parse_record(&f.issuer_keys_json, wire::KEYS)?;
            let req: CredentialRequest = wire::parse_record(&f.request_json, wire::CREDENTIAL_REQUEST)?;
            render(wire::CREDENTIAL_SIGNATURE, &blind_sign(&keys.issuer, &req)?)
        }
        Phase::PKeygen => {
            let keys = ParticipantKeys {
                reflow: Scalar::random(rng),
                credential: credential_keygen(rng),
            };
            render_secret(wire::KEYS, &keys)
        }
        Phase::PRequest => {
            let keys: ParticipantKeys = wire::parse_record(&f.keys_json, wire::KEYS)?;
            render(
                wire::CREDENTIAL_REQUEST,
                &prepare_blind_sign(&keys.credential, rng),
            )
        }
        Phase::PPubkey => {
            let keys: ParticipantKeys = wire::parse_record(&f.keys_json, wire::KEYS)?;
            render(wire::REFLOW_PUBLIC_KEY, &public_key(&keys.reflow))
        }
        Phase::PAggrCred => {
            let keys: ParticipantKeys = wire::parse_record(&f.keys_json, wire::KEYS)?;
            let sig: BlindedCredential =
                wire::parse_record(&f.credential_signature_json, wire::CREDENTIAL_SIGNATURE)?;
            let cred = aggregate_credentials(&[unblind(&sig, &keys.credential)])?;
            render_secret(wire::CREDENTIALS, &cred)
        }
        Phase::SessionStart => {
            let pks: Vec<PointG2> = wire::parse_record(&f.pubkeys_json, wire::REFLOW_PUBLIC_KEY_ARRAY)?;
            let doc = CanonicalDocument::from_json_str(&f.doc_json)?;
            render(wire::REFLOW_SEAL, &create_seal(&pks, &doc.canonical_bytes(), rng)?)
        }
        Phase::PSignSession => {
            let keys: ParticipantKeys = wire::parse_record(&f.keys_json, wire::KEYS)?;
            let cred: Credential = wire::parse_record(&f.credentials_json, wire::CREDENTIALS)?;
            let seal: Seal = wire::parse_record(&f.fresh_json, wire::REFLOW_SEAL)?;
            let vk: IssuerPublicKey = wire::parse_record(&f.vk_json, wire::ISSUER_PUBLIC_KEY)?;
            let sig = sign_seal(&keys.reflow, &cred, &keys.credential, &vk, &seal, rng)?;
            render(wire::REFLOW_SIGNATURE, &sig)
        }
        Phase::CollectSign => {
            let seal: Seal = wire::parse_record(&f.partial_json, wire::REFLOW_SEAL)?;
            let vk: IssuerPublicKey = wire::parse_record(&f.vk_json, wire::ISSUER_PUBLIC_KEY)?;
            let sig: ReflowSignature = wire::parse_record(&f.last_json, wire::REFLOW_SIGNATURE)?;
            render(wire::REFLOW_SEAL, &add_signature(&seal, &vk, &sig, true)?)
        }
        Phase::VerifySign => {
            let seal: Seal = wire::parse_record(&f.complete_json, wire::REFLOW_SEAL)?;
            if !verify_seal(&seal) {
                return Err(Error::SealNotVerified);
            }
            Ok(format!("SUCCESS\n{}", render(wire::REFLOW_SEAL, &seal)?))
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Cell {
    total: f64,
    output_bytes: u64,
    peak: u64,
}

/// Times every phase `repetitions` times for each participant count.
///
/// Fixtures for all counts are built first; repetitions then cycle through
/// every (count, phase) cell in turn, so slow stretches on the host spread
/// over all counts instead of landing on one.
pub fn run_benchmark<R: RngCore + CryptoRng>(
    participants: &[usize],
    repetitions: usize,
    rng: &mut R,
) -> Result<Vec<BenchRecord>> {
    if participants.is_empty() || participants.contains(&0) {
        return Err(Error::invalid("participant counts must be positive"));
    }
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be positive"));
    }
    let fixtures = participants
        .iter()
        .map(|&n| prepare(n, rng))
        .collect::<Result<Vec<_>>>()?;

    let mut cells = vec![[Cell::default(); Phase::ALL.len()]; fixtures.len()];
    for rep in 0..repetitions {
        for (f, row) in fixtures.iter().zip(cells.iter_mut()) {
            for (phase, cell) in Phase::ALL.iter().zip(row.iter_mut()) {
                let start = Instant::now();
                let out = run_phase(f, *phase, rng)?;
                cell.total += start.elapsed().as_secs_f64();
                cell.output_bytes = out.len() as u64;
                if rep + 1 == repetitions {
                    cell.peak = peak_memory_bytes();
                }
            }
        }
    }

    let mut records = Vec::with_capacity(fixtures.len() * Phase::ALL.len());
    for (f, row) in fixtures.iter().zip(cells) {
        let seal: Seal = wire::parse_record(&f.complete_json, wire::REFLOW_SEAL)?;
        if !verify_seal(&seal) {
            return Err(Error::SealNotVerified);
        }
        let mut block: Vec<BenchRecord> = Phase::ALL
            .iter()
            .zip(row)
            .map(|(phase, cell)| BenchRecord {
                label: *phase,
                participants: f.n,
                repetitions,
                mean_seconds: cell.total / repetitions as f64,
                peak_memory_bytes: cell.peak,
                output_bytes: cell.output_bytes,
            })
            .collect();
        block.sort_by_key(|r| r.label);
        records.extend(block);
    }
    Ok(records)
}

pub fn emit_csv(records: &[BenchRecord]) -> Result<Vec<u8>> {
    if records.is_empty() {
        return Err(Error::invalid("no benchmark records"));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        writer
            .serialize(r)
            .map_err(|e| Error::decode(format!("csv: {e}")))?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::decode(format!("csv: {e}")))
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<BenchRecord>> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .map(|row| row.map_err(|e| Error::decode(format!("csv: {e}"))))
        .collect()
}

/// Ordinary least squares of `mean_seconds` against `participants` for one label.
pub fn fit_linear_scaling(records: &[BenchRecord]) -> Result<LinearFit> {
    let label = records
        .first()
        .ok_or_else(|| Error::invalid("no records to fit"))?
        .label;
    if records.iter().any(|r| r.label != label) {
        return Err(Error::invalid("records mix several phase labels"));
    }
    let mut counts: Vec<usize> = records.iter().map(|r| r.participants).collect();
    counts.sort_unstable();
    counts.dedup();
    if counts.len() < 3 {
        return Err(Error::invalid(
            "need at least three distinct participant counts",
        ));
    }

    let n = records.len() as f64;
    let mean_x = records.iter().map(|r| r.participants as f64).sum::<f64>() / n;
    let mean_y = records.iter().map(|r| r.mean_seconds).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for r in records {
        let dx = r.participants as f64 - mean_x;
        let dy = r.mean_seconds - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = records
        .iter()
        .map(|r| {
            let e = r.mean_seconds - (intercept + slope * r.participants as f64);
            e * e
        })
        .sum();
    // a constant series is fitted exactly by a flat line
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::deterministic_rng;

    fn rec(label: Phase, n: usize, secs: f64) -> BenchRecord {
        BenchRecord {
            label,
            participants: n,
            repetitions: 1,
            mean_seconds: secs,
            peak_memory_bytes: 0,
            output_bytes: 0,
        }
    }

    #[test]
    fn exact_line_fits_perfectly() {
        let rs: Vec<_> = [2, 10, 50, 100]
            .iter()
            .map(|&n| rec(Phase::VerifySign, n, 0.003 + 0.0005 * n as f64))
            .collect();
        let fit = fit_linear_scaling(&rs).unwrap();
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
        assert!((fit.slope - 0.0005).abs() < 1e-12);
        assert!((fit.intercept - 0.003).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_flat_slope() {
        let rs: Vec<_> = [2, 10, 50].iter().map(|&n| rec(Phase::CollectSign, n, 0.25)).collect();
        let fit = fit_linear_scaling(&rs).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn fit_preconditions() {
        assert!(fit_linear_scaling(&[]).is_err());
        let two = [rec(Phase::VerifySign, 2, 1.0), rec(Phase::VerifySign, 10, 2.0)];
        assert!(fit_linear_scaling(&two).is_err());
        let mixed = [
            rec(Phase::VerifySign, 2, 1.0),
            rec(Phase::VerifySign, 10, 2.0),
            rec(Phase::CollectSign, 50, 2.0),
        ];
        assert!(fit_linear_scaling(&mixed).is_err());
    }

    #[test]
    fn csv_has_fixed_columns() {
        let r = BenchRecord {
            label: Phase::PSignSession,
            participants: 10,
            repetitions: 50,
            mean_seconds: 0.0125,
            peak_memory_bytes: 4096,
            output_bytes: 812,
        };
        let text = String::from_utf8(emit_csv(std::slice::from_ref(&r)).unwrap()).unwrap();
        assert_eq!(
            text,
            "label,participants,repetitions,mean_seconds,peak_memory_bytes,output_bytes\n\
             p_sign_session,10,50,0.0125,4096,812\n"
        );
        assert_eq!(parse_csv(text.as_bytes()).unwrap(), vec![r]);
        assert!(emit_csv(&[]).is_err());
    }

    #[test]
    fn smoke_run_covers_every_label() {
        let mut rng = deterministic_rng(7);
        let records = run_benchmark(&[2, 3], 1, &mut rng).unwrap();
        for n in [2, 3] {
            for phase in Phase::ALL {
                assert!(
                    records.iter().any(|r| r.label == phase && r.participants == n),
                    "{phase} missing for n={n}"
                );
            }
        }
        assert!(records.iter().all(|r| r.output_bytes > 0 && r.mean_seconds > 0.0));
    }

    #[test]
    fn rejects_bad_grid() {
        let mut rng = deterministic_rng(8);
        assert!(run_benchmark(&[0], 1, &mut rng).is_err());
        assert!(run_benchmark(&[2], 0, &mut rng).is_err());
        assert!(run_benchmark(&[], 1, &mut rng).is_err());
    }

    #[test]
    fn phase_labels_match_serde_names() {
        for p in Phase::ALL {
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.as_str()));
        }
    }
}
