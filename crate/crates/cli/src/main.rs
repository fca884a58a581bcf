//! `reflow`: file-based front end for credentials, seals and material passports.
//!
//! Every command reads JSON envelopes and writes one envelope to `--out`, or to
//! stdout when no path is given. Diagnostics go to stderr.

mod error;
mod files;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reflow::bench::{self, Phase};
use reflow::bls::{public_key, SigningKeypair};
use reflow::credential::{
    aggregate_credentials, aggregate_issuer_keys, blind_sign, credential_keygen, issuer_keygen,
    pop_sign, pop_verify, prepare_blind_sign, unblind, BlindedCredential, Credential,
    CredentialRequest, IssuerPublicKey,
};
use reflow::group::{deterministic_rng, entropy_rng, PointG1, PointG2};
use reflow::passport::{
    aggregate_seal_identities, create_material_passport_for_identity, derive_child_identity,
    reflow_identity, verify_material_passport, verify_track_and_trace, MaterialPassport,
};
use reflow::seal::{
    add_signature, close_seal, compare_identity, create_seal_with_identity, sign_seal,
    verify_seal, ReflowSignature, Seal,
};
use reflow::wire::{self, IssuerKeys, ParticipantKeys, PopSignature};

use error::{CliError, CliResult};
use files::{read_document, read_record, read_text, Output};

#[derive(Parser)]
#[command(name = "reflow", version)]
#[command(about = "Credential-gated multi-party signatures and material passports")]
struct Cli {
    /// Write the result here instead of stdout
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    /// Overwrite an existing output file
    #[arg(long, global = true)]
    force: bool,

    /// Actor name recorded in the output envelope
    #[arg(long, global = true)]
    actor: Option<String>,

    /// Deterministic randomness for reproducible test runs. Never use for real keys.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create an issuer keypair (secret)
    IssuerKeygen,

    /// Export the issuer public key
    IssuerPubkey {
        #[arg(long)]
        keys: PathBuf,
    },

    /// Sum several issuer public keys into one verification key
    AggregateIssuerKeys {
        #[arg(required = true)]
        keys: Vec<PathBuf>,
    },

    /// Create the reflow signing key and the credential key (secret)
    ParticipantKeygen,

    /// Export the participant's reflow public key
    ParticipantPubkey {
        #[arg(long)]
        keys: PathBuf,
    },

    /// Blinded credential request over the participant's credential key
    CredentialRequest {
        #[arg(long)]
        keys: PathBuf,
    },

    /// Issuer side: check the request proof and sign it
    CredentialSign {
        /// Issuer secret keys
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        request: PathBuf,
    },

    /// Unblind and combine credential signatures into credentials (secret)
    AggregateCredentials {
        #[arg(long)]
        keys: PathBuf,
        #[arg(required = true)]
        signatures: Vec<PathBuf>,
    },

    /// Collect reflow public key files into a public key array
    PublicKeyArray {
        #[arg(required = true)]
        keys: Vec<PathBuf>,
    },

    /// Collect seals, or the seals of material passports, into a seal array
    SealArray {
        #[arg(required = true)]
        seals: Vec<PathBuf>,
    },

    /// Hash a document to its reflow identity
    ReflowIdentity {
        #[arg(long)]
        document: PathBuf,
    },

    /// Open a signing session for a public key array over a document
    CreateSeal {
        #[arg(long)]
        pubkeys: PathBuf,
        #[arg(long)]
        document: PathBuf,
    },

    /// Participant signature on a seal
    SignSeal {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        credentials: PathBuf,
        /// Issuer public key; repeat to aggregate several issuers
        #[arg(long = "issuer-key", required = true)]
        issuer_keys: Vec<PathBuf>,
        #[arg(long)]
        seal: PathBuf,
    },

    /// Check a signature's credential and fingerprint, then fold it into the seal
    AddSignature {
        #[arg(long)]
        seal: PathBuf,
        #[arg(long)]
        signature: PathBuf,
        #[arg(long = "issuer-key", required = true)]
        issuer_keys: Vec<PathBuf>,
        /// Accept a signature whose fingerprint is already in the seal
        #[arg(long)]
        no_fingerprint_check: bool,
    },

    /// Print SUCCESS and the seal if every participant has signed
    VerifySeal {
        #[arg(long)]
        seal: PathBuf,
    },

    /// Mark a verified seal as closed and drop its fingerprints
    CloseSeal {
        #[arg(long)]
        seal: PathBuf,
    },

    /// Check that a seal was opened over a document
    CompareIdentity {
        #[arg(long)]
        seal: PathBuf,
        #[arg(long)]
        document: PathBuf,
    },

    /// Sum the identities of a seal array
    AggregateIdentities {
        #[arg(long)]
        seals: PathBuf,
    },

    /// Create a single-agent material passport for a document
    PassportCreate {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        credentials: PathBuf,
        #[arg(long = "issuer-key", required = true)]
        issuer_keys: Vec<PathBuf>,
        #[arg(long)]
        document: PathBuf,
        /// Seal array of parent passports; their identities are folded in
        #[arg(long)]
        parents: Option<PathBuf>,
    },

    /// Verify a material passport against its document
    PassportVerify {
        #[arg(long)]
        passport: PathBuf,
        #[arg(long)]
        document: PathBuf,
        #[arg(long = "issuer-key", required = true)]
        issuer_keys: Vec<PathBuf>,
        #[arg(long)]
        parents: Option<PathBuf>,
    },

    /// Sign a challenge nonce with the credential key
    PopSign {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        nonce: String,
    },

    /// Check a proof-of-possession answer
    PopVerify {
        #[arg(long)]
        pop: PathBuf,
    },

    /// Time every phase of the protocol and write CSV
    Bench {
        /// Participant counts, comma separated
        #[arg(long, value_delimiter = ',', default_values_t = bench::DEFAULT_PARTICIPANTS.to_vec())]
        participants: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        /// CSV output path (defaults to --out or stdout)
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also run 1000 participants
        #[arg(long)]
        with_1000: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("reflow: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut rng = match cli.seed {
        Some(seed) => deterministic_rng(seed),
        None => entropy_rng(),
    };
    let out = Output {
        path: cli.out,
        force: cli.force,
        actor: cli.actor,
    };

    match cli.command {
        Command::IssuerKeygen => {
            let keys = IssuerKeys {
                issuer: issuer_keygen(&mut rng),
            };
            out.record(wire::KEYS, &keys, true)
        }
        Command::IssuerPubkey { keys } => {
            let keys: IssuerKeys = read_record(&keys, wire::KEYS)?;
            out.record(wire::ISSUER_PUBLIC_KEY, &keys.issuer.public_key(), false)
        }
        Command::AggregateIssuerKeys { keys } => {
            out.record(wire::ISSUER_PUBLIC_KEY, &issuer_key(&keys)?, false)
        }
        Command::ParticipantKeygen => {
            let keys = ParticipantKeys {
                reflow: SigningKeypair::generate(&mut rng).sk,
                credential: credential_keygen(&mut rng),
            };
            out.record(wire::KEYS, &keys, true)
        }
        Command::ParticipantPubkey { keys } => {
            let keys: ParticipantKeys = read_record(&keys, wire::KEYS)?;
            out.record(wire::REFLOW_PUBLIC_KEY, &public_key(&keys.reflow), false)
        }
        Command::CredentialRequest { keys } => {
            let keys: ParticipantKeys = read_record(&keys, wire::KEYS)?;
            let req = prepare_blind_sign(&keys.credential, &mut rng);
            out.record(wire::CREDENTIAL_REQUEST, &req, false)
        }
        Command::CredentialSign { keys, request } => {
            let keys: IssuerKeys = read_record(&keys, wire::KEYS)?;
            let req: CredentialRequest = read_record(&request, wire::CREDENTIAL_REQUEST)?;
            out.record(wire::CREDENTIAL_SIGNATURE, &blind_sign(&keys.issuer, &req)?, false)
        }
        Command::AggregateCredentials { keys, signatures } => {
            let keys: ParticipantKeys = read_record(&keys, wire::KEYS)?;
            let creds = signatures
                .iter()
                .map(|p| {
                    let sig: BlindedCredential = read_record(p, wire::CREDENTIAL_SIGNATURE)?;
                    Ok(unblind(&sig, &keys.credential))
                })
                .collect::<CliResult<Vec<Credential>>>()?;
            out.record(wire::CREDENTIALS, &aggregate_credentials(&creds)?, true)
        }
        Command::PublicKeyArray { keys } => {
            let pks = keys
                .iter()
                .map(|p| read_record::<PointG2>(p, wire::REFLOW_PUBLIC_KEY))
                .collect::<CliResult<Vec<_>>>()?;
            out.record(wire::REFLOW_PUBLIC_KEY_ARRAY, &pks, false)
        }
        Command::SealArray { seals } => {
            let seals = seals
                .iter()
                .map(|p| read_seal_or_passport(p))
                .collect::<CliResult<Vec<_>>>()?;
            out.record(wire::REFLOW_SEAL_ARRAY, &seals, false)
        }
        Command::ReflowIdentity { document } => {
            let doc = read_document(&document)?;
            out.record(wire::REFLOW_IDENTITY, &reflow_identity(&doc), false)
        }
        Command::CreateSeal { pubkeys, document } => {
            let pks: Vec<PointG2> = read_record(&pubkeys, wire::REFLOW_PUBLIC_KEY_ARRAY)?;
            let doc = read_document(&document)?;
            let seal = create_seal_with_identity(&pks, reflow_identity(&doc), &mut rng)?;
            out.record(wire::REFLOW_SEAL, &seal, false)
        }
        Command::SignSeal {
            keys,
            credentials,
            issuer_keys,
            seal,
        } => {
            let keys: ParticipantKeys = read_record(&keys, wire::KEYS)?;
            let cred: Credential = read_record(&credentials, wire::CREDENTIALS)?;
            let vk = issuer_key(&issuer_keys)?;
            let seal: Seal = read_record(&seal, wire::REFLOW_SEAL)?;
            let sig = sign_seal(&keys.reflow, &cred, &keys.credential, &vk, &seal, &mut rng)?;
            out.record(wire::REFLOW_SIGNATURE, &sig, false)
        }
        Command::AddSignature {
            seal,
            signature,
            issuer_keys,
            no_fingerprint_check,
        } => {
            let seal: Seal = read_record(&seal, wire::REFLOW_SEAL)?;
            let sig: ReflowSignature = read_record(&signature, wire::REFLOW_SIGNATURE)?;
            let vk = issuer_key(&issuer_keys)?;
            let next = add_signature(&seal, &vk, &sig, !no_fingerprint_check)?;
            out.record(wire::REFLOW_SEAL, &next, false)
        }
        Command::VerifySeal { seal } => {
            let seal: Seal = read_record(&seal, wire::REFLOW_SEAL)?;
            if !verify_seal(&seal) {
                return Err(CliError::Rejected("seal is not signed by every participant".into()));
            }
            let body = wire::render_record(wire::REFLOW_SEAL, &seal, out.actor.as_deref(), false)?;
            out.text(&format!("SUCCESS\n{body}"))
        }
        Command::CloseSeal { seal } => {
            let seal: Seal = read_record(&seal, wire::REFLOW_SEAL)?;
            out.record(wire::REFLOW_SEAL, &close_seal(&seal)?, false)
        }
        Command::CompareIdentity { seal, document } => {
            let seal: Seal = read_record(&seal, wire::REFLOW_SEAL)?;
            let doc = read_document(&document)?;
            if !compare_identity(&seal, &doc) {
                return Err(CliError::Rejected("seal identity differs from the document".into()));
            }
            out.text("SUCCESS\n")
        }
        Command::AggregateIdentities { seals } => {
            let seals: Vec<Seal> = read_record(&seals, wire::REFLOW_SEAL_ARRAY)?;
            out.record(wire::SUM_VALUE, &aggregate_seal_identities(&seals)?, false)
        }
        Command::PassportCreate {
            keys,
            credentials,
            issuer_keys,
            document,
            parents,
        } => {
            let keys: ParticipantKeys = read_record(&keys, wire::KEYS)?;
            let cred: Credential = read_record(&credentials, wire::CREDENTIALS)?;
            let vk = issuer_key(&issuer_keys)?;
            let doc = read_document(&document)?;
            let identity: PointG1 = match &parents {
                None => reflow_identity(&doc),
                Some(p) => derive_child_identity(&read_record::<Vec<Seal>>(p, wire::REFLOW_SEAL_ARRAY)?, &doc)?,
            };
            let mp = create_material_passport_for_identity(
                &keys.reflow,
                &cred,
                &keys.credential,
                &vk,
                identity,
                &mut rng,
            )?;
            out.record(wire::MATERIAL_PASSPORT, &mp, false)
        }
        Command::PassportVerify {
            passport,
            document,
            issuer_keys,
            parents,
        } => {
            let mp: MaterialPassport = read_record(&passport, wire::MATERIAL_PASSPORT)?;
            let doc = read_document(&document)?;
            let vk = issuer_key(&issuer_keys)?;
            let valid = match &parents {
                None => verify_material_passport(&doc, &vk, &mp),
                Some(p) => {
                    let seals: Vec<Seal> = read_record(p, wire::REFLOW_SEAL_ARRAY)?;
                    verify_track_and_trace(&seals, &mp, &doc, &vk)?
                }
            };
            if !valid {
                return Err(CliError::Rejected(
                    "passport does not match the document, its parents or the issuer key".into(),
                ));
            }
            out.text("SUCCESS\n")
        }
        Command::PopSign { keys, nonce } => {
            let keys: ParticipantKeys = read_record(&keys, wire::KEYS)?;
            let pop = PopSignature {
                signature: pop_sign(&keys.credential, nonce.as_bytes())?,
                gamma: keys.credential.gamma,
                nonce,
            };
            out.record(wire::POP_SIGNATURE, &pop, false)
        }
        Command::PopVerify { pop } => {
            let pop: PopSignature = read_record(&pop, wire::POP_SIGNATURE)?;
            if !pop_verify(&pop.gamma, pop.nonce.as_bytes(), &pop.signature)? {
                return Err(CliError::Rejected("proof of possession does not verify".into()));
            }
            out.text("SUCCESS\n")
        }
        Command::Bench {
            mut participants,
            reps,
            csv,
            with_1000,
        } => {
            if with_1000 && !participants.contains(&1000) {
                participants.push(1000);
            }
            let records = bench::run_benchmark(&participants, reps, &mut rng)?;
            for label in [Phase::CollectSign, Phase::VerifySign] {
                let rows: Vec<_> = records.iter().filter(|r| r.label == label).cloned().collect();
                if let Ok(fit) = bench::fit_linear_scaling(&rows) {
                    eprintln!(
                        "{label}: slope {:.3e} s/participant, intercept {:.3e} s, r2 {:.4}",
                        fit.slope, fit.intercept, fit.r_squared
                    );
                }
            }
            let bytes = bench::emit_csv(&records)?;
            let target = Output {
                path: csv.or(out.path),
                force: out.force,
                actor: None,
            };
            target.bytes(&bytes)
        }
    }
}

/// Reads one or more issuer public key files and sums them.
fn issuer_key(paths: &[PathBuf]) -> CliResult<IssuerPublicKey> {
    let keys = paths
        .iter()
        .map(|p| read_record(p, wire::ISSUER_PUBLIC_KEY))
        .collect::<CliResult<Vec<IssuerPublicKey>>>()?;
    Ok(aggregate_issuer_keys(&keys)?)
}

fn read_seal_or_passport(path: &Path) -> CliResult<Seal> {
    let text = read_text(path)?;
    if let Ok(seal) = wire::parse_record::<Seal>(&text, wire::REFLOW_SEAL) {
        return Ok(seal);
    }
    wire::parse_record::<MaterialPassport>(&text, wire::MATERIAL_PASSPORT)
        .map(|mp| mp.seal)
        .map_err(|_| {
            CliError::Core(reflow::Error::Decode(format!(
                "{}: neither a reflow seal nor a material passport",
                path.display()
            )))
        })
}
