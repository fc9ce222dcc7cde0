//! Decision proofs: a fixed circuit over three public and two private
//! inputs, a simulated trusted setup, prover, verifier, and a byte-level
//! leak audit.
//!
//! The backend is a simulation-grade authenticator: proofs bind a shared
//! setup secret to the circuit id, the plaintext public inputs, and a
//! hiding commitment over the witness. The public surface (setup / prove /
//! verify, public/private input split, constant-size serialization) is
//! what a real proving backend would keep; cryptographic soundness against
//! an adversary holding the proving key is out of scope.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::strategy::PublicParams;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ZkError {
    #[error("witness does not satisfy the decision circuit")]
    ConstraintUnsatisfied,
    #[error("buy_sell_flag must be 0 or 1, got {0}")]
    BadFlag(u8),
    #[error("bound percentage {0} outside [-1, 30]")]
    BadBound(i64),
}

/// Identifier of the single deployed decision circuit, zero-padded to the
/// 32-byte field in keys and proofs.
pub const CIRCUIT_NAME: &str = "bollinger-v1";

/// Human-readable description of what the verifier checks, published next
/// to the verification key so users can audit the deployed circuit.
pub const CIRCUIT_DESCRIPTION: &str = "\
decision-circuit bollinger-v1
  public  currentPrice
  public  upperBollingerBand
  public  lowerBollingerBand
  private buy_sell_flag        (1 = buy, 0 = sell)
  private boundPercentage
  output  bool:
    if buy_sell_flag == 1:
      currentPrice <  (lowerBollingerBand / 100) * (100 + boundPercentage)
    else:
      currentPrice >  (upperBollingerBand / 100) * (100 - boundPercentage)
  division truncates toward zero
";

/// Serialized proof layout:
/// `[circuit_id:32][price:8][upper:8][lower:8][commitment:32][tag:32]`,
/// little-endian integers. Constant length regardless of the witness.
pub const PROOF_LEN: usize = 120;

/// Byte range of the plaintext (non-hiding) region of a serialized proof.
pub const PLAINTEXT_RANGE: std::ops::Range<usize> = 0..56;
/// Byte range of the witness commitment in a serialized proof.
pub const COMMITMENT_RANGE: std::ops::Range<usize> = 56..88;

pub fn circuit_id() -> [u8; 32] {
    let mut id = [0u8; 32];
    id[..CIRCUIT_NAME.len()].copy_from_slice(CIRCUIT_NAME.as_bytes());
    id
}

/// The private side of a decision: which way to trade, and the threshold
/// percentage (`l` for buys, `u` for sells) in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub buy_sell_flag: u8,
    pub bound_percentage: i64,
}

impl Witness {
    pub fn new(buy_sell_flag: u8, bound_percentage: i64) -> Result<Self, ZkError> {
        if buy_sell_flag > 1 {
            return Err(ZkError::BadFlag(buy_sell_flag));
        }
        if !(-1..=30).contains(&bound_percentage) {
            return Err(ZkError::BadBound(bound_percentage));
        }
        Ok(Self { buy_sell_flag, bound_percentage })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvingKey(Vec<u8>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationKey(Vec<u8>);

const PK_PREFIX: &[u8; 3] = b"pk1";
const VK_PREFIX: &[u8; 3] = b"vk1";

impl ProvingKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    fn secret(&self) -> Option<&[u8]> {
        self.0.strip_prefix(PK_PREFIX)
    }
}

impl VerificationKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    fn parts(&self) -> Option<(&[u8], &[u8])> {
        let body = self.0.strip_prefix(VK_PREFIX)?;
        (body.len() == 64).then(|| body.split_at(32))
    }

    pub fn circuit_id(&self) -> Option<&[u8]> {
        self.parts().map(|(_, id)| id)
    }
}

/// Keys from one simulated setup ceremony, plus the circuit source they
/// were generated from.
#[derive(Debug, Clone)]
pub struct SetupKeys {
    pub proving: ProvingKey,
    pub verification: VerificationKey,
    pub circuit_source: &'static str,
}

/// Deterministically derive a key pair from a seed. Keys from different
/// seeds share nothing and reject each other's proofs.
pub fn setup(rng_seed: &[u8]) -> SetupKeys {
    let mut hasher = Sha256::new();
    hasher.update(b"zktrade.setup.v1");
    hasher.update(rng_seed);
    let secret: [u8; 32] = hasher.finalize().into();

    let mut pk = PK_PREFIX.to_vec();
    pk.extend_from_slice(&secret);
    let mut vk = VK_PREFIX.to_vec();
    vk.extend_from_slice(&secret);
    vk.extend_from_slice(&circuit_id());
    SetupKeys {
        proving: ProvingKey(pk),
        verification: VerificationKey(vk),
        circuit_source: CIRCUIT_DESCRIPTION,
    }
}

/// A decision proof: plaintext public inputs, a hiding commitment over the
/// witness, and the authenticator binding both to the circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub public_inputs: PublicParams,
    pub witness_commitment: [u8; 32],
    pub binding_tag: [u8; 32],
}

/// Evaluate the decision circuit: does the (public, private) input pair
/// satisfy the trading rule the flag claims?
pub fn circuit_eval(p: &PublicParams, w: &Witness) -> bool {
    if w.buy_sell_flag == 1 {
        p.price < (p.lower / 100) * (100 + w.bound_percentage)
    } else {
        p.price > (p.upper / 100) * (100 - w.bound_percentage)
    }
}

fn commit_witness(w: &Witness, nonce: &[u8; 16]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"zktrade.witness.v1");
    hasher.update([w.buy_sell_flag]);
    hasher.update(w.bound_percentage.to_le_bytes());
    hasher.update(nonce);
    hasher.finalize().into()
}

fn binding_tag(secret: &[u8], p: &PublicParams, commitment: &[u8; 32]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"zktrade.bind.v1");
    hasher.update(secret);
    hasher.update(circuit_id());
    hasher.update(p.price.to_le_bytes());
    hasher.update(p.upper.to_le_bytes());
    hasher.update(p.lower.to_le_bytes());
    hasher.update(commitment);
    hasher.finalize().into()
}

/// Prove a decision. Fails with `ConstraintUnsatisfied` when the witness
/// does not actually satisfy the circuit on these public inputs.
pub fn prove(
    pk: &ProvingKey,
    p: &PublicParams,
    w: &Witness,
    nonce: &[u8; 16],
) -> Result<Proof, ZkError> {
    Witness::new(w.buy_sell_flag, w.bound_percentage)?;
    if !circuit_eval(p, w) {
        return Err(ZkError::ConstraintUnsatisfied);
    }
    let secret = pk.secret().ok_or(ZkError::ConstraintUnsatisfied)?;
    let commitment = commit_witness(w, nonce);
    Ok(Proof {
        public_inputs: *p,
        witness_commitment: commitment,
        binding_tag: binding_tag(secret, p, &commitment),
    })
}

/// True iff the binding tag authenticates (circuit id, public inputs,
/// commitment) under the key's secret. Malformed keys verify nothing.
pub fn verify(vk: &VerificationKey, proof: &Proof) -> bool {
    let Some((secret, id)) = vk.parts() else {
        return false;
    };
    if id != circuit_id() {
        return false;
    }
    binding_tag(secret, &proof.public_inputs, &proof.witness_commitment) == proof.binding_tag
}

impl Proof {
    pub fn to_bytes(&self) -> [u8; PROOF_LEN] {
        let mut out = [0u8; PROOF_LEN];
        out[0..32].copy_from_slice(&circuit_id());
        out[32..40].copy_from_slice(&self.public_inputs.price.to_le_bytes());
        out[40..48].copy_from_slice(&self.public_inputs.upper.to_le_bytes());
        out[48..56].copy_from_slice(&self.public_inputs.lower.to_le_bytes());
        out[56..88].copy_from_slice(&self.witness_commitment);
        out[88..120].copy_from_slice(&self.binding_tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != PROOF_LEN || bytes[0..32] != circuit_id() {
            return None;
        }
        let int = |r: std::ops::Range<usize>| i64::from_le_bytes(bytes[r].try_into().unwrap());
        Some(Self {
            public_inputs: PublicParams {
                price: int(32..40),
                upper: int(40..48),
                lower: int(48..56),
            },
            witness_commitment: bytes[56..88].try_into().unwrap(),
            binding_tag: bytes[88..120].try_into().unwrap(),
        })
    }
}

/// What a byte-level comparison of two proof populations (buys vs sells in
/// practice — the auditor only labels the groups, the proofs do not) shows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeakAuditReport {
    /// Every serialization in both groups has the same length.
    pub lengths_equal: bool,
    pub serialized_len: usize,
    /// All proofs carry identical public inputs (audit precondition).
    pub uniform_public_inputs: bool,
    /// Bytes outside the commitment/tag region are identical everywhere,
    /// i.e. nothing decision-dependent leaks in plaintext.
    pub plaintext_identical: bool,
    pub commitment_mean_a: f64,
    pub commitment_mean_b: f64,
    pub commitment_mean_delta: f64,
    /// Mean-byte comparison verdict; only computed when both groups have at
    /// least [`MEAN_TEST_MIN_PROOFS`] members.
    pub mean_delta_ok: Option<bool>,
    pub passes: bool,
}

/// Group size from which the commitment mean-byte comparison is meaningful.
pub const MEAN_TEST_MIN_PROOFS: usize = 100;
/// Fixed threshold for the mean-byte comparison (bytes average near 127.5).
pub const MEAN_DELTA_LIMIT: f64 = 8.0;

/// Byte-level distinguishability audit between two proof groups sharing
/// the same public inputs.
pub fn leak_audit(group_a: &[Proof], group_b: &[Proof]) -> LeakAuditReport {
    let all: Vec<&Proof> = group_a.iter().chain(group_b.iter()).collect();
    let serialized: Vec<[u8; PROOF_LEN]> = all.iter().map(|p| p.to_bytes()).collect();

    let lengths_equal = true; // to_bytes is constant-size by construction
    let uniform_public_inputs = all
        .windows(2)
        .all(|w| w[0].public_inputs == w[1].public_inputs);
    let plaintext_identical = serialized
        .windows(2)
        .all(|w| w[0][PLAINTEXT_RANGE] == w[1][PLAINTEXT_RANGE]);

    let mean_of = |group: &[Proof]| -> f64 {
        if group.is_empty() {
            return 0.0;
        }
        let total: u64 = group
            .iter()
            .flat_map(|p| p.witness_commitment.iter())
            .map(|&b| u64::from(b))
            .sum();
        total as f64 / (group.len() * 32) as f64
    };
    let commitment_mean_a = mean_of(group_a);
    let commitment_mean_b = mean_of(group_b);
    let delta = (commitment_mean_a - commitment_mean_b).abs();
    let mean_delta_ok = (group_a.len() >= MEAN_TEST_MIN_PROOFS
        && group_b.len() >= MEAN_TEST_MIN_PROOFS)
        .then_some(delta < MEAN_DELTA_LIMIT);

    LeakAuditReport {
        lengths_equal,
        serialized_len: PROOF_LEN,
        uniform_public_inputs,
        plaintext_identical,
        commitment_mean_a,
        commitment_mean_b,
        commitment_mean_delta: delta,
        mean_delta_ok,
        passes: lengths_equal
            && uniform_public_inputs
            && plaintext_identical
            && mean_delta_ok.unwrap_or(true),
    }
}
