use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codebook::Message;

/// SHA-256 over party, message and a 128-bit salt, hex encoded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitmentToken {
    pub party: String,
    pub digest: String,
}

/// What the committer reveals at the end of the run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub message: Message,
    pub salt: String,
}

fn digest(party: &str, message: &Message, salt: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(party.as_bytes());
    h.update([0]);
    h.update(message.to_string().as_bytes());
    h.update([0]);
    h.update(salt);
    hex::encode(h.finalize())
}

pub fn commit_message<R: RngCore + ?Sized>(
    party: &str,
    message: Message,
    rng: &mut R,
) -> (CommitmentToken, Opening) {
    let mut salt = [0u8; 16];
    rng.fill_bytes(&mut salt);
    let token = CommitmentToken {
        party: party.to_string(),
        digest: digest(party, &message, &salt),
    };
    (
        token,
        Opening {
            message,
            salt: hex::encode(salt),
        },
    )
}

pub fn verify_commitment(token: &CommitmentToken, opening: &Opening) -> bool {
    match hex::decode(&opening.salt) {
        Ok(salt) => digest(&token.party, &opening.message, &salt) == token.digest,
        Err(_) => false,
    }
}
