//! Validium-style private DEX model: single-asset vaults, deposits and
//! withdrawals visible on-chain, swaps executed entirely off-chain with only
//! a state commitment published per batch.
//!
//! Swaps execute against a designated liquidity owner at the oracle price
//! adjusted by slippage; order matching is not modeled. The observer view is
//! structurally incapable of holding an order: it contains deposit and
//! withdrawal events plus commitment digests, nothing else.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DexError {
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("vault balance too low: have {have}, need {need}")]
    InsufficientBalance { have: i64, need: i64 },
    #[error("asset '{0}' is not part of the trading pair")]
    UnknownAsset(String),
    #[error("price must be positive")]
    BadPrice,
    #[error("trade too small: receive amount truncates to zero")]
    AmountTooSmall,
}

/// A single-owner, single-asset balance account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vault {
    pub id: u64,
    pub owner: String,
    pub asset: String,
    pub balance: i64,
}

/// Off-chain order record in the maker-taker model. Lives only inside the
/// DEX; it never reaches the observer view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub maker_give_vault: u64,
    pub maker_receive_vault: u64,
    pub taker_give_vault: u64,
    pub taker_receive_vault: u64,
    pub give_amount: i64,
    pub receive_amount: i64,
    #[serde(with = "hex::serde")]
    pub maker_signature: [u8; 32],
    #[serde(with = "hex::serde")]
    pub taker_signature: [u8; 32],
}

/// Merkle-style digest over every vault balance after one batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchCommitment {
    pub sequence: u64,
    #[serde(with = "hex::serde")]
    pub digest: [u8; 32],
}

impl BatchCommitment {
    pub fn digest_hex(&self) -> String {
        hex::encode(self.digest)
    }
}

/// On-chain-visible DEX events. Trades deliberately have no variant here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum DexEvent {
    Deposit { user: String, asset: String, amount: i64 },
    Withdrawal { user: String, asset: String, amount: i64 },
}

/// Everything a chain observer can see of the DEX.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObserverView {
    pub events: Vec<DexEvent>,
    pub commitments: Vec<BatchCommitment>,
}

/// Receipt handed to the trader: what arrived, and the batch commitment the
/// trade was folded into (the trader's inclusion evidence).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapReceipt {
    pub received: i64,
    pub commitment: BatchCommitment,
}

#[derive(Debug, Clone)]
pub struct Dex {
    base_asset: String,
    quote_asset: String,
    /// Subunits per base unit (quote assets are in cents).
    base_scale: i64,
    slippage_bps: i64,
    liquidity_owner: String,
    vaults: Vec<Vault>,
    next_vault_id: u64,
    orders: Vec<Order>,
    events: Vec<DexEvent>,
    commitments: Vec<BatchCommitment>,
    deposited: BTreeMap<String, i64>,
    withdrawn: BTreeMap<String, i64>,
}

impl Dex {
    pub fn new(
        base_asset: &str,
        quote_asset: &str,
        base_scale: i64,
        slippage_bps: i64,
        liquidity_owner: &str,
    ) -> Self {
        Self {
            base_asset: base_asset.to_string(),
            quote_asset: quote_asset.to_string(),
            base_scale,
            slippage_bps,
            liquidity_owner: liquidity_owner.to_string(),
            vaults: Vec::new(),
            next_vault_id: 1,
            orders: Vec::new(),
            events: Vec::new(),
            commitments: Vec::new(),
            deposited: BTreeMap::new(),
            withdrawn: BTreeMap::new(),
        }
    }

    pub fn slippage_bps(&self) -> i64 {
        self.slippage_bps
    }

    fn vault_index(&mut self, owner: &str, asset: &str) -> usize {
        if let Some(i) = self.vaults.iter().position(|v| v.owner == owner && v.asset == asset) {
            return i;
        }
        self.vaults.push(Vault {
            id: self.next_vault_id,
            owner: owner.to_string(),
            asset: asset.to_string(),
            balance: 0,
        });
        self.next_vault_id += 1;
        self.vaults.len() - 1
    }

    /// Credit a user's vault (auto-created, one per user/asset pair). The
    /// deposit is an on-chain event and shows up in the observer view.
    pub fn deposit(&mut self, user: &str, asset: &str, amount: i64) -> Result<u64, DexError> {
        if amount <= 0 {
            return Err(DexError::ZeroAmount);
        }
        let idx = self.vault_index(user, asset);
        self.vaults[idx].balance += amount;
        *self.deposited.entry(asset.to_string()).or_default() += amount;
        self.events.push(DexEvent::Deposit {
            user: user.to_string(),
            asset: asset.to_string(),
            amount,
        });
        Ok(self.vaults[idx].id)
    }

    /// Debit a user's vault; the amount becomes withdrawable on-chain and the
    /// event is observer-visible.
    pub fn withdraw(&mut self, user: &str, asset: &str, amount: i64) -> Result<(), DexError> {
        if amount <= 0 {
            return Err(DexError::ZeroAmount);
        }
        let idx = self.vault_index(user, asset);
        let have = self.vaults[idx].balance;
        if have < amount {
            return Err(DexError::InsufficientBalance { have, need: amount });
        }
        self.vaults[idx].balance -= amount;
        *self.withdrawn.entry(asset.to_string()).or_default() += amount;
        self.events.push(DexEvent::Withdrawal {
            user: user.to_string(),
            asset: asset.to_string(),
            amount,
        });
        Ok(())
    }

    /// Swap `give_amount` of `give_asset` against the liquidity owner at
    /// `price_cents` per base unit, slippage charged against the taker.
    /// Entirely off-chain: the only observable effect is one new batch
    /// commitment.
    pub fn swap(
        &mut self,
        user: &str,
        give_asset: &str,
        give_amount: i64,
        price_cents: i64,
    ) -> Result<SwapReceipt, DexError> {
        if give_amount <= 0 {
            return Err(DexError::ZeroAmount);
        }
        if price_cents <= 0 {
            return Err(DexError::BadPrice);
        }
        let (receive_asset, receive_amount) = if give_asset == self.quote_asset {
            // Buying base: slippage raises the effective price.
            let eff = price_cents as i128 * (10_000 + self.slippage_bps) as i128 / 10_000;
            let recv = i128::from(give_amount) * i128::from(self.base_scale) / eff;
            (self.base_asset.clone(), recv as i64)
        } else if give_asset == self.base_asset {
            // Selling base: slippage lowers the effective price.
            let eff = price_cents as i128 * (10_000 - self.slippage_bps) as i128 / 10_000;
            let recv = i128::from(give_amount) * eff / i128::from(self.base_scale);
            (self.quote_asset.clone(), recv as i64)
        } else {
            return Err(DexError::UnknownAsset(give_asset.to_string()));
        };
        if receive_amount <= 0 {
            return Err(DexError::AmountTooSmall);
        }

        let taker_give = self.vault_index(user, give_asset);
        let taker_recv = self.vault_index(user, &receive_asset);
        let maker = self.liquidity_owner.clone();
        let maker_give = self.vault_index(&maker, &receive_asset);
        let maker_recv = self.vault_index(&maker, give_asset);

        let have = self.vaults[taker_give].balance;
        if have < give_amount {
            return Err(DexError::InsufficientBalance { have, need: give_amount });
        }
        let liquidity = self.vaults[maker_give].balance;
        if liquidity < receive_amount {
            return Err(DexError::InsufficientBalance { have: liquidity, need: receive_amount });
        }

        self.vaults[taker_give].balance -= give_amount;
        self.vaults[maker_recv].balance += give_amount;
        self.vaults[maker_give].balance -= receive_amount;
        self.vaults[taker_recv].balance += receive_amount;

        let order = Order {
            maker_give_vault: self.vaults[maker_give].id,
            maker_receive_vault: self.vaults[maker_recv].id,
            taker_give_vault: self.vaults[taker_give].id,
            taker_receive_vault: self.vaults[taker_recv].id,
            give_amount,
            receive_amount,
            maker_signature: sign(&maker, give_amount, receive_amount),
            taker_signature: sign(user, give_amount, receive_amount),
        };
        self.orders.push(order);

        let commitment = self.commit_state();
        Ok(SwapReceipt { received: receive_amount, commitment })
    }

    fn commit_state(&mut self) -> BatchCommitment {
        let commitment = BatchCommitment {
            sequence: self.commitments.len() as u64,
            digest: merkle_root(&self.vaults),
        };
        self.commitments.push(commitment);
        commitment
    }

    /// Snapshot of everything a chain observer can see.
    pub fn observer_view(&self) -> ObserverView {
        ObserverView { events: self.events.clone(), commitments: self.commitments.clone() }
    }

    pub fn balance_of(&self, user: &str, asset: &str) -> i64 {
        self.vaults
            .iter()
            .find(|v| v.owner == user && v.asset == asset)
            .map_or(0, |v| v.balance)
    }

    pub fn vaults(&self) -> &[Vault] {
        &self.vaults
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    /// Per-asset conservation: vault totals plus withdrawals equal deposits.
    pub fn conservation_holds(&self) -> bool {
        let mut assets: Vec<&String> = self.deposited.keys().collect();
        assets.extend(self.withdrawn.keys());
        assets.sort();
        assets.dedup();
        assets.into_iter().all(|asset| {
            let held: i64 = self
                .vaults
                .iter()
                .filter(|v| &v.asset == asset)
                .map(|v| v.balance)
                .sum();
            let deposited = self.deposited.get(asset).copied().unwrap_or(0);
            let withdrawn = self.withdrawn.get(asset).copied().unwrap_or(0);
            held + withdrawn == deposited
        })
    }
}

fn sign(owner: &str, give: i64, receive: i64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"zktrade.order.sig.v1");
    hasher.update(owner.as_bytes());
    hasher.update(give.to_le_bytes());
    hasher.update(receive.to_le_bytes());
    hasher.finalize().into()
}

/// Merkle root over the vault set, leaves ordered by vault id. An odd node
/// at any level is paired with itself.
fn merkle_root(vaults: &[Vault]) -> [u8; 32] {
    if vaults.is_empty() {
        return Sha256::digest(b"zktrade.vaults.empty").into();
    }
    let mut sorted: Vec<&Vault> = vaults.iter().collect();
    sorted.sort_by_key(|v| v.id);
    let mut level: Vec<[u8; 32]> = sorted
        .iter()
        .map(|v| {
            let mut hasher = Sha256::new();
            hasher.update(b"zktrade.vault.leaf");
            hasher.update(v.id.to_le_bytes());
            hasher.update(v.owner.as_bytes());
            hasher.update([0]);
            hasher.update(v.asset.as_bytes());
            hasher.update([0]);
            hasher.update(v.balance.to_le_bytes());
            hasher.finalize().into()
        })
        .collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| {
                let right = pair.get(1).unwrap_or(&pair[0]);
                let mut hasher = Sha256::new();
                hasher.update(b"zktrade.vault.node");
                hasher.update(pair[0]);
                hasher.update(right);
                hasher.finalize().into()
            })
            .collect();
    }
    level[0]
}
