use super::*;
use crate::crypto::sig_gen;
use crate::ecelgamal::EcParams;
use crate::scheme::{EcScheme, Scheme};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

struct Fixture {
    chain: Chain,
    scheme: EcScheme,
    server: (AccountId, SignKey),
    users: Vec<(AccountId, SignKey)>,
    contract: AccountId,
    rng: ChaCha20Rng,
}

fn fixture(users: usize) -> Fixture {
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let scheme = EcScheme::new(EcParams::new(3, 1 << 16, 1 << 12, 64).unwrap());
    let mut chain = Chain::new();
    let (sk, vk) = sig_gen(&mut rng);
    let server = (chain.open_account(vk, 100), sk);
    let users = (0..users)
        .map(|_| {
            let (sk, vk) = sig_gen(&mut rng);
            (chain.open_account(vk, 0), sk)
        })
        .collect();
    let contract = chain.deploy_contract(server.0, DEFAULT_MIN_VALUE, Arc::new(scheme.clone()));
    Fixture { chain, scheme, server, users, contract, rng }
}

impl Fixture {
    fn server_tx(&mut self, value: u64, call: &Call) -> Receipt {
        let tx = Transaction::new(self.server.0, self.contract, value, call, Vec::new(), &self.server.1);
        self.chain.submit_tx(tx).unwrap()
    }

    fn init(&mut self, t: u32, prds: u32, value: u64) -> u64 {
        self.server_tx(value, &Call::Init { t, prds });
        self.chain.produce_block().unwrap()
    }

    /// Every user records a fresh ciphertext of `[i, 2i, 3i]`; returns the encodings.
    fn record_all(&mut self, esid: Esid) -> Vec<Vec<u8>> {
        let kps: Vec<_> = (0..self.users.len()).map(|_| self.scheme.keygen(&mut self.rng)).collect();
        let pks: Vec<_> = kps.iter().map(|k| self.scheme.public_key(k)).collect();
        let pk = self.scheme.combine_keys(&pks.iter().collect::<Vec<_>>()).unwrap();
        let mut out = Vec::new();
        for (i, (acc, sk)) in self.users.iter().enumerate() {
            let v = i as u64 + 1;
            let ct = self.scheme.encrypt(&pk, &[v, 2 * v, 3 * v], &mut self.rng).unwrap();
            let bytes = self.scheme.encode_ciphertext(&ct);
            let tx = Transaction::new(*acc, self.contract, 0, &Call::Record { esid, cipher: bytes.clone() }, vec![], sk);
            self.chain.submit_tx(tx).unwrap();
            out.push(bytes);
        }
        self.chain.produce_block().unwrap();
        out
    }

    fn honest_check(&self, esid: Esid, ciphers: &[Vec<u8>], draw: bool) -> Call {
        let accounts: Vec<_> = self.users.iter().map(|u| u.0).collect();
        let alphas = vec![1; accounts.len()];
        let refs: Vec<&[u8]> = ciphers.iter().map(Vec::as_slice).collect();
        let cipher = self.scheme.recompute(&refs, &alphas).unwrap();
        Call::Check(CheckCall { draw, esid, cipher, accounts, alphas })
    }

    fn contract(&self) -> &Contract {
        self.chain.contract(self.contract).unwrap()
    }
}

#[test]
fn published_key_visible_after_one_block() {
    let mut f = fixture(1);
    let (acc, sk) = (f.users[0].0, &f.users[0].1);
    let tx = Transaction::new(acc, acc, 0, &Call::PublishKey { key: vec![7; 66] }, vec![], sk);
    f.chain.submit_tx(tx).unwrap();
    assert_eq!(f.chain.published_key(acc), None);
    f.chain.produce_block().unwrap();
    assert_eq!(f.chain.published_key(acc), Some(&[7u8; 66][..]));
}

#[test]
fn bad_signatures_rejected_at_submission() {
    let mut f = fixture(2);
    let mut tx = Transaction::new(f.users[0].0, f.users[0].0, 0, &Call::PublishKey { key: vec![1] }, vec![], &f.users[0].1);
    tx.sig = [0; SIGNATURE_LEN];
    assert!(matches!(f.chain.submit_tx(tx), Err(Error::Rejected(_))));
    let forged = Transaction::new(f.users[0].0, f.users[0].0, 0, &Call::PublishKey { key: vec![1] }, vec![], &f.users[1].1);
    assert!(f.chain.submit_tx(forged).is_err());
    let stranger = Transaction::new(AccountId(999), f.contract, 0, &Call::Init { t: 1, prds: 1 }, vec![], &f.server.1);
    assert!(f.chain.submit_tx(stranger).is_err());
    assert_eq!(f.chain.pending(), 0);
}

#[test]
fn blocks_advance_height() {
    let mut f = fixture(0);
    let h = f.chain.height();
    f.chain.produce_block().unwrap();
    f.chain.produce_block().unwrap();
    assert_eq!(f.chain.height(), h + 2);
}

#[test]
fn init_requires_full_deposit() {
    let mut f = fixture(1);
    f.init(2, 3, 29);
    assert!(!f.contract().is_initialized());
    assert_eq!(f.chain.balance(f.server.0), 100);
    assert!(matches!(f.chain.events().last().unwrap().kind, EventKind::Failed { .. }));
    f.init(2, 3, 30);
    assert!(f.contract().is_initialized());
    assert_eq!(f.contract().dep(), 30);
    assert_eq!(f.chain.balance(f.server.0), 70);
}

#[test]
fn init_top_up_counts_existing_deposit() {
    let mut f = fixture(1);
    f.init(2, 2, 20);
    assert_eq!(f.contract().dep(), 20);
    f.init(2, 3, 10);
    assert_eq!(f.contract().dep(), 30);
    assert_eq!(f.contract().prds(), 3);
}

#[test]
fn only_owner_initializes() {
    let mut f = fixture(1);
    let tx = Transaction::new(f.users[0].0, f.contract, 0, &Call::Init { t: 2, prds: 0 }, vec![], &f.users[0].1);
    f.chain.submit_tx(tx).unwrap();
    f.chain.produce_block().unwrap();
    assert!(!f.contract().is_initialized());
}

#[test]
fn record_first_write_wins_per_esid() {
    let mut f = fixture(1);
    f.init(1, 1, 10);
    let (acc, sk) = (f.users[0].0, &f.users[0].1);
    for (esid, c) in [([1; 16], 1u8), ([1; 16], 2), ([2; 16], 3)] {
        let tx = Transaction::new(acc, f.contract, 0, &Call::Record { esid, cipher: vec![c] }, vec![], sk);
        f.chain.submit_tx(tx).unwrap();
    }
    f.chain.produce_block().unwrap();
    assert_eq!(f.contract().records(&[1; 16]).unwrap()[&acc], vec![1]);
    assert_eq!(f.contract().records(&[2; 16]).unwrap()[&acc], vec![3]);
    assert!(f.chain.events().iter().any(|e| matches!(e.kind, EventKind::RecordIgnored { .. })));
}

#[test]
fn honest_check_at_threshold_passes() {
    let mut f = fixture(3);
    f.init(3, 2, 20);
    let esid = [5; 16];
    let ciphers = f.record_all(esid);
    let call = f.honest_check(esid, &ciphers, false);
    f.server_tx(0, &call);
    f.chain.produce_block().unwrap();
    let entry = f.contract().check(&esid).unwrap();
    assert_eq!(entry.verdict, Verdict::Ok);
    assert_eq!(entry.accepted.len(), 3);
    assert_eq!(f.contract().prds(), 1);
    assert_eq!(f.contract().dep(), 20);
    assert_eq!(f.chain.check_transactions(f.contract, &esid).len(), 1);
}

#[test]
fn substituted_cipher_below_threshold_is_slashed() {
    let mut f = fixture(4);
    f.init(4, 2, 20);
    let esid = [6; 16];
    let ciphers = f.record_all(esid);
    let accounts: Vec<_> = f.users[..3].iter().map(|u| u.0).collect();
    let call = Call::Check(CheckCall { draw: false, esid, cipher: ciphers[0].clone(), accounts: accounts.clone(), alphas: vec![1, 0, 0] });
    f.server_tx(0, &call);
    f.chain.produce_block().unwrap();
    let entry = f.contract().check(&esid).unwrap();
    assert_eq!(entry.verdict, Verdict::Slash(SlashReason::BelowThreshold { have: 3, needed: 4 }));
    assert_eq!(f.contract().dep(), 10);
    let paid: Vec<u64> = accounts.iter().map(|&a| f.chain.balance(a)).collect();
    assert_eq!(paid, vec![4, 3, 3]);
    assert_eq!(f.chain.balance(f.users[3].0), 0);
}

#[test]
fn wrong_evaluation_is_slashed() {
    let mut f = fixture(3);
    f.init(2, 2, 20);
    let esid = [7; 16];
    let ciphers = f.record_all(esid);
    let Call::Check(mut check) = f.honest_check(esid, &ciphers, false) else { unreachable!() };
    check.alphas[1] = 2;
    f.server_tx(0, &Call::Check(check));
    f.chain.produce_block().unwrap();
    assert_eq!(f.contract().check(&esid).unwrap().verdict, Verdict::Slash(SlashReason::EvalMismatch));
}

#[test]
fn missing_records_are_excluded_not_fatal() {
    let mut f = fixture(3);
    f.init(2, 2, 20);
    let esid = [8; 16];
    let ciphers = f.record_all(esid);
    let cipher = f.scheme.recompute(&[&ciphers[0], &ciphers[1]], &[1, 1]).unwrap();
    let accounts = vec![f.users[0].0, f.users[1].0, AccountId(777)];
    f.server_tx(0, &Call::Check(CheckCall { draw: false, esid, cipher, accounts, alphas: vec![1, 1, 5] }));
    f.chain.produce_block().unwrap();
    let entry = f.contract().check(&esid).unwrap();
    assert_eq!(entry.verdict, Verdict::Ok);
    assert_eq!(entry.accepted, vec![f.users[0].0, f.users[1].0]);
}

#[test]
fn replayed_check_is_noop_and_conflict_slashes() {
    let mut f = fixture(3);
    f.init(3, 3, 30);
    let esid = [9; 16];
    let ciphers = f.record_all(esid);
    let call = f.honest_check(esid, &ciphers, false);
    f.server_tx(0, &call);
    f.chain.produce_block().unwrap();
    f.server_tx(0, &call);
    f.chain.produce_block().unwrap();
    assert_eq!(f.contract().dep(), 30);
    assert_eq!(f.contract().prds(), 2);

    let Call::Check(mut other) = call else { unreachable!() };
    other.cipher = ciphers[1].clone();
    let other = Call::Check(other);
    f.server_tx(0, &other);
    f.chain.produce_block().unwrap();
    assert_eq!(f.contract().dep(), 20);
    assert_eq!(f.contract().check(&esid).unwrap().verdict, Verdict::Ok);
    assert_eq!(f.contract().check(&esid).unwrap().conflicts.len(), 1);
    f.server_tx(0, &other);
    f.chain.produce_block().unwrap();
    assert_eq!(f.contract().dep(), 20);
}

#[test]
fn withdrawal_pays_six_blocks_after_draw() {
    let mut f = fixture(2);
    f.init(2, 1, 10);
    while f.chain.height() < 8 {
        f.chain.produce_block().unwrap();
    }
    let esid = [10; 16];
    let ciphers = f.record_all(esid);
    let call = f.honest_check(esid, &ciphers, true);
    f.server_tx(0, &call);
    assert_eq!(f.chain.produce_block().unwrap(), 10);
    assert_eq!(f.contract().withdrawal_due_at(), Some(16));
    while f.chain.height() < 15 {
        f.chain.produce_block().unwrap();
    }
    assert_eq!(f.chain.balance(f.server.0), 90);
    assert!(!f.contract().is_terminated());
    f.chain.produce_block().unwrap();
    assert_eq!(f.chain.balance(f.server.0), 100);
    assert!(f.contract().is_terminated());
    assert_eq!(f.contract().dep(), 0);
}

#[test]
fn challenge_inside_window_reduces_payout() {
    let mut f = fixture(2);
    f.init(2, 2, 20);
    while f.chain.height() < 8 {
        f.chain.produce_block().unwrap();
    }
    let esid = [11; 16];
    let ciphers = f.record_all(esid);
    let call = f.honest_check(esid, &ciphers, true);
    f.server_tx(0, &call);
    f.chain.produce_block().unwrap();
    while f.chain.height() < 12 {
        f.chain.produce_block().unwrap();
    }
    let Call::Check(mut bad) = call else { unreachable!() };
    bad.cipher = ciphers[0].clone();
    f.server_tx(0, &Call::Check(bad));
    assert_eq!(f.chain.produce_block().unwrap(), 13);
    assert_eq!(f.contract().dep(), 10);
    while f.chain.height() < 16 {
        f.chain.produce_block().unwrap();
    }
    assert_eq!(f.chain.balance(f.server.0), 90);
    assert_eq!(f.chain.balance(f.users[0].0) + f.chain.balance(f.users[1].0), 10);
    assert_eq!(f.chain.circulating(), 100);
}

#[test]
fn terminated_contract_rejects_calls() {
    let mut f = fixture(2);
    f.init(2, 1, 10);
    let esid = [12; 16];
    let ciphers = f.record_all(esid);
    let call = f.honest_check(esid, &ciphers, true);
    f.server_tx(0, &call);
    for _ in 0..7 {
        f.chain.produce_block().unwrap();
    }
    assert!(f.contract().is_terminated());
    f.init(2, 1, 10);
    assert_eq!(f.chain.balance(f.server.0), 100);
}

#[test]
fn dump_is_valid_json() {
    let mut f = fixture(2);
    f.init(2, 1, 10);
    let esid = [13; 16];
    let ciphers = f.record_all(esid);
    let call = f.honest_check(esid, &ciphers, false);
    f.server_tx(0, &call);
    f.chain.produce_block().unwrap();
    let v: serde_json::Value = serde_json::from_str(&f.chain.dump().to_json()).unwrap();
    let contract = &v["contracts"][f.contract.to_string()];
    assert_eq!(contract["dep"], 10);
    assert_eq!(contract["checks"][hex::encode(esid)]["verdict"]["verdict"], "ok");
}

proptest! {
    #[test]
    fn call_round_trip(
        draw in any::<bool>(),
        esid in any::<[u8; 16]>(),
        cipher in proptest::collection::vec(any::<u8>(), 0..64),
        accounts in proptest::collection::vec(any::<u32>(), 0..8),
        t in any::<u32>(),
    ) {
        let alphas: Vec<u64> = accounts.iter().map(|&a| a as u64 * 3).collect();
        let calls = [
            Call::PublishKey { key: cipher.clone() },
            Call::Init { t, prds: t ^ 5 },
            Call::Record { esid, cipher: cipher.clone() },
            Call::Check(CheckCall { draw, esid, cipher, accounts: accounts.into_iter().map(AccountId).collect(), alphas }),
        ];
        for c in calls {
            prop_assert_eq!(Call::decode(&c.encode()).unwrap(), c);
        }
    }

    #[test]
    fn garbage_data_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..80)) {
        let _ = Call::decode(&bytes);
    }
}
