use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{KaseError, Result};
use crate::format::{self, Envelope, KIND_INDEX_STORE};
use crate::scheme::{EncryptedKeyword, Encryptor, PublicParams, SecretKey};
use rand::{CryptoRng, RngCore};

/// Encrypted keywords per document index, as held by each server.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexStore {
    n: u32,
    owner: String,
    docs: BTreeMap<u32, Vec<EncryptedKeyword>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreHeader {
    owner: String,
    count: usize,
}

impl IndexStore {
    pub fn new(n: u32, owner: impl Into<String>) -> Self {
        IndexStore {
            n,
            owner: owner.into(),
            docs: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    /// Appends ciphertexts for document i. Every ciphertext must carry i.
    pub fn upload(&mut self, i: u32, cts: impl IntoIterator<Item = EncryptedKeyword>) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(KaseError::Index { index: i, n: self.n });
        }
        let cts: Vec<EncryptedKeyword> = cts.into_iter().collect();
        if let Some(c) = cts.iter().find(|c| c.doc_index != i) {
            return Err(KaseError::param(format!(
                "ciphertext for document {} uploaded under index {i}",
                c.doc_index
            )));
        }
        self.docs.entry(i).or_default().extend(cts);
        Ok(())
    }

    /// Encrypts a plaintext corpus of (document, keyword) pairs, keeping
    /// the input order within each document.
    pub fn encrypt_corpus<'w, R: RngCore + CryptoRng>(
        params: &PublicParams,
        sk: &SecretKey,
        owner: impl Into<String>,
        entries: impl IntoIterator<Item = (u32, &'w str)>,
        rng: &mut R,
    ) -> Result<Self> {
        let mut store = IndexStore::new(params.n(), owner);
        let mut enc = Encryptor::new(params, sk);
        for (i, w) in entries {
            let c = enc.encrypt(i, w, rng)?;
            store.upload(i, [c])?;
        }
        Ok(store)
    }

    /// Ciphertexts of document i in slot order.
    pub fn doc(&self, i: u32) -> &[EncryptedKeyword] {
        self.docs.get(&i).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.docs.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &EncryptedKeyword> {
        self.docs.values().flatten()
    }

    /// Header line followed by one ciphertext per line.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Envelope::new(
            KIND_INDEX_STORE,
            None,
            self.n,
            StoreHeader {
                owner: self.owner.clone(),
                count: self.len(),
            },
        );
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for c in self.iter() {
            serde_json::to_writer(&mut w, c)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_snapshot(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_snapshot(&mut out).expect("writing to memory");
        out
    }

    pub fn read_snapshot<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| KaseError::format("line 1", "empty snapshot"))??;
        let header: Envelope<StoreHeader> = format::parse(&first, KIND_INDEX_STORE).map_err(|e| relabel(e, 1))?;
        let mut store = IndexStore::new(header.n, header.payload.owner);
        let mut count = 0usize;
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let c: EncryptedKeyword = format::from_str_with_path(&line).map_err(|e| relabel(e, k + 2))?;
            let i = c.doc_index;
            store.upload(i, [c]).map_err(|e| KaseError::format(format!("line {}.doc_index", k + 2), e.to_string()))?;
            count += 1;
        }
        if count != header.payload.count {
            return Err(KaseError::format(
                "line 1.payload.count",
                format!("header announces {} ciphertexts, found {count}", header.payload.count),
            ));
        }
        Ok(store)
    }

    /// SHA-256 of the snapshot, hex encoded. Equal fingerprints mean
    /// byte-identical replicas.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_snapshot()))
    }
}

fn relabel(e: KaseError, line: usize) -> KaseError {
    match e {
        KaseError::Format { path, reason } => KaseError::format(format!("line {line}.{path}"), reason),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{encrypt, keygen, setup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn upload_and_snapshot_roundtrip() {
        let mut r = ChaCha20Rng::seed_from_u64(70);
        let p = setup(3, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let mut st = IndexStore::new(3, "owner-1");
        assert!(st.is_empty());
        st.upload(2, [encrypt(&p, &sk, 2, "apple", &mut r).unwrap()]).unwrap();
        assert_eq!(st.len(), 1);
        st.upload(2, [encrypt(&p, &sk, 2, "apple", &mut r).unwrap()]).unwrap();
        assert_eq!(st.doc(2).len(), 2);
        assert_ne!(st.doc(2)[0], st.doc(2)[1]);
        let back = IndexStore::read_snapshot(&st.to_snapshot()[..]).unwrap();
        assert_eq!(back, st);
        assert_eq!(back.fingerprint(), st.fingerprint());
    }

    #[test]
    fn upload_checks_indexes() {
        let mut r = ChaCha20Rng::seed_from_u64(71);
        let p = setup(3, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let mut st = IndexStore::new(3, "o");
        let c = encrypt(&p, &sk, 1, "x", &mut r).unwrap();
        assert!(matches!(st.upload(4, []), Err(KaseError::Index { index: 4, n: 3 })));
        assert!(matches!(st.upload(2, [c]), Err(KaseError::Parameter(_))));
    }

    #[test]
    fn corrupt_line_reports_line_and_field() {
        let mut r = ChaCha20Rng::seed_from_u64(72);
        let p = setup(2, &mut r).unwrap();
        let sk = keygen(&p, &mut r);
        let mut st = IndexStore::new(2, "o");
        st.upload(1, [encrypt(&p, &sk, 1, "x", &mut r).unwrap()]).unwrap();
        let text = String::from_utf8(st.to_snapshot()).unwrap();
        let bad = text.replacen("\"c2\":\"", "\"c2\":\"00", 1);
        match IndexStore::read_snapshot(bad.as_bytes()) {
            Err(KaseError::Format { path, .. }) => assert_eq!(path, "line 2.c2"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
