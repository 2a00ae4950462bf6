//! Packed codes and brute-force Hamming retrieval.
//!
//! Bit `t` of a code lives in word `t / 64`, bit position `t % 64`, and is
//! set when the code value is `+1`. Distances use the doubled convention
//! `d_H = p − cᵢᵀcⱼ = 2·popcount(a ⊕ b)`, so they are comparable with the
//! trainer's `α`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::mincut::BitVector;
use crate::trainer::CodeMatrix;

const MAGIC: &[u8; 4] = b"PPCB";
const VERSION: u32 = 1;

pub fn words_per_code(p: usize) -> usize {
    p.div_ceil(64)
}

/// `n` codes of `p` bits, `⌈p/64⌉` little-endian words each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedCodes {
    n: usize,
    p: usize,
    words: Vec<u64>,
    ids: Option<Vec<String>>,
}

impl PackedCodes {
    pub fn pack(codes: &CodeMatrix) -> Self {
        let (n, p) = (codes.n(), codes.p());
        let wpc = words_per_code(p);
        let mut words = vec![0u64; n * wpc];
        for (t, bit) in codes.bits().iter().enumerate() {
            for (i, &v) in bit.as_slice().iter().enumerate() {
                if v > 0 {
                    words[i * wpc + t / 64] |= 1 << (t % 64);
                }
            }
        }
        PackedCodes { n, p, words, ids: None }
    }

    pub fn unpack(&self) -> CodeMatrix {
        let wpc = words_per_code(self.p);
        let bits = (0..self.p)
            .map(|t| {
                let col = (0..self.n)
                    .map(|i| if self.words[i * wpc + t / 64] >> (t % 64) & 1 == 1 { 1 } else { -1 })
                    .collect();
                BitVector::new(col).expect("±1 by construction")
            })
            .collect();
        CodeMatrix::from_bits(self.n, bits).expect("consistent lengths")
    }

    /// Attaches record ids (one per code).
    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "id table",
                expected: self.n,
                found: ids.len(),
            });
        }
        self.ids = Some(ids);
        Ok(self)
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn code(&self, i: usize) -> &[u64] {
        let wpc = words_per_code(self.p);
        &self.words[i * wpc..(i + 1) * wpc]
    }

    pub fn distance(&self, i: usize, j: usize) -> u32 {
        hamming_words(self.code(i), self.code(j))
    }

    fn check_query(&self, q: &[u64]) -> Result<()> {
        let wpc = words_per_code(self.p);
        if q.len() != wpc {
            return Err(Error::DimensionMismatch {
                what: "query code words",
                expected: wpc,
                found: q.len(),
            });
        }
        Ok(())
    }

    /// Ids with `d_H ≤ alpha`, ascending by distance then id.
    pub fn query_radius(&self, q: &[u64], alpha: f64) -> Result<Vec<usize>> {
        self.check_query(q)?;
        let mut hits: Vec<(u32, usize)> = (0..self.n)
            .map(|i| (hamming_words(self.code(i), q), i))
            .filter(|&(d, _)| d as f64 <= alpha)
            .collect();
        hits.sort_unstable();
        Ok(hits.into_iter().map(|(_, i)| i).collect())
    }

    /// The `k` nearest ids, ties broken by ascending id.
    pub fn query_knn(&self, q: &[u64], k: usize) -> Result<Vec<usize>> {
        self.check_query(q)?;
        let mut all: Vec<(u32, usize)> = (0..self.n)
            .map(|i| (hamming_words(self.code(i), q), i))
            .collect();
        let k = k.min(self.n);
        if k < all.len() && k > 0 {
            all.select_nth_unstable(k - 1);
            all.truncate(k);
        }
        all.truncate(k);
        all.sort_unstable();
        Ok(all.into_iter().map(|(_, i)| i).collect())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.p as u32).to_le_bytes())?;
        for word in &self.words {
            w.write_all(&word.to_le_bytes())?;
        }
        if let Some(ids) = &self.ids {
            w.write_all(&(ids.len() as u64).to_le_bytes())?;
            for id in ids {
                w.write_all(&(id.len() as u32).to_le_bytes())?;
                w.write_all(id.as_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::Format("missing PPCB magic".into()));
        }
        let version = u32::from_le_bytes(cur.array()?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported codes version {version}")));
        }
        let n = u64::from_le_bytes(cur.array()?) as usize;
        let p = u32::from_le_bytes(cur.array()?) as usize;
        let wpc = words_per_code(p);
        let total = n
            .checked_mul(wpc)
            .filter(|&t| t.saturating_mul(8) <= bytes.len())
            .ok_or_else(|| Error::Format("code table larger than file".into()))?;
        let mut words = Vec::with_capacity(total);
        for _ in 0..total {
            words.push(u64::from_le_bytes(cur.array()?));
        }
        if p % 64 != 0 {
            let mask = !0u64 << (p % 64);
            if (0..n).any(|i| words[i * wpc + wpc - 1] & mask != 0) {
                return Err(Error::Format("padding bits beyond p are set".into()));
            }
        }
        let ids = if cur.remaining() == 0 {
            None
        } else {
            let count = u64::from_le_bytes(cur.array()?) as usize;
            if count != n {
                return Err(Error::Format(format!("id table has {count} entries for {n} codes")));
            }
            let mut ids = Vec::with_capacity(n);
            for _ in 0..n {
                let len = u32::from_le_bytes(cur.array()?) as usize;
                let raw = cur.take(len)?;
                ids.push(
                    String::from_utf8(raw.to_vec()).map_err(|e| Error::Format(format!("id is not UTF-8: {e}")))?,
                );
            }
            if cur.remaining() != 0 {
                return Err(Error::Format("trailing bytes after id table".into()));
            }
            Some(ids)
        };
        Ok(PackedCodes { n, p, words, ids })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("unexpected end of codes file".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// `2·popcount(a ⊕ b)`.
#[inline]
pub fn hamming_words(a: &[u64], b: &[u64]) -> u32 {
    2 * a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum::<u32>()
}

/// Distance between two packed codes of `p` bits.
pub fn hamming(a: &[u64], b: &[u64], p: usize) -> Result<u32> {
    let wpc = words_per_code(p);
    for code in [a, b] {
        if code.len() != wpc {
            return Err(Error::DimensionMismatch {
                what: "packed code words",
                expected: wpc,
                found: code.len(),
            });
        }
    }
    Ok(hamming_words(a, b))
}
