//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use errcomm::framing::{TagStream, Token};

/// Token alphabet for exhaustive tag-stream searches: Open(a), Open(b),
/// Close(a), Close(b), Text.
pub const TAG_KINDS: u8 = 5;
pub const TEXT: u8 = 4;

pub fn decode_tag(code: u8) -> Token {
    match code {
        0 => Token::Open("a".into()),
        1 => Token::Open("b".into()),
        2 => Token::Close("a".into()),
        3 => Token::Close("b".into()),
        _ => Token::Text,
    }
}

pub fn stream_of(codes: &[u8]) -> TagStream {
    TagStream(codes.iter().map(|&c| decode_tag(c)).collect())
}

fn well_formed(codes: &[u8]) -> bool {
    let mut stack = Vec::new();
    for &c in codes {
        match c {
            0 | 1 => stack.push(c),
            2 | 3 if stack.pop() != Some(c - 2) => return false,
            _ => {}
        }
    }
    stack.is_empty()
}

/// Edit distance from every token string of length ≤ `max_len` to the
/// nearest well-formed string, by multi-source breadth-first search over
/// single-token insertions, deletions and substitutions (Text is never
/// edited). Strings are indexed by length offset plus base-5 value.
pub struct TagOracle {
    max_len: usize,
    offsets: Vec<usize>,
    dist: Vec<u8>,
}

impl TagOracle {
    pub fn new(max_len: usize) -> Self {
        let mut offsets = vec![0usize];
        for len in 0..=max_len {
            offsets.push(offsets[len] + 5usize.pow(len as u32));
        }
        let total = offsets[max_len + 1];
        let mut dist = vec![u8::MAX; total];
        let mut queue = std::collections::VecDeque::new();
        let mut oracle = TagOracle { max_len, offsets, dist: Vec::new() };
        for len in 0..=max_len {
            for value in 0..5usize.pow(len as u32) {
                let codes = oracle.codes(len, value);
                if well_formed(&codes) {
                    let id = oracle.offsets[len] + value;
                    dist[id] = 0;
                    queue.push_back(codes);
                }
            }
        }
        while let Some(codes) = queue.pop_front() {
            let d = dist[oracle.id(&codes)];
            for next in neighbours(&codes, max_len) {
                let id = oracle.id(&next);
                if dist[id] == u8::MAX {
                    dist[id] = d + 1;
                    queue.push_back(next);
                }
            }
        }
        oracle.dist = dist;
        oracle
    }

    pub fn codes(&self, len: usize, mut value: usize) -> Vec<u8> {
        let mut codes = vec![0u8; len];
        for slot in codes.iter_mut().rev() {
            *slot = (value % 5) as u8;
            value /= 5;
        }
        codes
    }

    fn id(&self, codes: &[u8]) -> usize {
        self.offsets[codes.len()] + codes.iter().fold(0usize, |acc, &c| acc * 5 + c as usize)
    }

    pub fn distance(&self, codes: &[u8]) -> u8 {
        assert!(codes.len() <= self.max_len);
        self.dist[self.id(codes)]
    }

    pub fn all_strings(&self) -> impl Iterator<Item = Vec<u8>> + '_ {
        (0..=self.max_len)
            .flat_map(move |len| (0..5usize.pow(len as u32)).map(move |v| self.codes(len, v)))
    }
}

fn neighbours(codes: &[u8], max_len: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for i in 0..codes.len() {
        if codes[i] == TEXT {
            continue;
        }
        let mut del = codes.to_vec();
        del.remove(i);
        out.push(del);
        for t in 0..TEXT {
            if t != codes[i] {
                let mut sub = codes.to_vec();
                sub[i] = t;
                out.push(sub);
            }
        }
    }
    if codes.len() < max_len {
        for i in 0..=codes.len() {
            for t in 0..TEXT {
                let mut ins = codes.to_vec();
                ins.insert(i, t);
                out.push(ins);
            }
        }
    }
    out
}
