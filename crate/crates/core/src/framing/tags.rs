//! Structural repair of tag streams by minimum edit distance.
//!
//! The search runs over states `(position, open-tag stack)`. Keeping a token
//! costs nothing; inserting, deleting or substituting an Open/Close token
//! costs one edit. Text tokens are never touched.
//!
//! Among repairs with the fewest edits the search prefers fewer deletions,
//! then fewer insertions (so substitutions win), then edits placed as late
//! in the stream as possible (smallest summed distance from the end), which
//! is where a left-to-right reader first notices the damage.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::FramingError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "snake_case")]
pub enum Token {
    Open(String),
    Close(String),
    Text,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Open(n) => write!(f, "open {n}"),
            Token::Close(n) => write!(f, "close {n}"),
            Token::Text => f.write_str("text"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TagStream(pub Vec<Token>);

impl TagStream {
    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every Open closed later by a Close of the same name, properly nested.
    pub fn is_well_formed(&self) -> bool {
        let mut stack = Vec::new();
        for t in &self.0 {
            match t {
                Token::Open(n) => stack.push(n),
                Token::Close(n) => {
                    if stack.pop() != Some(n) {
                        return false;
                    }
                }
                Token::Text => {}
            }
        }
        stack.is_empty()
    }

    /// One token per line: `open NAME`, `close NAME` or `text`.
    pub fn parse(text: &str) -> Result<Self, FramingError> {
        let mut tokens = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = match (parts.next(), parts.next(), parts.next()) {
                (Some("open"), Some(name), None) => Token::Open(name.to_string()),
                (Some("close"), Some(name), None) => Token::Close(name.to_string()),
                (Some("text"), None, None) => Token::Text,
                _ => return Err(FramingError::BadTagLine { line: i + 1, text: line.into() }),
            };
            tokens.push(token);
        }
        Ok(TagStream(tokens))
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|t| format!("{t}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Edit {
    /// Replace the token at `position` of the input.
    Substitute { position: usize, from: Token, to: Token },
    /// Insert before input `position` (`position == len` appends).
    Insert { position: usize, token: Token },
    Delete { position: usize, token: Token },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repair {
    pub stream: TagStream,
    pub script: Vec<Edit>,
    pub cost: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairOptions {
    pub max_edits: usize,
    /// Deepest open-tag nesting the search will consider.
    pub max_depth: usize,
}

impl Default for RepairOptions {
    fn default() -> Self {
        RepairOptions {
            max_edits: 8,
            max_depth: 32,
        }
    }
}

/// (edits, deletions, insertions, lateness); compared lexicographically.
type Cost = (usize, usize, usize, usize);

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Tok {
    Open(u16),
    Close(u16),
    Text,
}

/// Open-tag stacks interned as a tree: node 0 is the empty stack, every
/// other node is (parent, name on top, depth). Child links live in a flat
/// table, `names` slots per node.
struct Stacks {
    nodes: Vec<(u32, u16, usize)>,
    children: Vec<u32>,
    names: usize,
}

impl Stacks {
    const NONE: u32 = u32::MAX;

    fn new(names: usize) -> Self {
        Stacks {
            nodes: vec![(0, 0, 0)],
            children: vec![Self::NONE; names],
            names,
        }
    }

    fn push(&mut self, at: u32, name: u16) -> u32 {
        let slot = at as usize * self.names + name as usize;
        if self.children[slot] == Self::NONE {
            let depth = self.nodes[at as usize].2 + 1;
            self.children[slot] = self.nodes.len() as u32;
            self.nodes.push((at, name, depth));
            self.children.extend(std::iter::repeat_n(Self::NONE, self.names));
        }
        self.children[slot]
    }

    fn top(&self, at: u32) -> Option<u16> {
        (at != 0).then(|| self.nodes[at as usize].1)
    }

    fn depth(&self, at: u32) -> usize {
        self.nodes[at as usize].2
    }

    fn pop(&self, at: u32) -> u32 {
        self.nodes[at as usize].0
    }
}

/// (input position, interned stack)
type State = (usize, u32);

#[derive(Clone, Copy)]
enum Move {
    Keep,
    Substitute(Tok),
    Insert(Tok),
    Delete,
}

pub fn repair_tags(
    stream: &TagStream,
    alphabet: &[&str],
    options: RepairOptions,
) -> Result<Repair, FramingError> {
    let index: HashMap<&str, u16> = alphabet
        .iter()
        .enumerate()
        .map(|(i, n)| (*n, i as u16))
        .collect();
    let input = stream
        .0
        .iter()
        .map(|t| match t {
            Token::Open(n) => index.get(n.as_str()).map(|&i| Tok::Open(i)),
            Token::Close(n) => index.get(n.as_str()).map(|&i| Tok::Close(i)),
            Token::Text => Some(Tok::Text),
        }
        .ok_or_else(|| FramingError::UnknownTag(t.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if stream.is_well_formed() {
        return Ok(Repair {
            stream: stream.clone(),
            script: Vec::new(),
            cost: 0,
        });
    }

    let n = input.len();
    let names = alphabet.len() as u16;
    // tags_after[i]: editable tokens in input[i..]
    let mut tags_after = vec![0usize; n + 1];
    for i in (0..n).rev() {
        tags_after[i] = tags_after[i + 1] + usize::from(input[i] != Tok::Text);
    }
    // Each remaining tag moves the depth by at most one, and an odd surplus
    // needs one extra edit; never overestimates, and drops by at most one
    // per edit.
    let heuristic = |pos: usize, depth: usize| {
        let r = tags_after[pos];
        if depth >= r {
            depth - r
        } else {
            (r - depth) % 2
        }
    };

    // A one-pass stack repair is always available, so nothing costlier
    // than it can be optimal.
    let fallback = greedy_repair_cost(&input);
    let bound = options.max_edits.min(fallback);
    let mut stacks = Stacks::new(names as usize);
    // best and back are indexed by stack * (n + 1) + pos
    let slot = |(pos, stack): State| stack as usize * (n + 1) + pos;
    let mut best: Vec<Option<Cost>> = vec![None; n + 1];
    let mut back: Vec<Option<(State, Move)>> = vec![None; n + 1];
    let mut heap = BinaryHeap::new();
    let start: State = (0, 0);
    best[slot(start)] = Some((0, 0, 0, 0));
    heap.push(Reverse(((heuristic(0, 0), 0, 0, 0), (0, 0, 0, 0), start)));

    let mut goal = None;
    let mut next: Vec<(State, Cost, Move)> = Vec::new();
    while let Some(Reverse((_, cost, state))) = heap.pop() {
        if best[slot(state)].is_some_and(|c| c < cost) {
            continue;
        }
        let (pos, stack) = state;
        if pos == n && stack == 0 {
            goal = Some((state, cost));
            break;
        }
        let late = n - pos;
        next.clear();
        let apply = |tok: Tok, stacks: &mut Stacks| -> Option<u32> {
            match tok {
                Tok::Open(x) if stacks.depth(stack) < options.max_depth => {
                    Some(stacks.push(stack, x))
                }
                Tok::Close(x) if stacks.top(stack) == Some(x) => Some(stacks.pop(stack)),
                Tok::Text => Some(stack),
                _ => None,
            }
        };
        if pos < n {
            let tok = input[pos];
            if let Some(s) = apply(tok, &mut stacks) {
                next.push(((pos + 1, s), cost, Move::Keep));
            }
            if tok != Tok::Text {
                let c = (cost.0 + 1, cost.1 + 1, cost.2, cost.3 + late);
                next.push(((pos + 1, stack), c, Move::Delete));
                for x in 0..names {
                    for alt in [Tok::Open(x), Tok::Close(x)] {
                        if alt == tok {
                            continue;
                        }
                        if let Some(s) = apply(alt, &mut stacks) {
                            let c = (cost.0 + 1, cost.1, cost.2, cost.3 + late);
                            next.push(((pos + 1, s), c, Move::Substitute(alt)));
                        }
                    }
                }
            }
        }
        for x in 0..names {
            for alt in [Tok::Open(x), Tok::Close(x)] {
                if let Some(s) = apply(alt, &mut stacks) {
                    let c = (cost.0 + 1, cost.1, cost.2 + 1, cost.3 + late);
                    next.push(((pos, s), c, Move::Insert(alt)));
                }
            }
        }
        let needed = stacks.nodes.len() * (n + 1);
        best.resize(needed, None);
        back.resize(needed, None);
        for &(to, c, mv) in &next {
            let h = heuristic(to.0, stacks.depth(to.1));
            if c.0 + h > bound {
                continue;
            }
            let i = slot(to);
            if best[i].is_none_or(|old| c < old) {
                best[i] = Some(c);
                back[i] = Some((state, mv));
                heap.push(Reverse(((c.0 + h, c.1, c.2, c.3), c, to)));
            }
        }
    }

    let Some((mut state, cost)) = goal else {
        return Err(FramingError::Unrepairable {
            best_cost: fallback,
            max_edits: options.max_edits,
        });
    };

    let token_of = |t: Tok| match t {
        Tok::Open(x) => Token::Open(alphabet[x as usize].to_string()),
        Tok::Close(x) => Token::Close(alphabet[x as usize].to_string()),
        Tok::Text => Token::Text,
    };
    let mut script = Vec::new();
    let mut output = Vec::new();
    while let Some((from, mv)) = back[slot(state)] {
        let position = from.0;
        match mv {
            Move::Keep => output.push(stream.0[position].clone()),
            Move::Substitute(to) => {
                let to = token_of(to);
                output.push(to.clone());
                script.push(Edit::Substitute {
                    position,
                    from: stream.0[position].clone(),
                    to,
                });
            }
            Move::Insert(tok) => {
                let token = token_of(tok);
                output.push(token.clone());
                script.push(Edit::Insert { position, token });
            }
            Move::Delete => script.push(Edit::Delete {
                position,
                token: stream.0[position].clone(),
            }),
        }
        state = from;
    }
    output.reverse();
    script.reverse();
    let repaired = TagStream(output);
    debug_assert!(repaired.is_well_formed());
    Ok(Repair {
        stream: repaired,
        script,
        cost: cost.0,
    })
}

/// Cost of a one-pass stack repair: close what a stray Close skips over,
/// drop Closes with no matching Open, close leftovers at the end.
fn greedy_repair_cost(input: &[Tok]) -> usize {
    let mut stack: Vec<u16> = Vec::new();
    let mut cost = 0;
    for t in input {
        match *t {
            Tok::Open(x) => stack.push(x),
            Tok::Close(x) => match stack.iter().rposition(|&y| y == x) {
                Some(at) => {
                    cost += stack.len() - at - 1;
                    stack.truncate(at);
                }
                None => cost += 1,
            },
            Tok::Text => {}
        }
    }
    cost + stack.len()
}
