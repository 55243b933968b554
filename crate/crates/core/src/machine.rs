//! Deterministic Turing machines over a single tape.
//!
//! Symbols and states are plain indices. Symbol 0 is the blank, state 0 is
//! reject and state 1 is accept. The transition table is stored in
//! description order: entry `a` is keyed by `(a / m, a % m)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Stay,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Left, Direction::Stay, Direction::Right];

    pub fn index(self) -> usize {
        match self {
            Direction::Left => 0,
            Direction::Stay => 1,
            Direction::Right => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Direction> {
        Direction::ALL.get(i).copied()
    }

    pub fn offset(self) -> i64 {
        self.index() as i64 - 1
    }

    pub fn letter(self) -> &'static str {
        match self {
            Direction::Left => "L",
            Direction::Stay => "S",
            Direction::Right => "R",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Left => "Left",
            Direction::Stay => "Stay",
            Direction::Right => "Right",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub write: usize,
    pub next: usize,
    pub dir: Direction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineSpec {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub init_state: usize,
    transitions: Vec<Transition>,
}

pub const REJECT: usize = 0;
pub const ACCEPT: usize = 1;

impl MachineSpec {
    pub fn new(
        alphabet: Vec<String>,
        states: Vec<String>,
        init_state: usize,
        transitions: Vec<Transition>,
    ) -> Result<Self> {
        let n = alphabet.len();
        let m = states.len();
        if n == 0 {
            return Err(Error::InvalidSpec("alphabet is empty".into()));
        }
        if m < 2 {
            return Err(Error::InvalidSpec("need at least the reject and accept states".into()));
        }
        if transitions.len() != n * m {
            return Err(Error::InvalidSpec(format!("expected {} transitions, found {}", n * m, transitions.len())));
        }
        if init_state >= m {
            return Err(Error::InvalidSpec(format!("init state {init_state} out of range")));
        }
        for (a, tr) in transitions.iter().enumerate() {
            if tr.write >= n || tr.next >= m {
                return Err(Error::InvalidSpec(format!("transition {a} out of range")));
            }
        }
        if alphabet.iter().chain(states.iter()).any(|s| s.is_empty()) {
            return Err(Error::InvalidSpec("empty symbol or state name".into()));
        }
        let alpha: std::collections::HashSet<_> = alphabet.iter().collect();
        if alpha.len() != n {
            return Err(Error::InvalidSpec("duplicate symbol name".into()));
        }
        let st: std::collections::HashSet<_> = states.iter().collect();
        if st.len() != m {
            return Err(Error::InvalidSpec("duplicate state name".into()));
        }
        Ok(MachineSpec { alphabet, states, init_state, transitions })
    }

    /// Builds a spec with generated names (`_`, `s1`, ... and `reject`, `accept`, `q2`, ...).
    pub fn from_table(n: usize, m: usize, init_state: usize, transitions: Vec<Transition>) -> Result<Self> {
        let alphabet = (0..n).map(|i| if i == 0 { "_".to_string() } else { format!("s{i}") }).collect();
        let states = (0..m)
            .map(|i| match i {
                0 => "reject".to_string(),
                1 => "accept".to_string(),
                _ => format!("q{i}"),
            })
            .collect();
        Self::new(alphabet, states, init_state, transitions)
    }

    pub fn n(&self) -> usize {
        self.alphabet.len()
    }

    pub fn m(&self) -> usize {
        self.states.len()
    }

    /// Number of transition tuples, N = n·m.
    pub fn tuple_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn key(&self, a: usize) -> (usize, usize) {
        (a / self.m(), a % self.m())
    }

    pub fn tuple_index(&self, symbol: usize, state: usize) -> usize {
        symbol * self.m() + state
    }

    pub fn delta(&self, symbol: usize, state: usize) -> Transition {
        self.transitions[self.tuple_index(symbol, state)]
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// Parses an input word. Single-character alphabets take the word
    /// character by character; otherwise names are comma separated.
    pub fn parse_input(&self, word: &str) -> Result<Vec<usize>> {
        let single = self.alphabet.iter().all(|s| s.chars().count() == 1);
        let pieces: Vec<String> = if single {
            word.chars().map(|c| c.to_string()).collect()
        } else if word.is_empty() {
            Vec::new()
        } else {
            word.split(',').map(|s| s.trim().to_string()).collect()
        };
        pieces
            .iter()
            .map(|p| {
                self.symbol_index(p).ok_or_else(|| Error::InvalidInput(format!("unknown symbol {p:?} in {word:?}")))
            })
            .collect()
    }

    pub fn format_input(&self, x: &[usize]) -> String {
        let single = self.alphabet.iter().all(|s| s.chars().count() == 1);
        let names: Vec<&str> = x.iter().map(|&s| self.alphabet[s].as_str()).collect();
        if single {
            names.concat()
        } else {
            names.join(",")
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDoc = serde_json::from_str(text)?;
        doc.into_spec()
    }

    pub fn to_json(&self) -> String {
        let doc = SpecDoc::from_spec(self);
        serde_json::to_string_pretty(&doc).expect("spec serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct TransitionDoc {
    read: String,
    state: String,
    write: String,
    next: String,
    #[serde(rename = "move")]
    mv: String,
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    alphabet: Vec<String>,
    states: Vec<String>,
    init_state: String,
    transitions: Vec<TransitionDoc>,
}

impl SpecDoc {
    fn into_spec(self) -> Result<MachineSpec> {
        let n = self.alphabet.len();
        let m = self.states.len();
        let sym = |s: &str| {
            self.alphabet.iter().position(|a| a == s).ok_or_else(|| Error::InvalidSpec(format!("unknown symbol {s:?}")))
        };
        let st = |s: &str| {
            self.states.iter().position(|a| a == s).ok_or_else(|| Error::InvalidSpec(format!("unknown state {s:?}")))
        };
        let mut table: Vec<Option<Transition>> = vec![None; n * m];
        for tr in &self.transitions {
            let (r, q) = (sym(&tr.read)?, st(&tr.state)?);
            let dir = match tr.mv.as_str() {
                "L" => Direction::Left,
                "S" => Direction::Stay,
                "R" => Direction::Right,
                other => return Err(Error::InvalidSpec(format!("unknown move {other:?}"))),
            };
            let slot = &mut table[r * m + q];
            if slot.is_some() {
                return Err(Error::InvalidSpec(format!("duplicate key ({}, {})", tr.read, tr.state)));
            }
            *slot = Some(Transition { write: sym(&tr.write)?, next: st(&tr.next)?, dir });
        }
        let mut transitions = Vec::with_capacity(n * m);
        for (a, t) in table.into_iter().enumerate() {
            match t {
                Some(t) => transitions.push(t),
                None => {
                    return Err(Error::InvalidSpec(format!(
                        "missing key ({}, {})",
                        self.alphabet.get(a / m.max(1)).map(String::as_str).unwrap_or("?"),
                        self.states.get(a % m.max(1)).map(String::as_str).unwrap_or("?")
                    )))
                }
            }
        }
        let init = st(&self.init_state)?;
        MachineSpec::new(self.alphabet, self.states, init, transitions)
    }

    fn from_spec(spec: &MachineSpec) -> Self {
        let transitions = (0..spec.tuple_count())
            .map(|a| {
                let (s, q) = spec.key(a);
                let tr = spec.transitions[a];
                TransitionDoc {
                    read: spec.alphabet[s].clone(),
                    state: spec.states[q].clone(),
                    write: spec.alphabet[tr.write].clone(),
                    next: spec.states[tr.next].clone(),
                    mv: tr.dir.letter().to_string(),
                }
            })
            .collect();
        SpecDoc {
            alphabet: spec.alphabet.clone(),
            states: spec.states.clone(),
            init_state: spec.states[spec.init_state].clone(),
            transitions,
        }
    }
}

/// Finite stretch of tape covering positions `-extent..=extent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapeWindow {
    extent: usize,
    cells: Vec<usize>,
    head: i64,
}

impl TapeWindow {
    /// Blank tape with `x` written at positions `0..|x|` and the head at 0.
    pub fn with_input(x: &[usize], extent: usize) -> Result<Self> {
        if x.len() > extent + 1 {
            return Err(Error::WindowOverflow { position: x.len() as i64 - 1, half_width: extent });
        }
        let mut cells = vec![0; 2 * extent + 1];
        for (i, &s) in x.iter().enumerate() {
            cells[extent + i] = s;
        }
        Ok(TapeWindow { extent, cells, head: 0 })
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn head(&self) -> i64 {
        self.head
    }

    pub fn get(&self, pos: i64) -> usize {
        let idx = pos + self.extent as i64;
        if idx < 0 || idx as usize >= self.cells.len() {
            0
        } else {
            self.cells[idx as usize]
        }
    }

    pub fn read(&self) -> usize {
        self.get(self.head)
    }

    pub fn write(&mut self, symbol: usize) {
        let idx = (self.head + self.extent as i64) as usize;
        self.cells[idx] = symbol;
    }

    pub fn shift(&mut self, dir: Direction) -> Result<()> {
        let next = self.head + dir.offset();
        if next.unsigned_abs() as usize > self.extent {
            return Err(Error::WindowOverflow { position: next, half_width: self.extent });
        }
        self.head = next;
        Ok(())
    }

    /// Cells from `-extent` to `extent`.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }
}

/// Default window half-width for running `t` steps on input `x`.
pub fn window_extent(input_len: usize, t: usize) -> usize {
    input_len.max(1) + t
}

pub fn tm_step(tape: &mut TapeWindow, state: &mut usize, spec: &MachineSpec) -> Result<()> {
    let tr = spec.delta(tape.read(), *state);
    tape.write(tr.write);
    *state = tr.next;
    tape.shift(tr.dir)
}

pub fn tm_run(x: &[usize], spec: &MachineSpec, t: usize) -> Result<usize> {
    let (_, state) = tm_run_config(x, spec, t)?;
    Ok(state)
}

pub fn tm_run_config(x: &[usize], spec: &MachineSpec, t: usize) -> Result<(TapeWindow, usize)> {
    check_input(x, spec)?;
    let mut tape = TapeWindow::with_input(x, window_extent(x.len(), t))?;
    let mut state = spec.init_state;
    for _ in 0..t {
        tm_step(&mut tape, &mut state, spec)?;
    }
    Ok((tape, state))
}

pub(crate) fn check_input(x: &[usize], spec: &MachineSpec) -> Result<()> {
    match x.iter().find(|&&s| s >= spec.n()) {
        Some(s) => Err(Error::InvalidInput(format!("symbol index {s} out of range"))),
        None => Ok(()),
    }
}

fn detect_a(rows: [(usize, usize, Direction); 6]) -> MachineSpec {
    let transitions = rows.iter().map(|&(write, next, dir)| Transition { write, next, dir }).collect();
    MachineSpec::new(
        vec!["_".into(), "A".into(), "B".into()],
        vec!["reject".into(), "accept".into()],
        REJECT,
        transitions,
    )
    .expect("builtin spec is valid")
}

/// The machine that scans right over B until it meets an A (or a blank).
pub fn detect_a0() -> MachineSpec {
    use Direction::*;
    detect_a([
        (0, REJECT, Stay),
        (0, ACCEPT, Stay),
        (1, ACCEPT, Stay),
        (1, ACCEPT, Stay),
        (2, REJECT, Right),
        (2, ACCEPT, Stay),
    ])
}

/// A second solution of the same problem that erases as it goes.
pub fn detect_a1() -> MachineSpec {
    use Direction::*;
    detect_a([
        (2, REJECT, Right),
        (0, ACCEPT, Left),
        (0, ACCEPT, Left),
        (0, ACCEPT, Left),
        (0, REJECT, Right),
        (0, ACCEPT, Left),
    ])
}

pub fn builtin(name: &str) -> Option<MachineSpec> {
    match name {
        "detectA0" | "detect_a0" => Some(detect_a0()),
        "detectA1" | "detect_a1" => Some(detect_a1()),
        _ => None,
    }
}
