//! The staged pseudo-UTM as a concrete four-tape machine.
//!
//! Tapes: description, staging, state, work. One simulated step takes
//! `P = 10N + 6` UTM steps: a scan over the `N` tuples (five squares each),
//! the end marker, three update steps, the rewind and the return to
//! compSymbol.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::machine::{check_input, window_extent, Direction, MachineSpec, TapeWindow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UtmState {
    CompSymbol,
    CompState,
    NotCompState,
    CopySymbol,
    NotCopySymbol,
    CopyState,
    NotCopyState,
    CopyDir,
    NotCopyDir,
    UpdateSymbol,
    UpdateState,
    UpdateDir,
    ResetDescr,
}

impl UtmState {
    pub const ALL: [UtmState; 13] = [
        UtmState::CompSymbol,
        UtmState::CompState,
        UtmState::NotCompState,
        UtmState::CopySymbol,
        UtmState::NotCopySymbol,
        UtmState::CopyState,
        UtmState::NotCopyState,
        UtmState::CopyDir,
        UtmState::NotCopyDir,
        UtmState::UpdateSymbol,
        UtmState::UpdateState,
        UtmState::UpdateDir,
        UtmState::ResetDescr,
    ];

    pub fn index(self) -> usize {
        UtmState::ALL.iter().position(|&s| s == self).expect("listed")
    }

    pub fn from_index(i: usize) -> Option<UtmState> {
        UtmState::ALL.get(i).copied()
    }
}

/// Period of the UTM for a machine with `n_tuples` transition tuples.
pub fn period(n_tuples: usize) -> usize {
    10 * n_tuples + 6
}

/// Contents of one description-tape square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescCell {
    X,
    Symbol(usize),
    State(usize),
    Dir(Direction),
}

/// Description tape `X σ₁ q₁ σ'₁ q'₁ d₁ … σ_N q_N σ'_N q'_N d_N X`.
pub fn description_tape(spec: &MachineSpec) -> Vec<DescCell> {
    let mut tape = vec![DescCell::X];
    for a in 0..spec.tuple_count() {
        let (s, q) = spec.key(a);
        let tr = spec.transitions()[a];
        tape.extend([
            DescCell::Symbol(s),
            DescCell::State(q),
            DescCell::Symbol(tr.write),
            DescCell::State(tr.next),
            DescCell::Dir(tr.dir),
        ]);
    }
    tape.push(DescCell::X);
    tape
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtmConfiguration {
    /// Step index within the current cycle, `0..P`.
    pub mu: usize,
    pub cycle: usize,
    pub desc_head: usize,
    /// Staging squares: symbol, state, direction; `None` is `X`.
    pub staging: [Option<usize>; 3],
    pub sim_state: usize,
    pub work: TapeWindow,
    pub utm_state: UtmState,
    /// Set after the rewind reads the leading `X`; the next step is the
    /// return to compSymbol.
    pub returning: bool,
}

impl UtmConfiguration {
    pub fn initial(x: &[usize], spec: &MachineSpec, extent: usize) -> Result<Self> {
        check_input(x, spec)?;
        Ok(UtmConfiguration {
            mu: 0,
            cycle: 0,
            desc_head: 1,
            staging: [None; 3],
            sim_state: spec.init_state,
            work: TapeWindow::with_input(x, extent)?,
            utm_state: UtmState::CompSymbol,
            returning: false,
        })
    }
}

pub fn utm_step(cfg: &mut UtmConfiguration, spec: &MachineSpec, desc: &[DescCell]) -> Result<()> {
    use UtmState::*;
    let cell = desc[cfg.desc_head];
    let work = cfg.work.read();
    if cfg.returning {
        cfg.returning = false;
        cfg.utm_state = CompSymbol;
    } else {
        match (cfg.utm_state, cell) {
            (CompSymbol, DescCell::X) => {
                cfg.desc_head -= 1;
                cfg.utm_state = UpdateSymbol;
            }
            (CompSymbol, DescCell::Symbol(s)) => {
                cfg.desc_head += 1;
                cfg.utm_state = if s == work { CompState } else { NotCompState };
            }
            (CompState, DescCell::State(q)) => {
                cfg.desc_head += 1;
                cfg.utm_state = if q == cfg.sim_state { CopySymbol } else { NotCopySymbol };
            }
            (NotCompState, DescCell::State(_)) => {
                cfg.desc_head += 1;
                cfg.utm_state = NotCopySymbol;
            }
            (CopySymbol, DescCell::Symbol(s)) => {
                cfg.staging[0] = Some(s);
                cfg.desc_head += 1;
                cfg.utm_state = CopyState;
            }
            (NotCopySymbol, DescCell::Symbol(_)) => {
                cfg.desc_head += 1;
                cfg.utm_state = NotCopyState;
            }
            (CopyState, DescCell::State(q)) => {
                cfg.staging[1] = Some(q);
                cfg.desc_head += 1;
                cfg.utm_state = CopyDir;
            }
            (NotCopyState, DescCell::State(_)) => {
                cfg.desc_head += 1;
                cfg.utm_state = NotCopyDir;
            }
            (CopyDir, DescCell::Dir(d)) => {
                cfg.staging[2] = Some(d.index());
                cfg.desc_head += 1;
                cfg.utm_state = CompSymbol;
            }
            (NotCopyDir, DescCell::Dir(_)) => {
                cfg.desc_head += 1;
                cfg.utm_state = CompSymbol;
            }
            (UpdateSymbol, _) => {
                if let Some(s) = cfg.staging[0].take() {
                    cfg.work.write(s);
                }
                cfg.utm_state = UpdateState;
            }
            (UpdateState, _) => {
                if let Some(q) = cfg.staging[1].take() {
                    cfg.sim_state = q;
                }
                cfg.utm_state = UpdateDir;
            }
            (UpdateDir, _) => {
                if let Some(d) = cfg.staging[2].take() {
                    cfg.work.shift(Direction::from_index(d).expect("staged direction"))?;
                }
                cfg.utm_state = ResetDescr;
            }
            (ResetDescr, DescCell::X) => {
                cfg.desc_head += 1;
                cfg.returning = true;
            }
            (ResetDescr, _) => {
                cfg.desc_head -= 1;
            }
            (state, cell) => unreachable!("description tape out of phase: {state:?} on {cell:?}"),
        }
    }
    cfg.mu += 1;
    if cfg.mu == period(spec.tuple_count()) {
        cfg.mu = 0;
        cfg.cycle += 1;
    }
    Ok(())
}

pub fn utm_run_cycles(x: &[usize], spec: &MachineSpec, t: usize) -> Result<usize> {
    Ok(utm_run_config(x, spec, t)?.sim_state)
}

pub fn utm_run_config(x: &[usize], spec: &MachineSpec, t: usize) -> Result<UtmConfiguration> {
    let desc = description_tape(spec);
    let mut cfg = UtmConfiguration::initial(x, spec, window_extent(x.len(), t))?;
    for _ in 0..t * period(spec.tuple_count()) {
        utm_step(&mut cfg, spec, &desc)?;
    }
    Ok(cfg)
}
