//! Reduction of the encoding factor graph to a sparse Tanner graph.
//!
//! Rules, applied until none fires:
//!
//! 1. a known-zero variable is removed from all its checks;
//! 2. a degree-1 check forces its variable to zero and is removed;
//! 3. a degree-2 check equates its two variables: they are merged (the
//!    channel-observed one survives) and the check is removed;
//! 4. hidden variables of degree 0 are removed;
//! 5. a check holding a hidden variable of degree 1 constrains nothing
//!    else and is removed;
//! 6. a hidden variable of degree 2 is eliminated by replacing its two
//!    checks with their GF(2) sum.
//!
//! Rule 6 fires only when rules 1-5 are exhausted. A degree-2 check between
//! two channel-observed variables is a genuine repetition constraint and is
//! kept. Every rule preserves the set of channel-bit assignments that extend
//! to a solution.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{TannerGraph, VariableNode};
use crate::error::{Error, Result};

/// Number of times each rule fired.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PruneStats {
    pub zero_removed: usize,
    pub degree1_checks: usize,
    pub merges: usize,
    pub dropped_hidden: usize,
    pub dangling_checks: usize,
    pub joined_checks: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Action {
    ClearZero(usize),
    ForceZero(usize),
    Merge(usize),
    DropHidden(usize),
    Dangling(usize),
    Join(usize),
}

struct Work {
    code_length: usize,
    nodes: Vec<VariableNode>,
    alive: Vec<bool>,
    checks: Vec<Option<BTreeSet<usize>>>,
    var_checks: Vec<BTreeSet<usize>>,
    parent: Vec<usize>,
    stats: PruneStats,
}

impl Work {
    fn new(graph: &TannerGraph) -> Self {
        let nv = graph.num_variables();
        let mut var_checks = vec![BTreeSet::new(); nv];
        let checks = (0..graph.num_checks())
            .map(|c| {
                let members: BTreeSet<usize> = graph.check_vars(c).into_iter().collect();
                for &v in &members {
                    var_checks[v].insert(c);
                }
                Some(members)
            })
            .collect();
        Self {
            code_length: graph.code_length(),
            nodes: graph.variables().to_vec(),
            alive: vec![true; nv],
            checks,
            var_checks,
            parent: (0..nv).collect(),
            stats: PruneStats::default(),
        }
    }

    fn hidden(&self, v: usize) -> bool {
        self.nodes[v].is_hidden()
    }

    /// Hidden and unconstrained, so it can absorb any parity.
    fn free(&self, v: usize) -> bool {
        self.hidden(v) && !self.nodes[v].known_zero
    }

    fn degree(&self, c: usize) -> usize {
        self.checks[c].as_ref().map_or(0, |s| s.len())
    }

    fn detach(&mut self, v: usize, c: usize) {
        if let Some(s) = self.checks[c].as_mut() {
            s.remove(&v);
        }
        self.var_checks[v].remove(&c);
    }

    /// GF(2) toggle of variable `v` in check `c`.
    fn toggle(&mut self, v: usize, c: usize) {
        let s = self.checks[c].as_mut().expect("live check");
        if !s.remove(&v) {
            s.insert(v);
            self.var_checks[v].insert(c);
        } else {
            self.var_checks[v].remove(&c);
        }
    }

    fn remove_check(&mut self, c: usize) {
        if let Some(members) = self.checks[c].take() {
            for v in members {
                self.var_checks[v].remove(&c);
            }
        }
    }

    fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    /// Actions applicable in the current state, in canonical order.
    fn candidates(&self, include_join: bool) -> Vec<Action> {
        let mut out = Vec::new();
        for v in 0..self.nodes.len() {
            if self.alive[v] && self.nodes[v].known_zero && !self.var_checks[v].is_empty() {
                out.push(Action::ClearZero(v));
            }
        }
        for (c, s) in self.checks.iter().enumerate() {
            let Some(s) = s else { continue };
            match s.len() {
                1 => out.push(Action::ForceZero(c)),
                2 if s.iter().any(|&v| self.hidden(v)) => out.push(Action::Merge(c)),
                _ => {}
            }
        }
        for (c, s) in self.checks.iter().enumerate() {
            let Some(s) = s else { continue };
            if s.len() != 1
                && s
                    .iter()
                    .any(|&v| self.free(v) && self.var_checks[v].len() == 1)
            {
                out.push(Action::Dangling(c));
            }
        }
        for v in 0..self.nodes.len() {
            if self.alive[v] && self.hidden(v) && self.var_checks[v].is_empty() {
                out.push(Action::DropHidden(v));
            }
        }
        if include_join {
            for v in 0..self.nodes.len() {
                if self.alive[v] && self.free(v) && self.var_checks[v].len() == 2 {
                    out.push(Action::Join(v));
                }
            }
        }
        out
    }

    /// Applies `a` if it is still applicable; returns whether it fired.
    fn apply(&mut self, a: Action) -> Result<bool> {
        match a {
            Action::ClearZero(v) => {
                if !self.alive[v] || !self.nodes[v].known_zero || self.var_checks[v].is_empty() {
                    return Ok(false);
                }
                let cs: Vec<usize> = self.var_checks[v].iter().copied().collect();
                for c in cs {
                    self.detach(v, c);
                }
                self.stats.zero_removed += 1;
            }
            Action::ForceZero(c) => {
                if self.degree(c) != 1 {
                    return Ok(false);
                }
                let v = *self.checks[c].as_ref().unwrap().iter().next().unwrap();
                self.remove_check(c);
                self.nodes[v].known_zero = true;
                self.stats.degree1_checks += 1;
            }
            Action::Merge(c) => {
                if self.degree(c) != 2 {
                    return Ok(false);
                }
                let pair: Vec<usize> = self.checks[c].as_ref().unwrap().iter().copied().collect();
                let (a, b) = (pair[0], pair[1]);
                let (keep, drop) = match (self.hidden(a), self.hidden(b)) {
                    (false, false) => return Ok(false),
                    (true, false) => (b, a),
                    _ => (a, b),
                };
                self.merge(keep, drop, c)?;
                self.stats.merges += 1;
            }
            Action::DropHidden(v) => {
                if !self.alive[v] || !self.hidden(v) || !self.var_checks[v].is_empty() {
                    return Ok(false);
                }
                self.alive[v] = false;
                self.stats.dropped_hidden += 1;
            }
            Action::Dangling(c) => {
                let Some(s) = self.checks[c].as_ref() else {
                    return Ok(false);
                };
                if s.len() == 1
                    || !s
                        .iter()
                        .any(|&v| self.free(v) && self.var_checks[v].len() == 1)
                {
                    return Ok(false);
                }
                self.remove_check(c);
                self.stats.dangling_checks += 1;
            }
            Action::Join(v) => {
                if !self.alive[v] || !self.free(v) || self.var_checks[v].len() != 2 {
                    return Ok(false);
                }
                let cs: Vec<usize> = self.var_checks[v].iter().copied().collect();
                let (into, from) = (cs[0], cs[1]);
                let members: Vec<usize> = self.checks[from].as_ref().unwrap().iter().copied().collect();
                self.remove_check(from);
                for m in members {
                    self.toggle(m, into);
                }
                debug_assert!(self.var_checks[v].is_empty());
                self.alive[v] = false;
                if self.degree(into) == 0 {
                    self.remove_check(into);
                }
                self.stats.joined_checks += 1;
            }
        }
        Ok(true)
    }

    fn merge(&mut self, keep: usize, drop: usize, via: usize) -> Result<()> {
        let (ka, kb) = (self.find(keep), self.find(drop));
        if !self.hidden(ka) && !self.hidden(kb) && ka != kb {
            return Err(Error::Construction(format!(
                "cannot merge channel positions {} and {}",
                self.nodes[ka].channel_index.unwrap() + 1,
                self.nodes[kb].channel_index.unwrap() + 1
            )));
        }
        self.remove_check(via);
        let cs: Vec<usize> = self.var_checks[drop].iter().copied().collect();
        for c in cs {
            self.detach(drop, c);
            self.toggle(keep, c);
            if self.degree(c) == 0 {
                self.remove_check(c);
            }
        }
        self.nodes[keep].known_zero |= self.nodes[drop].known_zero;
        self.alive[drop] = false;
        self.parent[drop] = keep;
        Ok(())
    }

    fn sweep_empty_checks(&mut self) {
        for c in 0..self.checks.len() {
            if self.degree(c) == 0 {
                self.checks[c] = None;
            }
        }
    }

    fn finish(mut self) -> TannerGraph {
        self.sweep_empty_checks();
        let live: Vec<usize> = (0..self.nodes.len())
            .filter(|&v| self.alive[v] && (!self.hidden(v) || !self.var_checks[v].is_empty()))
            .collect();
        let mut index = vec![usize::MAX; self.nodes.len()];
        for (i, &v) in live.iter().enumerate() {
            index[v] = i;
        }
        let nodes: Vec<VariableNode> = live.iter().map(|&v| self.nodes[v].clone()).collect();
        let checks: Vec<Vec<usize>> = self
            .checks
            .iter()
            .flatten()
            .map(|s| s.iter().map(|&v| index[v]).collect())
            .collect();
        super::assemble(self.code_length, nodes, &checks).canonical()
    }
}

/// Prunes `graph` with the canonical rule order.
pub fn prune(graph: &TannerGraph) -> Result<TannerGraph> {
    prune_with_stats(graph).map(|(g, _)| g)
}

/// Like [`prune`], also reporting how often each rule fired.
pub fn prune_with_stats(graph: &TannerGraph) -> Result<(TannerGraph, PruneStats)> {
    let mut w = Work::new(graph);
    loop {
        let mut fired = false;
        for a in w.candidates(false) {
            fired |= w.apply(a)?;
        }
        if fired {
            continue;
        }
        // One join at a time, then back to the cheap rules.
        let joins = w.candidates(true);
        let mut joined = false;
        for a in joins.into_iter().filter(|a| matches!(a, Action::Join(_))) {
            if w.apply(a)? {
                joined = true;
                break;
            }
        }
        if !joined {
            break;
        }
    }
    let stats = w.stats;
    Ok((w.finish(), stats))
}

/// Prunes with the rules applied in a random order drawn from `seed`.
/// The result may differ structurally from [`prune`] but encodes the same
/// code on the channel positions.
pub fn prune_shuffled(graph: &TannerGraph, seed: u64) -> Result<TannerGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Work::new(graph);
    loop {
        let mut cands = w.candidates(true);
        if cands.is_empty() {
            break;
        }
        cands.shuffle(&mut rng);
        let mut any = false;
        for a in cands {
            if w.apply(a)? {
                any = true;
                break;
            }
        }
        if !any {
            break;
        }
    }
    Ok(w.finish())
}
