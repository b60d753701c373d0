//! alist interchange format for sparse parity-check matrices.
//!
//! A leading comment line `# channels c_1 … c_N` names the (1-based)
//! column carrying each channel position; an optional
//! `# known-zero c …` line lists columns fixed to zero.

use std::fmt::Write as _;

use super::{TannerGraph, VariableNode};
use crate::error::{parse_err, Error, Result};

pub fn write_alist(graph: &TannerGraph) -> String {
    let nv = graph.num_variables();
    let nc = graph.num_checks();
    let col_deg: Vec<usize> = (0..nv).map(|v| graph.var_degree(v)).collect();
    let row_deg: Vec<usize> = (0..nc).map(|c| graph.check_degree(c)).collect();
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = row_deg.iter().copied().max().unwrap_or(0);
    let mut out = String::new();
    let chans: Vec<String> = (0..graph.code_length())
        .map(|p| (graph.channel_var(p) + 1).to_string())
        .collect();
    let _ = writeln!(out, "# channels {}", chans.join(" "));
    let zeros: Vec<String> = graph
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.known_zero)
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    if !zeros.is_empty() {
        let _ = writeln!(out, "# known-zero {}", zeros.join(" "));
    }
    let _ = writeln!(out, "{nv} {nc}");
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(col_deg.iter().copied()));
    let _ = writeln!(out, "{}", join(row_deg.iter().copied()));
    for v in 0..nv {
        let mut row: Vec<usize> = graph
            .var_edges(v)
            .iter()
            .map(|&e| graph.edges()[e].check + 1)
            .collect();
        row.resize(max_col, 0);
        let _ = writeln!(out, "{}", join(row.into_iter()));
    }
    for c in 0..nc {
        let mut row: Vec<usize> = graph.check_vars(c).iter().map(|v| v + 1).collect();
        row.resize(max_row, 0);
        let _ = writeln!(out, "{}", join(row.into_iter()));
    }
    out
}

fn join(it: impl Iterator<Item = usize>) -> String {
    it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn read_alist(text: &str) -> Result<TannerGraph> {
    let mut channels: Option<Vec<usize>> = None;
    let mut zeros: Vec<usize> = Vec::new();
    let mut body: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut toks = rest.split_whitespace();
            match toks.next() {
                Some("channels") => channels = Some(ints(ln, toks)?),
                Some("known-zero") => zeros = ints(ln, toks)?,
                _ => {}
            }
            continue;
        }
        body.push((ln, ints(ln, line.split_whitespace())?));
    }
    let mut lines = body.into_iter();
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of file reading {what}")))
    };
    let (ln, dims) = next("dimensions")?;
    let [nv, nc] = dims[..] else {
        return Err(parse_err(ln, "expected `N_v M`"));
    };
    next("maximum degrees")?;
    let (ln, col_deg) = next("column degrees")?;
    if col_deg.len() != nv {
        return Err(parse_err(ln, "column degree count mismatch"));
    }
    let (ln, row_deg) = next("row degrees")?;
    if row_deg.len() != nc {
        return Err(parse_err(ln, "row degree count mismatch"));
    }
    for _ in 0..nv {
        next("column lists")?;
    }
    let mut checks = Vec::with_capacity(nc);
    for &deg in &row_deg {
        let (ln, row) = next("row lists")?;
        let members: Vec<usize> = row.into_iter().filter(|&x| x != 0).map(|x| x - 1).collect();
        if members.len() != deg {
            return Err(parse_err(ln, "row length disagrees with its degree"));
        }
        if members.iter().any(|&v| v >= nv) {
            return Err(parse_err(ln, "column index out of range"));
        }
        checks.push(members);
    }
    let channels = channels.ok_or_else(|| parse_err(1, "missing `# channels` header"))?;
    let mut channel_of = vec![None; nv];
    for (pos, &col) in channels.iter().enumerate() {
        if col == 0 || col > nv || channel_of[col - 1].is_some() {
            return Err(parse_err(1, format!("bad channel column {col}")));
        }
        channel_of[col - 1] = Some(pos);
    }
    let mut nodes: Vec<VariableNode> = (0..nv)
        .map(|v| VariableNode {
            channel_index: channel_of[v],
            known_zero: false,
            origin: v,
        })
        .collect();
    for z in zeros {
        let node = z
            .checked_sub(1)
            .and_then(|i| nodes.get_mut(i))
            .ok_or_else(|| Error::InvalidParameter(format!("known-zero column {z}")))?;
        node.known_zero = true;
    }
    let mut col_check = vec![0; nv];
    for c in &checks {
        for &v in c {
            col_check[v] += 1;
        }
    }
    if col_check != col_deg {
        return Err(parse_err(0, "column degrees disagree with row lists"));
    }
    Ok(super::assemble(channels.len(), nodes, &checks))
}

fn ints<'a>(ln: usize, toks: impl Iterator<Item = &'a str>) -> Result<Vec<usize>> {
    toks.map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad integer {t:?}"))))
        .collect()
}
