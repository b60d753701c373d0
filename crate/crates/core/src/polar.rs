//! Polar code construction and encoding.
//!
//! The generator is `G_N = F^{⊗n}` with `F = [[1,0],[1,1]]`, without bit
//! reversal. Indices are 0-based internally; the frozen-set file and
//! [`CodeSpec::info_set_one_based`] use 1-based positions.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{parse_err, Error, Result};
use crate::gf2::BitMatrix;

/// Largest supported number of stages (`N = 4096`).
pub const MAX_STAGES: usize = 12;

/// Default Bhattacharyya design parameter for [`construct_frozen_set`].
pub const DEFAULT_DESIGN_PARAM: f64 = 0.5;

/// Returns `F^{⊗n}`, an `N × N` matrix with `N = 2^n`.
pub fn kronecker_generator(n: usize) -> Result<BitMatrix> {
    if n == 0 || n > MAX_STAGES {
        return Err(Error::InvalidParameter(format!(
            "stage count {n} outside 1..={MAX_STAGES}"
        )));
    }
    let kernel = BitMatrix::from_rows(&[[1u8, 0], [1, 1]]);
    let mut g = kernel.clone();
    for _ in 1..n {
        g = g.kron(&kernel);
    }
    Ok(g)
}

/// An `(N, K)` polar code: block length, information set and generator.
#[derive(Clone)]
pub struct CodeSpec {
    stages: usize,
    info: Vec<usize>,
    frozen: Vec<bool>,
    generator: Arc<BitMatrix>,
}

impl PartialEq for CodeSpec {
    fn eq(&self, other: &Self) -> bool {
        self.stages == other.stages && self.info == other.info
    }
}

impl Eq for CodeSpec {}

impl std::fmt::Debug for CodeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CodeSpec")
            .field("n", &self.length())
            .field("k", &self.dimension())
            .field("info", &self.info_set_one_based())
            .finish()
    }
}

impl CodeSpec {
    /// Builds a code from a 0-based information set.
    pub fn from_info_set(length: usize, info: &[usize]) -> Result<Self> {
        let stages = log2_exact(length)?;
        let generator = Arc::new(kronecker_generator(stages)?);
        let mut frozen = vec![true; length];
        let mut sorted = info.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidParameter(format!(
                    "duplicate information index {}",
                    w[0] + 1
                )));
            }
        }
        for &i in &sorted {
            if i >= length {
                return Err(Error::InvalidParameter(format!(
                    "information index {} outside 1..={length}",
                    i + 1
                )));
            }
            frozen[i] = false;
        }
        if sorted.is_empty() {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        Ok(Self {
            stages,
            info: sorted,
            frozen,
            generator,
        })
    }

    /// Builds a code from a 1-based information set.
    pub fn from_one_based(length: usize, info: &[usize]) -> Result<Self> {
        let zero_based = info
            .iter()
            .map(|&i| {
                i.checked_sub(1).ok_or_else(|| {
                    Error::InvalidParameter("information indices are 1-based".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_info_set(length, &zero_based)
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    /// Block length `N`.
    pub fn length(&self) -> usize {
        1 << self.stages
    }

    /// Number of information bits `K`.
    pub fn dimension(&self) -> usize {
        self.info.len()
    }

    pub fn rate(&self) -> f64 {
        self.dimension() as f64 / self.length() as f64
    }

    /// Sorted 0-based information positions.
    pub fn info_set(&self) -> &[usize] {
        &self.info
    }

    pub fn info_set_one_based(&self) -> Vec<usize> {
        self.info.iter().map(|&i| i + 1).collect()
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.length()).filter(|&i| self.frozen[i]).collect()
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        self.frozen[index]
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    /// Places `info` on the information positions and zeros elsewhere.
    pub fn expand(&self, info: &[u8]) -> Result<Vec<u8>> {
        check_len(self.dimension(), info.len())?;
        let mut u = vec![0u8; self.length()];
        for (&pos, &b) in self.info.iter().zip(info) {
            u[pos] = b & 1;
        }
        Ok(u)
    }

    /// Frozen-set file contents: `N K` then the 1-based information set.
    pub fn to_frozen_file(&self) -> String {
        let mut out = format!("{} {}\n", self.length(), self.dimension());
        let idx: Vec<String> = self.info_set_one_based().iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{}", idx.join(" "));
        out
    }

    /// Parses a frozen-set file. Blank lines and `#` comments are skipped.
    pub fn parse_frozen_file(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad integer {t:?}"))))
            .collect::<Result<_>>()?;
        let [length, k] = dims[..] else {
            return Err(parse_err(ln, "header must be `N K`"));
        };
        let (ln, body) = lines
            .next()
            .ok_or_else(|| parse_err(ln + 1, "missing information set"))?;
        let info: Vec<usize> = body
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad index {t:?}"))))
            .collect::<Result<_>>()?;
        if info.len() != k {
            return Err(parse_err(
                ln,
                format!("expected {k} indices, found {}", info.len()),
            ));
        }
        if info.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(ln, "indices must be strictly ascending"));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(parse_err(ln, "trailing content"));
        }
        Self::from_one_based(length, &info).map_err(|e| parse_err(ln, e.to_string()))
    }
}

fn log2_exact(length: usize) -> Result<usize> {
    if length < 2 || !length.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "block length {length} is not a power of two >= 2"
        )));
    }
    Ok(length.trailing_zeros() as usize)
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Bhattacharyya parameters of the synthesized channels, 0-based.
pub fn bhattacharyya(length: usize, design_param: f64) -> Result<Vec<f64>> {
    log2_exact(length)?;
    if !(design_param > 0.0 && design_param < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "design parameter {design_param} outside (0, 1)"
        )));
    }
    let mut z = vec![design_param];
    while z.len() < length {
        z = z
            .iter()
            .flat_map(|&zi| [2.0 * zi - zi * zi, zi * zi])
            .collect();
    }
    Ok(z)
}

/// Picks the `K` most reliable positions by the Bhattacharyya recursion.
///
/// Ties go to the lower index.
pub fn construct_frozen_set(length: usize, k: usize, design_param: f64) -> Result<CodeSpec> {
    if k == 0 || k > length {
        return Err(Error::InvalidParameter(format!(
            "K = {k} outside 1..={length}"
        )));
    }
    let z = bhattacharyya(length, design_param)?;
    let mut order: Vec<usize> = (0..length).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    CodeSpec::from_info_set(length, &order[..k])
}

/// Non-systematic encoding `x = u · G_N` with frozen bits at zero.
pub fn encode(spec: &CodeSpec, info: &[u8]) -> Result<Vec<u8>> {
    let u = spec.expand(info)?;
    Ok(spec.generator.left_mul_vec(&u))
}

/// Systematic encoding: the returned codeword carries `info` on the
/// information positions.
///
/// `G_N` is lower unitriangular, so its restriction to the information
/// rows and columns is too, and `u_A` follows by back substitution.
pub fn systematic_encode(spec: &CodeSpec, info: &[u8]) -> Result<Vec<u8>> {
    check_len(spec.dimension(), info.len())?;
    let g = spec.generator();
    let a = spec.info_set();
    let mut u_a = vec![0u8; a.len()];
    for k in (0..a.len()).rev() {
        let mut bit = info[k] & 1;
        for i in k + 1..a.len() {
            if u_a[i] == 1 && g.get(a[i], a[k]) {
                bit ^= 1;
            }
        }
        u_a[k] = bit;
    }
    let x = encode(spec, &u_a)?;
    if a.iter().zip(info).any(|(&p, &d)| x[p] != d & 1) {
        return Err(Error::Internal("systematic system unsolvable".into()));
    }
    Ok(x)
}
