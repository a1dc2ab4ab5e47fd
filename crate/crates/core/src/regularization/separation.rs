use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::is_symmetric;

/// Which family of separation conditions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationMode {
    /// Conditions on the diagonal of `B`.
    Diagonal,
    /// Conditions on the off-diagonal entries of `B`.
    OffDiagonal,
}

/// One condition's margin and where it is attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationTerm {
    pub name: String,
    /// The minimum; `None` when the index set is empty.
    pub margin: Option<f64>,
    /// Entries of `B` attaining the minimum, 0-based `[(i, j), (k, l)]`.
    pub argmin: Option<[(usize, usize); 2]>,
}

impl SeparationTerm {
    pub fn holds(&self) -> bool {
        self.margin.map_or(true, |m| m > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub mode: SeparationMode,
    pub terms: Vec<SeparationTerm>,
}

impl SeparationReport {
    /// True when every margin is positive.
    pub fn passed(&self) -> bool {
        self.terms.iter().all(SeparationTerm::holds)
    }
}

impl std::fmt::Display for SeparationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for t in &self.terms {
            match (t.margin, t.argmin) {
                (Some(m), Some([(i, j), (k, l)])) => writeln!(
                    f,
                    "{:<5} margin {m:.6}  at B[{},{}] vs B[{},{}]  {}",
                    t.name,
                    i + 1,
                    j + 1,
                    k + 1,
                    l + 1,
                    if t.holds() { "ok" } else { "FLAGGED" }
                )?,
                _ => writeln!(f, "{:<5} vacuous (no index pairs)", t.name)?,
            }
        }
        write!(f, "verdict: {}", if self.passed() { "pass" } else { "flagged" })
    }
}

fn minimize(
    name: &str,
    entries: &[(usize, usize)],
    skip: impl Fn((usize, usize), (usize, usize)) -> bool,
    value: impl Fn((usize, usize), (usize, usize)) -> f64,
) -> SeparationTerm {
    let mut best: Option<(f64, [(usize, usize); 2])> = None;
    for &a in entries {
        for &b in entries {
            if skip(a, b) {
                continue;
            }
            let v = value(a, b).abs();
            if best.map_or(true, |(m, _)| v < m) {
                best = Some((v, [a, b]));
            }
        }
    }
    SeparationTerm {
        name: name.to_string(),
        margin: best.map(|(m, _)| m),
        argmin: best.map(|(_, a)| a),
    }
}

/// Evaluates the three separation margins of the chosen family:
///
/// * diagonal: `min_{i != j} |B_ii - B_jj|`,
///   `min_{i,j} |B_ii - B_jj - s+ (1 - B_jj)|` and
///   `min_{i,j} |B_ii - B_jj (1 - s-)|`;
/// * off-diagonal: the same three forms over entries `B_ij`, `B_kl` with
///   `i != j`, `k != l`, the first one also requiring `{i,j} != {k,l}`.
///
/// Minima range over all index pairs as written, so the second and third
/// diagonal terms include `i = j`.
pub fn check_separation(b: &DMatrix<f64>, s_plus: f64, s_minus: f64, mode: SeparationMode) -> Result<SeparationReport> {
    if !is_symmetric(b, 0.0) || b.nrows() == 0 {
        return Err(Error::validation("block matrix", "must be square, symmetric and nonempty"));
    }
    let k = b.nrows();
    let at = |e: (usize, usize)| b[e];
    let (entries, prefix): (Vec<(usize, usize)>, &str) = match mode {
        SeparationMode::Diagonal => ((0..k).map(|i| (i, i)).collect(), "A1"),
        SeparationMode::OffDiagonal => (
            (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j))).collect(),
            "A2",
        ),
    };
    let same = |a: (usize, usize), c: (usize, usize)| (a == c) || (a == (c.1, c.0));
    let terms = vec![
        minimize(&format!("{prefix}.1"), &entries, same, |a, c| at(a) - at(c)),
        minimize(&format!("{prefix}.2"), &entries, |_, _| false, |a, c| {
            at(a) - at(c) - s_plus * (1.0 - at(c))
        }),
        minimize(&format!("{prefix}.3"), &entries, |_, _| false, |a, c| {
            at(a) - at(c) * (1.0 - s_minus)
        }),
    ];
    Ok(SeparationReport { mode, terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_b() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, 0.3])
    }

    #[test]
    fn reference_matrix_diagonal_margins() {
        let r = check_separation(&reference_b(), 0.2, 0.2, SeparationMode::Diagonal).unwrap();
        let m: Vec<f64> = r.terms.iter().map(|t| t.margin.unwrap()).collect();
        assert!((m[0] - 0.4).abs() < 1e-12);
        // attained at i = j = 1: |0.7 - 0.7 - 0.2 * 0.3|
        assert!((m[1] - 0.06).abs() < 1e-12);
        // attained at i = j = 2: |0.3 - 0.3 * 0.8|
        assert!((m[2] - 0.06).abs() < 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn equal_diagonal_is_flagged() {
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, 0.5]);
        let r = check_separation(&b, 0.2, 0.2, SeparationMode::Diagonal).unwrap();
        assert_eq!(r.terms[0].margin, Some(0.0));
        assert!(!r.passed());
    }

    #[test]
    fn no_deletion_collapses_third_term() {
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, 0.5]);
        let r = check_separation(&b, 0.3, 0.0, SeparationMode::Diagonal).unwrap();
        assert_eq!(r.terms[2].margin, Some(0.0));
    }

    #[test]
    fn two_blocks_off_diagonal_first_term_is_vacuous() {
        let r = check_separation(&reference_b(), 0.2, 0.2, SeparationMode::OffDiagonal).unwrap();
        assert_eq!(r.terms[0].margin, None);
        assert!((r.terms[1].margin.unwrap() - 0.16).abs() < 1e-12);
        assert!((r.terms[2].margin.unwrap() - 0.04).abs() < 1e-12);
    }
}
