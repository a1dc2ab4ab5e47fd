use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::NominationList;
use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// A curve over `k = 1..=k_max` with its chance baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalCurve {
    pub values: Vec<f64>,
    pub chance: Vec<f64>,
}

impl EvalCurve {
    pub fn k_max(&self) -> usize {
        self.values.len()
    }

    /// Value at `k` (1-based).
    pub fn at(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,value,chance\n");
        for (i, (v, c)) in self.values.iter().zip(&self.chance).enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, fmt_f64(*v), fmt_f64(*c));
        }
        out
    }
}

pub fn write_curve_csv(path: impl AsRef<Path>, curve: &EvalCurve) -> Result<()> {
    std::fs::write(path, curve.to_csv())?;
    Ok(())
}

/// Number of queries whose true match sits within the top `k` of their own
/// list, for every `k` up to `k_max`. Chance is `k* k / n2` with `k*` the
/// number of queries and `n2` the size of the candidate pool.
///
/// `truth(q)` gives the candidate id matching query `q`; a `None` is a
/// coverage error. Lists must be in the same id space as the truth.
pub fn rank_at_k_curve(
    lists: &[NominationList],
    truth: impl Fn(usize) -> Option<usize>,
    k_max: usize,
    n2: usize,
) -> Result<EvalCurve> {
    let mut hits = vec![0usize; k_max + 1];
    for list in lists {
        let q = *list
            .queries
            .first()
            .ok_or_else(|| Error::validation("nomination list", "has no query"))?;
        let target = truth(q).ok_or(Error::Coverage(q))?;
        if let Some(r) = list.rank_of(target) {
            if r <= k_max {
                hits[r] += 1;
            }
        }
    }
    let mut values = Vec::with_capacity(k_max);
    let mut acc = 0;
    for h in &hits[1..] {
        acc += h;
        values.push(acc as f64);
    }
    let kstar = lists.len() as f64;
    let chance = (1..=k_max).map(|k| kstar * k as f64 / n2 as f64).collect();
    Ok(EvalCurve { values, chance })
}

/// Mean precision at `k` per query class. `classes[v]` is the class of
/// vertex `v` (shared by queries and candidates); `None` marks vertices with
/// no class, such as noise. Chance for a class is its share of all vertices.
pub fn precision_at_k(
    lists: &[NominationList],
    classes: &[Option<usize>],
    k_max: usize,
) -> Result<BTreeMap<usize, EvalCurve>> {
    let mut sums: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
    for list in lists {
        let q = *list
            .queries
            .first()
            .ok_or_else(|| Error::validation("nomination list", "has no query"))?;
        let Some(class) = classes.get(q).copied().flatten() else {
            return Err(Error::Coverage(q));
        };
        let entry = sums.entry(class).or_insert_with(|| (vec![0.0; k_max], 0));
        entry.1 += 1;
        let mut hits = 0usize;
        for k in 1..=k_max {
            if let Some(&(c, _)) = list.ranked.get(k - 1) {
                if classes.get(c).copied().flatten() == Some(class) {
                    hits += 1;
                }
            }
            entry.0[k - 1] += hits as f64 / k as f64;
        }
    }
    let total = classes.len() as f64;
    Ok(sums
        .into_iter()
        .map(|(class, (sum, count))| {
            let share = classes.iter().filter(|c| **c == Some(class)).count() as f64 / total;
            (
                class,
                EvalCurve {
                    values: sum.into_iter().map(|s| s / count as f64).collect(),
                    chance: vec![share; k_max],
                },
            )
        })
        .collect())
}
