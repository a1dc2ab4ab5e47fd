use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::GrdpgSpec;
use crate::error::{Error, Result};
use crate::linalg::{rows_of, vstack, Signature};
use crate::rng::{Rng, SeedStream};

/// Region the noise latent positions are drawn from, uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseRegion {
    /// Axis-aligned box `[lower_i, upper_i]`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Unit-sphere points with nonnegative coordinates.
    SphereOrthant,
}

/// Diffuse ("white") noise vertices attached through the GRDPG kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffuseNoiseSpec {
    pub m: usize,
    pub region: NoiseRegion,
    /// Applied as `z -> R z` to every sampled position.
    pub rotation: Option<DMatrix<f64>>,
}

fn draw_point(region: &NoiseRegion, d: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    match region {
        NoiseRegion::Box { lower, upper } => {
            if lower.len() != d || upper.len() != d {
                return Err(Error::Dimension(format!("box bounds must have {d} entries")));
            }
            Ok(lower
                .iter()
                .zip(upper)
                .map(|(&lo, &hi)| lo + (hi - lo) * rng.gen::<f64>())
                .collect())
        }
        NoiseRegion::SphereOrthant => loop {
            let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-300 {
                break Ok(g.into_iter().map(|x| x / norm).collect());
            }
        },
    }
}

/// Appends `spec.m` noise rows to the signal positions `y`.
///
/// Returns the combined GRDPG and a mask marking the noise vertices (the last
/// `m` rows). Every pairwise probability is checked; an infeasible pair is an
/// error naming the two vertices.
pub fn contaminate_diffuse(
    y: &DMatrix<f64>,
    signature: Signature,
    spec: &DiffuseNoiseSpec,
    nu: f64,
    seed: u64,
) -> Result<(GrdpgSpec, Vec<bool>)> {
    let d = y.ncols();
    if let NoiseRegion::Box { lower, upper } = &spec.region {
        if lower.iter().zip(upper).any(|(lo, hi)| lo > hi) {
            return Err(Error::validation("noise box", "lower bound exceeds upper bound"));
        }
    }
    if let Some(r) = &spec.rotation {
        if r.nrows() != d || r.ncols() != d {
            return Err(Error::Dimension(format!("rotation must be {d}x{d}")));
        }
    }
    let mut rng = SeedStream::new(seed).rng();
    let mut z = DMatrix::zeros(spec.m, d);
    for i in 0..spec.m {
        let mut pt = nalgebra::DVector::from_vec(draw_point(&spec.region, d, &mut rng)?);
        if let Some(r) = &spec.rotation {
            pt = r * pt;
        }
        z.set_row(i, &pt.transpose());
    }
    let x = vstack(y, &z)?;
    let n = y.nrows();
    let mask = (0..n + spec.m).map(|i| i >= n).collect();
    Ok((GrdpgSpec::new(x, signature, nu)?, mask))
}

/// Basis change `Q` with `Q^T I_{p,q} Q` a permutation matrix: the first
/// `p - q` coordinates stay fixed and the remaining ones are swapped in pairs.
fn pairing_basis(sig: Signature) -> DMatrix<f64> {
    let (p, q) = (sig.p, sig.q);
    let d = p + q;
    let fixed = p - q;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DMatrix::zeros(d, d);
    for f in 0..fixed {
        m[(f, f)] = 1.0;
    }
    for t in 0..q {
        let (a, b) = (fixed + 2 * t, fixed + 2 * t + 1);
        m[(fixed + t, a)] = h;
        m[(fixed + t, b)] = h;
        m[(p + t, a)] = h;
        m[(p + t, b)] = -h;
    }
    m
}

fn haar_block(m: &mut DMatrix<f64>, start: usize, size: usize, rng: &mut Rng) {
    if size == 0 {
        return;
    }
    let g = DMatrix::from_fn(size, size, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    for c in 0..size {
        let s = if r[(c, c)] < 0.0 { -1.0 } else { 1.0 };
        for rr in 0..size {
            m[(start + rr, start + c)] = q[(rr, c)] * s;
        }
    }
}

fn margin(qt_i: &DMatrix<f64>, m: &DMatrix<f64>, rows: &[nalgebra::DVector<f64>]) -> f64 {
    let a = qt_i * m;
    rows.iter()
        .map(|x| (&a * x).min())
        .fold(f64::INFINITY, f64::min)
}

/// Searches for an orthogonal `R` such that noise drawn from the positive
/// orthant of the unit sphere and mapped through `z -> R z` has nonnegative
/// indefinite products with every row of `y` and with other noise points.
///
/// Requires `q <= p`. The search runs seeded random restarts of a Givens
/// hill climb over rotations that commute with `I_{p,q}`.
pub fn feasible_orthant_rotation(y: &DMatrix<f64>, signature: Signature, seed: u64) -> Result<DMatrix<f64>> {
    let (p, q) = (signature.p, signature.q);
    let d = p + q;
    if y.ncols() != d {
        return Err(Error::Dimension(format!("positions have {} columns, signature {signature}", y.ncols())));
    }
    if q > p {
        return Err(Error::validation(
            "diffuse noise",
            format!("no orthant-feasible rotation exists for signature {signature}"),
        ));
    }
    let mut distinct: Vec<Vec<f64>> = rows_of(y);
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    distinct.dedup();
    let rows: Vec<_> = distinct.into_iter().map(nalgebra::DVector::from_vec).collect();

    let basis = pairing_basis(signature);
    let qt_i = basis.transpose() * signature.matrix();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|a| ((a + 1)..d).map(move |b| (a, b)))
        .filter(|&(a, b)| (a < p) == (b < p))
        .collect();

    let root = SeedStream::new(seed);
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for restart in 0..24 {
        let mut rng = root.index(restart).rng();
        let mut m = DMatrix::zeros(d, d);
        haar_block(&mut m, 0, p, &mut rng);
        haar_block(&mut m, p, q, &mut rng);
        let mut score = margin(&qt_i, &m, &rows);
        let mut step: f64 = 0.5;
        while step > 1e-7 {
            let mut improved = false;
            for &(a, b) in &pairs {
                for sign in [1.0, -1.0] {
                    let (s, c) = (sign * step).sin_cos();
                    let mut cand = m.clone();
                    for col in 0..d {
                        let (ra, rb) = (m[(a, col)], m[(b, col)]);
                        cand[(a, col)] = c * ra - s * rb;
                        cand[(b, col)] = s * ra + c * rb;
                    }
                    let sc = margin(&qt_i, &cand, &rows);
                    if sc > score {
                        score = sc;
                        m = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if best.as_ref().map_or(true, |(b, _)| score > *b) {
            best = Some((score, m));
        }
    }
    let (score, m) = best.expect("at least one restart");
    log::debug!("orthant rotation margin {score:.4}");
    if score < 0.0 {
        return Err(Error::validation(
            "diffuse noise",
            format!("no feasible orthant rotation found (best margin {score:.3e})"),
        ));
    }
    Ok(m.transpose() * basis)
}
