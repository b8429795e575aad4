//! Deterministic pair sampling used to estimate Lipschitz-type constants
//! of maps over a box.
//!
//! The stream starts with short segments ending at every vertex (one per
//! sign direction, for dimensions up to 6), then alternates uniform pairs
//! with short local pairs. Later pairs never change earlier ones, so a
//! longer run always samples a superset.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::interval::{inf_norm, BoxRegion, Vector};
use crate::optim::{levenberg_marquardt_box, nelder_mead, LmOptions};

const LOCAL_STEP: f64 = 1e-4;
const MAX_VERTEX_DIM: usize = 6;

/// Direction family for short local pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    /// `{-1, 1}^n`; these attain the induced ∞-norm of a Jacobian.
    Signs,
    /// Uniform in `[-1, 1]^n`.
    Uniform,
}

pub struct PairStream {
    region: BoxRegion,
    rng: ChaCha8Rng,
    probe: Probe,
    step: f64,
    vertex_pairs: Vec<(Vector, Vector)>,
    emitted: usize,
}

impl PairStream {
    pub fn new(region: &BoxRegion, seed: u64, probe: Probe) -> Result<Self> {
        if region.is_degenerate() {
            return Err(Error::DegenerateBox);
        }
        let step = LOCAL_STEP * region.widths().min();
        let n = region.dim();
        let mut vertex_pairs = Vec::new();
        if n <= MAX_VERTEX_DIM {
            let signs = BoxRegion::symmetric(n, 1.0).vertices();
            for v in region.vertices() {
                for s in &signs {
                    let fwd = &v + s * step;
                    let pair = if region.contains(&fwd) {
                        (v.clone(), fwd)
                    } else {
                        (&v - s * step, v.clone())
                    };
                    if region.contains(&pair.0) && region.contains(&pair.1) {
                        vertex_pairs.push(pair);
                    }
                }
            }
        }
        Ok(Self {
            region: region.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            probe,
            step,
            vertex_pairs,
            emitted: 0,
        })
    }

    fn local_pair(&mut self) -> (Vector, Vector) {
        let n = self.region.dim();
        let a = self.region.sample(&mut self.rng);
        let mut d = match self.probe {
            Probe::Signs => {
                Vector::from_fn(n, |_, _| if self.rng.random::<bool>() { 1.0 } else { -1.0 })
            }
            Probe::Uniform => Vector::from_fn(n, |_, _| self.rng.random_range(-1.0..=1.0)),
        };
        let norm = inf_norm(&d);
        if norm == 0.0 {
            d[0] = 1.0;
        } else {
            d /= norm;
        }
        let fwd = &a + &d * self.step;
        if self.region.contains(&fwd) {
            (a, fwd)
        } else {
            (self.region.clamp(&(&a - &d * self.step)), a)
        }
    }
}

impl Iterator for PairStream {
    type Item = (Vector, Vector);

    fn next(&mut self) -> Option<Self::Item> {
        let i = self.emitted;
        self.emitted += 1;
        if i < self.vertex_pairs.len() {
            return Some(self.vertex_pairs[i].clone());
        }
        if (i - self.vertex_pairs.len()).is_multiple_of(2) {
            let a = self.region.sample(&mut self.rng);
            let b = self.region.sample(&mut self.rng);
            Some((a, b))
        } else {
            Some(self.local_pair())
        }
    }
}

/// `‖g(a) − g(b)‖∞ / ‖a − b‖∞`, or `None` for coincident points.
pub fn ratio<G>(g: &G, a: &Vector, b: &Vector) -> Option<f64>
where
    G: Fn(&Vector) -> Vector + ?Sized,
{
    let dx = inf_norm(&(a - b));
    if dx == 0.0 {
        return None;
    }
    Some(inf_norm(&(g(a) - g(b))) / dx)
}

/// Largest sampled ratio over `samples` pairs in `region`.
pub fn sampled_sup<G>(g: &G, region: &BoxRegion, samples: usize, seed: u64) -> Result<f64>
where
    G: Fn(&Vector) -> Vector + ?Sized,
{
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let stream = PairStream::new(region, seed, Probe::Signs)?;
    Ok(stream
        .take(samples)
        .filter_map(|(a, b)| ratio(g, &a, &b))
        .fold(0.0, f64::max))
}

/// Smallest sampled ratio, optionally polished by derivative-free local
/// search started from the `refine` worst pairs. With `maximize`, the same
/// refinement pushes the largest ratio up instead.
pub fn refined_extremum<G>(
    g: &G,
    region: &BoxRegion,
    samples: usize,
    seed: u64,
    refine: usize,
    maximize: bool,
) -> Result<f64>
where
    G: Fn(&Vector) -> Vector + ?Sized,
{
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let probe = if maximize {
        Probe::Signs
    } else {
        Probe::Uniform
    };
    let stream = PairStream::new(region, seed, probe)?;
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut scored: Vec<(f64, Vector, Vector)> = stream
        .take(samples)
        .filter_map(|(a, b)| ratio(g, &a, &b).map(|r| (sign * r, a, b)))
        .collect();
    if scored.is_empty() {
        return Err(Error::InvalidArgument("all sampled pairs coincide".into()));
    }
    scored.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = scored[0].0;

    let base = pair_objective(g, region);
    let objective = |v: &Vector| -> f64 {
        let r = base(v);
        if r.is_finite() {
            sign * r
        } else {
            f64::INFINITY
        }
    };
    for (_, a, b) in scored.iter().take(refine) {
        best = best.min(polish(&objective, region, a, b));
    }
    Ok(sign * best)
}

fn pair_objective<'a, G>(g: &'a G, region: &'a BoxRegion) -> impl Fn(&Vector) -> f64 + 'a
where
    G: Fn(&Vector) -> Vector + ?Sized,
{
    let n = region.dim();
    let min_sep = 1e-7 * region.widths().min();
    move |v: &Vector| -> f64 {
        let a = region.clamp(&v.rows(0, n).into_owned());
        let b = region.clamp(&v.rows(n, n).into_owned());
        if inf_norm(&(&a - &b)) < min_sep {
            return f64::INFINITY;
        }
        ratio(g, &a, &b).unwrap_or(f64::INFINITY)
    }
}

fn polish<F: Fn(&Vector) -> f64>(objective: &F, region: &BoxRegion, a: &Vector, b: &Vector) -> f64 {
    let start = Vector::from_iterator(2 * a.len(), a.iter().chain(b.iter()).copied());
    let scale = 0.05 * region.widths().max();
    nelder_mead(objective, &start, scale, 400, 1e-16).1
}

/// Smallest ratio over near-collisions of `g`: from every anchor `a` of an
/// `anchors`-per-axis lattice, solves `g(b) = g(a)` by least squares from a
/// `starts`-per-axis lattice, then polishes the `refine` worst pairs.
/// Finds distant pairs with nearly equal images that uniform sampling misses.
pub fn collision_infimum<G>(
    g: &G,
    region: &BoxRegion,
    anchors: usize,
    starts: usize,
    refine: usize,
) -> Result<f64>
where
    G: Fn(&Vector) -> Vector + ?Sized,
{
    if region.is_degenerate() {
        return Err(Error::DegenerateBox);
    }
    let min_sep = 1e-6 * region.widths().min();
    let opts = LmOptions {
        max_iters: 50,
        ..LmOptions::default()
    };
    let start_points = region.lattice(starts);
    let mut found: Vec<(f64, Vector, Vector)> = Vec::new();
    for a in region.lattice(anchors) {
        let ga = g(&a);
        for s in &start_points {
            let out = levenberg_marquardt_box(&|b: &Vector| g(b) - &ga, s, region, &opts);
            if inf_norm(&(&out.x - &a)) > min_sep {
                if let Some(r) = ratio(g, &a, &out.x) {
                    found.push((r, a.clone(), out.x));
                }
            }
        }
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    let Some(first) = found.first() else {
        return Ok(f64::INFINITY);
    };
    let objective = pair_objective(g, region);
    let mut best = first.0;
    for (_, a, b) in found.iter().take(refine) {
        best = best.min(polish(&objective, region, a, b));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn stream_is_prefix_stable() {
        let b = BoxRegion::symmetric(2, 1.0);
        let short: Vec<_> = PairStream::new(&b, 7, Probe::Uniform)
            .unwrap()
            .take(50)
            .collect();
        let long: Vec<_> = PairStream::new(&b, 7, Probe::Uniform)
            .unwrap()
            .take(80)
            .collect();
        assert_eq!(&long[..50], &short[..]);
        assert!(long.iter().all(|(a, b2)| b.contains(a) && b.contains(b2)));
    }

    #[test]
    fn linear_sup_hits_operator_norm() {
        let m = dmatrix![1.0, -2.0; 0.5, 0.25];
        let g = |x: &Vector| &m * x;
        let est = sampled_sup(&g, &BoxRegion::symmetric(2, 1.0), 100, 1).unwrap();
        assert!((est - 3.0).abs() < 1e-9);
    }

    #[test]
    fn refined_min_of_linear_map() {
        // min ‖M d‖∞/‖d‖∞ = 1/‖M⁻¹‖∞ for invertible M
        let m = dmatrix![2.0, 1.0; 1.0, 1.0];
        let g = |x: &Vector| &m * x;
        let inv = m.clone().try_inverse().unwrap();
        let truth = 1.0 / crate::interval::op_inf_norm(&inv);
        let est = refined_extremum(&g, &BoxRegion::symmetric(2, 1.0), 500, 3, 4, false).unwrap();
        assert!(
            est >= truth - 1e-9 && est <= truth * 1.01,
            "{est} vs {truth}"
        );
    }

    #[test]
    fn collision_search_finds_fold() {
        // g(x) = x² folds at 0: g(a) = g(-a)
        let g = |x: &Vector| x.map(|v| v * v);
        let r = collision_infimum(&g, &BoxRegion::symmetric(1, 1.0), 5, 3, 2).unwrap();
        assert!(r < 1e-10, "{r}");
        let lin = |x: &Vector| x * 2.0;
        let r = collision_infimum(&lin, &BoxRegion::symmetric(1, 1.0), 5, 3, 2).unwrap();
        assert!(r.is_infinite() || (r - 2.0).abs() < 1e-9, "{r}");
    }

    #[test]
    fn degenerate_box_rejected() {
        let b = BoxRegion::new(dvector![0.0, 0.0], dvector![0.0, 1.0]).unwrap();
        assert!(matches!(
            PairStream::new(&b, 0, Probe::Signs),
            Err(Error::DegenerateBox)
        ));
    }
}
