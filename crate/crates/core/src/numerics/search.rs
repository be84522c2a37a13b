//! Coarse-grid enumeration plus derivative-free refinement for the DOA
//! objective, and the golden-section line search it builds on.

use crate::array::DoaVector;
use crate::error::{Error, Result};

const GOLDEN_RATIO: f64 = 0.618_033_988_749_894_8;
const MAX_REFINE_SWEEPS: usize = 32;

/// Search-domain description for the DOA minimizer, all angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    coarse_step: f64,
    refine_tolerance: f64,
    min_separation: f64,
}

impl GridSpec {
    pub fn new(
        lo: f64,
        hi: f64,
        coarse_step: f64,
        refine_tolerance: f64,
        min_separation: f64,
    ) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Config(format!("grid needs lo < hi ({lo} vs {hi})")));
        }
        if !(coarse_step > 0.0) || !(refine_tolerance > 0.0) || min_separation < 0.0 {
            return Err(Error::Config(
                "grid step, refine tolerance and separation must be positive".into(),
            ));
        }
        if refine_tolerance >= coarse_step {
            return Err(Error::Config(
                "refine tolerance must be finer than the coarse step".into(),
            ));
        }
        Ok(Self {
            lo,
            hi,
            coarse_step,
            refine_tolerance,
            min_separation,
        })
    }

    /// 1-degree coarse grid over (-90, 90) degrees, refined to 0.01 degrees,
    /// with a 1-degree minimum source separation.
    pub fn default_search() -> Self {
        Self::new(
            (-89f64).to_radians(),
            89f64.to_radians(),
            1f64.to_radians(),
            0.01f64.to_radians(),
            1f64.to_radians(),
        )
        .expect("constants are valid")
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn coarse_step(&self) -> f64 {
        self.coarse_step
    }

    pub fn refine_tolerance(&self) -> f64 {
        self.refine_tolerance
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn coarse_points(&self) -> Vec<f64> {
        let mut points = Vec::new();
        let mut k = 0usize;
        loop {
            let p = self.lo + k as f64 * self.coarse_step;
            if p > self.hi + 1e-12 {
                break;
            }
            points.push(p.min(self.hi));
            k += 1;
        }
        points
    }
}

/// Golden-section minimum of a unimodal scalar function on [lo, hi];
/// returns the bracket midpoint and its value once the bracket is below `tol`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN_RATIO * (b - a);
    let mut d = a + GOLDEN_RATIO * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN_RATIO * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN_RATIO * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Minimize a DOA objective over ascending M-tuples.
///
/// Exhaustive coarse enumeration over grid tuples with pairwise separation at
/// least `min_separation`, then coordinate-wise golden-section refinement down
/// to `refine_tolerance`. When `warm_start` is given, it is refined as an
/// additional candidate and the overall winner is returned, so the result is
/// never worse than the warm start.
pub fn minimize_doa_objective<F>(
    objective: F,
    num_sources: usize,
    grid: &GridSpec,
    warm_start: Option<&DoaVector>,
) -> Result<DoaVector>
where
    F: Fn(&[f64]) -> f64,
{
    if num_sources == 0 {
        return Err(Error::Config("need at least one source".into()));
    }
    let points = grid.coarse_points();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut tuple = vec![0.0; num_sources];
    enumerate_tuples(&points, grid.min_separation, &mut tuple, 0, 0, &mut |t| {
        let value = objective(t);
        if best.as_ref().map_or(true, |(_, v)| value < *v) {
            best = Some((t.to_vec(), value));
        }
    });
    let (coarse, _) = best.ok_or_else(|| {
        Error::Config("no admissible tuple on the coarse grid (separation too large?)".into())
    })?;

    let mut candidates = vec![coarse];
    if let Some(ws) = warm_start {
        if is_admissible(ws.angles(), grid, num_sources) {
            candidates.push(ws.angles().to_vec());
        }
    }

    let mut winner: Option<(Vec<f64>, f64)> = None;
    for start in candidates {
        let (angles, value) = refine(&objective, start, grid);
        if winner.as_ref().map_or(true, |(_, v)| value < *v) {
            winner = Some((angles, value));
        }
    }
    let (angles, _) = winner.expect("at least one candidate refined");
    DoaVector::new(angles)
}

fn is_admissible(angles: &[f64], grid: &GridSpec, num_sources: usize) -> bool {
    angles.len() == num_sources
        && angles.iter().all(|&a| a >= grid.lo && a <= grid.hi)
        && angles
            .windows(2)
            .all(|w| w[1] - w[0] >= grid.min_separation - 1e-12)
}

fn enumerate_tuples<F: FnMut(&[f64])>(
    points: &[f64],
    min_separation: f64,
    tuple: &mut Vec<f64>,
    depth: usize,
    start: usize,
    visit: &mut F,
) {
    let m = tuple.len();
    if depth == m {
        visit(tuple);
        return;
    }
    for idx in start..points.len() {
        let p = points[idx];
        if depth > 0 && p - tuple[depth - 1] < min_separation - 1e-12 {
            continue;
        }
        tuple[depth] = p;
        enumerate_tuples(points, min_separation, tuple, depth + 1, idx + 1, visit);
    }
}

fn refine<F: Fn(&[f64]) -> f64>(objective: &F, start: Vec<f64>, grid: &GridSpec) -> (Vec<f64>, f64) {
    let m = start.len();
    let mut angles = start;
    let mut current = objective(&angles);
    for _ in 0..MAX_REFINE_SWEEPS {
        let mut moved = 0.0f64;
        for k in 0..m {
            let mut lo = (angles[k] - grid.coarse_step).max(grid.lo);
            let mut hi = (angles[k] + grid.coarse_step).min(grid.hi);
            if k > 0 {
                lo = lo.max(angles[k - 1] + grid.min_separation);
            }
            if k + 1 < m {
                hi = hi.min(angles[k + 1] - grid.min_separation);
            }
            if hi - lo <= grid.refine_tolerance {
                continue;
            }
            let (x, fx) = golden_section_min(
                |v| {
                    let mut probe = angles.clone();
                    probe[k] = v;
                    objective(&probe)
                },
                lo,
                hi,
                grid.refine_tolerance,
            );
            if fx < current {
                moved = moved.max((x - angles[k]).abs());
                angles[k] = x;
                current = fx;
            }
        }
        if moved < grid.refine_tolerance {
            break;
        }
    }
    (angles, current)
}
