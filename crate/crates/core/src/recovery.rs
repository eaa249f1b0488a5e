//! Black-box reconstruction of shallow ReLU networks from function
//! evaluations, up to permutation and rescaling.
//!
//! The pipeline probes random lines for kinks, bisects each kink to a point,
//! clusters the points into hyperplanes, measures the Jacobian jump across
//! each plane (the rank-one outer product of the unit), and resolves the
//! active side of every unit globally: flipping a unit changes the model by
//! an affine function, so the correct sign assignment is the one whose
//! affine residue has no linear part. All targets are piecewise linear, so
//! finite differences are exact up to rounding.

use crate::diagnostics::gray_toggle_sequence;
use crate::equivalence::canonical_form;
use crate::error::{CoreError, Result};
use crate::linalg::{dot_f64, Mat};
use crate::network::{Architecture, Params};
use crate::scalar::{Rat, Scalar};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::One;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};

/// Probe box half-width: targets are reconstructed on [-r, r]^d.
pub const DEFAULT_BOX_RADIUS: f64 = 3.0;
/// Second-difference trigger, relative to the local function scale.
pub const DEFAULT_KINK_TOL: f64 = 1e-6;
/// Forward-difference step for side Jacobians, relative to the box radius.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

const COARSE_SAMPLES: usize = 33;
const LINE_BATCH: usize = 8;
/// Queries reserved per kink refinement: two per halving step, so the
/// reserve covers the worst case and probing never exceeds its budget.
const MAX_REFINE_STEPS: usize = 40;
const REFINE_RESERVE: u64 = 2 * MAX_REFINE_STEPS as u64;

/// Query-counted access to the target function.
pub trait Oracle: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn query(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn queries_used(&self) -> u64;
}

/// Wraps an evaluation closure with an atomic query counter and an optional
/// hard limit; concurrent callers are fine.
pub struct CountingOracle<F> {
    eval: F,
    input_dim: usize,
    output_dim: usize,
    used: AtomicU64,
    limit: Option<u64>,
}

impl<F: Fn(&[f64]) -> Result<Vec<f64>> + Sync> CountingOracle<F> {
    pub fn new(input_dim: usize, output_dim: usize, eval: F) -> Self {
        CountingOracle { eval, input_dim, output_dim, used: AtomicU64::new(0), limit: None }
    }

    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = Some(limit);
        self
    }
}

impl<F: Fn(&[f64]) -> Result<Vec<f64>> + Sync> Oracle for CountingOracle<F> {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn query(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.used.fetch_add(1, Ordering::SeqCst);
        if let Some(limit) = self.limit {
            if n >= limit {
                return Err(CoreError::OracleBudget { used: n });
            }
        }
        (self.eval)(x)
    }

    fn queries_used(&self) -> u64 {
        self.used.load(Ordering::SeqCst)
    }
}

/// Simulated oracle over a known float network.
pub fn params_oracle(p: &Params<f64>) -> CountingOracle<impl Fn(&[f64]) -> Result<Vec<f64>> + Sync + '_> {
    CountingOracle::new(p.arch().input_dim(), p.arch().output_dim(), move |x| {
        Ok(p.realization(x))
    })
}

/// A fitted kink locus: unit normal, offset (the plane is n.x + b = 0, the
/// normal's largest coordinate made positive), and the kink points backing it.
#[derive(Clone, Debug)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub support: Vec<Vec<f64>>,
}

impl Hyperplane {
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot_f64(&self.normal, x) + self.offset
    }
}

#[derive(Clone, Debug)]
pub struct Detection {
    pub hyperplanes: Vec<Hyperplane>,
    pub kink_points: usize,
    pub unclustered_points: usize,
    pub lines_probed: usize,
    pub budget_exhausted: bool,
}

/// One reconstructed hidden unit. `outer` is the raw Jacobian jump across
/// the plane; `outgoing` its rank-one factor paired with the unit normal.
/// `flipped` marks units active on the negative side of the stored plane.
#[derive(Clone, Debug)]
pub struct UnitEstimate {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub outgoing: Vec<f64>,
    pub outer: Vec<Vec<f64>>,
    pub rank1_residual: f64,
    pub anchor_clearance: f64,
    pub flipped: bool,
}

#[derive(Clone, Debug)]
pub struct OuterRecovery {
    pub units: Vec<UnitEstimate>,
    /// Linear part of the affine residue before orientation; near zero once
    /// the right units are flipped.
    pub linear: Vec<Vec<f64>>,
    pub constant: Vec<f64>,
    pub violations: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct FitStats {
    pub points: usize,
    pub max_abs_err: f64,
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct RecoveredModel {
    pub detection: Detection,
    pub units: Vec<UnitEstimate>,
    pub linear: Vec<Vec<f64>>,
    pub constant: Vec<f64>,
    /// None when no units survive: the target is (reported as) affine.
    pub params: Option<Params<f64>>,
    pub verification: Option<FitStats>,
    pub violations: Vec<String>,
    pub probe_queries: u64,
    pub total_queries: u64,
}

impl RecoveredModel {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match &self.params {
            Some(p) => p.realization(x),
            None => affine_eval(&self.linear, &self.constant, x),
        }
    }
}

fn affine_eval(linear: &[Vec<f64>], constant: &[f64], x: &[f64]) -> Vec<f64> {
    linear
        .iter()
        .zip(constant)
        .map(|(row, c)| dot_f64(row, x) + c)
        .collect()
}

fn frob(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn add_outer(m: &mut [Vec<f64>], s: f64, u: &[f64], n: &[f64]) {
    for (row, ui) in m.iter_mut().zip(u) {
        for (entry, nj) in row.iter_mut().zip(n) {
            *entry += s * ui * nj;
        }
    }
}

fn point_at(origin: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    origin.iter().zip(dir).map(|(o, u)| o + t * u).collect()
}

fn max_abs_d2(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((x, y), z)| (x - 2.0 * y + z).abs())
        .fold(0.0, f64::max)
}

/// Right singular vector for the smallest singular value; rows are padded
/// so the null direction of a wide matrix is present in the thin SVD.
fn smallest_right_singular(m: DMatrix<f64>) -> Option<Vec<f64>> {
    let ncols = m.ncols();
    let m = if m.nrows() < ncols {
        let mut padded = DMatrix::zeros(ncols, ncols);
        padded.view_mut((0, 0), (m.nrows(), ncols)).copy_from(&m);
        padded
    } else {
        m
    };
    let svd = m.svd(false, true);
    let vt = svd.v_t?;
    let mut idx = 0;
    let mut min = f64::INFINITY;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < min {
            min = *s;
            idx = i;
        }
    }
    Some((0..ncols).map(|j| vt[(idx, j)]).collect())
}

fn normalize_sign(normal: &mut [f64], offset: &mut f64) {
    let lead = normal
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if normal[lead] < 0.0 {
        for v in normal.iter_mut() {
            *v = -*v;
        }
        *offset = -*offset;
    }
}

/// Exact plane through d points: normal spans the nullspace of the
/// difference vectors.
fn fit_plane_through(pts: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let d = pts[0].len();
    let rows = pts.len() - 1;
    let mut data = Vec::with_capacity(rows * d);
    for p in &pts[1..] {
        for j in 0..d {
            data.push(p[j] - pts[0][j]);
        }
    }
    let mut normal = smallest_right_singular(DMatrix::from_row_slice(rows, d, &data))?;
    let norm = dot_f64(&normal, &normal).sqrt();
    if norm < 1e-9 {
        return None;
    }
    for v in normal.iter_mut() {
        *v /= norm;
    }
    let mut offset = -dot_f64(&normal, pts[0]);
    normalize_sign(&mut normal, &mut offset);
    Some((normal, offset))
}

/// Total-least-squares plane: normal is the smallest principal direction of
/// the centered point cloud.
fn tls_fit(pts: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let d = pts[0].len();
    let n = pts.len();
    let mut centroid = vec![0.0; d];
    for p in pts {
        for j in 0..d {
            centroid[j] += p[j];
        }
    }
    for c in centroid.iter_mut() {
        *c /= n as f64;
    }
    let mut data = Vec::with_capacity(n * d);
    for p in pts {
        for j in 0..d {
            data.push(p[j] - centroid[j]);
        }
    }
    let mut normal = smallest_right_singular(DMatrix::from_row_slice(n, d, &data))?;
    let norm = dot_f64(&normal, &normal).sqrt();
    if norm < 1e-9 {
        return None;
    }
    for v in normal.iter_mut() {
        *v /= norm;
    }
    let mut offset = -dot_f64(&normal, &centroid);
    normalize_sign(&mut normal, &mut offset);
    Some((normal, offset))
}

/// Group kink points into hyperplanes. Points carry the id of the line that
/// produced them; a line meets each plane once, so seed sets are drawn from
/// distinct lines. Returns the planes and the number of leftover points.
fn cluster_points(
    pts: &[(Vec<f64>, usize)],
    d: usize,
    box_radius: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<Hyperplane>, usize) {
    let thresh = 1e-7 * box_radius;
    if d == 1 {
        let mut vals: Vec<f64> = pts.iter().map(|(p, _)| p[0]).collect();
        vals.sort_by(f64::total_cmp);
        let mut planes = Vec::new();
        let mut dropped = 0;
        let mut i = 0;
        while i < vals.len() {
            let mut j = i + 1;
            while j < vals.len() && vals[j] - vals[j - 1] <= 1e-6 * box_radius {
                j += 1;
            }
            let group = &vals[i..j];
            if group.len() >= 2 {
                let mean = group.iter().sum::<f64>() / group.len() as f64;
                planes.push(Hyperplane {
                    normal: vec![1.0],
                    offset: -mean,
                    support: group.iter().map(|&v| vec![v]).collect(),
                });
            } else {
                dropped += group.len();
            }
            i = j;
        }
        return (planes, dropped);
    }

    let mut pool: Vec<usize> = (0..pts.len()).collect();
    let mut planes = Vec::new();
    while pool.len() >= d + 1 && planes.len() < 64 {
        let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
        for _ in 0..2500 {
            // d pool points from pairwise-distinct lines.
            let mut seed: Vec<usize> = Vec::with_capacity(d);
            for _ in 0..20 {
                let cand = pool[rng.random_range(0..pool.len())];
                let line = pts[cand].1;
                if seed.iter().all(|&s| s != cand && pts[s].1 != line) {
                    seed.push(cand);
                    if seed.len() == d {
                        break;
                    }
                }
            }
            if seed.len() < d {
                continue;
            }
            let sample: Vec<&[f64]> = seed.iter().map(|&i| pts[i].0.as_slice()).collect();
            let Some((normal, offset)) = fit_plane_through(&sample) else {
                continue;
            };
            let inliers: Vec<usize> = pool
                .iter()
                .copied()
                .filter(|&i| (dot_f64(&normal, &pts[i].0) + offset).abs() <= thresh)
                .collect();
            if best.as_ref().map(|(b, _, _)| inliers.len() > b.len()).unwrap_or(true) {
                best = Some((inliers, normal, offset));
            }
        }
        let Some((inliers, normal, offset)) = best else {
            break;
        };
        if inliers.len() < d + 1 {
            break;
        }
        let member_pts: Vec<&[f64]> = inliers.iter().map(|&i| pts[i].0.as_slice()).collect();
        let (normal, offset) = tls_fit(&member_pts).unwrap_or((normal, offset));
        let members: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&i| (dot_f64(&normal, &pts[i].0) + offset).abs() <= thresh)
            .collect();
        let members = if members.len() >= inliers.len() { members } else { inliers };
        planes.push(Hyperplane {
            normal,
            offset,
            support: members.iter().map(|&i| pts[i].0.clone()).collect(),
        });
        pool.retain(|i| !members.contains(i));
    }
    (planes, pool.len())
}

struct Bracket {
    l: f64,
    m: f64,
    r: f64,
    gl: Vec<f64>,
    gm: Vec<f64>,
    gr: Vec<f64>,
}

fn random_line(rng: &mut ChaCha8Rng, d: usize, box_radius: f64) -> (Vec<f64>, Vec<f64>) {
    let origin: Vec<f64> = (0..d)
        .map(|_| rng.random_range(-0.5 * box_radius..0.5 * box_radius))
        .collect();
    loop {
        let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot_f64(&dir, &dir).sqrt();
        if norm > 1e-6 {
            return (origin, dir.iter().map(|v| v / norm).collect());
        }
    }
}

fn coarse_scan(
    oracle: &dyn Oracle,
    origin: &[f64],
    dir: &[f64],
    t_max: f64,
    tol: f64,
) -> Result<Vec<Bracket>> {
    let n = COARSE_SAMPLES;
    let ts: Vec<f64> = (0..n)
        .map(|i| -t_max + 2.0 * t_max * i as f64 / (n - 1) as f64)
        .collect();
    let mut gs = Vec::with_capacity(n);
    for &t in &ts {
        gs.push(oracle.query(&point_at(origin, dir, t))?);
    }
    let scale = gs
        .iter()
        .flatten()
        .fold(1.0f64, |a, &v| a.max(v.abs()));
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if max_abs_d2(&gs[i - 1], &gs[i], &gs[i + 1]) > tol * scale {
            out.push(Bracket {
                l: ts[i - 1],
                m: ts[i],
                r: ts[i + 1],
                gl: gs[i - 1].clone(),
                gm: gs[i].clone(),
                gr: gs[i + 1].clone(),
            });
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(out)
}

/// Shrink a bracketed slope change to `width_target` by testing the three
/// half-windows for nonlinearity; two queries per halving.
fn refine_kink(
    oracle: &dyn Oracle,
    origin: &[f64],
    dir: &[f64],
    br: Bracket,
    width_target: f64,
) -> Result<f64> {
    let Bracket { mut l, mut m, mut r, mut gl, mut gm, mut gr } = br;
    let scale = gl
        .iter()
        .chain(&gm)
        .chain(&gr)
        .fold(1.0f64, |a, &v| a.max(v.abs()));
    let floor = 1e-11 * scale;
    for _ in 0..MAX_REFINE_STEPS {
        if r - l <= width_target {
            break;
        }
        let q1 = 0.5 * (l + m);
        let q3 = 0.5 * (m + r);
        let g1 = oracle.query(&point_at(origin, dir, q1))?;
        let g3 = oracle.query(&point_at(origin, dir, q3))?;
        let dl = max_abs_d2(&gl, &g1, &gm);
        let dm = max_abs_d2(&g1, &gm, &g3);
        let dr = max_abs_d2(&gm, &g3, &gr);
        if dl.max(dm).max(dr) <= floor {
            break;
        }
        if dl >= dm && dl >= dr {
            r = m;
            gr = gm;
            m = q1;
            gm = g1;
        } else if dr >= dm {
            l = m;
            gl = gm;
            m = q3;
            gm = g3;
        } else {
            l = q1;
            gl = g1;
            r = q3;
            gr = g3;
        }
    }
    Ok(0.5 * (l + r))
}

fn probe_lines(
    oracle: &dyn Oracle,
    box_radius: f64,
    tol: f64,
    seed: u64,
    max_lines: usize,
    probe_budget: Option<u64>,
) -> Result<Detection> {
    let d = oracle.input_dim();
    let t_max = box_radius * (d as f64).sqrt();
    let width_target = 1e-10 * box_radius;
    let start = oracle.queries_used();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut pts: Vec<(Vec<f64>, usize)> = Vec::new();
    let mut lines_probed = 0usize;
    let mut exhausted = false;
    let mut prev_count: Option<usize> = None;

    'batches: while lines_probed < max_lines {
        let mut batch = LINE_BATCH.min(max_lines - lines_probed);
        if let Some(b) = probe_budget {
            let used = oracle.queries_used() - start;
            let afford = (b.saturating_sub(used) / COARSE_SAMPLES as u64) as usize;
            batch = batch.min(afford);
            if batch == 0 {
                exhausted = true;
                break;
            }
        }
        let lines: Vec<(Vec<f64>, Vec<f64>)> =
            (0..batch).map(|_| random_line(&mut rng, d, box_radius)).collect();
        let scans: Vec<Result<Vec<Bracket>>> = lines
            .par_iter()
            .map(|(o, u)| coarse_scan(oracle, o, u, t_max, tol))
            .collect();
        for (i, scan) in scans.into_iter().enumerate() {
            let brackets = match scan {
                Ok(b) => b,
                Err(CoreError::OracleBudget { .. }) => {
                    exhausted = true;
                    continue;
                }
                Err(e) => return Err(e),
            };
            for br in brackets {
                if let Some(b) = probe_budget {
                    if oracle.queries_used() - start + REFINE_RESERVE > b {
                        exhausted = true;
                        break;
                    }
                }
                match refine_kink(oracle, &lines[i].0, &lines[i].1, br, width_target) {
                    Ok(t) => pts.push((point_at(&lines[i].0, &lines[i].1, t), lines_probed + i)),
                    Err(CoreError::OracleBudget { .. }) => {
                        exhausted = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        lines_probed += batch;
        if exhausted {
            break 'batches;
        }
        let (planes, _) = cluster_points(&pts, d, box_radius, &mut rng);
        let count = planes.len();
        let settled = if count == 0 {
            lines_probed >= 3 * LINE_BATCH
        } else {
            planes.iter().all(|h| h.support.len() >= 3 * (d + 1))
        };
        if prev_count == Some(count) && settled {
            break;
        }
        prev_count = Some(count);
    }

    let kink_points = pts.len();
    let (hyperplanes, unclustered_points) = cluster_points(&pts, d, box_radius, &mut rng);
    Ok(Detection { hyperplanes, kink_points, unclustered_points, lines_probed, budget_exhausted: exhausted })
}

/// Probe `line_count` random lines for kinks and cluster them into
/// hyperplanes, each reported with unit normal and sign-fixed offset.
pub fn detect_hyperplanes(
    oracle: &dyn Oracle,
    box_radius: f64,
    line_count: usize,
    tol: f64,
    seed: u64,
) -> Result<Detection> {
    probe_lines(oracle, box_radius, tol, seed, line_count, None)
}

fn side_jacobian(
    oracle: &dyn Oracle,
    x0: &[f64],
    normal: &[f64],
    side: f64,
    delta: f64,
    fd: f64,
) -> Result<Vec<Vec<f64>>> {
    let d = oracle.input_dim();
    let k = oracle.output_dim();
    let base: Vec<f64> = x0.iter().zip(normal).map(|(a, n)| a + side * delta * n).collect();
    let f0 = oracle.query(&base)?;
    let mut jac = vec![vec![0.0; d]; k];
    for j in 0..d {
        let mut xp = base.clone();
        xp[j] += fd;
        let fj = oracle.query(&xp)?;
        for i in 0..k {
            jac[i][j] = (fj[i] - f0[i]) / fd;
        }
    }
    Ok(jac)
}

/// A point on plane `idx` as clear of the other planes as we can find.
fn anchor_on_plane(
    planes: &[Hyperplane],
    idx: usize,
    box_radius: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64) {
    let clearance = |x: &[f64]| -> f64 {
        planes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, p)| p.signed_distance(x).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let plane = &planes[idx];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let consider = |x: Vec<f64>, best: &mut Option<(Vec<f64>, f64)>| {
        let c = clearance(&x);
        if best.as_ref().map(|(_, bc)| c > *bc).unwrap_or(true) {
            *best = Some((x, c));
        }
    };
    for p in &plane.support {
        consider(p.clone(), &mut best);
    }
    for _ in 0..200 {
        let x: Vec<f64> = (0..plane.normal.len())
            .map(|_| rng.random_range(-box_radius..box_radius))
            .collect();
        let z = plane.signed_distance(&x);
        let proj: Vec<f64> = x.iter().zip(&plane.normal).map(|(xi, ni)| xi - z * ni).collect();
        consider(proj, &mut best);
    }
    best.expect("plane has support points")
}

/// Jacobian jumps across every detected plane, the affine residue, and the
/// globally consistent orientation of each unit.
pub fn recover_outer(
    oracle: &dyn Oracle,
    hyperplanes: &[Hyperplane],
    box_radius: f64,
    step: f64,
    seed: u64,
) -> Result<OuterRecovery> {
    let d = oracle.input_dim();
    let k = oracle.output_dim();
    let delta = step * box_radius;
    let fd = delta / 4.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51f1_5eed_0ddb_a11a);
    let mut violations = Vec::new();
    let mut units: Vec<UnitEstimate> = Vec::new();

    for (idx, hp) in hyperplanes.iter().enumerate() {
        let (x0, clear) = anchor_on_plane(hyperplanes, idx, box_radius, &mut rng);
        if clear <= 6.0 * delta {
            violations.push(format!(
                "unit {idx}: no isolated neighborhood around the plane (clearance {clear:.3e})"
            ));
            continue;
        }
        let jp = side_jacobian(oracle, &x0, &hp.normal, 1.0, delta, fd)?;
        let jm = side_jacobian(oracle, &x0, &hp.normal, -1.0, delta, fd)?;
        let mut outer = vec![vec![0.0; d]; k];
        for i in 0..k {
            for j in 0..d {
                outer[i][j] = jp[i][j] - jm[i][j];
            }
        }
        let dnorm = frob(&outer);
        if dnorm < 1e-9 {
            violations.push(format!("unit {idx}: no Jacobian jump across the fitted plane"));
            continue;
        }
        let outgoing: Vec<f64> = outer.iter().map(|row| dot_f64(row, &hp.normal)).collect();
        let mut resid = outer.clone();
        add_outer(&mut resid, -1.0, &outgoing, &hp.normal);
        let rank1_residual = frob(&resid) / dnorm;
        if rank1_residual > 1e-3 {
            violations.push(format!(
                "unit {idx}: Jacobian jump is not rank one (relative residual {rank1_residual:.3e})"
            ));
            continue;
        }
        units.push(UnitEstimate {
            normal: hp.normal.clone(),
            offset: hp.offset,
            outgoing,
            outer,
            rank1_residual,
            anchor_clearance: clear,
            flipped: false,
        });
    }

    // Affine residue of the all-positive orientation, fitted by least squares.
    let n_pts = (3 * (d + 1)).max(16);
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(n_pts);
    let mut tries = 0;
    while xs.len() < n_pts && tries < 200 * n_pts {
        tries += 1;
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-box_radius..box_radius)).collect();
        let clear = hyperplanes
            .iter()
            .map(|p| p.signed_distance(&x).abs())
            .fold(f64::INFINITY, f64::min);
        if clear > 1e-3 * box_radius {
            xs.push(x);
        }
    }
    if xs.len() < d + 1 {
        return Err(CoreError::Sampling(
            "could not sample points away from the detected planes".into(),
        ));
    }
    let mut design = Vec::with_capacity(xs.len() * (d + 1));
    let mut rhs = Vec::with_capacity(xs.len() * k);
    let mut scale = 1.0f64;
    for x in &xs {
        let y = oracle.query(x)?;
        scale = y.iter().fold(scale, |a, &v| a.max(v.abs()));
        let model: Vec<f64> = (0..k)
            .map(|i| {
                units
                    .iter()
                    .map(|u| u.outgoing[i] * (dot_f64(&u.normal, x) + u.offset).max(0.0))
                    .sum::<f64>()
            })
            .collect();
        design.extend(x.iter().copied());
        design.push(1.0);
        rhs.extend(y.iter().zip(&model).map(|(a, b)| a - b));
    }
    let design = DMatrix::from_row_slice(xs.len(), d + 1, &design);
    let rhs = DMatrix::from_row_slice(xs.len(), k, &rhs);
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| CoreError::Construction(format!("affine residue fit failed: {e}")))?;
    let fitted = &design * &coef;
    let fit_err = (&fitted - &rhs).amax();
    if fit_err > 1e-5 * scale {
        violations.push(format!(
            "affine residue is not affine (max fit error {fit_err:.3e}); hypotheses violated?"
        ));
    }
    let linear: Vec<Vec<f64>> = (0..k).map(|i| (0..d).map(|j| coef[(j, i)]).collect()).collect();
    let g0: Vec<f64> = (0..k).map(|i| coef[(d, i)]).collect();

    // Orientation: flipping a unit adds its outer product to the linear
    // residue; the true sign pattern cancels it. Walk all patterns in Gray
    // order, tracking the best and the runner-up.
    let mut flip_mask = 0u64;
    if !units.is_empty() && units.len() <= 24 {
        let mut cur = linear.clone();
        let mut mask = 0u64;
        let mut best = frob(&cur);
        let mut best_mask = 0u64;
        let mut second = f64::INFINITY;
        for (bit, now_in) in gray_toggle_sequence(units.len()) {
            let sign = if now_in { 1.0 } else { -1.0 };
            add_outer(&mut cur, sign, &units[bit].outgoing, &units[bit].normal);
            mask ^= 1 << bit;
            let cost = frob(&cur);
            if cost < best {
                second = best;
                best = cost;
                best_mask = mask;
            } else if mask != best_mask && cost < second {
                second = cost;
            }
        }
        let unit_scale = units
            .iter()
            .map(|u| u.outgoing.iter().map(|v| v.abs()).fold(0.0, f64::max))
            .fold(frob(&linear), f64::max)
            .max(1.0);
        let thr = 1e-4 * unit_scale;
        if best > thr {
            violations.push(format!(
                "orientation unresolved: no sign pattern cancels the linear residue (best {best:.3e})"
            ));
        } else if second < thr {
            violations.push(
                "orientation ambiguous: several sign patterns cancel the linear residue \
                 (irreducibility hypothesis violated)"
                    .into(),
            );
        }
        flip_mask = best_mask;
    } else if units.len() > 24 {
        violations.push(format!(
            "orientation search skipped: {} units exceed the subset cap",
            units.len()
        ));
    }
    let mut constant = g0;
    for (bit, unit) in units.iter_mut().enumerate() {
        if flip_mask >> bit & 1 == 1 {
            unit.flipped = true;
            for (c, ui) in constant.iter_mut().zip(&unit.outgoing) {
                *c += ui * unit.offset;
            }
        }
    }

    Ok(OuterRecovery { units, linear, constant, violations })
}

fn assemble_params(units: &[UnitEstimate], constant: &[f64], d: usize, k: usize) -> Result<Params<f64>> {
    let h = units.len();
    let arch = Architecture::new(vec![d, h, k])?;
    let mut w1 = Vec::with_capacity(h);
    let mut b1 = Vec::with_capacity(h);
    for u in units {
        let s = if u.flipped { -1.0 } else { 1.0 };
        w1.push(u.normal.iter().map(|v| s * v).collect::<Vec<f64>>());
        b1.push(s * u.offset);
    }
    let w2: Vec<Vec<f64>> = (0..k).map(|i| units.iter().map(|u| u.outgoing[i]).collect()).collect();
    Params::new(
        arch,
        vec![Mat::from_rows(w1), Mat::from_rows(w2)],
        vec![b1, constant.to_vec()],
    )
}

/// Full reconstruction: detect the kink hyperplanes, measure outer products,
/// orient, assemble a network, and verify it against the oracle on fresh
/// points. `budget` caps the line-probing queries (0 = uncapped); Jacobian,
/// residue, and verification queries are accounted but not capped.
pub fn recover_shallow(
    oracle: &dyn Oracle,
    d: usize,
    k: usize,
    budget: u64,
    seed: u64,
) -> Result<RecoveredModel> {
    if oracle.input_dim() != d || oracle.output_dim() != k {
        return Err(CoreError::ShapeMismatch(format!(
            "oracle is {}->{}, expected {d}->{k}",
            oracle.input_dim(),
            oracle.output_dim()
        )));
    }
    let box_radius = DEFAULT_BOX_RADIUS;
    let start = oracle.queries_used();
    let probe_budget = if budget == 0 { None } else { Some(budget) };
    let detection = probe_lines(oracle, box_radius, DEFAULT_KINK_TOL, seed, 96, probe_budget)?;
    let probe_queries = oracle.queries_used() - start;

    let outer = match recover_outer(oracle, &detection.hyperplanes, box_radius, DEFAULT_FD_STEP, seed ^ 1) {
        Ok(o) => o,
        Err(CoreError::OracleBudget { .. }) => OuterRecovery {
            units: Vec::new(),
            linear: vec![vec![0.0; d]; k],
            constant: vec![0.0; k],
            violations: vec!["oracle budget exhausted during Jacobian recovery".into()],
        },
        Err(e) => return Err(e),
    };
    let OuterRecovery { units, linear, constant, mut violations } = outer;

    let params = if units.is_empty() {
        None
    } else {
        Some(assemble_params(&units, &constant, d, k)?)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e57_0000_c0de_f00d);
    let mut verification = None;
    let mut max_err = 0.0f64;
    let mut scale = 1.0f64;
    let mut done = 0usize;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-box_radius..box_radius)).collect();
        let truth = match oracle.query(&x) {
            Ok(t) => t,
            Err(CoreError::OracleBudget { .. }) => {
                violations.push("oracle budget exhausted during verification".into());
                break;
            }
            Err(e) => return Err(e),
        };
        let est = match &params {
            Some(p) => p.realization(&x),
            None => affine_eval(&linear, &constant, &x),
        };
        for (t, e) in truth.iter().zip(&est) {
            scale = scale.max(t.abs());
            max_err = max_err.max((t - e).abs());
        }
        done += 1;
    }
    if done > 0 {
        verification = Some(FitStats { points: done, max_abs_err: max_err, scale });
        if max_err > 1e-6 * scale {
            violations.push(format!(
                "verification failed: max error {max_err:.3e} exceeds 1e-6 x scale {scale:.3e}"
            ));
        }
    }

    Ok(RecoveredModel {
        detection,
        units,
        linear,
        constant,
        params,
        verification,
        violations,
        probe_queries,
        total_queries: oracle.queries_used() - start,
    })
}

/// Hidden-layer sizes of two targets, by counting detected hyperplanes.
pub fn count_units(
    a: &dyn Oracle,
    b: &dyn Oracle,
    box_radius: f64,
    line_count: usize,
    tol: f64,
    seed: u64,
) -> Result<(usize, usize, bool)> {
    let da = detect_hyperplanes(a, box_radius, line_count, tol, seed)?;
    let db = detect_hyperplanes(b, box_radius, line_count, tol, seed)?;
    let (na, nb) = (da.hyperplanes.len(), db.hyperplanes.len());
    Ok((na, nb, na == nb))
}

/// Smallest-denominator rational within `tol` of `v`: the first continued-
/// fraction convergent that is close enough, falling back to the exact
/// dyadic value when none is.
pub fn snap_rational(v: f64, tol: f64) -> Rat {
    if v == 0.0 || !v.is_finite() {
        return Rat::from_int(0);
    }
    let target = v.abs();
    if target >= 9.0e15 {
        return Rat::from_f64(v);
    }
    let mut x = target;
    let mut a = x.floor();
    let (mut h0, mut k0) = (BigInt::one(), BigInt::from(0));
    let (mut h1, mut k1) = (BigInt::from(a as i64), BigInt::one());
    for _ in 0..64 {
        let cand = Rat::new(h1.clone(), k1.clone());
        if (cand.to_f64() - target).abs() <= tol {
            return if v < 0.0 { -cand } else { cand };
        }
        let frac = x - a;
        if frac <= 1e-15 {
            break;
        }
        x = 1.0 / frac;
        if x >= 9.0e15 {
            break;
        }
        a = x.floor();
        let ai = BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        h0 = h1;
        k0 = k1;
        h1 = h2;
        k1 = k2;
    }
    Rat::from_f64(v)
}

pub fn snap_params(p: &Params<f64>, tol: f64) -> Params<Rat> {
    p.map(|v| snap_rational(*v, tol))
}

/// Bridge from a recovered float network to the exact deciders: canonicalize
/// in float (killing the per-unit scale freedom), then snap every entry to
/// the nearest small rational.
pub fn snap_canonical(p: &Params<f64>, tol: f64) -> Result<Params<Rat>> {
    let (c, _) = canonical_form(p)?;
    Ok(snap_params(&c, tol))
}
