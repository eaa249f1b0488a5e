//! Group actions on parameter space (per-neuron positive rescaling, hidden
//! permutations), canonical orbit representatives, and the two deciders:
//! same-scaling-orbit (with an exact rescaling certificate) and
//! same-permutation-scaling-orbit (with a permutation + rescaling witness).

use crate::embedding::embed;
use crate::error::{CoreError, Result};
use crate::linalg::sup_norm;
use crate::network::{DeadNeuron, Params};
use crate::scalar::Scalar;
use serde::Serialize;

/// One positive factor per hidden neuron; `factors[l-1]` covers layer l.
#[derive(Clone, Debug, PartialEq)]
pub struct Rescaling<S> {
    factors: Vec<Vec<S>>,
}

impl<S: Scalar> Rescaling<S> {
    pub fn new(factors: Vec<Vec<S>>) -> Result<Self> {
        for layer in &factors {
            for f in layer {
                if !f.is_positive() {
                    return Err(CoreError::Domain(
                        "rescaling factors must be strictly positive".into(),
                    ));
                }
            }
        }
        Ok(Rescaling { factors })
    }

    pub fn identity(hidden_widths: &[usize]) -> Self {
        Rescaling {
            factors: hidden_widths.iter().map(|&w| vec![S::one(); w]).collect(),
        }
    }

    pub fn factors(&self) -> &[Vec<S>] {
        &self.factors
    }

    pub fn inverse(&self) -> Self {
        Rescaling {
            factors: self
                .factors
                .iter()
                .map(|l| l.iter().map(|f| S::one().div(f).unwrap()).collect())
                .collect(),
        }
    }

    pub fn compose(&self, then: &Rescaling<S>) -> Self {
        Rescaling {
            factors: self
                .factors
                .iter()
                .zip(&then.factors)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.mul(y)).collect())
                .collect(),
        }
    }
}

/// Hidden-layer permutations; `maps[l-1][old] = new` for layer l.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Permutation {
    maps: Vec<Vec<usize>>,
}

impl Permutation {
    pub fn new(maps: Vec<Vec<usize>>) -> Result<Self> {
        for m in &maps {
            let mut seen = vec![false; m.len()];
            for &v in m {
                if v >= m.len() || seen[v] {
                    return Err(CoreError::Domain("not a permutation".into()));
                }
                seen[v] = true;
            }
        }
        Ok(Permutation { maps })
    }

    pub fn identity(hidden_widths: &[usize]) -> Self {
        Permutation {
            maps: hidden_widths.iter().map(|&w| (0..w).collect()).collect(),
        }
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    pub fn is_identity(&self) -> bool {
        self.maps
            .iter()
            .all(|m| m.iter().enumerate().all(|(i, &v)| i == v))
    }

    fn inverse_map(m: &[usize]) -> Vec<usize> {
        let mut inv = vec![0; m.len()];
        for (old, &new) in m.iter().enumerate() {
            inv[new] = old;
        }
        inv
    }
}

/// Apply a rescaling: incoming weights and bias of a hidden neuron are
/// multiplied by its factor, outgoing weights divided by it.
pub fn rescale<S: Scalar>(p: &Params<S>, s: &Rescaling<S>) -> Params<S> {
    let depth = p.depth();
    let mut out = p.clone();
    let factor = |layer: usize, neuron: usize| -> S {
        if layer == 0 || layer == depth {
            S::one()
        } else {
            s.factors[layer - 1][neuron].clone()
        }
    };
    for l in 1..=depth {
        let rows = p.arch().width(l);
        let cols = p.arch().width(l - 1);
        for i in 0..rows {
            let fi = factor(l, i);
            for j in 0..cols {
                let fj = factor(l - 1, j);
                let v = p.weight(l).at(i, j).mul(&fi).div(&fj).expect("positive factor");
                *out.weight_mut(l).at_mut(i, j) = v;
            }
            out.bias_mut(l)[i] = p.bias(l)[i].mul(&fi);
        }
    }
    out
}

/// Apply hidden-layer permutations.
pub fn permute<S: Scalar>(p: &Params<S>, pi: &Permutation) -> Params<S> {
    let depth = p.depth();
    let mut out = p.clone();
    let map = |layer: usize, neuron: usize| -> usize {
        if layer == 0 || layer == depth {
            neuron
        } else {
            pi.maps[layer - 1][neuron]
        }
    };
    for l in 1..=depth {
        for i in 0..p.arch().width(l) {
            let ni = map(l, i);
            for j in 0..p.arch().width(l - 1) {
                let nj = map(l - 1, j);
                *out.weight_mut(l).at_mut(ni, nj) = p.weight(l).at(i, j).clone();
            }
            out.bias_mut(l)[ni] = p.bias(l)[i].clone();
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub dead: Vec<DeadNeuron>,
}

/// Entries with |value| <= atol are treated as zero (atol 0 = exact).
pub fn admissibility<S: Scalar>(p: &Params<S>, atol: f64) -> AdmissibilityReport {
    let dead = p.dead_neurons(atol);
    AdmissibilityReport {
        admissible: dead.is_empty(),
        dead,
    }
}

/// Scaling-orbit representative: sweep hidden layers from the bottom,
/// normalizing each neuron's extended incoming vector (weights plus bias) to
/// sup-norm one and pushing the norm into the outgoing weights. The sup norm
/// keeps every entry rational in exact mode, so representatives of the same
/// orbit are bit-for-bit identical.
pub fn canonical_form<S: Scalar>(p: &Params<S>) -> Result<(Params<S>, Rescaling<S>)> {
    if !p.is_admissible() {
        return Err(CoreError::NotAdmissible(
            "canonical form needs nonzero incoming and outgoing weights".into(),
        ));
    }
    let mut out = p.clone();
    let mut factors: Vec<Vec<S>> = Vec::new();
    for l in p.arch().hidden_layers() {
        let mut layer_factors = Vec::with_capacity(p.arch().width(l));
        for nu in 0..p.arch().width(l) {
            let ext = out.incoming_extended(l, nu);
            let n = sup_norm(&ext);
            debug_assert!(n.is_positive(), "admissible network has nonzero rows");
            let c = S::one().div(&n).unwrap();
            for j in 0..p.arch().width(l - 1) {
                let v = out.weight(l).at(nu, j).mul(&c);
                *out.weight_mut(l).at_mut(nu, j) = v;
            }
            let b = out.bias(l)[nu].mul(&c);
            out.bias_mut(l)[nu] = b;
            for i in 0..p.arch().width(l + 1) {
                let v = out.weight(l + 1).at(i, nu).mul(&n);
                *out.weight_mut(l + 1).at_mut(i, nu) = v;
            }
            layer_factors.push(c);
        }
        factors.push(layer_factors);
    }
    Ok((out, Rescaling { factors }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ScalingObstruction {
    EmbeddingMismatch,
    WeightSignMismatch,
    VerificationFailed,
}

#[derive(Clone, Debug)]
pub enum ScalingDecision<S> {
    Equivalent(Rescaling<S>),
    NotEquivalent(ScalingObstruction),
    /// The sufficient test is silent on non-admissible base points.
    UndecidableNotAdmissible,
}

/// Greedy support path from a hidden neuron to the output layer; exists for
/// admissible parameters. Returns the traversed edge values of both networks.
fn support_path_ratios<S: Scalar>(
    a: &Params<S>,
    b: &Params<S>,
    layer: usize,
    neuron: usize,
) -> S {
    let depth = a.depth();
    let mut l = layer;
    let mut nu = neuron;
    let mut ratio = S::one();
    while l < depth {
        let next = (0..a.arch().width(l + 1))
            .find(|&i| !a.weight(l + 1).at(i, nu).is_zero())
            .expect("admissible neuron has a nonzero outgoing edge");
        ratio = ratio.mul(
            &a.weight(l + 1)
                .at(next, nu)
                .div(b.weight(l + 1).at(next, nu))
                .expect("matching support"),
        );
        l += 1;
        nu = next;
    }
    ratio
}

/// Decide membership in the same scaling orbit. Sound and complete on
/// admissible base points: equal embeddings plus equal weight signs force
/// equivalence, and the recovered rescaling is verified by reconstruction.
pub fn check_scaling_equivalent<S: Scalar>(
    a: &Params<S>,
    b: &Params<S>,
) -> Result<ScalingDecision<S>> {
    if a.arch() != b.arch() {
        return Err(CoreError::ArchitectureMismatch(format!(
            "{:?} vs {:?}",
            a.arch().widths(),
            b.arch().widths()
        )));
    }
    if !a.is_admissible() {
        return Ok(ScalingDecision::UndecidableNotAdmissible);
    }
    for l in 1..=a.depth() {
        for i in 0..a.arch().width(l) {
            for j in 0..a.arch().width(l - 1) {
                if a.weight(l).at(i, j).sign() != b.weight(l).at(i, j).sign() {
                    return Ok(ScalingDecision::NotEquivalent(
                        ScalingObstruction::WeightSignMismatch,
                    ));
                }
            }
        }
    }
    let ea = embed(a)?;
    let eb = embed(b)?;
    if !ea.same_phi(&eb) {
        return Ok(ScalingDecision::NotEquivalent(
            ScalingObstruction::EmbeddingMismatch,
        ));
    }
    // Recover the factor of each hidden neuron as the exact product of edge
    // ratios along one support path to the output.
    let mut factors = Vec::new();
    for l in a.arch().hidden_layers() {
        let layer: Vec<S> = (0..a.arch().width(l))
            .map(|nu| support_path_ratios(a, b, l, nu))
            .collect();
        factors.push(layer);
    }
    if factors.iter().flatten().any(|f| !f.is_positive()) {
        return Ok(ScalingDecision::NotEquivalent(
            ScalingObstruction::WeightSignMismatch,
        ));
    }
    let witness = Rescaling { factors };
    if &rescale(a, &witness) == b {
        Ok(ScalingDecision::Equivalent(witness))
    } else {
        Ok(ScalingDecision::NotEquivalent(
            ScalingObstruction::VerificationFailed,
        ))
    }
}

/// The neuron-indexed linear map sending edge increments to the unique
/// consistent per-neuron exponents: beta_nu = -(sum of alpha over one
/// support path from nu to the output). Well defined on the kernel of the
/// full-path sum restriction.
pub fn s_map<S: Scalar>(p: &Params<S>, alpha: &Params<S>, pick_last: bool) -> Result<Vec<Vec<S>>> {
    if !p.is_admissible() {
        return Err(CoreError::NotAdmissible("s_map needs support paths".into()));
    }
    let depth = p.depth();
    let mut out = Vec::new();
    for l in p.arch().hidden_layers() {
        let mut layer = Vec::with_capacity(p.arch().width(l));
        for nu in 0..p.arch().width(l) {
            let mut acc = S::zero();
            let mut cl = l;
            let mut cn = nu;
            while cl < depth {
                let candidates: Vec<usize> = (0..p.arch().width(cl + 1))
                    .filter(|&i| !p.weight(cl + 1).at(i, cn).is_zero())
                    .collect();
                let next = if pick_last {
                    *candidates.last().expect("admissible")
                } else {
                    candidates[0]
                };
                acc = acc.add(alpha.weight(cl + 1).at(next, cn));
                cl += 1;
                cn = next;
            }
            layer.push(acc.neg());
        }
        out.push(layer);
    }
    Ok(out)
}

/// Right inverse of `s_map`: build edge increments realizing the requested
/// per-neuron exponents, supported on the support of `p`, zero on biases.
pub fn s_map_inverse<S: Scalar>(p: &Params<S>, beta: &[Vec<S>]) -> Params<S> {
    let depth = p.depth();
    let mut alpha = p.map(|_| S::zero());
    let beta_at = |layer: usize, neuron: usize| -> S {
        if layer == 0 || layer == depth {
            S::zero()
        } else {
            beta[layer - 1][neuron].clone()
        }
    };
    for l in 1..=depth {
        for i in 0..p.arch().width(l) {
            for j in 0..p.arch().width(l - 1) {
                if p.weight(l).at(i, j).is_zero() {
                    continue;
                }
                // Edge from layer l-1 (neuron j) to layer l (neuron i).
                let v = if l == 1 && depth == 1 {
                    S::zero()
                } else if l == 1 {
                    beta_at(1, i)
                } else if l == depth {
                    beta_at(depth - 1, j).neg()
                } else {
                    beta_at(l, i).sub(&beta_at(l - 1, j))
                };
                *alpha.weight_mut(l).at_mut(i, j) = v;
            }
        }
    }
    alpha
}

#[derive(Clone, Debug)]
pub struct PsWitness<S> {
    pub perm: Permutation,
    pub rescaling: Rescaling<S>,
}

#[derive(Clone, Debug)]
pub enum PsDecision<S> {
    Equivalent(PsWitness<S>),
    NotEquivalent,
    Inconclusive(String),
}

pub const DEFAULT_PS_BUDGET: u64 = 1_000_000;

struct PsSearch<'a, S: Scalar> {
    a: &'a Params<S>,
    b: &'a Params<S>,
    budget: u64,
    tried: u64,
}

impl<'a, S: Scalar> PsSearch<'a, S> {
    /// Extended row of layer l in `a`, with columns re-indexed through the
    /// already-chosen permutation of layer l-1.
    fn aligned_row(&self, l: usize, i: usize, prev_map: &[usize]) -> Vec<S> {
        let cols = self.a.arch().width(l - 1);
        let mut v = vec![S::zero(); cols + 1];
        for j in 0..cols {
            let nj = if l == 1 { j } else { prev_map[j] };
            v[nj] = self.a.weight(l).at(i, j).clone();
        }
        v[cols] = self.a.bias(l)[i].clone();
        v
    }

    fn b_row(&self, l: usize, r: usize) -> Vec<S> {
        self.b.incoming_extended(l, r)
    }

    fn solve(&mut self, l: usize, prev_map: Vec<usize>, acc: &mut Vec<Vec<usize>>) -> Option<bool> {
        let depth = self.a.depth();
        if l == depth {
            // Output layer: no row permutation left, just compare.
            let w = self.a.arch().width(depth);
            for i in 0..w {
                if self.aligned_row(depth, i, &prev_map) != self.b_row(depth, i) {
                    return Some(false);
                }
            }
            return Some(true);
        }
        let width = self.a.arch().width(l);
        // Bucket the B rows by exact value.
        let mut b_rows: Vec<(Vec<S>, usize)> = (0..width).map(|r| (self.b_row(l, r), r)).collect();
        let mut buckets: Vec<(Vec<S>, Vec<usize>, Vec<usize>)> = Vec::new();
        'outer: for (row, r) in b_rows.drain(..) {
            for bucket in buckets.iter_mut() {
                if bucket.0 == row {
                    bucket.2.push(r);
                    continue 'outer;
                }
            }
            buckets.push((row, Vec::new(), vec![r]));
        }
        for i in 0..width {
            let row = self.aligned_row(l, i, &prev_map);
            match buckets.iter_mut().find(|b| b.0 == row) {
                Some(bucket) => bucket.1.push(i),
                None => return Some(false),
            }
        }
        if buckets.iter().any(|b| b.1.len() != b.2.len()) {
            return Some(false);
        }
        // Enumerate bucket-respecting assignments in deterministic order.
        let mut map = vec![usize::MAX; width];
        self.assign_buckets(l, &buckets, 0, &mut map, acc)
    }

    fn assign_buckets(
        &mut self,
        l: usize,
        buckets: &[(Vec<S>, Vec<usize>, Vec<usize>)],
        k: usize,
        map: &mut Vec<usize>,
        acc: &mut Vec<Vec<usize>>,
    ) -> Option<bool> {
        if k == buckets.len() {
            self.tried += 1;
            if self.tried > self.budget {
                return None; // budget exhausted
            }
            acc.push(map.clone());
            let r = self.solve(l + 1, map.clone(), acc);
            if r != Some(true) {
                acc.pop();
            }
            return r;
        }
        let (_, ref a_idx, ref b_idx) = buckets[k];
        let mut chosen = vec![false; b_idx.len()];
        self.permute_bucket(l, buckets, k, a_idx, b_idx, 0, &mut chosen, map, acc)
    }

    #[allow(clippy::too_many_arguments)]
    fn permute_bucket(
        &mut self,
        l: usize,
        buckets: &[(Vec<S>, Vec<usize>, Vec<usize>)],
        k: usize,
        a_idx: &[usize],
        b_idx: &[usize],
        pos: usize,
        chosen: &mut Vec<bool>,
        map: &mut Vec<usize>,
        acc: &mut Vec<Vec<usize>>,
    ) -> Option<bool> {
        if pos == a_idx.len() {
            return self.assign_buckets(l, buckets, k + 1, map, acc);
        }
        for t in 0..b_idx.len() {
            if chosen[t] {
                continue;
            }
            chosen[t] = true;
            map[a_idx[pos]] = b_idx[t];
            let r = self.permute_bucket(l, buckets, k, a_idx, b_idx, pos + 1, chosen, map, acc);
            if r != Some(false) {
                return r; // success or budget exhaustion
            }
            chosen[t] = false;
            map[a_idx[pos]] = usize::MAX;
        }
        Some(false)
    }
}

/// Decide membership in the same permutation-scaling orbit by aligning
/// canonical representatives layer by layer. Neurons are bucketed by their
/// canonical extended incoming vector (a scaling invariant), permutations
/// are tried only inside buckets, and any witness found is verified by exact
/// reconstruction before being returned.
pub fn check_ps_equivalent<S: Scalar>(
    a: &Params<S>,
    b: &Params<S>,
    budget: u64,
) -> Result<PsDecision<S>> {
    if a.arch() != b.arch() {
        return Err(CoreError::ArchitectureMismatch(format!(
            "{:?} vs {:?}",
            a.arch().widths(),
            b.arch().widths()
        )));
    }
    if !a.is_admissible() {
        return Ok(PsDecision::Inconclusive(
            "base point is not admissible; the orbit test is silent here".into(),
        ));
    }
    if !b.is_admissible() {
        // Admissibility is invariant under the group action.
        return Ok(PsDecision::NotEquivalent);
    }
    let (ca, sa) = canonical_form(a)?;
    let (cb, sb) = canonical_form(b)?;
    let mut search = PsSearch {
        a: &ca,
        b: &cb,
        budget,
        tried: 0,
    };
    let mut acc: Vec<Vec<usize>> = Vec::new();
    match search.solve(1, (0..a.arch().input_dim()).collect(), &mut acc) {
        None => Ok(PsDecision::Inconclusive(format!(
            "assignment budget of {budget} exhausted"
        ))),
        Some(false) => Ok(PsDecision::NotEquivalent),
        Some(true) => {
            let perm = Permutation::new(acc)?;
            // theta' = rescale(permute(theta, pi), lambda) with
            // lambda_nu = cA_{pi^{-1}(nu)} / cB_nu.
            let mut factors = Vec::new();
            for (lf, (la, lb)) in perm
                .maps()
                .iter()
                .zip(sa.factors().iter().zip(sb.factors()))
            {
                let inv = Permutation::inverse_map(lf);
                let layer: Vec<S> = (0..lf.len())
                    .map(|nu| la[inv[nu]].div(&lb[nu]).expect("positive factors"))
                    .collect();
                factors.push(layer);
            }
            let witness = PsWitness {
                perm,
                rescaling: Rescaling { factors },
            };
            let rebuilt = rescale(&permute(a, &witness.perm), &witness.rescaling);
            debug_assert!(&rebuilt == b, "witness must reconstruct the target");
            if &rebuilt == b {
                Ok(PsDecision::Equivalent(witness))
            } else {
                Ok(PsDecision::Inconclusive(
                    "internal: witness verification failed".into(),
                ))
            }
        }
    }
}

/// Tolerance-based variant for float-mode parameters (used when comparing a
/// reconstructed network against its source). Matches canonical rows within
/// `rtol` relative sup distance and verifies the witness to the same
/// tolerance.
pub fn check_ps_equivalent_approx(
    a: &Params<f64>,
    b: &Params<f64>,
    rtol: f64,
) -> Result<Option<PsWitness<f64>>> {
    if a.arch() != b.arch() {
        return Err(CoreError::ArchitectureMismatch(format!(
            "{:?} vs {:?}",
            a.arch().widths(),
            b.arch().widths()
        )));
    }
    let (ca, sa) = canonical_form(a)?;
    let (cb, sb) = canonical_form(b)?;
    let scale = 1.0 + ca.sup_norm().max(cb.sup_norm());
    let close = |u: &[f64], v: &[f64]| -> bool {
        u.iter().zip(v).all(|(x, y)| (x - y).abs() <= rtol * scale)
    };
    // Greedy layer-by-layer matching with backtracking.
    fn solve(
        ca: &Params<f64>,
        cb: &Params<f64>,
        l: usize,
        prev_map: &[usize],
        close: &dyn Fn(&[f64], &[f64]) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) -> bool {
        let depth = ca.depth();
        let aligned = |l: usize, i: usize| -> Vec<f64> {
            let cols = ca.arch().width(l - 1);
            let mut v = vec![0.0; cols + 1];
            for j in 0..cols {
                let nj = if l == 1 { j } else { prev_map[j] };
                v[nj] = *ca.weight(l).at(i, j);
            }
            v[cols] = ca.bias(l)[i];
            v
        };
        if l == depth {
            return (0..ca.arch().width(depth))
                .all(|i| close(&aligned(depth, i), &cb.incoming_extended(depth, i)));
        }
        let width = ca.arch().width(l);
        fn backtrack(
            ca: &Params<f64>,
            cb: &Params<f64>,
            l: usize,
            i: usize,
            used: &mut Vec<bool>,
            map: &mut Vec<usize>,
            aligned: &dyn Fn(usize, usize) -> Vec<f64>,
            close: &dyn Fn(&[f64], &[f64]) -> bool,
            out: &mut Vec<Vec<usize>>,
        ) -> bool {
            let width = ca.arch().width(l);
            if i == width {
                out.push(map.clone());
                let ok = solve(ca, cb, l + 1, &map.clone(), close, out);
                if !ok {
                    out.pop();
                }
                return ok;
            }
            let row = aligned(l, i);
            for r in 0..width {
                if used[r] || !close(&row, &cb.incoming_extended(l, r)) {
                    continue;
                }
                used[r] = true;
                map[i] = r;
                if backtrack(ca, cb, l, i + 1, used, map, aligned, close, out) {
                    return true;
                }
                used[r] = false;
            }
            false
        }
        let mut used = vec![false; width];
        let mut map = vec![usize::MAX; width];
        backtrack(ca, cb, l, 0, &mut used, &mut map, &aligned, close, out)
    }
    let mut acc: Vec<Vec<usize>> = Vec::new();
    let input_map: Vec<usize> = (0..a.arch().input_dim()).collect();
    if !solve(&ca, &cb, 1, &input_map, &close, &mut acc) {
        return Ok(None);
    }
    let perm = Permutation::new(acc)?;
    let mut factors = Vec::new();
    for (lf, (la, lb)) in perm
        .maps()
        .iter()
        .zip(sa.factors().iter().zip(sb.factors()))
    {
        let inv = Permutation::inverse_map(lf);
        let layer: Vec<f64> = (0..lf.len()).map(|nu| la[inv[nu]] / lb[nu]).collect();
        factors.push(layer);
    }
    let witness = PsWitness {
        perm,
        rescaling: Rescaling { factors },
    };
    let rebuilt = rescale(&permute(a, &witness.perm), &witness.rescaling);
    let bscale = 1.0 + b.sup_norm();
    for l in 1..=a.depth() {
        for i in 0..a.arch().width(l) {
            for j in 0..a.arch().width(l - 1) {
                if (rebuilt.weight(l).at(i, j) - b.weight(l).at(i, j)).abs() > rtol * bscale {
                    return Ok(None);
                }
            }
            if (rebuilt.bias(l)[i] - b.bias(l)[i]).abs() > rtol * bscale {
                return Ok(None);
            }
        }
    }
    Ok(Some(witness))
}
