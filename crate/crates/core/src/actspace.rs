//! Activation spaces: the span of the chain-activation vectors a parameter
//! point realizes, the orthogonal complement that measures which embedding
//! directions are invisible to samples, and degeneracy certificates.

use crate::counterexamples::{negative_pair_drift, positive_twin_collapse, ExamplePair};
use crate::diagnostics::{find_twins, scale_between, TwinClass};
use crate::embedding::chain_activations;
use crate::equivalence::{check_ps_equivalent, PsDecision, DEFAULT_PS_BUDGET};
use crate::error::{CoreError, Result};
use crate::linalg::{orthonormalize_f64, RowBasis};
use crate::network::{Architecture, ConstraintSet, Params, XContStatus};
use crate::paths::ChainIndex;
use crate::scalar::{Rat, Scalar};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Span of observed (or derived) activation vectors. Rows are kept with
/// integer coordinates so rank questions stay exact; the float basis is for
/// reporting only.
#[derive(Clone, Debug)]
pub struct ActivationSpace {
    /// |Q| + 1 for the underlying architecture.
    pub ambient: usize,
    /// Size of the first chain block (chains starting at layer 1).
    pub q1: usize,
    /// Independent activation vectors, one per dimension of the span.
    pub rows: Vec<Vec<i64>>,
    /// Orthonormal basis of the span.
    pub basis: Vec<Vec<f64>>,
    pub actdim: usize,
    /// Inputs realizing the sampled rows; empty for closed-form spaces.
    pub witnesses: Vec<Vec<f64>>,
    /// Sampled spaces only lower-bound the true span.
    pub sampled: bool,
}

fn rows_to_rat(rows: &[Vec<i64>]) -> Vec<Vec<Rat>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| Rat::from_int(v)).collect())
        .collect()
}

impl ActivationSpace {
    fn assemble(
        ambient: usize,
        q1: usize,
        rows: Vec<Vec<i64>>,
        witnesses: Vec<Vec<f64>>,
        sampled: bool,
    ) -> Self {
        let float_rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect();
        let basis = orthonormalize_f64(&float_rows, 1e-12);
        let actdim = rows.len();
        debug_assert_eq!(basis.len(), actdim);
        ActivationSpace {
            ambient,
            q1,
            rows,
            basis,
            actdim,
            witnesses,
            sampled,
        }
    }

    /// Exact basis of the orthogonal complement of the span.
    pub fn complement(&self) -> Vec<Vec<Rat>> {
        let mut rb = RowBasis::new(self.ambient);
        for row in rows_to_rat(&self.rows) {
            rb.insert(&row);
        }
        rb.complement()
    }

    /// Is the direction orthogonal to every stored activation vector?
    pub fn is_in_complement<S: Scalar>(&self, z: &[S]) -> bool {
        if z.len() != self.ambient {
            return false;
        }
        let scale: f64 = z.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
        for row in &self.rows {
            let mut acc = S::zero();
            for (zi, &ri) in z.iter().zip(row) {
                acc = acc.add(&zi.mul(&S::from_int(ri)));
            }
            if S::EXACT {
                if !acc.is_zero() {
                    return false;
                }
            } else if acc.to_f64().abs() > 1e-10 * scale.max(1.0) {
                return false;
            }
        }
        true
    }
}

/// The chain-activation vector of an input: one 0/1 entry per chain, plus a
/// trailing constant one.
pub fn path_activation_vector<S: Scalar>(p: &Params<S>, x: &[S]) -> Vec<bool> {
    let chains = ChainIndex::new(p.arch());
    chain_activations(&p.forward(x), &chains)
}

fn bools_to_row(bits: &[bool]) -> Vec<i64> {
    bits.iter().map(|&b| if b { 1 } else { 0 }).collect()
}

fn normal_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            g * radius
        })
        .collect()
}

/// Estimate the activation space by sampling inputs at several radii,
/// keeping only points comfortably away from activation boundaries. For
/// shallow networks a targeted pair of points is additionally planted on
/// each side of every twin-class hyperplane, so class directions are found
/// even when the hyperplane is hard to hit at random.
pub fn sample_activation_space<S: Scalar>(
    p: &Params<S>,
    n_samples: usize,
    seed: u64,
    margin: f64,
) -> Result<ActivationSpace> {
    let chains = ChainIndex::new(p.arch());
    let ambient = chains.total() + 1;
    let q1 = chains.first_block();
    let dim = p.arch().input_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rb: RowBasis<Rat> = RowBasis::new(ambient);
    let mut rows: Vec<Vec<i64>> = Vec::new();
    let mut witnesses: Vec<Vec<f64>> = Vec::new();

    let radii = [0.25, 1.0, 4.0];
    let mut valid = 0usize;
    let mut attempts = 0usize;
    while valid < n_samples && rb.rank() < ambient {
        if attempts >= 100 * n_samples.max(1) {
            break;
        }
        let radius = radii[attempts % radii.len()];
        attempts += 1;
        let xf = normal_point(&mut rng, dim, radius);
        let xs: Vec<S> = xf.iter().map(|&v| S::from_f64(v)).collect();
        if p.in_xcont(&xs, margin) != XContStatus::Inside {
            continue;
        }
        valid += 1;
        let row = bools_to_row(&path_activation_vector(p, &xs));
        let rat_row: Vec<Rat> = row.iter().map(|&v| Rat::from_int(v)).collect();
        if rb.insert(&rat_row) {
            rows.push(row);
            witnesses.push(xf);
        }
    }
    if valid == 0 {
        return Err(CoreError::Sampling(
            "no sample point cleared the activation-boundary margin".into(),
        ));
    }

    if p.arch().is_shallow() && rb.rank() < ambient {
        for class in &find_twins(p).classes {
            if rb.rank() == ambient {
                break;
            }
            if class.zero_vector {
                continue;
            }
            for xf in straddle_points(p, class, &mut rng).into_iter().flatten() {
                let xs: Vec<S> = xf.iter().map(|&v| S::from_f64(v)).collect();
                let row = bools_to_row(&path_activation_vector(p, &xs));
                let rat_row: Vec<Rat> = row.iter().map(|&v| Rat::from_int(v)).collect();
                if rb.insert(&rat_row) {
                    rows.push(row);
                    witnesses.push(xf);
                }
            }
        }
    }

    Ok(ActivationSpace::assemble(ambient, q1, rows, witnesses, true))
}

/// Two inputs straddling the class hyperplane while every other hidden unit
/// keeps its status, verified on the exact forward pass.
fn straddle_points<S: Scalar>(
    p: &Params<S>,
    class: &TwinClass<S>,
    rng: &mut ChaCha8Rng,
) -> Option<[Vec<f64>; 2]> {
    let dim = p.arch().input_dim();
    let h = p.arch().width(1);
    let rep = class.members[0];
    let row_f = |nu: usize| -> (Vec<f64>, f64) {
        let w: Vec<f64> = (0..dim).map(|j| p.weight(1).at(nu, j).to_f64()).collect();
        (w, p.bias(1)[nu].to_f64())
    };
    let (w, b) = row_f(rep);
    let wn2: f64 = w.iter().map(|v| v * v).sum();
    if wn2 <= 0.0 {
        return None;
    }
    let wn = wn2.sqrt();

    // Pick the projection with the most room before another unit's boundary.
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..50 {
        let y = normal_point(rng, dim, 1.5);
        let z: f64 = w.iter().zip(&y).map(|(a, c)| a * c).sum::<f64>() + b;
        let x0: Vec<f64> = y
            .iter()
            .zip(&w)
            .map(|(yi, wi)| yi - z * wi / wn2)
            .collect();
        let mut clearance = f64::INFINITY;
        for nu in 0..h {
            if class.members.contains(&nu) {
                continue;
            }
            let (wo, bo) = row_f(nu);
            let won2: f64 = wo.iter().map(|v| v * v).sum();
            if won2 <= 0.0 {
                continue;
            }
            let zo: f64 = wo.iter().zip(&x0).map(|(a, c)| a * c).sum::<f64>() + bo;
            // Moving t along w/||w|| changes z_o by at most t * ||w_o||.
            clearance = clearance.min(zo.abs() / won2.sqrt());
        }
        if best.as_ref().map(|(_, c)| clearance > *c).unwrap_or(true) {
            best = Some((x0, clearance));
        }
    }
    let (x0, clearance) = best?;
    if clearance <= 0.0 {
        return None;
    }

    // Infinite clearance means no other unit constrains the move.
    let mut delta = if clearance.is_finite() {
        (clearance / 2.0).min(1.0)
    } else {
        1.0
    };
    for _ in 0..30 {
        let offset: Vec<f64> = w.iter().map(|wi| wi * delta / wn).collect();
        let x_plus: Vec<f64> = x0.iter().zip(&offset).map(|(a, o)| a + o).collect();
        let x_minus: Vec<f64> = x0.iter().zip(&offset).map(|(a, o)| a - o).collect();
        let sp = p.forward(&x_plus.iter().map(|&v| S::from_f64(v)).collect::<Vec<_>>());
        let sm = p.forward(&x_minus.iter().map(|&v| S::from_f64(v)).collect::<Vec<_>>());
        let mut ok = true;
        for nu in 0..h {
            match class.members.iter().position(|&m| m == nu) {
                Some(i) => {
                    let positive = class.scales[i].sign() > 0;
                    ok &= sp.statuses[0][nu] == positive;
                    ok &= sm.statuses[0][nu] == !positive;
                }
                None => ok &= sp.statuses[0][nu] == sm.statuses[0][nu],
            }
        }
        if ok {
            return Some([x_minus, x_plus]);
        }
        delta /= 2.0;
    }
    None
}

/// Closed-form activation space of a shallow network: one direction per
/// twin class (its signature vector) plus the all-ones direction with a
/// doubled constant coordinate.
pub fn shallow_activation_space<S: Scalar>(p: &Params<S>) -> Result<ActivationSpace> {
    if !p.arch().is_shallow() {
        return Err(CoreError::UnsupportedDepth {
            required: "exactly one hidden layer".into(),
            actual: p.depth(),
        });
    }
    if !p.is_admissible() {
        return Err(CoreError::NotAdmissible(
            "closed form needs every unit alive".into(),
        ));
    }
    let h = p.arch().width(1);
    let ambient = h + 1;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    let mut ones = vec![1i64; ambient];
    ones[h] = 2;
    rows.push(ones);
    for class in &find_twins(p).classes {
        let mut row: Vec<i64> = class.signature(h).iter().map(|&s| s as i64).collect();
        row.push(0);
        rows.push(row);
    }
    let mut rb: RowBasis<Rat> = RowBasis::new(ambient);
    for row in rows_to_rat(&rows) {
        let grew = rb.insert(&row);
        debug_assert!(grew, "closed-form rows must be independent");
    }
    Ok(ActivationSpace::assemble(ambient, h, rows, Vec::new(), false))
}

/// Dimensions of the space of embedding perturbations invisible on
/// activation-stable inputs.
#[derive(Clone, Debug)]
pub struct VSpaceStructure {
    /// Complement of the activation span projected to the first chain block.
    pub a_perp: Vec<Vec<Rat>>,
    /// Complement of the full activation span.
    pub abar_perp: Vec<Vec<Rat>>,
    pub dim_a_perp: usize,
    pub dim_abar_perp: usize,
    /// out * in * dim_a_perp + out * dim_abar_perp.
    pub dim_v: usize,
}

pub fn v_space_structure(space: &ActivationSpace, arch: &Architecture) -> Result<VSpaceStructure> {
    let chains = ChainIndex::new(arch);
    if chains.total() + 1 != space.ambient {
        return Err(CoreError::ArchitectureMismatch(format!(
            "space ambient {} does not match architecture ({} chains)",
            space.ambient,
            chains.total()
        )));
    }
    let mut full: RowBasis<Rat> = RowBasis::new(space.ambient);
    let mut first: RowBasis<Rat> = RowBasis::new(space.q1);
    for row in rows_to_rat(&space.rows) {
        first.insert(&row[..space.q1]);
        full.insert(&row);
    }
    let a_perp = first.complement();
    let abar_perp = full.complement();
    let dim_a_perp = a_perp.len();
    let dim_abar_perp = abar_perp.len();
    let dim_v = arch.output_dim() * (arch.input_dim() * dim_a_perp + dim_abar_perp);
    Ok(VSpaceStructure {
        a_perp,
        abar_perp,
        dim_a_perp,
        dim_abar_perp,
        dim_v,
    })
}

/// A bias perturbation whose realization matches the original wherever all
/// hidden pre-activations stay strictly larger than `clearance` in absolute
/// value.
#[derive(Clone, Debug)]
pub struct DegeneracyWitness<S> {
    pub perturbed: Params<S>,
    pub clearance: S,
    pub direction: Vec<S>,
}

/// Realize a complement direction of a scalar-output shallow network as a
/// bias perturbation: the change pairs to zero with every stable
/// activation vector, so the realization is untouched off the boundaries.
pub fn scalar_bias_degeneracy_witness<S: Scalar>(
    p: &Params<S>,
    space: &ActivationSpace,
    z: &[S],
    eps: &S,
) -> Result<DegeneracyWitness<S>> {
    if !p.arch().is_shallow() {
        return Err(CoreError::UnsupportedDepth {
            required: "exactly one hidden layer".into(),
            actual: p.depth(),
        });
    }
    if p.arch().output_dim() != 1 {
        return Err(CoreError::Domain("needs a scalar output".into()));
    }
    let h = p.arch().width(1);
    if z.len() != h + 1 || space.ambient != h + 1 {
        return Err(CoreError::ShapeMismatch(format!(
            "direction must live in dimension {}",
            h + 1
        )));
    }
    if eps.is_zero() {
        return Err(CoreError::Domain("eps must be nonzero".into()));
    }
    if !space.is_in_complement(z) {
        return Err(CoreError::Domain(
            "direction is not orthogonal to the activation span".into(),
        ));
    }
    let mut perturbed = p.clone();
    let mut clearance = S::zero();
    for nu in 0..h {
        let v = p.weight(2).at(0, nu);
        if v.is_zero() {
            if z[nu].is_zero() {
                continue;
            }
            return Err(CoreError::Domain(
                "direction touches a unit with zero outgoing weight".into(),
            ));
        }
        let shift = eps.mul(&z[nu]).div(v).expect("nonzero output weight");
        if clearance.lt(&shift.abs()) {
            clearance = shift.abs();
        }
        perturbed.bias_mut(1)[nu] = p.bias(1)[nu].add(&shift);
    }
    perturbed.bias_mut(2)[0] = p.bias(2)[0].add(&eps.mul(&z[h]));
    Ok(DegeneracyWitness {
        perturbed,
        clearance,
        direction: z.to_vec(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegeneracyVerdict {
    NonDegenerate,
    Degenerate,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub enum DegeneracyEvidence<S> {
    BiasDrift(DegeneracyWitness<S>),
    CollapsePair(ExamplePair<S>),
}

#[derive(Clone, Debug)]
pub struct DegeneracyCertificate<S> {
    pub verdict: DegeneracyVerdict,
    pub reason: String,
    /// Exact for shallow networks, an upper bound from samples otherwise.
    pub dim_v: Option<usize>,
    pub evidence: Option<DegeneracyEvidence<S>>,
}

impl<S> DegeneracyCertificate<S> {
    fn non_degenerate(reason: &str, dim_v: Option<usize>) -> Self {
        DegeneracyCertificate {
            verdict: DegeneracyVerdict::NonDegenerate,
            reason: reason.into(),
            dim_v,
            evidence: None,
        }
    }
    fn inconclusive(reason: &str, dim_v: Option<usize>) -> Self {
        DegeneracyCertificate {
            verdict: DegeneracyVerdict::Inconclusive,
            reason: reason.into(),
            dim_v,
            evidence: None,
        }
    }
    fn degenerate(reason: &str, dim_v: Option<usize>, evidence: DegeneracyEvidence<S>) -> Self {
        DegeneracyCertificate {
            verdict: DegeneracyVerdict::Degenerate,
            reason: reason.into(),
            dim_v,
            evidence: Some(evidence),
        }
    }
}

pub fn nondegeneracy_certificate<S: Scalar>(
    p: &Params<S>,
    constraint: &ConstraintSet,
) -> Result<DegeneracyCertificate<S>> {
    nondegeneracy_certificate_with(p, constraint, 400, 0, 1e-9)
}

/// Decide whether the parameters admit realization-preserving perturbations
/// that escape the permutation-scaling orbit, within the constraint set.
pub fn nondegeneracy_certificate_with<S: Scalar>(
    p: &Params<S>,
    constraint: &ConstraintSet,
    samples: usize,
    seed: u64,
    margin: f64,
) -> Result<DegeneracyCertificate<S>> {
    if !p.is_admissible() {
        return Err(CoreError::NotAdmissible(
            "certificates assume every unit is alive".into(),
        ));
    }
    if !constraint.satisfied_by(p) {
        return Err(CoreError::Domain(
            "parameters do not satisfy the constraint set".into(),
        ));
    }
    if p.arch().is_shallow() {
        shallow_certificate(p, constraint)
    } else {
        deep_certificate(p, constraint, samples, seed, margin)
    }
}

/// Build a collapse pair on a positively oriented twin pair, retrying the
/// redistribution amount until the result is certified outside the orbit
/// (a single amount can coincide with a swap-and-rescale).
fn verified_positive_collapse<S: Scalar>(
    p: &Params<S>,
    layer: usize,
    nu1: usize,
    nu2: usize,
    constraint: &ConstraintSet,
) -> Option<(ExamplePair<S>, bool)> {
    let mut fallback = None;
    for k in 2..6 {
        let eps = S::one().div(&S::from_int(1 << k)).unwrap();
        let Ok(mut pair) = positive_twin_collapse(p, layer, nu1, nu2, &eps) else {
            return None;
        };
        if !constraint.satisfied_by(&pair.other) {
            return None;
        }
        match check_ps_equivalent(&pair.base, &pair.other, DEFAULT_PS_BUDGET) {
            Ok(PsDecision::NotEquivalent) => {
                pair.claimed = crate::counterexamples::ClaimedRelation::NotPs;
                return Some((pair, true));
            }
            Ok(PsDecision::Equivalent(_)) => continue,
            _ => fallback = Some(pair),
        }
    }
    fallback.map(|pair| (pair, false))
}

fn shallow_certificate<S: Scalar>(
    p: &Params<S>,
    constraint: &ConstraintSet,
) -> Result<DegeneracyCertificate<S>> {
    let space = shallow_activation_space(p)?;
    let structure = v_space_structure(&space, p.arch())?;
    let dim_v = Some(structure.dim_v);
    if structure.dim_v == 0 {
        return Ok(DegeneracyCertificate::non_degenerate(
            "no twins: activation vectors span every pairing direction",
            dim_v,
        ));
    }
    let twins = find_twins(p);

    // Same-side twins allow redistributing outgoing weight, a perturbation
    // no bias constraint can block.
    for class in twins.nontrivial() {
        if !class.has_positive_pair() {
            continue;
        }
        let same_side = if class.positive_members().len() >= 2 {
            class.positive_members()
        } else {
            class.negative_members()
        };
        if let Some((pair, verified)) =
            verified_positive_collapse(p, 1, same_side[0], same_side[1], constraint)
        {
            let reason = if verified {
                "same-side twins: outgoing weight redistributes without changing the realization"
            } else {
                "same-side twins admit a realization-preserving collapse (orbit check inconclusive)"
            };
            return Ok(DegeneracyCertificate::degenerate(
                reason,
                dim_v,
                DegeneracyEvidence::CollapsePair(pair),
            ));
        }
    }

    // What remains are opposite-side pairs.
    let pairs: Vec<&TwinClass<S>> = twins.nontrivial().collect();
    if p.arch().output_dim() == 1 {
        return scalar_drift_certificate(p, constraint, &space, &structure, dim_v);
    }
    let mut blocked_by_constraint = false;
    for class in &pairs {
        if !class.has_mixed_signs() {
            continue;
        }
        let nu1 = class.positive_members()[0];
        let nu2 = class.negative_members()[0];
        let v1 = p.outgoing(1, nu1);
        let v2 = p.outgoing(1, nu2);
        if scale_between(&v1, &v2).is_none() {
            continue;
        }
        let depth = p.depth();
        let mut free = constraint.bias_free(depth, 1, nu1) && constraint.bias_free(depth, 1, nu2);
        for eta in 0..p.arch().output_dim() {
            if !v1[eta].is_zero() {
                free &= constraint.bias_free(depth, depth, eta);
            }
        }
        if !free {
            blocked_by_constraint = true;
            continue;
        }
        let pair = negative_pair_drift(p, nu1, nu2, &S::one())?;
        return Ok(DegeneracyCertificate::degenerate(
            "opposite-side pair with parallel outgoing weights: biases drift freely",
            dim_v,
            DegeneracyEvidence::CollapsePair(pair),
        ));
    }
    let lone_pair = pairs.len() == 1 && pairs[0].members.len() == 2 && pairs[0].has_mixed_signs();
    if lone_pair {
        let reason = if blocked_by_constraint {
            "the only drift needs bias coordinates the constraint pins"
        } else {
            "lone opposite-side pair has independent outgoing weights; no drift exists"
        };
        return Ok(DegeneracyCertificate::non_degenerate(reason, dim_v));
    }
    Ok(DegeneracyCertificate::inconclusive(
        "opposite-side pairs without a usable drift; no certificate either way",
        dim_v,
    ))
}

/// Scalar-output shallow case: any complement direction is realizable as a
/// bias perturbation, provided the constraint leaves those biases free.
fn scalar_drift_certificate<S: Scalar>(
    p: &Params<S>,
    constraint: &ConstraintSet,
    space: &ActivationSpace,
    structure: &VSpaceStructure,
    dim_v: Option<usize>,
) -> Result<DegeneracyCertificate<S>> {
    let h = p.arch().width(1);
    let basis = &structure.abar_perp;
    if basis.is_empty() {
        return Ok(DegeneracyCertificate::inconclusive(
            "degeneracy lives in the input block only; no bias witness applies",
            dim_v,
        ));
    }
    let direction: Option<Vec<Rat>> = if !constraint.forces_zero_output_bias(p.arch()) {
        Some(basis[0].clone())
    } else if let Some(z) = basis.iter().find(|z| z[h].is_zero()) {
        Some(z.clone())
    } else if basis.len() >= 2 {
        // Cancel the constant coordinates of the first two directions.
        let (z1, z2) = (&basis[0], &basis[1]);
        Some(
            z1.iter()
                .zip(z2)
                .map(|(a, b)| a.mul(&z2[h]).sub(&b.mul(&z1[h])))
                .collect(),
        )
    } else {
        None
    };
    let Some(direction) = direction else {
        return Ok(DegeneracyCertificate::non_degenerate(
            "the only invisible direction needs the pinned output bias",
            dim_v,
        ));
    };
    let hidden_free = (0..h)
        .filter(|&nu| !direction[nu].is_zero())
        .all(|nu| constraint.bias_free(p.depth(), 1, nu));
    if !hidden_free {
        return Ok(DegeneracyCertificate::inconclusive(
            "constraint pins hidden biases; bias witnesses are unavailable",
            dim_v,
        ));
    }
    let z: Vec<S> = direction
        .iter()
        .map(crate::scalar::rat_to_scalar)
        .collect::<Option<Vec<S>>>()
        .ok_or_else(|| CoreError::Domain("complement direction overflows".into()))?;
    let eps = S::one().div(&S::from_int(8)).unwrap();
    let witness = scalar_bias_degeneracy_witness(p, space, &z, &eps)?;
    Ok(DegeneracyCertificate::degenerate(
        "bias perturbation along an invisible direction preserves the realization",
        dim_v,
        DegeneracyEvidence::BiasDrift(witness),
    ))
}

fn deep_certificate<S: Scalar>(
    p: &Params<S>,
    constraint: &ConstraintSet,
    samples: usize,
    seed: u64,
    margin: f64,
) -> Result<DegeneracyCertificate<S>> {
    let space = sample_activation_space(p, samples, seed, margin)?;
    let structure = v_space_structure(&space, p.arch())?;
    if structure.dim_v == 0 {
        return Ok(DegeneracyCertificate::non_degenerate(
            "observed activation vectors already span everything; sampling only undercounts",
            Some(0),
        ));
    }
    let twins = find_twins(p);
    for class in twins.nontrivial() {
        if !class.has_positive_pair() {
            continue;
        }
        let same_side = if class.positive_members().len() >= 2 {
            class.positive_members()
        } else {
            class.negative_members()
        };
        if let Some((pair, verified)) =
            verified_positive_collapse(p, class.layer, same_side[0], same_side[1], constraint)
        {
            let reason = if verified {
                "same-side twins: outgoing weight redistributes without changing the realization"
            } else {
                "same-side twins admit a realization-preserving collapse (orbit check inconclusive)"
            };
            return Ok(DegeneracyCertificate::degenerate(
                reason,
                Some(structure.dim_v),
                DegeneracyEvidence::CollapsePair(pair),
            ));
        }
    }
    Ok(DegeneracyCertificate::inconclusive(
        "sampled span is rank-deficient, which only lower-bounds the true span",
        Some(structure.dim_v),
    ))
}
