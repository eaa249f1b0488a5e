//! Finite identification sets: a small collection of inputs on which the
//! realization already pins down the whole embedding for parameters near the
//! given ones. Built from activation-space witnesses, one probe stencil per
//! independent activation pattern.

use crate::actspace::ActivationSpace;
use crate::counterexamples::positive_twin_collapse;
use crate::diagnostics::find_twins;
use crate::embedding::embed;
use crate::equivalence::{check_scaling_equivalent, rescale, Rescaling, ScalingDecision};
use crate::error::{CoreError, Result};
use crate::network::Params;
use crate::scalar::Scalar;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest step that provably keeps the whole stencil inside the linear
/// region around `x`: half the smallest boundary distance, each distance
/// measured against the local gradient of its pre-activation.
fn pattern_radius<S: Scalar>(p: &Params<S>, x: &[f64]) -> Result<f64> {
    let pf = p.to_f64();
    let trace = pf.forward(x);
    let d = pf.arch().input_dim();
    // grads[nu] = gradient of the current layer's pre-activations wrt x.
    let mut grads: Vec<Vec<f64>> = Vec::new();
    let mut best = f64::INFINITY;
    for layer in 1..pf.depth() {
        let width = pf.arch().width(layer);
        let prev_width = pf.arch().width(layer - 1);
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(width);
        for nu in 0..width {
            let mut g = vec![0.0; d];
            for j in 0..prev_width {
                let w = *pf.weight(layer).at(nu, j);
                if layer == 1 {
                    g[j] = w;
                } else if trace.statuses[layer - 2][j] {
                    for (gi, pi) in g.iter_mut().zip(&grads[j]) {
                        *gi += w * pi;
                    }
                }
            }
            let z = trace.pre[layer - 1][nu];
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            best = best.min(z.abs() / (gnorm + 1.0));
            next.push(g);
        }
        grads = next;
    }
    if !best.is_finite() || best <= 0.0 {
        return Err(CoreError::Construction(
            "anchor sits on an activation boundary".into(),
        ));
    }
    Ok(0.5 * best)
}

/// One stencil of input_dim + 1 points per activation-space witness, every
/// point verified (exactly) to share the witness's activation pattern. The
/// result has at most (input_dim + 1) * actdim points.
pub fn construct_identification_set<S: Scalar>(
    p: &Params<S>,
    space: &ActivationSpace,
) -> Result<Vec<Vec<S>>> {
    if space.witnesses.is_empty() {
        return Err(CoreError::Construction(
            "the activation space carries no sample witnesses".into(),
        ));
    }
    let d = p.arch().input_dim();
    let mut out: Vec<Vec<S>> = Vec::new();
    for anchor in &space.witnesses {
        let xs: Vec<S> = anchor.iter().map(|&v| S::from_f64(v)).collect();
        let pattern = p.activation_pattern(&xs);
        let mut radius = pattern_radius(p, anchor)?;
        let mut placed = false;
        for _ in 0..30 {
            let step = S::from_f64(radius / 2.0);
            let mut group = vec![xs.clone()];
            let mut ok = true;
            for i in 0..d {
                let mut y = xs.clone();
                y[i] = y[i].add(&step);
                if p.activation_pattern(&y) != pattern {
                    ok = false;
                    break;
                }
                group.push(y);
            }
            if ok {
                out.extend(group);
                placed = true;
                break;
            }
            radius /= 2.0;
        }
        if !placed {
            return Err(CoreError::Construction(
                "could not keep a probe stencil inside one linear region".into(),
            ));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct IdentificationReport<S> {
    /// Rescalings tried; each must agree on the set and be detected.
    pub scaling_trials: usize,
    pub scaling_failures: usize,
    /// Embedding-changing perturbations tried.
    pub perturbation_trials: usize,
    /// How many of them the set rejected (realization mismatch somewhere).
    pub perturbations_rejected: usize,
    /// Perturbations the set could not tell apart from the original.
    pub falsifiers: Vec<Params<S>>,
    /// A twin collapse agreeing on the whole set, when the network has one.
    pub collapse_falsifier: Option<Params<S>>,
}

fn agree_on<S: Scalar>(a: &Params<S>, b: &Params<S>, f_set: &[Vec<S>]) -> bool {
    f_set.iter().all(|x| {
        let ra = a.realization(x);
        let rb = b.realization(x);
        if S::EXACT {
            ra == rb
        } else {
            ra.iter().zip(&rb).all(|(u, v)| {
                let scale = u.to_f64().abs().max(v.to_f64().abs()).max(1.0);
                (u.to_f64() - v.to_f64()).abs() <= 1e-9 * scale
            })
        }
    })
}

/// Stress the set in both directions: rescalings must stay indistinguishable
/// (and be certified equivalent), embedding-changing perturbations must be
/// caught. Surviving perturbations are returned as falsifiers.
pub fn validate_identification_set<S: Scalar>(
    p: &Params<S>,
    f_set: &[Vec<S>],
    trials: usize,
    eps: f64,
    seed: u64,
) -> Result<IdentificationReport<S>> {
    if f_set.is_empty() {
        return Err(CoreError::Domain("empty identification set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = embed(p)?;

    let mut scaling_failures = 0;
    for _ in 0..trials {
        let factors: Vec<Vec<S>> = (1..p.depth())
            .map(|l| {
                (0..p.arch().width(l))
                    .map(|_| S::from_f64(rng.random_range(0.5..2.0)))
                    .collect()
            })
            .collect();
        let scaled = rescale(p, &Rescaling::new(factors)?);
        let detected = matches!(
            check_scaling_equivalent(p, &scaled)?,
            ScalingDecision::Equivalent(_)
        );
        if !agree_on(p, &scaled, f_set) || !detected {
            scaling_failures += 1;
        }
    }

    let mut perturbations_rejected = 0;
    let mut perturbation_trials = 0;
    let mut falsifiers = Vec::new();
    for _ in 0..trials {
        let mut q = p.clone();
        for l in 1..=p.depth() {
            for i in 0..p.arch().width(l) {
                for j in 0..p.arch().width(l - 1) {
                    let bump = S::from_f64(rng.random_range(-eps..eps));
                    *q.weight_mut(l).at_mut(i, j) = p.weight(l).at(i, j).add(&bump);
                }
                let bump = S::from_f64(rng.random_range(-eps..eps));
                q.bias_mut(l)[i] = p.bias(l)[i].add(&bump);
            }
        }
        if embed(&q)?.same_phi(&phi) {
            continue;
        }
        perturbation_trials += 1;
        if agree_on(p, &q, f_set) {
            falsifiers.push(q);
        } else {
            perturbations_rejected += 1;
        }
    }

    let twins = find_twins(p);
    let mut collapse_falsifier = None;
    'outer: for class in twins.nontrivial() {
        if !class.has_positive_pair() {
            continue;
        }
        let side = if class.positive_members().len() >= 2 {
            class.positive_members()
        } else {
            class.negative_members()
        };
        for k in 2..6 {
            let eps_k = S::one().div(&S::from_int(1 << k)).unwrap();
            let Ok(pair) = positive_twin_collapse(p, class.layer, side[0], side[1], &eps_k) else {
                continue 'outer;
            };
            let not_s = matches!(
                check_scaling_equivalent(p, &pair.other)?,
                ScalingDecision::NotEquivalent(_)
            );
            if not_s && agree_on(p, &pair.other, f_set) {
                collapse_falsifier = Some(pair.other);
                break 'outer;
            }
        }
    }

    Ok(IdentificationReport {
        scaling_trials: trials,
        scaling_failures,
        perturbation_trials,
        perturbations_rejected,
        falsifiers,
        collapse_falsifier,
    })
}
