//! Constructive example families: parameter pairs with equal realizations
//! (everywhere or on a stated region) that are provably not equivalent.
//! They double as negative controls for the equivalence deciders and as
//! witnesses for the degeneracy certificates.

use crate::diagnostics::{find_twins, scale_between};
use crate::error::{CoreError, Result};
use crate::linalg::Mat;
use crate::network::{Architecture, Params};
use crate::scalar::{rat, Rat, Scalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// Region of input space on which an example pair is claimed equal,
/// expressed through pre-activations of the base parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum EqualityDomain<S> {
    AllInputs,
    /// z_{neuron}(base, x) >= -m.
    HalfLine { layer: usize, neuron: usize, m: S },
    /// |z_{neuron}(base, x)| >= rho.
    Clearance { layer: usize, neuron: usize, rho: S },
}

impl<S: Scalar> EqualityDomain<S> {
    pub fn contains(&self, base: &Params<S>, x: &[S]) -> bool {
        match self {
            EqualityDomain::AllInputs => true,
            EqualityDomain::HalfLine { layer, neuron, m } => {
                let t = base.forward(x);
                t.pre[layer - 1][*neuron].add(m).sign() >= 0
            }
            EqualityDomain::Clearance { layer, neuron, rho } => {
                let t = base.forward(x);
                t.pre[layer - 1][*neuron].abs().sub(rho).sign() >= 0
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClaimedRelation {
    /// Not scaling-equivalent (embeddings differ).
    NotScaling,
    /// Not even permutation-scaling-equivalent.
    NotPs,
}

#[derive(Clone, Debug)]
pub struct ExamplePair<S> {
    pub name: String,
    pub base: Params<S>,
    pub other: Params<S>,
    pub domain: EqualityDomain<S>,
    pub claimed: ClaimedRelation,
}

fn shallow_params(w1: Vec<Vec<Rat>>, b1: Vec<Rat>, w2: Vec<Vec<Rat>>, b2: Vec<Rat>) -> Params<Rat> {
    let widths = vec![w1[0].len(), w1.len(), w2.len()];
    Params::new(
        Architecture::new(widths).unwrap(),
        vec![Mat::from_rows(w1), Mat::from_rows(w2)],
        vec![b1, b2],
    )
    .unwrap()
}

/// |x| = ReLU(x) + ReLU(-x).
pub fn abs_network() -> Params<Rat> {
    shallow_params(
        vec![vec![rat(1, 1)], vec![rat(-1, 1)]],
        vec![rat(0, 1), rat(0, 1)],
        vec![vec![rat(1, 1), rat(1, 1)]],
        vec![rat(0, 1)],
    )
}

/// ReLU(x-t) + ReLU(-(x+t)) + t: equals |x| for |x| >= t and t on |x| <= t.
pub fn abs_shifted(t: Rat) -> Params<Rat> {
    shallow_params(
        vec![vec![rat(1, 1)], vec![rat(-1, 1)]],
        vec![t.neg(), t.neg()],
        vec![vec![rat(1, 1), rat(1, 1)]],
        vec![t],
    )
}

/// ReLU(x-t) - ReLU(-(x-t)) + t: the identity function for every t.
pub fn identity_family(t: Rat) -> Params<Rat> {
    shallow_params(
        vec![vec![rat(1, 1)], vec![rat(-1, 1)]],
        vec![t.neg(), t.clone()],
        vec![vec![rat(1, 1), rat(-1, 1)]],
        vec![t],
    )
}

/// ReLU(-x) + ReLU(x-1): the hockey-stick pair base.
pub fn nonlocal_base() -> Params<Rat> {
    shallow_params(
        vec![vec![rat(-1, 1)], vec![rat(1, 1)]],
        vec![rat(0, 1), rat(-1, 1)],
        vec![vec![rat(1, 1), rat(1, 1)]],
        vec![rat(0, 1)],
    )
}

/// The two realizations of ReLU(-x) + ReLU(x-1): globally equal, with
/// different output biases, hence in different PS orbits.
pub fn nonlocal_pair() -> ExamplePair<Rat> {
    let base = nonlocal_base();
    let mut pair = reducibility_collapse(&base, 1, &[0, 1]).expect("full-layer collapse");
    pair.name = "nonlocal".into();
    pair.claimed = ClaimedRelation::NotPs;
    pair
}

fn twin_ratio<S: Scalar>(p: &Params<S>, layer: usize, nu1: usize, nu2: usize) -> Result<S> {
    if layer == 0 || layer >= p.depth() {
        return Err(CoreError::Domain("twins live in hidden layers".into()));
    }
    let e1 = p.incoming_extended(layer, nu1);
    let e2 = p.incoming_extended(layer, nu2);
    scale_between(&e1, &e2).ok_or_else(|| {
        CoreError::Domain(format!(
            "neurons {nu1} and {nu2} of layer {layer} are not twins"
        ))
    })
}

/// Redistribute outgoing weight across a positive twin pair: the
/// realization is unchanged everywhere, the embedding changes for eps != 0.
pub fn positive_twin_collapse<S: Scalar>(
    p: &Params<S>,
    layer: usize,
    nu1: usize,
    nu2: usize,
    eps: &S,
) -> Result<ExamplePair<S>> {
    let lambda = twin_ratio(p, layer, nu1, nu2)?;
    if lambda.sign() <= 0 {
        return Err(CoreError::Domain("pair is not positively oriented".into()));
    }
    let mut other = p.clone();
    for i in 0..p.arch().width(layer + 1) {
        let v1 = p.weight(layer + 1).at(i, nu1).add(&lambda.mul(eps));
        let v2 = p.weight(layer + 1).at(i, nu2).sub(eps);
        *other.weight_mut(layer + 1).at_mut(i, nu1) = v1;
        *other.weight_mut(layer + 1).at_mut(i, nu2) = v2;
    }
    Ok(ExamplePair {
        name: "positive-twin-collapse".into(),
        base: p.clone(),
        other,
        domain: EqualityDomain::AllInputs,
        claimed: ClaimedRelation::NotScaling,
    })
}

/// Fold a negative twin pair into two kinks on the same side: realizations
/// agree wherever z_{nu1} >= -m.
pub fn negative_twin_collapse<S: Scalar>(
    p: &Params<S>,
    layer: usize,
    nu1: usize,
    nu2: usize,
    m: &S,
) -> Result<ExamplePair<S>> {
    let lambda = twin_ratio(p, layer, nu1, nu2)?;
    if lambda.sign() >= 0 {
        return Err(CoreError::Domain("pair is not negatively oriented".into()));
    }
    if m.sign() <= 0 {
        return Err(CoreError::Domain("the fold offset m must be positive".into()));
    }
    let lam_abs = lambda.abs();
    let mut other = p.clone();
    // nu2 becomes a shifted copy of nu1.
    for j in 0..p.arch().width(layer - 1) {
        let w = p.weight(layer).at(nu1, j).clone();
        *other.weight_mut(layer).at_mut(nu2, j) = w;
    }
    other.bias_mut(layer)[nu2] = p.bias(layer)[nu1].add(m);
    for i in 0..p.arch().width(layer + 1) {
        let w2 = p.weight(layer + 1).at(i, nu2).clone();
        let v1 = p.weight(layer + 1).at(i, nu1).add(&lam_abs.mul(&w2));
        *other.weight_mut(layer + 1).at_mut(i, nu1) = v1;
        *other.weight_mut(layer + 1).at_mut(i, nu2) = lam_abs.mul(&w2).neg();
        let b = other.bias(layer + 1)[i].add(&lam_abs.mul(&w2).mul(m));
        other.bias_mut(layer + 1)[i] = b;
    }
    Ok(ExamplePair {
        name: "negative-twin-collapse".into(),
        base: p.clone(),
        other,
        domain: EqualityDomain::HalfLine {
            layer,
            neuron: nu1,
            m: m.clone(),
        },
        claimed: ClaimedRelation::NotPs,
    })
}

/// Sign-flip a hidden subset whose summed outer product vanishes: the
/// linear bypass cancels and only a bias correction remains downstream.
pub fn reducibility_collapse<S: Scalar>(
    p: &Params<S>,
    layer: usize,
    subset: &[usize],
) -> Result<ExamplePair<S>> {
    if layer == 0 || layer >= p.depth() {
        return Err(CoreError::Domain("subset must sit in a hidden layer".into()));
    }
    if subset.is_empty() {
        return Err(CoreError::Domain("subset must be nonempty".into()));
    }
    let rows_next = p.arch().width(layer + 1);
    let cols_prev = p.arch().width(layer - 1);
    // Precondition: W_{l+1} I_T W_l == 0 exactly.
    for i in 0..rows_next {
        for j in 0..cols_prev {
            let mut acc = S::zero();
            for &nu in subset {
                acc = acc.add(
                    &p.weight(layer + 1)
                        .at(i, nu)
                        .mul(p.weight(layer).at(nu, j)),
                );
            }
            if !acc.is_zero() {
                return Err(CoreError::Domain(
                    "subset does not cancel: W_next I_T W has a nonzero entry".into(),
                ));
            }
        }
    }
    let mut other = p.clone();
    for &nu in subset {
        for j in 0..cols_prev {
            let w = p.weight(layer).at(nu, j).neg();
            *other.weight_mut(layer).at_mut(nu, j) = w;
        }
        other.bias_mut(layer)[nu] = p.bias(layer)[nu].neg();
    }
    for i in 0..rows_next {
        let mut shift = S::zero();
        for &nu in subset {
            shift = shift.add(&p.weight(layer + 1).at(i, nu).mul(&p.bias(layer)[nu]));
        }
        let b = p.bias(layer + 1)[i].add(&shift);
        other.bias_mut(layer + 1)[i] = b;
    }
    let claimed = if find_twins(p).has_twins() {
        ClaimedRelation::NotScaling
    } else {
        ClaimedRelation::NotPs
    };
    Ok(ExamplePair {
        name: "reducibility-collapse".into(),
        base: p.clone(),
        other,
        domain: EqualityDomain::AllInputs,
        claimed,
    })
}

/// Bias-only drift along a lone negative twin pair with dependent outgoing
/// vectors: the pair agrees outside a slab around the shared hyperplane.
pub fn case2a_bias_witness<S: Scalar>(p: &Params<S>, eps: &S) -> Result<ExamplePair<S>> {
    if !p.arch().is_shallow() {
        return Err(CoreError::UnsupportedDepth {
            required: "exactly one hidden layer".into(),
            actual: p.depth(),
        });
    }
    let twins = find_twins(p);
    let nontrivial: Vec<_> = twins.nontrivial().collect();
    let class = match nontrivial.as_slice() {
        [c] if c.members.len() == 2 && c.has_mixed_signs() => *c,
        _ => {
            return Err(CoreError::Domain(
                "needs exactly one negative twin pair and no other twins".into(),
            ))
        }
    };
    negative_pair_drift(p, class.members[0], class.members[1], eps)
}

/// The drift itself, applicable to any negative twin pair of a shallow
/// network whose outgoing vectors are parallel.
pub(crate) fn negative_pair_drift<S: Scalar>(
    p: &Params<S>,
    nu1: usize,
    nu2: usize,
    eps: &S,
) -> Result<ExamplePair<S>> {
    if eps.sign() <= 0 {
        return Err(CoreError::Domain("eps must be positive".into()));
    }
    let lambda = twin_ratio(p, 1, nu1, nu2)?;
    if lambda.sign() >= 0 {
        return Err(CoreError::Domain("pair is not negatively oriented".into()));
    }
    let v1 = p.outgoing(1, nu1);
    let v2 = p.outgoing(1, nu2);
    let alpha = scale_between(&v1, &v2).ok_or_else(|| {
        CoreError::Domain("outgoing vectors are independent; no bias drift exists".into())
    })?;
    // gamma strictly below min(1, |alpha|, 1/||v1||_inf).
    let mut bound = S::one();
    if alpha.abs().lt(&bound) {
        bound = alpha.abs();
    }
    let inv_v1 = S::one().div(&crate::linalg::sup_norm(&v1)).expect("admissible");
    if inv_v1.lt(&bound) {
        bound = inv_v1;
    }
    let gamma = bound.div(&S::from_int(2)).unwrap();
    let d1 = gamma.mul(eps);
    let d2 = d1.div(&alpha).expect("nonzero ratio");
    let rho_candidate = d1.div(&alpha.mul(&lambda)).expect("nonzero").abs();
    let rho = if d1.abs().lt(&rho_candidate) {
        rho_candidate
    } else {
        d1.abs()
    };
    let mut other = p.clone();
    other.bias_mut(1)[nu1] = p.bias(1)[nu1].add(&d1);
    other.bias_mut(1)[nu2] = p.bias(1)[nu2].add(&d2);
    for eta in 0..p.arch().output_dim() {
        let b = p.bias(2)[eta].sub(&p.weight(2).at(eta, nu1).mul(&d1));
        other.bias_mut(2)[eta] = b;
    }
    Ok(ExamplePair {
        name: "case2a-bias-drift".into(),
        base: p.clone(),
        other,
        domain: EqualityDomain::Clearance {
            layer: 1,
            neuron: nu1,
            rho,
        },
        claimed: ClaimedRelation::NotScaling,
    })
}

/// The catalogue of ready-made pairs exercised by the test suites and the
/// `examples` command.
pub fn standard_pairs() -> Vec<ExamplePair<Rat>> {
    let mut pairs = Vec::new();

    pairs.push(ExamplePair {
        name: "identity-family".into(),
        base: identity_family(rat(0, 1)),
        other: identity_family(rat(1, 1)),
        domain: EqualityDomain::AllInputs,
        claimed: ClaimedRelation::NotPs,
    });

    pairs.push(nonlocal_pair());

    // Planted positive pair (ratio 2); eps avoids the value 1/2 where the
    // collapse coincides with a swap-and-rescale of the pair.
    let planted = shallow_params(
        vec![vec![rat(1, 1)], vec![rat(2, 1)]],
        vec![rat(1, 1), rat(2, 1)],
        vec![vec![rat(1, 1), rat(1, 1)]],
        vec![rat(0, 1)],
    );
    let mut pos = positive_twin_collapse(&planted, 1, 0, 1, &rat(1, 4)).unwrap();
    pos.claimed = ClaimedRelation::NotPs;
    pairs.push(pos);

    // The same collapse one level down in a depth-3 network.
    let deep = Params::new(
        Architecture::new(vec![1, 2, 2, 1]).unwrap(),
        vec![
            Mat::from_rows(vec![vec![rat(1, 1)], vec![rat(2, 1)]]),
            Mat::from_rows(vec![
                vec![rat(1, 1), rat(1, 1)],
                vec![rat(2, 1), rat(2, 1)],
            ]),
            Mat::from_rows(vec![vec![rat(1, 1), rat(1, 1)]]),
        ],
        vec![
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(1, 2), rat(1, 1)],
            vec![rat(0, 1)],
        ],
    )
    .unwrap();
    let mut pos_deep = positive_twin_collapse(&deep, 2, 0, 1, &rat(1, 4)).unwrap();
    pos_deep.name = "positive-twin-collapse-deep".into();
    pos_deep.claimed = ClaimedRelation::NotPs;
    pairs.push(pos_deep);

    pairs.push(negative_twin_collapse(&abs_network(), 1, 0, 1, &rat(1, 1)).unwrap());

    let mut red_abs = reducibility_collapse(&abs_network(), 1, &[0, 1]).unwrap();
    red_abs.name = "reducibility-collapse-abs".into();
    pairs.push(red_abs);

    pairs.push(case2a_bias_witness(&identity_family(rat(0, 1)), &rat(1, 2)).unwrap());

    pairs.push(ExamplePair {
        name: "flat-bottom".into(),
        base: abs_network(),
        other: abs_shifted(rat(1, 2)),
        domain: EqualityDomain::Clearance {
            layer: 1,
            neuron: 0,
            rho: rat(1, 2),
        },
        claimed: ClaimedRelation::NotPs,
    });

    pairs
}

#[derive(Clone, Debug)]
pub struct PairCheck<S> {
    pub points_tested: usize,
    pub mismatch_at: Option<Vec<S>>,
}

/// Sample the pair's equality domain and compare realizations exactly.
pub fn check_equality_on_domain<S: Scalar>(
    pair: &ExamplePair<S>,
    n_points: usize,
    box_radius: f64,
    seed: u64,
) -> Result<PairCheck<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = pair.base.arch().input_dim();
    let mut tested = 0;
    let mut attempts = 0usize;
    while tested < n_points {
        attempts += 1;
        if attempts > 100 * n_points.max(1) {
            return Err(CoreError::Sampling(format!(
                "only {tested} of {n_points} points landed in the equality domain"
            )));
        }
        let x: Vec<S> = (0..dim)
            .map(|_| S::from_f64(rng.random_range(-box_radius..box_radius)))
            .collect();
        if !pair.domain.contains(&pair.base, &x) {
            continue;
        }
        tested += 1;
        if pair.base.realization(&x) != pair.other.realization(&x) {
            return Ok(PairCheck {
                points_tested: tested,
                mismatch_at: Some(x),
            });
        }
    }
    Ok(PairCheck {
        points_tested: tested,
        mismatch_at: None,
    })
}

/// Both sides of the folding identity behind the negative-twin collapse:
/// for t >= -m,  a*ReLU(t) + b*ReLU(-t) == (a+b)*ReLU(t) - b*ReLU(t+m) + b*m.
/// The third value is the same right-hand side with the trailing term
/// replaced by a bare m, which fails whenever b != 1.
pub fn twin_fact_sides(a: &Rat, b: &Rat, m: &Rat, t: &Rat) -> (Rat, Rat, Rat) {
    let lhs = a.mul(&t.relu()).add(&b.mul(&t.neg().relu()));
    let folded = a.add(b).mul(&t.relu()).sub(&b.mul(&t.add(m).relu()));
    let rhs = folded.add(&b.mul(m));
    let rhs_plain = folded.add(m);
    (lhs, rhs, rhs_plain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed;
    use crate::equivalence::{check_ps_equivalent, check_scaling_equivalent, PsDecision,
                             ScalingDecision, DEFAULT_PS_BUDGET};

    #[test]
    fn identity_family_realizes_identity() {
        for t in [rat(0, 1), rat(1, 1), rat(-3, 2)] {
            let p = identity_family(t);
            for x in [rat(5, 1), rat(-7, 2), rat(0, 1), rat(1, 3)] {
                assert_eq!(p.realization(&[x.clone()]), vec![x]);
            }
        }
    }

    #[test]
    fn identity_family_embedding_is_pinned() {
        let t = rat(1, 2);
        let p = identity_family(t.clone());
        let e = embed(&p).unwrap();
        assert_eq!(
            e.phi(),
            &[rat(1, 1), rat(1, 1), t.neg(), t.neg(), t.clone()]
        );
    }

    #[test]
    fn identity_pair_is_not_ps() {
        let a = identity_family(rat(0, 1));
        let b = identity_family(rat(1, 1));
        assert!(matches!(
            check_ps_equivalent(&a, &b, DEFAULT_PS_BUDGET).unwrap(),
            PsDecision::NotEquivalent
        ));
    }

    #[test]
    fn abs_shifted_values() {
        let p = abs_shifted(rat(1, 1));
        assert_eq!(p.realization(&[rat(1, 2)]), vec![rat(1, 1)]);
        assert_eq!(p.realization(&[rat(2, 1)]), vec![rat(2, 1)]);
        assert_eq!(p.realization(&[rat(-3, 1)]), vec![rat(3, 1)]);
        assert_eq!(abs_shifted(rat(0, 1)), abs_network());
    }

    #[test]
    fn nonlocal_pair_matches_published_form() {
        let pair = nonlocal_pair();
        let o = &pair.other;
        assert_eq!(*o.weight(1).at(0, 0), rat(1, 1));
        assert_eq!(*o.weight(1).at(1, 0), rat(-1, 1));
        assert_eq!(o.bias(1), &[rat(0, 1), rat(1, 1)]);
        assert_eq!(*o.weight(2).at(0, 0), rat(1, 1));
        assert_eq!(*o.weight(2).at(0, 1), rat(1, 1));
        assert_eq!(o.bias(2), &[rat(-1, 1)]);
        for x in [rat(-2, 1), rat(1, 2), rat(0, 1), rat(2, 1), rat(17, 8)] {
            assert_eq!(pair.base.realization(&[x.clone()]), o.realization(&[x]));
        }
        assert!(matches!(
            check_ps_equivalent(&pair.base, &pair.other, DEFAULT_PS_BUDGET).unwrap(),
            PsDecision::NotEquivalent
        ));
    }

    #[test]
    fn reducibility_collapse_requires_cancellation() {
        assert!(reducibility_collapse(&nonlocal_base(), 1, &[0]).is_err());
        assert!(reducibility_collapse(&nonlocal_base(), 1, &[]).is_err());
    }

    #[test]
    fn positive_collapse_preserves_realization_everywhere() {
        let pairs = standard_pairs();
        let pos = pairs.iter().find(|p| p.name == "positive-twin-collapse").unwrap();
        let check = check_equality_on_domain(pos, 500, 6.0, 7).unwrap();
        assert!(check.mismatch_at.is_none());
        match check_scaling_equivalent(&pos.base, &pos.other).unwrap() {
            ScalingDecision::NotEquivalent(_) => {}
            other => panic!("expected not-S, got {other:?}"),
        }
        assert!(matches!(
            check_ps_equivalent(&pos.base, &pos.other, DEFAULT_PS_BUDGET).unwrap(),
            PsDecision::NotEquivalent
        ));
        let deep = pairs
            .iter()
            .find(|p| p.name == "positive-twin-collapse-deep")
            .unwrap();
        let check = check_equality_on_domain(deep, 500, 6.0, 8).unwrap();
        assert!(check.mismatch_at.is_none());
    }

    #[test]
    fn positive_collapse_with_zero_eps_is_identity() {
        let planted = shallow_params(
            vec![vec![rat(1, 1)], vec![rat(2, 1)]],
            vec![rat(1, 1), rat(2, 1)],
            vec![vec![rat(1, 1), rat(1, 1)]],
            vec![rat(0, 1)],
        );
        let pair = positive_twin_collapse(&planted, 1, 0, 1, &rat(0, 1)).unwrap();
        assert_eq!(pair.base, pair.other);
    }

    #[test]
    fn negative_collapse_on_abs_matches_hand_fold() {
        let pair = negative_twin_collapse(&abs_network(), 1, 0, 1, &rat(1, 1)).unwrap();
        let o = &pair.other;
        // 2 ReLU(x) - ReLU(x+1) + 1
        assert_eq!(*o.weight(1).at(0, 0), rat(1, 1));
        assert_eq!(*o.weight(1).at(1, 0), rat(1, 1));
        assert_eq!(o.bias(1), &[rat(0, 1), rat(1, 1)]);
        assert_eq!(*o.weight(2).at(0, 0), rat(2, 1));
        assert_eq!(*o.weight(2).at(0, 1), rat(-1, 1));
        assert_eq!(o.bias(2), &[rat(1, 1)]);
        for x in [rat(-1, 2), rat(1, 2), rat(2, 1), rat(-1, 1)] {
            assert!(pair.domain.contains(&pair.base, &[x.clone()]));
            assert_eq!(pair.base.realization(&[x.clone()]), o.realization(&[x]));
        }
        // Outside the half-line the fold is visibly different.
        assert!(!pair.domain.contains(&pair.base, &[rat(-2, 1)]));
        assert_eq!(pair.base.realization(&[rat(-2, 1)]), vec![rat(2, 1)]);
        assert_eq!(o.realization(&[rat(-2, 1)]), vec![rat(1, 1)]);
    }

    #[test]
    fn case2a_witness_reproduces_shifted_abs_family() {
        // On the abs network the drift must give ReLU(x+e) + ReLU(-x+e) - e.
        let pair = case2a_bias_witness(&abs_network(), &rat(1, 2)).unwrap();
        let o = &pair.other;
        assert_eq!(o.bias(1), &[rat(1, 4), rat(1, 4)]);
        assert_eq!(o.bias(2), &[rat(-1, 4)]);
        match &pair.domain {
            EqualityDomain::Clearance { rho, .. } => assert_eq!(*rho, rat(1, 4)),
            other => panic!("expected clearance domain, got {other:?}"),
        }
        let check = check_equality_on_domain(&pair, 400, 4.0, 11).unwrap();
        assert!(check.mismatch_at.is_none());
        // Inside the slab the functions split apart.
        assert_ne!(
            pair.base.realization(&[rat(0, 1)]),
            o.realization(&[rat(0, 1)])
        );
    }

    #[test]
    fn case2a_needs_dependent_outgoing() {
        // Two outputs with independent columns over the pair.
        let p = Params::new(
            Architecture::new(vec![1, 2, 2]).unwrap(),
            vec![
                Mat::from_rows(vec![vec![rat(1, 1)], vec![rat(-1, 1)]]),
                Mat::from_rows(vec![
                    vec![rat(1, 1), rat(0, 1)],
                    vec![rat(0, 1), rat(1, 1)],
                ]),
            ],
            vec![vec![rat(0, 1), rat(0, 1)], vec![rat(0, 1), rat(0, 1)]],
        )
        .unwrap();
        assert!(case2a_bias_witness(&p, &rat(1, 2)).is_err());
    }

    #[test]
    fn every_standard_pair_agrees_on_its_domain() {
        for pair in standard_pairs() {
            let check = check_equality_on_domain(&pair, 300, 5.0, 3).unwrap();
            assert!(
                check.mismatch_at.is_none(),
                "{} disagreed at {:?}",
                pair.name,
                check.mismatch_at
            );
        }
    }

    #[test]
    fn every_standard_pair_claim_is_confirmed() {
        for pair in standard_pairs() {
            match pair.claimed {
                ClaimedRelation::NotScaling => {
                    match check_scaling_equivalent(&pair.base, &pair.other).unwrap() {
                        ScalingDecision::NotEquivalent(_) => {}
                        other => panic!("{}: expected not-S, got {other:?}", pair.name),
                    }
                }
                ClaimedRelation::NotPs => {
                    match check_ps_equivalent(&pair.base, &pair.other, DEFAULT_PS_BUDGET).unwrap() {
                        PsDecision::NotEquivalent => {}
                        other => panic!("{}: expected not-PS, got {other:?}", pair.name),
                    }
                }
            }
        }
    }

    #[test]
    fn twin_fact_grid() {
        let a = rat(3, 2);
        let b = rat(-5, 7);
        let m = rat(2, 1);
        let mut plain_fails = false;
        for i in 0..=200 {
            // t sweeps [-m, 10m].
            let t = rat(-2, 1).add(&rat(11 * i, 100));
            let (lhs, rhs, rhs_plain) = twin_fact_sides(&a, &b, &m, &t);
            assert_eq!(lhs, rhs, "corrected identity must hold at t = {t:?}");
            if lhs != rhs_plain {
                plain_fails = true;
            }
        }
        assert!(plain_fails, "the uncorrected trailing term must fail for b != 1");
    }
}
