//! Structural diagnostics: twin neurons (collinear extended incoming
//! vectors), layer-collapse reducibility witnesses, and the shallow
//! classification that decides identifiability from bounded sets.

use crate::error::{CoreError, Result};
use crate::linalg::Mat;
use crate::network::Params;
use crate::scalar::Scalar;
use serde::Serialize;

/// A maximal set of same-layer hidden neurons whose extended incoming
/// vectors (weights plus bias) are pairwise collinear. `scales[k]` maps the
/// first member's vector onto member k's, so `scales[0]` is one and the
/// sign of `scales[k]` is the member's orientation. Neurons with a zero
/// extended vector sit alone in a class flagged `zero_vector`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwinClass<S> {
    pub layer: usize,
    pub members: Vec<usize>,
    pub scales: Vec<S>,
    pub zero_vector: bool,
}

impl<S: Scalar> TwinClass<S> {
    pub fn is_trivial(&self) -> bool {
        self.members.len() < 2
    }

    /// Members with positive orientation (the representative included).
    pub fn positive_members(&self) -> Vec<usize> {
        self.split(1)
    }

    pub fn negative_members(&self) -> Vec<usize> {
        self.split(-1)
    }

    fn split(&self, sign: i8) -> Vec<usize> {
        self.members
            .iter()
            .zip(&self.scales)
            .filter(|(_, s)| s.sign() == sign)
            .map(|(&m, _)| m)
            .collect()
    }

    pub fn has_mixed_signs(&self) -> bool {
        self.scales.iter().any(|s| s.sign() < 0)
    }

    /// True when the class contains two members with the same orientation.
    pub fn has_positive_pair(&self) -> bool {
        self.positive_members().len() >= 2 || self.negative_members().len() >= 2
    }

    /// Signature vector over the layer: +1 on positively oriented members,
    /// -1 on negatively oriented ones, 0 elsewhere.
    pub fn signature(&self, layer_width: usize) -> Vec<i8> {
        let mut sig = vec![0i8; layer_width];
        for (&m, s) in self.members.iter().zip(&self.scales) {
            sig[m] = s.sign();
        }
        sig
    }
}

/// Twin classes of every hidden layer; singletons included, so the classes
/// of one layer partition it.
#[derive(Clone, Debug, PartialEq)]
pub struct TwinReport<S> {
    pub classes: Vec<TwinClass<S>>,
}

impl<S: Scalar> TwinReport<S> {
    pub fn nontrivial(&self) -> impl Iterator<Item = &TwinClass<S>> {
        self.classes.iter().filter(|c| !c.is_trivial())
    }

    pub fn has_twins(&self) -> bool {
        self.nontrivial().next().is_some()
    }

    pub fn has_positive_pair(&self) -> bool {
        self.classes.iter().any(|c| c.has_positive_pair())
    }

    pub fn classes_in_layer(&self, layer: usize) -> impl Iterator<Item = &TwinClass<S>> {
        self.classes.iter().filter(move |c| c.layer == layer)
    }
}

pub(crate) fn scale_between<S: Scalar>(from: &[S], to: &[S]) -> Option<S> {
    // to == lambda * from for some lambda != 0?
    let pivot = from.iter().position(|v| !v.is_zero())?;
    let lambda = to[pivot].div(&from[pivot])?;
    if lambda.is_zero() {
        return None;
    }
    for (f, t) in from.iter().zip(to) {
        if &f.mul(&lambda) != t {
            return None;
        }
    }
    Some(lambda)
}

/// Exact twin detection: collinearity of extended incoming vectors decided
/// by cross-multiplication, so rational inputs give exact classes.
pub fn find_twins<S: Scalar>(p: &Params<S>) -> TwinReport<S> {
    let mut classes = Vec::new();
    for l in p.arch().hidden_layers() {
        let rows: Vec<Vec<S>> = (0..p.arch().width(l))
            .map(|nu| p.incoming_extended(l, nu))
            .collect();
        let mut assigned = vec![false; rows.len()];
        for nu in 0..rows.len() {
            if assigned[nu] {
                continue;
            }
            assigned[nu] = true;
            let zero = rows[nu].iter().all(|v| v.is_zero());
            let mut class = TwinClass {
                layer: l,
                members: vec![nu],
                scales: vec![S::one()],
                zero_vector: zero,
            };
            if !zero {
                for mu in nu + 1..rows.len() {
                    if assigned[mu] {
                        continue;
                    }
                    if let Some(lambda) = scale_between(&rows[nu], &rows[mu]) {
                        assigned[mu] = true;
                        class.members.push(mu);
                        class.scales.push(lambda);
                    }
                }
            }
            classes.push(class);
        }
    }
    TwinReport { classes }
}

/// Float-mode variant: vectors count as collinear when the angle between
/// them is at most sqrt(2*rtol); classes are grown with union-find.
pub fn find_twins_approx(p: &Params<f64>, rtol: f64) -> TwinReport<f64> {
    struct Dsu(Vec<usize>);
    impl Dsu {
        fn find(&mut self, i: usize) -> usize {
            if self.0[i] != i {
                let r = self.find(self.0[i]);
                self.0[i] = r;
            }
            self.0[i]
        }
        fn union(&mut self, a: usize, b: usize) {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra != rb {
                self.0[ra] = rb;
            }
        }
    }
    let mut classes = Vec::new();
    for l in p.arch().hidden_layers() {
        let width = p.arch().width(l);
        let rows: Vec<Vec<f64>> = (0..width).map(|nu| p.incoming_extended(l, nu)).collect();
        let norms: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let mut dsu = Dsu((0..width).collect());
        for a in 0..width {
            for b in a + 1..width {
                if norms[a] == 0.0 || norms[b] == 0.0 {
                    continue;
                }
                let dot: f64 = rows[a].iter().zip(&rows[b]).map(|(x, y)| x * y).sum();
                if norms[a] * norms[b] - dot.abs() <= rtol * norms[a] * norms[b] {
                    dsu.union(a, b);
                }
            }
        }
        let mut by_root: std::collections::BTreeMap<usize, TwinClass<f64>> = Default::default();
        for nu in 0..width {
            let root = dsu.find(nu);
            let class = by_root.entry(root).or_insert_with(|| TwinClass {
                layer: l,
                members: Vec::new(),
                scales: Vec::new(),
                zero_vector: norms[nu] == 0.0,
            });
            let scale = match class.members.first() {
                None => 1.0,
                Some(&rep) => {
                    let dot: f64 = rows[rep].iter().zip(&rows[nu]).map(|(x, y)| x * y).sum();
                    dot / (norms[rep] * norms[rep]).max(f64::MIN_POSITIVE)
                }
            };
            class.members.push(nu);
            class.scales.push(scale);
        }
        let mut layer_classes: Vec<TwinClass<f64>> = by_root.into_values().collect();
        layer_classes.sort_by_key(|c| c.members[0]);
        classes.extend(layer_classes);
    }
    TwinReport { classes }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducibilityWitness {
    pub layer: usize,
    pub subset: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Irreducibility {
    Irreducible,
    /// Nonempty hidden subset whose rank-one outer products (outgoing times
    /// incoming) sum to exactly zero, allowing a sign-flip collapse.
    Reducible(ReducibilityWitness),
    /// A hidden layer is wider than the subset-scan cap.
    Inconclusive { layer: usize, width: usize, cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IrreducibilityReport {
    pub verdict: Irreducibility,
    pub subsets_checked: u64,
}

pub const DEFAULT_SUBSET_CAP: usize = 22;

/// Reflected-Gray-code walk over the nonempty subsets of {0..n}: each step
/// toggles one element. Yields (element, now_present).
pub fn gray_toggle_sequence(n: usize) -> impl Iterator<Item = (usize, bool)> {
    (1u64..(1u64 << n)).map(|g| {
        let bit = g.trailing_zeros() as usize;
        let gray = g ^ (g >> 1);
        (bit, (gray >> bit) & 1 == 1)
    })
}

/// Exhaustive scan for a collapse witness, one rank-one update per subset.
/// Reports the lexicographically smallest witness of the lowest layer.
pub fn is_irreducible<S: Scalar>(p: &Params<S>, cap: usize) -> IrreducibilityReport {
    let cap = cap.min(63);
    let mut checked = 0u64;
    for l in p.arch().hidden_layers() {
        let width = p.arch().width(l);
        if width > cap {
            return IrreducibilityReport {
                verdict: Irreducibility::Inconclusive { layer: l, width, cap },
                subsets_checked: checked,
            };
        }
        let rows_next = p.arch().width(l + 1);
        let cols_prev = p.arch().width(l - 1);
        let rank1: Vec<Mat<S>> = (0..width)
            .map(|nu| {
                let out = p.outgoing(l, nu);
                let inc = p.weight(l).row(nu);
                let mut m = Mat::zeros(rows_next, cols_prev);
                for (i, o) in out.iter().enumerate() {
                    for (j, w) in inc.iter().enumerate() {
                        *m.at_mut(i, j) = o.mul(w);
                    }
                }
                m
            })
            .collect();
        let mut acc = Mat::<S>::zeros(rows_next, cols_prev);
        let mut present = vec![false; width];
        let mut best: Option<Vec<usize>> = None;
        for (bit, added) in gray_toggle_sequence(width) {
            present[bit] = added;
            for i in 0..rows_next {
                for j in 0..cols_prev {
                    let v = if added {
                        acc.at(i, j).add(rank1[bit].at(i, j))
                    } else {
                        acc.at(i, j).sub(rank1[bit].at(i, j))
                    };
                    *acc.at_mut(i, j) = v;
                }
            }
            checked += 1;
            if acc.is_zero() {
                let subset: Vec<usize> = (0..width).filter(|&nu| present[nu]).collect();
                if best.as_ref().map_or(true, |b| subset < *b) {
                    best = Some(subset);
                }
            }
        }
        if let Some(subset) = best {
            return IrreducibilityReport {
                verdict: Irreducibility::Reducible(ReducibilityWitness { layer: l, subset }),
                subsets_checked: checked,
            };
        }
    }
    IrreducibilityReport {
        verdict: Irreducibility::Irreducible,
        subsets_checked: checked,
    }
}

/// Sub-analysis attached when the twin structure is exactly one negative
/// pair (one two-member mixed class, everything else singletons).
#[derive(Clone, Debug, PartialEq)]
pub struct Case2a<S> {
    pub nu1: usize,
    pub nu2: usize,
    /// (w_{nu2}, b_{nu2}) = lambda (w_{nu1}, b_{nu1}), lambda < 0.
    pub lambda: S,
    /// Set when the outgoing vectors are dependent: v_{nu2} = ratio v_{nu1}.
    pub outgoing_ratio: Option<S>,
}

/// Verdict of the bounded-set identifiability classification for shallow
/// networks: identifiable iff admissible, twin-free and irreducible.
#[derive(Clone, Debug, PartialEq)]
pub enum ShallowClassification<S> {
    NotAdmissible,
    PsIdentifiableFromBoundedSet,
    ExcludedByTwins {
        positive_pairs: usize,
        negative_pairs: usize,
        case2a: Option<Case2a<S>>,
    },
    ExcludedByReducibility(ReducibilityWitness),
    /// Width beyond the subset cap left irreducibility undecided.
    Undetermined(String),
}

pub fn classify_shallow<S: Scalar>(p: &Params<S>) -> Result<ShallowClassification<S>> {
    if !p.arch().is_shallow() {
        return Err(CoreError::UnsupportedDepth {
            required: "exactly one hidden layer".into(),
            actual: p.depth(),
        });
    }
    if !p.is_admissible() {
        return Ok(ShallowClassification::NotAdmissible);
    }
    let twins = find_twins(p);
    if twins.has_twins() {
        let positive_pairs = twins
            .classes
            .iter()
            .filter(|c| c.has_positive_pair())
            .count();
        let negative_pairs = twins
            .classes
            .iter()
            .filter(|c| c.has_mixed_signs())
            .count();
        // The finer case-2a analysis applies only to a lone negative pair.
        let nontrivial: Vec<&TwinClass<S>> = twins.nontrivial().collect();
        let case2a = match nontrivial.as_slice() {
            [class] if class.members.len() == 2 && class.has_mixed_signs() => {
                let (nu1, nu2) = (class.members[0], class.members[1]);
                let v1 = p.outgoing(1, nu1);
                let v2 = p.outgoing(1, nu2);
                Some(Case2a {
                    nu1,
                    nu2,
                    lambda: class.scales[1].clone(),
                    outgoing_ratio: scale_between(&v1, &v2),
                })
            }
            _ => None,
        };
        return Ok(ShallowClassification::ExcludedByTwins {
            positive_pairs,
            negative_pairs,
            case2a,
        });
    }
    match is_irreducible(p, DEFAULT_SUBSET_CAP).verdict {
        Irreducibility::Irreducible => Ok(ShallowClassification::PsIdentifiableFromBoundedSet),
        Irreducibility::Reducible(w) => Ok(ShallowClassification::ExcludedByReducibility(w)),
        Irreducibility::Inconclusive { layer, width, cap } => Ok(
            ShallowClassification::Undetermined(format!(
                "layer {layer} width {width} exceeds subset cap {cap}"
            )),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::{rescale, Rescaling};
    use crate::network::Architecture;
    use crate::scalar::{rat, Rat};

    fn shallow(
        widths: Vec<usize>,
        w1: Vec<Vec<Rat>>,
        b1: Vec<Rat>,
        w2: Vec<Vec<Rat>>,
        b2: Vec<Rat>,
    ) -> Params<Rat> {
        Params::new(
            Architecture::new(widths).unwrap(),
            vec![Mat::from_rows(w1), Mat::from_rows(w2)],
            vec![b1, b2],
        )
        .unwrap()
    }

    fn abs_like() -> Params<Rat> {
        shallow(
            vec![1, 2, 1],
            vec![vec![rat(1, 1)], vec![rat(-1, 1)]],
            vec![rat(0, 1), rat(0, 1)],
            vec![vec![rat(1, 1), rat(1, 1)]],
            vec![rat(0, 1)],
        )
    }

    fn twin_rich() -> Params<Rat> {
        // Extended rows: (1,2,-1), (-2,-4,2) = -2*r0, (3,6,-3) = 3*r0,
        // (1,0,0), (2,0,0) = 2*r3, (0,1,5).
        shallow(
            vec![2, 6, 1],
            vec![
                vec![rat(1, 1), rat(2, 1)],
                vec![rat(-2, 1), rat(-4, 1)],
                vec![rat(3, 1), rat(6, 1)],
                vec![rat(1, 1), rat(0, 1)],
                vec![rat(2, 1), rat(0, 1)],
                vec![rat(0, 1), rat(1, 1)],
            ],
            vec![rat(-1, 1), rat(2, 1), rat(-3, 1), rat(0, 1), rat(0, 1), rat(5, 1)],
            vec![vec![rat(1, 1); 6]],
            vec![rat(0, 1)],
        )
    }

    #[test]
    fn twin_partition_groups_collinear_rows() {
        let p = twin_rich();
        let report = find_twins(&p);
        let members: Vec<Vec<usize>> = report.classes.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![vec![0, 1, 2], vec![3, 4], vec![5]]);
        assert_eq!(report.classes[0].scales, vec![rat(1, 1), rat(-2, 1), rat(3, 1)]);
        assert_eq!(report.classes[0].positive_members(), vec![0, 2]);
        assert_eq!(report.classes[0].negative_members(), vec![1]);
        assert_eq!(report.classes[0].signature(6), vec![1, -1, 1, 0, 0, 0]);
        assert!(report.classes[0].has_positive_pair());
        assert!(report.classes[1].has_positive_pair());
        assert!(!report.classes[1].has_mixed_signs());
        assert_eq!(report.nontrivial().count(), 2);
        assert!(report.has_twins());
    }

    #[test]
    fn twins_require_bias_collinearity() {
        // Same weight direction, inconsistent bias: not twins.
        let p = shallow(
            vec![1, 2, 1],
            vec![vec![rat(1, 1)], vec![rat(2, 1)]],
            vec![rat(1, 1), rat(3, 1)],
            vec![vec![rat(1, 1), rat(1, 1)]],
            vec![rat(0, 1)],
        );
        assert!(!find_twins(&p).has_twins());
    }

    #[test]
    fn twin_partition_invariant_under_rescaling() {
        let p = twin_rich();
        let s = Rescaling::new(vec![(1..=6).map(|k| rat(k, 2)).collect()]).unwrap();
        let q = rescale(&p, &s);
        let a = find_twins(&p);
        let b = find_twins(&q);
        for (ca, cb) in a.classes.iter().zip(&b.classes) {
            assert_eq!(ca.members, cb.members);
            let sa: Vec<i8> = ca.scales.iter().map(|v| v.sign()).collect();
            let sb: Vec<i8> = cb.scales.iter().map(|v| v.sign()).collect();
            assert_eq!(sa, sb, "positive/negative split must be preserved");
        }
    }

    #[test]
    fn zero_vector_neurons_are_flagged() {
        let mut p = abs_like();
        *p.weight_mut(1).at_mut(0, 0) = rat(0, 1);
        let report = find_twins(&p);
        assert!(report.classes[0].zero_vector);
        assert_eq!(report.classes[0].members, vec![0]);
    }

    #[test]
    fn approx_twins_tolerate_noise() {
        // An angular deviation of about 2e-7 sits between the two
        // tolerances tested below.
        let mut p = twin_rich().to_f64();
        *p.weight_mut(1).at_mut(1, 0) += 1e-6;
        let report = find_twins_approx(&p, 1e-9);
        let members: Vec<Vec<usize>> = report
            .classes
            .iter()
            .filter(|c| !c.is_trivial())
            .map(|c| c.members.clone())
            .collect();
        assert_eq!(members, vec![vec![0, 1, 2], vec![3, 4]]);
        let class0 = &report.classes[0];
        assert!((class0.scales[1] + 2.0).abs() < 1e-5);
        // At a tighter tolerance the perturbed member splits off.
        let tight = find_twins_approx(&p, 1e-15);
        assert!(tight
            .classes
            .iter()
            .any(|c| c.members.contains(&1) && c.members.len() == 1));
    }

    #[test]
    fn absolute_value_network_is_reducible() {
        // ReLU(x) + ReLU(-x): flipping both neurons leaves a zero bypass.
        let r = is_irreducible(&abs_like(), DEFAULT_SUBSET_CAP);
        assert_eq!(
            r.verdict,
            Irreducibility::Reducible(ReducibilityWitness {
                layer: 1,
                subset: vec![0, 1],
            })
        );
        assert_eq!(r.subsets_checked, 3);
    }

    #[test]
    fn lex_min_witness_is_reported() {
        // Two disjoint cancelling pairs; the lexicographically smallest wins.
        let p = shallow(
            vec![1, 4, 1],
            vec![vec![rat(1, 1)], vec![rat(1, 1)], vec![rat(2, 1)], vec![rat(2, 1)]],
            vec![rat(0, 1); 4],
            vec![vec![rat(1, 1), rat(-1, 1), rat(3, 1), rat(-3, 1)]],
            vec![rat(0, 1)],
        );
        match is_irreducible(&p, DEFAULT_SUBSET_CAP).verdict {
            Irreducibility::Reducible(w) => assert_eq!(w.subset, vec![0, 1]),
            other => panic!("expected reducible, got {other:?}"),
        }
    }

    #[test]
    fn generic_network_is_irreducible() {
        let p = shallow(
            vec![2, 3, 1],
            vec![
                vec![rat(1, 2), rat(-1, 1)],
                vec![rat(2, 1), rat(1, 3)],
                vec![rat(-3, 2), rat(1, 1)],
            ],
            vec![rat(1, 4), rat(-1, 2), rat(1, 1)],
            vec![vec![rat(1, 1), rat(1, 2), rat(-1, 4)]],
            vec![rat(2, 1)],
        );
        let r = is_irreducible(&p, DEFAULT_SUBSET_CAP);
        assert_eq!(r.verdict, Irreducibility::Irreducible);
        assert_eq!(r.subsets_checked, 7);
    }

    #[test]
    fn wide_layer_is_inconclusive() {
        let width = DEFAULT_SUBSET_CAP + 1;
        let p = shallow(
            vec![1, width, 1],
            (0..width).map(|i| vec![rat(i as i64 + 1, 1)]).collect(),
            vec![rat(0, 1); width],
            vec![(0..width).map(|i| rat(i as i64 + 1, 1)).collect()],
            vec![rat(0, 1)],
        );
        assert!(matches!(
            is_irreducible(&p, DEFAULT_SUBSET_CAP).verdict,
            Irreducibility::Inconclusive { layer: 1, .. }
        ));
    }

    #[test]
    fn gray_walk_covers_all_subsets_once() {
        let n = 5;
        let mut seen = std::collections::HashSet::new();
        let mut state = 0u32;
        for (bit, added) in gray_toggle_sequence(n) {
            if added {
                state |= 1 << bit;
            } else {
                state &= !(1 << bit);
            }
            assert!(seen.insert(state), "subset repeated: {state:b}");
            assert_ne!(state, 0);
        }
        assert_eq!(seen.len(), (1 << n) - 1);
    }

    #[test]
    fn abs_network_classification() {
        match classify_shallow(&abs_like()).unwrap() {
            ShallowClassification::ExcludedByTwins {
                positive_pairs,
                negative_pairs,
                case2a: Some(c),
            } => {
                assert_eq!((positive_pairs, negative_pairs), (0, 1));
                assert_eq!((c.nu1, c.nu2), (0, 1));
                assert_eq!(c.lambda, rat(-1, 1));
                assert_eq!(c.outgoing_ratio, Some(rat(1, 1)));
            }
            other => panic!("expected lone negative pair, got {other:?}"),
        }
    }

    #[test]
    fn generic_shallow_is_identifiable() {
        let p = shallow(
            vec![2, 3, 1],
            vec![
                vec![rat(1, 2), rat(-1, 1)],
                vec![rat(2, 1), rat(1, 3)],
                vec![rat(-3, 2), rat(1, 1)],
            ],
            vec![rat(1, 4), rat(-1, 2), rat(1, 1)],
            vec![vec![rat(1, 1), rat(1, 2), rat(-1, 4)]],
            vec![rat(2, 1)],
        );
        assert_eq!(
            classify_shallow(&p).unwrap(),
            ShallowClassification::PsIdentifiableFromBoundedSet
        );
    }

    #[test]
    fn reducible_no_twin_network_is_excluded() {
        // The two-kink network with a full-layer collapse witness.
        let p = shallow(
            vec![1, 2, 1],
            vec![vec![rat(-1, 1)], vec![rat(1, 1)]],
            vec![rat(0, 1), rat(-1, 1)],
            vec![vec![rat(1, 1), rat(1, 1)]],
            vec![rat(0, 1)],
        );
        assert!(!find_twins(&p).has_twins());
        assert_eq!(
            classify_shallow(&p).unwrap(),
            ShallowClassification::ExcludedByReducibility(ReducibilityWitness {
                layer: 1,
                subset: vec![0, 1],
            })
        );
    }

    #[test]
    fn dead_neuron_blocks_classification() {
        let mut p = abs_like();
        *p.weight_mut(2).at_mut(0, 1) = rat(0, 1);
        assert_eq!(
            classify_shallow(&p).unwrap(),
            ShallowClassification::NotAdmissible
        );
    }

    #[test]
    fn deep_network_rejected() {
        let p = Params::new(
            Architecture::new(vec![1, 2, 2, 1]).unwrap(),
            vec![
                Mat::from_rows(vec![vec![rat(1, 1)], vec![rat(2, 1)]]),
                Mat::from_rows(vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]]),
                Mat::from_rows(vec![vec![rat(1, 1), rat(1, 1)]]),
            ],
            vec![vec![rat(0, 1); 2], vec![rat(0, 1); 2], vec![rat(0, 1)]],
        )
        .unwrap();
        assert!(classify_shallow(&p).is_err());
    }

    #[test]
    fn many_twin_layers_partition_per_layer() {
        let p = Params::new(
            Architecture::new(vec![1, 2, 2, 1]).unwrap(),
            vec![
                Mat::from_rows(vec![vec![rat(1, 1)], vec![rat(2, 1)]]),
                Mat::from_rows(vec![vec![rat(1, 1), rat(1, 1)], vec![rat(-2, 1), rat(-2, 1)]]),
                Mat::from_rows(vec![vec![rat(1, 1), rat(1, 1)]]),
            ],
            vec![
                vec![rat(0, 1), rat(0, 1)],
                vec![rat(1, 2), rat(-1, 1)],
                vec![rat(0, 1)],
            ],
        )
        .unwrap();
        let report = find_twins(&p);
        let layer2: Vec<&TwinClass<Rat>> = report.classes_in_layer(2).collect();
        assert_eq!(layer2.len(), 1);
        assert_eq!(layer2[0].members, vec![0, 1]);
        assert_eq!(layer2[0].scales[1], rat(-2, 1));
        assert!(layer2[0].has_mixed_signs());
    }
}
