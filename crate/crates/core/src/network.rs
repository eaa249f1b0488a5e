//! Network containers: architecture, parameters, forward evaluation with a
//! full trace, activation patterns and the sufficient interiority test for
//! the piecewise-linear domain decomposition.

use crate::error::{CoreError, Result};
use crate::linalg::{sup_norm, vec_is_zero, Mat};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Layer widths N_0..N_L. Depth L >= 1 and every width >= 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    widths: Vec<usize>,
}

impl Architecture {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(CoreError::ShapeMismatch(format!(
                "need at least input and output layers, got {} widths",
                widths.len()
            )));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(CoreError::ShapeMismatch("zero layer width".into()));
        }
        Ok(Architecture { widths })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }
    /// Number of weight layers L.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }
    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }
    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }
    pub fn width(&self, layer: usize) -> usize {
        self.widths[layer]
    }
    /// Hidden layers are 1..=L-1.
    pub fn hidden_layers(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.depth().saturating_sub(1)
    }
    pub fn hidden_count(&self) -> usize {
        self.hidden_layers().map(|l| self.width(l)).sum()
    }
    pub fn is_shallow(&self) -> bool {
        self.depth() == 2
    }
}

/// Weights and biases; `weights[l-1]` is the N_l x N_{l-1} matrix of layer l,
/// `biases[l-1]` its bias vector (inputs carry no bias).
#[derive(Clone, Debug, PartialEq)]
pub struct Params<S> {
    arch: Architecture,
    weights: Vec<Mat<S>>,
    biases: Vec<Vec<S>>,
}

impl<S: Scalar> Params<S> {
    pub fn new(arch: Architecture, weights: Vec<Mat<S>>, biases: Vec<Vec<S>>) -> Result<Self> {
        if weights.len() != arch.depth() || biases.len() != arch.depth() {
            return Err(CoreError::ShapeMismatch(format!(
                "expected {} weight/bias layers, got {}/{}",
                arch.depth(),
                weights.len(),
                biases.len()
            )));
        }
        for l in 1..=arch.depth() {
            let w = &weights[l - 1];
            if w.rows() != arch.width(l) || w.cols() != arch.width(l - 1) {
                return Err(CoreError::ShapeMismatch(format!(
                    "layer {l}: weight matrix is {}x{}, architecture wants {}x{}",
                    w.rows(),
                    w.cols(),
                    arch.width(l),
                    arch.width(l - 1)
                )));
            }
            if biases[l - 1].len() != arch.width(l) {
                return Err(CoreError::ShapeMismatch(format!(
                    "layer {l}: bias length {} vs width {}",
                    biases[l - 1].len(),
                    arch.width(l)
                )));
            }
        }
        Ok(Params {
            arch,
            weights,
            biases,
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }
    pub fn depth(&self) -> usize {
        self.arch.depth()
    }
    /// Weight matrix of layer l (1-based).
    pub fn weight(&self, layer: usize) -> &Mat<S> {
        &self.weights[layer - 1]
    }
    pub fn weight_mut(&mut self, layer: usize) -> &mut Mat<S> {
        &mut self.weights[layer - 1]
    }
    pub fn bias(&self, layer: usize) -> &[S] {
        &self.biases[layer - 1]
    }
    pub fn bias_mut(&mut self, layer: usize) -> &mut Vec<S> {
        &mut self.biases[layer - 1]
    }

    /// Incoming weight row of a neuron, extended with its bias.
    pub fn incoming_extended(&self, layer: usize, neuron: usize) -> Vec<S> {
        let mut v = self.weight(layer).row(neuron).to_vec();
        v.push(self.bias(layer)[neuron].clone());
        v
    }

    /// Outgoing weight column of a hidden neuron.
    pub fn outgoing(&self, layer: usize, neuron: usize) -> Vec<S> {
        self.weight(layer + 1).col(neuron)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> Params<T> {
        Params {
            arch: self.arch.clone(),
            weights: self.weights.iter().map(|w| w.map(f)).collect(),
            biases: self
                .biases
                .iter()
                .map(|b| b.iter().map(f).collect())
                .collect(),
        }
    }

    pub fn to_f64(&self) -> Params<f64> {
        self.map(|v| v.to_f64())
    }

    /// Forward pass keeping every pre-activation, post-activation and the
    /// hidden activation statuses.
    pub fn forward(&self, x: &[S]) -> ForwardTrace<S> {
        assert_eq!(x.len(), self.arch.input_dim(), "input dimension mismatch");
        let depth = self.depth();
        let mut pre: Vec<Vec<S>> = Vec::with_capacity(depth);
        let mut post: Vec<Vec<S>> = Vec::with_capacity(depth);
        post.push(x.to_vec());
        let mut statuses: Vec<Vec<bool>> = Vec::with_capacity(depth.saturating_sub(1));
        for l in 1..=depth {
            let mut z = self.weight(l).mul_vec(post.last().unwrap());
            for (zi, bi) in z.iter_mut().zip(self.bias(l)) {
                *zi = zi.add(bi);
            }
            if l < depth {
                statuses.push(z.iter().map(|v| v.is_positive()).collect());
                post.push(z.iter().map(|v| v.relu()).collect());
            }
            pre.push(z);
        }
        ForwardTrace { pre, post, statuses }
    }

    /// The realized function value R(x) = z_L.
    pub fn realization(&self, x: &[S]) -> Vec<S> {
        self.forward(x).output().to_vec()
    }

    /// Hidden activation statuses, concatenated over layers 1..L-1.
    pub fn activation_pattern(&self, x: &[S]) -> Vec<bool> {
        self.forward(x).pattern()
    }

    /// Sufficient test for membership in the open constant-pattern region:
    /// every hidden pre-activation clears `margin` in absolute value.
    /// Networks with L = 1 have no hidden neurons, so every input is inside.
    pub fn in_xcont(&self, x: &[S], margin: f64) -> XContStatus {
        let trace = self.forward(x);
        for z in trace.hidden_pre() {
            for v in z {
                if v.to_f64().abs() <= margin {
                    return XContStatus::BoundarySuspect;
                }
            }
        }
        XContStatus::Inside
    }

    /// Sup-norm over all weights and biases.
    pub fn sup_norm(&self) -> S {
        let mut best = S::zero();
        for l in 1..=self.depth() {
            let a = sup_norm(self.weight(l).data());
            if best.lt(&a) {
                best = a;
            }
            let b = sup_norm(self.bias(l));
            if best.lt(&b) {
                best = b;
            }
        }
        best
    }

    /// A hidden neuron is dead when its incoming or outgoing weight vector
    /// vanishes. Entries with |value| <= atol count as zero (atol 0 = exact).
    pub fn dead_neurons(&self, atol: f64) -> Vec<DeadNeuron> {
        let mut out = Vec::new();
        let near_zero = |v: &S| {
            if atol == 0.0 {
                v.is_zero()
            } else {
                v.to_f64().abs() <= atol
            }
        };
        for l in self.arch.hidden_layers() {
            for nu in 0..self.arch.width(l) {
                let incoming = self.weight(l).row(nu);
                if incoming.iter().all(&near_zero) {
                    out.push(DeadNeuron {
                        layer: l,
                        neuron: nu,
                        side: DeadSide::Incoming,
                    });
                }
                let outgoing = self.outgoing(l, nu);
                if outgoing.iter().all(&near_zero) {
                    out.push(DeadNeuron {
                        layer: l,
                        neuron: nu,
                        side: DeadSide::Outgoing,
                    });
                }
            }
        }
        out
    }

    /// No hidden neuron has a vanishing incoming or outgoing weight vector.
    pub fn is_admissible(&self) -> bool {
        self.dead_neurons(0.0).is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DeadSide {
    Incoming,
    Outgoing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeadNeuron {
    pub layer: usize,
    pub neuron: usize,
    pub side: DeadSide,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum XContStatus {
    Inside,
    BoundarySuspect,
}

/// Everything the forward pass produced.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace<S> {
    /// pre[l-1] = z_l for l = 1..=L
    pub pre: Vec<Vec<S>>,
    /// post[0] = x, post[l] = y_l for hidden layers
    pub post: Vec<Vec<S>>,
    /// statuses[l-1] over hidden layer l
    pub statuses: Vec<Vec<bool>>,
}

impl<S: Scalar> ForwardTrace<S> {
    pub fn output(&self) -> &[S] {
        self.pre.last().unwrap()
    }
    /// Pre-activations of hidden layers only.
    pub fn hidden_pre(&self) -> &[Vec<S>] {
        &self.pre[..self.pre.len() - 1]
    }
    /// Concatenated hidden statuses.
    pub fn pattern(&self) -> Vec<bool> {
        self.statuses.iter().flatten().copied().collect()
    }
}

/// Parameter-space constraints used by the degeneracy certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConstraintSet {
    Unconstrained,
    ZeroOutputBias,
    ZeroAllBias,
    /// Entries where the mask is false are pinned to zero.
    SparsityMask {
        weight_masks: Vec<Vec<Vec<bool>>>,
        bias_masks: Vec<Vec<bool>>,
    },
}

impl ConstraintSet {
    pub fn satisfied_by<S: Scalar>(&self, p: &Params<S>) -> bool {
        match self {
            ConstraintSet::Unconstrained => true,
            ConstraintSet::ZeroOutputBias => vec_is_zero(p.bias(p.depth())),
            ConstraintSet::ZeroAllBias => (1..=p.depth()).all(|l| vec_is_zero(p.bias(l))),
            ConstraintSet::SparsityMask {
                weight_masks,
                bias_masks,
            } => {
                if weight_masks.len() != p.depth() || bias_masks.len() != p.depth() {
                    return false;
                }
                for l in 1..=p.depth() {
                    let wm = &weight_masks[l - 1];
                    let w = p.weight(l);
                    if wm.len() != w.rows() || wm.iter().any(|r| r.len() != w.cols()) {
                        return false;
                    }
                    for r in 0..w.rows() {
                        for c in 0..w.cols() {
                            if !wm[r][c] && !w.at(r, c).is_zero() {
                                return false;
                            }
                        }
                    }
                    let bm = &bias_masks[l - 1];
                    if bm.len() != p.bias(l).len() {
                        return false;
                    }
                    for (m, v) in bm.iter().zip(p.bias(l)) {
                        if !m && !v.is_zero() {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// Does the constraint pin every output bias to zero?
    pub fn forces_zero_output_bias(&self, arch: &Architecture) -> bool {
        match self {
            ConstraintSet::Unconstrained => false,
            ConstraintSet::ZeroOutputBias | ConstraintSet::ZeroAllBias => true,
            ConstraintSet::SparsityMask { bias_masks, .. } => bias_masks
                .get(arch.depth() - 1)
                .map(|m| m.iter().all(|&free| !free))
                .unwrap_or(false),
        }
    }

    /// May the bias of this neuron move freely without leaving the set?
    pub fn bias_free(&self, depth: usize, layer: usize, neuron: usize) -> bool {
        match self {
            ConstraintSet::Unconstrained => true,
            ConstraintSet::ZeroOutputBias => layer != depth,
            ConstraintSet::ZeroAllBias => false,
            ConstraintSet::SparsityMask { bias_masks, .. } => bias_masks
                .get(layer - 1)
                .and_then(|m| m.get(neuron))
                .copied()
                .unwrap_or(false),
        }
    }

    /// True when every bias coordinate may move freely, i.e. bias-only
    /// perturbations of a feasible point stay feasible.
    pub fn allows_bias_perturbations(&self) -> bool {
        match self {
            ConstraintSet::Unconstrained => true,
            ConstraintSet::ZeroOutputBias | ConstraintSet::ZeroAllBias => false,
            ConstraintSet::SparsityMask { bias_masks, .. } => {
                bias_masks.iter().all(|m| m.iter().all(|&free| free))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    /// |x| as ReLU(x) + ReLU(-x).
    pub fn abs_net() -> Params<Rat> {
        let arch = Architecture::new(vec![1, 2, 1]).unwrap();
        Params::new(
            arch,
            vec![
                Mat::from_rows(vec![vec![rat(1, 1)], vec![rat(-1, 1)]]),
                Mat::from_rows(vec![vec![rat(1, 1), rat(1, 1)]]),
            ],
            vec![vec![rat(0, 1), rat(0, 1)], vec![rat(0, 1)]],
        )
        .unwrap()
    }

    /// ReLU(-x) + ReLU(x - 1).
    fn nonlocal_net() -> Params<Rat> {
        let arch = Architecture::new(vec![1, 2, 1]).unwrap();
        Params::new(
            arch,
            vec![
                Mat::from_rows(vec![vec![rat(-1, 1)], vec![rat(1, 1)]]),
                Mat::from_rows(vec![vec![rat(1, 1), rat(1, 1)]]),
            ],
            vec![vec![rat(0, 1), rat(-1, 1)], vec![rat(0, 1)]],
        )
        .unwrap()
    }

    #[test]
    fn architecture_validation() {
        assert!(Architecture::new(vec![3]).is_err());
        assert!(Architecture::new(vec![3, 0, 1]).is_err());
        let a = Architecture::new(vec![2, 3, 4, 1]).unwrap();
        assert_eq!(a.depth(), 3);
        assert_eq!(a.hidden_count(), 7);
        assert_eq!(a.hidden_layers().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn forward_matches_hand_computation() {
        let net = abs_net();
        for (x, want) in [(rat(2, 1), rat(2, 1)), (rat(-3, 2), rat(3, 2)), (rat(0, 1), rat(0, 1))] {
            assert_eq!(net.realization(&[x]), vec![want]);
        }
        let non = nonlocal_net();
        assert_eq!(non.realization(&[rat(2, 1)]), vec![rat(1, 1)]);
        assert_eq!(non.realization(&[rat(-2, 1)]), vec![rat(2, 1)]);
        assert_eq!(non.realization(&[rat(1, 2)]), vec![rat(0, 1)]);
    }

    #[test]
    fn trace_shapes_and_pattern() {
        let net = nonlocal_net();
        let t = net.forward(&[rat(2, 1)]);
        assert_eq!(t.pre.len(), 2);
        assert_eq!(t.post.len(), 2);
        assert_eq!(t.statuses, vec![vec![false, true]]);
        assert_eq!(t.pattern(), vec![false, true]);
        assert_eq!(t.output(), &[rat(1, 1)]);
    }

    #[test]
    fn depth_one_network_forward() {
        let arch = Architecture::new(vec![2, 1]).unwrap();
        let net = Params::new(
            arch,
            vec![Mat::from_rows(vec![vec![rat(1, 1), rat(2, 1)]])],
            vec![vec![rat(5, 1)]],
        )
        .unwrap();
        let t = net.forward(&[rat(1, 1), rat(1, 1)]);
        assert_eq!(t.output(), &[rat(8, 1)]);
        assert!(t.statuses.is_empty());
        // No hidden layer: every input is inside.
        assert_eq!(net.in_xcont(&[rat(0, 1), rat(0, 1)], 1e-6), XContStatus::Inside);
    }

    #[test]
    fn in_xcont_flags_boundary() {
        let net = abs_net();
        assert_eq!(net.in_xcont(&[rat(1, 1)], 1e-6), XContStatus::Inside);
        assert_eq!(net.in_xcont(&[rat(0, 1)], 1e-6), XContStatus::BoundarySuspect);
    }

    #[test]
    fn admissibility_and_dead_neurons() {
        let net = abs_net();
        assert!(net.is_admissible());
        let mut dead = abs_net();
        *dead.weight_mut(2).at_mut(0, 1) = rat(0, 1);
        assert!(!dead.is_admissible());
        let found = dead.dead_neurons(0.0);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].layer, 1);
        assert_eq!(found[0].neuron, 1);
        assert_eq!(found[0].side, DeadSide::Outgoing);
    }

    #[test]
    fn constraint_checks() {
        let net = abs_net();
        assert!(ConstraintSet::Unconstrained.satisfied_by(&net));
        assert!(ConstraintSet::ZeroOutputBias.satisfied_by(&net));
        assert!(ConstraintSet::ZeroAllBias.satisfied_by(&net));
        let mut biased = abs_net();
        biased.bias_mut(2)[0] = rat(1, 1);
        assert!(!ConstraintSet::ZeroOutputBias.satisfied_by(&biased));
        assert!(ConstraintSet::ZeroOutputBias.forces_zero_output_bias(biased.arch()));
        assert!(!ConstraintSet::ZeroOutputBias.allows_bias_perturbations());
        assert!(ConstraintSet::Unconstrained.allows_bias_perturbations());
    }
}
