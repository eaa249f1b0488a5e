//! The path-weight embedding: one coordinate per path, carrying the product
//! of the traversed weights (times the starting bias for bias paths). Also
//! the linear lift of the embedding (sums along paths), the support
//! diagnostic, and the two alternative expressions of the realized function
//! that factor through the embedding.

use crate::error::{CoreError, Result};
use crate::linalg::Mat;
use crate::network::{ForwardTrace, Params};
use crate::paths::{ChainIndex, PathIndex, DEFAULT_PATH_BUDGET};
use crate::scalar::Scalar;
use serde::Serialize;

/// The embedding of one parameter vector.
#[derive(Clone, Debug)]
pub struct Embedding<S> {
    index: PathIndex,
    chains: ChainIndex,
    phi: Vec<S>,
}

impl<S: Scalar> Embedding<S> {
    pub fn index(&self) -> &PathIndex {
        &self.index
    }
    pub fn chains(&self) -> &ChainIndex {
        &self.chains
    }
    pub fn phi(&self) -> &[S] {
        &self.phi
    }

    /// Exact coordinate-wise equality.
    pub fn same_phi(&self, other: &Embedding<S>) -> bool {
        self.phi == other.phi
    }

    /// Input block of one output: |Q_1| x N_0 matrix of full-path values
    /// phi_{mu -> q -> eta}.
    pub fn input_block(&self, output: usize) -> Mat<S> {
        let q1 = self.chains.first_block();
        let inputs = self.input_dim();
        let mut out = Mat::zeros(q1, inputs);
        for q in 0..q1 {
            let (start, chain) = self.chains.decode(q);
            debug_assert_eq!(start, 1);
            for mu in 0..inputs {
                *out.at_mut(q, mu) =
                    self.phi[self.index.full_path(mu, &chain, output)].clone();
            }
        }
        out
    }

    /// Hidden block of one output: values of the bias paths ending at the
    /// output, with the output bias appended (length |Q| + 1).
    pub fn hidden_block(&self, output: usize) -> Vec<S> {
        let mut out = Vec::with_capacity(self.chains.total() + 1);
        for q in 0..self.chains.total() {
            let (start, chain) = self.chains.decode(q);
            out.push(self.phi[self.index.bias_path(start, &chain, output)].clone());
        }
        out.push(self.phi[self.index.output_bias_path(output)].clone());
        out
    }

    fn input_dim(&self) -> usize {
        // |P_0| = N_0 * |P_1|
        self.index.family_size(0) / self.index.family_size(1)
    }

    fn output_dim(&self) -> usize {
        self.index.family_size(self.index.depth())
    }
}

/// Suffix accumulation shared by the embedding (product semiring) and its
/// linear lift (sum semiring). Returns, for each start layer l, the vector
/// over tuples (n_l..n_L) of the combined edge values along the tuple.
fn suffix_edges<S: Scalar>(
    params: &Params<S>,
    index: &PathIndex,
    combine: impl Fn(&S, &S) -> S,
    unit: S,
) -> Vec<Vec<S>> {
    let depth = params.depth();
    let widths = params.arch().widths();
    let mut levels: Vec<Vec<S>> = vec![Vec::new(); depth + 1];
    levels[depth] = vec![unit; widths[depth]];
    for l in (0..depth).rev() {
        let next_size = index.family_size(l + 1);
        // Stride of the leading coordinate inside the next level.
        let stride = next_size / widths[l + 1];
        let mut cur = Vec::with_capacity(index.family_size(l));
        for n in 0..widths[l] {
            for j in 0..next_size {
                let head = j / stride;
                cur.push(combine(params.weight(l + 1).at(head, n), &levels[l + 1][j]));
            }
        }
        levels[l] = cur;
    }
    levels
}

fn assemble_path_vector<S: Scalar>(
    params: &Params<S>,
    index: &PathIndex,
    levels: &[Vec<S>],
    combine: impl Fn(&S, &S) -> S,
) -> Vec<S> {
    let depth = params.depth();
    let widths = params.arch().widths();
    let mut phi = Vec::with_capacity(index.total());
    phi.extend_from_slice(&levels[0]);
    for l in 1..=depth {
        let size = index.family_size(l);
        let stride = size / widths[l];
        for i in 0..size {
            let start_neuron = i / stride;
            phi.push(combine(&params.bias(l)[start_neuron], &levels[l][i]));
        }
    }
    phi
}

/// Compute the embedding with an explicit path budget.
pub fn embed_with_budget<S: Scalar>(params: &Params<S>, budget: u64) -> Result<Embedding<S>> {
    let index = PathIndex::new(params.arch(), budget)?;
    let chains = ChainIndex::new(params.arch());
    let levels = suffix_edges(params, &index, |a, b| a.mul(b), S::one());
    let phi = assemble_path_vector(params, &index, &levels, |a, b| a.mul(b));
    debug_assert_eq!(phi.len(), index.total());
    Ok(Embedding { index, chains, phi })
}

pub fn embed<S: Scalar>(params: &Params<S>) -> Result<Embedding<S>> {
    embed_with_budget(params, DEFAULT_PATH_BUDGET)
}

/// The linear lift: maps a parameter-shaped vector u to the path-shaped
/// vector of sums of u along each path (including the starting bias entry
/// for bias paths). The embedding of entrywise-exp(u) equals entrywise-exp
/// of this map applied to u.
pub fn apply_path_sum<S: Scalar>(u: &Params<S>, budget: u64) -> Result<Vec<S>> {
    let index = PathIndex::new(u.arch(), budget)?;
    let levels = suffix_edges(u, &index, |a, b| a.add(b), S::zero());
    Ok(assemble_path_vector(u, &index, &levels, |a, b| a.add(b)))
}

/// Reference to a single weight or bias coordinate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ParamRef {
    Weight {
        layer: usize,
        to: usize,
        from: usize,
    },
    Bias {
        layer: usize,
        neuron: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportReport {
    pub admissible: bool,
    /// Union of parameters lying on some nonzero-valued path equals the
    /// support of the parameter vector.
    pub equality: bool,
    /// Parameters in the support reached by no nonzero-valued path.
    pub violations: Vec<ParamRef>,
}

/// Compare the support of the embedding (pulled back to parameters) with the
/// support of the parameters. Inclusion always holds; equality characterizes
/// admissibility together with the dead-neuron check.
pub fn support_check<S: Scalar>(params: &Params<S>) -> Result<SupportReport> {
    let emb = embed(params)?;
    let depth = params.depth();
    let widths = params.arch().widths();
    let mut on_nonzero_path: std::collections::BTreeSet<ParamRef> = Default::default();
    for (i, value) in emb.phi.iter().enumerate() {
        if value.is_zero() {
            continue;
        }
        let p = emb.index.decode(i);
        for (offset, pair) in p.neurons.windows(2).enumerate() {
            on_nonzero_path.insert(ParamRef::Weight {
                layer: p.start_layer + offset + 1,
                to: pair[1],
                from: pair[0],
            });
        }
        if p.start_layer >= 1 {
            on_nonzero_path.insert(ParamRef::Bias {
                layer: p.start_layer,
                neuron: p.neurons[0],
            });
        }
    }
    let mut violations = Vec::new();
    for l in 1..=depth {
        for to in 0..widths[l] {
            for from in 0..widths[l - 1] {
                if !params.weight(l).at(to, from).is_zero() {
                    let r = ParamRef::Weight { layer: l, to, from };
                    if !on_nonzero_path.contains(&r) {
                        violations.push(r);
                    }
                }
            }
            if !params.bias(l)[to].is_zero() {
                let r = ParamRef::Bias { layer: l, neuron: to };
                if !on_nonzero_path.contains(&r) {
                    violations.push(r);
                }
            }
        }
    }
    Ok(SupportReport {
        admissible: params.is_admissible(),
        equality: violations.is_empty(),
        violations,
    })
}

/// Chain activation indicators: for each hidden chain q the product of the
/// activation statuses along it, with a constant 1 appended. Entries are
/// exact 0/1 regardless of the scalar mode.
pub fn chain_activations<S: Scalar>(trace: &ForwardTrace<S>, chains: &ChainIndex) -> Vec<bool> {
    let mut out = Vec::with_capacity(chains.total() + 1);
    for q in 0..chains.total() {
        let (start, chain) = chains.decode(q);
        let mut on = true;
        for (offset, &n) in chain.iter().enumerate() {
            // statuses[l-1] is hidden layer l
            if !trace.statuses[start + offset - 1][n] {
                on = false;
                break;
            }
        }
        out.push(on);
    }
    out.push(true);
    out
}

/// Evaluate one output coordinate of the bilinear expression
/// <restriction(alpha) (x) x, input block> + <alpha, hidden block> on an
/// arbitrary path-shaped vector. `alpha` has length |Q| + 1.
pub fn output_linear_form<S: Scalar>(
    index: &PathIndex,
    chains: &ChainIndex,
    phi: &[S],
    alpha: &[bool],
    x: &[S],
    output: usize,
) -> S {
    let mut acc = S::zero();
    let q1 = chains.first_block();
    for q in 0..q1 {
        if !alpha[q] {
            continue;
        }
        let (_, chain) = chains.decode(q);
        for (mu, xv) in x.iter().enumerate() {
            let v = &phi[index.full_path(mu, &chain, output)];
            if !v.is_zero() {
                acc = acc.add(&v.mul(xv));
            }
        }
    }
    for q in 0..chains.total() {
        if !alpha[q] {
            continue;
        }
        let (start, chain) = chains.decode(q);
        acc = acc.add(&phi[index.bias_path(start, &chain, output)]);
    }
    acc.add(&phi[index.output_bias_path(output)])
}

/// Realized function through the embedding: bilinear in (activations, x) and
/// linear in the embedding. Requires depth >= 2.
pub fn embedding_realization<S: Scalar>(
    emb: &Embedding<S>,
    alpha: &[bool],
    x: &[S],
) -> Result<Vec<S>> {
    if emb.index.depth() < 2 {
        return Err(CoreError::UnsupportedDepth {
            required: ">= 2".into(),
            actual: emb.index.depth(),
        });
    }
    if alpha.len() != emb.chains.total() + 1 {
        return Err(CoreError::ShapeMismatch(format!(
            "activation vector length {} vs |Q|+1 = {}",
            alpha.len(),
            emb.chains.total() + 1
        )));
    }
    Ok((0..emb.output_dim())
        .map(|eta| output_linear_form(&emb.index, &emb.chains, &emb.phi, alpha, x, eta))
        .collect())
}

/// Same, computing the activations from the network itself.
pub fn embedding_realization_at<S: Scalar>(
    params: &Params<S>,
    emb: &Embedding<S>,
    x: &[S],
) -> Result<Vec<S>> {
    let trace = params.forward(x);
    let alpha = chain_activations(&trace, &emb.chains);
    embedding_realization(emb, &alpha, x)
}

/// Closed-form piecewise-affine expression: the product of the weight
/// matrices interleaved with the activation indicator diagonals, plus the
/// bias terms propagated through the suffix products.
pub fn algebraic_realization<S: Scalar>(params: &Params<S>, x: &[S]) -> Vec<S> {
    let depth = params.depth();
    let trace = params.forward(x);
    let indicator = |l: usize| -> Vec<S> {
        trace.statuses[l - 1]
            .iter()
            .map(|&on| if on { S::one() } else { S::zero() })
            .collect()
    };
    // suffix[l] = W_L I_{L-1} ... W_{l+1} I_l  (as acting to the right of W_l)
    let mut acc = params.weight(depth).clone();
    let mut out: Vec<S> = params.bias(depth).to_vec();
    for l in (1..depth).rev() {
        let scaled = acc.scale_cols(&indicator(l));
        let bias_term = scaled.mul_vec(params.bias(l));
        for (o, b) in out.iter_mut().zip(bias_term) {
            *o = o.add(&b);
        }
        acc = scaled.mat_mul(params.weight(l));
    }
    let main = acc.mul_vec(x);
    for (o, m) in out.iter_mut().zip(main) {
        *o = o.add(&m);
    }
    out
}

/// Check the (output, chain, input) block decomposition covers every path
/// exactly once.
pub fn validate_block_partition(index: &PathIndex, chains: &ChainIndex) -> bool {
    if index.depth() < 2 {
        return true;
    }
    let outputs = index.family_size(index.depth());
    let mut seen = vec![false; index.total()];
    let mut mark = |i: usize| -> bool {
        if seen[i] {
            return false;
        }
        seen[i] = true;
        true
    };
    let inputs = index.family_size(0) / index.family_size(1);
    for eta in 0..outputs {
        for q in 0..chains.first_block() {
            let (_, chain) = chains.decode(q);
            for mu in 0..inputs {
                if !mark(index.full_path(mu, &chain, eta)) {
                    return false;
                }
            }
        }
        for q in 0..chains.total() {
            let (start, chain) = chains.decode(q);
            if !mark(index.bias_path(start, &chain, eta)) {
                return false;
            }
        }
        if !mark(index.output_bias_path(eta)) {
            return false;
        }
    }
    seen.into_iter().all(|b| b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Architecture;
    use crate::scalar::{rat, Rat};

    fn shallow(w1: Vec<Vec<Rat>>, b1: Vec<Rat>, w2: Vec<Vec<Rat>>, b2: Vec<Rat>) -> Params<Rat> {
        let arch = Architecture::new(vec![w1[0].len(), w1.len(), w2.len()]).unwrap();
        Params::new(
            arch,
            vec![Mat::from_rows(w1), Mat::from_rows(w2)],
            vec![b1, b2],
        )
        .unwrap()
    }

    fn abs_net() -> Params<Rat> {
        shallow(
            vec![vec![rat(1, 1)], vec![rat(-1, 1)]],
            vec![rat(0, 1), rat(0, 1)],
            vec![vec![rat(1, 1), rat(1, 1)]],
            vec![rat(0, 1)],
        )
    }

    fn identity_net(t: i64) -> Params<Rat> {
        shallow(
            vec![vec![rat(1, 1)], vec![rat(-1, 1)]],
            vec![rat(-t, 1), rat(t, 1)],
            vec![vec![rat(1, 1), rat(-1, 1)]],
            vec![rat(t, 1)],
        )
    }

    #[test]
    fn abs_embedding_pinned() {
        let emb = embed(&abs_net()).unwrap();
        // Order: full paths through nu1.0 and nu1.1, bias paths, output bias.
        let want = vec![rat(1, 1), rat(-1, 1), rat(0, 1), rat(0, 1), rat(0, 1)];
        assert_eq!(emb.phi(), &want[..]);
        let keys: Vec<String> = (0..emb.index().total()).map(|i| emb.index().key_of(i)).collect();
        assert_eq!(
            keys,
            vec![
                "\u{3bc}0->\u{3bd}1.0->\u{3b7}0",
                "\u{3bc}0->\u{3bd}1.1->\u{3b7}0",
                "b:\u{3bd}1.0->\u{3b7}0",
                "b:\u{3bd}1.1->\u{3b7}0",
                "b:\u{3b7}0",
            ]
        );
    }

    #[test]
    fn identity_family_embedding_pinned() {
        let emb = embed(&identity_net(2)).unwrap();
        let want = vec![rat(1, 1), rat(1, 1), rat(-2, 1), rat(-2, 1), rat(2, 1)];
        assert_eq!(emb.phi(), &want[..]);
    }

    #[test]
    fn depth_one_embedding_lists_weights_then_biases() {
        let arch = Architecture::new(vec![2, 2]).unwrap();
        let net = Params::new(
            arch,
            vec![Mat::from_rows(vec![
                vec![rat(1, 1), rat(2, 1)],
                vec![rat(3, 1), rat(4, 1)],
            ])],
            vec![vec![rat(5, 1), rat(6, 1)]],
        )
        .unwrap();
        let emb = embed(&net).unwrap();
        // Full paths in lex order (mu, eta): w[eta][mu] transposed ordering.
        let want = vec![
            rat(1, 1),
            rat(3, 1),
            rat(2, 1),
            rat(4, 1),
            rat(5, 1),
            rat(6, 1),
        ];
        assert_eq!(emb.phi(), &want[..]);
    }

    #[test]
    fn path_sum_single_hidden_bias() {
        // Widths [1,1,1]; u has a single 1 on the hidden bias.
        let arch = Architecture::new(vec![1, 1, 1]).unwrap();
        let u = Params::new(
            arch,
            vec![
                Mat::from_rows(vec![vec![rat(0, 1)]]),
                Mat::from_rows(vec![vec![rat(0, 1)]]),
            ],
            vec![vec![rat(1, 1)], vec![rat(0, 1)]],
        )
        .unwrap();
        let lifted = apply_path_sum(&u, DEFAULT_PATH_BUDGET).unwrap();
        assert_eq!(lifted, vec![rat(0, 1), rat(1, 1), rat(0, 1)]);
    }

    #[test]
    fn embedding_of_exp_is_exp_of_path_sum() {
        // Strictly positive parameters theta = exp(u).
        let arch = Architecture::new(vec![2, 2, 1]).unwrap();
        let u = Params::new(
            arch.clone(),
            vec![
                Mat::from_rows(vec![vec![0.3, -0.2], vec![0.1, 0.4]]),
                Mat::from_rows(vec![vec![-0.5, 0.2]]),
            ],
            vec![vec![0.7, -0.3], vec![0.25]],
        )
        .unwrap();
        let theta = u.map(|v: &f64| v.exp());
        let emb = embed(&theta).unwrap();
        let lifted = apply_path_sum(&u, DEFAULT_PATH_BUDGET).unwrap();
        for (p, s) in emb.phi().iter().zip(&lifted) {
            assert!((p - s.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn support_check_abs_equality() {
        let rep = support_check(&abs_net()).unwrap();
        assert!(rep.admissible);
        assert!(rep.equality);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn support_check_zero_network() {
        let zero = shallow(
            vec![vec![rat(0, 1)], vec![rat(0, 1)]],
            vec![rat(0, 1), rat(0, 1)],
            vec![vec![rat(0, 1), rat(0, 1)]],
            vec![rat(0, 1)],
        );
        let rep = support_check(&zero).unwrap();
        assert!(!rep.admissible);
        assert!(rep.equality); // both supports empty
    }

    #[test]
    fn support_check_dead_neuron_violation() {
        // nu1.1 has zero outgoing weight; its incoming weight and bias are
        // in the support but on no nonzero path.
        let net = shallow(
            vec![vec![rat(1, 1)], vec![rat(2, 1)]],
            vec![rat(0, 1), rat(3, 1)],
            vec![vec![rat(1, 1), rat(0, 1)]],
            vec![rat(0, 1)],
        );
        let rep = support_check(&net).unwrap();
        assert!(!rep.admissible);
        assert!(!rep.equality);
        assert_eq!(
            rep.violations,
            vec![
                ParamRef::Weight {
                    layer: 1,
                    to: 1,
                    from: 0
                },
                ParamRef::Bias { layer: 1, neuron: 1 },
            ]
        );
    }

    fn deep_fixture() -> Params<Rat> {
        let arch = Architecture::new(vec![2, 3, 2, 2]).unwrap();
        Params::new(
            arch,
            vec![
                Mat::from_rows(vec![
                    vec![rat(1, 2), rat(-1, 1)],
                    vec![rat(2, 1), rat(1, 3)],
                    vec![rat(-3, 2), rat(1, 1)],
                ]),
                Mat::from_rows(vec![
                    vec![rat(1, 1), rat(-1, 2), rat(1, 4)],
                    vec![rat(-2, 1), rat(1, 1), rat(3, 4)],
                ]),
                Mat::from_rows(vec![vec![rat(1, 1), rat(1, 2)], vec![rat(-1, 4), rat(2, 1)]]),
            ],
            vec![
                vec![rat(1, 4), rat(-1, 2), rat(1, 1)],
                vec![rat(-1, 3), rat(1, 5)],
                vec![rat(2, 1), rat(-1, 1)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn three_realizations_agree_exactly() {
        let net = deep_fixture();
        let emb = embed(&net).unwrap();
        let xs = vec![
            vec![rat(0, 1), rat(0, 1)],
            vec![rat(1, 1), rat(-1, 2)],
            vec![rat(-3, 1), rat(2, 1)],
            vec![rat(7, 5), rat(-11, 4)],
        ];
        for x in xs {
            let fwd = net.realization(&x);
            let alg = algebraic_realization(&net, &x);
            let via_emb = embedding_realization_at(&net, &emb, &x).unwrap();
            assert_eq!(fwd, alg);
            assert_eq!(fwd, via_emb);
        }
    }

    #[test]
    fn block_partition_covers_all_paths() {
        for net in [abs_net(), deep_fixture()] {
            let emb = embed(&net).unwrap();
            assert!(validate_block_partition(emb.index(), emb.chains()));
        }
    }

    #[test]
    fn blocks_have_expected_shapes_and_values() {
        let net = abs_net();
        let emb = embed(&net).unwrap();
        let ib = emb.input_block(0);
        assert_eq!((ib.rows(), ib.cols()), (2, 1));
        assert_eq!(*ib.at(0, 0), rat(1, 1));
        assert_eq!(*ib.at(1, 0), rat(-1, 1));
        let hb = emb.hidden_block(0);
        assert_eq!(hb, vec![rat(0, 1), rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn embedding_realization_rejects_depth_one() {
        let arch = Architecture::new(vec![1, 1]).unwrap();
        let net = Params::new(
            arch,
            vec![Mat::from_rows(vec![vec![rat(2, 1)]])],
            vec![vec![rat(1, 1)]],
        )
        .unwrap();
        let emb = embed(&net).unwrap();
        assert!(matches!(
            embedding_realization_at(&net, &emb, &[rat(1, 1)]),
            Err(CoreError::UnsupportedDepth { .. })
        ));
        // Forward and algebraic still agree at depth 1.
        assert_eq!(
            net.realization(&[rat(3, 1)]),
            algebraic_realization(&net, &[rat(3, 1)])
        );
    }
}
