//! Seeded generators of exact random networks with controlled structure:
//! generic admissible points, twin-free irreducible points, and points with
//! planted twins or cancelling subsets.

use crate::diagnostics::{find_twins, is_irreducible, Irreducibility, DEFAULT_SUBSET_CAP};
use crate::error::{CoreError, Result};
use crate::linalg::Mat;
use crate::network::{Architecture, Params};
use crate::scalar::{rat, Rat, Scalar};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rat_in(rng: &mut ChaCha8Rng, span: i64, den: i64) -> Rat {
    rat(rng.random_range(-span..=span), den)
}

fn nonzero_rat_in(rng: &mut ChaCha8Rng, span: i64, den: i64) -> Rat {
    loop {
        let v = rat_in(rng, span, den);
        if !v.is_zero() {
            return v;
        }
    }
}

/// Weights are nonzero multiples of 1/8 in [-2, 2], biases multiples of
/// 1/16 in [-1, 1]; every unit is automatically alive.
pub fn random_params(arch: &Architecture, seed: u64) -> Params<Rat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 1..=arch.depth() {
        let rows = arch.width(l);
        let cols = arch.width(l - 1);
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                *m.at_mut(i, j) = nonzero_rat_in(&mut rng, 16, 8);
            }
        }
        weights.push(m);
        biases.push((0..rows).map(|_| rat_in(&mut rng, 16, 16)).collect());
    }
    Params::new(arch.clone(), weights, biases).expect("shapes are consistent by construction")
}

/// First generated point with no nontrivial twin class and a certified
/// irreducibility scan.
pub fn random_no_twin_irreducible(arch: &Architecture, seed: u64) -> Result<Params<Rat>> {
    for attempt in 0u64..64 {
        let p = random_params(arch, seed.wrapping_add(attempt * 0x9e37_79b9));
        if find_twins(&p).has_twins() {
            continue;
        }
        let report = is_irreducible(&p, DEFAULT_SUBSET_CAP);
        if report.verdict == Irreducibility::Irreducible {
            return Ok(p);
        }
    }
    Err(CoreError::Sampling(
        "no twin-free irreducible point found in 64 draws".into(),
    ))
}

/// Overwrite the extended incoming vector of `nu2` with `lambda` times the
/// one of `nu1`.
pub fn plant_twin(p: &mut Params<Rat>, layer: usize, nu1: usize, nu2: usize, lambda: &Rat) {
    assert!(!lambda.is_zero(), "twin scale must be nonzero");
    for j in 0..p.arch().width(layer - 1) {
        let w = p.weight(layer).at(nu1, j).mul(lambda);
        *p.weight_mut(layer).at_mut(nu2, j) = w;
    }
    p.bias_mut(layer)[nu2] = p.bias(layer)[nu1].mul(lambda);
}

/// A generic point with one twin pair planted in the first hidden layer;
/// returns the pair. `positive` picks the orientation of the scale.
pub fn random_with_planted_twin(
    arch: &Architecture,
    seed: u64,
    positive: bool,
) -> (Params<Rat>, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);
    let mut p = random_params(arch, seed);
    let mut lambda = rat(rng.random_range(1..=6), 2);
    if !positive {
        lambda = lambda.neg();
    }
    plant_twin(&mut p, 1, 0, 1, &lambda);
    (p, 0, 1)
}

/// A twin-free network whose first two units of the given hidden layer form
/// a cancelling subset: their weight rows are parallel with different
/// biases, and the next layer's columns are balanced to cancel the pair.
pub fn random_reducible_no_twin(
    arch: &Architecture,
    seed: u64,
    layer: usize,
) -> Result<(Params<Rat>, usize, Vec<usize>)> {
    assert!(layer >= 1 && layer < arch.depth());
    assert!(arch.width(layer) >= 2);
    for attempt in 0u64..64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt * 0x85eb_ca6b));
        let mut p = random_params(arch, seed.wrapping_add(attempt * 0xc2b2_ae35));
        let c = nonzero_rat_in(&mut rng, 4, 2);
        for j in 0..arch.width(layer - 1) {
            let w = p.weight(layer).at(0, j).mul(&c);
            *p.weight_mut(layer).at_mut(1, j) = w;
        }
        // Different bias ratio, so the extended rows are not collinear.
        let b1 = p.bias(layer)[0].mul(&c).add(&nonzero_rat_in(&mut rng, 8, 8));
        p.bias_mut(layer)[1] = b1;
        for i in 0..arch.width(layer + 1) {
            let v0 = p.weight(layer + 1).at(i, 0).clone();
            *p.weight_mut(layer + 1).at_mut(i, 1) = v0.neg().div(&c).unwrap();
        }
        if find_twins(&p).has_twins() || !p.is_admissible() {
            continue;
        }
        return Ok((p, layer, vec![0, 1]));
    }
    Err(CoreError::Sampling(
        "no twin-free cancelling plant found in 64 draws".into(),
    ))
}

/// A shallow network suited to black-box reconstruction: twin-free,
/// irreducible, every kink hyperplane crossing the probe box with room to
/// spare, clearly separated hyperplanes, and output jumps of honest size.
pub fn random_recoverable(d: usize, h: usize, k: usize, seed: u64) -> Result<Params<Rat>> {
    let arch = Architecture::new(
        [vec![d], vec![h], vec![k]].concat(),
    )?;
    'attempt: for attempt in 0u64..256 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt * 0x27d4_eb2f));
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut w1 = Mat::zeros(h, d);
        for i in 0..h {
            for j in 0..d {
                *w1.at_mut(i, j) = nonzero_rat_in(&mut rng, 16, 8);
            }
        }
        weights.push(w1);
        biases.push((0..h).map(|_| rat_in(&mut rng, 16, 16)).collect::<Vec<_>>());
        let mut w2 = Mat::zeros(k, h);
        for i in 0..k {
            for j in 0..h {
                *w2.at_mut(i, j) = nonzero_rat_in(&mut rng, 8, 4);
            }
        }
        weights.push(w2);
        biases.push((0..k).map(|_| rat_in(&mut rng, 8, 8)).collect::<Vec<_>>());
        let p = Params::new(arch.clone(), weights, biases)?;

        // Normalized plane coordinates (w, b) / ||w||, signs fixed.
        let planes: Vec<Vec<f64>> = (0..h)
            .map(|nu| {
                let mut v: Vec<f64> = (0..d).map(|j| p.weight(1).at(nu, j).to_f64()).collect();
                v.push(p.bias(1)[nu].to_f64());
                let n = v[..d].iter().map(|a| a * a).sum::<f64>().sqrt();
                let sign = v
                    .iter()
                    .find(|a| a.abs() > 1e-12)
                    .map(|a| a.signum())
                    .unwrap_or(1.0);
                v.iter().map(|a| a * sign / n).collect()
            })
            .collect();
        for plane in &planes {
            if plane[d].abs() > 2.0 {
                continue 'attempt;
            }
        }
        for a in 0..h {
            for b in (a + 1)..h {
                let diff: f64 = planes[a]
                    .iter()
                    .zip(&planes[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                if diff < 0.05 {
                    continue 'attempt;
                }
            }
        }
        if find_twins(&p).has_twins() {
            continue;
        }
        if is_irreducible(&p, DEFAULT_SUBSET_CAP).verdict != Irreducibility::Irreducible {
            continue;
        }
        return Ok(p);
    }
    Err(CoreError::Sampling(
        "no recoverable plant found in 256 draws".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::classify_shallow;

    #[test]
    fn random_points_are_admissible() {
        let arch = Architecture::new(vec![2, 3, 2]).unwrap();
        for seed in 0..10 {
            assert!(random_params(&arch, seed).is_admissible());
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let arch = Architecture::new(vec![2, 4, 1]).unwrap();
        assert_eq!(random_params(&arch, 7), random_params(&arch, 7));
        assert_ne!(random_params(&arch, 7), random_params(&arch, 8));
    }

    #[test]
    fn twin_free_irreducible_points_check_out() {
        let arch = Architecture::new(vec![2, 4, 1]).unwrap();
        let p = random_no_twin_irreducible(&arch, 3).unwrap();
        assert!(!find_twins(&p).has_twins());
        assert_eq!(
            is_irreducible(&p, DEFAULT_SUBSET_CAP).verdict,
            Irreducibility::Irreducible
        );
    }

    #[test]
    fn planted_twins_are_found_with_the_right_sign() {
        let arch = Architecture::new(vec![3, 4, 2]).unwrap();
        let (p, nu1, nu2) = random_with_planted_twin(&arch, 11, true);
        let twins = find_twins(&p);
        let class = twins
            .nontrivial()
            .find(|c| c.members.contains(&nu1) && c.members.contains(&nu2))
            .expect("planted pair must be detected");
        assert!(class.has_positive_pair());
        let (q, _, _) = random_with_planted_twin(&arch, 12, false);
        assert!(find_twins(&q)
            .nontrivial()
            .any(|c| c.has_mixed_signs()));
    }

    #[test]
    fn cancelling_plants_cancel_and_stay_twin_free() {
        let arch = Architecture::new(vec![2, 3, 2]).unwrap();
        let (p, layer, subset) = random_reducible_no_twin(&arch, 5, 1).unwrap();
        assert!(!find_twins(&p).has_twins());
        for i in 0..arch.width(layer + 1) {
            for j in 0..arch.width(layer - 1) {
                let mut acc = Rat::zero();
                for &nu in &subset {
                    acc = acc.add(
                        &p.weight(layer + 1)
                            .at(i, nu)
                            .mul(p.weight(layer).at(nu, j)),
                    );
                }
                assert!(acc.is_zero());
            }
        }
        match is_irreducible(&p, DEFAULT_SUBSET_CAP).verdict {
            Irreducibility::Reducible(_) => {}
            other => panic!("plant must scan as reducible, got {other:?}"),
        }
    }

    #[test]
    fn recoverable_plants_have_reachable_kinks() {
        let p = random_recoverable(2, 4, 2, 9).unwrap();
        assert!(p.is_admissible());
        assert!(!find_twins(&p).has_twins());
        for nu in 0..4 {
            let w: Vec<f64> = (0..2).map(|j| p.weight(1).at(nu, j).to_f64()).collect();
            let b = p.bias(1)[nu].to_f64();
            let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(b.abs() / n <= 2.0);
        }
        assert!(matches!(
            classify_shallow(&p).unwrap(),
            crate::diagnostics::ShallowClassification::PsIdentifiableFromBoundedSet
        ));
    }
}
