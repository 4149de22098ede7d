mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zflab::fock::symmetrizer::{self, Block, Convention};
use zflab::fock::tensor::{decode, encode, permutations};
use zflab::fock::{FockOperator, FockState, Monomial, Side};
use zflab::kinematics::{two_momentum, ModelParams, SpacetimePoint};
use zflab::{Error, C64};

fn random_tensor(len: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

#[test]
fn bosonic_symmetrizer_on_basis_tensor() {
    let sp = space(ModelParams::free(1.0), 2.0, 5, 2);
    let mut e = vec![c(0.0, 0.0); 25];
    e[5 + 3] = c(1.0, 0.0);
    let p = symmetrizer::symmetrize(&sp, &e, 2).unwrap();
    for (k, v) in p.iter().enumerate() {
        let want = if k == 8 || k == 16 { 0.5 } else { 0.0 };
        assert_eq!(*v, c(want, 0.0));
    }
}

#[test]
fn antisymmetrizer_kills_symmetric_tensors() {
    let sp = space(ModelParams::ising(1.0), 2.0, 5, 2);
    let mut e = vec![c(0.0, 0.0); 25];
    e[5 + 3] = c(1.0, 0.0);
    e[3 * 5 + 1] = c(1.0, 0.0);
    let p = symmetrizer::symmetrize(&sp, &e, 2).unwrap();
    assert!(max_abs(&p) == 0.0);
}

#[test]
fn symmetrizer_is_an_orthogonal_projector() {
    for params in all_models() {
        let sp = space(params, 3.0, 5, 4);
        for n in 1..=4 {
            let f = random_tensor(sp.dim(n), 11 + n as u64);
            let g = random_tensor(sp.dim(n), 97 + n as u64);
            let pf = symmetrizer::symmetrize(&sp, &f, n).unwrap();
            let ppf = symmetrizer::symmetrize(&sp, &pf, n).unwrap();
            assert!(max_abs_diff(&pf, &ppf) < 1e-12 * max_abs(&pf).max(1.0), "{params:?} n={n}");
            let pg = symmetrizer::symmetrize(&sp, &g, n).unwrap();
            let lhs = sp.inner(n, &g, &pf);
            let rhs = sp.inner(n, &pg, &f);
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "{params:?} n={n}");
        }
    }
}

/// Reduced word of a permutation, peeling off either the first or the last
/// descent of its image array.
fn reduced_word(perm: &[usize], first: bool) -> Vec<usize> {
    let mut p = perm.to_vec();
    let mut word = Vec::new();
    loop {
        let descents: Vec<usize> = (0..p.len().saturating_sub(1)).filter(|&j| p[j] > p[j + 1]).collect();
        let Some(&j) = (if first { descents.first() } else { descents.last() }) else { break };
        p.swap(j, j + 1);
        word.insert(0, j);
    }
    word
}

#[test]
fn permutation_representation_is_independent_of_reduced_word() {
    let sp = space(ModelParams::sinh_gordon(1.0, 1.0).unwrap(), 2.5, 4, 4);
    let f = random_tensor(sp.dim(4), 5);
    for perm in permutations(4) {
        let direct = symmetrizer::permute(&sp, &f, Block::whole(4), &perm, Convention::Standard);
        for first in [true, false] {
            let word = reduced_word(&perm, first);
            let mut g = f.clone();
            for &j in word.iter().rev() {
                g = symmetrizer::transposition(&sp, &g, 4, j, Convention::Standard);
            }
            assert!(max_abs_diff(&direct, &g) < 1e-13, "perm {perm:?}");
        }
    }
}

#[test]
fn adjacent_transposition_matches_definition() {
    let sp = space(ModelParams::sinh_gordon(1.0, 0.5).unwrap(), 2.0, 4, 3);
    let f = random_tensor(sp.dim(3), 8);
    let g = symmetrizer::transposition(&sp, &f, 3, 1, Convention::Standard);
    let th = sp.grid().points();
    let s = sp.scattering();
    let mut d = [0usize; 3];
    for k in 0..sp.dim(3) {
        decode(k, 4, &mut d);
        let swapped = encode(&[d[0], d[2], d[1]], 4);
        let want = s.eval_real(th[d[2]] - th[d[1]]) * f[swapped];
        assert!((g[k] - want).norm() < 1e-14);
    }
}

#[test]
fn shuffle_matches_full_symmetrizer_on_block_symmetric_tensors() {
    for params in all_models() {
        let sp = space(params, 2.0, 4, 4);
        for (m, p) in [(1usize, 2usize), (2, 2), (1, 3), (3, 1)] {
            let q = m + p;
            let raw = random_tensor(sp.dim(q), (m * 10 + p) as u64);
            let t = symmetrizer::symmetrize_block(&sp, &raw, Block { pre: 1, rank: m, post: sp.dim(p) }, Convention::Standard).unwrap();
            let t = symmetrizer::symmetrize_block(&sp, &t, Block { pre: sp.dim(m), rank: p, post: 1 }, Convention::Standard).unwrap();
            let full = symmetrizer::symmetrize(&sp, &t, q).unwrap();
            let fast = symmetrizer::shuffle(&sp, &t, m, p);
            assert!(max_abs_diff(&full, &fast) < 1e-13, "{params:?} ({m},{p})");
        }
    }
}

#[test]
fn coincident_rapidities_vanish_when_s_at_zero_is_minus_one() {
    let sp = space(ModelParams::sinh_gordon(1.0, 1.0).unwrap(), 2.0, 5, 3);
    let psi = FockState::random(&sp, 3, 1).unwrap();
    assert!(psi.amplitude(&[2, 2]).norm() < 1e-15);
    assert!(psi.amplitude(&[1, 3, 1]).norm() < 1e-15);
}

#[test]
fn symmetrizer_respects_memory_budget() {
    use zflab::fock::{FockSpace, RapidityGrid};
    use zflab::kinematics::ScatteringFunction;
    let grid = RapidityGrid::symmetric(2.0, 10).unwrap();
    let s = ScatteringFunction::new(ModelParams::ising(1.0));
    assert!(matches!(FockSpace::with_budget(grid.clone(), 4, s, 1000), Err(Error::Dimension(_))));
    let sp = FockSpace::with_budget(grid, 2, s, 1000).unwrap();
    assert!(matches!(symmetrizer::symmetrize(&sp, &vec![c(0.0, 0.0); 10_000], 4), Err(Error::Dimension(_))));
}

#[test]
fn vacuum_and_delta_normalization() {
    for params in all_models() {
        let sp = space(params, 2.0, 6, 3);
        let omega = FockState::vacuum(&sp);
        for i in 0..6 {
            assert_eq!(omega.annihilate(i).norm(), 0.0);
            for j in 0..6 {
                let v = omega.inner(&omega.create(j).annihilate(i));
                let want = if i == j { 1.0 / sp.grid().weight(i) } else { 0.0 };
                assert!((v - c(want, 0.0)).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn zf_exchange_relations() {
    for params in all_models() {
        let sp = space(params, 3.0, 5, 4);
        let psi = FockState::random(&sp, 2, 42).unwrap();
        let th = sp.grid().points().to_vec();
        let s = |x: f64| sp.scattering().eval_real(x);
        for i in 0..5 {
            for j in 0..5 {
                let lhs = psi.create(j).annihilate(i);
                let mut rhs = psi.annihilate(i).create(j).scaled(s(th[j] - th[i]));
                if i == j {
                    rhs.axpy(c(1.0 / sp.grid().weight(i), 0.0), &psi);
                }
                assert!(rel_diff(&lhs, &rhs) < 1e-12, "{params:?} mixed {i} {j}");

                let a = psi.create(j).create(i);
                let b = psi.create(i).create(j).scaled(s(th[i] - th[j]));
                let scale = psi.norm() / (sp.grid().weight(i) * sp.grid().weight(j));
                assert!(a.sub(&b).norm() < 1e-12 * scale, "{params:?} creators {i} {j}");

                let full = FockState::random(&sp, 4, 7).unwrap();
                let a = full.annihilate(j).annihilate(i);
                let b = full.annihilate(i).annihilate(j).scaled(s(th[i] - th[j]));
                let scale = full.norm() / sp.grid().weight(i).min(sp.grid().weight(j));
                assert!(a.sub(&b).norm() < 1e-12 * scale, "{params:?} annihilators {i} {j}");
            }
        }
    }
}

#[test]
fn free_model_reproduces_ccr() {
    let sp = space(ModelParams::free(1.0), 2.0, 5, 4);
    let psi = FockState::random(&sp, 2, 3).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let comm = psi.create(j).annihilate(i).sub(&psi.annihilate(i).create(j));
            let want = if i == j { psi.scaled(c(1.0 / sp.grid().weight(i), 0.0)) } else { FockState::zero(&sp) };
            assert!(comm.sub(&want).norm() < 1e-12);
            let comm = psi.create(j).create(i).sub(&psi.create(i).create(j));
            assert!(comm.norm() < 1e-12);
        }
    }
}

#[test]
fn creation_and_annihilation_are_adjoint() {
    for (k, params) in all_models().into_iter().enumerate() {
        let sp = space(params, 2.0, 5, 4);
        let psi = FockState::random(&sp, 3, 100 + k as u64).unwrap();
        let phi = FockState::random(&sp, 4, 200 + k as u64).unwrap();
        for i in 0..5 {
            let a = psi.create(i).inner(&phi);
            let b = psi.inner(&phi.annihilate(i));
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
        }
    }
}

#[test]
fn dropped_norm_of_top_sector_creation_is_exact() {
    for params in all_models() {
        let small = space(params, 2.0, 5, 2);
        let big = space(params, 2.0, 5, 3);
        let psi = FockState::random(&small, 2, 9).unwrap();
        let lifted = FockState::from_sectors(&big, psi.sectors().to_vec()).unwrap();
        for i in 0..5 {
            let (_, dropped) = psi.create_with_loss(i);
            let explicit = lifted.create(i).sector_norm(3);
            assert!((dropped - explicit).abs() < 1e-12 * explicit.max(1.0), "{params:?}");
        }
    }
}

#[test]
fn translations() {
    for params in all_models() {
        let sp = space(params, 2.0, 5, 3);
        let psi = FockState::random(&sp, 3, 17).unwrap();
        assert!(rel_diff(&psi.translate(&SpacetimePoint::ORIGIN), &psi) == 0.0);
        let x = SpacetimePoint::new(0.4, -1.1);
        let y = SpacetimePoint::new(-0.3, 0.7);
        let tx = psi.translate(&x);
        assert!((tx.norm() - psi.norm()).abs() < 1e-12);
        assert!(rel_diff(&tx.translate(&y), &psi.translate(&x.add(&y))) < 1e-12);
    }
    let sp = space(ModelParams::ising(2.0), 2.0, 5, 2);
    let mut e = FockState::zero(&sp);
    e.sector_mut(1)[3] = c(1.0, 0.0);
    let t = 0.8;
    let moved = e.translate(&SpacetimePoint::new(t, 0.0));
    let (p0, _) = two_momentum(sp.grid().theta(3), &sp.scattering().params);
    assert!((moved.sector(1)[3] - C64::from_polar(1.0, p0 * t)).norm() < 1e-14);
}

#[test]
fn reflection_is_an_antiunitary_involution() {
    for params in all_models() {
        let sp = space(params, 2.0, 5, 3);
        let psi = FockState::random(&sp, 3, 23).unwrap();
        let phi = FockState::random(&sp, 3, 24).unwrap();
        assert!(rel_diff(&psi.reflect().reflect(), &psi) < 1e-14);
        let omega = FockState::vacuum(&sp);
        assert!(rel_diff(&omega.reflect(), &omega) == 0.0);
        assert!(psi.reflect().asymmetry().unwrap() < 1e-12);
        let a = psi.reflect().inner(&phi.reflect());
        assert!((a - phi.inner(&psi)).norm() < 1e-12);
        assert!(psi.reflect().amplitude(&[0, 1, 4]) == psi.amplitude(&[4, 1, 0]).conj());
    }
}

#[test]
fn boosts() {
    let sp = space(ModelParams::sinh_gordon(1.0, 1.0).unwrap(), 2.0, 9, 2);
    let psi = FockState::random(&sp, 2, 5).unwrap();
    let h = sp.grid().spacing();
    assert!(matches!(psi.boost(0.3 * h), Err(Error::BoostCommensurability { .. })));
    let (b, dropped) = psi.boost(2.0 * h).unwrap();
    assert!(dropped > 0.0);
    assert!(b.asymmetry().unwrap() < 1e-12);
    assert_eq!(b.amplitude(&[5, 7]), psi.amplitude(&[3, 5]));
    let (zero_shift, d0) = psi.boost_steps(0);
    assert_eq!(d0, 0.0);
    assert!(rel_diff(&zero_shift, &psi) == 0.0);
}

#[test]
fn operator_leaves_match_state_operations() {
    for params in all_models() {
        let sp = space(params, 2.0, 5, 3);
        let psi = FockState::random(&sp, 3, 31).unwrap();
        for i in [0, 2, 4] {
            let a = FockOperator::creator(&sp, i).apply(&psi).unwrap();
            assert!(rel_diff(&a, &psi.create(i)) < 1e-13);
            let a = FockOperator::annihilator(&sp, i).apply(&psi).unwrap();
            assert!(rel_diff(&a, &psi.annihilate(i)) < 1e-13);
        }
        let x = SpacetimePoint::new(0.2, 0.5);
        let t = FockOperator::translation(&sp, x).apply(&psi).unwrap();
        assert!(rel_diff(&t, &psi.translate(&x)) == 0.0);
    }
}

fn check_adjoint(op: &FockOperator, seed: u64) {
    let sp = op.space();
    let psi = FockState::random(sp, sp.n_max(), seed).unwrap();
    let phi = FockState::random(sp, sp.n_max(), seed + 1).unwrap();
    let a = op.apply(&psi).unwrap().inner(&phi);
    let b = psi.inner(&op.adjoint().apply(&phi).unwrap());
    assert!((a - b).norm() < 1e-11 * a.norm().max(1.0), "{a} vs {b}");
}

#[test]
fn adjoint_of_every_node_kind() {
    for params in all_models() {
        let sp = space(params, 2.0, 4, 3);
        let m = Monomial::new(&sp, 2, 1, Side::Left, random_tensor(64, 1)).unwrap();
        let r = Monomial::new(&sp, 1, 2, Side::Right, random_tensor(64, 2)).unwrap();
        let terms = FockOperator::from_monomials(&sp, vec![m, r]);
        check_adjoint(&terms, 10);
        let dense = terms.to_dense().unwrap();
        check_adjoint(&dense, 11);
        let prod = terms.times(&FockOperator::creator(&sp, 1)).unwrap();
        check_adjoint(&prod, 12);
        check_adjoint(&prod.reflected(), 13);
        check_adjoint(&prod.scaled(c(0.3, -2.0)).plus(&FockOperator::translation(&sp, SpacetimePoint::new(1.0, 0.2))).unwrap(), 14);
    }
}

#[test]
fn blocks_preserve_the_symmetric_subspace() {
    for params in all_models() {
        let sp = space(params, 2.0, 4, 3);
        let m = Monomial::new(&sp, 2, 1, Side::Left, random_tensor(64, 3)).unwrap();
        let r = Monomial::new(&sp, 1, 1, Side::Right, random_tensor(16, 4)).unwrap();
        let op = FockOperator::from_monomials(&sp, vec![m, r]);
        for (mo, ni) in [(2usize, 1usize), (3, 2), (1, 1), (2, 2)] {
            let b = op.dense_block(mo, ni).unwrap();
            let dn = sp.dim(ni);
            for col in 0..dn {
                let v: Vec<C64> = (0..sp.dim(mo)).map(|r| b[r * dn + col]).collect();
                let pv = symmetrizer::symmetrize(&sp, &v, mo).unwrap();
                assert!(max_abs_diff(&v, &pv) < 1e-12, "{params:?} ({mo},{ni})");
            }
        }
    }
}

#[test]
fn right_monomials_are_reflected_left_monomials() {
    for params in all_models() {
        let sp = space(params, 2.0, 4, 3);
        let m = Monomial::new(&sp, 2, 1, Side::Left, random_tensor(64, 5)).unwrap();
        let left = FockOperator::from_monomials(&sp, vec![m]);
        let via_j = left.reflected();
        let direct = left.reflected_terms().unwrap();
        let psi = FockState::random(&sp, 3, 6).unwrap();
        let a = via_j.apply(&psi).unwrap();
        let b = direct.apply(&psi).unwrap();
        assert!(rel_diff(&a, &b) < 1e-12, "{params:?}");
    }
}

#[test]
fn shape_mismatch_is_reported() {
    let a = space(ModelParams::free(1.0), 2.0, 4, 3);
    let b = space(ModelParams::ising(1.0), 2.0, 4, 3);
    let psi = FockState::random(&b, 1, 1).unwrap();
    assert!(matches!(FockOperator::identity(&a).apply(&psi), Err(Error::ShapeMismatch(_))));
    assert!(matches!(FockOperator::identity(&a).times(&FockOperator::identity(&b)), Err(Error::ShapeMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_symmetrizer_idempotent(seed in 0u64..10_000, b in 0.05f64..3.1, n in 2usize..=4) {
        let sp = space(ModelParams::sinh_gordon(1.0, b).unwrap(), 3.0, 4, 4);
        let f = random_tensor(sp.dim(n), seed);
        let p = symmetrizer::symmetrize(&sp, &f, n).unwrap();
        let pp = symmetrizer::symmetrize(&sp, &p, n).unwrap();
        prop_assert!(max_abs_diff(&p, &pp) < 1e-12);
    }

    #[test]
    fn prop_create_annihilate_adjoint(seed in 0u64..10_000, i in 0usize..5, model in 0usize..5) {
        let sp = space(all_models()[model], 2.0, 5, 3);
        let psi = FockState::random(&sp, 2, seed).unwrap();
        let phi = FockState::random(&sp, 3, seed ^ 0xabcd).unwrap();
        let a = psi.create(i).inner(&phi);
        let b = psi.inner(&phi.annihilate(i));
        prop_assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn prop_translation_unitary(seed in 0u64..10_000, t in -3.0f64..3.0, x in -3.0f64..3.0) {
        let sp = space(ModelParams::sinh_gordon(1.3, 1.0).unwrap(), 2.0, 5, 3);
        let psi = FockState::random(&sp, 3, seed).unwrap();
        let moved = psi.translate(&SpacetimePoint::new(t, x));
        prop_assert!((moved.norm() - psi.norm()).abs() < 1e-12);
    }
}
