mod common;

use std::f64::consts::PI;

use common::{c, space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zflab::fock::{FockState, RapidityGrid};
use zflab::ising::*;
use zflab::kinematics::ModelParams;
use zflab::{Error, C64, I};

fn random_upper(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| c(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..PI))).collect()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Pfaffian by expansion along the first row.
fn pfaffian_expansion(a: &[C64], idx: &[usize], n: usize) -> C64 {
    if idx.is_empty() {
        return c(1.0, 0.0);
    }
    let first = idx[0];
    let mut acc = c(0.0, 0.0);
    for (j, &other) in idx.iter().enumerate().skip(1) {
        let rest: Vec<usize> = idx.iter().copied().filter(|&x| x != first && x != other).collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        acc += sign * a[first * n + other] * pfaffian_expansion(a, &rest, n);
    }
    acc
}

fn half_tanh(a: C64, b: C64) -> C64 {
    ((a - b) / 2.0).tanh()
}

/// `2^k k! Π_{i<j} tanh((ζ_i − ζ_j)/2)` for `2k+1` arguments.
fn schur_product(z: &[C64]) -> C64 {
    let k = z.len() / 2;
    let mut p = c(2f64.powi(k as i32) * (1..=k).product::<usize>() as f64, 0.0);
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            p *= half_tanh(z[i], z[j]);
        }
    }
    p
}

#[test]
fn pfaffian_path_equals_brute_force_on_s3_and_s5() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [3, 5] {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let z = random_upper(&mut rng, n);
            worst = worst.max(rel(pfaffian_sum(&z).unwrap(), permutation_sum_brute(&z).unwrap()));
        }
        assert!(worst < 1e-12, "n = {n}: {worst:e}");
    }
}

#[test]
fn permutation_sum_matches_tanh_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [1, 3, 5, 7] {
        for _ in 0..20 {
            let z = random_upper(&mut rng, n);
            let got = pfaffian_sum(&z).unwrap();
            assert!(rel(got, schur_product(&z)) < 1e-11, "n = {n}");
        }
    }
    let z = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
    let brute = permutation_sum_brute(&z).unwrap();
    assert!(rel(pfaffian_sum(&z).unwrap(), brute) < 1e-14);
    assert!(rel(brute, schur_product(&z)) < 1e-14);
}

#[test]
fn pfaffian_matches_row_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [2, 4, 6, 8] {
        let mut a = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[i * n + j] = v;
                a[j * n + i] = -v;
            }
        }
        let idx: Vec<usize> = (0..n).collect();
        let expect = pfaffian_expansion(&a, &idx, n);
        let got = pfaffian(&mut a.clone(), n);
        assert!(rel(got, expect) < 1e-12, "n = {n}");
        // Pf² = det is not needed; odd sizes vanish.
    }
    assert_eq!(pfaffian(&mut [c(0.0, 0.0); 9], 3), c(0.0, 0.0));
}

#[test]
fn permutation_sum_is_antisymmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let z = random_upper(&mut rng, 5);
    let base = pfaffian_sum(&z).unwrap();
    for (a, b) in [(0, 1), (1, 4), (2, 3)] {
        let mut w = z.clone();
        w.swap(a, b);
        assert!(rel(pfaffian_sum(&w).unwrap(), -base) < 1e-12);
    }
}

#[test]
fn permutation_sum_rejects_even_count_and_poles() {
    assert!(matches!(pfaffian_sum(&[c(0.0, 0.0); 2]), Err(Error::InvalidParameter(_))));
    assert!(matches!(permutation_sum_brute(&[c(0.0, 0.0); 4]), Err(Error::InvalidParameter(_))));
    let z = [c(0.3, 0.0), c(0.3, PI), c(-1.0, 0.5)];
    assert!(matches!(pfaffian_sum(&z), Err(Error::Pole(_))));
}

#[test]
fn even_table_has_closed_form() {
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 9, 2);
    let fam = even_family(&g, 1.0);
    let t = boundary_table(&fam, &sp, Prescription::default()).unwrap();
    let x = sp.grid().points();
    let gt = |w: f64| gtilde(&g, c(w, 0.0));
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            let (a, b) = (x[i], x[j]);
            let f11 = -I * ((a - b) / 2.0).cosh() * gt(a.cosh() - b.cosh());
            let f20 = ((a - b) / 2.0).sinh() * gt(a.cosh() + b.cosh());
            let f02 = ((a - b) / 2.0).sinh() * gt(-(a.cosh() + b.cosh()));
            worst = worst.max((t.value(1, 1, &[i], &[j]) - f11).norm());
            worst = worst.max((t.value(2, 0, &[i, j], &[]) - f20).norm());
            worst = worst.max((t.value(0, 2, &[], &[i, j]) - f02).norm());
        }
    }
    assert!(worst < 1e-14, "{worst:e}");
    assert!(t.get(0, 0).is_none());
}

#[test]
fn even_operator_annihilates_nothing_into_the_vacuum() {
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 9, 3);
    let b = build_operator(&even_family(&g, 1.0), &sp, Sector::Even, Prescription::default()).unwrap();
    let om = FockState::vacuum(&sp);
    let out = b.operator.apply(&om).unwrap();
    assert_eq!(out.sector_norm(0), 0.0);
    assert!(out.sector_norm(2) > 0.0);
    assert_eq!(out.sector_norm(1), 0.0);
    let rep = reality(&b.table);
    assert!(rep.anti_hermitian < 1e-14, "{rep:?}");
}

#[test]
fn odd_tables_are_hermitian() {
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 7, 3);
    for k in 0..=2 {
        let fam = odd_family(&g, 1.0, k);
        let rep = reality(&boundary_table(&fam, &sp, Prescription::OneSided).unwrap());
        assert!(rep.hermitian < 1e-13, "k = {k}: {rep:?}");
    }
}

#[test]
fn principal_value_tables_are_hermitian_up_to_epsilon_squared() {
    // Shifting θ rather than η breaks the mirror by O(ε²).
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 7, 3);
    let fam = odd_family(&g, 1.0, 1);
    let dev = |epsilon: f64| reality(&boundary_table(&fam, &sp, Prescription::PrincipalValue { epsilon }).unwrap()).hermitian;
    let (a, b) = (dev(1e-2), dev(1e-3));
    assert!(b < 1e-5, "{b:e}");
    let ratio = a / b;
    assert!((ratio - 100.0).abs() < 5.0, "ratio {ratio}");
}

#[test]
fn one_sided_diagonal_is_the_discrete_delta() {
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 9, 2);
    let fam = odd_family(&g, 1.0, 1);
    let t = boundary_table(&fam, &sp, Prescription::OneSided).unwrap();
    let x = sp.grid().points();
    let w = sp.grid().weights();
    let f1 = |th: f64| gtilde(&g, c(th.cosh(), 0.0));
    // θ = (θ_i, θ_j), η = θ_i: the pole of the pair (1, 3) leaves F_1(θ_j).
    for (i, j) in [(2, 6), (4, 0), (1, 7)] {
        let got = t.value(2, 1, &[i, j], &[i]);
        let expect = f1(x[j]) / w[i];
        assert!(rel(got, expect) < 1e-12, "({i},{j}): {got} vs {expect}");
        assert!(rel(t.value(2, 1, &[j, i], &[i]), -expect) < 1e-12);
    }
    // one θ against η = (θ_i, η_j): F_1 evaluated at η_j + iπ.
    for (i, j) in [(3, 7), (5, 1)] {
        let got = t.value(1, 2, &[i], &[i, j]);
        let expect = -gtilde(&g, c(-x[j].cosh(), 0.0)) / w[i];
        assert!(rel(got, expect) < 1e-12, "({i},{j}): {got} vs {expect}");
    }
}

#[test]
fn one_sided_neighbours_carry_the_difference_correction() {
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 9, 2);
    let fam = odd_family(&g, 1.0, 1);
    let t = boundary_table(&fam, &sp, Prescription::OneSided).unwrap();
    let x = sp.grid().points();
    let plain = |i: usize, j: usize, e: usize| fam.eval(&[c(x[i], 0.0), c(x[j], 0.0), c(x[e], PI)]).unwrap();
    for (i, j, e) in [(2, 7, 3), (5, 0, 4), (4, 1, 5)] {
        assert!(rel(t.value(2, 1, &[i, j], &[e]), 1.5 * plain(i, j, e)) < 1e-12);
    }
    // two steps away nothing changes
    assert!(rel(t.value(2, 1, &[2, 7], &[4]), plain(2, 7, 4)) < 1e-12);
    let pv = boundary_table(&fam, &sp, Prescription::PrincipalValue { epsilon: 1e-3 }).unwrap();
    assert!(rel(pv.value(2, 1, &[2, 7], &[3]), plain(2, 7, 3)) < 1e-12);
}

#[test]
fn principal_value_diagonal_is_the_shift_average() {
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 9, 2);
    let fam = odd_family(&g, 1.0, 1);
    let eps = 1e-3;
    let t = boundary_table(&fam, &sp, Prescription::PrincipalValue { epsilon: eps }).unwrap();
    let x = sp.grid().points();
    let (i, j) = (3, 6);
    let at = |th: C64, other: C64| fam.eval(&[th, other, c(x[i], PI)]).unwrap();
    // raw entries for both θ orders, then the antisymmetrised value
    let raw_ij = 0.5 * (at(c(x[i], eps), c(x[j], 0.0)) + at(c(x[i], -eps), c(x[j], 0.0)));
    let raw_ji = 0.5 * (fam.eval(&[c(x[j], 0.0), c(x[i], eps), c(x[i], PI)]).unwrap() + fam.eval(&[c(x[j], 0.0), c(x[i], -eps), c(x[i], PI)]).unwrap());
    let expect = 0.5 * (raw_ij - raw_ji);
    assert!(rel(t.value(2, 1, &[i, j], &[i]), expect) < 1e-12);
}

#[test]
fn epsilon_study_reports_against_the_smallest_epsilon() {
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 9, 2);
    let fam = odd_family(&g, 1.0, 1);
    let rows = epsilon_study(&fam, &sp, &[1e-2, 1e-3, 1e-4]).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2].max_rel_change, 0.0);
    assert!(rows[0].max_rel_change > rows[1].max_rel_change);
    assert!(rows[1].max_rel_change < 1e-3, "{rows:?}");
    assert!(epsilon_study(&fam, &sp, &[0.0]).is_err());
    assert!(epsilon_study(&fam, &sp, &[]).is_err());
}

#[test]
fn builds_check_model_and_parity() {
    let g = TestFunction1D::new(0.5).unwrap();
    let free = space(ModelParams::free(1.0), 3.0, 7, 2);
    assert!(matches!(
        build_operator(&even_family(&g, 1.0), &free, Sector::Even, Prescription::default()),
        Err(Error::ShapeMismatch(_))
    ));
    let sp = space(ModelParams::ising(1.0), 3.0, 7, 2);
    assert!(matches!(
        build_operator(&even_family(&g, 1.0), &sp, Sector::Odd, Prescription::default()),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        build_operator(&odd_family(&g, 1.0, 1), &sp, Sector::Even, Prescription::default()),
        Err(Error::InvalidParameter(_))
    ));
    assert!(require_ising(&free).is_err());
    assert!(require_ising(&sp).is_ok());
    assert_eq!("ODD".parse::<Sector>().unwrap(), Sector::Odd);
    assert!("both".parse::<Sector>().is_err());
}

#[test]
fn odd_build_caps_orders_at_the_truncation() {
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 5, 2);
    let b = build_operator(&odd_family(&g, 1.0, 3), &sp, Sector::Odd, Prescription::default()).unwrap();
    let orders: Vec<usize> = b.total_order_norms().keys().copied().collect();
    assert_eq!(orders, vec![1, 3]);
    assert!(b.per_order_norms.iter().all(|o| o.m <= 2 && o.n <= 2));
}

#[test]
fn even_locality_is_mirror_symmetric_and_fails_inside() {
    let g = TestFunction1D::new(0.5).unwrap();
    let sp = space(ModelParams::ising(1.0), 3.0, 25, 3);
    let b = build_operator(&even_family(&g, 1.0), &sp, Sector::Even, Prescription::default()).unwrap();
    let r = locality_battery(&b.operator, &LocalityGeometry::new(0.5), 1).unwrap();
    assert!((r.left_field - r.right_field).abs() < 1e-10 * r.left_field.max(1e-300), "{r:?}");
    assert!(r.negative_control > 0.1, "{r:?}");
    assert!(r.left_field < 0.1 * r.negative_control, "{r:?}");
}

#[test]
fn prescription_serializes_with_a_tag() {
    let s = serde_json::to_string(&Prescription::OneSided).unwrap();
    assert_eq!(s, r#"{"kind":"one_sided"}"#);
    let p: Prescription = serde_json::from_str(r#"{"kind":"principal_value","epsilon":0.001}"#).unwrap();
    assert_eq!(p, Prescription::PrincipalValue { epsilon: 1e-3 });
}

#[test]
fn grid_spacing_is_uniform() {
    let g = RapidityGrid::symmetric(4.0, 17).unwrap();
    assert!((g.spacing() - 0.5).abs() < 1e-15);
}
