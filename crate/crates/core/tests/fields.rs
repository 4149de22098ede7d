mod common;

use common::{c, rel_diff, space};
use zflab::fields::*;
use zflab::fock::{FockOperator, FockState};
use zflab::kinematics::{two_momentum, ModelParams, Region, SpacetimePoint};
use zflab::{Error, C64, I};

/// Composite Simpson rule on the support rectangle, independent of the
/// Gauss-Legendre path.
fn simpson_transform(f: &TestFunction2D, theta: f64, params: &ModelParams, sign: f64, n: usize) -> C64 {
    let (p0, p1) = two_momentum(theta, params);
    let (ht, hx) = f.half_widths;
    let simpson_w = |k: usize| if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
    let (dt, dx) = (2.0 * ht / n as f64, 2.0 * hx / n as f64);
    let mut acc = c(0.0, 0.0);
    for a in 0..=n {
        let t = f.center.t - ht + a as f64 * dt;
        for b in 0..=n {
            let x = f.center.x - hx + b as f64 * dx;
            let v = f.eval(&SpacetimePoint::new(t, x));
            if v != 0.0 {
                acc += simpson_w(a) * simpson_w(b) * v * (sign * I * (p0 * t - p1 * x)).exp();
            }
        }
    }
    acc * dt * dx / 9.0
}

#[test]
fn transform_matches_direct_quadrature() {
    let sp = space(ModelParams::sinh_gordon(1.3, 1.0).unwrap(), 3.0, 9, 2);
    let f = TestFunction2D::new(SpacetimePoint::new(0.4, -1.1), (0.3, 0.5)).unwrap();
    let pair = transform_pair(&f, sp.grid(), &sp.scattering().params);
    for (i, &theta) in sp.grid().points().iter().enumerate() {
        let plus = simpson_transform(&f, theta, &sp.scattering().params, 1.0, 800);
        let minus = simpson_transform(&f, theta, &sp.scattering().params, -1.0, 800);
        assert!((pair.plus[i] - plus).norm() < 1e-9 * plus.norm().max(1e-3), "θ = {theta}");
        assert!((pair.minus[i] - minus).norm() < 1e-9 * minus.norm().max(1e-3), "θ = {theta}");
        // real test function
        assert!((pair.minus[i] - pair.plus[i].conj()).norm() < 1e-15);
    }
}

#[test]
fn translated_transform_picks_up_the_phase() {
    let params = ModelParams::free(1.0);
    let sp = space(params, 4.0, 11, 2);
    let f = TestFunction2D::new(SpacetimePoint::new(0.0, 0.2), (0.3, 0.3)).unwrap();
    let a = SpacetimePoint::new(0.7, -1.3);
    let base = transform_pair(&f, sp.grid(), &params);
    let moved = transform_pair(&f.translated(&a), sp.grid(), &params);
    for (i, &theta) in sp.grid().points().iter().enumerate() {
        let (p0, p1) = two_momentum(theta, &params);
        let phase = (I * (p0 * a.t - p1 * a.x)).exp();
        assert!((moved.plus[i] - phase * base.plus[i]).norm() < 1e-12);
        assert!((moved.minus[i] - phase.conj() * base.minus[i]).norm() < 1e-12);
    }
}

#[test]
fn free_commutator_is_a_c_number() {
    let params = ModelParams::free(1.0);
    let sp = space(params, 3.0, 7, 4);
    let (f, g) = geometry::spacelike_pair(0.3, 0.2, 0.1).unwrap();
    let (tf, tg) = (transform_pair(&f, sp.grid(), &params), transform_pair(&g, sp.grid(), &params));
    let w = sp.grid().weights();
    let cnum: C64 = (0..w.len()).map(|i| w[i] * (tf.minus[i] * tg.plus[i] - tg.minus[i] * tf.plus[i])).sum();
    let comm = smeared_field(&f, &sp).unwrap().commutator(&smeared_field(&g, &sp).unwrap()).unwrap();
    for seed in 0..4 {
        let psi = FockState::random(&sp, 2, seed).unwrap();
        let lhs = comm.apply(&psi).unwrap();
        let rhs = psi.scaled(cnum);
        assert!(rel_diff(&lhs, &rhs) < 1e-12, "seed {seed}");
    }
}

#[test]
fn primed_field_equals_reflected_field() {
    for params in common::all_models() {
        let sp = space(params, 3.0, 7, 3);
        let f = TestFunction2D::new(SpacetimePoint::new(0.2, 0.9), (0.3, 0.4)).unwrap();
        let direct = smeared_field_prime(&f, &sp).unwrap();
        let reflected = smeared_field_prime_by_reflection(&f, &sp).unwrap();
        let psi = FockState::random(&sp, 2, 11).unwrap();
        let d = rel_diff(&direct.apply(&psi).unwrap(), &reflected.apply(&psi).unwrap());
        assert!(d < 1e-12, "{:?}: {d:e}", params.kind);
    }
}

#[test]
fn fields_transform_covariantly() {
    let params = ModelParams::ising(1.0);
    let sp = space(params, 3.0, 7, 3);
    let f = TestFunction2D::new(SpacetimePoint::new(0.0, -0.5), (0.3, 0.3)).unwrap();
    let a = SpacetimePoint::new(0.4, 0.6);
    let u = FockOperator::translation(&sp, a);
    let ud = FockOperator::translation(&sp, a.neg());
    let psi = FockState::random(&sp, 2, 5).unwrap();
    let lhs = smeared_field(&f.translated(&a), &sp).unwrap().apply(&psi).unwrap();
    let phi = smeared_field(&f, &sp).unwrap();
    let rhs = u.apply(&phi.apply(&ud.apply(&psi).unwrap()).unwrap()).unwrap();
    assert!(rel_diff(&lhs, &rhs) < 1e-12);
}

#[test]
fn free_fields_commute_at_spacelike_separation_but_ising_fields_do_not() {
    let (f, g) = geometry::spacelike_pair(0.3, 1.0, 0.0).unwrap();
    let free = space(ModelParams::free(1.0), 4.0, 49, 3);
    let a = smeared_field(&f, &free).unwrap();
    let b = smeared_field(&g, &free).unwrap();
    let r = relative_commutator_norm(&a, &b, 1).unwrap();
    assert!(r.relative_norm < 1e-3, "{r:?}");
    let ising = space(ModelParams::ising(1.0), 4.0, 49, 3);
    let a = smeared_field(&f, &ising).unwrap();
    let b = smeared_field(&g, &ising).unwrap();
    let r = relative_commutator_norm(&a, &b, 1).unwrap();
    assert!(r.relative_norm > 1e-2, "{r:?}");
}

#[test]
fn commutator_norm_needs_headroom() {
    let sp = space(ModelParams::free(1.0), 3.0, 5, 2);
    let (f, g) = geometry::spacelike_pair(0.3, 1.0, 0.0).unwrap();
    let a = smeared_field(&f, &sp).unwrap();
    let b = smeared_field(&g, &sp).unwrap();
    assert!(matches!(relative_commutator_norm(&a, &b, 1), Err(Error::Dimension(_))));
    assert!(relative_commutator_norm(&a, &b, 0).is_ok());
    let other = space(ModelParams::free(1.0), 3.0, 7, 2);
    let c2 = smeared_field(&g, &other).unwrap();
    assert!(relative_commutator_norm(&a, &c2, 0).is_err());
}

#[test]
fn restricted_norm_of_a_field_bounds_its_vacuum_image() {
    let sp = space(ModelParams::sinh_gordon(1.0, 0.5).unwrap(), 3.0, 9, 3);
    let f = TestFunction2D::new(SpacetimePoint::ORIGIN, (0.3, 0.3)).unwrap();
    let phi = smeared_field(&f, &sp).unwrap();
    let (n, v, _) = restricted_norm(&phi, 1).unwrap();
    let vac = phi.apply(&FockState::vacuum(&sp)).unwrap().norm();
    assert!(n >= vac * (1.0 - 1e-9));
    assert!((v.norm() - 1.0).abs() < 1e-12);
    assert!(v.top_sector().unwrap() <= 1);
}

#[test]
fn wedge_geometry_places_supports() {
    // the closed support touches the wedge edge at one corner
    let eps = 1e-9;
    let g = geometry::in_right_wedge(0.5, 0.3, 0.2).unwrap();
    assert!(g.supported_in(&Region::RightWedge { apex: SpacetimePoint::new(0.0, 0.5 - eps) }));
    assert!(!g.supported_in(&Region::RightWedge { apex: SpacetimePoint::new(0.0, 0.5 + 0.01) }));
    let f = geometry::in_left_wedge(0.5, 0.3, -0.2).unwrap();
    assert!(f.supported_in(&Region::LeftWedge { apex: SpacetimePoint::new(0.0, -0.5 + eps) }));
    assert!(!f.supported_in(&Region::RightWedge { apex: SpacetimePoint::new(0.0, 0.5) }));
    assert!(TestFunction2D::new(SpacetimePoint::ORIGIN, (0.0, 1.0)).is_err());
    let p = f.point_reflected();
    assert_eq!(p.center, f.center.neg());
}
