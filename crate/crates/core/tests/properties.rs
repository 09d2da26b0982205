use num_complex::Complex64;
use proptest::prelude::*;
use sunqsde_core::linalg::{c, CMat, RVec};
use sunqsde_core::model::random_slh;
use sunqsde_core::oracle::{init_moments, integrate_moments, ito_integrands};
use sunqsde_core::{
    check_physical_realizability, check_preservation, extract_slh, random_model, synthesize_state_space, GellMannBasis,
    ModelKind, StructureTensors, ThetaContext,
};

fn tensors(n: usize) -> (GellMannBasis, StructureTensors) {
    let b = GellMannBasis::new(n).unwrap();
    let t = StructureTensors::from_basis(&b).unwrap();
    (b, t)
}

fn complex_vec(s: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im)),
        s,
    )
}

fn kind() -> impl Strategy<Value = ModelKind> {
    prop::sample::select(ModelKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_maps_have_exact_parity(beta in complex_vec(15)) {
        for n in 2..=4 {
            let (_, t) = tensors(n);
            let ctx = ThetaContext::new(&t);
            let beta = &beta[..ctx.s()];
            let tm = ctx.theta_minus(beta).unwrap();
            let tp = ctx.theta_plus(beta).unwrap();
            prop_assert_eq!(tm.transpose(), -&tm);
            prop_assert_eq!(tp.transpose(), tp);
        }
    }

    #[test]
    fn theta_maps_are_linear(beta in complex_vec(8), gamma in complex_vec(8), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let (_, t) = tensors(3);
        let ctx = ThetaContext::new(&t);
        let mix: Vec<Complex64> = beta.iter().zip(&gamma).map(|(x, y)| x * a + y * Complex64::new(0.0, b)).collect();
        let lhs = ctx.theta_minus(&mix).unwrap();
        let rhs = ctx.theta_minus(&beta).unwrap() * c(a) + ctx.theta_minus(&gamma).unwrap() * Complex64::new(0.0, b);
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + a.abs() + b.abs()) * 10.0);
        let lhs = ctx.theta_plus(&mix).unwrap();
        let rhs = ctx.theta_plus(&beta).unwrap() * c(a) + ctx.theta_plus(&gamma).unwrap() * Complex64::new(0.0, b);
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + a.abs() + b.abs()) * 10.0);
    }

    #[test]
    fn trace_against_adjoint_matrix(g in prop::collection::vec(-2.0..2.0f64, 15)) {
        let (_, t) = tensors(4);
        let ctx = ThetaContext::new(&t);
        let tm = ctx.theta_minus(&g).unwrap();
        for (i, gi) in g.iter().enumerate() {
            let tr = (t.f_mat(i) * &tm).trace();
            prop_assert!((tr + 4.0 * gi).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_inverts_theta_minus(g in complex_vec(8)) {
        let (_, t) = tensors(3);
        let ctx = ThetaContext::new(&t);
        let rec = ctx.reconstruct_theta_minus_generator(&ctx.theta_minus(&g).unwrap()).unwrap();
        for (x, y) in rec.g.iter().zip(&g) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        prop_assert!(rec.residual < 1e-12);
        prop_assert!(rec.hypothesis_residual < 1e-11);
    }

    #[test]
    fn synthesis_and_extraction_round_trip(n in 2usize..=4, nw in 1usize..=3, seed in any::<u64>()) {
        let (_, t) = tensors(n);
        let ctx = ThetaContext::new(&t);
        let p = random_slh(ctx.s(), nw, seed);
        let m = synthesize_state_space(&ctx, &p).unwrap();
        for k in 0..nw {
            prop_assert_eq!(m.b1[k].transpose(), -&m.b1[k]);
            prop_assert_eq!(m.b2[k].transpose(), -&m.b2[k]);
        }
        let ex = extract_slh(&ctx, &m).unwrap();
        prop_assert!((ex.params.alpha - &p.alpha).amax() < 1e-9);
        prop_assert!((ex.params.lambda - &p.lambda).camax() < 1e-9);
        prop_assert!(ex.residual < 1e-9);
    }

    #[test]
    fn oracle_agrees_with_preservation_checker(n in 2usize..=3, nw in 1usize..=2, seed in any::<u64>(), kind in kind()) {
        let (b, t) = tensors(n);
        let ctx = ThetaContext::new(&t);
        let m = random_model(&ctx, nw, seed, kind).unwrap();
        let verdict = check_preservation(&ctx, &m, 1e-9).unwrap().pass;
        let oracle = ito_integrands(&b, &ctx, &m).unwrap().vanish(1e-9);
        prop_assert_eq!(verdict, oracle);
        prop_assert_eq!(verdict, kind != ModelKind::Generic);
    }
}

#[test]
fn realizable_models_preserve_relations() {
    for n in 2..=4 {
        let (_, t) = tensors(n);
        let ctx = ThetaContext::new(&t);
        for seed in 0..100 {
            let m = random_model(&ctx, 1 + seed as usize % 3, seed, ModelKind::Realizable).unwrap();
            assert!(check_physical_realizability(&ctx, &m, 1e-9).unwrap().pass);
            let p = check_preservation(&ctx, &m, 1e-9).unwrap();
            assert!(p.pass, "n={n} seed={seed}: {:?}", p.conditions);
            assert!(p.implied_a0_deviation < 1e-12);
        }
    }
}

#[test]
fn residuals_scale_with_single_entry_perturbations() {
    let (_, t) = tensors(3);
    let ctx = ThetaContext::new(&t);
    let base = random_model(&ctx, 2, 21, ModelKind::Realizable).unwrap();
    type Poke = fn(&mut sunqsde_core::StateSpaceModel, f64);
    let pokes: [(&str, Poke); 5] = [
        ("A", |m, e| m.a[(2, 5)] += e),
        ("B1", |m, e| m.b1[1][(0, 3)] += e),
        ("B2", |m, e| m.b2[0][(4, 4)] += e),
        ("C1", |m, e| m.c1[(1, 6)] += e),
        ("C2", |m, e| m.c2[(0, 0)] += e),
    ];
    for (name, poke) in pokes {
        let mut last = 0.0;
        for eps in [1e-6, 1e-4, 1e-2] {
            let mut m = base.clone();
            poke(&mut m, eps);
            let r = check_physical_realizability(&ctx, &m, 1e-9).unwrap();
            let worst = r.conditions.iter().map(|c| c.residual).fold(0.0, f64::max);
            assert!(!r.pass, "{name} eps={eps}");
            assert!(worst / eps > 1e-2 && worst / eps < 10.0, "{name} eps={eps}: {worst:e}");
            assert!(worst > last);
            last = worst;
        }
    }
}

#[test]
fn preserving_models_keep_moment_relations() {
    let (b, t) = tensors(2);
    let ctx = ThetaContext::new(&t);
    let mut rho = CMat::zeros(2, 2);
    rho[(0, 0)] = c(0.75);
    rho[(1, 1)] = c(0.25);
    rho[(0, 1)] = Complex64::new(0.1, 0.2);
    rho[(1, 0)] = Complex64::new(0.1, -0.2);
    let s0 = init_moments(&b, &ctx, &rho, 1e-12).unwrap();
    for seed in 0..5 {
        let m = random_model(&ctx, 1, seed, ModelKind::PreservationOnly).unwrap();
        let tr = integrate_moments(&ctx, &m, &s0, 0.5, 1e-3).unwrap();
        assert!(tr.max_residual() < 1e-6, "seed {seed}: {:e}", tr.max_residual());
    }
}

#[test]
fn initial_moments_satisfy_relations_for_random_states() {
    for n in 2..=5 {
        let (b, t) = tensors(n);
        let ctx = ThetaContext::new(&t);
        let v = RVec::from_fn(n, |i, _| 1.0 + i as f64);
        let w = CMat::from_fn(n, n, |i, j| {
            Complex64::new(v[i] * (j as f64 - 1.0), (i * j) as f64 * 0.3)
        });
        let psd = &w * w.adjoint();
        let rho = &psd / psd.trace();
        let st = init_moments(&b, &ctx, &rho, 1e-12).unwrap();
        let (rc, ra) = st.residuals(&ctx);
        assert!(rc < 1e-12 && ra < 1e-12, "n={n}: {rc:e} {ra:e}");
    }
}
