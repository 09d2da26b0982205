//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p sunqsde-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sunqsde_core::algebra::verify_algebra;
use sunqsde_core::linalg::{c, CMat, RMat, RVec};
use sunqsde_core::model::{random_slh, COND_B1_FROM_C2, COND_B2_FROM_C1};
use sunqsde_core::oracle::{init_moments, integrate_moments, ito_integrands};
use sunqsde_core::theta::{verify_kron_identities, verify_theta_identities};
use sunqsde_core::{
    check_physical_realizability, check_preservation, extract_slh, random_model, synthesize_state_space, GellMannBasis,
    ModelKind, StateSpaceModel, StructureTensors, ThetaContext,
};

/// Criterion 1: normalized identity residuals.
const TOL_ALGEBRA: f64 = 1e-9;
/// Criterion 2: residual per unit of (1 + input norms).
const TOL_THETA: f64 = 1e-9;
/// Criterion 3: reconstruction error of g.
const TOL_RECONSTRUCT: f64 = 1e-10;
/// Criteria 4 and 5: condition residuals and recovered-parameter max-norm error.
const TOL_ROUND_TRIP: f64 = 1e-9;
/// Criterion 6: condition (ii) or (iii) residual that counts as a failure.
const SEPARATION_MARGIN: f64 = 1e-2;
const SEPARATION_MIN_SEEDS: usize = 99;
/// Criterion 7: operator-norm threshold for a vanishing integrand.
const TOL_ORACLE: f64 = 1e-9;
/// Criterion 8.
const TOL_FLOW: f64 = 1e-6;
const FLOW_PERTURBATION: f64 = 1e-1;
const FLOW_DETECTION: f64 = 1e-3;
const FLOW_T_END: f64 = 1.0;
const FLOW_STEP: f64 = 1e-3;
/// Criterion 9: allowed ratio between residual and injected perturbation.
const SENSITIVITY_FACTOR: f64 = 10.0;
/// Tolerance handed to the checkers.
const CHECK_TOL: f64 = 1e-9;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn setup(n: usize) -> (GellMannBasis, StructureTensors) {
    let b = GellMannBasis::new(n).expect("basis");
    let t = StructureTensors::from_basis(&b).expect("tensors");
    (b, t)
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> RVec {
    RVec::from_fn(len, |_, _| rng.random_range(-1.0..1.0))
}

fn algebra_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for n in 2..=6 {
        let (b, t) = setup(n);
        let report = verify_algebra(&b, &t, TOL_ALGEBRA);
        for chk in &report.checks {
            // gram_nonsingular records a margin, not an identity residual.
            if chk.id != "gram_nonsingular" {
                worst = worst.max(chk.max_residual);
            }
        }
        failed.extend(report.failures().map(|c| format!("n={n}:{}", c.id)));
    }
    Outcome {
        pass: failed.is_empty(),
        detail: format!("n=2..6, worst residual {worst:.2e}, failures {failed:?}"),
    }
}

fn theta_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for n in 2..=4 {
        let (_, t) = setup(n);
        let ctx = ThetaContext::new(&t);
        let mut report = verify_theta_identities(&ctx, 100, 1000 + n as u64, TOL_THETA).expect("theta");
        report.extend(verify_kron_identities(&ctx, 100, 2000 + n as u64, TOL_THETA).expect("kron"));
        worst = report.checks.iter().map(|c| c.max_residual).fold(worst, f64::max);
        failed.extend(report.failures().map(|c| format!("n={n}:{}", c.id)));
    }
    Outcome {
        pass: failed.is_empty(),
        detail: format!("n=2..4, 100 probes each, worst scaled residual {worst:.2e}, failures {failed:?}"),
    }
}

fn reconstruction_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut rejected = 0;
    let mut total_sym = 0;
    for n in 2..=4 {
        let (_, t) = setup(n);
        let ctx = ThetaContext::new(&t);
        let s = ctx.s();
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + n as u64);
        for _ in 0..100 {
            let g = random_vec(&mut rng, s);
            let gm = ctx.theta_minus(g.as_slice()).expect("theta");
            let rec = ctx.reconstruct_theta_minus_generator(&gm).expect("reconstruct");
            worst = worst.max((rec.g - &g).amax());
        }
        for _ in 0..100 {
            let h = RMat::from_fn(s, s, |_, _| rng.random_range(-1.0..1.0));
            let sym = &h + h.transpose();
            let rec = ctx.reconstruct_theta_minus_generator(&sym).expect("reconstruct");
            total_sym += 1;
            if rec.residual >= (&sym + sym.transpose()).norm() / 2.0 {
                rejected += 1;
            }
        }
    }
    Outcome {
        pass: worst < TOL_RECONSTRUCT && rejected == total_sym,
        detail: format!("max |g - g_rec| {worst:.2e}; symmetric rejected {rejected}/{total_sym}"),
    }
}

struct Corpus {
    n: usize,
    nw: usize,
    seed: u64,
    model: StateSpaceModel,
    alpha: RVec,
    lambda: CMat,
}

fn realizable_corpus() -> Vec<Corpus> {
    let mut out = Vec::new();
    for n in 2..=4 {
        let (_, t) = setup(n);
        let ctx = ThetaContext::new(&t);
        for nw in 1..=2 {
            for i in 0..100u64 {
                let seed = 10_000 * n as u64 + 1000 * nw as u64 + i;
                let p = random_slh(ctx.s(), nw, seed);
                let model = synthesize_state_space(&ctx, &p).expect("synthesis");
                out.push(Corpus {
                    n,
                    nw,
                    seed,
                    model,
                    alpha: p.alpha,
                    lambda: p.lambda,
                });
            }
        }
    }
    out
}

fn round_trip_suite(corpus: &[Corpus]) -> Outcome {
    let mut worst_cond = 0.0f64;
    let mut worst_param = 0.0f64;
    let mut bad = Vec::new();
    for item in corpus {
        let (_, t) = setup(item.n);
        let ctx = ThetaContext::new(&t);
        let r = check_physical_realizability(&ctx, &item.model, CHECK_TOL).expect("check");
        worst_cond = r.conditions.iter().map(|c| c.residual).fold(worst_cond, f64::max);
        let ex = extract_slh(&ctx, &item.model).expect("extract");
        let dev = (ex.params.alpha - &item.alpha)
            .amax()
            .max((ex.params.lambda - &item.lambda).camax());
        worst_param = worst_param.max(dev);
        if !r.pass || dev >= TOL_ROUND_TRIP {
            bad.push((item.n, item.nw, item.seed));
        }
    }
    Outcome {
        pass: bad.is_empty() && worst_cond < TOL_ROUND_TRIP,
        detail: format!(
            "{} models, worst condition residual {worst_cond:.2e}, worst parameter error {worst_param:.2e}, failures {bad:?}",
            corpus.len()
        ),
    }
}

fn realizable_implies_preservation(corpus: &[Corpus]) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut worst_b = 0.0f64;
    for item in corpus {
        let (_, t) = setup(item.n);
        let ctx = ThetaContext::new(&t);
        if !check_physical_realizability(&ctx, &item.model, CHECK_TOL)
            .expect("check")
            .pass
        {
            continue;
        }
        checked += 1;
        let p = check_preservation(&ctx, &item.model, CHECK_TOL).expect("check");
        let mut dev = 0.0f64;
        for k in 0..item.nw {
            // With the sign conventions of the synthesis map, b2k = -(C1)_k.
            dev = dev
                .max((&p.b1[k] - item.model.c2_row(k)).amax())
                .max((&p.b2[k] + item.model.c1_row(k)).amax());
        }
        worst_b = worst_b.max(dev);
        if !p.pass || dev >= TOL_ROUND_TRIP {
            bad.push((item.n, item.nw, item.seed));
        }
    }
    Outcome {
        pass: bad.is_empty() && checked == corpus.len(),
        detail: format!(
            "{checked}/{} realizable models preserve; max |b1 - C2|, |b2 + C1| = {worst_b:.2e}; failures {bad:?}",
            corpus.len()
        ),
    }
}

fn separation_suite() -> Outcome {
    let (_, t) = setup(3);
    let ctx = ThetaContext::new(&t);
    let mut separated = 0;
    let mut preserved = 0;
    let mut smallest = f64::INFINITY;
    for seed in 0..100u64 {
        let m = random_model(&ctx, 1, 50_000 + seed, ModelKind::PreservationOnly).expect("model");
        let p = check_preservation(&ctx, &m, CHECK_TOL).expect("check");
        if p.pass {
            preserved += 1;
        }
        let r = check_physical_realizability(&ctx, &m, CHECK_TOL).expect("check");
        let gap = r
            .conditions
            .iter()
            .filter(|c| c.id == COND_B1_FROM_C2 || c.id == COND_B2_FROM_C1)
            .map(|c| c.residual)
            .fold(0.0, f64::max);
        smallest = smallest.min(gap);
        if p.pass && gap > SEPARATION_MARGIN {
            separated += 1;
        }
    }
    Outcome {
        pass: preserved == 100 && separated >= SEPARATION_MIN_SEEDS,
        detail: format!(
            "n=3: {preserved}/100 preserve, {separated}/100 separated (need {SEPARATION_MIN_SEEDS}), smallest (ii)/(iii) residual {smallest:.2e}"
        ),
    }
}

fn oracle_suite() -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    let mut tally = Vec::new();
    for n in 2..=3 {
        let (b, t) = setup(n);
        let ctx = ThetaContext::new(&t);
        for kind in ModelKind::ALL {
            let mut passes = 0;
            for seed in 0..50u64 {
                let nw = 1 + (seed as usize % 2);
                let m = random_model(&ctx, nw, 70_000 + seed, kind).expect("model");
                let verdict = check_preservation(&ctx, &m, CHECK_TOL).expect("check").pass;
                let oracle = ito_integrands(&b, &ctx, &m).expect("oracle").vanish(TOL_ORACLE);
                total += 1;
                if verdict == oracle {
                    agree += 1;
                }
                passes += usize::from(verdict);
            }
            tally.push(format!("n={n} {}: {passes}/50 preserve", kind.name()));
        }
    }
    Outcome {
        pass: agree == total,
        detail: format!("{agree}/{total} verdicts agree; {}", tally.join(", ")),
    }
}

fn flow_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut weakest_detection = f64::INFINITY;
    let mut runs = 0;
    for n in 2..=3 {
        let (b, t) = setup(n);
        let ctx = ThetaContext::new(&t);
        let mixed = CMat::identity(n, n) * c(1.0 / n as f64);
        let mut pure = CMat::zeros(n, n);
        pure[(0, 0)] = c(1.0);
        for rho in [mixed, pure] {
            let s0 = init_moments(&b, &ctx, &rho, CHECK_TOL).expect("init");
            for seed in 0..3u64 {
                let mut m = random_model(&ctx, 1, 90_000 + seed, ModelKind::Realizable).expect("model");
                let tr = integrate_moments(&ctx, &m, &s0, FLOW_T_END, FLOW_STEP).expect("flow");
                worst = worst.max(tr.max_residual());
                m.a[(0, 0)] += FLOW_PERTURBATION;
                let tr = integrate_moments(&ctx, &m, &s0, FLOW_T_END, FLOW_STEP).expect("flow");
                weakest_detection = weakest_detection.min(tr.max_residual());
                runs += 1;
            }
        }
    }
    Outcome {
        pass: worst < TOL_FLOW && weakest_detection > FLOW_DETECTION,
        detail: format!(
            "{runs} runs to t={FLOW_T_END} with h={FLOW_STEP}: max residual {worst:.2e}; perturbed minimum of max residual {weakest_detection:.2e}"
        ),
    }
}

fn sensitivity_suite() -> Outcome {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut probes = 0;
    for n in 2..=3 {
        let (_, t) = setup(n);
        let ctx = ThetaContext::new(&t);
        let s = ctx.s();
        for seed in 0..5u64 {
            let base = random_model(&ctx, 1, 95_000 + seed, ModelKind::Realizable).expect("model");
            for &(i, j) in &[(0, 0), (0, s - 1), (s / 2, 1)] {
                for eps in [1e-6, 1e-4, 1e-2] {
                    let mut m = base.clone();
                    m.b1[0][(i, j)] += eps;
                    let r = check_physical_realizability(&ctx, &m, CHECK_TOL).expect("check");
                    let res = r.condition(COND_B1_FROM_C2, Some(0)).expect("condition").residual;
                    lo = lo.min(res / eps);
                    hi = hi.max(res / eps);
                    probes += 1;
                }
            }
        }
    }
    Outcome {
        pass: lo >= 1.0 / SENSITIVITY_FACTOR && hi <= SENSITIVITY_FACTOR,
        detail: format!("{probes} probes, residual/eps in [{lo:.3}, {hi:.3}]"),
    }
}

fn main() -> ExitCode {
    let corpus = realizable_corpus();
    let criteria: Vec<Criterion> = vec![
        ("algebra identity suite", Box::new(algebra_suite)),
        ("theta calculus suite", Box::new(theta_suite)),
        ("theta-minus reconstruction round trip", Box::new(reconstruction_suite)),
        (
            "synthesis/realizability round trip",
            Box::new(|| round_trip_suite(&corpus)),
        ),
        (
            "realizable implies preservation",
            Box::new(|| realizable_implies_preservation(&corpus)),
        ),
        ("separation witness", Box::new(separation_suite)),
        ("brute-force oracle equivalence", Box::new(oracle_suite)),
        ("moment-flow check", Box::new(flow_suite)),
        ("sensitivity monotonicity", Box::new(sensitivity_suite)),
    ];
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        all &= out.pass;
        println!(
            "{} [{}] {name}: {} ({:.2}s)",
            if out.pass { "PASS" } else { "FAIL" },
            k + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
