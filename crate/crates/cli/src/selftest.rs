//! Seeded invariant suite behind `ecsim selftest`.
//!
//! Every check prints one line with its measured tolerance; checks that
//! cannot run (e.g. a forced Fock cutoff that is too small for the required
//! amplitudes) report their error as a failure. The report text is fully
//! deterministic for a given seed.

use std::fmt::Write as _;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ecsim_core::analytic::{deposit_state_analytic, norm_const, AtomicOutcome, Branch};
use ecsim_core::entanglement::{
    ecs_concurrence, pure2q_concurrence, pure_density, schmidt_oracle, wootters_concurrence,
};
use ecsim_core::hilbert::{
    coherent_state, evolve, fidelity, overlap_analytic, AtomBasis, CompositeState, FockCutoff,
    Operator,
};
use ecsim_core::model::SystemParams;
use ecsim_core::protocol::{run_deposit, run_retrieval, rwa_validation, Engine};
use ecsim_core::QubitPairState;

pub struct Report {
    pub text: String,
    pub all_passed: bool,
}

struct Check {
    name: &'static str,
    outcome: Result<(bool, String), String>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn run(params: &SystemParams, seed: u64, nmax_override: Option<usize>) -> Report {
    let checks = vec![
        Check {
            name: "coherent_overlap_identity",
            outcome: check_coherent_overlap(seed, nmax_override).map_err(|e| e.to_string()),
        },
        Check {
            name: "evolution_unitarity",
            outcome: check_evolution_unitarity(seed).map_err(|e| e.to_string()),
        },
        Check {
            name: "concurrence_oracle_agreement",
            outcome: check_oracle_agreement(params).map_err(|e| e.to_string()),
        },
        Check {
            name: "wootters_vs_pure_determinant",
            outcome: check_wootters(seed).map_err(|e| e.to_string()),
        },
        Check {
            name: "deposit_probability_completeness",
            outcome: check_completeness(params).map_err(|e| e.to_string()),
        },
        Check {
            name: "deposit_engine_equivalence",
            outcome: check_deposit_engines(params, nmax_override).map_err(|e| e.to_string()),
        },
        Check {
            name: "retrieval_engine_equivalence",
            outcome: check_retrieval_engines(params, nmax_override).map_err(|e| e.to_string()),
        },
        Check {
            name: "rwa_monotone_convergence",
            outcome: check_rwa(params, nmax_override).map_err(|e| e.to_string()),
        },
        Check {
            name: "concurrence_range",
            outcome: check_range(params).map_err(|e| e.to_string()),
        },
    ];

    let mut text = format!("self-test report (seed = {seed})\n");
    let mut passed = 0usize;
    for check in &checks {
        match &check.outcome {
            Ok((ok, detail)) => {
                let status = if *ok { "PASS" } else { "FAIL" };
                let _ = writeln!(text, "{:<36} {status}  {detail}", check.name);
                if *ok {
                    passed += 1;
                }
            }
            Err(message) => {
                let _ = writeln!(text, "{:<36} FAIL  {message}", check.name);
            }
        }
    }
    let _ = writeln!(text, "summary: {passed}/{} checks passed", checks.len());
    Report {
        all_passed: passed == checks.len(),
        text,
    }
}

fn check_coherent_overlap(
    seed: u64,
    nmax_override: Option<usize>,
) -> ecsim_core::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x01);
    let mut max_dev = 0.0f64;
    for _ in 0..50 {
        let a = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let b = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let cutoff = match nmax_override {
            Some(n) => FockCutoff::new(n)?,
            None => FockCutoff::for_max_amplitude(a.norm().max(b.norm())),
        };
        let va = coherent_state(a, cutoff)?;
        let vb = coherent_state(b, cutoff)?;
        let num: C64 = va.iter().zip(vb.iter()).map(|(x, y)| x.conj() * y).sum();
        max_dev = max_dev.max((num - overlap_analytic(a, b)).norm());
    }
    Ok((
        max_dev < 1e-10,
        format!("max |truncated - analytic| = {max_dev:.3e} (tol 1e-10)"),
    ))
}

fn check_evolution_unitarity(seed: u64) -> ecsim_core::Result<(bool, String)> {
    let cutoff = FockCutoff::new(2)?;
    let dim = cutoff.composite_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x02);
    let mut max_drift = 0.0f64;
    let mut min_comp_fidelity = 1.0f64;
    for _ in 0..10 {
        let m = Array2::from_shape_fn((dim, dim), |_| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = Operator::hermitian((&m + &m.t().mapv(|x| x.conj())) * c(0.5, 0.0))?;
        let mut v = Array1::from_shape_fn(dim, |_| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v /= c(norm, 0.0);
        let psi = CompositeState::from_amplitudes(v, cutoff, AtomBasis::Bare)?;
        let t1 = rng.gen_range(0.0..5.0);
        let t2 = rng.gen_range(0.0..5.0);
        let step = evolve(&psi, &h, t1)?;
        max_drift = max_drift.max((step.norm() - 1.0).abs());
        let two = evolve(&step, &h, t2)?;
        let direct = evolve(&psi, &h, t1 + t2)?;
        min_comp_fidelity = min_comp_fidelity.min(fidelity(
            two.amplitudes().view(),
            direct.amplitudes().view(),
        ));
    }
    Ok((
        max_drift <= 1e-9 && min_comp_fidelity >= 1.0 - 1e-9,
        format!(
            "max norm drift = {max_drift:.3e} (tol 1e-9), min composition fidelity = 1 - {:.3e}",
            1.0 - min_comp_fidelity
        ),
    ))
}

fn check_oracle_agreement(params: &SystemParams) -> ecsim_core::Result<(bool, String)> {
    let mut max_dev = 0.0f64;
    for &scale in &[0.5, 1.0, 2.0] {
        let p = SystemParams::new(
            scale * params.lambda1().max(1e-3),
            scale * params.lambda2().max(1e-3),
            params.omega1(),
            params.omega2(),
        )?;
        for k in 1..=50 {
            let t = 4.0 * k as f64 / 50.0;
            for branch in [Branch::Plus, Branch::Minus] {
                let (state, _) = deposit_state_analytic(&p, t, branch)?;
                let closed = ecs_concurrence(&state, branch)?.value();
                let oracle = schmidt_oracle(&state)?.value();
                max_dev = max_dev.max((closed - oracle).abs());
            }
        }
    }
    Ok((
        max_dev < 1e-10,
        format!("max |closed - oracle| = {max_dev:.3e} (tol 1e-10)"),
    ))
}

fn check_wootters(seed: u64) -> ecsim_core::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x04);
    let mut max_dev = 0.0f64;
    for _ in 0..1000 {
        let raw = [
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ];
        let state = match QubitPairState::normalized(raw, AtomBasis::Bare) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let det = pure2q_concurrence(&state)?.value();
        let woot = wootters_concurrence(&pure_density(&state))?.value();
        max_dev = max_dev.max((det - woot).abs());
    }
    Ok((
        max_dev < 1e-8,
        format!("max |wootters - pure_det| = {max_dev:.3e} over 1000 states (tol 1e-8)"),
    ))
}

fn check_completeness(params: &SystemParams) -> ecsim_core::Result<(bool, String)> {
    let mut max_dev = 0.0f64;
    for k in 0..=100 {
        let t = 5.0 * k as f64 / 100.0;
        let total: f64 = AtomicOutcome::ALL
            .iter()
            .map(|o| norm_const(params, t, Branch::from_outcome(*o)) / 8.0)
            .sum();
        max_dev = max_dev.max((total - 1.0).abs());
    }
    Ok((
        max_dev < 1e-12,
        format!("max |sum - 1| = {max_dev:.3e} (tol 1e-12)"),
    ))
}

fn check_deposit_engines(
    params: &SystemParams,
    nmax_override: Option<usize>,
) -> ecsim_core::Result<(bool, String)> {
    let mut min_fidelity = 1.0f64;
    for &t in &[0.5, 1.0, 2.0] {
        let results = run_deposit(params, t, Engine::NumericEffective, nmax_override)?;
        for r in &results {
            if let Some(field) = &r.field {
                min_fidelity = min_fidelity.min(field.analytic_fidelity);
            }
        }
    }
    Ok((
        min_fidelity >= 1.0 - 1e-8,
        format!("min fidelity = 1 - {:.3e} (tol 1e-8)", 1.0 - min_fidelity),
    ))
}

fn check_retrieval_engines(
    params: &SystemParams,
    nmax_override: Option<usize>,
) -> ecsim_core::Result<(bool, String)> {
    let mut min_fidelity = 1.0f64;
    let mut max_prob_dev = 0.0f64;
    for &t in &[0.5, 1.0] {
        let analytic = run_retrieval(params, t, Branch::Plus, Engine::Analytic, None)?;
        let numeric = run_retrieval(
            params,
            t,
            Branch::Plus,
            Engine::NumericEffective,
            nmax_override,
        )?;
        for (a, n) in analytic.iter().zip(numeric.iter()) {
            min_fidelity = min_fidelity.min(a.atomic_state.fidelity_with(&n.atomic_state));
            max_prob_dev = max_prob_dev.max((a.projection_prob - n.projection_prob).abs());
        }
    }
    Ok((
        min_fidelity >= 1.0 - 1e-8 && max_prob_dev < 1e-9,
        format!(
            "min atomic fidelity = 1 - {:.3e} (tol 1e-8), max prob deviation = {max_prob_dev:.3e}",
            1.0 - min_fidelity
        ),
    ))
}

fn check_rwa(
    params: &SystemParams,
    nmax_override: Option<usize>,
) -> ecsim_core::Result<(bool, String)> {
    let lambda = params.lambda1().max(1e-3);
    let t = 1.0 / lambda; // fixed λt = 1
    let ratios = [10.0, 20.0, 50.0, 100.0];
    let list: Vec<SystemParams> = ratios
        .iter()
        .map(|r| SystemParams::new(lambda, lambda, r * lambda, r * lambda))
        .collect::<ecsim_core::Result<_>>()?;
    let records = rwa_validation(&list, &[t], nmax_override)?;
    let fid: Vec<f64> = records.iter().map(|r| r.fidelity).collect();
    let monotone = fid.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let strong = *fid.last().unwrap() >= 0.95;
    Ok((
        monotone && strong,
        format!(
            "fidelities at ratios {{10,20,50,100}}: [{}]",
            fid.iter()
                .map(|f| format!("{f:.6}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ))
}

fn check_range(params: &SystemParams) -> ecsim_core::Result<(bool, String)> {
    let mut count = 0usize;
    let mut in_range = true;
    for k in 1..=50 {
        let t = 4.0 * k as f64 / 50.0;
        for branch in [Branch::Plus, Branch::Minus] {
            let (state, _) = deposit_state_analytic(params, t, branch)?;
            let v = ecs_concurrence(&state, branch)?.value();
            in_range &= (0.0..=1.0).contains(&v);
            count += 1;
        }
        for r in run_retrieval(params, t, Branch::Plus, Engine::Analytic, None)? {
            in_range &= (0.0..=1.0).contains(&r.concurrence.value());
            count += 1;
        }
    }
    Ok((in_range, format!("{count} concurrence values in [0, 1]")))
}
