//! Entanglement quantifiers: the closed-form concurrence of two-term
//! entangled coherent states, an independent Gram–Schmidt determinant
//! oracle, the pure-state two-qubit concurrence, and the Wootters formula
//! for 4×4 density matrices. The routes are cross-validated against each
//! other in the test suites.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::analytic::{Branch, EcsState, QubitPairState};
use crate::error::{Error, Result};
use crate::hilbert::{eigh_hermitian, hermitian_deviation, overlap_analytic, AtomBasis};

/// Roundoff allowance outside [0, 1] before a concurrence is rejected.
const CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcurrenceMethod {
    /// Closed form for the two-term entangled coherent state.
    EcsAnalytic,
    /// Wootters eigenvalue formula on a density matrix.
    Wootters,
    /// 2|det| of the pure-state amplitude matrix.
    PureDet,
    /// Gram–Schmidt orthogonalization in the nonorthogonal coherent basis.
    SchmidtOracle,
}

impl ConcurrenceMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ConcurrenceMethod::EcsAnalytic => "ecs_analytic",
            ConcurrenceMethod::Wootters => "wootters",
            ConcurrenceMethod::PureDet => "pure_det",
            ConcurrenceMethod::SchmidtOracle => "schmidt_oracle",
        }
    }
}

/// A concurrence in [0, 1] together with the method that produced it.
/// Values within 1e-12 outside the interval are clamped; anything further
/// out is an error.
#[derive(Debug, Clone, Copy)]
pub struct ConcurrenceValue {
    value: f64,
    method: ConcurrenceMethod,
}

impl ConcurrenceValue {
    pub fn new(raw: f64, method: ConcurrenceMethod) -> Result<Self> {
        if !raw.is_finite() || !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&raw) {
            return Err(Error::ConcurrenceOutOfRange { value: raw });
        }
        Ok(Self {
            value: raw.clamp(0.0, 1.0),
            method,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn method(&self) -> ConcurrenceMethod {
        self.method
    }
}

// ---------------------------------------------------------------------------
// Entangled-coherent-state concurrence
// ---------------------------------------------------------------------------

/// Closed-form concurrence of the post-detection field state
/// (e^{iut}|α₁,α₂⟩ ± e^{−iut}|−α₁,−α₂⟩)/√M±:
///
/// C = √[(1 − e^{−4|α₁|²})(1 − e^{−4|α₂|²})] / [1 ± cos(2ut)·e^{−2|α₁|²−2|α₂|²}]
///
/// The amplitudes are read off the first term and the drive phase 2ut off
/// the relative phase of the two coefficients, so a global phase on the
/// state is irrelevant.
pub fn ecs_concurrence(state: &EcsState, branch: Branch) -> Result<ConcurrenceValue> {
    let terms = state.terms();
    if terms.len() != 2 {
        return Err(Error::MalformedEcs {
            reason: format!("expected 2 terms, got {}", terms.len()),
        });
    }
    let (t0, t1) = (&terms[0], &terms[1]);
    let tol = 1e-9;
    if (t0.alpha1 + t1.alpha1).norm() > tol * (1.0 + t0.alpha1.norm())
        || (t0.alpha2 + t1.alpha2).norm() > tol * (1.0 + t0.alpha2.norm())
    {
        return Err(Error::MalformedEcs {
            reason: "second term labels are not the negated first-term labels".into(),
        });
    }
    if (t0.coeff.norm() - t1.coeff.norm()).abs() > tol * t0.coeff.norm().max(tol) {
        return Err(Error::MalformedEcs {
            reason: "term coefficients differ in magnitude".into(),
        });
    }

    let a1 = t0.alpha1.norm_sqr();
    let a2 = t0.alpha2.norm_sqr();
    // 2ut from the relative phase of the two coefficients,
    // c₁·conj(±c₂) ∝ e^{2iut}; insensitive to a global phase on the state
    let double_phase = (t0.coeff * (t1.coeff * C64::new(branch.sign(), 0.0)).conj()).arg();
    let g = (-2.0 * (a1 + a2)).exp();
    let denom = 1.0 + branch.sign() * double_phase.cos() * g;
    if denom.abs() < crate::analytic::DEGENERATE_M_TOL / 2.0 {
        return Err(Error::DegenerateBranch {
            t: f64::NAN,
            m: 2.0 * denom,
        });
    }
    let numer = ((1.0 - (-4.0 * a1).exp()) * (1.0 - (-4.0 * a2).exp())).sqrt();
    ConcurrenceValue::new(numer / denom, ConcurrenceMethod::EcsAnalytic)
}

// ---------------------------------------------------------------------------
// Gram–Schmidt determinant oracle
// ---------------------------------------------------------------------------

/// Coordinates of |x⟩ in the orthonormal basis built from a reference
/// coherent label: e₀ = |x₀⟩, e₁ ∝ |x₁⟩ − ⟨x₀|x₁⟩|x₀⟩.
fn gram_schmidt_coords(x: C64, basis: &[C64]) -> [C64; 2] {
    let zero = C64::new(0.0, 0.0);
    if basis.len() == 1 || (x - basis[0]).norm() < 1e-12 * (1.0 + x.norm()) {
        return [C64::new(1.0, 0.0), zero];
    }
    let s = overlap_analytic(basis[0], basis[1]);
    let w = (1.0 - s.norm_sqr()).max(0.0).sqrt();
    [s, C64::new(w, 0.0)]
}

/// Independent concurrence oracle for a two-mode superposition of coherent
/// products whose labels span at most two distinct values per mode:
/// orthogonalize each mode's pair of labels exactly, form the 2×2 amplitude
/// matrix m and return C = 2|det m| / ⟨ψ|ψ⟩.
pub fn schmidt_oracle(state: &EcsState) -> Result<ConcurrenceValue> {
    let distinct = |labels: &mut Vec<C64>, x: C64| {
        if !labels
            .iter()
            .any(|l| (x - *l).norm() < 1e-12 * (1.0 + x.norm()))
        {
            labels.push(x);
        }
    };
    let mut basis1: Vec<C64> = Vec::new();
    let mut basis2: Vec<C64> = Vec::new();
    for term in state.terms() {
        distinct(&mut basis1, term.alpha1);
        distinct(&mut basis2, term.alpha2);
    }
    if basis1.len() > 2 || basis2.len() > 2 {
        return Err(Error::MalformedEcs {
            reason: format!(
                "labels span {} x {} distinct values; oracle supports at most 2 per mode",
                basis1.len(),
                basis2.len()
            ),
        });
    }

    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for term in state.terms() {
        let u = gram_schmidt_coords(term.alpha1, &basis1);
        let v = gram_schmidt_coords(term.alpha2, &basis2);
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[i][j] += term.coeff * ui * vj;
            }
        }
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let norm_sqr = state.norm_sqr();
    if norm_sqr < 1e-24 {
        return Err(Error::ZeroState);
    }
    ConcurrenceValue::new(
        2.0 * det.norm() / norm_sqr,
        ConcurrenceMethod::SchmidtOracle,
    )
}

// ---------------------------------------------------------------------------
// Two-qubit measures
// ---------------------------------------------------------------------------

/// Pure-state two-qubit concurrence C = 2|A_ee·A_gg − A_ge·A_eg| on a
/// normalized bare-basis state. The algebraically identical radical form
/// 2√(|A_ee A_gg|² + |A_eg A_ge|² − 2Re(A_ee A_gg A_ge* A_eg*)) is evaluated
/// as a cross-check; the determinant form is better conditioned.
pub fn pure2q_concurrence(state: &QubitPairState) -> Result<ConcurrenceValue> {
    if state.basis() != AtomBasis::Bare {
        return Err(Error::BasisFlagMismatch {
            expected: "bare",
            got: state.basis().label(),
        });
    }
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > 1e-9 {
        return Err(Error::NormDrift { norm: n2.sqrt() });
    }
    let [a_gg, a_ge, a_eg, a_ee] = *state.amplitudes();
    let det = a_ee * a_gg - a_ge * a_eg;
    let c_det = 2.0 * det.norm();

    let cross = a_ee * a_gg * a_ge.conj() * a_eg.conj();
    let radicand = (a_ee * a_gg).norm_sqr() + (a_eg * a_ge).norm_sqr() - 2.0 * cross.re;
    let c_rad = 2.0 * radicand.max(0.0).sqrt();
    // the forms are compared on the squared scale: near C = 0 the radical
    // form itself loses half its digits to cancellation, which is why the
    // determinant form is the primary one
    debug_assert!(
        (c_det * c_det - c_rad * c_rad).abs() <= 1e-12,
        "determinant and radical concurrence forms disagree: {c_det} vs {c_rad}"
    );

    ConcurrenceValue::new(c_det, ConcurrenceMethod::PureDet)
}

/// Wootters concurrence of a 4×4 density matrix:
/// C = max(0, χ₁ − χ₂ − χ₃ − χ₄) with χ_i the decreasing square roots of
/// the eigenvalues of ρ(σy⊗σy)ρ*(σy⊗σy).
pub fn wootters_concurrence(rho: &Array2<C64>) -> Result<ConcurrenceValue> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::InvalidDensityMatrix {
            reason: format!("expected 4x4, got {}x{}", rho.nrows(), rho.ncols()),
        });
    }
    let dev = hermitian_deviation(rho);
    if dev > 1e-10 {
        return Err(Error::InvalidDensityMatrix {
            reason: format!("not hermitian (deviation {dev:.3e})"),
        });
    }
    let trace: C64 = (0..4).map(|i| rho[[i, i]]).sum();
    if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
        return Err(Error::InvalidDensityMatrix {
            reason: format!("trace = {trace} != 1"),
        });
    }
    let (evals, evecs) = eigh_hermitian(rho)?;
    if evals.iter().any(|&w| w < -1e-10) {
        return Err(Error::InvalidDensityMatrix {
            reason: format!(
                "negative eigenvalue {:.3e}",
                evals.iter().cloned().fold(f64::INFINITY, f64::min)
            ),
        });
    }

    // sqrt(rho) through the spectral decomposition. Eigenvalues at roundoff
    // level are clamped to exactly zero: sqrt would otherwise amplify them
    // to ~1e-8 and contaminate the small χ_i of near-pure states.
    let mut sqrt_rho = Array2::<C64>::zeros((4, 4));
    for (k, &w) in evals.iter().enumerate() {
        let s = if w < 1e-14 { 0.0 } else { w.sqrt() };
        let col = evecs.column(k);
        for i in 0..4 {
            for j in 0..4 {
                sqrt_rho[[i, j]] += C64::new(s, 0.0) * col[i] * col[j].conj();
            }
        }
    }

    // spin-flipped matrix (σy⊗σy) ρ* (σy⊗σy)
    let yy: [[f64; 4]; 4] = [
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ];
    let yy = Array2::from_shape_fn((4, 4), |(i, j)| C64::new(yy[i][j], 0.0));
    let rho_conj = rho.mapv(|x| x.conj());
    let rho_tilde = yy.dot(&rho_conj).dot(&yy);

    let middle = sqrt_rho.dot(&rho_tilde).dot(&sqrt_rho);
    // symmetrize away roundoff before the second eigendecomposition
    let middle_h = (&middle + &middle.t().mapv(|x| x.conj())) * C64::new(0.5, 0.0);
    let (evals2, _) = eigh_hermitian(&middle_h)?;
    // same roundoff clamp as above, for the same reason
    let mut chi2: Vec<f64> = evals2
        .iter()
        .map(|&w| if w < 1e-14 { 0.0 } else { w })
        .collect();
    chi2.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let chi: Vec<f64> = chi2.into_iter().map(f64::sqrt).collect();
    let raw = chi[0] - chi[1] - chi[2] - chi[3];
    ConcurrenceValue::new(raw.max(0.0), ConcurrenceMethod::Wootters)
}

/// Density matrix |ψ⟩⟨ψ| of a normalized two-qubit pure state.
pub fn pure_density(state: &QubitPairState) -> Array2<C64> {
    let a = state.amplitudes();
    Array2::from_shape_fn((4, 4), |(i, j)| a[i] * a[j].conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{deposit_state_analytic, EcsTerm};
    use crate::model::SystemParams;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn fig_params() -> SystemParams {
        SystemParams::new(1.0, 1.0, 20.0, 20.0).unwrap()
    }

    #[test]
    fn ecs_concurrence_vanishes_at_zero_time() {
        let (state, _) = deposit_state_analytic(&fig_params(), 0.0, Branch::Plus).unwrap();
        let conc = ecs_concurrence(&state, Branch::Plus).unwrap();
        assert_eq!(conc.value(), 0.0);
        let oracle = schmidt_oracle(&state).unwrap();
        assert_eq!(oracle.value(), 0.0);
    }

    #[test]
    fn ecs_concurrence_frozen_value() {
        // (1 − e^{−1})/(1 − cos(80)·e^{−1}) at λ1 = λ2 = 1, u = 40, t = 1
        let expected = (1.0 - (-1.0f64).exp()) / (1.0 - 80.0f64.cos() * (-1.0f64).exp());
        assert!((expected - 0.607_452_404_131_199_2).abs() < 1e-15);
        let (state, _) = deposit_state_analytic(&fig_params(), 1.0, Branch::Minus).unwrap();
        let conc = ecs_concurrence(&state, Branch::Minus).unwrap();
        assert!((conc.value() - expected).abs() < 1e-12, "{}", conc.value());
        let oracle = schmidt_oracle(&state).unwrap();
        assert!((oracle.value() - expected).abs() < 1e-10);
    }

    #[test]
    fn ecs_concurrence_ignores_global_phase() {
        let (state, _) = deposit_state_analytic(&fig_params(), 1.0, Branch::Minus).unwrap();
        let base = ecs_concurrence(&state, Branch::Minus).unwrap().value();
        let phase = C64::from_polar(1.0, 1.234);
        let rephased = EcsState::new(
            state
                .terms()
                .iter()
                .map(|t| EcsTerm {
                    coeff: t.coeff * phase,
                    ..*t
                })
                .collect(),
            false,
            None,
        )
        .unwrap();
        let got = ecs_concurrence(&rephased, Branch::Minus).unwrap().value();
        assert!((got - base).abs() < 1e-12);
        let oracle = schmidt_oracle(&rephased).unwrap().value();
        assert!((got - oracle).abs() < 1e-10);
    }

    #[test]
    fn ecs_concurrence_saturates_at_large_time() {
        for &t in &[4.0, 4.5, 5.0] {
            let (state, _) = deposit_state_analytic(&fig_params(), t, Branch::Minus).unwrap();
            let conc = ecs_concurrence(&state, Branch::Minus).unwrap();
            assert!(conc.value() >= 1.0 - 1e-6, "t = {t}: C = {}", conc.value());
        }
    }

    #[test]
    fn oracle_on_product_state() {
        let product = EcsState::new(
            vec![EcsTerm {
                coeff: c(1.0, 0.0),
                alpha1: c(0.4, 0.0),
                alpha2: c(0.0, -0.7),
            }],
            false,
            None,
        )
        .unwrap();
        assert_eq!(schmidt_oracle(&product).unwrap().value(), 0.0);
    }

    #[test]
    fn oracle_on_phaseless_minus_state_is_one_ebit() {
        // (|α,α⟩ − |−α,−α⟩)/√N is exactly one ebit for every α ≠ 0
        for &a in &[0.3, 1.0, 2.0] {
            let alpha = c(0.0, a);
            let state = EcsState::new(
                vec![
                    EcsTerm {
                        coeff: c(1.0, 0.0),
                        alpha1: alpha,
                        alpha2: alpha,
                    },
                    EcsTerm {
                        coeff: c(-1.0, 0.0),
                        alpha1: -alpha,
                        alpha2: -alpha,
                    },
                ],
                false,
                None,
            )
            .unwrap();
            let conc = schmidt_oracle(&state).unwrap();
            assert!((conc.value() - 1.0).abs() < 1e-12, "alpha = {a}");
        }
    }

    #[test]
    fn oracle_cross_validates_closed_form() {
        for &lambda in &[0.5, 1.0, 2.0] {
            let p = SystemParams::new(lambda, lambda, 20.0, 20.0).unwrap();
            for k in 1..=40 {
                let t = 0.1 * k as f64;
                for branch in [Branch::Plus, Branch::Minus] {
                    let (state, _) = deposit_state_analytic(&p, t, branch).unwrap();
                    let closed = ecs_concurrence(&state, branch).unwrap();
                    let oracle = schmidt_oracle(&state).unwrap();
                    assert!(
                        (closed.value() - oracle.value()).abs() < 1e-10,
                        "λ={lambda} t={t} {}: {} vs {}",
                        branch.label(),
                        closed.value(),
                        oracle.value()
                    );
                }
            }
        }
    }

    #[test]
    fn ecs_concurrence_rejects_malformed_states() {
        let product = EcsState::new(
            vec![EcsTerm {
                coeff: c(1.0, 0.0),
                alpha1: c(0.4, 0.0),
                alpha2: c(0.0, 0.0),
            }],
            false,
            None,
        )
        .unwrap();
        assert!(matches!(
            ecs_concurrence(&product, Branch::Plus),
            Err(Error::MalformedEcs { .. })
        ));
        let skewed = EcsState::new(
            vec![
                EcsTerm {
                    coeff: c(1.0, 0.0),
                    alpha1: c(0.4, 0.0),
                    alpha2: c(0.4, 0.0),
                },
                EcsTerm {
                    coeff: c(1.0, 0.0),
                    alpha1: c(-0.4, 0.0),
                    alpha2: c(0.3, 0.0), // not the negation
                },
            ],
            false,
            None,
        )
        .unwrap();
        assert!(matches!(
            ecs_concurrence(&skewed, Branch::Plus),
            Err(Error::MalformedEcs { .. })
        ));
    }

    #[test]
    fn pure_concurrence_of_bell_state() {
        let r = 1.0 / 2.0f64.sqrt();
        let bell = QubitPairState::normalized(
            [c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)],
            AtomBasis::Bare,
        )
        .unwrap();
        assert!((pure2q_concurrence(&bell).unwrap().value() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pure_concurrence_of_product_state() {
        let prod = QubitPairState::normalized([c(0.5, 0.0); 4], AtomBasis::Bare).unwrap();
        assert!(pure2q_concurrence(&prod).unwrap().value() < 1e-14);
    }

    #[test]
    fn pure_concurrence_of_rotating_bell_family() {
        // cos θ (|gg⟩+|ee⟩) − i sin θ (|ge⟩+|eg⟩), normalized: always maximal
        for k in 0..20 {
            let theta = 0.1 * k as f64;
            let state = QubitPairState::normalized(
                [
                    c(theta.cos(), 0.0),
                    c(0.0, -theta.sin()),
                    c(0.0, -theta.sin()),
                    c(theta.cos(), 0.0),
                ],
                AtomBasis::Bare,
            )
            .unwrap();
            let conc = pure2q_concurrence(&state).unwrap();
            assert!((conc.value() - 1.0).abs() < 1e-12, "theta = {theta}");
        }
    }

    #[test]
    fn wootters_of_maximally_mixed() {
        let rho = Array2::from_diag_elem(4, c(0.25, 0.0));
        assert_eq!(wootters_concurrence(&rho).unwrap().value(), 0.0);
    }

    #[test]
    fn wootters_of_bell_projector() {
        let r = 1.0 / 2.0f64.sqrt();
        let bell = QubitPairState::normalized(
            [c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)],
            AtomBasis::Bare,
        )
        .unwrap();
        let rho = pure_density(&bell);
        assert!((wootters_concurrence(&rho).unwrap().value() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn wootters_of_werner_states() {
        // p·|Φ+⟩⟨Φ+| + (1−p)·I/4 → C = max(0, (3p−1)/2)
        let r = 1.0 / 2.0f64.sqrt();
        let bell = QubitPairState::normalized(
            [c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)],
            AtomBasis::Bare,
        )
        .unwrap();
        let bell_rho = pure_density(&bell);
        for k in 0..=10 {
            let p = 0.1 * k as f64;
            let rho = &bell_rho * c(p, 0.0) + &Array2::from_diag_elem(4, c((1.0 - p) / 4.0, 0.0));
            let got = wootters_concurrence(&rho).unwrap().value();
            let expected = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert!(
                (got - expected).abs() < 1e-10,
                "p = {p}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn wootters_matches_pure_determinant() {
        let mut seed = 77u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        for _ in 0..200 {
            let raw = [
                c(next(), next()),
                c(next(), next()),
                c(next(), next()),
                c(next(), next()),
            ];
            let state = match QubitPairState::normalized(raw, AtomBasis::Bare) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let via_det = pure2q_concurrence(&state).unwrap().value();
            let via_wootters = wootters_concurrence(&pure_density(&state)).unwrap().value();
            assert!(
                (via_det - via_wootters).abs() < 1e-8,
                "{via_det} vs {via_wootters}"
            );
        }
    }

    #[test]
    fn wootters_rejects_invalid_input() {
        let not_normalized = Array2::from_diag_elem(4, c(0.5, 0.0));
        assert!(matches!(
            wootters_concurrence(&not_normalized),
            Err(Error::InvalidDensityMatrix { .. })
        ));
        let mut non_hermitian = Array2::from_diag_elem(4, c(0.25, 0.0));
        non_hermitian[[0, 1]] = c(0.3, 0.0);
        assert!(matches!(
            wootters_concurrence(&non_hermitian),
            Err(Error::InvalidDensityMatrix { .. })
        ));
        let mut negative = Array2::from_diag_elem(4, c(0.3, 0.0));
        negative[[3, 3]] = c(0.1, 0.0);
        negative[[0, 3]] = c(0.29, 0.0);
        negative[[3, 0]] = c(0.29, 0.0);
        assert!(matches!(
            wootters_concurrence(&negative),
            Err(Error::InvalidDensityMatrix { .. })
        ));
    }

    #[test]
    fn clamping_rules() {
        assert_eq!(
            ConcurrenceValue::new(1.0 + 5e-13, ConcurrenceMethod::PureDet)
                .unwrap()
                .value(),
            1.0
        );
        assert_eq!(
            ConcurrenceValue::new(-5e-13, ConcurrenceMethod::PureDet)
                .unwrap()
                .value(),
            0.0
        );
        assert!(ConcurrenceValue::new(1.0 + 1e-9, ConcurrenceMethod::PureDet).is_err());
        assert!(ConcurrenceValue::new(-1e-9, ConcurrenceMethod::PureDet).is_err());
        assert!(ConcurrenceValue::new(f64::NAN, ConcurrenceMethod::PureDet).is_err());
    }

    #[test]
    fn minus_branch_lower_envelope_is_monotone() {
        // sample 2ut ≡ π (mod 2π): the envelope is nondecreasing toward 1
        let p = fig_params();
        let u = p.rabi_sum();
        let mut last = 0.0;
        for k in 0..60 {
            let t = (std::f64::consts::PI / 2.0 + k as f64 * std::f64::consts::PI) / u;
            let (state, _) = deposit_state_analytic(&p, t, Branch::Minus).unwrap();
            let conc = ecs_concurrence(&state, Branch::Minus).unwrap().value();
            assert!(
                conc >= last - 1e-12,
                "envelope decreased at k = {k}: {conc} < {last}"
            );
            last = conc;
        }
        assert!(last > 0.999, "envelope should approach 1, got {last}");
    }
}
