//! Closed-form generators for every state in the reciprocation protocol:
//! the post-detection entangled coherent state of the deposit stage, the
//! four-sector retrieval superposition, and the post-selection amplitudes.
//!
//! Intermediate states are kept unnormalized exactly as they arise from the
//! protocol algebra; normalization constants appear explicitly and division
//! happens only at measurement operations.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    coherent_state, kron_vec, overlap_analytic, AtomBasis, FockCutoff, TwoModeState,
};
use crate::model::SystemParams;

/// Normalization constant below which the minus-branch field state is
/// treated as identically zero.
pub const DEGENERATE_M_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Sign branch of the two-term field superposition, fixed by the detected
/// atomic outcome: |ge⟩, |eg⟩ → plus; |gg⟩, |ee⟩ → minus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(&self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }

    pub fn from_outcome(outcome: AtomicOutcome) -> Branch {
        match outcome {
            AtomicOutcome::Ge | AtomicOutcome::Eg => Branch::Plus,
            AtomicOutcome::Gg | AtomicOutcome::Ee => Branch::Minus,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plus" => Ok(Branch::Plus),
            "minus" => Ok(Branch::Minus),
            other => Err(format!("unknown branch `{other}` (expected plus|minus)")),
        }
    }
}

/// Bare-basis atomic detection outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomicOutcome {
    Gg,
    Ge,
    Eg,
    Ee,
}

impl AtomicOutcome {
    pub const ALL: [AtomicOutcome; 4] = [
        AtomicOutcome::Gg,
        AtomicOutcome::Ge,
        AtomicOutcome::Eg,
        AtomicOutcome::Ee,
    ];

    /// Flat index in the bare atomic layout (gg, ge, eg, ee).
    pub fn index(&self) -> usize {
        match self {
            AtomicOutcome::Gg => 0,
            AtomicOutcome::Ge => 1,
            AtomicOutcome::Eg => 2,
            AtomicOutcome::Ee => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AtomicOutcome::Gg => "gg",
            AtomicOutcome::Ge => "ge",
            AtomicOutcome::Eg => "eg",
            AtomicOutcome::Ee => "ee",
        }
    }
}

/// Dressed two-atom sector, ordered to match the composite layout
/// (index 0 ↔ |+⟩ per atom).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DressedSector {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl DressedSector {
    pub const ALL: [DressedSector; 4] = [
        DressedSector::PlusPlus,
        DressedSector::PlusMinus,
        DressedSector::MinusPlus,
        DressedSector::MinusMinus,
    ];

    pub fn index(&self) -> usize {
        match self {
            DressedSector::PlusPlus => 0,
            DressedSector::PlusMinus => 1,
            DressedSector::MinusPlus => 2,
            DressedSector::MinusMinus => 3,
        }
    }

    /// (s₁, s₂) with s = +1 for |+⟩ and −1 for |−⟩.
    pub fn signs(&self) -> (f64, f64) {
        match self {
            DressedSector::PlusPlus => (1.0, 1.0),
            DressedSector::PlusMinus => (1.0, -1.0),
            DressedSector::MinusPlus => (-1.0, 1.0),
            DressedSector::MinusMinus => (-1.0, -1.0),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DressedSector::PlusPlus => "++",
            DressedSector::PlusMinus => "+-",
            DressedSector::MinusPlus => "-+",
            DressedSector::MinusMinus => "--",
        }
    }
}

/// The seven coherent-product field outcomes distinguishable after
/// retrieval: |0,0⟩, |∓iλ₁t′, ∓iλ₂t′⟩, |∓iλ₁t′, 0⟩ and |0, ∓iλ₂t′⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    VacVac,
    MinusMinus,
    PlusPlus,
    MinusVac,
    PlusVac,
    VacMinus,
    VacPlus,
}

impl ProjectionKind {
    pub const ALL: [ProjectionKind; 7] = [
        ProjectionKind::VacVac,
        ProjectionKind::MinusMinus,
        ProjectionKind::PlusPlus,
        ProjectionKind::MinusVac,
        ProjectionKind::PlusVac,
        ProjectionKind::VacMinus,
        ProjectionKind::VacPlus,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ProjectionKind::VacVac => "vac_vac",
            ProjectionKind::MinusMinus => "mm",
            ProjectionKind::PlusPlus => "pp",
            ProjectionKind::MinusVac => "m0",
            ProjectionKind::PlusVac => "p0",
            ProjectionKind::VacMinus => "0m",
            ProjectionKind::VacPlus => "0p",
        }
    }

    /// Coherent labels (γ₁, γ₂) of the projector |γ₁, γ₂⟩⟨γ₁, γ₂|.
    pub fn coherent_labels(&self, params: &SystemParams, tprime: f64) -> (C64, C64) {
        let b1 = params.lambda1() * tprime;
        let b2 = params.lambda2() * tprime;
        let zero = C64::new(0.0, 0.0);
        match self {
            ProjectionKind::VacVac => (zero, zero),
            ProjectionKind::MinusMinus => (C64::new(0.0, -b1), C64::new(0.0, -b2)),
            ProjectionKind::PlusPlus => (C64::new(0.0, b1), C64::new(0.0, b2)),
            ProjectionKind::MinusVac => (C64::new(0.0, -b1), zero),
            ProjectionKind::PlusVac => (C64::new(0.0, b1), zero),
            ProjectionKind::VacMinus => (zero, C64::new(0.0, -b2)),
            ProjectionKind::VacPlus => (zero, C64::new(0.0, b2)),
        }
    }
}

impl std::str::FromStr for ProjectionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        for kind in Self::ALL {
            if kind.label() == s {
                return Ok(kind);
            }
        }
        Err(format!(
            "unknown projection `{s}` (expected vac_vac|mm|pp|m0|p0|0m|0p)"
        ))
    }
}

// ---------------------------------------------------------------------------
// Symbolic field states
// ---------------------------------------------------------------------------

/// One coherent-product term c·|α₁, α₂⟩ of a two-mode field superposition.
#[derive(Debug, Clone, Copy)]
pub struct EcsTerm {
    pub coeff: C64,
    pub alpha1: C64,
    pub alpha2: C64,
}

/// Symbolic two-mode field state as a short list of coherent-product terms.
#[derive(Debug, Clone)]
pub struct EcsState {
    terms: Vec<EcsTerm>,
    normalized: bool,
    norm_const: Option<f64>,
}

impl EcsState {
    pub fn new(terms: Vec<EcsTerm>, normalized: bool, norm_const: Option<f64>) -> Result<Self> {
        if terms.is_empty() || terms.len() > 4 {
            return Err(Error::MalformedEcs {
                reason: format!("expected 1..=4 terms, got {}", terms.len()),
            });
        }
        let state = Self {
            terms,
            normalized,
            norm_const,
        };
        if normalized {
            let n = state.norm_sqr();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::MalformedEcs {
                    reason: format!("flagged normalized but ⟨ψ|ψ⟩ = {n}"),
                });
            }
        }
        Ok(state)
    }

    pub fn terms(&self) -> &[EcsTerm] {
        &self.terms
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Normalization constant M± carried from the generating measurement,
    /// when applicable.
    pub fn norm_const(&self) -> Option<f64> {
        self.norm_const
    }

    /// ⟨self|other⟩ through the exact coherent-state overlap.
    pub fn inner(&self, other: &EcsState) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                acc += a.coeff.conj()
                    * b.coeff
                    * overlap_analytic(a.alpha1, b.alpha1)
                    * overlap_analytic(a.alpha2, b.alpha2);
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).re
    }

    /// Largest coherent amplitude appearing in any term, for cutoff sizing.
    pub fn max_alpha_abs(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| [t.alpha1.norm(), t.alpha2.norm()])
            .fold(0.0, f64::max)
    }

    /// Render into the truncated two-mode Fock basis. Truncation loss is not
    /// renormalized away.
    pub fn to_fock(&self, cutoff: FockCutoff) -> Result<TwoModeState> {
        let mut out = TwoModeState::zero(cutoff);
        for term in &self.terms {
            let m1 = coherent_state(term.alpha1, cutoff)?;
            let m2 = coherent_state(term.alpha2, cutoff)?;
            let product = kron_vec(m1.view(), m2.view());
            out.amplitudes_mut().scaled_add(term.coeff, &product);
        }
        Ok(out)
    }

    /// Projector amplitude ⟨γ₁, γ₂|ψ⟩ via the analytic overlap.
    pub fn project_coherent(&self, gamma1: C64, gamma2: C64) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff * overlap_analytic(gamma1, t.alpha1) * overlap_analytic(gamma2, t.alpha2)
            })
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Two-qubit amplitude vectors
// ---------------------------------------------------------------------------

/// Four complex amplitudes of a two-qubit pure state over {gg, ge, eg, ee}
/// (bare) or {++, +−, −+, −−} (dressed).
#[derive(Debug, Clone)]
pub struct QubitPairState {
    amplitudes: [C64; 4],
    basis: AtomBasis,
    normalized: bool,
}

impl QubitPairState {
    pub fn unnormalized(amplitudes: [C64; 4], basis: AtomBasis) -> Self {
        Self {
            amplitudes,
            basis,
            normalized: false,
        }
    }

    pub fn normalized(amplitudes: [C64; 4], basis: AtomBasis) -> Result<Self> {
        let n2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if n2 < 1e-24 {
            return Err(Error::ZeroState);
        }
        let n = n2.sqrt();
        let amplitudes = amplitudes.map(|a| a / C64::new(n, 0.0));
        Ok(Self {
            amplitudes,
            basis,
            normalized: true,
        })
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amplitudes
    }

    pub fn basis(&self) -> AtomBasis {
        self.basis
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |⟨self|other⟩|² / (‖self‖²‖other‖²).
    pub fn fidelity_with(&self, other: &QubitPairState) -> f64 {
        let ip: C64 = self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let na = self.norm_sqr();
        let nb = other.norm_sqr();
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        ip.norm_sqr() / (na * nb)
    }
}

// ---------------------------------------------------------------------------
// Deposit stage
// ---------------------------------------------------------------------------

/// Normalization constant M± = 2[1 ± cos(2ut)·exp(−2|α₁|² − 2|α₂|²)] of the
/// post-detection field state, with α_j = −iλ_j t/2.
pub fn norm_const(params: &SystemParams, t: f64, branch: Branch) -> f64 {
    let a1 = params.lambda1() * t / 2.0;
    let a2 = params.lambda2() * t / 2.0;
    let g = (-2.0 * (a1 * a1 + a2 * a2)).exp();
    2.0 * (1.0 + branch.sign() * (2.0 * params.rabi_sum() * t).cos() * g)
}

/// Post-detection field state of the deposit stage and the probability of
/// each atomic outcome on the chosen branch.
///
/// Returns the normalized two-term state
/// (e^{iut}|α₁,α₂⟩ ± e^{−iut}|−α₁,−α₂⟩)/√M± with α_j = −iλ_j t/2,
/// and prob = M±/8 (per detected outcome; the four outcomes sum to 1).
pub fn deposit_state_analytic(
    params: &SystemParams,
    t: f64,
    branch: Branch,
) -> Result<(EcsState, f64)> {
    let m = norm_const(params, t, branch);
    if m < DEGENERATE_M_TOL {
        return Err(Error::DegenerateBranch { t, m });
    }
    let alpha1 = C64::new(0.0, -params.lambda1() * t / 2.0);
    let alpha2 = C64::new(0.0, -params.lambda2() * t / 2.0);
    let u = params.rabi_sum();
    let scale = C64::new(1.0 / m.sqrt(), 0.0);
    let terms = vec![
        EcsTerm {
            coeff: C64::from_polar(1.0, u * t) * scale,
            alpha1,
            alpha2,
        },
        EcsTerm {
            coeff: C64::from_polar(1.0, -u * t) * scale * C64::new(branch.sign(), 0.0),
            alpha1: -alpha1,
            alpha2: -alpha2,
        },
    ];
    let state = EcsState::new(terms, true, Some(m))?;
    Ok((state, m / 8.0))
}

// ---------------------------------------------------------------------------
// Retrieval stage
// ---------------------------------------------------------------------------

/// Coherent labels (A, B) of the two terms attached to each dressed sector
/// after retrieving for t′ = t: sector (s₁, s₂) displaces mode j by
/// −i·s_j·λ_j t′/2, taking the deposited ±α_j to the seven outcome labels.
fn sector_labels(
    params: &SystemParams,
    tprime: f64,
    sector: DressedSector,
) -> ((C64, C64), (C64, C64)) {
    let (s1, s2) = sector.signs();
    let zero = C64::new(0.0, 0.0);
    let first = |s: f64, lambda: f64| {
        if s > 0.0 {
            C64::new(0.0, -lambda * tprime)
        } else {
            zero
        }
    };
    let second = |s: f64, lambda: f64| {
        if s > 0.0 {
            zero
        } else {
            C64::new(0.0, lambda * tprime)
        }
    };
    (
        (first(s1, params.lambda1()), first(s2, params.lambda2())),
        (second(s1, params.lambda1()), second(s2, params.lambda2())),
    )
}

/// The four dressed-sector field superpositions after retrieval, e.g.
/// sector |+,+⟩ ↦ e^{iut′}|−iλ₁t′, −iλ₂t′⟩ ± e^{−iut′}|0,0⟩.
///
/// Each sector state carries the 1/(2√M±) prefactor inherited from the
/// deposited field and the |gg⟩ → dressed expansion, so the four sectors
/// assembled with their atomic labels form a normalized composite state.
/// Only t′ = t is defined by the protocol; other values are rejected.
pub fn retrieval_state_analytic(
    params: &SystemParams,
    t: f64,
    tprime: f64,
    branch: Branch,
) -> Result<Vec<(DressedSector, EcsState)>> {
    if (tprime - t).abs() > 1e-12 * t.abs().max(1.0) {
        return Err(Error::TPrimeMismatch { t, tprime });
    }
    let m = norm_const(params, t, branch);
    if m < DEGENERATE_M_TOL {
        return Err(Error::DegenerateBranch { t, m });
    }
    let u = params.rabi_sum();
    let scale = C64::new(1.0 / (2.0 * m.sqrt()), 0.0);
    let mut out = Vec::with_capacity(4);
    for sector in DressedSector::ALL {
        let ((a1, a2), (b1, b2)) = sector_labels(params, tprime, sector);
        let terms = vec![
            EcsTerm {
                coeff: C64::from_polar(1.0, u * tprime) * scale,
                alpha1: a1,
                alpha2: a2,
            },
            EcsTerm {
                coeff: C64::from_polar(1.0, -u * tprime) * scale * C64::new(branch.sign(), 0.0),
                alpha1: b1,
                alpha2: b2,
            },
        ];
        out.push((sector, EcsState::new(terms, false, Some(m))?));
    }
    Ok(out)
}

/// Post-selection amplitudes (p₁, p₂, p₃, p₄) over the dressed sectors for
/// a coherent-product projection of the retrieved field.
///
/// p_k = ⟨γ₁,γ₂| field branch k⟩ with the analytic coherent overlap, without
/// the 1/(2√M±) prefactor; the projection probability is Σ|p_k|²/(4M±).
pub fn p_coeffs(
    params: &SystemParams,
    tprime: f64,
    branch: Branch,
    projection: ProjectionKind,
) -> QubitPairState {
    let (g1, g2) = projection.coherent_labels(params, tprime);
    let u = params.rabi_sum();
    let plus_phase = C64::from_polar(1.0, u * tprime);
    let minus_phase = C64::from_polar(1.0, -u * tprime) * C64::new(branch.sign(), 0.0);
    let mut amps = [C64::new(0.0, 0.0); 4];
    for sector in DressedSector::ALL {
        let ((a1, a2), (b1, b2)) = sector_labels(params, tprime, sector);
        amps[sector.index()] = plus_phase * overlap_analytic(g1, a1) * overlap_analytic(g2, a2)
            + minus_phase * overlap_analytic(g1, b1) * overlap_analytic(g2, b2);
    }
    QubitPairState::unnormalized(amps, AtomBasis::Dressed)
}

/// Expand a dressed-sector amplitude vector on the bare atomic basis and
/// normalize:
/// A_gg = p₁+p₄+p₂+p₃, A_ge = p₁−p₄−p₂+p₃, A_eg = p₁−p₄+p₂−p₃,
/// A_ee = p₁+p₄−p₂−p₃ (an isometry up to the factor 2).
pub fn bare_amplitudes(p: &QubitPairState) -> Result<QubitPairState> {
    if p.basis() != AtomBasis::Dressed {
        return Err(Error::BasisFlagMismatch {
            expected: "dressed",
            got: p.basis().label(),
        });
    }
    let [p1, p2, p3, p4] = *p.amplitudes();
    let a = [
        p1 + p4 + p2 + p3,
        p1 - p4 - p2 + p3,
        p1 - p4 + p2 - p3,
        p1 + p4 - p2 - p3,
    ];
    QubitPairState::normalized(a, AtomBasis::Bare)
}
