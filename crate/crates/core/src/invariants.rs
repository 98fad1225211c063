//! Spin-spectrum decomposition, invariance checks, concurrence, 3-tangle, and
//! the correlation-ordering quadruple.
//!
//! For any pure three-qubit state the eigenvalues s₁ ≥ s₂ ≥ s₃ of S = T Tᵀ
//! split into an isotropic strength s_iso = (s₁+s₂+s₃)/3 and anisotropies
//! δs_j = s_j − s_iso. The isotropic strengths of the three pairs sum to 1,
//! and the anisotropies are identical for every pair — the two facts the
//! verification suites in this crate keep re-checking.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    clamp_psd_eigenvalue, hermitian_eigensystem, real_symmetric3_eigenvalues, C64, ComplexMatrix,
};
use crate::states::{CorrelationMatrix, Pair, PureState3, TwoQubitDensity};

/// Spectrum of S = T Tᵀ with its isotropic/anisotropic decomposition.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpinSpectrum {
    /// Eigenvalues of S, descending.
    pub s: [f64; 3],
    /// Mean eigenvalue.
    pub s_iso: f64,
    /// Deviations s_j − s_iso; they sum to zero by construction.
    pub delta: [f64; 3],
}

/// Pair-by-pair invariance data for one state.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    /// s_iso^AB + s_iso^AC + s_iso^BC; equals 1 for pure three-qubit states.
    pub iso_sum: f64,
    /// Isotropic strengths keyed by pair, in AB, AC, BC order.
    pub iso_terms: [f64; 3],
    /// Anisotropies per pair, same order.
    pub deltas: [[f64; 3]; 3],
    /// Largest |δs_j^pair − δs_j^pair'| over j and pair choices; zero in
    /// exact arithmetic.
    pub max_aniso_deviation: f64,
}

/// The four quantities of the quantitative ordering relation; all equal for
/// pure three-qubit states.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrderingQuadruple {
    /// (C^first)² − (C^second)²
    pub conc_diff: f64,
    /// (M^first − M^second) / 2
    pub horodecki_half_diff: f64,
    /// s_iso^first − s_iso^second
    pub iso_diff: f64,
    /// |bloch(second's distinct party)|² − |bloch(first's distinct party)|²
    pub bloch_diff: f64,
}

impl OrderingQuadruple {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.conc_diff,
            self.horodecki_half_diff,
            self.iso_diff,
            self.bloch_diff,
        ]
    }

    pub fn spread(&self) -> f64 {
        let v = self.as_array();
        let max = v.iter().fold(f64::MIN, |a, &b| a.max(b));
        let min = v.iter().fold(f64::MAX, |a, &b| a.min(b));
        max - min
    }
}

/// Decompose the spectrum of S = T Tᵀ. Tiny negative eigenvalues from
/// rounding are clamped to zero.
pub fn spin_spectrum(t: &CorrelationMatrix) -> SpinSpectrum {
    let eig = real_symmetric3_eigenvalues(&t.gram())
        .expect("T Tᵀ is symmetric by construction");
    let mut s = [0.0; 3];
    for (slot, &lambda) in s.iter_mut().zip(&eig) {
        *slot = clamp_psd_eigenvalue(lambda)
            .expect("T Tᵀ is positive semidefinite by construction");
    }
    let s_iso = (s[0] + s[1] + s[2]) / 3.0;
    SpinSpectrum {
        s,
        s_iso,
        delta: [s[0] - s_iso, s[1] - s_iso, s[2] - s_iso],
    }
}

/// Compute every pair's spectrum and the cross-pair deviations.
pub fn invariance_report(state: &PureState3) -> Result<InvarianceReport> {
    let spectra: Vec<SpinSpectrum> = Pair::ALL
        .iter()
        .map(|&pair| Ok(spin_spectrum(&state.correlation_matrix(pair)?)))
        .collect::<Result<_>>()?;
    let iso_terms = [spectra[0].s_iso, spectra[1].s_iso, spectra[2].s_iso];
    let deltas = [spectra[0].delta, spectra[1].delta, spectra[2].delta];
    let mut max_dev = 0.0_f64;
    for a in 0..3 {
        for b in (a + 1)..3 {
            for j in 0..3 {
                max_dev = max_dev.max((deltas[a][j] - deltas[b][j]).abs());
            }
        }
    }
    Ok(InvarianceReport {
        iso_sum: iso_terms.iter().sum(),
        iso_terms,
        deltas,
        max_aniso_deviation: max_dev,
    })
}

fn spin_flip(m: &ComplexMatrix) -> ComplexMatrix {
    // ρ̃ = (σ₂⊗σ₂) ρ* (σ₂⊗σ₂), conjugation in the computational basis
    let yy = crate::linalg::tensor_product(&crate::linalg::pauli(2), &crate::linalg::pauli(2));
    yy.mul(&m.conj()).mul(&yy)
}

/// Wootters concurrence of an arbitrary two-qubit density matrix.
///
/// Uses the Hermitian form √ρ ρ̃ √ρ, whose eigenvalues are the squares of the
/// usual λ_i. Square roots of near-zero eigenvalues limit the achievable
/// accuracy to roughly 1e-7; exact pure-state work should go through
/// [`pair_concurrence_squared`] instead.
pub fn concurrence(rho: &TwoQubitDensity) -> f64 {
    let eig = hermitian_eigensystem(rho.matrix()).expect("density matrix is Hermitian");
    let mut sqrt_rho = ComplexMatrix::zeros(4, 4);
    for (i, &lambda) in eig.values.iter().enumerate() {
        let root = lambda.max(0.0).sqrt();
        for r in 0..4 {
            for c in 0..4 {
                sqrt_rho[(r, c)] +=
                    eig.vectors[(r, i)] * eig.vectors[(c, i)].conj() * C64::new(root, 0.0);
            }
        }
    }
    let hermitian_form = sqrt_rho.mul(&spin_flip(rho.matrix())).mul(&sqrt_rho);
    let mu = hermitian_eigensystem(&hermitian_form)
        .expect("√ρ ρ̃ √ρ is Hermitian")
        .values;
    let lambda: Vec<f64> = mu.iter().map(|&m| m.max(0.0).sqrt()).collect();
    (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0)
}

/// Squared concurrence of one pair of a *pure* three-qubit state.
///
/// The reduction has rank ≤ 2, so with ψ = Σ_c φ_c ⊗ |c⟩ the nonzero λ's are
/// the singular values of the 2×2 matrix τ_{cd} = φ_cᵀ (σ₂⊗σ₂) φ_d, giving
///
///   C² = Σ_{cd} |τ_{cd}|² − 2 |det τ|
///
/// in closed form. No eigenvalue square roots are taken, so this is accurate
/// to machine precision even where the generic route loses half its digits.
pub fn pair_concurrence_squared(state: &PureState3, pair: Pair) -> f64 {
    let amp = state.amplitudes();
    // φ_c[idx] with idx = 2·(first party) + (second party)
    let mut phi = [[C64::new(0.0, 0.0); 4]; 2];
    for a in 0..2usize {
        for b in 0..2usize {
            for c in 0..2usize {
                let z = amp[4 * a + 2 * b + c];
                let (idx, comp) = match pair {
                    Pair::AB => (2 * a + b, c),
                    Pair::AC => (2 * a + c, b),
                    Pair::BC => (2 * b + c, a),
                };
                phi[comp][idx] = z;
            }
        }
    }
    // φᵀ (σ₂⊗σ₂) φ' = −φ₀φ'₃ + φ₁φ'₂ + φ₂φ'₁ − φ₃φ'₀
    let tilde = |x: &[C64; 4], y: &[C64; 4]| -x[0] * y[3] + x[1] * y[2] + x[2] * y[1] - x[3] * y[0];
    let t00 = tilde(&phi[0], &phi[0]);
    let t01 = tilde(&phi[0], &phi[1]);
    let t11 = tilde(&phi[1], &phi[1]);
    let trace = t00.norm_sqr() + 2.0 * t01.norm_sqr() + t11.norm_sqr();
    let det = (t00 * t11 - t01 * t01).norm();
    (trace - 2.0 * det).max(0.0)
}

/// Residual 3-tangle τ = C²_{A(BC)} − C²_{AB} − C²_{AC}, with
/// C²_{A(BC)} = 4 det ρ_A. Zero for W-class states, positive for GHZ-class.
pub fn three_tangle(state: &PureState3) -> Result<f64> {
    let rho_a = state.reduce_party(crate::states::Party::A);
    let det = rho_a[(0, 0)] * rho_a[(1, 1)] - rho_a[(0, 1)] * rho_a[(1, 0)];
    let tau = 4.0 * det.re
        - pair_concurrence_squared(state, Pair::AB)
        - pair_concurrence_squared(state, Pair::AC);
    if tau < -1e-6 {
        return Err(Error::CkwViolation { tau });
    }
    Ok(if tau < 0.0 { 0.0 } else { tau })
}

/// The four ordering quantities for a pair of distinct qubit pairs, with the
/// Bloch difference taken over the parties the two pairs do not share.
pub fn ordering_quadruple(
    state: &PureState3,
    first: Pair,
    second: Pair,
) -> Result<OrderingQuadruple> {
    if first == second {
        return Err(Error::SamePair);
    }
    let conc_diff =
        pair_concurrence_squared(state, first) - pair_concurrence_squared(state, second);
    let spec_first = spin_spectrum(&state.correlation_matrix(first)?);
    let spec_second = spin_spectrum(&state.correlation_matrix(second)?);
    let m_first = spec_first.s[0] + spec_first.s[1];
    let m_second = spec_second.s[0] + spec_second.s[1];
    let p_first = first.distinct_party(second).expect("distinct pairs");
    let p_second = second.distinct_party(first).expect("distinct pairs");
    Ok(OrderingQuadruple {
        conc_diff,
        horodecki_half_diff: (m_first - m_second) / 2.0,
        iso_diff: spec_first.s_iso - spec_second.s_iso,
        bloch_diff: state.bloch_vector(p_second).norm_sq() - state.bloch_vector(p_first).norm_sq(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{ghz_class_state, haar_random_state, w_class_state, PureState3};
    use num_complex::Complex64;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} != {b} (tol {tol})");
    }

    fn bell_embedded() -> PureState3 {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut amp = [Complex64::new(0.0, 0.0); 8];
        amp[0b110] = Complex64::new(inv, 0.0);
        amp[0b011] = Complex64::new(inv, 0.0);
        PureState3::from_amplitudes(amp).unwrap()
    }

    #[test]
    fn spectrum_isotropic_bell() {
        let t = CorrelationMatrix([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]);
        let spec = spin_spectrum(&t);
        assert_eq!(spec.s, [1.0, 1.0, 1.0]);
        assert_close(spec.s_iso, 1.0, 1e-15);
        for d in spec.delta {
            assert_close(d, 0.0, 1e-15);
        }
    }

    #[test]
    fn spectrum_product_pair() {
        let mut t = [[0.0; 3]; 3];
        t[2][2] = 1.0;
        let spec = spin_spectrum(&CorrelationMatrix(t));
        assert_eq!(spec.s, [1.0, 0.0, 0.0]);
        assert_close(spec.s_iso, 1.0 / 3.0, 1e-15);
        assert_close(spec.delta[0], 2.0 / 3.0, 1e-15);
        assert_close(spec.delta[1], -1.0 / 3.0, 1e-15);
        assert_close(spec.delta[2], -1.0 / 3.0, 1e-15);
    }

    #[test]
    fn spectrum_w_45_45() {
        // exact spectrum of T^AB: s = (1/4, 1/4, 0), δ = (1/12, 1/12, -1/6)
        let t = w_class_state(45.0, 45.0)
            .correlation_matrix(Pair::AB)
            .unwrap();
        let spec = spin_spectrum(&t);
        assert_close(spec.s[0], 0.25, 1e-12);
        assert_close(spec.s[1], 0.25, 1e-12);
        assert_close(spec.s[2], 0.0, 1e-12);
        assert_close(spec.delta[0], 1.0 / 12.0, 1e-12);
        assert_close(spec.delta[1], 1.0 / 12.0, 1e-12);
        assert_close(spec.delta[2], -1.0 / 6.0, 1e-12);
    }

    #[test]
    fn delta_sums_to_zero() {
        for seed in 0..200u64 {
            let state = haar_random_state(seed);
            for pair in Pair::ALL {
                let spec = spin_spectrum(&state.correlation_matrix(pair).unwrap());
                let sum: f64 = spec.delta.iter().sum();
                assert!(sum.abs() < 1e-12);
                assert!(spec.s[0] >= spec.s[1] && spec.s[1] >= spec.s[2]);
                assert!(spec.s[0] <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn invariance_on_random_states() {
        for seed in 0..2000u64 {
            let report = invariance_report(&haar_random_state(seed)).unwrap();
            assert!(
                (report.iso_sum - 1.0).abs() < 1e-10,
                "seed {seed}: iso_sum = {}",
                report.iso_sum
            );
            assert!(
                report.max_aniso_deviation < 1e-10,
                "seed {seed}: dev = {}",
                report.max_aniso_deviation
            );
        }
    }

    #[test]
    fn invariance_w_20_0() {
        let report = invariance_report(&w_class_state(20.0, 0.0)).unwrap();
        assert_close(report.iso_sum, 1.0, 1e-12);
        // frozen exact anisotropies for this row: (0.39122, -0.19561, -0.19561)
        assert_close(report.deltas[0][0], 0.391216059222, 1e-9);
        assert_close(report.deltas[0][1], -0.195608029611, 1e-9);
    }

    #[test]
    fn invariance_under_local_unitaries() {
        for seed in 0..100u64 {
            let state = haar_random_state(seed);
            let rotated = state
                .apply_local_unitaries(
                    &crate::states::random_local_unitary(7 * seed),
                    &crate::states::random_local_unitary(7 * seed + 1),
                    &crate::states::random_local_unitary(7 * seed + 2),
                )
                .unwrap();
            let a = invariance_report(&state).unwrap();
            let b = invariance_report(&rotated).unwrap();
            assert!((a.iso_sum - b.iso_sum).abs() < 1e-9);
            for (da, db) in a.deltas.iter().zip(&b.deltas) {
                for j in 0..3 {
                    assert!((da[j] - db[j]).abs() < 1e-9, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn concurrence_examples() {
        // Bell projector -> 1
        let rho = bell_embedded().reduce_pair(Pair::AC);
        assert_close(concurrence(&rho), 1.0, 1e-7);

        // product projector -> 0
        let rho = w_class_state(0.0, 0.0).reduce_pair(Pair::AB);
        assert_close(concurrence(&rho), 0.0, 1e-7);

        // canonical W state: pair concurrence 2/3
        let third = (1.0_f64 / 3.0).sqrt();
        let mut amp = [Complex64::new(0.0, 0.0); 8];
        amp[0b001] = Complex64::new(third, 0.0);
        amp[0b010] = Complex64::new(third, 0.0);
        amp[0b100] = Complex64::new(third, 0.0);
        let w = PureState3::from_amplitudes(amp).unwrap();
        assert_close(concurrence(&w.reduce_pair(Pair::AB)), 2.0 / 3.0, 1e-7);
        assert_close(pair_concurrence_squared(&w, Pair::AB), 4.0 / 9.0, 1e-12);
    }

    #[test]
    fn closed_form_matches_wootters() {
        for seed in 0..200u64 {
            let state = haar_random_state(seed);
            for pair in Pair::ALL {
                let general = concurrence(&state.reduce_pair(pair)).powi(2);
                let closed = pair_concurrence_squared(&state, pair);
                assert!(
                    (general - closed).abs() < 2e-6,
                    "seed {seed} pair {pair:?}: {general} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn tangle_examples() {
        // W-class states carry zero 3-tangle
        for i in 0..10 {
            for j in 0..10 {
                let state = w_class_state(90.0 * i as f64 / 9.0, 90.0 * j as f64 / 9.0);
                let tau = three_tangle(&state).unwrap();
                assert!(tau.abs() < 1e-9, "({i},{j}): tau = {tau}");
            }
        }

        // standard GHZ: tangle 1
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut amp = [Complex64::new(0.0, 0.0); 8];
        amp[0b000] = Complex64::new(inv, 0.0);
        amp[0b111] = Complex64::new(inv, 0.0);
        let ghz = PureState3::from_amplitudes(amp).unwrap();
        assert_close(three_tangle(&ghz).unwrap(), 1.0, 1e-12);

        // frozen exact values for the GHZ-class rows
        assert_close(three_tangle(&ghz_class_state(20.0)).unwrap(), 0.206587955583, 1e-9);
        assert_close(three_tangle(&ghz_class_state(30.0)).unwrap(), 0.375, 1e-12);
        assert_close(three_tangle(&ghz_class_state(45.0)).unwrap(), 0.5, 1e-12);
        assert!(three_tangle(&ghz_class_state(45.0)).unwrap() > 0.05);
    }

    #[test]
    fn ordering_examples() {
        let q = ordering_quadruple(&w_class_state(0.0, 0.0), Pair::AB, Pair::AC).unwrap();
        for v in q.as_array() {
            assert_close(v, 0.0, 1e-12);
        }

        // C^AB = 0, C^AC = 1, |b| = 1, |c| = 0: everything equals -1
        let q = ordering_quadruple(&w_class_state(45.0, 0.0), Pair::AB, Pair::AC).unwrap();
        for v in q.as_array() {
            assert_close(v, -1.0, 1e-12);
        }

        // frozen exact value for the GHZ-class 30° row
        let q = ordering_quadruple(&ghz_class_state(30.0), Pair::AB, Pair::AC).unwrap();
        for v in q.as_array() {
            assert_close(v, -0.375, 1e-10);
        }
        assert!(q.spread() < 1e-10);
    }

    #[test]
    fn ordering_rejects_same_pair() {
        let state = w_class_state(30.0, 30.0);
        assert!(matches!(
            ordering_quadruple(&state, Pair::AB, Pair::AB),
            Err(Error::SamePair)
        ));
    }

    #[test]
    fn ordering_equality_random() {
        for seed in 0..300u64 {
            let state = haar_random_state(seed);
            for (first, second) in [(Pair::AB, Pair::AC), (Pair::AB, Pair::BC), (Pair::AC, Pair::BC)]
            {
                let q = ordering_quadruple(&state, first, second).unwrap();
                assert!(
                    q.spread() < 1e-9,
                    "seed {seed} {first:?}/{second:?}: {q:?}"
                );
                // the universal ordering: concurrence and isotropic strength
                // order pairs the same way
                assert!(q.conc_diff * q.iso_diff >= -1e-12);
            }
        }
    }

    #[test]
    fn tangle_not_determined_by_anisotropy() {
        // demo: two states with identical anisotropies (0.41667, -0.20833,
        // -0.20833) but different 3-tangle, so the anisotropies carry no
        // information about the tangle. The W angle was solved numerically
        // for δs₁ = ghz(30°)'s δs₁.
        let w = w_class_state(18.880621953517508, 0.0);
        let g = ghz_class_state(30.0);
        let delta_w = invariance_report(&w).unwrap().deltas[0];
        let delta_g = invariance_report(&g).unwrap().deltas[0];
        for j in 0..3 {
            assert_close(delta_w[j], delta_g[j], 1e-9);
        }
        assert_close(three_tangle(&w).unwrap(), 0.0, 1e-10);
        assert_close(three_tangle(&g).unwrap(), 0.375, 1e-10);
    }
}
