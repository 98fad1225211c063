//! Horodecki parameter, CHSH expectation values, optimal measurement
//! directions, and the strong monogamy relation.
//!
//! A qubit pair with correlation matrix T can violate the CHSH inequality iff
//! M = s₁ + s₂ > 1, where s₁ ≥ s₂ are the two largest eigenvalues of T Tᵀ;
//! the maximal CHSH value is 2√M. For a pure three-qubit state the pair
//! parameters obey M^AB + M^AC = 2(1 − s₃^BC) ≤ 2, which caps
//! ⟨B_AB⟩² + ⟨B_AC⟩² at 8 for every choice of directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::spin_spectrum;
use crate::linalg::{hermitian_eigensystem, C64, ComplexMatrix};
use crate::states::{CorrelationMatrix, Pair, PureState3};

const UNIT_TOL: f64 = 1e-10;

/// Two measurement directions per party of a pair: a₁, a₂ for the first
/// party, b₁, b₂ for the second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDirections {
    pub a1: [f64; 3],
    pub a2: [f64; 3],
    pub b1: [f64; 3],
    pub b2: [f64; 3],
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = norm3(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

impl MeasurementDirections {
    pub fn new(a1: [f64; 3], a2: [f64; 3], b1: [f64; 3], b2: [f64; 3]) -> Result<Self> {
        let dirs = MeasurementDirections { a1, a2, b1, b2 };
        dirs.validate()?;
        Ok(dirs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a1", self.a1),
            ("a2", self.a2),
            ("b1", self.b1),
            ("b2", self.b2),
        ] {
            let norm = norm3(v);
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::NotUnitDirection {
                    name,
                    norm,
                    tolerance: UNIT_TOL,
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("directions serialization")
    }

    /// Parse the directions file schema, validating unit norms on load.
    pub fn from_json(text: &str) -> Result<Self> {
        let dirs: MeasurementDirections = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("directions file: {e}")))?;
        dirs.validate()?;
        Ok(dirs)
    }
}

/// Optimal CHSH settings for a correlation matrix, together with the value
/// 2√(s₁+s₂) they achieve.
#[derive(Clone, Debug, Serialize)]
pub struct OptimalSettings {
    pub directions: MeasurementDirections,
    pub value: f64,
    /// Set when the correlation matrix is (numerically) zero and the
    /// returned axes are an arbitrary canonical choice.
    pub degenerate: bool,
}

/// Monogamy data for the AB/AC pairs of one state.
#[derive(Clone, Debug, Serialize)]
pub struct MonogamyReport {
    pub m_ab: f64,
    pub m_ac: f64,
    /// 2(1 − s₃^BC); equals m_ab + m_ac for pure states.
    pub bound: f64,
    pub chsh_ab_sq: f64,
    pub chsh_ac_sq: f64,
}

/// M = s₁ + s₂ of T Tᵀ. The pair can violate CHSH iff M > 1.
pub fn horodecki_parameter(t: &CorrelationMatrix) -> f64 {
    let spec = spin_spectrum(t);
    spec.s[0] + spec.s[1]
}

/// ⟨B⟩ = a₁ᵀT(b₁+b₂) + a₂ᵀT(b₁−b₂) for the pair's correlation matrix.
pub fn chsh_expectation(
    state: &PureState3,
    pair: Pair,
    dirs: &MeasurementDirections,
) -> Result<f64> {
    dirs.validate()?;
    let t = state.correlation_matrix(pair)?;
    Ok(chsh_from_correlation(&t, dirs))
}

/// Same contraction, on an already-computed correlation matrix.
pub fn chsh_from_correlation(t: &CorrelationMatrix, dirs: &MeasurementDirections) -> f64 {
    let plus = [
        dirs.b1[0] + dirs.b2[0],
        dirs.b1[1] + dirs.b2[1],
        dirs.b1[2] + dirs.b2[2],
    ];
    let minus = [
        dirs.b1[0] - dirs.b2[0],
        dirs.b1[1] - dirs.b2[1],
        dirs.b1[2] - dirs.b2[2],
    ];
    t.bilinear(dirs.a1, plus) + t.bilinear(dirs.a2, minus)
}

/// Directions maximizing ⟨B⟩, built from the top two eigenvectors v₁, v₂ of
/// TᵀT: b₁,₂ = cos χ v₁ ± sin χ v₂ with tan χ = √(s₂/s₁), and a₁ ∝ T v₁,
/// a₂ ∝ T v₂ so that each a_i is aligned with T(b₁±b₂). Achieves 2√(s₁+s₂).
pub fn optimal_chsh_settings(t: &CorrelationMatrix) -> OptimalSettings {
    let spec = spin_spectrum(t);
    let (s1, s2) = (spec.s[0], spec.s[1]);

    if s1 < 1e-12 {
        // zero correlation: no preferred directions, value 0
        let dirs = MeasurementDirections {
            a1: [1.0, 0.0, 0.0],
            a2: [0.0, 1.0, 0.0],
            b1: [1.0, 0.0, 0.0],
            b2: [0.0, 1.0, 0.0],
        };
        return OptimalSettings {
            directions: dirs,
            value: 0.0,
            degenerate: true,
        };
    }

    // eigenvectors of TᵀT live on the second party's side
    let gram_t = t.gram_transposed();
    let m = ComplexMatrix::from_fn(3, 3, |r, c| C64::new(gram_t[r][c], 0.0));
    let eig = hermitian_eigensystem(&m).expect("TᵀT is symmetric");
    let column = |c: usize| -> [f64; 3] { [eig.vectors[(0, c)].re, eig.vectors[(1, c)].re, eig.vectors[(2, c)].re] };
    let v1 = normalize3(column(0));
    let v2 = normalize3(column(1));

    let chi = (s2.max(0.0) / s1).sqrt().atan();
    let (sin_chi, cos_chi) = chi.sin_cos();
    let b1 = [
        cos_chi * v1[0] + sin_chi * v2[0],
        cos_chi * v1[1] + sin_chi * v2[1],
        cos_chi * v1[2] + sin_chi * v2[2],
    ];
    let b2 = [
        cos_chi * v1[0] - sin_chi * v2[0],
        cos_chi * v1[1] - sin_chi * v2[1],
        cos_chi * v1[2] - sin_chi * v2[2],
    ];

    let tv1 = t.apply(v1);
    let a1 = normalize3(tv1);
    let tv2 = t.apply(v2);
    let a2 = if norm3(tv2) > 1e-12 {
        normalize3(tv2)
    } else {
        // s₂ = 0: the a₂ term vanishes, any unit vector orthogonal to a₁ works
        let fallback = if a1[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let dot = a1[0] * fallback[0] + a1[1] * fallback[1] + a1[2] * fallback[2];
        normalize3([
            fallback[0] - dot * a1[0],
            fallback[1] - dot * a1[1],
            fallback[2] - dot * a1[2],
        ])
    };

    OptimalSettings {
        directions: MeasurementDirections { a1, a2, b1, b2 },
        value: 2.0 * (s1 + s2).sqrt(),
        degenerate: false,
    }
}

/// Horodecki parameters of AB and AC, the monogamy bound 2(1 − s₃^BC), and
/// the squared CHSH expectations at the given directions.
pub fn monogamy_report(
    state: &PureState3,
    dirs_ab: &MeasurementDirections,
    dirs_ac: &MeasurementDirections,
) -> Result<MonogamyReport> {
    let t_ab = state.correlation_matrix(Pair::AB)?;
    let t_ac = state.correlation_matrix(Pair::AC)?;
    let t_bc = state.correlation_matrix(Pair::BC)?;
    dirs_ab.validate()?;
    dirs_ac.validate()?;
    let s_bc = spin_spectrum(&t_bc);
    Ok(MonogamyReport {
        m_ab: horodecki_parameter(&t_ab),
        m_ac: horodecki_parameter(&t_ac),
        bound: 2.0 * (1.0 - s_bc.s[2]),
        chsh_ab_sq: chsh_from_correlation(&t_ab, dirs_ab).powi(2),
        chsh_ac_sq: chsh_from_correlation(&t_ac, dirs_ac).powi(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{haar_random_state, w_class_state, PureState3};
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

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

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let v = [
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
            ];
            if norm3(v) > 1e-6 {
                return normalize3(v);
            }
        }
    }

    #[test]
    fn horodecki_examples() {
        let bell = CorrelationMatrix([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_close(horodecki_parameter(&bell), 2.0, 1e-12);

        let mut product = [[0.0; 3]; 3];
        product[2][2] = 1.0;
        assert_close(horodecki_parameter(&CorrelationMatrix(product)), 1.0, 1e-12);

        // frozen exact value: M^AC of w(45°,15°) is 1 + √3/2
        let t = w_class_state(45.0, 15.0)
            .correlation_matrix(Pair::AC)
            .unwrap();
        assert_close(horodecki_parameter(&t), 1.0 + 3.0_f64.sqrt() / 2.0, 1e-12);
    }

    #[test]
    fn chsh_saturates_tsirelson_on_bell_pair() {
        let state = bell_embedded();
        let t = state.correlation_matrix(Pair::AC).unwrap();
        let opt = optimal_chsh_settings(&t);
        assert_close(opt.value, 2.0 * SQRT_2, 1e-12);
        let b = chsh_expectation(&state, Pair::AC, &opt.directions).unwrap();
        assert_close(b, 2.0 * SQRT_2, 1e-10);
    }

    #[test]
    fn chsh_collapses_when_b_directions_coincide() {
        let state = w_class_state(45.0, 45.0);
        let dirs = MeasurementDirections::new(
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
        )
        .unwrap();
        let b = chsh_expectation(&state, Pair::AB, &dirs).unwrap();
        let t = state.correlation_matrix(Pair::AB).unwrap();
        assert_close(b, 2.0 * t.bilinear([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]), 1e-12);
        assert!(b.abs() <= 2.0 + 1e-12);
    }

    #[test]
    fn chsh_paper_directions_for_w_45_45() {
        // frozen exact values at a₁=x, a₂=y, b₁,₂=(x±y)/√2:
        // ⟨B_AB⟩ = √2 (so ⟨B⟩²/4 = 0.5) and ⟨B_AC⟩ = 2 (so 1.0)
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let dirs = MeasurementDirections::new(
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [inv, inv, 0.0],
            [inv, -inv, 0.0],
        )
        .unwrap();
        let state = w_class_state(45.0, 45.0);
        let b_ab = chsh_expectation(&state, Pair::AB, &dirs).unwrap();
        assert_close(b_ab.powi(2) / 4.0, 0.5, 1e-12);
        let b_ac = chsh_expectation(&state, Pair::AC, &dirs).unwrap();
        assert_close(b_ac.powi(2) / 4.0, 1.0, 1e-12);
    }

    #[test]
    fn chsh_rejects_non_unit_directions() {
        let dirs = MeasurementDirections {
            a1: [1.0, 1.0, 0.0],
            a2: [0.0, 1.0, 0.0],
            b1: [1.0, 0.0, 0.0],
            b2: [0.0, 1.0, 0.0],
        };
        assert!(matches!(
            chsh_expectation(&w_class_state(10.0, 0.0), Pair::AB, &dirs),
            Err(Error::NotUnitDirection { name: "a1", .. })
        ));
    }

    #[test]
    fn optimal_settings_product_pair() {
        let mut t = [[0.0; 3]; 3];
        t[2][2] = 1.0;
        let opt = optimal_chsh_settings(&CorrelationMatrix(t));
        assert_close(opt.value, 2.0, 1e-12);
        assert!(!opt.degenerate);
        // χ = 0 so both b directions coincide with ±z
        for i in 0..3 {
            assert_close(opt.directions.b1[i], opt.directions.b2[i], 1e-12);
        }
        assert_close(opt.directions.b1[2].abs(), 1.0, 1e-12);
        let b = chsh_from_correlation(&CorrelationMatrix(t), &opt.directions);
        assert_close(b, 2.0, 1e-10);
    }

    #[test]
    fn optimal_settings_degenerate_zero_matrix() {
        let opt = optimal_chsh_settings(&CorrelationMatrix([[0.0; 3]; 3]));
        assert!(opt.degenerate);
        assert_eq!(opt.value, 0.0);
        assert!(opt.directions.validate().is_ok());
    }

    #[test]
    fn optimal_settings_achieve_value_on_random_states() {
        for seed in 0..200u64 {
            let state = haar_random_state(seed);
            for pair in Pair::ALL {
                let t = state.correlation_matrix(pair).unwrap();
                let opt = optimal_chsh_settings(&t);
                let b = chsh_from_correlation(&t, &opt.directions);
                assert!(
                    (b - opt.value).abs() < 1e-8,
                    "seed {seed} pair {pair:?}: {b} vs {}",
                    opt.value
                );
                let m = horodecki_parameter(&t);
                assert!(((b * b / 4.0) - m).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn random_directions_never_beat_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..50u64 {
            let state = haar_random_state(seed);
            let t = state.correlation_matrix(Pair::AB).unwrap();
            let opt = optimal_chsh_settings(&t);
            let m = horodecki_parameter(&t);
            for _ in 0..40 {
                let dirs = MeasurementDirections {
                    a1: random_unit(&mut rng),
                    a2: random_unit(&mut rng),
                    b1: random_unit(&mut rng),
                    b2: random_unit(&mut rng),
                };
                let b = chsh_from_correlation(&t, &dirs);
                assert!(b.abs() <= opt.value + 1e-8);
                assert!(b * b <= 4.0 * m + 1e-8);
                assert!(b * b <= 8.0 + 1e-9);
            }
        }
    }

    #[test]
    fn horodecki_identity_for_pure_states() {
        // M^AB = 1 + s₃^AB − s₃^AC − s₃^BC
        for seed in 0..300u64 {
            let state = haar_random_state(seed);
            let spec = |pair| {
                crate::invariants::spin_spectrum(&state.correlation_matrix(pair).unwrap())
            };
            let m_ab = horodecki_parameter(&state.correlation_matrix(Pair::AB).unwrap());
            let rhs = 1.0 + spec(Pair::AB).s[2] - spec(Pair::AC).s[2] - spec(Pair::BC).s[2];
            assert!((m_ab - rhs).abs() < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn monogamy_product_state() {
        let state = w_class_state(0.0, 0.0); // |110⟩
        let t_ab = state.correlation_matrix(Pair::AB).unwrap();
        let t_ac = state.correlation_matrix(Pair::AC).unwrap();
        let report = monogamy_report(
            &state,
            &optimal_chsh_settings(&t_ab).directions,
            &optimal_chsh_settings(&t_ac).directions,
        )
        .unwrap();
        assert_close(report.m_ab, 1.0, 1e-12);
        assert_close(report.m_ac, 1.0, 1e-12);
        assert_close(report.bound, 2.0, 1e-12);
    }

    #[test]
    fn monogamy_w_45_15() {
        // frozen exact sum: M^AB + M^AC = 1/8 + (1 + √3/2) = 2(1 − s₃^BC)
        let state = w_class_state(45.0, 15.0);
        let t_ab = state.correlation_matrix(Pair::AB).unwrap();
        let t_ac = state.correlation_matrix(Pair::AC).unwrap();
        let report = monogamy_report(
            &state,
            &optimal_chsh_settings(&t_ab).directions,
            &optimal_chsh_settings(&t_ac).directions,
        )
        .unwrap();
        assert_close(report.m_ab, 0.125, 1e-12);
        assert_close(report.m_ac, 1.0 + 3.0_f64.sqrt() / 2.0, 1e-12);
        assert_close(report.m_ab + report.m_ac, report.bound, 1e-10);
        assert!(report.bound <= 2.0 + 1e-12);
    }

    #[test]
    fn monogamy_identity_and_bell_cap_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for seed in 0..300u64 {
            let state = haar_random_state(seed);
            let dirs_ab = MeasurementDirections {
                a1: random_unit(&mut rng),
                a2: random_unit(&mut rng),
                b1: random_unit(&mut rng),
                b2: random_unit(&mut rng),
            };
            let dirs_ac = MeasurementDirections {
                a1: random_unit(&mut rng),
                a2: random_unit(&mut rng),
                b1: random_unit(&mut rng),
                b2: random_unit(&mut rng),
            };
            let report = monogamy_report(&state, &dirs_ab, &dirs_ac).unwrap();
            assert!((report.m_ab + report.m_ac - report.bound).abs() < 1e-10);
            assert!(report.bound <= 2.0 + 1e-12);
            assert!(report.chsh_ab_sq + report.chsh_ac_sq <= 8.0 + 1e-6);
        }
    }

    #[test]
    fn directions_file_round_trip() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let dirs = MeasurementDirections::new(
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [inv, inv, 0.0],
            [inv, -inv, 0.0],
        )
        .unwrap();
        let parsed = MeasurementDirections::from_json(&dirs.to_json()).unwrap();
        assert_eq!(parsed, dirs);

        let bad = r#"{"a1":[1,1,0],"a2":[0,1,0],"b1":[1,0,0],"b2":[0,1,0]}"#;
        assert!(matches!(
            MeasurementDirections::from_json(bad),
            Err(Error::NotUnitDirection { name: "a1", .. })
        ));
        assert!(MeasurementDirections::from_json("{").is_err());
    }
}
