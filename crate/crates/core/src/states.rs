//! Three-qubit state families, random states, and reductions.
//!
//! Amplitudes are indexed by the basis kets |abc⟩ with index 4a + 2b + c and
//! |0⟩ the +1 eigenstate of σ₃. Angles are taken in degrees everywhere on the
//! public surface and converted once, internally.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pauli, tensor_product, C64, ComplexMatrix, HERMITICITY_TOL};

/// Norm mismatch beyond which custom amplitudes are rejected instead of
/// renormalized (catches typos in hand-entered states).
pub const CUSTOM_NORM_TOL: f64 = 1e-6;

/// One of the three parties holding a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn label(self) -> &'static str {
        match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        }
    }
}

/// An unordered qubit pair, named by its parties in alphabetical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    AB,
    AC,
    BC,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::AB, Pair::AC, Pair::BC];

    pub fn first(self) -> Party {
        match self {
            Pair::AB | Pair::AC => Party::A,
            Pair::BC => Party::B,
        }
    }

    pub fn second(self) -> Party {
        match self {
            Pair::AB => Party::B,
            Pair::AC | Pair::BC => Party::C,
        }
    }

    /// The party traced out when reducing to this pair.
    pub fn complement(self) -> Party {
        match self {
            Pair::AB => Party::C,
            Pair::AC => Party::B,
            Pair::BC => Party::A,
        }
    }

    pub fn contains(self, party: Party) -> bool {
        self.first() == party || self.second() == party
    }

    /// The single party two distinct pairs have in common.
    pub fn shared_party(self, other: Pair) -> Option<Party> {
        if self == other {
            return None;
        }
        Party::ALL
            .into_iter()
            .find(|&p| self.contains(p) && other.contains(p))
    }

    /// The party of `self` that `other` does not contain.
    pub fn distinct_party(self, other: Pair) -> Option<Party> {
        if self == other {
            return None;
        }
        [self.first(), self.second()]
            .into_iter()
            .find(|&p| !other.contains(p))
    }

    pub fn label(self) -> &'static str {
        match self {
            Pair::AB => "AB",
            Pair::AC => "AC",
            Pair::BC => "BC",
        }
    }
}

/// Normalized pure state of three qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState3 {
    amp: [C64; 8],
}

/// Reduced two-qubit density matrix: 4×4, Hermitian, unit trace, PSD.
#[derive(Clone, Debug)]
pub struct TwoQubitDensity {
    matrix: ComplexMatrix,
}

/// Single-qubit Pauli expectation values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector(pub [f64; 3]);

/// 3×3 spin correlation matrix T with T[j,k] = ⟨σ_j ⊗ σ_k⟩; the first index
/// belongs to the pair's first party.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix(pub [[f64; 3]; 3]);

impl BlochVector {
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

impl CorrelationMatrix {
    /// S = T Tᵀ, the symmetric matrix whose spectrum carries the invariants.
    pub fn gram(&self) -> [[f64; 3]; 3] {
        let t = &self.0;
        let mut s = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] = (0..3).map(|k| t[i][k] * t[j][k]).sum();
            }
        }
        s
    }

    /// Tᵀ T, sharing the spectrum of `gram` but with the second party's
    /// eigenvectors.
    pub fn gram_transposed(&self) -> [[f64; 3]; 3] {
        let t = &self.0;
        let mut s = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] = (0..3).map(|k| t[k][i] * t[k][j]).sum();
            }
        }
        s
    }

    /// T b
    pub fn apply(&self, b: [f64; 3]) -> [f64; 3] {
        let t = &self.0;
        [
            t[0][0] * b[0] + t[0][1] * b[1] + t[0][2] * b[2],
            t[1][0] * b[0] + t[1][1] * b[1] + t[1][2] * b[2],
            t[2][0] * b[0] + t[2][1] * b[1] + t[2][2] * b[2],
        ]
    }

    /// aᵀ T b
    pub fn bilinear(&self, a: [f64; 3], b: [f64; 3]) -> f64 {
        let tb = self.apply(b);
        a[0] * tb[0] + a[1] * tb[1] + a[2] * tb[2]
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }
}

impl PureState3 {
    /// Accept raw amplitudes, renormalizing only if they are within 1e-6 of
    /// unit norm; larger mismatches are rejected.
    pub fn from_amplitudes(amp: [C64; 8]) -> Result<Self> {
        let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > CUSTOM_NORM_TOL {
            return Err(Error::NotNormalized {
                norm,
                tolerance: CUSTOM_NORM_TOL,
            });
        }
        Ok(Self::normalized(amp))
    }

    /// Normalize unconditionally; panics on the zero vector.
    pub(crate) fn normalized(mut amp: [C64; 8]) -> Self {
        let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "cannot normalize the zero vector");
        for z in amp.iter_mut() {
            *z /= norm;
        }
        PureState3 { amp }
    }

    pub fn amplitudes(&self) -> &[C64; 8] {
        &self.amp
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amp[index]
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Amplitudes of the pair, grouped by the complement party's basis value:
    /// column c holds ⟨pair basis, complement = c | ψ⟩.
    fn pair_slices(&self, pair: Pair) -> [[C64; 4]; 2] {
        let mut out = [[C64::new(0.0, 0.0); 4]; 2];
        for a in 0..2usize {
            for b in 0..2usize {
                for c in 0..2usize {
                    let amp = self.amp[4 * a + 2 * b + c];
                    let (pair_idx, comp) = match pair {
                        Pair::AB => (2 * a + b, c),
                        Pair::AC => (2 * a + c, b),
                        Pair::BC => (2 * b + c, a),
                    };
                    out[comp][pair_idx] = amp;
                }
            }
        }
        out
    }

    /// Partial trace over the pair's complement party.
    pub fn reduce_pair(&self, pair: Pair) -> TwoQubitDensity {
        let slices = self.pair_slices(pair);
        let mut m = ComplexMatrix::zeros(4, 4);
        for comp in 0..2 {
            let phi = &slices[comp];
            for r in 0..4 {
                for c in 0..4 {
                    m[(r, c)] += phi[r] * phi[c].conj();
                }
            }
        }
        TwoQubitDensity { matrix: m }
    }

    /// Single-party reduced density matrix.
    pub fn reduce_party(&self, party: Party) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        for a in 0..2usize {
            for b in 0..2usize {
                for c in 0..2usize {
                    let amp = self.amp[4 * a + 2 * b + c];
                    for x in 0..2usize {
                        let (i, other) = match party {
                            Party::A => (4 * x + 2 * b + c, (x, a)),
                            Party::B => (4 * a + 2 * x + c, (x, b)),
                            Party::C => (4 * a + 2 * b + x, (x, c)),
                        };
                        m[(other.1, other.0)] += amp * self.amp[i].conj();
                    }
                }
            }
        }
        m
    }

    /// Bloch vector of one party, component j = ⟨σ_j on that party⟩.
    pub fn bloch_vector(&self, party: Party) -> BlochVector {
        let rho = self.reduce_party(party);
        let mut v = [0.0; 3];
        for (j, item) in v.iter_mut().enumerate() {
            *item = rho.mul(&pauli(j + 1)).trace().re;
        }
        BlochVector(v)
    }

    /// Pairwise spin correlation matrix T[j,k] = tr(ρ_pair σ_j ⊗ σ_k).
    pub fn correlation_matrix(&self, pair: Pair) -> Result<CorrelationMatrix> {
        let rho = self.reduce_pair(pair);
        let mut t = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                let op = tensor_product(&pauli(j + 1), &pauli(k + 1));
                let val = rho.matrix().mul(&op).trace();
                if val.im.abs() > 1e-9 {
                    return Err(Error::ImaginaryCorrelation {
                        j: j + 1,
                        k: k + 1,
                        imag: val.im,
                    });
                }
                t[j][k] = val.re;
            }
        }
        Ok(CorrelationMatrix(t))
    }

    /// (uA ⊗ uB ⊗ uC)|ψ⟩ for 2×2 unitaries.
    pub fn apply_local_unitaries(
        &self,
        u_a: &ComplexMatrix,
        u_b: &ComplexMatrix,
        u_c: &ComplexMatrix,
    ) -> Result<PureState3> {
        for u in [u_a, u_b, u_c] {
            let deviation = u.unitarity_deviation();
            if u.rows() != 2 || u.cols() != 2 || deviation > 1e-10 {
                return Err(Error::NotUnitary { deviation });
            }
        }
        let mut amp = [C64::new(0.0, 0.0); 8];
        for a in 0..2usize {
            for b in 0..2usize {
                for c in 0..2usize {
                    let mut acc = C64::new(0.0, 0.0);
                    for ap in 0..2usize {
                        for bp in 0..2usize {
                            for cp in 0..2usize {
                                acc += u_a[(a, ap)]
                                    * u_b[(b, bp)]
                                    * u_c[(c, cp)]
                                    * self.amp[4 * ap + 2 * bp + cp];
                            }
                        }
                    }
                    amp[4 * a + 2 * b + c] = acc;
                }
            }
        }
        Ok(PureState3::normalized(amp))
    }
}

impl TwoQubitDensity {
    /// Validate an externally built 4×4 matrix as a density matrix.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 4 || matrix.cols() != 4 {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        matrix.check_hermitian(HERMITICITY_TOL)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > HERMITICITY_TOL {
            return Err(Error::NonUnitTrace {
                trace,
                tolerance: HERMITICITY_TOL,
            });
        }
        let eig = crate::linalg::hermitian_eigensystem(&matrix)?;
        for &lambda in &eig.values {
            crate::linalg::clamp_psd_eigenvalue(lambda)?;
        }
        Ok(TwoQubitDensity { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.mul(&self.matrix).trace().re
    }
}

/// ρ = (1/4) Σ_{u,v} c_{uv} σ_u ⊗ σ_v with c₀₀ = 1, c_{j0}/c_{0k} the Bloch
/// components and c_{jk} the correlation entries. Inverse of the Pauli
/// expansion used throughout; the result is only guaranteed PSD for
/// expectations of an actual state.
pub fn two_qubit_from_bloch_t(
    first: &BlochVector,
    second: &BlochVector,
    t: &CorrelationMatrix,
) -> ComplexMatrix {
    let mut rho = ComplexMatrix::identity(4);
    for j in 0..3 {
        let term = tensor_product(&pauli(j + 1), &pauli(0)).scale(C64::new(first.0[j], 0.0));
        rho = rho.add(&term);
        let term = tensor_product(&pauli(0), &pauli(j + 1)).scale(C64::new(second.0[j], 0.0));
        rho = rho.add(&term);
    }
    for j in 0..3 {
        for k in 0..3 {
            let term =
                tensor_product(&pauli(j + 1), &pauli(k + 1)).scale(C64::new(t.0[j][k], 0.0));
            rho = rho.add(&term);
        }
    }
    rho.scale(C64::new(0.25, 0.0))
}

/// W-class family: cos φ |110⟩ + sin φ cos θ |011⟩ + sin φ sin θ |101⟩.
/// Zero 3-tangle for every (φ, θ).
pub fn w_class_state(phi_deg: f64, theta_deg: f64) -> PureState3 {
    let phi = phi_deg.to_radians();
    let theta = theta_deg.to_radians();
    let mut amp = [C64::new(0.0, 0.0); 8];
    amp[0b110] = C64::new(phi.cos(), 0.0);
    amp[0b011] = C64::new(phi.sin() * theta.cos(), 0.0);
    amp[0b101] = C64::new(phi.sin() * theta.sin(), 0.0);
    PureState3::normalized(amp)
}

/// GHZ-class family: cos φ′ |110⟩ + (sin φ′/√2)(|011⟩ + |001⟩).
/// Nonzero 3-tangle away from the product points.
pub fn ghz_class_state(phi_prime_deg: f64) -> PureState3 {
    let phi = phi_prime_deg.to_radians();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut amp = [C64::new(0.0, 0.0); 8];
    amp[0b110] = C64::new(phi.cos(), 0.0);
    amp[0b011] = C64::new(phi.sin() * inv_sqrt2, 0.0);
    amp[0b001] = C64::new(phi.sin() * inv_sqrt2, 0.0);
    PureState3::normalized(amp)
}

fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random pure state: eight independent standard complex Gaussians,
/// normalized. Deterministic per seed.
pub fn haar_random_state(seed: u64) -> PureState3 {
    let mut rng = rng_from_seed(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut amp = [C64::new(0.0, 0.0); 8];
    for z in amp.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = C64::new(re, im);
    }
    PureState3::normalized(amp)
}

/// Haar-distributed 2×2 unitary via QR of a complex Gaussian matrix, returned
/// with each column's first nonzero entry made real non-negative.
pub fn random_local_unitary(seed: u64) -> ComplexMatrix {
    let mut rng = rng_from_seed(seed ^ 0xd1b5_4a32_d192_ed03);
    let sample = |rng: &mut ChaCha8Rng| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    };
    let g0 = [sample(&mut rng), sample(&mut rng)];
    let g1 = [sample(&mut rng), sample(&mut rng)];

    // Gram-Schmidt
    let n0 = (g0[0].norm_sqr() + g0[1].norm_sqr()).sqrt();
    let q0 = [g0[0] / n0, g0[1] / n0];
    let overlap = q0[0].conj() * g1[0] + q0[1].conj() * g1[1];
    let mut q1 = [g1[0] - overlap * q0[0], g1[1] - overlap * q0[1]];
    let n1 = (q1[0].norm_sqr() + q1[1].norm_sqr()).sqrt();
    q1 = [q1[0] / n1, q1[1] / n1];

    // column-phase convention: first nonzero entry real non-negative
    let fix = |col: [C64; 2]| -> [C64; 2] {
        let lead = if col[0].norm() > 1e-300 { col[0] } else { col[1] };
        let phase = lead / lead.norm();
        [col[0] / phase, col[1] / phase]
    };
    let q0 = fix(q0);
    let q1 = fix(q1);
    ComplexMatrix::from_rows(&[vec![q0[0], q1[0]], vec![q0[1], q1[1]]])
}

/// State-family parameters, mirroring the state file schema.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyParams {
    W { phi_deg: f64, theta_deg: f64 },
    Ghz { phi_prime_deg: f64 },
    Custom { amplitudes: [C64; 8] },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_prime_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<[f64; 2]>>,
}

impl FamilyParams {
    pub fn state(&self) -> Result<PureState3> {
        match self {
            FamilyParams::W { phi_deg, theta_deg } => Ok(w_class_state(*phi_deg, *theta_deg)),
            FamilyParams::Ghz { phi_prime_deg } => Ok(ghz_class_state(*phi_prime_deg)),
            FamilyParams::Custom { amplitudes } => PureState3::from_amplitudes(*amplitudes),
        }
    }

    /// Experimental: prepare with each family angle perturbed by an
    /// independent uniform draw from ±`jitter_deg`, modelling wave-plate
    /// alignment uncertainty. Custom amplitudes have no angles to jitter.
    pub fn state_with_jitter(&self, jitter_deg: f64, seed: u64) -> Result<PureState3> {
        let mut rng = rng_from_seed(seed ^ 0x5851_f42d_4c95_7f2d);
        let mut jitter = || rng.random_range(-jitter_deg..=jitter_deg);
        match self {
            FamilyParams::W { phi_deg, theta_deg } => {
                Ok(w_class_state(phi_deg + jitter(), theta_deg + jitter()))
            }
            FamilyParams::Ghz { phi_prime_deg } => Ok(ghz_class_state(phi_prime_deg + jitter())),
            FamilyParams::Custom { amplitudes } => PureState3::from_amplitudes(*amplitudes),
        }
    }

    pub fn family_label(&self) -> &'static str {
        match self {
            FamilyParams::W { .. } => "w",
            FamilyParams::Ghz { .. } => "ghz",
            FamilyParams::Custom { .. } => "custom",
        }
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            FamilyParams::W { phi_deg, theta_deg } => StateFile {
                family: "w".into(),
                phi_deg: Some(*phi_deg),
                theta_deg: Some(*theta_deg),
                phi_prime_deg: None,
                amplitudes: None,
            },
            FamilyParams::Ghz { phi_prime_deg } => StateFile {
                family: "ghz".into(),
                phi_deg: None,
                theta_deg: None,
                phi_prime_deg: Some(*phi_prime_deg),
                amplitudes: None,
            },
            FamilyParams::Custom { amplitudes } => StateFile {
                family: "custom".into(),
                phi_deg: None,
                theta_deg: None,
                phi_prime_deg: None,
                amplitudes: Some(amplitudes.iter().map(|z| [z.re, z.im]).collect()),
            },
        };
        serde_json::to_string_pretty(&file).expect("state file serialization")
    }

    /// Parse the state file schema; exactly the fields relevant to the family
    /// must be present.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
        let reject_extra = |name: &str, present: bool| -> Result<()> {
            if present {
                Err(Error::Parse(format!(
                    "state file: field {name:?} is not valid for family {:?}",
                    file.family
                )))
            } else {
                Ok(())
            }
        };
        let require = |name: &str, value: Option<f64>| -> Result<f64> {
            value.ok_or_else(|| {
                Error::Parse(format!(
                    "state file: family {:?} requires field {name:?}",
                    file.family
                ))
            })
        };
        match file.family.as_str() {
            "w" => {
                reject_extra("phi_prime_deg", file.phi_prime_deg.is_some())?;
                reject_extra("amplitudes", file.amplitudes.is_some())?;
                Ok(FamilyParams::W {
                    phi_deg: require("phi_deg", file.phi_deg)?,
                    theta_deg: require("theta_deg", file.theta_deg)?,
                })
            }
            "ghz" => {
                reject_extra("phi_deg", file.phi_deg.is_some())?;
                reject_extra("theta_deg", file.theta_deg.is_some())?;
                reject_extra("amplitudes", file.amplitudes.is_some())?;
                Ok(FamilyParams::Ghz {
                    phi_prime_deg: require("phi_prime_deg", file.phi_prime_deg)?,
                })
            }
            "custom" => {
                reject_extra("phi_deg", file.phi_deg.is_some())?;
                reject_extra("theta_deg", file.theta_deg.is_some())?;
                reject_extra("phi_prime_deg", file.phi_prime_deg.is_some())?;
                let raw = file.amplitudes.ok_or_else(|| {
                    Error::Parse("state file: family \"custom\" requires field \"amplitudes\"".into())
                })?;
                if raw.len() != 8 {
                    return Err(Error::Parse(format!(
                        "state file: expected 8 amplitudes, found {}",
                        raw.len()
                    )));
                }
                let mut amplitudes = [Complex64::new(0.0, 0.0); 8];
                for (slot, pair) in amplitudes.iter_mut().zip(&raw) {
                    *slot = Complex64::new(pair[0], pair[1]);
                }
                Ok(FamilyParams::Custom { amplitudes })
            }
            other => Err(Error::Parse(format!(
                "state file: unknown family {other:?} (expected \"w\", \"ghz\" or \"custom\")"
            ))),
        }
    }
}
