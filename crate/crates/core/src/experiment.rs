//! Simulated photon-counting experiment.
//!
//! A run measures the three spin components σ_j ⊗ σ_k ⊗ σ_l for every axis
//! choice (j,k,l), recording coincidence counts over the 8 outcome signs
//! (α,β,γ). Counts are modelled as independent Poisson draws per outcome bin
//! (SPDC coincidence statistics), correlations and Bloch vectors are
//! estimated from relative frequencies, error bars come from Poissonian
//! bootstrap resampling, and the full state can be reconstructed by linear
//! inversion with a projection back onto physical density matrices.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::spin_spectrum;
use crate::linalg::{hermitian_eigensystem, pauli, tensor_product, C64, ComplexMatrix};
use crate::nonlocality::{chsh_from_correlation, optimal_chsh_settings, MeasurementDirections};
use crate::states::{
    two_qubit_from_bloch_t, BlochVector, CorrelationMatrix, Pair, Party, PureState3,
    TwoQubitDensity,
};

/// One joint measurement setting: Pauli axes (1..=3) for parties A, B, C.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Setting {
    pub j: u8,
    pub k: u8,
    pub l: u8,
}

impl Setting {
    pub fn new(j: u8, k: u8, l: u8) -> Result<Self> {
        for axis in [j, k, l] {
            if !(1..=3).contains(&axis) {
                return Err(Error::BadAxis { axis });
            }
        }
        Ok(Setting { j, k, l })
    }

    /// All 27 settings in lexicographic order.
    pub fn all() -> Vec<Setting> {
        let mut out = Vec::with_capacity(27);
        for j in 1..=3 {
            for k in 1..=3 {
                for l in 1..=3 {
                    out.push(Setting { j, k, l });
                }
            }
        }
        out
    }

    pub fn index(&self) -> usize {
        ((self.j - 1) as usize) * 9 + ((self.k - 1) as usize) * 3 + (self.l - 1) as usize
    }

    pub fn as_tuple(&self) -> (u8, u8, u8) {
        (self.j, self.k, self.l)
    }
}

/// Outcome bins are indexed 4·iα + 2·iβ + iγ with i = 0 for the +1 outcome,
/// mirroring the ket indexing.
pub fn outcome_signs(outcome: usize) -> (f64, f64, f64) {
    let sign = |bit: usize| 1.0 - 2.0 * ((outcome >> bit) & 1) as f64;
    (sign(2), sign(1), sign(0))
}

/// Joint outcome distribution P_{jkl}(α,β,γ) for one setting.
#[derive(Clone, Debug, Serialize)]
pub struct OutcomeDistribution {
    pub setting: Setting,
    pub probs: [f64; 8],
}

/// Coincidence counts for one setting over its 8 outcomes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountRecord {
    pub setting: Setting,
    pub counts: [u64; 8],
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Estimated single-party Bloch vectors and pairwise correlation matrices.
#[derive(Clone, Debug, Serialize)]
pub struct Estimates {
    pub bloch_a: BlochVector,
    pub bloch_b: BlochVector,
    pub bloch_c: BlochVector,
    pub t_ab: CorrelationMatrix,
    pub t_ac: CorrelationMatrix,
    pub t_bc: CorrelationMatrix,
}

impl Estimates {
    pub fn bloch(&self, party: Party) -> &BlochVector {
        match party {
            Party::A => &self.bloch_a,
            Party::B => &self.bloch_b,
            Party::C => &self.bloch_c,
        }
    }

    pub fn t(&self, pair: Pair) -> &CorrelationMatrix {
        match pair {
            Pair::AB => &self.t_ab,
            Pair::AC => &self.t_ac,
            Pair::BC => &self.t_bc,
        }
    }
}

/// Reconstructed 8×8 density matrix.
#[derive(Clone, Debug)]
pub struct ThreeQubitDensity {
    matrix: ComplexMatrix,
}

impl ThreeQubitDensity {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 8 || matrix.cols() != 8 {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        matrix.check_hermitian(1e-10)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::NonUnitTrace {
                trace,
                tolerance: 1e-10,
            });
        }
        let eig = hermitian_eigensystem(&matrix)?;
        for &lambda in &eig.values {
            crate::linalg::clamp_psd_eigenvalue(lambda)?;
        }
        Ok(ThreeQubitDensity { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Result of a Poissonian bootstrap for a single statistic.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BootstrapResult {
    pub estimate: f64,
    pub std_error: f64,
    pub resamples: usize,
}

/// A derived quantity that can be pushed through the estimation pipeline.
#[derive(Clone, Debug, PartialEq)]
pub enum Statistic {
    /// s_iso^AB + s_iso^AC + s_iso^BC
    IsoSum,
    /// δs_j of one pair, j in 1..=3
    DeltaS { pair: Pair, j: usize },
    /// M = s₁ + s₂ of one pair
    Horodecki { pair: Pair },
    /// (C^first)² − (C^second)²
    ConcurrenceSqDiff { first: Pair, second: Pair },
    /// |bloch(second's distinct party)|² − |bloch(first's distinct party)|²
    BlochNormSqDiff { first: Pair, second: Pair },
    /// (M^first − M^second) / 2
    HorodeckiHalfDiff { first: Pair, second: Pair },
    /// s_iso^first − s_iso^second
    IsoDiff { first: Pair, second: Pair },
    /// Residual tangle from estimated quantities:
    /// (1 − |â|²) − (Ĉ^AB)² − (Ĉ^AC)²
    ThreeTangle,
    /// ⟨B⟩²/4 at fixed directions; `None` resolves to the optimal settings of
    /// the original (un-resampled) estimate.
    ChshQuarterSq {
        pair: Pair,
        dirs: Option<MeasurementDirections>,
    },
}

fn parse_pair(text: &str) -> Option<Pair> {
    match text {
        "ab" => Some(Pair::AB),
        "ac" => Some(Pair::AC),
        "bc" => Some(Pair::BC),
        _ => None,
    }
}

impl Statistic {
    /// Parse names like `iso-sum`, `delta-s1-ab`, `horodecki-ac`,
    /// `conc-sq-diff-ab-ac`, `bloch-sq-diff-ab-ac`, `horodecki-half-diff-ab-ac`,
    /// `iso-diff-ab-ac`, `three-tangle`, `chsh-ac`.
    pub fn from_name(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownStatistic(name.to_string());
        let lower = name.to_ascii_lowercase();
        if lower == "iso-sum" {
            return Ok(Statistic::IsoSum);
        }
        if lower == "three-tangle" {
            return Ok(Statistic::ThreeTangle);
        }
        if let Some(rest) = lower.strip_prefix("delta-s") {
            let (j, pair) = rest.split_once('-').ok_or_else(unknown)?;
            let j: usize = j.parse().map_err(|_| unknown())?;
            if !(1..=3).contains(&j) {
                return Err(unknown());
            }
            return Ok(Statistic::DeltaS {
                pair: parse_pair(pair).ok_or_else(unknown)?,
                j,
            });
        }
        if let Some(rest) = lower.strip_prefix("horodecki-half-diff-") {
            let (first, second) = rest.split_once('-').ok_or_else(unknown)?;
            let (first, second) = (
                parse_pair(first).ok_or_else(unknown)?,
                parse_pair(second).ok_or_else(unknown)?,
            );
            if first == second {
                return Err(Error::SamePair);
            }
            return Ok(Statistic::HorodeckiHalfDiff { first, second });
        }
        if let Some(pair) = lower.strip_prefix("horodecki-") {
            return Ok(Statistic::Horodecki {
                pair: parse_pair(pair).ok_or_else(unknown)?,
            });
        }
        if let Some(rest) = lower.strip_prefix("conc-sq-diff-") {
            let (first, second) = rest.split_once('-').ok_or_else(unknown)?;
            let (first, second) = (
                parse_pair(first).ok_or_else(unknown)?,
                parse_pair(second).ok_or_else(unknown)?,
            );
            if first == second {
                return Err(Error::SamePair);
            }
            return Ok(Statistic::ConcurrenceSqDiff { first, second });
        }
        if let Some(rest) = lower.strip_prefix("bloch-sq-diff-") {
            let (first, second) = rest.split_once('-').ok_or_else(unknown)?;
            let (first, second) = (
                parse_pair(first).ok_or_else(unknown)?,
                parse_pair(second).ok_or_else(unknown)?,
            );
            if first == second {
                return Err(Error::SamePair);
            }
            return Ok(Statistic::BlochNormSqDiff { first, second });
        }
        if let Some(rest) = lower.strip_prefix("iso-diff-") {
            let (first, second) = rest.split_once('-').ok_or_else(unknown)?;
            let (first, second) = (
                parse_pair(first).ok_or_else(unknown)?,
                parse_pair(second).ok_or_else(unknown)?,
            );
            if first == second {
                return Err(Error::SamePair);
            }
            return Ok(Statistic::IsoDiff { first, second });
        }
        if let Some(pair) = lower.strip_prefix("chsh-") {
            return Ok(Statistic::ChshQuarterSq {
                pair: parse_pair(pair).ok_or_else(unknown)?,
                dirs: None,
            });
        }
        Err(unknown())
    }
}

fn derive_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&stream.to_le_bytes());
    seed[16..24].copy_from_slice(&(master.rotate_left(17) ^ 0xa076_1d64_78bd_642f).to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// ±1 eigenvectors of the Pauli axes in the computational basis.
fn pauli_eigenvector(axis: u8, positive: bool) -> [C64; 2] {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new;
    match (axis, positive) {
        (1, true) => [z(inv, 0.0), z(inv, 0.0)],
        (1, false) => [z(inv, 0.0), z(-inv, 0.0)],
        (2, true) => [z(inv, 0.0), z(0.0, inv)],
        (2, false) => [z(inv, 0.0), z(0.0, -inv)],
        (3, true) => [z(1.0, 0.0), z(0.0, 0.0)],
        (3, false) => [z(0.0, 0.0), z(1.0, 0.0)],
        _ => unreachable!("axis validated at construction"),
    }
}

/// P_{jkl}(α,β,γ) = |⟨e_α^j ⊗ e_β^k ⊗ e_γ^l | ψ⟩|², normalized.
pub fn outcome_distribution(state: &PureState3, setting: Setting) -> OutcomeDistribution {
    let mut probs = [0.0; 8];
    for (outcome, slot) in probs.iter_mut().enumerate() {
        let ea = pauli_eigenvector(setting.j, (outcome >> 2) & 1 == 0);
        let eb = pauli_eigenvector(setting.k, (outcome >> 1) & 1 == 0);
        let ec = pauli_eigenvector(setting.l, outcome & 1 == 0);
        let mut amp = C64::new(0.0, 0.0);
        for a in 0..2usize {
            for b in 0..2usize {
                for c in 0..2usize {
                    amp += (ea[a] * eb[b] * ec[c]).conj() * state.amplitude(4 * a + 2 * b + c);
                }
            }
        }
        *slot = amp.norm_sqr();
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    OutcomeDistribution { setting, probs }
}

fn poisson_draw(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(mean).expect("positive finite mean");
    poisson.sample(rng) as u64
}

/// Independent Poisson counts with mean shots × probability for every
/// outcome of every setting. Each setting owns a generator derived from
/// (seed, setting index), so records are reproducible under any execution
/// order.
pub fn simulate_counts(state: &PureState3, shots_per_setting: u64, seed: u64) -> Vec<CountRecord> {
    assert!(shots_per_setting >= 1, "shots_per_setting must be >= 1");
    Setting::all()
        .into_iter()
        .map(|setting| {
            let dist = outcome_distribution(state, setting);
            let mut rng = derive_rng(seed, setting.index() as u64);
            let mut counts = [0u64; 8];
            for (count, &p) in counts.iter_mut().zip(&dist.probs) {
                *count = poisson_draw(&mut rng, shots_per_setting as f64 * p);
            }
            CountRecord { setting, counts }
        })
        .collect()
}

/// Noise-free records: counts are the exact probabilities scaled to `shots`
/// and rounded. With large `shots` (default in tests: 1e12) the rounding
/// error is far below every tolerance in this crate.
pub fn exact_records(state: &PureState3, shots: u64) -> Vec<CountRecord> {
    Setting::all()
        .into_iter()
        .map(|setting| {
            let dist = outcome_distribution(state, setting);
            let mut counts = [0u64; 8];
            for (count, &p) in counts.iter_mut().zip(&dist.probs) {
                *count = (shots as f64 * p).round() as u64;
            }
            CountRecord { setting, counts }
        })
        .collect()
}

struct Frequencies {
    // indexed by Setting::index()
    freq: Vec<[f64; 8]>,
}

fn frequencies(records: &[CountRecord]) -> Result<Frequencies> {
    let mut freq = vec![None; 27];
    for record in records {
        let idx = record.setting.index();
        if freq[idx].is_some() {
            return Err(Error::Parse(format!(
                "duplicate records for setting {:?}",
                record.setting.as_tuple()
            )));
        }
        let total = record.total();
        if total == 0 {
            let (j, k, l) = record.setting.as_tuple();
            return Err(Error::ZeroTotalCount { j, k, l });
        }
        let mut f = [0.0; 8];
        for (slot, &c) in f.iter_mut().zip(&record.counts) {
            *slot = c as f64 / total as f64;
        }
        freq[idx] = Some(f);
    }
    let missing: Vec<(u8, u8, u8)> = Setting::all()
        .iter()
        .filter(|s| freq[s.index()].is_none())
        .map(|s| s.as_tuple())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingSettings { missing });
    }
    Ok(Frequencies {
        freq: freq.into_iter().map(|f| f.unwrap()).collect(),
    })
}

impl Frequencies {
    fn at(&self, j: u8, k: u8, l: u8) -> &[f64; 8] {
        &self.freq[Setting { j, k, l }.index()]
    }

    /// Σ_o w(α,β,γ)·f over one setting.
    fn contract(&self, j: u8, k: u8, l: u8, weight: impl Fn(f64, f64, f64) -> f64) -> f64 {
        self.at(j, k, l)
            .iter()
            .enumerate()
            .map(|(o, &f)| {
                let (alpha, beta, gamma) = outcome_signs(o);
                weight(alpha, beta, gamma) * f
            })
            .sum()
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Correlation and Bloch estimators, pooling every setting that contains the
/// requested marginal (the single-slice estimator agrees in expectation for
/// any slice; pooling just lowers the variance).
pub fn estimate_correlations(records: &[CountRecord]) -> Result<Estimates> {
    let f = frequencies(records)?;
    let axes = [1u8, 2, 3];

    let mut t_ab = [[0.0; 3]; 3];
    let mut t_ac = [[0.0; 3]; 3];
    let mut t_bc = [[0.0; 3]; 3];
    for j in axes {
        for k in axes {
            let ab: f64 = axes
                .iter()
                .map(|&l| f.contract(j, k, l, |a, b, _| a * b))
                .sum::<f64>()
                / 3.0;
            t_ab[(j - 1) as usize][(k - 1) as usize] = clamp_unit(ab);
            let ac: f64 = axes
                .iter()
                .map(|&mid| f.contract(j, mid, k, |a, _, c| a * c))
                .sum::<f64>()
                / 3.0;
            t_ac[(j - 1) as usize][(k - 1) as usize] = clamp_unit(ac);
            let bc: f64 = axes
                .iter()
                .map(|&first| f.contract(first, j, k, |_, b, c| b * c))
                .sum::<f64>()
                / 3.0;
            t_bc[(j - 1) as usize][(k - 1) as usize] = clamp_unit(bc);
        }
    }

    let mut bloch_a = [0.0; 3];
    let mut bloch_b = [0.0; 3];
    let mut bloch_c = [0.0; 3];
    for j in axes {
        let mut sum_a = 0.0;
        let mut sum_b = 0.0;
        let mut sum_c = 0.0;
        for x in axes {
            for y in axes {
                sum_a += f.contract(j, x, y, |a, _, _| a);
                sum_b += f.contract(x, j, y, |_, b, _| b);
                sum_c += f.contract(x, y, j, |_, _, c| c);
            }
        }
        bloch_a[(j - 1) as usize] = clamp_unit(sum_a / 9.0);
        bloch_b[(j - 1) as usize] = clamp_unit(sum_b / 9.0);
        bloch_c[(j - 1) as usize] = clamp_unit(sum_c / 9.0);
    }

    Ok(Estimates {
        bloch_a: BlochVector(bloch_a),
        bloch_b: BlochVector(bloch_b),
        bloch_c: BlochVector(bloch_c),
        t_ab: CorrelationMatrix(t_ab),
        t_ac: CorrelationMatrix(t_ac),
        t_bc: CorrelationMatrix(t_bc),
    })
}

/// Correlation matrix of one pair estimated from a single slice of the third
/// party's axis, instead of pooling all three.
pub fn estimate_pair_single_slice(
    records: &[CountRecord],
    pair: Pair,
    slice_axis: u8,
) -> Result<CorrelationMatrix> {
    if !(1..=3).contains(&slice_axis) {
        return Err(Error::BadAxis { axis: slice_axis });
    }
    let f = frequencies(records)?;
    let mut t = [[0.0; 3]; 3];
    for j in 1u8..=3 {
        for k in 1u8..=3 {
            let value = match pair {
                Pair::AB => f.contract(j, k, slice_axis, |a, b, _| a * b),
                Pair::AC => f.contract(j, slice_axis, k, |a, _, c| a * c),
                Pair::BC => f.contract(slice_axis, j, k, |_, b, c| b * c),
            };
            t[(j - 1) as usize][(k - 1) as usize] = clamp_unit(value);
        }
    }
    Ok(CorrelationMatrix(t))
}

/// General Wootters concurrence² of an estimated (possibly slightly
/// unphysical) pair matrix: project to the nearest density matrix first.
pub fn estimated_concurrence_sq(est: &Estimates, pair: Pair) -> f64 {
    let rho = two_qubit_from_bloch_t(est.bloch(pair.first()), est.bloch(pair.second()), est.t(pair));
    let projected = project_to_density(&rho);
    let density = TwoQubitDensity::new(projected).expect("projection yields a density matrix");
    crate::invariants::concurrence(&density).powi(2)
}

/// Evaluate a statistic on a set of estimates. `ChshQuarterSq` must carry
/// explicit directions by the time it reaches this point.
pub fn eval_statistic(est: &Estimates, statistic: &Statistic) -> f64 {
    match statistic {
        Statistic::IsoSum => Pair::ALL
            .iter()
            .map(|&pair| spin_spectrum(est.t(pair)).s_iso)
            .sum(),
        Statistic::DeltaS { pair, j } => spin_spectrum(est.t(*pair)).delta[j - 1],
        Statistic::Horodecki { pair } => {
            let s = spin_spectrum(est.t(*pair)).s;
            s[0] + s[1]
        }
        Statistic::ConcurrenceSqDiff { first, second } => {
            estimated_concurrence_sq(est, *first) - estimated_concurrence_sq(est, *second)
        }
        Statistic::BlochNormSqDiff { first, second } => {
            let p_first = first.distinct_party(*second).expect("distinct pairs");
            let p_second = second.distinct_party(*first).expect("distinct pairs");
            est.bloch(p_second).norm_sq() - est.bloch(p_first).norm_sq()
        }
        Statistic::HorodeckiHalfDiff { first, second } => {
            let sf = spin_spectrum(est.t(*first)).s;
            let ss = spin_spectrum(est.t(*second)).s;
            (sf[0] + sf[1] - ss[0] - ss[1]) / 2.0
        }
        Statistic::IsoDiff { first, second } => {
            spin_spectrum(est.t(*first)).s_iso - spin_spectrum(est.t(*second)).s_iso
        }
        Statistic::ThreeTangle => {
            // C²_{A(BC)} = 4 det ρ_A = 1 − |a|² for the single-qubit marginal
            (1.0 - est.bloch_a.norm_sq())
                - estimated_concurrence_sq(est, Pair::AB)
                - estimated_concurrence_sq(est, Pair::AC)
        }
        Statistic::ChshQuarterSq { pair, dirs } => {
            let dirs = dirs.as_ref().expect("directions resolved before evaluation");
            chsh_from_correlation(est.t(*pair), dirs).powi(2) / 4.0
        }
    }
}

fn resolve_statistic(statistic: &Statistic, baseline: &Estimates) -> Statistic {
    match statistic {
        Statistic::ChshQuarterSq { pair, dirs: None } => Statistic::ChshQuarterSq {
            pair: *pair,
            dirs: Some(optimal_chsh_settings(baseline.t(*pair)).directions),
        },
        other => other.clone(),
    }
}

/// Poissonian bootstrap over several statistics at once, sharing the
/// resampled pipelines. Each resample replaces every count c by a Poisson
/// draw with mean c and re-runs the full estimation.
pub fn bootstrap_many(
    records: &[CountRecord],
    statistics: &[Statistic],
    resamples: usize,
    seed: u64,
) -> Result<Vec<BootstrapResult>> {
    if resamples < 100 {
        return Err(Error::InvalidArgument(format!(
            "resamples must be at least 100, got {resamples}"
        )));
    }
    let baseline = estimate_correlations(records)?;
    let resolved: Vec<Statistic> = statistics
        .iter()
        .map(|s| resolve_statistic(s, &baseline))
        .collect();
    let estimates: Vec<f64> = resolved.iter().map(|s| eval_statistic(&baseline, s)).collect();

    // Welford accumulators per statistic
    let mut mean = vec![0.0; resolved.len()];
    let mut m2 = vec![0.0; resolved.len()];
    let mut resampled = records.to_vec();
    for r in 0..resamples {
        let mut rng = derive_rng(seed ^ 0x8f1b_bcdc_bfa5_3e0b, r as u64);
        for (dst, src) in resampled.iter_mut().zip(records) {
            for (c_dst, &c_src) in dst.counts.iter_mut().zip(&src.counts) {
                *c_dst = poisson_draw(&mut rng, c_src as f64);
            }
        }
        let est = estimate_correlations(&resampled)?;
        for (i, stat) in resolved.iter().enumerate() {
            let value = eval_statistic(&est, stat);
            let delta = value - mean[i];
            mean[i] += delta / (r + 1) as f64;
            m2[i] += delta * (value - mean[i]);
        }
    }

    Ok(estimates
        .into_iter()
        .enumerate()
        .map(|(i, estimate)| BootstrapResult {
            estimate,
            std_error: (m2[i] / (resamples - 1) as f64).sqrt(),
            resamples,
        })
        .collect())
}

/// Bootstrap a single named statistic.
pub fn bootstrap_errors(
    records: &[CountRecord],
    statistic: &Statistic,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    Ok(bootstrap_many(records, std::slice::from_ref(statistic), resamples, seed)?
        .pop()
        .expect("one statistic in, one result out"))
}

/// Euclidean projection of a real vector onto the probability simplex.
fn project_to_simplex(values: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    let mut k = 0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (1.0 - cumulative) / (i + 1) as f64;
        if u + candidate > 0.0 {
            theta = candidate;
            k = i + 1;
        }
    }
    debug_assert!(k > 0);
    values.iter().map(|&v| (v + theta).max(0.0)).collect()
}

/// Nearest (Frobenius) PSD unit-trace matrix: hermitize, then project the
/// eigenvalue vector onto the probability simplex. Idempotent.
pub fn project_to_density(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let hermitized = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
    let eig = hermitian_eigensystem(&hermitized).expect("hermitized matrix");
    let projected = project_to_simplex(&eig.values);
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &lambda) in projected.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] +=
                    eig.vectors[(r, i)] * eig.vectors[(c, i)].conj() * C64::new(lambda, 0.0);
            }
        }
    }
    out
}

/// Linear-inversion tomography: estimate all 64 Pauli expectations (identity
/// slots pooled over the unused settings), assemble
/// ρ̂ = (1/8) Σ Ê_{uvw} σ_u⊗σ_v⊗σ_w, and project onto physical states.
pub fn tomography_reconstruct(records: &[CountRecord]) -> Result<ThreeQubitDensity> {
    let f = frequencies(records)?;
    let axes = [1u8, 2, 3];

    let mut expectations = [[[0.0; 4]; 4]; 4];
    expectations[0][0][0] = 1.0;
    for u in 0..4u8 {
        for v in 0..4u8 {
            for w in 0..4u8 {
                if u == 0 && v == 0 && w == 0 {
                    continue;
                }
                // pool over every axis filling an identity slot
                let us = if u == 0 { &axes[..] } else { std::slice::from_ref(&u) };
                let vs = if v == 0 { &axes[..] } else { std::slice::from_ref(&v) };
                let ws = if w == 0 { &axes[..] } else { std::slice::from_ref(&w) };
                let mut sum = 0.0;
                let mut n = 0.0;
                for &j in us {
                    for &k in vs {
                        for &l in ws {
                            sum += f.contract(j, k, l, |a, b, c| {
                                let fa = if u == 0 { 1.0 } else { a };
                                let fb = if v == 0 { 1.0 } else { b };
                                let fc = if w == 0 { 1.0 } else { c };
                                fa * fb * fc
                            });
                            n += 1.0;
                        }
                    }
                }
                expectations[u as usize][v as usize][w as usize] = sum / n;
            }
        }
    }

    let mut rho = ComplexMatrix::zeros(8, 8);
    for u in 0..4 {
        for v in 0..4 {
            for w in 0..4 {
                let coeff = expectations[u][v][w];
                if coeff == 0.0 {
                    continue;
                }
                let op = tensor_product(&tensor_product(&pauli(u), &pauli(v)), &pauli(w));
                rho = rho.add(&op.scale(C64::new(coeff / 8.0, 0.0)));
            }
        }
    }

    ThreeQubitDensity::new(project_to_density(&rho))
}

/// F = ⟨ψ|ρ|ψ⟩, clamped to [0, 1].
pub fn fidelity(rho: &ThreeQubitDensity, target: &PureState3) -> f64 {
    let mut value = C64::new(0.0, 0.0);
    for r in 0..8 {
        for c in 0..8 {
            value += target.amplitude(r).conj() * rho.matrix()[(r, c)] * target.amplitude(c);
        }
    }
    value.re.clamp(0.0, 1.0)
}

/// Counts file header (CSV).
pub const COUNTS_CSV_HEADER: &str = "j,k,l,alpha,beta,gamma,count";

/// Serialize records as the counts CSV format: one row per (setting,
/// outcome), 216 rows for a complete dataset.
pub fn counts_to_csv(records: &[CountRecord]) -> String {
    let mut out = String::with_capacity(216 * 16);
    out.push_str(COUNTS_CSV_HEADER);
    out.push('\n');
    for record in records {
        let (j, k, l) = record.setting.as_tuple();
        for (o, &count) in record.counts.iter().enumerate() {
            let (alpha, beta, gamma) = outcome_signs(o);
            out.push_str(&format!(
                "{j},{k},{l},{},{},{},{count}\n",
                alpha as i8, beta as i8, gamma as i8
            ));
        }
    }
    out
}

/// Parse the counts CSV format with row-level diagnostics. Settings may
/// arrive in any order; every outcome row of a present setting must appear
/// exactly once.
pub fn counts_from_csv(text: &str) -> Result<Vec<CountRecord>> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("counts CSV is empty".into()))?;
    if header.1.trim() != COUNTS_CSV_HEADER {
        return Err(Error::Parse(format!(
            "counts CSV line 1: expected header {COUNTS_CSV_HEADER:?}, found {:?}",
            header.1.trim()
        )));
    }

    let mut counts: Vec<Option<[Option<u64>; 8]>> = vec![None; 27];
    for (line_idx, line) in lines {
        let line_no = line_idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!(
                "counts CSV line {line_no}: expected 7 fields, found {}",
                fields.len()
            )));
        }
        let parse_axis = |field: &str, name: &str| -> Result<u8> {
            field.trim().parse::<u8>().ok().filter(|a| (1..=3).contains(a)).ok_or_else(|| {
                Error::Parse(format!(
                    "counts CSV line {line_no}: field {name} must be 1, 2 or 3, found {field:?}"
                ))
            })
        };
        let parse_sign = |field: &str, name: &str| -> Result<usize> {
            match field.trim() {
                "1" | "+1" => Ok(0),
                "-1" => Ok(1),
                other => Err(Error::Parse(format!(
                    "counts CSV line {line_no}: field {name} must be +1 or -1, found {other:?}"
                ))),
            }
        };
        let j = parse_axis(fields[0], "j")?;
        let k = parse_axis(fields[1], "k")?;
        let l = parse_axis(fields[2], "l")?;
        let ia = parse_sign(fields[3], "alpha")?;
        let ib = parse_sign(fields[4], "beta")?;
        let ic = parse_sign(fields[5], "gamma")?;
        let count: u64 = fields[6].trim().parse().map_err(|_| {
            Error::Parse(format!(
                "counts CSV line {line_no}: count must be a non-negative integer, found {:?}",
                fields[6]
            ))
        })?;

        let setting = Setting { j, k, l };
        let outcome = 4 * ia + 2 * ib + ic;
        let slot = &mut counts[setting.index()].get_or_insert([None; 8])[outcome];
        if slot.is_some() {
            return Err(Error::Parse(format!(
                "counts CSV line {line_no}: duplicate row for setting ({j},{k},{l}) outcome ({},{},{})",
                1 - 2 * ia as i8,
                1 - 2 * ib as i8,
                1 - 2 * ic as i8
            )));
        }
        *slot = Some(count);
    }

    let mut records = Vec::new();
    for setting in Setting::all() {
        if let Some(bins) = &counts[setting.index()] {
            let mut filled = [0u64; 8];
            for (o, bin) in bins.iter().enumerate() {
                let (j, k, l) = setting.as_tuple();
                filled[o] = bin.ok_or_else(|| {
                    let (alpha, beta, gamma) = outcome_signs(o);
                    Error::Parse(format!(
                        "counts CSV: setting ({j},{k},{l}) is missing outcome ({},{},{})",
                        alpha as i8, beta as i8, gamma as i8
                    ))
                })?;
            }
            records.push(CountRecord {
                setting,
                counts: filled,
            });
        }
    }
    Ok(records)
}
