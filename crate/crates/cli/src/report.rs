//! Report assembly: exact analysis, count-based estimation with error bars,
//! and regeneration of the bundled reference tables in EXACT or SIMULATED
//! mode, rendered as JSON, CSV or Markdown.

use serde::Serialize;

use trispin_core::experiment::{
    bootstrap_many, estimate_correlations, estimated_concurrence_sq, fidelity,
    tomography_reconstruct, CountRecord, Estimates, Statistic,
};
use trispin_core::invariants::{
    invariance_report, ordering_quadruple, pair_concurrence_squared, spin_spectrum, three_tangle,
    SpinSpectrum,
};
use trispin_core::nonlocality::{
    chsh_from_correlation, horodecki_parameter, optimal_chsh_settings, MeasurementDirections,
};
use trispin_core::states::{FamilyParams, Pair, Party, PureState3};
use trispin_core::{Error, Result};

use crate::tables::{reference_table, PaperCell, TableId};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// How table cells are filled: exact state computations or a simulated
/// counting run pushed through the estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Simulated,
}

impl Mode {
    pub fn parse(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "simulated" => Ok(Mode::Simulated),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode {other:?} (expected \"exact\" or \"simulated\")"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Simulated => "simulated",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
}

impl OutputFormat {
    pub fn parse(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(Error::InvalidArgument(format!(
                "unknown format {other:?} (expected \"json\", \"csv\" or \"markdown\")"
            ))),
        }
    }
}

/// Metadata attached to every generated report.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool_version: &'static str,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots_per_setting: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resamples: Option<usize>,
}

impl Provenance {
    pub fn exact() -> Self {
        Provenance {
            tool_version: TOOL_VERSION,
            mode: "exact",
            seed: None,
            shots_per_setting: None,
            resamples: None,
        }
    }

    pub fn simulated(seed: u64, shots: u64, resamples: Option<usize>) -> Self {
        Provenance {
            tool_version: TOOL_VERSION,
            mode: "simulated",
            seed: Some(seed),
            shots_per_setting: Some(shots),
            resamples,
        }
    }
}

#[derive(Serialize)]
pub struct BlochReport {
    pub components: [f64; 3],
    pub norm: f64,
    pub norm_sq: f64,
}

#[derive(Serialize)]
pub struct PairSection {
    pub pair: &'static str,
    pub t: [[f64; 3]; 3],
    pub s: [f64; 3],
    pub s_iso: f64,
    pub delta: [f64; 3],
    pub horodecki: f64,
    pub concurrence_sq: f64,
    pub concurrence: f64,
}

#[derive(Serialize)]
pub struct OrderingSection {
    pub first: &'static str,
    pub second: &'static str,
    pub conc_diff: f64,
    pub horodecki_half_diff: f64,
    pub iso_diff: f64,
    pub bloch_diff: f64,
    pub spread: f64,
}

#[derive(Serialize)]
pub struct DirectionsOut {
    pub a1: [f64; 3],
    pub a2: [f64; 3],
    pub b1: [f64; 3],
    pub b2: [f64; 3],
}

impl From<&MeasurementDirections> for DirectionsOut {
    fn from(d: &MeasurementDirections) -> Self {
        DirectionsOut {
            a1: d.a1,
            a2: d.a2,
            b1: d.b1,
            b2: d.b2,
        }
    }
}

#[derive(Serialize)]
pub struct MonogamySection {
    pub m_ab: f64,
    pub m_ac: f64,
    pub bound: f64,
    pub identity_residual: f64,
    pub chsh_ab_sq: f64,
    pub chsh_ac_sq: f64,
    pub bell_sum: f64,
    pub optimal_value_ab: f64,
    pub optimal_value_ac: f64,
    pub directions_ab: DirectionsOut,
    pub directions_ac: DirectionsOut,
}

#[derive(Serialize)]
pub struct InvarianceSection {
    pub iso_sum: f64,
    pub iso_terms: [f64; 3],
    pub max_aniso_deviation: f64,
}

/// Full exact analysis of one state.
#[derive(Serialize)]
pub struct AnalyzeReport {
    pub provenance: Provenance,
    pub family: String,
    pub amplitudes: Vec<[f64; 2]>,
    pub norm: f64,
    pub bloch: Vec<BlochReport>,
    pub pairs: Vec<PairSection>,
    pub invariance: InvarianceSection,
    pub three_tangle: f64,
    pub ordering: Vec<OrderingSection>,
    pub monogamy: MonogamySection,
}

fn pair_section(state: &PureState3, pair: Pair) -> Result<PairSection> {
    let t = state.correlation_matrix(pair)?;
    let spec: SpinSpectrum = spin_spectrum(&t);
    let c_sq = pair_concurrence_squared(state, pair);
    Ok(PairSection {
        pair: pair.label(),
        t: t.0,
        s: spec.s,
        s_iso: spec.s_iso,
        delta: spec.delta,
        horodecki: spec.s[0] + spec.s[1],
        concurrence_sq: c_sq,
        concurrence: c_sq.sqrt(),
    })
}

/// Assemble the exact analysis report. When `directions` is given, the CHSH
/// expectations in the monogamy section use them for both pairs; otherwise
/// each pair uses its own optimal settings.
pub fn analyze(
    params: &FamilyParams,
    directions: Option<&MeasurementDirections>,
) -> Result<AnalyzeReport> {
    let state = params.state()?;
    let bloch = Party::ALL
        .iter()
        .map(|&party| {
            let v = state.bloch_vector(party);
            BlochReport {
                components: v.0,
                norm: v.norm(),
                norm_sq: v.norm_sq(),
            }
        })
        .collect();
    let pairs = Pair::ALL
        .iter()
        .map(|&pair| pair_section(&state, pair))
        .collect::<Result<Vec<_>>>()?;
    let invariance = {
        let r = invariance_report(&state)?;
        InvarianceSection {
            iso_sum: r.iso_sum,
            iso_terms: r.iso_terms,
            max_aniso_deviation: r.max_aniso_deviation,
        }
    };
    let ordering = [
        (Pair::AB, Pair::AC),
        (Pair::AB, Pair::BC),
        (Pair::AC, Pair::BC),
    ]
    .iter()
    .map(|&(first, second)| {
        let q = ordering_quadruple(&state, first, second)?;
        Ok(OrderingSection {
            first: first.label(),
            second: second.label(),
            conc_diff: q.conc_diff,
            horodecki_half_diff: q.horodecki_half_diff,
            iso_diff: q.iso_diff,
            bloch_diff: q.bloch_diff,
            spread: q.spread(),
        })
    })
    .collect::<Result<Vec<_>>>()?;

    let t_ab = state.correlation_matrix(Pair::AB)?;
    let t_ac = state.correlation_matrix(Pair::AC)?;
    let opt_ab = optimal_chsh_settings(&t_ab);
    let opt_ac = optimal_chsh_settings(&t_ac);
    let (dirs_ab, dirs_ac) = match directions {
        Some(d) => (*d, *d),
        None => (opt_ab.directions, opt_ac.directions),
    };
    let report = trispin_core::nonlocality::monogamy_report(&state, &dirs_ab, &dirs_ac)?;
    let monogamy = MonogamySection {
        m_ab: report.m_ab,
        m_ac: report.m_ac,
        bound: report.bound,
        identity_residual: report.m_ab + report.m_ac - report.bound,
        chsh_ab_sq: report.chsh_ab_sq,
        chsh_ac_sq: report.chsh_ac_sq,
        bell_sum: report.chsh_ab_sq + report.chsh_ac_sq,
        optimal_value_ab: opt_ab.value,
        optimal_value_ac: opt_ac.value,
        directions_ab: (&dirs_ab).into(),
        directions_ac: (&dirs_ac).into(),
    };

    Ok(AnalyzeReport {
        provenance: Provenance::exact(),
        family: params.family_label().to_string(),
        amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        norm: state.norm(),
        bloch,
        pairs,
        invariance,
        three_tangle: three_tangle(&state)?,
        ordering,
        monogamy,
    })
}

/// One bootstrapped statistic in the estimate report.
#[derive(Serialize)]
pub struct StatisticOut {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Serialize)]
pub struct TomographySection {
    /// F = ⟨ψ|ρ̂|ψ⟩ against the supplied target state.
    pub fidelity: f64,
    /// √F, for comparison with the other fidelity convention.
    pub fidelity_sqrt: f64,
}

/// Estimation report: the analyze quantities recomputed from counts, with a
/// Poissonian bootstrap standard error per headline statistic.
#[derive(Serialize)]
pub struct EstimateReport {
    pub provenance: Provenance,
    pub total_counts: u64,
    pub bloch: Vec<BlochReport>,
    pub pairs: Vec<PairSection>,
    pub statistics: Vec<StatisticOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tomography: Option<TomographySection>,
}

fn estimated_pair_section(est: &Estimates, pair: Pair) -> PairSection {
    let t = est.t(pair);
    let spec = spin_spectrum(t);
    let c_sq = estimated_concurrence_sq(est, pair);
    PairSection {
        pair: pair.label(),
        t: t.0,
        s: spec.s,
        s_iso: spec.s_iso,
        delta: spec.delta,
        horodecki: spec.s[0] + spec.s[1],
        concurrence_sq: c_sq,
        concurrence: c_sq.max(0.0).sqrt(),
    }
}

/// The named statistics reported with error bars by `estimate`.
pub fn headline_statistics() -> Vec<String> {
    let mut names = vec!["iso-sum".to_string()];
    for pair in ["ab", "ac", "bc"] {
        for j in 1..=3 {
            names.push(format!("delta-s{j}-{pair}"));
        }
    }
    for pair in ["ab", "ac", "bc"] {
        names.push(format!("horodecki-{pair}"));
    }
    names.extend(
        [
            "conc-sq-diff-ab-ac",
            "horodecki-half-diff-ab-ac",
            "iso-diff-ab-ac",
            "bloch-sq-diff-ab-ac",
            "three-tangle",
            "chsh-ab",
            "chsh-ac",
        ]
        .map(String::from),
    );
    names
}

/// Build the estimate report from count records. `target` enables the
/// tomography section (fidelity needs a reference state).
pub fn estimate(
    records: &[CountRecord],
    resamples: usize,
    seed: u64,
    target: Option<&FamilyParams>,
) -> Result<EstimateReport> {
    let est = estimate_correlations(records)?;
    let names = headline_statistics();
    let stats: Vec<Statistic> = names
        .iter()
        .map(|name| Statistic::from_name(name))
        .collect::<Result<_>>()?;
    let results = bootstrap_many(records, &stats, resamples, seed)?;
    let statistics = names
        .into_iter()
        .zip(results)
        .map(|(name, r)| StatisticOut {
            name,
            value: r.estimate,
            std_error: r.std_error,
        })
        .collect();

    let bloch = Party::ALL
        .iter()
        .map(|&party| {
            let v = est.bloch(party);
            BlochReport {
                components: v.0,
                norm: v.norm(),
                norm_sq: v.norm_sq(),
            }
        })
        .collect();
    let pairs = Pair::ALL
        .iter()
        .map(|&pair| estimated_pair_section(&est, pair))
        .collect();

    let tomography = match target {
        Some(params) => {
            let rho = tomography_reconstruct(records)?;
            let f = fidelity(&rho, &params.state()?);
            Some(TomographySection {
                fidelity: f,
                fidelity_sqrt: f.sqrt(),
            })
        }
        None => None,
    };

    Ok(EstimateReport {
        provenance: Provenance {
            tool_version: TOOL_VERSION,
            mode: "simulated",
            seed: Some(seed),
            shots_per_setting: None,
            resamples: Some(resamples),
        },
        total_counts: records.iter().map(|r| r.total()).sum(),
        bloch,
        pairs,
        statistics,
        tomography,
    })
}


/// One filled report cell.
#[derive(Serialize)]
pub struct CellReport {
    pub column: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_sigma: Option<f64>,
    /// `ok`, `paper-systematic` (exact value outside the quoted error but
    /// within the combined tolerance), `ref-sign-corrected` (reference cell
    /// carries a documented sign typo, compared after correction), or
    /// `disagrees`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<&'static str>,
}

#[derive(Serialize)]
pub struct RowReport {
    pub label: String,
    pub cells: Vec<CellReport>,
}

/// A regenerated reference table.
#[derive(Serialize)]
pub struct TableReport {
    pub table: &'static str,
    pub provenance: Provenance,
    pub columns: Vec<String>,
    pub rows: Vec<RowReport>,
}

/// Statistics backing each column of a table, in column order. CHSH columns
/// carry the theoretically optimal directions of the exact state, mirroring
/// the measurement procedure.
fn column_statistics(id: TableId, state: &PureState3) -> Result<Vec<Statistic>> {
    let spectrum_stats = || {
        let mut stats = vec![Statistic::IsoSum];
        for j in 1..=3 {
            for pair in Pair::ALL {
                stats.push(Statistic::DeltaS { pair, j });
            }
        }
        stats
    };
    let ordering_stats = || {
        vec![
            Statistic::ConcurrenceSqDiff {
                first: Pair::AB,
                second: Pair::AC,
            },
            Statistic::HorodeckiHalfDiff {
                first: Pair::AB,
                second: Pair::AC,
            },
            Statistic::IsoDiff {
                first: Pair::AB,
                second: Pair::AC,
            },
            Statistic::BlochNormSqDiff {
                first: Pair::AB,
                second: Pair::AC,
            },
        ]
    };
    Ok(match id {
        TableId::T1 | TableId::T5 => spectrum_stats(),
        TableId::T3 | TableId::T6 => ordering_stats(),
        TableId::T2 => {
            let dirs_ab =
                optimal_chsh_settings(&state.correlation_matrix(Pair::AB)?).directions;
            let dirs_ac =
                optimal_chsh_settings(&state.correlation_matrix(Pair::AC)?).directions;
            vec![
                Statistic::Horodecki { pair: Pair::AB },
                Statistic::Horodecki { pair: Pair::AC },
                Statistic::ChshQuarterSq {
                    pair: Pair::AB,
                    dirs: Some(dirs_ab),
                },
                Statistic::ChshQuarterSq {
                    pair: Pair::AC,
                    dirs: Some(dirs_ac),
                },
            ]
        }
    })
}

/// Exact value of a statistic, straight from the state (no estimators).
fn exact_statistic(state: &PureState3, statistic: &Statistic) -> Result<f64> {
    Ok(match statistic {
        Statistic::IsoSum => invariance_report(state)?.iso_sum,
        Statistic::DeltaS { pair, j } => {
            spin_spectrum(&state.correlation_matrix(*pair)?).delta[j - 1]
        }
        Statistic::Horodecki { pair } => {
            horodecki_parameter(&state.correlation_matrix(*pair)?)
        }
        Statistic::ConcurrenceSqDiff { first, second } => {
            pair_concurrence_squared(state, *first) - pair_concurrence_squared(state, *second)
        }
        Statistic::BlochNormSqDiff { first, second } => {
            let q = ordering_quadruple(state, *first, *second)?;
            q.bloch_diff
        }
        Statistic::HorodeckiHalfDiff { first, second } => {
            let q = ordering_quadruple(state, *first, *second)?;
            q.horodecki_half_diff
        }
        Statistic::IsoDiff { first, second } => {
            let q = ordering_quadruple(state, *first, *second)?;
            q.iso_diff
        }
        Statistic::ThreeTangle => three_tangle(state)?,
        Statistic::ChshQuarterSq { pair, dirs } => {
            let t = state.correlation_matrix(*pair)?;
            let dirs = match dirs {
                Some(d) => *d,
                None => optimal_chsh_settings(&t).directions,
            };
            chsh_from_correlation(&t, &dirs).powi(2) / 4.0
        }
    })
}

fn flag_for(
    value: f64,
    reference: &PaperCell,
    systematic_column: bool,
    mode: Mode,
) -> Option<&'static str> {
    if mode != Mode::Exact {
        return None;
    }
    let diff = (value - reference.value).abs();
    if diff > reference.tolerance() && !systematic_column {
        Some("disagrees")
    } else if reference.sign_corrected {
        Some("ref-sign-corrected")
    } else if diff > reference.tolerance()
        || reference.sigma.is_some_and(|sigma| diff > sigma)
    {
        Some("paper-systematic")
    } else {
        Some("ok")
    }
}

fn row_seed(seed: u64, row_index: usize) -> u64 {
    seed.wrapping_add((row_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Regenerate one reference table.
pub fn table_report(
    id: TableId,
    mode: Mode,
    shots: u64,
    seed: u64,
    resamples: usize,
) -> Result<TableReport> {
    let reference = reference_table(id);
    let mut rows = Vec::with_capacity(reference.rows.len());
    for (row_index, row) in reference.rows.iter().enumerate() {
        let state = row.state.state()?;
        let stats = column_statistics(id, &state)?;
        let cells_ref = row.cells()?;
        let filled: Vec<(f64, Option<f64>)> = match mode {
            Mode::Exact => stats
                .iter()
                .map(|s| Ok((exact_statistic(&state, s)?, None)))
                .collect::<Result<_>>()?,
            Mode::Simulated => {
                let records = trispin_core::experiment::simulate_counts(
                    &state,
                    shots,
                    row_seed(seed, row_index),
                );
                bootstrap_many(&records, &stats, resamples, row_seed(seed, row_index))?
                    .into_iter()
                    .map(|r| (r.estimate, Some(r.std_error)))
                    .collect()
            }
        };
        let cells = reference
            .columns
            .iter()
            .zip(filled)
            .zip(cells_ref)
            .enumerate()
            .map(|(col_index, ((&column, (value, std_error)), cell))| CellReport {
                column: column.to_string(),
                value,
                std_error,
                reference_value: Some(cell.value),
                reference_sigma: cell.sigma,
                flag: flag_for(
                    value,
                    &cell,
                    reference.systematic_columns.contains(&col_index),
                    mode,
                ),
            })
            .collect();
        rows.push(RowReport {
            label: row.label.to_string(),
            cells,
        });
    }
    Ok(TableReport {
        table: reference.id.label(),
        provenance: match mode {
            Mode::Exact => Provenance::exact(),
            Mode::Simulated => Provenance::simulated(seed, shots, Some(resamples)),
        },
        columns: reference.columns.iter().map(|c| c.to_string()).collect(),
        rows,
    })
}

impl TableReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                serde_json::to_string_pretty(self).expect("table serialization")
            }
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Markdown => self.to_markdown(),
        }
    }

    fn to_csv(&self) -> String {
        let p = &self.provenance;
        let mut out = format!(
            "# table={} mode={} tool_version={}",
            self.table, p.mode, p.tool_version
        );
        if let (Some(seed), Some(shots)) = (p.seed, p.shots_per_setting) {
            out.push_str(&format!(" seed={seed} shots={shots}"));
        }
        if let Some(resamples) = p.resamples {
            out.push_str(&format!(" resamples={resamples}"));
        }
        out.push('\n');
        out.push_str("row,column,value,std_error,reference_value,reference_sigma,flag\n");
        for row in &self.rows {
            for cell in &row.cells {
                let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{:.9},{},{},{},{}\n",
                    row.label,
                    cell.column,
                    cell.value,
                    fmt_opt(cell.std_error),
                    fmt_opt(cell.reference_value),
                    fmt_opt(cell.reference_sigma),
                    cell.flag.unwrap_or("")
                ));
            }
        }
        out
    }

    fn to_markdown(&self) -> String {
        let p = &self.provenance;
        let mut out = format!(
            "## Table {} ({} mode, tool v{}",
            self.table, p.mode, p.tool_version
        );
        if let (Some(seed), Some(shots)) = (p.seed, p.shots_per_setting) {
            out.push_str(&format!(", seed {seed}, {shots} shots/setting"));
        }
        out.push_str(")\n\n");
        out.push_str("| state |");
        for c in &self.columns {
            out.push_str(&format!(" {c} |"));
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.columns.len()));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("| {} |", row.label));
            for cell in &row.cells {
                let mut text = match cell.std_error {
                    Some(err) => format!(" {:.4} ± {:.4}", cell.value, err),
                    None => format!(" {:.4}", cell.value),
                };
                if let Some(reference) = cell.reference_value {
                    text.push_str(&format!(" (ref {reference}"));
                    if let Some(sigma) = cell.reference_sigma {
                        text.push_str(&format!(" ± {sigma}"));
                    }
                    text.push(')');
                }
                if let Some(flag) = cell.flag {
                    if flag != "ok" {
                        text.push_str(&format!(" [{flag}]"));
                    }
                }
                out.push_str(&format!("{text} |"));
            }
            out.push('\n');
        }
        out
    }
}
