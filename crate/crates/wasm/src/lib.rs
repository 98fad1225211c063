//! Browser bindings for the three-qubit invariant toolkit.
//!
//! Three entry points, all JSON-in/JSON-out so the page needs no generated
//! bindings beyond the wasm-bindgen glue:
//!
//! * [`analyze`] — exact invariants of one state (state-file JSON in).
//! * [`sweep`] — invariants along a one-parameter family, for curve plots.
//! * [`simulate_summary`] — a simulated counting run with bootstrap error
//!   bars, for error-bar plots.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use trispin_core::experiment::{bootstrap_many, simulate_counts, Statistic};
use trispin_core::invariants::{invariance_report, ordering_quadruple, spin_spectrum, three_tangle};
use trispin_core::nonlocality::{horodecki_parameter, optimal_chsh_settings};
use trispin_core::states::{ghz_class_state, w_class_state, FamilyParams, Pair, Party, PureState3};

#[derive(Serialize)]
struct PairOut {
    pair: &'static str,
    s: [f64; 3],
    s_iso: f64,
    delta: [f64; 3],
    horodecki: f64,
    chsh_max: f64,
}

#[derive(Serialize)]
struct AnalyzeOut {
    family: String,
    bloch_norms: [f64; 3],
    pairs: Vec<PairOut>,
    iso_sum: f64,
    max_aniso_deviation: f64,
    three_tangle: f64,
    monogamy_bound: f64,
    ordering_ab_ac: [f64; 4],
}

fn analyze_state(params: &FamilyParams) -> Result<AnalyzeOut, trispin_core::Error> {
    let state = params.state()?;
    let report = invariance_report(&state)?;
    let mut pairs = Vec::with_capacity(3);
    for pair in Pair::ALL {
        let t = state.correlation_matrix(pair)?;
        let spec = spin_spectrum(&t);
        pairs.push(PairOut {
            pair: pair.label(),
            s: spec.s,
            s_iso: spec.s_iso,
            delta: spec.delta,
            horodecki: spec.s[0] + spec.s[1],
            chsh_max: optimal_chsh_settings(&t).value,
        });
    }
    let s3_bc = spin_spectrum(&state.correlation_matrix(Pair::BC)?).s[2];
    let q = ordering_quadruple(&state, Pair::AB, Pair::AC)?;
    Ok(AnalyzeOut {
        family: params.family_label().to_string(),
        bloch_norms: [
            state.bloch_vector(Party::A).norm(),
            state.bloch_vector(Party::B).norm(),
            state.bloch_vector(Party::C).norm(),
        ],
        pairs,
        iso_sum: report.iso_sum,
        max_aniso_deviation: report.max_aniso_deviation,
        three_tangle: three_tangle(&state)?,
        monogamy_bound: 2.0 * (1.0 - s3_bc),
        ordering_ab_ac: q.as_array(),
    })
}

fn analyze_impl(state_json: &str) -> Result<String, String> {
    let params = FamilyParams::from_json(state_json).map_err(|e| e.to_string())?;
    let out = analyze_state(&params).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&out).expect("serialize"))
}

/// Exact analysis of a state given in the state-file JSON schema.
#[wasm_bindgen]
pub fn analyze(state_json: &str) -> Result<String, JsError> {
    analyze_impl(state_json).map_err(|e| JsError::new(&e))
}

#[derive(Serialize)]
struct SweepPoint {
    angle_deg: f64,
    m_ab: f64,
    m_ac: f64,
    m_bc: f64,
    bound: f64,
    three_tangle: f64,
    iso: [f64; 3],
    delta: [f64; 3],
}

#[derive(Serialize)]
struct SweepOut {
    family: String,
    fixed_deg: f64,
    points: Vec<SweepPoint>,
}

/// Invariants along a one-parameter slice of a state family, for plotting.
///
/// `family` selects the slice: `"w-phi"` sweeps φ at fixed θ = `fixed_deg`,
/// `"w-theta"` sweeps θ at fixed φ, `"ghz"` sweeps φ′ (ignores `fixed_deg`).
/// The sweep covers 0°..=90° with `points` samples.
#[wasm_bindgen]
pub fn sweep(family: &str, fixed_deg: f64, points: u32) -> Result<String, JsError> {
    sweep_impl(family, fixed_deg, points).map_err(|e| JsError::new(&e))
}

fn sweep_impl(family: &str, fixed_deg: f64, points: u32) -> Result<String, String> {
    if !(2..=2001).contains(&points) {
        return Err("points must be between 2 and 2001".into());
    }
    let make: Box<dyn Fn(f64) -> PureState3> = match family {
        "w-phi" => Box::new(move |angle| w_class_state(angle, fixed_deg)),
        "w-theta" => Box::new(move |angle| w_class_state(fixed_deg, angle)),
        "ghz" => Box::new(|angle| ghz_class_state(angle)),
        other => {
            return Err(format!(
                "unknown sweep family {other:?} (expected w-phi, w-theta or ghz)"
            ))
        }
    };
    let mut out = SweepOut {
        family: family.to_string(),
        fixed_deg,
        points: Vec::with_capacity(points as usize),
    };
    for i in 0..points {
        let angle = 90.0 * i as f64 / (points - 1) as f64;
        let state = make(angle);
        let corr = |pair| state.correlation_matrix(pair).map_err(|e| e.to_string());
        let spec_ab = spin_spectrum(&corr(Pair::AB)?);
        let spec_ac = spin_spectrum(&corr(Pair::AC)?);
        let spec_bc = spin_spectrum(&corr(Pair::BC)?);
        out.points.push(SweepPoint {
            angle_deg: angle,
            m_ab: spec_ab.s[0] + spec_ab.s[1],
            m_ac: spec_ac.s[0] + spec_ac.s[1],
            m_bc: spec_bc.s[0] + spec_bc.s[1],
            bound: 2.0 * (1.0 - spec_bc.s[2]),
            three_tangle: three_tangle(&state).map_err(|e| e.to_string())?,
            iso: [spec_ab.s_iso, spec_ac.s_iso, spec_bc.s_iso],
            delta: spec_ab.delta,
        });
    }
    Ok(serde_json::to_string(&out).expect("serialize"))
}

#[derive(Serialize)]
struct EstimateOut {
    name: String,
    value: f64,
    std_error: f64,
    exact: f64,
}

#[derive(Serialize)]
struct SimulateOut {
    shots_per_setting: u32,
    seed: u32,
    resamples: u32,
    total_counts: u64,
    statistics: Vec<EstimateOut>,
}

/// Simulate a full counting run and return headline statistics with
/// Poissonian bootstrap error bars next to their exact values.
#[wasm_bindgen]
pub fn simulate_summary(
    state_json: &str,
    shots_per_setting: u32,
    seed: u32,
    resamples: u32,
) -> Result<String, JsError> {
    simulate_summary_impl(state_json, shots_per_setting, seed, resamples)
        .map_err(|e| JsError::new(&e))
}

fn simulate_summary_impl(
    state_json: &str,
    shots_per_setting: u32,
    seed: u32,
    resamples: u32,
) -> Result<String, String> {
    if shots_per_setting == 0 {
        return Err("shots_per_setting must be at least 1".into());
    }
    let params = FamilyParams::from_json(state_json).map_err(|e| e.to_string())?;
    let state = params.state().map_err(|e| e.to_string())?;
    let records = simulate_counts(&state, shots_per_setting as u64, seed as u64);

    let mut names = vec!["iso-sum".to_string()];
    for j in 1..=3 {
        names.push(format!("delta-s{j}-ab"));
    }
    names.push("horodecki-ab".into());
    names.push("horodecki-ac".into());
    let stats: Vec<Statistic> = names
        .iter()
        .map(|n| Statistic::from_name(n))
        .collect::<Result<_, _>>()
        .map_err(|e: trispin_core::Error| e.to_string())?;
    let results = bootstrap_many(&records, &stats, resamples as usize, seed as u64)
        .map_err(|e| e.to_string())?;

    let report = invariance_report(&state).map_err(|e| e.to_string())?;
    let exact_for = |name: &str| -> Result<f64, trispin_core::Error> {
        Ok(match name {
            "iso-sum" => report.iso_sum,
            "horodecki-ab" => horodecki_parameter(&state.correlation_matrix(Pair::AB)?),
            "horodecki-ac" => horodecki_parameter(&state.correlation_matrix(Pair::AC)?),
            delta => {
                let j: usize = delta.as_bytes()[7] as usize - b'0' as usize;
                report.deltas[0][j - 1]
            }
        })
    };

    let mut statistics = Vec::with_capacity(names.len());
    for (name, result) in names.into_iter().zip(results) {
        let exact = exact_for(&name).map_err(|e| e.to_string())?;
        statistics.push(EstimateOut {
            name,
            value: result.estimate,
            std_error: result.std_error,
            exact,
        });
    }
    Ok(serde_json::to_string(&SimulateOut {
        shots_per_setting,
        seed,
        resamples,
        total_counts: records.iter().map(|r| r.total()).sum(),
        statistics,
    })
    .expect("serialize"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_round_trip() {
        let json = FamilyParams::W {
            phi_deg: 45.0,
            theta_deg: 15.0,
        }
        .to_json();
        let out: serde_json::Value = serde_json::from_str(&analyze_impl(&json).unwrap()).unwrap();
        assert!((out["iso_sum"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert!((out["pairs"][1]["horodecki"].as_f64().unwrap() - 1.8660254037844386).abs() < 1e-9);
        assert!(analyze_impl("{\"family\":\"nope\"}").is_err());
    }

    #[test]
    fn sweep_covers_range() {
        let out: serde_json::Value =
            serde_json::from_str(&sweep_impl("w-phi", 15.0, 31).unwrap()).unwrap();
        let points = out["points"].as_array().unwrap();
        assert_eq!(points.len(), 31);
        assert_eq!(points[0]["angle_deg"], 0.0);
        assert_eq!(points[30]["angle_deg"], 90.0);
        // monogamy holds along the whole slice
        for p in points {
            let sum = p["m_ab"].as_f64().unwrap() + p["m_ac"].as_f64().unwrap();
            assert!(sum <= p["bound"].as_f64().unwrap() + 1e-9);
        }
        assert!(sweep_impl("nope", 0.0, 10).is_err());
    }

    #[test]
    fn simulate_summary_brackets_exact() {
        let json = FamilyParams::W {
            phi_deg: 30.0,
            theta_deg: 30.0,
        }
        .to_json();
        let out: serde_json::Value =
            serde_json::from_str(&simulate_summary_impl(&json, 4000, 7, 120).unwrap()).unwrap();
        for stat in out["statistics"].as_array().unwrap() {
            let value = stat["value"].as_f64().unwrap();
            let exact = stat["exact"].as_f64().unwrap();
            let sigma = stat["std_error"].as_f64().unwrap();
            assert!(
                (value - exact).abs() < 6.0 * sigma.max(1e-3),
                "{stat}"
            );
        }
    }
}
