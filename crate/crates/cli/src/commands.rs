use std::f64::consts::PI;

use serde::Serialize;
use serde_json::json;

use sepdist::channels::{self, audit_nonentangling, AuditReport, KrausMap};
use sepdist::contmodel::{
    bounce_simulation, coupled_local_hamiltonians, parse_range, random_firstorder_amplitudes,
    sweep, ContinuousModel, EvolutionMode, AB_ENTANGLED_TOL, ANCILLA_SEPARABLE_TOL,
};
use sepdist::matcore::{c64, norm, NormKind};
use sepdist::protocol::run_protocol;
use sepdist::qstate::{tripartite_cuts, ABC};
use sepdist::{Error, Result};

use crate::output::{Cell, Report, Table};

/// `--t-max`: a number or `auto` (`2π/ε²`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TMax {
    Auto,
    Value(f64),
}

impl TMax {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(TMax::Auto);
        }
        match s.parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(TMax::Value(t)),
            _ => Err(format!("expected a positive number or 'auto', got '{s}'")),
        }
    }

    pub fn resolve(self, epsilon: f64) -> Result<f64> {
        match self {
            TMax::Value(t) => Ok(t),
            TMax::Auto if epsilon > 0.0 => Ok(2.0 * PI / (epsilon * epsilon)),
            TMax::Auto => Err(Error::InvalidArgument(
                "--t-max auto needs a positive epsilon".into(),
            )),
        }
    }
}

/// A finished command: the document to write, a human summary and whether
/// every internal check held.
pub struct Outcome {
    pub report: Report,
    pub summary: String,
    pub consistent: bool,
}

fn report(config: impl Serialize, result: impl Serialize, table: Table) -> Result<Report> {
    Report::new(config, result, table)
        .map_err(|e| Error::Consistency(format!("serialization failed: {e}")))
}

pub fn discrete() -> Result<Outcome> {
    let trace = run_protocol()?;
    let summary = trace.summary();
    let cuts = tripartite_cuts();
    let mut table = Table {
        columns: vec![
            "step",
            "neg_a_bc",
            "neg_b_ac",
            "neg_c_ab",
            "prob_outcome_0",
            "final_negativity",
        ],
        rows: vec![],
    };
    for step in &trace.steps {
        let mut row: Vec<Cell> = vec![step.name.into()];
        row.extend(cuts.iter().map(|c| Cell::from(step.negativities[c])));
        row.push(summary.prob_outcome_0.into());
        row.push(trace.rho_ab_negativity.into());
        table.rows.push(row);
    }
    let text = format!(
        "discrete protocol: max c|(ab) negativity {:.3e} over all steps; P(c=0) = {:.12}; \
         extracted ab negativity {:.12} (min PT eigenvalue {:.6})",
        trace.max_ancilla_negativity(),
        summary.prob_outcome_0,
        summary.final_negativity,
        summary.final_min_pt_eigenvalue,
    );
    Ok(Outcome {
        report: report(json!({"command": "discrete"}), &summary, table)?,
        summary: text,
        consistent: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuousConfig {
    pub command: &'static str,
    pub epsilon: f64,
    pub alpha: f64,
    pub t_max: f64,
    pub steps: usize,
    pub mode: EvolutionMode,
}

pub fn continuous(cfg: ContinuousConfig) -> Result<Outcome> {
    let model = ContinuousModel::new(cfg.epsilon)?;
    let trace = model.run_trace(cfg.alpha, cfg.t_max, cfg.steps, cfg.mode)?;
    let table = Table {
        columns: vec![
            "time",
            "neg_c_ab",
            "neg_a_bc",
            "neg_b_ac",
            "neg_ab",
            "min_pt_eig_c_ab",
        ],
        rows: (0..trace.len())
            .map(|i| {
                vec![
                    trace.times[i].into(),
                    trace.neg_c_ab[i].into(),
                    trace.neg_a_bc[i].into(),
                    trace.neg_b_ac[i].into(),
                    trace.neg_ab_reduced[i].into(),
                    trace.min_pt_eig_c_ab[i].into(),
                ]
            })
            .collect(),
    };
    let ancilla_ok = trace.max_neg_c_ab() <= ANCILLA_SEPARABLE_TOL;
    let ab_ok = trace.max_neg_ab() >= AB_ENTANGLED_TOL;
    let text = format!(
        "continuous ({}) eps={} alpha={} t_max={:.6}: max neg c|(ab) {:.3e} [{}], max neg ab {:.6e} [{}], \
         min PT eigenvalue c|(ab) {:.6e}",
        cfg.mode,
        cfg.epsilon,
        cfg.alpha,
        cfg.t_max,
        trace.max_neg_c_ab(),
        if ancilla_ok { "ancilla separable" } else { "ancilla entangled" },
        trace.max_neg_ab(),
        if ab_ok { "ab entangled" } else { "ab not entangled" },
        trace.min_pt_margin(),
    );
    let result = json!({
        "max_neg_c_ab": trace.max_neg_c_ab(),
        "max_neg_a_bc": trace.max_neg_a_bc(),
        "max_neg_b_ac": trace.max_neg_b_ac(),
        "max_neg_ab": trace.max_neg_ab(),
        "min_pt_eig_c_ab": trace.min_pt_margin(),
        "ancilla_separable_all_t": ancilla_ok,
        "ab_entangled": ab_ok,
        "trace": trace,
    });
    Ok(Outcome {
        report: report(&cfg, result, table)?,
        summary: text,
        consistent: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub command: &'static str,
    pub epsilon: String,
    pub alpha: String,
    pub t_max_factor: f64,
    pub steps: usize,
}

pub fn run_sweep(cfg: SweepConfig) -> Result<Outcome> {
    let eps = parse_range(&cfg.epsilon)?;
    let alphas = parse_range(&cfg.alpha)?;
    let table_data = sweep(&eps, &alphas, cfg.t_max_factor, cfg.steps)?;
    let table = Table {
        columns: vec![
            "epsilon",
            "alpha",
            "t_max",
            "max_neg_c_ab",
            "min_pt_eig_c_ab",
            "max_neg_a_bc",
            "max_neg_b_ac",
            "max_neg_ab",
            "ancilla_separable_all_t",
            "ab_entangled",
            "feasible_simulated",
            "perturbation_budget",
            "state_deviation",
            "noise_weight",
            "effective_max_neg_ab",
            "analytic_feasible",
        ],
        rows: table_data
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.epsilon.into(),
                    r.alpha.into(),
                    r.t_max.into(),
                    r.max_neg_c_ab.into(),
                    r.min_pt_eig_c_ab.into(),
                    r.max_neg_a_bc.into(),
                    r.max_neg_b_ac.into(),
                    r.max_neg_ab.into(),
                    r.ancilla_separable_all_t.into(),
                    r.ab_entangled.into(),
                    r.feasible_simulated.into(),
                    r.analytic.perturbation_budget.into(),
                    r.analytic.state_deviation.into(),
                    r.analytic.noise_weight.into(),
                    r.analytic.effective_max_neg_ab.into(),
                    r.analytic.feasible.into(),
                ]
            })
            .collect(),
    };
    let mut text = String::from("sweep: feasible alphas per epsilon (simulated / analytic)\n");
    let mut seen = vec![];
    for r in &table_data.rows {
        if seen.contains(&r.epsilon) {
            continue;
        }
        seen.push(r.epsilon);
        let sim = table_data.feasible_alphas(r.epsilon);
        let ana = table_data.analytic_feasible_alphas(r.epsilon);
        text.push_str(&format!(
            "  eps={:<8} {:>3} / {:>3}\n",
            r.epsilon,
            sim.len(),
            ana.len()
        ));
    }
    text.push_str(&format!(
        "  analytic chain monotone: {}; analytic threshold: {}",
        table_data.analytic_monotone,
        table_data
            .analytic_threshold
            .map_or("none on this grid".to_string(), |t| t.to_string()),
    ));
    Ok(Outcome {
        report: report(&cfg, &table_data, table)?,
        summary: text,
        consistent: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrotterConfig {
    pub command: &'static str,
    pub epsilon: f64,
    pub t_max: f64,
    pub n_trotter: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
struct TrotterRow {
    n: usize,
    error: f64,
    /// `error(n/2) / error(n)` when the previous `n` is half this one.
    ratio: Option<f64>,
}

pub fn trotter(cfg: TrotterConfig) -> Result<Outcome> {
    let model = ContinuousModel::new(cfg.epsilon)?;
    let exact = model.exact_unitary(cfg.t_max);
    let mut rows: Vec<TrotterRow> = vec![];
    for &n in &cfg.n_trotter {
        let err = norm(
            &(&model.trotter_unitary(cfg.t_max, n)? - &exact),
            NormKind::Spectral,
        );
        let ratio = rows.last().filter(|p| 2 * p.n == n).map(|p| p.error / err);
        rows.push(TrotterRow {
            n,
            error: err,
            ratio,
        });
    }
    let table = Table {
        columns: vec!["n", "error", "ratio"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.n.into(),
                    r.error.into(),
                    r.ratio.map_or(Cell::Text(String::new()), Cell::Num),
                ]
            })
            .collect(),
    };
    let mut text = format!(
        "trotter convergence at eps={} t={}:\n",
        cfg.epsilon, cfg.t_max
    );
    for r in &rows {
        let ratio = r.ratio.map_or(String::from("-"), |x| format!("{x:.4}"));
        text.push_str(&format!(
            "  n={:<6} error={:.6e} ratio={ratio}\n",
            r.n, r.error
        ));
    }
    Ok(Outcome {
        report: report(&cfg, json!({ "rows": rows }), table)?,
        summary: text.trim_end().into(),
        consistent: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BounceConfig {
    pub command: &'static str,
    pub bounce: bool,
    pub epsilon: f64,
    pub alpha: f64,
    pub t_max: f64,
    pub n_trotter: usize,
}

pub fn bounce(cfg: BounceConfig) -> Result<Outcome> {
    let model = ContinuousModel::new(cfg.epsilon)?;
    let trace = bounce_simulation(&model, cfg.alpha, cfg.t_max, cfg.n_trotter)?;
    let table = Table {
        columns: vec![
            "step",
            "leg",
            "time",
            "neg_c_ab",
            "min_pt_eig_c_ab",
            "neg_ab",
        ],
        rows: trace
            .steps
            .iter()
            .map(|s| {
                let leg = serde_json::to_value(s.leg)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default();
                vec![
                    s.step.into(),
                    leg.into(),
                    s.time.into(),
                    s.neg_c_ab.into(),
                    s.min_pt_eig_c_ab.into(),
                    s.neg_ab_reduced.into(),
                ]
            })
            .collect(),
    };
    let text = format!(
        "bounce eps={} alpha={} n={}: max neg c|(ab) {:.3e}, min PT eigenvalue c|(ab) {:.6e}, max neg ab {:.6e}",
        cfg.epsilon,
        cfg.alpha,
        cfg.n_trotter,
        trace.max_neg_c_ab(),
        trace.min_pt_margin(),
        trace.max_neg_ab(),
    );
    let result = json!({
        "max_neg_c_ab": trace.max_neg_c_ab(),
        "min_pt_eig_c_ab": trace.min_pt_margin(),
        "max_neg_ab": trace.max_neg_ab(),
        "trace": trace,
    });
    Ok(Outcome {
        report: report(&cfg, result, table)?,
        summary: text,
        consistent: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SampledConfig {
    pub command: &'static str,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
struct AuditSummary {
    map: &'static str,
    cut: String,
    samples: usize,
    seed: u64,
    max_output_negativity: f64,
    argmax_sample: usize,
    verdict: &'static str,
}

impl AuditSummary {
    fn new(map: &'static str, r: &AuditReport) -> Self {
        AuditSummary {
            map,
            cut: r.partition.label(&ABC),
            samples: r.samples,
            seed: r.seed,
            max_output_negativity: r.max_output_negativity,
            argmax_sample: r.argmax_sample,
            verdict: r.verdict.label(),
        }
    }
}

pub fn channels(cfg: SampledConfig) -> Result<Outcome> {
    let (e1, e2, composed, published) = (
        channels::e1(),
        channels::e2(),
        channels::composed(),
        channels::published_composition(),
    );
    let [a_bc, b_ac, c_ab] = tripartite_cuts();
    let plan: [(&'static str, &KrausMap, &sepdist::Bipartition); 9] = [
        ("e1", &e1, &b_ac),
        ("e1", &e1, &c_ab),
        ("e2", &e2, &a_bc),
        ("e2", &e2, &c_ab),
        ("composed", &composed, &c_ab),
        ("composed", &composed, &a_bc),
        ("composed", &composed, &b_ac),
        ("published", &published, &c_ab),
        ("published", &published, &a_bc),
    ];
    let audits = plan
        .iter()
        .map(|(name, map, cut)| {
            Ok(AuditSummary::new(
                name,
                &audit_nonentangling(map, cut, cfg.samples, cfg.seed)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let choi_gap = channels::choi_distance(&composed, &published)?;
    let [plus, minus] = channels::demo_entangle_plus()?;
    let rho_plus: Vec<Vec<[f64; 2]>> = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| plus.rho_ab.mat()[(i, j)])
                .map(|z| [z.re, z.im])
                .collect()
        })
        .collect();
    let table = Table {
        columns: vec![
            "map",
            "cut",
            "samples",
            "seed",
            "max_output_negativity",
            "argmax_sample",
            "verdict",
        ],
        rows: audits
            .iter()
            .map(|a| {
                vec![
                    a.map.into(),
                    a.cut.clone().into(),
                    a.samples.into(),
                    Cell::Int(a.seed),
                    a.max_output_negativity.into(),
                    a.argmax_sample.into(),
                    a.verdict.into(),
                ]
            })
            .collect(),
    };
    let mut text = String::from("channel audits:\n");
    for a in &audits {
        text.push_str(&format!(
            "  {:<9} {:<7} max neg {:.3e}  {}\n",
            a.map, a.cut, a.max_output_negativity, a.verdict
        ));
    }
    text.push_str(&format!(
        "  Choi(E2∘E1) vs published composition: max entry difference {choi_gap:.6}\n  \
         demo on |+++⟩: P(+)={:.12} neg(+)={:.12}; P(-)={:.12} neg(-)={:.12}",
        plus.probability, plus.negativity, minus.probability, minus.negativity
    ));
    let result = json!({
        "trace_preservation_defect": {
            "e1": e1.trace_preservation_defect(),
            "e2": e2.trace_preservation_defect(),
            "composed": composed.trace_preservation_defect(),
            "published": published.trace_preservation_defect(),
        },
        "choi_distance_composed_published": choi_gap,
        "audits": audits,
        "demo": {
            "prob_plus": plus.probability,
            "prob_minus": minus.probability,
            "negativity_plus": plus.negativity,
            "negativity_minus": minus.negativity,
            "rho_ab_plus": rho_plus,
        },
    });
    // a sampled audit is not a consistency check; the exit status stays 0
    Ok(Outcome {
        report: report(&cfg, result, table)?,
        summary: text,
        consistent: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NogoConfig {
    pub command: &'static str,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn nogo(cfg: NogoConfig) -> Result<Outcome> {
    let (h_ac, h_bc) = coupled_local_hamiltonians(cfg.epsilon)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (zero, one) = (
        vec![c64(1.0, 0.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(1.0, 0.0)],
    );
    let plus = vec![c64(s, 0.0), c64(s, 0.0)];
    let minus = vec![c64(s, 0.0), c64(-s, 0.0)];
    let c = vec![c64(1.0 / 3f64.sqrt(), 0.0); 3];
    let model_amp = sepdist::contmodel::pure_firstorder_amplitude(
        &h_ac, &h_bc, &zero, &plus, &c, &one, &minus,
    )?
    .norm();
    let amps = random_firstorder_amplitudes([2, 2, 3], cfg.samples, cfg.seed)?;
    let max = amps.iter().copied().fold(model_amp, f64::max);
    let consistent = max <= 1e-12;
    let table = Table {
        columns: vec!["sample", "abs_amplitude"],
        rows: amps
            .iter()
            .enumerate()
            .map(|(i, &a)| vec![i.into(), a.into()])
            .collect(),
    };
    let text = format!(
        "first-order amplitude <a⊥ b⊥ c'|H|a b c>: model Hamiltonian {model_amp:.3e}, max over {} random instances {:.3e} [{}]",
        cfg.samples,
        amps.iter().copied().fold(0.0, f64::max),
        if consistent { "vanishes" } else { "NON-ZERO" },
    );
    let result = json!({
        "model_hamiltonian_amplitude": model_amp,
        "max_abs_amplitude": max,
        "all_vanish": consistent,
    });
    Ok(Outcome {
        report: report(&cfg, result, table)?,
        summary: text,
        consistent,
    })
}
