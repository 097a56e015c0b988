use std::fmt::Write as _;

use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ConfigError, ExperimentConfig, Pairing, Scenario, SourceSpec};
use super::{Report, Verdict};
use crate::collectives::{stabilization_audit, StabilizationVerdict, Tolerance};
use crate::combining::{
    combinability_audit, independence_from_table, joint_table, pair, CombiningConfig,
    PairedCollective,
};
use crate::error::Error;
use crate::ghz::{
    correlation, gedanken_audit, joint_feasibility, lhv_enumerate, mean_product,
    outcome_distribution, photon_stream, sample_setting_collective, Constraint, LhvStrategy,
    OutcomeTriple, TripleState,
};
use crate::measures::{
    build_singular_resolution, ghz_pointwise_identity, induced_space, is_equivalent,
    kolmogorov_contradiction, measure_to_csv, radon_nikodym, tables_to_csv, FiniteMeasure,
    Rational,
};
use crate::randomness::{randomness_audit, RandomnessConfig, SelectionSpec};

struct Outcome {
    result: Value,
    verdict: Verdict,
    summary: Vec<String>,
    csv: String,
}

pub(super) fn dispatch(config: &ExperimentConfig) -> Result<Report, ConfigError> {
    let o = match config.scenario {
        Scenario::Stabilize => stabilize(config),
        Scenario::Randomness => randomness(config),
        Scenario::Combine => combine(config),
        Scenario::GhzSample => ghz_sample(config),
        Scenario::Lhv => Ok(lhv()),
        Scenario::Paradox => paradox(),
        Scenario::Resolve => resolve(),
        Scenario::Gedanken => gedanken(config),
    }
    .map_err(|e| blame(config, e))?;
    Ok(Report {
        scenario: config.scenario,
        config: config.echo(),
        result: o.result,
        verdict: o.verdict,
        duration_ms: None,
        summary: o.summary,
        csv: o.csv,
    })
}

/// Maps a library error raised by a run back to the config key behind it.
fn blame(config: &ExperimentConfig, e: Error) -> ConfigError {
    let key = match &e {
        Error::BadSchedule(_) => "schedule",
        Error::UnknownLabel(_) | Error::EmptySelection(_) => "selections",
        Error::NonCanonicalSetting(_) => "setting",
        Error::PrefixTooShort { .. } => "n",
        _ => config.scenario.name(),
    };
    ConfigError::new(key, e.to_string())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn tolerance(config: &ExperimentConfig) -> Tolerance {
    Tolerance::InverseSqrt(config.c)
}

fn stabilization_word(v: &StabilizationVerdict) -> &'static str {
    if v.is_stabilized() {
        "stabilized"
    } else {
        "not-stabilized"
    }
}

fn checkpoint_csv(v: &StabilizationVerdict, names: &[String]) -> String {
    let mut out = String::from("n,label,frequency\n");
    for cp in &v.checkpoints {
        for (name, f) in names.iter().zip(&cp.frequencies) {
            let _ = writeln!(out, "{},{name},{f}", cp.n);
        }
    }
    out
}

fn stabilize(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let source = config.source_or_default();
    let c = source.collective(config.seed, config.n)?;
    let v = stabilization_audit(&c, &config.schedule, tolerance(config))?;
    let mut summary = vec![format!(
        "source {source}, {} checkpoints",
        v.checkpoints.len()
    )];
    if let Some(w) = &v.witness {
        summary.push(format!(
            "witness: label {} between N={} and N={}, deviation {:.6} > {:.6}",
            w.label, w.between.0, w.between.1, w.deviation, w.tolerance
        ));
    }
    if let Some(ps) = &v.probabilities {
        for p in ps {
            summary.push(format!("p({}) ≈ {:.6}", p.label, p.p));
        }
    }
    let expected = if source.stabilizes() {
        "stabilized"
    } else {
        "not-stabilized"
    };
    Ok(Outcome {
        csv: checkpoint_csv(&v, c.label_set().names()),
        verdict: Verdict::new(expected, stabilization_word(&v)),
        result: to_value(&v),
        summary,
    })
}

fn randomness(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let source = config.source_or_default();
    let c = source.collective(config.seed, config.n)?;
    let set = c.label_set().clone();
    let specs = config
        .selections
        .clone()
        .unwrap_or_else(|| SelectionSpec::builtin_family(set.name(crate::collectives::Label(0))));
    let family = specs
        .iter()
        .map(|s| s.build(&set))
        .collect::<Result<Vec<_>, _>>()?;
    let rc = RandomnessConfig {
        schedule: config.schedule.clone(),
        tolerance: tolerance(config),
        min_length: config.min_length,
    };
    let v = randomness_audit(&c, &family, &rc)?;
    let observed = if !v.mother.is_stabilized() {
        "not-a-collective"
    } else if v.passed() {
        "random"
    } else {
        "not-random"
    };
    let expected = match &source {
        SourceSpec::Oscillating(_) => "not-a-collective",
        SourceSpec::Periodic(cycle) if cycle.iter().any(|l| *l != cycle[0]) => "not-random",
        _ => "random",
    };
    let mut summary = vec![format!(
        "source {source}, mother {}",
        stabilization_word(&v.mother)
    )];
    let mut csv = String::from("selection,outcome,selected_length,max_deviation,tolerance\n");
    for r in &v.per_selection {
        let dev = r.max_deviation.map(|d| d.to_string()).unwrap_or_default();
        let tol = r.tolerance.map(|d| d.to_string()).unwrap_or_default();
        summary.push(format!(
            "{}: {:?}, length {}, deviation {}",
            r.name,
            r.outcome,
            r.selected_length,
            r.max_deviation
                .map_or("-".to_string(), |d| format!("{d:.6}"))
        ));
        let _ = writeln!(
            csv,
            "{},{:?},{},{dev},{tol}",
            r.name.replace(',', ";"),
            r.outcome,
            r.selected_length
        );
    }
    Ok(Outcome {
        result: json!({
            "selections": specs.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "audit": to_value(&v),
        }),
        verdict: Verdict::new(expected, observed),
        summary,
        csv,
    })
}

fn build_pair(config: &ExperimentConfig) -> Result<PairedCollective, Error> {
    match config.pairing {
        Pairing::Independent => {
            let source = config.source_or_default();
            let x = source.collective(config.seed, config.n)?;
            let y = source.collective(config.seed.wrapping_add(1), config.n)?;
            pair(&x, &y)
        }
        Pairing::Copy => {
            let x = config
                .source_or_default()
                .collective(config.seed, config.n)?;
            pair(&x, &x)
        }
        Pairing::Ghz => {
            let c = sample_setting_collective(
                &TripleState::default_ghz(),
                &config.setting_or_default(),
                config.n,
                config.seed,
            )?;
            pair(&photon_stream(&c, 0)?, &photon_stream(&c, 1)?)
        }
    }
}

fn combine(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let z = build_pair(config)?;
    let cc = CombiningConfig {
        schedule: config.schedule.clone(),
        tolerance: tolerance(config),
        min_length: config.min_length,
    };
    let v = combinability_audit(&z, &cc)?;
    let table = joint_table(&z, z.len())?;
    // n(a,b)/N = ν(b/a)·ν(a) as exact rationals
    let mut product_rule_exact = true;
    for a in z.x_labels().labels() {
        if table.count_x(a) == 0 {
            continue;
        }
        for b in z.y_labels().labels() {
            let lhs = table.joint_exact(a, b)?;
            let rhs: Ratio<u64> = table.conditional_exact(b, a)? * table.marginal_x_exact(a)?;
            product_rule_exact &= lhs == rhs;
        }
    }
    let independence = v
        .is_combinable()
        .then(|| independence_from_table(&table, tolerance(config)));
    let observed = match &independence {
        None => "not-combinable".to_string(),
        Some(i) if i.is_independent() => "combinable, independent".to_string(),
        Some(_) => "combinable, dependent".to_string(),
    };
    let expected = match config.pairing {
        Pairing::Ghz => "combinable, independent",
        _ if !config.source_or_default().stabilizes() => "not-combinable",
        Pairing::Copy => "combinable, dependent",
        Pairing::Independent => "combinable, independent",
    };
    let mut summary = vec![
        format!("pairing {}, {} pairs", config.pairing, z.len()),
        format!("product rule exact at N={}: {product_rule_exact}", z.len()),
    ];
    if let Some(i) = &independence {
        summary.push(format!(
            "max |ν(b/a) − ν(b)| = {:.6} (τ = {:.6})",
            i.max_deviation, i.tolerance
        ));
    }
    let observed = if product_rule_exact {
        observed
    } else {
        format!("{observed}, product rule broken")
    };
    Ok(Outcome {
        result: json!({
            "pairs": z.len(),
            "combinability": to_value(&v),
            "independence": to_value(&independence),
            "product_rule_exact": product_rule_exact,
        }),
        verdict: Verdict::new(expected, observed),
        summary,
        csv: table.to_csv(),
    })
}

fn ghz_sample(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let state = TripleState::default_ghz();
    let s = config.setting_or_default();
    let dist = outcome_distribution(&state, &s)?;
    let corr = correlation(&state, &s)?;
    let c = sample_setting_collective(&state, &s, config.n, config.seed)?;
    let mut counts = [0u64; 8];
    for l in c.labels() {
        counts[l.index()] += 1;
    }
    let mean = mean_product(&c);
    let n = config.n as f64;
    let certified = if (corr - 1.0).abs() <= 1e-12 {
        Some(1i8)
    } else if (corr + 1.0).abs() <= 1e-12 {
        Some(-1)
    } else {
        None
    };
    let (expected, observed) = match certified {
        Some(sign) => {
            let wrong: u64 = (0..8)
                .filter(|&i| OutcomeTriple::from_index(i).product() != sign)
                .map(|i| counts[i])
                .sum();
            (
                format!("all products {sign:+}"),
                if wrong == 0 {
                    format!("all products {sign:+}")
                } else {
                    format!("{wrong} wrong-parity draws")
                },
            )
        }
        None => {
            let tol = config.c / n.sqrt();
            let within = (mean - corr).abs() <= tol;
            (
                "mean product within c/√N of correlation".to_string(),
                if within {
                    "mean product within c/√N of correlation".to_string()
                } else {
                    format!("mean product off by {:.6}", (mean - corr).abs())
                },
            )
        }
    };
    let mut csv = String::from("outcome,probability,count,frequency\n");
    let mut outcomes = Vec::new();
    for (i, (p, k)) in dist.probabilities.iter().zip(counts).enumerate() {
        let label = OutcomeTriple::from_index(i).label();
        let _ = writeln!(csv, "{label},{p},{k},{}", k as f64 / n);
        outcomes.push(json!({ "outcome": label, "probability": p, "count": k }));
    }
    Ok(Outcome {
        result: json!({
            "setting": s.phases,
            "correlation": corr,
            "certified_sign": certified,
            "wrong_parity_mass": certified.map(|sign| dist.parity_mass(-sign)),
            "mean_product": mean,
            "outcomes": outcomes,
        }),
        summary: vec![
            format!("setting {s}, correlation {corr:.12}"),
            format!("empirical mean product {mean:.6} over {} draws", config.n),
        ],
        verdict: Verdict::new(expected, observed),
        csv,
    })
}

fn lhv() -> Outcome {
    let constraints = Constraint::ghz();
    let report = lhv_enumerate(&constraints);
    let proof = joint_feasibility(&constraints);
    let mut csv = String::from("index,strategy,constraints_met\n");
    for s in LhvStrategy::all() {
        let met = constraints.iter().filter(|c| c.holds(&s)).count();
        let _ = writeln!(csv, "{},{s},{met}", s.index());
    }
    let observed = format!(
        "{}/{} satisfying, max {}",
        report.satisfying_count, report.total, report.max_satisfiable
    );
    Outcome {
        summary: vec![
            format!(
                "{} of {} strategies satisfy all four constraints",
                report.satisfying_count, report.total
            ),
            format!(
                "at most {} hold at once, e.g. {}",
                report.max_satisfiable,
                report.witness.map(|w| w.to_string()).unwrap_or_default()
            ),
        ],
        result: json!({ "feasibility": to_value(&report), "joint_feasibility": to_value(&proof) }),
        verdict: Verdict::new("0/64 satisfying, max 3", observed),
        csv,
    }
}

fn paradox() -> Result<Outcome, Error> {
    let (space, tables) = induced_space();
    let identity = ghz_pointwise_identity(&tables)?;
    let uniform = FiniteMeasure::<Rational>::uniform(space)?;
    let contradiction = kolmogorov_contradiction(&uniform, &tables)?;
    let proof = joint_feasibility(&Constraint::ghz());
    let resolution = build_singular_resolution().verify()?;

    let contradiction_ok =
        identity.violations.is_empty() && contradiction.globally_infeasible && !proof.feasible;
    let resolution_ok =
        resolution.c1_holds && resolution.c2_holds && resolution.all_pairwise_singular;
    let observed = format!(
        "{}; {}",
        if contradiction_ok {
            "single measure infeasible"
        } else {
            "single measure not refuted"
        },
        if resolution_ok {
            "singular resolution consistent"
        } else {
            "singular resolution broken"
        }
    );
    let mut csv = String::from("quantity,value\n");
    let rows = [
        ("identity_violations", identity.violations.len().to_string()),
        ("sigma_plus_atoms", identity.sigma_plus.len().to_string()),
        (
            "sigma_plus_disjoint_from_omega4_minus",
            contradiction
                .sigma_plus_disjoint_from_omega4_minus
                .to_string(),
        ),
        (
            "globally_infeasible",
            contradiction.globally_infeasible.to_string(),
        ),
        (
            "strategies_meeting_all_four",
            proof.intersection.len().to_string(),
        ),
        ("P1(Omega1+)", resolution.p_i_omega_i_plus[0].to_string()),
        ("P2(Omega2+)", resolution.p_i_omega_i_plus[1].to_string()),
        ("P3(Omega3+)", resolution.p_i_omega_i_plus[2].to_string()),
        ("P4(Omega4+)", resolution.p4_omega4_plus.to_string()),
        ("P4(Sigma+)", resolution.p4_sigma_plus.to_string()),
        (
            "pairwise_singular",
            resolution.all_pairwise_singular.to_string(),
        ),
    ];
    for (k, v) in rows {
        let _ = writeln!(csv, "{k},{v}");
    }
    Ok(Outcome {
        summary: vec![
            format!(
                "one measure: Σ⁺ ∩ Ω₄⁻ = ∅ on all 64 atoms, {} strategies meet all four constraints",
                proof.intersection.len()
            ),
            format!(
                "four singular measures: P_i(Ω_i⁺) = {}, P₄(Σ⁺) = {}",
                resolution
                    .p_i_omega_i_plus
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(", "),
                resolution.p4_sigma_plus
            ),
        ],
        result: json!({
            "contradiction": {
                "identity": to_value(&identity),
                "uniform_measure": to_value(&contradiction),
                "joint_feasibility": to_value(&proof),
            },
            "resolution": to_value(&resolution),
        }),
        verdict: Verdict::new(
            "single measure infeasible; singular resolution consistent",
            observed,
        ),
        csv,
    })
}

fn resolve() -> Result<Outcome, Error> {
    let res = build_singular_resolution();
    let report = res.verify()?;
    let mut relations = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let (p, q) = (&res.measures[i], &res.measures[j]);
            relations.push(json!({
                "p": i + 1,
                "q": j + 1,
                "equivalent": is_equivalent(p, q)?,
                "density_exists": radon_nikodym(p, q).is_ok(),
            }));
        }
    }
    let ok = report.c1_holds && report.c2_holds && report.all_pairwise_singular;
    let mut csv = tables_to_csv(&res.space, &res.tables);
    for (i, m) in res.measures.iter().enumerate() {
        let _ = write!(csv, "# P{}\n{}", i + 1, measure_to_csv(m));
    }
    Ok(Outcome {
        summary: vec![
            format!(
                "P₄(Σ⁺) = {}, P₄(Ω₄⁻) = {}",
                report.p4_sigma_plus, report.p4_omega4_minus
            ),
            format!("pairwise singular: {}", report.all_pairwise_singular),
        ],
        result: json!({
            "atoms": (0..res.space.len()).map(|i| res.space.atom_id(i)).collect::<Vec<_>>(),
            "report": to_value(&report),
            "relations": relations,
        }),
        verdict: Verdict::new("consistent", if ok { "consistent" } else { "inconsistent" }),
        csv,
    })
}

fn gedanken(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let r = gedanken_audit(&TripleState::default_ghz(), config.n, config.seed)?;
    let mut csv =
        String::from("setting,correlation,certified_sign,mean_product,certified_fraction\n");
    let mut summary = Vec::new();
    for s in &r.settings {
        let (mean, frac) = match &s.empirical {
            Some(e) => (
                e.mean_product.to_string(),
                e.certified_fraction
                    .map(|f| f.to_string())
                    .unwrap_or_default(),
            ),
            None => (String::new(), String::new()),
        };
        let sign = s.certified_sign.map(|v| v.to_string()).unwrap_or_default();
        let phases = s.setting.phases.map(|p| p.to_string()).join(" ");
        let _ = writeln!(csv, "{phases},{},{sign},{mean},{frac}", s.correlation);
        summary.push(format!(
            "setting {}: correlation {:.12}, empirical mean {}",
            s.setting,
            s.correlation,
            if mean.is_empty() { "-" } else { &mean }
        ));
    }
    summary.push(format!(
        "strategies meeting every certified constraint: {}",
        r.certificate.intersection.len()
    ));
    let observed = match (r.non_combinable, r.empirical_consistent) {
        (true, true) => "not combinable",
        (false, _) => "combinable",
        (true, false) => "not combinable, empirical mismatch",
    };
    Ok(Outcome {
        result: to_value(&r),
        verdict: Verdict::new("not combinable", observed),
        summary,
        csv,
    })
}
