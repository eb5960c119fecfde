//! One function per command; each returns the rendered document.

use serde_json::json;
use wallcross_core::correlator::{
    check_dilaton_invariance, check_wallcrossing_identity, DilatonCheckOptions, WallCrossOptions,
};
use wallcross_core::localization::{
    assemble_j_function, check_genus0_resummation, check_residue_relation, enumerate_fixed_points, node_data,
    residue_relation, Genus0Options, ResidueOptions,
};
use wallcross_core::model::{
    classify_state, epsilon_exponent, epsilon_gamma, selection_rule, virtual_dimension, GammaType, ModelSpec,
};
use wallcross_core::mu::{
    compare_state_vectors, extract_i_functions, mu_series, mu_series_by_sequences, MuOptions,
};
use wallcross_core::series::{fmt_rational, Gen, Monomial, TruncatedSeries, TruncationPolicy};

use crate::config::{load_model, parse_list, parse_vars, CheckCommand, Command, MuArgs, MuPart, MAX_LIGHT};
use crate::render::{csv_field, report_csv_row, state_vector_csv, Doc, REPORT_CSV_HEADER};
use crate::suite::{verify_all, VerifyOptions};
use crate::CliError;

/// Bounds for `mu` wide enough to hold every term up to `t`-degree `n`.
pub fn mu_policy(model: &ModelSpec, n: u32, twisted: bool) -> TruncationPolicy {
    let s = model.s() as i32;
    let lambda = if twisted { model.s() as u32 * n } else { 0 };
    TruncationPolicy::new(n, 0, -(n as i32) - 1, s * n as i32 + 2, lambda)
}

fn mu_options(model: &ModelSpec, args: &MuArgs) -> Result<MuOptions, CliError> {
    Ok(MuOptions { vars: parse_vars(args.vars.as_deref(), model.r())?, twisted: args.twisted, broad_mode: args.broad_mode })
}

fn gamma(model: &ModelSpec, s: &str) -> Result<GammaType, CliError> {
    Ok(GammaType::parse(model, s)?)
}

fn check_light(g: &GammaType) -> Result<(), CliError> {
    if g.n() > MAX_LIGHT {
        return Err(CliError::Bounds(format!("{} light markings exceed {MAX_LIGHT}", g.n())));
    }
    Ok(())
}

pub fn dispatch(command: &Command, seed: u64) -> Result<Doc, CliError> {
    match command {
        Command::Mu { model, mu, max_deg, part } => {
            let m = load_model(&model.model)?;
            let opts = mu_options(&m, mu)?;
            let full = mu_series(&m, &opts, mu_policy(&m, *max_deg, opts.twisted));
            let v = match part {
                MuPart::Full => full,
                MuPart::Plus => full.laurent_truncate_plus(),
                MuPart::Minus => full.laurent_truncate_minus(),
            };
            Ok(Doc {
                passed: None,
                json: json!({ "model": m, "max_deg": max_deg, "broad_mode": opts.broad_mode.to_string(),
                              "twisted": opts.twisted, "components": v.to_json() }),
                text: v.to_string(),
                csv: state_vector_csv(&v),
            })
        }
        Command::Ifunc { model, max_deg } => {
            let m = load_model(&model.model)?;
            let n = *max_deg;
            let (i0, i1) = extract_i_functions(&m, TruncationPolicy::new(n, 0, -(n as i32) - 1, 2, 0))?;
            let coeffs = |s: &TruncatedSeries| -> Vec<String> {
                (0..=n as i32).map(|e| fmt_rational(&s.coeff(&Monomial::pow_of(Gen::T(2), e)))).collect()
            };
            let (c0, c1) = (coeffs(&i0), coeffs(&i1));
            let csv = std::iter::once("degree,I0,I1".to_string())
                .chain((0..=n as usize).map(|d| format!("{d},{},{}", c0[d], c1[d])))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Doc {
                passed: None,
                json: json!({ "model": m, "max_deg": n, "I0": c0, "I1": c1 }),
                text: format!("I0 = {i0}\nI1 = {i1}\n"),
                csv,
            })
        }
        Command::Vdim { model, gamma: g } => {
            let m = load_model(&model.model)?;
            let g = gamma(&m, g)?;
            let ord = fmt_rational(&virtual_dimension(&m, &g, false)?);
            let mas = fmt_rational(&virtual_dimension(&m, &g, true)?);
            Ok(Doc {
                passed: None,
                json: json!({ "gamma": g.to_string(), "ordinary": ord, "master": mas }),
                text: format!("ordinary: {ord}\nmaster: {mas}\n"),
                csv: format!("gamma,ordinary,master\n{},{ord},{mas}", csv_field(&g.to_string())),
            })
        }
        Command::Selection { model, gamma: g } => {
            let m = load_model(&model.model)?;
            let g = gamma(&m, g)?;
            let ok = selection_rule(&m, &g);
            Ok(Doc {
                passed: None,
                json: json!({ "gamma": g.to_string(), "selection_rule": ok }),
                text: format!("{ok}\n"),
                csv: format!("gamma,selection_rule\n{},{ok}", csv_field(&g.to_string())),
            })
        }
        Command::Epsilon { model, gamma: g } => {
            let m = load_model(&model.model)?;
            let g = gamma(&m, g)?;
            let e = fmt_rational(&epsilon_exponent(&m, &g));
            let v = fmt_rational(&epsilon_gamma(&m, &g)?);
            Ok(Doc {
                passed: None,
                json: json!({ "gamma": g.to_string(), "sign_exponent": e, "epsilon": v }),
                text: format!("sign exponent: {e}\nepsilon: {v}\n"),
                csv: format!("gamma,sign_exponent,epsilon\n{},{e},{v}", csv_field(&g.to_string())),
            })
        }
        Command::Classify { model } => {
            let m = load_model(&model.model)?;
            let kinds: Vec<(u32, String)> = (1..=m.r()).map(|a| (a, classify_state(&m, a).to_string())).collect();
            Ok(Doc {
                passed: None,
                json: json!(kinds.iter().map(|(a, k)| json!({ "state": a, "kind": k })).collect::<Vec<_>>()),
                text: kinds.iter().map(|(a, k)| format!("phi{a}: {k}\n")).collect(),
                csv: std::iter::once("state,kind".to_string())
                    .chain(kinds.iter().map(|(a, k)| format!("{a},{k}")))
                    .collect::<Vec<_>>()
                    .join("\n"),
            })
        }
        Command::NodeData { model, j } => {
            let m = load_model(&model.model)?;
            let values = parse_list(j)?;
            if values.is_empty() || values.len() > MAX_LIGHT || values.iter().any(|&b| b == 0 || b > m.r()) {
                return Err(CliError::Parse(format!("J values must be 1..{MAX_LIGHT} states in 1..={}", m.r())));
            }
            let d = node_data(&m, &values);
            Ok(Doc {
                passed: None,
                json: serde_json::to_value(&d).expect("datum serializes"),
                text: format!("{d}\n"),
                csv: format!(
                    "k,ell,a_infinity,r_prime,c\n{},{},{},{},{}",
                    d.node_k, d.node_ell, d.a_infinity, d.r_prime, d.bundle_shift
                ),
            })
        }
        Command::FixedPoints { model, gamma: g, genus0 } => {
            let m = load_model(&model.model)?;
            let g = gamma(&m, g)?;
            check_light(&g)?;
            let fps = enumerate_fixed_points(&m, &g, *genus0)?;
            let mut csv = String::from("kind,J,k,ell,a_infinity,r_prime,c,covers_all\n");
            for d in &fps {
                let j: Vec<String> = d.j.iter().map(|x| x.to_string()).collect();
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    d.kind,
                    csv_field(&j.join(",")),
                    d.node_k,
                    d.node_ell,
                    d.a_infinity,
                    d.r_prime,
                    d.bundle_shift,
                    d.covers_all
                ));
            }
            Ok(Doc {
                passed: None,
                json: json!({ "gamma": g.to_string(), "fixed_points": fps }),
                text: fps.iter().map(|d| format!("{d}\n")).collect(),
                csv,
            })
        }
        Command::Jfunc { model, vars, t_deg, u_deg, psi_deg } => {
            let m = load_model(&model.model)?;
            let opts = Genus0Options {
                vars: parse_vars(vars.as_deref(), m.r())?,
                max_t_degree: *t_deg,
                max_u_degree: *u_deg,
                max_psi_degree: *psi_deg,
                perturb: false,
            };
            let j = assemble_j_function(&m, &opts)?;
            let counts: Vec<usize> = j.definitional.correlators.iter().map(|e| e.len()).collect();
            let mut text = format!("{}explicit part (definitional form):\n{}", j.report, j.definitional.explicit);
            text.push_str(&format!("correlator symbols per component: {counts:?}\n"));
            Ok(Doc {
                passed: Some(j.report.passed),
                json: json!({
                    "report": j.report.to_json(),
                    "explicit_definitional": j.definitional.explicit.to_json(),
                    "explicit_resummed": j.resummed.explicit.to_json(),
                    "correlator_symbols": counts,
                }),
                text,
                csv: state_vector_csv(&j.definitional.explicit),
            })
        }
        Command::Check(c) => check(c),
        Command::VerifyAll { quick } => {
            let opts = VerifyOptions { seed, quick: *quick, threads: crate::suite::threads_from_env() };
            let outcomes = verify_all(&opts, &mut |_, _| {});
            Ok(crate::suite::render_outcomes(&outcomes))
        }
    }
}

fn check(c: &CheckCommand) -> Result<Doc, CliError> {
    match c {
        CheckCommand::Wallcross { model, mu, genus, t_deg, u_deg, psi_deg, g0_mask, narrow_only, perturb } => {
            let m = load_model(&model.model)?;
            let opts = WallCrossOptions { mu: mu_options(&m, mu)?, g0_mask: *g0_mask, narrow_only: *narrow_only, perturb: *perturb };
            let policy = TruncationPolicy::new(*t_deg, *u_deg, 0, 0, 0).with_psi_degree(*psi_deg);
            Ok(Doc::from_report(&check_wallcrossing_identity(&m, *genus, policy, &opts)?))
        }
        CheckCommand::Dilaton { model, genus, t_deg, perturb } => {
            let m = load_model(&model.model)?;
            let opts = DilatonCheckOptions { max_t_degree: *t_deg, perturb: *perturb };
            Ok(Doc::from_report(&check_dilaton_invariance(&m, *genus, &opts)?))
        }
        CheckCommand::Genus0 { model, vars, t_deg, psi_deg, perturb } => {
            let m = load_model(&model.model)?;
            let opts = Genus0Options {
                vars: parse_vars(vars.as_deref(), m.r())?,
                max_t_degree: *t_deg,
                max_u_degree: 0,
                max_psi_degree: *psi_deg,
                perturb: *perturb,
            };
            Ok(Doc::from_report(&check_genus0_resummation(&m, &opts)?))
        }
        CheckCommand::Residue { model, gamma: g, d, genus0, heavy_psi, twisted } => {
            let m = load_model(&model.model)?;
            let g = gamma(&m, g)?;
            check_light(&g)?;
            let d = match d {
                Some(d) => parse_list(d)?,
                None => vec![0; g.n()],
            };
            let opts = ResidueOptions { genus_zero_variant: *genus0, twisted: *twisted, heavy_psi: *heavy_psi };
            let rel = residue_relation(&m, &g, &d, opts)?;
            let report = check_residue_relation(&m, &g, &d, opts)?;
            let mut doc = Doc::from_report(&report);
            doc.json = json!({ "relation": rel.to_json(), "report": report.to_json() });
            doc.text = format!("{rel}{report}");
            Ok(doc)
        }
        CheckCommand::MuAggregation { model, mu, max_deg } => {
            let m = load_model(&model.model)?;
            let opts = mu_options(&m, mu)?;
            let policy = mu_policy(&m, *max_deg, opts.twisted);
            let report = compare_state_vectors(
                &format!("mu aggregation t<={max_deg}"),
                &mu_series(&m, &opts, policy),
                &mu_series_by_sequences(&m, &opts, policy),
            );
            let mut doc = Doc::from_report(&report);
            doc.csv = format!("{REPORT_CSV_HEADER}\n{}", report_csv_row(&report));
            Ok(doc)
        }
    }
}
