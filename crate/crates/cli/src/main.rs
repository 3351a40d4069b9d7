//! Command-line front end: scenario parsing, canonical scalar-literal I/O,
//! identity verification, motives, hypothesis reports, and the acceptance
//! battery. Machine-readable JSON on stdout; `--pretty` for humans.
//!
//! Exit codes: 0 success / all exact; 1 defect or hypothesis failure;
//! 2 usage or parse error; 3 resource cap (depth or expansion budget).

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::rc::Rc;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use carlitz_core::bivar::{fr_to_json, DefectReport};
use carlitz_core::criteria::{self, TheoremInputs};
use carlitz_core::field::{field_create_with_cap, FieldSpec};
use carlitz_core::hypergeom::{self, HgfParams};
use carlitz_core::literal::{format_perfected, format_rational, parse_rational};
use carlitz_core::motive::{self, MotiveKind};
use carlitz_core::polylog::{self, Index, MplFamily, PointTuple};
use carlitz_core::scalar::{RationalScalar, ScalarError, Valuation};
use carlitz_core::suite;

#[derive(Parser)]
#[command(name = "carlitz", version, about = "exact function-field special functions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Human-readable output instead of compact JSON
    #[arg(long, global = true)]
    pretty: bool,
    /// Load scenario defaults from a JSON file
    #[arg(long, global = true, value_name = "FILE")]
    json: Option<String>,
}

#[derive(Args, Clone, Debug, Default)]
struct ScenarioArgs {
    /// Field size q = p^e (prime power)
    #[arg(long, global = true)]
    q: Option<u64>,
    /// Characteristic p (alternative to --q)
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Extension degree e
    #[arg(long, global = true)]
    e: Option<u32>,
    /// Modulus for F_{p^e} as a polynomial in g, e.g. "g^2+g+1"
    #[arg(long, global = true)]
    modulus: Option<String>,
    /// Perfection depth M (θ = -u^{(q-1)q^M})
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Cap on automatic deepening
    #[arg(long, global = true)]
    depth_cap: Option<u32>,
    /// Series cutoff N
    #[arg(long, global = true)]
    cutoff: Option<u64>,
    /// Target error valuation for value commands
    #[arg(long, global = true)]
    precision: Option<i64>,
}

/// The reproducible scenario echoed with every result; round-trips through
/// serde byte-identically (fixed field order, no floats).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
struct Scenario {
    p: u64,
    e: u32,
    modulus: Option<String>,
    depth: u32,
    depth_cap: u32,
    cutoff: u64,
    precision: i64,
}

impl Scenario {
    fn from_args(args: &ScenarioArgs, file: Option<&Scenario>) -> Result<Scenario, CliError> {
        let base = file.cloned().unwrap_or(Scenario {
            p: 3,
            e: 1,
            modulus: None,
            depth: 0,
            depth_cap: carlitz_core::field::DEFAULT_DEPTH_CAP,
            cutoff: 4,
            precision: 30,
        });
        let (p, e) = match (args.q, args.p) {
            (Some(q), _) => prime_power(q)?,
            (None, Some(p)) => (p, args.e.unwrap_or(1)),
            (None, None) => (base.p, args.e.unwrap_or(base.e)),
        };
        Ok(Scenario {
            p,
            e,
            modulus: args.modulus.clone().or_else(|| base.modulus.clone()),
            depth: args.depth.unwrap_or(base.depth),
            depth_cap: args.depth_cap.unwrap_or(base.depth_cap),
            cutoff: args.cutoff.unwrap_or(base.cutoff),
            precision: args.precision.unwrap_or(base.precision),
        })
    }

    fn field(&self) -> Result<Rc<FieldSpec>, CliError> {
        let modulus = match &self.modulus {
            None => None,
            Some(text) => Some(parse_modulus(text, self.p as u32)?),
        };
        field_create_with_cap(self.p, self.e, modulus, self.depth_cap)
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

fn prime_power(q: u64) -> Result<(u64, u32), CliError> {
    for p in 2..=q {
        if q % p == 0 {
            let mut e = 0u32;
            let mut m = q;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if m == 1 {
                return Ok((p, e));
            }
            return Err(CliError::Usage(format!("{} is not a prime power", q)));
        }
    }
    Err(CliError::Usage(format!("{} is not a prime power", q)))
}

/// Parse a modulus literal over g with integer coefficients.
fn parse_modulus(text: &str, p: u32) -> Result<Vec<u32>, CliError> {
    let bad = |part: &str| CliError::Usage(format!("bad modulus term `{}`", part));
    let mut coeffs: BTreeMap<u32, u32> = BTreeMap::new();
    for part in text.replace('-', "+-").split('+') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (neg, part) = match part.strip_prefix('-') {
            Some(rest) => (true, rest.trim()),
            None => (false, part),
        };
        let (coeff, deg) = if let Some(rest) = part.strip_prefix("g^") {
            (1u32, rest.parse::<u32>().map_err(|_| bad(part))?)
        } else if part == "g" {
            (1, 1)
        } else if let Some((c, rest)) = part.split_once("*g^") {
            (c.parse::<u32>().map_err(|_| bad(part))?, rest.parse::<u32>().map_err(|_| bad(part))?)
        } else if let Some(c) = part.strip_suffix("*g") {
            (c.parse::<u32>().map_err(|_| bad(part))?, 1)
        } else {
            (part.parse::<u32>().map_err(|_| bad(part))?, 0)
        };
        let c = if neg { (p - coeff % p) % p } else { coeff % p };
        *coeffs.entry(deg).or_insert(0) = (coeffs.get(&deg).copied().unwrap_or(0) + c) % p;
    }
    let deg = coeffs.keys().max().copied().unwrap_or(0);
    Ok((0..=deg).map(|d| coeffs.get(&d).copied().unwrap_or(0)).collect())
}

#[derive(Subcommand)]
enum Cmd {
    /// Convergence classification of a hypergeometric parameter tuple
    Classify(ParamArgs),
    /// The a(j)/b(j)/c(j) expansion profile
    Profile(ParamArgs),
    /// Evaluate a hypergeometric series with a proven error bound
    EvalThgf {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        alpha: String,
    },
    /// Evaluate a (multiple) polylogarithm with a proven error bound
    EvalMpl {
        /// kochubei or carlitz
        #[arg(long, default_value = "kochubei")]
        family: String,
        /// Index parts, e.g. 1,2
        #[arg(long)]
        s: String,
        /// Points, comma-separated scalar literals
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        star: bool,
    },
    /// Expand a product of two polylogarithms into stuffle terms
    Stuffle {
        #[arg(long)]
        s1: String,
        #[arg(long)]
        s2: String,
        #[arg(long)]
        z1: Option<String>,
        #[arg(long)]
        z2: Option<String>,
    },
    /// Verify an exact cutoff identity
    Verify {
        #[command(subcommand)]
        which: VerifyCmd,
    },
    /// Build, verify, or evaluate a Frobenius system
    Motive {
        #[command(subcommand)]
        which: MotiveCmd,
    },
    /// Hypothesis report for an independence theorem
    Hypotheses {
        /// Theorem tag: 3.4, 3.6, 3.8, 4.1, 4.2, 4.3, 4.4, 4.5
        #[arg(long)]
        theorem: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        weight: Option<u64>,
        /// Inputs as one JSON object: {"a":[..],"b":[..],"s":[..],
        /// "alpha":["..."],"beta":"...","weight":..,
        /// "presentation":{"dim":..,"vectors":[["..."]]}}
        #[arg(long)]
        params_json: Option<String>,
    },
    /// Run the acceptance battery with a seed manifest
    Suite {
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args, Clone, Default)]
struct ParamArgs {
    /// Upper parameters, e.g. 1,1
    #[arg(long)]
    a: Option<String>,
    /// Lower parameters, e.g. 2
    #[arg(long)]
    b: Option<String>,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// The hypergeometric Frobenius difference equation (restricted boundary)
    Frobhgf {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        alpha: String,
    },
    /// The Carlitz-operator difference equation on coefficients
    HgOde {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Expansion-profile consistency against the Pochhammer route
    Expansion {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Polylogarithm Frobenius relations (Kochubei any depth, Carlitz depth 1)
    MplFrob {
        #[arg(long, default_value = "kochubei")]
        family: String,
        #[arg(long)]
        s: String,
        #[arg(long)]
        alpha: String,
    },
    /// Star inclusion–exclusion identities
    StarIe {
        #[arg(long)]
        s: String,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long)]
        j: Option<usize>,
    },
    /// The stuffle product identity at uniform cutoff
    Stuffle {
        #[arg(long)]
        s1: String,
        #[arg(long)]
        s2: String,
        #[arg(long)]
        z1: Option<String>,
        #[arg(long)]
        z2: Option<String>,
    },
    /// The Ω partial-product twist relation
    Omega,
    /// The P_{b,d} system and the two-form cross-check
    Pbd {
        #[arg(long)]
        b: String,
        #[arg(long)]
        d: Option<i64>,
    },
    /// The algebraicity witness reconstruction
    WitnessAlgebraic {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        alpha: String,
    },
}

#[derive(Subcommand)]
enum MotiveCmd {
    Build(MotiveArgs),
    Verify(MotiveArgs),
    Period {
        #[command(flatten)]
        args: MotiveArgs,
        /// Entry "row,col" of Ψ^{-1}|_{t=θ}
        #[arg(long, default_value = "2,1")]
        entry: String,
    },
    /// The star-formula Ψ^{-1} at cutoff, with the product-identity check
    PsiStar {
        #[arg(long)]
        s: String,
        #[arg(long)]
        alpha: String,
    },
}

#[derive(Args, Clone)]
struct MotiveArgs {
    /// thgf | thgf-simple | kmpl | p
    #[arg(long, default_value = "thgf")]
    kind: String,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    d: Option<i64>,
}

enum CliError {
    Usage(String),
    ResourceCap(String),
}

impl From<carlitz_core::literal::ParseError> for CliError {
    fn from(e: carlitz_core::literal::ParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<hypergeom::HgError> for CliError {
    fn from(e: hypergeom::HgError) -> Self {
        match &e {
            hypergeom::HgError::Scalar(ScalarError::DepthCapExceeded { .. })
            | hypergeom::HgError::Monomial(carlitz_core::symbols::MonomialError::Scalar(
                ScalarError::DepthCapExceeded { .. },
            )) => CliError::ResourceCap(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<polylog::MplError> for CliError {
    fn from(e: polylog::MplError) -> Self {
        match e {
            polylog::MplError::Scalar(ScalarError::DepthCapExceeded { .. }) => {
                CliError::ResourceCap(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<motive::MotiveError> for CliError {
    fn from(e: motive::MotiveError) -> Self {
        match e {
            motive::MotiveError::CutoffCap { .. } => CliError::ResourceCap(e.to_string()),
            motive::MotiveError::Scalar(ScalarError::DepthCapExceeded { .. }) => {
                CliError::ResourceCap(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<criteria::CriteriaError> for CliError {
    fn from(e: criteria::CriteriaError) -> Self {
        match e {
            criteria::CriteriaError::Scalar(ScalarError::DepthCapExceeded { .. }) => {
                CliError::ResourceCap(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn parse_int_list(text: &str) -> Result<Vec<i64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<i64>().map_err(|_| CliError::Usage(format!("bad integer `{}`", s)))
        })
        .collect()
}

fn parse_index(text: &str) -> Result<Index, CliError> {
    let parts = parse_int_list(text)?;
    if parts.iter().any(|&x| x < 1) {
        return Err(CliError::Usage("index parts must be positive".into()));
    }
    Ok(Index::new(parts.into_iter().map(|x| x as u64).collect()))
}

fn parse_points(text: &str, field: &Rc<FieldSpec>) -> Result<PointTuple, CliError> {
    let entries: Result<Vec<RationalScalar>, CliError> =
        text.split(',').map(|s| parse_rational(s.trim(), field).map_err(CliError::from)).collect();
    Ok(PointTuple::new(entries?))
}

fn hgf_params(args: &ParamArgs) -> Result<HgfParams, CliError> {
    let a = parse_int_list(args.a.as_deref().ok_or(CliError::Usage("--a required".into()))?)?;
    let b = match &args.b {
        Some(text) if !text.trim().is_empty() => parse_int_list(text)?,
        _ => vec![],
    };
    HgfParams::new(a, b).map_err(CliError::from)
}

fn family_of(text: &str) -> Result<MplFamily, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "kochubei" | "k" => Ok(MplFamily::Kochubei),
        "carlitz" | "c" => Ok(MplFamily::Carlitz),
        other => Err(CliError::Usage(format!("unknown family `{}`", other))),
    }
}

fn valuation_json(v: &Valuation) -> serde_json::Value {
    serde_json::Value::String(v.to_string())
}

fn partial_value_json(pv: &hypergeom::PartialValue) -> serde_json::Value {
    serde_json::json!({
        "value": format_perfected(&pv.value),
        "error_valuation": valuation_json(&pv.error_valuation),
        "leading_valuation": pv.leading_valuation.map(|r| r.to_string()),
        "nonvanishing_certified": pv.nonvanishing_certified,
        "terms_used": pv.terms_used,
    })
}

fn report_result(rep: &DefectReport) -> (serde_json::Value, bool) {
    let mut json = rep.to_json();
    if rep.exact {
        json["defect"] = serde_json::Value::String("0".into());
    }
    (json, rep.exact)
}

fn run(cli: &Cli) -> Result<(serde_json::Value, bool), CliError> {
    let file_scenario: Option<Scenario> = match &cli.json {
        None => None,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {}", path, e)))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("bad scenario JSON: {}", e)))?,
            )
        }
    };
    let scenario = Scenario::from_args(&cli.scenario, file_scenario.as_ref())?;
    let field = scenario.field()?;
    let n = scenario.cutoff;
    let precision = Ratio::from_integer(scenario.precision);

    let (result, ok) = match &cli.cmd {
        Cmd::Classify(params) => {
            let p = hgf_params(params)?;
            let json = match hypergeom::classify_convergence(&p) {
                hypergeom::Convergence::PointOnly => {
                    serde_json::json!({"convergence": "point_only"})
                }
                hypergeom::Convergence::Entire => serde_json::json!({"convergence": "entire"}),
                hypergeom::Convergence::Disc { radius_log_q } => {
                    serde_json::json!({"convergence": "disc", "radius_log_q": radius_log_q})
                }
            };
            (json, true)
        }
        Cmd::Profile(params) => {
            let p = hgf_params(params)?;
            let profile = hypergeom::expansion_profile(&p);
            let table = |t: &BTreeMap<i64, i64>| -> BTreeMap<String, i64> {
                t.iter().map(|(&k, &v)| (k.to_string(), v)).collect()
            };
            (
                serde_json::json!({
                    "d": profile.d,
                    "a": table(&profile.a_table),
                    "b": table(&profile.b_table),
                    "c": table(&profile.c_table),
                    "negative_sites": profile.negative_sites(),
                }),
                true,
            )
        }
        Cmd::EvalThgf { params, alpha } => {
            let p = hgf_params(params)?;
            let alpha = parse_rational(alpha, &field)?;
            let pv = hypergeom::thgf_value(&field, &p, &alpha, precision)?;
            (partial_value_json(&pv), true)
        }
        Cmd::EvalMpl { family, s, alpha, star } => {
            let family = family_of(family)?;
            let index = parse_index(s)?;
            let points = parse_points(alpha, &field)?;
            let pv = polylog::mpl_value(&field, family, &index, &points, precision, *star)?;
            (partial_value_json(&pv), true)
        }
        Cmd::Stuffle { s1, s2, z1, z2 } => {
            let i1 = parse_index(s1)?;
            let i2 = parse_index(s2)?;
            let z1 = match z1 {
                Some(t) => parse_points(t, &field)?,
                None => PointTuple::ones(&field, i1.depth()),
            };
            let z2 = match z2 {
                Some(t) => parse_points(t, &field)?,
                None => PointTuple::ones(&field, i2.depth()),
            };
            let terms = polylog::stuffle_expand(&i1, &i2, &z1, &z2);
            (
                serde_json::json!({
                    "count": terms.len(),
                    "terms": terms.iter().map(|t| serde_json::json!({
                        "index": t.index.parts,
                        "point": t.point.entries.iter().map(format_rational).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                }),
                true,
            )
        }
        Cmd::Verify { which } => match which {
            VerifyCmd::Frobhgf { params, alpha } => {
                let p = hgf_params(params)?;
                let alpha = parse_rational(alpha, &field)?;
                let rep = hypergeom::verify_thgf_frobenius(&field, &p, &alpha, n)?;
                report_result(&rep)
            }
            VerifyCmd::HgOde { params } => {
                let p = hgf_params(params)?;
                let rep = hypergeom::verify_hg_difference_equation(&field, &p, n)?;
                report_result(&rep)
            }
            VerifyCmd::Expansion { params } => {
                let p = hgf_params(params)?;
                let rep = hypergeom::verify_expansion_consistency(&field, &p, n)?;
                report_result(&rep)
            }
            VerifyCmd::MplFrob { family, s, alpha } => {
                let family = family_of(family)?;
                let index = parse_index(s)?;
                let points = parse_points(alpha, &field)?;
                let rep = polylog::verify_polylog_frobenius(&field, family, &index, &points, n)?;
                report_result(&rep)
            }
            VerifyCmd::StarIe { s, alpha, l, j } => {
                let index = parse_index(s)?;
                let points = parse_points(alpha, &field)?;
                let j = j.unwrap_or(index.depth());
                let rep =
                    polylog::verify_star_inclusion_exclusion(&field, &index, &points, *l, j, n)?;
                report_result(&rep)
            }
            VerifyCmd::Stuffle { s1, s2, z1, z2 } => {
                let i1 = parse_index(s1)?;
                let i2 = parse_index(s2)?;
                let z1 = match z1 {
                    Some(t) => parse_points(t, &field)?,
                    None => PointTuple::ones(&field, i1.depth()),
                };
                let z2 = match z2 {
                    Some(t) => parse_points(t, &field)?,
                    None => PointTuple::ones(&field, i2.depth()),
                };
                let rep = polylog::verify_stuffle(&field, &i1, &i2, &z1, &z2, n)?;
                report_result(&rep)
            }
            VerifyCmd::Omega => {
                let mut reports = vec![];
                for m in 1..=n.max(1) {
                    reports.push(motive::verify_omega_twist(&field, m, scenario.depth));
                }
                let rep = DefectReport::merge("omega twist relation", reports);
                report_result(&rep)
            }
            VerifyCmd::Pbd { b, d } => {
                let b = parse_int_list(b)?;
                let d = d.unwrap_or_else(|| b.iter().copied().max().unwrap_or(2));
                let rep = verify_p_system(&field, &b, d, n)?;
                report_result(&rep)
            }
            VerifyCmd::WitnessAlgebraic { params, alpha } => {
                let p = hgf_params(params)?;
                let alpha = parse_rational(alpha, &field)?;
                let w = hypergeom::algebraic_witness(&field, &p, &alpha, n)?;
                let (mut json, ok) = report_result(&w.report);
                json["f_polys"] = serde_json::json!(w
                    .f_polys
                    .iter()
                    .map(|(h, f)| serde_json::json!({
                        "h": h,
                        "f": carlitz_core::literal::format_poly(f, "t"),
                    }))
                    .collect::<Vec<_>>());
                json["s_partials"] = serde_json::json!(w
                    .s_partials
                    .iter()
                    .map(|(h, v)| serde_json::json!({
                        "h": h,
                        "value": format_perfected(v),
                    }))
                    .collect::<Vec<_>>());
                (json, ok)
            }
        },
        Cmd::Motive { which } => match which {
            MotiveCmd::Build(args) => {
                let m = build_motive_from(args, &field)?;
                (motive_json(&m), true)
            }
            MotiveCmd::Verify(args) => {
                let m = build_motive_from(args, &field)?;
                let rep = motive::verify_frobenius_system(&m, n)?;
                report_result(&rep)
            }
            MotiveCmd::Period { args, entry } => {
                let m = build_motive_from(args, &field)?;
                let (row, col) = {
                    let parts = parse_int_list(entry)?;
                    if parts.len() != 2 {
                        return Err(CliError::Usage("--entry takes row,col".into()));
                    }
                    (parts[0] as usize, parts[1] as usize)
                };
                let pv = motive::period_value(&m, row, col, precision)?;
                (
                    serde_json::json!({
                        "entry": [row, col],
                        "tag": pv.tag,
                        "value": format_perfected(&pv.value),
                        "error_valuation": valuation_json(&pv.error_valuation),
                    }),
                    true,
                )
            }
            MotiveCmd::PsiStar { s, alpha } => {
                let index = parse_index(s)?;
                let points = parse_points(alpha, &field)?;
                let inv = motive::psi_star_inverse(&field, &index, &points, n, n)?;
                let consistency = motive::verify_psi_star_product(&field, &index, &points, n)?;
                (
                    serde_json::json!({
                        "size": inv.len(),
                        "entries": inv.iter().enumerate().flat_map(|(i, row)| {
                            row.iter().enumerate().map(move |(j, cs)| serde_json::json!({
                                "row": i + 1,
                                "col": j + 1,
                                "kind": cs.kind,
                                "terms": cs.terms.len(),
                            }))
                        }).collect::<Vec<_>>(),
                        "product_identity_exact": consistency.exact,
                    }),
                    consistency.exact,
                )
            }
        },
        Cmd::Hypotheses { theorem, params, s, alpha, beta, weight, params_json } => {
            let inputs = match params_json {
                Some(text) => theorem_inputs_from_json(&field, theorem, text)?,
                None => build_theorem_inputs(&field, theorem, params, s, alpha, beta, *weight)?,
            };
            let rep = criteria::theorem_report(&field, theorem, inputs)?;
            let ok = rep.overall == criteria::Overall::HypothesesHold;
            (rep.to_json(), ok)
        }
        Cmd::Suite { quick } => {
            let outcome = suite::run_suite(*quick);
            let ok = outcome.all_passed();
            (outcome.to_json(), ok)
        }
    };

    let wrapped = serde_json::json!({
        "scenario": scenario,
        "result": result,
    });
    Ok((wrapped, ok))
}

fn verify_p_system(
    field: &Rc<FieldSpec>,
    b: &[i64],
    d: i64,
    n: u64,
) -> Result<DefectReport, CliError> {
    let m = motive::build_motive(field, MotiveKind::PSystem { b: b.to_vec(), d })?;
    let reports = vec![motive::verify_frobenius_system(&m, n)?];
    Ok(DefectReport::merge(format!("P system b={:?} d={}", b, d), reports))
}

fn build_motive_from(
    args: &MotiveArgs,
    field: &Rc<FieldSpec>,
) -> Result<motive::MotiveSpec, CliError> {
    match args.kind.as_str() {
        "thgf" | "thgf-simple" => {
            let params = hgf_params(&args.params)?;
            let d = args.d.unwrap_or_else(|| params.d());
            let alpha = parse_rational(
                args.alpha.as_deref().ok_or(CliError::Usage("--alpha required".into()))?,
                field,
            )?;
            let kind = if args.kind == "thgf" {
                MotiveKind::Thgf { params, d, alpha }
            } else {
                MotiveKind::ThgfSimple { params, d, alpha }
            };
            Ok(motive::build_motive(field, kind)?)
        }
        "kmpl" => {
            let index =
                parse_index(args.s.as_deref().ok_or(CliError::Usage("--s required".into()))?)?;
            let points = parse_points(
                args.alpha.as_deref().ok_or(CliError::Usage("--alpha required".into()))?,
                field,
            )?;
            Ok(motive::build_motive(field, MotiveKind::Kmpl { index, points })?)
        }
        "p" => {
            let b = parse_int_list(
                args.params.b.as_deref().ok_or(CliError::Usage("--b required".into()))?,
            )?;
            let d = args.d.unwrap_or_else(|| b.iter().copied().max().unwrap_or(2));
            Ok(motive::build_motive(field, MotiveKind::PSystem { b, d })?)
        }
        other => Err(CliError::Usage(format!("unknown motive kind `{}`", other))),
    }
}

fn motive_json(m: &motive::MotiveSpec) -> serde_json::Value {
    let size = m.size();
    serde_json::json!({
        "kind": match &m.kind {
            MotiveKind::Thgf { .. } => "thgf",
            MotiveKind::ThgfSimple { .. } => "thgf-simple",
            MotiveKind::Kmpl { .. } => "kmpl",
            MotiveKind::PSystem { .. } => "p",
        },
        "size": size,
        "shift": {"offset": m.shift.offset, "description": m.shift.description},
        "phi": (0..size).map(|r| (0..size).map(|c| fr_to_json(m.phi.get(r, c))).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

/// Inputs supplied as a single JSON object (the only route that can carry an
/// explicit extension-basis presentation for the point-independence check).
fn theorem_inputs_from_json(
    field: &Rc<FieldSpec>,
    theorem: &str,
    text: &str,
) -> Result<TheoremInputs, CliError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad --params-json: {}", e)))?;
    let ints = |key: &str| -> Option<String> {
        v[key].as_array().map(|xs| {
            xs.iter().map(|x| x.as_i64().unwrap_or(0).to_string()).collect::<Vec<_>>().join(",")
        })
    };
    let strs = |key: &str| -> Option<String> {
        match &v[key] {
            serde_json::Value::Array(xs) => Some(
                xs.iter().map(|x| x.as_str().unwrap_or("0").to_string()).collect::<Vec<_>>().join(","),
            ),
            serde_json::Value::String(s) => Some(s.clone()),
            _ => None,
        }
    };
    let params = ParamArgs { a: ints("a"), b: ints("b") };
    let mut inputs = build_theorem_inputs(
        field,
        theorem,
        &params,
        &ints("s"),
        &strs("alpha"),
        &strs("beta"),
        v["weight"].as_u64(),
    )?;
    if let (TheoremInputs::T38 { presentation, .. }, Some(p)) = (&mut inputs, v.get("presentation"))
    {
        let dim = p["dim"].as_u64().ok_or(CliError::Usage("presentation needs dim".into()))? as usize;
        let mut vectors = vec![];
        for row in p["vectors"].as_array().ok_or(CliError::Usage("presentation needs vectors".into()))? {
            let mut vec_row = vec![];
            for entry in row.as_array().ok_or(CliError::Usage("vectors are arrays".into()))? {
                let lit = entry.as_str().ok_or(CliError::Usage("vector entries are literals".into()))?;
                vec_row.push(parse_rational(lit, field)?);
            }
            if vec_row.len() != dim {
                return Err(CliError::Usage("vector length must equal dim".into()));
            }
            vectors.push(vec_row);
        }
        *presentation = Some(criteria::PointsPresentation { dim, vectors });
    }
    Ok(inputs)
}

fn build_theorem_inputs(
    field: &Rc<FieldSpec>,
    theorem: &str,
    params: &ParamArgs,
    s: &Option<String>,
    alpha: &Option<String>,
    beta: &Option<String>,
    weight: Option<u64>,
) -> Result<TheoremInputs, CliError> {
    let alpha_points = |text: &Option<String>| -> Result<Vec<RationalScalar>, CliError> {
        let t = text.as_deref().ok_or(CliError::Usage("--alpha required".into()))?;
        t.split(',').map(|s| parse_rational(s.trim(), field).map_err(CliError::from)).collect()
    };
    match theorem {
        "3.4" => Ok(TheoremInputs::T34 {
            params: hgf_params(params)?,
            alpha: alpha_points(alpha)?
                .into_iter()
                .next()
                .ok_or(CliError::Usage("--alpha required".into()))?,
        }),
        "3.6" => {
            Ok(TheoremInputs::T36 { params: hgf_params(params)?, alphas: alpha_points(alpha)? })
        }
        "3.8" => Ok(TheoremInputs::T38 {
            params: hgf_params(params)?,
            alphas: alpha_points(alpha)?,
            presentation: None,
        }),
        "4.1" => Ok(TheoremInputs::T41 {
            weight: weight.ok_or(CliError::Usage("--weight required".into()))?,
            alpha: alpha_points(alpha)?
                .into_iter()
                .next()
                .ok_or(CliError::Usage("--alpha required".into()))?,
        }),
        "4.2" => {
            let idx =
                parse_index(s.as_deref().ok_or(CliError::Usage("--s s1,s2 required".into()))?)?;
            if idx.depth() != 2 {
                return Err(CliError::Usage("--s must have two parts".into()));
            }
            let pts = alpha_points(alpha)?;
            let [a1, a2, a3]: [RationalScalar; 3] =
                pts.try_into().map_err(|_| CliError::Usage("--alpha needs three points".into()))?;
            Ok(TheoremInputs::T42 { s1: idx.parts[0], s2: idx.parts[1], alphas: [a1, a2, a3] })
        }
        "4.3" => {
            let idx = parse_index(s.as_deref().ok_or(CliError::Usage("--s n required".into()))?)?;
            Ok(TheoremInputs::T43 {
                n: idx.parts[0],
                alpha: alpha_points(alpha)?
                    .into_iter()
                    .next()
                    .ok_or(CliError::Usage("--alpha required".into()))?,
                beta: parse_rational(
                    beta.as_deref().ok_or(CliError::Usage("--beta required".into()))?,
                    field,
                )?,
            })
        }
        "4.4" => {
            let index = parse_index(s.as_deref().ok_or(CliError::Usage("--s required".into()))?)?;
            let points = PointTuple::new(alpha_points(alpha)?);
            Ok(TheoremInputs::T44 { index, points })
        }
        "4.5" => {
            let index = parse_index(s.as_deref().ok_or(CliError::Usage("--s required".into()))?)?;
            let points = PointTuple::new(alpha_points(alpha)?);
            Ok(TheoremInputs::T45 {
                index,
                points,
                beta: parse_rational(
                    beta.as_deref().ok_or(CliError::Usage("--beta required".into()))?,
                    field,
                )?,
            })
        }
        other => Err(CliError::Usage(format!("unknown theorem tag `{}`", other))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((json, ok)) => {
            let text = if cli.pretty {
                serde_json::to_string_pretty(&json).expect("serializable")
            } else {
                serde_json::to_string(&json).expect("serializable")
            };
            println!("{}", text);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
        Err(CliError::ResourceCap(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(3)
        }
    }
}
