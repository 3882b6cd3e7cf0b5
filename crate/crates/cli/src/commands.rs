use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bellcone::detvectors::det_vector;
use bellcone::exact::rationalize;
use bellcone::farkas::{enumerate_ch, enumerate_ch_deduped, validate};
use bellcone::formats::{
    det_enum_line, parse_inequalities, parse_model, parse_pvec, parse_state, scenario_hash, write_inequality,
    write_pvec_f64, write_weights,
};
use bellcone::nullspace::no_signaling_defect;
use bellcone::polytope::{decide_membership, enumerate_facets, ingest_probabilities};
use bellcone::quantum::{born_probabilities, ghz_postselect, ppt_test, PptVerdict};
use bellcone::{
    parse_scenario, FaceContext, FacetOptions, IngestOptions, MembershipResult, Rational, RawValue, Scenario, Shard,
    SizeGuard,
};
use num_traits::{Signed, Zero};

use crate::{Cli, Command, DetCmd, FarkasCmd, IngestArgs, QuantumCmd, ScenarioCmd};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

/// Machine-readable payload and exit code.
struct Outcome {
    body: String,
    code: u8,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self { body, code: 0 }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    Ok(parse_scenario(&read(path)?)?)
}

fn ingest_options(a: IngestArgs) -> IngestOptions {
    IngestOptions {
        tolerance: a.tolerance,
        strict: a.strict,
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    let guard = SizeGuard::with_limit(cli.max_assignments);
    let out = match &cli.command {
        Command::Scenario(ScenarioCmd::Info { scenario }) => scenario_info(&load_scenario(scenario)?),
        Command::Det(DetCmd::Enum { scenario }) => det_enum(&load_scenario(scenario)?, guard)?,
        Command::Nosignal { scenario, pvec, ingest } => {
            let s = load_scenario(scenario)?;
            let text = read(pvec)?;
            nosignal(&s, &text, ingest.tolerance)?
        }
        Command::Farkas(FarkasCmd::ChEnum {
            scenario,
            dedupe,
            limit,
        }) => ch_enum(&load_scenario(scenario)?, *dedupe, *limit)?,
        Command::Farkas(FarkasCmd::Validate { scenario, inequalities }) => {
            let s = load_scenario(scenario)?;
            let text = read(inequalities)?;
            farkas_validate(&s, &text, guard)?
        }
        Command::Facets {
            scenario,
            shard,
            budget,
        } => {
            let shard = shard.map(|(i, n)| Shard::new(i, n)).transpose()?;
            facets(
                &load_scenario(scenario)?,
                guard,
                FacetOptions { budget: *budget, shard },
            )?
        }
        Command::Check { scenario, pvec, ingest } => {
            let s = load_scenario(scenario)?;
            let text = read(pvec)?;
            check(&s, &text, ingest_options(*ingest), guard)?
        }
        Command::Quantum(QuantumCmd::Eval { scenario, state, model }) => {
            let s = load_scenario(scenario)?;
            let (st, m) = (read(state)?, read(model)?);
            let p = born_probabilities(&parse_state(&st)?, &parse_model(&m)?, &s)?;
            Outcome::ok(write_pvec_f64(&s, &p))
        }
        Command::Quantum(QuantumCmd::Ppt { state }) => ppt(&read(state)?)?,
        Command::Quantum(QuantumCmd::GhzDemo) => ghz_demo()?,
    };
    match &cli.output {
        Some(path) => fs::write(path, &out.body).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{}", out.body),
    }
    Ok(out.code)
}

fn scenario_info(s: &Scenario) -> Outcome {
    Outcome::ok(format!("{}\nhash {}\n", s.counts(), scenario_hash(s)))
}

fn det_enum(s: &Scenario, guard: SizeGuard) -> Result<Outcome> {
    guard.check(s)?;
    let mut body = String::new();
    for a in s.assignments() {
        body.push_str(&det_enum_line(&det_vector(s, &a)?));
        body.push('\n');
    }
    Ok(Outcome::ok(body))
}

/// Floats are rationalized within `tolerance`, and their residuals vanish
/// when no larger than it; exact inputs must vanish exactly.
fn nosignal(s: &Scenario, text: &str, tolerance: f64) -> Result<Outcome> {
    let raw = parse_pvec(s, text)?;
    let any_float = raw.iter().any(|v| matches!(v, RawValue::Float(_)));
    let p = raw
        .iter()
        .map(|v| match v {
            RawValue::Exact(q) => Ok(q.clone()),
            RawValue::Float(x) => rationalize(*x, tolerance),
        })
        .collect::<bellcone::Result<Vec<Rational>>>()?;
    let limit = if any_float {
        rationalize(tolerance, tolerance * 1e-3)?
    } else {
        Rational::zero()
    };
    let mut body = String::new();
    let mut offending = 0;
    for r in no_signaling_defect(s, &p)? {
        if r.residual.abs() <= limit {
            continue;
        }
        offending += 1;
        let z = &r.null;
        let obs = &s.observers()[z.varying_observer].name;
        let fixed: Vec<String> = z
            .fixed
            .iter()
            .map(|(o, so)| format!("{}:{}.{}", s.observers()[*o].name, so.setting, so.outcome))
            .collect();
        let _ = writeln!(
            body,
            "signal {obs} {} {} {} {} {} {}",
            z.from_setting,
            z.to_setting,
            fixed.join(","),
            r.from_sum,
            r.to_sum,
            r.residual
        );
    }
    eprintln!("{offending} nonvanishing residuals");
    Ok(Outcome {
        body,
        code: u8::from(offending > 0),
    })
}

fn ch_enum(s: &Scenario, dedupe: bool, limit: Option<usize>) -> Result<Outcome> {
    let mut body = String::new();
    let mut n = 0usize;
    if dedupe {
        for f in enumerate_ch_deduped(s, limit)? {
            body.push_str(&write_inequality(s, &f));
            n += 1;
        }
    } else {
        for f in enumerate_ch(s, limit) {
            body.push_str(&write_inequality(s, &f?));
            n += 1;
        }
    }
    eprintln!("{n} CH vectors");
    Ok(Outcome::ok(body))
}

fn farkas_validate(s: &Scenario, text: &str, guard: SizeGuard) -> Result<Outcome> {
    let mut body = String::new();
    let mut bad = 0;
    for (i, rec) in parse_inequalities(s, text)?.into_iter().enumerate() {
        let f = validate(s, &rec.components, guard)?;
        if (f.m(), f.n()) != (rec.m, rec.n) {
            bad += 1;
            eprintln!(
                "record {i}: claimed m={} n={}, actual m={} n={}",
                rec.m,
                rec.n,
                f.m(),
                f.n()
            );
        } else if !f.is_valid() {
            bad += 1;
            eprintln!("record {i}: not a Farkas vector (m={})", f.m());
        }
        body.push_str(&write_inequality(s, &f));
    }
    Ok(Outcome {
        body,
        code: u8::from(bad > 0),
    })
}

fn facets(s: &Scenario, guard: SizeGuard, opts: FacetOptions) -> Result<Outcome> {
    let ctx = FaceContext::new(s, guard)?;
    let fe = enumerate_facets(&ctx, opts)?;
    let mut body = String::from("# trivial\n");
    for f in &fe.trivial {
        body.push_str(&write_inequality(s, f));
    }
    body.push_str("# nontrivial\n");
    for f in &fe.nontrivial {
        body.push_str(&write_inequality(s, f));
    }
    eprintln!(
        "{} subsets examined, {} faces, {} degenerate; {} trivial and {} nontrivial classes",
        fe.subsets_examined,
        fe.faces,
        fe.degenerate,
        fe.trivial.len(),
        fe.nontrivial.len()
    );
    Ok(Outcome::ok(body))
}

fn check(s: &Scenario, text: &str, opts: IngestOptions, guard: SizeGuard) -> Result<Outcome> {
    let p = ingest_probabilities(s, &parse_pvec(s, text)?, opts)?;
    if p.repaired {
        eprintln!(
            "repaired normalization/no-signaling defects within tolerance {}",
            opts.tolerance
        );
    }
    Ok(match decide_membership(s, &p, guard)? {
        MembershipResult::Inside { weights } => {
            eprintln!("inside");
            Outcome::ok(format!("INSIDE\n{}", write_weights(s, &weights)))
        }
        MembershipResult::Outside {
            certificate,
            violation,
            source,
        } => {
            eprintln!("outside: F·P = {violation} ({source:?})");
            Outcome {
                body: format!("OUTSIDE\n{}", write_inequality(s, &certificate)),
                code: 1,
            }
        }
    })
}

fn ppt(text: &str) -> Result<Outcome> {
    let rep = ppt_test(&parse_state(text)?)?;
    let mut body = String::new();
    for (cut, min) in &rep.cuts {
        let names: Vec<String> = cut.iter().map(usize::to_string).collect();
        let _ = writeln!(body, "cut {} {min:e}", names.join(","));
    }
    let npt = rep.verdict == PptVerdict::Npt;
    let _ = writeln!(body, "{} {:e}", if npt { "NPT" } else { "PPT" }, rep.min_eigenvalue);
    Ok(Outcome {
        body,
        code: u8::from(npt),
    })
}

fn ghz_demo() -> Result<Outcome> {
    let r = ghz_postselect()?;
    Ok(Outcome::ok(format!(
        "success_probability {}\nfidelity {}\nconcurrence {}\nx_test_concurrence {}\nch_value {}\n",
        r.success_probability, r.fidelity, r.concurrence, r.x_test_concurrence, r.ch_value
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s222() -> Scenario {
        Scenario::uniform(2, 2, 2).unwrap()
    }

    #[test]
    fn nosignal_flags_exact_signaling_but_tolerates_float_noise() {
        let s = s222();
        let h = scenario_hash(&s);
        let uniform = format!("pvec {h}\n{}", "1/4\n".repeat(16));
        assert_eq!(nosignal(&s, &uniform, 1e-9).unwrap().code, 0);
        let noisy = format!("pvec {h}\n0.2500000000001\n{}", "0.25\n".repeat(15));
        assert_eq!(nosignal(&s, &noisy, 1e-9).unwrap().code, 0);
        let mut lines: Vec<String> = vec!["1/4".into(); 16];
        lines[0] = "1/2".into();
        lines[1] = "0".into();
        let signaling = format!("pvec {h}\n{}\n", lines.join("\n"));
        let out = nosignal(&s, &signaling, 1e-9).unwrap();
        assert_eq!(out.code, 1);
        assert!(out.body.lines().all(|l| l.starts_with("signal ")));
    }

    #[test]
    fn validate_reports_wrong_claims() {
        let s = s222();
        let h = scenario_hash(&s);
        let ok = format!("farkas {h} m=0 n=1\n-1 0 1 0 0 0 0 0 1 0 0 0 0 0 0 1\n");
        assert_eq!(farkas_validate(&s, &ok, SizeGuard::default()).unwrap().code, 0);
        let wrong = ok.replace("n=1", "n=2");
        let out = farkas_validate(&s, &wrong, SizeGuard::default()).unwrap();
        assert_eq!(out.code, 1);
        assert_eq!(out.body, ok);
    }
}
