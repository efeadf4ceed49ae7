use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use isojac::catalog::{self, dickson, FamilyId, BUNDLED_FAMILIES};
use isojac::field::FieldElement;
use isojac::geometry;
use isojac::verify::{FamilyAnalysis, VerificationReport};

const SCHEMA: &str = "isojac-report/1";

#[derive(Parser)]
#[command(name = "isojac", version, about = "Explicit isogenies of Jacobians from correspondence factors")]
struct Cli {
    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report to PATH instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Genus g_n(d).
    Genus {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        n: u64,
    },
    /// Slice profile B, p(1..B).
    Profile {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        n: u64,
    },
    /// The block D(A)_{n-1} of the resolved factor.
    Block {
        #[arg(long)]
        family: String,
        /// Specialize t to this integer.
        #[arg(long, allow_negative_numbers = true)]
        t: Option<i64>,
    },
    /// Splitting certificate D(A)·D(τA) = m·I.
    Split {
        #[arg(long)]
        family: String,
    },
    /// Kernel structure of the isogeny for degree d.
    Kernel {
        #[arg(long)]
        family: String,
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        t: i64,
    },
    /// All checks for one family and degree.
    Verify {
        #[arg(long)]
        family: String,
        #[arg(long)]
        d: u64,
    },
    /// One table row per bundled family and degree 2..=d-max.
    Table {
        #[arg(long = "d-max")]
        d_max: u64,
    },
    /// Dickson factors A_{n,i} and their identities.
    Dickson {
        #[arg(long)]
        n: u32,
        /// Also check m_i(D(A_{n,i})) = 0.
        #[arg(long = "check-rm")]
        check_rm: bool,
    },
    /// Verify a family read from a data file.
    Load {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        d: u64,
    },
}

struct Outcome {
    command: &'static str,
    pass: bool,
    result: Value,
    human: String,
    /// Wall times, kept out of `result` so reports compare byte-for-byte.
    timing: Value,
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn parse_family(s: &str) -> Result<FamilyId> {
    Ok(s.parse::<FamilyId>()?)
}

fn analysis(family: &str) -> Result<FamilyAnalysis> {
    let id = parse_family(family)?;
    Ok(FamilyAnalysis::new(catalog::load_family(id, None)?))
}

fn ms(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn genus_cmd(d: u64, n: u64) -> Result<Outcome> {
    if d == 0 || n == 0 {
        bail!("d and n must be positive");
    }
    let g = geometry::genus(d, n);
    Ok(Outcome {
        command: "genus",
        pass: true,
        result: json!({"d": d, "n": n, "genus": g}),
        human: format!("{g}\n"),
        timing: Value::Null,
    })
}

fn profile_cmd(d: u64, n: u64) -> Result<Outcome> {
    let p = geometry::slice_profile(d, n)?;
    let human = format!(
        "d = {}, n = {}, genus = {}\nB = {}\np = {:?}\n",
        p.d, p.n, p.genus, p.b, p.p
    );
    Ok(Outcome {
        command: "profile",
        pass: true,
        result: serde_json::to_value(&p)?,
        human,
        timing: Value::Null,
    })
}

fn block_cmd(family: &str, t: Option<i64>) -> Result<Outcome> {
    let an = analysis(family)?;
    let res = an.resolution.as_ref().map_err(|e| anyhow!("{e}"))?;
    let field = an.spec.field.clone();
    let matrix = match t {
        Some(t) => {
            let c = FieldElement::from_int(&field, t);
            res.block.matrix.map(|p| p.specialize_t(&c))
        }
        None => res.block.matrix.clone(),
    };
    let names = field.names().join(", ");
    let human = format!(
        "family {}, n = {}, variant {}, field Q({names}), t = {}\n{}",
        an.spec.id,
        an.spec.n,
        res.variant,
        t.map_or("symbolic".to_string(), |t| t.to_string()),
        matrix
    );
    Ok(Outcome {
        command: "block",
        pass: true,
        result: json!({
            "family": an.spec.id.to_string(),
            "n": an.spec.n,
            "variant": res.variant,
            "field": {"generators": field.names(), "steps": serde_json::to_value(an.spec.to_file().field)?},
            "t": t,
            "size": matrix.size(),
            "matrix": matrix.to_json(),
        }),
        human: if human.ends_with('\n') { human } else { human + "\n" },
        timing: Value::Null,
    })
}

fn split_cmd(family: &str) -> Result<Outcome> {
    let an = analysis(family)?;
    let (m, variant) = match &an.resolution {
        Ok(r) => (r.m, Some(r.variant.clone())),
        Err(_) => (isojac::diffrep::check_split(&an.spec.a, an.spec.n)?, None),
    };
    let expected = an.spec.expected.m;
    let pass = an.resolution.is_ok() && (expected.is_none() || m == expected);
    let show = |v: Option<u64>| v.map_or("none".to_string(), |v| v.to_string());
    let mut human = format!("family {}, n = {}\n", an.spec.id, an.spec.n);
    if let Err(e) = &an.resolution {
        let _ = writeln!(human, "variant: FAIL {e}");
    } else if let Some(v) = &variant {
        let _ = writeln!(human, "variant: {v}");
    }
    let _ = writeln!(human, "m = {} (expected {})", show(m), show(expected));
    let _ = writeln!(human, "{}", verdict(pass));
    Ok(Outcome {
        command: "split",
        pass,
        result: json!({
            "family": an.spec.id.to_string(),
            "n": an.spec.n,
            "variant": variant,
            "m": m,
            "expected_m": expected,
        }),
        human,
        timing: Value::Null,
    })
}

fn kernel_cmd(family: &str, d: u64, t: i64) -> Result<Outcome> {
    let an = analysis(family)?;
    let profile = geometry::slice_profile(d, an.spec.n as u64)?;
    let kernel = an.kernel(d, t);
    let expected = an.spec.expected.kernel.as_ref().map(|tmpl| tmpl.evaluate(d)).transpose()?;
    let mut ks: Vec<usize> = profile.p.iter().map(|&k| k as usize).collect();
    ks.sort_unstable();
    ks.dedup();
    let slices: Vec<Value> = an
        .groups(t, &ks)
        .into_iter()
        .map(|(k, g)| match g {
            Ok(g) => json!({"k": k, "group": g}),
            Err(e) => json!({"k": k, "error": e.to_string()}),
        })
        .collect();
    let pass = match (&kernel, &expected) {
        (Ok(g), Some(e)) => g == e,
        (Ok(_), None) => true,
        (Err(_), _) => false,
    };
    let mut human = format!(
        "family {}, n = {}, d = {d}, t = {t}, genus = {}, p = {:?}\n",
        an.spec.id, an.spec.n, profile.genus, profile.p
    );
    for s in &slices {
        match s.get("group") {
            Some(g) => {
                let _ = writeln!(human, "G(A, {}) = {}", s["k"], g["structure"].as_str().unwrap_or_default());
            }
            None => {
                let _ = writeln!(human, "G(A, {}): {}", s["k"], s["error"].as_str().unwrap_or_default());
            }
        }
    }
    match &kernel {
        Ok(g) => {
            let _ = writeln!(human, "kernel: {g}");
        }
        Err(e) => {
            let _ = writeln!(human, "kernel: error: {e}");
        }
    }
    if let Some(e) = &expected {
        let _ = writeln!(human, "expected: {e}");
    }
    let _ = writeln!(human, "{}", verdict(pass));
    Ok(Outcome {
        command: "kernel",
        pass,
        result: json!({
            "family": an.spec.id.to_string(),
            "n": an.spec.n,
            "d": d,
            "t": t,
            "profile": profile,
            "slices": slices,
            "kernel": kernel.as_ref().ok(),
            "error": kernel.as_ref().err().map(|e| e.to_string()),
            "expected_kernel": expected,
        }),
        human,
        timing: Value::Null,
    })
}

fn render_report(r: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "family {}, n = {}, d = {}, t = {}", r.family, r.n, r.d, r.t);
    if let Some(v) = &r.variant {
        let _ = writeln!(s, "variant: {v}");
    }
    match &r.profile {
        Some(p) => {
            let _ = writeln!(s, "genus = {}, B = {}, p = {:?}", r.genus, p.b, p.p);
        }
        None => {
            let _ = writeln!(s, "genus = {}", r.genus);
        }
    }
    let show = |v: Option<u64>| v.map_or("none".to_string(), |v| v.to_string());
    let _ = writeln!(s, "m = {} (expected {})", show(r.m), show(r.expected_m));
    if let Some(k) = &r.kernel {
        let _ = writeln!(s, "kernel: {k}");
    }
    if let Some(k) = &r.expected_kernel {
        let _ = writeln!(
            s,
            "expected: {k}{}",
            r.kernel_template.as_ref().map_or(String::new(), |t| format!("  [{t}]"))
        );
    }
    for c in &r.checks {
        let _ = writeln!(s, "  {} {}: {}", verdict(c.pass), c.name, c.detail);
    }
    let _ = writeln!(s, "{}", verdict(r.pass));
    s
}

fn verify_outcome(command: &'static str, an: &FamilyAnalysis, d: u64) -> Result<Outcome> {
    let start = Instant::now();
    let report = an.verify(d, 1);
    Ok(Outcome {
        command,
        pass: report.pass,
        human: render_report(&report),
        result: serde_json::to_value(&report)?,
        timing: json!({"verify_ms": ms(start)}),
    })
}

fn table_cmd(d_max: u64) -> Result<Outcome> {
    if d_max < 2 {
        bail!("--d-max must be at least 2");
    }
    let analyses: Vec<(u32, FamilyAnalysis)> = BUNDLED_FAMILIES
        .par_iter()
        .map(|&n| Ok((n, FamilyAnalysis::new(catalog::load_family(FamilyId::Cnc(n), None)?))))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, u64)> = (0..analyses.len())
        .flat_map(|i| (2..=d_max).map(move |d| (i, d)))
        .collect();
    let mut rows: Vec<(u32, u64, VerificationReport, f64)> = jobs
        .par_iter()
        .map(|&(i, d)| {
            let start = Instant::now();
            let (n, an) = &analyses[i];
            (*n, d, an.verify(d, 1), ms(start))
        })
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let pass = rows.iter().all(|r| r.2.pass);
    let mut human = format!(
        "{:>3} {:>3} {:>6} {:>3} {:>3}  {:<32} {:<32} {}\n",
        "n", "d", "genus", "nu", "m", "kernel", "expected", "verdict"
    );
    let mut json_rows = Vec::new();
    for (n, d, r, _) in &rows {
        let an = &analyses.iter().find(|(m, _)| m == n).expect("family present").1;
        let nu = an.spec.expected.nu.map(|v| v.evaluate(*d));
        let kernel = r.kernel.as_ref().map_or("-".to_string(), |g| g.to_string());
        let expected = r.expected_kernel.as_ref().map_or("-".to_string(), |g| g.to_string());
        let _ = writeln!(
            human,
            "{:>3} {:>3} {:>6} {:>3} {:>3}  {:<32} {:<32} {}",
            n,
            d,
            r.genus,
            nu.map_or("-".to_string(), |v| v.to_string()),
            r.m.map_or("-".to_string(), |v| v.to_string()),
            kernel,
            expected,
            verdict(r.pass)
        );
        for c in r.checks.iter().filter(|c| !c.pass) {
            let _ = writeln!(human, "        FAIL {}: {}", c.name, c.detail);
        }
        json_rows.push(json!({
            "n": n,
            "d": d,
            "genus": r.genus,
            "nu": nu,
            "m": r.m,
            "e": r.e,
            "kernel": r.kernel,
            "expected_kernel": r.expected_kernel,
            "kernel_template": r.kernel_template,
            "s": an.spec.s_set,
            "variant": r.variant,
            "checks": r.checks,
            "pass": r.pass,
        }));
    }
    let _ = writeln!(human, "{}", verdict(pass));
    let timing: Vec<Value> = rows.iter().map(|(n, d, _, t)| json!({"n": n, "d": d, "ms": t})).collect();
    Ok(Outcome {
        command: "table",
        pass,
        result: json!({"d_max": d_max, "rows": json_rows}),
        human,
        timing: json!({"rows": timing}),
    })
}

fn dickson_cmd(n: u32, check_rm: bool) -> Result<Outcome> {
    if n < 3 || n % 2 == 0 {
        bail!("n must be odd and at least 3");
    }
    let field = catalog::cyclotomic::real_cyclotomic_field(n);
    let dn = dickson::dickson(n, &FieldElement::one(&field));
    let factors: Vec<String> = (1..=(n - 1) / 2)
        .map(|i| dickson::dickson_factor_in(&field, i).to_string())
        .collect();
    let product = dickson::product_identity_holds(n);
    let rm: Option<Vec<bool>> = if check_rm {
        Some(
            (1..=(n - 1) / 2)
                .into_par_iter()
                .map(|i| dickson::annihilated_by_minimal_polynomial(n, i))
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };
    let pass = product && rm.as_ref().is_none_or(|v| v.iter().all(|&b| b));
    let mut human = format!("D_{n}(x, 1) = {dn}\nfield: Q({})\n", field.names()[0]);
    for (i, f) in factors.iter().enumerate() {
        let _ = writeln!(human, "A_{{{n},{}}} = {f}", i + 1);
    }
    let _ = writeln!(human, "  {} product identity", verdict(product));
    if let Some(rm) = &rm {
        for (i, ok) in rm.iter().enumerate() {
            let _ = writeln!(human, "  {} m_{}(D(A_{{{n},{}}})) = 0", verdict(*ok), i + 1, i + 1);
        }
    }
    let _ = writeln!(human, "{}", verdict(pass));
    Ok(Outcome {
        command: "dickson",
        pass,
        result: json!({
            "n": n,
            "dickson": dn.to_string(),
            "field": field.names(),
            "factors": factors,
            "product_identity": product,
            "minimal_polynomial_annihilates": rm,
        }),
        human,
        timing: Value::Null,
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Genus { d, n } => genus_cmd(*d, *n),
        Command::Profile { d, n } => profile_cmd(*d, *n),
        Command::Block { family, t } => block_cmd(family, *t),
        Command::Split { family } => split_cmd(family),
        Command::Kernel { family, d, t } => kernel_cmd(family, *d, *t),
        Command::Verify { family, d } => verify_outcome("verify", &analysis(family)?, *d),
        Command::Table { d_max } => table_cmd(*d_max),
        Command::Dickson { n, check_rm } => dickson_cmd(*n, *check_rm),
        Command::Load { file, d } => {
            let spec = catalog::load_family_file(file)?;
            verify_outcome("load", &FamilyAnalysis::new(spec), *d)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let text = if cli.json {
        let mut timing = outcome.timing;
        if timing.is_null() {
            timing = json!({});
        }
        timing["total_ms"] = json!(ms(start));
        let report = json!({
            "schema": SCHEMA,
            "command": outcome.command,
            "pass": outcome.pass,
            "result": outcome.result,
            "timing": timing,
        });
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        outcome.human
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
