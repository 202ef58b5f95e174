//! `hkscan`: batch command surface over the claim registry, the exact and
//! modular kernels, and the sweep engine.
//!
//! Exit codes separate mathematical findings from defects:
//!
//! * 0: completed, every forced identity held
//! * 1: an under-test claim was violated (a finding)
//! * 2: a forced identity was violated or the modular and exact paths
//!   disagreed (an implementation bug)
//! * 3: usage or configuration error

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use hkscan_core::claims::{
    self, check_claim, reproduce_author_observation, ClaimKind, ClaimReport, KPolicy, Verdict,
};
use hkscan_core::report::{self, ReportDocument, ReportFormat};
use hkscan_core::scan::{self, GiugaCensus, ScanConfig, ScanTask};
use hkscan_core::{exact, modular, Budget, CheckOptions, Error};

fn claim_catalog() -> String {
    let mut s = String::from("Claims:\n");
    for c in claims::list_claims() {
        s.push_str(&format!(
            "  {:<22} [{}] {}\n{:24}source: {}\n",
            c.id, c.kind, c.statement, "", c.source
        ));
    }
    s.push_str(
        "\nExit codes: 0 clean; 1 under-test claim violated (finding); \
         2 forced identity violated (implementation bug); 3 usage/config error.\n\
         Environment: HKSCAN_COST_CEILING raises the cost ceilings \
         (an integer, or `unlimited`).",
    );
    s
}

#[derive(Parser)]
#[command(
    name = "hkscan",
    version,
    about = "Claim checker and counterexample scanner for the H_k family of primality congruences",
    after_help = claim_catalog(),
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one family function at a point
    Eval(EvalArgs),
    /// Check registered claims over a range and report violations
    Check(CheckArgs),
    /// Giuga census: classify every n < max by the literal congruence
    ScanGiuga(ScanGiugaArgs),
    /// Re-run the numerical observation behind the family conjecture
    Observe(ObserveArgs),
    /// Print the claim catalog
    ListClaims,
    /// Complete a checkpointed sweep or census from its checkpoint file
    Resume(ResumeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionName {
    /// Power sum S_k(n)
    #[value(name = "S", alias = "s")]
    S,
    /// Wilson value 1 + (n-1)!
    #[value(name = "fW", alias = "fw")]
    FW,
    /// Giuga value 1 + S_{n-1}(n)
    #[value(name = "fG", alias = "fg")]
    FG,
    /// Family member H_k(n)
    #[value(name = "H", alias = "h")]
    H,
    /// Step sum U_k(n)
    #[value(name = "U", alias = "u")]
    U,
    /// Signed pair sum V_k
    #[value(name = "V", alias = "v")]
    V,
}

#[derive(Args)]
struct EvalArgs {
    /// One of: S, fW, fG, H, U, V
    function: FunctionName,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    /// Exact arbitrary-precision value (the default path)
    #[arg(long, conflicts_with = "modular")]
    exact: bool,
    /// Residue mod n instead of the exact value
    #[arg(long = "mod")]
    modular: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Human-readable text
    Text,
    /// Versioned JSON document
    Json,
    /// One violation per row
    Csv,
}

#[derive(Args)]
struct CheckArgs {
    /// Comma-separated claim ids, or `all`
    #[arg(long, required = true, value_delimiter = ',')]
    claims: Vec<String>,
    #[arg(long, default_value_t = 200)]
    n_max: u64,
    /// Lower end of the range (defaults to 2, or 1 for k-only claims)
    #[arg(long)]
    n_min: Option<u64>,
    /// `all`, `k=1,2,3`, `near=2,3`, or `k=...+near=...`
    /// (default: all valid k up to the ceiling, fixed small k plus a
    /// near-n band beyond it)
    #[arg(long)]
    k_policy: Option<String>,
    /// Output file; with several claims, a directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Checkpoint file enabling interrupt-and-resume (single claim only)
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Lift the cost ceilings for this run (prints a warning)
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ScanGiugaArgs {
    /// Exclusive bound: classify every n < max (max >= 3)
    #[arg(long)]
    max: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    chunk_size: Option<u64>,
    /// Checkpoint file enabling interrupt-and-resume
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Lift the cost ceilings for this run (prints a warning)
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ObserveArgs {
    #[arg(long, default_value_t = 1000)]
    n_max: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Args)]
struct ResumeArgs {
    /// Checkpoint written by a previous sweep or census
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Lift the cost ceilings for this run (prints a warning)
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    // batch output is routinely piped into head/grep; die quietly on a
    // closed pipe instead of panicking
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::PathDisagreement { .. } => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Check(a) => cmd_check(a),
        Command::ScanGiuga(a) => cmd_scan_giuga(a),
        Command::Observe(a) => cmd_observe(a),
        Command::ListClaims => cmd_list_claims(),
        Command::Resume(a) => cmd_resume(a),
    }
}

fn budget_for(force: bool) -> Result<Budget, Error> {
    if force {
        eprintln!("warning: --force lifts the cost ceilings; this run may take a very long time");
        Ok(Budget::unlimited())
    } else {
        Budget::from_env()
    }
}

fn need(x: Option<u64>, name: &str, function: &str) -> Result<u64, Error> {
    x.ok_or_else(|| Error::Config(format!("eval {function}: --{name} is required")))
}

fn reject(x: Option<u64>, name: &str, function: &str) -> Result<(), Error> {
    if x.is_some() {
        return Err(Error::Config(format!(
            "eval {function}: --{name} is not a parameter of this function"
        )));
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<u8, Error> {
    let modular_path = a.modular;
    match a.function {
        FunctionName::S => {
            let n = need(a.n, "n", "S")?;
            let k = need(a.k, "k", "S")?;
            if modular_path {
                println!("{}", modular::power_sum_mod(k, n)?);
            } else {
                println!("{}", exact::power_sum(k, n));
            }
        }
        FunctionName::FW => {
            let n = need(a.n, "n", "fW")?;
            reject(a.k, "k", "fW")?;
            if modular_path {
                println!("{}", modular::wilson_residue(n)?);
            } else {
                println!("{}", exact::f_wilson(n)?);
            }
        }
        FunctionName::FG => {
            let n = need(a.n, "n", "fG")?;
            reject(a.k, "k", "fG")?;
            if modular_path {
                println!("{}", modular::giuga_residue(n)?);
            } else {
                println!("{}", exact::f_giuga(n)?);
            }
        }
        FunctionName::H => {
            let n = need(a.n, "n", "H")?;
            let k = need(a.k, "k", "H")?;
            if modular_path {
                println!("{}", modular::h_mod(k, n)?);
            } else {
                println!("{}", exact::h(k, n));
            }
        }
        FunctionName::U => {
            let n = need(a.n, "n", "U")?;
            let k = need(a.k, "k", "U")?;
            if modular_path {
                println!("{}", modular::u_mod(k, n)?);
            } else {
                println!("{}", exact::u(k, n));
            }
        }
        FunctionName::V => {
            let k = need(a.k, "k", "V")?;
            reject(a.n, "n", "V")?;
            if modular_path {
                return Err(Error::Config(
                    "eval V: no modular path; V_k is a global integer identity".into(),
                ));
            }
            println!("{}", exact::v(k));
        }
    }
    Ok(0)
}

fn parse_k_policy(s: &str) -> Result<KPolicy, Error> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("all") || s.eq_ignore_ascii_case("all-valid-k") {
        return Ok(KPolicy::AllValid);
    }
    let mut ks: Vec<u64> = Vec::new();
    let mut offsets: Vec<u64> = Vec::new();
    for part in s.split('+') {
        let bad = || {
            Error::Config(format!(
                "cannot parse k policy `{s}`; expected `all`, `k=1,2`, `near=2,3`, or `k=...+near=...`"
            ))
        };
        let (key, list) = part.split_once('=').ok_or_else(bad)?;
        let values: Vec<u64> = list
            .split(',')
            .map(|v| v.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match key.trim() {
            "k" => ks.extend(values),
            "near" => offsets.extend(values),
            _ => return Err(bad()),
        }
    }
    Ok(match (ks.is_empty(), offsets.is_empty()) {
        (false, true) => KPolicy::Fixed { ks },
        (true, false) => KPolicy::NearN { offsets },
        (false, false) => KPolicy::FixedAndNear { ks, offsets },
        (true, true) => return Err(Error::Config(format!("k policy `{s}` selects nothing"))),
    })
}

fn render_report(r: &ClaimReport) -> String {
    let desc = claims::find_claim(&r.claim).expect("report references a registered claim");
    let mut s = String::new();
    s.push_str(&format!("claim {} [{}]\n", r.claim, r.kind));
    s.push_str(&format!("  statement: {}\n", desc.statement));
    s.push_str(&format!(
        "  range: n in [{}, {}], policy: {}\n",
        r.n_lo, r.n_hi, r.k_policy
    ));
    s.push_str(&format!(
        "  pairs checked: {}, skipped: {}, wall time: {} ms\n",
        r.pairs_checked, r.pairs_skipped, r.wall_time_ms
    ));
    s.push_str(&format!("  verdict: {}\n", r.verdict));
    if r.total_violations > 0 {
        s.push_str(&format!(
            "  violations: {} total, showing {}:\n",
            r.total_violations,
            r.violations.len()
        ));
        for v in &r.violations {
            s.push_str(&format!("    {v}\n"));
        }
    }
    s
}

fn write_doc(doc: &ReportDocument, path: &Path, format: OutputFormat) -> Result<(), Error> {
    match format {
        OutputFormat::Json => report::write_report(doc, path, ReportFormat::StructuredJson),
        OutputFormat::Csv => report::write_report(doc, path, ReportFormat::CsvViolations),
        OutputFormat::Text => {
            let text = match &doc.payload {
                report::Payload::ClaimReport(r) => render_report(r),
                report::Payload::Census(c) => render_census(c),
            };
            std::fs::write(path, text)?;
            Ok(())
        }
    }
}

fn print_machine(doc: &ReportDocument, format: OutputFormat) {
    match format {
        OutputFormat::Json => print!("{}", report::to_json_string(doc)),
        OutputFormat::Csv => print!("{}", report::to_csv_string(doc)),
        OutputFormat::Text => unreachable!("text goes through the renderers"),
    }
}

fn status_for(report: &ClaimReport) -> u8 {
    if report.verdict == Verdict::Violated {
        match report.kind {
            ClaimKind::ForcedIdentity => 2,
            ClaimKind::UnderTest => 1,
        }
    } else {
        0
    }
}

fn cmd_check(a: CheckArgs) -> Result<u8, Error> {
    let budget = budget_for(a.force)?;
    let opts = CheckOptions {
        budget,
        ..CheckOptions::default()
    };

    let ids: Vec<&str> = if a.claims.len() == 1 && a.claims[0].eq_ignore_ascii_case("all") {
        claims::list_claims().iter().map(|c| c.id).collect()
    } else {
        let mut ids = Vec::new();
        for id in &a.claims {
            ids.push(claims::find_claim(id)?.id);
        }
        ids
    };

    let policy_flag = a.k_policy.as_deref().map(parse_k_policy).transpose()?;
    let multi = ids.len() > 1;
    if let (Some(dir), true) = (&a.out, multi) {
        std::fs::create_dir_all(dir)?;
    }
    if a.checkpoint.is_some() && multi {
        return Err(Error::Config(
            "--checkpoint applies to a single claim; run one claim per checkpoint".into(),
        ));
    }

    let mut worst = 0u8;
    for id in ids {
        let desc = claims::find_claim(id)?;
        let n_min = a.n_min.unwrap_or(match desc.domain {
            claims::ClaimDomain::PerK { .. } => 1,
            _ => 2,
        });
        // the k policy only matters for (n, k) claims
        let policy = if matches!(desc.domain, claims::ClaimDomain::PerNk) {
            policy_flag
                .clone()
                .unwrap_or_else(|| KPolicy::default_for(a.n_max, &budget))
        } else {
            KPolicy::AllValid
        };
        let r = if let Some(ckpt) = &a.checkpoint {
            let mut cfg = ScanConfig::new(
                ScanTask::Claim {
                    id: id.to_string(),
                    k_policy: policy.clone(),
                },
                n_min,
                a.n_max,
            );
            cfg.checkpoint_path = Some(ckpt.clone());
            scan::sweep(&cfg, &opts)?
        } else {
            check_claim(id, n_min, a.n_max, &policy, &opts)?
        };
        let status = status_for(&r);
        let doc = ReportDocument::for_claim_report(r.clone());

        if a.format == OutputFormat::Text || a.out.is_some() {
            print!("{}", render_report(&r));
        }
        if a.format != OutputFormat::Text && a.out.is_none() {
            print_machine(&doc, a.format);
        }
        if let Some(out) = &a.out {
            let ext = match a.format {
                OutputFormat::Text => "txt",
                OutputFormat::Json => "json",
                OutputFormat::Csv => "csv",
            };
            let path = if multi {
                out.join(format!("{id}.{ext}"))
            } else {
                out.clone()
            };
            write_doc(&doc, &path, a.format)?;
        }

        if status == 2 {
            eprintln!("implementation-bug: forced identity `{id}` was violated; aborting the run");
            return Ok(2);
        }
        worst = worst.max(status);
    }
    Ok(worst)
}

fn render_census(c: &GiugaCensus) -> String {
    let mut s = String::new();
    s.push_str(&format!("Giuga census below x = {}\n", c.x));
    s.push_str(&format!("  prime satisfiers: {}\n", c.prime_satisfiers));
    s.push_str(&format!("  composite satisfiers G(x): {}\n", c.g));
    if c.composite_satisfiers.is_empty() {
        s.push_str("  no counterexample to Giuga's conjecture in range\n");
    } else {
        s.push_str(&format!(
            "  counterexamples (findings of the first rank): {:?}\n",
            c.composite_satisfiers
        ));
    }
    s
}

fn cmd_scan_giuga(a: ScanGiugaArgs) -> Result<u8, Error> {
    if a.max < 3 {
        return Err(Error::Config(format!(
            "scan-giuga needs --max >= 3, got {}",
            a.max
        )));
    }
    let budget = budget_for(a.force)?;
    let opts = CheckOptions {
        budget,
        ..CheckOptions::default()
    };
    let mut cfg = ScanConfig::new(ScanTask::GiugaCensus, 2, a.max - 1);
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    if let Some(c) = a.chunk_size {
        cfg.chunk_size = c;
    }
    cfg.checkpoint_path = a.checkpoint.clone();
    cfg.output_path = a.out.clone();

    let started = Instant::now();
    let census = scan::census_sweep(&cfg, &opts)?;
    let doc = ReportDocument::for_census(census.clone(), started.elapsed().as_millis() as u64);
    emit_census(&census, &doc, a.format, a.out.as_deref())?;
    Ok(if census.g == 0 { 0 } else { 1 })
}

fn emit_census(
    census: &GiugaCensus,
    doc: &ReportDocument,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), Error> {
    if format == OutputFormat::Text || out.is_some() {
        print!("{}", render_census(census));
    }
    if format != OutputFormat::Text && out.is_none() {
        print_machine(doc, format);
    }
    if let Some(path) = out {
        write_doc(doc, path, format)?;
    }
    Ok(())
}

fn cmd_observe(a: ObserveArgs) -> Result<u8, Error> {
    let opts = CheckOptions::default();
    let r = reproduce_author_observation(a.n_max, &opts)?;
    let status = status_for(&r);
    let doc = ReportDocument::for_claim_report(r.clone());

    println!("family characterization, observed range: n <= {}", a.n_max);
    println!("  k in {{2,3,4,5}} and k in {{n-5,...,n-2}}");
    print!("{}", render_report(&r));
    if a.format != OutputFormat::Text && a.out.is_none() {
        print_machine(&doc, a.format);
    }
    if let Some(out) = &a.out {
        write_doc(&doc, out, a.format)?;
    }
    Ok(status)
}

fn cmd_list_claims() -> Result<u8, Error> {
    for c in claims::list_claims() {
        println!("{:<22} [{}] {}", c.id, c.kind, c.statement);
        println!("{:24}source: {}", "", c.source);
        println!("{:24}note: {}", "", c.note);
    }
    Ok(0)
}

fn cmd_resume(a: ResumeArgs) -> Result<u8, Error> {
    let info = scan::read_checkpoint_info(&a.checkpoint)?;
    let budget = budget_for(a.force)?;
    let opts = CheckOptions {
        budget,
        ..CheckOptions::default()
    };
    let mut cfg = ScanConfig::new(info.task.clone(), info.n_lo, info.n_hi);
    cfg.chunk_size = info.chunk_size;
    cfg.checkpoint_path = Some(a.checkpoint.clone());
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    eprintln!(
        "resuming: {} chunks already complete",
        info.completed_chunks.len()
    );
    match &info.task {
        ScanTask::Claim { .. } => {
            let r = scan::resume(&cfg, &opts)?;
            let status = status_for(&r);
            let doc = ReportDocument::for_claim_report(r.clone());
            if a.format == OutputFormat::Text || a.out.is_some() {
                print!("{}", render_report(&r));
            }
            if a.format != OutputFormat::Text && a.out.is_none() {
                print_machine(&doc, a.format);
            }
            if let Some(out) = &a.out {
                write_doc(&doc, out, a.format)?;
            }
            if status == 2 {
                eprintln!(
                    "implementation-bug: forced identity `{}` was violated",
                    r.claim
                );
            }
            Ok(status)
        }
        ScanTask::GiugaCensus => {
            let started = Instant::now();
            let census = scan::resume_census(&cfg, &opts)?;
            let doc =
                ReportDocument::for_census(census.clone(), started.elapsed().as_millis() as u64);
            emit_census(&census, &doc, a.format, a.out.as_deref())?;
            Ok(if census.g == 0 { 0 } else { 1 })
        }
    }
}
