mod cache;
mod generators;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dpbrauer::bounds::{brauer_uniform_bound, summarize, BoundConfig};
use dpbrauer::brauer_table::{
    analyse_action, analyse_classes, check_tier, compare_with_fixture, lemma_report_from_analyses,
    table_from_analyses, verify_lemma_on_samples, verify_prop_bounds, BrauerTable, FixtureComparison,
    LemmaReport,
};
use dpbrauer::lattice::{build_picard_lattice, DegreeSpec, DivisorClass};
use dpbrauer::subgroups::{enumerate_subgroup_classes, SubgroupClass, Tier};
use dpbrauer::weyl::{generate_group, weyl_group, DEFAULT_BUDGET};
use dpbrauer::Error;
use num_bigint::BigUint;
use serde::Serialize;

use cache::{Cache, ContentKey, PayloadKind, CACHE_DIR_ENV};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TierArg {
    Exhaustive,
    Extended,
    Stretch,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Tier {
        match t {
            TierArg::Exhaustive => Tier::Exhaustive,
            TierArg::Extended => Tier::Extended,
            TierArg::Stretch => Tier::Stretch,
        }
    }
}

/// Weyl group actions on del Pezzo Picard lattices and the algebraic Brauer
/// groups they produce.
#[derive(Parser, Debug)]
#[command(name = "dpbrauer", version)]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Cache directory.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Possible pairs (Br X / Br k, Br_1 U / Br k) over all Galois actions.
    Table {
        #[arg(long)]
        degree: DegreeSpec,
        /// Enumeration tier; degree 3 needs `extended`, degree 2 `stretch`.
        #[arg(long, value_enum)]
        tier: Option<TierArg>,
    },
    /// The exceptional curves of the surface.
    Lines {
        #[arg(long)]
        degree: DegreeSpec,
    },
    /// The roots of the lattice orthogonal to K.
    Roots {
        #[arg(long)]
        degree: DegreeSpec,
    },
    /// H^1 of Pic X and Pic U for the subgroup generated by `--subgroup`.
    H1 {
        #[arg(long)]
        degree: DegreeSpec,
        /// Generators separated by `;`, each a product of `sN`, `r(..)`, `m(..)`.
        #[arg(long, allow_hyphen_values = true)]
        subgroup: String,
        /// Maximum order of the generated subgroup.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
    },
    /// Injectivity of H^1(Pic X) -> H^1(Pic U) and the exponent of its cokernel.
    VerifyLemma {
        #[arg(long)]
        degree: DegreeSpec,
        #[arg(long, value_enum)]
        tier: Option<TierArg>,
        /// Random subgroups to test (degrees 1 and 2).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest order of a sampled subgroup.
        #[arg(long, default_value_t = 5000)]
        order_cap: usize,
    },
    /// Compare computed tables with the published ones and check the order bounds.
    VerifyPaper {
        /// Also enumerate degree 2.
        #[arg(long)]
        stretch: bool,
    },
    /// Effective torsion and Brauer group bounds.
    Bound {
        #[arg(short = 'm', long = "m")]
        m: u64,
        /// Bound on 2-power torsion orders.
        #[arg(long)]
        parent_p2: Option<BigUint>,
        /// Bound on 3-power torsion orders.
        #[arg(long)]
        parent_p3: Option<BigUint>,
        /// Only multiply over these primes (comma separated).
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
    },
    /// Inspect or empty the result cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand, Debug)]
enum CacheAction {
    Ls,
    Clear,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_REFUSED: u8 = 3;

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::TierExceeded { .. } => (EXIT_REFUSED, "tier_exceeded"),
            Error::BudgetExceeded { .. } | Error::OrbitTooLarge(_) => (EXIT_REFUSED, "budget_exceeded"),
            Error::UnsupportedDegree(_) => (EXIT_USAGE, "unsupported_degree"),
            Error::Parse(_) | Error::InvalidArgument(_) | Error::NotARoot { .. } | Error::NotAnIsometry => {
                (EXIT_USAGE, "invalid_argument")
            }
            Error::SamplingExhausted { .. } => (EXIT_REFUSED, "sampling_exhausted"),
            _ => (EXIT_MISMATCH, "internal"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_MISMATCH,
            kind: "io",
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        kind: "usage",
        message: message.into(),
    }
}

/// Output of a successful command, and whether its checks passed.
struct Outcome {
    stdout: String,
    passed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, passed: true }
    }
}

struct Context {
    cache: Option<Cache>,
    format: Format,
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// The smallest of exhaustive/extended that admits `degree`; stretch must be
/// asked for.
fn resolve_tier(degree: DegreeSpec, tier: Option<TierArg>) -> Tier {
    match tier {
        Some(t) => t.into(),
        None if check_tier(degree, Tier::Exhaustive).is_ok() => Tier::Exhaustive,
        None => Tier::Extended,
    }
}

impl Context {
    fn cached<T, F>(&self, key: ContentKey, compute: F) -> Result<T, Failure>
    where
        T: Serialize + serde::de::DeserializeOwned,
        F: FnOnce() -> Result<T, Failure>,
    {
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.load(&key)) {
            return Ok(hit);
        }
        let value = compute()?;
        if let Some(c) = &self.cache {
            if let Err(e) = c.store(&key, &value) {
                eprintln!("warning: could not write cache entry: {e}");
            }
        }
        Ok(value)
    }

    fn table_and_lemma(&self, degree: DegreeSpec, tier: Tier) -> Result<(BrauerTable, LemmaReport), Failure> {
        check_tier(degree, tier)?;
        let table_key = ContentKey::new(PayloadKind::Table, degree, tier);
        let lemma_key = ContentKey::new(PayloadKind::LemmaReport, degree, tier);
        if let Some(c) = &self.cache {
            if let (Some(t), Some(l)) = (c.load(&table_key), c.load(&lemma_key)) {
                return Ok((t, l));
            }
        }
        let group = weyl_group(&build_picard_lattice(degree), DEFAULT_BUDGET)?;
        let classes: Vec<SubgroupClass> =
            self.cached(ContentKey::new(PayloadKind::SubgroupClasses, degree, tier), || {
                Ok(enumerate_subgroup_classes(&group, tier)?)
            })?;
        let analyses = analyse_classes(&group, &classes)?;
        let table = table_from_analyses(degree, &classes, &analyses)?;
        let lemma = lemma_report_from_analyses(degree, tier, &classes, &analyses);
        if let Some(c) = &self.cache {
            for r in [c.store(&table_key, &table), c.store(&lemma_key, &lemma)] {
                if let Err(e) = r {
                    eprintln!("warning: could not write cache entry: {e}");
                }
            }
        }
        Ok((table, lemma))
    }
}

fn classes_output(format: Format, degree: DegreeSpec, what: &str, classes: &[DivisorClass]) -> String {
    match format {
        Format::Json => to_json(&serde_json::json!({
            "degree": degree,
            "count": classes.len(),
            what: classes,
        })),
        Format::Csv => {
            let mut s = String::new();
            for c in classes {
                let coords: Vec<String> = c.coords().iter().map(ToString::to_string).collect();
                let _ = writeln!(s, "{}", coords.join(","));
            }
            s
        }
        Format::Text => {
            let mut s = format!("{} {what} on the degree {degree} surface\n", classes.len());
            for c in classes {
                let _ = writeln!(s, "{c}");
            }
            s
        }
    }
}

#[derive(Serialize)]
struct H1Output {
    degree: DegreeSpec,
    order: usize,
    brx: dpbrauer::zcohomology::AbelianGroupStructure,
    bru: dpbrauer::zcohomology::AbelianGroupStructure,
    cokernel: dpbrauer::zcohomology::AbelianGroupStructure,
    injective: bool,
    delta: u64,
}

fn lemma_summary(report: &LemmaReport) -> String {
    let failures = report.failures();
    let mut s = format!(
        "degree {}: {} subgroups, {}\n",
        report.degree,
        report.records.len(),
        if failures.is_empty() { "all checks hold" } else { "FAILURES" }
    );
    for f in failures {
        let _ = writeln!(
            s,
            "  order {} generators {:?}: injective {} coker exponent {} delta {}",
            f.subgroup.order, f.subgroup.generators, f.injective, f.coker_exponent, f.delta
        );
    }
    s
}

#[derive(Serialize)]
struct PaperDegree {
    degree: DegreeSpec,
    comparison: FixtureComparison,
    lemma_holds: Option<bool>,
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let ctx = Context {
        cache: (!cli.no_cache).then(|| Cache::new(cli.cache_dir.clone().unwrap_or_else(Cache::default_dir))),
        format: cli.format,
    };
    match cli.command {
        Command::Table { degree, tier } => {
            let tier = resolve_tier(degree, tier);
            let (table, _) = ctx.table_and_lemma(degree, tier)?;
            Ok(Outcome::ok(match ctx.format {
                Format::Text => table.to_text(),
                Format::Json => table.to_json() + "\n",
                Format::Csv => table.to_csv(),
            }))
        }
        Command::Lines { degree } => {
            let lines = build_picard_lattice(degree).lines();
            Ok(Outcome::ok(classes_output(ctx.format, degree, "lines", &lines)))
        }
        Command::Roots { degree } => {
            let roots = build_picard_lattice(degree).roots();
            Ok(Outcome::ok(classes_output(ctx.format, degree, "roots", &roots)))
        }
        Command::H1 {
            degree,
            subgroup,
            budget,
        } => {
            let lattice = build_picard_lattice(degree);
            let gens = generators::parse_generators(&lattice, &subgroup)?;
            let group = generate_group(&lattice, &gens, budget)?;
            let matrices: Vec<_> = gens.iter().map(|g| g.to_int_matrix()).collect();
            let a = analyse_action(&lattice.quotient_mod_k()?, &matrices, group.order() as u64)?;
            let out = H1Output {
                degree,
                order: group.order(),
                brx: a.brx,
                bru: a.bru,
                cokernel: a.cokernel,
                injective: a.injective,
                delta: a.delta,
            };
            Ok(Outcome::ok(match ctx.format {
                Format::Json => to_json(&out),
                Format::Csv => format!(
                    "degree,order,brx,bru,cokernel,delta\n{},{},{},{},{},{}\n",
                    out.degree, out.order, out.brx, out.bru, out.cokernel, out.delta
                ),
                Format::Text => format!(
                    "subgroup order {}\nH^1(Pic X) = {}\nH^1(Pic U) = {}\ncokernel = {} (delta = {})\n",
                    out.order, out.brx, out.bru, out.cokernel, out.delta
                ),
            }))
        }
        Command::VerifyLemma {
            degree,
            tier,
            samples,
            seed,
            order_cap,
        } => {
            let sampled = match (degree.degree(), samples, tier) {
                (1, _, _) => true,
                (2, _, Some(TierArg::Stretch)) => {
                    if samples.is_some() {
                        return Err(usage("--samples and --tier stretch are exclusive"));
                    }
                    false
                }
                (2, _, _) => true,
                (_, Some(_), _) => return Err(usage("--samples applies to degrees 1 and 2 only")),
                _ => false,
            };
            let report = if sampled {
                verify_lemma_on_samples(degree, samples.unwrap_or(200), order_cap, seed)?
            } else {
                ctx.table_and_lemma(degree, resolve_tier(degree, tier))?.1
            };
            let passed = report.all_hold();
            let stdout = match ctx.format {
                Format::Json => to_json(&report),
                _ => lemma_summary(&report),
            };
            Ok(Outcome { stdout, passed })
        }
        Command::VerifyPaper { stretch } => {
            let mut degrees = Vec::new();
            let mut tables = Vec::new();
            for d in (2..=7u8).rev() {
                let degree = DegreeSpec::new(d)?;
                let tier = if d == 2 { Tier::Stretch } else { resolve_tier(degree, None) };
                if d == 2 && !stretch {
                    degrees.push(PaperDegree {
                        degree,
                        comparison: compare_with_fixture(degree, None),
                        lemma_holds: None,
                    });
                    continue;
                }
                let (table, lemma) = ctx.table_and_lemma(degree, tier)?;
                degrees.push(PaperDegree {
                    degree,
                    comparison: compare_with_fixture(degree, Some(&table)),
                    lemma_holds: Some(lemma.all_hold()),
                });
                tables.push(table);
            }
            let bounds = verify_prop_bounds(&tables);
            let passed = bounds.all_hold()
                && degrees
                    .iter()
                    .all(|d| !d.comparison.is_failure() && d.lemma_holds != Some(false));
            let stdout = match ctx.format {
                Format::Json => to_json(&serde_json::json!({
                    "passed": passed,
                    "degrees": degrees,
                    "bounds": bounds,
                })),
                _ => {
                    let mut s = String::new();
                    for d in &degrees {
                        let status = match &d.comparison {
                            FixtureComparison::Match => "match".to_string(),
                            FixtureComparison::NotComputed => "not computed (pass --stretch)".to_string(),
                            FixtureComparison::NoFixture => "no published table".to_string(),
                            FixtureComparison::Mismatch { missing, unexpected } => format!(
                                "MISMATCH ({} missing, {} unexpected)",
                                missing.len(),
                                unexpected.len()
                            ),
                        };
                        let lemma = match d.lemma_holds {
                            Some(true) => ", lemma holds",
                            Some(false) => ", LEMMA FAILS",
                            None => "",
                        };
                        let _ = writeln!(s, "d = {}: {status}{lemma}", d.degree);
                    }
                    for c in &bounds.checks {
                        let _ = writeln!(
                            s,
                            "{} <= {}: max {} {}",
                            c.claim,
                            c.limit,
                            c.observed,
                            if c.holds { "ok" } else { "FAILS" }
                        );
                    }
                    s
                }
            };
            Ok(Outcome { stdout, passed })
        }
        Command::Bound {
            m,
            parent_p2,
            parent_p3,
            primes,
        } => {
            let config = BoundConfig::new(parent_p2, parent_p3, primes)?;
            let summary = summarize(&brauer_uniform_bound(m, &config)?);
            Ok(Outcome::ok(match ctx.format {
                Format::Json => to_json(&summary),
                _ => {
                    let t = &summary.torsion_bound;
                    let mut s = String::new();
                    let _ = writeln!(s, "m = {}", summary.m);
                    let _ = writeln!(s, "extension degree <= {}", summary.extension_degree);
                    let _ = writeln!(s, "prime limit B({}) = {}", t.field_degree, t.prime_limit);
                    let _ = writeln!(s, "N({}): 2^{} || N, 3^{} || N", t.field_degree, t.exponent_of_2, t.exponent_of_3);
                    match &t.value {
                        Some(v) => {
                            let _ = writeln!(s, "N({}) = {v}", t.field_degree);
                        }
                        None => {
                            let _ = writeln!(s, "N({}) = lcm of prime powers up to B (not expanded)", t.field_degree);
                        }
                    }
                    let _ = writeln!(
                        s,
                        "#(Br U / Br k) < {} * N({})^2",
                        summary.brauer_bound.leading_factor, t.field_degree
                    );
                    if let Some(v) = &summary.brauer_bound.value {
                        let _ = writeln!(s, "  = {v}");
                    }
                    for f in &summary.flags {
                        let _ = writeln!(s, "flag: {f}");
                    }
                    s
                }
            }))
        }
        Command::Cache { action } => {
            let cache = ctx
                .cache
                .as_ref()
                .ok_or_else(|| usage("the cache is disabled by --no-cache"))?;
            match action {
                CacheAction::Ls => {
                    let listing = cache.list()?;
                    Ok(Outcome::ok(match ctx.format {
                        Format::Json => to_json(&listing),
                        _ => {
                            let mut s = format!("{}\n", cache.dir().display());
                            for e in &listing {
                                let _ = writeln!(
                                    s,
                                    "{}  {} bytes{}",
                                    e.file,
                                    e.bytes,
                                    if e.current { "" } else { "  (stale)" }
                                );
                            }
                            s
                        }
                    }))
                }
                CacheAction::Clear => {
                    let n = cache.clear()?;
                    Ok(Outcome::ok(match ctx.format {
                        Format::Json => to_json(&serde_json::json!({ "removed": n })),
                        _ => format!("removed {n} entries\n"),
                    }))
                }
            }
        }
    }
}

fn wants_json(args: &[String]) -> bool {
    args.windows(2).any(|w| w[0] == "--format" && w[1] == "json") || args.iter().any(|a| a == "--format=json")
}

fn report_failure(json: bool, f: &Failure) {
    if json {
        eprintln!(
            "{}",
            serde_json::json!({ "error": f.kind, "message": f.message, "exit_code": f.code })
        );
    } else {
        eprintln!("error: {}", f.message);
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let json = wants_json(&args);
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if json {
                report_failure(
                    true,
                    &Failure {
                        code: EXIT_USAGE,
                        kind: "usage",
                        message: e.to_string(),
                    },
                );
            } else {
                let _ = e.print();
            }
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let threads = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        report_failure(json, &usage("--jobs must be positive"));
        return ExitCode::from(EXIT_USAGE);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("warning: {e}");
    }
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_MISMATCH)
            }
        }
        Err(f) => {
            report_failure(json, &f);
            ExitCode::from(f.code)
        }
    }
}
