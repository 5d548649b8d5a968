//! `hecke`: command-line front end over the exact Hecke-operator
//! library. Every subcommand emits plain, byte-deterministic text;
//! exit codes are 1 for invalid configuration, 2 for a verification
//! failure, 3 for a resource cap.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hecke_core::corpus::{delta, eisenstein, theta_e8_trace};
use hecke_core::cosets::{tj_cosets, v_cosets, CosetRep};
use hecke_core::exact::{Int, IntMat};
use hecke_core::fourier::{parse_qexp, write_qexp};
use hecke_core::hecke::{apply_t_seeded, apply_tj_seeded, gauss_brute, gauss_closed};
use hecke_core::hilbert::{
    commute_check, hecke_prime, ideals_up_to_norm, parse_coeff_map, primes_above,
    write_coeff_map, Field, Ideal,
};
use hecke_core::integrality::{certify, check_fb, check_weight_exponent, count_e, hecke_matrix};
use hecke_core::Error;

#[derive(Parser)]
#[command(name = "hecke", version, about = "Exact Hecke operators on Fourier expansions")]
struct Cli {
    /// Seed for internal representative choices; never changes results
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for the lattice shell cache (default: $HECKE_CACHE_DIR)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the canonical invariants of a coset representative system
    Cosets(CosetsArgs),
    /// Evaluate a quadratic Gauss sum, closed form against brute force
    Gauss(GaussArgs),
    /// Apply a Hecke operator to a QEXP file
    Apply(ApplyArgs),
    /// Certify integrality of the Hecke matrix on a basis of QEXP files
    Certify(CertifyArgs),
    /// Exhaustively verify the exponent bounds and root counts
    Bounds(BoundsArgs),
    /// Hilbert modular operations on ideal-indexed coefficient files
    Hilbert(HilbertArgs),
    /// Write corpus expansions as QEXP files
    Corpus(CorpusArgs),
    /// Run the acceptance checklist
    VerifyAll(VerifyArgs),
}

#[derive(Args)]
struct CosetsArgs {
    /// Degree
    #[arg(short)]
    n: usize,
    /// Prime
    #[arg(short)]
    p: u64,
    /// Similitude exponent delta for T(p^delta)
    #[arg(short, default_value_t = 1)]
    d: u32,
    /// Level
    #[arg(short = 'N', default_value_t = 1)]
    level: u64,
    /// Use the rank-j system of T_{j,n-j}(p^2) instead of T(p^d)
    #[arg(long)]
    tj: Option<usize>,
}

#[derive(Args)]
struct GaussArgs {
    /// Symmetric even-diagonal matrix G = 2S, row-major comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    g: Vec<i64>,
    /// Diagonal of D, ascending divisor chain, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<i64>,
}

#[derive(Args)]
struct ApplyArgs {
    /// Input QEXP file
    #[arg(long)]
    input: PathBuf,
    /// Operator: "tp" for T(p^delta), "tj" for T_{j,n-j}(p^2)
    #[arg(long, default_value = "tp")]
    op: String,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    delta: u32,
    /// Rank j for the tj operator
    #[arg(long, default_value_t = 0)]
    j: usize,
    /// Output support bound tr(T) <= theta
    #[arg(long)]
    theta: i64,
    /// Output file (stdout when absent)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// QEXP basis files
    #[arg(required_unless_present = "fixture")]
    inputs: Vec<PathBuf>,
    /// Built-in basis: "weight-twelve" is {691 E_12, Delta} at tr <= 24
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    delta: u32,
    /// Output support bound for the operator application
    #[arg(long, default_value_t = 8)]
    theta: i64,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 6)]
    n_max: i64,
    #[arg(long, default_value_t = 12)]
    k_max: i64,
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    delta: u32,
    /// Also count E(M,d) roots: "M,d"
    #[arg(long, value_delimiter = ',')]
    count_roots: Option<Vec<i64>>,
}

#[derive(Args)]
struct HilbertArgs {
    #[command(subcommand)]
    verb: HilbertVerb,
}

#[derive(Subcommand)]
enum HilbertVerb {
    /// Primes above a rational prime in Q(sqrt d)
    Primes {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        p: u64,
    },
    /// Apply T'(p) to a coefficient file on all targets of bounded norm
    Apply {
        #[arg(long)]
        input: PathBuf,
        /// Prime ideal as HNF triple "a,b,c"
        #[arg(long, value_delimiter = ',')]
        prime: Vec<i64>,
        #[arg(long)]
        max_norm: i64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check T'(p) T'(q) = T'(q) T'(p) on a coefficient file
    Commute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        p: Vec<i64>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<i64>,
        #[arg(long)]
        max_norm: i64,
    },
}

#[derive(Args)]
struct CorpusArgs {
    /// One of: eisenstein, delta, theta
    #[arg(long)]
    form: String,
    /// Weight for eisenstein
    #[arg(long)]
    k: Option<i64>,
    /// Degree for theta (1 or 2)
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Support bound tr(T) <= theta
    #[arg(long)]
    theta: i64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run the reduced sweeps
    #[arg(long)]
    fast: bool,
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::CapExceeded(_) => 3,
        Error::Verification(_)
        | Error::MissingIndices(_)
        | Error::UnstableSpan(_)
        | Error::DependentBasis(_)
        | Error::NotGroupAction(_) => 2,
        _ => 1,
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Error> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_cosets(a: &CosetsArgs, seed: u64) -> Result<(), Error> {
    let reps: Vec<CosetRep> = match a.tj {
        Some(j) => tj_cosets(a.n, j, a.p, a.level, seed)?,
        None => v_cosets(a.n, a.p, a.d, a.level, seed)?,
    };
    let mut invs: BTreeSet<Vec<Int>> = BTreeSet::new();
    for r in &reps {
        invs.insert(r.canonical_invariant()?);
    }
    for inv in &invs {
        let line: Vec<String> = inv.iter().map(Int::to_string).collect();
        println!("{}", line.join(" "));
    }
    println!("representatives: {}", invs.len());
    Ok(())
}

fn square_mat(entries: &[i64], what: &str) -> Result<IntMat, Error> {
    let n = (1..).find(|k| k * k >= entries.len()).unwrap_or(0);
    if n * n != entries.len() {
        return Err(Error::InvalidConfig(format!("{what}: {} entries is not a square", entries.len())));
    }
    let rows: Vec<Vec<Int>> = entries.chunks(n).map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect();
    Ok(IntMat::from_rows(rows))
}

fn run_gauss(a: &GaussArgs) -> Result<(), Error> {
    let g = square_mat(&a.g, "--g")?;
    let mut rows = vec![vec![Int::from(0); a.d.len()]; a.d.len()];
    for (i, &x) in a.d.iter().enumerate() {
        rows[i][i] = Int::from(x);
    }
    let d = IntMat::from_rows(rows);
    let brute = gauss_brute(&g, &d)?;
    let closed = gauss_closed(&g, &d)?;
    if brute.value != closed.value {
        return Err(Error::Verification(format!(
            "closed form {} disagrees with brute sum {}",
            closed.value, brute.value
        )));
    }
    println!("value: {}", brute.value);
    println!("vanished: {}", if brute.vanished { "yes" } else { "no" });
    let divs: Vec<String> = brute.snf_divisors.iter().map(Int::to_string).collect();
    println!("snf divisors: {}", divs.join(" "));
    Ok(())
}

fn run_apply(a: &ApplyArgs, seed: u64) -> Result<(), Error> {
    let f = parse_qexp(&fs::read_to_string(&a.input)?)?;
    let g = match a.op.as_str() {
        "tp" => apply_t_seeded(&f, a.p, a.delta, a.theta, seed)?,
        "tj" => apply_tj_seeded(&f, a.j, a.p, a.theta, seed)?,
        other => return Err(Error::InvalidConfig(format!("unknown operator {other:?}"))),
    };
    emit(&write_qexp(&g), a.output.as_ref())
}

fn run_certify(a: &CertifyArgs) -> Result<(), Error> {
    let basis = match a.fixture.as_deref() {
        Some("weight-twelve") => vec![eisenstein(12, 24)?, delta(24)?],
        Some(other) => return Err(Error::InvalidConfig(format!("unknown fixture {other:?}"))),
        None => a
            .inputs
            .iter()
            .map(|path| parse_qexp(&fs::read_to_string(path)?))
            .collect::<Result<Vec<_>, Error>>()?,
    };
    let (p, delta, theta, seed) = (a.p, a.delta, a.theta, 0);
    let c = hecke_matrix(&basis, |h| apply_t_seeded(h, p, delta, theta, seed))?;
    let cert = certify(&c, &basis)?;
    print!("{cert}");
    if !cert.verdict {
        return Err(Error::Verification("charpoly is not integral".into()));
    }
    Ok(())
}

fn run_bounds(a: &BoundsArgs) -> Result<(), Error> {
    let mut violations = Vec::new();
    for n in 1..=a.n_max {
        for k_n in 1..=a.k_max {
            violations.extend(check_fb(n, k_n));
            let scalar = vec![k_n; n as usize];
            violations.extend(check_weight_exponent(&scalar, a.p, a.delta)?);
            let staircase: Vec<i64> = (0..n).map(|j| k_n + n - 1 - j).collect();
            violations.extend(check_weight_exponent(&staircase, a.p, a.delta)?);
        }
    }
    println!("exponent bounds: n <= {}, k <= {}, p = {}, delta = {}", a.n_max, a.k_max, a.p, a.delta);
    if let Some(md) = &a.count_roots {
        if md.len() != 2 {
            return Err(Error::InvalidConfig(format!("--count-roots takes M,d, got {md:?}")));
        }
        let (count, bound) = count_e(md[0], md[1] as u32)?;
        println!("root count: #E({},{}) = {count}, bound {bound}", md[0], md[1]);
        if Int::from(count) > bound {
            violations.push(format!("#E({},{}) exceeds its bound", md[0], md[1]));
        }
    }
    if violations.is_empty() {
        println!("violations: none");
        Ok(())
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Err(Error::Verification(format!("{} bound violations", violations.len())))
    }
}

fn ideal_from_triple(field: Field, t: &[i64]) -> Result<Ideal, Error> {
    if t.len() != 3 {
        return Err(Error::InvalidConfig(format!("ideal needs an HNF triple a,b,c, got {t:?}")));
    }
    Ideal::new(field, Int::from(t[0]), Int::from(t[1]), Int::from(t[2]))
}

fn run_hilbert(a: &HilbertArgs) -> Result<(), Error> {
    match &a.verb {
        HilbertVerb::Primes { d, p } => {
            let field = Field::quad(*d)?;
            for i in primes_above(field, *p)? {
                println!("{i}  norm {}", i.norm());
            }
            Ok(())
        }
        HilbertVerb::Apply { input, prime, max_norm, output } => {
            let c = parse_coeff_map(&fs::read_to_string(input)?)?;
            let p = ideal_from_triple(c.field, prime)?;
            let targets = ideals_up_to_norm(c.field, *max_norm)?;
            let out = hecke_prime(&c, &p, &targets)?;
            emit(&write_coeff_map(&out), output.as_ref())
        }
        HilbertVerb::Commute { input, p, q, max_norm } => {
            let c = parse_coeff_map(&fs::read_to_string(input)?)?;
            let pi = ideal_from_triple(c.field, p)?;
            let qi = ideal_from_triple(c.field, q)?;
            let targets = ideals_up_to_norm(c.field, *max_norm)?;
            if commute_check(&c, &pi, &qi, &targets)? {
                println!("commute: yes ({} targets)", targets.len());
                Ok(())
            } else {
                Err(Error::Verification(format!("T'({pi}) and T'({qi}) disagree")))
            }
        }
    }
}

fn run_corpus(a: &CorpusArgs, cache: Option<&PathBuf>) -> Result<(), Error> {
    let f = match a.form.as_str() {
        "eisenstein" => {
            let k = a.k.ok_or_else(|| Error::InvalidConfig("eisenstein needs --k".into()))?;
            eisenstein(k, a.theta)?
        }
        "delta" => delta(a.theta)?,
        "theta" => theta_e8_trace(a.degree, a.theta, cache.map(|p| p.as_path()))?,
        other => return Err(Error::InvalidConfig(format!("unknown form {other:?}"))),
    };
    emit(&write_qexp(&f), a.output.as_ref())
}

fn run_verify(a: &VerifyArgs, cache: Option<&PathBuf>) -> Result<(), Error> {
    let results = hecke_core::acceptance::run_all(a.fast, cache.map(|p| p.as_path()));
    let mut failed = 0;
    for r in &results {
        println!(
            "criterion {:2}  {:<32} {}  {}",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Error::Verification(format!("{failed} of {} criteria failed", results.len())));
    }
    println!("all {} criteria pass", results.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are successes, everything else is exit 1
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let cache = cli
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os("HECKE_CACHE_DIR").map(PathBuf::from));
    let result = match &cli.cmd {
        Cmd::Cosets(a) => run_cosets(a, cli.seed),
        Cmd::Gauss(a) => run_gauss(a),
        Cmd::Apply(a) => run_apply(a, cli.seed),
        Cmd::Certify(a) => run_certify(a),
        Cmd::Bounds(a) => run_bounds(a),
        Cmd::Hilbert(a) => run_hilbert(a),
        Cmd::Corpus(a) => run_corpus(a, cache.as_ref()),
        Cmd::VerifyAll(a) => run_verify(a, cache.as_ref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
