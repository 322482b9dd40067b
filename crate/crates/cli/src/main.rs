use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use partlat::auth::{
    self, Commitment, Message, ProverSession, Secret, SecretMode, SessionConfig, SessionStatus, VerifierSession,
};
use partlat::certificate::GeneratorCertificate;
use partlat::combinatorics::{render_tables, TableFormat};
use partlat::genset::{self, ClosureMode};
use partlat::power;
use partlat::rng::ShiftRng;
use partlat::term::{random_term, GrowthPolicy};
use partlat::zadori::{self, EntryRule, ZadoriConfig};
use partlat::{LatticeShape, PartitionTuple, Term};

#[derive(Parser)]
#[command(name = "partlat", version, about = "Partition lattices and their small generating sets")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 2020)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print only failed checks and the verdict.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// maxS(n), m(n) and mhat(n).
    Tables {
        #[arg(long, default_value_t = 30)]
        max_n: usize,
        /// Append the sizes 97..100 and 2020.
        #[arg(long)]
        reference: bool,
    },
    /// Build and certify the four-element generating configuration of Part(n).
    Zadori {
        #[arg(long, value_parser = clap::value_parser!(u16).range(5..))]
        n: u16,
        #[arg(long, value_enum, default_value_t = Rule::Direct)]
        rule: Rule,
        /// Use the row-pair delta (n >= 7).
        #[arg(long)]
        rows: bool,
    },
    /// Four generators of a direct power Part(n)^t.
    Gen4 {
        #[arg(long, value_parser = clap::value_parser!(u16).range(5..))]
        n: u16,
        /// Exponent; defaults to the largest certified one.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, value_enum, default_value_t = Kind::Antichain)]
        construction: Kind,
        #[arg(long, value_enum, default_value_t = Verify::Certificate)]
        verify: Verify,
    },
    /// Sublattice generated by explicit tuples.
    Closure {
        /// Generator tuple; repeatable.
        #[arg(long = "gen")]
        gens: Vec<String>,
        /// File with one tuple per line.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Run to the fixpoint instead of stopping once all atoms are found.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = genset::DEFAULT_LIMIT)]
        limit: usize,
        /// Exit 1 unless the tuples generate the whole power.
        #[arg(long)]
        require: bool,
    },
    /// Fraction of random subsets of Part(n) that generate it.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Distance of two tuples in the covering graph.
    Distance { a: String, b: String },
    /// Random lattice terms and their evaluation.
    #[command(subcommand)]
    Term(TermCommand),
    /// Challenge-response authentication over Part(n)^t.
    #[command(subcommand)]
    Auth(AuthCommand),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    Direct,
    Complement,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Pairwise incomparable generators.
    Antichain,
    /// Exactly one comparable pair.
    OrderType,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Verify {
    Certificate,
    Closure,
    None,
}

#[derive(Subcommand)]
enum TermCommand {
    /// Grow a random p-ary term.
    Random {
        #[arg(long, default_value_t = auth::DEFAULT_P)]
        p: usize,
        #[arg(long, default_value_t = auth::DEFAULT_STEPS)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Policy::Uniform)]
        policy: Policy,
    },
    /// Evaluate a term at tuples.
    Eval {
        term: String,
        #[arg(required = true)]
        args: Vec<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    Uniform,
    Depth,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Relabeled configuration for t = 1, relabeled power generators otherwise.
    Auto,
    Zadori,
    Power,
}

#[derive(Args, Clone, Copy)]
struct SessionArgs {
    #[arg(long, default_value_t = auth::DEFAULT_Q)]
    q: usize,
    #[arg(long, default_value_t = auth::DEFAULT_STEPS)]
    steps: usize,
    /// Ask for a new challenge while responses are closer than this.
    #[arg(long)]
    quality: Option<usize>,
    #[arg(long, default_value_t = auth::DEFAULT_MAX_RETRIES)]
    max_retries: usize,
}

impl SessionArgs {
    fn config(self) -> SessionConfig {
        SessionConfig {
            q: self.q,
            steps: self.steps,
            threshold: self.quality,
            max_retries: self.max_retries,
        }
    }
}

#[derive(Subcommand)]
enum AuthCommand {
    /// Generate a secret file.
    Keygen {
        #[arg(long)]
        shape: LatticeShape,
        #[arg(long, default_value_t = auth::DEFAULT_P)]
        p: usize,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verifier side over TCP.
    Serve {
        #[arg(long)]
        listen: String,
        #[arg(long)]
        secret: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
        /// Handle one connection, then exit with its verdict.
        #[arg(long)]
        once: bool,
    },
    /// Prover side over TCP.
    Prove {
        #[arg(long)]
        connect: String,
        #[arg(long)]
        secret: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
    },
    /// Publish challenge terms and their values at the secret.
    Commit {
        #[arg(long)]
        secret: PathBuf,
        #[arg(long, default_value_t = auth::DEFAULT_Q)]
        q: usize,
        #[arg(long, default_value_t = auth::DEFAULT_STEPS)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a commitment record against a revealed secret.
    Verify {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        secret: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Lib(partlat::Error),
    Io(String),
}

impl From<partlat::Error> for CliError {
    fn from(e: partlat::Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => f.write_str(e),
        }
    }
}

fn io_err(what: impl std::fmt::Display, e: io::Error) -> CliError {
    CliError::Io(format!("{what}: {e}"))
}

type Outcome = Result<bool, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Tables { max_n, reference } => {
            let format = match cli.format {
                Format::Text => TableFormat::Text,
                Format::Csv => TableFormat::Csv,
            };
            print!("{}", render_tables(*max_n, *reference, format)?);
            Ok(true)
        }
        Command::Zadori { n, rule, rows } => {
            let n = usize::from(*n);
            let config = if *rows { ZadoriConfig::with_row_delta(n)? } else { ZadoriConfig::new(n)? };
            let rule = match rule {
                Rule::Direct => EntryRule::Direct,
                Rule::Complement => EntryRule::ViaComplement,
            };
            for (name, x) in ["alpha", "beta", "gamma", "delta"].iter().zip(config.quadruple()) {
                println!("GEN {name} {x}");
            }
            Ok(report(&zadori::verify_config(&config, rule)?, cli.quiet))
        }
        Command::Gen4 { n, t, construction, verify } => {
            let n = usize::from(*n);
            let set = match construction {
                Kind::Antichain => power::build_four_generators(n, *t)?,
                Kind::OrderType => {
                    if t.is_some() {
                        return Err(CliError::Io("--t applies to the antichain construction only".into()));
                    }
                    power::build_order_type_generators(n)?
                }
            };
            println!("SHAPE {}", set.shape());
            for (i, g) in set.quadruple().iter().enumerate() {
                println!("GEN {} {g}", i + 1);
            }
            match verify {
                Verify::Certificate => Ok(report(&power::verify_generators(&set)?, cli.quiet)),
                Verify::Closure => {
                    let ok = genset::is_generating(&set.quadruple())?;
                    println!("RESULT {}", if ok { "VALID" } else { "INVALID" });
                    Ok(ok)
                }
                Verify::None => Ok(true),
            }
        }
        Command::Closure { gens, file, full, limit, require } => {
            let mut tuples = gens.iter().map(|g| g.parse()).collect::<Result<Vec<PartitionTuple>, _>>()?;
            if let Some(path) = file {
                for line in read(path)?.lines().map(str::trim).filter(|l| !l.is_empty()) {
                    tuples.push(line.parse()?);
                }
            }
            let mode = if *full { ClosureMode::Full } else { ClosureMode::EarlyExit };
            let r = genset::closure(&tuples, *limit, mode)?;
            let shape = tuples[0].shape();
            println!("SHAPE {shape}");
            println!("POWER {}", genset::power_size(shape));
            println!("ATOMS {}/{}", r.atoms_covered, shape.t * shape.n * (shape.n - 1) / 2);
            if let Some(size) = r.closure_size {
                println!("SIZE {size}");
            }
            let verdict = match r.generating {
                Some(true) => "GENERATING",
                Some(false) => "NOT-GENERATING",
                None => "LIMIT",
            };
            println!("RESULT {verdict}");
            Ok(!*require || r.generating == Some(true))
        }
        Command::Sample { n, size, samples } => {
            let r = genset::sample_generating_fraction(*n, *size, *samples, cli.seed)?;
            match cli.format {
                Format::Csv => println!("{}\n{}", genset::ExperimentReport::csv_header(), r.csv_row()),
                Format::Text => println!(
                    "n={} size={} samples={} generating={} fraction={:.4} seed={}",
                    r.n, r.subset_size, r.samples, r.found, r.fraction, r.seed
                ),
            }
            Ok(true)
        }
        Command::Distance { a, b } => {
            let a: PartitionTuple = a.parse()?;
            let b: PartitionTuple = b.parse()?;
            println!("{}", a.distance(&b)?);
            Ok(true)
        }
        Command::Term(TermCommand::Random { p, steps, policy }) => {
            let policy = match policy {
                Policy::Uniform => GrowthPolicy::Uniform,
                Policy::Depth => GrowthPolicy::DepthWeighted,
            };
            let grown = random_term(*p, *steps, &mut ShiftRng::new(cli.seed), policy)?;
            println!("{}", grown.term);
            Ok(true)
        }
        Command::Term(TermCommand::Eval { term, args }) => {
            let args = args.iter().map(|a| a.parse()).collect::<Result<Vec<PartitionTuple>, _>>()?;
            println!("{}", Term::parse(term, args.len())?.eval(&args)?);
            Ok(true)
        }
        Command::Auth(cmd) => run_auth(cmd, cli.seed),
    }
}

fn report(cert: &GeneratorCertificate, quiet: bool) -> bool {
    let mut out = io::stdout().lock();
    for c in &cert.checks {
        if !quiet || !c.passed {
            let _ = writeln!(out, "{c}");
        }
    }
    let _ = writeln!(out, "RESULT {}", cert.verdict());
    cert.is_valid()
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path.display(), e))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_err(path.display(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_secret(path: &Path) -> Result<Secret, CliError> {
    Ok(read(path)?.parse()?)
}

fn run_auth(cmd: &AuthCommand, seed: u64) -> Outcome {
    match cmd {
        AuthCommand::Keygen { shape, p, mode, out } => {
            let mode = match mode {
                Mode::Auto if shape.t == 1 => SecretMode::PermuteZadori,
                Mode::Auto | Mode::Power => SecretMode::PermutePower,
                Mode::Zadori => SecretMode::PermuteZadori,
            };
            let secret = auth::make_secret(*shape, *p, seed, mode)?;
            emit(out, &secret.to_file_string())?;
            Ok(true)
        }
        AuthCommand::Serve { listen, secret, session, once } => {
            let secret = load_secret(secret)?;
            let listener = TcpListener::bind(listen).map_err(|e| io_err(listen, e))?;
            let addr = listener.local_addr().map_err(|e| io_err(listen, e))?;
            println!("LISTENING {addr}");
            io::stdout().flush().ok();
            let config = session.config();
            let mut index = 0u64;
            for stream in listener.incoming() {
                let stream = stream.map_err(|e| io_err(addr, e))?;
                let session_seed = ShiftRng::substream(seed, index).next_u64();
                index += 1;
                let verifier = VerifierSession::new(secret.clone(), config, session_seed);
                if *once {
                    let status = serve_connection(stream, verifier)?;
                    println!("SESSION {}", status_name(status));
                    return Ok(status == SessionStatus::Accepted);
                }
                std::thread::spawn(move || match serve_connection(stream, verifier) {
                    Ok(status) => eprintln!("session: {}", status_name(status)),
                    Err(e) => eprintln!("session error: {e}"),
                });
            }
            Ok(true)
        }
        AuthCommand::Prove { connect, secret, session } => {
            let secret = load_secret(secret)?;
            let stream = TcpStream::connect(connect).map_err(|e| io_err(connect, e))?;
            let status = prove_connection(stream, ProverSession::new(secret, session.config()))?;
            println!("SESSION {}", status_name(status));
            Ok(status == SessionStatus::Accepted)
        }
        AuthCommand::Commit { secret, q, steps, out } => {
            let secret = load_secret(secret)?;
            let challenge = auth::make_challenge(secret.p(), *q, *steps, seed)?;
            emit(out, &auth::commit(&secret, &challenge.terms)?.to_string())?;
            Ok(true)
        }
        AuthCommand::Verify { record, secret } => {
            let record: Commitment = read(record)?.parse()?;
            let ok = auth::verify_commit(&record, &load_secret(secret)?)?;
            println!("RESULT {}", if ok { "PASS" } else { "FAIL" });
            Ok(ok)
        }
    }
}

fn status_name(s: SessionStatus) -> &'static str {
    match s {
        SessionStatus::InProgress => "INCOMPLETE",
        SessionStatus::Accepted => "ACCEPTED",
        SessionStatus::Rejected => "REJECTED",
        SessionStatus::Aborted => "ABORTED",
    }
}

fn send(stream: &mut TcpStream, msg: &Message) -> Result<(), CliError> {
    writeln!(stream, "{msg}").map_err(|e| io_err("send", e))
}

fn serve_connection(stream: TcpStream, mut verifier: VerifierSession) -> Result<SessionStatus, CliError> {
    let mut writer = stream.try_clone().map_err(|e| io_err("socket", e))?;
    for line in BufReader::new(stream).lines() {
        let line = line.map_err(|e| io_err("receive", e))?;
        let msg: Message = line.parse()?;
        if let Some(reply) = verifier.handle(&msg)? {
            send(&mut writer, &reply)?;
        }
        if verifier.status() != SessionStatus::InProgress {
            break;
        }
    }
    Ok(verifier.status())
}

fn prove_connection(stream: TcpStream, mut prover: ProverSession) -> Result<SessionStatus, CliError> {
    let mut writer = stream.try_clone().map_err(|e| io_err("socket", e))?;
    let hello = prover.hello();
    println!("P> {hello}");
    send(&mut writer, &hello)?;
    for line in BufReader::new(stream).lines() {
        let line = line.map_err(|e| io_err("receive", e))?;
        println!("V> {line}");
        let msg: Message = line.parse()?;
        match prover.handle(&msg)? {
            Some(reply) => {
                println!("P> {reply}");
                send(&mut writer, &reply)?;
            }
            None => break,
        }
    }
    Ok(prover.status())
}
