use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use factor_cryptanalysis::attacks::{
    lindecomp_attack_decrypt, lindecomp_attack_kex, span_attack_decrypt,
};
use factor_cryptanalysis::bench::{gen_instance, run_trials, StreamPurpose};
use factor_cryptanalysis::factor_scheme::{decrypt, encrypt, kex_shared, kex_token, keygen};
use factor_cryptanalysis::{
    AttackMethod, AttackReport, Ciphertext, Error, GeneratorFamily, Instance, InstanceSpec,
    KexToken, Matrix, Message, PrivateKey, PublicKey, Role, Wire,
};

const EXIT_ATTACK_FAILED: u8 = 2;
const EXIT_BAD_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "factor-bench",
    version,
    about = "FACTOR-based matrix cryptosystem and its linear-algebra attacks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Field characteristic (prime).
    #[arg(long, global = true, default_value_t = 101)]
    p: u64,
    /// Matrix dimension.
    #[arg(long, global = true, default_value_t = 3)]
    n: usize,
    #[arg(long, global = true, value_enum, default_value_t = Family::GeneralLinear)]
    family: Family,
    /// Secret exponents are drawn from [1, bound].
    #[arg(long, global = true, default_value_t = 1 << 16)]
    exponent_bound: u64,
    /// Emit reports as JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    GeneralLinear,
    UpperUnitriangular,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Span,
    Lindecomp,
    Kex,
}

impl From<Method> for AttackMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Span => AttackMethod::Span,
            Method::Lindecomp => AttackMethod::Lindecomp,
            Method::Kex => AttackMethod::LindecompKex,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a non-commuting generator pair.
    Gen {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a key pair for an instance.
    Keygen {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        public_out: Option<PathBuf>,
        #[arg(long)]
        private_out: Option<PathBuf>,
    },
    /// Encrypt a message (random if none is given).
    Encrypt {
        #[arg(long)]
        public: PathBuf,
        #[arg(long)]
        message: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the generated message when --message is absent.
        #[arg(long)]
        message_out: Option<PathBuf>,
    },
    /// Decrypt with the private key.
    Decrypt {
        #[arg(long)]
        private: PathBuf,
        #[arg(long)]
        ciphertext: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an honest key exchange and print both tokens and the shared key.
    Kex {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        token_a_out: Option<PathBuf>,
        #[arg(long)]
        token_b_out: Option<PathBuf>,
        #[arg(long)]
        key_out: Option<PathBuf>,
    },
    /// Recover a plaintext or shared key from public data.
    Attack {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, required_if_eq_any([("method", "span"), ("method", "lindecomp")]))]
        public: Option<PathBuf>,
        #[arg(long, required_if_eq_any([("method", "span"), ("method", "lindecomp")]))]
        ciphertext: Option<PathBuf>,
        #[arg(long, required_if_eq("method", "kex"))]
        instance: Option<PathBuf>,
        #[arg(long, required_if_eq("method", "kex"))]
        token_a: Option<PathBuf>,
        #[arg(long, required_if_eq("method", "kex"))]
        token_b: Option<PathBuf>,
        /// Known plaintext or key; the exit code reflects whether it was recovered.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Run a batch of seeded trials.
    Trials {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long = "method", value_enum, num_args = 1.., default_values_t = [Method::Span, Method::Lindecomp, Method::Kex])]
        methods: Vec<Method>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Input { context: String, source: Error },
    #[error("{0}")]
    Operation(Error),
    #[error("attack failed: {0}")]
    AttackFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { .. } => EXIT_BAD_INPUT,
            CliError::AttackFailed(_) => EXIT_ATTACK_FAILED,
            CliError::Operation(
                Error::InvalidSpec(_)
                | Error::InvalidModulus(_)
                | Error::InvalidDimension(_)
                | Error::Parse { .. },
            ) => EXIT_BAD_INPUT,
            CliError::Operation(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Operation(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load<T: Wire>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    T::from_json(&text).map_err(|source| CliError::Input {
        context: path.display().to_string(),
        source,
    })
}

fn store(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Independent stream per subcommand so chained invocations with one seed
/// do not reuse randomness.
fn command_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1 << 32 | stream);
    rng
}

impl Global {
    fn spec(&self) -> InstanceSpec {
        InstanceSpec {
            p: self.p,
            n: self.n,
            family: match self.family {
                Family::GeneralLinear => GeneratorFamily::GeneralLinear,
                Family::UpperUnitriangular => GeneratorFamily::UpperUnitriangular,
            },
            exponent_bound: self.exponent_bound,
            seed: self.seed,
        }
    }
}

fn print_report(report: &AttackReport, json: bool) {
    if json {
        println!("{}", report.to_json());
        return;
    }
    println!("method:            {}", report.method);
    println!("span dimension:    {}", report.span_dimension);
    if report.method == AttackMethod::Span {
        println!("sampling attempts: {}", report.sampling_attempts);
    }
    println!(
        "elapsed:           {:.3} ms",
        report.elapsed.as_secs_f64() * 1e3
    );
    match report.success {
        Some(true) => println!("matches expected:  yes"),
        Some(false) => println!("matches expected:  NO"),
        None => {}
    }
    println!("recovered:\n{}", report.recovered);
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match cli.command {
        Command::Gen { out } => {
            let spec = g.spec();
            let (gm, hm) = gen_instance(&spec, &mut spec.rng(0, StreamPurpose::Instance))?;
            let inst = Instance {
                g: gm,
                h: hm,
                family: Some(spec.family),
                seed: Some(spec.seed),
            };
            store(out.as_deref(), &inst.to_json())
        }
        Command::Keygen {
            instance,
            public_out,
            private_out,
        } => {
            let inst: Instance = load(&instance)?;
            let range = g.spec().exponent_range()?;
            let (public, private) = keygen(&inst.g, &inst.h, range, &mut command_rng(g.seed, 1))?;
            store(public_out.as_deref(), &public.to_json())?;
            store(private_out.as_deref(), &private.to_json())
        }
        Command::Encrypt {
            public,
            message,
            out,
            message_out,
        } => {
            let public: PublicKey = load(&public)?;
            let mut rng = command_rng(g.seed, 2);
            let m = match message {
                Some(path) => load::<Message>(&path)?.0,
                None => {
                    let m = Matrix::random(public.field(), public.n(), public.n(), &mut rng);
                    if let Some(path) = &message_out {
                        store(Some(path), &Message(m.clone()).to_json())?;
                    }
                    m
                }
            };
            let range = g.spec().exponent_range()?;
            let ct = encrypt(&public, &m, range, &mut rng).map_err(|source| CliError::Input {
                context: "message".into(),
                source,
            })?;
            store(out.as_deref(), &ct.to_json())
        }
        Command::Decrypt {
            private,
            ciphertext,
            out,
        } => {
            let private: PrivateKey = load(&private)?;
            let ct: Ciphertext = load(&ciphertext)?;
            let m = decrypt(&private, &ct)?;
            store(out.as_deref(), &Message(m).to_json())
        }
        Command::Kex {
            instance,
            token_a_out,
            token_b_out,
            key_out,
        } => {
            let inst: Instance = load(&instance)?;
            let range = g.spec().exponent_range()?;
            let mut rng = command_rng(g.seed, 3);
            let [x1, y1, x2, y2] = [(); 4].map(|_| range.sample(&mut rng));
            let a = kex_token(&inst.g, &inst.h, x1, y1, Role::Initiator)?;
            let b = kex_token(&inst.g, &inst.h, x2, y2, Role::Responder)?;
            let k_alice = kex_shared(x1, y1, &b, &inst.g, &inst.h)?;
            let k_bob = kex_shared(x2, y2, &a, &inst.g, &inst.h)?;
            assert_eq!(k_alice, k_bob, "honest parties disagree");
            store(token_a_out.as_deref(), &a.to_json())?;
            store(token_b_out.as_deref(), &b.to_json())?;
            store(key_out.as_deref(), &Message(k_alice).to_json())
        }
        Command::Attack {
            method,
            public,
            ciphertext,
            instance,
            token_a,
            token_b,
            expect,
        } => {
            let result = match method {
                Method::Span | Method::Lindecomp => {
                    let public: PublicKey =
                        load(public.as_deref().expect("clap enforces --public"))?;
                    let ct: Ciphertext =
                        load(ciphertext.as_deref().expect("clap enforces --ciphertext"))?;
                    if method == Method::Span {
                        if public.field().modulus() as usize <= public.n() {
                            return Err(CliError::Operation(Error::InvalidSpec(format!(
                                "span method needs p > n (p = {}, n = {})",
                                public.field().modulus(),
                                public.n()
                            ))));
                        }
                        span_attack_decrypt(&public, &ct, &mut command_rng(g.seed, 4))
                    } else {
                        lindecomp_attack_decrypt(&public, &ct)
                    }
                }
                Method::Kex => {
                    let inst: Instance =
                        load(instance.as_deref().expect("clap enforces --instance"))?;
                    let a: KexToken = load(token_a.as_deref().expect("clap enforces --token-a"))?;
                    let b: KexToken = load(token_b.as_deref().expect("clap enforces --token-b"))?;
                    lindecomp_attack_kex(&inst.g, &inst.h, &a, &b)
                }
            };
            let mut report = result.map_err(|e| CliError::AttackFailed(e.to_string()))?;
            if let Some(path) = expect {
                let truth: Message = load(&path)?;
                report.verify(&truth.0);
            }
            print_report(&report, g.json);
            if report.success == Some(false) {
                return Err(CliError::AttackFailed(
                    "recovered value differs from expected".into(),
                ));
            }
            Ok(())
        }
        Command::Trials { count, methods } => {
            let mut methods: Vec<AttackMethod> = methods.into_iter().map(Into::into).collect();
            methods.sort();
            methods.dedup();
            let summary = run_trials(&g.spec(), count, &methods)?;
            if g.json {
                println!(
                    "{}",
                    serde_json::to_string(&summary).expect("summary serializes")
                );
            } else {
                println!("{summary}");
            }
            if !summary.all_succeeded() {
                return Err(CliError::AttackFailed(
                    "not every trial recovered the secret".into(),
                ));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_BAD_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
