use std::fs;
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use bdea_core::attack_bench::{corruption_probe, MutationKind, PATTERN_COUNT};
use bdea_core::kat::{self, Stage};
use bdea_core::keyex::{DEFAULT_G, DEFAULT_P};
use bdea_core::{
    brute_force, decrypt, encrypt, encrypt_paper_mode, search_space, send_session, CipherContainer,
    CodingPattern, DhParams, KeyBundle, KeyMaterial, Primer, PrimerPair,
};
use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;

#[derive(Parser)]
#[command(name = "bdea", version, about = "Bi-serial DNA encryption toolkit (educational, not secure)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Hex,
    Bits,
    Dna,
    Amplify,
    Compress,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Stage {
        match s {
            StageArg::Hex => Stage::Hex,
            StageArg::Bits => Stage::Bits,
            StageArg::Dna => Stage::Dna,
            StageArg::Amplify => Stage::Amplify,
            StageArg::Compress => Stage::Compress,
        }
    }
}

#[derive(clap::Args)]
struct KeyArgs {
    #[arg(long)]
    primer1: Primer,
    #[arg(long)]
    primer2: Primer,
    #[arg(long, default_value = "ATGC")]
    pattern: CodingPattern,
}

impl KeyArgs {
    fn material(&self) -> KeyMaterial {
        if self.primer1 == self.primer2 {
            eprintln!("warning: primer1 and primer2 are identical");
        }
        KeyMaterial::new(
            PrimerPair::new(self.primer1.clone(), self.primer2.clone()),
            self.pattern,
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the worked-example known-answer checks, or print one stage's output.
    Kat {
        #[arg(long, value_enum)]
        stage: Option<StageArg>,
    },
    /// Generate a Diffie-Hellman key pair (and optionally random primers).
    Keygen {
        #[arg(long, default_value_t = DEFAULT_P)]
        p: u64,
        #[arg(long, default_value_t = DEFAULT_G)]
        g: u64,
        #[arg(long, env = "BDEA_DH_SEED")]
        seed: Option<u64>,
        /// Also print two random primers of this length.
        #[arg(long)]
        primer_len: Option<usize>,
    },
    /// Encrypt a file into a container and write its key bundle.
    Encrypt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        keys: KeyArgs,
        #[arg(long)]
        bundle_out: PathBuf,
        /// Skip the envelope and XOR layer, as in the published worked example.
        #[arg(long)]
        paper_mode: bool,
    },
    /// Decrypt a container with a key bundle.
    Decrypt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Send a file to a receiver.
    Send {
        #[arg(long)]
        to: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        keys: KeyArgs,
        #[arg(long, default_value_t = DEFAULT_P)]
        p: u64,
        #[arg(long, default_value_t = DEFAULT_G)]
        g: u64,
        #[arg(long, env = "BDEA_DH_SEED")]
        seed: Option<u64>,
    },
    /// Receive files, one thread per session.
    Recv {
        #[arg(long)]
        listen: String,
        #[arg(long)]
        out: PathBuf,
        /// Exit after this many sessions.
        #[arg(long)]
        sessions: Option<usize>,
        #[arg(long, env = "BDEA_DH_SEED")]
        seed: Option<u64>,
    },
    /// Exhaustive primer search and key-mutation probe against a container.
    Attack {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        mutations: usize,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Kat { stage: Some(stage) } => {
            println!("{}", kat::stage_output(stage.into()));
        }
        Command::Kat { stage: None } => {
            let results = kat::run_all();
            for r in &results {
                println!("{} {:<16} {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            if results.iter().any(|r| !r.pass) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Keygen { p, g, seed, primer_len } => {
            let params = DhParams::new(p, g)?;
            let seed = seed.unwrap_or_else(rand::random);
            let kp = params.keypair_from_seed(seed);
            println!("p       {}", params.p());
            println!("g       {}", params.g());
            println!("private {}", kp.private);
            println!("public  {}", kp.public);
            if let Some(len) = primer_len {
                let mut rng = rand::thread_rng();
                for name in ["primer1", "primer2"] {
                    let bases = (0..len).map(|_| bdea_core::Base::ALL[rng.gen_range(0..4)]).collect();
                    println!("{name} {}", Primer::new(bases)?);
                }
            }
        }
        Command::Encrypt {
            input,
            out,
            keys,
            bundle_out,
            paper_mode,
        } => {
            let plain = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let km = keys.material();
            let (container, bundle) = if paper_mode {
                let c = encrypt_paper_mode(&plain, &km)?;
                let kb = KeyBundle {
                    primers: km.primers.clone(),
                    pattern: km.pattern,
                    k_b: Vec::new(),
                };
                (c, kb)
            } else {
                encrypt(&plain, &km)?
            };
            fs::write(&out, container.to_bytes()).with_context(|| format!("writing {}", out.display()))?;
            fs::write(&bundle_out, bundle.to_bytes())
                .with_context(|| format!("writing {}", bundle_out.display()))?;
        }
        Command::Decrypt { input, bundle, out } => {
            let container = read_container(&input)?;
            let kb = read_bundle(&bundle)?;
            let plain = decrypt(&container, &kb)?;
            fs::write(&out, plain).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Send {
            to,
            input,
            keys,
            p,
            g,
            seed,
        } => {
            let plain = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let params = DhParams::new(p, g)?;
            let mut stream = TcpStream::connect(&to).with_context(|| format!("connecting to {to}"))?;
            stream.set_nodelay(true)?;
            let outcome = send_session(
                &mut stream,
                &plain,
                &keys.material(),
                &params,
                seed.unwrap_or_else(rand::random),
            )?;
            println!("sent {} bytes, ack crc32 {:08X}", plain.len(), outcome.crc);
        }
        Command::Recv {
            listen,
            out,
            sessions,
            seed,
        } => {
            fs::create_dir_all(&out)?;
            let listener = TcpListener::bind(&listen).with_context(|| format!("binding {listen}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            let failures = Arc::new(AtomicUsize::new(0));
            let counted = Arc::clone(&failures);
            bdea_core::serve(listener, seed, sessions, move |id, result| match result {
                Ok(plain) => {
                    let path = out.join(format!("session-{id}.bin"));
                    match fs::write(&path, &plain) {
                        Ok(()) => println!("session {id}: {} bytes -> {}", plain.len(), path.display()),
                        Err(e) => {
                            eprintln!("session {id}: writing {}: {e}", path.display());
                            counted.fetch_add(1, Ordering::Relaxed);
                        }
                    }
                }
                Err(e) => {
                    eprintln!("session {id}: {e}");
                    counted.fetch_add(1, Ordering::Relaxed);
                }
            })?;
            if failures.load(Ordering::Relaxed) > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Attack {
            input,
            bundle,
            max_len,
            seed,
            mutations,
            json,
        } => {
            let container = read_container(&input)?;
            let kb = read_bundle(&bundle)?;
            let report = brute_force(&container, &kb.k_b, &kb.pattern, max_len)?;
            let probe = corruption_probe(&container, &kb, mutations, seed, &MutationKind::ALL);
            let primer_space = search_space(kb.primers.p1.len() as u32, kb.primers.p2.len() as u32);
            let matches: Vec<String> = report.matches.iter().map(|m| m.to_string()).collect();
            if json {
                let doc = serde_json::json!({
                    "trials": report.trials,
                    "matches": report.matches.iter().map(|m| {
                        serde_json::json!({"primer1": m.p1.to_string(), "primer2": m.p2.to_string()})
                    }).collect::<Vec<_>>(),
                    "elapsed_ms": report.elapsed.as_secs_f64() * 1e3,
                    "true_key_primer_space": primer_space.map(|v| v.to_string()),
                    "pattern_count": PATTERN_COUNT,
                    "probe": {
                        "seed": seed,
                        "control_ok": probe.control_ok,
                        "trials": probe.trials,
                        "failures": probe.failures,
                        "pollution": probe.pollution,
                        "integrity": probe.integrity,
                        "fraction": probe.fraction,
                    },
                });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("trials          {}", report.trials);
                println!("matches         {}", if matches.is_empty() { "-".into() } else { matches.join(" ") });
                println!("elapsed_ms      {:.3}", report.elapsed.as_secs_f64() * 1e3);
                match primer_space {
                    Some(v) => println!("primer_space    {v}"),
                    None => println!("primer_space    overflow"),
                }
                println!("pattern_count   {PATTERN_COUNT}");
                println!("probe_control   {}", if probe.control_ok { "ok" } else { "FAILED" });
                println!("probe_rejected  {}/{} ({:.4})", probe.failures, probe.trials, probe.fraction);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_container(path: &PathBuf) -> Result<CipherContainer> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(CipherContainer::from_bytes(&bytes)?)
}

fn read_bundle(path: &PathBuf) -> Result<KeyBundle> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    match KeyBundle::from_bytes(&bytes) {
        Ok(kb) => Ok(kb),
        Err(e) => bail!("{}: {e}", path.display()),
    }
}
