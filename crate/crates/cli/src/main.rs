use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use otsdec_cli::*;
use otsdec_core::he::{self, HeParams, Plaintext};
use otsdec_core::protocol::{
    blind_decrypt, blind_secret_key, local_decrypt, skbd_keygen_composite, BlindedSecretKey,
    DEFAULT_H1, DEFAULT_Q2,
};
use otsdec_core::ring::RingContext;
use otsdec_estimator::{
    find_params, min_second_weight, zf_attack_bits, AttackReport, SearchPolicy,
};
use otsdec_wire::codec::*;
use otsdec_wire::{client_session, serve, Client, SessionPlan, DEFAULT_PORT, SEED_ENV};
use rand::RngCore;
use rand_chacha::ChaCha20Rng;

#[derive(Parser)]
#[command(
    name = "otsdec",
    version,
    about = "Outsourced decryption for RLWE encryption"
)]
struct Cli {
    /// RNG seed; falls back to $OTSDEC_SEED, then to OS entropy.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Blinding parameters for a security level and ring degree.
    Params {
        #[arg(long, default_value_t = 128)]
        lambda: u32,
        /// Ring degree, or its log2 when below 64.
        #[arg(long, value_parser = parse_degree)]
        d: usize,
        /// Gate composite enumeration at lambda instead of 128 bits.
        #[arg(long)]
        strict: bool,
    },
    /// Generate a key pair.
    Keygen {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        pk: PathBuf,
    },
    /// Generate a blinding pair and the blinded secret key.
    BlindKey {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long, default_value_t = DEFAULT_H1)]
        h1: usize,
        #[arg(long, default_value_t = 3)]
        h2: usize,
        #[arg(long, default_value_t = DEFAULT_Q2)]
        q2: u64,
        /// Output: sparse factors and blinding key (stays local).
        #[arg(long)]
        pair: PathBuf,
        /// Output: blinded secret key for the cloud.
        #[arg(long)]
        blinded: PathBuf,
    },
    /// Encrypt a plaintext (comma-separated coefficients) or a random one.
    Encrypt {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        pk: PathBuf,
        /// Plaintext file; random when omitted (then written to --message-out).
        #[arg(long)]
        message: Option<PathBuf>,
        #[arg(long)]
        message_out: Option<PathBuf>,
        #[arg(long)]
        ct: PathBuf,
    },
    /// Cloud-side blind decryption of a stored ciphertext.
    BlindDec {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        blinded: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Client-side decryption of a blinded result.
    LocalDec {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ordinary decryption with the secret key.
    Decrypt {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cloud server.
    Serve {
        #[arg(long, default_value_t = format!("0.0.0.0:{DEFAULT_PORT}"))]
        bind: String,
    },
    /// Demo client: keygen, upload, add, blind-decrypt, verify.
    Client {
        #[arg(long, default_value_t = format!("127.0.0.1:{DEFAULT_PORT}"))]
        connect: String,
        #[arg(long, value_parser = parse_degree, default_value = "12")]
        d: usize,
        #[arg(long, default_value_t = 50)]
        limb_bits: u32,
        #[arg(long, default_value_t = 1)]
        limbs: usize,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_H1)]
        h1: usize,
        #[arg(long, default_value_t = 3)]
        h2: usize,
    },
    /// Time local against baseline decryption.
    Bench {
        #[arg(long, default_value_t = 128)]
        lambda: u32,
        /// Ring degrees (or log2), comma-separated.
        #[arg(long, value_parser = parse_degree, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// Ciphertexts cycled through the timed loop.
        #[arg(long, default_value_t = 1)]
        pool: usize,
        /// Ciphertexts checked on both paths before timing.
        #[arg(long, default_value_t = 16)]
        check: usize,
        /// Bits per limb; defaults to the parameter search's log q.
        #[arg(long)]
        logq: Option<u32>,
        /// Limb counts, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        limbs: Vec<usize>,
        /// Fixed weight target instead of the searched one.
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Itemized client-side storage.
    Space {
        #[arg(long, value_parser = parse_degree)]
        d: usize,
        #[arg(long, default_value_t = 30)]
        logq: u32,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        limbs: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_H1)]
        h1: usize,
        #[arg(long, default_value_t = 3)]
        h2: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Attack costs for one parameter point.
    Estimate {
        #[arg(long, value_parser = parse_degree)]
        d: usize,
        #[arg(long)]
        logq: f64,
        #[arg(long)]
        h: usize,
        #[arg(long, default_value_t = 128)]
        lambda: u32,
        #[arg(long, default_value_t = DEFAULT_H1)]
        h1: usize,
        #[arg(long)]
        h2: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_Q2)]
        q2: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Zero-forced attack cost over a weight range.
    ZfCurve {
        #[arg(long, value_parser = parse_degree)]
        d: usize,
        #[arg(long)]
        logq: f64,
        /// Inclusive range `a..b`.
        #[arg(long, value_parser = parse_range)]
        h_range: (usize, usize),
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RingArgs {
    /// Ring descriptor `d=<degree> moduli=<q0>,<q1>,...`.
    #[arg(long)]
    params: String,
    /// Plaintext modulus; the largest safe one when omitted.
    #[arg(long)]
    plain: Option<u64>,
}

impl RingArgs {
    fn he(&self) -> Result<HeParams> {
        let ring: RingContext = self.params.parse()?;
        let ring = Arc::new(ring);
        Ok(match self.plain {
            Some(p) => HeParams::new(ring, p)?,
            None => he_params(ring)?,
        })
    }
}

fn parse_range(v: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = v.split_once("..").ok_or("expected a..b")?;
    let a: usize = a.parse().map_err(|e| format!("{a}: {e}"))?;
    let b: usize = b
        .trim_start_matches('=')
        .parse()
        .map_err(|e| format!("{b}: {e}"))?;
    if a == 0 || a > b {
        return Err(format!("empty range {v}"));
    }
    Ok((a, b))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::Contract(format!("{SEED_ENV}={v} is not a u64"))),
        Err(_) => Ok(rand::rngs::OsRng.next_u64()),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    Ok(fs::read(path)?)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    Ok(fs::write(path, bytes)?)
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{header}")?;
    for r in rows {
        writeln!(f, "{r}")?;
    }
    Ok(())
}

fn format_plaintext(m: &Plaintext) -> String {
    let v: Vec<String> = m.coeffs().iter().map(u64::to_string).collect();
    v.join(",")
}

fn parse_plaintext(he: &HeParams, text: &str) -> Result<Plaintext> {
    let mut coeffs = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u64>()
                .map_err(|e| CliError::Contract(format!("{s}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = he.ring().degree();
    if coeffs.len() > d {
        return Err(CliError::Contract(format!(
            "{} coefficients for d={d}",
            coeffs.len()
        )));
    }
    coeffs.resize(d, 0);
    Ok(Plaintext::new(coeffs, he.plain_modulus())?)
}

fn emit_plaintext(m: &Plaintext, out: Option<&Path>) -> Result<()> {
    let text = format_plaintext(m);
    match out {
        Some(p) => write(p, text.as_bytes()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn print_report(r: &AttackReport, lambda: u32) {
    println!("d               {}", r.d);
    println!("log q           {:.2}", r.log_q);
    println!(
        "h / h1 / h2     {} / {} / {} (q2={})",
        r.h, r.h1, r.h2, r.q2
    );
    println!("brute force     {:.1} bits", r.brute_bits);
    println!("meet in middle  {:.1} bits", r.mitm_bits);
    println!(
        "composite enum  {:.1} bits (gate {:.0})",
        r.composite_enum_bits, r.enum_gate_bits
    );
    match (r.zf.r, r.zf.beta) {
        (Some(g), Some(b)) => println!(
            "zero-forced     {:.1} bits (r={g}, beta={b}{})",
            r.zf.bits,
            if r.zf.beta_clamped { ", clamped" } else { "" }
        ),
        _ => println!("zero-forced     {:.1} bits (no feasible r)", r.zf.bits),
    }
    println!("lattice ratio c {:.3e}", r.lattice_c_ratio);
    println!("feasible at {lambda}  {}", r.feasible(lambda));
}

fn run(cli: Cli) -> Result<()> {
    let seed = resolve_seed(cli.seed)?;
    let mut rng: ChaCha20Rng = seeded_rng(seed);
    match cli.cmd {
        Cmd::Params { lambda, d, strict } => {
            let policy = if strict {
                SearchPolicy::strict()
            } else {
                SearchPolicy::table_iii()
            };
            let c = find_params(lambda, d, &policy)?;
            println!(
                "h={} logq={} h1={} h2={} q2={}",
                c.h, c.log_q, c.h1, c.h2, c.q2
            );
            print_report(&c.report, lambda);
        }
        Cmd::Keygen { ring, sk, pk } => {
            let he = ring.he()?;
            let (public, secret) = he::keygen(&he, &mut rng);
            write(&sk, &encode_secret_key(he.ring(), &secret))?;
            write(&pk, &encode_public_key(he.ring(), &public))?;
            println!("plaintext modulus {}", he.plain_modulus());
        }
        Cmd::BlindKey {
            ring,
            sk,
            h1,
            h2,
            q2,
            pair,
            blinded,
        } => {
            let he = ring.he()?;
            let r = he.ring();
            let secret = decode_secret_key(r, &read(&sk)?)?;
            let p = skbd_keygen_composite(r, h1, h2, q2, &mut rng)?;
            let s_tilde = blind_secret_key(r, &secret, &p)?;
            write(&pair, &encode_pair(r, &p))?;
            write(&blinded, &encode_poly(r, s_tilde.poly()))?;
        }
        Cmd::Encrypt {
            ring,
            pk,
            message,
            message_out,
            ct,
        } => {
            let he = ring.he()?;
            let public = decode_public_key(he.ring(), &read(&pk)?)?;
            let m = match message {
                Some(path) => parse_plaintext(&he, &fs::read_to_string(path)?)?,
                None => {
                    let m = Plaintext::random(&he, &mut rng);
                    if let Some(out) = &message_out {
                        emit_plaintext(&m, Some(out))?;
                    }
                    m
                }
            };
            let c = he::encrypt(&he, &public, &m, &mut rng)?;
            write(&ct, &encode_ct(he.ring(), &c))?;
        }
        Cmd::BlindDec {
            ring,
            blinded,
            ct,
            out,
        } => {
            let he = ring.he()?;
            let r = he.ring();
            let key = BlindedSecretKey::from_poly(r, decode_poly(r, &read(&blinded)?)?)?;
            let c = decode_ct(r, &read(&ct)?)?;
            write(&out, &encode_blinded(r, &blind_decrypt(r, &key, &c)?))?;
        }
        Cmd::LocalDec {
            ring,
            pair,
            input,
            out,
        } => {
            let he = ring.he()?;
            let p = decode_pair(he.ring(), &read(&pair)?)?;
            let bct = decode_blinded(he.ring(), &read(&input)?)?;
            emit_plaintext(&local_decrypt(&he, &p, &bct)?, out.as_deref())?;
        }
        Cmd::Decrypt { ring, sk, ct, out } => {
            let he = ring.he()?;
            let secret = decode_secret_key(he.ring(), &read(&sk)?)?;
            let c = decode_ct(he.ring(), &read(&ct)?)?;
            emit_plaintext(&he::decrypt(&he, &secret, &c)?, out.as_deref())?;
        }
        Cmd::Serve { bind } => {
            eprintln!("listening on {bind}");
            serve(bind.as_str())?;
        }
        Cmd::Client {
            connect,
            d,
            limb_bits,
            limbs,
            count,
            h1,
            h2,
        } => {
            let he = he_params(bench_ring(d, limb_bits, limbs)?)?;
            let (pk, sk) = he::keygen(&he, &mut rng);
            let pair = skbd_keygen_composite(he.ring(), h1, h2, DEFAULT_Q2, &mut rng)?;
            let msgs: Vec<Plaintext> = (0..count)
                .map(|_| Plaintext::random(&he, &mut rng))
                .collect();
            let ciphertexts = msgs
                .iter()
                .map(|m| he::encrypt(&he, &pk, m, &mut rng))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let additions = (1..count as u32).map(|i| (i - 1, i)).collect();
            let plan = SessionPlan {
                ciphertexts,
                additions,
            };
            let mut client = Client::connect(connect.as_str())?;
            let out = client_session(&mut client, &he, &sk, &pair, &plan)?;
            let p = he.plain_modulus();
            let mut expected = msgs.clone();
            for &(a, b) in &plan.additions {
                let (x, y) = (&expected[a as usize], &expected[b as usize]);
                let sum = x
                    .coeffs()
                    .iter()
                    .zip(y.coeffs())
                    .map(|(u, v)| (u + v) % p)
                    .collect();
                expected.push(Plaintext::new(sum, p)?);
            }
            for (i, (got, want)) in out.plaintexts.iter().zip(&expected).enumerate() {
                if got != want {
                    return Err(CliError::OutputMismatch { index: i });
                }
            }
            println!(
                "{} results decrypted locally, all match (p={p})",
                out.plaintexts.len()
            );
        }
        Cmd::Bench {
            lambda,
            d,
            iters,
            pool,
            check,
            logq,
            limbs,
            h,
            csv,
        } => {
            let policy = SearchPolicy::table_iii();
            let mut rows = Vec::new();
            for &deg in &d {
                let choice = find_params(lambda, deg, &policy)?;
                let weight = h.unwrap_or(choice.h);
                let h2 = if h.is_some() {
                    min_second_weight(choice.h1, weight)
                } else {
                    choice.h2
                };
                for &l in &limbs {
                    let cfg = BenchConfig {
                        lambda,
                        d: deg,
                        limb_bits: logq.unwrap_or(choice.log_q),
                        limbs: l,
                        h: weight,
                        h1: choice.h1,
                        h2,
                        q2: choice.q2,
                        iters,
                        pool,
                        check,
                    };
                    let r = bench_decrypt(&cfg, &mut rng)?;
                    println!(
                        "d={} logq={} L={} h={} ({}x{}) p={}: baseline {:.2} ms, local {:.2} ms, \
                         speedup {:.1}% (best lap {:.1}%), a={:.3}, median {:.1}/{:.1} us, ops {}/{}",
                        r.d, r.logq_total, r.limbs, r.h, r.h1, r.h2, r.plain_modulus,
                        r.baseline_ms, r.local_ms, 100.0 * r.speedup, 100.0 * r.best_speedup, r.a_fit,
                        r.baseline_median_us, r.local_median_us, r.baseline_ops, r.local_ops
                    );
                    rows.push(r.csv_row());
                }
            }
            if let Some(path) = csv {
                write_csv(&path, BENCH_CSV_HEADER, &rows)?;
            }
        }
        Cmd::Space {
            d,
            logq,
            limbs,
            h1,
            h2,
            csv,
        } => {
            let mut rows = Vec::new();
            for &l in &limbs {
                let r = space_report(d, logq, l, h1, h2, DEFAULT_Q2, &mut rng)?;
                println!("d={} L={} ell={}", r.d, r.limbs, r.ell);
                for i in r.baseline.iter().chain(&r.ours) {
                    println!(
                        "  {:<20} {:>12} bits (model {})",
                        i.component, i.measured_bits, i.model_bits
                    );
                }
                println!("  ratio {:.4} (model {:.4})", r.ratio(), r.model_ratio());
                rows.extend(r.csv_rows());
            }
            if let Some(path) = csv {
                write_csv(&path, SPACE_CSV_HEADER, &rows)?;
            }
        }
        Cmd::Estimate {
            d,
            logq,
            h,
            lambda,
            h1,
            h2,
            q2,
            csv,
        } => {
            let policy = SearchPolicy::table_iii();
            let h2 = h2.unwrap_or_else(|| min_second_weight(h1, h));
            let r = AttackReport::new(d, logq, h, h1, h2, q2, &policy, lambda);
            print_report(&r, lambda);
            if let Some(path) = csv {
                let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
                let row = format!(
                    "{},{},{},{:.2},{:.2},{:.2},{:.2},{},{},{}",
                    d,
                    logq,
                    h,
                    r.brute_bits,
                    r.mitm_bits,
                    r.composite_enum_bits,
                    r.zf.bits,
                    opt(r.zf.r),
                    opt(r.zf.beta),
                    r.feasible(lambda)
                );
                write_csv(
                    &path,
                    "d,logq,h,brute,mitm,enum,zf_bits,r,beta,feasible",
                    &[row],
                )?;
            }
        }
        Cmd::ZfCurve {
            d,
            logq,
            h_range,
            csv,
        } => {
            let policy = SearchPolicy::table_iii();
            let rows: Vec<String> = (h_range.0..=h_range.1)
                .map(|h| format!("{h},{:.3}", zf_attack_bits(d, logq, h, policy.guess).bits))
                .collect();
            match csv {
                Some(path) => write_csv(&path, "h,zf_bits", &rows)?,
                None => {
                    println!("h,zf_bits");
                    rows.iter().for_each(|r| println!("{r}"));
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
