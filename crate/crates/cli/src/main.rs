//! `qtransfer`: run the relation suite and dump operators from the command line.
//!
//! Exit status is 0 on success, 1 when a relation fails or a computation
//! errors, and 2 when the parameters are outside the supported regime.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use qtransfer::bethe::{eigenvalue_lambda, solve_sector};
use qtransfer::matrix::{eigenvalues, MatrixDump};
use qtransfer::operators::r_matrix;
use qtransfer::relations::{partition_bruteforce, partition_transfer, run_suite, SuiteConfig, Tolerances};
use qtransfer::transfer::{transfer_p, Aux};
use qtransfer::{Error, SpectralPoint};
use serde_json::{json, Value};

use config::{parse_complex, RunConfig};

#[derive(Parser)]
#[command(name = "qtransfer", version, about = "Transfer matrices, Q-operators and their functional relations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Write the JSON result to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print JSON instead of a text summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every relation check and report residuals.
    Verify,
    /// Dump the normalized R-matrix at one spectral point.
    Rmatrix {
        #[arg(long, value_name = "RE[,IM]", default_value = "0")]
        u: String,
    },
    /// Transfer matrix and its eigenvalues.
    Spectrum {
        #[arg(long, value_name = "RE[,IM]", default_value = "0.1")]
        u: String,
        /// Auxiliary weight; integers use the finite module, other values the subtracted Verma pair.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        mu: f64,
    },
    /// Solve the Bethe equations in one sector, or in all of them.
    Bethe {
        /// Number of roots.
        #[arg(long)]
        p: Option<usize>,
        /// Point at which eigenvalues are reported.
        #[arg(long, value_name = "RE[,IM]", default_value = "0.1")]
        u: String,
    },
    /// Twisted partition function on a periodic lattice.
    Partition {
        #[arg(long, value_name = "RE[,IM]", default_value = "0.1")]
        u: String,
        /// Number of rows; defaults to the chain length.
        #[arg(long)]
        rows: Option<usize>,
        /// Also enumerate configurations directly and compare.
        #[arg(long)]
        brute: bool,
    },
}

struct Output {
    json: Value,
    text: String,
    ok: bool,
}

fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

fn fmt_c(z: C64) -> String {
    format!("{:+.12e} {:+.12e}i", z.re, z.im)
}

fn load(common: &Common) -> qtransfer::Result<RunConfig> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    RunConfig::parse(&text, &common.set)
}

fn verify(cfg: &RunConfig) -> qtransfer::Result<Output> {
    let report = run_suite(&SuiteConfig::new(cfg.params.clone(), cfg.chain.clone()))?;
    let mut text = String::new();
    for r in &report.records {
        let mark = if r.pass { "PASS" } else { "FAIL" };
        text.push_str(&format!("{mark} {:<28} {:.3e} (tol {:.1e})\n", r.name, r.residual, r.tol));
    }
    let failed = report.records.iter().filter(|r| !r.pass).count();
    text.push_str(&format!("{} records, {failed} failed\n", report.records.len()));
    let json = serde_json::from_str(&report.to_json()).expect("report is valid JSON");
    Ok(Output { json, text, ok: report.all_pass })
}

fn rmatrix(cfg: &RunConfig, u: C64) -> qtransfer::Result<Output> {
    let r = r_matrix(SpectralPoint::new(u), &cfg.params, true)?;
    let dump = MatrixDump::from_matrix(&r);
    let text = dump.to_json() + "\n";
    Ok(Output { json: serde_json::to_value(&dump).expect("dump serializes"), text, ok: true })
}

fn sort_spectrum(ev: &mut [C64]) {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn spectrum(cfg: &RunConfig, u: C64, mu: f64) -> qtransfer::Result<Output> {
    let t = transfer_p(C64::new(mu, 0.0), SpectralPoint::new(u), &cfg.chain, &cfg.params, Aux::Auto)?;
    let mut ev = eigenvalues(&t)?;
    sort_spectrum(&mut ev);
    let text = ev.iter().map(|z| fmt_c(*z) + "\n").collect();
    let json = json!({
        "u": pair(u),
        "mu": mu,
        "matrix": serde_json::to_value(MatrixDump::from_matrix(&t)).expect("dump serializes"),
        "eigenvalues": ev.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
    });
    Ok(Output { json, text, ok: true })
}

fn bethe(cfg: &RunConfig, p: Option<usize>, u: C64) -> qtransfer::Result<Output> {
    let n = cfg.chain.n();
    let sectors: Vec<usize> = match p {
        Some(p) if p > n => return Err(Error::InvalidParams(format!("p = {p} exceeds the chain length {n}"))),
        Some(p) => vec![p],
        None => (0..=n).collect(),
    };
    let x = SpectralPoint::new(u);
    let mut states = Vec::new();
    let mut text = String::new();
    for p in sectors {
        for st in solve_sector(p, &cfg.chain, &cfg.params, x)? {
            let lam = eigenvalue_lambda(x, &st, &cfg.chain, &cfg.params)?;
            text.push_str(&format!("p={p} lambda={} residual={:.2e}\n", fmt_c(lam), st.residual));
            for w in &st.roots {
                text.push_str(&format!("  w = {}\n", fmt_c(*w)));
            }
            let mut v = serde_json::to_value(&st).expect("state serializes");
            v["lambda"] = pair(lam);
            states.push(v);
        }
    }
    Ok(Output { json: json!({ "u": pair(u), "states": states }), text, ok: true })
}

fn partition(cfg: &RunConfig, u: C64, rows: Option<usize>, brute: bool) -> qtransfer::Result<Output> {
    let rows = rows.unwrap_or(cfg.chain.n());
    if rows == 0 {
        return Err(Error::InvalidParams("rows must be positive".into()));
    }
    let z = partition_transfer(u, &cfg.chain, rows, &cfg.params)?;
    let mut json = json!({ "u": pair(u), "rows": rows, "columns": cfg.chain.n(), "transfer": pair(z) });
    let mut text = format!("transfer {}\n", fmt_c(z));
    let mut ok = true;
    if brute {
        let zb = partition_bruteforce(u, &cfg.chain, rows, &cfg.params)?;
        let rel = (z - zb).norm() / z.norm().max(zb.norm()).max(f64::MIN_POSITIVE);
        let tol = Tolerances::for_chain(cfg.chain.n(), &cfg.params).partition;
        ok = rel <= tol;
        json["brute"] = pair(zb);
        json["residual"] = json!(rel);
        json["tol"] = json!(tol);
        json["pass"] = json!(ok);
        text.push_str(&format!("brute    {}\nresidual {rel:.3e} (tol {tol:.1e})\n", fmt_c(zb)));
    }
    Ok(Output { json, text, ok })
}

fn run(cli: &Cli) -> qtransfer::Result<Output> {
    let cfg = load(&cli.common)?;
    match &cli.cmd {
        Cmd::Verify => verify(&cfg),
        Cmd::Rmatrix { u } => rmatrix(&cfg, parse_complex(u)?),
        Cmd::Spectrum { u, mu } => spectrum(&cfg, parse_complex(u)?, *mu),
        Cmd::Bethe { p, u } => bethe(&cfg, *p, parse_complex(u)?),
        Cmd::Partition { u, rows, brute } => partition(&cfg, parse_complex(u)?, *rows, *brute),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let body = serde_json::to_string_pretty(&out.json).expect("output serializes") + "\n";
            if let Some(path) = &cli.common.out {
                if let Err(e) = std::fs::write(path, &body) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            if cli.common.json {
                print!("{body}");
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_regime() { 2 } else { 1 })
        }
    }
}
