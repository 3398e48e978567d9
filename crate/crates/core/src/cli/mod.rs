//! Command-line front end. [`run`] never panics and never exits the process;
//! `main` prints the selected block and exits with the report's code.

pub mod examples;
pub mod serial;

pub mod commands;
mod text;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Report;

/// Dieudonne modules, Cartier modules and flat cohomology of finite flat
/// group schemes over finite fields.
///
/// Exit codes: 0 success, 1 validation or schema error, 2 precision
/// insufficient, 3 indeterminate isomorphism test.
#[derive(Parser, Debug)]
#[command(name = "ffgs", version)]
pub struct Cli {
    /// Emit the machine-readable JSON block instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Override Witt and V precision as `m,N`.
    #[arg(long, global = true, value_name = "m,N", value_parser = parse_precision)]
    pub precision: Option<(u32, u32)>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dieudonne module of an atom: mu_p[^a], Z/p[^a], alpha_p[^a], M11, Z/d.
    Atom {
        name: String,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Operations on a Dieudonne module document.
    Dm {
        #[arg(value_enum)]
        op: DmOp,
        #[command(flatten)]
        input: ModuleArgs,
        /// Second module for `iso` (file path).
        #[arg(long)]
        other: Option<PathBuf>,
        /// Word for `kernel`/`cokernel`: `F<a>` or `V<a>`.
        #[arg(long)]
        word: Option<String>,
    },
    /// Group-scheme operations.
    Gs {
        #[arg(value_enum)]
        op: GsOp,
        #[command(flatten)]
        input: ModuleArgs,
        /// `rho` for `height-one`: rows separated by `;`, entries by `,`,
        /// coefficients of an F_q entry by `:`.
        #[arg(long)]
        rho: Option<String>,
        /// Exponent for the Frobenius and Verschiebung kernels.
        #[arg(long, default_value_t = 1)]
        a: u32,
    },
    /// Cartier-module truncations of a `wo` term.
    Cartier {
        #[arg(value_enum)]
        op: CartierOp,
        #[command(flatten)]
        source: CartierArgs,
        /// Truncation level.
        #[arg(long, default_value_t = 1)]
        level: u32,
    },
    /// Flat cohomology reports on a geometric packet.
    Cohom {
        #[arg(value_enum)]
        op: CohomOp,
        #[command(flatten)]
        packet: PacketArgs,
        /// alpha_p, z_p, mu_p, mu_p^n, omega_n, nu_n, mu_p_bundle.
        #[arg(long, default_value = "mu_p")]
        coeff: String,
    },
    /// Formal-group reports on a geometric packet.
    Formal {
        #[arg(value_enum)]
        op: FormalOp,
        #[command(flatten)]
        packet: PacketArgs,
    },
    /// Consistency checks on a geometric packet.
    Check {
        #[arg(value_enum)]
        op: CheckOp,
        #[command(flatten)]
        packet: PacketArgs,
    },
    /// The bundled example packets.
    Examples {
        #[arg(value_enum, default_value = "list")]
        op: ExamplesOp,
        name: Option<String>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    #[arg(long)]
    pub p: Option<u32>,
    /// Extension degree of the residue field.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Monic modulus, coefficients constant term first, comma separated.
    #[arg(long)]
    pub modulus: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ModuleArgs {
    /// Module document (`ffgs_dm_v1` or `ffgs_gs_v1`).
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Use an atom instead of a file.
    #[arg(long)]
    pub atom: Option<String>,
    #[command(flatten)]
    pub field: FieldArgs,
}

#[derive(Args, Debug, Clone)]
pub struct PacketArgs {
    /// Packet file, or a bundled packet such as `examples/k3_ordinary.json`.
    #[arg(long)]
    pub packet: String,
    #[arg(long, allow_negative_numbers = true)]
    pub deg: Option<i64>,
    /// Run for every declared degree.
    #[arg(long)]
    pub all_degrees: bool,
}

#[derive(Args, Debug, Clone)]
pub struct CartierArgs {
    /// Cartier module document (`ffgs_cartier_v1`).
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Take `wo` of this packet at `--deg`.
    #[arg(long)]
    pub packet: Option<String>,
    #[arg(long)]
    pub deg: Option<i64>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DmOp {
    Show,
    Dual,
    Fourway,
    Iso,
    Kernel,
    Cokernel,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsOp {
    Classify,
    Dual,
    HeightOne,
    FrobeniusKernel,
    VerschiebungKernel,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CartierOp {
    Show,
    Trunc,
    Tc,
    Connected,
    Torsion,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohomOp {
    Report,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormalOp {
    PhiFl,
    Psi,
    Obstruction,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckOp {
    Validate,
    Les,
    Parallelogram,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExamplesOp {
    List,
    Show,
}

fn parse_precision(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or("expected m,N")?;
    let m: u32 = a.trim().parse().map_err(|_| format!("bad m: {a}"))?;
    let n: u32 = b.trim().parse().map_err(|_| format!("bad N: {b}"))?;
    if m == 0 || n == 0 {
        return Err("precisions must be >= 1".into());
    }
    Ok((m, n))
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Report
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let json = args.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => return Report::usage(e, json),
    };
    match std::panic::catch_unwind(|| commands::dispatch(&cli)) {
        Ok(r) => r,
        Err(_) => Report::internal(json),
    }
}
