//! The `ltpg` command line: one subcommand per computation, JSON in and out.
//!
//! Exit codes: 0 verified, 1 input error, 2 mathematical refutation,
//! 3 inconclusive or unstable.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::coeff::{CoeffAlgebra, FieldSpec, LocalField};
use crate::error::{Error, Result};
use crate::herr::{basechange_compare, finite_koszul_cohomology, finite_koszul_oracle, herr_cohomology, FiniteKoszulInput, HerrOptions, Koszul};
use crate::json::{self, CoeffInput, FreeInput, ModuleInput};
use crate::lubin_tate::{norm_parameter_certificates, LubinTate, PhiKind};
use crate::obstruction::{lift_torsor, obstruction, ExtensionKind};
use crate::phigamma::{Base, PhiGammaModule};
use crate::series::Substitution;
use crate::suite::{run_suite, SuiteOptions};
use crate::tquasi::{certify_gamma, equivalence_suite, is_topologically_nilpotent, power_formula_check, Nilpotence};

pub const DEFAULT_PRECISION: i64 = 40;
pub const PRECISION_ENV: &str = "LTPG_PREC";

#[derive(Parser, Debug)]
#[command(name = "ltpg", version, about = "Lubin-Tate formal groups, (phi_q, Gamma)-modules and Herr cohomology over finite coefficient rings")]
pub struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Field description (`{"schema", "p", "f", "e", "eisenstein", "precision"}`).
    #[arg(long)]
    pub field: PathBuf,
    /// Frobenius series: `std` (πT + T^q) or `mult` ((1+T)^p − 1).
    #[arg(long, default_value = "std")]
    pub phi: String,
    /// T-adic precision (default: $LTPG_PREC or 40).
    #[arg(long)]
    pub prec: Option<i64>,
    /// π-adic digits to certify.
    #[arg(long, default_value_t = 4)]
    pub digits: u32,
}

#[derive(Args, Debug, Clone)]
pub struct ModuleArgs {
    /// Module description (`ltpg/1` module schema).
    pub module: PathBuf,
    /// T-adic working precision (default: $LTPG_PREC or 40).
    #[arg(long)]
    pub prec: Option<i64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Formal group law of the Frobenius series and its identities.
    Fg(FieldArgs),
    /// The endomorphism series `[a](T)`.
    Endo {
        #[command(flatten)]
        field: FieldArgs,
        /// The integer `a`.
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
    },
    /// Norm parameter `T_K` over the Δ-invariants, with its certificates.
    Tk(FieldArgs),
    /// Étaleness and the commutation relations of a module.
    Check(ModuleArgs),
    /// Minimal `T`-height of the Frobenius, or a test of height ≤ h.
    Height {
        #[command(flatten)]
        module: ModuleArgs,
        #[arg(long)]
        h: Option<i64>,
    },
    /// Least `s` with `(γ^{p^s} − 1)𝔐 ⊆ T^n𝔐` for every generator.
    Level {
        #[command(flatten)]
        module: ModuleArgs,
        #[arg(long, default_value_t = 1)]
        target: i64,
        #[arg(long, default_value_t = 8)]
        s_max: u32,
    },
    /// Cohomology of the Herr complex.
    Herr {
        #[command(flatten)]
        module: ModuleArgs,
        /// Comma-separated degrees.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        degrees: Vec<usize>,
        /// Work over `𝐀'_K` instead of its Δ-invariants.
        #[arg(long)]
        no_delta: bool,
        #[arg(long)]
        no_witnesses: bool,
        #[arg(long)]
        no_stabilize: bool,
    },
    /// Compares `H^i(M) ⊗ B` with `H^i(M ⊗ B)`.
    HerrBasechange {
        #[command(flatten)]
        module: ModuleArgs,
        /// Target coefficients (`{"schema", "coeff"}`), a quotient of the source.
        #[arg(long)]
        to: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,2")]
        degrees: Vec<usize>,
        #[arg(long)]
        no_stabilize: bool,
    },
    /// Obstruction to lifting along a square-zero extension.
    Obstruct {
        #[command(flatten)]
        module: ModuleArgs,
        /// Extension (`{"schema", "kind": "truncation" | "split", "rank"}`).
        #[arg(long)]
        ext: PathBuf,
        #[arg(long, default_value_t = 3)]
        lift_changes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Lifts along `A ⊕ F → A`, counted by `H¹` of the adjoint.
    Lifts {
        #[command(flatten)]
        module: ModuleArgs,
        /// The free module `F` (`{"schema", "rank"}`).
        #[arg(long)]
        coeff: PathBuf,
        #[arg(long)]
        no_stabilize: bool,
    },
    /// `T`-quasi-linearity, power formula and continuity criteria for `γ^k − 1`.
    Tquasi {
        #[command(flatten)]
        module: ModuleArgs,
        /// Generator index, starting at 1.
        #[arg(long, default_value_t = 1)]
        generator: usize,
        #[arg(long, default_value_t = 1)]
        power: u64,
        #[arg(long, default_value_t = 2)]
        target: i64,
        #[arg(long, default_value_t = 6)]
        s_max: u32,
    },
    /// Koszul cohomology of commuting endomorphisms of a finite module, two ways.
    OracleKoszul {
        /// `{"schema", "p", "exps", "operators"}`.
        input: PathBuf,
    },
    /// A built-in battery: calibration, properties, or appendix (T-quasi-linear operators).
    Suite {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        prec: Option<i64>,
        /// Flip a sign in d¹; the battery must then fail.
        #[arg(long, hide = true)]
        corrupt_differential: bool,
    },
}

/// Outcome of a command, mapped onto the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Verified,
    Refuted,
    Inconclusive,
}

impl Status {
    fn code(self) -> i32 {
        match self {
            Status::Verified => 0,
            Status::Refuted => 2,
            Status::Inconclusive => 3,
        }
    }
    fn name(self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::Refuted => "refuted",
            Status::Inconclusive => "inconclusive",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::NotUnit(_) | Error::Mismatch(_) | Error::Unsupported(_) => 1,
        Error::Refuted(_) => 2,
        Error::Inconclusive(_) | Error::Unstable(_) | Error::Precision(_) => 3,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Input(_) => "input",
        Error::NotUnit(_) => "not_unit",
        Error::Mismatch(_) => "mismatch",
        Error::Unsupported(_) => "unsupported",
        Error::Refuted(_) => "refuted",
        Error::Inconclusive(_) => "inconclusive",
        Error::Unstable(_) => "unstable",
        Error::Precision(_) => "precision",
    }
}

/// `--prec`, then `$LTPG_PREC`, then the default.
pub fn precision(flag: Option<i64>) -> Result<i64> {
    if let Some(p) = flag {
        return Ok(p);
    }
    match std::env::var(PRECISION_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| Error::Input(format!("{PRECISION_ENV}={s:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fg(_) => "fg",
        Command::Endo { .. } => "endo",
        Command::Tk(_) => "tk",
        Command::Check(_) => "check",
        Command::Height { .. } => "height",
        Command::Level { .. } => "level",
        Command::Herr { .. } => "herr",
        Command::HerrBasechange { .. } => "herr-basechange",
        Command::Obstruct { .. } => "obstruct",
        Command::Lifts { .. } => "lifts",
        Command::Tquasi { .. } => "tquasi",
        Command::OracleKoszul { .. } => "oracle-koszul",
        Command::Suite { .. } => "suite",
    }
}

fn status_if(ok: bool) -> Status {
    if ok {
        Status::Verified
    } else {
        Status::Refuted
    }
}

fn lubin_tate(a: &FieldArgs) -> Result<Arc<LubinTate>> {
    let spec: FieldSpec = json::read_tagged(&a.field)?;
    let kind: PhiKind = a.phi.parse()?;
    let prec = precision(a.prec)?;
    if prec < 2 {
        return Err(Error::Input("precision must be at least 2".into()));
    }
    LubinTate::new(LocalField::new(spec)?, kind, prec as usize, a.digits)
}

fn module_input(a: &ModuleArgs) -> Result<(ModuleInput, i64)> {
    Ok((json::read_tagged(&a.module)?, precision(a.prec)?))
}

/// Runs one parsed command, returning the status and the result object.
pub fn execute(cmd: &Command) -> Result<(Status, Value)> {
    match cmd {
        Command::Fg(a) => {
            let lt = lubin_tate(a)?;
            let f = lt.formal_group()?;
            let red = lt.reduction(lt.certified)?;
            let rep = lt.check_formal_group(&f)?;
            let out = json!({
                "max_degree": lt.n - 1,
                "digits": lt.certified,
                "terms": json::bivariate_json(&f.map(&red), &red.dst),
                "identities": json::to_value(&rep),
            });
            Ok((status_if(rep.holds()), out))
        }
        Command::Endo { field, a } => {
            let lt = lubin_tate(field)?;
            let e = lt.endomorphism(&lt.ring.from_int(*a))?;
            let s = lt.certify(&e.series, lt.certified)?;
            Ok((Status::Verified, json!({ "a": a, "digits": lt.certified, "series": json::series_json(&s) })))
        }
        Command::Tk(a) => {
            let lt = lubin_tate(a)?;
            let red = lt.reduction(lt.certified)?;
            let n = lt.n as i64;
            let tk = lt.norm_parameter()?.map_coeffs(&red)?;
            let mut subs = vec![("φ".to_string(), Substitution::new(lt.phi.map_coeffs(&red)?, n)?)];
            for (j, chi) in lt.gamma_characters().iter().enumerate() {
                let s = lt.endomorphism(chi)?.series.map_coeffs(&red)?;
                subs.push((format!("γ{}", j + 1), Substitution::new(s, n)?));
            }
            let refs: Vec<&Substitution> = subs.iter().map(|(_, s)| s).collect();
            let certs = norm_parameter_certificates(&tk, &refs)?;
            let integral = certs.iter().all(|c| c.val() >= 0);
            let cert_json: serde_json::Map<String, Value> = subs
                .iter()
                .zip(&certs)
                .map(|((name, _), c)| (name.clone(), json!({ "quotient": json::series_json(c), "integral": c.val() >= 0 })))
                .collect();
            let out = json!({
                "digits": lt.certified,
                "t_k": json::series_json(&tk),
                "valuation": tk.val(),
                "delta_order": lt.delta_characters()?.len(),
                "certificates": cert_json,
            });
            Ok((status_if(integral), out))
        }
        Command::Check(a) => {
            let (mi, prec) = module_input(a)?;
            let m = mi.build(prec)?;
            let failures = m.check()?;
            let out = json!({ "rank": m.d, "precision": prec, "etale": true, "failures": json::to_value(&failures) });
            Ok((status_if(failures.is_empty()), out))
        }
        Command::Height { module, h } => {
            let (mi, prec) = module_input(module)?;
            let m = mi.build(prec)?;
            let minimal = m.minimal_height(None)?;
            let holds = match h {
                Some(h) => Some(m.height_leq(None, *h)?),
                None => None,
            };
            let out = json!({ "minimal_height": minimal, "h": h, "holds": holds });
            Ok((status_if(holds != Some(false)), out))
        }
        Command::Level { module, target, s_max } => {
            let (mi, prec) = module_input(module)?;
            let m = mi.build(prec)?;
            let rep = m.continuity_level(None, *target, *s_max)?;
            let status = if rep.level.is_some() { Status::Verified } else { Status::Inconclusive };
            Ok((status, json::to_value(&rep)))
        }
        Command::Herr { module, degrees, no_delta, no_witnesses, no_stabilize } => {
            let (mi, prec) = module_input(module)?;
            if let Some(d) = degrees.iter().find(|&&d| d > mi.field.f as usize * mi.field.e as usize + 1) {
                return Err(Error::Input(format!("degree {d} exceeds the length of the complex")));
            }
            let opts = HerrOptions { degrees: degrees.clone(), delta_invariant: !no_delta, witnesses: !no_witnesses, stabilize: !no_stabilize };
            let rep = herr_cohomology(&mi, prec, &opts)?;
            let ring = mi.base(prec)?.ring.clone();
            let status = match &rep.stability {
                Some(s) if !s.agrees => Status::Inconclusive,
                _ => Status::Verified,
            };
            Ok((status, json::herr_json(&rep, &ring, !no_witnesses)))
        }
        Command::HerrBasechange { module, to, degrees, no_stabilize } => {
            let (mi, prec) = module_input(module)?;
            let target: CoeffInput = json::read_tagged(to)?;
            let target_base = |p: i64| -> Result<Arc<Base>> {
                let c = CoeffAlgebra::new(LocalField::new(mi.field.clone())?, target.coeff.clone())?;
                Base::new(c, mi.r, mi.frobenius, p)
            };
            let tgt = |p: i64| -> Result<PhiGammaModule> { mi.build(p)?.base_change(&target_base(p)?) };
            let mut reports = Vec::new();
            let mut all = true;
            for &r in degrees {
                let rep = basechange_compare(&mi, &tgt, r, prec, !no_stabilize)?;
                all &= rep.isomorphic;
                reports.push(json::to_value(&rep));
            }
            Ok((status_if(all), json!({ "precision": prec, "comparisons": reports })))
        }
        Command::Obstruct { module, ext, lift_changes, seed } => {
            let (mi, prec) = module_input(module)?;
            let kind: ExtensionKind = json::read_tagged(ext)?;
            let m = mi.build(prec)?;
            let rep = obstruction(&m, &kind, *lift_changes, &mut ChaCha8Rng::seed_from_u64(*seed))?;
            let status = if rep.cocycle_failure.is_some() || !rep.repaired_failures.is_empty() {
                Status::Refuted
            } else {
                match rep.vanishes {
                    Some(true) => Status::Verified,
                    Some(false) => Status::Refuted,
                    None => Status::Inconclusive,
                }
            };
            Ok((status, json::obstruction_json(&rep)))
        }
        Command::Lifts { module, coeff, no_stabilize } => {
            let (mi, prec) = module_input(module)?;
            let f: FreeInput = json::read_tagged(coeff)?;
            let rep = lift_torsor(&mi, f.rank, prec, !no_stabilize)?;
            let ok = rep.lifts.iter().all(|l| l.failures.is_empty() && l.round_trip && l.gauge_check);
            let status = match &rep.stability {
                _ if !ok => Status::Refuted,
                Some(s) if !s.agrees => Status::Inconclusive,
                _ => Status::Verified,
            };
            Ok((status, json::lifts_json(&rep)))
        }
        Command::Tquasi { module, generator, power, target, s_max } => {
            let (mi, prec) = module_input(module)?;
            let m = mi.build(prec)?;
            if *generator == 0 || *generator > m.base.n() {
                return Err(Error::Input(format!("generator must be between 1 and {}", m.base.n())));
            }
            let j = generator - 1;
            let (op, verdict) = certify_gamma(&m, None, j, *power)?;
            let Some(w) = verdict.witness() else {
                return Ok((Status::Refuted, json!({ "certification": json::verdict_json(&verdict) })));
            };
            let pi = m.base.uniformizer;
            let formula = power_formula_check(&op, w, &pi, &(-3..=3).collect::<Vec<_>>())?;
            let bound = m.base.a() * m.base.q() as u32 * 8;
            let nil = is_topologically_nilpotent(&op, w, &pi, m.base.a(), bound, Some(*target))?;
            let eq = equivalence_suite(&m, None, j, *target, *s_max)?;
            let formula_ok = formula.iter().all(|e| e.verified && e.in_ideal);
            let status = match (&nil, formula_ok && eq.consistent) {
                (_, false) => Status::Refuted,
                (Nilpotence::Refuted { .. }, _) => Status::Refuted,
                (Nilpotence::Inconclusive { .. }, _) => Status::Inconclusive,
                _ => Status::Verified,
            };
            let out = json!({
                "generator": generator,
                "power": power,
                "certification": json::verdict_json(&verdict),
                "power_formula": json::power_formula_json(&formula),
                "nilpotence": json::to_value(&nil),
                "equivalence": json::to_value(&eq),
            });
            Ok((status, out))
        }
        Command::OracleKoszul { input } => {
            let inp: FiniteKoszulInput = json::read_tagged(input)?;
            let oracle = finite_koszul_oracle(&inp)?;
            let machinery = finite_koszul_cohomology(&inp, &Koszul::new(inp.operators.len()))?;
            let agree = oracle == machinery;
            Ok((status_if(agree), json!({ "log_sizes": machinery, "oracle": oracle, "agree": agree })))
        }
        Command::Suite { name, seed, prec, corrupt_differential } => {
            let opts = SuiteOptions { seed: *seed, precision: precision(*prec)?, corrupt_differential: *corrupt_differential };
            let rep = run_suite(name, &opts)?;
            Ok((status_if(rep.all_passed()), json::to_value(&rep)))
        }
    }
}

/// The full report for a command, including failures.
pub fn report(cmd: &Command) -> (i32, Value) {
    let name = command_name(cmd);
    match execute(cmd) {
        Ok((status, result)) => (status.code(), json!({ "schema": json::SCHEMA, "command": name, "status": status.name(), "result": result })),
        Err(e) => {
            let err = json!({ "kind": error_kind(&e), "message": e.to_string() });
            (exit_code(&e), json!({ "schema": json::SCHEMA, "command": name, "status": "error", "error": err }))
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (code, value) = report(&cli.command);
    if let Some(err) = value.get("error") {
        eprintln!("ltpg: {}", err["message"].as_str().unwrap_or("error"));
    }
    if let Err(e) = write_out(cli.out.as_deref(), &json::render(&value)) {
        eprintln!("ltpg: cannot write report: {e}");
        return 1;
    }
    code
}
