//! Command-line surface. Input and output formats are described in
//! `docs/format.md`.
//!
//! Exit codes: 0 success, 1 failed check, 2 bad input, 3 Cartan-type
//! certificate fails, 4 normal form outside the first-integral module,
//! 5 family does not commute, 6 any other error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cartan::{decompose_over_module, CartanCertificate};
use crate::error::{Error, Result};
use crate::field::{JetDiffeo, VectorField};
use crate::hamiltonian::{run_ito, Hamiltonian};
use crate::io::{parse_scalar, scalar_repr, series_from_json, FieldJson, ScalarRepr, SeriesJson};
use crate::normalizer::{diagonalize_linear_part, normalize_family, Mode, NormalizeOptions, Normalized};
use crate::scalar::Arith;
use crate::torus::{DiophantineReport, LieMorphism, DEFAULT_BUDGET};

#[derive(Debug, Parser)]
#[command(name = "cartan-nf", version, about = "Normal forms of commuting families of vector fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArithArg {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Stepwise,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Report,
    Nf,
    Diffeo,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Truncation order N.
    #[arg(long, global = true, default_value_t = 8)]
    pub order: usize,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Newton)]
    pub mode: ModeArg,
    #[arg(long, global = true, value_enum, default_value_t = ArithArg::Exact)]
    pub arith: ArithArg,
    /// Zero test tolerance in float mode.
    #[arg(long, global = true, default_value_t = Arith::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cap on the number of enumerated monomials.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    /// Artifacts printed to stdout.
    #[arg(long, global = true, value_enum, value_delimiter = ',', default_value = "report")]
    pub emit: Vec<Emit>,
    /// Directory receiving all artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Small-divisor sequence, resonances and a regular element of an action.
    Diagnose {
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
    },
    /// Normalization and Cartan-type certificate of a family.
    Check { input: PathBuf },
    /// Normalize a family.
    Normalize { input: PathBuf },
    /// Replay the conjugation and normalization checks on artifacts.
    Verify {
        original: PathBuf,
        #[arg(long)]
        nf: PathBuf,
        #[arg(long)]
        diffeo: PathBuf,
    },
    /// Hamiltonian pipeline: nonresonance, normalization, action variables.
    Ito {
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        star_bound: u32,
    },
}

/// `{"lambda": rows}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorphismInput {
    pub lambda: Vec<Vec<ScalarRepr>>,
}

/// `{"lambda": rows?, "fields": [...]}`. `lambda` may be omitted for a
/// single field; it is then read off the linear part.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<ScalarRepr>>>,
    pub fields: Vec<FieldJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItoInput {
    pub pairs: usize,
    pub hamiltonians: Vec<SeriesJson>,
}

#[derive(Debug, Serialize)]
struct DiagnoseOutput {
    order: usize,
    seed: u64,
    regular_element: Option<Vec<ScalarRepr>>,
    regular_element_error: Option<String>,
    diophantine: DiophantineReport,
}

#[derive(Debug, Serialize)]
struct CheckOutput {
    /// Per field: lowest degree of a nonzero-weight term, if any.
    nonnormal_degree: Vec<Option<usize>>,
    certificate: CartanCertificate,
}

#[derive(Debug, Serialize)]
pub struct FieldVerdict {
    pub index: usize,
    /// Lowest degree where `pullback(diffeo, original)` and `nf` differ.
    pub conjugation_first_failure: Option<usize>,
    /// Lowest degree of a nonzero-weight term of `nf`.
    pub nonnormal_degree: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub pass: bool,
    pub fields: Vec<FieldVerdict>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Json(_)
        | Error::Io(_)
        | Error::Invalid(_)
        | Error::DimensionMismatch(..)
        | Error::OrderMismatch(..)
        | Error::NotInjective { .. }
        | Error::LinearPart(_) => 2,
        Error::CartanViolation(_) => 3,
        Error::NotInModule(_) => 4,
        Error::CommutationFailure(_) => 5,
        _ => 6,
    }
}

impl Common {
    pub fn arith(&self) -> Result<Arith> {
        match self.arith {
            ArithArg::Exact => Ok(Arith::Exact),
            ArithArg::Float => Arith::float_with(self.tol),
        }
    }

    fn options(&self) -> NormalizeOptions {
        let mut o = NormalizeOptions::new(
            self.order,
            match self.mode {
                ModeArg::Stepwise => Mode::Stepwise,
                ModeArg::Newton => Mode::Newton,
            },
        );
        o.seed = self.seed;
        o
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn morphism(rows: &[Vec<ScalarRepr>], arith: Arith) -> Result<LieMorphism> {
    let m = rows
        .iter()
        .map(|r| r.iter().map(|x| parse_scalar(x, arith)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    LieMorphism::new(m, arith)
}

/// Fields and the action of a family file.
pub fn load_family(input: &FamilyInput, arith: Arith) -> Result<(Vec<VectorField>, LieMorphism)> {
    let fields = input
        .fields
        .iter()
        .map(|f| VectorField::from_json(f, arith))
        .collect::<Result<Vec<_>>>()?;
    let s = match &input.lambda {
        Some(rows) => morphism(rows, arith)?,
        None if fields.len() == 1 => {
            let (_, eig) = diagonalize_linear_part(&fields[0])?;
            LieMorphism::single(eig, arith)?
        }
        None => return Err(Error::Invalid("lambda is required for more than one field".into())),
    };
    Ok((fields, s))
}

fn lambda_repr(s: &LieMorphism) -> Vec<Vec<ScalarRepr>> {
    s.lambda().iter().map(|r| r.iter().map(scalar_repr).collect()).collect()
}

fn artifacts(out: &Normalized, s: &LieMorphism) -> Result<Vec<(Emit, Value)>> {
    let nf = FamilyInput {
        lambda: Some(lambda_repr(s)),
        fields: out.nf.iter().map(|f| f.to_json()).collect(),
    };
    Ok(vec![
        (Emit::Report, serde_json::to_value(&out.report)?),
        (Emit::Nf, serde_json::to_value(&nf)?),
        (Emit::Diffeo, serde_json::to_value(out.psi.to_json())?),
    ])
}

fn file_name(e: Emit) -> &'static str {
    match e {
        Emit::Report => "report.json",
        Emit::Nf => "nf.json",
        Emit::Diffeo => "diffeo.json",
    }
}

fn emit_name(e: Emit) -> &'static str {
    match e {
        Emit::Report => "report",
        Emit::Nf => "nf",
        Emit::Diffeo => "diffeo",
    }
}

/// Write every artifact under `--out` and the selected ones to `stdout`.
fn publish(common: &Common, items: Vec<(Emit, Value)>, stdout: &mut dyn Write) -> Result<()> {
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir)?;
        for (e, v) in &items {
            write_json(&dir.join(file_name(*e)), v)?;
        }
    }
    let mut obj = Map::new();
    for (e, v) in items {
        if common.emit.contains(&e) {
            obj.insert(emit_name(e).into(), v);
        }
    }
    writeln!(stdout, "{}", serde_json::to_string_pretty(&Value::Object(obj))?)?;
    Ok(())
}

fn print_json<T: Serialize>(common: &Common, name: &str, v: &T, stdout: &mut dyn Write) -> Result<()> {
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir)?;
        write_json(&dir.join(name), v)?;
    }
    writeln!(stdout, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

/// Run a parsed command; the result is the exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let common = &cli.common;
    if common.order < 2 {
        return Err(Error::Invalid("--order must be at least 2".into()));
    }
    let arith = common.arith()?;
    match &cli.command {
        Command::Diagnose { input, kmax } => {
            let m: MorphismInput = read_json(input)?;
            let s = morphism(&m.lambda, arith)?;
            let diophantine = s.omega_sequence(*kmax, common.budget)?;
            let (regular_element, regular_element_error) = match s.find_regular_element(common.order, common.seed, 64) {
                Ok(g) => (Some(g.iter().map(scalar_repr).collect()), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let out = DiagnoseOutput {
                order: common.order,
                seed: common.seed,
                regular_element,
                regular_element_error,
                diophantine,
            };
            print_json(common, "diagnose.json", &out, stdout)?;
            Ok(0)
        }
        Command::Check { input } => {
            let fam: FamilyInput = read_json(input)?;
            let (fields, s) = load_family(&fam, arith)?;
            let fields: Vec<VectorField> = fields.iter().map(|f| f.with_cap(common.order.min(f.cap()))).collect();
            let dec = decompose_over_module(&fields, &s)?;
            let certificate = dec.certificate();
            let out = CheckOutput {
                nonnormal_degree: fields.iter().map(|f| s.nonzero_weight_part(f).order()).collect(),
                certificate,
            };
            print_json(common, "check.json", &out, stdout)?;
            if !out.certificate.cartan {
                return Err(Error::CartanViolation("junior determinant vanishes".into()));
            }
            Ok(if out.nonnormal_degree.iter().all(Option::is_none) { 0 } else { 1 })
        }
        Command::Normalize { input } => {
            let fam: FamilyInput = read_json(input)?;
            let (fields, s) = load_family(&fam, arith)?;
            let out = normalize_family(&fields, &s, &common.options())?;
            let pass = out.report.checks.passed();
            publish(common, artifacts(&out, &s)?, stdout)?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::Verify { original, nf, diffeo } => {
            let fam: FamilyInput = read_json(original)?;
            let (orig, s) = load_family(&fam, arith)?;
            let nf_in: FamilyInput = read_json(nf)?;
            let nf: Vec<VectorField> = nf_in
                .fields
                .iter()
                .map(|f| VectorField::from_json(f, arith))
                .collect::<Result<_>>()?;
            let psi = JetDiffeo::from_json(&read_json::<FieldJson>(diffeo)?, arith)?;
            let out = verify_artifacts(&orig, &s, &nf, &psi)?;
            print_json(common, "verify.json", &out, stdout)?;
            Ok(if out.pass { 0 } else { 1 })
        }
        Command::Ito { input, star_bound } => {
            let inp: ItoInput = read_json(input)?;
            let hs = inp
                .hamiltonians
                .iter()
                .map(|h| Hamiltonian::new(series_from_json(h, arith)?))
                .collect::<Result<Vec<_>>>()?;
            if hs.iter().any(|h| h.pairs() != inp.pairs) {
                return Err(Error::Invalid(format!("Hamiltonians must have {} variables", 2 * inp.pairs)));
            }
            let out = run_ito(&hs, *star_bound, &common.options())?;
            let ok = out.report.action_normal_form == Some(true)
                && out.normalized.as_ref().is_some_and(|n| n.report.checks.passed());
            let mut items = vec![(Emit::Report, serde_json::to_value(&out.report)?)];
            if let Some(n) = &out.normalized {
                let s = crate::hamiltonian::build_ito_morphism(inp.pairs, arith)?;
                let mut rest = artifacts(n, &s)?;
                // the normalization report rides along inside the verdict
                if let (Some(Value::Object(m)), (_, r)) = (items.get_mut(0).map(|x| &mut x.1), rest.remove(0)) {
                    m.insert("normalization".into(), r);
                }
                items.extend(rest);
            }
            publish(common, items, stdout)?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

/// Recompute `pullback(psi, original)` and the nonzero-weight parts of `nf`.
pub fn verify_artifacts(orig: &[VectorField], s: &LieMorphism, nf: &[VectorField], psi: &JetDiffeo) -> Result<VerifyOutput> {
    if orig.len() != nf.len() {
        return Err(Error::Invalid(format!("{} original fields against {} normal forms", orig.len(), nf.len())));
    }
    let mut fields = Vec::with_capacity(nf.len());
    for (i, (o, f)) in orig.iter().zip(nf).enumerate() {
        if o.n() != f.n() || psi.n() != f.n() {
            return Err(Error::DimensionMismatch(o.n(), f.n()));
        }
        let cap = f.cap().min(psi.cap()).min(o.cap());
        let back = psi.pullback(&o.with_cap(cap))?;
        fields.push(FieldVerdict {
            index: i,
            conjugation_first_failure: back.first_difference(&f.with_cap(cap)),
            nonnormal_degree: s.nonzero_weight_part(f).order(),
        });
    }
    let pass = fields
        .iter()
        .all(|v| v.conjugation_first_failure.is_none() && v.nonnormal_degree.is_none());
    Ok(VerifyOutput { pass, fields })
}

/// Parse `args`, run, print errors to stderr; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(code) => code,
        // reader went away, e.g. `| head`
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
