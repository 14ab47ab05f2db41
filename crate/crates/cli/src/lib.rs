//! The `lina` command: `check`, `compile` and `eval`.

pub mod render;
pub mod values;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use lina_core::diag::{Code, Diagnostic};
use lina_core::emit::{emit, EmittedUnit, LatexFraming, OutputTarget};
use lina_core::interp::evaluate;
use lina_core::lexsrc::{normalize_bytes, SourceFile};
use lina_core::sema::{check_source, TypedProgram};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lina", version, about = "Compile linear-algebra notation to LaTeX, Python and C++")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Framing {
    Standalone,
    Mathjax,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and type-check a program.
    Check {
        /// Source file, or `-` for stdin.
        file: String,
        /// Print diagnostics as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Emit one unit per target.
    Compile {
        file: String,
        /// Comma-separated targets: latex, py, cpp.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_target)]
        target: Vec<OutputTarget>,
        /// Output directory. Without it a single target goes to stdout.
        #[arg(short = 'o', long = "out-dir")]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "standalone")]
        latex: Framing,
        #[arg(long)]
        json: bool,
    },
    /// Run the reference interpreter on a value document.
    Eval {
        file: String,
        /// JSON value document, or `-` for stdin.
        #[arg(long)]
        values: String,
        #[arg(long)]
        json: bool,
    },
}

fn parse_target(s: &str) -> Result<OutputTarget, String> {
    OutputTarget::parse(s.trim()).ok_or_else(|| format!("unknown target '{s}' (expected latex, py or cpp)"))
}

/// Stem of a source path; the entry-point name derives from it.
pub fn stem_of(path: &str) -> String {
    if path == "-" {
        return "stdin".into();
    }
    Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or("main").to_string()
}

/// Checks a source text and emits every requested target.
pub fn compile_source(
    src: &SourceFile,
    stem: &str,
    targets: &[OutputTarget],
    framing: LatexFraming,
) -> Result<Vec<EmittedUnit>, Vec<Diagnostic>> {
    let p = check_source(src)?;
    let mut units = Vec::new();
    let mut errs = Vec::new();
    for &t in targets {
        match emit(&p, t, stem, framing) {
            Ok(u) => units.push(u),
            Err(d) => errs.push(d),
        }
    }
    if errs.is_empty() {
        Ok(units)
    } else {
        Err(errs)
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    stdin_used: bool,
}

/// A failure already rendered for the user, with its exit code.
struct Exit(i32);

impl<'a> Io<'a> {
    fn read(&mut self, path: &str) -> Result<Vec<u8>, Diagnostic> {
        let mut buf = Vec::new();
        if path == "-" {
            if self.stdin_used {
                return Err(Diagnostic::runtime(Code::Io, "stdin can supply only one input"));
            }
            self.stdin_used = true;
            self.stdin.read_to_end(&mut buf).map_err(|e| Diagnostic::runtime(Code::Io, format!("cannot read stdin: {e}")))?;
            return Ok(buf);
        }
        std::fs::read(path).map_err(|e| Diagnostic::runtime(Code::Io, format!("cannot read '{path}': {e}")))
    }

    fn report(&mut self, diags: &[Diagnostic], path: &str, src: Option<&SourceFile>, json: bool) {
        if json {
            let _ = self.out.write_all(render::json(diags, src).as_bytes());
        } else {
            let _ = self.err.write_all(render::human(diags, path, src).as_bytes());
        }
    }

    fn fail(&mut self, d: Diagnostic, path: &str, src: Option<&SourceFile>, json: bool) -> Exit {
        let code = if d.code == Code::Io { EXIT_USAGE } else { EXIT_DIAGNOSTICS };
        self.report(&[d], path, src, json);
        Exit(code)
    }

    fn source(&mut self, path: &str, json: bool) -> Result<SourceFile, Exit> {
        let raw = self.read(path).map_err(|d| self.fail(d, path, None, json))?;
        normalize_bytes(&raw).map_err(|d| self.fail(d, path, None, json))
    }

    fn checked(&mut self, path: &str, json: bool) -> Result<(SourceFile, TypedProgram), Exit> {
        let src = self.source(path, json)?;
        match check_source(&src) {
            Ok(p) => Ok((src, p)),
            Err(ds) => {
                self.report(&ds, path, Some(&src), json);
                Err(Exit(EXIT_DIAGNOSTICS))
            }
        }
    }
}

/// Runs one command line. `args` includes the program name.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                return EXIT_USAGE;
            }
            let _ = out.write_all(text.as_bytes());
            return EXIT_OK;
        }
    };
    let mut io = Io { stdin, out, err, stdin_used: false };
    let r = match cli.command {
        Command::Check { file, json } => check(&mut io, &file, json),
        Command::Compile { file, target, out_dir, latex, json } => {
            let framing = match latex {
                Framing::Standalone => LatexFraming::Standalone,
                Framing::Mathjax => LatexFraming::MathJax,
            };
            compile(&mut io, &file, &target, out_dir.as_deref(), framing, json)
        }
        Command::Eval { file, values, json } => eval(&mut io, &file, &values, json),
    };
    match r {
        Ok(()) => EXIT_OK,
        Err(Exit(code)) => code,
    }
}

fn check(io: &mut Io, path: &str, json: bool) -> Result<(), Exit> {
    io.checked(path, json)?;
    if json {
        io.report(&[], path, None, true);
    }
    Ok(())
}

fn compile(
    io: &mut Io,
    path: &str,
    targets: &[OutputTarget],
    out_dir: Option<&Path>,
    framing: LatexFraming,
    json: bool,
) -> Result<(), Exit> {
    let mut targets = targets.to_vec();
    targets.dedup();
    let (src, p) = io.checked(path, json)?;
    let stem = stem_of(path);
    let mut units = Vec::new();
    let mut errs = Vec::new();
    for &t in &targets {
        match emit(&p, t, &stem, framing) {
            Ok(u) => units.push(u),
            Err(d) => errs.push(d),
        }
    }
    if !errs.is_empty() {
        io.report(&errs, path, Some(&src), json);
        return Err(Exit(EXIT_DIAGNOSTICS));
    }
    if out_dir.is_none() && units.len() == 1 {
        let _ = io.out.write_all(units[0].text.as_bytes());
        return Ok(());
    }
    let dir = out_dir.unwrap_or(Path::new("."));
    if let Err(e) = std::fs::create_dir_all(dir) {
        let d = Diagnostic::runtime(Code::Io, format!("cannot create '{}': {e}", dir.display()));
        return Err(io.fail(d, path, None, json));
    }
    let mut written = Vec::new();
    for u in &units {
        let f = dir.join(&u.file_name);
        if let Err(e) = std::fs::write(&f, &u.text) {
            let d = Diagnostic::runtime(Code::Io, format!("cannot write '{}': {e}", f.display()));
            return Err(io.fail(d, path, None, json));
        }
        written.push(f.display().to_string());
    }
    if json {
        let _ = writeln!(io.out, "{}", serde_json::json!(written));
    } else {
        for f in &written {
            let _ = writeln!(io.out, "{f}");
        }
    }
    Ok(())
}

fn eval(io: &mut Io, path: &str, values_path: &str, json: bool) -> Result<(), Exit> {
    let (src, p) = io.checked(path, json)?;
    let raw = io.read(values_path).map_err(|d| io.fail(d, values_path, None, json))?;
    let doc: serde_json::Value = serde_json::from_slice(&raw).map_err(|e| {
        let d = Diagnostic::runtime(Code::Json, format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column()));
        io.fail(d, values_path, None, json)
    })?;
    let inputs = values::decode_inputs(&doc, &p).map_err(|d| io.fail(d, values_path, None, json))?;
    let r = evaluate(&p, &inputs).map_err(|d| io.fail(d, path, Some(&src), json))?;
    let text = serde_json::to_string(&values::encode_result(&r)).expect("values serialize");
    let _ = writeln!(io.out, "{text}");
    Ok(())
}
