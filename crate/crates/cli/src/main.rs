//! `dbr`: kernels, Schur functions, tuples and defect operators from the
//! command line. Every run writes one JSON document.

mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dbr_core::defect::{annihilation_check, classify, Atomic, HigherOrderLocal, InnerProduct};
use dbr_core::kernel::{
    build_model, degree_one_parameters, kernel_numerator, schur_extract, verify_model,
};
use dbr_core::suite::run_suite;
use dbr_core::tuples::{allowability, dlambda_closed_form, multi_tuple, AtomSpec};
use dbr_core::{Measure, Model, Poly, Rational, Tuple};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "dbr",
    version,
    about = "Reproducing kernels, Schur functions and allowable tuples for weighted Dirichlet spaces"
)]
struct Cli {
    /// Write the JSON document here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Tolerance for pass/fail decisions.
    #[arg(long, global = true, env = "DBR_TOL", default_value_t = 1e-9)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel of D(μ) for a finitely atomic μ.
    Kernel {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Schur function B with D(μ) = H[B].
    Schur {
        #[command(flatten)]
        measure: MeasureArgs,
    },
    /// Fourier generators of the tuple attached to (λ, p, m).
    Tuple {
        #[command(flatten)]
        tuple: TupleArgs,
        /// Largest k in the coefficient table.
        #[arg(long, default_value_t = 10)]
        kmax: u64,
        /// Truncation degree of the allowability check.
        #[arg(long, default_value_t = 20)]
        truncation: usize,
    },
    /// Defect matrices of the shift.
    Defect {
        #[command(flatten)]
        source: DefectSource,
        /// Highest defect order.
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 20)]
        truncation: usize,
        /// Use the local Dirichlet norm of order m instead of the tuple.
        #[arg(long)]
        local: bool,
        /// Polynomial whose multiples should be annihilated by the defect.
        #[arg(long)]
        annihilate: Option<String>,
    },
    /// Residual report with pass/fail.
    Verify {
        /// Built-in fixture suite.
        #[arg(long, value_enum, conflicts_with_all = ["atoms", "weights"])]
        suite: Option<Suite>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        atoms: Option<Vec<String>>,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Include wall-clock times (output is then not reproducible).
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Suite {
    Paper,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Atoms: `a+bi`, `r@theta` or `zeta:n:k`, comma separated.
    #[arg(
        long,
        required = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    atoms: Vec<String>,
    /// Positive weights, comma separated.
    #[arg(long, required = true, allow_hyphen_values = true)]
    weights: String,
}

#[derive(Args, Debug)]
struct TupleArgs {
    /// Circle point; repeat for several atoms.
    #[arg(long = "lambda", required = true, allow_hyphen_values = true)]
    lambdas: Vec<String>,
    /// Coefficients of p ascending; `;` separates several polynomials of one atom.
    #[arg(long = "p", allow_hyphen_values = true)]
    ps: Vec<String>,
    /// Order m of each atom.
    #[arg(long = "m", required = true)]
    ms: Vec<usize>,
    /// Closed form with p = 1 (single atom).
    #[arg(long)]
    closed_form: bool,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = true)]
struct DefectSource {
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "weights"
    )]
    atoms: Option<Vec<String>>,
    #[arg(long, allow_hyphen_values = true)]
    weights: Option<String>,
    #[arg(long = "lambda", allow_hyphen_values = true)]
    lambdas: Vec<String>,
    #[arg(long = "p", allow_hyphen_values = true)]
    ps: Vec<String>,
    #[arg(long = "m")]
    ms: Vec<usize>,
}

/// Bad input, reported with exit code 1.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| InputError(format!("{e:#}")).into())
}

/// Library errors caused by the arguments rather than by the numerics.
fn lib<T>(r: dbr_core::Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        dbr_core::Error::InvalidArgument(_) => InputError(e.to_string()).into(),
        e => anyhow::Error::new(e),
    })
}

fn measure(atoms: &[String], weights: &str) -> Result<Measure> {
    let atoms = input(atoms.iter().map(|a| parse::atom(a)).collect())?;
    let weights = input(parse::weights(weights))?;
    lib(Measure::new(atoms, weights))
}

fn rational(r: &Rational) -> Value {
    json!({ "num": r.num(), "den": r.den() })
}

fn model_json(model: &Model) -> Value {
    json!({
        "measure": { "atoms": model.measure.atoms(), "weights": model.measure.weights() },
        "q": model.q,
        "q_min_root_modulus": model.q_min_root_modulus,
        "factorization_residual": model.factorization_residual,
        "phi": rational(&model.phi),
        "mate": rational(&model.mate),
        "dual_basis": model.dual_basis.iter().map(rational).collect::<Vec<_>>(),
        "gram": model.gram,
        "gram_condition": model.gram_condition,
        "atom_kernels": model.atom_kernels.iter().map(rational).collect::<Vec<_>>(),
        "kernel": {
            "numerator": kernel_numerator(model),
            "layout": "numerator[a][b] multiplies z^a conj(w)^b",
            "denominator": "q(z) conj(q(w)) (1 - z conj(w))",
        },
        "warnings": model.warnings,
    })
}

fn schur_json(model: &Model) -> Result<Value> {
    let ex = lib(schur_extract(model))?;
    let mut doc = json!({
        "numerators": ex.numerators,
        "denominator": model.q,
        "psd": ex.psd,
        "rank": ex.rank,
        "min_eigenvalue": ex.min_eigenvalue,
        "residual": ex.residual,
    });
    if let Some((gamma, beta)) = degree_one_parameters(model) {
        doc["degree_one"] = json!({
            "gamma": gamma,
            "beta": beta,
            "boundary_gap": gamma.norm() - (1.0 - beta.norm()),
        });
    }
    Ok(doc)
}

fn tuple_from(lambdas: &[String], ps: &[String], ms: &[usize], closed_form: bool) -> Result<Tuple> {
    let points = input(
        lambdas
            .iter()
            .map(|s| parse::circle_point(s))
            .collect::<Result<Vec<_>>>(),
    )?;
    if ms.len() != points.len() {
        return input(Err(anyhow::anyhow!("need one --m per --lambda")));
    }
    if closed_form {
        if points.len() != 1 {
            return input(Err(anyhow::anyhow!(
                "--closed-form takes a single --lambda"
            )));
        }
        return lib(dlambda_closed_form(points[0], ms[0]));
    }
    if ps.len() != points.len() {
        return input(Err(anyhow::anyhow!("need one --p per --lambda")));
    }
    let mut atoms = Vec::with_capacity(points.len());
    for ((point, m), p) in points.into_iter().zip(ms).zip(ps) {
        atoms.push(AtomSpec {
            point,
            m: *m,
            polys: input(parse::polys(p))?,
        });
    }
    lib(multi_tuple(&atoms))
}

fn tuple_json(t: &Tuple, kmax: u64, truncation: usize) -> Result<Value> {
    let mut exact_all = true;
    let entries: Vec<Value> = t
        .entries
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let values: Vec<_> = (0..=kmax as i64).map(|k| d.fourier(k)).collect();
            let exact: Option<Vec<String>> = (0..=kmax as i64)
                .map(|k| {
                    d.fourier_exact(k)
                        .and_then(|r| r.ok())
                        .map(|g| g.to_string())
                })
                .collect();
            exact_all &= exact.is_some();
            json!({
                "index": i,
                "closed_form": d.describe(),
                "order": d.order(),
                "fourier": values,
                "exact": exact,
            })
        })
        .collect();
    let cert = lib(allowability(t, truncation))?;
    Ok(json!({
        "length": t.len(),
        "kmax": kmax,
        "entries": entries,
        "exact": exact_all,
        "tolerance": if exact_all { 0.0 } else { 1e-12 },
        "allowability": cert,
        "leading_positive": t.leading_is_positive(),
    }))
}

fn defect_json<I: InnerProduct<f64>>(
    ip: &I,
    order: usize,
    truncation: usize,
    annihilate: Option<&Poly>,
) -> Result<Value> {
    let cls = lib(classify(ip, truncation, order))?;
    let mut doc = serde_json::to_value(&cls)?;
    if let Some(p) = annihilate {
        let worst = lib(annihilation_check(ip, p, truncation))?;
        let scale = lib(ip.inner(p, p))?.norm().max(1.0);
        doc["annihilation"] = json!({
            "worst": worst,
            "tolerance": 1e-8 * scale,
            "annihilated": worst <= 1e-8 * scale,
        });
    }
    Ok(doc)
}

/// Runs one job; `Ok(false)` means a verification failed.
fn run(cli: &Cli) -> Result<(Value, bool)> {
    let tol = cli.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return input(Err(anyhow::anyhow!("tolerance must be positive")));
    }
    let (body, passed) = match &cli.command {
        Command::Kernel {
            measure: m,
            trials,
            seed,
        } => {
            let model = lib(build_model(&measure(&m.atoms, &m.weights)?))?;
            let report = lib(verify_model(&model, *trials, *seed))?;
            let passed = report.passes(tol);
            let mut doc = model_json(&model);
            doc["checks"] = serde_json::to_value(&report)?;
            doc["passed"] = json!(passed);
            (doc, passed)
        }
        Command::Schur { measure: m } => {
            let model = lib(build_model(&measure(&m.atoms, &m.weights)?))?;
            let doc = schur_json(&model)?;
            let passed = model.schur_residual <= tol * model.psd.max_abs().max(1.0);
            (doc, passed)
        }
        Command::Tuple {
            tuple,
            kmax,
            truncation,
        } => {
            let t = tuple_from(&tuple.lambdas, &tuple.ps, &tuple.ms, tuple.closed_form)?;
            (tuple_json(&t, *kmax, *truncation)?, true)
        }
        Command::Defect {
            source,
            order,
            truncation,
            local,
            annihilate,
        } => {
            if *order == 0 {
                return input(Err(anyhow::anyhow!("--order must be at least 1")));
            }
            let p = annihilate.as_deref().map(parse::poly).transpose();
            let p = input(p)?;
            let doc = match (&source.atoms, &source.weights) {
                (Some(a), Some(w)) => {
                    defect_json(&Atomic(measure(a, w)?), *order, *truncation, p.as_ref())?
                }
                (None, None) if *local => {
                    let point = input(parse::circle_point(
                        source.lambdas.first().map_or("", |s| s),
                    ))?;
                    let (Some(pp), Some(&m)) = (source.ps.first(), source.ms.first()) else {
                        return input(Err(anyhow::anyhow!("--local needs --lambda, --p and --m")));
                    };
                    let ip = HigherOrderLocal {
                        lambda: point.value(),
                        p: input(parse::poly(pp))?,
                        m,
                    };
                    defect_json(&ip, *order, *truncation, p.as_ref())?
                }
                (None, None) => {
                    let t = tuple_from(&source.lambdas, &source.ps, &source.ms, false)?;
                    defect_json(&t, *order, *truncation, p.as_ref())?
                }
                _ => return input(Err(anyhow::anyhow!("--atoms and --weights go together"))),
            };
            (doc, true)
        }
        Command::Verify {
            suite,
            atoms,
            weights,
            trials,
            seed,
            timings,
        } => match (suite, atoms, weights) {
            (Some(Suite::Paper), _, _) | (None, None, None) => {
                let report = run_suite();
                for c in &report.checks {
                    eprintln!("{}", c.line());
                }
                let mut doc = serde_json::to_value(&report)?;
                if !timings {
                    for c in doc["checks"].as_array_mut().into_iter().flatten() {
                        if let Some(obj) = c.as_object_mut() {
                            obj.remove("seconds");
                            obj.remove("detail");
                        }
                    }
                }
                doc["passed"] = json!(report.passed());
                let passed = report.passed();
                (doc, passed)
            }
            (None, Some(a), Some(w)) => {
                let model = lib(build_model(&measure(a, w)?))?;
                let report = lib(verify_model(&model, *trials, *seed))?;
                let passed = report.passes(tol);
                (json!({ "report": report, "passed": passed }), passed)
            }
            _ => {
                return input(Err(anyhow::anyhow!(
                    "verify needs --suite or both --atoms and --weights"
                )))
            }
        },
    };
    let command = match cli.command {
        Command::Kernel { .. } => "kernel",
        Command::Schur { .. } => "schur",
        Command::Tuple { .. } => "tuple",
        Command::Defect { .. } => "defect",
        Command::Verify { .. } => "verify",
    };
    let doc = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "tolerance": tol,
        "result": body,
    });
    Ok((doc, passed))
}

fn emit(doc: &Value, output: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)? + "\n";
    match output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli).and_then(|(doc, passed)| {
        emit(&doc, cli.output.as_ref())?;
        Ok(passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("dbr: verification failed");
            ExitCode::from(2)
        }
        Err(e) if e.is::<InputError>() => {
            eprintln!("dbr: {e:#}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("dbr: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
