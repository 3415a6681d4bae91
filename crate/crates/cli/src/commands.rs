use std::io::Write;
use std::path::Path;

use postselect::asym::{beta_from_omega, postselected_beta_tol};
use postselect::channels::{channel_beta, channel_perr, channel_report};
use postselect::composite::{omega_min, CompositeOptions};
use postselect::divergence::{d_omega_tol, d_xi_tol, dmax_both, omega_tol, xi_tol, ExtendedReal};
use postselect::gpt::{cone_additivity_check, cone_dmax_tol, GptState};
use postselect::oracle::{conditional_errors, converse_search, ConverseMode};
use postselect::simulate::{exponent_scan, run_product_strategy, ExperimentConfig};
use postselect::sym::{perr_from_dmax, postselected_perr_tol};
use postselect::{DensityMatrix, Error};
use serde_json::{json, Value};

use crate::input::{matrix_json, Document, FORMAT_VERSION};
use crate::render::{to_value, Printer};
use crate::{Cli, CliError, Command, ConeArgs, GptCommand, PairArgs};

/// Attaining measurements must hit the closed form to this accuracy.
const ACHIEVABILITY_TOL: f64 = 1e-9;
/// Sampled measurements may beat the closed form by at most this much.
const CONVERSE_TOL: f64 = 1e-12;

fn pair(args: &PairArgs) -> Result<(DensityMatrix, DensityMatrix), CliError> {
    let doc = Document::load(&args.file)?;
    let rho = doc.state(&args.rho)?;
    let sigma = doc.state(&args.sigma)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!("{} vs {}", rho.dim(), sigma.dim())).into());
    }
    Ok((rho, sigma))
}

fn cone_pair(args: &ConeArgs) -> Result<(GptState, GptState), CliError> {
    let doc = Document::load(&args.file)?;
    Ok((doc.gpt_state(&args.x)?, doc.gpt_state(&args.y)?))
}

fn check_unit_interval(x: f64, err: fn(f64) -> Error) -> Result<(), CliError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(err(x).into())
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    let out = Printer {
        json: cli.json,
        tol: cli.tol,
    };
    let tol = cli.tol;
    match cli.command {
        Command::Dmax(args) => {
            let (rho, sigma) = pair(&args)?;
            let (fwd, bwd) = dmax_both(&rho, &sigma, tol)?;
            out.report(
                "dmax",
                json!({"dmax_rho_sigma": to_value(&fwd), "dmax_sigma_rho": to_value(&bwd)}),
            )
        }
        Command::Omega(args) => {
            let (rho, sigma) = pair(&args)?;
            let d = d_omega_tol(&rho, &sigma, tol)?;
            let w = omega_tol(&rho, &sigma, tol)?;
            out.report(
                "omega",
                json!({"d_omega": to_value(&d), "omega": to_value(&w)}),
            )
        }
        Command::Xi(args) => {
            let (rho, sigma) = pair(&args)?;
            let d = d_xi_tol(&rho, &sigma, tol)?;
            let x = xi_tol(&rho, &sigma, tol)?;
            out.report("xi", json!({"d_xi": to_value(&d), "xi": to_value(&x)}))
        }
        Command::Asym {
            pair: args,
            eps,
            povm_out,
        } => {
            let (rho, sigma) = pair(&args)?;
            let r = postselected_beta_tol(&rho, &sigma, eps, tol)?;
            if let Some(path) = povm_out {
                let povm = r.achieving_povm.as_ref().ok_or(Error::InfiniteOmega)?;
                write_povm(&path, povm)?;
            }
            out.report(
                "asym",
                json!({
                    "epsilon": eps,
                    "beta_bar": r.beta_bar,
                    "omega": to_value(&r.omega_value),
                    "d_omega": to_value(&d_omega_tol(&rho, &sigma, tol)?),
                    "warnings": r.warnings,
                }),
            )
        }
        Command::Sym { pair: args, p } => {
            let (rho, sigma) = pair(&args)?;
            let r = postselected_perr_tol(&rho, &sigma, p, tol)?;
            out.report("sym", to_value(&r))
        }
        Command::Composite {
            file,
            rho,
            set,
            eps,
        } => {
            check_unit_interval(eps, Error::BadEpsilon)?;
            let doc = Document::load(&file)?;
            let rho = doc.state(&rho)?;
            let set = doc.set(&set)?;
            let opts = CompositeOptions {
                support_tol: tol,
                ..CompositeOptions::default()
            };
            let body = match omega_min(&rho, &set, &opts) {
                Ok(r) => json!({
                    "epsilon": eps,
                    "beta_bar": r.beta_at(eps)?,
                    "omega_min": to_value(&r.omega_min),
                    "d_omega_min": to_value(&r.d_omega_min()),
                    "weights": r.weights,
                    "converged": r.converged,
                    "bisection_steps": r.bisection_steps,
                }),
                // every alternative is perfectly separable from rho
                Err(Error::NoFiniteValue) => json!({
                    "epsilon": eps,
                    "beta_bar": 0.0,
                    "omega_min": to_value(&ExtendedReal::Infinite),
                    "d_omega_min": to_value(&ExtendedReal::Infinite),
                    "weights": Value::Null,
                    "converged": true,
                    "bisection_steps": 0,
                }),
                Err(e) => return Err(e.into()),
            };
            out.report("composite", body)
        }
        Command::Channel {
            file,
            m,
            n,
            eps,
            p,
            copies,
        } => {
            let doc = Document::load(&file)?;
            let (m, n) = (doc.channel(&m)?, doc.channel(&n)?);
            let mut body = to_value(&channel_report(m, n)?);
            body["copies"] = json!(copies);
            match (eps, p) {
                (Some(eps), _) => {
                    body["epsilon"] = json!(eps);
                    body["beta_bar"] = json!(channel_beta(m, n, eps, copies)?);
                }
                (None, Some(p)) => {
                    body["p"] = json!(p);
                    body["perr_bar"] = json!(channel_perr(m, n, p, copies)?);
                }
                (None, None) => unreachable!("clap requires --eps or --p"),
            }
            out.report("channel", body)
        }
        Command::Simulate {
            pair: args,
            eps,
            trials,
            seed,
            copies,
            prior,
        } => {
            let (rho, sigma) = pair(&args)?;
            let cfg = ExperimentConfig::new(trials, seed)
                .with_prior(prior)
                .with_copies(copies);
            let result = run_product_strategy(&rho, &sigma, eps, &cfg)?;
            out.csv(&result.csv_rows())
        }
        Command::Scan {
            pair: args,
            eps,
            n_max,
        } => {
            if n_max == 0 {
                return Err(Error::BadCopies.into());
            }
            let (rho, sigma) = pair(&args)?;
            let ns: Vec<usize> = (1..=n_max).collect();
            out.csv(&exponent_scan(&rho, &sigma, eps, &ns)?)
        }
        Command::Verify {
            pair: args,
            eps,
            p,
            trials,
            seed,
        } => {
            let (rho, sigma) = pair(&args)?;
            verify(&out, &rho, &sigma, eps, p, trials, seed)
        }
        Command::Gpt(cmd) => gpt(&out, cmd),
    }
}

fn write_povm(path: &Path, povm: &postselect::ThreeOutcomePovm) -> Result<(), CliError> {
    let doc = json!({
        "version": FORMAT_VERSION,
        "matrices": {
            "m1": matrix_json(povm.m1()),
            "m2": matrix_json(povm.m2()),
            "m_inconclusive": matrix_json(povm.m_inconclusive()),
        }
    });
    let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

struct Check {
    name: &'static str,
    pass: bool,
    value: f64,
    closed_form: f64,
}

fn verify(
    out: &Printer,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    p: Option<f64>,
    trials: usize,
    seed: u64,
) -> Result<(), CliError> {
    let mut checks = Vec::new();

    let r = postselected_beta_tol(rho, sigma, eps, out.tol)?;
    let povm = r.achieving_povm.as_ref().ok_or(Error::InfiniteOmega)?;
    let ce = conditional_errors(povm, rho, sigma)?;
    let (alpha, beta) = (ce.alpha_bar()?, ce.beta_bar()?);
    checks.push(Check {
        name: "asym achievability",
        pass: alpha <= eps + ACHIEVABILITY_TOL && (beta - r.beta_bar).abs() <= ACHIEVABILITY_TOL,
        value: beta,
        closed_form: r.beta_bar,
    });
    let conv = converse_search(rho, sigma, ConverseMode::Asymmetric { eps }, trials, seed)?;
    checks.push(Check {
        name: "asym converse",
        pass: conv.respects_bound(CONVERSE_TOL),
        value: conv.best,
        closed_form: conv.closed_form,
    });

    if let Some(p) = p {
        let s = postselected_perr_tol(rho, sigma, p, out.tol)?;
        let povm = s.achieving_povm.as_ref().ok_or(Error::InfiniteXi)?;
        let got = conditional_errors(povm, rho, sigma)?.perr_bar(p)?;
        checks.push(Check {
            name: "sym achievability",
            pass: (got - s.perr_bar).abs() <= ACHIEVABILITY_TOL,
            value: got,
            closed_form: s.perr_bar,
        });
        let conv = converse_search(rho, sigma, ConverseMode::Symmetric { p }, trials, seed)?;
        checks.push(Check {
            name: "sym converse",
            pass: conv.respects_bound(CONVERSE_TOL),
            value: conv.best,
            closed_form: conv.closed_form,
        });
    }

    if out.json {
        let list: Vec<Value> = checks
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass, "value": c.value, "closed_form": c.closed_form}))
            .collect();
        out.report(
            "verify",
            json!({"epsilon": eps, "p": p, "trials": trials, "seed": seed, "checks": list}),
        )?;
    } else {
        let mut stdout = std::io::stdout().lock();
        for c in &checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            writeln!(
                stdout,
                "{tag} {}: value {} closed form {}",
                c.name,
                crate::render::human_number(c.value),
                crate::render::human_number(c.closed_form)
            )?;
        }
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(format!(
            "failed: {}",
            failed.join(", ")
        )))
    }
}

fn gpt(out: &Printer, cmd: GptCommand) -> Result<(), CliError> {
    let both = |args: &ConeArgs| -> Result<(ExtendedReal, ExtendedReal), CliError> {
        let (x, y) = cone_pair(args)?;
        Ok((
            cone_dmax_tol(&x, &y, out.tol)?,
            cone_dmax_tol(&y, &x, out.tol)?,
        ))
    };
    match cmd {
        GptCommand::Dmax(args) => {
            let (a, b) = both(&args)?;
            out.report(
                "gpt dmax",
                json!({"dmax_x_y": to_value(&a), "dmax_y_x": to_value(&b)}),
            )
        }
        GptCommand::Omega(args) => {
            let (a, b) = both(&args)?;
            let d = (a + b).map(|d| d.max(0.0));
            out.report(
                "gpt omega",
                json!({"d_omega": to_value(&d), "omega": to_value(&(a + b).exp2())}),
            )
        }
        GptCommand::Xi(args) => {
            let d = {
                let (a, b) = both(&args)?;
                a.max(b)
            };
            out.report(
                "gpt xi",
                json!({"d_xi": to_value(&d), "xi": to_value(&d.exp2())}),
            )
        }
        GptCommand::Asym { cone, eps } => {
            check_unit_interval(eps, Error::BadEpsilon)?;
            let (a, b) = both(&cone)?;
            let omega = (a + b).exp2();
            out.report(
                "gpt asym",
                json!({"epsilon": eps, "beta_bar": beta_from_omega(eps, omega), "omega": to_value(&omega)}),
            )
        }
        GptCommand::Sym { cone, p } => {
            check_unit_interval(p, Error::BadPrior)?;
            let (a, b) = both(&cone)?;
            out.report(
                "gpt sym",
                json!({"p": p, "perr_bar": perr_from_dmax(p, a, b, 1)}),
            )
        }
        GptCommand::Additivity { cone, n } => {
            let (x, y) = cone_pair(&cone)?;
            let (tensor, scaled) = cone_additivity_check(&x, &y, n)?;
            out.report(
                "gpt additivity",
                json!({"n": n, "dmax_tensor_power": to_value(&tensor), "n_times_dmax": to_value(&scaled)}),
            )
        }
    }
}
