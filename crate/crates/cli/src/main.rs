//! `pearson`: chi-squared tests, distribution queries, the verification
//! suites and mosaic rendering from the command line.
//!
//! Exit codes: 0 success, 2 bad input, 3 degenerate margin, 4 unsupported
//! table shape, 5 verification failure.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use chisq::distributions::ChiSquared;
use chisq::engine::{goodness_of_fit_test, independence_test, ResidualTable, TestResult};
use chisq::harness::{run_suite, ConvergenceConfig, SuiteId, SuiteReport};
use chisq::mosaic::{layout_with, render_svg, BandFormula, BandMode, MosaicConfig, MosaicScene};
use chisq::tables::{ContingencyTable, CountVector, ProbVector};
use chisq::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

const EXIT_INPUT: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_SHAPE: u8 = 4;
const EXIT_VERIFY: u8 = 5;

/// Tolerance on the sum of `--probs` before it is renormalized.
const PROBS_SUM_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "pearson", version, about = "Pearson chi-squared tests and friends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Independence test on a contingency table (CSV file or "-" for stdin).
    Test {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Goodness-of-fit test of one row of counts against --probs.
    Gof {
        /// Counts as "60,40", a file holding one CSV line, or "-" for stdin.
        counts: String,
        /// Comma-separated probabilities, same length as the counts.
        #[arg(long, value_delimiter = ',', required = true)]
        probs: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Render a mosaic display as SVG.
    Mosaic {
        input: String,
        /// Output path; "-" writes the SVG to stdout.
        #[arg(short, long, default_value = "-")]
        output: String,
        /// Draw the confidence band (2x2 tables only).
        #[arg(long, conflicts_with = "no_band")]
        band: bool,
        /// Never draw the band. Without either flag the band is drawn for 2x2 tables.
        #[arg(long)]
        no_band: bool,
        #[arg(long, value_enum, default_value_t = FormulaArg::Wald)]
        band_formula: FormulaArg,
        #[arg(long)]
        title: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run verification suites.
    Verify {
        /// P-main, P1 through P7, or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = ConvergenceConfig::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = ConvergenceConfig::DEFAULT_N)]
        n: u64,
        #[arg(long, default_value_t = ConvergenceConfig::DEFAULT_REPLICATIONS)]
        replications: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
        probs: Vec<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Chi-squared distribution queries.
    Dist {
        #[arg(value_enum)]
        query: DistQuery,
        /// x for cdf, probability for quantile.
        #[arg(allow_negative_numbers = true)]
        value: f64,
        #[arg(long)]
        dof: u32,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaArg {
    Wald,
    Literal,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DistQuery {
    Cdf,
    Quantile,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Domain(_) => EXIT_INPUT,
            Error::DegenerateMargin(_) => EXIT_DEGENERATE,
            Error::UnsupportedShape(_) => EXIT_SHAPE,
            Error::Sampling(_) => EXIT_VERIFY,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test { input, common } => cmd_test(&input, &common),
        Command::Gof { counts, probs, common } => cmd_gof(&counts, &probs, &common),
        Command::Mosaic {
            input,
            output,
            band,
            no_band,
            band_formula,
            title,
            common,
        } => {
            let mode = match (band, no_band) {
                (true, _) => BandMode::On,
                (_, true) => BandMode::Off,
                _ => BandMode::Auto,
            };
            let formula = match band_formula {
                FormulaArg::Wald => BandFormula::Wald,
                FormulaArg::Literal => BandFormula::Literal,
            };
            cmd_mosaic(&input, &output, mode, formula, title, &common)
        }
        Command::Verify {
            suite,
            seed,
            n,
            replications,
            probs,
            json,
        } => cmd_verify(&suite, seed, n, replications, &probs, json),
        Command::Dist { query, value, dof, json } => cmd_dist(query, dof, value, json),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_source(input: &str) -> Result<String, Failure> {
    if input == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| input_error(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(input).map_err(|e| input_error(format!("reading {input}: {e}")))
    }
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(input_error(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn decision(r: &TestResult, null: &str) -> String {
    if r.reject_null {
        format!("reject {null} at alpha = {}", r.alpha)
    } else {
        format!("fail to reject {null} at alpha = {}", r.alpha)
    }
}

fn print_test(r: &TestResult, null: &str) {
    println!("statistic  {:.6}", r.statistic);
    println!("dof        {}", r.dof);
    println!("p-value    {:.6e}", r.p_value);
    println!("critical   {:.6}", r.critical_value());
    println!("decision   {}", decision(r, null));
}

fn test_json(r: &TestResult, residuals: serde_json::Value, warning: Option<String>) -> serde_json::Value {
    json!({
        "statistic": r.statistic,
        "dof": r.dof,
        "p_value": r.p_value,
        "alpha": r.alpha,
        "critical_value": r.critical_value(),
        "reject": r.reject_null,
        "residuals": residuals,
        "warning": warning,
    })
}

fn cmd_test(input: &str, common: &Common) -> Outcome {
    check_alpha(common.alpha)?;
    let table = ContingencyTable::parse(&read_source(input)?)?;
    let (r, residuals): (TestResult, ResidualTable) = independence_test(&table, common.alpha)?;
    let warning = residuals.small_sample_warning();
    if common.json {
        print_json(&test_json(&r, json!(residuals.residual_rows()), warning));
    } else {
        print_test(&r, "independence");
        println!("residuals");
        for (label, row) in table.row_labels().iter().zip(residuals.residual_rows()) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:+.4}")).collect();
            println!("  {label}: {}", cells.join(" "));
        }
        if let Some(w) = warning {
            eprintln!("warning: {w}");
        }
    }
    Ok(0)
}

fn parse_counts(text: &str) -> Result<Vec<u64>, Failure> {
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    line.split(',')
        .enumerate()
        .map(|(i, field)| {
            field.trim().parse::<u64>().map_err(|_| {
                input_error(format!("count {} ({:?}) is not a non-negative integer", i + 1, field.trim()))
            })
        })
        .collect()
}

fn looks_inline(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || c == ',' || c.is_whitespace())
}

fn cmd_gof(source: &str, probs: &[f64], common: &Common) -> Outcome {
    check_alpha(common.alpha)?;
    let text = if looks_inline(source) { source.to_owned() } else { read_source(source)? };
    let counts = CountVector::new(parse_counts(&text)?);
    if counts.len() != probs.len() {
        return Err(input_error(format!(
            "{} counts but {} probabilities",
            counts.len(),
            probs.len()
        )));
    }
    let sum: f64 = probs.iter().sum();
    if !((sum - 1.0).abs() <= PROBS_SUM_TOL) {
        return Err(input_error(format!("--probs sum to {sum}, not 1")));
    }
    let p = ProbVector::new(probs.iter().map(|v| v / sum).collect())?;
    let r = goodness_of_fit_test(&counts, &p, common.alpha)?;
    let n = counts.total() as f64;
    let residuals: Vec<f64> = counts
        .counts()
        .iter()
        .zip(p.as_slice())
        .map(|(&c, &pi)| (c as f64 - n * pi) / (n * pi).sqrt())
        .collect();
    let warning = residuals
        .iter()
        .zip(p.as_slice())
        .any(|(_, &pi)| n * pi < chisq::engine::SMALL_EXPECTED)
        .then(|| "some expected counts are below 5; the chi-squared approximation may be poor".to_owned());
    if common.json {
        print_json(&test_json(&r, json!(residuals), warning));
    } else {
        print_test(&r, "the hypothesized probabilities");
        let cells: Vec<String> = residuals.iter().map(|v| format!("{v:+.4}")).collect();
        println!("residuals  {}", cells.join(" "));
        if let Some(w) = warning {
            eprintln!("warning: {w}");
        }
    }
    Ok(0)
}

fn band_summary(scene: &MosaicScene) -> Option<String> {
    let band = scene.ci_band.as_ref()?;
    let verdict = if band.boundary_inside_band() { "inside" } else { "outside" };
    let mut s = format!(
        "boundary {verdict} band (p_hat {:.4}, half-width {:.4})",
        band.p_hat, band.half_width
    );
    for c in &band.columns {
        s.push_str(&format!(
            "\n  column {}: boundary {:.4} {}",
            c.col_label,
            c.boundary,
            if c.inside { "inside" } else { "outside" }
        ));
    }
    Some(s)
}

fn cmd_mosaic(
    input: &str,
    output: &str,
    band: BandMode,
    band_formula: BandFormula,
    title: Option<String>,
    common: &Common,
) -> Outcome {
    check_alpha(common.alpha)?;
    let table = ContingencyTable::parse(&read_source(input)?)?;
    let config = MosaicConfig {
        alpha: common.alpha,
        band,
        band_formula,
        title,
        ..MosaicConfig::default()
    };
    let scene = layout_with(&table, &config)?;
    let svg = render_svg(&scene);
    let to_stdout = output == "-";
    if to_stdout {
        io::stdout()
            .write_all(svg.as_bytes())
            .map_err(|e| input_error(format!("writing stdout: {e}")))?;
    } else {
        fs::write(PathBuf::from(output), &svg).map_err(|e| input_error(format!("writing {output}: {e}")))?;
    }

    if common.json {
        let report = json!({
            "output": output,
            "tiles": scene.tiles.len(),
            "band": scene.ci_band.as_ref().map(|b| json!({
                "p_hat": b.p_hat,
                "half_width": b.half_width,
                "formula": b.formula,
                "boundary_inside_band": b.boundary_inside_band(),
                "columns": b.columns,
            })),
        });
        let text = serde_json::to_string_pretty(&report).expect("reports serialize");
        if to_stdout {
            eprintln!("{text}");
        } else {
            println!("{text}");
        }
    } else if let Some(summary) = band_summary(&scene) {
        if to_stdout {
            eprintln!("{summary}");
        } else {
            println!("{summary}");
        }
    }
    Ok(0)
}

fn cmd_verify(suite: &str, seed: u64, n: u64, replications: usize, probs: &[f64], json: bool) -> Outcome {
    let suites: Vec<SuiteId> = if suite.eq_ignore_ascii_case("all") {
        SuiteId::ALL.to_vec()
    } else {
        vec![suite.parse()?]
    };
    let config = ConvergenceConfig {
        p: ProbVector::new(probs.to_vec())?,
        n,
        replications,
        seed,
    };
    let reports = suites
        .iter()
        .map(|&id| run_suite(id, &config))
        .collect::<Result<Vec<SuiteReport>, Error>>()?;
    let ok = reports.iter().all(SuiteReport::all_passed);

    if json {
        match reports.as_slice() {
            [single] => print_json(single),
            many => print_json(&many),
        }
    } else {
        for r in &reports {
            print_suite(r);
        }
    }
    Ok(if ok { 0 } else { EXIT_VERIFY })
}

fn print_suite(r: &SuiteReport) {
    let verdict = if r.all_passed() { "PASS" } else { "FAIL" };
    match (r.ks_distance, r.threshold) {
        (Some(ks), Some(th)) => println!("{verdict} {}: ks {ks:.6} (threshold {th:.6})", r.suite),
        _ => println!("{verdict} {}", r.suite),
    }
    for c in &r.checks {
        let value = c.value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        let tol = c.tolerance.map(|v| format!(" <= {v:.1e}")).unwrap_or_default();
        println!("    {:?} {} {value}{tol}", c.status, c.name);
    }
    if let Some(ev) = &r.eigenvalues {
        let shown: Vec<String> = ev.iter().map(|v| format!("{v:.6}")).collect();
        println!("    eigenvalues [{}]", shown.join(", "));
    }
}

/// `v` rounded to 12 significant digits.
fn significant12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-5..12).contains(&magnitude) {
        return format!("{v:.11e}");
    }
    format!("{v:.*}", (11 - magnitude).max(0) as usize)
}

fn cmd_dist(query: DistQuery, dof: u32, value: f64, json: bool) -> Outcome {
    let d = ChiSquared::new(dof)?;
    let result = match query {
        DistQuery::Cdf => {
            if value.is_nan() {
                return Err(input_error("x must be a number".into()));
            }
            d.cdf(value)
        }
        DistQuery::Quantile => d.quantile(value)?,
    };
    if json {
        print_json(&json!({ "query": query, "dof": dof, "argument": value, "value": result }));
    } else {
        println!("{}", significant12(result));
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(significant12(3.841458820694124), "3.84145882069");
        assert_eq!(significant12(0.5), "0.500000000000");
        assert_eq!(significant12(123.456), "123.456000000");
        assert_eq!(significant12(1e-7), "1.00000000000e-7");
    }

    #[test]
    fn inline_counts() {
        assert!(looks_inline("60,40"));
        assert!(!looks_inline("counts.csv"));
        assert!(!looks_inline("-"));
        assert_eq!(parse_counts("60, 40\n").ok().unwrap(), vec![60, 40]);
        assert!(parse_counts("6x,40").is_err());
    }
}
