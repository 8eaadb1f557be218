use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use strands_core::seed::stage;
use strands_core::sim::{
    build_scenario, build_scenario_with_n, fit_method, fmt_f64, replicates_to_csv, run_experiment, sample_dataset,
    split_eval, Method, MethodDetail, MethodSettings, SimScenario,
};
use strands_core::{
    correlation_cluster, no_cluster, random_cluster, step_diagnostic, BaseLearner, Clustering, CvConfig, Dataset,
    SeedStream,
};

use crate::args::{ClusterArgs, ClusterModeArg, DiagnosticArgs, FitArgs, Format, LearnerArg, SimulateArgs};
use crate::config::{csv_preamble, effective_config};
use crate::error::CliError;
use crate::input::Table;

type Config = BTreeMap<String, String>;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn to_json(config: &Config, body: Value) -> String {
    let mut doc = json!({ "config": config });
    if let (Value::Object(dst), Value::Object(src)) = (&mut doc, body) {
        dst.extend(src);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialise");
    s.push('\n');
    s
}

fn load_scenario(name: &str, n: Option<usize>) -> Result<SimScenario, CliError> {
    Ok(match n {
        Some(n) => build_scenario_with_n(name, n)?,
        None => build_scenario(name)?,
    })
}

/// Reject settings a method would only trip over mid-run.
fn check_settings(methods: &[Method], settings: &MethodSettings, p: usize) -> Result<(), CliError> {
    if methods.is_empty() {
        return Err(CliError::Usage("no methods requested".into()));
    }
    if methods.contains(&Method::RLasso) {
        settings.rlasso_config(p).validate(p)?;
    }
    settings
        .strands_config(BaseLearner::Lasso, settings.clustering_mode)
        .validate()?;
    Ok(())
}

fn input_table(path: Option<&Path>, response: &str) -> Result<Table, CliError> {
    let path = path.ok_or_else(|| CliError::Usage("--input is required".into()))?;
    Table::read(path, response)
}

fn method_seed(master: &SeedStream, method: Method) -> SeedStream {
    master.derive_path(&[stage::SIM_METHOD, 0, method.stream_index()])
}

pub fn simulate(args: &SimulateArgs) -> Result<Vec<PathBuf>, CliError> {
    let config = effective_config("simulate", args);
    let settings = args.method.settings().map_err(CliError::Usage)?;
    let scenario = load_scenario(&args.scenario, args.n)?;
    check_settings(&args.methods, &settings, scenario.p)?;
    let experiment = run_experiment(&scenario, &args.methods, args.replicates, &settings, args.method.seed)?;

    let out = &args.runtime.out;
    let preamble = csv_preamble(&config);
    let mut written = Vec::new();
    if args.formats.contains(&Format::Csv) {
        written.push(write_file(out, "metrics.csv", &(preamble.clone() + &experiment.report.to_csv()))?);
        written.push(write_file(out, "replicates.csv", &(preamble + &replicates_to_csv(&experiment.records)))?);
    }
    if args.formats.contains(&Format::Json) {
        let body = json!({ "report": experiment.report, "replicates": experiment.records });
        written.push(write_file(out, "metrics.json", &to_json(&config, body))?);
    }
    Ok(written)
}

pub fn fit(args: &FitArgs) -> Result<Vec<PathBuf>, CliError> {
    let config = effective_config("fit", args);
    let settings = args.method.settings().map_err(CliError::Usage)?;
    let table = input_table(args.input.input.as_deref(), &args.input.response)?;
    let dataset = table.dataset()?;
    check_settings(&args.methods, &settings, table.p())?;
    if args.split_eval == Some(0) {
        return Err(CliError::Usage("--split-eval needs at least one split".into()));
    }
    let master = SeedStream::new(args.method.seed);

    let mut fits = Vec::new();
    for &method in &args.methods {
        let seed = method_seed(&master, method);
        let fit = fit_method(method, &dataset, &settings, &seed).map_err(|e| table.named(e))?;
        let meta = dataset.meta();
        let original = meta.to_original_scale(&fit.coefficients);
        let intercept = meta.y_mean
            - original
                .iter()
                .zip(&meta.column_means)
                .map(|(b, m)| b * m)
                .sum::<f64>();

        let (pi_hat, theta, importance, lambda) = match &fit.detail {
            MethodDetail::Single { lambda } => (None, None, None, *lambda),
            MethodDetail::Strands(r) => (Some(r.pi_hat.clone()), Some(r.step1.theta.clone()), None, None),
            MethodDetail::RandomLasso(r) => (None, None, Some(r.importance.clone()), None),
        };
        let variables: Vec<Value> = (0..table.p())
            .map(|j| {
                let mut v = json!({
                    "name": table.names[j],
                    "coefficient": original[j],
                    "standardized_coefficient": fit.coefficients.values()[j],
                    "selected": fit.selected.contains(&j),
                });
                let obj = v.as_object_mut().unwrap();
                if let Some(pi) = &pi_hat {
                    obj.insert("pi_hat".into(), json!(pi[j]));
                }
                if let Some(t) = &theta {
                    obj.insert("theta".into(), json!(t[j]));
                }
                if let Some(imp) = &importance {
                    obj.insert("importance".into(), json!(imp[j]));
                }
                v
            })
            .collect();
        let mut entry = json!({
            "method": method,
            "intercept": intercept,
            "selected": fit.selected.iter().map(|&j| &table.names[j]).collect::<Vec<_>>(),
            "variables": variables,
        });
        let obj = entry.as_object_mut().unwrap();
        if let Some(l) = lambda {
            obj.insert("lambda".into(), json!(l));
        }
        if let Some(repeats) = args.split_eval {
            let report = split_eval(table.x.view(), table.y.view(), repeats, &seed, |ds: &Dataset, s| {
                Ok(fit_method(method, ds, &settings, s)?.coefficients)
            })
            .map_err(|e| table.named(e))?;
            obj.insert(
                "split_eval".into(),
                json!({
                    "repeats": repeats,
                    "n_test": report.n_test,
                    "mean": report.mean,
                    "se": report.se,
                    "errors": report.errors,
                }),
            );
        }
        fits.push(entry);
    }
    let body = json!({
        "n": dataset.n(),
        "p": dataset.p(),
        "response": table.response,
        "predictors": table.names,
        "fits": fits,
    });
    Ok(vec![write_file(&args.runtime.out, "fit.json", &to_json(&config, body))?])
}

fn read_template(path: &Path) -> Result<Clustering, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read template {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("template {} is not JSON: {e}", path.display())))?;
    // Either a bare clustering or a cluster-report artifact.
    let inner = value.get("clustering").cloned().unwrap_or(value);
    serde_json::from_value(inner)
        .map_err(|e| CliError::Usage(format!("template {} is not a clustering: {e}", path.display())))
}

pub struct ClusterSummary {
    pub k: usize,
    pub group_sizes: Vec<usize>,
    pub rho0: f64,
}

pub fn cluster_report(args: &ClusterArgs) -> Result<(Vec<PathBuf>, ClusterSummary), CliError> {
    let config = effective_config("cluster-report", args);
    if !(args.rho0 > 0.0 && args.rho0 <= 1.0) {
        return Err(CliError::Usage(format!("rho0 must lie in (0, 1], got {}", args.rho0)));
    }
    let cv = CvConfig::new(args.folds)?;
    // Check the declared contract before touching the data.
    let template = match (args.mode, &args.template) {
        (ClusterModeArg::Random, None) => {
            return Err(CliError::Usage("--mode random requires --template".into()));
        }
        (ClusterModeArg::Random, Some(path)) => Some(read_template(path)?),
        _ => None,
    };
    let table = input_table(args.input.input.as_deref(), &args.input.response)?;
    let dataset = table.dataset()?;
    let master = SeedStream::new(args.seed);
    let clustering = match args.mode {
        ClusterModeArg::Correlation => {
            let learner = match args.learner {
                LearnerArg::Lasso => BaseLearner::Lasso,
                LearnerArg::Adalasso => BaseLearner::AdaptiveLasso { tau: args.tau },
                LearnerArg::Enet => BaseLearner::ElasticNet { alpha: args.enet_alpha },
            };
            correlation_cluster(&dataset, &learner, &cv, args.rho0, &master.derive(stage::STEP0))
                .map_err(|e| table.named(e))?
                .0
        }
        ClusterModeArg::Random => {
            let template = template.expect("checked above");
            template
                .validate(table.p())
                .map_err(|e| CliError::Usage(format!("template does not fit the data: {e}")))?;
            random_cluster(&template, &master.derive(stage::RANDOM_CLUSTER))
        }
        ClusterModeArg::None => Clustering {
            rho0: args.rho0,
            ..no_cluster(table.p())
        },
    };
    let summary = ClusterSummary {
        k: clustering.k_count,
        group_sizes: clustering.group_sizes(),
        rho0: clustering.rho0,
    };
    let names: Vec<Vec<&str>> = clustering
        .groups
        .iter()
        .map(|g| g.iter().map(|&j| table.names[j].as_str()).collect())
        .collect();
    let body = json!({
        "clustering": clustering,
        "group_names": names,
        "summary": { "k": summary.k, "group_sizes": summary.group_sizes, "rho0": summary.rho0 },
    });
    let path = write_file(&args.runtime.out, "clustering.json", &to_json(&config, body))?;
    Ok((vec![path], summary))
}

pub fn diagnostic(args: &DiagnosticArgs) -> Result<Vec<PathBuf>, CliError> {
    let config = effective_config("diagnostic", args);
    let settings = args.settings.settings().map_err(CliError::Usage)?;
    if matches!(args.method, Method::Lasso | Method::Enet | Method::AdaLasso | Method::RLasso) {
        return Err(CliError::Usage(format!("diagnostic needs an ensemble method, got {}", args.method)));
    }
    let master = SeedStream::new(args.settings.seed);
    let (dataset, truth, table) = match &args.scenario {
        Some(name) => {
            let scenario = load_scenario(name, args.n)?;
            let draw = sample_dataset(&scenario, &master.derive_path(&[stage::SIM_DATA, 0]))?;
            (draw.dataset, Some(draw.truth), None)
        }
        None => {
            if args.n.is_some() {
                return Err(CliError::Usage("--n applies to --scenario input only".into()));
            }
            let table = input_table(args.input.input.as_deref(), &args.input.response)?;
            (table.dataset()?, None, Some(table))
        }
    };
    check_settings(&[args.method], &settings, dataset.p())?;
    let named = |e: strands_core::Error| match &table {
        Some(t) => t.named(e),
        None => e.into(),
    };
    let fit = fit_method(args.method, &dataset, &settings, &method_seed(&master, args.method)).map_err(named)?;
    let MethodDetail::Strands(result) = &fit.detail else {
        unreachable!("ensemble methods return ensemble details")
    };
    let rows = step_diagnostic(result, truth.as_deref());

    let mut csv = csv_preamble(&config);
    csv.push_str("j,theta,pi_hat,alpha,abs_beta");
    csv.push_str(if truth.is_some() { ",relevant\n" } else { "\n" });
    for r in &rows {
        let _ = write!(
            csv,
            "{},{},{},{},{}",
            r.j + 1,
            fmt_f64(r.theta),
            fmt_f64(r.pi_hat),
            fmt_f64(r.alpha),
            fmt_f64(r.abs_beta)
        );
        if let Some(rel) = r.relevant {
            let _ = write!(csv, ",{rel}");
        }
        csv.push('\n');
    }
    Ok(vec![write_file(&args.runtime.out, "diagnostic.csv", &csv)?])
}
