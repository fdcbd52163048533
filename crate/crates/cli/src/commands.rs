use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use quadclass::bubble::{
    self, bubble_chart_export, frontier_table, parse_indices, value_distribution, ClassPair, PureConstraint,
    SearchConfig, SearchMode,
};
use quadclass::classify::{
    self, ablation_csv, ablation_table, gbdt_train, parse_features, permutation_importance, Formula, FeatureMatrix,
    GbdtConfig, MetricsReport, ThresholdPredictor, ABLATION_ROWS,
};
use quadclass::dataset::{self, balanced_sample, Dataset, GenerateConfig};
use quadclass::{genus, pca};

use crate::manifest::{write_json, Run};
use crate::{
    AblationArgs, BubbleArgs, ClassifyArgs, Context, Failure, FormulaArg, GbdtArgs, GenerateArgs, ImportArgs, Mode,
    PcaArgs, StatsArgs, VerifyArgs,
};

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

fn print<T: Serialize>(value: &T, ctx: &Context) -> Result<(), Failure> {
    let text = if ctx.pretty { serde_json::to_string_pretty(value)? } else { serde_json::to_string(value)? };
    println!("{text}");
    Ok(())
}

fn load(dir: &Path) -> Result<Dataset, Failure> {
    dataset::load(dir).map_err(|e| match e {
        quadclass::Error::Io(io) => usage(format!("cannot read dataset {}: {io}", dir.display())),
        other => other.into(),
    })
}

fn prepare_out(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn pair(classes: &[u32]) -> Result<ClassPair, Failure> {
    match classes {
        [i, j] => Ok(ClassPair::new(*i, *j)?),
        _ => Err(usage(format!("expected two classes i,j, got {classes:?}"))),
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| usage(format!("{what} needs --seed")))
}

pub fn generate(args: &GenerateArgs, ctx: &Context) -> Result<(), Failure> {
    let run = Run::start("generate", args, None);
    let config = GenerateConfig {
        max_disc: args.max_d,
        classes: args.classes.iter().copied().collect(),
        bound: args.coeff_bound,
    };
    let ds = dataset::generate(&config).map_err(|e| usage(e.to_string()))?;
    dataset::save(&ds, &args.out)?;
    run.finish(&args.out, Some(&args.out), ctx)?;
    #[derive(Serialize)]
    struct Out<'a> {
        records: usize,
        out: &'a Path,
    }
    print(&Out { records: ds.len(), out: &args.out }, ctx)
}

fn parse_triple(spec: &str) -> Result<bubble::Triple, Failure> {
    let parts: Vec<usize> = spec
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| usage(format!("bad triple `{spec}`"))))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| usage(format!("a triple needs three indices, got `{spec}`")))
}

pub fn bubble(args: &BubbleArgs, ctx: &Context) -> Result<(), Failure> {
    let seed = match args.mode {
        Mode::Sampled => Some(require_seed(args.seed, "sampled mode")?),
        Mode::Exact => args.seed,
    };
    let run = Run::start("bubble", args, seed);
    let ds = load(&args.dataset)?;
    let classes = pair(&args.classes)?;
    prepare_out(&args.out)?;

    if let Some(spec) = &args.chart {
        let triple = parse_triple(spec)?;
        let dist = value_distribution(&ds, classes, triple)?;
        bubble_chart_export(&dist, BufWriter::new(File::create(args.out.join("chart.csv"))?))?;
        run.finish(&args.out, Some(&args.dataset), ctx)?;
        #[derive(Serialize)]
        struct Out {
            triple: bubble::Triple,
            bubbles: usize,
        }
        return print(&Out { triple, bubbles: dist.len() }, ctx);
    }

    let indices = parse_indices(&args.indices, ds.bound())?;
    if let Some(max_pure) = args.frontier {
        let constraints: Vec<PureConstraint> = (0..=max_pure)
            .flat_map(|c| [PureConstraint::Exactly(c), PureConstraint::AtMost(c)])
            .collect();
        let table = frontier_table(&ds, classes, &indices, &constraints)?;
        write_json(&args.out.join("frontier.json"), &table, ctx.pretty)?;
        run.finish(&args.out, Some(&args.dataset), ctx)?;
        #[derive(Serialize)]
        struct Row {
            constraint: PureConstraint,
            max_pure_j: Option<u64>,
            witnesses: usize,
        }
        let rows: Vec<Row> = table
            .iter()
            .map(|f| Row { constraint: f.constraint, max_pure_j: f.max_pure_j, witnesses: f.witnesses.len() })
            .collect();
        return print(&rows, ctx);
    }

    let mode = match args.mode {
        Mode::Exact => SearchMode::Exact { budget: args.budget },
        Mode::Sampled => SearchMode::Sampled {
            budget: args.budget.ok_or_else(|| usage("sampled mode needs --budget"))?,
            seed: seed.unwrap_or_default(),
        },
    };
    let config = SearchConfig { classes, indices, mode, top_k: args.top_k };
    let outcome = bubble::search(&ds, &config)?;
    bubble::write_results_jsonl(&outcome, BufWriter::new(File::create(args.out.join("results.jsonl"))?))?;
    run.finish(&args.out, Some(&args.dataset), ctx)?;
    #[derive(Serialize)]
    struct Out<'a> {
        mode: bubble::ResultMode,
        evaluated: u64,
        total_triples: u64,
        best: Option<&'a bubble::TripleStats>,
    }
    print(
        &Out {
            mode: outcome.mode,
            evaluated: outcome.evaluated,
            total_triples: outcome.total_triples,
            best: outcome.results.first(),
        },
        ctx,
    )
}

pub fn verify_genus(args: &VerifyArgs, ctx: &Context) -> Result<(), Failure> {
    let run = Run::start("verify-genus", args, None);
    let ds = load(&args.dataset)?;
    let report = genus::verify_dataset(&ds);
    if let Some(out) = &args.out {
        prepare_out(out)?;
        write_json(&out.join("genus.json"), &report, ctx.pretty)?;
        run.finish(out, Some(&args.dataset), ctx)?;
    }
    println!("records: {}", report.records);
    for (lemma, t) in &report.tallies {
        println!(
            "{}: applicable {}, satisfied {}, violated {}",
            serde_json::to_string(lemma)?.trim_matches('"'),
            t.applicable,
            t.satisfied,
            t.violated
        );
    }
    println!("violations: {}", report.violation_count);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{} genus violations", report.violation_count)))
    }
}

fn gbdt_config(args: &GbdtArgs, seed: u64) -> GbdtConfig {
    GbdtConfig {
        trees: args.trees,
        max_depth: args.depth,
        learning_rate: args.learning_rate,
        min_samples_leaf: args.min_samples_leaf,
        lambda: args.lambda,
        subsample: args.subsample,
        seed,
    }
}

/// Rarer class first, ties by label.
fn balance(ds: &Dataset, seed: u64) -> Result<Dataset, Failure> {
    let classes: Vec<u32> = ds.label_classes().into_iter().collect();
    let [a, b] = classes[..] else {
        return Err(usage(format!("balancing needs exactly two classes, found {classes:?}")));
    };
    let count = |h: u32| ds.records().iter().filter(|r| r.h == h).count();
    let (rare, common) = if count(b) < count(a) { (b, a) } else { (a, b) };
    Ok(balanced_sample(ds, rare, common, seed)?)
}

fn write_report(out: &Path, name: &str, report: &MetricsReport) -> Result<(), Failure> {
    fs::write(out.join(format!("{name}calibration.csv")), report.calibration_csv())?;
    fs::write(out.join(format!("{name}confusion.csv")), report.confusion_csv())?;
    Ok(())
}

pub fn classify(args: &ClassifyArgs, ctx: &Context) -> Result<(), Failure> {
    let seed = if args.gbdt || args.balanced {
        Some(require_seed(args.seed, if args.gbdt { "--gbdt" } else { "--balanced" })?)
    } else {
        args.seed
    };
    let run = Run::start("classify", args, seed);
    let mut ds = load(&args.dataset)?;
    prepare_out(&args.out)?;

    if let Some(formula) = args.formula {
        let formula = match formula {
            FormulaArg::F12 => Formula::F12,
            FormulaArg::F13a => Formula::F13a,
            FormulaArg::F13b => Formula::F13b,
        };
        let mut pred = ThresholdPredictor::of(formula);
        if let Some(classes) = &args.classes {
            let p = pair(classes)?;
            pred.class_low = p.first.min(p.second);
            pred.class_high = p.first.max(p.second);
        }
        ds = ds.filter_classes(&[pred.class_low, pred.class_high]);
        if args.balanced {
            ds = balance(&ds, seed.unwrap_or_default())?;
        }
        let ev = classify::evaluate(&pred, &ds)?;
        write_json(&args.out.join("metrics.json"), &ev.metrics, ctx.pretty)?;
        write_report(&args.out, "", &ev.metrics)?;
        let mut misses = String::from("d,h,predicted,score\n");
        for m in &ev.misses {
            misses.push_str(&format!("{},{},{},{}\n", m.d, m.h, m.predicted, m.score));
        }
        fs::write(args.out.join("misses.csv"), misses)?;
        run.finish(&args.out, Some(&args.dataset), ctx)?;
        #[derive(Serialize)]
        struct Out<'a> {
            predictor: &'a ThresholdPredictor,
            records: u64,
            accuracy: f64,
            fn_count: u64,
            misses: usize,
        }
        return print(
            &Out {
                predictor: &pred,
                records: ev.metrics.total,
                accuracy: ev.metrics.accuracy,
                fn_count: ev.metrics.fn_,
                misses: ev.misses.len(),
            },
            ctx,
        );
    }

    let seed = seed.unwrap_or_default();
    if let Some(classes) = &args.classes {
        let p = pair(classes)?;
        ds = ds.filter_classes(&[p.first, p.second]);
    }
    if args.balanced {
        ds = balance(&ds, seed)?;
    }
    let classes: Vec<u32> = ds.label_classes().into_iter().collect();
    let [low, high] = classes[..] else {
        return Err(usage(format!("--gbdt needs exactly two classes, found {classes:?}; use --classes")));
    };
    let features = parse_features(&args.features, ds.bound())?;
    let (train, test) = dataset::split(&ds, args.gbdt_config.train_fraction, seed)?;
    let x_train = FeatureMatrix::from_dataset(&train, &features)?;
    let x_test = FeatureMatrix::from_dataset(&test, &features)?;
    let model = gbdt_train(&x_train, low, high, &gbdt_config(&args.gbdt_config, seed))?;
    let train_report = model.evaluate(&x_train)?;
    let test_report = model.evaluate(&x_test)?;
    let importance = permutation_importance(&model, &x_test, seed, args.importance_repeats)?;

    #[derive(Serialize)]
    struct Metrics<'a> {
        train: &'a MetricsReport,
        test: &'a MetricsReport,
    }
    write_json(&args.out.join("metrics.json"), &Metrics { train: &train_report, test: &test_report }, ctx.pretty)?;
    write_report(&args.out, "train_", &train_report)?;
    write_report(&args.out, "test_", &test_report)?;
    write_json(&args.out.join("model.json"), &model, ctx.pretty)?;
    let mut imp = String::from("rank,feature,mean_drop,std_drop\n");
    for (i, f) in importance.iter().enumerate() {
        imp.push_str(&format!("{},{},{},{}\n", i + 1, f.feature, f.mean_drop, f.std_drop));
    }
    fs::write(args.out.join("importance.csv"), imp)?;
    let mut loss = String::from("round,train_loss\n");
    for (i, l) in model.train_loss.iter().enumerate() {
        loss.push_str(&format!("{i},{l}\n"));
    }
    fs::write(args.out.join("loss.csv"), loss)?;
    run.finish(&args.out, Some(&args.dataset), ctx)?;
    #[derive(Serialize)]
    struct Out<'a> {
        train_records: usize,
        test_records: usize,
        train_accuracy: f64,
        test_accuracy: f64,
        top_features: Vec<&'a str>,
    }
    print(
        &Out {
            train_records: train.len(),
            test_records: test.len(),
            train_accuracy: train_report.accuracy,
            test_accuracy: test_report.accuracy,
            top_features: importance.iter().take(3).map(|f| f.feature.as_str()).collect(),
        },
        ctx,
    )
}

pub fn ablation(args: &AblationArgs, ctx: &Context) -> Result<(), Failure> {
    let run = Run::start("ablation", args, Some(args.seed));
    let mut ds = load(&args.dataset)?;
    if args.balanced {
        ds = dataset::balanced_sample_13(&ds, args.seed)?;
    }
    prepare_out(&args.out)?;
    let config = gbdt_config(&args.gbdt_config, args.seed);
    let rows = ablation_table(&ds, &ABLATION_ROWS, args.gbdt_config.train_fraction, &config)?;
    fs::write(args.out.join("ablation.csv"), ablation_csv(&rows))?;
    run.finish(&args.out, Some(&args.dataset), ctx)?;
    print(&rows, ctx)
}

pub fn pca(args: &PcaArgs, ctx: &Context) -> Result<(), Failure> {
    let run = Run::start("pca", args, None);
    let mut ds = load(&args.dataset)?;
    if let Some(classes) = &args.classes {
        ds = ds.filter_classes(classes);
    }
    prepare_out(&args.out)?;
    let indices = parse_indices(&args.indices, ds.bound())?;
    let model = pca::pca_fit_dataset::<f64>(&ds, &indices, args.k)?;
    let coords = pca::pca_project_dataset(&model, &ds)?;
    fs::write(args.out.join("projection.csv"), pca::projection_csv(&ds, &coords, model.k()))?;
    write_json(&args.out.join("model.json"), &model, ctx.pretty)?;
    run.finish(&args.out, Some(&args.dataset), ctx)?;
    #[derive(Serialize)]
    struct Out {
        records: usize,
        features: usize,
        eigenvalues: Vec<f64>,
        explained_variance_ratio: Vec<f64>,
    }
    print(
        &Out {
            records: ds.len(),
            features: model.dim(),
            eigenvalues: model.eigenvalues.clone(),
            explained_variance_ratio: model.explained_variance_ratio(),
        },
        ctx,
    )
}

pub fn stats(args: &StatsArgs, ctx: &Context) -> Result<(), Failure> {
    let run = Run::start("stats", args, None);
    let ds = load(&args.dataset)?;
    prepare_out(&args.out)?;
    let s = dataset::summarize(&ds);
    let classes = ds.label_classes();

    let mut coefficients = String::from("h");
    for v in 0..=2u8 {
        for p in [2u64, 3, 5] {
            coefficients.push_str(&format!(",a{p}={v}"));
        }
    }
    coefficients.push('\n');
    let mut ramified = String::from("h,n_d=1,n_d=2,n_d=3\n");
    let mut detected = String::from("h,detected,count\n");
    for &h in &classes {
        coefficients.push_str(&h.to_string());
        for v in 0..=2u8 {
            for p in [2u64, 3, 5] {
                coefficients.push_str(&format!(",{}", s.coefficient_count(h, p, v)));
            }
        }
        coefficients.push('\n');
        ramified.push_str(&format!(
            "{h},{},{},{}\n",
            s.ramified_count(h, 1),
            s.ramified_count(h, 2),
            s.ramified_count(h, 3)
        ));
    }
    for (&(h, n), &count) in &s.detected_counts {
        detected.push_str(&format!("{h},{n},{count}\n"));
    }
    fs::write(args.out.join("coefficients.csv"), &coefficients)?;
    fs::write(args.out.join("ramified.csv"), &ramified)?;
    fs::write(args.out.join("detected.csv"), &detected)?;
    run.finish(&args.out, Some(&args.dataset), ctx)?;
    print!("{coefficients}{ramified}");
    Ok(())
}

pub fn import(args: &ImportArgs, ctx: &Context) -> Result<(), Failure> {
    let run = Run::start("import", args, None);
    let ds = dataset::import_csv(&args.csv, args.coeff_bound).map_err(|e| match e {
        quadclass::Error::Io(io) => usage(format!("cannot read {}: {io}", args.csv.display())),
        other => Failure::Validation(other.to_string()),
    })?;
    dataset::save(&ds, &args.out)?;
    run.finish(&args.out, Some(&args.out), ctx)?;
    #[derive(Serialize)]
    struct Out {
        records: usize,
        classes: Vec<u32>,
    }
    print(&Out { records: ds.len(), classes: ds.label_classes().into_iter().collect() }, ctx)
}
