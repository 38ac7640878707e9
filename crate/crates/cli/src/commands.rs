use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use mutacyc_core::dataset::{
    balance_classes, build_dataset1, build_dataset2, build_dataset3, build_dataset4, split,
    BuiltDataset, Dataset3Seeds, SplitSpec, UndeterminedPolicy, DATASET3_TARGET_ROWS,
};
use mutacyc_core::proof::{audit_ledger, decide_with_depth};
use mutacyc_core::search::SearchLimits;
use mutacyc_core::{
    prove_rank4_weight2, Encoding, ExchangeMatrix, LabeledDataset, ProofConfig, ProofLedger,
    Verdict,
};
use mutacyc_ml::metrics::{confusion, mean_and_stderr, ConfusionMatrix};
use mutacyc_ml::mlp::{mlp_train, MlpConfig, TrainData};
use mutacyc_ml::svm::{svm_train, ClassWeights, SvmConfig, SvmModel};
use mutacyc_ml::{class_indices, feature_matrix, pca_fit, svm_expand};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    Architecture, GenArgs, NnArgs, PcaArgs, PredictArgs, ProveArgs, SplitArgs, SvmArgs,
};
use crate::error::{CliError, Result};

/// Expected class counts for the generated datasets.
pub fn expected_counts(dataset: u8) -> Option<Vec<usize>> {
    match dataset {
        1 => Some(vec![39363, 26242, 13121, 13121]),
        2 => Some(vec![7285, 2914]),
        3 => Some(vec![DATASET3_TARGET_ROWS.0, DATASET3_TARGET_ROWS.1]),
        4 => Some(vec![12082, 3022]),
        _ => None,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn load_ledger(path: &Path) -> Result<ProofLedger> {
    Ok(ProofLedger::read_jsonl(BufReader::new(File::open(path)?))?)
}

pub fn prove(args: &ProveArgs) -> Result<()> {
    let limits = match args.memory_cap {
        Some(cap) => SearchLimits {
            memory_cap_bytes: cap,
        },
        None => SearchLimits::default(),
    };
    let cfg = ProofConfig {
        max_nma_seed_depth: args.max_nma_seed_depth,
        max_resolve_depth: args.max_resolve_depth,
        limits,
    };
    let ledger = prove_rank4_weight2(&cfg)?;
    ledger.write_jsonl(BufWriter::new(File::create(&args.out)?))?;
    let report = ledger.report();
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".report.txt"));
    fs::write(&report_path, &report)?;
    let open = ledger.undetermined();
    let mut summary = serde_json::to_value(&ledger)?;
    summary["undetermined"] = json!(open.len());
    write_json(&with_suffix(&args.out, ".summary.json"), &summary)?;
    print!("{report}");
    if args.audit {
        audit_ledger(&ledger, limits)?;
        println!("audit: every witness re-checked");
    }
    if !open.is_empty() {
        for key in &open {
            eprintln!("undetermined: {key}");
        }
        return Err(CliError::Verification(format!(
            "{} class(es) undetermined at resolve depth {}",
            open.len(),
            args.max_resolve_depth
        )));
    }
    Ok(())
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let built: BuiltDataset = match args.dataset {
        1 => build_dataset1(args.encoding)?,
        2 => build_dataset2(args.encoding)?,
        3 => {
            let seeds = match &args.seeds {
                Some(p) => Dataset3Seeds::load(p)?,
                None => Dataset3Seeds::default_construction(),
            };
            build_dataset3(&seeds, args.encoding)?
        }
        4 => {
            let path = args
                .ledger
                .as_ref()
                .ok_or_else(|| CliError::Usage("dataset 4 needs --ledger".into()))?;
            let ledger = load_ledger(path)?;
            let policy = if args.undetermined_as_nma {
                UndeterminedPolicy::AsNma
            } else {
                UndeterminedPolicy::Reject
            };
            build_dataset4(&ledger, policy, args.encoding)?
        }
        n => return Err(CliError::Usage(format!("unknown dataset {n}"))),
    };
    built.dataset.save(&args.out)?;
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".manifest.json"));
    built.manifest.save(&manifest_path)?;
    let m = &built.manifest;
    println!(
        "{}: {} rows, classes {:?} = {:?}",
        m.dataset, m.rows, m.class_names, m.class_counts
    );
    println!("sha256 {}", m.sha256);
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(expected) = expected_counts(args.dataset) {
        if m.class_counts != expected {
            eprintln!(
                "warning: class counts {:?} differ from expected {:?}",
                m.class_counts, expected
            );
            return Err(CliError::Verification(format!(
                "dataset {} counts mismatch",
                args.dataset
            )));
        }
    }
    Ok(())
}

fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    Ok(LabeledDataset::load(path)?)
}

pub fn pca(args: &PcaArgs) -> Result<()> {
    let ds = load_dataset(&args.dataset)?;
    let x = feature_matrix(&ds);
    let model = pca_fit(x.view())?;
    fs::create_dir_all(&args.out_dir)?;
    write_json(&args.out_dir.join("pca.json"), &model)?;
    let mut table = String::from("component  eigenvalue              explained_variance_ratio\n");
    for (i, (l, r)) in model
        .eigenvalues
        .iter()
        .zip(&model.explained_variance_ratio)
        .enumerate()
    {
        writeln!(table, "{:>9}  {:<22e}  {:e}", i + 1, l, r).expect("string write");
    }
    fs::write(args.out_dir.join("eigenvalues.txt"), &table)?;
    print!("{table}");
    // Scatter points for plotting projections.
    let z = model.project(x.view(), args.dims)?;
    let mut out = BufWriter::new(File::create(args.out_dir.join("projection.csv"))?);
    let header: Vec<String> = (1..=args.dims)
        .map(|i| format!("pc{i}"))
        .chain(["label".to_string()])
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (row, label) in z.rows().into_iter().zip(ds.labels()) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{},{label}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn split_spec(s: &SplitArgs, validation_fraction: f64) -> SplitSpec {
    SplitSpec {
        test_fraction: s.test_fraction,
        validation_fraction,
        seed: s.seed,
        stratified: !s.unstratified,
    }
}

#[derive(Serialize)]
struct Metrics<'a> {
    accuracy: f64,
    mcc: f64,
    confusion: &'a ConfusionMatrix,
}

pub fn svm(args: &SvmArgs) -> Result<()> {
    let mut ds = load_dataset(&args.dataset)?;
    if ds.encoding() != Encoding::Upper6 {
        ds = ds.reencode(Encoding::Upper6)?;
    }
    let parts = split(&ds, &split_spec(&args.split, 0.0))?;
    let cfg = SvmConfig {
        degree: args.degree,
        c: args.c,
        weights: ClassWeights {
            ma: args.weight_ma,
            nma: args.weight_nma,
        },
        gamma: args.gamma,
        tol: args.tol,
        max_passes: args.max_passes,
        cache_mb: args.cache_mb,
        ..SvmConfig::default()
    };
    let (model, report) = svm_train(&parts.train, &cfg)?;
    let preds = model.predict_dataset(&parts.test)?;
    let cm = confusion(&preds, &class_indices(&parts.test), 2)?;
    fs::create_dir_all(&args.out_dir)?;
    model.save(args.out_dir.join("model.json"))?;
    let mut summary = json!({
        "degree": args.degree,
        "train_rows": parts.train.len(),
        "test_rows": parts.test.len(),
        "support_vectors": model.alphas.len(),
        "iterations": report.iterations,
        "gamma": model.gamma,
        "bias": model.bias,
        "test": Metrics { accuracy: cm.accuracy(), mcc: cm.mcc(), confusion: &cm },
    });
    let mut text = format!(
        "degree {}: test MCC {:.3}, accuracy {:.3} ({} train / {} test rows, {} support vectors)\n",
        args.degree,
        cm.mcc(),
        cm.accuracy(),
        parts.train.len(),
        parts.test.len(),
        model.alphas.len()
    );
    writeln!(
        text,
        "confusion (rows true MA/NMA, columns predicted): {:?}",
        cm.counts()
    )
    .expect("string write");
    if args.expand {
        let e = svm_expand(&model)?;
        e.save_csv(args.out_dir.join("expansion.csv"))?;
        summary["terms"] = json!(e.term_count());
        writeln!(text, "polynomial terms: {}", e.term_count()).expect("string write");
    }
    write_json(&args.out_dir.join("metrics.json"), &summary)?;
    fs::write(args.out_dir.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn nn(args: &NnArgs) -> Result<()> {
    let raw = load_dataset(&args.dataset)?;
    let classes = raw.class_counts().len();
    let base = match args.arch {
        Architecture::Deep => MlpConfig::deep(),
        Architecture::Shallow => MlpConfig::shallow(),
    };
    fs::create_dir_all(&args.out_dir)?;
    let mut runs = Vec::new();
    let mut table = String::from("run  accuracy  mcc\n");
    for r in 0..args.runs {
        let seed = args.split.seed + r as u64;
        let ds = if args.no_balance {
            raw.clone()
        } else {
            balance_classes(&raw, seed)?
        };
        let parts = split(
            &ds,
            &SplitSpec {
                seed,
                ..split_spec(&args.split, args.validation_fraction)
            },
        )?;
        let cfg = MlpConfig {
            epochs: args.epochs,
            dropout: args.dropout.unwrap_or(base.dropout),
            batch_size: args.batch_size.unwrap_or(base.batch_size),
            learning_rate: args.learning_rate,
            seed,
            ..base.clone()
        };
        let (xt, lt) = (feature_matrix(&parts.train), class_indices(&parts.train));
        let (xv, lv) = (
            feature_matrix(&parts.validation),
            class_indices(&parts.validation),
        );
        let validation = (!lv.is_empty()).then(|| (xv.view(), &lv[..]));
        let model = mlp_train(
            &TrainData {
                x: xt.view(),
                labels: &lt,
                validation,
            },
            classes,
            &cfg,
        )?;
        let preds = model.predict(feature_matrix(&parts.test).view())?;
        let cm = confusion(&preds, &class_indices(&parts.test), classes)?;
        writeln!(
            table,
            "{:>3}  {:.3}     {:.3}",
            r + 1,
            cm.accuracy(),
            cm.mcc()
        )
        .expect("string write");
        model.save(args.out_dir.join(format!("model-{}.json", r + 1)))?;
        let mut hist = BufWriter::new(File::create(
            args.out_dir.join(format!("history-{}.csv", r + 1)),
        )?);
        writeln!(hist, "epoch,train_loss,val_loss,val_accuracy")?;
        for s in &model.history {
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            writeln!(
                hist,
                "{},{},{},{}",
                s.epoch + 1,
                s.train_loss,
                opt(s.val_loss),
                opt(s.val_accuracy)
            )?;
        }
        hist.flush()?;
        runs.push((cm.accuracy(), cm.mcc(), cm));
    }
    let accs: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mccs: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let (am, ae) = mean_and_stderr(&accs);
    let (mm, me) = mean_and_stderr(&mccs);
    writeln!(
        table,
        "mean accuracy {am:.3} ± {ae:.3}, mean MCC {mm:.3} ± {me:.3}"
    )
    .expect("string write");
    fs::write(args.out_dir.join("report.txt"), &table)?;
    let per_run: Vec<_> = runs
        .iter()
        .map(|(a, m, cm)| Metrics {
            accuracy: *a,
            mcc: *m,
            confusion: cm,
        })
        .collect();
    write_json(
        &args.out_dir.join("metrics.json"),
        &json!({ "runs": per_run, "accuracy": [am, ae], "mcc": [mm, me] }),
    )?;
    print!("{table}");
    Ok(())
}

/// Parse a quiver from inline JSON or a file: either a list of rows or
/// an object `{"n": .., "b": [[..]]}`.
pub fn parse_quiver(input: &str) -> Result<ExchangeMatrix> {
    let text = if Path::new(input).is_file() {
        fs::read_to_string(input)?
    } else {
        input.to_string()
    };
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.is_array() {
        let rows: Vec<Vec<i64>> = serde_json::from_value(value)?;
        Ok(ExchangeMatrix::from_rows(&rows)?)
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    if !args.exact && args.model.is_none() {
        return Err(CliError::Usage("give --exact and/or --model".into()));
    }
    let q = parse_quiver(&args.quiver)?;
    let mut undetermined = false;
    if args.exact {
        let ledger = match &args.ledger {
            Some(p) => load_ledger(p)?,
            None => ProofLedger::from_records(0, 0, []),
        };
        let d = decide_with_depth(&q, &ledger, args.depth, SearchLimits::from_env());
        match &d.witness {
            Some(w) => {
                println!("{} ({} witness)", d.verdict, w.kind());
                println!("  {}", w.describe());
            }
            None => println!("{}", d.verdict),
        }
        undetermined = d.verdict == Verdict::Undetermined;
    }
    if let Some(path) = &args.model {
        let model = SvmModel::load(path)?;
        let x: Vec<f64> = q
            .encode(Encoding::Upper6)?
            .iter()
            .map(|&v| v as f64)
            .collect();
        let value = model.decision(&x)?;
        let label = if model.predict(&x)? > 0 { "NMA" } else { "MA" };
        println!("{label} (SVM decision {value:.6e})");
    }
    if undetermined {
        return Err(CliError::Verification(
            "bounded search found no witness".into(),
        ));
    }
    Ok(())
}
