use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use dronepaint_core::gesture::{
    classify, evaluate, read_dataset, synth_dataset, train_classifier, write_dataset, DatasetSpec, GestureClass,
    GestureDataset, GestureModel, HandFrame, Hyperparams, Landmark, Split,
};
use dronepaint_core::metrics::{
    confidence_interval, error_samples, format_table, trace_errors, GroundTruthShape, ShapeKind, TableColumn,
};
use dronepaint_core::scenario::{simulate as run_scenario, ScenarioFile};
use dronepaint_core::sim::{read_trace, write_events, write_trace};
use dronepaint_core::trajectory::{read_trajectory, StrokePoint};
use dronepaint_gateway::{HubConfig, ServerConfig, SessionConfig};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::failure::{Classify, Failure, Outcome};
use crate::{
    ClassifyArgs, Cli, Cmd, EvalArgs, MetricsArgs, RenderArgs, ServeArgs, ShapeArg, SimulateArgs, SynthDataArgs,
    TrainArgs,
};

const DEFAULT_DATASET_SEED: u64 = 42;

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Cmd::SynthData(a) => synth_data(a),
        Cmd::Train(a) => train(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Classify(a) => classify_frames(a),
        Cmd::Simulate(a) => simulate(a),
        Cmd::Render(a) => render(a),
        Cmd::Metrics(a) => metrics(a),
        Cmd::Serve(a) => serve(a),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).input(format!("reading {}", path.display()))?;
    serde_json::from_str(&text).input(format!("parsing {}", path.display()))
}

fn open(path: &Path) -> Outcome<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .input(format!("opening {}", path.display()))
}

fn create(dir: &Path, name: &str) -> Outcome<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir).internal(format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let f = File::create(&path).internal(format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(f)))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Outcome {
    w.flush().internal(format!("writing {}", path.display()))
}

fn load_dataset(path: Option<&Path>, seed: u64) -> Outcome<GestureDataset> {
    match path {
        Some(p) => read_dataset(open(p)?).input(format!("reading dataset {}", p.display())),
        None => synth_dataset(&DatasetSpec::default(), seed).internal("synthesizing dataset"),
    }
}

fn load_model(path: &Path) -> Outcome<GestureModel> {
    let text = fs::read_to_string(path).input(format!("reading {}", path.display()))?;
    GestureModel::from_json(&text).input(format!("loading model {}", path.display()))
}

fn synth_data(a: SynthDataArgs) -> Outcome {
    let spec: DatasetSpec = match &a.config {
        Some(p) => read_json(p)?,
        None => DatasetSpec::default(),
    };
    let data = synth_dataset(&spec, a.seed).input("dataset recipe")?;
    let (path, mut w) = create(&a.out, "dataset.csv")?;
    write_dataset(&data, &mut w).internal(format!("writing {}", path.display()))?;
    finish(&path, w)?;
    println!(
        "wrote {} samples ({} train, {} test) to {}",
        data.len(),
        data.count(Split::Train),
        data.count(Split::Test),
        path.display()
    );
    Ok(())
}

fn train(a: TrainArgs) -> Outcome {
    let hyper: Hyperparams = match &a.config {
        Some(p) => read_json(p)?,
        None => Hyperparams::default(),
    };
    let data = load_dataset(a.data.as_deref(), a.seed)?;
    let started = Instant::now();
    let mut model = train_classifier(&data, &hyper, a.seed).input("training")?;
    let elapsed = started.elapsed().as_secs_f64();
    if a.data.is_none() {
        model.metadata.dataset_seed = Some(a.seed);
    }
    if model.metadata.degenerate_training {
        eprintln!("warning: training split holds fewer than two classes");
    }
    let (path, mut w) = create(&a.out, "model.json")?;
    let text = model.to_json().internal("serializing model")?;
    w.write_all(text.as_bytes())
        .internal(format!("writing {}", path.display()))?;
    finish(&path, w)?;
    println!("trained on {} samples in {elapsed:.1} s", data.count(Split::Train));
    if data.count(Split::Test) > 0 {
        let ev = evaluate(&model, data.split(Split::Test)).internal("evaluating")?;
        println!("held-out accuracy {:.4} ({} samples)", ev.accuracy, ev.total);
    }
    println!("model written to {}", path.display());
    Ok(())
}

fn eval(a: EvalArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let seed = a.seed.or(model.metadata.dataset_seed).unwrap_or(DEFAULT_DATASET_SEED);
    let data = load_dataset(a.data.as_deref(), seed)?;
    if data.count(Split::Test) == 0 {
        return Err(Failure::input("dataset has no test split"));
    }
    let ev = evaluate(&model, data.split(Split::Test)).input("evaluating")?;
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&ev).internal("serializing evaluation")?
        );
        return Ok(());
    }
    println!("accuracy {:.4} ({} held-out samples)", ev.accuracy, ev.total);
    let w = GestureClass::ALL.iter().map(|c| c.name().len()).max().unwrap_or(8);
    print!("{:w$}", "");
    for c in GestureClass::ALL {
        print!(" {:>5}", &c.name()[..c.name().len().min(5)]);
    }
    println!();
    for (i, row) in ev.confusion.iter().enumerate() {
        print!("{:w$}", GestureClass::ALL[i].name());
        for n in row {
            print!(" {n:>5}");
        }
        println!();
    }
    Ok(())
}

#[derive(Deserialize)]
struct FrameDoc {
    landmarks: Vec<Vec<f64>>,
    #[serde(default)]
    t: f64,
}

fn classify_frames(a: ClassifyArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let mut text = String::new();
    if a.frames.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).input("reading stdin")?;
    } else {
        text = fs::read_to_string(&a.frames).input(format!("reading {}", a.frames.display()))?;
    }
    let doc: Value = serde_json::from_str(&text).input("parsing frames")?;
    let docs = match doc {
        Value::Array(items) => items,
        other => vec![other],
    };
    for (i, d) in docs.into_iter().enumerate() {
        let f: FrameDoc = serde_json::from_value(d).input(format!("frame {i}"))?;
        let landmarks = f
            .landmarks
            .iter()
            .map(|c| match c.as_slice() {
                [x, y] => Ok(Landmark::new(*x, *y, 0.0)),
                [x, y, z] => Ok(Landmark::new(*x, *y, *z)),
                _ => Err(Failure::input(format!("frame {i}: landmarks need 2 or 3 coordinates"))),
            })
            .collect::<Outcome<Vec<_>>>()?;
        let frame = HandFrame::new(landmarks, f.t).input(format!("frame {i}"))?;
        let features = dronepaint_core::gesture::extract_features(&frame).input(format!("frame {i}"))?;
        let c = classify(&model, &features).input(format!("frame {i}"))?;
        println!("{}", json!({"class": c.class, "confidence": c.confidence}));
    }
    Ok(())
}

fn load_scenario(path: &Path) -> Outcome<(ScenarioFile, PathBuf)> {
    ScenarioFile::load(path).input(format!("loading scenario {}", path.display()))
}

fn simulate(a: SimulateArgs) -> Outcome {
    let (mut file, base) = load_scenario(&a.scenario)?;
    if let Some(seed) = a.seed {
        file.seed = seed;
    }
    let prepared = file.prepare(&base).input("preparing scenario")?;
    let out = run_scenario(&prepared).internal("simulating")?;

    let (path, mut w) = create(&a.out, "trace.csv")?;
    write_trace(&out.episode.trace, &mut w).internal(format!("writing {}", path.display()))?;
    finish(&path, w)?;
    let (path, mut w) = create(&a.out, "events.jsonl")?;
    write_events(&out.episode.events, &mut w).internal(format!("writing {}", path.display()))?;
    finish(&path, w)?;
    let (path, mut w) = create(&a.out, "painting.ppm")?;
    w.write_all(&out.painting)
        .internal(format!("writing {}", path.display()))?;
    finish(&path, w)?;
    let (path, mut w) = create(&a.out, "report.json")?;
    let text = serde_json::to_string_pretty(&out.summary).internal("serializing report")?;
    writeln!(w, "{text}").internal(format!("writing {}", path.display()))?;
    finish(&path, w)?;

    let s = &out.summary;
    println!(
        "{} drones, {} waypoints, {} ({:.2} s sim)",
        s.drones,
        s.waypoints,
        if s.completed { "completed" } else { "timed out" },
        out.episode.trace.rows.last().map_or(0.0, |r| r.t)
    );
    if let Some(r) = &s.report {
        println!(
            "flown vs reference: max {:.2} cm, mean {:.2} cm, rmse {:.2} cm over {:.2} s",
            r.max_error, r.mean_error, r.rmse, r.duration
        );
    }
    println!("trace sha256    {}", s.trace_sha256);
    println!("painting sha256 {}", s.painting_sha256);
    println!("artifacts in {}", a.out.display());
    Ok(())
}

fn render(a: RenderArgs) -> Outcome {
    let (file, _) = load_scenario(&a.scenario)?;
    let trace = read_trace(open(&a.trace)?).input(format!("reading {}", a.trace.display()))?;
    let canvas = file.canvas.expose(&file.zone, &trace).input("exposing trace")?;
    let bytes = canvas.render(file.canvas.gain).input("rendering")?;
    let (path, mut w) = create(&a.out, "painting.ppm")?;
    w.write_all(&bytes).internal(format!("writing {}", path.display()))?;
    finish(&path, w)?;
    println!(
        "{}x{} painting written to {}",
        canvas.width(),
        canvas.height(),
        path.display()
    );
    Ok(())
}

fn reference(a: &MetricsArgs) -> Outcome<GroundTruthShape> {
    let kind = match a.shape {
        ShapeArg::Square => ShapeKind::Square {
            side: a.side.unwrap_or(1.0),
        },
        ShapeArg::Triangle => ShapeKind::Triangle {
            side: a.side.unwrap_or(1.0),
        },
        ShapeArg::Circle => ShapeKind::Circle {
            radius: a.radius.unwrap_or(0.5),
        },
    };
    if a.side.is_some() && a.shape == ShapeArg::Circle {
        return Err(Failure::input("--side does not apply to a circle; use --radius"));
    }
    if a.radius.is_some() && a.shape != ShapeArg::Circle {
        return Err(Failure::input("--radius applies only to a circle"));
    }
    let shape = GroundTruthShape {
        kind,
        center: [a.center[0], a.center[1]],
    };
    shape.validate().input("reference shape")?;
    Ok(shape)
}

fn metrics(a: MetricsArgs) -> Outcome {
    let truth = reference(&a)?;
    if a.methods.len() > a.files.len() {
        return Err(Failure::input("more --method labels than files"));
    }
    let mut columns = Vec::new();
    let mut docs = Vec::new();
    for (i, path) in a.files.iter().enumerate() {
        let rows = read_trajectory(open(path)?).input(format!("reading {}", path.display()))?;
        let drawn: Vec<StrokePoint> = rows
            .iter()
            .map(|r| StrokePoint {
                x: r.x,
                y: r.z.unwrap_or(r.y),
                t: r.t,
            })
            .collect();
        let report = trace_errors(&drawn, &truth).input(format!("scoring {}", path.display()))?;
        let cm: Vec<f64> = error_samples(&drawn, &truth.polyline())
            .input("scoring")?
            .iter()
            .map(|e| e * 100.0)
            .collect();
        let ci = confidence_interval(&cm, 0.95).ok();
        let method = a.methods.get(i).cloned().unwrap_or_else(|| {
            path.file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
        });
        docs.push(json!({
            "file": path,
            "shape": truth,
            "method": method,
            "report": report,
            "ci95_cm": ci,
        }));
        columns.push((
            TableColumn {
                shape: truth.label().to_string(),
                method,
                report,
            },
            ci,
        ));
    }
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&docs).internal("serializing reports")?
        );
        return Ok(());
    }
    let table: Vec<TableColumn> = columns.iter().map(|(c, _)| c.clone()).collect();
    print!("{}", format_table(&table));
    for (c, ci) in &columns {
        if let Some((lo, hi)) = ci {
            println!(
                "{}: 95% CI of mean error [{lo:.2}, {hi:.2}] cm, n = {}",
                c.method, c.report.n_samples
            );
        }
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Outcome {
    let mut defaults = SessionConfig::default();
    if let Some(p) = &a.config {
        let patch: Value = read_json(p)?;
        defaults = defaults.with_overrides(&patch).map_err(Failure::input)?;
    }
    if let Some(seed) = a.seed {
        defaults.sim.seed = seed;
    }
    let model = a.model.as_deref().map(load_model).transpose()?.map(Arc::new);
    if model.is_none() {
        eprintln!("note: no --model given; hand_frame messages will be rejected");
    }
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cfg = ServerConfig {
        ws_bind: Some(SocketAddr::new(a.bind, a.port)),
        tcp_bind: a.tcp_port.map(|p| SocketAddr::new(a.bind, p)),
        hub: HubConfig {
            defaults,
            model,
            ..HubConfig::default()
        },
    };
    let rt = tokio::runtime::Runtime::new().internal("starting runtime")?;
    rt.block_on(dronepaint_gateway::run(cfg)).internal("serving")
}
