use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use radarkit::annotate::{
    annotate_cluster, track_sequence, BandwidthMethod, DenseVariant, DoaPoint, SeedPoint, TrackStep,
};
use radarkit::fusion::{propagate_fuse, Placeholders, UncertaintyPolicy};
use radarkit::io::{read_json, read_points, read_rtf, write_json, write_points, write_rtf, RtfArray};
use radarkit::manifest::{list_files, RunManifest};
use radarkit::metrics::{
    components, detection_ap_ar, dice, iou, mean_aggregate, pixel_precision_recall, BBox, MeanKind,
    ScoredBox,
};
use radarkit::radarsim::{simulate_sequence, to_doa_frames, SceneConfig, SimScene};
use radarkit::signal::{
    aggregate, cfar_detect, doa_points, rad_from_frame, synthesize_frame, Aggregation, ChirpConfig,
    Reflector,
};
use radarkit::{AxisKind, AxisSpec, FusedPoint, LidarPoint, RadarPoint, SegMask, SensorSpec, ViewKind};

use crate::{Cli, Command};

/// Parses `argv` (program name first), runs the command and maps the outcome
/// to an exit status.
pub fn dispatch(argv: &[String]) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    match run(cli.command, argv[1..].to_vec()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn run(command: Command, args: Vec<String>) -> Result<()> {
    match command {
        Command::Simulate { config, out, clutter } => simulate(&config, &out, clutter, args),
        Command::Process { config, out } => process(&config, &out, args),
        Command::Aggregate { input, view, method, out } => aggregate_cmd(&input, &view, &method, &out, args),
        Command::Cfar { input, guard, train, scale, out, rd, points } => {
            cfar(&input, guard, train, scale, &out, rd.as_deref().zip(points.as_deref()), args)
        }
        Command::Annotate { frames, seed, sigmas, method, dense_radius, dense, view, out } => annotate(
            &AnnotateArgs { frames, seed, sigmas, method, dense_radius, dense, view, out },
            args,
        ),
        Command::Fuse { radar, lidar, spec, scale, out } => fuse(&radar, &lidar, spec.as_deref(), scale, &out, args),
        Command::Eval { pred, gt, classes, metrics, iou_thr, exclude_class, out } => eval(
            &EvalArgs { pred, gt, classes, metrics, iou_thr, exclude_class, out },
            args,
        ),
        Command::Replay { manifest } => replay(&manifest),
    }
}

/// Manifest location for an output: inside it for a directory, next to it
/// otherwise.
fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("manifest.json")
    } else {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }
}

fn finish(mut m: RunManifest, outputs: &[PathBuf], manifest: &Path) -> Result<()> {
    for p in outputs {
        m.add_output(p)?;
    }
    m.write(manifest)?;
    log::info!("wrote {} outputs, manifest {}", outputs.len(), manifest.display());
    Ok(())
}

fn rtf_outputs(base: &Path, arr: &RtfArray) -> Result<Vec<PathBuf>> {
    let (h, b) = write_rtf(base, arr)?;
    Ok(vec![h, b])
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn simulate(config: &Path, out: &Path, clutter: usize, args: Vec<String>) -> Result<()> {
    let cfg: SceneConfig = read_json(config)?;
    let scene = SimScene::from_config(&cfg)?;
    let (views, truth) = simulate_sequence(&scene)?;
    create_dir(out)?;
    create_dir(&out.join("doa"))?;
    let mut outputs = Vec::new();
    for (t, v) in views.iter().enumerate() {
        outputs.extend(rtf_outputs(&out.join(format!("frame_{t:03}")), &RtfArray::from(v))?);
    }
    for (t, f) in to_doa_frames(&truth, clutter, scene.seed).iter().enumerate() {
        let p = out.join("doa").join(format!("frame_{t:03}.csv"));
        write_points(&p, f)?;
        outputs.push(p);
    }
    let sp = out.join("scene.json");
    write_json(&sp, &scene)?;
    let tp = out.join("truth.json");
    write_json(&tp, &truth)?;
    outputs.extend([sp, tp]);
    let mut m = RunManifest::new(args, Some(scene.seed));
    m.add_input(config)?;
    finish(m, &outputs, &manifest_path(out, true))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessConfig {
    chirp: ChirpConfig,
    reflectors: Vec<Reflector>,
}

fn process(config: &Path, out: &Path, args: Vec<String>) -> Result<()> {
    let cfg: ProcessConfig = read_json(config)?;
    let frame = synthesize_frame(&cfg.chirp, &cfg.reflectors)?;
    let tensor = rad_from_frame(&frame)?;
    let outputs = rtf_outputs(out, &RtfArray::from(&tensor))?;
    let mut m = RunManifest::new(args, None);
    m.add_input(config)?;
    finish(m, &outputs, &manifest_path(out, false))
}

fn parse_view(s: &str) -> Result<ViewKind> {
    ViewKind::parse(s).ok_or_else(|| anyhow!("unknown view `{s}` (expected rd, ra or ad)"))
}

fn aggregate_cmd(input: &Path, view: &str, method: &str, out: &Path, args: Vec<String>) -> Result<()> {
    let tensor = read_rtf(input)?.into_rad_tensor()?;
    let method = match method {
        "mean" => Aggregation::MeanLog,
        "max" => Aggregation::MaxLog,
        other => bail!("unknown aggregation `{other}` (expected mean or max)"),
    };
    let v = aggregate(&tensor, parse_view(view)?, method)?;
    let outputs = rtf_outputs(out, &RtfArray::from(&v))?;
    let mut m = RunManifest::new(args, None);
    for p in radarkit::io::rtf_paths(input).into_iter_pair() {
        m.add_input(&p)?;
    }
    finish(m, &outputs, &manifest_path(out, false))
}

trait IntoIterPair {
    fn into_iter_pair(self) -> [PathBuf; 2];
}

impl IntoIterPair for (PathBuf, PathBuf) {
    fn into_iter_pair(self) -> [PathBuf; 2] {
        [self.0, self.1]
    }
}

fn add_rtf_input(m: &mut RunManifest, base: &Path) -> Result<()> {
    for p in radarkit::io::rtf_paths(base).into_iter_pair() {
        m.add_input(&p)?;
    }
    Ok(())
}

fn cfar(
    input: &Path,
    guard: usize,
    train: usize,
    scale: f64,
    out: &Path,
    doa: Option<(&Path, &Path)>,
    args: Vec<String>,
) -> Result<()> {
    let view = read_rtf(input)?.into_view()?;
    let hits = cfar_detect(&view, guard, train, scale)?;
    let mut w = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
    w.write_record(["row", "col", "power_db"])?;
    for &(r, c) in &hits {
        w.write_record([r.to_string(), c.to_string(), format!("{}", view.get(r, c))])?;
    }
    w.flush().with_context(|| format!("writing {}", out.display()))?;
    let mut outputs = vec![out.to_path_buf()];
    let mut m = RunManifest::new(args, None);
    add_rtf_input(&mut m, input)?;
    if let Some((rd_path, points_path)) = doa {
        if view.kind() != ViewKind::RA {
            bail!("DoA points need RA detections, {} is {:?}", input.display(), view.kind());
        }
        let rd = read_rtf(rd_path)?.into_view()?;
        let pts: Vec<RadarPoint> = doa_points(&hits, view.axes(), &rd)?;
        write_points(points_path, &pts)?;
        outputs.push(points_path.to_path_buf());
        add_rtf_input(&mut m, rd_path)?;
    }
    finish(m, &outputs, &manifest_path(out, false))
}

struct AnnotateArgs {
    frames: PathBuf,
    seed: String,
    sigmas: String,
    method: String,
    dense_radius: f64,
    dense: String,
    view: String,
    out: PathBuf,
}

fn parse_seed(s: &str) -> Result<(SeedPoint, usize)> {
    let (xyz, frame) = s.split_once('@').ok_or_else(|| anyhow!("seed `{s}` must look like x,y,vr@frame"))?;
    let v: Vec<f64> = xyz
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("parsing seed `{s}`"))?;
    let [x, y, v_r] = v[..] else { bail!("seed `{s}` needs three coordinates") };
    Ok((SeedPoint { x, y, v_r }, frame.trim().parse().with_context(|| format!("seed frame in `{s}`"))?))
}

fn parse_sigmas(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("parsing sigmas `{s}`"))?;
    let [lo, hi, step] = parts[..] else { bail!("sigmas `{s}` must look like lo:hi:step") };
    if step.is_nan() || step <= 0.0 || lo.is_nan() || lo <= 0.0 || hi < lo {
        bail!("sigmas `{s}`: need 0 < lo <= hi and step > 0");
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn view_axes(view: ViewKind) -> Result<[AxisSpec; 2]> {
    let range = radarkit::radarsim::default_range_axis();
    Ok(match view {
        ViewKind::RD => [range, radarkit::radarsim::default_doppler_axis()],
        ViewKind::RA => [range, AxisSpec::new(AxisKind::Angle, 181, -90.0, 1.0)?],
        ViewKind::AD => bail!("annotations are produced for rd or ra views"),
    })
}

#[derive(Serialize)]
struct TrackRecord {
    frame: usize,
    hit: bool,
    sigma: Option<f64>,
    centroid: Option<[f64; 3]>,
    members: usize,
    bbox: Option<(usize, usize, usize, usize)>,
    dropped: usize,
}

fn annotate(a: &AnnotateArgs, args: Vec<String>) -> Result<()> {
    let (seed, seed_frame) = parse_seed(&a.seed)?;
    let sigmas = parse_sigmas(&a.sigmas)?;
    let method = BandwidthMethod::parse(&a.method)
        .ok_or_else(|| anyhow!("unknown method `{}` (expected js, det, count or logratio)", a.method))?;
    let variant = match a.dense.as_str() {
        "circle" => DenseVariant::DilationCircle,
        "cross" => DenseVariant::DilationCross,
        "closed" => DenseVariant::CircleClosed,
        "closed-eroded" => DenseVariant::CircleClosedEroded,
        other => bail!("unknown dense variant `{other}`"),
    };
    let view = parse_view(&a.view)?;
    let axes = view_axes(view)?;
    let files: Vec<PathBuf> = list_files(&a.frames)?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    if files.is_empty() {
        bail!("no DoA frames (*.csv) in {}", a.frames.display());
    }
    let frames: Vec<Vec<DoaPoint>> = files.iter().map(|p| read_points(p)).collect::<radarkit::Result<_>>()?;
    let track = track_sequence(&frames, seed, seed_frame, &sigmas, method)?;

    create_dir(&a.out)?;
    let mut outputs = Vec::new();
    let mut records = Vec::new();
    let ops = variant.ops(a.dense_radius);
    for (t, step) in track.iter().enumerate() {
        let mut rec = TrackRecord { frame: t, hit: false, sigma: None, centroid: None, members: 0, bbox: None, dropped: 0 };
        let (sparse, dense, bbox) = match step {
            TrackStep::Hit { cluster, sigma } => {
                let ann = annotate_cluster(cluster, view, &axes, &ops)?;
                rec = TrackRecord {
                    hit: true,
                    sigma: Some(*sigma),
                    centroid: Some(cluster.centroid),
                    members: cluster.len(),
                    bbox: ann.bbox,
                    dropped: ann.dropped,
                    ..rec
                };
                (ann.sparse.into_iter().collect::<Vec<_>>(), ann.dense, ann.bbox)
            }
            TrackStep::Miss { .. } => (Vec::new(), vec![false; axes[0].bins * axes[1].bins], None),
        };
        let sp = a.out.join(format!("sparse_{t:03}.csv"));
        let mut w = csv::Writer::from_path(&sp).with_context(|| format!("writing {}", sp.display()))?;
        w.write_record(["row", "col"])?;
        for (r, c) in sparse {
            w.write_record([r.to_string(), c.to_string()])?;
        }
        w.flush().with_context(|| format!("writing {}", sp.display()))?;
        let bp = a.out.join(format!("box_{t:03}.json"));
        write_json(&bp, &bbox)?;
        outputs.extend([sp, bp]);
        outputs.extend(rtf_outputs(&a.out.join(format!("dense_{t:03}")), &RtfArray::from_mask(axes, &dense)?)?);
        records.push(rec);
    }
    let tp = a.out.join("track.json");
    write_json(&tp, &records)?;
    outputs.push(tp);
    let mut m = RunManifest::new(args, None);
    m.add_input(&a.frames)?;
    finish(m, &outputs, &manifest_path(&a.out, true))
}

fn fuse(radar: &Path, lidar: &Path, spec: Option<&Path>, scale: f64, out: &Path, args: Vec<String>) -> Result<()> {
    let r: Vec<RadarPoint> = read_points(radar)?;
    let l: Vec<LidarPoint> = read_points(lidar)?;
    let mut m = RunManifest::new(args, None);
    m.add_input(radar)?;
    m.add_input(lidar)?;
    let spec = match spec {
        Some(p) => {
            m.add_input(p)?;
            let s: SensorSpec = read_json(p)?;
            s.validate()?;
            s
        }
        None => SensorSpec::nuscenes(),
    };
    if scale.is_nan() || scale <= 0.0 {
        bail!("--scale must be positive, got {scale}");
    }
    let policy = UncertaintyPolicy { scale, ..Default::default() };
    let res = propagate_fuse(&r, &l, &spec, &policy, &Placeholders::default(), [0.0, 0.0])?;
    if !res.out_of_scope.is_empty() {
        log::warn!("{} radar points out of sensor scope were dropped", res.out_of_scope.len());
    }
    write_points::<FusedPoint>(out, &res.points)?;
    finish(m, &[out.to_path_buf()], &manifest_path(out, false))
}

struct EvalArgs {
    pred: PathBuf,
    gt: PathBuf,
    classes: usize,
    metrics: String,
    iou_thr: f64,
    exclude_class: Option<u32>,
    out: PathBuf,
}

fn read_mask(base: &Path, classes: usize) -> Result<SegMask> {
    let (rows, cols, v) = read_rtf(base)?.into_grid()?;
    let labels = v
        .iter()
        .map(|&x| {
            if x >= 0.0 && x.fract() == 0.0 {
                Ok(x as u32)
            } else {
                Err(anyhow!("{}: label {x} is not a class id", base.display()))
            }
        })
        .collect::<Result<Vec<u32>>>()?;
    SegMask::new(rows, cols, classes, labels).with_context(|| base.display().to_string())
}

fn class_boxes(m: &SegMask, k: u32) -> Vec<BBox> {
    let mask: Vec<bool> = m.labels().iter().map(|&l| l == k).collect();
    components(&mask, m.rows(), m.cols())
        .into_iter()
        .map(|(a, b, c, d)| BBox::from_cells(a, b, c, d))
        .collect()
}

fn eval(a: &EvalArgs, args: Vec<String>) -> Result<()> {
    const KNOWN: [&str; 5] = ["iou", "dice", "pp", "pr", "ap"];
    let wanted: Vec<&str> = a.metrics.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if let Some(bad) = wanted.iter().find(|w| !KNOWN.contains(w)) {
        bail!("unknown metric `{bad}` (expected some of {})", KNOWN.join(","));
    }
    let names: Vec<PathBuf> = list_files(&a.gt)?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    if names.is_empty() {
        bail!("no ground-truth masks in {}", a.gt.display());
    }
    let mut per_metric: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for gt_path in &names {
        let rel = gt_path.strip_prefix(&a.gt).expect("listed under gt");
        let gt = read_mask(gt_path, a.classes)?;
        let pred = read_mask(&a.pred.join(rel), a.classes)?;
        for k in 0..a.classes as u32 {
            let mut push = |name: &str, v: f64| {
                per_metric.entry(name.to_string()).or_insert_with(|| vec![Vec::new(); a.classes])[k as usize].push(v)
            };
            for &w in &wanted {
                match w {
                    "iou" => push(w, iou(&pred, &gt, k)?.value),
                    "dice" => push(w, dice(&pred, &gt, k)?.value),
                    "pp" => push(w, pixel_precision_recall(&pred, &gt, k)?.0.value),
                    "pr" => push(w, pixel_precision_recall(&pred, &gt, k)?.1.value),
                    "ap" => {
                        let preds: Vec<ScoredBox> =
                            class_boxes(&pred, k).into_iter().map(|bbox| ScoredBox { bbox, score: 1.0 }).collect();
                        let (ap, ar) = detection_ap_ar(&preds, &class_boxes(&gt, k), a.iou_thr);
                        push("ap", ap);
                        push("ar", ar);
                    }
                    _ => unreachable!(),
                }
            }
        }
    }
    let mut report = serde_json::Map::new();
    for (name, per_class) in per_metric {
        let class_means: Vec<f64> = per_class.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
        let kept: Vec<f64> = class_means
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k as u32) != a.exclude_class)
            .map(|(_, v)| *v)
            .collect();
        report.insert(
            name,
            serde_json::json!({
                "per_class": class_means,
                "arithmetic": mean_aggregate(&kept, MeanKind::Arithmetic)?,
                "harmonic": mean_aggregate(&kept, MeanKind::Harmonic)?,
            }),
        );
    }
    report.insert("masks".into(), serde_json::json!(names.len()));
    write_json(&a.out, &serde_json::Value::Object(report))?;
    let mut m = RunManifest::new(args, None);
    m.add_input(&a.pred)?;
    m.add_input(&a.gt)?;
    finish(m, std::slice::from_ref(&a.out), &manifest_path(&a.out, false))
}

fn replay(manifest: &Path) -> Result<()> {
    let recorded = RunManifest::read(manifest)?;
    if recorded.command.first().is_some_and(|c| c == "replay") {
        bail!("{} records a replay, not a command", manifest.display());
    }
    let mut argv = vec!["radarkit".to_string()];
    argv.extend(recorded.command.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| anyhow!("recorded command does not parse: {e}"))?;
    run(cli.command, recorded.command.clone())?;
    let bad = recorded.mismatches();
    if !bad.is_empty() {
        bail!("{} outputs differ from the manifest: {}", bad.len(), bad.join(", "));
    }
    println!("replay ok: {} outputs identical", recorded.outputs.len());
    Ok(())
}
