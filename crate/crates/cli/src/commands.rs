use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use chrono::Local;
use medgraph_core::anthro::{format_z, zscore};
use medgraph_core::chart::{
    dual_axis_chart, growth_chart_spec, partograph_spec, render_svg, ChartSpec, DualAxisInput, PartographInput,
    RenderOptions,
};
use medgraph_core::records::{Patient, RecordStore, Visit, HEIGHT_CM, MUAC_CM, OEDEMA, WEIGHT_KG};
use medgraph_core::rules::{detect_crossings, recommend_program, rutf_rations, CrossingLine, Program};
use medgraph_core::standards::{Catalog, DatasetMeta};
use medgraph_core::{Dataset, NutritionInputs, Palette, RationTable};
use medgraph_sync::{sync_data_dir, AppState, SyncError, SyncLock, SyncOptions, SyncState};
use serde::Serialize;
use serde_json::json;

use crate::config::CliConfig;
use crate::{ChartCmd, ChartOut, Cli, Command, PatientCmd, StandardsCmd, VisitCmd};

struct Ctx {
    cfg: CliConfig,
    json: bool,
}

impl Ctx {
    fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
        } else {
            println!("{}", text());
        }
    }

    fn catalog(&self) -> Result<Catalog> {
        Ok(Catalog::open(self.cfg.data_dir.standards())?)
    }

    fn records(&self) -> Result<RecordStore> {
        Ok(RecordStore::open(self.cfg.data_dir.records())?)
    }

    fn palette(&self, name: Option<&str>) -> Result<Palette> {
        let name = name.unwrap_or(&self.cfg.palette);
        Palette::builtin_named(name).ok_or_else(|| anyhow!("unknown palette `{name}` (expected who or passport)"))
    }

    /// Queues a record for the server when one is configured.
    fn enqueue(&self, f: impl FnOnce(&mut SyncState)) -> Result<()> {
        if self.cfg.server_url.is_none() {
            return Ok(());
        }
        let dir = &self.cfg.data_dir;
        let deadline = Instant::now() + Duration::from_secs(30);
        let _lock = loop {
            if let Some(lock) = SyncLock::try_acquire(&dir.sync_lock())? {
                break lock;
            }
            if Instant::now() > deadline {
                bail!(
                    "sync lock {} is held; record stored locally but not queued",
                    dir.sync_lock().display()
                );
            }
            thread::sleep(Duration::from_millis(100));
        };
        let mut state = SyncState::load(&dir.sync_state())?;
        f(&mut state);
        state.save(&dir.sync_state())?;
        Ok(())
    }
}

pub fn run(cli: Cli) -> Result<u8> {
    let ctx = Ctx {
        cfg: CliConfig::load(cli.data_dir)?,
        json: cli.json,
    };
    match cli.command {
        Command::Standards(cmd) => standards(&ctx, cmd),
        Command::Zscore { dataset, x, y, palette } => score(&ctx, &dataset, x, y, palette.as_deref()),
        Command::Chart(cmd) => chart(&ctx, cmd),
        Command::Recommend {
            z,
            muac,
            oedema,
            discharged,
        } => {
            let rec = recommend_program(&NutritionInputs::new(z, muac, oedema, discharged)?);
            ctx.emit(&rec, || {
                let mut out = rec.program.to_string();
                for r in &rec.reasons {
                    out.push_str(&format!("\n  - {r}"));
                }
                out.push_str(&format!("\n{}", rec.advisory));
                out
            });
            Ok(match rec.program {
                Program::None => 0,
                Program::Sfp => 10,
                Program::Otp => 20,
            })
        }
        Command::Rations { weight, table } => {
            let path = table.unwrap_or_else(|| ctx.cfg.ration_table.clone());
            let text = fs::read_to_string(&path).with_context(|| format!("reading ration table {}", path.display()))?;
            let table = RationTable::parse(&text).with_context(|| path.display().to_string())?;
            let rations = rutf_rations(weight, &table)?;
            ctx.emit(&json!({ "weight_kg": weight, "rations": rations }), || {
                rations.to_string()
            });
            Ok(0)
        }
        Command::Serve { port, bind } => serve(&ctx, &bind, port),
        Command::Sync { server } => sync(&ctx, server),
        Command::Patient(cmd) => patient(&ctx, cmd),
        Command::Visit(cmd) => visit(&ctx, cmd),
    }
}

fn standards(ctx: &Ctx, cmd: StandardsCmd) -> Result<u8> {
    match cmd {
        StandardsCmd::Add {
            csv,
            id,
            indicator,
            sex,
            x_unit,
            x_label,
            y_label,
        } => {
            let mut meta = DatasetMeta::new(id, indicator, sex, x_unit);
            meta.x_label = x_label.unwrap_or(meta.x_label);
            meta.y_label = y_label.unwrap_or(meta.y_label);
            let text = fs::read_to_string(&csv).with_context(|| format!("reading {}", csv.display()))?;
            let ds = Dataset::parse(meta, &text).with_context(|| csv.display().to_string())?;
            let digest = ctx.catalog()?.put(&ds)?;
            ctx.emit(&json!({ "id": ds.id(), "digest": digest }), || {
                format!("{} {}", ds.id(), digest.as_str())
            });
        }
        StandardsCmd::List => {
            let list = ctx.catalog()?.list()?;
            ctx.emit(&list, || {
                list.iter()
                    .map(|e| {
                        format!(
                            "{}\t{}\t{}\t{}\t{}",
                            e.meta.id,
                            e.meta.indicator,
                            e.meta.sex,
                            e.meta.x_unit,
                            e.digest.as_str()
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
        }
    }
    Ok(0)
}

fn score(ctx: &Ctx, dataset: &str, x: f64, y: f64, palette: Option<&str>) -> Result<u8> {
    let palette = ctx.palette(palette)?;
    let ds: Dataset = ctx.catalog()?.get(dataset)?;
    let r = zscore(&ds, x, y, &palette)?;
    let legacy = medgraph_core::anthro::legacy_symbol(r.z);
    let value = json!({
        "dataset": ds.id(),
        "palette": palette.name(),
        "x": x,
        "y": y,
        "z": r.z,
        "z_text": format_z(r.z),
        "zone": r.zone,
        "band": r.band.to_string(),
        "legacy": legacy.symbols(),
    });
    ctx.emit(&value, || {
        format!(
            "{} {} {}\nlegacy: {}",
            format_z(r.z),
            r.zone,
            r.band,
            legacy.symbols().join(" ")
        )
    });
    Ok(0)
}

fn write_chart(spec: &ChartSpec, out: &ChartOut) -> Result<()> {
    let svg = render_svg(spec, &RenderOptions::default())?;
    fs::write(&out.out, svg).with_context(|| format!("writing {}", out.out.display()))?;
    if let Some(p) = &out.spec_out {
        fs::write(p, spec.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn chart(ctx: &Ctx, cmd: ChartCmd) -> Result<u8> {
    match cmd {
        ChartCmd::Growth {
            dataset,
            patient,
            palette,
            out,
        } => {
            let palette = ctx.palette(palette.as_deref())?;
            let ds: Dataset = ctx.catalog()?.get(&dataset)?;
            let store = ctx.records()?;
            let p = store.get_patient(&patient)?;
            let meta = ds.meta();
            let obs = store.observations(&patient, meta.indicator, meta.x_unit)?;
            let pairs: Vec<(f64, f64)> = obs.iter().map(|o| (o.x, o.y)).collect();
            let mut growth = growth_chart_spec(&ds, &pairs, &palette)?;
            growth.spec.title = format!("{} - {}", growth.spec.title, p.name);
            write_chart(&growth.spec, &out)?;
            let plotted = pairs.len() - growth.dropped.len();
            let value = json!({
                "out": out.out,
                "dataset": ds.id(),
                "patient": p.id,
                "points": plotted,
                "dropped": growth.dropped,
            });
            ctx.emit(&value, || {
                let mut s = format!("wrote {} ({plotted} points)", out.out.display());
                for d in &growth.dropped {
                    s.push_str(&format!("\n  dropped visit {}: {}", obs[d.index].visit_id, d.reason));
                }
                s
            });
        }
        ChartCmd::Partograph { input, out } => {
            let input: PartographInput = read_json(&input)?;
            let spec = partograph_spec(&input)?;
            write_chart(&spec, &out)?;
            let crossings: Vec<_> = [&input.alert, &input.action]
                .into_iter()
                .flat_map(|line| detect_crossings(&input.cervix.points, &CrossingLine::from(line)))
                .collect();
            ctx.emit(&json!({ "out": out.out, "crossings": crossings }), || {
                let mut s = format!("wrote {}", out.out.display());
                for c in &crossings {
                    s.push_str(&format!("\n  cervix crosses {} line at {:.2} h", c.line, c.x));
                }
                s
            });
        }
        ChartCmd::Dual { input, out } => {
            let input: DualAxisInput = read_json(&input)?;
            let spec = dual_axis_chart(&input)?;
            write_chart(&spec, &out)?;
            ctx.emit(&json!({ "out": out.out }), || format!("wrote {}", out.out.display()));
        }
    }
    Ok(0)
}

fn serve(ctx: &Ctx, bind: &str, port: u16) -> Result<u8> {
    tracing_subscriber::fmt()
        .with_max_level(tracing_subscriber::filter::LevelFilter::INFO)
        .with_writer(std::io::stderr)
        .init();
    let state = AppState::open(&ctx.cfg.data_dir, &ctx.cfg.palette)?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((bind, port))
            .await
            .with_context(|| format!("binding {bind}:{port}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        medgraph_sync::serve(listener, state).await?;
        Ok(0)
    })
}

fn sync(ctx: &Ctx, server: Option<String>) -> Result<u8> {
    let server = server
        .or_else(|| ctx.cfg.server_url.clone())
        .ok_or_else(|| anyhow!("no server: pass --server or set server_url in the config file"))?;
    let describe = |r: &medgraph_sync::SyncReport| {
        format!(
            "pushed {} patients, {} visits\npulled: {}\nunchanged: {}{}",
            r.pushed_patients.len(),
            r.pushed.len(),
            r.pulled.join(", "),
            r.unchanged.join(", "),
            if r.rejected.is_empty() {
                String::new()
            } else {
                format!("\nrejected: {}", r.rejected.join(", "))
            }
        )
    };
    match sync_data_dir(&ctx.cfg.data_dir, &server, &SyncOptions::default()) {
        Ok(report) => {
            ctx.emit(&report, || describe(&report));
            Ok(0)
        }
        Err(SyncError::NetworkUnreachable { message, report }) => {
            ctx.emit(&report, || describe(&report));
            bail!("server unreachable, progress saved: {message}")
        }
        Err(e) => Err(e.into()),
    }
}

fn new_id() -> String {
    uuid::Uuid::new_v4().to_string()
}

fn patient(ctx: &Ctx, cmd: PatientCmd) -> Result<u8> {
    let store = ctx.records()?;
    match cmd {
        PatientCmd::Add {
            id,
            name,
            sex,
            birth_date,
        } => {
            let p = store.create_patient(Patient {
                id: id.unwrap_or_else(new_id),
                name,
                sex,
                birth_date,
            })?;
            ctx.enqueue(|s| s.enqueue_patient(p.clone()))?;
            ctx.emit(&p, || p.id.clone());
        }
        PatientCmd::List => {
            let list = store.list_patients();
            ctx.emit(&list, || {
                list.iter()
                    .map(|p| format!("{}\t{}\t{}\t{}", p.id, p.sex, p.birth_date, p.name))
                    .collect::<Vec<_>>()
                    .join("\n")
            });
        }
        PatientCmd::Show { id } => {
            let p = store.get_patient(&id)?;
            ctx.emit(&p, || format!("{}\t{}\t{}\t{}", p.id, p.sex, p.birth_date, p.name));
        }
    }
    Ok(0)
}

fn visit(ctx: &Ctx, cmd: VisitCmd) -> Result<u8> {
    let store = ctx.records()?;
    match cmd {
        VisitCmd::Add {
            patient,
            id,
            date,
            weight,
            height,
            muac,
            oedema,
            note,
        } => {
            let mut measures = BTreeMap::new();
            for (key, value) in [
                (WEIGHT_KG, weight),
                (HEIGHT_CM, height),
                (MUAC_CM, muac),
                (OEDEMA, oedema.map(|o| f64::from(o.grade()))),
            ] {
                if let Some(v) = value {
                    measures.insert(key.to_string(), v);
                }
            }
            let v = store.add_visit(Visit {
                id: id.unwrap_or_else(new_id),
                patient_id: patient,
                date: date.unwrap_or_else(|| Local::now().date_naive()),
                measures,
                note,
            })?;
            ctx.enqueue(|s| s.enqueue_visit(v.clone()))?;
            ctx.emit(&v, || v.id.clone());
        }
        VisitCmd::List { patient } => {
            let list = store.list_visits(&patient)?;
            ctx.emit(&list, || {
                list.iter()
                    .map(|v| {
                        let m: Vec<String> = v.measures.iter().map(|(k, x)| format!("{k}={x}")).collect();
                        format!("{}\t{}\t{}", v.id, v.date, m.join(" "))
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
        }
    }
    Ok(0)
}
