//! `plot`: SVG figures from stored estimate tables.
//!
//! For every `results/estimates-<id>.csv` it writes
//! `plots/<id>-growth.svg` (`M_n / n` against `n`, one line per `m`),
//! `plots/<id>-truncation.svg` (the estimate against finite `m`, one line
//! per `n`, with 95% bars) and `plots/<id>-data.csv` holding exactly the
//! plotted numbers. Nothing is written unless every input parses.

use std::collections::BTreeMap;
use std::io::Write;

use super::store;
use crate::plot::{line_plot, Point, Series};
use crate::store::{fmt_f64, parse_f64};
use crate::{CliError, Outcome};
use crate::config::Params;

#[derive(Debug, Clone)]
struct Row {
    n: usize,
    m_label: String,
    m: f64,
    mean: f64,
    half_width: f64,
}

pub const DATA_HEADER: &[&str] = &["experiment_id", "plot", "series", "x", "y", "err"];

fn parse_rows(path: &str, records: &[csv::StringRecord]) -> Result<(String, String, Vec<Row>), CliError> {
    let bad = |message: &str| CliError::Malformed {
        path: path.to_string(),
        message: message.to_string(),
    };
    let mut id = String::new();
    let mut law = String::new();
    let mut rows = Vec::new();
    for r in records {
        if r.len() < 12 {
            return Err(bad("expected 12 columns"));
        }
        id = r[0].to_string();
        law = format!("{}:{} (d={})", &r[2], &r[3], &r[1]);
        let num = |i: usize| parse_f64(&r[i]).ok_or_else(|| bad("non-numeric field"));
        rows.push(Row {
            n: r[4].parse().map_err(|_| bad("n is not an integer"))?,
            m_label: r[5].to_string(),
            m: num(5)?,
            mean: num(7)?,
            half_width: 0.5 * (num(10)? - num(9)?),
        });
    }
    Ok((id, law, rows))
}

fn to_csv(records: &[[String; 6]]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DATA_HEADER).expect("in-memory write");
    for r in records {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn run(params: &Params, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let store = store(params);
    let inputs = store.list("results", "estimates-", ".csv")?;
    let mut outputs: Vec<(String, String, String)> = Vec::new(); // (id, file, contents)
    for input in &inputs {
        let records = store.read_csv(input)?.unwrap_or_default();
        if records.is_empty() {
            continue;
        }
        let (id, law, rows) = parse_rows(input, &records)?;
        let mut data: Vec<[String; 6]> = Vec::new();

        // growth: one series per m, in the table's order of appearance
        let mut by_m: Vec<(String, Vec<Point>)> = Vec::new();
        for r in &rows {
            let point = Point {
                x: r.n as f64,
                y: r.mean,
                err: r.half_width,
            };
            match by_m.iter_mut().find(|(label, _)| *label == r.m_label) {
                Some((_, pts)) => pts.push(point),
                None => by_m.push((r.m_label.clone(), vec![point])),
            }
        }
        let growth: Vec<Series> = by_m
            .into_iter()
            .map(|(label, mut points)| {
                points.sort_by(|a, b| a.x.total_cmp(&b.x));
                Series {
                    name: format!("m = {label}"),
                    points,
                }
            })
            .collect();
        for s in &growth {
            for p in &s.points {
                data.push([id.clone(), "growth".into(), s.name.clone(), fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.err)]);
            }
        }
        let growth_file = format!("plots/{id}-growth.svg");
        outputs.push((
            id.clone(),
            growth_file,
            line_plot(&format!("M_n / n, {law}"), "n", "mean of M_n / n", &growth),
        ));

        // truncation: one series per n over the finite truncation levels
        let mut by_n: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
        for r in rows.iter().filter(|r| r.m.is_finite()) {
            by_n.entry(r.n).or_default().push(Point {
                x: r.m,
                y: r.mean,
                err: r.half_width,
            });
        }
        if !by_n.is_empty() {
            let trunc: Vec<Series> = by_n
                .into_iter()
                .map(|(n, mut points)| {
                    points.sort_by(|a, b| a.x.total_cmp(&b.x));
                    Series {
                        name: format!("n = {n}"),
                        points,
                    }
                })
                .collect();
            for s in &trunc {
                for p in &s.points {
                    data.push([id.clone(), "truncation".into(), s.name.clone(), fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.err)]);
                }
            }
            outputs.push((
                id.clone(),
                format!("plots/{id}-truncation.svg"),
                line_plot(&format!("truncated estimate vs m, {law}"), "m", "mean of M_n(m) / n", &trunc),
            ));
        }
        outputs.push((id.clone(), format!("plots/{id}-data.csv"), to_csv(&data)));
    }
    if outputs.is_empty() {
        return Err(CliError::EmptyStore(store.root().display().to_string()));
    }

    let mut manifest = store.load_manifest()?;
    for (id, file, contents) in &outputs {
        store.write(file, contents)?;
        let hash = manifest
            .experiments
            .get(id)
            .map_or_else(|| id.clone(), |e| e.config_hash.clone());
        manifest.files.insert(file.clone(), hash);
        writeln!(out, "wrote {file}").map_err(|e| CliError::Io {
            path: "<stdout>".into(),
            source: e,
        })?;
    }
    store.save_manifest(&manifest)?;
    Ok(Outcome::Success)
}
