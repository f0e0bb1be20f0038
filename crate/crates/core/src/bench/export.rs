//! File formats for timings, surfaces and calibration maps.
//!
//! * timings CSV: one row per replicate,
//!   `agents,rate,method,width,height,steps,seed,survey_d,survey_n,replicate,elapsed_s`;
//! * matrix CSV: header `p\N,<N...>`, then one row per rate;
//! * JSON: `{ n_axis, p_axis, values | labels, provenance }`;
//! * gnuplot: whitespace-separated `N p value` blocks (one per rate, blank
//!   line between blocks) and `N p` isoline vertices, one block per line.

use std::fmt::Display;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::calibration::{CalibrationMap, Provenance};
use super::isoline::Polyline;
use super::surface::SurfaceData;
use super::timing::{ScenarioKey, TimingRecord};
use crate::observers::ObservationMethod;
use crate::{Error, Result};

pub const TIMING_HEADER: [&str; 11] = [
    "agents",
    "rate",
    "method",
    "width",
    "height",
    "steps",
    "seed",
    "survey_d",
    "survey_n",
    "replicate",
    "elapsed_s",
];

const MATRIX_CORNER: &str = "p\\N";

fn opt<T: Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Incremental timings writer; each record is flushed as soon as it is
/// written so partial calibrations survive interruption.
pub struct TimingCsvWriter<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> TimingCsvWriter<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(inner);
        writer.write_record(TIMING_HEADER)?;
        writer.flush()?;
        Ok(Self { writer })
    }

    pub fn write(&mut self, record: &TimingRecord) -> Result<()> {
        let k = &record.key;
        for (i, e) in record.elapsed.iter().enumerate() {
            self.writer.write_record([
                k.agents.to_string(),
                k.rate.to_string(),
                k.method_label().to_string(),
                k.width.to_string(),
                k.height.to_string(),
                k.steps.to_string(),
                k.seed.to_string(),
                opt(k.survey_d),
                opt(k.survey_n),
                i.to_string(),
                e.to_string(),
            ])?;
        }
        self.writer.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.writer
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))
    }
}

pub fn write_timings_csv<W: Write>(inner: W, records: &[TimingRecord]) -> Result<()> {
    let mut w = TimingCsvWriter::new(inner)?;
    for r in records {
        w.write(r)?;
    }
    Ok(())
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    row.get(i)
        .ok_or_else(|| Error::Parse(format!("missing column {name}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad value `{}` in column {name}", &row[i])))
}

fn opt_field<T: std::str::FromStr>(
    row: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<Option<T>> {
    match row.get(i) {
        Some("") | None => Ok(None),
        Some(_) => field(row, i, name).map(Some),
    }
}

/// Read timings back, grouping consecutive replicate rows of one scenario.
pub fn read_timings_csv<R: Read>(inner: R) -> Result<Vec<TimingRecord>> {
    let mut reader = csv::Reader::from_reader(inner);
    let header = reader.headers()?.clone();
    if header.iter().ne(TIMING_HEADER) {
        return Err(Error::Parse("unexpected timings header".into()));
    }
    let mut out: Vec<(ScenarioKey, Vec<f64>)> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let method = match &row[2] {
            "none" => None,
            m => Some(m.parse::<ObservationMethod>()?),
        };
        let key = ScenarioKey {
            agents: field(&row, 0, "agents")?,
            rate: field(&row, 1, "rate")?,
            method,
            width: field(&row, 3, "width")?,
            height: field(&row, 4, "height")?,
            steps: field(&row, 5, "steps")?,
            seed: field(&row, 6, "seed")?,
            survey_d: opt_field(&row, 7, "survey_d")?,
            survey_n: opt_field(&row, 8, "survey_n")?,
        };
        let replicate: usize = field(&row, 9, "replicate")?;
        let elapsed: f64 = field(&row, 10, "elapsed_s")?;
        match out.last_mut() {
            Some((k, e)) if *k == key && replicate == e.len() => e.push(elapsed),
            _ => out.push((key, vec![elapsed])),
        }
    }
    Ok(out
        .into_iter()
        .map(|(k, e)| TimingRecord::new(k, e))
        .collect())
}

fn write_matrix<W: Write, T: Display>(
    inner: W,
    n_axis: &[f64],
    p_axis: &[f64],
    rows: &[Vec<T>],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(inner);
    let mut header = vec![MATRIX_CORNER.to_string()];
    header.extend(n_axis.iter().map(f64::to_string));
    w.write_record(&header)?;
    for (p, row) in p_axis.iter().zip(rows) {
        let mut rec = vec![p.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_surface_csv<W: Write>(inner: W, surface: &SurfaceData) -> Result<()> {
    write_matrix(inner, &surface.n_axis, &surface.p_axis, &surface.values)
}

pub fn read_surface_csv<R: Read>(inner: R) -> Result<SurfaceData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(inner);
    let mut rows = reader.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::Parse("empty surface file".into()))??;
    if header.get(0) != Some(MATRIX_CORNER) {
        return Err(Error::Parse(format!(
            "surface header must start with `{MATRIX_CORNER}`"
        )));
    }
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number `{s}`")))
    };
    let n_axis = header
        .iter()
        .skip(1)
        .map(parse)
        .collect::<Result<Vec<_>>>()?;
    let mut p_axis = Vec::new();
    let mut values = Vec::new();
    for row in rows {
        let row = row?;
        let mut it = row.iter();
        p_axis.push(parse(it.next().unwrap_or(""))?);
        values.push(it.map(parse).collect::<Result<Vec<_>>>()?);
    }
    SurfaceData::new(n_axis, p_axis, values)
}

pub fn write_map_csv<W: Write>(inner: W, map: &CalibrationMap) -> Result<()> {
    write_matrix(inner, &map.n_axis, &map.p_axis, &map.labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDocument {
    pub n_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    #[serde(default)]
    pub provenance: Option<Provenance>,
}

pub fn write_surface_json<W: Write>(
    inner: W,
    surface: &SurfaceData,
    provenance: Option<Provenance>,
) -> Result<()> {
    let doc = SurfaceDocument {
        n_axis: surface.n_axis.clone(),
        p_axis: surface.p_axis.clone(),
        values: surface.values.clone(),
        provenance,
    };
    serde_json::to_writer_pretty(inner, &doc)?;
    Ok(())
}

pub fn read_surface_json<R: Read>(inner: R) -> Result<(SurfaceData, Option<Provenance>)> {
    let doc: SurfaceDocument = serde_json::from_reader(inner)?;
    Ok((
        SurfaceData::new(doc.n_axis, doc.p_axis, doc.values)?,
        doc.provenance,
    ))
}

pub fn write_map_json<W: Write>(inner: W, map: &CalibrationMap) -> Result<()> {
    map.validate()?;
    serde_json::to_writer_pretty(inner, map)?;
    Ok(())
}

pub fn read_map_json<R: Read>(inner: R) -> Result<CalibrationMap> {
    let map: CalibrationMap = serde_json::from_reader(inner)?;
    map.validate()?;
    Ok(map)
}

pub fn write_surface_gnuplot<W: Write>(mut out: W, surface: &SurfaceData) -> Result<()> {
    writeln!(out, "# N p value")?;
    for (r, &p) in surface.p_axis.iter().enumerate() {
        for (c, &n) in surface.n_axis.iter().enumerate() {
            writeln!(out, "{n} {p} {}", surface.values[r][c])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_isolines_gnuplot<W: Write>(mut out: W, lines: &[Polyline]) -> Result<()> {
    writeln!(out, "# N p (one block per isoline)")?;
    for line in lines {
        for &(n, p) in line {
            writeln!(out, "{n} {p}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(agents: u32, method: Option<ObservationMethod>) -> ScenarioKey {
        ScenarioKey {
            agents,
            rate: 0.2,
            method,
            width: 100,
            height: 100,
            steps: 1000,
            seed: 7,
            survey_d: method
                .filter(|m| *m == ObservationMethod::Survey)
                .map(|_| 0.08),
            survey_n: method
                .filter(|m| *m == ObservationMethod::Survey)
                .map(|_| 100),
        }
    }

    #[test]
    fn timings_round_trip() {
        let records = vec![
            TimingRecord::new(key(2000, None), vec![0.5, 0.25, 0.125]),
            TimingRecord::new(key(2000, Some(ObservationMethod::Survey)), vec![0.75, 0.5]),
            TimingRecord::new(key(4000, Some(ObservationMethod::BruteForce)), vec![1.0]),
        ];
        let mut buf = Vec::new();
        write_timings_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "agents,rate,method,width,height,steps,seed,survey_d,survey_n,replicate,elapsed_s\n"
        ));
        assert!(text.contains("2000,0.2,survey,100,100,1000,7,0.08,100,1,0.5\n"));
        assert_eq!(read_timings_csv(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn surface_csv_layout() {
        let s = SurfaceData::new(
            vec![2000.0, 4000.0],
            vec![0.05, 0.1],
            vec![vec![1.5, -2.0], vec![0.0, 3.25]],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_surface_csv(&mut buf, &s).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "p\\N,2000,4000\n0.05,1.5,-2\n0.1,0,3.25\n"
        );
        assert_eq!(read_surface_csv(buf.as_slice()).unwrap(), s);
        assert!(read_surface_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn map_json_round_trip() {
        let map = CalibrationMap {
            n_axis: vec![2000.0, 4000.0],
            p_axis: vec![0.1],
            labels: vec![vec![
                ObservationMethod::BruteForce,
                ObservationMethod::Survey,
            ]],
            provenance: Provenance::capture(),
        };
        let mut buf = Vec::new();
        write_map_json(&mut buf, &map).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"brute-force\""));
        assert_eq!(read_map_json(buf.as_slice()).unwrap(), map);
        let mut csv = Vec::new();
        write_map_csv(&mut csv, &map).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "p\\N,2000,4000\n0.1,brute-force,survey\n"
        );
    }

    #[test]
    fn gnuplot_blocks() {
        let s = SurfaceData::new(
            vec![1.0, 2.0],
            vec![0.1, 0.2],
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_surface_gnuplot(&mut buf, &s).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# N p value\n1 0.1 1\n2 0.1 2\n\n1 0.2 3\n2 0.2 4\n\n"
        );
        let mut buf = Vec::new();
        write_isolines_gnuplot(&mut buf, &[vec![(1.5, 0.1), (1.5, 0.2)]]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# N p (one block per isoline)\n1.5 0.1\n1.5 0.2\n\n"
        );
    }

    proptest! {
        #[test]
        fn surface_files_round_trip(
            rows in 1usize..5, cols in 1usize..5,
            vals in prop::collection::vec(-1e6f64..1e6, 25),
        ) {
            let n_axis: Vec<f64> = (0..cols).map(|c| 2000.0 * (c + 1) as f64).collect();
            let p_axis: Vec<f64> = (0..rows).map(|r| 0.05 + 0.1 * r as f64).collect();
            let values = (0..rows).map(|r| (0..cols).map(|c| vals[r * 5 + c]).collect()).collect();
            let s = SurfaceData::new(n_axis, p_axis, values).unwrap();
            let mut csv = Vec::new();
            write_surface_csv(&mut csv, &s).unwrap();
            prop_assert_eq!(read_surface_csv(csv.as_slice()).unwrap(), s.clone());
            let mut json = Vec::new();
            write_surface_json(&mut json, &s, None).unwrap();
            prop_assert_eq!(read_surface_json(json.as_slice()).unwrap().0, s);
        }
    }
}
