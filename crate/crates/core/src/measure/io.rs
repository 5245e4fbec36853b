//! Delimited-text output for shot records, series and histograms.
//!
//! Shot files start with `#` comment lines carrying `key=value` metadata,
//! then a header row and one row per shot:
//!
//! ```text
//! # seed=7
//! # directions=25
//! # shots_per_direction=50
//! # encoding=bit 0 is sigma_z=+1 along the direction
//! direction,shot,theta,phi,sites,outcomes
//! 0,0,1.2345,0.5678,3;4,01
//! ```

use super::{Direction, MeasureError, ObservableSeries, ShotRecord, SpinHistogram};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShotFileHeader {
    pub seed: u64,
    pub directions: usize,
    pub shots_per_direction: usize,
}

fn float(x: f64) -> String {
    format!("{x}")
}

pub fn write_shot_records(path: &Path, header: &ShotFileHeader, records: &[ShotRecord]) -> Result<(), MeasureError> {
    let mut out = String::new();
    writeln!(out, "# seed={}", header.seed).unwrap();
    writeln!(out, "# directions={}", header.directions).unwrap();
    writeln!(out, "# shots_per_direction={}", header.shots_per_direction).unwrap();
    writeln!(out, "# encoding=bit 0 is sigma_z=+1 along the direction").unwrap();
    writeln!(out, "direction,shot,theta,phi,sites,outcomes").unwrap();
    for r in records {
        let sites: Vec<String> = r.sites.iter().map(usize::to_string).collect();
        let bits: String = r.outcomes.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.direction_index,
            r.shot_index,
            float(r.direction.theta),
            float(r.direction.phi),
            sites.join(";"),
            bits
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_shot_records(path: &Path) -> Result<(ShotFileHeader, Vec<ShotRecord>), MeasureError> {
    let text = std::fs::read_to_string(path)?;
    let mut header = ShotFileHeader::default();
    let mut records = Vec::new();
    let bad = |line: usize, what: &str| MeasureError::Format(format!("line {line}: {what}"));
    let mut seen_header = false;
    for (ln, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                let parse = |v: &str| v.trim().parse::<u64>().map_err(|_| bad(ln, "bad metadata value"));
                match k.trim() {
                    "seed" => header.seed = parse(v)?,
                    "directions" => header.directions = parse(v)? as usize,
                    "shots_per_direction" => header.shots_per_direction = parse(v)? as usize,
                    _ => {}
                }
            }
            continue;
        }
        if !seen_header {
            if line != "direction,shot,theta,phi,sites,outcomes" {
                return Err(bad(ln, "unexpected column header"));
            }
            seen_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(bad(ln, "expected 6 columns"));
        }
        let sites = cols[4]
            .split(';')
            .map(|s| s.parse::<usize>().map_err(|_| bad(ln, "bad site")))
            .collect::<Result<Vec<_>, _>>()?;
        let outcomes = cols[5]
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                _ => Err(bad(ln, "outcome must be 0 or 1")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if outcomes.len() != sites.len() {
            return Err(bad(ln, "outcome count differs from site count"));
        }
        records.push(ShotRecord {
            direction_index: cols[0].parse().map_err(|_| bad(ln, "bad direction index"))?,
            shot_index: cols[1].parse().map_err(|_| bad(ln, "bad shot index"))?,
            direction: Direction {
                theta: cols[2].parse().map_err(|_| bad(ln, "bad theta"))?,
                phi: cols[3].parse().map_err(|_| bad(ln, "bad phi"))?,
            },
            rng_seed: header.seed,
            sites,
            outcomes,
        });
    }
    Ok((header, records))
}

/// Series sharing one time axis as columns `time_s,<label>,…`.
pub fn write_series(path: &Path, series: &[ObservableSeries]) -> Result<(), MeasureError> {
    let first = series.first().ok_or(MeasureError::EmptySeries)?;
    if series.iter().any(|s| s.times != first.times || s.values.len() != first.times.len()) {
        return Err(MeasureError::BadTimes);
    }
    let mut out = String::from("time_s");
    for s in series {
        out.push(',');
        out.push_str(&s.label);
    }
    out.push('\n');
    for (i, t) in first.times.iter().enumerate() {
        out.push_str(&float(*t));
        for s in series {
            out.push(',');
            out.push_str(&float(s.values[i]));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Histograms as rows `time_s,axis,spin,probability`; `times` labels each histogram.
pub fn write_histograms(path: &Path, times: &[f64], histograms: &[SpinHistogram]) -> Result<(), MeasureError> {
    if times.len() != histograms.len() {
        return Err(MeasureError::BadTimes);
    }
    let mut out = String::from("time_s,axis,spin,probability\n");
    for (t, h) in times.iter().zip(histograms) {
        for (spin, p) in h.bins() {
            writeln!(out, "{},{},{},{}", float(*t), h.axis.label(), spin, float(p)).unwrap();
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Axis;

    #[test]
    fn shot_file_round_trip() {
        let recs = vec![
            ShotRecord {
                direction_index: 0,
                direction: Direction { theta: 0.3, phi: 5.1 },
                shot_index: 0,
                rng_seed: 3,
                sites: vec![4, 5],
                outcomes: vec![0, 1],
            },
            ShotRecord {
                direction_index: 1,
                direction: Direction { theta: 2.0 / 3.0, phi: 0.1 },
                shot_index: 1,
                rng_seed: 3,
                sites: vec![4, 5],
                outcomes: vec![1, 1],
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shots.csv");
        let header = ShotFileHeader { seed: 3, directions: 2, shots_per_direction: 1 };
        write_shot_records(&path, &header, &recs).unwrap();
        let (h, back) = read_shot_records(&path).unwrap();
        assert_eq!(h, header);
        assert_eq!(back, recs);
    }

    #[test]
    fn series_and_histograms_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let s = ObservableSeries { times: vec![0.0, 1e-3], values: vec![1.0, 0.5], label: "sx".into() };
        write_series(&dir.path().join("s.csv"), &[s]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
        assert!(text.starts_with("time_s,sx\n"));
        assert_eq!(text.lines().count(), 3);
        let h = SpinHistogram { axis: Axis::Z, n_spins: 1, probabilities: vec![0.25, 0.75] };
        write_histograms(&dir.path().join("h.csv"), &[0.0], &[h]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
        assert!(text.contains(",z,0.5,"));
    }
}
