//! Mode-table (TOML) and position (CSV) files.
//!
//! Mode table layout:
//!
//! ```toml
//! n_ions = 2
//! [[mode]]
//! frequency_khz = 1920.0      # kHz/2π
//! amplitudes = [0.7071, 0.7071]
//! ```
//!
//! Positions: `ion,x_um,z_um` header, one row per ion.

use super::{CrystalError, ModeTable};
use crate::{angular_to_khz, khz_to_angular};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct ModeFile {
    n_ions: usize,
    mode: Vec<ModeEntry>,
}

#[derive(Serialize, Deserialize)]
struct ModeEntry {
    frequency_khz: f64,
    amplitudes: Vec<f64>,
}

pub fn write_mode_table(path: &Path, table: &ModeTable) -> Result<(), CrystalError> {
    let file = ModeFile {
        n_ions: table.n_ions(),
        mode: table
            .frequencies
            .iter()
            .zip(&table.vectors)
            .map(|(&w, v)| ModeEntry { frequency_khz: angular_to_khz(w), amplitudes: v.clone() })
            .collect(),
    };
    let text = toml::to_string(&file).map_err(|e| CrystalError::Format(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_mode_table(path: &Path) -> Result<ModeTable, CrystalError> {
    let text = std::fs::read_to_string(path)?;
    let file: ModeFile = toml::from_str(&text).map_err(|e| CrystalError::Format(e.to_string()))?;
    if file.mode.iter().any(|m| m.amplitudes.len() != file.n_ions) {
        return Err(CrystalError::Format("amplitude list length differs from n_ions".into()));
    }
    ModeTable::from_parts(
        file.mode.iter().map(|m| khz_to_angular(m.frequency_khz)).collect(),
        file.mode.into_iter().map(|m| m.amplitudes).collect(),
    )
}

pub fn write_positions_csv(path: &Path, positions_um: &[[f64; 2]]) -> Result<(), CrystalError> {
    let mut out = String::from("ion,x_um,z_um\n");
    for (i, p) in positions_um.iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", p[0], p[1]));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_positions_csv(path: &Path) -> Result<Vec<[f64; 2]>, CrystalError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |s: &str| s.parse::<f64>().map_err(|e| CrystalError::Format(format!("line {}: {e}", line_no + 1)));
        if fields.len() != 3 {
            return Err(CrystalError::Format(format!("line {}: expected 3 fields", line_no + 1)));
        }
        out.push([parse(fields[1])?, parse(fields[2])?]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_table_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("modes.toml");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let table = ModeTable::from_parts(vec![khz_to_angular(1920.0), khz_to_angular(1915.5)], vec![vec![h, h], vec![h, -h]]).unwrap();
        write_mode_table(&path, &table).unwrap();
        let back = read_mode_table(&path).unwrap();
        assert_eq!(back.vectors, table.vectors);
        for (a, b) in back.frequencies.iter().zip(&table.frequencies) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
        let pos = dir.path().join("pos.csv");
        write_positions_csv(&pos, &[[1.5, -2.0], [0.0, 3.25]]).unwrap();
        assert_eq!(read_positions_csv(&pos).unwrap(), vec![[1.5, -2.0], [0.0, 3.25]]);
    }
}
