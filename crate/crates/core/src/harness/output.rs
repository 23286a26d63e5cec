use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Algorithm, HarnessError};

/// Which quantity the x column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XKind {
    #[serde(rename = "snr_db")]
    SnrDb,
    #[serde(rename = "qos")]
    Qos,
}

/// One (trial, grid point, algorithm) outcome. Field order is the CSV column
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecrecyResult {
    pub trial_id: u64,
    pub algorithm: Algorithm,
    pub x_kind: XKind,
    pub x_value: f64,
    pub rate_bob: f64,
    pub rate_eve: f64,
    pub secrecy_rate: f64,
    #[serde(serialize_with = "bool_as_digit", deserialize_with = "digit_as_bool")]
    pub infeasible: bool,
}

fn bool_as_digit<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*v))
}

fn digit_as_bool<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    match u8::deserialize(d)? {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(serde::de::Error::custom(format!("infeasible must be 0 or 1, got {other}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Orders rows by algorithm tag, then x value, then trial id.
pub fn sort_results(results: &mut [SecrecyResult]) {
    results.sort_by(|a, b| {
        a.algorithm
            .tag()
            .cmp(b.algorithm.tag())
            .then(a.x_value.total_cmp(&b.x_value))
            .then(a.trial_id.cmp(&b.trial_id))
            .then_with(|| match (a.x_kind, b.x_kind) {
                (x, y) if x == y => Ordering::Equal,
                (XKind::SnrDb, _) => Ordering::Less,
                _ => Ordering::Greater,
            })
    });
}

fn sorted(results: &[SecrecyResult]) -> Vec<SecrecyResult> {
    let mut rows = results.to_vec();
    sort_results(&mut rows);
    rows
}

/// Writes a header row and one row per result, sorted.
pub fn write_csv<W: Write>(results: &[SecrecyResult], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in sorted(results) {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a JSON array of row objects, sorted.
pub fn write_json<W: Write>(results: &[SecrecyResult], mut writer: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut writer, &sorted(results)).map_err(|e| HarnessError::Format(e.to_string()))?;
    writeln!(writer)?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<SecrecyResult>, HarnessError> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<Result<Vec<_>, _>>()
        .map_err(csv_error)
}

fn csv_error(e: csv::Error) -> HarnessError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::Io(io),
            _ => unreachable!(),
        }
    } else {
        HarnessError::Format(e.to_string())
    }
}

/// Writes `results` to `destination` in the requested format.
pub fn emit_results(results: &[SecrecyResult], format: OutputFormat, destination: &Path) -> Result<(), HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::Format("no results to emit".into()));
    }
    let mut file = BufWriter::new(File::create(destination)?);
    match format {
        OutputFormat::Csv => write_csv(results, &mut file)?,
        OutputFormat::Json => write_json(results, &mut file)?,
    }
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn row(trial_id: u64, algorithm: Algorithm, x: f64) -> SecrecyResult {
        SecrecyResult {
            trial_id,
            algorithm,
            x_kind: XKind::SnrDb,
            x_value: x,
            rate_bob: 3.25,
            rate_eve: 1.0,
            secrecy_rate: 2.25,
            infeasible: false,
        }
    }

    #[test]
    fn single_row_csv_has_header_and_row() {
        let mut buf = Vec::new();
        write_csv(&[row(0, Algorithm::KnownCsi, 10.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "trial_id,algorithm,x_kind,x_value,rate_bob,rate_eve,secrecy_rate,infeasible"
        );
        assert_eq!(lines[1], "0,known-csi,snr_db,10.0,3.25,1.0,2.25,0");
    }

    #[test]
    fn rows_group_by_algorithm_then_x() {
        let rows = vec![
            row(1, Algorithm::KnownCsi, 10.0),
            row(0, Algorithm::HybridNoPls, 0.0),
            row(0, Algorithm::KnownCsi, 0.0),
            row(0, Algorithm::KnownCsi, 10.0),
            row(1, Algorithm::FullDigitalGed, -10.0),
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        let keys: Vec<(&str, f64, u64)> = back.iter().map(|r| (r.algorithm.tag(), r.x_value, r.trial_id)).collect();
        assert_eq!(
            keys,
            vec![
                ("full-digital-ged", -10.0, 1),
                ("hybrid-no-pls", 0.0, 0),
                ("known-csi", 0.0, 0),
                ("known-csi", 10.0, 0),
                ("known-csi", 10.0, 1),
            ]
        );
    }

    #[test]
    fn json_rows_carry_csv_keys() {
        let mut buf = Vec::new();
        let mut r = row(4, Algorithm::UnknownCsiAn, 2.0);
        r.x_kind = XKind::Qos;
        r.infeasible = true;
        write_json(&[r], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let obj = v.as_array().unwrap()[0].as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
        for k in ["trial_id", "algorithm", "x_kind", "x_value", "rate_bob", "rate_eve", "secrecy_rate", "infeasible"] {
            assert!(keys.contains(&k));
        }
        assert_eq!(obj["infeasible"], 1);
        assert_eq!(obj["x_kind"], "qos");
    }

    #[test]
    fn emit_rejects_empty_results() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_results(&[], OutputFormat::Csv, &dir.path().join("x.csv")).is_err());
    }

    #[test]
    fn emit_to_missing_directory_is_io_failure() {
        let err = emit_results(
            &[row(0, Algorithm::KnownCsi, 0.0)],
            OutputFormat::Csv,
            Path::new("/nonexistent-dir/out.csv"),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    fn arb_result() -> impl Strategy<Value = SecrecyResult> {
        (
            0u64..1000,
            prop::sample::select(Algorithm::ALL.to_vec()),
            prop::bool::ANY,
            -50.0f64..50.0,
            0.0f64..40.0,
            0.0f64..40.0,
            prop::bool::ANY,
        )
            .prop_map(|(trial_id, algorithm, qos, x_value, rate_bob, rate_eve, infeasible)| SecrecyResult {
                trial_id,
                algorithm,
                x_kind: if qos { XKind::Qos } else { XKind::SnrDb },
                x_value,
                rate_bob,
                rate_eve,
                secrecy_rate: (rate_bob - rate_eve).max(0.0),
                infeasible,
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(rows in prop::collection::vec(arb_result(), 1..20)) {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).unwrap();
            let back = read_csv(buf.as_slice()).unwrap();
            let mut expected = rows.clone();
            sort_results(&mut expected);
            prop_assert_eq!(back, expected);
        }
    }
}
