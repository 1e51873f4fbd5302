use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{normalize, DataError, Dataset, FeatureKind, Mask};
use crate::nn::Matrix;

/// Parsed CSV before feature typing.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub names: Vec<String>,
    pub values: Matrix,
    pub mask: Mask,
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn parse_table<R: Read>(reader: R, missing_token: &str) -> Result<CsvTable, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let d = names.len();
    let mut data = Vec::new();
    let mut bits = Vec::new();
    let mut n = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // Row numbers are 1-based data rows (the header is row 0).
        let row = i + 1;
        if rec.len() != d {
            return Err(DataError::Ragged {
                row,
                expected: d,
                found: rec.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            if cell == missing_token {
                data.push(0.0);
                bits.push(false);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| DataError::Parse {
                row,
                column: names[c].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse {
                    row,
                    column: names[c].clone(),
                    value: cell.to_string(),
                });
            }
            data.push(v);
            bits.push(true);
        }
        n += 1;
    }
    Ok(CsvTable {
        names,
        values: Matrix::new(n, d, data)?,
        mask: Mask::from_bits(n, d, bits)?,
    })
}

fn infer_kinds(table: &CsvTable) -> Vec<FeatureKind> {
    (0..table.values.cols())
        .map(|c| {
            let mut any = false;
            let binary = (0..table.values.rows()).all(|r| {
                if !table.mask.get(r, c) {
                    return true;
                }
                any = true;
                let v = table.values.get(r, c);
                v == 0.0 || v == 1.0
            });
            if binary && any {
                FeatureKind::Binary
            } else {
                FeatureKind::Continuous
            }
        })
        .collect()
}

/// Reads a CSV into an unnormalized dataset.
///
/// Cells equal to `missing_token` (after trimming) are missing. Without
/// explicit `feature_kinds`, a column whose observed cells are all 0 or 1 is
/// typed binary.
pub fn read_csv(path: &Path, missing_token: &str, feature_kinds: Option<&[FeatureKind]>) -> Result<Dataset, DataError> {
    read_csv_from(open(path)?, missing_token, feature_kinds)
}

pub(crate) fn read_csv_from<R: Read>(
    reader: R,
    missing_token: &str,
    feature_kinds: Option<&[FeatureKind]>,
) -> Result<Dataset, DataError> {
    let table = parse_table(reader, missing_token)?;
    let kinds = match feature_kinds {
        Some(k) if k.len() != table.names.len() => {
            return Err(DataError::Usage(format!(
                "{} feature kinds given for {} columns",
                k.len(),
                table.names.len()
            )))
        }
        Some(k) => k.to_vec(),
        None => infer_kinds(&table),
    };
    Dataset::new(table.names, kinds, table.values, table.mask)
}

/// Reads a CSV and min-max normalizes it; the parameters stay on the dataset.
pub fn load_csv(path: &Path, missing_token: &str, feature_kinds: Option<&[FeatureKind]>) -> Result<Dataset, DataError> {
    let ds = read_csv(path, missing_token, feature_kinds)?;
    Ok(normalize(&ds).0)
}

/// Writes `values` with `missing_token` in cells the mask marks missing.
pub fn write_csv<W: Write>(
    writer: W,
    names: &[String],
    values: &Matrix,
    mask: &Mask,
    missing_token: &str,
) -> Result<(), DataError> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    w.write_record(names)?;
    let mut fields = Vec::with_capacity(values.cols());
    for r in 0..values.rows() {
        fields.clear();
        for c in 0..values.cols() {
            if mask.get(r, c) {
                fields.push(format!("{}", values.get(r, c)));
            } else {
                fields.push(missing_token.to_string());
            }
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Companion 0/1 mask file with the same header and shape.
pub fn write_mask_csv<W: Write>(writer: W, names: &[String], mask: &Mask) -> Result<(), DataError> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    w.write_record(names)?;
    for r in 0..mask.rows() {
        w.write_record(mask.row(r).iter().map(|&b| if b { "1" } else { "0" }))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<Dataset, DataError> {
        read_csv_from(s.as_bytes(), "", None)
    }

    #[test]
    fn two_by_two_with_missing_cell() {
        let ds = read("a,b\n1.0,\n3.0,4.0").unwrap();
        assert_eq!((ds.n(), ds.d()), (2, 2));
        assert_eq!(ds.mask(), &Mask::from_rows(&[[1u8, 0], [1, 1]]).unwrap());
        assert_eq!(ds.raw().row(1), &[3.0, 4.0]);
    }

    #[test]
    fn all_present_gives_full_mask() {
        let ds = read("a,b\n1,2\n3,4\n").unwrap();
        assert!(ds.mask().is_fully_observed());
    }

    #[test]
    fn parse_error_names_row_and_column() {
        match read("a,b\n1,2\n3,oops\n").unwrap_err() {
            DataError::Parse { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "b", "oops"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(matches!(
            read("a,b\n1,2\n3\n").unwrap_err(),
            DataError::Ragged { row: 2, expected: 2, found: 1 }
        ));
    }

    #[test]
    fn declared_binary_column_validated() {
        let kinds = [FeatureKind::Continuous, FeatureKind::Binary];
        let err = read_csv_from("a,y\n1,0\n2,3\n".as_bytes(), "", Some(&kinds)).unwrap_err();
        assert!(matches!(err, DataError::BinaryValue { .. }));
    }

    #[test]
    fn custom_missing_token() {
        let ds = read_csv_from("a,b\nNA,2\n3,4\n".as_bytes(), "NA", None).unwrap();
        assert!(!ds.mask().get(0, 0));
    }

    #[test]
    fn infers_binary_columns() {
        let ds = read("a,y\n0.5,1\n2,0\n,1\n").unwrap();
        assert_eq!(ds.kinds(), vec![FeatureKind::Continuous, FeatureKind::Binary]);
    }

    #[test]
    fn writes_empty_fields_for_missing() {
        let ds = read("a,b\n1.5,\n3,4\n").unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &ds.names(), ds.raw(), ds.mask(), "").unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1.5,\n3,4\n");
        let mut mbuf = Vec::new();
        write_mask_csv(&mut mbuf, &ds.names(), ds.mask()).unwrap();
        assert_eq!(String::from_utf8(mbuf).unwrap(), "a,b\n1,0\n1,1\n");
    }
}
