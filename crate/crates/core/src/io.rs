//! File formats: raw binary cubes with text sidecar headers, CSV rasters and
//! matrices, binary PGM images, and JSON truth records.
//!
//! Cube payloads are little-endian float32, band-interleaved-by-pixel (all
//! bands of pixel 0, then pixel 1, ...), pixels in row-major order. The
//! sidecar header lives at `<payload>.hdr` and holds `key=value` lines.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::corpus::SegmentationMap;
use crate::error::{Error, Result};
use crate::synth::SceneTruth;
use crate::types::HyperspectralCube;

fn header_path(payload: &Path) -> PathBuf {
    let mut name = payload
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".hdr");
    payload.with_file_name(name)
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false)
}

struct CubeHeader {
    rows: usize,
    cols: usize,
    bands: usize,
}

fn parse_header(path: &Path) -> Result<CubeHeader> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut rows = None;
    let mut cols = None;
    let mut bands = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::format(
                "cube header",
                path.display().to_string(),
                format!("line {}: expected key=value", lineno + 1),
            )
        })?;
        let key = key.trim();
        let value = value.trim();
        let parse_count = |v: &str| -> Result<usize> {
            v.parse().map_err(|_| {
                Error::format(
                    "cube header",
                    path.display().to_string(),
                    format!("invalid count `{v}` for `{key}`"),
                )
            })
        };
        match key {
            "rows" => rows = Some(parse_count(value)?),
            "cols" => cols = Some(parse_count(value)?),
            "bands" => bands = Some(parse_count(value)?),
            "dtype" => {
                if value != "float32" {
                    return Err(Error::format(
                        "cube header",
                        path.display().to_string(),
                        format!("unsupported dtype `{value}` (expected float32)"),
                    ));
                }
            }
            "layout" => {
                if value != "band-interleaved-by-pixel" {
                    return Err(Error::format(
                        "cube header",
                        path.display().to_string(),
                        format!("unsupported layout `{value}`"),
                    ));
                }
            }
            "byteorder" => {
                if value != "little-endian" {
                    return Err(Error::format(
                        "cube header",
                        path.display().to_string(),
                        format!("unsupported byte order `{value}`"),
                    ));
                }
            }
            _ => {} // unknown keys are ignored
        }
    }
    let missing = |what: &str| {
        Error::format(
            "cube header",
            path.display().to_string(),
            format!("missing `{what}`"),
        )
    };
    Ok(CubeHeader {
        rows: rows.ok_or_else(|| missing("rows"))?,
        cols: cols.ok_or_else(|| missing("cols"))?,
        bands: bands.ok_or_else(|| missing("bands"))?,
    })
}

/// Write a cube as a float32 payload plus its `<path>.hdr` sidecar.
pub fn write_cube(path: &Path, cube: &HyperspectralCube) -> Result<()> {
    let mut payload = Vec::with_capacity(cube.values().len() * 4);
    for &v in cube.values() {
        payload.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, payload).map_err(|e| Error::io(path.display().to_string(), e))?;
    let hdr = header_path(path);
    let text = format!(
        "rows={}\ncols={}\nbands={}\ndtype=float32\nlayout=band-interleaved-by-pixel\nbyteorder=little-endian\n",
        cube.rows(),
        cube.cols(),
        cube.bands()
    );
    fs::write(&hdr, text).map_err(|e| Error::io(hdr.display().to_string(), e))
}

/// Read a cube: CSV (one pixel per line) when the path ends in `.csv`,
/// otherwise the binary payload described by its `<path>.hdr` sidecar. A CSV
/// without a sidecar is treated as an Nx1 image.
pub fn read_cube(path: &Path) -> Result<HyperspectralCube> {
    if is_csv(path) {
        return read_cube_csv(path);
    }
    let header = parse_header(&header_path(path))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let expected = header.rows * header.cols * header.bands * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            "cube payload",
            path.display().to_string(),
            format!("expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    HyperspectralCube::new(header.rows, header.cols, header.bands, values)
}

fn read_cube_csv(path: &Path) -> Result<HyperspectralCube> {
    let matrix = read_matrix_csv(path)?;
    if matrix.is_empty() {
        return Err(Error::format(
            "cube csv",
            path.display().to_string(),
            "no pixels".to_string(),
        ));
    }
    let bands = matrix[0].len();
    let n = matrix.len();
    let values: Vec<f64> = matrix.into_iter().flatten().collect();
    let hdr = header_path(path);
    let (rows, cols) = if hdr.exists() {
        let header = parse_header(&hdr)?;
        if header.bands != bands || header.rows * header.cols != n {
            return Err(Error::format(
                "cube csv",
                path.display().to_string(),
                format!(
                    "header says {}x{}x{} but csv has {n} pixels x {bands} bands",
                    header.rows, header.cols, header.bands
                ),
            ));
        }
        (header.rows, header.cols)
    } else {
        (n, 1)
    };
    HyperspectralCube::new(rows, cols, bands, values)
}

/// Read a segmentation raster: CSV of integers (rows lines x cols values) or
/// the cube binary format with a single band.
pub fn read_segmentation(path: &Path, rows: usize, cols: usize) -> Result<SegmentationMap> {
    let labels: Vec<usize> = if is_csv(path) {
        let matrix = read_matrix_csv(path)?;
        if matrix.len() != rows || matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::format(
                "segmentation csv",
                path.display().to_string(),
                format!("expected {rows} lines x {cols} values"),
            ));
        }
        matrix
            .into_iter()
            .flatten()
            .map(|v| {
                if v < 0.0 || v.fract() != 0.0 {
                    Err(Error::format(
                        "segmentation csv",
                        path.display().to_string(),
                        format!("label `{v}` is not a non-negative integer"),
                    ))
                } else {
                    Ok(v as usize)
                }
            })
            .collect::<Result<_>>()?
    } else {
        let cube = read_cube(path)?;
        if cube.bands() != 1 {
            return Err(Error::format(
                "segmentation raster",
                path.display().to_string(),
                format!("expected 1 band, found {}", cube.bands()),
            ));
        }
        if cube.rows() != rows || cube.cols() != cols {
            return Err(Error::SegmentationShape {
                seg_rows: cube.rows(),
                seg_cols: cube.cols(),
                rows,
                cols,
            });
        }
        cube.values().iter().map(|&v| v.round() as usize).collect()
    };
    SegmentationMap::new(rows, cols, labels)
}

/// Write a segmentation raster as CSV (rows lines x cols values).
pub fn write_segmentation_csv(path: &Path, seg: &SegmentationMap) -> Result<()> {
    let mut out = String::new();
    for row in seg.labels().chunks(seg.cols()) {
        let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read a CSV of floats, one row per line. Blank lines and `#` comments are
/// skipped.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|field| {
                field.trim().parse::<f64>().map_err(|_| {
                    Error::format(
                        "csv",
                        path.display().to_string(),
                        format!("line {}: invalid number `{}`", lineno + 1, field.trim()),
                    )
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if let Some(width) = rows.first().map(|r| r.len()) {
        if let Some(bad) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::format(
                "csv",
                path.display().to_string(),
                format!("row {} has {} fields, expected {width}", bad + 1, rows[bad].len()),
            ));
        }
    }
    Ok(rows)
}

/// Write a CSV of floats with shortest round-trip formatting, so reading the
/// file back reproduces the exact values.
pub fn write_matrix_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Write an 8-bit binary PGM (P5) image.
pub fn write_pgm(path: &Path, width: usize, height: usize, data: &[u8]) -> Result<()> {
    if data.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            got: data.len(),
            context: "pgm pixel count",
        });
    }
    let mut file =
        fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let write = |f: &mut fs::File, bytes: &[u8]| {
        f.write_all(bytes)
            .map_err(|e| Error::io(path.display().to_string(), e))
    };
    write(&mut file, format!("P5\n{width} {height}\n255\n").as_bytes())?;
    write(&mut file, data)
}

/// Serialize a truth record as JSON.
pub fn write_truth(path: &Path, truth: &SceneTruth) -> Result<()> {
    let json = serde_json::to_string_pretty(truth).expect("truth serializes");
    fs::write(path, json).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read a truth record back.
pub fn read_truth(path: &Path) -> Result<SceneTruth> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::format("truth record", path.display().to_string(), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::grid_segmentation;
    use crate::synth::{generate_scene, synthetic_means, MixingModel, SceneSpec};

    fn tmpdir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn cube_round_trips_through_binary_format() {
        let dir = tmpdir();
        let values: Vec<f64> = (0..24).map(|v| v as f64 / 7.0).collect();
        let cube = HyperspectralCube::new(2, 3, 4, values).unwrap();
        let path = dir.path().join("cube.raw");
        write_cube(&path, &cube).unwrap();
        let back = read_cube(&path).unwrap();
        assert_eq!(back.rows(), 2);
        assert_eq!(back.cols(), 3);
        assert_eq!(back.bands(), 4);
        for (a, b) in cube.values().iter().zip(back.values()) {
            // float32 storage
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn cube_csv_without_header_is_nx1() {
        let dir = tmpdir();
        let path = dir.path().join("tiny.csv");
        fs::write(&path, "1.0,2.0\n3.0,4.0\n5.0,6.0\n").unwrap();
        let cube = read_cube(&path).unwrap();
        assert_eq!((cube.rows(), cube.cols(), cube.bands()), (3, 1, 2));
        assert_eq!(cube.pixel(1), &[3.0, 4.0]);
    }

    #[test]
    fn cube_payload_size_mismatch_is_a_format_error() {
        let dir = tmpdir();
        let path = dir.path().join("cube.raw");
        let cube = HyperspectralCube::new(1, 1, 2, vec![1.0, 2.0]).unwrap();
        write_cube(&path, &cube).unwrap();
        fs::write(&path, [0u8; 3]).unwrap();
        match read_cube(&path) {
            Err(e) => assert!(!e.is_io(), "expected format error, got {e}"),
            Ok(_) => panic!("expected error"),
        }
    }

    #[test]
    fn missing_cube_is_an_io_error() {
        match read_cube(Path::new("/nonexistent/cube.raw")) {
            Err(e) => assert!(e.is_io()),
            Ok(_) => panic!("expected error"),
        }
    }

    #[test]
    fn segmentation_round_trips_through_csv() {
        let dir = tmpdir();
        let seg = grid_segmentation(3, 4, 2);
        let path = dir.path().join("seg.csv");
        write_segmentation_csv(&path, &seg).unwrap();
        let back = read_segmentation(&path, 3, 4).unwrap();
        assert_eq!(back.labels(), seg.labels());
    }

    #[test]
    fn segmentation_rejects_fractional_labels() {
        let dir = tmpdir();
        let path = dir.path().join("seg.csv");
        fs::write(&path, "0,0.5\n1,1\n").unwrap();
        assert!(read_segmentation(&path, 2, 2).is_err());
    }

    #[test]
    fn matrix_csv_preserves_values_exactly() {
        let dir = tmpdir();
        let rows = vec![
            vec![0.1, 1.0 / 3.0, 2.0_f64.sqrt()],
            vec![1e-300, -7.25, 0.0],
        ];
        let path = dir.path().join("m.csv");
        write_matrix_csv(&path, &rows).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn ragged_csv_is_rejected() {
        let dir = tmpdir();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "1,2\n3\n").unwrap();
        assert!(read_matrix_csv(&path).is_err());
    }

    #[test]
    fn pgm_has_correct_header_and_payload() {
        let dir = tmpdir();
        let path = dir.path().join("map.pgm");
        write_pgm(&path, 3, 2, &[0, 128, 255, 64, 32, 16]).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(&bytes[bytes.len() - 6..], &[0, 128, 255, 64, 32, 16]);
    }

    #[test]
    fn truth_record_round_trips_exactly() {
        let dir = tmpdir();
        let spec = SceneSpec {
            rows: 4,
            cols: 4,
            bands: 3,
            means: synthetic_means(2, 3),
            sigma2: 1e-3,
            segmentation: grid_segmentation(4, 4, 2),
            alpha: 5.0,
            lambda: 1.0,
            seed: 99,
            mixing: MixingModel::Ncm,
            pure_pixels: true,
        };
        let (_, truth) = generate_scene(&spec).unwrap();
        let path = dir.path().join("truth.json");
        write_truth(&path, &truth).unwrap();
        let back = read_truth(&path).unwrap();
        assert_eq!(truth, back);
    }
}
