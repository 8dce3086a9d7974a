use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{is_finite, Point3, PointCloudFrame};

/// Coordinates written by the ASCII PCD/PLY writers carry this many decimals.
const ASCII_DECIMALS: usize = 9;

const DEFAULT_FRAME_ID: &str = "sensor";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    PcdAscii,
    PlyAscii,
    Csv,
}

impl FileFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FileFormat::PcdAscii => "pcd",
            FileFormat::PlyAscii => "ply",
            FileFormat::Csv => "csv",
        }
    }

    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "pcd" => Some(FileFormat::PcdAscii),
            "ply" => Some(FileFormat::PlyAscii),
            "csv" => Some(FileFormat::Csv),
            _ => None,
        }
    }
}

impl FromStr for FileFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pcd_ascii" | "pcd" => Ok(FileFormat::PcdAscii),
            "ply_ascii" | "ply" => Ok(FileFormat::PlyAscii),
            "csv" => Ok(FileFormat::Csv),
            other => Err(format!("unknown point cloud format '{other}'")),
        }
    }
}

#[derive(Debug, Error)]
pub enum PointCloudIoError {
    #[error("file not found: {0}")]
    NotFound(PathBuf),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("malformed data in {path} line {line}: {reason}")]
    MalformedData {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("unsupported encoding '{encoding}' in {path} (only ASCII is supported)")]
    UnsupportedEncoding { path: PathBuf, encoding: String },
    #[error("timestamps not strictly increasing at {0}")]
    NonMonotonicTimestamps(PathBuf),
}

/// A parsed frame plus the number of non-finite points that were dropped.
#[derive(Debug, Clone)]
pub struct LoadedFrame {
    pub frame: PointCloudFrame,
    pub dropped_non_finite: usize,
}

pub fn load_frame(path: &Path, format: FileFormat) -> Result<LoadedFrame, PointCloudIoError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => PointCloudIoError::NotFound(path.to_path_buf()),
        _ => PointCloudIoError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let parsed = match format {
        FileFormat::PcdAscii => parse_pcd(path, &text)?,
        FileFormat::PlyAscii => parse_ply(path, &text)?,
        FileFormat::Csv => parse_csv(path, &text)?,
    };
    let total = parsed.points.len();
    let points: Vec<Point3> = parsed.points.into_iter().filter(is_finite).collect();
    let dropped = total - points.len();
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} non-finite points", path.display());
    }
    let timestamp = path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(parse_frame_file_name)
        .map(|(_, ns)| ns as f64 * 1e-9)
        .unwrap_or(0.0);
    Ok(LoadedFrame {
        frame: PointCloudFrame {
            timestamp,
            frame_id: parsed.frame_id.unwrap_or_else(|| DEFAULT_FRAME_ID.to_string()),
            points,
        },
        dropped_non_finite: dropped,
    })
}

pub fn save_frame(frame: &PointCloudFrame, path: &Path, format: FileFormat) -> Result<(), PointCloudIoError> {
    let text = match format {
        FileFormat::PcdAscii => write_pcd(frame),
        FileFormat::PlyAscii => write_ply(frame),
        FileFormat::Csv => write_csv(frame),
    };
    fs::write(path, text).map_err(|source| PointCloudIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `<index>_<timestamp_ns>.<ext>`
pub fn frame_file_name(index: usize, timestamp: f64, format: FileFormat) -> String {
    let ns = (timestamp * 1e9).round() as u64;
    format!("{index:06}_{ns}.{}", format.extension())
}

/// Returns `(index, timestamp_ns)` for names following [`frame_file_name`].
pub fn parse_frame_file_name(name: &str) -> Option<(usize, u64)> {
    let stem = name.rsplit_once('.').map(|(s, _)| s).unwrap_or(name);
    let (index, ns) = stem.split_once('_')?;
    Some((index.parse().ok()?, ns.parse().ok()?))
}

/// Loads every `<index>_<timestamp_ns>.<ext>` frame in `dir`, sorted by index.
///
/// Files whose names do not follow the pattern or whose extension is not a known
/// format are ignored.
pub fn load_sequence(dir: &Path) -> Result<Vec<LoadedFrame>, PointCloudIoError> {
    if !dir.is_dir() {
        return Err(PointCloudIoError::NotFound(dir.to_path_buf()));
    }
    let entries = fs::read_dir(dir).map_err(|source| PointCloudIoError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| PointCloudIoError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(format) = path
            .extension()
            .and_then(|e| e.to_str())
            .and_then(FileFormat::from_extension)
        else {
            continue;
        };
        if let Some((index, _)) = parse_frame_file_name(name) {
            files.push((index, path, format));
        }
    }
    files.sort_by_key(|(index, _, _)| *index);

    let mut frames: Vec<LoadedFrame> = Vec::with_capacity(files.len());
    for (_, path, format) in files {
        let loaded = load_frame(&path, format)?;
        if let Some(prev) = frames.last() {
            if loaded.frame.timestamp <= prev.frame.timestamp {
                return Err(PointCloudIoError::NonMonotonicTimestamps(path));
            }
        }
        frames.push(loaded);
    }
    Ok(frames)
}

struct Parsed {
    points: Vec<Point3>,
    frame_id: Option<String>,
}

fn header_err(path: &Path, reason: impl Into<String>) -> PointCloudIoError {
    PointCloudIoError::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn data_err(path: &Path, line: usize, reason: impl Into<String>) -> PointCloudIoError {
    PointCloudIoError::MalformedData {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn parse_value(path: &Path, line: usize, token: Option<&str>) -> Result<f64, PointCloudIoError> {
    let token = token.ok_or_else(|| data_err(path, line, "missing column"))?;
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| data_err(path, line, format!("not a number: '{token}'")))
}

fn parse_pcd(path: &Path, text: &str) -> Result<Parsed, PointCloudIoError> {
    let mut fields: Option<Vec<String>> = None;
    let mut counts: Option<Vec<usize>> = None;
    let mut declared_points: Option<usize> = None;
    let mut frame_id = None;
    let mut lines = text.lines().enumerate();
    let mut data_started = false;

    for (_, line) in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("frame_id") {
                frame_id = Some(id.trim().to_string());
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let key = tokens.next().unwrap_or_default().to_ascii_uppercase();
        let rest: Vec<&str> = tokens.collect();
        match key.as_str() {
            "FIELDS" => fields = Some(rest.iter().map(|s| s.to_string()).collect()),
            "COUNT" => {
                counts = Some(
                    rest.iter()
                        .map(|s| s.parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| header_err(path, "bad COUNT"))?,
                )
            }
            "POINTS" => {
                declared_points = Some(
                    rest.first()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| header_err(path, "bad POINTS"))?,
                )
            }
            "DATA" => {
                let encoding = rest.first().copied().unwrap_or("");
                if encoding != "ascii" {
                    return Err(PointCloudIoError::UnsupportedEncoding {
                        path: path.to_path_buf(),
                        encoding: encoding.to_string(),
                    });
                }
                data_started = true;
                break;
            }
            "VERSION" | "SIZE" | "TYPE" | "WIDTH" | "HEIGHT" | "VIEWPOINT" => {}
            other => return Err(header_err(path, format!("unknown header key '{other}'"))),
        }
    }
    if !data_started {
        return Err(header_err(path, "missing DATA line"));
    }
    let fields = fields.ok_or_else(|| header_err(path, "missing FIELDS"))?;
    let counts = counts.unwrap_or_else(|| vec![1; fields.len()]);
    if counts.len() != fields.len() {
        return Err(header_err(path, "COUNT and FIELDS lengths differ"));
    }
    // column offset of each field, expanded by COUNT
    let mut offsets = Vec::with_capacity(fields.len());
    let mut col = 0;
    for c in &counts {
        offsets.push(col);
        col += c;
    }
    let column_of = |name: &str| {
        fields
            .iter()
            .position(|f| f == name)
            .map(|i| offsets[i])
            .ok_or_else(|| header_err(path, format!("missing field '{name}'")))
    };
    let (cx, cy, cz) = (column_of("x")?, column_of("y")?, column_of("z")?);

    let mut points = Vec::with_capacity(declared_points.unwrap_or(0));
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        points.push(Point3::new(
            parse_value(path, i + 1, cols.get(cx).copied())?,
            parse_value(path, i + 1, cols.get(cy).copied())?,
            parse_value(path, i + 1, cols.get(cz).copied())?,
        ));
    }
    if let Some(n) = declared_points {
        if n != points.len() {
            return Err(header_err(
                path,
                format!("POINTS declares {n} but {} data rows found", points.len()),
            ));
        }
    }
    Ok(Parsed { points, frame_id })
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<String>,
}

fn parse_ply(path: &Path, text: &str) -> Result<Parsed, PointCloudIoError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(header_err(path, "missing 'ply' magic")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut frame_id = None;
    let mut header_done = false;
    for (_, line) in lines.by_ref() {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("format") => {
                let encoding = tokens.next().unwrap_or("");
                if encoding != "ascii" {
                    return Err(PointCloudIoError::UnsupportedEncoding {
                        path: path.to_path_buf(),
                        encoding: encoding.to_string(),
                    });
                }
            }
            Some("comment") => {
                if tokens.next() == Some("frame_id") {
                    frame_id = tokens.next().map(str::to_string);
                }
            }
            Some("obj_info") | None => {}
            Some("element") => {
                let name = tokens.next().ok_or_else(|| header_err(path, "element without name"))?;
                let count = tokens
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| header_err(path, "element without count"))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| header_err(path, "property before element"))?;
                // the name is the last token, for both scalar and list properties
                let name = line
                    .split_whitespace()
                    .last()
                    .ok_or_else(|| header_err(path, "property without name"))?;
                element.properties.push(name.to_string());
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            Some(other) => return Err(header_err(path, format!("unknown header keyword '{other}'"))),
        }
    }
    if !header_done {
        return Err(header_err(path, "missing end_header"));
    }
    let vertex_pos = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| header_err(path, "no vertex element"))?;
    let vertex = &elements[vertex_pos];
    let column = |name: &str| {
        vertex
            .properties
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| header_err(path, format!("vertex element lacks property '{name}'")))
    };
    let (cx, cy, cz) = (column("x")?, column("y")?, column("z")?);
    let skip: usize = elements[..vertex_pos].iter().map(|e| e.count).sum();

    let mut data = lines.filter(|(_, l)| !l.trim().is_empty()).skip(skip);
    let mut points = Vec::with_capacity(vertex.count);
    for _ in 0..vertex.count {
        let (i, line) = data
            .next()
            .ok_or_else(|| header_err(path, format!("expected {} vertices", vertex.count)))?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        points.push(Point3::new(
            parse_value(path, i + 1, cols.get(cx).copied())?,
            parse_value(path, i + 1, cols.get(cy).copied())?,
            parse_value(path, i + 1, cols.get(cz).copied())?,
        ));
    }
    Ok(Parsed { points, frame_id })
}

fn parse_csv(path: &Path, text: &str) -> Result<Parsed, PointCloudIoError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let header: Vec<String> = match lines.next() {
        Some((_, l)) => l.split(',').map(|s| s.trim().to_ascii_lowercase()).collect(),
        None => return Err(header_err(path, "empty file, expected header 'x,y,z'")),
    };
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| header_err(path, format!("header lacks column '{name}'")))
    };
    let (cx, cy, cz) = (column("x")?, column("y")?, column("z")?);
    let mut points = Vec::new();
    for (i, line) in lines {
        let cols: Vec<&str> = line.split(',').collect();
        points.push(Point3::new(
            parse_value(path, i + 1, cols.get(cx).copied())?,
            parse_value(path, i + 1, cols.get(cy).copied())?,
            parse_value(path, i + 1, cols.get(cz).copied())?,
        ));
    }
    Ok(Parsed { points, frame_id: None })
}

fn write_pcd(frame: &PointCloudFrame) -> String {
    let n = frame.points.len();
    let mut out = String::with_capacity(256 + n * 40);
    out.push_str("# .PCD v0.7 - Point Cloud Data file format\n");
    let _ = writeln!(out, "# frame_id {}", frame.frame_id);
    out.push_str("VERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\n");
    let _ = writeln!(out, "WIDTH {n}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {n}\nDATA ascii");
    for p in &frame.points {
        let _ = writeln!(out, "{:.*} {:.*} {:.*}", ASCII_DECIMALS, p.x, ASCII_DECIMALS, p.y, ASCII_DECIMALS, p.z);
    }
    out
}

fn write_ply(frame: &PointCloudFrame) -> String {
    let n = frame.points.len();
    let mut out = String::with_capacity(256 + n * 40);
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "comment frame_id {}", frame.frame_id);
    let _ = writeln!(out, "element vertex {n}");
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in &frame.points {
        let _ = writeln!(out, "{:.*} {:.*} {:.*}", ASCII_DECIMALS, p.x, ASCII_DECIMALS, p.y, ASCII_DECIMALS, p.z);
    }
    out
}

fn write_csv(frame: &PointCloudFrame) -> String {
    let mut out = String::with_capacity(8 + frame.points.len() * 60);
    out.push_str("x,y,z\n");
    for p in &frame.points {
        // shortest representation that parses back to the same f64
        let _ = writeln!(out, "{},{},{}", p.x, p.y, p.z);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn pcd_with_three_points() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("a.pcd");
        fs::write(
            &path,
            "# .PCD v0.7\nVERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\nWIDTH 3\nHEIGHT 1\n\
             VIEWPOINT 0 0 0 1 0 0 0\nPOINTS 3\nDATA ascii\n1 2 3\n4 5 6\n7 8 9\n",
        )
        .unwrap();
        let loaded = load_frame(&path, FileFormat::PcdAscii).unwrap();
        assert_eq!(loaded.frame.len(), 3);
        assert_eq!(loaded.frame.points[2], Point3::new(7.0, 8.0, 9.0));
        assert_eq!(loaded.dropped_non_finite, 0);
    }

    #[test]
    fn pcd_extra_fields_and_counts() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("a.pcd");
        fs::write(
            &path,
            "VERSION 0.7\nFIELDS normal x y z intensity\nSIZE 4 4 4 4 4\nTYPE F F F F F\nCOUNT 3 1 1 1 1\n\
             WIDTH 1\nHEIGHT 1\nPOINTS 1\nDATA ascii\n0 0 1 1.5 2.5 3.5 100\n",
        )
        .unwrap();
        let loaded = load_frame(&path, FileFormat::PcdAscii).unwrap();
        assert_eq!(loaded.frame.points, vec![Point3::new(1.5, 2.5, 3.5)]);
    }

    #[test]
    fn csv_nan_is_dropped_and_counted() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("a.csv");
        fs::write(&path, "x,y,z\n1.0,2.0,nan\n0.5,0.5,0.5\n").unwrap();
        let loaded = load_frame(&path, FileFormat::Csv).unwrap();
        assert_eq!(loaded.frame.len(), 1);
        assert_eq!(loaded.dropped_non_finite, 1);
    }

    #[test]
    fn binary_encodings_are_reported() {
        let dir = tempdir().unwrap();
        let pcd = dir.path().join("b.pcd");
        fs::write(&pcd, "VERSION 0.7\nFIELDS x y z\nPOINTS 0\nDATA binary\n").unwrap();
        assert!(matches!(
            load_frame(&pcd, FileFormat::PcdAscii),
            Err(PointCloudIoError::UnsupportedEncoding { encoding, .. }) if encoding == "binary"
        ));
        let ply = dir.path().join("b.ply");
        fs::write(&ply, "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n").unwrap();
        assert!(matches!(
            load_frame(&ply, FileFormat::PlyAscii),
            Err(PointCloudIoError::UnsupportedEncoding { .. })
        ));
    }

    #[test]
    fn missing_file_and_bad_header() {
        let dir = tempdir().unwrap();
        assert!(matches!(
            load_frame(&dir.path().join("nope.csv"), FileFormat::Csv),
            Err(PointCloudIoError::NotFound(_))
        ));
        let bad = dir.path().join("bad.ply");
        fs::write(&bad, "not a ply\n").unwrap();
        assert!(matches!(
            load_frame(&bad, FileFormat::PlyAscii),
            Err(PointCloudIoError::MalformedHeader { .. })
        ));
        let csv = dir.path().join("bad.csv");
        fs::write(&csv, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(load_frame(&csv, FileFormat::Csv), Err(PointCloudIoError::MalformedHeader { .. })));
    }

    #[test]
    fn ply_skips_leading_elements() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.ply");
        fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement camera 1\nproperty float fx\nelement vertex 2\n\
             property float x\nproperty float y\nproperty float z\nelement face 0\n\
             property list uchar int vertex_indices\nend_header\n500\n1 2 3\n4 5 6\n",
        )
        .unwrap();
        let loaded = load_frame(&path, FileFormat::PlyAscii).unwrap();
        assert_eq!(loaded.frame.points, vec![Point3::new(1.0, 2.0, 3.0), Point3::new(4.0, 5.0, 6.0)]);
    }

    #[test]
    fn empty_frame_round_trips_in_every_format() {
        let dir = tempdir().unwrap();
        let frame = PointCloudFrame::new(0.0, "lidar", vec![]);
        for format in [FileFormat::PcdAscii, FileFormat::PlyAscii, FileFormat::Csv] {
            let path = dir.path().join(format!("empty.{}", format.extension()));
            save_frame(&frame, &path, format).unwrap();
            let loaded = load_frame(&path, format).unwrap();
            assert!(loaded.frame.is_empty());
        }
    }

    #[test]
    fn duplicates_are_preserved() {
        let dir = tempdir().unwrap();
        let p = Point3::new(0.1, 0.2, 0.3);
        let frame = PointCloudFrame::new(0.0, "lidar", vec![p, p, p]);
        let path = dir.path().join("dup.ply");
        save_frame(&frame, &path, FileFormat::PlyAscii).unwrap();
        let loaded = load_frame(&path, FileFormat::PlyAscii).unwrap();
        assert_eq!(loaded.frame.len(), 3);
        assert_eq!(loaded.frame.frame_id, "lidar");
    }

    #[test]
    fn file_names_carry_index_and_timestamp() {
        let name = frame_file_name(7, 1.25, FileFormat::Csv);
        assert_eq!(name, "000007_1250000000.csv");
        assert_eq!(parse_frame_file_name(&name), Some((7, 1_250_000_000)));
        assert_eq!(parse_frame_file_name("garbage.csv"), None);
    }

    #[test]
    fn sequence_is_sorted_by_index() {
        let dir = tempdir().unwrap();
        for (i, t) in [(2usize, 0.3), (0, 0.1), (1, 0.2)] {
            let f = PointCloudFrame::new(t, "s", vec![Point3::new(i as f64, 0.0, 0.0)]);
            save_frame(&f, &dir.path().join(frame_file_name(i, t, FileFormat::Csv)), FileFormat::Csv).unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let seq = load_sequence(dir.path()).unwrap();
        let xs: Vec<f64> = seq.iter().map(|l| l.frame.points[0].x).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0]);
        assert!((seq[1].frame.timestamp - 0.2).abs() < 1e-12);
    }

    #[test]
    fn sequence_rejects_non_increasing_timestamps() {
        let dir = tempdir().unwrap();
        for (i, t) in [(0usize, 0.2), (1, 0.1)] {
            let f = PointCloudFrame::new(t, "s", vec![]);
            save_frame(&f, &dir.path().join(frame_file_name(i, t, FileFormat::Csv)), FileFormat::Csv).unwrap();
        }
        assert!(matches!(load_sequence(dir.path()), Err(PointCloudIoError::NonMonotonicTimestamps(_))));
    }
}
