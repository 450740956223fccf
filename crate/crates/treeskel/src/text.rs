//! Small delimited text inputs: marker detections, sky color samples and
//! per-point label overrides. Fields are separated by whitespace and/or
//! commas; blank lines and `#` comments are skipped.

use std::path::Path;

use treeskel_core::{LabeledPointCloud, MarkerObservation, Rgb, SemanticLabel};

use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-empty, comment-free lines split into fields, with 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn number(field: &str, path: &Path, line: usize) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::parse(path, format!("line {line}"), format!("`{field}` is not a number")))
}

/// One record per image: `image_id u1 v1 u2 v2 u3 v3 u4 v4`.
pub fn read_marker_detections(path: impl AsRef<Path>) -> Result<Vec<MarkerObservation>> {
    let path = path.as_ref();
    parse_marker_detections(&read(path)?, path)
}

pub fn parse_marker_detections(text: &str, path: &Path) -> Result<Vec<MarkerObservation>> {
    records(text)
        .map(|(no, fields)| {
            let err = |msg: String| Error::parse(path, format!("line {no}"), msg);
            if fields.len() != 9 {
                return Err(err(format!("expected an image id and 8 corner coordinates, got {} fields", fields.len())));
            }
            let id: u32 = fields[0].parse().map_err(|_| err(format!("bad image id `{}`", fields[0])))?;
            let mut corners = [[0.0; 2]; 4];
            for (k, c) in corners.iter_mut().enumerate() {
                *c = [number(fields[1 + 2 * k], path, no)?, number(fields[2 + 2 * k], path, no)?];
            }
            MarkerObservation::new(id, corners).map_err(|e| err(e.to_string()))
        })
        .collect()
}

/// One `r g b` triple in `[0, 1]` per line.
pub fn read_sky_samples(path: impl AsRef<Path>) -> Result<Vec<Rgb>> {
    let path = path.as_ref();
    parse_sky_samples(&read(path)?, path)
}

pub fn parse_sky_samples(text: &str, path: &Path) -> Result<Vec<Rgb>> {
    records(text)
        .map(|(no, fields)| {
            if fields.len() != 3 {
                return Err(Error::parse(path, format!("line {no}"), format!("expected 3 color values, got {}", fields.len())));
            }
            let mut rgb = [0.0; 3];
            for (c, f) in rgb.iter_mut().zip(&fields) {
                *c = number(f, path, no)?;
                if !(0.0..=1.0).contains(c) {
                    return Err(Error::parse(path, format!("line {no}"), format!("color value {c} outside [0, 1]")));
                }
            }
            Ok(rgb)
        })
        .collect()
}

/// One label byte code per line, in point order. Unknown codes become
/// `unlabeled`.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<SemanticLabel>> {
    let path = path.as_ref();
    parse_labels(&read(path)?, path)
}

pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<SemanticLabel>> {
    records(text)
        .map(|(no, fields)| match fields.as_slice() {
            [code] => code
                .parse::<u8>()
                .map(SemanticLabel::from_code)
                .map_err(|_| Error::parse(path, format!("line {no}"), format!("`{code}` is not a label code (0-255)"))),
            _ => Err(Error::parse(path, format!("line {no}"), "expected one label code")),
        })
        .collect()
}

/// Replaces the labels of `cloud`; the count must match.
pub fn apply_labels(cloud: &LabeledPointCloud, labels: Vec<SemanticLabel>, path: &Path) -> Result<LabeledPointCloud> {
    if labels.len() != cloud.len() {
        return Err(Error::parse(
            path,
            "file",
            format!("{} labels for a cloud of {} points", labels.len(), cloud.len()),
        ));
    }
    Ok(cloud.with_labels(labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("f.txt")
    }

    #[test]
    fn markers_parse_and_keep_corner_order() {
        let obs = parse_marker_detections(
            "# id u1 v1 ...\n3, 10, 10, 20, 10, 20, 20, 10, 20\n\n7 1 2 3 2 3 4 1 4  # trailing\n",
            p(),
        )
        .unwrap();
        assert_eq!(obs.len(), 2);
        assert_eq!(obs[0].image_id, 3);
        assert_eq!(obs[0].corners()[2], [20.0, 20.0]);
        assert_eq!(obs[1].corners()[0], [1.0, 2.0]);
    }

    #[test]
    fn marker_errors_carry_line_numbers() {
        let e = parse_marker_detections("\n1 1 2 3 4 5 6 7\n", p()).unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("8 fields"), "{e}");
        let e = parse_marker_detections("1 a 2 3 4 5 6 7 8\n", p()).unwrap_err().to_string();
        assert!(e.contains("not a number"), "{e}");
        let e = parse_marker_detections("1 5 5 5 5 5 5 5 5\n", p()).unwrap_err().to_string();
        assert!(e.contains("coincide"), "{e}");
    }

    #[test]
    fn sky_and_labels() {
        assert_eq!(parse_sky_samples("0.5 0.7 1\n", p()).unwrap(), vec![[0.5, 0.7, 1.0]]);
        assert!(parse_sky_samples("0.5 0.7 1.2\n", p()).is_err());
        assert!(parse_sky_samples("0.5 0.7\n", p()).is_err());
        assert_eq!(
            parse_labels("1\n2\n255\n9\n", p()).unwrap(),
            vec![SemanticLabel::Trunk, SemanticLabel::Branch, SemanticLabel::Unlabeled, SemanticLabel::Unlabeled]
        );
        assert!(parse_labels("1 2\n", p()).is_err());
        assert!(parse_labels("256\n", p()).is_err());
        let cloud = LabeledPointCloud::from_positions(vec![Default::default(); 2]).unwrap();
        assert!(apply_labels(&cloud, vec![SemanticLabel::Trunk], p()).is_err());
    }
}
