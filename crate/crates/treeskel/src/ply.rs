//! PLY point clouds with an extra `label` property.
//!
//! Reads ASCII and binary little-endian files. Vertex positions may be
//! `float` or `double`, colors and labels must be `uchar`. Other vertex
//! properties and other elements are skipped.

use std::fmt::Write as _;
use std::path::Path;

use treeskel_core::{LabeledPointCloud, Rgb, SemanticLabel, Vec3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlyEncoding {
    Ascii,
    #[default]
    BinaryLittleEndian,
}

/// Storage type of the written coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlyPrecision {
    #[default]
    Float,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlyOptions {
    pub encoding: PlyEncoding,
    pub precision: PlyPrecision,
}

impl PlyOptions {
    pub fn ascii() -> Self {
        Self {
            encoding: PlyEncoding::Ascii,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }

    fn is_float(self) -> bool {
        matches!(self, Scalar::F32 | Scalar::F64)
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

impl Property {
    fn name(&self) -> &str {
        match self {
            Property::Scalar(n, _) | Property::List(n, _, _) => n,
        }
    }
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    binary: bool,
    elements: Vec<Element>,
    /// Byte offset of the first data byte.
    data_start: usize,
    /// Line number of the first data line (ASCII).
    data_line: usize,
}

/// Column positions of the vertex fields we keep.
struct VertexLayout {
    xyz: [usize; 3],
    rgb: Option<[usize; 3]>,
    label: Option<usize>,
}

pub fn read_ply(path: impl AsRef<Path>) -> Result<LabeledPointCloud> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&bytes, path)
}

/// Parses PLY bytes; `path` only labels error messages.
pub fn parse_ply(bytes: &[u8], path: &Path) -> Result<LabeledPointCloud> {
    let header = parse_header(bytes, path)?;
    let vertex = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::parse(path, "header", "no `vertex` element"))?;
    let layout = vertex_layout(&header.elements[vertex], path)?;
    let (rows, _) = if header.binary {
        read_binary(bytes, &header, vertex, path)?
    } else {
        read_ascii(bytes, &header, vertex, path)?
    };
    let n = header.elements[vertex].count;
    let mut positions = Vec::with_capacity(n);
    let mut colors = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let p = Vec3::new(row[layout.xyz[0]], row[layout.xyz[1]], row[layout.xyz[2]]);
        if !p.is_finite() {
            return Err(Error::parse(path, format!("vertex {i}"), "non-finite coordinate"));
        }
        positions.push(p);
        colors.push(match layout.rgb {
            Some(c) => c.map(|k| row[k] / 255.0),
            None => [0.0; 3],
        });
        labels.push(match layout.label {
            Some(k) => SemanticLabel::from_code(row[k] as u8),
            None => SemanticLabel::Unlabeled,
        });
    }
    Ok(LabeledPointCloud::new(positions, colors, labels)?)
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let mut pos = 0;
    let mut line_no = 0;
    let next_line = |pos: &mut usize, line_no: &mut usize| -> Option<(usize, String)> {
        if *pos >= bytes.len() {
            return None;
        }
        let end = bytes[*pos..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |e| *pos + e);
        let line = String::from_utf8_lossy(&bytes[*pos..end]).trim_end_matches('\r').to_string();
        *pos = end + 1;
        *line_no += 1;
        Some((*line_no, line))
    };
    let err = |line: usize, msg: &str| Error::parse(path, format!("line {line}"), msg);

    match next_line(&mut pos, &mut line_no) {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(err(1, "missing `ply` magic")),
    }
    let mut binary = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let Some((no, line)) = next_line(&mut pos, &mut line_no) else {
            return Err(err(line_no, "header ends without `end_header`"));
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", kind, version] => {
                if *version != "1.0" {
                    return Err(err(no, &format!("unsupported format version {version}")));
                }
                binary = Some(match *kind {
                    "ascii" => false,
                    "binary_little_endian" => true,
                    other => return Err(err(no, &format!("unsupported format `{other}`"))),
                });
            }
            ["element", name, count] => {
                let count = count.parse().map_err(|_| err(no, &format!("bad element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count_ty, item_ty, name] => {
                let el = elements.last_mut().ok_or_else(|| err(no, "property before any element"))?;
                let c = Scalar::parse(count_ty).ok_or_else(|| err(no, &format!("unsupported property type `{count_ty}`")))?;
                let t = Scalar::parse(item_ty).ok_or_else(|| err(no, &format!("unsupported property type `{item_ty}`")))?;
                if c.is_float() {
                    return Err(err(no, "list count must be an integer type"));
                }
                el.properties.push(Property::List(name.to_string(), c, t));
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or_else(|| err(no, "property before any element"))?;
                let t = Scalar::parse(ty).ok_or_else(|| err(no, &format!("unsupported property type `{ty}`")))?;
                el.properties.push(Property::Scalar(name.to_string(), t));
            }
            ["end_header"] => break,
            _ => return Err(err(no, &format!("malformed header line `{line}`"))),
        }
    }
    let binary = binary.ok_or_else(|| err(line_no, "missing `format` line"))?;
    Ok(Header {
        binary,
        elements,
        data_start: pos.min(bytes.len()),
        data_line: line_no + 1,
    })
}

fn vertex_layout(el: &Element, path: &Path) -> Result<VertexLayout> {
    let find = |name: &str| el.properties.iter().position(|p| p.name() == name);
    let scalar_of = |i: usize| match &el.properties[i] {
        Property::Scalar(_, t) => Some(*t),
        Property::List(..) => None,
    };
    let unsupported = |name: &str, want: &str| {
        Error::parse(path, "header", format!("unsupported property type for vertex `{name}` (expected {want})"))
    };
    let mut xyz = [0; 3];
    for (k, name) in ["x", "y", "z"].iter().enumerate() {
        let i = find(name).ok_or_else(|| Error::parse(path, "header", format!("vertex has no `{name}` property")))?;
        if !scalar_of(i).is_some_and(Scalar::is_float) {
            return Err(unsupported(name, "float or double"));
        }
        xyz[k] = i;
    }
    let color_idx: Vec<Option<usize>> = ["red", "green", "blue"].iter().map(|n| find(n)).collect();
    let rgb = match color_idx.as_slice() {
        [None, None, None] => None,
        [Some(r), Some(g), Some(b)] => {
            for (&i, name) in [*r, *g, *b].iter().zip(["red", "green", "blue"]) {
                if scalar_of(i) != Some(Scalar::U8) {
                    return Err(unsupported(name, "uchar"));
                }
            }
            Some([*r, *g, *b])
        }
        _ => return Err(Error::parse(path, "header", "vertex declares only some of red/green/blue")),
    };
    let label = match find("label") {
        Some(i) if scalar_of(i) == Some(Scalar::U8) => Some(i),
        Some(_) => return Err(unsupported("label", "uchar")),
        None => None,
    };
    Ok(VertexLayout { xyz, rgb, label })
}

/// Scalar values of every vertex row (list properties are skipped) and the
/// number of bytes or lines consumed.
type Rows = (Vec<Vec<f64>>, usize);

fn read_binary(bytes: &[u8], header: &Header, vertex: usize, path: &Path) -> Result<Rows> {
    let mut pos = header.data_start;
    let mut rows = Vec::new();
    let truncated = |pos: usize, el: &Element, i: usize| {
        Error::parse(
            path,
            format!("byte {pos}"),
            format!("unexpected end of data in {} {} of {}", el.name, i + 1, el.count),
        )
    };
    for (e, el) in header.elements.iter().enumerate() {
        if e == vertex {
            rows.reserve(el.count);
        }
        for i in 0..el.count {
            let mut row = Vec::with_capacity(if e == vertex { el.properties.len() } else { 0 });
            for prop in &el.properties {
                match prop {
                    Property::Scalar(_, t) => {
                        let b = bytes.get(pos..pos + t.size()).ok_or_else(|| truncated(pos, el, i))?;
                        if e == vertex {
                            row.push(t.read_le(b));
                        }
                        pos += t.size();
                    }
                    Property::List(_, c, t) => {
                        let b = bytes.get(pos..pos + c.size()).ok_or_else(|| truncated(pos, el, i))?;
                        let len = c.read_le(b);
                        if len < 0.0 {
                            return Err(Error::parse(path, format!("byte {pos}"), "negative list length"));
                        }
                        pos += c.size() + len as usize * t.size();
                        if pos > bytes.len() {
                            return Err(truncated(pos, el, i));
                        }
                        if e == vertex {
                            row.push(f64::NAN);
                        }
                    }
                }
            }
            if e == vertex {
                rows.push(row);
            }
        }
    }
    if pos != bytes.len() {
        return Err(Error::parse(
            path,
            format!("byte {pos}"),
            format!("{} bytes of data beyond the declared elements", bytes.len() - pos),
        ));
    }
    Ok((rows, pos))
}

fn read_ascii(bytes: &[u8], header: &Header, vertex: usize, path: &Path) -> Result<Rows> {
    let text = std::str::from_utf8(&bytes[header.data_start..])
        .map_err(|e| Error::parse(path, "data", format!("ASCII body is not UTF-8: {e}")))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (header.data_line + i, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut rows = Vec::new();
    let mut last_line = header.data_line;
    for (e, el) in header.elements.iter().enumerate() {
        for i in 0..el.count {
            let (no, line) = lines.next().ok_or_else(|| {
                Error::parse(
                    path,
                    format!("line {last_line}"),
                    format!("{} declares {} records but only {i} are present", el.name, el.count),
                )
            })?;
            last_line = no;
            let err = |msg: String| Error::parse(path, format!("line {no}"), msg);
            let mut tokens = line.split_whitespace();
            let mut next_num = |what: &str| -> Result<f64> {
                let tok = tokens.next().ok_or_else(|| err(format!("missing value for `{what}`")))?;
                tok.parse::<f64>().map_err(|_| err(format!("`{tok}` is not a number ({what})")))
            };
            let mut row = Vec::new();
            for prop in &el.properties {
                match prop {
                    Property::Scalar(name, t) => {
                        let v = next_num(name)?;
                        if !t.is_float() && v.fract() != 0.0 {
                            return Err(err(format!("`{name}` must be an integer")));
                        }
                        if *t == Scalar::U8 && !(0.0..=255.0).contains(&v) {
                            return Err(err(format!("`{name}` out of uchar range")));
                        }
                        row.push(v);
                    }
                    Property::List(name, _, _) => {
                        let len = next_num(name)?;
                        for _ in 0..len as usize {
                            next_num(name)?;
                        }
                        row.push(f64::NAN);
                    }
                }
            }
            if tokens.next().is_some() {
                return Err(err(format!("too many values in {} record", el.name)));
            }
            if e == vertex {
                rows.push(row);
            }
        }
    }
    if let Some((no, _)) = lines.next() {
        return Err(Error::parse(path, format!("line {no}"), "data beyond the declared elements"));
    }
    Ok((rows, last_line))
}

pub fn write_ply(cloud: &LabeledPointCloud, path: impl AsRef<Path>, options: PlyOptions) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_ply(cloud, options).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn quantize(c: f64) -> u8 {
    (c * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Serializes a cloud; fails only when a coordinate overflows `float`.
pub fn encode_ply(cloud: &LabeledPointCloud, options: PlyOptions) -> std::io::Result<Vec<u8>> {
    let ty = match options.precision {
        PlyPrecision::Float => "float",
        PlyPrecision::Double => "double",
    };
    if options.precision == PlyPrecision::Float
        && cloud.positions().iter().flat_map(|p| p.0).any(|v| v.abs() > f32::MAX as f64)
    {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "coordinate exceeds the float range; write with double precision",
        ));
    }
    let format = match options.encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    let mut header = String::new();
    let _ = write!(
        header,
        "ply\nformat {format} 1.0\nelement vertex {}\n\
         property {ty} x\nproperty {ty} y\nproperty {ty} z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\n\
         property uchar label\nend_header\n",
        cloud.len()
    );
    let mut out = header.into_bytes();
    let rows = cloud.positions().iter().zip(cloud.colors()).zip(cloud.labels());
    match options.encoding {
        PlyEncoding::Ascii => {
            let mut body = String::new();
            for ((p, c), l) in rows {
                for v in p.0 {
                    match options.precision {
                        PlyPrecision::Float => write!(body, "{} ", v as f32),
                        PlyPrecision::Double => write!(body, "{v:?} "),
                    }
                    .expect("writing to a String");
                }
                let _ = writeln!(body, "{} {} {} {}", quantize(c[0]), quantize(c[1]), quantize(c[2]), l.code());
            }
            out.extend_from_slice(body.as_bytes());
        }
        PlyEncoding::BinaryLittleEndian => {
            let stride = 3 * if options.precision == PlyPrecision::Float { 4 } else { 8 } + 4;
            out.reserve(cloud.len() * stride);
            for ((p, c), l) in rows {
                for v in p.0 {
                    match options.precision {
                        PlyPrecision::Float => out.extend_from_slice(&(v as f32).to_le_bytes()),
                        PlyPrecision::Double => out.extend_from_slice(&v.to_le_bytes()),
                    }
                }
                out.extend_from_slice(&[quantize(c[0]), quantize(c[1]), quantize(c[2]), l.code()]);
            }
        }
    }
    Ok(out)
}

/// Colors as they come back from a PLY file.
pub fn quantized_color(c: Rgb) -> Rgb {
    c.map(|v| quantize(v) as f64 / 255.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LabeledPointCloud> {
        parse_ply(text.as_bytes(), Path::new("test.ply"))
    }

    fn sample() -> LabeledPointCloud {
        let positions = (0..8).map(|i| Vec3::new(i as f64 * 0.25, -1.5, 1e-3 * i as f64)).collect();
        let colors = (0..8).map(|i| [i as f64 / 255.0, 1.0, 0.0]).collect();
        LabeledPointCloud::new(positions, colors, SemanticLabel::ALL.to_vec()).unwrap()
    }

    #[test]
    fn ascii_without_labels_defaults_to_unlabeled() {
        let cloud = parse(
            "ply\nformat ascii 1.0\ncomment x\nelement vertex 3\nproperty float x\nproperty float y\n\
             property float z\nend_header\n0 0 0\n1 0 0\n0 1 0.5\n",
        )
        .unwrap();
        assert_eq!(cloud.len(), 3);
        assert!(cloud.labels().iter().all(|&l| l == SemanticLabel::Unlabeled));
        assert!(cloud.colors().iter().all(|&c| c == [0.0; 3]));
        assert_eq!(cloud.positions()[2], Vec3::new(0.0, 1.0, 0.5));
    }

    #[test]
    fn short_vertex_list_names_line() {
        let mut text = String::from("ply\nformat ascii 1.0\nelement vertex 10\nproperty float x\nproperty float y\nproperty float z\nend_header\n");
        for i in 0..9 {
            text.push_str(&format!("{i} 0 0\n"));
        }
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("line 16") && err.contains("only 9"), "{err}");
    }

    #[test]
    fn truncated_binary_names_byte() {
        let bytes = encode_ply(&sample(), PlyOptions::default()).unwrap();
        let err = parse_ply(&bytes[..bytes.len() - 3], Path::new("t.ply")).unwrap_err().to_string();
        assert!(err.contains("byte") && err.contains("vertex 8 of 8"), "{err}");
        let mut long = bytes.clone();
        long.push(0);
        assert!(parse_ply(&long, Path::new("t.ply")).is_err());
    }

    #[test]
    fn rejects_unsupported_types_and_formats() {
        let base = |decl: &str| format!("ply\nformat ascii 1.0\nelement vertex 1\n{decl}end_header\n0 0 0\n");
        assert!(parse(&base("property int x\nproperty float y\nproperty float z\n")).is_err());
        assert!(parse(&base("property float x\nproperty float y\nproperty float z\nproperty float red\nproperty float green\nproperty float blue\n")).is_err());
        assert!(parse(&base("property float x\nproperty float y\nproperty float z\nproperty quad w\n")).is_err());
        assert!(parse("ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n").is_err());
        assert!(parse("plx\n").is_err());
        assert!(parse("ply\nformat ascii 1.0\nelement vertex 0\n").is_err());
    }

    #[test]
    fn skips_faces_and_extra_properties() {
        let cloud = parse(
            "ply\nformat ascii 1.0\nelement vertex 3\nproperty double x\nproperty double y\nproperty double z\n\
             property float nx\nproperty uchar label\nelement face 1\nproperty list uchar int vertex_indices\n\
             end_header\n0 0 0 1 1\n1 0 0 1 2\n0 1 0 1 77\n3 0 1 2\n",
        )
        .unwrap();
        assert_eq!(
            cloud.labels(),
            &[SemanticLabel::Trunk, SemanticLabel::Branch, SemanticLabel::Unlabeled]
        );
    }

    #[test]
    fn round_trips_every_label_in_both_encodings() {
        let c = sample();
        for options in [
            PlyOptions::default(),
            PlyOptions::ascii(),
            PlyOptions {
                precision: PlyPrecision::Double,
                ..PlyOptions::ascii()
            },
        ] {
            let back = parse_ply(&encode_ply(&c, options).unwrap(), Path::new("t")).unwrap();
            assert_eq!(back.labels(), c.labels());
            assert_eq!(back.colors(), c.colors());
            for (a, b) in back.positions().iter().zip(c.positions()) {
                assert_eq!(a.0.map(|v| v as f32), b.0.map(|v| v as f32));
            }
        }
        let empty = LabeledPointCloud::default();
        let bytes = encode_ply(&empty, PlyOptions::default()).unwrap();
        assert!(String::from_utf8_lossy(&bytes).contains("element vertex 0"));
        assert_eq!(parse_ply(&bytes, Path::new("t")).unwrap(), empty);
    }

    #[test]
    fn overflowing_float_is_refused() {
        let c = LabeledPointCloud::from_positions(vec![Vec3::new(1e300, 0.0, 0.0)]).unwrap();
        assert!(encode_ply(&c, PlyOptions::default()).is_err());
        let opts = PlyOptions {
            precision: PlyPrecision::Double,
            ..Default::default()
        };
        let back = parse_ply(&encode_ply(&c, opts).unwrap(), Path::new("t")).unwrap();
        assert_eq!(back, c);
    }
}
