//! OBJ and PLY (ascii, binary little-endian) reading and writing.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{TriMesh, Vec3};
use crate::{Error, Result};

/// What the loader had to clean up.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadStats {
    /// Faces dropped for repeated indices or zero area.
    pub dropped_degenerate: usize,
    /// Polygons with more than three corners, fan-split on load.
    pub triangulated_polygons: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Obj,
    Ply,
}

fn format_of(path: &Path) -> Result<Format> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("obj") => Ok(Format::Obj),
        Some("ply") => Ok(Format::Ply),
        _ => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
        }),
    }
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    load_mesh_with_stats(path).map(|(m, _)| m)
}

/// Loads an OBJ or PLY file, fan-splits polygons, drops degenerate faces and
/// rejects edges shared by more than two faces.
pub fn load_mesh_with_stats(path: impl AsRef<Path>) -> Result<(TriMesh, LoadStats)> {
    let path = path.as_ref();
    let format = format_of(path)?;
    let bytes = fs::read(path)?;
    let (positions, polygons) = match format {
        Format::Obj => parse_obj(path, &bytes)?,
        Format::Ply => parse_ply(path, &bytes)?,
    };
    let mut stats = LoadStats::default();
    let mut faces = Vec::with_capacity(polygons.len());
    for poly in polygons {
        if poly.len() > 3 {
            stats.triangulated_polygons += 1;
        }
        for k in 1..poly.len() - 1 {
            let f = [poly[0], poly[k], poly[k + 1]];
            let repeated = f[0] == f[1] || f[1] == f[2] || f[0] == f[2];
            let zero_area = !repeated && {
                let (a, b, c) = (positions[f[0]], positions[f[1]], positions[f[2]]);
                (b - a).cross(&(c - a)).norm() == 0.0
            };
            if repeated || zero_area {
                stats.dropped_degenerate += 1;
            } else {
                faces.push(f);
            }
        }
    }
    if stats.dropped_degenerate > 0 {
        log::warn!(
            "{}: dropped {} degenerate faces",
            path.display(),
            stats.dropped_degenerate
        );
    }
    let mesh = TriMesh::new(positions, faces)?;
    if let Some(e) = mesh.topology().edges().iter().find(|e| e.faces.len() > 2) {
        return Err(Error::NonManifoldEdge(e.vertices[0], e.vertices[1], e.faces.len()));
    }
    Ok((mesh, stats))
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

type Parsed = (Vec<Vec3>, Vec<Vec<usize>>);

fn parse_obj(path: &Path, bytes: &[u8]) -> Result<Parsed> {
    let text = std::str::from_utf8(bytes).map_err(|e| format_err(path, 0, e.to_string()))?;
    let mut positions = Vec::new();
    let mut polygons = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| format_err(path, line_no, "vertex needs three coordinates"))?;
                    *slot = tok
                        .parse()
                        .map_err(|_| format_err(path, line_no, format!("bad coordinate `{tok}`")))?;
                }
                positions.push(Vec3::from(c));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in tokens {
                    let head = tok.split('/').next().unwrap_or("");
                    let raw: i64 = head
                        .parse()
                        .map_err(|_| format_err(path, line_no, format!("bad face index `{tok}`")))?;
                    let idx = match raw {
                        r if r > 0 => r - 1,
                        r if r < 0 => positions.len() as i64 + r,
                        _ => return Err(format_err(path, line_no, "face index 0 is invalid")),
                    };
                    if idx < 0 || idx as usize >= positions.len() {
                        return Err(format_err(path, line_no, format!("face index {raw} out of range")));
                    }
                    poly.push(idx as usize);
                }
                if poly.len() < 3 {
                    return Err(format_err(path, line_no, "face needs at least three vertices"));
                }
                polygons.push(poly);
            }
            _ => {}
        }
    }
    Ok((positions, polygons))
}

#[derive(Clone, Copy, Debug)]
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
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

fn parse_ply(path: &Path, bytes: &[u8]) -> Result<Parsed> {
    // Header is ascii terminated by "end_header\n".
    let marker = b"end_header";
    let header_end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| format_err(path, 1, "missing end_header"))?;
    let mut body_start = header_end + marker.len();
    while body_start < bytes.len() && bytes[body_start] != b'\n' {
        body_start += 1;
    }
    body_start += 1;
    let header = std::str::from_utf8(&bytes[..header_end]).map_err(|e| format_err(path, 1, e.to_string()))?;
    let mut binary = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut header_lines = 0;
    for (i, line) in header.lines().enumerate() {
        header_lines = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["ply"] if i == 0 => {}
            _ if i == 0 => return Err(format_err(path, 1, "missing `ply` magic")),
            ["format", "ascii", _] => binary = Some(false),
            ["format", "binary_little_endian", _] => binary = Some(true),
            ["format", other, _] => return Err(format_err(path, i + 1, format!("unsupported PLY format `{other}`"))),
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| format_err(path, i + 1, "bad element count"))?,
                properties: Vec::new(),
            }),
            ["property", "list", count_ty, item_ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| format_err(path, i + 1, "property before element"))?;
                let ct = Scalar::parse(count_ty).ok_or_else(|| format_err(path, i + 1, "bad list count type"))?;
                let it = Scalar::parse(item_ty).ok_or_else(|| format_err(path, i + 1, "bad list item type"))?;
                el.properties.push(Property::List(name.to_string(), ct, it));
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| format_err(path, i + 1, "property before element"))?;
                let t =
                    Scalar::parse(ty).ok_or_else(|| format_err(path, i + 1, format!("bad property type `{ty}`")))?;
                el.properties.push(Property::Scalar(name.to_string(), t));
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            _ => return Err(format_err(path, i + 1, format!("unrecognized header line `{line}`"))),
        }
    }
    let binary = binary.ok_or_else(|| format_err(path, 2, "missing format line"))?;
    let mut positions = Vec::new();
    let mut polygons = Vec::new();
    let body = &bytes[body_start.min(bytes.len())..];
    let mut reader: Box<dyn ValueReader> = if binary {
        Box::new(BinaryReader { data: body, offset: 0 })
    } else {
        Box::new(AsciiReader::new(body, header_lines + 1))
    };
    for el in &elements {
        for _ in 0..el.count {
            let mut xyz = [0.0; 3];
            let mut poly = Vec::new();
            for prop in &el.properties {
                match prop {
                    Property::Scalar(name, ty) => {
                        let v = reader.next(*ty).map_err(|m| format_err(path, reader.line(), m))?;
                        if el.name == "vertex" {
                            match name.as_str() {
                                "x" => xyz[0] = v,
                                "y" => xyz[1] = v,
                                "z" => xyz[2] = v,
                                _ => {}
                            }
                        }
                    }
                    Property::List(name, ct, it) => {
                        let n = reader.next(*ct).map_err(|m| format_err(path, reader.line(), m))?;
                        let keep = el.name == "face" && (name == "vertex_indices" || name == "vertex_index");
                        for _ in 0..n as usize {
                            let v = reader.next(*it).map_err(|m| format_err(path, reader.line(), m))?;
                            if keep {
                                poly.push(v);
                            }
                        }
                    }
                }
            }
            if el.name == "vertex" {
                positions.push(Vec3::from(xyz));
            } else if el.name == "face" {
                if poly.len() < 3 {
                    return Err(format_err(path, reader.line(), "face needs at least three vertices"));
                }
                let mut idx = Vec::with_capacity(poly.len());
                for v in poly {
                    if v < 0.0 || v as usize >= positions.len() {
                        return Err(format_err(path, reader.line(), format!("face index {v} out of range")));
                    }
                    idx.push(v as usize);
                }
                polygons.push(idx);
            }
        }
    }
    Ok((positions, polygons))
}

trait ValueReader {
    fn next(&mut self, ty: Scalar) -> std::result::Result<f64, String>;
    /// Line (ascii) or byte offset (binary) for diagnostics.
    fn line(&self) -> usize;
}

struct BinaryReader<'a> {
    data: &'a [u8],
    offset: usize,
}

impl ValueReader for BinaryReader<'_> {
    fn next(&mut self, ty: Scalar) -> std::result::Result<f64, String> {
        let end = self.offset + ty.size();
        if end > self.data.len() {
            return Err(format!("unexpected end of data at byte offset {}", self.offset));
        }
        let v = ty.read_le(&self.data[self.offset..end]);
        self.offset = end;
        Ok(v)
    }

    fn line(&self) -> usize {
        self.offset
    }
}

struct AsciiReader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    tokens: std::vec::IntoIter<&'a str>,
    first_line: usize,
    current: usize,
}

impl<'a> AsciiReader<'a> {
    fn new(body: &'a [u8], first_line: usize) -> Self {
        let text = std::str::from_utf8(body).unwrap_or("");
        Self {
            lines: text.lines().enumerate().peekable(),
            tokens: Vec::new().into_iter(),
            first_line,
            current: first_line,
        }
    }
}

impl ValueReader for AsciiReader<'_> {
    fn next(&mut self, _ty: Scalar) -> std::result::Result<f64, String> {
        loop {
            if let Some(tok) = self.tokens.next() {
                return tok.parse().map_err(|_| format!("bad number `{tok}`"));
            }
            let (i, line) = self.lines.next().ok_or("unexpected end of file")?;
            self.current = self.first_line + i + 1;
            self.tokens = line.split_whitespace().collect::<Vec<_>>().into_iter();
        }
    }

    fn line(&self) -> usize {
        self.current
    }
}

/// Writes OBJ (shortest round-trip decimal) or binary little-endian PLY
/// (double coordinates), chosen by extension. Output order follows the mesh.
pub fn save_mesh(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    let path = path.as_ref();
    match format_of(path)? {
        Format::Obj => write_obj(path, mesh),
        Format::Ply => write_ply(path, mesh, None),
    }
}

/// Binary PLY with per-vertex `red green blue` bytes.
pub fn save_ply_colored(path: impl AsRef<Path>, mesh: &TriMesh, colors: &[[u8; 3]]) -> Result<()> {
    if colors.len() != mesh.num_vertices() {
        return Err(Error::InvalidArgument(format!(
            "{} colors for {} vertices",
            colors.len(),
            mesh.num_vertices()
        )));
    }
    write_ply(path.as_ref(), mesh, Some(colors))
}

fn write_obj(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for p in mesh.positions() {
        writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    w.flush()?;
    Ok(())
}

fn write_ply(path: &Path, mesh: &TriMesh, colors: Option<&[[u8; 3]]>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "ply\nformat binary_little_endian 1.0")?;
    writeln!(w, "element vertex {}", mesh.num_vertices())?;
    writeln!(w, "property double x\nproperty double y\nproperty double z")?;
    if colors.is_some() {
        writeln!(w, "property uchar red\nproperty uchar green\nproperty uchar blue")?;
    }
    writeln!(w, "element face {}", mesh.num_faces())?;
    writeln!(w, "property list uchar int vertex_indices\nend_header")?;
    for (i, p) in mesh.positions().iter().enumerate() {
        for c in p.iter() {
            w.write_all(&c.to_le_bytes())?;
        }
        if let Some(colors) = colors {
            w.write_all(&colors[i])?;
        }
    }
    for f in mesh.faces() {
        w.write_all(&[3u8])?;
        for &v in f {
            w.write_all(&(v as i32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{boundary_loops, primitives};

    fn write(dir: &tempfile::TempDir, name: &str, body: &[u8]) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn single_triangle_obj() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "t.obj",
            b"# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n",
        );
        let m = load_mesh(&p).unwrap();
        assert_eq!((m.num_vertices(), m.num_faces()), (3, 1));
        assert_eq!(m.boundary_half_edges().len(), 3);
    }

    #[test]
    fn ascii_ply_tetrahedron() {
        let dir = tempfile::tempdir().unwrap();
        let body = "ply\nformat ascii 1.0\ncomment test\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\n\
                    element face 4\nproperty list uchar int vertex_indices\nend_header\n\
                    1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";
        let m = load_mesh(write(&dir, "t.ply", body.as_bytes())).unwrap();
        assert!(boundary_loops(&m).is_empty());
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn quads_are_fan_split_and_degenerates_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "q.obj",
            b"v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 2 0 0\nf 1 2 3 4\nf 1 1 2\nf 1 2 5\n",
        );
        let (m, stats) = load_mesh_with_stats(&p).unwrap();
        assert_eq!(m.num_faces(), 2);
        assert_eq!(stats.triangulated_polygons, 1);
        assert_eq!(stats.dropped_degenerate, 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "bad.obj", b"v 0 0 0\nv 1 0 0\nv 0 x 0\n");
        match load_mesh(&p) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let p = write(&dir, "bad2.obj", b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
        assert!(matches!(load_mesh(&p), Err(Error::Format { line: 4, .. })));
        let p = write(&dir, "bad.stl", b"solid");
        assert!(matches!(load_mesh(&p), Err(Error::UnsupportedFormat { .. })));
    }

    #[test]
    fn non_manifold_input_names_the_edge() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "fin.obj",
            b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 0 -1 0\nf 1 2 3\nf 2 1 4\nf 1 2 5\n",
        );
        assert!(matches!(load_mesh(&p), Err(Error::NonManifoldEdge(0, 1, 3))));
    }

    #[test]
    fn icosphere_round_trips_through_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let m = primitives::icosphere(3);
        for name in ["s.obj", "s.ply"] {
            let p = dir.path().join(name);
            save_mesh(&p, &m).unwrap();
            let back = load_mesh(&p).unwrap();
            assert_eq!(back.num_vertices(), 642);
            assert_eq!(back.num_faces(), 1280);
            assert!(boundary_loops(&back).is_empty());
            assert_eq!(back, m, "{name} is not lossless");
        }
    }

    #[test]
    fn colored_ply_is_readable() {
        let dir = tempfile::tempdir().unwrap();
        let m = primitives::tetrahedron();
        let p = dir.path().join("c.ply");
        save_ply_colored(&p, &m, &[[1, 2, 3]; 4]).unwrap();
        assert_eq!(load_mesh(&p).unwrap(), m);
        assert!(save_ply_colored(&p, &m, &[[0; 3]; 3]).is_err());
    }
}
