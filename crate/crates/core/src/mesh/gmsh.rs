//! Gmsh MSH 2.2 ASCII reader and writer.
//!
//! Only the `$MeshFormat`, `$Nodes` and `$Elements` sections are consumed.
//! Tetrahedra are element type 4; the first physical tag is the region.
//! Elements of other types are skipped.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use std::collections::HashMap;

use crate::error::MeshError;
use crate::geometry::{decimal_string, parse_decimal};
use crate::mesh::MeshFile;

fn err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::ParseError {
        line,
        message: message.into(),
    }
}

pub fn parse(path: &Path) -> Result<MeshFile, MeshError> {
    let text = fs::read_to_string(path)?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<MeshFile, MeshError> {
    let mut lines = text.lines().enumerate().peekable();
    let mut vertices = Vec::new();
    let mut id_map: HashMap<u64, u32> = HashMap::new();
    let mut tets = Vec::new();
    let mut saw_format = false;

    while let Some((ln, raw)) = lines.next() {
        let line = raw.trim();
        match line {
            "$MeshFormat" => {
                let (ln2, fmt) = lines
                    .next()
                    .ok_or_else(|| err(ln + 1, "missing format line"))?;
                let mut it = fmt.split_whitespace();
                let version = it.next().unwrap_or("");
                if version != "2.2" {
                    return Err(MeshError::UnsupportedFormatVersion {
                        found: version.to_string(),
                        expected: "2.2".to_string(),
                    });
                }
                if it.next() != Some("0") {
                    return Err(err(ln2 + 1, "expected ASCII file-type 0"));
                }
                saw_format = true;
                expect_section_end(&mut lines, "$EndMeshFormat")?;
            }
            "$Nodes" => {
                let (ln2, count_line) = lines.next().ok_or_else(|| err(ln + 1, "missing node count"))?;
                let count: usize = count_line
                    .trim()
                    .parse()
                    .map_err(|_| err(ln2 + 1, "bad node count"))?;
                for _ in 0..count {
                    let (ln3, node) = lines.next().ok_or_else(|| err(ln2 + 1, "truncated nodes"))?;
                    let mut it = node.split_whitespace();
                    let id: u64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(ln3 + 1, "bad node id"))?;
                    let mut coords = Vec::with_capacity(3);
                    for _ in 0..3 {
                        let c = it
                            .next()
                            .and_then(parse_decimal)
                            .ok_or_else(|| err(ln3 + 1, "bad coordinate"))?;
                        coords.push(c);
                    }
                    let dense = vertices.len() as u32;
                    if id_map.insert(id, dense).is_some() {
                        return Err(err(ln3 + 1, format!("duplicate node id {id}")));
                    }
                    vertices.push([coords[0].clone(), coords[1].clone(), coords[2].clone()]);
                }
                expect_section_end(&mut lines, "$EndNodes")?;
            }
            "$Elements" => {
                let (ln2, count_line) = lines
                    .next()
                    .ok_or_else(|| err(ln + 1, "missing element count"))?;
                let count: usize = count_line
                    .trim()
                    .parse()
                    .map_err(|_| err(ln2 + 1, "bad element count"))?;
                for _ in 0..count {
                    let (ln3, elem) = lines
                        .next()
                        .ok_or_else(|| err(ln2 + 1, "truncated elements"))?;
                    let fields: Vec<&str> = elem.split_whitespace().collect();
                    if fields.len() < 3 {
                        return Err(err(ln3 + 1, "short element line"));
                    }
                    let etype: u32 = fields[1]
                        .parse()
                        .map_err(|_| err(ln3 + 1, "bad element type"))?;
                    if etype != 4 {
                        continue;
                    }
                    let ntags: usize = fields[2]
                        .parse()
                        .map_err(|_| err(ln3 + 1, "bad tag count"))?;
                    if fields.len() != 3 + ntags + 4 {
                        return Err(err(ln3 + 1, "wrong field count for tetrahedron"));
                    }
                    let region: i32 = if ntags > 0 {
                        fields[3].parse().map_err(|_| err(ln3 + 1, "bad region tag"))?
                    } else {
                        0
                    };
                    let mut vs = [0u32; 4];
                    for (k, field) in fields[3 + ntags..].iter().enumerate() {
                        let id: u64 = field.parse().map_err(|_| err(ln3 + 1, "bad node ref"))?;
                        vs[k] = *id_map
                            .get(&id)
                            .ok_or_else(|| err(ln3 + 1, format!("unknown node id {id}")))?;
                    }
                    tets.push((vs, region));
                }
                expect_section_end(&mut lines, "$EndElements")?;
            }
            _ => {
                // unknown section or blank line: skip
            }
        }
    }
    if !saw_format {
        return Err(err(1, "missing $MeshFormat section"));
    }
    Ok(MeshFile { vertices, tets })
}

fn expect_section_end<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    end: &str,
) -> Result<(), MeshError> {
    match lines.next() {
        Some((_, l)) if l.trim() == end => Ok(()),
        Some((ln, l)) => Err(err(ln + 1, format!("expected {end}, found {l:?}"))),
        None => Err(err(0, format!("missing {end}"))),
    }
}

pub fn write(mesh: &MeshFile, path: &Path) -> Result<(), MeshError> {
    let mut out = String::new();
    render(mesh, &mut out);
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn render(mesh: &MeshFile, out: &mut String) {
    out.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    out.push_str(&mesh.vertices.len().to_string());
    out.push('\n');
    for (i, p) in mesh.vertices.iter().enumerate() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            i + 1,
            decimal_string(&p[0]),
            decimal_string(&p[1]),
            decimal_string(&p[2])
        ));
    }
    out.push_str("$EndNodes\n$Elements\n");
    out.push_str(&mesh.tets.len().to_string());
    out.push('\n');
    for (i, (vs, region)) in mesh.tets.iter().enumerate() {
        out.push_str(&format!(
            "{} 4 2 {} {} {} {} {} {}\n",
            i + 1,
            region,
            region,
            vs[0] + 1,
            vs[1] + 1,
            vs[2] + 1,
            vs[3] + 1
        ));
    }
    out.push_str("$EndElements\n");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat_i64;

    const ONE_TET: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n$Elements\n1\n1 4 2 7 7 1 2 3 4\n$EndElements\n";

    #[test]
    fn parses_single_tet_fixture() {
        let mesh = parse_str(ONE_TET).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.tets, vec![([0, 1, 2, 3], 7)]);
        assert_eq!(mesh.vertices[1][0], rat_i64(1));
    }

    #[test]
    fn rejects_unknown_node_reference() {
        let bad = ONE_TET.replace("1 2 3 4", "1 2 3 1000000000");
        let e = parse_str(&bad).unwrap_err();
        match e {
            MeshError::ParseError { line, message } => {
                assert_eq!(line, 13);
                assert!(message.contains("unknown node id"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_other_versions() {
        let bad = ONE_TET.replace("2.2", "4.1");
        assert!(matches!(
            parse_str(&bad).unwrap_err(),
            MeshError::UnsupportedFormatVersion { .. }
        ));
    }

    #[test]
    fn skips_non_tet_elements() {
        let mixed = ONE_TET.replace(
            "$Elements\n1\n1 4 2 7 7 1 2 3 4\n",
            "$Elements\n2\n1 2 2 5 5 1 2 3\n2 4 2 7 7 1 2 3 4\n",
        );
        let mesh = parse_str(&mixed).unwrap();
        assert_eq!(mesh.tets.len(), 1);
    }

    #[test]
    fn round_trip() {
        let mesh = parse_str(ONE_TET).unwrap();
        let mut text = String::new();
        render(&mesh, &mut text);
        assert_eq!(parse_str(&text).unwrap(), mesh);
    }
}
