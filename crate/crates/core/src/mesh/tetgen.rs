//! TetGen `.node`/`.ele` pair reader and writer, with the region attribute
//! column enabled.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::MeshError;
use crate::geometry::{decimal_string, parse_decimal};
use crate::mesh::MeshFile;

fn err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::ParseError {
        line,
        message: message.into(),
    }
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

/// Lines of a TetGen file with comments stripped, keeping 1-based numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            None
        } else {
            Some((i + 1, l))
        }
    })
}

pub fn parse(path: &Path) -> Result<MeshFile, MeshError> {
    let node_path = sibling(path, "node");
    let ele_path = sibling(path, "ele");
    let node_text = fs::read_to_string(&node_path)?;
    let ele_text = fs::read_to_string(&ele_path)?;
    parse_strs(&node_text, &ele_text)
}

pub fn parse_strs(node_text: &str, ele_text: &str) -> Result<MeshFile, MeshError> {
    let mut nodes = data_lines(node_text);
    let (hl, header) = nodes.next().ok_or_else(|| err(1, "empty .node file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let count: usize = head
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(hl, "bad node count"))?;
    if head.get(1) != Some(&"3") {
        return Err(err(hl, "expected dimension 3 in .node header"));
    }

    let mut vertices = Vec::with_capacity(count);
    let mut first_index: Option<u64> = None;
    for _ in 0..count {
        let (ln, line) = nodes.next().ok_or_else(|| err(hl, "truncated .node file"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(err(ln, "short node line"));
        }
        let id: u64 = fields[0].parse().map_err(|_| err(ln, "bad node index"))?;
        let base = *first_index.get_or_insert(id);
        if id != base + vertices.len() as u64 {
            return Err(err(ln, "node indices must be consecutive"));
        }
        let mut p = Vec::with_capacity(3);
        for f in &fields[1..4] {
            p.push(parse_decimal(f).ok_or_else(|| err(ln, "bad coordinate"))?);
        }
        vertices.push([p[0].clone(), p[1].clone(), p[2].clone()]);
    }
    let base = first_index.unwrap_or(0);

    let mut eles = data_lines(ele_text);
    let (el, eheader) = eles.next().ok_or_else(|| err(1, "empty .ele file"))?;
    let ehead: Vec<&str> = eheader.split_whitespace().collect();
    let ecount: usize = ehead
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(el, "bad element count"))?;
    if ehead.get(1) != Some(&"4") {
        return Err(err(el, "expected 4 nodes per tetrahedron in .ele header"));
    }
    let has_region = ehead.get(2).is_some_and(|s| *s != "0");

    let mut tets = Vec::with_capacity(ecount);
    for _ in 0..ecount {
        let (ln, line) = eles.next().ok_or_else(|| err(el, "truncated .ele file"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let want = 5 + usize::from(has_region);
        if fields.len() < want {
            return Err(err(ln, "short element line"));
        }
        let mut vs = [0u32; 4];
        for (k, f) in fields[1..5].iter().enumerate() {
            let id: u64 = f.parse().map_err(|_| err(ln, "bad node reference"))?;
            if id < base || id - base >= vertices.len() as u64 {
                return Err(err(ln, format!("node reference {id} out of range")));
            }
            vs[k] = (id - base) as u32;
        }
        let region: i32 = if has_region {
            parse_decimal(fields[5])
                .and_then(|r| {
                    if r.is_integer() {
                        use num_traits::ToPrimitive;
                        r.to_integer().to_i32()
                    } else {
                        None
                    }
                })
                .ok_or_else(|| err(ln, "bad region attribute"))?
        } else {
            0
        };
        tets.push((vs, region));
    }
    Ok(MeshFile { vertices, tets })
}

pub fn write(mesh: &MeshFile, path: &Path) -> Result<(), MeshError> {
    let mut node_text = format!("{} 3 0 0\n", mesh.vertices.len());
    for (i, p) in mesh.vertices.iter().enumerate() {
        node_text.push_str(&format!(
            "{} {} {} {}\n",
            i + 1,
            decimal_string(&p[0]),
            decimal_string(&p[1]),
            decimal_string(&p[2])
        ));
    }
    let mut ele_text = format!("{} 4 1\n", mesh.tets.len());
    for (i, (vs, region)) in mesh.tets.iter().enumerate() {
        ele_text.push_str(&format!(
            "{} {} {} {} {} {}\n",
            i + 1,
            vs[0] + 1,
            vs[1] + 1,
            vs[2] + 1,
            vs[3] + 1,
            region
        ));
    }
    fs::File::create(sibling(path, "node"))?.write_all(node_text.as_bytes())?;
    fs::File::create(sibling(path, "ele"))?.write_all(ele_text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const NODE: &str = "# comment\n4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n";
    const ELE: &str = "1 4 1\n1 1 2 3 4 5\n";

    #[test]
    fn parses_pair_with_region_attribute() {
        let mesh = parse_strs(NODE, ELE).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.tets, vec![([0, 1, 2, 3], 5)]);
    }

    #[test]
    fn zero_based_indices_accepted() {
        let node0 = "4 3 0 0\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n";
        let ele0 = "1 4 1\n0 0 1 2 3 9\n";
        let mesh = parse_strs(node0, ele0).unwrap();
        assert_eq!(mesh.tets, vec![([0, 1, 2, 3], 9)]);
    }

    #[test]
    fn out_of_range_reference_rejected() {
        let bad = ELE.replace("1 1 2 3 4 5", "1 1 2 3 1000000000 5");
        let e = parse_strs(NODE, &bad).unwrap_err();
        assert!(matches!(e, MeshError::ParseError { line: 2, .. }), "{e:?}");
    }
}
