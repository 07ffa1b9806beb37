//! Plain-text mesh dump and legacy VTK export.
//!
//! Text layout: a header `dim degree n_nodes n_cells`, one node per line
//! (`dim` coordinates), one cell per line (node indices in lexicographic
//! reference order), then one boundary face per line as
//! `cell local_face marker` until end of input.

use std::io::{self, BufRead, Write};

use super::{BoundaryFace, Mesh, MeshError};

pub fn write_mesh_text<W: Write>(mesh: &Mesh, mut out: W) -> io::Result<()> {
    writeln!(out, "{} {} {} {}", mesh.dim(), mesh.degree(), mesh.n_nodes(), mesh.n_cells())?;
    for x in mesh.nodes() {
        let coords: Vec<String> = x.iter().take(mesh.dim()).map(|v| format!("{v:.17e}")).collect();
        writeln!(out, "{}", coords.join(" "))?;
    }
    for c in 0..mesh.n_cells() {
        let ids: Vec<String> = mesh.cell_nodes(c).iter().map(usize::to_string).collect();
        writeln!(out, "{}", ids.join(" "))?;
    }
    for f in mesh.boundary_faces() {
        writeln!(out, "{} {} {}", f.cell, f.local_face, f.marker)?;
    }
    Ok(())
}

pub fn read_mesh_text<R: BufRead>(input: R) -> Result<Mesh, MeshError> {
    let bad = |msg: String| MeshError::Inconsistent(msg);
    let mut lines = input.lines().map(|l| l.map_err(|e| bad(e.to_string())));
    let mut next_fields = |what: &str| -> Result<Vec<String>, MeshError> {
        let line = lines.next().ok_or_else(|| bad(format!("unexpected end of input reading {what}")))??;
        Ok(line.split_whitespace().map(str::to_owned).collect())
    };
    let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("{s:?}: {e}")));

    let header = next_fields("header")?;
    if header.len() != 4 {
        return Err(bad(format!("header must have 4 fields, got {}", header.len())));
    }
    let dim = parse_usize(&header[0])?;
    let degree = parse_usize(&header[1])?;
    let n_nodes = parse_usize(&header[2])?;
    let n_cells = parse_usize(&header[3])?;

    let mut nodes = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let f = next_fields("nodes")?;
        if f.len() != dim {
            return Err(bad(format!("node {i} has {} coordinates", f.len())));
        }
        let mut x = [0.0; 3];
        for (a, s) in f.iter().enumerate() {
            x[a] = s.parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
        }
        nodes.push(x);
    }
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let f = next_fields("cells")?;
        cells.push(f.iter().map(|s| parse_usize(s)).collect::<Result<Vec<_>, _>>()?);
    }
    let mut faces = Vec::new();
    for line in lines {
        let line = line?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() != 3 {
            return Err(bad(format!("boundary face line {line:?}")));
        }
        faces.push(BoundaryFace {
            cell: parse_usize(f[0])?,
            local_face: parse_usize(f[1])?,
            marker: f[2].parse().map_err(|e| bad(format!("{:?}: {e}", f[2])))?,
        });
    }
    Mesh::from_parts(dim, degree, nodes, cells, faces)
}

/// A nodal field for VTK output with `components` values per node.
pub struct VtkField<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
    pub components: usize,
}

/// Legacy VTK unstructured grid. Quadratic cells are written through their
/// vertices only; all nodes are kept as points so nodal data stays aligned.
pub fn write_vtk<W: Write>(mesh: &Mesh, fields: &[VtkField<'_>], mut out: W) -> io::Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "perturbfem mesh level {} degree {}", mesh.level(), mesh.degree())?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_nodes())?;
    for x in mesh.nodes() {
        writeln!(out, "{:.17e} {:.17e} {:.17e}", x[0], x[1], x[2])?;
    }
    // Lexicographic vertex order to VTK's counter-clockwise order.
    let (order, vtk_type): (&[usize], u8) = if mesh.dim() == 2 {
        (&[0, 1, 3, 2], 9)
    } else {
        (&[0, 1, 3, 2, 4, 5, 7, 6], 12)
    };
    let slots = mesh.corner_slots();
    let n = mesh.n_cells();
    writeln!(out, "CELLS {} {}", n, n * (order.len() + 1))?;
    for c in 0..n {
        let nodes = mesh.cell_nodes(c);
        let ids: Vec<String> = order.iter().map(|&k| nodes[slots[k]].to_string()).collect();
        writeln!(out, "{} {}", order.len(), ids.join(" "))?;
    }
    writeln!(out, "CELL_TYPES {n}")?;
    for _ in 0..n {
        writeln!(out, "{vtk_type}")?;
    }
    if !fields.is_empty() {
        writeln!(out, "POINT_DATA {}", mesh.n_nodes())?;
    }
    for f in fields {
        if f.components == 1 {
            writeln!(out, "SCALARS {} double 1", f.name)?;
            writeln!(out, "LOOKUP_TABLE default")?;
            for v in f.values {
                writeln!(out, "{v:.17e}")?;
            }
        } else {
            writeln!(out, "VECTORS {} double", f.name)?;
            for chunk in f.values.chunks(f.components) {
                let mut v = [0.0; 3];
                v[..chunk.len().min(3)].copy_from_slice(&chunk[..chunk.len().min(3)]);
                writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PerturbedDomain;
    use crate::meshgen::build_mesh;

    #[test]
    fn text_dump_round_trips() {
        let dom = PerturbedDomain::radial(2, 0.1).unwrap();
        let mesh = build_mesh(&dom, 2, 2).unwrap();
        let mut buf = Vec::new();
        write_mesh_text(&mesh, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("2 2 {} {}\n", mesh.n_nodes(), mesh.n_cells())));
        let back = read_mesh_text(&buf[..]).unwrap();
        assert_eq!(back.nodes(), mesh.nodes());
        assert_eq!(back.boundary_faces(), mesh.boundary_faces());
        for c in 0..mesh.n_cells() {
            assert_eq!(back.cell_nodes(c), mesh.cell_nodes(c));
        }
    }

    #[test]
    fn truncated_text_is_rejected() {
        assert!(read_mesh_text(&b"2 1 4 1\n0 0\n"[..]).is_err());
        assert!(read_mesh_text(&b"2 1\n"[..]).is_err());
    }

    #[test]
    fn vtk_has_expected_sections() {
        let dom = PerturbedDomain::unit_ball(3).unwrap();
        let mesh = build_mesh(&dom, 1, 1).unwrap();
        let vals: Vec<f64> = (0..mesh.n_nodes()).map(|i| i as f64).collect();
        let mut buf = Vec::new();
        write_vtk(&mesh, &[VtkField { name: "u", values: &vals, components: 1 }], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(&format!("CELLS {} {}", mesh.n_cells(), mesh.n_cells() * 9)));
        assert!(text.contains("SCALARS u double 1"));
        assert_eq!(text.lines().filter(|l| *l == "12").count(), mesh.n_cells());
    }
}
