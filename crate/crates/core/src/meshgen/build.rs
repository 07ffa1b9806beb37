use std::collections::HashMap;

use super::layout::BallLayout;
use super::{Block, BoundaryFace, Mesh, MeshError, OUTER_BOUNDARY};
use crate::geometry::PerturbedDomain;
use crate::Point;

/// Level-0 mesh: the core block plus one shell block per core face
/// (5 quadrilaterals in 2D, 7 hexahedra in 3D). Outer vertices sit on the
/// boundary along the core diagonals.
pub fn coarse_mesh(domain: &PerturbedDomain) -> Mesh {
    let dim = domain.dim();
    let layout = BallLayout::new(dim);
    let mut nodes: Vec<Point> = Vec::new();
    let mut ids: HashMap<(bool, Vec<i8>), usize> = HashMap::new();
    let mut cells = Vec::new();
    let mut blocks = Vec::new();
    let mut boundary_faces = Vec::new();

    for patch in 0..layout.n_patches() {
        let mut cell = Vec::with_capacity(1 << dim);
        for corner in 0..(1usize << dim) {
            let mut local = [0.0; 3];
            for (a, l) in local.iter_mut().enumerate().take(dim) {
                *l = ((corner >> a) & 1) as f64;
            }
            let probe = if patch == 0 { local } else { with_w(local, dim, 0.0) };
            let x_core_dir = layout.map(&PerturbedDomain::unit_ball(dim).unwrap(), patch, probe);
            let outer = patch != 0 && local[dim - 1] == 1.0;
            let signs: Vec<i8> = x_core_dir.iter().take(dim).map(|v| if *v > 0.0 { 1 } else { -1 }).collect();
            let id = *ids.entry((outer, signs)).or_insert_with(|| {
                nodes.push(layout.map(domain, patch, local));
                nodes.len() - 1
            });
            cell.push(id);
        }
        let c = cells.len();
        cells.push(cell);
        blocks.push(Block { patch, lo: [0.0; 3], hi: [1.0; 3] });
        if let Some(face) = layout.outer_face(patch) {
            boundary_faces.push(BoundaryFace { cell: c, local_face: face, marker: OUTER_BOUNDARY });
        }
    }

    let mut mesh = Mesh::from_parts(dim, 1, nodes, cells, boundary_faces).expect("coarse layout is consistent");
    mesh.blocks = Some(blocks);
    mesh.domain = Some(*domain);
    mesh
}

/// Same block-local point with the radial coordinate replaced.
fn with_w(mut local: [f64; 3], dim: usize, w: f64) -> [f64; 3] {
    local[dim - 1] = w;
    local
}

/// Enumerates the `3^dim` points `{0, 1/2, 1}^dim` of a cell. For each point
/// returns its reference coordinate and the sorted vertex ids of the
/// smallest cell entity (vertex, edge, face, cell) containing it.
fn sub_entities(dim: usize, corners: &[usize]) -> Vec<([f64; 3], Vec<usize>)> {
    let n = 3usize.pow(dim as u32);
    (0..n)
        .map(|i| {
            let mut idx = [0usize; 3];
            let mut xi = [0.0; 3];
            let mut rem = i;
            for a in 0..dim {
                idx[a] = rem % 3;
                xi[a] = idx[a] as f64 * 0.5;
                rem /= 3;
            }
            let mut key: Vec<usize> = (0..corners.len())
                .filter(|&c| (0..dim).all(|a| idx[a] == 1 || ((c >> a) & 1) * 2 == idx[a]))
                .map(|c| corners[c])
                .collect();
            key.sort_unstable();
            (xi, key)
        })
        .collect()
}

fn mean_of(nodes: &[Point], ids: &[usize]) -> Point {
    let mut x = [0.0; 3];
    for &i in ids {
        for a in 0..3 {
            x[a] += nodes[i][a];
        }
    }
    let n = ids.len() as f64;
    [x[0] / n, x[1] / n, x[2] / n]
}

fn block_point(b: &Block, xi: &[f64; 3]) -> [f64; 3] {
    let mut p = [0.0; 3];
    for a in 0..3 {
        p[a] = b.lo[a] + xi[a] * (b.hi[a] - b.lo[a]);
    }
    p
}

fn check_domain(mesh: &Mesh, domain: &PerturbedDomain) -> Result<(), MeshError> {
    if mesh.dim != domain.dim() {
        return Err(MeshError::Inconsistent(format!(
            "mesh is {}D, domain is {}D",
            mesh.dim,
            domain.dim()
        )));
    }
    if let Some(d) = &mesh.domain {
        if d != domain {
            return Err(MeshError::Inconsistent(format!("mesh was built for {d:?}, not {domain:?}")));
        }
    }
    Ok(())
}

/// Splits every cell into `2^dim` children. New vertices are placed by the
/// block maps, so boundary vertices land on the curved boundary and
/// interior vertices follow the radial blend.
pub fn refine_uniform(mesh: &Mesh, domain: &PerturbedDomain) -> Result<Mesh, MeshError> {
    check_domain(mesh, domain)?;
    if mesh.degree != 1 {
        return Err(MeshError::Degree(mesh.degree));
    }
    let dim = mesh.dim;
    let layout = BallLayout::new(dim);
    let mut nodes = mesh.nodes.clone();
    let mut created: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut cells = Vec::with_capacity(mesh.n_cells() << dim);
    let mut blocks = mesh.blocks.as_ref().map(|b| Vec::with_capacity(b.len() << dim));
    let mut faces_of: HashMap<usize, Vec<BoundaryFace>> = HashMap::new();
    for f in &mesh.boundary_faces {
        faces_of.entry(f.cell).or_default().push(*f);
    }
    let mut boundary_faces = Vec::with_capacity(mesh.boundary_faces.len() << (dim - 1));

    for c in 0..mesh.n_cells() {
        let corners = mesh.cell_nodes(c);
        let block = mesh.blocks.as_ref().map(|b| b[c]);
        let fine: Vec<usize> = sub_entities(dim, corners)
            .into_iter()
            .map(|(xi, key)| {
                if key.len() == 1 {
                    return key[0];
                }
                *created.entry(key).or_insert_with_key(|key| {
                    let x = match &block {
                        Some(b) => layout.map(domain, b.patch, block_point(b, &xi)),
                        None => mean_of(&nodes, key),
                    };
                    nodes.push(x);
                    nodes.len() - 1
                })
            })
            .collect();

        for child in 0..(1usize << dim) {
            let off: Vec<usize> = (0..dim).map(|a| (child >> a) & 1).collect();
            let cell: Vec<usize> = (0..(1usize << dim))
                .map(|corner| {
                    let mut idx = 0;
                    for a in 0..dim {
                        idx += (off[a] + ((corner >> a) & 1)) * 3usize.pow(a as u32);
                    }
                    fine[idx]
                })
                .collect();
            let child_id = cells.len();
            cells.push(cell);
            if let (Some(blocks), Some(b)) = (blocks.as_mut(), &block) {
                let mut lo = b.lo;
                let mut hi = b.hi;
                for a in 0..dim {
                    let mid = 0.5 * (b.lo[a] + b.hi[a]);
                    if off[a] == 0 {
                        hi[a] = mid;
                    } else {
                        lo[a] = mid;
                    }
                }
                blocks.push(Block { patch: b.patch, lo, hi });
            }
            for f in faces_of.get(&c).into_iter().flatten() {
                let (axis, side) = (f.local_face / 2, f.local_face % 2);
                if off[axis] == side {
                    boundary_faces.push(BoundaryFace { cell: child_id, ..*f });
                }
            }
        }
    }

    let mut out = Mesh::from_parts(dim, 1, nodes, cells, boundary_faces)?;
    out.level = mesh.level + 1;
    out.blocks = blocks;
    out.domain = mesh.domain;
    out.check_jacobians()?;
    Ok(out)
}

/// Raises the geometry degree of a linear mesh to `r`.
///
/// For `r = 2` every edge, face and cell gains a mid-node, placed by the
/// block map at the averaged block parameter. Boundary mid-nodes thus lie
/// on the curved boundary and the cell maps interpolate the block maps.
/// Meshes without a block description get straight mid-nodes (arithmetic
/// means of the entity's vertices).
pub fn elevate_to_isoparametric(mesh: &Mesh, domain: &PerturbedDomain, r: usize) -> Result<Mesh, MeshError> {
    check_domain(mesh, domain)?;
    if mesh.degree != 1 {
        return Err(MeshError::Degree(mesh.degree));
    }
    match r {
        1 => return Ok(mesh.clone()),
        2 => {}
        _ => return Err(MeshError::Degree(r)),
    }
    let dim = mesh.dim;
    let layout = BallLayout::new(dim);

    let mut nodes = mesh.nodes.clone();
    let mut created: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut cells = Vec::with_capacity(mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let block = mesh.blocks.as_ref().map(|b| b[c]);
        let cell: Vec<usize> = sub_entities(dim, mesh.cell_nodes(c))
            .into_iter()
            .map(|(xi, key)| {
                if key.len() == 1 {
                    return key[0];
                }
                *created.entry(key).or_insert_with_key(|key| {
                    let x = match &block {
                        Some(b) => layout.map(domain, b.patch, block_point(b, &xi)),
                        None => mean_of(&nodes, key),
                    };
                    nodes.push(x);
                    nodes.len() - 1
                })
            })
            .collect();
        cells.push(cell);
    }

    let mut out = Mesh::from_parts(dim, 2, nodes, cells, mesh.boundary_faces.clone())?;
    out.level = mesh.level;
    out.blocks = mesh.blocks.clone();
    out.domain = mesh.domain;
    out.h_max = mesh.h_max;
    out.check_jacobians()?;
    Ok(out)
}

/// Coarse mesh, `level` uniform refinements, then elevation to `degree`.
pub fn build_mesh(domain: &PerturbedDomain, level: usize, degree: usize) -> Result<Mesh, MeshError> {
    let mut mesh = coarse_mesh(domain);
    mesh.check_jacobians()?;
    for _ in 0..level {
        mesh = refine_uniform(&mesh, domain)?;
    }
    elevate_to_isoparametric(&mesh, domain, degree)
}
