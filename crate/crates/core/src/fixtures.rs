//! Ready-made complexes used by tests, examples and the command line.

use crate::complex::{ComplexSpec, Gluing, Side};

/// A single triangle.
pub fn single_face() -> ComplexSpec {
    ComplexSpec::new(1, Vec::new())
}

/// An `n`-flower: face `j` has corners (centre, petal `j`, petal `j+1`).
pub fn flower(n: usize) -> ComplexSpec {
    assert!(n >= 3);
    let tris: Vec<[usize; 3]> = (0..n).map(|j| [0, j + 1, (j + 1) % n + 1]).collect();
    ComplexSpec::from_triangles(&tris)
}

/// The 3-flower closed by an outer face, which is face 3 with corners at
/// petals 1, 3, 2.
pub fn tetrahedron() -> ComplexSpec {
    ComplexSpec::from_triangles(&[[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]])
}

/// Double pyramid over an `n`-gon; `n = 4` is the octahedron.
pub fn bipyramid(n: usize) -> ComplexSpec {
    assert!(n >= 3);
    let (top, bottom) = (0, n + 1);
    let ring = |j: usize| j % n + 1;
    let mut tris = Vec::new();
    for j in 0..n {
        tris.push([top, ring(j), ring(j + 1)]);
    }
    for j in 0..n {
        tris.push([bottom, ring(j + 1), ring(j)]);
    }
    ComplexSpec::from_triangles(&tris)
}

pub fn octahedron() -> ComplexSpec {
    bipyramid(4)
}

pub fn icosahedron() -> ComplexSpec {
    ComplexSpec::from_triangles(&[
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ])
}

/// Torus from an `a` by `b` grid of squares, each split along its rising
/// diagonal. Square `(i, j)` with corners A (bottom left), B, C, D
/// (anticlockwise) gives face `2(i + a j)` = (A, B, C) and face
/// `2(i + a j) + 1` = (A, C, D). The 1 by 1 grid is the standard two-face
/// torus with a single vertex.
pub fn torus_grid(a: usize, b: usize) -> ComplexSpec {
    assert!(a >= 1 && b >= 1);
    let lower = |i: usize, j: usize| 2 * (i % a + a * (j % b));
    let upper = |i: usize, j: usize| lower(i, j) + 1;
    let mut gluings = Vec::new();
    for j in 0..b {
        for i in 0..a {
            gluings.push(Gluing::new(Side::new(lower(i, j), 2), Side::new(upper(i, j), 0)));
            gluings.push(Gluing::new(
                Side::new(lower(i, j), 0),
                Side::new(upper(i, j + b - 1), 1),
            ));
            gluings.push(Gluing::new(Side::new(lower(i, j), 1), Side::new(upper(i + 1, j), 2)));
        }
    }
    ComplexSpec::new(2 * a * b, gluings)
}

pub fn standard_torus() -> ComplexSpec {
    torus_grid(1, 1)
}

/// Grid torus (`a, b >= 3`) with the diagonal of square (0, 0) flipped, so
/// that vertex degrees are 5, 6 and 7.
pub fn flipped_torus(a: usize, b: usize) -> ComplexSpec {
    assert!(a >= 3 && b >= 3);
    let v = |i: usize, j: usize| i % a + a * (j % b);
    let mut tris = Vec::new();
    for j in 0..b {
        for i in 0..a {
            let (pa, pb, pc, pd) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            if i == 0 && j == 0 {
                tris.push([pa, pb, pd]);
                tris.push([pb, pc, pd]);
            } else {
                tris.push([pa, pb, pc]);
                tris.push([pa, pc, pd]);
            }
        }
    }
    ComplexSpec::from_triangles(&tris)
}

/// Three faces in a row, sharing one vertex pairwise.
pub fn three_face_strip() -> ComplexSpec {
    ComplexSpec::from_triangles(&[[0, 1, 2], [2, 1, 3], [1, 4, 3]])
}

/// A triangulated annulus with `n` inner and `n` outer vertices.
pub fn annulus(n: usize) -> ComplexSpec {
    let mut tris = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        tris.push([i, n + i, n + j]);
        tris.push([i, n + j, j]);
    }
    ComplexSpec::from_triangles(&tris)
}
