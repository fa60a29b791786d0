//! Graph front-end: read a weighted adjacency matrix and turn it into
//! point coordinates by eigendecomposition, so graph nodes can be condensed
//! like any other point cloud.
//!
//! Default embedding: symmetrize the adjacency, take the `d` eigenvectors
//! of largest absolute eigenvalue, fix signs deterministically, and scale
//! each by its (signed) eigenvalue so directions with more spectral weight
//! spread wider. A graph-Laplacian variant is available behind
//! [`EmbeddingBasis::Laplacian`].

use crate::error::{Error, Result};
use crate::io;
use crate::linalg;
use crate::operators::DataMatrix;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Weighted adjacency matrix with optional node names.
#[derive(Debug, Clone)]
pub struct AdjacencyMatrix {
    pub values: Array2<f64>,
    pub node_names: Option<Vec<String>>,
}

impl AdjacencyMatrix {
    pub fn n_nodes(&self) -> usize {
        self.values.nrows()
    }

    /// Largest `|a_ij - a_ji|`; zero for symmetric inputs. Callers may warn
    /// when this is meaningfully positive; the embedding symmetrizes anyway.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.values.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.values[[i, j]] - self.values[[j, i]]).abs());
            }
        }
        worst
    }
}

/// Which matrix gets eigendecomposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingBasis {
    /// Symmetrized adjacency; top-`d` eigenvectors by absolute eigenvalue,
    /// scaled by their eigenvalues.
    Adjacency,
    /// Graph Laplacian `L = D - W`; the `d` eigenvectors of smallest
    /// eigenvalue after dropping the constant direction, unscaled.
    Laplacian,
}

fn validate_adjacency(adj: &AdjacencyMatrix) -> Result<()> {
    let n = adj.values.nrows();
    if adj.values.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "adjacency matrix must be square, got {}x{}",
            n,
            adj.values.ncols()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 nodes".into(),
        ));
    }
    for ((i, j), v) in adj.values.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row: i, col: j });
        }
        if *v < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "negative weight {v} at row {}, column {}",
                i + 1,
                j + 1
            )));
        }
    }
    if let Some(names) = &adj.node_names {
        if names.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} node names for {n} nodes",
                names.len()
            )));
        }
    }
    Ok(())
}

/// Flips an eigenvector so its first clearly nonzero entry is positive.
fn canonical_sign(col: &[f64]) -> f64 {
    let max_abs = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return 1.0;
    }
    for v in col {
        if v.abs() > 1e-9 * max_abs {
            return if *v < 0.0 { -1.0 } else { 1.0 };
        }
    }
    1.0
}

/// Spectral embedding with the default (adjacency) basis.
pub fn spectral_coordinates(adj: &AdjacencyMatrix, d: usize) -> Result<DataMatrix> {
    spectral_coordinates_with(adj, d, EmbeddingBasis::Adjacency)
}

/// Spectral embedding of graph nodes into `d` coordinates.
pub fn spectral_coordinates_with(
    adj: &AdjacencyMatrix,
    d: usize,
    basis: EmbeddingBasis,
) -> Result<DataMatrix> {
    validate_adjacency(adj)?;
    let n = adj.values.nrows();
    if d < 1 || d >= n {
        return Err(Error::InvalidParameter(format!(
            "embedding dimension must satisfy 1 <= d < {n}, got {d}"
        )));
    }
    let sym = 0.5 * (&adj.values + &adj.values.t());

    match basis {
        EmbeddingBasis::Adjacency => {
            let (vals, vecs) = linalg::symmetric_eigen(&sym);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| {
                vals[b]
                    .abs()
                    .partial_cmp(&vals[a].abs())
                    .unwrap()
                    .then(vals[b].partial_cmp(&vals[a]).unwrap())
                    .then(a.cmp(&b))
            });
            let picked: Vec<(f64, usize)> = idx[..d].iter().map(|&j| (vals[j], j)).collect();
            if picked.iter().all(|(v, _)| v.abs() <= f64::MIN_POSITIVE) {
                return Err(Error::Degenerate(
                    "adjacency matrix has no nonzero eigenvalues to embed with".into(),
                ));
            }
            Ok(assemble(&vecs, &picked, true))
        }
        EmbeddingBasis::Laplacian => {
            let mut lap = -sym.clone();
            for i in 0..n {
                let degree: f64 = sym.row(i).sum();
                lap[[i, i]] += degree;
            }
            let (vals, vecs) = linalg::symmetric_eigen(&lap);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap().then(a.cmp(&b)));
            // skip the constant direction at eigenvalue 0
            let picked: Vec<(f64, usize)> = idx[1..=d].iter().map(|&j| (vals[j], j)).collect();
            Ok(assemble(&vecs, &picked, false))
        }
    }
}

fn assemble(vecs: &Array2<f64>, picked: &[(f64, usize)], scale: bool) -> DataMatrix {
    let n = vecs.nrows();
    let mut out = Array2::zeros((n, picked.len()));
    for (c, &(val, j)) in picked.iter().enumerate() {
        let col: Vec<f64> = (0..n).map(|i| vecs[[i, j]]).collect();
        let sign = canonical_sign(&col);
        let factor = if scale { val * sign } else { sign };
        for i in 0..n {
            out[[i, c]] = factor * col[i];
        }
    }
    out
}

/// Reads an adjacency CSV. A non-numeric first row is taken as a name
/// header; a non-numeric first column as a name column (they must agree
/// with the matrix size). The numeric part must be square.
pub fn load_adjacency(path: &Path) -> Result<AdjacencyMatrix> {
    let cells = io::read_cells(path)?;
    if cells.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "empty adjacency file {}",
            path.display()
        )));
    }
    let numeric = |s: &str| s.parse::<f64>().is_ok();
    let header = !cells[0].iter().all(|c| numeric(c));
    let start = usize::from(header);
    if cells.len() <= start {
        return Err(Error::InvalidParameter("no data rows".into()));
    }
    let name_col = !numeric(&cells[start][0]);

    let mut col_names = Vec::new();
    let mut rows = Vec::with_capacity(cells.len() - start);
    for row in &cells[start..] {
        if name_col {
            if row.is_empty() {
                return Err(Error::InvalidParameter("empty row".into()));
            }
            col_names.push(row[0].clone());
            rows.push(row[1..].to_vec());
        } else {
            rows.push(row.clone());
        }
    }
    let values = io::parse_matrix(&rows, start + 1)?;
    if values.nrows() != values.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "adjacency matrix must be square, got {}x{}",
            values.nrows(),
            values.ncols()
        )));
    }
    let node_names = if name_col {
        Some(col_names)
    } else if header {
        let mut h = cells[0].clone();
        // drop the corner cell of a "names x names" layout
        if h.len() == values.ncols() + 1 {
            h.remove(0);
        }
        Some(h)
    } else {
        None
    };
    let adj = AdjacencyMatrix { values, node_names };
    validate_adjacency(&adj)?;
    Ok(adj)
}

/// Writes an adjacency matrix (optional names as a header row) so that
/// [`load_adjacency`] reads it back exactly.
pub fn write_adjacency(adj: &AdjacencyMatrix, path: &Path) -> Result<()> {
    let header: Option<Vec<String>> = adj.node_names.clone();
    io::write_matrix(path, &adj.values.view(), header.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn two_cliques(k: usize) -> AdjacencyMatrix {
        let n = 2 * k;
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let same_block = (i < k) == (j < k);
                if i != j && same_block {
                    a[[i, j]] = 1.0;
                }
            }
        }
        AdjacencyMatrix {
            values: a,
            node_names: None,
        }
    }

    fn random_adjacency(n: usize, seed: u64) -> AdjacencyMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let w = rng.random::<f64>();
                a[[i, j]] = w;
                a[[j, i]] = w;
            }
        }
        AdjacencyMatrix {
            values: a,
            node_names: None,
        }
    }

    #[test]
    fn cliques_separate_in_two_coordinates() {
        let adj = two_cliques(5);
        let coords = spectral_coordinates(&adj, 2).unwrap();
        // everyone in a clique gets the same coordinates; the two cliques
        // get different ones
        for i in 1..5 {
            for c in 0..2 {
                assert!((coords[[i, c]] - coords[[0, c]]).abs() < 1e-8);
                assert!((coords[[5 + i, c]] - coords[[5, c]]).abs() < 1e-8);
            }
        }
        let dx = coords[[0, 0]] - coords[[5, 0]];
        let dy = coords[[0, 1]] - coords[[5, 1]];
        assert!((dx * dx + dy * dy).sqrt() > 1e-3);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let adj = AdjacencyMatrix {
            values: Array2::zeros((4, 4)),
            node_names: None,
        };
        assert!(matches!(
            spectral_coordinates(&adj, 2),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn coordinates_satisfy_the_eigen_relation() {
        let adj = random_adjacency(12, 5);
        let sym = 0.5 * (&adj.values + &adj.values.t());
        let coords = spectral_coordinates(&adj, 4).unwrap();
        // each scaled column c still satisfies S c = lambda c; recover
        // lambda by a Rayleigh quotient and check the residual
        for c in 0..4 {
            let col = coords.column(c).to_owned();
            let sc = sym.dot(&col);
            let lambda = col.dot(&sc) / col.dot(&col);
            for i in 0..12 {
                assert!(
                    (sc[i] - lambda * col[i]).abs() < 1e-8,
                    "residual at ({i}, {c})"
                );
            }
        }
    }

    #[test]
    fn embedding_is_stable_under_node_reordering() {
        let n = 10;
        let adj = random_adjacency(n, 8);
        let coords = spectral_coordinates(&adj, 3).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut pv = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                pv[[i, j]] = adj.values[[perm[i], perm[j]]];
            }
        }
        let permuted = AdjacencyMatrix {
            values: pv,
            node_names: None,
        };
        let pcoords = spectral_coordinates(&permuted, 3).unwrap();
        // the sign convention reads entries in node order, so a column may
        // come back globally reflected; geometry is unchanged either way.
        // resolve each column's sign at its largest entry, then compare.
        for c in 0..3 {
            let anchor = (0..n)
                .max_by(|&a, &b| {
                    coords[[perm[a], c]]
                        .abs()
                        .partial_cmp(&coords[[perm[b], c]].abs())
                        .unwrap()
                })
                .unwrap();
            let s = if pcoords[[anchor, c]] * coords[[perm[anchor], c]] < 0.0 {
                -1.0
            } else {
                1.0
            };
            for i in 0..n {
                assert!(
                    (pcoords[[i, c]] - s * coords[[perm[i], c]]).abs() < 1e-8,
                    "row {i} coordinate {c}"
                );
            }
        }
    }

    #[test]
    fn embedding_dimension_bounds() {
        let adj = random_adjacency(6, 1);
        assert!(spectral_coordinates(&adj, 0).is_err());
        assert!(spectral_coordinates(&adj, 6).is_err());
        assert!(spectral_coordinates(&adj, 5).is_ok());
    }

    #[test]
    fn laplacian_variant_differs_and_satisfies_its_relation() {
        let adj = random_adjacency(10, 33);
        let a = spectral_coordinates_with(&adj, 3, EmbeddingBasis::Adjacency).unwrap();
        let l = spectral_coordinates_with(&adj, 3, EmbeddingBasis::Laplacian).unwrap();
        assert!(a.iter().zip(l.iter()).any(|(x, y)| (x - y).abs() > 1e-9));

        let sym = 0.5 * (&adj.values + &adj.values.t());
        let mut lap = -sym.clone();
        for i in 0..10 {
            lap[[i, i]] += sym.row(i).sum();
        }
        for c in 0..3 {
            let col = l.column(c).to_owned();
            let lc = lap.dot(&col);
            let lambda = col.dot(&lc) / col.dot(&col);
            for i in 0..10 {
                assert!((lc[i] - lambda * col[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn loads_plain_named_and_name_column_files() {
        let dir = tempfile::tempdir().unwrap();

        let plain = dir.path().join("plain.csv");
        std::fs::write(&plain, "0,1,0\n1,0,2\n0,2,0\n").unwrap();
        let adj = load_adjacency(&plain).unwrap();
        assert_eq!(adj.n_nodes(), 3);
        assert!(adj.node_names.is_none());
        assert_eq!(adj.values[[1, 2]], 2.0);

        let named = dir.path().join("named.csv");
        std::fs::write(&named, "a,b\n0,1\n1,0\n").unwrap();
        let adj = load_adjacency(&named).unwrap();
        assert_eq!(adj.node_names, Some(vec!["a".into(), "b".into()]));

        let name_col = dir.path().join("name_col.csv");
        std::fs::write(&name_col, "node,a,b\na,0,1\nb,1,0\n").unwrap();
        let adj = load_adjacency(&name_col).unwrap();
        assert_eq!(adj.node_names, Some(vec!["a".into(), "b".into()]));
        assert_eq!(adj.values[[0, 1]], 1.0);
    }

    #[test]
    fn rejects_non_square_and_negative() {
        let dir = tempfile::tempdir().unwrap();
        let rect = dir.path().join("rect.csv");
        std::fs::write(&rect, "0,1,2\n1,0,3\n").unwrap();
        assert!(load_adjacency(&rect).is_err());

        let neg = dir.path().join("neg.csv");
        std::fs::write(&neg, "0,-1\n-1,0\n").unwrap();
        assert!(load_adjacency(&neg).is_err());
    }

    #[test]
    fn asymmetry_is_measurable() {
        let adj = AdjacencyMatrix {
            values: array![[0.0, 1.0], [3.0, 0.0]],
            node_names: None,
        };
        assert_eq!(adj.max_asymmetry(), 2.0);
    }

    #[test]
    fn adjacency_round_trip_is_exact() {
        let mut adj = random_adjacency(5, 21);
        adj.node_names = Some(vec!["n0", "n1", "n2", "n3", "n4"].into_iter().map(String::from).collect());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("adj.csv");
        write_adjacency(&adj, &path).unwrap();
        let back = load_adjacency(&path).unwrap();
        assert_eq!(back.node_names, adj.node_names);
        for (a, b) in adj.values.iter().zip(back.values.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
