//! Graph convolution `σ(Â_norm · H · W)` with `Â_norm = D̂^{-1/2}(A + I)D̂^{-1/2}`
//! and σ = ReLU.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Symmetric normalization of `A + I` for an undirected edge list.
///
/// Each pair may be listed once in either orientation or in both; a pair is
/// an edge if it appears at all. Self-edges are rejected because the
/// self-loop is added here.
pub fn normalize_adjacency(edges: &[(usize, usize)], n: usize) -> Result<Matrix> {
    let mut a = Matrix::identity(n);
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::structural(format!(
                "edge ({u}, {v}) out of range for {n} nodes"
            )));
        }
        if u == v {
            return Err(Error::structural(format!("self-edge at node {u}")));
        }
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| 1.0 / a.row(i).iter().sum::<f64>().sqrt())
        .collect();
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            if v != 0.0 {
                a[(i, j)] = v * inv_sqrt_deg[i] * inv_sqrt_deg[j];
            }
        }
    }
    Ok(a)
}

fn check_shapes(h: &Matrix, a_norm: &Matrix, w: &Matrix) -> Result<()> {
    let n = h.rows();
    if a_norm.shape() != (n, n) {
        return Err(Error::structural(format!(
            "adjacency {:?} does not match {n} nodes",
            a_norm.shape()
        )));
    }
    if w.rows() != h.cols() {
        return Err(Error::structural(format!(
            "weight {:?} does not accept {}-dim features",
            w.shape(),
            h.cols()
        )));
    }
    Ok(())
}

/// Intermediates kept for the backward pass.
#[derive(Clone, Debug)]
pub struct GcnCache {
    /// `Â_norm · H`
    pub aggregated: Matrix,
    /// Layer output after ReLU.
    pub output: Matrix,
}

pub fn gcn_forward(h: &Matrix, a_norm: &Matrix, w: &Matrix) -> Result<Matrix> {
    Ok(gcn_forward_cached(h, a_norm, w)?.output)
}

pub fn gcn_forward_cached(h: &Matrix, a_norm: &Matrix, w: &Matrix) -> Result<GcnCache> {
    check_shapes(h, a_norm, w)?;
    let aggregated = a_norm.matmul(h)?;
    let output = aggregated.matmul(w)?.map(|v| v.max(0.0));
    Ok(GcnCache { aggregated, output })
}

/// Given `d_out = ∂L/∂output`, accumulates `∂L/∂W` into `dw` and returns
/// `∂L/∂H` when `want_dh` is set.
pub fn gcn_backward(
    cache: &GcnCache,
    a_norm: &Matrix,
    w: &Matrix,
    d_out: &Matrix,
    dw: &mut Matrix,
    want_dh: bool,
) -> Result<Option<Matrix>> {
    if d_out.shape() != cache.output.shape() {
        return Err(Error::structural("gcn_backward: gradient shape mismatch"));
    }
    // ReLU mask: output > 0 exactly where the pre-activation is positive.
    let mut d_pre = d_out.clone();
    for (g, &o) in d_pre.as_mut_slice().iter_mut().zip(cache.output.as_slice()) {
        if o <= 0.0 {
            *g = 0.0;
        }
    }
    dw.add_assign(&cache.aggregated.t_matmul(&d_pre)?)?;
    if !want_dh {
        return Ok(None);
    }
    // ∂L/∂H = Â_normᵀ · d_pre · Wᵀ, and Â_norm is symmetric.
    let d_agg = d_pre.matmul_t(w)?;
    Ok(Some(a_norm.t_matmul(&d_agg)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_is_identity() {
        assert_eq!(normalize_adjacency(&[], 1).unwrap(), Matrix::identity(1));
    }

    #[test]
    fn two_node_edge() {
        let a = normalize_adjacency(&[(0, 1)], 2).unwrap();
        assert!(a.as_slice().iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn duplicate_orientation_is_one_edge() {
        let a = normalize_adjacency(&[(0, 1), (1, 0)], 2).unwrap();
        assert!(a.as_slice().iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn bad_edges_rejected() {
        assert!(matches!(normalize_adjacency(&[(0, 2)], 2), Err(Error::Structural(_))));
        assert!(matches!(normalize_adjacency(&[(1, 1)], 2), Err(Error::Structural(_))));
    }

    #[test]
    fn isolated_node_passes_through() {
        let h = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let a = normalize_adjacency(&[], 1).unwrap();
        let out = gcn_forward(&h, &a, &Matrix::identity(2)).unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn zero_features_give_zero() {
        let h = Matrix::zeros(3, 2);
        let a = normalize_adjacency(&[(0, 1), (1, 2)], 3).unwrap();
        let w = Matrix::from_rows(&[vec![1.0, -2.0, 3.0], vec![0.5, 0.5, -1.0]]).unwrap();
        assert_eq!(gcn_forward(&h, &a, &w).unwrap(), Matrix::zeros(3, 3));
    }

    #[test]
    fn shape_mismatch() {
        let h = Matrix::zeros(3, 2);
        let a = Matrix::identity(2);
        assert!(gcn_forward(&h, &a, &Matrix::zeros(2, 2)).is_err());
        let a = Matrix::identity(3);
        assert!(gcn_forward(&h, &a, &Matrix::zeros(3, 2)).is_err());
    }
}
