//! Exact Gaussian elimination over a finite field.

use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("ragged matrix: row {row} has {got} entries, expected {expected}")]
    RaggedMatrix {
        row: usize,
        got: usize,
        expected: usize,
    },
}

/// Rank of a rectangular matrix by row reduction with exact field arithmetic.
/// The zero matrix (and the empty matrix) has rank 0.
pub fn matrix_rank(field: &FieldSpec, rows: &[Vec<FieldElement>]) -> Result<usize, LinalgError> {
    if rows.is_empty() {
        return Ok(0);
    }
    let ncols = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(LinalgError::RaggedMatrix {
                row: i,
                got: r.len(),
                expected: ncols,
            });
        }
    }
    let mut m: Vec<Vec<FieldElement>> = rows.to_vec();
    let mut rank = 0usize;
    for col in 0..ncols {
        // find a pivot at or below `rank`
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = field
            .inv(m[rank][col])
            .expect("pivot is nonzero by construction");
        for c in col..ncols {
            m[rank][c] = field.mul(m[rank][c], inv);
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col];
                for c in col..ncols {
                    let sub = field.mul(factor, m[rank][c]);
                    m[r][c] = field.sub(m[r][c], sub);
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    Ok(rank)
}
