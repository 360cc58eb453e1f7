//! JSON wire encodings for dense complex matrices: a matrix is an array of
//! rows, each entry a `[re, im]` pair (row-major order).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Row-major nested representation used at JSON boundaries.
pub type WireMatrix = Vec<Vec<(f64, f64)>>;

pub fn matrix_to_wire(m: &CMat) -> WireMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| (m[(i, j)].re, m[(i, j)].im))
                .collect()
        })
        .collect()
}

pub fn matrix_from_wire(rows: &WireMatrix) -> Result<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::validation(
            "matrix_from_wire: ragged rows in matrix data",
        ));
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| {
        Complex64::new(rows[i][j].0, rows[i][j].1)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frob};

    #[test]
    fn matrix_round_trips_through_json() {
        let m = CMat::from_row_slice(
            2,
            3,
            &[
                c(1.0, -2.0),
                c(0.0, 0.5),
                c(3.0, 0.0),
                c(-1.5, 1.5),
                c(2.0, 2.0),
                c(0.0, -4.0),
            ],
        );
        let json = serde_json::to_string(&matrix_to_wire(&m)).unwrap();
        assert_eq!(
            json,
            "[[[1.0,-2.0],[0.0,0.5],[3.0,0.0]],[[-1.5,1.5],[2.0,2.0],[0.0,-4.0]]]"
        );
        let wire: WireMatrix = serde_json::from_str(&json).unwrap();
        let back = matrix_from_wire(&wire).unwrap();
        assert!(frob(&(m - back)) == 0.0);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let wire: WireMatrix = vec![vec![(1.0, 0.0)], vec![(1.0, 0.0), (2.0, 0.0)]];
        assert!(matrix_from_wire(&wire).is_err());
    }
}
