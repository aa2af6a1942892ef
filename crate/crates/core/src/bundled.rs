//! Example matrices shipped with the library, each with its pinned characteristic polynomial.

use crate::spectra::TransitionMatrix;

#[derive(Debug, Clone)]
pub struct BundledMatrix {
    pub name: &'static str,
    pub rows: Vec<Vec<u8>>,
    /// Characteristic polynomial, leading coefficient first.
    pub char_poly: &'static [i64],
    /// Symbol `j` (0-based) with `j → j` and `j` its own first successor, used as chart base.
    pub fixed_symbol: usize,
}

impl BundledMatrix {
    pub fn matrix(&self) -> TransitionMatrix {
        TransitionMatrix::new(self.rows.clone()).expect("bundled matrices are primitive")
    }
}

/// The golden-mean shift.
pub fn golden() -> BundledMatrix {
    BundledMatrix {
        name: "golden",
        rows: vec![vec![1, 1], vec![1, 0]],
        char_poly: &[1, -1, -1],
        fixed_symbol: 0,
    }
}

/// Dominant eigenvalue 2 and a conjugate pair on the unit circle.
pub fn central3() -> BundledMatrix {
    BundledMatrix {
        name: "central3",
        rows: vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]],
        char_poly: &[1, -3, 3, -2],
        fixed_symbol: 0,
    }
}

/// Two unstable eigenvalues: 1+√2 and −(1+√5)/2, plus 1−√2, (√5−1)/2 and 0.
/// Characteristic polynomial (x² − 2x − 1)(x² + x − 1)x.
pub fn split5() -> BundledMatrix {
    BundledMatrix {
        name: "split5",
        rows: vec![
            vec![1, 0, 1, 1, 1],
            vec![0, 0, 1, 1, 0],
            vec![1, 1, 0, 0, 0],
            vec![1, 0, 0, 0, 0],
            vec![1, 0, 0, 0, 0],
        ],
        char_poly: &[1, -1, -4, 1, 1, 0],
        fixed_symbol: 0,
    }
}

pub fn all() -> Vec<BundledMatrix> {
    vec![golden(), central3(), split5()]
}

pub fn by_name(name: &str) -> Option<BundledMatrix> {
    all().into_iter().find(|b| b.name == name)
}
