use super::field::PrimeField;
use super::matrix::FMatrix;
use crate::error::{Error, Result};

/// A row space stored by its canonical reduced row-echelon basis, so equal
/// subspaces compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: FMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: FMatrix::zeros(0, ambient_dim),
        }
    }

    /// Row space of `m`.
    pub fn row_space(field: &PrimeField, m: &FMatrix) -> Self {
        Subspace {
            ambient_dim: m.cols(),
            basis: m.rref(field).matrix,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &FMatrix {
        &self.basis
    }

    pub fn contains(&self, field: &PrimeField, v: &[u64]) -> Result<bool> {
        Ok(super::matrix::solve_left(field, v, &self.basis)?.is_some())
    }

    pub fn sum(&self, field: &PrimeField, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        Ok(Subspace::row_space(
            field,
            &self.basis.vstack(&other.basis)?,
        ))
    }

    /// Zassenhaus intersection: row-reduce `[[A, A], [B, 0]]`; rows whose left
    /// half vanishes span A ∩ B in their right half.
    pub fn intersect(&self, field: &PrimeField, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let n = self.ambient_dim;
        let top = self.basis.hstack(&self.basis)?;
        let bottom = other.basis.hstack(&FMatrix::zeros(other.dim(), n))?;
        let red = top.vstack(&bottom)?.rref(field);
        let mut inter = FMatrix::zeros(0, n);
        for r in 0..red.rank {
            let row = red.matrix.row(r);
            if row[..n].iter().all(|&x| x == 0) {
                inter.push_row(&row[n..]);
            }
        }
        Ok(Subspace::row_space(field, &inter))
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::input(format!(
                "subspaces live in dimensions {} and {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        Ok(())
    }
}

/// Left fold of pairwise intersections; `None` for an empty list.
pub fn intersect_all(field: &PrimeField, spaces: &[Subspace]) -> Result<Option<Subspace>> {
    let Some((first, rest)) = spaces.split_first() else {
        return Ok(None);
    };
    rest.iter()
        .try_fold(first.clone(), |acc, s| acc.intersect(field, s))
        .map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn span(field: &PrimeField, rows: &[&[u64]], n: usize) -> Subspace {
        let rows: Vec<Vec<u64>> = rows.iter().map(|r| r.to_vec()).collect();
        Subspace::row_space(
            field,
            &FMatrix::from_rows_with_cols(field, &rows, n).unwrap(),
        )
    }

    #[test]
    fn coordinate_axes_meet_in_zero() {
        let f5 = PrimeField::new(5).unwrap();
        let a = span(&f5, &[&[1, 0]], 2);
        let b = span(&f5, &[&[0, 1]], 2);
        assert_eq!(a.intersect(&f5, &b).unwrap(), Subspace::zero(2));
    }

    #[test]
    fn plane_meets_diagonal() {
        let f5 = PrimeField::new(5).unwrap();
        let a = span(&f5, &[&[1, 0], &[0, 1]], 2);
        let b = span(&f5, &[&[1, 1]], 2);
        let i = a.intersect(&f5, &b).unwrap();
        assert_eq!(i.dim(), 1);
        assert_eq!(i, b);
    }

    #[test]
    fn intersection_in_three_dims_by_enumeration() {
        let f5 = PrimeField::new(5).unwrap();
        let a = span(&f5, &[&[1, 2, 0], &[0, 0, 1]], 3);
        let b = span(&f5, &[&[2, 4, 1]], 3);
        // Oracle: enumerate every multiple of (2,4,1) and test membership in a.
        let members = (0..5u64)
            .filter(|&c| {
                let v = [2 * c % 5, 4 * c % 5, c];
                a.contains(&f5, &v).unwrap()
            })
            .count();
        assert_eq!(members, 5); // all p^1 multiples lie in a
        assert_eq!(a.intersect(&f5, &b).unwrap().dim(), 1);
    }

    #[test]
    fn ambient_mismatch_is_an_error() {
        let f5 = PrimeField::new(5).unwrap();
        assert!(Subspace::zero(2)
            .intersect(&f5, &Subspace::zero(3))
            .is_err());
    }

    #[test]
    fn fold_over_several_spaces() {
        let f7 = PrimeField::new(7).unwrap();
        let a = span(&f7, &[&[1, 0, 0], &[0, 1, 0]], 3);
        let b = span(&f7, &[&[0, 1, 0], &[0, 0, 1]], 3);
        let c = span(&f7, &[&[0, 1, 1], &[1, 1, 0]], 3);
        let i = intersect_all(&f7, &[a, b, c]).unwrap().unwrap();
        assert_eq!(i.dim(), 0);
        assert!(intersect_all(&f7, &[]).unwrap().is_none());
    }

    fn arb_pair() -> impl Strategy<Value = (u64, usize, Vec<Vec<u64>>, Vec<Vec<u64>>)> {
        (
            prop::sample::select(vec![2u64, 3, 5]),
            1usize..5,
            0usize..5,
            0usize..5,
        )
            .prop_flat_map(|(p, n, ra, rb)| {
                (
                    Just(p),
                    Just(n),
                    prop::collection::vec(prop::collection::vec(0..p, n), ra),
                    prop::collection::vec(prop::collection::vec(0..p, n), rb),
                )
            })
    }

    proptest! {
        #[test]
        fn dimension_formula((p, n, ra, rb) in arb_pair()) {
            let field = PrimeField::new(p).unwrap();
            let a = Subspace::row_space(&field, &FMatrix::from_rows_with_cols(&field, &ra, n).unwrap());
            let b = Subspace::row_space(&field, &FMatrix::from_rows_with_cols(&field, &rb, n).unwrap());
            let inter = a.intersect(&field, &b).unwrap();
            let sum = a.sum(&field, &b).unwrap();
            prop_assert_eq!(a.dim() + b.dim(), inter.dim() + sum.dim());
            for r in 0..inter.dim() {
                prop_assert!(a.contains(&field, inter.basis().row(r)).unwrap());
                prop_assert!(b.contains(&field, inter.basis().row(r)).unwrap());
            }
            prop_assert_eq!(inter.clone(), b.intersect(&field, &a).unwrap());
        }
    }
}
