use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Label of the training row nearest to `query` in Euclidean distance.
/// Ties go to the lowest row index.
pub fn knn1_classify(train: &Matrix, labels: &[usize], query: &[f64]) -> Result<usize> {
    if labels.len() != train.rows() {
        return Err(Error::dim(format!(
            "{} labels for {} training rows",
            labels.len(),
            train.rows()
        )));
    }
    if query.len() != train.cols() {
        return Err(Error::dim(format!(
            "query has {} features, training data {}",
            query.len(),
            train.cols()
        )));
    }
    let mut best = (f64::INFINITY, 0);
    for (i, row) in train.row_iter().enumerate() {
        let d2: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 < best.0 {
            best = (d2, i);
        }
    }
    Ok(labels[best.1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        let train = Matrix::from_rows(&[[0.0], [10.0]]).unwrap();
        assert_eq!(knn1_classify(&train, &[0, 1], &[1.0]).unwrap(), 0);

        let train = Matrix::from_rows(&[[9.0], [8.0], [0.0], [7.0], [6.0], [2.0]]).unwrap();
        let labels = [5, 4, 2, 3, 1, 0];
        // rows 2 and 5 are both at distance 1
        assert_eq!(knn1_classify(&train, &labels, &[1.0]).unwrap(), 2);
        assert_eq!(knn1_classify(&train, &labels, &[7.0]).unwrap(), 3);
        assert!(knn1_classify(&train, &labels, &[1.0, 2.0]).is_err());
        assert!(knn1_classify(&train, &labels[..3], &[1.0]).is_err());
    }

    #[test]
    fn agrees_with_all_pairs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(500);
        for _ in 0..500 {
            let n = rng.random_range(1..30);
            let d = rng.random_range(1..5);
            // small integer grid so exact ties actually happen
            let data: Vec<f64> = (0..n * d)
                .map(|_| rng.random_range(-3..=3) as f64)
                .collect();
            let train = Matrix::new(n, d, data).unwrap();
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
            let q: Vec<f64> = (0..d).map(|_| rng.random_range(-3..=3) as f64).collect();
            let dists: Vec<f64> = (0..n)
                .map(|i| {
                    train
                        .row(i)
                        .iter()
                        .zip(&q)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum()
                })
                .collect();
            let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
            let first = dists.iter().position(|&x| x == min).unwrap();
            assert_eq!(knn1_classify(&train, &labels, &q).unwrap(), labels[first]);
        }
    }
}
