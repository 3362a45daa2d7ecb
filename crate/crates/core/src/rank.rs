//! Relativity, comparison matrix, row-minimum scores and best-to-worst order.
//!
//! Orientation: `PairwiseMatrix[i][j]` holds the membership of route `j`
//! evaluated with respect to route `i`. The comparison entry for row `i`,
//! column `j` is then `p[j][i] / max(p[j][i], p[i][j])`, the degree to which
//! route `i` is preferred over route `j`.

use std::fmt;

use crate::error::{Error, Result};

/// Identifier of a candidate route.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RouteId(String);

impl RouteId {
    pub fn new(id: impl Into<String>) -> Self {
        RouteId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `r1`, `r2`, ... `rn`.
    pub fn default_ids(n: usize) -> Vec<RouteId> {
        (1..=n).map(|k| RouteId(format!("r{k}"))).collect()
    }
}

impl fmt::Display for RouteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RouteId {
    fn from(s: &str) -> Self {
        RouteId(s.to_owned())
    }
}

impl From<String> for RouteId {
    fn from(s: String) -> Self {
        RouteId(s)
    }
}

/// Square table shared by the pairwise and comparison matrices.
#[derive(Debug, Clone, PartialEq)]
struct Square {
    ids: Vec<RouteId>,
    values: Vec<f64>,
}

impl Square {
    fn from_rows(ids: Vec<RouteId>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::invariant("matrix must have at least one route"));
        }
        if rows.len() != n {
            return Err(Error::invariant(format!(
                "{} route ids but {} rows",
                n,
                rows.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &ids {
            if id.as_str().is_empty() {
                return Err(Error::invariant("empty route id"));
            }
            if !seen.insert(id) {
                return Err(Error::invariant(format!("duplicate route id {id}")));
            }
        }
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::invariant(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    n
                )));
            }
            for (j, v) in row.into_iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invariant(format!(
                        "entry ({}, {}) = {} is outside [0, 1]",
                        i + 1,
                        j + 1,
                        v
                    )));
                }
                if i == j && v != 1.0 {
                    return Err(Error::invariant(format!(
                        "diagonal entry ({}, {}) = {} is not 1",
                        i + 1,
                        j + 1,
                        v
                    )));
                }
                values.push(v);
            }
        }
        Ok(Square { ids, values })
    }

    fn n(&self) -> usize {
        self.ids.len()
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.values[i * n..(i + 1) * n]
    }
}

/// Pairwise membership values between candidate routes.
///
/// Entry `[i][j]` is the membership of route `j` with respect to route `i`.
/// Every entry lies in `[0, 1]` and the diagonal is exactly `1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix(Square);

impl PairwiseMatrix {
    pub fn new(route_ids: Vec<RouteId>, rows: Vec<Vec<f64>>) -> Result<Self> {
        Square::from_rows(route_ids, rows).map(PairwiseMatrix)
    }

    /// Builds a matrix labelled `r1..rn`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(RouteId::default_ids(rows.len()), rows)
    }

    pub fn len(&self) -> usize {
        self.0.n()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn route_ids(&self) -> &[RouteId] {
        &self.0.ids
    }

    /// Same values under different labels.
    pub fn relabel(self, route_ids: Vec<RouteId>) -> Result<Self> {
        let rows = (0..self.len()).map(|i| self.row(i).to_vec()).collect();
        Self::new(route_ids, rows)
    }
}

/// Relativity values `f(a_i | a_j)` for every pair of routes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMatrix(Square);

impl ComparisonMatrix {
    pub fn len(&self) -> usize {
        self.0.n()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn route_ids(&self) -> &[RouteId] {
        &self.0.ids
    }
}

/// Membership value of choosing `a` over `b`: `f_b(a) / max(f_b(a), f_a(b))`.
///
/// `f_ba` is the membership of `a` with respect to `b`, `f_ab` the reverse.
/// Fails with [`Error::DegenerateComparison`] when both are zero.
pub fn relativity(f_ba: f64, f_ab: f64) -> Result<f64> {
    for v in [f_ba, f_ab] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invariant(format!(
                "membership {v} is outside [0, 1]"
            )));
        }
    }
    let larger = f_ba.max(f_ab);
    if larger == 0.0 {
        return Err(Error::DegenerateComparison { pair: None });
    }
    Ok(f_ba / larger)
}

pub fn comparison_matrix(p: &PairwiseMatrix) -> Result<ComparisonMatrix> {
    let n = p.len();
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let r = relativity(p.get(j, i), p.get(i, j)).map_err(|e| match e {
                Error::DegenerateComparison { .. } => {
                    Error::DegenerateComparison { pair: Some((i, j)) }
                }
                other => other,
            })?;
            values.push(r);
        }
    }
    Ok(ComparisonMatrix(Square {
        ids: p.route_ids().to_vec(),
        values,
    }))
}

/// Smallest entry of each comparison row: the ranking value of each route.
pub fn row_minima(c: &ComparisonMatrix) -> Vec<f64> {
    (0..c.len())
        .map(|i| c.row(i).iter().copied().fold(f64::INFINITY, f64::min))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedRoute {
    pub id: RouteId,
    /// Position of the route in the input matrix.
    pub index: usize,
    pub score: f64,
}

/// Routes ordered best to worst by score; equal scores keep input order.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteRanking {
    entries: Vec<RankedRoute>,
}

impl RouteRanking {
    /// Orders `(id, score)` pairs by score descending, ties by position.
    pub fn from_scores(ids: &[RouteId], scores: &[f64]) -> Self {
        assert_eq!(ids.len(), scores.len(), "ids and scores must align");
        let mut entries: Vec<RankedRoute> = ids
            .iter()
            .zip(scores)
            .enumerate()
            .map(|(index, (id, &score))| RankedRoute {
                id: id.clone(),
                index,
                score,
            })
            .collect();
        // stable: equal scores stay in index order
        entries.sort_by(|a, b| b.score.total_cmp(&a.score));
        RouteRanking { entries }
    }

    pub fn entries(&self) -> &[RankedRoute] {
        &self.entries
    }

    pub fn best(&self) -> &RankedRoute {
        &self.entries[0]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<&RouteId> {
        self.entries.iter().map(|e| &e.id).collect()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }
}

/// Full pipeline: comparison matrix, row minima, best-to-worst order.
pub fn rank(p: &PairwiseMatrix) -> Result<RouteRanking> {
    let c = comparison_matrix(p)?;
    let minima = row_minima(&c);
    Ok(RouteRanking::from_scores(p.route_ids(), &minima))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relativity_examples() {
        assert!((relativity(0.5, 0.7).unwrap() - 0.714_285_714_285_714_3).abs() < 1e-15);
        assert!((relativity(0.3, 0.8).unwrap() - 0.375).abs() < 1e-15);
        for x in [0.01, 0.3, 1.0] {
            assert_eq!(relativity(x, x).unwrap(), 1.0);
        }
        assert_eq!(relativity(0.0, 0.4).unwrap(), 0.0);
        assert_eq!(relativity(0.4, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn relativity_degenerate() {
        assert_eq!(
            relativity(0.0, 0.0),
            Err(Error::DegenerateComparison { pair: None })
        );
        assert!(matches!(
            relativity(1.5, 0.2),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn degenerate_pair_is_located() {
        let p = PairwiseMatrix::from_rows(vec![
            vec![1.0, 0.5, 0.0],
            vec![0.5, 1.0, 0.2],
            vec![0.0, 0.3, 1.0],
        ])
        .unwrap();
        assert_eq!(
            comparison_matrix(&p),
            Err(Error::DegenerateComparison { pair: Some((0, 2)) })
        );
        assert!(rank(&p).is_err());
    }

    #[test]
    fn all_ones() {
        let p = PairwiseMatrix::from_rows(vec![vec![1.0; 4]; 4]).unwrap();
        let c = comparison_matrix(&p).unwrap();
        assert!((0..4).all(|i| c.row(i).iter().all(|&v| v == 1.0)));
        assert_eq!(row_minima(&c), vec![1.0; 4]);
    }

    #[test]
    fn single_route() {
        let p = PairwiseMatrix::from_rows(vec![vec![1.0]]).unwrap();
        assert_eq!(row_minima(&comparison_matrix(&p).unwrap()), vec![1.0]);
        let r = rank(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.best().id.as_str(), "r1");
        assert_eq!(r.best().score, 1.0);
    }

    #[test]
    fn symmetric_pair_ties_by_index() {
        let p = PairwiseMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let r = rank(&p).unwrap();
        assert_eq!(r.scores(), vec![1.0, 1.0]);
        let got: Vec<&str> = r.ids().iter().map(|id| id.as_str()).collect();
        assert_eq!(got, ["r1", "r2"]);
    }

    #[test]
    fn matrix_invariants_rejected() {
        assert!(PairwiseMatrix::from_rows(vec![]).is_err());
        assert!(PairwiseMatrix::from_rows(vec![vec![1.0, 0.2]]).is_err());
        assert!(PairwiseMatrix::from_rows(vec![vec![0.9]]).is_err());
        assert!(PairwiseMatrix::from_rows(vec![vec![1.0, 1.2], vec![0.1, 1.0]]).is_err());
        assert!(PairwiseMatrix::from_rows(vec![vec![1.0, f64::NAN], vec![0.1, 1.0]]).is_err());
        let dup = vec![RouteId::from("a"), RouteId::from("a")];
        assert!(PairwiseMatrix::new(dup, vec![vec![1.0, 0.1], vec![0.1, 1.0]]).is_err());
    }

    #[test]
    fn ranking_keeps_identity() {
        let ids: Vec<RouteId> = ["x", "y", "z"].into_iter().map(RouteId::from).collect();
        let r = RouteRanking::from_scores(&ids, &[0.2, 0.9, 0.2]);
        assert_eq!(r.indices(), vec![1, 0, 2]);
        assert_eq!(r.best().id.as_str(), "y");
    }
}
