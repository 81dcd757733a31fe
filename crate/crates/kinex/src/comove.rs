//! Cross-country co-movement analytics.
//!
//! The pipeline is: pairwise Pearson correlation of aligned indicator series
//! -> a metric distance per pair -> a low-dimensional map of countries
//! (classical multidimensional scaling) and a minimum spanning tree over the
//! same distances. The distance is `sqrt(2 (1 - rho))`, which treats each
//! standardized series as a unit vector and measures the chord between them:
//! 0 for perfectly co-moving countries, sqrt(2) for uncorrelated ones, 2 for
//! perfectly opposed ones.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::{CleaningPolicy, CountryCode, TimeSeriesPanel};

/// Pearson correlation of two equal-length series.
///
/// Two-pass (centered) evaluation; requires at least 3 points and rejects
/// numerically constant input instead of returning noise. The result is
/// clamped to `[-1, 1]` to absorb last-bit rounding.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::SeriesTooShort { len: n, min: 3 });
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let dx = x[k] - mean_x;
        let dy = y[k] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= variance_floor(n, x) {
        return Err(Error::DegenerateSeries {
            detail: "first series has (numerically) zero variance".into(),
        });
    }
    if syy <= variance_floor(n, y) {
        return Err(Error::DegenerateSeries {
            detail: "second series has (numerically) zero variance".into(),
        });
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Scale-aware threshold under which a centered sum of squares is
/// indistinguishable from rounding noise: `(n * eps * max|v|)^2`.
fn variance_floor(n: usize, v: &[f64]) -> f64 {
    let max_abs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let s = n as f64 * f64::EPSILON * max_abs;
    s * s
}

/// Validates that `entries` is a square matrix over `labels`, with unit
/// (resp. zero) diagonal, symmetric, and entries finite inside `range`.
fn check_square(
    labels: &[CountryCode],
    entries: &[Vec<f64>],
    diag: f64,
    range: (f64, f64),
    kind: &str,
) -> Result<()> {
    let n = labels.len();
    if entries.len() != n || entries.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidMatrix {
            detail: format!("{kind} matrix is not {n} x {n}"),
        });
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = labels.iter().find(|c| !seen.insert(**c)) {
        return Err(Error::InvalidMatrix {
            detail: format!("duplicate label {dup} in {kind} matrix"),
        });
    }
    for (i, row) in entries.iter().enumerate() {
        if row[i] != diag {
            return Err(Error::InvalidMatrix {
                detail: format!(
                    "{kind} matrix diagonal [{i}][{i}] = {} (want {diag})",
                    row[i]
                ),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < range.0 || v > range.1 {
                return Err(Error::InvalidMatrix {
                    detail: format!(
                        "{kind} matrix entry [{i}][{j}] = {v} outside [{}, {}]",
                        range.0, range.1
                    ),
                });
            }
            if entries[j][i] != v {
                return Err(Error::InvalidMatrix {
                    detail: format!("{kind} matrix is asymmetric at [{i}][{j}]"),
                });
            }
        }
    }
    Ok(())
}

/// Symmetric matrix of pairwise Pearson correlations with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    labels: Vec<CountryCode>,
    rows: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn new(labels: Vec<CountryCode>, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_square(&labels, &rows, 1.0, (-1.0, 1.0), "correlation")?;
        Ok(CorrelationMatrix { labels, rows })
    }

    pub fn labels(&self) -> &[CountryCode] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Symmetric matrix of pairwise distances with zero diagonal, entries in
/// `[0, 2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMatrix {
    labels: Vec<CountryCode>,
    rows: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<CountryCode>, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_square(&labels, &rows, 0.0, (0.0, 2.0), "distance")?;
        Ok(DistanceMatrix { labels, rows })
    }

    pub fn labels(&self) -> &[CountryCode] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A country excluded from a correlation matrix, with the first failure that
/// justified the exclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedCountry {
    pub code: CountryCode,
    pub reason: String,
}

/// A correlation matrix plus the countries that had to be excluded to
/// complete it.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub matrix: CorrelationMatrix,
    pub dropped: Vec<DroppedCountry>,
}

/// Builds the pairwise correlation matrix of a panel.
///
/// Every unordered pair is aligned under `policy` and correlated. A pair can
/// fail (insufficient overlap, degenerate series); countries causing
/// failures are excluded greedily, worst offender first (ties broken toward
/// the row later in the panel), until the remaining matrix is complete.
/// Exclusions are reported, not silent.
pub fn correlation_matrix(
    panel: &TimeSeriesPanel,
    policy: &CleaningPolicy,
) -> Result<CorrelationResult> {
    let n = panel.n_countries();
    if n < 2 {
        return Err(Error::InsufficientData {
            detail: format!("correlation matrix needs at least 2 countries, panel has {n}"),
        });
    }
    let codes = panel.countries();
    // Upper triangle of pair outcomes, keyed (i, j) with i < j.
    let mut cells: Vec<Vec<Result<f64>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            if j <= i {
                row.push(Ok(f64::NAN)); // unused half
                continue;
            }
            let r = panel
                .align_pair(codes[i], codes[j], policy)
                .and_then(|pair| pearson(&pair.left, &pair.right));
            row.push(r);
        }
        cells.push(row);
    }

    let mut retained: Vec<usize> = (0..n).collect();
    let mut dropped = Vec::new();
    loop {
        // Count failing pairings per retained country.
        let mut fail_count = vec![0usize; retained.len()];
        let mut first_err: Vec<Option<&Error>> = vec![None; retained.len()];
        for a in 0..retained.len() {
            for b in (a + 1)..retained.len() {
                let (i, j) = (retained[a], retained[b]);
                if let Err(e) = &cells[i][j] {
                    fail_count[a] += 1;
                    fail_count[b] += 1;
                    first_err[a].get_or_insert(e);
                    first_err[b].get_or_insert(e);
                }
            }
        }
        let Some((worst, &count)) = fail_count
            .iter()
            .enumerate()
            .max_by_key(|(idx, c)| (**c, *idx))
        else {
            break;
        };
        if count == 0 {
            break;
        }
        let code = codes[retained[worst]];
        let err = first_err[worst].expect("failing country has an error");
        dropped.push(DroppedCountry {
            code,
            reason: format!("{count} unusable pairings; first: {err}"),
        });
        retained.remove(worst);
        if retained.len() < 2 {
            return Err(Error::InsufficientData {
                detail: format!(
                    "fewer than 2 countries with complete pairings remain (dropped: {})",
                    dropped
                        .iter()
                        .map(|d| d.code.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
        }
    }

    let m = retained.len();
    let mut rows = vec![vec![0.0; m]; m];
    for a in 0..m {
        rows[a][a] = 1.0;
        for b in (a + 1)..m {
            let rho = *cells[retained[a]][retained[b]]
                .as_ref()
                .expect("retained pairs are all usable");
            rows[a][b] = rho;
            rows[b][a] = rho;
        }
    }
    let labels = retained.iter().map(|&i| codes[i]).collect();
    Ok(CorrelationResult {
        matrix: CorrelationMatrix::new(labels, rows)?,
        dropped,
    })
}

/// Maps correlations to chord distances `sqrt(2 (1 - rho))`.
///
/// Monotone decreasing in `rho`: identical movement gives 0, perfect
/// opposition gives 2, zero correlation gives `sqrt(2)`.
pub fn distance_matrix(corr: &CorrelationMatrix) -> DistanceMatrix {
    let n = corr.len();
    // The unit diagonal maps to exactly zero, and validated symmetry of the
    // correlations makes the result symmetric bit for bit.
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (2.0 * (1.0 - corr.get(i, j))).max(0.0).sqrt())
                .collect()
        })
        .collect();
    DistanceMatrix {
        labels: corr.labels().to_vec(),
        rows,
    }
}

/// A low-dimensional configuration of labeled points.
///
/// `eigenvalues` are the retained eigenvalues of the doubly centered Gram
/// matrix, descending, reported raw: a negative retained eigenvalue flags a
/// non-Euclidean distance matrix (its axis is zeroed rather than imaginary).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Embedding {
    labels: Vec<CountryCode>,
    coords: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn labels(&self) -> &[CountryCode] {
        &self.labels
    }

    /// One row per label, `dims` coordinates each.
    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dims(&self) -> usize {
        self.eigenvalues.len()
    }

    /// True when any retained eigenvalue is negative.
    pub fn is_non_euclidean(&self) -> bool {
        self.eigenvalues.iter().any(|&l| l < 0.0)
    }

    /// Euclidean distance between embedded points `i` and `j`.
    pub fn embedded_distance(&self, i: usize, j: usize) -> f64 {
        self.coords[i]
            .iter()
            .zip(&self.coords[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Classical (Torgerson) multidimensional scaling.
///
/// Squared distances are doubly centered into a Gram matrix
/// `B = -1/2 J D^2 J`; its top `dims` eigenpairs give coordinates
/// `x_k = v_k sqrt(max(l_k, 0))`. Axes are sign-fixed so the largest-magnitude
/// coordinate on each axis is positive, making output deterministic.
pub fn classical_mds(dist: &DistanceMatrix, dims: usize) -> Result<Embedding> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            detail: format!("classical MDS needs at least 2 points, got {n}"),
        });
    }
    if dims < 1 || dims > n - 1 {
        return Err(Error::InvalidDims { dims, n });
    }

    // Doubly centered squared distances.
    let sq = |i: usize, j: usize| {
        let d = dist.get(i, j);
        d * d
    };
    let row_mean: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| sq(i, j)).sum::<f64>() / n as f64)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);
        }
    }

    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues: Vec<f64> = order[..dims].iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut coords = vec![vec![0.0; dims]; n];
    for (axis, &k) in order[..dims].iter().enumerate() {
        let scale = eigenvalues[axis].max(0.0).sqrt();
        let col = eig.eigenvectors.column(k);
        // Deterministic orientation: flip so the entry of largest magnitude
        // (first such index on ties) is positive.
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i][axis] = sign * col[i] * scale;
        }
    }

    Ok(Embedding {
        labels: dist.labels().to_vec(),
        coords,
        eigenvalues,
    })
}

/// One undirected tree edge between label indices `a < b` with weight `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

/// A minimum spanning tree over labeled points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanningTree {
    labels: Vec<CountryCode>,
    edges: Vec<TreeEdge>,
}

impl SpanningTree {
    pub fn labels(&self) -> &[CountryCode] {
        &self.labels
    }

    /// Edges in the order Kruskal accepted them (ascending weight, ties by
    /// endpoint indices).
    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal's minimum spanning tree over a distance matrix.
///
/// Candidate edges are sorted by `(weight, a, b)`, so equal-weight ties
/// resolve deterministically and reruns are bit-identical.
pub fn mst(dist: &DistanceMatrix) -> Result<SpanningTree> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            detail: format!("spanning tree needs at least 2 points, got {n}"),
        });
    }
    let mut candidates = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            candidates.push(TreeEdge {
                a,
                b,
                w: dist.get(a, b),
            });
        }
    }
    candidates.sort_by(|x, y| x.w.total_cmp(&y.w).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));

    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for e in candidates {
        if uf.union(e.a, e.b) {
            edges.push(e);
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    debug_assert_eq!(edges.len(), n - 1);
    Ok(SpanningTree {
        labels: dist.labels().to_vec(),
        edges,
    })
}
