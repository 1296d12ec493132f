//! Rectangular linear assignment.
//!
//! Each date of an observation campaign yields an `m × n` cost matrix: one row
//! per measurement, one column per tracked object, `m ≥ n`. [`solve`] picks one
//! distinct measurement for every object so that the summed cost is minimal.
//!
//! The solver is the shortest-augmenting-path form of Kuhn–Munkres run over
//! the object columns, with the measurement rows as the larger side, so no
//! dummy padding is involved and the work is `O(n²·m)`. Reduced costs are
//! compared exactly; for pathological near-ties either optimum may come back.

use std::fmt;

use thiserror::Error;

/// Largest row count accepted by [`brute_force_solve`].
pub const BRUTE_FORCE_MAX_ROWS: usize = 9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("cost matrix has {rows} rows for {cols} columns; need rows >= cols >= 1")]
    Shape { rows: usize, cols: usize },
    #[error("cost matrix has {got} entries, expected {rows}x{cols}")]
    Size { rows: usize, cols: usize, got: usize },
    #[error("invalid cost {value} at row {row}, column {col}")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("brute force limited to {max} rows, got {rows}")]
    TooLarge { rows: usize, max: usize },
}

/// Dense `rows × cols` matrix of finite non-negative costs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, AssignmentError> {
        if cols == 0 || rows < cols {
            return Err(AssignmentError::Shape { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(AssignmentError::Size {
                rows,
                cols,
                got: entries.len(),
            });
        }
        if let Some(idx) = entries.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(AssignmentError::InvalidEntry {
                row: idx / cols,
                col: idx % cols,
                value: entries[idx],
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from nested rows. Ragged input is a size error.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, AssignmentError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(AssignmentError::Size {
                    rows: rows.len(),
                    cols,
                    got: entries.len() + r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, entries)
    }

    /// Number of measurements (rows).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of objects (columns).
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    /// Sum of the selected entries, accumulated in ascending column order.
    pub fn cost_of(&self, row_of: &[usize]) -> f64 {
        row_of
            .iter()
            .enumerate()
            .fold(0.0, |acc, (col, &row)| acc + self.get(row, col))
    }
}

impl fmt::Display for CostMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: Vec<String> = (0..self.cols).map(|c| format!("{}", self.get(r, c))).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// An injective object → measurement-row map and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `row_of[i]` is the measurement row given to object `i`.
    pub row_of: Vec<usize>,
    pub total_cost: f64,
}

/// Exact minimum-cost assignment of every column to a distinct row.
pub fn solve(costs: &CostMatrix) -> Assignment {
    let n = costs.cols;
    let m = costs.rows;

    // 1-based indexing with slot 0 as the virtual root of each augmenting tree.
    // `owner[j]` is the column currently holding row j (0 = free).
    let mut col_pot = vec![0.0f64; n + 1];
    let mut row_pot = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut min_slack = vec![f64::INFINITY; m + 1];
    let mut used = vec![false; m + 1];

    for col in 1..=n {
        owner[0] = col;
        let mut j0 = 0usize;
        min_slack.fill(f64::INFINITY);
        used.fill(false);

        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;

            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = costs.get(j - 1, i0 - 1) - col_pot[i0] - row_pot[j];
                if cur < min_slack[j] {
                    min_slack[j] = cur;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }

            for j in 0..=m {
                if used[j] {
                    col_pot[owner[j]] += delta;
                    row_pot[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }

            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }

        // Flip the alternating path back to the root.
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_of = vec![0usize; n];
    for j in 1..=m {
        if owner[j] > 0 {
            row_of[owner[j] - 1] = j - 1;
        }
    }
    let total_cost = costs.cost_of(&row_of);
    Assignment { row_of, total_cost }
}

/// Exhaustive search over all `m!/(m−n)!` injective maps. Test oracle only.
///
/// Maps are visited in lexicographic order of `row_of` and only a strictly
/// smaller cost replaces the incumbent, so ties resolve to the
/// lexicographically first map.
pub fn brute_force_solve(costs: &CostMatrix) -> Result<Assignment, AssignmentError> {
    if costs.rows > BRUTE_FORCE_MAX_ROWS {
        return Err(AssignmentError::TooLarge {
            rows: costs.rows,
            max: BRUTE_FORCE_MAX_ROWS,
        });
    }

    struct Search<'a> {
        costs: &'a CostMatrix,
        current: Vec<usize>,
        taken: Vec<bool>,
        best: Option<Assignment>,
    }

    impl Search<'_> {
        fn recurse(&mut self, col: usize) {
            if col == self.costs.cols {
                let total = self.costs.cost_of(&self.current);
                if self.best.as_ref().is_none_or(|b| total < b.total_cost) {
                    self.best = Some(Assignment {
                        row_of: self.current.clone(),
                        total_cost: total,
                    });
                }
                return;
            }
            for row in 0..self.costs.rows {
                if self.taken[row] {
                    continue;
                }
                self.taken[row] = true;
                self.current.push(row);
                self.recurse(col + 1);
                self.current.pop();
                self.taken[row] = false;
            }
        }
    }

    let mut search = Search {
        costs,
        current: Vec::with_capacity(costs.cols),
        taken: vec![false; costs.rows],
        best: None,
    };
    search.recurse(0);
    Ok(search.best.expect("a complete bipartite matrix always has an assignment"))
}
