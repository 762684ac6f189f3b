//! Uniform-grid bucketing of a point cloud for fixed-radius and nearest-neighbour queries.

#[derive(Clone, Debug)]
pub(crate) struct GridIndex {
    dim: usize,
    lower: Vec<f64>,
    cell: f64,
    dims: Vec<usize>,
    cell_start: Vec<usize>,
    entries: Vec<usize>,
}

impl GridIndex {
    /// `coords` is a flat list of `n * dim` coordinates.
    pub(crate) fn build(dim: usize, coords: &[f64]) -> Self {
        let n = coords.len() / dim.max(1);
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lower[k] = lower[k].min(p[k]);
                upper[k] = upper[k].max(p[k]);
            }
        }
        if n == 0 {
            lower = vec![0.0; dim];
            upper = vec![0.0; dim];
        }
        let max_extent = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| u - l)
            .fold(0.0, f64::max);
        // cell ≈ mean spacing for quasi-uniform sets
        let per_axis = (n.max(1) as f64).powf(1.0 / dim as f64).ceil();
        let cell = if max_extent > 0.0 {
            max_extent / per_axis
        } else {
            1.0
        };
        let dims: Vec<usize> = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| ((u - l) / cell).floor() as usize + 1)
            .collect();
        let total: usize = dims.iter().product();

        let mut counts = vec![0usize; total + 1];
        let cell_of: Vec<usize> = coords
            .chunks_exact(dim)
            .map(|p| {
                let mut flat = 0;
                for k in (0..dim).rev() {
                    let c = (((p[k] - lower[k]) / cell).floor() as usize).min(dims[k] - 1);
                    flat = flat * dims[k] + c;
                }
                flat
            })
            .collect();
        for &c in &cell_of {
            counts[c + 1] += 1;
        }
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let cell_start = counts.clone();
        let mut fill = counts;
        let mut entries = vec![0; n];
        for (i, &c) in cell_of.iter().enumerate() {
            entries[fill[c]] = i;
            fill[c] += 1;
        }
        GridIndex {
            dim,
            lower,
            cell,
            dims,
            cell_start,
            entries,
        }
    }

    fn cell_range(&self, x: &[f64], r: f64) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut lo = Vec::with_capacity(self.dim);
        let mut hi = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let a = ((x[k] - r - self.lower[k]) / self.cell).floor();
            let b = ((x[k] + r - self.lower[k]) / self.cell).floor();
            let top = (self.dims[k] - 1) as f64;
            if b < 0.0 || a > top {
                return None;
            }
            lo.push(a.max(0.0) as usize);
            hi.push(b.min(top) as usize);
        }
        Some((lo, hi))
    }

    /// Calls `visit(index)` for every candidate in the cells overlapping the cube
    /// of half-width `r` around `x`. Candidates still need a distance check.
    fn for_each_candidate(&self, x: &[f64], r: f64, mut visit: impl FnMut(usize)) {
        let Some((lo, hi)) = self.cell_range(x, r) else {
            return;
        };
        let mut cur = lo.clone();
        loop {
            let mut flat = 0;
            for k in (0..self.dim).rev() {
                flat = flat * self.dims[k] + cur[k];
            }
            for &i in &self.entries[self.cell_start[flat]..self.cell_start[flat + 1]] {
                visit(i);
            }
            let mut k = 0;
            loop {
                if k == self.dim {
                    return;
                }
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
                k += 1;
            }
        }
    }

    /// Indices within closed distance `r` of `x`, in increasing index order.
    pub(crate) fn within(&self, coords: &[f64], x: &[f64], r: f64) -> Vec<usize> {
        let r2 = r * r;
        let mut out = Vec::new();
        self.for_each_candidate(x, r, |i| {
            if squared_distance(&coords[i * self.dim..(i + 1) * self.dim], x) <= r2 {
                out.push(i);
            }
        });
        out.sort_unstable();
        out
    }

    /// Nearest point to `x` (other than `exclude`), with its distance.
    pub(crate) fn nearest(
        &self,
        coords: &[f64],
        x: &[f64],
        exclude: Option<usize>,
    ) -> Option<(usize, f64)> {
        let n = self.entries.len();
        if n == 0 || (n == 1 && exclude.is_some()) {
            return None;
        }
        let mut outside = 0.0f64;
        for k in 0..self.dim {
            let top = self.lower[k] + self.dims[k] as f64 * self.cell;
            let gap = (self.lower[k] - x[k]).max(x[k] - top).max(0.0);
            outside += gap * gap;
        }
        let mut r = outside.sqrt() + self.cell;
        loop {
            let mut best: Option<(usize, f64)> = None;
            self.for_each_candidate(x, r, |i| {
                if Some(i) == exclude {
                    return;
                }
                let d2 = squared_distance(&coords[i * self.dim..(i + 1) * self.dim], x);
                match best {
                    Some((bi, bd)) if d2 > bd || (d2 == bd && i > bi) => {}
                    _ => best = Some((i, d2)),
                }
            });
            if let Some((i, d2)) = best {
                if d2 <= r * r {
                    return Some((i, d2.sqrt()));
                }
            }
            r *= 2.0;
        }
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
