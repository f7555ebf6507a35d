//! Binary morphology on boolean grids.
//!
//! The structuring element is the `(2r+1) × (2r+1)` square. Operations run on
//! a zero-padded copy so that opening and closing behave as on an unbounded
//! plane; the result is cropped back to the input size.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![false; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    fn padded(&self, pad: usize) -> Self {
        let mut out = Self::new(self.width + 2 * pad, self.height + 2 * pad);
        for y in 0..self.height {
            let src = &self.cells[y * self.width..(y + 1) * self.width];
            let start = (y + pad) * out.width + pad;
            out.cells[start..start + self.width].copy_from_slice(src);
        }
        out
    }

    fn unpadded(&self, pad: usize) -> Self {
        let w = self.width - 2 * pad;
        let h = self.height - 2 * pad;
        let mut out = Self::new(w, h);
        for y in 0..h {
            let start = (y + pad) * self.width + pad;
            out.cells[y * w..(y + 1) * w].copy_from_slice(&self.cells[start..start + w]);
        }
        out
    }
}

/// Sliding-window any/all along rows then columns; cells outside are `false`.
fn square_filter(g: &BinaryGrid, r: usize, dilate: bool) -> BinaryGrid {
    let (w, h) = (g.width, g.height);
    let window = |line: &[bool], out: &mut [bool]| {
        let n = line.len();
        // prefix counts make each window O(1)
        let mut prefix = vec![0usize; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + line[i] as usize;
        }
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(r);
            let hi = (i + r + 1).min(n);
            let ones = prefix[hi] - prefix[lo];
            *o = if dilate {
                ones > 0
            } else {
                // cells past the edge count as zeros
                lo + r == i && i + r < n && ones == 2 * r + 1
            };
        }
    };
    let mut tmp = BinaryGrid::new(w, h);
    for y in 0..h {
        window(&g.cells[y * w..(y + 1) * w], &mut tmp.cells[y * w..(y + 1) * w]);
    }
    let mut out = BinaryGrid::new(w, h);
    let mut col = vec![false; h];
    let mut res = vec![false; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = tmp.cells[y * w + x];
        }
        window(&col, &mut res);
        for y in 0..h {
            out.cells[y * w + x] = res[y];
        }
    }
    out
}

pub fn erode(g: &BinaryGrid, r: usize) -> BinaryGrid {
    square_filter(g, r, false)
}

pub fn dilate(g: &BinaryGrid, r: usize) -> BinaryGrid {
    square_filter(g, r, true)
}

/// Opening followed by closing.
pub fn open_close(g: &BinaryGrid, r: usize) -> BinaryGrid {
    if r == 0 {
        return g.clone();
    }
    let pad = 2 * r;
    let p = g.padded(pad);
    let opened = dilate(&erode(&p, r), r);
    let closed = erode(&dilate(&opened, r), r);
    closed.unpadded(pad)
}

/// 4-connected component labels (0 = background) and per-label sizes.
pub fn label_components(g: &BinaryGrid) -> (Vec<u32>, Vec<usize>) {
    let (w, h) = (g.width, g.height);
    let mut labels = vec![0u32; w * h];
    let mut sizes = vec![0usize];
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !g.cells[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32;
        let mut size = 0;
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if g.cells[j] && labels[j] == 0 {
                    labels[j] = label;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

/// Keep only the largest 4-connected component; ties go to the one met first
/// in row-major order.
pub fn largest_component(g: &BinaryGrid) -> BinaryGrid {
    let (labels, sizes) = label_components(g);
    let best = sizes
        .iter()
        .enumerate()
        .skip(1)
        .fold((0usize, 0usize), |acc, (l, &s)| if s > acc.1 { (l, s) } else { acc })
        .0 as u32;
    BinaryGrid {
        width: g.width,
        height: g.height,
        cells: labels.iter().map(|&l| best != 0 && l == best).collect(),
    }
}

/// Set every background cell not 4-reachable from the grid border.
pub fn fill_holes(g: &BinaryGrid) -> BinaryGrid {
    let (w, h) = (g.width, g.height);
    let mut outside = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    let seed = |i: usize, outside: &mut Vec<bool>, stack: &mut Vec<usize>| {
        if !g.cells[i] && !outside[i] {
            outside[i] = true;
            stack.push(i);
        }
    };
    for x in 0..w {
        seed(x, &mut outside, &mut stack);
        seed((h - 1) * w + x, &mut outside, &mut stack);
    }
    for y in 0..h {
        seed(y * w, &mut outside, &mut stack);
        seed(y * w + w - 1, &mut outside, &mut stack);
    }
    while let Some(i) = stack.pop() {
        let (x, y) = (i % w, i / w);
        let mut nbrs = [usize::MAX; 4];
        if x > 0 {
            nbrs[0] = i - 1;
        }
        if x + 1 < w {
            nbrs[1] = i + 1;
        }
        if y > 0 {
            nbrs[2] = i - w;
        }
        if y + 1 < h {
            nbrs[3] = i + w;
        }
        for j in nbrs.into_iter().filter(|&j| j != usize::MAX) {
            seed(j, &mut outside, &mut stack);
        }
    }
    BinaryGrid {
        width: w,
        height: h,
        cells: outside.iter().map(|&o| !o).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[&str]) -> BinaryGrid {
        let h = rows.len();
        let w = rows[0].len();
        BinaryGrid {
            width: w,
            height: h,
            cells: rows.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect(),
        }
    }

    #[test]
    fn erosion_treats_outside_as_background() {
        let g = grid(&["###", "###", "###"]);
        let e = erode(&g, 1);
        assert_eq!(e, grid(&["...", ".#.", "..."]));
        assert_eq!(dilate(&e, 1), g);
    }

    #[test]
    fn components_and_holes() {
        let g = grid(&["##..#", "##..#", ".....", "###..", "#.#.."]);
        let (_, sizes) = label_components(&g);
        assert_eq!(sizes[1..], [4, 2, 5]);
        assert_eq!(largest_component(&g).count(), 5);
        let ring = grid(&[".....", ".###.", ".#.#.", ".###.", "....."]);
        assert_eq!(fill_holes(&ring).count(), 9);
        // a gap opens the ring to the border
        let open_ring = grid(&[".....", ".###.", ".#...", ".###.", "....."]);
        assert_eq!(fill_holes(&open_ring), open_ring);
    }
}
