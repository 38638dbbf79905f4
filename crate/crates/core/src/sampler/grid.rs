use crate::{Error, Result};

/// `p(x, y) = cx·x + cy·y + offset`. Only `x` and `x - c` (cx = 1, cy = 0) are supported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub cx: f64,
    pub cy: f64,
    pub offset: f64,
}

impl Projection {
    pub fn x() -> Self {
        Projection { cx: 1.0, cy: 0.0, offset: 0.0 }
    }

    pub fn x_minus(c: f64) -> Self {
        Projection { cx: 1.0, cy: 0.0, offset: -c }
    }
}

/// The conditional measure along `p = c` as masses on the `y` cells.
#[derive(Clone, Debug)]
pub struct GridMeasure {
    pub y_edges: Vec<f64>,
    pub masses: Vec<f64>,
    /// The slice depends on the side from which the cells approach `p = c`:
    /// the limit does not exist and the conditional density is undefined.
    pub undefined: bool,
}

impl GridMeasure {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Discretized conditional density of the 2-D density `f` on the box
/// `[x0, x1] × [y0, y1]` with `cells` per axis, along `p(x, y) = c`.
pub fn cond_density_oracle(
    f: impl Fn(f64, f64) -> f64,
    bbox: [f64; 4],
    cells: usize,
    p: Projection,
    c: f64,
) -> Result<GridMeasure> {
    let [x0, x1, y0, y1] = bbox;
    if p.cx != 1.0 || p.cy != 0.0 {
        return Err(Error::Grid(format!("projection {:?} is not of the form x or x - c", p)));
    }
    if cells == 0 || !(x1 > x0 && y1 > y0) {
        return Err(Error::Grid("empty grid".into()));
    }
    let at = c - p.offset;
    let h = (x1 - x0) / cells as f64;
    let k = (y1 - y0) / cells as f64;
    let y_edges: Vec<f64> = (0..=cells).map(|j| y0 + j as f64 * k).collect();
    // Mass of [a, b] × cell j over the column width, by 4×4 Gauss–Legendre.
    let column = |a: f64, b: f64| -> Vec<f64> {
        (0..cells)
            .map(|j| {
                if b <= x0 || a >= x1 {
                    return 0.0;
                }
                let (a, b) = (a.max(x0), b.min(x1));
                gl2(&f, a, b, y_edges[j], y_edges[j + 1]) / h
            })
            .collect()
    };
    let masses = column(at - h / 2.0, at + h / 2.0);
    let left: f64 = column(at - h, at).iter().sum();
    let right: f64 = column(at, at + h).iter().sum();
    let scale = left.abs().max(right.abs()).max(1e-300);
    let undefined = (left - right).abs() / scale > 0.05 && (left - right).abs() > 1e-9;
    Ok(GridMeasure { y_edges, masses, undefined })
}

fn gl2(f: &impl Fn(f64, f64) -> f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    const NODES: [f64; 4] = [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526];
    const WEIGHTS: [f64; 4] = [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538];
    let (mx, rx) = ((a + b) / 2.0, (b - a) / 2.0);
    let (my, ry) = ((c + d) / 2.0, (d - c) / 2.0);
    let mut s = 0.0;
    for (xi, wi) in NODES.iter().zip(WEIGHTS) {
        for (yj, wj) in NODES.iter().zip(WEIGHTS) {
            s += wi * wj * f(mx + rx * xi, my + ry * yj);
        }
    }
    s * rx * ry
}
