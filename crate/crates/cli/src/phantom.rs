//! Synthetic test scenes rendered analytically at any resolution.
//!
//! Scenes live on `[-1, 1]^2` (x to the right, y up) and are rasterized by
//! averaging `SUPERSAMPLE^2` point evaluations per pixel, so every
//! resolution sees the same continuous object.

use mlcs_core::operators::Image2D;

const SUPERSAMPLE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scene {
    /// Head-like arrangement of ellipses with smoothly varying tissue
    /// intensities.
    Ellipses,
    /// Smooth background with shaded disks, a bar and a ramp.
    PiecewiseSmooth,
}

struct Ellipse {
    value: f64,
    a: f64,
    b: f64,
    x0: f64,
    y0: f64,
    angle_deg: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let (dx, dy) = (x - self.x0, y - self.y0);
        let u = (dx * c + dy * s) / self.a;
        let v = (-dx * s + dy * c) / self.b;
        u * u + v * v <= 1.0
    }
}

const fn e(value: f64, a: f64, b: f64, x0: f64, y0: f64, angle_deg: f64) -> Ellipse {
    Ellipse { value, a, b, x0, y0, angle_deg }
}

/// Additive ellipse layers (high-contrast head phantom layout).
const HEAD: [Ellipse; 14] = [
    e(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    e(-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    e(-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    e(-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    e(0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    e(0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    e(0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    e(0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    e(0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    e(0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
    e(0.15, 0.08, 0.05, 0.38, 0.52, 30.0),
    e(0.12, 0.03, 0.12, -0.4, -0.35, -25.0),
    e(-0.1, 0.05, 0.05, 0.3, -0.45, 0.0),
    e(0.2, 0.02, 0.02, -0.15, 0.62, 0.0),
];

fn ellipses(x: f64, y: f64) -> f64 {
    let mut v: f64 = HEAD.iter().filter(|el| el.contains(x, y)).map(|el| el.value).sum();
    // Smooth shading of the tissue inside the skull.
    if HEAD[1].contains(x, y) {
        v *= 1.0 + 0.25 * (2.1 * x + 0.4).sin() * (1.7 * y - 0.3).cos();
    }
    v.clamp(0.0, 1.0)
}

fn piecewise_smooth(x: f64, y: f64) -> f64 {
    let mut v = 0.35 + 0.15 * (1.3 * x).cos() * (0.9 * y + 0.5).sin();
    let disk = |cx: f64, cy: f64, r: f64| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() <= r;
    if disk(-0.35, 0.3, 0.4) {
        let d2 = (x + 0.35).powi(2) + (y - 0.3).powi(2);
        v = 0.9 - 1.5 * d2;
    }
    if disk(0.45, -0.35, 0.25) {
        v = 0.1 + 0.3 * (x - 0.45 + 0.25);
    }
    if (0.15..0.75).contains(&x) && (0.35..0.5).contains(&y) {
        v = 0.75;
    }
    if y < -0.65 {
        v = 0.5 * (x + 1.0) / 2.0 + 0.2;
    }
    v.clamp(0.0, 1.0)
}

impl Scene {
    pub fn value(self, x: f64, y: f64) -> f64 {
        match self {
            Scene::Ellipses => ellipses(x, y),
            Scene::PiecewiseSmooth => piecewise_smooth(x, y),
        }
    }

    /// Rasterizes the scene on a `side x side` grid (row 0 at the top).
    pub fn render(self, side: usize) -> Image2D {
        let s = SUPERSAMPLE;
        let h = 2.0 / (side * s) as f64;
        let norm = 1.0 / (s * s) as f64;
        let mut data = Vec::with_capacity(side * side);
        for r in 0..side {
            for c in 0..side {
                let mut acc = 0.0;
                for i in 0..s {
                    let y = 1.0 - ((r * s + i) as f64 + 0.5) * h;
                    for j in 0..s {
                        let x = -1.0 + ((c * s + j) as f64 + 0.5) * h;
                        acc += self.value(x, y);
                    }
                }
                data.push(acc * norm);
            }
        }
        Image2D::new(side, side, data).expect("rendered samples are finite")
    }
}
