//! Chaos-game rendering to ASCII PGM.

use std::fmt::Write as _;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ifs::IfsSystem;

/// Greyscale raster, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl PgmImage {
    pub fn blank(width: usize, height: usize) -> Self {
        Self { width, height, pixels: vec![255; width * height] }
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn black_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 0).count()
    }

    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn write_to(&self, mut w: impl io::Write) -> io::Result<()> {
        w.write_all(self.to_pgm().as_bytes())
    }
}

/// Chaos-game orbit histogram.
#[derive(Debug, Clone)]
pub struct Rendering {
    pub image: PgmImage,
    /// Orbit points after burn-in, in visiting order.
    pub points: Vec<Vec<f64>>,
}

/// Runs `iters` chaos-game steps with uniform digit choice from the centroid
/// and blackens every `resolution`-grid cell over the bounding box of `Ω`
/// visited after the first `burn_in` steps.
///
/// One-dimensional systems render as a strip of identical rows.
pub fn render_attractor(
    sys: &IfsSystem<f64>,
    iters: usize,
    burn_in: usize,
    resolution: usize,
    seed: u64,
) -> Result<Rendering> {
    if burn_in < 100 || iters <= burn_in {
        return Err(Error::InvalidInput("need iters > burn_in >= 100".into()));
    }
    if resolution == 0 || sys.d() > 2 {
        return Err(Error::InvalidInput("rendering needs resolution >= 1 and dimension <= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = sys.m();
    let mut x = sys.centroid();
    let mut points = Vec::with_capacity(iters - burn_in);
    for step in 0..iters {
        let j = rng.random_range(0..m);
        x = sys.apply_map(j, &x)?;
        if step >= burn_in {
            points.push(x.clone());
        }
    }
    let (lo, hi) = sys.omega().bounding_box();
    let cell = |v: f64, c: usize| -> usize {
        let span = hi[c] - lo[c];
        let k = ((v - lo[c]) / span * resolution as f64).floor();
        (k.max(0.0) as usize).min(resolution - 1)
    };
    let image = if sys.d() == 1 {
        let height = (resolution / 16).max(1);
        let mut img = PgmImage::blank(resolution, height);
        for p in &points {
            let col = cell(p[0], 0);
            for row in 0..height {
                img.pixels[row * resolution + col] = 0;
            }
        }
        img
    } else {
        let mut img = PgmImage::blank(resolution, resolution);
        for p in &points {
            let col = cell(p[0], 0);
            let row = resolution - 1 - cell(p[1], 1);
            img.pixels[row * resolution + col] = 0;
        }
        img
    };
    Ok(Rendering { image, points })
}
