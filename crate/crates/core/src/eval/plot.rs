use font8x8::{UnicodeFonts, BASIC_FONTS};
use image::{Rgb, RgbImage};

use super::report::SummaryRow;
use super::StrategyId;
use crate::error::{Error, Result};

const WIDTH: u32 = 800;
const HEIGHT: u32 = 560;
const LEFT: i64 = 80;
const RIGHT: i64 = 170;
const TOP: i64 = 40;
const BOTTOM: i64 = 70;

const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const BLACK: Rgb<u8> = Rgb([0, 0, 0]);
const GRID: Rgb<u8> = Rgb([225, 225, 225]);

fn colour(s: StrategyId) -> Rgb<u8> {
    match s {
        StrategyId::Org => Rgb([31, 119, 180]),
        StrategyId::AugOrg => Rgb([255, 127, 14]),
        StrategyId::Gan => Rgb([44, 160, 44]),
        StrategyId::AugGan => Rgb([214, 39, 40]),
    }
}

struct Canvas(RgbImage);

impl Canvas {
    fn put(&mut self, x: i64, y: i64, c: Rgb<u8>) {
        if x >= 0 && y >= 0 && x < self.0.width() as i64 && y < self.0.height() as i64 {
            self.0.put_pixel(x as u32, y as u32, c);
        }
    }

    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>, thick: i64) {
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).max(1);
        for i in 0..=steps {
            let x = x0 + (x1 - x0) * i / steps;
            let y = y0 + (y1 - y0) * i / steps;
            for dx in 0..thick {
                for dy in 0..thick {
                    self.put(x + dx - thick / 2, y + dy - thick / 2, c);
                }
            }
        }
    }

    fn square(&mut self, x: i64, y: i64, half: i64, c: Rgb<u8>) {
        for dy in -half..=half {
            for dx in -half..=half {
                self.put(x + dx, y + dy, c);
            }
        }
    }

    fn text(&mut self, x: i64, y: i64, s: &str, c: Rgb<u8>) {
        for (i, ch) in s.chars().enumerate() {
            let Some(glyph) = BASIC_FONTS.get(ch) else { continue };
            for (row, bits) in glyph.iter().enumerate() {
                for col in 0..8 {
                    if bits >> col & 1 == 1 {
                        self.put(x + i as i64 * 8 + col, y + row as i64, c);
                    }
                }
            }
        }
    }

    fn text_vertical(&mut self, x: i64, y: i64, s: &str, c: Rgb<u8>) {
        let n = s.chars().count() as i64;
        for (i, ch) in s.chars().enumerate() {
            let Some(glyph) = BASIC_FONTS.get(ch) else { continue };
            for (row, bits) in glyph.iter().enumerate() {
                for col in 0..8 {
                    if bits >> col & 1 == 1 {
                        self.put(x + row as i64, y + (n - i as i64) * 8 - col, c);
                    }
                }
            }
        }
    }
}

/// Mean F1 against k per strategy, with ±1 std error bars.
pub fn render_f1_plot(rows: &[SummaryRow]) -> Result<RgbImage> {
    if rows.is_empty() {
        return Err(Error::invalid("nothing to plot"));
    }
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let (kmin, kmax) = (ks[0] as f64, *ks.last().unwrap() as f64);
    let span = if kmax > kmin { kmax - kmin } else { 1.0 };
    let (x0, x1) = (LEFT + 20, WIDTH as i64 - RIGHT - 20);
    let (y0, y1) = (HEIGHT as i64 - BOTTOM, TOP);
    let px = |k: f64| x0 + (((k - kmin) / span) * (x1 - x0) as f64).round() as i64;
    let py = |f: f64| y0 - ((f.clamp(0.0, 1.0)) * (y0 - y1) as f64).round() as i64;

    let mut cv = Canvas(RgbImage::from_pixel(WIDTH, HEIGHT, WHITE));
    for t in 0..=5 {
        let v = t as f64 / 5.0;
        let y = py(v);
        cv.line((LEFT, y), (WIDTH as i64 - RIGHT, y), GRID, 1);
        cv.line((LEFT - 5, y), (LEFT, y), BLACK, 1);
        cv.text(LEFT - 40, y - 4, &format!("{v:.1}"), BLACK);
    }
    for &k in &ks {
        let x = px(k as f64);
        cv.line((x, y0), (x, y0 + 5), BLACK, 1);
        let label = k.to_string();
        cv.text(x - label.len() as i64 * 4, y0 + 10, &label, BLACK);
    }
    cv.line((LEFT, y0), (WIDTH as i64 - RIGHT, y0), BLACK, 1);
    cv.line((LEFT, y0), (LEFT, TOP), BLACK, 1);
    let xlabel = "k (real positive training patches)";
    cv.text((x0 + x1) / 2 - xlabel.len() as i64 * 4, HEIGHT as i64 - 30, xlabel, BLACK);
    cv.text_vertical(16, (y0 + y1) / 2 - 16, "F1", BLACK);
    let title = "F1 score vs k";
    cv.text((x0 + x1) / 2 - title.len() as i64 * 4, 14, title, BLACK);

    let mut legend_row = 0;
    for s in StrategyId::ALL {
        let mut pts: Vec<&SummaryRow> = rows.iter().filter(|r| r.strategy == s).collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by_key(|r| r.k);
        let c = colour(s);
        for w in pts.windows(2) {
            cv.line((px(w[0].k as f64), py(w[0].f1_mean)), (px(w[1].k as f64), py(w[1].f1_mean)), c, 2);
        }
        for r in &pts {
            let x = px(r.k as f64);
            let (lo, hi) = (py(r.f1_mean - r.f1_std), py(r.f1_mean + r.f1_std));
            cv.line((x, lo), (x, hi), c, 1);
            cv.line((x - 4, lo), (x + 4, lo), c, 1);
            cv.line((x - 4, hi), (x + 4, hi), c, 1);
            cv.square(x, py(r.f1_mean), 3, c);
        }
        let ly = TOP + 10 + legend_row * 20;
        let lx = WIDTH as i64 - RIGHT + 15;
        cv.line((lx, ly + 4), (lx + 24, ly + 4), c, 2);
        cv.square(lx + 12, ly + 4, 3, c);
        cv.text(lx + 32, ly, s.display_name(), BLACK);
        legend_row += 1;
    }
    Ok(cv.0)
}
