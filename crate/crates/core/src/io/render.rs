//! Text and PNG renderers. 1D runs put time downward; 2D runs are a
//! sequence of frames.

use std::fmt::Write as _;
use std::path::Path;

use image::{Rgb, RgbImage};

use crate::engine::{SpaceTime, State, UpdateHistory};
use crate::{Error, Result};

/// `.` for 0, digits for 1..9, then `a`..`z`, `?` beyond.
pub fn glyph(s: State) -> char {
    match s {
        0 => '.',
        1..=9 => char::from_digit(s, 10).expect("digit"),
        10..=35 => (b'a' + (s - 10) as u8) as char,
        _ => '?',
    }
}

/// Rows of frame `t`, top to bottom.
fn frame_rows(st: &SpaceTime, t: usize) -> Vec<Vec<State>> {
    let w = &st.window;
    let (width, height) = (w.width() as usize, w.height() as usize);
    let f = &st.frames[t];
    (0..height).rev().map(|r| f[r * width..(r + 1) * width].to_vec()).collect()
}

pub fn render_spacetime_text(st: &SpaceTime) -> String {
    let w = &st.window;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} | window {}..{} | {} frames",
        st.provenance,
        w.lo,
        w.hi,
        st.frames.len()
    );
    let one_d = w.height() == 1;
    for t in 0..st.frames.len() {
        if !one_d {
            let _ = writeln!(out, "t={t}");
        }
        for row in frame_rows(st, t) {
            out.extend(row.iter().map(|&s| glyph(s)));
            out.push('\n');
        }
    }
    out
}

/// Row `d` shows every cell's `d`-th history entry; cells whose history is
/// shorter are blank. Only meaningful for 1D histories, listed left to right.
pub fn render_history_text(h: &UpdateHistory) -> String {
    let mut cells: Vec<usize> = (0..h.cells().len()).collect();
    cells.sort_by_key(|&i| (h.cells()[i].1, h.cells()[i].0));
    let mut out = String::new();
    let _ = writeln!(out, "# history | {} cells | depth {}", cells.len(), h.max_depth());
    if cells.is_empty() {
        return out;
    }
    for d in 0..h.max_depth() {
        let line: String = cells.iter().map(|&i| h.seqs()[i].get(d).map_or(' ', |&s| glyph(s))).collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

const PALETTE: [[u8; 3]; 8] = [
    [255, 255, 255],
    [20, 20, 20],
    [200, 40, 40],
    [40, 90, 200],
    [40, 160, 70],
    [230, 170, 30],
    [140, 60, 170],
    [30, 170, 170],
];

pub fn color(s: State) -> [u8; 3] {
    if (s as usize) < PALETTE.len() {
        PALETTE[s as usize]
    } else {
        // Deterministic spread for larger alphabets.
        let h = s.wrapping_mul(2_654_435_761);
        [(h >> 24) as u8, (h >> 16) as u8, (h >> 8) as u8]
    }
}

/// 1D: one row of pixels per frame. 2D: frames side by side with a one-pixel gap.
pub fn render_spacetime_image(st: &SpaceTime, scale: u32) -> RgbImage {
    let scale = scale.max(1);
    let w = &st.window;
    let (cw, ch) = (w.width() as u32, w.height() as u32);
    let n = st.frames.len() as u32;
    let cells: Vec<(u32, u32, State)> = if ch == 1 {
        (0..n)
            .flat_map(|t| st.frames[t as usize].iter().enumerate().map(move |(x, &s)| (x as u32, t, s)))
            .collect()
    } else {
        (0..n)
            .flat_map(|t| {
                frame_rows(st, t as usize).into_iter().enumerate().flat_map(move |(y, row)| {
                    row.into_iter().enumerate().map(move |(x, s)| (t * (cw + 1) + x as u32, y as u32, s))
                })
            })
            .collect()
    };
    let (iw, ih) = if ch == 1 { (cw, n) } else { (n * (cw + 1), ch) };
    let mut img = RgbImage::from_pixel((iw * scale).max(1), (ih * scale).max(1), Rgb([128, 128, 128]));
    for (x, y, s) in cells {
        for dx in 0..scale {
            for dy in 0..scale {
                img.put_pixel(x * scale + dx, y * scale + dy, Rgb(color(s)));
            }
        }
    }
    img
}

pub fn write_png(st: &SpaceTime, scale: u32, path: &Path) -> Result<()> {
    render_spacetime_image(st, scale)
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Internal(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_schedule, Configuration, Coord, RuleTable, ScheduleSpec, Window};

    #[test]
    fn empty_history_is_header_only() {
        let h = UpdateHistory::new(vec![], vec![], Configuration::zeros(1));
        assert_eq!(render_history_text(&h).lines().count(), 1);
    }

    #[test]
    fn image_shapes() {
        let c0 = Configuration::from_word(&[1], 0);
        let st = run_schedule(&RuleTable::wolfram(150), &c0, &ScheduleSpec::Synchronous, Window::line(-4, 4), 3).unwrap();
        let img = render_spacetime_image(&st, 2);
        assert_eq!(img.dimensions(), (18, 8));
        assert_eq!(img.get_pixel(8, 0), &Rgb(color(1)));
        let c0 = Configuration::from_rows(&[vec![1, 0], vec![0, 0]], 0, 1);
        let st = run_schedule(
            &RuleTable::identity(2, 2, crate::engine::nbhd::von_neumann()).unwrap(),
            &c0,
            &ScheduleSpec::Synchronous,
            Window::new(Coord(0, 0), Coord(1, 1)),
            1,
        )
        .unwrap();
        let img = render_spacetime_image(&st, 1);
        assert_eq!(img.dimensions(), (6, 2));
        // Top-left cell of the first frame is the 1.
        assert_eq!(img.get_pixel(0, 0), &Rgb(color(1)));
        assert_eq!(img.get_pixel(2, 0), &Rgb([128, 128, 128]));
    }
}
