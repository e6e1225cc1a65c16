//! Framebuffer replicating the LCD controller's display RAM: 8 pages of 132
//! bytes, each byte one x position and 8 rows. Panel pixels live in byte
//! indices 2..=129, with both axes reflected because the panel is mounted
//! upside down. Panel row 0 is the top of the visible screen and lives in
//! page 7.

use crate::font::{self, GLYPH_WIDTH};
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;
use thiserror::Error;

pub const LCD_COLUMNS: usize = 8;
pub const LCD_WIDTH_LOGICAL: usize = 132;
pub const LCD_TOTAL_DATA: usize = LCD_COLUMNS * LCD_WIDTH_LOGICAL;
pub const LCD_WIDTH: usize = 128;
pub const LCD_HEIGHT: usize = 64;
const FIRST_MAPPED: usize = 2;

/// Visible rows 16..=63.
pub const WAVEFORM_PAGES: RangeInclusive<usize> = 0..=5;
/// Visible rows 0..=15, above the waveform.
pub const STATUS_PAGES: RangeInclusive<usize> = 6..=7;
pub const WAVEFORM_TOP_ROW: usize = 16;
pub const WAVEFORM_ROWS: usize = LCD_HEIGHT - WAVEFORM_TOP_ROW;

pub const GLYPH_ADVANCE: usize = GLYPH_WIDTH + 1;

pub const PBM_HEADER: &[u8] = b"P4\n128 64\n";

#[derive(Debug, Error, PartialEq)]
pub enum DisplayError {
    #[error("pixel ({x}, {y}) outside the 128x64 panel")]
    OutOfRange { x: usize, y: usize },
    #[error("page {0} outside 0..8")]
    Page(usize),
    #[error("calibration high ({high}) must exceed low ({low})")]
    DegenerateCalibration { high: u16, low: u16 },
    #[error("expected {LCD_TOTAL_DATA} framebuffer bytes, got {0}")]
    Length(usize),
}

/// Location of one panel pixel in display RAM.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PixelAddress {
    pub page: usize,
    pub byte: usize,
    pub mask: u8,
}

/// The `PLOT_AT` mapping.
pub fn pixel_address(x: usize, y: usize) -> Result<PixelAddress, DisplayError> {
    if x >= LCD_WIDTH || y >= LCD_HEIGHT {
        return Err(DisplayError::OutOfRange { x, y });
    }
    let mask = 1u8 << ((LCD_COLUMNS - 1) - (y & (LCD_COLUMNS - 1)));
    let page = (LCD_COLUMNS - 1) - ((y >> 3) & (LCD_COLUMNS - 1));
    let byte = (LCD_WIDTH - 1) - x + FIRST_MAPPED;
    Ok(PixelAddress { page, byte, mask })
}

/// Inverse of [`pixel_address`]; `None` for the unmapped bytes.
pub fn pixel_at(page: usize, byte: usize, bit: u32) -> Option<(usize, usize)> {
    if page >= LCD_COLUMNS || !(FIRST_MAPPED..FIRST_MAPPED + LCD_WIDTH).contains(&byte) || bit > 7 {
        return None;
    }
    let x = (LCD_WIDTH - 1) + FIRST_MAPPED - byte;
    let y = ((LCD_COLUMNS - 1) - page) * 8 + (7 - bit as usize);
    Some((x, y))
}

#[derive(Clone, PartialEq, Eq)]
pub struct FrameBuffer {
    pages: [[u8; LCD_WIDTH_LOGICAL]; LCD_COLUMNS],
}

impl std::fmt::Debug for FrameBuffer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let lit: u32 = self.pages.iter().flatten().map(|b| b.count_ones()).sum();
        write!(f, "FrameBuffer({lit} lit)")
    }
}

impl Default for FrameBuffer {
    fn default() -> Self {
        Self::new()
    }
}

impl FrameBuffer {
    pub fn new() -> Self {
        Self { pages: [[0; LCD_WIDTH_LOGICAL]; LCD_COLUMNS] }
    }

    pub fn page(&self, page: usize) -> &[u8; LCD_WIDTH_LOGICAL] {
        &self.pages[page]
    }

    pub fn plot_at(&mut self, x: usize, y: usize) -> Result<(), DisplayError> {
        let a = pixel_address(x, y)?;
        self.pages[a.page][a.byte] |= a.mask;
        Ok(())
    }

    pub fn is_lit(&self, x: usize, y: usize) -> bool {
        pixel_address(x, y).is_ok_and(|a| self.pages[a.page][a.byte] & a.mask != 0)
    }

    /// Zero the mapped bytes of each page in `pages`.
    pub fn clear_pages(&mut self, pages: RangeInclusive<usize>) {
        for p in pages {
            self.pages[p][FIRST_MAPPED..FIRST_MAPPED + LCD_WIDTH].fill(0);
        }
    }

    /// Write `text` into one page starting at pixel column `start_col`, one
    /// 5-column glyph plus a blank column per character. Characters that
    /// would cross the right panel edge are dropped. Returns glyphs drawn.
    pub fn draw_text(&mut self, page: usize, start_col: usize, text: &str) -> Result<usize, DisplayError> {
        if page >= LCD_COLUMNS {
            return Err(DisplayError::Page(page));
        }
        let fit = LCD_WIDTH.saturating_sub(start_col) / GLYPH_ADVANCE;
        let mut drawn = 0;
        for (k, c) in text.chars().take(fit).enumerate() {
            let g = font::glyph(c);
            for col in 0..GLYPH_ADVANCE {
                let x = start_col + k * GLYPH_ADVANCE + col;
                // Glyph bit 0 is the top row; the top row of a page is its MSB.
                let bits = g.get(col).map_or(0, |b| b.reverse_bits());
                self.pages[page][(LCD_WIDTH - 1) - x + FIRST_MAPPED] = bits;
            }
            drawn += 1;
        }
        Ok(drawn)
    }

    /// Plot 128 samples into the waveform region, normalized by the probe's
    /// calibration and scaled about the vertical center, connecting adjacent
    /// columns with vertical spans.
    pub fn plot_data(&mut self, samples: &[u16], cal: CalRange, cfg: &PlotConfig) -> Result<(), DisplayError> {
        let rows = waveform_rows(samples, cal, cfg.vscale)?;
        for (x, &y) in rows.iter().enumerate() {
            let neighbour = if x == 0 { rows.get(1) } else { rows.get(x - 1) };
            let other = neighbour.copied().unwrap_or(y);
            for row in y.min(other)..=y.max(other) {
                self.plot_at(x, row)?;
            }
        }
        Ok(())
    }

    /// Contiguous page-major dump, as streamed to the controller.
    pub fn serialize(&self) -> Vec<u8> {
        self.pages.iter().flatten().copied().collect()
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, DisplayError> {
        if bytes.len() != LCD_TOTAL_DATA {
            return Err(DisplayError::Length(bytes.len()));
        }
        let mut fb = Self::new();
        for (page, chunk) in fb.pages.iter_mut().zip(bytes.chunks_exact(LCD_WIDTH_LOGICAL)) {
            page.copy_from_slice(chunk);
        }
        Ok(fb)
    }

    /// Binary PBM of the visible panel, top row first.
    pub fn to_pbm(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(PBM_HEADER.len() + LCD_WIDTH * LCD_HEIGHT / 8);
        out.extend_from_slice(PBM_HEADER);
        for y in 0..LCD_HEIGHT {
            for chunk in 0..LCD_WIDTH / 8 {
                let byte = (0..8).fold(0u8, |acc, b| acc | (u8::from(self.is_lit(chunk * 8 + b, y)) << (7 - b)));
                out.push(byte);
            }
        }
        out
    }

    /// Lit panel pixels, recovered through the inverse map.
    pub fn lit_pixels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (page, bytes) in self.pages.iter().enumerate() {
            for (byte, &v) in bytes.iter().enumerate() {
                for bit in 0..8 {
                    if v & (1 << bit) != 0 {
                        out.extend(pixel_at(page, byte, bit));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Free-function form of [`FrameBuffer::serialize`].
pub fn serialize(fb: &FrameBuffer) -> Vec<u8> {
    fb.serialize()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VScale {
    #[serde(rename = "1/4")]
    Quarter,
    #[serde(rename = "1/2")]
    Half,
    #[default]
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "4")]
    Four,
}

impl VScale {
    pub const ALL: [VScale; 5] = [Self::Quarter, Self::Half, Self::One, Self::Two, Self::Four];

    pub fn factor(self) -> f64 {
        match self {
            Self::Quarter => 0.25,
            Self::Half => 0.5,
            Self::One => 1.0,
            Self::Two => 2.0,
            Self::Four => 4.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Quarter => "1/4",
            Self::Half => "1/2",
            Self::One => "1",
            Self::Two => "2",
            Self::Four => "4",
        }
    }

    fn position(self) -> usize {
        Self::ALL.iter().position(|&s| s == self).expect("listed")
    }

    /// Next larger factor, saturating.
    pub fn up(self) -> Self {
        Self::ALL[(self.position() + 1).min(Self::ALL.len() - 1)]
    }

    pub fn down(self) -> Self {
        Self::ALL[self.position().saturating_sub(1)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalRange {
    pub high: u16,
    pub low: u16,
}

impl Default for CalRange {
    fn default() -> Self {
        Self { high: 4095, low: 0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlotConfig {
    pub vscale: VScale,
}

/// Panel row for every sample: `63 - round(centered * 47)`.
pub fn waveform_rows(samples: &[u16], cal: CalRange, vscale: VScale) -> Result<Vec<usize>, DisplayError> {
    if cal.high <= cal.low {
        return Err(DisplayError::DegenerateCalibration { high: cal.high, low: cal.low });
    }
    let span = f64::from(cal.high - cal.low);
    let top = (WAVEFORM_ROWS - 1) as f64;
    Ok(samples
        .iter()
        .take(LCD_WIDTH)
        .map(|&s| {
            let normalized = ((f64::from(s) - f64::from(cal.low)) / span).clamp(0.0, 1.0);
            let centered = ((normalized - 0.5) * vscale.factor() + 0.5).clamp(0.0, 1.0);
            (LCD_HEIGHT - 1) - (centered * top).round() as usize
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn plot_at_corner_examples() {
        let mut fb = FrameBuffer::new();
        fb.plot_at(0, 0).unwrap();
        assert_eq!(fb.page(7)[129], 0x80);
        let mut fb = FrameBuffer::new();
        fb.plot_at(127, 63).unwrap();
        assert_eq!(fb.page(0)[2], 0x01);
        let mut fb = FrameBuffer::new();
        fb.plot_at(0, 8).unwrap();
        assert_eq!(fb.page(6)[129], 0x80);
        assert!(fb.plot_at(128, 0).is_err());
        assert!(fb.plot_at(0, 64).is_err());
    }

    #[test]
    fn plot_at_is_idempotent() {
        let mut a = FrameBuffer::new();
        a.plot_at(40, 33).unwrap();
        let b = a.clone();
        a.plot_at(40, 33).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pixel_map_is_a_bijection_onto_mapped_bytes() {
        let mut seen = HashSet::new();
        for x in 0..LCD_WIDTH {
            for y in 0..LCD_HEIGHT {
                let a = pixel_address(x, y).unwrap();
                assert!((2..=129).contains(&a.byte));
                assert!(seen.insert((a.page, a.byte, a.mask)));
                assert_eq!(pixel_at(a.page, a.byte, a.mask.trailing_zeros()), Some((x, y)));
            }
        }
        assert_eq!(seen.len(), 8192);
    }

    #[test]
    fn draw_text_examples() {
        let mut fb = FrameBuffer::new();
        assert_eq!(fb.draw_text(0, 0, "A").unwrap(), 1);
        let a = font::glyph('A');
        for (col, g) in a.iter().enumerate() {
            assert_eq!(fb.page(0)[129 - col], g.reverse_bits());
        }
        assert_eq!(fb.page(0)[124], 0);
        assert!(fb.page(0)[..124].iter().all(|&b| b == 0));

        let mut fb = FrameBuffer::new();
        fb.draw_text(3, 0, "").unwrap();
        assert_eq!(fb, FrameBuffer::new());

        assert_eq!(FrameBuffer::new().draw_text(0, 0, "ABCDEFGHIJKLMNOPQRSTUV").unwrap(), 21);
        assert!(FrameBuffer::new().draw_text(8, 0, "A").is_err());
    }

    #[test]
    fn text_reads_upright_through_the_pixel_map() {
        let mut fb = FrameBuffer::new();
        fb.draw_text(7, 0, "I").unwrap();
        // 'I' column 2 is 0x7F: rows 0..6 lit at x = 2.
        for y in 0..7 {
            assert!(fb.is_lit(2, y), "row {y}");
        }
        assert!(!fb.is_lit(2, 7));
        // Top serif across x = 1..=3 on row 0.
        assert!(fb.is_lit(1, 0) && fb.is_lit(3, 0) && !fb.is_lit(1, 3));
    }

    #[test]
    fn text_never_touches_unmapped_bytes() {
        let mut fb = FrameBuffer::new();
        for p in 0..8 {
            fb.draw_text(p, 0, &"\u{7f}".repeat(30)).unwrap();
        }
        for p in 0..8 {
            let page = fb.page(p);
            assert_eq!([page[0], page[1], page[130], page[131]], [0; 4]);
        }
    }

    fn lit_rows(fb: &FrameBuffer, x: usize) -> Vec<usize> {
        (0..LCD_HEIGHT).filter(|&y| fb.is_lit(x, y)).collect()
    }

    #[test]
    fn full_scale_plots_at_region_top() {
        let mut fb = FrameBuffer::new();
        fb.plot_data(&[4095; 128], CalRange::default(), &PlotConfig::default()).unwrap();
        for x in 0..128 {
            assert_eq!(lit_rows(&fb, x), vec![16]);
        }
    }

    #[test]
    fn midpoint_is_fixed_by_every_scale() {
        let cal = CalRange { high: 4094, low: 0 };
        let mut rows = HashSet::new();
        for vscale in VScale::ALL {
            let mut fb = FrameBuffer::new();
            fb.plot_data(&[2047; 128], cal, &PlotConfig { vscale }).unwrap();
            for x in 0..128 {
                let r = lit_rows(&fb, x);
                assert_eq!(r.len(), 1);
                rows.insert(r[0]);
            }
        }
        // 63 - round(0.5 * 47) = 63 - 24
        assert_eq!(rows.into_iter().collect::<Vec<_>>(), vec![39]);
    }

    #[test]
    fn alternating_extremes_fill_every_column() {
        let samples: Vec<u16> = (0..128).map(|i| if i % 2 == 0 { 0 } else { 4095 }).collect();
        let mut fb = FrameBuffer::new();
        fb.plot_data(&samples, CalRange::default(), &PlotConfig::default()).unwrap();
        for x in 0..128 {
            assert_eq!(lit_rows(&fb, x), (16..=63).collect::<Vec<_>>());
        }
    }

    #[test]
    fn degenerate_calibration_rejected() {
        let mut fb = FrameBuffer::new();
        let cal = CalRange { high: 100, low: 100 };
        assert_eq!(
            fb.plot_data(&[0; 128], cal, &PlotConfig::default()),
            Err(DisplayError::DegenerateCalibration { high: 100, low: 100 })
        );
    }

    #[test]
    fn serialize_offsets() {
        let fb = FrameBuffer::new();
        assert_eq!(serialize(&fb), vec![0; 1056]);
        let mut fb = FrameBuffer::new();
        fb.plot_at(0, 0).unwrap();
        assert_eq!(fb.serialize()[7 * 132 + 129], 0x80);
        let mut fb = FrameBuffer::new();
        fb.plot_at(127, 63).unwrap();
        assert_eq!(fb.serialize()[2], 0x01);
        assert!(FrameBuffer::deserialize(&[0; 10]).is_err());
    }

    #[test]
    fn pbm_layout() {
        let mut fb = FrameBuffer::new();
        fb.plot_at(0, 0).unwrap();
        fb.plot_at(127, 63).unwrap();
        let pbm = fb.to_pbm();
        assert_eq!(pbm.len(), PBM_HEADER.len() + 1024);
        assert_eq!(pbm[PBM_HEADER.len()], 0x80);
        assert_eq!(*pbm.last().unwrap(), 0x01);
    }

    #[test]
    fn vscale_steps_saturate() {
        assert_eq!(VScale::Four.up(), VScale::Four);
        assert_eq!(VScale::Quarter.down(), VScale::Quarter);
        assert_eq!(VScale::One.up(), VScale::Two);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn serialize_round_trips(pixels in proptest::collection::vec((0usize..128, 0usize..64), 0..300)) {
                let mut fb = FrameBuffer::new();
                for (x, y) in pixels {
                    fb.plot_at(x, y).unwrap();
                }
                prop_assert_eq!(FrameBuffer::deserialize(&fb.serialize()).unwrap(), fb);
            }

            #[test]
            fn plot_data_stays_in_waveform_pages(
                samples in proptest::collection::vec(0u16..4096, 128),
                low in 0u16..2000,
                width in 1u16..2000,
                scale in 0usize..5,
            ) {
                let mut fb = FrameBuffer::new();
                let cal = CalRange { low, high: low + width };
                fb.plot_data(&samples, cal, &PlotConfig { vscale: VScale::ALL[scale] }).unwrap();
                for p in STATUS_PAGES {
                    prop_assert!(fb.page(p).iter().all(|&b| b == 0));
                }
                for p in 0..8 {
                    let page = fb.page(p);
                    prop_assert_eq!([page[0], page[1], page[130], page[131]], [0; 4]);
                }
            }
        }
    }
}
