//! Raster types and the binary PNM codecs (P5 in/out, P6 out).
//!
//! Row 0 is the top of the image. Every raster is row-major.

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::DimensionMismatch(format!(
            "{width}x{height} raster needs {} values, got {len}",
            width.saturating_mul(height)
        )));
    }
    Ok(())
}

/// 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Intensities as reals, the clustering engines' input vector.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| f64::from(p)).collect()
    }

    pub fn to_float(&self) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            pixels: self.to_f64_vec(),
        }
    }
}

/// Real-valued image, the diffusion intermediate.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl FloatImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite value at pixel {i}"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, pixels.len());
        Self {
            width,
            height,
            pixels,
        }
    }
}

/// Foreground/background raster; `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width.saturating_mul(height)])
    }

    /// Foreground wherever `pred` holds for the pixel value.
    pub fn from_gray(img: &GrayImage, pred: impl Fn(u8) -> bool) -> Self {
        Self {
            width: img.width,
            height: img.height,
            bits: img.pixels.iter().map(|&p| pred(p)).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub(crate) fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn same_shape(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// True when every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.same_shape(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Foreground coordinates as `(row, col)`.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / w, i % w))
    }

    /// 0/255 grayscale rendering for writing as PGM.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }
}

/// Component labels; 0 is background and the used labels are always `0..=L`
/// without gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    max_label: u32,
}

impl LabelMap {
    /// Builds a label map, compacting the non-zero labels onto `1..=L` while
    /// keeping their relative order.
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        check_dims(width, height, labels.len())?;
        let mut used: Vec<u32> = labels.iter().copied().filter(|&l| l != 0).collect();
        used.sort_unstable();
        used.dedup();
        let contiguous = used.iter().enumerate().all(|(i, &l)| l as usize == i + 1);
        let labels = if contiguous {
            labels
        } else {
            labels
                .into_iter()
                .map(|l| {
                    if l == 0 {
                        0
                    } else {
                        used.binary_search(&l).unwrap() as u32 + 1
                    }
                })
                .collect()
        };
        Ok(Self {
            width,
            height,
            labels,
            max_label: used.len() as u32,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Number of distinct non-zero labels.
    pub fn max_label(&self) -> u32 {
        self.max_label
    }

    /// Grayscale rendering with label k stored as pixel value k.
    pub fn to_gray(&self) -> Result<GrayImage> {
        if self.max_label > 255 {
            return Err(Error::InvalidParams(format!(
                "{} labels do not fit an 8-bit raster",
                self.max_label
            )));
        }
        Ok(GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.labels.iter().map(|&l| l as u8).collect(),
        })
    }

    /// Foreground mask of every non-zero label.
    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.labels.iter().map(|&l| l != 0).collect(),
        }
    }
}

pub type Rgb = [u8; 3];

/// Overlay colors indexed by label. Entry 0 is never drawn; entries 1..=5
/// are L5..L1.
pub const DEFAULT_PALETTE: [Rgb; 8] = [
    [0, 0, 0],
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
];

/// Splits a PNM header into tokens. Returns the tokens and the offset of
/// the single whitespace byte that ends the last one.
fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<&[u8]>, usize)> {
    let mut tokens = Vec::with_capacity(count);
    let mut pos = 0;
    while tokens.len() < count {
        match bytes.get(pos) {
            None => {
                return Err(Error::BadHeader(format!(
                    "header ended after {} of {count} fields",
                    tokens.len()
                )))
            }
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            Some(b'#') => {
                while pos < bytes.len() && bytes[pos] != b'\n' && bytes[pos] != b'\r' {
                    pos += 1;
                }
            }
            Some(_) => {
                let start = pos;
                while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                    pos += 1;
                }
                tokens.push(&bytes[start..pos]);
            }
        }
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => Ok((tokens, pos)),
        _ => Err(Error::BadHeader(
            "missing whitespace after the maxval field".into(),
        )),
    }
}

fn parse_field(token: &[u8], name: &str) -> Result<usize> {
    let text =
        std::str::from_utf8(token).map_err(|_| Error::BadHeader(format!("{name} is not ASCII")))?;
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::BadHeader(format!("{name} {text:?} is not a number")));
    }
    let value: usize = text
        .parse()
        .map_err(|_| Error::BadHeader(format!("{name} {text:?} out of range")))?;
    if value == 0 {
        return Err(Error::BadHeader(format!("{name} must be positive")));
    }
    Ok(value)
}

struct PnmHeader {
    width: usize,
    height: usize,
    payload_offset: usize,
}

fn read_pnm_header(bytes: &[u8], magic: &'static str) -> Result<PnmHeader> {
    if bytes.len() < 2 || &bytes[..2] != magic.as_bytes() {
        return Err(Error::BadMagic { expected: magic });
    }
    let rest = &bytes[2..];
    match rest.first() {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        _ => return Err(Error::BadMagic { expected: magic }),
    }
    let (tokens, end) = header_tokens(rest, 3)?;
    let width = parse_field(tokens[0], "width")?;
    let height = parse_field(tokens[1], "height")?;
    let maxval = parse_field(tokens[2], "maxval")?;
    if maxval > 255 {
        return Err(Error::BadHeader(format!(
            "maxval {maxval} exceeds 255; only 8-bit rasters are supported"
        )));
    }
    Ok(PnmHeader {
        width,
        height,
        payload_offset: 2 + end + 1,
    })
}

fn payload<'a>(bytes: &'a [u8], header: &PnmHeader, channels: usize) -> Result<&'a [u8]> {
    let expected = header
        .width
        .checked_mul(header.height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::BadHeader("dimensions overflow".into()))?;
    let data = &bytes[header.payload_offset.min(bytes.len())..];
    if data.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: data.len(),
        });
    }
    Ok(&data[..expected])
}

/// Decodes a binary PGM (`P5`, maxval ≤ 255). Bytes past the raster are
/// ignored.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let header = read_pnm_header(bytes, "P5")?;
    let data = payload(bytes, &header, 1)?;
    GrayImage::new(header.width, header.height, data.to_vec())
}

pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Decodes a binary PPM (`P6`) into interleaved RGB triples.
pub fn read_ppm(bytes: &[u8]) -> Result<(usize, usize, Vec<Rgb>)> {
    let header = read_pnm_header(bytes, "P6")?;
    let data = payload(bytes, &header, 3)?;
    let pixels = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Ok((header.width, header.height, pixels))
}

/// Renders labels over the grayscale source as a binary PPM. Background
/// pixels keep their gray value; label k takes `palette[k]`.
pub fn write_ppm_overlay(img: &GrayImage, labels: &LabelMap, palette: &[Rgb]) -> Result<Vec<u8>> {
    if img.width != labels.width || img.height != labels.height {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs labels {}x{}",
            img.width, img.height, labels.width, labels.height
        )));
    }
    if labels.max_label as usize >= palette.len() {
        return Err(Error::PaletteTooSmall {
            len: palette.len(),
            max_label: labels.max_label,
        });
    }
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.reserve(img.pixels.len() * 3);
    for (&g, &l) in img.pixels.iter().zip(&labels.labels) {
        if l == 0 {
            out.extend_from_slice(&[g, g, g]);
        } else {
            out.extend_from_slice(&palette[l as usize]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pgm(header: &str, payload: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(payload);
        v
    }

    #[test]
    fn reads_two_by_two() {
        let img = read_pgm(&pgm("P5 2 2 255\n", &[0, 255, 255, 0])).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 255, 255, 0]);
    }

    #[test]
    fn reads_smallest_file() {
        let img = read_pgm(&pgm("P5 1 1 255\n", &[7])).unwrap();
        assert_eq!(img.pixels(), &[7]);
    }

    #[test]
    fn rejects_other_magic() {
        assert!(matches!(
            read_pgm(&pgm("P6 1 1 255\n", &[1, 2, 3])),
            Err(Error::BadMagic { .. })
        ));
        assert!(matches!(
            read_pgm(&pgm("P2 1 1 255\n", b"7")),
            Err(Error::BadMagic { .. })
        ));
        assert!(matches!(read_pgm(b""), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn rejects_bad_headers() {
        for header in [
            "P5 0 1 255\n",
            "P5 1 0 255\n",
            "P5 -1 1 255\n",
            "P5 x 1 255\n",
            "P5 1 1 0\n",
            "P5 1 1 256\n",
            "P5 1 1 65535\n",
            "P5 1 1",
        ] {
            assert!(
                matches!(read_pgm(&pgm(header, &[0, 0])), Err(Error::BadHeader(_))),
                "{header:?}"
            );
        }
    }

    #[test]
    fn reports_truncation() {
        assert!(matches!(
            read_pgm(&pgm("P5 2 2 255\n", &[1, 2, 3])),
            Err(Error::Truncated {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn skips_comments_and_whitespace_runs() {
        let img = read_pgm(&pgm(
            "P5\n# made by hand\n  3\t# width\n1\r\n255 ",
            &[1, 2, 3, 99, 98],
        ))
        .unwrap();
        assert_eq!(img.pixels(), &[1, 2, 3]);
    }

    #[test]
    fn payload_may_start_with_whitespace_byte() {
        let img = read_pgm(&pgm("P5 2 1 255\n", b" \n")).unwrap();
        assert_eq!(img.pixels(), b" \n");
    }

    #[test]
    fn writes_canonical_header() {
        let img = GrayImage::new(1, 1, vec![0]).unwrap();
        assert_eq!(write_pgm(&img), b"P5\n1 1\n255\n\0".to_vec());
        let img = GrayImage::new(2, 1, vec![10, 20]).unwrap();
        assert_eq!(&write_pgm(&img)[11..], &[10, 20]);
    }

    #[test]
    fn overlay_passes_background_through() {
        let img = GrayImage::new(3, 1, vec![5, 60, 200]).unwrap();
        let labels = LabelMap::zeros(3, 1).unwrap();
        let bytes = write_ppm_overlay(&img, &labels, &DEFAULT_PALETTE).unwrap();
        let (w, h, px) = read_ppm(&bytes).unwrap();
        assert_eq!((w, h), (3, 1));
        assert_eq!(px, vec![[5, 5, 5], [60, 60, 60], [200, 200, 200]]);
    }

    #[test]
    fn overlay_uses_palette_for_labels() {
        let img = GrayImage::new(2, 1, vec![9, 9]).unwrap();
        let labels = LabelMap::new(2, 1, vec![0, 1]).unwrap();
        let palette = [[0, 0, 0], [255, 0, 0]];
        let bytes = write_ppm_overlay(&img, &labels, &palette).unwrap();
        assert_eq!(&bytes[bytes.len() - 6..], &[9, 9, 9, 255, 0, 0]);
    }

    #[test]
    fn overlay_errors() {
        let img = GrayImage::new(2, 1, vec![9, 9]).unwrap();
        let labels = LabelMap::zeros(1, 2).unwrap();
        assert!(matches!(
            write_ppm_overlay(&img, &labels, &DEFAULT_PALETTE),
            Err(Error::DimensionMismatch(_))
        ));
        let labels = LabelMap::new(2, 1, vec![1, 2]).unwrap();
        assert!(matches!(
            write_ppm_overlay(&img, &labels, &[[0, 0, 0], [1, 1, 1]]),
            Err(Error::PaletteTooSmall { .. })
        ));
    }

    #[test]
    fn label_map_is_compacted() {
        let map = LabelMap::new(5, 1, vec![0, 7, 3, 7, 12]).unwrap();
        assert_eq!(map.labels(), &[0, 2, 1, 2, 3]);
        assert_eq!(map.max_label(), 3);
    }

    #[test]
    fn constructors_check_lengths() {
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
        assert!(GrayImage::new(0, 2, vec![]).is_err());
        assert!(BinaryMask::new(1, 2, vec![true]).is_err());
        assert!(FloatImage::new(1, 1, vec![f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn pgm_round_trip(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
            let pixels: Vec<u8> = (0..w * h)
                .map(|i| (seed.rotate_left(i as u32 % 64) ^ i as u64) as u8)
                .collect();
            let img = GrayImage::new(w, h, pixels).unwrap();
            prop_assert_eq!(read_pgm(&write_pgm(&img)).unwrap(), img);
        }

        #[test]
        fn label_map_always_contiguous(raw in proptest::collection::vec(0u32..20, 1..40)) {
            let n = raw.len();
            let map = LabelMap::new(n, 1, raw).unwrap();
            let mut used: Vec<u32> = map.labels().iter().copied().filter(|&l| l > 0).collect();
            used.sort_unstable();
            used.dedup();
            prop_assert_eq!(used, (1..=map.max_label()).collect::<Vec<_>>());
        }
    }
}
