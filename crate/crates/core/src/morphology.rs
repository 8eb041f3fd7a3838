//! Binary post-processing and lumbar labelling.
//!
//! The chain is hole filling, one 3x3 erosion, connected components, an area
//! floor and an aspect-ratio band, after which the surviving bodies are
//! named L5..L1 from the bottom of the image upwards.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LabelMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        const FOUR: [(i64, i64); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const EIGHT: [(i64, i64); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u32> for Connectivity {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        match value {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::InvalidParams(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertebraName {
    L5,
    L4,
    L3,
    L2,
    L1,
}

impl VertebraName {
    /// Bottom-up order.
    pub const ALL: [VertebraName; 5] = [
        VertebraName::L5,
        VertebraName::L4,
        VertebraName::L3,
        VertebraName::L2,
        VertebraName::L1,
    ];

    /// Stable label index in the output map: L5 = 1 .. L1 = 5.
    pub fn index(self) -> u32 {
        self as u32 + 1
    }
}

impl fmt::Display for VertebraName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VertebraName::L5 => "L5",
            VertebraName::L4 => "L4",
            VertebraName::L3 => "L3",
            VertebraName::L2 => "L2",
            VertebraName::L1 => "L1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: u32,
    pub area: usize,
    /// `(min_row, min_col, max_row, max_col)`, inclusive.
    pub bbox: (usize, usize, usize, usize),
    /// `(row, col)`.
    pub centroid: (f64, f64),
    /// Bounding-box columns over rows.
    pub aspect_ratio: f64,
}

impl Component {
    pub fn bbox_rows(&self) -> usize {
        self.bbox.2 - self.bbox.0 + 1
    }

    pub fn bbox_cols(&self) -> usize {
        self.bbox.3 - self.bbox.1 + 1
    }

    /// Header matching [`Component::to_csv_row`].
    pub const CSV_HEADER: &'static str =
        "id,name,area,min_row,min_col,max_row,max_col,centroid_row,centroid_col,aspect_ratio";

    pub fn to_csv_row(&self, name: Option<VertebraName>) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            self.id,
            name.map(|n| n.to_string()).unwrap_or_default(),
            self.area,
            self.bbox.0,
            self.bbox.1,
            self.bbox.2,
            self.bbox.3,
            self.centroid.0,
            self.centroid.1,
            self.aspect_ratio
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorphoParams {
    pub erosion_iterations: usize,
    /// Minimum component area as a fraction of the image area.
    pub min_area_fraction: f64,
    pub aspect_low: f64,
    pub aspect_high: f64,
    pub connectivity: Connectivity,
}

impl Default for MorphoParams {
    fn default() -> Self {
        Self {
            erosion_iterations: 1,
            min_area_fraction: 0.005,
            aspect_low: 1.5,
            aspect_high: 2.0,
            connectivity: Connectivity::Eight,
        }
    }
}

impl MorphoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.aspect_low > 0.0 && self.aspect_low < self.aspect_high) {
            return Err(Error::InvalidParams(format!(
                "aspect band needs 0 < low < high, got [{}, {}]",
                self.aspect_low, self.aspect_high
            )));
        }
        if !(0.0..1.0).contains(&self.min_area_fraction) {
            return Err(Error::InvalidParams(format!(
                "min_area_fraction must lie in [0, 1), got {}",
                self.min_area_fraction
            )));
        }
        Ok(())
    }
}

fn neighbours(
    row: usize,
    col: usize,
    width: usize,
    height: usize,
    conn: Connectivity,
) -> impl Iterator<Item = (usize, usize)> {
    conn.offsets().iter().filter_map(move |&(dr, dc)| {
        let r = row as i64 + dr;
        let c = col as i64 + dc;
        (r >= 0 && c >= 0 && r < height as i64 && c < width as i64)
            .then_some((r as usize, c as usize))
    })
}

/// Converts background not 4-connected to the border into foreground.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut outside = vec![false; bits.len()];
    let mut queue = VecDeque::new();
    for r in 0..h {
        for c in 0..w {
            let border = r == 0 || c == 0 || r == h - 1 || c == w - 1;
            let i = r * w + c;
            if border && !bits[i] {
                outside[i] = true;
                queue.push_back((r, c));
            }
        }
    }
    while let Some((r, c)) = queue.pop_front() {
        for (nr, nc) in neighbours(r, c, w, h, Connectivity::Four) {
            let i = nr * w + nc;
            if !bits[i] && !outside[i] {
                outside[i] = true;
                queue.push_back((nr, nc));
            }
        }
    }
    let mut out = mask.clone();
    for (b, o) in out.bits_mut().iter_mut().zip(outside) {
        *b = !o;
    }
    out
}

/// Erosion by a 3x3 square; pixels outside the image count as background.
pub fn erode(mask: &BinaryMask, iterations: usize) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut current = mask.clone();
    for _ in 0..iterations {
        if current.count() == 0 {
            break;
        }
        let src = current.bits();
        let mut next = vec![false; src.len()];
        for r in 1..h.saturating_sub(1) {
            for c in 1..w.saturating_sub(1) {
                next[r * w + c] =
                    (r - 1..=r + 1).all(|rr| (c - 1..=c + 1).all(|cc| src[rr * w + cc]));
            }
        }
        current = BinaryMask::new(w, h, next).expect("same shape");
    }
    current
}

/// Labels maximal foreground regions 1..=L in row-major order of first
/// encounter.
pub fn connected_components(
    mask: &BinaryMask,
    connectivity: Connectivity,
) -> (LabelMap, Vec<Component>) {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut labels = vec![0u32; bits.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..bits.len() {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        let id = components.len() as u32 + 1;
        labels[start] = id;
        queue.push_back((start / w, start % w));
        let (mut area, mut sum_r, mut sum_c) = (0usize, 0usize, 0usize);
        let mut bbox = (usize::MAX, usize::MAX, 0usize, 0usize);
        while let Some((r, c)) = queue.pop_front() {
            area += 1;
            sum_r += r;
            sum_c += c;
            bbox = (bbox.0.min(r), bbox.1.min(c), bbox.2.max(r), bbox.3.max(c));
            for (nr, nc) in neighbours(r, c, w, h, connectivity) {
                let i = nr * w + nc;
                if bits[i] && labels[i] == 0 {
                    labels[i] = id;
                    queue.push_back((nr, nc));
                }
            }
        }
        let rows = (bbox.2 - bbox.0 + 1) as f64;
        let cols = (bbox.3 - bbox.1 + 1) as f64;
        components.push(Component {
            id,
            area,
            bbox,
            centroid: (sum_r as f64 / area as f64, sum_c as f64 / area as f64),
            aspect_ratio: cols / rows,
        });
    }

    let map = LabelMap::new(w, h, labels).expect("labels are contiguous by construction");
    (map, components)
}

pub fn filter_by_area(
    components: &[Component],
    image_area: usize,
    min_area_fraction: f64,
) -> Vec<Component> {
    let min_area = min_area_fraction * image_area as f64;
    components
        .iter()
        .filter(|c| c.area as f64 >= min_area)
        .cloned()
        .collect()
}

/// Keeps components whose aspect ratio lies in `[low, high]`.
pub fn filter_by_aspect_ratio(components: &[Component], low: f64, high: f64) -> Vec<Component> {
    components
        .iter()
        .filter(|c| c.aspect_ratio >= low && c.aspect_ratio <= high)
        .cloned()
        .collect()
}

/// Names up to five components L5, L4, .. L1 by descending centroid row.
/// Equal rows fall back to ascending id so the result does not depend on
/// input order.
pub fn label_vertebrae(components: &[Component]) -> Vec<(u32, VertebraName)> {
    let mut order: Vec<&Component> = components.iter().collect();
    order.sort_by(|a, b| b.centroid.0.total_cmp(&a.centroid.0).then(a.id.cmp(&b.id)));
    order
        .into_iter()
        .zip(VertebraName::ALL)
        .map(|(c, name)| (c.id, name))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphologyResult {
    /// Named bodies carry L5 = 1 .. L1 = 5; further kept components follow.
    pub labels: LabelMap,
    /// Kept components, ids matching `labels`, in label order.
    pub components: Vec<Component>,
    pub names: Vec<(u32, VertebraName)>,
}

impl MorphologyResult {
    pub fn name_of(&self, id: u32) -> Option<VertebraName> {
        self.names.iter().find(|(i, _)| *i == id).map(|&(_, n)| n)
    }

    pub fn components_csv(&self) -> String {
        let mut out = String::from(Component::CSV_HEADER);
        out.push('\n');
        for c in &self.components {
            out.push_str(&c.to_csv_row(self.name_of(c.id)));
            out.push('\n');
        }
        out
    }
}

pub fn run_morphology(mask: &BinaryMask, params: &MorphoParams) -> Result<MorphologyResult> {
    params.validate()?;
    let filled = fill_holes(mask);
    let eroded = erode(&filled, params.erosion_iterations);
    let (raw_labels, components) = connected_components(&eroded, params.connectivity);
    let area = mask.width() * mask.height();
    let kept = filter_by_area(&components, area, params.min_area_fraction);
    let kept = filter_by_aspect_ratio(&kept, params.aspect_low, params.aspect_high);
    let names = label_vertebrae(&kept);

    // Named bodies first in L5..L1 order, then the rest bottom-up.
    let mut order: Vec<&Component> = kept.iter().collect();
    order.sort_by(|a, b| b.centroid.0.total_cmp(&a.centroid.0).then(a.id.cmp(&b.id)));
    let mut remap = vec![0u32; components.len() + 1];
    let mut relabeled = Vec::with_capacity(order.len());
    for (slot, c) in order.iter().enumerate() {
        let new_id = slot as u32 + 1;
        remap[c.id as usize] = new_id;
        relabeled.push(Component {
            id: new_id,
            ..(*c).clone()
        });
    }
    let labels: Vec<u32> = raw_labels
        .labels()
        .iter()
        .map(|&l| remap[l as usize])
        .collect();
    let names = names
        .into_iter()
        .map(|(old, name)| (remap[old as usize], name))
        .collect();
    Ok(MorphologyResult {
        labels: LabelMap::new(mask.width(), mask.height(), labels)?,
        components: relabeled,
        names,
    })
}
