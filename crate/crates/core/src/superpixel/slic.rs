//! Localized k-means over (L, a, b, x, y).

use std::collections::VecDeque;

use crate::imagedata::LabImage;

/// A cluster center in color and image space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seed {
    pub lab: [f64; 3],
    pub x: f64,
    pub y: f64,
}

/// Row structure of the initial seed lattice. Seeds are numbered row by
/// row; row `i` owns ids `starts[i]..starts[i + 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedGrid {
    starts: Vec<usize>,
}

impl SeedGrid {
    fn new(rows: usize, n: usize) -> Self {
        let starts = (0..=rows).map(|i| i * n / rows).collect();
        Self { starts }
    }

    pub fn rows(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn row_len(&self, row: usize) -> usize {
        self.starts[row + 1] - self.starts[row]
    }

    pub fn len(&self) -> usize {
        *self.starts.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(row, column)` of a seed id.
    pub fn position(&self, id: usize) -> (usize, usize) {
        let row = self.starts.partition_point(|&s| s <= id) - 1;
        (row, id - self.starts[row])
    }

    pub fn id(&self, row: usize, col: usize) -> usize {
        self.starts[row] + col
    }

    /// The up-to-3x3 block of seed ids around `id` on the lattice.
    pub fn neighborhood(&self, id: usize) -> Vec<usize> {
        let (row, col) = self.position(id);
        let own_len = self.row_len(row) as f64;
        let mut out = Vec::with_capacity(9);
        for r in row.saturating_sub(1)..(row + 2).min(self.rows()) {
            let len = self.row_len(r);
            let center = if r == row {
                col
            } else {
                let c = ((col as f64 + 0.5) * len as f64 / own_len - 0.5).round();
                (c.max(0.0) as usize).min(len - 1)
            };
            for c in center.saturating_sub(1)..(center + 2).min(len) {
                out.push(self.id(r, c));
            }
        }
        out
    }
}

/// Hard superpixel assignment together with its cluster centers.
#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) labels: Vec<u32>,
    pub(crate) seeds: Vec<Seed>,
    pub(crate) step: f64,
    pub(crate) grid: SeedGrid,
}

impl Segmentation {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, x: usize, y: usize) -> usize {
        self.labels[y * self.width + x] as usize
    }

    pub fn seeds(&self) -> &[Seed] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    /// Expected superpixel spacing `sqrt(H * W / N)`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn grid(&self) -> &SeedGrid {
        &self.grid
    }

    /// Member count per superpixel.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.seeds.len()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// Combined color + normalized spatial distance.
pub fn slic_distance(lab: [f64; 3], x: f64, y: f64, seed: &Seed, m: f64, step: f64) -> f64 {
    let dl = lab[0] - seed.lab[0];
    let da = lab[1] - seed.lab[1];
    let db = lab[2] - seed.lab[2];
    let dx = x - seed.x;
    let dy = y - seed.y;
    (dl * dl + da * da + db * db).sqrt() + m * (dx * dx + dy * dy).sqrt() / step
}

fn lattice_rows(height: usize, width: usize, n: usize) -> usize {
    let rows =
        ((n as f64 * height as f64 / width as f64).sqrt().round() as usize).clamp(1, height.min(n));
    if n.div_ceil(rows) > width {
        n.div_ceil(width)
    } else {
        rows
    }
}

fn gradient(lab: &LabImage, x: usize, y: usize) -> f64 {
    let here = lab.get(x, y);
    let sq = |o: [f64; 3]| {
        (o[0] - here[0]).powi(2) + (o[1] - here[1]).powi(2) + (o[2] - here[2]).powi(2)
    };
    let gx = if x + 1 < lab.width() {
        sq(lab.get(x + 1, y))
    } else {
        0.0
    };
    let gy = if y + 1 < lab.height() {
        sq(lab.get(x, y + 1))
    } else {
        0.0
    };
    gx + gy
}

/// Places exactly `n` seeds on a row lattice with spacing about
/// `sqrt(H * W / n)`, nudges each to the lowest-gradient pixel of its 3x3
/// neighborhood, and assigns initial labels.
///
/// Rows receive `floor((i + 1) n / rows) - floor(i n / rows)` seeds, so
/// rows of unequal length stagger naturally.
///
/// # Panics
///
/// If `n` is zero or exceeds the pixel count.
pub fn slic_init(lab: &LabImage, n: usize) -> Segmentation {
    let (width, height) = (lab.width(), lab.height());
    assert!(
        n >= 1 && n <= width * height,
        "superpixel count {n} out of range"
    );
    let step = ((width * height) as f64 / n as f64).sqrt();
    let rows = lattice_rows(height, width, n);
    let grid = SeedGrid::new(rows, n);

    let mut occupied = vec![false; width * height];
    let mut pixels = Vec::with_capacity(n);
    for r in 0..rows {
        let y = (((r as f64 + 0.5) * height as f64 / rows as f64).floor() as usize).min(height - 1);
        let len = grid.row_len(r);
        for c in 0..len {
            let x =
                (((c as f64 + 0.5) * width as f64 / len as f64).floor() as usize).min(width - 1);
            occupied[y * width + x] = true;
            pixels.push((x, y));
        }
    }

    for p in pixels.iter_mut() {
        let (x0, y0) = *p;
        let mut best = (gradient(lab, x0, y0), x0, y0);
        for y in y0.saturating_sub(1)..(y0 + 2).min(height) {
            for x in x0.saturating_sub(1)..(x0 + 2).min(width) {
                let g = gradient(lab, x, y);
                if g < best.0 && !occupied[y * width + x] {
                    best = (g, x, y);
                }
            }
        }
        if (best.1, best.2) != (x0, y0) {
            occupied[y0 * width + x0] = false;
            occupied[best.2 * width + best.1] = true;
            *p = (best.1, best.2);
        }
    }

    let seeds = pixels
        .into_iter()
        .map(|(x, y)| Seed {
            lab: lab.get(x, y),
            x: x as f64,
            y: y as f64,
        })
        .collect();

    let mut seg = Segmentation {
        width,
        height,
        labels: vec![0; width * height],
        seeds,
        step,
        grid,
    };
    // Initial labels use the default compactness m = 1.
    assign(&mut seg, lab, 1.0);
    seg
}

/// Windowed assignment: each pixel goes to the closest seed among those
/// whose `2S x 2S` window covers it; uncovered pixels search all seeds.
fn assign(seg: &mut Segmentation, lab: &LabImage, m: f64) {
    let (width, height, step) = (seg.width, seg.height, seg.step);
    let mut best = vec![f64::INFINITY; width * height];
    for (id, seed) in seg.seeds.iter().enumerate() {
        let x0 = (seed.x - step).ceil().max(0.0) as usize;
        let y0 = (seed.y - step).ceil().max(0.0) as usize;
        let x1 = ((seed.x + step).floor() as usize).min(width - 1);
        let y1 = ((seed.y + step).floor() as usize).min(height - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let i = y * width + x;
                let d = slic_distance(lab.pixels()[i], x as f64, y as f64, seed, m, step);
                if d < best[i] {
                    best[i] = d;
                    seg.labels[i] = id as u32;
                }
            }
        }
    }
    for (i, b) in best.iter().enumerate() {
        if b.is_infinite() {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            let mut nearest = (f64::INFINITY, 0u32);
            for (id, seed) in seg.seeds.iter().enumerate() {
                let d = slic_distance(lab.pixels()[i], x, y, seed, m, step);
                if d < nearest.0 {
                    nearest = (d, id as u32);
                }
            }
            seg.labels[i] = nearest.1;
        }
    }
}

/// Moves every non-empty seed to the mean of its members.
fn update_seeds(seg: &mut Segmentation, lab: &LabImage) {
    let k = seg.seeds.len();
    let mut sums = vec![[0.0f64; 5]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in seg.labels.iter().enumerate() {
        let f = lab.pixels()[i];
        let s = &mut sums[l as usize];
        s[0] += f[0];
        s[1] += f[1];
        s[2] += f[2];
        s[3] += (i % seg.width) as f64;
        s[4] += (i / seg.width) as f64;
        counts[l as usize] += 1;
    }
    for ((seed, s), &c) in seg.seeds.iter_mut().zip(&sums).zip(&counts) {
        if c > 0 {
            let c = c as f64;
            *seed = Seed {
                lab: [s[0] / c, s[1] / c, s[2] / c],
                x: s[3] / c,
                y: s[4] / c,
            };
        }
    }
}

/// One assignment + update round, without connectivity enforcement.
pub fn slic_step(seg: &mut Segmentation, lab: &LabImage, m: f64) {
    assign(seg, lab, m);
    update_seeds(seg, lab);
}

/// Runs `iters` clustering rounds, then enforces connectivity and refreshes
/// the seeds from the final labels.
///
/// # Panics
///
/// If `m` is not positive or the segmentation does not match `lab`.
pub fn slic_iterate(seg: &Segmentation, lab: &LabImage, m: f64, iters: usize) -> Segmentation {
    assert!(m > 0.0, "compactness must be positive");
    assert_eq!((seg.width, seg.height), (lab.width(), lab.height()));
    let mut out = seg.clone();
    for _ in 0..iters {
        slic_step(&mut out, lab, m);
    }
    enforce_connectivity(&mut out);
    update_seeds(&mut out, lab);
    out
}

struct Components {
    of_pixel: Vec<usize>,
    members: Vec<Vec<usize>>,
    label: Vec<u32>,
}

fn components(seg: &Segmentation) -> Components {
    let (w, h) = (seg.width, seg.height);
    let mut of_pixel = vec![usize::MAX; w * h];
    let mut members = Vec::new();
    let mut label = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if of_pixel[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        let l = seg.labels[start];
        let mut list = Vec::new();
        of_pixel[start] = id;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            list.push(p);
            for q in neighbors4(p, w, h) {
                if of_pixel[q] == usize::MAX && seg.labels[q] == l {
                    of_pixel[q] = id;
                    queue.push_back(q);
                }
            }
        }
        members.push(list);
        label.push(l);
    }
    Components {
        of_pixel,
        members,
        label,
    }
}

fn neighbors4(p: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (p % w, p / w);
    [
        (x > 0).then(|| p - 1),
        (x + 1 < w).then(|| p + 1),
        (y > 0).then(|| p - w),
        (y + 1 < h).then(|| p + w),
    ]
    .into_iter()
    .flatten()
}

/// Keeps the largest 4-connected piece of every superpixel and merges every
/// other piece into its largest adjacent region. Superpixels left without
/// pixels then claim the pixel nearest their seed from a donor that can
/// spare one.
pub fn enforce_connectivity(seg: &mut Segmentation) {
    let (w, h) = (seg.width, seg.height);
    let mut comps = components(seg);
    let k = seg.seeds.len();

    let mut keeper = vec![usize::MAX; k];
    for (id, list) in comps.members.iter().enumerate() {
        let l = comps.label[id] as usize;
        if keeper[l] == usize::MAX || list.len() > comps.members[keeper[l]].len() {
            keeper[l] = id;
        }
    }
    let mut orphans: Vec<usize> = (0..comps.members.len())
        .filter(|&id| keeper[comps.label[id] as usize] != id)
        .collect();
    orphans.sort_by_key(|&id| (comps.members[id].len(), comps.members[id][0]));

    for id in orphans {
        let mut target: Option<usize> = None;
        for &p in &comps.members[id] {
            for q in neighbors4(p, w, h) {
                let c = comps.of_pixel[q];
                if c == id {
                    continue;
                }
                let better = match target {
                    None => true,
                    Some(t) => {
                        let (lc, lt) = (comps.members[c].len(), comps.members[t].len());
                        lc > lt || (lc == lt && c < t)
                    }
                };
                if better {
                    target = Some(c);
                }
            }
        }
        // A component with no foreign neighbor covers the whole image.
        let Some(t) = target else { continue };
        let moved = std::mem::take(&mut comps.members[id]);
        let new_label = comps.label[t];
        for &p in &moved {
            comps.of_pixel[p] = t;
            seg.labels[p] = new_label;
        }
        comps.members[t].extend(moved);
    }

    let mut sizes = seg.sizes();
    for s in 0..k {
        if sizes[s] > 0 {
            continue;
        }
        let seed = seg.seeds[s];
        let donor = (0..w * h)
            .filter(|&p| sizes[seg.labels[p] as usize] > 1)
            .min_by(|&a, &b| {
                let da = ((a % w) as f64 - seed.x).powi(2) + ((a / w) as f64 - seed.y).powi(2);
                let db = ((b % w) as f64 - seed.x).powi(2) + ((b / w) as f64 - seed.y).powi(2);
                da.total_cmp(&db).then(a.cmp(&b))
            });
        if let Some(p) = donor {
            sizes[seg.labels[p] as usize] -= 1;
            seg.labels[p] = s as u32;
            sizes[s] = 1;
        }
    }
}
