//! Uniform-grid store for pellets, the only entity kind numerous enough to
//! need a broad phase.

use crate::entity::Pellet;
use crate::geometry::Vec2;

const BUCKET_SIZE: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct PelletStore {
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<Pellet>>,
    len: usize,
}

impl PelletStore {
    pub fn new(width: f64, height: f64) -> Self {
        let cols = ((width / BUCKET_SIZE).ceil() as usize).max(1);
        let rows = ((height / BUCKET_SIZE).ceil() as usize).max(1);
        Self {
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn bucket_coords(&self, p: Vec2) -> (usize, usize) {
        let cx = ((p.x / BUCKET_SIZE).floor().max(0.0) as usize).min(self.cols - 1);
        let cy = ((p.y / BUCKET_SIZE).floor().max(0.0) as usize).min(self.rows - 1);
        (cx, cy)
    }

    pub fn insert(&mut self, pellet: Pellet) {
        let (cx, cy) = self.bucket_coords(pellet.position);
        self.buckets[cy * self.cols + cx].push(pellet);
        self.len += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = &Pellet> {
        self.buckets.iter().flat_map(|b| b.iter())
    }

    /// Pellets sorted by id serial.
    pub fn sorted(&self) -> Vec<Pellet> {
        let mut all: Vec<Pellet> = self.iter().copied().collect();
        all.sort_by_key(|p| p.id.serial);
        all
    }

    fn bucket_range(&self, lo: Vec2, hi: Vec2) -> (usize, usize, usize, usize) {
        let (x0, y0) = self.bucket_coords(lo);
        let (x1, y1) = self.bucket_coords(hi);
        (x0, y0, x1, y1)
    }

    /// Visits every pellet whose centre may lie within `reach` of `center`.
    pub fn for_each_near(&self, center: Vec2, reach: f64, mut f: impl FnMut(&Pellet)) {
        let (x0, y0, x1, y1) = self.bucket_range(
            Vec2::new(center.x - reach, center.y - reach),
            Vec2::new(center.x + reach, center.y + reach),
        );
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for p in &self.buckets[cy * self.cols + cx] {
                    f(p);
                }
            }
        }
    }

    /// Pellets with any part inside the axis-aligned rectangle.
    pub fn for_each_in_rect(&self, lo: Vec2, hi: Vec2, mut f: impl FnMut(&Pellet)) {
        let (x0, y0, x1, y1) = self.bucket_range(
            Vec2::new(lo.x - 1.0, lo.y - 1.0),
            Vec2::new(hi.x + 1.0, hi.y + 1.0),
        );
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for p in &self.buckets[cy * self.cols + cx] {
                    f(p);
                }
            }
        }
    }

    /// Removes and returns every pellet for which `pred` holds among those
    /// within `reach` of `center`.
    pub fn remove_near(
        &mut self,
        center: Vec2,
        reach: f64,
        mut pred: impl FnMut(&Pellet) -> bool,
    ) -> Vec<Pellet> {
        let (x0, y0, x1, y1) = self.bucket_range(
            Vec2::new(center.x - reach, center.y - reach),
            Vec2::new(center.x + reach, center.y + reach),
        );
        let mut removed = Vec::new();
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let bucket = &mut self.buckets[cy * self.cols + cx];
                let mut i = 0;
                while i < bucket.len() {
                    if pred(&bucket[i]) {
                        removed.push(bucket.remove(i));
                    } else {
                        i += 1;
                    }
                }
            }
        }
        self.len -= removed.len();
        removed
    }

    pub fn any_near(&self, center: Vec2, reach: f64, mut pred: impl FnMut(&Pellet) -> bool) -> bool {
        let mut hit = false;
        self.for_each_near(center, reach, |p| {
            if !hit && pred(p) {
                hit = true;
            }
        });
        hit
    }

    /// Nearest pellet to `point`; ties go to the lowest id serial.
    pub fn nearest(&self, point: Vec2) -> Option<Pellet> {
        if self.len == 0 {
            return None;
        }
        let (bx, by) = self.bucket_coords(point);
        let max_ring = self.cols.max(self.rows);
        let mut best: Option<(f64, Pellet)> = None;
        for ring in 0..=max_ring {
            let x0 = bx.saturating_sub(ring);
            let y0 = by.saturating_sub(ring);
            let x1 = (bx + ring).min(self.cols - 1);
            let y1 = (by + ring).min(self.rows - 1);
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    let on_ring = cx.abs_diff(bx) == ring || cy.abs_diff(by) == ring;
                    if !on_ring {
                        continue;
                    }
                    for p in &self.buckets[cy * self.cols + cx] {
                        let d = p.position.distance_squared(point);
                        let better = match &best {
                            None => true,
                            Some((bd, bp)) => d < *bd || (d == *bd && p.id.serial < bp.id.serial),
                        };
                        if better {
                            best = Some((d, *p));
                        }
                    }
                }
            }
            if let Some((bd, _)) = best {
                let bound = ring as f64 * BUCKET_SIZE;
                if bd.sqrt() < bound {
                    break;
                }
            }
        }
        best.map(|(_, p)| p)
    }
}
