//! Finite lattice regions, bit-packed occupancy fields, the Kob-Andersen
//! kinetic constraint and legal transitions.
//!
//! Site indexing is row-major with axis 0 fastest:
//! `index = Σ coords[i] · stride[i]`, `stride[0] = 1`,
//! `stride[i+1] = stride[i] · extent[i]`. Traces and config files serialise
//! against this order, so it is part of the on-disk contract.

use crate::rng::Rng;
use rand::Rng as _;
use thiserror::Error;

pub type Coords = Vec<i64>;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("site {0:?} outside the region")]
    OutOfRegion(Coords),
    #[error("edge endpoints are not nearest neighbours: {0:?} ~ {1:?}")]
    NotNeighbours(Coords, Coords),
    #[error("swap endpoint lies in the occupied exterior: {0:?}")]
    ExteriorEndpoint(Coords),
    #[error("constraint violated at edge {0:?} ~ {1:?}")]
    ConstraintViolated(Coords, Coords),
    #[error("no particle exchange: endpoints hold equal values")]
    NoParticleExchange,
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Boundary convention of a finite region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Periodic wrapping on every axis (used by the stationary dynamics).
    Torus,
    /// Every site outside the region reads as occupied (the paper's
    /// finite-volume convention for constraints).
    OccupiedExterior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeGeometry {
    extents: Vec<usize>,
    strides: Vec<usize>,
    boundary: Boundary,
    n_sites: usize,
}

impl LatticeGeometry {
    pub fn new(extents: &[usize], boundary: Boundary) -> Result<Self, LatticeError> {
        if extents.len() < 2 {
            return Err(LatticeError::BadParameter(format!(
                "dimension must be >= 2, got {}",
                extents.len()
            )));
        }
        if extents.iter().any(|&e| e == 0) {
            return Err(LatticeError::BadParameter("every extent must be >= 1".into()));
        }
        let mut strides = Vec::with_capacity(extents.len());
        let mut acc = 1usize;
        for &e in extents {
            strides.push(acc);
            acc = acc.checked_mul(e).ok_or_else(|| {
                LatticeError::BadParameter("region too large to index".into())
            })?;
        }
        Ok(Self { extents: extents.to_vec(), strides, boundary, n_sites: acc })
    }

    pub fn torus(extents: &[usize]) -> Self {
        Self::new(extents, Boundary::Torus).expect("valid extents")
    }

    pub fn occupied_exterior(extents: &[usize]) -> Self {
        Self::new(extents, Boundary::OccupiedExterior).expect("valid extents")
    }

    pub fn d(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Is `coords` inside the region (before any wrapping)?
    pub fn contains(&self, coords: &[i64]) -> bool {
        coords.len() == self.d()
            && coords
                .iter()
                .zip(&self.extents)
                .all(|(&c, &e)| c >= 0 && (c as usize) < e)
    }

    /// Index of a site. Wraps under torus; `None` outside an
    /// occupied-exterior region.
    pub fn index(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.d() {
            return None;
        }
        let mut idx = 0usize;
        for i in 0..self.d() {
            let e = self.extents[i] as i64;
            let c = match self.boundary {
                Boundary::Torus => coords[i].rem_euclid(e),
                Boundary::OccupiedExterior => {
                    if coords[i] < 0 || coords[i] >= e {
                        return None;
                    }
                    coords[i]
                }
            };
            idx += c as usize * self.strides[i];
        }
        Some(idx)
    }

    /// Index of an in-region site, erroring outside.
    pub fn index_checked(&self, coords: &[i64]) -> Result<usize, LatticeError> {
        if coords.len() != self.d() {
            return Err(LatticeError::DimensionMismatch { expected: self.d(), got: coords.len() });
        }
        self.index(coords).ok_or_else(|| LatticeError::OutOfRegion(coords.to_vec()))
    }

    pub fn coords(&self, mut idx: usize) -> Coords {
        let mut c = vec![0i64; self.d()];
        for i in 0..self.d() {
            c[i] = (idx % self.extents[i]) as i64;
            idx /= self.extents[i];
        }
        c
    }

    /// The 2d neighbour slots of `x` in coordinate form, exterior ones
    /// flagged. Under torus the flag is always false.
    pub fn neighbors(&self, x: &[i64]) -> Result<Vec<Neighbor>, LatticeError> {
        if x.len() != self.d() {
            return Err(LatticeError::DimensionMismatch { expected: self.d(), got: x.len() });
        }
        let mut out = Vec::with_capacity(2 * self.d());
        for axis in 0..self.d() {
            for step in [1i64, -1] {
                let mut c = x.to_vec();
                c[axis] += step;
                let exterior = match self.boundary {
                    Boundary::Torus => {
                        let e = self.extents[axis] as i64;
                        c[axis] = c[axis].rem_euclid(e);
                        false
                    }
                    Boundary::OccupiedExterior => !self.contains(&c),
                };
                out.push(Neighbor { coords: c, exterior });
            }
        }
        Ok(out)
    }

    /// Neighbour indices of site `idx`; `None` marks an exterior slot.
    pub fn neighbor_indices(&self, idx: usize) -> Vec<Option<usize>> {
        let c = self.coords(idx);
        self.neighbors(&c)
            .expect("coords from index")
            .into_iter()
            .map(|n| if n.exterior { None } else { self.index(&n.coords) })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighbor {
    pub coords: Coords,
    pub exterior: bool,
}

/// Precomputed neighbour table for hot loops. Slot `site * 2d + j` holds the
/// neighbour index or `EXTERIOR`.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    slots: Vec<u32>,
    deg: usize,
}

pub const EXTERIOR: u32 = u32::MAX;

impl NeighborTable {
    pub fn build(geom: &LatticeGeometry) -> Self {
        let deg = 2 * geom.d();
        let mut slots = vec![EXTERIOR; geom.n_sites() * deg];
        for idx in 0..geom.n_sites() {
            for (j, n) in geom.neighbor_indices(idx).into_iter().enumerate() {
                slots[idx * deg + j] = n.map_or(EXTERIOR, |v| v as u32);
            }
        }
        Self { slots, deg }
    }

    #[inline]
    pub fn deg(&self) -> usize {
        self.deg
    }

    #[inline]
    pub fn of(&self, idx: usize) -> &[u32] {
        &self.slots[idx * self.deg..(idx + 1) * self.deg]
    }
}

/// An undirected nearest-neighbour edge, stored by site index. Direction of
/// particle motion is recovered from occupancies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    /// Build from coordinates, checking adjacency (after torus wrapping).
    pub fn from_coords(
        geom: &LatticeGeometry,
        a: &[i64],
        b: &[i64],
    ) -> Result<Self, LatticeError> {
        let ia = geom.index_checked(a)?;
        let ib = geom.index_checked(b)?;
        if !geom.neighbor_indices(ia).iter().any(|n| *n == Some(ib)) {
            return Err(LatticeError::NotNeighbours(a.to_vec(), b.to_vec()));
        }
        Ok(Self { a: ia, b: ib })
    }
}

/// Bit-packed occupancy field on a finite region (1 = occupied, 0 = empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    geom: LatticeGeometry,
    words: Vec<u64>,
}

impl Configuration {
    pub fn empty(geom: LatticeGeometry) -> Self {
        let words = vec![0u64; geom.n_sites().div_ceil(64)];
        Self { geom, words }
    }

    pub fn full(geom: LatticeGeometry) -> Self {
        let mut cfg = Self::empty(geom);
        for i in 0..cfg.geom.n_sites() {
            cfg.set(i, true);
        }
        cfg
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geom
    }

    #[inline]
    pub fn occupied(&self, idx: usize) -> bool {
        (self.words[idx >> 6] >> (idx & 63)) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, idx: usize, val: bool) {
        let w = &mut self.words[idx >> 6];
        if val {
            *w |= 1u64 << (idx & 63);
        } else {
            *w &= !(1u64 << (idx & 63));
        }
    }

    /// Occupancy by coordinates: exterior sites read occupied under the
    /// occupied-exterior convention, torus coordinates wrap.
    pub fn occupied_at(&self, coords: &[i64]) -> bool {
        match self.geom.index(coords) {
            Some(i) => self.occupied(i),
            None => true,
        }
    }

    pub fn particle_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn empty_count(&self) -> usize {
        self.geom.n_sites() - self.particle_count()
    }

    /// Sites currently occupied.
    pub fn particles(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.geom.n_sites()).filter(move |&i| self.occupied(i))
    }

    /// i.i.d. sample of the product measure: each site occupied with
    /// probability `1 − q` (q is the vacancy density).
    pub fn sample(geom: LatticeGeometry, q: f64, rng: &mut Rng) -> Result<Self, LatticeError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(LatticeError::BadParameter(format!("q must be in (0,1), got {q}")));
        }
        let mut cfg = Self::empty(geom);
        for i in 0..cfg.geom.n_sites() {
            if rng.gen::<f64>() >= q {
                cfg.set(i, true);
            }
        }
        Ok(cfg)
    }

    /// Number of empty neighbours of `x` excluding the slot pointing at
    /// `exclude` (pass `usize::MAX` to exclude nothing). Exterior slots are
    /// occupied and never count.
    #[inline]
    pub fn empty_neighbors_excluding(
        &self,
        table: &NeighborTable,
        x: usize,
        exclude: usize,
    ) -> usize {
        let mut cnt = 0;
        for &n in table.of(x) {
            if n == EXTERIOR {
                continue;
            }
            let n = n as usize;
            if n != exclude && !self.occupied(n) {
                cnt += 1;
            }
        }
        cnt
    }

    /// The KA-kf constraint c_xy: each endpoint needs at least k−1 empty
    /// neighbours besides the other endpoint.
    pub fn constraint(&self, table: &NeighborTable, k: u32, e: Edge) -> bool {
        let need = (k - 1) as usize;
        self.empty_neighbors_excluding(table, e.a, e.b) >= need
            && self.empty_neighbors_excluding(table, e.b, e.a) >= need
    }

    /// Constraint by coordinates, without a prebuilt table (cold paths).
    pub fn constraint_at(&self, k: u32, a: &[i64], b: &[i64]) -> Result<bool, LatticeError> {
        let need = (k - 1) as usize;
        let ia = self.geom.index_checked(a)?;
        let ib = self.geom.index_checked(b)?;
        let count = |center: &[i64], other: usize| -> Result<usize, LatticeError> {
            let mut cnt = 0;
            for n in self.geom.neighbors(center)? {
                if n.exterior {
                    continue;
                }
                let i = self.geom.index(&n.coords).expect("interior neighbour");
                if i != other && !self.occupied(i) {
                    cnt += 1;
                }
            }
            Ok(cnt)
        };
        Ok(count(a, ib)? >= need && count(b, ia)? >= need)
    }

    /// Exchange the two endpoint values. Pure: returns a new configuration.
    pub fn swap(&self, e: Edge) -> Self {
        let mut out = self.clone();
        out.swap_in_place(e);
        out
    }

    #[inline]
    pub(crate) fn swap_in_place(&mut self, e: Edge) {
        let va = self.occupied(e.a);
        let vb = self.occupied(e.b);
        self.set(e.a, vb);
        self.set(e.b, va);
    }

    /// A legal KA-kf transition: constraint satisfied and exactly one
    /// endpoint occupied. Returns the swapped configuration.
    pub fn apply_legal(
        &self,
        table: &NeighborTable,
        k: u32,
        e: Edge,
    ) -> Result<Self, LatticeError> {
        self.check_legal(table, k, e)?;
        Ok(self.swap(e))
    }

    pub(crate) fn check_legal(
        &self,
        table: &NeighborTable,
        k: u32,
        e: Edge,
    ) -> Result<(), LatticeError> {
        if !(2..=self.geom.d() as u32).contains(&k) {
            return Err(LatticeError::BadParameter(format!(
                "k must be in [2, d]={}, got {k}",
                self.geom.d()
            )));
        }
        if !self.constraint(table, k, e) {
            return Err(LatticeError::ConstraintViolated(
                self.geom.coords(e.a),
                self.geom.coords(e.b),
            ));
        }
        if self.occupied(e.a) == self.occupied(e.b) {
            return Err(LatticeError::NoParticleExchange);
        }
        Ok(())
    }

    /// Copy the axis-aligned window with corner `lo` and the given shape
    /// into a fresh occupied-exterior configuration. Sites read through the
    /// source's own boundary convention.
    pub fn window(&self, lo: &[i64], shape: &[usize]) -> Configuration {
        let geom = LatticeGeometry::new(shape, Boundary::OccupiedExterior).expect("valid window");
        let mut out = Configuration::empty(geom);
        let n = out.geom.n_sites();
        for i in 0..n {
            let local = out.geom.coords(i);
            let src: Coords = local.iter().zip(lo).map(|(&c, &l)| c + l).collect();
            out.set(i, self.occupied_at(&src));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Plain-text serialisation: header (d, extents, boundary, k) then one ASCII
// row of 0/1 per lattice line along axis 0, lines in index order.
// ---------------------------------------------------------------------------

pub fn write_config(cfg: &Configuration, k: u32) -> String {
    let g = cfg.geometry();
    let mut s = String::new();
    s.push_str("ka-config v1\n");
    s.push_str(&format!("d {}\n", g.d()));
    let ext: Vec<String> = g.extents().iter().map(|e| e.to_string()).collect();
    s.push_str(&format!("extent {}\n", ext.join(" ")));
    s.push_str(&format!(
        "boundary {}\n",
        match g.boundary() {
            Boundary::Torus => "torus",
            Boundary::OccupiedExterior => "occupied-exterior",
        }
    ));
    s.push_str(&format!("k {k}\n"));
    let line_len = g.extents()[0];
    for i in 0..g.n_sites() {
        s.push(if cfg.occupied(i) { '1' } else { '0' });
        if (i + 1) % line_len == 0 {
            s.push('\n');
        }
    }
    s
}

pub fn read_config(text: &str) -> Result<(Configuration, u32), LatticeError> {
    let mut lines = text.lines();
    let parse = |e: &str| LatticeError::Parse(e.to_string());
    let magic = lines.next().ok_or_else(|| parse("empty file"))?;
    if magic.trim() != "ka-config v1" {
        return Err(parse("missing 'ka-config v1' header"));
    }
    let mut d = None;
    let mut extents: Option<Vec<usize>> = None;
    let mut boundary = None;
    let mut k = None;
    for _ in 0..4 {
        let line = lines.next().ok_or_else(|| parse("truncated header"))?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("d") => {
                d = Some(
                    it.next()
                        .and_then(|v| v.parse::<usize>().ok())
                        .ok_or_else(|| parse("bad d"))?,
                )
            }
            Some("extent") => {
                let v: Result<Vec<usize>, _> = it.map(|t| t.parse::<usize>()).collect();
                extents = Some(v.map_err(|_| parse("bad extent"))?);
            }
            Some("boundary") => {
                boundary = Some(match it.next() {
                    Some("torus") => Boundary::Torus,
                    Some("occupied-exterior") => Boundary::OccupiedExterior,
                    _ => return Err(parse("bad boundary")),
                })
            }
            Some("k") => {
                k = Some(
                    it.next()
                        .and_then(|v| v.parse::<u32>().ok())
                        .ok_or_else(|| parse("bad k"))?,
                )
            }
            other => return Err(parse(&format!("unexpected header field {other:?}"))),
        }
    }
    let d = d.ok_or_else(|| parse("missing d"))?;
    let extents = extents.ok_or_else(|| parse("missing extent"))?;
    let boundary = boundary.ok_or_else(|| parse("missing boundary"))?;
    let k = k.ok_or_else(|| parse("missing k"))?;
    if extents.len() != d {
        return Err(parse("extent count does not match d"));
    }
    let geom = LatticeGeometry::new(&extents, boundary)?;
    let mut cfg = Configuration::empty(geom);
    let mut idx = 0usize;
    for line in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        for ch in line.chars() {
            if idx >= cfg.geometry().n_sites() {
                return Err(parse("too many occupancy characters"));
            }
            match ch {
                '0' => {}
                '1' => cfg.set(idx, true),
                _ => return Err(parse(&format!("bad occupancy character {ch:?}"))),
            }
            idx += 1;
        }
    }
    if idx != cfg.geometry().n_sites() {
        return Err(parse("occupancy data truncated"));
    }
    Ok((cfg, k))
}
