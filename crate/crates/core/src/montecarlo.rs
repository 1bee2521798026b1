//! Frame-level simulation with explicit user positions.
//!
//! Each frame draws the active users of both cells, schedules them with
//! [`schedule_frame`], and evaluates every slot from the physical link
//! powers. Interference follows antenna coverage: a UAV reaches (and hears)
//! the ground in its own cell, and in the other cell only from the high
//! altitude. UAV-UAV interference is never modelled.
//!
//! Frame `i` draws from its own ChaCha stream derived from `(seed, i)`, so
//! results do not depend on the number of worker threads.

use rand::seq::{index, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use crate::channel::{antenna_gain, rx_power_ground_to_ground, rx_power_ground_to_uav, rx_power_uav_to_ground, Shadowing};
use crate::error::{Error, Result};
use crate::pairing::{schedule_frame, Cell, ServiceUnit};
use crate::params::System;
use crate::sinr::{Altitude, Configuration, LinkSpin};
use crate::throughput::{diagonal_weights, skellam_pmf, LoadDistribution};

/// z-value of a two-sided 95% normal interval.
const Z_95: f64 = 1.959_963_984_540_054;

/// Stream reserved for the fixed user layout.
const LAYOUT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationModel {
    /// K ~ Pois(lambda), redrawn until it lies in 1..=N.
    TruncatedPoisson,
    /// Each of the N users is active with probability lambda / N.
    BinomialPerUser,
    /// The load law behind the closed-form average: Skellam imbalance, then
    /// K2 drawn from the binomial diagonal weights. Imbalances with no
    /// admissible K2 yield an empty frame.
    SkellamBinomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// Every admissible (K1, K2) once per replicate, weighted as in the
    /// closed-form average.
    Exhaustive,
    Sampled(ActivationModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceModel {
    /// The distances the SINR lower bounds assume.
    WorstCase,
    /// Distances from the drawn positions.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShadowingModel {
    Mean,
    /// Independent draw per link per slot.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    IndexOrder,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Fresh positions every frame.
    PerFrame,
    /// One layout of N users per cell for the whole run; active users are a
    /// random subset.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub distances: DistanceModel,
    pub shadowing: ShadowingModel,
    pub activation: Activation,
    pub matching: Matching,
    pub layout: Layout,
}

impl SimOptions {
    /// Same assumptions as the closed form; reproduces it exactly.
    pub fn matched() -> Self {
        Self {
            distances: DistanceModel::WorstCase,
            shadowing: ShadowingModel::Mean,
            activation: Activation::Exhaustive,
            matching: Matching::IndexOrder,
            layout: Layout::PerFrame,
        }
    }

    /// Exact distances with sampled shadowing and sampled loads.
    pub fn physical() -> Self {
        Self {
            distances: DistanceModel::Exact,
            shadowing: ShadowingModel::Sampled,
            activation: Activation::Sampled(ActivationModel::SkellamBinomial),
            matching: Matching::IndexOrder,
            layout: Layout::PerFrame,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserLayout {
    pub cell1: Vec<Point>,
    pub cell2: Vec<Point>,
}

fn cell_center(cell: Cell, sys: &System) -> Point {
    match cell {
        Cell::One => Point { x: 0.0, y: 0.0 },
        Cell::Two => Point { x: sys.params().d_sep, y: 0.0 },
    }
}

fn uniform_in_disc<R: Rng + ?Sized>(center: Point, radius: f64, rng: &mut R) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    Point { x: center.x + r * theta.cos(), y: center.y + r * theta.sin() }
}

impl UserLayout {
    /// `n1` and `n2` users uniformly in the two discs.
    pub fn draw<R: Rng + ?Sized>(n1: usize, n2: usize, sys: &System, rng: &mut R) -> Self {
        let r = sys.params().d_0;
        let c1 = cell_center(Cell::One, sys);
        let c2 = cell_center(Cell::Two, sys);
        Self {
            cell1: (0..n1).map(|_| uniform_in_disc(c1, r, rng)).collect(),
            cell2: (0..n2).map(|_| uniform_in_disc(c2, r, rng)).collect(),
        }
    }

    pub fn cell(&self, cell: Cell) -> &[Point] {
        match cell {
            Cell::One => &self.cell1,
            Cell::Two => &self.cell2,
        }
    }
}

/// Draw the active-user counts (K1, K2). (0, 0) denotes an empty frame.
pub fn draw_activation<R: Rng + ?Sized>(
    loads: &LoadDistribution,
    sys: &System,
    model: ActivationModel,
    rng: &mut R,
) -> Result<(u32, u32)> {
    let n = sys.n_users();
    let poisson = |l: f64| Poisson::new(l).map_err(|_| Error::NonPositiveRate(l));
    match model {
        ActivationModel::TruncatedPoisson => {
            let one = |l: f64, rng: &mut R| -> Result<u32> {
                let d = poisson(l)?;
                loop {
                    let k = d.sample(rng);
                    if k >= 1.0 && k <= f64::from(n) {
                        return Ok(k as u32);
                    }
                }
            };
            let k1 = one(loads.lambda1, rng)?;
            let k2 = one(loads.lambda2, rng)?;
            Ok((k1, k2))
        }
        ActivationModel::BinomialPerUser => {
            for l in [loads.lambda1, loads.lambda2] {
                if l > f64::from(n) {
                    return Err(Error::RateExceedsPopulation { lambda: l, n_users: n });
                }
            }
            let b1 = Binomial::new(u64::from(n), loads.lambda1 / f64::from(n)).expect("p in [0, 1]");
            let b2 = Binomial::new(u64::from(n), loads.lambda2 / f64::from(n)).expect("p in [0, 1]");
            Ok((b1.sample(rng) as u32, b2.sample(rng) as u32))
        }
        ActivationModel::SkellamBinomial => {
            let k1 = poisson(loads.lambda1)?.sample(rng);
            let k2 = poisson(loads.lambda2)?.sample(rng);
            let k = k1 as i64 - k2 as i64;
            let weights = diagonal_weights(n, k);
            if weights.is_empty() {
                return Ok((0, 0));
            }
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = weights[weights.len() - 1].0;
            for &(cand, w) in &weights {
                acc += w;
                if u < acc {
                    pick = cand;
                    break;
                }
            }
            Ok(((i64::from(pick) + k) as u32, pick))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UserRef {
    pub cell: Cell,
    pub index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Downlink,
    Uplink,
}

/// Rates achieved in one slot and the users served in it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotEntry {
    /// Sum over the active links, bits/s/Hz.
    pub rate: f64,
    pub served: [Option<(UserRef, Direction)>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRealization {
    pub k1: u32,
    pub k2: u32,
    pub ledger: Vec<SlotEntry>,
    pub seed: u64,
    pub stream: u64,
}

impl FrameRealization {
    pub fn slot_count(&self) -> usize {
        self.ledger.len()
    }

    /// Sum of slot rates over the number of slots; 0 for an empty frame.
    pub fn throughput(&self) -> f64 {
        if self.ledger.is_empty() {
            0.0
        } else {
            self.ledger.iter().map(|s| s.rate).sum::<f64>() / self.ledger.len() as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSummary {
    pub mean: f64,
    /// Half-width of the normal-approximation 95% interval (NaN for one sample).
    pub half_width: f64,
    /// Frames, or replicates for exhaustive activation.
    pub samples: u64,
}

impl SimSummary {
    pub fn ci_low(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn ci_high(&self) -> f64 {
        self.mean + self.half_width
    }

    fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let half_width = if values.len() < 2 {
            f64::NAN
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Z_95 * (var / n).sqrt()
        };
        Self { mean, half_width, samples: values.len() as u64 }
    }
}

fn other(cell: Cell) -> Cell {
    match cell {
        Cell::One => Cell::Two,
        Cell::Two => Cell::One,
    }
}

#[derive(Debug, Clone, Copy)]
struct ActiveLink {
    uav: Cell,
    user: UserRef,
    spin: LinkSpin,
}

impl ActiveLink {
    fn direction(&self, slot: usize) -> Direction {
        let first = match self.spin {
            LinkSpin::DownlinkFirst => Direction::Downlink,
            LinkSpin::UplinkFirst => Direction::Uplink,
        };
        match (first, slot) {
            (d, 0) => d,
            (Direction::Downlink, _) => Direction::Uplink,
            (Direction::Uplink, _) => Direction::Downlink,
        }
    }
}

struct FrameContext<'a> {
    sys: &'a System,
    cfg: &'a Configuration,
    distances: DistanceModel,
    positions: Option<(&'a UserLayout, &'a [u32], &'a [u32])>,
}

impl FrameContext<'_> {
    fn altitude(&self, uav: Cell) -> f64 {
        self.uav_level(uav).meters(self.sys)
    }

    fn uav_level(&self, uav: Cell) -> Altitude {
        match uav {
            Cell::One => self.cfg.h1,
            Cell::Two => self.cfg.h2,
        }
    }

    /// Whether the UAV's main lobe contains `cell`.
    fn covers(&self, uav: Cell, cell: Cell) -> bool {
        uav == cell || self.uav_level(uav) == Altitude::High
    }

    fn position(&self, user: UserRef) -> Point {
        let (layout, idx1, idx2) = self.positions.expect("exact distances need positions");
        let slot = match user.cell {
            Cell::One => idx1[user.index as usize],
            Cell::Two => idx2[user.index as usize],
        };
        layout.cell(user.cell)[slot as usize]
    }

    fn slant(&self, uav: Cell, user: UserRef) -> f64 {
        let h = self.altitude(uav);
        h.hypot(self.position(user).dist(cell_center(uav, self.sys)))
    }

    fn serving_distance(&self, uav: Cell, user: UserRef) -> f64 {
        match self.distances {
            DistanceModel::WorstCase => self.sys.lobe_edge_distance(self.altitude(uav)),
            DistanceModel::Exact => self.slant(uav, user),
        }
    }

    fn interferer_distance(&self, uav: Cell, user: UserRef) -> f64 {
        match self.distances {
            DistanceModel::WorstCase => self.altitude(uav),
            DistanceModel::Exact => self.slant(uav, user),
        }
    }

    fn ground_distance(&self, a: UserRef, b: UserRef) -> f64 {
        match self.distances {
            DistanceModel::WorstCase => self.sys.derived().d_min,
            DistanceModel::Exact => self.position(a).dist(self.position(b)),
        }
    }

    fn downlink_power(&self, uav: Cell, d: f64, shadowing: &mut Shadowing<'_>) -> f64 {
        let gain = antenna_gain(d, self.altitude(uav), self.sys).expect("slant range is at least the altitude");
        if gain == 0.0 {
            0.0
        } else {
            rx_power_uav_to_ground(d, self.sys, shadowing)
        }
    }

    fn sinr(&self, link: &ActiveLink, co: Option<&ActiveLink>, slot: usize, sh: &mut Shadowing<'_>) -> f64 {
        let noise = self.sys.params().noise_power;
        match link.direction(slot) {
            Direction::Downlink => {
                let signal = self.downlink_power(link.uav, self.serving_distance(link.uav, link.user), sh);
                let interference = match co {
                    Some(c) if c.direction(slot) == Direction::Downlink => {
                        if self.covers(c.uav, link.user.cell) {
                            self.downlink_power(c.uav, self.interferer_distance(c.uav, link.user), sh)
                        } else {
                            0.0
                        }
                    }
                    Some(c) => rx_power_ground_to_ground(self.ground_distance(c.user, link.user), self.sys, sh),
                    None => 0.0,
                };
                signal / (interference + noise)
            }
            Direction::Uplink => {
                let signal = rx_power_ground_to_uav(self.serving_distance(link.uav, link.user), self.sys, sh);
                let interference = match co {
                    Some(c) if c.direction(slot) == Direction::Uplink && self.covers(link.uav, c.user.cell) => {
                        rx_power_ground_to_uav(self.interferer_distance(link.uav, c.user), self.sys, sh)
                    }
                    _ => 0.0,
                };
                signal / (interference + noise)
            }
        }
    }
}

fn link_spin(cfg: &Configuration, uav: Cell) -> LinkSpin {
    let (p1, p2) = cfg.link_spins();
    match uav {
        Cell::One => p1,
        Cell::Two => p2,
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Simulate one frame with `k1` and `k2` active users.
pub fn simulate_frame(
    cfg: &Configuration,
    k1: u32,
    k2: u32,
    sys: &System,
    opts: &SimOptions,
    fixed_layout: Option<&UserLayout>,
    rng: &mut dyn RngCore,
) -> Vec<SlotEntry> {
    let n = sys.n_users();
    let exact = opts.distances == DistanceModel::Exact;

    // Which layout slot each active user occupies.
    let (layout_owned, idx1, idx2): (Option<UserLayout>, Vec<u32>, Vec<u32>) = if !exact {
        (None, Vec::new(), Vec::new())
    } else {
        match (opts.layout, fixed_layout) {
            (Layout::Fixed, Some(_)) => {
                let pick = |k: u32, rng: &mut dyn RngCore| -> Vec<u32> {
                    let mut v: Vec<u32> = index::sample(rng, n as usize, k as usize).iter().map(|i| i as u32).collect();
                    v.sort_unstable();
                    v
                };
                let a = pick(k1, rng);
                let b = pick(k2, rng);
                (None, a, b)
            }
            _ => (Some(UserLayout::draw(k1 as usize, k2 as usize, sys, rng)), (0..k1).collect(), (0..k2).collect()),
        }
    };
    let layout = layout_owned.as_ref().or(fixed_layout);

    let mut users1: Vec<u32> = (0..k1).collect();
    let mut users2: Vec<u32> = (0..k2).collect();
    if opts.matching == Matching::Randomized {
        users1.shuffle(rng);
        users2.shuffle(rng);
    }

    let ctx = FrameContext {
        sys,
        cfg,
        distances: opts.distances,
        positions: layout.map(|l| (l, idx1.as_slice(), idx2.as_slice())),
    };

    let mut mean = Shadowing::MeanDb;
    let mut sampled;
    let shadowing: &mut Shadowing<'_> = match opts.shadowing {
        ShadowingModel::Mean => &mut mean,
        ShadowingModel::Sampled => {
            sampled = Shadowing::Sampled(rng);
            &mut sampled
        }
    };

    let plan = schedule_frame(&users1, &users2, cfg);
    let mut ledger = Vec::with_capacity(plan.slot_count());
    for unit in &plan.units {
        let make = |uav: Cell, cell: Cell, index: u32| ActiveLink {
            uav,
            user: UserRef { cell, index },
            spin: link_spin(cfg, uav),
        };
        let links: [Option<ActiveLink>; 2] = match *unit {
            ServiceUnit::CrossCell { user1, user2 } => {
                [Some(make(Cell::One, Cell::One, user1)), Some(make(Cell::Two, Cell::Two, user2))]
            }
            ServiceUnit::SameCell { cell, own, helped } => {
                [Some(make(cell, cell, own)), Some(make(other(cell), cell, helped))]
            }
            ServiceUnit::Individual { cell, user } => [Some(make(cell, cell, user)), None],
        };
        for slot in 0..2 {
            let mut rate = 0.0;
            let mut served = [None, None];
            for i in 0..2 {
                let Some(link) = links[i].as_ref() else { continue };
                let co = links[1 - i].as_ref();
                rate += log2_1p(ctx.sinr(link, co, slot, shadowing));
                served[i] = Some((link.user, link.direction(slot)));
            }
            ledger.push(SlotEntry { rate, served });
        }
    }
    ledger
}

fn frame_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One sampled frame: activation draw followed by [`simulate_frame`].
pub fn realize_frame(
    cfg: &Configuration,
    loads: &LoadDistribution,
    sys: &System,
    opts: &SimOptions,
    model: ActivationModel,
    fixed_layout: Option<&UserLayout>,
    seed: u64,
    stream: u64,
) -> Result<FrameRealization> {
    let mut rng = frame_rng(seed, stream);
    let (k1, k2) = draw_activation(loads, sys, model, &mut rng)?;
    let ledger = simulate_frame(cfg, k1, k2, sys, opts, fixed_layout, &mut rng);
    Ok(FrameRealization { k1, k2, ledger, seed, stream })
}

/// Admissible (K1, K2, weight) cells of the closed-form average, in
/// ascending k then K2.
pub fn weighted_cells(loads: &LoadDistribution, sys: &System) -> Result<Vec<(u32, u32, f64)>> {
    let n = i64::from(sys.n_users());
    let mut cells = Vec::new();
    for k in -n..=n {
        let p = skellam_pmf(k, loads.lambda1, loads.lambda2)?;
        for (k2, w) in diagonal_weights(sys.n_users(), k) {
            cells.push(((i64::from(k2) + k) as u32, k2, p * w));
        }
    }
    Ok(cells)
}

/// Empirical average throughput of `cfg` over `n_frames` frames (or
/// replicates of the exhaustive sweep).
pub fn simulate(
    cfg: &Configuration,
    loads: &LoadDistribution,
    sys: &System,
    n_frames: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<SimSummary> {
    if n_frames == 0 {
        return Err(Error::InvalidValue { key: "frames".into(), reason: "at least one frame is required".into() });
    }
    let fixed = (opts.layout == Layout::Fixed).then(|| {
        let n = sys.n_users() as usize;
        UserLayout::draw(n, n, sys, &mut frame_rng(seed, LAYOUT_STREAM))
    });

    let values: Vec<f64> = match opts.activation {
        Activation::Sampled(model) => (0..n_frames)
            .into_par_iter()
            .map(|i| realize_frame(cfg, loads, sys, opts, model, fixed.as_ref(), seed, i).map(|f| f.throughput()))
            .collect::<Result<_>>()?,
        Activation::Exhaustive => {
            let cells = weighted_cells(loads, sys)?;
            let per_rep = cells.len() as u64;
            (0..n_frames)
                .into_par_iter()
                .map(|rep| {
                    cells
                        .iter()
                        .enumerate()
                        .map(|(c, &(k1, k2, w))| {
                            let mut rng = frame_rng(seed, rep * per_rep + c as u64);
                            let ledger = simulate_frame(cfg, k1, k2, sys, opts, fixed.as_ref(), &mut rng);
                            let f = FrameRealization { k1, k2, ledger, seed, stream: 0 };
                            w * f.throughput()
                        })
                        .sum::<f64>()
                })
                .collect()
        }
    };
    let summary = SimSummary::from_samples(&values);
    if !summary.mean.is_finite() {
        return Err(Error::Numeric(format!("simulated throughput of {cfg} is {}", summary.mean)));
    }
    Ok(summary)
}
