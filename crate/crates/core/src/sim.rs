//! Random-walk case study: `N` agents moving on a toroidal grid with a
//! Moore neighbourhood, and a zone whose occupancy `Z` is observed.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::observers::group::{self_evaluate, Group};
use crate::seed::{stream_rng, StreamRng, SIM_STREAM};
use crate::{Error, Result};

pub type AgentId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

/// The eight Moore offsets. "Stay" is not a move.
pub const MOORE_OFFSETS: [(i8, i8); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// A `width x height` torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    width: u32,
    height: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            width: 100,
            height: 100,
        }
    }
}

impl GridSpec {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!(
                "grid must be non-empty, got {width}x{height}"
            )));
        }
        (width as u64)
            .checked_mul(height as u64)
            .filter(|&c| c <= u32::MAX as u64)
            .ok_or_else(|| Error::Config("grid has too many cells".into()))?;
        Ok(Self { width, height })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.x < self.width && cell.y < self.height
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.y as usize * self.width as usize + cell.x as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(
            (index % self.width as usize) as u32,
            (index / self.width as usize) as u32,
        )
    }

    /// Neighbour of `cell` at offset `(dx, dy)`, wrapping around the torus.
    #[inline]
    pub fn offset(&self, cell: Cell, dx: i8, dy: i8) -> Cell {
        Cell::new(wrap(cell.x, dx, self.width), wrap(cell.y, dy, self.height))
    }
}

#[inline]
fn wrap(v: u32, delta: i8, size: u32) -> u32 {
    let v = v as i64 + delta as i64;
    let size = size as i64;
    let v = if v < 0 { v + size } else { v };
    (if v >= size { v - size } else { v }) as u32
}

/// Observed area. Holds a dense membership mask for the hot path and the
/// sorted member cell list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zone {
    grid: GridSpec,
    mask: Vec<bool>,
    cells: Vec<Cell>,
}

impl Zone {
    pub fn empty(grid: GridSpec) -> Self {
        Self {
            grid,
            mask: vec![false; grid.cell_count()],
            cells: Vec::new(),
        }
    }

    pub fn full(grid: GridSpec) -> Self {
        Self::from_mask(grid, vec![true; grid.cell_count()])
    }

    /// Half-open rectangle `[x0, x1) x [y0, y1)`.
    pub fn rect(grid: GridSpec, x0: u32, y0: u32, x1: u32, y1: u32) -> Result<Self> {
        if x0 > x1 || y0 > y1 || x1 > grid.width() || y1 > grid.height() {
            return Err(Error::Config(format!(
                "zone rectangle [{x0}, {x1}) x [{y0}, {y1}) does not fit a {}x{} grid",
                grid.width(),
                grid.height()
            )));
        }
        let mut mask = vec![false; grid.cell_count()];
        for y in y0..y1 {
            for x in x0..x1 {
                mask[grid.index(Cell::new(x, y))] = true;
            }
        }
        Ok(Self::from_mask(grid, mask))
    }

    /// Full-width band of the bottom rows covering `coverage` of the grid,
    /// rounded to whole rows.
    pub fn band(grid: GridSpec, coverage: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&coverage) {
            return Err(Error::Config(format!(
                "zone coverage {coverage} is outside [0, 1]"
            )));
        }
        let rows = (coverage * grid.height() as f64).round() as u32;
        Self::rect(grid, 0, 0, grid.width(), rows)
    }

    /// Compact near-square block anchored at the origin covering exactly
    /// `round(coverage * cells)` cells: full rows of `ceil(sqrt(k))` cells
    /// and one partial row. Its perimeter grows with the square root of the
    /// coverage.
    pub fn block(grid: GridSpec, coverage: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&coverage) {
            return Err(Error::Config(format!(
                "zone coverage {coverage} is outside [0, 1]"
            )));
        }
        let k = (coverage * grid.cell_count() as f64).round() as u64;
        let mut side = (k as f64).sqrt() as u64;
        while side * side < k {
            side += 1;
        }
        let side = side
            .max(k.div_ceil(grid.height() as u64))
            .min(grid.width() as u64)
            .max(1);
        let cells = (0..k).map(|i| Cell::new((i % side) as u32, (i / side) as u32));
        Self::from_cells(grid, cells)
    }

    pub fn from_cells<I: IntoIterator<Item = Cell>>(grid: GridSpec, cells: I) -> Result<Self> {
        let mut mask = vec![false; grid.cell_count()];
        for cell in cells {
            if !grid.contains(cell) {
                return Err(Error::Config(format!(
                    "zone cell ({}, {}) lies outside the grid",
                    cell.x, cell.y
                )));
            }
            mask[grid.index(cell)] = true;
        }
        Ok(Self::from_mask(grid, mask))
    }

    fn from_mask(grid: GridSpec, mask: Vec<bool>) -> Self {
        let cells = mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| grid.cell_at(i))
            .collect::<Vec<_>>();
        Self { grid, mask, cells }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn contains(&self, cell: Cell) -> bool {
        self.grid.contains(cell) && self.mask[self.grid.index(cell)]
    }

    #[inline]
    pub fn contains_index(&self, index: usize) -> bool {
        self.mask[index]
    }

    /// Member cells, in row-major order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Fraction of the grid covered; the stationary expected rate `E(Z)/N`.
    pub fn coverage(&self) -> f64 {
        self.cells.len() as f64 / self.grid.cell_count() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentState {
    pub id: AgentId,
    pub position: Cell,
    /// The agent's own record of its membership in `G`; always false when
    /// the group is not tracked.
    pub in_group: bool,
}

impl AgentState {
    pub fn new(id: AgentId, position: Cell) -> Self {
        Self {
            id,
            position,
            in_group: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub zone: Arc<Zone>,
    pub agents: u32,
    pub steps: u64,
    pub seed: u64,
    /// Maintain per-cell occupancy counters. When off, only the configured
    /// zone's running total is kept.
    pub cell_counters: bool,
}

impl SimConfig {
    pub fn new(grid: GridSpec, zone: Zone, agents: u32) -> Self {
        Self {
            grid,
            zone: Arc::new(zone),
            agents,
            steps: 1000,
            seed: 0,
            cell_counters: true,
        }
    }

    /// Default 100x100 grid with a block zone covering `coverage`.
    pub fn with_coverage(agents: u32, coverage: f64) -> Result<Self> {
        let grid = GridSpec::default();
        Ok(Self::new(grid, Zone::block(grid, coverage)?, agents))
    }

    pub fn steps(mut self, steps: u64) -> Self {
        self.steps = steps;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents == 0 {
            return Err(Error::Config("agent count must be positive".into()));
        }
        if self.steps == 0 {
            return Err(Error::Config("step count must be positive".into()));
        }
        GridSpec::new(self.grid.width(), self.grid.height())?;
        if self.zone.grid() != self.grid {
            return Err(Error::Config("zone was built for a different grid".into()));
        }
        Ok(())
    }
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct SimState {
    grid: GridSpec,
    zone: Arc<Zone>,
    agents: Vec<AgentState>,
    occupancy: Vec<u32>,
    zone_occupancy: u64,
    group: Option<Group>,
    step_index: u64,
    rng: StreamRng,
    /// Scratch list of ids whose membership flipped during a step.
    changed: Vec<AgentId>,
}

/// Place `config.agents` agents uniformly at random. The group `G` is not
/// maintained; see [`SimState::with_group`].
pub fn init_simulation(config: &SimConfig) -> Result<SimState> {
    SimState::new(config, false)
}

impl SimState {
    /// Initialize a run. With `track_group`, the membership rules are
    /// evaluated once for every agent and then after every move.
    pub fn new(config: &SimConfig, track_group: bool) -> Result<Self> {
        config.validate()?;
        let grid = config.grid;
        let cell_count = grid.cell_count();
        let mut rng = stream_rng(config.seed, SIM_STREAM);
        let mut occupancy = if config.cell_counters {
            vec![0u32; cell_count]
        } else {
            Vec::new()
        };
        let mut zone_occupancy = 0;
        let agents = (0..config.agents)
            .map(|id| {
                let index = rng.random_range(0..cell_count as u32) as usize;
                if let Some(c) = occupancy.get_mut(index) {
                    *c += 1;
                }
                zone_occupancy += config.zone.contains_index(index) as u64;
                AgentState::new(id, grid.cell_at(index))
            })
            .collect::<Vec<_>>();
        let mut agents = agents;
        let group = track_group.then(|| initial_group(grid, &config.zone, &mut agents));
        Ok(Self {
            grid,
            zone: Arc::clone(&config.zone),
            agents,
            occupancy,
            zone_occupancy,
            group,
            step_index: 0,
            rng,
            changed: Vec::new(),
        })
    }

    /// Build a state from explicit positions, with a simulation stream
    /// seeded from `seed`.
    pub fn from_positions(
        grid: GridSpec,
        zone: Arc<Zone>,
        positions: &[Cell],
        track_group: bool,
        seed: u64,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Config("agent count must be positive".into()));
        }
        if zone.grid() != grid {
            return Err(Error::Config("zone was built for a different grid".into()));
        }
        let mut occupancy = vec![0u32; grid.cell_count()];
        let mut agents = Vec::with_capacity(positions.len());
        for (id, &position) in positions.iter().enumerate() {
            if !grid.contains(position) {
                return Err(Error::Config(format!(
                    "agent {id} at ({}, {}) lies outside the grid",
                    position.x, position.y
                )));
            }
            occupancy[grid.index(position)] += 1;
            agents.push(AgentState::new(id as AgentId, position));
        }
        let zone_occupancy = agents.iter().filter(|a| zone.contains(a.position)).count() as u64;
        let group = track_group.then(|| initial_group(grid, &zone, &mut agents));
        Ok(Self {
            grid,
            zone,
            agents,
            occupancy,
            zone_occupancy,
            group,
            step_index: 0,
            rng: stream_rng(seed, SIM_STREAM),
            changed: Vec::new(),
        })
    }

    /// Advance one step using the state's own simulation stream.
    pub fn step(&mut self) {
        let mut rng = self.rng.clone();
        self.step_with_rng(&mut rng);
        self.rng = rng;
    }

    /// Advance one step drawing moves from `rng`. Each agent takes one of
    /// its eight Moore neighbours uniformly: three bits of a 64-bit draw,
    /// most significant first, 21 moves per draw. Counters are updated
    /// incrementally and, when the group is tracked, the membership rules
    /// run right after the move.
    pub fn step_with_rng<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        let zone = Arc::clone(&self.zone);
        let delta = match self.group.as_mut() {
            Some(group) => {
                self.changed.clear();
                let delta = advance_tracked(
                    self.grid,
                    &zone.mask,
                    &mut self.agents,
                    &mut self.occupancy,
                    &mut self.changed,
                    rng,
                );
                for &id in &self.changed {
                    group.set(id, self.agents[id as usize].in_group);
                }
                delta
            }
            None => advance(
                self.grid,
                &zone.mask,
                &mut self.agents,
                &mut self.occupancy,
                rng,
            ),
        };
        self.zone_occupancy = self.zone_occupancy.wrapping_add_signed(delta);
        self.step_index += 1;
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn zone(&self) -> &Arc<Zone> {
        &self.zone
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn population(&self) -> usize {
        self.agents.len()
    }

    /// Per-cell counts, or `None` when counters are disabled.
    pub fn occupancy(&self) -> Option<&[u32]> {
        (!self.occupancy.is_empty()).then_some(self.occupancy.as_slice())
    }

    /// Running count of agents in the configured zone.
    pub fn zone_occupancy(&self) -> u64 {
        self.zone_occupancy
    }

    pub fn group(&self) -> Option<&Group> {
        self.group.as_ref()
    }

    /// Mutable access to the tracked group; exposed for rule-level tests.
    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    /// Order-sensitive fingerprint of all agent positions (FNV-1a).
    pub fn positions_fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for agent in &self.agents {
            for b in agent
                .position
                .x
                .to_le_bytes()
                .into_iter()
                .chain(agent.position.y.to_le_bytes())
            {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

const MOVES_PER_DRAW: usize = 21;

/// Move one agent by Moore offset `k`; returns `(was_in, now_in)`.
#[inline(always)]
fn move_agent(
    grid: GridSpec,
    zone_mask: &[bool],
    occupancy: &mut [u32],
    agent: &mut AgentState,
    k: u64,
) -> (bool, bool) {
    let (dx, dy) = MOORE_OFFSETS[k as usize];
    let from = grid.index(agent.position);
    agent.position = grid.offset(agent.position, dx, dy);
    let to = grid.index(agent.position);
    if !occupancy.is_empty() {
        occupancy[from] -= 1;
        occupancy[to] += 1;
    }
    (zone_mask[from], zone_mask[to])
}

/// Move every agent once; returns the change in zone occupancy. `occupancy`
/// is empty when per-cell counters are disabled.
#[inline(never)]
fn advance<R: RngCore + ?Sized>(
    grid: GridSpec,
    zone_mask: &[bool],
    agents: &mut [AgentState],
    occupancy: &mut [u32],
    rng: &mut R,
) -> i64 {
    let mut delta = 0i64;
    for chunk in agents.chunks_mut(MOVES_PER_DRAW) {
        let mut bits = rng.next_u64();
        for agent in chunk {
            let (was_in, now_in) = move_agent(grid, zone_mask, occupancy, agent, bits >> 61);
            bits <<= 3;
            delta += now_in as i64 - was_in as i64;
        }
    }
    delta
}

/// [`advance`] with the membership rules evaluated by every agent on
/// itself right after its move. Ids whose membership flipped are appended
/// to `changed`.
#[inline(never)]
fn advance_tracked<R: RngCore + ?Sized>(
    grid: GridSpec,
    zone_mask: &[bool],
    agents: &mut [AgentState],
    occupancy: &mut [u32],
    changed: &mut Vec<AgentId>,
    rng: &mut R,
) -> i64 {
    let mut delta = 0i64;
    for chunk in agents.chunks_mut(MOVES_PER_DRAW) {
        let mut bits = rng.next_u64();
        for agent in chunk {
            let (was_in, now_in) = move_agent(grid, zone_mask, occupancy, agent, bits >> 61);
            bits <<= 3;
            delta += now_in as i64 - was_in as i64;
            if self_evaluate(agent, now_in) {
                changed.push(agent.id);
            }
        }
    }
    delta
}

/// One pass of the rules over freshly placed agents.
fn initial_group(grid: GridSpec, zone: &Zone, agents: &mut [AgentState]) -> Group {
    let mut group = Group::new(agents.len() as u32);
    for agent in agents.iter_mut() {
        if self_evaluate(agent, zone.contains_index(grid.index(agent.position))) {
            group.join(agent.id);
        }
    }
    group
}

/// Reference value of `Z`: agents whose position is a member cell of
/// `zone`. Goes through the zone's cell list rather than its mask, so it
/// is independent of every observer.
pub fn ground_truth_count(state: &SimState, zone: &Zone) -> u64 {
    let members: HashSet<Cell> = zone.cells().iter().copied().collect();
    state
        .agents()
        .iter()
        .filter(|a| members.contains(&a.position))
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::RngCore;

    /// Every draw selects Moore offset `self.0` for all 21 moves.
    struct FixedRng(u64);

    impl RngCore for FixedRng {
        fn next_u32(&mut self) -> u32 {
            (self.next_u64() >> 32) as u32
        }
        fn next_u64(&mut self) -> u64 {
            (0..21).fold(0, |w, i| w | self.0 << (61 - 3 * i))
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0);
        }
    }

    fn single(grid: GridSpec, zone: Zone, cell: Cell) -> SimState {
        SimState::from_positions(grid, Arc::new(zone), &[cell], true, 0).unwrap()
    }

    #[test]
    fn single_agent_single_cell() {
        let grid = GridSpec::new(1, 1).unwrap();
        let config = SimConfig::new(grid, Zone::full(grid), 1);
        let state = init_simulation(&config).unwrap();
        assert_eq!(state.agents()[0].position, Cell::new(0, 0));
        assert_eq!(state.occupancy().unwrap(), &[1]);
    }

    #[test]
    fn full_zone_counts_everyone() {
        let grid = GridSpec::new(7, 3).unwrap();
        let config = SimConfig::new(grid, Zone::full(grid), 4).seed(9);
        let state = init_simulation(&config).unwrap();
        assert_eq!(state.zone_occupancy(), 4);
    }

    #[test]
    fn rejects_invalid_config() {
        let grid = GridSpec::default();
        assert!(init_simulation(&SimConfig::new(grid, Zone::empty(grid), 0)).is_err());
        assert!(init_simulation(&SimConfig::new(grid, Zone::empty(grid), 3).steps(0)).is_err());
        assert!(GridSpec::new(0, 10).is_err());
        assert!(GridSpec::new(10, 0).is_err());
        let other = GridSpec::new(10, 10).unwrap();
        assert!(init_simulation(&SimConfig::new(grid, Zone::empty(other), 3)).is_err());
    }

    #[test]
    fn initial_zone_occupancy_is_binomial() {
        // Z ~ Binomial(10^4, 0.2) per seed; the mean of 200 seeds has
        // sd = sqrt(1600 / 200).
        let grid = GridSpec::default();
        let zone = Zone::rect(grid, 0, 0, 100, 20).unwrap();
        assert_eq!(zone.len(), 2000);
        let base = SimConfig::new(grid, zone, 10_000);
        let seeds = 200;
        let total: u64 = (0..seeds)
            .map(|s| {
                init_simulation(&base.clone().seed(s))
                    .unwrap()
                    .zone_occupancy()
            })
            .sum();
        let mean = total as f64 / seeds as f64;
        let sigma = (10_000.0f64 * 0.2 * 0.8).sqrt() / (seeds as f64).sqrt();
        assert!((mean - 2000.0).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn torus_wrap_on_forced_move() {
        let grid = GridSpec::default();
        let mut state = single(grid, Zone::empty(grid), Cell::new(0, 0));
        state.step_with_rng(&mut FixedRng(0));
        assert_eq!(state.agents()[0].position, Cell::new(99, 99));
        state.step_with_rng(&mut FixedRng(7));
        assert_eq!(state.agents()[0].position, Cell::new(0, 0));
        assert_eq!(state.step_index(), 2);
    }

    #[test]
    fn forced_moves_cover_all_offsets() {
        let grid = GridSpec::new(5, 5).unwrap();
        for (k, &(dx, dy)) in MOORE_OFFSETS.iter().enumerate() {
            let mut state = single(grid, Zone::empty(grid), Cell::new(2, 2));
            state.step_with_rng(&mut FixedRng(k as u64));
            let expect = Cell::new((2 + dx as i32) as u32, (2 + dy as i32) as u32);
            assert_eq!(state.agents()[0].position, expect);
        }
    }

    #[test]
    fn ground_truth_enumeration() {
        let grid = GridSpec::default();
        let zone = Zone::from_cells(grid, [Cell::new(0, 0), Cell::new(5, 5)]).unwrap();
        let positions = [Cell::new(0, 0), Cell::new(5, 5), Cell::new(99, 99)];
        let state =
            SimState::from_positions(grid, Arc::new(zone.clone()), &positions, false, 0).unwrap();
        assert_eq!(ground_truth_count(&state, &zone), 2);
        assert_eq!(ground_truth_count(&state, &Zone::empty(grid)), 0);
        assert_eq!(ground_truth_count(&state, &Zone::full(grid)), 3);
    }

    #[test]
    fn zone_constructors() {
        let grid = GridSpec::default();
        assert!(Zone::rect(grid, 0, 0, 101, 10).is_err());
        assert!(Zone::rect(grid, 5, 0, 4, 10).is_err());
        assert!(Zone::from_cells(grid, [Cell::new(100, 0)]).is_err());
        assert_eq!(Zone::band(grid, 0.2).unwrap().coverage(), 0.2);
        assert_eq!(Zone::band(grid, 0.05).unwrap().len(), 500);
        for (c, side) in [(0.05, 23), (0.2, 45), (0.5, 71), (0.9, 95), (1.0, 100)] {
            let z = Zone::block(grid, c).unwrap();
            assert_eq!(z.coverage(), c);
            assert!(z.contains(Cell::new(side - 1, 0)) && !z.contains(Cell::new(side, 0)));
        }
        assert!(Zone::block(grid, 0.0).unwrap().is_empty());
        let thin = GridSpec::new(10, 3).unwrap();
        assert_eq!(Zone::block(thin, 0.9).unwrap().len(), 27);
        assert!(Zone::full(grid).contains(Cell::new(99, 99)));
        assert!(!Zone::full(grid).contains(Cell::new(100, 99)));
        assert!(Zone::empty(grid).is_empty());
    }

    #[test]
    fn determinism() {
        let config = SimConfig::with_coverage(300, 0.3).unwrap().seed(17);
        let mut a = init_simulation(&config).unwrap();
        let mut b = init_simulation(&config).unwrap();
        for _ in 0..50 {
            a.step();
            b.step();
            assert_eq!(a.agents(), b.agents());
            assert_eq!(a.zone_occupancy(), b.zone_occupancy());
        }
    }

    #[test]
    fn group_tracking_does_not_perturb_trajectory() {
        let config = SimConfig::with_coverage(300, 0.3).unwrap().seed(5);
        let mut plain = SimState::new(&config, false).unwrap();
        let mut tracked = SimState::new(&config, true).unwrap();
        for _ in 0..40 {
            plain.step();
            tracked.step();
        }
        assert_eq!(
            plain.positions_fingerprint(),
            tracked.positions_fingerprint()
        );
    }

    #[test]
    fn counters_can_be_disabled() {
        let mut config = SimConfig::with_coverage(100, 0.5).unwrap().seed(2);
        config.cell_counters = false;
        let mut state = init_simulation(&config).unwrap();
        assert!(state.occupancy().is_none());
        for _ in 0..20 {
            state.step();
            assert_eq!(
                state.zone_occupancy(),
                ground_truth_count(&state, &config.zone)
            );
        }
    }

    #[test]
    fn uniform_mixing_time_average() {
        // N = 10^4 over 10^4 steps; the time-averaged rate tracks coverage.
        let grid = GridSpec::default();
        let zone = Zone::rect(grid, 10, 30, 60, 70).unwrap();
        let coverage = zone.coverage();
        let config = SimConfig::new(grid, zone, 10_000).seed(123);
        let mut state = init_simulation(&config).unwrap();
        let steps = 10_000;
        let mut acc = 0.0;
        for _ in 0..steps {
            state.step();
            acc += state.zone_occupancy() as f64 / 10_000.0;
        }
        let avg = acc / steps as f64;
        assert!(
            (avg - coverage).abs() < 0.01,
            "avg {avg} vs coverage {coverage}"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn conservation_and_incremental_consistency(
            agents in 1u32..=1000,
            seed in any::<u64>(),
            x0 in 0u32..100, y0 in 0u32..100, w in 0u32..100, h in 0u32..100,
        ) {
            let grid = GridSpec::default();
            let zone = Zone::rect(grid, x0, y0, (x0 + w).min(100), (y0 + h).min(100)).unwrap();
            let config = SimConfig::new(grid, zone, agents).seed(seed);
            let mut state = init_simulation(&config).unwrap();
            for _ in 0..100 {
                state.step();
                let total: u64 = state.occupancy().unwrap().iter().map(|&c| c as u64).sum();
                prop_assert_eq!(total, agents as u64);
                prop_assert!(state.agents().iter().all(|a| grid.contains(a.position)));
                prop_assert_eq!(state.zone_occupancy(), ground_truth_count(&state, &config.zone));
            }
        }
    }
}
