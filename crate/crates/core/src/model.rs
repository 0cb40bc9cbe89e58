//! Network topology, channels, channel uncertainty and hardware parameters.
//!
//! A [`Realization`] is one complete random draw of everything an algorithm
//! consumes. It is fully determined by a [`ScenarioConfig`] and a seed, and can
//! be written to a versioned JSON container so that several algorithms can be
//! replayed on bit-identical inputs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, frob2, CMat};

pub const CONTAINER_FORMAT: &str = "jpaim-realization";
pub const CONTAINER_VERSION: u32 = 1;

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf(p_dbm / 10.0) * 1e-3
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Thermal noise power over `bandwidth_hz` with the given noise figure.
pub fn noise_variance(density_dbm_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(density_dbm_hz + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

/// AQNM distortion factor `(pi * sqrt(3) / 2) * 4^-b` for `b` effective bits.
///
/// `f64::INFINITY` models an ideal converter and yields exactly zero.
pub fn distortion_factor_from_bits(bits: f64) -> f64 {
    if bits.is_infinite() {
        return 0.0;
    }
    PI * 3f64.sqrt() / 2.0 * 4f64.powf(-bits)
}

/// 3GPP UMi line-of-sight probability.
pub fn los_probability_umi(distance_m: f64) -> f64 {
    let d = distance_m.max(1.0);
    (18.0 / d).min(1.0) * (1.0 - (-d / 36.0).exp()) + (-d / 36.0).exp()
}

/// Single-slope UMi pathloss in dB (no breakpoint, no shadowing).
pub fn pathloss_umi_db(distance_m: f64, fc_ghz: f64, is_los: bool) -> f64 {
    let d = distance_m.max(1.0);
    let los = 32.4 + 21.0 * d.log10() + 20.0 * fc_ghz.log10();
    if is_los {
        los
    } else {
        let nlos = 22.4 + 35.3 * d.log10() + 21.3 * fc_ghz.log10();
        nlos.max(los)
    }
}

/// Linear pathloss gain, in `(0, 1]` for distances of at least 1 m.
pub fn pathloss_umi(distance_m: f64, fc_ghz: f64, is_los: bool) -> f64 {
    10f64.powf(-pathloss_umi_db(distance_m, fc_ghz, is_los) / 10.0).min(1.0)
}

/// Draws one MIMO channel matrix.
///
/// The Rayleigh branch is `sqrt(gain) N`; the Rician branch is
/// `sqrt(gain) (sqrt(k/(k+1)) M + sqrt(1/(k+1)) N)` where `M` is the identity for
/// square matrices and the all-ones matrix otherwise. `N` is always drawn so the
/// random stream does not depend on the branch parameters.
pub fn generate_channel<R: Rng + ?Sized>(
    gain: f64,
    rician_k: f64,
    use_rician: bool,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> CMat {
    let scatter = complex_gaussian(rows, cols, 1.0, rng);
    let amp = gain.max(0.0).sqrt();
    if !use_rician {
        return scatter.scale(amp);
    }
    let (w_los, w_nlos) = if rician_k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((rician_k / (rician_k + 1.0)).sqrt(), (1.0 / (rician_k + 1.0)).sqrt())
    };
    let mean = if rows == cols {
        CMat::identity(rows, cols)
    } else {
        CMat::from_element(rows, cols, Complex64::new(1.0, 0.0))
    };
    (mean.scale(w_los) + scatter.scale(w_nlos)).scale(amp)
}

/// Splits a true channel into an estimate and an error: `H = H_est + Delta`
/// with `Delta ~ CN(0, s2)` elementwise and `s2 = varrho ||H||_F^2 / (rows cols)`.
pub fn apply_uncertainty<R: Rng + ?Sized>(h: &CMat, varrho: f64, rng: &mut R) -> (CMat, f64) {
    let n = (h.nrows() * h.ncols()).max(1) as f64;
    let var = varrho * frob2(h) / n;
    let delta = complex_gaussian(h.nrows(), h.ncols(), var, rng);
    (h - delta, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub bs_tx: usize,
    pub bs_rx: usize,
    pub ue_tx: usize,
    pub ue_rx: usize,
    pub dl_streams: usize,
    pub ul_streams: usize,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        AntennaConfig {
            bs_tx: 16,
            bs_rx: 16,
            ue_tx: 2,
            ue_rx: 2,
            dl_streams: 2,
            ul_streams: 2,
        }
    }
}

impl AntennaConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("antenna.bs_tx", self.bs_tx),
            ("antenna.bs_rx", self.bs_rx),
            ("antenna.ue_tx", self.ue_tx),
            ("antenna.ue_rx", self.ue_rx),
            ("antenna.dl_streams", self.dl_streams),
            ("antenna.ul_streams", self.ul_streams),
        ] {
            if v == 0 {
                return Err(Error::invalid(key, "must be positive"));
            }
        }
        if self.dl_streams > self.bs_tx.min(self.ue_rx) {
            return Err(Error::invalid(
                "antenna.dl_streams",
                "must not exceed min(bs_tx, ue_rx)",
            ));
        }
        if self.ul_streams > self.ue_tx.min(self.bs_rx) {
            return Err(Error::invalid(
                "antenna.ul_streams",
                "must not exceed min(ue_tx, bs_rx)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub kappa_bs: f64,
    pub kappa_ue: f64,
    pub beta_bs: f64,
    pub beta_ue: f64,
    pub noise_bs: f64,
    pub noise_ue: f64,
    pub power_bs: f64,
    pub power_ue: f64,
    /// Linear pathloss of the effective SI channel per cell (other ASIC techniques).
    pub si_gain: Vec<f64>,
    pub adc_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Base stations on a hexagonal lattice plus users dropped inside their cells.
///
/// Users are stored flat; `dl_cell[u]` / `ul_cell[u]` give the serving cell and
/// users of a cell are contiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub bs: Vec<Point>,
    pub dl_users: Vec<Point>,
    pub dl_cell: Vec<usize>,
    pub ul_users: Vec<Point>,
    pub ul_cell: Vec<usize>,
    pub isd_m: f64,
    pub min_distance_m: f64,
}

impl Topology {
    pub fn cells(&self) -> usize {
        self.bs.len()
    }
}

/// Hexagonal lattice sites ordered by ring, site 0 at the origin.
pub fn hex_lattice(count: usize, isd: f64) -> Vec<Point> {
    // axial directions walked around each ring
    const DIRS: [(i64, i64); 6] = [(-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0), (0, 1)];
    let mut sites = vec![(0i64, 0i64)];
    let mut ring = 1i64;
    while sites.len() < count {
        let (mut q, mut r) = (ring, 0i64);
        for (dq, dr) in DIRS {
            for _ in 0..ring {
                sites.push((q, r));
                q += dq;
                r += dr;
            }
        }
        ring += 1;
    }
    sites.truncate(count);
    sites
        .into_iter()
        .map(|(q, r)| Point {
            x: isd * (q as f64 + r as f64 / 2.0),
            y: isd * (r as f64 * 3f64.sqrt() / 2.0),
        })
        .collect()
}

/// Whether `p` (relative to its site) lies inside the Voronoi hexagon of a
/// lattice with inter-site distance `isd`.
fn inside_hexagon(dx: f64, dy: f64, isd: f64) -> bool {
    (0..3).all(|i| {
        let a = i as f64 * PI / 3.0;
        (dx * a.cos() + dy * a.sin()).abs() <= isd / 2.0
    })
}

fn drop_user<R: Rng + ?Sized>(center: Point, isd: f64, min_dist: f64, rng: &mut R) -> Point {
    let radius = isd / 3f64.sqrt();
    loop {
        let dx = rng.random_range(-radius..radius);
        let dy = rng.random_range(-radius..radius);
        if inside_hexagon(dx, dy, isd) && dx.hypot(dy) >= min_dist {
            return Point {
                x: center.x + dx,
                y: center.y + dy,
            };
        }
    }
}

pub fn generate_topology<R: Rng + ?Sized>(
    cells: usize,
    dl_per_cell: usize,
    ul_per_cell: usize,
    isd_m: f64,
    min_distance_m: f64,
    rng: &mut R,
) -> Result<Topology> {
    if cells == 0 {
        return Err(Error::invalid("cells", "must be at least 1"));
    }
    let radius = isd_m / 3f64.sqrt();
    if !(min_distance_m < radius) || isd_m <= 0.0 {
        return Err(Error::InfeasibleGeometry {
            min_distance: min_distance_m,
            radius,
        });
    }
    let bs = hex_lattice(cells, isd_m);
    let mut topo = Topology {
        bs: bs.clone(),
        dl_users: Vec::new(),
        dl_cell: Vec::new(),
        ul_users: Vec::new(),
        ul_cell: Vec::new(),
        isd_m,
        min_distance_m,
    };
    for (g, &c) in bs.iter().enumerate() {
        for _ in 0..dl_per_cell {
            topo.dl_users.push(drop_user(c, isd_m, min_distance_m, rng));
            topo.dl_cell.push(g);
        }
        for _ in 0..ul_per_cell {
            topo.ul_users.push(drop_user(c, isd_m, min_distance_m, rng));
            topo.ul_cell.push(g);
        }
    }
    Ok(topo)
}

/// Scenario parameters consumed by [`build_realization`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub cells: usize,
    pub dl_users: usize,
    pub ul_users: usize,
    pub isd_m: f64,
    pub min_distance_m: f64,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub noise_density_dbm_hz: f64,
    pub noise_figure_bs_db: f64,
    pub noise_figure_ue_db: f64,
    pub power_bs_dbm: f64,
    pub power_ue_dbm: f64,
    pub adc_bits: f64,
    /// Channel uncertainty factor `varrho` in dB.
    pub uncertainty_db: f64,
    pub rician_k_db: f64,
    /// Assign the Rician branch to LOS-probable links instead of the literal rule.
    pub swap_los_branches: bool,
    /// Isolation already provided by other ASIC techniques (`l_g` in dB, all cells).
    pub asic_db: f64,
    pub antennas: AntennaConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            cells: 2,
            dl_users: 2,
            ul_users: 2,
            isd_m: 200.0,
            min_distance_m: 10.0,
            carrier_ghz: 2.5,
            bandwidth_hz: 10e6,
            noise_density_dbm_hz: -174.0,
            noise_figure_bs_db: 13.0,
            noise_figure_ue_db: 9.0,
            power_bs_dbm: 24.0,
            power_ue_dbm: 23.0,
            adc_bits: 12.0,
            uncertainty_db: -120.0,
            rician_k_db: 10.0,
            swap_los_branches: false,
            asic_db: 120.0,
            antennas: AntennaConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cells == 0 {
            return Err(Error::invalid("cells", "must be at least 1"));
        }
        if self.dl_users == 0 {
            return Err(Error::invalid("dl_users", "must be at least 1"));
        }
        if self.ul_users == 0 {
            return Err(Error::invalid("ul_users", "must be at least 1"));
        }
        let positive = [
            ("isd_m", self.isd_m),
            ("carrier_ghz", self.carrier_ghz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("adc_bits", self.adc_bits),
        ];
        for (key, v) in positive {
            if !(v > 0.0) {
                return Err(Error::invalid(key, "must be positive"));
            }
        }
        let finite = [
            ("min_distance_m", self.min_distance_m),
            ("noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("noise_figure_bs_db", self.noise_figure_bs_db),
            ("noise_figure_ue_db", self.noise_figure_ue_db),
            ("power_bs_dbm", self.power_bs_dbm),
            ("power_ue_dbm", self.power_ue_dbm),
            ("uncertainty_db", self.uncertainty_db),
            ("rician_k_db", self.rician_k_db),
            ("asic_db", self.asic_db),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(key, "must be finite"));
            }
        }
        if self.min_distance_m < 0.0 {
            return Err(Error::invalid("min_distance_m", "must be non-negative"));
        }
        if self.asic_db < 0.0 {
            return Err(Error::invalid("asic_db", "must be non-negative"));
        }
        if self.min_distance_m >= self.isd_m / 3f64.sqrt() {
            return Err(Error::invalid(
                "min_distance_m",
                "must be below the cell radius isd_m / sqrt(3)",
            ));
        }
        self.antennas.validate()
    }

    pub fn hardware(&self) -> HardwareProfile {
        let factor = distortion_factor_from_bits(self.adc_bits);
        HardwareProfile {
            kappa_bs: factor,
            kappa_ue: factor,
            beta_bs: factor,
            beta_ue: factor,
            noise_bs: noise_variance(
                self.noise_density_dbm_hz,
                self.bandwidth_hz,
                self.noise_figure_bs_db,
            ),
            noise_ue: noise_variance(
                self.noise_density_dbm_hz,
                self.bandwidth_hz,
                self.noise_figure_ue_db,
            ),
            power_bs: dbm_to_watts(self.power_bs_dbm),
            power_ue: dbm_to_watts(self.power_ue_dbm),
            si_gain: vec![db_to_linear(-self.asic_db); self.cells],
            adc_bits: self.adc_bits,
        }
    }
}

/// One wireless link: true channel, its estimate and the per-element error variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    #[serde(with = "mat_serde")]
    pub h: CMat,
    #[serde(with = "mat_serde")]
    pub h_est: CMat,
    pub err_var: f64,
}

impl Link {
    /// Link with perfect CSI.
    pub fn exact(h: CMat) -> Self {
        Link {
            h_est: h.clone(),
            h,
            err_var: 0.0,
        }
    }
}

/// All links of the network, indexed `[receiver][transmitter]`.
///
/// `bs_from_bs[g][g]` is the SI channel of base station `g` (true only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub dl_from_bs: Vec<Vec<Link>>,
    pub dl_from_ul: Vec<Vec<Link>>,
    pub bs_from_ul: Vec<Vec<Link>>,
    pub bs_from_bs: Vec<Vec<Link>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tx {
    Bs(usize),
    Ul(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rx {
    Dl(usize),
    Bs(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub seed: u64,
    pub topology: Topology,
    pub antennas: AntennaConfig,
    pub hardware: HardwareProfile,
    pub channels: ChannelSet,
}

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    realization: Realization,
}

impl Realization {
    pub fn cells(&self) -> usize {
        self.topology.bs.len()
    }

    pub fn n_dl(&self) -> usize {
        self.topology.dl_cell.len()
    }

    pub fn n_ul(&self) -> usize {
        self.topology.ul_cell.len()
    }

    pub fn dl_cell(&self, u: usize) -> usize {
        self.topology.dl_cell[u]
    }

    pub fn ul_cell(&self, u: usize) -> usize {
        self.topology.ul_cell[u]
    }

    pub fn dl_users_of(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_dl()).filter(move |&u| self.topology.dl_cell[u] == g)
    }

    pub fn ul_users_of(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_ul()).filter(move |&u| self.topology.ul_cell[u] == g)
    }

    pub fn transmitters(&self) -> impl Iterator<Item = Tx> + '_ {
        (0..self.cells())
            .map(Tx::Bs)
            .chain((0..self.n_ul()).map(Tx::Ul))
    }

    pub fn receivers(&self) -> impl Iterator<Item = Rx> + '_ {
        (0..self.n_dl())
            .map(Rx::Dl)
            .chain((0..self.cells()).map(Rx::Bs))
    }

    pub fn link(&self, rx: Rx, tx: Tx) -> &Link {
        let c = &self.channels;
        match (rx, tx) {
            (Rx::Dl(u), Tx::Bs(g)) => &c.dl_from_bs[u][g],
            (Rx::Dl(u), Tx::Ul(i)) => &c.dl_from_ul[u][i],
            (Rx::Bs(g), Tx::Ul(i)) => &c.bs_from_ul[g][i],
            (Rx::Bs(g), Tx::Bs(j)) => &c.bs_from_bs[g][j],
        }
    }

    /// Channel used by the design: the true channel for SI, the estimate otherwise.
    pub fn design_channel(&self, rx: Rx, tx: Tx) -> &CMat {
        match (rx, tx) {
            (Rx::Bs(g), Tx::Bs(j)) if g == j => &self.link(rx, tx).h,
            _ => &self.link(rx, tx).h_est,
        }
    }

    pub fn si_channel(&self, g: usize) -> &CMat {
        &self.channels.bs_from_bs[g][g].h
    }

    pub fn tx_kappa(&self, tx: Tx) -> f64 {
        match tx {
            Tx::Bs(_) => self.hardware.kappa_bs,
            Tx::Ul(_) => self.hardware.kappa_ue,
        }
    }

    pub fn rx_beta(&self, rx: Rx) -> f64 {
        match rx {
            Rx::Dl(_) => self.hardware.beta_ue,
            Rx::Bs(_) => self.hardware.beta_bs,
        }
    }

    pub fn rx_noise(&self, rx: Rx) -> f64 {
        match rx {
            Rx::Dl(_) => self.hardware.noise_ue,
            Rx::Bs(_) => self.hardware.noise_bs,
        }
    }

    pub fn rx_antennas(&self, rx: Rx) -> usize {
        match rx {
            Rx::Dl(_) => self.antennas.ue_rx,
            Rx::Bs(_) => self.antennas.bs_rx,
        }
    }

    pub fn tx_antennas(&self, tx: Tx) -> usize {
        match tx {
            Tx::Bs(_) => self.antennas.bs_tx,
            Tx::Ul(_) => self.antennas.ue_tx,
        }
    }

    /// Copy with uplink users (`keep_ul = false`) or downlink users
    /// (`keep_dl = false`) removed, used for half-duplex phases.
    pub fn restricted(&self, keep_dl: bool, keep_ul: bool) -> Realization {
        let mut out = self.clone();
        if !keep_dl {
            out.topology.dl_users.clear();
            out.topology.dl_cell.clear();
            out.channels.dl_from_bs.clear();
            out.channels.dl_from_ul.clear();
        }
        if !keep_ul {
            out.topology.ul_users.clear();
            out.topology.ul_cell.clear();
            for row in &mut out.channels.dl_from_ul {
                row.clear();
            }
            for row in &mut out.channels.bs_from_ul {
                row.clear();
            }
        }
        out
    }

    /// Versioned JSON container; floats are written in shortest round-trip form.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let c = Container {
            format: CONTAINER_FORMAT.to_string(),
            version: CONTAINER_VERSION,
            realization: self.clone(),
        };
        Ok(serde_json::to_vec(&c)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Realization> {
        let c: Container = serde_json::from_slice(bytes)?;
        if c.format != CONTAINER_FORMAT {
            return Err(Error::Container(format!("unknown format `{}`", c.format)));
        }
        if c.version != CONTAINER_VERSION {
            return Err(Error::Container(format!("unsupported version {}", c.version)));
        }
        Ok(c.realization)
    }

    /// SHA-256 of the serialized container, hex encoded.
    pub fn checksum(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_bytes()?);
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

struct LinkFactory {
    fc_ghz: f64,
    rician_k: f64,
    swap: bool,
    varrho: f64,
}

impl LinkFactory {
    fn draw<R: Rng + ?Sized>(&self, distance: f64, rows: usize, cols: usize, rng: &mut R) -> Link {
        let p_los = los_probability_umi(distance);
        let is_los = p_los >= 0.5;
        let gain = pathloss_umi(distance, self.fc_ghz, is_los);
        // literal branch rule: pure scatter when LOS is probable
        let use_rician = if self.swap { is_los } else { !is_los };
        let h = generate_channel(gain, self.rician_k, use_rician, rows, cols, rng);
        let (h_est, err_var) = apply_uncertainty(&h, self.varrho, rng);
        Link { h, h_est, err_var }
    }
}

/// SplitMix64 output function; used to derive independent seeds from one base.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds a complete realization from `(config, seed)`.
pub fn build_realization(config: &ScenarioConfig, seed: u64) -> Result<Realization> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topo = generate_topology(
        config.cells,
        config.dl_users,
        config.ul_users,
        config.isd_m,
        config.min_distance_m,
        &mut rng,
    )?;
    let hardware = config.hardware();
    let ant = config.antennas;
    let factory = LinkFactory {
        fc_ghz: config.carrier_ghz,
        rician_k: db_to_linear(config.rician_k_db),
        swap: config.swap_los_branches,
        varrho: db_to_linear(config.uncertainty_db),
    };

    let dl_from_bs = topo
        .dl_users
        .iter()
        .map(|u| {
            topo.bs
                .iter()
                .map(|b| factory.draw(u.dist(b), ant.ue_rx, ant.bs_tx, &mut rng))
                .collect()
        })
        .collect();
    let dl_from_ul = topo
        .dl_users
        .iter()
        .map(|u| {
            topo.ul_users
                .iter()
                .map(|v| factory.draw(u.dist(v), ant.ue_rx, ant.ue_tx, &mut rng))
                .collect()
        })
        .collect();
    let bs_from_ul = topo
        .bs
        .iter()
        .map(|b| {
            topo.ul_users
                .iter()
                .map(|v| factory.draw(b.dist(v), ant.bs_rx, ant.ue_tx, &mut rng))
                .collect()
        })
        .collect();
    let mut bs_from_bs = Vec::with_capacity(topo.bs.len());
    for (g, b) in topo.bs.iter().enumerate() {
        let mut row = Vec::with_capacity(topo.bs.len());
        for (j, c) in topo.bs.iter().enumerate() {
            if g == j {
                let h = generate_channel(hardware.si_gain[g], 0.0, false, ant.bs_rx, ant.bs_tx, &mut rng);
                row.push(Link::exact(h));
            } else {
                row.push(factory.draw(b.dist(c), ant.bs_rx, ant.bs_tx, &mut rng));
            }
        }
        bs_from_bs.push(row);
    }

    Ok(Realization {
        seed,
        topology: topo,
        antennas: ant,
        hardware,
        channels: ChannelSet {
            dl_from_bs,
            dl_from_ul,
            bs_from_ul,
            bs_from_bs,
        },
    })
}

mod mat_serde {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::CMat;

    #[derive(Serialize, Deserialize)]
    struct Raw {
        rows: usize,
        cols: usize,
        /// column-major `[re, im]` pairs
        data: Vec<[f64; 2]>,
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        Raw {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let raw = Raw::deserialize(d)?;
        if raw.data.len() != raw.rows * raw.cols {
            return Err(serde::de::Error::custom("matrix data length mismatch"));
        }
        Ok(DMatrix::from_iterator(
            raw.rows,
            raw.cols,
            raw.data.into_iter().map(|[re, im]| Complex64::new(re, im)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(24.0) - 0.251_188_643).abs() < 1e-8);
        assert!((dbm_to_watts(23.0) - 0.199_526_231).abs() < 1e-8);
    }

    #[test]
    fn thermal_noise() {
        assert!((noise_variance(-174.0, 1.0, 0.0) / 3.981_071_7e-21 - 1.0).abs() < 1e-6);
        assert!((noise_variance(-174.0, 1e7, 13.0) / 7.943_282_3e-13 - 1.0).abs() < 1e-6);
        assert!((noise_variance(-174.0, 1e7, 9.0) / 3.162_277_7e-13 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn aqnm_factor() {
        assert_eq!(distortion_factor_from_bits(f64::INFINITY), 0.0);
        let f12 = distortion_factor_from_bits(12.0);
        assert!((f12 / 1.6216e-7 - 1.0).abs() < 1e-3, "{f12}");
        assert!(distortion_factor_from_bits(6.0) > f12);
    }

    #[test]
    fn umi_pathloss_values() {
        assert!((pathloss_umi_db(100.0, 2.5, true) - 82.359).abs() < 1e-3);
        assert!((pathloss_umi_db(10.0, 2.5, true) - 61.359).abs() < 1e-3);
        let g = pathloss_umi(100.0, 2.5, true);
        assert!((g.log10() + 8.2359).abs() < 1e-4);
        for d in [1.0, 5.0, 20.0, 50.0, 150.0, 400.0] {
            assert!(pathloss_umi(d, 2.5, false) <= pathloss_umi(d, 2.5, true));
            assert!(pathloss_umi(d * 1.1, 2.5, true) < pathloss_umi(d, 2.5, true));
            assert!(pathloss_umi(d * 1.1, 2.5, false) < pathloss_umi(d, 2.5, false));
        }
    }

    #[test]
    fn los_probability_shape() {
        assert!((los_probability_umi(10.0) - 1.0).abs() < 1e-12);
        assert!(los_probability_umi(200.0) < 0.5);
        assert!(los_probability_umi(30.0) > los_probability_umi(60.0));
    }

    #[test]
    fn lattice_and_users() {
        let t = generate_topology(1, 2, 2, 200.0, 10.0, &mut rng(1)).unwrap();
        assert_eq!(t.bs, vec![Point { x: 0.0, y: 0.0 }]);
        let t = generate_topology(7, 3, 3, 200.0, 10.0, &mut rng(2)).unwrap();
        assert!((t.bs[0].dist(&t.bs[1]) - 200.0).abs() < 1e-9);
        for i in 1..7 {
            assert!((t.bs[0].dist(&t.bs[i]) - 200.0).abs() < 1e-9);
        }
        for (u, p) in t.dl_users.iter().enumerate() {
            let serving = t.bs[t.dl_cell[u]];
            assert!(p.dist(&serving) >= 10.0);
            // closest site is the serving one
            assert!(t.bs.iter().all(|b| p.dist(b) >= p.dist(&serving) - 1e-9));
        }
        assert!(matches!(
            generate_topology(1, 1, 1, 200.0, 120.0, &mut rng(0)),
            Err(Error::InfeasibleGeometry { .. })
        ));
    }

    #[test]
    fn channel_branches() {
        let h = generate_channel(0.0, 10.0, false, 3, 4, &mut rng(5));
        assert!(h.iter().all(|z| z.norm() == 0.0));
        let h = generate_channel(1.0, f64::INFINITY, true, 3, 3, &mut rng(5));
        assert_eq!(h, CMat::identity(3, 3));
        let h = generate_channel(1.0, f64::INFINITY, true, 2, 3, &mut rng(5));
        assert!(h.iter().all(|z| (z.re - 1.0).abs() < 1e-15 && z.im == 0.0));
    }

    #[test]
    fn rayleigh_energy_moment() {
        let mut r = rng(11);
        let gain = 3e-9;
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| frob2(&generate_channel(gain, 0.0, false, 2, 3, &mut r)))
            .sum::<f64>()
            / n as f64;
        assert!((mean / (gain * 6.0) - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn uncertainty_energy_and_zero() {
        let mut r = rng(12);
        let h = generate_channel(1.0, 0.0, false, 2, 2, &mut r);
        let (h_est, var) = apply_uncertainty(&h, 0.0, &mut r);
        assert_eq!(var, 0.0);
        assert_eq!(h_est, h);
        let varrho = 0.01;
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| frob2(&(&h - apply_uncertainty(&h, varrho, &mut r).0)))
            .sum::<f64>()
            / n as f64;
        assert!((mean / (varrho * frob2(&h)) - 1.0).abs() < 0.01);
    }

    #[test]
    fn realization_defaults_and_determinism() {
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.antennas.bs_tx, 16);
        assert_eq!(cfg.antennas.ue_rx, 2);
        assert!((db_to_linear(cfg.uncertainty_db) - 1e-12).abs() < 1e-24);
        let a = build_realization(&cfg, 9).unwrap();
        let b = build_realization(&cfg, 9).unwrap();
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
        let back = Realization::from_bytes(&a.to_bytes().unwrap()).unwrap();
        assert_eq!(back, a);
        assert_eq!(a.channels.bs_from_bs[0][0].err_var, 0.0);
        assert_eq!(a.channels.bs_from_bs[0][0].h, a.channels.bs_from_bs[0][0].h_est);
    }

    #[test]
    fn si_channel_scales_with_isolation() {
        let mut cfg = ScenarioConfig {
            asic_db: 0.0,
            ..Default::default()
        };
        let a = build_realization(&cfg, 4).unwrap();
        cfg.asic_db = 30.0;
        let b = build_realization(&cfg, 4).unwrap();
        let ratio = frob2(b.si_channel(0)).sqrt() / frob2(a.si_channel(0)).sqrt();
        assert!((ratio - 1e-3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn container_rejects_wrong_version() {
        let r = build_realization(&ScenarioConfig::default(), 1).unwrap();
        let mut v: serde_json::Value = serde_json::from_slice(&r.to_bytes().unwrap()).unwrap();
        v["version"] = serde_json::json!(99);
        let bytes = serde_json::to_vec(&v).unwrap();
        assert!(matches!(Realization::from_bytes(&bytes), Err(Error::Container(_))));
    }
}
