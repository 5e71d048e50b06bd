//! `(n, k)`-MDS coded caching systems.
//!
//! A file of `M = k * t` symbols is spread over `n` nodes, each holding `t`
//! coded packets. Every packet is described by its coding vector over the
//! `M`-dimensional source; the system is valid when any `k` nodes together
//! hold `M` independent vectors.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{vandermonde_on, Elem, FieldMatrix, PrimeField};
use crate::{seeded_rng, SCHEMA_VERSION};

/// Retry budget for the randomized construction.
pub const BUILD_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemConfig {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub field: PrimeField,
}

impl SystemConfig {
    pub fn new(n: usize, k: usize, t: usize, q: u64) -> Result<Self> {
        let field = PrimeField::new(q)?;
        Self::with_field(n, k, t, field)
    }

    pub fn with_field(n: usize, k: usize, t: usize, field: PrimeField) -> Result<Self> {
        if k == 0 || n <= k {
            return Err(Error::InvalidConfig(format!(
                "need n > k >= 1, got n={n} k={k}"
            )));
        }
        if t == 0 {
            return Err(Error::InvalidConfig("t must be at least 1".into()));
        }
        Ok(Self { n, k, t, field })
    }

    /// File size in packets.
    pub fn m(&self) -> usize {
        self.k * self.t
    }

    pub fn q(&self) -> u64 {
        self.field.p()
    }
}

/// An MDS-coded caching system: one coding vector per stored packet and an
/// optional source payload.
///
/// Row `i * t + j` of the coding matrix is packet `j` of node `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SystemDescriptor", into = "SystemDescriptor")]
pub struct CachingSystem {
    config: SystemConfig,
    coding: FieldMatrix,
    payload: Option<Vec<Elem>>,
}

impl CachingSystem {
    /// Wraps an explicit coding matrix. Shapes are checked, the MDS property
    /// is not; see [`CachingSystem::verify_caching_mds`].
    pub fn from_matrix(config: SystemConfig, coding: FieldMatrix) -> Result<Self> {
        if coding.field() != config.field {
            return Err(Error::Dimension(format!(
                "coding matrix over {} for a system over {}",
                coding.field(),
                config.field
            )));
        }
        if coding.rows() != config.n * config.t || coding.cols() != config.m() {
            return Err(Error::Dimension(format!(
                "coding matrix is {}x{}, expected {}x{}",
                coding.rows(),
                coding.cols(),
                config.n * config.t,
                config.m()
            )));
        }
        Ok(Self {
            config,
            coding,
            payload: None,
        })
    }

    /// Random construction: sample every coding vector uniformly and keep the
    /// first draw that passes the MDS check.
    pub fn build(config: SystemConfig, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        for _ in 0..BUILD_ATTEMPTS {
            let coding =
                FieldMatrix::random(config.field, config.n * config.t, config.m(), &mut rng);
            let sys = Self::from_matrix(config, coding)?;
            if sys.verify_caching_mds() {
                return Ok(sys);
            }
        }
        Err(Error::ConstructionFailed {
            attempts: BUILD_ATTEMPTS,
            p: config.q(),
        })
    }

    /// Deterministic systematic construction.
    ///
    /// The source is laid out as `t` families of `k` symbols (symbol `m` of
    /// family `j` at coordinate `j * k + m`), and every family is coded with
    /// the same scalar `(n, k)` MDS generator. The first `k` nodes are
    /// systematic. With a single parity node the parity row is all ones, which
    /// works over any field; otherwise the generator is a Vandermonde matrix on
    /// `n` distinct points brought into systematic form, which needs `q >= n`.
    pub fn systematic(config: SystemConfig) -> Result<Self> {
        let (n, k, t) = (config.n, config.k, config.t);
        let f = config.field;
        let generator = if n == k + 1 {
            let mut g = FieldMatrix::identity(f, k);
            g.push_row(&vec![1; k])?;
            g
        } else {
            if (n as u64) > f.p() {
                return Err(Error::FieldTooSmall {
                    p: f.p(),
                    needed: n as u64 - 1,
                });
            }
            let points: Vec<Elem> = (0..n as u64).collect();
            let v = vandermonde_on(&points, k, f)?;
            let top: Vec<usize> = (0..k).collect();
            let top_inv = v.select_rows(&top).inverse()?;
            v.mul(&top_inv)?
        };
        let mut coding = FieldMatrix::zeros(f, n * t, k * t);
        for i in 0..n {
            for j in 0..t {
                for m in 0..k {
                    coding.set(i * t + j, j * k + m, generator.get(i, m));
                }
            }
        }
        let sys = Self::from_matrix(config, coding)?;
        debug_assert!(sys.verify_caching_mds());
        Ok(sys)
    }

    pub fn with_payload(mut self, source: Vec<Elem>) -> Result<Self> {
        if source.len() != self.config.m() {
            return Err(Error::Dimension(format!(
                "payload of length {} for M = {}",
                source.len(),
                self.config.m()
            )));
        }
        let f = self.config.field;
        self.payload = Some(source.into_iter().map(|x| f.reduce(x)).collect());
        Ok(self)
    }

    pub fn without_payload(mut self) -> Self {
        self.payload = None;
        self
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn field(&self) -> PrimeField {
        self.config.field
    }

    pub fn coding_matrix(&self) -> &FieldMatrix {
        &self.coding
    }

    pub fn payload(&self) -> Option<&[Elem]> {
        self.payload.as_deref()
    }

    /// Coding vector of packet `j` at node `i`.
    pub fn packet_vector(&self, node: usize, packet: usize) -> &[Elem] {
        self.coding.row(node * self.config.t + packet)
    }

    /// The `t x M` block of node `i`.
    pub fn node_block(&self, node: usize) -> FieldMatrix {
        let t = self.config.t;
        let idx: Vec<usize> = (node * t..(node + 1) * t).collect();
        self.coding.select_rows(&idx)
    }

    /// Stacked coding vectors of a set of nodes.
    pub fn nodes_block(&self, nodes: &[usize]) -> FieldMatrix {
        let t = self.config.t;
        let idx: Vec<usize> = nodes.iter().flat_map(|&i| i * t..(i + 1) * t).collect();
        self.coding.select_rows(&idx)
    }

    /// Replaces the coding vector of one packet.
    pub(crate) fn set_packet_vector(&mut self, node: usize, packet: usize, v: &[Elem]) {
        let r = node * self.config.t + packet;
        for (c, &x) in v.iter().enumerate() {
            self.coding.set(r, c, x);
        }
    }

    /// True iff every `k`-subset of nodes stacks to rank `M`.
    pub fn verify_caching_mds(&self) -> bool {
        let SystemConfig { n, k, .. } = self.config;
        let m = self.config.m();
        (0..n)
            .combinations(k)
            .all(|nodes| self.nodes_block(&nodes).rank() == m)
    }

    /// Packet values per node for a given source vector.
    pub fn encode_payload(&self, source: &[Elem]) -> Result<Vec<Vec<Elem>>> {
        let values = self.coding.mul_vec(source)?;
        Ok(values.chunks(self.config.t).map(|c| c.to_vec()).collect())
    }

    /// Stored packet values, when a payload is attached.
    pub fn packets(&self) -> Option<Vec<Vec<Elem>>> {
        self.payload.as_ref().map(|p| {
            self.encode_payload(p)
                .expect("payload length checked on attach")
        })
    }

    /// Recovers the source from the packets stored at `nodes` (exactly `k` of
    /// them), given their values in node order.
    pub fn decode(&self, nodes: &[usize], values: &[Vec<Elem>]) -> Result<Vec<Elem>> {
        let k = self.config.k;
        if nodes.len() != k || values.len() != k {
            return Err(Error::Dimension(format!(
                "data collector needs exactly {k} nodes, got {}",
                nodes.len()
            )));
        }
        if let Some(&bad) = nodes.iter().find(|&&i| i >= self.config.n) {
            return Err(Error::Dimension(format!("node {bad} out of range")));
        }
        let block = self.nodes_block(nodes);
        let rhs: Vec<Elem> = values.iter().flatten().copied().collect();
        if rhs.len() != block.rows() {
            return Err(Error::Dimension(format!(
                "{} packet values for {} packets",
                rhs.len(),
                block.rows()
            )));
        }
        let inv = block.inverse()?;
        inv.mul_vec(&rhs)
    }

    /// Data-collector read of the attached payload through `nodes`.
    pub fn collect(&self, nodes: &[usize]) -> Result<Vec<Elem>> {
        let packets = self.packets().ok_or(Error::MissingPayload)?;
        let values: Vec<Vec<Elem>> = nodes
            .iter()
            .map(|&i| packets.get(i).cloned().unwrap_or_default())
            .collect();
        self.decode(nodes, &values)
    }
}

/// On-disk form of a [`CachingSystem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub schema_version: u32,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub q: u64,
    pub coding_matrix: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Vec<u64>>,
}

impl From<CachingSystem> for SystemDescriptor {
    fn from(s: CachingSystem) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n: s.config.n,
            k: s.config.k,
            t: s.config.t,
            q: s.config.q(),
            coding_matrix: s.coding.to_rows(),
            payload: s.payload,
        }
    }
}

impl TryFrom<SystemDescriptor> for CachingSystem {
    type Error = Error;

    fn try_from(d: SystemDescriptor) -> Result<Self> {
        crate::check_schema_version(d.schema_version)?;
        let config = SystemConfig::new(d.n, d.k, d.t, d.q)?;
        for row in &d.coding_matrix {
            if let Some(&x) = row.iter().find(|&&x| x >= d.q) {
                return Err(Error::Dimension(format!(
                    "entry {x} not reduced modulo {}",
                    d.q
                )));
            }
        }
        let coding = FieldMatrix::from_rows(config.field, config.m(), &d.coding_matrix)?;
        let sys = Self::from_matrix(config, coding)?;
        match d.payload {
            Some(p) => sys.with_payload(p),
            None => Ok(sys),
        }
    }
}
