//! Experiment configuration: a strict TOML schema with validation and a
//! stable content hash carried into every emitted record.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact_engine::StateVector;
use crate::initial_states::{make_ghz, make_rotated_ghz, SuperposedPair};
use crate::metrology::PriorInterval;
use crate::pauli_graph::{
    build_graph, ising_chain_with_local_strength, parse_hamiltonian_spec, GraphKind,
    PerturbedHamiltonian,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exact,
    Mps,
    Cluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// adaptive LOCC with classically computed bases
    Locc,
    /// fixed x-basis measurement with the per-trial mean-|X| readout
    Naive,
    /// time-reversal protocol measuring the deformed all-X observable
    Undo,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub backend: Backend,
    #[serde(default = "default_protocol")]
    pub protocol: Protocol,
    pub n_list: Vec<usize>,
    pub t: f64,
    pub omega_true: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_prime: Option<f64>,
    pub trials: usize,
    #[serde(default = "default_campaigns")]
    pub campaigns: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub initial_state: InitialStateConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_protocol() -> Protocol {
    Protocol::Locc
}

fn default_campaigns() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum HamiltonianConfig {
    /// V = 0
    Free,
    /// nearest-neighbor XX chain with the given *local strength* J
    IsingChain { local_strength: f64 },
    /// on-site X field of strength J per site
    OnsiteX { strength: f64 },
    /// explicit Hamiltonian specification file (single N)
    File { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum InitialStateConfig {
    Ghz,
    Rotated { alpha: [f64; 2], beta: [f64; 2] },
}

impl Default for InitialStateConfig {
    fn default() -> Self {
        Self::Ghz
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// bisection tolerance = prior interval / this
    pub bisection_frac: f64,
    pub quadrature_nodes: usize,
    pub mps_d_max: usize,
    pub cluster_order: usize,
    pub cluster_c_m: f64,
    /// "exact" string enumeration or "sampled" classical estimate of <P>'
    pub p_prime_mode: PPrimeMode,
    pub p_prime_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PPrimeMode {
    Exact,
    Sampled,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            bisection_frac: 8192.0,
            quadrature_nodes: 16,
            mps_d_max: 64,
            cluster_order: 6,
            cluster_c_m: 0.35,
            p_prime_mode: PPrimeMode::Exact,
            p_prime_samples: 4096,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Validation("n_list must not be empty".into()));
        }
        if self.t <= 0.0 {
            return Err(Error::Validation("t must be positive".into()));
        }
        if self.trials == 0 || self.campaigns == 0 {
            return Err(Error::Validation("trials and campaigns must be positive".into()));
        }
        for &n in &self.n_list {
            let prior = self.prior(n)?;
            if !prior.contains(self.omega_true) {
                return Err(Error::Validation(format!(
                    "omega_true {} outside the prior interval [{}, {}] at N = {n}",
                    self.omega_true,
                    prior.lo(),
                    prior.hi()
                )));
            }
            if self.backend == Backend::Mps {
                // chain compatibility: the built-in families are chains; a
                // file Hamiltonian must declare a chain graph
                if let HamiltonianConfig::File { path } = &self.hamiltonian {
                    let text = std::fs::read_to_string(path)?;
                    let parsed = parse_hamiltonian_spec(&text)?;
                    if !parsed.hamiltonian.graph().is_chain() {
                        return Err(Error::Validation(
                            "mps backend requires a chain graph".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn prior(&self, n: usize) -> Result<PriorInterval> {
        match self.omega_prime {
            Some(w) => PriorInterval::centered(w, n, self.t),
            None => PriorInterval::containing(self.omega_true, n, self.t),
        }
    }

    /// The Hamiltonian at field omega for register size n.
    pub fn hamiltonian_at(&self, n: usize, omega: f64) -> Result<PerturbedHamiltonian> {
        match &self.hamiltonian {
            HamiltonianConfig::Free => {
                let g = build_graph(&GraphKind::Chain { n })?;
                PerturbedHamiltonian::new(g, vec![], omega)
            }
            HamiltonianConfig::IsingChain { local_strength } => {
                ising_chain_with_local_strength(n, *local_strength, omega)
            }
            HamiltonianConfig::OnsiteX { strength } => {
                crate::baselines::onsite_x_hamiltonian(n, *strength, omega)
            }
            HamiltonianConfig::File { path } => {
                let text = std::fs::read_to_string(path)?;
                let parsed = parse_hamiltonian_spec(&text)?;
                let h = parsed.hamiltonian;
                if h.qubit_count() != n {
                    return Err(Error::Validation(format!(
                        "hamiltonian file has {} qubits but N = {n} requested",
                        h.qubit_count()
                    )));
                }
                Ok(h.with_omega(omega))
            }
        }
    }

    pub fn initial_pair(&self, n: usize) -> Result<SuperposedPair> {
        match &self.initial_state {
            InitialStateConfig::Ghz => make_ghz(n),
            InitialStateConfig::Rotated { alpha, beta } => make_rotated_ghz(
                n,
                num_complex::Complex64::new(alpha[0], alpha[1]),
                num_complex::Complex64::new(beta[0], beta[1]),
            ),
        }
    }

    pub fn initial_state(&self, n: usize) -> Result<StateVector> {
        Ok(self.initial_pair(n)?.combined())
    }

    /// Stable hash of the canonical serialized config.
    pub fn content_hash(&self) -> String {
        let canon = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        hex_prefix(&digest, 12)
    }
}

fn hex_prefix(bytes: &[u8], chars: usize) -> String {
    let mut s = String::new();
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
        if s.len() >= chars {
            break;
        }
    }
    s.truncate(chars);
    s
}
