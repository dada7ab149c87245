//! Experiment orchestration: configuration, component inventories, the
//! converse experiment, audits and verification suites, and their reports.

mod audit;
mod converse;
mod report;
mod verify;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::field::{frobenius_orbits, make_field, Field, FieldError, MultiplicativeCharacter};
use crate::gelfand_graev::{GGModule, GenericComponent, SpectralError, SplitDiagnostics, SplitOptions};
use crate::group::{gl_order, unipotent_order, GroupContext, GroupError, MAX_RANK};
use crate::rankin_selberg::{GammaError, TwistFamily};

pub use audit::{
    central_character_probe, run_height_audit, run_special_pair_audit, CentralCharReport, HeightAuditReport,
    SpecialPairReport,
};
pub use converse::{run_converse, run_gamma_table, ConversePair, ConverseReport, Distinguisher, GammaTableReport};
pub use report::{Envelope, Report, SCHEMA_VERSION};
pub use verify::{run_verify, Check, Suite, VerifyReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(
        "gamma difference {delta:e} for pi {pi1} vs pi {pi2} at twist (rank {tau_rank}, id {tau_id}) falls between the \
         noise floor 1e-8 and the separation tolerance {tol:e}; review the tolerances before deciding"
    )]
    AmbiguousSeparation { pi1: usize, pi2: usize, tau_rank: usize, tau_id: usize, delta: f64, tol: f64 },
}

impl ExperimentError {
    /// Configuration problems map to a usage error; everything else is a
    /// failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(self, ExperimentError::Config(_) | ExperimentError::Field(_))
    }
}

/// Which twists `tau` enter gamma tables and the converse experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwistPolicy {
    /// All characters at rank 1, cuspidal components at higher rank.
    CuspidalOnly,
    AllGeneric,
}

/// Noise floor below which gamma differences count as agreement.
pub const GAMMA_NOISE_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: u32,
    pub k: u32,
    pub r_max: Option<usize>,
    pub twist_policy: TwistPolicy,
    pub tol_group: f64,
    pub tol_sep: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(n: usize, p: u32, k: u32) -> Self {
        ExperimentConfig {
            n,
            p,
            k,
            r_max: None,
            twist_policy: TwistPolicy::CuspidalOnly,
            tol_group: crate::gelfand_graev::DEFAULT_GROUP_TOL,
            tol_sep: 1e-6,
            seed: 0,
        }
    }

    /// `r_max`, defaulting to `floor(n/2)`.
    pub fn r_max(&self) -> usize {
        self.r_max.unwrap_or(self.n / 2)
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.k)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(1..=MAX_RANK).contains(&self.n) {
            return Err(ExperimentError::Config(format!("n = {} outside 1..={MAX_RANK}", self.n)));
        }
        if self.k == 0 {
            return Err(ExperimentError::Config("k must be at least 1".into()));
        }
        make_field(self.p, self.k)?;
        if let Some(r) = self.r_max {
            if self.n > 1 && r > self.n - 1 {
                return Err(ExperimentError::Config(format!("r_max = {r} exceeds n - 1 = {}", self.n - 1)));
            }
        }
        let q = self.q();
        let module_dim = gl_order(self.n, q) / unipotent_order(self.n, q);
        if module_dim > crate::gelfand_graev::MODULE_DIM_BOUND as u64 {
            return Err(ExperimentError::Config(format!(
                "GL_{}(F_{q}) is out of range: |U\\G| = {module_dim} exceeds {}",
                self.n,
                crate::gelfand_graev::MODULE_DIM_BOUND
            )));
        }
        if !(self.tol_group > 0.0 && self.tol_sep > GAMMA_NOISE_FLOOR) {
            return Err(ExperimentError::Config(format!(
                "tolerances must satisfy tol_group > 0 and tol_sep > {GAMMA_NOISE_FLOOR:e}"
            )));
        }
        Ok(())
    }

    fn split_options(&self, rank: usize) -> SplitOptions {
        SplitOptions {
            group_tol: self.tol_group,
            min_gap: crate::gelfand_graev::DEFAULT_MIN_GAP,
            seed: self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(rank as u64),
        }
    }
}

/// `GL_n(F_q)` split into its generic components.
pub struct Inventory {
    pub ctx: GroupContext,
    pub module: GGModule,
    pub components: Vec<GenericComponent>,
    pub diagnostics: SplitDiagnostics,
}

impl Inventory {
    pub fn build(field: &Field, n: usize, opts: &SplitOptions) -> Result<Self, ExperimentError> {
        let ctx = GroupContext::new(field, n)?;
        let module = GGModule::new(&ctx)?;
        let (components, diagnostics) = module.split_generic(opts)?;
        Ok(Inventory { ctx, module, components, diagnostics })
    }

    pub fn cuspidals(&self) -> Vec<GenericComponent> {
        self.components.iter().filter(|c| c.cuspidal).cloned().collect()
    }
}

/// Everything an experiment needs: the field, the rank-`n` inventory and the
/// twist inventories of ranks `1..n`, built on demand.
pub struct Workspace {
    pub config: ExperimentConfig,
    pub field: Field,
    pub main: Inventory,
    twists: Vec<Inventory>,
}

impl Workspace {
    pub fn new(config: &ExperimentConfig) -> Result<Self, ExperimentError> {
        config.validate()?;
        let field = make_field(config.p, config.k)?;
        let main = Inventory::build(&field, config.n, &config.split_options(config.n))?;
        Ok(Workspace { config: config.clone(), field, main, twists: Vec::new() })
    }

    /// Builds twist inventories up to rank `r`.
    pub fn ensure_twists(&mut self, r: usize) -> Result<(), ExperimentError> {
        while self.twists.len() < r.min(self.config.n.saturating_sub(1)) {
            let rank = self.twists.len() + 1;
            self.twists.push(Inventory::build(&self.field, rank, &self.config.split_options(rank))?);
        }
        Ok(())
    }

    pub fn twist_inventory(&self, r: usize) -> &Inventory {
        &self.twists[r - 1]
    }

    /// Twists of ranks `1..=r` under `policy`.
    pub fn twist_family(&mut self, r: usize, policy: TwistPolicy) -> Result<TwistFamily, ExperimentError> {
        self.ensure_twists(r)?;
        Ok(self.twists[..r.min(self.twists.len())]
            .iter()
            .map(|inv| {
                inv.components
                    .iter()
                    .filter(|c| policy == TwistPolicy::AllGeneric || c.rank() == 1 || c.cuspidal)
                    .cloned()
                    .collect()
            })
            .collect())
    }
}

/// The `e` with `omega(g^m) = exp(2 pi i e m / (q-1))` for the field generator `g`.
pub fn central_exponent(field: &Field, omega_at_generator: Complex64) -> u32 {
    let qm1 = field.order() as f64 - 1.0;
    let turns = omega_at_generator.arg() / std::f64::consts::TAU;
    ((turns * qm1).round().rem_euclid(qm1)) as u32
}

fn component_central_exponent(field: &Field, c: &GenericComponent) -> u32 {
    central_exponent(field, c.omega(field.generator()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentSummary {
    pub id: usize,
    pub dimension: usize,
    pub cuspidal: bool,
    pub central_exponent: u32,
}

/// Cuspidal counts, dimensions and central characters predicted by regular
/// Frobenius orbits on the characters of `F_{q^n}^x`.
#[derive(Clone, Debug, Serialize)]
pub struct CuspidalOracle {
    pub count: usize,
    pub dimension: u64,
    /// Restrictions of the regular-orbit characters to `F_q^x`, sorted.
    pub central_exponents: Vec<u32>,
}

pub fn cuspidal_oracle(field: &Field, n: usize) -> Result<CuspidalOracle, ExperimentError> {
    let q = field.order() as u64;
    let dimension = (1..n as u32).map(|i| q.pow(i) - 1).product();
    let big = make_field(field.characteristic(), field.degree() * n as u32)?;
    let orbits = frobenius_orbits(&big, field)?;
    let mut central_exponents = Vec::new();
    for orbit in orbits.regular() {
        let theta = MultiplicativeCharacter::new(&big, orbit[0] as i64);
        central_exponents.push(theta.restrict_to(field)?.exponent());
    }
    central_exponents.sort_unstable();
    Ok(CuspidalOracle { count: orbits.regular_count(), dimension, central_exponents })
}

#[derive(Clone, Debug, Serialize)]
pub struct InventoryReport {
    pub n: usize,
    pub q: u32,
    pub group_order: u64,
    pub module_dim: usize,
    pub hecke_dim: usize,
    pub double_cosets: usize,
    pub dimension_sum: usize,
    pub components: Vec<ComponentSummary>,
    pub cuspidal_count: usize,
    pub oracle: CuspidalOracle,
    pub oracle_agrees: bool,
}

pub fn run_inventory(config: &ExperimentConfig) -> Result<InventoryReport, ExperimentError> {
    let ws = Workspace::new(config)?;
    inventory_report(&ws.field, &ws.main)
}

pub fn inventory_report(field: &Field, inv: &Inventory) -> Result<InventoryReport, ExperimentError> {
    let n = inv.ctx.rank();
    let components: Vec<ComponentSummary> = inv
        .components
        .iter()
        .map(|c| ComponentSummary {
            id: c.id,
            dimension: c.dimension,
            cuspidal: c.cuspidal,
            central_exponent: component_central_exponent(field, c),
        })
        .collect();
    let oracle = cuspidal_oracle(field, n)?;
    let cusp: Vec<&ComponentSummary> = components.iter().filter(|c| c.cuspidal).collect();
    let mut exps: Vec<u32> = cusp.iter().map(|c| c.central_exponent).collect();
    exps.sort_unstable();
    let oracle_agrees = cusp.len() == oracle.count
        && cusp.iter().all(|c| c.dimension as u64 == oracle.dimension)
        && exps == oracle.central_exponents;
    Ok(InventoryReport {
        n,
        q: inv.ctx.q(),
        group_order: inv.ctx.order(),
        module_dim: inv.diagnostics.module_dim,
        hecke_dim: inv.diagnostics.hecke_dim,
        double_cosets: inv.diagnostics.double_cosets,
        dimension_sum: components.iter().map(|c| c.dimension).sum(),
        cuspidal_count: cusp.len(),
        components,
        oracle,
        oracle_agrees,
    })
}

impl Report for InventoryReport {
    fn kind(&self) -> &'static str {
        "inventory"
    }

    fn passed(&self) -> bool {
        self.dimension_sum == self.module_dim && self.components.len() == self.hecke_dim && self.oracle_agrees
    }

    fn text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "GL_{}(F_{}): |G| = {}, |U\\G| = {}", self.n, self.q, self.group_order, self.module_dim);
        let _ = writeln!(
            s,
            "Hecke algebra dimension {} ({} double cosets, {} relevant)",
            self.hecke_dim, self.double_cosets, self.hecke_dim
        );
        for c in &self.components {
            let _ = writeln!(
                s,
                "  component {:>3}: dimension {:>5}{}  central character exponent {}",
                c.id,
                c.dimension,
                if c.cuspidal { "  cuspidal" } else { "          " },
                c.central_exponent
            );
        }
        let _ = writeln!(
            s,
            "dimension sum {} / {}; cuspidal {} (Frobenius-orbit prediction {} of dimension {}){}",
            self.dimension_sum,
            self.module_dim,
            self.cuspidal_count,
            self.oracle.count,
            self.oracle.dimension,
            if self.oracle_agrees { "" } else { "  MISMATCH" }
        );
        s
    }
}
