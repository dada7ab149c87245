use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{
    component_central_exponent, ExperimentConfig, ExperimentError, Report, TwistPolicy, Workspace, GAMMA_NOISE_FLOOR,
};
use crate::rankin_selberg::{gamma_csv, gamma_table, GammaRecord};

#[derive(Clone, Debug, Serialize)]
pub struct GammaTableReport {
    pub n: usize,
    pub q: u32,
    pub r_max: usize,
    pub twist_policy: TwistPolicy,
    pub records: Vec<GammaRecord>,
    pub ill_defined: usize,
}

impl Report for GammaTableReport {
    fn kind(&self) -> &'static str {
        "gamma"
    }

    fn passed(&self) -> bool {
        self.ill_defined == 0
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "gamma table GL_{}(F_{}), twists up to rank {} ({:?})",
            self.n, self.q, self.r_max, self.twist_policy
        );
        for r in &self.records {
            let _ = writeln!(
                s,
                "  pi {:>3} x tau ({}, {:>3}): gamma = {:+.9} {:+.9}i  residual {:.1e}  probes {}",
                r.pi_id, r.tau_rank, r.tau_id, r.gamma_re, r.gamma_im, r.max_residual, r.probes
            );
        }
        let _ = writeln!(s, "records: {}, ill-defined: {}", self.records.len(), self.ill_defined);
        s
    }

    fn csv(&self) -> Option<String> {
        Some(gamma_csv(&self.records))
    }
}

/// Gamma records for every cuspidal `pi` against the configured twists.
pub fn run_gamma_table(config: &ExperimentConfig) -> Result<GammaTableReport, ExperimentError> {
    let mut ws = Workspace::new(config)?;
    let r_max = config.r_max();
    let pis = ws.main.cuspidals();
    let twists = ws.twist_family(r_max, config.twist_policy)?;
    let records = gamma_table(&pis, &twists, r_max, config.seed)?;
    let ill_defined = records.iter().filter(|r| !r.well_defined()).count();
    Ok(GammaTableReport {
        n: config.n,
        q: ws.main.ctx.q(),
        r_max,
        twist_policy: config.twist_policy,
        records,
        ill_defined,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Distinguisher {
    pub tau_rank: usize,
    pub tau_id: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConversePair {
    pub pi1: usize,
    pub pi2: usize,
    pub central_exponent: u32,
    /// Least `(rank, id)` twist whose gamma values differ, if any.
    pub distinguished_by: Option<Distinguisher>,
    pub failure: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConverseReport {
    pub n: usize,
    pub q: u32,
    pub r_max: usize,
    pub twist_policy: TwistPolicy,
    pub separation_tolerance: f64,
    pub cuspidal_count: usize,
    pub pair_count: usize,
    pub distinguished: usize,
    pub failures: usize,
    pub ill_defined_gammas: usize,
    pub pairs: Vec<ConversePair>,
    pub gammas: Vec<GammaRecord>,
}

impl Report for ConverseReport {
    fn kind(&self) -> &'static str {
        "converse"
    }

    fn passed(&self) -> bool {
        self.failures == 0 && self.ill_defined_gammas == 0
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "converse experiment GL_{}(F_{}), twists up to rank {} ({:?})",
            self.n, self.q, self.r_max, self.twist_policy
        );
        let _ = writeln!(s, "cuspidal components: {}", self.cuspidal_count);
        for p in &self.pairs {
            match &p.distinguished_by {
                Some(d) => {
                    let _ = writeln!(
                        s,
                        "  pair ({}, {}) omega^{}: distinguished by tau (rank {}, id {}), |delta gamma| = {:.3e}",
                        p.pi1, p.pi2, p.central_exponent, d.tau_rank, d.tau_id, d.delta
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        "  pair ({}, {}) omega^{}: NOT distinguished by twists of rank <= {} \
                         (at finite level this indicates an implementation bug)",
                        p.pi1, p.pi2, p.central_exponent, self.r_max
                    );
                }
            }
        }
        let _ = writeln!(
            s,
            "pairs with equal central character: {}, distinguished: {}, failures: {}, ill-defined gammas: {}",
            self.pair_count, self.distinguished, self.failures, self.ill_defined_gammas
        );
        s
    }

    fn csv(&self) -> Option<String> {
        Some(gamma_csv(&self.gammas))
    }
}

/// For each pair of distinct cuspidals with equal central character, finds
/// the least twist `(rank, id)` separating their gamma factors.
pub fn run_converse(config: &ExperimentConfig) -> Result<ConverseReport, ExperimentError> {
    let mut ws = Workspace::new(config)?;
    let r_max = config.r_max();
    let pis = ws.main.cuspidals();
    let twists = ws.twist_family(r_max, config.twist_policy)?;
    let gammas = gamma_table(&pis, &twists, r_max, config.seed)?;
    let ill_defined_gammas = gammas.iter().filter(|r| !r.well_defined()).count();

    // (pi, rank, tau) -> gamma
    let lookup: BTreeMap<(usize, usize, usize), &GammaRecord> =
        gammas.iter().map(|r| ((r.pi_id, r.tau_rank, r.tau_id), r)).collect();
    let twist_keys: Vec<(usize, usize)> =
        twists.iter().take(r_max).flat_map(|fam| fam.iter().map(|t| (t.rank(), t.id))).collect();

    let mut pairs = Vec::new();
    for (a, p1) in pis.iter().enumerate() {
        for p2 in &pis[a + 1..] {
            let e1 = component_central_exponent(&ws.field, p1);
            if e1 != component_central_exponent(&ws.field, p2) {
                continue;
            }
            let mut found = None;
            for &(rank, tau) in &twist_keys {
                let g1 = lookup[&(p1.id, rank, tau)].gamma();
                let g2 = lookup[&(p2.id, rank, tau)].gamma();
                let delta = (g1 - g2).norm();
                if delta > GAMMA_NOISE_FLOOR && delta <= config.tol_sep {
                    return Err(ExperimentError::AmbiguousSeparation {
                        pi1: p1.id,
                        pi2: p2.id,
                        tau_rank: rank,
                        tau_id: tau,
                        delta,
                        tol: config.tol_sep,
                    });
                }
                if found.is_none() && delta > config.tol_sep {
                    found = Some(Distinguisher { tau_rank: rank, tau_id: tau, delta });
                }
            }
            pairs.push(ConversePair {
                pi1: p1.id,
                pi2: p2.id,
                central_exponent: e1,
                failure: found.is_none(),
                distinguished_by: found,
            });
        }
    }
    let failures = pairs.iter().filter(|p| p.failure).count();
    Ok(ConverseReport {
        n: config.n,
        q: ws.main.ctx.q(),
        r_max,
        twist_policy: config.twist_policy,
        separation_tolerance: config.tol_sep,
        cuspidal_count: pis.len(),
        pair_count: pairs.len(),
        distinguished: pairs.len() - failures,
        failures,
        ill_defined_gammas,
        pairs,
        gammas,
    })
}
