//! One end-to-end synthesis run: domain, edges, binning, generator fit,
//! sampling and decoding, with every data access recorded on a ledger.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discretize::{decode, discretize, fit_edges, DiscretizerConfig};
use crate::domain::{direct_domain, dp_domain, DomainStrategy, ExtractionConfig};
use crate::dp::{BudgetLedger, PrivacyBudget};
use crate::error::{Error, Result};
use crate::mst;
use crate::privbayes::{self, PrivBayesConfig};
use crate::table::{BinEdges, Domain, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Privbayes,
    Mst,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 2] = [GeneratorKind::Privbayes, GeneratorKind::Mst];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Privbayes => "privbayes",
            GeneratorKind::Mst => "mst",
        }
    }
}

/// Everything one synthesis run needs besides the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub strategy: DomainStrategy,
    /// Used when `strategy` is `provided`.
    pub provided: Option<Domain>,
    pub extraction: ExtractionConfig,
    pub discretizer: DiscretizerConfig,
    pub generator: GeneratorKind,
    pub privbayes: PrivBayesConfig,
    pub eps_pre: f64,
    pub eps_model: f64,
    /// Only consumed by MST.
    pub delta: f64,
}

impl PipelineConfig {
    /// Stage budgets: half of `eps_pre` goes to extraction under the DP
    /// strategy, and `delta` is only allotted to MST.
    pub fn budget(&self) -> Result<PrivacyBudget> {
        let delta = match self.generator {
            GeneratorKind::Mst => self.delta,
            GeneratorKind::Privbayes => 0.0,
        };
        PrivacyBudget::split(self.eps_pre, self.eps_model, delta, self.strategy == DomainStrategy::Dp)
    }
}

/// What was fitted, kept for the result file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase")]
pub enum ModelAudit {
    Privbayes {
        ordering: Vec<usize>,
        parents: Vec<Vec<usize>>,
    },
    Mst {
        edges: Vec<(usize, usize)>,
        sigma_one_way: f64,
        sigma_two_way: f64,
    },
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub synthetic: Table,
    pub domain: Domain,
    pub edges: Vec<BinEdges>,
    pub ledger: BudgetLedger,
    pub audit: ModelAudit,
}

/// Domain for `table` under the configured strategy.
pub fn extract_domain<R: Rng + ?Sized>(
    table: &Table,
    cfg: &PipelineConfig,
    ledger: &mut BudgetLedger,
    rng: &mut R,
) -> Result<Domain> {
    let domain = match cfg.strategy {
        DomainStrategy::Provided => cfg
            .provided
            .clone()
            .ok_or_else(|| Error::invalid("provided strategy without provided bounds"))?,
        DomainStrategy::Direct => direct_domain(table, ledger),
        DomainStrategy::Dp => dp_domain(table, ledger.budget().eps_extract, &cfg.extraction, ledger, rng)?,
    };
    domain.check_matches(table)?;
    Ok(domain)
}

/// Synthesizes a table of `table.n_rows()` records. Errors carry the name
/// of the stage that failed.
pub fn synthesize<R: Rng + ?Sized>(table: &Table, cfg: &PipelineConfig, rng: &mut R) -> Result<PipelineOutput> {
    let mut ledger = BudgetLedger::new(cfg.budget()?);
    let eps_disc = ledger.budget().eps_disc;
    let domain = extract_domain(table, cfg, &mut ledger, rng).map_err(|e| e.in_stage("domain extraction"))?;
    let edges = fit_edges(table, &domain, &cfg.discretizer, eps_disc, &mut ledger, rng)
        .map_err(|e| e.in_stage("discretization"))?;
    let dt = discretize(table, &edges).map_err(|e| e.in_stage("discretization"))?;
    let n = table.n_rows();
    let (sampled, audit) = match cfg.generator {
        GeneratorKind::Privbayes => {
            let fitted = privbayes::fit(&dt, &cfg.privbayes, cfg.eps_model, &mut ledger, rng)
                .map_err(|e| e.in_stage("generator fit"))?;
            let out = privbayes::sample(&fitted.net, &fitted.cpts, dt.names(), n, rng)
                .map_err(|e| e.in_stage("sampling"))?;
            let audit = ModelAudit::Privbayes {
                ordering: fitted.net.ordering,
                parents: fitted.net.parents,
            };
            (out, audit)
        }
        GeneratorKind::Mst => {
            let model = mst::fit_mst(&dt, cfg.eps_model, cfg.delta, &mut ledger, rng)
                .map_err(|e| e.in_stage("generator fit"))?;
            let calibrated = mst::calibrate(&model);
            let out = mst::sample_tree(&calibrated, dt.names(), n, rng).map_err(|e| e.in_stage("sampling"))?;
            let audit = ModelAudit::Mst {
                edges: model.edges,
                sigma_one_way: model.sigma_one_way,
                sigma_two_way: model.sigma_two_way,
            };
            (out, audit)
        }
    };
    let synthetic = decode(&sampled, &edges, rng).map_err(|e| e.in_stage("decoding"))?;
    ledger.verify_complete().map_err(|e| e.in_stage("budget check"))?;
    Ok(PipelineOutput {
        synthetic,
        domain,
        edges,
        ledger,
        audit,
    })
}
