//! One module per subcommand, plus the settings they share.

pub mod estimate;
pub mod plot;
pub mod solve;
pub mod verify;

use glp_core::estimation::EstimationConfig;
use glp_core::solver::SolverConfig;
use glp_core::weights::DistributionSpec;

use crate::config::Params;
use crate::store::Store;
use crate::CliError;

pub const DEFAULT_OUT: &str = "glp-out";

pub fn store(params: &Params) -> Store {
    Store::new(params.raw("out").unwrap_or(DEFAULT_OUT))
}

pub fn dimension(params: &Params) -> Result<usize, CliError> {
    let d: usize = params.get("d")?.unwrap_or(2);
    if d == 0 {
        return Err(CliError::Config {
            source_loc: "configuration".into(),
            field: "d".into(),
            message: "dimension must be at least 1".into(),
        });
    }
    Ok(d)
}

pub fn distribution(params: &Params) -> Result<DistributionSpec, CliError> {
    let spec: DistributionSpec = params.require("dist")?;
    spec.validate()?;
    Ok(spec)
}

pub fn estimation_config(params: &Params) -> Result<EstimationConfig, CliError> {
    let defaults = EstimationConfig::default();
    Ok(EstimationConfig {
        solver: SolverConfig {
            node_cap: params.get("node_cap")?.unwrap_or(defaults.solver.node_cap),
            ..defaults.solver
        },
        beam_width: params.get("beam_width")?.unwrap_or(defaults.beam_width),
    })
}
