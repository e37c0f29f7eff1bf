use ebnull_core::sim::{
    run_replication, summarize, Method, MethodSettings, SimScenario, SimSummary,
};
use ebnull_core::Error;
use rayon::prelude::*;

/// Replications run on the rayon pool. Each has its own random stream and the
/// records are reduced in replication order, so the summary does not depend
/// on the number of threads.
pub fn run_scenario_parallel(
    scenario: &SimScenario,
    settings: &MethodSettings,
    methods: &[Method],
) -> Result<SimSummary, Error> {
    scenario.validate()?;
    if scenario.n_reps == 0 {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    let records: Vec<_> = (0..scenario.n_reps)
        .into_par_iter()
        .map(|rep| run_replication(scenario, settings, methods, rep))
        .collect();
    Ok(summarize(methods, &records))
}
