//! Static registry of runnable experiments: name, the statement each probes,
//! and the config keys it requires.

pub struct ExperimentInfo {
    pub name: &'static str,
    pub anchor: &'static str,
    pub required: &'static [&'static str],
    pub description: &'static str,
}

pub const EXPERIMENTS: &[ExperimentInfo] = &[
    ExperimentInfo {
        name: "sogge_ratio",
        anchor: "Prop 2.4",
        required: &["geometry", "params.n"],
        description: "eigenfunction L^p growth ratios across the spectrum",
    },
    ExperimentInfo {
        name: "deviation",
        anchor: "Lemma 3.1",
        required: &["family", "params.c", "params.lambda_grid", "params.trials"],
        description: "Monte Carlo tails of weighted sums vs the sub-Gaussian bound",
    },
    ExperimentInfo {
        name: "khinchin",
        anchor: "Lemma 3.1 / Lemma 4.2",
        required: &["family", "params.c", "params.trials"],
        description: "L^p moment growth of weighted sums against sqrt(p)",
    },
    ExperimentInfo {
        name: "averaging",
        anchor: "Prop 4.1",
        required: &["geometry", "family", "params.s", "params.t_final", "params.trials", "params.n"],
        description: "weighted space-time L^4 norm of the randomized free flow",
    },
    ExperimentInfo {
        name: "chaos",
        anchor: "Prop 4.3",
        required: &["geometry", "family", "params.s", "params.trials", "params.n"],
        description: "L^p(Omega) growth of the averaging norm against sqrt(p)",
    },
    ExperimentInfo {
        name: "strichartz_probe",
        anchor: "Prop 2.2",
        required: &["geometry", "params.s", "params.p", "params.q", "params.n_grid", "params.trials"],
        description: "half-wave flow ratios across doubling cutoffs",
    },
    ExperimentInfo {
        name: "local_existence",
        anchor: "Thm 1 (eq.prop)",
        required: &["geometry", "family", "params.s", "params.t_grid", "params.trials", "params.n"],
        description: "success fraction of the fixed point per horizon",
    },
    ExperimentInfo {
        name: "no_regularization",
        anchor: "Lemma B.1",
        required: &["geometry", "family", "params.s", "params.epsilon", "params.n", "params.truncations", "params.trials"],
        description: "growth of truncated Sobolev sums under randomization",
    },
    ExperimentInfo {
        name: "norm_inflation",
        anchor: "Prop A.1",
        required: &["geometry", "params.s", "params.n_schedule"],
        description: "bubble-data norm growth across the concentration schedule",
    },
    ExperimentInfo {
        name: "hs_lower_bound",
        anchor: "Lemma A.4",
        required: &["geometry", "params.s", "params.lambda_grid"],
        description: "oscillatory composition lower-bound sweep",
    },
    ExperimentInfo {
        name: "picard_single",
        anchor: "Prop 5.1",
        required: &["geometry", "params.s", "params.t_final", "params.n"],
        description: "one fixed-point solve with its full report",
    },
    ExperimentInfo {
        name: "reference_convergence",
        anchor: "Eq. (1) oracle",
        required: &["geometry", "params.t_final"],
        description: "order and energy drift of the splitting reference solver",
    },
];

pub fn find(name: &str) -> Option<&'static ExperimentInfo> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}
