"""Information-theoretic inference of common ancestors in DAG models."""

from cainfer.algoinfo import (
    CompressionMeasure,
    SlackBudget,
    StringCorpus,
    algo_cmi,
    default_compressor,
    infer_string_ancestors,
    k_estimate,
)
from cainfer.dag import (
    Dag,
    ObservationGroups,
    ancestor_multiplicity,
    ancestral_closure,
    d_separated,
    global_markov_holds,
    local_markov_holds,
    validate_dag_model,
)
from cainfer.discrete import (
    DiscreteMeasure,
    JointDistribution,
    VariableDecl,
    cmi_discrete,
    entropy,
    fair_coin,
    from_samples,
    make_copies,
    make_parity,
    marginal,
    multi_information_c,
    redundancy_c,
    uniform,
)
from cainfer.inference import (
    ObservationValues,
    ancestor_entropy_bound,
    check_decomposition,
    epsilon_and_bound,
    infer_multiplicity,
    submodularity_audit,
    synergy_decomposition,
)
from cainfer.measure import GroundSet, InfoMeasure, audit_axioms, audit_derived, cmi, is_independent
from cainfer.oracle import BayesNet, VerifyConfig, build_hub_net, build_parity_net, exact_joint, random_bayes_net, verify_batch

__version__ = "0.1.0"
