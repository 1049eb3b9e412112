"""floret: a proof kernel, prover and semantics oracle for nested flowers."""

from .syntax import (
    ArityError, Atom, Bloom, Bouquet, CaptureError, FloretError, Flower,
    Garden, Signature, Substitution, VarId, alpha_eq, apply_subst,
    bound_vars, bouquet_text, canonicalize, depth, flower_text, free_var,
    free_vars, fresh_var, garden_text, is_capture_avoiding,
)
from .parse import ParseError, parse_bouquet
from .syntax import bouquet_text as print_bouquet
from .paths import BadPath, Context, Path, compose, inversions, is_pollinated, \
    pollination_candidates, split
from .rules import (
    ALL_RULES, CULTURAL, NATURAL, NotPollinated, PolarityMismatch,
    RuleInstance, RuleName, SideConditionViolated, applicable_instances,
    apply_rule,
)
from .derivations import (
    CheckResult, Derivation, build_strong_deduction_bwd,
    build_strong_deduction_fwd, check_derivation, check_proof_text,
    deduction_demo, deduction_flower, derive, digest, format_proof, is_proof,
    lift, load_proof, replay,
)
from .semantics import (
    Countermodel, Evaluation, KripkeModel, entails, enumerate_models,
    find_countermodel, forces, random_model, update,
)
from .formulas import Formula, decode, encode, eval_formula, formula_text, \
    parse_formula
from .prover import Outcome, SearchBudget, SearchOutcome, prove, \
    prove_hypothetical
from .fuzz import FuzzReport, fuzz_soundness, random_bouquet

__version__ = "0.1.0"
