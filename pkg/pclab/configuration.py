import logging

logger = logging.getLogger(__name__)


class Configuration:
    """
    Settings shared by the analyses, the simulator and the command line. This can include:
    * A seed: makes randomized counterexample search and generators reproducible
    * A budget: the number of random instances tried by a counterexample search
    * allow_skip: whether witness policies may skip facts (False checks the non-skipping variant of transfer)
    * An Evaluator class: instantiated to evaluate queries, BacktrackingEvaluator when not set
    * workers: threads used to evaluate node chunks; 1 evaluates them one after another
    * universe_cap: the largest fact universe sampled by the simulator
    * oracle_cap: the largest number of variables or vertices accepted by the brute-force oracles
    * output_format: 'text' or 'json'
    """

    def __init__(self,
                 seed: int = 0,
                 budget: int = 1000,
                 allow_skip: bool = True,
                 evaluator=None,
                 workers: int = 1,
                 universe_cap: int = 4096,
                 oracle_cap: int = 16,
                 output_format: str = 'text'
                 ):
        if budget < 1:
            raise ValueError("The search budget must be at least 1")
        if workers < 1:
            raise ValueError("At least one worker is needed")
        if output_format not in ('text', 'json'):
            raise ValueError(f"Unsupported output format {output_format}")
        self.seed = seed
        self.budget = budget
        self.allow_skip = allow_skip
        self.evaluator = evaluator
        self.workers = workers
        self.universe_cap = universe_cap
        self.oracle_cap = oracle_cap
        self.output_format = output_format
