from securesum.management.commands._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Estimate per-class leakage probability over random coalitions and inputs."
    experiment = "montecarlo"

    def add_experiment_arguments(self, parser):
        parser.add_argument("--n", help="Number of parties.")
        parser.add_argument("--trials", type=int)
        parser.add_argument("--coalition-size", type=int)
        parser.add_argument("--segments", type=int, help="Segment count (ksecure only).")
        parser.add_argument("--report", help="Monte Carlo report file (JSON).")
        parser.add_argument("--out", help="Alias of --report.")
