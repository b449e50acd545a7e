from securesum.management.commands._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Exhaustive two-party coalition sweep over a range of party counts, as CSV."
    experiment = "sweep"

    def add_experiment_arguments(self, parser):
        parser.add_argument("--n", help="Party count or range, e.g. 4..8.")
        parser.add_argument("--segments", type=int, help="Segment count (ksecure only).")
        parser.add_argument("--out", help="CSV file; printed when omitted.")
