from securesum.management.commands._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Run one protocol execution, print the announced sum and optionally save the transcript."
    experiment = "run"

    def add_experiment_arguments(self, parser):
        parser.add_argument("--n", help="Number of parties (inferred from --inputs when omitted).")
        parser.add_argument("--inputs", help='Comma-separated inputs, or "random".')
        parser.add_argument("--segments", type=int, help="Segment count (ksecure only).")
        parser.add_argument("--out", help="Transcript file.")
        parser.add_argument("--coalition", help="Analyse this coalition, e.g. 2,3.")
        parser.add_argument("--report", help="Leakage report file (JSON); printed when omitted.")
