from securesum.management.commands._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Check the protocol's correctness, complexity and collusion-resistance claims."
    experiment = "verify"
    failure_message = "verification failed"

    def add_experiment_arguments(self, parser):
        parser.add_argument("--n", help="Party-count range for the leakage sweeps (default 4..12).")
        parser.add_argument("--cases", type=int, help="Random correctness cases per (protocol, n).")
