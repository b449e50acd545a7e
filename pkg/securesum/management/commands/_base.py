import argparse
import logging

from django.core.management.base import BaseCommand, CommandError

from securesum.adversary import InferenceMode
from securesum.engine import ProtocolKind
from securesum.exceptions import SecureSumError
from securesum.experiments import COMMANDS, build_spec
from securesum.serializers import ExperimentSpecSerializer
from securesum.utils import write_atomically


class ExperimentCommand(BaseCommand):
    """
    Shared plumbing of the experiment commands: common flags, option
    merging, error translation and atomic output.

    Subclasses set ``experiment`` and add their own flags in ``add_experiment_arguments``.
    """

    experiment = None
    failure_message = None

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Flat key=value file; flags override its values.")
        parser.add_argument("--protocol", choices=ProtocolKind.values)
        parser.add_argument("--modulus", type=int)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--inference", choices=InferenceMode.values)
        parser.add_argument("--initiator-mask", action=argparse.BooleanOptionalAction, default=None,
                            help="Mask each ck/ksecure round with a value only P1 knows.")
        parser.add_argument("--jobs", type=int, help="Worker processes (default: all processors).")
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        if options["verbosity"] >= 2:
            logging.getLogger("securesum").setLevel(logging.DEBUG)

        experiment_options = set(ExperimentSpecSerializer().fields) | {"config"}
        flags = {name: value for name, value in options.items() if name in experiment_options}
        try:
            spec = build_spec(self.experiment, flags)
            outcome = COMMANDS[self.experiment](spec)
            write_atomically(outcome.files)
        except SecureSumError as e:
            raise CommandError(str(e))
        except OSError as e:
            raise CommandError(f"cannot write {e.filename}: {e.strerror}")

        for line in outcome.lines:
            self.stdout.write(line)
        if not outcome.ok:
            raise CommandError(self.failure_message or f"{self.experiment} failed")

