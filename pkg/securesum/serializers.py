from rest_framework import serializers
from rest_framework.renderers import JSONRenderer

from securesum.adversary import Coalition, InferenceMode
from securesum.arithmetic import MAX_MODULUS, is_prime
from securesum.engine import ProtocolKind
from securesum.exceptions import SecureSumError
from securesum.utils import parse_int_list, parse_n_range

COMMANDS = ("run", "sweep", "montecarlo", "verify")
RANDOM_INPUTS = "random"


class ExperimentSpecSerializer(serializers.Serializer):
    """
    Validates the merged experiment options (defaults, config file, flags)
    and builds an ExperimentSpec. ``context["sweep_max_n"]`` bounds sweeps.
    """

    command = serializers.ChoiceField(choices=COMMANDS)
    protocol = serializers.ChoiceField(choices=ProtocolKind.choices, default=ProtocolKind.CK_SECURE.value)
    n = serializers.CharField(required=False, allow_null=True)
    modulus = serializers.IntegerField(min_value=2, max_value=MAX_MODULUS)
    seed = serializers.IntegerField(min_value=0)
    trials = serializers.IntegerField(min_value=1)
    cases = serializers.IntegerField(min_value=1)
    coalition_size = serializers.IntegerField(min_value=1)
    coalition = serializers.CharField(required=False, allow_null=True)
    inputs = serializers.CharField(default=RANDOM_INPUTS)
    segments = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    out = serializers.CharField(required=False, allow_null=True)
    report = serializers.CharField(required=False, allow_null=True)
    jobs = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    initiator_mask = serializers.BooleanField(default=False)
    inference = serializers.ChoiceField(choices=InferenceMode.choices, default=InferenceMode.LINEAR.value)

    def _parsed(self, parser, value, *args):
        try:
            return parser(value, *args)
        except SecureSumError as e:
            raise serializers.ValidationError(str(e))

    def validate_n(self, value):
        return None if value is None else self._parsed(parse_n_range, value)

    def validate_inputs(self, value):
        if value.strip().lower() == RANDOM_INPUTS:
            return None
        return self._parsed(parse_int_list, value, "inputs")

    def validate_coalition(self, value):
        return None if value is None else self._parsed(parse_int_list, value, "party")

    def validate(self, attrs):
        command, kind = attrs["command"], ProtocolKind(attrs["protocol"])
        n_range, inputs, modulus = attrs.get("n"), attrs.get("inputs"), attrs["modulus"]

        if n_range is None and inputs is not None:
            n_range = attrs["n"] = (len(inputs), len(inputs))
        if n_range is None and command != "verify":
            raise serializers.ValidationError({"n": "this field is required."})

        if command in ("run", "montecarlo") and n_range[0] != n_range[1]:
            raise serializers.ValidationError({"n": f"{command} takes a single party count, not a range."})
        if command == "sweep":
            limit = self.context.get("sweep_max_n", 16)
            if n_range[1] > limit:
                raise serializers.ValidationError({"n": f"sweeps are limited to n <= {limit}."})

        if inputs is not None:
            if command != "run":
                raise serializers.ValidationError({"inputs": f"explicit inputs only apply to run, not {command}."})
            if len(inputs) != n_range[0]:
                raise serializers.ValidationError(
                    {"inputs": f"expected {n_range[0]} inputs for n={n_range[0]}, got {len(inputs)}."}
                )
            if any(not 0 <= x < modulus for x in inputs):
                raise serializers.ValidationError({"inputs": f"every input must lie in [0, {modulus})."})

        coalition = attrs.get("coalition")
        if coalition is not None:
            if command != "run":
                raise serializers.ValidationError({"coalition": "a fixed coalition only applies to run."})
            try:
                Coalition.of(coalition, n_range[0])
            except SecureSumError as e:
                raise serializers.ValidationError({"coalition": str(e)})

        if command == "montecarlo" and not 1 <= attrs["coalition_size"] <= n_range[0] - 1:
            raise serializers.ValidationError(
                {"coalition_size": f"must be in [1, {n_range[0] - 1}] for n={n_range[0]}."}
            )
        if attrs.get("segments") is not None and kind is not ProtocolKind.K_SECURE:
            raise serializers.ValidationError({"segments": f"only {ProtocolKind.K_SECURE.value} takes a segment count."})

        needs_field = command in ("sweep", "montecarlo", "verify") or coalition is not None
        if needs_field and not is_prime(modulus):
            raise serializers.ValidationError({"modulus": f"{modulus} is not prime; leakage analysis needs a field."})
        return attrs

    def create(self, validated_data):
        from securesum.experiments import ExperimentSpec

        return ExperimentSpec(**validated_data)


class LeakageVerdictSerializer(serializers.Serializer):
    victim = serializers.IntegerField()
    victim_class = serializers.CharField()
    leaked = serializers.BooleanField()
    real_determined = serializers.BooleanField()
    ideal_determined = serializers.BooleanField()
    segments_learned = serializers.IntegerField()
    recovered_value = serializers.IntegerField(allow_null=True)


class LeakageReportSerializer(serializers.Serializer):
    protocol = serializers.CharField(source="config.kind")
    n = serializers.IntegerField(source="config.n")
    modulus = serializers.IntegerField(source="config.modulus.value")
    seed = serializers.IntegerField(source="config.master_seed")
    initiator_mask = serializers.BooleanField(source="config.initiator_mask")
    inference = serializers.CharField()
    coalition = serializers.ListField(child=serializers.IntegerField(), source="coalition.parties")
    verdicts = LeakageVerdictSerializer(many=True)
    aggregates = serializers.DictField()


class ClassEstimateSerializer(serializers.Serializer):
    observations = serializers.IntegerField()
    leaks = serializers.IntegerField()
    probability = serializers.FloatField(allow_null=True)
    standard_error = serializers.FloatField(allow_null=True)


class MonteCarloReportSerializer(serializers.Serializer):
    protocol = serializers.CharField(source="config.kind")
    n = serializers.IntegerField(source="config.n")
    modulus = serializers.IntegerField(source="config.modulus.value")
    initiator_mask = serializers.BooleanField(source="config.initiator_mask")
    inference = serializers.CharField()
    seed = serializers.IntegerField()
    trials = serializers.IntegerField()
    coalition_size = serializers.IntegerField()
    estimates = serializers.SerializerMethodField()

    def get_estimates(self, obj):
        return {cls: ClassEstimateSerializer(estimate).data for cls, estimate in obj.estimates.items()}


def render_json(data):
    return JSONRenderer().render(data, renderer_context={"indent": 2}).decode("utf-8") + "\n"
