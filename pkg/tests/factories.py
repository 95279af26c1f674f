"""
Factory classes for generating test data using factory_boy.
"""

import factory
from factory.django import DjangoModelFactory

from core.models import NumericMode, RunRecord


class RunRecordFactory(DjangoModelFactory):
    """Factory for creating RunRecord instances."""

    class Meta:
        model = RunRecord

    command = factory.Iterator(["box", "sim", "ineq", "cv", "reduce", "sweep"])
    seed = factory.Sequence(lambda n: str(1000 + n))
    output_format = "json"
    numeric_mode = NumericMode.FLOAT
    succeeded = True
    arguments = factory.LazyAttribute(lambda obj: {"seed": int(obj.seed)})
    payload = factory.Dict({"value": 0.84})
