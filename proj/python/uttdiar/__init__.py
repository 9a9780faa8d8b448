# Copyright 2026  The uttdiar Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
# KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
# WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
# MERCHANTABLITY OR NON-INFRINGEMENT.
# See the Apache 2 License for the specific language governing permissions and
# limitations under the License.
"""Utterance-by-utterance overlap-aware diarization."""

from ._uttdiar import (
    ConstraintViolation,
    DegenerateEmbedding,
    Error,
    Infeasible,
    InvalidInput,
    ParseError,
    Timeline,
    UndefinedDer,
    assign,
    assignment_loss,
    cluster,
    compute_losses,
    decode,
    default_config,
    diarize,
    embedding_loss,
    score,
    simulate,
    widen_ubd,
)

__all__ = [
    "ConstraintViolation",
    "DegenerateEmbedding",
    "Error",
    "Infeasible",
    "InvalidInput",
    "ParseError",
    "Timeline",
    "UndefinedDer",
    "assign",
    "assignment_loss",
    "cluster",
    "compute_losses",
    "decode",
    "default_config",
    "diarize",
    "embedding_loss",
    "score",
    "simulate",
    "widen_ubd",
]
