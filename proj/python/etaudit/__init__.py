# Copyright 2026 The etaudit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Equal treatment auditing of predictive models."""

from ._etaudit import (
    DataError,
    UsageError,
    __version__,
    audit,
    auc,
    brunner_munzel,
    counterexamples,
    explain,
    generate,
    ks_two_sample,
    power,
    run_cli,
    wasserstein,
)

__all__ = [
    "DataError",
    "UsageError",
    "__version__",
    "audit",
    "auc",
    "brunner_munzel",
    "counterexamples",
    "explain",
    "generate",
    "ks_two_sample",
    "power",
    "run_cli",
    "wasserstein",
]
