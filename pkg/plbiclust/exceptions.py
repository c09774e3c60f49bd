# Copyright (c) 2026 CloudNative, Inc.
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


class PLBiclustError(Exception):

    exit_code = 1


class ConfigError(PLBiclustError):

    exit_code = 2


class ParameterError(ConfigError):

    pass


class PartitionError(ConfigError):

    pass


class DataError(PLBiclustError):

    exit_code = 3


class DimensionError(DataError):

    pass


class NumericalError(PLBiclustError):

    exit_code = 4

    def __init__(self, message, residual=None):
        super(NumericalError, self).__init__(message)
        self.residual = residual
