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

import copy
import numbers

from plbiclust.exceptions import ConfigError


def _same_kind(value, default):
    if isinstance(default, bool) or isinstance(value, bool):
        return isinstance(value, bool) and isinstance(default, bool)
    if isinstance(default, numbers.Real):
        return isinstance(value, numbers.Real)
    if isinstance(default, (list, tuple)):
        return isinstance(value, (list, tuple))
    return type(value) == type(default)


class PrototypeHandler(object):
    """
    Checks a config dictionary against a prototype.  Every prototype key
    missing from the item is filled with a copy of the prototype value.  A
    supplied value must be of the same kind as the prototype value (any
    real number matches a numeric prototype); a prototype value of ``None``
    marks an optional entry that accepts anything.
    """

    def __init__(self, prototype, strict=True):
        self.prototype = prototype
        self.strict = strict

    def _fail(self, response, error_type, msg):
        response.status = 'error'
        response.error_type = error_type
        response.error_code = ConfigError.exit_code
        response.error_message = msg
        return False

    def check(self, item, response):
        if self.strict:
            for key in item:
                if key not in self.prototype:
                    return self._fail(response, 'UnknownAttribute',
                                      'Unknown attribute {}'.format(key))
        for key in self.prototype:
            value = self.prototype[key]
            if key in item:
                if value is None:
                    continue
                if not _same_kind(item[key], value):
                    msg = 'Attribute {} must be of type {}'.format(
                        key, type(value).__name__)
                    return self._fail(response, 'InvalidType', msg)
            else:
                item[key] = copy.deepcopy(value)
        return True
