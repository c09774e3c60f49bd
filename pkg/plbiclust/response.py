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

import numpy as np


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.bool_):
        return bool(obj)
    else:
        return obj


class FitResponse(object):

    def __init__(self, debug=False, response_data=None):
        self._debug = debug
        if response_data:
            self.__dict__.update(response_data)
        else:
            self.status = 'success'
            self.data = None
            self.error_type = None
            self.error_code = None
            self.error_message = None
            self.raw_response = None
            self.metadata = None

    def __repr__(self):
        return 'Status: {}'.format(self.status)

    @property
    def is_successful(self):
        return self.status == 'success'

    def fail(self, error):
        self.status = 'error'
        self.error_type = error.__class__.__name__
        self.error_code = getattr(error, 'exit_code', 1)
        self.error_message = str(error)

    def flatten(self):
        flat = copy.deepcopy(self.__dict__)
        hiddens = []
        for k in flat:
            if k.startswith('_'):
                hiddens.append(k)
        for k in hiddens:
            del flat[k]
        return _jsonable(flat)

    def prepare(self):
        # raw_response holds the full algorithm result object; only the
        # debug mode keeps it around after the labels have been extracted
        if self.status == 'success':
            if self.raw_response is not None:
                if not self._debug:
                    self.raw_response = None
