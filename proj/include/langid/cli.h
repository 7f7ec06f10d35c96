// langid/cli.h

// Copyright 2026  The langid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LANGID_CLI_H_
#define LANGID_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace langid {

/// Runs one CLI invocation. Results go to `out`, diagnostics to `err`.
/// Returns 0 on success, 1 on usage errors, 2 on runtime errors.
int Dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace langid

#endif  // LANGID_CLI_H_
