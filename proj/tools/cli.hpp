/*
 * Copyright 2026 The windowshap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef WINDOWSHAP_TOOLS_CLI_HPP_
#define WINDOWSHAP_TOOLS_CLI_HPP_

#include <ostream>

namespace windowshap::cli {

// Exit codes: 0 success (or help printed), 2 config error,
// 3 model error, 4 I/O error. Errors go to `err` as one JSON line.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace windowshap::cli

#endif  // WINDOWSHAP_TOOLS_CLI_HPP_
