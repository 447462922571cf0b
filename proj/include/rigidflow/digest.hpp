//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_DIGEST_HPP_
#define RIGIDFLOW_DIGEST_HPP_

#include <string>
#include <string_view>

namespace rigidflow {

std::string sha256_hex(std::string_view data);

// Throws IoError when the file cannot be read.
std::string sha256_file(const std::string &path);

}  // namespace rigidflow

#endif  // RIGIDFLOW_DIGEST_HPP_
