//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_SDF_HPP_
#define RIGIDFLOW_SDF_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "rigidflow/molgraph.hpp"

namespace rigidflow {

// Reads a V2000 multi-record structure-data file. Bond type 4 maps to
// aromatic; atom-block and "M  CHG" charges are passed through. Dummy atoms
// never appear in files. Throws ParseError with a 1-based line number.
std::vector<MolecularGraph>
parse_sdf(std::string_view text,
          const ElementVocabulary &elements = ElementVocabulary());

std::vector<MolecularGraph>
read_sdf_file(const std::string &path,
              const ElementVocabulary &elements = ElementVocabulary());

// Writes V2000 records with %10.4f coordinates. Dummy atoms are skipped and
// bonds to them dropped.
std::string write_sdf(const std::vector<MolecularGraph> &mols);
void write_sdf_file(const std::string &path,
                    const std::vector<MolecularGraph> &mols);

}  // namespace rigidflow

#endif  // RIGIDFLOW_SDF_HPP_
