#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "risctl/nn/tensor.hpp"

namespace risctl::nn {

// Flat text checkpoint: a version line, a parameter count, then one
// (name, rows, cols) header line and one value line per parameter, in
// order. Values use %.17g so doubles round-trip exactly.
//
//   risctl-checkpoint-v1
//   <count>
//   <name> <rows> <cols>
//   <v0> <v1> ...

void save_checkpoint(std::ostream& os, const std::vector<ParamTensor*>& params);
void save_checkpoint(const std::string& path,
                     const std::vector<ParamTensor*>& params);

// Loads into the given parameters; names, order and shapes must match.
void load_checkpoint(std::istream& is, const std::vector<ParamTensor*>& params);
void load_checkpoint(const std::string& path,
                     const std::vector<ParamTensor*>& params);

}  // namespace risctl::nn
