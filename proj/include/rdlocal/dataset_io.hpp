#pragma once

#include <string>
#include <string_view>

#include "rdlocal/types.hpp"

namespace rdlocal {

// FNV-1a 64-bit of raw bytes, lowercase hex.
std::string fnv1a64_hex(std::string_view bytes);

// Canonical on-disk form: <stem>.csv with columns
//   id, z, y, x, <covariate names...>, weight
// (id is the row index) plus <stem>.meta.json holding outcome, treatment,
// covariates, cutoff, n and source_hash. Numbers are %.17g so a round trip
// is bit-exact. source_hash defaults to the hash of the emitted csv body.
void write_dataset(const Dataset& data, const std::string& stem,
                   const std::string& source_hash = "");

Dataset read_dataset(const std::string& stem);

}  // namespace rdlocal
