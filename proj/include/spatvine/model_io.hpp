// JSON persistence of fitted models. Files round-trip byte-identically:
// load followed by save reproduces the input exactly.
#pragma once

#include <string>

#include "spatvine/pipeline.hpp"

namespace spatvine {

void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace spatvine
