#pragma once

#include <string>

#include "nykrls/solvers.hpp"

namespace nykrls {

// JSON model files carry the kernel, lambda, landmark matrix, and
// coefficients at full double precision; load(save(model)) predicts
// identically to the original.
void save_model(const NystromModel& model, const std::string& path);
NystromModel load_model(const std::string& path);

std::string model_to_json(const NystromModel& model);
NystromModel model_from_json(const std::string& text);

}  // namespace nykrls
