#pragma once

#include <iosfwd>
#include <string>

#include "certilip/model.hpp"

namespace certilip {

// Versioned structured-text format: a header with the model kind, dimensions
// and hyperparameters, then row-major weight blocks printed with 17
// significant digits so that save/load round-trips bit-exactly.
void save_model(const Model& model, std::ostream& out);
void save_model_file(const Model& model, const std::string& path);

Model load_model(std::istream& in);
Model load_model_file(const std::string& path);

} // namespace certilip
