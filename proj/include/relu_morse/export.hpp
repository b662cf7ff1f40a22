#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "relu_morse/complex.hpp"
#include "relu_morse/dgvf.hpp"
#include "relu_morse/homology.hpp"
#include "relu_morse/orientation.hpp"

namespace relu_morse {

using Json = nlohmann::ordered_json;

Json complex_to_json(const CanonicalComplex& complex);
Json classification_to_json(const CanonicalComplex& complex, const std::vector<VertexClassification>& classes);
Json shallow_to_json(const ShallowReport& report);
Json matching_to_json(const Matching& m);
Json perfectness_to_json(const PerfectnessReport& report);

}  // namespace relu_morse
