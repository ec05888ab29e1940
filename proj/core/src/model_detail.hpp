#pragma once

#include "binio.hpp"
#include "ffnfold/model.hpp"

namespace ffnfold::detail {

// Raw f32 blob of one layer in model-file order: w1, b1, w2, b2.
void write_layer_blob(binio::Writer& w, const FfnLayer& layer);
FfnLayer read_layer_blob(binio::Reader& r, std::size_t d, std::size_t h,
                         Activation act);

}  // namespace ffnfold::detail
