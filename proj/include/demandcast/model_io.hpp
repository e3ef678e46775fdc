#pragma once

#include <string>
#include <string_view>

#include "demandcast/core.hpp"
#include "demandcast/features.hpp"
#include "demandcast/model.hpp"

namespace demandcast {

inline constexpr int kModelFileVersion = 1;

/// A fitted model plus the context needed to forecast with it later.
struct ModelFile {
    SkuId sku;
    FittedModel model;
    SeasonWindows windows;
};

/// Line-oriented `key value...` text. Doubles use the shortest round-trip form, so
/// read_model(write_model(m)) reproduces every parameter bit for bit.
std::string write_model(const ModelFile& file);
ModelFile read_model(std::string_view bytes);

}  // namespace demandcast
